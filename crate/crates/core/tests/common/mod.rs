//! Brute-force oracles shared by the integration tests. None of them call back
//! into the scoring code they are used to check.

#![allow(dead_code)]

use openstrat::bitspace::Strategy;
use openstrat::landscape::Landscape;

/// Position-by-position count of differing decisions.
pub fn hamming(a: &Strategy, b: &Strategy) -> usize {
    a.bits().iter().zip(b.bits()).filter(|(x, y)| **x != *y).count()
}

/// Summed distance from every pool member to every idea.
pub fn minisum_scores(ideas: &[Strategy], pool: &[Strategy]) -> Vec<usize> {
    pool.iter()
        .map(|c| ideas.iter().map(|i| hamming(c, i)).sum())
        .collect()
}

/// Borda totals counted pairwise: a candidate earns one point for every
/// candidate ranked below it on each ballot.
pub fn borda_totals(slate: &[Strategy], rankings: &[Vec<Strategy>]) -> Vec<u64> {
    slate
        .iter()
        .map(|c| {
            rankings
                .iter()
                .map(|r| {
                    let pos = r.iter().position(|x| x == c).expect("candidate on ballot");
                    r.iter().skip(pos + 1).count() as u64
                })
                .sum()
        })
        .collect()
}

/// True when no single flip strictly improves raw fitness.
pub fn is_local_optimum(landscape: &Landscape, s: &Strategy) -> bool {
    let here = landscape.raw_fitness(s);
    (0..s.len()).all(|d| {
        let mut bits = s.bits();
        bits[d] = !bits[d];
        let neighbor = Strategy::from_bits(&bits).unwrap();
        landscape.raw_fitness(&neighbor) <= here
    })
}

/// Steepest-ascent single-flip hill climb on raw fitness.
pub fn hill_climb(landscape: &Landscape, start: Strategy) -> Strategy {
    let mut cur = start;
    loop {
        let mut best = cur;
        let mut best_fit = landscape.raw_fitness(&cur);
        for d in 0..cur.len() {
            let mut bits = cur.bits();
            bits[d] = !bits[d];
            let n = Strategy::from_bits(&bits).unwrap();
            let f = landscape.raw_fitness(&n);
            if f > best_fit {
                best = n;
                best_fit = f;
            }
        }
        if best == cur {
            return cur;
        }
        cur = best;
    }
}

/// Pearson correlation of two equally long samples.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}
