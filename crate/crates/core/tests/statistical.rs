mod common;

use openstrat::bitspace::Strategy;
use openstrat::correlation::{base_matrix, cholesky_factor, perturb, sample_correlated_uniforms};
use openstrat::landscape::{generate_ensemble, InteractionMatrix, Landscape};
use openstrat::practitioner::Practitioner;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use std::sync::Arc;

const DRAWS: usize = 100_000;

fn normal_scores(samples: &[Vec<f64>], column: usize) -> Vec<f64> {
    let phi = Normal::standard();
    samples.iter().map(|row| phi.inverse_cdf(row[column])).collect()
}

#[test]
fn copula_recovers_matrix_entries() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let corr = perturb(&base_matrix(5, 0.5).unwrap(), 0.1, &mut rng).unwrap();
    let factor = cholesky_factor(&corr).unwrap();
    let samples = sample_correlated_uniforms(&factor, DRAWS, &mut rng);
    let cols: Vec<Vec<f64>> = (0..5).map(|c| normal_scores(&samples, c)).collect();
    for i in 0..5 {
        for j in i + 1..5 {
            let r = common::pearson(&cols[i], &cols[j]);
            assert!((r - corr.get(i, j)).abs() <= 0.03, "({i},{j}): {r} vs {}", corr.get(i, j));
        }
    }
}

#[test]
fn identity_factor_gives_independent_uniforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let factor = cholesky_factor(&base_matrix(3, 0.0).unwrap()).unwrap();
    let samples = sample_correlated_uniforms(&factor, DRAWS, &mut rng);
    let col = |c: usize| samples.iter().map(|r| r[c]).collect::<Vec<_>>();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let r = common::pearson(&col(i), &col(j));
        assert!(r.abs() < 0.05, "({i},{j}): {r}");
    }
    let mean = col(0).iter().sum::<f64>() / DRAWS as f64;
    assert!((mean - 0.5).abs() < 0.01, "{mean}");
}

#[test]
fn noisy_evaluation_has_the_stated_spread() {
    let links = vec![vec![]; 2];
    let interaction = Arc::new(InteractionMatrix::from_links(links).unwrap());
    let l = Landscape::from_tables(interaction, vec![vec![0.2, 0.8], vec![0.4, 0.6]], 0).unwrap();
    let p = Practitioner::new(0, 0.05, &l).unwrap();
    let s: Strategy = "10".parse().unwrap();
    let truth = l.performance(&s);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let xs: Vec<f64> = (0..DRAWS).map(|_| p.noisy_eval(&s, &mut rng)).collect();
    let mean = xs.iter().sum::<f64>() / DRAWS as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (DRAWS - 1) as f64).sqrt();
    assert!((sd / 0.05 - 1.0).abs() < 0.02, "sd {sd}");
    assert!((mean - truth).abs() < 0.001, "mean {mean} vs {truth}");
}

fn local_optima_mean(k: usize, ensembles: u64) -> f64 {
    let corr = base_matrix(1, 0.0).unwrap();
    let all: Vec<Strategy> = Strategy::all(10).unwrap().collect();
    let total: usize = (0..ensembles)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ens = generate_ensemble(10, k, &corr, &mut rng).unwrap();
            all.iter().filter(|s| common::is_local_optimum(ens.firm(), s)).count()
        })
        .sum();
    total as f64 / ensembles as f64
}

#[test]
fn more_interactions_mean_more_local_peaks() {
    let k4 = local_optima_mean(4, 100);
    let k7 = local_optima_mean(7, 100);
    assert!(k7 > k4, "K=7 {k7} vs K=4 {k4}");
    assert_eq!(local_optima_mean(0, 10), 1.0);
}

#[test]
fn separable_landscapes_climb_to_the_optimum_from_anywhere() {
    let corr = base_matrix(1, 0.0).unwrap();
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ens = generate_ensemble(10, 0, &corr, &mut rng).unwrap();
        let best = ens.firm().argmax();
        for start in Strategy::all(10).unwrap() {
            assert_eq!(common::hill_climb(ens.firm(), start), best, "seed {seed} start {start}");
        }
    }
}

#[test]
fn realized_fitness_correlation_tracks_rho() {
    let corr = base_matrix(4, 0.5).unwrap();
    let all: Vec<Strategy> = Strategy::all(10).unwrap().collect();
    let mut sum = 0.0;
    let mut pairs = 0;
    for seed in 0..30 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ens = generate_ensemble(10, 4, &corr, &mut rng).unwrap();
        let f: Vec<Vec<f64>> = ens
            .landscapes()
            .iter()
            .map(|l| all.iter().map(|s| l.raw_fitness(s)).collect())
            .collect();
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                sum += common::pearson(&f[i], &f[j]);
                pairs += 1;
            }
        }
    }
    let mean = sum / pairs as f64;
    assert!((mean - 0.5).abs() <= 0.1, "{mean}");
}
