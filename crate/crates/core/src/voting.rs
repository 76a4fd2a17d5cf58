//! Preference aggregation: minisum approval shortlisting and Borda selection.
//!
//! Random tie order is realized by giving every candidate an independent
//! uniform key per invocation and sorting by `(score, key)`.

use std::collections::HashMap;

use rand::Rng;

use crate::bitspace::Strategy;
use crate::error::{Error, Result};
use crate::practitioner::Practitioner;

/// The `L` pool members with the lowest summed Hamming distance to the ideas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shortlist {
    pub candidates: Vec<Strategy>,
    /// Minisum score of each candidate, same order as `candidates`.
    pub scores: Vec<usize>,
}

/// One voter's strict ranking of the slate, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ballot {
    pub voter: usize,
    pub ranking: Vec<Strategy>,
}

fn check_lengths<'a>(expected: usize, items: impl IntoIterator<Item = &'a Strategy>) -> Result<()> {
    for s in items {
        if s.len() != expected {
            return Err(Error::LengthMismatch {
                left: s.len(),
                right: expected,
            });
        }
    }
    Ok(())
}

/// Sum of Hamming distances from each pool member to every idea.
pub fn minisum_scores(ideas: &[Strategy], pool: &[Strategy]) -> Vec<usize> {
    pool.iter()
        .map(|c| ideas.iter().map(|idea| c.distance(idea)).sum())
        .collect()
}

pub fn minisum_shortlist<R: Rng + ?Sized>(
    ideas: &[Strategy],
    pool: &[Strategy],
    l: usize,
    rng: &mut R,
) -> Result<Shortlist> {
    let Some(first) = pool.first() else {
        return Err(Error::InvalidInput("candidate pool is empty".into()));
    };
    if l == 0 || l > pool.len() {
        return Err(Error::InvalidInput(format!(
            "shortlist size L={l} must be in 1..={}",
            pool.len()
        )));
    }
    check_lengths(first.len(), pool.iter().chain(ideas))?;

    let scores = minisum_scores(ideas, pool);
    let mut order: Vec<(usize, u64, usize)> = scores
        .iter()
        .enumerate()
        .map(|(i, &score)| (score, rng.random::<u64>(), i))
        .collect();
    order.sort_unstable();
    let (candidates, scores) = order[..l]
        .iter()
        .map(|&(score, _, i)| (pool[i], score))
        .unzip();
    Ok(Shortlist { candidates, scores })
}

/// Ranks the slate by one fresh noisy evaluation per member.
pub fn build_ballot<R: Rng + ?Sized>(
    voter: &Practitioner<'_>,
    slate: &[Strategy],
    rng: &mut R,
) -> Result<Ballot> {
    if slate.is_empty() {
        return Err(Error::InvalidInput("selection slate is empty".into()));
    }
    let mut perceived: Vec<(f64, u64, Strategy)> = slate
        .iter()
        .map(|s| (voter.noisy_eval(s, rng), rng.random::<u64>(), *s))
        .collect();
    perceived.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(Ballot {
        voter: voter.index(),
        ranking: perceived.into_iter().map(|(_, _, s)| s).collect(),
    })
}

/// Borda totals per slate position: rank `p` (0-based) on a ballot earns
/// `slate.len() - 1 - p` points.
pub fn borda_tally(slate: &[Strategy], ballots: &[Ballot]) -> Result<Vec<u64>> {
    if slate.is_empty() {
        return Err(Error::InvalidInput("selection slate is empty".into()));
    }
    let position: HashMap<Strategy, usize> = slate.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    if position.len() != slate.len() {
        return Err(Error::InvalidInput("selection slate contains duplicates".into()));
    }
    let top = slate.len() as u64 - 1;
    let mut totals = vec![0u64; slate.len()];
    let mut seen = vec![usize::MAX; slate.len()];
    for (b, ballot) in ballots.iter().enumerate() {
        if ballot.ranking.len() != slate.len() {
            return Err(Error::InvalidInput(format!(
                "ballot of voter {} ranks {} candidates, slate has {}",
                ballot.voter,
                ballot.ranking.len(),
                slate.len()
            )));
        }
        for (rank, s) in ballot.ranking.iter().enumerate() {
            let i = *position.get(s).ok_or_else(|| {
                Error::InvalidInput(format!("ballot of voter {} ranks {s}, not on the slate", ballot.voter))
            })?;
            if seen[i] == b {
                return Err(Error::InvalidInput(format!(
                    "ballot of voter {} ranks {s} twice",
                    ballot.voter
                )));
            }
            seen[i] = b;
            totals[i] += top - rank as u64;
        }
    }
    Ok(totals)
}

/// Borda winner; among maximal totals one is picked uniformly at random.
pub fn borda_select<R: Rng + ?Sized>(
    slate: &[Strategy],
    ballots: &[Ballot],
    rng: &mut R,
) -> Result<Strategy> {
    let totals = borda_tally(slate, ballots)?;
    let best = *totals.iter().max().expect("slate is non-empty");
    let leaders: Vec<usize> = (0..slate.len()).filter(|&i| totals[i] == best).collect();
    let pick = if leaders.len() == 1 {
        leaders[0]
    } else {
        leaders[rng.random_range(0..leaders.len())]
    };
    Ok(slate[pick])
}
