//! The episode loop, per-repetition seeding and the scenario-grid runner.
//!
//! Each repetition draws from its own ChaCha8 stream: the master seed keys the
//! generator and the repetition index selects the stream. Repetitions can
//! therefore run on any number of workers, in any order, with identical output.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bitspace::{Neighborhood, Strategy};
use crate::correlation::{base_matrix, perturb};
use crate::error::{Error, Result};
use crate::landscape::{generate_ensemble, LandscapeEnsemble, MAX_DECISIONS};
use crate::practitioner::{draw_error_stddevs, Practitioner};
use crate::voting::{borda_select, build_ballot, minisum_shortlist, Ballot, Shortlist};

/// One full parameter assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Decisions per strategy (N).
    pub n: usize,
    /// Interactions per decision (K).
    pub k: usize,
    /// Practitioners including the firm (S).
    pub s_count: usize,
    /// Target pairwise landscape correlation.
    pub rho: f64,
    /// Hamming radius of appropriate candidates (C).
    pub c: usize,
    /// Strategies each practitioner imagines per episode (Q).
    pub q: usize,
    /// Shortlist size (L).
    pub l: usize,
    /// Standard deviation of the `D_j` that set individual error levels (E).
    pub e: f64,
    /// Episodes per repetition (T).
    pub t_max: usize,
    pub repetitions: usize,
    /// Perturbation magnitude applied to the equicorrelation matrix.
    pub jitter: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub const DEFAULT_N: usize = 10;
    pub const DEFAULT_RHO: f64 = 0.5;
    pub const DEFAULT_C: usize = 2;
    pub const DEFAULT_Q: usize = 2;
    pub const DEFAULT_L: usize = 3;
    pub const DEFAULT_E: f64 = 0.0625;
    pub const DEFAULT_T: usize = 100;
    pub const DEFAULT_REPETITIONS: usize = 4000;
    pub const DEFAULT_JITTER: f64 = 0.1;

    /// Baseline parameters with the two independent variables supplied.
    pub fn with_defaults(k: usize, s_count: usize) -> Self {
        ScenarioConfig {
            n: Self::DEFAULT_N,
            k,
            s_count,
            rho: Self::DEFAULT_RHO,
            c: Self::DEFAULT_C,
            q: Self::DEFAULT_Q,
            l: Self::DEFAULT_L,
            e: Self::DEFAULT_E,
            t_max: Self::DEFAULT_T,
            repetitions: Self::DEFAULT_REPETITIONS,
            jitter: Self::DEFAULT_JITTER,
            seed: 0,
        }
    }

    /// Number of appropriate candidates, `sum_{k=1..C} binom(N, k)`.
    pub fn pool_size(&self) -> usize {
        (1..=self.c)
            .map(|k| (0..k).fold(1usize, |acc, i| acc * (self.n - i) / (i + 1)))
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(key: &'static str, reason: String) -> Result<()> {
            Err(Error::InvalidConfig { key, reason })
        }
        if self.n == 0 || self.n > MAX_DECISIONS {
            return bad("n", format!("must be in 1..={MAX_DECISIONS}, got {}", self.n));
        }
        if self.k >= self.n {
            return bad("k", format!("must satisfy 0 <= K <= N-1 = {}, got {}", self.n - 1, self.k));
        }
        if self.s_count == 0 {
            return bad("s_count", "must be >= 1".into());
        }
        if self.c == 0 || self.c >= self.n {
            return bad("c", format!("must satisfy 0 < C < N = {}, got {}", self.n, self.c));
        }
        let pool = self.pool_size();
        if self.q == 0 || self.q > pool {
            return bad("q", format!("must be in 1..={pool} (candidate pool size), got {}", self.q));
        }
        if self.l == 0 || self.l > pool {
            return bad("l", format!("must be in 1..={pool} (candidate pool size), got {}", self.l));
        }
        if let Err(e) = base_matrix(self.s_count, self.rho) {
            return bad("rho", e.to_string());
        }
        if !(self.e >= 0.0 && self.e.is_finite()) {
            return bad("e", format!("must be finite and >= 0, got {}", self.e));
        }
        if self.t_max == 0 {
            return bad("t_max", "must be >= 1".into());
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return bad("jitter", format!("must be finite and >= 0, got {}", self.jitter));
        }
        Ok(())
    }
}

/// Firm performance after one episode of one repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub repetition: u32,
    /// 1-based episode index `t`.
    pub episode: u32,
    /// True normalized firm performance of the implemented strategy.
    pub performance: f64,
    pub strategy: Strategy,
}

/// Everything that happened in one episode.
#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub previous: Strategy,
    pub ideas: Vec<Strategy>,
    pub shortlist: Shortlist,
    pub slate: Vec<Strategy>,
    pub ballots: Vec<Ballot>,
    pub winner: Strategy,
    pub performance: f64,
}

/// Landscapes, error levels and the firm's current strategy.
#[derive(Debug, Clone)]
pub struct SimulationState {
    ensemble: LandscapeEnsemble,
    error_stddevs: Vec<f64>,
    current: Strategy,
    neighborhood: Neighborhood,
}

impl SimulationState {
    pub fn ensemble(&self) -> &LandscapeEnsemble {
        &self.ensemble
    }

    pub fn error_stddevs(&self) -> &[f64] {
        &self.error_stddevs
    }

    pub fn current(&self) -> Strategy {
        self.current
    }

    pub fn practitioners(&self) -> impl Iterator<Item = Practitioner<'_>> + '_ {
        self.ensemble
            .landscapes()
            .iter()
            .zip(&self.error_stddevs)
            .enumerate()
            .map(|(j, (l, &e))| Practitioner::new(j, e, l).expect("validated error level"))
    }
}

/// Preparation phase: correlation structure, landscapes, error levels and a
/// uniformly random starting strategy.
pub fn prepare<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<SimulationState> {
    config.validate()?;
    let corr = perturb(&base_matrix(config.s_count, config.rho)?, config.jitter, rng)?;
    let ensemble = generate_ensemble(config.n, config.k, &corr, rng)?;
    let error_stddevs = draw_error_stddevs(config.s_count, config.e, rng)?;
    let current = Strategy::new(rng.random_range(0..1u64 << config.n), config.n)?;
    Ok(SimulationState {
        ensemble,
        error_stddevs,
        current,
        neighborhood: Neighborhood::new(config.n, config.c)?,
    })
}

/// Generation, selection and implementation for one episode. The winner
/// becomes the state's current strategy.
pub fn run_episode<R: Rng + ?Sized>(
    state: &mut SimulationState,
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<EpisodeOutcome> {
    let previous = state.current;
    let pool = state.neighborhood.around(&previous)?;

    let ideas = state
        .practitioners()
        .map(|p| p.generate_idea(&pool, config.q, rng))
        .collect::<Result<Vec<_>>>()?;
    let shortlist = minisum_shortlist(&ideas, &pool, config.l, rng)?;

    let mut slate = shortlist.candidates.clone();
    slate.push(previous);
    let ballots = state
        .practitioners()
        .map(|p| build_ballot(&p, &slate, rng))
        .collect::<Result<Vec<_>>>()?;
    let winner = borda_select(&slate, &ballots, rng)?;

    let performance = state.ensemble.firm().performance(&winner);
    state.current = winner;
    Ok(EpisodeOutcome {
        previous,
        ideas,
        shortlist,
        slate,
        ballots,
        winner,
        performance,
    })
}

/// The random stream owned by one repetition.
pub fn repetition_rng(seed: u64, repetition: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repetition);
    rng
}

/// Prepares once, then runs `T` episodes.
pub fn run_repetition(config: &ScenarioConfig, repetition: usize) -> Result<Vec<EpisodeRecord>> {
    let mut rng = repetition_rng(config.seed, repetition as u64);
    let mut state = prepare(config, &mut rng)?;
    (1..=config.t_max)
        .map(|t| {
            let outcome = run_episode(&mut state, config, &mut rng)?;
            Ok(EpisodeRecord {
                repetition: repetition as u32,
                episode: t as u32,
                performance: outcome.performance,
                strategy: outcome.winner,
            })
        })
        .collect()
}

/// All records of one scenario, ordered by `(repetition, episode)`.
#[derive(Debug, Clone)]
pub struct ScenarioRecords {
    pub scenario: usize,
    pub config: ScenarioConfig,
    pub records: Vec<EpisodeRecord>,
}

/// Runs every repetition of every scenario on `workers` threads (0 = one per
/// core). Output does not depend on the worker count.
pub fn run_scenario_grid(configs: &[ScenarioConfig], workers: usize) -> Result<Vec<ScenarioRecords>> {
    run_scenario_grid_with_progress(configs, workers, |_, _| {})
}

/// As [`run_scenario_grid`], calling `progress(scenario, records)` as each
/// scenario completes.
pub fn run_scenario_grid_with_progress<F>(
    configs: &[ScenarioConfig],
    workers: usize,
    mut progress: F,
) -> Result<Vec<ScenarioRecords>>
where
    F: FnMut(usize, &ScenarioRecords),
{
    for c in configs {
        c.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;

    let mut out = Vec::with_capacity(configs.len());
    for (scenario, config) in configs.iter().enumerate() {
        let per_rep: Vec<Vec<EpisodeRecord>> = pool.install(|| {
            (0..config.repetitions)
                .into_par_iter()
                .map(|r| run_repetition(config, r))
                .collect::<Result<_>>()
        })?;
        let run = ScenarioRecords {
            scenario,
            config: config.clone(),
            records: per_rep.into_iter().flatten().collect(),
        };
        progress(scenario, &run);
        out.push(run);
    }
    Ok(out)
}
