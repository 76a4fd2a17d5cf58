//! Per-(scenario, episode) means with normal-approximation 95% confidence intervals.

use std::collections::BTreeMap;

use log::warn;

use crate::engine::{EpisodeRecord, ScenarioRecords};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatePoint {
    pub scenario: usize,
    pub episode: u32,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub reps: usize,
    /// Fewer than two repetitions: the interval collapses to the mean.
    pub degenerate: bool,
}

impl AggregatePoint {
    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    /// True when the two intervals share no point.
    pub fn separated_from(&self, other: &AggregatePoint) -> bool {
        self.ci_low > other.ci_high || other.ci_low > self.ci_high
    }
}

/// Welford running moments. `merge` combines partial sums (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * (self.count as f64) * (other.count as f64) / n;
        self.count += other.count;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation (`n - 1` denominator); `None` below two values.
    pub fn sample_sd(&self) -> Option<f64> {
        (self.count >= 2).then(|| (self.m2.max(0.0) / (self.count - 1) as f64).sqrt())
    }
}

fn point(scenario: usize, episode: u32, m: &Moments) -> AggregatePoint {
    match m.sample_sd() {
        Some(sd) => {
            let half = Z_95 * sd / (m.count() as f64).sqrt();
            AggregatePoint {
                scenario,
                episode,
                mean: m.mean(),
                ci_low: m.mean() - half,
                ci_high: m.mean() + half,
                reps: m.count(),
                degenerate: false,
            }
        }
        None => {
            warn!("scenario {scenario}, episode {episode}: fewer than 2 repetitions, interval is degenerate");
            AggregatePoint {
                scenario,
                episode,
                mean: m.mean(),
                ci_low: m.mean(),
                ci_high: m.mean(),
                reps: m.count(),
                degenerate: true,
            }
        }
    }
}

/// Folds `(scenario, record)` pairs into points sorted by `(scenario, episode)`.
pub fn aggregate<'a, I>(records: I) -> Vec<AggregatePoint>
where
    I: IntoIterator<Item = (usize, &'a EpisodeRecord)>,
{
    let mut acc: BTreeMap<(usize, u32), Moments> = BTreeMap::new();
    for (scenario, r) in records {
        acc.entry((scenario, r.episode)).or_default().push(r.performance);
    }
    acc.iter().map(|(&(s, t), m)| point(s, t, m)).collect()
}

/// Aggregates the output of the grid runner.
pub fn aggregate_runs(runs: &[ScenarioRecords]) -> Vec<AggregatePoint> {
    aggregate(
        runs.iter()
            .flat_map(|run| run.records.iter().map(move |r| (run.scenario, r))),
    )
}

/// Looks up the point for `(scenario, episode)` in sorted output.
pub fn find(points: &[AggregatePoint], scenario: usize, episode: u32) -> Option<&AggregatePoint> {
    points
        .binary_search_by(|p| (p.scenario, p.episode).cmp(&(scenario, episode)))
        .ok()
        .map(|i| &points[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitspace::Strategy;
    use approx::assert_abs_diff_eq;

    fn rec(rep: u32, t: u32, v: f64) -> EpisodeRecord {
        EpisodeRecord {
            repetition: rep,
            episode: t,
            performance: v,
            strategy: Strategy::zeros(2).unwrap(),
        }
    }

    #[test]
    fn constant_values_have_zero_width() {
        let rs: Vec<_> = (0..50).map(|r| rec(r, 1, 0.37)).collect();
        let p = aggregate(rs.iter().map(|r| (0, r)));
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].mean, 0.37);
        assert_eq!((p[0].ci_low, p[0].ci_high), (0.37, 0.37));
        assert_eq!(p[0].reps, 50);
    }

    #[test]
    fn two_value_hand_computation() {
        let rs = [rec(0, 1, 0.0), rec(1, 1, 1.0)];
        let p = aggregate(rs.iter().map(|r| (0, r)))[0];
        // sd = sqrt(0.5) ~ 0.7071, se = sd / sqrt(2) = 0.5
        assert_abs_diff_eq!(p.mean, 0.5);
        assert_abs_diff_eq!(p.ci_low, 0.5 - 1.96 * 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.ci_high, 0.5 + 1.96 * 0.5, epsilon = 1e-12);
        assert!(!p.degenerate);
    }

    #[test]
    fn single_repetition_is_degenerate() {
        let rs = [rec(0, 3, 0.8)];
        let p = aggregate(rs.iter().map(|r| (2, r)))[0];
        assert!(p.degenerate);
        assert_eq!((p.ci_low, p.mean, p.ci_high), (0.8, 0.8, 0.8));
        assert_eq!((p.scenario, p.episode), (2, 3));
    }

    #[test]
    fn doubling_reps_shrinks_width_by_sqrt2() {
        let base: Vec<f64> = (0..100).map(|i| (i % 7) as f64 / 7.0).collect();
        let once: Vec<_> = base.iter().enumerate().map(|(i, &v)| rec(i as u32, 1, v)).collect();
        let twice: Vec<_> = base
            .iter()
            .chain(&base)
            .enumerate()
            .map(|(i, &v)| rec(i as u32, 1, v))
            .collect();
        let a = aggregate(once.iter().map(|r| (0, r)))[0];
        let b = aggregate(twice.iter().map(|r| (0, r)))[0];
        let ratio = a.half_width() / b.half_width();
        // sample sd changes slightly with n (n-1 denominator), so allow a small band
        assert!((ratio - 2f64.sqrt()).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn sorted_by_scenario_then_episode() {
        let rs = [rec(0, 2, 0.1), rec(0, 1, 0.2), rec(0, 1, 0.3)];
        let p = aggregate([(1, &rs[0]), (0, &rs[1]), (1, &rs[2])]);
        let keys: Vec<_> = p.iter().map(|p| (p.scenario, p.episode)).collect();
        assert_eq!(keys, vec![(0, 1), (1, 1), (1, 2)]);
        assert_eq!(find(&p, 1, 2).unwrap().mean, 0.1);
        assert!(find(&p, 3, 1).is_none());
    }

    #[test]
    fn merged_moments_match_serial() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 / 1000.0).collect();
        let mut serial = Moments::default();
        xs.iter().for_each(|&x| serial.push(x));
        let mut merged = Moments::default();
        for chunk in xs.chunks(97) {
            let mut part = Moments::default();
            chunk.iter().for_each(|&x| part.push(x));
            merged.merge(&part);
        }
        assert_eq!(merged.count(), serial.count());
        assert_abs_diff_eq!(merged.mean(), serial.mean(), epsilon = 1e-12);
        assert_abs_diff_eq!(merged.sample_sd().unwrap(), serial.sample_sd().unwrap(), epsilon = 1e-12);
    }
}
