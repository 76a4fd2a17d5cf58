//! NK performance landscapes sharing one random interaction structure, with
//! contribution tables filled from correlated uniforms.

use std::io::{self, Write};
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;

use crate::bitspace::Strategy;
use crate::correlation::{cholesky_factor, CorrelationMatrix};
use crate::error::{Error, Result};

/// Landscapes are normalized by exhaustive enumeration, so `N` is capped well below [`crate::bitspace::MAX_LEN`].
pub const MAX_DECISIONS: usize = 24;

/// For each decision, the `K` other decisions its contribution depends on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionMatrix {
    n: usize,
    k: usize,
    links: Vec<Vec<usize>>,
}

impl InteractionMatrix {
    /// Builds an interaction matrix from explicit partner lists.
    pub fn from_links(links: Vec<Vec<usize>>) -> Result<Self> {
        let n = links.len();
        if n == 0 || n > MAX_DECISIONS {
            return Err(Error::UnsupportedLength(n));
        }
        let k = links[0].len();
        for (i, partners) in links.iter().enumerate() {
            let mut seen = partners.clone();
            seen.sort_unstable();
            seen.dedup();
            if partners.len() != k
                || seen.len() != k
                || partners.iter().any(|&p| p == i || p >= n)
            {
                return Err(Error::InvalidInput(format!(
                    "decision {i} needs {k} distinct partners in 0..{n} other than itself, got {partners:?}"
                )));
            }
        }
        Ok(InteractionMatrix { n, k, links })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn links(&self, decision: usize) -> &[usize] {
        &self.links[decision]
    }

    /// Number of entries in each contribution table, `2^(K+1)`.
    pub fn table_len(&self) -> usize {
        1 << (self.k + 1)
    }

    /// Index into decision `i`'s table: the decision's own bit is the most
    /// significant, followed by its partners in link order.
    #[inline]
    pub fn configuration(&self, decision: usize, s: &Strategy) -> usize {
        self.links[decision]
            .iter()
            .fold(usize::from(s.bit(decision)), |acc, &p| {
                (acc << 1) | usize::from(s.bit(p))
            })
    }
}

/// Draws `K` partners for every decision uniformly without replacement.
pub fn generate_interactions<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<InteractionMatrix> {
    if n == 0 || n > MAX_DECISIONS {
        return Err(Error::UnsupportedLength(n));
    }
    if k >= n {
        return Err(Error::InvalidInteractionDegree { n, k });
    }
    let links = (0..n)
        .map(|i| {
            let mut partners: Vec<usize> = index::sample(rng, n - 1, k)
                .into_iter()
                .map(|j| if j >= i { j + 1 } else { j })
                .collect();
            partners.sort_unstable();
            partners
        })
        .collect();
    Ok(InteractionMatrix { n, k, links })
}

/// One practitioner's NK landscape.
#[derive(Debug, Clone)]
pub struct Landscape {
    interaction: Arc<InteractionMatrix>,
    // decision-major: entry (i, c) lives at i * table_len + c
    tables: Vec<f64>,
    // raw fitness of every strategy, indexed by its integer encoding
    fitness: Vec<f64>,
    global_max: f64,
    owner: usize,
}

impl Landscape {
    /// Builds a landscape from explicit contribution tables, one per decision.
    pub fn from_tables(
        interaction: Arc<InteractionMatrix>,
        tables: Vec<Vec<f64>>,
        owner: usize,
    ) -> Result<Self> {
        let width = interaction.table_len();
        if tables.len() != interaction.n() || tables.iter().any(|t| t.len() != width) {
            return Err(Error::InvalidInput(format!(
                "expected {} tables of {width} entries",
                interaction.n()
            )));
        }
        if tables.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidInput(
                "contribution values must lie in [0, 1]".into(),
            ));
        }
        Self::from_flat(interaction, tables.concat(), owner)
    }

    fn from_flat(interaction: Arc<InteractionMatrix>, tables: Vec<f64>, owner: usize) -> Result<Self> {
        let mut landscape = Landscape {
            interaction,
            tables,
            fitness: Vec::new(),
            global_max: 0.0,
            owner,
        };
        landscape.fitness = Strategy::all(landscape.interaction.n())?
            .map(|s| landscape.evaluate_tables(&s))
            .collect();
        landscape.global_max = landscape.fitness.iter().copied().fold(0.0, f64::max);
        if landscape.global_max <= 0.0 {
            return Err(Error::InvalidInput(
                "landscape has no strategy with positive fitness".into(),
            ));
        }
        Ok(landscape)
    }

    pub fn interaction(&self) -> &Arc<InteractionMatrix> {
        &self.interaction
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn global_max(&self) -> f64 {
        self.global_max
    }

    pub fn table(&self, decision: usize) -> &[f64] {
        let w = self.interaction.table_len();
        &self.tables[decision * w..(decision + 1) * w]
    }

    /// Mean contribution over all decisions, computed from the tables.
    pub fn evaluate_tables(&self, s: &Strategy) -> f64 {
        let ix = &self.interaction;
        let w = ix.table_len();
        let sum: f64 = (0..ix.n())
            .map(|i| self.tables[i * w + ix.configuration(i, s)])
            .sum();
        sum / ix.n() as f64
    }

    /// Raw NK fitness in `[0, 1]`.
    #[inline]
    pub fn raw_fitness(&self, s: &Strategy) -> f64 {
        self.fitness[s.index() as usize]
    }

    /// Raw fitness divided by the global maximum; exactly 1 at a global optimum.
    #[inline]
    pub fn performance(&self, s: &Strategy) -> f64 {
        self.raw_fitness(s) / self.global_max
    }

    /// Strategy attaining the global maximum (lowest index on ties).
    pub fn argmax(&self) -> Strategy {
        let (idx, _) = self
            .fitness
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            });
        Strategy::new(idx as u64, self.interaction.n()).expect("index within range")
    }

    /// Debug export: one `strategy,raw,performance` row per strategy.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "strategy,raw,performance")?;
        for s in Strategy::all(self.interaction.n()).map_err(io::Error::other)? {
            writeln!(
                out,
                "{},{:.6},{:.6}",
                s,
                self.raw_fitness(&s),
                self.performance(&s)
            )?;
        }
        Ok(())
    }
}

/// `S` landscapes over one shared interaction matrix; member `0` is the firm.
#[derive(Debug, Clone)]
pub struct LandscapeEnsemble {
    landscapes: Vec<Landscape>,
    correlation: CorrelationMatrix,
}

impl LandscapeEnsemble {
    pub const FIRM: usize = 0;

    pub fn landscapes(&self) -> &[Landscape] {
        &self.landscapes
    }

    pub fn len(&self) -> usize {
        self.landscapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landscapes.is_empty()
    }

    pub fn firm(&self) -> &Landscape {
        &self.landscapes[Self::FIRM]
    }

    pub fn correlation(&self) -> &CorrelationMatrix {
        &self.correlation
    }

    pub fn interaction(&self) -> &Arc<InteractionMatrix> {
        self.firm().interaction()
    }
}

/// Generates `corr.order()` correlated landscapes. Each table entry `(i, c)`
/// takes one correlated draw across all members.
pub fn generate_ensemble<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    corr: &CorrelationMatrix,
    rng: &mut R,
) -> Result<LandscapeEnsemble> {
    let interaction = Arc::new(generate_interactions(n, k, rng)?);
    let factor = cholesky_factor(corr)?;
    let members = corr.order();
    let entries = n * interaction.table_len();

    let mut tables = vec![vec![0.0; entries]; members];
    let mut z = vec![0.0; members];
    let mut draw = vec![0.0; members];
    for e in 0..entries {
        factor.sample_into(rng, &mut z, &mut draw);
        for (table, &u) in tables.iter_mut().zip(&draw) {
            table[e] = u;
        }
    }

    let landscapes = tables
        .into_iter()
        .enumerate()
        .map(|(owner, t)| Landscape::from_flat(Arc::clone(&interaction), t, owner))
        .collect::<Result<Vec<_>>>()?;
    Ok(LandscapeEnsemble {
        landscapes,
        correlation: corr.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::base_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn interaction_examples() {
        let mut r = rng(1);
        let k0 = generate_interactions(10, 0, &mut r).unwrap();
        assert!((0..10).all(|i| k0.links(i).is_empty()));

        let full = generate_interactions(6, 5, &mut r).unwrap();
        for i in 0..6 {
            let expect: Vec<usize> = (0..6).filter(|&j| j != i).collect();
            assert_eq!(full.links(i), expect.as_slice());
        }

        let m = generate_interactions(10, 4, &mut r).unwrap();
        for i in 0..10 {
            let l = m.links(i);
            assert_eq!(l.len(), 4);
            assert!(!l.contains(&i));
            assert!(l.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(
            generate_interactions(5, 5, &mut r),
            Err(Error::InvalidInteractionDegree { n: 5, k: 5 })
        );
    }

    #[test]
    fn raw_fitness_hand_example() {
        let ix = Arc::new(InteractionMatrix::from_links(vec![vec![], vec![]]).unwrap());
        let l = Landscape::from_tables(ix, vec![vec![0.2, 0.8], vec![0.4, 0.6]], 0).unwrap();
        let s: Strategy = "11".parse().unwrap();
        assert!((l.raw_fitness(&s) - 0.7).abs() < 1e-15);
        assert_eq!(l.argmax(), s);
        assert_eq!(l.performance(&s), 1.0);
        let low: Strategy = "00".parse().unwrap();
        assert!((l.raw_fitness(&low) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn constant_tables() {
        let ix = Arc::new(generate_interactions(6, 2, &mut rng(2)).unwrap());
        let tables = vec![vec![0.7; ix.table_len()]; 6];
        let l = Landscape::from_tables(ix, tables, 0).unwrap();
        for s in Strategy::all(6).unwrap() {
            assert!((l.raw_fitness(&s) - 0.7).abs() < 1e-12);
            assert_eq!(l.performance(&s), 1.0);
        }
    }

    #[test]
    fn configuration_uses_own_bit_then_partners() {
        let ix = InteractionMatrix::from_links(vec![vec![2], vec![0], vec![1]]).unwrap();
        let s: Strategy = "101".parse().unwrap();
        assert_eq!(ix.configuration(0, &s), 0b11);
        assert_eq!(ix.configuration(1, &s), 0b01);
        assert_eq!(ix.configuration(2, &s), 0b10);
    }

    #[test]
    fn from_tables_rejects_bad_input() {
        let ix = Arc::new(InteractionMatrix::from_links(vec![vec![1], vec![0]]).unwrap());
        assert!(Landscape::from_tables(ix.clone(), vec![vec![0.5; 3]; 2], 0).is_err());
        assert!(Landscape::from_tables(ix.clone(), vec![vec![1.5; 4]; 2], 0).is_err());
        assert!(Landscape::from_tables(ix, vec![vec![0.0; 4]; 2], 0).is_err());
        assert!(InteractionMatrix::from_links(vec![vec![0], vec![0]]).is_err());
        assert!(InteractionMatrix::from_links(vec![vec![1], vec![]]).is_err());
    }

    #[test]
    fn ensemble_shape_and_normalization() {
        let corr = base_matrix(5, 0.5).unwrap();
        let e = generate_ensemble(10, 4, &corr, &mut rng(3)).unwrap();
        assert_eq!(e.len(), 5);
        for (j, l) in e.landscapes().iter().enumerate() {
            assert_eq!(l.owner(), j);
            assert!(Arc::ptr_eq(l.interaction(), e.interaction()));
            assert_eq!((0..10).map(|i| l.table(i).len()).min(), Some(32));
            let best = Strategy::all(10)
                .unwrap()
                .map(|s| l.performance(&s))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(best, 1.0);
            let brute = Strategy::all(10)
                .unwrap()
                .map(|s| l.evaluate_tables(&s))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(l.global_max(), brute);
        }
    }

    #[test]
    fn perfect_correlation_yields_identical_tables() {
        let corr = base_matrix(4, 1.0).unwrap();
        let e = generate_ensemble(8, 3, &corr, &mut rng(4)).unwrap();
        let first = e.firm();
        for l in e.landscapes() {
            for i in 0..8 {
                assert_eq!(l.table(i), first.table(i));
            }
        }
    }

    #[test]
    fn single_member_ensemble() {
        let corr = base_matrix(1, 0.5).unwrap();
        let e = generate_ensemble(10, 4, &corr, &mut rng(5)).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.firm().performance(&e.firm().argmax()), 1.0);
    }

    #[test]
    fn csv_export() {
        let ix = Arc::new(InteractionMatrix::from_links(vec![vec![], vec![]]).unwrap());
        let l = Landscape::from_tables(ix, vec![vec![0.2, 0.8], vec![0.4, 0.6]], 0).unwrap();
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "strategy,raw,performance\n00,0.300000,0.428571\n01,0.400000,0.571429\n10,0.600000,0.857143\n11,0.700000,1.000000\n"
        );
    }
}
