//! Perturbed correlation matrices and Gaussian-copula sampling of correlated
//! uniform variates.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};

/// Eigenvalues above `-PSD_TOLERANCE` count as non-negative.
pub const PSD_TOLERANCE: f64 = 1e-10;

// Cholesky pivots at or below this are treated as exact zeros (rank deficiency).
const PIVOT_EPSILON: f64 = 1e-10;

/// Symmetric, unit-diagonal, positive semi-definite matrix of pairwise correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
}

impl CorrelationMatrix {
    /// Validates `entries` against the correlation-matrix invariants.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "correlation matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for i in 0..n {
            if entries[(i, i)] != 1.0 {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry {i} is {} (expected 1)",
                    entries[(i, i)]
                )));
            }
            for j in 0..i {
                let v = entries[(i, j)];
                if v != entries[(j, i)] || !(-1.0..=1.0).contains(&v) {
                    return Err(Error::InvalidInput(format!(
                        "entry ({i},{j}) = {v} breaks symmetry or the [-1, 1] bound"
                    )));
                }
            }
        }
        let m = CorrelationMatrix { entries };
        let min = m.min_eigenvalue();
        if min < -PSD_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite {
                pivot: min,
                column: 0,
            });
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Mean of the strictly upper-triangular entries; `None` for order 1.
    pub fn mean_off_diagonal(&self) -> Option<f64> {
        let n = self.order();
        if n < 2 {
            return None;
        }
        let mut sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                sum += self.entries[(i, j)];
            }
        }
        Some(sum / (n * (n - 1) / 2) as f64)
    }
}

/// Equicorrelation matrix: unit diagonal, every off-diagonal entry `rho`.
pub fn base_matrix(order: usize, rho: f64) -> Result<CorrelationMatrix> {
    if order == 0 {
        return Err(Error::InvalidInput("correlation order must be >= 1".into()));
    }
    let min = if order > 1 {
        -1.0 / (order - 1) as f64
    } else {
        -1.0
    };
    if !(min..=1.0).contains(&rho) {
        return Err(Error::InvalidCorrelation { rho, min, order });
    }
    let entries = DMatrix::from_fn(order, order, |i, j| if i == j { 1.0 } else { rho });
    Ok(CorrelationMatrix { entries })
}

/// Adds symmetric `Normal(0, jitter^2)` noise to the off-diagonal entries, then
/// projects back onto the correlation matrices: negative eigenvalues are clipped
/// to zero and the result is rescaled to a unit diagonal.
pub fn perturb<R: Rng + ?Sized>(
    base: &CorrelationMatrix,
    jitter: f64,
    rng: &mut R,
) -> Result<CorrelationMatrix> {
    if !(jitter >= 0.0 && jitter.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "jitter must be finite and >= 0, got {jitter}"
        )));
    }
    let n = base.order();
    if jitter == 0.0 || n == 1 {
        return Ok(base.clone());
    }
    let noise = Normal::new(0.0, jitter).expect("jitter validated above");
    let mut m = base.entries.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = m[(i, j)] + noise.sample(rng);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }

    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().any(|&l| l < 0.0) {
        let clipped = eig.eigenvalues.map(|l| l.max(0.0));
        m = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    }

    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let d = m[(i, i)];
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    for i in 0..n {
        m[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let v = (m[(i, j)] * scale[i] * scale[j]).clamp(-1.0, 1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(CorrelationMatrix { entries: m })
}

/// Lower-triangular `L` with `L * L^T` equal to a correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    order: usize,
    // row-major, full square storage; entries above the diagonal are zero
    lower: Vec<f64>,
}

impl CholeskyFactor {
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.order + j]
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.order, self.order, &self.lower)
    }

    /// Maps a vector of standard normals `z` through `x = L z` and the normal CDF.
    pub fn uniforms_from_normals(&self, z: &[f64], out: &mut [f64]) {
        let n = self.order;
        debug_assert!(z.len() == n && out.len() == n);
        for (i, slot) in out.iter_mut().enumerate() {
            let row = &self.lower[i * n..i * n + i + 1];
            let x: f64 = row.iter().zip(&z[..=i]).map(|(l, z)| l * z).sum();
            *slot = standard_normal_cdf(x);
        }
    }

    /// One correlated draw of `order` uniforms, written into `out`. `z` is scratch space.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(rng);
        }
        self.uniforms_from_normals(z, out);
    }
}

/// Cholesky factorization tolerant of semi-definite input.
///
/// A rank-revealing pass (vanishing pivots zero their column) is tried first;
/// it is exact on low-rank inputs such as the all-ones matrix. Heavily clipped
/// matrices can defeat it numerically, in which case the input is factored
/// with a diagonal boost of [`DIAGONAL_BOOST`].
pub fn cholesky_factor(m: &CorrelationMatrix) -> Result<CholeskyFactor> {
    let n = m.order();
    if let Ok(lower) = factor_lower(&m.entries, 0.0) {
        if reconstruction_error(&lower, &m.entries) <= RANK_REVEALING_TOLERANCE {
            return Ok(CholeskyFactor { order: n, lower });
        }
    }
    let lower = factor_lower(&m.entries, DIAGONAL_BOOST)?;
    let err = reconstruction_error(&lower, &m.entries);
    if err > RECONSTRUCTION_TOLERANCE {
        return Err(Error::NotPositiveSemidefinite {
            pivot: -err,
            column: n - 1,
        });
    }
    Ok(CholeskyFactor { order: n, lower })
}

/// Largest diagonal boost used when factoring near-singular input.
pub const DIAGONAL_BOOST: f64 = 5e-9;

/// `L * L^T` matches the input within this bound, elementwise.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-8;

const RANK_REVEALING_TOLERANCE: f64 = 1e-10;

fn factor_lower(a: &DMatrix<f64>, boost: f64) -> Result<Vec<f64>> {
    let n = a.nrows();
    let mut lower = vec![0.0; n * n];
    for j in 0..n {
        let row_j = j * n;
        let d = a[(j, j)] + boost - lower[row_j..row_j + j].iter().map(|v| v * v).sum::<f64>();
        if d > PIVOT_EPSILON {
            let pivot = d.sqrt();
            lower[row_j + j] = pivot;
            for i in (j + 1)..n {
                let row_i = i * n;
                let dot: f64 = lower[row_i..row_i + j]
                    .iter()
                    .zip(&lower[row_j..row_j + j])
                    .map(|(x, y)| x * y)
                    .sum();
                lower[row_i + j] = (a[(i, j)] - dot) / pivot;
            }
        } else if d < -PSD_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite {
                pivot: d,
                column: j,
            });
        }
    }
    Ok(lower)
}

fn reconstruction_error(lower: &[f64], a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = lower[i * n..i * n + j + 1]
                .iter()
                .zip(&lower[j * n..j * n + j + 1])
                .map(|(x, y)| x * y)
                .sum();
            worst = worst.max((dot - a[(i, j)]).abs());
        }
    }
    worst
}

/// `count` rows of `order` correlated uniforms in `[0, 1]`.
pub fn sample_correlated_uniforms<R: Rng + ?Sized>(
    factor: &CholeskyFactor,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut z = vec![0.0; factor.order];
    (0..count)
        .map(|_| {
            let mut row = vec![0.0; factor.order];
            factor.sample_into(rng, &mut z, &mut row);
            row
        })
        .collect()
}

#[inline]
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}
