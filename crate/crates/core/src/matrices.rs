//! Sample data, pairwise distance/kernel matrices, and the centering operators.
//!
//! The centering matrix H = I − J/N is never materialized: double centering,
//! single centering, and U-centering are all expansions in row/column/grand
//! sums, which is O(N²) time and O(N) extra space instead of the O(N³) literal
//! trace(H·M·H·…) products.

use crate::error::{Error, Result};

/// Neumaier-compensated sum. Used for every row/grand sum so that grand sums
/// over N² terms do not lose precision and results never depend on how work
/// was split across threads.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// N observations × p dimensions of real-valued sample data.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    values: Vec<f64>, // row-major
    n: usize,
    p: usize,
}

impl DataMatrix {
    /// Builds from row-major storage, validating shape and finiteness.
    pub fn from_vec(values: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        if n < 1 || p < 1 || values.len() != n * p {
            return Err(Error::Config(format!(
                "data shape {n}×{p} does not match {} values",
                values.len()
            )));
        }
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteInput {
                    row: idx / p + 1,
                    col: idx % p + 1,
                });
            }
        }
        Ok(Self { values, n, p })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Config("ragged rows in data matrix".into()));
        }
        Self::from_vec(rows.concat(), n, p)
    }

    /// 1-D convenience constructor (p = 1).
    pub fn from_column(column: &[f64]) -> Result<Self> {
        Self::from_vec(column.to_vec(), column.len(), 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Distance,
    Kernel,
}

/// Symmetric N×N pairwise matrix with provenance metadata.
///
/// Symmetry is exact (each unordered pair is computed once and mirrored), the
/// max element is cached at construction, and `provenance` records how the
/// matrix was produced, including any transform lineage.
#[derive(Debug, Clone)]
pub struct PairwiseMatrix {
    values: Vec<f64>, // row-major, n×n
    n: usize,
    kind: MatrixKind,
    max_element: f64,
    provenance: String,
    diagonal_warning: bool,
}

impl PairwiseMatrix {
    /// Validating constructor for externally supplied matrices (CSV ingestion).
    ///
    /// Enforces: square shape, finite entries, exact symmetry, and for
    /// `Distance` a zero diagonal and non-negative entries.
    pub fn from_raw(values: Vec<f64>, n: usize, kind: MatrixKind, provenance: &str) -> Result<Self> {
        if values.len() != n * n || n == 0 {
            return Err(Error::Config(format!(
                "pairwise matrix shape {n}×{n} does not match {} values",
                values.len()
            )));
        }
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteInput {
                    row: idx / n + 1,
                    col: idx % n + 1,
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if values[i * n + j] != values[j * n + i] {
                    return Err(Error::Degenerate(format!(
                        "matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if kind == MatrixKind::Distance {
            for i in 0..n {
                if values[i * n + i] != 0.0 {
                    return Err(Error::Degenerate(format!(
                        "distance matrix has non-zero diagonal at {}",
                        i + 1
                    )));
                }
            }
            if values.iter().any(|&v| v < 0.0) {
                return Err(Error::Degenerate("distance matrix has a negative entry".into()));
            }
        }
        Ok(Self::new_unchecked(values, n, kind, provenance.to_string(), false))
    }

    /// Internal constructor for matrices whose structure is guaranteed by the
    /// builder (symmetry by mirrored writes). Still computes the cached max.
    pub(crate) fn new_unchecked(
        values: Vec<f64>,
        n: usize,
        kind: MatrixKind,
        provenance: String,
        diagonal_warning: bool,
    ) -> Self {
        let max_element = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            values,
            n,
            kind,
            max_element,
            provenance,
            diagonal_warning,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn max_element(&self) -> f64 {
        self.max_element
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// True when a kernel→metric conversion could not produce a zero diagonal
    /// (the kernel's max was attained off the diagonal).
    pub fn diagonal_warning(&self) -> bool {
        self.diagonal_warning
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    L1,
}

/// Bandwidth selection for the built-in kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Explicit σ > 0.
    Fixed(f64),
    /// σ = median of the N(N−1)/2 strictly-off-diagonal pairwise Euclidean
    /// distances (duplicate points contribute their zero distances to the
    /// pool; an even pool takes the mean of the two central order statistics).
    MedianHeuristic,
    /// σ = median/√2, which turns the Gaussian into exp(−d²/median²).
    ///
    /// Conventions in the wild differ on whether the Gaussian denominator is
    /// 2σ² or σ² with a median σ; this variant selects the σ² reading without
    /// changing the kernel formula. See README for where each matters.
    MedianOverSqrt2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// exp(−‖x_i−x_j‖² / (2σ²))
    Gaussian(Bandwidth),
    /// exp(−‖x_i−x_j‖₁ / σ); σ still resolved from Euclidean distances under
    /// the median heuristics.
    Laplacian(Bandwidth),
}

fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    neumaier_sum(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)))
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    neumaier_sum(a.iter().zip(b).map(|(x, y)| (x - y).abs()))
}

/// Pairwise distance matrix under the chosen metric.
pub fn distance_matrix(data: &DataMatrix, metric: Metric) -> PairwiseMatrix {
    let n = data.n();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = match metric {
                Metric::Euclidean => sq_euclidean(data.row(i), data.row(j)).sqrt(),
                Metric::L1 => l1(data.row(i), data.row(j)),
            };
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    let provenance = match metric {
        Metric::Euclidean => "euclidean",
        Metric::L1 => "l1",
    };
    PairwiseMatrix::new_unchecked(values, n, MatrixKind::Distance, provenance.into(), false)
}

/// Median of the strictly-off-diagonal pairwise Euclidean distances.
pub fn median_pairwise_distance(data: &DataMatrix) -> Result<f64> {
    let n = data.n();
    if n < 2 {
        return Err(Error::SampleTooSmall { needed: 2, got: n });
    }
    let mut pool = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pool.push(sq_euclidean(data.row(i), data.row(j)).sqrt());
        }
    }
    pool.sort_unstable_by(f64::total_cmp);
    let m = pool.len();
    let median = if m % 2 == 1 {
        pool[m / 2]
    } else {
        0.5 * (pool[m / 2 - 1] + pool[m / 2])
    };
    Ok(median)
}

fn resolve_bandwidth(data: &DataMatrix, bandwidth: Bandwidth) -> Result<f64> {
    let sigma = match bandwidth {
        Bandwidth::Fixed(b) => {
            if !(b > 0.0) {
                return Err(Error::Config(format!("bandwidth must be positive, got {b}")));
            }
            b
        }
        Bandwidth::MedianHeuristic => median_pairwise_distance(data)?,
        Bandwidth::MedianOverSqrt2 => median_pairwise_distance(data)? / std::f64::consts::SQRT_2,
    };
    if sigma == 0.0 {
        return Err(Error::DegenerateBandwidth);
    }
    Ok(sigma)
}

/// Pairwise kernel matrix. Diagonal entries are exactly 1.
pub fn kernel_matrix(data: &DataMatrix, kernel: Kernel) -> Result<PairwiseMatrix> {
    let n = data.n();
    let (name, bandwidth) = match kernel {
        Kernel::Gaussian(b) => ("gaussian", b),
        Kernel::Laplacian(b) => ("laplacian", b),
    };
    let sigma = resolve_bandwidth(data, bandwidth)?;
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let k = match kernel {
                Kernel::Gaussian(_) => {
                    (-sq_euclidean(data.row(i), data.row(j)) / (2.0 * sigma * sigma)).exp()
                }
                Kernel::Laplacian(_) => (-l1(data.row(i), data.row(j)) / sigma).exp(),
            };
            values[i * n + j] = k;
            values[j * n + i] = k;
        }
    }
    let provenance = format!("{name}(sigma={sigma})");
    Ok(PairwiseMatrix::new_unchecked(
        values,
        n,
        MatrixKind::Kernel,
        provenance,
        false,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centering {
    Left,
    Right,
    Double,
    UCentered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Result of a centering operator, tagged by which one produced it.
#[derive(Debug, Clone)]
pub struct CenteredMatrix {
    values: Vec<f64>,
    n: usize,
    centering: Centering,
}

impl CenteredMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

fn row_sums(m: &PairwiseMatrix) -> Vec<f64> {
    (0..m.n()).map(|i| neumaier_sum(m.row(i).iter().copied())).collect()
}

/// H·M·H expanded as m[i][j] − rowmean_i − colmean_j + grandmean.
pub fn double_center(m: &PairwiseMatrix) -> CenteredMatrix {
    let n = m.n();
    let sums = row_sums(m); // row sums equal column sums: m is symmetric
    let grand = neumaier_sum(sums.iter().copied());
    let nf = n as f64;
    let means: Vec<f64> = sums.iter().map(|s| s / nf).collect();
    let grand_mean = grand / (nf * nf);
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = m.get(i, j) - means[i] - means[j] + grand_mean;
        }
    }
    CenteredMatrix {
        values,
        n,
        centering: Centering::Double,
    }
}

/// H·M (Left: subtract column means) or M·H (Right: subtract row means).
pub fn single_center(m: &PairwiseMatrix, side: Side) -> CenteredMatrix {
    let n = m.n();
    let nf = n as f64;
    // Column j sum equals row j sum by symmetry, but compute columns honestly
    // so the operator stays correct if the symmetry guarantee ever loosens.
    let mut values = vec![0.0; n * n];
    match side {
        Side::Left => {
            let col_means: Vec<f64> = (0..n)
                .map(|j| neumaier_sum((0..n).map(|i| m.get(i, j))) / nf)
                .collect();
            for i in 0..n {
                for j in 0..n {
                    values[i * n + j] = m.get(i, j) - col_means[j];
                }
            }
        }
        Side::Right => {
            let row_means: Vec<f64> = (0..n)
                .map(|i| neumaier_sum(m.row(i).iter().copied()) / nf)
                .collect();
            for i in 0..n {
                for j in 0..n {
                    values[i * n + j] = m.get(i, j) - row_means[i];
                }
            }
        }
    }
    CenteredMatrix {
        values,
        n,
        centering: match side {
            Side::Left => Centering::Left,
            Side::Right => Centering::Right,
        },
    }
}

/// The unbiased-estimator centering: off-diagonal entries get
/// m[i][j] − rowsum_i/(N−2) − colsum_j/(N−2) + grandsum/((N−1)(N−2)),
/// the diagonal is exactly zero. Requires N ≥ 4 (the downstream 1/(N(N−3))
/// factor is meaningless below that).
pub fn u_center(m: &PairwiseMatrix) -> Result<CenteredMatrix> {
    let n = m.n();
    if n < 4 {
        return Err(Error::SampleTooSmall { needed: 4, got: n });
    }
    let sums = row_sums(m);
    let grand = neumaier_sum(sums.iter().copied());
    let nf = n as f64;
    let grand_term = grand / ((nf - 1.0) * (nf - 2.0));
    let scaled: Vec<f64> = sums.iter().map(|s| s / (nf - 2.0)).collect();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values[i * n + j] = m.get(i, j) - scaled[i] - scaled[j] + grand_term;
            }
        }
    }
    Ok(CenteredMatrix {
        values,
        n,
        centering: Centering::UCentered,
    })
}
