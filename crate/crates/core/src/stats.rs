//! The four statistic variants — biased, normalized, unbiased, and
//! corrected-unbiased — for both families (distance covariance and HSIC).
//!
//! All trace products tr(A·B) of symmetric matrices are computed as
//! Σ_{i,j} A[i][j]·B[i][j] (O(N²), never a materialized product), with
//! per-row Neumaier partials combined in row order so the result is
//! independent of any parallel scheduling around it.

use crate::error::{Error, Result};
use crate::matrices::{
    double_center, kernel_matrix, neumaier_sum, u_center, CenteredMatrix, DataMatrix, Kernel,
    MatrixKind, Metric, PairwiseMatrix,
};
use crate::transforms::{
    bijective_scaled, bijective_to_kernel, bijective_to_metric, fixed_point_to_kernel,
    fixed_point_to_metric, TransformKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatFamily {
    Dcov,
    Hsic,
}

/// Which estimator was computed. `corrected` implies unbiased and only arises
/// for HSIC computed through the bijection (the Theorem-3 correction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct StatVariant {
    pub family: StatFamily,
    pub biased: bool,
    pub normalized: bool,
    pub corrected: bool,
}

impl StatVariant {
    pub(crate) fn new(family: StatFamily, biased: bool, normalized: bool, corrected: bool) -> Self {
        debug_assert!(!(corrected && biased), "corrected implies unbiased");
        Self {
            family,
            biased,
            normalized,
            corrected,
        }
    }
}

impl std::fmt::Display for StatVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.normalized {
            write!(f, "normalized ")?;
        }
        if self.corrected {
            write!(f, "corrected ")?;
        }
        if !self.biased {
            write!(f, "unbiased ")?;
        }
        match self.family {
            StatFamily::Dcov => write!(f, "dcov"),
            StatFamily::Hsic => write!(f, "hsic"),
        }
    }
}

/// A computed statistic with enough metadata to report it unambiguously.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StatValue {
    pub value: f64,
    pub variant: StatVariant,
    pub n: usize,
    /// Lineage of both inputs, e.g. "x: bijective-kernel(max=…) of euclidean; y: …".
    pub provenance: String,
}

/// Σ_{i,j} a[i][j]·b[i][j] with deterministic accumulation. `perm` applies a
/// simultaneous row/column permutation to `b`, which is how the permutation
/// test evaluates replicates without re-centering; `None` and the identity
/// permutation produce bit-identical results (same operation sequence).
pub(crate) fn trace_dot(a: &CenteredMatrix, b: &CenteredMatrix, perm: Option<&[usize]>) -> f64 {
    let n = a.n();
    let av = a.values();
    let bv = b.values();
    let row_partial = |i: usize| -> f64 {
        match perm {
            None => neumaier_sum((0..n).map(|j| av[i * n + j] * bv[i * n + j])),
            Some(p) => {
                let pi = p[i] * n;
                neumaier_sum((0..n).map(|j| av[i * n + j] * bv[pi + p[j]]))
            }
        }
    };
    neumaier_sum((0..n).map(row_partial))
}

pub(crate) fn family_of(mx: &PairwiseMatrix, my: &PairwiseMatrix) -> StatFamily {
    if mx.kind() == MatrixKind::Kernel && my.kind() == MatrixKind::Kernel {
        StatFamily::Hsic
    } else {
        StatFamily::Dcov
    }
}

pub(crate) fn lineage(mx: &PairwiseMatrix, my: &PairwiseMatrix) -> String {
    format!("x: {}; y: {}", mx.provenance(), my.provenance())
}

pub(crate) fn check_sizes(mx: &PairwiseMatrix, my: &PairwiseMatrix, min_n: usize) -> Result<usize> {
    if mx.n() != my.n() {
        return Err(Error::SizeMismatch {
            left: mx.n(),
            right: my.n(),
        });
    }
    if mx.n() < min_n {
        return Err(Error::SampleTooSmall {
            needed: min_n,
            got: mx.n(),
        });
    }
    Ok(mx.n())
}

/// (1/N²)·tr(H·M^X·H·H·M^Y·H) — the original biased statistic.
pub fn biased_stat(mx: &PairwiseMatrix, my: &PairwiseMatrix) -> Result<StatValue> {
    let n = check_sizes(mx, my, 2)?;
    let a = double_center(mx);
    let b = double_center(my);
    let value = trace_dot(&a, &b, None) / (n as f64 * n as f64);
    Ok(StatValue {
        value,
        variant: StatVariant::new(family_of(mx, my), true, false, false),
        n,
        provenance: lineage(mx, my),
    })
}

/// Cauchy–Schwarz normalization; degenerate self-statistics (≤ 0 or
/// underflowed ≤ 1e-300) give 0 by convention.
pub(crate) fn normalize(cross: f64, self_x: f64, self_y: f64) -> f64 {
    if self_x > 1e-300 && self_y > 1e-300 {
        cross / (self_x * self_y).sqrt()
    } else {
        0.0
    }
}

/// Normalized biased statistic (distance correlation / normalized HSIC),
/// in [−1, 1].
pub fn normalized_stat(mx: &PairwiseMatrix, my: &PairwiseMatrix) -> Result<StatValue> {
    let n = check_sizes(mx, my, 2)?;
    let a = double_center(mx);
    let b = double_center(my);
    let cross = trace_dot(&a, &b, None);
    let sx = trace_dot(&a, &a, None);
    let sy = trace_dot(&b, &b, None);
    Ok(StatValue {
        value: normalize(cross, sx, sy),
        variant: StatVariant::new(family_of(mx, my), true, true, false),
        n,
        provenance: lineage(mx, my),
    })
}

/// (1/(N(N−3)))·tr(C^X·C^Y) with U-centered matrices; unbiased for the
/// population quantity. Requires N ≥ 4.
pub fn unbiased_stat(mx: &PairwiseMatrix, my: &PairwiseMatrix) -> Result<StatValue> {
    let n = check_sizes(mx, my, 4)?;
    let a = u_center(mx)?;
    let b = u_center(my)?;
    let value = trace_dot(&a, &b, None) / (n as f64 * (n as f64 - 3.0));
    Ok(StatValue {
        value,
        variant: StatVariant::new(family_of(mx, my), false, false, false),
        n,
        provenance: lineage(mx, my),
    })
}

/// Cauchy–Schwarz-normalized unbiased statistic.
pub fn normalized_unbiased_stat(mx: &PairwiseMatrix, my: &PairwiseMatrix) -> Result<StatValue> {
    let n = check_sizes(mx, my, 4)?;
    let a = u_center(mx)?;
    let b = u_center(my)?;
    let cross = trace_dot(&a, &b, None);
    let sx = trace_dot(&a, &a, None);
    let sy = trace_dot(&b, &b, None);
    Ok(StatValue {
        value: normalize(cross, sx, sy),
        variant: StatVariant::new(family_of(mx, my), false, true, false),
        n,
        provenance: lineage(mx, my),
    })
}

/// U-centers the bijective induced kernel of `d` and applies the off-diagonal
/// correction max_used/(N−1) that makes unbiased HSIC-through-the-bijection
/// agree exactly with unbiased distance covariance.
pub(crate) fn corrected_centered_kernel(d: &PairwiseMatrix) -> Result<CenteredMatrix> {
    let (k, spec) = bijective_to_kernel(d);
    let mut c = u_center(&k)?;
    let n = c.n();
    // The correction constant scales with the max actually consumed by the
    // transform; the unit-max statement of the theorem corresponds to 1/(N−1).
    let correction = spec.max_used.expect("bijective transform records max") / (n as f64 - 1.0);
    let values = c.values_mut();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values[i * n + j] += correction;
            }
        }
    }
    Ok(c)
}

/// The Theorem-3 corrected estimator: equals `unbiased_stat` on the original
/// distances to within rounding, while being computed entirely on the
/// bijective induced kernels.
pub fn corrected_unbiased_hsic(dx: &PairwiseMatrix, dy: &PairwiseMatrix) -> Result<StatValue> {
    assert_eq!(dx.kind(), MatrixKind::Distance, "corrected variant starts from distances");
    assert_eq!(dy.kind(), MatrixKind::Distance, "corrected variant starts from distances");
    let n = check_sizes(dx, dy, 4)?;
    let a = corrected_centered_kernel(dx)?;
    let b = corrected_centered_kernel(dy)?;
    let value = trace_dot(&a, &b, None) / (n as f64 * (n as f64 - 3.0));
    Ok(StatValue {
        value,
        variant: StatVariant::new(StatFamily::Hsic, false, false, true),
        n,
        provenance: format!(
            "x: corrected bijective-kernel of {}; y: corrected bijective-kernel of {}",
            dx.provenance(),
            dy.provenance()
        ),
    })
}

/// Which estimator a pipeline or CLI run should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantKind {
    Biased,
    Normalized,
    Unbiased,
    NormalizedUnbiased,
    Corrected,
}

/// Dispatches a variant on prepared pairwise matrices.
pub fn stat_on_matrices(
    mx: &PairwiseMatrix,
    my: &PairwiseMatrix,
    variant: VariantKind,
) -> Result<StatValue> {
    match variant {
        VariantKind::Biased => biased_stat(mx, my),
        VariantKind::Normalized => normalized_stat(mx, my),
        VariantKind::Unbiased => unbiased_stat(mx, my),
        VariantKind::NormalizedUnbiased => normalized_unbiased_stat(mx, my),
        VariantKind::Corrected => {
            if mx.kind() != MatrixKind::Distance || my.kind() != MatrixKind::Distance {
                return Err(Error::Config(
                    "the corrected variant starts from distance matrices (it applies the \
                     bijection itself)"
                        .into(),
                ));
            }
            corrected_unbiased_hsic(mx, my)
        }
    }
}

/// How raw data becomes a pairwise matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Representation {
    Metric(Metric),
    Kernel(Kernel),
}

/// Declarative pipeline configuration: representation → optional transform →
/// variant. The same representation and transform are applied to both sides;
/// a fixed-point anchor refers to the same observation index in x and y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatConfig {
    pub representation: Representation,
    pub transform: Option<TransformKind>,
    pub variant: VariantKind,
}

impl StatConfig {
    /// The matrix kind the statistic ultimately runs on, after any transform.
    fn final_kind(&self) -> MatrixKind {
        let start = match self.representation {
            Representation::Metric(_) => MatrixKind::Distance,
            Representation::Kernel(_) => MatrixKind::Kernel,
        };
        match self.transform {
            None => start,
            // Every transform maps Distance↔Kernel.
            Some(_) => match start {
                MatrixKind::Distance => MatrixKind::Kernel,
                MatrixKind::Kernel => MatrixKind::Distance,
            },
        }
    }

    /// Human-readable method descriptor for reports, e.g.
    /// "unbiased hsic on euclidean distances via bijective transform".
    pub fn describe(&self) -> String {
        let rep = match self.representation {
            Representation::Metric(Metric::Euclidean) => "euclidean distances".to_string(),
            Representation::Metric(Metric::L1) => "l1 distances".to_string(),
            Representation::Kernel(k) => {
                let (name, bw) = match k {
                    Kernel::Gaussian(b) => ("gaussian", b),
                    Kernel::Laplacian(b) => ("laplacian", b),
                };
                let bw = match bw {
                    crate::matrices::Bandwidth::Fixed(v) => format!("sigma={v}"),
                    crate::matrices::Bandwidth::MedianHeuristic => "median".to_string(),
                    crate::matrices::Bandwidth::MedianOverSqrt2 => "median/sqrt2".to_string(),
                };
                format!("{name}({bw}) kernels")
            }
        };
        let variant = match self.variant {
            VariantKind::Biased => "biased",
            VariantKind::Normalized => "normalized",
            VariantKind::Unbiased => "unbiased",
            VariantKind::NormalizedUnbiased => "normalized-unbiased",
            VariantKind::Corrected => "corrected",
        };
        let family = if self.variant == VariantKind::Corrected
            || self.final_kind() == MatrixKind::Kernel
        {
            "hsic"
        } else {
            "dcov"
        };
        let transform = match self.transform {
            None => String::new(),
            Some(TransformKind::Bijective) => " via bijective transform".to_string(),
            Some(TransformKind::BijectiveScaled) => " via scaled bijective transform".to_string(),
            Some(TransformKind::FixedPoint { anchor }) => {
                format!(" via fixed-point transform (anchor {anchor})")
            }
        };
        format!("{variant} {family} on {rep}{transform}")
    }
}

pub(crate) fn build_matrix(data: &DataMatrix, representation: Representation) -> Result<PairwiseMatrix> {
    match representation {
        Representation::Metric(m) => Ok(crate::matrices::distance_matrix(data, m)),
        Representation::Kernel(k) => kernel_matrix(data, k),
    }
}

/// Applies a transform in the direction implied by the matrix kind
/// (distance → kernel or kernel → distance).
pub fn apply_transform(m: &PairwiseMatrix, transform: TransformKind) -> Result<PairwiseMatrix> {
    Ok(match transform {
        TransformKind::Bijective => match m.kind() {
            MatrixKind::Distance => bijective_to_kernel(m).0,
            MatrixKind::Kernel => bijective_to_metric(m).0,
        },
        TransformKind::BijectiveScaled => bijective_scaled(m)?.0,
        TransformKind::FixedPoint { anchor } => match m.kind() {
            MatrixKind::Distance => fixed_point_to_kernel(m, anchor)?.0,
            // The fixed-point induced semimetric needs no anchor.
            MatrixKind::Kernel => fixed_point_to_metric(m),
        },
    })
}

/// matrices → transforms → stats, as one deterministic composition.
pub fn stat_pipeline(x: &DataMatrix, y: &DataMatrix, config: &StatConfig) -> Result<StatValue> {
    if x.n() != y.n() {
        return Err(Error::SizeMismatch {
            left: x.n(),
            right: y.n(),
        });
    }
    let mut mx = build_matrix(x, config.representation)?;
    let mut my = build_matrix(y, config.representation)?;
    if let Some(t) = config.transform {
        mx = apply_transform(&mx, t)?;
        my = apply_transform(&my, t)?;
    }
    stat_on_matrices(&mx, &my, config.variant)
}
