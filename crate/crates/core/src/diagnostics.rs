//! Finite-sample certificates for the property matrix of the two transforms:
//! negative-type and positive-definiteness eigenchecks, plus rank-order,
//! translation-invariance, and round-trip audits.
//!
//! These certify properties of the *sample matrices only*. Population-level
//! notions (strong negative type, characteristic kernels) are asymptotic and
//! carry no finite-sample certificate; they are documented, not checked.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::matrices::{double_center, DataMatrix, MatrixKind, Metric, PairwiseMatrix};
use crate::transforms::{
    bijective_to_kernel, bijective_to_metric, fixed_point_to_kernel, TransformKind,
};

/// Default eigenvalue tolerance, applied relative to max(1, max entry).
pub const DEFAULT_EIG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    NegativeType,
    PositiveDefinite,
    RankPreserving,
    TranslationInvariant,
    Bijective,
}

/// Outcome of one property check; `holds == false` guarantees a witness.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub tolerance: f64,
}

impl PropertyReport {
    fn pass(property: Property, tolerance: f64) -> Self {
        Self {
            property,
            holds: true,
            witness: None,
            tolerance,
        }
    }

    fn fail(property: Property, tolerance: f64, witness: String) -> Self {
        Self {
            property,
            holds: false,
            witness: Some(witness),
            tolerance,
        }
    }
}

fn scale_of(m: &PairwiseMatrix) -> f64 {
    m.max_element().max(1.0)
}

/// Sorted spectrum (ascending) with the matching eigenvector for the extreme
/// ends, via a symmetric eigensolver.
fn spectrum(values: &[f64], n: usize) -> (Vec<f64>, DMatrix<f64>, Vec<usize>) {
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, values));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    (sorted, eig.eigenvectors, order)
}

fn eigvec_preview(vectors: &DMatrix<f64>, column: usize) -> String {
    let n = vectors.nrows();
    let shown = n.min(6);
    let head: Vec<String> = (0..shown)
        .map(|i| format!("{:.4}", vectors[(i, column)]))
        .collect();
    if n > shown {
        format!("[{}, …]", head.join(", "))
    } else {
        format!("[{}]", head.join(", "))
    }
}

/// Positive semidefiniteness of a kernel matrix: min eigenvalue ≥ −tol·scale.
pub fn check_positive_definite(k: &PairwiseMatrix, tol: f64) -> PropertyReport {
    let n = k.n();
    let threshold = tol * scale_of(k);
    let (eigs, vectors, order) = spectrum(k.values(), n);
    let min = eigs[0];
    if min >= -threshold {
        PropertyReport::pass(Property::PositiveDefinite, tol)
    } else {
        PropertyReport::fail(
            Property::PositiveDefinite,
            tol,
            format!(
                "min eigenvalue {min:.6e} < -{threshold:.6e}; eigenvector {}",
                eigvec_preview(&vectors, order[0])
            ),
        )
    }
}

/// Negative type of a distance matrix, restricted to zero-sum vectors: the
/// quadratic form aᵀDa with Σa = 0 equals aᵀ(HDH)a, so the matrix is of
/// negative type iff the centered matrix has max eigenvalue ≤ tol·scale.
pub fn check_negative_type(d: &PairwiseMatrix, tol: f64) -> PropertyReport {
    let n = d.n();
    let threshold = tol * scale_of(d);
    let centered = double_center(d);
    let (eigs, vectors, order) = spectrum(centered.values(), n);
    let max = eigs[n - 1];
    if max <= threshold {
        PropertyReport::pass(Property::NegativeType, tol)
    } else {
        PropertyReport::fail(
            Property::NegativeType,
            tol,
            format!(
                "centered matrix has eigenvalue {max:.6e} > {threshold:.6e}; eigenvector {}",
                eigvec_preview(&vectors, order[n - 1])
            ),
        )
    }
}

/// Both directions of the negative-type ⟺ induced-kernel-PSD equivalence,
/// evaluated on one distance matrix.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Theorem1Report {
    /// Is d of negative type (on zero-sum vectors)?
    pub negative_type: PropertyReport,
    /// Is the bijective induced kernel PSD on zero-sum vectors? Exactly
    /// equivalent to `negative_type` in real arithmetic, since centering the
    /// induced kernel negates the centered distance matrix.
    pub induced_kernel_psd_zero_sum: PropertyReport,
    /// Is the bijective induced kernel PSD on all vectors (the full claim)?
    pub induced_kernel_psd: PropertyReport,
    /// All three verdicts agree.
    pub consistent: bool,
}

/// Evaluates the biconditional "d is of negative type ⟺ the bijective
/// induced kernel is positive definite" at the sample level.
pub fn check_theorem1_biconditional(d: &PairwiseMatrix, tol: f64) -> Theorem1Report {
    let negative_type = check_negative_type(d, tol);
    let (khat, _) = bijective_to_kernel(d);

    let n = khat.n();
    let threshold = tol * scale_of(&khat);
    let centered = double_center(&khat);
    let (eigs, vectors, order) = spectrum(centered.values(), n);
    let induced_kernel_psd_zero_sum = if eigs[0] >= -threshold {
        PropertyReport::pass(Property::PositiveDefinite, tol)
    } else {
        PropertyReport::fail(
            Property::PositiveDefinite,
            tol,
            format!(
                "centered induced kernel has eigenvalue {:.6e} < -{threshold:.6e}; eigenvector {}",
                eigs[0],
                eigvec_preview(&vectors, order[0])
            ),
        )
    };

    let induced_kernel_psd = check_positive_definite(&khat, tol);
    let consistent = negative_type.holds == induced_kernel_psd_zero_sum.holds
        && negative_type.holds == induced_kernel_psd.holds;
    Theorem1Report {
        negative_type,
        induced_kernel_psd_zero_sum,
        induced_kernel_psd,
        consistent,
    }
}

/// Checks that every row of `t` carries exactly the reversed order of the
/// same row of `m`: strict inequalities flip, ties stay ties. The witness is
/// the first violating (row, col, col) triple.
pub fn audit_rank_preservation(m: &PairwiseMatrix, t: &PairwiseMatrix) -> PropertyReport {
    assert_eq!(m.n(), t.n(), "rank audit needs same-size matrices");
    let n = m.n();
    for i in 0..n {
        let mrow = m.row(i);
        let trow = t.row(i);
        // Sorting by the source row reduces the all-pairs condition to
        // adjacent comparisons (order reversal is transitive).
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| mrow[a].total_cmp(&mrow[b]));
        for w in order.windows(2) {
            let (s, u) = (w[0], w[1]);
            let source_tied = mrow[s] == mrow[u];
            let violated = if source_tied {
                trow[s] != trow[u]
            } else {
                trow[s] <= trow[u]
            };
            if violated {
                return PropertyReport::fail(
                    Property::RankPreserving,
                    0.0,
                    format!(
                        "row {i}: source[{s}]={} {} source[{u}]={} but transformed[{s}]={} vs \
                         transformed[{u}]={}",
                        mrow[s],
                        if source_tied { "==" } else { "<" },
                        mrow[u],
                        trow[s],
                        trow[u]
                    ),
                );
            }
        }
    }
    PropertyReport::pass(Property::RankPreserving, 0.0)
}

/// Translation-invariance audit on a 1-D evenly spaced grid: the Euclidean
/// distances depend only on the index lag, so a translation-invariance-
/// preserving transform must produce entries constant within each lag class.
/// The bijective transform passes; the fixed-point induced kernel fails for
/// generic anchors.
pub fn audit_translation_invariance(
    transform: TransformKind,
    n: usize,
    spacing: f64,
    tol: f64,
) -> PropertyReport {
    assert!(n >= 3, "a grid audit needs at least 3 points");
    let grid: Vec<f64> = (0..n).map(|i| i as f64 * spacing).collect();
    let d = crate::matrices::distance_matrix(
        &DataMatrix::from_column(&grid).expect("finite grid"),
        Metric::Euclidean,
    );
    let out = match transform {
        TransformKind::Bijective => bijective_to_kernel(&d).0,
        TransformKind::BijectiveScaled => crate::transforms::bijective_scaled(&d)
            .expect("positive max on a non-degenerate grid")
            .0,
        TransformKind::FixedPoint { anchor } => {
            match fixed_point_to_kernel(&d, anchor) {
                Ok((k, _)) => k,
                Err(e) => {
                    return PropertyReport::fail(
                        Property::TranslationInvariant,
                        tol,
                        format!("transform failed on the audit grid: {e}"),
                    )
                }
            }
        }
    };
    let threshold = tol * scale_of(&out);
    for lag in 0..n {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n - lag {
            let v = out.get(i, i + lag);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo > threshold {
            return PropertyReport::fail(
                Property::TranslationInvariant,
                tol,
                format!(
                    "lag {lag}: entries spread over [{lo}, {hi}] (width {:.6e} > {threshold:.6e})",
                    hi - lo
                ),
            );
        }
    }
    PropertyReport::pass(Property::TranslationInvariant, tol)
}

/// Round-trip audit: transform forward, transform back, compare. Exact (to
/// tol·scale) whenever the intermediate's max equals the original max —
/// always true starting from a distance matrix; starting from a kernel it
/// requires the kernel's minimum entry to be 0, and the deviation otherwise
/// is precisely that minimum.
pub fn audit_round_trip(m: &PairwiseMatrix, tol: f64) -> PropertyReport {
    let back = match m.kind() {
        MatrixKind::Distance => bijective_to_metric(&bijective_to_kernel(m).0).0,
        MatrixKind::Kernel => bijective_to_kernel(&bijective_to_metric(m).0).0,
    };
    let threshold = tol * scale_of(m);
    let n = m.n();
    let mut worst = 0.0f64;
    let mut at = (0, 0);
    for i in 0..n {
        for j in 0..n {
            let err = (back.get(i, j) - m.get(i, j)).abs();
            if err > worst {
                worst = err;
                at = (i, j);
            }
        }
    }
    if worst <= threshold {
        PropertyReport::pass(Property::Bijective, tol)
    } else {
        let mut witness = format!(
            "round trip deviates by {worst:.6e} at ({}, {})",
            at.0, at.1
        );
        if m.kind() == MatrixKind::Kernel {
            let min = m
                .values()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            witness.push_str(&format!(
                "; kernel min entry is {min:.6e} (exact recovery requires min 0)"
            ));
        }
        PropertyReport::fail(Property::Bijective, tol, witness)
    }
}
