//! The bijective metric↔kernel transformation, its scaled variant, and the
//! fixed-point transformation.
//!
//! The bijection is k̂[i][j] = max(d) − d[i][j] (and d̂ = max(k) − k the other
//! way): invertible, order-reversing, and translation-invariance preserving.
//! The fixed-point transform k̃[i][j] = d(i,z) + d(j,z) − d(i,j) anchors at a
//! sample observation z and agrees with the bijection only after double
//! centering. Each operation returns a [`TransformSpec`] recording what was
//! consumed (the max element, or the anchor), so inverses can be audited.

use crate::error::{Error, Result};
use crate::matrices::{MatrixKind, PairwiseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TransformKind {
    Bijective,
    BijectiveScaled,
    FixedPoint { anchor: usize },
}

/// Provenance of a transform application: which map ran and, for the
/// bijective variants, the max element it consumed.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TransformSpec {
    #[serde(flatten)]
    pub kind: TransformKind,
    pub max_used: Option<f64>,
}

/// k̂ = max(d) − d. Output diagonal is the constant `max_used`; the min entry
/// 0 is attained at the argmax distance pair.
///
/// Panics if the input is not a Distance matrix (caller contract).
pub fn bijective_to_kernel(d: &PairwiseMatrix) -> (PairwiseMatrix, TransformSpec) {
    assert_eq!(d.kind(), MatrixKind::Distance, "bijective_to_kernel expects distances");
    let max = d.max_element();
    let values: Vec<f64> = d.values().iter().map(|&v| max - v).collect();
    let out = PairwiseMatrix::new_unchecked(
        values,
        d.n(),
        MatrixKind::Kernel,
        format!("bijective-kernel(max={max}) of {}", d.provenance()),
        false,
    );
    (
        out,
        TransformSpec {
            kind: TransformKind::Bijective,
            max_used: Some(max),
        },
    )
}

/// d̂ = max(k) − k. A zero diagonal requires the kernel's max to be attained
/// on a constant diagonal (true for every positive-definite translation-
/// invariant kernel); otherwise the result still has kind Distance but its
/// `diagonal_warning` flag is set.
pub fn bijective_to_metric(k: &PairwiseMatrix) -> (PairwiseMatrix, TransformSpec) {
    assert_eq!(k.kind(), MatrixKind::Kernel, "bijective_to_metric expects a kernel");
    let max = k.max_element();
    let n = k.n();
    let values: Vec<f64> = k.values().iter().map(|&v| max - v).collect();
    let warn = (0..n).any(|i| values[i * n + i] != 0.0);
    let out = PairwiseMatrix::new_unchecked(
        values,
        n,
        MatrixKind::Distance,
        format!("bijective-metric(max={max}) of {}", k.provenance()),
        warn,
    );
    (
        out,
        TransformSpec {
            kind: TransformKind::Bijective,
            max_used: Some(max),
        },
    )
}

/// The scaled variant 1 − m/max, flipping Distance↔Kernel. Entries land in
/// [0,1]; downstream normalized statistics are unchanged by the scaling.
pub fn bijective_scaled(m: &PairwiseMatrix) -> Result<(PairwiseMatrix, TransformSpec)> {
    let max = m.max_element();
    if max == 0.0 {
        return Err(Error::Degenerate(
            "cannot scale by a zero max element; use the unscaled bijection".into(),
        ));
    }
    let flipped = match m.kind() {
        MatrixKind::Distance => MatrixKind::Kernel,
        MatrixKind::Kernel => MatrixKind::Distance,
    };
    let n = m.n();
    let values: Vec<f64> = m.values().iter().map(|&v| 1.0 - v / max).collect();
    let warn = flipped == MatrixKind::Distance && (0..n).any(|i| values[i * n + i] != 0.0);
    let out = PairwiseMatrix::new_unchecked(
        values,
        n,
        flipped,
        format!("bijective-scaled(max={max}) of {}", m.provenance()),
        warn,
    );
    Ok((
        out,
        TransformSpec {
            kind: TransformKind::BijectiveScaled,
            max_used: Some(max),
        },
    ))
}

/// k̃[i][j] = d(i,z) + d(j,z) − d(i,j) for the anchor observation z.
///
/// The anchor's row and column are identically zero and the diagonal is
/// 2·d(i,z).
pub fn fixed_point_to_kernel(
    d: &PairwiseMatrix,
    anchor: usize,
) -> Result<(PairwiseMatrix, TransformSpec)> {
    assert_eq!(d.kind(), MatrixKind::Distance, "fixed_point_to_kernel expects distances");
    let n = d.n();
    if anchor >= n {
        return Err(Error::AnchorOutOfRange { anchor, n });
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = d.get(i, anchor) + d.get(j, anchor) - d.get(i, j);
        }
    }
    let out = PairwiseMatrix::new_unchecked(
        values,
        n,
        MatrixKind::Kernel,
        format!("fixed-point-kernel(anchor={anchor}) of {}", d.provenance()),
        false,
    );
    Ok((
        out,
        TransformSpec {
            kind: TransformKind::FixedPoint { anchor },
            max_used: None,
        },
    ))
}

/// d̃[i][j] = ½k(i,i) + ½k(j,j) − k(i,j); zero diagonal by construction.
pub fn fixed_point_to_metric(k: &PairwiseMatrix) -> PairwiseMatrix {
    assert_eq!(k.kind(), MatrixKind::Kernel, "fixed_point_to_metric expects a kernel");
    let n = k.n();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values[i * n + j] = 0.5 * k.get(i, i) + 0.5 * k.get(j, j) - k.get(i, j);
            }
        }
    }
    PairwiseMatrix::new_unchecked(
        values,
        n,
        MatrixKind::Distance,
        format!("fixed-point-metric of {}", k.provenance()),
        false,
    )
}

/// The shift function f(i) = max(d)/2 − d(i,z) relating the two induced
/// kernels: k̂[i][j] = k̃[i][j] + f[i] + f[j] (within rounding).
pub fn fixed_point_shift(d: &PairwiseMatrix, anchor: usize) -> Result<Vec<f64>> {
    assert_eq!(d.kind(), MatrixKind::Distance, "fixed_point_shift expects distances");
    let n = d.n();
    if anchor >= n {
        return Err(Error::AnchorOutOfRange { anchor, n });
    }
    let half_max = d.max_element() / 2.0;
    Ok((0..n).map(|i| half_max - d.get(i, anchor)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{distance_matrix, kernel_matrix, Bandwidth, DataMatrix, Kernel, Metric};
    use proptest::prelude::*;

    fn dist(values: Vec<f64>, n: usize) -> PairwiseMatrix {
        PairwiseMatrix::from_raw(values, n, MatrixKind::Distance, "test").unwrap()
    }

    #[test]
    fn kernel_from_two_point_metric() {
        let (k, spec) = bijective_to_kernel(&dist(vec![0.0, 3.0, 3.0, 0.0], 2));
        assert_eq!(k.values(), &[3.0, 0.0, 0.0, 3.0]);
        assert_eq!(spec.max_used, Some(3.0));
        assert_eq!(k.kind(), MatrixKind::Kernel);
    }

    #[test]
    fn kernel_from_three_point_grid() {
        let d = dist(vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0], 3);
        let (k, _) = bijective_to_kernel(&d);
        assert_eq!(k.values(), &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn kernel_from_zero_matrix() {
        let (k, spec) = bijective_to_kernel(&dist(vec![0.0; 9], 3));
        assert!(k.values().iter().all(|&v| v == 0.0));
        assert_eq!(spec.max_used, Some(0.0));
    }

    #[test]
    fn metric_from_gaussian_kernel_has_zero_diagonal() {
        let data = DataMatrix::from_column(&[0.0, 0.7, 1.9, 3.1]).unwrap();
        let k = kernel_matrix(&data, Kernel::Gaussian(Bandwidth::Fixed(1.0))).unwrap();
        let (d, _) = bijective_to_metric(&k);
        for i in 0..4 {
            assert_eq!(d.get(i, i), 0.0);
        }
        assert!(!d.diagonal_warning());
        for (out, src) in d.values().iter().zip(k.values()) {
            assert_eq!(*out, 1.0 - src);
        }
    }

    #[test]
    fn metric_from_all_ones_kernel_is_zero() {
        let k = PairwiseMatrix::from_raw(vec![1.0; 4], 2, MatrixKind::Kernel, "ones").unwrap();
        let (d, _) = bijective_to_metric(&k);
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn metric_from_offdiagonal_max_kernel_warns() {
        let k = PairwiseMatrix::from_raw(vec![1.0, 2.0, 2.0, 1.0], 2, MatrixKind::Kernel, "odd").unwrap();
        let (d, _) = bijective_to_metric(&k);
        assert!(d.diagonal_warning());
        assert_eq!(d.values(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn round_trip_exact_on_integer_grid() {
        // Integer-valued distances in a narrow exponent range: both
        // subtractions are exact, so the round-trip is bitwise.
        let d = dist(vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0], 3);
        let (k, _) = bijective_to_kernel(&d);
        let (back, _) = bijective_to_metric(&k);
        assert_eq!(back.values(), d.values());
        assert!(!back.diagonal_warning());
    }

    #[test]
    fn round_trip_generic_is_within_one_max_ulp() {
        // For generic doubles the inner subtraction rounds, so bitwise
        // equality cannot hold in general; the error is bounded by the ulp
        // of the max element.
        let data = DataMatrix::from_column(&[0.03, 1.77, -0.91, 2.44, 0.002]).unwrap();
        let d = distance_matrix(&data, Metric::Euclidean);
        let (k, _) = bijective_to_kernel(&d);
        let (back, _) = bijective_to_metric(&k);
        let bound = d.max_element() * 2.0_f64.powi(-51);
        for (a, b) in back.values().iter().zip(d.values()) {
            assert!((a - b).abs() <= bound);
        }
    }

    #[test]
    fn scaled_two_point_example() {
        let (s, spec) = bijective_scaled(&dist(vec![0.0, 3.0, 3.0, 0.0], 2)).unwrap();
        assert_eq!(s.values(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(s.kind(), MatrixKind::Kernel);
        assert_eq!(spec.max_used, Some(3.0));
    }

    #[test]
    fn scaled_equals_unscaled_over_max() {
        let data = DataMatrix::from_column(&[0.4, -1.0, 2.2, 0.9]).unwrap();
        let d = distance_matrix(&data, Metric::Euclidean);
        let (k, _) = bijective_to_kernel(&d);
        let (s, _) = bijective_scaled(&d).unwrap();
        for (a, b) in s.values().iter().zip(k.values()) {
            assert!((a - b / d.max_element()).abs() < 1e-15);
        }
    }

    #[test]
    fn scaled_zero_max_is_an_error() {
        assert!(bijective_scaled(&dist(vec![0.0; 4], 2)).is_err());
    }

    #[test]
    fn fixed_point_two_point_example() {
        let (k, spec) = fixed_point_to_kernel(&dist(vec![0.0, 3.0, 3.0, 0.0], 2), 0).unwrap();
        assert_eq!(k.values(), &[0.0, 0.0, 0.0, 6.0]);
        assert_eq!(spec.kind, TransformKind::FixedPoint { anchor: 0 });
        assert_eq!(spec.max_used, None);
    }

    #[test]
    fn fixed_point_grid_anchor_one() {
        let d = dist(vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0], 3);
        let (k, _) = fixed_point_to_kernel(&d, 1).unwrap();
        assert_eq!(k.values(), &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn fixed_point_anchor_row_and_column_vanish() {
        let data = DataMatrix::from_column(&[0.5, 2.0, -1.0, 3.3, 1.1]).unwrap();
        let d = distance_matrix(&data, Metric::Euclidean);
        let (k, _) = fixed_point_to_kernel(&d, 2).unwrap();
        for j in 0..5 {
            assert_eq!(k.get(2, j), 0.0);
            assert_eq!(k.get(j, 2), 0.0);
        }
        // Diagonal is 2·d(i, z).
        for i in 0..5 {
            assert!((k.get(i, i) - 2.0 * d.get(i, 2)).abs() < 1e-15);
        }
    }

    #[test]
    fn fixed_point_anchor_out_of_range() {
        let d = dist(vec![0.0, 1.0, 1.0, 0.0], 2);
        assert!(matches!(
            fixed_point_to_kernel(&d, 2).unwrap_err(),
            Error::AnchorOutOfRange { anchor: 2, n: 2 }
        ));
    }

    #[test]
    fn fixed_point_metric_hand_example() {
        let k = PairwiseMatrix::from_raw(vec![2.0, 1.0, 1.0, 4.0], 2, MatrixKind::Kernel, "k").unwrap();
        let d = fixed_point_to_metric(&k);
        assert_eq!(d.values(), &[0.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn fixed_point_metric_matches_bijective_for_constant_diagonal() {
        // Prop 2: for positive-definite translation-invariant kernels the two
        // induced metrics are exactly the same.
        let data = DataMatrix::from_column(&[0.0, 0.3, 1.4, 2.2, 5.0]).unwrap();
        for kernel in [
            Kernel::Gaussian(Bandwidth::MedianHeuristic),
            Kernel::Laplacian(Bandwidth::MedianHeuristic),
        ] {
            let k = kernel_matrix(&data, kernel).unwrap();
            let (bij, _) = bijective_to_metric(&k);
            let fp = fixed_point_to_metric(&k);
            for (a, b) in bij.values().iter().zip(fp.values()) {
                // ½·1 + ½·1 − k and 1 − k agree exactly (0.5+0.5 is exact).
                assert_eq!(*a, *b);
            }
        }
    }

    #[test]
    fn shift_two_point_example() {
        let d = dist(vec![0.0, 3.0, 3.0, 0.0], 2);
        let f = fixed_point_shift(&d, 0).unwrap();
        assert_eq!(f, vec![1.5, -1.5]);
        let (bij, _) = bijective_to_kernel(&d);
        let (fp, _) = fixed_point_to_kernel(&d, 0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((bij.get(i, j) - (fp.get(i, j) + f[i] + f[j])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shift_identical_points_is_zero_and_transforms_coincide() {
        let d = dist(vec![0.0; 9], 3);
        let f = fixed_point_shift(&d, 1).unwrap();
        assert!(f.iter().all(|&v| v == 0.0));
        let (bij, _) = bijective_to_kernel(&d);
        let (fp, _) = fixed_point_to_kernel(&d, 1).unwrap();
        assert_eq!(bij.values(), fp.values());
    }

    #[test]
    fn grid_translation_invariance_survives_bijective_but_not_fixed_point() {
        // On an evenly spaced 1-D grid the distance between two points depends
        // only on the index lag; the induced-kernel entry must too. Equal lags
        // give exactly equal entries for the bijective kernel, while the
        // fixed-point kernel mixes in anchor distances and breaks the class.
        let n = 10;
        let grid: Vec<f64> = (0..n).map(|i| i as f64 * 0.75).collect();
        let d = crate::matrices::distance_matrix(
            &DataMatrix::from_column(&grid).unwrap(),
            crate::matrices::Metric::Euclidean,
        );
        let (bij, _) = bijective_to_kernel(&d);
        let (fp, _) = fixed_point_to_kernel(&d, 3).unwrap();
        let mut fp_varies = false;
        for lag in 0..n {
            let first = bij.get(0, lag);
            let fp_first = fp.get(0, lag);
            for i in 0..n - lag {
                assert_eq!(bij.get(i, i + lag), first, "lag {lag} at {i}");
                if fp.get(i, i + lag) != fp_first {
                    fp_varies = true;
                }
            }
        }
        assert!(fp_varies, "fixed-point kernel was unexpectedly constant per lag");
    }

    proptest! {
        #[test]
        fn shift_relates_the_two_kernels(
            xs in proptest::collection::vec(-20.0f64..20.0, 3..12),
            anchor_pick in 0usize..100
        ) {
            let data = DataMatrix::from_column(&xs).unwrap();
            let d = distance_matrix(&data, Metric::Euclidean);
            let anchor = anchor_pick % d.n();
            let f = fixed_point_shift(&d, anchor).unwrap();
            let (bij, _) = bijective_to_kernel(&d);
            let (fp, _) = fixed_point_to_kernel(&d, anchor).unwrap();
            for i in 0..d.n() {
                for j in 0..d.n() {
                    prop_assert!((bij.get(i, j) - (fp.get(i, j) + f[i] + f[j])).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn rank_reversal_on_random_matrices(
            xs in proptest::collection::vec(-5.0f64..5.0, 4..10)
        ) {
            let data = DataMatrix::from_column(&xs).unwrap();
            let d = distance_matrix(&data, Metric::Euclidean);
            let (k, _) = bijective_to_kernel(&d);
            let n = d.n();
            for i in 0..n {
                for s in 0..n {
                    for t in 0..n {
                        if d.get(i, s) < d.get(i, t) {
                            prop_assert!(k.get(i, s) > k.get(i, t));
                        }
                        if d.get(i, s) == d.get(i, t) {
                            prop_assert!(k.get(i, s) == k.get(i, t));
                        }
                    }
                }
            }
        }

        #[test]
        fn prop1_bijective_induced_metric_axioms(
            xs in proptest::collection::vec(-5.0f64..5.0, 3..10)
        ) {
            // Start from a kernel, induce a metric, check Prop 1's sample-level
            // claims: non-negativity, symmetry, zeros exactly at argmax kernel
            // pairs, and the subadditivity biconditional on triples.
            let data = DataMatrix::from_column(&xs).unwrap();
            let k = kernel_matrix(&data, Kernel::Gaussian(Bandwidth::Fixed(1.0))).unwrap();
            let (d, _) = bijective_to_metric(&k);
            let n = d.n();
            let max = k.max_element();
            for i in 0..n {
                for j in 0..n {
                    prop_assert!(d.get(i, j) >= 0.0);
                    prop_assert!(d.get(i, j) == d.get(j, i));
                    prop_assert_eq!(d.get(i, j) == 0.0, k.get(i, j) == max);
                    for z in 0..n {
                        let sub = d.get(i, j) <= d.get(i, z) + d.get(j, z) + 1e-12;
                        let cond = max + k.get(i, j) + 1e-12 >= k.get(i, z) + k.get(j, z);
                        prop_assert_eq!(sub, cond);
                    }
                }
            }
        }
    }
}
