//! Seeded permutation testing.
//!
//! Replicate r permutes the rows and columns of the y-side matrix
//! simultaneously — equivalent to permuting the y sample itself, because
//! every centering scheme commutes with a simultaneous permutation — so the
//! centered matrices are computed once and each replicate is a single O(N²)
//! trace pass. Replicate r's permutation is a pure function of (seed, r),
//! which makes results independent of thread count and schedule.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrices::{double_center, u_center, CenteredMatrix, MatrixKind, PairwiseMatrix};
use crate::rng;
use crate::stats::{
    check_sizes, corrected_centered_kernel, family_of, lineage, normalize, trace_dot, StatValue,
    StatVariant, VariantKind,
};
use crate::transforms::{bijective_to_kernel, fixed_point_to_kernel};

/// Outcome of a permutation test.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TestResult {
    pub observed: StatValue,
    pub p_value: f64,
    pub permutations: usize,
    pub seed: u64,
    /// The R replicate statistics in replicate order, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicate_stats: Option<Vec<f64>>,
}

/// Centered matrices plus the permutation-invariant scalars of a variant, so
/// replicates never re-center. The observed statistic is `evaluate(None)`,
/// which follows the exact floating-point path of an identity permutation.
pub(crate) struct PreparedStat {
    a: CenteredMatrix,
    b: CenteredMatrix,
    divisor: f64,
    norm: Option<(f64, f64)>,
    variant: StatVariant,
    n: usize,
    provenance: String,
}

impl PreparedStat {
    pub(crate) fn new(
        mx: &PairwiseMatrix,
        my: &PairwiseMatrix,
        variant: VariantKind,
    ) -> Result<Self> {
        let family = family_of(mx, my);
        match variant {
            VariantKind::Biased | VariantKind::Normalized => {
                let n = check_sizes(mx, my, 2)?;
                let a = double_center(mx);
                let b = double_center(my);
                let normalized = variant == VariantKind::Normalized;
                let norm = normalized
                    .then(|| (trace_dot(&a, &a, None), trace_dot(&b, &b, None)));
                Ok(Self {
                    divisor: n as f64 * n as f64,
                    norm,
                    variant: StatVariant::new(family, true, normalized, false),
                    n,
                    provenance: lineage(mx, my),
                    a,
                    b,
                })
            }
            VariantKind::Unbiased | VariantKind::NormalizedUnbiased => {
                let n = check_sizes(mx, my, 4)?;
                let a = u_center(mx)?;
                let b = u_center(my)?;
                let normalized = variant == VariantKind::NormalizedUnbiased;
                let norm = normalized
                    .then(|| (trace_dot(&a, &a, None), trace_dot(&b, &b, None)));
                Ok(Self {
                    divisor: n as f64 * (n as f64 - 3.0),
                    norm,
                    variant: StatVariant::new(family, false, normalized, false),
                    n,
                    provenance: lineage(mx, my),
                    a,
                    b,
                })
            }
            VariantKind::Corrected => {
                if mx.kind() != MatrixKind::Distance || my.kind() != MatrixKind::Distance {
                    return Err(Error::Config(
                        "the corrected variant starts from distance matrices (it applies the \
                         bijection itself)"
                            .into(),
                    ));
                }
                let n = check_sizes(mx, my, 4)?;
                let a = corrected_centered_kernel(mx)?;
                let b = corrected_centered_kernel(my)?;
                Ok(Self {
                    divisor: n as f64 * (n as f64 - 3.0),
                    norm: None,
                    variant: StatVariant::new(crate::stats::StatFamily::Hsic, false, false, true),
                    n,
                    provenance: format!(
                        "x: corrected bijective-kernel of {}; y: corrected bijective-kernel of {}",
                        mx.provenance(),
                        my.provenance()
                    ),
                    a,
                    b,
                })
            }
        }
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn evaluate(&self, perm: Option<&[usize]>) -> f64 {
        let cross = trace_dot(&self.a, &self.b, perm);
        match self.norm {
            Some((sx, sy)) => normalize(cross, sx, sy),
            None => cross / self.divisor,
        }
    }
}

/// Runs an R-replicate permutation test of the given variant. The p-value is
/// (1 + #{replicate ≥ observed})/(R + 1), ties counted as exceedances.
pub fn permutation_test(
    mx: &PairwiseMatrix,
    my: &PairwiseMatrix,
    variant: VariantKind,
    permutations: usize,
    seed: u64,
    keep_replicates: bool,
) -> Result<TestResult> {
    if permutations == 0 {
        return Err(Error::ZeroPermutations);
    }
    let prepared = PreparedStat::new(mx, my, variant)?;
    let n = prepared.n();
    let observed_value = prepared.evaluate(None);
    let replicates: Vec<f64> = (0..permutations as u64)
        .into_par_iter()
        .map(|i| prepared.evaluate(Some(&rng::permutation(seed, i + 1, n))))
        .collect();
    let exceedances = replicates.iter().filter(|&&v| v >= observed_value).count();
    let p_value = (1 + exceedances) as f64 / (permutations as f64 + 1.0);
    Ok(TestResult {
        observed: StatValue {
            value: observed_value,
            variant: prepared.variant,
            n,
            provenance: prepared.provenance.clone(),
        },
        p_value,
        permutations,
        seed,
        replicate_stats: keep_replicates.then_some(replicates),
    })
}

/// One line of an equivalence report: the same test run on two routes to the
/// same statistic. `required` distinguishes the equivalences that must hold
/// from the fixed-point negative control, which is expected to break.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EquivalencePair {
    pub label: String,
    pub p_distances: f64,
    pub p_kernels: f64,
    pub identical: bool,
    pub required: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EquivalenceReport {
    pub pairs: Vec<EquivalencePair>,
    /// True iff every `required` pair has identical p-values.
    pub equivalence_holds: bool,
    pub permutations: usize,
    pub seed: u64,
}

/// Shares one (seed, r) → π_r stream between distance-side and
/// bijective-kernel-side tests and checks the p-values coincide, biased and
/// unbiased. A fixed-point-kernel pair (anchor 0) rides along as a negative
/// control: its p-value is allowed to differ and does not affect the verdict.
pub fn pvalue_equivalence_check(
    dx: &PairwiseMatrix,
    dy: &PairwiseMatrix,
    permutations: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    if dx.kind() != MatrixKind::Distance || dy.kind() != MatrixKind::Distance {
        return Err(Error::Config(
            "the equivalence check starts from distance matrices".into(),
        ));
    }
    let (kx, _) = bijective_to_kernel(dx);
    let (ky, _) = bijective_to_kernel(dy);

    let biased_d = permutation_test(dx, dy, VariantKind::Biased, permutations, seed, false)?;
    let biased_k = permutation_test(&kx, &ky, VariantKind::Biased, permutations, seed, false)?;
    let unbiased_d = permutation_test(dx, dy, VariantKind::Unbiased, permutations, seed, false)?;
    let unbiased_k = permutation_test(&kx, &ky, VariantKind::Unbiased, permutations, seed, false)?;

    let (fx, _) = fixed_point_to_kernel(dx, 0)?;
    let (fy, _) = fixed_point_to_kernel(dy, 0)?;
    let fixed_k = permutation_test(&fx, &fy, VariantKind::Unbiased, permutations, seed, false)?;

    let pair = |label: &str, left: &TestResult, right: &TestResult, required: bool| {
        EquivalencePair {
            label: label.into(),
            p_distances: left.p_value,
            p_kernels: right.p_value,
            identical: left.p_value == right.p_value,
            required,
        }
    };
    let pairs = vec![
        pair("biased", &biased_d, &biased_k, true),
        pair("unbiased", &unbiased_d, &unbiased_k, true),
        pair(
            "fixed-point unbiased (negative control)",
            &unbiased_d,
            &fixed_k,
            false,
        ),
    ];
    let equivalence_holds = pairs.iter().filter(|p| p.required).all(|p| p.identical);
    Ok(EquivalenceReport {
        pairs,
        equivalence_holds,
        permutations,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{distance_matrix, DataMatrix, Metric};
    use crate::stats::unbiased_stat;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn quadratic_pair(n: usize) -> (PairwiseMatrix, PairwiseMatrix) {
        let x: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        (
            distance_matrix(&DataMatrix::from_column(&x).unwrap(), Metric::Euclidean),
            distance_matrix(&DataMatrix::from_column(&y).unwrap(), Metric::Euclidean),
        )
    }

    fn gaussian_pair(seed: u64, n: usize, slope: f64) -> (PairwiseMatrix, PairwiseMatrix) {
        let mut r = rng::stream(seed, 0);
        let x: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| slope * x[i] + r.sample::<f64, _>(StandardNormal))
            .collect();
        (
            distance_matrix(&DataMatrix::from_column(&x).unwrap(), Metric::Euclidean),
            distance_matrix(&DataMatrix::from_column(&y).unwrap(), Metric::Euclidean),
        )
    }

    #[test]
    fn noiseless_quadratic_rejects_at_the_floor() {
        // Observed dependence is so strong every replicate falls below it:
        // p attains its minimum 1/(R+1).
        let (dx, dy) = quadratic_pair(100);
        let res = permutation_test(&dx, &dy, VariantKind::Biased, 999, 7, false).unwrap();
        assert_eq!(res.p_value, 0.001);
        assert_eq!(res.permutations, 999);
    }

    #[test]
    fn constant_data_ties_give_p_one() {
        let zeros = PairwiseMatrix::from_raw(vec![0.0; 36], 6, MatrixKind::Distance, "z").unwrap();
        let (_, dy) = gaussian_pair(1, 6, 0.0);
        let res = permutation_test(&zeros, &dy, VariantKind::Biased, 99, 3, false).unwrap();
        assert_eq!(res.p_value, 1.0);
    }

    #[test]
    fn p_value_stays_in_its_range() {
        let (dx, dy) = gaussian_pair(5, 20, 0.3);
        for variant in [
            VariantKind::Biased,
            VariantKind::Normalized,
            VariantKind::Unbiased,
            VariantKind::NormalizedUnbiased,
            VariantKind::Corrected,
        ] {
            let res = permutation_test(&dx, &dy, variant, 49, 11, false).unwrap();
            assert!(res.p_value >= 1.0 / 50.0 && res.p_value <= 1.0);
        }
    }

    #[test]
    fn zero_permutations_is_an_error() {
        let (dx, dy) = gaussian_pair(2, 8, 0.0);
        assert!(matches!(
            permutation_test(&dx, &dy, VariantKind::Biased, 0, 1, false),
            Err(Error::ZeroPermutations)
        ));
    }

    #[test]
    fn observed_matches_direct_statistic_bitwise() {
        let (dx, dy) = gaussian_pair(13, 16, 0.5);
        let res = permutation_test(&dx, &dy, VariantKind::Unbiased, 9, 5, false).unwrap();
        assert_eq!(res.observed.value, unbiased_stat(&dx, &dy).unwrap().value);
    }

    #[test]
    fn identical_runs_and_thread_counts_agree_bitwise() {
        let (dx, dy) = gaussian_pair(21, 24, 0.4);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    permutation_test(&dx, &dy, VariantKind::Normalized, 200, 99, true).unwrap()
                })
        };
        let one = run(1);
        let eight = run(8);
        assert_eq!(one.p_value, eight.p_value);
        assert_eq!(one.observed.value, eight.observed.value);
        assert_eq!(one.replicate_stats, eight.replicate_stats);
    }

    #[test]
    fn counting_formula_is_monotone_in_the_observed_value() {
        let (dx, dy) = gaussian_pair(31, 15, 0.2);
        let res = permutation_test(&dx, &dy, VariantKind::Biased, 99, 17, true).unwrap();
        let reps = res.replicate_stats.unwrap();
        let p_at = |obs: f64| {
            (1 + reps.iter().filter(|&&v| v >= obs).count()) as f64 / (reps.len() as f64 + 1.0)
        };
        let mut sorted = reps.clone();
        sorted.sort_by(f64::total_cmp);
        let mut last = f64::INFINITY;
        for obs in sorted {
            let p = p_at(obs);
            assert!(p <= last + 1e-15);
            last = p;
        }
    }

    #[test]
    fn equivalence_holds_for_bijective_routes() {
        let (dx, dy) = gaussian_pair(40, 30, 0.6);
        let report = pvalue_equivalence_check(&dx, &dy, 199, 4242).unwrap();
        assert!(report.equivalence_holds, "{:?}", report.pairs);
        assert_eq!(report.pairs.len(), 3);
        assert!(report.pairs[0].identical);
        assert!(report.pairs[1].identical);
        // The negative control is reported but never required.
        assert!(!report.pairs[2].required);
    }

    #[test]
    fn fixed_point_negative_control_can_differ() {
        // Across several datasets the fixed-point route must disagree at
        // least once — §3.2-style behavior; a blanket agreement would mean
        // the control is vacuous.
        let mut any_differ = false;
        for seed in 0..6 {
            let (dx, dy) = gaussian_pair(100 + seed, 24, 0.5);
            let report = pvalue_equivalence_check(&dx, &dy, 199, 7 + seed).unwrap();
            if !report.pairs[2].identical {
                any_differ = true;
            }
        }
        assert!(any_differ, "fixed-point p-values never diverged from the distance route");
    }

    #[test]
    fn unbiased_remainder_is_permutation_invariant() {
        // (Hsic_un via bijective kernels) − (Dcov_un on distances) is a pure
        // function of the distance multisets, so permuting y's observations
        // leaves it unchanged — the mechanism behind identical p-values.
        let (dx, dy) = gaussian_pair(55, 12, 0.3);
        let (kx, _) = bijective_to_kernel(&dx);
        let (ky, _) = bijective_to_kernel(&dy);
        let remainder = unbiased_stat(&kx, &ky).unwrap().value
            - unbiased_stat(&dx, &dy).unwrap().value;
        let n = dx.n();
        for idx in 0..10u64 {
            let p = rng::permutation(9001, idx, n);
            let mut permuted = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    permuted[i * n + j] = dy.get(p[i], p[j]);
                }
            }
            let dyp =
                PairwiseMatrix::from_raw(permuted, n, MatrixKind::Distance, "permuted").unwrap();
            let (kyp, _) = bijective_to_kernel(&dyp);
            let rem_p = unbiased_stat(&kx, &kyp).unwrap().value
                - unbiased_stat(&dx, &dyp).unwrap().value;
            assert!(
                (rem_p - remainder).abs() <= 1e-12,
                "remainder moved from {remainder} to {rem_p}"
            );
        }
    }

    #[test]
    fn replicate_vector_has_requested_length_and_matches_count() {
        let (dx, dy) = gaussian_pair(8, 14, 0.1);
        let res = permutation_test(&dx, &dy, VariantKind::Unbiased, 57, 123, true).unwrap();
        let reps = res.replicate_stats.as_ref().unwrap();
        assert_eq!(reps.len(), 57);
        let count = reps.iter().filter(|&&v| v >= res.observed.value).count();
        assert_eq!(res.p_value, (1 + count) as f64 / 58.0);
    }
}
