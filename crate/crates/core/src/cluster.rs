//! Spectral clustering on induced kernels, plus the bijective-vs-fixed-point
//! comparison where the fixed point tends to split off as its own group.
//!
//! The algorithm is the standard symmetric-normalization variant: form
//! L = Deg^{−1/2}·K·Deg^{−1/2}, take the k leading eigenvectors, normalize
//! each embedding row to unit length, and run k-means on the rows. Every
//! free choice of the k-means step is pinned for reproducibility:
//!
//! - 20 restarts; restart r draws from substream (seed, r)
//! - init: first center uniform, the rest by farthest-point (argmax of the
//!   min squared distance to the chosen centers, ties to the lowest index)
//! - Lloyd iterations capped at 300, stopping on unchanged assignments or a
//!   relative inertia improvement below 1e-6; assignment ties go to the
//!   lowest center index; a cluster left empty keeps its previous center and
//!   raises the `empty_cluster` flag
//! - best restart by (inertia, restart index)

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrices::{distance_matrix, neumaier_sum, DataMatrix, MatrixKind, Metric, PairwiseMatrix};
use crate::rng;
use crate::transforms::{bijective_to_kernel, fixed_point_to_kernel};

#[derive(Debug, Clone, serde::Serialize)]
pub struct ClusterResult {
    pub labels: Vec<usize>,
    pub k: usize,
    /// k-means objective of the winning restart, in the embedded space.
    pub inertia: f64,
    /// λ_k − λ_{k+1} of the normalized affinity (descending order); a wide
    /// gap supports the choice of k. Zero when k = N.
    pub eigengap: f64,
    /// True when the winning restart ended with at least one empty cluster.
    pub empty_cluster: bool,
}

struct KmeansRun {
    labels: Vec<usize>,
    inertia: f64,
    empty: bool,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, restart: u64) -> KmeansRun {
    let n = points.len();
    let dim = points[0].len();
    let mut r = rng::stream(seed, restart);

    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng::uniform_index(&mut r, n as u64) as usize].clone());
    while centers.len() < k {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, p) in points.iter().enumerate() {
            let nearest = centers
                .iter()
                .map(|c| squared_distance(p, c))
                .fold(f64::INFINITY, f64::min);
            if nearest > best.1 {
                best = (i, nearest);
            }
        }
        centers.push(points[best.0].clone());
    }

    let mut labels = vec![0usize; n];
    let mut inertia = f64::INFINITY;
    let mut empty = false;
    for _ in 0..300 {
        let mut new_labels = vec![0usize; n];
        let mut new_inertia = 0.0;
        for (i, p) in points.iter().enumerate() {
            let mut assigned = 0;
            let mut nearest = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let dist = squared_distance(p, center);
                if dist < nearest {
                    nearest = dist;
                    assigned = c;
                }
            }
            new_labels[i] = assigned;
            new_inertia += nearest;
        }
        let converged = new_labels == labels
            || (inertia.is_finite() && inertia - new_inertia <= 1e-6 * inertia);
        labels = new_labels;
        let previous_inertia = inertia;
        inertia = new_inertia;

        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0; dim]; k];
        for (i, p) in points.iter().enumerate() {
            counts[labels[i]] += 1;
            for (s, v) in sums[labels[i]].iter_mut().zip(p) {
                *s += v;
            }
        }
        empty = false;
        for c in 0..k {
            if counts[c] == 0 {
                empty = true; // keep the previous center
                continue;
            }
            for d in 0..dim {
                centers[c][d] = sums[c][d] / counts[c] as f64;
            }
        }
        if converged && previous_inertia.is_finite() {
            break;
        }
    }
    KmeansRun {
        labels,
        inertia,
        empty,
    }
}

/// Clusters an affinity (kernel-kind, nonnegative, no zero-degree row) into k
/// groups. Deterministic in `seed` regardless of thread count.
pub fn spectral_cluster(
    affinity: &PairwiseMatrix,
    k: usize,
    seed: u64,
) -> Result<ClusterResult> {
    if affinity.kind() != MatrixKind::Kernel {
        return Err(Error::Config(
            "spectral clustering takes a kernel-kind affinity matrix".into(),
        ));
    }
    if k == 0 {
        return Err(Error::Config("cluster count k must be at least 1".into()));
    }
    let n = affinity.n();
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let values = affinity.values();
    if let Some(pos) = values.iter().position(|&v| v < 0.0) {
        return Err(Error::Config(format!(
            "affinity entry ({}, {}) is negative ({}); clamp or rescale first",
            pos / n,
            pos % n,
            values[pos]
        )));
    }
    let mut inv_sqrt_degree = vec![0.0; n];
    for i in 0..n {
        let degree = neumaier_sum(affinity.row(i).iter().copied());
        if degree <= 0.0 {
            return Err(Error::ZeroDegreeRow { row: i });
        }
        inv_sqrt_degree[i] = 1.0 / degree.sqrt();
    }

    let l = DMatrix::from_fn(n, n, |i, j| {
        affinity.get(i, j) * inv_sqrt_degree[i] * inv_sqrt_degree[j]
    });
    let eig = SymmetricEigen::new(l);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigengap = if k < n {
        eig.eigenvalues[order[k - 1]] - eig.eigenvalues[order[k]]
    } else {
        0.0
    };

    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..k).map(|c| eig.eigenvectors[(i, order[c])]).collect())
        .collect();
    for row in &mut rows {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-300 {
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
    }

    let runs: Vec<KmeansRun> = (0..20u64)
        .into_par_iter()
        .map(|restart| kmeans(&rows, k, seed, restart))
        .collect();
    // min_by keeps the first (lowest restart index) among inertia ties.
    let best = runs
        .iter()
        .min_by(|a, b| a.inertia.total_cmp(&b.inertia))
        .expect("at least one restart");
    Ok(ClusterResult {
        labels: best.labels.clone(),
        k,
        inertia: best.inertia,
        eigengap,
        empty_cluster: best.empty,
    })
}

/// Adjusted Rand index between two labelings of the same points; 1.0 for
/// identical partitions (up to label names), ~0 for independent ones. When
/// the index's denominator vanishes (both partitions trivial) it is 1.0.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same points");
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut table = vec![0u64; ka * kb];
    let mut rows = vec![0u64; ka];
    let mut cols = vec![0u64; kb];
    for i in 0..n {
        table[a[i] * kb + b[i]] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    let comb2 = |x: u64| (x * x.saturating_sub(1) / 2) as f64;
    let index: f64 = table.iter().map(|&x| comb2(x)).sum();
    let row_sum: f64 = rows.iter().map(|&x| comb2(x)).sum();
    let col_sum: f64 = cols.iter().map(|&x| comb2(x)).sum();
    let expected = row_sum * col_sum / comb2(n as u64);
    let max_index = 0.5 * (row_sum + col_sum);
    if (max_index - expected).abs() < 1e-12 {
        return 1.0;
    }
    (index - expected) / (max_index - expected)
}

/// Three well-separated 2-D Gaussian components — means (0,0), (10,0),
/// (0,10), identity covariance — with `per_component` points each. Returns
/// the stacked data and the true component labels.
pub fn gaussian_mixture_demo(per_component: usize, seed: u64) -> (DataMatrix, Vec<usize>) {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let means = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)];
    let mut r = rng::stream(seed, 0);
    let mut rows = Vec::with_capacity(3 * per_component);
    let mut labels = Vec::with_capacity(3 * per_component);
    for (c, (mx, my)) in means.iter().enumerate() {
        for _ in 0..per_component {
            let x: f64 = mx + r.sample::<f64, _>(StandardNormal);
            let y: f64 = my + r.sample::<f64, _>(StandardNormal);
            rows.push(vec![x, y]);
            labels.push(c);
        }
    }
    (
        DataMatrix::from_rows(&rows).expect("finite demo data"),
        labels,
    )
}

/// Side-by-side clustering on the two induced kernels of the same Euclidean
/// distances.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TransformComparison {
    pub bijective: ClusterResult,
    pub fixed_point: ClusterResult,
    /// Anchor used for the fixed-point transform (defaults to the leftmost
    /// point: minimal first coordinate, ties to the lowest index).
    pub anchor: usize,
    /// Fixed-point kernel entries that were negative and got clamped to 0
    /// before use as an affinity.
    pub clamped_negative_entries: usize,
    /// Rows (typically just the anchor's) whose affinity degree was zero
    /// after clamping and received a unit self-affinity so the clustering is
    /// defined. The patched point behaves as fully disconnected.
    pub patched_zero_degree_rows: usize,
    pub ari_between: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ari_bijective_vs_reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ari_fixed_point_vs_reference: Option<f64>,
}

/// Builds Euclidean distances from `data`, clusters on the bijective induced
/// kernel and on the (clamped, patched) fixed-point induced kernel with the
/// same seed, and reports ARIs — against each other and, when given, against
/// reference labels.
pub fn compare_transform_clustering(
    data: &DataMatrix,
    k: usize,
    anchor: Option<usize>,
    seed: u64,
    reference: Option<&[usize]>,
) -> Result<TransformComparison> {
    let n = data.n();
    if let Some(labels) = reference {
        if labels.len() != n {
            return Err(Error::SizeMismatch {
                left: labels.len(),
                right: n,
            });
        }
    }
    let d = distance_matrix(data, Metric::Euclidean);
    let (khat, _) = bijective_to_kernel(&d);
    let bijective = spectral_cluster(&khat, k, seed)?;

    let anchor = anchor.unwrap_or_else(|| {
        let mut best = 0;
        for i in 1..n {
            if data.row(i)[0] < data.row(best)[0] {
                best = i;
            }
        }
        best
    });
    let (ktilde, _) = fixed_point_to_kernel(&d, anchor)?;
    let mut values = ktilde.values().to_vec();
    let mut clamped = 0usize;
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            clamped += 1;
        }
    }
    let mut patched = 0usize;
    for i in 0..n {
        let degree: f64 = values[i * n..(i + 1) * n].iter().sum();
        if degree <= 0.0 {
            values[i * n + i] = 1.0;
            patched += 1;
        }
    }
    let affinity = PairwiseMatrix::new_unchecked(
        values,
        n,
        MatrixKind::Kernel,
        format!(
            "fixed-point-affinity(anchor={anchor}, clamped={clamped}, patched={patched}) of {}",
            d.provenance()
        ),
        false,
    );
    let fixed_point = spectral_cluster(&affinity, k, seed)?;

    let ari_between = adjusted_rand_index(&bijective.labels, &fixed_point.labels);
    let ari_bijective_vs_reference =
        reference.map(|labels| adjusted_rand_index(&bijective.labels, labels));
    let ari_fixed_point_vs_reference =
        reference.map(|labels| adjusted_rand_index(&fixed_point.labels, labels));
    Ok(TransformComparison {
        bijective,
        fixed_point,
        anchor,
        clamped_negative_entries: clamped,
        patched_zero_degree_rows: patched,
        ari_between,
        ari_bijective_vs_reference,
        ari_fixed_point_vs_reference,
    })
}
