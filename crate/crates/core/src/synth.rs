//! Synthetic dependency structures and the Monte-Carlo power harness.
//!
//! The exact function forms are fixed here so that power numbers are
//! reproducible and comparable within this repository:
//!
//! - Quadratic: x_i = i/n (deterministic), y = x² + noise·ε
//! - Linear:    x ~ U(−1,1),               y = x + noise·ε
//! - Sine:      x ~ U(−1,1),               y = sin(4πx) + noise·ε
//! - Spiral:    u ~ U(0,5), x = u·cos(πu) + 0.4·noise·ε₁,
//!                          y = u·sin(πu) + 0.4·noise·ε₂
//! - IndependentCloud: x, y independent standard Gaussians
//!
//! All ε are independent standard Gaussians. Draw order is part of the
//! contract: the x-side vector (or u) is drawn first, then the ε vectors in
//! the order they appear above, each drawn completely before the next.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrices::DataMatrix;
use crate::rng;
use crate::stats::{apply_transform, build_matrix, StatConfig};
use crate::testing::permutation_test;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Quadratic,
    Linear,
    Sine,
    Spiral,
    IndependentCloud,
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Relation::Quadratic => "quadratic",
            Relation::Linear => "linear",
            Relation::Sine => "sine",
            Relation::Spiral => "spiral",
            Relation::IndependentCloud => "independent-cloud",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SimulationSpec {
    pub relation: Relation,
    pub n: usize,
    pub noise: f64,
    pub seed: u64,
}

/// Draws one (x, y) sample pair per the spec. Deterministic in `spec.seed`.
pub fn generate(spec: &SimulationSpec) -> Result<(DataMatrix, DataMatrix)> {
    if spec.n < 2 {
        return Err(Error::SampleTooSmall {
            needed: 2,
            got: spec.n,
        });
    }
    if !(spec.noise >= 0.0) {
        return Err(Error::Config(format!(
            "noise must be nonnegative, got {}",
            spec.noise
        )));
    }
    let n = spec.n;
    let mut r = rng::stream(spec.seed, 0);
    fn normals(r: &mut impl Rng, count: usize) -> Vec<f64> {
        (0..count).map(|_| r.sample(StandardNormal)).collect()
    }
    let (x, y): (Vec<f64>, Vec<f64>) = match spec.relation {
        Relation::Quadratic => {
            let x: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
            let eps = normals(&mut r, n);
            let y = x
                .iter()
                .zip(&eps)
                .map(|(xi, e)| xi * xi + spec.noise * e)
                .collect();
            (x, y)
        }
        Relation::Linear | Relation::Sine => {
            let x: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let eps = normals(&mut r, n);
            let y = x
                .iter()
                .zip(&eps)
                .map(|(xi, e)| {
                    let base = if spec.relation == Relation::Linear {
                        *xi
                    } else {
                        (4.0 * std::f64::consts::PI * xi).sin()
                    };
                    base + spec.noise * e
                })
                .collect();
            (x, y)
        }
        Relation::Spiral => {
            let u: Vec<f64> = (0..n).map(|_| r.random_range(0.0..5.0)).collect();
            let e1 = normals(&mut r, n);
            let e2 = normals(&mut r, n);
            let x = u
                .iter()
                .zip(&e1)
                .map(|(ui, e)| ui * (std::f64::consts::PI * ui).cos() + 0.4 * spec.noise * e)
                .collect();
            let y = u
                .iter()
                .zip(&e2)
                .map(|(ui, e)| ui * (std::f64::consts::PI * ui).sin() + 0.4 * spec.noise * e)
                .collect();
            (x, y)
        }
        Relation::IndependentCloud => {
            let x = normals(&mut r, n);
            let y = normals(&mut r, n);
            (x, y)
        }
    };
    Ok((DataMatrix::from_column(&x)?, DataMatrix::from_column(&y)?))
}

/// Monte-Carlo power estimate of a testing method on one relation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PowerReport {
    pub relation: Relation,
    pub method: String,
    pub alpha: f64,
    pub trials: usize,
    pub rejections: usize,
    pub power: f64,
    pub monte_carlo_se: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_trial_p: Option<Vec<f64>>,
}

/// Runs `trials` independent simulate→test cycles and counts rejections at
/// level `alpha`. Trial t draws its data from substream derive(seed, 2t) and
/// runs its permutation test with seed derive(seed, 2t+1), so trials are
/// independent and the whole estimate is reproducible under any parallelism.
/// `spec.seed` is ignored here; the harness seed governs everything.
pub fn estimate_power(
    spec: &SimulationSpec,
    config: &StatConfig,
    alpha: f64,
    trials: usize,
    permutations: usize,
    seed: u64,
    keep_pvalues: bool,
) -> Result<PowerReport> {
    if trials == 0 {
        return Err(Error::Config("power estimation needs at least one trial".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let p_values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let trial_spec = SimulationSpec {
                seed: rng::derive_seed(seed, 2 * t),
                ..*spec
            };
            let (x, y) = generate(&trial_spec)?;
            let mut mx = build_matrix(&x, config.representation)?;
            let mut my = build_matrix(&y, config.representation)?;
            if let Some(tr) = config.transform {
                mx = apply_transform(&mx, tr)?;
                my = apply_transform(&my, tr)?;
            }
            let res = permutation_test(
                &mx,
                &my,
                config.variant,
                permutations,
                rng::derive_seed(seed, 2 * t + 1),
                false,
            )?;
            Ok(res.p_value)
        })
        .collect::<Result<Vec<_>>>()?;
    let rejections = p_values.iter().filter(|&&p| p <= alpha).count();
    let power = rejections as f64 / trials as f64;
    Ok(PowerReport {
        relation: spec.relation,
        method: config.describe(),
        alpha,
        trials,
        rejections,
        power,
        monte_carlo_se: (power * (1.0 - power) / trials as f64).sqrt(),
        per_trial_p: keep_pvalues.then_some(p_values),
    })
}
