//! Command-line surface: every flag, its parsing, and the mapping onto the
//! library's configuration types.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use depcor::{Bandwidth, Kernel, MatrixKind, Metric, Relation, TransformKind, VariantKind};

#[derive(Parser)]
#[command(
    name = "depcor",
    version,
    about = "Dependence statistics on metric and kernel representations of data",
    long_about = "Distance covariance/correlation and HSIC from one shared core, with exact \
                  metric↔kernel transforms, seeded permutation tests, property diagnostics, \
                  synthetic benchmarks, and spectral clustering.\n\nEvery command is \
                  deterministic given its flags and seed; results never depend on --threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Compute a dependence statistic for a paired sample.
    Stat(StatArgs),
    /// Run a seeded permutation test of independence.
    Test(TestArgs),
    /// Apply a metric↔kernel transform to a pairwise matrix.
    Transform(TransformArgs),
    /// Run the property-diagnostics battery on a pairwise matrix.
    Diagnose(DiagnoseArgs),
    /// Generate a synthetic (x, y) sample as CSV.
    Simulate(SimulateArgs),
    /// Estimate a test's rejection rate over simulated trials.
    Power(PowerArgs),
    /// Spectral clustering on a transform-induced kernel.
    Cluster(ClusterArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    L1,
}

impl MetricArg {
    pub fn to_metric(self) -> Metric {
        match self {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::L1 => Metric::L1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricArg::Euclidean => "euclidean",
            MetricArg::L1 => "l1",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum KernelArg {
    Gaussian,
    Laplacian,
}

impl KernelArg {
    pub fn to_kernel(self, bandwidth: BandwidthArg) -> Kernel {
        let b = bandwidth.to_bandwidth();
        match self {
            KernelArg::Gaussian => Kernel::Gaussian(b),
            KernelArg::Laplacian => Kernel::Laplacian(b),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            KernelArg::Gaussian => "gaussian",
            KernelArg::Laplacian => "laplacian",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BandwidthArg {
    Median,
    MedianOverSqrt2,
    Fixed(f64),
}

impl BandwidthArg {
    pub fn to_bandwidth(self) -> Bandwidth {
        match self {
            BandwidthArg::Median => Bandwidth::MedianHeuristic,
            BandwidthArg::MedianOverSqrt2 => Bandwidth::MedianOverSqrt2,
            BandwidthArg::Fixed(v) => Bandwidth::Fixed(v),
        }
    }

    pub fn echo(self) -> serde_json::Value {
        match self {
            BandwidthArg::Median => "median".into(),
            BandwidthArg::MedianOverSqrt2 => "median-over-sqrt2".into(),
            BandwidthArg::Fixed(v) => v.into(),
        }
    }
}

pub fn parse_bandwidth(s: &str) -> Result<BandwidthArg, String> {
    match s {
        "median" => Ok(BandwidthArg::Median),
        "median-over-sqrt2" => Ok(BandwidthArg::MedianOverSqrt2),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v > 0.0)
            .map(BandwidthArg::Fixed)
            .ok_or_else(|| {
                format!(
                    "expected \"median\", \"median-over-sqrt2\", or a positive number, got {other:?}"
                )
            }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum KindArg {
    Distance,
    Kernel,
}

impl KindArg {
    pub fn to_kind(self) -> MatrixKind {
        match self {
            KindArg::Distance => MatrixKind::Distance,
            KindArg::Kernel => MatrixKind::Kernel,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            KindArg::Distance => "distance",
            KindArg::Kernel => "kernel",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum TransformArg {
    None,
    Bijective,
    BijectiveScaled,
    FixedPoint,
}

impl TransformArg {
    pub fn label(self) -> &'static str {
        match self {
            TransformArg::None => "none",
            TransformArg::Bijective => "bijective",
            TransformArg::BijectiveScaled => "bijective-scaled",
            TransformArg::FixedPoint => "fixed-point",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum TransformCoreArg {
    Bijective,
    BijectiveScaled,
    FixedPoint,
}

impl TransformCoreArg {
    pub fn label(self) -> &'static str {
        match self {
            TransformCoreArg::Bijective => "bijective",
            TransformCoreArg::BijectiveScaled => "bijective-scaled",
            TransformCoreArg::FixedPoint => "fixed-point",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum VariantArg {
    Biased,
    Normalized,
    Unbiased,
    NormalizedUnbiased,
    Corrected,
}

impl VariantArg {
    pub fn to_kind(self) -> VariantKind {
        match self {
            VariantArg::Biased => VariantKind::Biased,
            VariantArg::Normalized => VariantKind::Normalized,
            VariantArg::Unbiased => VariantKind::Unbiased,
            VariantArg::NormalizedUnbiased => VariantKind::NormalizedUnbiased,
            VariantArg::Corrected => VariantKind::Corrected,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            VariantArg::Biased => "biased",
            VariantArg::Normalized => "normalized",
            VariantArg::Unbiased => "unbiased",
            VariantArg::NormalizedUnbiased => "normalized-unbiased",
            VariantArg::Corrected => "corrected",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum RelationArg {
    Quadratic,
    Linear,
    Sine,
    Spiral,
    IndependentCloud,
}

impl RelationArg {
    pub fn to_relation(self) -> Relation {
        match self {
            RelationArg::Quadratic => Relation::Quadratic,
            RelationArg::Linear => Relation::Linear,
            RelationArg::Sine => Relation::Sine,
            RelationArg::Spiral => Relation::Spiral,
            RelationArg::IndependentCloud => Relation::IndependentCloud,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RelationArg::Quadratic => "quadratic",
            RelationArg::Linear => "linear",
            RelationArg::Sine => "sine",
            RelationArg::Spiral => "spiral",
            RelationArg::IndependentCloud => "independent-cloud",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
pub enum AffinityArg {
    Bijective,
    FixedPoint,
}

impl AffinityArg {
    pub fn label(self) -> &'static str {
        match self {
            AffinityArg::Bijective => "bijective",
            AffinityArg::FixedPoint => "fixed-point",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnchorArg {
    Leftmost,
    Index(usize),
}

impl AnchorArg {
    pub fn to_option(self) -> Option<usize> {
        match self {
            AnchorArg::Leftmost => None,
            AnchorArg::Index(i) => Some(i),
        }
    }

    pub fn echo(self) -> serde_json::Value {
        match self {
            AnchorArg::Leftmost => "leftmost".into(),
            AnchorArg::Index(i) => i.into(),
        }
    }
}

pub fn parse_cluster_anchor(s: &str) -> Result<AnchorArg, String> {
    if s == "leftmost" {
        Ok(AnchorArg::Leftmost)
    } else {
        s.parse()
            .map(AnchorArg::Index)
            .map_err(|_| format!("expected \"leftmost\" or an observation index, got {s:?}"))
    }
}

/// Worker-pool size; part of every subcommand, never part of `config_echo`
/// because results are independent of it by contract.
#[derive(Args)]
pub struct ThreadsArg {
    /// Size of the worker pool (default: one per logical CPU); results do
    /// not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Paired-sample input: either two data CSVs or two precomputed pairwise
/// matrices.
#[derive(Args)]
pub struct InputArgs {
    /// Left-hand sample as a data CSV (observations × features).
    #[arg(long, requires = "y", conflicts_with_all = ["matrix_x", "matrix_y"])]
    pub x: Option<PathBuf>,

    /// Right-hand sample as a data CSV.
    #[arg(long, requires = "x")]
    pub y: Option<PathBuf>,

    /// Treat the first line of --x/--y as a header row.
    #[arg(long)]
    pub header: bool,

    /// Precomputed pairwise matrix CSV for the left-hand sample.
    #[arg(long, requires = "matrix_y")]
    pub matrix_x: Option<PathBuf>,

    /// Precomputed pairwise matrix CSV for the right-hand sample.
    #[arg(long, requires = "matrix_x")]
    pub matrix_y: Option<PathBuf>,

    /// How to interpret --matrix-x.
    #[arg(long, value_enum, default_value = "distance", conflicts_with = "x")]
    pub kind_x: KindArg,

    /// How to interpret --matrix-y.
    #[arg(long, value_enum, default_value = "distance", conflicts_with = "x")]
    pub kind_y: KindArg,
}

/// How raw data becomes a pairwise matrix, plus an optional transform.
#[derive(Args)]
pub struct RepresentationArgs {
    /// Distance metric for data inputs (default euclidean).
    #[arg(long, value_enum, conflicts_with = "kernel")]
    pub metric: Option<MetricArg>,

    /// Kernel for data inputs (instead of a metric).
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,

    /// Kernel bandwidth σ: "median" (σ = median pairwise distance),
    /// "median-over-sqrt2" (σ = median/√2, i.e. exp(−d²/median²) for the
    /// Gaussian), or a positive number.
    #[arg(long, default_value = "median", value_parser = parse_bandwidth)]
    pub bandwidth: BandwidthArg,

    /// Transform applied to both pairwise matrices before the statistic.
    #[arg(long, value_enum, default_value = "none")]
    pub transform: TransformArg,

    /// Anchor observation for --transform fixed-point on distances.
    #[arg(long, default_value_t = 0)]
    pub anchor: usize,
}

impl RepresentationArgs {
    pub fn to_representation(&self) -> depcor::Representation {
        match self.kernel {
            Some(k) => depcor::Representation::Kernel(k.to_kernel(self.bandwidth)),
            None => depcor::Representation::Metric(
                self.metric.unwrap_or(MetricArg::Euclidean).to_metric(),
            ),
        }
    }

    pub fn to_transform(&self) -> Option<TransformKind> {
        match self.transform {
            TransformArg::None => None,
            TransformArg::Bijective => Some(TransformKind::Bijective),
            TransformArg::BijectiveScaled => Some(TransformKind::BijectiveScaled),
            TransformArg::FixedPoint => Some(TransformKind::FixedPoint { anchor: self.anchor }),
        }
    }
}

/// Flags shared by `stat` and `test`.
#[derive(Args)]
pub struct StatCore {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub rep: RepresentationArgs,

    /// Estimator variant.
    #[arg(long, value_enum, default_value = "normalized")]
    pub variant: VariantArg,
}

#[derive(Args)]
pub struct StatArgs {
    #[command(flatten)]
    pub core: StatCore,

    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub threads: ThreadsArg,
}

#[derive(Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub core: StatCore,

    /// Number of permutation replicates R; p = (1 + #{replicate ≥ observed}) / (R + 1).
    #[arg(long, default_value_t = 1000)]
    pub permutations: usize,

    /// Master seed; replicate r draws its permutation from substream r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Include all replicate statistics in the JSON report.
    #[arg(long)]
    pub keep_replicates: bool,

    /// Print elapsed milliseconds to standard error (never part of the JSON).
    #[arg(long)]
    pub timing: bool,

    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub threads: ThreadsArg,
}

#[derive(Args)]
pub struct TransformArgs {
    /// Input pairwise matrix CSV.
    #[arg(long = "in")]
    pub input: PathBuf,

    /// How to interpret the input matrix.
    #[arg(long, value_enum, default_value = "distance")]
    pub kind: KindArg,

    /// Which transform to apply; the direction follows from --kind.
    #[arg(long, value_enum)]
    pub transform: TransformCoreArg,

    /// Anchor observation for the fixed-point transform of distances.
    #[arg(long, default_value_t = 0)]
    pub anchor: usize,

    /// Destination CSV for the transformed matrix (a JSON summary goes to
    /// standard output).
    #[arg(long)]
    pub out: PathBuf,

    #[command(flatten)]
    pub threads: ThreadsArg,
}

#[derive(Args)]
pub struct DiagnoseArgs {
    /// Input pairwise matrix CSV.
    #[arg(long = "in")]
    pub input: PathBuf,

    /// How to interpret the input matrix.
    #[arg(long, value_enum, default_value = "distance")]
    pub kind: KindArg,

    /// Relative eigenvalue tolerance for the spectral checks.
    #[arg(long, default_value_t = depcor::DEFAULT_EIG_TOL)]
    pub tolerance: f64,

    /// Relative tolerance for the round-trip audit.
    #[arg(long, default_value_t = 1e-12)]
    pub round_trip_tolerance: f64,

    /// Anchor observation for the fixed-point audits.
    #[arg(long, default_value_t = 0)]
    pub anchor: usize,

    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub threads: ThreadsArg,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Which synthetic relation to draw from.
    #[arg(long, value_enum)]
    pub relation: RelationArg,

    /// Sample size.
    #[arg(long)]
    pub n: usize,

    /// Noise amplitude (≥ 0).
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,

    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Write the CSV here and print a JSON summary to standard output;
    /// without --out the CSV itself goes to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub threads: ThreadsArg,
}

#[derive(Args)]
pub struct PowerArgs {
    /// Which synthetic relation to draw from.
    #[arg(long, value_enum)]
    pub relation: RelationArg,

    /// Sample size per trial.
    #[arg(long)]
    pub n: usize,

    /// Noise amplitude (≥ 0).
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,

    #[command(flatten)]
    pub rep: RepresentationArgs,

    /// Estimator variant for the per-trial tests.
    #[arg(long, value_enum, default_value = "biased")]
    pub variant: VariantArg,

    /// Rejection level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Number of Monte-Carlo trials.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,

    /// Permutation replicates per trial.
    #[arg(long, default_value_t = 1000)]
    pub permutations: usize,

    /// Master seed; trial t uses substreams 2t (data) and 2t+1 (test).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Write per-trial p-values as a one-column CSV.
    #[arg(long)]
    pub trials_out: Option<PathBuf>,

    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub threads: ThreadsArg,
}

#[derive(Args)]
pub struct ClusterArgs {
    /// Data CSV (observations × features); distances are Euclidean.
    #[arg(long, conflicts_with = "matrix_in")]
    pub x: Option<PathBuf>,

    /// Treat the first line of --x as a header row.
    #[arg(long)]
    pub header: bool,

    /// Precomputed affinity (kernel) matrix CSV, clustered as given.
    #[arg(long)]
    pub matrix_in: Option<PathBuf>,

    /// Number of clusters.
    #[arg(long)]
    pub k: usize,

    /// Which induced kernel to cluster on (data mode).
    #[arg(long, value_enum, default_value = "bijective")]
    pub affinity: AffinityArg,

    /// Fixed-point anchor: "leftmost" or an observation index.
    #[arg(long, default_value = "leftmost", value_parser = parse_cluster_anchor)]
    pub anchor: AnchorArg,

    /// Cluster with both induced kernels and report the comparison.
    #[arg(long, conflicts_with = "matrix_in")]
    pub compare: bool,

    /// Reference labels CSV (one label per line) for adjusted Rand indices.
    #[arg(long)]
    pub reference: Option<PathBuf>,

    /// Write the winning labels here, one per line.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,

    /// Seed for the pinned k-means restarts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub threads: ThreadsArg,
}
