//! One handler per subcommand: resolve inputs, call the library, emit the
//! report. All validation errors surface as `Error::Config` (usage, exit 2)
//! or as computational errors (exit 1); handlers never print partial output
//! before the computation has succeeded.

use std::time::Instant;

use depcor::{
    adjusted_rand_index, apply_transform, audit_rank_preservation, audit_round_trip,
    audit_translation_invariance, bijective_scaled, bijective_to_kernel, bijective_to_metric,
    check_positive_definite, check_theorem1_biconditional, compare_transform_clustering,
    data_csv_string, distance_matrix, estimate_power, fixed_point_to_kernel,
    fixed_point_to_metric, generate, kernel_matrix, permutation_test, read_data_csv,
    read_labels_csv, read_matrix_csv, spectral_cluster, stat_on_matrices, write_data_csv,
    write_labels_csv, write_matrix_csv, ClusterResult, DataMatrix, Error, MatrixKind, Metric,
    PairwiseMatrix, PropertyReport, Relation, Representation, Result, SimulationSpec, StatConfig,
    Theorem1Report, TransformKind,
};
use serde::Serialize;

use crate::args::{
    AffinityArg, Cli, ClusterArgs, Command, DiagnoseArgs, InputArgs, MetricArg, PowerArgs,
    RepresentationArgs, SimulateArgs, StatArgs, StatCore, TestArgs, TransformArg,
    TransformArgs, TransformCoreArg,
};
use crate::output::{emit, Echo, Report};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stat(a) => with_pool(a.threads.threads, || stat(&a)),
        Command::Test(a) => with_pool(a.threads.threads, || test(&a)),
        Command::Transform(a) => with_pool(a.threads.threads, || transform(&a)),
        Command::Diagnose(a) => with_pool(a.threads.threads, || diagnose(&a)),
        Command::Simulate(a) => with_pool(a.threads.threads, || simulate(&a)),
        Command::Power(a) => with_pool(a.threads.threads, || power(&a)),
        Command::Cluster(a) => with_pool(a.threads.threads, || cluster(&a)),
    }
}

/// Runs `f` inside a dedicated pool of the requested size; without
/// `--threads` the global default pool is used. Results are identical either
/// way — the flag only controls resource usage.
fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("could not build a {n}-thread pool: {e}")))?
            .install(f),
    }
}

/// Loads the paired input as two pairwise matrices, applying the configured
/// representation (data mode) and transform.
fn resolve_matrices(
    input: &InputArgs,
    rep: &RepresentationArgs,
) -> Result<(PairwiseMatrix, PairwiseMatrix)> {
    let (mut mx, mut my) = match (&input.x, &input.y, &input.matrix_x, &input.matrix_y) {
        (Some(x), Some(y), None, None) => {
            let x = read_data_csv(x, input.header)?;
            let y = read_data_csv(y, input.header)?;
            if x.n() != y.n() {
                return Err(Error::SizeMismatch {
                    left: x.n(),
                    right: y.n(),
                });
            }
            let build = |data: &DataMatrix| match rep.to_representation() {
                Representation::Metric(m) => Ok(distance_matrix(data, m)),
                Representation::Kernel(k) => kernel_matrix(data, k),
            };
            (build(&x)?, build(&y)?)
        }
        (None, None, Some(px), Some(py)) => {
            if rep.metric.is_some() || rep.kernel.is_some() {
                return Err(Error::Config(
                    "--metric/--kernel describe raw data; with --matrix-x/--matrix-y the \
                     matrices are taken as given"
                        .into(),
                ));
            }
            let mx = read_matrix_csv(px, input.kind_x.to_kind())?;
            let my = read_matrix_csv(py, input.kind_y.to_kind())?;
            if mx.n() != my.n() {
                return Err(Error::SizeMismatch {
                    left: mx.n(),
                    right: my.n(),
                });
            }
            (mx, my)
        }
        _ => {
            return Err(Error::Config(
                "provide either --x and --y (data CSVs) or --matrix-x and --matrix-y \
                 (pairwise matrices)"
                    .into(),
            ))
        }
    };
    if let Some(t) = rep.to_transform() {
        mx = apply_transform(&mx, t)?;
        my = apply_transform(&my, t)?;
    }
    Ok((mx, my))
}

fn echo_transform(mut e: Echo, rep: &RepresentationArgs) -> Echo {
    e = e.set("transform", rep.transform.label());
    if rep.transform == TransformArg::FixedPoint {
        e = e.set("anchor", rep.anchor);
    }
    e
}

fn echo_representation(e: Echo, rep: &RepresentationArgs) -> Echo {
    let e = match rep.kernel {
        Some(k) => e.set("kernel", k.label()).set("bandwidth", rep.bandwidth.echo()),
        None => e.set(
            "metric",
            rep.metric.unwrap_or(MetricArg::Euclidean).label(),
        ),
    };
    echo_transform(e, rep)
}

fn stat_echo(subcommand: &str, core: &StatCore) -> Echo {
    let mut e = Echo::new(subcommand);
    if let (Some(x), Some(y)) = (&core.input.x, &core.input.y) {
        e = e.path("x", x).path("y", y).set("header", core.input.header);
        e = echo_representation(e, &core.rep);
    }
    if let (Some(mx), Some(my)) = (&core.input.matrix_x, &core.input.matrix_y) {
        e = e
            .path("matrix_x", mx)
            .path("matrix_y", my)
            .set("kind_x", core.input.kind_x.label())
            .set("kind_y", core.input.kind_y.label());
        e = echo_transform(e, &core.rep);
    }
    e.set("variant", core.variant.label())
}

fn stat(args: &StatArgs) -> Result<()> {
    let (mx, my) = resolve_matrices(&args.core.input, &args.core.rep)?;
    let result = stat_on_matrices(&mx, &my, args.core.variant.to_kind())?;
    let config_echo = stat_echo("stat", &args.core)
        .opt_path("out", &args.out)
        .finish();
    emit(&Report { config_echo, result }, args.out.as_deref())
}

fn test(args: &TestArgs) -> Result<()> {
    let (mx, my) = resolve_matrices(&args.core.input, &args.core.rep)?;
    let start = Instant::now();
    let result = permutation_test(
        &mx,
        &my,
        args.core.variant.to_kind(),
        args.permutations,
        args.seed,
        args.keep_replicates,
    )?;
    if args.timing {
        eprintln!("elapsed_ms: {}", start.elapsed().as_millis());
    }
    let config_echo = stat_echo("test", &args.core)
        .set("permutations", args.permutations)
        .set("seed", args.seed)
        .set("keep_replicates", args.keep_replicates)
        .opt_path("out", &args.out)
        .finish();
    emit(&Report { config_echo, result }, args.out.as_deref())
}

#[derive(Serialize)]
struct TransformOutcome {
    n: usize,
    input_kind: MatrixKind,
    output_kind: MatrixKind,
    /// Max element consumed by the bijective maps (their invertibility record).
    #[serde(skip_serializing_if = "Option::is_none")]
    max_used: Option<f64>,
    provenance: String,
    diagonal_warning: bool,
    matrix_out: String,
}

fn transform(args: &TransformArgs) -> Result<()> {
    let m = read_matrix_csv(&args.input, args.kind.to_kind())?;
    let (out_m, max_used) = match args.transform {
        TransformCoreArg::Bijective => match m.kind() {
            MatrixKind::Distance => {
                let (k, spec) = bijective_to_kernel(&m);
                (k, spec.max_used)
            }
            MatrixKind::Kernel => {
                let (d, spec) = bijective_to_metric(&m);
                (d, spec.max_used)
            }
        },
        TransformCoreArg::BijectiveScaled => {
            let (k, spec) = bijective_scaled(&m)?;
            (k, spec.max_used)
        }
        TransformCoreArg::FixedPoint => match m.kind() {
            MatrixKind::Distance => {
                let (k, spec) = fixed_point_to_kernel(&m, args.anchor)?;
                (k, spec.max_used)
            }
            MatrixKind::Kernel => (fixed_point_to_metric(&m), None),
        },
    };
    write_matrix_csv(&args.out, &out_m)?;
    let mut e = Echo::new("transform")
        .path("in", &args.input)
        .set("kind", args.kind.label())
        .set("transform", args.transform.label());
    if args.transform == TransformCoreArg::FixedPoint && m.kind() == MatrixKind::Distance {
        e = e.set("anchor", args.anchor);
    }
    let config_echo = e.path("out", &args.out).finish();
    let result = TransformOutcome {
        n: out_m.n(),
        input_kind: m.kind(),
        output_kind: out_m.kind(),
        max_used,
        provenance: out_m.provenance().to_string(),
        diagonal_warning: out_m.diagonal_warning(),
        matrix_out: args.out.display().to_string(),
    };
    emit(&Report { config_echo, result }, None)
}

#[derive(Serialize)]
struct DiagnoseOutcome {
    n: usize,
    kind: MatrixKind,
    /// Negative-type ⟺ induced-kernel-PSD biconditional (distance inputs).
    #[serde(skip_serializing_if = "Option::is_none")]
    theorem1: Option<Theorem1Report>,
    /// Full PSD check (kernel inputs).
    #[serde(skip_serializing_if = "Option::is_none")]
    positive_definite: Option<PropertyReport>,
    round_trip: PropertyReport,
    rank_preservation_bijective: PropertyReport,
    rank_preservation_fixed_point: PropertyReport,
    translation_invariance_bijective: PropertyReport,
    translation_invariance_fixed_point: PropertyReport,
}

fn diagnose(args: &DiagnoseArgs) -> Result<()> {
    let m = read_matrix_csv(&args.input, args.kind.to_kind())?;
    if args.anchor >= m.n() {
        return Err(Error::AnchorOutOfRange {
            anchor: args.anchor,
            n: m.n(),
        });
    }
    let (theorem1, positive_definite, rank_bijective, rank_fixed_point) = match m.kind() {
        MatrixKind::Distance => (
            Some(check_theorem1_biconditional(&m, args.tolerance)),
            None,
            audit_rank_preservation(&m, &bijective_to_kernel(&m).0),
            audit_rank_preservation(&m, &fixed_point_to_kernel(&m, args.anchor)?.0),
        ),
        MatrixKind::Kernel => (
            None,
            Some(check_positive_definite(&m, args.tolerance)),
            audit_rank_preservation(&m, &bijective_to_metric(&m).0),
            audit_rank_preservation(&m, &fixed_point_to_metric(&m)),
        ),
    };
    // The translation audits run on a synthetic 1-D grid; its size follows
    // the input so --anchor stays a valid grid index.
    let grid_n = m.n().max(8);
    let result = DiagnoseOutcome {
        n: m.n(),
        kind: m.kind(),
        theorem1,
        positive_definite,
        round_trip: audit_round_trip(&m, args.round_trip_tolerance),
        rank_preservation_bijective: rank_bijective,
        rank_preservation_fixed_point: rank_fixed_point,
        translation_invariance_bijective: audit_translation_invariance(
            TransformKind::Bijective,
            grid_n,
            0.5,
            args.round_trip_tolerance,
        ),
        translation_invariance_fixed_point: audit_translation_invariance(
            TransformKind::FixedPoint { anchor: args.anchor },
            grid_n,
            0.5,
            args.round_trip_tolerance,
        ),
    };
    let config_echo = Echo::new("diagnose")
        .path("in", &args.input)
        .set("kind", args.kind.label())
        .set("tolerance", args.tolerance)
        .set("round_trip_tolerance", args.round_trip_tolerance)
        .set("anchor", args.anchor)
        .opt_path("out", &args.out)
        .finish();
    emit(&Report { config_echo, result }, args.out.as_deref())
}

#[derive(Serialize)]
struct SimulateOutcome {
    relation: Relation,
    n: usize,
    csv_out: String,
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let spec = SimulationSpec {
        relation: args.relation.to_relation(),
        n: args.n,
        noise: args.noise,
        seed: args.seed,
    };
    let (x, y) = generate(&spec)?;
    let rows: Vec<Vec<f64>> = (0..args.n).map(|i| vec![x.row(i)[0], y.row(i)[0]]).collect();
    let data = DataMatrix::from_rows(&rows)?;
    match &args.out {
        None => {
            use std::io::Write as _;
            std::io::stdout()
                .write_all(data_csv_string(&data).as_bytes())
                .map_err(|e| Error::Io {
                    path: "<stdout>".into(),
                    source: e,
                })
        }
        Some(path) => {
            write_data_csv(path, &data)?;
            let config_echo = Echo::new("simulate")
                .set("relation", args.relation.label())
                .set("n", args.n)
                .set("noise", args.noise)
                .set("seed", args.seed)
                .path("out", path)
                .finish();
            let result = SimulateOutcome {
                relation: spec.relation,
                n: args.n,
                csv_out: path.display().to_string(),
            };
            emit(&Report { config_echo, result }, None)
        }
    }
}

fn power(args: &PowerArgs) -> Result<()> {
    let spec = SimulationSpec {
        relation: args.relation.to_relation(),
        n: args.n,
        noise: args.noise,
        seed: 0, // ignored: the harness seed below governs every trial
    };
    let config = StatConfig {
        representation: args.rep.to_representation(),
        transform: args.rep.to_transform(),
        variant: args.variant.to_kind(),
    };
    let mut report = estimate_power(
        &spec,
        &config,
        args.alpha,
        args.trials,
        args.permutations,
        args.seed,
        args.trials_out.is_some(),
    )?;
    if let Some(path) = &args.trials_out {
        let p_values = report.per_trial_p.take().expect("kept because --trials-out is set");
        write_data_csv(path, &DataMatrix::from_column(&p_values)?)?;
    }
    let e = Echo::new("power")
        .set("relation", args.relation.label())
        .set("n", args.n)
        .set("noise", args.noise);
    let config_echo = echo_representation(e, &args.rep)
        .set("variant", args.variant.label())
        .set("alpha", args.alpha)
        .set("trials", args.trials)
        .set("permutations", args.permutations)
        .set("seed", args.seed)
        .opt_path("trials_out", &args.trials_out)
        .opt_path("out", &args.out)
        .finish();
    emit(
        &Report {
            config_echo,
            result: report,
        },
        args.out.as_deref(),
    )
}

#[derive(Serialize)]
struct ClusterOutcome {
    #[serde(flatten)]
    clustering: ClusterResult,
    /// Fixed-point fields, absent for bijective/matrix runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    anchor: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clamped_negative_entries: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    patched_zero_degree_rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ari_vs_reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels_out: Option<String>,
}

fn cluster(args: &ClusterArgs) -> Result<()> {
    let reference: Option<Vec<usize>> = match &args.reference {
        Some(p) => Some(read_labels_csv(p)?),
        None => None,
    };
    let check_reference = |r: &Option<Vec<usize>>, n: usize| -> Result<()> {
        if let Some(labels) = r {
            if labels.len() != n {
                return Err(Error::SizeMismatch {
                    left: labels.len(),
                    right: n,
                });
            }
        }
        Ok(())
    };
    let base_echo = || {
        Echo::new("cluster")
            .set("k", args.k)
            .set("seed", args.seed)
            .opt_path("reference", &args.reference)
            .opt_path("labels_out", &args.labels_out)
            .opt_path("out", &args.out)
    };
    let labels_out_string = args.labels_out.as_ref().map(|p| p.display().to_string());

    // Matrix mode: the affinity is taken as given.
    if let Some(matrix_in) = &args.matrix_in {
        let m = read_matrix_csv(matrix_in, MatrixKind::Kernel)?;
        check_reference(&reference, m.n())?;
        let clustering = spectral_cluster(&m, args.k, args.seed)?;
        let ari_vs_reference = reference
            .as_ref()
            .map(|r| adjusted_rand_index(&clustering.labels, r));
        if let Some(path) = &args.labels_out {
            write_labels_csv(path, &clustering.labels)?;
        }
        let config_echo = base_echo().path("matrix_in", matrix_in).finish();
        let result = ClusterOutcome {
            clustering,
            anchor: None,
            clamped_negative_entries: None,
            patched_zero_degree_rows: None,
            ari_vs_reference,
            labels_out: labels_out_string,
        };
        return emit(&Report { config_echo, result }, args.out.as_deref());
    }

    // Data mode.
    let Some(x) = &args.x else {
        return Err(Error::Config(
            "provide --x (data CSV) or --matrix-in (affinity matrix)".into(),
        ));
    };
    let data = read_data_csv(x, args.header)?;
    check_reference(&reference, data.n())?;
    let data_echo = || base_echo().path("x", x).set("header", args.header);

    if args.compare {
        if args.labels_out.is_some() {
            return Err(Error::Config(
                "--labels-out is ambiguous with --compare; rerun with a single --affinity to \
                 export labels"
                    .into(),
            ));
        }
        let result = compare_transform_clustering(
            &data,
            args.k,
            args.anchor.to_option(),
            args.seed,
            reference.as_deref(),
        )?;
        let config_echo = data_echo()
            .set("compare", true)
            .set("anchor", args.anchor.echo())
            .finish();
        return emit(&Report { config_echo, result }, args.out.as_deref());
    }

    let mut e = data_echo().set("affinity", args.affinity.label());
    let result = match args.affinity {
        AffinityArg::Bijective => {
            let d = distance_matrix(&data, Metric::Euclidean);
            let (kernel, _) = bijective_to_kernel(&d);
            let clustering = spectral_cluster(&kernel, args.k, args.seed)?;
            let ari_vs_reference = reference
                .as_ref()
                .map(|r| adjusted_rand_index(&clustering.labels, r));
            ClusterOutcome {
                clustering,
                anchor: None,
                clamped_negative_entries: None,
                patched_zero_degree_rows: None,
                ari_vs_reference,
                labels_out: labels_out_string,
            }
        }
        AffinityArg::FixedPoint => {
            e = e.set("anchor", args.anchor.echo());
            // The comparison helper owns the clamp/patch bookkeeping the
            // fixed-point affinity needs; run it and keep that side.
            let cmp = compare_transform_clustering(
                &data,
                args.k,
                args.anchor.to_option(),
                args.seed,
                reference.as_deref(),
            )?;
            ClusterOutcome {
                clustering: cmp.fixed_point,
                anchor: Some(cmp.anchor),
                clamped_negative_entries: Some(cmp.clamped_negative_entries),
                patched_zero_degree_rows: Some(cmp.patched_zero_degree_rows),
                ari_vs_reference: cmp.ari_fixed_point_vs_reference,
                labels_out: labels_out_string,
            }
        }
    };
    if let Some(path) = &args.labels_out {
        write_labels_csv(path, &result.clustering.labels)?;
    }
    emit(
        &Report {
            config_echo: e.finish(),
            result,
        },
        args.out.as_deref(),
    )
}
