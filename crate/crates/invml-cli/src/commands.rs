//! The six subcommand implementations. Every command resolves a config,
//! writes its outputs under the chosen directory, and drops a manifest
//! that can be fed back as the config of an identical run.

use std::fs;
use std::path::{Path, PathBuf};

use invml_core::autograd::ActivationSpec;
use invml_core::datasets::{
    gen_low_dim_spheres, gen_spheres, gen_swiss_roll, knn_graph, load_csv, load_idx, save_csv,
    Dataset, IdxOptions, NeighborGraph,
};
use invml_core::interpolation::{
    geodesic_interpolate, interpolation_mse_curve, is_distant_pair, knn_interpolate,
    DEFAULT_T_STEPS,
};
use invml_core::linalg::{pca_project, svd_rank};
use invml_core::metrics;
use invml_core::{
    load_checkpoint, save_checkpoint, train, AdamState, Checkpoint, InvMLEncoder, InvMlError,
    LossFlags, Matrix, MetricsReport,
};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{
    manifest, to_train_config, ConfigError, DataSource, ExperimentConfig, InitMode, InputLift,
};
use crate::plot::{image_side, write_pgm_strip, write_scatter_svg};

/// Command failures, partitioned by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments: exit 2.
    Config(String),
    /// Numeric failure inside the core: exit 3.
    Numeric(InvMlError),
    /// Filesystem trouble: exit 4.
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numeric(e) => write!(f, "numeric error: {e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<InvMlError> for CliError {
    fn from(e: InvMlError) -> Self {
        match e {
            InvMlError::Io(io) => CliError::Io(io),
            InvMlError::InvalidArgument(msg) => CliError::Config(msg),
            other => CliError::Numeric(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CmdResult<T> = Result<T, CliError>;

fn ensure_out(out: &Path) -> CmdResult<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn write_manifest(out: &Path, config: &ExperimentConfig, command: &str) -> CmdResult<()> {
    let comment = format!("invml {command} manifest; feed back with --config to reproduce");
    fs::write(out.join("manifest.txt"), manifest(config, &comment))?;
    Ok(())
}

/// Materializes the configured data source.
pub fn load_dataset(config: &ExperimentConfig) -> CmdResult<Dataset> {
    let ds = match &config.source {
        DataSource::Generated { name, n } => match name.as_str() {
            "swissroll" => gen_swiss_roll(*n, config.data_seed)?,
            "spheres" => gen_spheres(*n, config.input_dim, config.data_seed, false)?,
            // The half-sphere family lives on low-dimensional spheres
            // embedded in the full ambient space.
            "halfspheres" => {
                gen_low_dim_spheres(*n, config.target_dim, config.input_dim, config.data_seed)?
            }
            other => return Err(CliError::Config(format!("unknown generator `{other}`"))),
        },
        DataSource::Csv { path, has_labels } => load_csv(path, *has_labels)?,
        DataSource::Idx { images, labels, downsample_to, n } => {
            let ds = load_idx(images, labels.as_deref(), IdxOptions { downsample_to: *downsample_to })?;
            if *n < ds.len() {
                let indices: Vec<usize> = (0..*n).collect();
                ds.subset(&indices, "head")
            } else {
                ds
            }
        }
    };
    if ds.dim() != config.input_dim {
        return Err(CliError::Config(format!(
            "dataset dimension {} does not match model.input_dim {}",
            ds.dim(),
            config.input_dim
        )));
    }
    Ok(ds)
}

/// 2-D view for plotting: the first two columns, or a PCA projection when
/// there are more than two.
fn planar_view(z: &Matrix) -> Matrix {
    if z.cols() <= 2 {
        z.clone()
    } else {
        pca_project(z, 2)
    }
}

pub fn cmd_generate(config: &ExperimentConfig, out: &Path) -> CmdResult<()> {
    if !matches!(config.source, DataSource::Generated { .. }) {
        return Err(CliError::Config(
            "generate only works with a synthetic generator source".into(),
        ));
    }
    ensure_out(out)?;
    let ds = load_dataset(config)?;
    save_csv(&out.join("data.csv"), &ds)?;
    if ds.dim() >= 2 {
        write_scatter_svg(&out.join("preview.svg"), &planar_view(&ds.x), ds.labels.as_deref())?;
    }
    write_manifest(out, config, "generate")?;
    println!("generated {} samples of dimension {} -> {}", ds.len(), ds.dim(), out.display());
    Ok(())
}

pub fn cmd_train(config: &ExperimentConfig, out: &Path) -> CmdResult<()> {
    ensure_out(out)?;
    let ds = load_dataset(config)?;
    let mut enc = InvMLEncoder::new(
        config.input_dim,
        config.target_dim,
        config.layer_count,
        ActivationSpec { alpha: config.activation_alpha },
        config.seed,
    )?;
    if config.init == InitMode::Identity {
        enc.reset_identity();
    }
    enc.set_input_offset(resolve_input_lift(config, &ds.x))?;
    let train_config = to_train_config(config);
    let history = train(&mut enc, &ds, &train_config)?;
    fs::write(out.join("history.csv"), history.csv())?;
    let adam = AdamState::for_encoder(&enc, config.lr);
    let ckpt = Checkpoint {
        version: invml_core::checkpoint::FORMAT_VERSION,
        encoder: enc,
        adam,
        epoch: config.schedule.epochs_total as u64,
        config: train_config,
    };
    save_checkpoint(&out.join("model.ckpt"), &ckpt)?;
    write_manifest(out, config, "train")?;
    if let Some(last) = history.last() {
        println!(
            "trained {} epochs on {} samples; final loss {:.6e} -> {}",
            config.schedule.epochs_total,
            ds.len(),
            last.losses.total,
            out.display()
        );
    }
    Ok(())
}

/// Per-coordinate constant offset applied ahead of the first layer. `Auto`
/// shifts each coordinate so the data sits in the positive orthant with a
/// margin of half the largest coordinate range.
pub fn resolve_input_lift(config: &ExperimentConfig, x: &Matrix) -> Vec<f64> {
    let m = x.cols();
    match config.input_lift {
        InputLift::None => vec![0.0; m],
        InputLift::Value(v) => vec![v; m],
        InputLift::Auto => {
            let mins: Vec<f64> = (0..m)
                .map(|j| (0..x.rows()).map(|i| x.get(i, j)).fold(f64::INFINITY, f64::min))
                .collect();
            let range = (0..m)
                .map(|j| {
                    (0..x.rows()).map(|i| x.get(i, j)).fold(f64::NEG_INFINITY, f64::max) - mins[j]
                })
                .fold(0.0, f64::max);
            let margin = 0.5 * range.max(1.0);
            mins.iter().map(|&lo| margin - lo).collect()
        }
    }
}

fn resolve_checkpoint(out: &Path, explicit: Option<&Path>) -> PathBuf {
    explicit.map(Path::to_path_buf).unwrap_or_else(|| out.join("model.ckpt"))
}

/// Full metric row for one representation space.
fn report_for_space(
    config: &ExperimentConfig,
    x: &Matrix,
    z: &Matrix,
    x_hat: &Matrix,
    roundtrip_errors: &[f64],
    graph: &NeighborGraph,
    labels: Option<&[usize]>,
) -> CmdResult<MetricsReport> {
    let (k_min, k_max) = metrics::bi_lipschitz(x, z, graph)?;
    let (acc_logistic, acc_knn) = match labels {
        Some(l) => (
            metrics::acc_logistic_10fold(z, l, config.seed)?,
            metrics::acc_knn(z, l, config.knn_k, config.seed)?,
        ),
        None => (f64::NAN, f64::NAN),
    };
    Ok(MetricsReport {
        rmse: metrics::rmse(x, x_hat)?,
        mne: metrics::mne(roundtrip_errors),
        trust: metrics::trustworthiness(x, z, config.metrics_k1, config.metrics_k2)?,
        cont: metrics::continuity(x, z, config.metrics_k1, config.metrics_k2)?,
        k_min,
        k_max,
        l_mse: metrics::latent_mse(x, z, config.seed)?,
        acc_logistic,
        acc_knn,
        rank_sparsity: svd_rank(z, config.rank_tol).rank,
    })
}

/// Shared evaluation: metric rows for the compressed embedding and for the
/// final full-dimensional representation.
pub fn evaluate_encoder(
    config: &ExperimentConfig,
    enc: &InvMLEncoder,
    ds: &Dataset,
) -> CmdResult<(MetricsReport, MetricsReport)> {
    let trace = enc.forward(&ds.x)?;
    let z_last = trace.z_last();
    let graph = knn_graph(&ds.x, config.k)?;
    let roundtrip = enc.layer_roundtrip_errors(&ds.x)?;
    let labels = ds.labels.as_deref();

    let body_hat = enc.inverse_body(z_last)?;
    let body_report =
        report_for_space(config, &ds.x, z_last, &body_hat, &roundtrip, &graph, labels)?;

    let head_inv = enc.invert_head_least_squares(&trace.embedding)?;
    let embed_hat = enc.inverse_body(&head_inv)?;
    let embed_report = report_for_space(
        config,
        &ds.x,
        &trace.embedding,
        &embed_hat,
        &roundtrip,
        &graph,
        labels,
    )?;
    Ok((embed_report, body_report))
}

pub fn cmd_evaluate(
    config: &ExperimentConfig,
    out: &Path,
    checkpoint: Option<&Path>,
) -> CmdResult<()> {
    ensure_out(out)?;
    let ckpt = load_checkpoint(&resolve_checkpoint(out, checkpoint))?;
    let ds = load_dataset(config)?;
    let (embed_report, body_report) = evaluate_encoder(config, &ckpt.encoder, &ds)?;

    let mut csv = format!("space,{}\n", MetricsReport::CSV_HEADER);
    csv.push_str(&format!("embedding,{}\n", embed_report.csv_row()));
    csv.push_str(&format!("body,{}\n", body_report.csv_row()));
    fs::write(out.join("metrics.csv"), csv)?;

    let trace = ckpt.encoder.forward(&ds.x)?;
    write_scatter_svg(
        &out.join("embedding.svg"),
        &planar_view(&trace.embedding),
        ds.labels.as_deref(),
    )?;
    write_manifest(out, config, "evaluate")?;
    println!(
        "embedding: rmse {:.3e}, trust {:.4}, cont {:.4}, rank {}",
        embed_report.rmse, embed_report.trust, embed_report.cont, embed_report.rank_sparsity
    );
    println!(
        "body:      rmse {:.3e}, k_min {:.4}, k_max {:.4}, mne {:.3e}",
        body_report.rmse, body_report.k_min, body_report.k_max, body_report.mne
    );
    Ok(())
}

/// Seeded search for a mutually distant pair; `None` when the dataset is
/// too clustered to contain one within the attempt budget.
fn find_distant_pair(x: &Matrix, seed: u64) -> Option<(usize, usize)> {
    let n = x.rows();
    if n < 2 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd157_a217);
    for _ in 0..2000 {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j && is_distant_pair(x, i, j) {
            return Some((i, j));
        }
    }
    None
}

pub fn cmd_interpolate(
    config: &ExperimentConfig,
    out: &Path,
    checkpoint: Option<&Path>,
    segments: usize,
) -> CmdResult<()> {
    ensure_out(out)?;
    let ckpt = load_checkpoint(&resolve_checkpoint(out, checkpoint))?;
    let enc = &ckpt.encoder;
    let ds = load_dataset(config)?;
    let graph = knn_graph(&ds.x, config.k)?;

    let curve = interpolation_mse_curve(enc, &ds.x, &graph, config.k, DEFAULT_T_STEPS, config.seed)?;
    let mut csv = String::from("k,mse\n");
    for (k, mse) in curve.iter().enumerate() {
        csv.push_str(&format!("{},{:.17e}\n", k + 1, mse));
    }
    fs::write(out.join("interp_curve.csv"), csv)?;

    // One concrete neighbor interpolation, rendered when the data is
    // image-shaped.
    let results = knn_interpolate(enc, &ds.x, &graph, config.k, 1, DEFAULT_T_STEPS, config.seed)?;
    if let (Some(side), Some(first)) = (image_side(ds.dim()), results.first()) {
        write_pgm_strip(&out.join("interp_recon.pgm"), &first.latent_recons, side)?;
        write_pgm_strip(&out.join("interp_linear.pgm"), &first.input_interps, side)?;
    }

    match find_distant_pair(&ds.x, config.seed) {
        Some(pair) => {
            let geo = geodesic_interpolate(enc, &ds.x, &graph, pair, segments, DEFAULT_T_STEPS)?;
            let mut csv = String::from("t,mse\n");
            for (t, mse) in geo.t_grid.iter().zip(&geo.mse_per_t) {
                csv.push_str(&format!("{t:.17e},{mse:.17e}\n"));
            }
            fs::write(out.join("geodesic.csv"), csv)?;
            if let Some(side) = image_side(ds.dim()) {
                write_pgm_strip(&out.join("geodesic_recon.pgm"), &geo.latent_recons, side)?;
            }
            println!(
                "geodesic between samples {} and {}: mean mse {:.6e}",
                pair.0,
                pair.1,
                geo.mse_per_t.iter().sum::<f64>() / geo.mse_per_t.len() as f64
            );
        }
        None => log::warn!("no mutually distant pair found; skipping geodesic interpolation"),
    }

    write_manifest(out, config, "interpolate")?;
    println!(
        "interpolation mse: k=1 {:.6e}, k={} {:.6e}",
        curve[0],
        curve.len(),
        curve[curve.len() - 1]
    );
    Ok(())
}

/// Named loss-term combinations for the ablation sweep, from nothing to
/// the full objective.
pub const ABLATION_COMBOS: &[(&str, LossFlags)] = &[
    ("none", LossFlags { use_orth: false, use_pad: false, use_extra: false }),
    ("ex", LossFlags { use_orth: false, use_pad: false, use_extra: true }),
    ("orth", LossFlags { use_orth: true, use_pad: false, use_extra: false }),
    ("ex+orth", LossFlags { use_orth: true, use_pad: false, use_extra: true }),
    ("ex+orth+pad", LossFlags { use_orth: true, use_pad: true, use_extra: true }),
];

pub fn cmd_ablate(config: &ExperimentConfig, out: &Path) -> CmdResult<()> {
    ensure_out(out)?;
    let ds = load_dataset(config)?;
    let mut csv = format!("combo,{}\n", MetricsReport::CSV_HEADER);
    for (name, flags) in ABLATION_COMBOS {
        let mut variant = config.clone();
        variant.flags = *flags;
        let mut enc = InvMLEncoder::new(
            variant.input_dim,
            variant.target_dim,
            variant.layer_count,
            ActivationSpec { alpha: variant.activation_alpha },
            variant.seed,
        )?;
        if variant.init == InitMode::Identity {
            enc.reset_identity();
        }
        enc.set_input_offset(resolve_input_lift(&variant, &ds.x))?;
        train(&mut enc, &ds, &to_train_config(&variant))?;
        let (_, body_report) = evaluate_encoder(&variant, &enc, &ds)?;
        csv.push_str(&format!("{},{}\n", name, body_report.csv_row()));
        println!(
            "{name}: rank {} rmse {:.3e} trust {:.4}",
            body_report.rank_sparsity, body_report.rmse, body_report.trust
        );
    }
    fs::write(out.join("ablation.csv"), csv)?;
    write_manifest(out, config, "ablate")?;
    Ok(())
}

pub fn cmd_reconstruct(
    config: &ExperimentConfig,
    out: &Path,
    checkpoint: Option<&Path>,
    method: &str,
    sparsity: usize,
) -> CmdResult<()> {
    ensure_out(out)?;
    let ckpt = load_checkpoint(&resolve_checkpoint(out, checkpoint))?;
    let enc = &ckpt.encoder;
    let ds = load_dataset(config)?;
    let trace = enc.forward(&ds.x)?;

    let head_inv = match method {
        "ls" => enc.invert_head_least_squares(&trace.embedding)?,
        "sparse" => {
            if sparsity == 0 {
                return Err(CliError::Config("--sparsity must be positive for sparse recovery".into()));
            }
            enc.invert_head_sparse(&trace.embedding, sparsity)?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown reconstruction method `{other}` (expected ls or sparse)"
            )))
        }
    };
    let x_hat = enc.inverse_body(&head_inv)?;
    let report_rmse = metrics::rmse(&ds.x, &x_hat)?;

    let recon = Dataset::new(x_hat.clone(), ds.labels.clone(), format!("{}-recon", ds.name))?;
    save_csv(&out.join("recon.csv"), &recon)?;
    if let Some(side) = image_side(ds.dim()) {
        let n_show = ds.len().min(16);
        let indices: Vec<usize> = (0..n_show).collect();
        write_pgm_strip(&out.join("recon_original.pgm"), &ds.x.select_rows(&indices), side)?;
        write_pgm_strip(&out.join("recon_restored.pgm"), &x_hat.select_rows(&indices), side)?;
    }
    write_manifest(out, config, "reconstruct")?;
    println!("reconstruction rmse ({method}): {report_rmse:.6e}");
    Ok(())
}
