//! Experiment configuration: a flat sectioned key/value file, per-dataset
//! profiles, command-line overrides, and the run manifest (which is itself
//! a valid config file).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use invml_core::schedule::ScheduleConfig;
use invml_core::trainer::{BatchMode, TrainConfig};
use invml_core::LossFlags;

/// Where the samples come from.
#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    /// Built-in synthetic generator: `swissroll`, `spheres`, `halfspheres`.
    Generated { name: String, n: usize },
    Csv { path: PathBuf, has_labels: bool },
    Idx { images: PathBuf, labels: Option<PathBuf>, downsample_to: Option<usize>, n: usize },
}

/// Constant offset added to the inputs before the first layer (and removed
/// by the exact inverse). Bias-free layers are positively homogeneous, so
/// without the lift every kink plane passes through the origin; shifting the
/// data into the positive orthant restores affine expressivity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InputLift {
    None,
    /// Per-coordinate shift placing the data in the positive orthant with a
    /// margin of half the largest coordinate range.
    Auto,
    /// Fixed scalar added to every coordinate.
    Value(f64),
}

/// Initial weights: random near-orthogonal, or exact identity (body starts
/// as an isometry on positive-orthant inputs).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitMode {
    Orthogonal,
    Identity,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub profile: Option<String>,
    pub source: DataSource,
    pub data_seed: u64,
    pub input_dim: usize,
    pub target_dim: usize,
    pub layer_count: usize,
    pub activation_alpha: f64,
    pub init: InitMode,
    pub input_lift: InputLift,
    pub schedule: ScheduleConfig,
    pub flags: LossFlags,
    pub k: usize,
    pub lr: f64,
    pub seed: u64,
    pub grad_clip: f64,
    pub log_interval: usize,
    pub block_size: usize,
    pub metrics_k1: usize,
    pub metrics_k2: usize,
    pub knn_k: usize,
    pub rank_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            profile: None,
            source: DataSource::Generated { name: "swissroll".into(), n: 800 },
            data_seed: 0,
            input_dim: 3,
            target_dim: 2,
            layer_count: 8,
            activation_alpha: 0.1,
            init: InitMode::Identity,
            input_lift: InputLift::Auto,
            schedule: ScheduleConfig::default(),
            flags: LossFlags::default(),
            k: 10,
            lr: 1e-3,
            seed: 0,
            grad_clip: 1e3,
            log_interval: 100,
            block_size: 0,
            metrics_k1: 5,
            metrics_k2: 10,
            knn_k: 5,
            rank_tol: 1e-3,
        }
    }
}

/// Errors carrying the field that caused them; always exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}
impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

pub const PROFILES: &[&str] = &[
    "swissroll",
    "spheres",
    "halfspheres",
    "usps",
    "mnist256",
    "mnist784",
    "kmnist",
    "fmnist",
    "coil20",
];

/// Fills dataset dimensions, model shape, and sample counts for a named
/// dataset profile. Image profiles still need file paths from the config.
pub fn apply_profile(config: &mut ExperimentConfig, profile: &str) -> Result<()> {
    let (n, m, s_prime, layers): (usize, usize, usize, usize) = match profile {
        "swissroll" => (800, 3, 2, 8),
        "spheres" => (5500, 101, 10, 8),
        "halfspheres" => (5500, 101, 10, 8),
        "usps" => (4649, 256, 10, 8),
        "mnist256" => (8000, 256, 10, 8),
        "mnist784" => (20000, 784, 10, 8),
        "kmnist" => (20000, 784, 10, 8),
        "fmnist" => (20000, 784, 10, 8),
        "coil20" => (1440, 4096, 20, 6),
        other => {
            return Err(ConfigError(format!(
                "unknown profile `{other}` (expected one of {PROFILES:?})"
            )))
        }
    };
    config.profile = Some(profile.to_string());
    config.input_dim = m;
    config.target_dim = s_prime;
    config.layer_count = layers;
    match profile {
        "swissroll" | "spheres" | "halfspheres" => {
            config.source = DataSource::Generated { name: profile.to_string(), n };
        }
        _ => {
            // Image profiles: keep any configured paths, update counts.
            match &mut config.source {
                DataSource::Idx { n: slot, downsample_to, .. } => {
                    *slot = n;
                    if profile == "mnist256" {
                        *downsample_to = Some(16);
                    }
                }
                DataSource::Csv { .. } => {}
                DataSource::Generated { .. } => {
                    config.source = DataSource::Idx {
                        images: PathBuf::new(),
                        labels: None,
                        downsample_to: if profile == "mnist256" { Some(16) } else { None },
                        n,
                    };
                }
            }
        }
    }
    Ok(())
}

/// Shrinks the epoch budget and sample count 5x for smoke runs.
pub fn apply_quick(config: &mut ExperimentConfig) {
    config.schedule.epochs_total = (config.schedule.epochs_total / 5).max(1);
    match &mut config.source {
        DataSource::Generated { n, .. } | DataSource::Idx { n, .. } => {
            *n = (*n / 5).max(10);
        }
        DataSource::Csv { .. } => {}
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| ConfigError(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

/// Parses the sectioned key/value format. Later keys override earlier
/// ones, so profiles named in the file apply before explicit keys.
pub fn parse_config(text: &str, base: ExperimentConfig) -> Result<ExperimentConfig> {
    let mut config = base;
    let mut section = String::new();
    let mut idx_images: Option<PathBuf> = None;
    let mut idx_labels: Option<PathBuf> = None;
    let mut idx_downsample: Option<usize> = None;
    let mut csv_path: Option<PathBuf> = None;
    let mut csv_has_labels = true;
    let mut gen_name: Option<String> = None;
    let mut n_samples: Option<usize> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        match (section.as_str(), key) {
            ("dataset", "profile") => apply_profile(&mut config, value)?,
            ("dataset", "generator") => gen_name = Some(value.to_string()),
            ("dataset", "n") => n_samples = Some(parse_num(key, value)?),
            ("dataset", "seed") => config.data_seed = parse_num(key, value)?,
            ("dataset", "csv") => csv_path = Some(PathBuf::from(value)),
            ("dataset", "has_labels") => csv_has_labels = parse_bool(key, value)?,
            ("dataset", "images") => idx_images = Some(PathBuf::from(value)),
            ("dataset", "labels") => idx_labels = Some(PathBuf::from(value)),
            ("dataset", "downsample_to") => idx_downsample = Some(parse_num(key, value)?),
            ("model", "input_dim") => config.input_dim = parse_num(key, value)?,
            ("model", "target_dim") => config.target_dim = parse_num(key, value)?,
            ("model", "layers") => config.layer_count = parse_num(key, value)?,
            ("model", "activation_alpha") => config.activation_alpha = parse_num(key, value)?,
            ("model", "init") => {
                config.init = match value {
                    "identity" => InitMode::Identity,
                    "orthogonal" => InitMode::Orthogonal,
                    other => {
                        return Err(ConfigError(format!(
                            "model.init must be `identity` or `orthogonal`, got `{other}`"
                        )))
                    }
                }
            }
            ("model", "input_lift") => {
                config.input_lift = match value {
                    "none" => InputLift::None,
                    "auto" => InputLift::Auto,
                    other => InputLift::Value(parse_num(key, other)?),
                }
            }
            ("schedule", "alpha0") => config.schedule.alpha0 = parse_num(key, value)?,
            ("schedule", "beta_min") => config.schedule.beta_min = parse_num(key, value)?,
            ("schedule", "beta_max") => config.schedule.beta_max = parse_num(key, value)?,
            ("schedule", "gamma0") => config.schedule.gamma0 = parse_num(key, value)?,
            ("schedule", "mu_min") => config.schedule.mu_min = parse_num(key, value)?,
            ("schedule", "mu_max") => config.schedule.mu_max = parse_num(key, value)?,
            ("schedule", "push_radius") => {
                config.schedule.push_radius =
                    if value == "auto" { None } else { Some(parse_num(key, value)?) };
            }
            ("schedule", "lis_squared") => config.schedule.lis_squared = parse_bool(key, value)?,
            ("schedule", "push_literal") => config.schedule.push_literal = parse_bool(key, value)?,
            ("schedule", "push_subsample") => {
                config.schedule.push_subsample =
                    if value == "none" { None } else { Some(parse_num(key, value)?) };
            }
            ("schedule", "use_orth") => config.flags.use_orth = parse_bool(key, value)?,
            ("schedule", "use_pad") => config.flags.use_pad = parse_bool(key, value)?,
            ("schedule", "use_extra") => config.flags.use_extra = parse_bool(key, value)?,
            ("trainer", "epochs") => config.schedule.epochs_total = parse_num(key, value)?,
            ("trainer", "k") => config.k = parse_num(key, value)?,
            ("trainer", "lr") => config.lr = parse_num(key, value)?,
            ("trainer", "seed") => config.seed = parse_num(key, value)?,
            ("trainer", "grad_clip") => config.grad_clip = parse_num(key, value)?,
            ("trainer", "log_interval") => config.log_interval = parse_num(key, value)?,
            ("trainer", "block_size") => config.block_size = parse_num(key, value)?,
            ("metrics", "k1") => config.metrics_k1 = parse_num(key, value)?,
            ("metrics", "k2") => config.metrics_k2 = parse_num(key, value)?,
            ("metrics", "knn_k") => config.knn_k = parse_num(key, value)?,
            ("metrics", "rank_tol") => config.rank_tol = parse_num(key, value)?,
            _ => {
                return Err(ConfigError(format!(
                    "line {}: unknown key `{key}` in section `[{section}]`",
                    lineno + 1
                )))
            }
        }
    }

    // Resolve the dataset source from whatever keys appeared.
    if let Some(path) = csv_path {
        config.source = DataSource::Csv { path, has_labels: csv_has_labels };
    } else if let Some(images) = idx_images {
        let n = n_samples.or(match &config.source {
            DataSource::Idx { n, .. } => Some(*n),
            _ => None,
        });
        config.source = DataSource::Idx {
            images,
            labels: idx_labels,
            downsample_to: idx_downsample.or(match &config.source {
                DataSource::Idx { downsample_to, .. } => *downsample_to,
                _ => None,
            }),
            n: n.unwrap_or(usize::MAX),
        };
    } else if let Some(name) = gen_name {
        let n = n_samples.unwrap_or(match &config.source {
            DataSource::Generated { n, .. } => *n,
            _ => 800,
        });
        config.source = DataSource::Generated { name, n };
    } else if let Some(n) = n_samples {
        match &mut config.source {
            DataSource::Generated { n: slot, .. } | DataSource::Idx { n: slot, .. } => *slot = n,
            DataSource::Csv { .. } => {}
        }
    }

    Ok(config)
}

pub fn load_config(path: &Path, base: ExperimentConfig) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, base)
}

/// Consistency checks before any compute starts.
pub fn validate(config: &ExperimentConfig) -> Result<()> {
    if config.target_dim > config.input_dim {
        return Err(ConfigError(format!(
            "model.target_dim ({}) exceeds model.input_dim ({})",
            config.target_dim, config.input_dim
        )));
    }
    if config.layer_count < 3 {
        return Err(ConfigError("model.layers must be at least 3".into()));
    }
    if config.k < 1 {
        return Err(ConfigError("trainer.k must be at least 1".into()));
    }
    if !(config.activation_alpha > 0.0 && config.activation_alpha < 1.0) {
        return Err(ConfigError("model.activation_alpha must lie in (0, 1)".into()));
    }
    if config.metrics_k1 < 2 || config.metrics_k2 < config.metrics_k1 {
        return Err(ConfigError("metrics.k1/k2 must satisfy 2 <= k1 <= k2".into()));
    }
    match &config.source {
        DataSource::Generated { name, n } => {
            if !matches!(name.as_str(), "swissroll" | "spheres" | "halfspheres") {
                return Err(ConfigError(format!("unknown generator `{name}`")));
            }
            if *n < 10 {
                return Err(ConfigError("dataset.n must be at least 10".into()));
            }
        }
        DataSource::Csv { path, .. } => {
            if !path.exists() {
                return Err(ConfigError(format!("dataset.csv `{}` does not exist", path.display())));
            }
        }
        DataSource::Idx { images, labels, .. } => {
            if images.as_os_str().is_empty() || !images.exists() {
                return Err(ConfigError(format!(
                    "dataset.images `{}` does not exist (image profiles need file paths)",
                    images.display()
                )));
            }
            if let Some(l) = labels {
                if !l.exists() {
                    return Err(ConfigError(format!("dataset.labels `{}` does not exist", l.display())));
                }
            }
        }
    }
    Ok(())
}

/// The core trainer configuration derived from the experiment config.
pub fn to_train_config(config: &ExperimentConfig) -> TrainConfig {
    TrainConfig {
        k: config.k,
        layer_count: config.layer_count,
        target_dim: config.target_dim,
        seed: config.seed,
        schedule: config.schedule.clone(),
        flags: config.flags,
        lr: config.lr,
        grad_clip: config.grad_clip,
        batch: if config.block_size == 0 {
            BatchMode::Full
        } else {
            BatchMode::NeighborhoodBlock { block_size: config.block_size }
        },
        log_interval: config.log_interval,
    }
}

/// Serializes the resolved config back into the config format; re-feeding
/// the manifest reproduces the run.
pub fn manifest(config: &ExperimentConfig, comment: &str) -> String {
    let mut out = String::new();
    for line in comment.lines() {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "[dataset]");
    match &config.source {
        DataSource::Generated { name, n } => {
            let _ = writeln!(out, "generator = {name}");
            let _ = writeln!(out, "n = {n}");
        }
        DataSource::Csv { path, has_labels } => {
            let _ = writeln!(out, "csv = {}", path.display());
            let _ = writeln!(out, "has_labels = {has_labels}");
        }
        DataSource::Idx { images, labels, downsample_to, n } => {
            let _ = writeln!(out, "images = {}", images.display());
            if let Some(l) = labels {
                let _ = writeln!(out, "labels = {}", l.display());
            }
            if let Some(d) = downsample_to {
                let _ = writeln!(out, "downsample_to = {d}");
            }
            if *n != usize::MAX {
                let _ = writeln!(out, "n = {n}");
            }
        }
    }
    let _ = writeln!(out, "seed = {}", config.data_seed);
    let _ = writeln!(out, "\n[model]");
    let _ = writeln!(out, "input_dim = {}", config.input_dim);
    let _ = writeln!(out, "target_dim = {}", config.target_dim);
    let _ = writeln!(out, "layers = {}", config.layer_count);
    let _ = writeln!(out, "activation_alpha = {}", config.activation_alpha);
    let _ = writeln!(
        out,
        "init = {}",
        match config.init {
            InitMode::Identity => "identity",
            InitMode::Orthogonal => "orthogonal",
        }
    );
    let _ = writeln!(
        out,
        "input_lift = {}",
        match config.input_lift {
            InputLift::None => "none".to_string(),
            InputLift::Auto => "auto".to_string(),
            InputLift::Value(v) => v.to_string(),
        }
    );
    let s = &config.schedule;
    let _ = writeln!(out, "\n[schedule]");
    let _ = writeln!(out, "alpha0 = {}", s.alpha0);
    let _ = writeln!(out, "beta_min = {}", s.beta_min);
    let _ = writeln!(out, "beta_max = {}", s.beta_max);
    let _ = writeln!(out, "gamma0 = {}", s.gamma0);
    let _ = writeln!(out, "mu_min = {}", s.mu_min);
    let _ = writeln!(out, "mu_max = {}", s.mu_max);
    let _ = writeln!(
        out,
        "push_radius = {}",
        s.push_radius.map_or("auto".to_string(), |v| v.to_string())
    );
    let _ = writeln!(out, "lis_squared = {}", s.lis_squared);
    let _ = writeln!(out, "push_literal = {}", s.push_literal);
    let _ = writeln!(
        out,
        "push_subsample = {}",
        s.push_subsample.map_or("none".to_string(), |v| v.to_string())
    );
    let _ = writeln!(out, "use_orth = {}", config.flags.use_orth);
    let _ = writeln!(out, "use_pad = {}", config.flags.use_pad);
    let _ = writeln!(out, "use_extra = {}", config.flags.use_extra);
    let _ = writeln!(out, "\n[trainer]");
    let _ = writeln!(out, "epochs = {}", s.epochs_total);
    let _ = writeln!(out, "k = {}", config.k);
    let _ = writeln!(out, "lr = {}", config.lr);
    let _ = writeln!(out, "seed = {}", config.seed);
    let _ = writeln!(out, "grad_clip = {}", config.grad_clip);
    let _ = writeln!(out, "log_interval = {}", config.log_interval);
    let _ = writeln!(out, "block_size = {}", config.block_size);
    let _ = writeln!(out, "\n[metrics]");
    let _ = writeln!(out, "k1 = {}", config.metrics_k1);
    let _ = writeln!(out, "k2 = {}", config.metrics_k2);
    let _ = writeln!(out, "knn_k = {}", config.knn_k);
    let _ = writeln!(out, "rank_tol = {}", config.rank_tol);
    out
}
