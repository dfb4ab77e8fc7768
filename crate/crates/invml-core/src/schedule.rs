//! Epoch- and layer-indexed loss-weight schedules and per-layer target
//! dimensions.
//!
//! Breakpoints are expressed as fractions of the total epoch budget so a
//! shortened run keeps the same phase structure: the orthogonality weight
//! ramps in over [0.05 T, 0.2 T], and the extra-head weight decays linearly
//! over [0.2 T, 0.8 T].

/// Tunable schedule parameters.
#[derive(Clone, Debug)]
pub struct ScheduleConfig {
    /// Final orthogonality weight after the ramp.
    pub alpha0: f64,
    /// Padding weight bounds; interpolated linearly across layers.
    pub beta_min: f64,
    pub beta_max: f64,
    /// Initial extra-head weight before the decay.
    pub gamma0: f64,
    /// Push-away weight bounds; decreasing across layers.
    pub mu_min: f64,
    pub mu_max: f64,
    /// Push-away radius; `None` selects 3x the mean input-space kNN distance.
    pub push_radius: Option<f64>,
    /// Squared LIS discrepancy instead of absolute value.
    pub lis_squared: bool,
    /// Sum the push-away term over the neighbor set itself (formula-literal
    /// mode) instead of over non-neighbors.
    pub push_literal: bool,
    /// Cap on non-neighbor push candidates sampled per point; `None` keeps
    /// the exact O(n^2) pair set.
    pub push_subsample: Option<usize>,
    pub epochs_total: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            alpha0: 1.0,
            beta_min: 0.01,
            beta_max: 0.1,
            gamma0: 1.0,
            mu_min: 0.1,
            mu_max: 1.0,
            push_radius: None,
            lis_squared: false,
            push_literal: false,
            push_subsample: None,
            epochs_total: 10_000,
        }
    }
}

/// Resolved weights for one epoch. Per-layer vectors cover the padded
/// layers `l = 2..=L-1` in order.
#[derive(Clone, Debug)]
pub struct ScheduleSnapshot {
    pub epoch: usize,
    pub alpha: f64,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub mu: Vec<f64>,
    /// Push weight applied to the embedding-level loss.
    pub mu_head: f64,
    /// Target dimension per padded layer.
    pub s_l: Vec<usize>,
    pub push_radius: f64,
}

/// Exponentially decaying per-layer target dimensions:
/// `s_l = round(m * (s'/m)^{(l-1)/(L-2)})` for `l = 2..=L-1`.
pub fn target_dims(m: usize, s_prime: usize, layer_count: usize) -> Vec<usize> {
    assert!(layer_count >= 3, "need at least 3 layers");
    assert!(s_prime <= m);
    let exp_base = s_prime as f64 / m as f64;
    (2..layer_count)
        .map(|l| {
            let frac = (l - 1) as f64 / (layer_count - 2) as f64;
            (m as f64 * exp_base.powf(frac)).round().max(1.0) as usize
        })
        .collect()
}

/// Evaluates every schedule at `epoch`. `push_radius_resolved` is the
/// concrete radius (the data-dependent default already applied).
pub fn eval_schedules(
    epoch: usize,
    config: &ScheduleConfig,
    m: usize,
    s_prime: usize,
    layer_count: usize,
    push_radius_resolved: f64,
) -> ScheduleSnapshot {
    assert!(epoch <= config.epochs_total);
    let t = config.epochs_total as f64;
    let frac = if t > 0.0 { epoch as f64 / t } else { 1.0 };

    let alpha = if frac < 0.05 {
        0.0
    } else if frac < 0.2 {
        config.alpha0 * (frac - 0.05) / 0.15
    } else {
        config.alpha0
    };
    let gamma = if frac < 0.2 {
        config.gamma0
    } else if frac < 0.8 {
        config.gamma0 * (0.8 - frac) / 0.6
    } else {
        0.0
    };

    let n_padded = layer_count - 2;
    let interp = |lo: f64, hi: f64, idx: usize| {
        if n_padded <= 1 {
            hi
        } else {
            lo + (hi - lo) * idx as f64 / (n_padded - 1) as f64
        }
    };
    let beta: Vec<f64> = (0..n_padded).map(|i| interp(config.beta_min, config.beta_max, i)).collect();
    let mu: Vec<f64> = (0..n_padded).map(|i| interp(config.mu_max, config.mu_min, i)).collect();

    ScheduleSnapshot {
        epoch,
        alpha,
        beta,
        gamma: vec![gamma; n_padded],
        mu,
        mu_head: config.mu_min,
        s_l: target_dims(m, s_prime, layer_count),
        push_radius: push_radius_resolved,
    }
}
