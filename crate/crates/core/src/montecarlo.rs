//! Simulated repetitions and local maximum-likelihood inversion.
//!
//! Each replica draws `ν` detections at the true displacement, then
//! inverts the fringe model on a quarter-fringe window around `β = 0`.
//! Replica `i` uses stream `i` of a ChaCha8 generator keyed by the master
//! seed, so replicas never share randomness and the outcome does not depend
//! on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::fisher::fi_with_imperfections;
use crate::protocol::{
    apply_detection_error, fringe_phase, fringe_phase_slope, pg_analytic, shifted_effective_times,
    ImperfectionModel, ProtocolParams,
};

/// Largest accepted distance (rad) of the reference phase from mid-fringe.
pub const MID_FRINGE_TOLERANCE: f64 = 0.2;

const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub params: ProtocolParams,
    pub imperfections: ImperfectionModel,
    pub beta_true: f64,
    /// Repetitions per estimate.
    pub nu: u64,
    pub replicas: usize,
    pub seed: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            params: ProtocolParams::default(),
            imperfections: ImperfectionModel::ideal(),
            beta_true: 0.0,
            nu: 10_000,
            replicas: 400,
            seed: 1,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nu == 0 {
            return Err(invalid("nu must be at least 1"));
        }
        if self.replicas == 0 {
            return Err(invalid("replicas must be at least 1"));
        }
        self.params.validate()?;
        self.imperfections.validate()
    }
}

/// Generator for replica `stream` under `seed`.
pub fn replica_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Number of `|g>` detections among `nu` independent shots.
pub fn sample_outcomes(p: f64, nu: u64, rng: &mut ChaCha8Rng) -> Result<u64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("detection probability {p} outside [0, 1]")));
    }
    let dist = Binomial::new(nu, p).map_err(|e| invalid(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// `P_g(β)` including spread averaging and the detection channel, with
/// the spread nodes resolved once.
#[derive(Debug, Clone)]
pub struct FringeModel {
    nodes: Vec<(f64, ProtocolParams)>,
    detection_error: f64,
    half_width: f64,
}

impl FringeModel {
    /// Fails with [`Error::OperatingPoint`] unless `β = 0` sits within
    /// [`MID_FRINGE_TOLERANCE`] of a mid-fringe point.
    pub fn new(params: &ProtocolParams, model: &ImperfectionModel) -> Result<Self> {
        params.validate()?;
        model.validate()?;
        let reference = params.with_beta(0.0);
        let gamma = fringe_phase(&reference);
        let off = (gamma - FRAC_PI_2).rem_euclid(std::f64::consts::PI);
        let off = off.min(std::f64::consts::PI - off);
        if off > MID_FRINGE_TOLERANCE {
            return Err(Error::OperatingPoint(format!(
                "fringe phase at beta = 0 is {gamma:.4} rad, {off:.3} rad from mid-fringe"
            )));
        }
        let slope = fringe_phase_slope(&reference);
        let mut nodes = Vec::new();
        for (offset, w) in model.spread_nodes()? {
            let (t1, t2) = shifted_effective_times(&reference, offset)?;
            nodes.push((w, reference.with_times(t1, t2)));
        }
        Ok(FringeModel {
            nodes,
            detection_error: model.detection_error,
            half_width: std::f64::consts::FRAC_PI_4 / slope.abs(),
        })
    }

    pub fn probability(&self, beta: f64) -> f64 {
        let p: f64 = self
            .nodes
            .iter()
            .map(|(w, p)| w * pg_analytic(&p.with_beta(beta)))
            .sum();
        // The channel only fails for ε outside [0, 1/2], already rejected.
        apply_detection_error(p.clamp(0.0, 1.0), self.detection_error).unwrap_or(p)
    }

    /// Estimation window `[-h, h]`, a quarter fringe wide on each side.
    pub fn window(&self) -> (f64, f64) {
        (-self.half_width, self.half_width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub beta: f64,
    /// The observed frequency fell outside the model's range on the window.
    pub clamped: bool,
}

/// Root of `P_model(β) = count/ν` on the model's window.
pub fn estimate_beta_mle(count: u64, nu: u64, model: &FringeModel) -> Result<Estimate> {
    if nu == 0 || count > nu {
        return Err(invalid(format!("count {count} of {nu} shots")));
    }
    let target = count as f64 / nu as f64;
    let (mut lo, mut hi) = model.window();
    let (plo, phi) = (model.probability(lo), model.probability(hi));
    let increasing = phi > plo;
    let (pmin, pmax) = if increasing { (plo, phi) } else { (phi, plo) };
    if target <= pmin || target >= pmax {
        let at_low_end = (target <= pmin) == increasing;
        return Ok(Estimate {
            beta: if at_low_end { lo } else { hi },
            clamped: true,
        });
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (model.probability(mid) < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Estimate {
        beta: 0.5 * (lo + hi),
        clamped: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub estimates: Vec<f64>,
    pub mean_estimate: f64,
    /// Sample standard deviation (`n - 1` normalisation) of the estimates.
    pub empirical_std: f64,
    /// `1/√(νF)` with `F` at the true displacement.
    pub predicted_std: f64,
    pub ratio: f64,
    /// Replicas whose estimate was clamped to the window edge.
    pub clamped: usize,
}

pub fn cramer_rao_trial(config: &TrialConfig) -> Result<TrialReport> {
    cramer_rao_trial_with(config, Execution::default())
}

pub fn cramer_rao_trial_with(config: &TrialConfig, exec: Execution) -> Result<TrialReport> {
    config.validate()?;
    let model = FringeModel::new(&config.params, &config.imperfections)?;
    let (lo, hi) = model.window();
    if !(config.beta_true > lo && config.beta_true < hi) {
        return Err(Error::OperatingPoint(format!(
            "beta_true = {} lies outside the quarter-fringe window ({lo:.4}, {hi:.4})",
            config.beta_true
        )));
    }
    let p_true = model.probability(config.beta_true);
    let fisher = fi_with_imperfections(
        &config.params.with_beta(config.beta_true),
        &config.imperfections,
    )?;
    let runs = exec.try_map(&(0..config.replicas).collect::<Vec<_>>(), |&i| {
        let mut rng = replica_rng(config.seed, i as u64);
        let count = sample_outcomes(p_true, config.nu, &mut rng)?;
        estimate_beta_mle(count, config.nu, &model)
    })?;
    let estimates: Vec<f64> = runs.iter().map(|e| e.beta).collect();
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let empirical_std = if estimates.len() > 1 {
        (estimates.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let predicted_std = 1.0 / (config.nu as f64 * fisher).sqrt();
    Ok(TrialReport {
        mean_estimate: mean,
        empirical_std,
        predicted_std,
        ratio: empirical_std / predicted_std,
        clamped: runs.iter().filter(|e| e.clamped).count(),
        estimates,
    })
}
