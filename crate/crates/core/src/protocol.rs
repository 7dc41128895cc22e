//! The measurement sequence: prepare, flip and displace, reverse, detect.
//!
//! Two routes compute the detection probability `P_g(β)`:
//!
//! * [`pg_analytic`], the large-α closed form
//!   `P_g = (1 + C cos γ)/2` with `C = exp(-Ω₀²(T1-T2)²/8)` and
//!   `γ = Ω₀T2β + Ω₀α(T2-T1)`. At `T2 = T1` the exact phase `2Dβ` with
//!   `D = 2α sin(Ω₀T1/4α)` is used instead of `Ω₀T1β`.
//! * [`run_protocol_numeric`], which propagates the state in Fock space.
//!
//! The displacement is injected instantaneously at the flip, while the atom
//! is detuned and does not interact with the field.

use std::f64::consts::PI;

use gauss_quad::hermite::GaussHermite;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dynamics::{
    atomic_phase_flip, effective_time, jc_propagate, lab_time_for_effective, AtomFieldState,
    AtomLevel, CavityMode,
};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::fockspace::{coherent_state, displacement_operator, required_n_max};

/// Full set of knobs for one run of the protocol. Times are effective
/// interaction times in µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Real amplitude of the initial coherent field.
    pub alpha: f64,
    /// Preparation time.
    pub t1: f64,
    /// Measurement time.
    pub t2: f64,
    /// Injected displacement.
    pub beta: f64,
    pub mode: CavityMode,
    pub n_max: usize,
    pub initial_atom: AtomLevel,
    pub flip_enabled: bool,
}

impl Default for ProtocolParams {
    /// 12.7 mean photons, atom starting in `|g>`, `T1 = 14.7`, `T2 = 16.3`.
    fn default() -> Self {
        ProtocolParams {
            alpha: 12.7f64.sqrt(),
            t1: 14.7,
            t2: 16.3,
            beta: 0.0,
            mode: CavityMode::default(),
            n_max: 64,
            initial_atom: AtomLevel::Ground,
            flip_enabled: true,
        }
    }
}

impl ProtocolParams {
    pub fn with_times(mut self, t1: f64, t2: f64) -> Self {
        self.t1 = t1;
        self.t2 = t2;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn omega0(&self) -> f64 {
        self.mode.omega0
    }

    /// Rotation angle `Φ = Ω₀T1/4α` of the two field components.
    pub fn rotation_angle(&self) -> f64 {
        self.omega0() * self.t1 / (4.0 * self.alpha)
    }

    /// Phase-space separation `D = 2α sin Φ` of the field components.
    pub fn resource_size(&self) -> f64 {
        resource_size(self.alpha, self.t1, self.omega0())
    }

    /// Truncation needed to hold the displaced field.
    pub fn required_n_max(&self) -> usize {
        required_n_max(self.alpha + self.beta.abs())
    }

    /// Raises `n_max` to what the amplitudes require, never lowers it.
    pub fn with_sufficient_truncation(mut self) -> Self {
        let need = self
            .required_n_max()
            .max((16.0 * self.beta * self.beta).ceil() as usize);
        self.n_max = self.n_max.max(need);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.mode.validate()?;
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(invalid(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.t1 >= 0.0 && self.t2 >= 0.0) {
            return Err(invalid(format!(
                "T1 and T2 must be >= 0, got {} and {}",
                self.t1, self.t2
            )));
        }
        let t_max = self.mode.max_effective_time();
        if self.t1 + self.t2 > t_max {
            return Err(invalid(format!(
                "T1 + T2 = {} µs exceeds the full mode crossing {t_max:.3} µs",
                self.t1 + self.t2
            )));
        }
        if !self.beta.is_finite() {
            return Err(invalid("beta must be finite"));
        }
        Ok(())
    }
}

/// `D = 2α sin(Ω₀T1/4α)`; tends to `Ω₀T1/2` for large α.
pub fn resource_size(alpha: f64, t1: f64, omega0: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    2.0 * alpha * (omega0 * t1 / (4.0 * alpha)).sin()
}

/// Fringe contrast `C = exp(-Ω₀²(T1-T2)²/8)`.
pub fn contrast(t1: f64, t2: f64, omega0: f64) -> f64 {
    let d = omega0 * (t1 - t2);
    (-d * d / 8.0).exp()
}

/// Fringe phase `γ` of the analytic model.
pub fn fringe_phase(params: &ProtocolParams) -> f64 {
    let w = params.omega0();
    if params.t2 == params.t1 {
        2.0 * params.resource_size() * params.beta
    } else {
        w * params.t2 * params.beta + w * params.alpha * (params.t2 - params.t1)
    }
}

/// `∂γ/∂β` of the analytic model.
pub fn fringe_phase_slope(params: &ProtocolParams) -> f64 {
    if params.t2 == params.t1 {
        2.0 * params.resource_size()
    } else {
        params.omega0() * params.t2
    }
}

/// Closed-form `P_g = (1 + C cos γ)/2`.
pub fn pg_analytic(params: &ProtocolParams) -> f64 {
    let c = contrast(params.t1, params.t2, params.omega0());
    0.5 * (1.0 + c * fringe_phase(params).cos())
}

/// `∂P_g/∂β` of the closed form.
pub fn pg_analytic_slope(params: &ProtocolParams) -> f64 {
    let c = contrast(params.t1, params.t2, params.omega0());
    -0.5 * c * fringe_phase(params).sin() * fringe_phase_slope(params)
}

/// Atom-field state after the preparation time `T1`.
pub fn resource_state(params: &ProtocolParams) -> Result<AtomFieldState> {
    params.validate()?;
    let field = coherent_state(params.alpha, params.n_max)?;
    let start = AtomFieldState::product(params.initial_atom, field);
    jc_propagate(&start, params.t1, params.omega0())
}

/// Result of a numerically simulated protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub ground_probability: f64,
    pub final_state: AtomFieldState,
}

/// Simulates `|α>|atom> → U(T1) → flip → D(β) → U(T2)` and reads out `P_g`.
pub fn run_protocol_numeric(params: &ProtocolParams) -> Result<ProtocolRun> {
    params.validate()?;
    let required = params.required_n_max();
    if params.n_max < required {
        return Err(Error::TruncationTooSmall {
            amplitude: params.alpha + params.beta.abs(),
            n_max: params.n_max,
            required,
        });
    }
    let mut state = resource_state(params)?;
    if params.flip_enabled {
        state = atomic_phase_flip(&state);
    }
    if params.beta != 0.0 {
        let d = displacement_operator(params.beta, params.n_max)?;
        state = state.map_field(|f| d.apply(f))?;
    }
    let final_state = jc_propagate(&state, params.t2, params.omega0())?;
    Ok(ProtocolRun {
        ground_probability: final_state.ground_probability(),
        final_state,
    })
}

/// Numeric `P_g` on a grid of displacements, evaluated with `exec`.
pub fn numeric_fringe(params: &ProtocolParams, betas: &[f64], exec: Execution) -> Result<Vec<f64>> {
    exec.try_map(betas, |&b| {
        run_protocol_numeric(&params.with_beta(b)).map(|r| r.ground_probability)
    })
}

/// Symmetric detection errors: each outcome is misattributed with
/// probability `eps`, so `p ↦ ε + (1 - 2ε)p`.
pub fn apply_detection_error(p: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability {p} outside [0, 1]")));
    }
    check_eps(eps)?;
    Ok(eps + (1.0 - 2.0 * eps) * p)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..0.5).contains(&eps) {
        return Err(invalid(format!("detection error {eps} outside [0, 0.5)")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpreadRule {
    GaussHermite,
    MonteCarlo { seed: u64 },
}

/// Detection errors and longitudinal spread of the atomic sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImperfectionModel {
    pub detection_error: f64,
    /// Standard deviation of the atom's longitudinal position, mm.
    pub position_sigma: f64,
    pub spread_samples: usize,
    pub spread_rule: SpreadRule,
}

impl Default for ImperfectionModel {
    /// 5% misattribution, σ = 0.5 mm, 15-point Gauss-Hermite average.
    fn default() -> Self {
        ImperfectionModel {
            detection_error: 0.05,
            position_sigma: 0.5,
            spread_samples: 15,
            spread_rule: SpreadRule::GaussHermite,
        }
    }
}

impl ImperfectionModel {
    pub fn ideal() -> Self {
        ImperfectionModel {
            detection_error: 0.0,
            position_sigma: 0.0,
            ..Self::default()
        }
    }

    pub fn detection_only(eps: f64) -> Self {
        ImperfectionModel {
            detection_error: eps,
            position_sigma: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_eps(self.detection_error)?;
        if !self.position_sigma.is_finite() || self.position_sigma < 0.0 {
            return Err(invalid(format!(
                "position spread must be >= 0, got {}",
                self.position_sigma
            )));
        }
        if self.position_sigma > 0.0 && self.spread_samples == 0 {
            return Err(invalid("spread averaging needs at least one sample"));
        }
        Ok(())
    }

    /// `(offset_mm, weight)` pairs approximating the position distribution.
    /// Weights sum to one.
    pub fn spread_nodes(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        if self.position_sigma == 0.0 {
            return Ok(vec![(0.0, 1.0)]);
        }
        let sigma = self.position_sigma;
        match self.spread_rule {
            SpreadRule::GaussHermite => {
                let n = std::num::NonZeroUsize::new(self.spread_samples)
                    .ok_or_else(|| invalid("spread averaging needs at least one sample"))?;
                let rule = GaussHermite::new(n);
                let norm = PI.sqrt();
                Ok(rule
                    .iter()
                    .map(|(x, w)| (std::f64::consts::SQRT_2 * sigma * x, w / norm))
                    .collect())
            }
            SpreadRule::MonteCarlo { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let normal = Normal::new(0.0, sigma).map_err(|e| invalid(e.to_string()))?;
                let w = 1.0 / self.spread_samples as f64;
                Ok((0..self.spread_samples)
                    .map(|_| (normal.sample(&mut rng), w))
                    .collect())
            }
        }
    }
}

/// Effective `(T1, T2)` for an atom displaced by `offset` (mm) along the
/// beam. The switching instants stay where they are for a centred atom;
/// only the coupling profile moves by `offset / v` in time.
pub fn shifted_effective_times(params: &ProtocolParams, offset: f64) -> Result<(f64, f64)> {
    if offset == 0.0 {
        return Ok((params.t1, params.t2));
    }
    let mode = &params.mode;
    let start = -lab_time_for_effective(params.t1, mode)?;
    let stop = lab_time_for_effective(params.t2, mode)?;
    let centre = offset / mode.velocity;
    Ok((
        effective_time(start - centre, -centre, mode)?,
        effective_time(-centre, stop - centre, mode)?,
    ))
}

fn spread_average(
    params: &ProtocolParams,
    model: &ImperfectionModel,
    pg: impl Fn(&ProtocolParams) -> Result<f64>,
) -> Result<f64> {
    params.validate()?;
    let mut acc = 0.0;
    for (offset, w) in model.spread_nodes()? {
        let (t1, t2) = shifted_effective_times(params, offset)?;
        acc += w * pg(&params.with_times(t1, t2))?;
    }
    apply_detection_error(acc.clamp(0.0, 1.0), model.detection_error)
}

/// Numeric `P_g` averaged over the position spread, then passed through
/// the detection channel.
pub fn pg_with_imperfections(params: &ProtocolParams, model: &ImperfectionModel) -> Result<f64> {
    spread_average(params, model, |p| {
        run_protocol_numeric(p).map(|r| r.ground_probability)
    })
}

/// Same averaging applied to the closed form.
pub fn pg_analytic_with_imperfections(
    params: &ProtocolParams,
    model: &ImperfectionModel,
) -> Result<f64> {
    spread_average(params, model, |p| Ok(pg_analytic(p)))
}

/// `∂/∂β` of [`pg_analytic_with_imperfections`].
pub fn pg_analytic_slope_with_imperfections(
    params: &ProtocolParams,
    model: &ImperfectionModel,
) -> Result<f64> {
    params.validate()?;
    let mut acc = 0.0;
    for (offset, w) in model.spread_nodes()? {
        let (t1, t2) = shifted_effective_times(params, offset)?;
        acc += w * pg_analytic_slope(&params.with_times(t1, t2));
    }
    Ok((1.0 - 2.0 * model.detection_error) * acc)
}

/// Imperfect numeric `P_g` over a displacement grid.
pub fn imperfect_fringe(
    params: &ProtocolParams,
    model: &ImperfectionModel,
    betas: &[f64],
    exec: Execution,
) -> Result<Vec<f64>> {
    exec.try_map(betas, |&b| {
        pg_with_imperfections(&params.with_beta(b), model)
    })
}

/// Continuous fringe phase along a scan that starts on a bright fringe.
///
/// The samples are rescaled to `[-1, 1]` with the scan's own extrema and
/// the phase is `arccos` of that, reflected after each turning point.
/// The scan must be fine enough that no extremum is skipped.
pub fn unwrapped_fringe_phase(pg: &[f64]) -> Vec<f64> {
    if pg.is_empty() {
        return Vec::new();
    }
    let hi = pg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = pg.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let mut segment = 0u32;
    let mut out = Vec::with_capacity(pg.len());
    for i in 0..pg.len() {
        if i >= 2 {
            let prev = pg[i - 1] - pg[i - 2];
            let cur = pg[i] - pg[i - 1];
            if prev * cur < 0.0 {
                segment += 1;
            }
        }
        let c = ((2.0 * pg[i] - hi - lo) / span).clamp(-1.0, 1.0);
        let a = c.acos();
        let within = if segment.is_multiple_of(2) { a } else { PI - a };
        out.push(segment as f64 * PI + within);
    }
    out
}
