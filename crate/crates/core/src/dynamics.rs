//! Resonant Jaynes-Cummings evolution with a Gaussian mode profile.
//!
//! The atom crosses a Gaussian cavity mode, so the coupling is
//! `Ω(t) = Ω₀ exp(-(vt/w)²)`. On resonance the interaction Hamiltonians at
//! different times differ only by this scalar, hence they commute and the
//! evolution over `[t, t']` equals constant-coupling evolution over the
//! effective time `T(t, t') = ∫ exp(-(vτ/w)²) dτ`. All interaction times in
//! this crate are effective times.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::fockspace::{FieldBranches, FieldVector, NORM_TOLERANCE};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomLevel {
    Ground,
    Excited,
}

/// Gaussian cavity mode seen by an atom crossing it at constant speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode {
    /// Vacuum Rabi angular frequency at the cavity centre, rad/µs.
    pub omega0: f64,
    /// Mode waist, mm.
    pub waist: f64,
    /// Atomic velocity, mm/µs.
    pub velocity: f64,
}

impl Default for CavityMode {
    /// Ω₀/2π = 46 kHz, w = 5.96 mm, v = 250 m/s.
    fn default() -> Self {
        CavityMode {
            omega0: 2.0 * PI * 0.046,
            waist: 5.96,
            velocity: 0.25,
        }
    }
}

impl CavityMode {
    pub fn new(omega0: f64, waist: f64, velocity: f64) -> Result<Self> {
        let mode = CavityMode {
            omega0,
            waist,
            velocity,
        };
        mode.validate()?;
        Ok(mode)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega0", self.omega0),
            ("waist", self.waist),
            ("velocity", self.velocity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Transit time scale `w/v`, µs.
    pub fn transit_time(&self) -> f64 {
        self.waist / self.velocity
    }

    /// `√π w/v`: effective time of a full crossing.
    pub fn max_effective_time(&self) -> f64 {
        PI.sqrt() * self.transit_time()
    }

    /// `Ω(t)/Ω₀` for lab time `t` measured from the centre crossing.
    pub fn profile(&self, t: f64) -> f64 {
        let u = t / self.transit_time();
        (-u * u).exp()
    }
}

/// `∫_{t_start}^{t_end} exp(-(vτ/w)²) dτ` in closed form. Infinite bounds are
/// accepted.
pub fn effective_time(t_start: f64, t_end: f64, mode: &CavityMode) -> Result<f64> {
    if t_start.is_nan() || t_end.is_nan() || t_start > t_end {
        return Err(invalid(format!(
            "effective_time needs t_start <= t_end, got {t_start} > {t_end}"
        )));
    }
    if t_start == t_end {
        return Ok(0.0);
    }
    let s = mode.transit_time();
    let half = 0.5 * PI.sqrt() * s;
    Ok(half * (libm::erf(t_end / s) - libm::erf(t_start / s)))
}

/// Lab time `t >= 0` at which `effective_time(0, t) = target`.
///
/// Solved by Newton steps on the monotone closed form, with bisection as a
/// safeguard. Targets must stay below half the full-crossing time.
pub fn lab_time_for_effective(target: f64, mode: &CavityMode) -> Result<f64> {
    let half = 0.5 * mode.max_effective_time();
    if target.is_nan() || target < 0.0 || target >= half {
        return Err(invalid(format!(
            "effective time {target} µs not reachable on one side of the mode (limit {half} µs)"
        )));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let f = |t: f64| effective_time(0.0, t, mode).map(|v| v - target);
    let (mut lo, mut hi) = (0.0f64, mode.transit_time());
    while f(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = f(t)?;
        if r == 0.0 {
            break;
        }
        if r > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let newton = t - r / mode.profile(t);
        t = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-14 * hi.max(1.0) {
            break;
        }
    }
    Ok(t)
}

/// Joint atom-field state: field amplitudes with the atom in `|g>` and in `|e>`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFieldState {
    pub g: FieldVector,
    pub e: FieldVector,
}

impl AtomFieldState {
    pub fn new(g: FieldVector, e: FieldVector) -> Result<Self> {
        if g.dim() != e.dim() {
            return Err(Error::DimensionMismatch(g.dim(), e.dim()));
        }
        Ok(AtomFieldState { g, e })
    }

    /// Product state `|level> ⊗ field`.
    pub fn product(level: AtomLevel, field: FieldVector) -> Self {
        let empty = FieldVector::zeros(field.n_max());
        match level {
            AtomLevel::Ground => AtomFieldState { g: field, e: empty },
            AtomLevel::Excited => AtomFieldState { g: empty, e: field },
        }
    }

    pub fn n_max(&self) -> usize {
        self.g.n_max()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.g.norm_sqr() + self.e.norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Probability of detecting the atom in `|g>`.
    pub fn ground_probability(&self) -> f64 {
        self.g.norm_sqr()
    }

    pub fn inner(&self, other: &AtomFieldState) -> C64 {
        self.g.inner(&other.g) + self.e.inner(&other.e)
    }

    /// `|<self|other>|²`.
    pub fn fidelity(&self, other: &AtomFieldState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Applies the same field map to both atomic branches.
    pub fn map_field(&self, f: impl Fn(&FieldVector) -> Result<FieldVector>) -> Result<Self> {
        AtomFieldState::new(f(&self.g)?, f(&self.e)?)
    }
}

impl FieldBranches for AtomFieldState {
    fn branches(&self) -> Vec<&FieldVector> {
        vec![&self.g, &self.e]
    }
}

/// Constant-coupling resonant evolution over effective time `t_eff`.
///
/// Each doublet `{|e,n>, |g,n+1>}` rotates by `θ_n = Ω₀√(n+1) t_eff / 2`:
///
/// ```text
/// e_n'     = cos θ_n e_n     - i sin θ_n g_{n+1}
/// g_{n+1}' = -i sin θ_n e_n  + cos θ_n g_{n+1}
/// ```
///
/// `|g,0>` is uncoupled. `|e,n_max>` would couple outside the truncation and
/// is left unchanged, which keeps the map exactly unitary.
pub fn jc_propagate(state: &AtomFieldState, t_eff: f64, omega0: f64) -> Result<AtomFieldState> {
    if !t_eff.is_finite() || t_eff < 0.0 {
        return Err(invalid(format!(
            "effective time must be finite and >= 0, got {t_eff}"
        )));
    }
    if !state.is_normalized() {
        return Err(Error::NotNormalized(state.norm_sqr()));
    }
    let mut out = state.clone();
    let (gs, es) = (state.g.amplitudes(), state.e.amplitudes());
    let AtomFieldState { g, e } = &mut out;
    let (new_g, new_e) = (g.amplitudes_mut(), e.amplitudes_mut());
    for n in 0..state.n_max() {
        let theta = 0.5 * omega0 * ((n + 1) as f64).sqrt() * t_eff;
        let (s, c) = theta.sin_cos();
        let mis = C64::new(0.0, -s);
        new_e[n] = es[n] * c + gs[n + 1] * mis;
        new_g[n + 1] = es[n] * mis + gs[n + 1] * c;
    }
    Ok(out)
}

/// π phase between the atomic levels: the `|g>` branch changes sign.
///
/// Conjugating the resonant rotation with this flip reverses its sense, so
/// `flip · U(T) · flip · U(T)` is the identity.
pub fn atomic_phase_flip(state: &AtomFieldState) -> AtomFieldState {
    AtomFieldState {
        g: state.g.scaled(C64::new(-1.0, 0.0)),
        e: state.e.clone(),
    }
}

/// Relative phase (rad) accumulated by a square detuning pulse of
/// `detuning_mhz` (cycles/µs) lasting `duration_us`.
pub fn detuning_pulse_phase(detuning_mhz: f64, duration_us: f64) -> f64 {
    2.0 * PI * detuning_mhz * duration_us
}
