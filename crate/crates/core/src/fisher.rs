//! Fisher information of the atomic signal and of the resource state.
//!
//! `F` is the classical Fisher information of one two-outcome detection,
//! `F_Q = 4 Var(ĥ)` the quantum Fisher information of the (pure) resource
//! state for displacements generated by `ĥ = -i(a† - a)`. A coherent
//! resource gives `F_Q = 4`, the standard quantum limit, and
//! `Δβ = 1/√(νF)` after `ν` repetitions.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::fockspace::{expectation_and_variance, quadrature_generator, FieldBranches};
use crate::protocol::{
    apply_detection_error, contrast, pg_analytic_slope_with_imperfections,
    pg_analytic_with_imperfections, resource_size, ImperfectionModel, ProtocolParams,
};

/// Quantum Fisher information of a coherent state.
pub const F_SQL: f64 = 4.0;

/// Probabilities are clipped to `[P_CLIP, 1 - P_CLIP]` before fringe fits.
pub const P_CLIP: f64 = 1e-4;

/// Fits whose design matrix is worse conditioned than this are refused.
pub const MAX_FIT_CONDITION: f64 = 1e8;

/// Two-outcome Fisher information `(∂p/∂β)² / (p(1-p))`.
pub fn fi_binary(p: f64, dp_dbeta: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Divergent(p));
    }
    Ok(dp_dbeta * dp_dbeta / (p * (1.0 - p)))
}

/// `F(β) = C²Ω₀²T2² sin²γ / (1 - C² cos²γ)` with `γ = Ω₀T2β + Ω₀α(T2-T1)`.
///
/// The `beta` argument overrides `params.beta`. At `C = 1` the expression
/// is `Ω₀²T2²` for every γ, including the removable `0/0` points.
pub fn fi_analytic(beta: f64, params: &ProtocolParams) -> f64 {
    let w = params.omega0();
    let c2 = contrast(params.t1, params.t2, w).powi(2);
    let scale = w * w * params.t2 * params.t2;
    let gamma = w * params.t2 * beta + w * params.alpha * (params.t2 - params.t1);
    let (s, c) = gamma.sin_cos();
    let den = 1.0 - c2 * c * c;
    if den <= f64::EPSILON * f64::EPSILON {
        return scale;
    }
    c2 * scale * s * s / den
}

/// Mid-fringe maximum `C²Ω₀²T2²`.
pub fn fi_mid_fringe(t1: f64, t2: f64, omega0: f64) -> f64 {
    contrast(t1, t2, omega0).powi(2) * omega0 * omega0 * t2 * t2
}

/// Fisher information of the analytic signal after spread averaging and
/// the detection channel, at `params.beta`.
pub fn fi_with_imperfections(params: &ProtocolParams, model: &ImperfectionModel) -> Result<f64> {
    let p = pg_analytic_with_imperfections(params, model)?;
    let dp = pg_analytic_slope_with_imperfections(params, model)?;
    fi_binary(p, dp)
}

/// Mid-fringe Fisher information after a symmetric detection channel:
/// `(1-2ε)²` times the ideal value.
pub fn fi_mid_fringe_with_detection(t1: f64, t2: f64, omega0: f64, eps: f64) -> Result<f64> {
    // p = 1/2 is the channel's fixed point, so only the slope is scaled.
    let _ = apply_detection_error(0.5, eps)?;
    Ok((1.0 - 2.0 * eps).powi(2) * fi_mid_fringe(t1, t2, omega0))
}

/// Measurement time maximising the mid-fringe Fisher information.
///
/// With `x = Ω₀T2` and `a = Ω₀T1` the objective is `x² exp(-(x-a)²/4)`,
/// stationary at `x² - ax - 4 = 0`. Returns `(T2*, F*)`.
pub fn optimal_t2(t1: f64, omega0: f64) -> Result<(f64, f64)> {
    if t1.is_nan() || t1 < 0.0 || omega0.is_nan() || omega0 <= 0.0 {
        return Err(invalid(format!(
            "optimal_t2 needs T1 >= 0 and Ω₀ > 0, got {t1}, {omega0}"
        )));
    }
    let a = omega0 * t1;
    let x = 0.5 * (a + (a * a + 16.0).sqrt());
    let t2 = x / omega0;
    Ok((t2, fi_mid_fringe(t1, t2, omega0)))
}

/// `4 Var(ĥ)` in a pure state.
pub fn qfi_numeric<S: FieldBranches + ?Sized>(state: &S) -> Result<f64> {
    let n_max = state.branches()[0].n_max();
    let (_, var) = expectation_and_variance(&quadrature_generator(n_max), state)?;
    Ok(4.0 * var)
}

/// `F_Q = 4(1 + D²)`, `D = 2α sin(Ω₀T1/4α)`.
pub fn qfi_analytic(params: &ProtocolParams) -> f64 {
    let d = resource_size(params.alpha, params.t1, params.omega0());
    4.0 * (1.0 + d * d)
}

/// Small-rotation form `4 + Ω₀²T1²` of [`qfi_analytic`].
pub fn qfi_small_phase(t1: f64, omega0: f64) -> f64 {
    4.0 + omega0 * omega0 * t1 * t1
}

/// `16α²`, reached when the components are diametrically opposite.
pub fn heisenberg_bound(alpha: f64) -> f64 {
    16.0 * alpha * alpha
}

/// Sampled interference signal `P_g(β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeDataset {
    beta_grid: Vec<f64>,
    p_hat: Vec<f64>,
    trials: Vec<u64>,
}

impl FringeDataset {
    pub fn new(beta_grid: Vec<f64>, p_hat: Vec<f64>, trials: Vec<u64>) -> Result<Self> {
        if beta_grid.len() != p_hat.len() || beta_grid.len() != trials.len() {
            return Err(invalid(format!(
                "fringe arrays differ in length: {} / {} / {}",
                beta_grid.len(),
                p_hat.len(),
                trials.len()
            )));
        }
        if beta_grid.iter().any(|b| b.is_nan()) || beta_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("beta grid must be strictly increasing"));
        }
        if let Some(p) = p_hat.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(invalid(format!("probability estimate {p} outside [0, 1]")));
        }
        Ok(FringeDataset {
            beta_grid,
            p_hat,
            trials,
        })
    }

    /// Exact probabilities, recorded as if from infinitely many trials.
    pub fn noiseless(beta_grid: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let n = p.len();
        Self::new(beta_grid, p, vec![0; n])
    }

    pub fn beta_grid(&self) -> &[f64] {
        &self.beta_grid
    }

    pub fn p_hat(&self) -> &[f64] {
        &self.p_hat
    }

    pub fn trials(&self) -> &[u64] {
        &self.trials
    }

    pub fn len(&self) -> usize {
        self.beta_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta_grid.is_empty()
    }
}

/// Least-squares polynomial in `β / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFit {
    /// Coefficients in increasing degree of the scaled variable.
    pub coefficients: Vec<f64>,
    pub scale: f64,
    /// Condition number of the scaled design matrix.
    pub condition: f64,
}

impl PolynomialFit {
    pub fn fit(x: &[f64], y: &[f64], degree: usize) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::DimensionMismatch(n, y.len()));
        }
        if n < degree + 1 {
            return Err(invalid(format!(
                "{n} points cannot determine a degree-{degree} fit"
            )));
        }
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let design = DMatrix::from_fn(n, degree + 1, |i, j| (x[i] / scale).powi(j as i32));
        let svd = design.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };
        if condition > MAX_FIT_CONDITION {
            return Err(Error::IllConditioned { condition, degree });
        }
        let rhs = DVector::from_column_slice(y);
        let sol = svd
            .solve(&rhs, 0.0)
            .map_err(|e| invalid(format!("least-squares solve failed: {e}")))?;
        Ok(PolynomialFit {
            coefficients: sol.iter().copied().collect(),
            scale,
            condition,
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        let u = x / self.scale;
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * u + c)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let u = x / self.scale;
        let d = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * u + k as f64 * c);
        d / self.scale
    }
}

/// Fisher information read off an interpolated fringe.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeFisher {
    /// `F` at each grid point of the dataset.
    pub f_curve: Vec<f64>,
    pub f_at_zero: f64,
    pub fit: PolynomialFit,
    /// Number of samples or fitted values that had to be clipped.
    pub clipped: usize,
}

impl FringeFisher {
    /// Fisher information of the fitted fringe at any `beta`.
    pub fn fisher_at(&self, beta: f64) -> f64 {
        fisher_from_fit(&self.fit, beta).0
    }
}

fn fisher_from_fit(fit: &PolynomialFit, beta: f64) -> (f64, bool) {
    let raw = fit.value(beta);
    let p = raw.clamp(P_CLIP, 1.0 - P_CLIP);
    // p is strictly inside (0, 1) after clipping.
    let f = fi_binary(p, fit.derivative(beta)).unwrap_or(0.0);
    (f, p != raw)
}

/// Polynomial interpolation of `P_g(β)`, analytic derivative, then
/// [`fi_binary`] pointwise.
pub fn fi_from_fringes(data: &FringeDataset, fit_degree: usize) -> Result<FringeFisher> {
    if data.len() < fit_degree + 3 {
        return Err(invalid(format!(
            "a degree-{fit_degree} fringe fit needs at least {} points, got {}",
            fit_degree + 3,
            data.len()
        )));
    }
    let mut clipped = 0;
    let p: Vec<f64> = data
        .p_hat()
        .iter()
        .map(|&v| {
            let c = v.clamp(P_CLIP, 1.0 - P_CLIP);
            if c != v {
                clipped += 1;
            }
            c
        })
        .collect();
    let fit = PolynomialFit::fit(data.beta_grid(), &p, fit_degree)?;
    let mut f_curve = Vec::with_capacity(data.len());
    for &b in data.beta_grid() {
        let (f, c) = fisher_from_fit(&fit, b);
        clipped += c as usize;
        f_curve.push(f);
    }
    let (f_at_zero, _) = fisher_from_fit(&fit, 0.0);
    Ok(FringeFisher {
        f_curve,
        f_at_zero,
        fit,
        clipped,
    })
}

/// Precision figures for a per-realization Fisher information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherReport {
    pub fisher: f64,
    pub qfi: Option<f64>,
    pub f_sql: f64,
    /// Single-shot uncertainty `1/√F`.
    pub delta_beta: f64,
    /// `10 log10(√(F/F_SQL))`, positive beyond the standard quantum limit.
    pub db_gain: f64,
}

impl FisherReport {
    pub fn with_qfi(mut self, qfi: f64) -> Self {
        self.qfi = Some(qfi);
        self
    }
}

pub fn precision_report(fisher: f64) -> Result<FisherReport> {
    if !fisher.is_finite() || fisher <= 0.0 {
        return Err(invalid(format!(
            "Fisher information must be positive, got {fisher}"
        )));
    }
    Ok(FisherReport {
        fisher,
        qfi: None,
        f_sql: F_SQL,
        delta_beta: 1.0 / fisher.sqrt(),
        db_gain: 5.0 * (fisher / F_SQL).log10(),
    })
}
