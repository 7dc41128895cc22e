//! Truncated Fock-space representation of the cavity field.
//!
//! States live in span{|0>, .., |n_max>}. Operators are dense complex
//! matrices of the same dimension. Only real displacement amplitudes are
//! supported.

use std::ops::{Add, Mul};

use crate::error::{invalid, Error, Result};
use crate::C64;

/// Tolerance on `|‖ψ‖² - 1|` for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Tolerance on the entries of `op - opᴴ` for an operator to count as Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Cavity field amplitudes over the truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    amps: Vec<C64>,
}

impl FieldVector {
    pub fn zeros(n_max: usize) -> Self {
        FieldVector {
            amps: vec![C64::new(0.0, 0.0); n_max + 1],
        }
    }

    pub fn fock(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(invalid(format!(
                "Fock state |{n}> outside truncation n_max = {n_max}"
            )));
        }
        let mut v = Self::zeros(n_max);
        v.amps[n] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn vacuum(n_max: usize) -> Self {
        let mut v = Self::zeros(n_max);
        v.amps[0] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(invalid("a field vector needs at least one amplitude"));
        }
        Ok(FieldVector { amps })
    }

    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FieldVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }

    /// Population above `n_max - width`.
    pub fn tail_weight(&self, width: usize) -> f64 {
        let start = (self.n_max() + 1).saturating_sub(width);
        self.amps[start..].iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: C64) -> FieldVector {
        FieldVector {
            amps: self.amps.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<FieldVector> {
        let n = self.norm_sqr();
        if n <= 0.0 {
            return Err(invalid("cannot normalize the zero vector"));
        }
        Ok(self.scaled(C64::new(1.0 / n.sqrt(), 0.0)))
    }
}

impl Add for &FieldVector {
    type Output = FieldVector;

    fn add(self, rhs: &FieldVector) -> FieldVector {
        assert_eq!(
            self.dim(),
            rhs.dim(),
            "field vectors of different truncation"
        );
        FieldVector {
            amps: self
                .amps
                .iter()
                .zip(&rhs.amps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Anything made of one or more field branches that a field operator acts on
/// independently: a bare field, or the atom-field state (one branch per
/// atomic level).
pub trait FieldBranches {
    fn branches(&self) -> Vec<&FieldVector>;
}

impl FieldBranches for FieldVector {
    fn branches(&self) -> Vec<&FieldVector> {
        vec![self]
    }
}

/// Smallest truncation satisfying the tail guard for a coherent amplitude.
pub fn required_n_max(amplitude: f64) -> usize {
    let a = amplitude.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

/// `|α> = e^{-α²/2} Σ αⁿ/√n! |n>` for real `alpha >= 0`.
pub fn coherent_state(alpha: f64, n_max: usize) -> Result<FieldVector> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(invalid(format!(
            "coherent amplitude must be finite and >= 0, got {alpha}"
        )));
    }
    let required = required_n_max(alpha);
    if n_max < required {
        return Err(Error::TruncationTooSmall {
            amplitude: alpha,
            n_max,
            required,
        });
    }
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut c = (-0.5 * alpha * alpha).exp();
    amps.push(C64::new(c, 0.0));
    for n in 1..=n_max {
        c *= alpha / (n as f64).sqrt();
        amps.push(C64::new(c, 0.0));
    }
    Ok(FieldVector { amps })
}

/// Dense `(n_max+1) x (n_max+1)` complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl OperatorMatrix {
    pub fn zeros(n_max: usize) -> Self {
        let dim = n_max + 1;
        OperatorMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(n_max: usize) -> Self {
        let mut m = Self::zeros(n_max);
        for i in 0..m.dim {
            m.data[i * m.dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n_max: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let dim = n_max + 1;
        let mut data = Vec::with_capacity(dim * dim);
        for m in 0..dim {
            for n in 0..dim {
                data.push(f(m, n));
            }
        }
        OperatorMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_max(&self) -> usize {
        self.dim - 1
    }

    /// `<m|op|n>`.
    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.data[m * self.dim + n]
    }

    fn set(&mut self, m: usize, n: usize, v: C64) {
        self.data[m * self.dim + n] = v;
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix::from_fn(self.n_max(), |m, n| self.get(n, m).conj())
    }

    /// Largest entry of `|op - opᴴ|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..self.dim {
            for n in m..self.dim {
                worst = worst.max((self.get(m, n) - self.get(n, m).conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&self, v: &FieldVector) -> Result<FieldVector> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, v.dim()));
        }
        let amps = self
            .data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(&v.amps).map(|(a, b)| a * b).sum())
            .collect();
        Ok(FieldVector { amps })
    }

    pub fn matmul(&self, rhs: &OperatorMatrix) -> Result<OperatorMatrix> {
        if rhs.dim != self.dim {
            return Err(Error::DimensionMismatch(self.dim, rhs.dim));
        }
        let d = self.dim;
        let mut out = OperatorMatrix::zeros(self.n_max());
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs.data[k * d + j];
                }
            }
        }
        Ok(out)
    }

    /// Largest entry-wise deviation from `other` restricted to rows and
    /// columns `0..=limit`.
    pub fn max_deviation_within(&self, other: &OperatorMatrix, limit: usize) -> f64 {
        let top = limit.min(self.n_max());
        let mut worst = 0.0f64;
        for m in 0..=top {
            for n in 0..=top {
                worst = worst.max((self.get(m, n) - other.get(m, n)).norm());
            }
        }
        worst
    }
}

impl Mul<&FieldVector> for &OperatorMatrix {
    type Output = FieldVector;

    fn mul(self, rhs: &FieldVector) -> FieldVector {
        self.apply(rhs)
            .expect("operator and state of different truncation")
    }
}

/// `n̂ = a†a`.
pub fn number_operator(n_max: usize) -> OperatorMatrix {
    let mut m = OperatorMatrix::zeros(n_max);
    for n in 0..=n_max {
        m.set(n, n, C64::new(n as f64, 0.0));
    }
    m
}

/// `ĥ = -i(a† - a)`, the generator of real displacements:
/// `<m|ĥ|n> = -i√(n+1) δ(m,n+1) + i√n δ(m,n-1)`.
pub fn quadrature_generator(n_max: usize) -> OperatorMatrix {
    let mut m = OperatorMatrix::zeros(n_max);
    for n in 0..n_max {
        let s = ((n + 1) as f64).sqrt();
        m.set(n + 1, n, C64::new(0.0, -s));
        m.set(n, n + 1, C64::new(0.0, s));
    }
    m
}

/// Largest real displacement accepted for a given truncation.
pub fn displacement_limit(n_max: usize) -> f64 {
    0.25 * (n_max as f64).sqrt()
}

/// Highest Fock index on which `displacement_operator(beta, n_max)` is
/// unitary to double precision.
pub fn displacement_interior(beta: f64, n_max: usize) -> usize {
    let band = (6.0 * beta.abs() * (n_max as f64).sqrt()).ceil() as usize;
    n_max.saturating_sub(band)
}

/// `D(β) = exp(β(a† - a))` for real `beta`, element by element.
///
/// For `m >= n`, `<m|D|n> = e^{-β²/2} β^{m-n} √(n!/m!) L_n^{(m-n)}(β²)`, and
/// `<n|D|m> = (-1)^{m-n} <m|D|n>`. The Laguerre values are carried in the
/// normalized form `√(j!/(j+k)!) L_j^{(k)}` so no factorial is ever formed.
pub fn displacement_operator(beta: f64, n_max: usize) -> Result<OperatorMatrix> {
    if !beta.is_finite() {
        return Err(invalid(format!("displacement must be finite, got {beta}")));
    }
    let limit = displacement_limit(n_max);
    if beta.abs() > limit {
        return Err(Error::DisplacementGuard { beta, limit, n_max });
    }
    let x = beta * beta;
    let mut op = OperatorMatrix::zeros(n_max);
    let mut ell = vec![0.0f64; n_max + 1];
    // e^{-x/2} β^k / √k!
    let mut base = (-0.5 * x).exp();
    for k in 0..=n_max {
        if k > 0 {
            base *= beta / (k as f64).sqrt();
        }
        let kf = k as f64;
        let len = n_max - k + 1;
        ell[0] = 1.0;
        if len > 1 {
            ell[1] = (1.0 + kf - x) / (1.0 + kf).sqrt();
        }
        for j in 1..len.saturating_sub(1) {
            let jf = j as f64;
            ell[j + 1] = ((2.0 * jf + 1.0 + kf - x) * ell[j]
                - (jf * (jf + kf)).sqrt() * ell[j - 1])
                / ((jf + 1.0) * (jf + kf + 1.0)).sqrt();
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (j, l) in ell.iter().take(len).enumerate() {
            let v = base * l;
            op.set(j + k, j, C64::new(v, 0.0));
            if k > 0 {
                op.set(j, j + k, C64::new(sign * v, 0.0));
            }
        }
    }
    Ok(op)
}

/// Mean and variance of a Hermitian operator.
///
/// For a multi-branch state the operator acts on each branch's field and
/// the contributions add. `<op²>` is taken as `‖op ψ‖²`. Variances down to
/// `-1e-10` are round-off and clamp to zero.
pub fn expectation_and_variance<S: FieldBranches + ?Sized>(
    op: &OperatorMatrix,
    state: &S,
) -> Result<(f64, f64)> {
    let dev = op.hermitian_deviation();
    if dev > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian(dev));
    }
    let branches = state.branches();
    let norm: f64 = branches.iter().map(|b| b.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(norm));
    }
    let mut mean = C64::new(0.0, 0.0);
    let mut second = 0.0;
    for b in branches {
        let ob = op.apply(b)?;
        mean += b.inner(&ob);
        second += ob.norm_sqr();
    }
    let m = mean.re;
    let var = second - m * m;
    if var < -1e-10 {
        return Err(invalid(format!(
            "negative variance {var:e} beyond round-off"
        )));
    }
    Ok((m, var.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Direct series `e^{-|z|²/2} zⁿ/√n!` for a complex coherent amplitude, the
    /// oracle for the displacement columns.
    fn coherent_series(z: C64, n_max: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(n_max + 1);
        let mut c = C64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
        out.push(c);
        for n in 1..=n_max {
            c = c * z / (n as f64).sqrt();
            out.push(c);
        }
        out
    }

    fn field(amps: Vec<C64>) -> FieldVector {
        FieldVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn vacuum_from_zero_amplitude() {
        let v = coherent_state(0.0, 20).unwrap();
        assert_eq!(v.amplitudes()[0], C64::new(1.0, 0.0));
        assert!(v.amplitudes()[1..].iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn coherent_mean_photon_number() {
        let v = coherent_state(12.7f64.sqrt(), 64).unwrap();
        assert!(v.is_normalized());
        assert_abs_diff_eq!(v.mean_photon_number(), 12.7, epsilon = 1e-6);
        assert!(v.tail_weight(5) <= 1e-8);
    }

    #[test]
    fn coherent_unit_amplitude_ratio() {
        let v = coherent_state(1.0, 32).unwrap();
        let a = v.amplitudes();
        assert_abs_diff_eq!((a[1] / a[0]).norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn coherent_truncation_guard() {
        let err = coherent_state(4.0, 40).unwrap_err();
        assert!(matches!(
            err,
            Error::TruncationTooSmall { required: 50, .. }
        ));
        assert!(coherent_state(-1.0, 40).is_err());
    }

    #[test]
    fn zero_displacement_is_identity() {
        let d = displacement_operator(0.0, 30).unwrap();
        assert_eq!(d, OperatorMatrix::identity(30));
    }

    #[test]
    fn displacement_column_zero_is_coherent() {
        for beta in [1.0, -1.0, 0.3, 1.9] {
            let d = displacement_operator(beta, 64).unwrap();
            let col = d.apply(&FieldVector::vacuum(64)).unwrap();
            let want = coherent_series(C64::new(beta, 0.0), 64);
            for (a, b) in col.amplitudes().iter().zip(&want) {
                assert!((a - b).norm() <= 1e-8, "beta {beta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn displacement_general_column_matches_displaced_fock() {
        // D(β)|n> = D(β)(a†)ⁿ/√n!|0> = (a†-β)ⁿ/√n! |β>, evaluated by
        // repeated application of a† - β to the coherent series.
        let n_max = 64;
        let beta = 0.7;
        let d = displacement_operator(beta, n_max).unwrap();
        let mut v: Vec<C64> = coherent_series(C64::new(beta, 0.0), n_max + 20);
        for n in 1..=12usize {
            let mut next = vec![C64::new(0.0, 0.0); v.len()];
            for m in 0..v.len() {
                next[m] -= v[m] * beta;
                if m + 1 < v.len() {
                    next[m + 1] += v[m] * ((m + 1) as f64).sqrt();
                }
            }
            v = next.iter().map(|c| c / (n as f64).sqrt()).collect();
            for (m, vm) in v.iter().enumerate().take(41) {
                assert!((d.get(m, n) - vm).norm() <= 1e-10, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn displacement_unitary_on_interior() {
        for beta in [0.5, 1.0, -1.5, 2.0] {
            let n_max = 64;
            let d = displacement_operator(beta, n_max).unwrap();
            let prod = d.matmul(&d.adjoint()).unwrap();
            let interior = displacement_interior(beta, n_max);
            let dev = prod.max_deviation_within(&OperatorMatrix::identity(n_max), interior);
            assert!(dev <= 1e-8, "beta {beta}: deviation {dev:e}");
        }
    }

    #[test]
    fn displacement_group_inverse() {
        let n_max = 64;
        let a = displacement_operator(0.5, n_max).unwrap();
        let b = displacement_operator(-0.5, n_max).unwrap();
        let prod = a.matmul(&b).unwrap();
        let interior = displacement_interior(0.5, n_max);
        assert!(prod.max_deviation_within(&OperatorMatrix::identity(n_max), interior) <= 1e-8);
    }

    #[test]
    fn displacement_guard() {
        assert!(matches!(
            displacement_operator(2.1, 64),
            Err(Error::DisplacementGuard { .. })
        ));
        assert!(displacement_operator(2.0, 64).is_ok());
    }

    #[test]
    fn generator_two_level() {
        let h = quadrature_generator(1);
        assert_eq!(h.get(0, 0), C64::new(0.0, 0.0));
        assert_eq!(h.get(0, 1), C64::new(0.0, 1.0));
        assert_eq!(h.get(1, 0), C64::new(0.0, -1.0));
        assert_eq!(h.get(1, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn generator_is_exactly_hermitian() {
        let h = quadrature_generator(40);
        assert_eq!(h, h.adjoint());
    }

    #[test]
    fn generator_variance_in_coherent_states() {
        let h = quadrature_generator(64);
        for alpha in [0.0, 1.0, 12.7f64.sqrt()] {
            let v = coherent_state(alpha, 64).unwrap();
            let (m, var) = expectation_and_variance(&h, &v).unwrap();
            assert_abs_diff_eq!(m, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(var, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn generator_in_single_photon_state() {
        let h = quadrature_generator(8);
        let one = FieldVector::fock(1, 8).unwrap();
        let (m, var) = expectation_and_variance(&h, &one).unwrap();
        assert_abs_diff_eq!(m, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(var, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn number_operator_poisson_statistics() {
        let v = coherent_state(12.7f64.sqrt(), 64).unwrap();
        let (m, var) = expectation_and_variance(&number_operator(64), &v).unwrap();
        assert_abs_diff_eq!(m, 12.7, epsilon = 1e-5);
        assert_abs_diff_eq!(var, 12.7, epsilon = 1e-5);
    }

    // Even cat (|z> + |-z>)/N: <a²> = z², <a†a> = |z|² tanh|z|², so
    // Var(ĥ) = 1 - z² - z̄² + 2|z|² tanh|z|².
    fn cat_variance_formula(z: C64) -> f64 {
        let r2 = z.norm_sqr();
        1.0 - (z * z).re * 2.0 + 2.0 * r2 * r2.tanh()
    }

    #[test]
    fn cat_state_generator_variance() {
        let h = quadrature_generator(64);
        for z in [C64::new(0.0, 2.0), C64::new(2.0, 0.0)] {
            let plus = field(coherent_series(z, 64));
            let minus = field(coherent_series(-z, 64));
            let cat = (&plus + &minus).normalized().unwrap();
            let (m, var) = expectation_and_variance(&h, &cat).unwrap();
            assert_abs_diff_eq!(m, 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(var, cat_variance_formula(z), epsilon = 1e-9);
        }
        // Components separated along the generator's conjugate axis give 1 + 4|z|².
        let z = C64::new(0.0, 2.0);
        assert_abs_diff_eq!(cat_variance_formula(z), 17.0, epsilon = 1e-2);
    }

    #[test]
    fn rejects_non_hermitian_and_unnormalized() {
        let mut a = OperatorMatrix::zeros(4);
        a.set(1, 0, C64::new(1.0, 0.0));
        let v = FieldVector::vacuum(4);
        assert!(matches!(
            expectation_and_variance(&a, &v),
            Err(Error::NotHermitian(_))
        ));
        let half = v.scaled(C64::new(0.5, 0.0));
        assert!(matches!(
            expectation_and_variance(&number_operator(4), &half),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn displacement_composition_on_vacuum() {
        let n_max = 64;
        for (a, b) in [(0.4, 0.7), (1.2, -0.5), (-0.3, 1.0)] {
            let da = displacement_operator(a, n_max).unwrap();
            let db = displacement_operator(b, n_max).unwrap();
            let v = da
                .apply(&db.apply(&FieldVector::vacuum(n_max)).unwrap())
                .unwrap();
            let want = coherent_series(C64::new(a + b, 0.0), n_max);
            let interior = displacement_interior(a.abs().max(b.abs()), n_max);
            for (got, w) in v.amplitudes().iter().zip(&want).take(interior + 1) {
                assert!((got - w).norm() <= 1e-6);
            }
        }
    }
}
