//! The divergence `Phi(A, B) = tr[A nabla_t B - F_t(A, B)]`, its gradient in
//! the second argument and the axiom and invariance checks.

use crate::error::{check_dims, Error, Result};
use crate::linalg::{c, dk_power, eig_raw, hermitian_part, CMatrix, HermitianMatrix, SpdMatrix, Unitary};
use crate::means::{f_mean, f_mean_trace};
use crate::order::Verdict;

/// Relative window below zero inside which `Phi` is clamped to zero.
pub const CLAMP_TOL: f64 = 1e-10;
/// Relative tolerance for the unitary and tensor invariance identities.
pub const INVARIANCE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceValue {
    pub value: f64,
    pub t: f64,
}

fn check_unit(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("t must lie in [0, 1], got {t}")));
    }
    Ok(())
}

fn check_open_unit(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("t must lie in (0, 1), got {t}")));
    }
    Ok(())
}

/// `(1-t) tr A + t tr B - tr F_t(A, B)` without clamping.
pub fn phi_raw(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    check_unit(t)?;
    let f = f_mean(a, b, t)?;
    Ok((1.0 - t) * a.trace() + t * b.trace() - f.trace())
}

/// Identical inputs short-circuit to exactly 0, since `F_t(A, A) = A`.
pub fn phi(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<DivergenceValue> {
    let raw = phi_raw(a, b, t)?;
    if a.as_matrix() == b.as_matrix() {
        return Ok(DivergenceValue { value: 0.0, t });
    }
    let floor = -CLAMP_TOL * (a.trace() + b.trace());
    if raw < floor {
        return Err(Error::NegativityViolation { value: raw, floor });
    }
    Ok(DivergenceValue {
        value: raw.max(0.0),
        t,
    })
}

/// `t I - A^1/2 DK_{s^t}(S)[A^(1-2t)] A^1/2` with `S = A^1/2 B A^1/2`.
pub fn phi_gradient_b(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<HermitianMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_open_unit(t)?;
    let n = a.dim();
    let half = a.apply(f64::sqrt);
    let s = eig_raw(&hermitian_part(&(&half * b.as_matrix() * &half)))?;
    if !(s.min() > 0.0) {
        return Err(Error::IllConditioned { ratio: s.min() / s.max() });
    }
    let w = a.apply(|x| x.powf(1.0 - 2.0 * t));
    let dk = dk_power(&s, t, &w);
    let g = CMatrix::identity(n, n) * c(t) - &half * dk * &half;
    HermitianMatrix::from_matrix(hermitian_part(&g))
}

/// Second derivative of `s -> Phi(A, B + sY)` at `s = 0` by central differences.
pub fn phi_hessian_quadform(a: &SpdMatrix, b: &SpdMatrix, t: f64, y: &HermitianMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    check_dims(a.dim(), y.dim())?;
    check_open_unit(t)?;
    let ynorm = y.operator_norm()?;
    if ynorm == 0.0 {
        return Ok(0.0);
    }
    let mut h = 1e-4 * (1.0 + b.operator_norm());
    // keep B +- hY inside the cone
    h = h.min(0.5 * b.min_eigenvalue() / ynorm);
    let shifted = |s: f64| SpdMatrix::from_matrix(b.as_matrix() + y.as_matrix() * c(s));
    let plus = phi_raw(a, &shifted(h)?, t)?;
    let minus = phi_raw(a, &shifted(-h)?, t)?;
    let mid = phi_raw(a, b, t)?;
    Ok((plus - 2.0 * mid + minus) / (h * h))
}

/// Aggregate of the three axioms over a batch of samples.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    /// `min Phi(A, B) / (tr A + tr B)`.
    pub nonnegativity_margin: f64,
    /// `max |Phi(A, A)|`.
    pub identity_gap: f64,
    /// `max ||grad_B Phi(A, A)||_F`.
    pub gradient_norm_on_diagonal: f64,
    /// `min D^2 Phi(A, A)[Y, Y] / ||Y||_F^2`.
    pub min_hessian_quadform: f64,
    pub samples: usize,
}

impl Default for AxiomReport {
    fn default() -> Self {
        Self {
            nonnegativity_margin: f64::INFINITY,
            identity_gap: 0.0,
            gradient_norm_on_diagonal: 0.0,
            min_hessian_quadform: f64::INFINITY,
            samples: 0,
        }
    }
}

impl AxiomReport {
    /// Evaluate all three axioms on `(A, B)` with tangent direction `Y`.
    pub fn record(&mut self, a: &SpdMatrix, b: &SpdMatrix, y: &HermitianMatrix, t: f64) -> Result<()> {
        let scale = a.trace() + b.trace();
        let v = phi_raw(a, b, t)?;
        self.nonnegativity_margin = self.nonnegativity_margin.min(v / scale);
        self.identity_gap = self.identity_gap.max(phi_raw(a, a, t)?.abs());
        if t > 0.0 && t < 1.0 {
            let g = phi_gradient_b(a, a, t)?;
            self.gradient_norm_on_diagonal = self.gradient_norm_on_diagonal.max(g.frobenius_norm());
            let yn = y.frobenius_norm();
            if yn > 0.0 {
                let q = phi_hessian_quadform(a, a, t, y)? / (yn * yn);
                self.min_hessian_quadform = self.min_hessian_quadform.min(q);
            }
        }
        self.samples += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) {
        self.nonnegativity_margin = self.nonnegativity_margin.min(other.nonnegativity_margin);
        self.identity_gap = self.identity_gap.max(other.identity_gap);
        self.gradient_norm_on_diagonal = self.gradient_norm_on_diagonal.max(other.gradient_norm_on_diagonal);
        self.min_hessian_quadform = self.min_hessian_quadform.min(other.min_hessian_quadform);
        self.samples += other.samples;
    }
}

/// Unitary and tensor-product invariance of `Phi`.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub base: f64,
    pub unitary: f64,
    pub tensor: f64,
    /// `|Phi(UAU*, UBU*) - Phi(A, B)| / (tr A + tr B)`.
    pub unitary_gap: f64,
    /// `|Phi(A (x) rho, B (x) rho) - Phi(A, B)| / (tr A + tr B)`.
    pub tensor_gap: f64,
}

impl InvarianceReport {
    pub fn holds(&self) -> bool {
        Verdict::holds(self)
    }
}

impl Verdict for InvarianceReport {
    fn score(&self) -> Option<f64> {
        Some(-self.unitary_gap.max(self.tensor_gap) / INVARIANCE_TOL)
    }
}

pub fn verify_invariance(a: &SpdMatrix, b: &SpdMatrix, t: f64, u: &Unitary, rho: &SpdMatrix) -> Result<InvarianceReport> {
    check_dims(a.dim(), b.dim())?;
    check_dims(a.dim(), u.dim())?;
    if (rho.trace() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "rho must have unit trace, got {}",
            rho.trace()
        )));
    }
    let scale = a.trace() + b.trace();
    let base = phi_raw(a, b, t)?;
    let unitary = phi_raw(&a.congruence(u)?, &b.congruence(u)?, t)?;
    let tensor = phi_raw(&a.kron(rho)?, &b.kron(rho)?, t)?;
    Ok(InvarianceReport {
        base,
        unitary,
        tensor,
        unitary_gap: (unitary - base).abs() / scale,
        tensor_gap: (tensor - base).abs() / scale,
    })
}

/// Concavity gaps of `f(X) = tr F_t(A, X)` along the segment from `X` to `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcavityReport {
    /// `(lambda, f((1-l)X + lY) - (1-l) f(X) - l f(Y))`.
    pub gaps: Vec<(f64, f64)>,
    pub scale: f64,
    /// Whether `X` and `Y` are far enough apart to demand a strictly positive gap.
    pub distinct: bool,
}

impl ConcavityReport {
    pub fn min_gap(&self) -> f64 {
        self.gaps.iter().map(|g| g.1).fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self) -> bool {
        Verdict::holds(self)
    }
}

impl Verdict for ConcavityReport {
    fn score(&self) -> Option<f64> {
        let tol = 1e-10 * self.scale;
        let mut s = f64::INFINITY;
        for &(l, gap) in &self.gaps {
            s = s.min(gap / tol);
            if self.distinct && l > 0.0 && l < 1.0 {
                // strict: a nonpositive gap counts as a violation
                s = s.min(if gap > 0.0 { 0.0 } else { -1.0 + gap / tol - f64::EPSILON });
            }
        }
        Some(s)
    }
}

pub fn verify_strict_concavity(
    a: &SpdMatrix,
    x: &SpdMatrix,
    y: &SpdMatrix,
    t: f64,
    lambda_grid: &[f64],
) -> Result<ConcavityReport> {
    check_dims(a.dim(), x.dim())?;
    check_dims(a.dim(), y.dim())?;
    check_open_unit(t)?;
    if let Some(l) = lambda_grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::InvalidParameter(format!("lambda must lie in [0, 1], got {l}")));
    }
    let fx = f_mean_trace(a, x, t)?;
    let fy = f_mean_trace(a, y, t)?;
    let scale = a.trace() + x.trace() + y.trace();
    let mut gaps = Vec::with_capacity(lambda_grid.len());
    for &l in lambda_grid {
        let m = SpdMatrix::from_matrix(x.as_matrix() * c(1.0 - l) + y.as_matrix() * c(l))?;
        let fm = f_mean_trace(a, &m, t)?;
        gaps.push((l, fm - (1.0 - l) * fx - l * fy));
    }
    let distinct = crate::linalg::frobenius(&(x.as_matrix() - y.as_matrix())) > 1e-6 * scale;
    Ok(ConcavityReport { gaps, scale, distinct })
}

/// `tr F_t(rho, sigma) <= (1 - 2t) + 2t tr(rho^1/2 sigma rho^1/2)^1/2 <= 1` for
/// density matrices and `t` in `[0, 1/2]`. Returns the two relative margins.
pub fn fidelity_split(rho: &SpdMatrix, sigma: &SpdMatrix, t: f64) -> Result<(f64, f64)> {
    check_dims(rho.dim(), sigma.dim())?;
    if !(0.0..=0.5).contains(&t) {
        return Err(Error::InvalidParameter(format!("t must lie in [0, 1/2], got {t}")));
    }
    let tf = f_mean(rho, sigma, t)?.trace();
    let half = rho.apply(f64::sqrt);
    let s = eig_raw(&hermitian_part(&(&half * sigma.as_matrix() * &half)))?;
    let fidelity: f64 = s.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).sum();
    let mid = (1.0 - 2.0 * t) + 2.0 * t * fidelity;
    Ok((mid - tf, 1.0 - mid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_spd;
    use approx::assert_relative_eq;

    #[test]
    fn scalar_values() {
        let a = SpdMatrix::diag(&[1.0]).unwrap();
        let b = SpdMatrix::diag(&[4.0]).unwrap();
        assert_relative_eq!(phi(&a, &b, 0.5).unwrap().value, 0.5, epsilon = 1e-14);
        let x = random_spd(4, 1e2, 1).unwrap();
        assert_eq!(phi(&x, &x, 0.3).unwrap().value, 0.0);
        assert!(phi(&a, &b, 1.5).is_err());
    }

    #[test]
    fn scalar_gradient() {
        for (a, b, t) in [(1.0, 4.0, 0.5), (2.0, 0.3, 0.2), (5.0, 7.0, 0.9)] {
            let g = phi_gradient_b(&SpdMatrix::diag(&[a]).unwrap(), &SpdMatrix::diag(&[b]).unwrap(), t).unwrap();
            let want = t - t * f64::powf(a, 1.0 - t) * f64::powf(b, t - 1.0);
            assert_relative_eq!(g.entry(0, 0).re, want, epsilon = 1e-13);
        }
        let a = SpdMatrix::diag(&[1.0]).unwrap();
        assert!(matches!(phi_gradient_b(&a, &a, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(phi_gradient_b(&a, &a, 1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn scalar_hessian() {
        let one = SpdMatrix::diag(&[1.0]).unwrap();
        let y = HermitianMatrix::diag(&[1.0]).unwrap();
        let q = phi_hessian_quadform(&one, &one, 0.5, &y).unwrap();
        assert_relative_eq!(q, 0.25, epsilon = 1e-6);
        let z = HermitianMatrix::zeros(1);
        assert_eq!(phi_hessian_quadform(&one, &one, 0.5, &z).unwrap(), 0.0);
    }

    #[test]
    fn invariance_trivial() {
        let a = random_spd(2, 10.0, 3).unwrap();
        let b = random_spd(2, 10.0, 4).unwrap();
        let r = verify_invariance(&a, &b, 0.4, &Unitary::identity(2), &SpdMatrix::identity(1)).unwrap();
        assert!(r.holds() && r.unitary_gap == 0.0);
        let bad = SpdMatrix::diag(&[0.5, 0.6]).unwrap();
        assert!(verify_invariance(&a, &b, 0.4, &Unitary::identity(2), &bad).is_err());
    }

    #[test]
    fn concavity_examples() {
        let a = SpdMatrix::diag(&[2.0]).unwrap();
        let x = SpdMatrix::diag(&[1.0]).unwrap();
        let y = SpdMatrix::diag(&[9.0]).unwrap();
        let r = verify_strict_concavity(&a, &x, &y, 0.5, &[0.25, 0.5, 0.75]).unwrap();
        assert!(r.distinct && r.holds() && r.min_gap() > 0.0);
        let r = verify_strict_concavity(&a, &x, &x, 0.5, &[0.0, 0.5, 1.0]).unwrap();
        assert!(!r.distinct && r.holds());
        assert!(r.gaps.iter().all(|g| g.1.abs() < 1e-14));
    }

    #[test]
    fn fidelity_split_on_states() {
        let rho = random_spd(3, 10.0, 8).unwrap();
        let rho = rho.scaled(1.0 / rho.trace()).unwrap();
        let sigma = random_spd(3, 10.0, 9).unwrap();
        let sigma = sigma.scaled(1.0 / sigma.trace()).unwrap();
        for t in [0.0, 0.1, 0.25, 0.5] {
            let (m1, m2) = fidelity_split(&rho, &sigma, t).unwrap();
            assert!(m1 >= -1e-12 && m2 >= -1e-12, "{t}: {m1} {m2}");
        }
    }
}
