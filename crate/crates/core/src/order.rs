//! Log-majorization and report-style checks of the order, norm, trace and
//! eigenvalue inequalities satisfied by `F_t`.
//!
//! Every check returns a report carrying raw margins. The [`Verdict`] trait
//! condenses a report into a score measured in units of its own tolerance:
//! the check holds when the score is at least `-1`, and a skipped check (its
//! hypothesis did not hold) has no score.

use crate::error::{check_dims, Error, Result};
use crate::linalg::{
    c, eig_raw, hermitian_part, loewner_margin, pow_raw, spectral_power, CMatrix,
    HermitianMatrix, SpdMatrix, DEFAULT_ORDER_TOL,
};
use crate::means::{
    f_mean, f_mean_trace, renyi_quantity, spectral_geometric_mean,
    wasserstein_mean,
};

/// Tolerance on log partial products (absolute, in log space).
pub const MAJORIZATION_TOL: f64 = 1e-9;
/// Relative tolerance for identities such as the fixed point of `F_t`.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Relative slack for the norm and trace inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-10;

pub trait Verdict {
    /// Worst margin in units of the check's tolerance; `None` when skipped.
    fn score(&self) -> Option<f64>;

    fn holds(&self) -> bool {
        self.score().is_none_or(|s| s >= -1.0)
    }

    fn skipped(&self) -> bool {
        self.score().is_none()
    }
}

fn herm(m: CMatrix) -> Result<HermitianMatrix> {
    HermitianMatrix::from_matrix(m)
}

/// Result of comparing descending eigenvalue partial products.
#[derive(Clone, Debug, PartialEq)]
pub struct MajorizationVerdict {
    pub holds: bool,
    pub weak: bool,
    /// `prod_{i<=k} lambda_i(X)` for `k = 1..m`, eigenvalues descending.
    pub partial_products_lhs: Vec<f64>,
    pub partial_products_rhs: Vec<f64>,
    /// `min_k (log rhs_k - log lhs_k)`.
    pub worst_margin: f64,
    /// `|log det X - log det Y|`; only constrains the verdict when not weak.
    pub determinant_gap: f64,
    pub tol: f64,
}

impl Verdict for MajorizationVerdict {
    fn score(&self) -> Option<f64> {
        let mut s = self.worst_margin / self.tol;
        if !self.weak {
            s = s.min(-self.determinant_gap / self.tol);
        }
        Some(s)
    }
}

fn descending_log_spectrum(x: &SpdMatrix) -> Vec<f64> {
    x.eigenvalues().iter().rev().map(|v| v.ln()).collect()
}

/// `X <_log Y` (or the weak relation when `weak`), evaluated in log space.
pub fn log_majorizes(x: &SpdMatrix, y: &SpdMatrix, weak: bool, tol: f64) -> Result<MajorizationVerdict> {
    check_dims(x.dim(), y.dim())?;
    let lx = descending_log_spectrum(x);
    let ly = descending_log_spectrum(y);
    let (mut sx, mut sy) = (0.0, 0.0);
    let mut worst = f64::INFINITY;
    let mut lhs = Vec::with_capacity(lx.len());
    let mut rhs = Vec::with_capacity(ly.len());
    for (a, b) in lx.iter().zip(&ly) {
        sx += a;
        sy += b;
        worst = worst.min(sy - sx);
        lhs.push(sx.exp());
        rhs.push(sy.exp());
    }
    let determinant_gap = (sx - sy).abs();
    let holds = worst >= -tol && (weak || determinant_gap <= tol);
    Ok(MajorizationVerdict {
        holds,
        weak,
        partial_products_lhs: lhs,
        partial_products_rhs: rhs,
        worst_margin: worst,
        determinant_gap,
        tol,
    })
}

/// Both sides of `F_t(A, B) <= I  <=>  (A^1/2 B A^1/2)^t <= A^(2t-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub t: f64,
    pub lhs_margin: f64,
    pub rhs_margin: f64,
    pub lhs_holds: bool,
    pub rhs_holds: bool,
    pub agree: bool,
}

impl Verdict for EquivalenceReport {
    fn score(&self) -> Option<f64> {
        // disagreement is a violation of size equal to the smaller margin
        Some(if self.agree {
            0.0
        } else {
            -1.0 - self.lhs_margin.abs().min(self.rhs_margin.abs()) / DEFAULT_ORDER_TOL
        })
    }
}

pub fn check_equivalence_ft_leq_identity(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<EquivalenceReport> {
    check_dims(a.dim(), b.dim())?;
    let n = a.dim();
    let f = f_mean(a, b, t)?;
    let id = HermitianMatrix::identity(n);
    let lhs_margin = loewner_margin(&f, &id)?;

    let half = a.apply(f64::sqrt);
    let s = hermitian_part(&(&half * b.as_matrix() * &half));
    let st = herm(pow_raw(&s, t)?)?;
    let ap = herm(a.apply(|x| x.powf(2.0 * t - 1.0)))?;
    let rhs_margin = loewner_margin(&st, &ap)?;

    let lhs_holds = lhs_margin >= -DEFAULT_ORDER_TOL;
    let rhs_holds = rhs_margin >= -DEFAULT_ORDER_TOL;
    Ok(EquivalenceReport {
        t,
        lhs_margin,
        rhs_margin,
        lhs_holds,
        rhs_holds,
        agree: lhs_holds == rhs_holds,
    })
}

/// One conclusion of an implication check.
#[derive(Clone, Debug, PartialEq)]
pub struct Conclusion {
    pub label: String,
    pub margin: f64,
    pub holds: bool,
}

/// An implication: the conclusions are only asserted when the hypothesis holds.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicationReport {
    pub hypothesis_margin: f64,
    pub hypothesis_holds: bool,
    pub conclusions: Vec<Conclusion>,
}

impl ImplicationReport {
    pub fn skipped(&self) -> bool {
        !self.hypothesis_holds
    }
}

impl Verdict for ImplicationReport {
    fn score(&self) -> Option<f64> {
        if !self.hypothesis_holds {
            return None;
        }
        Some(
            self.conclusions
                .iter()
                .map(|c| c.margin / DEFAULT_ORDER_TOL)
                .fold(f64::INFINITY, f64::min),
        )
    }
}

/// `A #_t M` where both arguments are raw Hermitian positive definite matrices.
fn geometric_of_raw(a: &CMatrix, m: &CMatrix, t: f64) -> Result<CMatrix> {
    let e = eig_raw(a)?;
    if !(e.min() > 0.0) {
        return Err(Error::IllConditioned { ratio: e.min() / e.max() });
    }
    let half = e.map(f64::sqrt);
    let mhalf = e.map(|x| 1.0 / x.sqrt());
    let inner = hermitian_part(&(&mhalf * m * &mhalf));
    Ok(hermitian_part(&(&half * pow_raw(&inner, t)? * &half)))
}

/// If `F_t(A^-1, B) <= A^(2(t-1))` then `A^p #_t B^p <= I` for each `p >= 1`.
pub fn check_ando_hiai_implication(a: &SpdMatrix, b: &SpdMatrix, t: f64, p_list: &[f64]) -> Result<ImplicationReport> {
    check_dims(a.dim(), b.dim())?;
    if let Some(p) = p_list.iter().find(|p| !(**p >= 1.0)) {
        return Err(Error::InvalidParameter(format!("powers must be >= 1, got {p}")));
    }
    let ainv = a.inverse()?;
    let f = f_mean(&ainv, b, t)?;
    let bound = herm(a.apply(|x| x.powf(2.0 * (t - 1.0))))?;
    let hypothesis_margin = loewner_margin(&f, &bound)?;
    let hypothesis_holds = hypothesis_margin >= -DEFAULT_ORDER_TOL;
    let mut conclusions = Vec::new();
    if hypothesis_holds {
        let id = HermitianMatrix::identity(a.dim());
        for &p in p_list {
            let ap = a.apply(|x| x.powf(p));
            let bp = b.apply(|x| x.powf(p));
            let g = herm(geometric_of_raw(&ap, &bp, t)?)?;
            let margin = loewner_margin(&g, &id)?;
            conclusions.push(Conclusion {
                label: format!("A^{p} #_t B^{p} <= I"),
                margin,
                holds: margin >= -DEFAULT_ORDER_TOL,
            });
        }
    }
    Ok(ImplicationReport {
        hypothesis_margin,
        hypothesis_holds,
        conclusions,
    })
}

/// `F_t(A, A^(1/t - 1)) = A^(2-2t)`, and a perturbed second argument breaks it.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointReport {
    pub t: f64,
    pub residual: f64,
    pub perturbed_residual: f64,
}

impl FixedPointReport {
    pub fn equality_holds(&self) -> bool {
        self.residual <= IDENTITY_TOL
    }

    pub fn perturbation_breaks(&self) -> bool {
        self.perturbed_residual > 10.0 * IDENTITY_TOL
    }
}

impl Verdict for FixedPointReport {
    fn score(&self) -> Option<f64> {
        let eq = -self.residual / IDENTITY_TOL;
        let br = self.perturbed_residual / (10.0 * IDENTITY_TOL) - 2.0;
        Some(eq.min(br))
    }
}

pub fn check_fixed_point(a: &SpdMatrix, t: f64) -> Result<FixedPointReport> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!("t must lie in (0, 1], got {t}")));
    }
    let b = spectral_power(a, 1.0 / t - 1.0)?;
    let target = a.apply(|x| x.powf(2.0 - 2.0 * t));
    let rel = |m: &SpdMatrix| crate::means::relative_difference(m.as_matrix(), &target);
    let residual = rel(&f_mean(a, &b, t)?);
    let shifted = SpdMatrix::from_matrix(b.as_matrix() + CMatrix::identity(a.dim(), a.dim()) * c(0.1))?;
    let perturbed_residual = rel(&f_mean(a, &shifted, t)?);
    Ok(FixedPointReport {
        t,
        residual,
        perturbed_residual,
    })
}

/// `F_t(A, B) <= A^(2-2t)` together with `A <= I` implies `B <= A^-1`.
pub fn check_inverse_bound(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<ImplicationReport> {
    check_dims(a.dim(), b.dim())?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!("t must lie in (0, 1], got {t}")));
    }
    let f = f_mean(a, b, t)?;
    let bound = herm(a.apply(|x| x.powf(2.0 - 2.0 * t)))?;
    let id = HermitianMatrix::identity(a.dim());
    let hypothesis_margin = loewner_margin(&f, &bound)?.min(loewner_margin(a, &id)?);
    let hypothesis_holds = hypothesis_margin >= -DEFAULT_ORDER_TOL;
    let mut conclusions = Vec::new();
    if hypothesis_holds {
        let ainv = herm(a.apply(|x| 1.0 / x))?;
        let margin = loewner_margin(b, &ainv)?;
        conclusions.push(Conclusion {
            label: "B <= A^-1".into(),
            margin,
            holds: margin >= -DEFAULT_ORDER_TOL,
        });
    }
    Ok(ImplicationReport {
        hypothesis_margin,
        hypothesis_holds,
        conclusions,
    })
}

/// A scalar inequality `lhs <= rhs` checked with relative slack.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `(rhs - lhs) / |rhs|`.
    pub relative_margin: f64,
    pub slack: f64,
}

impl InequalityReport {
    fn new(lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            lhs,
            rhs,
            relative_margin: (rhs - lhs) / rhs.abs().max(f64::MIN_POSITIVE),
            slack,
        }
    }
}

impl Verdict for InequalityReport {
    fn score(&self) -> Option<f64> {
        Some(self.relative_margin / self.slack)
    }
}

/// `||F_t(A, B)|| <= ||A||^(1-t) ||B||^t` in the operator norm.
pub fn check_norm_bound(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<InequalityReport> {
    let f = f_mean(a, b, t)?;
    Ok(InequalityReport::new(
        f.operator_norm(),
        a.operator_norm().powf(1.0 - t) * b.operator_norm().powf(t),
        INEQUALITY_SLACK,
    ))
}

/// `tr F_t(A, B) <= (tr A)^(1-t) (tr B)^t`, plus agreement of the direct trace
/// with the trace form `tr[A^(1/2-t) (A^1/2 B A^1/2)^t A^(1/2-t)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceReport {
    pub inequality: InequalityReport,
    pub trace_form: f64,
    /// `|tr F - trace_form| / tr F`.
    pub formula_gap: f64,
}

impl Verdict for TraceReport {
    fn score(&self) -> Option<f64> {
        let s = self.inequality.score()?;
        Some(s.min(-self.formula_gap / INEQUALITY_SLACK))
    }
}

pub fn check_trace_inequality(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<TraceReport> {
    let direct = f_mean(a, b, t)?.trace();
    let trace_form = f_mean_trace(a, b, t)?;
    Ok(TraceReport {
        inequality: InequalityReport::new(
            direct,
            a.trace().powf(1.0 - t) * b.trace().powf(t),
            INEQUALITY_SLACK,
        ),
        trace_form,
        formula_gap: (direct - trace_form).abs() / direct.abs(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainLink {
    pub label: &'static str,
    pub verdict: MajorizationVerdict,
}

/// Per-link verdicts for `F_t <_log Q_{t,z}` and, for `t >= 1/2`,
/// `F_t <_log Q_{t,t} <_log A natural_t B <_wlog A diamond_t B`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    pub t: f64,
    pub z: f64,
    pub links: Vec<ChainLink>,
}

impl ChainReport {
    pub fn holds(&self) -> bool {
        self.links.iter().all(|l| l.verdict.holds)
    }
}

impl Verdict for ChainReport {
    fn score(&self) -> Option<f64> {
        self.links
            .iter()
            .filter_map(|l| l.verdict.score())
            .reduce(f64::min)
    }
}

pub fn check_log_majorization_chain(a: &SpdMatrix, b: &SpdMatrix, t: f64, z: f64) -> Result<ChainReport> {
    check_dims(a.dim(), b.dim())?;
    if !(z > 0.0 && z <= t && t <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "log-majorization requires 0 < z <= t <= 1, got t = {t}, z = {z}"
        )));
    }
    let tol = MAJORIZATION_TOL;
    let f = f_mean(a, b, t)?;
    let qz = renyi_quantity(a, b, t, z)?;
    let mut links = vec![ChainLink {
        label: "F_t <_log Q_{t,z}",
        verdict: log_majorizes(&f, &qz, false, tol)?,
    }];
    if t >= 0.5 {
        let qt = renyi_quantity(a, b, t, t)?;
        let sg = spectral_geometric_mean(a, b, t)?;
        let w = wasserstein_mean(a, b, t)?;
        links.push(ChainLink {
            label: "F_t <_log Q_{t,t}",
            verdict: log_majorizes(&f, &qt, false, tol)?,
        });
        links.push(ChainLink {
            label: "Q_{t,t} <_log A natural_t B",
            verdict: log_majorizes(&qt, &sg, false, tol)?,
        });
        links.push(ChainLink {
            label: "A natural_t B <_wlog A diamond_t B",
            verdict: log_majorizes(&sg, &w, true, tol)?,
        });
    }
    Ok(ChainReport { t, z, links })
}

/// `tr F_t <= tr Q_{t,t} <= tr(A natural_t B) <= tr(A diamond_t B) <= tr(A nabla_t B)`
/// for `t` in `[1/2, 1]`, as relative margins between consecutive traces.
pub fn trace_chain(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<Vec<InequalityReport>> {
    if !(0.5..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("trace chain requires t in [1/2, 1], got {t}")));
    }
    let traces = [
        f_mean(a, b, t)?.trace(),
        renyi_quantity(a, b, t, t)?.trace(),
        spectral_geometric_mean(a, b, t)?.trace(),
        wasserstein_mean(a, b, t)?.trace(),
        (1.0 - t) * a.trace() + t * b.trace(),
    ];
    Ok(traces
        .windows(2)
        .map(|w| InequalityReport::new(w[0], w[1], INEQUALITY_SLACK))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_spd;

    fn diag(v: &[f64]) -> SpdMatrix {
        SpdMatrix::diag(v).unwrap()
    }

    #[test]
    fn majorization_examples() {
        let v = log_majorizes(&diag(&[2.0, 2.0]), &diag(&[4.0, 1.0]), false, 1e-12).unwrap();
        assert!(v.holds);
        let v = log_majorizes(&diag(&[3.0, 1.0]), &diag(&[2.0, 2.0]), false, 1e-12).unwrap();
        assert!(!v.holds);
        assert!(v.worst_margin < 0.0);
        assert!((v.partial_products_lhs[0] - 3.0).abs() < 1e-15);
        let x = random_spd(4, 1e2, 3).unwrap();
        let v = log_majorizes(&x, &x, false, 1e-12).unwrap();
        assert!(v.holds && v.worst_margin.abs() < 1e-14);
        assert!(log_majorizes(&x, &diag(&[1.0]), true, 0.0).is_err());
    }

    #[test]
    fn weak_drops_determinant() {
        let x = diag(&[2.0, 1.0]);
        let y = diag(&[3.0, 1.0]);
        assert!(!log_majorizes(&x, &y, false, 1e-12).unwrap().holds);
        assert!(log_majorizes(&x, &y, true, 1e-12).unwrap().holds);
    }

    #[test]
    fn equivalence_examples() {
        let half = diag(&[0.5, 0.5]);
        let r = check_equivalence_ft_leq_identity(&half, &half, 0.5).unwrap();
        assert!(r.lhs_holds && r.rhs_holds && r.agree);
        let two = diag(&[2.0, 2.0]);
        let r = check_equivalence_ft_leq_identity(&two, &two, 0.5).unwrap();
        assert!(!r.lhs_holds && !r.rhs_holds && r.agree);
        assert!(r.holds());
    }

    #[test]
    fn ando_hiai_scalar_cases() {
        let half = diag(&[0.5]);
        let r = check_ando_hiai_implication(&half, &half, 0.5, &[1.0, 2.0, 4.0]).unwrap();
        assert!(r.hypothesis_holds);
        assert!(r.conclusions.iter().all(|c| c.holds));
        let one = diag(&[1.0]);
        let r = check_ando_hiai_implication(&one, &one, 0.5, &[1.0, 3.0]).unwrap();
        assert!(r.hypothesis_holds);
        assert!(r.conclusions.iter().all(|c| c.holds && c.margin.abs() < 1e-12));
        assert!(check_ando_hiai_implication(&one, &one, 0.5, &[0.5]).is_err());
    }

    #[test]
    fn fixed_point_examples() {
        let a = random_spd(3, 1e2, 5).unwrap();
        let r = check_fixed_point(&a, 1.0).unwrap();
        assert!(r.equality_holds());
        let r = check_fixed_point(&a, 0.5).unwrap();
        assert!(r.equality_holds() && r.perturbation_breaks());
        let r = check_fixed_point(&a, 0.3).unwrap();
        assert!(r.equality_holds() && r.perturbation_breaks(), "{r:?}");
        assert!(matches!(check_fixed_point(&a, 0.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn inverse_bound_examples() {
        let a = diag(&[0.5, 0.5]);
        let b = diag(&[1.0, 1.0]);
        let r = check_inverse_bound(&a, &b, 0.5).unwrap();
        // F = (1/2)^1/2 <= (1/2)^1 fails, so this sample is skipped
        assert!(r.skipped());
        let r = check_inverse_bound(&a, &diag(&[0.25, 0.25]), 0.5).unwrap();
        assert!(r.hypothesis_holds && r.holds());
        let i = diag(&[1.0, 1.0]);
        let r = check_inverse_bound(&i, &i, 0.7).unwrap();
        assert!(r.hypothesis_holds && r.conclusions[0].margin.abs() < 1e-14);
    }

    #[test]
    fn norm_and_trace_scalars() {
        let (a, b) = (diag(&[1.0]), diag(&[4.0]));
        let r = check_trace_inequality(&a, &b, 0.5).unwrap();
        assert!((r.inequality.lhs - 2.0).abs() < 1e-14 && (r.inequality.rhs - 2.0).abs() < 1e-14);
        assert!(r.holds());
        let r = check_norm_bound(&diag(&[3.0]), &diag(&[5.0]), 0.3).unwrap();
        assert!((r.lhs - 3.0_f64.powf(0.7) * 5.0_f64.powf(0.3)).abs() < 1e-14);
        assert!(r.holds());
        let x = random_spd(4, 1e3, 9).unwrap();
        let r = check_norm_bound(&x, &x, 0.4).unwrap();
        assert!(r.relative_margin.abs() < 1e-12);
        let r = check_trace_inequality(&x, &x, 0.4).unwrap();
        assert!(r.inequality.relative_margin.abs() < 1e-9);
    }

    #[test]
    fn chain_on_commuting_inputs() {
        let a = diag(&[1.0, 4.0, 0.5]);
        let b = diag(&[9.0, 1.0, 2.0]);
        let r = check_log_majorization_chain(&a, &b, 0.75, 0.5).unwrap();
        assert_eq!(r.links.len(), 4);
        assert!(r.holds());
        for l in &r.links[..3] {
            assert!(l.verdict.worst_margin.abs() < 1e-12 && l.verdict.determinant_gap < 1e-12);
        }
        let r = check_log_majorization_chain(&a, &b, 0.3, 0.2).unwrap();
        assert_eq!(r.links.len(), 1);
        assert!(check_log_majorization_chain(&a, &b, 0.3, 0.4).is_err());
        assert!(check_log_majorization_chain(&a, &b, 0.3, 0.0).is_err());
    }

    #[test]
    fn chain_on_random_inputs() {
        for seed in 0..30 {
            let a = random_spd(2 + seed as usize % 5, 1e3, 1000 + seed).unwrap();
            let b = random_spd(a.dim(), 1e3, 2000 + seed).unwrap();
            let r = check_log_majorization_chain(&a, &b, 0.8, 0.6).unwrap();
            assert!(r.holds(), "{r:?}");
            assert!(trace_chain(&a, &b, 0.8).unwrap().iter().all(|l| l.holds()));
        }
    }
}
