//! The divergence barycenter `argmin_X sum_j w_j Phi(A_j, X)`.
//!
//! The objective is strictly convex on the open cone. The solver takes Newton
//! directions from a finite-difference Hessian of the analytic gradient
//! (falling back to the preconditioned direction `-X^1/2 G X^1/2` when the
//! Hessian is not numerically positive definite), with Armijo backtracking and
//! a safeguard that keeps every trial point positive definite.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;

use crate::divergence::{phi, phi_gradient_b};
use crate::error::{check_dims, Error, Result};
use crate::linalg::{
    c, eig_raw, EigenDecomposition, frobenius, hermitian_part, spd_result, spectral_power, CMatrix, HermitianMatrix,
    SpdMatrix,
};
use crate::means::f_mean_trace;
use crate::quadrature::stieltjes_integral_checked;

/// Tolerance on `sum w_j = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Trial points need `lambda_min > CONE_FLOOR * lambda_max`.
pub const CONE_FLOOR: f64 = 1e-10;
/// Dimension above which the solver skips the Hessian and uses the
/// preconditioned gradient direction.
pub const NEWTON_MAX_DIM: usize = 24;
/// Extra steps taken once the relative stopping test passes.
const POLISH_STEPS: usize = 3;

/// A positive probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("weights must be positive, got {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter(format!("weights must sum to 1, got {sum}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// Accept weights summing to 1 within `tol` and rescale them exactly.
    /// The flag reports whether rescaling was needed.
    pub fn normalized(weights: Vec<f64>, tol: f64) -> Result<(Self, bool)> {
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidParameter(format!("weights must sum to 1, got {sum}")));
        }
        let changed = (sum - 1.0).abs() > WEIGHT_SUM_TOL;
        let scaled = weights.iter().map(|w| w / sum).collect();
        Ok((Self::new(scaled)?, changed))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Clone, Debug)]
pub struct BarycenterProblem {
    matrices: Vec<SpdMatrix>,
    weights: WeightVector,
    t: f64,
}

impl BarycenterProblem {
    pub fn new(matrices: Vec<SpdMatrix>, weights: WeightVector, t: f64) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Empty);
        }
        check_dims(matrices.len(), weights.len())?;
        let m = matrices[0].dim();
        for a in &matrices[1..] {
            check_dims(m, a.dim())?;
        }
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "barycenter weight t must lie in (0, 1), got {t}"
            )));
        }
        Ok(Self { matrices, weights, t })
    }

    pub fn matrices(&self) -> &[SpdMatrix] {
        &self.matrices
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    fn terms(&self) -> impl Iterator<Item = (&SpdMatrix, f64)> {
        self.matrices.iter().zip(self.weights.as_slice().iter().copied())
    }

    /// Same problem with inputs and weights reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_dims(perm.len(), self.matrices.len())?;
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        let matrices = perm.iter().map(|&i| self.matrices[i].clone()).collect();
        let weights = WeightVector {
            weights: perm.iter().map(|&i| self.weights.weights[i]).collect(),
        };
        Self::new(matrices, weights, self.t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once `||grad||_F <= grad_tol * (1 + ||X||_F)`.
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub initial_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            grad_tol: 1e-9,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            initial_step: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} is out of range: {v}")));
        if self.max_iters == 0 {
            return bad("max_iters", 0.0);
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol", self.grad_tol);
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c", self.armijo_c);
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor", self.backtrack_factor);
        }
        if !(self.initial_step > 0.0) || !self.initial_step.is_finite() {
            return bad("initial_step", self.initial_step);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    /// Iteration budget exhausted; the best iterate is returned.
    MaxIters,
    /// No acceptable step could be found along the search direction.
    Stalled,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::MaxIters => "max-iters-exceeded",
            StopReason::Stalled => "line-search-stalled",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    pub final_grad_norm: f64,
    /// Objective value at the start and after every accepted step. Steps
    /// accepted inside the rounding noise of the objective repeat the
    /// previous value, so the trace never increases.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

/// `sum_j w_j Phi(A_j, X)`.
pub fn objective(p: &BarycenterProblem, x: &SpdMatrix) -> Result<f64> {
    check_dims(p.dim(), x.dim())?;
    p.terms().map(|(a, w)| Ok(w * phi(a, x, p.t)?.value)).sum()
}

/// Unclamped objective through the trace form, as used inside the solver.
fn objective_raw(p: &BarycenterProblem, x: &SpdMatrix) -> Result<f64> {
    let t = p.t;
    p.terms()
        .map(|(a, w)| Ok(w * ((1.0 - t) * a.trace() + t * x.trace() - f_mean_trace(a, x, t)?)))
        .sum()
}

/// `sum_j w_j grad_X Phi(A_j, X)`.
pub fn gradient(p: &BarycenterProblem, x: &SpdMatrix) -> Result<HermitianMatrix> {
    check_dims(p.dim(), x.dim())?;
    let n = p.dim();
    let mut g = CMatrix::zeros(n, n);
    for (a, w) in p.terms() {
        g += phi_gradient_b(a, x, p.t)?.as_matrix() * c(w);
    }
    HermitianMatrix::from_matrix(g)
}

fn hermitian_inverse(m: &CMatrix) -> Result<CMatrix> {
    Cholesky::new(hermitian_part(m))
        .map(|ch| ch.inverse())
        .ok_or(Error::NotPositiveDefinite { min: f64::NAN, max: f64::NAN })
}

fn split_point(m: &CMatrix) -> Result<f64> {
    let e = eig_raw(m)?;
    if !(e.min() > 0.0) {
        return Err(Error::IllConditioned { ratio: e.min() / e.max() });
    }
    Ok((e.min() * e.max()).sqrt())
}

/// Gradient from the integral representation
/// `tI - sum_j w_j sin(t pi)/pi int_0^inf R_j A_j^-2t R_j lambda^t dlambda`
/// with `R_j = (lambda A_j^-1 + X)^-1`, evaluated by quadrature.
pub fn gradient_quadrature(p: &BarycenterProblem, x: &SpdMatrix, nodes: usize) -> Result<HermitianMatrix> {
    check_dims(p.dim(), x.dim())?;
    let n = p.dim();
    let t = p.t;
    let scale = (t * PI).sin() / PI;
    let xm = x.as_matrix();
    let mut g = CMatrix::identity(n, n) * c(t);
    for (a, w) in p.terms() {
        let ainv = a.apply(|v| 1.0 / v);
        let a2t = a.apply(|v| v.powf(-2.0 * t));
        let half = a.apply(f64::sqrt);
        let split = split_point(&(&half * xm * &half))?;
        let integral = stieltjes_integral_checked(
            t,
            split,
            nodes,
            |lambda| {
                let r = hermitian_inverse(&(&ainv * c(lambda) + xm)).expect("resolvent of a positive definite matrix");
                &r * &a2t * &r * c(lambda)
            },
            |mu| {
                let q = hermitian_inverse(&(&ainv + xm * c(mu))).expect("resolvent of a positive definite matrix");
                &q * &a2t * &q
            },
        )?;
        g -= integral * c(w * scale);
    }
    HermitianMatrix::from_matrix(hermitian_part(&g))
}

/// `A^t = sin(t pi)/pi int_0^inf (lambda A^-1 + I)^-1 lambda^(t-1) dlambda`.
pub fn power_integral(a: &SpdMatrix, t: f64, nodes: usize) -> Result<SpdMatrix> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("t must lie in (0, 1), got {t}")));
    }
    let n = a.dim();
    let id = CMatrix::identity(n, n);
    let ainv = a.apply(|v| 1.0 / v);
    let split = (a.min_eigenvalue() * a.max_eigenvalue()).sqrt();
    let integral = stieltjes_integral_checked(
        t,
        split,
        nodes,
        |lambda| hermitian_inverse(&(&ainv * c(lambda) + &id)).expect("positive definite resolvent"),
        |mu| hermitian_inverse(&(&ainv + &id * c(mu))).expect("positive definite resolvent"),
    )?;
    spd_result(hermitian_part(&(integral * c((t * PI).sin() / PI))))
}

/// Orthonormal basis of the real space of `m x m` Hermitian matrices.
fn hermitian_basis(m: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        let mut e = CMatrix::zeros(m, m);
        e[(i, i)] = c(1.0);
        out.push(e);
    }
    for i in 0..m {
        for j in i + 1..m {
            let mut e = CMatrix::zeros(m, m);
            e[(i, j)] = c(s);
            e[(j, i)] = c(s);
            out.push(e);
            let mut e = CMatrix::zeros(m, m);
            e[(i, j)] = crate::Complex64::new(0.0, s);
            e[(j, i)] = crate::Complex64::new(0.0, -s);
            out.push(e);
        }
    }
    out
}

fn coords(basis: &[CMatrix], g: &CMatrix) -> DVector<f64> {
    DVector::from_iterator(
        basis.len(),
        basis.iter().map(|b| g.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()),
    )
}

fn in_cone(m: CMatrix) -> Option<SpdMatrix> {
    let y = SpdMatrix::from_matrix(m).ok()?;
    (y.min_eigenvalue() > CONE_FLOOR * y.max_eigenvalue()).then_some(y)
}

/// Newton direction `-H^-1 g` in Hermitian coordinates, `None` when the
/// finite-difference Hessian is not positive definite.
fn newton_direction(p: &BarycenterProblem, x: &SpdMatrix, g: &CMatrix) -> Option<CMatrix> {
    let m = x.dim();
    if m > NEWTON_MAX_DIM {
        return None;
    }
    let basis = hermitian_basis(m);
    let h = 1e-5 * x.min_eigenvalue();
    let cols: Vec<DVector<f64>> = basis
        .par_iter()
        .map(|b| {
            let plus = in_cone(x.as_matrix() + b * c(h))?;
            let minus = in_cone(x.as_matrix() - b * c(h))?;
            let gp = gradient(p, &plus).ok()?;
            let gm = gradient(p, &minus).ok()?;
            Some(coords(&basis, &((gp.as_matrix() - gm.as_matrix()) / c(2.0 * h))))
        })
        .collect::<Option<Vec<_>>>()?;
    let mut hess = DMatrix::from_columns(&cols);
    hess = (&hess + hess.transpose()) * 0.5;
    let chol = Cholesky::new(hess)?;
    let step = chol.solve(&(-coords(&basis, g)));
    if step.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut d = CMatrix::zeros(m, m);
    for (b, s) in basis.iter().zip(step.iter()) {
        d += b * c(*s);
    }
    Some(d)
}

/// The curve `X^1/2 exp(eta X^-1/2 D X^-1/2) X^1/2`, tangent to `D` at
/// `eta = 0`. It never leaves the cone, and eigenvalues shrink geometrically
/// rather than linearly, which keeps long Newton steps away from the boundary.
struct Geodesic {
    half: CMatrix,
    dir: EigenDecomposition,
}

impl Geodesic {
    fn new(x: &SpdMatrix, d: &CMatrix) -> Result<Self> {
        let half = x.apply(f64::sqrt);
        let ihalf = x.apply(|v| 1.0 / v.sqrt());
        let dir = eig_raw(&(&ihalf * d * &ihalf))?;
        Ok(Self { half, dir })
    }

    fn at(&self, eta: f64) -> CMatrix {
        let e = CMatrix::from_diagonal(&self.dir.eigenvalues.map(|m| c((eta * m).exp())));
        hermitian_part(&(&self.half * self.dir.out_of_eigenbasis(&e) * &self.half))
    }
}

fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn solve(p: &BarycenterProblem, cfg: &SolverConfig) -> Result<(SpdMatrix, SolverReport)> {
    let n = p.dim();
    let mut x0 = CMatrix::zeros(n, n);
    for (a, w) in p.terms() {
        x0 += a.as_matrix() * c(w);
    }
    solve_from(p, cfg, &spd_result(x0)?)
}

/// [`solve`] started from a caller-supplied positive definite point.
pub fn solve_from(p: &BarycenterProblem, cfg: &SolverConfig, x0: &SpdMatrix) -> Result<(SpdMatrix, SolverReport)> {
    cfg.validate()?;
    check_dims(p.dim(), x0.dim())?;
    let scale: f64 = p.terms().map(|(a, w)| w * a.trace()).sum::<f64>() + x0.trace();
    let mut x = x0.clone();
    let mut f = objective_raw(p, &x)?;
    let mut g = gradient(p, &x)?.into_matrix();
    let mut trace = vec![f];
    let mut iterations = 0;
    let mut stop = StopReason::MaxIters;

    let mut polish = 0;
    let mut fallback = None;
    while iterations < cfg.max_iters {
        let gn = frobenius(&g);
        let done = gn <= cfg.grad_tol * (1.0 + x.frobenius_norm());
        if done {
            stop = StopReason::Converged;
            // Newton converges quadratically here, so a few extra steps push
            // the gradient under the absolute tolerance as well
            if gn <= cfg.grad_tol || polish == POLISH_STEPS {
                break;
            }
            if polish == 0 {
                fallback = Some((x.clone(), g.clone(), trace.len(), iterations));
            }
            polish += 1;
        }
        let mut d = newton_direction(p, &x, &g).unwrap_or_else(|| {
            let half = x.apply(f64::sqrt);
            -(&half * &g * &half)
        });
        let mut slope = inner(&g, &d);
        if !(slope < 0.0) {
            d = -g.clone();
            slope = -gn * gn;
        }

        let path = Geodesic::new(&x, &d)?;
        let noise = 64.0 * f64::EPSILON * (f.abs() + scale);
        let mut eta = cfg.initial_step;
        let mut accepted = None;
        for _ in 0..80 {
            if let Some(y) = in_cone(path.at(eta)) {
                let fy = objective_raw(p, &y)?;
                let decrease = cfg.armijo_c * eta * slope;
                if fy <= f + decrease {
                    let gy = gradient(p, &y)?.into_matrix();
                    accepted = Some((y, fy, gy));
                    break;
                }
                // Near the minimum the predicted decrease drops below the
                // rounding noise of the objective, so the gradient norm takes
                // over as the merit function.
                if decrease.abs() <= noise && fy <= f + noise {
                    let gy = gradient(p, &y)?.into_matrix();
                    if frobenius(&gy) <= (1.0 - 0.5 * cfg.armijo_c * eta) * gn {
                        accepted = Some((y, fy, gy));
                        break;
                    }
                }
            }
            eta *= cfg.backtrack_factor;
        }
        let Some((y, fy, gy)) = accepted else {
            if !done {
                stop = StopReason::Stalled;
            }
            break;
        };
        x = y;
        // a step accepted inside the noise band may read as a rise in the
        // last bits; the trace keeps its previous value then
        f = fy.min(f);
        g = gy;
        trace.push(f);
        iterations += 1;
    }
    let within = |x: &SpdMatrix, g: &CMatrix| frobenius(g) <= cfg.grad_tol * (1.0 + x.frobenius_norm());
    if let Some((x0, g0, len, it)) = fallback {
        if !within(&x, &g) || frobenius(&g) > frobenius(&g0) {
            (x, g, iterations) = (x0, g0, it);
            trace.truncate(len);
        }
        stop = StopReason::Converged;
    } else if stop == StopReason::MaxIters && within(&x, &g) {
        stop = StopReason::Converged;
    }
    let final_grad_norm = frobenius(&g);
    Ok((
        x,
        SolverReport {
            iterations,
            final_grad_norm,
            objective_trace: trace,
            converged: stop == StopReason::Converged,
            stop_reason: stop,
        },
    ))
}

/// `(sum_j w_j A_j^(1-t))^(1/(1-t))` for pairwise commuting inputs.
pub fn commuting_closed_form(p: &BarycenterProblem) -> Result<SpdMatrix> {
    let ms = p.matrices();
    for i in 0..ms.len() {
        for j in i + 1..ms.len() {
            let (a, b) = (ms[i].as_matrix(), ms[j].as_matrix());
            let norm = frobenius(&(a * b - b * a));
            if norm > 1e-8 * ms[i].frobenius_norm() * ms[j].frobenius_norm() {
                return Err(Error::NotCommuting { norm });
            }
        }
    }
    let t = p.t;
    let n = p.dim();
    let mut sum = CMatrix::zeros(n, n);
    for (a, w) in p.terms() {
        sum += a.apply(|v| v.powf(1.0 - t)) * c(w);
    }
    spectral_power(&spd_result(hermitian_part(&sum))?, 1.0 / (1.0 - t))
}
