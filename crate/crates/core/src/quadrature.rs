//! Gauss-Legendre quadrature for the Stieltjes-type integrals
//! `int_0^inf g(lambda) lambda^(t-1) dlambda` behind the integral
//! representations of matrix powers.
//!
//! The half line is split at a scale `c` taken from the spectrum of the
//! integrand. On `[0, c]` the substitution `lambda = c u^(k1/t)` absorbs the
//! `lambda^(t-1)` singularity; on `[c, inf)` the substitution
//! `lambda = c u^(-k2/(1-t))` compactifies the algebraic tail. Both pieces are
//! then smooth on `[0, 1]` and are integrated with Gauss-Legendre rules. The
//! integers `k1 = ceil(2t)`, `k2 = ceil(2(1-t))` keep the leftover
//! fractional powers of `u` at order two or higher.

use crate::error::{Error, Result};
use crate::linalg::{c, frobenius, CMatrix};

/// Minimum total node count accepted by the matrix integrators.
pub const MIN_NODES: usize = 16;
/// Default total node count.
pub const DEFAULT_NODES: usize = 256;
/// Largest relative change tolerated when the node count is doubled.
pub const DOUBLING_TOL: f64 = 1e-6;

/// Gauss-Legendre rule mapped to `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 0 { 1.0 } else { p1 };
                let pn1 = if n <= 1 { 1.0 } else { p0 };
                dp = nf * (x * pn - pn1) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            nodes.push(0.5 * (1.0 + x));
            weights.push(1.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// `int_0^inf g(lambda) lambda^(t-1) dlambda` for `t` in `(0, 1)` with
/// `g` bounded near zero and `O(1/lambda)` at infinity.
///
/// `near(lambda)` evaluates `g(lambda)` for `lambda <= split`; `far(mu)`
/// evaluates `g(1/mu) / mu` for `mu <= 1 / split`, which stays finite as
/// `mu -> 0`. `nodes` is the total number of evaluation points.
pub fn stieltjes_integral<N, F>(t: f64, split: f64, nodes: usize, near: N, far: F) -> CMatrix
where
    N: Fn(f64) -> CMatrix,
    F: Fn(f64) -> CMatrix,
{
    let k1 = (2.0 * t).ceil().max(1.0);
    let k2 = (2.0 * (1.0 - t)).ceil().max(1.0);
    let n1 = nodes / 2;
    let n2 = nodes - n1;
    let r1 = GaussLegendre::new(n1);
    let r2 = GaussLegendre::new(n2);

    let mut acc: Option<CMatrix> = None;
    let mut add = |m: CMatrix| match acc.as_mut() {
        Some(a) => *a += m,
        None => acc = Some(m),
    };

    let s1 = split.powf(t) * k1 / t;
    for (u, w) in r1.nodes.iter().zip(&r1.weights) {
        let lambda = split * u.powf(k1 / t);
        add(near(lambda) * c(w * s1 * u.powf(k1 - 1.0)));
    }
    let s2 = split.powf(t - 1.0) * k2 / (1.0 - t);
    for (u, w) in r2.nodes.iter().zip(&r2.weights) {
        let mu = u.powf(k2 / (1.0 - t)) / split;
        add(far(mu) * c(w * s2 * u.powf(k2 - 1.0)));
    }
    acc.expect("at least one quadrature node")
}

/// [`stieltjes_integral`] at `nodes`, verified against `2 * nodes`.
pub(crate) fn stieltjes_integral_checked<N, F>(
    t: f64,
    split: f64,
    nodes: usize,
    near: N,
    far: F,
) -> Result<CMatrix>
where
    N: Fn(f64) -> CMatrix,
    F: Fn(f64) -> CMatrix,
{
    if nodes < MIN_NODES {
        return Err(Error::InvalidParameter(format!(
            "quadrature needs at least {MIN_NODES} nodes, got {nodes}"
        )));
    }
    let coarse = stieltjes_integral(t, split, nodes, &near, &far);
    let fine = stieltjes_integral(t, split, 2 * nodes, &near, &far);
    let change = frobenius(&(&coarse - &fine)) / frobenius(&fine).max(f64::MIN_POSITIVE);
    if !(change <= DOUBLING_TOL) {
        return Err(Error::QuadratureNotConverged { change });
    }
    Ok(coarse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn legendre_rule_is_exact_on_polynomials() {
        for n in [1, 2, 5, 16, 128] {
            let r = GaussLegendre::new(n);
            assert_relative_eq!(r.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            let deg = 2 * n - 1;
            let v = r.integrate(|x| x.powi(deg as i32));
            assert_relative_eq!(v, 1.0 / (deg as f64 + 1.0), max_relative = 1e-13);
        }
    }

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, c(v))
    }

    #[test]
    fn scalar_power_representation() {
        // a^t = sin(t pi)/pi int_0^inf a / (lambda + a) lambda^(t-1) dlambda
        for t in [0.01, 0.1, 0.3, 0.5, 0.9, 0.99] {
            for a in [1e-2, 0.3, 1.0, 7.0, 1e2] {
                let v = stieltjes_integral(t, 1.0, 256, |l| scalar(a / (l + a)), |mu| scalar(a / (1.0 + a * mu)));
                let got = (t * PI).sin() / PI * v[(0, 0)].re;
                assert_relative_eq!(got, a.powf(t), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn scalar_derivative_representation() {
        // t a^(t-1) = sin(t pi)/pi int_0^inf lambda^t / (lambda + a)^2 dlambda
        for t in [0.1, 0.5, 0.9] {
            for a in [1e-2, 1.0, 1e2] {
                let v = stieltjes_integral(
                    t,
                    1.0,
                    256,
                    |l| scalar(l / (l + a).powi(2)),
                    |mu| scalar(1.0 / (1.0 + a * mu).powi(2)),
                );
                let got = (t * PI).sin() / PI * v[(0, 0)].re;
                assert_relative_eq!(got, t * a.powf(t - 1.0), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn too_few_nodes_rejected() {
        let r = stieltjes_integral_checked(0.5, 1.0, 8, |_| scalar(1.0), |_| scalar(1.0));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }
}
