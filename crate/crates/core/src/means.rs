//! Two-variable matrix means and the distances attached to them.
//!
//! All means take `t` as the weight on the second argument. `t = 0` returns the
//! first argument and `t = 1` the second one verbatim; every other value goes
//! through the spectral calculus of [`crate::linalg`].

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dims, Error, Result};
use crate::linalg::{
    c, eig_raw, frobenius, hermitian_part, pow_raw, spd_result, spectral_exp, CMatrix,
    HermitianMatrix, SpdMatrix,
};

/// Weight `t` and, for the Renyi quantity, the order `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanParams {
    pub t: f64,
    pub z: Option<f64>,
}

impl MeanParams {
    pub fn new(t: f64, z: Option<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("t must lie in [0, 1], got {t}")));
        }
        if let Some(z) = z {
            if !(z > 0.0) || !z.is_finite() {
                return Err(Error::InvalidParameter(format!("z must be positive, got {z}")));
            }
        }
        Ok(Self { t, z })
    }
}

fn check_finite_t(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("t must be finite, got {t}")))
    }
}

fn check_unit_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("t must lie in [0, 1], got {t}")))
    }
}

fn endpoint(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Option<SpdMatrix> {
    if t == 0.0 {
        Some(a.clone())
    } else if t == 1.0 {
        Some(b.clone())
    } else {
        None
    }
}

/// `(1 - t) A + t B`.
pub fn arithmetic_mean(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_unit_t(t)?;
    if let Some(e) = endpoint(a, b, t) {
        return Ok(e);
    }
    spd_result(a.as_matrix() * c(1.0 - t) + b.as_matrix() * c(t))
}

/// `[(1 - t) A^-1 + t B^-1]^-1`.
pub fn harmonic_mean(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_unit_t(t)?;
    if let Some(e) = endpoint(a, b, t) {
        return Ok(e);
    }
    let inv = a.apply(|x| 1.0 / x) * c(1.0 - t) + b.apply(|x| 1.0 / x) * c(t);
    spd_result(pow_raw(&inv, -1.0)?)
}

/// `A^1/2 (A^-1/2 M A^-1/2)^t A^1/2` with `M` given as a raw Hermitian matrix.
pub(crate) fn geometric_raw(a: &SpdMatrix, m: &CMatrix, t: f64) -> Result<CMatrix> {
    let half = a.apply(f64::sqrt);
    let mhalf = a.apply(|x| 1.0 / x.sqrt());
    let inner = hermitian_part(&(&mhalf * m * &mhalf));
    let p = pow_raw(&inner, t)?;
    Ok(hermitian_part(&(&half * p * &half)))
}

/// Metric geometric mean `A #_t B`. Any real `t` is accepted.
pub fn metric_geometric_mean(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_finite_t(t)?;
    if let Some(e) = endpoint(a, b, t) {
        return Ok(e);
    }
    spd_result(geometric_raw(a, b.as_matrix(), t)?)
}

/// `A^-1 # B`, the midpoint that both spectral means are built from.
fn inverse_geometric_midpoint(a: &SpdMatrix, b: &SpdMatrix) -> Result<CMatrix> {
    // A^-1 # B = A^-1/2 (A^1/2 B A^1/2)^1/2 A^-1/2
    inverse_weighted_geometric(a, b.as_matrix(), 0.5)
}

/// `A^-1 #_t M = A^-1/2 (A^1/2 M A^1/2)^t A^-1/2`.
pub(crate) fn inverse_weighted_geometric(a: &SpdMatrix, m: &CMatrix, t: f64) -> Result<CMatrix> {
    let half = a.apply(f64::sqrt);
    let mhalf = a.apply(|x| 1.0 / x.sqrt());
    let s = hermitian_part(&(&half * m * &half));
    let st = pow_raw(&s, t)?;
    Ok(hermitian_part(&(&mhalf * st * &mhalf)))
}

/// Spectral geometric mean `(A^-1 # B)^t A (A^-1 # B)^t`.
pub fn spectral_geometric_mean(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_finite_t(t)?;
    if let Some(e) = endpoint(a, b, t) {
        return Ok(e);
    }
    spd_result(spectral_geometric_raw(a, b, t)?)
}

pub(crate) fn spectral_geometric_raw(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<CMatrix> {
    let g = inverse_geometric_midpoint(a, b)?;
    let gt = pow_raw(&g, t)?;
    Ok(hermitian_part(&(&gt * a.as_matrix() * &gt)))
}

/// `F_t(A, M)` with the second argument as a raw Hermitian matrix.
pub(crate) fn f_mean_raw(a: &SpdMatrix, m: &CMatrix, t: f64) -> Result<CMatrix> {
    let g = inverse_weighted_geometric(a, m, t)?;
    let g_half = pow_raw(&g, 0.5)?;
    let a_pow = a.apply(|x| x.powf(2.0 - 2.0 * t));
    Ok(hermitian_part(&(&g_half * a_pow * &g_half)))
}

/// Weighted spectral geometric mean
/// `F_t(A, B) = (A^-1 #_t B)^1/2 A^(2-2t) (A^-1 #_t B)^1/2`.
///
/// Interpolates from `A` (`t = 0`) to `B` (`t = 1`) and agrees with the
/// spectral geometric mean at `t = 1/2`. Real `t` outside `[0, 1]` is accepted
/// since the order equivalence for `F_t <= I` holds for every real weight.
pub fn f_mean(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_finite_t(t)?;
    if let Some(e) = endpoint(a, b, t) {
        return Ok(e);
    }
    spd_result(f_mean_raw(a, b.as_matrix(), t)?)
}

/// `tr F_t(A, B)` through `tr[A^(1/2-t) (A^1/2 B A^1/2)^t A^(1/2-t)]`, which avoids
/// forming the mean itself.
pub fn f_mean_trace(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let half = a.apply(f64::sqrt);
    let s = hermitian_part(&(&half * b.as_matrix() * &half));
    let st = pow_raw(&s, t)?;
    let w = a.apply(|x| x.powf(1.0 - 2.0 * t));
    // tr[W^1/2 S^t W^1/2] = tr[W S^t]
    Ok((0..a.dim())
        .map(|i| (0..a.dim()).map(|k| (w[(i, k)] * st[(k, i)]).re).sum::<f64>())
        .sum())
}

/// Renyi quantity `Q_{t,z}(A, B) = (A^((1-t)/2z) B^(t/z) A^((1-t)/2z))^z`.
///
/// Evaluated as `U Sigma^(2z) U*` from the singular triplets of
/// `C = A^((1-t)/2z) B^(t/2z)`, read off the Hermitian matrix `[0 C; C* 0]`
/// whose eigenvalues are `+-sigma_i` with eigenvectors `(u_i, +-v_i)/sqrt 2`.
/// This keeps the conditioning of `C` rather than squaring it through `C C*`.
/// (The SVD routines of nalgebra 0.35 return inaccurate factors on a small
/// fraction of inputs, so they are not used.)
pub fn renyi_quantity(a: &SpdMatrix, b: &SpdMatrix, t: f64, z: f64) -> Result<SpdMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_finite_t(t)?;
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!("z must be positive, got {z}")));
    }
    let n = a.dim();
    let pa = a.apply(|x| x.powf((1.0 - t) / (2.0 * z)));
    let pb = b.apply(|x| x.powf(t / (2.0 * z)));
    let core = pa * pb;
    if core.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::IllConditioned { ratio: 0.0 });
    }
    let mut j = CMatrix::zeros(2 * n, 2 * n);
    j.view_mut((0, n), (n, n)).copy_from(&core);
    j.view_mut((n, 0), (n, n)).copy_from(&core.adjoint());
    let eig = eig_raw(&j)?;
    // ascending order: the top n eigenvalues are the singular values
    let sigma = eig.eigenvalues.rows(n, n);
    if !(sigma[0] > 0.0) {
        return Err(Error::IllConditioned { ratio: sigma[0] / sigma[n - 1] });
    }
    let u = eig.eigenvectors.view((0, n), (n, n)) * c(2f64.sqrt());
    let mut scaled = u.clone_owned();
    for (k, s) in sigma.iter().enumerate() {
        let f = s.powf(2.0 * z);
        scaled.column_mut(k).scale_mut(f);
    }
    spd_result(hermitian_part(&(scaled * u.adjoint())))
}

/// Wasserstein mean `A^-1/2 ((1-t) A + t (A^1/2 B A^1/2)^1/2)^2 A^-1/2`.
pub fn wasserstein_mean(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_unit_t(t)?;
    if let Some(e) = endpoint(a, b, t) {
        return Ok(e);
    }
    let half = a.apply(f64::sqrt);
    let mhalf = a.apply(|x| 1.0 / x.sqrt());
    let s = hermitian_part(&(&half * b.as_matrix() * &half));
    let root = pow_raw(&s, 0.5)?;
    let m = hermitian_part(&(a.as_matrix() * c(1.0 - t) + root * c(t)));
    let k = m * &mhalf;
    spd_result(k.adjoint() * k)
}

/// `exp((1 - t) log A + t log B)`.
pub fn log_euclidean(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_finite_t(t)?;
    if let Some(e) = endpoint(a, b, t) {
        return Ok(e);
    }
    let l = a.apply(f64::ln) * c(1.0 - t) + b.apply(f64::ln) * c(t);
    spectral_exp(&HermitianMatrix::from_matrix(l)?)
}

/// Affine-invariant distance `||log(A^-1/2 B A^-1/2)||_F`.
pub fn riemannian_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let mhalf = a.apply(|x| 1.0 / x.sqrt());
    let e = eig_raw(&(&mhalf * b.as_matrix() * &mhalf))?;
    if !(e.min() > 0.0) {
        return Err(Error::IllConditioned { ratio: e.min() / e.max() });
    }
    Ok(e.eigenvalues.iter().map(|v| v.ln().powi(2)).sum::<f64>().sqrt())
}

/// Bures-Wasserstein distance, `d^2 = tr(A + B) - 2 tr (A^1/2 B A^1/2)^1/2`.
pub fn bures_wasserstein_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let half = a.apply(f64::sqrt);
    let e = eig_raw(&(&half * b.as_matrix() * &half))?;
    let fidelity: f64 = e.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((a.trace() + b.trace() - 2.0 * fidelity).max(0.0).sqrt())
}

/// `2 ||log(A^-1 # B)||` in the operator norm.
pub fn spectral_semimetric(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    check_dims(a.dim(), b.dim())?;
    let g = inverse_geometric_midpoint(a, b)?;
    let e = eig_raw(&g)?;
    if !(e.min() > 0.0) {
        return Err(Error::IllConditioned { ratio: e.min() / e.max() });
    }
    Ok(2.0 * e.min().ln().abs().max(e.max().ln().abs()))
}

/// Relative Frobenius distance `||X - Y||_F / ||Y||_F`.
pub fn relative_difference(x: &CMatrix, y: &CMatrix) -> f64 {
    frobenius(&(x - y)) / frobenius(y).max(f64::MIN_POSITIVE)
}

/// The means selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeanKind {
    Arithmetic,
    Harmonic,
    Geometric,
    Spectral,
    F,
    Renyi,
    Wasserstein,
    LogEuclidean,
}

impl MeanKind {
    pub const ALL: [MeanKind; 8] = [
        MeanKind::Arithmetic,
        MeanKind::Harmonic,
        MeanKind::Geometric,
        MeanKind::Spectral,
        MeanKind::F,
        MeanKind::Renyi,
        MeanKind::Wasserstein,
        MeanKind::LogEuclidean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeanKind::Arithmetic => "arithmetic",
            MeanKind::Harmonic => "harmonic",
            MeanKind::Geometric => "geometric",
            MeanKind::Spectral => "spectral",
            MeanKind::F => "f",
            MeanKind::Renyi => "renyi",
            MeanKind::Wasserstein => "wasserstein",
            MeanKind::LogEuclidean => "logeuclidean",
        }
    }

    pub fn compute(self, a: &SpdMatrix, b: &SpdMatrix, params: &MeanParams) -> Result<SpdMatrix> {
        let t = params.t;
        match self {
            MeanKind::Arithmetic => arithmetic_mean(a, b, t),
            MeanKind::Harmonic => harmonic_mean(a, b, t),
            MeanKind::Geometric => metric_geometric_mean(a, b, t),
            MeanKind::Spectral => spectral_geometric_mean(a, b, t),
            MeanKind::F => f_mean(a, b, t),
            MeanKind::Renyi => {
                let z = params.z.ok_or_else(|| {
                    Error::InvalidParameter("the renyi mean requires the order z".into())
                })?;
                renyi_quantity(a, b, t, z)
            }
            MeanKind::Wasserstein => wasserstein_mean(a, b, t),
            MeanKind::LogEuclidean => log_euclidean(a, b, t),
        }
    }
}

impl fmt::Display for MeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeanKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown mean kind '{s}'")))
    }
}
