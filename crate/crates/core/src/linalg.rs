//! Dense Hermitian linear algebra on small complex matrices.
//!
//! Every matrix function in the crate goes through the spectral calculus
//! implemented here: a Hermitian matrix is diagonalized once, a scalar function
//! is applied to its eigenvalues, and the result is rebuilt and symmetrized.
//! Composite products of Hermitian factors drift off the Hermitian manifold in
//! floating point, so every constructor re-symmetrizes with `(X + X*) / 2`.

use nalgebra::{linalg::SymmetricEigen, DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dims, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Smallest admissible `lambda_min / lambda_max` for an [`SpdMatrix`].
pub const SPD_RATIO_FLOOR: f64 = 1e-12;
/// Below this `lambda_min / lambda_max` fractional powers are refused.
pub const POWER_RATIO_FLOOR: f64 = 1e-14;
/// Default relative slack for Loewner-order comparisons.
pub const DEFAULT_ORDER_TOL: f64 = 1e-10;
/// Relative gap under which two eigenvalues are treated as equal by the
/// Daleckii-Krein rule.
pub const EIGEN_TIE_TOL: f64 = 1e-12;

const EIG_MAX_ITERS: usize = 10_000;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `(X + X*) / 2`. Exactly Hermitian: entry `(i, j)` is the conjugate of `(j, i)`
/// bit for bit and the diagonal is real.
pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = c(m[(i, i)].re);
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    out
}

pub(crate) fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn real_trace(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// `U M U*`.
pub(crate) fn congruence_raw(u: &CMatrix, m: &CMatrix) -> CMatrix {
    u * m * u.adjoint()
}

/// An `m x m` complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl HermitianMatrix {
    /// Symmetrizes `m` unconditionally. Fails only for non-square or empty input.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            inner: hermitian_part(&m),
        })
    }

    /// Checks `|a_ij - conj(a_ji)| <= tol` for all entries before symmetrizing.
    pub fn from_matrix_checked(m: CMatrix, tol: f64) -> Result<Self> {
        if m.nrows() == m.ncols() {
            let n = m.nrows();
            let mut deviation = 0.0_f64;
            for i in 0..n {
                for j in i..n {
                    deviation = deviation.max((m[(i, j)] - m[(j, i)].conj()).norm());
                }
            }
            if !(deviation <= tol) {
                return Err(Error::NotHermitian { deviation });
            }
        }
        Self::from_matrix(m)
    }

    /// Builds from row-major entries.
    pub fn from_entries(dim: usize, entries: &[Complex64], tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidParameter(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::from_matrix_checked(CMatrix::from_row_slice(dim, dim, entries), tol)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = c(*v);
            }
        }
        Self::from_matrix(m)
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(values.len(), values.iter().map(|v| c(*v)));
        Self::from_matrix(CMatrix::from_diagonal(&d))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        real_trace(&self.inner)
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.inner)
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> Result<f64> {
        let e = eig_hermitian(self)?;
        Ok(e
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs())))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eig_hermitian(self)?.eigenvalues.iter().copied().collect())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eig_hermitian(self)?.eigenvalues[0])
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            inner: self.inner.map(|z| z * a),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Self::from_matrix(&self.inner + &other.inner)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Self::from_matrix(&self.inner - &other.inner)
    }

    /// Real Frobenius inner product `Re tr(self * other)`.
    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .inner
            .iter()
            .zip(other.inner.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            inner: hermitian_part(&self.inner.kronecker(&other.inner)),
        }
    }

    pub fn congruence(&self, u: &Unitary) -> Result<Self> {
        check_dims(self.dim(), u.dim())?;
        Self::from_matrix(congruence_raw(&u.inner, &self.inner))
    }
}

impl AsRef<HermitianMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &HermitianMatrix {
        self
    }
}

/// `A = U diag(lambda) U*` with eigenvalues ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `U diag(f(lambda)) U*`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, lam) in self.eigenvalues.iter().enumerate() {
            let s = f(*lam);
            for i in 0..u.nrows() {
                scaled[(i, j)] *= s;
            }
        }
        hermitian_part(&(scaled * u.adjoint()))
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|x| x)
    }

    /// `U* M U`.
    pub(crate) fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * m * &self.eigenvectors
    }

    /// `U M U*`.
    pub(crate) fn out_of_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }
}

pub(crate) fn eig_raw(m: &CMatrix) -> Result<EigenDecomposition> {
    let n = m.nrows();
    let sym = hermitian_part(m);
    let se = SymmetricEigen::try_new(sym, f64::EPSILON, EIG_MAX_ITERS)
        .ok_or(Error::ConvergenceFailure { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    if se.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::ConvergenceFailure { dim: n });
    }
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| se.eigenvalues[k]));
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &se.eigenvectors.column(src));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

pub fn eig_hermitian(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    eig_raw(&a.inner)
}

/// A Hermitian matrix with `lambda_min > 1e-12 * lambda_max > 0`.
///
/// The eigendecomposition is computed once at construction and reused by every
/// spectral function applied to the matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix {
    herm: HermitianMatrix,
    eig: EigenDecomposition,
}

impl SpdMatrix {
    pub fn new(herm: HermitianMatrix) -> Result<Self> {
        let eig = eig_hermitian(&herm)?;
        let (min, max) = (eig.min(), eig.max());
        if !(min > 0.0) || !(min > SPD_RATIO_FLOOR * max) {
            return Err(Error::NotPositiveDefinite { min, max });
        }
        Ok(Self { herm, eig })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::from_matrix(m)?)
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::diag(values)?)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(HermitianMatrix::identity(dim)).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.herm.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.herm
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.herm.inner
    }

    pub fn eig(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.eig.eigenvalues.as_slice()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig.max()
    }

    /// Equals the operator norm for a positive definite matrix.
    pub fn operator_norm(&self) -> f64 {
        self.eig.max()
    }

    pub fn condition_number(&self) -> f64 {
        self.eig.max() / self.eig.min()
    }

    pub fn trace(&self) -> f64 {
        self.herm.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.herm.frobenius_norm()
    }

    pub fn log_det(&self) -> f64 {
        self.eig.eigenvalues.iter().map(|v| v.ln()).sum()
    }

    pub fn det(&self) -> f64 {
        self.log_det().exp()
    }

    pub fn inverse(&self) -> Result<Self> {
        spectral_power(self, -1.0)
    }

    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive and finite, got {a}"
            )));
        }
        Self::new(self.herm.scaled(a))
    }

    pub fn congruence(&self, u: &Unitary) -> Result<Self> {
        Self::new(self.herm.congruence(u)?)
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        Self::new(self.herm.kron(&other.herm))
    }

    /// Matrix function through the cached eigendecomposition. The result is
    /// only guaranteed Hermitian.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        self.eig.map(f)
    }
}

impl AsRef<HermitianMatrix> for SpdMatrix {
    fn as_ref(&self) -> &HermitianMatrix {
        &self.herm
    }
}

/// Turn an intermediate result back into an [`SpdMatrix`]; a numerically
/// indefinite or degenerate output is reported as ill-conditioning.
pub(crate) fn spd_result(m: CMatrix) -> Result<SpdMatrix> {
    SpdMatrix::from_matrix(m).map_err(|e| match e {
        Error::NotPositiveDefinite { min, max } => Error::IllConditioned { ratio: min / max },
        other => other,
    })
}

fn check_power_ratio(eig: &EigenDecomposition) -> Result<()> {
    let ratio = eig.min() / eig.max();
    if !(eig.min() > 0.0) || ratio < POWER_RATIO_FLOOR {
        return Err(Error::IllConditioned { ratio });
    }
    Ok(())
}

/// `M^p` for a Hermitian matrix that is expected to be positive definite.
/// Used for intermediates that need not satisfy the [`SpdMatrix`] ratio floor.
pub(crate) fn pow_raw(m: &CMatrix, p: f64) -> Result<CMatrix> {
    let eig = eig_raw(m)?;
    check_power_ratio(&eig)?;
    Ok(eig.map(|x| x.powf(p)))
}

/// `A^p` for any real `p`.
pub fn spectral_power(a: &SpdMatrix, p: f64) -> Result<SpdMatrix> {
    if !p.is_finite() {
        return Err(Error::InvalidParameter(format!("power must be finite, got {p}")));
    }
    check_power_ratio(&a.eig)?;
    if p == 1.0 {
        return Ok(a.clone());
    }
    spd_result(a.apply(|x| x.powf(p)))
}

pub fn spectral_log(a: &SpdMatrix) -> HermitianMatrix {
    HermitianMatrix {
        inner: a.apply(f64::ln),
    }
}

pub fn spectral_exp(h: &HermitianMatrix) -> Result<SpdMatrix> {
    let eig = eig_hermitian(h)?;
    spd_result(eig.map(f64::exp))
}

/// Outcome of a Loewner-order comparison between two Hermitian matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderRelation {
    Equal,
    Leq,
    Geq,
    Incomparable,
}

impl OrderRelation {
    /// `A <= B` holds (`Equal` included).
    pub fn is_leq(self) -> bool {
        matches!(self, OrderRelation::Equal | OrderRelation::Leq)
    }

    pub fn is_geq(self) -> bool {
        matches!(self, OrderRelation::Equal | OrderRelation::Geq)
    }
}

/// `lambda_min(B - A) / (1 + ||A|| + ||B||)`: nonnegative exactly when `A <= B`.
pub fn loewner_margin(a: impl AsRef<HermitianMatrix>, b: impl AsRef<HermitianMatrix>) -> Result<f64> {
    let (a, b) = (a.as_ref(), b.as_ref());
    check_dims(a.dim(), b.dim())?;
    let scale = 1.0 + a.operator_norm()? + b.operator_norm()?;
    let diff = HermitianMatrix::from_matrix(&b.inner - &a.inner)?;
    Ok(diff.min_eigenvalue()? / scale)
}

/// `Leq` iff `lambda_min(B - A) >= -tol * (1 + ||A|| + ||B||)`, `Geq`
/// symmetrically, `Equal` if both.
pub fn loewner_compare(
    a: impl AsRef<HermitianMatrix>,
    b: impl AsRef<HermitianMatrix>,
    tol: f64,
) -> Result<OrderRelation> {
    let (a, b) = (a.as_ref(), b.as_ref());
    check_dims(a.dim(), b.dim())?;
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be >= 0, got {tol}")));
    }
    let scale = 1.0 + a.operator_norm()? + b.operator_norm()?;
    let diff = eig_raw(&(&b.inner - &a.inner))?;
    let leq = diff.min() >= -tol * scale;
    let geq = -diff.max() >= -tol * scale;
    Ok(match (leq, geq) {
        (true, true) => OrderRelation::Equal,
        (true, false) => OrderRelation::Leq,
        (false, true) => OrderRelation::Geq,
        (false, false) => OrderRelation::Incomparable,
    })
}

/// First divided difference of `x -> x^p` at `(x, y)`, with the derivative
/// `p x^(p-1)` on ties.
pub(crate) fn power_divided_difference(x: f64, y: f64, p: f64, scale: f64) -> f64 {
    if (x - y).abs() <= EIGEN_TIE_TOL * scale {
        return p * x.powf(p - 1.0);
    }
    // (x^p - y^p) / (x - y) = y^(p-1) expm1(p r) / expm1(r), r = ln(x / y)
    let r = ((x - y) / y).ln_1p();
    y.powf(p - 1.0) * (p * r).exp_m1() / r.exp_m1()
}

/// Daleckii-Krein map for `x -> x^p` at a diagonalized positive definite
/// matrix: `U (L o (U* K U)) U*` with `L_ij` the divided differences. The map
/// is self-adjoint in the trace inner product.
pub(crate) fn dk_power(eig: &EigenDecomposition, p: f64, k: &CMatrix) -> CMatrix {
    let n = eig.dim();
    let scale = eig.max();
    let mut inner = eig.to_eigenbasis(k);
    for i in 0..n {
        for j in 0..n {
            let l = power_divided_difference(eig.eigenvalues[i], eig.eigenvalues[j], p, scale);
            inner[(i, j)] *= l;
        }
    }
    hermitian_part(&eig.out_of_eigenbasis(&inner))
}

/// Directional derivative `D(A^p)[K]`.
pub fn frechet_power_derivative(a: &SpdMatrix, p: f64, k: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_dims(a.dim(), k.dim())?;
    check_power_ratio(&a.eig)?;
    HermitianMatrix::from_matrix(dk_power(&a.eig, p, &k.inner))
}

/// A unitary matrix, `||U* U - I||_F <= 1e-12`.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    inner: CMatrix,
}

impl Unitary {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let n = m.nrows();
        let defect = frobenius(&(m.adjoint() * &m - CMatrix::identity(n, n)));
        if !(defect <= Self::TOLERANCE) {
            return Err(Error::InvalidParameter(format!(
                "matrix is not unitary (||U*U - I||_F = {defect:e})"
            )));
        }
        Ok(Self { inner: m })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: CMatrix::identity(dim, dim),
        }
    }

    /// Haar-distributed unitary: QR of a complex Ginibre matrix with the
    /// phases of `diag(R)` absorbed into `Q`.
    pub fn haar<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        });
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        Self { inner: q }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }
}

/// Seeded random positive definite matrix `Q diag(lambda) Q*` with `Q` Haar and
/// `lambda` log-uniform on `[cond^-1/2, cond^1/2]`.
pub fn random_spd(dim: usize, cond: f64, seed: u64) -> Result<SpdMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_spd_with(&mut rng, dim, cond)
}

pub fn random_spd_with<R: Rng + ?Sized>(rng: &mut R, dim: usize, cond: f64) -> Result<SpdMatrix> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if !(cond >= 1.0) || !cond.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "condition number must be finite and >= 1, got {cond}"
        )));
    }
    let q = Unitary::haar(dim, rng);
    let half_log = 0.5 * cond.ln();
    let lambdas: Vec<f64> = (0..dim)
        .map(|_| {
            let u: f64 = rng.random();
            (-half_log + 2.0 * half_log * u).exp()
        })
        .collect();
    random_spd_from_spectrum(&q, &lambdas)
}

/// `Q diag(lambda) Q*` for a given unitary and spectrum.
pub fn random_spd_from_spectrum(q: &Unitary, lambdas: &[f64]) -> Result<SpdMatrix> {
    check_dims(q.dim(), lambdas.len())?;
    let d = CMatrix::from_diagonal(&DVector::from_iterator(
        lambdas.len(),
        lambdas.iter().map(|v| c(*v)),
    ));
    SpdMatrix::from_matrix(congruence_raw(&q.inner, &d))
}
