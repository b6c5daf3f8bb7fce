//! Seeded property sweeps over random inputs.
//!
//! A property evaluates one random case and returns a score in units of its
//! tolerance (see [`Verdict`]); `None` marks a skipped case whose hypothesis
//! did not hold. A case passes when `score >= -tolerance_scale`. Every case is
//! generated from `(seed, property name, sample index)` alone, so a violation
//! can be replayed from its [`Counterexample`].

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::barycenter::{
    commuting_closed_form, gradient_quadrature, objective, power_integral, solve, solve_from,
    BarycenterProblem, SolverConfig, SolverReport, WeightVector,
};
use crate::divergence::{
    fidelity_split, phi, phi_gradient_b, phi_hessian_quadform, phi_raw, verify_invariance,
    verify_strict_concavity,
};
use crate::error::{Error, Result};
use crate::linalg::{
    c, frechet_power_derivative, frobenius, loewner_compare, loewner_margin,
    spectral_power, CMatrix, HermitianMatrix, SpdMatrix, DEFAULT_ORDER_TOL,
};
use crate::means::{
    arithmetic_mean, f_mean, harmonic_mean, log_euclidean, metric_geometric_mean,
    relative_difference, spectral_geometric_mean,
};
use crate::order::{
    check_ando_hiai_implication, check_inverse_bound, check_equivalence_ft_leq_identity,
    check_fixed_point, check_log_majorization_chain, check_norm_bound, check_trace_inequality,
    log_majorizes, trace_chain, Verdict, MAJORIZATION_TOL,
};
use crate::quadrature::DEFAULT_NODES;
use crate::sample::{shrink_until, Sampler};

/// Relative tolerance of the mean identities.
pub const PROPERTY_TOL: f64 = 1e-9;
/// Condition-number bound of random inputs.
pub const SAMPLE_COND: f64 = 1e3;
/// Relative agreement demanded of barycenters computed two ways.
pub const BARYCENTER_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SuiteKind {
    Properties,
    Order,
    Divergence,
    Barycenter,
    All,
}

impl SuiteKind {
    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Properties => "properties",
            SuiteKind::Order => "order",
            SuiteKind::Divergence => "divergence",
            SuiteKind::Barycenter => "barycenter",
            SuiteKind::All => "all",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SuiteKind::Properties,
            SuiteKind::Order,
            SuiteKind::Divergence,
            SuiteKind::Barycenter,
            SuiteKind::All,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    /// Matrix dimensions, cycled through by sample index.
    pub dims: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Multiplier on every tolerance; `1` is the documented setting.
    pub tolerance_scale: f64,
}

impl SuiteConfig {
    pub fn new(dims: Vec<usize>, samples: usize, seed: u64) -> Self {
        Self {
            dims,
            samples,
            seed,
            tolerance_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidParameter("dims must be a nonempty list of positive sizes".into()));
        }
        if !self.tolerance_scale.is_finite() {
            return Err(Error::InvalidParameter("tolerance scale must be finite".into()));
        }
        Ok(())
    }
}

/// Inputs and parameters of one generated case.
pub struct Case {
    pub sampler: Sampler,
    pub dim: usize,
    pub inputs: Vec<(String, HermitianMatrix)>,
    pub params: Vec<(String, f64)>,
    /// Optional per-case measurement, minimized over the sweep.
    pub metric: Option<f64>,
}

impl Case {
    fn new(seed: u64, name: &str, index: usize, dim: usize) -> Self {
        Self {
            sampler: Sampler::for_sample(seed ^ name_hash(name), index as u64),
            dim,
            inputs: Vec::new(),
            params: Vec::new(),
            metric: None,
        }
    }

    pub fn record(&mut self, label: &str, m: impl AsRef<HermitianMatrix>) {
        self.inputs.push((label.to_string(), m.as_ref().clone()));
    }

    pub fn param(&mut self, label: &str, v: f64) -> f64 {
        self.params.push((label.to_string(), v));
        v
    }

    pub fn spd(&mut self, label: &str, dim: usize, cond: f64) -> Result<SpdMatrix> {
        let a = self.sampler.spd(dim, cond)?;
        self.record(label, &a);
        Ok(a)
    }

    pub fn pair(&mut self, cond: f64) -> Result<(SpdMatrix, SpdMatrix)> {
        let d = self.dim;
        Ok((self.spd("A", d, cond)?, self.spd("B", d, cond)?))
    }

    pub fn hermitian(&mut self, label: &str) -> Result<HermitianMatrix> {
        let y = self.sampler.hermitian(self.dim)?;
        self.record(label, &y);
        Ok(y)
    }

    pub fn uniform(&mut self, label: &str, lo: f64, hi: f64) -> f64 {
        let v = self.sampler.uniform(lo, hi);
        self.param(label, v)
    }

    pub fn pick(&mut self, label: &str, grid: &[f64]) -> f64 {
        let v = grid[self.sampler.index(grid.len())];
        self.param(label, v)
    }

    /// `t` drawn from `grid`.
    pub fn t_from(&mut self, grid: &[f64]) -> f64 {
        self.pick("t", grid)
    }

    fn observe(&mut self, v: f64) {
        self.metric = Some(self.metric.map_or(v, |m: f64| m.min(v)));
    }
}

fn name_hash(name: &str) -> u64 {
    // FNV-1a
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

pub type CheckFn = fn(&mut Case) -> Result<Option<f64>>;

#[derive(Clone, Copy)]
pub struct Property {
    pub name: &'static str,
    pub suite: SuiteKind,
    pub check: CheckFn,
}

/// A failing case, with everything needed to regenerate it.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub property: String,
    pub seed: u64,
    pub sample: usize,
    pub dim: usize,
    pub params: Vec<(String, f64)>,
    pub inputs: Vec<(String, HermitianMatrix)>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub suite: SuiteKind,
    pub passed: usize,
    pub skipped: usize,
    pub violations: usize,
    /// Lowest score seen over non-skipped cases.
    pub worst_score: Option<f64>,
    /// Minimum of the per-case measurement, for properties that record one.
    pub observed_min: Option<f64>,
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: SuiteKind,
    pub config: SuiteConfig,
    pub properties: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        self.properties.iter().map(|p| p.violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn counterexamples(&self) -> impl Iterator<Item = &Counterexample> {
        self.properties.iter().filter_map(|p| p.counterexample.as_ref())
    }
}

enum CaseOutcome {
    Pass(f64),
    Skip,
    Fail(String, Option<f64>),
}

struct Evaluated {
    outcome: CaseOutcome,
    metric: Option<f64>,
    case: Case,
}

fn evaluate(p: &Property, cfg: &SuiteConfig, index: usize) -> Evaluated {
    let dim = cfg.dims[index % cfg.dims.len()];
    let mut case = Case::new(cfg.seed, p.name, index, dim);
    let outcome = match (p.check)(&mut case) {
        Ok(None) => CaseOutcome::Skip,
        Ok(Some(s)) if s >= -cfg.tolerance_scale => CaseOutcome::Pass(s),
        Ok(Some(s)) => CaseOutcome::Fail(format!("score {s:.6e} below -{}", cfg.tolerance_scale), Some(s)),
        Err(e) => CaseOutcome::Fail(format!("error: {e}"), None),
    };
    Evaluated {
        outcome,
        metric: case.metric,
        case,
    }
}

/// Run one property over `cfg.samples` cases.
pub fn run_property(p: &Property, cfg: &SuiteConfig) -> Result<PropertyResult> {
    cfg.validate()?;
    let results: Vec<Evaluated> = (0..cfg.samples).into_par_iter().map(|i| evaluate(p, cfg, i)).collect();
    let mut out = PropertyResult {
        name: p.name.to_string(),
        suite: p.suite,
        passed: 0,
        skipped: 0,
        violations: 0,
        worst_score: None,
        observed_min: None,
        counterexample: None,
    };
    let lower = |cur: Option<f64>, v: f64| Some(cur.map_or(v, |c: f64| c.min(v)));
    for (i, r) in results.into_iter().enumerate() {
        if let Some(m) = r.metric {
            out.observed_min = lower(out.observed_min, m);
        }
        match r.outcome {
            CaseOutcome::Pass(s) => {
                out.passed += 1;
                out.worst_score = lower(out.worst_score, s);
            }
            CaseOutcome::Skip => out.skipped += 1,
            CaseOutcome::Fail(detail, s) => {
                out.violations += 1;
                if let Some(s) = s {
                    out.worst_score = lower(out.worst_score, s);
                }
                if out.counterexample.is_none() {
                    out.counterexample = Some(Counterexample {
                        property: p.name.to_string(),
                        seed: cfg.seed,
                        sample: i,
                        dim: r.case.dim,
                        params: r.case.params,
                        inputs: r.case.inputs,
                        detail,
                    });
                }
            }
        }
    }
    Ok(out)
}

pub fn run_suite(kind: SuiteKind, cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let properties = properties(kind)
        .iter()
        .map(|p| run_property(p, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        suite: kind,
        config: cfg.clone(),
        properties,
    })
}

/// Look up a property by name.
pub fn property(name: &str) -> Option<Property> {
    properties(SuiteKind::All).into_iter().find(|p| p.name == name)
}

/// Re-run the case behind a counterexample; returns its score.
pub fn replay(cx: &Counterexample) -> Result<Option<f64>> {
    let p = property(&cx.property)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown property '{}'", cx.property)))?;
    let mut case = Case::new(cx.seed, p.name, cx.sample, cx.dim);
    (p.check)(&mut case)
}

pub fn properties(kind: SuiteKind) -> Vec<Property> {
    macro_rules! props {
        ($suite:expr; $($name:literal => $f:path),* $(,)?) => {
            vec![$(Property { name: $name, suite: $suite, check: $f }),*]
        };
    }
    match kind {
        SuiteKind::Properties => props![SuiteKind::Properties;
            "power-composition" => power_composition,
            "power-identity" => power_identity,
            "frechet-derivative" => frechet_derivative,
            "loewner-transitivity" => loewner_transitivity,
            "agh-chain" => agh_chain,
            "commuting-closed-form" => commuting_pairs,
            "joint-homogeneity" => joint_homogeneity,
            "unitary-congruence" => unitary_congruence,
            "inversion" => inversion,
            "lower-bound" => lower_bound,
            "upper-bound" => upper_bound,
            "log-euclidean-limit" => log_euclidean_limit,
            "endpoints-midpoint" => endpoints_midpoint,
            "tensor-multiplicativity" => tensor_multiplicativity,
        ],
        SuiteKind::Order => props![SuiteKind::Order;
            "majorization-reflexive" => majorization_reflexive,
            "majorization-antisymmetric" => majorization_antisymmetric,
            "majorization-transitive" => majorization_transitive,
            "log-implies-weak" => log_implies_weak,
            "weak-scalar" => weak_scalar,
            "identity-equivalence" => identity_equivalence,
            "trace-inequality" => trace_inequality,
            "trace-equality" => trace_equality,
            "norm-bound" => norm_bound,
            "log-majorization-chain" => majorization_chain,
            "trace-chain" => trace_chain_property,
            "ando-hiai" => ando_hiai,
            "fixed-point" => fixed_point,
            "b-bound" => b_bound,
        ],
        SuiteKind::Divergence => props![SuiteKind::Divergence;
            "nonnegativity" => nonnegativity,
            "separation" => separation,
            "identity-gap" => identity_gap,
            "gradient-on-diagonal" => gradient_on_diagonal,
            "hessian-on-diagonal" => hessian_on_diagonal,
            "gradient-finite-difference" => gradient_finite_difference,
            "unitary-invariance" => unitary_invariance,
            "tensor-invariance" => tensor_invariance,
            "strict-concavity" => strict_concavity,
            "fidelity-split" => fidelity_split_property,
            "gradient-quadrature" => gradient_quadrature_property,
            "power-integral" => power_integral_property,
        ],
        SuiteKind::Barycenter => props![SuiteKind::Barycenter;
            "commuting-oracle" => commuting_oracle,
            "single-input" => single_input,
            "permutation-invariance" => permutation_invariance,
            "unitary-equivariance" => unitary_equivariance,
            "stationarity" => stationarity,
            "multistart-uniqueness" => multistart_uniqueness,
            "monotone-descent" => monotone_descent,
            "objective-convexity" => objective_convexity,
        ],
        SuiteKind::All => [SuiteKind::Properties, SuiteKind::Order, SuiteKind::Divergence, SuiteKind::Barycenter]
            .into_iter()
            .flat_map(properties)
            .collect(),
    }
}

const T_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
const T_INTERIOR: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn rel_score(x: &CMatrix, y: &CMatrix, tol: f64) -> f64 {
    -relative_difference(x, y) / tol
}

fn margin_score(lo: impl AsRef<HermitianMatrix>, hi: impl AsRef<HermitianMatrix>, tol: f64) -> Result<f64> {
    Ok(loewner_margin(lo, hi)? / tol)
}

fn herm(m: CMatrix) -> Result<HermitianMatrix> {
    HermitianMatrix::from_matrix(m)
}

// ---- means and spectral calculus ------------------------------------------

fn power_composition(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, SAMPLE_COND)?;
    let p = case.uniform("p", -1.5, 1.5);
    let q = case.uniform("q", -1.5, 1.5);
    let lhs = spectral_power(&spectral_power(&a, p)?, q)?;
    let rhs = spectral_power(&a, p * q)?;
    Ok(Some(rel_score(lhs.as_matrix(), rhs.as_matrix(), 1e-11)))
}

fn power_identity(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, SAMPLE_COND)?;
    let p = spectral_power(&a, 1.0)?;
    Ok(Some(if p.as_matrix() == a.as_matrix() { 0.0 } else { -f64::INFINITY }))
}

fn frechet_derivative(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, SAMPLE_COND)?;
    let k = case.hermitian("K")?;
    let p = case.uniform("p", -2.0, 2.0);
    let d = frechet_power_derivative(&a, p, &k)?;
    let h = 1e-4 * a.min_eigenvalue();
    let shift = |s: f64| SpdMatrix::from_matrix(a.as_matrix() + k.as_matrix() * c(s));
    let fd = (spectral_power(&shift(h)?, p)?.as_matrix() - spectral_power(&shift(-h)?, p)?.as_matrix()) / c(2.0 * h);
    Ok(Some(rel_score(&fd, d.as_matrix(), 1e-6)))
}

fn random_psd(case: &mut Case, label: &str, scale: f64) -> Result<HermitianMatrix> {
    let m = case.sampler.spd(case.dim, SAMPLE_COND)?;
    let r = case.sampler.uniform(0.0, 1.0);
    // rank-deficient increments are allowed: zero out the smallest eigenvalue half the time
    let mut m = m.apply(|x| x * scale);
    if r < 0.5 {
        let e = crate::linalg::eig_hermitian(&herm(m.clone())?)?;
        m = e.map(|x| if x == e.min() { 0.0 } else { x });
    }
    let h = herm(m)?;
    case.record(label, &h);
    Ok(h)
}

fn loewner_transitivity(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, SAMPLE_COND)?;
    let p1 = random_psd(case, "P1", 0.1)?;
    let p2 = random_psd(case, "P2", 0.1)?;
    let b = a.as_hermitian().add(&p1)?;
    let cc = b.add(&p2)?;
    let tol = DEFAULT_ORDER_TOL;
    if !(loewner_compare(&a, &b, tol)?.is_leq() && loewner_compare(&b, &cc, tol)?.is_leq()) {
        return Ok(None);
    }
    Ok(Some(if loewner_compare(&a, &cc, 2.0 * tol)?.is_leq() { 0.0 } else { -2.0 }))
}

fn agh_chain(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    let h = harmonic_mean(&a, &b, t)?;
    let g = metric_geometric_mean(&a, &b, t)?;
    let m = arithmetic_mean(&a, &b, t)?;
    Ok(Some(margin_score(&h, &g, PROPERTY_TOL)?.min(margin_score(&g, &m, PROPERTY_TOL)?)))
}

fn commuting_pairs(case: &mut Case) -> Result<Option<f64>> {
    let ms = case.sampler.commuting(case.dim, 2, SAMPLE_COND)?;
    case.record("A", &ms[0]);
    case.record("B", &ms[1]);
    let t = case.t_from(&T_GRID);
    let f = f_mean(&ms[0], &ms[1], t)?;
    let want = ms[0].apply(|x| x.powf(1.0 - t)) * ms[1].apply(|x| x.powf(t));
    Ok(Some(rel_score(f.as_matrix(), &want, PROPERTY_TOL)))
}

fn joint_homogeneity(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    let scales = [0.5, 2.0, 10.0];
    let sa = case.pick("a", &scales);
    let sb = case.pick("b", &scales);
    let lhs = f_mean(&a.scaled(sa)?, &b.scaled(sb)?, t)?;
    let rhs = f_mean(&a, &b, t)?.as_matrix() * c(sa.powf(1.0 - t) * sb.powf(t));
    Ok(Some(rel_score(lhs.as_matrix(), &rhs, PROPERTY_TOL)))
}

fn unitary_congruence(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    let u = case.sampler.unitary(case.dim);
    let lhs = f_mean(&a.congruence(&u)?, &b.congruence(&u)?, t)?;
    let rhs = f_mean(&a, &b, t)?.congruence(&u)?;
    Ok(Some(rel_score(lhs.as_matrix(), rhs.as_matrix(), PROPERTY_TOL)))
}

fn inversion(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    let lhs = f_mean(&a.inverse()?, &b.inverse()?, t)?;
    let rhs = f_mean(&a, &b, t)?.inverse()?;
    Ok(Some(rel_score(lhs.as_matrix(), rhs.as_matrix(), PROPERTY_TOL)))
}

fn lower_bound(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    let f = f_mean(&a, &b, t)?;
    let m = crate::linalg::spd_result(a.as_matrix() * c(1.0 - t) + b.apply(|x| 1.0 / x) * c(t))?;
    let lo = herm(m.apply(|x| 2.0 / x.sqrt()) - a.apply(|x| x.powf(2.0 * (t - 1.0))))?;
    Ok(Some(margin_score(&lo, &f, PROPERTY_TOL)?))
}

fn upper_bound(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    let f = f_mean(&a, &b, t)?;
    let m = crate::linalg::spd_result(a.apply(|x| 1.0 / x) * c(1.0 - t) + b.as_matrix() * c(t))?;
    let bracket = herm(m.apply(|x| 2.0 / x.sqrt()) - a.apply(|x| x.powf(2.0 * (1.0 - t))))?;
    // the bound is only meaningful when the bracket is invertible and positive
    let Ok(bracket) = SpdMatrix::new(bracket) else {
        return Ok(None);
    };
    Ok(Some(margin_score(&f, &bracket.inverse()?, PROPERTY_TOL)?))
}

fn log_euclidean_limit(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_INTERIOR);
    let le = log_euclidean(&a, &b, t)?;
    let norm = le.frobenius_norm();
    let mut errs = Vec::new();
    for s in [1e-1, 1e-2, 1e-3] {
        let fs = f_mean(&spectral_power(&a, s)?, &spectral_power(&b, s)?, t)?;
        let back = spectral_power(&fs, 1.0 / s)?;
        errs.push(frobenius(&(back.as_matrix() - le.as_matrix())));
    }
    let floor = 1e-12 * norm;
    let decreasing = errs.windows(2).all(|w| w[1] < w[0] || w[1] <= floor);
    let last = errs[2] / (1e-2 * norm);
    Ok(Some(if decreasing { -last } else { -2.0 - last }))
}

fn endpoints_midpoint(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let s0 = rel_score(f_mean(&a, &b, 0.0)?.as_matrix(), a.as_matrix(), PROPERTY_TOL);
    let s1 = rel_score(f_mean(&a, &b, 1.0)?.as_matrix(), b.as_matrix(), PROPERTY_TOL);
    let mid = rel_score(
        f_mean(&a, &b, 0.5)?.as_matrix(),
        spectral_geometric_mean(&a, &b, 0.5)?.as_matrix(),
        PROPERTY_TOL,
    );
    Ok(Some(s0.min(s1).min(mid)))
}

fn tensor_multiplicativity(case: &mut Case) -> Result<Option<f64>> {
    let d = case.dim.min(3);
    let a = case.spd("A", d, SAMPLE_COND)?;
    let b = case.spd("B", d, SAMPLE_COND)?;
    let cm = case.spd("C", 2, SAMPLE_COND)?;
    let dm = case.spd("D", 2, SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    let lhs = f_mean(&a.kron(&cm)?, &b.kron(&dm)?, t)?;
    let rhs = f_mean(&a, &b, t)?.kron(&f_mean(&cm, &dm, t)?)?;
    Ok(Some(rel_score(lhs.as_matrix(), rhs.as_matrix(), PROPERTY_TOL)))
}

// ---- order ------------------------------------------------------------------

fn majorization_reflexive(case: &mut Case) -> Result<Option<f64>> {
    let x = case.spd("X", case.dim, SAMPLE_COND)?;
    log_majorizes(&x, &x, false, MAJORIZATION_TOL).map(|v| v.score())
}

fn majorization_antisymmetric(case: &mut Case) -> Result<Option<f64>> {
    let x = case.spd("X", case.dim, SAMPLE_COND)?;
    let u = case.sampler.unitary(case.dim);
    let y = x.congruence(&u)?;
    let tol = MAJORIZATION_TOL;
    let xy = log_majorizes(&x, &y, false, tol)?;
    let yx = log_majorizes(&y, &x, false, tol)?;
    if !(xy.holds && yx.holds) {
        return Ok(Some(-2.0));
    }
    // both directions force equal spectra
    let gap = x
        .eigenvalues()
        .iter()
        .zip(y.eigenvalues())
        .map(|(p, q)| (p.ln() - q.ln()).abs())
        .fold(0.0, f64::max);
    Ok(Some(-gap / (2.0 * tol)))
}

fn majorization_transitive(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&[0.5, 0.6, 0.75, 0.9]);
    let f = f_mean(&a, &b, t)?;
    let q = crate::means::renyi_quantity(&a, &b, t, t)?;
    let s = spectral_geometric_mean(&a, &b, t)?;
    let tol = MAJORIZATION_TOL;
    if !(log_majorizes(&f, &q, false, tol)?.holds && log_majorizes(&q, &s, false, tol)?.holds) {
        return Ok(None);
    }
    let v = log_majorizes(&f, &s, false, 2.0 * tol)?;
    Ok(Some(if v.holds { 0.0 } else { -2.0 }))
}

fn log_implies_weak(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&[0.5, 0.75, 1.0]);
    let f = f_mean(&a, &b, t)?;
    let s = spectral_geometric_mean(&a, &b, t)?;
    let strong = log_majorizes(&f, &s, false, MAJORIZATION_TOL)?;
    if !strong.holds {
        return Ok(None);
    }
    Ok(log_majorizes(&f, &s, true, MAJORIZATION_TOL)?.score())
}

fn weak_scalar(case: &mut Case) -> Result<Option<f64>> {
    let s = case.uniform("s", 0.1, 10.0);
    let r = case.uniform("r", 0.1, 10.0);
    let x = SpdMatrix::identity(case.dim).scaled(s)?;
    let y = SpdMatrix::identity(case.dim).scaled(r)?;
    let v = log_majorizes(&x, &y, true, MAJORIZATION_TOL)?;
    Ok(Some(if v.holds == (s <= r) { 0.0 } else { -2.0 }))
}

fn identity_equivalence(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, 10.0)?;
    let b0 = case.sampler.spd(case.dim, 10.0)?;
    // scale B so that both outcomes of F_t <= I occur
    let b = b0.scaled(10f64.powf(case.sampler.uniform(-1.5, 1.0)))?;
    case.record("B", &b);
    let t = case.t_from(&[-0.5, 0.25, 0.5, 0.75, 1.5]);
    check_equivalence_ft_leq_identity(&a, &b, t).map(|r| r.score())
}

fn trace_inequality(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    check_trace_inequality(&a, &b, t).map(|r| r.score())
}

fn trace_equality(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    let r = check_trace_inequality(&a, &a, t)?;
    Ok(Some(-r.inequality.relative_margin.abs() / PROPERTY_TOL))
}

fn norm_bound(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    check_norm_bound(&a, &b, t).map(|r| r.score())
}

fn majorization_chain(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&[0.35, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0]);
    // keep the Renyi exponents (1-t)/2z and t/2z at most one
    let lo = t.max(1.0 - t) / 2.0;
    let z = case.uniform("z", lo, t);
    check_log_majorization_chain(&a, &b, t, z).map(|r| r.score())
}

fn trace_chain_property(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&[0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
    Ok(trace_chain(&a, &b, t)?.iter().filter_map(|r| r.score()).reduce(f64::min))
}

fn ando_hiai(case: &mut Case) -> Result<Option<f64>> {
    // A^-p/2 B^p A^-p/2 at p = 4 has up to the eighth power of the input
    // conditioning, so start well conditioned
    let a = case.spd("A", case.dim, 10.0)?;
    let b0 = case.sampler.spd(case.dim, 10.0)?;
    let t = case.t_from(&T_INTERIOR);
    let ainv = a.inverse()?;
    let bound = herm(a.apply(|x| x.powf(2.0 * (t - 1.0))))?;
    let Some(b) = shrink_until(&b0, |b| Ok(loewner_margin(&f_mean(&ainv, b, t)?, &bound)? >= 0.0))? else {
        return Ok(None);
    };
    case.record("B", &b);
    check_ando_hiai_implication(&a, &b, t, &[1.0, 1.5, 2.0, 4.0]).map(|r| r.score())
}

fn fixed_point(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, 1e2)?;
    let t = case.t_from(&[0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
    let r = check_fixed_point(&a, t)?;
    // at t = 1 the second argument is the identity and nothing can break
    Ok(Some(if t == 1.0 { -r.residual / crate::order::IDENTITY_TOL } else { r.score().unwrap_or(0.0) }))
}

fn b_bound(case: &mut Case) -> Result<Option<f64>> {
    let a0 = case.sampler.spd(case.dim, SAMPLE_COND)?;
    let a = a0.scaled(case.sampler.uniform(0.2, 1.0) / a0.max_eigenvalue())?;
    case.record("A", &a);
    let b0 = case.sampler.spd(case.dim, SAMPLE_COND)?;
    let t = case.t_from(&T_INTERIOR);
    let bound = herm(a.apply(|x| x.powf(2.0 - 2.0 * t)))?;
    let Some(b) = shrink_until(&b0, |b| Ok(loewner_margin(&f_mean(&a, b, t)?, &bound)? >= 0.0))? else {
        return Ok(None);
    };
    case.record("B", &b);
    check_inverse_bound(&a, &b, t).map(|r| r.score())
}

// ---- divergence -------------------------------------------------------------

fn nonnegativity(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    let v = phi_raw(&a, &b, t)?;
    let tol = crate::divergence::CLAMP_TOL * (a.trace() + b.trace());
    phi(&a, &b, t)?;
    Ok(Some(v / tol))
}

fn separation(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, SAMPLE_COND)?;
    // B at a random relative distance from A, down to 1e-3
    let y = case.hermitian("Y")?;
    let eps = 10f64.powf(case.uniform("log10_eps", -3.0, 0.0));
    let step = eps * a.min_eigenvalue() * 0.9;
    let b = SpdMatrix::from_matrix(a.as_matrix() + y.as_matrix() * c(step))?;
    case.record("B", &b);
    let t = case.t_from(&T_INTERIOR);
    let scale = a.trace() + b.trace();
    let dist = frobenius(&(a.as_matrix() - b.as_matrix()));
    if dist <= 1e-4 * scale {
        return Ok(None);
    }
    let v = phi(&a, &b, t)?.value;
    // empirical separation constant Phi / ||A - B||^2
    case.observe(v / (dist * dist));
    Ok(Some(v / (1e-10 * scale) - 2.0))
}

fn identity_gap(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    let v = phi_raw(&a, &a, t)?;
    Ok(Some(-v.abs() / (1e-12 * a.trace())))
}

fn gradient_on_diagonal(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, SAMPLE_COND)?;
    let t = case.t_from(&T_INTERIOR);
    let g = phi_gradient_b(&a, &a, t)?;
    Ok(Some(-g.frobenius_norm() / (1e-9 * case.dim as f64)))
}

fn hessian_on_diagonal(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, SAMPLE_COND)?;
    let y = case.hermitian("Y")?;
    let t = case.t_from(&T_INTERIOR);
    let q = phi_hessian_quadform(&a, &a, t, &y)?;
    let yn = y.frobenius_norm();
    Ok(Some(q / (1e-6 * yn * yn)))
}

fn gradient_finite_difference(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let y = case.hermitian("Y")?;
    let t = case.t_from(&T_INTERIOR);
    let g = phi_gradient_b(&a, &b, t)?;
    let h = 1e-5 * b.min_eigenvalue().min(1.0);
    let shift = |s: f64| SpdMatrix::from_matrix(b.as_matrix() + y.as_matrix() * c(s));
    let fd = (phi_raw(&a, &shift(h)?, t)? - phi_raw(&a, &shift(-h)?, t)?) / (2.0 * h);
    let analytic = g.inner_product(&y)?;
    let denom = g.frobenius_norm() * y.frobenius_norm();
    Ok(Some(-(fd - analytic).abs() / denom.max(f64::MIN_POSITIVE) / 1e-5))
}

fn unitary_invariance(case: &mut Case) -> Result<Option<f64>> {
    let (a, b) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_GRID);
    let u = case.sampler.unitary(case.dim);
    let r = verify_invariance(&a, &b, t, &u, &SpdMatrix::identity(1))?;
    Ok(Some(-r.unitary_gap / crate::divergence::INVARIANCE_TOL))
}

fn tensor_invariance(case: &mut Case) -> Result<Option<f64>> {
    let d = case.dim.min(3);
    let a = case.spd("A", d, SAMPLE_COND)?;
    let b = case.spd("B", d, SAMPLE_COND)?;
    let rho = case.sampler.density(2, SAMPLE_COND)?;
    case.record("rho", &rho);
    let t = case.t_from(&T_GRID);
    let r = verify_invariance(&a, &b, t, &crate::linalg::Unitary::identity(d), &rho)?;
    Ok(Some(-r.tensor_gap / crate::divergence::INVARIANCE_TOL))
}

fn strict_concavity(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, SAMPLE_COND)?;
    let x = case.spd("X", case.dim, SAMPLE_COND)?;
    let y = case.spd("Y", case.dim, SAMPLE_COND)?;
    let t = case.t_from(&T_INTERIOR);
    verify_strict_concavity(&a, &x, &y, t, &[0.25, 0.5, 0.75]).map(|r| r.score())
}

fn fidelity_split_property(case: &mut Case) -> Result<Option<f64>> {
    let rho = case.sampler.density(case.dim, SAMPLE_COND)?;
    let sigma = case.sampler.density(case.dim, SAMPLE_COND)?;
    case.record("rho", &rho);
    case.record("sigma", &sigma);
    let t = case.t_from(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
    let (m1, m2) = fidelity_split(&rho, &sigma, t)?;
    Ok(Some(m1.min(m2) / crate::order::INEQUALITY_SLACK))
}

fn gradient_quadrature_property(case: &mut Case) -> Result<Option<f64>> {
    let (a, x) = case.pair(SAMPLE_COND)?;
    let t = case.t_from(&T_INTERIOR);
    let g = phi_gradient_b(&a, &x, t)?;
    let p = BarycenterProblem::new(vec![a], WeightVector::uniform(1)?, t)?;
    let q = gradient_quadrature(&p, &x, DEFAULT_NODES)?;
    Ok(Some(rel_score(q.as_matrix(), g.as_matrix(), 1e-6)))
}

fn power_integral_property(case: &mut Case) -> Result<Option<f64>> {
    let a = case.spd("A", case.dim, 1e4)?;
    let t = case.t_from(&[0.1, 0.5, 0.9]);
    let q = power_integral(&a, t, DEFAULT_NODES)?;
    let s = spectral_power(&a, t)?;
    Ok(Some(rel_score(q.as_matrix(), s.as_matrix(), 1e-8)))
}

// ---- barycenter -------------------------------------------------------------

fn random_problem(case: &mut Case, n: usize, commuting: bool) -> Result<BarycenterProblem> {
    let ms = if commuting {
        case.sampler.commuting(case.dim, n, SAMPLE_COND)?
    } else {
        (0..n)
            .map(|_| case.sampler.spd(case.dim, SAMPLE_COND))
            .collect::<Result<Vec<_>>>()?
    };
    for (j, m) in ms.iter().enumerate() {
        case.record(&format!("A{}", j + 1), m);
    }
    let w = case.sampler.weights(n);
    for (j, v) in w.iter().enumerate() {
        case.param(&format!("w{}", j + 1), *v);
    }
    let t = case.uniform("t", 0.05, 0.95);
    BarycenterProblem::new(ms, WeightVector::new(w)?, t)
}

fn converged(r: &SolverReport) -> Result<()> {
    if r.converged {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "solver stopped without converging ({}) after {} iterations, gradient norm {:e}",
            r.stop_reason, r.iterations, r.final_grad_norm
        )))
    }
}

fn solve_checked(p: &BarycenterProblem) -> Result<(SpdMatrix, SolverReport)> {
    let (x, r) = solve(p, &SolverConfig::default())?;
    converged(&r)?;
    Ok((x, r))
}

fn commuting_oracle(case: &mut Case) -> Result<Option<f64>> {
    let n = [2, 3, 5][case.sampler.index(3)];
    let p = random_problem(case, n, true)?;
    let (x, _) = solve_checked(&p)?;
    let want = commuting_closed_form(&p)?;
    Ok(Some(rel_score(x.as_matrix(), want.as_matrix(), BARYCENTER_TOL)))
}

fn single_input(case: &mut Case) -> Result<Option<f64>> {
    let p = random_problem(case, 1, false)?;
    let (x, _) = solve_checked(&p)?;
    Ok(Some(rel_score(x.as_matrix(), p.matrices()[0].as_matrix(), 1e-8)))
}

fn permutation_invariance(case: &mut Case) -> Result<Option<f64>> {
    let n = 2 + case.sampler.index(3);
    let p = random_problem(case, n, false)?;
    let perm = case.sampler.permutation(n);
    let (x, _) = solve_checked(&p)?;
    let (y, _) = solve_checked(&p.permuted(&perm)?)?;
    Ok(Some(rel_score(y.as_matrix(), x.as_matrix(), BARYCENTER_TOL)))
}

fn unitary_equivariance(case: &mut Case) -> Result<Option<f64>> {
    let n = 2 + case.sampler.index(3);
    let p = random_problem(case, n, false)?;
    let u = case.sampler.unitary(case.dim);
    let rotated = p
        .matrices()
        .iter()
        .map(|a| a.congruence(&u))
        .collect::<Result<Vec<_>>>()?;
    let q = BarycenterProblem::new(rotated, p.weights().clone(), p.t())?;
    let (x, _) = solve_checked(&p)?;
    let (y, _) = solve_checked(&q)?;
    Ok(Some(rel_score(y.as_matrix(), x.congruence(&u)?.as_matrix(), BARYCENTER_TOL)))
}

fn stationarity(case: &mut Case) -> Result<Option<f64>> {
    let n = 1 + case.sampler.index(5);
    let p = random_problem(case, n, false)?;
    let cfg = SolverConfig::default();
    let (x, _) = solve_checked(&p)?;
    let r = gradient_quadrature(&p, &x, DEFAULT_NODES)?;
    Ok(Some(-r.frobenius_norm() / (10.0 * cfg.grad_tol)))
}

fn multistart_uniqueness(case: &mut Case) -> Result<Option<f64>> {
    let n = 2 + case.sampler.index(3);
    let p = random_problem(case, n, false)?;
    let start = case.spd("X0", case.dim, SAMPLE_COND)?;
    let cfg = SolverConfig::default();
    let (x, _) = solve_checked(&p)?;
    let (y, r) = solve_from(&p, &cfg, &start)?;
    converged(&r)?;
    Ok(Some(rel_score(y.as_matrix(), x.as_matrix(), BARYCENTER_TOL)))
}

fn monotone_descent(case: &mut Case) -> Result<Option<f64>> {
    let n = 1 + case.sampler.index(5);
    let p = random_problem(case, n, false)?;
    let start = case.spd("X0", case.dim, SAMPLE_COND)?;
    let (_, r) = solve_from(&p, &SolverConfig::default(), &start)?;
    converged(&r)?;
    let ok = r.objective_trace.windows(2).all(|w| w[1] <= w[0]);
    Ok(Some(if ok { 0.0 } else { -2.0 }))
}

fn objective_convexity(case: &mut Case) -> Result<Option<f64>> {
    let n = 1 + case.sampler.index(5);
    let p = random_problem(case, n, false)?;
    let x = case.spd("X", case.dim, SAMPLE_COND)?;
    let y = case.spd("Y", case.dim, SAMPLE_COND)?;
    let scale = x.trace() + y.trace() + p.matrices().iter().map(|a| a.trace()).sum::<f64>();
    let (fx, fy) = (objective(&p, &x)?, objective(&p, &y)?);
    let mut worst = f64::INFINITY;
    for l in [0.25, 0.5, 0.75] {
        let m = SpdMatrix::from_matrix(x.as_matrix() * c(1.0 - l) + y.as_matrix() * c(l))?;
        let gap = (1.0 - l) * fx + l * fy - objective(&p, &m)?;
        worst = worst.min(gap / (1e-10 * scale));
    }
    Ok(Some(worst))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SuiteConfig {
        SuiteConfig::new(vec![2, 3], 6, seed)
    }

    #[test]
    fn suite_names_round_trip() {
        for k in [SuiteKind::Properties, SuiteKind::Order, SuiteKind::Divergence, SuiteKind::Barycenter, SuiteKind::All] {
            assert_eq!(k.name().parse::<SuiteKind>().unwrap(), k);
        }
        assert!("nope".parse::<SuiteKind>().is_err());
    }

    #[test]
    fn names_are_unique() {
        let all = properties(SuiteKind::All);
        let mut names: Vec<_> = all.iter().map(|p| p.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), all.len());
    }

    #[test]
    fn zero_samples_rejected() {
        let cfg = SuiteConfig::new(vec![2], 0, 1);
        assert!(run_suite(SuiteKind::Order, &cfg).is_err());
    }

    #[test]
    fn small_sweeps_pass_and_are_deterministic() {
        for kind in [SuiteKind::Properties, SuiteKind::Order, SuiteKind::Divergence] {
            let a = run_suite(kind, &small(11)).unwrap();
            for p in &a.properties {
                assert_eq!(p.violations, 0, "{}: {:?}", p.name, p.counterexample);
            }
            assert_eq!(a, run_suite(kind, &small(11)).unwrap());
        }
    }

    #[test]
    fn corrupted_tolerance_yields_replayable_counterexample() {
        let mut cfg = small(3);
        cfg.tolerance_scale = -1e6;
        let p = property("trace-inequality").unwrap();
        let r = run_property(&p, &cfg).unwrap();
        assert!(r.violations > 0);
        let cx = r.counterexample.unwrap();
        let score = replay(&cx).unwrap().unwrap();
        assert!(score < 1e6);
        assert!(cx.inputs.iter().any(|(l, _)| l == "A"));
    }
}
