use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use spectral_means::barycenter::{
    gradient_quadrature, objective, solve, BarycenterProblem, SolverConfig, WeightVector,
};
use spectral_means::divergence::phi;
use spectral_means::means::{MeanKind, MeanParams};
use spectral_means::sample::Sampler;
use spectral_means::suite::{run_suite, Counterexample, SuiteConfig, SuiteKind};

use crate::matrix_file::MatrixFile;
use crate::report::{ReplayBundle, Scalar, VerdictLine};
use crate::{
    BarycenterArgs, CliError, DivergenceArgs, GenArgs, MeanArgs, Outcome, RunReport, VerifyArgs,
    EXIT_NOT_CONVERGED, EXIT_VIOLATION,
};

/// Weights within this distance of summing to one are rescaled silently.
pub const WEIGHT_SILENT_TOL: f64 = 1e-9;
/// Weights within this distance are rescaled with a warning.
pub const WEIGHT_WARN_TOL: f64 = 1e-6;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn check_t(t: f64) -> Result<(), CliError> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("--t must be finite, got {t}")))
    }
}

fn read_inputs(paths: &[&Path], report: &mut RunReport) -> Result<Vec<spectral_means::SpdMatrix>, CliError> {
    let mut files = Vec::new();
    let mut mats = Vec::new();
    for p in paths {
        let f = MatrixFile::read(p)?;
        mats.push(f.to_spd().map_err(|e| e.context(&p.display().to_string()))?);
        files.push(f);
    }
    report.digest_inputs(&files);
    Ok(mats)
}

pub fn mean(args: &MeanArgs, mut report: RunReport) -> Result<Outcome, CliError> {
    let kind: MeanKind = args.kind.parse().map_err(CliError::from_input)?;
    check_t(args.t)?;
    if kind == MeanKind::Renyi && args.z.is_none() {
        return Err(invalid("the renyi mean requires --z"));
    }
    let params = MeanParams::new(args.t, args.z).map_err(CliError::from_input)?;
    let m = read_inputs(&[&args.a, &args.b], &mut report)?;
    let x = kind.compute(&m[0], &m[1], &params).map_err(CliError::from_compute)?;
    let file = MatrixFile::from_hermitian(x.as_hermitian());
    if let Some(out) = &args.out {
        file.write(out)?;
    }
    report.scalar("kind", Scalar::Text(kind.name().into()));
    report.number("t", args.t);
    if let Some(z) = args.z {
        report.number("z", z);
    }
    report.matrices.insert("result".into(), file);
    Ok(Outcome::ok(report))
}

pub fn divergence(args: &DivergenceArgs, mut report: RunReport) -> Result<Outcome, CliError> {
    check_t(args.t)?;
    let m = read_inputs(&[&args.a, &args.b], &mut report)?;
    let v = phi(&m[0], &m[1], args.t).map_err(CliError::from_compute)?;
    report.number("t", args.t);
    report.number("phi", v.value);
    Ok(Outcome::ok(report))
}

/// Validate weights, rescaling sums that are off by rounding.
pub fn resolve_weights(raw: Option<&[f64]>, n: usize, warnings: &mut Vec<String>) -> Result<WeightVector, CliError> {
    let Some(w) = raw else {
        return WeightVector::uniform(n).map_err(CliError::from_input);
    };
    if w.len() != n {
        return Err(invalid(format!("got {} weights for {n} matrices", w.len())));
    }
    if let Some(v) = w.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(invalid(format!("weights must be positive, got {v}")));
    }
    let sum: f64 = w.iter().sum();
    let off = (sum - 1.0).abs();
    if off > WEIGHT_WARN_TOL {
        return Err(invalid(format!("weights must sum to 1, got {sum}")));
    }
    if off > WEIGHT_SILENT_TOL {
        warnings.push(format!("weights summed to {sum}; renormalized"));
    }
    WeightVector::normalized(w.to_vec(), WEIGHT_WARN_TOL)
        .map(|(w, _)| w)
        .map_err(CliError::from_input)
}

pub fn barycenter(args: &BarycenterArgs, mut report: RunReport) -> Result<Outcome, CliError> {
    check_t(args.t)?;
    let cfg = SolverConfig {
        max_iters: args.max_iters,
        grad_tol: args.grad_tol,
        ..SolverConfig::default()
    };
    cfg.validate().map_err(CliError::from_input)?;
    let paths: Vec<&Path> = args.files.iter().map(PathBuf::as_path).collect();
    let mats = read_inputs(&paths, &mut report)?;
    let weights = resolve_weights(args.weights.as_deref(), mats.len(), &mut report.warnings)?;
    let problem = BarycenterProblem::new(mats, weights, args.t).map_err(CliError::from_input)?;
    let (x, sr) = solve(&problem, &cfg).map_err(CliError::from_compute)?;

    report.number("t", args.t);
    report.scalar("iterations", Scalar::Integer(sr.iterations as i64));
    report.number("final_grad_norm", sr.final_grad_norm);
    report.scalar("converged", Scalar::Flag(sr.converged));
    report.scalar("stop_reason", Scalar::Text(sr.stop_reason.to_string()));
    report.number("objective", objective(&problem, &x).map_err(CliError::from_compute)?);
    if args.check {
        let r = gradient_quadrature(&problem, &x, args.nodes).map_err(CliError::from_compute)?;
        let bound = 10.0 * cfg.grad_tol * (1.0 + x.frobenius_norm());
        report.number("stationarity_residual", r.frobenius_norm());
        report.number("stationarity_bound", bound);
        report.scalar("stationarity_holds", Scalar::Flag(r.frobenius_norm() <= bound));
    }
    let file = MatrixFile::from_hermitian(x.as_hermitian());
    if let Some(out) = &args.out {
        file.write(out)?;
    }
    report.matrices.insert("barycenter".into(), file);
    let exit = if sr.converged { 0 } else { EXIT_NOT_CONVERGED };
    Ok(Outcome {
        report,
        exit,
        raw_output: None,
    })
}

/// `"3"`, `"2,3,5"` or the inclusive range `"2..6"`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || invalid(format!("cannot parse --dims '{s}'"));
    let dims: Vec<usize> = if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (lo..=hi).collect()
    } else {
        s.split(',').map(|d| d.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if dims.is_empty() || dims.contains(&0) {
        return Err(invalid("--dims must name at least one dimension >= 1"));
    }
    Ok(dims)
}

fn bundle(cx: &Counterexample) -> ReplayBundle {
    ReplayBundle {
        property: cx.property.clone(),
        seed: cx.seed,
        sample: cx.sample,
        dim: cx.dim,
        params: cx.params.iter().cloned().collect(),
        inputs: cx
            .inputs
            .iter()
            .map(|(k, m)| (k.clone(), MatrixFile::from_hermitian(m)))
            .collect::<BTreeMap<_, _>>(),
        detail: cx.detail.clone(),
    }
}

pub fn verify(args: &VerifyArgs, mut report: RunReport) -> Result<Outcome, CliError> {
    let suite: SuiteKind = args.suite.parse().map_err(CliError::from_input)?;
    let dims = parse_dims(&args.dims)?;
    if args.samples == 0 {
        return Err(invalid("--samples must be at least 1"));
    }
    let cfg = SuiteConfig {
        dims,
        samples: args.samples,
        seed: args.seed,
        tolerance_scale: args.tolerance_scale,
    };
    let r = run_suite(suite, &cfg).map_err(CliError::from_input)?;
    report.scalar("suite", Scalar::Text(suite.name().into()));
    report.scalar("seed", Scalar::Integer(args.seed as i64));
    report.scalar("samples", Scalar::Integer(args.samples as i64));
    report.scalar("violations", Scalar::Integer(r.violations() as i64));
    for p in &r.properties {
        report.verdicts.push(VerdictLine {
            property: p.name.clone(),
            suite: p.suite.name().into(),
            passed: p.passed,
            skipped: p.skipped,
            violations: p.violations,
            worst_margin: p.worst_score,
            observed_min: p.observed_min,
        });
    }
    report.replay = r.counterexamples().map(bundle).collect();
    if let (Some(out), false) = (&args.out, report.replay.is_empty()) {
        let text = serde_json::to_string_pretty(&report.replay).expect("bundles serialize");
        std::fs::write(out, text + "\n").map_err(|e| CliError::Io(format!("cannot write {}: {e}", out.display())))?;
    }
    let exit = if r.passed() { 0 } else { EXIT_VIOLATION };
    Ok(Outcome {
        report,
        exit,
        raw_output: None,
    })
}

fn indexed_path(path: &Path, i: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{i}"),
    };
    path.with_file_name(name)
}

pub fn gen(args: &GenArgs, mut report: RunReport) -> Result<Outcome, CliError> {
    if args.dim == 0 {
        return Err(invalid("--dim must be at least 1"));
    }
    if args.count == 0 {
        return Err(invalid("--count must be at least 1"));
    }
    let mut sampler = Sampler::new(args.seed);
    let files = (0..args.count)
        .map(|_| {
            sampler
                .spd(args.dim, args.cond)
                .map(|m| MatrixFile::from_hermitian(m.as_hermitian()))
                .map_err(CliError::from_input)
        })
        .collect::<Result<Vec<_>, _>>()?;
    report.scalar("seed", Scalar::Integer(args.seed as i64));
    report.number("cond", args.cond);
    let raw_output = match &args.out {
        Some(out) if args.count == 1 => {
            files[0].write(out)?;
            None
        }
        Some(out) => {
            for (i, f) in files.iter().enumerate() {
                f.write(&indexed_path(out, i))?;
            }
            None
        }
        None => Some(files.iter().map(|f| f.to_json() + "\n").collect()),
    };
    for (i, f) in files.into_iter().enumerate() {
        report.matrices.insert(format!("matrix_{i}"), f);
    }
    Ok(Outcome {
        report,
        exit: 0,
        raw_output,
    })
}
