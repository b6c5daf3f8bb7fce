use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::matrix_file::MatrixFile;

/// `x` with 15 significant digits, in the style of C's `%.15g`.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // `{:e}` with a precision rounds the exact binary value half-to-even
    let e = format!("{:.14e}", x);
    let (mant, exp) = e.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mant) = mant.strip_prefix('-').map_or(("", mant), |m| ("-", m));
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-4..15).contains(&exp) {
        let body = if exp >= 0 {
            let split = exp as usize + 1;
            format!("{}.{}", &digits[..split], &digits[split..])
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        };
        format!("{sign}{}", trim(body))
    } else {
        let body = trim(format!("{}.{}", &digits[..1], &digits[1..]));
        format!("{sign}{body}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

/// `x` rounded to 15 significant digits.
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Integer(i64),
    Flag(bool),
    Text(String),
}

impl Scalar {
    fn render(&self) -> String {
        match self {
            Scalar::Number(x) => fmt_sig(*x),
            Scalar::Integer(i) => i.to_string(),
            Scalar::Flag(b) => b.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }

    fn rounded(&self) -> Self {
        match self {
            Scalar::Number(x) if x.is_finite() => Scalar::Number(round_sig(*x)),
            Scalar::Number(x) => Scalar::Text(x.to_string()),
            other => other.clone(),
        }
    }
}

/// One verified property.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictLine {
    pub property: String,
    pub suite: String,
    pub passed: usize,
    pub skipped: usize,
    pub violations: usize,
    /// Worst score in units of the property's tolerance; `>= -1` passes.
    pub worst_margin: Option<f64>,
    pub observed_min: Option<f64>,
}

/// Everything needed to regenerate a failing case offline.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayBundle {
    pub property: String,
    pub seed: u64,
    pub sample: usize,
    pub dim: usize,
    pub params: BTreeMap<String, f64>,
    pub inputs: BTreeMap<String, MatrixFile>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub matrices: BTreeMap<String, MatrixFile>,
    pub scalars: BTreeMap<String, Scalar>,
    pub verdicts: Vec<VerdictLine>,
    pub replay: Vec<ReplayBundle>,
    pub warnings: Vec<String>,
    /// Excluded from determinism comparisons.
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    pub fn digest_inputs<'a>(&mut self, inputs: impl IntoIterator<Item = &'a MatrixFile>) {
        let mut h = Sha256::new();
        for m in inputs {
            h.update(m.to_json().as_bytes());
            h.update(b"\n");
        }
        self.inputs_digest = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    }

    pub fn scalar(&mut self, name: &str, v: Scalar) {
        self.scalars.insert(name.to_string(), v);
    }

    pub fn number(&mut self, name: &str, v: f64) {
        self.scalar(name, Scalar::Number(v));
    }

    pub fn to_structured(&self) -> String {
        let mut r = self.clone();
        for v in r.scalars.values_mut() {
            *v = v.rounded();
        }
        for v in &mut r.verdicts {
            v.worst_margin = v.worst_margin.map(round_sig);
            v.observed_min = v.observed_min.map(round_sig);
        }
        r.wall_time_s = round_sig(r.wall_time_s);
        serde_json::to_string_pretty(&r).expect("reports always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", self.command.join(" "));
        if !self.inputs_digest.is_empty() {
            let _ = writeln!(s, "inputs: sha256 {}", self.inputs_digest);
        }
        for (k, v) in &self.scalars {
            let _ = writeln!(s, "{k}: {}", v.render());
        }
        for (k, m) in &self.matrices {
            let _ = writeln!(s, "{k} ({0}x{0}):", m.dim);
            for row in m.entries.chunks(m.dim) {
                let cells: Vec<String> = row
                    .iter()
                    .map(|[re, im]| {
                        if *im == 0.0 {
                            fmt_sig(*re)
                        } else {
                            format!("{}{}{}i", fmt_sig(*re), if *im < 0.0 { "-" } else { "+" }, fmt_sig(im.abs()))
                        }
                    })
                    .collect();
                let _ = writeln!(s, "  [{}]", cells.join(", "));
            }
        }
        for v in &self.verdicts {
            let status = if v.violations == 0 { "PASS" } else { "FAIL" };
            let margin = v.worst_margin.map_or("-".into(), fmt_sig);
            let _ = write!(
                s,
                "{status} {}/{}: passed {}, skipped {}, violations {}, worst margin {margin}",
                v.suite, v.property, v.passed, v.skipped, v.violations
            );
            if let Some(m) = v.observed_min {
                let _ = write!(s, ", observed min {}", fmt_sig(m));
            }
            s.push('\n');
        }
        for r in &self.replay {
            let _ = writeln!(
                s,
                "counterexample {}: seed {}, sample {}, dim {} ({})",
                r.property, r.seed, r.sample, r.dim, r.detail
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "wall time: {} s", fmt_sig(self.wall_time_s));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(2.0), "2");
        assert_eq!(fmt_sig(-3.25), "-3.25");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt_sig(2.0 / 3.0), "0.666666666666667");
        assert_eq!(fmt_sig(123456789012345678.0), "1.23456789012346e+17");
        assert_eq!(fmt_sig(1.5e-7), "1.5e-07");
        assert_eq!(fmt_sig(1e-4), "0.0001");
        assert_eq!(fmt_sig(1e-5), "1e-05");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
    }
}
