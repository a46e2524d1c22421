//! Flat `key = value` experiment specs.
//!
//! ```text
//! # LASSO comparison
//! problem = lasso
//! n = 1000
//! m = 100
//! mu = 1e-3
//! solvers = ipzopm, zopg
//! repeat = 5
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key can also be given on
//! the command line, which overrides the file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use ipzo_core::solvers::SolverKind;

use crate::CliError;

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "IPZO_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "ipzo-out";

/// Every key the format knows about.
pub const KEYS: &[&str] = &[
    "problem", "n", "m", "mu", "seed", "path", "lambda", "fold_l2", "n_features", "solvers", "max_iter",
    "tol", "sigma", "delta", "epsilon", "eta", "max_inner", "repeat", "jobs", "out", "no_timing",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// All violations found in one spec.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecErrors(pub Vec<SpecError>);

impl SpecErrors {
    pub fn fields(&self) -> Vec<&str> {
        self.0.iter().map(|e| e.field.as_str()).collect()
    }
}

impl fmt::Display for SpecErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for SpecErrors {}

/// Key-value pairs as written, with the line each came from (`None` for
/// command-line overrides).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawSpec {
    entries: BTreeMap<String, (String, Option<usize>)>,
}

impl RawSpec {
    pub fn parse(text: &str) -> Result<Self, SpecErrors> {
        let mut raw = RawSpec::default();
        let mut errors = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                errors.push(SpecError {
                    field: content.to_string(),
                    line: Some(line_no),
                    message: "expected `key = value`".into(),
                });
                continue;
            };
            let key = key.trim().to_string();
            if let Some((_, Some(prev))) = raw.entries.get(&key) {
                errors.push(SpecError {
                    field: key.clone(),
                    line: Some(line_no),
                    message: format!("duplicate key (first set on line {prev})"),
                });
                continue;
            }
            raw.entries.insert(key, (value.trim().to_string(), Some(line_no)));
        }
        if errors.is_empty() {
            Ok(raw)
        } else {
            Err(SpecErrors(errors))
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::parse(&text)?)
    }

    /// Sets or overrides a key.
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), (value.into(), None));
    }

    /// Applies a `KEY=VALUE` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), SpecErrors> {
        match pair.split_once('=') {
            Some((k, v)) => {
                self.set(k.trim(), v.trim());
                Ok(())
            }
            None => Err(SpecErrors(vec![SpecError {
                field: pair.to_string(),
                line: None,
                message: "override must look like KEY=VALUE".into(),
            }])),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).and_then(|(_, l)| *l)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Lasso {
        n: usize,
        m: usize,
        mu: f64,
    },
    Classify {
        path: PathBuf,
        lambda: f64,
        mu: f64,
        fold_l2: bool,
        n_features: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaChoice {
    /// `5000 ‖x_k − x_{k−1}‖`, `σ_0 = 1`.
    Paper,
    /// `2 (L_f + max ‖a_i‖²)`; LASSO only.
    Theoretical,
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaChoice {
    /// Tune over the standard grid, keep the best run.
    Grid,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverKind>,
    /// Base seed; repeat `r` uses `seed + r` for the instance and `x_0`.
    pub seed: u64,
    pub repeat: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub sigma: SigmaChoice,
    /// `None` for the `1/√(k+1)` schedule.
    pub delta: Option<f64>,
    /// `None` for the `1/(k+1)²` schedule.
    pub epsilon: Option<f64>,
    pub eta: EtaChoice,
    pub max_inner: usize,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    pub out: PathBuf,
    pub no_timing: bool,
}

/// Collects typed values and records every violation instead of stopping at
/// the first.
struct Reader<'a> {
    raw: &'a RawSpec,
    errors: Vec<SpecError>,
}

impl Reader<'_> {
    fn fail(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(SpecError {
            field: key.to_string(),
            line: self.raw.line(key),
            message: message.into(),
        });
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, default: T, what: &str) -> T {
        match self.raw.get(key) {
            None => default,
            Some(v) => v.parse().unwrap_or_else(|_| {
                self.fail(key, format!("`{v}` is not {what}"));
                default
            }),
        }
    }

    fn float(&mut self, key: &str, default: f64, nonneg: bool) -> f64 {
        let v = self.parsed(key, default, "a number");
        if !v.is_finite() {
            self.fail(key, "must be finite");
        } else if nonneg && v < 0.0 {
            self.fail(key, format!("must be nonnegative (got {v})"));
        }
        v
    }

    fn positive(&mut self, key: &str) -> Option<f64> {
        let v: f64 = self.parsed(key, 1.0, "a number");
        if v > 0.0 && v.is_finite() {
            Some(v)
        } else {
            self.fail(key, format!("must be positive and finite (got {v})"));
            None
        }
    }

    fn count(&mut self, key: &str, default: usize, min: usize) -> usize {
        let v = self.parsed(key, default, "a nonnegative integer");
        if v < min {
            self.fail(key, format!("must be at least {min}"));
        }
        v
    }

    fn flag(&mut self, key: &str) -> bool {
        match self.raw.get(key) {
            None => false,
            Some("true" | "1" | "yes") => true,
            Some("false" | "0" | "no") => false,
            Some(v) => {
                self.fail(key, format!("`{v}` is not a boolean"));
                false
            }
        }
    }
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

impl ExperimentSpec {
    /// Full static validation; reports every problem at once.
    pub fn from_raw(raw: &RawSpec) -> Result<Self, SpecErrors> {
        let mut r = Reader {
            raw,
            errors: Vec::new(),
        };
        let unknown: Vec<String> = raw
            .entries
            .keys()
            .filter(|k| !KEYS.contains(&k.as_str()))
            .cloned()
            .collect();
        for key in unknown {
            r.fail(&key, "unknown key");
        }

        let problem = match raw.get("problem") {
            Some("lasso") => {
                let n = r.count("n", 1000, 1);
                let m = r.count("m", 100, 1);
                let mu = r.float("mu", 1e-3, true);
                Some(ProblemSpec::Lasso { n, m, mu })
            }
            Some("classify") => {
                let path = raw.get("path").map(PathBuf::from);
                match &path {
                    None => r.fail("path", "classify needs a dataset path"),
                    Some(p) if !p.is_file() => r.fail("path", format!("{} is not a readable file", p.display())),
                    Some(_) => {}
                }
                let lambda = r.float("lambda", 1e-3, true);
                let mu = r.float("mu", 1e-3, true);
                let fold_l2 = r.flag("fold_l2");
                let n_features = raw
                    .get("n_features")
                    .map(|_| r.count("n_features", 1, 1));
                path.map(|path| ProblemSpec::Classify {
                    path,
                    lambda,
                    mu,
                    fold_l2,
                    n_features,
                })
            }
            Some(other) => {
                r.fail("problem", format!("`{other}` is not lasso or classify"));
                None
            }
            None => {
                r.fail("problem", "missing (lasso or classify)");
                None
            }
        };
        if matches!(problem, Some(ProblemSpec::Lasso { .. })) {
            for key in ["path", "lambda", "fold_l2", "n_features"] {
                if raw.get(key).is_some() {
                    r.fail(key, "only applies to problem = classify");
                }
            }
        }
        if matches!(problem, Some(ProblemSpec::Classify { .. })) {
            for key in ["n", "m"] {
                if raw.get(key).is_some() {
                    r.fail(key, "only applies to problem = lasso");
                }
            }
        }

        let mut solvers = Vec::new();
        for name in raw.get("solvers").unwrap_or("ipzopm,zopg").split(',') {
            let name = name.trim();
            match name.parse::<SolverKind>() {
                Ok(k) if !solvers.contains(&k) => solvers.push(k),
                Ok(_) => r.fail("solvers", format!("`{name}` listed twice")),
                Err(_) => r.fail("solvers", format!("`{name}` is not ipzopm or zopg")),
            }
        }
        if solvers.is_empty() {
            r.fail("solvers", "need at least one solver");
        }

        let seed = r.parsed("seed", 0u64, "an unsigned integer");
        let repeat = r.count("repeat", 1, 1);
        let max_iter = r.count("max_iter", 1000, 1);
        let tol = r.float("tol", 1e-3, true);
        let max_inner = r.count("max_inner", 10_000, 1);
        let jobs = r.count("jobs", 0, 0);
        let no_timing = r.flag("no_timing");

        let sigma = match raw.get("sigma") {
            None | Some("paper") => SigmaChoice::Paper,
            Some("theoretical") => {
                if matches!(problem, Some(ProblemSpec::Classify { .. })) {
                    r.fail("sigma", "theoretical sigma needs known constants (problem = lasso)");
                }
                SigmaChoice::Theoretical
            }
            Some(_) => SigmaChoice::Constant(r.positive("sigma").unwrap_or(1.0)),
        };
        let delta = match raw.get("delta") {
            None | Some("schedule") => None,
            Some(_) => r.positive("delta"),
        };
        let epsilon = match raw.get("epsilon") {
            None | Some("schedule") => None,
            Some(_) => r.positive("epsilon"),
        };
        let eta = match raw.get("eta") {
            None | Some("grid") => EtaChoice::Grid,
            Some(_) => EtaChoice::Value(r.positive("eta").unwrap_or(1e-3)),
        };

        let out = raw.get("out").map(PathBuf::from).unwrap_or_else(default_out_dir);
        if out.exists() && !out.is_dir() {
            r.fail("out", format!("{} exists and is not a directory", out.display()));
        } else if out.metadata().is_ok_and(|m| m.permissions().readonly()) {
            r.fail("out", format!("{} is not writable", out.display()));
        }

        match problem {
            Some(problem) if r.errors.is_empty() => Ok(ExperimentSpec {
                problem,
                solvers,
                seed,
                repeat,
                max_iter,
                tol,
                sigma,
                delta,
                epsilon,
                eta,
                max_inner,
                jobs,
                out,
                no_timing,
            }),
            _ => Err(SpecErrors(r.errors)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> Result<ExperimentSpec, SpecErrors> {
        ExperimentSpec::from_raw(&RawSpec::parse(text).unwrap())
    }

    #[test]
    fn lasso_defaults() {
        let s = spec("problem = lasso\nout = /tmp/x").unwrap();
        assert_eq!(
            s.problem,
            ProblemSpec::Lasso {
                n: 1000,
                m: 100,
                mu: 1e-3
            }
        );
        assert_eq!(s.solvers, vec![SolverKind::Ipzopm, SolverKind::Zopg]);
        assert_eq!((s.repeat, s.max_iter, s.tol), (1, 1000, 1e-3));
        assert_eq!(s.sigma, SigmaChoice::Paper);
        assert_eq!(s.eta, EtaChoice::Grid);
    }

    #[test]
    fn comments_and_overrides() {
        let mut raw = RawSpec::parse("# header\nproblem = lasso # trailing\n\nn = 5\n").unwrap();
        raw.set("n", "7");
        match ExperimentSpec::from_raw(&raw).unwrap().problem {
            ProblemSpec::Lasso { n, .. } => assert_eq!(n, 7),
            p => panic!("{p:?}"),
        }
    }

    #[test]
    fn negative_mu_names_the_field() {
        let e = spec("problem = lasso\nmu = -0.1").unwrap_err();
        assert_eq!(e.fields(), vec!["mu"]);
        assert_eq!(e.0[0].line, Some(2));
    }

    #[test]
    fn classify_without_path() {
        let e = spec("problem = classify").unwrap_err();
        assert_eq!(e.fields(), vec!["path"]);
    }

    #[test]
    fn lists_every_violation() {
        let e = spec("problem = lasso\nn = 0\nmu = x\nsolvers = ipzopm, foo\nsigma = -1\nbogus = 1").unwrap_err();
        let mut fields = e.fields();
        fields.sort();
        assert_eq!(fields, vec!["bogus", "mu", "n", "sigma", "solvers"]);
    }

    #[test]
    fn syntax_errors() {
        let e = RawSpec::parse("problem = lasso\njunk\nproblem = classify").unwrap_err();
        assert_eq!(e.0.len(), 2);
        assert_eq!(e.0[0].line, Some(2));
        assert_eq!(e.0[1].line, Some(3));
    }

    #[test]
    fn value_choices() {
        let s = spec("problem = lasso\nsigma = 12.5\neta = 0.01\ndelta = 0.1\nepsilon = schedule").unwrap();
        assert_eq!(s.sigma, SigmaChoice::Constant(12.5));
        assert_eq!(s.eta, EtaChoice::Value(0.01));
        assert_eq!(s.delta, Some(0.1));
        assert_eq!(s.epsilon, None);
        assert!(spec("problem = lasso\nsigma = theoretical").is_ok());
        assert!(spec("problem = lasso\nno_timing = maybe").is_err());
    }

    #[test]
    fn cross_problem_keys_rejected() {
        assert_eq!(spec("problem = lasso\nlambda = 1").unwrap_err().fields(), vec!["lambda"]);
    }
}
