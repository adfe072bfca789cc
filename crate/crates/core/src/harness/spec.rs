use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{HarnessError, HarnessResult};
use crate::solvers::{ShortStepRule, SolverConfig};

/// A registered problem family with its parameters.
///
/// Text form: `worst:b=100,n=50`, `logistic:path=data/a.svm,alpha=1e-4`,
/// `quadratic:n=20,alpha=1,beta=100,seed=7`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ProblemSpec {
    Worst {
        b: f64,
        n: usize,
    },
    Logistic {
        path: PathBuf,
        alpha: f64,
    },
    Quadratic {
        n: usize,
        alpha: f64,
        beta: f64,
        seed: Option<u64>,
    },
}

pub const PROBLEM_FAMILIES: &[&str] = &["worst", "logistic", "quadratic"];

fn parse_params<'a>(text: &'a str, what: &str, allowed: &[&str]) -> HarnessResult<Vec<(String, &'a str)>> {
    let mut out: Vec<(String, &str)> = Vec::new();
    if text.is_empty() {
        return Ok(out);
    }
    for item in text.split(',') {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| HarnessError::Usage(format!("{what}: expected key=value, got {item:?}")))?;
        let k = k.trim().to_ascii_lowercase();
        if !allowed.contains(&k.as_str()) {
            return Err(HarnessError::Usage(format!(
                "{what}: unknown parameter {k:?} (expected one of {})",
                allowed.join(", ")
            )));
        }
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(HarnessError::Usage(format!("{what}: parameter {k:?} given twice")));
        }
        out.push((k, v.trim()));
    }
    Ok(out)
}

fn parse_value<T: FromStr>(what: &str, key: &str, v: &str) -> HarnessResult<T> {
    v.parse()
        .map_err(|_| HarnessError::Usage(format!("{what}: bad value {v:?} for {key}")))
}

impl FromStr for ProblemSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let family = family.trim();
        match family {
            "worst" => {
                let (mut b, mut n) = (100.0, 50);
                for (k, v) in parse_params(rest, s, &["b", "n"])? {
                    match k.as_str() {
                        "b" => b = parse_value(s, &k, v)?,
                        _ => n = parse_value(s, &k, v)?,
                    }
                }
                Ok(ProblemSpec::Worst { b, n })
            }
            "logistic" => {
                let (mut path, mut alpha) = (None, 1e-4);
                for (k, v) in parse_params(rest, s, &["path", "alpha"])? {
                    match k.as_str() {
                        "path" => path = Some(PathBuf::from(v)),
                        _ => alpha = parse_value(s, &k, v)?,
                    }
                }
                let path = path.ok_or_else(|| HarnessError::Usage(format!("{s}: logistic needs path=FILE")))?;
                Ok(ProblemSpec::Logistic { path, alpha })
            }
            "quadratic" => {
                let (mut n, mut alpha, mut beta, mut seed) = (20, 1.0, 100.0, None);
                for (k, v) in parse_params(rest, s, &["n", "alpha", "beta", "seed"])? {
                    match k.as_str() {
                        "n" => n = parse_value(s, &k, v)?,
                        "alpha" => alpha = parse_value(s, &k, v)?,
                        "beta" => beta = parse_value(s, &k, v)?,
                        _ => seed = Some(parse_value(s, &k, v)?),
                    }
                }
                Ok(ProblemSpec::Quadratic { n, alpha, beta, seed })
            }
            other => Err(HarnessError::Usage(format!(
                "unknown problem {other:?}; valid problems: {}",
                PROBLEM_FAMILIES.join(", ")
            ))),
        }
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::Worst { b, n } => write!(f, "worst:b={b},n={n}"),
            ProblemSpec::Logistic { path, alpha } => write!(f, "logistic:path={},alpha={alpha}", path.display()),
            ProblemSpec::Quadratic { n, alpha, beta, seed } => {
                write!(f, "quadratic:n={n},alpha={alpha},beta={beta}")?;
                if let Some(s) = seed {
                    write!(f, ",seed={s}")?;
                }
                Ok(())
            }
        }
    }
}

impl TryFrom<String> for ProblemSpec {
    type Error = HarnessError;

    fn try_from(s: String) -> HarnessResult<Self> {
        s.parse()
    }
}

impl From<ProblemSpec> for String {
    fn from(p: ProblemSpec) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SolverKind {
    Oqa,
    OqaMem,
    Geo,
    GeoSub,
    Nesterov,
    NesterovLs,
    Gd,
    ProxGeoSub,
}

impl SolverKind {
    pub const ALL: [SolverKind; 8] = [
        SolverKind::Oqa,
        SolverKind::OqaMem,
        SolverKind::Geo,
        SolverKind::GeoSub,
        SolverKind::Nesterov,
        SolverKind::NesterovLs,
        SolverKind::Gd,
        SolverKind::ProxGeoSub,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Oqa => "oqa",
            SolverKind::OqaMem => "oqa-mem",
            SolverKind::Geo => "geo",
            SolverKind::GeoSub => "geo-sub",
            SolverKind::Nesterov => "nesterov",
            SolverKind::NesterovLs => "nesterov-ls",
            SolverKind::Gd => "gd",
            SolverKind::ProxGeoSub => "prox-geo-sub",
        }
    }
}

impl FromStr for SolverKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        SolverKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = SolverKind::ALL.iter().map(|k| k.name()).collect();
            HarnessError::Usage(format!("unknown solver {s:?}; valid solvers: {}", names.join(", ")))
        })
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TryFrom<String> for SolverKind {
    type Error = HarnessError;

    fn try_from(s: String) -> HarnessResult<Self> {
        s.parse()
    }
}

impl From<SolverKind> for String {
    fn from(k: SolverKind) -> String {
        k.name().to_string()
    }
}

/// A solver name with per-solver config overrides, e.g. `oqa-mem:memory=5`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpecifier {
    pub kind: SolverKind,
    pub overrides: Vec<(String, String)>,
    text: String,
}

const SOLVER_KEYS: &[&str] = &["memory", "max-iter", "gap-tol", "ls-tol", "short-step"];

impl SolverSpecifier {
    pub fn label(&self) -> &str {
        &self.text
    }

    pub fn apply(&self, cfg: &mut SolverConfig) -> HarnessResult<()> {
        let what = &self.text;
        for (k, v) in &self.overrides {
            match k.as_str() {
                "memory" => cfg.memory = parse_value(what, k, v)?,
                "max-iter" => cfg.max_iterations = parse_value(what, k, v)?,
                "gap-tol" => cfg.gap_tolerance = parse_value(what, k, v)?,
                "ls-tol" => cfg.line_search_tol = parse_value(what, k, v)?,
                _ => {
                    cfg.short_step = match v.as_str() {
                        "line-search" => ShortStepRule::LineSearch,
                        "beta" => ShortStepRule::Beta,
                        _ => {
                            return Err(HarnessError::Usage(format!(
                                "{what}: short-step must be line-search or beta"
                            )))
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl FromStr for SolverSpecifier {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let kind = name.trim().parse()?;
        let overrides = parse_params(rest, s, SOLVER_KEYS)?
            .into_iter()
            .map(|(k, v)| (k, v.to_string()))
            .collect();
        Ok(SolverSpecifier {
            kind,
            overrides,
            text: s.replace(',', ";"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartPoint {
    #[default]
    Zero,
    /// Uniform in `[-1, 1]^n`, drawn from the run seed.
    Random,
}

impl FromStr for StartPoint {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        match s {
            "zero" => Ok(StartPoint::Zero),
            "random" => Ok(StartPoint::Random),
            _ => Err(HarnessError::Usage(format!(
                "start point must be zero or random, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(HarnessError::Usage(format!("format must be csv or json, got {s:?}"))),
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub problem: ProblemSpec,
    pub solver: SolverKind,
    #[serde(default)]
    pub config: SolverConfig,
    #[serde(default)]
    pub x0: StartPoint,
    #[serde(default)]
    pub seed: u64,
    /// Weight of an l1 term, for `prox-geo-sub`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl RunSpec {
    pub fn new(problem: ProblemSpec, solver: SolverKind) -> Self {
        Self {
            problem,
            solver,
            config: SolverConfig::default(),
            x0: StartPoint::Zero,
            seed: 0,
            l1: None,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

/// A run spec with every field optional, as read from a config file or
/// assembled from flags. Later layers win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialSpec {
    pub problem: Option<ProblemSpec>,
    pub solver: Option<SolverKind>,
    pub config: Option<SolverConfig>,
    pub x0: Option<StartPoint>,
    pub seed: Option<u64>,
    pub l1: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl PartialSpec {
    pub fn from_json(text: &str) -> HarnessResult<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Usage(format!("config file: {e}")))
    }

    pub fn read(path: &std::path::Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::input(path, e))?;
        Self::from_json(&text).map_err(|e| HarnessError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn overlay(self, top: PartialSpec) -> PartialSpec {
        PartialSpec {
            problem: top.problem.or(self.problem),
            solver: top.solver.or(self.solver),
            config: top.config.or(self.config),
            x0: top.x0.or(self.x0),
            seed: top.seed.or(self.seed),
            l1: top.l1.or(self.l1),
            out: top.out.or(self.out),
            format: top.format.or(self.format),
        }
    }

    pub fn into_run_spec(self) -> HarnessResult<RunSpec> {
        let problem = self
            .problem
            .ok_or_else(|| HarnessError::Usage("no problem given (use --problem or a config file)".into()))?;
        let solver = self
            .solver
            .ok_or_else(|| HarnessError::Usage("no solver given (use --solver or a config file)".into()))?;
        Ok(RunSpec {
            problem,
            solver,
            config: self.config.unwrap_or_default(),
            x0: self.x0.unwrap_or_default(),
            seed: self.seed.unwrap_or(0),
            l1: self.l1,
            out: self.out,
            format: self.format.unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_round_trip() {
        for s in [
            "worst:b=100,n=50",
            "logistic:path=data/x.svm,alpha=0.0001",
            "quadratic:n=20,alpha=1,beta=100,seed=7",
            "quadratic:n=3,alpha=0.5,beta=2",
        ] {
            let p: ProblemSpec = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert_eq!(
            "worst".parse::<ProblemSpec>().unwrap(),
            ProblemSpec::Worst { b: 100.0, n: 50 }
        );
        assert_eq!(
            "worst:B=10,n=4".parse::<ProblemSpec>().unwrap(),
            ProblemSpec::Worst { b: 10.0, n: 4 }
        );
    }

    #[test]
    fn problem_errors_are_usage() {
        for s in [
            "foo:n=1",
            "worst:c=1",
            "worst:n=x",
            "logistic:alpha=1",
            "worst:n=2,n=3",
            "worst:n",
        ] {
            let e = s.parse::<ProblemSpec>().unwrap_err();
            assert_eq!(e.exit_code(), super::super::EXIT_USAGE, "{s}");
        }
    }

    #[test]
    fn solver_registry() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        let e = "foo".parse::<SolverKind>().unwrap_err().to_string();
        assert!(e.contains("foo") && e.contains("oqa-mem") && e.contains("prox-geo-sub"));
    }

    #[test]
    fn specifier_overrides() {
        let s: SolverSpecifier = "oqa-mem:memory=5,max-iter=10".parse().unwrap();
        assert_eq!(s.kind, SolverKind::OqaMem);
        assert_eq!(s.label(), "oqa-mem:memory=5;max-iter=10");
        let mut cfg = SolverConfig::default();
        s.apply(&mut cfg).unwrap();
        assert_eq!((cfg.memory, cfg.max_iterations), (5, 10));
        assert!("oqa:speed=3".parse::<SolverSpecifier>().is_err());
        let bad: SolverSpecifier = "gd:short-step=long".parse().unwrap();
        assert!(bad.apply(&mut cfg).is_err());
    }

    #[test]
    fn spec_json_and_overlay() {
        let file = PartialSpec::from_json(
            r#"{"problem": "worst:b=10,n=5", "solver": "geo", "config": {"max_iterations": 7}, "seed": 3}"#,
        )
        .unwrap();
        let flags = PartialSpec {
            solver: Some(SolverKind::Gd),
            ..PartialSpec::default()
        };
        let spec = file.overlay(flags).into_run_spec().unwrap();
        assert_eq!(spec.solver, SolverKind::Gd);
        assert_eq!(spec.config.max_iterations, 7);
        assert_eq!(spec.seed, 3);
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<RunSpec>(&json).unwrap(), spec);
        assert!(PartialSpec::from_json(r#"{"solver": "foo"}"#).is_err());
        assert!(PartialSpec::from_json(r#"{"colour": 1}"#).is_err());
        assert!(PartialSpec::default().into_run_spec().is_err());
    }
}
