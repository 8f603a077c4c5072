//! TOML run configuration and its resolution into core objects.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use volmaj_core::conditions::DEFAULT_SEED;
use volmaj_core::corpus::{self, CorpusEntry};
use volmaj_core::{KernelStage, LyapunovSpec, MajorantSpec, OuterMap, Scaled, ScalarFn, SecondDifference, VolterraProblem};

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output subdirectory in batch mode.
    pub name: Option<String>,
    pub problem: Option<ProblemSection>,
    pub majorant: Option<MajorantSection>,
    pub lyapunov: Option<LyapunovSection>,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub verify: VerifySection,
    /// Batch entries; each is a complete configuration.
    #[serde(default)]
    pub runs: Vec<RunConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub corpus: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Scalar kernel over `t, s, u`.
    pub kernel: Option<String>,
    /// Scalar outer map over `w, u, t`.
    pub phi: Option<String>,
    /// `A = a·I`.
    pub a: Option<f64>,
    /// Bound on `‖A⁻¹‖`, default `1/|a|`.
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MajorantSection {
    /// `f(t, w)`
    pub f: String,
    /// `γ(z)`
    pub gamma: String,
    pub pole: Option<f64>,
    /// Upper solution `z′(t)`.
    pub upper: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovSection {
    /// `f(r, t)`
    pub f: String,
    pub f_r: Option<String>,
    pub c: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
}

fn default_r_max() -> f64 {
    4.0
}

fn default_t_max() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub t_end: Option<f64>,
    /// Fraction of the horizon covered when `t_end` is absent.
    pub theta: Option<f64>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
}

fn default_n() -> usize {
    400
}

fn default_ratio() -> f64 {
    1.0
}

impl Default for MeshSection {
    fn default() -> Self {
        Self {
            t_end: None,
            theta: None,
            n: default_n(),
            ratio: default_ratio(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_n_max() -> usize {
    200
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            n_max: default_n_max(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_bound")]
    pub bound: f64,
}

fn default_samples() -> usize {
    200
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_bound() -> f64 {
    1.0
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            seed: default_seed(),
            bound: default_bound(),
        }
    }
}

pub const DEFAULT_THETA: f64 = 0.95;

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig =
        toml::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {}", path.display(), e.message())))?;
    if cfg.runs.iter().any(|r| !r.runs.is_empty()) {
        return Err(CliError::invalid("batch runs cannot nest"));
    }
    Ok(cfg)
}

/// Everything a command needs, resolved from one configuration.
#[derive(Debug)]
pub struct Resolved {
    /// `corpus:<name>` or `inline`, for the summary.
    pub source: String,
    pub entry: Option<CorpusEntry>,
    pub problem: Option<VolterraProblem>,
    pub majorant: Option<MajorantSpec>,
    pub lyapunov: Option<LyapunovSpec>,
    pub second_difference: Option<SecondDifference>,
    /// Mesh end for global majorants when `t_end` is absent.
    pub default_t_end: Option<f64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.mesh;
        if m.t_end.is_some() && m.theta.is_some() {
            return Err(CliError::invalid("mesh: give t_end or theta, not both"));
        }
        if let Some(t) = m.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::invalid(format!("mesh: t_end must be positive, got {t}")));
            }
        }
        if let Some(th) = m.theta {
            if !(th > 0.0 && th < 1.0) {
                return Err(CliError::invalid(format!("mesh: theta must lie in (0, 1), got {th}")));
            }
        }
        if m.n == 0 {
            return Err(CliError::invalid("mesh: n must be positive"));
        }
        if !(m.ratio > 0.0 && m.ratio <= 1.0) {
            return Err(CliError::invalid(format!("mesh: ratio must lie in (0, 1], got {}", m.ratio)));
        }
        if !(self.solver.tol > 0.0) {
            return Err(CliError::invalid(format!("solver: tol must be positive, got {}", self.solver.tol)));
        }
        if !(self.verify.bound > 0.0) {
            return Err(CliError::invalid("verify: bound must be positive"));
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        self.validate()?;
        let mut out = Resolved {
            source: "none".into(),
            entry: None,
            problem: None,
            majorant: None,
            lyapunov: None,
            second_difference: None,
            default_t_end: None,
        };
        if let Some(p) = &self.problem {
            match (&p.corpus, &p.kernel, &p.phi) {
                (Some(name), None, None) => {
                    if p.a.is_some() || p.c.is_some() {
                        return Err(CliError::invalid("problem: a and c apply to inline problems only"));
                    }
                    let params: Vec<(String, f64)> = p.params.iter().map(|(k, v)| (k.clone(), *v)).collect();
                    let e = corpus::build(name, &params)?;
                    out.source = format!("corpus:{name}");
                    out.problem = e.problem.clone();
                    out.majorant = Some(e.majorant.clone());
                    out.lyapunov = e.lyapunov.clone();
                    out.second_difference = e.second_difference;
                    out.default_t_end = Some(e.default_t_end);
                    out.entry = Some(e);
                }
                (None, Some(kernel), Some(phi)) => {
                    if !p.params.is_empty() {
                        return Err(CliError::invalid("problem: params apply to corpus entries only"));
                    }
                    let a = p.a.unwrap_or(1.0);
                    if a == 0.0 {
                        return Err(CliError::invalid("problem: a must be nonzero"));
                    }
                    let c = p.c.unwrap_or(1.0 / a.abs());
                    let problem = VolterraProblem::new(
                        vec![KernelStage::scalar(kernel, 1)?],
                        OuterMap::scalar(phi, 1)?,
                        Arc::new(Scaled::new(1, a)),
                        c,
                        f64::INFINITY,
                    )?;
                    out.source = "inline".into();
                    out.problem = Some(problem);
                }
                _ => {
                    return Err(CliError::invalid(
                        "problem: give exactly one source, either corpus or kernel and phi",
                    ))
                }
            }
        }
        if let Some(m) = &self.majorant {
            let mut spec = MajorantSpec::parse(&m.f, &m.gamma)?;
            if let Some(p) = m.pole {
                spec = spec.with_pole(p);
            }
            if let Some(u) = &m.upper {
                spec = spec.with_upper(ScalarFn::parse(u, ["t"]).map_err(volmaj_core::Error::from)?);
            }
            out.majorant = Some(spec);
        }
        if let Some(l) = &self.lyapunov {
            out.lyapunov = Some(LyapunovSpec::parse(&l.f, l.f_r.as_deref(), l.c, l.r_max, l.t_max)?);
        }
        Ok(out)
    }
}
