//! Built-in reference problems with their majorants and closed forms.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use crate::algebraic_majorant::LyapunovSpec;
use crate::error::{Error, Result};
use crate::expr::ExprError;
use crate::func::ScalarFn;
use crate::integral_majorant::{Classification, MajorantSpec};
use crate::operators::{InverseMethod, LinearOperator, Scaled, SecondDifference};
use crate::problem::{KernelStage, OuterMap, Trajectory, VolterraProblem};

pub type ClosedForm = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub description: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusInfo {
    pub name: &'static str,
    pub params: &'static [ParamSpec],
    pub notes: &'static str,
}

const EXAMPLE1_NOTES: &str = "u = p ∫ u^((p-1)/p) ds with A = I. The exponent (p-1)/p is the reading \
under which the listed non-main solutions t^p and (t-c)_+^p satisfy the equation; the exponent \
1/p found in some statements does not. Main solution: u = 0.";

pub const CATALOG: &[CorpusInfo] = &[
    CorpusInfo {
        name: "example1",
        params: &[ParamSpec {
            name: "p",
            default: 2.0,
            description: "power, p > 1",
        }],
        notes: EXAMPLE1_NOTES,
    },
    CorpusInfo {
        name: "example2",
        params: &[
            ParamSpec {
                name: "m",
                default: 21.0,
                description: "interior x-nodes, m >= 3",
            },
            ParamSpec {
                name: "green",
                default: 0.0,
                description: "1 applies A^-1 by Green's-function quadrature, 0 by tridiagonal solve",
            },
            ParamSpec {
                name: "tight",
                default: 0.0,
                description: "1 uses the computed row-sum bound for c instead of c = 1",
            },
        ],
        notes: "u_xx + ∫ sin(t - s + x) u(x, s)^2 ds = t on x in (0, 1), u = 0 at x = 0, 1. \
Majorants: f = w + t, gamma = z^2 (solution tan t, blow-up at pi/2); Lyapunov f = t r^2 + t, c = 1 \
(tangency r = 1, T = 0.5).",
    },
    CorpusInfo {
        name: "linear_case",
        params: &[
            ParamSpec {
                name: "a",
                default: 1.0,
                description: "gamma = a z, a > 0",
            },
            ParamSpec {
                name: "b",
                default: 1.0,
                description: "f = w + b, b >= 0",
            },
        ],
        notes: "Majorant only. Solution b e^(a t), continuable to all t >= 0. b = 0 gives the trivial majorant.",
    },
    CorpusInfo {
        name: "lemma3_demo",
        params: &[],
        notes: "Majorant only. gamma(f(w)) = (1 - w)^(-1/2) has a pole at w = 1; the derivative of the \
solution blows up at T = 2/3.",
    },
    CorpusInfo {
        name: "linear_test",
        params: &[],
        notes: "u = ∫ u ds + t with A = I; solution e^t - 1.",
    },
];

/// A reference problem, its majorants, and closed forms for checking.
#[derive(Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub params: Vec<(&'static str, f64)>,
    pub problem: Option<VolterraProblem>,
    pub majorant: MajorantSpec,
    pub lyapunov: Option<LyapunovSpec>,
    /// Second-difference `A` of `example2`, for the derivative diagnostics.
    pub second_difference: Option<SecondDifference>,
    /// Main solution as a function of `t`, for scalar problems.
    pub solution: Option<ClosedForm>,
    /// Majorant solution `z⁺(t)`.
    pub majorant_solution: Option<ClosedForm>,
    pub classification: Classification,
    pub horizon: f64,
    /// Mesh end used when the majorant is global.
    pub default_t_end: f64,
    pub notes: &'static str,
}

impl fmt::Debug for CorpusEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CorpusEntry")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("classification", &self.classification)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

fn param(info: &CorpusInfo, given: &[(String, f64)], name: &str) -> f64 {
    given
        .iter()
        .rev()
        .find(|(k, _)| k == name)
        .map(|(_, v)| *v)
        .or_else(|| info.params.iter().find(|p| p.name == name).map(|p| p.default))
        .expect("parameter declared in the catalog")
}

pub fn info(name: &str) -> Option<&'static CorpusInfo> {
    CATALOG.iter().find(|c| c.name == name)
}

/// Builds an entry by name; unknown names or parameters are invalid specs.
pub fn build(name: &str, params: &[(String, f64)]) -> Result<CorpusEntry> {
    let info = info(name).ok_or_else(|| Error::InvalidSpec(format!("unknown corpus entry '{name}'")))?;
    if let Some((k, _)) = params.iter().find(|(k, _)| !info.params.iter().any(|p| p.name == k)) {
        return Err(Error::InvalidSpec(format!("'{name}' has no parameter '{k}'")));
    }
    let get = |k: &str| param(info, params, k);
    match name {
        "example1" => example1(get("p")),
        "example2" => {
            let m = get("m");
            if m.fract() != 0.0 || m < 0.0 {
                return Err(Error::InvalidSpec(format!("m must be a whole number, got {m}")));
            }
            let method = if get("green") != 0.0 { InverseMethod::Green } else { InverseMethod::Tridiagonal };
            example2_with(m as usize, method, get("tight") != 0.0)
        }
        "linear_case" => linear_case(get("a"), get("b")),
        "lemma3_demo" => lemma3_demo(),
        "linear_test" => linear_test(),
        _ => unreachable!("catalog and builders agree"),
    }
}

fn domain(op: &'static str) -> ExprError {
    ExprError::Domain { op, offset: None }
}

/// `(t − c)_+^p`; `c = 0` gives `t^p`.
pub fn example1_candidate(p: f64, c: f64) -> ClosedForm {
    Arc::new(move |t: f64| if t > c { (t - c).powf(p) } else { 0.0 })
}

pub fn example1(p: f64) -> Result<CorpusEntry> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidSpec(format!("example1 needs p > 1, got {p}")));
    }
    let alpha = (p - 1.0) / p;
    let kernel = KernelStage::new(1, 1, move |_, _, u, out| {
        if u[0][0] < 0.0 {
            return Err(domain("power"));
        }
        out[0] = u[0][0].powf(alpha);
        Ok(())
    })?;
    let outer = OuterMap::new(move |w, u, _, out| {
        out[0] = u[0] - p * w[0][0];
        Ok(())
    });
    let problem = VolterraProblem::new(vec![kernel], outer, Arc::new(Scaled::identity(1)), 1.0, f64::INFINITY)?;
    // ‖F − Au‖ = p|∫u^α| ≤ p ∫‖u‖^α
    let f = ScalarFn::new("p*w", move |[_, w]| p * w).ignoring(0);
    let gamma = ScalarFn::new("z^alpha", move |[z]| if z < 0.0 { f64::NAN } else { z.powf(alpha) });
    Ok(CorpusEntry {
        name: "example1",
        params: vec![("p", p)],
        problem: Some(problem),
        majorant: MajorantSpec::new(f, gamma)?,
        lyapunov: None,
        second_difference: None,
        solution: Some(Arc::new(|_| 0.0)),
        majorant_solution: Some(Arc::new(|_| 0.0)),
        classification: Classification::Global,
        horizon: f64::INFINITY,
        default_t_end: 1.0,
        notes: EXAMPLE1_NOTES,
    })
}

pub fn example2(m: usize) -> Result<CorpusEntry> {
    example2_with(m, InverseMethod::Tridiagonal, false)
}

pub fn example2_with(m: usize, method: InverseMethod, tight: bool) -> Result<CorpusEntry> {
    let a = SecondDifference::new(m, method)?;
    let x: Vec<f64> = (0..m).map(|i| a.node(i)).collect();
    let kernel = KernelStage::new(1, m, move |t, s, u, out| {
        for ((o, xi), ui) in out.iter_mut().zip(&x).zip(u[0]) {
            *o = (t - s[0] + xi).sin() * ui * ui;
        }
        Ok(())
    })?;
    let op = a;
    let outer = OuterMap::new(move |w, u, t, out| {
        op.apply(u, out);
        for (o, wi) in out.iter_mut().zip(w[0]) {
            *o += wi - t;
        }
        Ok(())
    });
    let c = if tight { a.inverse_norm_bound() } else { 1.0 };
    let problem = VolterraProblem::new(vec![kernel], outer, Arc::new(a), c, FRAC_PI_2)?;
    let majorant = MajorantSpec::parse("w + t", "z^2")?.with_upper(ScalarFn::parse("tan(t)", ["t"])?);
    let lyapunov = LyapunovSpec::parse("t*r^2 + t", Some("2*t*r"), c, 4.0, 2.0)?;
    Ok(CorpusEntry {
        name: "example2",
        params: vec![
            ("m", m as f64),
            ("green", if method == InverseMethod::Green { 1.0 } else { 0.0 }),
            ("tight", if tight { 1.0 } else { 0.0 }),
        ],
        problem: Some(problem),
        majorant,
        lyapunov: Some(lyapunov),
        second_difference: Some(a),
        solution: None,
        majorant_solution: Some(Arc::new(f64::tan)),
        classification: Classification::ValueBlowUp,
        horizon: FRAC_PI_2,
        default_t_end: 0.4,
        notes: info("example2").expect("catalogued").notes,
    })
}

/// Per-node max-abs of `u`, of its first differences (boundary zeros
/// included) and of its second differences.
pub fn example2_diagnostics(a: &SecondDifference, tr: &Trajectory) -> Vec<[f64; 3]> {
    let amax = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (0..tr.mesh().len())
        .map(|j| {
            let u = tr.value(j);
            [amax(u), amax(&a.first_differences(u)), amax(&a.second_differences(u))]
        })
        .collect()
}

pub fn linear_case(a: f64, b: f64) -> Result<CorpusEntry> {
    if !(a > 0.0) || !(b >= 0.0) {
        return Err(Error::InvalidSpec(format!("linear_case needs a > 0 and b >= 0, got a = {a}, b = {b}")));
    }
    let f = ScalarFn::new(format!("w + {b}"), move |[_, w]| w + b).ignoring(0);
    let gamma = ScalarFn::new(format!("{a}*z"), move |[z]| a * z);
    Ok(CorpusEntry {
        name: "linear_case",
        params: vec![("a", a), ("b", b)],
        problem: None,
        majorant: MajorantSpec::new(f, gamma)?,
        lyapunov: None,
        second_difference: None,
        solution: None,
        majorant_solution: Some(Arc::new(move |t| b * (a * t).exp())),
        classification: Classification::Global,
        horizon: f64::INFINITY,
        default_t_end: 1.0,
        notes: info("linear_case").expect("catalogued").notes,
    })
}

pub fn lemma3_demo() -> Result<CorpusEntry> {
    let majorant = MajorantSpec::parse("w", "(1 - z)^(-0.5)")?.with_pole(1.0);
    Ok(CorpusEntry {
        name: "lemma3_demo",
        params: vec![],
        problem: None,
        majorant,
        lyapunov: None,
        second_difference: None,
        solution: None,
        // ω' = (1 − ω)^{−1/2}
        majorant_solution: Some(Arc::new(|t| 1.0 - (1.0 - 1.5 * t).max(0.0).powf(2.0 / 3.0))),
        classification: Classification::DerivativeBlowUp,
        horizon: 2.0 / 3.0,
        default_t_end: 0.6,
        notes: info("lemma3_demo").expect("catalogued").notes,
    })
}

pub fn linear_test() -> Result<CorpusEntry> {
    let problem = VolterraProblem::new(
        vec![KernelStage::scalar("u", 1)?],
        OuterMap::scalar("u - w - t", 1)?,
        Arc::new(Scaled::identity(1)),
        1.0,
        f64::INFINITY,
    )?;
    Ok(CorpusEntry {
        name: "linear_test",
        params: vec![],
        problem: Some(problem),
        majorant: MajorantSpec::parse("w + t", "z")?,
        lyapunov: None,
        second_difference: None,
        solution: Some(Arc::new(|t: f64| t.exp() - 1.0)),
        majorant_solution: Some(Arc::new(|t: f64| t.exp() - 1.0)),
        classification: Classification::Global,
        horizon: f64::INFINITY,
        default_t_end: 1.0,
        notes: info("linear_test").expect("catalogued").notes,
    })
}

/// Every catalogued entry with default parameters.
pub fn all_defaults() -> Result<Vec<CorpusEntry>> {
    CATALOG.iter().map(|c| build(c.name, &[])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_builds() {
        let all = all_defaults().unwrap();
        assert_eq!(all.len(), CATALOG.len());
    }

    #[test]
    fn parameter_validation() {
        assert!(build("example1", &[("p".into(), 1.0)]).is_err());
        assert!(build("example2", &[("m".into(), 2.0)]).is_err());
        assert!(build("example2", &[("q".into(), 2.0)]).is_err());
        assert!(build("nope", &[]).is_err());
        assert!(build("linear_case", &[("b".into(), 0.0)]).is_ok());
    }

    #[test]
    fn example2_inverse_bound() {
        let e = build("example2", &[("tight".into(), 1.0)]).unwrap();
        let c = e.problem.unwrap().inv_norm_bound();
        // row sums of the discrete inverse approach max x(1 - x)/2 = 1/8
        assert!(c > 0.12 && c < 0.126, "{c}");
    }

    #[test]
    fn candidate_family() {
        let u = example1_candidate(2.0, 0.5);
        assert_eq!(u(0.25), 0.0);
        assert!((u(1.0) - 0.25).abs() < 1e-15);
    }
}
