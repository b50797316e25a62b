//! Serializable analysis reports and their text rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use symflux_core::detsolve::{affine_flow, Flow, LieGenerator, SymmetryAnalysis};
use symflux_core::modeq::DifferentialApproximation;
use symflux_core::Expr;

/// Everything emitted for one problem file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub file: String,
    pub pde: String,
    pub analyses: Vec<AnalysisReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// Scheme name, or `pde` for the bare equation.
    pub scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modified_equation: Option<ModifiedEquation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub determining: Option<Determining>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Generator>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: String,
    pub monomial: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedPart {
    pub grading: String,
    pub expression: String,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifiedEquation {
    /// `pde + error = 0` in canonical form.
    pub equation: String,
    pub pde: String,
    pub pde_terms: Vec<Term>,
    pub error: Vec<GradedPart>,
    pub leading_gradings: Vec<String>,
    pub retained_grading: String,
    pub taylor_order: u32,
    pub max_x_order: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equation {
    /// Factor in `x, t, u, ν, h, τ` the row was collected from.
    pub factor: String,
    pub form: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetGroup {
    pub jets: String,
    pub equations: Vec<Equation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Determining {
    pub ansatz_degree: u32,
    pub coefficients: usize,
    pub rows: usize,
    pub rank: usize,
    pub groups: Vec<JetGroup>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentEntry {
    pub variable: String,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub label: String,
    pub operator: String,
    pub components: Vec<ComponentEntry>,
    /// Terms left in the independently recomputed invariance residual.
    pub closure_residual_terms: usize,
    /// `affine`, `non-affine` or `coupled`.
    pub flow_kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flow: Vec<ComponentEntry>,
}

/// Mirrors the order / seconds columns of the usual timing tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub approximation_order: u8,
    pub modified_equation_seconds: f64,
    pub symmetry_seconds: f64,
    pub total_seconds: f64,
}

fn terms(e: &Expr) -> Vec<Term> {
    e.terms().map(|(m, c)| Term { coefficient: c.to_string(), monomial: m.to_string() }).collect()
}

fn grading_label(tau: u32, h: u32) -> String {
    let part = |s: &str, e: u32| match e {
        0 => None,
        1 => Some(s.to_string()),
        _ => Some(format!("{s}^{e}")),
    };
    [part("tau", tau), part("h", h)].into_iter().flatten().collect::<Vec<_>>().join("*")
}

pub fn modified_equation(da: &DifferentialApproximation) -> ModifiedEquation {
    ModifiedEquation {
        equation: format!("{} = 0", da.full()),
        pde: da.pde_part.to_string(),
        pde_terms: terms(&da.pde_part),
        error: da
            .error_by_grading()
            .into_iter()
            .map(|((tau, h), e)| GradedPart {
                grading: grading_label(tau, h),
                expression: e.to_string(),
                terms: terms(&e),
            })
            .collect(),
        leading_gradings: da.minimal_gradings().into_iter().map(|(t, h)| grading_label(t, h)).collect(),
        retained_grading: da.grading.to_string(),
        taylor_order: da.taylor_order,
        max_x_order: da.max_x_order(),
    }
}

pub fn determining(sol: &SymmetryAnalysis) -> Determining {
    Determining {
        ansatz_degree: sol.ansatz.degree,
        coefficients: sol.ansatz.coeffs.len(),
        rows: sol.system.rows.len(),
        rank: sol.rank,
        groups: sol
            .system
            .grouped()
            .into_iter()
            .map(|(jets, eqs)| JetGroup {
                jets: jets.to_string(),
                equations: eqs
                    .into_iter()
                    .map(|(factor, form)| Equation { factor: factor.to_string(), form: form.to_string() })
                    .collect(),
            })
            .collect(),
    }
}

pub fn generator(label: String, g: &LieGenerator) -> Generator {
    let components = g
        .inf
        .components()
        .filter(|(_, e)| !e.is_zero())
        .map(|(c, e)| ComponentEntry { variable: c.variable().to_string(), coefficient: e.to_string() })
        .collect();
    let (flow_kind, flow) = match affine_flow(g) {
        Flow::Affine(f) => (
            "affine",
            f.maps
                .iter()
                .map(|(s, p)| ComponentEntry { variable: s.to_string(), coefficient: p.to_string() })
                .collect(),
        ),
        Flow::NonAffine => ("non-affine", Vec::new()),
        Flow::Coupled => ("coupled", Vec::new()),
    };
    Generator {
        label,
        operator: g.operator_string(),
        components,
        closure_residual_terms: g.certificate.residual.len(),
        flow_kind: flow_kind.to_string(),
        flow,
    }
}

impl Document {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "file: {}", self.file);
        let _ = writeln!(out, "pde:  u_t = {}", self.pde);
        for a in &self.analyses {
            a.write_text(&mut out);
        }
        out
    }
}

impl AnalysisReport {
    fn write_text(&self, out: &mut String) {
        let _ = writeln!(out, "\n== {} ==", self.scheme);
        if let Some(m) = &self.modified_equation {
            let _ = writeln!(
                out,
                "modified equation (Taylor order {}, retained grading {}):",
                m.taylor_order, m.retained_grading
            );
            let _ = writeln!(out, "  pde part: {}", m.pde);
            for part in &m.error {
                let _ = writeln!(out, "  {}: {}", part.grading, part.expression);
            }
            let leading = if m.leading_gradings.is_empty() { "none".to_string() } else { m.leading_gradings.join(", ") };
            let _ = writeln!(out, "  leading error gradings: {leading}");
            let _ = writeln!(out, "  highest x-derivative order: {}", m.max_x_order);
        }
        if let Some(d) = &self.determining {
            let _ = writeln!(
                out,
                "determining equations (ansatz degree {}): {} rows over {} coefficients, rank {}",
                d.ansatz_degree, d.rows, d.coefficients, d.rank
            );
            for g in &d.groups {
                let _ = writeln!(out, "  [{}]", g.jets);
                for e in &g.equations {
                    let _ = writeln!(out, "    {}: {} = 0", e.factor, e.form);
                }
            }
        }
        if let Some(gens) = &self.generators {
            let _ = writeln!(out, "generators ({}):", gens.len());
            for g in gens {
                let closure = if g.closure_residual_terms == 0 { "closure verified" } else { "CLOSURE FAILED" };
                let _ = writeln!(out, "  {} = {}  [{closure}]", g.label, g.operator);
                if g.flow_kind == "affine" {
                    let maps: Vec<String> = g.flow.iter().map(|c| format!("{}* = {}", c.variable, c.coefficient)).collect();
                    let _ = writeln!(out, "    flow: {}", maps.join(", "));
                } else {
                    let _ = writeln!(out, "    flow: {}", g.flow_kind);
                }
            }
        }
        if let Some(t) = &self.timing {
            let _ = writeln!(
                out,
                "timing: order {}  modified equation {:.3} s  symmetries {:.3} s  total {:.3} s",
                t.approximation_order, t.modified_equation_seconds, t.symmetry_seconds, t.total_seconds
            );
        }
    }
}
