//! Determining equations and their exact solution.
//!
//! The infinitesimals are replaced by complete polynomials of degree `θ`
//! with unknown coefficients, the invariance residual is collected over
//! every non-coefficient monomial, and the resulting homogeneous linear
//! system is solved by exact elimination. Each nullspace vector gives one
//! generator, re-verified against an independently computed residual.

mod flow;
mod linalg;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;
use thiserror::Error;

use crate::modeq::DifferentialApproximation;
use crate::prolong::{invariance_residual, Component, InfinitesimalSet, ProlongError};
use crate::symkernel::{integer_normalizer, Expr, Monomial, Rational, Symbol};

pub use flow::{affine_flow, field_along, AffineFlow, ExpPoly, Flow};
pub use linalg::{dot, Rref, SparseRow};

pub const DEFAULT_ANSATZ_DEGREE: u32 = 3;

/// Dependency set per component; absent components are identically zero.
pub type DependencySets = BTreeMap<Component, BTreeSet<Symbol>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetsolveError {
    #[error("{component} may not depend on {symbol}")]
    DependencyNotAllowed { component: &'static str, symbol: Symbol },
    #[error("residual is not linear in the ansatz coefficients at `{0}`")]
    Nonlinear(String),
    #[error("residual mentions {0}, which is not an ansatz coefficient")]
    UnknownCoefficient(Symbol),
    #[error("generator {index} fails closure: residual has {terms} terms")]
    ClosureFailure { index: usize, terms: usize },
    #[error(transparent)]
    Prolong(#[from] ProlongError),
}

fn restricted(component: Component, allowed: &[Symbol], hints: &DependencySets) -> BTreeSet<Symbol> {
    let base: BTreeSet<Symbol> = allowed.iter().copied().collect();
    match hints.get(&component) {
        Some(h) => base.intersection(h).copied().collect(),
        None => base,
    }
}

/// Dependencies for a scheme analysis: the widest sets, narrowed by hints.
pub fn scheme_dependencies(hints: &DependencySets) -> DependencySets {
    Component::ALL.into_iter().map(|c| (c, restricted(c, c.default_dependencies(), hints))).collect()
}

/// Dependencies for the bare equation: no step-size components and a
/// viscosity component free of the steps.
pub fn pde_dependencies(hints: &DependencySets) -> DependencySets {
    use Symbol::*;
    [Component::Xi1, Component::Xi2, Component::Eta]
        .into_iter()
        .map(|c| (c, restricted(c, c.default_dependencies(), hints)))
        .chain([(Component::Chi, restricted(Component::Chi, &[X, T, U, Nu], hints))])
        .collect()
}

/// Polynomial ansatz for the infinitesimals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ansatz {
    pub inf: InfinitesimalSet,
    /// Coefficient symbols in column order.
    pub coeffs: Vec<Symbol>,
    pub degree: u32,
}

/// Every monomial over `vars` of total degree `≤ degree`, ascending.
fn monomials_up_to(vars: &[Symbol], degree: u32) -> Vec<Monomial> {
    fn rec(vars: &[Symbol], left: u32, current: &mut Vec<(Symbol, i32)>, out: &mut Vec<Monomial>) {
        let Some((&first, rest)) = vars.split_first() else {
            out.push(Monomial::from_factors(current.iter().copied()));
            return;
        };
        for e in 0..=left {
            if e > 0 {
                current.push((first, e as i32));
            }
            rec(rest, left - e, current, out);
            if e > 0 {
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(vars, degree, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Complete degree-`θ` polynomials over each component's dependencies with
/// fresh coefficients `c0, c1, …` numbered in component order.
pub fn build_ansatz(deps: &DependencySets, degree: u32) -> Result<Ansatz, DetsolveError> {
    let mut inf = InfinitesimalSet::zero();
    let mut coeffs = Vec::new();
    for (&c, vars) in deps {
        if let Some(&s) = vars.iter().find(|s| !c.default_dependencies().contains(s)) {
            return Err(DetsolveError::DependencyNotAllowed { component: c.name(), symbol: s });
        }
        let vars: Vec<Symbol> = vars.iter().copied().collect();
        let mut e = Expr::zero();
        for m in monomials_up_to(&vars, degree) {
            let coeff = Symbol::Coeff(coeffs.len() as u32);
            coeffs.push(coeff);
            e.add_term(m.mul(&Monomial::var(coeff)), Rational::from_integer(1.into()));
        }
        *inf.get_mut(c) = e;
    }
    Ok(Ansatz { inf, coeffs, degree })
}

/// Homogeneous linear system over the ansatz coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    pub coeffs: Vec<Symbol>,
    pub rows: Vec<SparseRow>,
    /// Monomial in the non-coefficient symbols each row was collected from.
    pub row_tags: Vec<Monomial>,
}

impl LinearSystem {
    pub fn rref(&self) -> Rref {
        Rref::from_rows(self.coeffs.len(), &self.rows)
    }

    /// `rows · v`.
    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        self.rows.iter().map(|r| dot(r, v)).collect()
    }

    /// The linear form of a row as an expression in the coefficients.
    pub fn row_expr(&self, i: usize) -> Expr {
        let mut e = Expr::zero();
        for (c, v) in &self.rows[i] {
            e.add_term(Monomial::var(self.coeffs[*c]), v.clone());
        }
        e
    }

    /// Rows grouped by the jet part of their tag, each as
    /// `(remaining factor, linear form)`.
    pub fn grouped(&self) -> Vec<(Monomial, Vec<(Monomial, Expr)>)> {
        let mut groups: BTreeMap<Monomial, Vec<(Monomial, Expr)>> = BTreeMap::new();
        for (i, tag) in self.row_tags.iter().enumerate() {
            let (jets, rest) = tag.split(Symbol::is_jet);
            groups.entry(jets).or_default().push((rest, self.row_expr(i)));
        }
        groups.into_iter().collect()
    }
}

/// Collects `residual` over every monomial in the non-coefficient symbols.
pub fn determining_system(residual: &Expr, coeffs: &[Symbol]) -> Result<LinearSystem, DetsolveError> {
    let column: HashMap<Symbol, usize> = coeffs.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut rows = Vec::new();
    let mut row_tags = Vec::new();
    for (tag, form) in residual.collect(|s| !s.is_coeff()) {
        let mut row = SparseRow::new();
        for (m, v) in form.terms() {
            let mut factors = m.factors();
            let (s, e) = match (factors.next(), factors.next()) {
                (Some(f), None) => f,
                _ => return Err(DetsolveError::Nonlinear(format!("{m}*{tag}"))),
            };
            if e != 1 {
                return Err(DetsolveError::Nonlinear(format!("{m}*{tag}")));
            }
            let col = *column.get(&s).ok_or(DetsolveError::UnknownCoefficient(s))?;
            row.insert(col, v.clone());
        }
        rows.push(row);
        row_tags.push(tag);
    }
    Ok(LinearSystem { coeffs: coeffs.to_vec(), rows, row_tags })
}

/// Canonical nullspace basis: one vector per free column of the RREF.
pub fn nullspace(sys: &LinearSystem) -> Vec<Vec<Rational>> {
    sys.rref().nullspace()
}

/// A symmetry generator with its verified closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieGenerator {
    pub inf: InfinitesimalSet,
    pub label: Option<String>,
    pub certificate: ClosureCertificate,
}

/// Invariance residual recomputed from the generator alone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureCertificate {
    pub residual: Expr,
}

impl ClosureCertificate {
    pub fn is_closed(&self) -> bool {
        self.residual.is_zero()
    }
}

impl LieGenerator {
    /// Wraps an operator after recomputing its residual on `da`.
    pub fn certify(inf: InfinitesimalSet, da: &DifferentialApproximation) -> Result<Self, DetsolveError> {
        let residual = invariance_residual(&inf, da)?;
        Ok(LieGenerator { inf, label: None, certificate: ClosureCertificate { residual } })
    }

    /// Operator written as `xi1*d/dx + …` over its nonzero components.
    pub fn operator_string(&self) -> String {
        let mut out = String::new();
        for (c, e) in self.inf.components().filter(|(_, e)| !e.is_zero()) {
            let negative = e.len() == 1 && e.terms().all(|(_, k)| k < &Rational::zero());
            let (sign, body) = if negative { ("-", -e) } else { ("+", e.clone()) };
            let v = c.variable();
            let body = match body.as_constant() {
                Some(k) if k == Rational::from_integer(1.into()) => format!("d/d{v}"),
                _ if body.len() == 1 => format!("{body}*d/d{v}"),
                _ => format!("({body})*d/d{v}"),
            };
            match (out.is_empty(), sign) {
                (true, "-") => out.push('-'),
                (true, _) => {}
                (false, s) => out.push_str(&format!(" {s} ")),
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            "0".to_string()
        } else {
            out
        }
    }
}

/// Substitutes coefficient values into the ansatz.
pub fn instantiate(ansatz: &Ansatz, values: &[Rational]) -> InfinitesimalSet {
    let value: HashMap<Symbol, &Rational> = ansatz.coeffs.iter().copied().zip(values).collect();
    ansatz.inf.map(|e| {
        let mut out = Expr::zero();
        for (m, c) in e.terms() {
            let (coeff, rest) = m.split(Symbol::is_coeff);
            let k = coeff.factors().next().map(|(s, _)| value[&s]).expect("ansatz terms carry one coefficient");
            if !k.is_zero() {
                out.add_term(rest, c * k);
            }
        }
        out
    })
}

/// Scales to coprime integer coefficients, first nonzero coefficient
/// positive in component order then ascending monomial order.
pub fn normalize(inf: &InfinitesimalSet) -> InfinitesimalSet {
    let values: Vec<&Rational> = inf.components().flat_map(|(_, e)| e.terms().map(|(_, c)| c)).collect();
    match integer_normalizer(values.into_iter()) {
        Some(k) => inf.scale(&k),
        None => inf.clone(),
    }
}

/// One normalized, certified generator per basis vector.
pub fn generators_from_basis(
    basis: &[Vec<Rational>],
    ansatz: &Ansatz,
    da: &DifferentialApproximation,
) -> Result<Vec<LieGenerator>, DetsolveError> {
    basis
        .iter()
        .enumerate()
        .map(|(index, v)| {
            let g = LieGenerator::certify(normalize(&instantiate(ansatz, v)), da)?;
            if !g.certificate.is_closed() {
                return Err(DetsolveError::ClosureFailure { index, terms: g.certificate.residual.len() });
            }
            Ok(g)
        })
        .collect()
}

fn coordinates(inf: &InfinitesimalSet) -> impl Iterator<Item = ((Component, Monomial), Rational)> + '_ {
    inf.components().flat_map(|(c, e)| e.terms().map(move |(m, v)| ((c, m.clone()), v.clone())))
}

/// Whether two generator lists span the same space of operators.
pub fn span_equal(a: &[LieGenerator], b: &[LieGenerator]) -> bool {
    span_equal_sets(a.iter().map(|g| &g.inf), b.iter().map(|g| &g.inf))
}

pub fn span_equal_sets<'a>(
    a: impl IntoIterator<Item = &'a InfinitesimalSet>,
    b: impl IntoIterator<Item = &'a InfinitesimalSet>,
) -> bool {
    let a: Vec<&InfinitesimalSet> = a.into_iter().collect();
    let b: Vec<&InfinitesimalSet> = b.into_iter().collect();
    let keys: BTreeSet<(Component, Monomial)> =
        a.iter().chain(&b).flat_map(|inf| coordinates(inf).map(|(k, _)| k)).collect();
    let index: BTreeMap<&(Component, Monomial), usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let rref = |gens: &[&InfinitesimalSet]| {
        let rows: Vec<SparseRow> =
            gens.iter().map(|inf| coordinates(inf).map(|(k, v)| (index[&k], v)).collect()).collect();
        Rref::from_rows(keys.len(), &rows)
    };
    rref(&a) == rref(&b)
}

/// Everything computed while solving for the symmetries of one analysis.
#[derive(Clone, Debug)]
pub struct SymmetryAnalysis {
    pub ansatz: Ansatz,
    pub system: LinearSystem,
    pub rank: usize,
    pub basis: Vec<Vec<Rational>>,
    pub generators: Vec<LieGenerator>,
}

/// Ansatz, residual, system, nullspace and certified generators for `da`.
pub fn solve_symmetries(
    da: &DifferentialApproximation,
    deps: &DependencySets,
    degree: u32,
) -> Result<SymmetryAnalysis, DetsolveError> {
    let ansatz = build_ansatz(deps, degree)?;
    log::debug!("ansatz of degree {degree}: {} coefficients", ansatz.coeffs.len());
    let residual = invariance_residual(&ansatz.inf, da)?;
    log::debug!("invariance residual: {} terms", residual.len());
    let system = determining_system(&residual, &ansatz.coeffs)?;
    let rref = system.rref();
    log::debug!("determining system: {} rows, rank {}", system.rows.len(), rref.rank());
    let basis = rref.nullspace();
    let generators = generators_from_basis(&basis, &ansatz, da)?;
    Ok(SymmetryAnalysis { rank: rref.rank(), ansatz, system, basis, generators })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expression;
    use crate::symkernel::int;

    fn p(s: &str) -> Expr {
        parse_expression(s).unwrap()
    }

    fn deps(parts: &[(Component, &[Symbol])]) -> DependencySets {
        parts.iter().map(|(c, s)| (*c, s.iter().copied().collect())).collect()
    }

    #[test]
    fn ansatz_examples() {
        let a = build_ansatz(&deps(&[(Component::Xi2, &[Symbol::T])]), 2).unwrap();
        assert_eq!(a.inf.xi2, p("c0 + c1*t + c2*t^2"));
        let a = build_ansatz(&deps(&[(Component::Xi1, &[Symbol::X, Symbol::T])]), 1).unwrap();
        assert_eq!(a.inf.xi1, p("c0 + c1*t + c2*x"));
        let a = build_ansatz(&scheme_dependencies(&DependencySets::new()), 0).unwrap();
        assert_eq!(a.coeffs.len(), 6);
        assert!(a.inf.components().all(|(_, e)| e.symbols().iter().all(|s| s.is_coeff())));
    }

    #[test]
    fn ansatz_coefficient_count_is_binomial() {
        let a = build_ansatz(&scheme_dependencies(&DependencySets::new()), 3).unwrap();
        // C(5,3) + C(4,3) + C(6,3) + 2 C(8,3) + C(9,3)
        assert_eq!(a.coeffs.len(), 10 + 4 + 20 + 2 * 56 + 84);
    }

    #[test]
    fn ansatz_rejects_wider_dependencies() {
        let d = deps(&[(Component::Xi2, &[Symbol::X])]);
        assert!(matches!(build_ansatz(&d, 1), Err(DetsolveError::DependencyNotAllowed { .. })));
    }

    #[test]
    fn two_monomial_system() {
        let c = [Symbol::Coeff(1), Symbol::Coeff(2), Symbol::Coeff(3)];
        let sys = determining_system(&p("(c1 - 2*c2)*u_x + (c1 + c3)*u"), &c).unwrap();
        let rows: Vec<Vec<(usize, Rational)>> = sys.rows.iter().map(|r| r.clone().into_iter().collect()).collect();
        // u_x sorts before u
        assert_eq!(rows, vec![vec![(0, int(1)), (1, int(-2))], vec![(0, int(1)), (2, int(1))]]);
        let empty = determining_system(&Expr::zero(), &c).unwrap();
        assert!(empty.rows.is_empty());
        assert_eq!(nullspace(&empty).len(), 3);
    }

    #[test]
    fn nonlinear_residual_is_rejected() {
        let c = [Symbol::Coeff(1), Symbol::Coeff(2)];
        assert!(matches!(determining_system(&p("c1*c2*u_x"), &c), Err(DetsolveError::Nonlinear(_))));
        assert!(matches!(determining_system(&p("c1^2"), &c), Err(DetsolveError::Nonlinear(_))));
        assert!(matches!(determining_system(&p("c7*u"), &c), Err(DetsolveError::UnknownCoefficient(_))));
    }

    #[test]
    fn normalization_makes_integers_with_positive_lead() {
        let inf = InfinitesimalSet::from_components([(Component::Xi1, p("-1/2*x")), (Component::Eta, p("3/4*u"))]);
        let n = normalize(&inf);
        assert_eq!(n.xi1, p("2*x"));
        assert_eq!(n.eta, p("-3*u"));
    }

    #[test]
    fn span_examples() {
        let dx = InfinitesimalSet::from_components([(Component::Xi1, p("1"))]);
        let dt = InfinitesimalSet::from_components([(Component::Xi2, p("1"))]);
        let dx3 = dx.scale(&int(3));
        assert!(span_equal_sets([&dx, &dt], [&dt, &dx3]));
        assert!(!span_equal_sets([&dx], [&dx, &dt]));
    }
}
