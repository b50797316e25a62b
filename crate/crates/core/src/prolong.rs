//! Prolongation of point infinitesimal operators extended by the step sizes
//! and the viscosity, and the invariance residual on the solution manifold
//! of a differential approximation.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::modeq::{t_closures, DifferentialApproximation};
use crate::symkernel::{Axis, Expr, JetVar, KernelError, Rational, Symbol};

/// Highest t-order the manifold reduction will eliminate.
const MAX_REDUCTION_T_ORDER: u8 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProlongError {
    #[error("no prolongation coefficient for {0}")]
    MissingSigma(JetVar),
    #[error("infinitesimal {component} depends on {symbol}, outside its allowed set")]
    Dependency { component: &'static str, symbol: Symbol },
    #[error("manifold reduction did not remove t-derivatives (order {0})")]
    NonTermination(u8),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// The six infinitesimal components, in order `ξ₁, ξ₂, η, ζ₁, ζ₂, χ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Xi1,
    Xi2,
    Eta,
    Zeta1,
    Zeta2,
    Chi,
}

impl Component {
    pub const ALL: [Component; 6] =
        [Component::Xi1, Component::Xi2, Component::Eta, Component::Zeta1, Component::Zeta2, Component::Chi];

    pub fn name(self) -> &'static str {
        match self {
            Component::Xi1 => "xi1",
            Component::Xi2 => "xi2",
            Component::Eta => "eta",
            Component::Zeta1 => "zeta1",
            Component::Zeta2 => "zeta2",
            Component::Chi => "chi",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Component::ALL.into_iter().find(|c| c.name() == name)
    }

    /// The variable this component moves.
    pub fn variable(self) -> Symbol {
        match self {
            Component::Xi1 => Symbol::X,
            Component::Xi2 => Symbol::T,
            Component::Eta => Symbol::U,
            Component::Zeta1 => Symbol::H,
            Component::Zeta2 => Symbol::Tau,
            Component::Chi => Symbol::Nu,
        }
    }

    /// Widest dependency set allowed for the component.
    pub fn default_dependencies(self) -> &'static [Symbol] {
        use Symbol::*;
        match self {
            Component::Xi1 => &[X, T],
            Component::Xi2 => &[T],
            Component::Eta => &[X, T, U],
            Component::Zeta1 | Component::Zeta2 => &[X, T, U, H, Tau],
            Component::Chi => &[X, T, U, H, Tau, Nu],
        }
    }
}

/// Components of `ξ₁∂x + ξ₂∂t + η∂u + ζ₁∂h + ζ₂∂τ + χ∂ν`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct InfinitesimalSet {
    pub xi1: Expr,
    pub xi2: Expr,
    pub eta: Expr,
    pub zeta1: Expr,
    pub zeta2: Expr,
    pub chi: Expr,
}

impl InfinitesimalSet {
    pub fn zero() -> Self {
        InfinitesimalSet::default()
    }

    /// Builds a set from `(component, expression)` pairs; the rest are zero.
    pub fn from_components<I: IntoIterator<Item = (Component, Expr)>>(parts: I) -> Self {
        let mut inf = InfinitesimalSet::zero();
        for (c, e) in parts {
            *inf.get_mut(c) = e;
        }
        inf
    }

    pub fn get(&self, c: Component) -> &Expr {
        match c {
            Component::Xi1 => &self.xi1,
            Component::Xi2 => &self.xi2,
            Component::Eta => &self.eta,
            Component::Zeta1 => &self.zeta1,
            Component::Zeta2 => &self.zeta2,
            Component::Chi => &self.chi,
        }
    }

    pub fn get_mut(&mut self, c: Component) -> &mut Expr {
        match c {
            Component::Xi1 => &mut self.xi1,
            Component::Xi2 => &mut self.xi2,
            Component::Eta => &mut self.eta,
            Component::Zeta1 => &mut self.zeta1,
            Component::Zeta2 => &mut self.zeta2,
            Component::Chi => &mut self.chi,
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (Component, &Expr)> {
        Component::ALL.into_iter().map(move |c| (c, self.get(c)))
    }

    pub fn is_zero(&self) -> bool {
        self.components().all(|(_, e)| e.is_zero())
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        InfinitesimalSet::from_components(self.components().map(|(c, e)| (c, f(e))))
    }

    pub fn try_map<E>(&self, f: impl Fn(&Expr) -> Result<Expr, E>) -> Result<Self, E> {
        let mut out = InfinitesimalSet::zero();
        for (c, e) in self.components() {
            *out.get_mut(c) = f(e)?;
        }
        Ok(out)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        self.map(|e| e.scale(k))
    }

    pub fn add(&self, other: &InfinitesimalSet) -> Self {
        InfinitesimalSet::from_components(Component::ALL.into_iter().map(|c| (c, self.get(c) + other.get(c))))
    }

    /// Checks that each component only uses its allowed symbols (plus
    /// coefficient symbols) and no jet variables.
    pub fn check_dependencies(&self, allowed: &BTreeMap<Component, BTreeSet<Symbol>>) -> Result<(), ProlongError> {
        for (c, e) in self.components() {
            let deps: BTreeSet<Symbol> = match allowed.get(&c) {
                Some(d) => d.clone(),
                None => c.default_dependencies().iter().copied().collect(),
            };
            if let Some(s) = e.symbols().into_iter().find(|s| !s.is_coeff() && !deps.contains(s)) {
                return Err(ProlongError::Dependency { component: c.name(), symbol: s });
            }
        }
        Ok(())
    }
}

/// Prolongation coefficients `σ` indexed by jet variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SigmaTable {
    entries: BTreeMap<JetVar, Expr>,
}

impl SigmaTable {
    pub fn get(&self, j: JetVar) -> Option<&Expr> {
        self.entries.get(&j)
    }

    pub fn jets(&self) -> impl Iterator<Item = JetVar> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

struct SigmaBuilder<'a> {
    inf: &'a InfinitesimalSet,
    /// `D_i ξ_j` indexed `[axis][j]`.
    dxi: [[Expr; 2]; 2],
    table: SigmaTable,
}

fn axis_index(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::T => 1,
    }
}

fn jet_expr(j: JetVar) -> Expr {
    Expr::symbol(Symbol::Jet(j))
}

impl<'a> SigmaBuilder<'a> {
    fn new(inf: &'a InfinitesimalSet) -> Self {
        let d = |e: &Expr, a| e.total_derivative(a);
        let dxi = [
            [d(&inf.xi1, Axis::X), d(&inf.xi2, Axis::X)],
            [d(&inf.xi1, Axis::T), d(&inf.xi2, Axis::T)],
        ];
        SigmaBuilder { inf, dxi, table: SigmaTable::default() }
    }

    /// `D_i σ_J − w_{J+x} D_i ξ₁ − w_{J+t} D_i ξ₂` with `σ_∅ = η`.
    fn step(&self, base: Option<JetVar>, axis: Axis) -> Expr {
        let prev = match base {
            Some(j) => self.table.get(j).expect("parent computed first"),
            None => &self.inf.eta,
        };
        let promote = |a| match base {
            Some(j) => j.promote(a),
            None => JetVar::new(u8::from(a == Axis::X), u8::from(a == Axis::T)).expect("first order"),
        };
        let [dx1, dx2] = &self.dxi[axis_index(axis)];
        let mut out = prev.total_derivative(axis);
        out -= &(&jet_expr(promote(Axis::X)) * dx1);
        out -= &(&jet_expr(promote(Axis::T)) * dx2);
        out
    }

    /// Canonical recursion: `(a, b)` comes from `(a, b−1)` by a t-step when
    /// `b ≥ 1`, otherwise from `(a−1, 0)` by an x-step.
    fn ensure(&mut self, j: JetVar) {
        if self.table.entries.contains_key(&j) {
            return;
        }
        let (a, b) = (j.x_order(), j.t_order());
        let (parent, axis) = if b >= 1 { (JetVar::new(a, b - 1), Axis::T) } else { (JetVar::new(a - 1, 0), Axis::X) };
        if let Some(p) = parent {
            self.ensure(p);
        }
        let sigma = self.step(parent, axis);
        self.table.entries.insert(j, sigma);
    }
}

/// `σ` for every jet of total order `1..=max_order`.
pub fn sigma_table(inf: &InfinitesimalSet, max_order: u8) -> SigmaTable {
    sigma_table_for(inf, JetVar::all_up_to(max_order))
}

/// `σ` for the given jets and the ancestors their recursion passes through.
pub fn sigma_table_for(inf: &InfinitesimalSet, jets: impl IntoIterator<Item = JetVar>) -> SigmaTable {
    let mut b = SigmaBuilder::new(inf);
    for j in jets {
        b.ensure(j);
    }
    b.table
}

/// One prolongation step from `σ_base` along `axis`; `None` starts from `η`.
///
/// Exposed so the recursion can be run along a non-canonical path.
pub fn sigma_step(inf: &InfinitesimalSet, base: Option<(JetVar, &Expr)>, axis: Axis) -> Expr {
    let mut b = SigmaBuilder::new(inf);
    if let Some((j, s)) = base {
        b.table.entries.insert(j, s.clone());
    }
    b.step(base.map(|(j, _)| j), axis)
}

/// The prolonged operator applied to `target`.
pub fn apply_prolonged(inf: &InfinitesimalSet, sig: &SigmaTable, target: &Expr) -> Result<Expr, ProlongError> {
    let mut out = Expr::zero();
    for (c, e) in inf.components() {
        if e.is_zero() {
            continue;
        }
        out += &(e * &target.diff_partial(c.variable())?);
    }
    for j in target.symbols().into_iter().filter_map(Symbol::as_jet) {
        let sigma = sig.get(j).ok_or(ProlongError::MissingSigma(j))?;
        if sigma.is_zero() {
            continue;
        }
        out += &(sigma * &target.diff_partial(Symbol::Jet(j))?);
    }
    Ok(out)
}

fn max_t_order(e: &Expr) -> u8 {
    e.symbols().into_iter().filter_map(Symbol::as_jet).map(JetVar::t_order).max().unwrap_or(0)
}

/// Restricts `residual` to the solution manifold of `da`.
///
/// Every jet `(a, b)` with `b ≥ 1` is replaced by `D_x^a G_b`, where
/// `G_1 = Q − error` and `G_{k+1}` is `D_t G_k` reduced the same way. The
/// replacements are truncated to the retained grading; the terms of
/// `residual` itself are kept whole.
pub fn manifold_reduce(residual: &Expr, da: &DifferentialApproximation) -> Result<Expr, ProlongError> {
    let depth = max_t_order(residual);
    if depth == 0 {
        return Ok(residual.clone());
    }
    if depth > MAX_REDUCTION_T_ORDER {
        return Err(ProlongError::NonTermination(depth));
    }
    let closures = t_closures(&da.time_derivative(), depth as u32, Some(&da.grading));
    let rules: BTreeMap<Symbol, Expr> = residual
        .symbols()
        .into_iter()
        .filter_map(Symbol::as_jet)
        .filter(|j| j.t_order() >= 1)
        .map(|j| {
            let g = &closures[j.t_order() as usize - 1];
            (Symbol::Jet(j), g.total_derivative_n(j.x_order(), 0))
        })
        .collect();
    let out = residual.substitute_with(|s| rules.get(&s))?;
    let left = max_t_order(&out);
    if left > 0 {
        return Err(ProlongError::NonTermination(left));
    }
    Ok(out)
}

/// The prolonged operator applied to `da` and reduced on its manifold.
///
/// Zero exactly when `inf` is a symmetry at the retained grading.
pub fn invariance_residual(inf: &InfinitesimalSet, da: &DifferentialApproximation) -> Result<Expr, ProlongError> {
    let target = da.full();
    let jets: Vec<JetVar> = target.symbols().into_iter().filter_map(Symbol::as_jet).collect();
    let sig = sigma_table_for(inf, jets);
    let applied = apply_prolonged(inf, &sig, &target)?;
    manifold_reduce(&applied, da)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expression;
    use crate::symkernel::jet;

    fn p(s: &str) -> Expr {
        parse_expression(s).unwrap()
    }

    fn op(xi1: &str, xi2: &str, eta: &str) -> InfinitesimalSet {
        InfinitesimalSet::from_components([
            (Component::Xi1, p(xi1)),
            (Component::Xi2, p(xi2)),
            (Component::Eta, p(eta)),
        ])
    }

    fn burgers() -> DifferentialApproximation {
        DifferentialApproximation::continuous(&p("-u*u_x + nu*u_xx"))
    }

    #[test]
    fn galilean_first_order_sigma() {
        let s = sigma_table(&op("t", "0", "1"), 1);
        assert_eq!(s.get(JetVar::x(1)), Some(&Expr::zero()));
        assert_eq!(s.get(JetVar::t(1)), Some(&p("-u_x")));
    }

    #[test]
    fn dilatation_sigmas() {
        let s = sigma_table(&op("x", "2*t", "-u"), 2);
        assert_eq!(s.get(JetVar::x(1)), Some(&p("-2*u_x")));
        assert_eq!(s.get(JetVar::x(2)), Some(&p("-3*u_xx")));
        assert_eq!(s.get(JetVar::t(1)), Some(&p("-3*u_t")));
        assert_eq!(s.len(), 5);
    }

    #[test]
    fn zero_operator_has_zero_sigmas() {
        let s = sigma_table(&InfinitesimalSet::zero(), 3);
        assert!(s.jets().all(|j| s.get(j).unwrap().is_zero()));
        assert_eq!(s.len(), JetVar::all_up_to(3).len());
    }

    #[test]
    fn galilean_annihilates_burgers_operator() {
        let inf = op("t", "0", "1");
        let f = p("u_t + u*u_x - nu*u_xx");
        let s = sigma_table(&inf, 2);
        assert!(apply_prolonged(&inf, &s, &f).unwrap().is_zero());
        let zero = InfinitesimalSet::zero();
        assert!(apply_prolonged(&zero, &sigma_table(&zero, 2), &f).unwrap().is_zero());
        let shift_t = op("0", "1", "0");
        assert!(apply_prolonged(&shift_t, &sigma_table(&shift_t, 2), &f).unwrap().is_zero());
    }

    #[test]
    fn missing_sigma_is_reported() {
        let inf = op("t", "0", "1");
        let s = sigma_table(&inf, 1);
        assert_eq!(apply_prolonged(&inf, &s, &jet(2, 0)), Err(ProlongError::MissingSigma(JetVar::x(2))));
    }

    #[test]
    fn reduction_on_continuous_burgers() {
        let da = burgers();
        assert!(manifold_reduce(&p("u_t + u*u_x - nu*u_xx"), &da).unwrap().is_zero());
        assert_eq!(manifold_reduce(&p("u_xt"), &da).unwrap(), p("-u_x^2 - u*u_xx + nu*u_xxx"));
        let g1 = p("-u*u_x + nu*u_xx");
        let g2 = &(-(&g1 * &p("u"))).total_derivative(Axis::X) + &(&p("nu") * &g1.total_derivative_n(2, 0));
        assert_eq!(manifold_reduce(&p("u_tt"), &da).unwrap(), g2);
    }

    #[test]
    fn dependency_check() {
        let none = BTreeMap::new();
        assert!(op("x + c1*t", "t^2", "u*x").check_dependencies(&none).is_ok());
        assert_eq!(
            op("u", "0", "0").check_dependencies(&none),
            Err(ProlongError::Dependency { component: "xi1", symbol: Symbol::U })
        );
        assert!(op("0", "0", "u_x").check_dependencies(&none).is_err());
    }
}
