//! Differential approximation (modified equation) of a difference scheme.
//!
//! Grid samples are Taylor-expanded about `(x, t)` to obtain the Γ-form,
//! which still carries t- and mixed derivatives in its error terms. The
//! Π-form replaces those with pure x-derivatives using the equation itself,
//! keeping only a down-closed set of `(τ, h)` exponent pairs.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::One;
use thiserror::Error;

use crate::symkernel::{jet, Axis, Expr, GridSample, JetVar, KernelError, Monomial, Rational, Symbol};

pub use crate::parser::MAX_TAYLOR_ORDER;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModeqError {
    #[error("scheme leaves a negative power {symbol}^{exponent} after Taylor expansion (inconsistent scheme or Taylor order too small): {term}")]
    LaurentResidual { symbol: Symbol, exponent: i32, term: String },
    #[error("scheme does not approximate the declared pde: leading part is `{found}`, expected `{expected}`")]
    Inconsistent { found: String, expected: String },
    #[error("Taylor order {order} is too small: expansion is exact only through (tau, h) degree {validity}")]
    TaylorOrderTooLow { order: u32, validity: i64 },
    #[error("could not isolate the leading error gradings with Taylor order up to {0}")]
    GradingNotClosed(u32),
    #[error("t-derivative elimination did not reach a fixpoint")]
    NonTermination,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Down-closed set of `(τ exponent, h exponent)` pairs kept in an analysis.
///
/// Stored by its generators: a pair is kept when it is `(0, 0)` or lies
/// componentwise below some generator. Truncating to it is reduction modulo
/// a monomial ideal, so it commutes with sums and products.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Grading {
    generators: BTreeSet<(u32, u32)>,
}

impl Grading {
    /// Keeps only step-free terms.
    pub fn step_free() -> Self {
        Grading::default()
    }

    pub fn from_generators<I: IntoIterator<Item = (u32, u32)>>(gens: I) -> Self {
        let mut g = Grading::default();
        for p in gens {
            g.insert(p);
        }
        g
    }

    /// Every pair of total degree at most `degree`.
    pub fn total_degree(degree: u32) -> Self {
        Grading::from_generators((0..=degree).map(|a| (a, degree - a)))
    }

    pub fn union(&self, other: &Grading) -> Grading {
        Grading::from_generators(self.generators.iter().chain(other.generators.iter()).copied())
    }

    fn insert(&mut self, p: (u32, u32)) {
        if p == (0, 0) || self.keeps(p.0 as i32, p.1 as i32) {
            return;
        }
        self.generators.retain(|&(a, b)| !(a <= p.0 && b <= p.1));
        self.generators.insert(p);
    }

    /// The maximal kept pairs.
    pub fn generators(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.generators.iter().copied()
    }

    pub fn keeps(&self, tau: i32, h: i32) -> bool {
        if tau < 0 || h < 0 {
            return false;
        }
        (tau, h) == (0, 0) || self.generators.iter().any(|&(a, b)| tau as u32 <= a && h as u32 <= b)
    }

    pub fn keeps_monomial(&self, m: &Monomial) -> bool {
        let (tau, h) = m.step_grading();
        self.keeps(tau, h)
    }

    pub fn truncate(&self, e: &Expr) -> Expr {
        e.filter(|m| self.keeps_monomial(m))
    }

    pub fn max_total_degree(&self) -> u32 {
        self.generators.iter().map(|&(a, b)| a + b).max().unwrap_or(0)
    }
}

impl fmt::Display for Grading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (a, b)) in self.generators.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", step_monomial(*a, *b))?;
        }
        f.write_str("}")
    }
}

fn step_monomial(tau: u32, h: u32) -> Monomial {
    Monomial::from_factors([(Symbol::Tau, tau as i32), (Symbol::H, h as i32)])
}

/// `u_t + (error terms) = Q`, stored as `pde_part + error_part = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialApproximation {
    /// `u_t − Q`.
    pub pde_part: Expr,
    /// Terms of positive `(τ, h)` degree over pure x-jets.
    pub error_part: Expr,
    pub grading: Grading,
    /// Taylor order used for the grid samples (0 for a bare pde).
    pub taylor_order: u32,
}

impl DifferentialApproximation {
    /// The continuous equation `u_t = Q` with no error terms.
    pub fn continuous(pde_rhs: &Expr) -> Self {
        DifferentialApproximation {
            pde_part: &jet(0, 1) - pde_rhs,
            error_part: Expr::zero(),
            grading: Grading::step_free(),
            taylor_order: 0,
        }
    }

    pub fn full(&self) -> Expr {
        &self.pde_part + &self.error_part
    }

    /// `Q − error`, the value of `u_t` on the solution manifold.
    pub fn time_derivative(&self) -> Expr {
        &(&jet(0, 1) - &self.pde_part) - &self.error_part
    }

    /// Pareto-minimal `(τ, h)` exponent pairs carried by the error part.
    pub fn minimal_gradings(&self) -> Vec<(u32, u32)> {
        pareto_minimal(&self.error_part)
    }

    /// Highest x-derivative order in the approximation.
    pub fn max_x_order(&self) -> u8 {
        self.full().symbols().into_iter().filter_map(Symbol::as_jet).map(JetVar::x_order).max().unwrap_or(0)
    }

    pub fn max_jet_order(&self) -> u8 {
        self.full().symbols().into_iter().filter_map(Symbol::as_jet).map(JetVar::total_order).max().unwrap_or(0)
    }

    /// Error part split by `(τ, h)` grading.
    pub fn error_by_grading(&self) -> Vec<((u32, u32), Expr)> {
        self.error_part
            .collect(|s| matches!(s, Symbol::H | Symbol::Tau))
            .into_iter()
            .map(|(m, e)| {
                let (tau, h) = m.step_grading();
                ((tau as u32, h as u32), e)
            })
            .collect()
    }
}

fn pareto_minimal(e: &Expr) -> Vec<(u32, u32)> {
    let grades: BTreeSet<(u32, u32)> = e
        .terms()
        .map(|(m, _)| m.step_grading())
        .filter(|&(a, b)| a >= 0 && b >= 0 && (a, b) != (0, 0))
        .map(|(a, b)| (a as u32, b as u32))
        .collect();
    grades
        .iter()
        .copied()
        .filter(|&(a, b)| !grades.iter().any(|&(c, d)| (c, d) != (a, b) && c <= a && d <= b))
        .collect()
}

fn factorial(n: u32) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * Rational::from_integer(k.into()))
}

/// Taylor expansion of `u(x + p·h, t + q·τ)` through total order `order`.
pub fn shift_expand(s: GridSample, order: u32) -> Expr {
    let (p, q) = (s.x_offset(), s.t_offset());
    let mut out = Expr::symbol(Symbol::U);
    for total in 1..=order {
        for a in 0..=total {
            let b = total - a;
            let c = p.pow(a as i32) * q.pow(b as i32) / (factorial(a) * factorial(b));
            let Some(j) = JetVar::new(a as u8, b as u8) else { continue };
            let m = Monomial::from_factors([(Symbol::H, a as i32), (Symbol::Tau, b as i32), (Symbol::Jet(j), 1)]);
            out.add_term(m, c);
        }
    }
    out
}

fn step_degree(m: &Monomial) -> i64 {
    let (tau, h) = m.step_grading();
    tau as i64 + h as i64
}

fn truncate_degree(e: &Expr, max: i64) -> Expr {
    e.filter(|m| step_degree(m) <= max)
}

/// Lowest `(τ, h)` degree among the non-sample prefactors of the scheme's terms.
fn min_prefactor_degree(scheme: &Expr) -> i64 {
    scheme
        .terms()
        .map(|(m, _)| step_degree(m))
        .min()
        .unwrap_or(0)
}

/// Taylor order `N` for which expanding `scheme` is exact through `(τ, h)` degree `validity`.
fn validity_degree(scheme: &Expr, order: u32) -> i64 {
    order as i64 + min_prefactor_degree(scheme)
}

/// Γ-form: every grid sample replaced by its Taylor expansion of order `order`,
/// truncated to the `(τ, h)` degree through which the expansion is exact.
///
/// Checks that no negative step powers survive and that the step-free part
/// is `u_t − Q`.
pub fn gamma_form(scheme: &Expr, pde_rhs: &Expr, order: u32) -> Result<Expr, ModeqError> {
    let validity = validity_degree(scheme, order);
    if validity < 0 {
        return Err(ModeqError::TaylorOrderTooLow { order, validity });
    }
    let mut out = Expr::zero();
    for (m, c) in scheme.terms() {
        let (samples, rest) = m.split(|s| matches!(s, Symbol::Sample(_)));
        let mut product = Expr::term(c.clone(), rest);
        for (s, e) in samples.factors() {
            let Symbol::Sample(sample) = s else { unreachable!() };
            let series = shift_expand(sample, order);
            for _ in 0..e {
                product = truncate_degree(&(&product * &series), validity);
            }
        }
        out += &truncate_degree(&product, validity);
    }
    if let Some((m, _)) = out.terms().find(|(m, _)| m.has_negative_exponent()) {
        let (symbol, exponent) = m.factors().find(|&(_, e)| e < 0).expect("negative factor");
        return Err(ModeqError::LaurentResidual { symbol, exponent, term: m.to_string() });
    }
    let expected = &jet(0, 1) - pde_rhs;
    let leading = out.filter(|m| m.step_grading() == (0, 0));
    if leading != expected {
        return Err(ModeqError::Inconsistent { found: leading.to_string(), expected: expected.to_string() });
    }
    Ok(out)
}

/// `∂^k u/∂t^k` expressed through x-derivatives on `u_t = Q`.
pub fn t_closure(pde_rhs: &Expr, k: u32) -> Expr {
    t_closures(pde_rhs, k, None).pop().expect("k >= 1")
}

/// `[G_1, …, G_k]` with `G_1 = rhs` and `G_{j+1} = D_t G_j` reduced by the
/// earlier closures. With a grading, every step is truncated to it.
pub(crate) fn t_closures(rhs: &Expr, k: u32, grading: Option<&Grading>) -> Vec<Expr> {
    assert!(k >= 1, "t_closure needs k >= 1");
    let trunc = |e: Expr| match grading {
        Some(g) => g.truncate(&e),
        None => e,
    };
    let mut closures = vec![trunc(rhs.clone())];
    while closures.len() < k as usize {
        let last = closures.last().expect("nonempty");
        let dt = last.total_derivative(Axis::T);
        let next = eliminate_t_jets(&dt, &closures, grading).expect("closures are polynomial");
        closures.push(next);
    }
    closures
}

/// Replaces every jet `(a, b)` with `b ≥ 1` by `D_x^a G_b`.
///
/// `closures[b - 1]` must be pure in x. Jets whose t-order exceeds the
/// available closures are left in place.
pub(crate) fn eliminate_t_jets(
    e: &Expr,
    closures: &[Expr],
    grading: Option<&Grading>,
) -> Result<Expr, KernelError> {
    let jets: Vec<JetVar> = e
        .symbols()
        .into_iter()
        .filter_map(Symbol::as_jet)
        .filter(|j| j.t_order() >= 1 && (j.t_order() as usize) <= closures.len())
        .collect();
    if jets.is_empty() {
        return Ok(match grading {
            Some(g) => g.truncate(e),
            None => e.clone(),
        });
    }
    let rules: Vec<(Symbol, Expr)> = jets
        .iter()
        .map(|j| {
            let base = &closures[j.t_order() as usize - 1];
            let r = base.total_derivative_n(j.x_order(), 0);
            (Symbol::Jet(*j), match grading {
                Some(g) => g.truncate(&r),
                None => r,
            })
        })
        .collect();
    let out = e.substitute_with(|s| rules.iter().find(|(k, _)| *k == s).map(|(_, r)| r))?;
    Ok(match grading {
        Some(g) => g.truncate(&out),
        None => out,
    })
}

fn max_t_order(e: &Expr) -> u32 {
    e.symbols().into_iter().filter_map(Symbol::as_jet).map(|j| j.t_order() as u32).max().unwrap_or(0)
}

const MAX_ELIMINATION_ROUNDS: usize = 64;

/// Π-form of a Γ-form at the given grading.
///
/// The first round replaces t-bearing jets in the error terms by the
/// closures of `u_t = Q`; later rounds use `u_t = Q − error` until the
/// error part stops changing, which makes every retained grading exact.
pub fn pi_form(gamma: &Expr, pde_rhs: &Expr, grading: &Grading) -> Result<DifferentialApproximation, ModeqError> {
    let pde_part = &jet(0, 1) - pde_rhs;
    let leading = gamma.filter(|m| m.step_grading() == (0, 0));
    if leading != pde_part {
        return Err(ModeqError::Inconsistent { found: leading.to_string(), expected: pde_part.to_string() });
    }
    let raw_error = grading.truncate(&(gamma - &pde_part));
    let depth = max_t_order(&raw_error).max(1);
    let mut rhs = pde_rhs.clone();
    let mut error = Expr::zero();
    for round in 0..MAX_ELIMINATION_ROUNDS {
        let closures = t_closures(&rhs, depth, Some(grading));
        let next = eliminate_t_jets(&raw_error, &closures, Some(grading))?;
        if max_t_order(&next) > 0 {
            return Err(ModeqError::NonTermination);
        }
        if round > 0 && next == error {
            return Ok(DifferentialApproximation { pde_part, error_part: next, grading: grading.clone(), taylor_order: 0 });
        }
        rhs = pde_rhs - &next;
        error = next;
    }
    Err(ModeqError::NonTermination)
}

/// Lowest-order error gradings of the naive Π-form, or `None` when the
/// expansion at this validity degree cannot certify them.
fn certified_minimal_gradings(gamma: &Expr, pde_rhs: &Expr, validity: i64) -> Result<Option<Vec<(u32, u32)>>, ModeqError> {
    let pde_part = &jet(0, 1) - pde_rhs;
    let raw = gamma - &pde_part;
    let depth = max_t_order(&raw).max(1);
    let closures = t_closures(pde_rhs, depth, None);
    let naive = truncate_degree(&eliminate_t_jets(&raw, &closures, None)?, validity);
    let minimal = pareto_minimal(&naive);
    let tau_only = minimal.iter().find(|g| g.1 == 0).map(|g| g.0);
    let h_only = minimal.iter().find(|g| g.0 == 0).map(|g| g.1);
    let (Some(a), Some(b)) = (tau_only, h_only) else {
        return Ok(None);
    };
    let needed = (a as i64 + b as i64 - 2).max(a.max(b) as i64);
    Ok((validity >= needed).then_some(minimal))
}

/// Builds the differential approximation of `scheme` for `u_t = pde_rhs`.
///
/// The Taylor order starts at `taylor_order` (or `2 +` the highest inverse
/// step power in the scheme) and is raised until the leading error gradings
/// are certified, up to [`MAX_TAYLOR_ORDER`]. The retained grading is the
/// down-closure of those leading gradings, enlarged to every pair of total
/// degree `≤ grading_degree` when given.
pub fn differential_approximation(
    scheme: &Expr,
    pde_rhs: &Expr,
    taylor_order: Option<u32>,
    grading_degree: Option<u32>,
) -> Result<DifferentialApproximation, ModeqError> {
    let inverse_steps = scheme
        .terms()
        .map(|(m, _)| -(m.exponent(Symbol::H).min(0)) as u32)
        .max()
        .unwrap_or(0);
    let start = taylor_order.unwrap_or(2 + inverse_steps).max(1);
    let mut order = start;
    while order <= MAX_TAYLOR_ORDER {
        let validity = validity_degree(scheme, order);
        let needed_extra = grading_degree.map(|d| d as i64).unwrap_or(0);
        if validity < 1 || validity < needed_extra {
            order += 1;
            continue;
        }
        let gamma = gamma_form(scheme, pde_rhs, order)?;
        if let Some(minimal) = certified_minimal_gradings(&gamma, pde_rhs, validity)? {
            let mut grading = Grading::from_generators(minimal);
            if let Some(d) = grading_degree {
                grading = grading.union(&Grading::total_degree(d));
            }
            log::debug!("taylor order {order}: retained grading {grading}");
            let mut da = pi_form(&gamma, pde_rhs, &grading)?;
            da.taylor_order = order;
            return Ok(da);
        }
        order += 1;
    }
    Err(ModeqError::GradingNotClosed(MAX_TAYLOR_ORDER))
}
