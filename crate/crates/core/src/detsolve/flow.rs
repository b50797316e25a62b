//! One-parameter flows of affine generators.
//!
//! The flow of `ż = M z + c` is integrated in closed form when `M` is
//! triangular up to a permutation of the variables. Each coordinate of the
//! flow is a finite sum `Σ e^{λa} a^k · (affine form in the initial point)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::LieGenerator;
use crate::prolong::Component;
use crate::symkernel::{int, Expr, Rational, Symbol};

/// `Σ coefficient · a^k · e^{λa}` keyed by `(λ, k)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpPoly {
    terms: BTreeMap<(Rational, u32), Expr>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    pub fn term(rate: Rational, power: u32, coefficient: Expr) -> Self {
        let mut p = ExpPoly::zero();
        p.add_term(rate, power, coefficient);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rational, u32, &Expr)> {
        self.terms.iter().map(|((r, k), c)| (r, *k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, rate: Rational, power: u32, coefficient: Expr) {
        let key = (rate, power);
        let sum = match self.terms.remove(&key) {
            Some(c) => &c + &coefficient,
            None => coefficient,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (r, k, c) in other.terms() {
            out.add_term(r.clone(), k, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (r, k, c) in self.terms() {
            out.add_term(r.clone(), k, c.scale(s));
        }
        out
    }

    /// Derivative in the group parameter.
    pub fn derivative(&self) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (r, k, c) in self.terms() {
            if !r.is_zero() {
                out.add_term(r.clone(), k, c.scale(r));
            }
            if k > 0 {
                out.add_term(r.clone(), k - 1, c.scale(&int(k as i64)));
            }
        }
        out
    }

    /// Value at `a = 0`.
    pub fn at_zero(&self) -> Expr {
        let mut out = Expr::zero();
        for (_, k, c) in self.terms() {
            if k == 0 {
                out += c;
            }
        }
        out
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (r, k, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let mut factors = Vec::new();
            if !r.is_zero() {
                factors.push(if r.is_one() {
                    "exp(a)".to_string()
                } else if (-r).is_one() {
                    "exp(-a)".to_string()
                } else {
                    format!("exp({r}*a)")
                });
            }
            match k {
                0 => {}
                1 => factors.push("a".to_string()),
                _ => factors.push(format!("a^{k}")),
            }
            let coeff = c.to_string();
            if c.len() > 1 {
                factors.push(format!("({coeff})"));
            } else if coeff != "1" || factors.is_empty() {
                factors.push(coeff);
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

/// Closed-form flow `z*(a)` of an affine generator, one entry per moved
/// variable in the order `x, t, u, h, τ, ν`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineFlow {
    pub maps: Vec<(Symbol, ExpPoly)>,
}

impl AffineFlow {
    pub fn get(&self, s: Symbol) -> Option<&ExpPoly> {
        self.maps.iter().find(|(v, _)| *v == s).map(|(_, p)| p)
    }
}

impl fmt::Display for AffineFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.maps.iter().map(|(v, p)| format!("{v}* = {p}")).collect();
        f.write_str(&parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Flow {
    Affine(AffineFlow),
    /// Some component is not affine in the moved variables.
    NonAffine,
    /// Affine, but the linear part couples variables in a cycle.
    Coupled,
}

const VARIABLES: [Symbol; 6] = [Symbol::X, Symbol::T, Symbol::U, Symbol::H, Symbol::Tau, Symbol::Nu];

fn component_of(s: Symbol) -> Component {
    Component::ALL.into_iter().find(|c| c.variable() == s).expect("moved variable")
}

/// Linear part and constant of an affine expression, or `None`.
fn affine_parts(e: &Expr) -> Option<(BTreeMap<Symbol, Rational>, Rational)> {
    let mut linear = BTreeMap::new();
    let mut constant = Rational::zero();
    for (m, c) in e.terms() {
        match m.total_degree() {
            0 => constant = c.clone(),
            1 => {
                let (s, _) = m.factors().next().expect("degree one");
                if !VARIABLES.contains(&s) {
                    return None;
                }
                linear.insert(s, c.clone());
            }
            _ => return None,
        }
    }
    Some((linear, constant))
}

/// `∫₀^a e^{m(a−s)} s^k e^{λs} ds` as an exp-polynomial in `a`.
fn convolve(m: &Rational, rate: &Rational, k: u32, coefficient: &Expr) -> ExpPoly {
    if rate == m {
        return ExpPoly::term(m.clone(), k + 1, coefficient.scale(&Rational::new(1.into(), (k + 1).into())));
    }
    // ∫₀^a s^k e^{μs} ds = e^{μa} P(a) − P(0) with
    // P(a) = Σ_j (−1)^j k!/(k−j)! a^{k−j} / μ^{j+1}
    let mu = rate - m;
    let mut out = ExpPoly::zero();
    let mut falling = Rational::one();
    let mut mu_pow = mu.clone();
    for j in 0..=k {
        let sign = if j % 2 == 0 { Rational::one() } else { -Rational::one() };
        let factor = sign * &falling / &mu_pow;
        out.add_term(rate.clone(), k - j, coefficient.scale(&factor));
        if j == k {
            out.add_term(m.clone(), 0, coefficient.scale(&-factor));
        }
        falling *= int((k - j) as i64);
        mu_pow *= &mu;
    }
    out
}

/// Integrates the generator's flow exactly when it is affine and triangular.
pub fn affine_flow(g: &LieGenerator) -> Flow {
    let mut system = BTreeMap::new();
    for s in VARIABLES {
        match affine_parts(g.inf.get(component_of(s))) {
            Some(p) => system.insert(s, p),
            None => return Flow::NonAffine,
        };
    }
    // Order variables so each depends only on itself and earlier ones.
    let mut order: Vec<Symbol> = Vec::new();
    while order.len() < VARIABLES.len() {
        let next = VARIABLES.into_iter().find(|s| {
            !order.contains(s) && system[s].0.keys().all(|d| d == s || order.contains(d))
        });
        match next {
            Some(s) => order.push(s),
            None => return Flow::Coupled,
        }
    }
    let mut solved: BTreeMap<Symbol, ExpPoly> = BTreeMap::new();
    for s in order {
        let (linear, constant) = &system[&s];
        let m = linear.get(&s).cloned().unwrap_or_else(Rational::zero);
        let mut forcing = ExpPoly::zero();
        if !constant.is_zero() {
            forcing.add_term(Rational::zero(), 0, Expr::constant(constant.clone()));
        }
        for (d, coef) in linear {
            if *d != s {
                forcing = forcing.add(&solved[d].scale(coef));
            }
        }
        let mut z = ExpPoly::term(m.clone(), 0, Expr::symbol(s));
        for (rate, k, c) in forcing.terms() {
            z = z.add(&convolve(&m, rate, k, c));
        }
        solved.insert(s, z);
    }
    Flow::Affine(AffineFlow { maps: VARIABLES.into_iter().map(|s| (s, solved.remove(&s).expect("solved"))).collect() })
}

/// The generator's component for `s` evaluated along a flow; used to check
/// `d z*/da = g(z*)`.
pub fn field_along(g: &LieGenerator, flow: &AffineFlow, s: Symbol) -> Option<ExpPoly> {
    let (linear, constant) = affine_parts(g.inf.get(component_of(s)))?;
    let mut out = ExpPoly::zero();
    if !constant.is_zero() {
        out.add_term(Rational::zero(), 0, Expr::constant(constant));
    }
    for (d, c) in linear {
        out = out.add(&flow.get(d)?.scale(&c));
    }
    Some(out)
}
