use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::monomial::Monomial;
use super::symbol::{Axis, Symbol};
use super::{KernelError, Rational};

/// Canonical sparse polynomial with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is
/// mathematical equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Expr {
    terms: BTreeMap<Monomial, Rational>,
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(int(n))
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::term(Rational::one(), Monomial::var(s))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (graded lexicographic, ascending) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// `Some` when the expression is a single nonzero term.
    pub fn as_monomial(&self) -> Option<(&Monomial, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// `Some(c)` when the expression is a constant (including zero).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { terms: self.terms.iter().map(|(n, k)| (n.mul(m), k * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Expr {
        let mut acc = Expr::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Keeps the terms whose monomial satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms.keys().flat_map(|m| m.symbols()).collect()
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.terms.keys().any(|m| m.contains(s))
    }

    pub fn max_exponent(&self, s: Symbol) -> i32 {
        self.terms.keys().map(|m| m.exponent(s)).max().unwrap_or(0)
    }

    pub fn min_exponent(&self, s: Symbol) -> i32 {
        self.terms.keys().map(|m| m.exponent(s)).min().unwrap_or(0)
    }

    /// Formal partial derivative; every other symbol is held constant.
    pub fn diff_partial(&self, v: Symbol) -> Result<Expr, KernelError> {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            if e < 0 {
                return Err(KernelError::NegativePowerDerivative(v));
            }
            out.add_term(m.with_bump(v, -1), c * int(e as i64));
        }
        Ok(out)
    }

    /// Total derivative `D_x` or `D_t`.
    ///
    /// `u` promotes to `u_x`/`u_t`, each jet `(a, b)` to `(a+1, b)`/`(a, b+1)`;
    /// `ν`, `h`, `τ`, coefficient symbols and grid samples are constants.
    pub fn total_derivative(&self, axis: Axis) -> Expr {
        let explicit = match axis {
            Axis::X => Symbol::X,
            Axis::T => Symbol::T,
        };
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            for (s, e) in m.factors() {
                let lowered = || m.with_bump(s, -1);
                if s == explicit {
                    out.add_term(lowered(), c * int(e as i64));
                } else if let Some(p) = s.promoted(axis) {
                    out.add_term(lowered().with_bump(p, 1), c * int(e as i64));
                }
            }
        }
        out
    }

    /// `D_x^a D_t^b`.
    pub fn total_derivative_n(&self, x_times: u8, t_times: u8) -> Expr {
        let mut e = self.clone();
        for _ in 0..x_times {
            e = e.total_derivative(Axis::X);
        }
        for _ in 0..t_times {
            e = e.total_derivative(Axis::T);
        }
        e
    }

    pub fn substitute(&self, v: Symbol, r: &Expr) -> Result<Expr, KernelError> {
        self.substitute_with(|s| if s == v { Some(r) } else { None })
    }

    /// Simultaneous substitution of every symbol for which `rule` returns a
    /// replacement.
    pub fn substitute_with<'a>(
        &self,
        rule: impl Fn(Symbol) -> Option<&'a Expr>,
    ) -> Result<Expr, KernelError> {
        let mut powers: HashMap<(Symbol, i32), Expr> = HashMap::new();
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut kept = Monomial::one();
            let mut factors: Vec<(Symbol, i32)> = Vec::new();
            for (s, e) in m.factors() {
                if rule(s).is_some() {
                    factors.push((s, e));
                } else {
                    kept.bump(s, e);
                }
            }
            if factors.is_empty() {
                out.add_term(kept, c.clone());
                continue;
            }
            let mut acc = Expr::term(c.clone(), kept);
            for (s, e) in factors {
                if !powers.contains_key(&(s, e)) {
                    let r = rule(s).expect("checked above");
                    let p = if e >= 0 { r.pow(e as u32) } else { r.inverse_monomial(s)?.pow((-e) as u32) };
                    powers.insert((s, e), p);
                }
                acc = &acc * &powers[&(s, e)];
                if acc.is_zero() {
                    break;
                }
            }
            out += &acc;
        }
        Ok(out)
    }

    /// Inverse of a single-term expression, used when substituting into a
    /// negatively powered symbol `s`.
    fn inverse_monomial(&self, s: Symbol) -> Result<Expr, KernelError> {
        match self.as_monomial() {
            Some((m, c)) => {
                let inv = m.inverse();
                if inv.factors().any(|(f, e)| e < 0 && !f.allows_negative_exponent()) {
                    return Err(KernelError::NonMonomialLaurentSubstitution(s));
                }
                Ok(Expr::term(c.recip(), inv))
            }
            None => Err(KernelError::NonMonomialLaurentSubstitution(s)),
        }
    }

    /// Groups terms by their power product over the selected symbols.
    ///
    /// The expression equals `Σ key · value`, and no value contains a selected symbol.
    pub fn collect(&self, selected: impl Fn(Symbol) -> bool) -> BTreeMap<Monomial, Expr> {
        let mut out: BTreeMap<Monomial, Expr> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (key, rest) = m.split(&selected);
            out.entry(key).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Multiplies through by the least common multiple of the denominators
    /// and divides by the gcd of the numerators, making the leading
    /// coefficient positive.
    pub fn primitive_part(&self) -> Expr {
        let Some(scale) = integer_normalizer(self.terms.values()) else {
            return Expr::zero();
        };
        self.scale(&scale)
    }
}

/// Factor that scales a list of rationals to coprime integers with the first entry positive.
pub(crate) fn integer_normalizer<'a>(values: impl Iterator<Item = &'a Rational>) -> Option<Rational> {
    use num_integer::Integer;
    let mut lcm = BigInt::one();
    let mut gcd = BigInt::zero();
    let mut first_sign = None;
    let vals: Vec<&Rational> = values.collect();
    for v in &vals {
        lcm = lcm.lcm(v.denom());
    }
    for v in &vals {
        if v.is_zero() {
            continue;
        }
        if first_sign.is_none() {
            first_sign = Some(v.is_negative());
        }
        let n = v.numer() * (&lcm / v.denom());
        gcd = gcd.gcd(&n);
    }
    let negative = first_sign?;
    let mut s = Rational::new(lcm, gcd);
    if negative {
        s = -s;
    }
    Some(s)
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::symbol(s)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::constant(c)
    }
}

impl AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, rhs: &Expr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Expr> for Expr {
    fn sub_assign(&mut self, rhs: &Expr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add<&Expr> for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(mut self, rhs: Expr) -> Expr {
        if self.len() < rhs.len() {
            let mut r = rhs;
            r += &self;
            return r;
        }
        self += &rhs;
        self
    }
}

impl Sub<&Expr> for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(mut self, rhs: Expr) -> Expr {
        self -= &rhs;
        self
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(mut self) -> Expr {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Mul<&Expr> for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        let (small, large) = if self.len() <= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut acc: HashMap<Monomial, Rational> = HashMap::with_capacity(small.len() * large.len());
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Vacant(v) => {
                        v.insert(c);
                    }
                    std::collections::hash_map::Entry::Occupied(mut o) => *o.get_mut() += c,
                }
            }
        }
        Expr { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        &self * &rhs
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (k, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}
