use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use super::symbol::Symbol;

/// A power product of symbols, kept sorted by symbol with no zero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    factors: SmallVec<[(Symbol, i32); 4]>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(s: Symbol) -> Self {
        Self::power(s, 1)
    }

    pub fn power(s: Symbol, exp: i32) -> Self {
        let mut m = Monomial::one();
        if exp != 0 {
            m.factors.push((s, exp));
        }
        m
    }

    /// Builds a monomial from arbitrary `(symbol, exponent)` pairs, merging repeats.
    pub fn from_factors<I: IntoIterator<Item = (Symbol, i32)>>(factors: I) -> Self {
        let mut m = Monomial::one();
        for (s, e) in factors {
            m.bump(s, e);
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (Symbol, i32)> + '_ {
        self.factors.iter().copied()
    }

    pub fn exponent(&self, s: Symbol) -> i32 {
        match self.factors.binary_search_by(|(f, _)| f.cmp(&s)) {
            Ok(i) => self.factors[i].1,
            Err(_) => 0,
        }
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.exponent(s) != 0
    }

    pub fn total_degree(&self) -> i64 {
        self.factors.iter().map(|&(_, e)| e as i64).sum()
    }

    /// `(τ exponent, h exponent)`.
    pub fn step_grading(&self) -> (i32, i32) {
        (self.exponent(Symbol::Tau), self.exponent(Symbol::H))
    }

    /// Multiplies in `s^delta` in place.
    pub fn bump(&mut self, s: Symbol, delta: i32) {
        if delta == 0 {
            return;
        }
        match self.factors.binary_search_by(|(f, _)| f.cmp(&s)) {
            Ok(i) => {
                self.factors[i].1 += delta;
                if self.factors[i].1 == 0 {
                    self.factors.remove(i);
                }
            }
            Err(i) => self.factors.insert(i, (s, delta)),
        }
    }

    pub fn with_bump(&self, s: Symbol, delta: i32) -> Monomial {
        let mut m = self.clone();
        m.bump(s, delta);
        m
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = SmallVec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.factors, &other.factors);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0, e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial { factors: out }
    }

    pub fn inverse(&self) -> Monomial {
        Monomial { factors: self.factors.iter().map(|&(s, e)| (s, -e)).collect() }
    }

    /// Splits into the part over symbols selected by `pred` and the rest.
    pub fn split(&self, pred: impl Fn(Symbol) -> bool) -> (Monomial, Monomial) {
        let mut hit = Monomial::one();
        let mut rest = Monomial::one();
        for &(s, e) in &self.factors {
            if pred(s) {
                hit.factors.push((s, e));
            } else {
                rest.factors.push((s, e));
            }
        }
        (hit, rest)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.factors.iter().map(|&(s, _)| s)
    }

    pub fn has_negative_exponent(&self) -> bool {
        self.factors.iter().any(|&(_, e)| e < 0)
    }
}

/// Graded lexicographic: total degree first, then the exponent vector
/// compared in canonical symbol order.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (a, b) = (&self.factors, &other.factors);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(&(_, e)), None) => return e.cmp(&0),
                (None, Some(&(_, e))) => return 0.cmp(&e),
                (Some(&(sa, ea)), Some(&(sb, eb))) => match sa.cmp(&sb) {
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    }
                    Ordering::Less => return ea.cmp(&0),
                    Ordering::Greater => return 0.cmp(&eb),
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (k, &(s, e)) in self.factors.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::JetVar;

    #[test]
    fn exponents_cancel() {
        let a = Monomial::power(Symbol::H, -1);
        let b = Monomial::power(Symbol::H, 2);
        assert_eq!(a.mul(&b), Monomial::var(Symbol::H));
        assert!(a.mul(&a.inverse()).is_one());
    }

    #[test]
    fn graded_before_lex() {
        let u2 = Monomial::power(Symbol::U, 2);
        let x = Monomial::var(Symbol::X);
        let xt = Monomial::from_factors([(Symbol::X, 1), (Symbol::T, 1)]);
        assert!(x < u2);
        assert!(u2 < xt);
    }

    #[test]
    fn display() {
        let m = Monomial::from_factors([
            (Symbol::Jet(JetVar::x(4)), 1),
            (Symbol::Nu, 1),
            (Symbol::H, -2),
        ]);
        assert_eq!(m.to_string(), "nu*h^-2*u_xxxx");
    }
}
