use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

/// Axis of total differentiation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    T,
}

/// A pure derivative of `u`: `∂^{a+b} u / ∂x^a ∂t^b` with `a + b ≥ 1`.
///
/// Ordered by total order first, then by x-order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct JetVar {
    x_order: u8,
    t_order: u8,
}

impl JetVar {
    /// Returns `None` for `(0, 0)`, which is `u` itself.
    pub fn new(x_order: u8, t_order: u8) -> Option<Self> {
        if x_order == 0 && t_order == 0 {
            None
        } else {
            Some(JetVar { x_order, t_order })
        }
    }

    pub fn x(order: u8) -> Self {
        Self::new(order, 0).expect("pure x jet of order zero")
    }

    pub fn t(order: u8) -> Self {
        Self::new(0, order).expect("pure t jet of order zero")
    }

    pub fn x_order(self) -> u8 {
        self.x_order
    }

    pub fn t_order(self) -> u8 {
        self.t_order
    }

    pub fn total_order(self) -> u8 {
        self.x_order + self.t_order
    }

    pub fn promote(self, axis: Axis) -> Self {
        match axis {
            Axis::X => JetVar { x_order: self.x_order + 1, ..self },
            Axis::T => JetVar { t_order: self.t_order + 1, ..self },
        }
    }

    /// All jets with total order in `1..=max_order`, in canonical order.
    pub fn all_up_to(max_order: u8) -> Vec<JetVar> {
        let mut out = Vec::new();
        for total in 1..=max_order {
            for a in 0..=total {
                out.push(JetVar { x_order: a, t_order: total - a });
            }
        }
        out
    }
}

impl Ord for JetVar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.total_order(), self.x_order).cmp(&(other.total_order(), other.x_order))
    }
}

impl PartialOrd for JetVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("u_")?;
        for _ in 0..self.x_order {
            f.write_str("x")?;
        }
        for _ in 0..self.t_order {
            f.write_str("t")?;
        }
        Ok(())
    }
}

/// A grid value `u(x + p·h, t + q·τ)`. The x-offset is stored doubled so
/// half-integer offsets stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridSample {
    x_half_steps: i32,
    t_steps: i32,
}

impl GridSample {
    pub fn new(x_half_steps: i32, t_steps: i32) -> Self {
        GridSample { x_half_steps, t_steps }
    }

    pub fn x_half_steps(self) -> i32 {
        self.x_half_steps
    }

    pub fn t_steps(self) -> i32 {
        self.t_steps
    }

    pub fn x_offset(self) -> BigRational {
        BigRational::new(BigInt::from(self.x_half_steps), BigInt::from(2))
    }

    pub fn t_offset(self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.t_steps))
    }
}

impl fmt::Display for GridSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.x_half_steps % 2 == 0 {
            write!(f, "u[{},{}]", self.x_half_steps / 2, self.t_steps)
        } else {
            write!(f, "u[{}/2,{}]", self.x_half_steps, self.t_steps)
        }
    }
}

/// Every symbol an expression may contain.
///
/// Variant order is the canonical variable order:
/// x < t < u < ν < h < τ < coefficient symbols < jet variables < grid samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    X,
    T,
    U,
    Nu,
    H,
    Tau,
    /// Unknown ansatz coefficient, identified by index.
    Coeff(u32),
    Jet(JetVar),
    Sample(GridSample),
}

impl Symbol {
    /// Only the step sizes may carry negative exponents.
    pub fn allows_negative_exponent(self) -> bool {
        matches!(self, Symbol::H | Symbol::Tau)
    }

    pub fn is_jet(self) -> bool {
        matches!(self, Symbol::Jet(_))
    }

    pub fn is_coeff(self) -> bool {
        matches!(self, Symbol::Coeff(_))
    }

    pub fn as_jet(self) -> Option<JetVar> {
        match self {
            Symbol::Jet(j) => Some(j),
            _ => None,
        }
    }

    /// Image under the total derivative along `axis`, if the symbol varies along it.
    /// `x` and `t` map to `None` here and are handled as explicit variables by the caller.
    pub(crate) fn promoted(self, axis: Axis) -> Option<Symbol> {
        match self {
            Symbol::U => Some(Symbol::Jet(match axis {
                Axis::X => JetVar::x(1),
                Axis::T => JetVar::t(1),
            })),
            Symbol::Jet(j) => Some(Symbol::Jet(j.promote(axis))),
            _ => None,
        }
    }
}

impl From<JetVar> for Symbol {
    fn from(j: JetVar) -> Self {
        Symbol::Jet(j)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::X => f.write_str("x"),
            Symbol::T => f.write_str("t"),
            Symbol::U => f.write_str("u"),
            Symbol::Nu => f.write_str("nu"),
            Symbol::H => f.write_str("h"),
            Symbol::Tau => f.write_str("tau"),
            Symbol::Coeff(id) => write!(f, "c{id}"),
            Symbol::Jet(j) => j.fmt(f),
            Symbol::Sample(s) => s.fmt(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_jet_is_not_a_jet() {
        assert!(JetVar::new(0, 0).is_none());
        assert_eq!(JetVar::new(2, 1).unwrap().total_order(), 3);
    }

    #[test]
    fn jets_order_by_total_then_x() {
        let mut jets = vec![JetVar::x(2), JetVar::t(1), JetVar::new(1, 1).unwrap(), JetVar::x(1)];
        jets.sort();
        let names: Vec<String> = jets.iter().map(ToString::to_string).collect();
        assert_eq!(names, ["u_t", "u_x", "u_xt", "u_xx"]);
    }

    #[test]
    fn all_jets_up_to_four_matches_fourteen_variables() {
        assert_eq!(JetVar::all_up_to(4).len(), 14);
    }

    #[test]
    fn sample_display() {
        assert_eq!(GridSample::new(1, 0).to_string(), "u[1/2,0]");
        assert_eq!(GridSample::new(-4, 1).to_string(), "u[-2,1]");
    }
}
