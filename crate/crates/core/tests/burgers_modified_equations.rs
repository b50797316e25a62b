//! Modified equations of the Burgers schemes in `problems/`, checked against
//! closed forms built from `g1 = u_t`, `g2 = u_tt`, `g3 = u_ttt` of the
//! continuous equation.

use std::path::PathBuf;

use symflux_core::modeq::{differential_approximation, DifferentialApproximation};
use symflux_core::parser::{parse_problem, Problem};
use symflux_core::symkernel::{jet, rat, sym};
use symflux_core::{Axis, Expr, Symbol};

fn problem(name: &str) -> Problem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name);
    parse_problem(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn analyze(p: &Problem, scheme: &str) -> DifferentialApproximation {
    let s = p.schemes.iter().find(|s| s.name == scheme).unwrap();
    differential_approximation(&s.expr, &p.pde_rhs, None, None).unwrap()
}

struct Burgers {
    u: Expr,
    nu: Expr,
    tau: Expr,
    h: Expr,
    g1: Expr,
    g2: Expr,
    g3: Expr,
}

fn dx(e: &Expr, n: u8) -> Expr {
    e.total_derivative_n(n, 0)
}

impl Burgers {
    fn new() -> Self {
        let u = sym(Symbol::U);
        let nu = sym(Symbol::Nu);
        let half_u2 = u.pow(2).scale(&rat(1, 2));
        let g1 = &(-dx(&half_u2, 1)) + &(&nu * &jet(2, 0));
        let g2 = &dx(&(-(&g1 * &u)), 1) + &(&nu * &dx(&g1, 2));
        let g3 = &dx(&(&(-(&g2 * &u)) - &g1.pow(2)), 1) + &(&nu * &dx(&g2, 2));
        Burgers { u, nu, tau: sym(Symbol::Tau), h: sym(Symbol::H), g1, g2, g3 }
    }

    /// `u_t + ½(u²)_x − ν u_xx`.
    fn pde(&self) -> Expr {
        &(&jet(0, 1) + &dx(&self.u.pow(2).scale(&rat(1, 2)), 1)) - &(&self.nu * &jet(2, 0))
    }

    /// `(h²/12)(u²)_xxx − (ν h²/12) u_xxxx`.
    fn space_error(&self) -> Expr {
        let h2 = self.h.pow(2);
        &(&h2 * &dx(&self.u.pow(2), 3)).scale(&rat(1, 12)) - &(&(&self.nu * &h2) * &jet(4, 0)).scale(&rat(1, 12))
    }
}

#[test]
fn ftcs_matches_closed_form() {
    let b = Burgers::new();
    let da = analyze(&problem("burgers.lfd"), "ftcs");
    let expected = &(&b.pde() + &(&b.tau * &b.g2).scale(&rat(1, 2))) + &b.space_error();
    assert_eq!(da.full(), expected);
    assert_eq!(da.minimal_gradings(), vec![(0, 2), (1, 0)]);
    assert_eq!(da.max_x_order(), 4);
}

#[test]
fn lax_wendroff_matches_closed_form() {
    let b = Burgers::new();
    let da = analyze(&problem("burgers.lfd"), "lax_wendroff");
    let expected = &(&b.pde() + &(&b.tau.pow(2) * &b.g3).scale(&rat(1, 6))) + &b.space_error();
    assert_eq!(da.full(), expected);
    assert_eq!(da.minimal_gradings(), vec![(0, 2), (2, 0)]);
    assert_eq!(da.max_x_order(), 6);
}

#[test]
fn crank_nicolson_matches_closed_form() {
    let b = Burgers::new();
    let da = analyze(&problem("burgers.lfd"), "crank_nicolson");
    let tau_part = &(&b.g3.scale(&rat(1, 6)) + &dx(&(&b.g1.pow(2) + &(&b.u * &b.g2)), 1).scale(&rat(1, 4)))
        - &(&b.nu * &dx(&b.g2, 2)).scale(&rat(1, 4));
    let h_part = &dx(&b.u.pow(2).scale(&rat(1, 2)), 3).scale(&rat(1, 6)) - &(&b.nu * &jet(4, 0)).scale(&rat(1, 12));
    let expected = &(&b.pde() + &(&b.tau.pow(2) * &tau_part)) + &(&b.h.pow(2) * &h_part);
    assert_eq!(da.full(), expected);
    assert_eq!(da.minimal_gradings(), vec![(0, 2), (2, 0)]);
    assert_eq!(da.max_x_order(), 6);
}

#[test]
fn printed_lax_wendroff_correction_leaves_first_order_term() {
    let b = Burgers::new();
    let da = analyze(&problem("lax_wendroff_printed.lfd"), "lax_wendroff_printed");
    let leftover = &(&(&b.tau * &b.nu) * &jet(1, 0)) * &jet(2, 0);
    let expected = &(&b.pde() + &leftover) + &b.space_error();
    assert_eq!(da.full(), expected);
    assert_eq!(da.minimal_gradings(), vec![(0, 2), (1, 0)]);
}

#[test]
fn ftcs_in_jet_variables_has_viscous_cross_term() {
    // collecting the FTCS modified equation over jets isolates u_x*u_xx with
    // coefficient -4*(tau/2)*nu + h^2/2
    let da = analyze(&problem("burgers.lfd"), "ftcs");
    let groups = da.full().collect(|s| s.is_jet());
    let key = symflux_core::Monomial::from_factors([
        (Symbol::Jet(symflux_core::JetVar::x(1)), 1),
        (Symbol::Jet(symflux_core::JetVar::x(2)), 1),
    ]);
    let expected = &(&sym(Symbol::Tau) * &sym(Symbol::Nu)).scale(&rat(-2, 1)) + &sym(Symbol::H).pow(2).scale(&rat(1, 2));
    assert_eq!(groups[&key], expected);
}

#[test]
fn pi_forms_have_no_time_derivatives_in_error() {
    let p = problem("burgers.lfd");
    for s in &p.schemes {
        let da = analyze(&p, &s.name);
        assert!(da.error_part.symbols().iter().all(|s| s.as_jet().map_or(true, |j| j.t_order() == 0)));
        assert_eq!(da.pde_part, &jet(0, 1) - &p.pde_rhs);
    }
}

#[test]
fn enlarging_the_grading_keeps_retained_coefficients() {
    let p = problem("burgers.lfd");
    for s in &p.schemes {
        let small = analyze(&p, &s.name);
        let large = differential_approximation(&s.expr, &p.pde_rhs, None, Some(3)).unwrap();
        assert_eq!(small.grading.truncate(&large.error_part), small.error_part, "scheme {}", s.name);
        // Crank-Nicolson is time-symmetric: its third-degree terms all vanish.
        if s.name == "crank_nicolson" {
            assert_eq!(large.error_part, small.error_part);
        } else {
            assert!(large.error_part.len() > small.error_part.len());
        }
    }
}

#[test]
fn total_derivatives_used_by_closures_commute() {
    let b = Burgers::new();
    let lhs = b.g2.total_derivative(Axis::X).total_derivative(Axis::T);
    let rhs = b.g2.total_derivative(Axis::T).total_derivative(Axis::X);
    assert_eq!(lhs, rhs);
}
