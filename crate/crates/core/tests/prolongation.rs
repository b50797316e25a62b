//! Invariance residuals of known operators on continuous Burgers and on the
//! FTCS differential approximation, plus an independent check of the σ
//! recursion against the characteristic formula
//! `σ_J = D_J(η − ξ₁u_x − ξ₂u_t) + ξ₁ u_{J+x} + ξ₂ u_{J+t}`.

use std::path::PathBuf;

use symflux_core::modeq::{differential_approximation, DifferentialApproximation};
use symflux_core::parser::{parse_expression, parse_problem};
use symflux_core::prolong::{
    invariance_residual, manifold_reduce, sigma_step, sigma_table, Component, InfinitesimalSet,
};
use symflux_core::symkernel::{jet, rat};
use symflux_core::{Axis, Expr, JetVar, Symbol};

fn p(s: &str) -> Expr {
    parse_expression(s).unwrap()
}

fn op(parts: &[(Component, &str)]) -> InfinitesimalSet {
    InfinitesimalSet::from_components(parts.iter().map(|(c, s)| (*c, p(s))))
}

use Component::*;

fn burgers_group() -> Vec<(&'static str, InfinitesimalSet)> {
    vec![
        ("L1", op(&[(Xi1, "1")])),
        ("L2", op(&[(Xi2, "1")])),
        ("L3", op(&[(Xi1, "x"), (Xi2, "2*t"), (Eta, "-u")])),
        ("L4", op(&[(Xi1, "x*t"), (Xi2, "t^2"), (Eta, "x - u*t")])),
        ("L5", op(&[(Xi1, "t"), (Eta, "1")])),
        ("L6", op(&[(Xi2, "-t"), (Eta, "u"), (Chi, "nu")])),
    ]
}

fn ftcs() -> DifferentialApproximation {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems/burgers.lfd");
    let problem = parse_problem(&std::fs::read_to_string(path).unwrap()).unwrap();
    let s = problem.schemes.iter().find(|s| s.name == "ftcs").unwrap();
    differential_approximation(&s.expr, &problem.pde_rhs, None, None).unwrap()
}

fn continuous() -> DifferentialApproximation {
    DifferentialApproximation::continuous(&p("-u*u_x + nu*u_xx"))
}

#[test]
fn burgers_group_leaves_continuous_equation_invariant() {
    let da = continuous();
    for (name, inf) in burgers_group() {
        assert!(invariance_residual(&inf, &da).unwrap().is_zero(), "{name}");
    }
}

#[test]
fn ftcs_keeps_translations_and_scalings() {
    let da = ftcs();
    let kept = [
        op(&[(Xi1, "1")]),
        op(&[(Xi2, "1")]),
        op(&[(Xi1, "x"), (Xi2, "2*t"), (Eta, "-u"), (Zeta1, "h"), (Zeta2, "2*tau")]),
        op(&[(Xi1, "x"), (Eta, "u"), (Zeta1, "h"), (Chi, "2*nu")]),
    ];
    for inf in &kept {
        assert!(invariance_residual(inf, &da).unwrap().is_zero(), "{inf:?}");
    }
}

#[test]
fn ftcs_loses_galilean_and_projective() {
    let da = ftcs();
    let group = burgers_group();
    for name in ["L4", "L5"] {
        let inf = &group.iter().find(|(n, _)| *n == name).unwrap().1;
        let r = invariance_residual(inf, &da).unwrap();
        assert!(!r.is_zero(), "{name}");
        // the loss shows up at the error terms only
        assert!(r.terms().all(|(m, _)| m.step_grading() != (0, 0)), "{name}: {r}");
    }
}

#[test]
fn unextended_dilatation_fails_on_ftcs() {
    let r = invariance_residual(&op(&[(Xi1, "x"), (Xi2, "2*t"), (Eta, "-u")]), &ftcs()).unwrap();
    assert!(!r.is_zero());
}

fn characteristic(inf: &InfinitesimalSet, j: JetVar) -> Expr {
    let q = &(&inf.eta - &(&inf.xi1 * &jet(1, 0))) - &(&inf.xi2 * &jet(0, 1));
    let dq = q.total_derivative_n(j.x_order(), j.t_order());
    let jx = Expr::symbol(Symbol::Jet(j.promote(Axis::X)));
    let jt = Expr::symbol(Symbol::Jet(j.promote(Axis::T)));
    &(&dq + &(&inf.xi1 * &jx)) + &(&inf.xi2 * &jt)
}

fn general_operator() -> InfinitesimalSet {
    op(&[
        (Xi1, "x^2*t + 3*t - x"),
        (Xi2, "t^3 - 2*t"),
        (Eta, "u^2*x - t*u + x*t^2"),
        (Zeta1, "h*u"),
        (Chi, "nu*x"),
    ])
}

#[test]
fn sigma_recursion_matches_characteristic_formula() {
    let inf = general_operator();
    let table = sigma_table(&inf, 4);
    for j in JetVar::all_up_to(4) {
        assert_eq!(table.get(j).unwrap(), &characteristic(&inf, j), "{j}");
    }
}

#[test]
fn sigma_recursion_is_order_independent() {
    let inf = general_operator();
    let sx = sigma_step(&inf, None, Axis::X);
    let st = sigma_step(&inf, None, Axis::T);
    let xt = sigma_step(&inf, Some((JetVar::x(1), &sx)), Axis::T);
    let tx = sigma_step(&inf, Some((JetVar::t(1), &st)), Axis::X);
    assert_eq!(xt, tx);
    let table = sigma_table(&inf, 2);
    assert_eq!(table.get(JetVar::new(1, 1).unwrap()), Some(&xt));
}

#[test]
fn residual_is_linear_in_the_operator() {
    let da = ftcs();
    let a = op(&[(Xi1, "x + t"), (Eta, "u*x"), (Zeta1, "h")]);
    let b = op(&[(Xi2, "t^2"), (Eta, "1 - u"), (Chi, "nu")]);
    let ra = invariance_residual(&a, &da).unwrap();
    let rb = invariance_residual(&b, &da).unwrap();
    let k = rat(-7, 3);
    let combined = invariance_residual(&a.scale(&k).add(&b), &da).unwrap();
    assert_eq!(combined, &ra.scale(&k) + &rb);
}

#[test]
fn reduction_is_idempotent_and_pure_in_x() {
    let da = ftcs();
    let e = p("u_tt*u_x + nu*u_xxt - h^2*u_t^2 + tau*u_xtt");
    let once = manifold_reduce(&e, &da).unwrap();
    assert!(once.symbols().iter().all(|s| s.as_jet().map_or(true, |j| j.t_order() == 0)));
    assert_eq!(manifold_reduce(&once, &da).unwrap(), once);
}
