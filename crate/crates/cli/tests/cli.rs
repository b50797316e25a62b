use std::path::{Path, PathBuf};
use std::process::Command;

use symflux_cli::report::Document;
use symflux_cli::{run, CliError, EXIT_INPUT, EXIT_OK, EXIT_VERIFICATION};
use symflux_core::detsolve::DetsolveError;

fn burgers() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems/burgers.lfd")
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("symflux").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("symflux-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn json_generators_for_ftcs() {
    let b = burgers();
    let (code, out, _) = invoke(&["analyze", path_str(&b), "--emit", "generators", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let doc: Document = serde_json::from_str(&out).unwrap();
    let ftcs = doc.analyses.iter().find(|a| a.scheme == "ftcs").unwrap();
    let gens = ftcs.generators.as_ref().unwrap();
    assert_eq!(gens.len(), 4);
    assert!(gens.iter().all(|g| g.closure_residual_terms == 0));
    assert!(ftcs.modified_equation.is_none());
    assert_eq!(gens[0].components[0].variable, "x");
    assert_eq!(gens[0].components[0].coefficient, "1");
}

#[test]
fn json_round_trips() {
    let b = burgers();
    let (code, out, _) = invoke(&["analyze", path_str(&b), "--format", "json", "--ansatz-degree", "2"]);
    assert_eq!(code, EXIT_OK);
    let doc: Document = serde_json::from_str(&out).unwrap();
    assert_eq!(doc.to_json(), out);
    let (_, timed, _) = invoke(&["analyze", path_str(&b), "--format", "json", "--emit", "modified-equation", "--timing"]);
    let doc: Document = serde_json::from_str(&timed).unwrap();
    assert_eq!(doc.to_json(), timed);
    assert_eq!(doc.analyses[0].timing.as_ref().unwrap().approximation_order, 4);
}

#[test]
fn pde_only_gives_six_generators_independent_of_schemes() {
    let b = burgers();
    let (code, with_schemes, _) = invoke(&["analyze", path_str(&b), "--pde-only", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let bare = scratch("bare.lfd", "pde u_t = -u*u_x + nu*u_xx\n");
    let (_, without, _) = invoke(&["analyze", path_str(&bare), "--pde-only", "--format", "json"]);
    let a: Document = serde_json::from_str(&with_schemes).unwrap();
    let b: Document = serde_json::from_str(&without).unwrap();
    assert_eq!(a.analyses, b.analyses);
    assert_eq!(a.analyses.len(), 1);
    assert_eq!(a.analyses[0].generators.as_ref().unwrap().len(), 6);
}

#[test]
fn modified_equation_text_for_lax_wendroff() {
    let b = burgers();
    let (code, out, _) = invoke(&["analyze", path_str(&b), "--emit", "modified-equation"]);
    assert_eq!(code, EXIT_OK);
    let lw = out.split("== lax_wendroff ==").nth(1).unwrap().split("==").next().unwrap();
    assert!(lw.contains("retained grading {h^2, tau^2}"));
    assert!(lw.contains("h^2: 1/2*u_x*u_xx - 1/12*nu*u_xxxx + 1/6*u*u_xxx"));
    assert!(lw.contains("highest x-derivative order: 6"));
    assert!(!out.contains("generators"));
}

#[test]
fn output_is_byte_identical_and_ordered_with_jobs() {
    let b = burgers();
    let (_, one, _) = invoke(&["analyze", path_str(&b), "--ansatz-degree", "2"]);
    let (_, again, _) = invoke(&["analyze", path_str(&b), "--ansatz-degree", "2"]);
    let (_, three, _) = invoke(&["analyze", path_str(&b), "--ansatz-degree", "2", "--jobs", "3"]);
    assert_eq!(one, again);
    assert_eq!(one, three);
}

#[test]
fn out_flag_writes_file() {
    let b = burgers();
    let target = std::env::temp_dir().join(format!("symflux-{}-report.txt", std::process::id()));
    let (code, out, _) =
        invoke(&["analyze", path_str(&b), "--emit", "modified-equation", "--out", path_str(&target)]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert!(std::fs::read_to_string(&target).unwrap().contains("== crank_nicolson =="));
}

#[test]
fn input_errors_exit_with_one() {
    let (code, _, err) = invoke(&["analyze", "/nonexistent/problem.lfd"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("cannot read"));

    let bad = scratch("bad.lfd", "pde u_t = u_xx\nscheme s { (u[0,1] - u[0,0])/tau - u[1,0] $ }\n");
    let (code, _, err) = invoke(&["analyze", path_str(&bad)]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains(":2:"), "{err}");

    let inconsistent = scratch("inconsistent.lfd", "pde u_t = u_xx\nscheme s { (u[0,1] - u[0,0])/tau - (u[1,0] - u[-1,0])/(2*h) = 0 }\n");
    let (code, _, err) = invoke(&["analyze", path_str(&inconsistent)]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("scheme `s`"), "{err}");

    let (code, _, _) = invoke(&["analyze", path_str(&burgers()), "--emit", "everything"]);
    assert_eq!(code, EXIT_INPUT);
    let (code, _, _) = invoke(&["analyze", path_str(&burgers()), "--ansatz-degree", "0"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn verification_failures_exit_with_two() {
    let e = CliError::Detsolve { scheme: "s".into(), source: DetsolveError::ClosureFailure { index: 0, terms: 3 } };
    assert_eq!(e.exit_code(), EXIT_VERIFICATION);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_symflux");
    let ok = Command::new(bin).args(["analyze", path_str(&burgers()), "--emit", "modified-equation"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("== ftcs =="));
    let missing = Command::new(bin).args(["analyze", "/nonexistent.lfd"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(EXIT_INPUT));
}
