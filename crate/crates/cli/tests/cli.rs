use std::process::Command;

use serde_json::Value;

use cosrigid::algebra::{HarnessReport, Prop25Report, SimulationReport};
use cosrigid::cyclic::{AngleSet, SupResult};
use cosrigid::k_constant::{KValue, OmegaResult, TripleReport};
use cosrigid::real_sup::{RealSupResult, TaylorTables};
use cosrigid::verify::Ledger;
use cosrigid::ClosedForm;
use cosrigid_cli::{
    run, Envelope, Outcome, EXIT_OK, EXIT_PRECISION, EXIT_USAGE, SCHEMA_NAME, SCHEMA_VERSION,
};

fn cli(args: &str) -> Outcome {
    run(std::iter::once("cosrigid").chain(args.split_whitespace()))
}

fn json(args: &str) -> Envelope {
    let out = cli(args);
    assert_eq!(out.code, EXIT_OK, "{args}: {}", out.stderr);
    let env: Envelope = serde_json::from_str(&out.stdout).expect("envelope parses");
    assert_eq!(env.schema, SCHEMA_NAME);
    assert_eq!(env.schema_version, SCHEMA_VERSION);
    env
}

fn report<T: serde::de::DeserializeOwned>(args: &str) -> T {
    serde_json::from_value(json(args).report).expect("report round-trips")
}

#[test]
fn k_quarter_is_sqrt2() {
    let env = json("k --angle 1/4");
    assert_eq!(env.command, "k");
    assert_eq!(env.report["k"]["closed_form"], "sqrt2");
    assert!(env.report["k"]["lo"].is_string() && env.report["k"]["hi"].is_string());
    let k: KValue = serde_json::from_value(env.report["k"].clone()).unwrap();
    assert_eq!(k.closed_form(), Some(ClosedForm::Sqrt2));
}

#[test]
fn k_zero_is_three_halves() {
    let env = json("k --angle 0/1");
    assert_eq!(env.report["k"]["closed_form"], "three-halves");
    assert_eq!(env.report["k"]["lo"], env.report["k"]["hi"]);
    let text = cli("k --angle 0/1 --format text");
    assert!(text.stdout.contains("1.5"), "{}", text.stdout);
}

#[test]
fn k_irrational() {
    let k: KValue = serde_json::from_value(json("k --irrational").report["k"].clone()).unwrap();
    assert!(k.is_irrational());
}

#[test]
fn sup_report_round_trips() {
    let s: SupResult = report("sup --a 2/5 --b 4/5");
    assert_eq!(s.value.closed_form(), Some(&ClosedForm::Sqrt5Over2));
    assert_eq!(s.period, 5);
}

#[test]
fn gamma_reports() {
    let g: AngleSet = report("gamma --a 2/5 --m 1.2");
    let members: Vec<String> = g.members.iter().map(|a| a.to_string()).collect();
    assert_eq!(members, ["2/5", "4/5"]);
    let g: AngleSet = report("gamma --a 0 --m three-halves");
    assert_eq!(g.members.len(), 2);
    assert_eq!(cli("gamma --a irrational --m 1.2").code, EXIT_USAGE);
}

#[test]
fn omega_three_halves_has_discrepancies() {
    let o: OmegaResult = report("omega --m three-halves");
    assert_eq!(o.members.len(), 45);
    assert_eq!(o.discrepancies.len(), 3);
    let raw = json("omega --m 1.2").report;
    assert_eq!(raw["members"].as_array().unwrap().len(), 4);
}

#[test]
fn tables_csv_and_json() {
    let out = cli("tables --format csv");
    assert_eq!(out.code, EXIT_OK);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "family,s,theta_s,delta_s,l_s,u_s,reference_u_s");
    assert_eq!(lines.len(), 18);
    let t: TaylorTables = report("tables");
    assert!(t
        .f_rows
        .iter()
        .chain(&t.g_rows)
        .all(|r| r.within_reference()));
}

#[test]
fn realsup_and_precision_exhaustion() {
    let r: RealSupResult = report("realsup --p 1 --q 3 --width 1e-10");
    assert_eq!(r.value.closed_form(), Some(&ClosedForm::EightOver3Sqrt3));
    let out = cli("realsup --p 1 --q 3 --width 1e-30 --precision-bits 64 --precision-cap 64");
    assert_eq!(out.code, EXIT_PRECISION);
    assert!(out.stderr.contains("|cos(1x) - cos(3x)|"), "{}", out.stderr);
}

#[test]
fn lemma38_passes() {
    let t: TripleReport = report("lemma38");
    assert_eq!(t.rows.len(), 60);
    assert!(t.all_pass());
}

#[test]
fn simulator_commands() {
    let s: SimulationReport = report("simulate --angles 2/5,4/5 --target 2/5 --dim 3 --seed 9");
    assert!(s.law_holds);
    assert_eq!(s.recovered_angles.len(), 2);
    let p: Prop25Report = report("prop25 --n 6");
    assert!(p.sup_is_three_halves && p.idempotents_recovered == 6);
    let h: HarnessReport = report("harness --trials 30 --seed 4");
    assert!(h.pass);
}

#[test]
fn output_is_deterministic() {
    let a = cli("harness --trials 20 --seed 11");
    let b = cli("harness --trials 20 --seed 11");
    assert_eq!(a, b);
}

#[test]
fn usage_errors() {
    let out = cli("frobnicate");
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("valid subcommands: k, sup, gamma"));
    assert_eq!(cli("k --angle 1/4 --precision-bits 16").code, EXIT_USAGE);
    assert_eq!(cli("k --angle 1/0").code, EXIT_USAGE);
    assert_eq!(cli("k --angle 1/4 --irrational").code, EXIT_USAGE);
    assert_eq!(cli("sup --a 1/1000 --b 1/999").code, EXIT_USAGE);
    assert_eq!(cli("omega --m 1.6").code, EXIT_USAGE);
}

#[test]
fn verify_ledger_passes() {
    let out = cli("verify --format text");
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    assert!(out.stdout.lines().all(|l| l.starts_with("PASS ")));
    let ledger: Ledger = report("verify");
    assert!(ledger.all_pass());
}

#[test]
fn binary_honours_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cosrigid"))
        .args(["k", "--angle", "2/5"])
        .env("COSRIGID_FORMAT", "text")
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("k(2/5 pi) in 1.118"), "{stdout}");
    let out = Command::new(env!("CARGO_BIN_EXE_cosrigid"))
        .arg("nope")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    let v: Value = serde_json::from_slice(
        &Command::new(env!("CARGO_BIN_EXE_cosrigid"))
            .args(["sup", "--a", "0", "--b", "2/3"])
            .output()
            .unwrap()
            .stdout,
    )
    .unwrap();
    assert_eq!(v["report"]["value"]["closed_form"], "three-halves");
}
