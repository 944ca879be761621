//! End-to-end runs of the `latticeweak` binary: artifact contents, headers,
//! determinism and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use latticeweak::evolution::{time_grid, DecaySystem};
use latticeweak::trotter::{benchmark_plan, trotter_curve};
use latticeweak::{BetaForm, LatticeParams, OperatorSum};

const BIN: &str = env!("CARGO_BIN_EXE_latticeweak");

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("LATTICEWEAK_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args, &[]);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn header_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
}

/// Data rows of a commented CSV artifact, header row dropped.
fn csv_body(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn spectrum_reproduces_the_single_site_levels() {
    let text = ok(&["spectrum", "--preset", "paper-l1", "--baryons"]);
    let want = [
        ("Δ⁺⁺", 2.868, 1),
        ("Δ⁺⁺ + 2l", 3.868, 4),
        ("Δ⁺", 4.048, 1),
        ("Δ⁺⁺ + 4l", 4.868, 1),
        ("Δ⁺ + 2l", 5.048, 4),
        ("Δ⁰", 5.229, 1),
        ("Δ⁺ + 4l", 6.048, 1),
        ("Δ⁰ + 2l", 6.229, 4),
        ("Δ⁻", 6.409, 1),
    ];
    let rows = csv_body(&text);
    assert_eq!(rows.len(), want.len());
    for (r, (label, gap, mult)) in rows.iter().zip(want) {
        assert_eq!(r[0], label);
        assert!((r[1].parse::<f64>().unwrap() - gap).abs() < 1e-3, "{r:?}");
        assert_eq!(r[2].parse::<usize>().unwrap(), mult);
    }
}

#[test]
fn every_artifact_carries_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let circ = dir.path().join("ghz.txt");
    let c = circ.to_str().unwrap();
    ok(&["circuit", "--kind", "ghz", "--out", c]);
    let outputs = [
        ok(&["resources"]),
        ok(&["ham", "--piece", "quarks"]),
        ok(&["circuit", "--kind", "prep"]),
        ok(&["evolve", "--tmax", "0.5", "--dt", "0.1"]),
        ok(&["ensemble", "--yf", "5", "--samples", "4", "--tmax", "1", "--dt", "0.5"]),
        std::fs::read_to_string(&circ).unwrap(),
    ];
    for text in &outputs {
        assert_eq!(text.lines().next().unwrap(), concat!("# latticeweak ", env!("CARGO_PKG_VERSION")));
        let hash = header_value(text, "config-sha256").unwrap();
        assert_eq!(hash.len(), 64);
        assert!(header_value(text, "seed").is_some());
    }
    assert_eq!(header_value(&outputs[4], "seed"), Some("1"));
    for args in [vec!["sample", "--circuit", c, "--shots", "50", "--seed", "9"], vec!["widths"]] {
        let v: serde_json::Value = serde_json::from_str(&ok(&args)).unwrap();
        assert_eq!(v["meta"]["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(v["meta"]["config_sha256"].as_str().unwrap().len(), 64);
    }
    let v: serde_json::Value = serde_json::from_str(&ok(&["sample", "--circuit", c, "--shots", "5", "--seed", "9"])).unwrap();
    assert_eq!(v["meta"]["seed"], 9);
}

#[test]
fn config_hash_tracks_inputs() {
    let a = ok(&["resources", "--sites", "2,3"]);
    let b = ok(&["resources", "--sites", "2,4"]);
    assert_ne!(header_value(&a, "config-sha256"), header_value(&b, "config-sha256"));
    assert_eq!(a, ok(&["resources", "--sites", "2,3"]));
}

#[test]
fn malformed_config_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spectrum.csv");
    let cases = [
        ("truncated.json", "{\"L\": 1,\n \"m_u\": 0.9,\n"),
        ("unknown.json", "{\"L\": 1, \"m_u\": 0.9, \"m_d\": 2.1, \"m_e\": 0, \"m_nu\": 0,\n \"g\": 2, \"G\": 0.5, \"bogus\": 1}"),
        ("wrongtype.json", "{\"L\": \"one\"}"),
    ];
    for (name, body) in cases {
        let cfg = write(dir.path(), name, body);
        let r = run(&["spectrum", "--params", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
        assert_eq!(r.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&r.stderr);
        assert!(err.contains("line"), "{name}: {err}");
        assert!(!out.exists(), "{name} left an artifact");
    }
    let ens = write(dir.path(), "ens.json", "{\"n_initial\": 3, \"samples\": }");
    let r = run(&["ensemble", "--config", ens.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());
    // No temporary leftovers either.
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 4);
}

#[test]
fn usage_and_numerical_errors_use_distinct_codes() {
    assert_eq!(run(&["resources"], &[("LATTICEWEAK_THREADS", "zero")]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--nonsense"], &[]).status.code(), Some(2));
    assert_eq!(run(&["evolve", "--method", "trotter", "--entropy"], &[]).status.code(), Some(2));
    let r = run(&["widths", "--q=-1"], &[]);
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("argument outside domain: energy release Q = -1 must be positive"), "{err}");
    let r = run(&["resources", "--sites", "0"], &[]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("invalid parameters: at least one site"));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_caps() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["ensemble", "--yf", "8,12", "--samples", "16", "--seed", "3", "--tmax", "4", "--dt", "0.25"];
    let a = ok(&args);
    let b = run(&args, &[("LATTICEWEAK_THREADS", "1")]);
    let c = run(&args, &[("LATTICEWEAK_THREADS", "3")]);
    assert_eq!(a.as_bytes(), b.stdout.as_slice());
    assert_eq!(a.as_bytes(), c.stdout.as_slice());
    let other = ok(&["ensemble", "--yf", "8,12", "--samples", "16", "--seed", "4", "--tmax", "4", "--dt", "0.25"]);
    assert_ne!(csv_body(&a), csv_body(&other));

    let f1 = dir.path().join("a.csv");
    let f2 = dir.path().join("b.csv");
    for f in [&f1, &f2] {
        ok(&["evolve", "--method", "trotter", "--steps", "2", "--tmax", "2", "--out", f.to_str().unwrap()]);
    }
    assert_eq!(std::fs::read(&f1).unwrap(), std::fs::read(&f2).unwrap());
}

#[test]
fn evolve_twenty_steps_matches_the_library_curve() {
    let text = ok(&["evolve", "--method", "trotter", "--steps", "20", "--tmax", "4", "--dt", "0.05"]);
    assert_eq!(header_value(&text, "method"), Some("trotter-20"));
    let rows = csv_body(&text);
    let p = LatticeParams::benchmark_l1();
    let times = time_grid(4.0, 0.05);
    let sys = DecaySystem::new(&p, BetaForm::Valence).unwrap();
    let plan = benchmark_plan(&p, BetaForm::Valence).unwrap();
    let lib = trotter_curve(&sys, &plan, &times, 20, true).unwrap();
    let exact = sys.exact_curve(&times).unwrap();
    assert_eq!(rows.len(), times.len());
    let mut worst = 0.0f64;
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[0].parse::<f64>().unwrap(), times[k]);
        let got: f64 = r[1].parse().unwrap();
        assert_eq!(got, lib.probabilities[k]);
        worst = worst.max((got - exact.probabilities[k]).abs());
    }
    // Twenty steps track the exact curve far better than one.
    let one = csv_body(&ok(&["evolve", "--method", "trotter", "--steps", "1", "--tmax", "4", "--dt", "0.05"]));
    let worst_one = one
        .iter()
        .zip(&exact.probabilities)
        .map(|(r, e)| (r[1].parse::<f64>().unwrap() - e).abs())
        .fold(0.0, f64::max);
    assert!(worst < worst_one / 5.0, "{worst} vs {worst_one}");
}

#[test]
fn exact_evolution_with_entropy() {
    let rows = csv_body(&ok(&["evolve", "--tmax", "2", "--dt", "0.5", "--entropy"]));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
    for r in &rows {
        let s: f64 = r[2].parse().unwrap();
        assert!((0.0..1.0).contains(&s));
    }
    let krylov = csv_body(&ok(&["evolve", "--tmax", "2", "--dt", "0.5", "--solver", "krylov"]));
    for (a, b) in rows.iter().zip(&krylov) {
        let d = a[1].parse::<f64>().unwrap() - b[1].parse::<f64>().unwrap();
        assert!(d.abs() < 1e-8);
    }
}

#[test]
fn resources_table() {
    let rows = csv_body(&ok(&["resources"]));
    let cnots: Vec<&str> = rows.iter().map(|r| r[6].as_str()).collect();
    assert_eq!(cnots, ["9874", "38074", "926074", "3692074"]);
    let multi: Vec<&str> = rows.iter().map(|r| r[7].as_str()).collect();
    assert_eq!(multi, ["2082", "8942", "236622", "953222"]);
}

#[test]
fn widths_report() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["widths"])).unwrap();
    let q = v["lattice"]["q"].as_f64().unwrap();
    assert!((q - (6.409137 - 5.228917)).abs() < 1e-5);
    let width = v["lattice"]["width"].as_f64().unwrap();
    assert!((width - 3.0 * 0.25 * q / (2.0 * std::f64::consts::PI)).abs() < 1e-14);
    let tau = v["neutron"]["lifetime_s"].as_f64().unwrap();
    assert!((850.0..1000.0).contains(&tau), "{tau}");
    let dir = tempfile::tempdir().unwrap();
    let n = write(dir.path(), "n.json", "{\"g_f\": 1.1663787e-5, \"v_ud\": 0.97373, \"m_n\": 0.9, \"m_p\": 0.95, \"m_e\": 0.0005, \"g_v\": 1, \"g_a\": 1.27}");
    let r = run(&["widths", "--neutron", n.to_str().unwrap()], &[]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("decay closed"));
}

#[test]
fn hamiltonian_dump_round_trips() {
    let text = ok(&["ham", "--piece", "full", "--form", "valence"]);
    let op = OperatorSum::from_dump(&text).unwrap();
    let p = LatticeParams::benchmark_l1();
    let lay = p.layout().unwrap();
    let want = latticeweak::build_full(&p, &lay, latticeweak::FullOptions::valence()).unwrap();
    assert!(op.sub(&want).unwrap().is_empty());
    assert_eq!(header_value(&text, "terms").unwrap().parse::<usize>().unwrap(), want.len());
}

#[test]
fn circuit_then_sample_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let trotter = ok(&["circuit", "--kind", "trotter", "--t", "1", "--steps", "1"]);
    assert!(trotter.contains("cnot=50 "), "{}", trotter.lines().take(9).collect::<Vec<_>>().join("\n"));
    let two = ok(&["circuit", "--kind", "trotter", "--t", "1", "--steps", "2"]);
    assert!(two.contains("cnot=214 "));
    let prep = ok(&["circuit", "--kind", "prep"]);
    assert!(prep.contains("cnot=9 "));

    let file = dir.path().join("decay.txt");
    ok(&["circuit", "--kind", "decay", "--t", "2", "--steps", "1", "--out", file.to_str().unwrap()]);
    let args = ["sample", "--circuit", file.to_str().unwrap(), "--shots", "20000", "--seed", "5", "--post-select", "BLA"];
    let text = ok(&args);
    assert_eq!(text, ok(&args));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["filters"], serde_json::json!(["B=1", "L=0", "ancilla16=0"]));
    // Noiseless execution keeps every shot in the physical sectors.
    assert_eq!(v["kept"], 20000);
    let p = v["decay"]["probability"].as_f64().unwrap();
    let err = v["decay"]["std_error"].as_f64().unwrap();
    let table = latticeweak::simulator::trotter_decay_table(&LatticeParams::benchmark_l1(), 1, &[2.0]).unwrap();
    assert!((p - table.probabilities[0]).abs() < 4.0 * err, "{p} +- {err} vs {}", table.probabilities[0]);

    let bad = write(dir.path(), "bad.txt", "QUBITS 2\nCNOT 0 0\n");
    let r = run(&["sample", "--circuit", bad.to_str().unwrap()], &[]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 2"));
}
