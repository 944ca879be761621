//! Circuit execution, shot sampling, post-selection and the preparation
//! circuit.

use latticeweak::circuits::{
    prep_energy, prep_fidelity, state_prep_circuit, state_prep_with, trotter_step_circuit, Circuit,
    CompileOptions, Gate, PrepAngles,
};
use latticeweak::evolution::{prepare_delta_minus, Statevector};
use latticeweak::hamiltonians::LatticeParams;
use latticeweak::simulator::{
    bit_estimate, decay_estimate, execute, post_select, run, sample, trotter_decay_table, PostSelect,
};
use latticeweak::trotter::{benchmark_layout, benchmark_plan};
use latticeweak::BetaForm;
use num_complex::Complex64;

fn plus_state() -> Statevector {
    let c = Circuit::from_gates(2, vec![Gate::H(0), Gate::Ry(1, 1.1)]).unwrap();
    execute(&c, None).unwrap()
}

#[test]
fn sampling_is_reproducible_and_sums_to_shots() {
    let s = plus_state();
    let a = sample(&s, 500, 7).unwrap();
    assert_eq!(a, sample(&s, 500, 7).unwrap());
    assert_ne!(a.counts, sample(&s, 500, 8).unwrap().counts);
    assert_eq!(a.counts.values().sum::<u64>(), 500);
    assert_eq!(a.kept, 500);
    assert!(sample(&s, 0, 7).is_err());
}

#[test]
fn binomial_error_halves_with_four_times_the_shots() {
    let s = plus_state();
    let (p1, e1) = bit_estimate(&sample(&s, 100, 3).unwrap(), 0, 1).unwrap();
    let (p4, e4) = bit_estimate(&sample(&s, 400, 3).unwrap(), 0, 1).unwrap();
    assert!((e1 - (p1 * (1.0 - p1) / 100.0).sqrt()).abs() < 1e-15);
    // Exactly half at equal estimated p; within sampling noise otherwise.
    let ratio = e4 / e1;
    assert!((ratio - 0.5).abs() < 0.05, "{ratio}");
    let scaled = (p4 * (1.0 - p4) / 400.0).sqrt() / (p4 * (1.0 - p4) / 100.0).sqrt();
    assert!((scaled - 0.5).abs() < 1e-15);
}

#[test]
fn sampled_estimates_converge_like_one_over_root_n() {
    // Ry(1.1) on qubit 1: P(1) = sin^2(0.55).
    let s = plus_state();
    let p = 0.55f64.sin().powi(2);
    for shots in [1_000u64, 16_000, 256_000] {
        let mut worst: f64 = 0.0;
        for seed in 0..8 {
            let (est, _) = bit_estimate(&sample(&s, shots, seed).unwrap(), 1, 1).unwrap();
            worst = worst.max((est - p).abs());
        }
        let sigma = (p * (1.0 - p) / shots as f64).sqrt();
        assert!(worst < 4.0 * sigma, "{shots} shots: {worst} vs sigma {sigma}");
    }
}

#[test]
fn prepared_baryon_passes_every_filter() {
    let p = LatticeParams::benchmark_l1();
    let (prep, _) = state_prep_circuit(&p).unwrap();
    let r = run(&prep, 400, 11).unwrap();
    let lay = benchmark_layout();
    let all = PostSelect { baryon: true, lepton: true, ancilla: None };
    let kept = post_select(&r, &lay, all).unwrap();
    assert_eq!(kept.kept, 400);
    assert_eq!(decay_estimate(&kept, &lay).unwrap().0, 0.0);
}

#[test]
fn post_selection_drops_flipped_strings_and_is_idempotent() {
    let lay = benchmark_layout();
    let (delta, _) = prepare_delta_minus(&LatticeParams::benchmark_l1()).unwrap();
    let mut r = sample(&delta.to_full().unwrap(), 300, 5).unwrap();
    // Inject one bit flip on each qubit into copies of a good string.
    let good = r.counts.keys().next().unwrap().clone();
    for q in 0..16 {
        let mut chars: Vec<char> = good.chars().collect();
        let k = 15 - q;
        chars[k] = if chars[k] == '0' { '1' } else { '0' };
        r.counts.insert(chars.into_iter().collect(), 1);
    }
    r.shots += 16;
    r.kept += 16;
    let filt = PostSelect { baryon: true, lepton: true, ancilla: None };
    let once = post_select(&r, &lay, filt).unwrap();
    assert_eq!(once.kept, 300);
    assert_eq!(once.filters, vec!["B=1".to_string(), "L=0".to_string()]);
    let twice = post_select(&once, &lay, filt).unwrap();
    assert_eq!(twice.counts, once.counts);
    assert_eq!(twice.kept, once.kept);
}

#[test]
fn ancilla_filter_removes_exactly_the_excited_ancilla() {
    let lay = benchmark_layout();
    let c = Circuit::from_gates(17, vec![Gate::H(16), Gate::H(0)]).unwrap();
    let r = run(&c, 1000, 2).unwrap();
    let excited: u64 = r.counts.iter().filter(|(s, _)| s.starts_with('1')).map(|(_, c)| c).sum();
    let kept = post_select(&r, &lay, PostSelect { ancilla: Some(16), ..Default::default() }).unwrap();
    assert_eq!(kept.kept, 1000 - excited);
    assert!(kept.counts.keys().all(|s| s.starts_with('0')));
    let none = Circuit::from_gates(17, vec![Gate::X(16)]).unwrap();
    let r = run(&none, 10, 2).unwrap();
    assert!(post_select(&r, &lay, PostSelect { ancilla: Some(16), ..Default::default() }).is_err());
}

#[test]
fn reset_is_limited_to_unexcited_qubits() {
    let ok = Circuit::from_gates(2, vec![Gate::X(0), Gate::Reset(1)]).unwrap();
    assert!(execute(&ok, None).is_ok());
    let bad = Circuit::from_gates(2, vec![Gate::H(1), Gate::Reset(1)]).unwrap();
    assert!(execute(&bad, None).is_err());
}

#[test]
fn preparation_circuit_shape_and_fidelity() {
    let p = LatticeParams::benchmark_l1();
    let (prep, angles) = state_prep_circuit(&p).unwrap();
    assert_eq!(prep.cnot_count(), 9);
    assert!(1.0 - prep_fidelity(&p, &prep).unwrap() < 1e-6);
    // The fit lowers the energy below the published angles and reaches the
    // exact sector ground energy.
    let e_fit = prep_energy(&p, &angles).unwrap();
    let e_pub = prep_energy(&p, &PrepAngles::published()).unwrap();
    assert!(e_fit <= e_pub + 1e-12);
    let published = state_prep_with(&PrepAngles::published()).unwrap();
    assert!(prep_fidelity(&p, &published).unwrap() > 0.999);
    assert!((angles.theta - 0.2256).abs() < 1e-3);
}

#[test]
fn one_step_table_and_zero_time() {
    let p = LatticeParams::benchmark_l1();
    let times = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5];
    let c = trotter_decay_table(&p, 1, &times).unwrap();
    assert_eq!(c.method, "circuit-1");
    let want = [0.0, 0.089, 0.315, 0.582, 0.801, 0.931];
    for (got, w) in c.probabilities.iter().zip(want) {
        assert!((got - w).abs() < 1e-3, "{got} vs {w}");
    }
    assert!(c.probabilities[0].abs() < 1e-12);
    assert!(trotter_decay_table(&p, 2, &[0.0]).unwrap().probabilities[0].abs() < 1e-12);
}

#[test]
fn circuit_agrees_with_the_term_product_on_the_prepared_state() {
    let p = LatticeParams::benchmark_l1();
    let plan = benchmark_plan(&p, BetaForm::Valence).unwrap();
    let (delta, _) = prepare_delta_minus(&p).unwrap();
    for steps in [1, 2] {
        let tc = trotter_step_circuit(&plan, 1.4, steps, CompileOptions::default()).unwrap();
        let out = execute(&tc.circuit, Some(&delta)).unwrap();
        let want = plan.evolve(&delta.to_full().unwrap(), 1.4, steps, true).unwrap();
        let overlap: Complex64 = want
            .amplitudes()
            .iter()
            .zip(out.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!(1.0 - overlap.norm_sqr() < 1e-9);
    }
}
