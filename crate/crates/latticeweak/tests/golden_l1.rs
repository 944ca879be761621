//! Single-site Hamiltonian pieces compared term by term against a
//! hand transcription written with bare sigma^+-, Z products.

use latticeweak::hamiltonians::{
    build_h_beta, build_h_glue, build_h_leptons, build_h_quarks, BetaForm, LatticeParams,
    LeptonBasis, TildeCoefficients,
};
use latticeweak::pauli::{jw_ladder, Ladder, OperatorSum, Pauli, PauliString};
use num_complex::Complex64;

const N: usize = 16;

/// Product of single-qubit factors written as `+q`, `-q` or `Zq`, left to right.
fn sig(spec: &str) -> OperatorSum {
    let mut op = OperatorSum::identity(N, 1.0);
    for tok in spec.split_whitespace() {
        let (kind, q) = tok.split_at(1);
        let q: usize = q.parse().unwrap();
        let f = match kind {
            "+" => jw_ladder(q, Ladder::Raise, N).unwrap(),
            "-" => jw_ladder(q, Ladder::Lower, N).unwrap(),
            "Z" => OperatorSum::term(N, PauliString::single(q, Pauli::Z), Complex64::new(1.0, 0.0)),
            _ => panic!("bad token {tok}"),
        };
        op = op.multiply(&f).unwrap();
    }
    op
}

fn sum(parts: &[(f64, &str)]) -> OperatorSum {
    let mut op = OperatorSum::zero(N);
    for (w, s) in parts {
        op = op.add(&sig(s).scale_real(*w)).unwrap();
    }
    op
}

fn z(q: usize) -> String {
    format!("Z{q}")
}

fn assert_same(a: &OperatorSum, b: &OperatorSum, tol: f64) {
    let d = a.sub(b).unwrap();
    let worst = d.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
    assert!(worst < tol, "operators differ by {worst}:\n{d}");
}

fn preset() -> (LatticeParams, latticeweak::QubitLayout) {
    let p = LatticeParams::benchmark_l1();
    let lay = p.layout().unwrap();
    (p, lay)
}

#[test]
fn quark_block_matches_transcription() {
    let (p, lay) = preset();
    let mut parts: Vec<(f64, String)> = Vec::new();
    for c in 0..3 {
        parts.push((p.m_u / 2.0, z(c)));
        parts.push((-p.m_u / 2.0, z(6 + c)));
        parts.push((p.m_d / 2.0, z(3 + c)));
        parts.push((-p.m_d / 2.0, z(9 + c)));
    }
    for q in 0..6 {
        let zs: String = (q + 1..q + 6).rev().map(|k| format!(" Z{k}")).collect();
        parts.push((-0.5, format!("+{}{} -{}", q + 6, zs, q)));
        parts.push((-0.5, format!("-{}{} +{}", q + 6, zs, q)));
    }
    let refs: Vec<(f64, &str)> = parts.iter().map(|(w, s)| (*w, s.as_str())).collect();
    let expected = sum(&refs).add(&OperatorSum::identity(N, 3.0 * (p.m_u + p.m_d))).unwrap();
    assert_same(&build_h_quarks(&p, &lay).unwrap(), &expected, 1e-12);
}

#[test]
fn quark_single_z_and_hop_coefficients() {
    let (p, lay) = preset();
    let h = build_h_quarks(&p, &lay).unwrap();
    assert!((h.coefficient(&PauliString::single(0, Pauli::Z)).re - 0.45).abs() < 1e-12);
    let hop = sig("+6 Z5 Z4 Z3 Z2 Z1 -0");
    for t in hop.iter() {
        let c = h.coefficient(&t.string);
        let partner = sig("-6 Z5 Z4 Z3 Z2 Z1 +0").coefficient(&t.string);
        assert!((c + 0.5 * (t.coeff + partner)).norm() < 1e-12);
    }
}

#[test]
fn tilde_leptons_match_transcription() {
    let mut p = LatticeParams::benchmark_l1();
    p.m_e = 0.75;
    p.m_nu = 0.3;
    let lay = p.layout().unwrap();
    let le = 0.25 * (1.0f64 + 4.0 * 0.75 * 0.75).sqrt();
    let ln = 0.25 * (1.0f64 + 4.0 * 0.3 * 0.3).sqrt();
    let expected = sum(&[(le, "Z13"), (-le, "Z15"), (ln, "Z12"), (-ln, "Z14")])
        .add(&OperatorSum::identity(N, p.m_e + p.m_nu))
        .unwrap();
    assert_same(&build_h_leptons(&p, &lay, LeptonBasis::Tilde).unwrap(), &expected, 1e-12);
}

fn glue_transcription(g: f64) -> OperatorSum {
    let w = g * g / 2.0;
    let mut op = sum(&[
        (1.0, ""),
        (-1.0 / 3.0, "Z1 Z0"),
        (-1.0 / 3.0, "Z2 Z0"),
        (-1.0 / 3.0, "Z2 Z1"),
        (1.0, "+4 -3 -1 +0"),
        (1.0, "-4 +3 +1 -0"),
        (1.0, "+5 Z4 -3 -2 Z1 +0"),
        (1.0, "-5 Z4 +3 +2 Z1 -0"),
        (1.0, "+5 -4 -2 +1"),
        (1.0, "-5 +4 +2 -1"),
        (2.0 / 12.0, "Z3 Z0"),
        (2.0 / 12.0, "Z4 Z1"),
        (2.0 / 12.0, "Z5 Z2"),
        (-1.0 / 12.0, "Z5 Z0"),
        (-1.0 / 12.0, "Z5 Z1"),
        (-1.0 / 12.0, "Z4 Z2"),
        (-1.0 / 12.0, "Z4 Z0"),
        (-1.0 / 12.0, "Z3 Z1"),
        (-1.0 / 12.0, "Z3 Z2"),
    ]);
    op = op.scale_real(w);
    op.normalize();
    op
}

#[test]
fn glue_matches_transcription_plus_down_self_energy() {
    let (p, lay) = preset();
    let h = build_h_glue(&p, &lay).unwrap();
    let down_self = sum(&[
        (1.0, ""),
        (-1.0 / 3.0, "Z4 Z3"),
        (-1.0 / 3.0, "Z5 Z3"),
        (-1.0 / 3.0, "Z5 Z4"),
    ])
    .scale_real(p.g * p.g / 2.0);
    let expected = glue_transcription(p.g).add(&down_self).unwrap();
    assert_same(&h, &expected, 1e-12);
    // Two flavours each contribute g^2/2 to the identity.
    assert!((h.identity_coefficient().re - 4.0).abs() < 1e-12);
    let six = sig("+5 Z4 -3 -2 Z1 +0");
    for t in six.iter() {
        let partner = sig("-5 Z4 +3 +2 Z1 -0").coefficient(&t.string);
        assert!((h.coefficient(&t.string) - 2.0 * (t.coeff + partner)).norm() < 1e-12);
    }
}

#[test]
fn glue_vanishes_without_coupling() {
    let mut p = LatticeParams::benchmark_l1();
    p.g = 0.0;
    let lay = p.layout().unwrap();
    assert!(build_h_glue(&p, &lay).unwrap().is_empty());
}

/// Charge-raising half of the tilde beta operator; the h.c. is added by the caller.
fn beta_transcription(p: &LatticeParams, valence_only: bool) -> OperatorSum {
    let tc = TildeCoefficients::new(p.m_e, p.m_nu);
    let a = tc.same_site();
    let b = tc.cross_site();
    let mut quark: Vec<(f64, String)> = Vec::new();
    for c in 0..3 {
        quark.push((a, format!("-{} Z{} Z{} +{}", 3 + c, 2 + c, 1 + c, c)));
        if valence_only {
            continue;
        }
        quark.push((a, format!("-{} Z{} Z{} +{}", 9 + c, 8 + c, 7 + c, 6 + c)));
        let zs: String = (c + 1..c + 9).rev().map(|k| format!(" Z{k}")).collect();
        quark.push((-b, format!("-{}{} +{}", 9 + c, zs, c)));
        quark.push((-b, format!("+{} Z{} Z{} -{}", 6 + c, 5 + c, 4 + c, 3 + c)));
    }
    let refs: Vec<(f64, &str)> = quark.iter().map(|(w, s)| (*w, s.as_str())).collect();
    let op = sig("-14 +13").multiply(&sum(&refs)).unwrap();
    op.plus_hc().scale_real(p.big_g / std::f64::consts::SQRT_2)
}

#[test]
fn tilde_beta_matches_transcription() {
    for (me, mn) in [(0.0, 0.0), (0.4, 0.7)] {
        let mut p = LatticeParams::benchmark_l1();
        p.m_e = me;
        p.m_nu = mn;
        let lay = p.layout().unwrap();
        let h = build_h_beta(&p, &lay, BetaForm::Tilde).unwrap();
        assert_same(&h, &beta_transcription(&p, false), 1e-12);
        let v = build_h_beta(&p, &lay, BetaForm::Valence).unwrap();
        assert_same(&v, &beta_transcription(&p, true), 1e-12);
    }
}

#[test]
fn massless_brackets_are_unity() {
    let tc = TildeCoefficients::new(0.0, 0.0);
    assert!((tc.same_site() - 1.0).abs() < 1e-14);
    assert!((tc.cross_site() - 1.0).abs() < 1e-14);
    // Closed forms of both brackets at non-zero masses.
    let (me, mn) = (0.4f64, 0.7f64);
    let tc = TildeCoefficients::new(me, mn);
    let den = ((1.0 - 4.0 * me * tc.c_e) * (1.0 + 4.0 * mn * tc.c_nu)).sqrt();
    assert!((tc.same_site() - (tc.c_e + tc.c_nu) / den).abs() < 1e-12);
    assert!((tc.cross_site() - (1.0 + 4.0 * tc.c_e * tc.c_nu) / (2.0 * den)).abs() < 1e-12);
}

#[test]
fn nine_qubit_cross_term_present() {
    let (p, lay) = preset();
    let h = build_h_beta(&p, &lay, BetaForm::Tilde).unwrap();
    let s = PauliString::parse("IXXIIIXZZZZZZZZX").unwrap();
    assert!(h.coefficient(&s).norm() > 1e-3);
}
