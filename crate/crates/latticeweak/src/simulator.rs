//! Noiseless statevector execution of circuits, shot sampling and
//! charge-based post-selection.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{state_prep_circuit, trotter_step_circuit, Circuit, CompileOptions, Gate};
use crate::error::{Error, Result};
use crate::evolution::{decay_probability, DecayCurve, Statevector};
use crate::hamiltonians::{baryon_number, lepton_number, BetaForm, LatticeParams};
use crate::layout::{QubitLayout, Species};
use crate::pauli::OperatorSum;
use crate::trotter::benchmark_plan;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Population above which a `RESET` target counts as not in `|0>`.
const RESET_TOL: f64 = 1e-12;

/// Applies one gate to a full amplitude vector in place.
pub fn apply_gate(amps: &mut [Complex64], gate: &Gate) -> Result<()> {
    let pairs = |q: usize| {
        let bit = 1usize << q;
        (0..amps.len()).filter(move |i| i & bit == 0).map(move |i| (i, i | bit))
    };
    match *gate {
        Gate::H(q) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for (i, j) in pairs(q) {
                let (a, b) = (amps[i], amps[j]);
                amps[i] = (a + b) * s;
                amps[j] = (a - b) * s;
            }
        }
        Gate::X(q) => {
            for (i, j) in pairs(q) {
                amps.swap(i, j);
            }
        }
        Gate::Ry(q, th) => {
            let (c, s) = ((th / 2.0).cos(), (th / 2.0).sin());
            for (i, j) in pairs(q) {
                let (a, b) = (amps[i], amps[j]);
                amps[i] = a * c - b * s;
                amps[j] = a * s + b * c;
            }
        }
        Gate::Rz(q, l) => {
            let lo = Complex64::from_polar(1.0, -l / 2.0);
            let hi = lo.conj();
            for (i, j) in pairs(q) {
                amps[i] *= lo;
                amps[j] *= hi;
            }
        }
        Gate::Cnot { control, target } => {
            let cb = 1usize << control;
            for (i, j) in pairs(target) {
                if i & cb != 0 {
                    amps.swap(i, j);
                }
            }
        }
        Gate::Reset(q) => {
            let pop: f64 = pairs(q).map(|(_, j)| amps[j].norm_sqr()).sum();
            if pop > RESET_TOL {
                return Err(Error::Circuit(format!(
                    "RESET on qubit {q} with |1> population {pop:e}; only the unentangled |0> case is supported"
                )));
            }
            for (_, j) in pairs(q) {
                amps[j] = ZERO;
            }
        }
    }
    Ok(())
}

/// Pads a full state with `|0>` on extra high qubits.
pub fn embed(state: &Statevector, nqubits: usize) -> Result<Statevector> {
    let full = state.to_full()?;
    if nqubits < full.nqubits() {
        return Err(Error::QubitMismatch {
            left: nqubits,
            right: full.nqubits(),
        });
    }
    let mut amps = vec![ZERO; 1usize << nqubits];
    amps[..full.amplitudes().len()].copy_from_slice(full.amplitudes());
    Statevector::from_amplitudes(nqubits, amps)
}

/// Final state of `circuit` acting on `initial` (default `|0...0>`), which
/// is padded with `|0>` when narrower than the circuit.
pub fn execute(circuit: &Circuit, initial: Option<&Statevector>) -> Result<Statevector> {
    let mut psi = match initial {
        Some(s) => embed(s, circuit.nqubits())?,
        None => Statevector::basis_state(circuit.nqubits(), 0)?,
    };
    let amps = psi.amplitudes_mut();
    for g in circuit.gates() {
        apply_gate(amps, g)?;
    }
    Ok(psi)
}

/// Filters applied to sampled bitstrings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostSelect {
    /// Keep baryon number one.
    pub baryon: bool,
    /// Keep lepton number zero.
    pub lepton: bool,
    /// Keep the ancilla at `|0>`.
    pub ancilla: Option<usize>,
}

/// Sampled measurement outcomes; bitstrings are written qubit 0 rightmost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotResult {
    pub nqubits: usize,
    pub shots: u64,
    pub seed: u64,
    /// Shots left after post-selection (equal to `shots` before any).
    pub kept: u64,
    /// Filters applied so far.
    pub filters: Vec<String>,
    pub counts: BTreeMap<String, u64>,
}

fn bitstring(b: u128, n: usize) -> String {
    (0..n).rev().map(|q| if (b >> q) & 1 == 1 { '1' } else { '0' }).collect()
}

fn parse_bits(s: &str) -> Result<u128> {
    u128::from_str_radix(s, 2).map_err(|_| Error::Parse(format!("bad bitstring '{s}'")))
}

/// Computational-basis samples of `state`, reproducible from `seed`.
pub fn sample(state: &Statevector, shots: u64, seed: u64) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::Params("at least one shot".into()));
    }
    let probs = state.probabilities();
    let dist = WeightedIndex::new(probs.iter().map(|(_, p)| *p))
        .map_err(|e| Error::Domain(format!("sampling weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits: BTreeMap<u128, u64> = BTreeMap::new();
    for _ in 0..shots {
        *hits.entry(probs[dist.sample(&mut rng)].0).or_insert(0) += 1;
    }
    let n = state.nqubits();
    Ok(ShotResult {
        nqubits: n,
        shots,
        seed,
        kept: shots,
        filters: Vec::new(),
        counts: hits.into_iter().map(|(b, c)| (bitstring(b, n), c)).collect(),
    })
}

/// Executes `circuit` on `|0...0>` and samples the result.
pub fn run(circuit: &Circuit, shots: u64, seed: u64) -> Result<ShotResult> {
    sample(&execute(circuit, None)?, shots, seed)
}

/// Keeps the outcomes passing every requested filter. An empty result is an
/// error.
pub fn post_select(result: &ShotResult, layout: &QubitLayout, filters: PostSelect) -> Result<ShotResult> {
    let b_op = baryon_number(layout)?;
    let l_op = lepton_number(layout)?;
    let value = |op: &OperatorSum, b: u128| op.diagonal_value(b);
    let mut out = result.clone();
    out.counts.clear();
    for (s, &c) in &result.counts {
        let b = parse_bits(s)?;
        let ok = (!filters.baryon || (value(&b_op, b) - 1.0).abs() < 1e-9)
            && (!filters.lepton || value(&l_op, b).abs() < 1e-9)
            && filters.ancilla.is_none_or(|a| (b >> a) & 1 == 0);
        if ok {
            out.counts.insert(s.clone(), c);
        }
    }
    out.kept = out.counts.values().sum();
    if filters.baryon {
        out.filters.push("B=1".into());
    }
    if filters.lepton {
        out.filters.push("L=0".into());
    }
    if let Some(a) = filters.ancilla {
        out.filters.push(format!("ancilla{a}=0"));
    }
    if out.kept == 0 {
        return Err(Error::Domain("post-selection kept no shots".into()));
    }
    Ok(out)
}

/// Fraction of kept shots whose qubit `q` reads `bit`, with its binomial
/// standard error `sqrt(p (1 - p) / N)`.
pub fn bit_estimate(result: &ShotResult, q: usize, bit: u8) -> Result<(f64, f64)> {
    if result.kept == 0 {
        return Err(Error::Domain("no kept shots".into()));
    }
    let mut hit = 0u64;
    for (s, &c) in &result.counts {
        if ((parse_bits(s)? >> q) & 1) as u8 == bit {
            hit += c;
        }
    }
    let n = result.kept as f64;
    let p = hit as f64 / n;
    Ok((p, (p * (1.0 - p) / n).sqrt()))
}

/// Sampled decay probability (electron occupied) with its binomial error.
pub fn decay_estimate(result: &ShotResult, layout: &QubitLayout) -> Result<(f64, f64)> {
    let e = layout.index(0, Species::E, 0)?;
    bit_estimate(result, e, Species::E.occupied_bit())
}

/// Full single-site circuit: preparation then `steps` Trotter steps at time `t`.
pub fn decay_circuit(p: &LatticeParams, t: f64, steps: usize, opts: CompileOptions) -> Result<Circuit> {
    let (prep, _) = state_prep_circuit(p)?;
    let plan = benchmark_plan(p, BetaForm::Valence)?;
    let tc = trotter_step_circuit(&plan, t, steps, opts)?;
    let mut c = Circuit::new(tc.circuit.nqubits());
    c.extend(prep.gates().iter().copied())?;
    c.extend(tc.circuit.gates().iter().copied())?;
    Ok(c)
}

/// Infinite-shot decay probabilities from executing the compiled circuits.
pub fn trotter_decay_table(p: &LatticeParams, steps: usize, times: &[f64]) -> Result<DecayCurve> {
    use rayon::prelude::*;
    let (prep, _) = state_prep_circuit(p)?;
    let prepared = execute(&prep, None)?;
    let plan = benchmark_plan(p, BetaForm::Valence)?;
    let layout = p.layout()?;
    let probabilities = times
        .par_iter()
        .map(|&t| {
            let tc = trotter_step_circuit(&plan, t, steps, CompileOptions::default())?;
            let psi = execute(&tc.circuit, Some(&prepared))?;
            if let Some(a) = tc.ancilla {
                let stray = psi.probability_bit(a, 1);
                if stray > 1e-10 {
                    return Err(Error::Circuit(format!("ancilla left excited with weight {stray:e}")));
                }
            }
            decay_probability(&psi, &layout)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayCurve {
        times: times.to_vec(),
        probabilities,
        method: format!("circuit-{steps}"),
    })
}
