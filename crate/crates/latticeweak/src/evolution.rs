//! Statevectors, exact real-time evolution and the decay observables.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::{
    build_full, down_number, up_number, BetaForm, FullOptions, LatticeParams, LeptonBasis,
};
use crate::layout::{QubitLayout, Species};
use crate::pauli::{OperatorSum, PauliString};
use crate::spectra::{
    build_sector, dense_eigen, sector_operator, Charge, DiagOptions, Eigen, SectorOperator,
    SectorSpec, DEFAULT_SECTOR_CAP,
};

/// Largest register stored as a full amplitude vector.
pub const MAX_FULL_QUBITS: usize = 28;
/// Krylov subspace size per step.
const KRYLOV_DIM: usize = 30;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Amplitudes over the full register or over a sector of it.
#[derive(Clone, Debug)]
pub struct Statevector {
    nqubits: usize,
    sector: Option<Arc<SectorSpec>>,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|b>` on a full register.
    pub fn basis_state(nqubits: usize, b: u128) -> Result<Self> {
        if nqubits > MAX_FULL_QUBITS {
            return Err(Error::TooManyQubits(nqubits));
        }
        if b >> nqubits != 0 {
            return Err(Error::Domain(format!("basis state {b:#b} wider than {nqubits} qubits")));
        }
        let mut amps = vec![ZERO; 1usize << nqubits];
        amps[b as usize] = Complex64::new(1.0, 0.0);
        Ok(Statevector {
            nqubits,
            sector: None,
            amps,
        })
    }

    pub fn from_amplitudes(nqubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if nqubits > MAX_FULL_QUBITS || amps.len() != 1usize << nqubits {
            return Err(Error::Domain(format!(
                "{} amplitudes for {nqubits} qubits",
                amps.len()
            )));
        }
        Ok(Statevector {
            nqubits,
            sector: None,
            amps,
        })
    }

    pub fn in_sector(sector: Arc<SectorSpec>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != sector.dim() {
            return Err(Error::Sector(format!(
                "{} amplitudes for a sector of dimension {}",
                amps.len(),
                sector.dim()
            )));
        }
        Ok(Statevector {
            nqubits: sector.nqubits(),
            sector: Some(sector),
            amps,
        })
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn sector(&self) -> Option<&Arc<SectorSpec>> {
        self.sector.as_ref()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// Basis state stored at position `i`.
    pub fn bits(&self, i: usize) -> u128 {
        match &self.sector {
            Some(s) => s.basis()[i],
            None => i as u128,
        }
    }

    fn position(&self, b: u128) -> Option<usize> {
        match &self.sector {
            Some(s) => s.position(b),
            None => ((b >> self.nqubits) == 0).then_some(b as usize),
        }
    }

    pub fn amplitude(&self, b: u128) -> Complex64 {
        self.position(b).map_or(ZERO, |i| self.amps[i])
    }

    /// `(basis state, amplitude)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (u128, Complex64)> + '_ {
        self.amps.iter().enumerate().map(|(i, a)| (self.bits(i), *a))
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`, matching amplitudes by basis state.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.iter()
            .filter(|(_, a)| *a != ZERO)
            .map(|(b, a)| a.conj() * other.amplitude(b))
            .sum()
    }

    pub fn fidelity(&self, other: &Statevector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Copy on the full register.
    pub fn to_full(&self) -> Result<Statevector> {
        let mut out = Statevector::basis_state(self.nqubits, 0)?;
        out.amps[0] = ZERO;
        for (b, a) in self.iter() {
            out.amps[b as usize] = a;
        }
        Ok(out)
    }

    /// Copy restricted to `sector`; fails if weight would be lost.
    pub fn restrict(&self, sector: Arc<SectorSpec>) -> Result<Statevector> {
        let mut amps = vec![ZERO; sector.dim()];
        let mut lost = 0.0;
        for (b, a) in self.iter() {
            match sector.position(b) {
                Some(i) => amps[i] = a,
                None => lost += a.norm_sqr(),
            }
        }
        if lost > 1e-20 {
            return Err(Error::Sector(format!("state has weight {lost:e} outside the sector")));
        }
        Statevector::in_sector(sector, amps)
    }

    /// `<psi|op|psi>` (real part; `op` is taken hermitian).
    pub fn expectation(&self, op: &OperatorSum) -> f64 {
        let mut total = ZERO;
        for (b, a) in self.iter().filter(|(_, a)| *a != ZERO) {
            for t in op.iter() {
                let (b2, ph) = t.string.apply(b);
                let a2 = self.amplitude(b2);
                if a2 != ZERO {
                    total += a2.conj() * t.coeff * ph * a;
                }
            }
        }
        total.re
    }

    /// Probability that qubit `q` reads `bit`.
    pub fn probability_bit(&self, q: usize, bit: u8) -> f64 {
        self.iter()
            .filter(|(b, _)| ((b >> q) & 1) as u8 == bit)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// `|b|^2` for every stored basis state.
    pub fn probabilities(&self) -> Vec<(u128, f64)> {
        self.iter().map(|(b, a)| (b, a.norm_sqr())).collect()
    }

    /// Applies `exp(-i theta P)` in place.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        let (c, s) = (theta.cos(), theta.sin());
        let minus_i_s = Complex64::new(0.0, -s);
        if p.x_mask() == 0 {
            for i in 0..self.amps.len() {
                let (_, ph) = p.apply(self.bits(i));
                self.amps[i] *= Complex64::new(c, 0.0) + minus_i_s * ph;
            }
            return Ok(());
        }
        let mut next: Vec<Complex64> = self.amps.iter().map(|a| a * c).collect();
        for (i, a) in self.amps.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let (b2, ph) = p.apply(self.bits(i));
            let j = self.position(b2).ok_or_else(|| {
                Error::Sector(format!("rotation {} leaves the sector", p.label(self.nqubits)))
            })?;
            next[j] += minus_i_s * ph * a;
        }
        self.amps = next;
        Ok(())
    }

    /// Applies `exp(-i t op)` for a sum of mutually commuting Pauli terms.
    pub fn apply_commuting_exponential(&mut self, op: &OperatorSum, t: f64) -> Result<()> {
        for term in op.iter() {
            if term.string.is_identity() {
                continue;
            }
            self.apply_pauli_rotation(&term.string, t * term.coeff.re)?;
        }
        Ok(())
    }
}

/// Smallest set of basis states containing `seeds` and closed under flipping
/// by any of `masks`.
pub fn xor_closure(nqubits: usize, masks: &[u128], seeds: &[u128]) -> SectorSpec {
    let mut seen: std::collections::HashSet<u128> = seeds.iter().copied().collect();
    let mut stack: Vec<u128> = seeds.to_vec();
    while let Some(b) = stack.pop() {
        for m in masks {
            let b2 = b ^ m;
            if seen.insert(b2) {
                stack.push(b2);
            }
        }
    }
    SectorSpec::from_states(nqubits, seen.into_iter().collect())
}

/// Support of a state: basis states with non-negligible amplitude.
pub fn support(state: &Statevector, tol: f64) -> Vec<u128> {
    state
        .iter()
        .filter(|(_, a)| a.norm() > tol)
        .map(|(b, _)| b)
        .collect()
}

/// Lowest eigenstate of the strong Hamiltonian with three `d` quarks, no
/// net `u` quarks and the lepton tilde vacuum.
///
/// Returns the state in its strong sector together with its energy above
/// the vacuum of the same Hamiltonian.
pub fn prepare_delta_minus(p: &LatticeParams) -> Result<(Statevector, f64)> {
    if p.sites != 1 {
        return Err(Error::Form("the Δ⁻ preparation is built for L = 1".into()));
    }
    let strong = p.strong_only();
    let lay = strong.layout()?;
    let h = build_full(&strong, &lay, FullOptions::strong(LeptonBasis::Tilde))?;
    let (psi, e) = lowest_state(&h, &lay, 0, 3)?;
    let (_, e_vac) = lowest_state(&h, &lay, 0, 0)?;
    Ok((psi, e - e_vac))
}

fn lowest_state(
    h: &OperatorSum,
    lay: &QubitLayout,
    nu: i32,
    nd: i32,
) -> Result<(Statevector, f64)> {
    let n = lay.nqubits();
    let mut charges = vec![
        Charge::new("N_u", up_number(lay)?, nu as f64),
        Charge::new("N_d", down_number(lay)?, nd as f64),
    ];
    for sp in [Species::Nu, Species::E, Species::NuBar, Species::EBar] {
        let vac = u8::from(!sp.is_antiparticle());
        charges.push(Charge::pin(lay.index(0, sp, 0)?, n, vac));
    }
    let sector = Arc::new(build_sector(h, charges)?);
    let eig = crate::spectra::diagonalize(h, &sector, DiagOptions::default())?;
    let mut v = eig.vector(0);
    // Fix the global phase: dominant amplitude real and positive.
    let k = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let ph = v[k].conj() / v[k].norm();
    v.iter_mut().for_each(|a| *a *= ph);
    Ok((Statevector::in_sector(sector, v)?, eig.values[0]))
}

/// How exact evolution is carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactMethod {
    /// Full eigendecomposition of the sector operator.
    Eigen,
    /// Adaptive short-iterative Lanczos steps.
    Krylov,
}

/// Exact propagator on one sector.
pub struct ExactEvolver {
    sector: Arc<SectorSpec>,
    op: SectorOperator,
    eig: Option<Eigen>,
}

impl ExactEvolver {
    /// Sector spanned by the closure of `seeds` under `h`.
    pub fn new(h: &OperatorSum, seeds: &[u128], method: ExactMethod) -> Result<Self> {
        let sector = Arc::new(SectorSpec::closure(h, seeds)?);
        ExactEvolver::on_sector(h, sector, method)
    }

    pub fn on_sector(h: &OperatorSum, sector: Arc<SectorSpec>, method: ExactMethod) -> Result<Self> {
        let op = sector_operator(h, &sector)?;
        let eig = match method {
            ExactMethod::Eigen if op.dim() <= DEFAULT_SECTOR_CAP => Some(dense_eigen(&op)),
            ExactMethod::Eigen => {
                return Err(Error::DenseCap {
                    nqubits: op.dim(),
                    cap: DEFAULT_SECTOR_CAP,
                })
            }
            ExactMethod::Krylov => None,
        };
        Ok(ExactEvolver { sector, op, eig })
    }

    pub fn sector(&self) -> &Arc<SectorSpec> {
        &self.sector
    }

    pub fn operator(&self) -> &SectorOperator {
        &self.op
    }

    /// `exp(-i H t)|psi>`.
    pub fn evolve(&self, psi: &Statevector, t: f64) -> Result<Statevector> {
        let psi = psi.restrict(self.sector.clone())?;
        if t == 0.0 {
            return Ok(psi);
        }
        let out = match &self.eig {
            Some(eig) => {
                let v = &eig.vectors;
                let x = DMatrix::from_column_slice(psi.amps.len(), 1, &psi.amps);
                let mut c = v.adjoint() * x;
                for (k, e) in eig.values.iter().enumerate() {
                    c[k] *= Complex64::new(0.0, -e * t).exp();
                }
                (v * c).column(0).iter().copied().collect()
            }
            None => krylov_evolve(&self.op, &psi.amps, t, 1e-10)?,
        };
        Statevector::in_sector(self.sector.clone(), out)
    }

    /// Sector eigenvalues, if the dense decomposition was formed.
    pub fn eigenvalues(&self) -> Option<&[f64]> {
        self.eig.as_ref().map(|e| e.values.as_slice())
    }
}

/// `exp(-i H t)|psi>` with `H` restricted to the closure of the state's support.
pub fn evolve_exact(
    state: &Statevector,
    h: &OperatorSum,
    t: f64,
    method: ExactMethod,
) -> Result<Statevector> {
    let ev = ExactEvolver::new(h, &support(state, 0.0), method)?;
    ev.evolve(state, t)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(-i A t) x` by short Lanczos steps, each with estimated error below `tol`.
pub fn krylov_evolve(op: &SectorOperator, x: &[Complex64], t: f64, tol: f64) -> Result<Vec<Complex64>> {
    let n = op.dim();
    let mut psi = x.to_vec();
    let mut done = 0.0;
    let mut dt = t;
    let total = t;
    if total == 0.0 {
        return Ok(psi);
    }
    while (total - done).abs() > 1e-15 * total.abs().max(1.0) {
        let step = if (dt.abs() > (total - done).abs()) || dt.signum() != total.signum() {
            total - done
        } else {
            dt
        };
        let nrm = vnorm(&psi);
        let m = KRYLOV_DIM.min(n);
        let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|a| a / nrm).collect()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut breakdown = false;
        for j in 0..m {
            let mut w = op.apply(&basis[j]);
            alpha.push(dot(&basis[j], &w).re);
            for _ in 0..2 {
                for u in &basis {
                    let c = dot(u, &w);
                    w.iter_mut().zip(u).for_each(|(wi, ui)| *wi -= c * ui);
                }
            }
            let b = vnorm(&w);
            beta.push(b);
            if b < 1e-13 {
                breakdown = true;
                break;
            }
            if j + 1 < m {
                basis.push(w.iter().map(|a| a / b).collect());
            }
        }
        let k = alpha.len();
        let tri = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let e = SymmetricEigen::new(tri);
        // y = exp(-i T step) e_1
        let y: Vec<Complex64> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|l| {
                        e.eigenvectors[(i, l)]
                            * e.eigenvectors[(0, l)]
                            * Complex64::new(0.0, -e.eigenvalues[l] * step).exp()
                    })
                    .sum()
            })
            .collect();
        let err = if breakdown { 0.0 } else { beta[k - 1] * y[k - 1].norm() * nrm };
        if err > tol && step.abs() > 1e-12 {
            dt = step * 0.5;
            continue;
        }
        let mut next = vec![ZERO; n];
        for (yi, bi) in y.iter().zip(&basis) {
            next.iter_mut().zip(bi).for_each(|(o, b)| *o += yi * b * nrm);
        }
        psi = next;
        done += step;
        if err < tol * 1e-3 {
            dt = step * 1.5;
        }
    }
    if psi.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::Convergence {
            what: "Krylov propagation".into(),
            residual: f64::NAN,
        });
    }
    Ok(psi)
}

/// Probability that a beta decay has happened: occupation of the tilde
/// electron mode, checked against the antineutrino mode.
pub fn decay_probability(state: &Statevector, layout: &QubitLayout) -> Result<f64> {
    if layout.sites() != 1 {
        return Err(Error::Form("decay probability is defined in the tilde basis (L = 1)".into()));
    }
    let e = layout.index(0, Species::E, 0)?;
    let nubar = layout.index(0, Species::NuBar, 0)?;
    let pe = state.probability_bit(e, Species::E.occupied_bit());
    let pn = state.probability_bit(nubar, Species::NuBar.occupied_bit());
    if (pe - pn).abs() > 1e-10 {
        return Err(Error::Domain(format!(
            "electron ({pe}) and antineutrino ({pn}) occupations differ"
        )));
    }
    Ok(pe)
}

/// Reduced density matrix on `qubits` (first listed qubit is the lowest bit).
pub fn reduced_density_matrix(state: &Statevector, qubits: &[usize]) -> Result<DMatrix<Complex64>> {
    let n = state.nqubits();
    if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange { qubit: q, nqubits: n });
    }
    if qubits.len() > 12 {
        return Err(Error::DenseCap {
            nqubits: qubits.len(),
            cap: 12,
        });
    }
    let mask: u128 = qubits.iter().fold(0, |m, &q| m | 1u128 << q);
    let local = |b: u128| -> usize {
        qubits
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &q)| acc | (((b >> q) & 1) as usize) << k)
    };
    let mut groups: HashMap<u128, Vec<(usize, Complex64)>> = HashMap::new();
    for (b, a) in state.iter().filter(|(_, a)| *a != ZERO) {
        groups.entry(b & !mask).or_default().push((local(b), a));
    }
    let d = 1usize << qubits.len();
    let mut rho = DMatrix::from_element(d, d, ZERO);
    for entries in groups.values() {
        for &(i, a) in entries {
            for &(j, b) in entries {
                rho[(i, j)] += a * b.conj();
            }
        }
    }
    Ok(rho)
}

/// `S_L = 1 - Tr[rho^2]` of the reduced state on `qubits`.
pub fn linear_entropy(state: &Statevector, qubits: &[usize]) -> Result<f64> {
    let rho = reduced_density_matrix(state, qubits)?;
    let purity: f64 = rho.iter().map(|x| x.norm_sqr()).sum();
    Ok(1.0 - purity)
}

/// Decay probability against time.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// `exact`, `trotter-N` or `sampled-shots`.
    pub method: String,
}

/// Uniform grid `0, dt, ..., tmax`.
pub fn time_grid(tmax: f64, dt: f64) -> Vec<f64> {
    let n = (tmax / dt + 1e-9).floor() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}

/// The single-site decay problem: Hamiltonian, initial Δ⁻ and layout.
pub struct DecaySystem {
    pub params: LatticeParams,
    pub layout: QubitLayout,
    pub hamiltonian: OperatorSum,
    pub initial: Statevector,
    /// Δ⁻ energy above the vacuum of the strong Hamiltonian.
    pub gap: f64,
}

impl DecaySystem {
    /// `beta` must be a tilde-basis form: `Valence`, `Tilde` or `TildeExact`.
    pub fn new(p: &LatticeParams, beta: BetaForm) -> Result<Self> {
        if beta.lepton_basis() != LeptonBasis::Tilde {
            return Err(Error::Form("decay dynamics use tilde-basis leptons".into()));
        }
        let layout = p.layout()?;
        let hamiltonian = build_full(p, &layout, FullOptions::with_beta(beta))?;
        let (initial, gap) = prepare_delta_minus(p)?;
        Ok(DecaySystem {
            params: p.clone(),
            layout,
            hamiltonian,
            initial,
            gap,
        })
    }

    pub fn exact_evolver(&self, method: ExactMethod) -> Result<ExactEvolver> {
        ExactEvolver::new(&self.hamiltonian, &support(&self.initial, 0.0), method)
    }

    /// Exact decay probability on `times`.
    pub fn exact_curve(&self, times: &[f64]) -> Result<DecayCurve> {
        let ev = self.exact_evolver(ExactMethod::Eigen)?;
        let probabilities = times
            .par_iter()
            .map(|&t| decay_probability(&ev.evolve(&self.initial, t)?, &self.layout))
            .collect::<Result<Vec<_>>>()?;
        Ok(DecayCurve {
            times: times.to_vec(),
            probabilities,
            method: "exact".into(),
        })
    }

    /// Linear entropy of the six quark qubits on `times`.
    pub fn entropy_curve(&self, times: &[f64]) -> Result<Vec<f64>> {
        let ev = self.exact_evolver(ExactMethod::Eigen)?;
        let quarks = self.layout.particle_quark_qubits();
        times
            .par_iter()
            .map(|&t| linear_entropy(&ev.evolve(&self.initial, t)?, &quarks))
            .collect()
    }
}

/// Frequency of the largest spectral peak of a uniformly sampled signal
/// (mean removed, Hann window, zero-padded DFT).
pub fn dominant_frequency(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() < 4 || times.len() != values.len() {
        return Err(Error::Domain("need at least four samples".into()));
    }
    let dt = times[1] - times[0];
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let w: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let hann = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos();
            (v - mean) * hann
        })
        .collect();
    let fmax = 0.5 / dt;
    let nf = 8192;
    let mut best = (0.0, 0.0);
    for j in 1..nf {
        let f = fmax * j as f64 / nf as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (k, x) in w.iter().enumerate() {
            let ph = 2.0 * std::f64::consts::PI * f * k as f64 * dt;
            re += x * ph.cos();
            im -= x * ph.sin();
        }
        let p = re * re + im * im;
        if p > best.1 {
            best = (f, p);
        }
    }
    Ok(best.0)
}
