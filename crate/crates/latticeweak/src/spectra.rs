//! Symmetry sectors, sparse sector Hamiltonians and exact diagonalization.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::{
    build_full, down_number, up_number, FullOptions, LatticeParams, LeptonBasis,
};
use crate::layout::Species;
use crate::pauli::{OperatorSum, Pauli, PauliString};

/// Default largest sector handled by dense diagonalization.
pub const DEFAULT_SECTOR_CAP: usize = 4096;
/// Largest register enumerated state by state.
pub const MAX_ENUMERATED_QUBITS: usize = 24;
/// Matrix elements below this magnitude are treated as zero.
const ELEMENT_TOL: f64 = 1e-13;
/// Required eigenpair residual `|Hv - Ev|`.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// A diagonal conserved charge and its target value.
#[derive(Clone, Debug)]
pub struct Charge {
    pub name: String,
    pub op: OperatorSum,
    pub value: f64,
}

impl Charge {
    pub fn new(name: impl Into<String>, op: OperatorSum, value: f64) -> Self {
        Charge {
            name: name.into(),
            op,
            value,
        }
    }

    /// `Z_q` pinned to `+1` (bit 0) or `-1` (bit 1).
    pub fn pin(q: usize, nqubits: usize, bit: u8) -> Self {
        let op = OperatorSum::term(
            nqubits,
            PauliString::single(q, Pauli::Z),
            Complex64::new(1.0, 0.0),
        );
        Charge::new(format!("Z{q}"), op, if bit == 0 { 1.0 } else { -1.0 })
    }
}

/// Computational basis states sharing fixed charge values.
#[derive(Clone, Debug)]
pub struct SectorSpec {
    nqubits: usize,
    charges: Vec<Charge>,
    basis: Vec<u128>,
    index: HashMap<u128, usize>,
}

impl SectorSpec {
    fn from_basis(nqubits: usize, charges: Vec<Charge>, mut basis: Vec<u128>) -> Self {
        basis.sort_unstable();
        basis.dedup();
        let index = basis.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        SectorSpec {
            nqubits,
            charges,
            basis,
            index,
        }
    }

    /// Sector given by an explicit list of basis states.
    pub fn from_states(nqubits: usize, states: Vec<u128>) -> Self {
        SectorSpec::from_basis(nqubits, Vec::new(), states)
    }

    /// All basis states of an `nqubits` register with the given charge values.
    pub fn enumerate(nqubits: usize, charges: Vec<Charge>) -> Result<Self> {
        if nqubits > MAX_ENUMERATED_QUBITS {
            return Err(Error::TooManyQubits(nqubits));
        }
        for c in &charges {
            if !c.op.is_diagonal() {
                return Err(Error::Sector(format!("charge {} is not diagonal", c.name)));
            }
            if c.op.nqubits() != nqubits {
                return Err(Error::QubitMismatch {
                    left: c.op.nqubits(),
                    right: nqubits,
                });
            }
        }
        let basis: Vec<u128> = (0..1u128 << nqubits)
            .into_par_iter()
            .filter(|&b| {
                charges
                    .iter()
                    .all(|c| (c.op.diagonal_value(b) - c.value).abs() < 1e-9)
            })
            .collect();
        Ok(SectorSpec::from_basis(nqubits, charges, basis))
    }

    /// Smallest set of basis states containing `seeds` and closed under `h`.
    pub fn closure(h: &OperatorSum, seeds: &[u128]) -> Result<Self> {
        let mut seen: HashMap<u128, ()> = HashMap::new();
        let mut queue: VecDeque<u128> = seeds.iter().copied().collect();
        for &s in seeds {
            seen.insert(s, ());
        }
        while let Some(b) = queue.pop_front() {
            for (b2, _) in row(h, b) {
                if seen.insert(b2, ()).is_none() {
                    queue.push_back(b2);
                }
            }
        }
        let basis = seen.into_keys().collect();
        Ok(SectorSpec::from_basis(h.nqubits(), Vec::new(), basis))
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[u128] {
        &self.basis
    }

    pub fn charges(&self) -> &[Charge] {
        &self.charges
    }

    pub fn position(&self, b: u128) -> Option<usize> {
        self.index.get(&b).copied()
    }
}

/// Non-zero matrix elements `<b'|h|b>` of one column.
fn row(h: &OperatorSum, b: u128) -> Vec<(u128, Complex64)> {
    let mut acc: HashMap<u128, Complex64> = HashMap::new();
    for t in h.iter() {
        let (b2, ph) = t.string.apply(b);
        *acc.entry(b2).or_default() += t.coeff * ph;
    }
    let mut out: Vec<_> = acc
        .into_iter()
        .filter(|(_, v)| v.norm() > ELEMENT_TOL)
        .collect();
    out.sort_unstable_by_key(|e| e.0);
    out
}

/// Hermitian operator restricted to a sector, stored by columns.
#[derive(Clone, Debug)]
pub struct SectorOperator {
    dim: usize,
    cols: Vec<Vec<(usize, Complex64)>>,
}

impl SectorOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for (j, col) in self.cols.iter().enumerate() {
            let xj = x[j];
            if xj.norm_sqr() == 0.0 {
                continue;
            }
            for &(i, v) in col {
                y[i] += v * xj;
            }
        }
        y
    }

    pub fn is_real(&self) -> bool {
        self.cols.iter().flatten().all(|(_, v)| v.im.abs() < ELEMENT_TOL)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                m[(i, j)] += v;
            }
        }
        m
    }
}

/// Restricts `h` to `sector`, rejecting any matrix element that leaves it.
pub fn sector_operator(h: &OperatorSum, sector: &SectorSpec) -> Result<SectorOperator> {
    if h.nqubits() != sector.nqubits() {
        return Err(Error::QubitMismatch {
            left: h.nqubits(),
            right: sector.nqubits(),
        });
    }
    let cols: Vec<Result<Vec<(usize, Complex64)>>> = sector
        .basis()
        .par_iter()
        .map(|&b| {
            row(h, b)
                .into_iter()
                .map(|(b2, v)| match sector.position(b2) {
                    Some(i) => Ok((i, v)),
                    None => Err(leak_error(h, sector, b, b2)),
                })
                .collect()
        })
        .collect();
    let cols = cols.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SectorOperator {
        dim: sector.dim(),
        cols,
    })
}

fn leak_error(h: &OperatorSum, sector: &SectorSpec, b: u128, b2: u128) -> Error {
    let n = sector.nqubits();
    let charge = sector
        .charges()
        .iter()
        .find(|c| (c.op.diagonal_value(b2) - c.value).abs() > 1e-9)
        .map(|c| c.name.clone())
        .unwrap_or_else(|| "sector closure".into());
    let term = h
        .iter()
        .find(|t| t.string.apply(b).0 == b2)
        .map(|t| t.string.label(n))
        .unwrap_or_default();
    Error::NotConserved { charge, term }
}

/// Sector built from charges, verified to be closed under `h`.
pub fn build_sector(h: &OperatorSum, charges: Vec<Charge>) -> Result<SectorSpec> {
    let sector = SectorSpec::enumerate(h.nqubits(), charges)?;
    sector_operator(h, &sector)?;
    Ok(sector)
}

/// Eigenpairs in ascending order; `vectors` holds one eigenvector per column.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k).iter().copied().collect()
    }
}

/// Diagonalization controls.
#[derive(Clone, Copy, Debug)]
pub struct DiagOptions {
    /// Sectors up to this size are diagonalized densely.
    pub dense_cap: usize,
    /// Eigenpairs wanted from the iterative solver.
    pub nev: usize,
}

impl Default for DiagOptions {
    fn default() -> Self {
        DiagOptions {
            dense_cap: DEFAULT_SECTOR_CAP,
            nev: 6,
        }
    }
}

/// Full eigendecomposition of a sector operator.
///
/// The matrix is shifted by a multiple of the identity before the QR sweep:
/// very sparse matrices with exactly zero couplings otherwise drive the
/// implicit shifts into underflow and NaN.
pub fn dense_eigen(op: &SectorOperator) -> Eigen {
    let n = op.dim();
    let scale = 1.0 + op.cols.iter().flatten().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let mut attempt = None;
    for shift in [0.3719, 1.1377, -0.7113, 2.9071].map(|f| f * scale) {
        let (vals, vecs) = if op.is_real() {
            let m = op.to_dense().map(|c| c.re) + DMatrix::identity(n, n) * shift;
            let e = SymmetricEigen::new(m);
            (e.eigenvalues, e.eigenvectors.map(|x| Complex64::new(x, 0.0)))
        } else {
            let m = op.to_dense() + DMatrix::identity(n, n) * Complex64::new(shift, 0.0);
            let e = SymmetricEigen::new(m);
            (e.eigenvalues, e.eigenvectors)
        };
        let vals = vals.map(|v| v - shift);
        let finite = vals.iter().all(|v| v.is_finite())
            && vecs.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        attempt = Some((vals, vecs));
        if finite {
            break;
        }
    }
    let (vals, vecs) = attempt.expect("at least one attempt");
    let mut order: Vec<usize> = (0..n).collect();
    let dominant = |k: usize| {
        vecs.column(k)
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    };
    order.sort_by(|&a, &b| {
        if (vals[a] - vals[b]).abs() < 1e-9 {
            dominant(a).cmp(&dominant(b))
        } else {
            vals[a].total_cmp(&vals[b])
        }
    });
    let values = order.iter().map(|&k| vals[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    Eigen { values, vectors }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Lowest `nev` eigenpairs by Lanczos with full reorthogonalization.
pub fn lanczos(op: &SectorOperator, nev: usize, start: &[Complex64]) -> Result<Eigen> {
    let n = op.dim();
    let nev = nev.min(n).max(1);
    let mut m = (4 * nev + 40).min(n);
    loop {
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let s = norm(start);
        let mut v: Vec<Complex64> = if s > 0.0 {
            start.iter().map(|x| x / s).collect()
        } else {
            let r = (n as f64).sqrt();
            vec![Complex64::new(1.0 / r, 0.0); n]
        };
        for _ in 0..m {
            let mut w = op.apply(&v);
            let a = dot(&v, &w).re;
            alpha.push(a);
            basis.push(v.clone());
            for _ in 0..2 {
                for u in &basis {
                    let c = dot(u, &w);
                    for (wi, ui) in w.iter_mut().zip(u) {
                        *wi -= c * ui;
                    }
                }
            }
            let b = norm(&w);
            if b < 1e-12 || basis.len() == m {
                break;
            }
            beta.push(b);
            v = w.iter().map(|x| x / b).collect();
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
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
        let e = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
        let want = nev.min(k);
        let mut values = Vec::with_capacity(want);
        let mut vectors = DMatrix::zeros(n, want);
        let mut worst: f64 = 0.0;
        for (col, &idx) in order.iter().take(want).enumerate() {
            let y = e.eigenvectors.column(idx);
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            for (j, bj) in basis.iter().enumerate() {
                for (xi, bi) in x.iter_mut().zip(bj) {
                    *xi += bi * y[j];
                }
            }
            let s = norm(&x);
            x.iter_mut().for_each(|xi| *xi /= s);
            let lam = e.eigenvalues[idx];
            let hx = op.apply(&x);
            let r: Vec<Complex64> = hx.iter().zip(&x).map(|(h, xi)| h - xi * lam).collect();
            worst = worst.max(norm(&r));
            values.push(lam);
            for (i, xi) in x.iter().enumerate() {
                vectors[(i, col)] = *xi;
            }
        }
        if worst <= RESIDUAL_TOL || k < m {
            if worst > RESIDUAL_TOL {
                return Err(Error::Convergence {
                    what: "Lanczos".into(),
                    residual: worst,
                });
            }
            return Ok(Eigen { values, vectors });
        }
        if m == n {
            return Err(Error::Convergence {
                what: "Lanczos".into(),
                residual: worst,
            });
        }
        m = (2 * m).min(n);
    }
}

/// Eigenpairs of `h` in `sector`: every pair when dense, else the lowest `nev`.
pub fn diagonalize(h: &OperatorSum, sector: &SectorSpec, opts: DiagOptions) -> Result<Eigen> {
    let op = sector_operator(h, sector)?;
    if op.dim() == 0 {
        return Err(Error::Sector("empty sector".into()));
    }
    if op.dim() <= opts.dense_cap {
        return Ok(dense_eigen(&op));
    }
    let start: Vec<Complex64> = (0..op.dim())
        .map(|i| Complex64::new(1.0 + (i % 7) as f64 * 0.1, 0.0))
        .collect();
    lanczos(&op, opts.nev, &start)
}

/// Largest `|Hv - Ev|` over the given eigenpairs.
pub fn max_residual(op: &SectorOperator, eig: &Eigen) -> f64 {
    (0..eig.values.len())
        .map(|k| {
            let v = eig.vector(k);
            let hv = op.apply(&v);
            norm(
                &hv.iter()
                    .zip(&v)
                    .map(|(a, b)| a - b * eig.values[k])
                    .collect::<Vec<_>>(),
            )
        })
        .fold(0.0, f64::max)
}

/// One labelled level above the vacuum.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub label: String,
    pub gap: f64,
    /// Number of degenerate lepton fillings carrying this gap.
    pub multiplicity: usize,
    /// Net `(u, d)` quark numbers of the sector.
    pub quarks: (i32, i32),
    /// Lepton modes excited above the lepton vacuum.
    pub leptons: usize,
}

/// Gaps above the vacuum, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTable {
    pub vacuum_energy: f64,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    pub fn gap(&self, label: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.label == label).map(|r| r.gap)
    }

    /// Baryon levels no higher than the bare `d d d` state's gap.
    pub fn up_to_delta_minus(&self) -> Vec<&SpectrumRow> {
        let top = self.gap("Δ⁻").unwrap_or(f64::INFINITY);
        self.rows
            .iter()
            .filter(|r| r.quarks != (0, 0) && r.gap <= top + 1e-9)
            .collect()
    }
}

fn baryon_label(nu: i32, nd: i32) -> &'static str {
    match (nu, nd) {
        (0, 0) => "vacuum",
        (3, 0) => "Δ⁺⁺",
        (2, 1) => "Δ⁺",
        (1, 2) => "Δ⁰",
        (0, 3) => "Δ⁻",
        _ => "quarks",
    }
}

/// Lepton qubit fillings with zero lepton number, as `(bits, excitations)`.
fn neutral_lepton_fillings(lay: &crate::layout::QubitLayout) -> Result<Vec<(Vec<(usize, u8)>, usize)>> {
    let species = [Species::Nu, Species::E, Species::NuBar, Species::EBar];
    let mut out = Vec::new();
    for mask in 0u8..16 {
        let mut lnum = 0i32;
        let mut bits = Vec::new();
        for (k, sp) in species.iter().enumerate() {
            let excited = mask >> k & 1 == 1;
            let occ = if excited { 1 } else { 0 };
            let q = lay.index(0, *sp, 0)?;
            // Tilde vacuum: nu and e modes read 1, nubar and ebar read 0.
            let vac = u8::from(!sp.is_antiparticle());
            bits.push((q, if excited { 1 - vac } else { vac }));
            lnum += if sp.is_antiparticle() { -occ } else { occ };
        }
        if lnum == 0 {
            out.push((bits, mask.count_ones() as usize));
        }
    }
    Ok(out)
}

/// Strong-interaction spectrum of the single-site system (weak coupling
/// ignored): the vacuum and each baryon sector with every lepton filling of
/// zero lepton number.
pub fn spectrum_table(p: &LatticeParams) -> Result<SpectrumTable> {
    if p.sites != 1 {
        return Err(Error::Form("the labelled spectrum is built for L = 1".into()));
    }
    let p = p.strong_only();
    let lay = p.layout()?;
    let n = lay.nqubits();
    let h = build_full(&p, &lay, FullOptions::strong(LeptonBasis::Tilde))?;
    let nu_op = up_number(&lay)?;
    let nd_op = down_number(&lay)?;
    let fillings = neutral_lepton_fillings(&lay)?;
    let quark_sectors = [(0, 0), (3, 0), (2, 1), (1, 2), (0, 3)];
    let jobs: Vec<((i32, i32), usize)> = quark_sectors
        .iter()
        .flat_map(|&qs| (0..fillings.len()).map(move |f| (qs, f)))
        .collect();
    let energies: Vec<Result<((i32, i32), usize, f64)>> = jobs
        .par_iter()
        .map(|&((nu, nd), f)| {
            let mut charges = vec![
                Charge::new("N_u", nu_op.clone(), nu as f64),
                Charge::new("N_d", nd_op.clone(), nd as f64),
            ];
            for &(q, bit) in &fillings[f].0 {
                charges.push(Charge::pin(q, n, bit));
            }
            let sector = build_sector(&h, charges)?;
            let eig = diagonalize(&h, &sector, DiagOptions::default())?;
            Ok(((nu, nd), fillings[f].1, eig.values[0]))
        })
        .collect();
    let energies = energies.into_iter().collect::<Result<Vec<_>>>()?;
    let vacuum_energy = energies
        .iter()
        .filter(|e| e.0 == (0, 0) && e.1 == 0)
        .map(|e| e.2)
        .next()
        .ok_or_else(|| Error::Sector("no vacuum sector".into()))?;
    if energies.iter().any(|e| e.2 < vacuum_energy - 1e-9) {
        return Err(Error::Sector("a scanned sector lies below the vacuum".into()));
    }
    let mut rows: Vec<SpectrumRow> = Vec::new();
    for ((nu, nd), nl, e) in energies {
        let gap = e - vacuum_energy;
        if let Some(r) = rows
            .iter_mut()
            .find(|r| r.quarks == (nu, nd) && r.leptons == nl && (r.gap - gap).abs() < 1e-9)
        {
            r.multiplicity += 1;
            continue;
        }
        let base = baryon_label(nu, nd);
        let label = if nl == 0 {
            base.to_string()
        } else {
            format!("{base} + {nl}l")
        };
        rows.push(SpectrumRow {
            label,
            gap,
            multiplicity: 1,
            quarks: (nu, nd),
            leptons: nl,
        });
    }
    // Split labels of lepton fillings that are not degenerate (massive leptons).
    let mut counts: HashMap<String, usize> = HashMap::new();
    for r in &rows {
        *counts.entry(r.label.clone()).or_default() += 1;
    }
    for r in rows.iter_mut() {
        if counts[&r.label] > 1 {
            r.label = format!("{} ({:.4})", r.label, r.gap);
        }
    }
    rows.sort_by(|a, b| a.gap.total_cmp(&b.gap).then(a.label.cmp(&b.label)));
    Ok(SpectrumTable {
        vacuum_energy,
        rows,
    })
}
