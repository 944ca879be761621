//! Gate-level circuits: the baryon state preparation, GHZ-diagonalized
//! Trotter steps with CNOT bookkeeping, and closed-form resource counts.
//!
//! Angles follow `RZ(l) = exp(-i l Z / 2)` and `RY(t) = exp(-i t Y / 2)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{prepare_delta_minus, Statevector};
use crate::hamiltonians::{build_full, FullOptions, LatticeParams, LeptonBasis};
use crate::layout::{Field, Species};
use crate::pauli::{OperatorSum, PauliString};
use crate::simulator::execute;
use crate::trotter::{GroupKind, TermGroup, TrotterPlan};

/// One gate of the native set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    X(usize),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
    /// Return a qubit to `|0>`; only valid when it is already there.
    Reset(usize),
}

impl Gate {
    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::Cnot { control, target }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Ry(q, _) | Gate::Rz(q, _) | Gate::Reset(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn is_clifford(&self) -> bool {
        matches!(self, Gate::H(_) | Gate::X(_) | Gate::Cnot { .. })
    }

    /// Inverse gate; `RESET` has none.
    pub fn inverse(&self) -> Result<Gate> {
        Ok(match *self {
            Gate::Ry(q, a) => Gate::Ry(q, -a),
            Gate::Rz(q, a) => Gate::Rz(q, -a),
            Gate::Reset(_) => return Err(Error::Circuit("RESET has no inverse".into())),
            g => g,
        })
    }

    fn validate(&self, nqubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= nqubits {
                return Err(Error::QubitOutOfRange { qubit: q, nqubits });
            }
        }
        match *self {
            Gate::Cnot { control, target } if control == target => {
                Err(Error::Circuit(format!("CNOT with equal operands {control}")))
            }
            Gate::Ry(_, a) | Gate::Rz(_, a) if !a.is_finite() => {
                Err(Error::Circuit(format!("non-finite angle {a}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::X(q) => write!(f, "X {q}"),
            Gate::Ry(q, a) => write!(f, "RY {q} {a:?}"),
            Gate::Rz(q, a) => write!(f, "RZ {q} {a:?}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::Reset(q) => write!(f, "RESET {q}"),
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(line: &str) -> Result<Gate> {
        let tok: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Parse(format!("malformed gate line '{line}'"));
        let q = |i: usize| -> Result<usize> { tok.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let a = |i: usize| -> Result<f64> { tok.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let (gate, arity) = match tok.first().copied() {
            Some("H") => (Gate::H(q(1)?), 2),
            Some("X") => (Gate::X(q(1)?), 2),
            Some("RY") => (Gate::Ry(q(1)?, a(2)?), 3),
            Some("RZ") => (Gate::Rz(q(1)?, a(2)?), 3),
            Some("CNOT") => (Gate::cnot(q(1)?, q(2)?), 3),
            Some("RESET") => (Gate::Reset(q(1)?), 2),
            _ => return Err(bad()),
        };
        if tok.len() != arity {
            return Err(bad());
        }
        Ok(gate)
    }
}

/// Gate tallies of a circuit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub h: usize,
    pub x: usize,
    pub ry: usize,
    pub rz: usize,
    pub cnot: usize,
    pub reset: usize,
}

/// An ordered gate list on a fixed register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    nqubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(nqubits: usize) -> Self {
        Circuit {
            nqubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(nqubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Circuit::new(nqubits);
        c.extend(gates)?;
        Ok(c)
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.validate(self.nqubits)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.push(g))
    }

    pub fn counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in &self.gates {
            match g {
                Gate::H(_) => c.h += 1,
                Gate::X(_) => c.x += 1,
                Gate::Ry(..) => c.ry += 1,
                Gate::Rz(..) => c.rz += 1,
                Gate::Cnot { .. } => c.cnot += 1,
                Gate::Reset(_) => c.reset += 1,
            }
        }
        c
    }

    pub fn cnot_count(&self) -> usize {
        self.counts().cnot
    }

    /// Number of layers when every gate waits for the previous gate on each
    /// of its qubits.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.nqubits];
        for g in &self.gates {
            let qs = g.qubits();
            let d = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for q in qs {
                level[q] = d;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Result<Circuit> {
        let gates = self.gates.iter().rev().map(Gate::inverse).collect::<Result<Vec<_>>>()?;
        Ok(Circuit {
            nqubits: self.nqubits,
            gates,
        })
    }

    /// Text form: a `QUBITS n` header, then one `GATE q0 [q1] [angle]` per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.nqubits);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses [`Circuit::to_text`] output; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, head) = lines.next().ok_or_else(|| Error::Parse("empty circuit".into()))?;
        let n = head
            .strip_prefix("QUBITS ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("line 1: expected 'QUBITS n', got '{head}'")))?;
        let mut c = Circuit::new(n);
        for (i, l) in lines {
            let g: Gate = l.parse().map_err(|e| Error::Parse(format!("line {i}: {e}")))?;
            c.push(g).map_err(|e| Error::Parse(format!("line {i}: {e}")))?;
        }
        Ok(c)
    }

    /// Removes pairs of identical CNOTs with no gate on either operand in
    /// between, repeating until none remain. Returns the number removed.
    pub fn cancel_cnots(&mut self) -> usize {
        let before = self.gates.len();
        loop {
            let mut last: Vec<Option<usize>> = vec![None; self.nqubits];
            let mut dead = vec![false; self.gates.len()];
            let mut removed = false;
            for (i, g) in self.gates.iter().enumerate() {
                let qs = g.qubits();
                if let Gate::Cnot { control, target } = *g {
                    if let (Some(a), Some(b)) = (last[control], last[target]) {
                        if a == b && self.gates[a] == *g && !dead[a] {
                            dead[a] = true;
                            dead[i] = true;
                            removed = true;
                            last[control] = None;
                            last[target] = None;
                            continue;
                        }
                    }
                }
                for q in qs {
                    last[q] = Some(i);
                }
            }
            if !removed {
                break;
            }
            let mut k = 0;
            self.gates.retain(|_| {
                k += 1;
                !dead[k - 1]
            });
        }
        before - self.gates.len()
    }
}

/// Image `V P V^dag` of a Pauli string under a Clifford gate list `V`
/// (first gate applied first), as `(phase, string)`.
pub fn conjugate_string(s: &PauliString, gates: &[Gate]) -> Result<(Complex64, PauliString)> {
    use crate::pauli::Pauli;
    let mut phase = Complex64::new(1.0, 0.0);
    let mut cur = *s;
    for g in gates {
        let image = |q: usize, p: Pauli| -> (Complex64, PauliString) {
            let one = Complex64::new(1.0, 0.0);
            let single = |q, p| PauliString::single(q, p);
            match (*g, p) {
                (Gate::H(h), Pauli::X) if h == q => (one, single(q, Pauli::Z)),
                (Gate::H(h), Pauli::Z) if h == q => (one, single(q, Pauli::X)),
                (Gate::H(h), Pauli::Y) if h == q => (-one, single(q, Pauli::Y)),
                (Gate::X(h), Pauli::Z | Pauli::Y) if h == q => (-one, single(q, p)),
                (Gate::Cnot { control, target }, _) if q == control || q == target => {
                    let x_img = if q == control {
                        PauliString::single(control, Pauli::X).with(target, Pauli::X)
                    } else {
                        single(q, Pauli::X)
                    };
                    let z_img = if q == target {
                        PauliString::single(control, Pauli::Z).with(target, Pauli::Z)
                    } else {
                        single(q, Pauli::Z)
                    };
                    match p {
                        Pauli::X => (one, x_img),
                        Pauli::Z => (one, z_img),
                        _ => {
                            let (ph, s) = x_img.mul(&z_img);
                            (ph * Complex64::new(0.0, 1.0), s)
                        }
                    }
                }
                _ => (one, single(q, p)),
            }
        };
        if !g.is_clifford() {
            return Err(Error::Circuit(format!("{g} is not a Clifford gate")));
        }
        let mut next = PauliString::identity();
        let mut ph = Complex64::new(1.0, 0.0);
        for q in 0..cur.span() {
            let p = cur.get(q);
            if p == Pauli::I {
                continue;
            }
            let (a, img) = image(q, p);
            let (b, prod) = next.mul(&img);
            ph *= a * b;
            next = prod;
        }
        phase *= ph;
        cur = next;
    }
    Ok((phase, cur))
}

/// Image `V H V^dag` of an operator under a Clifford gate list.
pub fn conjugate(op: &OperatorSum, gates: &[Gate]) -> Result<OperatorSum> {
    let mut out = OperatorSum::zero(op.nqubits());
    for t in op.iter() {
        let (ph, s) = conjugate_string(&t.string, gates)?;
        out.add_term(s, t.coeff * ph);
    }
    out.normalize();
    Ok(out)
}

fn bit_list(mask: u128) -> Vec<usize> {
    (0..128).filter(|q| (mask >> q) & 1 == 1).collect()
}

/// Exponential `exp(-i t D)` of a diagonal operator `D`.
///
/// Weight-one terms become free `RZ`s. Every other term must contain the
/// pivot; the `Z`s shared by all of them outside `keep` are folded onto the
/// pivot with a CNOT pair each, and the rest are reached by a Gray-code walk
/// of CNOTs into the pivot, with one `RZ` per visited parity.
pub fn diagonal_exponential(d: &OperatorSum, pivot: usize, keep: u128, t: f64) -> Result<Vec<Gate>> {
    let pbit = 1u128 << pivot;
    let mut free = Vec::new();
    let mut walk: BTreeMap<u128, f64> = BTreeMap::new();
    for term in d.iter() {
        let s = term.string;
        if !s.is_diagonal() {
            return Err(Error::Circuit(format!("term {} is not diagonal", s.label(d.nqubits()))));
        }
        if term.coeff.im.abs() > 1e-12 {
            return Err(Error::Circuit("non-hermitian diagonal coefficient".into()));
        }
        let c = term.coeff.re;
        if s.is_identity() {
            continue;
        }
        if s.weight() == 1 && s.z_mask() != pbit {
            free.push(Gate::Rz(bit_list(s.z_mask())[0], 2.0 * t * c));
        } else if s.z_mask() & pbit != 0 {
            *walk.entry(s.z_mask() & !pbit).or_insert(0.0) += c;
        } else {
            return Err(Error::Circuit(format!(
                "term {} misses pivot {pivot}",
                s.label(d.nqubits())
            )));
        }
    }
    let mut gates = free;
    if walk.is_empty() {
        return Ok(gates);
    }
    let fold = walk.keys().fold(u128::MAX, |m, &k| m & k) & !keep;
    let fold_q = bit_list(fold);
    let walk_q = bit_list(walk.keys().fold(0, |m, &k| m | k) & !fold);
    for &f in &fold_q {
        gates.push(Gate::cnot(f, pivot));
    }
    let nw = walk_q.len();
    let mut cur = 0usize;
    for k in 0..(1usize << nw) {
        let code = k ^ (k >> 1);
        let flip = cur ^ code;
        if flip != 0 {
            gates.push(Gate::cnot(walk_q[flip.trailing_zeros() as usize], pivot));
        }
        cur = code;
        let key = bit_list(code as u128).iter().fold(fold, |m, &i| m | 1u128 << walk_q[i]);
        if let Some(&c) = walk.get(&key) {
            if c != 0.0 {
                gates.push(Gate::Rz(pivot, 2.0 * t * c));
            }
        }
    }
    if cur != 0 {
        gates.push(Gate::cnot(walk_q[cur.trailing_zeros() as usize], pivot));
    }
    for &f in fold_q.iter().rev() {
        gates.push(Gate::cnot(f, pivot));
    }
    Ok(gates)
}

/// The two four-qubit GHZ preparation circuits `G` and `G^`.
///
/// With `U` the unitary of either circuit, `U^dag P U` maps the matching
/// eight-string `XXXX`-type family onto `Z` strings (qubit 0 rightmost).
pub fn ghz_circuits() -> (Circuit, Circuit) {
    let build = |pivot: usize| {
        let mut gates = vec![Gate::X(2), Gate::H(pivot)];
        gates.extend((0..4).rev().filter(|&q| q != pivot).map(|q| Gate::cnot(pivot, q)));
        Circuit::from_gates(4, gates).expect("valid operands")
    };
    (build(0), build(1))
}

/// Options of the Trotter circuit compiler.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileOptions {
    /// Keep hopping parities on an extra qubit instead of folding each string.
    pub ancilla: bool,
    /// Run [`Circuit::cancel_cnots`] on the result.
    pub cancel_cnots: bool,
    /// Leave out the first strong factor (the initial state is its eigenstate).
    pub skip_first_strong: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            ancilla: true,
            cancel_cnots: true,
            skip_first_strong: true,
        }
    }
}

/// A compiled product formula and its bookkeeping.
#[derive(Clone, Debug)]
pub struct TrotterCircuit {
    pub circuit: Circuit,
    /// Ancilla qubit index when one is used.
    pub ancilla: Option<usize>,
    /// CNOTs removed by cancellation.
    pub cancelled: usize,
}

struct Compiler {
    n: usize,
    ancilla: Option<usize>,
    gates: Vec<Gate>,
    loaded: BTreeSet<usize>,
}

impl Compiler {
    fn load(&mut self, window: &BTreeSet<usize>) {
        let a = self.ancilla.expect("ancilla present");
        let out: Vec<usize> = self.loaded.difference(window).copied().collect();
        let add: Vec<usize> = window.difference(&self.loaded).copied().collect();
        for q in out.into_iter().chain(add) {
            self.gates.push(Gate::cnot(q, a));
        }
        self.loaded = window.clone();
    }

    fn unload(&mut self) {
        if self.ancilla.is_some() {
            self.load(&BTreeSet::new());
        }
    }

    fn framed(&mut self, op: &OperatorSum, virt: &[Gate], frame: &[Gate], pivot: usize, keep: u128, t: f64) -> Result<()> {
        let all: Vec<Gate> = virt.iter().chain(frame).copied().collect();
        let d = conjugate(op, &all)?;
        let body = diagonal_exponential(&d, pivot, keep, t)?;
        self.gates.extend_from_slice(frame);
        self.gates.extend(body);
        for g in frame.iter().rev() {
            self.gates.push(g.inverse()?);
        }
        Ok(())
    }

    fn group(&mut self, g: &TermGroup, t: f64) -> Result<()> {
        let op = g.op.widen(self.n)?;
        match g.kind {
            GroupKind::Hop { low, high } => {
                let window: BTreeSet<usize> = (low + 1..high).collect();
                let frame = [Gate::cnot(low, high), Gate::H(low)];
                match self.ancilla {
                    Some(a) => {
                        self.load(&window);
                        // With the ancilla at |0>, Z_a is +1; the loads turn Z_a into Z_a Z_window.
                        let za = OperatorSum::term(self.n, PauliString::z_on([a]), Complex64::new(1.0, 0.0));
                        let op = op.multiply(&za)?;
                        let virt: Vec<Gate> = window.iter().map(|&q| Gate::cnot(q, a)).collect();
                        self.framed(&op, &virt, &frame, low, 0, t)
                    }
                    None => self.framed(&op, &[], &frame, low, 0, t),
                }
            }
            GroupKind::Frame { qubits, pivot } => {
                self.unload();
                let mut frame: Vec<Gate> =
                    qubits.iter().filter(|&&q| q != pivot).map(|&q| Gate::cnot(pivot, q)).collect();
                frame.push(Gate::H(pivot));
                let keep = qubits.iter().fold(0, |m, &q| m | 1u128 << q);
                self.framed(&op, &[], &frame, pivot, keep, t)
            }
            GroupKind::Beta { mask } => {
                self.unload();
                let qs = bit_list(mask);
                let pivot = self.beta_pivot(&qs)?;
                let mut frame: Vec<Gate> =
                    qs.iter().rev().filter(|&&q| q != pivot).map(|&q| Gate::cnot(pivot, q)).collect();
                frame.push(Gate::H(pivot));
                self.framed(&op, &[], &frame, pivot, mask, t)
            }
            GroupKind::ZzPairs => {
                self.unload();
                for term in op.iter() {
                    let qs = bit_list(term.string.z_mask());
                    if qs.len() != 2 || !term.string.is_diagonal() {
                        return Err(Error::Circuit(format!("{} is not a ZZ term", g.name)));
                    }
                    let single = OperatorSum::term(self.n, term.string, term.coeff);
                    let body = diagonal_exponential(&single, qs[1], 1u128 << qs[0], t)?;
                    self.gates.extend(body);
                }
                Ok(())
            }
            GroupKind::SingleZ => {
                let body = diagonal_exponential(&op, 0, 0, t)?;
                if body.iter().any(|g| matches!(g, Gate::Cnot { .. })) {
                    return Err(Error::Circuit(format!("{} holds multi-qubit terms", g.name)));
                }
                self.gates.extend(body);
                Ok(())
            }
        }
    }

    /// Electron qubit of the single-site register when flipped, else the
    /// highest flipped qubit.
    fn beta_pivot(&self, qs: &[usize]) -> Result<usize> {
        let lay = crate::trotter::benchmark_layout();
        let e = lay.index(0, Species::E, 0)?;
        Ok(if qs.contains(&e) { e } else { *qs.last().expect("non-empty mask") })
    }
}

/// Compiles `steps` repetitions of `B(dt) S(dt)`, `dt = t / steps`, from a
/// plan's groups, in plan order.
pub fn trotter_step_circuit(plan: &TrotterPlan, t: f64, steps: usize, opts: CompileOptions) -> Result<TrotterCircuit> {
    if steps == 0 {
        return Err(Error::Params("at least one Trotter step".into()));
    }
    let n = plan.strong.iter().chain(&plan.beta).map(|g| g.op.nqubits()).max().unwrap_or(0);
    let ancilla = opts.ancilla.then_some(n);
    let width = n + usize::from(opts.ancilla);
    let mut comp = Compiler {
        n: width,
        ancilla,
        gates: Vec::new(),
        loaded: BTreeSet::new(),
    };
    let dt = t / steps as f64;
    for k in 0..steps {
        if !(k == 0 && opts.skip_first_strong) {
            for g in &plan.strong {
                comp.group(g, dt)?;
            }
            if ancilla.is_some() {
                comp.unload();
            }
        }
        for g in &plan.beta {
            comp.group(g, dt)?;
        }
    }
    if ancilla.is_some() {
        comp.unload();
    }
    let mut circuit = Circuit::from_gates(width, comp.gates)?;
    let cancelled = if opts.cancel_cnots { circuit.cancel_cnots() } else { 0 };
    Ok(TrotterCircuit {
        circuit,
        ancilla,
        cancelled,
    })
}

/// The three free angles of the baryon preparation circuit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepAngles {
    pub theta: f64,
    pub theta_1: f64,
    pub theta_11: f64,
}

/// All seven tree angles, the dependent ones fixed by colour symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeAngles {
    pub theta: f64,
    pub theta_0: f64,
    pub theta_1: f64,
    pub theta_00: f64,
    pub theta_01: f64,
    pub theta_10: f64,
    pub theta_11: f64,
}

fn asin_checked(x: f64, what: &str) -> Result<f64> {
    if x.abs() > 1.0 {
        return Err(Error::Domain(format!("{what}: |{x}| > 1")));
    }
    Ok(x.asin())
}

impl PrepAngles {
    /// Published optimum for `m_u = 0.9`, `g = 2`.
    pub fn published() -> Self {
        PrepAngles {
            theta: 0.2256,
            theta_1: 0.4794,
            theta_11: 0.3265,
        }
    }

    /// Dependent angles that make the weight-one and weight-two amplitudes
    /// equal in magnitude across colours.
    pub fn tree(&self) -> Result<TreeAngles> {
        let h = |a: f64| a / 2.0;
        let theta_0 = -2.0 * asin_checked(h(self.theta).tan() * h(self.theta_1).cos(), "theta_0")?;
        let theta_01 = -2.0 * asin_checked(h(self.theta_11).cos() * h(self.theta_1).tan(), "theta_01")?;
        let theta_00 = -2.0 * asin_checked(h(theta_0).tan() * h(theta_01).cos(), "theta_00")?;
        Ok(TreeAngles {
            theta: self.theta,
            theta_0,
            theta_1: self.theta_1,
            theta_00,
            theta_01,
            theta_10: theta_01,
            theta_11: self.theta_11,
        })
    }
}

/// Pair-creation qubits of the tree, in tree order.
fn tree_qubits() -> Result<[usize; 3]> {
    let lay = crate::trotter::benchmark_layout();
    Ok([
        lay.staggered(Field::Up, 0, 0)?,
        lay.staggered(Field::Up, 0, 1)?,
        lay.staggered(Field::Up, 0, 2)?,
    ])
}

/// Circuit preparing the single-site `Delta^-` from `|0...0>` with the given
/// angles: an `RY` tree on the up-quark qubits (uniformly controlled
/// rotations, 6 CNOTs), one CNOT per colour copying each pair onto the
/// antiquark, then `X`s for the unoccupied particle qubits and the lepton
/// vacuum.
pub fn state_prep_with(angles: &PrepAngles) -> Result<Circuit> {
    let lay = crate::trotter::benchmark_layout();
    let tr = angles.tree()?;
    let [a, b, c] = tree_qubits()?;
    let mut g = vec![Gate::Ry(a, tr.theta)];
    // One control: angle (t0 + t1)/2 then (t0 - t1)/2 under the CNOT.
    g.push(Gate::Ry(b, (tr.theta_0 + tr.theta_1) / 2.0));
    g.push(Gate::cnot(a, b));
    g.push(Gate::Ry(b, (tr.theta_0 - tr.theta_1) / 2.0));
    g.push(Gate::cnot(a, b));
    // Two controls: Walsh transform of (t00, t01, t10, t11), indexed (bit a, bit b).
    let th = [tr.theta_00, tr.theta_01, tr.theta_10, tr.theta_11];
    let walsh = |f: fn(usize, usize) -> usize| -> f64 {
        (0..4)
            .map(|i| if f(i >> 1, i & 1).is_multiple_of(2) { th[i] } else { -th[i] })
            .sum::<f64>()
            / 4.0
    };
    let w0 = walsh(|_, _| 0);
    let w1 = walsh(|x1, _| x1);
    let w2 = walsh(|x1, x2| x1 + x2);
    let w3 = walsh(|_, x2| x2);
    g.extend([
        Gate::Ry(c, w0),
        Gate::cnot(a, c),
        Gate::Ry(c, w1),
        Gate::cnot(b, c),
        Gate::Ry(c, w2),
        Gate::cnot(a, c),
        Gate::Ry(c, w3),
        Gate::cnot(b, c),
    ]);
    for (col, &q) in [a, b, c].iter().enumerate() {
        g.push(Gate::cnot(q, lay.staggered(Field::Up, 1, col)?));
        g.push(Gate::X(q));
    }
    for s in [Species::Nu, Species::E] {
        g.push(Gate::X(lay.index(0, s, 0)?));
    }
    Circuit::from_gates(lay.nqubits(), g)
}

/// Strong Hamiltonian whose ground state in the `Delta^-` sector the
/// preparation circuit targets.
fn prep_hamiltonian(p: &LatticeParams) -> Result<OperatorSum> {
    let lay = p.layout()?;
    build_full(&p.strong_only(), &lay, FullOptions::strong(LeptonBasis::Tilde))
}

/// Energy of the circuit state for the given angles.
pub fn prep_energy(p: &LatticeParams, angles: &PrepAngles) -> Result<f64> {
    let h = prep_hamiltonian(p)?;
    let psi = execute(&state_prep_with(angles)?, None)?;
    Ok(psi.expectation(&h))
}

/// Angles minimizing the energy of the preparation circuit, started from
/// `start`.
pub fn fit_prep_angles(p: &LatticeParams, start: PrepAngles) -> Result<(PrepAngles, f64)> {
    let h = prep_hamiltonian(p)?;
    let energy = |x: &[f64]| -> f64 {
        let a = PrepAngles {
            theta: x[0],
            theta_1: x[1],
            theta_11: x[2],
        };
        match state_prep_with(&a).and_then(|c| execute(&c, None)) {
            Ok(psi) => psi.expectation(&h),
            Err(_) => f64::INFINITY,
        }
    };
    let x = crate::optimize::nelder_mead(&energy, &[start.theta, start.theta_1, start.theta_11], 0.1, 1e-12, 4000)?;
    let best = PrepAngles {
        theta: x[0],
        theta_1: x[1],
        theta_11: x[2],
    };
    Ok((best, energy(&x)))
}

/// Preparation circuit with energy-optimal angles for `p` (single site).
pub fn state_prep_circuit(p: &LatticeParams) -> Result<(Circuit, PrepAngles)> {
    if p.sites != 1 {
        return Err(Error::Params("the preparation circuit is built for L = 1".into()));
    }
    let (angles, _) = fit_prep_angles(p, PrepAngles::published())?;
    Ok((state_prep_with(&angles)?, angles))
}

/// Overlap of the prepared state with the diagonalization-based `Delta^-`.
pub fn prep_fidelity(p: &LatticeParams, circuit: &Circuit) -> Result<f64> {
    let (target, _) = prepare_delta_minus(p)?;
    let psi: Statevector = execute(circuit, None)?;
    Ok(psi.fidelity(&target.to_full()?))
}

/// Closed-form gate counts per Trotter step on `L` sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub sites: u64,
    pub beta_rz: u64,
    pub beta_hadamard: u64,
    pub beta_cnot: u64,
    pub rz: u64,
    pub hadamard: u64,
    pub cnot: u64,
    pub multi_qubit_terms: u64,
}

/// Per-step resources of the full multi-site Hamiltonian in the standard
/// lepton basis with grouped lepton qubits.
pub fn resource_estimate(sites: u64) -> Result<ResourceEstimate> {
    if sites == 0 {
        return Err(Error::Params("at least one site".into()));
    }
    let l = sites;
    Ok(ResourceEstimate {
        sites: l,
        beta_rz: 192 * l,
        beta_hadamard: 48 * l,
        beta_cnot: 436 * l,
        rz: 264 * l * l + 77 - 54 * l,
        hadamard: 48 * l * l + 20 * l + 2,
        cnot: 368 * l * l + 120 * l + 74,
        multi_qubit_terms: 96 * l * l + 22 - 68 * l,
    })
}
