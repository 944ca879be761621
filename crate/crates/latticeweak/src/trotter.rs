//! Product-formula time evolution with a fixed, versioned term ordering.
//!
//! One step is `B(dt) S(dt)`: the strong and free-lepton part `S` acts first,
//! then the beta operator `B`. Each factor is a list of groups of mutually
//! commuting Pauli terms, so every group exponential is exact and the only
//! Trotter error comes from the order of the groups.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{decay_probability, DecayCurve, DecaySystem, Statevector};
use crate::spectra::{dense_eigen, sector_operator, Eigen, SectorSpec};
use crate::hamiltonians::{
    build_h_beta, build_h_glue, build_h_leptons, build_h_quarks, BetaForm, LatticeParams,
    LeptonBasis,
};
use crate::layout::{Field, QubitLayout, NCOLORS};
use crate::pauli::OperatorSum;

/// Version tag of the group ordering below; any change alters Trotter values.
pub const ORDERING_VERSION: &str = "strong-v1";

/// What a group is, which fixes how the circuit compiler handles it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// Hopping between `low` and `high` with a `Z` string strictly between.
    Hop { low: usize, high: usize },
    /// Four flipped qubits diagonalized by a GHZ frame around `pivot`.
    Frame { qubits: [usize; 4], pivot: usize },
    /// Two-qubit `ZZ` terms.
    ZzPairs,
    /// Single-qubit `Z` terms.
    SingleZ,
    /// Beta terms sharing one flipped-qubit set.
    Beta { mask: u128 },
}

/// Mutually commuting Pauli terms exponentiated together.
#[derive(Clone, Debug)]
pub struct TermGroup {
    pub name: String,
    pub kind: GroupKind,
    pub op: OperatorSum,
}

impl TermGroup {
    fn check_commuting(&self) -> Result<()> {
        let terms: Vec<_> = self.op.iter().collect();
        for (i, a) in terms.iter().enumerate() {
            for b in &terms[i + 1..] {
                if !a.string.commutes_with(&b.string) {
                    return Err(Error::Form(format!("group {} is not commuting", self.name)));
                }
            }
        }
        Ok(())
    }
}

/// Ordered groups of the strong factor and of the beta factor.
#[derive(Clone, Debug)]
pub struct TrotterPlan {
    pub strong: Vec<TermGroup>,
    pub beta: Vec<TermGroup>,
}

/// The three four-qubit glue frames (qubit sets of the `u`/`d` particle
/// qubits of two colours), each with the pivot qubit used by the circuit and
/// the `ZZ` pairs exponentiated alongside it.
pub const GLUE_FRAMES: [([usize; 4], usize, [(usize, usize); 3]); 3] = [
    ([1, 2, 4, 5], 5, [(1, 5), (2, 5), (4, 5)]),
    ([0, 2, 3, 5], 0, [(0, 2), (0, 3), (0, 5)]),
    ([0, 1, 3, 4], 1, [(0, 1), (1, 3), (1, 4)]),
];

/// Quark `ZZ` pairs not attached to a glue frame.
pub const REST_PAIRS: [(usize, usize); 6] = [(0, 4), (1, 2), (2, 3), (2, 4), (3, 4), (3, 5)];

fn mask(qs: &[usize]) -> u128 {
    qs.iter().fold(0, |m, &q| m | 1u128 << q)
}

/// The pinned single-site plan for the given beta operator.
pub fn benchmark_plan(p: &LatticeParams, beta: BetaForm) -> Result<TrotterPlan> {
    if p.sites != 1 || p.layout != crate::layout::Scheme::Interleaved {
        return Err(Error::Form("the pinned Trotter plan is built for L = 1".into()));
    }
    if beta.lepton_basis() != LeptonBasis::Tilde {
        return Err(Error::Form("the pinned Trotter plan uses tilde leptons".into()));
    }
    let lay = p.layout()?;
    let n = lay.nqubits();
    let strong = build_h_quarks(p, &lay)?
        .add(&build_h_leptons(p, &lay, LeptonBasis::Tilde)?)?
        .add(&build_h_glue(p, &lay)?)?;

    let hops: Vec<(usize, usize)> = [Field::Up, Field::Down]
        .iter()
        .flat_map(|&f| (0..NCOLORS).map(move |c| (f, c)))
        .map(|(f, c)| {
            let a = lay.staggered(f, 0, c).expect("in range");
            let b = lay.staggered(f, 1, c).expect("in range");
            (a.min(b), a.max(b))
        })
        .collect();
    let hop_masks: Vec<u128> = hops.iter().map(|&(a, b)| mask(&[a, b])).collect();
    let empty = |name: String, kind: GroupKind| TermGroup {
        name,
        kind,
        op: OperatorSum::zero(n),
    };
    let mut groups: Vec<TermGroup> = hops
        .iter()
        .map(|&(low, high)| empty(format!("hop {low}-{high}"), GroupKind::Hop { low, high }))
        .collect();
    for (frame, pivot, _) in GLUE_FRAMES.iter() {
        groups.push(empty(
            format!("glue frame {frame:?} pivot {pivot}"),
            GroupKind::Frame {
                qubits: *frame,
                pivot: *pivot,
            },
        ));
    }
    groups.push(empty("glue ZZ rest".into(), GroupKind::ZzPairs));
    groups.push(empty("single Z".into(), GroupKind::SingleZ));
    let nhop = hop_masks.len();
    let rest = nhop + GLUE_FRAMES.len();
    let singles = rest + 1;

    for t in strong.iter() {
        let s = t.string;
        if s.is_identity() {
            continue;
        }
        let slot = if s.is_diagonal() {
            match s.weight() {
                1 => Some(singles),
                2 => {
                    let z = s.z_mask();
                    let pair = |(a, b): &(usize, usize)| mask(&[*a, *b]) == z;
                    GLUE_FRAMES
                        .iter()
                        .position(|(_, _, pairs)| pairs.iter().any(pair))
                        .map(|k| nhop + k)
                        .or_else(|| REST_PAIRS.iter().any(pair).then_some(rest))
                }
                _ => None,
            }
        } else {
            hop_masks
                .iter()
                .position(|m| *m == s.x_mask())
                .or_else(|| {
                    GLUE_FRAMES
                        .iter()
                        .position(|(f, _, _)| mask(f) == s.x_mask())
                        .map(|k| nhop + k)
                })
        };
        let k = slot.ok_or_else(|| {
            Error::Form(format!("term {} has no slot in the pinned ordering", s.label(n)))
        })?;
        groups[k].op.add_term(s, t.coeff);
    }

    let beta_op = build_h_beta(p, &lay, beta)?;
    let beta_groups = group_by_flip_mask(&beta_op, "beta");
    let plan = TrotterPlan {
        strong: groups.into_iter().filter(|g| !g.op.is_empty()).collect(),
        beta: beta_groups,
    };
    for g in plan.strong.iter().chain(&plan.beta) {
        g.check_commuting()?;
    }
    Ok(plan)
}

/// Splits an operator into groups sharing the same flipped-qubit set, in
/// ascending order of that set.
pub fn group_by_flip_mask(op: &OperatorSum, prefix: &str) -> Vec<TermGroup> {
    let mut by_mask: std::collections::BTreeMap<u128, OperatorSum> = Default::default();
    for t in op.iter() {
        by_mask
            .entry(t.string.x_mask())
            .or_insert_with(|| OperatorSum::zero(op.nqubits()))
            .add_term(t.string, t.coeff);
    }
    by_mask
        .into_iter()
        .map(|(m, g)| TermGroup {
            name: format!("{prefix} {m:#x}"),
            kind: GroupKind::Beta { mask: m },
            op: g,
        })
        .collect()
}

impl TrotterPlan {
    /// Sum of all groups (the Hamiltonian minus its identity part).
    pub fn total(&self) -> Result<OperatorSum> {
        let n = self.strong.first().or(self.beta.first()).map_or(0, |g| g.op.nqubits());
        let mut h = OperatorSum::zero(n);
        for g in self.strong.iter().chain(&self.beta) {
            h = h.add(&g.op)?;
        }
        Ok(h)
    }

    /// Every flip mask used by the plan.
    pub fn flip_masks(&self) -> Vec<u128> {
        let mut m: Vec<u128> = self
            .strong
            .iter()
            .chain(&self.beta)
            .flat_map(|g| g.op.iter().map(|t| t.string.x_mask()).collect::<Vec<_>>())
            .filter(|&x| x != 0)
            .collect();
        m.sort_unstable();
        m.dedup();
        m
    }

    /// `steps` applications of `B(t/steps) S(t/steps)`, optionally leaving
    /// out the first `S`.
    pub fn evolve(
        &self,
        state: &Statevector,
        t: f64,
        steps: usize,
        skip_first_strong: bool,
    ) -> Result<Statevector> {
        if steps == 0 {
            return Err(Error::Params("at least one Trotter step".into()));
        }
        let dt = t / steps as f64;
        let mut psi = state.clone();
        for k in 0..steps {
            if !(k == 0 && skip_first_strong) {
                for g in &self.strong {
                    psi.apply_commuting_exponential(&g.op, dt)?;
                }
            }
            for g in &self.beta {
                psi.apply_commuting_exponential(&g.op, dt)?;
            }
        }
        Ok(psi)
    }
}

/// A plan with every group diagonalized on one sector, for fast repeated use.
pub struct SectorTrotter {
    sector: Arc<SectorSpec>,
    strong: Vec<Eigen>,
    beta: Vec<Eigen>,
}

impl SectorTrotter {
    pub fn new(plan: &TrotterPlan, sector: Arc<SectorSpec>) -> Result<Self> {
        let eig = |g: &TermGroup| -> Result<Eigen> { Ok(dense_eigen(&sector_operator(&g.op, &sector)?)) };
        Ok(SectorTrotter {
            strong: plan.strong.iter().map(eig).collect::<Result<_>>()?,
            beta: plan.beta.iter().map(eig).collect::<Result<_>>()?,
            sector,
        })
    }

    fn apply(e: &Eigen, x: &mut DVector<Complex64>, dt: f64) {
        let mut c = e.vectors.adjoint() * &*x;
        for (k, v) in e.values.iter().enumerate() {
            c[k] *= Complex64::new(0.0, -v * dt).exp();
        }
        *x = &e.vectors * c;
    }

    /// Same product as [`TrotterPlan::evolve`].
    pub fn evolve(
        &self,
        state: &Statevector,
        t: f64,
        steps: usize,
        skip_first_strong: bool,
    ) -> Result<Statevector> {
        if steps == 0 {
            return Err(Error::Params("at least one Trotter step".into()));
        }
        let psi = state.restrict(self.sector.clone())?;
        let mut x = DVector::from_column_slice(psi.amplitudes());
        let dt = t / steps as f64;
        for k in 0..steps {
            if !(k == 0 && skip_first_strong) {
                for e in &self.strong {
                    SectorTrotter::apply(e, &mut x, dt);
                }
            }
            for e in &self.beta {
                SectorTrotter::apply(e, &mut x, dt);
            }
        }
        Statevector::in_sector(self.sector.clone(), x.iter().copied().collect())
    }
}

/// Trotterized decay probabilities of the single-site system.
pub fn trotter_curve(
    sys: &DecaySystem,
    plan: &TrotterPlan,
    times: &[f64],
    steps: usize,
    skip_first_strong: bool,
) -> Result<DecayCurve> {
    let seeds: Vec<u128> = sys.initial.iter().map(|(b, _)| b).collect();
    let sector = Arc::new(SectorSpec::closure(&sys.hamiltonian, &seeds)?);
    let fast = SectorTrotter::new(plan, sector)?;
    let probabilities = times
        .par_iter()
        .map(|&t| decay_probability(&fast.evolve(&sys.initial, t, steps, skip_first_strong)?, &sys.layout))
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayCurve {
        times: times.to_vec(),
        probabilities,
        method: format!("trotter-{steps}"),
    })
}

/// Qubit layout used by the pinned plan.
pub fn benchmark_layout() -> QubitLayout {
    QubitLayout::interleaved(1).expect("single site")
}
