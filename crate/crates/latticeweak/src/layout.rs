//! Qubit layouts: which qubit stores which staggered fermion mode.
//!
//! Every site carries 16 modes: three colours of `u`, `d`, `ubar`, `dbar`
//! and one each of `nu`, `e`, `nubar`, `ebar`. A fermion site is occupied
//! when its qubit reads 0 (spin up) and an antifermion site when it reads 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Modes per spatial site.
pub const MODES_PER_SITE: usize = 16;
/// Number of colours.
pub const NCOLORS: usize = 3;

/// Fermion species on a spatial site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    U,
    D,
    UBar,
    DBar,
    Nu,
    E,
    NuBar,
    EBar,
}

impl Species {
    pub const ALL: [Species; 8] = [
        Species::U,
        Species::D,
        Species::UBar,
        Species::DBar,
        Species::Nu,
        Species::E,
        Species::NuBar,
        Species::EBar,
    ];

    pub fn is_quark(self) -> bool {
        matches!(self, Species::U | Species::D | Species::UBar | Species::DBar)
    }

    pub fn is_antiparticle(self) -> bool {
        matches!(
            self,
            Species::UBar | Species::DBar | Species::NuBar | Species::EBar
        )
    }

    /// Slot within a site in the compact single-site ordering
    /// (`u0..2 d0..2 ubar0..2 dbar0..2 nu e nubar ebar`).
    fn compact_slot(self, color: usize) -> usize {
        match self {
            Species::U => color,
            Species::D => 3 + color,
            Species::UBar => 6 + color,
            Species::DBar => 9 + color,
            Species::Nu => 12,
            Species::E => 13,
            Species::NuBar => 14,
            Species::EBar => 15,
        }
    }

    /// Slot in the per-site staggered block (`u d nu e | ubar dbar nubar ebar`).
    fn block_slot(self, color: usize) -> usize {
        match self {
            Species::U => color,
            Species::D => 3 + color,
            Species::Nu => 6,
            Species::E => 7,
            Species::UBar => 8 + color,
            Species::DBar => 11 + color,
            Species::NuBar => 14,
            Species::EBar => 15,
        }
    }

    /// Qubit value that marks the mode as occupied.
    pub fn occupied_bit(self) -> u8 {
        u8::from(self.is_antiparticle())
    }
}

/// Field whose staggered components live on even (particle) and odd
/// (antiparticle) half-sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Up,
    Down,
    Electron,
    Neutrino,
}

impl Field {
    pub fn particle(self) -> Species {
        match self {
            Field::Up => Species::U,
            Field::Down => Species::D,
            Field::Electron => Species::E,
            Field::Neutrino => Species::Nu,
        }
    }

    pub fn antiparticle(self) -> Species {
        match self {
            Field::Up => Species::UBar,
            Field::Down => Species::DBar,
            Field::Electron => Species::EBar,
            Field::Neutrino => Species::NuBar,
        }
    }

    pub fn is_quark(self) -> bool {
        matches!(self, Field::Up | Field::Down)
    }
}

/// Layout family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Site by site. At `L = 1` this is the compact ordering with leptons on
    /// qubits 12-15; for `L >= 2` each site is a 16-qubit block of particles
    /// followed by antiparticles, giving 7-qubit Jordan-Wigner strings.
    Interleaved,
    /// Quarks of all sites first (12 per site), then leptons (4 per site).
    GroupedLeptons,
    /// An arbitrary relabeling of another layout.
    Custom,
}

/// Bijection from modes to qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitLayout {
    scheme: Scheme,
    sites: usize,
    /// `qubit_of[16 l + compact_slot]`.
    qubit_of: Vec<usize>,
}

impl QubitLayout {
    pub fn new(scheme: Scheme, sites: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::Layout("at least one site is required".into()));
        }
        if sites * MODES_PER_SITE > crate::pauli::MAX_QUBITS {
            return Err(Error::TooManyQubits(sites * MODES_PER_SITE));
        }
        let mut qubit_of = vec![0; sites * MODES_PER_SITE];
        for l in 0..sites {
            for sp in Species::ALL {
                let colors = if sp.is_quark() { NCOLORS } else { 1 };
                for c in 0..colors {
                    let slot = sp.compact_slot(c);
                    let q = match scheme {
                        Scheme::Interleaved if sites == 1 => slot,
                        Scheme::Interleaved => MODES_PER_SITE * l + sp.block_slot(c),
                        Scheme::GroupedLeptons if slot < 12 => 12 * l + slot,
                        Scheme::GroupedLeptons => 12 * sites + 4 * l + (slot - 12),
                        Scheme::Custom => {
                            return Err(Error::Layout(
                                "custom layouts are built with `permuted`".into(),
                            ))
                        }
                    };
                    qubit_of[MODES_PER_SITE * l + slot] = q;
                }
            }
        }
        Ok(QubitLayout {
            scheme,
            sites,
            qubit_of,
        })
    }

    pub fn interleaved(sites: usize) -> Result<Self> {
        QubitLayout::new(Scheme::Interleaved, sites)
    }

    pub fn grouped_leptons(sites: usize) -> Result<Self> {
        QubitLayout::new(Scheme::GroupedLeptons, sites)
    }

    /// Relabels qubits: mode on old qubit `q` moves to `perm[q]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.nqubits();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::Layout(format!("permutation of length {} for {n} qubits", perm.len())));
        }
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::Layout("not a permutation".into()));
            }
            seen[p] = true;
        }
        Ok(QubitLayout {
            scheme: Scheme::Custom,
            sites: self.sites,
            qubit_of: self.qubit_of.iter().map(|&q| perm[q]).collect(),
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn nqubits(&self) -> usize {
        self.qubit_of.len()
    }

    /// Qubit of `(site, species, colour)`; colour is ignored for leptons.
    pub fn index(&self, site: usize, species: Species, color: usize) -> Result<usize> {
        if site >= self.sites {
            return Err(Error::Layout(format!("site {site} outside 0..{}", self.sites)));
        }
        let color = if species.is_quark() {
            if color >= NCOLORS {
                return Err(Error::Layout(format!("colour {color} outside 0..3")));
            }
            color
        } else {
            0
        };
        Ok(self.qubit_of[MODES_PER_SITE * site + species.compact_slot(color)])
    }

    /// Qubit of staggered component `n` of `field` (even `n`: particle site).
    pub fn staggered(&self, field: Field, n: usize, color: usize) -> Result<usize> {
        let sp = if n.is_multiple_of(2) {
            field.particle()
        } else {
            field.antiparticle()
        };
        self.index(n / 2, sp, color)
    }

    /// All `(site, species, colour)` modes in canonical order.
    pub fn modes(&self) -> Vec<(usize, Species, usize)> {
        let mut out = Vec::with_capacity(self.nqubits());
        for l in 0..self.sites {
            for sp in Species::ALL {
                let colors = if sp.is_quark() { NCOLORS } else { 1 };
                for c in 0..colors {
                    out.push((l, sp, c));
                }
            }
        }
        out
    }

    /// Basis index with the given modes occupied and everything else empty.
    pub fn basis_state(&self, occupied: &[(usize, Species, usize)]) -> Result<u128> {
        let mut b = 0u128;
        for (l, sp, c) in self.modes() {
            let occ = occupied.contains(&(l, sp, c));
            let bit = if occ {
                sp.occupied_bit()
            } else {
                1 - sp.occupied_bit()
            };
            if bit == 1 {
                b |= 1u128 << self.index(l, sp, c)?;
            }
        }
        Ok(b)
    }

    /// The bare vacuum: every mode empty.
    pub fn empty_state(&self) -> u128 {
        self.basis_state(&[]).expect("modes are in range")
    }

    /// Quark qubits of the particle (fermion) sites, in site/flavour/colour order.
    pub fn particle_quark_qubits(&self) -> Vec<usize> {
        let mut v = Vec::new();
        for l in 0..self.sites {
            for sp in [Species::U, Species::D] {
                for c in 0..NCOLORS {
                    v.push(self.index(l, sp, c).expect("in range"));
                }
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_order() {
        let lay = QubitLayout::interleaved(1).unwrap();
        assert_eq!(lay.index(0, Species::U, 2).unwrap(), 2);
        assert_eq!(lay.index(0, Species::DBar, 0).unwrap(), 9);
        assert_eq!(lay.index(0, Species::Nu, 0).unwrap(), 12);
        assert_eq!(lay.index(0, Species::E, 0).unwrap(), 13);
        assert_eq!(lay.index(0, Species::NuBar, 0).unwrap(), 14);
        assert_eq!(lay.index(0, Species::EBar, 0).unwrap(), 15);
    }

    #[test]
    fn two_site_blocks() {
        let lay = QubitLayout::interleaved(2).unwrap();
        assert_eq!(lay.index(1, Species::U, 0).unwrap(), 16);
        assert_eq!(lay.index(0, Species::E, 0).unwrap(), 7);
        assert_eq!(lay.index(0, Species::UBar, 1).unwrap(), 9);
        assert_eq!(lay.index(1, Species::EBar, 0).unwrap(), 31);
    }

    #[test]
    fn grouped_places_leptons_last() {
        let lay = QubitLayout::grouped_leptons(2).unwrap();
        assert_eq!(lay.index(1, Species::U, 0).unwrap(), 12);
        assert_eq!(lay.index(0, Species::Nu, 0).unwrap(), 24);
        assert_eq!(lay.index(1, Species::EBar, 0).unwrap(), 31);
        assert_eq!(
            QubitLayout::grouped_leptons(1).unwrap().qubit_of,
            QubitLayout::interleaved(1).unwrap().qubit_of
        );
    }

    #[test]
    fn layouts_are_bijective() {
        for sites in 1..=4 {
            for scheme in [Scheme::Interleaved, Scheme::GroupedLeptons] {
                let lay = QubitLayout::new(scheme, sites).unwrap();
                let mut q = lay.qubit_of.clone();
                q.sort_unstable();
                assert_eq!(q, (0..16 * sites).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn empty_state_bits() {
        let lay = QubitLayout::interleaved(1).unwrap();
        // Particles empty read 1, antiparticles empty read 0.
        assert_eq!(lay.empty_state(), 0b0011_0000_0011_1111);
        let dm = lay
            .basis_state(&[(0, Species::D, 0), (0, Species::D, 1), (0, Species::D, 2)])
            .unwrap();
        assert_eq!(dm, 0b0011_0000_0000_0111);
    }

    #[test]
    fn rejects_bad_indices() {
        let lay = QubitLayout::interleaved(1).unwrap();
        assert!(lay.index(1, Species::U, 0).is_err());
        assert!(lay.index(0, Species::U, 3).is_err());
        assert!(lay.permuted(&[0; 16]).is_err());
    }
}
