//! Pauli strings, weighted sums of them, and the Jordan-Wigner ladder operators.
//!
//! Bit ordering: qubit 0 is the least significant bit of a basis index, and
//! string labels are written with qubit 0 rightmost.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Widest register a [`PauliString`] can address.
pub const MAX_QUBITS: usize = 128;
/// Coefficients with modulus below this are dropped on normalization.
pub const DEFAULT_DROP_TOL: f64 = 1e-12;
/// Largest register rendered as a full dense matrix by default.
pub const DEFAULT_DENSE_CAP: usize = 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `i^k` for any integer `k`.
pub fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Single-qubit Pauli symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, stored as X and Z bit masks.
///
/// A qubit with both bits set carries `Y`; the string itself has unit phase,
/// so `Y = i X Z` is accounted for when multiplying or applying.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    x: u128,
    z: u128,
}

impl PauliString {
    pub const fn identity() -> Self {
        PauliString { x: 0, z: 0 }
    }

    pub const fn from_masks(x: u128, z: u128) -> Self {
        PauliString { x, z }
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        PauliString::identity().with(qubit, p)
    }

    /// Product of `Z` over the given qubits.
    pub fn z_on<I: IntoIterator<Item = usize>>(qubits: I) -> Self {
        let z = qubits.into_iter().fold(0u128, |m, q| m ^ (1u128 << q));
        PauliString { x: 0, z }
    }

    /// Returns a copy with qubit `q` replaced by `p`.
    pub fn with(mut self, q: usize, p: Pauli) -> Self {
        let bit = 1u128 << q;
        let (xb, zb) = p.bits();
        self.x = if xb { self.x | bit } else { self.x & !bit };
        self.z = if zb { self.z | bit } else { self.z & !bit };
        self
    }

    pub fn x_mask(&self) -> u128 {
        self.x
    }

    pub fn z_mask(&self) -> u128 {
        self.z
    }

    pub fn get(&self, q: usize) -> Pauli {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn support(&self) -> u128 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    /// Highest qubit index touched plus one (0 for the identity).
    pub fn span(&self) -> usize {
        128 - self.support().leading_zeros() as usize
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Product `self * other` as `(phase, string)`.
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        let out = PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        // Each string is i^{#Y} X^x Z^z; moving Z^z1 past X^x2 costs (-1)^{|z1 & x2|}.
        let k = self.y_count() + other.y_count() + 4 - out.y_count() % 4;
        let sign = if (self.z & other.x).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        (i_pow(k) * sign, out)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Action on a computational basis state: `P|b> = phase |b'>`.
    pub fn apply(&self, b: u128) -> (u128, Complex64) {
        let sign = if (self.z & b).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        (b ^ self.x, i_pow(self.y_count()) * sign)
    }

    /// Eigenvalue of a diagonal string on basis state `b`.
    pub fn diagonal_sign(&self, b: u128) -> f64 {
        debug_assert!(self.is_diagonal());
        if (self.z & b).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// Label of width `n` with qubit 0 rightmost.
    pub fn label(&self, n: usize) -> String {
        (0..n).rev().map(|q| self.get(q).symbol()).collect()
    }

    /// Parses a label written with qubit 0 rightmost.
    pub fn parse(label: &str) -> Result<Self> {
        let n = label.chars().count();
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let mut s = PauliString::identity();
        for (i, c) in label.chars().enumerate() {
            let q = n - 1 - i;
            let p = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Parse(format!("bad Pauli symbol '{other}'"))),
            };
            s = s.with(q, p);
        }
        Ok(s)
    }
}

/// A single weighted Pauli string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: Complex64,
    pub string: PauliString,
}

/// Which ladder operator to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
}

/// Weighted sum of Pauli strings on a fixed register, kept sorted by string.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSum {
    nqubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl OperatorSum {
    /// The zero operator.
    ///
    /// # Panics
    /// If `nqubits` exceeds [`MAX_QUBITS`].
    pub fn zero(nqubits: usize) -> Self {
        assert!(nqubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        OperatorSum {
            nqubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(nqubits: usize, coeff: f64) -> Self {
        OperatorSum::term(nqubits, PauliString::identity(), Complex64::new(coeff, 0.0))
    }

    pub fn term(nqubits: usize, string: PauliString, coeff: Complex64) -> Self {
        let mut s = OperatorSum::zero(nqubits);
        s.add_term(string, coeff);
        s.normalize();
        s
    }

    /// Builds from `(coefficient, label)` pairs; labels have qubit 0 rightmost.
    pub fn from_labels(terms: &[(Complex64, &str)]) -> Result<Self> {
        let n = terms.first().map(|t| t.1.len()).unwrap_or(0);
        let mut s = OperatorSum::zero(n);
        for &(c, label) in terms {
            if label.len() != n {
                return Err(Error::QubitMismatch {
                    left: n,
                    right: label.len(),
                });
            }
            s.add_term(PauliString::parse(label)?, c);
        }
        s.normalize();
        Ok(s)
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = PauliTerm> + '_ {
        self.terms.iter().map(|(s, c)| PauliTerm {
            coeff: *c,
            string: *s,
        })
    }

    pub fn coefficient(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or(ZERO)
    }

    pub fn identity_coefficient(&self) -> Complex64 {
        self.coefficient(&PauliString::identity())
    }

    /// Accumulates a term without dropping small coefficients.
    pub fn add_term(&mut self, string: PauliString, coeff: Complex64) {
        debug_assert!(string.span() <= self.nqubits);
        *self.terms.entry(string).or_insert(ZERO) += coeff;
    }

    /// Drops terms with `|c| < tol`.
    pub fn normalize_with(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() >= tol);
    }

    pub fn normalize(&mut self) {
        self.normalize_with(DEFAULT_DROP_TOL);
    }

    fn check_same(&self, other: &OperatorSum) -> Result<()> {
        if self.nqubits != other.nqubits {
            return Err(Error::QubitMismatch {
                left: self.nqubits,
                right: other.nqubits,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &OperatorSum) -> Result<OperatorSum> {
        self.check_same(other)?;
        let mut out = self.clone();
        for t in other.iter() {
            out.add_term(t.string, t.coeff);
        }
        out.normalize();
        Ok(out)
    }

    pub fn sub(&self, other: &OperatorSum) -> Result<OperatorSum> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> OperatorSum {
        let mut out = OperatorSum::zero(self.nqubits);
        for t in self.iter() {
            out.add_term(t.string, t.coeff * c);
        }
        out.normalize();
        out
    }

    pub fn scale_real(&self, c: f64) -> OperatorSum {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Operator product `self * other`.
    pub fn multiply(&self, other: &OperatorSum) -> Result<OperatorSum> {
        self.check_same(other)?;
        let mut out = OperatorSum::zero(self.nqubits);
        for a in self.iter() {
            for b in other.iter() {
                let (ph, s) = a.string.mul(&b.string);
                out.add_term(s, a.coeff * b.coeff * ph);
            }
        }
        out.normalize();
        Ok(out)
    }

    pub fn commutator(&self, other: &OperatorSum) -> Result<OperatorSum> {
        self.check_same(other)?;
        let mut out = OperatorSum::zero(self.nqubits);
        for a in self.iter() {
            for b in other.iter() {
                if a.string.commutes_with(&b.string) {
                    continue;
                }
                // Anticommuting strings: [A, B] = 2AB.
                let (ph, s) = a.string.mul(&b.string);
                out.add_term(s, a.coeff * b.coeff * ph * 2.0);
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Hermitian conjugate (Pauli strings are hermitian).
    pub fn adjoint(&self) -> OperatorSum {
        OperatorSum {
            nqubits: self.nqubits,
            terms: self.terms.iter().map(|(s, c)| (*s, c.conj())).collect(),
        }
    }

    /// `self + self^dagger`.
    pub fn plus_hc(&self) -> OperatorSum {
        self.add(&self.adjoint()).expect("same register")
    }

    /// Coefficients are real to `tol`, i.e. the sum is closed under conjugation.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(|s| s.is_diagonal())
    }

    /// Embeds into a larger register.
    pub fn widen(&self, nqubits: usize) -> Result<OperatorSum> {
        if nqubits < self.nqubits {
            return Err(Error::QubitMismatch {
                left: self.nqubits,
                right: nqubits,
            });
        }
        Ok(OperatorSum {
            nqubits,
            terms: self.terms.clone(),
        })
    }

    /// Full `2^n x 2^n` matrix; refuses registers above `cap` qubits.
    pub fn dense_matrix(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        if self.nqubits > cap {
            return Err(Error::DenseCap {
                nqubits: self.nqubits,
                cap,
            });
        }
        let dim = 1usize << self.nqubits;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for t in self.iter() {
            for b in 0..dim {
                let (b2, ph) = t.string.apply(b as u128);
                m[(b2 as usize, b)] += t.coeff * ph;
            }
        }
        Ok(m)
    }

    /// Applies the operator to a full statevector.
    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.nqubits;
        if psi.len() != dim {
            return Err(Error::QubitMismatch {
                left: self.nqubits,
                right: psi.len().trailing_zeros() as usize,
            });
        }
        let mut out = vec![ZERO; dim];
        for t in self.iter() {
            for (b, a) in psi.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                let (b2, ph) = t.string.apply(b as u128);
                out[b2 as usize] += t.coeff * ph * a;
            }
        }
        Ok(out)
    }

    /// `<psi|O|psi>` on a full statevector.
    pub fn expectation(&self, psi: &[Complex64]) -> Result<Complex64> {
        let o = self.apply(psi)?;
        Ok(psi.iter().zip(&o).map(|(a, b)| a.conj() * b).sum())
    }

    /// Value of a diagonal operator on basis state `b`.
    pub fn diagonal_value(&self, b: u128) -> f64 {
        self.iter()
            .filter(|t| t.string.is_diagonal())
            .map(|t| t.coeff.re * t.string.diagonal_sign(b))
            .sum()
    }

    /// One term per line: `<re> <im> <label>`, qubit 0 rightmost.
    pub fn to_dump(&self) -> String {
        let mut s = String::new();
        for t in self.iter() {
            s.push_str(&format!(
                "{:.15e} {:.15e} {}\n",
                t.coeff.re,
                t.coeff.im,
                t.string.label(self.nqubits)
            ));
        }
        s
    }

    /// Parses the dump format; blank lines and `#` comments are skipped.
    pub fn from_dump(text: &str) -> Result<OperatorSum> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 fields", i + 1)));
            }
            let re: f64 = f[0]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            let im: f64 = f[1]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            rows.push((Complex64::new(re, im), f[2]));
        }
        OperatorSum::from_labels(&rows)
    }
}

impl fmt::Display for OperatorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dump())
    }
}

/// The bare `sigma^+` or `sigma^-` on one qubit, with no Jordan-Wigner string.
pub fn jw_ladder(qubit: usize, kind: Ladder, nqubits: usize) -> Result<OperatorSum> {
    if qubit >= nqubits {
        return Err(Error::QubitOutOfRange { qubit, nqubits });
    }
    let iy = match kind {
        Ladder::Raise => Complex64::new(0.0, 0.5),
        Ladder::Lower => Complex64::new(0.0, -0.5),
    };
    let mut s = OperatorSum::zero(nqubits);
    s.add_term(PauliString::single(qubit, Pauli::X), ONE * 0.5);
    s.add_term(PauliString::single(qubit, Pauli::Y), iy);
    Ok(s)
}

fn with_string(qubit: usize, kind: Ladder, nqubits: usize) -> Result<OperatorSum> {
    let bare = jw_ladder(qubit, kind, nqubits)?;
    let zs = OperatorSum::term(nqubits, PauliString::z_on(0..qubit), ONE);
    zs.multiply(&bare)
}

/// Fermionic creation operator for the mode stored on `qubit`.
pub fn creation(qubit: usize, nqubits: usize) -> Result<OperatorSum> {
    with_string(qubit, Ladder::Raise, nqubits)
}

/// Fermionic annihilation operator for the mode stored on `qubit`.
pub fn annihilation(qubit: usize, nqubits: usize) -> Result<OperatorSum> {
    with_string(qubit, Ladder::Lower, nqubits)
}

/// Occupation `(1 + Z)/2` of the mode on `qubit`.
pub fn number(qubit: usize, nqubits: usize) -> Result<OperatorSum> {
    if qubit >= nqubits {
        return Err(Error::QubitOutOfRange { qubit, nqubits });
    }
    let mut s = OperatorSum::identity(nqubits, 0.5);
    s.add_term(PauliString::single(qubit, Pauli::Z), ONE * 0.5);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_qubit_products() {
        let x = PauliString::single(0, Pauli::X);
        let y = PauliString::single(0, Pauli::Y);
        let z = PauliString::single(0, Pauli::Z);
        assert_eq!(x.mul(&y), (c(0.0, 1.0), z));
        assert_eq!(y.mul(&x), (c(0.0, -1.0), z));
        assert_eq!(y.mul(&z), (c(0.0, 1.0), x));
        assert_eq!(z.mul(&x), (c(0.0, 1.0), y));
        assert_eq!(y.mul(&y), (c(1.0, 0.0), PauliString::identity()));
    }

    #[test]
    fn ladder_expansion() {
        let r = jw_ladder(0, Ladder::Raise, 1).unwrap();
        assert_eq!(r.coefficient(&PauliString::single(0, Pauli::X)), c(0.5, 0.0));
        assert_eq!(r.coefficient(&PauliString::single(0, Pauli::Y)), c(0.0, 0.5));
        let l = jw_ladder(0, Ladder::Lower, 1).unwrap();
        assert_eq!(l.coefficient(&PauliString::single(0, Pauli::Y)), c(0.0, -0.5));
        assert!(jw_ladder(2, Ladder::Raise, 2).is_err());
    }

    #[test]
    fn raise_lower_is_number() {
        let r = jw_ladder(0, Ladder::Raise, 1).unwrap();
        let l = jw_ladder(0, Ladder::Lower, 1).unwrap();
        assert_eq!(r.multiply(&l).unwrap(), number(0, 1).unwrap());
    }

    #[test]
    fn label_round_trip() {
        let s = PauliString::parse("XIYZ").unwrap();
        assert_eq!(s.get(0), Pauli::Z);
        assert_eq!(s.get(3), Pauli::X);
        assert_eq!(s.label(4), "XIYZ");
    }

    #[test]
    fn dump_round_trip() {
        let op = OperatorSum::from_labels(&[(c(0.25, 0.0), "XZ"), (c(-1.5, 0.5), "IY")]).unwrap();
        let back = OperatorSum::from_dump(&op.to_dump()).unwrap();
        assert_eq!(op, back);
    }

    #[test]
    fn z_on_qubit0_dense() {
        let z = OperatorSum::term(2, PauliString::single(0, Pauli::Z), ONE);
        let m = z.dense_matrix(DEFAULT_DENSE_CAP).unwrap();
        let d: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        assert_eq!(d, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn dense_cap_enforced() {
        let op = OperatorSum::identity(15, 1.0);
        assert!(matches!(
            op.dense_matrix(DEFAULT_DENSE_CAP),
            Err(Error::DenseCap { .. })
        ));
    }

    #[test]
    fn creation_anticommutes() {
        let n = 4;
        let a1 = annihilation(1, n).unwrap();
        let a3d = creation(3, n).unwrap();
        let anti = a1.multiply(&a3d).unwrap().add(&a3d.multiply(&a1).unwrap()).unwrap();
        assert!(anti.is_empty());
        let a1d = creation(1, n).unwrap();
        let anti = a1.multiply(&a1d).unwrap().add(&a1d.multiply(&a1).unwrap()).unwrap();
        assert_eq!(anti, OperatorSum::identity(n, 1.0));
    }
}
