//! Builders for every Hamiltonian piece, written in fermionic operators and
//! mapped to qubits through the layout's Jordan-Wigner ordering.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{Field, QubitLayout, Scheme, Species, NCOLORS};
use crate::pauli::{annihilation, creation, OperatorSum, Pauli, PauliString};

/// Physical couplings in lattice units (`a = 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    /// Spatial sites `L`.
    #[serde(rename = "L")]
    pub sites: usize,
    pub m_u: f64,
    pub m_d: f64,
    pub m_e: f64,
    pub m_nu: f64,
    pub g: f64,
    /// Four-Fermi coupling `G`.
    #[serde(rename = "G")]
    pub big_g: f64,
    /// Majorana mass of the neutrino.
    #[serde(default)]
    pub m_majorana: f64,
    #[serde(default = "default_scheme")]
    pub layout: Scheme,
}

fn default_scheme() -> Scheme {
    Scheme::Interleaved
}

impl LatticeParams {
    /// Single-site benchmark: `m_u = 0.9`, `m_d = 2.1`, massless leptons,
    /// `g = 2`, `G = 0.5`.
    pub fn benchmark_l1() -> Self {
        LatticeParams {
            sites: 1,
            m_u: 0.9,
            m_d: 2.1,
            m_e: 0.0,
            m_nu: 0.0,
            g: 2.0,
            big_g: 0.5,
            m_majorana: 0.0,
            layout: Scheme::Interleaved,
        }
    }

    /// Same couplings with the weak interaction switched off.
    pub fn strong_only(&self) -> Self {
        LatticeParams {
            big_g: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(Error::Params("L must be at least 1".into()));
        }
        let vals = [
            self.m_u,
            self.m_d,
            self.m_e,
            self.m_nu,
            self.g,
            self.big_g,
            self.m_majorana,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Params("couplings must be finite".into()));
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<QubitLayout> {
        self.validate()?;
        QubitLayout::new(self.layout, self.sites)
    }

    pub fn mass(&self, f: Field) -> f64 {
        match f {
            Field::Up => self.m_u,
            Field::Down => self.m_d,
            Field::Electron => self.m_e,
            Field::Neutrino => self.m_nu,
        }
    }
}

/// Single-mode data of the free single-site lepton Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TildeCoefficients {
    pub lambda_e: f64,
    pub lambda_nu: f64,
    /// `lambda_e - m_e`.
    pub c_e: f64,
    /// `m_nu + lambda_nu`.
    pub c_nu: f64,
}

/// `lambda = sqrt(1 + 4 m^2) / 2`.
pub fn lambda(m: f64) -> f64 {
    0.5 * (1.0 + 4.0 * m * m).sqrt()
}

impl TildeCoefficients {
    pub fn new(m_e: f64, m_nu: f64) -> Self {
        let lambda_e = lambda(m_e);
        let lambda_nu = lambda(m_nu);
        TildeCoefficients {
            lambda_e,
            lambda_nu,
            c_e: lambda_e - m_e,
            c_nu: m_nu + lambda_nu,
        }
    }

    fn a_e(&self) -> f64 {
        1.0 / (1.0 + 4.0 * self.c_e * self.c_e).sqrt()
    }

    fn a_nu(&self) -> f64 {
        1.0 / (1.0 + 4.0 * self.c_nu * self.c_nu).sqrt()
    }

    /// Weight of the same-half-site quark bilinears in the reduced operator.
    pub fn same_site(&self) -> f64 {
        2.0 * self.a_e() * self.a_nu() * (self.c_e + self.c_nu)
    }

    /// Weight of the cross-half-site quark bilinears (enters with a minus sign).
    pub fn cross_site(&self) -> f64 {
        self.a_e() * self.a_nu() * (1.0 + 4.0 * self.c_e * self.c_nu)
    }

    /// `U[n][k]`: staggered component `n` in terms of tilde mode `k`
    /// (mode 0 has energy `+lambda`, mode 1 has `-lambda`).
    pub fn rotation(&self, f: Field) -> [[f64; 2]; 2] {
        match f {
            Field::Electron => {
                let (a, c) = (self.a_e(), self.c_e);
                [[a, -2.0 * c * a], [2.0 * c * a, a]]
            }
            Field::Neutrino => {
                let (a, c) = (self.a_nu(), self.c_nu);
                [[2.0 * c * a, -a], [a, 2.0 * c * a]]
            }
            _ => panic!("tilde rotation is defined for leptons only"),
        }
    }
}

/// Lepton mode basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeptonBasis {
    /// Local staggered occupations.
    Standard,
    /// Free single-site eigenmodes (single site only).
    Tilde,
}

/// Which beta-decay operator to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaForm {
    /// Local four-Fermi operator, any `L`.
    Standard,
    /// Single-site reduced operator: only the lepton bilinear that can act
    /// on the tilde vacuum.
    Tilde,
    /// Single-site operator with all four tilde lepton bilinears; unitarily
    /// equivalent to `Standard`.
    TildeExact,
    /// Valence-quark part of `Tilde`.
    Valence,
    /// `Standard` in the grouped-lepton layout.
    Grouped,
}

impl BetaForm {
    pub fn lepton_basis(self) -> LeptonBasis {
        match self {
            BetaForm::Standard | BetaForm::Grouped => LeptonBasis::Standard,
            _ => LeptonBasis::Tilde,
        }
    }
}

/// Cached Jordan-Wigner ladder operators for one layout.
struct Modes {
    n: usize,
    cdag: Vec<OperatorSum>,
    c: Vec<OperatorSum>,
}

impl Modes {
    fn new(n: usize) -> Result<Self> {
        let cdag = (0..n).map(|q| creation(q, n)).collect::<Result<Vec<_>>>()?;
        let c = (0..n).map(|q| annihilation(q, n)).collect::<Result<Vec<_>>>()?;
        Ok(Modes { n, cdag, c })
    }

    fn bilinear(&self, a: usize, b: usize) -> OperatorSum {
        self.cdag[a].multiply(&self.c[b]).expect("same register")
    }
}

fn mul(a: &OperatorSum, b: &OperatorSum) -> OperatorSum {
    a.multiply(b).expect("same register")
}

fn acc(total: &mut OperatorSum, piece: &OperatorSum, w: f64) {
    for t in piece.iter() {
        total.add_term(t.string, t.coeff * w);
    }
}

/// Half of the Gell-Mann matrices, `T^a = lambda^a / 2`.
pub fn su3_generators() -> [[[Complex64; 3]; 3]; 8] {
    let z = Complex64::new(0.0, 0.0);
    let r = |x: f64| Complex64::new(x / 2.0, 0.0);
    let i = |x: f64| Complex64::new(0.0, x / 2.0);
    let s3 = 1.0 / 3f64.sqrt();
    [
        [[z, r(1.0), z], [r(1.0), z, z], [z, z, z]],
        [[z, i(-1.0), z], [i(1.0), z, z], [z, z, z]],
        [[r(1.0), z, z], [z, r(-1.0), z], [z, z, z]],
        [[z, z, r(1.0)], [z, z, z], [r(1.0), z, z]],
        [[z, z, i(-1.0)], [z, z, z], [i(1.0), z, z]],
        [[z, z, z], [z, z, r(1.0)], [z, r(1.0), z]],
        [[z, z, z], [z, z, i(-1.0)], [z, i(1.0), z]],
        [[r(s3), z, z], [z, r(s3), z], [z, z, r(-2.0 * s3)]],
    ]
}

fn check_layout(p: &LatticeParams, layout: &QubitLayout) -> Result<()> {
    p.validate()?;
    if layout.sites() != p.sites {
        return Err(Error::Layout(format!(
            "layout has {} sites, parameters {}",
            layout.sites(),
            p.sites
        )));
    }
    Ok(())
}

/// Staggered kinetic and mass terms of one field, with the `+m` shift per
/// site (and colour) that keeps every basis state's mass energy non-negative.
fn staggered_block(
    modes: &Modes,
    layout: &QubitLayout,
    field: Field,
    mass: f64,
    colors: usize,
) -> Result<OperatorSum> {
    let mut h = OperatorSum::zero(modes.n);
    let nst = 2 * layout.sites();
    for c in 0..colors {
        for n in 0..nst {
            let q = layout.staggered(field, n, c)?;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc(&mut h, &modes.bilinear(q, q), sign * mass);
            if n + 1 < nst {
                let q1 = layout.staggered(field, n + 1, c)?;
                acc(&mut h, &modes.bilinear(q, q1).plus_hc(), 0.5);
            }
        }
        h.add_term(
            PauliString::identity(),
            Complex64::new(mass * layout.sites() as f64, 0.0),
        );
    }
    h.normalize();
    Ok(h)
}

/// Quark hopping and mass terms.
pub fn build_h_quarks(p: &LatticeParams, layout: &QubitLayout) -> Result<OperatorSum> {
    check_layout(p, layout)?;
    let modes = Modes::new(layout.nqubits())?;
    let mut h = OperatorSum::zero(modes.n);
    for f in [Field::Up, Field::Down] {
        acc(&mut h, &staggered_block(&modes, layout, f, p.mass(f), NCOLORS)?, 1.0);
    }
    h.normalize();
    Ok(h)
}

/// Free lepton Hamiltonian in the requested basis.
///
/// The tilde basis is only defined on a single site. It carries the same
/// constant `m_e + m_nu` as the standard form so the two are isospectral.
pub fn build_h_leptons(
    p: &LatticeParams,
    layout: &QubitLayout,
    basis: LeptonBasis,
) -> Result<OperatorSum> {
    check_layout(p, layout)?;
    let n = layout.nqubits();
    match basis {
        LeptonBasis::Standard => {
            let modes = Modes::new(n)?;
            let mut h = OperatorSum::zero(n);
            for f in [Field::Electron, Field::Neutrino] {
                acc(&mut h, &staggered_block(&modes, layout, f, p.mass(f), 1)?, 1.0);
            }
            h.normalize();
            Ok(h)
        }
        LeptonBasis::Tilde => {
            if p.sites != 1 {
                return Err(Error::Form("tilde leptons are single-site only".into()));
            }
            let tc = TildeCoefficients::new(p.m_e, p.m_nu);
            let mut h = OperatorSum::identity(n, p.m_e + p.m_nu);
            let z = |sp: Species| -> Result<PauliString> {
                Ok(PauliString::single(layout.index(0, sp, 0)?, Pauli::Z))
            };
            let half = |x: f64| Complex64::new(x / 2.0, 0.0);
            h.add_term(z(Species::Nu)?, half(tc.lambda_nu));
            h.add_term(z(Species::NuBar)?, half(-tc.lambda_nu));
            h.add_term(z(Species::E)?, half(tc.lambda_e));
            h.add_term(z(Species::EBar)?, half(-tc.lambda_e));
            h.normalize();
            Ok(h)
        }
    }
}

/// Colour charge `Q^a` of flavour `f` on staggered half-site `n`.
fn color_charge(
    modes: &Modes,
    layout: &QubitLayout,
    t: &[[Complex64; 3]; 3],
    f: Field,
    n: usize,
) -> Result<OperatorSum> {
    let mut q = OperatorSum::zero(modes.n);
    for c in 0..NCOLORS {
        for c2 in 0..NCOLORS {
            if t[c][c2].norm() == 0.0 {
                continue;
            }
            let a = layout.staggered(f, n, c)?;
            let b = layout.staggered(f, n, c2)?;
            for term in modes.bilinear(a, b).iter() {
                q.add_term(term.string, term.coeff * t[c][c2]);
            }
        }
    }
    q.normalize();
    Ok(q)
}

/// Chromo-electric energy `g^2/2 sum_n sum_a (sum_{m<=n} Q^a_m)^2` in axial gauge
/// with open boundaries, both flavours included in every charge.
pub fn build_h_glue(p: &LatticeParams, layout: &QubitLayout) -> Result<OperatorSum> {
    check_layout(p, layout)?;
    let n = layout.nqubits();
    let mut h = OperatorSum::zero(n);
    if p.g == 0.0 {
        return Ok(h);
    }
    let modes = Modes::new(n)?;
    let gens = su3_generators();
    for t in &gens {
        let mut cumulative = OperatorSum::zero(n);
        for link in 0..(2 * p.sites - 1) {
            for f in [Field::Up, Field::Down] {
                acc(&mut cumulative, &color_charge(&modes, layout, t, f, link)?, 1.0);
            }
            cumulative.normalize();
            acc(&mut h, &mul(&cumulative, &cumulative), 0.5 * p.g * p.g);
        }
    }
    h.normalize();
    Ok(h)
}

/// `c_n` of a lepton field, either local or expanded in tilde modes.
fn lepton_annihilator(
    modes: &Modes,
    layout: &QubitLayout,
    f: Field,
    n: usize,
    tilde: Option<&TildeCoefficients>,
) -> Result<OperatorSum> {
    match tilde {
        None => Ok(modes.c[layout.staggered(f, n, 0)?].clone()),
        Some(tc) => {
            let u = tc.rotation(f);
            let mut out = OperatorSum::zero(modes.n);
            for (k, w) in u[n].iter().enumerate() {
                acc(&mut out, &modes.c[layout.staggered(f, k, 0)?], *w);
            }
            out.normalize();
            Ok(out)
        }
    }
}

fn adjoint_of(op: &OperatorSum) -> OperatorSum {
    // Annihilators are real combinations of sigma^- strings, so the
    // adjoint is the matching creation operator.
    op.adjoint()
}

/// Local four-Fermi operator on every site, optionally with tilde leptons.
fn beta_local(
    p: &LatticeParams,
    layout: &QubitLayout,
    modes: &Modes,
    tilde: Option<&TildeCoefficients>,
) -> Result<OperatorSum> {
    let mut h = OperatorSum::zero(modes.n);
    for l in 0..p.sites {
        let (n0, n1) = (2 * l, 2 * l + 1);
        let e = |n| lepton_annihilator(modes, layout, Field::Electron, n, tilde);
        let nu = |n| lepton_annihilator(modes, layout, Field::Neutrino, n, tilde);
        let edag0 = adjoint_of(&e(n0)?);
        let edag1 = adjoint_of(&e(n1)?);
        let (nu0, nu1) = (nu(n0)?, nu(n1)?);
        let lep_a = mul(&edag0, &nu1).sub(&mul(&edag1, &nu0))?;
        let lep_b = mul(&edag0, &nu0).sub(&mul(&edag1, &nu1))?;
        let mut quark_a = OperatorSum::zero(modes.n);
        let mut quark_b = OperatorSum::zero(modes.n);
        for c in 0..NCOLORS {
            let u = |n| layout.staggered(Field::Up, n, c);
            let d = |n| layout.staggered(Field::Down, n, c);
            acc(&mut quark_a, &modes.bilinear(u(n0)?, d(n0)?), 1.0);
            acc(&mut quark_a, &modes.bilinear(u(n1)?, d(n1)?), 1.0);
            acc(&mut quark_b, &modes.bilinear(u(n0)?, d(n1)?), 1.0);
            acc(&mut quark_b, &modes.bilinear(u(n1)?, d(n0)?), 1.0);
        }
        acc(&mut h, &mul(&quark_a, &lep_a), 1.0);
        acc(&mut h, &mul(&quark_b, &lep_b), 1.0);
    }
    h.normalize();
    Ok(h.plus_hc().scale_real(p.big_g / std::f64::consts::SQRT_2))
}

/// Beta-decay operator in the requested form.
pub fn build_h_beta(p: &LatticeParams, layout: &QubitLayout, form: BetaForm) -> Result<OperatorSum> {
    check_layout(p, layout)?;
    let n = layout.nqubits();
    if form != BetaForm::Standard && form != BetaForm::Grouped && p.sites != 1 {
        return Err(Error::Form(format!("{form:?} beta operator is single-site only")));
    }
    if form == BetaForm::Grouped && layout.scheme() != Scheme::GroupedLeptons {
        return Err(Error::Form("grouped beta operator needs the grouped-lepton layout".into()));
    }
    if p.big_g == 0.0 {
        return Ok(OperatorSum::zero(n));
    }
    let modes = Modes::new(n)?;
    let tc = TildeCoefficients::new(p.m_e, p.m_nu);
    match form {
        BetaForm::Standard | BetaForm::Grouped => beta_local(p, layout, &modes, None),
        BetaForm::TildeExact => beta_local(p, layout, &modes, Some(&tc)),
        BetaForm::Tilde | BetaForm::Valence => {
            let e0 = layout.index(0, Species::E, 0)?;
            let nu1 = layout.index(0, Species::NuBar, 0)?;
            let lep = mul(&modes.cdag[e0], &modes.c[nu1]);
            let mut quark = OperatorSum::zero(n);
            for c in 0..NCOLORS {
                let u = |k| layout.staggered(Field::Up, k, c);
                let d = |k| layout.staggered(Field::Down, k, c);
                acc(&mut quark, &modes.bilinear(u(0)?, d(0)?), tc.same_site());
                if form == BetaForm::Tilde {
                    acc(&mut quark, &modes.bilinear(u(1)?, d(1)?), tc.same_site());
                    acc(&mut quark, &modes.bilinear(u(0)?, d(1)?), -tc.cross_site());
                    acc(&mut quark, &modes.bilinear(u(1)?, d(0)?), -tc.cross_site());
                }
            }
            let h = mul(&quark, &lep);
            Ok(h.plus_hc().scale_real(p.big_g / std::f64::consts::SQRT_2))
        }
    }
}

/// Lepton-number-violating neutrino mass `m_M/2 sum_l (chi_2l chi_2l+1 + h.c.)`.
pub fn build_h_majorana(p: &LatticeParams, layout: &QubitLayout) -> Result<OperatorSum> {
    check_layout(p, layout)?;
    let n = layout.nqubits();
    if p.m_majorana == 0.0 {
        return Ok(OperatorSum::zero(n));
    }
    let modes = Modes::new(n)?;
    let mut h = OperatorSum::zero(n);
    for l in 0..p.sites {
        let a = layout.staggered(Field::Neutrino, 2 * l, 0)?;
        let b = layout.staggered(Field::Neutrino, 2 * l + 1, 0)?;
        acc(&mut h, &mul(&modes.c[a], &modes.c[b]), 1.0);
    }
    h.normalize();
    Ok(h.plus_hc().scale_real(0.5 * p.m_majorana))
}

/// Selection of pieces for [`build_full`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullOptions {
    pub leptons: LeptonBasis,
    /// `None` leaves out the weak interaction.
    pub beta: Option<BetaForm>,
    pub majorana: bool,
}

impl FullOptions {
    /// Single-site tilde leptons with the valence beta operator.
    pub fn valence() -> Self {
        FullOptions {
            leptons: LeptonBasis::Tilde,
            beta: Some(BetaForm::Valence),
            majorana: false,
        }
    }

    pub fn with_beta(beta: BetaForm) -> Self {
        FullOptions {
            leptons: beta.lepton_basis(),
            beta: Some(beta),
            majorana: false,
        }
    }

    /// Strong interactions plus free leptons in the given basis.
    pub fn strong(leptons: LeptonBasis) -> Self {
        FullOptions {
            leptons,
            beta: None,
            majorana: false,
        }
    }
}

/// `H_quarks + H_leptons + H_glue (+ H_beta) (+ H_Majorana)`.
pub fn build_full(p: &LatticeParams, layout: &QubitLayout, opts: FullOptions) -> Result<OperatorSum> {
    if let Some(form) = opts.beta {
        if form.lepton_basis() != opts.leptons {
            return Err(Error::Form(format!(
                "{form:?} beta operator needs {:?} leptons",
                form.lepton_basis()
            )));
        }
    }
    if opts.majorana && opts.leptons == LeptonBasis::Tilde {
        return Err(Error::Form("Majorana term is built for local leptons".into()));
    }
    let mut h = build_h_quarks(p, layout)?;
    h = h.add(&build_h_leptons(p, layout, opts.leptons)?)?;
    h = h.add(&build_h_glue(p, layout)?)?;
    if let Some(form) = opts.beta {
        h = h.add(&build_h_beta(p, layout, form)?)?;
    }
    if opts.majorana {
        h = h.add(&build_h_majorana(p, layout)?)?;
    }
    Ok(h)
}

fn half_z_sum(layout: &QubitLayout, pairs: &[(Species, Species)], colors: usize) -> Result<OperatorSum> {
    let n = layout.nqubits();
    let mut op = OperatorSum::zero(n);
    for l in 0..layout.sites() {
        for &(a, b) in pairs {
            for c in 0..colors {
                for sp in [a, b] {
                    op.add_term(
                        PauliString::single(layout.index(l, sp, c)?, Pauli::Z),
                        Complex64::new(0.5, 0.0),
                    );
                }
            }
        }
    }
    op.normalize();
    Ok(op)
}

/// Net number of `u` quarks, `sum (Z_u + Z_ubar)/2`.
pub fn up_number(layout: &QubitLayout) -> Result<OperatorSum> {
    half_z_sum(layout, &[(Species::U, Species::UBar)], NCOLORS)
}

/// Net number of `d` quarks.
pub fn down_number(layout: &QubitLayout) -> Result<OperatorSum> {
    half_z_sum(layout, &[(Species::D, Species::DBar)], NCOLORS)
}

/// Baryon number, one third of the net quark number.
pub fn baryon_number(layout: &QubitLayout) -> Result<OperatorSum> {
    Ok(up_number(layout)?.add(&down_number(layout)?)?.scale_real(1.0 / 3.0))
}

/// Net electron number.
pub fn electron_number(layout: &QubitLayout) -> Result<OperatorSum> {
    half_z_sum(layout, &[(Species::E, Species::EBar)], 1)
}

/// Net neutrino number.
pub fn neutrino_number(layout: &QubitLayout) -> Result<OperatorSum> {
    half_z_sum(layout, &[(Species::Nu, Species::NuBar)], 1)
}

/// Total lepton number.
pub fn lepton_number(layout: &QubitLayout) -> Result<OperatorSum> {
    electron_number(layout)?.add(&neutrino_number(layout)?)
}

/// `sum_i Z_i`, conserved by every number-conserving term.
pub fn total_z(n: usize) -> OperatorSum {
    let mut op = OperatorSum::zero(n);
    for q in 0..n {
        op.add_term(PauliString::single(q, Pauli::Z), Complex64::new(1.0, 0.0));
    }
    op
}

/// Named Hamiltonian piece, as addressed from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Piece {
    Quarks,
    Leptons,
    Glue,
    Beta,
    Majorana,
    Full,
}
