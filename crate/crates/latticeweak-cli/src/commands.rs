//! One function per subcommand, each returning the artifact text.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use latticeweak::circuits::{ghz_circuits, resource_estimate, state_prep_circuit, trotter_step_circuit, CompileOptions};
use latticeweak::decay_models::{
    delta_width_1p1, ensemble_persistence, exponential_window_fit, neutron_width, phase_space_fprime, NeutronInputs,
};
use latticeweak::evolution::{decay_probability, linear_entropy, time_grid, DecaySystem, ExactMethod};
use latticeweak::hamiltonians::{build_h_beta, build_h_glue, build_h_leptons, build_h_majorana, build_h_quarks};
use latticeweak::simulator::{decay_circuit, decay_estimate, post_select, run, trotter_decay_table, PostSelect};
use latticeweak::spectra::spectrum_table;
use latticeweak::trotter::{benchmark_plan, trotter_curve};
use latticeweak::{build_full, BetaForm, Circuit, EnsembleConfig, FullOptions, LatticeParams};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::artifact::{csv_rows, json_document, num, Header};
use crate::config::{read_json, ParamsArgs};
use crate::error::{CliError, CliResult};

/// Reduced Planck constant in GeV s, for lifetimes.
const HBAR_GEV_S: f64 = 6.582_119_569e-25;
/// Single-site baryon levels whose splitting is the energy release.
const PARENT: &str = "Δ⁻";
const DAUGHTER: &str = "Δ⁰";

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("config types serialize")
}

/// Beta-decay operator forms, as named on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormArg {
    Standard,
    Tilde,
    TildeExact,
    Valence,
    Grouped,
}

impl From<FormArg> for BetaForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Standard => BetaForm::Standard,
            FormArg::Tilde => BetaForm::Tilde,
            FormArg::TildeExact => BetaForm::TildeExact,
            FormArg::Valence => BetaForm::Valence,
            FormArg::Grouped => BetaForm::Grouped,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PieceArg {
    Quarks,
    Leptons,
    Glue,
    Beta,
    Majorana,
    Full,
}

#[derive(Debug, Args)]
pub struct HamArgs {
    #[command(flatten)]
    pub params: ParamsArgs,
    #[arg(long, value_enum)]
    pub piece: PieceArg,
    /// Beta operator form; also fixes the lepton basis.
    #[arg(long, value_enum, default_value = "standard")]
    pub form: FormArg,
    /// Add the Majorana term to `--piece full`.
    #[arg(long)]
    pub majorana: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn ham(a: &HamArgs) -> CliResult<String> {
    let p = a.params.load()?;
    let lay = p.layout()?;
    let form = BetaForm::from(a.form);
    let op = match a.piece {
        PieceArg::Quarks => build_h_quarks(&p, &lay)?,
        PieceArg::Leptons => build_h_leptons(&p, &lay, form.lepton_basis())?,
        PieceArg::Glue => build_h_glue(&p, &lay)?,
        PieceArg::Beta => build_h_beta(&p, &lay, form)?,
        PieceArg::Majorana => build_h_majorana(&p, &lay)?,
        PieceArg::Full => build_full(
            &p,
            &lay,
            FullOptions {
                majorana: a.majorana,
                ..FullOptions::with_beta(form)
            },
        )?,
    };
    let config = json!({"params": to_value(&p), "piece": a.piece, "form": a.form, "majorana": a.majorana});
    let header = Header::new("ham", &config, None);
    Ok(format!(
        "{}# qubits: {}\n# terms: {}\n{}",
        header.comment_lines(),
        op.nqubits(),
        op.len(),
        op.to_dump()
    ))
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub params: ParamsArgs,
    /// Keep only baryon levels up to the all-down state.
    #[arg(long)]
    pub baryons: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn spectrum(a: &SpectrumArgs) -> CliResult<String> {
    let p = a.params.load()?;
    let table = spectrum_table(&p)?;
    let rows: Vec<_> = if a.baryons {
        table.up_to_delta_minus()
    } else {
        table.rows.iter().collect()
    };
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                format!("{:.6}", r.gap),
                r.multiplicity.to_string(),
                r.quarks.0.to_string(),
                r.quarks.1.to_string(),
                r.leptons.to_string(),
            ]
        })
        .collect();
    let config = json!({"params": to_value(&p), "baryons": a.baryons});
    let header = Header::new("spectrum", &config, None);
    Ok(format!(
        "{}# vacuum-energy: {:.12}\n{}",
        header.comment_lines(),
        table.vacuum_energy,
        csv_rows(&["label", "gap", "multiplicity", "n_u", "n_d", "lepton_modes"], &body)?
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    /// Exact propagation in the conserved sector.
    Exact,
    /// Product formula on the state vector.
    Trotter,
    /// Compiled circuits executed from the prepared state.
    Circuit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverArg {
    Eigen,
    Krylov,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub params: ParamsArgs,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: MethodArg,
    /// Trotter steps per evaluation time.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long, default_value_t = 8.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    /// Beta operator; must use tilde leptons.
    #[arg(long, value_enum, default_value = "valence")]
    pub form: FormArg,
    /// Exact propagator.
    #[arg(long, value_enum, default_value = "eigen")]
    pub solver: SolverArg,
    /// Add the linear entropy of the quark qubits (exact method only).
    #[arg(long)]
    pub entropy: bool,
    /// Keep the first strong factor, which the initial eigenstate makes a phase.
    #[arg(long)]
    pub full_first_step: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn evolve(a: &EvolveArgs) -> CliResult<String> {
    let p = a.params.load()?;
    if !(a.dt.is_finite() && a.dt > 0.0 && a.tmax.is_finite() && a.tmax >= 0.0) {
        return Err(CliError::Usage("--dt must be positive and --tmax non-negative".into()));
    }
    if a.entropy && a.method != MethodArg::Exact {
        return Err(CliError::Usage("--entropy needs --method exact".into()));
    }
    if a.method == MethodArg::Circuit && a.form != FormArg::Valence {
        return Err(CliError::Usage("--method circuit compiles the valence operator only".into()));
    }
    let times = time_grid(a.tmax, a.dt);
    let form = BetaForm::from(a.form);
    let mut entropy = None;
    let curve = match a.method {
        MethodArg::Exact => {
            let sys = DecaySystem::new(&p, form)?;
            let solver = match a.solver {
                SolverArg::Eigen => ExactMethod::Eigen,
                SolverArg::Krylov => ExactMethod::Krylov,
            };
            let ev = sys.exact_evolver(solver)?;
            let quarks = sys.layout.particle_quark_qubits();
            let rows = times
                .par_iter()
                .map(|&t| {
                    let psi = ev.evolve(&sys.initial, t)?;
                    let s = if a.entropy { linear_entropy(&psi, &quarks)? } else { 0.0 };
                    Ok((decay_probability(&psi, &sys.layout)?, s))
                })
                .collect::<latticeweak::Result<Vec<_>>>()?;
            if a.entropy {
                entropy = Some(rows.iter().map(|r| r.1).collect::<Vec<_>>());
            }
            rows.into_iter().map(|r| r.0).collect::<Vec<_>>()
        }
        MethodArg::Trotter => {
            let sys = DecaySystem::new(&p, form)?;
            let plan = benchmark_plan(&p, form)?;
            trotter_curve(&sys, &plan, &times, a.steps, !a.full_first_step)?.probabilities
        }
        MethodArg::Circuit => trotter_decay_table(&p, a.steps, &times)?.probabilities,
    };
    let mut columns = vec!["t", "decay_probability"];
    if entropy.is_some() {
        columns.push("linear_entropy");
    }
    let body: Vec<Vec<String>> = times
        .iter()
        .zip(&curve)
        .enumerate()
        .map(|(k, (t, pr))| {
            let mut row = vec![num(*t), num(*pr)];
            if let Some(s) = &entropy {
                row.push(num(s[k]));
            }
            row
        })
        .collect();
    let steps = (a.method != MethodArg::Exact).then_some(a.steps);
    let config = json!({
        "params": to_value(&p), "method": a.method, "steps": steps, "tmax": a.tmax, "dt": a.dt,
        "form": a.form, "solver": a.solver, "entropy": a.entropy, "full_first_step": a.full_first_step,
    });
    let header = Header::new("evolve", &config, None);
    let label = match a.method {
        MethodArg::Exact => "exact".to_string(),
        MethodArg::Trotter => format!("trotter-{}", a.steps),
        MethodArg::Circuit => format!("circuit-{}", a.steps),
    };
    Ok(format!(
        "{}# method: {label}\n{}",
        header.comment_lines(),
        csv_rows(&columns, &body)?
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitKind {
    /// Variational preparation of the initial baryon.
    Prep,
    /// Trotter steps alone.
    Trotter,
    /// Preparation followed by Trotter steps.
    Decay,
    /// Frame change diagonalizing the first hopping family.
    Ghz,
    /// Frame change diagonalizing the second hopping family.
    GhzHat,
}

#[derive(Debug, Args)]
pub struct CircuitArgs {
    #[command(flatten)]
    pub params: ParamsArgs,
    #[arg(long, value_enum)]
    pub kind: CircuitKind,
    /// Evolution time of the Trotter part.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    /// Fold each hopping string in place instead of using a parity ancilla.
    #[arg(long)]
    pub no_ancilla: bool,
    /// Keep adjacent CNOT pairs.
    #[arg(long)]
    pub no_cancel: bool,
    /// Keep the first strong factor.
    #[arg(long)]
    pub full_first_step: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn circuit(a: &CircuitArgs) -> CliResult<String> {
    let p = a.params.load()?;
    if !a.t.is_finite() {
        return Err(CliError::Usage("--t must be finite".into()));
    }
    let opts = CompileOptions {
        ancilla: !a.no_ancilla,
        cancel_cnots: !a.no_cancel,
        skip_first_strong: !a.full_first_step,
    };
    let mut notes = String::new();
    let c: Circuit = match a.kind {
        CircuitKind::Prep => {
            let (c, ang) = state_prep_circuit(&p)?;
            notes = format!(
                "# angles: theta={} theta_1={} theta_11={}\n",
                num(ang.theta),
                num(ang.theta_1),
                num(ang.theta_11)
            );
            c
        }
        CircuitKind::Trotter => {
            let tc = trotter_step_circuit(&benchmark_plan(&p, BetaForm::Valence)?, a.t, a.steps, opts)?;
            if let Some(q) = tc.ancilla {
                notes = format!("# ancilla: {q}\n");
            }
            notes.push_str(&format!("# cancelled-cnots: {}\n", tc.cancelled));
            tc.circuit
        }
        CircuitKind::Decay => decay_circuit(&p, a.t, a.steps, opts)?,
        CircuitKind::Ghz => ghz_circuits().0,
        CircuitKind::GhzHat => ghz_circuits().1,
    };
    let g = c.counts();
    let config = json!({"params": to_value(&p), "kind": a.kind, "t": a.t, "steps": a.steps, "options": to_value(&opts)});
    let header = Header::new("circuit", &config, None);
    Ok(format!(
        "{}{notes}# gates: h={} x={} ry={} rz={} cnot={} reset={}\n# depth: {}\n{}",
        header.comment_lines(),
        g.h,
        g.x,
        g.ry,
        g.rz,
        g.cnot,
        g.reset,
        c.depth(),
        c.to_text()
    ))
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub params: ParamsArgs,
    /// Circuit in the text format written by `circuit`.
    #[arg(long)]
    pub circuit: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Filters: any of `B` (baryon number one), `L` (lepton number zero)
    /// and `A` (ancilla in `|0>`, the highest qubit).
    #[arg(long, default_value = "")]
    pub post_select: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sample(a: &SampleArgs) -> CliResult<String> {
    let p = a.params.load()?;
    let shown = a.circuit.display().to_string();
    let text = std::fs::read_to_string(&a.circuit).map_err(|e| CliError::io(&shown, e))?;
    let c = Circuit::from_text(&text).map_err(|e| CliError::Schema {
        path: shown.clone(),
        message: e.to_string(),
    })?;
    let lay = p.layout()?;
    let mut filters = PostSelect::default();
    for ch in a.post_select.chars() {
        match ch {
            'B' => filters.baryon = true,
            'L' => filters.lepton = true,
            'A' => {
                if c.nqubits() <= lay.nqubits() {
                    return Err(CliError::Usage(format!(
                        "filter A needs an ancilla above the {} register qubits",
                        lay.nqubits()
                    )));
                }
                filters.ancilla = Some(c.nqubits() - 1);
            }
            ',' | ' ' => {}
            other => return Err(CliError::Usage(format!("unknown post-selection filter '{other}'"))),
        }
    }
    if (filters.baryon || filters.lepton) && c.nqubits() < lay.nqubits() {
        return Err(CliError::Usage("charge filters need the full register".into()));
    }
    let raw = run(&c, a.shots, a.seed)?;
    let any = filters.baryon || filters.lepton || filters.ancilla.is_some();
    let res = if any { post_select(&raw, &lay, filters)? } else { raw };
    let decay = if c.nqubits() >= lay.nqubits() {
        let (pr, err) = decay_estimate(&res, &lay)?;
        json!({"probability": pr, "std_error": err})
    } else {
        Value::Null
    };
    let config = json!({
        "params": to_value(&p),
        "circuit_sha256": Header::new("sample", &Value::String(text), None).config_sha256,
        "shots": a.shots, "post_select": to_value(&filters),
    });
    let header = Header::new("sample", &config, Some(a.seed));
    let body = json!({
        "nqubits": res.nqubits, "shots": res.shots, "kept": res.kept,
        "filters": res.filters, "counts": res.counts, "decay": decay,
    });
    Ok(json_document(&header, body))
}

#[derive(Debug, Args)]
pub struct ResourcesArgs {
    /// Spatial site counts.
    #[arg(long, value_delimiter = ',', default_value = "5,10,50,100")]
    pub sites: Vec<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn resources(a: &ResourcesArgs) -> CliResult<String> {
    let body = a
        .sites
        .iter()
        .map(|&l| {
            let r = resource_estimate(l)?;
            Ok([r.sites, r.beta_rz, r.beta_hadamard, r.beta_cnot, r.rz, r.hadamard, r.cnot, r.multi_qubit_terms]
                .iter()
                .map(u64::to_string)
                .collect())
        })
        .collect::<latticeweak::Result<Vec<Vec<String>>>>()?;
    let header = Header::new("resources", &json!({"sites": a.sites}), None);
    Ok(format!(
        "{}{}",
        header.comment_lines(),
        csv_rows(
            &["sites", "beta_rz", "beta_hadamard", "beta_cnot", "rz", "hadamard", "cnot", "multi_qubit_terms"],
            &body
        )?
    ))
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// Base model as JSON; defaults to the reference model.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Final-sector sizes, one curve each (default: the config's, or
    /// 20,50,100,400).
    #[arg(long, value_delimiter = ',')]
    pub yf: Option<Vec<usize>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replace the time grid by `0, dt, ..., tmax`.
    #[arg(long, requires = "dt")]
    pub tmax: Option<f64>,
    #[arg(long, requires = "tmax")]
    pub dt: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn ensemble(a: &EnsembleArgs) -> CliResult<String> {
    let (mut base, default_yf) = match &a.config {
        Some(path) => {
            let c: EnsembleConfig = read_json(path)?;
            let yf = vec![c.final_states];
            (c, yf)
        }
        None => (EnsembleConfig::reference(20, 1), vec![20, 50, 100, 400]),
    };
    if let Some(s) = a.samples {
        base.samples = s;
    }
    if let Some(s) = a.seed {
        base.seed = s;
    }
    if let (Some(tmax), Some(dt)) = (a.tmax, a.dt) {
        if !(dt.is_finite() && dt > 0.0 && tmax.is_finite() && tmax >= 0.0) {
            return Err(CliError::Usage("--dt must be positive and --tmax non-negative".into()));
        }
        base.times = time_grid(tmax, dt);
    }
    let yfs = a.yf.clone().unwrap_or(default_yf);
    if yfs.is_empty() {
        return Err(CliError::Usage("--yf needs at least one size".into()));
    }
    let configs: Vec<EnsembleConfig> = yfs
        .iter()
        .map(|&y| EnsembleConfig {
            final_states: y,
            ..base.clone()
        })
        .collect();
    for c in &configs {
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let curves = configs
        .iter()
        .map(ensemble_persistence)
        .collect::<latticeweak::Result<Vec<_>>>()?;
    let mut notes = String::from(
        "# fit: least squares of A exp(-gamma t) on P, from the first P < 0.95 until P < 1.5 x plateau\n\
         # plateau: mean persistence over the last quarter of the grid\n",
    );
    for c in &curves {
        match exponential_window_fit(c) {
            Ok(f) => notes.push_str(&format!(
                "# fit Y_f={}: gamma={:.6} amplitude={:.6} plateau={:.6} window=[{}, {}] points={} r2={:.6}\n",
                c.final_states,
                f.gamma,
                f.amplitude,
                f.plateau,
                num(f.t_start),
                num(f.t_end),
                f.points,
                f.r_squared
            )),
            Err(e) => notes.push_str(&format!("# fit Y_f={}: unavailable ({e})\n", c.final_states)),
        }
    }
    let names: Vec<String> = yfs.iter().map(|y| format!("P_yf{y}")).collect();
    let mut columns = vec!["t"];
    columns.extend(names.iter().map(String::as_str));
    let body: Vec<Vec<String>> = base
        .times
        .iter()
        .enumerate()
        .map(|(k, t)| {
            std::iter::once(num(*t))
                .chain(curves.iter().map(|c| num(c.persistence[k])))
                .collect()
        })
        .collect();
    let config = json!({"model": to_value(&base), "final_states": yfs});
    let header = Header::new("ensemble", &config, Some(base.seed));
    Ok(format!("{}{notes}{}", header.comment_lines(), csv_rows(&columns, &body)?))
}

#[derive(Debug, Args)]
pub struct WidthsArgs {
    /// Lattice parameters supplying `G` and the default energy release.
    #[command(flatten)]
    pub params: ParamsArgs,
    /// Vector coupling of the lattice baryon transition.
    #[arg(long, default_value_t = 1.0)]
    pub g_v: f64,
    /// Energy release of the lattice decay (default: the level splitting
    /// of the parent and daughter baryons).
    #[arg(long)]
    pub q: Option<f64>,
    /// Neutron inputs as JSON (default: measured constants).
    #[arg(long)]
    pub neutron: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn widths(a: &WidthsArgs) -> CliResult<String> {
    let p: LatticeParams = a.params.load()?;
    let inputs = match &a.neutron {
        Some(path) => read_json::<NeutronInputs>(path)?,
        None => NeutronInputs::physical(),
    };
    let q = match a.q {
        Some(q) => q,
        None => {
            let t = spectrum_table(&p)?;
            let level = |l: &str| {
                t.gap(l)
                    .ok_or_else(|| latticeweak::Error::Sector(format!("no {l} level in the spectrum")))
            };
            level(PARENT)? - level(DAUGHTER)?
        }
    };
    let dm = inputs.m_n - inputs.m_p;
    let y = inputs.m_e / dm;
    let gamma_n = neutron_width(&inputs)?;
    let fprime = phase_space_fprime(y)?;
    let gamma_lat = delta_width_1p1(p.big_g, a.g_v, q)?;
    let config = json!({"params": to_value(&p), "neutron": to_value(&inputs), "g_v": a.g_v, "q": q});
    let header = Header::new("widths", &config, None);
    let body = json!({
        "neutron": {
            "inputs": to_value(&inputs),
            "y": y,
            "fprime": fprime,
            "width_gev": gamma_n,
            "lifetime_s": HBAR_GEV_S / gamma_n,
        },
        "lattice": {
            "G": p.big_g,
            "g_v": a.g_v,
            "q": q,
            "width": gamma_lat,
            "lifetime": 1.0 / gamma_lat,
        },
    });
    Ok(json_document(&header, body))
}
