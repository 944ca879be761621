//! Criterion benchmarks of the hot paths: Pauli algebra, sector
//! diagonalization, circuit execution and ensemble sampling.

use std::hint::black_box;

use criterion::Criterion;
use latticeweak::circuits::{trotter_step_circuit, CompileOptions};
use latticeweak::decay_models::draw_sample;
use latticeweak::evolution::{support, DecaySystem, ExactMethod};
use latticeweak::simulator::execute;
use latticeweak::spectra::{dense_eigen, sector_operator, SectorSpec};
use latticeweak::trotter::benchmark_plan;
use latticeweak::{BetaForm, EnsembleConfig, LatticeParams, PauliString};

/// Registers every benchmark on `c`.
pub fn benchmarks(c: &mut Criterion) {
    pauli(c);
    diagonalize(c);
    circuits(c);
    ensemble(c);
}

fn pauli(c: &mut Criterion) {
    let a = PauliString::parse("XYZZIXYZXXYZIZYX").unwrap();
    let b = PauliString::parse("ZZXYIYXZZYXIXZYY").unwrap();
    c.bench_function("pauli/string_mul", |bench| bench.iter(|| black_box(&a).mul(black_box(&b))));
    let sys = DecaySystem::new(&LatticeParams::benchmark_l1(), BetaForm::Valence).unwrap();
    let h = &sys.hamiltonian;
    c.bench_function("pauli/hamiltonian_square", |bench| bench.iter(|| h.multiply(black_box(h)).unwrap()));
}

fn diagonalize(c: &mut Criterion) {
    let sys = DecaySystem::new(&LatticeParams::benchmark_l1(), BetaForm::Valence).unwrap();
    let seeds = support(&sys.initial, 0.0);
    let sector = SectorSpec::closure(&sys.hamiltonian, &seeds).unwrap();
    let op = sector_operator(&sys.hamiltonian, &sector).unwrap();
    let mut g = c.benchmark_group("spectra");
    g.sample_size(10);
    g.bench_function("decay_sector_dense", |bench| bench.iter(|| dense_eigen(black_box(&op))));
    g.bench_function("decay_sector_evolver", |bench| {
        bench.iter(|| sys.exact_evolver(ExactMethod::Eigen).unwrap())
    });
    g.finish();
}

fn circuits(c: &mut Criterion) {
    let plan = benchmark_plan(&LatticeParams::benchmark_l1(), BetaForm::Valence).unwrap();
    let tc = trotter_step_circuit(&plan, 1.0, 1, CompileOptions::default()).unwrap();
    let mut g = c.benchmark_group("circuits");
    g.sample_size(10);
    g.bench_function("compile_two_steps", |bench| {
        bench.iter(|| trotter_step_circuit(&plan, black_box(1.0), 2, CompileOptions::default()).unwrap())
    });
    g.bench_function("execute_one_step", |bench| bench.iter(|| execute(black_box(&tc.circuit), None).unwrap()));
    g.finish();
}

fn ensemble(c: &mut Criterion) {
    let cfg = EnsembleConfig::reference(400, 1);
    let mut g = c.benchmark_group("ensemble");
    g.sample_size(10);
    g.bench_function("sample_yf400", |bench| {
        let mut k = 0;
        bench.iter(|| {
            k += 1;
            draw_sample(&cfg, k).unwrap().persistence(&cfg.times)
        })
    });
    g.finish();
}
