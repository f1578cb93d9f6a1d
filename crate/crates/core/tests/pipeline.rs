use qdyn::trotter::DEFAULT_SUBSTEPS;
use qdyn::workflow::run_workflow;
use qdyn::{
    ds_compile, exact_evolution, generate_circuits, simulate_series, Axis, CircuitSeries, FieldProfile,
    HeisenbergModel, NativeTarget, RunConfig, SimulationPlan, Spin,
};

fn heisenberg() -> HeisenbergModel {
    HeisenbergModel {
        jx: 0.8,
        jy: -0.3,
        jz: 1.1,
        field: FieldProfile::Constant { amplitude: 0.4 },
        ext_dir: Axis::Y,
        hbar_scale: 1.0,
    }
}

#[test]
fn each_circuit_extends_the_previous_one() {
    let plan = SimulationPlan::new(4, 0.1, 6).with_spins(vec![Spin::Down, Spin::Up, Spin::Up, Spin::Down]);
    let series = generate_circuits(&heisenberg(), &plan).unwrap();
    for w in series.programs.windows(2) {
        assert!(w[1].gates().starts_with(w[0].gates()));
    }
}

#[test]
fn gate_count_grows_linearly_with_model_terms() {
    // per bond: 7 gates for XX, 7 for YY, 3 for ZZ; one rotation per spin for the field
    let cases = [
        (heisenberg(), 5, 5 + 4 * 17),
        (HeisenbergModel::tfim(1.0, 0.5), 5, 5 + 4 * 3),
        (HeisenbergModel::xx_chain(1.0), 6, 5 * 14),
        (HeisenbergModel::default(), 3, 0),
    ];
    for (model, n, slope) in cases {
        let series = generate_circuits(&model, &SimulationPlan::new(n, 0.1, 5)).unwrap();
        let lens: Vec<usize> = series.programs.iter().map(|p| p.len()).collect();
        for w in lens.windows(2) {
            assert_eq!(w[1] - w[0], slope, "{model:?}");
        }
    }
}

fn compiled(series: &CircuitSeries, target: NativeTarget) -> CircuitSeries {
    CircuitSeries {
        programs: series.programs.iter().map(|p| ds_compile(p, target).unwrap().program).collect(),
        delta_t: series.delta_t,
    }
}

#[test]
fn compiled_series_simulate_like_the_originals() {
    let plan = SimulationPlan::new(4, 0.1, 6).with_spins(vec![Spin::Up, Spin::Down, Spin::Down, Spin::Up]);
    for model in [heisenberg(), HeisenbergModel::tfim(1.0, 0.7), HeisenbergModel::xx_chain(0.5)] {
        let series = generate_circuits(&model, &plan).unwrap();
        let reference = simulate_series(&series, &plan).unwrap();
        for target in [NativeTarget::Ibm, NativeTarget::Rigetti] {
            let native = compiled(&series, target);
            assert!(native.programs.iter().all(|p| target.conforms_all(p)));
            let mags = simulate_series(&native, &plan).unwrap();
            assert!(mags.max_deviation(&reference) < 1e-8, "{target}: {}", mags.max_deviation(&reference));
        }
    }
}

fn domain_wall_error(dt: f64) -> f64 {
    use Spin::{Down, Up};
    let model = HeisenbergModel::xx_chain(1.0);
    let plan = SimulationPlan::new(6, dt, (2.0 / dt).round() as usize).with_spins(vec![Up, Up, Up, Down, Down, Down]);
    let mags = simulate_series(&generate_circuits(&model, &plan).unwrap(), &plan).unwrap();
    mags.max_deviation(&exact_evolution(&model, &plan, DEFAULT_SUBSTEPS).unwrap())
}

#[test]
fn trotter_error_halves_with_the_step() {
    let coarse = domain_wall_error(0.05);
    let fine = domain_wall_error(0.025);
    assert!(coarse < 0.2, "{coarse}");
    let ratio = fine / coarse;
    assert!((0.25..=0.75).contains(&ratio), "{ratio}");
}

#[test]
fn workflow_tfim_run_tracks_the_oracle() {
    let cfg = RunConfig::parse("Jz = 1.0\next_dir = x\nh_ext = 0.5\nnum_qubits = 5\ndelta_t = 0.05\nsteps = 40\nplot_flag = false").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let artifacts = run_workflow(&cfg, dir.path()).unwrap();
    assert!(artifacts.plot.is_none());
    let model = cfg.model().unwrap();
    let oracle = exact_evolution(&model, &cfg.plan(), DEFAULT_SUBSTEPS).unwrap();
    for (q, path) in artifacts.data_files.iter().enumerate() {
        let text = std::fs::read_to_string(path).unwrap();
        let rows: Vec<(f64, f64)> = text
            .lines()
            .skip(1)
            .map(|l| {
                let (t, v) = l.split_once(',').unwrap();
                (t.parse().unwrap(), v.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), 41);
        for (k, (t, v)) in rows.iter().enumerate() {
            assert_eq!(*t, oracle.times[k]);
            assert!((-1.0..=1.0).contains(v));
            assert!((v - oracle.values[q][k]).abs() < 2e-3, "qubit {q} t {t}");
        }
    }
}

#[test]
fn ev_fs_units_rescale_time() {
    let base = "Jx = 1\nJy = 1\nnum_qubits = 2\ninitial_spins = up,down\nsteps = 20\nplot_flag = false\n";
    let dimensionless = RunConfig::parse(&format!("{base}delta_t = 0.05")).unwrap();
    let hbar = qdyn::hamiltonian::HBAR_EV_FS;
    let ev = RunConfig::parse(&format!("{base}delta_t = {}\nunits = ev_fs", 0.05 * hbar)).unwrap();
    let a = simulate_series(&generate_circuits(&dimensionless.model().unwrap(), &dimensionless.plan()).unwrap(), &dimensionless.plan()).unwrap();
    let b = simulate_series(&generate_circuits(&ev.model().unwrap(), &ev.plan()).unwrap(), &ev.plan()).unwrap();
    assert!(a.max_deviation(&b) < 1e-9);
}
