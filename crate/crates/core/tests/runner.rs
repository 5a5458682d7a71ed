use qubit_heom::heom::{find_steady_state, solve_stationary};
use qubit_heom::qstate::{trace_distance, DensityMatrix};
use qubit_heom::runner::{
    read_csv, run_equilibrium_sweep, run_ness_sweep, run_relax, GridSpec, InitialState, SweepConfig,
};

fn small_config(dir: &std::path::Path) -> SweepConfig {
    let mut cfg = SweepConfig::default();
    cfg.grid = GridSpec::Log { log_start: 0.01, log_stop: 1.0, points: 5 };
    cfg.integrator.depth = 8;
    cfg.output_dir = dir.to_path_buf();
    cfg
}

// records carry NaN (`t_converged` of direct solves), so compare by Debug text
#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = run_equilibrium_sweep(&cfg).unwrap();
    let (back, times) = read_csv(&out.csv).unwrap();
    assert!(times.is_none());
    assert_eq!(format!("{back:?}"), format!("{:?}", out.records()));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_ness_sweep(&small_config(a.path()), 2.0, 1.0).unwrap();
    let rb = run_ness_sweep(&small_config(b.path()), 2.0, 1.0).unwrap();
    for (x, y) in [(&ra.ness.csv, &rb.ness.csv), (&ra.effective.csv, &rb.effective.csv)] {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
    // sidecars differ only through output_dir inside the embedded config
    let strip = |p: &std::path::Path| {
        let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap();
        v["config"]["output_dir"] = serde_json::Value::Null;
        v["config_sha256"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(&ra.ness.sidecar), strip(&rb.ness.sidecar));
}

#[test]
fn parallelism_does_not_change_results() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let serial = small_config(a.path());
    let mut parallel = small_config(b.path());
    parallel.parallelism = 3;
    parallel.initial_states = vec![InitialState::Ground, InitialState::RandomPure { seed: 3 }];
    let mut serial2 = serial.clone();
    serial2.initial_states = parallel.initial_states.clone();
    let ra = run_equilibrium_sweep(&serial2).unwrap().records();
    let rb = run_equilibrium_sweep(&parallel).unwrap().records();
    assert_eq!(ra.len(), rb.len());
    for (x, y) in ra.iter().zip(&rb) {
        assert_eq!(x.lambda_b, y.lambda_b);
        assert!(x.rho_energy.max_abs_diff(&y.rho_energy).unwrap() <= 1e-12);
        assert!((x.j1 - y.j1).abs() <= 1e-12);
    }
}

#[test]
fn relaxation_ends_at_the_steady_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.relax.lambda_b = 0.5;
    cfg.integrator.depth = 6;
    cfg.integrator.dt = 0.02;
    cfg.integrator.t_max = 1500.0;
    cfg.integrator.record_every = 5000;
    let out = run_relax(&cfg).unwrap();
    assert_eq!(out.times.len(), out.records.len());
    assert_eq!(*out.times.last().unwrap(), 1500.0);
    let (back, times) = read_csv(&out.csv).unwrap();
    assert_eq!(times.unwrap(), out.times);
    assert_eq!(format!("{back:?}"), format!("{:?}", out.records));

    let model = cfg.model(0.5);
    let rho0 = cfg.initial_states[0].density(&cfg.system).unwrap();
    let searched = find_steady_state(&rho0, &model, &cfg.integrator).unwrap().require_converged().unwrap();
    let end = DensityMatrix::normalized(&out.final_state.rho()).unwrap();
    assert!(trace_distance(&end, &searched.rho).unwrap() < 1e-5);
    let direct = solve_stationary(&model, 6, true).unwrap();
    assert!(trace_distance(&end, &direct.rho).unwrap() < 1e-5);
}
