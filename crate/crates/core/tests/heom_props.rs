use std::ops::ControlFlow;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qubit_heom::heom::{
    propagate, propagate_from, read_checkpoint, write_checkpoint, HeomGenerator, HierarchyIndex, HierarchyState,
    IntegratorConfig,
};
use qubit_heom::model::{BathSpec, ModelSpec, SystemSpec};
use qubit_heom::observables::reconstruct_eta;
use qubit_heom::oracle::{
    asymmetric_model, dephasing_max_error, generator_agreement, null_space_vs_propagation, random_hierarchy,
    suite_dephasing_config,
};
use qubit_heom::qstate::DensityMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model() -> impl Strategy<Value = ModelSpec> {
    (0.5..2.0f64, 0.0..2.0f64, 0.0..3.0f64, 0.05..0.5f64, 0.5..3.0f64, 0.0..3.0f64, 0.05..0.5f64, 0.5..3.0f64)
        .prop_map(|(w, ls, l1, g1, t1, l2, g2, t2)| {
            ModelSpec::new(SystemSpec::new(w, ls), BathSpec::new(l1, g1, t1), BathSpec::new(l2, g2, t2))
        })
}

fn hermitian_hierarchy(model: &ModelSpec, depth: usize, rescale: bool, seed: u64) -> HierarchyState {
    let mut s = random_hierarchy(model, depth, rescale, seed).unwrap();
    let indices: Vec<_> = s.indices().collect();
    for idx in indices {
        let h = s.ado(idx).unwrap().hermitian_part();
        s.set_ado(idx, &h).unwrap();
    }
    s
}

fn flat(seed: u64, n: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_is_linear(m in model(), depth in 1usize..8, rescale: bool, seed: u64, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let g = HeomGenerator::new(&m, depth, rescale).unwrap();
        let n = g.dimension();
        let (x, y) = (flat(seed, n), flat(seed ^ 0xabcdef, n));
        let (a, b) = (C64::new(a, 0.3), C64::new(b, -0.7));
        let combo: Vec<C64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (mut lx, mut ly, mut lc) = (vec![C64::default(); n], vec![C64::default(); n], vec![C64::default(); n]);
        g.apply(&x, &mut lx);
        g.apply(&y, &mut ly);
        g.apply(&combo, &mut lc);
        let scale = lc.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let err = lx.iter().zip(&ly).zip(&lc).map(|((p, q), r)| (a * p + b * q - r).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-9 * scale, "err {err:e}");
    }

    #[test]
    fn derivative_preserves_trace_and_hermiticity(m in model(), depth in 1usize..8, rescale: bool, seed: u64) {
        let g = HeomGenerator::new(&m, depth, rescale).unwrap();
        let state = hermitian_hierarchy(&m, depth, rescale, seed);
        let d = g.derivative(&state).unwrap();
        let scale = d.max_norm().max(1.0);
        prop_assert!(d.ado(HierarchyIndex::ROOT).unwrap().trace().norm() < 1e-12 * scale);
        for idx in d.indices() {
            prop_assert!(d.ado(idx).unwrap().hermiticity_deviation() < 1e-12 * scale);
        }
    }
}

fn short_run(m: &ModelSpec, depth: usize, rescale: bool) -> HierarchyState {
    let cfg = IntegratorConfig { dt: 0.01, t_max: 8.0, depth, rescale, ..IntegratorConfig::default() };
    let rho0 = DensityMatrix::pure(&[C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::new(0.64, 0.0), C64::new(0.0, 0.0)])
        .unwrap();
    propagate(&rho0, m, &cfg, |_, _| ControlFlow::Continue(())).unwrap().state
}

#[test]
fn rescaling_does_not_change_physical_results() {
    let m = asymmetric_model();
    for depth in [2, 6, 10] {
        let plain = short_run(&m, depth, false);
        let scaled = short_run(&m, depth, true);
        assert!(plain.rho().max_abs_diff(&scaled.rho()).unwrap() < 1e-10, "depth {depth}");
        for bath in [1, 2] {
            let a = reconstruct_eta(&plain, &m, bath).unwrap();
            let b = reconstruct_eta(&scaled, &m, bath).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-10, "depth {depth} bath {bath}");
        }
    }
}

#[test]
fn engine_matches_dense_generator() {
    assert!(generator_agreement(&asymmetric_model(), 4).unwrap() < 1e-12);
}

#[test]
fn pure_dephasing_matches_closed_form() {
    let err = dephasing_max_error(&suite_dephasing_config(0.02), 20, 0.005).unwrap();
    assert!(err < 1e-6, "{err:e}");
}

#[test]
fn null_space_agrees_with_propagation() {
    let m = ModelSpec::new(SystemSpec::new(1.0, 1.55), BathSpec::new(0.3, 0.3, 2.0), BathSpec::new(0.5, 0.3, 1.0));
    let d = null_space_vs_propagation(&m, 4, 0.01).unwrap();
    assert!(d < 1e-5, "{d:e}");
}

#[test]
fn checkpoint_resume_equals_continuous_run() {
    let m = asymmetric_model();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.ckpt");
    let base = IntegratorConfig { dt: 0.01, depth: 5, ..IntegratorConfig::default() };
    let rho0 = DensityMatrix::maximally_mixed(4).unwrap();

    let full = propagate(&rho0, &m, &IntegratorConfig { t_max: 6.0, ..base.clone() }, |_, _| ControlFlow::Continue(()))
        .unwrap();
    let half = propagate(&rho0, &m, &IntegratorConfig { t_max: 3.0, ..base.clone() }, |_, _| ControlFlow::Continue(()))
        .unwrap();
    write_checkpoint(&path, &half.state, half.t, &m).unwrap();

    let ck = read_checkpoint(&path, &m).unwrap();
    assert_eq!(ck.t, half.t);
    assert_eq!(ck.state, half.state);
    let resumed =
        propagate_from(ck.state, ck.t, &m, &IntegratorConfig { t_max: 6.0, ..base }, |_, _| ControlFlow::Continue(()))
            .unwrap();
    assert_eq!(full.steps, half.steps + resumed.steps);
    assert!(resumed.state.rho().max_abs_diff(&full.state.rho()).unwrap() < 1e-13);

    let other = m.with_coupling(0.9);
    assert!(read_checkpoint(&path, &other).is_err());
}

#[test]
fn hermitian_input_stays_hermitian_under_propagation() {
    let m = asymmetric_model();
    let end = short_run(&m, 6, true);
    for idx in end.indices() {
        assert!(end.ado(idx).unwrap().hermiticity_deviation() < 1e-12);
    }
    assert!((end.rho().trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
}
