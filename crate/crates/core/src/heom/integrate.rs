//! Fixed-step RK4 propagation of the full hierarchy and steady-state
//! detection.

use std::collections::VecDeque;
use std::ops::ControlFlow;

use num_complex::Complex64 as C64;

use super::generator::HeomGenerator;
use super::hierarchy::HierarchyState;
use super::{HeomError, IntegratorConfig, Result};
use crate::model::ModelSpec;
use crate::qstate::{hermitian_eigensystem, ComplexMatrix, DensityMatrix, ZERO};

const BLOWUP_NORM: f64 = 1e12;

/// End point of a propagation.
#[derive(Clone, Debug)]
pub struct Propagation {
    pub t: f64,
    pub steps: usize,
    pub state: HierarchyState,
}

/// Result of steady-state detection.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    pub hierarchy: HierarchyState,
    /// Time at which the window criterion was met; NaN for direct solves.
    pub t_converged: f64,
    pub converged: bool,
    /// Last window trace distance (0 for direct solves).
    pub distance: f64,
}

impl SteadyState {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(HeomError::NotConverged { t_max: self.t_converged, distance: self.distance })
        }
    }
}

struct Rk4 {
    generator: HeomGenerator,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(generator: HeomGenerator) -> Self {
        let n = generator.dimension();
        Self { generator, k: std::array::from_fn(|_| vec![ZERO; n]), tmp: vec![ZERO; n] }
    }

    fn step(&mut self, y: &mut [C64], dt: f64) {
        let g = &self.generator;
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        g.apply(y, k1);
        axpy_into(tmp, y, 0.5 * dt, k1);
        g.apply(tmp, k2);
        axpy_into(tmp, y, 0.5 * dt, k2);
        g.apply(tmp, k3);
        axpy_into(tmp, y, dt, k3);
        g.apply(tmp, k4);
        let w = dt / 6.0;
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }
}

fn axpy_into(out: &mut [C64], y: &[C64], a: f64, k: &[C64]) {
    for ((o, y), k) in out.iter_mut().zip(y).zip(k) {
        *o = y + k * a;
    }
}

fn blowup_norm(y: &[C64]) -> Option<f64> {
    let mut worst = 0.0f64;
    for z in y {
        let m = z.re.abs().max(z.im.abs());
        if !m.is_finite() {
            return Some(f64::NAN);
        }
        worst = worst.max(m);
    }
    (worst > BLOWUP_NORM).then_some(worst)
}

/// Propagates from `zeta_00 = initial` with every other ADO zero.
///
/// The observer sees `(t, state)` at `t = 0` and every `record_every`
/// steps; returning `Break` stops early.
pub fn propagate<F>(
    initial: &DensityMatrix,
    model: &ModelSpec,
    cfg: &IntegratorConfig,
    observer: F,
) -> Result<Propagation>
where
    F: FnMut(f64, &HierarchyState) -> ControlFlow<()>,
{
    cfg.validate()?;
    let generator = HeomGenerator::new(model, cfg.depth, cfg.rescale)?;
    let state = generator.initial_state(initial.matrix())?;
    run(generator, state, 0.0, model, cfg, observer)
}

/// Continues propagation of an existing hierarchy from time `t0` to `cfg.t_max`.
pub fn propagate_from<F>(
    state: HierarchyState,
    t0: f64,
    model: &ModelSpec,
    cfg: &IntegratorConfig,
    observer: F,
) -> Result<Propagation>
where
    F: FnMut(f64, &HierarchyState) -> ControlFlow<()>,
{
    cfg.validate()?;
    let generator = HeomGenerator::with_scaling(model, state.depth(), state.scaling())?;
    run(generator, state, t0, model, cfg, observer)
}

fn run<F>(
    generator: HeomGenerator,
    mut state: HierarchyState,
    t0: f64,
    model: &ModelSpec,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<Propagation>
where
    F: FnMut(f64, &HierarchyState) -> ControlFlow<()>,
{
    generator.check_state(&state)?;
    cfg.warn_if_coarse(model);
    let total = ((cfg.t_max - t0) / cfg.dt).round().max(0.0) as usize;
    let mut rk = Rk4::new(generator);
    let mut t = t0;
    let mut steps = 0;
    if observer(t, &state).is_break() {
        return Ok(Propagation { t, steps, state });
    }
    while steps < total {
        rk.step(state.raw_mut(), cfg.dt);
        steps += 1;
        t = t0 + steps as f64 * cfg.dt;
        if let Some(norm) = blowup_norm(state.raw()) {
            return Err(HeomError::NumericalBlowup { t, norm });
        }
        if steps % cfg.record_every == 0 && observer(t, &state).is_break() {
            break;
        }
    }
    Ok(Propagation { t, steps, state })
}

/// Trace distance between two Hermitian matrices of equal trace.
pub(crate) fn matrix_trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let d = (a - b).hermitian_part();
    Ok(0.5 * hermitian_eigensystem(&d)?.values.iter().map(|v| v.abs()).sum::<f64>())
}

pub(crate) fn density_from(m: &ComplexMatrix) -> Result<DensityMatrix> {
    let h = m.hermitian_part();
    let tr = h.trace().re;
    Ok(DensityMatrix::new(h.scale_real(1.0 / tr))?)
}

/// Propagates from `initial` until `rho(t)` and `rho(t - window)` are within
/// `steady_tol` in trace distance, or `t_max` is reached.
///
/// Reaching `t_max` is not an error: the result carries `converged = false`.
pub fn find_steady_state(
    initial: &DensityMatrix,
    model: &ModelSpec,
    cfg: &IntegratorConfig,
) -> Result<SteadyState> {
    cfg.validate()?;
    let generator = HeomGenerator::new(model, cfg.depth, cfg.rescale)?;
    let state = generator.initial_state(initial.matrix())?;
    steady_run(generator, state, 0.0, model, cfg)
}

/// Steady-state search continuing from an existing hierarchy at time `t0`.
pub fn find_steady_state_from(
    state: HierarchyState,
    t0: f64,
    model: &ModelSpec,
    cfg: &IntegratorConfig,
) -> Result<SteadyState> {
    cfg.validate()?;
    let generator = HeomGenerator::with_scaling(model, state.depth(), state.scaling())?;
    steady_run(generator, state, t0, model, cfg)
}

const SNAPSHOTS_PER_WINDOW: usize = 8;

fn steady_run(
    generator: HeomGenerator,
    state: HierarchyState,
    t0: f64,
    model: &ModelSpec,
    cfg: &IntegratorConfig,
) -> Result<SteadyState> {
    let window = cfg.window_for(model);
    let stride = ((window / SNAPSHOTS_PER_WINDOW as f64) / cfg.dt).round().max(1.0) as usize;
    let lag = ((window / cfg.dt) / stride as f64).round().max(1.0) as usize;
    let mut inner = cfg.clone();
    inner.record_every = stride;

    let mut ring: VecDeque<ComplexMatrix> = VecDeque::with_capacity(lag + 1);
    let mut hit: Option<(f64, f64)> = None;
    let mut distance = f64::INFINITY;
    let mut failure = None;
    let end = run(generator, state, t0, model, &inner, |t, s| {
        let rho = s.rho();
        if ring.len() == lag {
            let old = ring.pop_front().expect("non-empty");
            match matrix_trace_distance(&rho, &old) {
                Ok(d) => {
                    distance = d;
                    if d < cfg.steady_tol {
                        hit = Some((t, d));
                        return ControlFlow::Break(());
                    }
                }
                Err(e) => {
                    failure = Some(e);
                    return ControlFlow::Break(());
                }
            }
        }
        ring.push_back(rho);
        ControlFlow::Continue(())
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let rho = density_from(&end.state.rho())?;
    Ok(match hit {
        Some((t, d)) => SteadyState {
            rho,
            hierarchy: end.state,
            t_converged: t,
            converged: true,
            distance: d,
        },
        None => SteadyState {
            rho,
            hierarchy: end.state,
            t_converged: end.t,
            converged: false,
            distance,
        },
    })
}
