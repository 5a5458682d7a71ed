//! Independent checks of the hierarchy engine: a closed-form pure-dephasing
//! solution (with a quadrature cross-check), a dense generator matrix built
//! from Kronecker superoperators in the product basis, and the weak-coupling
//! Gibbs limit.

use std::ops::ControlFlow;

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::heom::{
    heom_rhs, propagate, scaling_for, steady_state, HeomError, HierarchyIndex, HierarchyState,
    IntegratorConfig, SteadyMethod,
};
use crate::model::{
    coupling_operator, gibbs_state, pointer_basis, BathSpec, ModelError, ModelSpec, SystemSpec,
};
use crate::observables::{reconstruct_eta, ObservableError};
use crate::qstate::{
    fidelity, trace_distance, ComplexMatrix, DensityMatrix, QStateError, I, ONE, ZERO,
};

/// Largest depth the dense generator is built for.
pub const DENSE_DEPTH_LIMIT: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("eigendecomposition of the dense generator failed")]
    Eigen,
    #[error("time grid must be non-negative and non-decreasing")]
    BadTimeGrid,
    #[error(transparent)]
    Heom(#[from] HeomError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    QState(#[from] QStateError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
}

pub type Result<T> = std::result::Result<T, OracleError>;

// ---------------------------------------------------------------------------
// pure dephasing

/// Pure dephasing of one pointer-basis coherence: `H_S = 0`, so both
/// coupling operators commute with the system Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct DephasingConfig {
    pub bath: BathSpec,
    /// `<p_1|rho|p_3>` at `t = 0`; the pair differs only in qubit 1.
    pub initial_coherence: C64,
    pub t_grid: Vec<f64>,
}

/// Decoherence exponent for a coherence between states whose coupling
/// eigenvalues differ by 2:
/// `4 lambda [(2/beta - gamma Delta)(gamma t - 1 + e^{-gamma t})/gamma^2 + Delta t]`.
pub fn decoherence_exponent(bath: &BathSpec, t: f64) -> f64 {
    let g = bath.gamma;
    let smooth = bath.noise_amplitude() * (g * t - 1.0 + (-g * t).exp()) / (g * g);
    4.0 * bath.lambda_b * (smooth + bath.delta() * t)
}

/// The same exponent from nested Gauss-Legendre quadrature of the noise
/// kernel `Re C(u) = lambda (2/beta - gamma Delta) e^{-gamma u} + 2 lambda Delta delta(u)`;
/// the delta part integrates to `lambda Delta t` exactly.
pub fn decoherence_exponent_quadrature(bath: &BathSpec, t: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(48);
    let kernel = |u: f64| bath.lambda_b * bath.noise_amplitude() * (-bath.gamma * u).exp();
    let inner = |s: f64| integrate(&nodes, &weights, 0.0, s, kernel);
    let smooth = integrate(&nodes, &weights, 0.0, t, inner);
    4.0 * (smooth + bath.lambda_b * bath.delta() * t)
}

fn integrate(nodes: &[f64], weights: &[f64], a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * nodes.iter().zip(weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

pub fn dephasing_coherence(cfg: &DephasingConfig, t: f64) -> C64 {
    cfg.initial_coherence * (-decoherence_exponent(&cfg.bath, t)).exp()
}

/// `omega0 = lambda_S = 0`, both qubits coupled to copies of `bath`.
pub fn dephasing_model(bath: &BathSpec) -> ModelSpec {
    ModelSpec::new(SystemSpec::new(0.0, 0.0), *bath, *bath)
}

/// Equal populations of `|p_1>` and `|p_3>` with the given coherence.
pub fn dephasing_initial_state(coherence: C64) -> Result<ComplexMatrix> {
    let mut m = ComplexMatrix::zeros(4)?;
    m[(0, 0)] = ONE * 0.5;
    m[(2, 2)] = ONE * 0.5;
    m[(0, 2)] = coherence;
    m[(2, 0)] = coherence.conj();
    Ok(m.from_basis(&pointer_basis())?)
}

/// HEOM coherence `<p_1|zeta_00|p_3>` at each point of `cfg.t_grid`
/// (rounded to the nearest step).
pub fn heom_dephasing(cfg: &DephasingConfig, depth: usize, dt: f64) -> Result<Vec<C64>> {
    if cfg.t_grid.iter().any(|t| *t < 0.0) || cfg.t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(OracleError::BadTimeGrid);
    }
    let Some(&t_end) = cfg.t_grid.last() else {
        return Ok(Vec::new());
    };
    let model = dephasing_model(&cfg.bath);
    let icfg = IntegratorConfig {
        dt,
        depth,
        t_max: t_end.max(dt),
        record_every: 1,
        ..IntegratorConfig::default()
    };
    let steps: Vec<usize> = cfg.t_grid.iter().map(|t| (t / dt).round() as usize).collect();
    let rho0 = DensityMatrix::new(dephasing_initial_state(cfg.initial_coherence)?)?;
    let basis = pointer_basis();
    let mut out = Vec::with_capacity(steps.len());
    let mut step = 0usize;
    let mut failure = None;
    propagate(&rho0, &model, &icfg, |_, s| {
        while out.len() < steps.len() && steps[out.len()] == step {
            match s.rho().in_basis(&basis) {
                Ok(r) => out.push(r[(0, 2)]),
                Err(e) => {
                    failure = Some(e);
                    return ControlFlow::Break(());
                }
            }
        }
        step += 1;
        ControlFlow::Continue(())
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(out)
}

/// Sup-norm distance between the HEOM and closed-form coherences.
pub fn dephasing_max_error(cfg: &DephasingConfig, depth: usize, dt: f64) -> Result<f64> {
    let heom = heom_dephasing(cfg, depth, dt)?;
    Ok(cfg
        .t_grid
        .iter()
        .zip(&heom)
        .map(|(t, h)| (h - dephasing_coherence(cfg, *t)).norm())
        .fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// dense generator

/// The full hierarchy generator as one explicit matrix acting on the stacked
/// physical ADOs (product basis, row-major), ordered by `n1` then `n2`.
pub struct DenseGenerator {
    depth: usize,
    indices: Vec<HierarchyIndex>,
    matrix: Mat<C64>,
}

type Super = [[C64; 16]; 16];

/// `A rho B` on row-major `vec(rho)` is `kron(A, B^T)`.
fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> Super {
    let mut s = [[ZERO; 16]; 16];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    s[4 * i + j][4 * k + l] = a[(i, k)] * b[(l, j)];
                }
            }
        }
    }
    s
}

fn combine(terms: &[(C64, &Super)]) -> Super {
    let mut s = [[ZERO; 16]; 16];
    for (c, t) in terms {
        for r in 0..16 {
            for q in 0..16 {
                s[r][q] += c * t[r][q];
            }
        }
    }
    s
}

fn square(a: &Super) -> Super {
    let mut s = [[ZERO; 16]; 16];
    for r in 0..16 {
        for k in 0..16 {
            if a[r][k] != ZERO {
                for q in 0..16 {
                    s[r][q] += a[r][k] * a[k][q];
                }
            }
        }
    }
    s
}

pub fn dense_generator_oracle(model: &ModelSpec, depth: usize) -> Result<DenseGenerator> {
    if depth == 0 {
        return Err(HeomError::DepthTooSmall { depth, required: 1 }.into());
    }
    if depth > DENSE_DEPTH_LIMIT {
        return Err(HeomError::DepthTooLarge { depth, limit: DENSE_DEPTH_LIMIT }.into());
    }
    model.validate()?;
    let id = ComplexMatrix::identity(4)?;
    let h = model.hamiltonian();
    let h_left = sandwich(&h, &id);
    let h_right = sandwich(&id, &h);
    let liouville = combine(&[(-I, &h_left), (I, &h_right)]);

    let mut minus = Vec::new();
    let mut plus = Vec::new();
    for l in 1..=2 {
        let x = coupling_operator(l)?;
        let (xl, xr) = (sandwich(&x, &id), sandwich(&id, &x));
        minus.push(combine(&[(ONE, &xl), (-ONE, &xr)]));
        plus.push(combine(&[(ONE, &xl), (ONE, &xr)]));
    }
    let baths = model.baths();

    let mut indices = Vec::new();
    for n1 in 0..=depth {
        for n2 in 0..=depth - n1 {
            indices.push(HierarchyIndex::new(n1, n2));
        }
    }
    let slot = |idx: HierarchyIndex| indices.iter().position(|&k| k == idx);
    let dim = 16 * indices.len();
    let mut matrix = Mat::<C64>::zeros(dim, dim);
    let put = |matrix: &mut Mat<C64>, row: usize, col: usize, c: C64, s: &Super| {
        for r in 0..16 {
            for q in 0..16 {
                matrix[(16 * row + r, 16 * col + q)] += c * s[r][q];
            }
        }
    };

    for (row, &idx) in indices.iter().enumerate() {
        let damping = baths[0].gamma * idx.n1 as f64 + baths[1].gamma * idx.n2 as f64;
        put(&mut matrix, row, row, ONE, &liouville);
        for l in 0..2 {
            let bath = baths[l];
            if bath.lambda_b == 0.0 {
                continue;
            }
            put(&mut matrix, row, row, ONE * (-bath.lambda_b * bath.delta()), &square(&minus[l]));
            let n = idx.count(l);
            let up = if l == 0 {
                HierarchyIndex::new(idx.n1 + 1, idx.n2)
            } else {
                HierarchyIndex::new(idx.n1, idx.n2 + 1)
            };
            if let Some(col) = slot(up) {
                put(&mut matrix, row, col, -I * bath.lambda_b, &minus[l]);
            }
            if n > 0 {
                let down = if l == 0 {
                    HierarchyIndex::new(idx.n1 - 1, idx.n2)
                } else {
                    HierarchyIndex::new(idx.n1, idx.n2 - 1)
                };
                let col = slot(down).expect("lower index present");
                let g = combine(&[
                    (ONE * bath.noise_amplitude(), &minus[l]),
                    (-I * bath.gamma, &plus[l]),
                ]);
                put(&mut matrix, row, col, -I * n as f64, &g);
            }
        }
        for d in 0..16 {
            matrix[(16 * row + d, 16 * row + d)] -= ONE * damping;
        }
    }
    Ok(DenseGenerator { depth, indices, matrix })
}

impl DenseGenerator {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn indices(&self) -> &[HierarchyIndex] {
        &self.indices
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Physical ADOs of `state` stacked in this generator's order.
    pub fn stack(&self, state: &HierarchyState) -> Result<Vec<C64>> {
        let mut v = Vec::with_capacity(self.dimension());
        for &idx in &self.indices {
            v.extend_from_slice(state.ado(idx)?.as_slice());
        }
        Ok(v)
    }

    pub fn block(&self, v: &[C64], index: HierarchyIndex) -> Result<ComplexMatrix> {
        let k = self
            .indices
            .iter()
            .position(|&i| i == index)
            .ok_or(HeomError::IndexOutOfRange { n1: index.n1, n2: index.n2, depth: self.depth })?;
        Ok(ComplexMatrix::from_vec(4, v[16 * k..16 * k + 16].to_vec())?)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dimension();
        (0..n).map(|r| (0..n).map(|c| self.matrix[(r, c)] * v[c]).sum()).collect()
    }

    /// Largest elementwise difference between `heom_rhs(state)` and this
    /// matrix applied to the stacked state.
    pub fn rhs_discrepancy(&self, state: &HierarchyState, model: &ModelSpec) -> Result<f64> {
        let engine = heom_rhs(state, model)?;
        let dense = self.apply(&self.stack(state)?);
        let mut worst = 0.0f64;
        for &idx in &self.indices {
            worst = worst.max(engine.ado(idx)?.max_abs_diff(&self.block(&dense, idx)?)?);
        }
        Ok(worst)
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        self.matrix.eigenvalues().map_err(|_| OracleError::Eigen)
    }

    /// Eigenvector of the eigenvalue closest to zero, scaled so that
    /// `Tr zeta_00 = 1`. Returns the stacked vector and its eigenvalue.
    pub fn null_vector(&self) -> Result<(Vec<C64>, C64)> {
        let evd = self.matrix.eigen().map_err(|_| OracleError::Eigen)?;
        let values = evd.S().column_vector();
        let best = (0..values.nrows())
            .min_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm()))
            .ok_or(OracleError::Eigen)?;
        let u = evd.U();
        let mut v: Vec<C64> = (0..self.dimension()).map(|r| u[(r, best)]).collect();
        let root = self.block(&v, HierarchyIndex::ROOT)?;
        let tr = root.trace();
        for z in &mut v {
            *z /= tr;
        }
        Ok((v, values[best]))
    }

    /// Steady state of the truncated hierarchy from the null vector.
    pub fn null_space_steady_state(&self) -> Result<DensityMatrix> {
        let (v, _) = self.null_vector()?;
        let root = self.block(&v, HierarchyIndex::ROOT)?.hermitian_part();
        Ok(DensityMatrix::new(root)?)
    }

    /// `eta_l` from a stacked vector.
    pub fn eta(&self, v: &[C64], model: &ModelSpec, bath_index: usize) -> Result<ComplexMatrix> {
        let bath = model.bath(bath_index)?;
        let x = coupling_operator(bath_index)?;
        let first = if bath_index == 1 { HierarchyIndex::new(1, 0) } else { HierarchyIndex::new(0, 1) };
        let zeta1 = self.block(v, first)?;
        let rho = self.block(v, HierarchyIndex::ROOT)?;
        let local = (&(&x * &rho) - &(&rho * &x)).scale(-I * bath.delta());
        Ok((&zeta1 + &local).scale_real(bath.lambda_b))
    }
}

/// A hierarchy state with seeded random complex entries in every ADO.
pub fn random_hierarchy(model: &ModelSpec, depth: usize, rescale: bool, seed: u64) -> Result<HierarchyState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = HierarchyState::zeros(depth, scaling_for(model, rescale))?;
    let indices: Vec<_> = state.indices().collect();
    for idx in indices {
        let v = (0..16).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        state.set_ado(idx, &ComplexMatrix::from_vec(4, v)?)?;
    }
    Ok(state)
}

// ---------------------------------------------------------------------------
// weak-coupling Gibbs limit

pub const GIBBS_FIDELITY_THRESHOLD: f64 = 0.999;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GibbsCheck {
    pub lambda_b: f64,
    pub temperature: f64,
    pub fidelity: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Fidelity of the steady state of `model` (equal bath temperatures) to the
/// Gibbs state; intended for `lambda_B <= 0.02`.
pub fn weak_coupling_gibbs_check(
    model: &ModelSpec,
    cfg: &IntegratorConfig,
    method: SteadyMethod,
) -> Result<GibbsCheck> {
    let temperature = model.reference_temperature();
    let initial = DensityMatrix::maximally_mixed(4)?;
    let ss = steady_state(&initial, model, cfg, method)?;
    let gibbs = gibbs_state(&model.hamiltonian(), 1.0 / temperature)?;
    let f = fidelity(&ss.rho, &gibbs)?;
    Ok(GibbsCheck {
        lambda_b: model.bath1.lambda_b,
        temperature,
        fidelity: f,
        threshold: GIBBS_FIDELITY_THRESHOLD,
        passed: ss.converged && f >= GIBBS_FIDELITY_THRESHOLD,
    })
}

// ---------------------------------------------------------------------------
// suite

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `value` met the threshold.
    pub passed: bool,
    /// Negative controls are expected to miss the threshold.
    pub expect_pass: bool,
}

impl OracleCheck {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, passed: value <= threshold, expect_pass: true }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.expect_pass
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(OracleCheck::ok)
    }
}

/// Settings for [`run_oracle_suite`].
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub dt: f64,
    pub dephasing_depth: usize,
    pub null_space_depth: usize,
    /// Depth and method for the Gibbs-limit checks.
    pub gibbs_depth: usize,
    pub gibbs_method: SteadyMethod,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            dt: 0.005,
            dephasing_depth: 20,
            null_space_depth: DENSE_DEPTH_LIMIT,
            gibbs_depth: 50,
            gibbs_method: SteadyMethod::Stationary,
        }
    }
}

fn default_system() -> SystemSpec {
    SystemSpec::new(1.0, 1.55)
}

/// Asymmetric two-bath model used by the generator comparisons.
pub fn asymmetric_model() -> ModelSpec {
    ModelSpec::new(default_system(), BathSpec::new(0.7, 0.15, 2.0), BathSpec::new(1.3, 0.25, 1.0))
}

/// Largest discrepancy between the engine and the dense generator over
/// depths `1..=max_depth`, both representations and several random states.
pub fn generator_agreement(model: &ModelSpec, max_depth: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for depth in 1..=max_depth {
        let dense = dense_generator_oracle(model, depth)?;
        for rescale in [false, true] {
            for seed in 0..3 {
                let state = random_hierarchy(model, depth, rescale, 100 * depth as u64 + seed)?;
                worst = worst.max(dense.rhs_discrepancy(&state, model)?);
            }
        }
    }
    Ok(worst)
}

/// With both couplings zero, the depth-1 dense generator acting on a state
/// with only `zeta_00` populated must give `-i[H, zeta_00]` and nothing else.
pub fn uncoupled_discrepancy(model: &ModelSpec) -> Result<f64> {
    let dense = dense_generator_oracle(model, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let v = (0..16).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0)).collect();
    let rho = ComplexMatrix::from_vec(4, v)?.hermitian_part();
    let state = HierarchyState::from_density(&rho, 1, scaling_for(model, true))?;
    let h = model.hamiltonian();
    let expect = (&(&h * &rho) - &(&rho * &h)).scale(-I);
    let applied = dense.apply(&dense.stack(&state)?);
    let mut worst = dense.block(&applied, HierarchyIndex::ROOT)?.max_abs_diff(&expect)?;
    for &idx in &dense.indices()[1..] {
        worst = worst.max(dense.block(&applied, idx)?.max_abs());
    }
    Ok(worst.max(dense.rhs_discrepancy(&state, model)?))
}

/// Dephasing configuration used by the suite: `t` in `[0, 50]` every 0.05.
pub fn suite_dephasing_config(lambda_b: f64) -> DephasingConfig {
    DephasingConfig {
        bath: BathSpec::new(lambda_b, 0.15, 1.5),
        initial_coherence: C64::new(0.5, 0.0),
        t_grid: (0..=1000).map(|k| k as f64 * 0.05).collect(),
    }
}

/// Trace distance between the null-space steady state and the RK4 steady
/// state at the same depth.
pub fn null_space_vs_propagation(model: &ModelSpec, depth: usize, dt: f64) -> Result<f64> {
    let dense = dense_generator_oracle(model, depth)?;
    let null = dense.null_space_steady_state()?;
    let cfg = IntegratorConfig { dt, depth, t_max: 50_000.0, ..IntegratorConfig::default() };
    let ss = steady_state(&DensityMatrix::maximally_mixed(4)?, model, &cfg, SteadyMethod::Propagate)?
        .require_converged()?;
    Ok(trace_distance(&null, &ss.rho)?)
}

pub fn run_oracle_suite(opts: &SuiteOptions) -> Result<OracleReport> {
    let mut checks = Vec::new();

    let asym = asymmetric_model();
    checks.push(OracleCheck::at_most("dense generator agreement, depths 1-4", generator_agreement(&asym, 4)?, 1e-12));

    let closed = ModelSpec::symmetric(default_system(), 0.0, 0.15, 1.5);
    checks.push(OracleCheck::at_most("uncoupled generator equals -i[H, .]", uncoupled_discrepancy(&closed)?, 1e-12));

    let deph = suite_dephasing_config(0.02);
    let quad = [0.5, 5.0, 10.0, 25.0, 50.0]
        .iter()
        .map(|&t| (decoherence_exponent(&deph.bath, t) - decoherence_exponent_quadrature(&deph.bath, t)).abs())
        .fold(0.0, f64::max);
    checks.push(OracleCheck::at_most("decoherence exponent, closed form vs quadrature", quad, 1e-10));
    checks.push(OracleCheck::at_most(
        "pure dephasing, HEOM vs closed form",
        dephasing_max_error(&deph, opts.dephasing_depth, opts.dt)?,
        1e-4,
    ));

    let weak = ModelSpec::symmetric(default_system(), 0.01, 0.15, 1.5);
    checks.push(OracleCheck::at_most(
        "null-space vs propagated steady state",
        null_space_vs_propagation(&weak, opts.null_space_depth, opts.dt)?,
        1e-5,
    ));
    let null = dense_generator_oracle(&weak, opts.null_space_depth)?.null_space_steady_state()?;
    let gibbs = gibbs_state(&weak.hamiltonian(), 1.0 / 1.5)?;
    let f = fidelity(&null, &gibbs)?;
    checks.push(OracleCheck {
        name: "null-space steady state fidelity to Gibbs".into(),
        value: f,
        threshold: GIBBS_FIDELITY_THRESHOLD,
        passed: f >= GIBBS_FIDELITY_THRESHOLD,
        expect_pass: true,
    });

    let cfg = IntegratorConfig { dt: opts.dt, depth: opts.gibbs_depth, ..IntegratorConfig::default() };
    for (lambda_b, temperature, expect_pass) in [(0.01, 1.5, true), (2.0, 1.5, false)] {
        let model = ModelSpec::symmetric(default_system(), lambda_b, 0.15, temperature);
        let g = weak_coupling_gibbs_check(&model, &cfg, opts.gibbs_method)?;
        checks.push(OracleCheck {
            name: format!("Gibbs fidelity at lambda_B = {lambda_b}, T = {temperature}"),
            value: g.fidelity,
            threshold: g.threshold,
            passed: g.passed,
            expect_pass,
        });
    }

    let eta_model = asymmetric_model();
    let dense = dense_generator_oracle(&eta_model, 4)?;
    let (v, _) = dense.null_vector()?;
    let ss = crate::heom::solve_stationary(&eta_model, 4, true)?;
    let mut eta_err = 0.0f64;
    for l in [1, 2] {
        eta_err = eta_err.max(reconstruct_eta(&ss.hierarchy, &eta_model, l)?.max_abs_diff(&dense.eta(&v, &eta_model, l)?)?);
    }
    checks.push(OracleCheck::at_most("eta from hierarchy vs dense null vector, depth 4", eta_err, 1e-9));

    Ok(OracleReport { checks })
}
