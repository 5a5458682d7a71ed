//! Direct stationary solve: the null vector of the hierarchy generator with
//! unit trace, found by sparse LU.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::generator::HeomGenerator;
use super::hierarchy::HierarchyState;
use super::integrate::{density_from, find_steady_state, SteadyState};
use super::{HeomError, IntegratorConfig, Result};
use crate::model::ModelSpec;
use crate::qstate::{DensityMatrix, ONE, ZERO};

/// How a steady state is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethod {
    /// Sparse LU on the generator with the trace condition substituted.
    #[default]
    Stationary,
    /// RK4 time propagation until the window criterion holds.
    Propagate,
}

/// Steady state by the chosen method. `initial` only matters for
/// propagation.
pub fn steady_state(
    initial: &DensityMatrix,
    model: &ModelSpec,
    cfg: &IntegratorConfig,
    method: SteadyMethod,
) -> Result<SteadyState> {
    match method {
        SteadyMethod::Stationary => {
            cfg.validate()?;
            solve_stationary(model, cfg.depth, cfg.rescale)
        }
        SteadyMethod::Propagate => find_steady_state(initial, model, cfg),
    }
}

const REFINEMENT_STEPS: usize = 2;

/// Solves `L zeta = 0` with `Tr zeta_00 = 1`.
///
/// The equation for the first diagonal entry of `zeta_00` is redundant
/// (the diagonal equations sum to zero) and is replaced by the trace
/// condition.
pub fn solve_stationary(model: &ModelSpec, depth: usize, rescale: bool) -> Result<SteadyState> {
    let generator = HeomGenerator::new(model, depth, rescale)?;
    let n = generator.dimension();
    let trace_cols = [0usize, 5, 10, 15];

    let mut triplets: Vec<Triplet<usize, usize, C64>> = generator
        .triplets()
        .into_iter()
        .filter(|&(r, _, _)| r != 0)
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    triplets.extend(trace_cols.iter().map(|&c| Triplet::new(0, c, ONE)));
    let matrix = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| HeomError::Solver(format!("{e:?}")))?;
    let lu = matrix.sp_lu().map_err(|e| HeomError::Solver(format!("{e:?}")))?;

    let mut x = Mat::<C64>::zeros(n, 1);
    x[(0, 0)] = ONE;
    lu.solve_in_place(x.as_mut());

    // iterative refinement against the matrix-free operator
    let mut lx = vec![ZERO; n];
    for _ in 0..REFINEMENT_STEPS {
        let xs: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
        generator.apply(&xs, &mut lx);
        let mut r = Mat::<C64>::zeros(n, 1);
        for i in 1..n {
            r[(i, 0)] = -lx[i];
        }
        r[(0, 0)] = ONE - trace_cols.iter().map(|&c| xs[c]).sum::<C64>();
        lu.solve_in_place(r.as_mut());
        for i in 0..n {
            x[(i, 0)] += r[(i, 0)];
        }
    }

    let mut hierarchy = generator.zero_state();
    for (i, z) in hierarchy.raw_mut().iter_mut().enumerate() {
        *z = x[(i, 0)];
    }
    if !hierarchy.max_norm().is_finite() {
        return Err(HeomError::Solver("non-finite solution".into()));
    }
    let rho = density_from(&hierarchy.rho())?;
    Ok(SteadyState { rho, hierarchy, t_converged: f64::NAN, converged: true, distance: 0.0 })
}

/// Largest entry modulus of `L zeta`.
pub fn residual(generator: &HeomGenerator, state: &HierarchyState) -> f64 {
    let mut out = vec![ZERO; generator.dimension()];
    generator.apply(state.raw(), &mut out);
    out.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
