//! The hierarchy generator: the right-hand side of the hierarchical
//! equations of motion in the Schrodinger picture,
//!
//! ```text
//! d/dt zeta_n = -i[H, zeta_n] - (g1 n1 + g2 n2) zeta_n - sum_l lam_l D_l S-_l S-_l zeta_n
//!               - i sum_l lam_l S-_l zeta_{n + 1_l} - i sum_l n_l G_l zeta_{n - 1_l}
//! ```
//!
//! with `S-_l = [X_l, .]`, `S+_l = {X_l, .}` and
//! `G_l = (2/beta_l - g_l D_l) S-_l - i g_l S+_l`. Indices beyond the
//! truncation depth are dropped.
//!
//! In the pointer basis `X_l` is diagonal with entries `x_l(i) = +-1`, so
//! every bath superoperator acts elementwise: `S-` multiplies entry `(i, j)`
//! by `x(i) - x(j)` and `S+` by `x(i) + x(j)`. Only the system commutator
//! needs a matrix product.
//!
//! A bath with `lambda = 0` feeds nothing back into `zeta_00`; its down
//! links are dropped as well, so all of its ADOs stay zero.

use num_complex::Complex64 as C64;

use super::hierarchy::{
    ado_count, index_at, position, working_basis, AdoScaling, HierarchyState,
    ADO_LEN,
};
use super::{HeomError, Result};
use crate::model::{coupling_operator, BathSpec, ModelSpec};
use crate::qstate::{ComplexMatrix, QStateError, I, ZERO};

const NONE: usize = usize::MAX;

/// Which commutator a superoperator forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommutatorKind {
    /// `[X, .]`
    Minus,
    /// `{X, .}`
    Plus,
}

pub fn superop_commutator(
    x: &ComplexMatrix,
    target: &ComplexMatrix,
    kind: CommutatorKind,
) -> std::result::Result<ComplexMatrix, QStateError> {
    match kind {
        CommutatorKind::Minus => x.commutator(target),
        CommutatorKind::Plus => x.anticommutator(target),
    }
}

/// `G_l target = (2/beta - gamma Delta)[X_l, target] - i gamma {X_l, target}`.
pub fn g_superop(bath: &BathSpec, bath_index: usize, target: &ComplexMatrix) -> Result<ComplexMatrix> {
    let x = coupling_operator(bath_index)?;
    let minus = superop_commutator(&x, target, CommutatorKind::Minus)?;
    let plus = superop_commutator(&x, target, CommutatorKind::Plus)?;
    Ok(&minus.scale_real(bath.noise_amplitude()) + &plus.scale(-I * bath.gamma))
}

/// Balancing factor `s_l = sqrt(lambda_l / |c_l|)` of bath `l` (1 when uncoupled).
pub fn balance_factor(bath: &BathSpec) -> f64 {
    if bath.lambda_b > 0.0 {
        (bath.lambda_b / bath.correlation_constants().c.norm()).sqrt()
    } else {
        1.0
    }
}

pub fn scaling_for(model: &ModelSpec, rescale: bool) -> AdoScaling {
    if rescale {
        AdoScaling::Balanced([balance_factor(&model.bath1), balance_factor(&model.bath2)])
    } else {
        AdoScaling::Unscaled
    }
}

#[derive(Clone, Copy, Debug)]
struct Links {
    damping: f64,
    up: [usize; 2],
    up_coef: [f64; 2],
    down: [usize; 2],
    down_coef: [f64; 2],
}

/// Precomputed tables for applying the hierarchy generator to flat storage.
#[derive(Clone, Debug)]
pub struct HeomGenerator {
    depth: usize,
    scaling: AdoScaling,
    /// System Hamiltonian in the working basis.
    h: [C64; ADO_LEN],
    h_real: Option<[f64; ADO_LEN]>,
    /// `-sum_l lam_l D_l (x_l(i) - x_l(j))^2`
    local: [f64; ADO_LEN],
    /// `lam_l (x_l(i) - x_l(j))`; the up term is `-i` times this.
    up: [[f64; ADO_LEN]; 2],
    /// `-i [(2/beta - gamma D)(x(i) - x(j)) - i gamma (x(i) + x(j))]`
    down: [[C64; ADO_LEN]; 2],
    links: Vec<Links>,
}

impl HeomGenerator {
    pub fn new(model: &ModelSpec, depth: usize, rescale: bool) -> Result<Self> {
        Self::with_scaling(model, depth, scaling_for(model, rescale))
    }

    pub fn with_scaling(model: &ModelSpec, depth: usize, scaling: AdoScaling) -> Result<Self> {
        if depth == 0 {
            return Err(HeomError::DepthTooSmall { depth, required: 1 });
        }
        model.validate()?;
        let basis = working_basis();
        let hw = model.hamiltonian().in_basis(basis)?;
        let mut h = [ZERO; ADO_LEN];
        h.copy_from_slice(hw.as_slice());
        let h_real = h.iter().all(|z| z.im == 0.0).then(|| h.map(|z| z.re));

        let mut x = [[0.0; 4]; 2];
        for (l, xl) in x.iter_mut().enumerate() {
            let xp = coupling_operator(l + 1)?.in_basis(basis)?;
            for i in 0..4 {
                for j in 0..4 {
                    if i != j && xp[(i, j)].norm() > 1e-14 {
                        return Err(HeomError::CouplingNotDiagonal);
                    }
                }
                xl[i] = xp[(i, i)].re;
            }
        }

        let baths = model.baths();
        let mut local = [0.0; ADO_LEN];
        let mut up = [[0.0; ADO_LEN]; 2];
        let mut down = [[ZERO; ADO_LEN]; 2];
        for e in 0..ADO_LEN {
            let (i, j) = (e / 4, e % 4);
            for l in 0..2 {
                let bath = baths[l];
                let minus = x[l][i] - x[l][j];
                let plus = x[l][i] + x[l][j];
                local[e] -= bath.lambda_b * bath.delta() * minus * minus;
                up[l][e] = bath.lambda_b * minus;
                // an uncoupled bath keeps its whole ladder at zero
                if bath.lambda_b > 0.0 {
                    let g = C64::new(bath.noise_amplitude() * minus, -bath.gamma * plus);
                    down[l][e] = -I * g;
                }
            }
        }

        let links = (0..ado_count(depth))
            .map(|p| {
                let idx = index_at(p);
                let mut link = Links {
                    damping: baths[0].gamma * idx.n1 as f64 + baths[1].gamma * idx.n2 as f64,
                    up: [NONE; 2],
                    up_coef: [0.0; 2],
                    down: [NONE; 2],
                    down_coef: [0.0; 2],
                };
                for l in 0..2 {
                    let n = idx.count(l) as f64;
                    let (uc, dc) = match scaling {
                        AdoScaling::Unscaled => (1.0, n),
                        AdoScaling::Balanced(s) => ((n + 1.0).sqrt() / s[l], n.sqrt() * s[l]),
                    };
                    if let Some(q) = position(idx.raised(l), depth) {
                        link.up[l] = q * ADO_LEN;
                        link.up_coef[l] = uc;
                    }
                    if let Some(q) = idx.lowered(l).and_then(|lo| position(lo, depth)) {
                        link.down[l] = q * ADO_LEN;
                        link.down_coef[l] = dc;
                    }
                }
                link
            })
            .collect();

        Ok(Self { depth, scaling, h, h_real, local, up, down, links })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn scaling(&self) -> AdoScaling {
        self.scaling
    }

    /// Length of the flat state vector.
    pub fn dimension(&self) -> usize {
        self.links.len() * ADO_LEN
    }

    pub fn zero_state(&self) -> HierarchyState {
        HierarchyState::zeros(self.depth, self.scaling).expect("depth checked at construction")
    }

    pub fn initial_state(&self, rho: &ComplexMatrix) -> Result<HierarchyState> {
        HierarchyState::from_density(rho, self.depth, self.scaling)
    }

    pub(crate) fn check_state(&self, state: &HierarchyState) -> Result<()> {
        if state.depth() != self.depth {
            return Err(HeomError::DepthMismatch { expected: self.depth, got: state.depth() });
        }
        if state.scaling() != self.scaling {
            return Err(HeomError::ScalingMismatch);
        }
        Ok(())
    }

    /// Time derivative of `state`.
    pub fn derivative(&self, state: &HierarchyState) -> Result<HierarchyState> {
        self.check_state(state)?;
        let mut out = self.zero_state();
        self.apply(state.raw(), out.raw_mut());
        Ok(out)
    }

    /// `y = L x` on flat working-basis storage.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dimension());
        debug_assert_eq!(y.len(), self.dimension());
        for (k, (out, link)) in y.chunks_exact_mut(ADO_LEN).zip(&self.links).enumerate() {
            let out: &mut [C64; ADO_LEN] = out.try_into().unwrap();
            let z: &[C64; ADO_LEN] = x[k * ADO_LEN..(k + 1) * ADO_LEN].try_into().unwrap();
            match &self.h_real {
                Some(h) => commutator_real(h, z, out),
                None => commutator_complex(&self.h, z, out),
            }
            for e in 0..ADO_LEN {
                out[e] += z[e] * (self.local[e] - link.damping);
            }
            for l in 0..2 {
                if link.up[l] != NONE {
                    let nb: &[C64; ADO_LEN] = x[link.up[l]..link.up[l] + ADO_LEN].try_into().unwrap();
                    let c = link.up_coef[l];
                    let tab = &self.up[l];
                    for e in 0..ADO_LEN {
                        // -i * (c * tab) * nb
                        let r = c * tab[e];
                        out[e] += C64::new(r * nb[e].im, -r * nb[e].re);
                    }
                }
                if link.down[l] != NONE {
                    let nb: &[C64; ADO_LEN] =
                        x[link.down[l]..link.down[l] + ADO_LEN].try_into().unwrap();
                    let c = link.down_coef[l];
                    let tab = &self.down[l];
                    for e in 0..ADO_LEN {
                        out[e] += tab[e] * nb[e] * c;
                    }
                }
            }
        }
    }

    /// Nonzero entries `(row, col, value)` of the generator acting on flat
    /// working-basis storage.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        let mut t = Vec::with_capacity(self.dimension() * 14);
        for (k, link) in self.links.iter().enumerate() {
            let base = k * ADO_LEN;
            for i in 0..4 {
                for j in 0..4 {
                    let row = base + 4 * i + j;
                    // -i (H z - z H): (H z)_ij = sum_m H_im z_mj, (z H)_ij = sum_m z_im H_mj
                    let mut diag = C64::new(self.local[4 * i + j] - link.damping, 0.0);
                    for m in 0..4 {
                        let a = -I * self.h[4 * i + m];
                        let b = I * self.h[4 * m + j];
                        let (ca, cb) = (base + 4 * m + j, base + 4 * i + m);
                        if ca == row {
                            diag += a;
                        } else if a != ZERO {
                            t.push((row, ca, a));
                        }
                        if cb == row {
                            diag += b;
                        } else if b != ZERO {
                            t.push((row, cb, b));
                        }
                    }
                    t.push((row, row, diag));
                    let e = 4 * i + j;
                    for l in 0..2 {
                        if link.up[l] != NONE && self.up[l][e] != 0.0 {
                            t.push((row, link.up[l] + e, -I * (link.up_coef[l] * self.up[l][e])));
                        }
                        if link.down[l] != NONE && self.down[l][e] != ZERO {
                            t.push((row, link.down[l] + e, self.down[l][e] * link.down_coef[l]));
                        }
                    }
                }
            }
        }
        t
    }

    /// Cheap upper bound on the spectral radius (Gershgorin).
    pub fn spectral_bound(&self) -> f64 {
        let mut rows = vec![0.0f64; self.dimension()];
        for (r, _, v) in self.triplets() {
            rows[r] += v.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

#[inline(always)]
fn commutator_real(h: &[f64; ADO_LEN], z: &[C64; ADO_LEN], out: &mut [C64; ADO_LEN]) {
    for i in 0..4 {
        for j in 0..4 {
            let mut re = 0.0;
            let mut im = 0.0;
            for m in 0..4 {
                let a = h[4 * i + m];
                let b = h[4 * m + j];
                let zl = z[4 * m + j];
                let zr = z[4 * i + m];
                re += a * zl.re - zr.re * b;
                im += a * zl.im - zr.im * b;
            }
            // -i (re + i im)
            out[4 * i + j] = C64::new(im, -re);
        }
    }
}

#[inline(always)]
fn commutator_complex(h: &[C64; ADO_LEN], z: &[C64; ADO_LEN], out: &mut [C64; ADO_LEN]) {
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = ZERO;
            for m in 0..4 {
                acc += h[4 * i + m] * z[4 * m + j] - z[4 * i + m] * h[4 * m + j];
            }
            out[4 * i + j] = -I * acc;
        }
    }
}

/// Time derivative of the whole hierarchy for `model`.
pub fn heom_rhs(state: &HierarchyState, model: &ModelSpec) -> Result<HierarchyState> {
    let generator = HeomGenerator::with_scaling(model, state.depth(), state.scaling())?;
    if let AdoScaling::Balanced(_) = state.scaling() {
        if scaling_for(model, true) != state.scaling() {
            return Err(HeomError::ScalingMismatch);
        }
    }
    generator.derivative(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heom::HierarchyIndex;
    use crate::model::{system_hamiltonian, SystemSpec};
    use crate::qstate::{pauli, ONE};

    fn default_model(lambda_b: f64) -> ModelSpec {
        ModelSpec::symmetric(SystemSpec::new(1.0, 1.55), lambda_b, 0.15, 1.5)
    }

    fn random_hermitian(seed: u64) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<C64> =
            (0..16).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        ComplexMatrix::from_vec(4, v).unwrap().hermitian_part()
    }

    #[test]
    fn commutator_examples() {
        let x = pauli::x();
        let id = pauli::identity();
        assert_eq!(superop_commutator(&x, &id, CommutatorKind::Minus).unwrap().max_abs(), 0.0);
        let plus = superop_commutator(&x, &id, CommutatorKind::Plus).unwrap();
        assert!(plus.max_abs_diff(&x.scale_real(2.0)).unwrap() < 1e-15);
        let xz = superop_commutator(&x, &pauli::z(), CommutatorKind::Minus).unwrap();
        assert!(xz.max_abs_diff(&pauli::y().scale(C64::new(0.0, -2.0))).unwrap() < 1e-15);
        assert!(superop_commutator(&x, &ComplexMatrix::identity(4).unwrap(), CommutatorKind::Minus).is_err());
    }

    #[test]
    fn g_superop_examples() {
        let bath = BathSpec::new(0.7, 0.15, 1.5);
        let x1 = coupling_operator(1).unwrap();
        let id = ComplexMatrix::identity(4).unwrap();
        let g_id = g_superop(&bath, 1, &id).unwrap();
        assert!(g_id.max_abs_diff(&x1.scale(C64::new(0.0, -0.3))).unwrap() < 1e-15);
        let g_x = g_superop(&bath, 1, &x1).unwrap();
        assert!(g_x.max_abs_diff(&id.scale(C64::new(0.0, -0.3))).unwrap() < 1e-15);
        for seed in 0..5 {
            let t = random_hermitian(seed);
            let tr = g_superop(&bath, 1, &t).unwrap().trace();
            let expect = C64::new(0.0, -2.0 * 0.15) * (&x1 * &t).trace();
            assert!((tr - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_state_has_zero_derivative() {
        let g = HeomGenerator::new(&default_model(1.0), 5, true).unwrap();
        let d = g.derivative(&g.zero_state()).unwrap();
        assert_eq!(d.max_norm(), 0.0);
    }

    #[test]
    fn closed_system_limit() {
        let model = default_model(0.0);
        let rho = random_hermitian(3);
        let state = HierarchyState::from_density(&rho, 4, scaling_for(&model, true)).unwrap();
        let d = heom_rhs(&state, &model).unwrap();
        let h = system_hamiltonian(&model.system);
        let expect = h.commutator(&rho).unwrap().scale(-I);
        assert!(d.rho().max_abs_diff(&expect).unwrap() < 1e-14);
        for idx in d.indices().skip(1) {
            assert!(d.ado(idx).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_density_is_traceless() {
        let model = default_model(2.0);
        let g = HeomGenerator::new(&model, 6, true).unwrap();
        let mut state = g.zero_state();
        for (k, idx) in state.clone().indices().enumerate() {
            state.set_ado(idx, &random_hermitian(k as u64)).unwrap();
        }
        let d = g.derivative(&state).unwrap();
        assert!(d.rho().trace().norm() < 1e-12);
    }

    #[test]
    fn triplets_match_apply() {
        let model = ModelSpec::new(
            SystemSpec::new(0.8, 0.3),
            BathSpec::new(0.4, 0.2, 2.0),
            BathSpec::new(1.1, 0.1, 0.7),
        );
        for rescale in [false, true] {
            let g = HeomGenerator::new(&model, 3, rescale).unwrap();
            let mut state = g.zero_state();
            for (k, idx) in state.clone().indices().enumerate() {
                state.set_ado(idx, &random_hermitian(10 + k as u64)).unwrap();
            }
            let applied = g.derivative(&state).unwrap();
            let mut via = vec![ZERO; g.dimension()];
            for (r, c, v) in g.triplets() {
                via[r] += v * state.raw()[c];
            }
            for (a, b) in applied.raw().iter().zip(&via) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn complex_hamiltonian_path_matches_real_path() {
        // a tiny imaginary perturbation forces the complex kernel
        let model = default_model(0.5);
        let h = system_hamiltonian(&model.system);
        let mut hc = h.clone();
        hc[(0, 3)] += C64::new(0.0, 1e-300);
        hc[(3, 0)] -= C64::new(0.0, 1e-300);
        let mut model_c = model.clone();
        model_c.system = model_c.system.clone().with_override(hc).unwrap();
        let g = HeomGenerator::new(&model, 3, true).unwrap();
        let gc = HeomGenerator::new(&model_c, 3, true).unwrap();
        assert!(g.h_real.is_some());
        let mut state = g.zero_state();
        state.set_ado(HierarchyIndex::ROOT, &random_hermitian(1)).unwrap();
        state.set_ado(HierarchyIndex::new(1, 1), &random_hermitian(2)).unwrap();
        let a = g.derivative(&state).unwrap();
        let b = gc.derivative(&state).unwrap();
        for (x, y) in a.raw().iter().zip(b.raw()) {
            assert!((x - y).norm() < 1e-14);
        }
        let _ = ONE;
    }

    #[test]
    fn depth_mismatch_rejected() {
        let g = HeomGenerator::new(&default_model(1.0), 4, true).unwrap();
        let other = HierarchyState::zeros(3, g.scaling()).unwrap();
        assert!(matches!(g.derivative(&other), Err(HeomError::DepthMismatch { .. })));
    }
}
