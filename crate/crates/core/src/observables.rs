//! Quantities extracted from a hierarchy: the bath-contracted operators
//! `eta_l`, heat currents, basis-resolved density matrices, entropy and
//! fidelities to the analytic reference states.

use thiserror::Error;

use crate::heom::{HeomError, HierarchyIndex, HierarchyState};
use crate::model::{
    coupling_operator, energy_basis, gibbs_state, pointer_basis, pointer_projected_gibbs,
    ModelError, ModelSpec,
};
use crate::qstate::{
    fidelity, von_neumann_entropy, Basis, ComplexMatrix, DensityMatrix, QStateError, I,
};

/// Largest tolerated imaginary part of a heat current.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error("heat current has imaginary part {residue:e}; hierarchy state is inconsistent")]
    ImaginaryResidueTooLarge { residue: f64 },
    #[error(transparent)]
    Heom(#[from] HeomError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    QState(#[from] QStateError),
}

pub type Result<T> = std::result::Result<T, ObservableError>;

/// `eta_l = lambda_l (zeta_{1_l} - i Delta_l [X_l, zeta_00])`.
pub fn reconstruct_eta(h: &HierarchyState, model: &ModelSpec, bath_index: usize) -> Result<ComplexMatrix> {
    let bath = model.bath(bath_index)?;
    let x = coupling_operator(bath_index)?;
    let first = if bath_index == 1 { HierarchyIndex::new(1, 0) } else { HierarchyIndex::new(0, 1) };
    let zeta1 = h.ado(first)?;
    let rho = h.rho();
    let local = x.commutator(&rho)?.scale(-I * bath.delta());
    Ok((&zeta1 + &local).scale_real(bath.lambda_b))
}

/// Heat flowing from bath `l` into the system, `-i Tr([X_l, eta_l] H_S)`.
pub fn heat_current(h: &HierarchyState, model: &ModelSpec, bath_index: usize) -> Result<f64> {
    let eta = reconstruct_eta(h, model, bath_index)?;
    let x = coupling_operator(bath_index)?;
    let j = -I * (&x.commutator(&eta)? * &model.hamiltonian()).trace();
    if j.im.abs() > IMAGINARY_RESIDUE_TOL {
        return Err(ObservableError::ImaginaryResidueTooLarge { residue: j.im.abs() });
    }
    Ok(j.re)
}

/// Matrix elements `<b_i|rho|b_j>`.
pub fn basis_resolved(rho: &DensityMatrix, basis: &Basis) -> Result<ComplexMatrix> {
    Ok(rho.matrix().in_basis(basis)?)
}

/// Provenance of a steady state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordMeta {
    pub lambda_b: f64,
    pub t_converged: f64,
    pub converged: bool,
}

/// Everything reported for one steady state.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRecord {
    pub lambda_b: f64,
    pub t_converged: f64,
    pub converged: bool,
    pub rho_energy: ComplexMatrix,
    pub rho_pointer: ComplexMatrix,
    pub entropy: f64,
    pub fidelity_gibbs: f64,
    pub fidelity_pointer: f64,
    pub j1: f64,
    pub j2: f64,
}

/// Reference states at the model's mean bath temperature.
#[derive(Clone, Debug)]
pub struct References {
    pub energy_basis: Basis,
    pub pointer_basis: Basis,
    pub gibbs: DensityMatrix,
    pub pointer_limit: DensityMatrix,
}

impl References {
    pub fn for_model(model: &ModelSpec) -> Result<Self> {
        let beta = 1.0 / model.reference_temperature();
        let (_, energy_basis) = energy_basis(&model.system)?;
        Ok(Self {
            energy_basis,
            pointer_basis: pointer_basis(),
            gibbs: gibbs_state(&model.hamiltonian(), beta)?,
            pointer_limit: pointer_projected_gibbs(&model.system, beta)?,
        })
    }
}

pub fn record(h: &HierarchyState, model: &ModelSpec, meta: RecordMeta) -> Result<ObservableRecord> {
    record_with(h, model, meta, &References::for_model(model)?)
}

pub fn record_with(
    h: &HierarchyState,
    model: &ModelSpec,
    meta: RecordMeta,
    refs: &References,
) -> Result<ObservableRecord> {
    let m = h.rho().hermitian_part();
    let rho = DensityMatrix::new(m.scale_real(1.0 / m.trace().re))?;
    Ok(ObservableRecord {
        lambda_b: meta.lambda_b,
        t_converged: meta.t_converged,
        converged: meta.converged,
        rho_energy: basis_resolved(&rho, &refs.energy_basis)?,
        rho_pointer: basis_resolved(&rho, &refs.pointer_basis)?,
        entropy: von_neumann_entropy(&rho),
        fidelity_gibbs: fidelity(&rho, &refs.gibbs)?,
        fidelity_pointer: fidelity(&rho, &refs.pointer_limit)?,
        j1: heat_current(h, model, 1)?,
        j2: heat_current(h, model, 2)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heom::{scaling_for, solve_stationary};
    use crate::model::{pointer_limit_diagonals, SystemSpec};

    fn default_model(lambda_b: f64) -> ModelSpec {
        ModelSpec::symmetric(SystemSpec::new(1.0, 1.55), lambda_b, 0.15, 1.5)
    }

    #[test]
    fn eta_vanishes_without_coupling() {
        let model = default_model(0.0);
        let ss = solve_stationary(&default_model(0.5), 4, true).unwrap();
        assert_eq!(reconstruct_eta(&ss.hierarchy, &model, 1).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn eta_of_pointer_diagonal_initial_state_is_zero() {
        let model = default_model(0.7);
        let rho = ComplexMatrix::diagonal(&[0.1, 0.2, 0.3, 0.4].map(crate::qstate::pauli::c))
            .unwrap()
            .from_basis(&pointer_basis())
            .unwrap();
        let h = HierarchyState::from_density(&rho, 3, scaling_for(&model, true)).unwrap();
        for l in [1, 2] {
            assert!(reconstruct_eta(&h, &model, l).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn basis_resolution_examples() {
        let model = default_model(1.0);
        let refs = References::for_model(&model).unwrap();
        let g = basis_resolved(&refs.gibbs, &refs.energy_basis).unwrap();
        let p = basis_resolved(&refs.pointer_limit, &refs.pointer_basis).unwrap();
        let (a, b) = pointer_limit_diagonals(&model.system, 1.0 / 1.5);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(g[(i, j)].norm() < 1e-12);
                    assert!(p[(i, j)].norm() < 1e-12);
                }
            }
        }
        assert!((p[(0, 0)].re - a).abs() < 1e-12 && (p[(1, 1)].re - b).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let r = basis_resolved(&mixed, &refs.energy_basis).unwrap();
        assert!(r.max_abs_diff(mixed.matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn equilibrium_currents_vanish_and_ness_balances() {
        let ss = solve_stationary(&default_model(1.0), 12, true).unwrap();
        let model = default_model(1.0);
        assert!(heat_current(&ss.hierarchy, &model, 1).unwrap().abs() < 1e-10);
        let mut ness = default_model(1.0);
        ness.bath1.temperature = 2.0;
        ness.bath2.temperature = 1.0;
        let ss = solve_stationary(&ness, 12, true).unwrap();
        let j1 = heat_current(&ss.hierarchy, &ness, 1).unwrap();
        let j2 = heat_current(&ss.hierarchy, &ness, 2).unwrap();
        assert!(j1 > 0.0 && j2 < 0.0);
        assert!((j1 + j2).abs() < 1e-10);
    }

    #[test]
    fn record_spectra_agree_between_bases() {
        let model = default_model(2.0);
        let ss = solve_stationary(&model, 10, true).unwrap();
        let meta = RecordMeta { lambda_b: 2.0, t_converged: f64::NAN, converged: true };
        let r = record(&ss.hierarchy, &model, meta).unwrap();
        let a = DensityMatrix::new(r.rho_energy.hermitian_part()).unwrap().eigenvalues();
        let b = DensityMatrix::new(r.rho_pointer.hermitian_part()).unwrap().eigenvalues();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
