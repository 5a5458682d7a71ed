//! The two-qubit system, its coupling operators, the Drude-Lorentz bath
//! parameterization and the analytic weak- and strong-coupling reference
//! states.
//!
//! Operators act on the product z-basis ordered
//! `(|up,up>, |up,down>, |down,up>, |down,down>)`, qubit 1 being the left
//! tensor factor.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qstate::{
    self, hermitian_eigensystem, pauli, Basis, ComplexMatrix, DensityMatrix, QStateError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("qubit/bath index must be 1 or 2, got {0}")]
    BadIndex(usize),
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    QState(#[from] QStateError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

fn require(name: &'static str, value: f64, ok: bool) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, value })
    }
}

/// Two identical qubits with flip-flop exchange coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    /// Qubit excitation energy.
    pub omega0: f64,
    /// Internal exchange coupling.
    pub lambda_s: f64,
    #[serde(skip)]
    override_hamiltonian: Option<ComplexMatrix>,
}

impl SystemSpec {
    pub fn new(omega0: f64, lambda_s: f64) -> Self {
        Self { omega0, lambda_s, override_hamiltonian: None }
    }

    /// Replaces the generated Hamiltonian by `h`. Only meant for building
    /// exactly solvable test configurations.
    pub fn with_override(mut self, h: ComplexMatrix) -> Result<Self> {
        if h.dim() != 4 {
            return Err(QStateError::DimensionMismatch { left: 4, right: h.dim() }.into());
        }
        let deviation = h.hermiticity_deviation();
        if deviation > qstate::HERMITIAN_TOL {
            return Err(QStateError::NotHermitian { deviation }.into());
        }
        self.override_hamiltonian = Some(h);
        Ok(self)
    }

    pub fn override_hamiltonian(&self) -> Option<&ComplexMatrix> {
        self.override_hamiltonian.as_ref()
    }

    pub fn validate(&self) -> Result<()> {
        require("omega0", self.omega0, self.omega0 >= 0.0)?;
        require("lambda_s", self.lambda_s, self.lambda_s >= 0.0)
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        system_hamiltonian(self)
    }
}

/// One Drude-Lorentz bath.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// Overall system-bath coupling strength.
    pub lambda_b: f64,
    /// Bath response rate.
    pub gamma: f64,
    pub temperature: f64,
}

/// Constants of the single-exponential-plus-delta bath correlation
/// `C(t) = lambda [c exp(-gamma t) + 2 delta d(t)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationConstants {
    pub c: C64,
    pub delta: f64,
}

impl BathSpec {
    pub fn new(lambda_b: f64, gamma: f64, temperature: f64) -> Self {
        Self { lambda_b, gamma, temperature }
    }

    pub fn validate(&self) -> Result<()> {
        require("lambda_b", self.lambda_b, self.lambda_b >= 0.0)?;
        require("gamma", self.gamma, self.gamma > 0.0)?;
        require("temperature", self.temperature, self.temperature > 0.0)
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    pub fn delta(&self) -> f64 {
        self.gamma * self.beta() / 6.0
    }

    /// Real part of `c`: the exponential noise amplitude `2/beta - gamma delta`.
    pub fn noise_amplitude(&self) -> f64 {
        2.0 / self.beta() - self.gamma * self.delta()
    }

    pub fn correlation_constants(&self) -> CorrelationConstants {
        CorrelationConstants {
            c: C64::new(self.noise_amplitude(), -self.gamma),
            delta: self.delta(),
        }
    }

    /// Drude-Lorentz spectral density `2 lambda gamma w / (w^2 + gamma^2)`.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        2.0 * self.lambda_b * self.gamma * omega / (omega * omega + self.gamma * self.gamma)
    }
}

pub fn correlation_constants(bath: &BathSpec) -> CorrelationConstants {
    bath.correlation_constants()
}

pub fn spectral_density(bath: &BathSpec, omega: f64) -> f64 {
    bath.spectral_density(omega)
}

/// System plus its two independent baths; bath `l` couples through
/// `sigma^x` of qubit `l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub system: SystemSpec,
    pub bath1: BathSpec,
    pub bath2: BathSpec,
}

impl ModelSpec {
    pub fn new(system: SystemSpec, bath1: BathSpec, bath2: BathSpec) -> Self {
        Self { system, bath1, bath2 }
    }

    /// Two identical baths sharing coupling, rate and temperature.
    pub fn symmetric(system: SystemSpec, lambda_b: f64, gamma: f64, temperature: f64) -> Self {
        let bath = BathSpec::new(lambda_b, gamma, temperature);
        Self::new(system, bath, bath)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.bath1.validate()?;
        self.bath2.validate()
    }

    pub fn bath(&self, index: usize) -> Result<&BathSpec> {
        match index {
            1 => Ok(&self.bath1),
            2 => Ok(&self.bath2),
            i => Err(ModelError::BadIndex(i)),
        }
    }

    pub fn baths(&self) -> [&BathSpec; 2] {
        [&self.bath1, &self.bath2]
    }

    /// Same model with both bath couplings set to `lambda_b`.
    pub fn with_coupling(&self, lambda_b: f64) -> Self {
        let mut m = self.clone();
        m.bath1.lambda_b = lambda_b;
        m.bath2.lambda_b = lambda_b;
        m
    }

    /// Mean of the two bath temperatures; the temperature of the reference
    /// Gibbs state.
    pub fn reference_temperature(&self) -> f64 {
        0.5 * (self.bath1.temperature + self.bath2.temperature)
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        system_hamiltonian(&self.system)
    }
}

/// `(w0/2) Z1 + (w0/2) Z2 + lambda_s (s1+ s2- + s1- s2+)`, or the override.
pub fn system_hamiltonian(spec: &SystemSpec) -> ComplexMatrix {
    if let Some(h) = &spec.override_hamiltonian {
        return h.clone();
    }
    let id = pauli::identity();
    let z1 = ComplexMatrix::kron(&pauli::z(), &id).unwrap();
    let z2 = ComplexMatrix::kron(&id, &pauli::z()).unwrap();
    let flip = &ComplexMatrix::kron(&pauli::raising(), &pauli::lowering()).unwrap()
        + &ComplexMatrix::kron(&pauli::lowering(), &pauli::raising()).unwrap();
    let half = 0.5 * spec.omega0;
    &(&z1.scale_real(half) + &z2.scale_real(half)) + &flip.scale_real(spec.lambda_s)
}

/// `sigma^x` acting on qubit 1 or 2.
pub fn coupling_operator(qubit_index: usize) -> Result<ComplexMatrix> {
    let id = pauli::identity();
    match qubit_index {
        1 => Ok(ComplexMatrix::kron(&pauli::x(), &id)?),
        2 => Ok(ComplexMatrix::kron(&id, &pauli::x())?),
        i => Err(ModelError::BadIndex(i)),
    }
}

/// Eigenvalue (+1 for `|0>`, -1 for `|1>`) of `sigma^x` on `qubit_index`
/// for each pointer state.
pub fn pointer_eigenvalues(qubit_index: usize) -> Result<[f64; 4]> {
    match qubit_index {
        1 => Ok([1.0, 1.0, -1.0, -1.0]),
        2 => Ok([1.0, -1.0, 1.0, -1.0]),
        i => Err(ModelError::BadIndex(i)),
    }
}

/// Simultaneous eigenbasis of both coupling operators, ordered
/// `|00>, |01>, |10>, |11>` with `|0> = (|up> + |down>)/sqrt2` and
/// `|1> = (|up> - |down>)/sqrt2`.
pub fn pointer_basis() -> Basis {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero = [h, h];
    let one = [h, -h];
    let kets: Vec<Vec<C64>> = [(zero, zero), (zero, one), (one, zero), (one, one)]
        .iter()
        .map(|(a, b)| {
            (0..4).map(|k| C64::new(a[k / 2] * b[k % 2], 0.0)).collect()
        })
        .collect();
    Basis::from_kets(&kets).expect("pointer kets are orthonormal")
}

/// Eigenbasis of the system Hamiltonian, ground state first.
pub fn energy_basis(spec: &SystemSpec) -> Result<(Vec<f64>, Basis)> {
    let es = hermitian_eigensystem(&system_hamiltonian(spec))?;
    Ok((es.values, es.vectors))
}

/// `exp(-beta H) / Z`, evaluated on the spectrum shifted by its minimum.
pub fn gibbs_state(h: &ComplexMatrix, beta: f64) -> Result<DensityMatrix> {
    require("beta", beta, beta > 0.0)?;
    let es = hermitian_eigensystem(h)?;
    let e_min = es.values[0];
    let weights: Vec<f64> = es.values.iter().map(|&e| (-beta * (e - e_min)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let diag: Vec<C64> = weights.iter().map(|w| C64::new(w / z, 0.0)).collect();
    let rho = ComplexMatrix::diagonal(&diag)?.from_basis(&es.vectors)?;
    Ok(DensityMatrix::normalized(&rho)?)
}

/// Dephases `rho` in `basis`: `sum_j |b_j><b_j| rho |b_j><b_j|`, renormalized.
pub fn project_onto_basis(rho: &ComplexMatrix, basis: &Basis) -> Result<DensityMatrix> {
    let in_basis = rho.in_basis(basis)?;
    let diag: Vec<C64> = (0..in_basis.dim()).map(|i| C64::new(in_basis[(i, i)].re, 0.0)).collect();
    let projected = ComplexMatrix::diagonal(&diag)?.from_basis(basis)?;
    Ok(DensityMatrix::normalized(&projected)?)
}

/// The Gibbs state dephased in the pointer basis: the strong-coupling limit.
pub fn pointer_projected_gibbs(spec: &SystemSpec, beta: f64) -> Result<DensityMatrix> {
    let gibbs = gibbs_state(&system_hamiltonian(spec), beta)?;
    project_onto_basis(gibbs.matrix(), &pointer_basis())
}

/// Closed-form pointer-basis populations of the strong-coupling limit,
/// `(rho_11 = rho_44, rho_22 = rho_33)`.
pub fn pointer_limit_diagonals(spec: &SystemSpec, beta: f64) -> (f64, f64) {
    let bl = beta * spec.lambda_s;
    let s = bl.sinh() / ((beta * spec.omega0).cosh() + bl.cosh());
    (0.25 * (1.0 - s), 0.25 * (1.0 + s))
}

/// Ground state projector of the system Hamiltonian.
pub fn ground_state(spec: &SystemSpec) -> Result<DensityMatrix> {
    let (_, basis) = energy_basis(spec)?;
    Ok(DensityMatrix::pure(&basis.ket(0))?)
}
