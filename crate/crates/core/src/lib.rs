//! Hierarchical equations of motion (HEOM) for two exchange-coupled qubits,
//! each strongly coupled to its own Drude-Lorentz bath, with the analytic
//! Gibbs and pointer-basis reference states and steady-state observables.

pub mod heom;
pub mod model;
pub mod qstate;
pub mod observables;
pub mod oracle;
pub mod runner;
