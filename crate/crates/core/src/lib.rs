//! Quasistatic viscoelastic contact with nonmonotone friction.
//!
//! Each time step of the fully discrete scheme minimizes a nonsmooth functional
//! over a P1 finite element space on the unit square with Powell's conjugate
//! direction method. The numerical core is generic over [`Scalar`] (`f32` or
//! `f64`); the aliases below fix it to `f64`, which the harness and CLI use.

pub mod contact;
pub mod error;
pub mod fem;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod nsopt;
pub mod scalar;
pub mod stepper;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Mesh = mesh::Mesh<f64>;
pub type MaterialParams = fem::MaterialParams<f64>;
pub type LoadData = fem::LoadData<f64>;
pub type ContactLaw = contact::ContactLaw<f64>;
pub type CsrMatrix = linalg::CsrMatrix<f64>;
pub type PowellConfig = nsopt::PowellConfig<f64>;
pub type TimeGrid = stepper::TimeGrid<f64>;
pub type DiscreteProblem = stepper::DiscreteProblem<f64>;
pub type StepperConfig = stepper::StepperConfig<f64>;
pub type StateHistory = stepper::StateHistory<f64>;
