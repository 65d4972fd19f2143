//! Contact geometry of the van der Waals and ideal gases, and a periodic
//! Toda-chain simulator for the small-amplitude thermal correspondence.
//!
//! * [`thermo`]: fundamental equation, temperature, pressure, equation of
//!   state and equipartition identities.
//! * [`pde`]: PDEs of state as residuals, finite-difference oracle,
//!   line-integral reconstruction of `U`.
//! * [`transforms`]: shift, scaling, Toda and ideal charts, `W(z)`,
//!   transformed energy and momenta.
//! * [`contact`]: contact forms, Poisson brackets, contactomorphism check.
//! * [`toda`]: chain dynamics, thermal sampling, ensemble averages, sweeps.
//! * [`cli`]: the `vdw-contact` command-line front end.

// NaN must fail validation, so `!(x > 0.0)` is intended throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contact;
pub mod error;
pub mod exec;
pub mod pde;
pub mod stats;
pub mod thermo;
pub mod toda;
pub mod transforms;

pub use error::{ChartDomainError, Error, Result};
pub use exec::Execution;
pub use thermo::{ContactPoint, ExtensiveState, GasParameters};
