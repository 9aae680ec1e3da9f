//! Decoherence of a driven superconducting qubit through a coherent
//! two-level defect.
//!
//! The qubit, linearized around its working point, relaxes through the
//! defect into a thermal bath while a microwave drive pushes it around the
//! quadrature plane. Its Husimi Q-distribution stays Gaussian: the mean
//! spirals onto a limit cycle of radius |μ_ss| and the variance widens to
//! the thermal value set by the defect.
//!
//! * [`model`] turns device parameters into every derived rate.
//! * [`analytic`] evaluates the closed-form solution.
//! * [`oracle`] integrates the master equation directly as a reference.
//! * [`propagator`] pushes arbitrary initial distributions forward.
//! * [`dynamics`] classifies the transient and builds the return map.
//! * [`cli`] is the `ctls` command-line front end.
//!
//! ```
//! use ctls_dynamics::model::{derive, PhysicalParams};
//! use ctls_dynamics::analytic::EvolutionSpec;
//! use num_complex::Complex64;
//!
//! let p = PhysicalParams::reference_device(-570e3, 100e3);
//! let d = derive(&p).unwrap();
//! let spec = EvolutionSpec::new(d, Complex64::new(1.0, 0.0));
//! let late = spec.mean_at(d.relaxation_horizon());
//! assert!((late.norm() - d.mu_ss.norm()).abs() < 1e-3);
//! ```

pub mod analytic;
pub mod cli;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod propagator;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
    #[doc = include_str!("../../../book/src/gaussian.md")]
    mod gaussian {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/propagator.md")]
    mod propagator {}
    #[doc = include_str!("../../../book/src/phases.md")]
    mod phases {}
    #[doc = include_str!("../../../book/src/poincare.md")]
    mod poincare {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
