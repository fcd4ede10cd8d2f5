//! Large-deviation tail approximations for sums of i.i.d. zero-mean random
//! variables.
//!
//! The crate follows the classical exponential-tilting route: the cumulant
//! generating function `kappa` of the summand law ([`cgf`]) is tilted until
//! its mean hits the target ([`saddle`]), and the resulting rate exponent and
//! correction function feed closed-form tail approximations
//! ([`asymptotics`]). Exact and Monte Carlo estimators ([`oracles`]) serve as
//! ground truth, [`process`] extends the machinery to Brownian motion with
//! compound Poisson jumps, and [`report`] persists results.

pub mod asymptotics;
pub mod cgf;
pub mod dist;
pub mod error;
pub mod oracles;
pub mod process;
pub mod report;
pub mod rng;
pub mod saddle;
pub mod special;

pub use asymptotics::{ErrorNote, Method, Side, TailEstimate};
pub use cgf::{Bound, CgfProfile, CumulantFunction, Interval, TiltedDistribution};
pub use dist::{Cumulants, DistributionSpec, Family, Lattice, Law};
pub use error::{Error, Result};
pub use oracles::SimulationReport;
pub use process::{ProcessProfile, ProcessSpec};
pub use report::{ResultRow, RunManifest};
pub use saddle::SaddleSolution;
