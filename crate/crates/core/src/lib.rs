//! Optimal control of optical-tweezer atom transport.
//!
//! An atom starts in the ground state of a static trap at `x = 0.6`. A movable
//! Gaussian tweezer with position `p(t)` and amplitude `A(t) in [-150, 0]`
//! must carry it to the ground state of a full-power tweezer at home.
//! The crate provides
//!
//! - a split-step propagator and imaginary-time ground states ([`propagator`]),
//! - the fidelity and its exact discrete gradient ([`gradient`]),
//! - fixed-learning-rate ascent and the duration sweep ([`optimizer`]),
//! - a switch that reproduces a sign-flipped amplitude derivative
//!   ([`DerivativeMode::SignFlippedAmplitude`]),
//! - seeds, strategy classification and summaries ([`seeding`], [`analysis`]),
//! - config and file formats plus the command implementations ([`cli`]).

pub mod analysis;
pub mod cli;
pub mod controls;
pub mod error;
pub mod gradient;
pub mod optimizer;
pub mod potential;
pub mod problem;
pub mod propagator;
pub mod seeding;
pub mod state;

pub use controls::ControlSequence;
pub use error::{Error, Result};
pub use gradient::{evaluate, fidelity, fidelity_gradient, gradcheck, GradientPair};
pub use optimizer::{
    ascend_step, kass_sweep, optimize_fixed_duration, player_variant_sweep, OptimizerConfig, RunRecord,
    SweepConfig, SweepResult,
};
pub use potential::{DerivativeMode, PotentialAssembly, TweezerParams};
pub use problem::{Problem, ProblemConfig};
pub use state::{inner_product, Grid, WaveFunction};
