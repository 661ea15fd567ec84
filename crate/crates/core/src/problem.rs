//! The atom-transport control problem: physics, initial state and target.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{PotentialAssembly, TweezerParams};
use crate::propagator::{ground_state, PhysicsConfig, Propagator, StateSpec};
use crate::state::{Grid, WaveFunction};

/// Atom start position.
pub const ATOM_POSITION: f64 = 0.6;
/// Depth of the static trap holding the atom at t = 0.
pub const STATIC_DEPTH: f64 = -15.0;
pub const MASS: f64 = 0.6;
pub const HOME_POSITION: f64 = 0.1;
pub const DT: f64 = 0.002;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemConfig {
    pub grid: Grid,
    pub mass: f64,
    pub dt: f64,
    pub static_potential: PotentialAssembly,
    pub tweezer: TweezerParams,
    pub initial: StateSpec,
    pub target: StateSpec,
    pub home_position: f64,
    pub atom_position: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        let tweezer = TweezerParams::default();
        let static_potential = PotentialAssembly::single(ATOM_POSITION, STATIC_DEPTH, tweezer.waist);
        ProblemConfig {
            grid: Grid::default(),
            mass: MASS,
            dt: DT,
            initial: StateSpec::GroundOf(static_potential.clone()),
            target: StateSpec::GroundOf(PotentialAssembly::single(
                HOME_POSITION,
                tweezer.amplitude_min,
                tweezer.waist,
            )),
            static_potential,
            tweezer,
            home_position: HOME_POSITION,
            atom_position: ATOM_POSITION,
        }
    }
}

impl ProblemConfig {
    pub fn physics(&self) -> PhysicsConfig {
        PhysicsConfig {
            grid: Arc::new(self.grid.clone()),
            mass: self.mass,
            dt: self.dt,
            static_potential: self.static_potential.clone(),
            tweezer: self.tweezer,
        }
    }

    /// Same problem with a different static trap depth; the initial state
    /// follows when it is defined by the static trap.
    pub fn with_static_depth(mut self, depth: f64) -> Self {
        let follows = self.initial == StateSpec::GroundOf(self.static_potential.clone());
        for w in &mut self.static_potential.wells {
            w.depth = depth;
        }
        if follows {
            self.initial = StateSpec::GroundOf(self.static_potential.clone());
        }
        self
    }
}

/// A resolved problem: propagator plus initial and target states.
#[derive(Debug)]
pub struct Problem {
    pub config: ProblemConfig,
    pub propagator: Propagator,
    pub initial: WaveFunction,
    pub target: WaveFunction,
}

impl Problem {
    pub fn new(config: ProblemConfig) -> Result<Self> {
        let physics = config.physics();
        physics.validate()?;
        for (name, p) in [("home_position", config.home_position), ("atom_position", config.atom_position)] {
            if !config.grid.contains(p) {
                return Err(Error::InvalidParameter(format!("{name} {p} outside grid domain")));
            }
        }
        let initial = ground_state(&config.initial, &physics)?;
        let target = ground_state(&config.target, &physics)?;
        let propagator = Propagator::new(&physics)?;
        Ok(Problem {
            config,
            propagator,
            initial,
            target,
        })
    }

    pub fn tweezer(&self) -> &TweezerParams {
        &self.config.tweezer
    }

    pub fn dt(&self) -> f64 {
        self.config.dt
    }

    pub fn home(&self) -> f64 {
        self.config.home_position
    }

    pub fn atom_position(&self) -> f64 {
        self.config.atom_position
    }
}
