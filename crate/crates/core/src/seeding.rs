//! Starting controls and resampling between durations.
//!
//! Sample `j` of an `n`-step sequence is placed at `t_j = j T / (n - 1)`, so
//! the first and last samples sit on the endpoints `0` and `T`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controls::{steps_for, ControlSequence};
use crate::error::{Error, Result};
use crate::potential::TweezerParams;
use crate::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedKind {
    Sinusoidal,
    HiloHeuristic,
    PlayerYellow,
    PlayerBlueTagged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedConfig {
    pub rng_seed: u64,
    pub n_harmonics: usize,
    pub position_spread: f64,
    pub amplitude_scale: f64,
    pub kind: SeedKind,
    /// Distance player-like trajectories keep from the atom.
    pub player_margin: f64,
}

impl Default for SeedConfig {
    fn default() -> Self {
        SeedConfig {
            rng_seed: 0,
            n_harmonics: 8,
            position_spread: 0.15,
            amplitude_scale: 15.0,
            kind: SeedKind::Sinusoidal,
            player_margin: 0.05,
        }
    }
}

fn sample_times(n: usize, duration: f64) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|j| j as f64 * duration / (n - 1) as f64).collect(),
    }
}

fn step_count(duration: f64, dt: f64) -> Result<usize> {
    let n = steps_for(duration, dt);
    if ((n as f64) * dt - duration).abs() > 1e-9 * duration.max(dt) {
        return Err(Error::InvalidParameter(format!(
            "duration {duration} is not a whole number of steps of {dt}"
        )));
    }
    Ok(n)
}

/// Random zero-endpoint sine series for both channels.
pub fn sinusoidal_seed(cfg: &SeedConfig, duration: f64, dt: f64, problem: &Problem) -> Result<ControlSequence> {
    let n = step_count(duration, dt)?;
    let tw = problem.tweezer();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let k = cfg.n_harmonics;
    let cp: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..=1.0) * cfg.position_spread).collect();
    let ca: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..=1.0) * cfg.amplitude_scale).collect();
    let series = |c: &[f64], t: f64| -> f64 {
        c.iter()
            .enumerate()
            .map(|(i, ci)| ci * ((i + 1) as f64 * PI * t / duration).sin())
            .sum()
    };
    let times = sample_times(n, duration);
    let positions = times
        .iter()
        .map(|&t| tw.clamp_position(problem.home() + series(&cp, t)))
        .collect();
    let amplitudes = times
        .iter()
        .map(|&t| tw.clamp_amplitude(series(&ca, t).clamp(tw.amplitude_min, 0.0)))
        .collect();
    ControlSequence::new(duration, dt, positions, amplitudes)
}

/// Independent uniform draws within the tweezer bounds at every sample.
pub fn uniform_controls(rng_seed: u64, duration: f64, dt: f64, bounds: &TweezerParams) -> Result<ControlSequence> {
    let n = step_count(duration, dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let positions = (0..n)
        .map(|_| rng.random_range(bounds.position_min..=bounds.position_max))
        .collect();
    let amplitudes = (0..n)
        .map(|_| rng.random_range(bounds.amplitude_min..=bounds.amplitude_max))
        .collect();
    ControlSequence::new(duration, dt, positions, amplitudes)
}

/// Full power throughout; out to the atom over the first fifth, then back.
pub fn hilo_heuristic_seed(duration: f64, dt: f64, problem: &Problem) -> Result<ControlSequence> {
    let n = step_count(duration, dt)?;
    let tw = problem.tweezer();
    let home = problem.home();
    let atom = problem.atom_position();
    let positions = if n < 2 {
        vec![home; n]
    } else {
        let last = n - 1;
        let peak = ((0.2 * last as f64).round() as usize).max(1);
        (0..n)
            .map(|j| {
                let p = if j <= peak {
                    home + (atom - home) * j as f64 / peak as f64
                } else {
                    atom + (home - atom) * (j - peak) as f64 / (last - peak) as f64
                };
                tw.clamp_position(p)
            })
            .collect()
    };
    ControlSequence::new(duration, dt, positions, vec![tw.amplitude_min; n])
}

/// Player-like trajectory: approach short of the atom and return.
///
/// Both kinds share the position shape; `PlayerBlueTagged` turns the
/// amplitude up to a much lower fraction of full power than `PlayerYellow`.
pub fn synthetic_player_seed(
    kind: SeedKind,
    cfg: &SeedConfig,
    duration: f64,
    dt: f64,
    problem: &Problem,
) -> Result<ControlSequence> {
    let (lo, hi) = match kind {
        SeedKind::PlayerYellow => (0.8, 0.95),
        SeedKind::PlayerBlueTagged => (0.2, 0.35),
        other => {
            return Err(Error::InvalidParameter(format!("{other:?} is not a player seed kind")));
        }
    };
    let n = step_count(duration, dt)?;
    let tw = problem.tweezer();
    let home = problem.home();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let reach = problem.atom_position() - cfg.player_margin - rng.random_range(0.0..0.05);
    let turn = rng.random_range(0.3..0.5);
    let power = tw.amplitude_min * rng.random_range(lo..hi);
    let ramp = rng.random_range(0.1..0.3);
    let times = sample_times(n, 1.0);
    let positions = times
        .iter()
        .map(|&s| {
            let shape = if s <= turn {
                (0.5 * PI * s / turn).sin().powi(2)
            } else {
                (0.5 * PI * (1.0 - s) / (1.0 - turn)).sin().powi(2)
            };
            tw.clamp_position(home + (reach - home) * shape)
        })
        .collect();
    let amplitudes = times
        .iter()
        .map(|&s| {
            let up = (s / ramp).min(1.0);
            tw.clamp_amplitude(power * (0.5 * PI * up).sin().powi(2))
        })
        .collect();
    ControlSequence::new(duration, dt, positions, amplitudes)
}

/// Any seed kind, dispatched on `cfg.kind`.
pub fn seed(cfg: &SeedConfig, duration: f64, dt: f64, problem: &Problem) -> Result<ControlSequence> {
    match cfg.kind {
        SeedKind::Sinusoidal => sinusoidal_seed(cfg, duration, dt, problem),
        SeedKind::HiloHeuristic => hilo_heuristic_seed(duration, dt, problem),
        k => synthetic_player_seed(k, cfg, duration, dt, problem),
    }
}

/// Linear interpolation in rescaled time onto `round(new_duration / dt)` samples.
pub fn resample(controls: &ControlSequence, new_duration: f64, dt: f64) -> Result<ControlSequence> {
    let n_old = controls.n_steps();
    if n_old == 0 {
        return Err(Error::DegenerateState("cannot resample an empty control sequence".into()));
    }
    let n_new = step_count(new_duration, dt)?;
    let interp = |v: &[f64]| -> Vec<f64> {
        (0..n_new)
            .map(|j| {
                if n_old == 1 || n_new == 1 {
                    return v[0];
                }
                let u = (j * (n_old - 1)) as f64 / (n_new - 1) as f64;
                let i = (u.floor() as usize).min(n_old - 2);
                let f = u - i as f64;
                if f == 0.0 {
                    v[i]
                } else if f == 1.0 {
                    v[i + 1]
                } else {
                    v[i] + f * (v[i + 1] - v[i])
                }
            })
            .collect()
    };
    ControlSequence::new(new_duration, dt, interp(&controls.positions), interp(&controls.amplitudes))
}
