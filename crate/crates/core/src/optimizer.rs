//! Fixed-learning-rate gradient ascent and the duration sweep.
//!
//! Learning rates act on the gradient per unit time, `dF/du_j / dt`, which
//! is the functional derivative a Krotov-style update uses. Amplitudes are
//! stepped in units of their allowed range: with `s = A_max - A_min`, the
//! update is `s * lr * dF/d(A/s) / dt = lr * s^2 * dF/dA / dt`. Every update is
//! capped per sample and clamped to the control bounds.

use serde::{Deserialize, Serialize};

use crate::controls::{steps_for, ControlSequence};
use crate::error::{Error, Result};
use crate::gradient::{evaluate, GradientPair};
use crate::potential::{DerivativeMode, TweezerParams};
use crate::problem::Problem;

/// Iteration budget of the frozen-amplitude player variant (800 + 25%).
pub const PLAYER_VARIANT_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub lr_position: f64,
    pub lr_amplitude: f64,
    pub cap_position: f64,
    pub cap_amplitude: f64,
    pub max_iterations: usize,
    pub fidelity_target: f64,
    pub mode: DerivativeMode,
    pub amplitude_frozen: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            lr_position: 3e-3,
            lr_amplitude: 0.1,
            cap_position: 0.01,
            cap_amplitude: 0.006,
            max_iterations: 800,
            fidelity_target: 0.999,
            mode: DerivativeMode::Correct,
            amplitude_frozen: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")))
            }
        };
        positive("lr_position", self.lr_position)?;
        positive("cap_position", self.cap_position)?;
        positive("cap_amplitude", self.cap_amplitude)?;
        if !self.amplitude_frozen && !(self.lr_amplitude > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lr_amplitude must be positive unless amplitudes are frozen, got {}",
                self.lr_amplitude
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub t_decrement: f64,
    pub abort_fidelity: f64,
    pub iteration_budget_per_duration: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            t_start: 0.4,
            t_end: 0.068,
            t_decrement: 0.004,
            abort_fidelity: 0.2,
            iteration_budget_per_duration: 800,
        }
    }
}

impl SweepConfig {
    /// Step counts visited by the sweep, longest first.
    pub fn step_counts(&self, dt: f64) -> Result<Vec<usize>> {
        let dec = steps_for(self.t_decrement, dt);
        if dec == 0 || ((dec as f64) * dt - self.t_decrement).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "t_decrement {} must be a positive multiple of dt {dt}",
                self.t_decrement
            )));
        }
        let start = steps_for(self.t_start, dt);
        let end = steps_for(self.t_end, dt);
        if end > start {
            return Err(Error::InvalidParameter(format!(
                "t_end {} exceeds t_start {}",
                self.t_end, self.t_start
            )));
        }
        Ok((0..)
            .map(|k| start as i64 - (k * dec) as i64)
            .take_while(|&n| n >= end as i64 && n > 0)
            .map(|n| n as usize)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetReached,
    BudgetExhausted,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Fidelity before each update and after the last one.
    pub fidelity_trace: Vec<f64>,
    pub mean_amplitude_trace: Vec<f64>,
    pub final_controls: ControlSequence,
    pub iterations: usize,
    pub termination: Termination,
}

impl RunRecord {
    pub fn best_fidelity(&self) -> f64 {
        self.fidelity_trace.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn final_fidelity(&self) -> f64 {
        self.fidelity_trace.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub duration: f64,
    pub n_steps: usize,
    pub best_fidelity: f64,
    pub final_fidelity: f64,
    pub final_controls: ControlSequence,
    pub record: RunRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTermination {
    Completed,
    Aborted,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub termination: SweepTermination,
    /// Duration of the last entry.
    pub termination_duration: f64,
}

impl SweepResult {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Shortest duration whose best fidelity reached `threshold`.
    pub fn shortest_duration_reaching(&self, threshold: f64) -> Option<f64> {
        self.entries
            .iter()
            .filter(|e| e.best_fidelity >= threshold)
            .map(|e| e.duration)
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))))
    }

    /// Longest prefix of durations that all reached `threshold`, ending at the
    /// returned duration.
    pub fn sustained_down_to(&self, threshold: f64) -> Option<f64> {
        self.entries
            .iter()
            .take_while(|e| e.best_fidelity >= threshold)
            .last()
            .map(|e| e.duration)
    }

    pub fn final_controls(&self) -> Option<&ControlSequence> {
        self.entries.last().map(|e| &e.final_controls)
    }
}

/// One capped ascent update; see the module docs for the gradient scaling.
pub fn ascend_step(
    controls: &ControlSequence,
    gradient: &GradientPair,
    cfg: &OptimizerConfig,
    bounds: &TweezerParams,
) -> Result<ControlSequence> {
    let n = controls.n_steps();
    if gradient.len() != n || gradient.d_amplitudes.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: gradient.len(),
        });
    }
    let inv_dt = 1.0 / controls.dt;
    let mut next = controls.clone();
    for (p, g) in next.positions.iter_mut().zip(&gradient.d_positions) {
        let delta = (cfg.lr_position * g * inv_dt).clamp(-cfg.cap_position, cfg.cap_position);
        *p = bounds.clamp_position(*p + delta);
    }
    if !cfg.amplitude_frozen {
        let span = bounds.amplitude_max - bounds.amplitude_min;
        let rate = cfg.lr_amplitude * span * span * inv_dt;
        for (a, g) in next.amplitudes.iter_mut().zip(&gradient.d_amplitudes) {
            let delta = (rate * g).clamp(-cfg.cap_amplitude, cfg.cap_amplitude);
            *a = bounds.clamp_amplitude(*a + delta);
        }
    }
    Ok(next)
}

/// Gradient ascent at a fixed duration until the fidelity target or the
/// iteration budget is reached.
pub fn optimize_fixed_duration(seed: &ControlSequence, problem: &Problem, cfg: &OptimizerConfig) -> Result<RunRecord> {
    cfg.validate()?;
    seed.check_bounds(problem.tweezer())?;
    let mut controls = seed.clone();
    let mut eval = evaluate(&controls, problem, cfg.mode)?;
    let mut fidelity_trace = vec![eval.fidelity];
    let mut mean_amplitude_trace = vec![controls.mean_amplitude()];
    let mut iterations = 0;
    let termination = loop {
        if eval.fidelity >= cfg.fidelity_target {
            break Termination::TargetReached;
        }
        if iterations >= cfg.max_iterations {
            break Termination::BudgetExhausted;
        }
        let next = ascend_step(&controls, &eval.gradient, cfg, problem.tweezer())?;
        match evaluate(&next, problem, cfg.mode) {
            Ok(e) => {
                controls = next;
                eval = e;
            }
            Err(Error::NumericalBlowup { .. }) => break Termination::NumericalFailure,
            Err(e) => return Err(e),
        }
        iterations += 1;
        fidelity_trace.push(eval.fidelity);
        mean_amplitude_trace.push(controls.mean_amplitude());
    };
    Ok(RunRecord {
        fidelity_trace,
        mean_amplitude_trace,
        final_controls: controls,
        iterations,
        termination,
    })
}

/// Optimizes at `t_start`, then reuses the result truncated to each shorter
/// duration until `t_end` or until the best fidelity drops below the abort
/// threshold.
pub fn kass_sweep(
    seed: &ControlSequence,
    problem: &Problem,
    opt: &OptimizerConfig,
    sweep: &SweepConfig,
) -> Result<SweepResult> {
    let dt = problem.dt();
    let counts = sweep.step_counts(dt)?;
    if counts.first() != Some(&seed.n_steps()) {
        return Err(Error::InvalidParameter(format!(
            "seed has {} steps but the sweep starts at {} ({} steps)",
            seed.n_steps(),
            sweep.t_start,
            counts.first().copied().unwrap_or(0)
        )));
    }
    let cfg = OptimizerConfig {
        max_iterations: sweep.iteration_budget_per_duration,
        ..*opt
    };
    let mut entries = Vec::with_capacity(counts.len());
    let mut current = seed.clone();
    let mut termination = SweepTermination::Completed;
    for &n in &counts {
        current = current.truncated(n);
        let record = optimize_fixed_duration(&current, problem, &cfg)?;
        let entry = SweepEntry {
            duration: n as f64 * dt,
            n_steps: n,
            best_fidelity: record.best_fidelity(),
            final_fidelity: record.final_fidelity(),
            final_controls: record.final_controls.clone(),
            record,
        };
        current = entry.final_controls.clone();
        let failed = entry.record.termination == Termination::NumericalFailure;
        let abort = entry.best_fidelity < sweep.abort_fidelity;
        entries.push(entry);
        if failed {
            termination = SweepTermination::NumericalFailure;
            break;
        }
        if abort {
            termination = SweepTermination::Aborted;
            break;
        }
    }
    let termination_duration = entries.last().map_or(sweep.t_start, |e| e.duration);
    Ok(SweepResult {
        entries,
        termination,
        termination_duration,
    })
}

/// Sweep with frozen amplitudes and the enlarged iteration budget, starting
/// at the seed's own duration.
pub fn player_variant_sweep(
    seed: &ControlSequence,
    problem: &Problem,
    opt: &OptimizerConfig,
    sweep: &SweepConfig,
) -> Result<SweepResult> {
    let sweep = SweepConfig {
        t_start: seed.n_steps() as f64 * problem.dt(),
        iteration_budget_per_duration: PLAYER_VARIANT_ITERATIONS,
        ..*sweep
    };
    let opt = OptimizerConfig {
        amplitude_frozen: true,
        ..*opt
    };
    kass_sweep(seed, problem, &opt, &sweep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(p: Vec<f64>, a: Vec<f64>) -> ControlSequence {
        let n = p.len();
        ControlSequence::new(n as f64 * 0.002, 0.002, p, a).unwrap()
    }

    #[test]
    fn zero_gradient_leaves_controls() {
        let c = seq(vec![0.1, 0.2, 0.3], vec![-10.0, -20.0, -30.0]);
        let next = ascend_step(&c, &GradientPair::zeros(3), &OptimizerConfig::default(), &TweezerParams::default())
            .unwrap();
        assert_eq!(next, c);
    }

    #[test]
    fn frozen_amplitudes_are_bit_exact() {
        let c = seq(vec![0.1, 0.2], vec![-10.123456789, -149.99999]);
        let g = GradientPair {
            d_positions: vec![1.0, -1.0],
            d_amplitudes: vec![123.0, -456.0],
        };
        let cfg = OptimizerConfig {
            amplitude_frozen: true,
            ..OptimizerConfig::default()
        };
        let next = ascend_step(&c, &g, &cfg, &TweezerParams::default()).unwrap();
        for (a, b) in next.amplitudes.iter().zip(&c.amplitudes) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_ne!(next.positions, c.positions);
    }

    #[test]
    fn amplitudes_clamp_at_full_power() {
        let c = seq(vec![0.0], vec![-150.0]);
        let g = GradientPair {
            d_positions: vec![0.0],
            d_amplitudes: vec![-1.0],
        };
        let next = ascend_step(&c, &g, &OptimizerConfig::default(), &TweezerParams::default()).unwrap();
        assert_eq!(next.amplitudes[0], -150.0);
    }

    #[test]
    fn updates_respect_caps() {
        let c = seq(vec![0.0, 0.0], vec![-50.0, -50.0]);
        let g = GradientPair {
            d_positions: vec![1e6, -1e6],
            d_amplitudes: vec![1e6, -1e6],
        };
        let cfg = OptimizerConfig::default();
        let next = ascend_step(&c, &g, &cfg, &TweezerParams::default()).unwrap();
        assert_eq!(next.positions, vec![cfg.cap_position, -cfg.cap_position]);
        assert_eq!(next.amplitudes, vec![-50.0 + cfg.cap_amplitude, -50.0 - cfg.cap_amplitude]);
    }

    #[test]
    fn small_steps_scale_with_range_squared_over_dt() {
        let c = seq(vec![0.2], vec![-50.0]);
        let g = GradientPair {
            d_positions: vec![1e-6],
            d_amplitudes: vec![1e-9],
        };
        let cfg = OptimizerConfig::default();
        let next = ascend_step(&c, &g, &cfg, &TweezerParams::default()).unwrap();
        let dp = cfg.lr_position * 1e-6 / 0.002;
        let da = cfg.lr_amplitude * 150.0 * 150.0 * 1e-9 / 0.002;
        assert!((next.positions[0] - (0.2 + dp)).abs() < 1e-15);
        assert!((next.amplitudes[0] - (-50.0 + da)).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let c = seq(vec![0.0, 0.0], vec![-1.0, -1.0]);
        assert!(ascend_step(&c, &GradientPair::zeros(3), &OptimizerConfig::default(), &TweezerParams::default()).is_err());
    }

    #[test]
    fn sweep_step_counts() {
        let counts = SweepConfig::default().step_counts(0.002).unwrap();
        assert_eq!(counts.first(), Some(&200));
        assert_eq!(counts.last(), Some(&34));
        assert_eq!(counts.len(), 84);
        assert!(counts.windows(2).all(|w| w[0] - w[1] == 2));
        let bad = SweepConfig {
            t_decrement: 0.003,
            ..SweepConfig::default()
        };
        assert!(bad.step_counts(0.002).is_err());
    }
}
