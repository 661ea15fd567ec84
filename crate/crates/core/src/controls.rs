//! Piecewise-constant tweezer controls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::TweezerParams;

/// Tweezer position and amplitude held constant over each of `n_steps`
/// intervals of length `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSequence {
    pub duration: f64,
    pub dt: f64,
    pub positions: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

/// Number of whole time steps in `duration`.
pub fn steps_for(duration: f64, dt: f64) -> usize {
    (duration / dt).round().max(0.0) as usize
}

impl ControlSequence {
    pub fn new(duration: f64, dt: f64, positions: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "duration must be non-negative, got {duration}"
            )));
        }
        let n = steps_for(duration, dt);
        if ((n as f64) * dt - duration).abs() > 1e-9 * duration.max(dt) {
            return Err(Error::InvalidParameter(format!(
                "duration {duration} is not a whole number of steps of {dt}"
            )));
        }
        for got in [positions.len(), amplitudes.len()] {
            if got != n {
                return Err(Error::ShapeMismatch { expected: n, got });
            }
        }
        Ok(ControlSequence {
            duration,
            dt,
            positions,
            amplitudes,
        })
    }

    /// Constant controls over `duration`.
    pub fn constant(duration: f64, dt: f64, position: f64, amplitude: f64) -> Result<Self> {
        let n = steps_for(duration, dt);
        ControlSequence::new(duration, dt, vec![position; n], vec![amplitude; n])
    }

    pub fn n_steps(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mean_amplitude(&self) -> f64 {
        if self.amplitudes.is_empty() {
            return 0.0;
        }
        self.amplitudes.iter().sum::<f64>() / self.amplitudes.len() as f64
    }

    pub fn max_position(&self) -> f64 {
        self.positions.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every sample within the tweezer bounds and finite.
    pub fn check_bounds(&self, params: &TweezerParams) -> Result<()> {
        for (&p, &a) in self.positions.iter().zip(&self.amplitudes) {
            params.check(p, a)?;
        }
        Ok(())
    }

    /// Keeps the first `n_steps` samples and shortens the duration accordingly.
    pub fn truncated(&self, n_steps: usize) -> ControlSequence {
        let n = n_steps.min(self.n_steps());
        ControlSequence {
            duration: n as f64 * self.dt,
            dt: self.dt,
            positions: self.positions[..n].to_vec(),
            amplitudes: self.amplitudes[..n].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_durations_are_whole_steps() {
        for (t, n) in [(0.4, 200), (0.29, 145), (0.25, 125), (0.17, 85), (0.16, 80), (0.068, 34)] {
            assert_eq!(steps_for(t, 0.002), n);
            assert!(ControlSequence::constant(t, 0.002, 0.0, -1.0).is_ok());
        }
    }

    #[test]
    fn rejects_fractional_duration_and_shape_mismatch() {
        assert!(ControlSequence::new(0.0031, 0.002, vec![0.0; 2], vec![0.0; 2]).is_err());
        assert!(matches!(
            ControlSequence::new(0.004, 0.002, vec![0.0; 2], vec![0.0; 3]),
            Err(Error::ShapeMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn truncation_shortens_duration() {
        let c = ControlSequence::new(0.008, 0.002, vec![0.1, 0.2, 0.3, 0.4], vec![-1.0, -2.0, -3.0, -4.0])
            .unwrap();
        let t = c.truncated(2);
        assert_eq!(t.positions, vec![0.1, 0.2]);
        assert_eq!(t.amplitudes, vec![-1.0, -2.0]);
        assert!((t.duration - 0.004).abs() < 1e-15);
        assert_eq!(c.mean_amplitude(), -2.5);
        assert_eq!(c.max_position(), 0.4);
    }
}
