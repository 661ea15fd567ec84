//! Gaussian tweezer potential and its analytic control derivatives.
//!
//! A tweezer at position `p` with amplitude `A` and waist `w` contributes
//! `A exp(-2 (x - p)^2 / w^2)`. Amplitudes are non-positive: `A = -150` is
//! full power and `A = 0` switches the tweezer off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TweezerParams {
    pub waist: f64,
    pub amplitude_min: f64,
    pub amplitude_max: f64,
    pub position_min: f64,
    pub position_max: f64,
}

impl Default for TweezerParams {
    fn default() -> Self {
        TweezerParams {
            waist: 0.25,
            amplitude_min: -150.0,
            amplitude_max: 0.0,
            position_min: -0.5,
            position_max: 0.9,
        }
    }
}

impl TweezerParams {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.waist > 0.0) {
            return Err(Error::InvalidParameter(format!("waist must be positive, got {}", self.waist)));
        }
        if !(self.amplitude_min < self.amplitude_max) {
            return Err(Error::InvalidParameter(format!(
                "amplitude bounds must satisfy min < max, got [{}, {}]",
                self.amplitude_min, self.amplitude_max
            )));
        }
        if !(self.position_min < self.position_max
            && grid.contains(self.position_min)
            && grid.contains(self.position_max))
        {
            return Err(Error::InvalidParameter(format!(
                "position bounds [{}, {}] must be ordered and strictly inside the grid",
                self.position_min, self.position_max
            )));
        }
        Ok(())
    }

    pub fn check_position(&self, p: f64) -> Result<()> {
        if !(p >= self.position_min && p <= self.position_max) {
            return Err(Error::OutOfBounds {
                what: "position",
                value: p,
                lo: self.position_min,
                hi: self.position_max,
            });
        }
        Ok(())
    }

    pub fn check_amplitude(&self, a: f64) -> Result<()> {
        if !(a >= self.amplitude_min && a <= self.amplitude_max) {
            return Err(Error::OutOfBounds {
                what: "amplitude",
                value: a,
                lo: self.amplitude_min,
                hi: self.amplitude_max,
            });
        }
        Ok(())
    }

    pub fn check(&self, p: f64, a: f64) -> Result<()> {
        self.check_position(p)?;
        self.check_amplitude(a)
    }

    pub fn clamp_position(&self, p: f64) -> f64 {
        p.clamp(self.position_min, self.position_max)
    }

    pub fn clamp_amplitude(&self, a: f64) -> f64 {
        a.clamp(self.amplitude_min, self.amplitude_max)
    }

    /// The `2 / w^2` factor in the exponent.
    fn exponent_scale(&self) -> f64 {
        2.0 / (self.waist * self.waist)
    }
}

/// How the amplitude derivative of the tweezer is evaluated.
///
/// `SignFlippedAmplitude` reproduces a hard-coded derivative with a spurious
/// leading minus sign, which turns gradient ascent on the amplitude into
/// descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    #[default]
    Correct,
    SignFlippedAmplitude,
}

impl DerivativeMode {
    pub fn amplitude_sign(self) -> f64 {
        match self {
            DerivativeMode::Correct => 1.0,
            DerivativeMode::SignFlippedAmplitude => -1.0,
        }
    }
}

impl std::str::FromStr for DerivativeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "correct" => Ok(DerivativeMode::Correct),
            "sign_flipped" | "sign_flipped_amplitude" => Ok(DerivativeMode::SignFlippedAmplitude),
            other => Err(format!("unknown derivative mode `{other}` (expected correct | sign_flipped)")),
        }
    }
}

/// Gaussian envelope `exp(-2 (x - p)^2 / w^2)` written into `out`.
pub(crate) fn envelope_into(x: &[f64], p: f64, params: &TweezerParams, out: &mut [f64]) {
    let s = params.exponent_scale();
    for (o, &xi) in out.iter_mut().zip(x) {
        let d = xi - p;
        *o = (-s * d * d).exp();
    }
}

pub fn tweezer_potential(grid: &Grid, p: f64, a: f64, params: &TweezerParams) -> Result<Vec<f64>> {
    params.check(p, a)?;
    let mut out = vec![0.0; grid.len()];
    envelope_into(grid.x(), p, params, &mut out);
    out.iter_mut().for_each(|v| *v *= a);
    Ok(out)
}

/// `A (4 / w^2) (x - p) exp(-2 (x - p)^2 / w^2)`.
pub fn d_tweezer_d_position(grid: &Grid, p: f64, a: f64, params: &TweezerParams) -> Result<Vec<f64>> {
    params.check(p, a)?;
    let mut out = vec![0.0; grid.len()];
    envelope_into(grid.x(), p, params, &mut out);
    let c = a * 2.0 * params.exponent_scale();
    for (o, &xi) in out.iter_mut().zip(grid.x()) {
        *o *= c * (xi - p);
    }
    Ok(out)
}

/// `exp(-2 (x - p)^2 / w^2)`, negated under [`DerivativeMode::SignFlippedAmplitude`].
pub fn d_tweezer_d_amplitude(
    grid: &Grid,
    p: f64,
    a: f64,
    params: &TweezerParams,
    mode: DerivativeMode,
) -> Result<Vec<f64>> {
    params.check(p, a)?;
    let mut out = vec![0.0; grid.len()];
    envelope_into(grid.x(), p, params, &mut out);
    if mode == DerivativeMode::SignFlippedAmplitude {
        out.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(out)
}

/// One Gaussian well of a static landscape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Well {
    pub center: f64,
    pub depth: f64,
    pub waist: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialAssembly {
    #[serde(default)]
    pub wells: Vec<Well>,
}

impl PotentialAssembly {
    pub fn single(center: f64, depth: f64, waist: f64) -> Self {
        PotentialAssembly {
            wells: vec![Well { center, depth, waist }],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.wells.is_empty()
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        for w in &self.wells {
            if !grid.contains(w.center) {
                return Err(Error::InvalidParameter(format!(
                    "well center {} outside grid domain",
                    w.center
                )));
            }
            if !(w.depth <= 0.0) {
                return Err(Error::InvalidParameter(format!("well depth {} must be <= 0", w.depth)));
            }
            if !(w.waist > 0.0) {
                return Err(Error::InvalidParameter(format!("well waist {} must be > 0", w.waist)));
            }
        }
        Ok(())
    }
}

pub fn assemble_static(grid: &Grid, assembly: &PotentialAssembly) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for w in &assembly.wells {
        let s = 2.0 / (w.waist * w.waist);
        for (o, &xi) in out.iter_mut().zip(grid.x()) {
            let d = xi - w.center;
            *o += w.depth * (-s * d * d).exp();
        }
    }
    out
}
