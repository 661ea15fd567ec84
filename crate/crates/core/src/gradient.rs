//! Terminal fidelity and its exact discrete gradient.
//!
//! The state is propagated forward with the split-step scheme and the costate
//! `chi_N = <target|psi_N> target` is propagated backward with the adjoint of
//! the very same step operators. For step `j` with `U_j = D_j K D_j` and
//! `D_j = exp(-i V_j dt/2)`, a control `u` entering `V_j` through `G = dV/du`
//! contributes
//!
//! ```text
//! dF/du_j = dt * Im( <chi_{j+1}| G |psi_{j+1}> + <mu_j| G |D_j psi_j> )
//! mu_j    = K^dagger D_j^dagger chi_{j+1}
//! ```
//!
//! which is the derivative of the discrete map, not of its continuum limit.
//! Gradients point uphill in fidelity.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::controls::ControlSequence;
use crate::error::{Error, Result};
use crate::potential::DerivativeMode;
use crate::problem::Problem;
use crate::state::raw_inner;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientPair {
    pub d_positions: Vec<f64>,
    pub d_amplitudes: Vec<f64>,
}

impl GradientPair {
    pub fn zeros(n: usize) -> Self {
        GradientPair {
            d_positions: vec![0.0; n],
            d_amplitudes: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.d_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d_positions.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.d_positions
            .iter()
            .chain(&self.d_amplitudes)
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }
}

/// Fidelity together with its gradient from one forward/backward pass.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub fidelity: f64,
    pub overlap: Complex64,
    pub gradient: GradientPair,
}

fn forward_final(controls: &ControlSequence, problem: &Problem) -> Result<Vec<Complex64>> {
    let prop = &problem.propagator;
    let mut s = prop.scratch();
    let mut buf = problem.initial.values().to_vec();
    for (j, (&p, &a)) in controls.positions.iter().zip(&controls.amplitudes).enumerate() {
        prop.prepare_step(p, a, &mut s);
        prop.step_prepared(&mut buf, &mut s);
        if !buf.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericalBlowup { step: j });
        }
    }
    Ok(buf)
}

fn check_controls(controls: &ControlSequence, problem: &Problem) -> Result<()> {
    if (controls.dt - problem.dt()).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "controls dt {} differs from problem dt {}",
            controls.dt,
            problem.dt()
        )));
    }
    controls.check_bounds(problem.tweezer())
}

/// `|<target|psi(T)>|^2`.
pub fn fidelity(controls: &ControlSequence, problem: &Problem) -> Result<f64> {
    check_controls(controls, problem)?;
    fidelity_unchecked(controls, problem)
}

/// Fidelity without bounds validation; finite differences probe just outside
/// the admissible box.
pub(crate) fn fidelity_unchecked(controls: &ControlSequence, problem: &Problem) -> Result<f64> {
    let psi = forward_final(controls, problem)?;
    Ok(raw_inner(problem.target.values(), &psi, problem.propagator.grid().dx()).norm_sqr())
}

pub fn fidelity_gradient(controls: &ControlSequence, problem: &Problem, mode: DerivativeMode) -> Result<GradientPair> {
    evaluate(controls, problem, mode).map(|e| e.gradient)
}

pub fn evaluate(controls: &ControlSequence, problem: &Problem, mode: DerivativeMode) -> Result<Evaluation> {
    check_controls(controls, problem)?;
    let prop = &problem.propagator;
    let grid = prop.grid();
    let n = grid.len();
    let dx = grid.dx();
    let dt = prop.dt();
    let steps = controls.n_steps();
    let tw = prop.tweezer();
    let pos_factor = 4.0 / (tw.waist * tw.waist);
    let amp_sign = mode.amplitude_sign();

    let mut s = prop.scratch();
    let mut states: Vec<Vec<Complex64>> = Vec::with_capacity(steps + 1);
    let mut buf = problem.initial.values().to_vec();
    states.push(buf.clone());
    for (j, (&p, &a)) in controls.positions.iter().zip(&controls.amplitudes).enumerate() {
        prop.prepare_step(p, a, &mut s);
        prop.step_prepared(&mut buf, &mut s);
        if !buf.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericalBlowup { step: j });
        }
        states.push(buf.clone());
    }

    let overlap = raw_inner(problem.target.values(), &buf, dx);
    let fidelity = overlap.norm_sqr();
    let mut grad = GradientPair::zeros(steps);

    let mut chi: Vec<Complex64> = problem.target.values().iter().map(|t| overlap * t).collect();
    let mut mu = vec![Complex64::default(); n];
    for j in (0..steps).rev() {
        let p = controls.positions[j];
        let a = controls.amplitudes[j];
        prop.prepare_step(p, a, &mut s);
        for i in 0..n {
            mu[i] = s.half_phase[i].conj() * chi[i];
        }
        prop.apply_kinetic_adjoint(&mut mu, &mut s);

        let next = &states[j + 1];
        let cur = &states[j];
        let mut acc_p = 0.0;
        let mut acc_a = 0.0;
        for i in 0..n {
            let phi = s.half_phase[i] * cur[i];
            let c = chi[i].conj() * next[i] + mu[i].conj() * phi;
            let e = s.envelope[i];
            let ga = amp_sign * e;
            let gp = a * pos_factor * (grid.x()[i] - p) * e;
            acc_a += ga * c.im;
            acc_p += gp * c.im;
        }
        grad.d_amplitudes[j] = dt * dx * acc_a;
        grad.d_positions[j] = dt * dx * acc_p;

        for i in 0..n {
            chi[i] = s.half_phase[i].conj() * mu[i];
        }
    }

    Ok(Evaluation {
        fidelity,
        overlap,
        gradient: grad,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradcheckTolerances {
    pub step_position: f64,
    pub step_amplitude: f64,
    /// Maximum relative error between analytic and numeric derivatives.
    pub relative: f64,
    /// Derivatives below this magnitude are not compared.
    pub negligible: f64,
}

impl Default for GradcheckTolerances {
    fn default() -> Self {
        GradcheckTolerances {
            step_position: 1e-5,
            step_amplitude: 1e-3,
            relative: 1e-4,
            negligible: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Position,
    Amplitude,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Channel::Position => "position",
            Channel::Amplitude => "amplitude",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateCheck {
    pub channel: Channel,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_error: f64,
    /// The analytic derivative is above the negligible threshold.
    pub compared: bool,
    pub sign_disagrees: bool,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub mode: DerivativeMode,
    pub fidelity: f64,
    pub tolerances: GradcheckTolerances,
    pub entries: Vec<CoordinateCheck>,
}

impl GradcheckReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn channel(&self, ch: Channel) -> impl Iterator<Item = &CoordinateCheck> {
        self.entries.iter().filter(move |e| e.channel == ch)
    }

    pub fn compared(&self, ch: Channel) -> usize {
        self.channel(ch).filter(|e| e.compared).count()
    }

    pub fn sign_disagreements(&self, ch: Channel) -> usize {
        self.channel(ch).filter(|e| e.sign_disagrees).count()
    }

    pub fn total_sign_disagreements(&self) -> usize {
        self.entries.iter().filter(|e| e.sign_disagrees).count()
    }

    /// Fraction of compared coordinates of a channel whose signs disagree.
    pub fn sign_disagreement_fraction(&self, ch: Channel) -> f64 {
        let n = self.compared(ch);
        if n == 0 {
            0.0
        } else {
            self.sign_disagreements(ch) as f64 / n as f64
        }
    }

    pub fn tolerance_failures(&self) -> usize {
        self.entries.iter().filter(|e| e.compared && !e.within_tolerance).count()
    }

    pub fn max_relative_error(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.compared)
            .map(|e| e.relative_error)
            .fold(0.0, f64::max)
    }

    /// Plain-text table, one row per coordinate, followed by a summary.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# mode={:?} fidelity={:.12}", self.mode, self.fidelity);
        let _ = writeln!(
            out,
            "{:<10} {:>6} {:>15} {:>15} {:>12} {:>5}",
            "channel", "index", "analytic", "numeric", "rel_error", "flag"
        );
        for e in &self.entries {
            let flag = if e.sign_disagrees {
                "SIGN"
            } else if e.compared && !e.within_tolerance {
                "TOL"
            } else if !e.compared {
                "-"
            } else {
                "ok"
            };
            let _ = writeln!(
                out,
                "{:<10} {:>6} {:>15.6e} {:>15.6e} {:>12.3e} {:>5}",
                e.channel, e.index, e.analytic, e.numeric, e.relative_error, flag
            );
        }
        for ch in [Channel::Position, Channel::Amplitude] {
            let _ = writeln!(
                out,
                "# {ch}: compared={} sign_disagreements={} tolerance_failures={}",
                self.compared(ch),
                self.sign_disagreements(ch),
                self.channel(ch).filter(|e| e.compared && !e.within_tolerance).count()
            );
        }
        out
    }
}

fn slot(c: &mut ControlSequence, ch: Channel, j: usize) -> &mut f64 {
    match ch {
        Channel::Position => &mut c.positions[j],
        Channel::Amplitude => &mut c.amplitudes[j],
    }
}

/// Compares the analytic gradient (under `mode`) with central differences of
/// the fidelity, coordinate by coordinate.
pub fn gradcheck(
    controls: &ControlSequence,
    problem: &Problem,
    mode: DerivativeMode,
    tol: &GradcheckTolerances,
) -> Result<GradcheckReport> {
    let eval = evaluate(controls, problem, mode)?;
    let mut entries = Vec::with_capacity(2 * controls.n_steps());
    let mut probe = controls.clone();
    for ch in [Channel::Position, Channel::Amplitude] {
        for j in 0..controls.n_steps() {
            let (h, analytic) = match ch {
                Channel::Position => (tol.step_position, eval.gradient.d_positions[j]),
                Channel::Amplitude => (tol.step_amplitude, eval.gradient.d_amplitudes[j]),
            };
            let orig = *slot(&mut probe, ch, j);
            *slot(&mut probe, ch, j) = orig + h;
            let fp = fidelity_unchecked(&probe, problem)?;
            *slot(&mut probe, ch, j) = orig - h;
            let fm = fidelity_unchecked(&probe, problem)?;
            *slot(&mut probe, ch, j) = orig;
            let numeric = (fp - fm) / (2.0 * h);
            let compared = analytic.abs() > tol.negligible;
            let relative_error = if compared {
                (analytic - numeric).abs() / numeric.abs()
            } else {
                0.0
            };
            let sign_disagrees = compared && analytic.signum() != numeric.signum();
            entries.push(CoordinateCheck {
                channel: ch,
                index: j,
                analytic,
                numeric,
                relative_error,
                compared,
                sign_disagrees,
                within_tolerance: !compared || relative_error < tol.relative,
            });
        }
    }
    Ok(GradcheckReport {
        mode,
        fidelity: eval.fidelity,
        tolerances: *tol,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemConfig;
    use crate::seeding::uniform_controls;

    fn problem() -> Problem {
        Problem::new(ProblemConfig::default()).unwrap()
    }

    fn controls(p: &Problem, seed: u64, duration: f64) -> ControlSequence {
        uniform_controls(seed, duration, p.dt(), p.tweezer()).unwrap()
    }

    #[test]
    fn analytic_matches_central_differences() {
        let p = problem();
        let c = controls(&p, 11, 0.02);
        let report = gradcheck(&c, &p, DerivativeMode::Correct, &GradcheckTolerances::default()).unwrap();
        assert!(report.compared(Channel::Position) > 0);
        assert!(report.compared(Channel::Amplitude) > 0);
        assert_eq!(report.tolerance_failures(), 0, "{}", report.to_table());
        assert_eq!(report.total_sign_disagreements(), 0);
    }

    #[test]
    fn flipped_mode_negates_only_amplitudes() {
        let p = problem();
        let c = controls(&p, 5, 0.03);
        let good = fidelity_gradient(&c, &p, DerivativeMode::Correct).unwrap();
        let bad = fidelity_gradient(&c, &p, DerivativeMode::SignFlippedAmplitude).unwrap();
        assert_eq!(good.d_positions, bad.d_positions);
        for (g, b) in good.d_amplitudes.iter().zip(&bad.d_amplitudes) {
            assert_eq!(*g, -*b);
        }
    }

    #[test]
    fn directional_derivative_matches_squared_norm() {
        let p = problem();
        let c = controls(&p, 3, 0.04);
        let g = fidelity_gradient(&c, &p, DerivativeMode::Correct).unwrap();
        // Probe along the gradient, scaled per channel so both stay in bounds.
        let (sp, sa) = (1e-6, 1e-3);
        let shifted = |sign: f64| {
            let mut d = c.clone();
            for j in 0..d.n_steps() {
                d.positions[j] += sign * sp * g.d_positions[j];
                d.amplitudes[j] += sign * sa * g.d_amplitudes[j];
            }
            fidelity_unchecked(&d, &p).unwrap()
        };
        let numeric = (shifted(1.0) - shifted(-1.0)) / 2.0;
        let analytic: f64 = g.d_positions.iter().map(|x| sp * x * x).sum::<f64>()
            + g.d_amplitudes.iter().map(|x| sa * x * x).sum::<f64>();
        assert!((numeric - analytic).abs() < 1e-4 * analytic.abs().max(1e-12), "{numeric} vs {analytic}");
    }

    #[test]
    fn empty_controls_give_initial_overlap() {
        let p = problem();
        let c = ControlSequence::new(0.0, p.dt(), vec![], vec![]).unwrap();
        let e = evaluate(&c, &p, DerivativeMode::Correct).unwrap();
        assert!(e.gradient.is_empty());
        let expected = crate::state::inner_product(&p.target, &p.initial).unwrap().norm_sqr();
        assert!((e.fidelity - expected).abs() < 1e-14);
    }

    #[test]
    fn fidelity_agrees_with_evaluate() {
        let p = problem();
        let c = controls(&p, 8, 0.05);
        let f = fidelity(&c, &p).unwrap();
        let e = evaluate(&c, &p, DerivativeMode::Correct).unwrap();
        assert_eq!(f, e.fidelity);
        assert!((0.0..=1.0 + 1e-12).contains(&f));
    }

    #[test]
    fn mismatched_dt_rejected() {
        let p = problem();
        let c = ControlSequence::constant(0.01, 0.001, 0.1, -10.0).unwrap();
        assert!(fidelity(&c, &p).is_err());
    }
}
