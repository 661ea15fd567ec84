//! Split-step spectral time evolution and imaginary-time ground states.
//!
//! One step over `dt` applies `exp(-i V dt/2) exp(-i K dt) exp(-i V dt/2)`
//! with the kinetic factor diagonal in momentum space (`hbar = 1`).
//! The potential is frozen for the step at `V_static + A exp(-2 (x-p)^2/w^2)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::controls::ControlSequence;
use crate::error::{Error, Result};
use crate::potential::{assemble_static, envelope_into, PotentialAssembly, TweezerParams};
use crate::state::{normalize, raw_inner, Grid, WaveFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsConfig {
    pub grid: Arc<Grid>,
    pub mass: f64,
    pub dt: f64,
    pub static_potential: PotentialAssembly,
    pub tweezer: TweezerParams,
}

impl PhysicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        self.static_potential.validate(&self.grid)?;
        self.tweezer.validate(&self.grid)
    }
}

/// A state defined as the ground state of a potential composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    GroundOf(PotentialAssembly),
}

/// Precomputed split-step operators for one physics configuration.
pub struct Propagator {
    grid: Arc<Grid>,
    dt: f64,
    tweezer: TweezerParams,
    static_v: Vec<f64>,
    kinetic: Vec<f64>,
    kinetic_phase: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator")
            .field("n", &self.grid.len())
            .field("dt", &self.dt)
            .finish()
    }
}

/// Scratch buffers reused across steps.
pub(crate) struct Scratch {
    fft: Vec<Complex64>,
    pub(crate) envelope: Vec<f64>,
    pub(crate) potential: Vec<f64>,
    pub(crate) half_phase: Vec<Complex64>,
}

impl Propagator {
    pub fn new(cfg: &PhysicsConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self::with_dt(cfg, cfg.dt))
    }

    /// Same configuration with an arbitrary (possibly negative) time step.
    pub fn with_dt(cfg: &PhysicsConfig, dt: f64) -> Self {
        let grid = cfg.grid.clone();
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let kinetic: Vec<f64> = grid
            .wavenumbers()
            .iter()
            .map(|k| k * k / (2.0 * cfg.mass))
            .collect();
        // 1/n folds the unnormalized inverse transform into the kinetic factor
        let kinetic_phase = kinetic
            .iter()
            .map(|&t| Complex64::from_polar(1.0 / n as f64, -t * dt))
            .collect();
        Propagator {
            static_v: assemble_static(&grid, &cfg.static_potential),
            grid,
            dt,
            tweezer: cfg.tweezer,
            kinetic,
            kinetic_phase,
            fwd,
            inv,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn tweezer(&self) -> &TweezerParams {
        &self.tweezer
    }

    pub fn static_potential(&self) -> &[f64] {
        &self.static_v
    }

    pub(crate) fn scratch(&self) -> Scratch {
        let n = self.grid.len();
        let len = self.fwd.get_inplace_scratch_len().max(self.inv.get_inplace_scratch_len());
        Scratch {
            fft: vec![Complex64::default(); len],
            envelope: vec![0.0; n],
            potential: vec![0.0; n],
            half_phase: vec![Complex64::default(); n],
        }
    }

    /// Fills `envelope`, `potential` and `half_phase = exp(-i V dt/2)` for one step.
    pub(crate) fn prepare_step(&self, p: f64, a: f64, s: &mut Scratch) {
        envelope_into(self.grid.x(), p, &self.tweezer, &mut s.envelope);
        let h = 0.5 * self.dt;
        for i in 0..self.grid.len() {
            let v = self.static_v[i] + a * s.envelope[i];
            s.potential[i] = v;
            s.half_phase[i] = Complex64::from_polar(1.0, -v * h);
        }
    }

    /// `buf <- K buf` with `K = exp(-i T dt)`.
    pub(crate) fn apply_kinetic(&self, buf: &mut [Complex64], s: &mut Scratch) {
        self.fwd.process_with_scratch(buf, &mut s.fft);
        for (b, k) in buf.iter_mut().zip(&self.kinetic_phase) {
            *b *= k;
        }
        self.inv.process_with_scratch(buf, &mut s.fft);
    }

    /// `buf <- K^dagger buf`.
    pub(crate) fn apply_kinetic_adjoint(&self, buf: &mut [Complex64], s: &mut Scratch) {
        self.fwd.process_with_scratch(buf, &mut s.fft);
        for (b, k) in buf.iter_mut().zip(&self.kinetic_phase) {
            *b *= k.conj();
        }
        self.inv.process_with_scratch(buf, &mut s.fft);
    }

    /// One full step, assuming `prepare_step` has filled `s`.
    pub(crate) fn step_prepared(&self, buf: &mut [Complex64], s: &mut Scratch) {
        for (b, d) in buf.iter_mut().zip(&s.half_phase) {
            *b *= d;
        }
        self.apply_kinetic(buf, s);
        for (b, d) in buf.iter_mut().zip(&s.half_phase) {
            *b *= d;
        }
    }

    fn check_state(&self, psi: &WaveFunction) -> Result<()> {
        if **psi.grid() != *self.grid {
            return Err(Error::GridMismatch("state and propagator grids differ".into()));
        }
        Ok(())
    }

    pub fn step(&self, psi: &WaveFunction, p: f64, a: f64) -> Result<WaveFunction> {
        self.check_state(psi)?;
        self.tweezer.check(p, a)?;
        let mut s = self.scratch();
        let mut buf = psi.values().to_vec();
        self.prepare_step(p, a, &mut s);
        self.step_prepared(&mut buf, &mut s);
        if buf.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBlowup { step: 0 });
        }
        WaveFunction::new(self.grid.clone(), buf)
    }

    /// All intermediate states `psi_0 .. psi_n`.
    pub fn propagate(&self, psi0: &WaveFunction, controls: &ControlSequence) -> Result<Vec<WaveFunction>> {
        self.check_state(psi0)?;
        controls.check_bounds(&self.tweezer)?;
        let mut s = self.scratch();
        let mut states = Vec::with_capacity(controls.n_steps() + 1);
        let mut buf = psi0.values().to_vec();
        states.push(psi0.clone());
        for (j, (&p, &a)) in controls.positions.iter().zip(&controls.amplitudes).enumerate() {
            self.prepare_step(p, a, &mut s);
            self.step_prepared(&mut buf, &mut s);
            if buf.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalBlowup { step: j });
            }
            states.push(WaveFunction::new(self.grid.clone(), buf.clone())?);
        }
        Ok(states)
    }

    /// Applies `H = T + V` to `psi` for a given potential.
    pub fn apply_hamiltonian(&self, psi: &[Complex64], potential: &[f64]) -> Vec<Complex64> {
        let n = self.grid.len();
        let mut buf = psi.to_vec();
        let mut scratch = vec![Complex64::default(); self.fwd.get_inplace_scratch_len().max(self.inv.get_inplace_scratch_len())];
        self.fwd.process_with_scratch(&mut buf, &mut scratch);
        for (b, t) in buf.iter_mut().zip(&self.kinetic) {
            *b *= t / n as f64;
        }
        self.inv.process_with_scratch(&mut buf, &mut scratch);
        for i in 0..n {
            buf[i] += potential[i] * psi[i];
        }
        buf
    }

    fn max_kinetic(&self) -> f64 {
        self.kinetic.iter().copied().fold(0.0, f64::max)
    }
}

pub fn step(psi: &WaveFunction, p: f64, a: f64, cfg: &PhysicsConfig) -> Result<WaveFunction> {
    Propagator::new(cfg)?.step(psi, p, a)
}

pub fn propagate(psi0: &WaveFunction, controls: &ControlSequence, cfg: &PhysicsConfig) -> Result<Vec<WaveFunction>> {
    Propagator::new(cfg)?.propagate(psi0, controls)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateOptions {
    /// Imaginary time step of the split-step relaxation phase.
    pub imaginary_dt: f64,
    /// Iteration budget shared by both phases.
    pub max_iterations: usize,
    /// Target for `||H psi - E psi||`.
    pub tolerance: f64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        GroundStateOptions {
            imaginary_dt: 1e-3,
            max_iterations: 200_000,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: WaveFunction,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Lowest eigenstate of `T + V` for the potential described by `spec`.
pub fn ground_state(spec: &StateSpec, cfg: &PhysicsConfig) -> Result<WaveFunction> {
    ground_state_with(spec, cfg, &GroundStateOptions::default()).map(|g| g.state)
}

/// Imaginary-time relaxation followed by a residual-driven polish.
///
/// The split-step relaxation converges quickly but its fixed point carries a
/// Trotter bias of order `imaginary_dt^2`; the polish phase iterates
/// `psi <- psi - eta (H - E) psi` (first-order imaginary time) whose fixed
/// point is an exact eigenvector of the discrete Hamiltonian.
pub fn ground_state_with(spec: &StateSpec, cfg: &PhysicsConfig, opts: &GroundStateOptions) -> Result<GroundState> {
    cfg.validate()?;
    let StateSpec::GroundOf(assembly) = spec;
    if assembly.is_empty() {
        return Err(Error::InvalidParameter("ground state of an empty assembly".into()));
    }
    assembly.validate(&cfg.grid)?;
    let grid = cfg.grid.clone();
    let n = grid.len();
    let dx = grid.dx();
    let potential = assemble_static(&grid, assembly);
    let prop = Propagator::with_dt(cfg, opts.imaginary_dt);

    // start from a narrow Gaussian at the potential minimum
    let (imin, _) = potential
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    let x0 = grid.x()[imin];
    let mut psi: Vec<Complex64> = grid
        .x()
        .iter()
        .map(|&x| Complex64::new((-(x - x0).powi(2) / 0.02).exp(), 0.0))
        .collect();
    renormalize(&mut psi, dx)?;

    let tau = opts.imaginary_dt;
    let half: Vec<f64> = potential.iter().map(|v| (-0.5 * tau * v).exp()).collect();
    let vmin = potential.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = potential.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let kin_damp: Vec<f64> = prop.kinetic.iter().map(|t| (-tau * t).exp() / n as f64).collect();
    let mut scratch = vec![Complex64::default(); prop.fwd.get_inplace_scratch_len().max(prop.inv.get_inplace_scratch_len())];

    let mut iterations = 0;
    let mut energy = f64::INFINITY;
    // relaxation phase
    while iterations < opts.max_iterations {
        for (p, h) in psi.iter_mut().zip(&half) {
            *p *= h;
        }
        prop.fwd.process_with_scratch(&mut psi, &mut scratch);
        for (p, k) in psi.iter_mut().zip(&kin_damp) {
            *p *= k;
        }
        prop.inv.process_with_scratch(&mut psi, &mut scratch);
        for (p, h) in psi.iter_mut().zip(&half) {
            *p *= h;
        }
        renormalize(&mut psi, dx)?;
        iterations += 1;
        if iterations % 50 == 0 {
            let h = prop.apply_hamiltonian(&psi, &potential);
            let e = raw_inner(&psi, &h, dx).re;
            let converged = (e - energy).abs() < 1e-12 * e.abs().max(1.0);
            energy = e;
            if converged {
                break;
            }
        }
    }

    // polish phase
    let eta = 1.0 / (prop.max_kinetic() + vmax - vmin);
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iterations {
        let h = prop.apply_hamiltonian(&psi, &potential);
        energy = raw_inner(&psi, &h, dx).re;
        let r: Vec<Complex64> = h.iter().zip(&psi).map(|(hv, p)| hv - energy * p).collect();
        residual = (r.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx).sqrt();
        if residual < opts.tolerance {
            break;
        }
        for (p, rv) in psi.iter_mut().zip(&r) {
            *p -= eta * rv;
        }
        renormalize(&mut psi, dx)?;
        iterations += 1;
    }
    if !(residual < opts.tolerance) {
        return Err(Error::Convergence { iterations, residual });
    }

    // fix the global phase: real with positive total amplitude
    let total: Complex64 = psi.iter().sum();
    let phase = if total.norm() > 0.0 { total.conj() / total.norm() } else { Complex64::new(1.0, 0.0) };
    psi.iter_mut().for_each(|p| *p *= phase);
    let state = normalize(&WaveFunction::new(grid, psi)?)?;
    Ok(GroundState {
        state,
        energy,
        residual,
        iterations,
    })
}

fn renormalize(psi: &mut [Complex64], dx: f64) -> Result<()> {
    let norm = (psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx).sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::DegenerateState(format!("norm {norm} during relaxation")));
    }
    psi.iter_mut().for_each(|v| *v /= norm);
    Ok(())
}
