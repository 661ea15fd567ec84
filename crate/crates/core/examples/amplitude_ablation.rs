//! Positions frozen (lr_position = 0): only the amplitude derivative acts, so
//! its sign decides whether fidelity climbs or falls.

use bringhome::seeding::{sinusoidal_seed, SeedConfig};
use bringhome::{kass_sweep, optimize_fixed_duration, DerivativeMode, OptimizerConfig, Problem, ProblemConfig, SweepConfig};

fn main() -> bringhome::Result<()> {
    let problem = Problem::new(ProblemConfig::default())?;
    // A short corrected sweep supplies a solution with good positions.
    let sweep = SweepConfig { t_end: 0.3, ..SweepConfig::default() };
    let seed = sinusoidal_seed(&SeedConfig { rng_seed: 1, ..SeedConfig::default() }, sweep.t_start, problem.dt(), &problem)?;
    let good = kass_sweep(&seed, &problem, &OptimizerConfig::default(), &sweep)?;
    let start = good.final_controls().expect("non-empty sweep").clone();

    for mode in [DerivativeMode::Correct, DerivativeMode::SignFlippedAmplitude] {
        let cfg = OptimizerConfig {
            mode,
            lr_position: 0.0,
            max_iterations: 200,
            fidelity_target: f64::INFINITY,
            ..OptimizerConfig::default()
        };
        let run = optimize_fixed_duration(&start, &problem, &cfg)?;
        let f = &run.fidelity_trace;
        println!(
            "{mode:?}: F {:.5} -> {:.5} -> {:.5}, mean A {:.1} -> {:.1}",
            f[0],
            f[f.len() / 2],
            f[f.len() - 1],
            run.mean_amplitude_trace[0],
            run.mean_amplitude_trace[run.mean_amplitude_trace.len() - 1],
        );
    }
    Ok(())
}
