//! A sweep with the sign-flipped amplitude derivative: the amplitudes drain
//! towards zero and the sweep aborts long before short durations.

use bringhome::analysis::sweep_amplitude_trace;
use bringhome::seeding::{sinusoidal_seed, SeedConfig};
use bringhome::{kass_sweep, DerivativeMode, OptimizerConfig, Problem, ProblemConfig, SweepConfig};

fn main() -> bringhome::Result<()> {
    let problem = Problem::new(ProblemConfig::default())?;
    let sweep = SweepConfig::default();
    let seed = sinusoidal_seed(&SeedConfig::default(), sweep.t_start, problem.dt(), &problem)?;
    let opt = OptimizerConfig {
        mode: DerivativeMode::SignFlippedAmplitude,
        ..OptimizerConfig::default()
    };
    println!("seed mean amplitude {:.2}", seed.mean_amplitude());
    let result = kass_sweep(&seed, &problem, &opt, &sweep)?;
    let trace = sweep_amplitude_trace(&result);
    for (e, (_, a)) in result.entries.iter().zip(&trace.points) {
        println!("T={:.3}  best F={:.4}  mean A={a:.2}", e.duration, e.best_fidelity);
    }
    println!("{:?} at {:.3}", result.termination, result.termination_duration);
    Ok(())
}
