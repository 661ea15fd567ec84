//! Full sweep with the correct derivative; prints every fifth duration.

use bringhome::seeding::{sinusoidal_seed, SeedConfig};
use bringhome::{kass_sweep, OptimizerConfig, Problem, ProblemConfig, SweepConfig};

fn main() -> bringhome::Result<()> {
    let problem = Problem::new(ProblemConfig::default())?;
    let sweep = SweepConfig::default();
    let rng_seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let seed = sinusoidal_seed(&SeedConfig { rng_seed, ..SeedConfig::default() }, sweep.t_start, problem.dt(), &problem)?;
    let result = kass_sweep(&seed, &problem, &OptimizerConfig::default(), &sweep)?;
    for e in result.entries.iter().step_by(5).chain(result.entries.last()) {
        println!(
            "T={:.3}  best F={:.5}  iterations={:>3}  mean A={:.1}",
            e.duration,
            e.best_fidelity,
            e.record.iterations,
            e.final_controls.mean_amplitude()
        );
    }
    println!("shortest duration reaching 0.999: {:?}", result.shortest_duration_reaching(0.999));
    Ok(())
}
