//! The frozen-amplitude sweep started from player-like seeds.

use bringhome::analysis::{classify_strategy, DEFAULT_MARGIN};
use bringhome::seeding::{synthetic_player_seed, SeedConfig, SeedKind};
use bringhome::{player_variant_sweep, OptimizerConfig, Problem, ProblemConfig, SweepConfig};

fn main() -> bringhome::Result<()> {
    let problem = Problem::new(ProblemConfig::default())?;
    let sweep = SweepConfig { t_end: 0.17, ..SweepConfig::default() };
    let cfg = SeedConfig { rng_seed: 3, ..SeedConfig::default() };
    for kind in [SeedKind::PlayerYellow, SeedKind::PlayerBlueTagged] {
        let seed = synthetic_player_seed(kind, &cfg, 0.3, problem.dt(), &problem)?;
        let result = player_variant_sweep(&seed, &problem, &OptimizerConfig::default(), &sweep)?;
        let last = result.entries.last().expect("non-empty sweep");
        let label = classify_strategy(&last.final_controls, problem.home(), problem.atom_position(), DEFAULT_MARGIN);
        println!(
            "{kind:?}: mean A {:.1}, ends at T={:.3} with F={:.4}, peak position {:.3} -> {label:?}",
            seed.mean_amplitude(),
            last.duration,
            last.best_fidelity,
            last.final_controls.max_position(),
        );
    }
    Ok(())
}
