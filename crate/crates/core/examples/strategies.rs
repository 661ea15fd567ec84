//! Labels and two-means clustering of a handful of trajectories.

use bringhome::analysis::{classify_strategy, cluster_two, DEFAULT_MARGIN};
use bringhome::seeding::{hilo_heuristic_seed, synthetic_player_seed, SeedConfig, SeedKind};
use bringhome::{Problem, ProblemConfig};

fn main() -> bringhome::Result<()> {
    let problem = Problem::new(ProblemConfig::default())?;
    let dt = problem.dt();
    let mut solutions = vec![hilo_heuristic_seed(0.2, dt, &problem)?];
    for rng_seed in 0..4 {
        let cfg = SeedConfig { rng_seed, ..SeedConfig::default() };
        solutions.push(synthetic_player_seed(SeedKind::PlayerYellow, &cfg, 0.3, dt, &problem)?);
    }
    for (i, s) in solutions.iter().enumerate() {
        let label = classify_strategy(s, problem.home(), problem.atom_position(), DEFAULT_MARGIN);
        println!("solution {i}: T={:.3} peak {:.3} {label:?}", s.duration, s.max_position());
    }
    let clusters = cluster_two(&solutions, 0.17, dt)?;
    for (g, group) in clusters.groups.iter().enumerate() {
        println!("group {g}: members {:?}", group.members);
    }
    Ok(())
}
