//! Position histogram per time step over a set of seeds, printed as text.

use bringhome::analysis::heatmap;
use bringhome::seeding::{sinusoidal_seed, SeedConfig};
use bringhome::{Problem, ProblemConfig};

fn main() -> bringhome::Result<()> {
    let problem = Problem::new(ProblemConfig::default())?;
    let solutions = (0..20)
        .map(|rng_seed| sinusoidal_seed(&SeedConfig { rng_seed, ..SeedConfig::default() }, 0.4, problem.dt(), &problem))
        .collect::<bringhome::Result<Vec<_>>>()?;
    let map = heatmap(&solutions, 0.17, problem.dt(), 24, problem.tweezer())?;
    let shades = [' ', '.', ':', '*', '#'];
    for row in map.position_counts.iter().step_by(4) {
        let line: String = row.iter().map(|&c| shades[(c as usize).min(shades.len() - 1)]).collect();
        println!("|{line}|");
    }
    println!("{} samples binned", map.total_position_count());
    Ok(())
}
