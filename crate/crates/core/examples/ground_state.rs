//! Initial and target states of the default problem.

use bringhome::propagator::{ground_state_with, GroundStateOptions};
use bringhome::ProblemConfig;

fn main() -> bringhome::Result<()> {
    let cfg = ProblemConfig::default();
    let physics = cfg.physics();
    for (name, spec) in [("initial", &cfg.initial), ("target", &cfg.target)] {
        let g = ground_state_with(spec, &physics, &GroundStateOptions::default())?;
        let x = physics.grid.x();
        let density: Vec<f64> = g.state.values().iter().map(|v| v.norm_sqr()).collect();
        let mean: f64 = x.iter().zip(&density).map(|(x, d)| x * d).sum::<f64>() * physics.grid.dx();
        println!(
            "{name}: energy {:.4}, residual {:.1e}, <x> = {mean:.4}, {} iterations",
            g.energy, g.residual, g.iterations
        );
    }
    Ok(())
}
