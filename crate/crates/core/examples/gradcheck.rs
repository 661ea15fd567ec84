//! Checks the analytic gradient against central differences in both modes.

use bringhome::gradient::{gradcheck, Channel, GradcheckTolerances};
use bringhome::seeding::uniform_controls;
use bringhome::{DerivativeMode, Problem, ProblemConfig};

fn main() -> bringhome::Result<()> {
    let problem = Problem::new(ProblemConfig::default())?;
    let controls = uniform_controls(7, 0.1, problem.dt(), problem.tweezer())?;
    let tol = GradcheckTolerances::default();
    for mode in [DerivativeMode::Correct, DerivativeMode::SignFlippedAmplitude] {
        let r = gradcheck(&controls, &problem, mode, &tol)?;
        println!(
            "{mode:?}: max relative error {:.2e}, sign disagreements position {}/{} amplitude {}/{}",
            r.max_relative_error(),
            r.sign_disagreements(Channel::Position),
            r.compared(Channel::Position),
            r.sign_disagreements(Channel::Amplitude),
            r.compared(Channel::Amplitude),
        );
    }
    Ok(())
}
