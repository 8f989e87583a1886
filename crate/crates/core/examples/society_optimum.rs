// Thresholds that are jointly optimal for the society, as a function of the
// mean proposed increment μ, for two equal groups of 300.
//
// cargo run --example society_optimum

use vote_walk::model::{EnvironmentParams, VotingRule};
use vote_walk::optimize::{solve_society_system, solve_y0};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let y0 = solve_y0();
    println!(
        "y0 = {y0:.12}  (neutral optimum t = ∓σ·y0/√g = ∓{:.6})",
        10.0 * y0 / 300f64.sqrt()
    );
    println!("{:>6} {:>12} {:>12}", "mu", "t (and)", "t (or)");
    for k in -10..=10 {
        let mu = 2.0 * k as f64;
        let env = EnvironmentParams::new(mu, 10.0)?;
        let and = solve_society_system(env, 300, 300, VotingRule::UnanimousAcceptance)?;
        let or = solve_society_system(env, 300, 300, VotingRule::UnanimousRejection)?;
        println!("{mu:>6.1} {:>12.6} {:>12.6}", and.t1, or.t1);
    }
    // unequal groups: the system no longer has t1 = t2
    let env = EnvironmentParams::new(1.0, 10.0)?;
    let s = solve_society_system(env, 100, 500, VotingRule::UnanimousAcceptance)?;
    println!(
        "g1=100 g2=500 mu=1: t1={:.6} t2={:.6} society={:.4} ({} iterations, residual {:.1e})",
        s.t1, s.t2, s.society_value, s.iterations, s.residual
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
