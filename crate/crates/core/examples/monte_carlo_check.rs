// Simulates the voting-controlled random walk and compares the sample means
// with the closed-form expectations.
//
// cargo run --release --example monte_carlo_check

use vote_walk::model::{EnvironmentParams, GroupSpec, VotingRule};
use vote_walk::montecarlo::{validate_against_model, SimConfig, SimMode};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let env = EnvironmentParams::new(0.0, 10.0)?;
    for rule in [
        VotingRule::UnanimousAcceptance,
        VotingRule::UnanimousRejection,
    ] {
        for t2 in [-1.0, 0.0, 0.46, 1.0] {
            let groups = [GroupSpec::new(300, 0.0)?, GroupSpec::new(300, t2)?];
            let cfg = SimConfig::new(env, groups, rule, 200_000, 42, SimMode::GroupMean)?;
            let report = validate_against_model(&cfg, 4.0)?;
            let line: Vec<String> = report
                .checks
                .iter()
                .map(|c| {
                    format!(
                        "{}={:.5}/{:.5} ({:+.2}σ)",
                        c.quantity, c.estimate, c.analytic, c.z
                    )
                })
                .collect();
            println!("rule={rule} t2={t2:>5}: {}", line.join("  "));
            if !report.passed() {
                return Err(format!("simulation disagrees with the model at t2={t2}").into());
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
