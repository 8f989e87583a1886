// Expected one-step increments of both groups and the society as group 2
// varies its claim threshold, under both voting rules.
//
// cargo run --example expectation_curves

use vote_walk::model::{full_report, EnvironmentParams, GroupSpec, VotingRule};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let env = EnvironmentParams::new(0.0, 10.0)?;
    let g1 = GroupSpec::new(300, 0.0)?;
    for rule in [
        VotingRule::UnanimousAcceptance,
        VotingRule::UnanimousRejection,
    ] {
        println!("rule={rule}");
        println!(
            "{:>6} {:>10} {:>10} {:>10} {:>10}",
            "t2", "m1", "m2", "diff", "society"
        );
        for k in -6..=6 {
            let t2 = k as f64 * 0.5;
            let r = full_report(env, g1, GroupSpec::new(300, t2)?, rule)?;
            println!(
                "{t2:>6.2} {:>10.5} {:>10.5} {:>10.5} {:>10.4}",
                r.m1, r.m2, r.diff, r.society
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
