// Group 2's best threshold for a fixed t1: the one maximizing its advantage
// over group 1, and the one maximizing the total capital of the society.
//
// cargo run --example claim_thresholds

use vote_walk::model::{EnvironmentParams, GroupSpec, VotingRule};
use vote_walk::optimize::{stationarity_check, t2_plus, t2_society, Objective};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let env = EnvironmentParams::new(0.0, 10.0)?;
    for (n1, n2) in [(300, 300), (100, 300)] {
        let g1 = GroupSpec::new(n1, 0.0)?;
        for rule in [
            VotingRule::UnanimousAcceptance,
            VotingRule::UnanimousRejection,
        ] {
            let plus = t2_plus(env, g1, n2, rule)?;
            let zero = t2_society(env, g1, n2, rule)?;
            let g2 = GroupSpec::new(n2, 0.0)?;
            let slope_plus =
                stationarity_check(env, g1, g2, rule, Objective::GroupAdvantage, plus.threshold)?;
            let slope_zero =
                stationarity_check(env, g1, g2, rule, Objective::SocietyTotal, zero.threshold)?;
            println!(
                "g1={n1} g2={n2} rule={rule}: advantage t2={:.6} (value {:.6}, slope {:.1e}); society t2={:.6} (value {:.4}, slope {:.1e})",
                plus.threshold, plus.objective_value, slope_plus, zero.threshold, zero.objective_value, slope_zero
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
