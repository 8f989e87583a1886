// Independent replications on a thread pool. Results do not depend on the
// number of threads: each replication owns its own random stream.
//
// VOTE_WALK_THREADS=2 cargo run --release --example replications

use vote_walk::model::{EnvironmentParams, GroupSpec, VotingRule};
use vote_walk::montecarlo::{run_replications, threads_from_env, SimConfig, SimMode};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let env = EnvironmentParams::new(0.5, 5.0)?;
    let groups = [GroupSpec::new(40, 0.2)?, GroupSpec::new(60, -0.1)?];
    let cfg = SimConfig::new(
        env,
        groups,
        VotingRule::UnanimousRejection,
        50_000,
        7,
        SimMode::GroupMean,
    )?;
    let pooled = run_replications(&cfg, 8, threads_from_env())?;
    let single = run_replications(&cfg, 8, Some(1))?;
    assert_eq!(format!("{pooled:?}"), format!("{single:?}"));
    let analytic = cfg.analytic()?;
    println!(
        "steps={} accept_rate={:.5} (analytic {:.5})",
        pooled.steps, pooled.accept_rate, analytic.accept_prob
    );
    println!(
        "m1={:.5}±{:.5} (analytic {:.5})  m2={:.5}±{:.5} (analytic {:.5})",
        pooled.mean_inc[0],
        pooled.stderr[0],
        analytic.m1,
        pooled.mean_inc[1],
        pooled.stderr[1],
        analytic.m2
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
