//! Monte-Carlo simulation of the capital random walk controlled by voting.
//!
//! Each step draws a proposal, lets both groups vote and applies the voting
//! rule. Rejected proposals count as steps with zero increment, so sample
//! means estimate the per-proposal expectations of [`crate::model`].
//!
//! Random streams: replication `r` of a run seeded with `seed` uses
//! `ChaCha8Rng::seed_from_u64(seed)` with ChaCha stream id `r`. Within a
//! replication the draws are consumed strictly in step order, so results
//! depend only on `(seed, replication, config)` and never on thread count.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::std_sf;
use crate::model::{full_report, EnvironmentParams, ExpectationReport, GroupSpec, VotingRule};

/// Environment variable capping the number of replication threads.
pub const THREADS_ENV: &str = "VOTE_WALK_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimMode {
    /// Draw every participant's increment and average per group.
    FullVector,
    /// Draw each group average directly from N(μ, σ²/gᵢ).
    #[default]
    GroupMean,
}

impl FromStr for SimMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "full" => Ok(SimMode::FullVector),
            "mean" => Ok(SimMode::GroupMean),
            other => Err(format!(
                "unknown mode `{other}` (expected `full` or `mean`)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub env: EnvironmentParams,
    pub groups: [GroupSpec; 2],
    pub rule: VotingRule,
    pub steps: u64,
    pub seed: u64,
    pub mode: SimMode,
}

impl SimConfig {
    pub fn new(
        env: EnvironmentParams,
        groups: [GroupSpec; 2],
        rule: VotingRule,
        steps: u64,
        seed: u64,
        mode: SimMode,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::NoSteps);
        }
        Ok(Self {
            env,
            groups,
            rule,
            steps,
            seed,
            mode,
        })
    }

    /// Generator for replication `replication`. See the module docs.
    pub fn rng(&self, replication: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replication);
        rng
    }

    pub fn analytic(&self) -> Result<ExpectationReport> {
        full_report(self.env, self.groups[0], self.groups[1], self.rule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub accepted: bool,
    pub support: [bool; 2],
    /// Realized group-average increments (0 when rejected).
    pub inc: [f64; 2],
}

fn group_average<R: Rng + ?Sized>(
    rng: &mut R,
    env: EnvironmentParams,
    size: u64,
    mode: SimMode,
) -> f64 {
    match mode {
        SimMode::GroupMean => {
            let z: f64 = rng.sample(StandardNormal);
            env.mu() + env.sigma() / (size as f64).sqrt() * z
        }
        SimMode::FullVector => {
            let total: f64 = (0..size)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .sum();
            env.mu() + env.sigma() * (total / size as f64)
        }
    }
}

/// One proposal, two votes, one decision.
pub fn simulate_step<R: Rng + ?Sized>(rng: &mut R, cfg: &SimConfig) -> StepOutcome {
    let proposed = [
        group_average(rng, cfg.env, cfg.groups[0].size(), cfg.mode),
        group_average(rng, cfg.env, cfg.groups[1].size(), cfg.mode),
    ];
    let support = [
        proposed[0] >= cfg.groups[0].threshold(),
        proposed[1] >= cfg.groups[1].threshold(),
    ];
    let accepted = cfg.rule.accepts(support[0], support[1]);
    let inc = if accepted { proposed } else { [0.0; 2] };
    StepOutcome {
        accepted,
        support,
        inc,
    }
}

/// Running mean and variance (Welford), mergeable across replications.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Default)]
struct WalkAccumulator {
    inc: [Moments; 2],
    diff: Moments,
    society: Moments,
    supported: [Moments; 2],
    accepted: u64,
    capital: [f64; 2],
}

impl WalkAccumulator {
    fn push(&mut self, step: &StepOutcome, sizes: [f64; 2]) {
        for i in 0..2 {
            self.inc[i].push(step.inc[i]);
            self.capital[i] += step.inc[i];
            if step.accepted && step.support[i] {
                self.supported[i].push(step.inc[i]);
            }
        }
        self.diff.push(step.inc[0] - step.inc[1]);
        self.society
            .push(sizes[0] * step.inc[0] + sizes[1] * step.inc[1]);
        self.accepted += u64::from(step.accepted);
    }

    fn merge(&mut self, other: &WalkAccumulator) {
        for i in 0..2 {
            self.inc[i].merge(&other.inc[i]);
            self.supported[i].merge(&other.supported[i]);
            self.capital[i] += other.capital[i];
        }
        self.diff.merge(&other.diff);
        self.society.merge(&other.society);
        self.accepted += other.accepted;
    }

    fn finish(&self) -> WalkResult {
        let steps = self.diff.n;
        let mean_inc = [self.inc[0].mean, self.inc[1].mean];
        let conditional = |m: &Moments| ConditionalMean {
            count: m.n,
            mean: if m.n > 0 { m.mean } else { f64::NAN },
            stderr: m.stderr(),
        };
        WalkResult {
            steps,
            mean_inc,
            stderr: [self.inc[0].stderr(), self.inc[1].stderr()],
            accept_rate: self.accepted as f64 / steps as f64,
            diff_mean: mean_inc[0] - mean_inc[1],
            diff_stderr: self.diff.stderr(),
            society_mean: self.society.mean,
            society_stderr: self.society.stderr(),
            final_capital: self.capital,
            supported: [
                conditional(&self.supported[0]),
                conditional(&self.supported[1]),
            ],
        }
    }
}

/// Sample mean of a group's increment over accepted steps that group supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMean {
    pub count: u64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkResult {
    pub steps: u64,
    pub mean_inc: [f64; 2],
    /// NaN for a single step.
    pub stderr: [f64; 2],
    pub accept_rate: f64,
    pub diff_mean: f64,
    pub diff_stderr: f64,
    pub society_mean: f64,
    pub society_stderr: f64,
    /// Accumulated capital change of a member of each group.
    pub final_capital: [f64; 2],
    pub supported: [ConditionalMean; 2],
}

fn walk(
    cfg: &SimConfig,
    replication: u64,
    mut observer: impl FnMut(u64, [f64; 2]),
) -> WalkAccumulator {
    let mut rng = cfg.rng(replication);
    let sizes = [cfg.groups[0].size() as f64, cfg.groups[1].size() as f64];
    let mut acc = WalkAccumulator::default();
    for step in 1..=cfg.steps {
        let outcome = simulate_step(&mut rng, cfg);
        acc.push(&outcome, sizes);
        observer(step, acc.capital);
    }
    acc
}

/// Runs one replication (stream 0).
pub fn run_walk(cfg: &SimConfig) -> WalkResult {
    walk(cfg, 0, |_, _| {}).finish()
}

/// Like [`run_walk`], reporting the cumulative capitals after every step.
pub fn run_walk_observed(cfg: &SimConfig, observer: impl FnMut(u64, [f64; 2])) -> WalkResult {
    walk(cfg, 0, observer).finish()
}

/// Runs `replications` independent walks of `cfg.steps` steps and pools them.
///
/// Replications are merged in index order, so the result is identical for any
/// thread count. `threads = None` uses rayon's default.
pub fn run_replications(
    cfg: &SimConfig,
    replications: u64,
    threads: Option<usize>,
) -> Result<WalkResult> {
    if replications == 0 {
        return Err(Error::NoSteps);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().expect("thread pool");
    let parts: Vec<WalkAccumulator> = pool.install(|| {
        (0..replications)
            .into_par_iter()
            .map(|r| walk(cfg, r, |_, _| {}))
            .collect()
    });
    let mut total = WalkAccumulator::default();
    for part in &parts {
        total.merge(part);
    }
    Ok(total.finish())
}

/// Reads [`THREADS_ENV`]; unset, empty or unparsable means no cap.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub quantity: &'static str,
    pub analytic: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// Deviation in standard errors.
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub tolerance_sigmas: f64,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn check(quantity: &'static str, analytic: f64, estimate: f64, stderr: f64, tol: f64) -> Check {
    let dev = (estimate - analytic).abs();
    let (z, pass) = if stderr > 0.0 {
        (dev / stderr, dev <= tol * stderr)
    } else {
        // degenerate: the estimate has no spread and must be exact
        let exact = dev <= 1e-12;
        (if exact { 0.0 } else { f64::INFINITY }, exact)
    };
    Check {
        quantity,
        analytic,
        estimate,
        stderr,
        z,
        pass,
    }
}

/// Compares simulated estimates against analytic expectations.
///
/// The acceptance-rate error uses the binomial standard error at the analytic
/// probability. A run with no accepted proposal has zero spread; its mean
/// checks pass when seeing no acceptance in `steps` draws is at least as
/// likely as a `tolerance_sigmas` normal deviation.
pub fn compare(
    result: &WalkResult,
    analytic: &ExpectationReport,
    tolerance_sigmas: f64,
) -> ValidationReport {
    let n = result.steps as f64;
    let p = analytic.accept_prob;
    let mut checks = vec![
        check(
            "m1",
            analytic.m1,
            result.mean_inc[0],
            result.stderr[0],
            tolerance_sigmas,
        ),
        check(
            "m2",
            analytic.m2,
            result.mean_inc[1],
            result.stderr[1],
            tolerance_sigmas,
        ),
        check(
            "diff",
            analytic.diff,
            result.diff_mean,
            result.diff_stderr,
            tolerance_sigmas,
        ),
        check(
            "accept_prob",
            p,
            result.accept_rate,
            (p * (1.0 - p) / n).sqrt(),
            tolerance_sigmas,
        ),
    ];
    if result.accept_rate == 0.0 {
        let none_accepted = (n * (-p).ln_1p()).exp();
        if none_accepted >= 2.0 * std_sf(tolerance_sigmas).unwrap_or(0.0) {
            for c in checks[..3]
                .iter_mut()
                .filter(|c| !c.pass && c.stderr == 0.0)
            {
                c.pass = true;
            }
        }
    }
    let mut warnings = Vec::new();
    for c in &checks[..2] {
        let resolved = c.stderr.partial_cmp(&c.analytic.abs()) == Some(std::cmp::Ordering::Less);
        if c.analytic != 0.0 && !resolved {
            warnings.push(format!(
                "{}: standard error {:e} is not below the analytic value {:e}; use more steps",
                c.quantity, c.stderr, c.analytic
            ));
        }
    }
    ValidationReport {
        tolerance_sigmas,
        checks,
        warnings,
    }
}

/// Runs `cfg` and checks m1, m2, diff and the acceptance rate against the
/// closed forms at `tolerance_sigmas` standard errors.
pub fn validate_against_model(cfg: &SimConfig, tolerance_sigmas: f64) -> Result<ValidationReport> {
    let analytic = cfg.analytic()?;
    Ok(compare(&run_walk(cfg), &analytic, tolerance_sigmas))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(t1: f64, t2: f64, rule: VotingRule, steps: u64, seed: u64, mode: SimMode) -> SimConfig {
        SimConfig::new(
            EnvironmentParams::new(0.0, 10.0).unwrap(),
            [
                GroupSpec::new(300, t1).unwrap(),
                GroupSpec::new(300, t2).unwrap(),
            ],
            rule,
            steps,
            seed,
            mode,
        )
        .unwrap()
    }

    #[test]
    fn zero_steps_rejected() {
        let c = cfg(
            0.0,
            0.0,
            VotingRule::UnanimousAcceptance,
            1,
            0,
            SimMode::GroupMean,
        );
        assert_eq!(
            SimConfig::new(c.env, c.groups, c.rule, 0, 0, c.mode),
            Err(Error::NoSteps)
        );
    }

    #[test]
    fn no_filtering_accepts_everything() {
        let c = cfg(
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
            VotingRule::UnanimousAcceptance,
            20_000,
            3,
            SimMode::GroupMean,
        );
        let r = run_walk(&c);
        assert_eq!(r.accept_rate, 1.0);
        let sd = 10.0 / 300f64.sqrt();
        // sample sd of increments ~ σ/√g
        let sample_sd = r.stderr[0] * (r.steps as f64).sqrt();
        assert!((sample_sd - sd).abs() < 0.05 * sd);
        assert!(r.mean_inc[0].abs() < 4.0 * r.stderr[0]);
    }

    #[test]
    fn permanent_veto() {
        let c = cfg(
            0.0,
            f64::INFINITY,
            VotingRule::UnanimousAcceptance,
            5_000,
            3,
            SimMode::FullVector,
        );
        let r = run_walk(&c);
        assert_eq!(r.accept_rate, 0.0);
        assert_eq!(r.mean_inc, [0.0, 0.0]);
        assert_eq!(r.final_capital, [0.0, 0.0]);
        assert_eq!(r.supported[0].count, 0);
        let report = validate_against_model(&c, 4.0).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn neutral_acceptance_rate_quarter() {
        let c = cfg(
            0.0,
            0.0,
            VotingRule::UnanimousAcceptance,
            400_000,
            11,
            SimMode::GroupMean,
        );
        let r = run_walk(&c);
        let se = (0.25f64 * 0.75 / r.steps as f64).sqrt();
        assert!(
            (r.accept_rate - 0.25).abs() <= 3.0 * se,
            "{}",
            r.accept_rate
        );
    }

    #[test]
    fn deterministic_for_seed() {
        let c = cfg(
            0.1,
            -0.3,
            VotingRule::UnanimousRejection,
            10_000,
            99,
            SimMode::FullVector,
        );
        assert_eq!(run_walk(&c), run_walk(&c));
        let other = SimConfig { seed: 100, ..c };
        assert_ne!(run_walk(&c), run_walk(&other));
    }

    #[test]
    fn single_replication_matches_run_walk() {
        let c = cfg(
            0.1,
            -0.3,
            VotingRule::UnanimousAcceptance,
            5_000,
            1,
            SimMode::GroupMean,
        );
        assert_eq!(run_replications(&c, 1, Some(2)).unwrap(), run_walk(&c));
    }

    #[test]
    fn replications_independent_of_thread_count() {
        let c = cfg(
            0.0,
            0.4,
            VotingRule::UnanimousAcceptance,
            20_000,
            5,
            SimMode::GroupMean,
        );
        let one = run_replications(&c, 8, Some(1)).unwrap();
        let four = run_replications(&c, 8, Some(4)).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.steps, 160_000);
    }

    #[test]
    fn merge_matches_sequential_moments() {
        let xs: Vec<f64> = (0..1000)
            .map(|i| ((i * 37) % 101) as f64 * 0.1 - 3.0)
            .collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.n, whole.n);
        assert!((a.mean - whole.mean).abs() <= 1e-9 * whole.mean.abs());
        assert!((a.m2 - whole.m2).abs() <= 1e-9 * whole.m2);
    }

    #[test]
    fn standard_normal_sampler_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000_000u64;
        let mut m = Moments::default();
        for _ in 0..n {
            m.push(rng.sample::<f64, _>(StandardNormal));
        }
        let var = m.m2 / (n - 1) as f64;
        assert!(m.mean.abs() < 4.0 / (n as f64).sqrt(), "mean {}", m.mean);
        assert!(
            (var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(),
            "var {var}"
        );
    }

    #[test]
    fn perturbed_analytic_is_flagged() {
        let c = cfg(
            0.0,
            0.0,
            VotingRule::UnanimousAcceptance,
            100_000,
            8,
            SimMode::GroupMean,
        );
        let r = run_walk(&c);
        let mut analytic = c.analytic().unwrap();
        assert!(compare(&r, &analytic, 4.0).passed());
        analytic.m2 += 10.0 * r.stderr[1];
        let report = compare(&r, &analytic, 4.0);
        let flagged: Vec<_> = report.flagged().map(|c| c.quantity).collect();
        assert_eq!(flagged, vec!["m2"]);
    }

    #[test]
    fn rare_acceptance_with_no_hits() {
        let c = cfg(
            0.0,
            3.0,
            VotingRule::UnanimousAcceptance,
            100_000,
            3,
            SimMode::GroupMean,
        );
        let r = run_walk(&c);
        assert_eq!(r.accept_rate, 0.0);
        assert!(compare(&r, &c.analytic().unwrap(), 4.0).passed());

        // same empty run measured against a model that accepts half the time
        let mut wrong = c.analytic().unwrap();
        wrong.accept_prob = 0.5;
        wrong.m1 = 1.0;
        assert!(!compare(&r, &wrong, 4.0).passed());
    }

    #[test]
    fn short_runs_warn() {
        let c = cfg(
            0.0,
            0.0,
            VotingRule::UnanimousRejection,
            1,
            8,
            SimMode::GroupMean,
        );
        assert!(!validate_against_model(&c, 4.0).unwrap().warnings.is_empty());
        let c = SimConfig {
            steps: 100_000,
            ..c
        };
        assert!(validate_against_model(&c, 4.0).unwrap().warnings.is_empty());
    }

    #[test]
    fn mode_parse() {
        assert_eq!("full".parse::<SimMode>().unwrap(), SimMode::FullVector);
        assert_eq!("mean".parse::<SimMode>().unwrap(), SimMode::GroupMean);
        assert!("vector".parse::<SimMode>().is_err());
    }
}
