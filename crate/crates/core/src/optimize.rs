//! Optimal claim thresholds.
//!
//! For a fixed `t₁`, the advantage-maximizing threshold of group 2 is the
//! conditional mean of group 1's average increment on the side group 1 is
//! decisive for: above `t₁` under G₁∧G₂, below `t₁` under G₁∨G₂. The
//! society-maximizing threshold is that value scaled by `−g₁/g₂`.
//!
//! The jointly society-optimal pair `(t₁, t₂)` solves two such best-response
//! equations at once and has no closed form; [`solve_society_system`] finds it
//! numerically.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gaussian::{std_cdf, std_pdf, truncated_mean_above, truncated_mean_below};
use crate::model::{full_report, EnvironmentParams, GroupSpec, VotingRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// M(d̃₂ − d̃₁), the advantage of a group-2 member over a group-1 member.
    GroupAdvantage,
    /// g₁·M(d̃₁) + g₂·M(d̃₂).
    SocietyTotal,
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "advantage" => Ok(Objective::GroupAdvantage),
            "society" => Ok(Objective::SocietyTotal),
            other => Err(format!(
                "unknown objective `{other}` (expected `advantage` or `society`)"
            )),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::GroupAdvantage => "advantage",
            Objective::SocietyTotal => "society",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumResult {
    pub threshold: f64,
    pub objective_value: f64,
    pub objective: Objective,
    pub rule: VotingRule,
}

/// Value of `objective` as a function of the full parameter set.
pub fn objective_value(
    env: EnvironmentParams,
    g1: GroupSpec,
    g2: GroupSpec,
    rule: VotingRule,
    objective: Objective,
) -> Result<f64> {
    let r = full_report(env, g1, g2, rule)?;
    Ok(match objective {
        Objective::GroupAdvantage => -r.diff,
        Objective::SocietyTotal => r.society,
    })
}

/// Conditional mean of the decisive group's average increment.
fn decisive_mean(env: EnvironmentParams, group: GroupSpec, rule: VotingRule) -> Result<f64> {
    let sd = env.sigma() / (group.size() as f64).sqrt();
    match rule {
        VotingRule::UnanimousAcceptance => truncated_mean_above(env.mu(), sd, group.threshold()),
        VotingRule::UnanimousRejection => truncated_mean_below(env.mu(), sd, group.threshold()),
    }
}

/// Threshold `t₂⁺` of group 2 maximizing its advantage over group 1, for the
/// fixed `g1.threshold()`. Does not depend on the size of group 2, except
/// that `g2_size` is used to evaluate the objective there.
pub fn t2_plus(
    env: EnvironmentParams,
    g1: GroupSpec,
    g2_size: u64,
    rule: VotingRule,
) -> Result<OptimumResult> {
    let threshold = decisive_mean(env, g1, rule)?;
    let g2 = GroupSpec::new(g2_size, threshold)?;
    Ok(OptimumResult {
        threshold,
        objective_value: objective_value(env, g1, g2, rule, Objective::GroupAdvantage)?,
        objective: Objective::GroupAdvantage,
        rule,
    })
}

/// Threshold `t₂⁰ = −(g₁/g₂)·t₂⁺` of group 2 maximizing the society total.
pub fn t2_society(
    env: EnvironmentParams,
    g1: GroupSpec,
    g2_size: u64,
    rule: VotingRule,
) -> Result<OptimumResult> {
    let ratio = g1.size() as f64 / GroupSpec::new(g2_size, 0.0)?.size() as f64;
    let threshold = -ratio * decisive_mean(env, g1, rule)?;
    let g2 = GroupSpec::new(g2_size, threshold)?;
    Ok(OptimumResult {
        threshold,
        objective_value: objective_value(env, g1, g2, rule, Objective::SocietyTotal)?,
        objective: Objective::SocietyTotal,
        rule,
    })
}

/// Closed-form optimum for either objective.
pub fn optimal_t2(
    env: EnvironmentParams,
    g1: GroupSpec,
    g2_size: u64,
    rule: VotingRule,
    objective: Objective,
) -> Result<OptimumResult> {
    match objective {
        Objective::GroupAdvantage => t2_plus(env, g1, g2_size, rule),
        Objective::SocietyTotal => t2_society(env, g1, g2_size, rule),
    }
}

/// Central finite difference of `objective` in `t₂`, with step
/// `1e-5·max(1, |t₂|)`.
pub fn stationarity_check(
    env: EnvironmentParams,
    g1: GroupSpec,
    g2: GroupSpec,
    rule: VotingRule,
    objective: Objective,
    t2: f64,
) -> Result<f64> {
    let h = 1e-5 * t2.abs().max(1.0);
    let hi = objective_value(env, g1, g2.with_threshold(t2 + h)?, rule, objective)?;
    let lo = objective_value(env, g1, g2.with_threshold(t2 - h)?, rule, objective)?;
    Ok((hi - lo) / (2.0 * h))
}

/// Unique positive root of `y = φ(y)/Φ(y)`, ≈ 0.50605.
pub fn solve_y0() -> f64 {
    // y·Φ(y) − φ(y) is increasing on the bracket
    let defect = |y: f64| y * std_cdf(y).unwrap() - std_pdf(y).unwrap();
    bisect(defect, 0.3, 0.7)
}

/// Bisection to full precision. Requires `f(lo) < 0 < f(hi)` for increasing `f`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return if f(hi).abs() < f(lo).abs() { hi } else { lo };
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSolution {
    pub t1: f64,
    pub t2: f64,
    pub society_value: f64,
    /// Fixed-point sweeps plus bisection steps.
    pub iterations: usize,
    /// max(|t₁ − R₁(t₂)|, |t₂ − R₂(t₁)|)
    pub residual: f64,
}

const DAMPING: f64 = 0.5;
const STEP_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;

/// Society-optimal response maps of both groups.
struct BestResponse {
    env: EnvironmentParams,
    sizes: [u64; 2],
    rule: VotingRule,
}

impl BestResponse {
    /// Society-optimal threshold for group `i` given the other group's.
    fn respond(&self, i: usize, other_threshold: f64) -> Result<f64> {
        let j = 1 - i;
        let other = GroupSpec::new(self.sizes[j], other_threshold)?;
        let ratio = self.sizes[j] as f64 / self.sizes[i] as f64;
        Ok(-ratio * decisive_mean(self.env, other, self.rule)?)
    }

    fn residual(&self, t1: f64, t2: f64) -> Result<f64> {
        let r1 = (t1 - self.respond(0, t2)?).abs();
        let r2 = (t2 - self.respond(1, t1)?).abs();
        Ok(r1.max(r2))
    }

    /// `t₁ − R₁(R₂(t₁))`; strictly increasing since both responses are
    /// decreasing with slopes whose product lies in (0, 1).
    fn reduced(&self, t1: f64) -> Result<f64> {
        Ok(t1 - self.respond(0, self.respond(1, t1)?)?)
    }
}

/// Solves the pair of society-optimal best-response equations.
///
/// Runs a damped fixed-point iteration from `t₁ = t₂ = −μ`. If that does not
/// meet the tolerances within the iteration cap (the contraction rate tends
/// to 1 in very unfavourable environments), falls back to bisection on the
/// scalar reduction `t₁ = R₁(R₂(t₁))`, whose root is unique.
pub fn solve_society_system(
    env: EnvironmentParams,
    g1_size: u64,
    g2_size: u64,
    rule: VotingRule,
) -> Result<SystemSolution> {
    GroupSpec::new(g1_size, 0.0)?;
    GroupSpec::new(g2_size, 0.0)?;
    let br = BestResponse {
        env,
        sizes: [g1_size, g2_size],
        rule,
    };

    let (mut t1, mut t2) = (-env.mu(), -env.mu());
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let n1 = (1.0 - DAMPING) * t1 + DAMPING * br.respond(0, t2)?;
        let n2 = (1.0 - DAMPING) * t2 + DAMPING * br.respond(1, t1)?;
        let step = (n1 - t1).abs().max((n2 - t2).abs());
        t1 = n1;
        t2 = n2;
        if !t1.is_finite() || !t2.is_finite() {
            break;
        }
        if step <= STEP_TOL && br.residual(t1, t2)? <= RESIDUAL_TOL {
            return finish(&br, t1, t2, iterations);
        }
    }

    let start = if t1.is_finite() { t1 } else { -env.mu() };
    let (t1, steps) = bisect_reduced(&br, start)?;
    let t2 = br.respond(1, t1)?;
    let iterations = iterations + steps;
    let residual = br.residual(t1, t2)?;
    if residual <= RESIDUAL_TOL {
        finish(&br, t1, t2, iterations)
    } else {
        Err(Error::NoConvergence {
            iterations,
            t1,
            t2,
            residual,
        })
    }
}

fn finish(br: &BestResponse, t1: f64, t2: f64, iterations: usize) -> Result<SystemSolution> {
    let g1 = GroupSpec::new(br.sizes[0], t1)?;
    let g2 = GroupSpec::new(br.sizes[1], t2)?;
    Ok(SystemSolution {
        t1,
        t2,
        society_value: full_report(br.env, g1, g2, br.rule)?.society,
        iterations,
        residual: br.residual(t1, t2)?,
    })
}

fn bisect_reduced(br: &BestResponse, start: f64) -> Result<(f64, usize)> {
    let mut steps = 0;
    let mut width = start.abs().max(1.0);
    let (mut lo, mut hi) = (start, start);
    while br.reduced(lo)? > 0.0 {
        lo -= width;
        width *= 2.0;
        steps += 1;
        if steps > 2000 {
            return Err(bracket_failure(br, start, steps));
        }
    }
    width = start.abs().max(1.0);
    while br.reduced(hi)? < 0.0 {
        hi += width;
        width *= 2.0;
        steps += 1;
        if steps > 2000 {
            return Err(bracket_failure(br, start, steps));
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        steps += 1;
        if mid <= lo || mid >= hi {
            let pick = if br.reduced(hi)?.abs() < br.reduced(lo)?.abs() {
                hi
            } else {
                lo
            };
            return Ok((pick, steps));
        }
        let v = br.reduced(mid)?;
        if v == 0.0 {
            return Ok((mid, steps));
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

fn bracket_failure(br: &BestResponse, t1: f64, iterations: usize) -> Error {
    let t2 = br.respond(1, t1).unwrap_or(f64::NAN);
    Error::NoConvergence {
        iterations,
        t1,
        t2,
        residual: br.residual(t1, t2).unwrap_or(f64::INFINITY),
    }
}
