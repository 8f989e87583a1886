//! Closed-form expected one-step capital increments under both group rules.
//!
//! A proposal is a vector of i.i.d. N(μ, σ²) increments, one per participant.
//! Group `i` supports it iff its average increment, distributed as
//! N(μ, σ²/gᵢ), is at least its claim threshold `tᵢ`.

use std::fmt;
use std::str::FromStr;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::gaussian::{std_cdf, std_pdf, std_sf};

/// Parameters of the proposal-generating distribution N(μ, σ²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentParams {
    mu: f64,
    sigma: f64,
}

impl EnvironmentParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        Ok(Self {
            mu: ensure_finite("mu", mu)?,
            sigma: ensure_positive("sigma", sigma)?,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// A cohesive group: its size and claim threshold.
///
/// The threshold may be ±∞ (support everything / nothing) but not NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSpec {
    size: u64,
    threshold: f64,
}

impl GroupSpec {
    pub fn new(size: u64, threshold: f64) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyGroup);
        }
        if threshold.is_nan() {
            return Err(Error::NotANumber { name: "threshold" });
        }
        Ok(Self { size, threshold })
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn with_threshold(self, threshold: f64) -> Result<Self> {
        Self::new(self.size, threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VotingRule {
    /// Accepted only if both groups support it (G₁∧G₂).
    UnanimousAcceptance,
    /// Accepted if at least one group supports it (G₁∨G₂).
    UnanimousRejection,
}

impl VotingRule {
    pub fn flag(&self) -> &'static str {
        match self {
            VotingRule::UnanimousAcceptance => "and",
            VotingRule::UnanimousRejection => "or",
        }
    }

    pub fn accepts(&self, support1: bool, support2: bool) -> bool {
        match self {
            VotingRule::UnanimousAcceptance => support1 && support2,
            VotingRule::UnanimousRejection => support1 || support2,
        }
    }
}

impl fmt::Display for VotingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag())
    }
}

impl FromStr for VotingRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "and" => Ok(VotingRule::UnanimousAcceptance),
            "or" => Ok(VotingRule::UnanimousRejection),
            other => Err(format!("unknown rule `{other}` (expected `and` or `or`)")),
        }
    }
}

/// Which of the two groups a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    One,
    Two,
}

impl Group {
    pub fn other(self) -> Self {
        match self {
            Group::One => Group::Two,
            Group::Two => Group::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Group::One => 0,
            Group::Two => 1,
        }
    }
}

/// Per-group quantities derived from the environment and the group spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupTerms {
    /// σᵢ = σ/√gᵢ, the standard deviation of the group-average increment.
    pub sigma: f64,
    /// Fᵢ = Φ((μ−tᵢ)/σᵢ), probability the group supports a proposal.
    pub support: f64,
    /// F̄ᵢ = 1 − Fᵢ, computed from the upper tail directly.
    pub support_complement: f64,
    /// fᵢ = φ((μ−tᵢ)/σᵢ).
    pub density: f64,
}

pub fn group_terms(env: EnvironmentParams, g: GroupSpec) -> Result<GroupTerms> {
    let sigma = env.sigma / (g.size as f64).sqrt();
    let z = (env.mu - g.threshold) / sigma;
    if z.is_infinite() {
        let support = if z > 0.0 { 1.0 } else { 0.0 };
        return Ok(GroupTerms {
            sigma,
            support,
            support_complement: 1.0 - support,
            density: 0.0,
        });
    }
    Ok(GroupTerms {
        sigma,
        support: std_cdf(z)?,
        support_complement: std_sf(z)?,
        density: std_pdf(z)?,
    })
}

fn increment_from_terms(mu: f64, own: &GroupTerms, other: &GroupTerms, rule: VotingRule) -> f64 {
    let supported_part = mu * own.support + own.sigma * own.density;
    match rule {
        VotingRule::UnanimousRejection => {
            mu * other.support + supported_part * other.support_complement
        }
        VotingRule::UnanimousAcceptance => supported_part * other.support,
    }
}

/// M(d̃ᵢ): expected one-step increment of a member of group `which`.
pub fn expected_increment(
    env: EnvironmentParams,
    g1: GroupSpec,
    g2: GroupSpec,
    rule: VotingRule,
    which: Group,
) -> Result<f64> {
    let terms = [group_terms(env, g1)?, group_terms(env, g2)?];
    let own = &terms[which.index()];
    let other = &terms[which.other().index()];
    Ok(increment_from_terms(env.mu, own, other, rule))
}

/// M(d̃₁ − d̃₂), in the form with the μ terms already cancelled.
pub fn expected_difference(
    env: EnvironmentParams,
    g1: GroupSpec,
    g2: GroupSpec,
    rule: VotingRule,
) -> Result<f64> {
    let t1 = group_terms(env, g1)?;
    let t2 = group_terms(env, g2)?;
    Ok(difference_from_terms(&t1, &t2, rule))
}

fn difference_from_terms(t1: &GroupTerms, t2: &GroupTerms, rule: VotingRule) -> f64 {
    match rule {
        VotingRule::UnanimousRejection => {
            t1.sigma * t1.density * t2.support_complement
                - t2.sigma * t2.density * t1.support_complement
        }
        VotingRule::UnanimousAcceptance => {
            t1.sigma * t1.density * t2.support - t2.sigma * t2.density * t1.support
        }
    }
}

/// g₁·M(d̃₁) + g₂·M(d̃₂), the expected increment of total capital.
pub fn society_increment(
    env: EnvironmentParams,
    g1: GroupSpec,
    g2: GroupSpec,
    rule: VotingRule,
) -> Result<f64> {
    let r = full_report(env, g1, g2, rule)?;
    Ok(r.society)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationReport {
    pub m1: f64,
    pub m2: f64,
    pub diff: f64,
    pub society: f64,
    /// P(G₁), P(G₂)
    pub support_prob: [f64; 2],
    pub accept_prob: f64,
}

pub fn full_report(
    env: EnvironmentParams,
    g1: GroupSpec,
    g2: GroupSpec,
    rule: VotingRule,
) -> Result<ExpectationReport> {
    let t1 = group_terms(env, g1)?;
    let t2 = group_terms(env, g2)?;
    let m1 = increment_from_terms(env.mu, &t1, &t2, rule);
    let m2 = increment_from_terms(env.mu, &t2, &t1, rule);
    let accept_prob = match rule {
        VotingRule::UnanimousAcceptance => t1.support * t2.support,
        VotingRule::UnanimousRejection => 1.0 - t1.support_complement * t2.support_complement,
    };
    Ok(ExpectationReport {
        m1,
        m2,
        diff: difference_from_terms(&t1, &t2, rule),
        society: g1.size as f64 * m1 + g2.size as f64 * m2,
        support_prob: [t1.support, t2.support],
        accept_prob,
    })
}
