//! The `vote-walk` command line.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error, 3 solver
//! non-convergence.

pub mod config;
pub mod csv;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::error::Error as ModelError;
use crate::model::{full_report, EnvironmentParams, ExpectationReport, GroupSpec, VotingRule};
use crate::montecarlo::{self, SimConfig, SimMode, WalkResult};
use crate::optimize::{self, Objective};
use config::ConfigFile;
use csv::{fmt_num, grid, write_params, write_row};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    NoConvergence(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Model(e) if !e.is_domain() => EXIT_NO_CONVERGENCE,
            CliError::Model(_) | CliError::Io(_) => EXIT_DOMAIN,
            CliError::NoConvergence(_) => EXIT_NO_CONVERGENCE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vote-walk",
    version,
    about = "Two groups voting on random proposals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expected one-step increments for one parameter set.
    Expect(ModelArgs),
    /// CSV of expectations over a grid of group-2 thresholds.
    #[command(name = "sweep-t2")]
    SweepT2 {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// CSV of society-optimal thresholds over a grid of μ.
    #[command(name = "sweep-mu")]
    SweepMu {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Optimal group-2 threshold for a fixed t1.
    Optimize {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        objective: Option<Objective>,
    },
    /// Monte-Carlo run of the voting-controlled walk.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Jointly society-optimal thresholds (t1, t2).
    #[command(name = "solve-system")]
    SolveSystem(ModelArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long)]
    g1: Option<u64>,
    #[arg(long)]
    g2: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t2: Option<f64>,
    /// `and` (both groups must support) or `or` (either group suffices)
    #[arg(long)]
    rule: Option<VotingRule>,
    /// Output file for CSV artifacts
    #[arg(long)]
    csv: Option<PathBuf>,
    /// key=value file with defaults for any flag
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `mean` (group averages) or `full` (every participant)
    #[arg(long)]
    mode: Option<SimMode>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    replications: Option<u64>,
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Expect(model) => cmd_expect(&model, out),
        Command::SweepT2 { model, sweep } => cmd_sweep_t2(&model, &sweep, out),
        Command::SweepMu { model, sweep } => cmd_sweep_mu(&model, &sweep, out, err),
        Command::Optimize { model, objective } => cmd_optimize(&model, objective, out),
        Command::Simulate { model, sim } => cmd_simulate(&model, &sim, out, err),
        Command::SolveSystem(model) => cmd_solve_system(&model, out),
    }
}

/// Flag and config-file values with precedence resolved.
struct Params<'a> {
    model: &'a ModelArgs,
    config: ConfigFile,
}

impl<'a> Params<'a> {
    fn new(model: &'a ModelArgs) -> Result<Self, CliError> {
        let config = match &model.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(Self { model, config })
    }

    fn env(&self) -> Result<EnvironmentParams, CliError> {
        let mu = self.config.require("mu", self.model.mu)?;
        let sigma = self.config.require("sigma", self.model.sigma)?;
        Ok(EnvironmentParams::new(mu, sigma)?)
    }

    fn sigma_only_env(&self, mu: f64) -> Result<EnvironmentParams, CliError> {
        let sigma = self.config.require("sigma", self.model.sigma)?;
        Ok(EnvironmentParams::new(mu, sigma)?)
    }

    fn sizes(&self) -> Result<(u64, u64), CliError> {
        Ok((
            self.config.require("g1", self.model.g1)?,
            self.config.require("g2", self.model.g2)?,
        ))
    }

    fn t1(&self) -> Result<f64, CliError> {
        self.config.require("t1", self.model.t1)
    }

    fn t2(&self) -> Result<f64, CliError> {
        self.config.require("t2", self.model.t2)
    }

    fn rule(&self) -> Result<VotingRule, CliError> {
        self.config.require("rule", self.model.rule)
    }

    fn csv(&self) -> Result<Option<PathBuf>, CliError> {
        self.config.get("csv", self.model.csv.clone())
    }

    fn sweep(
        &self,
        args: &SweepArgs,
        defaults: (f64, f64, usize),
    ) -> Result<(f64, f64, usize), CliError> {
        let from = self.config.or("from", args.from, defaults.0)?;
        let to = self.config.or("to", args.to, defaults.1)?;
        let points = self.config.or("points", args.points, defaults.2)?;
        if !(from.is_finite() && to.is_finite() && from < to) {
            return Err(CliError::Usage(format!(
                "sweep needs finite --from < --to, got {from}..{to}"
            )));
        }
        if points < 2 {
            return Err(CliError::Usage(format!(
                "sweep needs --points >= 2, got {points}"
            )));
        }
        Ok((from, to, points))
    }
}

fn open_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn render_report(out: &mut dyn Write, rule: VotingRule, r: &ExpectationReport) -> io::Result<()> {
    writeln!(out, "rule: {rule}")?;
    writeln!(out, "m1: {}", fmt_num(r.m1))?;
    writeln!(out, "m2: {}", fmt_num(r.m2))?;
    writeln!(out, "diff: {}", fmt_num(r.diff))?;
    writeln!(out, "society: {}", fmt_num(r.society))?;
    writeln!(out, "support_prob1: {}", fmt_num(r.support_prob[0]))?;
    writeln!(out, "support_prob2: {}", fmt_num(r.support_prob[1]))?;
    writeln!(out, "accept_prob: {}", fmt_num(r.accept_prob))
}

fn cmd_expect(model: &ModelArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let p = Params::new(model)?;
    let env = p.env()?;
    let (n1, n2) = p.sizes()?;
    let rule = p.rule()?;
    let g1 = GroupSpec::new(n1, p.t1()?)?;
    let g2 = GroupSpec::new(n2, p.t2()?)?;
    let report = full_report(env, g1, g2, rule)?;
    render_report(out, rule, &report)?;
    Ok(EXIT_OK)
}

pub const T2_SWEEP_COLUMNS: &str = "t2,m1,m2,diff,society,accept_prob";
pub const MU_SWEEP_COLUMNS: &str = "mu,t1,t2,society_value,residual";

/// One row per grid value of `t₂`: t2, m1, m2, diff, society, accept_prob.
pub fn t2_sweep(
    env: EnvironmentParams,
    g1: GroupSpec,
    g2_size: u64,
    rule: VotingRule,
    t2_grid: &[f64],
) -> crate::Result<Vec<[f64; 6]>> {
    t2_grid
        .iter()
        .map(|&t2| {
            let r = full_report(env, g1, GroupSpec::new(g2_size, t2)?, rule)?;
            Ok([t2, r.m1, r.m2, r.diff, r.society, r.accept_prob])
        })
        .collect()
}

fn cmd_sweep_t2(
    model: &ModelArgs,
    sweep: &SweepArgs,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let p = Params::new(model)?;
    let env = p.env()?;
    let (n1, n2) = p.sizes()?;
    let rule = p.rule()?;
    let t1 = p.t1()?;
    let (from, to, points) = p.sweep(sweep, (-3.0, 3.0, 601))?;
    let g1 = GroupSpec::new(n1, t1)?;
    GroupSpec::new(n2, 0.0)?;
    let rows = t2_sweep(env, g1, n2, rule, &grid(from, to, points))?;

    let mut file;
    let sink: &mut dyn Write = match p.csv()? {
        Some(path) => {
            file = open_output(&path)?;
            &mut file
        }
        None => out,
    };
    write_params(
        sink,
        &[
            ("mu", env.mu().to_string()),
            ("sigma", env.sigma().to_string()),
            ("g1", n1.to_string()),
            ("g2", n2.to_string()),
            ("t1", t1.to_string()),
            ("rule", rule.to_string()),
            ("from", from.to_string()),
            ("to", to.to_string()),
            ("points", points.to_string()),
        ],
    )?;
    writeln!(sink, "{T2_SWEEP_COLUMNS}")?;
    for row in &rows {
        write_row(sink, row)?;
    }
    sink.flush()?;
    Ok(EXIT_OK)
}

fn cmd_sweep_mu(
    model: &ModelArgs,
    sweep: &SweepArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let p = Params::new(model)?;
    let (n1, n2) = p.sizes()?;
    let rule = p.rule()?;
    let sigma_env = p.sigma_only_env(0.0)?;
    let (from, to, points) = p.sweep(sweep, (-20.0, 20.0, 401))?;

    let mut rows = Vec::with_capacity(points);
    let mut failures = 0usize;
    for mu in grid(from, to, points) {
        let env = p.sigma_only_env(mu)?;
        match optimize::solve_society_system(env, n1, n2, rule) {
            Ok(s) => rows.push([mu, s.t1, s.t2, s.society_value, s.residual]),
            Err(ModelError::NoConvergence {
                t1,
                t2,
                residual,
                iterations,
            }) => {
                failures += 1;
                writeln!(err, "warning: no convergence at mu={mu} after {iterations} iterations (residual {residual:e})")?;
                let value =
                    full_report(env, GroupSpec::new(n1, t1)?, GroupSpec::new(n2, t2)?, rule)
                        .map(|r| r.society)
                        .unwrap_or(f64::NAN);
                rows.push([mu, t1, t2, value, residual]);
            }
            Err(e) => return Err(e.into()),
        }
    }

    let mut file;
    let sink: &mut dyn Write = match p.csv()? {
        Some(path) => {
            file = open_output(&path)?;
            &mut file
        }
        None => out,
    };
    write_params(
        sink,
        &[
            ("sigma", sigma_env.sigma().to_string()),
            ("g1", n1.to_string()),
            ("g2", n2.to_string()),
            ("rule", rule.to_string()),
            ("from", from.to_string()),
            ("to", to.to_string()),
            ("points", points.to_string()),
        ],
    )?;
    writeln!(sink, "{MU_SWEEP_COLUMNS}")?;
    for row in &rows {
        write_row(sink, row)?;
    }
    sink.flush()?;
    // every row is still written; failures only change the exit code
    Ok(if failures > 0 {
        EXIT_NO_CONVERGENCE
    } else {
        EXIT_OK
    })
}

fn cmd_optimize(
    model: &ModelArgs,
    objective: Option<Objective>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let p = Params::new(model)?;
    let env = p.env()?;
    let (n1, n2) = p.sizes()?;
    let rule = p.rule()?;
    let objective = p.config.require("objective", objective)?;
    let g1 = GroupSpec::new(n1, p.t1()?)?;
    let opt = optimize::optimal_t2(env, g1, n2, rule, objective)?;
    let g2 = GroupSpec::new(n2, opt.threshold)?;
    let slope = optimize::stationarity_check(env, g1, g2, rule, objective, opt.threshold)?;
    writeln!(out, "rule: {rule}")?;
    writeln!(out, "objective: {objective}")?;
    writeln!(out, "threshold: {}", fmt_num(opt.threshold))?;
    writeln!(out, "objective_value: {}", fmt_num(opt.objective_value))?;
    writeln!(out, "stationarity: {}", fmt_num(slope))?;
    Ok(EXIT_OK)
}

fn render_walk(out: &mut dyn Write, r: &WalkResult) -> io::Result<()> {
    writeln!(out, "steps: {}", r.steps)?;
    writeln!(out, "mean_inc1: {}", fmt_num(r.mean_inc[0]))?;
    writeln!(out, "stderr1: {}", fmt_num(r.stderr[0]))?;
    writeln!(out, "mean_inc2: {}", fmt_num(r.mean_inc[1]))?;
    writeln!(out, "stderr2: {}", fmt_num(r.stderr[1]))?;
    writeln!(out, "diff_mean: {}", fmt_num(r.diff_mean))?;
    writeln!(out, "diff_stderr: {}", fmt_num(r.diff_stderr))?;
    writeln!(out, "society_mean: {}", fmt_num(r.society_mean))?;
    writeln!(out, "accept_rate: {}", fmt_num(r.accept_rate))?;
    writeln!(out, "final_capital1: {}", fmt_num(r.final_capital[0]))?;
    writeln!(out, "final_capital2: {}", fmt_num(r.final_capital[1]))
}

fn cmd_simulate(
    model: &ModelArgs,
    sim: &SimArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let p = Params::new(model)?;
    let env = p.env()?;
    let (n1, n2) = p.sizes()?;
    let rule = p.rule()?;
    let groups = [GroupSpec::new(n1, p.t1()?)?, GroupSpec::new(n2, p.t2()?)?];
    let steps: u64 = p.config.require("steps", sim.steps)?;
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    let seed = p.config.require("seed", sim.seed)?;
    let mode = p.config.or("mode", sim.mode, SimMode::default())?;
    let replications: u64 = p.config.or("replications", sim.replications, 1)?;
    if replications == 0 {
        return Err(CliError::Usage("--replications must be at least 1".into()));
    }
    let cfg = SimConfig::new(env, groups, rule, steps, seed, mode)?;
    let csv_path = p.csv()?;
    if csv_path.is_some() && replications > 1 {
        return Err(CliError::Usage(
            "--csv trajectories need a single replication".into(),
        ));
    }

    let result = match csv_path {
        Some(path) => {
            let mut file = open_output(&path)?;
            write_params(
                &mut file,
                &[
                    ("mu", env.mu().to_string()),
                    ("sigma", env.sigma().to_string()),
                    ("g1", n1.to_string()),
                    ("g2", n2.to_string()),
                    ("t1", groups[0].threshold().to_string()),
                    ("t2", groups[1].threshold().to_string()),
                    ("rule", rule.to_string()),
                    ("steps", steps.to_string()),
                    ("seed", seed.to_string()),
                    (
                        "mode",
                        if mode == SimMode::FullVector {
                            "full"
                        } else {
                            "mean"
                        }
                        .to_string(),
                    ),
                ],
            )?;
            writeln!(file, "step,cap1,cap2")?;
            let mut io_err = None;
            let result = montecarlo::run_walk_observed(&cfg, |step, cap| {
                if io_err.is_none() {
                    if let Err(e) = writeln!(file, "{step},{},{}", fmt_num(cap[0]), fmt_num(cap[1]))
                    {
                        io_err = Some(e);
                    }
                }
            });
            if let Some(e) = io_err {
                return Err(e.into());
            }
            file.flush()?;
            result
        }
        None if replications == 1 => montecarlo::run_walk(&cfg),
        None => montecarlo::run_replications(&cfg, replications, montecarlo::threads_from_env())?,
    };
    render_walk(out, &result)?;

    let analytic = cfg.analytic()?;
    let report = montecarlo::compare(&result, &analytic, 4.0);
    for c in &report.checks {
        writeln!(
            out,
            "check {}: analytic={} z={} {}",
            c.quantity,
            fmt_num(c.analytic),
            fmt_num(c.z),
            if c.pass { "ok" } else { "FLAGGED" }
        )?;
    }
    for w in &report.warnings {
        writeln!(err, "warning: {w}")?;
    }
    Ok(EXIT_OK)
}

fn cmd_solve_system(model: &ModelArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let p = Params::new(model)?;
    let env = p.env()?;
    let (n1, n2) = p.sizes()?;
    let rule = p.rule()?;
    let s = optimize::solve_society_system(env, n1, n2, rule).map_err(|e| match e {
        ModelError::NoConvergence { .. } => CliError::NoConvergence(e.to_string()),
        other => other.into(),
    })?;
    writeln!(out, "rule: {rule}")?;
    writeln!(out, "t1: {}", fmt_num(s.t1))?;
    writeln!(out, "t2: {}", fmt_num(s.t2))?;
    writeln!(out, "society_value: {}", fmt_num(s.society_value))?;
    writeln!(out, "iterations: {}", s.iterations)?;
    writeln!(out, "residual: {}", fmt_num(s.residual))?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("vote-walk").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_capture(&["expect", "--mu", "0"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["bogus"]).0, EXIT_USAGE);
        let (code, _, err) = run_capture(&[
            "expect", "--mu", "0", "--sigma", "-1", "--g1", "3", "--g2", "3", "--t1", "0", "--t2",
            "0", "--rule", "and",
        ]);
        assert_eq!(code, EXIT_DOMAIN, "{err}");
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn empty_sweep_rejected() {
        let (code, _, _) = run_capture(&[
            "sweep-t2", "--mu", "0", "--sigma", "1", "--g1", "3", "--g2", "3", "--t1", "0",
            "--rule", "and", "--from", "1", "--to", "0",
        ]);
        assert_eq!(code, EXIT_USAGE);
    }
}
