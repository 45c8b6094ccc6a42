//! Command-line surface: `analyze`, `diagram`, `sweep`, `simulate`.
//!
//! Output tables are deterministic: fixed column order, fixed 17-significant-
//! digit formatting, no timestamps. Sweep rows are computed concurrently;
//! `COINFECT_THREADS` caps the worker count.

use crate::branch::{self, BranchError, SegmentLabel};
use crate::equilibria::EquilibriaError;
use crate::params::{self, ParamError, ParamFile};
use crate::simulate::{self, IntegrateOpts, SimulateError, State};
use crate::stability::{self, StabilityError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Equilibria(#[from] EquilibriaError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Module attribution for the machine-readable error record.
    pub fn module(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Json(_) => "cli",
            CliError::Params(_) => "params",
            CliError::Equilibria(_) => "equilibria",
            CliError::Stability(StabilityError::Equilibria(_)) => "equilibria",
            CliError::Stability(_) => "stability",
            CliError::Branch(BranchError::Stability(e)) => match e {
                StabilityError::Equilibria(_) => "equilibria",
                _ => "stability",
            },
            CliError::Branch(BranchError::Params(_)) => "params",
            CliError::Branch(_) => "branch",
            CliError::Simulate(_) => "simulate",
        }
    }

    /// `{"module": ..., "error": ...}` for stderr.
    pub fn record(&self) -> String {
        serde_json::json!({ "module": self.module(), "error": self.to_string() }).to_string()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "coinfect",
    about = "Equilibrium, stability, and carrying-capacity transition analysis for a two-strain coinfection model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Equilibrium table and stability verdicts at one carrying capacity.
    Analyze(AnalyzeArgs),
    /// Transition-diagram document, sweep data, and a plot script.
    Diagram(DiagramArgs),
    /// Stable-equilibrium sweep table over a K range.
    Sweep(SweepArgs),
    /// Integrate a trajectory and emit it as delimited text.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Doc,
}

#[derive(Debug, Clone, Copy)]
pub struct KRange {
    pub lo: f64,
    pub hi: f64,
}

fn parse_k_range(s: &str) -> Result<KRange, String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(format!("need 0 < lo < hi, got {lo}:{hi}"));
    }
    Ok(KRange { lo, hi })
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Parameter file (flat key-value document).
    #[arg(long)]
    pub params: PathBuf,
    /// Require the scale-free transmission mode (alpha_i = a_i / K).
    #[arg(long)]
    pub scaled: bool,
    /// Output directory; artifacts go to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Carrying capacity (defaults to the file's K).
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutFormat,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// K interval lo:hi; the diagram covers (0, hi].
    #[arg(long = "K-range", value_parser = parse_k_range)]
    pub k_range: KRange,
    /// Extra samples per threshold interval.
    #[arg(long, default_value_t = branch::DEFAULT_GRID)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// K interval lo:hi (log-spaced samples).
    #[arg(long = "K-range", value_parser = parse_k_range)]
    pub k_range: KRange,
    /// Number of sweep rows.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Carrying capacity (defaults to the file's K).
    #[arg(long = "K")]
    pub k: Option<f64>,
    /// Initial state "S,I1,I2,I12,R"; defaults to (0.5K, 0.01K, 0.01K, 0.01K, 0).
    #[arg(long)]
    pub y0: Option<String>,
    #[arg(long, default_value_t = simulate::DEFAULT_HORIZON)]
    pub horizon: f64,
    #[arg(long, default_value_t = simulate::DEFAULT_RTOL)]
    pub rtol: f64,
    #[arg(long, default_value_t = simulate::DEFAULT_ATOL)]
    pub atol: f64,
    /// Keep every n-th accepted sample.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

/// A named output produced by one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// 17 significant digits; survives a parse round-trip exactly.
pub fn fmt_machine(x: f64) -> String {
    format!("{x:.16e}")
}

/// 6 significant digits for human-facing summaries.
pub fn fmt_human(x: f64) -> String {
    format!("{x:.5e}")
}

fn load_params(common: &CommonArgs) -> Result<ParamFile, CliError> {
    let file = params::load(&common.params)?;
    if common.scaled && !file.is_scaled() {
        return Err(CliError::Config(format!(
            "--scaled given but {} is not in scaled mode (set mode = \"scaled\" and a1..a3)",
            common.params.display()
        )));
    }
    Ok(file)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("COINFECT_THREADS") {
        let n: usize = raw
            .parse()
            .map_err(|_| CliError::Config(format!("COINFECT_THREADS must be a positive integer, got `{raw}`")))?;
        if n == 0 {
            return Err(CliError::Config(
                "COINFECT_THREADS must be a positive integer".into(),
            ));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("failed to build worker pool: {e}")))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let (la, lb) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Execute one command; artifacts are written under `--out` when given and
/// always returned for inspection.
pub fn run(cli: &Cli) -> Result<Vec<Artifact>, CliError> {
    let artifacts = match &cli.command {
        Cmd::Analyze(args) => run_analyze(args)?,
        Cmd::Diagram(args) => run_diagram(args)?,
        Cmd::Sweep(args) => run_sweep(args)?,
        Cmd::Simulate(args) => run_simulate(args)?,
    };
    if let Some(dir) = out_dir(&cli.command) {
        std::fs::create_dir_all(dir)?;
        for a in &artifacts {
            std::fs::write(dir.join(&a.name), &a.contents)?;
        }
    }
    Ok(artifacts)
}

fn out_dir(cmd: &Cmd) -> Option<&Path> {
    match cmd {
        Cmd::Analyze(a) => a.common.out.as_deref(),
        Cmd::Diagram(a) => a.common.out.as_deref(),
        Cmd::Sweep(a) => a.common.out.as_deref(),
        Cmd::Simulate(a) => a.common.out.as_deref(),
    }
}

fn run_analyze(args: &AnalyzeArgs) -> Result<Vec<Artifact>, CliError> {
    let file = load_params(&args.common)?;
    let p = file.materialize(args.k)?;
    let k = p.k();
    let classified = stability::classify_all(&p, k)?;

    match args.format {
        OutFormat::Csv => {
            let mut eq = String::from("label,S,I1,I2,I12,admissible,residual\n");
            let mut verdicts =
                String::from("label,K,max_real_part,classification,closed_form,agreement\n");
            for c in &classified {
                let pt = &c.point;
                writeln!(
                    eq,
                    "{},{},{},{},{},{},{}",
                    pt.label,
                    fmt_machine(pt.coords[0]),
                    fmt_machine(pt.coords[1]),
                    fmt_machine(pt.coords[2]),
                    fmt_machine(pt.coords[3]),
                    pt.admissible,
                    fmt_machine(pt.residual),
                )
                .expect("string write");
                writeln!(
                    verdicts,
                    "{},{},{},{},{},{}",
                    pt.label,
                    fmt_machine(k),
                    fmt_machine(c.verdict.max_real_part),
                    c.verdict.classification,
                    c.verdict.closed_form,
                    c.verdict
                        .agreement
                        .map(|b| b.to_string())
                        .unwrap_or_default(),
                )
                .expect("string write");
            }
            Ok(vec![
                Artifact {
                    name: "equilibria.csv".into(),
                    contents: eq,
                },
                Artifact {
                    name: "verdicts.csv".into(),
                    contents: verdicts,
                },
            ])
        }
        OutFormat::Doc => {
            let points: Vec<serde_json::Value> = classified
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "label": c.point.label.to_string(),
                        "coords": c.point.coords,
                        "admissible": c.point.admissible,
                        "residual": c.point.residual,
                        "max_real_part": c.verdict.max_real_part,
                        "classification": c.verdict.classification.to_string(),
                        "closed_form": c.verdict.closed_form.to_string(),
                        "agreement": c.verdict.agreement,
                    })
                })
                .collect();
            let doc = serde_json::json!({ "K": k, "candidates": points });
            Ok(vec![Artifact {
                name: "analysis.json".into(),
                contents: format!("{}\n", serde_json::to_string_pretty(&doc)?),
            }])
        }
    }
}

fn run_diagram(args: &DiagramArgs) -> Result<Vec<Artifact>, CliError> {
    let file = load_params(&args.common)?;
    let diagram = match &file {
        ParamFile::Scaled(sp) => branch::transition_diagram_scaled(sp, args.k_range.hi, args.grid)?,
        ParamFile::Direct(raw) => {
            let p = raw.clone().validate()?;
            branch::transition_diagram(&p, args.k_range.hi, args.grid)?
        }
    };
    let doc = format!("{}\n", serde_json::to_string_pretty(&diagram)?);
    let sweep = sweep_table(&file, args.k_range, 200.min(args.grid.max(50)))?;
    let script = plot_script(&diagram);
    Ok(vec![
        Artifact {
            name: "diagram.json".into(),
            contents: doc,
        },
        Artifact {
            name: "sweep.csv".into(),
            contents: sweep,
        },
        Artifact {
            name: "plot_diagram.py".into(),
            contents: script,
        },
    ])
}

fn run_sweep(args: &SweepArgs) -> Result<Vec<Artifact>, CliError> {
    let file = load_params(&args.common)?;
    let table = sweep_table(&file, args.k_range, args.grid)?;
    Ok(vec![Artifact {
        name: "sweep.csv".into(),
        contents: table,
    }])
}

fn sweep_table(file: &ParamFile, range: KRange, n: usize) -> Result<String, CliError> {
    let ks = log_grid(range.lo, range.hi, n);
    let pool = thread_pool()?;
    let rows: Result<Vec<String>, CliError> = pool.install(|| {
        ks.par_iter()
            .map(|&k| {
                let p = file.materialize(Some(k))?;
                let row = match stability::stable_equilibrium(&p, k) {
                    Ok(c) => format!(
                        "{},{},{},{},{},{},{}",
                        fmt_machine(k),
                        c.point.label,
                        fmt_machine(c.point.coords[0]),
                        fmt_machine(c.point.coords[1]),
                        fmt_machine(c.point.coords[2]),
                        fmt_machine(c.point.coords[3]),
                        fmt_machine(c.verdict.max_real_part),
                    ),
                    Err(StabilityError::NoneStable { .. }) => {
                        format!("{},none-stable,,,,,", fmt_machine(k))
                    }
                    Err(e) => return Err(e.into()),
                };
                Ok(row)
            })
            .collect()
    });
    let mut out = String::from("K,stable_label,S,I1,I2,I12,max_real_part\n");
    for row in rows? {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

fn run_simulate(args: &SimulateArgs) -> Result<Vec<Artifact>, CliError> {
    let file = load_params(&args.common)?;
    let p = file.materialize(args.k)?;
    let k = p.k();
    let y0 = match &args.y0 {
        Some(raw) => parse_y0(raw)?,
        None => State::new(0.5 * k, 0.01 * k, 0.01 * k, 0.01 * k, 0.0),
    };
    if args.stride == 0 {
        return Err(CliError::Config("--stride must be positive".into()));
    }
    let opts = IntegrateOpts {
        rtol: args.rtol,
        atol: args.atol,
        horizon: args.horizon,
        ..Default::default()
    };
    let traj = if p.recovery().is_some() {
        simulate::integrate(&p, &y0, &opts)?
    } else {
        simulate::integrate_reduced(&p, &y0, &opts)?
    };

    let mut out = String::from("t,S,I1,I2,I12,R,N\n");
    let last = traj.samples.len() - 1;
    for (i, s) in traj.samples.iter().enumerate() {
        if i % args.stride != 0 && i != last {
            continue;
        }
        let n: f64 = s.y.iter().sum();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_machine(s.t),
            fmt_machine(s.y[0]),
            fmt_machine(s.y[1]),
            fmt_machine(s.y[2]),
            fmt_machine(s.y[3]),
            fmt_machine(s.y[4]),
            fmt_machine(n),
        )
        .expect("string write");
    }
    Ok(vec![Artifact {
        name: "trajectory.csv".into(),
        contents: out,
    }])
}

fn parse_y0(raw: &str) -> Result<State, CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(CliError::Config(format!(
            "--y0 expects 5 comma-separated values S,I1,I2,I12,R, got `{raw}`"
        )));
    }
    let mut v = [0.0_f64; 5];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|e| CliError::Config(format!("bad --y0 component `{part}`: {e}")))?;
    }
    Ok(State::new(v[0], v[1], v[2], v[3], v[4]))
}

fn plot_script(diagram: &branch::TransitionDiagram) -> String {
    let thresholds: Vec<String> = diagram
        .thresholds
        .iter()
        .map(|t| fmt_machine(t.k))
        .collect();
    let segments: Vec<String> = diagram
        .segments
        .iter()
        .map(|s| {
            format!(
                "({}, {}, \"{}\")",
                fmt_machine(s.k_lo),
                fmt_machine(s.k_hi),
                match s.label {
                    SegmentLabel::Stable(l) => l.to_string(),
                    SegmentLabel::NoneStable => "none-stable".to_string(),
                }
            )
        })
        .collect();
    format!(
        r#"#!/usr/bin/env python3
"""Render stable-equilibrium coordinate curves against carrying capacity.

Reads sweep.csv from the working directory and writes diagram.png.
"""
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

THRESHOLDS = [{thresholds}]
SEGMENTS = [{segments}]

rows = list(csv.DictReader(open("sweep.csv")))
ks = [float(r["K"]) for r in rows]
fig, ax = plt.subplots(figsize=(8.0, 5.0))
for column, style in (("S", "-"), ("I1", "--"), ("I2", "-."), ("I12", ":")):
    ys = [float(r[column]) if r[column] else float("nan") for r in rows]
    ax.plot(ks, ys, style, label=column)
for t in THRESHOLDS:
    ax.axvline(t, color="grey", lw=0.8, ls=":")
for lo, hi, label in SEGMENTS:
    ax.text((max(lo, min(ks)) * hi) ** 0.5, ax.get_ylim()[1] * 0.95, label,
            ha="center", va="top", fontsize=9)
ax.set_xscale("log")
ax.set_xlabel("carrying capacity K")
ax.set_ylabel("stable equilibrium coordinates")
ax.legend(loc="center left")
ax.set_title("Stable equilibrium vs K ({schematic})")
fig.tight_layout()
fig.savefig("diagram.png", dpi=160)
print("wrote diagram.png")
"#,
        thresholds = thresholds.join(", "),
        segments = segments.join(", "),
        schematic = diagram.schematic(),
    )
}
