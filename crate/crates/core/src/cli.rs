//! Command-line front end.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::channel::{build_pathset, Mode, PathMode, PathSet};
use crate::config::RunConfig;
use crate::fim::{count_resolvable_paths, fim_total, peb, FimPart};
use crate::geometry::Point2;
use crate::riscontrol::{bits_string, robust_select, select_ris, RobustObjective};
use crate::sweep::{peb_cdf, peb_map, write_cdf_csv, write_map_csv};
use crate::waveform::WaveformConfig;
use crate::{validate, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "rispeb", version, about = "Position error bounds for RIS-aided downlink localization")]
pub struct Cli {
    /// Configuration file (TOML). The bundled default scenario is used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the run mode: ris, reflector or scatterer.
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    /// Override the maximum number of simultaneously active RIS.
    #[arg(long, global = true)]
    pub kbar: Option<usize>,
    /// Override the bandwidth in Hz.
    #[arg(long, global = true)]
    pub bandwidth: Option<f64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Paths, FIM and PEB at one user position.
    Point {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
    /// PEB map and CDF over the configured grid.
    Sweep {
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        /// Evaluate cells on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// RIS selection for a position estimate, optionally robust to an
    /// uncertainty square of half-width `--uncertainty` metres.
    Select {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long)]
        uncertainty: Option<f64>,
        #[arg(long, value_enum, default_value_t = Objective::Worst)]
        objective: Objective,
    },
    /// Check the FIM assembly, phase design and selection against oracles.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    Worst,
    Expected,
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    ChecksFailed,
}

/// Loads the config and applies command-line overrides, re-validating the result.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::builtin(),
    };
    if let Some(mode) = cli.mode {
        cfg.run.mode = mode;
    }
    if let Some(k) = cli.kbar {
        cfg.run.k_bar = k;
    }
    if let Some(bw) = cli.bandwidth {
        cfg.waveform.bandwidth_hz = bw;
    }
    if let Some(out) = &cli.out {
        cfg.run.out_dir = out.clone();
    }
    if let Command::Sweep { nx, ny, serial } = &cli.command {
        if let Some(nx) = nx {
            cfg.grid.nx = *nx;
        }
        if let Some(ny) = ny {
            cfg.grid.ny = *ny;
        }
        if *serial {
            cfg.run.parallel = false;
        }
    }
    RunConfig::parse(&cfg.to_toml()).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("after command-line overrides: {msg}")),
        other => other,
    })
}

pub fn run(cli: &Cli) -> Result<Status> {
    let cfg = effective_config(cli)?;
    match &cli.command {
        Command::Point { x, y } => point(&cfg, Point2::new(*x, *y)),
        Command::Sweep { .. } => sweep(&cfg),
        Command::Select {
            x,
            y,
            uncertainty,
            objective,
        } => select(&cfg, Point2::new(*x, *y), *uncertainty, *objective),
        Command::Validate => {
            let report = validate::run(&cfg.scene()?, &cfg.waveform()?, cfg.run.k_bar)?;
            print!("{report}");
            Ok(if report.passed() {
                Status::Ok
            } else {
                Status::ChecksFailed
            })
        }
    }
}

fn point(cfg: &RunConfig, x: Point2) -> Result<Status> {
    let scene = cfg.scene()?;
    let w = cfg.waveform()?;
    let (set, bits) = match cfg.run.mode {
        Mode::Ris => {
            let sel = select_ris(&scene, x, &w, &cfg.constraints()?)?;
            let set = build_pathset(&scene, &w, x, PathMode::Ris(&sel.allocation))?;
            (set, sel.allocation.bits())
        }
        Mode::Reflector => (
            build_pathset(&scene, &w, x, PathMode::Reflector)?,
            bits_string(&vec![false; scene.ris_count()]),
        ),
        Mode::Scatterer => (
            build_pathset(&scene, &w, x, PathMode::Scatterer)?,
            bits_string(&vec![false; scene.ris_count()]),
        ),
    };
    print!("{}", point_report(&set, &w, cfg.run.mode, &bits));
    Ok(Status::Ok)
}

/// Human-readable summary of one position.
pub fn point_report(set: &PathSet, w: &WaveformConfig, mode: Mode, bits: &str) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let fim = fim_total(set, w);
    let _ = writeln!(s, "position     {}", set.position);
    let _ = writeln!(s, "mode         {mode}");
    let _ = writeln!(s, "bandwidth_hz {}", w.bandwidth_hz());
    let _ = writeln!(s, "allocation   {bits}");
    let _ = writeln!(s, "paths");
    for p in set.iter() {
        let mag = p.gain.norm();
        let db = if mag > 0.0 { 20.0 * mag.log10() } else { f64::NEG_INFINITY };
        let _ = writeln!(
            s,
            "  {:<10} delay_ns {:>12.6}  |gain| {:.6e}  ({:>8.2} dB)",
            p.kind.to_string(),
            p.delay * 1e9,
            mag,
            db
        );
    }
    let _ = writeln!(s, "resolvable   {}", count_resolvable_paths(set, w));
    let j = fim.total;
    let _ = writeln!(s, "fim          [[{:.6e}, {:.6e}], [{:.6e}, {:.6e}]]", j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]);
    let total = peb(&fim);
    let direct = crate::fim::peb_of_matrix(fim.matrix(FimPart::DirectOnly));
    let _ = writeln!(s, "peb_m        {}", fmt_peb(total.value));
    let _ = writeln!(s, "peb_direct_m {}", fmt_peb(direct.value));
    s
}

fn fmt_peb(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6e}")
    } else {
        "inf".into()
    }
}

fn sweep(cfg: &RunConfig) -> Result<Status> {
    let scene = cfg.scene()?;
    let w = cfg.waveform()?;
    let grid = cfg.grid();
    let opts = cfg.sweep_options()?;
    let started = Instant::now();
    let map = peb_map(&scene, &grid, &w, &opts)?;
    let cdf = peb_cdf(&map);

    let dir = &cfg.run.out_dir;
    fs::create_dir_all(dir)?;
    let mut out = BufWriter::new(File::create(dir.join("map.csv"))?);
    write_map_csv(&map, &mut out)?;
    out.flush()?;
    let mut out = BufWriter::new(File::create(dir.join("cdf.csv"))?);
    write_cdf_csv(&cdf, &mut out)?;
    out.flush()?;
    fs::write(dir.join("effective.toml"), cfg.to_toml())?;

    eprintln!(
        "{} cells in {:.2} s, mode {}, coverage <=1 m {:.3}, <=2.5 m {:.3}, max resolvable paths {}",
        grid.len(),
        started.elapsed().as_secs_f64(),
        cfg.run.mode,
        map.coverage(1.0),
        map.coverage(2.5),
        map.max_path_count()
    );
    eprintln!("wrote {}", dir.display());
    Ok(Status::Ok)
}

fn select(
    cfg: &RunConfig,
    x: Point2,
    uncertainty: Option<f64>,
    objective: Objective,
) -> Result<Status> {
    let scene = cfg.scene()?;
    let w = cfg.waveform()?;
    let cons = cfg.constraints()?;
    let sel = match uncertainty {
        None => select_ris(&scene, x, &w, &cons)?,
        Some(u) => {
            if !(u.is_finite() && u >= 0.0) {
                return Err(Error::Config(format!("--uncertainty must be non-negative, got {u}")));
            }
            let samples: Vec<Point2> = [-u, 0.0, u]
                .iter()
                .flat_map(|&dy| [-u, 0.0, u].map(|dx| Point2::new(x.x + dx, x.y + dy)))
                .collect();
            let obj = match objective {
                Objective::Worst => RobustObjective::WorstCase,
                Objective::Expected => RobustObjective::Expected {
                    cap_m: cfg.run.peb_cap_m,
                },
            };
            robust_select(&scene, &samples, &w, &cons, obj)?
        }
    };
    println!("allocation {}", sel.allocation.bits());
    println!("peb_m      {}", fmt_peb(sel.peb.value));
    println!("score      {}", fmt_peb(sel.score));
    Ok(Status::Ok)
}
