//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qheat_core::{build_eigensystem, ergotropy, gibbs_battery_state, CycleKind};

use crate::config::Config;
use crate::curves::{delta_s_iso, st_diagram, CurveSet};
use crate::output::{csv, json_rows, render_curves, ErgotropyRow, Format};
use crate::scenario::{parse_bonds, parse_cycle, parse_list, run_cycle, ModelKind, Scenario};
use crate::sweep::{run_sweep, Axis, Grid, SweepRow, SweepSpec};
use crate::{svg, CliError, Result};

pub const JOBS_ENV: &str = "QHEAT_JOBS";

#[derive(Debug, Parser)]
#[command(name = "qheat", version, about = "Quantum heat engines on small Heisenberg spin clusters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one Carnot, Stirling or Otto cycle.
    #[command(allow_negative_numbers = true)]
    Cycle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        baths: BathArgs,
    },
    /// Evaluate a cycle over a grid of up to two parameters.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        baths: BathArgs,
        /// name:min:max:steps[:linear|log] with name one of J-a, J-b, b-a, b-b, t-hot, t-cold.
        #[arg(long = "axis")]
        axis: Vec<Axis>,
        /// Worker threads; defaults to $QHEAT_JOBS, then the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Entropy against temperature for models A and B, or for each coupling in --J-list.
    #[command(allow_negative_numbers = true)]
    Stdiagram {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        curve: CurveArgs,
        /// Comma-separated couplings, one curve each.
        #[arg(long = "J-list", allow_hyphen_values = true)]
        j_list: Option<String>,
    },
    /// Isothermal entropy change S_B(T) - S_A(T).
    #[command(allow_negative_numbers = true)]
    Dsiso {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Ergotropy of the Gibbs state of model A.
    #[command(allow_negative_numbers = true)]
    Ergotropy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        temperature: Option<f64>,
        /// min:max:steps[:linear|log]; one row per temperature.
        #[arg(long = "t-range")]
        t_range: Option<Grid>,
        /// Hamiltonian the work is measured against: zeeman (couplings off) or full.
        #[arg(long)]
        reference: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat key = value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Write data here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Dead band for sign calls in mode classification.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// single | dimer | cluster | levels
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long = "J-a")]
    pub j_a: Option<f64>,
    #[arg(long = "J-b")]
    pub j_b: Option<f64>,
    #[arg(long = "b-a")]
    pub b_a: Option<f64>,
    #[arg(long = "b-b")]
    pub b_b: Option<f64>,
    /// Cluster size; an open chain unless --bonds is given.
    #[arg(long)]
    pub sites: Option<usize>,
    /// Cluster bonds as i-j pairs, e.g. 0-1,1-2.
    #[arg(long)]
    pub bonds: Option<String>,
    /// Close the default cluster chain into a ring.
    #[arg(long)]
    pub periodic: bool,
    /// Comma-separated energies for --model levels.
    #[arg(long = "levels-a", allow_hyphen_values = true)]
    pub levels_a: Option<String>,
    #[arg(long = "levels-b", allow_hyphen_values = true)]
    pub levels_b: Option<String>,
}

#[derive(Debug, Args)]
pub struct BathArgs {
    /// carnot | stirling | otto
    #[arg(long, value_parser = parse_cycle)]
    pub cycle: Option<CycleKind>,
    #[arg(long = "t-hot")]
    pub t_hot: Option<f64>,
    #[arg(long = "t-cold")]
    pub t_cold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// min:max:steps[:linear|log]
    #[arg(long = "t-range")]
    pub t_range: Option<Grid>,
    /// Also draw the curves as an SVG chart.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "qheat: error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(common: &Common) -> Result<Config> {
    match &common.config {
        Some(path) => Config::load(path),
        None => Ok(Config::default()),
    }
}

fn scenario(model: &ModelArgs, baths: Option<&BathArgs>, cfg: &Config) -> Result<Scenario> {
    let text = |flag: &Option<String>, key: &str| cfg.pick(flag.clone(), key);
    let usage = CliError::usage;
    Ok(Scenario {
        model: cfg.pick(model.model, "model")?.unwrap_or_default(),
        j_a: cfg.pick(model.j_a, "J-a")?,
        j_b: cfg.pick(model.j_b, "J-b")?,
        b_a: cfg.pick(model.b_a, "b-a")?,
        b_b: cfg.pick(model.b_b, "b-b")?,
        t_hot: cfg.pick(baths.and_then(|b| b.t_hot), "t-hot")?,
        t_cold: cfg.pick(baths.and_then(|b| b.t_cold), "t-cold")?,
        sites: cfg.pick(model.sites, "sites")?,
        bonds: text(&model.bonds, "bonds")?.map(|s| parse_bonds(&s).map_err(usage)).transpose()?,
        periodic: cfg.flag(model.periodic, "periodic")?,
        levels_a: text(&model.levels_a, "levels-a")?.map(|s| parse_list(&s).map_err(usage)).transpose()?,
        levels_b: text(&model.levels_b, "levels-b")?.map(|s| parse_list(&s).map_err(usage)).transpose()?,
    })
}

fn cycle_kind(baths: &BathArgs, cfg: &Config) -> Result<CycleKind> {
    if let Some(kind) = baths.cycle {
        return Ok(kind);
    }
    let name = cfg.get("cycle").ok_or_else(|| CliError::usage("missing --cycle"))?;
    parse_cycle(name).map_err(CliError::usage)
}

fn epsilon(common: &Common, cfg: &Config) -> Result<Option<f64>> {
    let eps = cfg.pick(common.epsilon, "epsilon")?;
    if let Some(e) = eps {
        if !(e >= 0.0 && e.is_finite()) {
            return Err(CliError::usage("epsilon must be finite and non-negative"));
        }
    }
    Ok(eps)
}

fn jobs(flag: Option<usize>, cfg: &Config) -> Result<Option<usize>> {
    if let Some(n) = cfg.pick(flag, "jobs")? {
        return Ok(Some(n));
    }
    match std::env::var(JOBS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| CliError::usage(format!("{JOBS_ENV}={v}: {e}"))),
        Err(_) => Ok(None),
    }
}

fn emit(text: &str, common: &Common, cfg: &Config, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cfg.pick(common.output.clone(), "output")? {
        Some(path) => {
            std::fs::write(&path, text)?;
            let _ = writeln!(stderr, "qheat: wrote {}", path.display());
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn write_svg(set: &CurveSet, flag: &Option<PathBuf>, cfg: &Config, stderr: &mut dyn Write) -> Result<()> {
    if let Some(path) = cfg.pick(flag.clone(), "svg")? {
        std::fs::write(&path, svg::render(set))?;
        let _ = writeln!(stderr, "qheat: wrote {}", path.display());
    }
    Ok(())
}

fn t_range(flag: Option<Grid>, cfg: &Config) -> Result<Grid> {
    cfg.pick(flag, "t-range")?
        .ok_or_else(|| CliError::usage("missing --t-range"))
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Cycle { common, model, baths } => {
            let cfg = load_config(&common)?;
            let scenario = scenario(&model, Some(&baths), &cfg)?;
            let kind = cycle_kind(&baths, &cfg)?;
            let report = run_cycle(kind, &scenario, epsilon(&common, &cfg)?)?;
            let text = match format(&common, &cfg)? {
                Format::Json => json_rows(std::slice::from_ref(&report)),
                Format::Csv => csv(&[SweepRow::new(0, &[], kind, &scenario, Ok(report))], &[]),
            };
            emit(&text, &common, &cfg, stdout, stderr)
        }
        Command::Sweep {
            common,
            model,
            baths,
            axis,
            jobs: jobs_flag,
        } => {
            let cfg = load_config(&common)?;
            let axes = if axis.is_empty() {
                cfg.get_all("axis")
                    .iter()
                    .map(|a| a.parse::<Axis>().map_err(CliError::usage))
                    .collect::<Result<Vec<_>>>()?
            } else {
                axis
            };
            let spec = SweepSpec {
                cycle: cycle_kind(&baths, &cfg)?,
                base: scenario(&model, Some(&baths), &cfg)?,
                axes,
                epsilon: epsilon(&common, &cfg)?,
            };
            let rows = run_sweep(&spec, jobs(jobs_flag, &cfg)?)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                let _ = writeln!(stderr, "qheat: {failed} of {} grid points failed", rows.len());
            }
            let text = match format(&common, &cfg)? {
                Format::Json => json_rows(&rows),
                Format::Csv => csv(&rows, &[]),
            };
            emit(&text, &common, &cfg, stdout, stderr)
        }
        Command::Stdiagram {
            common,
            model,
            curve,
            j_list,
        } => {
            let cfg = load_config(&common)?;
            let scenario = scenario(&model, None, &cfg)?;
            let models = match cfg.pick(j_list, "J-list")? {
                Some(list) => parse_list(&list)
                    .map_err(CliError::usage)?
                    .into_iter()
                    .map(|j| scenario.model_with_coupling(j))
                    .collect::<Result<Vec<_>>>()?,
                None => {
                    let (a, b) = (scenario.model_a()?, scenario.model_b()?);
                    if a == b {
                        vec![a]
                    } else {
                        vec![a, b]
                    }
                }
            };
            let set = st_diagram(&models, &t_range(curve.t_range, &cfg)?)?;
            write_svg(&set, &curve.svg, &cfg, stderr)?;
            emit(&render_curves(&set, format(&common, &cfg)?), &common, &cfg, stdout, stderr)
        }
        Command::Dsiso { common, model, curve } => {
            let cfg = load_config(&common)?;
            let scenario = scenario(&model, None, &cfg)?;
            let set = delta_s_iso(&scenario.model_a()?, &scenario.model_b()?, &t_range(curve.t_range, &cfg)?)?;
            write_svg(&set, &curve.svg, &cfg, stderr)?;
            emit(&render_curves(&set, format(&common, &cfg)?), &common, &cfg, stdout, stderr)
        }
        Command::Ergotropy {
            common,
            model,
            temperature,
            t_range,
            reference,
        } => {
            let cfg = load_config(&common)?;
            let scenario = scenario(&model, None, &cfg)?;
            let reference = cfg.pick(reference, "reference")?.unwrap_or_else(|| "zeeman".into());
            let full = build_eigensystem(&scenario.model_a()?)?;
            let measured = match reference.as_str() {
                "full" => full.clone(),
                "zeeman" => build_eigensystem(&scenario.model_with_coupling(0.0)?)?,
                other => return Err(CliError::usage(format!("unknown reference `{other}` (zeeman|full)"))),
            };
            let temperatures = match (cfg.pick(temperature, "temperature")?, cfg.pick(t_range, "t-range")?) {
                (Some(t), None) => vec![t],
                (None, Some(grid)) => {
                    grid.validate()?;
                    grid.values()
                }
                (Some(_), Some(_)) => return Err(CliError::usage("give --temperature or --t-range, not both")),
                (None, None) => return Err(CliError::usage("missing --temperature")),
            };
            let rows = temperatures
                .iter()
                .map(|&t| {
                    let state = gibbs_battery_state(&full, t)?;
                    Ok(ErgotropyRow::new(t, &reference, &ergotropy(&state, &measured)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let text = match format(&common, &cfg)? {
                Format::Json => json_rows(&rows),
                Format::Csv => csv(&rows, &[]),
            };
            emit(&text, &common, &cfg, stdout, stderr)
        }
    }
}

fn format(common: &Common, cfg: &Config) -> Result<Format> {
    Ok(cfg.pick(common.format, "format")?.unwrap_or_default())
}

