//! The `sht` command line.
//!
//! Exit codes: 0 success, 2 usage or validation, 3 numeric domain, 4 I/O.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::agent::{best_response, AgentBelief, EconomicInstance, InstanceRaw};
use crate::casestudy::{alpha_hat_heatmap, gnuplot_heatmap_script, heatmap_table};
use crate::config::{load_config, ConfigError, RunConfig};
use crate::loss::sweep_alpha;
use crate::presets::{preset, preset_names};
use crate::table::{SweepTable, TableError};
use crate::threshold::{critical_alpha, participation_threshold, CriticalAlpha, DEFAULT_EPS};

#[derive(Debug, Parser)]
#[command(name = "sht", version, about = "Strategic hypothesis testing toolkit")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Bundled configuration (cardiovascular, oncology, vaccine, fn-curves-53, ...).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Where to write CSV output; defaults to the config's `output`, then stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Suppress summaries on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Participation decision and optimal trial size of one agent.
    BestResponse {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        mu0: f64,
        #[command(flatten)]
        instance: InstanceFlags,
    },
    /// Lowest participating belief at a p-value threshold.
    Threshold {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[command(flatten)]
        instance: InstanceFlags,
    },
    /// Critical p-value by nested search, with the closed form.
    CriticalAlpha {
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[command(flatten)]
        instance: InstanceFlags,
    },
    /// Loss components over the config's alpha grid.
    LossSweep {
        #[command(flatten)]
        instance: InstanceFlags,
    },
    /// Critical p-value over the config's revenue x fixed-cost grid.
    Heatmap {
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        /// Also write a gnuplot script that draws the output CSV.
        #[arg(long)]
        gnuplot: Option<PathBuf>,
        #[command(flatten)]
        instance: InstanceFlags,
    },
    /// List the bundled configurations.
    Presets,
}

/// Overrides for individual instance fields.
#[derive(Debug, Default, Args)]
pub struct InstanceFlags {
    /// Revenue on approval.
    #[arg(long = "revenue", visible_alias = "R")]
    pub revenue: Option<f64>,
    /// Fixed trial cost.
    #[arg(long)]
    pub c0: Option<f64>,
    /// Cost per sample.
    #[arg(long)]
    pub c: Option<f64>,
    /// Baseline effectiveness.
    #[arg(long)]
    pub mu_b: Option<f64>,
    #[arg(long)]
    pub n_min: Option<u64>,
    #[arg(long)]
    pub n_max: Option<u64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Table { path: String, source: TableError },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(ConfigError::Io { .. }) => 4,
            CliError::Config(_) => 2,
            CliError::Model(crate::Error::Invalid { .. }) => 2,
            CliError::Model(_) => 3,
            CliError::Io { .. } | CliError::Table { .. } => 4,
        }
    }
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn base_config(cli: &Cli) -> Result<RunConfig, CliError> {
    if let Some(path) = &cli.config {
        return Ok(load_config(path)?);
    }
    if let Some(name) = &cli.preset {
        return match preset(name) {
            Some(c) => Ok(c?),
            None => Err(CliError::Usage(format!(
                "unknown preset `{name}`; available: {}",
                preset_names().collect::<Vec<_>>().join(", ")
            ))),
        };
    }
    Ok(RunConfig::from_json("{}")?)
}

/// Applies flag overrides to the configured instance, validating the result.
fn resolve_instance(
    config: &RunConfig,
    flags: &InstanceFlags,
    command: &'static str,
) -> Result<EconomicInstance, CliError> {
    let base = config.instance.map(InstanceRaw::from);
    let pick = |flag: Option<f64>, from: Option<f64>, name: &str| {
        flag.or(from).ok_or_else(|| {
            CliError::Usage(format!(
                "`{command}` needs an instance: pass --config, --preset or --{name}"
            ))
        })
    };
    let raw = InstanceRaw {
        revenue: pick(flags.revenue, base.map(|b| b.revenue), "revenue")?,
        c0: pick(flags.c0, base.map(|b| b.c0), "c0")?,
        c: pick(flags.c, base.map(|b| b.c), "c")?,
        mu_b: pick(flags.mu_b, base.map(|b| b.mu_b), "mu-b")?,
        n_min: flags
            .n_min
            .or(base.map(|b| b.n_min))
            .unwrap_or(crate::agent::DEFAULT_N_MIN),
        n_max: flags
            .n_max
            .or(base.map(|b| b.n_max))
            .unwrap_or(crate::agent::DEFAULT_N_MAX),
    };
    Ok(EconomicInstance::try_from(raw)?)
}

/// Six significant digits, shortest form.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let r: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    format!("{r}")
}

fn output_path(cli: &Cli, config: &RunConfig) -> Option<PathBuf> {
    cli.output.clone().or_else(|| config.output.clone())
}

fn emit(table: &SweepTable, path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let shown = p.display().to_string();
            let file = File::create(p).map_err(|source| CliError::Io {
                path: shown.clone(),
                source,
            })?;
            table
                .write_csv(BufWriter::new(file))
                .map_err(|source| CliError::Table {
                    path: shown,
                    source,
                })
        }
        None => table.write_csv(stdout).map_err(|source| CliError::Table {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn io(path: &str) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_string(),
        source,
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    if let Command::Presets = cli.command {
        for name in preset_names() {
            writeln!(stdout, "{name}").map_err(io("<stdout>"))?;
        }
        return Ok(());
    }
    let config = base_config(cli)?;
    let out = output_path(cli, &config);
    match &cli.command {
        Command::BestResponse {
            alpha,
            mu0,
            instance,
        } => {
            let inst = resolve_instance(&config, instance, "best-response")?;
            let br = best_response(*alpha, AgentBelief::new(*mu0)?, &inst)?;
            let decision = if br.participates {
                "participate"
            } else {
                "abstain"
            };
            writeln!(
                stdout,
                "decision: {decision}\nparticipates: {}\nn_star: {}\npass_prob: {}\nutility: {}",
                br.participates,
                br.n_star,
                sig6(br.pass_prob),
                sig6(br.utility)
            )
            .map_err(io("<stdout>"))?;
        }
        Command::Threshold {
            alpha,
            eps,
            instance,
        } => {
            let inst = resolve_instance(&config, instance, "threshold")?;
            let t = participation_threshold(*alpha, &inst, *eps)?;
            let clamp = t.clamp.map_or("none".to_string(), |c| format!("{c:?}"));
            writeln!(
                stdout,
                "mu_tau: {}\nepsilon: {}\nclamp: {clamp}",
                sig6(t.mu_tau),
                sig6(t.epsilon)
            )
            .map_err(io("<stdout>"))?;
        }
        Command::CriticalAlpha { eps, instance } => {
            let inst = resolve_instance(&config, instance, "critical-alpha")?;
            let a = critical_alpha(&inst, *eps)?;
            let closed = CriticalAlpha::closed_form(&inst);
            let clamp = a.clamp.map_or("none".to_string(), |c| format!("{c:?}"));
            if !cli.quiet {
                writeln!(
                    stderr,
                    "alpha_hat: {}\nclosed_form: {}\ndiscrepancy: {:e}\nclamp: {clamp}",
                    sig6(a.alpha_hat),
                    sig6(closed),
                    (a.alpha_hat - closed).abs()
                )
                .map_err(io("<stderr>"))?;
            }
            let mut t = SweepTable::new([
                "alpha_hat",
                "closed_form",
                "discrepancy",
                "mu_tau",
                "clamped",
            ]);
            t.push(vec![
                a.alpha_hat,
                closed,
                (a.alpha_hat - closed).abs(),
                a.mu_tau,
                f64::from(u8::from(a.clamp.is_some())),
            ]);
            emit(&t, out.as_deref(), stdout)?;
        }
        Command::LossSweep { instance } => {
            let inst = resolve_instance(&config, instance, "loss-sweep")?;
            let prior = config.require_prior("loss-sweep")?;
            let grid = config.require_grid("loss-sweep", "grids.alpha")?;
            let sweep = sweep_alpha(&inst, prior, &config.weights, &config.quadrature, &grid)?;
            if !cli.quiet {
                let flagged: Vec<String> = sweep
                    .rows
                    .iter()
                    .filter(|r| r.breakdown.flags.any())
                    .map(|r| format!("alpha={} {:?}", r.breakdown.alpha, r.breakdown.flags))
                    .collect();
                writeln!(
                    stderr,
                    "{} rows, critical alpha {}, {} flagged",
                    sweep.rows.len(),
                    sig6(critical_alpha(&inst, DEFAULT_EPS)?.alpha_hat),
                    flagged.len()
                )
                .map_err(io("<stderr>"))?;
                for f in flagged {
                    writeln!(stderr, "  {f}").map_err(io("<stderr>"))?;
                }
            }
            emit(&sweep.to_table(), out.as_deref(), stdout)?;
        }
        Command::Heatmap {
            eps,
            gnuplot,
            instance,
        } => {
            let inst = resolve_instance(&config, instance, "heatmap")?;
            let rs = config.require_grid("heatmap", "grids.R")?;
            let cs = config.require_grid("heatmap", "grids.c0")?;
            let cells = alpha_hat_heatmap(&inst, &rs, &cs, *eps)?;
            let table = heatmap_table(&cells);
            emit(&table, out.as_deref(), stdout)?;
            if let Some(script) = gnuplot {
                let csv = out
                    .as_ref()
                    .map_or("heatmap.csv".to_string(), |p| p.display().to_string());
                let title = cli.preset.as_deref().unwrap_or("critical p-value");
                let shown = script.display().to_string();
                std::fs::write(script, gnuplot_heatmap_script(&csv, title)).map_err(io(&shown))?;
            }
            if !cli.quiet {
                let clamped = cells.iter().filter(|c| c.critical.clamp.is_some()).count();
                writeln!(stderr, "{} cells, {clamped} clamped", cells.len())
                    .map_err(io("<stderr>"))?;
            }
        }
        Command::Presets => unreachable!("handled above"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("sht").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.829_244_494_322_51), "0.829244");
        assert_eq!(sig6(166.0), "166");
        assert_eq!(sig6(0.039_642_696_629), "0.0396427");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn best_response_worked_instance() {
        let (code, out, _) = run_capture(&[
            "best-response",
            "--alpha",
            "0.05",
            "--mu0",
            "0.6",
            "--revenue",
            "1",
            "--c0",
            "0.05",
            "--c",
            "0.002",
            "--mu-b",
            "0.5",
            "--n-max",
            "500",
        ]);
        assert_eq!(code, 0);
        assert!(out.contains("n_star: 166"), "{out}");
        assert!(out.contains("utility: 0.447244"), "{out}");
    }

    #[test]
    fn usage_and_validation_codes() {
        assert_eq!(run_capture(&["best-response", "--alpha", "0.05"]).0, 2);
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        let (code, _, err) = run_capture(&[
            "best-response",
            "--alpha",
            "0.05",
            "--mu0",
            "0.6",
            "--revenue=-1",
            "--c0",
            "0",
            "--c",
            "0",
            "--mu-b",
            "0.5",
        ]);
        assert_eq!(code, 2);
        assert!(err.contains("`R`"), "{err}");
        assert_eq!(run_capture(&["--preset", "nope", "critical-alpha"]).0, 2);
        assert_eq!(run_capture(&["--help"]).0, 0);
    }

    #[test]
    fn domain_and_io_codes() {
        let (code, _, _) =
            run_capture(&["--preset", "cardiovascular", "threshold", "--alpha", "1.5"]);
        assert_eq!(code, 3);
        let (code, _, _) = run_capture(&["--config", "/nonexistent/x.json", "critical-alpha"]);
        assert_eq!(code, 4);
        let (code, _, _) = run_capture(&[
            "--preset",
            "cardiovascular",
            "--output",
            "/nonexistent/dir/out.csv",
            "critical-alpha",
        ]);
        assert_eq!(code, 4);
    }

    #[test]
    fn critical_alpha_cardiovascular() {
        let (code, out, err) = run_capture(&["--preset", "cardiovascular", "critical-alpha"]);
        assert_eq!(code, 0);
        assert!(err.contains("alpha_hat: 0.0396"), "{err}");
        assert!(out.starts_with("alpha_hat,closed_form,discrepancy,mu_tau,clamped\n0.0396"));
        let (_, _, err) = run_capture(&[
            "--preset",
            "cardiovascular",
            "critical-alpha",
            "--revenue",
            "100",
        ]);
        assert!(err.contains("NoFeasibleAlpha"), "{err}");
    }

    #[test]
    fn loss_sweep_requires_prior() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(
            &cfg,
            r#"{"instance": {"R": 1, "c0": 0.05, "c": 0.002, "mu_b": 0.5},
                "grids": {"alpha": {"values": [0.01, 0.1]}}}"#,
        )
        .unwrap();
        let (code, _, err) = run_capture(&["--config", cfg.to_str().unwrap(), "loss-sweep"]);
        assert_eq!(code, 2);
        assert!(err.contains("requires `prior`"), "{err}");
    }
}
