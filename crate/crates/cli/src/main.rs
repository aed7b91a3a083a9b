use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use risopt::harness::checks::{audit, check_gradients, GRADIENT_TOLERANCE};
use risopt::harness::{
    presets, read_csv, run_configured, summarize, sweep, write_csv, write_gnuplot, write_summary, Execution, ResultRow,
    RunMetadata, RunOptions, ScenarioConfig, SweepParam,
};
use risopt::optimizer::Algorithm;

#[derive(Parser)]
#[command(name = "risopt", version, about = "Joint precoder and RIS phase optimization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo run of a scenario, including its configured sweep if any.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Monte Carlo run repeated over the values of one parameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// p_tx_dbm, n_ris, user_distance, quant_bits or n_panels.
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values; `inf` is accepted for quant_bits.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Finite-difference check of the analytic gradients on random instances.
    CheckGradients {
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Property checks on random instances and on a scenario.
    Audit {
        /// Scenario file or preset name; desk_indoor when omitted.
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        dump_config: bool,
    },
    /// Per (sweep value, algorithm) mean and spread of a results CSV.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        /// Summary CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
    /// Lists the bundled scenario presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file, or the name of a bundled preset.
    #[arg(long)]
    config: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    /// Results CSV; stdout when omitted. A `.json` metadata sidecar is
    /// written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides RIS_OPT_WORKERS. 1 runs sequentially.
    #[arg(long)]
    workers: Option<usize>,
    /// Record wall_ms per row. Makes the output differ between runs.
    #[arg(long)]
    timing: bool,
    /// Also write gnuplot data of the summary to this path.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
    /// Print the fully resolved configuration as TOML and exit.
    #[arg(long)]
    dump_config: bool,
}

fn load_config(spec: &str) -> Result<ScenarioConfig> {
    let path = Path::new(spec);
    if path.exists() {
        return ScenarioConfig::load(path).with_context(|| format!("loading {spec}"));
    }
    match presets::preset_text(spec) {
        Some(text) => ScenarioConfig::from_toml_str(text).with_context(|| format!("preset {spec}")),
        None => bail!("'{spec}' is neither a file nor a bundled preset (see `risopt presets`)"),
    }
}

fn dump(cfg: &ScenarioConfig) -> Result<()> {
    print!("{}", cfg.clone().resolved()?.to_toml_string()?);
    Ok(())
}

impl RunArgs {
    fn config(&self) -> Result<ScenarioConfig> {
        let mut cfg = load_config(&self.config)?;
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(a) = &self.algorithms {
            cfg.algorithms = a.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn options(&self) -> RunOptions {
        let execution = match self.workers {
            Some(1) => Execution::Sequential,
            Some(w) => Execution::Workers(w),
            None => Execution::Parallel,
        };
        RunOptions { execution, timing: self.timing }
    }

    fn emit(&self, cfg: &ScenarioConfig, rows: &[ResultRow]) -> Result<()> {
        match &self.out {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
                write_csv(rows, &mut w)?;
                w.flush()?;
                let meta = path.with_extension("json");
                std::fs::write(&meta, RunMetadata::new(cfg).to_json()? + "\n")
                    .with_context(|| format!("writing {}", meta.display()))?;
            }
            None => write_csv(rows, std::io::stdout().lock())?,
        }
        if let Some(path) = &self.gnuplot {
            write_gnuplot(&summarize(rows), BufWriter::new(File::create(path)?))?;
        }
        let errors = rows.iter().filter(|r| !r.is_ok()).count();
        if errors > 0 {
            log::warn!("{errors} of {} rows are errors", rows.len());
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate { run } => {
            let cfg = run.config()?;
            if run.dump_config {
                dump(&cfg)?;
                return Ok(ExitCode::SUCCESS);
            }
            let rows = run_configured(&cfg, run.options())?;
            run.emit(&cfg, &rows)?;
        }
        Command::Sweep { run, param, values } => {
            let mut cfg = run.config()?;
            cfg.sweep = Some(risopt::harness::SweepConfig { param, values: values.clone() });
            if run.dump_config {
                dump(&cfg)?;
                return Ok(ExitCode::SUCCESS);
            }
            let mut base = cfg.clone();
            base.sweep = None;
            let rows = sweep(&base, param, &values, run.options())?;
            run.emit(&cfg, &rows)?;
        }
        Command::CheckGradients { instances, seed } => {
            let report = check_gradients(instances, seed)?;
            println!("instances per topology: {}", report.instances);
            println!("max relative error (parallel): {:.3e}", report.max_error_parallel);
            println!("max relative error (multihop): {:.3e}", report.max_error_multihop);
            let mark = if report.passed() { "PASS" } else { "FAIL" };
            println!("{mark} gradients within {GRADIENT_TOLERANCE:e}");
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Audit { config, dump_config } => {
            let cfg = load_config(config.as_deref().unwrap_or("desk_indoor"))?;
            cfg.validate()?;
            if dump_config {
                dump(&cfg)?;
                return Ok(ExitCode::SUCCESS);
            }
            let lines = audit(&cfg)?;
            for l in &lines {
                println!("{l}");
            }
            if lines.iter().any(|l| !l.passed) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Summarize { input, out, gnuplot } => {
            let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let summary = summarize(&read_csv(file)?);
            match out {
                Some(p) => write_summary(&summary, BufWriter::new(File::create(p)?))?,
                None => write_summary(&summary, std::io::stdout().lock())?,
            }
            if let Some(p) = gnuplot {
                write_gnuplot(&summary, BufWriter::new(File::create(p)?))?;
            }
        }
        Command::Presets => {
            for (name, text) in presets::PRESETS {
                let about = text.lines().next().unwrap_or("").trim_start_matches('#').trim();
                println!("{name:22} {about}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
