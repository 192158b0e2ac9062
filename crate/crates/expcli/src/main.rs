use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sawtooth_echo::analysis::{classify_regime_with, FitKind, FGR_CONSTANT};
use sawtooth_echo::MapParams;
use sawtooth_expcli::csv::read_series;
use sawtooth_expcli::runner::fit_series;
use sawtooth_expcli::{
    check_preset, emit_plot_script, run, ExperimentConfig, FitConfig, Plateau, PlateauRule, Preset, RunError,
    RunRecord, RunResult,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "sawecho",
    version,
    about = "Fidelity (Loschmidt echo) experiments on the sawtooth map"
)]
struct Cli {
    /// Worker threads. Affects wall time only, never results.
    #[arg(long, global = true, env = "SAWECHO_THREADS")]
    threads: Option<usize>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSVs plus summary.json.
    Run {
        #[command(flatten)]
        source: ConfigSource,
        /// Also write the plotting script.
        #[arg(long)]
        plot: bool,
    },
    /// Fit saved series.
    Fit(FitArgs),
    /// Report the perturbation regime of a parameter set or of every sweep point.
    Classify(ClassifyArgs),
    /// Write a matplotlib script for a finished run.
    PlotScript {
        /// Path to the run's summary.json.
        record: PathBuf,
        /// Script location (defaults to the run directory).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Built-in figure presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List the presets and check them against the caption table.
    List {
        /// Print each preset as TOML.
        #[arg(long)]
        toml: bool,
    },
}

#[derive(Args)]
struct ConfigSource {
    /// TOML experiment file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset (fig1..fig5).
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Seed of the classical ensemble.
    #[arg(long)]
    seed: Option<u64>,
    /// Reduce N and M by this factor, keeping σ fixed.
    #[arg(long)]
    scale: Option<f64>,
}

impl ConfigSource {
    fn resolve(&self) -> RunResult<ExperimentConfig> {
        let mut config = match (&self.config, self.preset) {
            (Some(path), _) => ExperimentConfig::from_file(path)?,
            (None, Some(preset)) => preset.config(),
            (None, None) => return Err(RunError::config("--config", "give --config FILE or --preset NAME")),
        };
        if let Some(scale) = self.scale {
            config = config.scaled(scale)?;
        }
        if let Some(dir) = &self.out_dir {
            config.out_dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            match config.classical.as_mut() {
                Some(c) => c.seed = seed,
                None => log::warn!("--seed ignored: the config has no classical ensemble"),
            }
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Exponential,
    PowerLaw,
}

#[derive(Args)]
struct FitArgs {
    /// Series CSV files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "exponential")]
    model: Model,
    #[arg(long)]
    start: Option<u32>,
    #[arg(long)]
    end: Option<u32>,
    /// `auto`, `off` or a fixed plateau value.
    #[arg(long, default_value = "auto")]
    plateau: String,
    #[arg(long)]
    saturation_factor: Option<f64>,
    #[arg(long)]
    tail_fraction: Option<f64>,
}

impl FitArgs {
    fn fit_config(&self) -> RunResult<FitConfig> {
        let plateau = match self.plateau.as_str() {
            "auto" => Plateau::Rule(PlateauRule::Auto),
            "off" => Plateau::Rule(PlateauRule::Off),
            v => Plateau::Fixed(
                v.parse()
                    .map_err(|_| RunError::config("--plateau", format!("`{v}` is not auto, off or a number")))?,
            ),
        };
        let defaults = FitConfig::default();
        Ok(FitConfig {
            model: match self.model {
                Model::Exponential => FitKind::Exponential,
                Model::PowerLaw => FitKind::PowerLaw,
            },
            start: self.start,
            end: self.end,
            plateau,
            saturation_factor: self.saturation_factor.unwrap_or(defaults.saturation_factor),
            tail_fraction: self.tail_fraction.unwrap_or(defaults.tail_fraction),
        })
    }
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    source: Option<ConfigSource>,
    /// Kick strength K₀ (with --dim and --eps).
    #[arg(long, requires_all = ["dim", "eps"])]
    kick: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1)]
    torus: u32,
    #[arg(long, default_value_t = FGR_CONSTANT)]
    fgr_constant: f64,
}

fn print_json(value: &serde_json::Value) {
    println!("{value}");
}

fn cmd_run(source: &ConfigSource, plot: bool) -> RunResult<()> {
    let config = source.resolve()?;
    let record = run(&config)?;
    for e in &record.series {
        let fit = match (&e.fit, &e.fit_error) {
            (Some(f), _) => format!(
                "rate {:.4} ± {:.4} on [{}, {}]",
                f.rate, f.rate_stderr, f.window.0, f.window.1
            ),
            (None, Some(err)) => format!("no fit: {err}"),
            (None, None) => "no fit".into(),
        };
        let regime = e
            .regime
            .map(|r| format!(" regime={:?} sigma={:.4}", r.regime, r.sigma))
            .unwrap_or_default();
        println!(
            "{} K0={} L={} N={} eps={:e}: {fit}{regime}",
            e.id, e.params.kick, e.params.torus_len, e.params.dim, e.params.eps
        );
    }
    println!(
        "summary: {}",
        record.out_dir.join(sawtooth_expcli::runner::SUMMARY_FILE).display()
    );
    if plot {
        println!("plot script: {}", emit_plot_script(&record, None)?.display());
    }
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> RunResult<()> {
    let fit = args.fit_config()?;
    for file in &args.files {
        let loaded = read_series(file)?;
        let (plateau, result) = fit_series(&fit, &loaded.series);
        let value = match result {
            Ok(r) => json!({ "file": file, "plateau": plateau, "fit": r }),
            Err(e) => json!({ "file": file, "plateau": plateau, "error": e.to_string() }),
        };
        print_json(&value);
    }
    Ok(())
}

fn cmd_classify(args: &ClassifyArgs) -> RunResult<()> {
    if let (Some(kick), Some(dim), Some(eps)) = (args.kick, args.dim, args.eps) {
        let params =
            MapParams::new(kick, args.torus, dim, eps).map_err(|e| RunError::config("classify", e.to_string()))?;
        let report = classify_regime_with(&params, args.fgr_constant);
        print_json(&json!({ "params": params, "report": report }));
        return Ok(());
    }
    let source = args
        .source
        .as_ref()
        .ok_or_else(|| RunError::config("classify", "give --kick/--dim/--eps, --config or --preset"))?;
    let config = source.resolve()?;
    for point in &config.sweep {
        let report = classify_regime_with(&point.params, config.fgr_constant);
        print_json(&json!({ "params": point.params, "report": report }));
    }
    Ok(())
}

fn cmd_plot_script(record: &Path, output: Option<&Path>) -> RunResult<()> {
    let record = RunRecord::load(record)?;
    println!("{}", emit_plot_script(&record, output)?.display());
    Ok(())
}

fn cmd_presets(toml: bool) -> RunResult<()> {
    for preset in Preset::ALL {
        let config = preset.config();
        let check = match check_preset(preset, &config) {
            Ok(()) => "caption ok".to_string(),
            Err(e) => format!("caption MISMATCH: {e}"),
        };
        println!(
            "{preset}  {:>3} points  {}  [{check}]",
            config.sweep.len(),
            preset.summary()
        );
        if toml {
            println!("{}", config.to_toml_string()?);
        }
    }
    Ok(())
}

fn execute(cli: &Cli) -> RunResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(RunError::config("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| RunError::Other(e.to_string()))?;
    }
    match &cli.command {
        Command::Run { source, plot } => cmd_run(source, *plot),
        Command::Fit(args) => cmd_fit(args),
        Command::Classify(args) => cmd_classify(args),
        Command::PlotScript { record, output } => cmd_plot_script(record, output.as_deref()),
        Command::Presets {
            action: PresetAction::List { toml },
        } => cmd_presets(*toml),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sawecho: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
