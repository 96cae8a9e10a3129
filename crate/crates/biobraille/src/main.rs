use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use biobraille::commands::{
    self, ClassifierChoice, ModeChoice, Workspace,
};
use biobraille::config::{validate_config, ExperimentConfig};
use biobraille_core::classify::ClassifierKind;
use biobraille_core::features::RegionGrid;
use biobraille_core::noise::NoiseKind;
use biobraille_core::organoid::SweepParam;

/// Software test bench for an event-tactile Braille pipeline: synthetic
/// recordings, stimulation encoding, a stochastic organoid simulator, and
/// classification experiments.
#[derive(Parser)]
#[command(name = "biobraille", version, max_term_width = 100)]
struct Cli {
    /// Experiment configuration (JSON); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for tables and the archive.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamArg {
    Pulses,
    Amplitude,
    Duration,
    Delay,
}

impl From<ParamArg> for SweepParam {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::Pulses => SweepParam::Pulses,
            ParamArg::Amplitude => SweepParam::Amplitude,
            ParamArg::Duration => SweepParam::Duration,
            ParamArg::Delay => SweepParam::Delay,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClfArg {
    Knn,
    Svm,
    Forest,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Gaussian,
    Uniform,
    Missing,
    Outliers,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Single,
    Ensemble,
}

#[derive(Args)]
struct SynthArgs {
    /// Letters to record: `A..Z`, `A-F`, `ABC`, or `A,B,C`.
    #[arg(long)]
    letters: Option<String>,
    /// Indentation depths in mm, comma separated.
    #[arg(long)]
    depths: Option<String>,
    /// Trials per (letter, depth) condition.
    #[arg(long)]
    trials: Option<u8>,
    /// Directory for the .aer files (defaults to <out>/aer).
    #[arg(long)]
    dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic swipe recordings as .aer files.
    Synth(SynthArgs),
    /// Extract per-region features from a directory of .aer files.
    Features {
        /// Directory containing .aer files.
        #[arg(long, value_name = "DIR")]
        r#in: PathBuf,
        /// Region grid, e.g. 2x4.
        #[arg(long, default_value = "2x4")]
        grid: String,
        #[arg(long, default_value_t = 100)]
        window_ms: u32,
        /// Output CSV (defaults to <out>/features.csv).
        #[arg(long)]
        out_file: Option<PathBuf>,
    },
    /// Map features to stimulation patterns with a persisted calibration.
    Encode {
        #[arg(long)]
        features: PathBuf,
        /// Calibration JSON: loaded when present, computed and written
        /// otherwise.
        #[arg(long)]
        cal: PathBuf,
        #[arg(long)]
        out_file: Option<PathBuf>,
    },
    /// Apply stimulation patterns to one simulated organoid.
    Sim {
        /// Organoid model JSON: loaded when present, built from a seed and
        /// written otherwise.
        #[arg(long)]
        model: PathBuf,
        /// Seed for building the model when the file does not exist.
        #[arg(long)]
        model_seed: Option<u64>,
        #[arg(long)]
        stim: PathBuf,
        /// Which organoid's trial-noise streams to use (0..2).
        #[arg(long, default_value_t = 0)]
        organoid: usize,
        #[arg(long, default_value_t = 500)]
        window_ms: u32,
        /// Spike-train output (defaults to <out>/spikes.jsonl).
        #[arg(long)]
        out_file: Option<PathBuf>,
        /// Also write decoded per-channel counts to this CSV.
        #[arg(long)]
        responses: Option<PathBuf>,
    },
    /// Sweep one stimulation parameter and tabulate mean spike counts.
    Sweep {
        #[arg(long)]
        param: ParamArg,
        /// Override the configured value list, comma separated.
        #[arg(long)]
        values: Option<String>,
        #[arg(long)]
        trials: Option<u32>,
    },
    /// Peristimulus time histograms around stimulus onset.
    Temporal {
        #[arg(long)]
        param: ParamArg,
        #[arg(long)]
        values: Option<String>,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        bin_ms: Option<u32>,
    },
    /// Activity-centre clusters and spatial metrics per electrode.
    Spatial {
        /// Model JSON (defaults to <out>/organoid0.json, built if missing).
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        param: ParamArg,
        #[arg(long)]
        values: Option<String>,
        #[arg(long)]
        trials: Option<u32>,
    },
    /// Cross-validate persisted response vectors.
    Classify {
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        mode: ModeArg,
        #[arg(long, default_value = "svm")]
        clf: ClfArg,
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Noise-robustness comparison of single vs ensemble decoding.
    Robustness {
        /// 24-dimensional ensemble responses CSV.
        #[arg(long)]
        responses: PathBuf,
        #[arg(long, default_value = "all")]
        noise: NoiseArg,
        #[arg(long)]
        repeats: Option<u32>,
    },
    /// Run the full Braille pipeline end to end.
    Braille,
    /// Validate the configuration and print diagnostics.
    Validate,
}

fn parse_grid(text: &str) -> anyhow::Result<RegionGrid> {
    let (rows, cols) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow::anyhow!("grid must look like 2x4, got {text:?}"))?;
    Ok(RegionGrid {
        rows: rows.trim().parse()?,
        cols: cols.trim().parse()?,
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }

    if let Command::Validate = cli.command {
        let diagnostics = validate_config(&config);
        if diagnostics.is_empty() {
            println!("config ok (hash {})", config.hash());
            return Ok(());
        }
        for d in &diagnostics {
            eprintln!("error: {d}");
        }
        anyhow::bail!("{} config error(s)", diagnostics.len());
    }

    // Command-line overrides that live inside the config document.
    if let Command::Synth(args) = &cli.command {
        if let Some(letters) = &args.letters {
            config.benchmark.synth.letters = commands::parse_letters(letters)?;
        }
        if let Some(depths) = &args.depths {
            config.benchmark.synth.depths_mm = commands::parse_values(depths)?;
        }
        if let Some(trials) = args.trials {
            config.benchmark.synth.trials_per_condition = trials;
        }
    }

    let ws = Workspace::new(config, &cli.out)?;
    match cli.command {
        Command::Synth(args) => {
            commands::cmd_synth(&ws, args.dir.as_deref())?;
        }
        Command::Features {
            r#in,
            grid,
            window_ms,
            out_file,
        } => {
            commands::cmd_features(&ws, &r#in, parse_grid(&grid)?, window_ms, out_file.as_deref())?;
        }
        Command::Encode {
            features,
            cal,
            out_file,
        } => {
            commands::cmd_encode(&ws, &features, &cal, out_file.as_deref())?;
        }
        Command::Sim {
            model,
            model_seed,
            stim,
            organoid,
            window_ms,
            out_file,
            responses,
        } => {
            commands::cmd_sim(
                &ws,
                &model,
                model_seed,
                &stim,
                organoid,
                window_ms,
                out_file.as_deref(),
                responses.as_deref(),
            )?;
        }
        Command::Sweep {
            param,
            values,
            trials,
        } => {
            let values = values.as_deref().map(commands::parse_values).transpose()?;
            commands::cmd_sweep(&ws, param.into(), values, trials)?;
        }
        Command::Temporal {
            param,
            values,
            trials,
            bin_ms,
        } => {
            let values = values.as_deref().map(commands::parse_values).transpose()?;
            commands::cmd_temporal(&ws, param.into(), values, trials, bin_ms)?;
        }
        Command::Spatial {
            model,
            param,
            values,
            trials,
        } => {
            let values = values.as_deref().map(commands::parse_values).transpose()?;
            commands::cmd_spatial(&ws, model.as_deref(), param.into(), values, trials)?;
        }
        Command::Classify {
            responses,
            mode,
            clf,
            folds,
        } => {
            let mode = match mode {
                ModeArg::Single => ModeChoice::Single,
                ModeArg::Ensemble => ModeChoice::Ensemble,
            };
            let choice = match clf {
                ClfArg::Knn => ClassifierChoice::One(ClassifierKind::Knn),
                ClfArg::Svm => ClassifierChoice::One(ClassifierKind::Svm),
                ClfArg::Forest => ClassifierChoice::One(ClassifierKind::Forest),
                ClfArg::All => ClassifierChoice::All,
            };
            commands::cmd_classify(&ws, &responses, mode, choice, folds)?;
        }
        Command::Robustness {
            responses,
            noise,
            repeats,
        } => {
            let kinds = match noise {
                NoiseArg::Gaussian => Some(vec![NoiseKind::Gaussian]),
                NoiseArg::Uniform => Some(vec![NoiseKind::Uniform]),
                NoiseArg::Missing => Some(vec![NoiseKind::Missing]),
                NoiseArg::Outliers => Some(vec![NoiseKind::Outliers]),
                NoiseArg::All => None,
            };
            commands::cmd_robustness(&ws, &responses, kinds, repeats)?;
        }
        Command::Braille => {
            commands::cmd_braille(&ws)?;
        }
        Command::Validate => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
