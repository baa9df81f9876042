use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metriq::calibrate::{FitConfig, MIN_SAMPLES};
use metriq::corpus::Language;
use metriq::pipeline::{self, Adapter, RunConfig};
use metriq::{Error, Result};

#[derive(Parser)]
#[command(
    name = "metriq",
    version,
    about = "Metric-based repository quality scoring"
)]
struct Cli {
    /// JSON run configuration; falls back to $METRIQ_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Treat non-converged fits as errors.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert scanner output to a filtered canonical corpus.
    Ingest {
        #[arg(long, default_value = "canonical")]
        adapter: Adapter,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Canonical corpus to merge CK class means into.
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long)]
        column_map: Option<PathBuf>,
    },
    /// Fit per-metric distributions for one language.
    Fit {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        language: Option<Language>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train the quantile classifier and derive metric weights.
    TrainWeights {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output_weights: PathBuf,
        #[arg(long)]
        output_model: PathBuf,
    },
    /// Score every repository of the parameter set's language.
    Score {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Validation report and score histogram.
    Evaluate {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        outdir: Option<PathBuf>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Generate a synthetic canonical corpus.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

fn required<T>(flag: Option<T>, config: Option<T>, name: &str) -> Result<T> {
    flag.or(config)
        .ok_or_else(|| Error::Config(format!("--{name} is required (flag or config)")))
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if cli.strict {
        cfg.strict = Some(true);
    }
    cfg.validate()?;
    match cli.command {
        Command::Ingest {
            adapter,
            input,
            output,
            base,
            column_map,
        } => {
            let summary = pipeline::cmd_ingest(&pipeline::IngestOptions {
                adapter,
                input: &input,
                output: &output,
                base: base.as_deref(),
                column_map: column_map.as_deref(),
                filter_patterns: cfg.filter_patterns(),
            })?;
            log::info!(
                "kept {} repositories, dropped {}",
                summary.kept,
                summary.dropped.len()
            );
        }
        Command::Fit {
            corpus,
            language,
            output,
        } => {
            let corpus = required(corpus, cfg.corpus.clone(), "corpus")?;
            let language = required(language, cfg.language, "language")?;
            pipeline::cmd_fit(&pipeline::FitOptions {
                corpus: &corpus,
                language,
                output: &output,
                config: FitConfig {
                    min_samples: cfg.min_samples.unwrap_or(MIN_SAMPLES),
                    ..FitConfig::default()
                },
                strict: cfg.strict(),
            })?;
        }
        Command::TrainWeights {
            corpus,
            params,
            q,
            seed,
            output_weights,
            output_model,
        } => {
            let corpus = required(corpus, cfg.corpus.clone(), "corpus")?;
            let params = required(params, cfg.params.clone(), "params")?;
            if let Some(q) = q {
                cfg.q = Some(q);
            }
            if let Some(s) = seed {
                cfg.seed = Some(s);
            }
            cfg.validate()?;
            pipeline::cmd_train_weights(&pipeline::TrainOptions {
                corpus: &corpus,
                params: &params,
                q: cfg.q(),
                seed: cfg.seed(),
                gbm: cfg.gbm(),
                output_weights: &output_weights,
                output_model: &output_model,
            })?;
        }
        Command::Score {
            corpus,
            params,
            weights,
            output,
        } => {
            let corpus = required(corpus, cfg.corpus.clone(), "corpus")?;
            let params = required(params, cfg.params.clone(), "params")?;
            let weights = required(weights, cfg.weights.clone(), "weights")?;
            pipeline::cmd_score(&pipeline::ScoreOptions {
                corpus: &corpus,
                params: &params,
                weights: &weights,
                output: &output,
            })?;
        }
        Command::Evaluate {
            corpus,
            params,
            weights,
            seed,
            outdir,
            bins,
        } => {
            let corpus = required(corpus, cfg.corpus.clone(), "corpus")?;
            let params = required(params, cfg.params.clone(), "params")?;
            let weights = required(weights, cfg.weights.clone(), "weights")?;
            let outdir = required(outdir, cfg.output_dir.clone(), "outdir")?;
            if let Some(s) = seed {
                cfg.seed = Some(s);
            }
            if let Some(b) = bins {
                cfg.bins = Some(b);
            }
            cfg.validate()?;
            let report = pipeline::cmd_evaluate(&pipeline::EvaluateOptions {
                corpus: &corpus,
                params: &params,
                weights: &weights,
                seed: cfg.seed(),
                outdir: &outdir,
                bins: cfg.bins(),
                q: cfg.q(),
                gbm: cfg.gbm(),
            })?;
            // A closed stdout (e.g. piped into `head`) is not a failure; report.json is written.
            let _ = writeln!(
                std::io::stdout(),
                "{}",
                serde_json::to_string_pretty(&report)?
            );
        }
        Command::Synth { spec, output } => {
            let records = pipeline::cmd_synth(&spec, &output)?;
            log::info!("wrote {} synthetic repositories", records.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
