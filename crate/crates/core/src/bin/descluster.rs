use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use descluster::cli::{self, RunConfig};
use descluster::data::SyntheticSpec;

#[derive(Parser)]
#[command(name = "descluster", version, about = "Deep clustering with tag-based explanations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write checkpoint, labels, explanation and reports.
    Train(TrainArgs),
    /// Explain an existing clustering with tags.
    Explain {
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long)]
        tags: PathBuf,
        #[arg(long, default_value_t = 8.0)]
        alpha: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Compute NMI/ACC and/or TC/ITF for a clustering.
    Evaluate {
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        explanation: Option<PathBuf>,
        #[arg(long)]
        tags: Option<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Write the cluster ontology of an explanation as a DOT graph.
    Ontology {
        #[arg(long)]
        explanation: PathBuf,
        #[arg(long, default_value_t = 3)]
        q: usize,
        #[arg(long, short)]
        output: PathBuf,
        /// With --classes, names clusters after their majority class.
        #[arg(long, requires = "classes")]
        assignments: Option<PathBuf>,
        #[arg(long, requires = "assignments")]
        classes: Option<PathBuf>,
    },
    /// Generate a synthetic Gaussian-blob dataset with tags.
    Synth(SynthArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Override any config key, e.g. `--set train.alpha=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    tags: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, short)]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 200)]
    n_per_cluster: usize,
    #[arg(long, default_value_t = 10)]
    d: usize,
    #[arg(long, default_value_t = 12)]
    m: usize,
    #[arg(long, default_value_t = 8)]
    informative: usize,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn train_config(args: &TrainArgs) -> descluster::Result<RunConfig> {
    let mut config = cli::load_run_config(&args.config, &args.overrides)?;
    if let Some(p) = &args.features {
        config.features_path = p.clone();
    }
    if let Some(p) = &args.tags {
        config.tags_path = p.clone();
    }
    if let Some(p) = &args.labels {
        config.labels_path = Some(p.clone());
    }
    if let Some(p) = &args.output_dir {
        config.output_dir = p.clone();
    }
    if let Some(s) = args.seed {
        config.train.seed = s;
    }
    if let Some(k) = args.k {
        config.train.k = k;
    }
    if let Some(a) = args.alpha {
        config.train.alpha = a;
    }
    Ok(config)
}

fn run(command: Command) -> descluster::Result<()> {
    match command {
        Command::Train(args) => {
            let artifacts = cli::cmd_train(&train_config(&args)?)?;
            eprintln!("wrote {}", artifacts.assignments.display());
        }
        Command::Explain { assignments, tags, alpha, output } => {
            let report = cli::cmd_explain(&assignments, &tags, alpha, &output)?;
            eprintln!("beta* = {}, {} tags selected", report.beta_star, report.objective);
        }
        Command::Evaluate { assignments, truth, explanation, tags, output } => {
            cli::cmd_evaluate(
                &assignments,
                truth.as_deref(),
                explanation.as_deref(),
                tags.as_deref(),
                &output,
            )?;
        }
        Command::Ontology { explanation, q, output, assignments, classes } => {
            let graph =
                cli::cmd_ontology(&explanation, q, &output, assignments.as_deref(), classes.as_deref())?;
            eprintln!("{} clusters, {} edges", graph.nodes.len(), graph.edges.len());
        }
        Command::Synth(a) => {
            let spec = SyntheticSpec {
                k_true: a.k,
                n_per_cluster: a.n_per_cluster,
                d: a.d,
                m: a.m,
                informative_tags: a.informative,
                tag_flip_noise: a.noise,
                cluster_spread: a.spread,
                annotation_ratio: a.ratio,
                seed: a.seed,
            };
            cli::cmd_synth(&spec, &a.output_dir)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
