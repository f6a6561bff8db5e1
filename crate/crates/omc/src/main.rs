//! Thin command-line front end over the library. Each subcommand delegates
//! to the harness; the runnable demos under `examples/` are the richer
//! entry points.

use clap::{Args, Parser, Subcommand};
use omc::error::Error;
use omc::harness::config::{ConfigOverrides, ExperimentConfig};
use omc::harness::csvio::{
    self, parse_results_csv, records_csv, results_csv, samples_csv, weighted_csv,
};
use omc::harness::image_demo;
use omc::harness::oracle_cache::oracle_samples;
use omc::harness::runner::run_inference;
use omc::harness::svg;
use omc::harness::sweep::{run_benchmark_sweep, SweepSpec, SUCCESS_THRESHOLD};
use omc::simulators::make_problem;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "omc",
    about = "Optimization Monte Carlo for simulation-based inference",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonRunArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem id (mog_base, mog_base_dist, mog_two, mog_two_dist, slcp,
    /// slcp_dist, two_moons, img_pixel, img_checker).
    #[arg(long)]
    problem: Option<String>,
    /// Parameter dimension (Gaussian-location family only).
    #[arg(long)]
    dim: Option<usize>,
    /// Seed count S (the simulation budget).
    #[arg(long)]
    seeds: Option<usize>,
    /// Fraction of seeds to accept, per observation.
    #[arg(long)]
    pcg: Option<f64>,
    /// Region threshold: a number, or 'auto' for twice the worst accepted
    /// distance.
    #[arg(long)]
    epsilon: Option<String>,
    /// Proposal candidate count P.
    #[arg(long)]
    candidates: Option<usize>,
    /// Final posterior sample count M.
    #[arg(long = "final")]
    final_samples: Option<usize>,
    /// Repetitions (sweeps and reports).
    #[arg(long)]
    reps: Option<usize>,
    /// Master seed; fixes every random stream of the run.
    #[arg(long)]
    master_seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "omc-out")]
    out: PathBuf,
    /// Directory for cached oracle samples.
    #[arg(long)]
    oracle_cache: Option<PathBuf>,
}

impl CommonRunArgs {
    fn build_config(&self) -> Result<ExperimentConfig, Error> {
        let base = match (&self.config, &self.problem) {
            (Some(path), _) => ExperimentConfig::from_json_file(path)?,
            (None, Some(problem)) => {
                ExperimentConfig::for_problem(problem, self.dim.unwrap_or(2))?
            }
            (None, None) => {
                return Err(Error::Config("need --problem or --config".into()));
            }
        };
        let overrides = ConfigOverrides {
            problem: self.problem.clone(),
            dim: self.dim,
            seeds: self.seeds,
            pcg: self.pcg,
            epsilon: self.epsilon.clone(),
            candidates: self.candidates,
            final_samples: self.final_samples,
            reps: self.reps,
            master_seed: self.master_seed,
        };
        overrides.apply(base)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one inference and write samples, records, weights and the report.
    Infer(CommonRunArgs),
    /// Sweep dimensions and budgets, scoring each cell against the oracle.
    Sweep {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Comma-separated dimensions, e.g. 2,5,10.
        #[arg(long, default_value = "2")]
        dims: String,
        /// Comma-separated seed counts, e.g. 1000,5000.
        #[arg(long, default_value = "1000")]
        seeds_list: String,
    },
    /// Success-frontier plot from a results CSV.
    Frontier {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "frontier.svg")]
        out: PathBuf,
        #[arg(long, default_value_t = SUCCESS_THRESHOLD)]
        threshold: f64,
    },
    /// Score heatmap from a results CSV.
    Heatmap {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "heatmap.svg")]
        out: PathBuf,
    },
    /// Score-vs-runtime scatter from a results CSV.
    Scatter {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "scatter.svg")]
        out: PathBuf,
    },
    /// Generate (and cache) ground-truth posterior samples.
    Oracle {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 777)]
        seed: u64,
        #[arg(long, default_value = "oracle.csv")]
        out: PathBuf,
        #[arg(long)]
        oracle_cache: Option<PathBuf>,
    },
}

fn parse_list(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad list entry '{t}'")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Infer(common) => {
            let cfg = common.build_config()?;
            let problem = make_problem(&cfg.problem, cfg.dim)?;
            let out = run_inference(&problem, &cfg)?;
            std::fs::create_dir_all(&common.out)?;
            csvio::write_file(&common.out.join("samples.csv"), &samples_csv(&out.samples))?;
            csvio::write_file(&common.out.join("records.csv"), &records_csv(&out.records))?;
            csvio::write_file(&common.out.join("weighted.csv"), &weighted_csv(&out.weighted))?;
            csvio::write_file(&common.out.join("report.json"), &out.report.to_json())?;
            if cfg.dim <= 64 && !out.proposal.is_empty() {
                csvio::write_file(
                    &common.out.join("boxes.json"),
                    &omc::harness::runner::boxes_json(&out.proposal),
                )?;
            }
            if cfg.problem.starts_with("img_") {
                let demo = image_demo::image_demo(&problem, &cfg)?;
                image_demo::write_demo_images(&common.out, &cfg.problem, &demo)?;
                println!(
                    "posterior mean MAE vs oracle mean: {:.4}",
                    demo.mean_absolute_error
                );
            }
            println!(
                "{}: {} samples, ess {:.1}, epsilon {:.3e}, {:.2}s -> {}",
                cfg.problem,
                out.samples.len(),
                out.report.ess,
                out.epsilon,
                out.report.runtime_seconds,
                common.out.display()
            );
            Ok(())
        }
        Command::Sweep { common, dims, seeds_list } => {
            let cfg = common.build_config()?;
            let mut spec = SweepSpec::new(
                &cfg.problem,
                parse_list(&dims)?,
                parse_list(&seeds_list)?,
                cfg.repetitions,
            );
            spec.base_master_seed = cfg.master_seed;
            spec.oracle_cache = common.oracle_cache.clone();
            spec.comparison_samples = cfg.sampling.final_samples;
            let rows = run_benchmark_sweep(&spec)?;
            std::fs::create_dir_all(&common.out)?;
            let path = common.out.join("results.csv");
            csvio::write_file(&path, &results_csv(&rows))?;
            println!("{} rows -> {}", rows.len(), path.display());
            Ok(())
        }
        Command::Frontier { csv, out, threshold } => {
            let rows = parse_results_csv(&std::fs::read_to_string(csv)?)?;
            csvio::write_file(&out, &svg::frontier_svg(&rows, threshold))?;
            println!("frontier -> {}", out.display());
            Ok(())
        }
        Command::Heatmap { csv, out } => {
            let rows = parse_results_csv(&std::fs::read_to_string(csv)?)?;
            csvio::write_file(&out, &svg::heatmap_svg(&rows))?;
            println!("heatmap -> {}", out.display());
            Ok(())
        }
        Command::Scatter { csv, out } => {
            let rows = parse_results_csv(&std::fs::read_to_string(csv)?)?;
            csvio::write_file(&out, &svg::scatter_svg(&rows))?;
            println!("scatter -> {}", out.display());
            Ok(())
        }
        Command::Oracle { problem, dim, count, seed, out, oracle_cache } => {
            let p = make_problem(&problem, dim)?;
            let samples = oracle_samples(&p, dim, count, seed, oracle_cache.as_deref())?;
            csvio::write_file(&out, &samples_csv(&samples))?;
            println!("{count} oracle samples for {problem} -> {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ Error::Config(_)) => {
            eprintln!("configuration error: {err}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("inference failed: {err}");
            ExitCode::from(3)
        }
    }
}
