mod axis;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use log::{info, warn};

use vrsomp_core::dictionary::{load_or_build, CacheStatus, DictionaryKey};
use vrsomp_core::harness::{emit_csv, emit_plot, sweep_with_context, ScenarioConfig, TrialContext, CONFIG_KEYS};
use vrsomp_core::rng::trial_seed;
use vrsomp_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "vrsomp", version, about = "Near-field ELAA channel estimation simulator")]
struct Cli {
    /// Increase log detail (-v info, -vv debug and mask dumps).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Config file (flat `key = value`); defaults apply to missing keys.
    #[arg(short, long, env = "VRSOMP_CONFIG")]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set n_iter=10`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Override `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo NMSE sweep over SNR or L.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Axis and values: `snr=-10:5:10`, `L=2,4,6` or `snr=0`. Defaults to the config's axis.
        #[arg(long, allow_hyphen_values = true)]
        axis: Option<String>,
        /// CSV output path.
        #[arg(short, long)]
        out: PathBuf,
        /// Optional SVG plot path.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Worker threads (results do not depend on this).
        #[arg(short, long, default_value_t = default_workers())]
        workers: usize,
        /// Load (or create) the polar dictionary from this cache file.
        #[arg(long)]
        dict_cache: Option<PathBuf>,
    },
    /// Run one trial and print each estimator's NMSE.
    Trial {
        #[command(flatten)]
        config: ConfigArgs,
        /// Trial index; the trial seed is derived from `master_seed` and this index.
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[arg(long)]
        dict_cache: Option<PathBuf>,
    },
    /// Build the polar dictionary and write it to a cache file.
    DictCache {
        #[command(flatten)]
        config: ConfigArgs,
        /// Cache file path.
        #[arg(short, long, default_value = "polar_dictionary.vrpd")]
        path: PathBuf,
        /// Rebuild even when a matching cache exists.
        #[arg(long)]
        force: bool,
    },
    /// Print the resolved configuration.
    ShowConfig {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn keys_help() -> String {
    let width = CONFIG_KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::from("Config keys:\n");
    for (key, desc) in CONFIG_KEYS {
        s.push_str(&format!("  {key:<width$}  {desc}\n"));
    }
    s.push_str("\nExit codes: 0 ok, 2 configuration error, 3 I/O error.");
    s
}

/// Error with its exit code already decided.
struct Failure {
    code: u8,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Io { .. } => EXIT_IO,
            _ => EXIT_CONFIG,
        };
        Failure { code, error }
    }
}

fn config_failure(error: Error) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        error,
    }
}

fn resolve(args: &ConfigArgs) -> Result<ScenarioConfig, Failure> {
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("master_seed={seed}"));
    }
    // An unreadable config file is a configuration problem, not an output one.
    ScenarioConfig::load_with_overrides(args.config.as_deref(), &overrides).map_err(config_failure)
}

fn context(cfg: &ScenarioConfig, cache: Option<&Path>) -> Result<TrialContext, Failure> {
    match cache {
        None => Ok(TrialContext::new(cfg)?),
        Some(path) => {
            let (dict, status) = load_or_build(path, &DictionaryKey::from_config(cfg), false)?;
            info!("dictionary cache {}: {status:?}", path.display());
            Ok(TrialContext::with_dictionary(cfg, Arc::new(dict))?)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep {
            config,
            axis,
            out,
            plot,
            workers,
            dict_cache,
        } => {
            let cfg = resolve(&config)?;
            let (axis, values) = match axis {
                Some(spec) => axis::parse_axis(&spec)?,
                None => (cfg.axis, cfg.axis_values.clone()),
            };
            let ctx = context(&cfg, dict_cache.as_deref())?;
            let started = Instant::now();
            let result = sweep_with_context(&ctx, &cfg, axis, &values, workers)?;
            info!("sweep finished in {:.1} s", started.elapsed().as_secs_f64());
            emit_csv(&result, &out)?;
            if let Some(plot) = plot {
                emit_plot(&result, &plot)?;
            }
            println!(
                "{:>8}  {:<16} {:>10} {:>9} {:>11} {:>7} {:>8}",
                axis.name(),
                "estimator",
                "nmse_db",
                "stderr",
                "mean_of_db",
                "trials",
                "failures"
            );
            for (j, value) in result.axis_values.iter().enumerate() {
                for s in &result.points[j] {
                    println!(
                        "{value:>8}  {:<16} {:>10.3} {:>9.3} {:>11.3} {:>7} {:>8}",
                        s.estimator, s.nmse_db, s.stderr_db, s.mean_of_db, s.n_trials, s.failures
                    );
                }
            }
        }
        Command::Trial {
            config,
            index,
            dict_cache,
        } => {
            let cfg = resolve(&config)?;
            let ctx = context(&cfg, dict_cache.as_deref())?;
            let seed = trial_seed(cfg.master_seed, 0, index);
            let detail = ctx.run_detailed(&cfg, seed)?;
            for o in &detail.outcomes {
                match &o.nmse_db {
                    Ok(v) => println!("{:<16} {v:.6}", o.kind.to_string()),
                    Err(msg) => println!("{:<16} failed: {msg}", o.kind.to_string()),
                }
            }
            if cli.verbose >= 2 {
                let geom = &detail.scenario.geometry;
                let paths = &detail.scenario.paths;
                // Central subcarrier mask, thresholded at half amplitude.
                let m = paths.n_subcarriers() / 2;
                for l in 0..paths.paths().len() {
                    let mask = paths.mask(l, m, geom)?;
                    let p = &paths.paths()[l];
                    println!(
                        "true path {l} theta={:.4} r={:.2} |g|={:.3} {:?}: {}",
                        p.angle,
                        p.distance,
                        p.gain.norm(),
                        p.mask.case(),
                        bits(mask.iter().map(|&v| v >= 0.5))
                    );
                }
                for o in &detail.outcomes {
                    let Some(report) = &o.report else { continue };
                    for (i, mask) in report.vr_masks.iter().enumerate() {
                        let atom = report
                            .support
                            .indices
                            .get(i)
                            .map(|j| j.to_string())
                            .unwrap_or_else(|| "-".into());
                        println!("{} atom {atom}: {}", o.kind, bits(mask.iter().copied()));
                    }
                    for e in &report.events {
                        println!("{} event: {e}", o.kind);
                    }
                }
            }
        }
        Command::DictCache { config, path, force } => {
            let cfg = resolve(&config)?;
            let key = DictionaryKey::from_config(&cfg);
            let started = Instant::now();
            let (dict, status) = load_or_build(&path, &key, force)?;
            let secs = started.elapsed().as_secs_f64();
            match &status {
                CacheStatus::Hit => println!("cache {} is up to date", path.display()),
                CacheStatus::Built => println!("wrote {}", path.display()),
                CacheStatus::Rebuilt(reason) => {
                    warn!("rebuilt {}: {reason}", path.display());
                    println!("rebuilt {} ({reason})", path.display());
                }
            }
            println!("S = {}", dict.len());
            println!("build time {secs:.3} s");
        }
        Command::ShowConfig { config } => {
            print!("{}", resolve(&config)?.to_toml_string());
        }
    }
    Ok(())
}

fn bits(it: impl Iterator<Item = bool>) -> String {
    it.map(|b| if b { '1' } else { '0' }).collect()
}

fn main() -> ExitCode {
    let help = keys_help();
    let matches = Cli::command()
        .after_help(help.clone())
        .mut_subcommands(|sub| sub.after_help(help.clone()))
        .get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error}");
            ExitCode::from(code)
        }
    }
}
