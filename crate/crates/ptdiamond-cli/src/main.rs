//! `ptdiamond` — command-line driver for the diamond-chain simulator.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure,
//! 4 blow-up detected (partial outputs are still written).

mod config;
mod error;
mod output;
mod scenarios;

use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;

use ptdiamond::{ClsSpec, ModelParams, DEFAULT_IM_TOLERANCE, DEFAULT_SEPARATION_TOLERANCE};

use crate::config::{
    load_run_config, load_sweep_config, parse_cls_variant, parse_phi, InitialSection,
    DEFAULT_HEATMAP_LIMIT, DEFAULT_N_K, DEFAULT_N_MAX, DEFAULT_N_MIN,
};
use crate::error::{
    AppError, Result, EXIT_BLOWUP, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION,
};
use crate::scenarios::{run_job, scenario, Job, JobKind, Outcome, SCENARIO_NAMES};

#[derive(Parser)]
#[command(
    name = "ptdiamond",
    version,
    about = "Simulator for a PT-symmetric diamond-chain waveguide lattice",
    long_about = "Band structure, compact localized states, and beam propagation for a \
                  gain/loss diamond chain under synthetic electric and magnetic fields."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the Bloch bands over the Brillouin zone and write a CSV.
    Bands(BandsArgs),
    /// Classify the band structure: flat band, gapless or gapped.
    Gap(GapArgs),
    /// Build a compact localized state and report its null-mode residual.
    ClsCheck(ClsCheckArgs),
    /// Propagate an initial state; writes heatmap, diagnostics, and the
    /// final state.
    Evolve(EvolveArgs),
    /// Dense eigenvalue census of the finite (optionally tilted) chain.
    Spectrum(SpectrumArgs),
    /// Run a named preset (see `scenario --help` for the list).
    Scenario(ScenarioArgs),
    /// Run several presets from a TOML config, fanned out over threads.
    Sweep(SweepArgs),
}

/// Model parameters shared by the analysis subcommands.
#[derive(Args)]
struct ModelArgs {
    /// Gain/loss rate on the legs.
    #[arg(long)]
    gamma: f64,
    /// Longitudinal field (on-site gradient along the chain).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    e_par: f64,
    /// Transverse field (offset between the two legs).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    e_perp: f64,
    /// Flux phase per plaquette; a number or pi, -pi, 2pi, pi/2, pi/3, pi/4.
    #[arg(long, value_parser = parse_phi, allow_hyphen_values = true)]
    phi: f64,
    /// First unit cell.
    #[arg(long, default_value_t = DEFAULT_N_MIN, allow_negative_numbers = true)]
    n_min: i64,
    /// Last unit cell.
    #[arg(long, default_value_t = DEFAULT_N_MAX, allow_negative_numbers = true)]
    n_max: i64,
}

impl ModelArgs {
    fn to_params(&self) -> Result<ModelParams> {
        Ok(ModelParams::new(
            self.gamma, self.e_par, self.e_perp, self.phi, self.n_min, self.n_max,
        )?)
    }
}

/// Output location shared by all subcommands.
#[derive(Args)]
struct OutArgs {
    /// Directory for the artifacts (created if missing).
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Filename stem for the artifacts.
    #[arg(long)]
    tag: Option<String>,
}

impl OutArgs {
    fn tag_or(&self, default: &str) -> String {
        self.tag.clone().unwrap_or_else(|| default.to_string())
    }
}

#[derive(Args)]
struct BandsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of quasimomentum samples across [-pi, pi].
    #[arg(long, default_value_t = DEFAULT_N_K)]
    n_k: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GapArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of quasimomentum samples for the coarse scan.
    #[arg(long, default_value_t = DEFAULT_N_K)]
    n_k: usize,
    /// Bands closer than this (after refinement) count as touching.
    #[arg(long, default_value_t = DEFAULT_SEPARATION_TOLERANCE)]
    separation_tolerance: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ClsCheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Which null mode: phi0, phi-pi, phi0-eperp, phi-pi-eperp.
    #[arg(long, value_parser = parse_cls_variant)]
    variant: ptdiamond::ClsVariant,
    /// Left cell of the two-cell support.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    anchor: i64,
    /// Real part of the leg amplitude scale.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    a0_re: f64,
    /// Imaginary part of the leg amplitude scale.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a0_im: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Eigenvalues with |Im| above this count as complex.
    #[arg(long, default_value_t = DEFAULT_IM_TOLERANCE)]
    im_tolerance: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct EvolveArgs {
    /// TOML run configuration; exclusive with the individual flags below.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    #[arg(long, conflicts_with = "config")]
    gamma: Option<f64>,
    #[arg(long, conflicts_with = "config", allow_negative_numbers = true)]
    e_par: Option<f64>,
    #[arg(long, conflicts_with = "config", allow_negative_numbers = true)]
    e_perp: Option<f64>,
    /// Flux phase; a number or pi, -pi, 2pi, pi/2, pi/3, pi/4.
    #[arg(long, conflicts_with = "config", value_parser = parse_phi, allow_hyphen_values = true)]
    phi: Option<f64>,
    #[arg(long, conflicts_with = "config", allow_negative_numbers = true)]
    n_min: Option<i64>,
    #[arg(long, conflicts_with = "config", allow_negative_numbers = true)]
    n_max: Option<i64>,

    /// Initial state kind: cls, gaussian, or custom.
    #[arg(long, conflicts_with = "config")]
    initial: Option<String>,
    /// CLS variant (kind = cls).
    #[arg(long, conflicts_with = "config")]
    variant: Option<String>,
    /// Left support cell (kind = cls).
    #[arg(long, conflicts_with = "config", allow_negative_numbers = true)]
    anchor: Option<i64>,
    /// Re of the CLS amplitude scale (kind = cls).
    #[arg(long, conflicts_with = "config", allow_negative_numbers = true)]
    a0_re: Option<f64>,
    /// Im of the CLS amplitude scale (kind = cls).
    #[arg(long, conflicts_with = "config", allow_negative_numbers = true)]
    a0_im: Option<f64>,
    /// Gaussian width in cells (kind = gaussian).
    #[arg(long, conflicts_with = "config")]
    sigma: Option<f64>,
    /// Gaussian center cell (kind = gaussian).
    #[arg(long, conflicts_with = "config", allow_negative_numbers = true)]
    center: Option<f64>,
    /// State file written by a previous run (kind = custom).
    #[arg(long, conflicts_with = "config", value_name = "FILE")]
    state_file: Option<PathBuf>,

    /// Propagation distance.
    #[arg(long, conflicts_with = "config")]
    z_end: Option<f64>,
    /// Integration step.
    #[arg(long, conflicts_with = "config")]
    dz: Option<f64>,
    /// Record a snapshot every this many steps.
    #[arg(long, conflicts_with = "config")]
    sample_every: Option<usize>,
    /// Stop early once any amplitude modulus reaches this cap.
    #[arg(long, conflicts_with = "config")]
    overflow_cap: Option<f64>,
    /// At most this many z rows in the heatmap CSV.
    #[arg(long, conflicts_with = "config")]
    heatmap_limit: Option<usize>,

    #[arg(long, conflicts_with = "config", default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, conflicts_with = "config")]
    tag: Option<String>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// One of: fig2_bands, fig2c_cls, fig3a, fig3b, fig3c, fig3d, fig4,
    /// fig5cd, fig5ef, fig6, fig7a, fig7b, fig7cd.
    name: String,
    /// Directory for the artifacts (created if missing).
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with a [sweep] section: scenarios, out_dir, threads.
    config: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Bands(args) => {
            let job = Job {
                tag: args.out.tag_or("bands"),
                scenario: None,
                kind: JobKind::Bands { params: args.model.to_params()?, n_k: args.n_k },
            };
            run_and_report(vec![job], &args.out.out_dir)
        }
        Command::Gap(args) => {
            let job = Job {
                tag: args.out.tag_or("gap"),
                scenario: None,
                kind: JobKind::Gap {
                    params: args.model.to_params()?,
                    n_k: args.n_k,
                    separation_tolerance: args.separation_tolerance,
                },
            };
            run_and_report(vec![job], &args.out.out_dir)
        }
        Command::ClsCheck(args) => {
            let job = Job {
                tag: args.out.tag_or("cls"),
                scenario: None,
                kind: JobKind::ClsCheck {
                    params: args.model.to_params()?,
                    spec: ClsSpec {
                        variant: args.variant,
                        a0: C64::new(args.a0_re, args.a0_im),
                        anchor: args.anchor,
                    },
                },
            };
            run_and_report(vec![job], &args.out.out_dir)
        }
        Command::Spectrum(args) => {
            let job = Job {
                tag: args.out.tag_or("spectrum"),
                scenario: None,
                kind: JobKind::Spectrum {
                    params: args.model.to_params()?,
                    im_tolerance: args.im_tolerance,
                },
            };
            run_and_report(vec![job], &args.out.out_dir)
        }
        Command::Evolve(args) => run_evolve_command(args),
        Command::Scenario(args) => {
            let jobs = scenario(&args.name).ok_or_else(|| unknown_scenario(&args.name))?;
            run_and_report(jobs, &args.out_dir)
        }
        Command::Sweep(args) => run_sweep_command(args),
    }
}

fn unknown_scenario(name: &str) -> AppError {
    AppError::Validation(format!(
        "unknown scenario {name:?}; available: {}",
        SCENARIO_NAMES.join(", ")
    ))
}

fn run_evolve_command(args: EvolveArgs) -> Result<i32> {
    let (params, initial, evolve, heatmap_limit, out_dir, tag) = match &args.config {
        Some(path) => {
            let cfg = load_run_config(path)?;
            let params = cfg.model.to_params()?;
            let initial = cfg.initial.resolve()?;
            (
                params,
                initial,
                cfg.evolve.to_config(),
                cfg.evolve.heatmap_limit,
                cfg.output.dir,
                cfg.output.tag,
            )
        }
        None => {
            let gamma = args
                .gamma
                .ok_or_else(|| AppError::validation("either --config or --gamma is required"))?;
            let phi = args
                .phi
                .ok_or_else(|| AppError::validation("either --config or --phi is required"))?;
            let kind = args
                .initial
                .clone()
                .ok_or_else(|| AppError::validation("either --config or --initial is required"))?;
            let params = ModelParams::new(
                gamma,
                args.e_par.unwrap_or(0.0),
                args.e_perp.unwrap_or(0.0),
                phi,
                args.n_min.unwrap_or(DEFAULT_N_MIN),
                args.n_max.unwrap_or(DEFAULT_N_MAX),
            )?;
            // Reuse the config-file resolution so flag and file runs are
            // validated identically.
            let section = InitialSection {
                kind,
                variant: args.variant.clone(),
                anchor: args.anchor,
                a0_re: args.a0_re,
                a0_im: args.a0_im,
                sigma: args.sigma,
                center: args.center,
                path: args.state_file.clone(),
            };
            let initial = section.resolve()?;
            let mut evolve = ptdiamond::EvolveConfig::new(args.z_end.unwrap_or(500.0));
            if let Some(dz) = args.dz {
                evolve.dz = dz;
            }
            if let Some(every) = args.sample_every {
                evolve.sample_every = every;
            }
            if let Some(cap) = args.overflow_cap {
                evolve.overflow_cap = cap;
            }
            (
                params,
                initial,
                evolve,
                args.heatmap_limit.unwrap_or(DEFAULT_HEATMAP_LIMIT),
                args.out_dir.clone(),
                args.tag.clone().unwrap_or_else(|| "evolve".to_string()),
            )
        }
    };

    let job = Job {
        tag,
        scenario: None,
        kind: JobKind::Evolve { params, initial, evolve, heatmap_limit },
    };
    run_and_report(vec![job], &out_dir)
}

fn run_sweep_command(args: SweepArgs) -> Result<i32> {
    let cfg = load_sweep_config(&args.config)?;
    let mut jobs: Vec<Job> = Vec::new();
    for name in &cfg.sweep.scenarios {
        jobs.extend(scenario(name).ok_or_else(|| unknown_scenario(name))?);
    }
    let threads = cfg
        .sweep
        .threads
        .unwrap_or_else(|| jobs.len().min(4))
        .min(jobs.len())
        .max(1);

    let out_dir = cfg.sweep.out_dir;
    let queue: Mutex<VecDeque<Job>> = Mutex::new(jobs.into());
    let results: Mutex<Vec<(String, Result<(Outcome, String)>)>> = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let job = queue.lock().unwrap().pop_front();
                let Some(job) = job else { break };
                let outcome = run_job(&job, &out_dir);
                results.lock().unwrap().push((job.tag, outcome));
            });
        }
    });

    let mut results = results.into_inner().unwrap();
    // Threads finish in arbitrary order; sort so the report (and the exit
    // code derivation) reads deterministically.
    results.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(report_and_aggregate(results))
}

/// Runs jobs sequentially, printing one summary line per job.
fn run_and_report(jobs: Vec<Job>, out_dir: &std::path::Path) -> Result<i32> {
    let results: Vec<(String, Result<(Outcome, String)>)> = jobs
        .into_iter()
        .map(|job| {
            let outcome = run_job(&job, out_dir);
            (job.tag, outcome)
        })
        .collect();
    Ok(report_and_aggregate(results))
}

/// Prints per-job summaries and folds the outcomes into an exit code.
///
/// Numerical failures dominate validation errors, which dominate
/// blow-ups: a blow-up still produced trustworthy (partial) artifacts,
/// the other two did not.
fn report_and_aggregate(results: Vec<(String, Result<(Outcome, String)>)>) -> i32 {
    let mut any_validation = false;
    let mut any_numerical = false;
    let mut any_blowup = false;
    for (tag, result) in &results {
        match result {
            Ok((Outcome::Completed, note)) => println!("{tag}: {note}"),
            Ok((Outcome::BlewUp { .. }, note)) => {
                println!("{tag}: {note}");
                any_blowup = true;
            }
            Err(e) => {
                eprintln!("{tag}: error: {e}");
                match e {
                    AppError::Validation(_) => any_validation = true,
                    AppError::Runtime(_) => any_numerical = true,
                }
            }
        }
    }
    if any_numerical {
        EXIT_NUMERICAL
    } else if any_validation {
        EXIT_VALIDATION
    } else if any_blowup {
        EXIT_BLOWUP
    } else {
        EXIT_OK
    }
}
