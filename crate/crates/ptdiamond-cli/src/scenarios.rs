//! Named preset runs and the shared job runner.
//!
//! Every CLI entry point — direct subcommands, `scenario`, and `sweep` —
//! reduces to a list of [`Job`]s handed to [`run_job`]. A job writes its
//! artifacts (CSV/JSON plus a `.meta.json` sidecar for each) into the
//! output directory under `<tag>.<kind>.<ext>` names.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde_json::json;

use ptdiamond::{
    band_sweep, build_cls, classify_gaps, cls_residual, evolve_observed, finite_spectrum,
    oscillation_metrics, series, ClsSpec, ClsVariant, EvolveConfig, ModelParams, Trajectory,
    TrajectoryStatus, DEFAULT_BOUND_FACTOR, DEFAULT_IM_TOLERANCE,
};

use crate::config::{cls_variant_name, InitialSpec, DEFAULT_HEATMAP_LIMIT, DEFAULT_N_K};
use crate::error::Result;
use crate::output;

/// All preset names, in the order they are listed by `--help`.
pub const SCENARIO_NAMES: [&str; 13] = [
    "fig2_bands",
    "fig2c_cls",
    "fig3a",
    "fig3b",
    "fig3c",
    "fig3d",
    "fig4",
    "fig5cd",
    "fig5ef",
    "fig6",
    "fig7a",
    "fig7b",
    "fig7cd",
];

/// One unit of work with a filename stem (`tag`) for its artifacts.
#[derive(Debug, Clone)]
pub struct Job {
    pub tag: String,
    /// Preset this job came from, if any (stamped into the metadata).
    pub scenario: Option<&'static str>,
    pub kind: JobKind,
}

#[derive(Debug, Clone)]
pub enum JobKind {
    Bands {
        params: ModelParams,
        n_k: usize,
    },
    Gap {
        params: ModelParams,
        n_k: usize,
        separation_tolerance: f64,
    },
    ClsCheck {
        params: ModelParams,
        spec: ClsSpec,
    },
    Evolve {
        params: ModelParams,
        initial: InitialSpec,
        evolve: EvolveConfig,
        heatmap_limit: usize,
    },
    Spectrum {
        params: ModelParams,
        im_tolerance: f64,
    },
}

/// How a job ended. Hard failures are reported through `Err` instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed,
    /// The propagation hit the overflow cap; artifacts cover `z <= z_stop`.
    BlewUp { z_stop: f64 },
}

/// Runs one job, writing all of its artifacts into `dir`.
///
/// Returns the outcome plus a one-line human summary for stdout.
pub fn run_job(job: &Job, dir: &Path) -> Result<(Outcome, String)> {
    match &job.kind {
        JobKind::Bands { params, n_k } => run_bands(job, dir, params, *n_k),
        JobKind::Gap { params, n_k, separation_tolerance } => {
            run_gap(job, dir, params, *n_k, *separation_tolerance)
        }
        JobKind::ClsCheck { params, spec } => run_cls_check(job, dir, params, spec),
        JobKind::Evolve { params, initial, evolve, heatmap_limit } => {
            run_evolve(job, dir, params, initial, evolve, *heatmap_limit)
        }
        JobKind::Spectrum { params, im_tolerance } => {
            run_spectrum(job, dir, params, *im_tolerance)
        }
    }
}

fn stamp_scenario(meta: &mut serde_json::Value, job: &Job) {
    meta["tag"] = json!(job.tag);
    if let Some(name) = job.scenario {
        meta["scenario"] = json!(name);
    }
}

fn run_bands(job: &Job, dir: &Path, params: &ModelParams, n_k: usize) -> Result<(Outcome, String)> {
    let sweep = band_sweep(params, n_k)?;
    let path = output::prepare_path(dir, &format!("{}.bands.csv", job.tag))?;
    output::write_bands_csv(&path, &sweep)?;
    let mut meta = output::base_meta("bands", &output::BANDS_COLUMNS, params);
    meta["n_k"] = json!(n_k);
    meta["bands_are_tracked"] = json!(true);
    stamp_scenario(&mut meta, job);
    output::write_meta(&path, &meta)?;
    Ok((Outcome::Completed, format!("{n_k} k-points, 3 tracked bands")))
}

fn run_gap(
    job: &Job,
    dir: &Path,
    params: &ModelParams,
    n_k: usize,
    separation_tolerance: f64,
) -> Result<(Outcome, String)> {
    let sweep = band_sweep(params, n_k)?;
    let report = classify_gaps(&sweep, separation_tolerance)?;
    let path = output::prepare_path(dir, &format!("{}.gap.json", job.tag))?;
    output::write_gap_json(&path, &report, separation_tolerance)?;
    let mut meta = output::base_meta("gap", &[], params);
    meta["n_k"] = json!(n_k);
    meta["separation_tolerance"] = json!(separation_tolerance);
    stamp_scenario(&mut meta, job);
    output::write_meta(&path, &meta)?;
    let note = format!(
        "flat band: {}, gapless: {}, min separation {:.3e}",
        report.has_flat_band, report.is_gapless, report.min_separation
    );
    Ok((Outcome::Completed, note))
}

fn run_cls_check(job: &Job, dir: &Path, params: &ModelParams, spec: &ClsSpec) -> Result<(Outcome, String)> {
    let state = build_cls(spec, params)?;
    let residual = cls_residual(&state, params)?;
    let path = output::prepare_path(dir, &format!("{}.cls.json", job.tag))?;
    output::write_cls_json(&path, residual, state.total_power())?;
    let mut meta = output::base_meta("cls", &[], params);
    meta["initial"] = json!({
        "kind": "cls",
        "variant": cls_variant_name(spec.variant),
        "anchor": spec.anchor,
        "a0": { "re": spec.a0.re, "im": spec.a0.im },
    });
    stamp_scenario(&mut meta, job);
    output::write_meta(&path, &meta)?;
    Ok((Outcome::Completed, format!("null-mode residual {residual:.3e}")))
}

fn run_evolve(
    job: &Job,
    dir: &Path,
    params: &ModelParams,
    initial: &InitialSpec,
    evolve: &EvolveConfig,
    heatmap_limit: usize,
) -> Result<(Outcome, String)> {
    let state0 = initial.build(params)?;
    let z0 = state0.z();

    // Collect samples; a coarse step counter goes to stderr only, so
    // stdout stays clean and files stay deterministic.
    let steps_total = (evolve.z_end / evolve.dz).round();
    let mut samples: Vec<ptdiamond::LatticeState> = Vec::new();
    let mut next_report = z0 + 0.1 * evolve.z_end;
    let (status, meta) = evolve_observed(&state0, params, evolve, |s| {
        if s.z() >= next_report {
            let step = ((s.z() - z0) / evolve.dz).round();
            eprintln!("[{}] step {step:.0}/{steps_total:.0}, z = {:.1}", job.tag, s.z() - z0);
            next_report += 0.1 * evolve.z_end;
        }
        samples.push(s.clone());
    })?;
    if let TrajectoryStatus::BlewUp { z_stop } = status {
        eprintln!("[{}] overflow cap reached at z = {:.3}", job.tag, z_stop - z0);
    }
    let trajectory = Trajectory { samples, status, meta };

    let excited = initial.excited_sites();
    let diag = series(&trajectory, params, &excited)?;
    let osc = oscillation_metrics(&diag, DEFAULT_BOUND_FACTOR)?;

    let integrator = output::integrator_meta(&trajectory.meta, &trajectory.status);
    let evolve_json = json!({
        "z_end": evolve.z_end,
        "dz": evolve.dz,
        "sample_every": evolve.sample_every,
        "overflow_cap": evolve.overflow_cap,
    });

    let heatmap = output::prepare_path(dir, &format!("{}.heatmap.csv", job.tag))?;
    output::write_heatmap_csv(&heatmap, &trajectory, params, heatmap_limit)?;
    let mut meta = output::base_meta("heatmap", &output::HEATMAP_COLUMNS, params);
    meta["initial"] = initial.describe();
    meta["evolve"] = evolve_json.clone();
    meta["integrator"] = integrator.clone();
    meta["heatmap_limit"] = json!(heatmap_limit);
    stamp_scenario(&mut meta, job);
    output::write_meta(&heatmap, &meta)?;

    let diagnostics = output::prepare_path(dir, &format!("{}.diagnostics.csv", job.tag))?;
    output::write_diagnostics_csv(&diagnostics, &diag)?;
    let mut meta = output::base_meta("diagnostics", &output::DIAGNOSTICS_COLUMNS, params);
    meta["initial"] = initial.describe();
    meta["evolve"] = evolve_json.clone();
    meta["integrator"] = integrator.clone();
    meta["excited_sites"] = json!(excited.len());
    meta["oscillation"] = json!({
        "period_z": osc.period_z,
        "amplitude": osc.amplitude,
        "is_bounded": osc.is_bounded,
        "bound_factor": DEFAULT_BOUND_FACTOR,
    });
    stamp_scenario(&mut meta, job);
    output::write_meta(&diagnostics, &meta)?;

    let final_state = output::prepare_path(dir, &format!("{}.final_state.csv", job.tag))?;
    output::write_state_csv(&final_state, trajectory.last(), params)?;
    let mut meta = output::base_meta("final_state", &output::STATE_COLUMNS, params);
    meta["initial"] = initial.describe();
    meta["evolve"] = evolve_json;
    meta["integrator"] = integrator;
    stamp_scenario(&mut meta, job);
    output::write_meta(&final_state, &meta)?;

    match trajectory.status {
        TrajectoryStatus::Completed => {
            let note = format!(
                "completed to z = {}, final power {:.6e}",
                trajectory.last().z(),
                diag.total_power.last().copied().unwrap_or(0.0)
            );
            Ok((Outcome::Completed, note))
        }
        TrajectoryStatus::BlewUp { z_stop } => {
            let note = format!("overflow cap reached at z = {z_stop:.3}; partial outputs written");
            Ok((Outcome::BlewUp { z_stop }, note))
        }
    }
}

fn run_spectrum(
    job: &Job,
    dir: &Path,
    params: &ModelParams,
    im_tolerance: f64,
) -> Result<(Outcome, String)> {
    let report = finite_spectrum(params, im_tolerance)?;
    let path = output::prepare_path(dir, &format!("{}.spectrum.csv", job.tag))?;
    output::write_spectrum_csv(&path, &report)?;
    let mut meta = output::base_meta("spectrum", &output::SPECTRUM_COLUMNS, params);
    meta["n_eigenvalues"] = json!(report.eigenvalues.len());
    meta["im_tolerance"] = json!(report.im_tolerance);
    meta["complex_count"] = json!(report.complex_count);
    meta["complex_indices"] = json!(report.complex_indices);
    stamp_scenario(&mut meta, job);
    output::write_meta(&path, &meta)?;
    let note = format!(
        "{} eigenvalues, {} complex beyond tolerance",
        report.eigenvalues.len(),
        report.complex_count
    );
    Ok((Outcome::Completed, note))
}

// ---------------------------------------------------------------------
// Preset definitions.
// ---------------------------------------------------------------------

/// The weak gain/loss used by every preset.
const PRESET_GAMMA: f64 = 0.05;

fn preset_params(gamma: f64, e_par: f64, e_perp: f64, phi: f64) -> ModelParams {
    ModelParams::new(gamma, e_par, e_perp, phi, -150, 150)
        .expect("preset parameters are valid by construction")
}

fn cls_pi() -> InitialSpec {
    InitialSpec::Cls { variant: ClsVariant::TwoSitePhiPi, anchor: 0, a0: C64::new(1.0, 0.0) }
}

fn cls_pi_eperp() -> InitialSpec {
    InitialSpec::Cls { variant: ClsVariant::TwoSitePhiPiEPerp, anchor: 0, a0: C64::new(1.0, 0.0) }
}

fn gaussian70() -> InitialSpec {
    InitialSpec::Gaussian { sigma: 70.0, center: 0.0 }
}

fn bands_job(tag: &str, scenario: &'static str, e_perp: f64, phi: f64) -> Job {
    Job {
        tag: tag.to_string(),
        scenario: Some(scenario),
        kind: JobKind::Bands {
            params: preset_params(PRESET_GAMMA, 0.0, e_perp, phi),
            n_k: DEFAULT_N_K,
        },
    }
}

fn evolve_job(
    tag: &str,
    scenario: &'static str,
    e_par: f64,
    e_perp: f64,
    phi: f64,
    initial: InitialSpec,
    z_end: f64,
) -> Job {
    Job {
        tag: tag.to_string(),
        scenario: Some(scenario),
        kind: JobKind::Evolve {
            params: preset_params(PRESET_GAMMA, e_par, e_perp, phi),
            initial,
            evolve: EvolveConfig::new(z_end),
            heatmap_limit: DEFAULT_HEATMAP_LIMIT,
        },
    }
}

/// Expands a preset name into its jobs. Returns `None` for unknown names.
///
/// The presets cover the lattice's characteristic regimes: the band
/// structure with and without a transverse field, frozen flat-band light,
/// Bloch oscillations of a two-site seed and of a broad Gaussian under a
/// longitudinal tilt, gain-dominated breakdown once a transverse field
/// lifts the flat band's protection, partially broken phase bands at
/// intermediate flux, breathing dynamics there, and the finite-chain
/// eigenvalue census.
pub fn scenario(name: &str) -> Option<Vec<Job>> {
    let jobs = match name {
        // Band structure at flux pi: one exactly flat band, dispersive
        // partners real except in a narrow PT-broken window around k = 0.
        "fig2_bands" => vec![bands_job("fig2_bands", "fig2_bands", 0.0, PI)],
        // A two-cell null mode stays frozen on the untilted chain.
        "fig2c_cls" => vec![evolve_job("fig2c_cls", "fig2c_cls", 0.0, 0.0, PI, cls_pi(), 100.0)],
        // Longitudinal tilt only: oscillatory transport, no net gain.
        "fig3a" => vec![evolve_job("fig3a", "fig3a", 0.05, 0.0, PI, cls_pi(), 500.0)],
        "fig3b" => vec![evolve_job("fig3b", "fig3b", 0.05, 0.0, PI, gaussian70(), 500.0)],
        "fig3c" => vec![evolve_job("fig3c", "fig3c", 0.1, 0.0, PI, cls_pi(), 500.0)],
        "fig3d" => vec![evolve_job("fig3d", "fig3d", 0.1, 0.0, PI, gaussian70(), 500.0)],
        // A transverse field bends the flat band and opens imaginary
        // parts at every k.
        "fig4" => vec![
            bands_job("fig4_eperp0p01", "fig4", 0.01, PI),
            bands_job("fig4_eperp0p05", "fig4", 0.05, PI),
        ],
        // Both fields on: the drift along the synthetic transverse
        // direction feeds the gain sublattice and power grows without
        // bound (slowly for weak e_perp, strongly for larger e_perp).
        "fig5cd" => {
            vec![evolve_job("fig5cd", "fig5cd", 0.1, 0.01, PI, cls_pi_eperp(), 2000.0)]
        }
        "fig5ef" => {
            vec![evolve_job("fig5ef", "fig5ef", 0.1, 0.05, PI, cls_pi_eperp(), 2000.0)]
        }
        // Intermediate flux: no flat band, complex stripes in all bands.
        "fig6" => vec![
            bands_job("fig6_phi_pi2", "fig6", 0.0, PI / 2.0),
            bands_job("fig6_phi_pi3", "fig6", 0.0, PI / 3.0),
            bands_job("fig6_phi_pi4", "fig6", 0.0, PI / 4.0),
        ],
        // Breathing (super-oscillation) regime at flux pi/2 under a tilt.
        "fig7a" => {
            vec![evolve_job("fig7a", "fig7a", 0.05, 0.0, PI / 2.0, gaussian70(), 500.0)]
        }
        "fig7b" => {
            vec![evolve_job("fig7b", "fig7b", 0.1, 0.0, PI / 2.0, gaussian70(), 500.0)]
        }
        // Finite tilted chain: the spectrum is real up to one conjugate
        // pair localized at the edge of the PT-broken stripe.
        "fig7cd" => vec![Job {
            tag: "fig7cd".to_string(),
            scenario: Some("fig7cd"),
            kind: JobKind::Spectrum {
                params: preset_params(PRESET_GAMMA, 0.05, 0.0, PI / 2.0),
                im_tolerance: DEFAULT_IM_TOLERANCE,
            },
        }],
        _ => return None,
    };
    Some(jobs)
}
