//! Artifact serialization: CSV tables, JSON reports, and the metadata
//! document that accompanies every output file.
//!
//! All floats are written with Rust's shortest round-trip formatting, so
//! files parse back to bit-identical values and reruns of the same
//! configuration produce byte-identical artifacts (no timestamps, no
//! environment-dependent content).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde_json::json;

use ptdiamond::{
    intensity, BandSweep, DiagnosticsSeries, GapReport, IntegratorMeta, LatticeState, Leg,
    ModelParams, SpectrumReport, Trajectory, TrajectoryStatus,
};

use crate::error::{io_err, AppError, Result};

/// The crate's sign convention, stamped into every metadata document:
/// reported propagation constants are eigenvalues of `-H`, and a mode
/// whose eigenvalue has positive imaginary part decays while `Im < 0`
/// amplifies under `exp(i lambda z)` — equivalently, the physical
/// amplification of state power corresponds to `Im lambda < 0`.
pub const LAMBDA_CONVENTION: &str = "eigenvalues of -H; Im>0 amplifies";

/// Collapses IEEE negative zero so zeros always print as `0`.
fn z(x: f64) -> f64 {
    x + 0.0
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// Creates the output directory if needed and returns `dir/name`.
pub fn prepare_path(dir: &Path, name: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    Ok(dir.join(name))
}

/// Common header of every metadata document.
pub fn base_meta(kind: &str, columns: &[&str], params: &ModelParams) -> serde_json::Value {
    json!({
        "tool": "ptdiamond",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "lambda_convention": LAMBDA_CONVENTION,
        "kind": kind,
        "columns": columns,
        "model": {
            "gamma": params.gamma(),
            "e_par": params.e_par(),
            "e_perp": params.e_perp(),
            "phi": params.phi(),
            "n_min": params.n_min(),
            "n_max": params.n_max(),
        },
    })
}

/// Serializes integrator bookkeeping into the metadata document.
pub fn integrator_meta(meta: &IntegratorMeta, status: &TrajectoryStatus) -> serde_json::Value {
    let status_json = match status {
        TrajectoryStatus::Completed => json!({ "kind": "completed" }),
        TrajectoryStatus::BlewUp { z_stop } => json!({ "kind": "blew_up", "z_stop": z_stop }),
    };
    json!({
        "method": meta.method,
        "dz": meta.dz,
        "n_steps": meta.n_steps,
        "operator_norm_estimate": meta.operator_norm_estimate,
        "stability_dz_limit": meta.stability_dz_limit,
        "convergence_estimate": meta.convergence_estimate,
        "status": status_json,
    })
}

/// Writes `<path>.meta.json` next to an artifact at `path`.
pub fn write_meta(path: &Path, meta: &serde_json::Value) -> Result<()> {
    let meta_path = meta_path_for(path);
    let text = format!("{:#}\n", meta);
    write_file(&meta_path, &text)
}

/// `x.csv` pairs with `x.meta.json`; `x.json` with `x.meta.json` too.
pub fn meta_path_for(path: &Path) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.meta.json"))
}

/// Band sweep CSV: one row per quasimomentum, bands in tracked order.
pub const BANDS_COLUMNS: [&str; 7] = ["k", "re_l1", "im_l1", "re_l2", "im_l2", "re_l3", "im_l3"];

pub fn write_bands_csv(path: &Path, sweep: &BandSweep) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{}", BANDS_COLUMNS.join(","));
    for i in 0..sweep.ks().len() {
        let k = sweep.ks()[i];
        let l = sweep.tracked(i);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            z(k),
            z(l[0].re),
            z(l[0].im),
            z(l[1].re),
            z(l[1].im),
            z(l[2].re),
            z(l[2].im)
        );
    }
    write_file(path, &out)
}

/// Gap classification as a small JSON report.
pub fn write_gap_json(path: &Path, report: &GapReport, separation_tolerance: f64) -> Result<()> {
    let doc = json!({
        "has_flat_band": report.has_flat_band,
        "is_gapless": report.is_gapless,
        "min_separation": report.min_separation,
        "gamma_c": report.gamma_c,
        "separation_tolerance": separation_tolerance,
        "witness": {
            "k1": report.witness.k1,
            "k2": report.witness.k2,
            "lambda1": { "re": report.witness.lambda1.re, "im": report.witness.lambda1.im },
            "lambda2": { "re": report.witness.lambda2.re, "im": report.witness.lambda2.im },
        },
    });
    write_file(path, &format!("{doc:#}\n"))
}

/// Null-mode residual report for `cls-check`.
pub fn write_cls_json(path: &Path, residual: f64, state_power: f64) -> Result<()> {
    let doc = json!({
        "residual": residual,
        "state_power": state_power,
    });
    write_file(path, &format!("{doc:#}\n"))
}

/// Long-format intensity map: one row per (z, cell), at most `limit`
/// z-samples (decimated evenly, keeping the final sample).
pub const HEATMAP_COLUMNS: [&str; 3] = ["z", "n", "rho"];

pub fn write_heatmap_csv(
    path: &Path,
    trajectory: &Trajectory,
    params: &ModelParams,
    limit: usize,
) -> Result<()> {
    if limit == 0 {
        return Err(AppError::validation("heatmap limit must be at least 1"));
    }
    let n_samples = trajectory.samples.len();
    let stride = n_samples.div_ceil(limit).max(1);
    let mut rows: Vec<usize> = (0..n_samples).step_by(stride).collect();
    if *rows.last().unwrap_or(&0) != n_samples - 1 {
        rows.push(n_samples - 1);
    }

    let mut out = String::new();
    let _ = writeln!(out, "{}", HEATMAP_COLUMNS.join(","));
    for &i in &rows {
        let sample = &trajectory.samples[i];
        let profile = intensity(sample, params)?;
        for (j, rho) in profile.rho.iter().enumerate() {
            let n = params.n_min() + j as i64;
            let _ = writeln!(out, "{},{n},{:e}", profile.z, rho);
        }
    }
    write_file(path, &out)
}

/// Scalar diagnostics along the trajectory.
pub const DIAGNOSTICS_COLUMNS: [&str; 7] = [
    "z",
    "total_power",
    "com",
    "asymmetry",
    "width",
    "excited_power",
    "complement_power",
];

pub fn write_diagnostics_csv(path: &Path, series: &DiagnosticsSeries) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{}", DIAGNOSTICS_COLUMNS.join(","));
    for i in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e}",
            series.z[i],
            series.total_power[i],
            z(series.com[i]),
            z(series.asymmetry[i]),
            series.width[i],
            series.excited_power[i],
            series.complement_power[i]
        );
    }
    write_file(path, &out)
}

/// Full state snapshot, written so it parses back bit-identically.
///
/// Layout: a comment header carrying `z` and the cell range, then one row
/// per site in interleaved order.
pub const STATE_COLUMNS: [&str; 4] = ["n", "leg", "re", "im"];

pub fn write_state_csv(path: &Path, state: &LatticeState, params: &ModelParams) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# z={}", state.z());
    let _ = writeln!(out, "# n_min={} n_max={}", params.n_min(), params.n_max());
    let _ = writeln!(out, "{}", STATE_COLUMNS.join(","));
    for n in params.cells() {
        for leg in [Leg::A, Leg::B, Leg::C] {
            let a = state.amp(params, n, leg).unwrap();
            let tag = match leg {
                Leg::A => "A",
                Leg::B => "B",
                Leg::C => "C",
            };
            let _ = writeln!(out, "{n},{tag},{:e},{:e}", z(a.re), z(a.im));
        }
    }
    write_file(path, &out)
}

/// Reads a state file written by [`write_state_csv`].
///
/// Returns `(z, n_min, n_max, amplitudes)` after checking that every site
/// of the declared cell range appears exactly once, in order.
pub fn read_state_csv(path: &Path) -> Result<(f64, i64, i64, Vec<C64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let bad = |msg: String| AppError::Validation(format!("{}: {msg}", path.display()));

    let mut lines = text.lines();
    let z_line = lines.next().ok_or_else(|| bad("empty state file".into()))?;
    let z: f64 = z_line
        .strip_prefix("# z=")
        .ok_or_else(|| bad(format!("expected `# z=...` header, got {z_line:?}")))?
        .parse()
        .map_err(|e| bad(format!("bad z value: {e}")))?;

    let range_line = lines.next().ok_or_else(|| bad("missing cell-range header".into()))?;
    let rest = range_line
        .strip_prefix("# n_min=")
        .ok_or_else(|| bad(format!("expected `# n_min=... n_max=...`, got {range_line:?}")))?;
    let (min_str, max_part) = rest
        .split_once(" n_max=")
        .ok_or_else(|| bad(format!("expected `# n_min=... n_max=...`, got {range_line:?}")))?;
    let n_min: i64 = min_str.parse().map_err(|e| bad(format!("bad n_min: {e}")))?;
    let n_max: i64 = max_part.parse().map_err(|e| bad(format!("bad n_max: {e}")))?;
    if n_min > n_max {
        return Err(bad(format!("empty cell range [{n_min}, {n_max}]")));
    }

    let header = lines.next().ok_or_else(|| bad("missing column header".into()))?;
    if header != STATE_COLUMNS.join(",") {
        return Err(bad(format!("unexpected column header {header:?}")));
    }

    let legs = ["A", "B", "C"];
    let mut amps = Vec::with_capacity(3 * (n_max - n_min + 1) as usize);
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {:?}", line)));
        }
        let site = amps.len();
        let expect_n = n_min + (site / 3) as i64;
        let expect_leg = legs[site % 3];
        let n: i64 = fields[0].parse().map_err(|e| bad(format!("bad cell index: {e}")))?;
        if n != expect_n || fields[1] != expect_leg {
            return Err(bad(format!(
                "out-of-order row {line:?}: expected cell {expect_n} leg {expect_leg}"
            )));
        }
        let re: f64 = fields[2].parse().map_err(|e| bad(format!("bad re: {e}")))?;
        let im: f64 = fields[3].parse().map_err(|e| bad(format!("bad im: {e}")))?;
        amps.push(C64::new(re, im));
    }
    let expected = 3 * (n_max - n_min + 1) as usize;
    if amps.len() != expected {
        return Err(bad(format!(
            "expected {expected} site rows, found {}",
            amps.len()
        )));
    }
    Ok((z, n_min, n_max, amps))
}

/// Spectrum CSV: eigenvalues by ascending real part.
pub const SPECTRUM_COLUMNS: [&str; 3] = ["index", "re", "im"];

pub fn write_spectrum_csv(path: &Path, report: &SpectrumReport) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{}", SPECTRUM_COLUMNS.join(","));
    for (i, l) in report.eigenvalues.iter().enumerate() {
        let _ = writeln!(out, "{i},{:e},{:e}", z(l.re), z(l.im));
    }
    write_file(path, &out)
}
