//! Observables extracted from propagated trajectories.
//!
//! All quantities are per-cell: the intensity of cell `n` sums the three
//! sites `|A_n|^2 + |B_n|^2 + |C_n|^2`. From the intensity profile the
//! series tracks
//!
//! * total power `P(z)`,
//! * center of mass `com(z) = sum_n n rho_n / P`,
//! * the gain/loss asymmetry `S(z)` — here the *spatial* imbalance between
//!   the right (`n > 0`) and left (`n < 0`) halves of the chain, with the
//!   central cell `n = 0` left out,
//! * the RMS width around the center of mass,
//! * and the power split between a designated set of "excited" sites
//!   (typically the support of the initially launched state) and the rest
//!   of the lattice.
//!
//! [`oscillation_metrics`] condenses a series into the numbers used to
//! recognize field-driven oscillation regimes: the mean peak-to-peak
//! period of the center of mass (quadratically refined), its swing
//! amplitude, and a boundedness flag on the total power.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::model::{real_space_operator, LatticeState, Leg, ModelParams};

/// Default factor for the boundedness test: the total power must stay
/// within `[P0 / factor, P0 * factor]`.
pub const DEFAULT_BOUND_FACTOR: f64 = 10.0;

/// Default imaginary-part threshold above which an eigenvalue counts as
/// complex in [`finite_spectrum`].
pub const DEFAULT_IM_TOLERANCE: f64 = 1e-6;

/// Largest lattice (in cells) accepted by the dense spectrum routine.
pub const SPECTRUM_MAX_CELLS: usize = 2000;

/// A single site referenced by cell index and leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteRef {
    pub cell: i64,
    pub leg: Leg,
}

/// The five-site support of a two-cell compact localized state anchored
/// at `anchor`: both legs and the spine of the anchor cell plus the legs
/// of the next cell.
pub fn cls_support(anchor: i64) -> Vec<SiteRef> {
    vec![
        SiteRef { cell: anchor, leg: Leg::A },
        SiteRef { cell: anchor, leg: Leg::B },
        SiteRef { cell: anchor, leg: Leg::C },
        SiteRef { cell: anchor + 1, leg: Leg::A },
        SiteRef { cell: anchor + 1, leg: Leg::C },
    ]
}

/// Per-cell intensity of one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    /// Propagation distance of the snapshot.
    pub z: f64,
    /// `rho[i]` is the intensity of cell `n_min + i`.
    pub rho: Vec<f64>,
}

/// Sums `|A|^2 + |B|^2 + |C|^2` per cell.
pub fn intensity(state: &LatticeState, params: &ModelParams) -> Result<IntensityProfile> {
    if state.amps().len() != params.dim() {
        return Err(Error::Validation(format!(
            "state length {} does not match lattice dimension {}",
            state.amps().len(),
            params.dim()
        )));
    }
    let rho = state
        .amps()
        .chunks_exact(3)
        .map(|c| c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr())
        .collect();
    Ok(IntensityProfile { z: state.z(), rho })
}

/// Scalar observables along a trajectory, one entry per recorded sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSeries {
    pub z: Vec<f64>,
    pub total_power: Vec<f64>,
    /// Intensity center of mass in cell units.
    pub com: Vec<f64>,
    /// Right/left power imbalance `(P_right - P_left) / P`, cell 0
    /// excluded.
    pub asymmetry: Vec<f64>,
    /// RMS width of the intensity profile around its center of mass.
    pub width: Vec<f64>,
    /// Power on the designated excited sites.
    pub excited_power: Vec<f64>,
    /// Power everywhere else.
    pub complement_power: Vec<f64>,
}

impl DiagnosticsSeries {
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.z.len()
    }

    /// True when the series holds no samples.
    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Extracts the diagnostics series from a trajectory.
///
/// `excited` designates the sites whose power is reported separately
/// (pass the launched state's support; an empty list is allowed and makes
/// `excited_power` identically zero). Fails if any referenced site lies
/// outside the lattice. A zero-power snapshot reports center of mass,
/// asymmetry, and width as zero.
pub fn series(
    trajectory: &Trajectory,
    params: &ModelParams,
    excited: &[SiteRef],
) -> Result<DiagnosticsSeries> {
    let excited_idx: Vec<usize> = excited
        .iter()
        .map(|s| {
            params.site_index(s.cell, s.leg).ok_or_else(|| {
                Error::Validation(format!(
                    "excited site (cell {}, {:?}) lies outside [{}, {}]",
                    s.cell,
                    s.leg,
                    params.n_min(),
                    params.n_max()
                ))
            })
        })
        .collect::<Result<_>>()?;

    let n = trajectory.samples.len();
    let mut out = DiagnosticsSeries {
        z: Vec::with_capacity(n),
        total_power: Vec::with_capacity(n),
        com: Vec::with_capacity(n),
        asymmetry: Vec::with_capacity(n),
        width: Vec::with_capacity(n),
        excited_power: Vec::with_capacity(n),
        complement_power: Vec::with_capacity(n),
    };

    for sample in &trajectory.samples {
        let profile = intensity(sample, params)?;
        let p: f64 = profile.rho.iter().sum();
        let (mut m1, mut m2, mut right, mut left) = (0.0, 0.0, 0.0, 0.0);
        for (i, &rho) in profile.rho.iter().enumerate() {
            let cell = params.n_min() + i as i64;
            let nf = cell as f64;
            m1 += nf * rho;
            m2 += nf * nf * rho;
            if cell > 0 {
                right += rho;
            } else if cell < 0 {
                left += rho;
            }
        }
        let (com, asym, width) = if p > 0.0 {
            let com = m1 / p;
            let var = (m2 / p - com * com).max(0.0);
            (com, (right - left) / p, var.sqrt())
        } else {
            (0.0, 0.0, 0.0)
        };
        let ep: f64 = excited_idx.iter().map(|&i| sample.amps()[i].norm_sqr()).sum();

        out.z.push(sample.z());
        out.total_power.push(p);
        out.com.push(com);
        out.asymmetry.push(asym);
        out.width.push(width);
        out.excited_power.push(ep);
        out.complement_power.push(p - ep);
    }
    Ok(out)
}

/// Condensed oscillation summary of a diagnostics series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationMetrics {
    /// Mean peak-to-peak distance of the center of mass, or `None` when
    /// fewer than three peaks were found.
    pub period_z: Option<f64>,
    /// Half the full swing of the center of mass, `(max - min) / 2`.
    pub amplitude: f64,
    /// True when the total power stayed within
    /// `[P0 / bound_factor, P0 * bound_factor]` for the whole series.
    pub is_bounded: bool,
}

/// Interior local maxima of `x`, with sub-sample quadratic refinement of
/// the peak positions.
fn refined_peaks(z: &[f64], x: &[f64]) -> Vec<f64> {
    let mut peaks = Vec::new();
    for i in 1..x.len().saturating_sub(1) {
        if x[i] > x[i - 1] && x[i] >= x[i + 1] {
            let denom = x[i - 1] - 2.0 * x[i] + x[i + 1];
            let mut offset = if denom != 0.0 {
                0.5 * (x[i - 1] - x[i + 1]) / denom
            } else {
                0.0
            };
            offset = offset.clamp(-1.0, 1.0);
            let local_dz = 0.5 * (z[i + 1] - z[i - 1]);
            peaks.push(z[i] + offset * local_dz);
        }
    }
    peaks
}

/// Computes the oscillation summary of a series.
///
/// Requires a non-empty series and `bound_factor >= 1`.
pub fn oscillation_metrics(
    series: &DiagnosticsSeries,
    bound_factor: f64,
) -> Result<OscillationMetrics> {
    if series.is_empty() {
        return Err(Error::Validation("cannot summarize an empty series".into()));
    }
    if !bound_factor.is_finite() || bound_factor < 1.0 {
        return Err(Error::Validation(format!(
            "bound_factor must be at least 1, got {bound_factor}"
        )));
    }

    let peaks = refined_peaks(&series.z, &series.com);
    let period_z = if peaks.len() >= 3 {
        let total: f64 = peaks.windows(2).map(|w| w[1] - w[0]).sum();
        Some(total / (peaks.len() - 1) as f64)
    } else {
        None
    };

    let max = series.com.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = series.com.iter().copied().fold(f64::INFINITY, f64::min);
    let amplitude = 0.5 * (max - min);

    let p0 = series.total_power[0];
    let is_bounded = series
        .total_power
        .iter()
        .all(|&p| p >= p0 / bound_factor && p <= p0 * bound_factor);

    Ok(OscillationMetrics { period_z, amplitude, is_bounded })
}

/// Eigenvalue census of the finite lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// All propagation constants (eigenvalues of `-H`), sorted by real
    /// part, then imaginary part.
    pub eigenvalues: Vec<C64>,
    /// How many eigenvalues have `|Im| > im_tolerance`.
    pub complex_count: usize,
    /// Indices (into `eigenvalues`) of those complex eigenvalues.
    pub complex_indices: Vec<usize>,
    /// The threshold used for the census.
    pub im_tolerance: f64,
}

/// Dense eigensolve of the finite open chain.
///
/// Returns the propagation constants (spectrum of `-H`) sorted by real
/// part. Limited to [`SPECTRUM_MAX_CELLS`] cells; requires a non-negative
/// finite `im_tolerance`.
pub fn finite_spectrum(params: &ModelParams, im_tolerance: f64) -> Result<SpectrumReport> {
    use ndarray_linalg::Eig;
    if params.n_cells() > SPECTRUM_MAX_CELLS {
        return Err(Error::Validation(format!(
            "dense spectrum limited to {SPECTRUM_MAX_CELLS} cells, got {}",
            params.n_cells()
        )));
    }
    if !im_tolerance.is_finite() || im_tolerance < 0.0 {
        return Err(Error::Validation(format!(
            "im_tolerance must be non-negative and finite, got {im_tolerance}"
        )));
    }
    let minus_h = real_space_operator(params).into_matrix().mapv(|x| -x);
    let (vals, _) = minus_h.eig()?;
    let mut eigenvalues: Vec<C64> = vals.to_vec();
    eigenvalues.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let complex_indices: Vec<usize> = eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, l)| l.im.abs() > im_tolerance)
        .map(|(i, _)| i)
        .collect();
    Ok(SpectrumReport {
        complex_count: complex_indices.len(),
        complex_indices,
        eigenvalues,
        im_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{IntegratorMeta, TrajectoryStatus};

    fn params() -> ModelParams {
        ModelParams::new(0.0, 0.0, 0.0, 0.0, -1, 1).unwrap()
    }

    fn meta() -> IntegratorMeta {
        IntegratorMeta {
            method: "rk4",
            dz: 0.01,
            n_steps: 0,
            operator_norm_estimate: 0.0,
            stability_dz_limit: f64::INFINITY,
            convergence_estimate: 0.0,
        }
    }

    fn single_sample_trajectory(state: LatticeState) -> Trajectory {
        Trajectory {
            samples: vec![state],
            status: TrajectoryStatus::Completed,
            meta: meta(),
        }
    }

    #[test]
    fn series_matches_hand_computed_observables() {
        let p = params();
        let mut state = LatticeState::zero(&p);
        // Cell -1: |A| = 1; cell 0: |B| = 2; cell 1: |C| = 3.
        state.amps_mut()[0] = C64::new(1.0, 0.0);
        state.amps_mut()[4] = C64::new(0.0, 2.0);
        state.amps_mut()[8] = C64::new(3.0, 0.0);
        let traj = single_sample_trajectory(state);
        let excited = [SiteRef { cell: 1, leg: Leg::C }];
        let d = series(&traj, &p, &excited).unwrap();

        assert_eq!(d.len(), 1);
        assert!((d.total_power[0] - 14.0).abs() < 1e-14);
        // com = (-1 + 9) / 14; the central cell contributes no moment.
        assert!((d.com[0] - 4.0 / 7.0).abs() < 1e-14);
        // Asymmetry excludes cell 0 entirely: (9 - 1) / 14.
        assert!((d.asymmetry[0] - 4.0 / 7.0).abs() < 1e-14);
        let width_sq: f64 = 10.0 / 14.0 - (4.0 / 7.0) * (4.0 / 7.0);
        assert!((d.width[0] - width_sq.sqrt()).abs() < 1e-14);
        assert!((d.excited_power[0] - 9.0).abs() < 1e-14);
        assert!((d.complement_power[0] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn series_rejects_sites_outside_the_lattice() {
        let p = params();
        let traj = single_sample_trajectory(LatticeState::zero(&p));
        let bad = [SiteRef { cell: 5, leg: Leg::A }];
        assert!(series(&traj, &p, &bad).is_err());
    }

    #[test]
    fn intensity_groups_by_cell() {
        let p = params();
        let mut state = LatticeState::zero(&p);
        state.amps_mut()[3] = C64::new(1.0, 1.0);
        state.amps_mut()[5] = C64::new(0.0, 1.0);
        let prof = intensity(&state, &p).unwrap();
        assert_eq!(prof.rho.len(), 3);
        assert!((prof.rho[1] - 3.0).abs() < 1e-15);
        assert_eq!(prof.rho[0], 0.0);
        assert_eq!(prof.rho[2], 0.0);
    }

    #[test]
    fn cls_support_lists_the_five_sites() {
        let s = cls_support(4);
        assert_eq!(
            s,
            vec![
                SiteRef { cell: 4, leg: Leg::A },
                SiteRef { cell: 4, leg: Leg::B },
                SiteRef { cell: 4, leg: Leg::C },
                SiteRef { cell: 5, leg: Leg::A },
                SiteRef { cell: 5, leg: Leg::C },
            ]
        );
    }

    #[test]
    fn oscillation_metrics_recover_a_synthetic_cosine() {
        let n = 201;
        let z: Vec<f64> = (0..n).map(|i| i as f64 * 0.5).collect();
        let com: Vec<f64> = z.iter().map(|&z| (std::f64::consts::TAU * z / 20.0).cos()).collect();
        let ones = vec![1.0; n];
        let d = DiagnosticsSeries {
            z,
            com,
            total_power: ones.clone(),
            asymmetry: vec![0.0; n],
            width: vec![0.0; n],
            excited_power: ones.clone(),
            complement_power: vec![0.0; n],
        };
        let m = oscillation_metrics(&d, DEFAULT_BOUND_FACTOR).unwrap();
        let period = m.period_z.expect("cosine has plenty of peaks");
        assert!((period - 20.0).abs() < 1e-6, "period {period}");
        assert!((m.amplitude - 1.0).abs() < 1e-9);
        assert!(m.is_bounded);
    }

    #[test]
    fn quadratic_refinement_beats_the_sample_grid() {
        // Peaks deliberately misaligned with the grid: maxima of
        // cos(2 pi (z - 0.37) / 10) on an integer grid.
        let n = 101;
        let z: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let com: Vec<f64> = z
            .iter()
            .map(|&z| (std::f64::consts::TAU * (z - 0.37) / 10.0).cos())
            .collect();
        let peaks = refined_peaks(&z, &com);
        assert!(peaks.len() >= 8);
        for p in &peaks {
            let nearest = (p - 0.37) / 10.0;
            let miss = (nearest - nearest.round()).abs() * 10.0;
            assert!(miss < 0.05, "refined peak {p} misses the true maximum by {miss}");
        }
    }

    #[test]
    fn boundedness_uses_the_factor_window() {
        let mk = |powers: Vec<f64>| DiagnosticsSeries {
            z: (0..powers.len()).map(|i| i as f64).collect(),
            com: vec![0.0; powers.len()],
            asymmetry: vec![0.0; powers.len()],
            width: vec![0.0; powers.len()],
            excited_power: vec![0.0; powers.len()],
            complement_power: powers.clone(),
            total_power: powers,
        };
        let inside = mk(vec![1.0, 5.0, 0.5, 9.9]);
        assert!(oscillation_metrics(&inside, 10.0).unwrap().is_bounded);
        let above = mk(vec![1.0, 10.5]);
        assert!(!oscillation_metrics(&above, 10.0).unwrap().is_bounded);
        let below = mk(vec![1.0, 0.05]);
        assert!(!oscillation_metrics(&below, 10.0).unwrap().is_bounded);
        assert!(oscillation_metrics(&inside, 0.5).is_err());
    }

    #[test]
    fn finite_spectrum_census() {
        // Hermitian flat-band chain: everything real, and the flat band
        // contributes a macroscopic number of zero modes.
        let p = ModelParams::new(0.0, 0.0, 0.0, 0.0, -10, 10).unwrap();
        let r = finite_spectrum(&p, DEFAULT_IM_TOLERANCE).unwrap();
        assert_eq!(r.eigenvalues.len(), p.dim());
        assert_eq!(r.complex_count, 0);
        for w in r.eigenvalues.windows(2) {
            assert!(w[0].re <= w[1].re + 1e-12);
        }
        let zeros = r.eigenvalues.iter().filter(|l| l.norm() < 1e-9).count();
        assert!(zeros >= p.n_cells() - 1, "only {zeros} zero modes");

        // Strong gain/loss: part of the spectrum must turn complex.
        let broken = ModelParams::new(1.5, 0.0, 0.0, 0.0, -10, 10).unwrap();
        let r = finite_spectrum(&broken, DEFAULT_IM_TOLERANCE).unwrap();
        assert!(r.complex_count > 0);
        assert_eq!(r.complex_count, r.complex_indices.len());
    }

    #[test]
    fn finite_spectrum_respects_the_size_cap() {
        let p = ModelParams::new(0.0, 0.0, 0.0, 0.0, 0, 2100).unwrap();
        assert!(finite_spectrum(&p, 1e-6).is_err());
        let q = ModelParams::new(0.0, 0.0, 0.0, 0.0, 0, 5).unwrap();
        assert!(finite_spectrum(&q, -1.0).is_err());
    }
}
