//! Physics-level invariants checked on whole lattices and trajectories:
//! finite chains against Bloch bands, ladder dynamics against closed-form
//! semiclassics, conservation laws in the Hermitian limit, and the
//! symmetry structure of trajectories and growth rates.

use ndarray_linalg::Eig;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptdiamond::{
    bloch_operator, build_cls, characteristic_coefficients, evolve, finite_spectrum,
    gaussian_initial, intensity, oscillation_metrics, parity_conjugate, series, solve_cubic,
    ClsSpec, ClsVariant, EvolveConfig, LatticeState, Leg, ModelParams, TrajectoryStatus,
};

fn max_rel_diff(a: &LatticeState, b: &LatticeState) -> f64 {
    let scale = b.norm();
    a.amps()
        .iter()
        .zip(b.amps())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Interior strict local maxima of a sampled signal.
fn peak_positions(z: &[f64], y: &[f64]) -> Vec<f64> {
    (1..y.len() - 1)
        .filter(|&i| y[i] > y[i - 1] && y[i] > y[i + 1])
        .map(|i| z[i])
        .collect()
}

/// Interior strict local minima of a sampled signal.
fn trough_values(y: &[f64]) -> Vec<f64> {
    (1..y.len() - 1)
        .filter(|&i| y[i] < y[i - 1] && y[i] < y[i + 1])
        .map(|i| y[i])
        .collect()
}

/// Every eigenvalue of the open chain must lie on a Bloch band, except
/// for boundary modes, of which these lattices support at most one pair.
#[test]
fn finite_chain_spectra_lie_on_the_bloch_bands() {
    let pi = std::f64::consts::PI;
    for (gamma, phi) in [(0.05, pi / 2.0), (0.5, 0.0), (1.0, pi)] {
        // Dense reference: all three bands over a fine quasimomentum grid.
        let band_params = ModelParams::new(gamma, 0.0, 0.0, phi, -1, 1).unwrap();
        let n_ref = 20_001;
        let mut reference = Vec::with_capacity(3 * n_ref);
        for i in 0..n_ref {
            let k = (i as f64 / (n_ref - 1) as f64) * (2.0 * pi) - pi;
            let roots =
                solve_cubic(&characteristic_coefficients(&band_params, k).unwrap()).unwrap();
            reference.extend_from_slice(&roots.lambdas);
        }

        for half_span in [50i64, 100] {
            let params = ModelParams::new(gamma, 0.0, 0.0, phi, -half_span, half_span).unwrap();
            let spectrum = finite_spectrum(&params, 1e-6).unwrap();
            let mut outliers = 0usize;
            let mut worst_bulk: f64 = 0.0;
            for lambda in &spectrum.eigenvalues {
                let distance = reference
                    .iter()
                    .map(|r| (lambda - r).norm())
                    .fold(f64::INFINITY, f64::min);
                if distance > 5e-3 {
                    outliers += 1;
                } else {
                    worst_bulk = worst_bulk.max(distance);
                }
            }
            assert!(
                outliers <= 2,
                "{} eigenvalues of the {}-cell chain at gamma = {gamma}, phi = {phi:.3} \
                 sit farther than 5e-3 from every band",
                outliers,
                2 * half_span + 1
            );
            assert!(
                worst_bulk < 2e-3,
                "bulk eigenvalues stray {worst_bulk:.2e} from the bands at gamma = {gamma}, \
                 phi = {phi:.3}"
            );
        }
    }
}

/// A narrow packet launched from the top of the dispersive band under a
/// longitudinal tilt executes the closed-form ladder oscillation: the
/// tracked band is 4 pi periodic in k, so the center of mass swings with
/// period 4 pi / e_par and half-swing (max - min) / 2 of
/// (lambda_max - lambda_min) / (2 e_par) = 2 sqrt(2) / e_par.
#[test]
fn tilted_packet_follows_the_ladder_semiclassics() {
    let e_par = 0.1;
    let sigma = 10.0;
    let center = 30.0;

    // Band eigenvector at the launch quasimomentum k = 0 (top band).
    let bloch_params = ModelParams::new(0.0, 0.0, 0.0, 0.0, -1, 1).unwrap();
    let (vals, vecs) = bloch_operator(&bloch_params, 0.0).unwrap().matrix().eig().unwrap();
    let top = (0..3).max_by(|&a, &b| vals[a].re.partial_cmp(&vals[b].re).unwrap()).unwrap();
    let v = vecs.column(top);

    let params = ModelParams::new(0.0, e_par, 0.0, 0.0, -150, 150).unwrap();
    let mut amps = vec![C64::new(0.0, 0.0); params.dim()];
    for n in params.n_min()..=params.n_max() {
        let g = (-((n as f64 - center).powi(2)) / (2.0 * sigma * sigma)).exp();
        for (slot, leg) in [Leg::A, Leg::B, Leg::C].into_iter().enumerate() {
            amps[params.site_index(n, leg).unwrap()] = g * v[slot];
        }
    }
    let initial = LatticeState::new(0.0, amps, &params).unwrap();

    let trajectory = evolve(&initial, &params, &EvolveConfig::new(600.0)).unwrap();
    assert!(matches!(trajectory.status, TrajectoryStatus::Completed));
    let diag = series(&trajectory, &params, &[]).unwrap();
    let metrics = oscillation_metrics(&diag, 10.0).unwrap();

    let expected_period = 4.0 * std::f64::consts::PI / e_par;
    let expected_amplitude = 2.0 * std::f64::consts::SQRT_2 / e_par;
    let period = metrics.period_z.expect("the window holds several full swings");
    assert!(
        (period / expected_period - 1.0).abs() < 0.05,
        "ladder period {period:.2} vs semiclassical {expected_period:.2}"
    );
    assert!(
        (metrics.amplitude / expected_amplitude - 1.0).abs() < 0.10,
        "ladder amplitude {:.2} vs semiclassical {expected_amplitude:.2}",
        metrics.amplitude
    );

    // The tilted gain-free chain is Hermitian, so power is conserved up
    // to the integrator's amplitude error.
    let p0 = diag.total_power[0];
    let drift = diag
        .total_power
        .iter()
        .map(|p| (p / p0 - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-6, "power drifted by {drift:.2e} in the Hermitian limit");
}

/// On a chain wide enough that the launch tails never reach the open
/// ends, the intermediate-flux Gaussian run breathes: total power
/// oscillates with peak spacing 2 pi / e_par, returns near its launch
/// value at every trough, and the profile stays symmetric.
#[test]
fn wide_lattice_breathing_is_bounded_and_symmetric() {
    let e_par = 0.05;
    let params =
        ModelParams::new(0.05, e_par, 0.0, std::f64::consts::PI / 2.0, -450, 450).unwrap();
    let initial = gaussian_initial(&params, 70.0, 0.0).unwrap();
    let trajectory = evolve(&initial, &params, &EvolveConfig::new(500.0)).unwrap();
    assert!(matches!(trajectory.status, TrajectoryStatus::Completed));
    let diag = series(&trajectory, &params, &[]).unwrap();

    // Powers stay positive and change smoothly between samples.
    let p0 = diag.total_power[0];
    for w in diag.total_power.windows(2) {
        assert!(w[0] > 0.0 && w[1] > 0.0, "total power left the positive axis");
        let ratio = (w[1] / w[0]).max(w[0] / w[1]);
        assert!(ratio < 1.5, "power jumped {ratio:.2}x between adjacent samples");
    }

    // Breathing, not growth: bounded swing and trough recovery. At this
    // flux the near-flat band carries an imaginary dispersion close to
    // i gamma sin k, so under the tilt each packet component's growth
    // rate sweeps sinusoidally with the Bloch period and the total power
    // breathes with peak spacing exactly 2 pi / e_par.
    let swing = diag
        .total_power
        .iter()
        .map(|&p| (p / p0).max(p0 / p))
        .fold(0.0, f64::max);
    assert!(swing < 100.0, "power swings {swing:.1}x on the wide chain");
    for trough in trough_values(&diag.total_power) {
        let ratio = (trough / p0).max(p0 / trough);
        assert!(ratio < 2.0, "a breathing trough missed the launch power by {ratio:.2}x");
    }
    let peaks = peak_positions(&diag.z, &diag.total_power);
    assert!(peaks.len() >= 3, "expected several breathing peaks, found {}", peaks.len());
    let spacing = (peaks.last().unwrap() - peaks[0]) / (peaks.len() - 1) as f64;
    let expected = 2.0 * std::f64::consts::PI / e_par;
    assert!(
        (spacing / expected - 1.0).abs() < 0.10,
        "breathing peak spacing {spacing:.2} vs 2 pi / e_par = {expected:.2}"
    );

    // With the tails far from the boundary no edge mode is seeded and the
    // profile keeps its left-right balance.
    let max_asym = diag.asymmetry.iter().map(|s| s.abs()).fold(0.0, f64::max);
    assert!(max_asym < 0.02, "profile asymmetry reached {max_asym:.3}");
}

/// In the gain-free limit the chain is Hermitian for any flux and tilt:
/// power is conserved, a tilted flat-band state only rotates on-site
/// phases so its intensity profile is frozen exactly, and a slow packet
/// holds its norm to 1e-8 over a thousand units of propagation.
#[test]
fn hermitian_limit_conserves_power() {
    // Flat-band Gaussian under tilt: the antisymmetric leg combination
    // decouples at zero flux, the tilt is diagonal, and the profile must
    // not move at all.
    let params = ModelParams::new(0.0, 0.05, 0.0, 0.0, -150, 150).unwrap();
    let initial = gaussian_initial(&params, 30.0, 0.0).unwrap();
    let trajectory = evolve(&initial, &params, &EvolveConfig::new(200.0)).unwrap();
    let rho0 = intensity(&initial, &params).unwrap().rho;
    let rho_max = rho0.iter().fold(0.0f64, |m, &r| m.max(r));
    let mut profile_drift: f64 = 0.0;
    for sample in &trajectory.samples {
        let rho = intensity(sample, &params).unwrap().rho;
        for (r, r0) in rho.iter().zip(&rho0) {
            profile_drift = profile_drift.max((r - r0).abs());
        }
    }
    assert!(
        profile_drift < 1e-6 * rho_max,
        "tilted flat-band profile drifted by {profile_drift:.2e} (scale {rho_max:.2e})"
    );

    // A generic three-band superposition at generic flux: the power drift
    // is bounded by the integrator's amplitude response, roughly
    // n_steps * (|lambda| dz)^6 / 72 ~ 3e-7 for |lambda| <= 2 sqrt(2).
    let params = ModelParams::new(0.0, 0.0, 0.0, 1.2, -150, 150).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut amps = vec![C64::new(0.0, 0.0); params.dim()];
    for n in params.n_min()..=params.n_max() {
        let g = (-((n as f64).powi(2)) / (2.0 * 15.0 * 15.0)).exp()
            * C64::new(0.0, 2.6 * n as f64).exp();
        for leg in [Leg::A, Leg::B, Leg::C] {
            let mix = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            amps[params.site_index(n, leg).unwrap()] = g * mix;
        }
    }
    let initial = LatticeState::new(0.0, amps, &params).unwrap();
    let trajectory = evolve(&initial, &params, &EvolveConfig::new(300.0)).unwrap();
    let diag = series(&trajectory, &params, &[]).unwrap();
    let p0 = diag.total_power[0];
    let drift = diag
        .total_power
        .iter()
        .map(|p| (p / p0 - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-6, "generic Hermitian power drifted by {drift:.2e}");

    // A narrow packet on the smooth band at k0 = 2.6, where |lambda| is
    // only 0.76: the amplitude error shrinks like |lambda|^6, so even one
    // hundred thousand steps must conserve power to better than 1e-8.
    let bloch_params = ModelParams::new(0.0, 0.0, 0.0, 0.0, -1, 1).unwrap();
    let k0 = 2.6;
    let (vals, vecs) = bloch_operator(&bloch_params, k0).unwrap().matrix().eig().unwrap();
    let top = (0..3).max_by(|&a, &b| vals[a].re.partial_cmp(&vals[b].re).unwrap()).unwrap();
    let v = vecs.column(top);
    let params = ModelParams::new(0.0, 0.0, 0.0, 0.0, -150, 150).unwrap();
    let mut amps = vec![C64::new(0.0, 0.0); params.dim()];
    for n in params.n_min()..=params.n_max() {
        let g = (-((n as f64).powi(2)) / (2.0 * 20.0 * 20.0)).exp()
            * C64::new(0.0, k0 * n as f64).exp();
        for (slot, leg) in [Leg::A, Leg::B, Leg::C].into_iter().enumerate() {
            amps[params.site_index(n, leg).unwrap()] = g * v[slot];
        }
    }
    let initial = LatticeState::new(0.0, amps, &params).unwrap();
    let trajectory = evolve(&initial, &params, &EvolveConfig::new(1000.0)).unwrap();
    let diag = series(&trajectory, &params, &[]).unwrap();
    let p0 = diag.total_power[0];
    let drift = diag
        .total_power
        .iter()
        .map(|p| (p / p0 - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(
        drift < 1e-8,
        "slow-packet Hermitian power drifted by {drift:.2e} over z = 1000"
    );
}

/// The symmetry of the operator lifts to trajectories: evolving the
/// parity-conjugate of a final state for the same distance returns the
/// parity-conjugate of the initial state.
#[test]
fn conjugate_trajectories_retrace_each_other() {
    let params = ModelParams::new(0.05, 0.05, 0.0, std::f64::consts::PI, -150, 150).unwrap();
    let spec = ClsSpec { variant: ClsVariant::TwoSitePhiPi, a0: C64::new(1.0, 0.0), anchor: 3 };
    let cls = build_cls(&spec, &params).unwrap();
    let gauss = gaussian_initial(&params, 20.0, -10.0).unwrap();
    let amps: Vec<C64> = cls
        .amps()
        .iter()
        .zip(gauss.amps())
        .map(|(a, b)| a + C64::new(0.4, 0.1) * b)
        .collect();
    let initial = LatticeState::new(0.0, amps, &params).unwrap();

    let z_span = 50.0;
    let forward = evolve(&initial, &params, &EvolveConfig::new(z_span)).unwrap();
    let reflected = parity_conjugate(forward.last(), &params).unwrap();
    let back = evolve(&reflected, &params, &EvolveConfig::new(z_span)).unwrap();
    let expected = parity_conjugate(&initial, &params).unwrap();

    let defect = max_rel_diff(back.last(), &expected);
    assert!(
        defect < 1e-6,
        "conjugate trajectory misses its target by a relative {defect:.2e}"
    );
}

/// Above threshold the late-time power growth rate equals twice the
/// largest imaginary part of the finite-chain spectrum (up to the slow
/// algebraic correction from the band-edge mode density).
#[test]
fn broken_phase_growth_rate_matches_the_spectrum() {
    let params = ModelParams::new(3.0, 0.0, 0.0, std::f64::consts::PI, -50, 50).unwrap();
    let spectrum = finite_spectrum(&params, 1e-6).unwrap();
    let max_im = spectrum.eigenvalues.iter().map(|l| l.im).fold(f64::NEG_INFINITY, f64::max);
    assert!(max_im > 2.9, "expected a strongly amplified mode, found max Im {max_im:.3}");

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let amps: Vec<C64> = (0..params.dim())
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let initial = LatticeState::new(0.0, amps, &params).unwrap();
    let trajectory = evolve(&initial, &params, &EvolveConfig::new(4.0)).unwrap();
    let diag = series(&trajectory, &params, &[]).unwrap();

    let p_at = |z: f64| -> f64 {
        let i = (0..diag.len())
            .min_by(|&a, &b| {
                (diag.z[a] - z).abs().partial_cmp(&(diag.z[b] - z).abs()).unwrap()
            })
            .unwrap();
        diag.total_power[i]
    };
    let slope = (p_at(4.0) / p_at(3.0)).ln();
    let expected = 2.0 * max_im;
    assert!(
        (slope / expected - 1.0).abs() < 0.10,
        "late-time growth rate {slope:.3} vs spectral rate {expected:.3}"
    );
}
