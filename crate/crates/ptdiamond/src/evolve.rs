//! Propagation of lattice states along `z`.
//!
//! The workhorse is a fixed-step classical Runge-Kutta (RK4) integrator
//! for `i d/dz psi = H psi`, applied matrix-free through the coupling
//! stencil so a step costs O(number of sites). Non-Hermitian lattices can
//! amplify light exponentially, so the integrator watches the largest
//! amplitude and stops early (with a truthful status) once it passes a
//! configurable overflow cap.
//!
//! For small lattices an independent oracle is available:
//! [`evolve_oracle`] computes the dense matrix exponential
//! `exp(-i z H)` by Pade approximation with scaling and squaring, with no
//! step-size error at all. Tests pit the two routes against each other.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{real_space_operator, LatticeState, ModelParams, Stencil};

/// Largest lattice (in unit cells) the dense matrix-exponential oracle
/// accepts.
pub const ORACLE_MAX_CELLS: usize = 40;

/// Integration controls for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    /// Propagation distance to cover (from the initial state's `z`).
    pub z_end: f64,
    /// Step size.
    pub dz: f64,
    /// Record a sample every this many steps (the initial state and the
    /// final step are always recorded).
    pub sample_every: usize,
    /// Stop early once any amplitude modulus reaches this cap.
    pub overflow_cap: f64,
}

impl EvolveConfig {
    /// Defaults: `dz = 0.01`, a sample every 100 steps, overflow cap
    /// `1e12`.
    pub fn new(z_end: f64) -> Self {
        Self { z_end, dz: 0.01, sample_every: 100, overflow_cap: 1e12 }
    }

    /// Number of steps, validating all fields.
    ///
    /// `z_end` is rounded to the nearest whole number of steps; it must be
    /// at least half a step long.
    pub fn n_steps(&self) -> Result<usize> {
        if !self.z_end.is_finite() || self.z_end <= 0.0 {
            return Err(Error::Validation(format!(
                "z_end must be positive and finite, got {}",
                self.z_end
            )));
        }
        if !self.dz.is_finite() || self.dz <= 0.0 {
            return Err(Error::Validation(format!(
                "dz must be positive and finite, got {}",
                self.dz
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Validation("sample_every must be at least 1".into()));
        }
        if !self.overflow_cap.is_finite() || self.overflow_cap <= 0.0 {
            return Err(Error::Validation(format!(
                "overflow_cap must be positive and finite, got {}",
                self.overflow_cap
            )));
        }
        let steps = (self.z_end / self.dz).round();
        if steps < 1.0 {
            return Err(Error::Validation(format!(
                "z_end = {} is shorter than half a step (dz = {})",
                self.z_end, self.dz
            )));
        }
        Ok(steps as usize)
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryStatus {
    /// Reached `z_end`.
    Completed,
    /// Stopped early at `z_stop` because an amplitude reached the overflow
    /// cap. The trajectory's last sample is the capped state.
    BlewUp { z_stop: f64 },
}

/// Bookkeeping about the integrator run.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorMeta {
    /// Integration scheme identifier.
    pub method: &'static str,
    /// Step size used.
    pub dz: f64,
    /// Number of steps planned (the run may stop earlier on overflow).
    pub n_steps: usize,
    /// Power-iteration estimate of the operator 2-norm of `H` (an upper
    /// bound on its spectral radius).
    pub operator_norm_estimate: f64,
    /// Step size above which RK4 would sit outside its linear stability
    /// region for this operator (`2.6 / operator_norm_estimate`).
    pub stability_dz_limit: f64,
    /// Relative difference between a short probe integration at `dz` and
    /// one at `dz / 2` — a direct estimate of the step-size error level.
    pub convergence_estimate: f64,
}

/// A propagated trajectory: sampled snapshots plus run metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<LatticeState>,
    pub status: TrajectoryStatus,
    pub meta: IntegratorMeta,
}

impl Trajectory {
    /// The last recorded snapshot.
    pub fn last(&self) -> &LatticeState {
        self.samples.last().expect("a trajectory always holds at least one sample")
    }
}

/// Computes `out = -i H psi`, the right-hand side of the propagation
/// equation.
fn derivative(stencil: &Stencil, psi: &[C64], out: &mut [C64]) {
    stencil.apply(psi, out);
    for a in out.iter_mut() {
        *a = C64::new(a.im, -a.re);
    }
}

/// One classical RK4 step in place. `k1..k4` and `tmp` are scratch
/// buffers of the lattice dimension.
#[allow(clippy::too_many_arguments)]
fn rk4_step(
    stencil: &Stencil,
    dz: f64,
    psi: &mut [C64],
    k1: &mut [C64],
    k2: &mut [C64],
    k3: &mut [C64],
    k4: &mut [C64],
    tmp: &mut [C64],
) {
    let n = psi.len();
    derivative(stencil, psi, k1);
    for i in 0..n {
        tmp[i] = psi[i] + k1[i] * (dz / 2.0);
    }
    derivative(stencil, tmp, k2);
    for i in 0..n {
        tmp[i] = psi[i] + k2[i] * (dz / 2.0);
    }
    derivative(stencil, tmp, k3);
    for i in 0..n {
        tmp[i] = psi[i] + k3[i] * dz;
    }
    derivative(stencil, tmp, k4);
    for i in 0..n {
        psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dz / 6.0);
    }
}

/// Scans a state for the largest squared modulus, flagging non-finite
/// amplitudes (a plain max would silently skip NaN).
fn max_norm_sqr(psi: &[C64]) -> Option<f64> {
    let mut m = 0.0_f64;
    for a in psi {
        let n2 = a.norm_sqr();
        if !n2.is_finite() {
            return None;
        }
        if n2 > m {
            m = n2;
        }
    }
    Some(m)
}

/// Power-iteration estimate of the operator 2-norm of `H` (iterating
/// `H^dagger H` on a deterministic start vector).
fn operator_norm_estimate(stencil: &Stencil) -> f64 {
    let n = stencil.dim();
    let adjoint = stencil.adjoint();
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + 0.1 * (i as f64).sin(), 0.05 * (i as f64 * 0.7).cos()))
        .collect();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut u = vec![C64::new(0.0, 0.0); n];
    let mut sigma2 = 0.0;
    for _ in 0..40 {
        let vn2: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        let vn = vn2.sqrt();
        if vn == 0.0 {
            return 0.0;
        }
        for a in v.iter_mut() {
            *a /= vn;
        }
        stencil.apply(&v, &mut w);
        adjoint.apply(&w, &mut u);
        sigma2 = w.iter().map(|a| a.norm_sqr()).sum();
        std::mem::swap(&mut v, &mut u);
    }
    sigma2.sqrt()
}

/// Short two-resolution probe: integrate `n_probe` steps at `dz` and the
/// same distance at `dz / 2`, and return the relative difference of the
/// endpoints.
fn convergence_probe(stencil: &Stencil, initial: &[C64], dz: f64, n_probe: usize) -> f64 {
    let n = initial.len();
    let mut scratch = vec![C64::new(0.0, 0.0); 5 * n];
    let (k1, rest) = scratch.split_at_mut(n);
    let (k2, rest) = rest.split_at_mut(n);
    let (k3, rest) = rest.split_at_mut(n);
    let (k4, tmp) = rest.split_at_mut(n);

    let mut coarse = initial.to_vec();
    for _ in 0..n_probe {
        rk4_step(stencil, dz, &mut coarse, k1, k2, k3, k4, tmp);
    }
    let mut fine = initial.to_vec();
    for _ in 0..2 * n_probe {
        rk4_step(stencil, dz / 2.0, &mut fine, k1, k2, k3, k4, tmp);
    }
    let diff2: f64 = coarse
        .iter()
        .zip(fine.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let ref2: f64 = fine.iter().map(|a| a.norm_sqr()).sum();
    if ref2 == 0.0 {
        return 0.0;
    }
    (diff2 / ref2).sqrt()
}

/// Integrates the state forward, handing every recorded sample to the
/// observer instead of collecting them.
///
/// Samples go out at the initial `z`, every `sample_every`-th step, at the
/// final step, and (on overflow) at the capped state. See [`evolve`] for
/// the collecting variant.
pub fn evolve_observed<F>(
    initial: &LatticeState,
    params: &ModelParams,
    config: &EvolveConfig,
    mut observer: F,
) -> Result<(TrajectoryStatus, IntegratorMeta)>
where
    F: FnMut(&LatticeState),
{
    let n_steps = config.n_steps()?;
    if initial.amps().len() != params.dim() {
        return Err(Error::Validation(format!(
            "initial state length {} does not match lattice dimension {}",
            initial.amps().len(),
            params.dim()
        )));
    }

    let stencil = Stencil::new(params);
    let sigma = operator_norm_estimate(&stencil);
    let meta = IntegratorMeta {
        method: "rk4",
        dz: config.dz,
        n_steps,
        operator_norm_estimate: sigma,
        stability_dz_limit: if sigma > 0.0 { 2.6 / sigma } else { f64::INFINITY },
        convergence_estimate: convergence_probe(
            &stencil,
            initial.amps(),
            config.dz,
            n_steps.min(50),
        ),
    };

    observer(initial);
    let z0 = initial.z();
    let cap2 = config.overflow_cap * config.overflow_cap;
    match max_norm_sqr(initial.amps()) {
        None => return Err(Error::IntegrationFailure { last_z: z0 }),
        Some(m2) if m2 >= cap2 => {
            return Ok((TrajectoryStatus::BlewUp { z_stop: z0 }, meta));
        }
        _ => {}
    }

    let n = params.dim();
    let mut psi = initial.amps().to_vec();
    let mut scratch = vec![C64::new(0.0, 0.0); 5 * n];
    let (k1, rest) = scratch.split_at_mut(n);
    let (k2, rest) = rest.split_at_mut(n);
    let (k3, rest) = rest.split_at_mut(n);
    let (k4, tmp) = rest.split_at_mut(n);

    for step in 1..=n_steps {
        let z_prev = z0 + (step - 1) as f64 * config.dz;
        let z = z0 + step as f64 * config.dz;
        rk4_step(&stencil, config.dz, &mut psi, k1, k2, k3, k4, tmp);

        let m2 = match max_norm_sqr(&psi) {
            None => return Err(Error::IntegrationFailure { last_z: z_prev }),
            Some(m2) => m2,
        };
        if m2 >= cap2 {
            observer(&LatticeState::from_raw(z, psi.clone()));
            return Ok((TrajectoryStatus::BlewUp { z_stop: z }, meta));
        }
        if step % config.sample_every == 0 || step == n_steps {
            observer(&LatticeState::from_raw(z, psi.clone()));
        }
    }
    Ok((TrajectoryStatus::Completed, meta))
}

/// Integrates the state forward and collects the sampled snapshots.
pub fn evolve(
    initial: &LatticeState,
    params: &ModelParams,
    config: &EvolveConfig,
) -> Result<Trajectory> {
    let mut samples = Vec::new();
    let (status, meta) = evolve_observed(initial, params, config, |s| samples.push(s.clone()))?;
    Ok(Trajectory { samples, status, meta })
}

/// Matrix 1-norm (maximum absolute column sum).
fn norm_1(a: &Array2<C64>) -> f64 {
    let mut best = 0.0_f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|x| x.norm()).sum();
        best = best.max(s);
    }
    best
}

/// Dense matrix exponential by degree-13 Pade approximation with scaling
/// and squaring.
fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    use ndarray_linalg::Inverse;

    // Degree-13 Pade coefficients and its validity radius in the 1-norm.
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;

    let n = a.nrows();
    let norm = norm_1(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|x| x / 2.0_f64.powi(s as i32));

    let eye = Array2::<C64>::eye(n);
    let a2 = scaled.dot(&scaled);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let u_inner = a6.mapv(|x| x * B[13]) + a4.mapv(|x| x * B[11]) + a2.mapv(|x| x * B[9]);
    let u_poly = a6.dot(&u_inner)
        + a6.mapv(|x| x * B[7])
        + a4.mapv(|x| x * B[5])
        + a2.mapv(|x| x * B[3])
        + eye.mapv(|x| x * B[1]);
    let u = scaled.dot(&u_poly);

    let v_inner = a6.mapv(|x| x * B[12]) + a4.mapv(|x| x * B[10]) + a2.mapv(|x| x * B[8]);
    let v = a6.dot(&v_inner)
        + a6.mapv(|x| x * B[6])
        + a4.mapv(|x| x * B[4])
        + a2.mapv(|x| x * B[2])
        + eye.mapv(|x| x * B[0]);

    let denom = &v - &u;
    let numer = &v + &u;
    let mut result = denom.inv()?.dot(&numer);
    for _ in 0..s {
        result = result.dot(&result);
    }
    Ok(result)
}

/// Propagates a state by `z_span` using the dense matrix exponential
/// `exp(-i z H)` — exact in the step size, independent of the RK4 route.
///
/// Restricted to lattices of at most [`ORACLE_MAX_CELLS`] unit cells,
/// where the dense exponential is cheap and trustworthy.
pub fn evolve_oracle(
    initial: &LatticeState,
    params: &ModelParams,
    z_span: f64,
) -> Result<LatticeState> {
    if params.n_cells() > ORACLE_MAX_CELLS {
        return Err(Error::OracleSize { max: ORACLE_MAX_CELLS, got: params.n_cells() });
    }
    if initial.amps().len() != params.dim() {
        return Err(Error::Validation(format!(
            "initial state length {} does not match lattice dimension {}",
            initial.amps().len(),
            params.dim()
        )));
    }
    if !z_span.is_finite() {
        return Err(Error::Validation(format!("z_span must be finite, got {z_span}")));
    }
    let h = real_space_operator(params).into_matrix();
    let minus_iz = C64::new(0.0, -z_span);
    let generator = h.mapv(|x| x * minus_iz);
    let propagator = expm(&generator)?;
    let out = propagator.dot(&Array1::from(initial.amps().to_vec()));
    Ok(LatticeState::from_raw(initial.z() + z_span, out.to_vec()))
}

/// Gaussian excitation of the two leg sublattices in antisymmetric
/// combination: `A_n = exp(-(n - center)^2 / (2 sigma^2))`, `C_n = -A_n`,
/// spine dark. Not normalized.
///
/// On a flat-band lattice (`sin phi = 0`, `e_perp = 0`) this pattern
/// projects entirely onto the dispersionless band.
pub fn gaussian_initial(params: &ModelParams, sigma: f64, center: f64) -> Result<LatticeState> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::Validation(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    if !center.is_finite() {
        return Err(Error::Validation(format!("center must be finite, got {center}")));
    }
    let mut state = LatticeState::zero(params);
    {
        let amps = state.amps_mut();
        for n in params.cells() {
            let d = n as f64 - center;
            let g = (-d * d / (2.0 * sigma * sigma)).exp();
            let a = 3 * (n - params.n_min()) as usize;
            amps[a] = C64::new(g, 0.0);
            amps[a + 2] = C64::new(-g, 0.0);
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Leg;
    use std::f64::consts::SQRT_2;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    /// Single uncoupled cell at zero fields: the analytic propagator mixes
    /// the legs through the spine with frequency sqrt(2).
    fn dimer_params() -> ModelParams {
        ModelParams::new(0.0, 0.0, 0.0, 0.0, 0, 0).unwrap()
    }

    fn dimer_analytic(z: f64) -> [C64; 3] {
        let (s, c) = ((SQRT_2 * z).sin(), (SQRT_2 * z).cos());
        [
            C64::new(0.5 + 0.5 * c, 0.0),
            C64::new(0.0, s * SQRT_2 / 2.0),
            C64::new(-0.5 + 0.5 * c, 0.0),
        ]
    }

    #[test]
    fn rk4_matches_single_cell_analytic_solution() {
        let p = dimer_params();
        let mut initial = LatticeState::zero(&p);
        initial.amps_mut()[0] = C64::new(1.0, 0.0);
        let config = EvolveConfig { z_end: 1.0, dz: 0.001, ..EvolveConfig::new(1.0) };
        let traj = evolve(&initial, &p, &config).unwrap();
        assert!(matches!(traj.status, TrajectoryStatus::Completed));
        let fin = traj.last();
        let expect = dimer_analytic(1.0);
        for i in 0..3 {
            assert!(
                close(fin.amps()[i], expect[i], 1e-10),
                "site {i}: {} vs {}",
                fin.amps()[i],
                expect[i]
            );
        }
    }

    #[test]
    fn oracle_matches_single_cell_analytic_solution() {
        let p = dimer_params();
        let mut initial = LatticeState::zero(&p);
        initial.amps_mut()[0] = C64::new(1.0, 0.0);
        let out = evolve_oracle(&initial, &p, 1.0).unwrap();
        let expect = dimer_analytic(1.0);
        for i in 0..3 {
            assert!(close(out.amps()[i], expect[i], 1e-13));
        }
        assert!((out.z() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rk4_agrees_with_the_dense_exponential_oracle() {
        // Non-Hermitian, tilted, transverse-shifted, generic flux: every
        // term of the Hamiltonian is in play.
        let p = ModelParams::new(0.3, 0.05, 0.02, 1.1, -5, 5).unwrap();
        let mut initial = gaussian_initial(&p, 2.0, 0.5).unwrap();
        // Break the special sublattice structure so all bands participate.
        initial.amps_mut()[7] = C64::new(0.3, -0.2);
        let config = EvolveConfig { z_end: 5.0, dz: 0.005, ..EvolveConfig::new(5.0) };
        let traj = evolve(&initial, &p, &config).unwrap();
        let rk4 = traj.last();
        let oracle = evolve_oracle(&initial, &p, 5.0).unwrap();

        let diff2: f64 = rk4
            .amps()
            .iter()
            .zip(oracle.amps().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let ref2: f64 = oracle.amps().iter().map(|a| a.norm_sqr()).sum();
        let rel = (diff2 / ref2).sqrt();
        assert!(rel < 1e-8, "relative deviation {rel}");
    }

    #[test]
    fn rk4_error_scales_as_fourth_order() {
        let p = dimer_params();
        let mut initial = LatticeState::zero(&p);
        initial.amps_mut()[0] = C64::new(1.0, 0.0);
        let expect = dimer_analytic(1.0);

        let err = |dz: f64| -> f64 {
            let config = EvolveConfig { z_end: 1.0, dz, ..EvolveConfig::new(1.0) };
            let traj = evolve(&initial, &p, &config).unwrap();
            traj.last()
                .amps()
                .iter()
                .zip(expect.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let e1 = err(0.02);
        let e2 = err(0.01);
        let ratio = e1 / e2;
        assert!(
            (12.0..20.0).contains(&ratio),
            "halving dz should cut the error ~16x, got {ratio} ({e1} / {e2})"
        );
    }

    #[test]
    fn overflow_cap_stops_amplifying_runs() {
        // Strong gain drives exponential growth; with a small cap the run
        // must stop early and report where.
        let p = ModelParams::new(1.5, 0.0, 0.0, 0.0, -20, 20).unwrap();
        let mut initial = LatticeState::zero(&p);
        let mid = p.site_index(0, Leg::B).unwrap();
        initial.amps_mut()[mid] = C64::new(1.0, 0.0);
        let config = EvolveConfig { overflow_cap: 1e6, ..EvolveConfig::new(50.0) };
        let traj = evolve(&initial, &p, &config).unwrap();
        match traj.status {
            TrajectoryStatus::BlewUp { z_stop } => {
                assert!(z_stop > 0.0 && z_stop < 50.0, "z_stop = {z_stop}");
                let last = traj.last();
                assert!((last.z() - z_stop).abs() < 1e-12);
                assert!(last.max_abs() >= 1e6);
            }
            TrajectoryStatus::Completed => panic!("run should have hit the cap"),
        }
    }

    #[test]
    fn sampling_cadence_and_endpoints() {
        let p = dimer_params();
        let mut initial = LatticeState::zero(&p);
        initial.amps_mut()[0] = C64::new(1.0, 0.0);
        let config = EvolveConfig {
            z_end: 1.0,
            dz: 0.1,
            sample_every: 3,
            overflow_cap: 1e12,
        };
        let traj = evolve(&initial, &p, &config).unwrap();
        let zs: Vec<f64> = traj.samples.iter().map(|s| s.z()).collect();
        assert_eq!(zs.len(), 5);
        for (got, want) in zs.iter().zip([0.0, 0.3, 0.6, 0.9, 1.0]) {
            assert!((got - want).abs() < 1e-12, "sample at {got}, wanted {want}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(EvolveConfig::new(-1.0).n_steps().is_err());
        assert!(EvolveConfig { dz: 0.0, ..EvolveConfig::new(1.0) }.n_steps().is_err());
        assert!(
            EvolveConfig { sample_every: 0, ..EvolveConfig::new(1.0) }
                .n_steps()
                .is_err()
        );
        assert!(
            EvolveConfig { overflow_cap: -3.0, ..EvolveConfig::new(1.0) }
                .n_steps()
                .is_err()
        );
        // 10_000 steps by default.
        assert_eq!(EvolveConfig::new(100.0).n_steps().unwrap(), 10_000);
    }

    #[test]
    fn oracle_rejects_large_lattices() {
        let p = ModelParams::new(0.1, 0.0, 0.0, 0.0, 0, 40).unwrap();
        let initial = LatticeState::zero(&p);
        assert!(matches!(
            evolve_oracle(&initial, &p, 1.0),
            Err(Error::OracleSize { max: 40, got: 41 })
        ));
    }

    #[test]
    fn meta_reports_a_sane_stability_margin() {
        // Hermitian flat-band chain: operator 2-norm is the top band edge
        // 2 sqrt(2).
        let p = ModelParams::new(0.0, 0.0, 0.0, 0.0, -30, 30).unwrap();
        let initial = gaussian_initial(&p, 5.0, 0.0).unwrap();
        let traj = evolve(&initial, &p, &EvolveConfig::new(1.0)).unwrap();
        let sigma = traj.meta.operator_norm_estimate;
        assert!(
            (sigma - 2.0 * SQRT_2).abs() < 0.05,
            "operator norm estimate {sigma}"
        );
        assert!((traj.meta.stability_dz_limit - 2.6 / sigma).abs() < 1e-12);
        assert_eq!(traj.meta.method, "rk4");
        // The convergence probe compares dz with dz/2 over a short window;
        // at dz = 0.01 it must sit far below any tolerance we rely on.
        assert!(traj.meta.convergence_estimate < 1e-10);
    }

    #[test]
    fn gaussian_profile_shape() {
        let p = ModelParams::new(0.05, 0.0, 0.0, 0.0, -20, 20).unwrap();
        let s = gaussian_initial(&p, 5.0, 0.0).unwrap();
        assert_eq!(s.amp(&p, 0, Leg::A).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(s.amp(&p, 0, Leg::C).unwrap(), C64::new(-1.0, 0.0));
        assert_eq!(s.amp(&p, 0, Leg::B).unwrap(), C64::new(0.0, 0.0));
        let tail = s.amp(&p, 5, Leg::A).unwrap();
        assert!((tail.re - (-0.5_f64).exp()).abs() < 1e-15);
        assert!(gaussian_initial(&p, 0.0, 0.0).is_err());
    }

    #[test]
    fn flat_band_gaussian_is_frozen() {
        // The antisymmetric Gaussian lives purely in the dispersionless
        // band at phi = 0: nothing moves, total power is conserved.
        let p = ModelParams::new(0.0, 0.0, 0.0, 0.0, -40, 40).unwrap();
        let initial = gaussian_initial(&p, 6.0, 0.0).unwrap();
        let config = EvolveConfig { z_end: 20.0, ..EvolveConfig::new(20.0) };
        let traj = evolve(&initial, &p, &config).unwrap();
        let p0 = initial.total_power();
        let fin = traj.last();
        assert!((fin.total_power() - p0).abs() / p0 < 1e-10);
        let diff: f64 = fin
            .amps()
            .iter()
            .zip(initial.amps().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10, "flat-band state moved by {diff}");
    }
}
