//! Model parameters, lattice states, and Hamiltonian assembly.
//!
//! The system is a quasi-one-dimensional diamond chain of optical waveguides
//! with three sites per unit cell: an amplifying leg `A` (on-site gain
//! `+i gamma`), a neutral spinal site `B`, and a dissipative leg `C` (loss
//! `-i gamma`). Balanced gain and loss make the lattice PT-symmetric: the
//! combined operation of parity (swap the `A` and `C` legs about the spine,
//! with a sign flip on every site) and complex conjugation leaves the
//! coupling Hamiltonian invariant.
//!
//! Two synthetic fields dress the chain:
//!
//! * a longitudinal gradient `e_par` adds `e_par * n` to every site of cell
//!   `n` (the spinal `B` site sits half a cell further along and picks up
//!   `e_par * (n + 1/2)`), mimicking a DC field along the chain;
//! * a transverse offset `e_perp` shifts the `A` and `C` legs by `+e_perp`
//!   and `-e_perp` respectively;
//! * a Peierls phase `phi` on the intra-cell couplings threads a synthetic
//!   flux `2 phi` through each plaquette.
//!
//! Light propagation follows the paraxial Schroedinger equation
//! `i d/dz psi = H psi` with the propagation distance `z` playing the role
//! of time. Spectral quantities are reported for `-H`, so that a Bloch wave
//! `exp(i lambda z + i k n)` has propagation constant `lambda`; with this
//! convention a mode whose `lambda` has negative imaginary part grows as
//! `exp(|Im lambda| z)`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance used when checking whether the flux phase sits exactly on one
/// of the special values (0 or pi) required by analytic constructions.
pub(crate) const PHASE_TOLERANCE: f64 = 1e-12;

/// Which of the three sites inside a unit cell a reference points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Leg {
    /// Amplifying leg (on-site `+i gamma`).
    A,
    /// Neutral spinal site between the legs.
    B,
    /// Dissipative leg (on-site `-i gamma`).
    C,
}

impl Leg {
    /// Offset of this leg inside the interleaved `(A, B, C)` cell layout.
    pub fn offset(self) -> usize {
        match self {
            Leg::A => 0,
            Leg::B => 1,
            Leg::C => 2,
        }
    }
}

/// Physical and geometric parameters of a finite diamond chain.
///
/// The lattice spans unit cells `n_min ..= n_max` with open boundaries and
/// the interleaved site ordering `(A_n, B_n, C_n)` per cell. The flux phase
/// is normalized into `[0, 2 pi)` on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    gamma: f64,
    e_par: f64,
    e_perp: f64,
    phi: f64,
    n_min: i64,
    n_max: i64,
}

impl ModelParams {
    /// Validates and stores a parameter set.
    ///
    /// Requires all fields finite, `gamma >= 0`, and `n_min <= n_max`.
    pub fn new(
        gamma: f64,
        e_par: f64,
        e_perp: f64,
        phi: f64,
        n_min: i64,
        n_max: i64,
    ) -> Result<Self> {
        for (name, v) in [
            ("gamma", gamma),
            ("e_par", e_par),
            ("e_perp", e_perp),
            ("phi", phi),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite, got {v}")));
            }
        }
        if gamma < 0.0 {
            return Err(Error::Validation(format!(
                "gamma must be non-negative, got {gamma}"
            )));
        }
        if n_min > n_max {
            return Err(Error::Validation(format!(
                "cell range is empty: n_min = {n_min} > n_max = {n_max}"
            )));
        }
        let phi = phi.rem_euclid(std::f64::consts::TAU);
        Ok(Self { gamma, e_par, e_perp, phi, n_min, n_max })
    }

    /// Gain/loss rate on the `A`/`C` legs.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Longitudinal field strength (on-site gradient along the chain).
    pub fn e_par(&self) -> f64 {
        self.e_par
    }

    /// Transverse field strength (offset between the `A` and `C` legs).
    pub fn e_perp(&self) -> f64 {
        self.e_perp
    }

    /// Flux phase, normalized into `[0, 2 pi)`.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Index of the first unit cell.
    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    /// Index of the last unit cell.
    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    /// Number of unit cells.
    pub fn n_cells(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    /// Total number of sites (three per cell).
    pub fn dim(&self) -> usize {
        3 * self.n_cells()
    }

    /// Iterator over the cell indices `n_min ..= n_max`.
    pub fn cells(&self) -> impl Iterator<Item = i64> {
        self.n_min..=self.n_max
    }

    /// Flat index of site `(n, leg)` in the interleaved layout, or `None`
    /// if the cell lies outside the lattice.
    pub fn site_index(&self, n: i64, leg: Leg) -> Option<usize> {
        if n < self.n_min || n > self.n_max {
            return None;
        }
        Some(3 * (n - self.n_min) as usize + leg.offset())
    }

    /// Whether the flux phase equals the given value up to the internal
    /// phase tolerance (comparison done on the normalized representative).
    pub(crate) fn phi_is(&self, value: f64) -> bool {
        let target = value.rem_euclid(std::f64::consts::TAU);
        let mut d = (self.phi - target).abs();
        // Wrap-around: 2 pi - eps and 0 are the same phase.
        d = d.min(std::f64::consts::TAU - d);
        d <= PHASE_TOLERANCE
    }
}

/// A field configuration on the lattice at a fixed propagation distance.
///
/// Amplitudes are stored interleaved, `(A_n, B_n, C_n)` per cell, matching
/// [`ModelParams::site_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    z: f64,
    amps: Vec<C64>,
}

impl LatticeState {
    /// Wraps an amplitude vector, checking its length against the lattice
    /// and rejecting non-finite entries.
    pub fn new(z: f64, amps: Vec<C64>, params: &ModelParams) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::Validation(format!("z must be finite, got {z}")));
        }
        if amps.len() != params.dim() {
            return Err(Error::Validation(format!(
                "state length {} does not match lattice dimension {}",
                amps.len(),
                params.dim()
            )));
        }
        if !amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::Validation("state contains non-finite amplitudes".into()));
        }
        Ok(Self { z, amps })
    }

    /// The all-zero state at `z = 0`.
    pub fn zero(params: &ModelParams) -> Self {
        Self { z: 0.0, amps: vec![C64::new(0.0, 0.0); params.dim()] }
    }

    pub(crate) fn from_raw(z: f64, amps: Vec<C64>) -> Self {
        Self { z, amps }
    }

    /// Propagation distance this snapshot was taken at.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Interleaved amplitudes, `(A_n, B_n, C_n)` per cell.
    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    /// Mutable access to the amplitudes (length is fixed).
    pub fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    /// Amplitude on site `(n, leg)`, or `None` outside the lattice.
    pub fn amp(&self, params: &ModelParams, n: i64, leg: Leg) -> Option<C64> {
        params.site_index(n, leg).map(|i| self.amps[i])
    }

    /// Total power `sum_i |psi_i|^2`.
    pub fn total_power(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Euclidean norm `sqrt(total_power)`.
    pub fn norm(&self) -> f64 {
        self.total_power().sqrt()
    }

    /// Largest amplitude modulus on the lattice.
    pub fn max_abs(&self) -> f64 {
        self.amps.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// The 3x3 Bloch-space operator `M(k)` of the infinite, untilted chain.
///
/// Its eigenvalues are the propagation constants `lambda(k)` (the spectrum
/// of `-H` restricted to quasimomentum `k`). Only defined for `e_par = 0`;
/// the longitudinal tilt destroys translation invariance.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochOperator {
    k: f64,
    matrix: Array2<C64>,
}

impl BlochOperator {
    /// Quasimomentum this operator was assembled at.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// The dense 3x3 matrix in the `(A, B, C)` basis.
    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// Eigenvalues via the dense complex eigensolver (unsorted).
    pub fn eigenvalues(&self) -> Result<[C64; 3]> {
        use ndarray_linalg::Eig;
        let (vals, _) = self.matrix.eig()?;
        Ok([vals[0], vals[1], vals[2]])
    }
}

/// Assembles the Bloch operator `M(k)` in the `(A, B, C)` basis.
///
/// With `u_minus = exp(-i phi) + exp(-i k)` and
/// `u_plus = exp(i phi) + exp(i k)` the matrix reads
///
/// ```text
///          [ -(e_perp + i gamma)    u_minus               0          ]
///   M(k) = [  u_plus                0                     conj(w)    ]
///          [  0                     w                     e_perp + i gamma ]
/// ```
///
/// with `w = exp(i phi) + exp(-i k)`. Requires `e_par = 0` and finite `k`;
/// `k` outside `[-pi, pi]` is accepted (the operator is 2 pi-periodic).
pub fn bloch_operator(params: &ModelParams, k: f64) -> Result<BlochOperator> {
    if params.e_par != 0.0 {
        return Err(Error::TiltedBloch { e_par: params.e_par });
    }
    if !k.is_finite() {
        return Err(Error::Validation(format!("k must be finite, got {k}")));
    }
    let i = C64::new(0.0, 1.0);
    let eip = (i * params.phi).exp();
    let eim = (-i * params.phi).exp();
    let eik = (i * k).exp();
    let emk = (-i * k).exp();
    let onsite = C64::new(params.e_perp, params.gamma);

    let mut m = Array2::<C64>::zeros((3, 3));
    m[[0, 0]] = -onsite;
    m[[0, 1]] = eim + emk;
    m[[1, 0]] = eip + eik;
    m[[1, 2]] = eim + eik;
    m[[2, 1]] = eip + emk;
    m[[2, 2]] = onsite;
    Ok(BlochOperator { k, matrix: m })
}

/// Dense real-space Hamiltonian `H` of the finite chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSpaceOperator {
    matrix: Array2<C64>,
}

impl RealSpaceOperator {
    /// The dense matrix in the interleaved site basis.
    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// Consumes the wrapper and returns the matrix.
    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    /// Matrix dimension (number of sites).
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Assembles the dense real-space Hamiltonian with open boundaries.
///
/// Per cell `n` the diagonal holds `e_par n + e_perp + i gamma` on `A`,
/// `e_par (n + 1/2)` on `B`, and `e_par n - e_perp - i gamma` on `C`. The
/// spinal site couples to its own cell's legs with phase `-exp(-i phi)`
/// (rows `A`/`C` pick up the conjugate) and to the legs of cell `n + 1`
/// with bare strength `-1`.
pub fn real_space_operator(params: &ModelParams) -> RealSpaceOperator {
    let i = C64::new(0.0, 1.0);
    let eip = (i * params.phi).exp();
    let eim = (-i * params.phi).exp();
    let one = C64::new(1.0, 0.0);
    let dim = params.dim();
    let mut h = Array2::<C64>::zeros((dim, dim));

    for n in params.cells() {
        let a = params.site_index(n, Leg::A).unwrap();
        let b = a + 1;
        let c = a + 2;
        let nf = n as f64;
        h[[a, a]] = C64::new(params.e_par * nf + params.e_perp, params.gamma);
        h[[b, b]] = C64::new(params.e_par * (nf + 0.5), 0.0);
        h[[c, c]] = C64::new(params.e_par * nf - params.e_perp, -params.gamma);

        // Intra-cell couplings through the spinal site.
        h[[a, b]] = -eim;
        h[[b, a]] = -eip;
        h[[c, b]] = -eip;
        h[[b, c]] = -eim;

        // Couplings from spine B_n to the legs of the next cell.
        if let Some(a_next) = params.site_index(n + 1, Leg::A) {
            let c_next = a_next + 2;
            h[[b, a_next]] = -one;
            h[[a_next, b]] = -one;
            h[[b, c_next]] = -one;
            h[[c_next, b]] = -one;
        }
    }
    RealSpaceOperator { matrix: h }
}

/// Matrix-free application of the real-space Hamiltonian.
///
/// Precomputes the per-cell diagonal and the coupling phases so that
/// `apply` runs in O(number of sites) with no allocation. Assembled
/// independently of [`real_space_operator`] so the two routes can be
/// cross-checked in tests.
#[derive(Debug, Clone)]
pub struct Stencil {
    n_cells: usize,
    diag: Vec<C64>,
    eip: C64,
    eim: C64,
}

impl Stencil {
    /// Builds the stencil for the given parameters.
    pub fn new(params: &ModelParams) -> Self {
        let i = C64::new(0.0, 1.0);
        let mut diag = Vec::with_capacity(params.dim());
        for n in params.cells() {
            let nf = n as f64;
            diag.push(C64::new(params.e_par * nf + params.e_perp, params.gamma));
            diag.push(C64::new(params.e_par * (nf + 0.5), 0.0));
            diag.push(C64::new(params.e_par * nf - params.e_perp, -params.gamma));
        }
        Self {
            n_cells: params.n_cells(),
            diag,
            eip: (i * params.phi).exp(),
            eim: (-i * params.phi).exp(),
        }
    }

    /// Number of sites the stencil acts on.
    pub fn dim(&self) -> usize {
        3 * self.n_cells
    }

    /// Stencil of the adjoint `H^dagger`.
    ///
    /// The coupling part of `H` is Hermitian, so the adjoint only flips the
    /// sign of the diagonal gain/loss terms (complex conjugation of the
    /// diagonal).
    pub fn adjoint(&self) -> Self {
        Self {
            n_cells: self.n_cells,
            diag: self.diag.iter().map(|d| d.conj()).collect(),
            eip: self.eip,
            eim: self.eim,
        }
    }

    /// Computes `out = H psi`. Panics if the slice lengths do not match
    /// the lattice dimension.
    pub fn apply(&self, psi: &[C64], out: &mut [C64]) {
        assert_eq!(psi.len(), self.dim(), "input length mismatch");
        assert_eq!(out.len(), self.dim(), "output length mismatch");
        let last = self.n_cells - 1;
        for cell in 0..self.n_cells {
            let a = 3 * cell;
            let (b, c) = (a + 1, a + 2);
            let mut ya = self.diag[a] * psi[a] - self.eim * psi[b];
            let mut yb = self.diag[b] * psi[b] - self.eip * psi[a] - self.eim * psi[c];
            let mut yc = self.diag[c] * psi[c] - self.eip * psi[b];
            if cell > 0 {
                // Legs also couple back to the previous cell's spine.
                let b_prev = 3 * cell - 2;
                ya -= psi[b_prev];
                yc -= psi[b_prev];
            }
            if cell < last {
                // The spine reaches forward to the next cell's legs.
                yb -= psi[a + 3] + psi[c + 3];
            }
            out[a] = ya;
            out[b] = yb;
            out[c] = yc;
        }
    }
}

/// Result of the PT-symmetry check of the assembled Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtReport {
    /// True when the residual is below `1e-12`.
    pub is_pt_symmetric: bool,
    /// Largest entrywise violation `max |H - P conj(H) P|`.
    pub residual: f64,
}

/// Parity index map: `A_n <-> C_n`, `B_n` fixed (the accompanying sign
/// flip on every site cancels between the two factors of `P . P`).
fn parity_index(i: usize) -> usize {
    match i % 3 {
        0 => i + 2,
        2 => i - 2,
        _ => i,
    }
}

/// Checks whether the real-space Hamiltonian commutes with the combined
/// parity-conjugation operation.
///
/// The parity `P` swaps the gain and loss legs about the spine with a sign
/// flip on every site; combined with complex conjugation it must reproduce
/// `H` exactly when the transverse field vanishes. A nonzero `e_perp`
/// breaks the symmetry on the leg diagonals, giving residual `2 e_perp`.
pub fn pt_check(params: &ModelParams) -> PtReport {
    let h = real_space_operator(params).into_matrix();
    let mut residual: f64 = 0.0;
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            let mapped = h[[parity_index(i), parity_index(j)]].conj();
            residual = residual.max((h[[i, j]] - mapped).norm());
        }
    }
    PtReport { is_pt_symmetric: residual < 1e-12, residual }
}

/// Applies the combined parity-conjugation operation to a state:
/// per cell, `(A, B, C) -> (-conj(C), -conj(B), -conj(A))`.
///
/// For a PT-symmetric lattice, evolving the transformed state forward by
/// `z` undoes the evolution that produced `state` at distance `z`.
pub fn parity_conjugate(state: &LatticeState, params: &ModelParams) -> Result<LatticeState> {
    if state.amps.len() != params.dim() {
        return Err(Error::Validation(format!(
            "state length {} does not match lattice dimension {}",
            state.amps.len(),
            params.dim()
        )));
    }
    let mut amps = vec![C64::new(0.0, 0.0); state.amps.len()];
    for cell in 0..params.n_cells() {
        let a = 3 * cell;
        amps[a] = -state.amps[a + 2].conj();
        amps[a + 1] = -state.amps[a + 1].conj();
        amps[a + 2] = -state.amps[a].conj();
    }
    Ok(LatticeState { z: state.z, amps })
}
