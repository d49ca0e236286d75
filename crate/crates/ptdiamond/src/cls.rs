//! Compact localized states (CLS) of the flat band.
//!
//! When the flux phase is 0 or pi the chain hosts an exactly
//! dispersionless band, and its eigenstates can be chosen with strictly
//! compact support: two neighboring cells with the legs excited in
//! antisymmetric combination (`A` and `C` with opposite signs) plus a small
//! spinal `B` component that balances the on-site gain and loss. These
//! states satisfy `H psi = 0` exactly on the infinite chain and on any
//! finite chain that contains their support away from nothing — the
//! support is compact, so open boundaries do not disturb them as long as
//! both cells fit inside the lattice.
//!
//! Four variants are provided. The plain ones assume `e_perp = 0`; the
//! `EPerp` ones balance a transverse field as well by enlarging the spinal
//! amplitude to `(e_perp + i gamma) A0`. The construction itself never
//! depends on the longitudinal tilt: with `e_par = 0` the result is an
//! exact null mode (certified by [`cls_residual`]), while with `e_par != 0`
//! the same amplitude pattern serves as the launch state of the tilted
//! propagation scenarios.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{LatticeState, Leg, ModelParams, Stencil};

/// Which analytic two-cell null mode to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClsVariant {
    /// Flux phase 0, `e_perp = 0`: legs `(+A0, -A0)` on both cells, spine
    /// `i gamma A0`.
    TwoSitePhi0,
    /// Flux phase pi, `e_perp = 0`: leg signs alternate between the two
    /// cells, spine `-i gamma A0`.
    TwoSitePhiPi,
    /// Flux phase 0 with a transverse field: spine `(e_perp + i gamma) A0`.
    TwoSitePhi0EPerp,
    /// Flux phase pi with a transverse field: spine
    /// `-(e_perp + i gamma) A0`.
    TwoSitePhiPiEPerp,
}

impl ClsVariant {
    fn phi_value(self) -> f64 {
        match self {
            ClsVariant::TwoSitePhi0 | ClsVariant::TwoSitePhi0EPerp => 0.0,
            ClsVariant::TwoSitePhiPi | ClsVariant::TwoSitePhiPiEPerp => std::f64::consts::PI,
        }
    }

    fn requires_zero_e_perp(self) -> bool {
        matches!(self, ClsVariant::TwoSitePhi0 | ClsVariant::TwoSitePhiPi)
    }
}

/// Recipe for building a compact localized state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClsSpec {
    pub variant: ClsVariant,
    /// Leg amplitude scale (must be nonzero).
    pub a0: C64,
    /// Index of the left cell of the two-cell support.
    pub anchor: i64,
}

/// Builds the requested compact localized state at `z = 0`.
///
/// Fails when the model's flux phase does not match the variant, when a
/// plain variant is used with `e_perp != 0`, when `a0 = 0`, or when the
/// two support cells `anchor` and `anchor + 1` do not both lie inside the
/// lattice.
pub fn build_cls(spec: &ClsSpec, params: &ModelParams) -> Result<LatticeState> {
    let variant = spec.variant;
    if !params.phi_is(variant.phi_value()) {
        return Err(Error::ClsMismatch(format!(
            "variant {:?} requires flux phase {}, model has {}",
            variant,
            variant.phi_value(),
            params.phi()
        )));
    }
    if variant.requires_zero_e_perp() && params.e_perp() != 0.0 {
        return Err(Error::ClsMismatch(format!(
            "variant {:?} requires e_perp = 0, model has {}",
            variant,
            params.e_perp()
        )));
    }
    if spec.a0 == C64::new(0.0, 0.0) {
        return Err(Error::Validation("a0 must be nonzero".into()));
    }
    let s = spec.anchor;
    if params.site_index(s, Leg::A).is_none() || params.site_index(s + 1, Leg::A).is_none() {
        return Err(Error::Validation(format!(
            "support cells {s} and {} must lie within [{}, {}]",
            s + 1,
            params.n_min(),
            params.n_max()
        )));
    }

    let a0 = spec.a0;
    let onsite = C64::new(params.e_perp(), params.gamma());
    let mut state = LatticeState::zero(params);
    {
        let amps = state.amps_mut();
        let left = params.site_index(s, Leg::A).unwrap();
        let right = params.site_index(s + 1, Leg::A).unwrap();
        match variant {
            ClsVariant::TwoSitePhi0 | ClsVariant::TwoSitePhi0EPerp => {
                amps[left] = a0;
                amps[left + 2] = -a0;
                amps[right] = a0;
                amps[right + 2] = -a0;
                amps[left + 1] = onsite * a0;
            }
            ClsVariant::TwoSitePhiPi | ClsVariant::TwoSitePhiPiEPerp => {
                amps[left] = a0;
                amps[left + 2] = -a0;
                amps[right] = -a0;
                amps[right + 2] = a0;
                amps[left + 1] = -onsite * a0;
            }
        }
    }
    Ok(state)
}

/// Relative null-mode residual `||H psi|| / ||psi||`.
///
/// Zero (to machine precision) certifies that `state` is an exact
/// eigenstate of the flat band. Requires `e_par = 0` — with a tilt the
/// residual would measure the drive strength, not a construction error —
/// and a nonzero state.
pub fn cls_residual(state: &LatticeState, params: &ModelParams) -> Result<f64> {
    if params.e_par() != 0.0 {
        return Err(Error::Validation(format!(
            "null-mode residual is only defined at e_par = 0, got {}",
            params.e_par()
        )));
    }
    if state.amps().len() != params.dim() {
        return Err(Error::Validation(format!(
            "state length {} does not match lattice dimension {}",
            state.amps().len(),
            params.dim()
        )));
    }
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::Validation("residual of the zero state is undefined".into()));
    }
    let stencil = Stencil::new(params);
    let mut image = vec![C64::new(0.0, 0.0); params.dim()];
    stencil.apply(state.amps(), &mut image);
    let image_norm = image.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Ok(image_norm / norm)
}
