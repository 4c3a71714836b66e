//! Exact-arithmetic toolkit for positivity and stability questions on
//! blow-ups of a quadric surface along a bi-degree (1,2) curve.
//!
//! The crate is organized bottom-up:
//!
//! * [`rat`] — arbitrary-precision rationals serialized as `p/q`.
//! * [`lattice`] — the Picard lattice, intersection pairing, curve catalog
//!   and named divisor classes for each model in the family.
//! * [`positivity`] — nef/ample tests, exact Zariski decomposition, volumes,
//!   and effective/ample thresholds along rays by chamber walking.
//! * [`vanishing`] — piecewise-quadratic volume profiles, their exact
//!   integrals as vanishing-order bounds, and the finite-level filtration
//!   sums on the unblown surface that validate them.
//! * [`lc_local`] — local log-canonicity: intersection-number criteria and
//!   an independent blow-up oracle on clusters of infinitely-near points,
//!   with a fuzz harness pitting one against the other.
//! * [`kstab`] — the certificate pipeline: evaluates the full inequality
//!   chain for the stability lower bound `1 + beta/100` at a concrete
//!   `(r, beta)` and emits a machine-checkable verdict with exact slacks.

#![allow(clippy::result_large_err)]

pub mod kstab;
pub mod lattice;
pub mod lc_local;
pub mod positivity;
pub mod rat;
pub mod vanishing;

pub use lattice::{
    CurveLabel, CurveRecord, CurveRole, DivisorClass, ModelError, ModelParams, PointLabel,
    SurfaceModel,
};
pub use positivity::{
    is_ample, is_nef, pseff_threshold, seshadri, volume, zariski, PositivityError,
    PositivityReport, ThresholdOutcome, ZariskiDecomposition, ZariskiOutcome,
};
pub use rat::{rat, Rat};
