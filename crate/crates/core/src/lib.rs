//! Adiabatic RF-dressed potentials for atoms in static magnetic traps.
//!
//! An atom moving through an inhomogeneous static field while irradiated by
//! one or more radio-frequency fields experiences an effective potential set
//! by the locally dressed spin levels. This crate computes those potentials
//! two ways and lets them be compared on identical grids:
//!
//! * [`piecewise`] — the nearest-resonance two-level model with Stark-shift
//!   corrections from the remaining off-resonant tones,
//! * [`floquet`] — non-perturbative quasi-energy spectra from truncated
//!   single-mode and two-mode Floquet matrices,
//!
//! with [`tracker`] extracting continuous potential curves and sheets from
//! per-point eigendecompositions by eigenvector-overlap continuation, and
//! [`gpe`] evolving a two-dimensional condensate in the resulting (possibly
//! time-interpolated) potentials.
//!
//! All energies are stored as angular frequencies (energy over ħ, rad/s),
//! magnetic fields in tesla and positions in metres.

pub mod fields;
pub mod floquet;
pub mod gpe;
pub mod piecewise;
pub mod tracker;
