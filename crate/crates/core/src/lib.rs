//! Landau-Zener transition probabilities and transition times.
//!
//! * [`specialfn`]: complex log-gamma and the crossing-point phase χ(ω).
//! * [`model`]: scaled model, exact values at the crossing and at infinity,
//!   basis rotation.
//! * [`approx`]: closed-form evolutions before and after the crossing.
//! * [`times`]: jump and relaxation times in both bases.
//! * [`engine`]: numerical probabilities from the inversion equations, a
//!   Schrödinger oracle, and numeric time measurement.
//! * [`cli`]: the `lztimes` command-line front end.

pub mod approx;
pub mod cli;
pub mod engine;
pub mod model;
pub mod specialfn;
pub mod times;
