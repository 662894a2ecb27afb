//! Collective coupling of multilevel atoms to a single cavity mode.
//!
//! The crate covers angular-momentum algebra for F → F′ transitions
//! ([`levels`]), mean-field dynamics of the driven atom–cavity system
//! ([`meanfield`]), closed-form steady-state spectra ([`spectra`]), the
//! two-transition optical-pumping rate model ([`pumping`]) and parameterized
//! runs of the experiment ([`scenarios`]). All rates are angular frequencies
//! in rad/s.

// NaN must fail range checks, so `!(x > 0.0)` is intended throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod levels;
pub mod meanfield;
pub mod ode;
pub mod output;
pub mod pumping;
pub mod scenarios;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};
