//! Numerical model of a resonant-beam optical link that carries data and
//! power to a photovoltaic receiver.
//!
//! The chain runs from the pump diode drive current through the resonant
//! cavity to the PV panel's DC operating point, then through the
//! small-signal receiver network to per-subchannel SNR and Shannon capacity.

// `!(x > 0.0)` is used on purpose so that NaN fails parameter checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod constants;
pub mod error;
pub mod link;
pub mod network;
pub mod noise;
pub mod parallel;
pub mod pump;
pub mod pv_ac;
pub mod pv_dc;
pub mod roots;
pub mod system;

pub use error::{Error, Result};
