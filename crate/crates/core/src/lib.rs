//! Energy-efficiency maximization for multiuser MIMO downlinks with movable
//! antennas at both ends, driven by statistical channel knowledge only.
//!
//! The crate evaluates per-user ergodic rates through a deterministic
//! equivalent, builds quadratic lower models of the sum rate, optimizes
//! precoders in closed form and moves antennas by successive convex
//! approximation inside an alternating-optimization loop.

pub mod ao;
pub mod apv_rx;
pub mod apv_tx;
pub mod channel;
pub mod config;
pub mod de;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod mc;
pub mod precoder;
pub mod qp;
pub mod single_user;

pub use error::{Error, Result};
