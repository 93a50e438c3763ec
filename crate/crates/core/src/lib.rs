//! Geometry kernels for evaluating 3D shape representations.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. The `parallel` feature spreads per-voxel, per-sample and
//! per-pair work over a rayon pool; outputs do not depend on the schedule.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ddpm;
pub mod gen_metrics;
pub mod geometry;
pub mod math;
pub mod par;
pub mod preference;
pub mod recon_metrics;
pub mod reconstruct;
pub mod rng;
pub mod signing;

pub use math::Vec3;
pub use rng::RngSeed;
