//! Numerics for semidirect products `H = N ⋊_π G` of finite-dimensional
//! Lie groups: exact evolution of step controls, the factorised evolution
//! and exponential of `H`, product-formula experiments, smooth-vector
//! seminorms and cocycle smoothing.
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod cocycle;
pub mod evolution;
pub mod fit;
pub mod instances;
pub mod linalg;
pub mod lie;
pub mod limits;
pub mod regulated;
pub mod semidirect;

pub use error::{Error, Result};
pub use lie::{AlgebraNorm, AlgebraVector, Coords, GroupElement, GroupKind, LieGroupSpec, C64};
pub use linalg::Matrix;
pub use regulated::RegulatedPath;
pub use semidirect::{Action, HalfLieGroup, HalfLiePoint, HalfLieVector};
