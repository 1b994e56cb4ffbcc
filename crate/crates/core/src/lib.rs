//! Numerics for finite quasi-metric measure spaces.
//!
//! The crate covers quasi-metric constants and set operations ([`space`]),
//! power-chain regularization ([`regularize`]), measure-geometric
//! diagnostics ([`geometry`]), parametric example spaces ([`generators`]),
//! Hajłasz-type Sobolev, Triebel–Lizorkin and Besov seminorms as
//! minimal-gradient programs ([`norms`]), compactness certificates and
//! witnesses ([`compactness`]), and the named experiments that tie them
//! together ([`experiments`]).

pub mod compactness;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod io;
pub mod geometry;
pub mod norms;
pub mod regularize;
pub mod space;

pub use error::{Error, Result};
pub use space::{FiniteQMMSpace, FunctionOnSpace, Ball, Metric};
