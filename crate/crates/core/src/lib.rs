//! Numerical workbench for semiclassical imaging of quantum wavepackets.
//!
//! The crate connects three layers that are usually studied separately:
//!
//! * exact quantum evolution of one-dimensional wavepackets on FFT grids
//!   ([`qprop`], [`wavefunction`]),
//! * classical trajectories with actions and stability (tangent) maps
//!   ([`classical`]),
//! * the semiclassical reconstruction that reads a detected position
//!   distribution as an image of the initial momentum distribution, carried
//!   along classical trajectories ([`imaging`]).
//!
//! [`harness`] packages reference scenarios and turns the comparison between
//! the layers into deterministic metric tables.
//!
//! Everything is in explicit units ([`units::Units`], atomic units by
//! default) and every operation returns [`error::ItwError`] instead of
//! panicking on bad input or numerical trouble.

pub mod classical;
pub mod error;
pub mod grid;
pub mod harness;
pub mod imaging;
pub mod potential;
pub mod qprop;
pub mod units;
pub mod wavefunction;

pub use error::{ItwError, Result};
pub use units::Units;
