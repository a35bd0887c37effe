//! Ray, diffraction and full-wave models of a two-dimensional microwave
//! billiard built from a flat wall and a circular-arc reflector.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod gtd;
pub mod helmholtz;
pub mod raytrace;
pub mod special;

pub use error::{Error, Result};
