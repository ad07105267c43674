//! Covariograms, cross covariograms, chord transforms and the zero branches
//! of Fourier-Laplace ray transforms of planar convex bodies.

pub mod asymptotics;
pub mod clip;
pub mod covariogram;
pub mod error;
pub mod fourier_laplace;
pub mod geometry;
pub mod oracles;
pub mod quadrature;
pub mod radon;

pub use error::{Error, Result};
pub use geometry::{Body, BodySpec, Direction, Disk, FamilyParams, Polygon, Segment, SupportBody, Transform, Vec2};
