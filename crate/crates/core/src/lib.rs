//! Doubly connected rotating vortex patches (V-states) of the planar Euler
//! equations: bifurcation speeds from the annulus, a Fourier–Newton solver
//! for the boundary equations, and continuation in the angular velocity.

pub mod cli;
pub mod continuation;
pub mod contour;
pub mod dispersion;
pub mod io;
pub mod quadrature;
pub mod render;
pub mod residual;
pub mod solver;
pub mod validate;
