//! Super-geometry toolkit: Grassmann arithmetic, superfunctions and Berezin
//! integration, the 1D toy model and the 2D supersymmetric sigma model on a
//! flat torus, with the checks around them.

pub mod berezin;
pub mod cli_reports;
pub mod deformations;
pub mod error;
pub mod fixtures;
pub mod grassmann;
pub mod grid;
pub mod sigma2d;
pub mod spin_surface;
pub mod superdomain;
pub mod toy_model;

pub use error::{Error, Result};
pub use grassmann::{GrassmannNumber, Parity};
pub use grid::{Grid, GridField};
