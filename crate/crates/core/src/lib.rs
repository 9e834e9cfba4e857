//! Weighted-graph approximations of post-critically finite self-similar fractals.
//!
//! A fractal is described by a [`FractalSpec`]: the number of maps, the boundary, the
//! level-1 glue relation, renormalisation factors and level-0 conductances. From it
//! [`Model`] builds the graphs `G_m`, their energies and vertex masses, and the
//! spectral and quasi-unitarity routines work on top of that.
//!
//! ```
//! use fractal_spectra::{spectral, Model};
//!
//! let sg = Model::preset("sg").unwrap();
//! let res = spectral::eigensolve(&sg, 3, &spectral::EigenOptions::new(4)).unwrap();
//! assert!(res.eigenvalues[0].abs() < 1e-10);
//! ```

pub mod cli;
pub mod energy;
pub mod error;
pub mod ifs;
pub mod linalg;
pub mod measure;
pub mod model;
pub mod presets;
pub mod quasiuni;
pub mod spectral;

pub use error::{Error, Result};
pub use ifs::{ApproxGraph, FractalInfo, FractalSpec};
pub use measure::MeasureSpec;
pub use model::Model;
