//! Randomized Cantor constructions carrying an embedded arithmetic
//! progression, with exact and numerical checks of their Fourier decay,
//! additive energy and restriction norms.

pub mod bspline;
pub mod construction;
pub mod dft;
pub mod energy;
pub mod error;
pub mod level;
pub mod norms;
pub mod ntt;
pub mod params;
pub mod spectral;
pub mod thresholds;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use construction::{build_construction, Construction};
pub use error::{Error, Result};
pub use level::LevelSet;
pub use params::{derive_params, ConstructionParams, ParamOverrides};
