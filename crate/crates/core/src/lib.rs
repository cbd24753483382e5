pub mod analytic;
pub mod error;
pub mod factorization;
pub mod flows;
pub mod fourier;
pub mod grid;
pub mod hermite;
pub mod magnus;
pub mod order;
pub mod problem;
pub mod propagator;
pub mod schemes;
pub mod state;

pub use error::{Error, Result};
pub use grid::Grid;
pub use magnus::MagnusOrder;
pub use propagator::{MethodSpec, Propagator, Split};
pub use problem::{Perturbation, Problem, TimeFunction};
pub use schemes::SplittingScheme;
pub use state::{NormWeighting, WaveState};
