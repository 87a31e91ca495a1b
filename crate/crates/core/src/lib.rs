pub mod apps;
pub mod augmented;
pub mod bethe;
pub mod count;
pub mod error;
pub mod exec;
pub mod forms;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod validation;

pub use bethe::{BetheSolution, OdeSpec, RootConfig, SolverConfig};
pub use error::{QesError, Result};
pub use exec::Execution;
pub use poly::{ComplexPoly, C64};
