//! Verification routes that share no solver code with [`crate::bethe`].

mod coeff_system;
mod sl2;

pub use coeff_system::{coeff_system_solve, forced_c2, OracleSolution, MAX_ORACLE_DEGREE};
pub use sl2::{apply_h, build_sl2_matrix, sl2_solutions, sl2_spectrum, Sl2Matrix, Sl2Solution, DEPENDENCE_TOL};
