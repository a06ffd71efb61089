//! Monomial bases, moment and localizing matrices, and assembly of the
//! order-`k` moment relaxation.

mod basis;
mod conic;
mod relaxation;
mod sequence;

pub use basis::{basis_size, monomial_basis, MonomialBasis};
pub use conic::{BlockEntry, ConicProblem, LinearEquality, PsdBlock};
pub use relaxation::{assemble, RelaxationSpec};
pub use sequence::{dirac_moments, localizing_matrix, moment_matrix, MomentSequence};
