//! Product systems of Hilbert spaces built from inclusion systems, CP
//! semigroups and amalgamated units.

pub mod amalgam;
pub mod cp;
pub mod dyadic;
pub mod error;
pub mod inclusion;
pub mod index;
pub mod limits;
pub mod linalg;

pub use dyadic::DyadicTime;
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, Tolerance, C64};
