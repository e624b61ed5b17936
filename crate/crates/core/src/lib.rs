//! Exact computational machinery for orbits of finite groups of Lie type on
//! totally singular subspaces: small finite fields, dense exact linear
//! algebra, quadratic spaces, group-order arithmetic, explicit module
//! constructions (including the Clifford/half-spin apparatus), and a
//! canonical-form BFS orbit engine.

pub mod casemods;
pub mod clifford;
pub mod error;
pub mod gf;
pub mod lietype;
pub mod linalg;
pub mod orbits;
pub mod quadspace;

pub use error::{Error, Result};
