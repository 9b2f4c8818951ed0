//! Quasi-polynomial spaces, their fundamental operators and bispectral duals,
//! Bethe equations and the (gl_N, gl_M) duality of Gaudin models.

pub mod baker;
pub mod bethe;
pub mod diffop;
pub mod error;
pub mod field;
pub mod gaudin;
pub mod generators;
pub mod io;
pub mod laurent;
pub mod linalg;
pub mod poly;
pub mod qp;
pub mod ratfn;
pub mod roots;
pub mod spaces;
pub mod transform;

pub use error::{Error, Result};
pub use field::{Approx, Exact, Field, Scalar};
pub use poly::Poly;
pub use ratfn::RatFn;
