pub mod combinatorics;
pub mod error;
pub mod factorization;
pub mod numeric;
pub mod operators;
pub mod optimality;
pub mod precision;
pub mod spectral;
pub mod weights;

pub use error::{LabError, Result};
pub use precision::{Ext, Precision};
