//! Instance generation, factorization runs and check suites behind the
//! `gaugefactor` binary.

pub mod generate;
pub mod run;
pub mod schema;

pub use generate::{AValue, NormChoice, RunConfig};
pub use schema::MeasureFile;
