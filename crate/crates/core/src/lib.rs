//! Polyhedral normed spaces, Minkowski gauges, the interpolation renorming
//! `||x||_K = sqrt(sum_n ||x||_n^2)` with `K_n = a^n K + a^-n B_X`, and its
//! application to vector measures on finite atom spaces.

pub mod dfjp;
pub mod error;
pub mod factor;
pub mod gauge;
pub mod l1m;
pub mod lp;
pub mod measure;
pub mod report;
pub mod space;

pub use dfjp::{a_bar, a_bar_default, c_constant, f_of_a, DfjpParams, DfjpSpace, Factorization};
pub use error::{Error, Result};
pub use factor::{check_measure, factor_im, factor_iinfty, CheckOptions, FactoredMeasure, MeasureChecks};
pub use gauge::ConvexBody;
pub use l1m::{FunctionSpace, SimpleFunction};
pub use measure::{AtomSet, ScalarMeasure, Semivariation, VectorMeasure};
pub use report::{CheckReport, ClaimResult, Scope, Status};
pub use space::{LinearMap, NormEval, NormKind, NormedSpace};
