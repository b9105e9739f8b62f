//! Univariate rule families on `[1, 3]` and their multivariate assembly as
//! full tensor products or Smolyak sparse grids.

mod multi;
mod univariate;

pub use multi::{full_tensor, integrate, smolyak, MultiKind, MultiRule, DEFAULT_NODE_BUDGET};
pub use univariate::{clenshaw_curtis, gauss_jacobi, gauss_legendre, RuleFamily, UnivariateRule};
