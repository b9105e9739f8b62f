pub mod artifact;
pub mod basis;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod fem;
pub mod greedy;
pub mod online;
pub mod pod;
pub mod quadrature;
pub mod stochastics;
pub mod thermal_block;
pub mod training;

pub use error::{Error, Result};

// Runs the guide's code blocks as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/thermal-block.md")]
    mod thermal_block {}
    #[doc = include_str!("../../../book/src/distributions.md")]
    mod distributions {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    mod quadrature {}
    #[doc = include_str!("../../../book/src/training-sets.md")]
    mod training_sets {}
    #[doc = include_str!("../../../book/src/weighted-pod.md")]
    mod weighted_pod {}
    #[doc = include_str!("../../../book/src/weighted-greedy.md")]
    mod weighted_greedy {}
    #[doc = include_str!("../../../book/src/online-and-evaluation.md")]
    mod online_and_evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
