//! Block maxima estimation of GEV parameters and return levels by
//! probability weighted moments.

pub mod asympt;
pub mod blocks;
pub mod error;
pub mod gev;
pub mod pwm;
pub mod quad;
pub mod rng;
pub mod simgen;
pub mod special;
pub mod trend;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/gev.md")]
    struct Gev;
    #[doc = include_str!("../../../book/src/blocks.md")]
    struct Blocks;
    #[doc = include_str!("../../../book/src/fitting.md")]
    struct Fitting;
    #[doc = include_str!("../../../book/src/variance.md")]
    struct Variance;
    #[doc = include_str!("../../../book/src/simulation.md")]
    struct Simulation;
    #[doc = include_str!("../../../book/src/bootstrap.md")]
    struct Bootstrap;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
