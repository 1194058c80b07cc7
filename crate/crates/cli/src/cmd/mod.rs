pub mod bootstrap;
pub mod fit;
pub mod simulate;
pub mod variance;
