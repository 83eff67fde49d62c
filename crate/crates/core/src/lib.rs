pub mod error;
pub mod geometry;
pub mod sampling;
pub mod weights;
pub mod kernels;
pub mod carleson;
pub mod cli;
