#![allow(clippy::needless_range_loop)]

pub mod ale;
pub mod analytic;
pub mod curvature;
pub mod error;
pub mod hierarchy;
pub mod legendre;
pub mod linalg;
pub mod plebanski;
pub mod twistor;

pub use error::{Error, Result};
