//! Numerical toolkit for the heat equation on `[0, π]` with the nonlocal
//! thermostat feedback `u_x(0) = tanh(β u(π))`, `u_x(π) = 0`.

pub mod cli;
pub mod error;
pub mod export;
pub mod frequency;
pub mod kernel;
pub mod pde;
pub mod series;
pub mod solve;
pub mod spectrum;
pub mod volterra;

pub use error::{Error, Result};
pub use kernel::InitialData;
pub use series::SeriesPolicy;
