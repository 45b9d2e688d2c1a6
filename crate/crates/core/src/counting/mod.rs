//! The counting function N(lambda), Tauberian smoothings, and the two-term
//! residual diagnostics.

mod kernel;
mod report;
mod staircase;

pub use kernel::SmoothingKernel;
pub use report::{
    convolve_counting, main_constant, quasimode_jump, two_term_report, ConvMode, TwoTermReport,
    WindowStat,
};
pub use staircase::CountingFunction;
