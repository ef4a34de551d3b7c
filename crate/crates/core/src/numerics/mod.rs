//! Numerical kernels shared by the channel models, the analytic chain and
//! the test harnesses.

mod ks;
mod optimize;
mod special;
mod summation;

pub use ks::ks_statistic;
pub use optimize::{golden_section_max, Maximum};
pub use special::{
    gamma_lower_regularized, gamma_p_series, gamma_q_continued_fraction,
    gamma_upper_regularized, ln_gamma, log_binomial, MAX_ITERATIONS,
};
pub use summation::SummationAccumulator;
