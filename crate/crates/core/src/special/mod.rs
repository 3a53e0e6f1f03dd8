//! Gamma-family functions, hypergeometric series and the Meijer G-function.

pub mod complex_gamma;
pub mod gamma;
pub mod hypergeometric;
pub mod meijer;

pub use gamma::{binomial, exp_integral_e1, gamma_fn, gamma_upper, gamma_upper_recurrence, ln_gamma, poch, rgamma};
pub use hypergeometric::{hyp_pfq, hyp_pfq_regularized, hyp_pfq_with, SeriesConfig, SeriesSum};
pub use meijer::{
    meijer_g, meijer_g_mellin_barnes, meijer_g_slater, meijer_g_with, MeijerConfig, MeijerMethod, MeijerParams,
    MeijerValue,
};
