pub mod kalman;
pub mod spectral;

pub use kalman::{exact_log_likelihood, kalman_filter, kalman_filter_with, kalman_log_likelihood, KalmanResult, Prior};
pub use spectral::{
    spectral_decompose, spectral_log_likelihood, LikelihoodOptions, LogLikelihood, SpectralDecomposition,
    SpectralLikelihood,
};
