pub mod filter;
pub mod premium;
pub mod smoother;

pub use filter::{burn_in, filter_endpoint, filter_endpoint_with, filter_track, FilterState};
pub use premium::{risk_premium, risk_premium_with, PremiumSeries};
pub use smoother::{smooth_path, smooth_path_continuum, SmootherResult};
