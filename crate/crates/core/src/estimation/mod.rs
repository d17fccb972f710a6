pub mod fit;
pub mod gbm;
pub mod optimizer;
pub mod recovery;

pub use fit::{aic_compare, fit, FitOptions, FitResult, ModelKind, ParamErrors, RhoMode};
pub use gbm::fit_gbm;
pub use recovery::{monte_carlo_recovery, RecoveryRow, RecoveryTable};
