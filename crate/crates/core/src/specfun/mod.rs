//! Special functions on the complex plane.

pub mod foxh;
pub mod gamma;
pub mod mittag_leffler;
pub mod power;

pub use foxh::{
    convergence_params, fox_h, fox_h_contour, fox_h_contour_log, fox_h_log, fox_h_series_large,
    fox_h_series_large_log, fox_h_series_small, fox_h_series_small_log, in_sector,
    mittag_leffler_h_spec, plan_contour, ContourPlan, FoxHMethod, FoxHSpec, FoxHValue,
};
pub use gamma::{gamma, gamma_real, ln_gamma, rgamma, rgamma_real};
pub use mittag_leffler::{mittag_leffler, mittag_leffler_eval, MlEvaluation, MlRegime};
pub use power::{power_regularized, power_regularized_eps, Branch, ON_CONE_EPSILON};
