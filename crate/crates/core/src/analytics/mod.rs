//! Closed forms, the representative-agent reference, regime diagnostics,
//! critical-time estimation and network scaling.

mod best_response;
mod closed_form;
mod rck;
mod regime;
mod scaling;
mod tau_c;
mod timeseries;

pub use best_response::{best_response, best_response_curve, BestResponse, BestResponseRow};
pub use closed_form::{
    aggregate_capital_closed_form, consumption_at_horizon, ds_criterion, golden_rule, rho_of_tau, s_star_tau,
    steady_capital, tau_of_rho, AggregatePoint, HorizonSetup, RckSteadyState,
};
pub use rck::{rck_reference_trajectory, rck_vector_field, PathPoint, RckReference};
pub use regime::{
    classify_ensemble, classify_regime, classify_trajectory, find_modes, savings_histogram, Mode, Regime,
    RegimeConfig, RegimeReport,
};
pub use scaling::{
    ensemble_graph_statistics, er_topology, scaling_fit, scaling_study, ScalingCell, ScalingFit, ScalingPoint,
    ScalingStudy,
};
pub use tau_c::{
    bisect_transition, ensemble_probe, estimate_tau_c, BisectionConfig, Probe, ProbeConfig, TauCEstimate,
};
pub use timeseries::{
    autocorrelation, detrend, lead_lag, orbit_signed_area, oscillation_period, PeriodConfig, PeriodEstimate,
};
