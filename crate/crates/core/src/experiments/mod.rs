//! Monte Carlo drivers: IDS estimation, jumps, cluster densities and checks
//! of the continuity bounds. Realizations run in parallel and are reduced in
//! realization order, so results do not depend on the worker count.

mod clusters;
mod convergence;
mod ids;
mod jumps;
mod loghoelder;
mod parallel;
mod params;
mod stats;
mod stollmann;
mod wegner;

pub use clusters::{cluster_density_profile, ClusterDensityProfile};
pub use convergence::{convergence_study, ConvergenceReport};
pub use ids::{estimate_ids, EmpiricalIDS, Estimator};
pub use jumps::{continuity_probe, ids_jump, ids_jumps, JumpEstimate};
pub use loghoelder::{log_hoelder_check, LogHoelderReport, LogHoelderRow};
pub use params::{linspace, Defaults, EnergyPoint, ExperimentParams, Restriction, DEFAULTS};
pub use stats::{mean_stderr, MeanStderr};
pub use stollmann::{stollmann_probe, StollmannRow};
pub use wegner::{wegner_constant, wegner_experiment, WegnerConstant, WegnerReport};
