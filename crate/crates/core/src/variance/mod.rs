//! Monte Carlo campaigns: variance curves, growth fits, effective Hamiltonian
//! and the end-to-end Talagrand ratio.

mod campaign;
mod config;
mod fit;
mod hamiltonian;
mod seed;
mod stats;
mod talagrand;

pub use campaign::{run_campaign, write_samples_csv, CampaignResult, SampleRecord, ShiftPoint, SurveyPoint, SurveySummary};
pub use config::{CampaignConfig, KineticConfig, ModelConfig};
pub use fit::{fit_growth, fit_points, log_trend, GrowthModel, GrowthReport, ModelFit, Trend};
pub use hamiltonian::{effective_hamiltonian, HamiltonianEstimate, RatePoint};
pub(crate) use seed::TAG_BOOTSTRAP;
pub use seed::{sample_seed, splitmix64, stream_seed};
pub use stats::{bootstrap, mean, percentile_ci, unbiased_variance, CurvePoint, VarianceCurve};
pub use talagrand::{talagrand_ratio, TalagrandPoint, TalagrandReport};
