//! Semi-grant-free (SGF) NOMA uplink transmission.
//!
//! A grant-based user `U0` owns a resource block; `M` grant-free users are
//! admitted to it opportunistically, either by comparing their channel gain
//! with a broadcast threshold (open loop) or by an ideal backoff contention
//! that picks the extreme user (distributed contention control). Successive
//! interference cancellation decodes `U0` first (Type I) or last (Type II).
//!
//! The crate provides:
//! - [`channel`]: fading draws and densities of ordered/truncated/summed gains,
//! - [`protocol`]: per-realization admission, SIC rates and outage events,
//! - [`analytics`]: closed-form, asymptotic and limiting outage expressions,
//! - [`quadrature`]: numerical outage of the Type I open-loop grant-free users,
//! - [`montecarlo`]: reproducible parallel outage estimation,
//! - [`experiment`]: sweep recipes, config files and CSV/SVG output.

pub mod analytics;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod integrate;
pub mod montecarlo;
pub mod precision;
pub mod protocol;
pub mod quadrature;
mod special;

pub use analytics::{AnalyticValue, Analytics, Method, Regime};
pub use channel::{ChannelRealization, TruncSide, TruncatedExpSpec};
pub use config::{db_to_linear, linear_to_db, sinr_threshold, SystemConfig};
pub use error::{Error, Result};
pub use experiment::{recipe, ExperimentSpec, MetricKind, Row, RECIPES};
pub use montecarlo::{Axis, Estimator, Metric, OutageEstimate, Probe};
pub use precision::Precision;
pub use protocol::{AdmissionDecision, Scheme, SicOrder, TrialOutcome};
pub use quadrature::QuadratureOptions;

