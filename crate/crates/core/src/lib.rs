//! Lower bounds on the speed of hidden superluminal influences ("v-causal"
//! models) from long-distance Bell experiments.
//!
//! The core result is [`eval_bound`]: given the path-mismatch ratio ρ, the
//! measurement duration δt and a candidate preferred frame (β, χ), it returns
//! the smallest reduced signal speed β_t compatible with seeing Bell
//! correlations at every moment of the campaign.
//!
//! Modules:
//! - [`bound`]: the closed-form bound, its δt → 0 limit and regime threshold.
//! - [`kinematics`]: Lorentz boosts, the rotating baseline and sky coverage.
//! - [`budget`]: path-equalization error budget and coherence length.
//! - [`schedule`]: standard and split-days measurement plans.
//! - [`sim`]: event-level Monte Carlo of a Bell campaign.
//! - [`scan`]: named presets, curve sweeps and frame scans.
//! - [`config`] and [`cli`]: JSON configs and the command-line front end.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound;
pub mod budget;
pub mod cli;
pub mod config;
pub mod consts;
pub mod error;
pub mod kinematics;
pub mod scan;
pub mod schedule;
pub mod sim;
pub mod units;

pub use bound::{eval_bound, eval_bound_fast_limit, regime_threshold_dt, BoundInputs, ChiPolicy, PreferredFrame, Regime};
pub use budget::{coherence_length, combine_quadrature, effective_rho, OpticalBudget};
pub use config::{SimulationFile, SimulationRun, SimulationSetup};
pub use error::{Error, Result};
pub use kinematics::{inaccessible_fraction, FrameDirection, MovingFrame, SiteGeometry};
pub use scan::{preset, ExperimentPreset, PresetName};
pub use schedule::{build_split_days, build_standard, MeasurementSchedule};
pub use sim::{simulate_campaign, SourceModel, TachyonHypothesis};
