//! Sequential model-based optimization for configurable software.
//!
//! A [`Dataset`] is a table of configurations with measured objectives. The
//! optimizers pick which rows to "measure" through a [`MeasurementOracle`]
//! (a table lookup, or an external benchmark command) and report what they
//! found:
//!
//! * [`flash`]: CART surrogates with Maximum-Mean (one objective) or Bazza
//!   (several objectives) acquisition;
//! * [`baselines`]: progressive sampling, rank-based sampling, ePAL and random
//!   search;
//! * [`metrics`] and [`stats`]: rank difference, MMRE, μRD, GD/IGD and
//!   Scott-Knott ranking;
//! * [`harness`]: repeated experiments with text and CSV reports;
//! * [`synth`]: enumerable test spaces with known optima.

pub mod baselines;
pub mod cart;
pub mod error;
pub mod flash;
pub mod gp;
pub mod harness;
pub mod metrics;
pub mod space;
pub mod stats;
pub mod synth;
pub mod trace;

pub use cart::{CartParams, RegressionTree};
pub use error::{Error, Result};
pub use flash::FlashParams;
pub use space::{
    load_dataset, split, Configuration, ConfigurationId, Dataset, Direction, ExternalCommand, MeasurementOracle,
    ObjectiveSchema, OptionKind, OptionSchema, Split, SplitSpec,
};
pub use trace::{Evaluation, Goal, OptimizationRun, Outcome, Phase, StopReason};
