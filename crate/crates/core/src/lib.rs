//! Agent-based Monte Carlo simulator of open strategy-making.
//!
//! A firm and `S - 1` stakeholders search correlated NK performance landscapes.
//! Every episode each practitioner proposes one nearby strategy, minisum
//! approval voting shortlists `L` candidates, and a Borda vote over the
//! shortlist plus the status quo picks the firm's next strategy.
//!
//! Modules, bottom-up: [`bitspace`], [`correlation`], [`landscape`],
//! [`practitioner`], [`voting`], [`engine`], [`stats`], [`cli`].

pub mod bitspace;
pub mod cli;
pub mod correlation;
pub mod engine;
mod error;
pub mod landscape;
pub mod practitioner;
pub mod stats;
pub mod voting;

pub use bitspace::{hamming_distance, neighborhood, Strategy};
pub use engine::{run_repetition, run_scenario_grid, EpisodeRecord, ScenarioConfig};
pub use error::{Error, Result};
pub use stats::{aggregate, AggregatePoint};
