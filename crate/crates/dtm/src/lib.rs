//! Deterministic simulator of a vehicular data-trading market.
//!
//! Connected vehicles observe a traffic incident inside a point-queue grid
//! simulation, sell the observation to a signal controller through a
//! fee-bearing ledger with alternating-offers negotiation, and the
//! controller's data-driven green reallocation is valued by the measured
//! change in average waiting time. Agent decisions come from a deterministic
//! rule policy or an OpenAI-compatible function-calling endpoint (with an
//! offline mock for tests).
//!
//! The `examples/` directory has one runnable program per capability; the
//! `dtm` binary wraps the same library calls behind `run`, `sweep`,
//! `oracle`, `replay` and `validate` subcommands.
//!
//! # A complete run
//!
//! ```
//! use dtm::config::ScenarioConfig;
//! use dtm::harness::run_once;
//!
//! let output = run_once(&ScenarioConfig::default()).unwrap();
//! assert!(output.report.improvement_pct > 0.0);
//! ```

pub mod agents;
pub mod config;
pub mod currency;
pub mod error;
pub mod harness;
pub mod llm;
pub mod market;
pub mod metrics;
pub mod negotiation;
pub mod traffic;

pub use currency::Currency;
pub use error::Error;
