//! Monte Carlo experiments, the exact small-size risk oracle and result files.

pub mod config;
pub mod exhaustive;
pub mod experiment;
pub mod output;

pub use config::{ExperimentConfig, Plan};
pub use exhaustive::{exhaustive_risk, exhaustive_risk_polynomial, RiskPolynomial, EXHAUSTIVE_MAX_N};
pub use experiment::{run_experiment, RiskEstimate};
pub use output::{emit_results, parse_results, read_results, write_results, OutputFormat, CSV_HEADER};
