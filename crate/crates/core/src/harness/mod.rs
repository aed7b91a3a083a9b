//! Scenario configuration, Monte Carlo execution, parameter sweeps, CSV
//! output and the self-check instruments.

pub mod checks;
mod config;
mod output;
pub mod presets;
mod run;

pub use config::{
    dbm_to_watts, near_square, watts_to_dbm, ArrayConfig, LinkBudgetConfig, LinkConfig, LinksConfig, PanelConfig,
    PhysicsConfig, RisConfig, ScenarioConfig, SweepConfig, SweepParam, UserPathConfig, DEFAULT_P_TX_DBM,
};
pub use output::{
    mean_std, read_csv, summarize, write_csv, write_gnuplot, write_summary, RunMetadata, SummaryRow, CSV_COLUMNS,
};
pub use run::{
    map_indexed, run_configured, run_monte_carlo, run_trial, sweep, Execution, ResultRow, RunOptions, TrialOutcome,
    WORKERS_ENV,
};
