//! Parameter sweeps, tables and the self-test behind the command-line tool.

mod commands;
mod report;
mod selftest;

pub use commands::Harness;
pub use report::{parse_csv_rows, OutputFormat, Row, RunReport, CSV_HEADER};
pub use selftest::{
    gue_link_worst, oracle_vs_egf_worst, radius_independence_worst, selftest, CheckOutcome,
    GroupOutcome, SelftestReport, FAST_N_LIMIT, ORACLE_GRID,
};
