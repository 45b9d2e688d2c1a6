//! Command drivers and the acceptance-criteria runner behind the `klab`
//! binary.

pub mod commands;
pub mod output;
pub mod verify;

pub use commands::{cmd_qtable, cmd_report, cmd_spectrum, CommandOutput, Experiment};
pub use verify::{run_criteria, CriterionResult, Outcome, ScenarioKind};
