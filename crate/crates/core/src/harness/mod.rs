//! Command implementations behind the `frame-module` binary: argument
//! values, output rendering, the `module`/`sweep`/`quad` commands and the
//! validation suite.

pub mod commands;
pub mod number;
pub mod report;
pub mod validate;

pub use commands::{
    cmd_module, cmd_quad, cmd_sweep, parse_methods, CommandError, HRange, ModuleArgs, OracleGrid,
    Output, QuadArgs, QuadKind, RunOptions, Spacing, SweepArgs,
};
pub use number::Number;
pub use report::{render, Format, Meta, Record, RecordGeometry};
pub use validate::{run_validation, Fault, Profile, ValidateOptions, ValidationReport};
