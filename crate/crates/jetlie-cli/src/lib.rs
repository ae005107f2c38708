//! Input language, job execution and report formatting for the `jetlie` command.

pub mod dsl;
pub mod run;
