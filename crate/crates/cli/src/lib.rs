//! Scenario files, presets and the commands behind the `ris-lab` binary.

pub mod commands;
pub mod presets;
pub mod scenario;
pub mod selftest;
