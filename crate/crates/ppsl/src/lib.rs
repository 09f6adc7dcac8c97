//! File formats, experiment drivers and the `ppsl` command line on top of
//! [`ppsl_core`].

pub mod csvio;
mod error;
pub mod experiment;
pub mod netfile;

pub use error::{IoError, Result};
pub use experiment::{
    cmd_characterize, cmd_compare, cmd_oracle, cmd_run, cmd_sweep_ratio, CharacterizeConfig,
    CharacterizeReport, EngineChoice, EngineParams, ExperimentConfig, PolicyChoice, RunReport,
    SweepPoint,
};
pub use netfile::{network_to_json, parse_network_file, parse_network_str, write_network_file};
