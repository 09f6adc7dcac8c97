//! Discrete-time simulation of p-bit (probabilistic bit) networks.
//!
//! The crate provides three samplers over a [`PBitNetwork`]:
//!
//! * [`clocked`]: sequenced binary stochastic neurons under an explicit
//!   update order;
//! * [`d1`]: the autonomous transistor + stochastic-MTJ p-bit, whose step
//!   response (`tau_T`) is much faster than its fluctuation (`tau_N0`);
//! * [`d2`]: the autonomous single-time-scale p-bit.
//!
//! Exact chain-rule and Boltzmann distributions come from [`oracle`], and
//! [`analysis`] turns traces into histograms, autocorrelation widths and
//! step-response times.
//!
//! `no_std` with `alloc`; the `ppsl` crate adds file formats and the CLI.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod clocked;
pub mod d1;
pub mod d2;
mod error;
pub mod generators;
pub mod network;
pub mod oracle;
pub mod rng;

pub use analysis::{
    autocorrelation, histogram, sigmoid_sweep, step_response, tv_distance, AutocorrResult,
    EngineKind, EngineSpec, HistogramSink, MeanSink, ParamWarning, SampleTrace,
    StepResponseResult, TraceMeta, TraceSink,
};
pub use clocked::{bsn_update, run_clocked, run_clocked_into, synapse_input, ClockedConfig, UpdatePolicy};
pub use d1::{
    effective_tau_n, mtj_step, rt_relax, run_autonomous_d1, run_autonomous_d1_into,
    synapse_relax, D1Params, D1State, Integrator, MtjMode,
};
pub use d2::{d2_step, run_autonomous_d2, run_autonomous_d2_into, D2Params, D2State};
pub use error::{Error, Result};
pub use generators::{gen_fig3_network, gen_layered_random_bn, BranchNetwork};
pub use network::{
    topological_order, validate_network, Edge, NetworkKind, NodeId, PBitNetwork, Spin,
    SpinState, ValidationReport, Violation,
};
pub use oracle::{bn_joint, boltzmann_joint, exact_marginal, marginalize, DistributionTable};
pub use rng::RandomStream;
