//! Sequenced (clocked) p-circuit: one p-bit updated at a time under an
//! explicit update-order policy.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{params_digest, EngineKind, SampleTrace, TraceMeta, TraceSink};
use crate::error::{Error, Result};
use crate::network::{
    topological_order, validate_network, NetworkKind, NodeId, PBitNetwork, Spin, SpinState,
};
use crate::rng::{RandomStream, AUX_STREAM};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpdatePolicy {
    /// Parents before children (directed networks only).
    Topological,
    /// The same permutation every sweep.
    FixedOrder(Vec<NodeId>),
    /// A fresh uniformly random permutation every sweep.
    RandomPermutationPerSweep,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockedConfig {
    pub sweeps: u64,
    pub burn_in_sweeps: u64,
    pub policy: UpdatePolicy,
    pub seed: u64,
}

impl ClockedConfig {
    /// Config with the default burn-in of 10% of `sweeps`.
    pub fn new(sweeps: u64, policy: UpdatePolicy, seed: u64) -> Self {
        Self {
            sweeps,
            burn_in_sweeps: sweeps / 10,
            policy,
            seed,
        }
    }

    pub fn with_burn_in(mut self, burn_in_sweeps: u64) -> Self {
        self.burn_in_sweeps = burn_in_sweeps;
        self
    }

    fn check(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::InvalidArgument("sweeps must be positive".into()));
        }
        if self.burn_in_sweeps >= self.sweeps {
            return Err(Error::InvalidArgument(
                "burn-in must be shorter than the run".into(),
            ));
        }
        Ok(())
    }
}

/// Binary stochastic neuron: `sgn(rand(-1, 1) + tanh(input))`.
#[inline]
pub fn bsn_update(input: f64, stream: &mut RandomStream) -> Spin {
    Spin::sgn(stream.uniform_pm1() + libm::tanh(input))
}

/// Linear synapse `I_0 (h_i + sum_j J_ij m_j)`.
pub fn synapse_input(net: &PBitNetwork, state: &SpinState, i: NodeId) -> f64 {
    net.gain() * net.local_field(i.0, state.as_slice())
}

fn resolve_order(net: &PBitNetwork, policy: &UpdatePolicy) -> Result<Option<Vec<usize>>> {
    match policy {
        UpdatePolicy::Topological => {
            if net.kind() == NetworkKind::Symmetric {
                return Err(Error::PolicyMismatch);
            }
            Ok(Some(topological_order(net)?.into_iter().map(|n| n.0).collect()))
        }
        UpdatePolicy::FixedOrder(order) => {
            let n = net.n_nodes();
            let mut seen = vec![false; n];
            for id in order {
                if id.0 >= n {
                    return Err(Error::UnknownNode(*id));
                }
                if core::mem::replace(&mut seen[id.0], true) {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "node {id} appears twice in the update order"
                    )));
                }
            }
            if order.len() != n {
                return Err(Error::InvalidArgument(
                    "fixed update order must be a permutation of all nodes".into(),
                ));
            }
            Ok(Some(order.iter().map(|n| n.0).collect()))
        }
        UpdatePolicy::RandomPermutationPerSweep => Ok(None),
    }
}

/// Run the clocked sampler, feeding one sample per sweep after burn-in to `sink`.
pub fn run_clocked_into<S: TraceSink + ?Sized>(
    net: &PBitNetwork,
    cfg: &ClockedConfig,
    sink: &mut S,
) -> Result<()> {
    cfg.check()?;
    let order = resolve_order(net, &cfg.policy)?;
    validate_network(net).into_result()?;

    let n = net.n_nodes();
    let mut streams: Vec<RandomStream> =
        (0..n).map(|i| RandomStream::new(cfg.seed, i as u64)).collect();
    let mut aux = RandomStream::new(cfg.seed, AUX_STREAM);
    let mut m: Vec<Spin> = streams.iter_mut().map(|s| Spin::from_bool(s.coin())).collect();
    let mut perm: Vec<usize> = order.unwrap_or_else(|| (0..n).collect());
    let shuffle = matches!(cfg.policy, UpdatePolicy::RandomPermutationPerSweep);

    for sweep in 0..cfg.sweeps {
        if shuffle {
            for k in (1..n).rev() {
                let r = aux.below(k as u64 + 1) as usize;
                perm.swap(k, r);
            }
        }
        for &i in &perm {
            let input = net.gain() * net.local_field(i, &m);
            m[i] = bsn_update(input, &mut streams[i]);
        }
        if sweep >= cfg.burn_in_sweeps {
            sink.record(sweep as f64, &m);
        }
    }
    Ok(())
}

pub fn run_clocked(net: &PBitNetwork, cfg: &ClockedConfig) -> Result<SampleTrace> {
    let policy_tag = match cfg.policy {
        UpdatePolicy::Topological => 0,
        UpdatePolicy::FixedOrder(_) => 1,
        UpdatePolicy::RandomPermutationPerSweep => 2,
    };
    let meta = TraceMeta::new(
        EngineKind::Clocked,
        cfg.seed,
        params_digest(&[cfg.sweeps, cfg.burn_in_sweeps, policy_tag]),
    );
    let mut trace = SampleTrace::new(net.n_nodes(), meta);
    run_clocked_into(net, cfg, &mut trace)?;
    Ok(trace)
}
