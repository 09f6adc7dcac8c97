//! Exact reference distributions by exhaustive enumeration.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::{NetworkKind, NodeId, PBitNetwork, Spin};

/// Default cap on the number of enumerated nodes (4M configurations).
pub const ENUMERATION_CAP: usize = 22;

/// Probability table over the `2^k` configurations of an ordered node subset.
///
/// Configuration index bit `p` holds the spin of `nodes[p]` (set = `+1`).
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    nodes: Vec<NodeId>,
    probs: Vec<f64>,
}

impl DistributionTable {
    pub fn new(nodes: Vec<NodeId>, probs: Vec<f64>) -> Result<Self> {
        if nodes.len() > 30 {
            return Err(Error::TooLarge {
                nodes: nodes.len(),
                cap: 30,
            });
        }
        let expected = 1usize << nodes.len();
        if probs.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "probability table",
                expected,
                found: probs.len(),
            });
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidArgument(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { nodes, probs })
    }

    /// Normalize nonnegative weights into a table.
    pub fn from_weights(nodes: Vec<NodeId>, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidArgument("weights sum to zero".into()));
        }
        for w in &mut weights {
            *w /= total;
        }
        Self::new(nodes, weights)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Spins of configuration `index`, in subset order.
    pub fn spins(&self, index: usize) -> impl Iterator<Item = Spin> + '_ {
        (0..self.nodes.len()).map(move |p| Spin::from_bool(index >> p & 1 == 1))
    }

    /// Index of the configuration with the given spins (subset order).
    pub fn index_of(spins: &[Spin]) -> usize {
        spins
            .iter()
            .enumerate()
            .map(|(p, s)| (s.is_up() as usize) << p)
            .sum()
    }

    /// Probability of the configuration with the given spins (subset order).
    pub fn prob(&self, spins: &[Spin]) -> f64 {
        self.probs[Self::index_of(spins)]
    }
}

fn check_cap(net: &PBitNetwork) -> Result<()> {
    if net.n_nodes() > ENUMERATION_CAP {
        Err(Error::TooLarge {
            nodes: net.n_nodes(),
            cap: ENUMERATION_CAP,
        })
    } else {
        Ok(())
    }
}

fn decode(index: usize, out: &mut [Spin]) {
    for (p, s) in out.iter_mut().enumerate() {
        *s = Spin::from_bool(index >> p & 1 == 1);
    }
}

fn all_nodes(n: usize) -> Vec<NodeId> {
    (0..n).map(NodeId).collect()
}

/// Chain-rule joint of a directed network: the product over nodes of
/// `P(m_i | parents) = (1 + m_i tanh(I_0 (h_i + sum_j J_ij m_j))) / 2`.
pub fn bn_joint(net: &PBitNetwork) -> Result<DistributionTable> {
    if net.kind() != NetworkKind::Directed {
        return Err(Error::WrongKind {
            expected: NetworkKind::Directed,
            found: net.kind(),
        });
    }
    check_cap(net)?;
    let n = net.n_nodes();
    let mut probs = vec![0.0; 1 << n];
    let mut m = vec![Spin::Down; n];
    for (idx, p) in probs.iter_mut().enumerate() {
        decode(idx, &mut m);
        let mut prod = 1.0;
        for i in 0..n {
            let t = libm::tanh(net.gain() * net.local_field(i, &m));
            prod *= 0.5 * (1.0 + m[i].value() * t);
        }
        *p = prod;
    }
    DistributionTable::new(all_nodes(n), probs)
}

/// Equilibrium law of a symmetric network,
/// `P(m) ~ exp(I_0 (sum_i h_i m_i + sum_{i<j} J_ij m_i m_j))`.
pub fn boltzmann_joint(net: &PBitNetwork) -> Result<DistributionTable> {
    if net.kind() != NetworkKind::Symmetric {
        return Err(Error::WrongKind {
            expected: NetworkKind::Symmetric,
            found: net.kind(),
        });
    }
    check_cap(net)?;
    let n = net.n_nodes();
    let mut m = vec![Spin::Down; n];
    let mut score = vec![0.0; 1 << n];
    for (idx, s) in score.iter_mut().enumerate() {
        decode(idx, &mut m);
        let mut e = 0.0;
        for i in 0..n {
            e += net.bias(NodeId(i)) * m[i].value();
            for &(j, w) in net.inputs(i) {
                if j > i {
                    e += w * m[i].value() * m[j].value();
                }
            }
        }
        *s = net.gain() * e;
    }
    let max = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights = score.into_iter().map(|s| libm::exp(s - max)).collect();
    DistributionTable::from_weights(all_nodes(n), weights)
}

/// Sum out every node not in `subset`; the result follows `subset` order.
pub fn marginalize(table: &DistributionTable, subset: &[NodeId]) -> Result<DistributionTable> {
    let positions: Vec<usize> = subset
        .iter()
        .map(|id| {
            table
                .nodes
                .iter()
                .position(|n| n == id)
                .ok_or(Error::UnknownNode(*id))
        })
        .collect::<Result<_>>()?;
    let mut probs = vec![0.0; 1 << subset.len()];
    for (idx, p) in table.probs.iter().enumerate() {
        let mut out = 0usize;
        for (q, &pos) in positions.iter().enumerate() {
            out |= (idx >> pos & 1) << q;
        }
        probs[out] += p;
    }
    DistributionTable::new(subset.to_vec(), probs)
}

/// Exact marginal over `subset` using the oracle that matches the network kind.
pub fn exact_marginal(net: &PBitNetwork, subset: &[NodeId]) -> Result<DistributionTable> {
    let joint = match net.kind() {
        NetworkKind::Directed => bn_joint(net)?,
        NetworkKind::Symmetric => boltzmann_joint(net)?,
    };
    marginalize(&joint, subset)
}
