//! Example topologies: the 19-node correlated-branch network and layered
//! random Bayesian networks with skip-layer edges.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::{Edge, NetworkKind, NodeId, PBitNetwork};
use crate::rng::RandomStream;

/// Output of [`gen_fig3_network`] with its designated observation nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchNetwork {
    pub net: PBitNetwork,
    pub a: NodeId,
    pub m1: NodeId,
    pub b: NodeId,
}

const UPSTREAM: usize = 4;
const BRANCHES: usize = 2;
const DOWNSTREAM_FANIN: usize = 3;
pub const FIG3_NODES: usize = 19;

/// 19-node directed network in which `A -> X_k -> M1` and `M1 -> Y_k -> B`
/// branches carry weights `(+r, -r)`, so each branch couples its end points
/// with a net `-r^2`. `A` and `B` end up positively correlated through `M1`.
///
/// Layout: four random upstream roots feed `A`; eight random downstream nodes
/// hang off earlier nodes. All random weights are uniform in `[-1, 1]`.
/// Biases are zero and the gain is 1.
pub fn gen_fig3_network(r: f64, seed: u64) -> Result<BranchNetwork> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidArgument("branch weight r must lie in (0, 1]".into()));
    }
    let mut rng = RandomStream::new(seed, 0);
    let mut edges = Vec::new();
    let mut edge = |from: usize, to: usize, weight: f64| {
        edges.push(Edge {
            from: NodeId(from),
            to: NodeId(to),
            weight,
        })
    };

    for i in 0..UPSTREAM {
        for j in 0..i {
            edge(j, i, rng.uniform_pm1());
        }
    }
    let a = UPSTREAM;
    for j in 0..UPSTREAM {
        edge(j, a, rng.uniform_pm1());
    }
    let xs = a + 1;
    let m1 = xs + BRANCHES;
    let ys = m1 + 1;
    let b = ys + BRANCHES;
    for k in 0..BRANCHES {
        edge(a, xs + k, r);
        edge(xs + k, m1, -r);
        edge(m1, ys + k, r);
        edge(ys + k, b, -r);
    }
    for i in b + 1..FIG3_NODES {
        // distinct random parents among all earlier nodes
        let mut parents: Vec<usize> = Vec::with_capacity(DOWNSTREAM_FANIN);
        while parents.len() < DOWNSTREAM_FANIN {
            let p = rng.below(i as u64) as usize;
            if !parents.contains(&p) {
                parents.push(p);
            }
        }
        for p in parents {
            edge(p, i, rng.uniform_pm1());
        }
    }

    let net = PBitNetwork::from_edges(NetworkKind::Directed, vec![0.0; FIG3_NODES], 1.0, &edges)?
        .with_labels([("A", NodeId(a)), ("M1", NodeId(m1)), ("B", NodeId(b))])?;
    Ok(BranchNetwork {
        net,
        a: NodeId(a),
        m1: NodeId(m1),
        b: NodeId(b),
    })
}

/// Layered directed network. Consecutive layers are fully connected; on top
/// of that, `extra_skip_edges` random edges jump over at least one layer
/// (fewer if the topology has no room). Weights are uniform in `[-1, 1]`,
/// biases zero, gain 1. Labels: `A` is the first node of the first layer,
/// `B` the last node of the last layer.
pub fn gen_layered_random_bn(
    layer_sizes: &[usize],
    extra_skip_edges: usize,
    seed: u64,
) -> Result<PBitNetwork> {
    if layer_sizes.len() < 2 {
        return Err(Error::InvalidArgument("need at least two layers".into()));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::InvalidArgument("layer sizes must be positive".into()));
    }
    let mut starts = Vec::with_capacity(layer_sizes.len());
    let mut n = 0;
    for &s in layer_sizes {
        starts.push(n);
        n += s;
    }
    let layer_of = |i: usize| starts.iter().rposition(|&s| s <= i).unwrap();

    let mut rng = RandomStream::new(seed, 0);
    let mut j = vec![0.0; n * n];
    for l in 1..layer_sizes.len() {
        for to in starts[l]..starts[l] + layer_sizes[l] {
            for from in starts[l - 1]..starts[l - 1] + layer_sizes[l - 1] {
                j[to * n + from] = rng.uniform_pm1();
            }
        }
    }

    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for to in 0..n {
        for from in 0..starts[layer_of(to)] {
            if layer_of(from) + 1 < layer_of(to) {
                candidates.push((from, to));
            }
        }
    }
    for _ in 0..extra_skip_edges.min(candidates.len()) {
        let k = rng.below(candidates.len() as u64) as usize;
        let (from, to) = candidates.swap_remove(k);
        j[to * n + from] = rng.uniform_pm1();
    }

    let last = n - 1;
    PBitNetwork::new(NetworkKind::Directed, n, j, vec![0.0; n], 1.0)?
        .with_labels([("A", NodeId(0)), ("B", NodeId(last))])
}
