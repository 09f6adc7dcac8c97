//! Network representation, structural validation and parent-to-child ordering.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Dense index of a p-bit within its network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

/// Binary p-bit output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(i8)]
pub enum Spin {
    Down = -1,
    Up = 1,
}

impl Spin {
    /// `sgn(x)` with `sgn(0) = +1`.
    #[inline]
    pub fn sgn(x: f64) -> Spin {
        if x >= 0.0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    #[inline]
    pub fn from_bool(up: bool) -> Spin {
        if up {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self as i8 as f64
    }

    #[inline]
    pub fn is_up(self) -> bool {
        matches!(self, Spin::Up)
    }

    #[inline]
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl core::ops::Neg for Spin {
    type Output = Spin;
    fn neg(self) -> Spin {
        self.flipped()
    }
}

/// Spin vector of a whole network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinState(pub Vec<Spin>);

impl SpinState {
    pub fn all(n: usize, s: Spin) -> Self {
        SpinState(vec![s; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Spin] {
        &self.0
    }
}

impl core::ops::Index<NodeId> for SpinState {
    type Output = Spin;
    fn index(&self, i: NodeId) -> &Spin {
        &self.0[i.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetworkKind {
    /// Bayesian network: `J_ij != 0` implies `J_ji == 0`, acyclic.
    Directed,
    /// Boltzmann network: `J_ij == J_ji`, `J_ii == 0`.
    Symmetric,
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NetworkKind::Directed => "directed",
            NetworkKind::Symmetric => "symmetric",
        })
    }
}

/// Weighted edge `from -> to`, i.e. the coupling `J[to][from]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: f64,
}

/// A p-circuit: couplings `J` (row `i` receives from column `j`), biases `h`
/// and gain `I_0`. The synaptic input to node `i` is `I_0 (h_i + sum_j J_ij m_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PBitNetwork {
    n: usize,
    kind: NetworkKind,
    couplings: Vec<f64>,
    biases: Vec<f64>,
    gain: f64,
    labels: BTreeMap<String, NodeId>,
    // in-neighbours of each node with their weights, derived from `couplings`
    inputs: Vec<Vec<(usize, f64)>>,
    // nodes whose input depends on each node
    fanout: Vec<Vec<usize>>,
}

impl PBitNetwork {
    /// Build from a row-major `n x n` coupling matrix.
    pub fn new(
        kind: NetworkKind,
        n: usize,
        couplings: Vec<f64>,
        biases: Vec<f64>,
        gain: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("network needs at least one node".into()));
        }
        if couplings.len() != n * n {
            return Err(Error::DimensionMismatch {
                what: "coupling matrix",
                expected: n * n,
                found: couplings.len(),
            });
        }
        if biases.len() != n {
            return Err(Error::DimensionMismatch {
                what: "bias vector",
                expected: n,
                found: biases.len(),
            });
        }
        let mut inputs = vec![Vec::new(); n];
        let mut fanout = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                let w = couplings[i * n + j];
                if w != 0.0 {
                    inputs[i].push((j, w));
                    fanout[j].push(i);
                }
            }
        }
        Ok(Self {
            n,
            kind,
            couplings,
            biases,
            gain,
            labels: BTreeMap::new(),
            inputs,
            fanout,
        })
    }

    /// Build from an edge list. For symmetric networks each edge sets both
    /// `J_ij` and `J_ji`.
    pub fn from_edges(
        kind: NetworkKind,
        biases: Vec<f64>,
        gain: f64,
        edges: &[Edge],
    ) -> Result<Self> {
        let n = biases.len();
        let mut j = vec![0.0; n * n];
        for e in edges {
            for id in [e.from, e.to] {
                if id.0 >= n {
                    return Err(Error::UnknownNode(id));
                }
            }
            j[e.to.0 * n + e.from.0] = e.weight;
            if kind == NetworkKind::Symmetric {
                j[e.from.0 * n + e.to.0] = e.weight;
            }
        }
        Self::new(kind, n, j, biases, gain)
    }

    pub fn with_labels<S: Into<String>>(
        mut self,
        labels: impl IntoIterator<Item = (S, NodeId)>,
    ) -> Result<Self> {
        for (name, id) in labels {
            if id.0 >= self.n {
                return Err(Error::UnknownNode(id));
            }
            self.labels.insert(name.into(), id);
        }
        Ok(self)
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    #[inline]
    pub fn gain(&self) -> f64 {
        self.gain
    }

    #[inline]
    pub fn coupling(&self, i: NodeId, j: NodeId) -> f64 {
        self.couplings[i.0 * self.n + j.0]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    #[inline]
    pub fn bias(&self, i: NodeId) -> f64 {
        self.biases[i.0]
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn labels(&self) -> &BTreeMap<String, NodeId> {
        &self.labels
    }

    pub fn label_of(&self, id: NodeId) -> Option<&str> {
        self.labels
            .iter()
            .find(|(_, v)| **v == id)
            .map(|(k, _)| k.as_str())
    }

    pub fn node(&self, label: &str) -> Result<NodeId> {
        self.labels
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.into()))
    }

    /// Nonzero incoming couplings `(j, J_ij)` of node `i`.
    #[inline]
    pub fn inputs(&self, i: usize) -> &[(usize, f64)] {
        &self.inputs[i]
    }

    /// Nodes `k` with `J_kj != 0`.
    #[inline]
    pub fn fanout(&self, j: usize) -> &[usize] {
        &self.fanout[j]
    }

    /// Edges with nonzero weight. Symmetric pairs are listed once, `from < to`.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for &(j, w) in &self.inputs[i] {
                if self.kind == NetworkKind::Symmetric && j > i {
                    continue;
                }
                out.push(Edge {
                    from: NodeId(j),
                    to: NodeId(i),
                    weight: w,
                });
            }
        }
        out
    }

    /// `sum_j J_ij m_j + h_i` without the gain.
    #[inline]
    pub(crate) fn local_field(&self, i: usize, m: &[Spin]) -> f64 {
        let mut acc = self.biases[i];
        for &(j, w) in &self.inputs[i] {
            acc += w * m[j].value();
        }
        acc
    }

    /// Largest possible `|I_i|` over all nodes and spin states.
    pub fn max_abs_input(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let s: f64 = self.inputs[i].iter().map(|&(_, w)| libm::fabs(w)).sum();
                libm::fabs(self.gain) * (libm::fabs(self.biases[i]) + s)
            })
            .fold(0.0, f64::max)
    }
}

/// A single structural defect found by [`validate_network`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SelfLoop(NodeId),
    /// Directed network with both `J_ij` and `J_ji` nonzero (`i < j`).
    BidirectionalEdge(NodeId, NodeId),
    /// Directed network containing a cycle; nodes listed along the cycle.
    Cycle(Vec<NodeId>),
    /// Symmetric network with `J_ij != J_ji` (`i < j`).
    AsymmetricPair(NodeId, NodeId),
    NonFiniteCoupling(NodeId, NodeId),
    NonFiniteBias(NodeId),
    InvalidGain,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop(i) => write!(f, "self-loop on node {i}"),
            Violation::BidirectionalEdge(i, j) => {
                write!(f, "bidirectional edge between {i} and {j}")
            }
            Violation::Cycle(c) => {
                write!(f, "cycle")?;
                for (k, n) in c.iter().enumerate() {
                    write!(f, "{}{n}", if k == 0 { " " } else { " -> " })?;
                }
                Ok(())
            }
            Violation::AsymmetricPair(i, j) => write!(f, "J[{i}][{j}] != J[{j}][{i}]"),
            Violation::NonFiniteCoupling(i, j) => write!(f, "non-finite J[{i}][{j}]"),
            Violation::NonFiniteBias(i) => write!(f, "non-finite bias h[{i}]"),
            Violation::InvalidGain => write!(f, "gain must be finite and positive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check the structural invariants of `net` for its declared kind.
pub fn validate_network(net: &PBitNetwork) -> ValidationReport {
    let n = net.n;
    let mut v = Vec::new();
    if !(net.gain.is_finite() && net.gain > 0.0) {
        v.push(Violation::InvalidGain);
    }
    for (i, h) in net.biases.iter().enumerate() {
        if !h.is_finite() {
            v.push(Violation::NonFiniteBias(NodeId(i)));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !net.couplings[i * n + j].is_finite() {
                v.push(Violation::NonFiniteCoupling(NodeId(i), NodeId(j)));
            }
        }
    }
    for i in 0..n {
        if net.couplings[i * n + i] != 0.0 {
            v.push(Violation::SelfLoop(NodeId(i)));
        }
    }
    match net.kind {
        NetworkKind::Symmetric => {
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = (net.couplings[i * n + j], net.couplings[j * n + i]);
                    // NaN entries are already reported above
                    if a != b && a.is_finite() && b.is_finite() {
                        v.push(Violation::AsymmetricPair(NodeId(i), NodeId(j)));
                    }
                }
            }
        }
        NetworkKind::Directed => {
            let mut bidirectional = false;
            for i in 0..n {
                for j in i + 1..n {
                    if net.couplings[i * n + j] != 0.0 && net.couplings[j * n + i] != 0.0 {
                        v.push(Violation::BidirectionalEdge(NodeId(i), NodeId(j)));
                        bidirectional = true;
                    }
                }
            }
            // A bidirectional pair is itself a 2-cycle; only report longer cycles separately.
            if !bidirectional {
                if let Some(c) = find_cycle(net) {
                    v.push(Violation::Cycle(c));
                }
            }
        }
    }
    ValidationReport { violations: v }
}

/// Parent-to-child order of a directed network (Kahn's algorithm,
/// lowest index first among ready nodes).
pub fn topological_order(net: &PBitNetwork) -> Result<Vec<NodeId>> {
    if net.kind != NetworkKind::Directed {
        return Err(Error::WrongKind {
            expected: NetworkKind::Directed,
            found: net.kind,
        });
    }
    let n = net.n;
    let mut indegree: Vec<usize> = (0..n)
        .map(|i| net.inputs[i].iter().filter(|&&(j, _)| j != i).count())
        .collect();
    if let Some(i) = (0..n).find(|&i| net.couplings[i * n + i] != 0.0) {
        return Err(Error::CycleDetected(vec![NodeId(i)]));
    }
    let mut ready: alloc::collections::BinaryHeap<core::cmp::Reverse<usize>> = (0..n)
        .filter(|&i| indegree[i] == 0)
        .map(core::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(core::cmp::Reverse(j)) = ready.pop() {
        order.push(NodeId(j));
        for &i in &net.fanout[j] {
            indegree[i] -= 1;
            if indegree[i] == 0 {
                ready.push(core::cmp::Reverse(i));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(Error::CycleDetected(find_cycle(net).unwrap_or_default()))
    }
}

/// Iterative DFS over parent -> child edges; returns one cycle if any.
fn find_cycle(net: &PBitNetwork) -> Option<Vec<NodeId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = net.n;
    let mut mark = vec![Mark::New; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = Mark::Active;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if let Some(&w) = net.fanout[u].get(*next) {
                *next += 1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Active;
                        parent[w] = u;
                        stack.push((w, 0));
                    }
                    Mark::Active => {
                        let mut cycle = vec![NodeId(w)];
                        let mut x = u;
                        while x != w {
                            cycle.push(NodeId(x));
                            x = parent[x];
                        }
                        cycle[1..].reverse();
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[u] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}
