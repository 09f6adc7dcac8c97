//! JSON network files.
//!
//! ```json
//! {
//!   "n_nodes": 3,
//!   "kind": "directed",
//!   "i0": 1.0,
//!   "biases": [0.0, 0.0, 0.0],
//!   "edges": [{"from": 0, "to": 1, "w": 1.0}, {"from": 1, "to": 2, "w": 1.0}],
//!   "labels": {"A": 0, "B": 2}
//! }
//! ```
//!
//! An edge `from -> to` with weight `w` sets `J[to][from] = w`: row `i`
//! of `J` holds what node `i` receives. In a symmetric network each pair is
//! listed once and sets both entries.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use ppsl_core::{validate_network, Edge, NetworkKind, NodeId, PBitNetwork};
use serde::{Deserialize, Serialize};

use crate::error::{file_err, IoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindField {
    Directed,
    Symmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeField {
    from: usize,
    to: usize,
    w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n_nodes: usize,
    kind: KindField,
    i0: f64,
    biases: Vec<f64>,
    edges: Vec<EdgeField>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<String, usize>,
}

/// Parse and validate a network from JSON text. `origin` names the source
/// in error messages.
pub fn parse_network_str(text: &str, origin: &str) -> Result<PBitNetwork> {
    let parse_err = |location: String, message: String| IoError::Parse {
        path: origin.to_string(),
        location,
        message,
    };
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        // serde_json appends " at line L column C"; keep the message bare
        let bare = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        parse_err(format!("line {}, column {}", e.line(), e.column()), bare)
    })?;

    let n = file.n_nodes;
    if n == 0 {
        return Err(parse_err("n_nodes".into(), "must be at least 1".into()));
    }
    if file.biases.len() != n {
        return Err(parse_err(
            "biases".into(),
            format!("expected {n} entries, found {}", file.biases.len()),
        ));
    }
    let kind = match file.kind {
        KindField::Directed => NetworkKind::Directed,
        KindField::Symmetric => NetworkKind::Symmetric,
    };
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(file.edges.len());
    for (k, e) in file.edges.iter().enumerate() {
        for (field, v) in [("from", e.from), ("to", e.to)] {
            if v >= n {
                return Err(parse_err(
                    format!("edges[{k}].{field}"),
                    format!("node {v} out of range for {n} nodes"),
                ));
            }
        }
        let key = match kind {
            NetworkKind::Directed => (e.from, e.to),
            NetworkKind::Symmetric => (e.from.min(e.to), e.from.max(e.to)),
        };
        if !seen.insert(key) {
            return Err(parse_err(
                format!("edges[{k}]"),
                format!("duplicate edge {} -> {}", e.from, e.to),
            ));
        }
        edges.push(Edge {
            from: NodeId(e.from),
            to: NodeId(e.to),
            weight: e.w,
        });
    }
    for (name, &v) in &file.labels {
        if v >= n {
            return Err(parse_err(
                format!("labels.{name}"),
                format!("node {v} out of range for {n} nodes"),
            ));
        }
    }
    let net = PBitNetwork::from_edges(kind, file.biases, file.i0, &edges)?
        .with_labels(file.labels.into_iter().map(|(k, v)| (k, NodeId(v))))?;
    let report = validate_network(&net);
    if !report.is_ok() {
        return Err(IoError::Validation {
            path: origin.to_string(),
            report,
        });
    }
    Ok(net)
}

pub fn parse_network_file(path: &Path) -> Result<PBitNetwork> {
    let text = std::fs::read_to_string(path).map_err(file_err(path))?;
    parse_network_str(&text, &path.display().to_string())
}

/// Pretty-printed JSON; [`parse_network_str`] reads it back exactly.
pub fn network_to_json(net: &PBitNetwork) -> String {
    let file = NetworkFile {
        n_nodes: net.n_nodes(),
        kind: match net.kind() {
            NetworkKind::Directed => KindField::Directed,
            NetworkKind::Symmetric => KindField::Symmetric,
        },
        i0: net.gain(),
        biases: net.biases().to_vec(),
        edges: net
            .edges()
            .into_iter()
            .map(|e| EdgeField {
                from: e.from.0,
                to: e.to.0,
                w: e.weight,
            })
            .collect(),
        labels: net.labels().iter().map(|(k, v)| (k.clone(), v.0)).collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("network serializes");
    s.push('\n');
    s
}

pub fn write_network_file(net: &PBitNetwork, path: &Path) -> Result<()> {
    std::fs::write(path, network_to_json(net)).map_err(file_err(path))
}
