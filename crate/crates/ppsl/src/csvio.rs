//! Plot-ready CSV output: header row, comma separated, `.` decimals.
//! Floats use the shortest text that reads back to the same value.

use std::io::Write;
use std::path::Path;

use ppsl_core::{AutocorrResult, DistributionTable, NodeId, SampleTrace, StepResponseResult};

use crate::error::{file_err, IoError, Result};

fn spin_text(up: bool) -> &'static str {
    if up {
        "1"
    } else {
        "-1"
    }
}

/// One row per configuration in table index order: spins as `1`/`-1`, then
/// the probability.
pub fn write_table<W: Write>(out: W, names: &[String], table: &DistributionTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
    header.push("probability");
    w.write_record(&header)?;
    for (idx, p) in table.probs().iter().enumerate() {
        let mut row: Vec<String> = table.spins(idx).map(|s| spin_text(s.is_up()).into()).collect();
        row.push(p.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `t` followed by one spin column per node.
pub fn write_trace<W: Write>(out: W, names: &[String], trace: &SampleTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (k, t) in trace.times().iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(trace.state(k).iter().map(|s| spin_text(s.is_up()).to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Two numeric columns.
pub fn write_pairs<W: Write>(out: W, header: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for (a, b) in rows {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_autocorr<W: Write>(out: W, r: &AutocorrResult) -> Result<()> {
    let rows: Vec<(f64, f64)> = r.lags.iter().copied().zip(r.c.iter().copied()).collect();
    write_pairs(out, ["lag", "c"], &rows)
}

pub fn write_step<W: Write>(out: W, r: &StepResponseResult) -> Result<()> {
    let rows: Vec<(f64, f64)> = r
        .times
        .iter()
        .copied()
        .zip(r.ensemble_mean.iter().copied())
        .collect();
    write_pairs(out, ["t", "mean"], &rows)
}

/// Write to `path` in one go through an in-memory buffer.
pub fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    std::fs::write(path, buf).map_err(file_err(path))
}

/// Table read back from CSV, with the node column names.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedTable {
    pub names: Vec<String>,
    pub table: DistributionTable,
}

impl NamedTable {
    /// Same table with columns in `order`, which must be a permutation of `names`.
    pub fn reordered(&self, order: &[String]) -> Result<NamedTable> {
        let pos: Option<Vec<usize>> = order
            .iter()
            .map(|n| self.names.iter().position(|m| m == n))
            .collect();
        let pos = match pos {
            Some(p) if order.len() == self.names.len() => p,
            _ => return Err(ppsl_core::Error::SubsetMismatch.into()),
        };
        let mut probs = vec![0.0; self.table.len()];
        for (idx, p) in self.table.probs().iter().enumerate() {
            let new: usize = pos
                .iter()
                .enumerate()
                .map(|(q, &old)| (idx >> old & 1) << q)
                .sum();
            probs[new] = *p;
        }
        Ok(NamedTable {
            names: order.to_vec(),
            table: DistributionTable::new(self.table.nodes().to_vec(), probs)?,
        })
    }
}

/// Parse a table written by [`write_table`]. Rows may come in any order but
/// every configuration must appear exactly once.
pub fn read_table(text: &str, origin: &str) -> Result<NamedTable> {
    let err = |location: String, message: String| IoError::Parse {
        path: origin.to_string(),
        location,
        message,
    };
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().next_back() != Some("probability") || header.len() < 2 {
        return Err(err(
            "line 1".into(),
            "expected node columns followed by `probability`".into(),
        ));
    }
    let k = header.len() - 1;
    if k > 30 {
        return Err(err("line 1".into(), format!("{k} node columns is too many")));
    }
    let names: Vec<String> = header.iter().take(k).map(str::to_string).collect();
    let mut probs = vec![None; 1 << k];
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut idx = 0usize;
        for (p, field) in rec.iter().take(k).enumerate() {
            match field.trim() {
                "1" | "+1" => idx |= 1 << p,
                "-1" => {}
                other => {
                    return Err(err(
                        format!("line {line}, column {}", names[p]),
                        format!("spin must be 1 or -1, found `{other}`"),
                    ))
                }
            }
        }
        let p: f64 = rec
            .get(k)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(format!("line {line}, column probability"), "not a number".into()))?;
        if probs[idx].replace(p).is_some() {
            return Err(err(format!("line {line}"), "configuration listed twice".into()));
        }
    }
    let probs: Option<Vec<f64>> = probs.into_iter().collect();
    let probs = probs.ok_or_else(|| err("table".into(), "configurations missing".into()))?;
    let nodes = (0..k).map(NodeId).collect();
    Ok(NamedTable {
        names,
        table: DistributionTable::new(nodes, probs)?,
    })
}
