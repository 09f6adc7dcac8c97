//! Experiment configuration and the command implementations behind the CLI.
//! Every command is a pure function of its config and seed; files are
//! written once, after all workers finish.

use std::path::{Path, PathBuf};

use log::warn;
use ppsl_core::analysis::params_digest;
use ppsl_core::{
    autocorrelation, exact_marginal, run_clocked_into, sigmoid_sweep, step_response, tv_distance,
    ClockedConfig, D1Params, D2Params, DistributionTable, EngineKind, EngineSpec, HistogramSink,
    MtjMode, NetworkKind, NodeId, PBitNetwork, ParamWarning, SampleTrace, Spin, TraceMeta,
    TraceSink, UpdatePolicy,
};
use rayon::prelude::*;

use crate::csvio;
use crate::error::{file_err, Result};
use crate::netfile::parse_network_file;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Clocked,
    D1,
    D2,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PolicyChoice {
    /// Topological for directed networks, random permutations otherwise.
    #[default]
    Auto,
    Topological,
    Random,
    Fixed(Vec<usize>),
}

/// Engine parameters shared by all commands. Times are in ns.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineParams {
    pub tau_t: f64,
    /// `tau_N0` for design 1, `tau_N` for design 2.
    pub tau_n: f64,
    pub tau_s: f64,
    pub dt: Option<f64>,
    pub i_mtj: f64,
    pub mtj_mode: MtjMode,
    /// Defaults to `10^4 tau_N`.
    pub duration: Option<f64>,
    pub stride: Option<u64>,
    pub sweeps: u64,
    pub policy: PolicyChoice,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            tau_t: 1e-3,
            tau_n: 1.0,
            tau_s: 0.0,
            dt: None,
            i_mtj: 0.0,
            mtj_mode: MtjMode::Continuous,
            duration: None,
            stride: None,
            sweeps: 1_000_000,
            policy: PolicyChoice::Auto,
        }
    }
}

impl EngineParams {
    pub fn duration(&self) -> f64 {
        self.duration.unwrap_or(1e4 * self.tau_n)
    }

    pub fn d1(&self) -> D1Params {
        let mut p = D1Params::new(self.tau_t, self.tau_n, self.duration());
        p.tau_s = self.tau_s;
        p.dt = self.dt;
        p.i_mtj = self.i_mtj;
        p.mtj_mode = self.mtj_mode;
        p.record_stride = self.stride;
        p
    }

    pub fn d2(&self) -> D2Params {
        let mut p = D2Params::new(self.tau_n, self.duration());
        p.tau_s = self.tau_s;
        p.dt = self.dt;
        p.record_stride = self.stride;
        p
    }

    pub fn clocked(&self, net: &PBitNetwork, seed: u64) -> ClockedConfig {
        let policy = match &self.policy {
            PolicyChoice::Auto if net.kind() == NetworkKind::Directed => UpdatePolicy::Topological,
            PolicyChoice::Auto | PolicyChoice::Random => UpdatePolicy::RandomPermutationPerSweep,
            PolicyChoice::Topological => UpdatePolicy::Topological,
            PolicyChoice::Fixed(order) => {
                UpdatePolicy::FixedOrder(order.iter().copied().map(NodeId).collect())
            }
        };
        ClockedConfig::new(self.sweeps, policy, seed)
    }

    fn engine(&self, engine: EngineChoice) -> Result<EngineSpec> {
        match engine {
            EngineChoice::D1 => Ok(EngineSpec::D1(self.d1())),
            EngineChoice::D2 => Ok(EngineSpec::D2(self.d2())),
            _ => Err(ppsl_core::Error::InvalidArgument(
                "this command needs an autonomous engine (d1 or d2)".into(),
            )
            .into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub engine: EngineChoice,
    pub net: PathBuf,
    /// Labels or node indices; empty means every labeled node.
    pub nodes: Vec<String>,
    /// Output directory.
    pub out: PathBuf,
    pub seed: u64,
    pub params: EngineParams,
    /// Also write the full spin trace.
    pub write_trace: bool,
}

/// Resolve `names` to node ids. Each name is a label or a decimal index.
/// With no names, all labeled nodes are used in label order, or every node
/// of a small unlabeled network.
pub fn resolve_nodes(net: &PBitNetwork, names: &[String]) -> Result<(Vec<NodeId>, Vec<String>)> {
    if names.is_empty() {
        if !net.labels().is_empty() {
            return Ok(net.labels().iter().map(|(k, v)| (*v, k.clone())).unzip());
        }
        if net.n_nodes() <= 10 {
            return Ok((0..net.n_nodes()).map(|i| (NodeId(i), i.to_string())).unzip());
        }
        return Err(ppsl_core::Error::InvalidArgument(
            "network has no labels; choose observation nodes with --nodes".into(),
        )
        .into());
    }
    let mut ids = Vec::with_capacity(names.len());
    for name in names {
        let id = match net.node(name) {
            Ok(id) => id,
            Err(e) => match name.parse::<usize>() {
                Ok(i) if i < net.n_nodes() => NodeId(i),
                Ok(i) => return Err(ppsl_core::Error::UnknownNode(NodeId(i)).into()),
                Err(_) => return Err(e.into()),
            },
        };
        if ids.contains(&id) {
            return Err(ppsl_core::Error::InvalidArgument(format!("node {name} listed twice")).into());
        }
        ids.push(id);
    }
    Ok((ids, names.to_vec()))
}

/// Exact marginal when the network is small enough to enumerate.
fn oracle_if_computable(net: &PBitNetwork, subset: &[NodeId]) -> Result<Option<DistributionTable>> {
    match exact_marginal(net, subset) {
        Ok(t) => Ok(Some(t)),
        Err(ppsl_core::Error::TooLarge { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

struct Recorder {
    hist: HistogramSink,
    trace: Option<SampleTrace>,
}

impl TraceSink for Recorder {
    fn record(&mut self, t: f64, spins: &[Spin]) {
        self.hist.record(t, spins);
        if let Some(tr) = &mut self.trace {
            tr.record(t, spins);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub engine: EngineChoice,
    pub seed: u64,
    pub params_digest: u64,
    pub samples: u64,
    pub names: Vec<String>,
    pub table: DistributionTable,
    pub tv_to_oracle: Option<f64>,
    pub warnings: Vec<ParamWarning>,
    pub files: Vec<PathBuf>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(file_err(dir))
}

/// Histogram of the observed nodes for one engine, plus its TV distance to
/// the exact marginal when that is computable.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let net = parse_network_file(&cfg.net)?;
    let (subset, names) = resolve_nodes(&net, &cfg.nodes)?;
    let p = &cfg.params;
    let (kind, digest) = match cfg.engine {
        EngineChoice::Clocked => {
            let c = p.clocked(&net, cfg.seed);
            (EngineKind::Clocked, params_digest(&[c.sweeps, c.burn_in_sweeps]))
        }
        EngineChoice::D1 => (EngineKind::Design1, p.d1().digest()),
        EngineChoice::D2 => (EngineKind::Design2, p.d2().digest_for(&net)),
        EngineChoice::Oracle => (EngineKind::Oracle, params_digest(&[])),
    };
    let mut rec = Recorder {
        hist: HistogramSink::new(&subset),
        trace: cfg
            .write_trace
            .then(|| SampleTrace::new(net.n_nodes(), TraceMeta::new(kind, cfg.seed, digest))),
    };
    let mut warnings = Vec::new();
    match cfg.engine {
        EngineChoice::Clocked => run_clocked_into(&net, &p.clocked(&net, cfg.seed), &mut rec)?,
        EngineChoice::D1 => warnings = EngineSpec::D1(p.d1()).run_into(&net, cfg.seed, &mut rec)?,
        EngineChoice::D2 => warnings = EngineSpec::D2(p.d2()).run_into(&net, cfg.seed, &mut rec)?,
        EngineChoice::Oracle => {}
    }
    let (table, samples, tv) = if cfg.engine == EngineChoice::Oracle {
        (exact_marginal(&net, &subset)?, 0, Some(0.0))
    } else {
        let table = rec.hist.table()?;
        let tv = oracle_if_computable(&net, &subset)?
            .map(|o| tv_distance(&table, &o))
            .transpose()?;
        (table, rec.hist.samples(), tv)
    };

    ensure_dir(&cfg.out)?;
    let mut files = Vec::new();
    let path = cfg.out.join("histogram.csv");
    csvio::write_file(&path, |b| csvio::write_table(b, &names, &table))?;
    files.push(path);
    if let Some(trace) = &rec.trace {
        let all: Vec<String> = (0..net.n_nodes())
            .map(|i| net.label_of(NodeId(i)).map_or_else(|| i.to_string(), str::to_string))
            .collect();
        let path = cfg.out.join("trace.csv");
        csvio::write_file(&path, |b| csvio::write_trace(b, &all, trace))?;
        files.push(path);
    }
    Ok(RunReport {
        engine: cfg.engine,
        seed: cfg.seed,
        params_digest: digest,
        samples,
        names,
        table,
        tv_to_oracle: tv,
        warnings,
        files,
    })
}

/// Exact marginal table, written to `out/oracle.csv`.
pub fn cmd_oracle(net_path: &Path, nodes: &[String], out: &Path) -> Result<(Vec<String>, DistributionTable)> {
    let net = parse_network_file(net_path)?;
    let (subset, names) = resolve_nodes(&net, nodes)?;
    let table = exact_marginal(&net, &subset)?;
    ensure_dir(out)?;
    csvio::write_file(&out.join("oracle.csv"), |b| csvio::write_table(b, &names, &table))?;
    Ok((names, table))
}

/// TV distance between two table CSVs over the same node columns.
pub fn cmd_compare(a: &Path, b: &Path) -> Result<f64> {
    let read = |p: &Path| -> Result<csvio::NamedTable> {
        let text = std::fs::read_to_string(p).map_err(file_err(p))?;
        csvio::read_table(&text, &p.display().to_string())
    };
    let ta = read(a)?;
    let tb = read(b)?.reordered(&ta.names)?;
    Ok(tv_distance(&ta.table, &tb.table)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub ratio: f64,
    pub tv: f64,
    pub table: DistributionTable,
}

/// Design 1 at each `tau_T / tau_N0` ratio, scored against the chain-rule
/// marginal of the observed nodes. Writes `out/sweep.csv` unless `ratios`
/// is empty.
pub fn cmd_sweep_ratio(cfg: &ExperimentConfig, ratios: &[f64]) -> Result<Vec<SweepPoint>> {
    let net = parse_network_file(&cfg.net)?;
    if net.kind() != NetworkKind::Directed {
        return Err(ppsl_core::Error::WrongKind {
            expected: NetworkKind::Directed,
            found: net.kind(),
        }
        .into());
    }
    if ratios.is_empty() {
        warn!("empty ratio list; nothing to do");
        return Ok(Vec::new());
    }
    let (subset, names) = resolve_nodes(&net, &cfg.nodes)?;
    let oracle = exact_marginal(&net, &subset)?;
    let points: Vec<SweepPoint> = ratios
        .par_iter()
        .map(|&ratio| -> Result<SweepPoint> {
            let mut p = cfg.params.clone();
            p.tau_t = ratio * p.tau_n;
            let mut hist = HistogramSink::new(&subset);
            EngineSpec::D1(p.d1()).run_into(&net, cfg.seed, &mut hist)?;
            let table = hist.table()?;
            Ok(SweepPoint {
                ratio,
                tv: tv_distance(&table, &oracle)?,
                table,
            })
        })
        .collect::<Result<_>>()?;
    ensure_dir(&cfg.out)?;
    let rows: Vec<(f64, f64)> = points.iter().map(|p| (p.ratio, p.tv)).collect();
    csvio::write_file(&cfg.out.join("sweep.csv"), |b| {
        csvio::write_pairs(b, ["ratio", "tv"], &rows)
    })?;
    log::debug!("swept {} ratios over nodes {names:?}", points.len());
    Ok(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizeConfig {
    pub engine: EngineChoice,
    pub params: EngineParams,
    pub seed: u64,
    pub out: PathBuf,
    pub inputs: Vec<f64>,
    pub ensembles: usize,
    /// Step-response window; defaults to `20 tau_T` (design 1) or `4 tau_N`.
    pub step_window: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizeReport {
    pub params_digest: u64,
    pub sigmoid: Vec<(f64, f64)>,
    pub tau_corr: f64,
    pub tau_step: f64,
}

impl CharacterizeReport {
    pub fn ratio(&self) -> f64 {
        self.tau_step / self.tau_corr
    }
}

/// Sigmoid, zero-input autocorrelation and `-3 -> 0` step response of a
/// single p-bit. The sigmoid and autocorrelation files are written even when
/// the step response fails to settle.
pub fn cmd_characterize(cfg: &CharacterizeConfig) -> Result<CharacterizeReport> {
    let spec = cfg.params.engine(cfg.engine)?;
    let tau = cfg.params.tau_n;

    // autocorrelation sampled every tau/50
    let mut corr_spec = spec.clone();
    match &mut corr_spec {
        EngineSpec::D1(p) => {
            p.record_stride = p.record_stride.or(Some(stride_for(tau / 50.0, p.dt())));
        }
        EngineSpec::D2(p) => {
            let dt = p.default_dt(0.0);
            p.record_stride = p.record_stride.or(Some(stride_for(tau / 50.0, p.dt.unwrap_or(dt))));
        }
    }
    let window = cfg.step_window.unwrap_or(match cfg.engine {
        EngineChoice::D1 => 20.0 * cfg.params.tau_t,
        _ => 4.0 * tau,
    });
    let step_spec = spec.with_duration(window);

    let ((sigmoid, corr), step) = rayon::join(
        || {
            rayon::join(
                || sigmoid_sweep(&spec, &cfg.inputs, cfg.seed),
                || -> ppsl_core::Result<_> {
                    let lone =
                        PBitNetwork::new(NetworkKind::Directed, 1, vec![0.0], vec![0.0], 1.0)?;
                    let meta = TraceMeta::new(corr_spec.kind(), cfg.seed, 0);
                    let mut trace = SampleTrace::new(1, meta);
                    corr_spec.run_into(&lone, cfg.seed, &mut trace)?;
                    autocorrelation(&trace, NodeId(0), 4.0 * tau)
                },
            )
        },
        || step_response(&step_spec, cfg.ensembles, -3.0, 0.0, cfg.seed),
    );
    let sigmoid = sigmoid?;
    let corr = corr?;
    ensure_dir(&cfg.out)?;
    csvio::write_file(&cfg.out.join("sigmoid.csv"), |b| {
        csvio::write_pairs(b, ["input", "mean"], &sigmoid)
    })?;
    csvio::write_file(&cfg.out.join("autocorr.csv"), |b| csvio::write_autocorr(b, &corr))?;
    let step = step?;
    csvio::write_file(&cfg.out.join("step.csv"), |b| csvio::write_step(b, &step))?;
    let params_digest = match &spec {
        EngineSpec::D1(p) => p.digest(),
        EngineSpec::D2(p) => {
            p.digest_for(&PBitNetwork::new(NetworkKind::Directed, 1, vec![0.0], vec![0.0], 1.0)?)
        }
    };
    Ok(CharacterizeReport {
        params_digest,
        sigmoid,
        tau_corr: corr.fwhm,
        tau_step: step.tau_step,
    })
}

fn stride_for(interval: f64, dt: f64) -> u64 {
    (interval / dt).round().max(1.0) as u64
}
