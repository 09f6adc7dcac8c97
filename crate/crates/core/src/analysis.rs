//! Traces and the statistics extracted from them: histograms, autocorrelation
//! width, ensemble step response, sigmoid sweeps and total-variation distance.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::d1::{run_autonomous_d1_into, D1Params};
use crate::d2::{run_autonomous_d2_into, D2Params};
use crate::error::{Error, Result};
use crate::network::{NetworkKind, NodeId, PBitNetwork, Spin};
use crate::oracle::DistributionTable;
use crate::rng::{derive_seed, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngineKind {
    Clocked,
    Design1,
    Design2,
    Oracle,
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::Clocked => "clocked",
            EngineKind::Design1 => "d1",
            EngineKind::Design2 => "d2",
            EngineKind::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamWarning {
    /// `dt` exceeds the accuracy limit derived from the model's time constants.
    UnstableTimestep { dt: f64, limit: f64 },
}

impl fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamWarning::UnstableTimestep { dt, limit } => {
                write!(f, "time step {dt} exceeds recommended limit {limit}")
            }
        }
    }
}

/// FNV-1a over 64-bit words; identifies a parameter set in trace metadata.
pub fn params_digest(words: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub engine: EngineKind,
    pub seed: u64,
    pub params_digest: u64,
    pub warnings: Vec<ParamWarning>,
}

impl TraceMeta {
    pub fn new(engine: EngineKind, seed: u64, params_digest: u64) -> Self {
        Self {
            engine,
            seed,
            params_digest,
            warnings: Vec::new(),
        }
    }
}

/// Receives spin vectors as an engine produces them.
pub trait TraceSink {
    fn record(&mut self, t: f64, spins: &[Spin]);
}

impl<A: TraceSink, B: TraceSink> TraceSink for (A, B) {
    fn record(&mut self, t: f64, spins: &[Spin]) {
        self.0.record(t, spins);
        self.1.record(t, spins);
    }
}

/// Time-stamped spin vectors, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTrace {
    n_nodes: usize,
    times: Vec<f64>,
    spins: Vec<Spin>,
    pub meta: TraceMeta,
}

impl SampleTrace {
    pub fn new(n_nodes: usize, meta: TraceMeta) -> Self {
        Self {
            n_nodes,
            times: Vec::new(),
            spins: Vec::new(),
            meta,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, k: usize) -> &[Spin] {
        &self.spins[k * self.n_nodes..(k + 1) * self.n_nodes]
    }

    pub fn states(&self) -> impl Iterator<Item = &[Spin]> + '_ {
        self.spins.chunks_exact(self.n_nodes.max(1))
    }

    /// Append a sample; times must strictly increase.
    pub fn push(&mut self, t: f64, spins: &[Spin]) -> Result<()> {
        if spins.len() != self.n_nodes {
            return Err(Error::DimensionMismatch {
                what: "spin vector",
                expected: self.n_nodes,
                found: spins.len(),
            });
        }
        if self.times.last().is_some_and(|&last| !(t > last)) {
            return Err(Error::InvalidArgument("trace times must strictly increase".into()));
        }
        self.times.push(t);
        self.spins.extend_from_slice(spins);
        Ok(())
    }

    /// Signal of one node as `+-1.0`.
    pub fn node_signal(&self, node: NodeId) -> Result<Vec<f64>> {
        if node.0 >= self.n_nodes {
            return Err(Error::UnknownNode(node));
        }
        Ok(self.states().map(|s| s[node.0].value()).collect())
    }
}

impl TraceSink for SampleTrace {
    fn record(&mut self, t: f64, spins: &[Spin]) {
        self.push(t, spins).expect("engine produced an inconsistent sample");
    }
}

/// Streaming histogram over a node subset.
#[derive(Debug, Clone)]
pub struct HistogramSink {
    subset: Vec<NodeId>,
    counts: Vec<u64>,
}

impl HistogramSink {
    pub fn new(subset: &[NodeId]) -> Self {
        Self {
            subset: subset.to_vec(),
            counts: vec![0; 1 << subset.len()],
        }
    }

    pub fn samples(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn table(&self) -> Result<DistributionTable> {
        let total = self.samples();
        if total == 0 {
            return Err(Error::InvalidArgument("empty trace".into()));
        }
        let probs = self.counts.iter().map(|&c| c as f64 / total as f64).collect();
        DistributionTable::new(self.subset.clone(), probs)
    }
}

impl TraceSink for HistogramSink {
    #[inline]
    fn record(&mut self, _t: f64, spins: &[Spin]) {
        let mut idx = 0;
        for (p, id) in self.subset.iter().enumerate() {
            idx |= (spins[id.0].is_up() as usize) << p;
        }
        self.counts[idx] += 1;
    }
}

/// Running per-node mean of `m`.
#[derive(Debug, Clone)]
pub struct MeanSink {
    sums: Vec<i64>,
    samples: u64,
}

impl MeanSink {
    pub fn new(n_nodes: usize) -> Self {
        Self {
            sums: vec![0; n_nodes],
            samples: 0,
        }
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn mean(&self, node: usize) -> f64 {
        self.sums[node] as f64 / self.samples as f64
    }
}

impl TraceSink for MeanSink {
    #[inline]
    fn record(&mut self, _t: f64, spins: &[Spin]) {
        for (s, m) in self.sums.iter_mut().zip(spins) {
            *s += *m as i8 as i64;
        }
        self.samples += 1;
    }
}

/// Empirical distribution of `subset` over all samples of `trace`.
pub fn histogram(trace: &SampleTrace, subset: &[NodeId]) -> Result<DistributionTable> {
    if let Some(bad) = subset.iter().find(|id| id.0 >= trace.n_nodes) {
        return Err(Error::UnknownNode(*bad));
    }
    let mut sink = HistogramSink::new(subset);
    for (k, s) in trace.states().enumerate() {
        sink.record(trace.times[k], s);
    }
    sink.table()
}

/// `(1/2) sum |p - q|`.
pub fn tv_distance(p: &DistributionTable, q: &DistributionTable) -> Result<f64> {
    if p.nodes() != q.nodes() {
        return Err(Error::SubsetMismatch);
    }
    Ok(0.5
        * p.probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| libm::fabs(a - b))
            .sum::<f64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrResult {
    /// Nonnegative lags; the function is even in the lag.
    pub lags: Vec<f64>,
    pub c: Vec<f64>,
    /// Width of the two-sided window where `c >= 1/2`.
    pub fwhm: f64,
}

/// Normalized autocorrelation of the mean-removed signal of `node`, with the
/// biased (`1/n`) estimator, and its full width at half maximum.
pub fn autocorrelation(trace: &SampleTrace, node: NodeId, max_lag: f64) -> Result<AutocorrResult> {
    let x = trace.node_signal(node)?;
    autocorrelation_of(&x, trace.times(), max_lag)
}

pub(crate) fn autocorrelation_of(signal: &[f64], times: &[f64], max_lag: f64) -> Result<AutocorrResult> {
    let n = signal.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let step = times[1] - times[0];
    let uniform = times
        .windows(2)
        .all(|w| libm::fabs((w[1] - w[0]) - step) <= 1e-6 * step);
    if !uniform || !(step > 0.0) {
        return Err(Error::InvalidArgument("trace must be uniformly sampled".into()));
    }
    if !(max_lag > 0.0) || times[n - 1] - times[0] < 10.0 * max_lag {
        return Err(Error::InvalidArgument(
            "trace must span at least ten times the maximum lag".into(),
        ));
    }
    let lag_steps = libm::floor(max_lag / step + 1e-9) as usize;
    let mean = signal.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = signal.iter().map(|v| v - mean).collect();
    let var = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if var <= 1e-300 {
        return Err(Error::ConstantTrace);
    }
    let c: Vec<f64> = (0..=lag_steps)
        .map(|k| {
            let s: f64 = x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum();
            s / n as f64 / var
        })
        .collect();
    let k = c.iter().position(|&v| v < 0.5).ok_or_else(|| {
        Error::InvalidArgument("autocorrelation stays above 1/2 within the maximum lag".into())
    })?;
    // c[0] = 1, so k >= 1
    let frac = (c[k - 1] - 0.5) / (c[k - 1] - c[k]);
    let half = step * ((k - 1) as f64 + frac);
    Ok(AutocorrResult {
        lags: (0..=lag_steps).map(|k| k as f64 * step).collect(),
        c,
        fwhm: 2.0 * half,
    })
}

/// A single p-bit driven by an externally supplied input.
pub trait ClampedPBit {
    fn dt(&self) -> f64;
    /// Draw a state from the stationary law at constant `input`.
    fn equilibrate(&mut self, input: f64, stream: &mut RandomStream);
    fn step(&mut self, input: f64, stream: &mut RandomStream) -> Spin;
    fn spin(&self) -> Spin;
}

/// Autonomous engine and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum EngineSpec {
    D1(D1Params),
    D2(D2Params),
}

impl EngineSpec {
    pub fn kind(&self) -> EngineKind {
        match self {
            EngineSpec::D1(_) => EngineKind::Design1,
            EngineSpec::D2(_) => EngineKind::Design2,
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            EngineSpec::D1(p) => p.duration,
            EngineSpec::D2(p) => p.duration,
        }
    }

    /// Fluctuation time of the engine (`tau_N0` or `tau_N`).
    pub fn fluctuation_time(&self) -> f64 {
        match self {
            EngineSpec::D1(p) => p.tau_n0,
            EngineSpec::D2(p) => p.tau_n,
        }
    }

    pub fn with_duration(&self, duration: f64) -> Self {
        let mut e = self.clone();
        match &mut e {
            EngineSpec::D1(p) => p.duration = duration,
            EngineSpec::D2(p) => p.duration = duration,
        }
        e
    }

    pub fn run_into<S: TraceSink + ?Sized>(
        &self,
        net: &PBitNetwork,
        seed: u64,
        sink: &mut S,
    ) -> Result<Vec<ParamWarning>> {
        match self {
            EngineSpec::D1(p) => run_autonomous_d1_into(net, p, seed, sink),
            EngineSpec::D2(p) => run_autonomous_d2_into(net, p, seed, sink),
        }
    }

    fn clamped(&self, max_abs_input: f64) -> alloc::boxed::Box<dyn ClampedPBit> {
        match self {
            EngineSpec::D1(p) => alloc::boxed::Box::new(crate::d1::ClampedD1::new(p.clone())),
            EngineSpec::D2(p) => {
                alloc::boxed::Box::new(crate::d2::ClampedD2::new(p.clone(), max_abs_input))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResponseResult {
    pub times: Vec<f64>,
    pub ensemble_mean: Vec<f64>,
    pub tau_step: f64,
    pub n_ensembles: usize,
}

/// Ensemble-averaged response of a single p-bit equilibrated at `i_initial`
/// whose input jumps to `i_final` at `t = 0`. The run lasts the engine's
/// `duration`; its final quarter defines the settled value, and `tau_step`
/// is the first (interpolated) time the mean covers `1 - 1/e` of the gap.
pub fn step_response(
    engine: &EngineSpec,
    n_ensembles: usize,
    i_initial: f64,
    i_final: f64,
    seed: u64,
) -> Result<StepResponseResult> {
    if n_ensembles < 100 {
        return Err(Error::InvalidArgument("step response needs at least 100 ensembles".into()));
    }
    let mut bit = engine.clamped(libm::fabs(i_initial).max(libm::fabs(i_final)));
    let dt = bit.dt();
    let steps = libm::round(engine.duration() / dt).max(4.0) as usize;
    let mut sums = vec![0i64; steps + 1];
    for e in 0..n_ensembles {
        let mut stream = RandomStream::new(derive_seed(seed, e as u64), 0);
        bit.equilibrate(i_initial, &mut stream);
        sums[0] += bit.spin() as i8 as i64;
        for s in sums.iter_mut().skip(1) {
            *s += bit.step(i_final, &mut stream) as i8 as i64;
        }
    }
    let mean: Vec<f64> = sums.iter().map(|&s| s as f64 / n_ensembles as f64).collect();
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let tau_step = crossing_time(&times, &mean, n_ensembles)?;
    Ok(StepResponseResult {
        times,
        ensemble_mean: mean,
        tau_step,
        n_ensembles,
    })
}

fn crossing_time(times: &[f64], mean: &[f64], n_ensembles: usize) -> Result<f64> {
    let tail = &mean[mean.len() - mean.len() / 4..];
    let settled = tail.iter().sum::<f64>() / tail.len() as f64;
    let start = mean[0];
    let gap = settled - start;
    if libm::fabs(gap) < 5.0 / libm::sqrt(n_ensembles as f64) {
        return Err(Error::NotConverged);
    }
    let level = 1.0 - libm::exp(-1.0);
    let progress = |k: usize| (mean[k] - start) / gap;
    let k = (1..mean.len()).find(|&k| progress(k) >= level).ok_or(Error::NotConverged)?;
    let (p0, p1) = (progress(k - 1), progress(k));
    Ok(times[k - 1] + (times[k] - times[k - 1]) * (level - p0) / (p1 - p0))
}

/// Long-run average output of a single p-bit at each clamped input. Each
/// point runs for the engine's `duration`.
pub fn sigmoid_sweep(engine: &EngineSpec, inputs: &[f64], seed: u64) -> Result<Vec<(f64, f64)>> {
    inputs
        .iter()
        .enumerate()
        .map(|(k, &input)| {
            let net = PBitNetwork::new(NetworkKind::Directed, 1, vec![0.0], vec![input], 1.0)?;
            let mut sink = MeanSink::new(1);
            engine.run_into(&net, derive_seed(seed, k as u64), &mut sink)?;
            Ok((input, sink.mean(0)))
        })
        .collect()
}
