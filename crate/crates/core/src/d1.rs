//! Autonomous transistor + stochastic-MTJ p-bit (two time scales).
//!
//! Per node and per time step `dt`, all nodes reading the previous step's
//! spins:
//!
//! ```text
//! I     <- relax(I, I_0 (h_i + sum_j J_ij m_j), dt, tau_S)
//! r_T   <- r_T e^{-dt/tau_T} + (1 - e^{-dt/tau_T}) tanh(I)
//! r_MTJ <- redrawn with probability 1 - e^{-dt/tau_N}, tau_N = tau_N0 e^{r_MTJ I_MTJ}
//! m     <- sgn(r_T - r_MTJ)
//! ```
//!
//! Two integrators produce this process. [`Integrator::Stepped`] walks every
//! step. [`Integrator::EventDriven`] (requires `tau_S = 0`) jumps between
//! redraws and threshold crossings: redraw waits are sampled as geometric
//! step counts and the step at which the relaxing `r_T` crosses `r_MTJ` is
//! solved in closed form, so cost scales with the number of events instead
//! of the number of steps.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::analysis::{
    params_digest, ClampedPBit, EngineKind, ParamWarning, SampleTrace, TraceMeta, TraceSink,
};
use crate::error::{Error, Result};
use crate::network::{validate_network, PBitNetwork, Spin};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MtjMode {
    /// `r_MTJ` redrawn uniformly on `[-1, 1]` (circular in-plane magnet).
    Continuous,
    /// `r_MTJ` redrawn uniformly from `{-1, +1}` (telegraphic magnet).
    Bipolar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Integrator {
    /// Event-driven when the model allows it, stepped otherwise.
    #[default]
    Auto,
    Stepped,
    EventDriven,
}

/// Design-1 parameters. Times share one unit (ns throughout this crate).
#[derive(Debug, Clone, PartialEq)]
pub struct D1Params {
    pub tau_t: f64,
    pub tau_n0: f64,
    pub tau_s: f64,
    /// `None` picks [`D1Params::default_dt`].
    pub dt: Option<f64>,
    pub i_mtj: f64,
    pub duration: f64,
    pub mtj_mode: MtjMode,
    /// `None` records roughly every `tau_N0 / 10`.
    pub record_stride: Option<u64>,
    pub integrator: Integrator,
}

impl D1Params {
    pub fn new(tau_t: f64, tau_n0: f64, duration: f64) -> Self {
        Self {
            tau_t,
            tau_n0,
            tau_s: 0.0,
            dt: None,
            i_mtj: 0.0,
            duration,
            mtj_mode: MtjMode::Continuous,
            record_stride: None,
            integrator: Integrator::Auto,
        }
    }

    /// `min(tau_T, tau_S (if > 0), tau_N0) / 20`.
    pub fn default_dt(&self) -> f64 {
        let mut m = self.tau_t.min(self.tau_n0);
        if self.tau_s > 0.0 {
            m = m.min(self.tau_s);
        }
        m / 20.0
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or_else(|| self.default_dt())
    }

    pub fn stride(&self) -> u64 {
        self.record_stride
            .unwrap_or_else(|| libm::floor(0.1 * self.tau_n0 / self.dt()).max(1.0) as u64)
    }

    pub fn steps(&self) -> u64 {
        libm::round(self.duration / self.dt()).max(1.0) as u64
    }

    fn uses_events(&self) -> Result<bool> {
        match self.integrator {
            Integrator::Stepped => Ok(false),
            Integrator::Auto => Ok(self.tau_s == 0.0),
            Integrator::EventDriven if self.tau_s == 0.0 => Ok(true),
            Integrator::EventDriven => Err(Error::InvalidArgument(
                "event-driven integration requires tau_S = 0".into(),
            )),
        }
    }

    /// Hard parameter errors, plus warnings for steps that are too coarse.
    pub fn check(&self) -> Result<Vec<ParamWarning>> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.tau_t) || !positive(self.tau_n0) {
            return Err(Error::InvalidArgument("tau_T and tau_N0 must be positive".into()));
        }
        if !(self.tau_s.is_finite() && self.tau_s >= 0.0) {
            return Err(Error::InvalidArgument("tau_S must be nonnegative".into()));
        }
        if !positive(self.dt()) || !positive(self.duration) {
            return Err(Error::InvalidArgument("dt and duration must be positive".into()));
        }
        if !self.i_mtj.is_finite() {
            return Err(Error::InvalidArgument("I_MTJ must be finite".into()));
        }
        if self.record_stride == Some(0) {
            return Err(Error::InvalidArgument("record stride must be positive".into()));
        }
        let mut limit = self.tau_t.min(self.tau_n0);
        if self.tau_s > 0.0 {
            limit = limit.min(self.tau_s);
        }
        limit /= 10.0;
        let mut warnings = Vec::new();
        if self.dt() > limit {
            warnings.push(ParamWarning::UnstableTimestep {
                dt: self.dt(),
                limit,
            });
        }
        Ok(warnings)
    }

    /// Identifies the parameter set in trace metadata.
    pub fn digest(&self) -> u64 {
        params_digest(&[
            self.tau_t.to_bits(),
            self.tau_n0.to_bits(),
            self.tau_s.to_bits(),
            self.dt().to_bits(),
            self.i_mtj.to_bits(),
            self.duration.to_bits(),
            self.mtj_mode as u64,
            self.stride(),
        ])
    }
}

/// First-order transistor response: `r_T e^{-dt/tau_T} + (1 - e^{-dt/tau_T}) tanh(input)`.
#[inline]
pub fn rt_relax(r_t: f64, input: f64, dt: f64, tau_t: f64) -> f64 {
    let a = libm::exp(-dt / tau_t);
    r_t * a + (1.0 - a) * libm::tanh(input)
}

/// Synapse relaxation toward `target`; `tau_S = 0` is instantaneous.
#[inline]
pub fn synapse_relax(input: f64, target: f64, dt: f64, tau_s: f64) -> f64 {
    if tau_s == 0.0 {
        target
    } else {
        let b = libm::exp(-dt / tau_s);
        input * b + (1.0 - b) * target
    }
}

#[inline]
fn draw_mtj(mode: MtjMode, stream: &mut RandomStream) -> f64 {
    match mode {
        MtjMode::Continuous => stream.uniform_pm1(),
        MtjMode::Bipolar => {
            if stream.coin() {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// One step of the fluctuating MTJ: redraw with probability `1 - e^{-dt/tau_N}`.
#[inline]
pub fn mtj_step(r_mtj: f64, dt: f64, tau_n: f64, mode: MtjMode, stream: &mut RandomStream) -> f64 {
    // keep iff exp(-dt/tau_N) >= rand[0,1]
    if stream.uniform01() > libm::exp(-dt / tau_n) {
        draw_mtj(mode, stream)
    } else {
        r_mtj
    }
}

/// Pinned retention time `tau_N0 e^{r_MTJ I_MTJ}`.
#[inline]
pub fn effective_tau_n(tau_n0: f64, r_mtj: f64, i_mtj: f64) -> f64 {
    if i_mtj == 0.0 {
        tau_n0
    } else {
        tau_n0 * libm::exp(r_mtj * i_mtj)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D1Node {
    pub r_t: f64,
    pub r_mtj: f64,
    pub input: f64,
    pub m: Spin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct D1State {
    pub nodes: Vec<D1Node>,
    pub t: f64,
}

impl D1State {
    /// Fair-coin spins, `I(0)` from them, `r_T = tanh(I(0))`, fresh `r_MTJ`,
    /// then `m = sgn(r_T - r_MTJ)`.
    pub fn initial(net: &PBitNetwork, mode: MtjMode, streams: &mut [RandomStream]) -> Self {
        let n = net.n_nodes();
        let coin: Vec<Spin> = streams.iter_mut().map(|s| Spin::from_bool(s.coin())).collect();
        let nodes = (0..n)
            .map(|i| {
                let input = net.gain() * net.local_field(i, &coin);
                let r_t = libm::tanh(input);
                let r_mtj = draw_mtj(mode, &mut streams[i]);
                D1Node {
                    r_t,
                    r_mtj,
                    input,
                    m: Spin::sgn(r_t - r_mtj),
                }
            })
            .collect();
        Self { nodes, t: 0.0 }
    }

    pub fn spins(&self) -> Vec<Spin> {
        self.nodes.iter().map(|n| n.m).collect()
    }
}

/// Run Design 1, feeding every `stride`-th step's spins to `sink`.
/// Returns parameter warnings.
pub fn run_autonomous_d1_into<S: TraceSink + ?Sized>(
    net: &PBitNetwork,
    p: &D1Params,
    seed: u64,
    sink: &mut S,
) -> Result<Vec<ParamWarning>> {
    let warnings = p.check()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    validate_network(net).into_result()?;
    let mut streams: Vec<RandomStream> = (0..net.n_nodes())
        .map(|i| RandomStream::new(seed, i as u64))
        .collect();
    let state = D1State::initial(net, p.mtj_mode, &mut streams);
    if p.uses_events()? {
        run_events(net, p, state, &mut streams, sink);
    } else {
        run_stepped(net, p, state, &mut streams, sink);
    }
    Ok(warnings)
}

pub fn run_autonomous_d1(net: &PBitNetwork, p: &D1Params, seed: u64) -> Result<SampleTrace> {
    let mut trace = SampleTrace::new(
        net.n_nodes(),
        TraceMeta::new(EngineKind::Design1, seed, p.digest()),
    );
    trace.meta.warnings = run_autonomous_d1_into(net, p, seed, &mut trace)?;
    Ok(trace)
}

fn run_stepped<S: TraceSink + ?Sized>(
    net: &PBitNetwork,
    p: &D1Params,
    mut state: D1State,
    streams: &mut [RandomStream],
    sink: &mut S,
) {
    let n = net.n_nodes();
    let dt = p.dt();
    let a = libm::exp(-dt / p.tau_t);
    let b = if p.tau_s == 0.0 { 0.0 } else { libm::exp(-dt / p.tau_s) };
    let keep_unpinned = libm::exp(-dt / p.tau_n0);
    let stride = p.stride();
    let mut prev = state.spins();
    for k in 1..=p.steps() {
        for (i, node) in state.nodes.iter_mut().enumerate() {
            let target = net.gain() * net.local_field(i, &prev);
            node.input = node.input * b + (1.0 - b) * target;
            node.r_t = node.r_t * a + (1.0 - a) * libm::tanh(node.input);
            let keep = if p.i_mtj == 0.0 {
                keep_unpinned
            } else {
                libm::exp(-dt / effective_tau_n(p.tau_n0, node.r_mtj, p.i_mtj))
            };
            if streams[i].uniform01() > keep {
                node.r_mtj = draw_mtj(p.mtj_mode, &mut streams[i]);
            }
            node.m = Spin::sgn(node.r_t - node.r_mtj);
        }
        for i in 0..n {
            prev[i] = state.nodes[i].m;
        }
        state.t = k as f64 * dt;
        if k % stride == 0 {
            sink.record(state.t, &prev);
        }
    }
}

const NEVER: u64 = u64::MAX;

struct EventNode {
    m: Spin,
    r_mtj: f64,
    tau_n: f64,
    // r_T(k) = target + (r_ref - target) exp(-(k - ref_step) dt / tau_T), k >= ref_step
    ref_step: u64,
    r_ref: f64,
    target: f64,
    next_redraw: u64,
    next_cross: u64,
}

impl EventNode {
    #[inline]
    fn r_t_at(&self, k: u64, h: f64) -> f64 {
        self.target + (self.r_ref - self.target) * libm::exp(-((k - self.ref_step) as f64) * h)
    }

    #[inline]
    fn next_event(&self) -> u64 {
        self.next_redraw.min(self.next_cross)
    }

    /// First step after `ref_step` (no later than `last`) at which the spin
    /// implied by `sgn(r_T - r_MTJ)` differs from `m`.
    fn crossing(&self, h: f64, last: u64) -> u64 {
        if last <= self.ref_step {
            return NEVER;
        }
        let flips = |n: u64| Spin::sgn(self.r_t_at(self.ref_step + n, h) - self.r_mtj) != self.m;
        let limit = last - self.ref_step;
        if !flips(limit) {
            return NEVER;
        }
        if flips(1) {
            return self.ref_step + 1;
        }
        // solve target - R + D e^{-n h} = 0 for a starting guess
        let d = self.r_ref - self.target;
        let gap = self.r_mtj - self.target;
        let guess = if d != 0.0 && gap / d > 0.0 {
            let x = libm::log(d / gap) / h;
            if x.is_finite() && x > 0.0 {
                (x as u64).saturating_add(1).clamp(2, limit)
            } else {
                limit
            }
        } else {
            limit
        };
        if flips(guess) && !flips(guess - 1) {
            return self.ref_step + guess;
        }
        // invariant: !flips(lo), flips(hi)
        let (mut lo, mut hi) = if flips(guess) { (1, guess) } else { (guess, limit) };
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if flips(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self.ref_step + hi
    }
}

fn run_events<S: TraceSink + ?Sized>(
    net: &PBitNetwork,
    p: &D1Params,
    state: D1State,
    streams: &mut [RandomStream],
    sink: &mut S,
) {
    let n = net.n_nodes();
    let dt = p.dt();
    let h = dt / p.tau_t;
    let total = p.steps();
    let stride = p.stride();

    let mut nodes: Vec<EventNode> = state
        .nodes
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let tau_n = effective_tau_n(p.tau_n0, s.r_mtj, p.i_mtj);
            EventNode {
                m: s.m,
                r_mtj: s.r_mtj,
                tau_n,
                ref_step: 0,
                r_ref: s.r_t,
                target: 0.0,
                next_redraw: streams[i].geometric_steps(dt, tau_n),
                next_cross: NEVER,
            }
        })
        .collect();
    let mut spins: Vec<Spin> = nodes.iter().map(|x| x.m).collect();
    let mut queue = BinaryHeap::new();
    for i in 0..n {
        let x = &mut nodes[i];
        x.target = libm::tanh(net.gain() * net.local_field(i, &spins));
        x.next_cross = x.crossing(h, total);
        queue.push(Reverse((x.next_event(), i)));
    }

    let mut stamp = vec![u64::MAX; n];
    let mut batch: Vec<usize> = Vec::new();
    let mut touched: Vec<usize> = Vec::new();
    let mut next_record = stride;

    loop {
        let s = match queue.peek() {
            Some(&Reverse((s, _))) if s <= total => s,
            _ => total + 1,
        };
        while next_record < s && next_record <= total {
            sink.record(next_record as f64 * dt, &spins);
            next_record += stride;
        }
        if s > total {
            break;
        }

        batch.clear();
        while let Some(&Reverse((t, i))) = queue.peek() {
            if t != s {
                break;
            }
            queue.pop();
            if nodes[i].next_event() == s && stamp[i] != s {
                stamp[i] = s;
                batch.push(i);
            }
        }

        touched.clear();
        for &i in &batch {
            let x = &mut nodes[i];
            if x.next_redraw == s {
                x.r_mtj = draw_mtj(p.mtj_mode, &mut streams[i]);
                x.tau_n = effective_tau_n(p.tau_n0, x.r_mtj, p.i_mtj);
                x.next_redraw = s.saturating_add(streams[i].geometric_steps(dt, x.tau_n));
            }
            let m = Spin::sgn(x.r_t_at(s, h) - x.r_mtj);
            touched.push(i);
            if m != x.m {
                x.m = m;
                spins[i] = m;
                touched.extend_from_slice(net.fanout(i));
            }
        }

        // Inputs for step s + 1 come from the spins at step s.
        for &i in &touched {
            if stamp[i] == s.wrapping_add(1 << 63) {
                continue;
            }
            stamp[i] = s.wrapping_add(1 << 63);
            let x = &mut nodes[i];
            x.r_ref = x.r_t_at(s, h);
            x.ref_step = s;
            x.target = libm::tanh(net.gain() * net.local_field(i, &spins));
            x.next_cross = x.crossing(h, total);
            queue.push(Reverse((x.next_event(), i)));
        }
    }
}

/// Single Design-1 p-bit with an externally clamped input.
#[derive(Debug, Clone)]
pub struct ClampedD1 {
    params: D1Params,
    node: D1Node,
}

impl ClampedD1 {
    pub fn new(params: D1Params) -> Self {
        Self {
            params,
            node: D1Node {
                r_t: 0.0,
                r_mtj: 0.0,
                input: 0.0,
                m: Spin::Up,
            },
        }
    }

    pub fn node(&self) -> &D1Node {
        &self.node
    }
}

impl ClampedPBit for ClampedD1 {
    fn dt(&self) -> f64 {
        self.params.dt()
    }

    /// Stationary state at a constant input: `r_T = tanh(input)` and a fresh `r_MTJ`.
    fn equilibrate(&mut self, input: f64, stream: &mut RandomStream) {
        let r_t = libm::tanh(input);
        let r_mtj = draw_mtj(self.params.mtj_mode, stream);
        self.node = D1Node {
            r_t,
            r_mtj,
            input,
            m: Spin::sgn(r_t - r_mtj),
        };
    }

    fn step(&mut self, input: f64, stream: &mut RandomStream) -> Spin {
        let p = &self.params;
        let dt = p.dt();
        let x = &mut self.node;
        x.input = synapse_relax(x.input, input, dt, p.tau_s);
        x.r_t = rt_relax(x.r_t, x.input, dt, p.tau_t);
        let tau_n = effective_tau_n(p.tau_n0, x.r_mtj, p.i_mtj);
        x.r_mtj = mtj_step(x.r_mtj, dt, tau_n, p.mtj_mode, stream);
        x.m = Spin::sgn(x.r_t - x.r_mtj);
        x.m
    }

    fn spin(&self) -> Spin {
        self.node.m
    }
}
