//! Autonomous single-time-scale p-bit (spin-orbit-torque style).
//!
//! Each step a node keeps its spin with probability
//! `exp(-dt / (tau_N e^{I m}))` and flips otherwise, where `I` is the
//! (optionally filtered) synaptic input computed from the previous step.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::analysis::{
    params_digest, ClampedPBit, EngineKind, ParamWarning, SampleTrace, TraceMeta, TraceSink,
};
use crate::d1::{synapse_relax, Integrator};
use crate::error::{Error, Result};
use crate::network::{validate_network, PBitNetwork, Spin};
use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq)]
pub struct D2Params {
    pub tau_n: f64,
    pub tau_s: f64,
    /// `None` picks [`D2Params::default_dt`] for the network being run.
    pub dt: Option<f64>,
    pub duration: f64,
    /// `None` records roughly every `tau_N / 10`.
    pub record_stride: Option<u64>,
    pub integrator: Integrator,
}

impl D2Params {
    pub fn new(tau_n: f64, duration: f64) -> Self {
        Self {
            tau_n,
            tau_s: 0.0,
            dt: None,
            duration,
            record_stride: None,
            integrator: Integrator::Auto,
        }
    }

    /// `tau_N min(1/20, e^{-|I|max}/10)`, also bounded by `tau_S / 20`.
    pub fn default_dt(&self, max_abs_input: f64) -> f64 {
        let mut dt = self.tau_n * (0.05f64).min(0.1 * libm::exp(-max_abs_input));
        if self.tau_s > 0.0 {
            dt = dt.min(self.tau_s / 20.0);
        }
        dt
    }

    pub fn dt_for(&self, net: &PBitNetwork) -> f64 {
        self.dt.unwrap_or_else(|| self.default_dt(net.max_abs_input()))
    }

    fn stride(&self, dt: f64) -> u64 {
        self.record_stride
            .unwrap_or_else(|| libm::floor(0.1 * self.tau_n / dt).max(1.0) as u64)
    }

    fn steps(&self, dt: f64) -> u64 {
        libm::round(self.duration / dt).max(1.0) as u64
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

    pub fn check(&self, max_abs_input: f64) -> Result<Vec<ParamWarning>> {
        let dt = self.dt.unwrap_or_else(|| self.default_dt(max_abs_input));
        if !(self.tau_n.is_finite() && self.tau_n > 0.0) {
            return Err(Error::InvalidArgument("tau_N must be positive".into()));
        }
        if !(self.tau_s.is_finite() && self.tau_s >= 0.0) {
            return Err(Error::InvalidArgument("tau_S must be nonnegative".into()));
        }
        if !(dt.is_finite() && dt > 0.0 && self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InvalidArgument("dt and duration must be positive".into()));
        }
        if self.record_stride == Some(0) {
            return Err(Error::InvalidArgument("record stride must be positive".into()));
        }
        let mut limit = self.tau_n / 10.0;
        if self.tau_s > 0.0 {
            limit = limit.min(self.tau_s / 10.0);
        }
        // fastest flip time must span at least two steps
        limit = limit.min(0.5 * self.tau_n * libm::exp(-max_abs_input));
        let mut warnings = Vec::new();
        if dt > limit {
            warnings.push(ParamWarning::UnstableTimestep { dt, limit });
        }
        Ok(warnings)
    }

    pub fn digest_for(&self, net: &PBitNetwork) -> u64 {
        self.digest(self.dt_for(net))
    }

    fn digest(&self, dt: f64) -> u64 {
        params_digest(&[
            self.tau_n.to_bits(),
            self.tau_s.to_bits(),
            dt.to_bits(),
            self.duration.to_bits(),
            self.stride(dt),
        ])
    }
}

/// Retention probability `exp(-dt / (tau_N e^{I m}))`.
#[inline]
pub fn not_flip_probability(m: Spin, input: f64, dt: f64, tau_n: f64) -> f64 {
    libm::exp(-dt / (tau_n * libm::exp(input * m.value())))
}

/// One step of the single-time-scale p-bit: keep `m` if `rand[0,1] < p_NOTflip`.
#[inline]
pub fn d2_step(m: Spin, input: f64, dt: f64, tau_n: f64, stream: &mut RandomStream) -> Spin {
    if stream.uniform01() < not_flip_probability(m, input, dt, tau_n) {
        m
    } else {
        -m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct D2State {
    pub m: Vec<Spin>,
    pub input: Vec<f64>,
    pub t: f64,
}

impl D2State {
    pub fn initial(net: &PBitNetwork, streams: &mut [RandomStream]) -> Self {
        let m: Vec<Spin> = streams.iter_mut().map(|s| Spin::from_bool(s.coin())).collect();
        let input = (0..net.n_nodes())
            .map(|i| net.gain() * net.local_field(i, &m))
            .collect();
        Self { m, input, t: 0.0 }
    }
}

pub fn run_autonomous_d2_into<S: TraceSink + ?Sized>(
    net: &PBitNetwork,
    p: &D2Params,
    seed: u64,
    sink: &mut S,
) -> Result<Vec<ParamWarning>> {
    let warnings = p.check(net.max_abs_input())?;
    for w in &warnings {
        log::warn!("{w}");
    }
    validate_network(net).into_result()?;
    let mut streams: Vec<RandomStream> = (0..net.n_nodes())
        .map(|i| RandomStream::new(seed, i as u64))
        .collect();
    let state = D2State::initial(net, &mut streams);
    if p.uses_events()? {
        run_events(net, p, state, &mut streams, sink);
    } else {
        run_stepped(net, p, state, &mut streams, sink);
    }
    Ok(warnings)
}

pub fn run_autonomous_d2(net: &PBitNetwork, p: &D2Params, seed: u64) -> Result<SampleTrace> {
    let mut trace = SampleTrace::new(
        net.n_nodes(),
        TraceMeta::new(EngineKind::Design2, seed, p.digest(p.dt_for(net))),
    );
    trace.meta.warnings = run_autonomous_d2_into(net, p, seed, &mut trace)?;
    Ok(trace)
}

fn run_stepped<S: TraceSink + ?Sized>(
    net: &PBitNetwork,
    p: &D2Params,
    mut state: D2State,
    streams: &mut [RandomStream],
    sink: &mut S,
) {
    let dt = p.dt_for(net);
    let stride = p.stride(dt);
    let mut prev = state.m.clone();
    for k in 1..=p.steps(dt) {
        for i in 0..net.n_nodes() {
            let target = net.gain() * net.local_field(i, &prev);
            state.input[i] = synapse_relax(state.input[i], target, dt, p.tau_s);
            state.m[i] = d2_step(prev[i], state.input[i], dt, p.tau_n, &mut streams[i]);
        }
        prev.copy_from_slice(&state.m);
        state.t = k as f64 * dt;
        if k % stride == 0 {
            sink.record(state.t, &prev);
        }
    }
}

/// Flips are scheduled as geometric step counts at the current flip rate and
/// rescheduled whenever a node's input or spin changes (valid because the
/// per-step trials are memoryless).
fn run_events<S: TraceSink + ?Sized>(
    net: &PBitNetwork,
    p: &D2Params,
    state: D2State,
    streams: &mut [RandomStream],
    sink: &mut S,
) {
    let n = net.n_nodes();
    let dt = p.dt_for(net);
    let total = p.steps(dt);
    let stride = p.stride(dt);
    let mut m = state.m;
    let wait = |i: usize, m: &[Spin], stream: &mut RandomStream| {
        let input = net.gain() * net.local_field(i, m);
        stream.geometric_steps(dt, p.tau_n * libm::exp(input * m[i].value()))
    };
    let mut next: Vec<u64> = (0..n).map(|i| wait(i, &m, &mut streams[i])).collect();
    let mut queue: BinaryHeap<Reverse<(u64, usize)>> =
        next.iter().enumerate().map(|(i, &s)| Reverse((s, i))).collect();
    let mut stamp = vec![u64::MAX; n];
    let mut flipped = Vec::new();
    let mut touched = Vec::new();
    let mut next_record = stride;

    loop {
        let s = match queue.peek() {
            Some(&Reverse((s, _))) if s <= total => s,
            _ => total + 1,
        };
        while next_record < s && next_record <= total {
            sink.record(next_record as f64 * dt, &m);
            next_record += stride;
        }
        if s > total {
            break;
        }
        flipped.clear();
        while let Some(&Reverse((t, i))) = queue.peek() {
            if t != s {
                break;
            }
            queue.pop();
            if next[i] == s && stamp[i] != s {
                stamp[i] = s;
                flipped.push(i);
            }
        }
        touched.clear();
        for &i in &flipped {
            m[i] = -m[i];
            touched.push(i);
            touched.extend_from_slice(net.fanout(i));
        }
        let mark = s.wrapping_add(1 << 63);
        for &i in &touched {
            if stamp[i] == mark {
                continue;
            }
            stamp[i] = mark;
            next[i] = s.saturating_add(wait(i, &m, &mut streams[i]));
            queue.push(Reverse((next[i], i)));
        }
    }
}

/// Single Design-2 p-bit with an externally clamped input.
#[derive(Debug, Clone)]
pub struct ClampedD2 {
    params: D2Params,
    dt: f64,
    m: Spin,
    input: f64,
}

impl ClampedD2 {
    /// `max_abs_input` bounds the inputs that will be applied; it fixes the
    /// default time step.
    pub fn new(params: D2Params, max_abs_input: f64) -> Self {
        let dt = params.dt.unwrap_or_else(|| params.default_dt(max_abs_input));
        Self {
            params,
            dt,
            m: Spin::Up,
            input: 0.0,
        }
    }
}

impl ClampedPBit for ClampedD2 {
    fn dt(&self) -> f64 {
        self.dt
    }

    /// Draws the spin from the exact stationary law of the discrete two-state chain.
    fn equilibrate(&mut self, input: f64, stream: &mut RandomStream) {
        let leave_up = 1.0 - not_flip_probability(Spin::Up, input, self.dt, self.params.tau_n);
        let leave_down = 1.0 - not_flip_probability(Spin::Down, input, self.dt, self.params.tau_n);
        let p_up = leave_down / (leave_up + leave_down);
        self.m = Spin::from_bool(stream.uniform01() < p_up);
        self.input = input;
    }

    fn step(&mut self, input: f64, stream: &mut RandomStream) -> Spin {
        self.input = synapse_relax(self.input, input, self.dt, self.params.tau_s);
        self.m = d2_step(self.m, self.input, self.dt, self.params.tau_n, stream);
        self.m
    }

    fn spin(&self) -> Spin {
        self.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{histogram, tv_distance, MeanSink};
    use crate::network::{Edge, NetworkKind, NodeId};
    use crate::oracle::{bn_joint, boltzmann_joint};

    #[test]
    fn retention_at_zero_input() {
        let mut s = RandomStream::new(1, 0);
        let p = not_flip_probability(Spin::Up, 0.0, 0.01, 1.0);
        assert!((p - 0.99005).abs() < 1e-5);
        let n = 1_000_000u64;
        let kept = (0..n)
            .filter(|_| d2_step(Spin::Up, 0.0, 0.01, 1.0, &mut s) == Spin::Up)
            .count() as f64;
        let sd = libm::sqrt(n as f64 * p * (1.0 - p));
        assert!((kept - n as f64 * p).abs() < 3.0 * sd);
    }

    #[test]
    fn aligned_state_retained_longer() {
        let up = not_flip_probability(Spin::Up, 2.0, 0.01, 1.0);
        let down = not_flip_probability(Spin::Down, 2.0, 0.01, 1.0);
        assert!(up > down);
    }

    fn lone(h: f64) -> PBitNetwork {
        PBitNetwork::new(NetworkKind::Directed, 1, vec![0.0], vec![h], 1.0).unwrap()
    }

    #[test]
    fn detailed_balance_marginal() {
        for integrator in [Integrator::EventDriven, Integrator::Stepped] {
            let mut p = D2Params::new(1.0, 2e4);
            p.integrator = integrator;
            let mut sink = MeanSink::new(1);
            run_autonomous_d2_into(&lone(1.0), &p, 3, &mut sink).unwrap();
            let p_up = 0.5 * (1.0 + sink.mean(0));
            assert!((p_up - 0.8808).abs() < 0.01, "{integrator:?}: {p_up}");
        }
    }

    fn pair(kind: NetworkKind, gain: f64) -> PBitNetwork {
        PBitNetwork::from_edges(
            kind,
            vec![0.0; 2],
            gain,
            &[Edge {
                from: NodeId(0),
                to: NodeId(1),
                weight: 1.0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn symmetric_pair_boltzmann() {
        let net = pair(NetworkKind::Symmetric, 0.5);
        let t = run_autonomous_d2(&net, &D2Params::new(1.0, 3e4), 4).unwrap();
        let h = histogram(&t, &[NodeId(0), NodeId(1)]).unwrap();
        let agree = h.probs()[0] + h.probs()[3];
        assert!((agree - 0.7311).abs() < 0.02, "{agree}");
        assert!(tv_distance(&h, &boltzmann_joint(&net).unwrap()).unwrap() < 0.02);
    }

    #[test]
    fn directed_pair_fails_chain_rule() {
        // continuous-time analysis gives P(agree) = 3.718/5.086 ~ 0.731, not 0.881
        let net = pair(NetworkKind::Directed, 1.0);
        let t = run_autonomous_d2(&net, &D2Params::new(1.0, 3e4), 5).unwrap();
        let h = histogram(&t, &[NodeId(0), NodeId(1)]).unwrap();
        let agree = h.probs()[0] + h.probs()[3];
        let e = core::f64::consts::E;
        let expected = (1.0 + e) / (2.0 + e + 1.0 / e);
        assert!((agree - expected).abs() < 0.02, "{agree} vs {expected}");
        assert!(tv_distance(&h, &bn_joint(&net).unwrap()).unwrap() > 0.1);
    }

    #[test]
    fn integrators_agree() {
        let net = pair(NetworkKind::Directed, 1.0);
        let both = [NodeId(0), NodeId(1)];
        let mut p = D2Params::new(1.0, 2e4);
        p.record_stride = Some(3);
        let ev = histogram(&run_autonomous_d2(&net, &p, 6).unwrap(), &both).unwrap();
        p.integrator = Integrator::Stepped;
        let st = histogram(&run_autonomous_d2(&net, &p, 6).unwrap(), &both).unwrap();
        assert!(tv_distance(&ev, &st).unwrap() < 0.015);
    }

    #[test]
    fn stationary_equilibration() {
        let mut x = ClampedD2::new(D2Params::new(1.0, 1.0), 3.0);
        let mut s = RandomStream::new(2, 0);
        let n = 100_000;
        let mut up = 0;
        for _ in 0..n {
            x.equilibrate(-3.0, &mut s);
            up += x.spin().is_up() as u32;
        }
        let p = up as f64 / n as f64;
        assert!((p - 0.5 * (1.0 - libm::tanh(3.0))).abs() < 0.002);
    }

    #[test]
    fn deterministic() {
        let net = pair(NetworkKind::Symmetric, 1.0);
        let p = D2Params::new(1.0, 100.0);
        assert_eq!(
            run_autonomous_d2(&net, &p, 1).unwrap(),
            run_autonomous_d2(&net, &p, 1).unwrap()
        );
    }

    #[test]
    fn coarse_step_warns() {
        let mut p = D2Params::new(1.0, 1.0);
        assert!(p.check(3.0).unwrap().is_empty());
        p.dt = Some(0.05);
        assert_eq!(p.check(3.0).unwrap().len(), 1);
    }
}
