//! Expected neighbor-discovery latency.
//!
//! An advertiser starts at a uniformly distributed offset `phi` in
//! `[0, 3 T_s)` after the first scan event and repeats its three-channel
//! advertising event every `T_a0 + rho`, `rho ~ U[0, rho_max]`. A scanner
//! listens for `d_s` every `T_s`, cycling channels 37, 38, 39. Discovery
//! succeeds when the packet on the scanner's channel lies entirely inside a
//! scan window.

use std::fmt;

use rayon::prelude::*;

use crate::aggregate::AdvertiserEnergyInputs;
use crate::error::{Error, Result};
use crate::profile::DeviceProfile;

/// Default advertising packet duration including the interframe space (s).
pub const DEFAULT_D_A: f64 = 446e-6;
/// Default channel change duration of the advertiser (s).
pub const DEFAULT_D_CH: f64 = 150e-6;
/// Default bound of the random advertising delay (s).
pub const DEFAULT_RHO_MAX: f64 = 10e-3;

const T_A0_MIN: f64 = 20e-3;
const T_MAX: f64 = 10.24;
const CONTINUOUS_TOL: f64 = 1e-9;

/// Advertising channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Ch37,
    Ch38,
    Ch39,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Ch37, Channel::Ch38, Channel::Ch39];

    pub fn number(self) -> u8 {
        match self {
            Channel::Ch37 => 37,
            Channel::Ch38 => 38,
            Channel::Ch39 => 39,
        }
    }

    pub fn from_number(ch: u8) -> Result<Self> {
        match ch {
            37 => Ok(Channel::Ch37),
            38 => Ok(Channel::Ch38),
            39 => Ok(Channel::Ch39),
            other => Err(Error::out_of_range(
                "channel",
                format!("{other} is not an advertising channel"),
            )),
        }
    }

    /// Channel of scan event `k` (`k mod 3 + 37`).
    pub fn of_scan_event(k: i64) -> Self {
        Channel::ALL[k.rem_euclid(3) as usize]
    }

    /// Position within the advertising event (0, 1, 2).
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Advertising and scanning parameters (seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvScanParams {
    pub t_a0: f64,
    pub t_s: f64,
    pub d_s: f64,
    pub d_a: f64,
    pub d_ch: f64,
    pub rho_max: f64,
}

impl AdvScanParams {
    pub fn new(t_a0: f64, t_s: f64, d_s: f64) -> Self {
        AdvScanParams {
            t_a0,
            t_s,
            d_s,
            d_a: DEFAULT_D_A,
            d_ch: DEFAULT_D_CH,
            rho_max: DEFAULT_RHO_MAX,
        }
    }

    /// Packet and channel-change durations taken from `profile`.
    pub fn from_profile(profile: &DeviceProfile, t_a0: f64, t_s: f64, d_s: f64) -> Self {
        AdvScanParams {
            d_a: profile.adv_packet_duration,
            d_ch: profile.channel_change,
            ..Self::new(t_a0, t_s, d_s)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(T_A0_MIN..=T_MAX).contains(&self.t_a0) {
            return Err(Error::out_of_range(
                "t_a0",
                format!("{} s not in [0.02, 10.24] s", self.t_a0),
            ));
        }
        if !(self.t_s > 0.0 && self.t_s <= T_MAX) {
            return Err(Error::out_of_range(
                "t_s",
                format!("{} s not in (0, 10.24] s", self.t_s),
            ));
        }
        if !(self.d_s > 0.0 && self.d_s <= self.t_s) {
            return Err(Error::out_of_range(
                "d_s",
                format!("{} s not in (0, t_s = {}] s", self.d_s, self.t_s),
            ));
        }
        for (name, v) in [("d_a", self.d_a), ("d_ch", self.d_ch), ("rho_max", self.rho_max)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::out_of_range(name, format!("{v} s must be >= 0")));
            }
        }
        if self.d_s <= self.d_a {
            return Err(Error::out_of_range(
                "d_s",
                format!("{} s leaves no room for a {} s packet", self.d_s, self.d_a),
            ));
        }
        Ok(())
    }

    /// Mean advertising interval `T_a0 + E[rho]`.
    pub fn mean_interval(&self) -> f64 {
        self.t_a0 + self.rho_max / 2.0
    }

    /// Effective scan window `d_s - d_a`.
    pub fn d_s_eff(&self) -> f64 {
        self.d_s - self.d_a
    }

    /// Duration of an advertising event that ends with the packet on `ch`.
    pub fn adv_event_duration(&self, ch: Channel) -> f64 {
        channel_window(ch, self).d_late
    }

    pub fn is_continuous(&self) -> bool {
        self.d_s >= self.t_s * (1.0 - CONTINUOUS_TOL)
    }

    /// The bounded closed form applies: discontinuous scanning with
    /// `T_a0 <= d_s - d_a`.
    pub fn is_bounded(&self) -> bool {
        !self.is_continuous() && self.t_a0 <= self.d_s_eff()
    }
}

/// Configuration of the numeric latency algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoConfig {
    /// Stop once the cumulative hit probability exceeds this value.
    pub epsilon: f64,
    /// Step of the start-offset grid (s).
    pub delta: f64,
    /// Abort once the expected latency provably exceeds this value (s).
    pub d_exp_max: f64,
}

impl AlgoConfig {
    /// Defaults: 100 start offsets over `3 T_s`, `epsilon = 0.9999` and a
    /// 1000 s abort threshold.
    pub fn for_scan_interval(t_s: f64) -> Self {
        AlgoConfig {
            epsilon: 0.9999,
            delta: 0.03 * t_s,
            d_exp_max: 1000.0,
        }
    }

    pub fn validate(&self, t_s: f64) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::out_of_range(
                "epsilon",
                format!("{} not in (0, 1)", self.epsilon),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 3.0 * t_s) {
            return Err(Error::out_of_range(
                "delta",
                format!("{} s not in (0, 3 t_s) s", self.delta),
            ));
        }
        if !(self.d_exp_max > 0.0) {
            return Err(Error::out_of_range("d_exp_max", "must be > 0"));
        }
        Ok(())
    }

    /// Number of start offsets, `floor(3 T_s / delta)`.
    pub fn offsets(&self, t_s: f64) -> usize {
        let r = 3.0 * t_s / self.delta;
        ((r * (1.0 + 1e-9)).floor() as usize).max(1)
    }
}

/// Start times of an advertising event that lead to reception in a scan
/// event on `channel`: `[k T_s - d_early, k T_s + d_s - d_late]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelWindow {
    pub channel: Channel,
    pub d_early: f64,
    pub d_late: f64,
    pub d_s_eff: f64,
}

pub fn channel_window(channel: Channel, params: &AdvScanParams) -> ChannelWindow {
    let (d_a, d_ch) = (params.d_a, params.d_ch);
    let (d_early, d_late) = match channel {
        Channel::Ch37 => (0.0, d_a),
        Channel::Ch38 => (d_a + d_ch, 2.0 * d_a + d_ch),
        Channel::Ch39 => (2.0 * d_a + 2.0 * d_ch, 3.0 * d_a + 2.0 * d_ch),
    };
    ChannelWindow {
        channel,
        d_early,
        d_late,
        d_s_eff: params.d_s + d_early - d_late,
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// CDF at `t` of the sum of `n` independent `U[0, rho_max]` delays.
///
/// Exact for `n <= 2`, Gaussian for `n >= 3`. `n = 0` is the empty sum.
pub fn rho_sum_cdf(n: u64, t: f64, rho_max: f64) -> f64 {
    if n == 0 || rho_max <= 0.0 {
        return if t >= 0.0 { 1.0 } else { 0.0 };
    }
    let r = rho_max;
    match n {
        1 => (t / r).clamp(0.0, 1.0),
        2 => {
            if t <= 0.0 {
                0.0
            } else if t >= 2.0 * r {
                1.0
            } else if t <= r {
                t * t / (2.0 * r * r)
            } else {
                let u = 2.0 * r - t;
                1.0 - u * u / (2.0 * r * r)
            }
        }
        _ => {
            let nf = n as f64;
            let mean = nf * r / 2.0;
            let std = (nf / 12.0).sqrt() * r;
            std_normal_cdf((t - mean) / std)
        }
    }
}

/// Probability that advertising event `n`, nominally starting at `t_ai`
/// (without accumulated delays), starts inside the success interval of scan
/// event `k`.
pub fn hit_probability(
    k: i64,
    n: u64,
    t_ai: f64,
    window: &ChannelWindow,
    t_s: f64,
    d_s: f64,
    rho_max: f64,
) -> f64 {
    let start = k as f64 * t_s;
    let hi = start + d_s - window.d_late - t_ai;
    let lo = start - window.d_early - t_ai;
    (rho_sum_cdf(n, hi, rho_max) - rho_sum_cdf(n, lo, rho_max)).clamp(0.0, 1.0)
}

/// Which estimator produced a [`DiscoveryEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscoveryMethod {
    Algorithm1,
    ContinuousClosedForm,
    BoundedClosedForm,
}

impl DiscoveryMethod {
    pub fn name(self) -> &'static str {
        match self {
            DiscoveryMethod::Algorithm1 => "algorithm",
            DiscoveryMethod::ContinuousClosedForm => "continuous",
            DiscoveryMethod::BoundedClosedForm => "bounded",
        }
    }
}

impl fmt::Display for DiscoveryMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Expected discovery latency and related quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscoveryEstimate {
    /// Expected latency (s). When `aborted`, a lower bound.
    pub d_adv_mean: f64,
    /// The numeric algorithm stopped at `d_exp_max` for at least one offset.
    pub aborted: bool,
    /// Expected advertiser charge (C), when accumulated.
    pub adv_charge_mean: Option<f64>,
    pub method: DiscoveryMethod,
    /// Worst-case latency (s), for the closed forms.
    pub d_adv_max: Option<f64>,
}

/// Expected latency by the numeric algorithm.
pub fn expected_discovery_latency(params: &AdvScanParams, cfg: &AlgoConfig) -> Result<DiscoveryEstimate> {
    params.validate()?;
    cfg.validate(params.t_s)?;
    Ok(algorithm1(params, cfg, None))
}

struct OffsetResult {
    d_exp: f64,
    q_exp: f64,
    aborted: bool,
}

/// Numeric latency algorithm with optional advertiser-charge accumulation.
///
/// Callers validate inputs.
pub(crate) fn algorithm1(
    params: &AdvScanParams,
    cfg: &AlgoConfig,
    charge: Option<&AdvertiserEnergyInputs>,
) -> DiscoveryEstimate {
    let n_offsets = cfg.offsets(params.t_s);
    let results: Vec<OffsetResult> = (0..n_offsets)
        .into_par_iter()
        .map(|i| single_offset(params, cfg, charge, i as f64 * cfg.delta))
        .collect();
    let d_sum: f64 = results.iter().map(|r| r.d_exp).sum();
    let q_sum: f64 = results.iter().map(|r| r.q_exp).sum();
    let denom = n_offsets as f64;
    DiscoveryEstimate {
        d_adv_mean: d_sum / denom,
        aborted: results.iter().any(|r| r.aborted),
        adv_charge_mean: charge.map(|_| q_sum / denom),
        method: DiscoveryMethod::Algorithm1,
        d_adv_max: None,
    }
}

fn single_offset(
    p: &AdvScanParams,
    cfg: &AlgoConfig,
    charge: Option<&AdvertiserEnergyInputs>,
    phi: f64,
) -> OffsetResult {
    let mean_rho = p.rho_max / 2.0;
    let t_a = p.mean_interval();
    let windows = Channel::ALL.map(|ch| channel_window(ch, p));
    let full_cycle = charge.map(|c| c.q_full + (t_a - c.d_full) * c.i_sl);

    let mut d_exp = 0.0;
    let mut q_exp = 0.0;
    let mut p_cm = 1.0;
    let mut n: u64 = 0;
    let mut aborted = false;

    while 1.0 - p_cm <= cfg.epsilon {
        let nf = n as f64;
        let t_ai = phi + nf * p.t_a0;
        let k_min = (t_ai / p.t_s).floor() as i64;
        let k_max = ((t_ai + nf * mean_rho) / p.t_s).floor() as i64;
        let mut p_hit = 0.0;
        for k in k_min..=k_max {
            let ch = Channel::of_scan_event(k);
            let w = &windows[ch.index()];
            let p_k = hit_probability(k, n, t_ai, w, p.t_s, p.d_s, p.rho_max);
            p_hit += p_k;
            d_exp += p_k * p_cm * (nf * t_a + w.d_late);
            if let (Some(c), Some(cycle)) = (charge, full_cycle) {
                q_exp += p_k * p_cm * (nf * cycle + c.q_last(ch));
            }
        }
        p_cm *= 1.0 - p_hit.min(1.0);
        n += 1;
        // Every later hit has latency >= n * t_a, so this bounds the final value.
        let lower_bound = d_exp + p_cm * n as f64 * t_a;
        if d_exp > cfg.d_exp_max || lower_bound > cfg.d_exp_max {
            d_exp = lower_bound;
            aborted = true;
            break;
        }
    }
    OffsetResult {
        d_exp,
        q_exp,
        aborted,
    }
}

/// Expected latency for continuous scanning (`d_s = T_s`).
pub fn expected_discovery_latency_continuous(params: &AdvScanParams) -> Result<DiscoveryEstimate> {
    params.validate()?;
    if !params.is_continuous() {
        return Err(Error::Precondition(format!(
            "continuous form needs d_s = t_s (d_s = {}, t_s = {})",
            params.d_s, params.t_s
        )));
    }
    let (d_a, d_ch, d_s) = (params.d_a, params.d_ch, params.d_s);
    let t = params.mean_interval();
    let mean = 2.0 * d_ch * t / (3.0 * d_s) + d_a * t / d_s
        - d_ch * d_ch / d_s
        - 2.0 * d_a * d_ch / d_s
        - d_a * d_a / d_s
        + d_ch
        + 2.0 * d_a;
    Ok(DiscoveryEstimate {
        d_adv_mean: mean,
        aborted: false,
        adv_charge_mean: None,
        method: DiscoveryMethod::ContinuousClosedForm,
        d_adv_max: Some(params.t_a0 + 3.0 * d_a + 2.0 * d_ch),
    })
}

/// Per-channel reception probabilities under continuous scanning, and the
/// probability that the first event is lost entirely.
pub fn continuous_channel_probabilities(params: &AdvScanParams) -> ([f64; 3], f64) {
    let (d_a, d_ch, d_s) = (params.d_a, params.d_ch, params.d_s);
    let p37 = (d_s - d_a) / (3.0 * d_s);
    let p38 = (d_s - d_a - d_ch) / (3.0 * d_s);
    let loss = (3.0 * d_a + 2.0 * d_ch) / (3.0 * d_s);
    ([p37, p38, p38], loss)
}

/// Expected latency when every scan window is longer than the advertising
/// interval (`T_a0 <= d_s - d_a`, `d_s < T_s`).
///
/// The offset range splits into one success interval of length `d_s - d_a`
/// per channel and the gap preceding it. An advertiser starting at distance
/// `x` before a success interval is received after `ceil(x / T_a)`
/// intervals on that interval's channel.
pub fn expected_discovery_latency_bounded(params: &AdvScanParams) -> Result<DiscoveryEstimate> {
    params.validate()?;
    if !params.is_bounded() {
        return Err(Error::Precondition(format!(
            "bounded form needs d_s < t_s and t_a0 <= d_s - d_a (t_a0 = {}, d_s - d_a = {}, t_s = {})",
            params.t_a0,
            params.d_s_eff(),
            params.t_s
        )));
    }
    let t = params.mean_interval();
    let d_s_eff = params.d_s_eff();
    let mut integral = 0.0;
    for ch in Channel::ALL {
        let d_ev = params.adv_event_duration(ch);
        let gap = preceding_gap(params, ch);
        let ratio = gap / t;
        let c = ratio.floor();
        let h = ratio - c;
        integral += d_s_eff * d_ev + t * t * (c * (c + 1.0) / 2.0 + (c + 1.0) * h) + gap * d_ev;
    }
    Ok(DiscoveryEstimate {
        d_adv_mean: integral / (3.0 * params.t_s),
        aborted: false,
        adv_charge_mean: None,
        method: DiscoveryMethod::BoundedClosedForm,
        d_adv_max: Some(bounded_max_latency(params)),
    })
}

/// Gap between the success interval of the previous scan event and that of
/// a scan event on `ch`.
fn preceding_gap(p: &AdvScanParams, ch: Channel) -> f64 {
    let prev = match ch {
        Channel::Ch37 => Channel::Ch39,
        Channel::Ch38 => Channel::Ch37,
        Channel::Ch39 => Channel::Ch38,
    };
    p.t_s - p.d_s + channel_window(prev, p).d_late - channel_window(ch, p).d_early
}

/// Maximum latency `ceil((T_s - d_s) / T_a0) T_a0 + 3 d_a + 2 d_ch` for
/// fixed advertising intervals.
pub fn bounded_max_latency(p: &AdvScanParams) -> f64 {
    ((p.t_s - p.d_s) / p.t_a0).ceil() * p.t_a0 + 3.0 * p.d_a + 2.0 * p.d_ch
}

/// Maximum latency when intervals vary in `[T_a0, T_a0 + rho_max]`.
///
/// Counts intervals across the longest gap between success intervals and
/// charges each at its longest possible length.
pub fn bounded_max_latency_with_jitter(p: &AdvScanParams) -> Result<f64> {
    p.validate()?;
    let longest = p.t_a0 + p.rho_max;
    if p.is_continuous() || longest > p.d_s_eff() {
        return Err(Error::Precondition(format!(
            "jitter bound needs d_s < t_s and t_a0 + rho_max <= d_s - d_a ({} > {})",
            longest,
            p.d_s_eff()
        )));
    }
    let gap = Channel::ALL
        .into_iter()
        .map(|ch| preceding_gap(p, ch))
        .fold(f64::MIN, f64::max);
    Ok((gap / p.t_a0).ceil() * longest + 3.0 * p.d_a + 2.0 * p.d_ch)
}

/// Estimator choice for [`expected_discovery_latency_auto`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodChoice {
    Auto,
    Algorithm1,
    Continuous,
    Bounded,
}

/// Continuous form when `d_s = T_s`, bounded form when it applies, the
/// numeric algorithm otherwise.
pub fn select_method(params: &AdvScanParams) -> DiscoveryMethod {
    if params.is_continuous() {
        DiscoveryMethod::ContinuousClosedForm
    } else if params.is_bounded() {
        DiscoveryMethod::BoundedClosedForm
    } else {
        DiscoveryMethod::Algorithm1
    }
}

pub fn expected_discovery_latency_auto(
    params: &AdvScanParams,
    cfg: &AlgoConfig,
    choice: MethodChoice,
) -> Result<DiscoveryEstimate> {
    let method = match choice {
        MethodChoice::Auto => select_method(params),
        MethodChoice::Algorithm1 => DiscoveryMethod::Algorithm1,
        MethodChoice::Continuous => DiscoveryMethod::ContinuousClosedForm,
        MethodChoice::Bounded => DiscoveryMethod::BoundedClosedForm,
    };
    match method {
        DiscoveryMethod::Algorithm1 => expected_discovery_latency(params, cfg),
        DiscoveryMethod::ContinuousClosedForm => expected_discovery_latency_continuous(params),
        DiscoveryMethod::BoundedClosedForm => expected_discovery_latency_bounded(params),
    }
}
