//! Seeded discrete-event simulation of advertising and scanning.
//!
//! Trial `i` draws from a ChaCha8 generator seeded with the configured seed
//! and switched to stream `i`, so every trial is reproducible on its own and
//! independent of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aggregate::AdvertiserEnergyInputs;
use crate::discovery::{channel_window, AdvScanParams, Channel};
use crate::error::{Error, Result};
use crate::event::{scan_event_cost, ScanMode};
use crate::profile::DeviceProfile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub params: AdvScanParams,
    pub trials: usize,
    pub seed: u64,
    /// Trials still undiscovered after this time (s) are truncated.
    pub max_sim_time: f64,
}

impl SimConfig {
    pub const DEFAULT_MAX_SIM_TIME: f64 = 1e5;

    pub fn new(params: AdvScanParams, trials: usize, seed: u64) -> Self {
        SimConfig {
            params,
            trials,
            seed,
            max_sim_time: Self::DEFAULT_MAX_SIM_TIME,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.trials == 0 {
            return Err(Error::out_of_range("trials", "must be >= 1"));
        }
        if !(self.max_sim_time > 0.0) {
            return Err(Error::out_of_range("max_sim_time", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// Time from the first advertising event to the end of the received
    /// event (s).
    pub latency: f64,
    /// Advertising events sent, including the received one.
    pub events_sent: u64,
    pub hit_channel: Option<Channel>,
    pub truncated: bool,
    /// Start offset of the advertiser relative to the first scan event (s).
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSummary {
    pub trials: usize,
    pub truncated: usize,
    pub mean: f64,
    pub std: f64,
    pub std_err: f64,
    pub min: f64,
    pub max: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub outcomes: Vec<TrialOutcome>,
    pub summary: SimSummary,
}

/// Channel on which an advertising event starting at `t` is received, by
/// testing the start time against each scan event's success interval.
pub fn interval_hit(t: f64, p: &AdvScanParams) -> Option<Channel> {
    let k0 = (t / p.t_s).floor() as i64;
    let mut best: Option<(f64, Channel)> = None;
    for k in [k0, k0 + 1] {
        let ch = Channel::of_scan_event(k);
        let w = channel_window(ch, p);
        let start = k as f64 * p.t_s;
        let inside = t >= start - w.d_early && t <= start + p.d_s - w.d_late;
        if inside && best.is_none_or(|(late, _)| w.d_late < late) {
            best = Some((w.d_late, ch));
        }
    }
    best.map(|(_, ch)| ch)
}

/// Channel on which an advertising event starting at `t` is received, by
/// laying out its three packets and checking each against the scan window
/// open at that time.
pub fn packet_overlap_hit(t: f64, p: &AdvScanParams) -> Option<Channel> {
    for (j, ch) in Channel::ALL.into_iter().enumerate() {
        let begin = t + j as f64 * (p.d_a + p.d_ch);
        let end = begin + p.d_a;
        let k = (begin / p.t_s).floor() as i64;
        if Channel::of_scan_event(k) != ch {
            continue;
        }
        let scan_start = k as f64 * p.t_s;
        if begin >= scan_start && end <= scan_start + p.d_s {
            return Some(ch);
        }
    }
    None
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_trial(cfg: &SimConfig, trial: usize) -> TrialOutcome {
    let p = &cfg.params;
    let mut rng = trial_rng(cfg.seed, trial);
    let phi = rng.random::<f64>() * 3.0 * p.t_s;
    let mut t = phi;
    let mut events = 1;
    loop {
        if let Some(ch) = interval_hit(t, p) {
            return TrialOutcome {
                latency: t - phi + p.adv_event_duration(ch),
                events_sent: events,
                hit_channel: Some(ch),
                truncated: false,
                phi,
            };
        }
        let rho = if p.rho_max > 0.0 {
            rng.random::<f64>() * p.rho_max
        } else {
            0.0
        };
        t += p.t_a0 + rho;
        if t - phi > cfg.max_sim_time {
            return TrialOutcome {
                latency: t - phi,
                events_sent: events,
                hit_channel: None,
                truncated: true,
                phi,
            };
        }
        events += 1;
    }
}

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summarize(outcomes: &[TrialOutcome]) -> SimSummary {
    let done: Vec<f64> = outcomes
        .iter()
        .filter(|o| !o.truncated)
        .map(|o| o.latency)
        .collect();
    let n = done.len() as f64;
    let mean = compensated_sum(done.iter().copied()) / n;
    let var = if done.len() > 1 {
        compensated_sum(done.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0)
    } else {
        0.0
    };
    let mut sorted = done.clone();
    sorted.sort_by(f64::total_cmp);
    SimSummary {
        trials: outcomes.len(),
        truncated: outcomes.len() - done.len(),
        mean,
        std: var.sqrt(),
        std_err: (var / n).sqrt(),
        min: sorted.first().copied().unwrap_or(f64::NAN),
        max: sorted.last().copied().unwrap_or(f64::NAN),
        q05: quantile(&sorted, 0.05),
        q50: quantile(&sorted, 0.5),
        q95: quantile(&sorted, 0.95),
    }
}

/// Runs `cfg.trials` independent discovery trials.
pub fn simulate_discovery(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect();
    let summary = summarize(&outcomes);
    Ok(SimResult { outcomes, summary })
}

/// Mean charges over the non-truncated trials of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimChargeSummary {
    pub advertiser_mean: f64,
    pub scanner_mean: f64,
    /// Sleep part of the scanner charge.
    pub scanner_sleep_mean: f64,
    pub latency_mean: f64,
    pub trials: usize,
    pub truncated: usize,
}

/// Advertiser charge of one trial: full events with sleep in between, then
/// the received event.
pub fn advertiser_trial_charge(
    o: &TrialOutcome,
    p: &AdvScanParams,
    inputs: &AdvertiserEnergyInputs,
) -> Option<f64> {
    let ch = o.hit_channel?;
    let failed = (o.events_sent - 1) as f64;
    let elapsed = o.latency - p.adv_event_duration(ch);
    Some(failed * inputs.q_full + (elapsed - failed * inputs.d_full) * inputs.i_sl + inputs.q_last(ch))
}

/// Number of scan events starting in `[phi, phi + latency)`.
fn scan_events_during(o: &TrialOutcome, p: &AdvScanParams) -> f64 {
    let first = (o.phi / p.t_s).ceil();
    let end = ((o.phi + o.latency) / p.t_s).ceil();
    (end - first).max(0.0)
}

/// Simulates discovery and sums the actual event charges of every trial.
pub fn simulate_discovery_charge(
    cfg: &SimConfig,
    profile: &DeviceProfile,
    inputs: &AdvertiserEnergyInputs,
) -> Result<SimChargeSummary> {
    let sim = simulate_discovery(cfg)?;
    let p = &cfg.params;
    let q_idle = scan_event_cost(profile, ScanMode::PassiveOrIdle, p.d_s, 0, 0)?.charge;
    let sleep_per_period = (p.t_s - p.d_s) * profile.sleep_current;

    let done: Vec<&TrialOutcome> = sim.outcomes.iter().filter(|o| !o.truncated).collect();
    let n = done.len() as f64;
    let adv = compensated_sum(done.iter().filter_map(|o| advertiser_trial_charge(o, p, inputs)));
    let periods: Vec<f64> = done.iter().map(|o| scan_events_during(o, p)).collect();
    let scan = compensated_sum(periods.iter().map(|m| m * (q_idle + sleep_per_period)));
    let scan_sleep = compensated_sum(periods.iter().map(|m| m * sleep_per_period));
    Ok(SimChargeSummary {
        advertiser_mean: adv / n,
        scanner_mean: scan / n,
        scanner_sleep_mean: scan_sleep / n,
        latency_mean: sim.summary.mean,
        trials: sim.summary.trials,
        truncated: sim.summary.truncated,
    })
}
