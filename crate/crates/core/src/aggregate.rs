//! Total charge over a time horizon and expected discovery charges.

use crate::discovery::{algorithm1, AdvScanParams, AlgoConfig, Channel};
use crate::error::{Error, Result};
use crate::event::{
    advertising_event_cost, scan_event_cost, AdvEventSpec, ConnectedEventValues, ConnectionParams,
    PacketExchange, ScanMode,
};
use crate::profile::{DeviceProfile, Role};

/// Observation window (s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonSpec {
    pub t_g: f64,
}

impl HorizonSpec {
    pub fn new(t_g: f64) -> Result<Self> {
        if t_g > 0.0 && t_g.is_finite() {
            Ok(HorizonSpec { t_g })
        } else {
            Err(Error::out_of_range("t_g", format!("{t_g} s must be > 0")))
        }
    }
}

/// Number of connection events within `t_g`.
///
/// A slave wakes every `n_sl_avg` intervals; values below one are treated as
/// no skipping.
pub fn connected_event_count(t_g: f64, t_c: f64, role: Role, n_sl_avg: f64) -> u64 {
    let period = match role {
        Role::Master => t_c,
        Role::Slave => n_sl_avg.max(1.0) * t_c,
    };
    // Guard against 1.0 / 0.1 landing just below 10.
    ((t_g / period) * (1.0 + 1e-12)).floor() as u64
}

/// Total charge within `t_g`: all connection events plus sleep in between.
///
/// Event `i` uses `exchanges[i % exchanges.len()]`, so an alternating
/// traffic pattern is a list of two exchanges.
pub fn connected_total_charge(
    profile: &DeviceProfile,
    params: &ConnectionParams,
    exchanges: &[PacketExchange],
    t_g: f64,
) -> Result<f64> {
    params.validate()?;
    HorizonSpec::new(t_g)?;
    let count = connected_event_count(t_g, params.t_c, params.role, params.n_sl_avg);
    if count == 0 {
        return Ok(t_g * profile.sleep_current);
    }
    if exchanges.is_empty() {
        return Err(Error::out_of_range("exchanges", "no packet exchange given"));
    }
    let values = ConnectedEventValues::new(profile, params.role, params.tx_power_dbm)?;
    let costs: Vec<_> = exchanges
        .iter()
        .map(|ex| values.connection_event_cost(params, ex))
        .collect();
    let (mut charge, mut busy) = (0.0, 0.0);
    for i in 0..count as usize {
        let c = costs[i % costs.len()];
        charge += c.charge;
        busy += c.duration;
    }
    if busy > t_g {
        return Err(Error::Precondition(format!(
            "events last {busy} s, longer than the horizon of {t_g} s"
        )));
    }
    Ok(charge + (t_g - busy) * profile.sleep_current)
}

/// Charge of one connection interval: one event and sleep until the next.
pub fn connection_interval_charge(
    profile: &DeviceProfile,
    params: &ConnectionParams,
    exchange: &PacketExchange,
) -> Result<f64> {
    params.validate()?;
    let values = ConnectedEventValues::new(profile, params.role, params.tx_power_dbm)?;
    let ev = values.connection_event_cost(params, exchange);
    if ev.duration > params.t_c {
        return Err(Error::Precondition(format!(
            "event lasts {} s, longer than the connection interval of {} s",
            ev.duration, params.t_c
        )));
    }
    Ok(values.interval_charge(params, exchange))
}

/// Event charges (C) and durations (s) of an advertiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvertiserEnergyInputs {
    /// Full three-channel event without a response.
    pub q_full: f64,
    pub d_full: f64,
    /// Last event, received on channel 37, 38 or 39.
    pub q_last: [f64; 3],
    pub d_last: [f64; 3],
    /// Sleep current (A).
    pub i_sl: f64,
}

impl AdvertiserEnergyInputs {
    /// Inputs from the advertising event model with 37-byte advertising
    /// packets and 44-byte responses.
    pub fn from_profile(profile: &DeviceProfile, tx_power_dbm: i32) -> Result<Self> {
        let full = advertising_event_cost(profile, &AdvEventSpec::full(tx_power_dbm))?;
        let mut q_last = [0.0; 3];
        let mut d_last = [0.0; 3];
        for ch in Channel::ALL {
            let c = advertising_event_cost(profile, &AdvEventSpec::success_on(ch.number(), tx_power_dbm)?)?;
            q_last[ch.index()] = c.charge;
            d_last[ch.index()] = c.duration;
        }
        let inputs = AdvertiserEnergyInputs {
            q_full: full.charge,
            d_full: full.duration,
            q_last,
            d_last,
            i_sl: profile.sleep_current,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |v: &[f64; 3]| v[0] <= v[1] && v[1] <= v[2];
        if !ordered(&self.q_last) {
            return Err(Error::out_of_range("q_last", "must satisfy Q_37 <= Q_38 <= Q_39"));
        }
        if !ordered(&self.d_last) {
            return Err(Error::out_of_range("d_last", "must satisfy d_37 <= d_38 <= d_39"));
        }
        Ok(())
    }

    pub fn q_last(&self, ch: Channel) -> f64 {
        self.q_last[ch.index()]
    }

    pub fn d_last(&self, ch: Channel) -> f64 {
        self.d_last[ch.index()]
    }

    pub fn q_last_mean(&self) -> f64 {
        self.q_last.iter().sum::<f64>() / 3.0
    }

    pub fn d_last_mean(&self) -> f64 {
        self.d_last.iter().sum::<f64>() / 3.0
    }
}

/// Expected advertiser charge for a mean latency `d_adv_mean`.
///
/// `t_a` is the mean advertising interval including the mean random delay.
pub fn expected_advertiser_charge(d_adv_mean: f64, t_a: f64, inputs: &AdvertiserEnergyInputs) -> f64 {
    let q_last = inputs.q_last_mean();
    let d_last = inputs.d_last_mean();
    let i_sl = inputs.i_sl;
    if d_adv_mean <= d_last {
        d_adv_mean / d_last * q_last
    } else if d_adv_mean <= t_a {
        q_last + (d_adv_mean - d_last) * i_sl
    } else {
        let n_a = d_adv_mean / t_a - 1.0;
        let q_39 = inputs.q_last[2];
        let d_39 = inputs.d_last[2];
        let mut q = n_a * q_39 + q_last + (d_adv_mean - n_a * t_a - d_last) * i_sl;
        if n_a >= 1.0 {
            q += (n_a - 1.0) * (t_a - d_39) * i_sl;
        }
        q
    }
}

/// Advertiser charge accumulated inside the numeric latency algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactAdvertiserCharge {
    pub charge: f64,
    pub d_adv_mean: f64,
    pub aborted: bool,
}

/// Expected advertiser charge, summing the charge of every possible
/// discovery outcome weighted by its probability.
pub fn expected_advertiser_charge_exact(
    params: &AdvScanParams,
    cfg: &AlgoConfig,
    inputs: &AdvertiserEnergyInputs,
) -> Result<ExactAdvertiserCharge> {
    params.validate()?;
    cfg.validate(params.t_s)?;
    let est = algorithm1(params, cfg, Some(inputs));
    Ok(ExactAdvertiserCharge {
        charge: est.adv_charge_mean.unwrap_or(0.0),
        d_adv_mean: est.d_adv_mean,
        aborted: est.aborted,
    })
}

/// Expected scanner charge until discovery: idle scan events and sleep.
pub fn expected_scanner_charge(d_adv_mean: f64, t_s: f64, d_s: f64, profile: &DeviceProfile) -> Result<f64> {
    if !(d_adv_mean >= 0.0) {
        return Err(Error::out_of_range("d_adv_mean", "must be >= 0"));
    }
    if !(d_s > 0.0 && d_s <= t_s) {
        return Err(Error::out_of_range(
            "d_s",
            format!("{d_s} s not in (0, t_s = {t_s}] s"),
        ));
    }
    let n_s = d_adv_mean / t_s;
    let q_idle = scan_event_cost(profile, ScanMode::PassiveOrIdle, d_s, 0, 0)?.charge;
    Ok(n_s * q_idle + n_s * (t_s - d_s) * profile.sleep_current)
}
