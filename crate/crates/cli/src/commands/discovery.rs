use blemodel::{
    expected_advertiser_charge, expected_advertiser_charge_exact, expected_discovery_latency_auto,
    expected_scanner_charge, select_method, simulate_discovery, AdvScanParams, AdvertiserEnergyInputs,
    AlgoConfig, DeviceProfile, DiscoveryMethod, MethodChoice, SimConfig,
};

use crate::error::CliResult;
use crate::output::{flag, num, opt, Table};
use crate::{DiscoveryArgs, EstimatorArgs};

pub const HEADER: [&str; 14] = [
    "t_a0_s",
    "t_s_s",
    "d_s_s",
    "rho_max_s",
    "method",
    "latency_s",
    "aborted",
    "latency_max_s",
    "adv_charge_C",
    "adv_charge_exact_C",
    "scan_charge_C",
    "sim_trials",
    "sim_mean_s",
    "sim_std_err_s",
];

/// Estimator settings resolved against a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimator {
    pub method: MethodChoice,
    pub rho_max: f64,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub d_exp_max: f64,
    pub dbm: i32,
    pub simulate: Option<usize>,
    pub max_sim_time: f64,
}

impl Estimator {
    pub fn from_args(profile: &DeviceProfile, a: &EstimatorArgs) -> Self {
        Estimator {
            method: a.method.into(),
            rho_max: a.rho_max,
            epsilon: a.epsilon,
            delta: a.delta,
            d_exp_max: a.dmax,
            dbm: a.dbm.unwrap_or_else(|| profile.max_tx_power_dbm()),
            simulate: a.simulate,
            max_sim_time: a.max_sim_time,
        }
    }

    pub fn params(&self, profile: &DeviceProfile, t_a0: f64, t_s: f64, d_s: f64) -> AdvScanParams {
        AdvScanParams {
            rho_max: self.rho_max,
            ..AdvScanParams::from_profile(profile, t_a0, t_s, d_s)
        }
    }

    pub fn algo(&self, t_s: f64) -> AlgoConfig {
        let base = AlgoConfig::for_scan_interval(t_s);
        AlgoConfig {
            epsilon: self.epsilon,
            delta: self.delta.unwrap_or(base.delta),
            d_exp_max: self.d_exp_max,
        }
    }
}

/// Model estimate at one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate {
    pub method: DiscoveryMethod,
    pub latency: f64,
    pub aborted: bool,
    pub latency_max: Option<f64>,
    pub adv_charge: f64,
    pub adv_charge_exact: Option<f64>,
    pub scan_charge: f64,
}

pub fn estimate(profile: &DeviceProfile, p: &AdvScanParams, est: &Estimator) -> CliResult<PointEstimate> {
    let cfg = est.algo(p.t_s);
    let inputs = AdvertiserEnergyInputs::from_profile(profile, est.dbm)?;
    let method = match est.method {
        MethodChoice::Auto => select_method(p),
        MethodChoice::Algorithm1 => DiscoveryMethod::Algorithm1,
        MethodChoice::Continuous => DiscoveryMethod::ContinuousClosedForm,
        MethodChoice::Bounded => DiscoveryMethod::BoundedClosedForm,
    };
    let (latency, aborted, latency_max, exact) = if method == DiscoveryMethod::Algorithm1 {
        let e = expected_advertiser_charge_exact(p, &cfg, &inputs)?;
        (e.d_adv_mean, e.aborted, None, Some(e.charge))
    } else {
        let e = expected_discovery_latency_auto(p, &cfg, est.method)?;
        (e.d_adv_mean, e.aborted, e.d_adv_max, None)
    };
    Ok(PointEstimate {
        method,
        latency,
        aborted,
        latency_max,
        adv_charge: expected_advertiser_charge(latency, p.mean_interval(), &inputs),
        adv_charge_exact: exact,
        scan_charge: expected_scanner_charge(latency, p.t_s, p.d_s, profile)?,
    })
}

pub fn row(profile: &DeviceProfile, p: &AdvScanParams, est: &Estimator, seed: u64) -> CliResult<Vec<String>> {
    let e = estimate(profile, p, est)?;
    let sim = match est.simulate {
        Some(trials) => {
            let cfg = SimConfig {
                max_sim_time: est.max_sim_time,
                ..SimConfig::new(*p, trials, seed)
            };
            Some(simulate_discovery(&cfg)?.summary)
        }
        None => None,
    };
    Ok(vec![
        num(p.t_a0),
        num(p.t_s),
        num(p.d_s),
        num(p.rho_max),
        e.method.to_string(),
        num(e.latency),
        flag(e.aborted),
        opt(e.latency_max),
        num(e.adv_charge),
        opt(e.adv_charge_exact),
        num(e.scan_charge),
        sim.map(|s| s.trials.to_string()).unwrap_or_default(),
        opt(sim.map(|s| s.mean)),
        opt(sim.map(|s| s.std_err)),
    ])
}

pub fn run(profile: &DeviceProfile, a: &DiscoveryArgs, seed: u64) -> CliResult<Table> {
    let est = Estimator::from_args(profile, &a.estimator);
    let p = est.params(profile, a.ta, a.ts, a.ds);
    let mut table = Table::new(&HEADER);
    table.push(row(profile, &p, &est, seed)?);
    Ok(table)
}
