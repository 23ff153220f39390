use blemodel::{
    expected_discovery_latency, expected_discovery_latency_bounded, DeviceProfile, MethodChoice, Role,
};
use rayon::prelude::*;

use crate::commands::connected::{self, payload_packets, sending_exchange, Scenario};
use crate::commands::discovery::{self, Estimator};
use crate::error::{CliError, CliResult};
use crate::output::{flag, num, opt, Table};
use crate::{Recipe, SweepArgs};

const DISCOVERY_VARS: [&str; 4] = ["ta", "ts", "ds", "rho"];
const CONNECTED_VARS: [&str; 7] = ["tc", "pairs", "rx", "tx", "dbm", "nsl", "role"];

/// Connection intervals used by the connected-mode recipes (s).
pub const INTERVALS: [f64; 10] = [0.0075, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0];
/// Payload bytes per event used by the goodput recipe.
pub const PAYLOADS: [u32; 9] = [1, 2, 4, 8, 16, 20, 40, 80, 160];
/// Protocol overhead and largest payload of a notification packet (bytes).
pub const PACKET_OVERHEAD: u32 = 17;
pub const MAX_PAYLOAD: u32 = 20;
/// Size of an empty polling packet (bytes).
pub const EMPTY_PACKET: u32 = 10;

pub const CLOSED_FORM_HEADER: [&str; 7] = [
    "t_a0_s",
    "t_s_s",
    "d_s_s",
    "algorithm_latency_s",
    "algorithm_aborted",
    "bounded_latency_s",
    "rel_diff",
];

pub const GOODPUT_HEADER: [&str; 8] = [
    "payload_bytes",
    "packets",
    "t_c_s",
    "goodput_B_per_s",
    "event_charge_C",
    "interval_charge_C",
    "mean_current_A",
    "efficiency_B_per_C",
];

/// `start, start + step, ...` up to `stop` (inclusive within rounding).
pub fn grid(start: f64, stop: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::usage(format!("step {step} must be > 0")));
    }
    if !(start < stop) {
        return Err(CliError::usage(format!(
            "start {start} must be below stop {stop}"
        )));
    }
    let n = ((stop - start) / step * (1.0 + 1e-12) + 1e-9).floor() as usize;
    // Round off accumulated representation error so 0.1 + 2 * 0.1 prints as 0.3.
    Ok((0..=n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn parse_fixed(items: &[String]) -> CliResult<Vec<(String, String)>> {
    items
        .iter()
        .map(|s| match s.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
            _ => Err(CliError::usage(format!("`{s}` is not NAME=VALUE"))),
        })
        .collect()
}

fn number(name: &str, v: &str) -> CliResult<f64> {
    v.parse::<f64>()
        .map_err(|_| CliError::usage(format!("{name}={v} is not a number")))
}

fn integer<T: TryFrom<i64>>(name: &str, v: f64) -> CliResult<T> {
    let r = v.round();
    if (v - r).abs() > 1e-9 {
        return Err(CliError::usage(format!("{name}={v} must be an integer")));
    }
    T::try_from(r as i64).map_err(|_| CliError::usage(format!("{name}={v} out of range")))
}

fn set_connected(sc: &mut Scenario, name: &str, v: f64) -> CliResult<()> {
    match name {
        "tc" => sc.t_c = v,
        "pairs" => sc.pairs = integer(name, v)?,
        "rx" => sc.rx = integer(name, v)?,
        "tx" => sc.tx = integer(name, v)?,
        "dbm" => sc.dbm = integer(name, v)?,
        "nsl" => sc.n_sl = v,
        _ => return Err(CliError::usage(format!("`{name}` cannot be swept"))),
    }
    Ok(())
}

fn connected_sweep(profile: &DeviceProfile, a: &SweepArgs, var: &str, values: &[f64]) -> CliResult<Table> {
    let mut base = Scenario {
        role: Role::Slave,
        t_c: 0.1,
        pairs: 1,
        rx: EMPTY_PACKET,
        tx: EMPTY_PACKET,
        dbm: profile.max_tx_power_dbm(),
        n_sl: 0.0,
        sca_master: profile.sca_ppm,
        sca_slave: profile.sca_ppm,
    };
    for (k, v) in parse_fixed(&a.fixed)? {
        if !CONNECTED_VARS.contains(&k.as_str()) {
            return Err(CliError::usage(format!(
                "`{k}` is not a connected-mode parameter"
            )));
        }
        if k == "role" {
            base.role = match v.as_str() {
                "slave" => Role::Slave,
                "master" => Role::Master,
                _ => return Err(CliError::usage(format!("role={v} is not slave or master"))),
            };
        } else {
            set_connected(&mut base, &k, number(&k, &v)?)?;
        }
    }
    let rows: Vec<Vec<String>> = values
        .par_iter()
        .map(|&v| {
            let mut sc = base;
            set_connected(&mut sc, var, v)?;
            connected::row(profile, &sc, None)
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(&connected::HEADER);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn discovery_rows(
    profile: &DeviceProfile,
    est: &Estimator,
    points: &[(f64, f64, f64, f64)],
    seed: u64,
) -> CliResult<Table> {
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(t_a0, t_s, d_s, rho))| {
            let est = Estimator { rho_max: rho, ..*est };
            let p = est.params(profile, t_a0, t_s, d_s);
            discovery::row(profile, &p, &est, seed.wrapping_add(i as u64))
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(&discovery::HEADER);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn discovery_sweep(
    profile: &DeviceProfile,
    a: &SweepArgs,
    var: &str,
    values: &[f64],
    seed: u64,
) -> CliResult<Table> {
    let est = Estimator::from_args(profile, &a.estimator);
    let mut base = [1.0, 3.12, 1.28, est.rho_max];
    let index = |name: &str| DISCOVERY_VARS.iter().position(|v| *v == name);
    for (k, v) in parse_fixed(&a.fixed)? {
        let i = index(&k).ok_or_else(|| CliError::usage(format!("`{k}` is not a discovery parameter")))?;
        base[i] = number(&k, &v)?;
    }
    let i = index(var).expect("checked by caller");
    let points: Vec<_> = values
        .iter()
        .map(|&v| {
            let mut p = base;
            p[i] = v;
            (p[0], p[1], p[2], p[3])
        })
        .collect();
    discovery_rows(profile, &est, &points, seed)
}

fn closed_form(profile: &DeviceProfile, est: &Estimator) -> CliResult<Table> {
    let mut points = Vec::new();
    for d_s in [0.64, 1.28] {
        for t_a0 in grid(0.1, 1.0, 0.1)? {
            points.push((t_a0, 3.12, d_s));
        }
    }
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|&(t_a0, t_s, d_s)| {
            let p = est.params(profile, t_a0, t_s, d_s);
            let alg = expected_discovery_latency(&p, &est.algo(t_s))?;
            let bounded = if p.is_bounded() {
                Some(expected_discovery_latency_bounded(&p)?.d_adv_mean)
            } else {
                None
            };
            let rel = bounded.map(|b| (alg.d_adv_mean - b).abs() / b);
            Ok(vec![
                num(t_a0),
                num(t_s),
                num(d_s),
                num(alg.d_adv_mean),
                flag(alg.aborted),
                opt(bounded),
                opt(rel),
            ])
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(&CLOSED_FORM_HEADER);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn goodput(profile: &DeviceProfile) -> CliResult<Table> {
    let mut table = Table::new(&GOODPUT_HEADER);
    for payload in PAYLOADS {
        let packets = payload_packets(payload, MAX_PAYLOAD, PACKET_OVERHEAD);
        let exchange = sending_exchange(&packets, EMPTY_PACKET)?;
        for t_c in INTERVALS {
            let params = blemodel::ConnectionParams::new(t_c, Role::Slave, profile);
            let (q, i_mean) = match connected::interval_summary(profile, &params, &exchange) {
                Ok(v) => v,
                // The event does not fit into the interval.
                Err(e) if e.code == "precondition" => continue,
                Err(e) => return Err(e),
            };
            let ev = blemodel::connection_event_cost(profile, &params, &exchange)?;
            table.push(vec![
                payload.to_string(),
                packets.len().to_string(),
                num(t_c),
                num(f64::from(payload) / t_c),
                num(ev.charge),
                num(q),
                num(i_mean),
                num(f64::from(payload) / q),
            ]);
        }
    }
    Ok(table)
}

fn interval_txpower(profile: &DeviceProfile) -> CliResult<Table> {
    let full = PACKET_OVERHEAD + MAX_PAYLOAD;
    let mut scenarios = Vec::new();
    for level in profile.tx_power.levels().iter().rev() {
        scenarios.push((Role::Master, level.dbm, EMPTY_PACKET, full));
    }
    scenarios.push((Role::Slave, profile.max_tx_power_dbm(), full, EMPTY_PACKET));
    let mut table = Table::new(&connected::HEADER);
    for (role, dbm, rx, tx) in scenarios {
        for t_c in INTERVALS {
            let sc = Scenario {
                role,
                t_c,
                pairs: 8,
                rx,
                tx,
                dbm,
                n_sl: 0.0,
                sca_master: profile.sca_ppm,
                sca_slave: profile.sca_ppm,
            };
            match connected::row(profile, &sc, None) {
                Ok(r) => table.push(r),
                Err(e) if e.code == "precondition" => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(table)
}

fn recipe(profile: &DeviceProfile, a: &SweepArgs, r: Recipe, seed: u64) -> CliResult<Table> {
    let est = Estimator::from_args(profile, &a.estimator);
    match r {
        Recipe::LatencyMap => {
            let mut points = Vec::new();
            for d_s in [0.32, 0.64, 1.28, 1.92] {
                for t_a0 in grid(0.02, 5.0, 0.02)? {
                    points.push((t_a0, 3.12, d_s, est.rho_max));
                }
            }
            discovery_rows(profile, &est, &points, seed)
        }
        Recipe::ClosedForm => closed_form(profile, &est),
        Recipe::DiscoveryCharge => {
            let est = Estimator {
                method: MethodChoice::Algorithm1,
                ..est
            };
            let mut points = Vec::new();
            for d_s in [0.32, 0.64, 1.28] {
                for t_a0 in grid(0.1, 4.0, 0.1)? {
                    points.push((t_a0, 3.12, d_s, est.rho_max));
                }
            }
            discovery_rows(profile, &est, &points, seed)
        }
        Recipe::Goodput => goodput(profile),
        Recipe::IntervalTxpower => interval_txpower(profile),
    }
}

pub fn run(profile: &DeviceProfile, a: &SweepArgs, seed: u64) -> CliResult<Table> {
    if let Some(r) = a.recipe {
        return recipe(profile, a, r, seed);
    }
    let var = a
        .var
        .as_deref()
        .ok_or_else(|| CliError::usage("give --recipe or --var with --start, --stop and --step"))?;
    let (start, stop, step) = match (a.start, a.stop, a.step) {
        (Some(s), Some(e), Some(d)) => (s, e, d),
        _ => return Err(CliError::usage("--var needs --start, --stop and --step")),
    };
    let values = grid(start, stop, step)?;
    if DISCOVERY_VARS.contains(&var) {
        discovery_sweep(profile, a, var, &values, seed)
    } else if CONNECTED_VARS.contains(&var) && var != "role" {
        connected_sweep(profile, a, var, &values)
    } else {
        Err(CliError::usage(format!("unknown sweep variable `{var}`")))
    }
}
