use blemodel::{
    connected_total_charge, connection_event_cost, connection_interval_charge, ConnectedEventValues,
    ConnectionParams, DeviceProfile, PacketExchange, PacketPair, Role,
};

use crate::error::CliResult;
use crate::output::{num, opt, Table};
use crate::{ConnectedArgs, ScenarioArgs};

pub const HEADER: [&str; 13] = [
    "role",
    "t_c_s",
    "pairs",
    "rx_bytes",
    "tx_bytes",
    "tx_power_dBm",
    "n_sl",
    "event_charge_C",
    "event_duration_s",
    "interval_charge_C",
    "mean_current_A",
    "horizon_s",
    "horizon_charge_C",
];

pub const PHASE_HEADER: [&str; 5] = ["index", "phase", "duration_s", "current_A", "charge_C"];

/// One connection scenario with uniform packet sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub role: Role,
    pub t_c: f64,
    pub pairs: usize,
    pub rx: u32,
    pub tx: u32,
    pub dbm: i32,
    pub n_sl: f64,
    pub sca_master: f64,
    pub sca_slave: f64,
}

impl Scenario {
    pub fn from_args(profile: &DeviceProfile, a: &ScenarioArgs) -> Self {
        Scenario {
            role: a.role.into(),
            t_c: a.tc,
            pairs: a.pairs,
            rx: a.rx,
            tx: a.tx,
            dbm: a.dbm.unwrap_or_else(|| profile.max_tx_power_dbm()),
            n_sl: a.nsl,
            sca_master: a.sca_master.unwrap_or(profile.sca_ppm),
            sca_slave: a.sca_slave.unwrap_or(profile.sca_ppm),
        }
    }

    pub fn params(&self, profile: &DeviceProfile) -> ConnectionParams {
        ConnectionParams {
            sca_master_ppm: self.sca_master,
            sca_slave_ppm: self.sca_slave,
            ..ConnectionParams::new(self.t_c, self.role, profile)
                .with_slave_latency(self.n_sl)
                .with_tx_power(self.dbm)
        }
    }

    pub fn exchange(&self) -> CliResult<PacketExchange> {
        Ok(PacketExchange::uniform(self.pairs, self.rx, self.tx)?)
    }
}

/// Interval charge and mean current for an arbitrary packet exchange.
pub fn interval_summary(
    profile: &DeviceProfile,
    params: &ConnectionParams,
    exchange: &PacketExchange,
) -> CliResult<(f64, f64)> {
    let q = connection_interval_charge(profile, params, exchange)?;
    Ok((q, q / params.t_c))
}

pub fn row(profile: &DeviceProfile, sc: &Scenario, horizon: Option<f64>) -> CliResult<Vec<String>> {
    let params = sc.params(profile);
    let exchange = sc.exchange()?;
    let ev = connection_event_cost(profile, &params, &exchange)?;
    let (q, i_mean) = interval_summary(profile, &params, &exchange)?;
    let total = match horizon {
        Some(t_g) => Some(connected_total_charge(profile, &params, &[exchange], t_g)?),
        None => None,
    };
    Ok(vec![
        sc.role.to_string(),
        num(sc.t_c),
        sc.pairs.to_string(),
        sc.rx.to_string(),
        sc.tx.to_string(),
        sc.dbm.to_string(),
        num(sc.n_sl),
        num(ev.charge),
        num(ev.duration),
        num(q),
        num(i_mean),
        opt(horizon),
        opt(total),
    ])
}

pub fn run(profile: &DeviceProfile, a: &ConnectedArgs) -> CliResult<Table> {
    let sc = Scenario::from_args(profile, &a.scenario);
    if a.phases {
        let params = sc.params(profile);
        params.validate()?;
        let values = ConnectedEventValues::new(profile, sc.role, sc.dbm)?;
        let mut table = Table::new(&PHASE_HEADER);
        for (i, seg) in values
            .connection_phases(&params, &sc.exchange()?)
            .iter()
            .enumerate()
        {
            table.push(vec![
                i.to_string(),
                seg.phase.to_string(),
                num(seg.duration),
                num(seg.current),
                num(seg.charge()),
            ]);
        }
        return Ok(table);
    }
    let mut table = Table::new(&HEADER);
    table.push(row(profile, &sc, a.horizon)?);
    Ok(table)
}

/// Packets carrying `payload` bytes: full packets of `max_payload` bytes and
/// one partial packet, each with `overhead` extra bytes. Zero payload sends
/// one empty packet.
pub fn payload_packets(payload: u32, max_payload: u32, overhead: u32) -> Vec<u32> {
    if payload == 0 {
        return vec![overhead];
    }
    let mut out = Vec::new();
    let mut left = payload;
    while left > 0 {
        let chunk = left.min(max_payload);
        out.push(overhead + chunk);
        left -= chunk;
    }
    out
}

/// Exchange in which the device sends `tx_packets` and receives a packet of
/// `rx_bytes` for each.
pub fn sending_exchange(tx_packets: &[u32], rx_bytes: u32) -> CliResult<PacketExchange> {
    Ok(PacketExchange::new(
        tx_packets
            .iter()
            .map(|&tx_bytes| PacketPair { rx_bytes, tx_bytes })
            .collect(),
    )?)
}
