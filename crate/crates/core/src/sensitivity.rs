//! Effect of per-phase duration and current variation on the charge of one
//! connection interval.
//!
//! Lengthening a phase by `dd` shortens the following sleep by the same
//! amount, so its charge changes by `dd (I_ph - I_sl)`. Raising a phase
//! current by `dI` changes the charge by `dI d_ph`. Variations of different
//! phases are treated as independent.

use std::fmt;

use crate::error::{Error, Result};
use crate::event::{ConnectedEventValues, ConnectedPhase, ConnectionParams, PacketExchange};
use crate::profile::{ConnectedPhaseTable, DeviceProfile, PhaseStats, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SensitivityKind {
    Duration,
    Current,
}

impl SensitivityKind {
    pub fn name(self) -> &'static str {
        match self {
            SensitivityKind::Duration => "duration",
            SensitivityKind::Current => "current",
        }
    }
}

impl fmt::Display for SensitivityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityReport {
    pub phase: ConnectedPhase,
    pub kind: SensitivityKind,
    /// Charge change per unit of variation: amperes for durations, seconds
    /// for currents. Summed over all occurrences of the phase in the event.
    pub s: f64,
    /// Spread `max - min` of the varied quantity.
    pub spread: f64,
    pub delta_q: f64,
    /// Charge of the connection interval the change is relative to.
    pub q_total: f64,
    pub relative_change: f64,
}

impl SensitivityReport {
    /// Report from explicit inputs: sensitivity `s`, spread and reference
    /// charge.
    pub fn from_parts(
        phase: ConnectedPhase,
        kind: SensitivityKind,
        s: f64,
        spread: f64,
        q_total: f64,
    ) -> Self {
        let delta_q = spread * s;
        SensitivityReport {
            phase,
            kind,
            s,
            spread,
            delta_q,
            q_total,
            relative_change: delta_q / q_total,
        }
    }
}

/// Phases with measured duration variation, in table order.
pub const DURATION_PHASES: [ConnectedPhase; 10] = [
    ConnectedPhase::Head,
    ConnectedPhase::Pre,
    ConnectedPhase::Cpre,
    ConnectedPhase::Rxtx,
    ConnectedPhase::Txrx,
    ConnectedPhase::Pretx,
    ConnectedPhase::Prerx,
    ConnectedPhase::Tra,
    ConnectedPhase::Post,
    ConnectedPhase::Tail,
];

/// Phases with measured current variation, in table order.
pub const CURRENT_PHASES: [ConnectedPhase; 10] = [
    ConnectedPhase::Head,
    ConnectedPhase::Pre,
    ConnectedPhase::Cpre,
    ConnectedPhase::Rx,
    ConnectedPhase::Rxtx,
    ConnectedPhase::Tx,
    ConnectedPhase::Txrx,
    ConnectedPhase::Tra,
    ConnectedPhase::Post,
    ConnectedPhase::Tail,
];

/// Measured duration statistics of `phase`.
pub fn duration_stats(table: &ConnectedPhaseTable, phase: ConnectedPhase) -> Option<PhaseStats> {
    use ConnectedPhase::*;
    Some(match phase {
        Head => table.head.duration,
        Pre => table.pre.duration,
        Cpre => table.cpre.duration,
        Rxtx => table.rxtx.duration,
        Txrx => table.txrx.duration,
        Tra => table.tra.duration,
        Post => table.post.duration,
        Tail => table.tail.duration,
        Pretx => table.pretx,
        Prerx => table.prerx,
        Ww | Rx | Tx => return None,
    })
}

/// Measured current statistics of `phase`.
pub fn current_stats(table: &ConnectedPhaseTable, phase: ConnectedPhase) -> Option<PhaseStats> {
    use ConnectedPhase::*;
    Some(match phase {
        Head => table.head.current,
        Pre => table.pre.current,
        Cpre => table.cpre.current,
        Rxtx => table.rxtx.current,
        Txrx => table.txrx.current,
        Tra => table.tra.current,
        Post => table.post.current,
        Tail => table.tail.current,
        Rx => table.rx_current,
        Tx => table.tx_current,
        Ww | Pretx | Prerx => return None,
    })
}

fn interval_charge(
    profile: &DeviceProfile,
    params: &ConnectionParams,
    exchange: &PacketExchange,
) -> Result<(ConnectedEventValues, f64)> {
    params.validate()?;
    let values = ConnectedEventValues::new(profile, params.role, params.tx_power_dbm)?;
    let q = values.interval_charge(params, exchange);
    Ok((values, q))
}

/// Sensitivity of the interval charge to the duration of `phase`.
pub fn duration_sensitivity(
    profile: &DeviceProfile,
    phase: ConnectedPhase,
    params: &ConnectionParams,
    exchange: &PacketExchange,
) -> Result<SensitivityReport> {
    let table = profile.connected_for(params.role);
    let stats = duration_stats(table, phase).ok_or_else(|| Error::NoVariationData {
        phase: phase.name().into(),
        kind: "duration",
    })?;
    let (values, q_total) = interval_charge(profile, params, exchange)?;
    let segments = values.connection_phases(params, exchange);
    let count = |p: ConnectedPhase| segments.iter().filter(|s| s.phase == p).count() as f64;
    let (occurrences, current) = match phase {
        ConnectedPhase::Pretx => (count(ConnectedPhase::Tx), values.i_tx),
        ConnectedPhase::Prerx => {
            // The slave's first rx phase uses its own fixed offset.
            let first = if params.role == Role::Slave { 1.0 } else { 0.0 };
            (count(ConnectedPhase::Rx) - first, values.i_rx)
        }
        p => {
            let current = segments
                .iter()
                .find(|s| s.phase == p)
                .map(|s| s.current)
                .unwrap_or(0.0);
            (count(p), current)
        }
    };
    let s = if occurrences > 0.0 {
        occurrences * (current - values.i_sl)
    } else {
        0.0
    };
    Ok(SensitivityReport::from_parts(
        phase,
        SensitivityKind::Duration,
        s,
        stats.spread(),
        q_total,
    ))
}

/// Sensitivity of the interval charge to the current of `phase`.
///
/// Window widening draws the rx current and counts towards the rx phase.
pub fn current_sensitivity(
    profile: &DeviceProfile,
    phase: ConnectedPhase,
    params: &ConnectionParams,
    exchange: &PacketExchange,
) -> Result<SensitivityReport> {
    let table = profile.connected_for(params.role);
    let stats = current_stats(table, phase).ok_or_else(|| Error::NoVariationData {
        phase: phase.name().into(),
        kind: "current",
    })?;
    let (values, q_total) = interval_charge(profile, params, exchange)?;
    let s: f64 = values
        .connection_phases(params, exchange)
        .iter()
        .filter(|seg| seg.phase == phase || (phase == ConnectedPhase::Rx && seg.phase == ConnectedPhase::Ww))
        .map(|seg| seg.duration)
        .fold(0.0, |acc, d| acc + d);
    Ok(SensitivityReport::from_parts(
        phase,
        SensitivityKind::Current,
        s,
        stats.spread(),
        q_total,
    ))
}

/// All duration rows followed by all current rows.
pub fn sensitivity_table(
    profile: &DeviceProfile,
    params: &ConnectionParams,
    exchange: &PacketExchange,
) -> Result<Vec<SensitivityReport>> {
    let mut rows = Vec::with_capacity(DURATION_PHASES.len() + CURRENT_PHASES.len());
    for phase in DURATION_PHASES {
        rows.push(duration_sensitivity(profile, phase, params, exchange)?);
    }
    for phase in CURRENT_PHASES {
        rows.push(current_sensitivity(profile, phase, params, exchange)?);
    }
    Ok(rows)
}

/// Sets the effective duration of `phase` in `values`.
pub fn set_duration(values: &mut ConnectedEventValues, phase: ConnectedPhase, d: f64) {
    use ConnectedPhase::*;
    match phase {
        Head => values.head.duration = d,
        Pre => values.pre.duration = d,
        Cpre => values.cpre.duration = d,
        Rxtx => values.rxtx.duration = d,
        Txrx => values.txrx.duration = d,
        Tra => values.tra.duration = d,
        Post => values.post.duration = d,
        Tail => values.tail.duration = d,
        Pretx => values.pretx = d,
        Prerx => values.prerx = d,
        Ww | Rx | Tx => {}
    }
}

/// Sets the effective current of `phase` in `values`.
pub fn set_current(values: &mut ConnectedEventValues, phase: ConnectedPhase, i: f64) {
    use ConnectedPhase::*;
    match phase {
        Head => values.head.current = i,
        Pre => values.pre.current = i,
        Cpre => values.cpre.current = i,
        Rxtx => values.rxtx.current = i,
        Txrx => values.txrx.current = i,
        Tra => values.tra.current = i,
        Post => values.post.current = i,
        Tail => values.tail.current = i,
        Rx => values.i_rx = i,
        Tx => values.i_tx = i,
        Ww | Pretx | Prerx => {}
    }
}
