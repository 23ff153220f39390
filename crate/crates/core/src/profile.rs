//! Measured per-phase model parameters for one device.
//!
//! Profiles are stored as JSON documents in the units of the measurement
//! tables (ms, mA, µC by default) and converted to SI base units on load.
//! A [`DeviceProfile`] is immutable once built and can be shared freely
//! between threads.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BLE112_JSON: &str = include_str!("../profiles/ble112.json");

/// Average, minimum, maximum and standard deviation of one measured quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseStats {
    pub avg: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

impl PhaseStats {
    /// Stats of a quantity without variation.
    pub const fn constant(value: f64) -> Self {
        PhaseStats {
            avg: value,
            min: value,
            max: value,
            std: 0.0,
        }
    }

    pub fn spread(&self) -> f64 {
        self.max - self.min
    }

    fn scaled(&self, factor: f64) -> Self {
        PhaseStats {
            avg: self.avg / factor,
            min: self.min / factor,
            max: self.max / factor,
            std: self.std / factor,
        }
    }

    fn unscaled(&self, factor: f64) -> Self {
        PhaseStats {
            avg: self.avg * factor,
            min: self.min * factor,
            max: self.max * factor,
            std: self.std * factor,
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        let all = [self.avg, self.min, self.max, self.std];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(field, "non-finite value"));
        }
        if self.min > self.max {
            return Err(Error::invalid(
                field,
                format!("min {} > max {}", self.min, self.max),
            ));
        }
        if self.avg < self.min || self.avg > self.max {
            return Err(Error::invalid(
                field,
                format!("avg {} outside [min {}, max {}]", self.avg, self.min, self.max),
            ));
        }
        if self.std < 0.0 {
            return Err(Error::invalid(field, format!("std {} < 0", self.std)));
        }
        Ok(())
    }
}

/// A phase with both a duration and a current (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPhase {
    pub duration: PhaseStats,
    pub current: PhaseStats,
}

impl TimedPhase {
    /// Charge at average duration and current.
    pub fn charge(&self) -> f64 {
        self.duration.avg * self.current.avg
    }
}

/// Connected-mode (and advertising) event phases.
///
/// Durations in seconds, currents in amperes, charges in coulombs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectedPhaseTable {
    pub head: TimedPhase,
    pub pre: TimedPhase,
    pub rxtx: TimedPhase,
    pub txrx: TimedPhase,
    pub cpre: TimedPhase,
    pub tra: TimedPhase,
    pub post: TimedPhase,
    pub tail: TimedPhase,
    /// Duration offset of every tx phase.
    pub pretx: PhaseStats,
    /// Duration offset of every rx phase.
    pub prerx: PhaseStats,
    pub rx_current: PhaseStats,
    pub tx_current: PhaseStats,
    /// Charge offset applied once per packet pair. Negative for the BLE112.
    pub to: PhaseStats,
}

/// Scan event phases (SI units).
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPhaseTable {
    pub pre: TimedPhase,
    pub rxtx: TimedPhase,
    pub txrx: TimedPhase,
    pub rxrx: TimedPhase,
    pub post: TimedPhase,
    pub chch: TimedPhase,
    pub rx_current: PhaseStats,
    pub tx_current: PhaseStats,
    pub rxsr_current: PhaseStats,
    pub pretx: PhaseStats,
    pub prerx: PhaseStats,
    pub ctx: PhaseStats,
    pub crx: PhaseStats,
    /// Pre-processing of idle/passive scan events; falls back to `pre`.
    pub idle_pre: Option<TimedPhase>,
    /// Post-processing of idle/passive scan events; falls back to `post`.
    pub idle_post: Option<TimedPhase>,
}

impl ScanPhaseTable {
    pub fn idle_pre(&self) -> &TimedPhase {
        self.idle_pre.as_ref().unwrap_or(&self.pre)
    }

    pub fn idle_post(&self) -> &TimedPhase {
        self.idle_post.as_ref().unwrap_or(&self.post)
    }
}

/// One row of the tx-power table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxPowerLevel {
    pub dbm: i32,
    /// Transmit current in amperes.
    pub current: f64,
}

/// Transmit current per supported tx-power setting, sorted by ascending power.
#[derive(Debug, Clone, PartialEq)]
pub struct TxPowerTable {
    levels: Vec<TxPowerLevel>,
}

impl TxPowerTable {
    pub fn new(mut levels: Vec<TxPowerLevel>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("tx_power_table", "table is empty"));
        }
        levels.sort_by_key(|l| l.dbm);
        for pair in levels.windows(2) {
            if pair[0].dbm == pair[1].dbm {
                return Err(Error::invalid(
                    "tx_power_table",
                    format!("duplicate level {} dBm", pair[0].dbm),
                ));
            }
            if pair[1].current < pair[0].current {
                return Err(Error::invalid(
                    "tx_power_table",
                    format!(
                        "current decreases from {} dBm to {} dBm",
                        pair[0].dbm, pair[1].dbm
                    ),
                ));
            }
        }
        if let Some(bad) = levels.iter().find(|l| !(l.current > 0.0)) {
            return Err(Error::invalid(
                "tx_power_table",
                format!("non-positive current at {} dBm", bad.dbm),
            ));
        }
        Ok(TxPowerTable { levels })
    }

    pub fn levels(&self) -> &[TxPowerLevel] {
        &self.levels
    }

    /// Exact-match lookup; levels in between are not interpolated.
    pub fn current(&self, dbm: i32) -> Result<f64> {
        self.levels
            .iter()
            .find(|l| l.dbm == dbm)
            .map(|l| l.current)
            .ok_or_else(|| Error::UnknownTxPower {
                requested: dbm,
                available: self
                    .levels
                    .iter()
                    .map(|l| l.dbm.to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

/// Device role in a connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Master,
    Slave,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Master => "master",
            Role::Slave => "slave",
        })
    }
}

/// All model parameters of one device, in SI base units.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    pub name: String,
    pub connected: ConnectedPhaseTable,
    /// Connected-mode values for the master role, when measured separately.
    pub connected_master: Option<ConnectedPhaseTable>,
    pub scan: ScanPhaseTable,
    pub tx_power: TxPowerTable,
    /// Sleep current (A).
    pub sleep_current: f64,
    /// Sleep clock accuracy (ppm).
    pub sca_ppm: f64,
    /// Interframe space (s).
    pub ifs: f64,
    /// Air time of one bit (s).
    pub bit_duration: f64,
    /// `prerx` offset of the first rx phase in a slave's connection event (s).
    pub slave_first_prerx: f64,
    /// Duration of one advertising packet including the interframe space (s).
    pub adv_packet_duration: f64,
    /// Advertiser channel-change time between advertising packets (s).
    pub channel_change: f64,
}

impl DeviceProfile {
    /// The bundled BLE112 profile.
    pub fn ble112() -> Self {
        Self::from_json(BLE112_JSON).expect("bundled profile is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProfileDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("profile serializes")
    }

    /// Phase table for `role`, honouring master overrides.
    pub fn connected_for(&self, role: Role) -> &ConnectedPhaseTable {
        match role {
            Role::Master => self.connected_master.as_ref().unwrap_or(&self.connected),
            Role::Slave => &self.connected,
        }
    }

    pub fn tx_current(&self, dbm: i32) -> Result<f64> {
        self.tx_power.current(dbm)
    }

    /// Highest tx-power level of the profile (dBm).
    pub fn max_tx_power_dbm(&self) -> i32 {
        self.tx_power.levels().last().map(|l| l.dbm).unwrap_or(0)
    }

    pub fn from_document(doc: &ProfileDocument) -> Result<Self> {
        let units = doc.units.scales()?;
        let connected = doc.connected_phases.to_table(&units, "connected_phases")?;
        let connected_master = doc
            .master_connected_phases
            .as_ref()
            .map(|t| t.to_table(&units, "master_connected_phases"))
            .transpose()?;
        let scan = doc.scan_phases.to_table(&units)?;
        let tx_power = TxPowerTable::new(
            doc.tx_power_table
                .iter()
                .map(|row| TxPowerLevel {
                    dbm: row.dbm,
                    current: row.ma / 1e3,
                })
                .collect(),
        )?;

        positive("sleep_current_uA", doc.sleep_current_ua)?;
        positive("ifs_us", doc.ifs_us)?;
        positive("bit_us", doc.bit_us)?;
        positive("slave_first_prerx_us", doc.slave_first_prerx_us)?;
        if !(doc.sca_ppm >= 0.0) {
            return Err(Error::invalid("sca_ppm", "must be >= 0"));
        }
        let adv_packet_us = doc.adv_packet_us.unwrap_or(DEFAULT_ADV_PACKET_US);
        let channel_change_us = doc.channel_change_us.unwrap_or(doc.ifs_us);
        positive("adv_packet_us", adv_packet_us)?;
        if !(channel_change_us >= 0.0) {
            return Err(Error::invalid("channel_change_us", "must be >= 0"));
        }

        Ok(DeviceProfile {
            name: doc.name.clone(),
            connected,
            connected_master,
            scan,
            tx_power,
            sleep_current: doc.sleep_current_ua / 1e6,
            sca_ppm: doc.sca_ppm,
            ifs: doc.ifs_us / 1e6,
            bit_duration: doc.bit_us / 1e6,
            slave_first_prerx: doc.slave_first_prerx_us / 1e6,
            adv_packet_duration: adv_packet_us / 1e6,
            channel_change: channel_change_us / 1e6,
        })
    }

    /// Document form in ms / mA / µC.
    pub fn to_document(&self) -> ProfileDocument {
        let units = UnitScales::default();
        ProfileDocument {
            name: self.name.clone(),
            units: Units::default(),
            connected_phases: ConnectedPhasesDoc::from_table(&self.connected, &units),
            master_connected_phases: self
                .connected_master
                .as_ref()
                .map(|t| ConnectedPhasesDoc::from_table(t, &units)),
            scan_phases: ScanPhasesDoc::from_table(&self.scan, &units),
            tx_power_table: self
                .tx_power
                .levels()
                .iter()
                .rev()
                .map(|l| TxPowerRow {
                    dbm: l.dbm,
                    ma: l.current * 1e3,
                })
                .collect(),
            sleep_current_ua: self.sleep_current * 1e6,
            sca_ppm: self.sca_ppm,
            ifs_us: self.ifs * 1e6,
            bit_us: self.bit_duration * 1e6,
            slave_first_prerx_us: self.slave_first_prerx * 1e6,
            adv_packet_us: Some(self.adv_packet_duration * 1e6),
            channel_change_us: Some(self.channel_change * 1e6),
        }
    }
}

const DEFAULT_ADV_PACKET_US: f64 = 446.0;

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be > 0, got {v}")))
    }
}

// ---------------------------------------------------------------------------
// File schema

/// Top-level profile document as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub name: String,
    #[serde(default)]
    pub units: Units,
    pub connected_phases: ConnectedPhasesDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_connected_phases: Option<ConnectedPhasesDoc>,
    pub scan_phases: ScanPhasesDoc,
    pub tx_power_table: Vec<TxPowerRow>,
    #[serde(rename = "sleep_current_uA")]
    pub sleep_current_ua: f64,
    pub sca_ppm: f64,
    pub ifs_us: f64,
    pub bit_us: f64,
    pub slave_first_prerx_us: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adv_packet_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_change_us: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub duration: String,
    pub current: String,
    pub charge: String,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            duration: "ms".into(),
            current: "mA".into(),
            charge: "uC".into(),
        }
    }
}

struct UnitScales {
    duration: f64,
    current: f64,
    charge: f64,
}

impl Default for UnitScales {
    fn default() -> Self {
        UnitScales {
            duration: 1e3,
            current: 1e3,
            charge: 1e6,
        }
    }
}

impl Units {
    fn scales(&self) -> Result<UnitScales> {
        let duration = match self.duration.as_str() {
            "s" => 1.0,
            "ms" => 1e3,
            "us" => 1e6,
            other => {
                return Err(Error::invalid(
                    "units.duration",
                    format!("unknown unit `{other}`"),
                ))
            }
        };
        let current = match self.current.as_str() {
            "A" => 1.0,
            "mA" => 1e3,
            "uA" => 1e6,
            other => return Err(Error::invalid("units.current", format!("unknown unit `{other}`"))),
        };
        let charge = match self.charge.as_str() {
            "C" => 1.0,
            "mC" => 1e3,
            "uC" => 1e6,
            "nC" => 1e9,
            other => return Err(Error::invalid("units.charge", format!("unknown unit `{other}`"))),
        };
        Ok(UnitScales {
            duration,
            current,
            charge,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxPowerRow {
    pub dbm: i32,
    pub ma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimedEntry {
    pub d: PhaseStats,
    pub i: PhaseStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationEntry {
    pub d: PhaseStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrentEntry {
    pub i: PhaseStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeEntry {
    pub q: PhaseStats,
}

impl TimedEntry {
    fn to_phase(self, u: &UnitScales, field: &str) -> Result<TimedPhase> {
        self.d.validate(&format!("{field}.d"))?;
        self.i.validate(&format!("{field}.i"))?;
        Ok(TimedPhase {
            duration: self.d.scaled(u.duration),
            current: self.i.scaled(u.current),
        })
    }

    fn from_phase(p: &TimedPhase, u: &UnitScales) -> Self {
        TimedEntry {
            d: p.duration.unscaled(u.duration),
            i: p.current.unscaled(u.current),
        }
    }
}

fn checked(stats: PhaseStats, field: String, factor: f64) -> Result<PhaseStats> {
    stats.validate(&field)?;
    Ok(stats.scaled(factor))
}

/// Connected-mode phases; every phase must appear exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectedPhasesDoc {
    pub head: TimedEntry,
    pub pre: TimedEntry,
    pub rx: CurrentEntry,
    pub rxtx: TimedEntry,
    pub tx: CurrentEntry,
    pub pretx: DurationEntry,
    pub txrx: TimedEntry,
    pub cpre: TimedEntry,
    pub prerx: DurationEntry,
    pub tra: TimedEntry,
    pub post: TimedEntry,
    pub tail: TimedEntry,
    pub to: ChargeEntry,
}

impl ConnectedPhasesDoc {
    fn to_table(&self, u: &UnitScales, base: &str) -> Result<ConnectedPhaseTable> {
        let f = |name: &str| format!("{base}.{name}");
        Ok(ConnectedPhaseTable {
            head: self.head.to_phase(u, &f("head"))?,
            pre: self.pre.to_phase(u, &f("pre"))?,
            rxtx: self.rxtx.to_phase(u, &f("rxtx"))?,
            txrx: self.txrx.to_phase(u, &f("txrx"))?,
            cpre: self.cpre.to_phase(u, &f("cpre"))?,
            tra: self.tra.to_phase(u, &f("tra"))?,
            post: self.post.to_phase(u, &f("post"))?,
            tail: self.tail.to_phase(u, &f("tail"))?,
            pretx: checked(self.pretx.d, f("pretx.d"), u.duration)?,
            prerx: checked(self.prerx.d, f("prerx.d"), u.duration)?,
            rx_current: checked(self.rx.i, f("rx.i"), u.current)?,
            tx_current: checked(self.tx.i, f("tx.i"), u.current)?,
            to: checked(self.to.q, f("to.q"), u.charge)?,
        })
    }

    fn from_table(t: &ConnectedPhaseTable, u: &UnitScales) -> Self {
        ConnectedPhasesDoc {
            head: TimedEntry::from_phase(&t.head, u),
            pre: TimedEntry::from_phase(&t.pre, u),
            rx: CurrentEntry {
                i: t.rx_current.unscaled(u.current),
            },
            rxtx: TimedEntry::from_phase(&t.rxtx, u),
            tx: CurrentEntry {
                i: t.tx_current.unscaled(u.current),
            },
            pretx: DurationEntry {
                d: t.pretx.unscaled(u.duration),
            },
            txrx: TimedEntry::from_phase(&t.txrx, u),
            cpre: TimedEntry::from_phase(&t.cpre, u),
            prerx: DurationEntry {
                d: t.prerx.unscaled(u.duration),
            },
            tra: TimedEntry::from_phase(&t.tra, u),
            post: TimedEntry::from_phase(&t.post, u),
            tail: TimedEntry::from_phase(&t.tail, u),
            to: ChargeEntry {
                q: t.to.unscaled(u.charge),
            },
        }
    }
}

/// Scan-event phases; every phase must appear exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanPhasesDoc {
    pub pre_s: TimedEntry,
    pub rx_s: CurrentEntry,
    pub rxtx_s: TimedEntry,
    pub tx_s: CurrentEntry,
    pub pretx_s: DurationEntry,
    pub txrx_s: TimedEntry,
    pub rxsr: CurrentEntry,
    pub prerx_s: DurationEntry,
    pub rxrx_s: TimedEntry,
    pub post_s: TimedEntry,
    pub chch_s: TimedEntry,
    pub ctx_s: ChargeEntry,
    pub crx_s: ChargeEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_s_idle: Option<TimedEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_s_idle: Option<TimedEntry>,
}

impl ScanPhasesDoc {
    fn to_table(&self, u: &UnitScales) -> Result<ScanPhaseTable> {
        let f = |name: &str| format!("scan_phases.{name}");
        Ok(ScanPhaseTable {
            pre: self.pre_s.to_phase(u, &f("pre_s"))?,
            rxtx: self.rxtx_s.to_phase(u, &f("rxtx_s"))?,
            txrx: self.txrx_s.to_phase(u, &f("txrx_s"))?,
            rxrx: self.rxrx_s.to_phase(u, &f("rxrx_s"))?,
            post: self.post_s.to_phase(u, &f("post_s"))?,
            chch: self.chch_s.to_phase(u, &f("chch_s"))?,
            rx_current: checked(self.rx_s.i, f("rx_s.i"), u.current)?,
            tx_current: checked(self.tx_s.i, f("tx_s.i"), u.current)?,
            rxsr_current: checked(self.rxsr.i, f("rxsr.i"), u.current)?,
            pretx: checked(self.pretx_s.d, f("pretx_s.d"), u.duration)?,
            prerx: checked(self.prerx_s.d, f("prerx_s.d"), u.duration)?,
            ctx: checked(self.ctx_s.q, f("ctx_s.q"), u.charge)?,
            crx: checked(self.crx_s.q, f("crx_s.q"), u.charge)?,
            idle_pre: self
                .pre_s_idle
                .map(|e| e.to_phase(u, &f("pre_s_idle")))
                .transpose()?,
            idle_post: self
                .post_s_idle
                .map(|e| e.to_phase(u, &f("post_s_idle")))
                .transpose()?,
        })
    }

    fn from_table(t: &ScanPhaseTable, u: &UnitScales) -> Self {
        ScanPhasesDoc {
            pre_s: TimedEntry::from_phase(&t.pre, u),
            rx_s: CurrentEntry {
                i: t.rx_current.unscaled(u.current),
            },
            rxtx_s: TimedEntry::from_phase(&t.rxtx, u),
            tx_s: CurrentEntry {
                i: t.tx_current.unscaled(u.current),
            },
            pretx_s: DurationEntry {
                d: t.pretx.unscaled(u.duration),
            },
            txrx_s: TimedEntry::from_phase(&t.txrx, u),
            rxsr: CurrentEntry {
                i: t.rxsr_current.unscaled(u.current),
            },
            prerx_s: DurationEntry {
                d: t.prerx.unscaled(u.duration),
            },
            rxrx_s: TimedEntry::from_phase(&t.rxrx, u),
            post_s: TimedEntry::from_phase(&t.post, u),
            chch_s: TimedEntry::from_phase(&t.chch, u),
            ctx_s: ChargeEntry {
                q: t.ctx.unscaled(u.charge),
            },
            crx_s: ChargeEntry {
                q: t.crx.unscaled(u.charge),
            },
            pre_s_idle: t.idle_pre.as_ref().map(|p| TimedEntry::from_phase(p, u)),
            post_s_idle: t.idle_post.as_ref().map(|p| TimedEntry::from_phase(p, u)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_profile_post_phase() {
        let p = DeviceProfile::ble112();
        assert_eq!(p.connected.post.duration.avg, 0.860 / 1e3);
        assert_eq!(p.connected.post.current.avg, 7.980 / 1e3);
        assert_eq!(p.scan.rxrx.duration.avg, 0.377 / 1e3);
        assert_eq!(p.sleep_current, 0.9 / 1e6);
        assert_eq!(p.sca_ppm, 50.0);
        assert_eq!(p.ifs, 150.0 / 1e6);
        assert_eq!(p.bit_duration, 1.0 / 1e6);
        assert_eq!(p.slave_first_prerx, 388.0 / 1e6);
    }

    #[test]
    fn tx_current_exact_lookup() {
        let p = DeviceProfile::ble112();
        assert_eq!(p.tx_current(3).unwrap(), 36.5 / 1e3);
        assert_eq!(p.tx_current(-23).unwrap(), 26.3 / 1e3);
        let err = p.tx_current(7).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::UnknownTxPower { requested: 7, .. }));
        assert!(msg.contains("-23") && msg.contains("3"), "{msg}");
    }

    #[test]
    fn min_greater_than_max_is_rejected() {
        let mut doc = DeviceProfile::ble112().to_document();
        doc.connected_phases.tail.d.min = 0.5;
        doc.connected_phases.tail.d.max = 0.4;
        doc.connected_phases.tail.d.avg = 0.45;
        let err = DeviceProfile::from_document(&doc).unwrap_err();
        match err {
            Error::InvalidProfile { field, reason } => {
                assert_eq!(field, "connected_phases.tail.d");
                assert!(reason.contains("min"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn negative_std_and_bad_scalars_are_rejected() {
        let mut doc = DeviceProfile::ble112().to_document();
        doc.scan_phases.chch_s.i.std = -0.1;
        assert!(DeviceProfile::from_document(&doc).is_err());

        let mut doc = DeviceProfile::ble112().to_document();
        doc.sleep_current_ua = 0.0;
        assert!(DeviceProfile::from_document(&doc).is_err());

        let mut doc = DeviceProfile::ble112().to_document();
        doc.sca_ppm = -1.0;
        assert!(DeviceProfile::from_document(&doc).is_err());
    }

    #[test]
    fn decreasing_tx_table_is_rejected() {
        let mut doc = DeviceProfile::ble112().to_document();
        doc.tx_power_table[0].ma = 1.0;
        assert!(DeviceProfile::from_document(&doc).is_err());
    }

    #[test]
    fn missing_and_unknown_phases_are_parse_errors() {
        let text = BLE112_JSON.replace("\"tail\":", "\"tial\":");
        assert!(matches!(DeviceProfile::from_json(&text), Err(Error::Parse(_))));
        let text = BLE112_JSON.replace("\"rxrx_s\":", "\"rxrx_s\": { \"d\": { \"avg\": 1, \"min\": 1, \"max\": 1, \"std\": 0 }, \"i\": { \"avg\": 1, \"min\": 1, \"max\": 1, \"std\": 0 } }, \"rxrx_s\":");
        assert!(matches!(DeviceProfile::from_json(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn master_table_defaults_to_slave_values() {
        let p = DeviceProfile::ble112();
        assert_eq!(p.connected_for(Role::Master), &p.connected);

        let mut doc = p.to_document();
        let mut master = doc.connected_phases.clone();
        master.cpre.d.avg = 0.080;
        doc.master_connected_phases = Some(master);
        let p = DeviceProfile::from_document(&doc).unwrap();
        assert_eq!(p.connected_for(Role::Master).cpre.duration.avg, 0.080 / 1e3);
        assert_eq!(p.connected_for(Role::Slave).cpre.duration.avg, 0.073 / 1e3);
    }

    #[test]
    fn alternative_units_are_converted() {
        let mut doc = DeviceProfile::ble112().to_document();
        doc.units.duration = "us".into();
        doc.connected_phases.post.d = PhaseStats {
            avg: 860.0,
            min: 610.0,
            max: 1110.0,
            std: 101.0,
        };
        let p = DeviceProfile::from_document(&doc).unwrap();
        assert_eq!(p.connected.post.duration.avg, 860.0 / 1e6);

        doc.units.charge = "furlong".into();
        assert!(DeviceProfile::from_document(&doc).is_err());
    }
}
