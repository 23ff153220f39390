//! Charge and duration of single protocol events.
//!
//! Each event is decomposed into phases with an effective duration and an
//! effective current. The event charge is the sum of the phase products
//! plus per-device correction offsets.

use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};
use crate::profile::{DeviceProfile, Role, TimedPhase};

const BITS_PER_BYTE: f64 = 8.0;
const SLOT: f64 = 1.25e-3;
const T_C_MIN: f64 = 7.5e-3;
const T_C_MAX: f64 = 4.0;
const N_SL_MAX: f64 = 500.0;

/// Charge (C) and duration (s) of one event.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EventCost {
    pub charge: f64,
    pub duration: f64,
}

impl EventCost {
    pub const ZERO: EventCost = EventCost {
        charge: 0.0,
        duration: 0.0,
    };

    pub fn new(charge: f64, duration: f64) -> Self {
        EventCost { charge, duration }
    }

    /// Mean current over the event.
    pub fn mean_current(&self) -> f64 {
        self.charge / self.duration
    }
}

impl Add for EventCost {
    type Output = EventCost;

    fn add(self, rhs: EventCost) -> EventCost {
        EventCost {
            charge: self.charge + rhs.charge,
            duration: self.duration + rhs.duration,
        }
    }
}

/// Connected-mode protocol parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionParams {
    /// Connection interval (s).
    pub t_c: f64,
    /// Average slave latency.
    pub n_sl_avg: f64,
    pub sca_master_ppm: f64,
    pub sca_slave_ppm: f64,
    pub tx_power_dbm: i32,
    pub role: Role,
}

impl ConnectionParams {
    /// Parameters with no slave latency, the profile's clock accuracy on both
    /// sides and the highest tx-power level of the profile.
    pub fn new(t_c: f64, role: Role, profile: &DeviceProfile) -> Self {
        let tx_power_dbm = profile.max_tx_power_dbm();
        ConnectionParams {
            t_c,
            n_sl_avg: 0.0,
            sca_master_ppm: profile.sca_ppm,
            sca_slave_ppm: profile.sca_ppm,
            tx_power_dbm,
            role,
        }
    }

    pub fn with_slave_latency(mut self, n_sl_avg: f64) -> Self {
        self.n_sl_avg = n_sl_avg;
        self
    }

    pub fn with_tx_power(mut self, dbm: i32) -> Self {
        self.tx_power_dbm = dbm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(T_C_MIN..=T_C_MAX).contains(&self.t_c) {
            return Err(Error::out_of_range(
                "t_c",
                format!("{} s not in [0.0075, 4.0] s", self.t_c),
            ));
        }
        if !(0.0..=N_SL_MAX).contains(&self.n_sl_avg) {
            return Err(Error::out_of_range(
                "n_sl_avg",
                format!("{} not in [0, 500]", self.n_sl_avg),
            ));
        }
        if !(self.sca_master_ppm >= 0.0 && self.sca_slave_ppm >= 0.0) {
            return Err(Error::out_of_range("sca_ppm", "must be >= 0"));
        }
        Ok(())
    }
}

/// Bytes received and transmitted in one packet pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketPair {
    pub rx_bytes: u32,
    pub tx_bytes: u32,
}

/// Packet pairs exchanged within one connection event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketExchange {
    pairs: Vec<PacketPair>,
}

impl PacketExchange {
    pub fn new(pairs: Vec<PacketPair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::out_of_range("n_seq", "at least one packet pair"));
        }
        Ok(PacketExchange { pairs })
    }

    /// `n_seq` identical pairs.
    pub fn uniform(n_seq: usize, rx_bytes: u32, tx_bytes: u32) -> Result<Self> {
        Self::new(vec![PacketPair { rx_bytes, tx_bytes }; n_seq])
    }

    pub fn pairs(&self) -> &[PacketPair] {
        &self.pairs
    }

    pub fn n_seq(&self) -> usize {
        self.pairs.len()
    }
}

/// Phase identifiers of a connection event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConnectedPhase {
    Head,
    Pre,
    Cpre,
    Ww,
    Rx,
    Rxtx,
    Tx,
    Txrx,
    Tra,
    Post,
    Tail,
    Pretx,
    Prerx,
}

impl ConnectedPhase {
    pub fn name(self) -> &'static str {
        match self {
            ConnectedPhase::Head => "head",
            ConnectedPhase::Pre => "pre",
            ConnectedPhase::Cpre => "cpre",
            ConnectedPhase::Ww => "ww",
            ConnectedPhase::Rx => "rx",
            ConnectedPhase::Rxtx => "rxtx",
            ConnectedPhase::Tx => "tx",
            ConnectedPhase::Txrx => "txrx",
            ConnectedPhase::Tra => "tra",
            ConnectedPhase::Post => "post",
            ConnectedPhase::Tail => "tail",
            ConnectedPhase::Pretx => "pretx",
            ConnectedPhase::Prerx => "prerx",
        }
    }
}

impl fmt::Display for ConnectedPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One phase occurrence in an event timeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSegment {
    pub phase: ConnectedPhase,
    pub duration: f64,
    pub current: f64,
}

impl PhaseSegment {
    pub fn charge(&self) -> f64 {
        self.duration * self.current
    }
}

/// Effective duration and current of one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub duration: f64,
    pub current: f64,
}

impl From<&TimedPhase> for Phase {
    fn from(p: &TimedPhase) -> Self {
        Phase {
            duration: p.duration.avg,
            current: p.current.avg,
        }
    }
}

/// Effective values entering a connection or advertising event.
///
/// Built from profile averages; fields can be perturbed to evaluate the
/// event at other points of the measured ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectedEventValues {
    pub head: Phase,
    pub pre: Phase,
    pub cpre: Phase,
    pub rxtx: Phase,
    pub txrx: Phase,
    pub tra: Phase,
    pub post: Phase,
    pub tail: Phase,
    pub pretx: f64,
    pub prerx: f64,
    pub slave_first_prerx: f64,
    pub i_rx: f64,
    pub i_tx: f64,
    pub q_to: f64,
    pub bit: f64,
    pub i_sl: f64,
}

impl ConnectedEventValues {
    pub fn new(profile: &DeviceProfile, role: Role, tx_power_dbm: i32) -> Result<Self> {
        let t = profile.connected_for(role);
        Ok(ConnectedEventValues {
            head: (&t.head).into(),
            pre: (&t.pre).into(),
            cpre: (&t.cpre).into(),
            rxtx: (&t.rxtx).into(),
            txrx: (&t.txrx).into(),
            tra: (&t.tra).into(),
            post: (&t.post).into(),
            tail: (&t.tail).into(),
            pretx: t.pretx.avg,
            prerx: t.prerx.avg,
            slave_first_prerx: profile.slave_first_prerx,
            i_rx: t.rx_current.avg,
            i_tx: profile.tx_current(tx_power_dbm)?,
            q_to: t.to.avg,
            bit: profile.bit_duration,
            i_sl: profile.sleep_current,
        })
    }

    pub fn rx_duration(&self, bytes: u32, first_rx_of_slave_event: bool) -> f64 {
        let offset = if first_rx_of_slave_event {
            self.slave_first_prerx
        } else {
            self.prerx
        };
        f64::from(bytes) * BITS_PER_BYTE * self.bit + offset
    }

    pub fn tx_duration(&self, bytes: u32) -> f64 {
        self.pretx + f64::from(bytes) * BITS_PER_BYTE * self.bit
    }

    /// Phase timeline of a connection event in order of occurrence.
    ///
    /// A slave listens first; a master transmits first. The transition
    /// phases keep their positions, so both roles have the same phase count.
    pub fn connection_phases(
        &self,
        params: &ConnectionParams,
        exchange: &PacketExchange,
    ) -> Vec<PhaseSegment> {
        let seg = |phase, p: Phase| PhaseSegment {
            phase,
            duration: p.duration,
            current: p.current,
        };
        let n = exchange.n_seq();
        let mut out = Vec::with_capacity(8 + 4 * n);
        out.push(seg(ConnectedPhase::Head, self.head));
        out.push(seg(ConnectedPhase::Pre, self.pre));
        out.push(seg(ConnectedPhase::Cpre, self.cpre));
        out.push(PhaseSegment {
            phase: ConnectedPhase::Ww,
            duration: window_widening(params),
            current: self.i_rx,
        });
        for (i, pair) in exchange.pairs().iter().enumerate() {
            let rx = PhaseSegment {
                phase: ConnectedPhase::Rx,
                duration: self.rx_duration(pair.rx_bytes, i == 0 && params.role == Role::Slave),
                current: self.i_rx,
            };
            let tx = PhaseSegment {
                phase: ConnectedPhase::Tx,
                duration: self.tx_duration(pair.tx_bytes),
                current: self.i_tx,
            };
            let (first, second) = match params.role {
                Role::Slave => (rx, tx),
                Role::Master => (tx, rx),
            };
            out.push(first);
            out.push(seg(ConnectedPhase::Rxtx, self.rxtx));
            out.push(second);
            if i + 1 < n {
                out.push(seg(ConnectedPhase::Txrx, self.txrx));
            }
        }
        out.push(seg(ConnectedPhase::Tra, self.tra));
        out.push(seg(ConnectedPhase::Post, self.post));
        out.push(seg(ConnectedPhase::Tail, self.tail));
        out
    }

    pub fn connection_event_cost(&self, params: &ConnectionParams, exchange: &PacketExchange) -> EventCost {
        let phases = self.connection_phases(params, exchange);
        let charge: f64 =
            phases.iter().map(PhaseSegment::charge).sum::<f64>() + exchange.n_seq() as f64 * self.q_to;
        let duration = phases.iter().map(|p| p.duration).sum();
        EventCost { charge, duration }
    }

    /// Charge of one connection interval: the event plus sleep until the next
    /// event.
    pub fn interval_charge(&self, params: &ConnectionParams, exchange: &PacketExchange) -> f64 {
        let ev = self.connection_event_cost(params, exchange);
        ev.charge + (params.t_c - ev.duration) * self.i_sl
    }
}

/// Widening of the slave's receive window (s); zero for a master.
pub fn window_widening(params: &ConnectionParams) -> f64 {
    match params.role {
        Role::Master => 0.0,
        Role::Slave => (params.sca_master_ppm + params.sca_slave_ppm) * params.t_c * params.n_sl_avg / 1e6,
    }
}

/// Duration of an rx phase receiving `n_rx` bytes.
pub fn rx_duration(profile: &DeviceProfile, n_rx: u32, first_rx_of_slave_event: bool) -> f64 {
    let offset = if first_rx_of_slave_event {
        profile.slave_first_prerx
    } else {
        profile.connected.prerx.avg
    };
    f64::from(n_rx) * BITS_PER_BYTE * profile.bit_duration + offset
}

/// Duration of a tx phase sending `n_tx` bytes.
pub fn tx_duration(profile: &DeviceProfile, n_tx: u32) -> f64 {
    profile.connected.pretx.avg + f64::from(n_tx) * BITS_PER_BYTE * profile.bit_duration
}

pub fn connection_event_cost(
    profile: &DeviceProfile,
    params: &ConnectionParams,
    exchange: &PacketExchange,
) -> Result<EventCost> {
    params.validate()?;
    let values = ConnectedEventValues::new(profile, params.role, params.tx_power_dbm)?;
    Ok(values.connection_event_cost(params, exchange))
}

/// Shape of one advertising event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdvEventSpec {
    /// Number of advertising channels used before the event ends (1..=3).
    pub channels_used: u8,
    /// Whether a response is received after the last packet.
    pub got_response: bool,
    pub response_bytes: u32,
    pub adv_payload_bytes: u32,
    pub tx_power_dbm: i32,
}

impl AdvEventSpec {
    pub const DEFAULT_ADV_BYTES: u32 = 37;
    pub const DEFAULT_RESPONSE_BYTES: u32 = 44;

    /// A full three-channel event without a response.
    pub fn full(tx_power_dbm: i32) -> Self {
        AdvEventSpec {
            channels_used: 3,
            got_response: false,
            response_bytes: 0,
            adv_payload_bytes: Self::DEFAULT_ADV_BYTES,
            tx_power_dbm,
        }
    }

    /// The last event of a discovery, received on `channel` (37, 38 or 39).
    ///
    /// A reception on 39 is treated as a full event since the advertiser
    /// finishes its channel sequence anyway.
    pub fn success_on(channel: u8, tx_power_dbm: i32) -> Result<Self> {
        match channel {
            37 | 38 => Ok(AdvEventSpec {
                channels_used: channel - 36,
                got_response: true,
                response_bytes: Self::DEFAULT_RESPONSE_BYTES,
                adv_payload_bytes: Self::DEFAULT_ADV_BYTES,
                tx_power_dbm,
            }),
            39 => Ok(Self::full(tx_power_dbm)),
            other => Err(Error::out_of_range(
                "channel",
                format!("{other} is not an advertising channel"),
            )),
        }
    }
}

/// Phase timeline of an advertising event.
///
/// Each used channel occupies one packet slot of `adv_packet_duration`: the
/// transmission itself followed by listening for the rest of the slot.
/// Consecutive slots are separated by the channel change.
pub fn advertising_event_phases(profile: &DeviceProfile, spec: &AdvEventSpec) -> Result<Vec<PhaseSegment>> {
    if !(1..=3).contains(&spec.channels_used) {
        return Err(Error::out_of_range(
            "channels_used",
            format!("{} not in 1..=3", spec.channels_used),
        ));
    }
    let v = ConnectedEventValues::new(profile, Role::Master, spec.tx_power_dbm)?;
    let seg = |phase, p: Phase| PhaseSegment {
        phase,
        duration: p.duration,
        current: p.current,
    };
    let d_tx = v.tx_duration(spec.adv_payload_bytes);
    let listen = (profile.adv_packet_duration - d_tx).max(0.0);
    let mut out = vec![
        seg(ConnectedPhase::Head, v.head),
        seg(ConnectedPhase::Pre, v.pre),
        seg(ConnectedPhase::Cpre, v.cpre),
    ];
    for ch in 0..spec.channels_used {
        if ch > 0 {
            out.push(PhaseSegment {
                phase: ConnectedPhase::Txrx,
                duration: profile.channel_change,
                current: v.txrx.current,
            });
        }
        out.push(PhaseSegment {
            phase: ConnectedPhase::Tx,
            duration: d_tx,
            current: v.i_tx,
        });
        out.push(PhaseSegment {
            phase: ConnectedPhase::Rx,
            duration: listen,
            current: v.i_rx,
        });
    }
    if spec.got_response {
        out.push(PhaseSegment {
            phase: ConnectedPhase::Rx,
            duration: v.rx_duration(spec.response_bytes, false),
            current: v.i_rx,
        });
    }
    out.push(seg(ConnectedPhase::Tra, v.tra));
    out.push(seg(ConnectedPhase::Post, v.post));
    out.push(seg(ConnectedPhase::Tail, v.tail));
    Ok(out)
}

pub fn advertising_event_cost(profile: &DeviceProfile, spec: &AdvEventSpec) -> Result<EventCost> {
    let phases = advertising_event_phases(profile, spec)?;
    Ok(EventCost {
        charge: phases.iter().map(PhaseSegment::charge).sum(),
        duration: phases.iter().map(|p| p.duration).sum(),
    })
}

/// Kind of scan event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanMode {
    /// Receives one advertising packet, sends a scan request and receives the
    /// scan response.
    ActiveWithResponse,
    /// Listens only.
    PassiveOrIdle,
    /// Receives an advertising packet and answers with a connection request.
    ConnectRequest,
    /// One scan window of continuous scanning followed by a channel change.
    ContinuousSegment,
}

impl ScanMode {
    pub fn name(self) -> &'static str {
        match self {
            ScanMode::ActiveWithResponse => "active",
            ScanMode::PassiveOrIdle => "idle",
            ScanMode::ConnectRequest => "connect-request",
            ScanMode::ContinuousSegment => "continuous",
        }
    }
}

/// Charge and duration of one scan event with scan window `d_s`.
///
/// `n_tx` is the size of the scan or connection request, `n_rx` the size of
/// the scan response. For [`ScanMode::ConnectRequest`], `d_s` is the scan time
/// up to the end of the received advertising packet.
pub fn scan_event_cost(
    profile: &DeviceProfile,
    mode: ScanMode,
    d_s: f64,
    n_tx: u32,
    n_rx: u32,
) -> Result<EventCost> {
    if !(d_s > 0.0 && d_s.is_finite()) {
        return Err(Error::out_of_range("d_s", format!("{d_s} s must be > 0")));
    }
    let s = &profile.scan;
    let i_rx = s.rx_current.avg;
    let byte = BITS_PER_BYTE * profile.bit_duration;
    let d_tx = s.pretx.avg + f64::from(n_tx) * byte;
    let q_tx = d_tx * s.tx_current.avg;

    let cost = match mode {
        ScanMode::PassiveOrIdle => {
            let (pre, post) = (s.idle_pre(), s.idle_post());
            EventCost {
                charge: pre.charge() + post.charge() + d_s * i_rx,
                duration: pre.duration.avg + d_s + post.duration.avg,
            }
        }
        ScanMode::ContinuousSegment => EventCost {
            charge: d_s * i_rx + s.chch.charge(),
            duration: d_s + s.chch.duration.avg,
        },
        ScanMode::ActiveWithResponse => {
            let d_rxsr = s.prerx.avg + f64::from(n_rx) * byte;
            let d_scan =
                d_s - s.rxtx.duration.avg - d_tx - s.txrx.duration.avg - d_rxsr - s.rxrx.duration.avg;
            if d_scan < 0.0 {
                return Err(Error::Precondition(format!(
                    "scan window {d_s} s is shorter than the active scan sequence ({} s)",
                    d_s - d_scan
                )));
            }
            EventCost {
                charge: s.pre.charge()
                    + d_scan * i_rx
                    + s.rxtx.charge()
                    + q_tx
                    + s.txrx.charge()
                    + d_rxsr * s.rxsr_current.avg
                    + s.rxrx.charge()
                    + s.post.charge()
                    + s.crx.avg
                    + s.ctx.avg,
                duration: s.pre.duration.avg + d_s + s.post.duration.avg,
            }
        }
        ScanMode::ConnectRequest => EventCost {
            charge: s.pre.charge() + d_s * i_rx + q_tx + s.txrx.charge() + s.post.charge() + s.ctx.avg,
            duration: s.pre.duration.avg + d_s + d_tx + s.txrx.duration.avg + s.post.duration.avg,
        },
    };
    Ok(cost)
}

/// Connection establishment or connection parameter update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetupKind {
    Establish,
    Update,
}

impl SetupKind {
    pub fn name(self) -> &'static str {
        match self {
            SetupKind::Establish => "establish",
            SetupKind::Update => "update",
        }
    }
}

/// Timing of a connection establishment or update (all in seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnSetupParams {
    /// Transmit window size.
    pub d_tw: f64,
    /// Transmit window offset.
    pub d_two: f64,
    /// Offset of the master's first packet inside the transmit window.
    pub d_p: f64,
    /// Connection interval before the update; unused for establishment.
    pub t_c_old: f64,
    pub t_c_new: f64,
}

impl ConnSetupParams {
    /// Transmit window size observed on the BLE112.
    pub const BLE112_D_TW: f64 = 3e-3;

    /// BLE112 stack behaviour: fixed 3 ms window, first packet in its middle,
    /// fitted offset for establishment and zero offset for updates.
    pub fn typical_ble112(kind: SetupKind, t_c_new: f64, t_c_old: f64) -> Result<Self> {
        let d_two = match kind {
            SetupKind::Establish => estimate_d_two_ble112(t_c_new)?,
            SetupKind::Update => 0.0,
        };
        let p = ConnSetupParams {
            d_tw: Self::BLE112_D_TW,
            d_two,
            d_p: Self::BLE112_D_TW / 2.0,
            t_c_old,
            t_c_new,
        };
        p.validate()?;
        Ok(p)
    }

    /// Largest legal window offset and packet offset for `t_c_new`.
    pub fn worst_case(t_c_new: f64, t_c_old: f64) -> Self {
        let d_p = (10e-3_f64).min(t_c_new - SLOT);
        ConnSetupParams {
            d_tw: d_p,
            d_two: t_c_new,
            d_p,
            t_c_old,
            t_c_new,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(T_C_MIN..=T_C_MAX).contains(&self.t_c_new) {
            return Err(Error::out_of_range(
                "t_c_new",
                format!("{} s not in [0.0075, 4.0] s", self.t_c_new),
            ));
        }
        let upper = (10e-3_f64).min(self.t_c_new - SLOT);
        if !(self.d_tw > SLOT && self.d_tw < upper) {
            return Err(Error::out_of_range(
                "d_tw",
                format!("{} s not in (0.00125, {upper}) s", self.d_tw),
            ));
        }
        if !(self.d_p >= 0.0 && self.d_p < self.d_tw) {
            return Err(Error::out_of_range(
                "d_p",
                format!("{} s not in [0, d_tw = {}) s", self.d_p, self.d_tw),
            ));
        }
        if !(self.d_two >= 0.0 && self.d_two.is_finite()) {
            return Err(Error::out_of_range("d_two", "must be >= 0"));
        }
        if !(self.t_c_old >= 0.0 && self.t_c_old.is_finite()) {
            return Err(Error::out_of_range("t_c_old", "must be >= 0"));
        }
        Ok(())
    }
}

/// Window widening of the slave during establishment or update (s).
pub fn setup_window_widening(profile: &DeviceProfile, setup: &ConnSetupParams, kind: SetupKind) -> f64 {
    let sca_sum = 2.0 * profile.sca_ppm;
    let span = match kind {
        SetupKind::Establish => SLOT + setup.d_two,
        SetupKind::Update => setup.t_c_old + setup.d_two,
    };
    sca_sum / 1e6 * span
}

/// Cost of a connection establishment or update, without the event that
/// carries the request. That event is accounted for by the discovery model.
pub fn connection_setup_cost(
    profile: &DeviceProfile,
    setup: &ConnSetupParams,
    kind: SetupKind,
    role: Role,
) -> Result<EventCost> {
    connection_setup_cost_with_event(profile, setup, kind, role, EventCost::ZERO)
}

/// Like [`connection_setup_cost`], including the cost of the request event.
pub fn connection_setup_cost_with_event(
    profile: &DeviceProfile,
    setup: &ConnSetupParams,
    kind: SetupKind,
    role: Role,
    embedded: EventCost,
) -> Result<EventCost> {
    setup.validate()?;
    Ok(setup_cost(profile, setup, kind, role, embedded))
}

/// Upper bound of the setup cost over all stack choices of window size and
/// offsets.
pub fn connection_setup_cost_worst_case(
    profile: &DeviceProfile,
    t_c_new: f64,
    t_c_old: f64,
    kind: SetupKind,
    role: Role,
) -> Result<EventCost> {
    connection_setup_cost_worst_case_with_event(profile, t_c_new, t_c_old, kind, role, EventCost::ZERO)
}

/// Like [`connection_setup_cost_worst_case`], including the cost of the
/// request event.
pub fn connection_setup_cost_worst_case_with_event(
    profile: &DeviceProfile,
    t_c_new: f64,
    t_c_old: f64,
    kind: SetupKind,
    role: Role,
    embedded: EventCost,
) -> Result<EventCost> {
    if !(T_C_MIN..=T_C_MAX).contains(&t_c_new) {
        return Err(Error::out_of_range(
            "t_c_new",
            format!("{t_c_new} s not in [0.0075, 4.0] s"),
        ));
    }
    if !(t_c_old >= 0.0 && t_c_old.is_finite()) {
        return Err(Error::out_of_range("t_c_old", "must be >= 0"));
    }
    let setup = ConnSetupParams::worst_case(t_c_new, t_c_old);
    Ok(setup_cost(profile, &setup, kind, role, embedded))
}

fn setup_cost(
    profile: &DeviceProfile,
    setup: &ConnSetupParams,
    kind: SetupKind,
    role: Role,
    ev: EventCost,
) -> EventCost {
    let i_sl = profile.sleep_current;
    let i_rx = profile.connected_for(role).rx_current.avg;
    let d_ww = setup_window_widening(profile, setup, kind);
    let charge = match (kind, role) {
        (SetupKind::Establish, Role::Master) => ev.charge + (SLOT + setup.d_two + setup.d_p) * i_sl,
        (SetupKind::Update, Role::Master) => {
            ev.charge + (setup.t_c_old + setup.d_two + setup.d_p - ev.duration) * i_sl
        }
        (SetupKind::Establish, Role::Slave) => {
            ev.charge + (setup.d_two + SLOT - d_ww) * i_sl + (setup.d_p + d_ww) * i_rx
        }
        (SetupKind::Update, Role::Slave) => {
            ev.charge + (setup.t_c_old + setup.d_two - d_ww - ev.duration) * i_sl + (setup.d_p + d_ww) * i_rx
        }
    };
    let duration = match kind {
        SetupKind::Establish => ev.duration + SLOT + setup.d_two + setup.d_p,
        SetupKind::Update => setup.t_c_old + setup.d_two + setup.d_p,
    };
    EventCost { charge, duration }
}

/// The event carrying a connection request or update.
///
/// Establishment: an advertising event on one channel with a 37-byte packet
/// answered by a 44-byte connection request. Update: a connection event in
/// which the master sends a 22-byte update packet.
pub fn embedded_setup_event(
    profile: &DeviceProfile,
    kind: SetupKind,
    role: Role,
    tx_power_dbm: i32,
) -> Result<EventCost> {
    match kind {
        SetupKind::Establish => advertising_event_cost(
            profile,
            &AdvEventSpec {
                channels_used: 1,
                got_response: true,
                response_bytes: AdvEventSpec::DEFAULT_RESPONSE_BYTES,
                adv_payload_bytes: AdvEventSpec::DEFAULT_ADV_BYTES,
                tx_power_dbm,
            },
        ),
        SetupKind::Update => {
            let exchange = match role {
                Role::Master => PacketExchange::uniform(1, 0, 22)?,
                Role::Slave => PacketExchange::uniform(1, 22, 0)?,
            };
            let params = ConnectionParams::new(T_C_MIN, role, profile).with_tx_power(tx_power_dbm);
            let values = ConnectedEventValues::new(profile, role, tx_power_dbm)?;
            Ok(values.connection_event_cost(&params, &exchange))
        }
    }
}

/// Transmit window offset chosen by the BLE112 stack when establishing a
/// connection with interval `t_c` (s).
pub fn estimate_d_two_ble112(t_c: f64) -> Result<f64> {
    if t_c > 12.5e-3 {
        Ok(t_c - 6.454e-3)
    } else if t_c > 7.25e-3 {
        Ok(0.389 * t_c + 0.484e-3)
    } else {
        Err(Error::out_of_range(
            "t_c",
            format!("{t_c} s; the fit needs t_c > 0.00725 s"),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ble() -> DeviceProfile {
        DeviceProfile::ble112()
    }

    #[test]
    fn window_widening_values() {
        let p = ble();
        let params = ConnectionParams::new(0.1, Role::Slave, &p).with_slave_latency(1.0);
        assert_relative_eq!(window_widening(&params), 10e-6, max_relative = 1e-12);
        let master = ConnectionParams {
            role: Role::Master,
            ..params
        };
        assert_eq!(window_widening(&master), 0.0);
        assert_eq!(window_widening(&params.with_slave_latency(0.0)), 0.0);
    }

    #[test]
    fn rx_tx_durations() {
        let p = ble();
        assert_relative_eq!(rx_duration(&p, 10, false), 203e-6, max_relative = 1e-12);
        assert_relative_eq!(rx_duration(&p, 0, false), 123e-6, max_relative = 1e-12);
        assert_relative_eq!(rx_duration(&p, 10, true), 468e-6, max_relative = 1e-12);
        assert_relative_eq!(tx_duration(&p, 10), 133e-6, max_relative = 1e-12);
        assert_relative_eq!(tx_duration(&p, 0), 53e-6, max_relative = 1e-12);
        assert_relative_eq!(tx_duration(&p, 37), 349e-6, max_relative = 1e-12);
    }

    #[test]
    fn more_pairs_cost_more() {
        let p = ble();
        let params = ConnectionParams::new(0.1, Role::Slave, &p);
        let one = connection_event_cost(&p, &params, &PacketExchange::uniform(1, 10, 10).unwrap()).unwrap();
        let two = connection_event_cost(&p, &params, &PacketExchange::uniform(2, 10, 10).unwrap()).unwrap();
        assert!(two.charge > one.charge);
        assert!(two.duration > one.duration);
    }

    #[test]
    fn slave_latency_adds_ww_charge_only() {
        let p = ble();
        let ex = PacketExchange::uniform(1, 10, 27).unwrap();
        let a = ConnectionParams::new(0.1, Role::Slave, &p);
        let b = a.with_slave_latency(1.0);
        let qa = connection_event_cost(&p, &a, &ex).unwrap();
        let qb = connection_event_cost(&p, &b, &ex).unwrap();
        let d_ww = window_widening(&b);
        assert_relative_eq!(
            qb.charge - qa.charge,
            d_ww * p.connected.rx_current.avg,
            max_relative = 1e-9
        );
    }

    #[test]
    fn role_symmetry_of_phase_lists() {
        let p = ble();
        let ex = PacketExchange::new(vec![
            PacketPair {
                rx_bytes: 3,
                tx_bytes: 20,
            },
            PacketPair {
                rx_bytes: 0,
                tx_bytes: 7,
            },
        ])
        .unwrap();
        let sl = ConnectionParams::new(0.1, Role::Slave, &p).with_slave_latency(2.0);
        let ma = ConnectionParams {
            role: Role::Master,
            ..sl
        };
        let v_sl = ConnectedEventValues::new(&p, Role::Slave, 3).unwrap();
        let v_ma = ConnectedEventValues::new(&p, Role::Master, 3).unwrap();
        let s = v_sl.connection_phases(&sl, &ex);
        let m = v_ma.connection_phases(&ma, &ex);
        assert_eq!(s.len(), m.len());
        let kinds = |v: &[PhaseSegment]| v.iter().map(|p| p.phase).collect::<Vec<_>>();
        assert_eq!(&kinds(&s)[..4], &kinds(&m)[..4]);
        assert_eq!(kinds(&s)[4], ConnectedPhase::Rx);
        assert_eq!(kinds(&m)[4], ConnectedPhase::Tx);
        assert_eq!(m[3].duration, 0.0);
        assert!(s[3].duration > 0.0);
    }

    #[test]
    fn unknown_tx_power_propagates() {
        let p = ble();
        let params = ConnectionParams::new(0.1, Role::Slave, &p).with_tx_power(7);
        let err = connection_event_cost(&p, &params, &PacketExchange::uniform(1, 0, 0).unwrap());
        assert!(matches!(err, Err(Error::UnknownTxPower { .. })));
    }

    #[test]
    fn connection_interval_range_is_checked() {
        let p = ble();
        let ex = PacketExchange::uniform(1, 0, 0).unwrap();
        for t_c in [0.005, 4.5] {
            let params = ConnectionParams::new(t_c, Role::Master, &p);
            assert!(matches!(
                connection_event_cost(&p, &params, &ex),
                Err(Error::OutOfRange { name: "t_c", .. })
            ));
        }
        assert!(PacketExchange::new(vec![]).is_err());
    }

    #[test]
    fn advertising_event_structure() {
        let p = ble();
        let full = advertising_event_cost(&p, &AdvEventSpec::full(3)).unwrap();
        let fixed = p.connected.head.duration.avg
            + p.connected.pre.duration.avg
            + p.connected.cpre.duration.avg
            + p.connected.tra.duration.avg
            + p.connected.post.duration.avg
            + p.connected.tail.duration.avg;
        let air = 3.0 * p.adv_packet_duration + 2.0 * p.channel_change;
        assert_relative_eq!(full.duration, fixed + air, max_relative = 1e-12);

        let c37 = advertising_event_cost(&p, &AdvEventSpec::success_on(37, 3).unwrap()).unwrap();
        let c38 = advertising_event_cost(&p, &AdvEventSpec::success_on(38, 3).unwrap()).unwrap();
        let c39 = advertising_event_cost(&p, &AdvEventSpec::success_on(39, 3).unwrap()).unwrap();
        assert!(c37.charge < c38.charge && c38.charge < c39.charge);
        assert!(c37.duration < c38.duration && c38.duration < c39.duration);

        let spec = AdvEventSpec {
            channels_used: 1,
            ..AdvEventSpec::full(3)
        };
        let phases = advertising_event_phases(&p, &spec).unwrap();
        assert_eq!(phases.iter().filter(|s| s.phase == ConnectedPhase::Tx).count(), 1);
        let spec = AdvEventSpec {
            channels_used: 4,
            ..spec
        };
        assert!(advertising_event_cost(&p, &spec).is_err());
    }

    #[test]
    fn idle_scan_event() {
        let p = ble();
        let c = scan_event_cost(&p, ScanMode::PassiveOrIdle, 10e-3, 0, 0).unwrap();
        let expected = 0.700e-3 * 7.087e-3 + 0.816e-3 * 8.012e-3 + 10e-3 * 26.399e-3;
        assert_relative_eq!(c.charge, expected, max_relative = 1e-12);
    }

    #[test]
    fn continuous_scan_segment() {
        let p = ble();
        let c = scan_event_cost(&p, ScanMode::ContinuousSegment, 1.0, 0, 0).unwrap();
        assert_relative_eq!(c.charge, 26.399e-3 + 1.325e-3 * 8.550e-3, max_relative = 1e-12);
    }

    #[test]
    fn active_scan_boundary() {
        let p = ble();
        let s = &p.scan;
        let (n_tx, n_rx) = (12, 31);
        let min = s.rxtx.duration.avg
            + s.pretx.avg
            + 8e-6 * n_tx as f64
            + s.txrx.duration.avg
            + s.prerx.avg
            + 8e-6 * n_rx as f64
            + s.rxrx.duration.avg;
        let at_min =
            scan_event_cost(&p, ScanMode::ActiveWithResponse, min * (1.0 + 1e-12), n_tx, n_rx).unwrap();
        let handshake = s.pre.charge()
            + s.rxtx.charge()
            + (s.pretx.avg + 8e-6 * n_tx as f64) * s.tx_current.avg
            + s.txrx.charge()
            + (s.prerx.avg + 8e-6 * n_rx as f64) * s.rxsr_current.avg
            + s.rxrx.charge()
            + s.post.charge()
            + s.crx.avg
            + s.ctx.avg;
        assert_relative_eq!(at_min.charge, handshake, max_relative = 1e-9);
        assert!(matches!(
            scan_event_cost(&p, ScanMode::ActiveWithResponse, min * 0.99, n_tx, n_rx),
            Err(Error::Precondition(_))
        ));
        assert!(scan_event_cost(&p, ScanMode::PassiveOrIdle, 0.0, 0, 0).is_err());
    }

    #[test]
    fn connect_request_drops_response_phases() {
        let p = ble();
        let active = scan_event_cost(&p, ScanMode::ActiveWithResponse, 20e-3, 12, 31).unwrap();
        let conn = scan_event_cost(&p, ScanMode::ConnectRequest, 20e-3, 12, 31).unwrap();
        let s = &p.scan;
        let expected = s.pre.charge()
            + 20e-3 * s.rx_current.avg
            + (s.pretx.avg + 96e-6) * s.tx_current.avg
            + s.txrx.charge()
            + s.post.charge()
            + s.ctx.avg;
        assert_relative_eq!(conn.charge, expected, max_relative = 1e-12);
        assert!(conn.charge > active.charge - 20e-3 * s.rx_current.avg);
    }

    #[test]
    fn master_establish_with_zero_event() {
        let p = ble();
        let setup = ConnSetupParams {
            d_tw: 3e-3,
            d_two: 50e-3,
            d_p: 1.5e-3,
            t_c_old: 0.0,
            t_c_new: 0.1,
        };
        let c = connection_setup_cost(&p, &setup, SetupKind::Establish, Role::Master).unwrap();
        assert_relative_eq!(c.charge, 47.475e-9, max_relative = 1e-12);
        assert_relative_eq!(
            setup_window_widening(&p, &setup, SetupKind::Establish),
            5.125e-6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn slave_update_hand_evaluation() {
        let p = ble();
        let setup = ConnSetupParams {
            d_tw: 3e-3,
            d_two: 0.0,
            d_p: 1.5e-3,
            t_c_old: 0.1,
            t_c_new: 0.05,
        };
        let d_ww = setup_window_widening(&p, &setup, SetupKind::Update);
        assert_relative_eq!(d_ww, 10e-6, max_relative = 1e-12);
        let c = connection_setup_cost(&p, &setup, SetupKind::Update, Role::Slave).unwrap();
        let expected = (0.1 - 10e-6) * 0.9e-6 + (1.5e-3 + 10e-6) * 26.505e-3;
        assert_relative_eq!(c.charge, expected, max_relative = 1e-12);
    }

    #[test]
    fn zero_update_costs_nothing() {
        let p = ble();
        let setup = ConnSetupParams {
            d_tw: 3e-3,
            d_two: 0.0,
            d_p: 0.0,
            t_c_old: 0.0,
            t_c_new: 0.05,
        };
        for role in [Role::Master, Role::Slave] {
            let c = connection_setup_cost(&p, &setup, SetupKind::Update, role).unwrap();
            assert_eq!(c.charge, 0.0);
        }
    }

    #[test]
    fn setup_parameters_are_validated() {
        let p = ble();
        let base = ConnSetupParams {
            d_tw: 3e-3,
            d_two: 0.0,
            d_p: 1.0e-3,
            t_c_old: 0.0,
            t_c_new: 0.05,
        };
        let bad = [
            ConnSetupParams {
                d_tw: 1.25e-3,
                ..base
            },
            ConnSetupParams { d_tw: 10e-3, ..base },
            ConnSetupParams { d_p: 3e-3, ..base },
            ConnSetupParams {
                t_c_new: 7.5e-3,
                d_tw: 6.25e-3,
                ..base
            },
        ];
        for s in bad {
            assert!(
                connection_setup_cost(&p, &s, SetupKind::Establish, Role::Slave).is_err(),
                "{s:?}"
            );
        }
    }

    #[test]
    fn worst_case_exceeds_typical() {
        let p = ble();
        for role in [Role::Master, Role::Slave] {
            let typ = ConnSetupParams::typical_ble112(SetupKind::Establish, 0.1, 0.0).unwrap();
            let t = connection_setup_cost(&p, &typ, SetupKind::Establish, role).unwrap();
            let w = connection_setup_cost_worst_case(&p, 0.1, 0.0, SetupKind::Establish, role).unwrap();
            assert!(w.charge >= t.charge);
        }
    }

    #[test]
    fn embedded_events_are_positive() {
        let p = ble();
        for kind in [SetupKind::Establish, SetupKind::Update] {
            for role in [Role::Master, Role::Slave] {
                let ev = embedded_setup_event(&p, kind, role, 0).unwrap();
                assert!(ev.charge > 0.0 && ev.duration > 0.0);
            }
        }
    }

    #[test]
    fn d_two_fit() {
        assert_relative_eq!(
            estimate_d_two_ble112(0.1).unwrap(),
            93.546e-3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            estimate_d_two_ble112(0.01).unwrap(),
            4.374e-3,
            max_relative = 1e-12
        );
        assert!(estimate_d_two_ble112(0.005).is_err());
    }
}
