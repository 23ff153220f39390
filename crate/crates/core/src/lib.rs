//! Energy and neighbor-discovery latency model for Bluetooth Low Energy.
//!
//! All quantities are in SI base units: seconds, amperes and coulombs.
//!
//! ```
//! use blemodel::{connection_event_cost, ConnectionParams, DeviceProfile, PacketExchange, Role};
//!
//! let profile = DeviceProfile::ble112();
//! let params = ConnectionParams::new(0.1, Role::Slave, &profile);
//! let exchange = PacketExchange::uniform(1, 10, 27).unwrap();
//! let cost = connection_event_cost(&profile, &params, &exchange).unwrap();
//! assert!(cost.charge > 20e-6 && cost.charge < 40e-6);
//! ```

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod discovery;
pub mod error;
pub mod event;
pub mod profile;
pub mod sensitivity;
pub mod simulator;

pub use aggregate::{
    connected_event_count, connected_total_charge, connection_interval_charge, expected_advertiser_charge,
    expected_advertiser_charge_exact, expected_scanner_charge, AdvertiserEnergyInputs, ExactAdvertiserCharge,
    HorizonSpec,
};
pub use discovery::{
    bounded_max_latency, bounded_max_latency_with_jitter, channel_window, continuous_channel_probabilities,
    expected_discovery_latency, expected_discovery_latency_auto, expected_discovery_latency_bounded,
    expected_discovery_latency_continuous, hit_probability, rho_sum_cdf, select_method, AdvScanParams,
    AlgoConfig, Channel, ChannelWindow, DiscoveryEstimate, DiscoveryMethod, MethodChoice,
};
pub use error::{Error, Result};
pub use event::{
    advertising_event_cost, connection_event_cost, connection_setup_cost, connection_setup_cost_with_event,
    connection_setup_cost_worst_case, connection_setup_cost_worst_case_with_event, embedded_setup_event,
    estimate_d_two_ble112, rx_duration, scan_event_cost, setup_window_widening, tx_duration, window_widening,
    AdvEventSpec, ConnSetupParams, ConnectedEventValues, ConnectedPhase, ConnectionParams, EventCost,
    PacketExchange, PacketPair, PhaseSegment, ScanMode, SetupKind,
};
pub use profile::{
    ConnectedPhaseTable, DeviceProfile, PhaseStats, Role, ScanPhaseTable, TimedPhase, TxPowerLevel,
    TxPowerTable,
};
pub use sensitivity::{
    current_sensitivity, duration_sensitivity, sensitivity_table, SensitivityKind, SensitivityReport,
};
pub use simulator::{
    advertiser_trial_charge, compensated_sum, interval_hit, packet_overlap_hit, simulate_discovery,
    simulate_discovery_charge, SimChargeSummary, SimConfig, SimResult, SimSummary, TrialOutcome,
};
