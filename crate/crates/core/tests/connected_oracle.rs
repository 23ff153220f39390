//! Connection-event charge against a hand-expanded sum of the BLE112 table.

mod oracle;

use blemodel::{connection_event_cost, ConnectionParams, DeviceProfile, PacketExchange, PacketPair, Role};
use oracle::{oracle, rel};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn matches_hand_expanded_sum(
        t_c in 0.0075f64..4.0,
        n_sl in 0.0f64..20.0,
        slave in any::<bool>(),
        dbm in prop::sample::select(vec![3, 0, -6, -23]),
        pairs in prop::collection::vec((0u32..=47, 0u32..=47), 1..8),
    ) {
        let profile = DeviceProfile::ble112();
        let role = if slave { Role::Slave } else { Role::Master };
        let params = ConnectionParams::new(t_c, role, &profile)
            .with_slave_latency(n_sl)
            .with_tx_power(dbm);
        let exchange = PacketExchange::new(
            pairs.iter().map(|&(rx_bytes, tx_bytes)| PacketPair { rx_bytes, tx_bytes }).collect(),
        ).unwrap();
        let got = connection_event_cost(&profile, &params, &exchange).unwrap();
        let (q, d) = oracle(t_c, n_sl, role, dbm, &pairs);
        prop_assert!(rel(got.charge, q) < 1e-12, "charge {} vs {}", got.charge, q);
        prop_assert!(rel(got.duration, d) < 1e-12, "duration {} vs {}", got.duration, d);
    }
}

#[test]
fn single_empty_exchange_value() {
    // Slave, 100 ms interval, no latency, empty polling packets of 10 bytes.
    let profile = DeviceProfile::ble112();
    let params = ConnectionParams::new(0.1, Role::Slave, &profile);
    let exchange = PacketExchange::uniform(1, 10, 10).unwrap();
    let got = connection_event_cost(&profile, &params, &exchange).unwrap();
    let (q, _) = oracle(0.1, 0.0, Role::Slave, 3, &[(10, 10)]);
    assert!(rel(got.charge, q) < 1e-12);
    assert!((got.charge - 31.81e-6).abs() < 0.01e-6, "{}", got.charge);
}
