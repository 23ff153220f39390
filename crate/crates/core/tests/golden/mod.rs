//! Measured BLE112 reference tables, typed in independently of the bundled
//! profile, and a cell-by-cell comparison.

use blemodel::{DeviceProfile, PhaseStats};

type Row = [f64; 4];

// Connected mode: durations in ms, currents in mA, charges in µC.
const CONNECTED: &[(&str, Option<Row>, Option<Row>)] = &[
    (
        "head",
        Some([0.578, 0.500, 0.640, 0.012]),
        Some([5.924, 5.558, 6.165, 0.085]),
    ),
    (
        "pre",
        Some([0.305, 0.010, 0.450, 0.109]),
        Some([7.691, 5.570, 7.997, 0.153]),
    ),
    ("rx", None, Some([26.505, 25.967, 27.676, 0.302])),
    (
        "rxtx",
        Some([0.080, 0.060, 0.100, 0.004]),
        Some([14.128, 13.793, 14.653, 0.115]),
    ),
    ("tx", None, Some([36.445, 35.571, 38.763, 0.559])),
    ("pretx", Some([0.053, 0.014, 0.084, 0.018]), None),
    (
        "txrx",
        Some([0.057, 0.040, 0.070, 0.005]),
        Some([15.125, 14.605, 16.048, 0.198]),
    ),
    (
        "cpre",
        Some([0.073, 0.050, 0.080, 0.004]),
        Some([12.238, 11.633, 13.006, 0.200]),
    ),
    ("prerx", Some([0.123, 0.110, 0.140, 0.005]), None),
    (
        "tra",
        Some([0.066, 0.040, 0.090, 0.011]),
        Some([11.636, 8.964, 14.721, 1.416]),
    ),
    (
        "post",
        Some([0.860, 0.610, 1.110, 0.101]),
        Some([7.980, 7.919, 8.221, 0.065]),
    ),
    (
        "tail",
        Some([0.080, 0.060, 0.340, 0.013]),
        Some([4.129, 3.088, 6.995, 0.380]),
    ),
];
const CONNECTED_TO: Row = [-1.2, -1.8, -0.8, 0.2];

// Scan mode: durations in ms except the standard deviation in µs.
const SCAN: &[(&str, Option<Row>, Option<Row>)] = &[
    (
        "pre_s",
        Some([0.700, 0.680, 0.730, 10.0]),
        Some([7.087, 6.924, 7.253, 0.065]),
    ),
    ("rx_s", None, Some([26.399, 26.042, 26.480, 0.043])),
    (
        "rxtx_s",
        Some([0.115, 0.110, 0.120, 0.498]),
        Some([15.011, 14.617, 15.519, 0.288]),
    ),
    ("tx_s", None, Some([35.999, 35.650, 36.488, 0.247])),
    ("pretx_s", Some([0.014, 4e-3, 0.024, 1.184]), None),
    (
        "txrx_s",
        Some([0.089, 0.080, 0.090, 2.332]),
        Some([16.670, 15.875, 17.224, 0.244]),
    ),
    ("rxsr", None, Some([26.426, 26.279, 26.563, 0.058])),
    ("prerx_s", Some([0.074, 0.068, 0.088, 2.45]), None),
    (
        "rxrx_s",
        Some([0.377, 0.370, 0.380, 4.488]),
        Some([9.633, 9.426, 9.768, 0.11]),
    ),
    (
        "post_s",
        Some([0.816, 0.710, 1.820, 246.0]),
        Some([8.012, 7.820, 8.138, 0.060]),
    ),
    (
        "chch_s",
        Some([1.325, 1.320, 1.330, 4.983]),
        Some([8.550, 8.470, 8.624, 0.042]),
    ),
];
const SCAN_CTX: Row = [-0.2264, -0.3244, -0.1456, 0.0143];
const SCAN_CRX: Row = [-0.1350, -0.1900, -0.0851, 0.0123];

const TX_POWER: &[(i32, f64)] = &[
    (3, 36.5),
    (2, 33.5),
    (0, 32.1),
    (-1, 31.5),
    (-2, 30.6),
    (-3, 30.1),
    (-5, 29.1),
    (-6, 28.8),
    (-8, 28.4),
    (-10, 28.1),
    (-12, 27.9),
    (-15, 27.7),
    (-17, 27.6),
    (-19, 27.5),
    (-21, 27.5),
    (-23, 26.3),
];

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn check(what: &str, got: PhaseStats, row: Row, scale: f64, std_scale: f64, mismatches: &mut Vec<String>) {
    let want = [row[0] / scale, row[1] / scale, row[2] / scale, row[3] / std_scale];
    let have = [got.avg, got.min, got.max, got.std];
    for (label, (h, w)) in ["avg", "min", "max", "std"].iter().zip(have.iter().zip(want)) {
        if !close(*h, w) {
            mismatches.push(format!("{what}.{label}: {h} != {w}"));
        }
    }
}

fn connected_stats(p: &DeviceProfile, name: &str) -> (Option<PhaseStats>, Option<PhaseStats>) {
    let t = &p.connected;
    match name {
        "head" => (Some(t.head.duration), Some(t.head.current)),
        "pre" => (Some(t.pre.duration), Some(t.pre.current)),
        "rx" => (None, Some(t.rx_current)),
        "rxtx" => (Some(t.rxtx.duration), Some(t.rxtx.current)),
        "tx" => (None, Some(t.tx_current)),
        "pretx" => (Some(t.pretx), None),
        "txrx" => (Some(t.txrx.duration), Some(t.txrx.current)),
        "cpre" => (Some(t.cpre.duration), Some(t.cpre.current)),
        "prerx" => (Some(t.prerx), None),
        "tra" => (Some(t.tra.duration), Some(t.tra.current)),
        "post" => (Some(t.post.duration), Some(t.post.current)),
        "tail" => (Some(t.tail.duration), Some(t.tail.current)),
        other => panic!("unknown phase {other}"),
    }
}

fn scan_stats(p: &DeviceProfile, name: &str) -> (Option<PhaseStats>, Option<PhaseStats>) {
    let t = &p.scan;
    match name {
        "pre_s" => (Some(t.pre.duration), Some(t.pre.current)),
        "rx_s" => (None, Some(t.rx_current)),
        "rxtx_s" => (Some(t.rxtx.duration), Some(t.rxtx.current)),
        "tx_s" => (None, Some(t.tx_current)),
        "pretx_s" => (Some(t.pretx), None),
        "txrx_s" => (Some(t.txrx.duration), Some(t.txrx.current)),
        "rxsr" => (None, Some(t.rxsr_current)),
        "prerx_s" => (Some(t.prerx), None),
        "rxrx_s" => (Some(t.rxrx.duration), Some(t.rxrx.current)),
        "post_s" => (Some(t.post.duration), Some(t.post.current)),
        "chch_s" => (Some(t.chch.duration), Some(t.chch.current)),
        other => panic!("unknown phase {other}"),
    }
}

/// Compares every cell; returns the number of cells checked and mismatches.
pub fn golden_diff(p: &DeviceProfile) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut cells = 0;
    for &(name, d, i) in CONNECTED {
        let (pd, pi) = connected_stats(p, name);
        for (kind, row, got, scale) in [("d", d, pd, 1e3), ("i", i, pi, 1e3)] {
            match (row, got) {
                (Some(row), Some(got)) => {
                    check(
                        &format!("connected.{name}.{kind}"),
                        got,
                        row,
                        scale,
                        scale,
                        &mut bad,
                    );
                    cells += 4;
                }
                (None, None) => {}
                _ => bad.push(format!("connected.{name}.{kind}: presence mismatch")),
            }
        }
    }
    check("connected.to.q", p.connected.to, CONNECTED_TO, 1e6, 1e6, &mut bad);
    cells += 4;
    for &(name, d, i) in SCAN {
        let (pd, pi) = scan_stats(p, name);
        for (kind, row, got, scale, std_scale) in [("d", d, pd, 1e3, 1e6), ("i", i, pi, 1e3, 1e3)] {
            match (row, got) {
                (Some(row), Some(got)) => {
                    check(
                        &format!("scan.{name}.{kind}"),
                        got,
                        row,
                        scale,
                        std_scale,
                        &mut bad,
                    );
                    cells += 4;
                }
                (None, None) => {}
                _ => bad.push(format!("scan.{name}.{kind}: presence mismatch")),
            }
        }
    }
    check("scan.ctx_s.q", p.scan.ctx, SCAN_CTX, 1e6, 1e6, &mut bad);
    check("scan.crx_s.q", p.scan.crx, SCAN_CRX, 1e6, 1e6, &mut bad);
    cells += 8;
    if p.tx_power.levels().len() != TX_POWER.len() {
        bad.push("tx_power: level count".into());
    }
    for &(dbm, ma) in TX_POWER {
        match p.tx_current(dbm) {
            Ok(i) if i == ma / 1e3 => {}
            Ok(i) => bad.push(format!("tx_power.{dbm}: {i} != {}", ma / 1e3)),
            Err(e) => bad.push(format!("tx_power.{dbm}: {e}")),
        }
        cells += 1;
    }
    for (what, got, want) in [
        ("sleep_current", p.sleep_current, 0.9e-6),
        ("sca_ppm", p.sca_ppm, 50.0),
        ("ifs", p.ifs, 150e-6),
        ("bit_duration", p.bit_duration, 1e-6),
        ("slave_first_prerx", p.slave_first_prerx, 388e-6),
    ] {
        if !close(got, want) {
            bad.push(format!("{what}: {got} != {want}"));
        }
        cells += 1;
    }
    (cells, bad)
}
