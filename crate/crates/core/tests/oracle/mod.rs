//! Connection-event charge and duration as a hand-expanded sum of the BLE112
//! table, independent of the library's phase model.

#![allow(dead_code)]

use blemodel::Role;

const MS: f64 = 1e-3;
const MA: f64 = 1e-3;

const HEAD: (f64, f64) = (0.578 * MS, 5.924 * MA);
const PRE: (f64, f64) = (0.305 * MS, 7.691 * MA);
const CPRE: (f64, f64) = (0.073 * MS, 12.238 * MA);
const RXTX: (f64, f64) = (0.080 * MS, 14.128 * MA);
const TXRX: (f64, f64) = (0.057 * MS, 15.125 * MA);
const TRA: (f64, f64) = (0.066 * MS, 11.636 * MA);
const POST: (f64, f64) = (0.860 * MS, 7.980 * MA);
const TAIL: (f64, f64) = (0.080 * MS, 4.129 * MA);
const I_RX: f64 = 26.505 * MA;
const PRETX: f64 = 0.053 * MS;
const PRERX: f64 = 0.123 * MS;
const PRERX_SLAVE_FIRST: f64 = 0.388 * MS;
const Q_TO: f64 = -1.2e-6;
const SCA: f64 = 50.0;

fn tx_ma(dbm: i32) -> f64 {
    match dbm {
        3 => 36.5,
        0 => 32.1,
        -6 => 28.8,
        -23 => 26.3,
        _ => unreachable!(),
    }
}

pub fn oracle(t_c: f64, n_sl: f64, role: Role, dbm: i32, pairs: &[(u32, u32)]) -> (f64, f64) {
    let i_tx = tx_ma(dbm) * MA;
    let ww = if role == Role::Slave {
        2.0 * SCA * t_c * n_sl / 1e6
    } else {
        0.0
    };
    let mut q = HEAD.0 * HEAD.1 + PRE.0 * PRE.1 + CPRE.0 * CPRE.1 + ww * I_RX;
    let mut d = HEAD.0 + PRE.0 + CPRE.0 + ww;
    for (k, &(rx, tx)) in pairs.iter().enumerate() {
        let first = if k == 0 && role == Role::Slave {
            PRERX_SLAVE_FIRST
        } else {
            PRERX
        };
        let d_rx = rx as f64 * 8e-6 + first;
        let d_tx = PRETX + tx as f64 * 8e-6;
        q += d_rx * I_RX + d_tx * i_tx + RXTX.0 * RXTX.1 + TXRX.0 * TXRX.1 + Q_TO;
        d += d_rx + d_tx + RXTX.0 + TXRX.0;
    }
    q -= TXRX.0 * TXRX.1;
    d -= TXRX.0;
    q += TRA.0 * TRA.1 + POST.0 * POST.1 + TAIL.0 * TAIL.1;
    d += TRA.0 + POST.0 + TAIL.0;
    (q, d)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
