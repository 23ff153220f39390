use blemodel::{sensitivity_table, ConnectedPhase, DeviceProfile, SensitivityKind, SensitivityReport};

use crate::commands::connected::Scenario;
use crate::error::CliResult;
use crate::output::{num, Table};
use crate::SensitivityArgs;

pub const HEADER: [&str; 9] = [
    "phase",
    "kind",
    "sensitivity",
    "sensitivity_unit",
    "spread",
    "spread_unit",
    "delta_q_C",
    "q_total_C",
    "relative_change",
];

/// Reference examples: a 0.5 ms spread of an 8 mA post-processing phase
/// against 25 µC, and a 10 mA tx-current spread over 350 µs of transmission
/// against 29 µC.
pub fn worked_examples() -> [SensitivityReport; 2] {
    let (i_post, i_sl) = (8.0e-3, 0.0);
    [
        SensitivityReport::from_parts(
            ConnectedPhase::Post,
            SensitivityKind::Duration,
            i_post - i_sl,
            0.5e-3,
            25e-6,
        ),
        SensitivityReport::from_parts(ConnectedPhase::Tx, SensitivityKind::Current, 350e-6, 10e-3, 29e-6),
    ]
}

pub fn report_row(r: &SensitivityReport) -> Vec<String> {
    let (s_unit, spread_unit) = match r.kind {
        SensitivityKind::Duration => ("A", "s"),
        SensitivityKind::Current => ("s", "A"),
    };
    vec![
        r.phase.to_string(),
        r.kind.to_string(),
        num(r.s),
        s_unit.to_string(),
        num(r.spread),
        spread_unit.to_string(),
        num(r.delta_q),
        num(r.q_total),
        num(r.relative_change),
    ]
}

pub fn run(profile: &DeviceProfile, a: &SensitivityArgs) -> CliResult<Table> {
    let reports: Vec<SensitivityReport> = if a.worked_examples {
        worked_examples().to_vec()
    } else {
        let sc = Scenario::from_args(profile, &a.scenario);
        sensitivity_table(profile, &sc.params(profile), &sc.exchange()?)?
    };
    let mut table = Table::new(&HEADER);
    for r in &reports {
        table.push(report_row(r));
    }
    Ok(table)
}
