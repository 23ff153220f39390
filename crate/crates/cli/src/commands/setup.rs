use blemodel::{
    connection_setup_cost_with_event, connection_setup_cost_worst_case_with_event, embedded_setup_event,
    setup_window_widening, ConnSetupParams, DeviceProfile, EventCost, Role, SetupKind,
};

use crate::error::CliResult;
use crate::output::{flag, num, Table};
use crate::{SetupArgs, SetupKindArg, SetupModeArg};

pub const HEADER: [&str; 13] = [
    "kind",
    "role",
    "mode",
    "t_c_new_s",
    "t_c_old_s",
    "d_tw_s",
    "d_two_s",
    "d_p_s",
    "window_widening_s",
    "includes_request_event",
    "request_event_charge_C",
    "charge_C",
    "duration_s",
];

pub fn run(profile: &DeviceProfile, a: &SetupArgs) -> CliResult<Table> {
    let kind = match a.kind {
        SetupKindArg::Establish => SetupKind::Establish,
        SetupKindArg::Update => SetupKind::Update,
    };
    let role: Role = a.role.into();
    let base = match a.mode {
        SetupModeArg::Typical => ConnSetupParams::typical_ble112(kind, a.tc_new, a.tc_old)?,
        SetupModeArg::Worst => ConnSetupParams::worst_case(a.tc_new, a.tc_old),
    };
    let setup = ConnSetupParams {
        d_tw: a.d_tw.unwrap_or(base.d_tw),
        d_two: a.d_two.unwrap_or(base.d_two),
        d_p: a.d_p.unwrap_or(base.d_p),
        ..base
    };
    let dbm = a.dbm.unwrap_or_else(|| profile.max_tx_power_dbm());
    let event = if a.no_event {
        EventCost::ZERO
    } else {
        embedded_setup_event(profile, kind, role, dbm)?
    };
    let overridden = a.d_tw.is_some() || a.d_two.is_some() || a.d_p.is_some();
    // The worst case sits on the legal limits, which explicit parameters may
    // not reach.
    let cost = if a.mode == SetupModeArg::Worst && !overridden {
        connection_setup_cost_worst_case_with_event(profile, a.tc_new, a.tc_old, kind, role, event)?
    } else {
        connection_setup_cost_with_event(profile, &setup, kind, role, event)?
    };
    let mode = match a.mode {
        SetupModeArg::Typical => "typical",
        SetupModeArg::Worst => "worst",
    };
    let mut table = Table::new(&HEADER);
    table.push(vec![
        kind.name().to_string(),
        role.to_string(),
        mode.to_string(),
        num(setup.t_c_new),
        num(setup.t_c_old),
        num(setup.d_tw),
        num(setup.d_two),
        num(setup.d_p),
        num(setup_window_widening(profile, &setup, kind)),
        flag(!a.no_event),
        num(event.charge),
        num(cost.charge),
        num(cost.duration),
    ]);
    Ok(table)
}
