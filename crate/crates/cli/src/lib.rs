//! Command-line front end for the `blemodel` energy and discovery model.
//!
//! Every subcommand writes one CSV table (header row with units, LF line
//! endings) to `--out` or stdout. Failures print a single
//! `error[<code>]: <message>` line to stderr and exit nonzero.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;

use blemodel::DeviceProfile;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod error;
pub mod output;

pub use error::{CliError, CliResult};
pub use output::Table;

#[derive(Debug, Parser)]
#[command(name = "blemodel", version, about = "BLE energy and discovery-latency model")]
pub struct Cli {
    /// Device profile JSON; defaults to the bundled BLE112 profile.
    #[arg(long, global = true, value_name = "PATH")]
    pub profile: Option<PathBuf>,
    /// Seed for simulated trials.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV file; defaults to stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Charge of one connection interval.
    Connected(ConnectedArgs),
    /// Expected discovery latency and charges for one parameter set.
    Discovery(DiscoveryArgs),
    /// Cost of a connection establishment or parameter update.
    Setup(SetupArgs),
    /// Per-phase sensitivity of the interval charge.
    Sensitivity(SensitivityArgs),
    /// Model against simulator on a grid of parameter sets.
    Verify(VerifyArgs),
    /// Parameter sweeps and preset recipes.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Slave,
    Master,
}

impl From<RoleArg> for blemodel::Role {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::Slave => blemodel::Role::Slave,
            RoleArg::Master => blemodel::Role::Master,
        }
    }
}

/// Connection interval scenario shared by `connected` and `sensitivity`.
#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    #[arg(long, value_enum, default_value_t = RoleArg::Slave)]
    pub role: RoleArg,
    /// Connection interval (s).
    #[arg(long, default_value_t = 0.1)]
    pub tc: f64,
    /// Packet pairs per connection event.
    #[arg(long, default_value_t = 1)]
    pub pairs: usize,
    /// Bytes per received packet, including overhead.
    #[arg(long, default_value_t = 10)]
    pub rx: u32,
    /// Bytes per sent packet, including overhead.
    #[arg(long, default_value_t = 10)]
    pub tx: u32,
    /// Tx power (dBm); defaults to the highest level of the profile.
    #[arg(long, allow_hyphen_values = true)]
    pub dbm: Option<i32>,
    /// Average slave latency.
    #[arg(long, default_value_t = 0.0)]
    pub nsl: f64,
    /// Sleep clock accuracy of the master (ppm); defaults to the profile.
    #[arg(long)]
    pub sca_master: Option<f64>,
    /// Sleep clock accuracy of the slave (ppm); defaults to the profile.
    #[arg(long)]
    pub sca_slave: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ConnectedArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Also report the total charge over this horizon (s).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Print the phase timeline of one event instead of the summary row.
    #[arg(long)]
    pub phases: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Algorithm,
    Continuous,
    Bounded,
}

impl From<MethodArg> for blemodel::MethodChoice {
    fn from(m: MethodArg) -> Self {
        use blemodel::MethodChoice;
        match m {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::Algorithm => MethodChoice::Algorithm1,
            MethodArg::Continuous => MethodChoice::Continuous,
            MethodArg::Bounded => MethodChoice::Bounded,
        }
    }
}

/// Estimator settings shared by the discovery commands.
#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Maximum random advertising delay (s).
    #[arg(long, default_value_t = blemodel::discovery::DEFAULT_RHO_MAX)]
    pub rho_max: f64,
    /// Stop once the cumulative hit probability exceeds this value.
    #[arg(long, default_value_t = 0.9999)]
    pub epsilon: f64,
    /// Start-offset grid step (s); defaults to 0.03 T_s.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Abort threshold of the numeric algorithm (s).
    #[arg(long, default_value_t = 1000.0)]
    pub dmax: f64,
    /// Advertiser tx power (dBm); defaults to the highest level.
    #[arg(long, allow_hyphen_values = true)]
    pub dbm: Option<i32>,
    /// Also simulate this many trials per point.
    #[arg(long, value_name = "TRIALS")]
    pub simulate: Option<usize>,
    /// Simulated time after which a trial is truncated (s).
    #[arg(long, default_value_t = blemodel::SimConfig::DEFAULT_MAX_SIM_TIME)]
    pub max_sim_time: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DiscoveryArgs {
    /// Advertising interval without random delay (s).
    #[arg(long)]
    pub ta: f64,
    /// Scan interval (s).
    #[arg(long)]
    pub ts: f64,
    /// Scan window (s).
    #[arg(long)]
    pub ds: f64,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetupKindArg {
    Establish,
    Update,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetupModeArg {
    /// Window size and offsets the BLE112 stack uses.
    Typical,
    /// Largest legal window size and offsets.
    Worst,
}

#[derive(Debug, Clone, Args)]
pub struct SetupArgs {
    #[arg(long, value_enum, default_value_t = SetupKindArg::Establish)]
    pub kind: SetupKindArg,
    #[arg(long, value_enum, default_value_t = RoleArg::Slave)]
    pub role: RoleArg,
    /// New connection interval (s).
    #[arg(long)]
    pub tc_new: f64,
    /// Connection interval before an update (s).
    #[arg(long, default_value_t = 0.0)]
    pub tc_old: f64,
    #[arg(long, value_enum, default_value_t = SetupModeArg::Typical)]
    pub mode: SetupModeArg,
    /// Transmit window size (s); overrides the mode.
    #[arg(long)]
    pub d_tw: Option<f64>,
    /// Transmit window offset (s); overrides the mode.
    #[arg(long)]
    pub d_two: Option<f64>,
    /// Offset of the first packet in the transmit window (s).
    #[arg(long)]
    pub d_p: Option<f64>,
    /// Leave out the event that carries the request.
    #[arg(long)]
    pub no_event: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub dbm: Option<i32>,
}

#[derive(Debug, Clone, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Print the two reference worked examples instead of the table.
    #[arg(long)]
    pub worked_examples: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Trials per grid point.
    #[arg(long, default_value_t = 5000)]
    pub trials: usize,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 0.10)]
    pub tolerance: f64,
    /// Grid point `TA,TS,DS` in seconds; repeat to replace the default grid.
    #[arg(long = "point", value_name = "TA,TS,DS")]
    pub points: Vec<String>,
    /// Write per-trial CSV files into this directory.
    #[arg(long, value_name = "DIR")]
    pub trials_dir: Option<PathBuf>,
    /// Exit nonzero when a point fails.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Recipe {
    /// Latency over advertising interval for several scan windows.
    LatencyMap,
    /// Numeric algorithm and bounded closed form side by side.
    ClosedForm,
    /// Expected advertiser and scanner charge over advertising interval.
    DiscoveryCharge,
    /// Mean current and efficiency over goodput for several payloads.
    Goodput,
    /// Mean current over connection interval for every tx power.
    IntervalTxpower,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Preset sweep; replaces `--var`.
    #[arg(long, value_enum, conflicts_with = "var")]
    pub recipe: Option<Recipe>,
    /// Swept parameter: ta, ts, ds, rho (discovery) or tc, pairs, rx, tx,
    /// dbm, nsl (connected).
    #[arg(long, requires_all = ["start", "stop", "step"])]
    pub var: Option<String>,
    /// First value of the swept parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<f64>,
    /// Last value, included when the grid lands on it.
    #[arg(long, allow_hyphen_values = true)]
    pub stop: Option<f64>,
    /// Grid step, > 0.
    #[arg(long)]
    pub step: Option<f64>,
    /// Fixed parameter `NAME=VALUE`; repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub fixed: Vec<String>,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                use std::io::Write;
                // A closed pipe (e.g. `| head`) is not an error.
                let _ = write!(std::io::stdout(), "{e}");
                return 0;
            }
            let first = e
                .to_string()
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ")
                .to_string();
            eprintln!("{}", CliError::usage(first).line());
            return 2;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.line());
            e.exit_code
        }
    }
}

/// Runs a parsed command and writes its table.
pub fn run(cli: &Cli) -> CliResult<()> {
    let table = build_table(cli)?;
    table.emit(cli.out.as_deref())?;
    match &cli.command {
        Command::Verify(a) if a.strict => commands::verify::check_strict(&table),
        _ => Ok(()),
    }
}

/// Computes the output table of a parsed command without writing it.
pub fn build_table(cli: &Cli) -> CliResult<Table> {
    let profile = load_profile(cli)?;
    match &cli.command {
        Command::Connected(a) => commands::connected::run(&profile, a),
        Command::Discovery(a) => commands::discovery::run(&profile, a, cli.seed),
        Command::Setup(a) => commands::setup::run(&profile, a),
        Command::Sensitivity(a) => commands::sensitivity::run(&profile, a),
        Command::Verify(a) => commands::verify::run(&profile, a, cli.seed),
        Command::Sweep(a) => commands::sweep::run(&profile, a, cli.seed),
    }
}

fn load_profile(cli: &Cli) -> CliResult<DeviceProfile> {
    match &cli.profile {
        Some(path) => Ok(DeviceProfile::load(path)?),
        None => Ok(DeviceProfile::ble112()),
    }
}
