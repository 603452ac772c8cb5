//! Command-line front end. [`run`] is the whole program, callable in-process.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::classify::classify;
use crate::error::Error;
use crate::flows::{read_control_csv, rk4_flow_with, ClosedFormFlow, PiecewiseControl, Sampling, DEFAULT_DIVISIONS};
use crate::group::GroupPoint;
use crate::plot::{render_svg, PlotOptions};
use crate::reach::{reach_sample, steer_with, verify_control_set, SteerOptions, VerifyConfig, Viewport};
use crate::reach::{DEFAULT_BUDGET, DEFAULT_EPS, DEFAULT_HORIZON};
use crate::system::SystemParams;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED_CHECK: u8 = 1;
pub const EXIT_INVALID_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "solvlin", version, about = "Control sets of linear systems on the solvable group R+ x R")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the control-set classification as JSON.
    Classify(CommonArgs),
    /// Write a trajectory under a piecewise-constant control as CSV.
    Simulate(SimulateArgs),
    /// Search for a control between two points.
    Steer(SteerArgs),
    /// Empirically check controllability and invariance of the classified sets.
    Verify(VerifyArgs),
    /// Draw the control sets as SVG.
    Plot(PlotArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// System as a JSON file path or inline JSON.
    #[arg(long)]
    pub system: Option<String>,
    /// JSON file with default options; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Control range override `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `x0,x1,y0,y1`.
    #[arg(long, allow_hyphen_values = true)]
    pub viewport: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initial point `x,y`.
    #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
    pub point: String,
    /// CSV file of `dt,u` rows.
    #[arg(long)]
    pub control: PathBuf,
    /// Add `x_rk4,y_rk4` audit columns.
    #[arg(long)]
    pub rk4: bool,
    /// RK4 step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Samples per control segment.
    #[arg(long)]
    pub divisions: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SteerArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub from: String,
    #[arg(long, allow_hyphen_values = true)]
    pub to: String,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub invariance_samples: Option<usize>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of sampled trajectories to overlay.
    #[arg(long)]
    pub trajectories: Option<usize>,
    /// Start of the overlaid trajectories, `x,y`.
    #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
    pub point: String,
    #[arg(long, default_value_t = 640)]
    pub width: u32,
    #[arg(long, default_value_t = 480)]
    pub height: u32,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Inline system object, or a path to one.
    pub system: Option<serde_json::Value>,
    pub omega: Option<[f64; 2]>,
    pub horizon: Option<f64>,
    pub eps: Option<f64>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub viewport: Option<[f64; 4]>,
    pub out: Option<PathBuf>,
    pub pairs: Option<usize>,
    pub invariance_samples: Option<usize>,
    pub step: Option<f64>,
    pub trajectories: Option<usize>,
}

/// Fully resolved options, echoed into reports.
#[derive(Serialize, Debug, Clone)]
pub struct RunConfig {
    pub system: SystemParams,
    pub horizon: f64,
    pub eps: f64,
    pub budget: usize,
    pub seed: u64,
    pub viewport: Viewport,
    pub out: Option<PathBuf>,
}

struct Resolved {
    run: RunConfig,
    file: ConfigFile,
}

#[derive(Debug)]
struct CliError(String);

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError(e.to_string())
    }
}

fn parse_numbers(what: &str, text: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError(format!("{what} `{text}`: {e}")))?;
    if v.len() != n {
        return Err(CliError(format!("{what} `{text}`: expected {n} comma-separated numbers")));
    }
    Ok(v)
}

fn parse_point(what: &str, text: &str) -> Result<GroupPoint, CliError> {
    let v = parse_numbers(what, text, 2)?;
    Ok(GroupPoint::new(v[0], v[1])?)
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError(format!("--{name} must be positive, got {v}")))
    }
}

fn read_text(path: &Path, what: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError(format!("cannot read {what} {}: {e}", path.display())))
}

fn system_value(source: &str) -> Result<serde_json::Value, CliError> {
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        read_text(Path::new(source), "system file")?
    };
    serde_json::from_str(&text).map_err(|e| CliError(format!("system description: {e}")))
}

fn resolve(args: &CommonArgs) -> Result<Resolved, CliError> {
    let file: ConfigFile = match &args.config {
        Some(path) => serde_json::from_str(&read_text(path, "config file")?)
            .map_err(|e| CliError(format!("config file {}: {e}", path.display())))?,
        None => ConfigFile::default(),
    };

    let mut value = match (&args.system, &file.system) {
        (Some(s), _) => system_value(s)?,
        (None, Some(serde_json::Value::String(path))) => system_value(path)?,
        (None, Some(v)) => v.clone(),
        (None, None) => return Err(CliError("no system given: use --system <path|inline-json>".into())),
    };
    let omega = match &args.omega {
        Some(text) => Some(parse_numbers("--omega", text, 2)?),
        None => file.omega.map(|o| o.to_vec()),
    };
    if let Some(o) = omega {
        let obj = value.as_object_mut().ok_or_else(|| CliError("system description must be a JSON object".into()))?;
        obj.insert("omega".into(), json!(o));
    }
    let system = SystemParams::from_json(&value.to_string())?;

    let viewport = match (&args.viewport, file.viewport) {
        (Some(text), _) => {
            let v = parse_numbers("--viewport", text, 4)?;
            Viewport::new(v[0], v[1], v[2], v[3])?
        }
        (None, Some(v)) => Viewport::new(v[0], v[1], v[2], v[3])?,
        (None, None) => Viewport::default(),
    };
    let budget = args.budget.or(file.budget).unwrap_or(DEFAULT_BUDGET);
    if budget == 0 {
        return Err(CliError("--budget must be positive".into()));
    }
    let run = RunConfig {
        system,
        horizon: positive("horizon", args.horizon.or(file.horizon).unwrap_or(DEFAULT_HORIZON))?,
        eps: positive("eps", args.eps.or(file.eps).unwrap_or(DEFAULT_EPS))?,
        budget,
        seed: args.seed.or(file.seed).unwrap_or(0),
        viewport,
        out: args.out.clone().or_else(|| file.out.clone()),
    };
    Ok(Resolved { run, file })
}

fn emit(out: &Option<PathBuf>, content: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| CliError(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(content).map_err(|e| CliError(format!("cannot write to standard output: {e}"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("reports serialize");
    s.push(b'\n');
    s
}

fn cmd_classify(args: &CommonArgs, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let r = resolve(args)?;
    emit(&r.run.out, &to_json(&classify(&r.run.system)), stdout)?;
    Ok(EXIT_OK)
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let r = resolve(&args.common)?;
    let p = parse_point("--point", &args.point)?;
    let file = fs::File::open(&args.control)
        .map_err(|e| CliError(format!("cannot read control file {}: {e}", args.control.display())))?;
    let rows = read_control_csv(file)?;
    let omega = r.run.system.omega();
    if let Some((row, s)) = rows.iter().find(|(_, s)| !omega.contains(s.u)) {
        return Err(CliError(format!(
            "control file row {row}: level {} outside Ω = [{}, {}]",
            s.u,
            omega.lo(),
            omega.hi()
        )));
    }
    let control = PiecewiseControl::new(rows.into_iter().map(|(_, s)| s).collect())?;
    let sampling = Sampling { divisions: args.divisions.unwrap_or(DEFAULT_DIVISIONS).max(1) };
    let tr = ClosedFormFlow::new(&r.run.system).run(&p, &control, sampling)?;
    let mut buf = Vec::new();
    if args.rk4 {
        let h = positive("step", args.step.or(r.file.step).unwrap_or(1e-3))?;
        let audit = rk4_flow_with(&r.run.system, &p, &control, h, sampling)?;
        tr.write_csv_with_audit(&mut buf, &audit)?;
    } else {
        tr.write_csv(&mut buf)?;
    }
    emit(&r.run.out, &buf, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_steer(args: &SteerArgs, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let r = resolve(&args.common)?;
    let p = parse_point("--from", &args.from)?;
    let q = parse_point("--to", &args.to)?;
    let opts = SteerOptions { eps: r.run.eps, budget: r.run.budget, seed: r.run.seed, horizon: r.run.horizon };
    let result = steer_with(&r.run.system, &p, &q, &opts)?;
    let doc = json!({ "config": r.run, "from": p, "to": q, "result": result });
    emit(&r.run.out, &to_json(&doc), stdout)?;
    Ok(if result.found { EXIT_OK } else { EXIT_FAILED_CHECK })
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let r = resolve(&args.common)?;
    let defaults = VerifyConfig::default();
    let cfg = VerifyConfig {
        pairs: args.pairs.or(r.file.pairs).unwrap_or(defaults.pairs),
        invariance_samples: args.invariance_samples.or(r.file.invariance_samples).unwrap_or(defaults.invariance_samples),
        eps: r.run.eps,
        budget: r.run.budget,
        horizon: r.run.horizon,
        seed: r.run.seed,
        viewport: r.run.viewport,
        ..defaults
    };
    let c = classify(&r.run.system);
    let report = verify_control_set(&r.run.system, &c.description, c.invariance, &cfg)?;
    let doc = json!({
        "config": r.run,
        "verify": cfg,
        "case": c.case,
        "description": c.description,
        "invariance": c.invariance,
        "clean": report.clean(),
        "report": report,
    });
    emit(&r.run.out, &to_json(&doc), stdout)?;
    Ok(if report.clean() { EXIT_OK } else { EXIT_FAILED_CHECK })
}

fn cmd_plot(args: &PlotArgs, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let r = resolve(&args.common)?;
    let c = classify(&r.run.system);
    let n = args.trajectories.or(r.file.trajectories).unwrap_or(0);
    let start = parse_point("--point", &args.point)?;
    let trajectories = reach_sample(&r.run.system, &start, r.run.horizon, n, r.run.seed)?.trajectories;
    if args.width == 0 || args.height == 0 {
        return Err(CliError("--width and --height must be positive".into()));
    }
    let opts = PlotOptions { viewport: r.run.viewport, width: args.width, height: args.height, trajectories };
    emit(&r.run.out, render_svg(&c, &opts).as_bytes(), stdout)?;
    Ok(EXIT_OK)
}

/// Runs the program on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_INVALID_INPUT } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Classify(a) => cmd_classify(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
        Command::Steer(a) => cmd_steer(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Plot(a) => cmd_plot(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(CliError(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INVALID_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (u8, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["solvlin"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parses_numbers() {
        assert_eq!(parse_numbers("x", "-1, 2.5", 2).unwrap(), vec![-1.0, 2.5]);
        assert!(parse_numbers("x", "1", 2).is_err());
        assert!(parse_point("p", "-1,0").is_err());
    }

    #[test]
    fn omega_override_and_precedence() {
        let (code, out, _) = call(&["classify", "--system", r#"{"a":1,"b":0,"alpha":0,"beta":1}"#, "--omega", "-1,1"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["description"]["interval"], json!([0.5, null]));
    }

    #[test]
    fn invalid_system_exits_2() {
        let (code, _, err) = call(&["classify", "--system", r#"{"a":1,"b":0,"alpha":0,"beta":0,"omega":[-1,1]}"#]);
        assert_eq!(code, 2);
        assert!(err.contains("(α, β) ≠ (0, 0)"), "{err}");
    }

    #[test]
    fn missing_system() {
        assert_eq!(call(&["classify"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }
}
