use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use homtype::conditions::{
    check_wmd, check_wrd, doubling_profile, radius_grid, RadiusGrid, Window, WrdOptions, DEFAULT_WMD_THRESHOLD,
    DEFAULT_WRD_THRESHOLD,
};
use homtype::io::{parse_function, parse_grid, parse_number, parse_space, parse_spec, parse_subset, parse_window};
use homtype::ms::{gagliardo_kernel, ms_scan, ms_value, MsInput, MsScanResult, RegionSpec};
use homtype::norms::{evaluate_norm, quotient_norm, NormSpec};
use homtype::operators::{enumerate_ball_family, maximal_function, maximal_operator_norm, muckenhoupt_constant};
use homtype::scenarios::{list_scenarios, run_scenario};
use homtype::space::{Center, QuadratureRule, Space, WeightedSample};
use homtype::{Error, LogScalar};

const DEFAULT_SEED: u64 = 20240601;

#[derive(Parser, Debug)]
#[command(name = "homtype", version, about = "Measure conditions, function norms and MS-type limits on spaces of homogeneous type")]
struct Cli {
    /// Worker threads (HOMTYPE_THREADS takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate or describe a space file.
    Space {
        #[command(subcommand)]
        action: SpaceAction,
    },
    /// Window checks of the doubling, WRD and WMD conditions.
    Check {
        #[command(subcommand)]
        action: CheckAction,
    },
    /// Evaluate a norm of a function.
    Norm(NormArgs),
    /// Hardy-Littlewood maximal function over all balls.
    Maximal(MaximalArgs),
    /// Muckenhoupt A_p constant of a weight.
    Apconst(ApArgs),
    /// The functional F(s) = s^(1/q) ||G_s^(1/q)||_Y.
    Ms {
        #[command(subcommand)]
        action: MsAction,
    },
    /// Registered reproductions.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand, Debug)]
enum SpaceAction {
    Validate(SpaceArg),
    Info(SpaceArg),
}

#[derive(Args, Debug)]
struct SpaceArg {
    #[arg(long)]
    space: PathBuf,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    space: PathBuf,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum CheckAction {
    Wrd {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "2")]
        lambda: String,
        /// `lo:hi`; each end may use `logB:x`.
        #[arg(long)]
        window: String,
        #[arg(long)]
        threshold: Option<String>,
        /// Point label or index, or a real number on an interval space.
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        per_decade: Option<usize>,
    },
    Wmd {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        subset: PathBuf,
        #[arg(long)]
        window: String,
        #[arg(long)]
        threshold: Option<String>,
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        per_decade: Option<usize>,
    },
    Doubling {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        window: String,
        #[arg(long)]
        base: Option<String>,
        /// Largest admissible ratio for a pass.
        #[arg(long)]
        cap: Option<String>,
        #[arg(long)]
        per_decade: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct NormArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    function: PathBuf,
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Args, Debug)]
struct MaximalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    function: PathBuf,
    /// Also estimate the operator norm of M on this norm.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    trials: usize,
}

#[derive(Args, Debug)]
struct ApArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    weight: PathBuf,
    #[arg(long)]
    p: String,
}

#[derive(Args, Debug)]
struct MsCommon {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    function: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value = "1")]
    q: String,
    /// `all`, `inside:R`, `outside:R` or `subset:FILE`.
    #[arg(long, default_value = "all")]
    region: String,
    /// Gauss-Legendre nodes per cell on interval spaces.
    #[arg(long, default_value_t = 8)]
    nodes: usize,
}

#[derive(Subcommand, Debug)]
enum MsAction {
    Eval {
        #[command(flatten)]
        ms: MsCommon,
        #[arg(long)]
        s: String,
        /// Also report the kernel G_s at this point.
        #[arg(long)]
        at: Option<String>,
    },
    Scan {
        #[command(flatten)]
        ms: MsCommon,
        /// `hi:lo:n` (log-uniform, decreasing) or a comma list.
        #[arg(long, default_value = "1e-1:1e-5:9")]
        grid: String,
    },
}

#[derive(Subcommand, Debug)]
enum ScenarioAction {
    List,
    Run {
        name: String,
        /// Parameter override `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Compute(Error),
    Expectations(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::UnknownScenario(_) => Failure::Usage(e.to_string()),
            e => Failure::Compute(e),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_space(path: &Path) -> CliResult<Space> {
    Ok(parse_space(&read(path)?)?)
}

fn num(text: &str, what: &str) -> CliResult<f64> {
    parse_number(text).map_err(|_| Failure::Usage(format!("--{what}: cannot parse '{text}'")))
}

fn log_num(text: &str, what: &str) -> CliResult<LogScalar> {
    text.parse()
        .map_err(|_| Failure::Usage(format!("--{what}: cannot parse '{text}'")))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialise");
    text.push('\n');
    emit(out, &text)
}

fn parse_center(space: &Space, text: Option<&str>) -> CliResult<Option<Center>> {
    let Some(text) = text else { return Ok(None) };
    Ok(Some(match space {
        Space::Finite(s) => Center::Point(homtype::io::resolve_point(s, text)?),
        Space::Line(_) => Center::Real(num(text, "base")?),
    }))
}

fn window(text: &str) -> CliResult<Window> {
    let (lo, hi) = parse_window(text).map_err(|_| Failure::Usage(format!("--window: cannot parse '{text}'")))?;
    Ok(Window::new(lo, hi)?)
}

fn grid_choice(per_decade: Option<usize>) -> RadiusGrid {
    per_decade.map_or(RadiusGrid::Auto, |per_decade| RadiusGrid::LogUniform { per_decade })
}

fn finite(space: &Space) -> CliResult<&homtype::space::FinitePointSpace> {
    match space {
        Space::Finite(s) => Ok(s),
        Space::Line(_) => Err(Failure::Usage("this command needs a finite space".into())),
    }
}

fn space_info(space: &Space) -> Value {
    match space {
        Space::Finite(s) => json!({
            "type": if s.is_line() { "line_points" } else { "finite" },
            "points": s.n_points(),
            "k0": s.k0(),
            "total_mass": s.total_mass(),
            "diameter": s.diameter(),
            "labels": (0..s.n_points().min(64)).filter_map(|i| s.label(i)).collect::<Vec<_>>(),
        }),
        Space::Line(d) => json!({
            "type": "intervals",
            "whole_line": d.is_whole_line(),
            "intervals": d.intervals().iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect::<Vec<_>>(),
            "measure": d.measure().to_string(),
            "diameter": d.diameter().to_string(),
        }),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let seed = cli.seed;
    let format = cli.format;
    match cli.command {
        Command::Space { action } => match action {
            SpaceAction::Validate(a) => {
                let space = load_space(&a.space)?;
                emit_json(None, &json!({"valid": true, "k0": space.k0()}))
            }
            SpaceAction::Info(a) => emit_json(None, &space_info(&load_space(&a.space)?)),
        },
        Command::Check { action } => check(action),
        Command::Norm(a) => {
            let space = load_space(&a.common.space)?;
            let f = parse_function(&read(&a.function)?)?;
            let spec = parse_spec(&read(&a.spec)?)?;
            let value = match &space {
                Space::Finite(s) => {
                    let sample = WeightedSample::on(s, f.values_on(s)?)?;
                    match &spec {
                        NormSpec::Quotient { inner } => {
                            let q = quotient_norm(s, &sample, inner)?;
                            json!({"norm": q.value, "minimizer": q.minimizer, "certified": q.certified})
                        }
                        _ => json!({"norm": evaluate_norm(s, &sample, &spec)?}),
                    }
                }
                Space::Line(d) => {
                    let input = MsInput::Step {
                        domain: d,
                        f: f.step()?,
                        rule: QuadratureRule::default(),
                    };
                    json!({"norm": homtype::ms::reference_norm(input, &spec, &RegionSpec::All)?})
                }
            };
            emit_json(a.common.out.as_deref(), &value)
        }
        Command::Maximal(a) => {
            let space = load_space(&a.common.space)?;
            let s = finite(&space)?;
            let f = parse_function(&read(&a.function)?)?.values_on(s)?;
            let family = enumerate_ball_family(s);
            let mf = maximal_function(s, &f, &family)?;
            let mut out = json!({"values": mf, "balls": family.len()});
            if let Some(path) = &a.spec {
                let spec = parse_spec(&read(path)?)?;
                out["operator_norm"] = serde_json::to_value(maximal_operator_norm(s, &spec, a.trials, seed)?)
                    .expect("estimates serialise");
            }
            emit_json(a.common.out.as_deref(), &out)
        }
        Command::Apconst(a) => {
            let space = load_space(&a.common.space)?;
            let s = finite(&space)?;
            let w = parse_function(&read(&a.weight)?)?.values_on(s)?;
            let p = num(&a.p, "p")?;
            let c = muckenhoupt_constant(s, &w, p, &enumerate_ball_family(s))?;
            emit_json(a.common.out.as_deref(), &json!({"p": p, "constant": c}))
        }
        Command::Ms { action } => ms(action, format),
        Command::Scenario { action } => scenario(action),
    }
}

fn check(action: CheckAction) -> CliResult<()> {
    let (out, report) = match action {
        CheckAction::Wrd {
            common,
            lambda,
            window: w,
            threshold,
            base,
            per_decade,
        } => {
            let space = load_space(&common.space)?;
            let mut opts = WrdOptions::new(num(&lambda, "lambda")?, window(&w)?);
            opts.base_point = parse_center(&space, base.as_deref())?;
            opts.threshold = threshold.map_or(Ok(DEFAULT_WRD_THRESHOLD), |t| num(&t, "threshold"))?;
            opts.grid = grid_choice(per_decade);
            (common.out, check_wrd(&space, &opts)?)
        }
        CheckAction::Wmd {
            common,
            subset,
            window: w,
            threshold,
            base,
            per_decade,
        } => {
            let space = load_space(&common.space)?;
            let sub = parse_subset(&read(&subset)?, &space)?;
            let t = threshold.map_or(Ok(DEFAULT_WMD_THRESHOLD), |t| num(&t, "threshold"))?;
            let base = parse_center(&space, base.as_deref())?;
            let r = check_wmd(&space, &sub, base, &window(&w)?, t, &grid_choice(per_decade))?;
            (common.out, r)
        }
        CheckAction::Doubling {
            common,
            window: w,
            base,
            cap,
            per_decade,
        } => {
            let space = load_space(&common.space)?;
            let x = parse_center(&space, base.as_deref())?.unwrap_or_else(|| homtype::conditions::default_base_point(&space));
            let radii = radius_grid(&space, x, 2.0, &window(&w)?, &grid_choice(per_decade))?;
            let cap = cap.map_or(Ok(f64::INFINITY), |c| num(&c, "cap"))?;
            (common.out, doubling_profile(&space, x, &radii, 1.0, cap)?)
        }
    };
    emit_json(out.as_deref(), &report)
}

fn parse_region(text: &str, space: &Space) -> CliResult<RegionSpec> {
    let bad = || Failure::Usage(format!("--region: expected all, inside:R, outside:R or subset:FILE, got '{text}'"));
    if text == "all" {
        return Ok(RegionSpec::All);
    }
    let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
    match kind {
        "inside" => Ok(RegionSpec::InsideBall {
            radius: log_num(rest, "region")?,
        }),
        "outside" => Ok(RegionSpec::OutsideBall {
            radius: log_num(rest, "region")?,
        }),
        "subset" => Ok(RegionSpec::Subset(parse_subset(&read(Path::new(rest))?, space)?)),
        _ => Err(bad()),
    }
}

struct MsSetup {
    space: Space,
    values: Option<Vec<f64>>,
    step: Option<homtype::space::StepFunction1D>,
    spec: NormSpec,
    q: f64,
    region: RegionSpec,
    rule: QuadratureRule,
}

impl MsSetup {
    fn load(m: &MsCommon) -> CliResult<Self> {
        let space = load_space(&m.common.space)?;
        let f = parse_function(&read(&m.function)?)?;
        let (values, step) = match &space {
            Space::Finite(s) => (Some(f.values_on(s)?), None),
            Space::Line(_) => (None, Some(f.step()?.clone())),
        };
        let region = parse_region(&m.region, &space)?;
        Ok(MsSetup {
            spec: parse_spec(&read(&m.spec)?)?,
            q: num(&m.q, "q")?,
            rule: QuadratureRule {
                nodes: m.nodes,
                ..QuadratureRule::default()
            },
            space,
            values,
            step,
            region,
        })
    }

    fn input(&self) -> MsInput<'_> {
        match &self.space {
            Space::Finite(s) => MsInput::Finite {
                space: s,
                values: self.values.as_deref().expect("finite values loaded"),
            },
            Space::Line(d) => MsInput::Step {
                domain: d,
                f: self.step.as_ref().expect("step function loaded"),
                rule: self.rule,
            },
        }
    }
}

fn scan_csv(r: &MsScanResult) -> String {
    let mut flags = r.trend.as_str().to_string();
    if r.extrapolation.is_some_and(|e| e.unreliable) {
        flags.push_str(";extrapolation_unreliable");
    }
    let mut out = String::from("s,F,ratio,flags\n");
    for (s, f) in r.grid.iter().zip(&r.values) {
        writeln!(out, "{s},{f},{},{flags}", f / r.reference_norm).expect("writing to a string");
    }
    out
}

fn ms(action: MsAction, format: Option<Format>) -> CliResult<()> {
    match action {
        MsAction::Eval { ms: m, s, at } => {
            let setup = MsSetup::load(&m)?;
            let s = num(&s, "s")?;
            let value = ms_value(setup.input(), setup.q, &setup.spec, s, &setup.region)?;
            let mut out = json!({"s": s, "q": setup.q, "F": value});
            if let Some(at) = at {
                let x = parse_center(&setup.space, Some(&at))?.expect("center given");
                out["kernel"] = json!(gagliardo_kernel(setup.input(), setup.q, s, x, &setup.region)?);
            }
            emit_json(m.common.out.as_deref(), &out)
        }
        MsAction::Scan { ms: m, grid } => {
            let setup = MsSetup::load(&m)?;
            let grid = parse_grid(&grid).map_err(|e| Failure::Usage(format!("--grid: {e}")))?;
            let r = ms_scan(setup.input(), setup.q, &setup.spec, &grid, &setup.region)?;
            let out = m.common.out.as_deref();
            let csv = match format {
                Some(f) => f == Format::Csv,
                None => out.is_none_or(|p| p.extension().is_none_or(|e| e != "json")),
            };
            if csv {
                emit(out, &scan_csv(&r))
            } else {
                emit_json(out, &r)
            }
        }
    }
}

fn scenario(action: ScenarioAction) -> CliResult<()> {
    match action {
        ScenarioAction::List => {
            let mut text = String::new();
            for s in list_scenarios() {
                writeln!(text, "{}\t{}", s.name, s.anchor).expect("writing to a string");
            }
            emit(None, &text)
        }
        ScenarioAction::Run { name, set, out } => {
            let mut overrides = BTreeMap::new();
            for kv in &set {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Failure::Usage(format!("--set expects key=value, got '{kv}'")))?;
                overrides.insert(k.trim().to_string(), v.trim().to_string());
            }
            let report = run_scenario(&name, &overrides).map_err(|e| match e {
                Error::InvalidParameter(m) => Failure::Usage(m),
                e => e.into(),
            })?;
            emit_json(out.as_deref(), &report)?;
            if report.passed() {
                Ok(())
            } else {
                let failed: Vec<&str> = report
                    .expectations
                    .iter()
                    .filter(|e| e.outcome != homtype::scenarios::Outcome::Pass)
                    .map(|e| e.description.as_str())
                    .collect();
                Err(Failure::Expectations(format!("{name}: failed expectations: {}", failed.join("; "))))
            }
        }
    }
}

fn configure_threads(flag: Option<usize>, verbose: bool) {
    let env = std::env::var("HOMTYPE_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    if let Some(n) = env.or(flag).filter(|&n| n > 0) {
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() && verbose {
            eprintln!("thread pool already configured");
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let verbose = cli.verbose > 0;
    configure_threads(cli.threads, verbose);
    let start = Instant::now();
    let result = run(cli);
    if verbose {
        eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("{}", json!({"error": "usage", "message": m}));
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("{}", json!({"error": error_kind(&e), "message": e.to_string()}));
            ExitCode::from(1)
        }
        Err(Failure::Expectations(m)) => {
            eprintln!("{}", json!({"error": "expectations", "message": m}));
            ExitCode::from(3)
        }
    }
}
