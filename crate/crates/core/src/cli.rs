//! Command-line frontend. Every output starts with a manifest line that is
//! enough to reproduce it.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::allocation::{allocate, verify_allocation, StreamAllocation};
use crate::beamformer::{
    design_beamformers, dump_matrices, sample_channel, verify_beamformers, BeamformerError,
};
use crate::dof_model::{
    build_compact_region, build_cutset_region, build_genie_outer_region, build_inner_region,
    build_nonintermittent_region, d31_decode_forward, d31_nonadaptive_cap, sum_dof_closed_form,
    sum_dof_formula, sum_dof_nonintermittent, sum_objective, ChannelConfig, DoFTuple, ModelError,
};
use crate::linksim::{estimate_dof_slopes, stream_rates, LinkError};
use crate::polyhedra::{format_significant, lp_maximize, LinearSystem, LpOutcome, Rational};

pub const SEED_ENV: &str = "DOF3WC_SEED";

const EXIT_OK: i32 = 0;
const EXIT_FAILURE: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dof3wc",
    version,
    about = "DoF regions, stream allocation and beamformer checks for the intermittent MIMO three-way channel"
)]
struct Cli {
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit one of the DoF regions as a linear system.
    Region {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_enum, default_value_t = RegionForm::Raw)]
        form: RegionForm,
        #[arg(long, value_enum, default_value_t = TextFormat::Json)]
        format: TextFormat,
    },
    /// Maximum sum-DoF by LP against the closed form.
    Sumdof {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Integer stream allocation achieving a DoF tuple.
    Allocate {
        #[command(flatten)]
        config: ConfigArg,
        /// Six values d12,d13,d21,d23,d31,d32, each an integer or p/q.
        #[arg(long)]
        dof: String,
    },
    /// Design and verify beamformers for one channel draw.
    Beamform {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        alloc: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
        snr_db: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Include every channel, pre-coder and post-coder matrix.
        #[arg(long)]
        dump_matrices: bool,
    },
    /// DoF slopes of every stream over an SNR sweep.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        alloc: PathBuf,
        /// Number of seeds, counted up from the base seed.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "40,60,80,100,120",
            allow_negative_numbers = true
        )]
        snr_db_list: Vec<f64>,
    },
    /// Sum-DoF curves of the figures as CSV.
    Figure {
        #[arg(long, value_enum)]
        id: FigureId,
    },
    /// Cut-set and genie-aided outer bounds against the achievable sum-DoF.
    CompareBounds {
        #[command(flatten)]
        config: ConfigArg,
    },
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// JSON file such as {"M":[4,2,2],"tau":"1/2"}.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegionForm {
    Raw,
    Compact,
    Nonint,
    Cutset,
    Genie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TextFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigureId {
    Fig5,
    Fig6,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Failed(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Failed(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Failed(m) => m,
        }
    }
}

/// What a command produced: the rendered output and whether it counts as success.
struct Output {
    body: String,
    ok: bool,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            if e.use_stderr() && !e.render().to_string().contains("Usage:") {
                let _ = writeln!(sink, "\n{}", Cli::command().render_usage());
            }
            return code;
        }
    };
    let result = execute(&cli).and_then(|out| {
        match &cli.out {
            Some(path) => std::fs::write(path, &out.body)
                .map_err(|e| Failure::Failed(format!("cannot write {}: {e}", path.display())))?,
            None => stdout
                .write_all(out.body.as_bytes())
                .map_err(|e| Failure::Failed(format!("cannot write output: {e}")))?,
        }
        Ok(out.ok)
    });
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

fn default_seed(explicit: Option<u64>) -> Result<u64, Failure> {
    if let Some(seed) = explicit {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}={text:?} is not an unsigned integer"))),
        Err(_) => Ok(1),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_config(arg: &ConfigArg) -> Result<ChannelConfig, Failure> {
    ChannelConfig::from_json(&read_file(&arg.config)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", arg.config.display())))
}

/// Accepts a bare allocation or the output of `allocate`.
fn load_allocation(path: &Path) -> Result<StreamAllocation, Failure> {
    let text = read_file(path)?;
    let bad = |e: serde_json::Error| Failure::Usage(format!("{}: {e}", path.display()));
    let value: Value = serde_json::from_str(&text).map_err(bad)?;
    let inner = value.get("allocation").cloned().unwrap_or(value);
    serde_json::from_value::<StreamAllocation>(inner).map_err(bad)
}

fn manifest(
    cli: &Cli,
    name: &str,
    config: Option<&ChannelConfig>,
    format: &str,
    extra: Value,
) -> Value {
    let mut m = Map::new();
    m.insert("subcommand".into(), json!(name));
    m.insert(
        "config".into(),
        config.map_or(Value::Null, |c| {
            serde_json::from_str(&c.to_json()).expect("config JSON")
        }),
    );
    m.insert(
        "out".into(),
        cli.out
            .as_ref()
            .map_or(Value::Null, |p| json!(p.display().to_string())),
    );
    m.insert("format".into(), json!(format));
    if let Value::Object(extra) = extra {
        m.extend(extra);
    }
    Value::Object(m)
}

/// Rounds every non-integer number to 12 significant digits.
fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let rounded: f64 = format_significant(x, 12).parse().unwrap_or(x);
            *value = json!(rounded);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn json_document(manifest: Value, fields: Vec<(&str, Value)>) -> String {
    let mut doc = Map::new();
    doc.insert("manifest".into(), manifest);
    for (k, v) in fields {
        doc.insert(k.into(), v);
    }
    let mut doc = Value::Object(doc);
    round_floats(&mut doc);
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON rendering");
    text.push('\n');
    text
}

fn comment_header(manifest: &Value) -> String {
    format!(
        "# manifest: {}\n",
        serde_json::to_string(manifest).expect("JSON rendering")
    )
}

fn rational_json(r: &Rational) -> Value {
    json!(r.to_string())
}

fn max_sum(system: &LinearSystem) -> Result<Rational, Failure> {
    match lp_maximize(system, &sum_objective()).map_err(|e| Failure::Failed(e.to_string()))? {
        LpOutcome::Optimal { value, .. } => Ok(value),
        LpOutcome::Unbounded => Err(Failure::Failed("sum-DoF is unbounded".into())),
        LpOutcome::Infeasible => Err(Failure::Failed("region is empty".into())),
    }
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Region {
            config,
            form,
            format,
        } => region(cli, config, *form, *format),
        Command::Sumdof { config } => sumdof(cli, config),
        Command::Allocate { config, dof } => allocate_cmd(cli, config, dof),
        Command::Beamform {
            config,
            alloc,
            seed,
            snr_db,
            tol,
            dump_matrices,
        } => beamform(cli, config, alloc, *seed, *snr_db, *tol, *dump_matrices),
        Command::Simulate {
            config,
            alloc,
            seeds,
            seed,
            snr_db_list,
        } => simulate(cli, config, alloc, *seeds, *seed, snr_db_list),
        Command::Figure { id } => figure(cli, *id),
        Command::CompareBounds { config } => compare_bounds(cli, config),
    }
}

fn region(
    cli: &Cli,
    arg: &ConfigArg,
    form: RegionForm,
    format: TextFormat,
) -> Result<Output, Failure> {
    let config = load_config(arg)?;
    let system = match form {
        RegionForm::Raw => build_inner_region(&config),
        RegionForm::Compact => build_compact_region(&config).map_err(|e| match e {
            ModelError::DegenerateTau => {
                Failure::Usage("the compact form needs tau > 0; use --form raw".into())
            }
            other => Failure::Failed(other.to_string()),
        })?,
        RegionForm::Nonint => build_nonintermittent_region(&config),
        RegionForm::Cutset => build_cutset_region(&config),
        RegionForm::Genie => build_genie_outer_region(&config),
    };
    let form_name = form
        .to_possible_value()
        .expect("named form")
        .get_name()
        .to_string();
    let format_name = format
        .to_possible_value()
        .expect("named format")
        .get_name()
        .to_string();
    let m = manifest(
        cli,
        "region",
        Some(&config),
        &format_name,
        json!({ "form": form_name }),
    );
    let body = match format {
        TextFormat::Json => {
            let system_value: Value = serde_json::from_str(&system.to_json()).expect("system JSON");
            json_document(
                m,
                vec![("form", json!(form_name)), ("system", system_value)],
            )
        }
        TextFormat::Text => {
            let mut s = comment_header(&m);
            writeln!(s, "# variables: {}", system.variables().join(" ")).expect("String write");
            for c in system.constraints() {
                writeln!(s, "{c}").expect("String write");
            }
            s
        }
    };
    Ok(Output { body, ok: true })
}

fn sumdof(cli: &Cli, arg: &ConfigArg) -> Result<Output, Failure> {
    let config = load_config(arg)?;
    let outcome = lp_maximize(&build_inner_region(&config), &sum_objective())
        .map_err(|e| Failure::Failed(e.to_string()))?;
    let LpOutcome::Optimal { value, point } = outcome else {
        return Err(Failure::Failed("inner region LP has no optimum".into()));
    };
    let closed = sum_dof_formula(&config);
    let matched = value == closed;
    let m = manifest(cli, "sumdof", Some(&config), "json", json!({}));
    let point: Map<String, Value> = point
        .iter()
        .map(|(k, v)| (k.clone(), rational_json(v)))
        .collect();
    let body = json_document(
        m,
        vec![
            ("lp", rational_json(&value)),
            ("closed_form", rational_json(&closed)),
            ("match", json!(matched)),
            ("argmax", Value::Object(point)),
        ],
    );
    Ok(Output { body, ok: matched })
}

fn allocate_cmd(cli: &Cli, arg: &ConfigArg, dof: &str) -> Result<Output, Failure> {
    let config = load_config(arg)?;
    let d: DoFTuple = dof
        .parse()
        .map_err(|e: ModelError| Failure::Usage(format!("--dof {dof:?}: {e}")))?;
    let alloc = allocate(&config, &d).map_err(|e| Failure::Failed(e.to_string()))?;
    let report = verify_allocation(&config, &d, &alloc);
    let m = manifest(
        cli,
        "allocate",
        Some(&config),
        "json",
        json!({ "dof": dof }),
    );
    let alloc_value: Value = serde_json::from_str(&alloc.to_json()).expect("allocation JSON");
    let body = json_document(
        m,
        vec![
            ("allocation", alloc_value),
            (
                "verification",
                json!({ "passed": report.passed(), "checks": report.checks }),
            ),
        ],
    );
    Ok(Output {
        body,
        ok: report.passed(),
    })
}

fn beamform(
    cli: &Cli,
    arg: &ConfigArg,
    alloc_path: &Path,
    seed: Option<u64>,
    snr_db: f64,
    tol: f64,
    dump: bool,
) -> Result<Output, Failure> {
    let config = load_config(arg)?;
    let alloc = load_allocation(alloc_path)?;
    let seed = default_seed(seed)?;
    if !snr_db.is_finite() || tol.is_nan() || tol <= 0.0 {
        return Err(Failure::Usage(
            "--snr-db must be finite and --tol positive".into(),
        ));
    }
    let real = sample_channel(&config, seed, 10f64.powf(snr_db / 10.0), 1.0)
        .map_err(|e| Failure::Failed(e.to_string()))?;
    let set = design_beamformers(&real, &alloc).map_err(|e| match e {
        BeamformerError::InvalidParameter(m) => Failure::Usage(m),
        other => Failure::Failed(other.to_string()),
    })?;
    let report = verify_beamformers(&real, &alloc, &set, tol);
    let rates = match stream_rates(&config, &real, &alloc, &set, Some(&report)) {
        Ok(rates) => json!(rates
            .iter()
            .map(|r| json!({
                "stream_id": r.stream_id(),
                "kind": r.kind,
                "streams": r.streams,
                "snr_db": r.snr_db,
                "rate": r.rate,
            }))
            .collect::<Vec<_>>()),
        Err(LinkError::UnverifiedDesign) => Value::Null,
        Err(e) => return Err(Failure::Failed(e.to_string())),
    };
    let m = manifest(
        cli,
        "beamform",
        Some(&config),
        "json",
        json!({
            "alloc": alloc_path.display().to_string(),
            "allocation": serde_json::from_str::<Value>(&alloc.to_json()).expect("allocation JSON"),
            "seed": seed,
            "snr_db": snr_db,
            "tol": tol,
            "dump_matrices": dump,
        }),
    );
    let mut fields = vec![
        (
            "verification",
            json!({ "passed": report.passed(), "gamma": report.gamma, "checks": report.checks }),
        ),
        ("rates", rates),
    ];
    if dump {
        fields.push(("matrices", dump_matrices(&real, &set)));
    }
    Ok(Output {
        body: json_document(m, fields),
        ok: report.passed(),
    })
}

fn simulate(
    cli: &Cli,
    arg: &ConfigArg,
    alloc_path: &Path,
    count: u64,
    seed: Option<u64>,
    grid: &[f64],
) -> Result<Output, Failure> {
    let config = load_config(arg)?;
    let alloc = load_allocation(alloc_path)?;
    let base = default_seed(seed)?;
    if count == 0 {
        return Err(Failure::Usage("--seeds must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..count).map(|k| base.wrapping_add(k)).collect();
    let report = estimate_dof_slopes(&config, &alloc, grid, &seeds).map_err(|e| match e {
        LinkError::InvalidGrid(_) => Failure::Usage(e.to_string()),
        other => Failure::Failed(other.to_string()),
    })?;
    let m = manifest(
        cli,
        "simulate",
        Some(&config),
        "csv",
        json!({
            "alloc": alloc_path.display().to_string(),
            "allocation": serde_json::from_str::<Value>(&alloc.to_json()).expect("allocation JSON"),
            "seeds": seeds,
            "snr_db_list": grid,
        }),
    );
    let mut body = comment_header(&m);
    for (asked, used) in &report.reseeded {
        writeln!(body, "# reseeded: {asked} -> {used}").expect("String write");
    }
    body.push_str(&report.to_csv());
    Ok(Output {
        body,
        ok: report.all_within_tolerance(),
    })
}

/// Rows `(series, M1, M2, M3, tau, sum_dof)` of a figure.
pub fn figure_rows(fig5: bool) -> Vec<(String, [u32; 3], Rational, Rational)> {
    let mut rows = Vec::new();
    let one = Rational::one();
    if fig5 {
        for tau in [Rational::zero(), Rational::new(1, 4), Rational::one()] {
            for m3 in 0..=10 {
                let m = [10, 7, m3];
                rows.push((
                    format!("tau={tau}"),
                    m,
                    tau.clone(),
                    sum_dof_closed_form(m, &tau),
                ));
            }
        }
        for m3 in 0..=10 {
            let m = [10, 7, m3];
            rows.push((
                "nonintermittent".into(),
                m,
                one.clone(),
                sum_dof_nonintermittent(m),
            ));
        }
    } else {
        let tau = Rational::new(7, 10);
        for m2 in [2, 5, 9] {
            for m3 in 0..=10 {
                let m = [10, m2, m3];
                rows.push((
                    format!("M2={m2} intermittent"),
                    m,
                    tau.clone(),
                    sum_dof_closed_form(m, &tau),
                ));
            }
            for m3 in 0..=10 {
                let m = [10, m2, m3];
                rows.push((
                    format!("M2={m2} nonintermittent"),
                    m,
                    one.clone(),
                    sum_dof_nonintermittent(m),
                ));
            }
        }
    }
    rows
}

fn figure(cli: &Cli, id: FigureId) -> Result<Output, Failure> {
    let name = id
        .to_possible_value()
        .expect("named figure")
        .get_name()
        .to_string();
    let m = manifest(cli, "figure", None, "csv", json!({ "id": name }));
    let mut body = comment_header(&m);
    body.push_str("series,M1,M2,M3,tau,sum_dof\n");
    for (series, [m1, m2, m3], tau, value) in figure_rows(id == FigureId::Fig5) {
        writeln!(
            body,
            "{series},{m1},{m2},{m3},{},{}",
            tau.to_decimal_string(),
            value.to_decimal_string()
        )
        .expect("String write");
    }
    Ok(Output { body, ok: true })
}

fn compare_bounds(cli: &Cli, arg: &ConfigArg) -> Result<Output, Failure> {
    let config = load_config(arg)?;
    let cutset = max_sum(&build_cutset_region(&config))?;
    let genie = max_sum(&build_genie_outer_region(&config))?;
    let inner = max_sum(&build_inner_region(&config))?;
    let formula = sum_dof_formula(&config);
    let m = manifest(cli, "compare-bounds", Some(&config), "json", json!({}));
    let body = json_document(
        m,
        vec![
            ("cutset_max_sum", rational_json(&cutset)),
            ("genie_max_sum", rational_json(&genie)),
            ("inner_max_sum", rational_json(&inner)),
            ("formula", rational_json(&formula)),
            ("genie_tight", json!(genie == formula)),
            (
                "d31_decode_forward",
                rational_json(&d31_decode_forward(&config)),
            ),
            (
                "d31_nonadaptive_cap",
                rational_json(&d31_nonadaptive_cap(&config)),
            ),
        ],
    );
    Ok(Output { body, ok: true })
}
