//! Command-line front end. Every subcommand writes one output document (CSV
//! with `#` header lines, or JSON) carrying a [`RunManifest`].

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::admissibility::{analyze, GrowthSpec, Outcome, Verdict};
use crate::degiorgi::{iterate, iterate_sampled, DecayParams, IterationTrace};
use crate::error::{Error, Result};
use crate::harness::{boundedness_sweep, convexity_witness, discretize, growth_envelope, minimize, quasi_min_check, ProblemConfig, SweepOptions};
use crate::norms::{luxemburg_norm, modular};
use crate::sampled::SampledFunction;
use crate::sobolev::sobolev_conjugate;
use crate::young::{log_points, parse_function, YoungFunction, HORIZON};

/// Exit code for errors in `analyze`, kept apart from the verdict codes 0..=3.
pub const ANALYZE_ERROR: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "orlicz", version, about = "Orlicz growth toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GlobalOpts {
    /// Relative quadrature tolerance recorded in the manifest.
    #[arg(long = "tol-quad", global = true, default_value_t = 1e-10)]
    tol_quad: f64,
    /// Upper end of tabulation grids.
    #[arg(long, global = true, default_value_t = 1e6)]
    horizon: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a growth envelope (exit 0 admissible, 1 not, 2 boundary, 3 trivially bounded).
    Analyze {
        #[arg(long = "A")]
        a: String,
        #[arg(long = "B")]
        b: String,
        #[arg(long = "E")]
        e: Option<String>,
        #[arg(long)]
        n: usize,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long = "Q", default_value_t = 1.0)]
        q: f64,
    },
    /// Tabulate the Young conjugate.
    Conjugate {
        #[arg(long = "A")]
        a: String,
        #[arg(long, default_value_t = 1e-3)]
        lo: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Tabulate the Sobolev conjugate `A_n`.
    SobolevConjugate {
        #[arg(long = "A")]
        a: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        lo: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Luxemburg norm and modulars of a sampled field.
    Norm {
        #[arg(long = "A")]
        a: String,
        /// Field CSV written by `SampledFunction::write_csv`.
        #[arg(long)]
        field: PathBuf,
    },
    /// Decay iteration, worst-case or driven by a field's level energies.
    Iterate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: f64,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value_t = 2.0)]
        c2: f64,
        #[arg(long = "cB", default_value_t = 1.0)]
        c_b: f64,
        #[arg(long = "K", default_value_t = 1.0)]
        k: f64,
        /// Start value; defaults to `j0-factor * eps0`.
        #[arg(long = "J0")]
        j0: Option<f64>,
        #[arg(long = "j0-factor", default_value_t = 1.0)]
        j0_factor: f64,
        #[arg(long, default_value_t = 60)]
        steps: usize,
        /// Drive the trace by the level energies of this field instead.
        #[arg(long, requires = "a")]
        field: Option<PathBuf>,
        #[arg(long = "A")]
        a: Option<String>,
    },
    /// Minimize a configured functional and write the nodal solution.
    Minimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "quasi-trials", default_value_t = 100)]
        quasi_trials: usize,
    },
    /// Interior sup versus refinement for power-growth pairs.
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "8,16")]
        refinements: Vec<usize>,
        #[arg(long)]
        boundary: Option<String>,
        #[arg(long)]
        theta: Option<String>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long = "max-iters", default_value_t = 20_000)]
        max_iters: usize,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

/// Provenance embedded in every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub inputs: Vec<InputDigest>,
    pub tol_quad: f64,
    pub horizon: f64,
    pub seed: u64,
    pub threads: usize,
    pub parameters: serde_json::Value,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of a function argument: file contents when it names a file, else the text.
fn digest_arg(name: &str, arg: &str) -> InputDigest {
    let path = Path::new(arg.strip_prefix('@').unwrap_or(arg));
    let bytes = match std::fs::read(path) {
        Ok(b) if !arg.trim_start().starts_with('{') => b,
        _ => arg.as_bytes().to_vec(),
    };
    InputDigest { name: name.to_string(), sha256: sha256_hex(&bytes) }
}

fn digest_file(name: &str, path: &Path) -> Result<InputDigest> {
    let bytes = std::fs::read(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
    Ok(InputDigest { name: name.to_string(), sha256: sha256_hex(&bytes) })
}

struct Output {
    manifest: RunManifest,
    notes: Vec<(String, String)>,
    body: Body,
}

enum Body {
    Csv(Vec<u8>),
    Json(serde_json::Value),
}

fn csv_body<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn render(out: &Output) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match &out.body {
        Body::Csv(body) => {
            writeln!(buf, "# manifest: {}", serde_json::to_string(&out.manifest)?)?;
            for (k, v) in &out.notes {
                writeln!(buf, "# {k}: {v}")?;
            }
            buf.extend_from_slice(body);
        }
        Body::Json(v) => {
            let mut doc = serde_json::json!({ "manifest": out.manifest });
            for (k, val) in &out.notes {
                doc[k] = serde_json::Value::String(val.clone());
            }
            doc["result"] = v.clone();
            serde_json::to_writer_pretty(&mut buf, &doc)?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

#[derive(Serialize)]
struct TableRow {
    t: f64,
    value: f64,
    conjugate: f64,
}

#[derive(Serialize)]
struct SobolevRow {
    t: f64,
    value: f64,
    sobolev_conjugate: f64,
}

fn manifest(g: &GlobalOpts, sub: &str, inputs: Vec<InputDigest>, parameters: serde_json::Value) -> RunManifest {
    RunManifest {
        subcommand: sub.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs,
        tol_quad: g.tol_quad,
        horizon: g.horizon,
        seed: g.seed,
        threads: g.threads,
        parameters,
    }
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Admissible => "admissible",
        Outcome::NotAdmissible => "not admissible",
        Outcome::Boundary => "boundary",
        Outcome::TriviallyBounded => "trivially bounded",
    }
}

fn summary(v: &Verdict) -> String {
    let mut s = format!("outcome: {}", outcome_name(v.outcome));
    if let Some(r) = v.regime {
        s.push_str(&format!("; regime: {r:?}"));
    }
    for (name, c) in [("B", &v.b_check), ("E", &v.e_check)] {
        if let Some(c) = c {
            s.push_str(&format!("; {name} check {:?} (slope excess {:.4})", c.outcome, c.slope_excess));
            if let Some(cert) = &c.certificate {
                s.push_str(&format!(" with c = {} from t0 = {}", cert.c, cert.t0));
            }
        }
    }
    s
}

fn load(name: &str, arg: &str) -> Result<YoungFunction> {
    parse_function(arg).map_err(|e| match e {
        Error::InvalidSpec { field, message } => Error::InvalidSpec { field: format!("--{name} {field}"), message },
        other => other,
    })
}

fn run_analyze(g: &GlobalOpts, cmd: &Command) -> Result<(Output, i32)> {
    let Command::Analyze { a, b, e, n, l, t0, q } = cmd else { unreachable!() };
    let mut spec = GrowthSpec::new(load("A", a)?, load("B", b)?, *n);
    let mut inputs = vec![digest_arg("A", a), digest_arg("B", b)];
    if let Some(e) = e {
        spec = spec.with_e(load("E", e)?);
        inputs.push(digest_arg("E", e));
    }
    spec.l = *l;
    spec.t0 = *t0;
    spec.q = *q;
    let verdict = analyze(&spec)?;
    let code = verdict.outcome.exit_code();
    let params = serde_json::json!({ "n": n, "L": l, "t0": t0, "Q": q });
    let text = summary(&verdict);
    eprintln!("{text}");
    Ok((
        Output {
            manifest: manifest(g, "analyze", inputs, params),
            notes: vec![("summary".into(), text)],
            body: Body::Json(serde_json::to_value(&verdict)?),
        },
        code,
    ))
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Error::Domain(format!("need 0 < lo < horizon and at least two points, got [{lo}, {hi}] x {points}")));
    }
    Ok(log_points(lo, hi, points))
}

fn run_conjugate(g: &GlobalOpts, cmd: &Command) -> Result<Output> {
    let Command::Conjugate { a, lo, points } = cmd else { unreachable!() };
    let y = load("A", a)?;
    let conj = y.conjugate()?;
    let rows: Vec<TableRow> = grid(*lo, g.horizon, *points)?
        .into_iter()
        .map(|t| TableRow { t, value: y.value(t), conjugate: conj.value(t) })
        .collect();
    Ok(Output {
        manifest: manifest(g, "conjugate", vec![digest_arg("A", a)], serde_json::json!({ "lo": lo, "points": points })),
        notes: vec![("function".into(), y.describe())],
        body: Body::Csv(csv_body(&rows)?),
    })
}

fn run_sobolev(g: &GlobalOpts, cmd: &Command) -> Result<Output> {
    let Command::SobolevConjugate { a, n, lo, points } = cmd else { unreachable!() };
    let y = load("A", a)?;
    let sc = sobolev_conjugate(&y, *n)?;
    let rows: Vec<SobolevRow> = grid(*lo, g.horizon.min(HORIZON), *points)?
        .into_iter()
        .map(|t| SobolevRow { t, value: y.value(t), sobolev_conjugate: sc.value(t) })
        .collect();
    Ok(Output {
        manifest: manifest(g, "sobolev-conjugate", vec![digest_arg("A", a)], serde_json::json!({ "n": n, "lo": lo, "points": points })),
        notes: vec![("function".into(), y.describe())],
        body: Body::Csv(csv_body(&rows)?),
    })
}

fn run_norm(g: &GlobalOpts, cmd: &Command) -> Result<Output> {
    let Command::Norm { a, field } = cmd else { unreachable!() };
    let y = load("A", a)?;
    let u = SampledFunction::read_csv(field)?;
    let norm = luxemburg_norm(&y, &u)?;
    let value_modular = modular(&y, &u, false)?;
    let gradient_modular = modular(&y, &u, true).ok();
    let result = serde_json::json!({
        "norm": norm.norm,
        "modular_at_norm": norm.modular,
        "value_modular": value_modular,
        "gradient_modular": gradient_modular,
        "nodes": u.len(),
        "measure": u.measure(),
    });
    Ok(Output {
        manifest: manifest(g, "norm", vec![digest_arg("A", a), digest_file("field", field)?], serde_json::json!({})),
        notes: vec![],
        body: Body::Json(result),
    })
}

fn trace_notes(t: &IterationTrace) -> Vec<(String, String)> {
    vec![
        ("verdict".into(), serde_json::to_string(&t.verdict).unwrap_or_default()),
        ("gamma".into(), format!("{}", t.gamma)),
        ("tau".into(), format!("{:e}", t.tau)),
        ("eps0".into(), format!("{:e}", t.eps0)),
        ("overflow".into(), format!("{:?}", t.overflow)),
    ]
}

fn run_iterate(g: &GlobalOpts, cmd: &Command) -> Result<Output> {
    let Command::Iterate { n, q, l, c2, c_b, k, j0, j0_factor, steps, field, a } = cmd else { unreachable!() };
    let params = DecayParams::with_constants(*n, *q, *l, *c2, *c_b)?;
    let mut inputs = vec![];
    let trace = match (field, a) {
        (Some(f), Some(a)) => {
            inputs.push(digest_arg("A", a));
            inputs.push(digest_file("field", f)?);
            let u = SampledFunction::read_csv(f)?;
            iterate_sampled(&u, &load("A", a)?, *k, &params, *steps)?
        }
        _ => iterate(j0.unwrap_or(j0_factor * params.eps0()), &params, *k, *steps)?,
    };
    let p = serde_json::json!({ "n": n, "q": q, "L": l, "c2": c2, "cB": c_b, "K": k, "J0": j0, "j0_factor": j0_factor, "steps": steps });
    Ok(Output { manifest: manifest(g, "iterate", inputs, p), notes: trace_notes(&trace), body: Body::Csv(csv_body(&trace.rows())?) })
}

#[derive(Serialize)]
struct NodeRow {
    index: usize,
    x: String,
    value: f64,
}

fn run_minimize(g: &GlobalOpts, cmd: &Command) -> Result<Output> {
    let Command::Minimize { config, quasi_trials } = cmd else { unreachable!() };
    let cfg = ProblemConfig::load(config)?;
    let problem = discretize(&cfg.functional()?, cfg.cells)?;
    let m = minimize(&problem, cfg.tol, cfg.max_iters)?;
    let quasi = quasi_min_check(&problem, &m.nodes, 1.0 + 1e-6, *quasi_trials, g.seed)?;
    let convex = convexity_witness(&problem, 20, g.seed);
    let envelope = growth_envelope(&problem, &m.nodes, 1.0);
    let rows: Vec<NodeRow> = (0..problem.node_count())
        .map(|i| NodeRow {
            index: i,
            x: problem.node(i).iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" "),
            value: m.nodes[i],
        })
        .collect();
    let notes = vec![
        ("energy".into(), format!("{}", m.energy)),
        ("converged".into(), format!("{}", m.converged)),
        ("iterations".into(), format!("{}", m.iterations)),
        ("quasi_min".into(), serde_json::to_string(&quasi)?),
        ("convexity".into(), serde_json::to_string(&convex)?),
        ("envelope".into(), serde_json::to_string(&envelope)?),
    ];
    Ok(Output {
        manifest: manifest(g, "minimize", vec![digest_file("config", config)?], serde_json::to_value(&cfg)?),
        notes,
        body: Body::Csv(csv_body(&rows)?),
    })
}

fn run_sweep(g: &GlobalOpts, cmd: &Command) -> Result<Output> {
    let Command::Sweep { n, p, q, refinements, boundary, theta, tol, max_iters } = cmd else { unreachable!() };
    if p.is_empty() || q.is_empty() || refinements.is_empty() {
        return Err(Error::Config("sweep needs non-empty --p, --q and --refinements".into()));
    }
    let mut opts = SweepOptions { tol: *tol, max_iters: *max_iters, ..SweepOptions::default() };
    if let Some(b) = boundary {
        opts.boundary = b.clone();
    }
    if let Some(t) = theta {
        opts.theta = t.clone();
    }
    let rows = boundedness_sweep(*n, p, q, refinements, &opts)?;
    let params = serde_json::json!({
        "n": n, "p": p, "q": q, "refinements": refinements,
        "boundary": opts.boundary, "theta": opts.theta, "tol": tol, "max_iters": max_iters,
    });
    Ok(Output { manifest: manifest(g, "sweep", vec![], params), notes: vec![], body: Body::Csv(csv_body(&rows)?) })
}

fn dispatch(cli: &Cli) -> Result<(Output, i32)> {
    let g = &cli.global;
    match &cli.command {
        c @ Command::Analyze { .. } => run_analyze(g, c),
        c @ Command::Conjugate { .. } => run_conjugate(g, c).map(|o| (o, 0)),
        c @ Command::SobolevConjugate { .. } => run_sobolev(g, c).map(|o| (o, 0)),
        c @ Command::Norm { .. } => run_norm(g, c).map(|o| (o, 0)),
        c @ Command::Iterate { .. } => run_iterate(g, c).map(|o| (o, 0)),
        c @ Command::Minimize { .. } => run_minimize(g, c).map(|o| (o, 0)),
        c @ Command::Sweep { .. } => run_sweep(g, c).map(|o| (o, 0)),
    }
}

fn emit(out: &Output, path: Option<&Path>) -> Result<()> {
    let bytes = render(out)?;
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let analyzing = argv.iter().skip(1).any(|a| a == "analyze");
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match (e.use_stderr(), analyzing) {
                (false, _) => 0,
                (true, true) => ANALYZE_ERROR,
                (true, false) => 1,
            };
        }
    };
    let error_code = if matches!(cli.command, Command::Analyze { .. }) { ANALYZE_ERROR } else { 1 };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return error_code;
        }
    };
    let result = pool.install(|| dispatch(&cli)).and_then(|(out, code)| emit(&out, cli.global.out.as_deref()).map(|_| code));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code
        }
    }
}
