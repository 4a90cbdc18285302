//! Command-line front end.
//!
//! Exit codes: 0 success, 1 inconsistent probe, 2 parse/usage error,
//! 3 domain error, 4 unwritable output, 5 truncation tolerance exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::experiments::{self, DilationSetup, ExperimentError, Family, ProbeFamily, ProbeReport};
use crate::grid::{GridError, GridSpec, SampledFunction};
use crate::indices::{
    self, fmt_q, parse_q, BesovDirection, ExtendedExponent, IndexError, MultiplierDirection, Smoothness, Q,
};
use crate::norms::{self, DyadicWindow, NormError, Truncation, Window, WindowKind};

pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_UNWRITABLE: i32 = 4;
pub const EXIT_TRUNCATION: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn parse(message: impl Into<String>) -> Self {
        Self::new(EXIT_PARSE, message)
    }

    fn unwritable(path: &Path, err: impl std::fmt::Display) -> Self {
        Self::new(EXIT_UNWRITABLE, format!("cannot write {}: {err}", path.display()))
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::Parse(_) | IndexError::ExponentOutOfRange(_) => Self::parse(e.to_string()),
            _ => Self::new(EXIT_DOMAIN, e.to_string()),
        }
    }
}

impl From<NormError> for CliError {
    fn from(e: NormError) -> Self {
        match e {
            NormError::Truncation { .. } => Self::new(EXIT_TRUNCATION, e.to_string()),
            NormError::Grid(g) => g.into(),
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::Aliasing { .. } | GridError::DyadicBeyondNyquist { .. } => Self::new(EXIT_DOMAIN, e.to_string()),
            _ => Self::parse(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Norm(n) => n.into(),
            ExperimentError::Index(i) => i.into(),
            ExperimentError::Grid(g) => g.into(),
            other => Self::new(EXIT_DOMAIN, other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "modlab", version, about = "Embeddings between modulation, Besov and L^p-Sobolev spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide an embedding or multiplier bound exactly.
    Verdict(VerdictArgs),
    /// Write the index-region diagram (SVG) and sampled index values (CSV).
    Regions(RegionArgs),
    /// Evaluate a norm of a tabulated function.
    Norm(NormArgs),
    /// Run a batch of probes and write JSON reports plus a summary CSV.
    Experiment(ExperimentArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    #[value(name = "L-to-M")]
    LToM,
    #[value(name = "M-to-L")]
    MToL,
    #[value(name = "B-to-M")]
    BToM,
    #[value(name = "M-to-B")]
    MToB,
    #[value(name = "mult-M-to-L")]
    MultMToL,
    #[value(name = "mult-L-to-M")]
    MultLToM,
}

impl Direction {
    fn name(&self) -> &'static str {
        match self {
            Direction::LToM => "L-to-M",
            Direction::MToL => "M-to-L",
            Direction::BToM => "B-to-M",
            Direction::MToB => "M-to-B",
            Direction::MultMToL => "mult-M-to-L",
            Direction::MultLToM => "mult-L-to-M",
        }
    }
}

#[derive(Args, Debug)]
pub struct VerdictArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub q: String,
    #[arg(long, allow_hyphen_values = true)]
    pub s: String,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, value_enum)]
    pub dir: Direction,
    /// Accept decimals, rounding them to nearby rationals with a warning.
    #[arg(long)]
    pub approx: bool,
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    /// Samples per unit along each axis of the (1/p, 1/q) square.
    #[arg(long, default_value_t = 12)]
    pub resolution: u32,
    /// Output directory for regions.svg and regions.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    #[value(name = "L")]
    Lebesgue,
    #[value(name = "sobolev")]
    Sobolev,
    #[value(name = "M")]
    Modulation,
    #[value(name = "B")]
    Besov,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    Hat,
    SmoothedHat,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    /// Tabulated function as written by `SampledFunction::write_csv`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub space: SpaceArg,
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub s: String,
    /// Keep bands with |k|_∞ ≤ R (or j ≤ R); fail if the tail is too large.
    #[arg(long)]
    pub radius: Option<usize>,
    #[arg(long, value_enum, default_value = "hat")]
    pub window: WindowArg,
    #[arg(long)]
    pub approx: bool,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// JSON run configuration; flags below are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<ProbeKind>,
    #[arg(long)]
    pub family: Option<String>,
    /// Comma-separated exponents.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Comma-separated dilation factors (rationals).
    #[arg(long)]
    pub lambdas: Option<String>,
    #[arg(long = "grid-N")]
    pub grid_n: Option<usize>,
    #[arg(long = "box-L")]
    pub box_l: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_timestamp: bool,
    #[arg(long)]
    pub approx: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Dilation,
    Embedding,
    Multiplier,
}

/// Batch run description. Rationals are strings (`num/den` or `infty`);
/// unknown keys are rejected.
#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<ProbeKind>,
    pub family: Option<String>,
    #[serde(default)]
    pub p: Vec<String>,
    #[serde(default)]
    pub q: Vec<String>,
    #[serde(default)]
    pub s: Vec<String>,
    #[serde(default)]
    pub alpha: Vec<String>,
    #[serde(default)]
    pub lambdas: Vec<String>,
    pub grid_n: Option<usize>,
    pub box_l: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub timestamp: Option<bool>,
}

/// Parses `argv` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn dispatch<W: Write>(cli: Cli, out: &mut W) -> Result<i32, CliError> {
    match cli.command {
        Command::Verdict(a) => cmd_verdict(&a, out),
        Command::Regions(a) => cmd_region_diagram(&a),
        Command::Norm(a) => cmd_norm(&a, out),
        Command::Experiment(a) => cmd_experiment(&a),
    }
}

fn warn_rounded(name: &str, text: &str, value: &Q) {
    eprintln!("warning: --{name} {text} rounded to {}", fmt_q(value));
}

fn rational(name: &str, text: &str, approx: bool) -> Result<Q, CliError> {
    let (v, inexact) = parse_q(text, approx).map_err(|_| {
        CliError::parse(format!(
            "--{name}: `{text}` is not a rational (use num/den{})",
            if approx { "" } else { ", or pass --approx for decimals" }
        ))
    })?;
    if inexact {
        warn_rounded(name, text, &v);
    } else if approx && text.contains(['.', 'e', 'E']) {
        eprintln!("warning: --{name} {text} read as {}", fmt_q(&v));
    }
    Ok(v)
}

fn exponent(name: &str, text: &str, approx: bool) -> Result<ExtendedExponent, CliError> {
    let t = text.trim();
    if matches!(t, "infty" | "inf" | "∞" | "infinity") {
        return Ok(ExtendedExponent::infinity());
    }
    let v = rational(name, t, approx)?;
    ExtendedExponent::finite(v).map_err(|_| CliError::parse(format!("--{name}: exponent must lie in [1, ∞], got {t}")))
}

fn to_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(&sorted(v.clone())).expect("json")
}

/// Rebuilds every object with its keys in lexicographic order.
pub fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, sorted(v));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}

pub fn cmd_verdict<W: Write>(a: &VerdictArgs, out: &mut W) -> Result<i32, CliError> {
    let p = exponent("p", &a.p, a.approx)?;
    let q = exponent("q", &a.q, a.approx)?;
    let s = Smoothness(rational("s", &a.s, a.approx)?);
    let alpha = a.alpha.as_deref().map(|t| rational("alpha", t, a.approx)).transpose()?;
    let n = a.n;
    let mut body = json!({
        "direction": a.dir.name(),
        "n": n,
        "p": p.to_string(),
        "q": q.to_string(),
        "s": fmt_q(&s.0),
    });
    let (verdict, matched, threshold) = match a.dir {
        Direction::LToM | Direction::MToL | Direction::BToM | Direction::MToB => {
            let v = match a.dir {
                Direction::LToM => indices::embeds_l_in_m(p, q, s, n)?,
                Direction::MToL => indices::embeds_m_in_l(p, q, s, n)?,
                Direction::BToM => indices::embeds_besov_modulation(p, q, s, n, BesovDirection::BesovToModulation)?,
                _ => indices::embeds_besov_modulation(p, q, s, n, BesovDirection::ModulationToBesov)?,
            };
            (v.label().to_string(), v.matched_condition, v.threshold)
        }
        Direction::MultMToL | Direction::MultLToM => {
            let alpha = alpha.ok_or_else(|| CliError::parse("--alpha is required for multiplier directions"))?;
            let dir = if a.dir == Direction::MultMToL {
                MultiplierDirection::ModulationToLebesgue
            } else {
                MultiplierDirection::LebesgueToModulation
            };
            let v = indices::multiplier_verdict(p, q, s, n, alpha, dir)?;
            (v.outcome.to_string(), v.matched_condition, v.threshold)
        }
    };
    if let Some(al) = alpha {
        body["alpha"] = json!(fmt_q(&al));
    }
    body["verdict"] = json!(verdict);
    body["matched_condition"] = json!(matched);
    body["threshold"] = json!(fmt_q(&threshold));
    writeln!(out, "{}", to_pretty(&body)).map_err(|e| CliError::new(EXIT_UNWRITABLE, e.to_string()))?;
    Ok(0)
}

/// Boundary polylines of the unstarred and starred regions in `(1/p, 1/q)`.
const UNSTARRED: [&[(f64, f64)]; 2] = [&[(0.0, 1.0), (0.5, 0.5), (1.0, 1.0)], &[(0.5, 0.0), (0.5, 0.5)]];
const STARRED: [&[(f64, f64)]; 2] = [&[(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)], &[(0.0, 0.5), (1.0, 0.5)]];

pub fn region_svg() -> String {
    let size = 400.0;
    let pad = 40.0;
    let map = |(u, v): (f64, f64)| (pad + u * size, pad + (1.0 - v) * size);
    let polyline = |pts: &[(f64, f64)], colour: &str, dash: &str| {
        let coords: Vec<String> = pts
            .iter()
            .map(|&pt| {
                let (x, y) = map(pt);
                format!("{x},{y}")
            })
            .collect();
        format!(
            "    <polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\"{dash}/>\n",
            coords.join(" ")
        )
    };
    let mut s = String::new();
    let total = size + 2.0 * pad;
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{total}\" height=\"{total}\" viewBox=\"0 0 {total} {total}\">\n"
    ));
    s.push_str(&format!(
        "  <rect x=\"{pad}\" y=\"{pad}\" width=\"{size}\" height=\"{size}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    s.push_str("  <g id=\"unstarred\">\n");
    for pts in UNSTARRED {
        s.push_str(&polyline(pts, "#1f4e9c", ""));
    }
    s.push_str("  </g>\n  <g id=\"starred\">\n");
    for pts in STARRED {
        s.push_str(&polyline(pts, "#b5332b", " stroke-dasharray=\"6 4\""));
    }
    s.push_str("  </g>\n");
    let labels = [
        ((0.5, 0.82), "I1"),
        ((0.2, 0.3), "I2"),
        ((0.8, 0.3), "I3"),
        ((0.5, 0.18), "I1*"),
        ((0.8, 0.7), "I2*"),
        ((0.2, 0.7), "I3*"),
    ];
    for ((u, v), t) in labels {
        let (x, y) = map((u, v));
        s.push_str(&format!("  <text x=\"{x}\" y=\"{y}\" font-size=\"14\" text-anchor=\"middle\">{t}</text>\n"));
    }
    let (x, y) = map((0.5, 0.0));
    s.push_str(&format!(
        "  <text x=\"{x}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">1/p</text>\n",
        y + 28.0
    ));
    let (x, y) = map((0.0, 0.5));
    s.push_str(&format!(
        "  <text x=\"{}\" y=\"{y}\" font-size=\"14\" text-anchor=\"middle\">1/q</text>\n",
        x - 22.0
    ));
    s.push_str("</svg>\n");
    s
}

/// Rows `(1/p, 1/q, ν₁, ν₂, μ₁, μ₂)` on the grid `{i/r}²`, 1/p slowest.
pub fn region_rows(resolution: u32) -> Result<Vec<[Q; 6]>, IndexError> {
    let r = resolution as i128;
    let mut rows = Vec::new();
    for i in 0..=r {
        for j in 0..=r {
            let pair = indices::IndexPair::new(Q::new(i, r), Q::new(j, r))?;
            rows.push([
                pair.u,
                pair.v,
                indices::nu1_at(pair)?,
                indices::nu2_at(pair)?,
                indices::mu1_at(pair)?,
                indices::mu2_at(pair)?,
            ]);
        }
    }
    Ok(rows)
}

pub fn cmd_region_diagram(a: &RegionArgs) -> Result<i32, CliError> {
    if a.resolution < 8 {
        return Err(CliError::parse(format!("--resolution must be at least 8, got {}", a.resolution)));
    }
    let rows = region_rows(a.resolution)?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::unwritable(&a.out, e))?;
    let svg_path = a.out.join("regions.svg");
    fs::write(&svg_path, region_svg()).map_err(|e| CliError::unwritable(&svg_path, e))?;
    let csv_path = a.out.join("regions.csv");
    let file = fs::File::create(&csv_path).map_err(|e| CliError::unwritable(&csv_path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let write = |w: &mut csv::Writer<fs::File>| -> Result<(), csv::Error> {
        w.write_record(["inv_p", "inv_q", "nu1", "nu2", "mu1", "mu2"])?;
        for row in &rows {
            w.write_record(row.iter().map(fmt_q))?;
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(|e| CliError::unwritable(&csv_path, e))?;
    Ok(0)
}

pub fn cmd_norm<W: Write>(a: &NormArgs, out: &mut W) -> Result<i32, CliError> {
    let p = exponent("p", &a.p, a.approx)?;
    let s_q = rational("s", &a.s, a.approx)?;
    let s = indices::ratio_to_f64(&s_q);
    let file = fs::File::open(&a.input)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", a.input.display())))?;
    let f = SampledFunction::read_csv(BufReader::new(file))?;
    let truncation = a.radius.map(Truncation::Radius).unwrap_or_default();
    let need_q = || -> Result<ExtendedExponent, CliError> {
        let t = a.q.as_deref().ok_or_else(|| CliError::parse("--q is required for M and B"))?;
        exponent("q", t, a.approx)
    };
    let report = match a.space {
        SpaceArg::Lebesgue => norms::lebesgue_report(&f, p),
        SpaceArg::Sobolev => norms::sobolev_report(&f, p, s)?,
        SpaceArg::Modulation => {
            let kind = match a.window {
                WindowArg::Hat => WindowKind::Hat,
                WindowArg::SmoothedHat => WindowKind::SmoothedHat,
            };
            let w = Window::new(kind, f.spec().dim());
            norms::modulation_norm_truncated(&f, p, need_q()?, s, &w, truncation)?
        }
        SpaceArg::Besov => norms::besov_norm_truncated(&f, p, need_q()?, s, &DyadicWindow::new(), truncation)?,
    };
    let v = serde_json::to_value(&report).expect("json");
    writeln!(out, "{}", to_pretty(&v)).map_err(|e| CliError::new(EXIT_UNWRITABLE, e.to_string()))?;
    Ok(0)
}

fn split_list(text: &str) -> Vec<String> {
    text.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

fn config_from_flags(a: &ExperimentArgs) -> RunConfig {
    RunConfig {
        command: a.kind,
        family: a.family.clone(),
        p: a.p.as_deref().map(split_list).unwrap_or_default(),
        q: a.q.as_deref().map(split_list).unwrap_or_default(),
        s: a.s.as_deref().map(split_list).unwrap_or_default(),
        alpha: a.alpha.as_deref().map(split_list).unwrap_or_default(),
        lambdas: a.lambdas.as_deref().map(split_list).unwrap_or_default(),
        grid_n: a.grid_n,
        box_l: a.box_l.clone(),
        out: a.out.clone(),
        seed: a.seed,
        timestamp: None,
    }
}

fn exponents(name: &str, list: &[String], approx: bool) -> Result<Vec<ExtendedExponent>, CliError> {
    let mut v: Vec<ExtendedExponent> = list.iter().map(|t| exponent(name, t, approx)).collect::<Result<_, _>>()?;
    // ascending p is descending 1/p
    v.sort_by(|a, b| b.cmp(a));
    v.dedup();
    Ok(v)
}

fn rationals(name: &str, list: &[String], approx: bool) -> Result<Vec<Q>, CliError> {
    let mut v: Vec<Q> = list.iter().map(|t| rational(name, t, approx)).collect::<Result<_, _>>()?;
    v.sort();
    v.dedup();
    Ok(v)
}

fn empty_grid(name: &str) -> CliError {
    CliError::parse(format!("empty parameter grid: no values for {name}"))
}

pub fn cmd_experiment(a: &ExperimentArgs) -> Result<i32, CliError> {
    let (cfg, approx) = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
            let cfg: RunConfig =
                serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
            (cfg, a.approx)
        }
        None => (config_from_flags(a), a.approx),
    };
    let kind = cfg.command.ok_or_else(|| CliError::parse("no experiment kind given (--kind or \"command\")"))?;
    let out_dir = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::parse("no output directory given (--out or \"out\")"))?;
    let timestamp = !a.no_timestamp && cfg.timestamp.unwrap_or(true);
    let seed = cfg.seed.unwrap_or(experiments::DEFAULT_SEED);
    let lambdas: Vec<f64> = if cfg.lambdas.is_empty() {
        DilationSetup::standard().lambdas
    } else {
        let mut v: Vec<f64> = cfg
            .lambdas
            .iter()
            .map(|t| rational("lambdas", t, approx).map(|q| indices::ratio_to_f64(&q)))
            .collect::<Result<_, _>>()?;
        v.sort_by(|x, y| x.total_cmp(y));
        v.dedup();
        v
    };
    let ps = exponents("p", &cfg.p, approx)?;
    if ps.is_empty() {
        return Err(empty_grid("p"));
    }
    let family = cfg.family.as_deref().unwrap_or("gaussian");
    let mut reports: Vec<ProbeReport> = Vec::new();
    match kind {
        ProbeKind::Dilation => {
            let qs = exponents("q", &cfg.q, approx)?;
            if qs.is_empty() {
                return Err(empty_grid("q"));
            }
            let mut setup = DilationSetup::standard().with_lambdas(lambdas);
            if cfg.grid_n.is_some() || cfg.box_l.is_some() {
                let n = cfg.grid_n.unwrap_or(setup.spec.samples());
                let l = match &cfg.box_l {
                    Some(t) => indices::ratio_to_f64(&rational("box-L", t, approx)?),
                    None => setup.spec.box_len(),
                };
                setup.spec = GridSpec::new(1, n, l)?;
            }
            let family: Family = family.parse()?;
            let points: Vec<(ExtendedExponent, ExtendedExponent)> =
                ps.iter().flat_map(|&p| qs.iter().map(move |&q| (p, q))).collect();
            reports = experiments::dilation_sweep(family, &points, &setup)?;
        }
        ProbeKind::Embedding => {
            let qs = exponents("q", &cfg.q, approx)?;
            let ss = rationals("s", &cfg.s, approx)?;
            if qs.is_empty() {
                return Err(empty_grid("q"));
            }
            if ss.is_empty() {
                return Err(empty_grid("s"));
            }
            let fam = match family {
                "gabor-critical" => ProbeFamily::GaborCritical {
                    radii: vec![4, 8, 16, 32, 64],
                },
                other => ProbeFamily::Dilates {
                    family: other.parse()?,
                    lambdas: lambdas.clone(),
                },
            };
            for &p in &ps {
                for &q in &qs {
                    for &s in &ss {
                        reports.push(experiments::embedding_probe(p, q, s, 1, &fam)?);
                    }
                }
            }
        }
        ProbeKind::Multiplier => {
            let ss = if cfg.s.is_empty() { vec![Q::from_integer(0)] } else { rationals("s", &cfg.s, approx)? };
            let alphas = rationals("alpha", &cfg.alpha, approx)?;
            if alphas.is_empty() {
                return Err(empty_grid("alpha"));
            }
            for &p in &ps {
                for &al in &alphas {
                    for &s in &ss {
                        reports.push(experiments::multiplier_loss_experiment(p, al, s, &lambdas)?);
                    }
                }
            }
        }
    }
    for r in reports.iter_mut() {
        r.seed = Some(seed);
    }
    write_reports(&out_dir, &reports, timestamp)?;
    let all_consistent = reports.iter().all(|r| r.verdict_consistency);
    Ok(if all_consistent { 0 } else { EXIT_INCONSISTENT })
}

fn write_reports(dir: &Path, reports: &[ProbeReport], timestamp: bool) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::unwritable(dir, e))?;
    let generated = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    for (i, r) in reports.iter().enumerate() {
        let mut v = serde_json::to_value(r).expect("json");
        if timestamp {
            v["generated_unix"] = json!(generated);
        }
        let path = dir.join(format!("probe-{:03}.json", i + 1));
        fs::write(&path, to_pretty(&v) + "\n").map_err(|e| CliError::unwritable(&path, e))?;
    }
    let path = dir.join("summary.csv");
    let file = fs::File::create(&path).map_err(|e| CliError::unwritable(&path, e))?;
    experiments::write_summary_csv(reports, file).map_err(|e| CliError::unwritable(&path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verdict(args: &[&str]) -> Result<Value, CliError> {
        let mut argv = vec!["modlab", "verdict"];
        argv.extend_from_slice(args);
        let cli = Cli::try_parse_from(argv).map_err(|e| CliError::parse(e.to_string()))?;
        let mut buf = Vec::new();
        dispatch(cli, &mut buf)?;
        Ok(serde_json::from_slice(&buf).unwrap())
    }

    #[test]
    fn verdict_examples() {
        let v = verdict(&["--p", "2", "--q", "1", "--s", "0", "--dir", "M-to-L"]).unwrap();
        assert_eq!(v["verdict"], "Embeds");
        assert_eq!(v["matched_condition"], "Thm1.4(1)");
        let v = verdict(&["--p", "1", "--q", "infty", "--s", "0", "--dir", "L-to-M"]).unwrap();
        assert_eq!(v["verdict"], "Embeds");
        assert_eq!(v["matched_condition"], "Thm1.3(3)");
        assert_eq!(v["threshold"], "0");
        let v = verdict(&["--p", "2", "--q", "4", "--s", "-1/4", "--dir", "M-to-L"]).unwrap();
        assert_eq!(v["verdict"], "DoesNotEmbed");
        assert_eq!(v["threshold"], "-1/4");
    }

    #[test]
    fn verdict_errors() {
        assert_eq!(verdict(&["--p", "0.5", "--q", "1", "--s", "0", "--dir", "M-to-L"]).unwrap_err().code, 2);
        assert_eq!(
            verdict(&["--p", "0.5", "--q", "1", "--s", "0", "--dir", "M-to-L", "--approx"]).unwrap_err().code,
            2
        );
        assert_eq!(verdict(&["--p", "2", "--q", "1", "--s", "0.25", "--dir", "M-to-L"]).unwrap_err().code, 2);
        assert_eq!(verdict(&["--p", "2", "--q", "1", "--s", "0", "--n", "0", "--dir", "M-to-L"]).unwrap_err().code, 3);
        assert_eq!(
            verdict(&["--p", "2", "--q", "1", "--s", "0", "--alpha", "-1", "--dir", "mult-M-to-L"]).unwrap_err().code,
            3
        );
        assert_eq!(verdict(&["--p", "2", "--q", "1", "--s", "0", "--dir", "mult-M-to-L"]).unwrap_err().code, 2);
    }

    #[test]
    fn verdict_approx_rounds() {
        let v = verdict(&["--p", "2", "--q", "1", "--s", "0.25", "--dir", "M-to-L", "--approx"]).unwrap();
        assert_eq!(v["s"], "1/4");
    }

    #[test]
    fn multiplier_verdict_output() {
        let v = verdict(&["--p", "2", "--q", "2", "--s", "0", "--alpha", "2", "--dir", "mult-M-to-L"]).unwrap();
        assert_eq!(v["alpha"], "2");
        assert!(v["verdict"] == "Bounded" || v["verdict"] == "Unbounded");
    }

    #[test]
    fn keys_are_sorted() {
        let v = sorted(json!({"b": 1, "a": {"d": 2, "c": [ {"z": 1, "y": 2} ]}}));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":{"c":[{"y":2,"z":1}],"d":2},"b":1}"#);
    }

    #[test]
    fn region_rows_match_spec_points() {
        let rows = region_rows(12).unwrap();
        let find = |u: Q, v: Q| rows.iter().find(|r| r[0] == u && r[1] == v).copied().unwrap();
        let centre = find(Q::new(1, 2), Q::new(1, 2));
        assert_eq!(centre[2], Q::from_integer(0));
        assert_eq!(centre[3], Q::from_integer(0));
        assert_eq!(centre[4], Q::new(-1, 2));
        assert_eq!(centre[5], Q::new(-1, 2));
        let corner = find(Q::from_integer(1), Q::from_integer(0));
        assert_eq!(corner[2], Q::from_integer(0));
        assert_eq!(corner[3], Q::from_integer(-1));
        assert_eq!(rows.len(), 13 * 13);
    }

    #[test]
    fn svg_has_two_boundary_groups() {
        let svg = region_svg();
        assert_eq!(svg.matches("<g ").count(), 2);
        assert!(svg.contains("id=\"starred\"") && svg.contains("id=\"unstarred\""));
    }
}
