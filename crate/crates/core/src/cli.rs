//! Command-line experiments: flag and config-file resolution, runners, output and the self-test.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::freud;
use crate::kernels::{self, KernelEval, ScalingOptions, ScalingRegime};
use crate::model::ModelParams;
use crate::orthopoly::{self, PsiEvaluator, QuadratureRule, RecurrenceData};
use crate::painleve2::{default_grid, solve_hastings_mcleod, HMGrid};
use crate::psi_cp::{self, PhiOptions};
use crate::semiclassics::{self, CompareOptions, CompareReport, Region};
use crate::table::Table;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "QCRIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "qcrit",
    version,
    about = "Quartic matrix model experiments near the critical point"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Key-value config file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recurrence coefficients of the string equation.
    Freud(FreudArgs),
    /// Hastings–McLeod table.
    Hm(HmArgs),
    /// Critical-point Φ-system on a grid.
    Phi(PhiArgs),
    /// Scaling-limit check of the Christoffel–Darboux kernel.
    Kernel(KernelArgs),
    /// Asymptotic approximants against exact ψ-functions.
    Compare(CompareArgs),
    /// Kernel density against the equilibrium density.
    Density(DensityArgs),
    /// Fast invariant suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct FreudArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long = "N")]
    pub size: Option<String>,
    #[arg(long = "n-max")]
    pub n_max: Option<String>,
    /// variational, forward or oracle.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
}

#[derive(Debug, Args)]
pub struct HmArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub ymin: Option<String>,
    #[arg(long)]
    pub ymax: Option<String>,
    #[arg(long)]
    pub mesh: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub stride: Option<String>,
}

#[derive(Debug, Args)]
pub struct PhiArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    #[arg(long)]
    pub parity: Option<String>,
    #[arg(long = "z-far")]
    pub z_far: Option<String>,
    #[arg(long)]
    pub stride: Option<String>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// bulk, edge or critical.
    #[arg(long)]
    pub regime: Option<String>,
    #[arg(long = "t-shift-y", allow_hyphen_values = true)]
    pub t_shift_y: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long = "N")]
    pub size: Option<String>,
    /// Comma-separated list of N; overrides --N.
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    #[arg(long = "offset-max")]
    pub offset_max: Option<String>,
    #[arg(long = "offset-points")]
    pub offset_points: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub sizes: Option<String>,
    /// Offset of n from λ_c N.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// Comma-separated regions or "all".
    #[arg(long)]
    pub regions: Option<String>,
    #[arg(long)]
    pub points: Option<String>,
    #[arg(long = "critical-window")]
    pub critical_window: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long = "N")]
    pub size: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub zmin: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub zmax: Option<String>,
    #[arg(long)]
    pub points: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Debug hook: relative perturbation applied to every R_n.
    #[arg(long = "perturb-r", allow_hyphen_values = true)]
    pub perturb_r: Option<String>,
    /// Debug hook: compute the recurrence on a coarse rule.
    #[arg(long = "reduced-nodes")]
    pub reduced_nodes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Freud,
    Hm,
    Phi,
    Kernel,
    Compare,
    Density,
    Selftest,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Freud => "freud",
            CommandKind::Hm => "hm",
            CommandKind::Phi => "phi",
            CommandKind::Kernel => "kernel",
            CommandKind::Compare => "compare",
            CommandKind::Density => "density",
            CommandKind::Selftest => "selftest",
        }
    }

    /// Keys and defaults; "auto" marks a value chosen at run time.
    pub fn defaults(&self) -> &'static [(&'static str, &'static str)] {
        match self {
            CommandKind::Freud => &[
                ("t", "-1"),
                ("g", "1"),
                ("N", "400"),
                ("n-max", "200"),
                ("method", "variational"),
                ("tol", "1e-12"),
            ],
            CommandKind::Hm => &[
                ("ymin", "-16"),
                ("ymax", "10"),
                ("mesh", "5200"),
                ("tol", "1e-13"),
                ("stride", "1"),
            ],
            CommandKind::Phi => &[("y", "0"), ("parity", "0"), ("z-far", "12"), ("stride", "10")],
            CommandKind::Kernel => &[
                ("regime", "bulk"),
                ("t-shift-y", "0"),
                ("g", "1"),
                ("N", "200"),
                ("sizes", "auto"),
                ("center", "auto"),
                ("offset-max", "2"),
                ("offset-points", "9"),
                ("tol", "1e-13"),
            ],
            CommandKind::Compare => &[
                ("t", "-1"),
                ("g", "1"),
                ("sizes", "100,200,400,800"),
                ("k", "0"),
                ("regions", "all"),
                ("points", "41"),
                ("critical-window", "0.5"),
                ("tol", "1e-13"),
            ],
            CommandKind::Density => &[
                ("t", "-1"),
                ("g", "1"),
                ("N", "200"),
                ("zmin", "-2.5"),
                ("zmax", "2.5"),
                ("points", "101"),
                ("tol", "1e-13"),
            ],
            CommandKind::Selftest => &[("perturb-r", "0"), ("reduced-nodes", "false")],
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            CommandKind::Kernel | CommandKind::Selftest => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidInput(format!("unknown format {s}"))),
        }
    }
}

impl Command {
    fn kind(&self) -> CommandKind {
        match self {
            Command::Freud(_) => CommandKind::Freud,
            Command::Hm(_) => CommandKind::Hm,
            Command::Phi(_) => CommandKind::Phi,
            Command::Kernel(_) => CommandKind::Kernel,
            Command::Compare(_) => CommandKind::Compare,
            Command::Density(_) => CommandKind::Density,
            Command::Selftest(_) => CommandKind::Selftest,
        }
    }

    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        match self {
            Command::Freud(a) => vec![
                ("t", a.t.clone()),
                ("g", a.g.clone()),
                ("N", a.size.clone()),
                ("n-max", a.n_max.clone()),
                ("method", a.method.clone()),
                ("tol", a.tol.clone()),
            ],
            Command::Hm(a) => vec![
                ("ymin", a.ymin.clone()),
                ("ymax", a.ymax.clone()),
                ("mesh", a.mesh.clone()),
                ("tol", a.tol.clone()),
                ("stride", a.stride.clone()),
            ],
            Command::Phi(a) => vec![
                ("y", a.y.clone()),
                ("parity", a.parity.clone()),
                ("z-far", a.z_far.clone()),
                ("stride", a.stride.clone()),
            ],
            Command::Kernel(a) => vec![
                ("regime", a.regime.clone()),
                ("t-shift-y", a.t_shift_y.clone()),
                ("g", a.g.clone()),
                ("N", a.size.clone()),
                ("sizes", a.sizes.clone()),
                ("center", a.center.clone()),
                ("offset-max", a.offset_max.clone()),
                ("offset-points", a.offset_points.clone()),
                ("tol", a.tol.clone()),
            ],
            Command::Compare(a) => vec![
                ("t", a.t.clone()),
                ("g", a.g.clone()),
                ("sizes", a.sizes.clone()),
                ("k", a.k.clone()),
                ("regions", a.regions.clone()),
                ("points", a.points.clone()),
                ("critical-window", a.critical_window.clone()),
                ("tol", a.tol.clone()),
            ],
            Command::Density(a) => vec![
                ("t", a.t.clone()),
                ("g", a.g.clone()),
                ("N", a.size.clone()),
                ("zmin", a.zmin.clone()),
                ("zmax", a.zmax.clone()),
                ("points", a.points.clone()),
                ("tol", a.tol.clone()),
            ],
            Command::Selftest(a) => vec![
                ("perturb-r", a.perturb_r.clone()),
                ("reduced-nodes", a.reduced_nodes.then(|| "true".to_string())),
            ],
        }
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("config line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim().trim_matches('"'));
        if k.is_empty() {
            return Err(Error::InvalidInput(format!("config line {}: empty key", i + 1)));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

fn is_known_key(k: &str) -> bool {
    const ALL: [CommandKind; 7] = [
        CommandKind::Freud,
        CommandKind::Hm,
        CommandKind::Phi,
        CommandKind::Kernel,
        CommandKind::Compare,
        CommandKind::Density,
        CommandKind::Selftest,
    ];
    k == "format" || k == "output" || ALL.iter().any(|c| c.defaults().iter().any(|(d, _)| *d == k))
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub values: BTreeMap<&'static str, String>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    /// Resolve flags over config-file entries over defaults.
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => parse_config(&std::fs::read_to_string(p)?)?,
            None => BTreeMap::new(),
        };
        Self::from_parts(&cli.command, &file, cli.output.clone(), cli.format.clone())
    }

    pub fn from_parts(
        command: &Command,
        file: &BTreeMap<String, String>,
        output: Option<PathBuf>,
        format: Option<String>,
    ) -> Result<Self> {
        if let Some(k) = file.keys().find(|k| !is_known_key(k)) {
            return Err(Error::InvalidInput(format!("unknown config key {k}")));
        }
        let kind = command.kind();
        let flags = command.flags();
        let mut values = BTreeMap::new();
        for &(key, default) in kind.defaults() {
            let flag = flags.iter().find(|(k, _)| *k == key).and_then(|(_, v)| v.clone());
            let v = flag
                .or_else(|| file.get(key).cloned())
                .unwrap_or_else(|| default.to_string());
            values.insert(key, v);
        }
        let format = match format.or_else(|| file.get("format").cloned()) {
            Some(f) => Format::parse(&f)?,
            None => kind.default_format(),
        };
        let output = output.or_else(|| file.get("output").map(PathBuf::from));
        let cfg = Self {
            command: kind,
            values,
            output,
            format,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::InvalidInput(format!("{key} is not a {} option", self.command.name())))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let s = self.raw(key)?;
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::InvalidInput(format!("{key} = {s} is not a finite number")))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let s = self.raw(key)?;
        s.parse::<usize>()
            .map_err(|_| Error::InvalidInput(format!("{key} = {s} is not a nonnegative integer")))
    }

    pub fn i64(&self, key: &str) -> Result<i64> {
        let s = self.raw(key)?;
        s.parse::<i64>()
            .map_err(|_| Error::InvalidInput(format!("{key} = {s} is not an integer")))
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.raw(key)
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.raw(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            s => Err(Error::InvalidInput(format!("{key} = {s} is not a boolean"))),
        }
    }

    /// `None` when the value is "auto".
    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        if self.raw(key)? == "auto" {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    pub fn sizes(&self, key: &str) -> Result<Vec<usize>> {
        let s = self.raw(key)?;
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("{key} = {s} is not a list of integers")))
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        for (k, _) in self.values.iter().filter(|(k, _)| k.ends_with("tol")) {
            if !(self.f64(k)? > 0.0) {
                return Err(Error::InvalidInput(format!("{k} must be strictly positive")));
            }
        }
        for key in ["N", "n-max", "mesh", "points", "offset-points", "stride"] {
            if self.values.contains_key(key) && self.usize(key)? == 0 {
                return Err(Error::InvalidInput(format!("{key} must be positive")));
            }
        }
        for key in [
            "t",
            "g",
            "y",
            "t-shift-y",
            "ymin",
            "ymax",
            "zmin",
            "zmax",
            "offset-max",
            "critical-window",
            "perturb-r",
        ] {
            if self.values.contains_key(key) {
                self.f64(key)?;
            }
        }
        for key in ["center"] {
            if self.values.contains_key(key) {
                self.opt_f64(key)?;
            }
        }
        if self.values.contains_key("k") {
            self.i64("k")?;
        }
        if let Some(s) = self.values.get("sizes") {
            if s != "auto" {
                let v = self.sizes("sizes")?;
                if v.is_empty() || v[0] == 0 || v.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidInput(
                        "sizes must be nonempty, positive and increasing".into(),
                    ));
                }
            }
        }
        if self.values.contains_key("reduced-nodes") {
            self.bool("reduced-nodes")?;
        }
        Ok(())
    }

    /// Header lines: version, command and every resolved value.
    pub fn header(&self) -> Vec<String> {
        let mut h = vec![
            format!("qcrit {VERSION}"),
            format!("command {}", self.command.name()),
            format!("format={:?}", self.format).to_lowercase(),
        ];
        h.extend(self.values.iter().map(|(k, v)| format!("{k}={v}")));
        h
    }

    fn echo(&self) -> Value {
        json!({
            "version": VERSION,
            "command": self.command.name(),
            "config": self.values,
        })
    }
}

/// Result of a run: the artifact text and whether the run passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub text: String,
    pub success: bool,
}

fn table_json(t: &Table) -> Value {
    json!({ "comments": t.comments, "columns": t.columns, "rows": t.rows })
}

fn emit_table(cfg: &ExperimentConfig, mut t: Table) -> Artifact {
    let text = match cfg.format {
        Format::Csv => {
            let mut comments = cfg.header();
            comments.append(&mut t.comments);
            t.comments = comments;
            t.to_csv()
        }
        Format::Json => {
            let mut v = cfg.echo();
            v["result"] = table_json(&t);
            format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
        }
    };
    Artifact { text, success: true }
}

fn emit_json(cfg: &ExperimentConfig, result: Value, success: bool) -> Artifact {
    let mut v = cfg.echo();
    v["result"] = result;
    Artifact {
        text: format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")),
        success,
    }
}

/// Size the global worker pool from the environment.
pub fn init_threads() -> Result<()> {
    if let Ok(s) = std::env::var(THREADS_ENV) {
        let n: usize = s
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidInput(format!("{THREADS_ENV} = {s} is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    Ok(())
}

pub fn run(cfg: &ExperimentConfig) -> Result<Artifact> {
    match cfg.command {
        CommandKind::Freud => run_freud(cfg),
        CommandKind::Hm => run_hm(cfg),
        CommandKind::Phi => run_phi(cfg),
        CommandKind::Kernel => run_kernel(cfg),
        CommandKind::Compare => run_compare(cfg),
        CommandKind::Density => run_density(cfg),
        CommandKind::Selftest => {
            let hooks = SelftestHooks {
                perturb_r: cfg.f64("perturb-r")?,
                reduced_nodes: cfg.bool("reduced-nodes")?,
            };
            let report = selftest(hooks);
            Ok(match cfg.format {
                Format::Json => emit_json(
                    cfg,
                    serde_json::to_value(&report).expect("serializable"),
                    report.passed(),
                ),
                Format::Csv => Artifact {
                    text: report.to_text(),
                    success: report.passed(),
                },
            })
        }
    }
}

/// Write the artifact to the configured path or standard output.
pub fn write_artifact(cfg: &ExperimentConfig, a: &Artifact) -> Result<()> {
    match &cfg.output {
        Some(p) => write_file(p, &a.text),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match out.write_all(a.text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn write_file(p: &Path, s: &str) -> Result<()> {
    std::fs::write(p, s)?;
    Ok(())
}

fn params(cfg: &ExperimentConfig) -> Result<ModelParams> {
    ModelParams::new(cfg.f64("t")?, cfg.f64("g")?, cfg.usize("N")?)
}

fn run_freud(cfg: &ExperimentConfig) -> Result<Artifact> {
    let p = params(cfg)?;
    let n_max = cfg.usize("n-max")?;
    let tol = cfg.f64("tol")?;
    let traj = match cfg.str("method")? {
        "variational" => freud::solve(&p, n_max, tol)?,
        "forward" => freud::forward_recursion(&p, n_max)?,
        "oracle" => freud::quadrature_oracle(&p, n_max, tol)?,
        m => return Err(Error::InvalidInput(format!("unknown method {m}"))),
    };
    Ok(emit_table(cfg, traj.to_table()))
}

/// HM table with columns y, u, u', v, D, q.
pub fn hm_table(hm: &HMGrid, stride: usize) -> Table {
    let mut t = Table::new(&["y", "u", "up", "v", "D", "q"]);
    if let Ok(p) = hm.at(0.0) {
        t.comment(format!("u(0)={}", crate::table::fmt_real(p.u)));
    }
    t.comment(format!(
        "newton_iterations={} newton_step={:e} boundary_error={:e}",
        hm.newton_iterations, hm.newton_step, hm.boundary_error
    ));
    let last = hm.y.len() - 1;
    for i in (0..=last).filter(|i| i % stride == 0 || *i == last) {
        t.push(vec![hm.y[i], hm.u[i], hm.up[i], hm.v[i], hm.d[i], hm.q[i]]);
    }
    t
}

fn run_hm(cfg: &ExperimentConfig) -> Result<Artifact> {
    let hm = solve_hastings_mcleod(cfg.f64("ymin")?, cfg.f64("ymax")?, cfg.usize("mesh")?, cfg.f64("tol")?)?;
    Ok(emit_table(cfg, hm_table(&hm, cfg.usize("stride")?)))
}

fn run_phi(cfg: &ExperimentConfig) -> Result<Artifact> {
    let parity = cfg.usize("parity")?;
    if parity > 3 {
        return Err(Error::InvalidInput(format!("parity {parity} must be in 0..=3")));
    }
    let opts = PhiOptions {
        z_far: cfg.f64("z-far")?,
        ..Default::default()
    };
    let phi = psi_cp::solve_phi(default_grid(), cfg.f64("y")?, parity as u8, opts)?;
    Ok(emit_table(cfg, phi.to_table(cfg.usize("stride")?)))
}

fn run_kernel(cfg: &ExperimentConfig) -> Result<Artifact> {
    let regime = ScalingRegime::parse(cfg.str("regime")?)?;
    let sizes = if cfg.str("sizes")? == "auto" {
        vec![cfg.usize("N")?]
    } else {
        cfg.sizes("sizes")?
    };
    let m = cfg.usize("offset-points")?;
    let w = cfg.f64("offset-max")?;
    let offsets = if m == 1 {
        vec![0.0]
    } else {
        (0..m).map(|i| -w + 2.0 * w * i as f64 / (m - 1) as f64).collect()
    };
    let opts = ScalingOptions {
        center: cfg.opt_f64("center")?,
        offsets,
        oracle_tol: cfg.f64("tol")?,
    };
    let (g, y) = (cfg.f64("g")?, cfg.f64("t-shift-y")?);
    let hm = default_grid();
    let results: Vec<_> = sizes
        .par_iter()
        .map(|&n| kernels::scaling_limit_grid(regime, g, n, y, &opts, hm))
        .collect::<Result<_>>()?;
    match cfg.format {
        Format::Json => {
            let reports: Vec<&kernels::ScalingReport> = results.iter().map(|r| &r.0).collect();
            let ratios: Vec<f64> = reports.windows(2).map(|w| w[0].sup_error / w[1].sup_error).collect();
            let result = if reports.len() == 1 {
                serde_json::to_value(reports[0]).expect("serializable")
            } else {
                json!({ "reports": reports, "ratios": ratios })
            };
            Ok(emit_json(cfg, result, true))
        }
        Format::Csv => {
            let mut t = Table::new(&["N", "u", "v", "K_N", "K_limit"]);
            for (report, grid) in &results {
                t.comment(format!("N={} sup_error={:e}", report.size, report.sup_error));
                for row in &grid.rows {
                    t.push(vec![report.size as f64, row[0], row[1], row[2], row[3]]);
                }
            }
            Ok(emit_table(cfg, t))
        }
    }
}

fn run_compare(cfg: &ExperimentConfig) -> Result<Artifact> {
    let base = ModelParams::new(cfg.f64("t")?, cfg.f64("g")?, 1)?;
    let sizes = cfg.sizes("sizes")?;
    let regions: Vec<Region> = match cfg.str("regions")? {
        "all" => Region::ALL.to_vec(),
        s => s.split(',').map(|r| Region::parse(r.trim())).collect::<Result<_>>()?,
    };
    let opts = CompareOptions {
        points: cfg.usize("points")?,
        critical_window: cfg.f64("critical-window")?,
        oracle_tol: cfg.f64("tol")?,
        ..Default::default()
    };
    let k = cfg.i64("k")?;
    let hm = default_grid();
    let parts: Vec<CompareReport> = sizes
        .par_iter()
        .map(|&n| semiclassics::compare_harness(&base, &[n], k, &regions, &opts, hm))
        .collect::<Result<_>>()?;
    let rows = parts.into_iter().flat_map(|r| r.rows).collect();
    Ok(emit_table(cfg, CompareReport::from_rows(rows, &regions).to_table()))
}

fn run_density(cfg: &ExperimentConfig) -> Result<Artifact> {
    let p = params(cfg)?;
    let (a, b, m) = (cfg.f64("zmin")?, cfg.f64("zmax")?, cfg.usize("points")?);
    if !(b > a) {
        return Err(Error::InvalidInput("zmax must exceed zmin".into()));
    }
    let zs: Vec<f64> = if m == 1 {
        vec![a]
    } else {
        (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect()
    };
    Ok(emit_table(cfg, kernels::density_profile(&p, &zs, cfg.f64("tol")?)?))
}

/// Debug hooks that make specific self-test checks fail.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SelftestHooks {
    /// Relative perturbation applied to every R_n of the reference recurrence.
    pub perturb_r: f64,
    /// Build the recurrence on a rule with too few nodes.
    pub reduced_nodes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub observed: f64,
    pub bound: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &'static str, observed: Result<f64>, bound: f64) -> Self {
        match observed {
            Ok(v) => Self {
                name,
                observed: v,
                bound,
                passed: v <= bound,
                note: None,
            },
            Err(e) => Self {
                name,
                observed: f64::INFINITY,
                bound,
                passed: false,
                note: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!(
                "{tag} {} observed={:e} bound={:e}",
                c.name, c.observed, c.bound
            ));
            if let Some(n) = &c.note {
                s.push_str(&format!(" ({n})"));
            }
            s.push('\n');
        }
        s.push_str(if self.passed() {
            "selftest passed\n"
        } else {
            "selftest failed\n"
        });
        s
    }
}

const ST_SIZE: usize = 40;
const ST_NMAX: usize = 44;
const ST_LAX_N: usize = 20;

fn selftest_evaluator(p: &ModelParams, hooks: SelftestHooks) -> Result<PsiEvaluator> {
    let mut rec = if hooks.reduced_nodes {
        let fine = QuadratureRule::for_degree(p, ST_NMAX, 1e-13);
        let coarse = QuadratureRule::new(p, fine.half_width, 3, 1e-13);
        orthopoly::stieltjes_with_rule(&coarse, p, ST_NMAX)?
    } else {
        orthopoly::stieltjes_recurrence(p, ST_NMAX, 1e-13)?
    };
    if hooks.perturb_r != 0.0 {
        let r: Vec<f64> = rec.r.iter().map(|r| r * (1.0 + hooks.perturb_r)).collect();
        rec = RecurrenceData::from_r(r, rec.log_h[0])?;
    }
    Ok(PsiEvaluator::new(rec, *p))
}

fn gram_defect(eval: &PsiEvaluator, rule: &QuadratureRule, n: usize) -> Result<f64> {
    let mut g = vec![vec![0.0; n + 1]; n + 1];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let psi = eval.all_real(n, x)?;
        for i in 0..=n {
            for j in 0..=i {
                g[i][j] += w * psi[i] * psi[j];
            }
        }
    }
    let mut d = 0.0f64;
    for i in 0..=n {
        for j in 0..=i {
            let e = if i == j { g[i][j] - 1.0 } else { g[i][j] };
            d = d.max(e.abs());
        }
    }
    Ok(d)
}

fn parity_defect(eval: &PsiEvaluator, n: usize) -> Result<f64> {
    let mut d = 0.0f64;
    for i in 1..=12 {
        let x = 0.15 * i as f64;
        let a = eval.all_real(n, x)?;
        let b = eval.all_real(n, -x)?;
        for k in 0..=n {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            d = d.max((b[k] - s * a[k]).abs());
        }
    }
    Ok(d)
}

fn trace_defect(eval: &PsiEvaluator, rule: &QuadratureRule, level: usize) -> Result<f64> {
    let mut s = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        s += w * eval.cd_kernel(level, x, x)?;
    }
    Ok((s - level as f64).abs())
}

fn projection_defect(eval: &PsiEvaluator, rule: &QuadratureRule, level: usize) -> Result<f64> {
    let pts = [(-0.8, 0.3), (0.1, 1.2), (0.5, 0.5)];
    let mut d = 0.0f64;
    for (x, y) in pts {
        let mut s = 0.0;
        for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
            s += w * eval.cd_kernel(level, x, z)? * eval.cd_kernel(level, z, y)?;
        }
        d = d.max((s - eval.cd_kernel(level, x, y)?).abs());
    }
    Ok(d)
}

fn limit_kernel_defect() -> Result<f64> {
    let phi = psi_cp::solve_phi(default_grid(), 0.0, 0, PhiOptions::default())?;
    let mut d = 0.0f64;
    for k in [KernelEval::Sine, KernelEval::Airy, KernelEval::Critical(&phi)] {
        for u in [-1.5, -0.3, 0.4, 1.1] {
            let diag = k.eval(u, u)?;
            for h in [1e-4, 1e-5] {
                let off = k.eval(u - 0.5 * h, u + 0.5 * h)?;
                d = d.max((off - diag).abs() / diag.abs());
            }
            let v = 0.7 - u;
            d = d.max((k.eval(u, v)? - k.eval(v, u)?).abs());
        }
    }
    Ok(d)
}

/// Fast invariant suite at t = -1, g = 1, N = 40 plus Painlevé and limit-kernel checks.
pub fn selftest(hooks: SelftestHooks) -> SelftestReport {
    let p = ModelParams::new(-1.0, 1.0, ST_SIZE).expect("valid parameters");
    let rule = QuadratureRule::for_degree(&p, ST_NMAX, 1e-13).refined(&p);
    let mut checks = Vec::new();
    match selftest_evaluator(&p, hooks) {
        Ok(eval) => {
            checks.push(Check::new("orthonormality", gram_defect(&eval, &rule, ST_SIZE), 1e-10));
            checks.push(Check::new("parity", parity_defect(&eval, ST_SIZE), 1e-12));
            let grid: Vec<Complex64> = (0..10)
                .map(|j| Complex64::from_polar(0.4 + 0.15 * j as f64, 0.3 + 0.55 * j as f64))
                .collect();
            let lax = orthopoly::lax_residuals(&eval, ST_LAX_N, &grid).map(|r| r.compatibility);
            checks.push(Check::new("lax_compatibility", lax, 1e-6 * p.nf()));
            checks.push(Check::new("kernel_trace", trace_defect(&eval, &rule, ST_SIZE), 1e-8));
            checks.push(Check::new(
                "kernel_projection",
                projection_defect(&eval, &rule, ST_SIZE),
                1e-8,
            ));
        }
        Err(e) => {
            for name in [
                "orthonormality",
                "parity",
                "lax_compatibility",
                "kernel_trace",
                "kernel_projection",
            ] {
                checks.push(Check::new(name, Err(e.clone()), 0.0));
            }
        }
    }
    let hm = solve_hastings_mcleod(-10.0, 8.0, 2000, 1e-13);
    checks.push(Check::new(
        "painleve_residual",
        hm.as_ref().map(|h| h.painleve_residual()).map_err(|e| e.clone()),
        1e-10,
    ));
    checks.push(Check::new(
        "hastings_mcleod_u0",
        hm.and_then(|h| h.u_at(0.0)).map(|u| (u - 0.367_061_551_548_1).abs()),
        1e-6,
    ));
    checks.push(Check::new("limit_kernels", limit_kernel_defect(), 1e-6));
    SelftestReport { checks }
}

/// Machine-readable diagnostic for standard error.
pub fn error_json(e: &Error) -> String {
    json!({ "error": { "kind": e.kind(), "message": e.to_string() } }).to_string()
}

/// Exit status for an error: 2 for rejected input, 1 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::OutOfRange { .. } | Error::Io(_) => 2,
        _ => 1,
    }
}
