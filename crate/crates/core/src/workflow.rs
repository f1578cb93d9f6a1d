//! Batch runs driven by a `key = value` input file: build the model, generate
//! the circuit series, optionally compile it, simulate, and write per-qubit
//! CSVs, an SVG plot, a run log and a compile report.

use std::fmt::{self, Write as _};
use std::fs::{self, File};
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{gate_counts, Program};
use crate::compiler::{compare_compilers, compile_generic, ds_compile, render_report, CompileError, CompileMode, Compiled, NativeTarget};
use crate::hamiltonian::{parse_field_table, Axis, FieldProfile, HeisenbergModel, Units, ValidationIssue};
use crate::io_formats::{emit_qasm, emit_quil, parse, Dialect, ParseError};
use crate::simulator::{MagnetizationSeries, NoiseParams, SimError, Spin};
use crate::trotter::{generate_circuits, simulate_series, Backend, CircuitSeries, SimulationPlan, TrotterError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: '{key}' is set more than once")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {message}")]
    BadValue { line: usize, key: String, message: String },
    #[error("invalid configuration: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationIssue>),
}

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Trotter(#[from] TrotterError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("cannot plot an empty series")]
    EmptySeries,
}

impl WorkflowError {
    /// True for problems with the user's input rather than the run itself.
    pub fn is_usage(&self) -> bool {
        matches!(self, WorkflowError::Config(_) | WorkflowError::Parse(_))
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> WorkflowError + '_ {
    move |source| WorkflowError::Io { path: path.to_path_buf(), source }
}

/// Where the circuits nominally run. Hardware is emulated by shot sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Qcqs {
    #[default]
    Simulator,
    Computer,
}

impl FromStr for Qcqs {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "simulator" | "qs" => Ok(Qcqs::Simulator),
            "computer" | "qc" => Ok(Qcqs::Computer),
            other => Err(format!("expected simulator or computer, got '{other}'")),
        }
    }
}

impl fmt::Display for Qcqs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Qcqs::Simulator => "simulator",
            Qcqs::Computer => "computer",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub h_ext: f64,
    pub ext_dir: Axis,
    pub num_qubits: usize,
    pub initial_spins: Vec<Spin>,
    pub delta_t: f64,
    pub steps: usize,
    pub qcqs: Qcqs,
    pub shots: usize,
    pub noise_choice: bool,
    pub noise: NoiseParams,
    /// Free-form label, recorded in the log only.
    pub device_choice: String,
    pub plot_flag: bool,
    pub time_dep_flag: bool,
    /// Cyclic frequency of the sinusoidal field.
    pub freq: f64,
    pub phase: f64,
    /// Two-column `t,h` file for a tabulated field.
    pub custom_time_dep: Option<PathBuf>,
    pub backend: Backend,
    pub compile: CompileMode,
    pub units: Units,
    pub seed: u64,
}

pub const DEFAULT_NUM_QUBITS: usize = 2;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            jx: 0.0,
            jy: 0.0,
            jz: 0.0,
            h_ext: 0.0,
            ext_dir: Axis::X,
            num_qubits: DEFAULT_NUM_QUBITS,
            initial_spins: vec![Spin::Up; DEFAULT_NUM_QUBITS],
            delta_t: 0.1,
            steps: 10,
            qcqs: Qcqs::Simulator,
            shots: 0,
            noise_choice: false,
            noise: NoiseParams::default(),
            device_choice: String::new(),
            plot_flag: true,
            time_dep_flag: false,
            freq: 0.0,
            phase: 0.0,
            custom_time_dep: None,
            backend: Backend::Internal,
            compile: CompileMode::None,
            units: Units::Dimensionless,
            seed: 1,
        }
    }
}

const KEYS: &[&str] = &[
    "Jx",
    "Jy",
    "Jz",
    "h_ext",
    "ext_dir",
    "num_qubits",
    "initial_spins",
    "delta_t",
    "steps",
    "QCQS",
    "shots",
    "noise_choice",
    "noise_p1",
    "noise_p2",
    "device_choice",
    "plot_flag",
    "time_dep_flag",
    "freq",
    "phase",
    "custom_time_dep",
    "backend",
    "compile",
    "units",
    "seed",
];

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true/false, got '{other}'")),
    }
}

fn parse_spins(s: &str) -> Result<Vec<Spin>, String> {
    s.split(',').map(|t| t.trim().parse::<Spin>()).collect()
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

fn parse_float(s: &str) -> Result<f64, String> {
    let x: f64 = parse_num(s)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

impl RunConfig {
    /// Parses input-file text. Relative field-table paths resolve against
    /// the working directory.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_in(text, None)
    }

    /// Reads an input file; relative field-table paths resolve against the
    /// file's directory.
    pub fn from_path(path: &Path) -> Result<Self, WorkflowError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty());
        Ok(Self::parse_in(&text, base)?)
    }

    fn parse_in(text: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&'static str> = Vec::new();
        let mut spins_set = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let code = raw.split('#').next().unwrap_or("").trim();
            if code.is_empty() {
                continue;
            }
            let (key, value) = code
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .filter(|(k, _)| !k.is_empty())
                .ok_or_else(|| ConfigError::Syntax { line, text: code.to_string() })?;
            let canonical = KEYS
                .iter()
                .copied()
                .find(|k| k.eq_ignore_ascii_case(key))
                .ok_or_else(|| ConfigError::UnknownKey { line, key: key.to_string() })?;
            if seen.contains(&canonical) {
                return Err(ConfigError::Duplicate { line, key: canonical.to_string() });
            }
            seen.push(canonical);
            let bad = |message: String| ConfigError::BadValue { line, key: canonical.to_string(), message };
            match canonical {
                "Jx" => cfg.jx = parse_float(value).map_err(bad)?,
                "Jy" => cfg.jy = parse_float(value).map_err(bad)?,
                "Jz" => cfg.jz = parse_float(value).map_err(bad)?,
                "h_ext" => cfg.h_ext = parse_float(value).map_err(bad)?,
                "ext_dir" => cfg.ext_dir = value.parse().map_err(|e: ValidationIssue| bad(e.message))?,
                "num_qubits" => cfg.num_qubits = parse_num(value).map_err(bad)?,
                "initial_spins" => {
                    cfg.initial_spins = parse_spins(value).map_err(bad)?;
                    spins_set = true;
                }
                "delta_t" => cfg.delta_t = parse_float(value).map_err(bad)?,
                "steps" => cfg.steps = parse_num(value).map_err(bad)?,
                "QCQS" => cfg.qcqs = value.parse().map_err(bad)?,
                "shots" => cfg.shots = parse_num(value).map_err(bad)?,
                "noise_choice" => cfg.noise_choice = parse_bool(value).map_err(bad)?,
                "noise_p1" => cfg.noise.p1 = parse_float(value).map_err(bad)?,
                "noise_p2" => cfg.noise.p2 = parse_float(value).map_err(bad)?,
                "device_choice" => cfg.device_choice = value.to_string(),
                "plot_flag" => cfg.plot_flag = parse_bool(value).map_err(bad)?,
                "time_dep_flag" => cfg.time_dep_flag = parse_bool(value).map_err(bad)?,
                "freq" => cfg.freq = parse_float(value).map_err(bad)?,
                "phase" => cfg.phase = parse_float(value).map_err(bad)?,
                "custom_time_dep" => {
                    cfg.custom_time_dep = if value.is_empty() {
                        None
                    } else {
                        let p = PathBuf::from(value);
                        Some(match base {
                            Some(b) if p.is_relative() => b.join(p),
                            _ => p,
                        })
                    };
                }
                "backend" => cfg.backend = value.parse().map_err(bad)?,
                "compile" => cfg.compile = value.parse().map_err(bad)?,
                "units" => cfg.units = value.parse().map_err(bad)?,
                "seed" => cfg.seed = parse_num(value).map_err(bad)?,
                _ => unreachable!("key list and match arms diverge"),
            }
        }
        if !spins_set {
            cfg.initial_spins = vec![Spin::Up; cfg.num_qubits];
        }
        cfg.validate().map_err(ConfigError::Invalid)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Vec<ValidationIssue>> {
        let mut issues = Vec::new();
        if self.initial_spins.len() != self.num_qubits {
            issues.push(ValidationIssue::new(
                "initial_spins",
                format!("{} spins given for {} qubits", self.initial_spins.len(), self.num_qubits),
            ));
        }
        if self.qcqs == Qcqs::Computer && self.shots == 0 {
            issues.push(ValidationIssue::new("shots", "QCQS = computer needs shots >= 1"));
        }
        if let Some(path) = &self.custom_time_dep {
            if !self.time_dep_flag {
                issues.push(ValidationIssue::new("custom_time_dep", "set time_dep_flag = true to use a field table"));
            }
            if !path.is_file() {
                issues.push(ValidationIssue::new("custom_time_dep", format!("{} does not exist", path.display())));
            }
        }
        if let Err(mut plan_issues) = self.plan().validate() {
            issues.append(&mut plan_issues);
        }
        if let Err(mut model_issues) = self.model_with(FieldProfile::Constant { amplitude: self.h_ext }).validate() {
            issues.append(&mut model_issues);
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }

    pub fn plan(&self) -> SimulationPlan {
        SimulationPlan {
            num_qubits: self.num_qubits,
            initial_spins: self.initial_spins.clone(),
            delta_t: self.delta_t,
            steps: self.steps,
            shots: self.shots,
            backend: self.backend,
            compile_mode: self.compile,
            noise: self.noise_choice.then_some(self.noise),
            seed: self.seed,
        }
    }

    fn model_with(&self, field: FieldProfile) -> HeisenbergModel {
        HeisenbergModel {
            jx: self.jx,
            jy: self.jy,
            jz: self.jz,
            field,
            ext_dir: self.ext_dir,
            hbar_scale: self.units.hbar(),
        }
    }

    /// Builds the Hamiltonian, reading the field table if one is configured.
    pub fn model(&self) -> Result<HeisenbergModel, WorkflowError> {
        let field = match (&self.custom_time_dep, self.time_dep_flag) {
            (Some(path), true) => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                let table = parse_field_table(&text).map_err(|e| ConfigError::Invalid(vec![e]))?;
                FieldProfile::Tabulated(table)
            }
            (None, true) => FieldProfile::Sinusoid { amplitude: self.h_ext, frequency: self.freq, phase: self.phase },
            _ => FieldProfile::Constant { amplitude: self.h_ext },
        };
        let model = self.model_with(field);
        model.validate().map_err(ConfigError::Invalid)?;
        Ok(model)
    }

    /// Every key with its current value, in input-file syntax.
    pub fn to_input_text(&self) -> String {
        let spins: Vec<String> = self.initial_spins.iter().map(Spin::to_string).collect();
        let table = self.custom_time_dep.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let pairs: [(&str, String); 24] = [
            ("Jx", self.jx.to_string()),
            ("Jy", self.jy.to_string()),
            ("Jz", self.jz.to_string()),
            ("h_ext", self.h_ext.to_string()),
            ("ext_dir", self.ext_dir.to_string()),
            ("num_qubits", self.num_qubits.to_string()),
            ("initial_spins", spins.join(",")),
            ("delta_t", self.delta_t.to_string()),
            ("steps", self.steps.to_string()),
            ("QCQS", self.qcqs.to_string()),
            ("shots", self.shots.to_string()),
            ("noise_choice", self.noise_choice.to_string()),
            ("noise_p1", self.noise.p1.to_string()),
            ("noise_p2", self.noise.p2.to_string()),
            ("device_choice", self.device_choice.clone()),
            ("plot_flag", self.plot_flag.to_string()),
            ("time_dep_flag", self.time_dep_flag.to_string()),
            ("freq", self.freq.to_string()),
            ("phase", self.phase.to_string()),
            ("custom_time_dep", table),
            ("backend", self.backend.to_string()),
            ("compile", self.compile.to_string()),
            ("units", self.units.to_string()),
            ("seed", self.seed.to_string()),
        ];
        let mut s = String::new();
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// Parses input-file text; see [`RunConfig::parse`].
pub fn parse_input_file(text: &str) -> Result<RunConfig, ConfigError> {
    RunConfig::parse(text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub data_files: Vec<PathBuf>,
    pub plot: Option<PathBuf>,
    pub log: PathBuf,
    pub compile_report: Option<PathBuf>,
    pub series: MagnetizationSeries,
}

/// Lines starting with this prefix carry wall-clock timings and differ
/// between otherwise identical runs.
pub const TIMING_PREFIX: &str = "timing:";

struct RunLog {
    file: File,
    path: PathBuf,
}

impl RunLog {
    fn create(path: PathBuf) -> Result<Self, WorkflowError> {
        let file = File::create(&path).map_err(io_err(&path))?;
        Ok(RunLog { file, path })
    }

    fn line(&mut self, text: impl AsRef<str>) -> Result<(), WorkflowError> {
        writeln!(self.file, "{}", text.as_ref()).map_err(io_err(&self.path))
    }

    fn timing(&mut self, stage: &str, start: Instant) -> Result<(), WorkflowError> {
        self.line(format!("{TIMING_PREFIX} {stage} {:.3} ms", start.elapsed().as_secs_f64() * 1e3))
    }
}

fn write_file(path: &Path, contents: &str, log: Option<&mut RunLog>) -> Result<(), WorkflowError> {
    if let Some(log) = log {
        if path.exists() {
            log.line(format!("overwriting {}", path.display()))?;
        }
    }
    fs::write(path, contents).map_err(io_err(path))
}

/// `t,magnetization` rows for one qubit.
pub fn magnetization_csv(series: &MagnetizationSeries, q: usize) -> String {
    let mut s = String::from("t,magnetization\n");
    for (t, v) in series.times.iter().zip(&series.values[q]) {
        let _ = writeln!(s, "{t},{v}");
    }
    s
}

fn compile_series(
    series: &CircuitSeries,
    mode: CompileMode,
    target: NativeTarget,
) -> Result<Vec<(Option<Compiled>, Compiled)>, CompileError> {
    series
        .programs
        .par_iter()
        .map(|p| match mode {
            CompileMode::DomainSpecific => compare_compilers(p, target).map(|(g, d)| (Some(g), d)),
            _ => compile_generic(p, target).map(|g| (None, g)),
        })
        .collect()
}

fn compile_report_text(results: &[(Option<Compiled>, Compiled)]) -> String {
    let mut s = format!("{:>7} {:>6} {:>8} {:>6}\n", "circuit", "input", "generic", "ds");
    for (n, (generic, used)) in results.iter().enumerate() {
        let input = used.report.input_counts.total;
        match generic {
            Some(g) => {
                let _ = writeln!(s, "{n:>7} {input:>6} {:>8} {:>6}", g.report.output_counts.total, used.report.output_counts.total);
            }
            None => {
                let _ = writeln!(s, "{n:>7} {input:>6} {:>8} {:>6}", used.report.output_counts.total, "-");
            }
        }
    }
    if let Some((generic, used)) = results.last() {
        s.push_str("\nfinal circuit\n");
        match generic {
            Some(g) => s.push_str(&render_report(&g.report, Some(&used.report))),
            None => s.push_str(&render_report(&used.report, None)),
        }
    }
    s
}

/// Runs the whole pipeline and writes artifacts into `out_dir`. The log is
/// written as the run progresses, so a failed run leaves its partial output.
pub fn run_workflow(config: &RunConfig, out_dir: &Path) -> Result<RunArtifacts, WorkflowError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut log = RunLog::create(out_dir.join("run.log"))?;
    match run_stages(config, out_dir, &mut log) {
        Ok(artifacts) => Ok(artifacts),
        Err(e) => {
            let _ = log.line(format!("error: {e}"));
            Err(e)
        }
    }
}

fn run_stages(config: &RunConfig, out_dir: &Path, log: &mut RunLog) -> Result<RunArtifacts, WorkflowError> {
    let total = Instant::now();
    log.line("# configuration")?;
    for line in config.to_input_text().lines() {
        log.line(line)?;
    }
    config.validate().map_err(ConfigError::Invalid)?;
    let model = config.model()?;
    let plan = config.plan();

    if config.qcqs == Qcqs::Computer {
        log.line(format!(
            "warning: QCQS = computer runs as a {}-shot sampled simulation (device '{}')",
            config.shots, config.device_choice
        ))?;
    }
    let execution = plan.execution();
    log.line(format!("mode: {}", execution.label()))?;

    let start = Instant::now();
    let mut series = generate_circuits(&model, &plan)?;
    log.timing("generate", start)?;
    log.line("# circuits")?;
    for (n, p) in series.programs.iter().enumerate() {
        let c = gate_counts(p);
        log.line(format!("circuit {n}: total {} 1q {} 2q {}", c.total, c.single_qubit, c.two_qubit))?;
    }

    let mut compile_report = None;
    if config.compile != CompileMode::None {
        let target = config.backend.native_target().ok_or_else(|| {
            ConfigError::Invalid(vec![ValidationIssue::new("compile", "compilation needs backend ibm or rigetti")])
        })?;
        let start = Instant::now();
        let results = compile_series(&series, config.compile, target)?;
        log.timing("compile", start)?;
        log.line(format!("# compiled for {target} ({})", config.compile))?;
        for (n, (generic, used)) in results.iter().enumerate() {
            let out = used.report.output_counts.total;
            match generic {
                Some(g) => {
                    let gen = g.report.output_counts.total;
                    let relation = if out <= gen { "<=" } else { ">" };
                    log.line(format!("circuit {n}: generic {gen} ds {out} (ds {relation} generic)"))?;
                }
                None => log.line(format!("circuit {n}: generic {out}"))?,
            }
        }
        let path = out_dir.join("compile_report.txt");
        write_file(&path, &compile_report_text(&results), Some(log))?;
        compile_report = Some(path);
        series.programs = results.into_iter().map(|(_, used)| used.program).collect();
    }

    let start = Instant::now();
    let mags = simulate_series(&series, &plan)?;
    log.timing("simulate", start)?;

    let mut data_files = Vec::with_capacity(config.num_qubits);
    for q in 0..mags.num_qubits() {
        let path = out_dir.join(format!("qubit_{q}_magnetization.csv"));
        write_file(&path, &magnetization_csv(&mags, q), Some(log))?;
        data_files.push(path);
    }
    let plot = if config.plot_flag {
        let path = out_dir.join("plot.svg");
        write_file(&path, &render_plot(&mags)?, Some(log))?;
        Some(path)
    } else {
        None
    };
    log.timing("total", total)?;
    Ok(RunArtifacts { out_dir: out_dir.to_path_buf(), data_files, plot, log: log.path.clone(), compile_report, series: mags })
}

const PLOT_W: f64 = 720.0;
const PLOT_H: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const Y_MIN: f64 = -1.1;
const Y_MAX: f64 = 1.1;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

fn plot_x_max(series: &MagnetizationSeries) -> f64 {
    series.times.last().copied().filter(|&t| t > 0.0).unwrap_or(1.0)
}

/// Vertical pixel coordinate of magnetization `v`.
pub fn plot_y(v: f64) -> f64 {
    MARGIN_T + (Y_MAX - v) / (Y_MAX - Y_MIN) * (PLOT_H - MARGIN_T - MARGIN_B)
}

/// Horizontal pixel coordinate of time `t`.
pub fn plot_x(t: f64, t_max: f64) -> f64 {
    MARGIN_L + t / t_max * (PLOT_W - MARGIN_L - MARGIN_R)
}

/// Self-contained SVG of every qubit's trajectory.
pub fn render_plot(series: &MagnetizationSeries) -> Result<String, WorkflowError> {
    if series.is_empty() {
        return Err(WorkflowError::EmptySeries);
    }
    let t_max = plot_x_max(series);
    let (x0, x1) = (plot_x(0.0, t_max), plot_x(t_max, t_max));
    let (y0, y1) = (plot_y(Y_MAX), plot_y(Y_MIN));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PLOT_W}" height="{PLOT_H}" viewBox="0 0 {PLOT_W} {PLOT_H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{PLOT_W}" height="{PLOT_H}" fill="white"/>"#);
    let _ = writeln!(s, r##"<rect x="{x0:.3}" y="{y0:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#000"/>"##, x1 - x0, y1 - y0);
    for v in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let y = plot_y(v);
        let _ = writeln!(s, r##"<line x1="{x0:.3}" y1="{y:.3}" x2="{x1:.3}" y2="{y:.3}" stroke="#ddd"/>"##);
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{v}</text>"#, x0 - 6.0, y + 4.0);
    }
    for k in 0..=4 {
        let t = t_max * k as f64 / 4.0;
        let x = plot_x(t, t_max);
        let _ = writeln!(s, r##"<line x1="{x:.3}" y1="{y1:.3}" x2="{x:.3}" y2="{:.3}" stroke="#000"/>"##, y1 + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.3}" y="{:.3}" text-anchor="middle">{}</text>"#, y1 + 19.0, format_tick(t));
    }
    let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">time</text>"#, (x0 + x1) / 2.0, PLOT_H - 8.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.3}" text-anchor="middle" transform="rotate(-90 16 {:.3})">magnetization</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    for (q, values) in series.values.iter().enumerate() {
        let color = PALETTE[q % PALETTE.len()];
        let points: Vec<String> = series
            .times
            .iter()
            .zip(values)
            .map(|(&t, &v)| format!("{:.3},{:.3}", plot_x(t, t_max), plot_y(v)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
        let ly = y0 + 16.0 + 18.0 * q as f64;
        let _ = writeln!(s, r#"<line x1="{:.3}" y1="{ly:.3}" x2="{:.3}" y2="{ly:.3}" stroke="{color}" stroke-width="2"/>"#, x1 + 12.0, x1 + 32.0);
        let _ = writeln!(s, r#"<text x="{:.3}" y="{:.3}">qubit {q}</text>"#, x1 + 38.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn format_tick(t: f64) -> String {
    let s = format!("{t:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn write_plot(series: &MagnetizationSeries, path: &Path) -> Result<(), WorkflowError> {
    write_file(path, &render_plot(series)?, None)
}

fn emit_text(program: &Program, dialect: Dialect) -> String {
    match dialect {
        Dialect::Qasm2 => emit_qasm(program),
        Dialect::Quil => emit_quil(program),
    }
}

/// Writes the circuit series as `circuit_<n>.<ext>` without simulating it,
/// compiled first when the config asks for it.
pub fn emit_series(config: &RunConfig, dialect: Dialect, out_dir: &Path) -> Result<Vec<PathBuf>, WorkflowError> {
    config.validate().map_err(ConfigError::Invalid)?;
    let model = config.model()?;
    let series = generate_circuits(&model, &config.plan())?;
    let programs: Vec<Program> = match (config.compile, config.backend.native_target()) {
        (CompileMode::None, _) | (_, None) => series.programs,
        (CompileMode::Generic, Some(t)) => series
            .programs
            .par_iter()
            .map(|p| compile_generic(p, t).map(|c| c.program))
            .collect::<Result<_, _>>()?,
        (CompileMode::DomainSpecific, Some(t)) => series
            .programs
            .par_iter()
            .map(|p| ds_compile(p, t).map(|c| c.program))
            .collect::<Result<_, _>>()?,
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut paths = Vec::with_capacity(programs.len());
    for (n, p) in programs.iter().enumerate() {
        let path = out_dir.join(format!("circuit_{n}.{}", dialect.extension()));
        write_file(&path, &emit_text(p, dialect), None)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Compiles a circuit file to `output` in the same dialect and writes a
/// report next to it (`<output>.report.txt`). Returns the report text.
pub fn cmd_compile(input: &Path, output: &Path, dialect: Dialect, target: NativeTarget, ds: bool) -> Result<String, WorkflowError> {
    let text = fs::read_to_string(input).map_err(io_err(input))?;
    let program = parse(&text, dialect)?;
    let (compiled, report) = if ds {
        let (generic, ds) = compare_compilers(&program, target)?;
        let report = render_report(&generic.report, Some(&ds.report));
        (ds.program, report)
    } else {
        let generic = compile_generic(&program, target)?;
        let report = render_report(&generic.report, None);
        (generic.program, report)
    };
    write_file(output, &emit_text(&compiled, dialect), None)?;
    let mut report_path = output.as_os_str().to_owned();
    report_path.push(".report.txt");
    write_file(Path::new(&report_path), &report, None)?;
    Ok(report)
}
