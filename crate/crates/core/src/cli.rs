//! Configuration-driven experiment runner behind the `rqsim` binary.
//!
//! A run is described by one TOML (or JSON) file, see [`RunConfig`] and
//! `configs/schema.json`. Every run writes into its own directory: CSV/JSON artifacts,
//! a plot script per figure, and `manifest.json` with the config echo, SHA-256 of every
//! artifact and the wall time.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or missing file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    self, linspace, named_observable, point_seed, replicate_manifold_demo, sample_probability, simulate_exact,
    simulate_trotter, trotter_error_scan, Manifold, ManifoldDemo, Observable, ScanConfig, TimeSeries,
};
use crate::compiler::{encoding_cost, Compiler, Encoding, MetricsReport, Network, PhaseConvention, TrotterPlan};
use crate::error::Error;
use crate::linalg::fmt_num;
use crate::models::{preset, Frame, ModelSpec, Preset, PresetParams};
use crate::noise::{
    bath_correlation, correlation_spectrum, effective_lindbladian, simulate_lindblad_model, simulate_noisy_trotter,
    spectral_function, NoiseSpec,
};

/// Published schema of [`RunConfig`].
pub const SCHEMA: &str = include_str!("../configs/schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Compile,
    NoiseMap,
    Chevron,
    ErrorScan,
    Spectral,
    EncodingCost,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Compile => "compile",
            Self::NoiseMap => "noise-map",
            Self::Chevron => "chevron",
            Self::ErrorScan => "error-scan",
            Self::Spectral => "spectral",
            Self::EncodingCost => "encoding-cost",
        }
    }
}

/// Either a named preset with parameter overrides or a full model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default)]
    pub params: PresetParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ModelSpec>,
}

impl ModelConfig {
    pub fn build(&self) -> crate::Result<ModelSpec> {
        match (&self.preset, &self.spec) {
            (Some(name), None) => preset(Preset::from_name(name)?, &self.params),
            (None, Some(spec)) => {
                spec.validate()?;
                Ok(spec.clone())
            }
            _ => Err(Error::Config("model needs exactly one of `preset` or `spec`".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub order: u8,
    pub tau: f64,
    pub n_steps: usize,
    #[serde(default)]
    pub phase_convention: PhaseConvention,
    #[serde(default = "default_frame")]
    pub frame: Frame,
    #[serde(default = "yes")]
    pub fold_phases: bool,
    #[serde(default)]
    pub network: Network,
}

fn default_frame() -> Frame {
    Frame::RotatingModes
}

fn yes() -> bool {
    true
}

impl PlanConfig {
    pub fn plan(&self) -> TrotterPlan {
        TrotterPlan {
            order: self.order,
            tau: self.tau,
            n_steps: self.n_steps,
            phase_convention: self.phase_convention,
            frame: self.frame,
            fold_phases: self.fold_phases,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// RK4 step of the Lindblad solver.
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_dt() -> f64 {
    0.02
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dt: default_dt() }
    }
}

/// Detuning axis given as a list or as `[start, stop, count]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChevronConfig {
    pub manifold: Manifold,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_phi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_phi_range: Option<(f64, f64, usize)>,
    pub steps: usize,
    #[serde(default)]
    pub gamma_t_gate: f64,
    #[serde(default)]
    pub jc_phase: f64,
    #[serde(default)]
    pub aux_init: bool,
    #[serde(default)]
    pub calibrate: bool,
    #[serde(default = "one")]
    pub tau: f64,
}

fn one() -> f64 {
    1.0
}

impl ChevronConfig {
    fn axis(&self) -> Vec<f64> {
        match (&self.delta_phi, self.delta_phi_range) {
            (Some(v), _) => v.clone(),
            (None, Some((a, b, n))) => linspace(a, b, n),
            (None, None) => vec![],
        }
    }

    pub fn demo(&self, d: usize) -> ManifoldDemo {
        ManifoldDemo {
            manifold: self.manifold,
            delta_phi: self.axis(),
            steps: self.steps,
            gamma_t_gate: self.gamma_t_gate,
            jc_phase: self.jc_phase,
            d,
            aux_init: self.aux_init,
            calibrate: self.calibrate,
            tau: self.tau,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorScanConfig {
    pub orders: Vec<u8>,
    pub taus: Vec<f64>,
    /// Truncations; the run-level truncation is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ds: Option<Vec<usize>>,
    pub t_total: f64,
}

/// Bath of independent damped modes seen through `X = Σ v_k (b_k† + b_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    pub v: Vec<f64>,
    pub omega: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing: Option<Vec<f64>>,
    /// Frequency grid `[start, stop, count]`.
    pub grid: (f64, f64, usize),
    /// Also compute the spectrum from the mode correlation function.
    #[serde(default)]
    pub correlation: bool,
    #[serde(default = "default_corr_dt")]
    pub dt: f64,
    #[serde(default = "default_corr_n")]
    pub n_times: usize,
}

fn default_corr_dt() -> f64 {
    0.01
}

fn default_corr_n() -> usize {
    20000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingConfig {
    #[serde(default = "default_ds")]
    pub d: Vec<usize>,
}

fn default_ds() -> Vec<usize> {
    vec![4, 8, 16, 32]
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self { d: default_ds() }
    }
}

/// One experiment. Sections not used by `kind` must be absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Names of standard observables, see [`analysis::observable_names`].
    #[serde(default)]
    pub observables: Vec<String>,
    /// Initial occupations of the model sites, spins then modes. Defaults to the ground state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<usize>>,
    /// Measurement shots for sampled populations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chevron: Option<ChevronConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_scan: Option<ErrorScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<EncodingConfig>,
}

/// False for NaN as well.
fn positive(x: f64) -> bool {
    x > 0.0
}

fn default_truncation() -> usize {
    8
}

/// Why a run did not complete.
#[derive(Debug)]
pub enum CliError {
    /// Invalid or unreadable configuration; exit code 2.
    Invalid(Vec<String>),
    /// Failure inside a library module; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(errs) => {
                writeln!(f, "invalid configuration:")?;
                for e in errs {
                    writeln!(f, "  {e}")?;
                }
                Ok(())
            }
            CliError::Runtime(e) => writeln!(f, "run failed: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Parses a config from text; `.json` paths are read as JSON, anything else as TOML.
pub fn parse_config(text: &str, path: &Path) -> Result<RunConfig, CliError> {
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(text).map_err(|e| CliError::Invalid(vec![format!("{}: {e}", path.display())]))
    } else {
        toml::from_str(text).map_err(|e| CliError::Invalid(vec![format!("{}: {e}", path.display())]))
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(vec![format!("{}: {e}", path.display())]))?;
    parse_config(&text, path)
}

impl RunConfig {
    /// Every problem found, each prefixed by its field path.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let kind = self.kind;
        let needs_model = matches!(
            kind,
            ExperimentKind::Simulate | ExperimentKind::Compile | ExperimentKind::NoiseMap | ExperimentKind::ErrorScan
        );
        let needs_plan = matches!(kind, ExperimentKind::Simulate | ExperimentKind::Compile | ExperimentKind::NoiseMap);
        let sections: [(&str, bool, bool); 8] = [
            ("model", self.model.is_some(), needs_model),
            ("plan", self.plan.is_some(), needs_plan),
            ("noise", self.noise.is_some(), matches!(kind, ExperimentKind::NoiseMap | ExperimentKind::Simulate)),
            ("solver", self.solver.is_some(), false),
            ("chevron", self.chevron.is_some(), kind == ExperimentKind::Chevron),
            ("error_scan", self.error_scan.is_some(), kind == ExperimentKind::ErrorScan),
            ("spectral", self.spectral.is_some(), kind == ExperimentKind::Spectral),
            ("encoding", self.encoding.is_some(), kind == ExperimentKind::EncodingCost),
        ];
        let required = |name: &str| match name {
            "model" => needs_model,
            "plan" => needs_plan,
            "noise" => kind == ExperimentKind::NoiseMap,
            "chevron" => kind == ExperimentKind::Chevron,
            "error_scan" => kind == ExperimentKind::ErrorScan,
            "spectral" => kind == ExperimentKind::Spectral,
            _ => false,
        };
        let allowed_solver = matches!(kind, ExperimentKind::NoiseMap);
        for (name, present, allowed) in sections {
            let allowed = allowed || (name == "solver" && allowed_solver);
            if present && !allowed {
                errs.push(format!("{name}: section is not used by kind `{}`", kind.name()));
            }
            if !present && required(name) {
                errs.push(format!("{name}: section is required by kind `{}`", kind.name()));
            }
        }
        if self.truncation < 2 {
            errs.push(format!("truncation must be >= 2, got {}", self.truncation));
        }
        if self.shots == Some(0) {
            errs.push("shots must be > 0".into());
        }
        if let Some(p) = &self.plan {
            if !(p.tau > 0.0 && p.tau.is_finite()) {
                errs.push("plan.tau must be > 0".into());
            }
            if !(p.order == 1 || p.order == 2) {
                errs.push(format!("plan.order must be 1 or 2, got {}", p.order));
            }
            if p.n_steps == 0 && kind != ExperimentKind::Compile {
                errs.push("plan.n_steps must be > 0".into());
            }
        }
        if let Some(s) = &self.solver {
            if !positive(s.dt) {
                errs.push("solver.dt must be > 0".into());
            }
        }
        let model = match &self.model {
            Some(mc) => match mc.build() {
                Ok(m) => Some(m),
                Err(e) => {
                    errs.push(format!("model: {}", e.to_string().trim_start_matches("config: ")));
                    None
                }
            },
            None => None,
        };
        if let Some(m) = &model {
            for (i, name) in self.observables.iter().enumerate() {
                if let Err(e) = named_observable(m, name) {
                    errs.push(format!("observables[{i}]: {}", e.to_string().trim_start_matches("config: ")));
                }
            }
            if let Some(init) = &self.initial {
                let want = m.n_sites + m.n_modes;
                if init.len() != want {
                    errs.push(format!("initial: expected {want} occupations (spins then modes), got {}", init.len()));
                } else if let Some((i, &v)) = init.iter().enumerate().find(|(i, &v)| {
                    let dim = if *i < m.n_sites { 2 } else { self.truncation };
                    v >= dim
                }) {
                    errs.push(format!("initial[{i}]: level {v} is outside the site dimension"));
                }
            }
            if let Some(n) = &self.noise {
                if let Err(e) = n.validate() {
                    errs.push(format!("noise: {e}"));
                } else if n.n_modes() != m.n_modes {
                    errs.push(format!("noise: lists {} modes but the model has {}", n.n_modes(), m.n_modes));
                }
            }
        } else if !self.observables.is_empty() && !needs_model {
            errs.push(format!("observables: not used by kind `{}`", kind.name()));
        }
        if let Some(c) = &self.chevron {
            match (&c.delta_phi, c.delta_phi_range) {
                (Some(_), Some(_)) => errs.push("chevron: give `delta_phi` or `delta_phi_range`, not both".into()),
                (None, None) => errs.push("chevron: one of `delta_phi` or `delta_phi_range` is required".into()),
                (None, Some((_, _, 0))) => errs.push("chevron.delta_phi_range: count must be > 0".into()),
                _ => {}
            }
            if c.steps == 0 {
                errs.push("chevron.steps must be > 0".into());
            }
            if !positive(c.tau) {
                errs.push("chevron.tau must be > 0".into());
            }
            if c.gamma_t_gate < 0.0 {
                errs.push("chevron.gamma_t_gate must be >= 0".into());
            }
        }
        if let Some(s) = &self.error_scan {
            if s.taus.len() < 2 {
                errs.push("error_scan.taus needs at least two values".into());
            }
            if s.taus.iter().any(|t| !positive(*t)) {
                errs.push("error_scan.taus must all be > 0".into());
            }
            if s.orders.iter().any(|o| !(*o == 1 || *o == 2)) {
                errs.push("error_scan.orders must be 1 or 2".into());
            }
            if !positive(s.t_total) {
                errs.push("error_scan.t_total must be > 0".into());
            }
        }
        if let Some(s) = &self.spectral {
            let n = s.v.len();
            if s.omega.len() != n || s.gamma.len() != n || s.dephasing.as_ref().is_some_and(|g| g.len() != n) {
                errs.push("spectral: v, omega, gamma and dephasing must have equal lengths".into());
            }
            if s.grid.2 < 2 {
                errs.push("spectral.grid: count must be >= 2".into());
            }
            if !positive(s.dt) || s.n_times < 2 {
                errs.push("spectral: dt must be > 0 and n_times >= 2".into());
            }
        }
        if let Some(e) = &self.encoding {
            if e.d.iter().any(|&d| d < 2) {
                errs.push("encoding.d: every truncation must be >= 2".into());
            }
        }
        errs
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let errs = self.diagnostics();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invalid(errs))
        }
    }
}

/// Flags that override config values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub truncation: Option<usize>,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
        if let Some(d) = o.truncation {
            self.truncation = d;
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub config: RunConfig,
    pub artifacts: Vec<Artifact>,
    pub summary: BTreeMap<String, serde_json::Value>,
    pub wall_time_s: f64,
}

/// Collects artifacts in memory; written out together with the manifest.
#[derive(Default)]
struct Outputs {
    files: Vec<(String, String)>,
    summary: BTreeMap<String, serde_json::Value>,
}

impl Outputs {
    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn note(&mut self, key: &str, v: impl Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(v).expect("summary values serialize"));
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("artifacts serialize") + "\n"
}

fn observables(cfg: &RunConfig, model: &ModelSpec) -> crate::Result<Vec<Observable>> {
    cfg.observables.iter().map(|n| named_observable(model, n)).collect()
}

fn initial(cfg: &RunConfig, model: &ModelSpec) -> Vec<usize> {
    cfg.initial.clone().unwrap_or_else(|| vec![0; model.n_sites + model.n_modes])
}

/// `series,t,observable,value` rows of several named series.
fn series_csv(named: &[(&str, &TimeSeries)]) -> String {
    let mut s = String::from("series,t,observable,value\n");
    for (label, ts) in named {
        for (t, row) in ts.times.iter().zip(&ts.values) {
            for (name, v) in ts.names.iter().zip(row) {
                let _ = writeln!(s, "{label},{t},{name},{}", fmt_num(*v));
            }
        }
    }
    s
}

/// Sampled `P_*` observables: `series,t,observable,estimate,stderr`, one seed per row.
fn sampled_csv(label: &str, ts: &TimeSeries, shots: u64, seed: u64) -> crate::Result<String> {
    let mut s = String::from("series,t,observable,estimate,stderr\n");
    let mut idx = 0u64;
    for (t, row) in ts.times.iter().zip(&ts.values) {
        for (name, v) in ts.names.iter().zip(row) {
            if name.starts_with("P_") {
                let mut rng = ChaCha8Rng::seed_from_u64(point_seed(seed, idx));
                let (est, err) = sample_probability(*v, shots, &mut rng)?;
                let _ = writeln!(s, "{label},{t},{name},{},{}", fmt_num(est), fmt_num(err));
            }
            idx += 1;
        }
    }
    Ok(s)
}

const PLOT_SERIES: &str = r#"import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "series.csv"
data = defaultdict(lambda: ([], []))
with open(path) as f:
    for row in csv.DictReader(f):
        key = (row["observable"], row["series"])
        data[key][0].append(float(row["t"]))
        data[key][1].append(float(row["value"]))
names = sorted({k[0] for k in data})
fig, axes = plt.subplots(len(names), 1, figsize=(7, 2.5 * len(names)), sharex=True, squeeze=False)
for ax, name in zip(axes[:, 0], names):
    for (obs, series), (t, v) in sorted(data.items()):
        if obs == name:
            ax.plot(t, v, label=series)
    ax.set_ylabel(name)
    ax.legend(fontsize=8)
axes[-1, 0].set_xlabel("t")
fig.tight_layout()
fig.savefig(path.replace(".csv", ".png"), dpi=150)
"#;

const PLOT_CHEVRON: &str = r#"import csv
import sys

import matplotlib.pyplot as plt
import numpy as np

path = sys.argv[1] if len(sys.argv) > 1 else "chevron.csv"
rows = list(csv.DictReader(open(path)))
steps = sorted({int(r["steps"]) for r in rows})
phis = sorted({float(r["delta_phi"]) for r in rows})
grid = np.zeros((len(steps), len(phis)))
for r in rows:
    grid[steps.index(int(r["steps"])), phis.index(float(r["delta_phi"]))] = float(r["population"])
plt.pcolormesh(np.array(phis) / np.pi, steps, grid, shading="nearest", cmap="viridis")
plt.xlabel("delta phi / pi")
plt.ylabel("steps")
plt.colorbar(label="population")
plt.savefig(path.replace(".csv", ".png"), dpi=150)
"#;

const PLOT_ERROR_SCAN: &str = r#"import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "error_scan.csv"
curves = defaultdict(lambda: ([], []))
for r in csv.DictReader(open(path)):
    key = (int(r["order"]), int(r["d"]))
    curves[key][0].append(float(r["tau"]))
    curves[key][1].append(float(r["state_error"]))
for (order, d), (tau, err) in sorted(curves.items()):
    plt.loglog(tau, err, "o-", label=f"order {order}, d={d}")
plt.xlabel("tau")
plt.ylabel("state error")
plt.legend()
plt.savefig(path.replace(".csv", ".png"), dpi=150)
"#;

const PLOT_SPECTRAL: &str = r#"import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "spectral.csv"
rows = list(csv.DictReader(open(path)))
w = [float(r["omega"]) for r in rows]
for col in rows[0]:
    if col != "omega":
        plt.plot(w, [float(r[col]) for r in rows], label=col)
plt.xlabel("omega")
plt.ylabel("S(omega)")
plt.legend()
plt.savefig(path.replace(".csv", ".png"), dpi=150)
"#;

fn run_simulate(cfg: &RunConfig, out: &mut Outputs) -> crate::Result<()> {
    let model = cfg.model.as_ref().expect("validated").build()?;
    let pc = cfg.plan.as_ref().expect("validated");
    let plan = pc.plan();
    let obs = observables(cfg, &model)?;
    if obs.is_empty() {
        return Ok(());
    }
    let init = initial(cfg, &model);
    let d = cfg.truncation;
    let noisy = cfg.noise.as_ref().filter(|n| !n.is_zero());
    let trotter = match noisy {
        Some(n) => simulate_noisy_trotter(&model, &plan, pc.network, n, d, &init, &obs)?,
        None => simulate_trotter(&model, &plan, pc.network, d, &init, &obs)?,
    };
    let exact = simulate_exact(&model, plan.frame, d, &init, &obs, &trotter.times)?;
    let label = if noisy.is_some() { "trotter-noisy" } else { "trotter" };
    out.add("series.csv", series_csv(&[("exact", &exact), (label, &trotter)]));
    out.note("max_abs_deviation_from_exact", trotter.max_abs_diff(&exact));
    if let Some(shots) = cfg.shots {
        out.add("sampled.csv", sampled_csv(label, &trotter, shots, cfg.seed)?);
    }
    out.add("plot_series.py", PLOT_SERIES.to_string());
    Ok(())
}

fn run_compile(cfg: &RunConfig, out: &mut Outputs) -> crate::Result<()> {
    let model = cfg.model.as_ref().expect("validated").build()?;
    let pc = cfg.plan.as_ref().expect("validated");
    let comp = Compiler::new(&model, &pc.plan(), pc.network)?;
    let circuit = comp.circuit()?;
    let step = comp.step(0)?;
    let n_qubits = model.n_sites.max(model.n_modes);
    let report = MetricsReport::new(&model.name, &circuit, n_qubits, comp.n_modes());
    let step_report = MetricsReport::new(&format!("{} step", model.name), &step, n_qubits, comp.n_modes());
    out.add("circuit.json", circuit.to_json() + "\n");
    out.add("metrics.json", report.to_json() + "\n");
    out.add("metrics.csv", report.to_csv());
    out.add("step_metrics.csv", step_report.to_csv());
    out.note("depth", report.metrics.depth);
    out.note("entangling", report.metrics.entangling);
    out.note("drive_shift", &comp.drive_shift);
    Ok(())
}

fn run_noise_map(cfg: &RunConfig, out: &mut Outputs) -> crate::Result<()> {
    let model = cfg.model.as_ref().expect("validated").build()?;
    let pc = cfg.plan.as_ref().expect("validated");
    let plan = pc.plan();
    let noise = cfg.noise.as_ref().expect("validated");
    let comp = Compiler::new(&model, &plan, pc.network)?;
    let eff = effective_lindbladian(&comp.step(0)?, noise, plan.tau, model.n_sites.max(model.n_modes))?;
    out.add("effective_noise.json", json(&eff));
    out.note("d_k", &eff.d_k);
    out.note("effective_linewidths", eff.linewidths());
    let obs = observables(cfg, &model)?;
    if obs.is_empty() {
        return Ok(());
    }
    let init = initial(cfg, &model);
    let d = cfg.truncation;
    let dt = cfg.solver.clone().unwrap_or_default().dt;
    let series = [0usize, 1, 2, 3]
        .par_iter()
        .map(|&which| match which {
            0 => simulate_trotter(&model, &plan, pc.network, d, &init, &obs),
            1 => simulate_noisy_trotter(&model, &plan, pc.network, noise, d, &init, &obs),
            _ => {
                let times: Vec<f64> = (0..=plan.n_steps).map(|m| m as f64 * plan.tau).collect();
                if which == 2 {
                    simulate_exact(&model, plan.frame, d, &init, &obs, &times)
                } else {
                    simulate_lindblad_model(&model, &eff.as_rates(), d, &init, &obs, &times, dt)
                }
            }
        })
        .collect::<crate::Result<Vec<TimeSeries>>>()?;
    let [clean, noisy, exact, lind] = <[TimeSeries; 4]>::try_from(series).expect("four series");
    out.add("exact.csv", exact.to_csv());
    out.add("trotter-noiseless.csv", clean.to_csv());
    out.add("trotter-noisy.csv", noisy.to_csv());
    out.add("effective-lindblad.csv", lind.to_csv());
    out.add(
        "series.csv",
        series_csv(&[
            ("exact", &exact),
            ("trotter-noiseless", &clean),
            ("trotter-noisy", &noisy),
            ("effective-lindblad", &lind),
        ]),
    );
    out.note("max_noisy_vs_effective", noisy.max_abs_diff(&lind));
    out.note("max_noiseless_vs_exact", clean.max_abs_diff(&exact));
    out.add("plot_series.py", PLOT_SERIES.to_string());
    Ok(())
}

fn run_chevron(cfg: &RunConfig, out: &mut Outputs) -> crate::Result<()> {
    let c = cfg.chevron.as_ref().expect("validated");
    let demo = c.demo(cfg.truncation);
    let res = replicate_manifold_demo(&demo)?;
    out.add("chevron.csv", res.to_csv());
    let fitted = res.fitted_frequencies();
    let mut freq = String::from("delta_phi,fitted_angle,digitized_angle,continuous_angle\n");
    let alpha = demo.manifold.effective_angle();
    for (dp, f) in res.delta_phi.iter().zip(&fitted) {
        let digit = analysis::digitized_rabi_angle(alpha, *dp);
        let cont = analysis::rabi_frequency(*dp / demo.tau, demo.v_eff()) * demo.tau;
        let _ = writeln!(freq, "{dp},{f},{digit},{cont}");
    }
    out.add("frequencies.csv", freq);
    out.note("phi0", res.phi0);
    if let Some(shots) = cfg.shots {
        let mut s = String::from("steps,delta_phi,estimate,stderr\n");
        for (i, dp) in res.delta_phi.iter().enumerate() {
            for (n, st) in res.steps.iter().enumerate() {
                let idx = (i * res.steps.len() + n) as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(point_seed(cfg.seed, idx));
                let (est, err) = sample_probability(res.population[i][n], shots, &mut rng)?;
                let _ = writeln!(s, "{st},{dp},{},{}", fmt_num(est), fmt_num(err));
            }
        }
        out.add("chevron_sampled.csv", s);
    }
    out.add("plot_chevron.py", PLOT_CHEVRON.to_string());
    Ok(())
}

fn run_error_scan(cfg: &RunConfig, out: &mut Outputs) -> crate::Result<()> {
    let model = cfg.model.as_ref().expect("validated").build()?;
    let s = cfg.error_scan.as_ref().expect("validated");
    let network = cfg.plan.as_ref().map(|p| p.network).unwrap_or_default();
    let sc = ScanConfig {
        orders: s.orders.clone(),
        taus: s.taus.clone(),
        ds: s.ds.clone().unwrap_or_else(|| vec![cfg.truncation]),
        t_total: s.t_total,
        initial: initial(cfg, &model),
        network,
    };
    let report = trotter_error_scan(&model, &sc)?;
    out.add("error_scan.csv", report.to_csv());
    let mut fits = String::from("order,d,metric,exponent,stderr\n");
    for f in &report.fits {
        let _ = writeln!(fits, "{},{},{},{},{}", f.order, f.d, f.metric, f.exponent, fmt_num(f.stderr));
    }
    out.add("fits.csv", fits);
    out.note("monotone_in_d", report.monotone_in_d);
    out.add("plot_error_scan.py", PLOT_ERROR_SCAN.to_string());
    Ok(())
}

fn run_spectral(cfg: &RunConfig, out: &mut Outputs) -> crate::Result<()> {
    let s = cfg.spectral.as_ref().expect("validated");
    let grid = linspace(s.grid.0, s.grid.1, s.grid.2);
    let dephasing = s.dephasing.clone().unwrap_or_else(|| vec![0.0; s.v.len()]);
    let widths: Vec<f64> = s.gamma.iter().zip(&dephasing).map(|(g, p)| g / 2.0 + p).collect();
    let lorentz = spectral_function(&s.v, &s.omega, &widths, &grid)?;
    let numeric = if s.correlation {
        let d = cfg.truncation;
        let parts = (0..s.v.len())
            .into_par_iter()
            .map(|k| {
                let corr = bath_correlation(s.v[k], s.omega[k], s.gamma[k], dephasing[k], d, s.dt, s.n_times)?;
                Ok(correlation_spectrum(&corr, s.dt, &grid))
            })
            .collect::<crate::Result<Vec<Vec<f64>>>>()?;
        Some((0..grid.len()).map(|i| parts.iter().map(|p| p[i]).sum()).collect::<Vec<f64>>())
    } else {
        None
    };
    let mut csv = String::from(if numeric.is_some() { "omega,lorentzian,correlation\n" } else { "omega,lorentzian\n" });
    for (i, w) in grid.iter().enumerate() {
        match &numeric {
            Some(n) => {
                let _ = writeln!(csv, "{w},{},{}", fmt_num(lorentz[i]), fmt_num(n[i]));
            }
            None => {
                let _ = writeln!(csv, "{w},{}", fmt_num(lorentz[i]));
            }
        }
    }
    out.add("spectral.csv", csv);
    out.note("linewidths", widths);
    out.add("plot_spectral.py", PLOT_SPECTRAL.to_string());
    Ok(())
}

/// `d,encoding,qubits,resonators,entangling,pauli_strings` rows.
pub fn encoding_table(ds: &[usize]) -> crate::Result<String> {
    let mut s = String::from("d,encoding,qubits,resonators,entangling,pauli_strings\n");
    for &d in ds {
        for (name, code) in
            [("resonator-qubit", Encoding::ResonatorQubit), ("unary", Encoding::Unary), ("binary", Encoding::Binary)]
        {
            let c = encoding_cost(d, code)?;
            let _ = writeln!(s, "{d},{name},{},{},{},{}", c.qubits, c.resonators, c.entangling, c.pauli_strings);
        }
    }
    Ok(s)
}

fn run_encoding(cfg: &RunConfig, out: &mut Outputs) -> crate::Result<()> {
    let e = cfg.encoding.clone().unwrap_or_default();
    out.add("encoding_cost.csv", encoding_table(&e.d)?);
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs a validated config and writes its directory. Returns the manifest.
pub fn run(cfg: &RunConfig) -> Result<Manifest, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut out = Outputs::default();
    let result = match cfg.kind {
        ExperimentKind::Simulate => run_simulate(cfg, &mut out),
        ExperimentKind::Compile => run_compile(cfg, &mut out),
        ExperimentKind::NoiseMap => run_noise_map(cfg, &mut out),
        ExperimentKind::Chevron => run_chevron(cfg, &mut out),
        ExperimentKind::ErrorScan => run_error_scan(cfg, &mut out),
        ExperimentKind::Spectral => run_spectral(cfg, &mut out),
        ExperimentKind::EncodingCost => run_encoding(cfg, &mut out),
    };
    result?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(cfg.kind.name()));
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let mut artifacts = Vec::new();
    for (name, contents) in &out.files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
        artifacts.push(Artifact { path: name.clone(), sha256: sha256_hex(contents.as_bytes()), bytes: contents.len() });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        kind: cfg.kind.name().into(),
        config: cfg.clone(),
        artifacts,
        summary: out.summary,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let path = dir.join("manifest.json");
    fs::write(&path, json(&manifest)).map_err(|e| io_err(&path, e))?;
    Ok(manifest)
}

#[derive(Parser, Debug)]
#[command(name = "rqsim", version, about = "Resonator-qubit simulation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for sweep grids.
        #[arg(long)]
        jobs: Option<usize>,
        /// Override the boson truncation d.
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// Check a config file and report every problem.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the config schema.
    Schema,
    /// Print the encoding-cost table for the given truncations.
    EncodingCost {
        #[arg(long = "d", num_args = 1.., default_values_t = vec![4usize, 8, 16, 32])]
        d: Vec<usize>,
    },
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Executes a parsed command line, printing to stdout/stderr. Returns the exit code.
pub fn execute(cli: Cli) -> i32 {
    let result: Result<(), CliError> = match cli.command {
        Command::Run { config, seed, out, jobs, truncation } => (|| {
            if jobs == Some(0) {
                return Err(CliError::Invalid(vec!["--jobs must be > 0".into()]));
            }
            let mut cfg = load_config(&config)?;
            cfg.apply(&Overrides { seed, out, jobs, truncation });
            let manifest = with_jobs(jobs, || run(&cfg))??;
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(cfg.kind.name()));
            println!("{} run written to {} ({} artifacts)", manifest.kind, dir.display(), manifest.artifacts.len());
            Ok(())
        })(),
        Command::Validate { config } => load_config(&config).and_then(|c| c.validate()).map(|_| {
            println!("{}: ok", config.display());
        }),
        Command::Schema => {
            print!("{SCHEMA}");
            Ok(())
        }
        Command::EncodingCost { d } => {
            if d.iter().any(|&x| x < 2) {
                Err(CliError::Invalid(vec!["--d: every truncation must be >= 2".into()]))
            } else {
                encoding_table(&d).map(|t| print!("{t}")).map_err(CliError::from)
            }
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprint!("{e}");
            e.exit_code()
        }
    }
}
