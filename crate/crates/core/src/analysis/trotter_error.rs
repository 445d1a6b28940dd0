//! Leading-order Trotter error operators and numerical error scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::{Compiler, Network, TrotterPlan};
use crate::error::{Error, Result};
use crate::gateset::{targets, Simulator};
use crate::hilbert::{OpKind, OperatorSum, QuantumState, Register};
use crate::linalg::{self, c, CMatrix, C64, IM};
use crate::models::{self, Frame, ModelSpec};

/// An error generator on a register: anti-Hermitian matrix and its spectral norm.
#[derive(Clone, Debug)]
pub struct ErrorOperator {
    pub matrix: CMatrix,
    pub norm: f64,
}

impl ErrorOperator {
    fn new(matrix: CMatrix) -> Self {
        let norm = linalg::spectral_norm(&matrix);
        Self { matrix, norm }
    }
}

fn comm(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

fn embed_all(partials: &[OperatorSum], reg: &Register) -> Result<Vec<CMatrix>> {
    partials.iter().map(|h| h.embed(reg)).collect()
}

/// `α₁ = (-iτ)² ½ Σ_{i<j} [H_j, H_i]` for partials listed in application order.
pub fn alpha1(partials: &[OperatorSum], tau: f64, reg: &Register) -> Result<ErrorOperator> {
    if partials.len() < 2 {
        return Err(Error::InvalidArgument("alpha1 needs at least two partial Hamiltonians".into()));
    }
    let hs = embed_all(partials, reg)?;
    let mut acc = CMatrix::zeros(reg.dim(), reg.dim());
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            acc += comm(&hs[j], &hs[i]);
        }
    }
    Ok(ErrorOperator::new(acc * c(-tau * tau / 2.0, 0.0)))
}

/// `α₂ = i(τ/2)³(-½[A+B,[A,B]] + ⅙[A-B,[A,B]])`, the leading error of
/// `e^{-iτA/2} e^{-iτB} e^{-iτA/2}`.
pub fn alpha2(a: &OperatorSum, b: &OperatorSum, tau: f64, reg: &Register) -> Result<ErrorOperator> {
    let (a, b) = (a.embed(reg)?, b.embed(reg)?);
    let ab = comm(&a, &b);
    let m = comm(&(&a + &b), &ab) * c(-0.5, 0.0) + comm(&(&a - &b), &ab) * c(1.0 / 6.0, 0.0);
    Ok(ErrorOperator::new(m * (IM * (tau / 2.0).powi(3))))
}

/// `τ³ Σ_i Σ_{j<k} ‖[H_i, [H_j, H_k]]‖`, bounding the second-order error.
pub fn alpha2_bound(partials: &[OperatorSum], tau: f64, reg: &Register) -> Result<f64> {
    let hs = embed_all(partials, reg)?;
    let mut total = 0.0;
    for j in 0..hs.len() {
        for k in j + 1..hs.len() {
            let jk = comm(&hs[j], &hs[k]);
            for h in &hs {
                total += linalg::spectral_norm(&comm(h, &jk));
            }
        }
    }
    Ok(tau.powi(3) * total)
}

/// `[H_JC, H_AJC]` with amplitude `v`, in the order the QR gate applies them.
pub fn qr_split(qubit: usize, mode: usize, v: f64) -> [OperatorSum; 2] {
    [targets::jc(qubit, mode, 0.0).scale_re(v), targets::anti_jc(qubit, mode, 0.0).scale_re(v)]
}

/// `log(U) + iτH`: the generator by which `U` misses `exp(-iτH)`.
pub fn circuit_defect(u: &CMatrix, h: &CMatrix, tau: f64) -> Result<CMatrix> {
    Ok(linalg::logm_unitary(u)? + h * (IM * tau))
}

/// Projection coefficient `⟨a, b⟩ / ⟨a, a⟩` in the Frobenius inner product.
pub fn projection_ratio(reference: &CMatrix, measured: &CMatrix) -> f64 {
    let num: C64 = reference.iter().zip(measured.iter()).map(|(x, y)| x.conj() * y).sum();
    num.re / reference.norm_squared()
}

/// One point of a Trotter-error scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub order: u8,
    pub tau: f64,
    pub d: usize,
    /// Largest deviation of a spin population from the exact solution over the run.
    pub population_error: f64,
    /// Largest `sqrt(1 - |⟨ψ_exact|ψ⟩|²)` over the run.
    pub state_error: f64,
}

/// Fitted power law `error ∝ τ^p` for one order and truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub order: u8,
    pub d: usize,
    pub metric: String,
    pub exponent: f64,
    /// Standard error of the fitted slope (zero for two-point fits).
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrotterErrorReport {
    pub points: Vec<ScanPoint>,
    pub fits: Vec<ExponentFit>,
    /// State error is non-decreasing in `d` at every `(order, τ)`.
    pub monotone_in_d: bool,
}

impl TrotterErrorReport {
    pub fn fit(&self, order: u8, d: usize, metric: &str) -> Option<&ExponentFit> {
        self.fits.iter().find(|f| f.order == order && f.d == d && f.metric == metric)
    }

    pub fn point(&self, order: u8, tau: f64, d: usize) -> Option<&ScanPoint> {
        self.points.iter().find(|p| p.order == order && (p.tau - tau).abs() < 1e-12 && p.d == d)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("order,tau,d,population_error,state_error\n");
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                p.order,
                p.tau,
                p.d,
                linalg::fmt_num(p.population_error),
                linalg::fmt_num(p.state_error)
            ));
        }
        s
    }
}

/// Least-squares slope of `log y` against `log x`, with its standard error.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if lx.len() < 3 {
        return (slope, 0.0);
    }
    let resid: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    (slope, (resid / (n - 2.0) / sxx).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub orders: Vec<u8>,
    pub taus: Vec<f64>,
    pub ds: Vec<usize>,
    /// Total simulated time.
    pub t_total: f64,
    /// Occupations of the model sites (spins, then modes).
    pub initial: Vec<usize>,
    #[serde(default)]
    pub network: Network,
}

/// Diagonal of `Σ ω_k n_k` on the compiled register.
fn bath_diagonal(comp: &Compiler, reg: &Register) -> Vec<f64> {
    (0..reg.dim())
        .map(|i| (0..comp.n_modes()).map(|k| comp.model.omegas[k] * reg.level(i, comp.mode_site(k)) as f64).sum())
        .collect()
}

/// Errors of one `(order, τ, d)` against exact propagation, compared in the frame of
/// the plan at every step boundary.
pub fn scan_point(model: &ModelSpec, order: u8, tau: f64, d: usize, t_total: f64, initial: &[usize], network: Network) -> Result<ScanPoint> {
    let n = (t_total / tau).round() as usize;
    if n == 0 {
        return Err(Error::InvalidArgument(format!("t_total = {t_total} is shorter than tau = {tau}")));
    }
    let mut plan = TrotterPlan::new(order, tau, n);
    plan.fold_phases = false;
    let comp = Compiler::new(model, &plan, network)?;
    let reference = crate::compiler::reference_model(model)?;
    let reg = comp.register(d)?;
    let psi0 = comp.basis_state(&reg, initial)?;
    let h = comp.to_physical(&models::build(&reference, Frame::Lab, 0.0)?).embed(&reg)?;
    let u = linalg::exp_hermitian(&h, tau);
    let bath = bath_diagonal(&comp, &reg);
    let spins: Vec<OperatorSum> = (0..model.n_sites).map(|s| OperatorSum::op(OpKind::SigmaZ, comp.physical_site(s))).collect();
    let sim = Simulator::new(&reg);
    let mut psi = psi0.clone();
    let mut lab = psi0.amplitudes.clone();
    let (mut pop_err, mut state_err) = (0.0f64, 0.0f64);
    for m in 0..n {
        for g in comp.step_gates(m)? {
            sim.apply_gate_state(&g, &mut psi)?;
        }
        lab = &u * lab;
        let t = (m + 1) as f64 * tau;
        let exact_amps = match plan.frame {
            Frame::Lab => lab.clone(),
            Frame::RotatingModes => {
                let mut v = lab.clone();
                for (i, z) in v.iter_mut().enumerate() {
                    *z *= linalg::cis(bath[i] * t);
                }
                v
            }
            Frame::RotatingModesAndSpins { .. } => {
                return Err(Error::FrameMismatch("error scans compare in the lab or mode-rotating frame".into()))
            }
        };
        let exact = QuantumState { register: reg.clone(), amplitudes: exact_amps };
        let ov = psi.overlap(&exact).norm_sqr();
        state_err = state_err.max((1.0 - ov).max(0.0).sqrt());
        for z in &spins {
            let a = psi.expectation(z)?.re;
            let b = exact.expectation(z)?.re;
            pop_err = pop_err.max(0.5 * (a - b).abs());
        }
    }
    Ok(ScanPoint { order, tau, d, population_error: pop_err, state_error: state_err })
}

/// Per-step tolerance constants `C` in `defect ≤ C (τ‖H‖)^{order+1}`, fitted on the
/// two-spin Dicke example and doubled.
pub const TROTTER_STEP_C1: f64 = 0.094;
pub const TROTTER_STEP_C2: f64 = 0.021;

/// Allowed defect of one Trotter step with `x = τ‖H‖`.
pub fn trotter_tolerance(order: u8, x: f64) -> f64 {
    if order == 1 {
        TROTTER_STEP_C1 * x * x
    } else {
        TROTTER_STEP_C2 * x.powi(3)
    }
}

/// Distance of one compiled Trotter step `m` from the exact time-ordered step
/// propagator, and `τ‖H‖` with `H` taken at the step midpoint. The exact propagator is a
/// product of `substeps` midpoint exponentials.
pub fn trotter_step_defect(model: &ModelSpec, order: u8, tau: f64, d: usize, m: usize, substeps: usize) -> Result<(f64, f64)> {
    let mut plan = TrotterPlan::new(order, tau, m + 1);
    plan.fold_phases = false;
    let comp = Compiler::new(model, &plan, Network::Auto)?;
    let reg = comp.register(d)?;
    let u = crate::gateset::circuit_unitary(&comp.step(m)?, &reg)?;
    let t0 = m as f64 * tau;
    let reference = crate::compiler::reference_model(model)?;
    let h_at = |t: f64| -> Result<CMatrix> { comp.to_physical(&models::build(&reference, plan.frame, t)?).embed(&reg) };
    let dt = tau / substeps as f64;
    let mut exact = linalg::identity(reg.dim());
    for j in 0..substeps {
        exact = linalg::exp_hermitian(&h_at(t0 + (j as f64 + 0.5) * dt)?, dt) * exact;
    }
    let h_norm = linalg::spectral_norm(&h_at(t0 + tau / 2.0)?);
    Ok((linalg::phase_aligned_distance(&u, &exact), tau * h_norm))
}

/// Error table over `(order, τ, d)` with fitted τ-exponents per order and truncation.
pub fn trotter_error_scan(model: &ModelSpec, cfg: &ScanConfig) -> Result<TrotterErrorReport> {
    if cfg.taus.len() < 2 {
        return Err(Error::InvalidArgument("an error scan needs at least two values of tau".into()));
    }
    let mut grid = Vec::new();
    for &order in &cfg.orders {
        for &d in &cfg.ds {
            for &tau in &cfg.taus {
                grid.push((order, tau, d));
            }
        }
    }
    let points: Vec<ScanPoint> = grid
        .par_iter()
        .map(|&(order, tau, d)| scan_point(model, order, tau, d, cfg.t_total, &cfg.initial, cfg.network))
        .collect::<Result<_>>()?;
    let mut fits = Vec::new();
    for &order in &cfg.orders {
        for &d in &cfg.ds {
            let sel: Vec<&ScanPoint> = points.iter().filter(|p| p.order == order && p.d == d).collect();
            let taus: Vec<f64> = sel.iter().map(|p| p.tau).collect();
            for (metric, ys) in [
                ("state", sel.iter().map(|p| p.state_error).collect::<Vec<_>>()),
                ("population", sel.iter().map(|p| p.population_error).collect::<Vec<_>>()),
            ] {
                if ys.iter().all(|&y| y > 0.0) {
                    let (exponent, stderr) = fit_power_law(&taus, &ys);
                    fits.push(ExponentFit { order, d, metric: metric.into(), exponent, stderr });
                }
            }
        }
    }
    let mut ds = cfg.ds.clone();
    ds.sort_unstable();
    let monotone_in_d = cfg.orders.iter().all(|&o| {
        cfg.taus.iter().all(|&t| {
            let errs: Vec<f64> = ds
                .iter()
                .filter_map(|&d| points.iter().find(|p| p.order == o && p.tau == t && p.d == d))
                .map(|p| p.state_error)
                .collect();
            errs.windows(2).all(|w| w[1] >= w[0])
        })
    });
    Ok(TrotterErrorReport { points, fits, monotone_in_d })
}
