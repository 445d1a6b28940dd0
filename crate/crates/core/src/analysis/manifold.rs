//! Digitized Rabi oscillations in higher excitation manifolds of a qubit-resonator
//! pair, driven by a fixed π/2 JC gate, and the auxiliary-qubit initialization.
//!
//! In manifold `n` the JC coupling between `|1_q, (n-1)_r⟩` and `|0_q, n_r⟩` is `√n`
//! times the bare one, so a gate calibrated for a full swap in the first manifold
//! rotates by `√n·π/2` there.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateset::{jc_gate, rz, x, Circuit, Gate, Simulator};
use crate::hilbert::{QuantumState, Register, SiteKind};
use crate::linalg::CMatrix;
use crate::noise::{NoiseSpec, NoisySimulator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Manifold {
    /// `|1_q,1_r⟩ ↔ |0_q,2_r⟩`, three gates per step.
    Second,
    /// `|1_q,2_r⟩ ↔ |0_q,3_r⟩`, one gate per step.
    Third,
}

impl Manifold {
    pub fn excitations(self) -> usize {
        match self {
            Manifold::Second => 2,
            Manifold::Third => 3,
        }
    }

    pub fn gates_per_step(self) -> usize {
        match self {
            Manifold::Second => 3,
            Manifold::Third => 1,
        }
    }

    /// Small effective angle per step left after removing multiples of `π`.
    pub fn effective_angle(self) -> f64 {
        let total = manifold_angle(self.excitations(), self.gates_per_step(), FRAC_PI_2);
        let r = total.rem_euclid(PI);
        r.min(PI - r)
    }
}

/// `n_gates · √n · θ`: rotation of `n_gates` JC gates of angle `θ` in manifold `n`.
pub fn manifold_angle(n: usize, n_gates: usize, theta: f64) -> f64 {
    n_gates as f64 * (n as f64).sqrt() * theta
}

/// Rotation angle in `[0, 2π)` within manifold `n` of `n_gates` consecutive
/// `jc(θ)` gates, read off the simulated unitary.
pub fn simulated_manifold_angle(n: usize, n_gates: usize, theta: f64) -> Result<f64> {
    let reg = Register::new(vec![SiteKind::Qubit, SiteKind::Mode(n + 2)])?;
    let c = Circuit::from_gates("jc", (0..n_gates).map(|_| jc_gate(0, 1, theta)).collect());
    let u = Simulator::new(&reg).unitary(&c)?;
    let a = reg.basis_index(&[1, n - 1])?;
    let b = reg.basis_index(&[0, n])?;
    // U restricted to the manifold is cos β - i sin β σ_x.
    let cos = u[(a, a)].re;
    let sin = -u[(b, a)].im;
    Ok(sin.atan2(cos).rem_euclid(TAU))
}

/// Fits `P(n) = c + a cos(nΘ) + b sin(nΘ)` to a population series sampled once per
/// step, returning `Θ ∈ (0, π)` in radians per step.
pub fn fit_step_frequency(pop: &[f64]) -> f64 {
    let resid = |theta: f64| -> f64 {
        let rows: Vec<[f64; 3]> = (0..pop.len()).map(|n| [1.0, (n as f64 * theta).cos(), (n as f64 * theta).sin()]).collect();
        let mut ata = nalgebra::Matrix3::<f64>::zeros();
        let mut aty = nalgebra::Vector3::<f64>::zeros();
        for (r, &y) in rows.iter().zip(pop) {
            let v = nalgebra::Vector3::from_row_slice(r);
            ata += v * v.transpose();
            aty += v * y;
        }
        let coef = match ata.try_inverse() {
            Some(inv) => inv * aty,
            None => return f64::INFINITY,
        };
        rows.iter().zip(pop).map(|(r, y)| (coef.dot(&nalgebra::Vector3::from_row_slice(r)) - y).powi(2)).sum()
    };
    let n_grid = 2000;
    let lo = 1e-3;
    let hi = PI - 1e-3;
    let step = (hi - lo) / n_grid as f64;
    let best = (0..=n_grid)
        .map(|i| lo + i as f64 * step)
        .min_by(|a, b| resid(*a).partial_cmp(&resid(*b)).unwrap())
        .unwrap();
    // Golden-section refinement around the grid minimum.
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c1 = b - g * (b - a);
        let c2 = a + g * (b - a);
        if resid(c1) < resid(c2) {
            b = c2;
        } else {
            a = c1;
        }
    }
    (a + b) / 2.0
}

/// Per-step digitized Rabi angle for detuning phase `δφ` and effective coupling angle
/// `α`: `cos(Θ/2) = cos α cos(δφ/2)`.
pub fn digitized_rabi_angle(alpha: f64, delta_phi: f64) -> f64 {
    2.0 * (alpha.cos() * (delta_phi / 2.0).cos()).acos()
}

/// Continuous Rabi frequency `√(δε² + 4v²)`.
pub fn rabi_frequency(delta_eps: f64, v: f64) -> f64 {
    (delta_eps * delta_eps + 4.0 * v * v).sqrt()
}

/// Hardware JC: the ideal gate followed by a fixed qubit Z phase.
fn hw_jc(q: usize, r: usize, jc_phase: f64) -> Vec<Gate> {
    let mut g = vec![jc_gate(q, r, FRAC_PI_2)];
    if jc_phase != 0.0 {
        g.push(rz(q, jc_phase));
    }
    g
}

/// Gates of one Trotter step: `gates_per_step` hardware JC gates, each followed by a
/// frame correction `correction`; the last also carries the detuning phase.
pub fn manifold_step(manifold: Manifold, q: usize, r: usize, jc_phase: f64, correction: f64, delta_phi: f64) -> Vec<Gate> {
    let mut out = Vec::new();
    let n = manifold.gates_per_step();
    for i in 0..n {
        out.extend(hw_jc(q, r, jc_phase));
        let extra = if i + 1 == n { delta_phi } else { 0.0 };
        out.push(rz(q, correction + extra));
    }
    out
}

/// Initialization of `|1_q, 2_r⟩` with an auxiliary qubit: the main qubit loads one
/// photon, then the excited auxiliary qubit adds a second through two JC gates with
/// `R_z(varphi)` on the auxiliary qubit in between.
pub fn init_circuit(aux: usize, q: usize, r: usize, varphi: f64, jc_phase: f64) -> Circuit {
    let mut c = Circuit::new("aux_init");
    c.push(x(q));
    c.extend(hw_jc(q, r, jc_phase));
    c.push(x(q));
    c.push(x(aux));
    c.extend(hw_jc(aux, r, jc_phase));
    c.push(rz(aux, varphi));
    c.extend(hw_jc(aux, r, jc_phase));
    c
}

#[derive(Clone, Debug, Serialize)]
pub struct AuxInit {
    pub circuit: Circuit,
    pub varphi: f64,
    /// Probability of finding the auxiliary qubit in its ground state.
    pub acceptance: f64,
    /// Fidelity of the post-selected state with `|0_aux, 1_q, 2_r⟩`.
    pub fidelity: f64,
    /// `(varphi, acceptance)` over the sweep.
    pub sweep: Vec<(f64, f64)>,
}

const AUX: usize = 0;
const MAIN: usize = 1;
const RES: usize = 2;

fn aux_register(d: usize) -> Result<Register> {
    if d < 4 {
        return Err(Error::InsufficientTruncation { need: 4, got: d });
    }
    Register::new(vec![SiteKind::Qubit, SiteKind::Qubit, SiteKind::Mode(d)])
}

/// `Tr[Π ρ]` and `Tr[Π O ρ]` for the projector `Π` on the auxiliary ground state and
/// a diagonal observable `O` given by its value on basis states.
fn post_select(rho: &CMatrix, reg: &Register, obs: impl Fn(&[usize]) -> f64) -> (f64, f64) {
    let (mut acc, mut val) = (0.0, 0.0);
    for i in 0..reg.dim() {
        if reg.level(i, AUX) == 0 {
            let p = rho[(i, i)].re;
            acc += p;
            val += p * obs(&reg.occupation(i));
        }
    }
    (acc, val)
}

/// Sweeps `varphi` over `grid` points in `[0, 2π)` and returns the value that maximizes
/// the auxiliary ground-state probability. `gamma_t_gate` adds resonator damping to
/// every JC gate.
pub fn initialize_with_aux(d: usize, grid: usize, jc_phase: f64, gamma_t_gate: f64) -> Result<AuxInit> {
    let reg = aux_register(d)?;
    let noise = NoiseSpec::new(vec![gamma_t_gate], vec![0.0], 1.0)?;
    let sim = NoisySimulator::new(&reg, &noise)?;
    let target = reg.basis_index(&[0, 1, 2])?;
    let run = |varphi: f64| -> Result<(f64, f64)> {
        let mut rho = QuantumState::ground(&reg).to_density().elements;
        sim.apply(&init_circuit(AUX, MAIN, RES, varphi, jc_phase), &mut rho)?;
        let (acc, _) = post_select(&rho, &reg, |_| 0.0);
        Ok((acc, rho[(target, target)].re / acc))
    };
    let sweep: Vec<(f64, f64)> =
        (0..grid).map(|i| TAU * i as f64 / grid as f64).map(|p| Ok((p, run(p)?.0))).collect::<Result<_>>()?;
    let &(varphi, _) = sweep.iter().max_by(|a, b| a.1.partial_cmp(&b.1).unwrap()).unwrap();
    let (acceptance, fidelity) = run(varphi)?;
    Ok(AuxInit { circuit: init_circuit(AUX, MAIN, RES, varphi, jc_phase), varphi, acceptance, fidelity, sweep })
}

/// Settings of a manifold demonstration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldDemo {
    pub manifold: Manifold,
    /// Detuning phases `δφ = φ - φ₀`.
    pub delta_phi: Vec<f64>,
    /// Trotter steps; populations are recorded after `0..=steps` steps.
    pub steps: usize,
    /// Resonator damping per JC gate, `γ·t_gate`.
    #[serde(default)]
    pub gamma_t_gate: f64,
    /// Fixed qubit phase accompanying every JC gate.
    #[serde(default)]
    pub jc_phase: f64,
    #[serde(default = "default_d")]
    pub d: usize,
    /// Prepare the initial state with the auxiliary qubit and post-select on it.
    #[serde(default)]
    pub aux_init: bool,
    /// Find `φ₀` by a calibration sweep instead of computing it from `jc_phase`.
    #[serde(default)]
    pub calibrate: bool,
    /// Simulated time per step, for converting phases to energies.
    #[serde(default = "default_tau")]
    pub tau: f64,
}

fn default_d() -> usize {
    5
}

fn default_tau() -> f64 {
    1.0
}

impl ManifoldDemo {
    pub fn new(manifold: Manifold, delta_phi: Vec<f64>, steps: usize) -> Self {
        Self {
            manifold,
            delta_phi,
            steps,
            gamma_t_gate: 0.0,
            jc_phase: 0.0,
            d: default_d(),
            aux_init: false,
            calibrate: false,
            tau: default_tau(),
        }
    }

    /// `v_eff = α/τ` with `α` the effective angle per step.
    pub fn v_eff(&self) -> f64 {
        self.manifold.effective_angle() / self.tau
    }
}

/// Population heatmap of a manifold demonstration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChevronResult {
    pub manifold: Manifold,
    pub delta_phi: Vec<f64>,
    pub steps: Vec<usize>,
    /// Frame correction used between gates.
    pub phi0: f64,
    /// Main-qubit excited population, `population[i][n]` for `delta_phi[i]` after `n` steps.
    pub population: Vec<Vec<f64>>,
    /// Probability of remaining in the simulated manifold.
    pub manifold_population: Vec<Vec<f64>>,
    /// Post-selection acceptance (1 without the auxiliary qubit).
    pub acceptance: Vec<Vec<f64>>,
}

impl ChevronResult {
    /// Long format: `steps,delta_phi,population,acceptance`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("steps,delta_phi,population,acceptance\n");
        for (i, dp) in self.delta_phi.iter().enumerate() {
            for (n, st) in self.steps.iter().enumerate() {
                s.push_str(&format!(
                    "{st},{dp},{},{}\n",
                    crate::linalg::fmt_num(self.population[i][n]),
                    crate::linalg::fmt_num(self.acceptance[i][n])
                ));
            }
        }
        s
    }

    /// Fitted step frequency `Θ(δφ)` of each row.
    pub fn fitted_frequencies(&self) -> Vec<f64> {
        self.population.iter().map(|p| fit_step_frequency(p)).collect()
    }
}

struct Series {
    pop: Vec<f64>,
    manifold: Vec<f64>,
    acceptance: Vec<f64>,
}

fn run_series(demo: &ManifoldDemo, correction: f64, delta_phi: f64, init_varphi: Option<f64>) -> Result<Series> {
    let reg = aux_register(demo.d.max(demo.manifold.excitations() + 1))?;
    let noise = NoiseSpec::new(vec![demo.gamma_t_gate], vec![0.0], 1.0)?;
    let sim = NoisySimulator::new(&reg, &noise)?;
    let n_exc = demo.manifold.excitations();
    let mut rho = match init_varphi {
        Some(varphi) => {
            let mut r = QuantumState::ground(&reg).to_density().elements;
            sim.apply(&init_circuit(AUX, MAIN, RES, varphi, demo.jc_phase), &mut r)?;
            r
        }
        None => QuantumState::basis(&reg, &[0, 1, n_exc - 1])?.to_density().elements,
    };
    let step = Circuit::from_gates("step", manifold_step(demo.manifold, MAIN, RES, demo.jc_phase, correction, delta_phi));
    let mut out = Series { pop: vec![], manifold: vec![], acceptance: vec![] };
    for n in 0..=demo.steps {
        if n > 0 {
            sim.apply(&step, &mut rho)?;
        }
        let (acc, pe) = post_select(&rho, &reg, |o| o[MAIN] as f64);
        let (_, pm) = post_select(&rho, &reg, |o| if o[MAIN] + o[RES] == n_exc { 1.0 } else { 0.0 });
        out.pop.push(pe / acc);
        out.manifold.push(pm / acc);
        out.acceptance.push(acc);
    }
    Ok(out)
}

/// Frame correction found by sweeping it over `grid` points in `[0, 2π)` at zero
/// detuning without noise, keeping the value whose population curve is closest to
/// resonant Rabi oscillations with the effective angle.
pub fn calibrate_correction(manifold: Manifold, jc_phase: f64, steps: usize, grid: usize) -> Result<f64> {
    let mut demo = ManifoldDemo::new(manifold, vec![0.0], steps);
    demo.jc_phase = jc_phase;
    let alpha = manifold.effective_angle();
    let theory: Vec<f64> = (0..=steps).map(|n| (n as f64 * alpha).cos().powi(2)).collect();
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..grid {
        let phi = TAU * i as f64 / grid as f64;
        let s = run_series(&demo, phi, 0.0, None)?;
        let dev: f64 = s.pop.iter().zip(&theory).map(|(a, b)| (a - b).powi(2)).sum();
        if dev < best.0 {
            best = (dev, phi);
        }
    }
    Ok(best.1)
}

/// Chevron map of digitized Rabi oscillations over `δφ` and step count.
pub fn replicate_manifold_demo(demo: &ManifoldDemo) -> Result<ChevronResult> {
    if demo.manifold == Manifold::Third && demo.d < 4 || demo.d < 3 {
        return Err(Error::InsufficientTruncation { need: demo.manifold.excitations() + 1, got: demo.d });
    }
    let phi0 = if demo.calibrate {
        calibrate_correction(demo.manifold, demo.jc_phase, demo.steps.max(10), 256)?
    } else {
        (-demo.jc_phase).rem_euclid(TAU)
    };
    let init = if demo.aux_init {
        if demo.manifold != Manifold::Third {
            return Err(Error::InvalidArgument("auxiliary initialization prepares the third manifold".into()));
        }
        Some(initialize_with_aux(demo.d, 64, demo.jc_phase, demo.gamma_t_gate)?.varphi)
    } else {
        None
    };
    let rows: Vec<Series> = demo.delta_phi.par_iter().map(|&dp| run_series(demo, phi0, dp, init)).collect::<Result<_>>()?;
    Ok(ChevronResult {
        manifold: demo.manifold,
        delta_phi: demo.delta_phi.clone(),
        steps: (0..=demo.steps).collect(),
        phi0,
        population: rows.iter().map(|r| r.pop.clone()).collect(),
        manifold_population: rows.iter().map(|r| r.manifold.clone()).collect(),
        acceptance: rows.iter().map(|r| r.acceptance.clone()).collect(),
    })
}

/// Evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifold_angles() {
        let third = manifold_angle(3, 1, FRAC_PI_2);
        assert!((third - (PI - 0.42)).abs() < 0.005);
        assert!((manifold_angle(2, 1, FRAC_PI_2) - (PI - 0.92)).abs() < 0.005);
        assert!((manifold_angle(2, 2, FRAC_PI_2) - (PI + 1.30)).abs() < 0.005);
        assert!((manifold_angle(2, 3, FRAC_PI_2) - (TAU + 0.38)).abs() < 0.005);
        for (n, k) in [(3, 1), (2, 1), (2, 2), (2, 3)] {
            let sim = simulated_manifold_angle(n, k, FRAC_PI_2).unwrap();
            let want = manifold_angle(n, k, FRAC_PI_2).rem_euclid(TAU);
            assert!((sim - want).abs() < 1e-12, "{n} {k} {sim} {want}");
        }
        assert!((Manifold::Third.effective_angle() - 0.4209).abs() < 1e-4);
        assert!((Manifold::Second.effective_angle() - 0.3811).abs() < 1e-4);
    }

    #[test]
    fn frequency_fit_is_exact_on_clean_series() {
        let pop: Vec<f64> = (0..40).map(|n| 0.3 + 0.5 * (n as f64 * 0.77 + 0.2).cos()).collect();
        assert!((fit_step_frequency(&pop) - 0.77).abs() < 1e-8);
    }

    #[test]
    fn resonant_oscillation_has_effective_angle() {
        for m in [Manifold::Third, Manifold::Second] {
            let r = replicate_manifold_demo(&ManifoldDemo::new(m, vec![0.0], 40)).unwrap();
            let theta = r.fitted_frequencies()[0];
            assert!((theta - 2.0 * m.effective_angle()).abs() < 1e-8, "{m:?} {theta}");
        }
    }

    #[test]
    fn detuned_rate_follows_digitized_formula() {
        let dps = linspace(-FRAC_PI_2, FRAC_PI_2, 9);
        let r = replicate_manifold_demo(&ManifoldDemo::new(Manifold::Third, dps.clone(), 40)).unwrap();
        for (dp, th) in dps.iter().zip(r.fitted_frequencies()) {
            let want = digitized_rabi_angle(Manifold::Third.effective_angle(), *dp);
            assert!((th - want).abs() < 1e-7, "{dp} {th} {want}");
        }
    }

    #[test]
    fn chevron_is_symmetric_in_detuning() {
        let dps = linspace(-PI, PI, 16);
        let mut demo = ManifoldDemo::new(Manifold::Third, dps, 20);
        demo.gamma_t_gate = 0.03;
        let r = replicate_manifold_demo(&demo).unwrap();
        let n = r.delta_phi.len();
        for i in 0..n / 2 {
            for (a, b) in r.population[i].iter().zip(&r.population[n - 1 - i]) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        assert!(r.population.iter().flatten().all(|p| (-1e-12..=1.0 + 1e-12).contains(p)));
    }

    #[test]
    fn damping_shrinks_manifold_population_monotonically() {
        let mut demo = ManifoldDemo::new(Manifold::Third, vec![0.0], 40);
        demo.gamma_t_gate = 0.03;
        let r = replicate_manifold_demo(&demo).unwrap();
        let m = &r.manifold_population[0];
        assert!(m.windows(2).all(|w| w[1] < w[0]));
        assert!(m[40] < 0.5);
    }

    #[test]
    fn fixed_gate_phase_is_compensated() {
        let p = 0.9 * PI;
        let mut demo = ManifoldDemo::new(Manifold::Second, vec![0.0, 0.4], 30);
        demo.jc_phase = p;
        let with_phase = replicate_manifold_demo(&demo).unwrap();
        let ideal = replicate_manifold_demo(&ManifoldDemo::new(Manifold::Second, vec![0.0, 0.4], 30)).unwrap();
        for (a, b) in with_phase.population.iter().flatten().zip(ideal.population.iter().flatten()) {
            assert!((a - b).abs() < 1e-10);
        }
        let cal = calibrate_correction(Manifold::Second, p, 30, 256).unwrap();
        assert!((cal - (-p).rem_euclid(TAU)).abs() < TAU / 256.0 + 1e-12, "{cal}");
    }

    #[test]
    fn aux_initialization() {
        let init = initialize_with_aux(5, 64, 0.0, 0.0).unwrap();
        // Two √2·π/2 rotations with the best phase between transfer sin²(√2 π).
        let ideal = (2f64.sqrt() * PI).sin().powi(2);
        assert!((init.acceptance - ideal).abs() < 1e-9, "{}", init.acceptance);
        assert!(init.fidelity > 0.99);
        assert!(init.varphi.abs() < 1e-12);
        assert!(matches!(initialize_with_aux(3, 8, 0.0, 0.0), Err(Error::InsufficientTruncation { need: 4, got: 3 })));
        let noisy = initialize_with_aux(5, 64, 0.0, 0.01).unwrap();
        assert!(noisy.acceptance < init.acceptance);
    }

    #[test]
    fn aux_post_selected_chevron_matches_direct_start() {
        let mut demo = ManifoldDemo::new(Manifold::Third, vec![0.3], 15);
        demo.aux_init = true;
        let a = replicate_manifold_demo(&demo).unwrap();
        demo.aux_init = false;
        let b = replicate_manifold_demo(&demo).unwrap();
        for (x, y) in a.population[0].iter().zip(&b.population[0]) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(a.acceptance[0].iter().all(|&p| (p - a.acceptance[0][0]).abs() < 1e-12));
    }
}
