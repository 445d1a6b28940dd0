//! Observables, Trotter-error analysis and the excitation-manifold demonstrations.

mod coherent;
mod manifold;
mod trotter_error;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

pub use coherent::{coherent_error_defect, coherent_error_scaling, CoherentErrorScaling};
pub use manifold::{
    calibrate_correction, digitized_rabi_angle, fit_step_frequency, init_circuit, initialize_with_aux, linspace,
    manifold_angle, manifold_step, rabi_frequency, replicate_manifold_demo, simulated_manifold_angle, AuxInit,
    ChevronResult, Manifold, ManifoldDemo,
};
pub use trotter_error::{
    alpha1, alpha2, alpha2_bound, circuit_defect, fit_power_law, projection_ratio, qr_split, scan_point,
    trotter_error_scan, trotter_step_defect, trotter_tolerance, ErrorOperator, ExponentFit, ScanConfig, ScanPoint,
    TrotterErrorReport, TROTTER_STEP_C1, TROTTER_STEP_C2,
};
pub use crate::noise::{Observable, TimeSeries};

use crate::compiler::{Compiler, Network, TrotterPlan};
use crate::error::{Error, Result};
use crate::gateset::Simulator;
use crate::hilbert::{DensityMatrix, OpKind, OperatorSum, QuantumState, Register};
use crate::linalg::{self, cis, CVector, C64, ONE};
use crate::models::{build, coupling_operator, Frame, ModelSpec};

/// Anything with expectation values of operators on model sites.
pub trait Expect {
    fn expect(&self, op: &OperatorSum) -> Result<C64>;
}

impl Expect for QuantumState {
    fn expect(&self, op: &OperatorSum) -> Result<C64> {
        self.expectation(op)
    }
}

impl Expect for DensityMatrix {
    fn expect(&self, op: &OperatorSum) -> Result<C64> {
        self.expectation(op)
    }
}

/// `P_i = ½(1 + ⟨σ_z^i⟩)`.
pub fn population_op(site: usize) -> OperatorSum {
    (OperatorSum::identity(ONE) + OperatorSum::op(OpKind::SigmaZ, site)).scale_re(0.5)
}

/// The system part `C` of coupling `v C b† + h.c.`, read off its `b†` terms.
fn coupling_system_part(model: &ModelSpec, idx: usize) -> OperatorSum {
    let cpl = &model.couplings[idx];
    let site = model.mode_site(cpl.mode);
    let full = coupling_operator(cpl, ONE, site);
    OperatorSum {
        terms: full
            .terms
            .into_iter()
            .filter(|t| t.ops.iter().any(|o| o.site == site && o.kind == OpKind::Create))
            .map(|mut t| {
                t.ops.retain(|o| o.site != site);
                t
            })
            .collect(),
    }
}

/// Hermitian parts `(X + X†)/2` and `(X - X†)/2i`.
fn re_im(x: &OperatorSum) -> (OperatorSum, OperatorSum) {
    let xd = x.adjoint();
    let re = (x.clone() + xd.clone()).scale_re(0.5);
    let im = (x.clone() - xd).scale(C64::new(0.0, -0.5));
    (re, im)
}

/// Names of the standard observables of a model:
///
/// * `P_i`: populations `½(1 + ⟨σ_z^i⟩)`,
/// * `spsm_i_j_re`, `spsm_i_j_im`: `⟨σ_+^i σ_-^j⟩` for `i ≠ j`,
/// * `Cb_c_re`, `Cb_c_im`: `⟨C b_k†⟩` for coupling `c`,
/// * `n_k`: mode occupations,
/// * `energy`: `⟨H_s⟩ + Σ_k ω_k ⟨n_k⟩`.
pub fn observable_names(model: &ModelSpec) -> Vec<String> {
    let mut out: Vec<String> = (0..model.n_sites).map(|i| format!("P_{i}")).collect();
    for i in 0..model.n_sites {
        for j in 0..model.n_sites {
            if i != j {
                out.push(format!("spsm_{i}_{j}_re"));
                out.push(format!("spsm_{i}_{j}_im"));
            }
        }
    }
    for c in 0..model.couplings.len() {
        out.push(format!("Cb_{c}_re"));
        out.push(format!("Cb_{c}_im"));
    }
    out.extend((0..model.n_modes).map(|k| format!("n_{k}")));
    out.push("energy".into());
    out
}

/// The Hermitian operator behind a standard observable name.
pub fn named_observable(model: &ModelSpec, name: &str) -> Result<Observable> {
    let unknown = || {
        Error::Config(format!("unknown observable `{name}`; valid names: {}", observable_names(model).join(", ")))
    };
    let idx = |s: &str, max: usize| s.parse::<usize>().ok().filter(|&i| i < max).ok_or_else(unknown);
    let parts: Vec<&str> = name.split('_').collect();
    let pick = |x: OperatorSum, part: &str| {
        let (re, im) = re_im(&x);
        match part {
            "re" => Ok(re),
            "im" => Ok(im),
            _ => Err(unknown()),
        }
    };
    let op = match parts.as_slice() {
        ["P", i] => population_op(idx(i, model.n_sites)?),
        ["n", k] => OperatorSum::op(OpKind::Number, model.mode_site(idx(k, model.n_modes)?)),
        ["energy"] => {
            let mut h = model.system_hamiltonian();
            for (k, w) in model.omegas.iter().enumerate() {
                h = h + OperatorSum::op(OpKind::Number, model.mode_site(k)).scale_re(*w);
            }
            h
        }
        ["spsm", i, j, part] => {
            let (i, j) = (idx(i, model.n_sites)?, idx(j, model.n_sites)?);
            if i == j {
                return Err(unknown());
            }
            pick(OperatorSum::product(ONE, &[(OpKind::SigmaPlus, i), (OpKind::SigmaMinus, j)]), part)?
        }
        ["Cb", c, part] => {
            let c = idx(c, model.couplings.len())?;
            let site = model.mode_site(model.couplings[c].mode);
            pick(coupling_system_part(model, c).try_mul(&OperatorSum::op(OpKind::Create, site))?, part)?
        }
        _ => return Err(unknown()),
    };
    Ok(Observable::new(name, op))
}

/// All standard observables of a state, by name. See [`observable_names`].
pub fn observables_suite(model: &ModelSpec, state: &impl Expect) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for name in observable_names(model) {
        let o = named_observable(model, &name)?;
        out.insert(name, state.expect(&o.op)?.re);
    }
    Ok(out)
}

/// Pure-state Trotter simulation of the compiled model. Observables act on model
/// sites; values are recorded at `t = 0` and after every step, in the frame of the plan.
pub fn simulate_trotter(
    model: &ModelSpec,
    plan: &TrotterPlan,
    network: Network,
    d: usize,
    initial: &[usize],
    observables: &[Observable],
) -> Result<TimeSeries> {
    let mut plan = plan.clone();
    plan.fold_phases = false;
    let comp = Compiler::new(model, &plan, network)?;
    let reg = comp.register(d)?;
    let mut psi = comp.basis_state(&reg, initial)?;
    let ops: Vec<OperatorSum> = observables.iter().map(|o| comp.to_physical(&o.op)).collect();
    let sim = Simulator::new(&reg);
    let mut series = TimeSeries::new(observables.iter().map(|o| o.name.clone()).collect());
    let record = |psi: &QuantumState| ops.iter().map(|o| Ok(psi.expectation(o)?.re)).collect::<Result<Vec<f64>>>();
    series.push(0.0, record(&psi)?);
    for m in 0..plan.n_steps {
        for g in comp.step_gates(m)? {
            sim.apply_gate_state(&g, &mut psi)?;
        }
        series.push((m + 1) as f64 * plan.tau, record(&psi)?);
    }
    Ok(series)
}

/// Largest change of any observable when the truncation is raised from `d` to `d + 2`.
pub fn truncation_drift(
    model: &ModelSpec,
    plan: &TrotterPlan,
    network: Network,
    d: usize,
    initial: &[usize],
    observables: &[Observable],
) -> Result<f64> {
    let a = simulate_trotter(model, plan, network, d, initial, observables)?;
    let b = simulate_trotter(model, plan, network, d + 2, initial, observables)?;
    Ok(a.max_abs_diff(&b))
}

/// Diagonal of the frame generator `H_0` with `ψ_frame(t) = e^{iH_0 t} ψ_lab(t)`.
fn frame_diagonal(model: &ModelSpec, frame: Frame, reg: &Register) -> Vec<f64> {
    let modes = |i: usize| -> f64 {
        (0..model.n_modes).map(|k| model.omegas[k] * reg.level(i, model.mode_site(k)) as f64).sum()
    };
    (0..reg.dim())
        .map(|i| match frame {
            Frame::Lab => 0.0,
            Frame::RotatingModes => modes(i),
            Frame::RotatingModesAndSpins { omega0 } => {
                // ω₀ times the excitation number; spins are excited at level 1.
                let n: usize = (0..model.n_modes).map(|k| reg.level(i, model.mode_site(k))).sum::<usize>()
                    + (0..model.n_sites).map(|s| reg.level(i, s)).sum::<usize>();
                omega0 * n as f64
            }
        })
        .collect()
}

/// Exact pure-state evolution of the model from a basis state, by diagonalizing the
/// lab Hamiltonian, reported in `frame` at `times`. Models with drives evolve in the
/// shifted frame of [`crate::compiler::reference_model`], as compiled circuits do.
pub fn simulate_exact(
    model: &ModelSpec,
    frame: Frame,
    d: usize,
    initial: &[usize],
    observables: &[Observable],
    times: &[f64],
) -> Result<TimeSeries> {
    let model = &crate::compiler::reference_model(model)?;
    let reg = model.register(d)?;
    let psi0 = QuantumState::basis(&reg, initial)?;
    let (vals, v) = linalg::eigh(&build(model, Frame::Lab, 0.0)?.embed(&reg)?);
    let c0 = v.adjoint() * &psi0.amplitudes;
    let diag = frame_diagonal(model, frame, &reg);
    let mut series = TimeSeries::new(observables.iter().map(|o| o.name.clone()).collect());
    for &t in times {
        let ct = CVector::from_iterator(c0.len(), c0.iter().zip(&vals).map(|(a, l)| a * cis(-l * t)));
        let mut amps = &v * ct;
        for (a, w) in amps.iter_mut().zip(&diag) {
            *a *= cis(w * t);
        }
        let psi = QuantumState { register: reg.clone(), amplitudes: amps };
        series.push(t, observables.iter().map(|o| Ok(psi.expectation(&o.op)?.re)).collect::<Result<_>>()?);
    }
    Ok(series)
}

/// Finite-shot estimate of a probability: binomial draw over `shots`, with its
/// standard error `√(p̂(1-p̂)/N)`.
pub fn sample_probability(p: f64, shots: u64, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    if shots == 0 {
        return Err(Error::InvalidArgument("sampling needs at least one shot".into()));
    }
    let p = p.clamp(0.0, 1.0);
    let k = Binomial::new(shots, p).map_err(|e| Error::InvalidArgument(e.to_string()))?.sample(rng);
    let est = k as f64 / shots as f64;
    Ok((est, (est * (1.0 - est) / shots as f64).sqrt()))
}

/// Seed of grid point `index` derived from a base seed.
pub fn point_seed(base: u64, index: u64) -> u64 {
    use sha2::{Digest, Sha256};
    let h = Sha256::digest([base.to_le_bytes(), index.to_le_bytes()].concat());
    u64::from_le_bytes(h[..8].try_into().expect("8 bytes"))
}

/// Populations `P_i` estimated from `shots` measurements each, seeded per site.
pub fn sampled_populations(model: &ModelSpec, state: &impl Expect, shots: u64, seed: u64) -> Result<BTreeMap<String, (f64, f64)>> {
    let mut out = BTreeMap::new();
    for i in 0..model.n_sites {
        let p = state.expect(&population_op(i))?.re;
        let mut rng = ChaCha8Rng::seed_from_u64(point_seed(seed, i as u64));
        out.insert(format!("P_{i}"), sample_probability(p, shots, &mut rng)?);
    }
    Ok(out)
}
