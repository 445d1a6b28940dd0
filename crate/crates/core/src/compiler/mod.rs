//! Lowering of models to resonator-qubit circuits: Trotter steps, swap networks,
//! virtual-Z folding, metrics and encoding costs.
//!
//! Physical layout: qubits `0..N` in a chain with `N = max(n_sites, n_modes)`, and
//! resonator `k` (register site `N + k`) next to qubit `k`. Logical site `i` starts on
//! qubit `i`; unused qubits act as free buses.

pub mod fold;
pub mod metrics;
pub mod schedule;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateset::{
    cnot, hadamard, lc_gate, phased_jc, qr_gate, quadratic_coupling_circuit, rz, s_gate, sdg_gate, swap_gate, fswap_gate,
    Circuit, Gate, QrOrder, QuadraticKind, TrotterMeta,
};
use crate::hilbert::{OperatorSum, QuantumState, Register, SiteOp, Term};
use crate::linalg::{C64, ZERO};
use crate::models::{Coupling, CouplingKind, Frame, ModelSpec, PairKind, Statistics, SystemTerm};

pub use fold::fold_virtual_z;
pub use metrics::{encoding_cost, metrics, scaling_exponent, CircuitMetrics, Encoding, EncodingCost, MetricsReport};
pub use schedule::{
    linear_swap_network, quadratic_swap_network, BlockExchange, Interaction, LayerKind, SwapLayer, SwapSchedule,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseConvention {
    /// Coupling phases at `(m + ½)τ`.
    #[default]
    Midpoint,
    /// Coupling phases at `mτ`.
    LeftEdge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterPlan {
    pub order: u8,
    pub tau: f64,
    pub n_steps: usize,
    #[serde(default)]
    pub phase_convention: PhaseConvention,
    #[serde(default = "default_frame")]
    pub frame: Frame,
    /// Fold Z rotations into PRX phases.
    #[serde(default = "yes")]
    pub fold_phases: bool,
}

fn default_frame() -> Frame {
    Frame::RotatingModes
}

fn yes() -> bool {
    true
}

impl TrotterPlan {
    pub fn new(order: u8, tau: f64, n_steps: usize) -> Self {
        Self {
            order,
            tau,
            n_steps,
            phase_convention: PhaseConvention::Midpoint,
            frame: Frame::RotatingModes,
            fold_phases: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.order == 1 || self.order == 2) {
            return Err(Error::InvalidArgument(format!("Trotter order {} is not 1 or 2", self.order)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("Trotter step tau = {} must be positive", self.tau)));
        }
        Ok(())
    }

    /// Time at which coupling phases of step `m` are evaluated.
    pub fn phase_time(&self, m: usize) -> f64 {
        match self.phase_convention {
            PhaseConvention::Midpoint => (m as f64 + 0.5) * self.tau,
            PhaseConvention::LeftEdge => m as f64 * self.tau,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Network {
    #[default]
    Auto,
    Linear,
    Quadratic,
    /// No routing: gates act directly on logical sites, in the order a network would
    /// use. Serves as the unrouted reference.
    None,
}

/// The model a compiled circuit simulates: qubit form with parity strings and linear
/// drives shifted away as in [`absorb_drives`]. Mode occupations refer to the shifted
/// modes `b'`.
pub fn reference_model(model: &ModelSpec) -> Result<ModelSpec> {
    Ok(absorb_drives(&model.qubit_model())?.0)
}

/// Removes linear drives `f_k b_k† + h.c.` by the shift `b_k = b_k' + β_k`,
/// `β_k = -f_k/ω_k`, in the lab frame. Returns the shifted model and `β`.
pub fn absorb_drives(model: &ModelSpec) -> Result<(ModelSpec, Vec<C64>)> {
    let drives = model.drives_or_zero();
    let mut beta = vec![ZERO; model.n_modes];
    if drives.iter().all(|f| f.norm() == 0.0) {
        return Ok((model.clone(), beta));
    }
    let mut out = model.clone();
    out.drives.clear();
    for (k, f) in drives.iter().enumerate() {
        if f.norm() == 0.0 {
            continue;
        }
        let w = model.omegas[k];
        if w == 0.0 {
            return Err(Error::UnsupportedTerm(format!("drive on mode {k} with zero frequency cannot be shifted away")));
        }
        beta[k] = -f / w;
        out.offset -= f.norm_sqr() / w;
    }
    for cpl in &model.couplings {
        let b = beta[cpl.mode];
        if b.norm() == 0.0 {
            continue;
        }
        // C (v b† + v* b) gains C (v β* + v* β).
        let shift = cpl.amplitude * b.conj();
        let real = 2.0 * shift.re;
        match cpl.kind {
            CouplingKind::Longitudinal => out.system.push(SystemTerm::Onsite { site: cpl.sites[0], eps: 2.0 * real }),
            CouplingKind::Density => {
                out.system.push(SystemTerm::Onsite { site: cpl.sites[0], eps: -real });
                out.offset += real / 2.0;
            }
            CouplingKind::QuadraticXX => out.system.push(SystemTerm::Pair {
                i: cpl.sites[0],
                j: cpl.sites[1],
                value: C64::new(real, 0.0),
                kind: PairKind::XX,
                string: cpl.string.clone(),
            }),
            CouplingKind::QuadraticHopping => out.system.push(SystemTerm::Pair {
                i: cpl.sites[0],
                j: cpl.sites[1],
                value: C64::new(real, 0.0),
                kind: PairKind::Hopping,
                string: cpl.string.clone(),
            }),
            CouplingKind::QuadraticChiral => out.system.push(SystemTerm::Pair {
                i: cpl.sites[0],
                j: cpl.sites[1],
                value: shift,
                kind: PairKind::Hopping,
                string: cpl.string.clone(),
            }),
            CouplingKind::Transverse | CouplingKind::RotatingWave => {
                return Err(Error::UnsupportedTerm(format!(
                    "shifting a driven mode under a {:?} coupling creates a transverse field",
                    cpl.kind
                )))
            }
        }
    }
    Ok((out, beta))
}

/// Prepared compilation of one model under a plan.
#[derive(Clone, Debug)]
pub struct Compiler {
    pub model: ModelSpec,
    pub plan: TrotterPlan,
    pub network: Network,
    pub n_qubits: usize,
    pub onsite: Vec<(usize, f64)>,
    pub interactions: Vec<Interaction>,
    pub schedule: SwapSchedule,
    /// Displacement `β_k` applied to absorb drives.
    pub drive_shift: Vec<C64>,
    fermionic: bool,
}

fn flip_for_sign(v: C64, complex_ok: bool, what: &str) -> Result<(f64, f64)> {
    if !complex_ok && v.im.abs() > 1e-15 * v.norm().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "{what} coupling needs a real amplitude, got {v}; put phases into the model frequencies"
        )));
    }
    if complex_ok {
        Ok((v.norm(), v.arg()))
    } else if v.re < 0.0 {
        Ok((-v.re, PI))
    } else {
        Ok((v.re, 0.0))
    }
}

impl Compiler {
    pub fn new(model: &ModelSpec, plan: &TrotterPlan, network: Network) -> Result<Self> {
        plan.validate()?;
        model.validate()?;
        let fermionic = model.statistics == Statistics::Fermion;
        let lowered = model.lowered_for_routing();
        let (lowered, drive_shift) = absorb_drives(&lowered)?;
        let mut onsite = Vec::new();
        let mut interactions = Vec::new();
        for t in &lowered.system {
            match t {
                SystemTerm::Onsite { site, eps } => {
                    let eps = match plan.frame {
                        Frame::RotatingModesAndSpins { omega0 } => eps + omega0,
                        _ => *eps,
                    };
                    if eps != 0.0 {
                        onsite.push((*site, eps));
                    }
                }
                SystemTerm::Pair { i, j, value, kind, string } => {
                    if !string.is_empty() {
                        return Err(Error::UnsupportedTerm(format!("pair ({i},{j}) with a parity string")));
                    }
                    if value.norm() != 0.0 {
                        interactions.push(Interaction::Pair { i: *i, j: *j, kind: *kind, value: *value });
                    }
                }
                SystemTerm::Quartic { .. } | SystemTerm::Generic { .. } => {
                    return Err(Error::UnsupportedTerm(
                        "many-body system terms (two-electron integrals) have no gate decomposition here".into(),
                    ))
                }
            }
        }
        for Coupling { sites, mode, amplitude, kind, string } in &lowered.couplings {
            if !string.is_empty() {
                return Err(Error::UnsupportedTerm(format!("coupling on {sites:?} with a parity string")));
            }
            if amplitude.norm() != 0.0 {
                interactions.push(Interaction::Coupling {
                    sites: sites.clone(),
                    mode: *mode,
                    amplitude: *amplitude,
                    kind: *kind,
                });
            }
        }
        match plan.frame {
            Frame::Lab => {
                if lowered.omegas.iter().any(|&w| w != 0.0) {
                    return Err(Error::FrameMismatch(
                        "mode frequencies need resonator rotations in the lab frame; compile in a rotating frame".into(),
                    ));
                }
            }
            Frame::RotatingModes => {}
            Frame::RotatingModesAndSpins { omega0 } => {
                if lowered.omegas.iter().any(|&w| w != omega0) {
                    return Err(Error::UnsupportedTerm(
                        "mode detunings from the reference frequency need resonator rotations".into(),
                    ));
                }
                if interactions.iter().any(|t| matches!(t, Interaction::Coupling { kind, .. } if *kind != CouplingKind::RotatingWave))
                {
                    return Err(Error::FrameMismatch("the joint frame needs rotating-wave couplings".into()));
                }
            }
        }
        let n_qubits = lowered.n_sites.max(lowered.n_modes).max(1);
        let quadratic = interactions.iter().any(|t| t.is_quadratic());
        let schedule = match (network, quadratic) {
            (Network::Linear, _) | (Network::Auto, false) | (Network::None, false) => {
                linear_swap_network(n_qubits, &interactions)?
            }
            _ => quadratic_swap_network(n_qubits, &interactions)?,
        };
        if network == Network::None && fermionic {
            for t in &interactions {
                let (a, b) = match t {
                    Interaction::Pair { i, j, .. } => (*i, *j),
                    Interaction::Coupling { sites, .. } if sites.len() == 2 => (sites[0], sites[1]),
                    _ => continue,
                };
                if a.abs_diff(b) != 1 {
                    return Err(Error::UnsupportedTerm(format!(
                        "fermionic term between orbitals {a} and {b} needs a parity string without routing"
                    )));
                }
            }
        }
        Ok(Self {
            model: lowered,
            plan: plan.clone(),
            network,
            n_qubits,
            onsite,
            interactions,
            schedule,
            drive_shift,
            fermionic,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.model.n_modes
    }

    pub fn mode_site(&self, k: usize) -> usize {
        self.n_qubits + k
    }

    /// Physical site of a model site: spins keep their index, mode `k` moves to `N + k`.
    pub fn physical_site(&self, model_site: usize) -> usize {
        if model_site < self.model.n_sites {
            model_site
        } else {
            self.mode_site(model_site - self.model.n_sites)
        }
    }

    /// An operator on model sites, relabelled onto the compiled register.
    pub fn to_physical(&self, op: &OperatorSum) -> OperatorSum {
        OperatorSum {
            terms: op
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff,
                    ops: t.ops.iter().map(|o| SiteOp { kind: o.kind, site: self.physical_site(o.site) }).collect(),
                })
                .collect(),
        }
    }

    /// Product state on `reg` from occupations of the model sites (spins, then modes).
    pub fn basis_state(&self, reg: &Register, occupation: &[usize]) -> Result<QuantumState> {
        let n = self.model.n_sites + self.model.n_modes;
        if occupation.len() != n {
            return Err(Error::InvalidArgument(format!(
                "initial occupation has {} entries, the model has {n} sites",
                occupation.len()
            )));
        }
        let mut occ = vec![0; reg.len()];
        for (s, &k) in occupation.iter().enumerate() {
            occ[self.physical_site(s)] = k;
        }
        QuantumState::basis(reg, &occ)
    }

    /// Register the circuits act on.
    pub fn register(&self, d: usize) -> Result<Register> {
        Register::qubits_then_modes(self.n_qubits, self.n_modes(), d)
    }

    fn routed(&self) -> bool {
        self.network != Network::None
    }

    fn swap(&self, a: usize, b: usize) -> Gate {
        if self.fermionic {
            fswap_gate(a, b).expect("distinct")
        } else {
            swap_gate(a, b).expect("distinct")
        }
    }

    fn positions(&self, slot: usize) -> Vec<usize> {
        if self.routed() {
            self.schedule.permutations[slot].clone()
        } else {
            (0..self.n_qubits).collect()
        }
    }

    fn coupling_phase(&self, mode: usize, t: f64) -> f64 {
        match self.plan.frame {
            Frame::RotatingModes => self.model.omegas[mode] * t,
            _ => 0.0,
        }
    }

    /// Gates for `exp(-i dt H_term)` at phase time `t`.
    fn interaction_gates(&self, term: &Interaction, slot: usize, dt: f64, t: f64, dir: QrOrder) -> Result<Vec<Gate>> {
        let pos = &self.positions(slot);
        let route = &self.schedule.permutations[slot];
        let mut g = Vec::new();
        match term {
            Interaction::Pair { i, j, kind, value } => {
                let (a, b) = (pos[*i], pos[*j]);
                match kind {
                    PairKind::ZZ => g.push(zz(a, b, dt * value.re)),
                    PairKind::XX => g.extend(xx(a, b, dt * value.re)),
                    PairKind::DensityDensity => {
                        let v = dt * value.re;
                        g.push(rz(a, -v / 2.0));
                        g.push(rz(b, -v / 2.0));
                        g.push(zz(a, b, v / 4.0));
                    }
                    PairKind::Hopping => {
                        let alpha = value.arg();
                        let theta = dt * value.norm();
                        g.push(rz(a, -alpha));
                        g.push(hopping(a, b, theta));
                        g.push(rz(a, alpha));
                    }
                }
            }
            Interaction::Coupling { sites, mode, amplitude, kind } => {
                let ms = self.mode_site(*mode);
                let base = self.coupling_phase(*mode, t);
                let complex_ok = matches!(kind, CouplingKind::RotatingWave | CouplingKind::QuadraticChiral);
                let (mag, arg) = flip_for_sign(*amplitude, complex_ok, &format!("{kind:?}"))?;
                let theta = dt * mag;
                let phi = base + arg;
                match kind {
                    CouplingKind::Transverse => g.push(qr_gate(pos[sites[0]], ms, theta, phi, dir)),
                    CouplingKind::Longitudinal => g.push(lc_gate(pos[sites[0]], ms, theta, phi, dir)),
                    CouplingKind::RotatingWave => g.push(phased_jc(pos[sites[0]], ms, theta, phi)),
                    CouplingKind::Density => unreachable!("density couplings are lowered"),
                    CouplingKind::QuadraticXX | CouplingKind::QuadraticHopping | CouplingKind::QuadraticChiral => {
                        let (pi, pj) = (pos[sites[0]], pos[sites[1]]);
                        let qk = match kind {
                            CouplingKind::QuadraticXX => QuadraticKind::XX,
                            CouplingKind::QuadraticHopping => QuadraticKind::HoppingReal,
                            _ => QuadraticKind::HoppingChiral,
                        };
                        // The core acts on the qubit at the mode in the routed layout; the
                        // unrouted reference keeps that choice.
                        let second_is_j = route[sites[1]] == *mode;
                        if second_is_j {
                            g.push(quadratic_coupling_circuit(qk, pi, pj, ms, theta, phi, dir)?);
                        } else if qk != QuadraticKind::HoppingChiral {
                            g.push(quadratic_coupling_circuit(qk, pj, pi, ms, theta, phi, dir)?);
                        } else {
                            g.push(self.swap(pi, pj));
                            g.push(quadratic_coupling_circuit(qk, pj, pi, ms, theta, phi, dir)?);
                            g.push(self.swap(pi, pj));
                        }
                    }
                }
            }
        }
        Ok(g)
    }

    fn swap_layer(&self, l: usize, undo: bool) -> Vec<Gate> {
        if !self.routed() {
            return vec![];
        }
        let mut e = self.schedule.layers[l].elementary();
        if undo {
            e.reverse();
        }
        e.into_iter().map(|(a, b)| self.swap(a, b)).collect()
    }

    fn onsite_gates(&self, pos: &[usize], dt: f64) -> Vec<Gate> {
        self.onsite.iter().map(|&(i, eps)| rz(pos[i], dt * eps)).collect()
    }

    /// Unfolded Trotter step `m` as a flat gate list.
    /// Terms of slot `s` in brick order: single-site couplings, then two-qubit terms
    /// on even and then odd leftmost qubits, so that neighbouring blocks run in parallel.
    /// The routed layout decides the order, so the unrouted reference applies the same product.
    fn slot_order(&self, s: usize) -> Vec<usize> {
        let pos = &self.schedule.permutations[s];
        let mut v = self.schedule.slots[s].clone();
        v.sort_by_key(|&ti| match &self.interactions[ti] {
            Interaction::Coupling { sites, .. } if sites.len() == 1 => (0, 0, pos[sites[0]], ti),
            Interaction::Coupling { sites, .. } => {
                let p = pos[sites[0]].min(pos[sites[1]]);
                (1, p % 2, p, ti)
            }
            Interaction::Pair { i, j, .. } => {
                let p = pos[*i].min(pos[*j]);
                (1, p % 2, p, ti)
            }
        });
        v
    }

    pub fn step_gates(&self, m: usize) -> Result<Vec<Gate>> {
        let tau = self.plan.tau;
        let t = self.plan.phase_time(m);
        let n_layers = self.schedule.layers.len();
        let mut gates = Vec::new();
        let dt = if self.plan.order == 2 { tau / 2.0 } else { tau };
        for s in 0..=n_layers {
            for ti in self.slot_order(s) {
                gates.extend(self.interaction_gates(&self.interactions[ti], s, dt, t, QrOrder::Forward)?);
            }
            if s < n_layers {
                gates.extend(self.swap_layer(s, false));
            }
        }
        let end = self.positions(n_layers);
        gates.extend(self.onsite_gates(&end, dt));
        if self.plan.order == 2 {
            gates.extend(self.onsite_gates(&end, dt));
            for s in (0..=n_layers).rev() {
                if s < n_layers {
                    gates.extend(self.swap_layer(s, true));
                }
                for ti in self.slot_order(s).into_iter().rev() {
                    gates.extend(self.interaction_gates(&self.interactions[ti], s, dt, t, QrOrder::Backward)?);
                }
            }
        } else {
            // Undo the routing so every step starts from the same layout.
            for l in (0..n_layers).rev() {
                gates.extend(self.swap_layer(l, true));
            }
        }
        Ok(gates)
    }

    fn wrap_step(&self, m: usize, body: Vec<Gate>) -> Gate {
        Gate::composite("trotter_step", vec![], vec![m as f64, self.plan.phase_time(m)], body)
    }

    fn finish(&self, name: &str, steps: Vec<Gate>, meta: Option<TrotterMeta>) -> Circuit {
        let mut c = Circuit::from_gates(name, steps);
        c.trotter = meta;
        if self.routed() {
            c.permutation = Some((0..self.n_qubits).collect());
        }
        if self.plan.fold_phases {
            fold_virtual_z(&c, self.n_qubits, self.n_modes()).0
        } else {
            c
        }
    }

    /// One Trotter step as a circuit.
    pub fn step(&self, m: usize) -> Result<Circuit> {
        let body = self.step_gates(m)?;
        let meta = TrotterMeta { step: m, tau: self.plan.tau };
        Ok(self.finish(&format!("{}_step_{m}", self.model.name), vec![self.wrap_step(m, body)], Some(meta)))
    }

    /// The full `n_steps` circuit. Steps differ only in phases and are built in parallel.
    pub fn circuit(&self) -> Result<Circuit> {
        let steps: Result<Vec<Gate>> = (0..self.plan.n_steps)
            .into_par_iter()
            .map(|m| Ok(self.wrap_step(m, self.step_gates(m)?)))
            .collect();
        Ok(self.finish(&self.model.name, steps?, None))
    }

    /// Distinct JC angles per mode, for gate calibration.
    pub fn calibration_table(&self, circuit: &Circuit) -> Vec<(usize, Vec<f64>)> {
        metrics::calibration_table(circuit, self.n_qubits, self.n_modes())
    }
}

/// `exp(-iθ σ_z σ_z)`.
pub fn zz(a: usize, b: usize, theta: f64) -> Gate {
    Gate::composite(
        "zz",
        vec![a, b],
        vec![theta],
        vec![cnot(a, b).expect("distinct"), rz(b, 2.0 * theta), cnot(a, b).expect("distinct")],
    )
}

/// `exp(-iθ σ_x σ_x)`.
pub fn xx(a: usize, b: usize, theta: f64) -> Vec<Gate> {
    vec![hadamard(a), hadamard(b), zz(a, b, theta), hadamard(a), hadamard(b)]
}

/// `exp(-iθ (σ_+σ_- + σ_-σ_+))`.
pub fn hopping(a: usize, b: usize, theta: f64) -> Gate {
    let mut body = xx(a, b, theta / 2.0);
    body.extend([sdg_gate(a), sdg_gate(b)]);
    body.extend(xx(a, b, theta / 2.0));
    body.extend([s_gate(a), s_gate(b)]);
    Gate::composite("hopping", vec![a, b], vec![theta], body)
}

/// One Trotter step of `model` with the automatic network.
pub fn trotter_step(model: &ModelSpec, plan: &TrotterPlan, m: usize) -> Result<Circuit> {
    if m >= plan.n_steps {
        return Err(Error::InvalidArgument(format!("step {m} is beyond n_steps = {}", plan.n_steps)));
    }
    Compiler::new(model, plan, Network::Auto)?.step(m)
}

/// Full compiled circuit.
pub fn compile(model: &ModelSpec, plan: &TrotterPlan, network: Network) -> Result<Circuit> {
    Compiler::new(model, plan, network)?.circuit()
}
