//! Resonator damping and dephasing: Lindblad evolution, noisy JC gates, the effective
//! noise of a Trotter step and the spectral function of a broadened bath.
//!
//! The dissipator of mode `k` is
//! `γ_k (b ρ b† - ½{n, ρ}) + 2Γ_k (n ρ n - ½{n², ρ})`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::compiler::{metrics, Compiler, Network, TrotterPlan};
use crate::error::{Error, Result};
use crate::gateset::{Circuit, Gate, Simulator};
use crate::hilbert::{DensityMatrix, LocalAction, OpKind, OperatorSum, QuantumState, Register};
use crate::linalg::{self, c, cis, CMatrix, SparseMatrix, C64, IM, ONE, ZERO};
use crate::models::{Frame, ModelSpec};

/// Per-mode resonator noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Damping rates `γ_k`.
    pub gamma: Vec<f64>,
    /// Dephasing rates `Γ_k`.
    pub dephasing: Vec<f64>,
    /// Duration of one JC gate.
    pub t_gate: f64,
    #[serde(default)]
    pub placement: NoisePlacement,
}

/// Where the gate noise `exp(t_gate L_N)` sits relative to the ideal gate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoisePlacement {
    #[default]
    After,
    /// Half the noise before and half after the gate.
    Symmetric,
}

impl NoiseSpec {
    pub fn new(gamma: Vec<f64>, dephasing: Vec<f64>, t_gate: f64) -> Result<Self> {
        let s = Self { gamma, dephasing, t_gate, placement: NoisePlacement::After };
        s.validate()?;
        Ok(s)
    }

    pub fn uniform(n_modes: usize, gamma: f64, dephasing: f64, t_gate: f64) -> Result<Self> {
        Self::new(vec![gamma; n_modes], vec![dephasing; n_modes], t_gate)
    }

    pub fn noiseless(n_modes: usize) -> Self {
        Self { gamma: vec![0.0; n_modes], dephasing: vec![0.0; n_modes], t_gate: 0.0, placement: NoisePlacement::After }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.len() != self.dephasing.len() {
            return Err(Error::InvalidArgument(format!(
                "noise has {} damping rates but {} dephasing rates",
                self.gamma.len(),
                self.dephasing.len()
            )));
        }
        let bad = |x: f64| !(x >= 0.0 && x.is_finite());
        if self.gamma.iter().chain(&self.dephasing).any(|&x| bad(x)) {
            return Err(Error::InvalidArgument("noise rates must be finite and >= 0".into()));
        }
        if bad(self.t_gate) {
            return Err(Error::InvalidArgument(format!("noise.t_gate = {} must be >= 0", self.t_gate)));
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.gamma.len()
    }

    /// `γ*_k = γ_k/2 + Γ_k`.
    pub fn linewidth(&self, k: usize) -> f64 {
        self.gamma[k] / 2.0 + self.dephasing[k]
    }

    pub fn is_zero(&self) -> bool {
        self.t_gate == 0.0 || self.gamma.iter().chain(&self.dephasing).all(|&x| x == 0.0)
    }
}

/// Noise rates of the simulated modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveNoise {
    pub gamma: Vec<f64>,
    pub dephasing: Vec<f64>,
    /// JC gates per mode and step.
    pub d_k: Vec<usize>,
}

impl EffectiveNoise {
    pub fn linewidth(&self, k: usize) -> f64 {
        self.gamma[k] / 2.0 + self.dephasing[k]
    }

    pub fn linewidths(&self) -> Vec<f64> {
        (0..self.gamma.len()).map(|k| self.linewidth(k)).collect()
    }

    /// The rates as a noise spec for [`lindblad_evolve`].
    pub fn as_rates(&self) -> NoiseSpec {
        NoiseSpec {
            gamma: self.gamma.clone(),
            dephasing: self.dephasing.clone(),
            t_gate: 1.0,
            placement: NoisePlacement::After,
        }
    }
}

/// `D t_gate rate / τ`.
pub fn effective_rate(d: usize, t_gate: f64, rate: f64, tau: f64) -> f64 {
    d as f64 * t_gate * rate / tau
}

/// Effective rates from the JC gates per mode of one Trotter step. Mode `k` sits at
/// register site `n_qubits + k`.
pub fn effective_lindbladian(step: &Circuit, noise: &NoiseSpec, tau: f64, n_qubits: usize) -> Result<EffectiveNoise> {
    noise.validate()?;
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be > 0")));
    }
    let m = metrics(step);
    let d_k: Vec<usize> = (0..noise.n_modes()).map(|k| m.d_k.get(&(n_qubits + k)).copied().unwrap_or(0)).collect();
    Ok(EffectiveNoise {
        gamma: d_k.iter().zip(&noise.gamma).map(|(&d, &g)| effective_rate(d, noise.t_gate, g, tau)).collect(),
        dephasing: d_k.iter().zip(&noise.dephasing).map(|(&d, &g)| effective_rate(d, noise.t_gate, g, tau)).collect(),
        d_k,
    })
}

/// `H(t) = Σ_j e^{iω_j t} A_j`. Hermiticity is up to the caller, who pairs every
/// `A` at `ω` with `A†` at `-ω`.
#[derive(Clone, Debug, Default)]
pub struct TimeDependentH {
    pub terms: Vec<(f64, OperatorSum)>,
}

impl TimeDependentH {
    pub fn constant(h: OperatorSum) -> Self {
        Self { terms: vec![(0.0, h)] }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(w, _)| *w == 0.0)
    }

    /// Model Hamiltonian in `frame`, with coupling phases kept symbolic.
    pub fn from_model(model: &ModelSpec, frame: Frame) -> Result<Self> {
        if frame != Frame::RotatingModes {
            return Ok(Self::constant(crate::models::build(model, frame, 0.0)?));
        }
        model.validate()?;
        let mut by_freq: BTreeMap<u64, (f64, OperatorSum)> = BTreeMap::new();
        let mode_of = |site: usize| (0..model.n_modes).find(|&k| model.mode_site(k) == site);
        for t in model.coupling_hamiltonian(true, 0.0).terms {
            let mut w = 0.0;
            for o in &t.ops {
                if let Some(k) = mode_of(o.site) {
                    match o.kind {
                        OpKind::Create => w = model.omegas[k],
                        OpKind::Annihilate => w = -model.omegas[k],
                        _ => {}
                    }
                }
            }
            let e = by_freq.entry(w.to_bits()).or_insert((w, OperatorSum::zero()));
            e.1.terms.push(t);
        }
        let mut terms = vec![(0.0, model.system_hamiltonian())];
        for (_, (w, op)) in by_freq {
            if w == 0.0 {
                terms[0].1 = terms[0].1.clone() + op;
            } else {
                terms.push((w, op));
            }
        }
        Ok(Self { terms })
    }

    pub fn at(&self, t: f64) -> OperatorSum {
        let mut h = OperatorSum::zero();
        for (w, op) in &self.terms {
            h = h + op.scale(cis(w * t));
        }
        h
    }
}

/// `out += coef · M x` for a dense column-major `x`.
fn sparse_acc(m: &SparseMatrix, coef: C64, x: &CMatrix, out: &mut CMatrix) {
    let n = x.nrows();
    let src = x.as_slice();
    let dst = out.as_mut_slice();
    for j in 0..x.ncols() {
        let col = &src[j * n..(j + 1) * n];
        let o = &mut dst[j * n..(j + 1) * n];
        for (i, row) in m.rows.iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let mut acc = ZERO;
            for &(k, v) in row {
                acc += v * col[k];
            }
            o[i] += coef * acc;
        }
    }
}

struct Jump {
    rate: f64,
    op: SparseMatrix,
    /// `L† L`.
    norm: SparseMatrix,
}

/// Lindblad generator on a register, with sparse operators.
pub struct Lindbladian {
    dim: usize,
    /// Hamiltonian terms grouped by frequency.
    h: Vec<(f64, SparseMatrix)>,
    /// As `h`, with `-i/2 Σ r L†L` added to the static group.
    h_eff: Vec<(f64, SparseMatrix)>,
    jumps: Vec<Jump>,
}

fn mode_jumps(reg: &Register, noise: &NoiseSpec) -> Result<Vec<(f64, OperatorSum)>> {
    let modes = reg.mode_sites();
    if noise.n_modes() > modes.len() {
        return Err(Error::InvalidArgument(format!(
            "noise lists {} modes but the register has {}",
            noise.n_modes(),
            modes.len()
        )));
    }
    let mut out = Vec::new();
    for k in 0..noise.n_modes() {
        if noise.gamma[k] > 0.0 {
            out.push((noise.gamma[k], OperatorSum::op(OpKind::Annihilate, modes[k])));
        }
        if noise.dephasing[k] > 0.0 {
            out.push((2.0 * noise.dephasing[k], OperatorSum::op(OpKind::Number, modes[k])));
        }
    }
    Ok(out)
}

impl Lindbladian {
    /// `H(t)` plus the damping and dephasing of `noise`, where noise entry `k` acts
    /// on the `k`-th mode of the register.
    pub fn new(reg: &Register, h: &TimeDependentH, noise: &NoiseSpec) -> Result<Self> {
        noise.validate()?;
        let mut hs: Vec<(f64, SparseMatrix)> = Vec::new();
        for (w, op) in &h.terms {
            let m = op.embed_sparse(reg)?;
            match hs.iter_mut().find(|(w2, _)| w2 == w) {
                Some((_, acc)) => *acc = acc.add(&m),
                None => hs.push((*w, m)),
            }
        }
        let mut jumps = Vec::new();
        let mut damp = SparseMatrix::zeros(reg.dim());
        for (rate, op) in mode_jumps(reg, noise)? {
            let l = op.embed_sparse(reg)?;
            let norm = l.adjoint().mul(&l);
            damp = damp.add(&norm.scale(c(0.0, -rate / 2.0)));
            jumps.push(Jump { rate, op: l, norm });
        }
        let mut h_eff = hs.clone();
        match h_eff.iter_mut().find(|(w, _)| *w == 0.0) {
            Some((_, acc)) => *acc = acc.add(&damp),
            None => h_eff.push((0.0, damp)),
        }
        h_eff.retain(|(_, m)| m.nnz() > 0);
        Ok(Self { dim: reg.dim(), h: hs, h_eff, jumps })
    }

    pub fn is_time_independent(&self) -> bool {
        self.h.iter().all(|(w, _)| *w == 0.0)
    }

    /// `dρ/dt` at time `t`. With `hermitian`, `ρ = ρ†` is assumed and products on the
    /// right are taken as adjoints of products on the left.
    pub fn derivative(&self, t: f64, rho: &CMatrix, hermitian: bool) -> CMatrix {
        let n = self.dim;
        let rho_dag = if hermitian { None } else { Some(rho.adjoint()) };
        let rd = rho_dag.as_ref().unwrap_or(rho);
        // -i(Aρ - ρA†) with A = H - i/2 Σ r L†L and ρA† = (Aρ†)†.
        let mut a_rho = CMatrix::zeros(n, n);
        for (w, m) in &self.h_eff {
            sparse_acc(m, -IM * cis(w * t), rho, &mut a_rho);
        }
        let mut out = if hermitian {
            a_rho.adjoint()
        } else {
            let mut a = CMatrix::zeros(n, n);
            for (w, m) in &self.h_eff {
                sparse_acc(m, -IM * cis(w * t), rd, &mut a);
            }
            a.adjoint()
        };
        out += a_rho;
        // L ρ L† = L (L ρ†)†.
        let mut l_rd = CMatrix::zeros(n, n);
        for j in &self.jumps {
            l_rd.fill(ZERO);
            sparse_acc(&j.op, ONE, rd, &mut l_rd);
            sparse_acc(&j.op, c(j.rate, 0.0), &l_rd.adjoint(), &mut out);
        }
        out
    }

    fn rk4_step(&self, t: f64, rho: &CMatrix, dt: f64, hermitian: bool) -> CMatrix {
        let k1 = self.derivative(t, rho, hermitian);
        let k2 = self.derivative(t + dt / 2.0, &(rho + &k1 * c(dt / 2.0, 0.0)), hermitian);
        let k3 = self.derivative(t + dt / 2.0, &(rho + &k2 * c(dt / 2.0, 0.0)), hermitian);
        let k4 = self.derivative(t + dt, &(rho + &k3 * c(dt, 0.0)), hermitian);
        rho + (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0)
    }

    /// Dense superoperator of a time-independent generator, column stacking.
    pub fn superoperator(&self) -> Result<CMatrix> {
        if !self.is_time_independent() {
            return Err(Error::InvalidArgument("superoperator needs a time-independent Hamiltonian".into()));
        }
        let n = self.dim;
        if n * n > 4096 {
            return Err(Error::InvalidArgument(format!("superoperator of dimension {} is too large", n * n)));
        }
        let id = linalg::identity(n);
        let mut h = CMatrix::zeros(n, n);
        for (_, m) in &self.h {
            h += m.to_dense();
        }
        let mut g = (id.kronecker(&h) - h.transpose().kronecker(&id)) * (-IM);
        for j in &self.jumps {
            let l = j.op.to_dense();
            let k = j.norm.to_dense();
            g += (l.conjugate().kronecker(&l) - (id.kronecker(&k) + k.transpose().kronecker(&id)) * c(0.5, 0.0))
                * c(j.rate, 0.0);
        }
        Ok(g)
    }

    /// Evolves `rho` from time `t0`, returning copies at each of `times` (absolute,
    /// ascending, `>= t0`). Fixed-step RK4 with steps no longer than `dt`.
    pub fn evolve(&self, rho: &CMatrix, t0: f64, times: &[f64], dt: f64, hermitian: bool) -> Result<Vec<CMatrix>> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("integrator step dt = {dt} must be > 0")));
        }
        let tr0 = rho.trace();
        let scale0 = linalg::max_abs(rho).max(1.0);
        let mut out = Vec::with_capacity(times.len());
        let mut t = t0;
        let mut cur = rho.clone();
        for &target in times {
            if target < t - 1e-12 {
                return Err(Error::InvalidArgument("evolution times must be ascending".into()));
            }
            let span = target - t;
            let steps = (span / dt - 1e-9).ceil().max(0.0) as usize;
            if steps > 0 {
                let h = span / steps as f64;
                for _ in 0..steps {
                    cur = self.rk4_step(t, &cur, h, hermitian);
                    t += h;
                }
                let drift = (cur.trace() - tr0).norm();
                let blow = linalg::max_abs(&cur);
                if drift > 1e-6 || !blow.is_finite() || blow > 1.0 + 10.0 * scale0 {
                    return Err(Error::IntegrationFailure(format!(
                        "trace drift {drift:.3e} at t = {target}; retry with dt <= {}",
                        dt / 2.0
                    )));
                }
            }
            t = target;
            out.push(cur.clone());
        }
        Ok(out)
    }
}

/// Lindblad evolution of `rho` under `h` and the mode noise rates of `noise`. Returns
/// the state at each of `times` (measured from 0, ascending).
pub fn lindblad_evolve(
    rho: &DensityMatrix,
    h: &TimeDependentH,
    noise: &NoiseSpec,
    times: &[f64],
    dt: f64,
) -> Result<Vec<DensityMatrix>> {
    if let Some(&t_max) = times.last() {
        if dt > t_max && t_max > 0.0 {
            return Err(Error::InvalidArgument(format!("integrator step {dt} exceeds the duration {t_max}")));
        }
    }
    let l = Lindbladian::new(&rho.register, h, noise)?;
    let states = l.evolve(&rho.elements, 0.0, times, dt, true)?;
    states.into_iter().map(|m| DensityMatrix::new(&rho.register, m)).collect()
}

/// `exp(duration · L_N)` restricted to one mode of dimension `d`, column stacking.
pub fn mode_superoperator(d: usize, gamma: f64, dephasing: f64, duration: f64) -> CMatrix {
    let reg = Register::new(vec![crate::hilbert::SiteKind::Mode(d)]).expect("single mode");
    let noise = NoiseSpec { gamma: vec![gamma], dephasing: vec![dephasing], t_gate: 0.0, placement: NoisePlacement::After };
    let l = Lindbladian::new(&reg, &TimeDependentH::default(), &noise).expect("valid mode noise");
    linalg::expm(&(l.superoperator().expect("small mode") * c(duration, 0.0)))
}

/// Choi matrix `Σ_ab |a⟩⟨b| ⊗ E(|a⟩⟨b|)` of a column-stacked superoperator on dimension `n`.
pub fn choi_matrix(superop: &CMatrix, n: usize) -> CMatrix {
    let mut choi = CMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            for i in 0..n {
                for j in 0..n {
                    choi[(a * n + i, b * n + j)] = superop[(i + j * n, a + b * n)];
                }
            }
        }
    }
    choi
}

/// A superoperator on one mode site, applied to full density matrices.
#[derive(Clone, Debug)]
pub struct ModeChannel {
    offsets: Vec<usize>,
    bases: Vec<usize>,
    map: SparseMatrix,
}

impl ModeChannel {
    pub fn new(reg: &Register, site: usize, gamma: f64, dephasing: f64, duration: f64) -> Result<Self> {
        let d = reg.require_mode(site)?;
        let (offsets, bases) = LocalAction::index_maps(reg, &[site])?;
        let s = mode_superoperator(d, gamma, dephasing, duration);
        Ok(Self { offsets, bases, map: SparseMatrix::from_dense(&s, 1e-16) })
    }

    pub fn apply(&self, rho: &mut CMatrix) {
        let d = self.offsets.len();
        let mut v = vec![ZERO; d * d];
        let mut w = vec![ZERO; d * d];
        for &bj in &self.bases {
            for &bi in &self.bases {
                for b in 0..d {
                    for a in 0..d {
                        v[a + b * d] = rho[(bi + self.offsets[a], bj + self.offsets[b])];
                    }
                }
                self.map.matvec(&v, &mut w);
                for b in 0..d {
                    for a in 0..d {
                        rho[(bi + self.offsets[a], bj + self.offsets[b])] = w[a + b * d];
                    }
                }
            }
        }
    }
}

/// An ideal gate with the mode noise accumulated while it runs.
#[derive(Clone, Debug)]
pub struct NoisyGate {
    pub action: Arc<LocalAction>,
    before: Vec<ModeChannel>,
    after: Vec<ModeChannel>,
}

impl NoisyGate {
    /// Applies the channel to a Hermitian `rho`.
    pub fn apply(&self, rho: &mut CMatrix) {
        self.apply_with(rho, true);
    }

    fn apply_with(&self, rho: &mut CMatrix, hermitian: bool) {
        for ch in &self.before {
            ch.apply(rho);
        }
        if hermitian {
            self.action.conjugate_hermitian(rho);
        } else {
            self.action.conjugate(rho);
        }
        for ch in &self.after {
            ch.apply(rho);
        }
    }

    /// Full superoperator of the channel, for small registers.
    pub fn superoperator(&self, dim: usize) -> CMatrix {
        let mut s = CMatrix::zeros(dim * dim, dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let mut e = CMatrix::zeros(dim, dim);
                e[(a, b)] = ONE;
                self.apply_with(&mut e, false);
                for j in 0..dim {
                    for i in 0..dim {
                        s[(i + j * dim, a + b * dim)] = e[(i, j)];
                    }
                }
            }
        }
        s
    }
}

/// Channels per mode site for gates of duration `t_gate`.
struct ChannelBank {
    after: BTreeMap<usize, ModeChannel>,
    half: BTreeMap<usize, ModeChannel>,
    placement: NoisePlacement,
}

impl ChannelBank {
    fn new(reg: &Register, noise: &NoiseSpec) -> Result<Self> {
        noise.validate()?;
        let modes = reg.mode_sites();
        if noise.n_modes() > modes.len() {
            return Err(Error::InvalidArgument(format!(
                "noise lists {} modes but the register has {}",
                noise.n_modes(),
                modes.len()
            )));
        }
        let mut after = BTreeMap::new();
        let mut half = BTreeMap::new();
        for k in 0..noise.n_modes() {
            if noise.gamma[k] == 0.0 && noise.dephasing[k] == 0.0 || noise.t_gate == 0.0 {
                continue;
            }
            let (g, p) = (noise.gamma[k], noise.dephasing[k]);
            match noise.placement {
                NoisePlacement::After => {
                    after.insert(modes[k], ModeChannel::new(reg, modes[k], g, p, noise.t_gate)?);
                }
                NoisePlacement::Symmetric => {
                    half.insert(modes[k], ModeChannel::new(reg, modes[k], g, p, noise.t_gate / 2.0)?);
                }
            }
        }
        Ok(Self { after, half, placement: noise.placement })
    }

    fn wrap(&self, reg: &Register, g: &Gate, action: Arc<LocalAction>) -> NoisyGate {
        let modes: Vec<usize> = g.sites.iter().copied().filter(|&s| reg.is_mode(s)).collect();
        let pick = |bank: &BTreeMap<usize, ModeChannel>| -> Vec<ModeChannel> {
            modes.iter().filter_map(|s| bank.get(s).cloned()).collect()
        };
        match self.placement {
            NoisePlacement::After => NoisyGate { action, before: vec![], after: pick(&self.after) },
            NoisePlacement::Symmetric => NoisyGate { action, before: pick(&self.half), after: pick(&self.half) },
        }
    }
}

/// The ideal primitive `gate` followed by `exp(t_gate L_N)` on the modes it touches.
pub fn noisy_gate_channel(gate: &Gate, noise: &NoiseSpec, reg: &Register) -> Result<NoisyGate> {
    if gate.composite {
        return Err(Error::InvalidArgument(format!("`{}` must be flattened to primitives first", gate.name)));
    }
    gate.check(reg)?;
    let bank = ChannelBank::new(reg, noise)?;
    let action = Simulator::new(reg).action(gate)?;
    Ok(bank.wrap(reg, gate, action))
}

/// Density-matrix simulation where every JC primitive carries gate noise.
pub struct NoisySimulator {
    sim: Simulator,
    bank: ChannelBank,
}

impl NoisySimulator {
    pub fn new(reg: &Register, noise: &NoiseSpec) -> Result<Self> {
        Ok(Self { sim: Simulator::new(reg), bank: ChannelBank::new(reg, noise)? })
    }

    pub fn apply(&self, circuit: &Circuit, rho: &mut CMatrix) -> Result<()> {
        for g in circuit.flatten() {
            self.apply_primitive(&g, rho)?;
        }
        Ok(())
    }

    pub fn apply_gate(&self, gate: &Gate, rho: &mut CMatrix) -> Result<()> {
        for g in gate.flatten() {
            self.apply_primitive(&g, rho)?;
        }
        Ok(())
    }

    /// Number of noisy gate applications so far is not tracked; JC gates are the only
    /// noisy ones.
    fn apply_primitive(&self, g: &Gate, rho: &mut CMatrix) -> Result<()> {
        let action = self.sim.action(g)?;
        if g.name == "jc" {
            self.bank.wrap(self.sim.register(), g, action).apply(rho);
        } else {
            action.conjugate_hermitian(rho);
        }
        Ok(())
    }
}

/// A named observable on model sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    pub op: OperatorSum,
}

impl Observable {
    pub fn new(name: &str, op: OperatorSum) -> Self {
        Self { name: name.to_string(), op }
    }
}

/// Observable values on a time grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `values[t][o]`.
    pub values: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>) -> Self {
        Self { times: vec![], names, values: vec![] }
    }

    pub fn push(&mut self, t: f64, row: Vec<f64>) {
        self.times.push(t);
        self.values.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.values.iter().map(|r| r[i]).collect())
    }

    /// Largest absolute difference over common times and observables.
    pub fn max_abs_diff(&self, other: &TimeSeries) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Long format: `t,observable,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,observable,value\n");
        for (t, row) in self.times.iter().zip(&self.values) {
            for (name, v) in self.names.iter().zip(row) {
                let _ = writeln!(s, "{t},{name},{}", linalg::fmt_num(*v));
            }
        }
        s
    }
}

fn observe_rho(rho: &DensityMatrix, obs: &[(String, OperatorSum)]) -> Result<Vec<f64>> {
    obs.iter().map(|(_, o)| Ok(rho.expectation(o)?.re)).collect()
}

/// Noisy density-matrix Trotter simulation. `initial` gives occupations of the model
/// sites (spins then modes); observables act on model sites. Values are recorded at
/// `t = 0` and after every step. Steps are simulated without phase folding, which
/// leaves the JC gates and their noise unchanged.
pub fn simulate_noisy_trotter(
    model: &ModelSpec,
    plan: &TrotterPlan,
    network: Network,
    noise: &NoiseSpec,
    d: usize,
    initial: &[usize],
    observables: &[Observable],
) -> Result<TimeSeries> {
    let mut plan = plan.clone();
    plan.fold_phases = false;
    let comp = Compiler::new(model, &plan, network)?;
    let reg = comp.register(d)?;
    let psi = comp.basis_state(&reg, initial)?;
    let obs: Vec<(String, OperatorSum)> =
        observables.iter().map(|o| (o.name.clone(), comp.to_physical(&o.op))).collect();
    let sim = NoisySimulator::new(&reg, noise)?;
    let mut rho = psi.to_density();
    let mut series = TimeSeries::new(obs.iter().map(|o| o.0.clone()).collect());
    series.push(0.0, observe_rho(&rho, &obs)?);
    for m in 0..plan.n_steps {
        let body = comp.step_gates(m)?;
        for g in &body {
            sim.apply_gate(g, &mut rho.elements)?;
        }
        series.push((m + 1) as f64 * plan.tau, observe_rho(&rho, &obs)?);
    }
    Ok(series)
}

/// Lindblad solution of the model in the rotating frame of the modes with mode noise
/// `rates`, on the model's own register.
pub fn simulate_lindblad_model(
    model: &ModelSpec,
    rates: &NoiseSpec,
    d: usize,
    initial: &[usize],
    observables: &[Observable],
    times: &[f64],
    dt: f64,
) -> Result<TimeSeries> {
    let model = &crate::compiler::reference_model(model)?;
    let reg = model.register(d)?;
    let rho = QuantumState::basis(&reg, initial)?.to_density();
    let h = TimeDependentH::from_model(model, Frame::RotatingModes)?;
    let states = lindblad_evolve(&rho, &h, rates, times, dt)?;
    let obs: Vec<(String, OperatorSum)> = observables.iter().map(|o| (o.name.clone(), o.op.clone())).collect();
    let mut series = TimeSeries::new(obs.iter().map(|o| o.0.clone()).collect());
    for (t, s) in times.iter().zip(&states) {
        series.push(*t, observe_rho(s, &obs)?);
    }
    Ok(series)
}

/// `S(ω) = 2π Σ_k v_k² 2γ*_k / ((γ*_k)² + (ω - ω_k)²)` on `grid`.
pub fn spectral_function(v: &[f64], omegas: &[f64], broadenings: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if v.len() != omegas.len() || v.len() != broadenings.len() {
        return Err(Error::InvalidArgument("couplings, frequencies and broadenings differ in length".into()));
    }
    if let Some(k) = broadenings.iter().position(|&g| g.is_nan() || g <= 0.0) {
        return Err(Error::ZeroBroadening(k));
    }
    Ok(grid
        .iter()
        .map(|&w| {
            v.iter()
                .zip(omegas)
                .zip(broadenings)
                .map(|((v, wk), g)| 2.0 * std::f64::consts::PI * v * v * 2.0 * g / (g * g + (w - wk).powi(2)))
                .sum()
        })
        .collect())
}

/// `⟨X(t) X(0)⟩` for `X = v (b† + b)` of one damped mode in vacuum, `t = j dt` for
/// `j < n`, by the quantum regression theorem with the lab Hamiltonian `ω n`.
pub fn bath_correlation(v: f64, omega: f64, gamma: f64, dephasing: f64, d: usize, dt: f64, n: usize) -> Result<Vec<C64>> {
    let reg = Register::new(vec![crate::hilbert::SiteKind::Mode(d)])?;
    let h = TimeDependentH::constant(OperatorSum::product(c(omega, 0.0), &[(OpKind::Number, 0)]));
    let noise = NoiseSpec { gamma: vec![gamma], dephasing: vec![dephasing], t_gate: 0.0, placement: NoisePlacement::After };
    let l = Lindbladian::new(&reg, &h, &noise)?;
    let step = linalg::expm(&(l.superoperator()? * c(dt, 0.0)));
    let x = (OperatorSum::op(OpKind::Create, 0) + OperatorSum::op(OpKind::Annihilate, 0)).scale_re(v).embed(&reg)?;
    let vac = QuantumState::ground(&reg).to_density().elements;
    let mut cur = &x * &vac;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push((&x * &cur).trace());
        let v = linalg::CVector::from_column_slice(cur.as_slice());
        let next = &step * v;
        cur = CMatrix::from_column_slice(d, d, next.as_slice());
    }
    Ok(out)
}

/// `2π · 2 Re ∫_0^∞ e^{iωt} C(t) dt` by the trapezoid rule, using `C(-t) = C(t)*`.
/// The `2π` matches the normalisation of [`spectral_function`].
pub fn correlation_spectrum(corr: &[C64], dt: f64, grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&w| {
            let mut acc = ZERO;
            for (j, cj) in corr.iter().enumerate() {
                let weight = if j == 0 || j + 1 == corr.len() { 0.5 } else { 1.0 };
                acc += cj * cis(w * j as f64 * dt) * weight;
            }
            2.0 * std::f64::consts::PI * 2.0 * (acc * dt).re
        })
        .collect()
}
