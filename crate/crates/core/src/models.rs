//! System-boson model specifications, presets and frames.
//!
//! Sites `0..n_sites` are spins or fermionic orbitals, represented by qubits in that
//! order. Modes follow: mode `k` lives on register site `n_sites + k`.
//!
//! Term conventions:
//!
//! | term | spin statistics | fermion statistics |
//! |---|---|---|
//! | `Onsite ε` | `ε/2 σ_z` | `ε n` |
//! | `ZZ v` | `v σ_z σ_z` | same |
//! | `XX v` | `v σ_x σ_x` | same |
//! | `Hopping h` | `h σ_+^i σ_-^j + h.c.` | `t c_i† c_j + h.c.` |
//! | `DensityDensity v` | `v n_i n_j`, `n = (1-σ_z)/2` | `v n_i n_j` |
//!
//! Couplings read `v C b† + v* C† b` with `C` given by the coupling kind.
//!
//! Two-electron integrals `h_ijj'i'` multiply `½ c_i† c_j† c_j' c_i'` (physicists'
//! ordering `⟨ij|j'i'⟩`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{OpKind, OperatorSum, Register, SiteKind};
use crate::linalg::{c, cis, CMatrix, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistics {
    Spin,
    Fermion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    ZZ,
    XX,
    Hopping,
    DensityDensity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum SystemTerm {
    Onsite {
        site: usize,
        eps: f64,
    },
    Pair {
        i: usize,
        j: usize,
        value: C64,
        kind: PairKind,
        /// Sites carrying a Jordan-Wigner parity string.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        string: Vec<usize>,
    },
    /// `½ h c_i† c_j† c_j' c_i'` (fermions only).
    Quartic {
        i: usize,
        j: usize,
        jp: usize,
        ip: usize,
        value: f64,
    },
    /// Explicit qubit operator, produced by the Jordan-Wigner mapping.
    Generic {
        op: OperatorSum,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingKind {
    /// `σ_z (v b† + h.c.)`.
    Longitudinal,
    /// `σ_x (v b† + h.c.)`.
    Transverse,
    /// `v σ_- b† + h.c.`.
    RotatingWave,
    /// `σ_x σ_x (v b† + h.c.)`.
    QuadraticXX,
    /// `(σ_+σ_- + σ_-σ_+)(v b† + h.c.)`, or `(c_i†c_j + c_j†c_i)(v b† + h.c.)`.
    QuadraticHopping,
    /// `v σ_+^i σ_-^j b† + h.c.`, or `v c_i† c_j b† + h.c.`.
    QuadraticChiral,
    /// `n_j (v b† + h.c.)`.
    Density,
}

impl CouplingKind {
    pub fn is_quadratic(self) -> bool {
        matches!(self, Self::QuadraticXX | Self::QuadraticHopping | Self::QuadraticChiral)
    }
    pub fn n_sites(self) -> usize {
        if self.is_quadratic() {
            2
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub sites: Vec<usize>,
    pub mode: usize,
    pub amplitude: C64,
    pub kind: CouplingKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub string: Vec<usize>,
}

/// Hamiltonian `H_s + Σ ω_k n_k + H_c + Σ (f_k b_k† + h.c.) + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    pub statistics: Statistics,
    pub n_sites: usize,
    pub n_modes: usize,
    pub system: Vec<SystemTerm>,
    pub couplings: Vec<Coupling>,
    pub omegas: Vec<f64>,
    /// Linear drives `f_k b_k† + h.c.`.
    #[serde(default)]
    pub drives: Vec<C64>,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Frame {
    Lab,
    RotatingModes,
    /// Joint frame of modes and spins at a reference frequency `ω₀`.
    RotatingModesAndSpins { omega0: f64 },
}

fn n_op(site: usize) -> OperatorSum {
    OperatorSum::identity(c(0.5, 0.0)) - OperatorSum::op(OpKind::SigmaZ, site).scale_re(0.5)
}

fn z_string(sites: &[usize]) -> Vec<(OpKind, usize)> {
    sites.iter().map(|&s| (OpKind::SigmaZ, s)).collect()
}

/// `σ_+^i [Z string] σ_-^j`.
fn raise_lower(i: usize, j: usize, string: &[usize]) -> Vec<(OpKind, usize)> {
    let mut v = vec![(OpKind::SigmaPlus, i), (OpKind::SigmaMinus, j)];
    v.extend(z_string(string));
    v
}

impl ModelSpec {
    pub fn mode_site(&self, k: usize) -> usize {
        self.n_sites + k
    }

    pub fn register(&self, d: usize) -> Result<Register> {
        Register::qubits_then_modes(self.n_sites, self.n_modes, d)
    }

    pub fn drives_or_zero(&self) -> Vec<C64> {
        let mut f = self.drives.clone();
        f.resize(self.n_modes, ZERO);
        f
    }

    /// Checks indices and basic invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("model {}: {m}", self.name)));
        if self.omegas.len() != self.n_modes {
            return bad(format!("{} frequencies for {} modes", self.omegas.len(), self.n_modes));
        }
        if self.drives.len() > self.n_modes {
            return bad("more drives than modes".into());
        }
        let site_ok = |s: usize| s < self.n_sites;
        for t in &self.system {
            match t {
                SystemTerm::Onsite { site, .. } if !site_ok(*site) => return bad(format!("onsite term on site {site}")),
                SystemTerm::Pair { i, j, string, .. } => {
                    if !site_ok(*i) || !site_ok(*j) || i == j || !string.iter().all(|&s| site_ok(s)) {
                        return bad(format!("pair term ({i},{j}) invalid"));
                    }
                }
                SystemTerm::Quartic { i, j, jp, ip, .. } => {
                    if self.statistics != Statistics::Fermion {
                        return bad("quartic terms need fermion statistics".into());
                    }
                    if ![i, j, jp, ip].iter().all(|&&s| site_ok(s)) {
                        return bad("quartic term index out of range".into());
                    }
                }
                _ => {}
            }
        }
        for cpl in &self.couplings {
            if cpl.mode >= self.n_modes {
                return bad(format!("coupling to mode {}", cpl.mode));
            }
            if cpl.sites.len() != cpl.kind.n_sites() || !cpl.sites.iter().all(|&s| site_ok(s)) {
                return bad(format!("coupling {:?} has sites {:?}", cpl.kind, cpl.sites));
            }
            if cpl.sites.len() == 2 && cpl.sites[0] == cpl.sites[1] {
                return bad("quadratic coupling needs two distinct sites".into());
            }
        }
        Ok(())
    }

    /// Qubit form. With `with_strings` non-adjacent fermionic terms receive explicit
    /// parity strings (the Jordan-Wigner image); without, they are left for a
    /// fermionic swap network to make adjacent. Fermionic densities become
    /// `(1 - σ_z)/2`: onsite energies flip sign into `Onsite` terms plus an offset, and
    /// density couplings `n_j(v b† + h.c.)` split into a `Longitudinal` term with
    /// amplitude `-v/2` and a drive `v/2` on the mode.
    fn qubit_form(&self, with_strings: bool) -> ModelSpec {
        let mut out = self.clone();
        if self.statistics == Statistics::Spin {
            return out;
        }
        let between = |i: usize, j: usize| -> Vec<usize> {
            if !with_strings {
                return vec![];
            }
            let (a, b) = (i.min(j), i.max(j));
            (a + 1..b).collect()
        };
        out.system.clear();
        for t in &self.system {
            match t {
                SystemTerm::Onsite { site, eps } => {
                    out.system.push(SystemTerm::Onsite { site: *site, eps: -eps });
                    out.offset += eps / 2.0;
                }
                SystemTerm::Pair { i, j, value, kind: PairKind::Hopping, .. } => out.system.push(SystemTerm::Pair {
                    i: *i,
                    j: *j,
                    value: *value,
                    kind: PairKind::Hopping,
                    string: between(*i, *j),
                }),
                SystemTerm::Quartic { i, j, jp, ip, value } => {
                    let op = jw_monomial(&[(true, *i), (true, *j), (false, *jp), (false, *ip)], self.n_sites)
                        .scale_re(0.5 * value);
                    out.system.push(SystemTerm::Generic { op });
                }
                other => out.system.push(other.clone()),
            }
        }
        out.couplings.clear();
        let mut drives = self.drives_or_zero();
        for cpl in &self.couplings {
            match cpl.kind {
                CouplingKind::Density => {
                    out.couplings.push(Coupling {
                        kind: CouplingKind::Longitudinal,
                        amplitude: -cpl.amplitude * 0.5,
                        ..cpl.clone()
                    });
                    drives[cpl.mode] += cpl.amplitude * 0.5;
                }
                CouplingKind::QuadraticHopping | CouplingKind::QuadraticChiral => out.couplings.push(Coupling {
                    string: between(cpl.sites[0], cpl.sites[1]),
                    ..cpl.clone()
                }),
                _ => out.couplings.push(cpl.clone()),
            }
        }
        if drives.iter().any(|f| f.norm() > 0.0) {
            out.drives = drives;
        }
        out
    }

    /// Fermionic model in qubit form with Jordan-Wigner parity strings, relabelled as a
    /// spin model. Spin models are returned unchanged.
    pub fn qubit_model(&self) -> ModelSpec {
        let mut m = self.qubit_form(true);
        m.statistics = Statistics::Spin;
        m
    }

    /// Fermionic model lowered for a fermionic swap network: densities rewritten, no
    /// parity strings. Spin models are returned unchanged.
    pub fn lowered_for_routing(&self) -> ModelSpec {
        self.qubit_form(false)
    }

    pub fn system_hamiltonian(&self) -> OperatorSum {
        let m = self.qubit_form(true);
        let mut h = OperatorSum::zero();
        if m.offset != 0.0 {
            h = h + OperatorSum::identity(c(m.offset, 0.0));
        }
        for t in &m.system {
            h = h + system_term_operator(t);
        }
        h
    }

    /// `H_c` with coupling phases `e^{iω_k t}` when `rotating` (and drives likewise).
    pub fn coupling_hamiltonian(&self, rotating: bool, t: f64) -> OperatorSum {
        let m = self.qubit_form(true);
        let phase = |k: usize| if rotating { cis(m.omegas[k] * t) } else { ONE };
        let mut h = OperatorSum::zero();
        for cpl in &m.couplings {
            let v = cpl.amplitude * phase(cpl.mode);
            h = h + coupling_operator(cpl, v, m.mode_site(cpl.mode));
        }
        for (k, f) in m.drives_or_zero().iter().enumerate() {
            if f.norm() > 0.0 {
                let v = f * phase(k);
                let s = m.mode_site(k);
                h = h + OperatorSum::product(v, &[(OpKind::Create, s)]) + OperatorSum::product(v.conj(), &[(OpKind::Annihilate, s)]);
            }
        }
        h
    }

    pub fn bath_hamiltonian(&self) -> OperatorSum {
        let mut h = OperatorSum::zero();
        for (k, w) in self.omegas.iter().enumerate() {
            if *w != 0.0 {
                h.push(c(*w, 0.0), &[(OpKind::Number, self.mode_site(k))]);
            }
        }
        h
    }
}

/// Operator of one system term in qubit form (fermionic terms must already be mapped).
pub fn system_term_operator(t: &SystemTerm) -> OperatorSum {
    match t {
        SystemTerm::Onsite { site, eps } => OperatorSum::op(OpKind::SigmaZ, *site).scale_re(eps / 2.0),
        SystemTerm::Pair { i, j, value, kind, string } => match kind {
            PairKind::ZZ => OperatorSum::product(*value, &[(OpKind::SigmaZ, *i), (OpKind::SigmaZ, *j)]),
            PairKind::XX => OperatorSum::product(*value, &[(OpKind::SigmaX, *i), (OpKind::SigmaX, *j)]),
            PairKind::Hopping => {
                OperatorSum::product(*value, &raise_lower(*i, *j, string))
                    + OperatorSum::product(value.conj(), &raise_lower(*j, *i, string))
            }
            PairKind::DensityDensity => n_op(*i).try_mul(&n_op(*j)).expect("distinct sites") * *value,
        },
        SystemTerm::Quartic { .. } => panic!("quartic terms must be mapped to qubit form first"),
        SystemTerm::Generic { op } => op.clone(),
    }
}

/// `v C b† + h.c.` for one coupling, with `v` already including any phase.
pub fn coupling_operator(cpl: &Coupling, v: C64, mode_site: usize) -> OperatorSum {
    let with_b = |sys: &[(OpKind, usize)], coeff: C64| {
        let mut a = sys.to_vec();
        a.push((OpKind::Create, mode_site));
        let mut b = sys.to_vec();
        b.push((OpKind::Annihilate, mode_site));
        OperatorSum::product(coeff, &a) + OperatorSum::product(coeff.conj(), &b)
    };
    let s = &cpl.sites;
    match cpl.kind {
        CouplingKind::Longitudinal => with_b(&[(OpKind::SigmaZ, s[0])], v),
        CouplingKind::Transverse => with_b(&[(OpKind::SigmaX, s[0])], v),
        CouplingKind::RotatingWave => {
            OperatorSum::product(v, &[(OpKind::SigmaMinus, s[0]), (OpKind::Create, mode_site)])
                + OperatorSum::product(v.conj(), &[(OpKind::SigmaPlus, s[0]), (OpKind::Annihilate, mode_site)])
        }
        CouplingKind::QuadraticXX => with_b(&[(OpKind::SigmaX, s[0]), (OpKind::SigmaX, s[1])], v),
        CouplingKind::QuadraticHopping => {
            with_b(&raise_lower(s[0], s[1], &cpl.string), v) + with_b(&raise_lower(s[1], s[0], &cpl.string), v)
        }
        CouplingKind::QuadraticChiral => {
            let mut a = raise_lower(s[0], s[1], &cpl.string);
            a.push((OpKind::Create, mode_site));
            let mut b = raise_lower(s[1], s[0], &cpl.string);
            b.push((OpKind::Annihilate, mode_site));
            OperatorSum::product(v, &a) + OperatorSum::product(v.conj(), &b)
        }
        CouplingKind::Density => {
            let mut h = OperatorSum::zero();
            for (coef, z) in [(0.5, false), (-0.5, true)] {
                let sys: Vec<(OpKind, usize)> = if z { vec![(OpKind::SigmaZ, s[0])] } else { vec![] };
                h = h + with_b(&sys, v * coef);
            }
            h
        }
    }
}

/// Jordan-Wigner image of a product of fermionic operators `(creation?, orbital)`,
/// applied right to left as written. `c_j = (Π_{k<j} σ_z^k) σ_-^j`.
pub fn jw_monomial(ops: &[(bool, usize)], n_orbitals: usize) -> OperatorSum {
    let mut local: Vec<CMatrix> = vec![CMatrix::identity(2, 2); n_orbitals];
    let z = OpKind::SigmaZ.matrix(2);
    for &(create, j) in ops {
        let ladder = if create { OpKind::SigmaPlus.matrix(2) } else { OpKind::SigmaMinus.matrix(2) };
        local[j] = &local[j] * ladder;
        for m in local.iter_mut().take(j) {
            *m = &*m * &z;
        }
    }
    let mut acc: Vec<(C64, Vec<(OpKind, usize)>)> = vec![(ONE, vec![])];
    for (site, m) in local.iter().enumerate() {
        let parts = [
            (OpKind::Identity, (m[(0, 0)] + m[(1, 1)]) * 0.5),
            (OpKind::SigmaZ, (m[(0, 0)] - m[(1, 1)]) * 0.5),
            (OpKind::SigmaPlus, m[(1, 0)]),
            (OpKind::SigmaMinus, m[(0, 1)]),
        ];
        let mut next = Vec::new();
        for (coef, ops) in &acc {
            for &(k, v) in &parts {
                if v.norm() == 0.0 {
                    continue;
                }
                let mut o = ops.clone();
                if k != OpKind::Identity {
                    o.push((k, site));
                }
                next.push((coef * v, o));
            }
        }
        acc = next;
    }
    let mut out = OperatorSum::zero();
    for (coef, ops) in acc {
        out.push(coef, &ops);
    }
    out.simplify(0.0)
}

/// Jordan-Wigner mapping of a fermionic model to spin statistics.
pub fn jordan_wigner(model: &ModelSpec) -> Result<ModelSpec> {
    if model.statistics != Statistics::Fermion {
        return Err(Error::InvalidArgument("jordan_wigner needs a fermionic model".into()));
    }
    let mut m = model.qubit_form(true);
    m.statistics = Statistics::Spin;
    Ok(m)
}

/// Hamiltonian in the requested frame at time `t`.
pub fn build(model: &ModelSpec, frame: Frame, t: f64) -> Result<OperatorSum> {
    if t < 0.0 {
        return Err(Error::InvalidArgument("build needs t >= 0".into()));
    }
    model.validate()?;
    match frame {
        Frame::Lab => Ok(model.system_hamiltonian() + model.bath_hamiltonian() + model.coupling_hamiltonian(false, t)),
        Frame::RotatingModes => Ok(model.system_hamiltonian() + model.coupling_hamiltonian(true, t)),
        Frame::RotatingModesAndSpins { omega0 } => {
            let m = model.qubit_form(true);
            let conserving = m.couplings.iter().all(|c| c.kind == CouplingKind::RotatingWave)
                && m.drives_or_zero().iter().all(|f| f.norm() == 0.0)
                && m.system.iter().all(|t| {
                    matches!(
                        t,
                        SystemTerm::Onsite { .. }
                            | SystemTerm::Pair { kind: PairKind::Hopping | PairKind::ZZ | PairKind::DensityDensity, .. }
                    )
                });
            if !conserving {
                return Err(Error::FrameMismatch(
                    "the joint spin-mode frame needs excitation-conserving (rotating-wave) models".into(),
                ));
            }
            let mut h = OperatorSum::zero();
            for term in &m.system {
                match term {
                    SystemTerm::Onsite { site, eps } => {
                        h = h + OperatorSum::op(OpKind::SigmaZ, *site).scale_re((eps + omega0) / 2.0)
                    }
                    other => h = h + system_term_operator(other),
                }
            }
            for (k, w) in m.omegas.iter().enumerate() {
                if (w - omega0).abs() > 0.0 {
                    h.push(c(w - omega0, 0.0), &[(OpKind::Number, m.mode_site(k))]);
                }
            }
            for cpl in &m.couplings {
                h = h + coupling_operator(cpl, cpl.amplitude, m.mode_site(cpl.mode));
            }
            if m.offset != 0.0 {
                h = h + OperatorSum::identity(c(m.offset, 0.0));
            }
            Ok(h)
        }
    }
}

/// Named presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    Holstein,
    HubbardHolstein,
    Frohlich,
    Dicke,
    TavisCummings,
    JaynesCummings,
    RpaRadical,
    DickeExample2x2,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Holstein,
        Preset::HubbardHolstein,
        Preset::Frohlich,
        Preset::Dicke,
        Preset::TavisCummings,
        Preset::JaynesCummings,
        Preset::RpaRadical,
        Preset::DickeExample2x2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Holstein => "Holstein",
            Preset::HubbardHolstein => "HubbardHolstein",
            Preset::Frohlich => "Frohlich",
            Preset::Dicke => "Dicke",
            Preset::TavisCummings => "TavisCummings",
            Preset::JaynesCummings => "JaynesCummings",
            Preset::RpaRadical => "RpaRadical",
            Preset::DickeExample2x2 => "DickeExample2x2",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL.iter().copied().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|p| p.name()).collect();
            Error::Config(format!("unknown model preset `{s}`; valid presets: {}", names.join(", ")))
        })
    }
}

/// Preset parameters. Which fields are required depends on the preset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetParams {
    pub n_sites: Option<usize>,
    pub n_modes: Option<usize>,
    /// Onsite energies `ε_i`.
    pub eps: Option<Vec<f64>>,
    /// Mode frequencies `ω_k`.
    pub omega: Option<Vec<f64>>,
    /// Linear couplings `v[j][k]`.
    pub v: Option<Vec<Vec<f64>>>,
    /// Three-index couplings `(i, j, k, v_ijk)`.
    pub v3: Option<Vec<(usize, usize, usize, f64)>>,
    /// Hopping amplitudes `(i, j, h_ij)`.
    pub hopping: Option<Vec<(usize, usize, f64)>>,
    /// `σ_zσ_z` or density-density couplings `(i, j, ε_ij)`.
    pub pair: Option<Vec<(usize, usize, f64)>>,
    /// Two-electron integrals `(i, j, j', i', h)`.
    pub interaction: Option<Vec<(usize, usize, usize, usize, f64)>>,
}

fn req<T: Clone>(o: &Option<T>, model: &str, param: &str) -> Result<T> {
    o.clone().ok_or_else(|| Error::IncompleteParams { model: model.into(), param: param.into() })
}

fn linear_couplings(v: &[Vec<f64>], kind: CouplingKind) -> Vec<Coupling> {
    let mut out = Vec::new();
    for (j, row) in v.iter().enumerate() {
        for (k, &a) in row.iter().enumerate() {
            if a != 0.0 {
                out.push(Coupling { sites: vec![j], mode: k, amplitude: c(a, 0.0), kind, string: vec![] });
            }
        }
    }
    out
}

fn onsite(eps: &[f64]) -> Vec<SystemTerm> {
    eps.iter().enumerate().filter(|(_, e)| **e != 0.0).map(|(i, &e)| SystemTerm::Onsite { site: i, eps: e }).collect()
}

fn pairs(list: &[(usize, usize, f64)], kind: PairKind) -> Vec<SystemTerm> {
    list.iter()
        .map(|&(i, j, v)| SystemTerm::Pair { i, j, value: c(v, 0.0), kind, string: vec![] })
        .collect()
}

/// Builds a validated preset model.
pub fn preset(p: Preset, params: &PresetParams) -> Result<ModelSpec> {
    let name = p.name();
    let eps = || req(&params.eps, name, "eps");
    let omega = || req(&params.omega, name, "omega");
    let v = || req(&params.v, name, "v");
    let opt_pairs = |o: &Option<Vec<(usize, usize, f64)>>| o.clone().unwrap_or_default();
    let model = match p {
        Preset::DickeExample2x2 => {
            let eps = params.eps.clone().unwrap_or(vec![0.5, 0.5]);
            let omega = params.omega.clone().unwrap_or(vec![1.0, 1.0]);
            let v = params.v.clone().unwrap_or(vec![vec![0.5, -0.5], vec![-0.5, 0.5]]);
            let pair = params.pair.clone().unwrap_or(vec![(0, 1, 1.0)]);
            let mut system = onsite(&eps);
            system.extend(pairs(&pair, PairKind::ZZ));
            ModelSpec {
                name: name.into(),
                statistics: Statistics::Spin,
                n_sites: 2,
                n_modes: 2,
                system,
                couplings: linear_couplings(&v, CouplingKind::Transverse),
                omegas: omega,
                drives: vec![],
                offset: 0.0,
            }
        }
        Preset::Holstein | Preset::Dicke | Preset::TavisCummings | Preset::JaynesCummings => {
            let eps = eps()?;
            let omega = omega()?;
            let v = v()?;
            let kind = match p {
                Preset::Holstein => CouplingKind::Longitudinal,
                Preset::Dicke => CouplingKind::Transverse,
                _ => CouplingKind::RotatingWave,
            };
            if p == Preset::JaynesCummings && (eps.len() != 1 || omega.len() != 1) {
                return Err(Error::InvalidArgument("JaynesCummings has one spin and one mode".into()));
            }
            let mut system = onsite(&eps);
            system.extend(pairs(&opt_pairs(&params.hopping), PairKind::Hopping));
            system.extend(pairs(&opt_pairs(&params.pair), PairKind::ZZ));
            ModelSpec {
                name: name.into(),
                statistics: Statistics::Spin,
                n_sites: eps.len(),
                n_modes: omega.len(),
                system,
                couplings: linear_couplings(&v, kind),
                omegas: omega,
                drives: vec![],
                offset: 0.0,
            }
        }
        Preset::HubbardHolstein | Preset::Frohlich | Preset::RpaRadical => {
            let eps = eps()?;
            let omega = omega()?;
            let mut system = onsite(&eps);
            system.extend(pairs(&opt_pairs(&params.hopping), PairKind::Hopping));
            system.extend(pairs(&opt_pairs(&params.pair), PairKind::DensityDensity));
            let mut couplings = Vec::new();
            match p {
                Preset::HubbardHolstein => couplings.extend(linear_couplings(&v()?, CouplingKind::Density)),
                _ => {
                    let v3 = req(&params.v3, name, "v3")?;
                    let kind =
                        if p == Preset::Frohlich { CouplingKind::QuadraticChiral } else { CouplingKind::QuadraticHopping };
                    for (i, j, k, a) in v3 {
                        let (sites, kind) = if i == j { (vec![i], CouplingKind::Density) } else { (vec![i, j], kind) };
                        couplings.push(Coupling { sites, mode: k, amplitude: c(a, 0.0), kind, string: vec![] });
                    }
                }
            }
            if p == Preset::RpaRadical {
                if eps.len() != 4 {
                    return Err(Error::InvalidArgument(
                        "RpaRadical uses the four spin-orbitals 1↑, 1↓, 2↑, 2↓".into(),
                    ));
                }
                for (i, j, jp, ip, h) in params.interaction.clone().unwrap_or_default() {
                    system.push(SystemTerm::Quartic { i, j, jp, ip, value: h });
                }
            }
            ModelSpec {
                name: name.into(),
                statistics: Statistics::Fermion,
                n_sites: eps.len(),
                n_modes: omega.len(),
                system,
                couplings,
                omegas: omega,
                drives: vec![],
                offset: 0.0,
            }
        }
    };
    model.validate()?;
    Ok(model)
}

/// Site/mode register of `model`, qubits first.
pub fn default_register(model: &ModelSpec, d: usize) -> Result<Register> {
    let mut s = vec![SiteKind::Qubit; model.n_sites];
    s.extend(std::iter::repeat_n(SiteKind::Mode(d), model.n_modes));
    Register::new(s)
}

/// Per-mode coupling amplitudes `v_jk` of linear couplings, keyed by `(site, mode)`.
pub fn coupling_table(model: &ModelSpec) -> BTreeMap<(usize, usize), C64> {
    model
        .couplings
        .iter()
        .filter(|c| c.sites.len() == 1)
        .map(|c| ((c.sites[0], c.mode), c.amplitude))
        .collect()
}

/// Model classes of the circuit-depth scaling table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelClass {
    /// `σ^i b_i` with nearest-neighbour hopping.
    NearestNeighbour,
    /// `σ^i b_k` for all pairs.
    AllToAll,
    /// `σ^i σ^{i+1} b_i`, with `N_b + 1` spins.
    QuadraticNearestNeighbour,
    /// `σ^i σ^j b_k` for all `i < j` and all `k`.
    QuadraticAllToAll,
    /// One spin coupled to every mode.
    SpinBoson,
}

impl ModelClass {
    pub const ALL: [ModelClass; 5] = [
        ModelClass::NearestNeighbour,
        ModelClass::AllToAll,
        ModelClass::QuadraticNearestNeighbour,
        ModelClass::QuadraticAllToAll,
        ModelClass::SpinBoson,
    ];

    /// Expected growth exponent of the Trotter depth in `N_b`.
    pub fn depth_exponent(self) -> u32 {
        match self {
            ModelClass::NearestNeighbour | ModelClass::QuadraticNearestNeighbour => 0,
            ModelClass::AllToAll | ModelClass::SpinBoson => 1,
            ModelClass::QuadraticAllToAll => 2,
        }
    }
}

/// Representative spin model of a class with `n_b` modes. Parameters vary mildly with
/// the indices so no two couplings coincide.
pub fn class_model(class: ModelClass, n_b: usize) -> ModelSpec {
    let n_s = match class {
        ModelClass::QuadraticNearestNeighbour => n_b + 1,
        ModelClass::SpinBoson => 1,
        _ => n_b,
    };
    let v = |a: usize, b: usize| c(0.1 + 0.01 * a as f64 + 0.003 * b as f64, 0.0);
    let mut couplings = Vec::new();
    let mut system: Vec<SystemTerm> =
        (0..n_s).map(|i| SystemTerm::Onsite { site: i, eps: 0.5 + 0.1 * i as f64 }).collect();
    let single = |i: usize, k: usize, kind| Coupling { sites: vec![i], mode: k, amplitude: v(i, k), kind, string: vec![] };
    let pair = |i: usize, j: usize, k: usize| Coupling {
        sites: vec![i, j],
        mode: k,
        amplitude: v(i + j, k),
        kind: CouplingKind::QuadraticXX,
        string: vec![],
    };
    match class {
        ModelClass::NearestNeighbour => {
            for i in 0..n_b {
                couplings.push(single(i, i, CouplingKind::Longitudinal));
            }
            for i in 0..n_s.saturating_sub(1) {
                system.push(SystemTerm::Pair { i, j: i + 1, value: c(0.2, 0.0), kind: PairKind::Hopping, string: vec![] });
            }
        }
        ModelClass::AllToAll => {
            for i in 0..n_s {
                for k in 0..n_b {
                    couplings.push(single(i, k, CouplingKind::Transverse));
                }
            }
        }
        ModelClass::QuadraticNearestNeighbour => {
            for i in 0..n_b {
                couplings.push(pair(i, i + 1, i));
            }
        }
        ModelClass::QuadraticAllToAll => {
            for i in 0..n_s {
                for j in i + 1..n_s {
                    for k in 0..n_b {
                        couplings.push(pair(i, j, k));
                    }
                }
            }
        }
        ModelClass::SpinBoson => {
            for k in 0..n_b {
                couplings.push(single(0, k, CouplingKind::Transverse));
            }
        }
    }
    ModelSpec {
        name: format!("{class:?}_{n_b}"),
        statistics: Statistics::Spin,
        n_sites: n_s,
        n_modes: n_b,
        system,
        couplings,
        omegas: (0..n_b).map(|k| 1.0 + 0.05 * k as f64).collect(),
        drives: vec![],
        offset: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::exact_propagator;
    use crate::linalg::{self, eigh, max_abs_diff};
    use proptest::prelude::*;

    pub fn dicke() -> ModelSpec {
        preset(Preset::DickeExample2x2, &PresetParams::default()).unwrap()
    }

    #[test]
    fn dicke_example_parameters() {
        let m = dicke();
        assert_eq!(m.omegas, vec![1.0, 1.0]);
        assert!(m.system.contains(&SystemTerm::Onsite { site: 0, eps: 0.5 }));
        assert!(m.system.contains(&SystemTerm::Onsite { site: 1, eps: 0.5 }));
        let tab = coupling_table(&m);
        assert_eq!(tab[&(0, 0)], c(0.5, 0.0));
        assert_eq!(tab[&(1, 1)], c(0.5, 0.0));
        assert_eq!(tab[&(0, 1)], c(-0.5, 0.0));
        assert_eq!(tab[&(1, 0)], c(-0.5, 0.0));
    }

    #[test]
    fn missing_parameter_is_reported() {
        let e = preset(Preset::Holstein, &PresetParams { eps: Some(vec![1.0]), ..Default::default() }).unwrap_err();
        assert!(matches!(e, Error::IncompleteParams { .. }));
        assert!(Preset::from_name("Nope").unwrap_err().to_string().contains("DickeExample2x2"));
    }

    #[test]
    fn rotating_with_zero_frequency_equals_lab() {
        let mut m = dicke();
        m.omegas = vec![0.0, 0.0];
        let r = m.register(3).unwrap();
        let a = build(&m, Frame::Lab, 1.3).unwrap().embed(&r).unwrap();
        let b = build(&m, Frame::RotatingModes, 1.3).unwrap().embed(&r).unwrap();
        assert!(max_abs_diff(&a, &b) < 1e-14);
    }

    #[test]
    fn dicke_rotating_phases() {
        let m = dicke();
        let (tau, step) = (0.2, 3.0);
        let h = build(&m, Frame::RotatingModes, tau * step).unwrap();
        let phase = m.omegas[0] * tau * step;
        let found = h.terms.iter().any(|t| {
            t.ops.iter().any(|o| o.kind == OpKind::Create && o.site == 2)
                && (t.coeff - cis(phase) * 0.5).norm() < 1e-14
        });
        assert!(found);
    }

    #[test]
    fn joint_frame_for_jaynes_cummings() {
        let params = PresetParams {
            eps: Some(vec![-1.3]),
            omega: Some(vec![1.0]),
            v: Some(vec![vec![0.2]]),
            ..Default::default()
        };
        let m = preset(Preset::JaynesCummings, &params).unwrap();
        let h = build(&m, Frame::RotatingModesAndSpins { omega0: 1.0 }, 0.7).unwrap();
        // σ_z is +1 on the ground level, so the frame shifts ε/2 by +ω₀/2.
        let expect = OperatorSum::op(OpKind::SigmaZ, 0).scale_re(-0.15)
            + OperatorSum::product(c(0.2, 0.0), &[(OpKind::SigmaMinus, 0), (OpKind::Create, 1)])
            + OperatorSum::product(c(0.2, 0.0), &[(OpKind::SigmaPlus, 0), (OpKind::Annihilate, 1)]);
        let r = m.register(4).unwrap();
        assert!(max_abs_diff(&h.embed(&r).unwrap(), &expect.embed(&r).unwrap()) < 1e-14);
        assert!(matches!(build(&dicke(), Frame::RotatingModesAndSpins { omega0: 1.0 }, 0.0), Err(Error::FrameMismatch(_))));
    }

    #[test]
    fn tavis_cummings_reduces_to_jaynes_cummings() {
        let params = PresetParams {
            eps: Some(vec![0.9]),
            omega: Some(vec![1.1]),
            v: Some(vec![vec![0.3]]),
            ..Default::default()
        };
        let tc = preset(Preset::TavisCummings, &params).unwrap();
        let jc = preset(Preset::JaynesCummings, &params).unwrap();
        assert_eq!(tc.system, jc.system);
        assert_eq!(tc.couplings, jc.couplings);
        assert_eq!(tc.omegas, jc.omegas);
    }

    #[test]
    fn jordan_wigner_single_orbital() {
        let params = PresetParams { eps: Some(vec![0.7]), omega: Some(vec![]), v: Some(vec![]), ..Default::default() };
        let m = preset(Preset::HubbardHolstein, &params).unwrap();
        let s = jordan_wigner(&m).unwrap();
        let r = s.register(2).unwrap();
        let (vals, _) = eigh(&build(&s, Frame::Lab, 0.0).unwrap().embed(&r).unwrap());
        assert!((vals[0]).abs() < 1e-12 && (vals[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn jordan_wigner_two_orbital_hopping() {
        let t = 0.8;
        let params = PresetParams {
            eps: Some(vec![0.0, 0.0]),
            omega: Some(vec![]),
            v: Some(vec![vec![], vec![]]),
            hopping: Some(vec![(0, 1, t)]),
            ..Default::default()
        };
        let m = preset(Preset::HubbardHolstein, &params).unwrap();
        let r = m.register(2).unwrap();
        let (vals, _) = eigh(&build(&m, Frame::Lab, 0.0).unwrap().embed(&r).unwrap());
        let expect = [-t, 0.0, 0.0, t];
        for (a, b) in vals.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn jw_monomial_anticommutation() {
        // {c_i, c_j†} = δ_ij on three orbitals.
        let r = Register::new(vec![SiteKind::Qubit; 3]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let a = jw_monomial(&[(false, i), (true, j)], 3).embed(&r).unwrap();
                let b = jw_monomial(&[(true, j), (false, i)], 3).embed(&r).unwrap();
                let expect = if i == j { linalg::identity(8) } else { CMatrix::zeros(8, 8) };
                assert!(max_abs_diff(&(a + b), &expect) < 1e-14);
            }
        }
    }

    #[test]
    fn presets_are_hermitian() {
        let models = vec![
            dicke(),
            preset(
                Preset::Holstein,
                &PresetParams {
                    eps: Some(vec![0.3, -0.2, 0.1]),
                    omega: Some(vec![1.0, 0.8, 1.2]),
                    v: Some(vec![vec![0.2, 0.0, 0.0], vec![0.0, 0.2, 0.0], vec![0.0, 0.0, 0.2]]),
                    hopping: Some(vec![(0, 1, 0.4), (1, 2, 0.4)]),
                    ..Default::default()
                },
            )
            .unwrap(),
            preset(
                Preset::Frohlich,
                &PresetParams {
                    eps: Some(vec![0.3, -0.2, 0.1]),
                    omega: Some(vec![1.0]),
                    v3: Some(vec![(0, 2, 0, 0.3), (1, 1, 0, 0.2)]),
                    hopping: Some(vec![(0, 2, 0.4)]),
                    ..Default::default()
                },
            )
            .unwrap(),
            preset(
                Preset::RpaRadical,
                &PresetParams {
                    eps: Some(vec![0.1, 0.1, -0.1, -0.1]),
                    omega: Some(vec![2.0]),
                    v3: Some(vec![(0, 2, 0, 0.1), (1, 3, 0, 0.1)]),
                    hopping: Some(vec![(0, 2, 0.2), (1, 3, 0.2)]),
                    interaction: Some(vec![(0, 1, 1, 0, 0.5), (1, 0, 0, 1, 0.5), (2, 3, 3, 2, 0.5), (3, 2, 2, 3, 0.5)]),
                    ..Default::default()
                },
            )
            .unwrap(),
        ];
        for m in models {
            let r = m.register(3).unwrap();
            for frame in [Frame::Lab, Frame::RotatingModes] {
                for t in [0.0, 0.37, 2.1] {
                    let h = build(&m, frame, t).unwrap().embed(&r).unwrap();
                    assert!(linalg::hermiticity_defect(&h) < 1e-9, "{} {frame:?}", m.name);
                }
            }
        }
    }

    #[test]
    fn holstein_without_coupling_is_decoupled() {
        let m = preset(
            Preset::Holstein,
            &PresetParams {
                eps: Some(vec![0.3, -0.2]),
                omega: Some(vec![1.0, 0.8]),
                v: Some(vec![vec![0.0, 0.0], vec![0.0, 0.0]]),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(m.couplings.is_empty());
        let r = m.register(3).unwrap();
        let h = build(&m, Frame::Lab, 0.0).unwrap();
        let u = exact_propagator(&h, &r, 1.7).unwrap();
        let us = exact_propagator(&m.system_hamiltonian(), &r, 1.7).unwrap();
        let ub = exact_propagator(&m.bath_hamiltonian(), &r, 1.7).unwrap();
        assert!(max_abs_diff(&u, &(us * ub)) < 1e-12);
    }

    proptest! {
        #[test]
        fn rotating_frame_is_hermitian(t in 0.0f64..20.0) {
            let m = dicke();
            let r = m.register(3).unwrap();
            let h = build(&m, Frame::RotatingModes, t).unwrap();
            prop_assert!(linalg::hermiticity_defect(&h.embed(&r).unwrap()) < 1e-9);
        }
    }
}
