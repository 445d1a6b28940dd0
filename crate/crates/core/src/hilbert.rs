//! Composite qubit/boson Hilbert spaces.
//!
//! Conventions used everywhere in the crate:
//!
//! * Basis states are indexed little-endian mixed-radix: the first site varies fastest.
//! * Qubit level 0 is the ground state and `σ_z|0⟩ = +|0⟩`, so `σ_z = diag(1, -1)`.
//!   Hence `P = (1 + ⟨σ_z⟩)/2` is the ground-state population.
//! * `σ_- = |0⟩⟨1|` and `σ_+ = |1⟩⟨0|`.
//! * Boson modes are truncated at `d` levels with a hard cutoff: `b†|d-1⟩ = 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, SparseMatrix, C64, ONE, ZERO};

/// Largest accepted Hilbert-space dimension.
pub const MAX_DIM: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SiteKind {
    Qubit,
    Mode(usize),
}

impl SiteKind {
    pub fn dim(self) -> usize {
        match self {
            SiteKind::Qubit => 2,
            SiteKind::Mode(d) => d,
        }
    }
}

/// Ordered list of sites defining a tensor-product basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<SiteKind>", into = "Vec<SiteKind>")]
pub struct Register {
    sites: Vec<SiteKind>,
    strides: Vec<usize>,
    dim: usize,
}

impl TryFrom<Vec<SiteKind>> for Register {
    type Error = Error;
    fn try_from(sites: Vec<SiteKind>) -> Result<Self> {
        Register::new(sites)
    }
}

impl From<Register> for Vec<SiteKind> {
    fn from(r: Register) -> Self {
        r.sites
    }
}

impl Register {
    pub fn new(sites: Vec<SiteKind>) -> Result<Self> {
        let mut strides = Vec::with_capacity(sites.len());
        let mut dim: usize = 1;
        for (i, s) in sites.iter().enumerate() {
            if let SiteKind::Mode(d) = s {
                if *d < 2 {
                    return Err(Error::InvalidArgument(format!("mode site {i} needs d >= 2, got {d}")));
                }
            }
            strides.push(dim);
            dim = dim
                .checked_mul(s.dim())
                .filter(|&n| n <= MAX_DIM)
                .ok_or_else(|| Error::InvalidArgument(format!("register dimension exceeds {MAX_DIM}")))?;
        }
        Ok(Self { sites, strides, dim })
    }

    /// `n_qubits` qubits followed by `n_modes` modes of truncation `d`.
    pub fn qubits_then_modes(n_qubits: usize, n_modes: usize, d: usize) -> Result<Self> {
        let mut s = vec![SiteKind::Qubit; n_qubits];
        s.extend(std::iter::repeat_n(SiteKind::Mode(d), n_modes));
        Self::new(s)
    }

    pub fn sites(&self) -> &[SiteKind] {
        &self.sites
    }
    pub fn len(&self) -> usize {
        self.sites.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn site_dim(&self, site: usize) -> usize {
        self.sites[site].dim()
    }
    pub fn stride(&self, site: usize) -> usize {
        self.strides[site]
    }
    pub fn kind(&self, site: usize) -> Result<SiteKind> {
        self.sites
            .get(site)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("site {site} not in register of {} sites", self.len())))
    }
    pub fn is_qubit(&self, site: usize) -> bool {
        matches!(self.sites.get(site), Some(SiteKind::Qubit))
    }
    pub fn is_mode(&self, site: usize) -> bool {
        matches!(self.sites.get(site), Some(SiteKind::Mode(_)))
    }
    pub fn qubit_sites(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_qubit(i)).collect()
    }
    pub fn mode_sites(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_mode(i)).collect()
    }

    pub fn require_qubit(&self, site: usize) -> Result<()> {
        match self.kind(site)? {
            SiteKind::Qubit => Ok(()),
            _ => Err(Error::KindMismatch { site, msg: "expected a qubit".into() }),
        }
    }
    pub fn require_mode(&self, site: usize) -> Result<usize> {
        match self.kind(site)? {
            SiteKind::Mode(d) => Ok(d),
            _ => Err(Error::KindMismatch { site, msg: "expected a bosonic mode".into() }),
        }
    }

    pub fn basis_index(&self, occupation: &[usize]) -> Result<usize> {
        if occupation.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "occupation has {} entries for {} sites",
                occupation.len(),
                self.len()
            )));
        }
        let mut idx = 0;
        for (site, (&level, kind)) in occupation.iter().zip(&self.sites).enumerate() {
            if level >= kind.dim() {
                return Err(Error::OutOfRange { site, level, dim: kind.dim() });
            }
            idx += level * self.strides[site];
        }
        Ok(idx)
    }

    pub fn occupation(&self, index: usize) -> Vec<usize> {
        self.sites
            .iter()
            .enumerate()
            .map(|(s, k)| (index / self.strides[s]) % k.dim())
            .collect()
    }

    #[inline]
    pub fn level(&self, index: usize, site: usize) -> usize {
        (index / self.strides[site]) % self.sites[site].dim()
    }
}

/// Single-site operator kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OpKind {
    SigmaPlus,
    SigmaMinus,
    SigmaX,
    SigmaY,
    SigmaZ,
    Identity,
    Annihilate,
    Create,
    Number,
}

impl OpKind {
    pub fn is_spin(self) -> bool {
        matches!(self, Self::SigmaPlus | Self::SigmaMinus | Self::SigmaX | Self::SigmaY | Self::SigmaZ)
    }
    pub fn is_boson(self) -> bool {
        matches!(self, Self::Annihilate | Self::Create | Self::Number)
    }

    pub fn dagger(self) -> Self {
        match self {
            Self::SigmaPlus => Self::SigmaMinus,
            Self::SigmaMinus => Self::SigmaPlus,
            Self::Annihilate => Self::Create,
            Self::Create => Self::Annihilate,
            k => k,
        }
    }

    /// Every supported single-site operator is monomial: it sends a basis level to at
    /// most one other level.
    #[inline]
    pub fn act(self, level: usize, dim: usize) -> Option<(usize, C64)> {
        match self {
            Self::Identity => Some((level, ONE)),
            Self::SigmaZ => Some((level, if level == 0 { ONE } else { -ONE })),
            Self::SigmaX => Some((1 - level, ONE)),
            Self::SigmaY => Some(if level == 0 { (1, c(0.0, 1.0)) } else { (0, c(0.0, -1.0)) }),
            Self::SigmaPlus => (level == 0).then_some((1, ONE)),
            Self::SigmaMinus => (level == 1).then_some((0, ONE)),
            Self::Annihilate => (level > 0).then(|| (level - 1, c((level as f64).sqrt(), 0.0))),
            Self::Create => (level + 1 < dim).then(|| (level + 1, c(((level + 1) as f64).sqrt(), 0.0))),
            Self::Number => Some((level, c(level as f64, 0.0))),
        }
    }

    /// Dense `dim × dim` matrix of this operator.
    pub fn matrix(self, dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        for l in 0..dim {
            if let Some((to, v)) = self.act(l, dim) {
                m[(to, l)] = v;
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SiteOp {
    pub kind: OpKind,
    pub site: usize,
}

/// A coefficient times a product of single-site operators on distinct sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: C64,
    pub ops: Vec<SiteOp>,
}

impl Term {
    fn canonical_ops(&self) -> Vec<SiteOp> {
        let mut ops: Vec<SiteOp> = self.ops.iter().copied().filter(|o| o.kind != OpKind::Identity).collect();
        ops.sort();
        ops
    }
}

/// Linear combination of operator products.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatorSum {
    pub terms: Vec<Term>,
}

impl OperatorSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(coeff: C64) -> Self {
        Self { terms: vec![Term { coeff, ops: vec![] }] }
    }

    pub fn op(kind: OpKind, site: usize) -> Self {
        Self::product(ONE, &[(kind, site)])
    }

    /// `coeff · Π ops`. Panics if a site repeats.
    pub fn product(coeff: C64, ops: &[(OpKind, usize)]) -> Self {
        let ops: Vec<SiteOp> = ops.iter().map(|&(kind, site)| SiteOp { kind, site }).collect();
        let sites: BTreeSet<usize> = ops.iter().map(|o| o.site).collect();
        assert_eq!(sites.len(), ops.len(), "operator product touches a site twice");
        Self { terms: vec![Term { coeff, ops }] }
    }

    pub fn push(&mut self, coeff: C64, ops: &[(OpKind, usize)]) {
        self.terms.extend(Self::product(coeff, ops).terms);
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { terms: self.terms.iter().map(|t| Term { coeff: t.coeff * s, ops: t.ops.clone() }).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(c(s, 0.0))
    }

    /// Product of two sums whose terms act on disjoint sites.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for a in &self.terms {
            for b in &other.terms {
                let sa: BTreeSet<usize> = a.ops.iter().map(|o| o.site).collect();
                if b.ops.iter().any(|o| sa.contains(&o.site)) {
                    return Err(Error::InvalidArgument("operator product on a shared site".into()));
                }
                let mut ops = a.ops.clone();
                ops.extend(b.ops.iter().copied());
                out.terms.push(Term { coeff: a.coeff * b.coeff, ops });
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff.conj(),
                    ops: t.ops.iter().map(|o| SiteOp { kind: o.kind.dagger(), site: o.site }).collect(),
                })
                .collect(),
        }
    }

    /// Merges equal operator products and drops vanishing coefficients.
    pub fn simplify(&self, tol: f64) -> Self {
        let mut acc: BTreeMap<Vec<SiteOp>, C64> = BTreeMap::new();
        for t in &self.terms {
            *acc.entry(t.canonical_ops()).or_insert(ZERO) += t.coeff;
        }
        Self {
            terms: acc.into_iter().filter(|(_, v)| v.norm() > tol).map(|(ops, coeff)| Term { coeff, ops }).collect(),
        }
    }

    /// Symbolic Hermiticity check by matching each term with its conjugate partner.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let diff = (self.clone() - self.adjoint()).simplify(tol);
        diff.terms.is_empty()
    }

    pub fn sites(&self) -> BTreeSet<usize> {
        self.terms.iter().flat_map(|t| t.ops.iter().map(|o| o.site)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, reg: &Register) -> Result<()> {
        for t in &self.terms {
            let mut seen = BTreeSet::new();
            for o in &t.ops {
                let kind = reg.kind(o.site)?;
                if !seen.insert(o.site) {
                    return Err(Error::InvalidArgument(format!("term touches site {} twice", o.site)));
                }
                match kind {
                    SiteKind::Qubit if o.kind.is_boson() => {
                        return Err(Error::KindMismatch { site: o.site, msg: format!("{:?} on a qubit", o.kind) })
                    }
                    SiteKind::Mode(_) if o.kind.is_spin() => {
                        return Err(Error::KindMismatch { site: o.site, msg: format!("{:?} on a mode", o.kind) })
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Sparse matrix of the operator on `reg`.
    pub fn embed_sparse(&self, reg: &Register) -> Result<SparseMatrix> {
        self.check(reg)?;
        let dim = reg.dim();
        let mut trips = Vec::new();
        for t in &self.terms {
            if t.coeff == ZERO {
                continue;
            }
            'col: for col in 0..dim {
                let mut row = col;
                let mut amp = t.coeff;
                for o in &t.ops {
                    let lvl = reg.level(row, o.site);
                    match o.kind.act(lvl, reg.site_dim(o.site)) {
                        Some((to, v)) => {
                            row = row + to * reg.stride(o.site) - lvl * reg.stride(o.site);
                            amp *= v;
                        }
                        None => continue 'col,
                    }
                }
                trips.push((row, col, amp));
            }
        }
        Ok(SparseMatrix::from_triplets(dim, trips))
    }

    /// Dense matrix of the operator on `reg`.
    pub fn embed(&self, reg: &Register) -> Result<CMatrix> {
        Ok(self.embed_sparse(reg)?.to_dense())
    }
}

impl fmt::Display for OperatorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.4}{:+.4}i)", t.coeff.re, t.coeff.im)?;
            for o in &t.ops {
                write!(f, " {:?}[{}]", o.kind, o.site)?;
            }
        }
        Ok(())
    }
}

impl Add for OperatorSum {
    type Output = OperatorSum;
    fn add(mut self, rhs: Self) -> Self {
        self.terms.extend(rhs.terms);
        self
    }
}

impl Sub for OperatorSum {
    type Output = OperatorSum;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-ONE)
    }
}

impl Neg for OperatorSum {
    type Output = OperatorSum;
    fn neg(self) -> Self {
        self.scale(-ONE)
    }
}

impl Mul<C64> for OperatorSum {
    type Output = OperatorSum;
    fn mul(self, rhs: C64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for OperatorSum {
    type Output = OperatorSum;
    fn mul(self, rhs: f64) -> Self {
        self.scale_re(rhs)
    }
}

/// `exp(-i t H)` for a Hermitian operator sum, by dense eigendecomposition.
pub fn exact_propagator(h: &OperatorSum, reg: &Register, t: f64) -> Result<CMatrix> {
    let m = h.embed(reg)?;
    propagator_from_matrix(&m, t)
}

pub fn propagator_from_matrix(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let defect = linalg::hermiticity_defect(h);
    if defect > 1e-9 {
        return Err(Error::NotHermitian(defect));
    }
    Ok(linalg::exp_hermitian(h, t))
}

/// Pure state on a register.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    pub register: Register,
    pub amplitudes: CVector,
}

impl QuantumState {
    pub fn basis(register: &Register, occupation: &[usize]) -> Result<Self> {
        let idx = register.basis_index(occupation)?;
        let mut amps = CVector::zeros(register.dim());
        amps[idx] = ONE;
        Ok(Self { register: register.clone(), amplitudes: amps })
    }

    pub fn ground(register: &Register) -> Self {
        Self::basis(register, &vec![0; register.len()]).expect("ground state always valid")
    }

    /// Normalised superposition; fails on a zero vector or wrong length.
    pub fn from_amplitudes(register: &Register, amps: CVector) -> Result<Self> {
        if amps.len() != register.dim() {
            return Err(Error::InvalidArgument("amplitude vector length mismatch".into()));
        }
        let n = amps.norm();
        if n == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        Ok(Self { register: register.clone(), amplitudes: amps.unscale(n) })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn expectation(&self, obs: &OperatorSum) -> Result<C64> {
        let m = obs.embed_sparse(&self.register)?;
        Ok(sparse_expectation_vec(&m, self.amplitudes.as_slice()))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            register: self.register.clone(),
            elements: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn overlap(&self, other: &QuantumState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn apply_matrix(&mut self, u: &CMatrix) {
        self.amplitudes = u * &self.amplitudes;
    }
}

pub(crate) fn sparse_expectation_vec(m: &SparseMatrix, psi: &[C64]) -> C64 {
    let mut acc = ZERO;
    for (i, row) in m.rows.iter().enumerate() {
        let mut r = ZERO;
        for &(j, v) in row {
            r += v * psi[j];
        }
        acc += psi[i].conj() * r;
    }
    acc
}

pub(crate) fn sparse_expectation_rho(m: &SparseMatrix, rho: &CMatrix) -> C64 {
    let mut acc = ZERO;
    for (i, row) in m.rows.iter().enumerate() {
        for &(j, v) in row {
            acc += v * rho[(j, i)];
        }
    }
    acc
}

/// Mixed state on a register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub register: Register,
    pub elements: CMatrix,
}

impl DensityMatrix {
    pub fn new(register: &Register, elements: CMatrix) -> Result<Self> {
        if elements.nrows() != register.dim() || elements.ncols() != register.dim() {
            return Err(Error::InvalidArgument("density matrix shape mismatch".into()));
        }
        Ok(Self { register: register.clone(), elements })
    }

    pub fn trace(&self) -> C64 {
        self.elements.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::eigh(&self.elements).0.first().copied().unwrap_or(0.0)
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self, tol: f64, positivity: f64) -> Result<()> {
        let h = linalg::hermiticity_defect(&self.elements);
        if h > tol {
            return Err(Error::NotHermitian(h));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > tol {
            return Err(Error::InvalidArgument(format!("trace {tr} differs from 1")));
        }
        let lo = self.min_eigenvalue();
        if lo < -positivity {
            return Err(Error::InvalidArgument(format!("negative eigenvalue {lo:.3e}")));
        }
        Ok(())
    }

    pub fn expectation(&self, obs: &OperatorSum) -> Result<C64> {
        let m = obs.embed_sparse(&self.register)?;
        Ok(sparse_expectation_rho(&m, &self.elements))
    }

    pub fn fidelity_pure(&self, psi: &QuantumState) -> f64 {
        let v = &self.elements * &psi.amplitudes;
        psi.amplitudes.dotc(&v).re
    }

    /// Reduced state on the kept sites (in register order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("partial_trace needs at least one kept site".into()));
        }
        let keep: BTreeSet<usize> = keep.iter().copied().collect();
        for &s in &keep {
            self.register.kind(s)?;
        }
        let reg = &self.register;
        let kept_reg = Register::new(keep.iter().map(|&s| reg.sites()[s]).collect())?;
        let traced: Vec<usize> = (0..reg.len()).filter(|s| !keep.contains(s)).collect();
        let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for idx in 0..reg.dim() {
            let mut k = 0;
            for (pos, &s) in keep.iter().enumerate() {
                k += reg.level(idx, s) * kept_reg.stride(pos);
            }
            let mut t = 0;
            let mut mul = 1;
            for &s in &traced {
                t += reg.level(idx, s) * mul;
                mul *= reg.site_dim(s);
            }
            groups.entry(t).or_default().push((k, idx));
        }
        let mut out = CMatrix::zeros(kept_reg.dim(), kept_reg.dim());
        for members in groups.values() {
            for &(ki, i) in members {
                for &(kj, j) in members {
                    out[(ki, kj)] += self.elements[(i, j)];
                }
            }
        }
        DensityMatrix::new(&kept_reg, out)
    }
}

/// Precomputed index maps for acting with a local operator on a subset of sites.
#[derive(Clone, Debug)]
pub struct LocalAction {
    /// Offset of each local basis state (first listed site fastest).
    pub offsets: Vec<usize>,
    /// Full indices with all acted-on sites at level 0.
    pub bases: Vec<usize>,
    /// Sparse rows of the local matrix.
    rows: Vec<Vec<(usize, C64)>>,
    diag_identity: bool,
}

impl LocalAction {
    pub fn index_maps(reg: &Register, sites: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut uniq = BTreeSet::new();
        for &s in sites {
            reg.kind(s)?;
            if !uniq.insert(s) {
                return Err(Error::InvalidArgument(format!("site {s} listed twice")));
            }
        }
        let ld: usize = sites.iter().map(|&s| reg.site_dim(s)).product();
        let mut ordered = vec![0usize; ld];
        {
            let dims: Vec<usize> = sites.iter().map(|&s| reg.site_dim(s)).collect();
            for (local, slot) in ordered.iter_mut().enumerate() {
                let mut rem = local;
                let mut off = 0;
                for (k, &s) in sites.iter().enumerate() {
                    off += (rem % dims[k]) * reg.stride(s);
                    rem /= dims[k];
                }
                *slot = off;
            }
        }
        let bases = (0..reg.dim()).filter(|&i| sites.iter().all(|&s| reg.level(i, s) == 0)).collect();
        Ok((ordered, bases))
    }

    pub fn new(reg: &Register, sites: &[usize], m: &CMatrix) -> Result<Self> {
        let (offsets, bases) = Self::index_maps(reg, sites)?;
        let ld = offsets.len();
        if m.nrows() != ld || m.ncols() != ld {
            return Err(Error::InvalidArgument(format!("local matrix is {}x{}, expected {ld}", m.nrows(), m.ncols())));
        }
        let rows: Vec<Vec<(usize, C64)>> = (0..ld)
            .map(|i| (0..ld).filter(|&j| m[(i, j)] != ZERO).map(|j| (j, m[(i, j)])).collect())
            .collect();
        let diag_identity = linalg::max_abs_diff(m, &linalg::identity(ld)) == 0.0;
        Ok(Self { offsets, bases, rows, diag_identity })
    }

    pub fn local_dim(&self) -> usize {
        self.offsets.len()
    }

    /// In-place `v ← U v`.
    pub fn apply_vec(&self, v: &mut [C64]) {
        if self.diag_identity {
            return;
        }
        let ld = self.offsets.len();
        let mut buf = vec![ZERO; ld];
        for &b in &self.bases {
            for (k, &o) in self.offsets.iter().enumerate() {
                buf[k] = v[b + o];
            }
            for (i, row) in self.rows.iter().enumerate() {
                let mut acc = ZERO;
                for &(j, x) in row {
                    acc += x * buf[j];
                }
                v[b + self.offsets[i]] = acc;
            }
        }
    }

    /// In-place `M ← U M` for a square column-major matrix, columns in parallel.
    pub fn apply_columns(&self, m: &mut CMatrix) {
        if self.diag_identity {
            return;
        }
        let n = m.nrows();
        m.as_mut_slice().par_chunks_mut(n).for_each(|col| self.apply_vec(col));
    }

    /// In-place `ρ ← U ρ U†` for Hermitian `ρ`.
    pub fn conjugate_hermitian(&self, rho: &mut CMatrix) {
        if self.diag_identity {
            return;
        }
        self.apply_columns(rho);
        let mut t = rho.adjoint();
        self.apply_columns(&mut t);
        *rho = t;
    }

    /// `U ρ U†` for any `ρ`.
    pub fn conjugate(&self, rho: &mut CMatrix) {
        self.conjugate_hermitian(rho);
        if !self.diag_identity {
            *rho = rho.adjoint();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qm(d: usize) -> Register {
        Register::new(vec![SiteKind::Qubit, SiteKind::Mode(d)]).unwrap()
    }

    fn h_jc(q: usize, m: usize) -> OperatorSum {
        OperatorSum::product(ONE, &[(OpKind::SigmaMinus, q), (OpKind::Create, m)])
            + OperatorSum::product(ONE, &[(OpKind::SigmaPlus, q), (OpKind::Annihilate, m)])
    }

    #[test]
    fn basis_index_examples() {
        let r = qm(3);
        assert_eq!(r.basis_index(&[0, 0]).unwrap(), 0);
        assert_eq!(r.basis_index(&[1, 0]).unwrap(), 1);
        assert_eq!(r.basis_index(&[0, 2]).unwrap(), 4);
        assert!(matches!(r.basis_index(&[2, 0]), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn basis_index_is_bijective_enumeration() {
        let r = Register::new(vec![SiteKind::Mode(3), SiteKind::Qubit, SiteKind::Mode(2)]).unwrap();
        let mut listed = Vec::new();
        for c2 in 0..2 {
            for q in 0..2 {
                for m in 0..3 {
                    listed.push(vec![m, q, c2]);
                }
            }
        }
        for (i, occ) in listed.iter().enumerate() {
            assert_eq!(r.basis_index(occ).unwrap(), i);
            assert_eq!(&r.occupation(i), occ);
        }
    }

    #[test]
    fn rejects_oversized_register() {
        assert!(Register::new(vec![SiteKind::Qubit; 25]).is_err());
        assert!(Register::new(vec![SiteKind::Mode(1)]).is_err());
    }

    #[test]
    fn embed_examples() {
        let r = qm(3);
        let id = OperatorSum::identity(ONE).embed(&r).unwrap();
        assert_eq!(id, linalg::identity(6));
        let n = OperatorSum::op(OpKind::Number, 0).embed(&Register::new(vec![SiteKind::Mode(3)]).unwrap()).unwrap();
        assert_eq!(n, CMatrix::from_diagonal(&CVector::from_vec(vec![c(0., 0.), c(1., 0.), c(2., 0.)])));
        let r2 = qm(2);
        let m = OperatorSum::product(ONE, &[(OpKind::SigmaMinus, 0), (OpKind::Create, 1)]).embed(&r2).unwrap();
        let from = r2.basis_index(&[1, 0]).unwrap();
        let to = r2.basis_index(&[0, 1]).unwrap();
        let mut expect = CMatrix::zeros(4, 4);
        expect[(to, from)] = ONE;
        assert_eq!(m, expect);
    }

    #[test]
    fn embed_matches_kronecker_products() {
        let r = Register::new(vec![SiteKind::Qubit, SiteKind::Mode(3), SiteKind::Qubit]).unwrap();
        let op = OperatorSum::product(c(0.3, -0.2), &[(OpKind::SigmaY, 2), (OpKind::Annihilate, 1), (OpKind::SigmaX, 0)]);
        let k = linalg::kron_le(
            &linalg::kron_le(&OpKind::SigmaX.matrix(2), &OpKind::Annihilate.matrix(3)),
            &OpKind::SigmaY.matrix(2),
        ) * c(0.3, -0.2);
        assert!(linalg::max_abs_diff(&op.embed(&r).unwrap(), &k) < 1e-15);
    }

    #[test]
    fn kind_mismatch_detected() {
        let r = qm(3);
        let bad = OperatorSum::op(OpKind::Create, 0);
        assert!(matches!(bad.embed(&r), Err(Error::KindMismatch { .. })));
        let bad = OperatorSum::op(OpKind::SigmaZ, 1);
        assert!(matches!(bad.embed(&r), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn pauli_conventions() {
        let x = OpKind::SigmaX.matrix(2);
        let y = OpKind::SigmaY.matrix(2);
        let sm = OpKind::SigmaMinus.matrix(2);
        let sp = OpKind::SigmaPlus.matrix(2);
        assert!(linalg::max_abs_diff(&sm, &((&x + &y * c(0.0, 1.0)) * c(0.5, 0.0))) < 1e-15);
        assert!(linalg::max_abs_diff(&sp, &((&x - &y * c(0.0, 1.0)) * c(0.5, 0.0))) < 1e-15);
        // Create annihilates the top level.
        let bd = OpKind::Create.matrix(3);
        assert_eq!(bd.column(2).iter().map(|z| z.norm()).sum::<f64>(), 0.0);
    }

    #[test]
    fn propagator_examples() {
        let r = qm(2);
        let u0 = exact_propagator(&h_jc(0, 1), &r, 0.0).unwrap();
        assert!(linalg::max_abs_diff(&u0, &linalg::identity(4)) < 1e-12);
        let rq = Register::new(vec![SiteKind::Qubit]).unwrap();
        let u = exact_propagator(&OperatorSum::op(OpKind::SigmaZ, 0).scale_re(0.5), &rq, std::f64::consts::PI).unwrap();
        assert!((u[(0, 0)] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((u[(1, 1)] - c(0.0, 1.0)).norm() < 1e-12);
        let u = exact_propagator(&h_jc(0, 1), &r, std::f64::consts::FRAC_PI_2).unwrap();
        let from = r.basis_index(&[1, 0]).unwrap();
        let to = r.basis_index(&[0, 1]).unwrap();
        assert!((u[(to, from)] - c(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn propagator_rejects_non_hermitian() {
        let r = qm(2);
        let h = OperatorSum::product(ONE, &[(OpKind::SigmaMinus, 0), (OpKind::Create, 1)]);
        assert!(matches!(exact_propagator(&h, &r, 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn partial_trace_examples() {
        let r = Register::new(vec![SiteKind::Qubit, SiteKind::Qubit]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = QuantumState::from_amplitudes(&r, CVector::from_vec(vec![c(s, 0.), ZERO, ZERO, c(s, 0.)])).unwrap();
        let red = bell.to_density().partial_trace(&[0]).unwrap();
        assert!(linalg::max_abs_diff(&red.elements, &(linalg::identity(2) * c(0.5, 0.))) < 1e-12);
        assert!(bell.to_density().partial_trace(&[]).is_err());

        let r = qm(2);
        let psi0 = QuantumState::basis(&r, &[1, 0]).unwrap();
        let u = exact_propagator(&h_jc(0, 1), &r, std::f64::consts::FRAC_PI_4).unwrap();
        let mut psi = psi0.clone();
        psi.apply_matrix(&u);
        let red = psi.to_density().partial_trace(&[1]).unwrap();
        assert!((red.elements[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((red.elements[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(red.elements[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let r = Register::new(vec![SiteKind::Qubit, SiteKind::Mode(3)]).unwrap();
        let a = CVector::from_vec(vec![c(0.6, 0.), c(0., 0.8)]);
        let b = CVector::from_vec(vec![c(0.5, 0.), c(0.5, 0.5), c(0., 0.5)]);
        let full = linalg::kron_le(&CMatrix::from_column_slice(2, 1, a.as_slice()), &CMatrix::from_column_slice(3, 1, b.as_slice()));
        let psi = QuantumState::from_amplitudes(&r, CVector::from_column_slice(full.as_slice())).unwrap();
        let red = psi.to_density().partial_trace(&[0]).unwrap();
        assert!(linalg::max_abs_diff(&red.elements, &(&a * a.adjoint())) < 1e-12);
    }

    #[test]
    fn expectation_examples() {
        let r = Register::new(vec![SiteKind::Qubit, SiteKind::Qubit, SiteKind::Mode(3)]).unwrap();
        let g = QuantumState::ground(&r);
        assert_eq!(g.expectation(&OperatorSum::op(OpKind::SigmaZ, 1)).unwrap(), ONE);
        let r = qm(3);
        let s = QuantumState::basis(&r, &[0, 1]).unwrap();
        assert_eq!(s.expectation(&OperatorSum::op(OpKind::Number, 1)).unwrap(), ONE);
        let rq = Register::new(vec![SiteKind::Qubit]).unwrap();
        let plus = QuantumState::from_amplitudes(&rq, CVector::from_vec(vec![ONE, ONE])).unwrap();
        assert!((plus.expectation(&OperatorSum::op(OpKind::SigmaX, 0)).unwrap() - ONE).norm() < 1e-12);
        assert!((plus.to_density().expectation(&OperatorSum::op(OpKind::SigmaX, 0)).unwrap() - ONE).norm() < 1e-12);
    }

    #[test]
    fn local_action_matches_embedding() {
        let r = Register::new(vec![SiteKind::Mode(3), SiteKind::Qubit, SiteKind::Mode(2)]).unwrap();
        let h = h_jc(1, 0) + OperatorSum::product(c(0.3, 0.), &[(OpKind::SigmaZ, 1), (OpKind::Number, 0)]);
        let full = exact_propagator(&h, &r, 0.7).unwrap();
        let local_reg = Register::new(vec![SiteKind::Qubit, SiteKind::Mode(3)]).unwrap();
        let hl = h_jc(0, 1) + OperatorSum::product(c(0.3, 0.), &[(OpKind::SigmaZ, 0), (OpKind::Number, 1)]);
        let ul = exact_propagator(&hl, &local_reg, 0.7).unwrap();
        let act = LocalAction::new(&r, &[1, 0], &ul).unwrap();
        let mut m = linalg::identity(r.dim());
        act.apply_columns(&mut m);
        assert!(linalg::max_abs_diff(&m, &full) < 1e-12);
    }

    fn random_sum(seed: &[(u8, u8, f64, f64)], reg: &Register) -> OperatorSum {
        let spin = [OpKind::SigmaPlus, OpKind::SigmaMinus, OpKind::SigmaX, OpKind::SigmaY, OpKind::SigmaZ, OpKind::Identity];
        let bos = [OpKind::Annihilate, OpKind::Create, OpKind::Number, OpKind::Identity];
        let mut out = OperatorSum::zero();
        for &(a, b, re, im) in seed {
            let mut ops = Vec::new();
            for s in 0..reg.len() {
                if (a >> s) & 1 == 1 {
                    let k = if reg.is_qubit(s) { spin[(b as usize + s) % spin.len()] } else { bos[(b as usize + s) % bos.len()] };
                    ops.push((k, s));
                }
            }
            out.push(c(re, im), &ops);
        }
        out
    }

    proptest! {
        #[test]
        fn embed_is_linear(
            a in proptest::collection::vec((0u8..8, 0u8..24, -1.0f64..1.0, -1.0f64..1.0), 1..6),
            b in proptest::collection::vec((0u8..8, 0u8..24, -1.0f64..1.0, -1.0f64..1.0), 1..6),
        ) {
            let r = Register::new(vec![SiteKind::Qubit, SiteKind::Mode(4), SiteKind::Qubit]).unwrap();
            let sa = random_sum(&a, &r);
            let sb = random_sum(&b, &r);
            let sum = (sa.clone() + sb.clone()).embed(&r).unwrap();
            let sep = sa.embed(&r).unwrap() + sb.embed(&r).unwrap();
            prop_assert!(linalg::max_abs_diff(&sum, &sep) < 1e-12);
        }

        #[test]
        fn propagator_inverse_and_norm(
            a in proptest::collection::vec((0u8..8, 0u8..24, -1.0f64..1.0, -1.0f64..1.0), 1..6),
            t in -3.0f64..3.0,
        ) {
            let r = Register::new(vec![SiteKind::Qubit, SiteKind::Mode(3), SiteKind::Qubit]).unwrap();
            let s = random_sum(&a, &r);
            let h = s.clone() + s.adjoint();
            let u = exact_propagator(&h, &r, t).unwrap();
            let v = exact_propagator(&h, &r, -t).unwrap();
            prop_assert!(linalg::max_abs_diff(&(&u * &v), &linalg::identity(r.dim())) < 1e-9);
            prop_assert!(linalg::unitarity_defect(&u) < 1e-9);
            let mut psi = QuantumState::basis(&r, &[1, 2, 0]).unwrap();
            psi.apply_matrix(&u);
            prop_assert!((psi.norm() - 1.0).abs() < 1e-9);
            prop_assert!(h.is_hermitian(1e-12));
        }

        #[test]
        fn jc_conserves_excitations(t in -10.0f64..10.0, d in 2usize..7) {
            let r = qm(d);
            let u = exact_propagator(&h_jc(0, 1), &r, t).unwrap();
            let n = (OperatorSum::op(OpKind::Number, 1)
                + OperatorSum::identity(c(0.5, 0.))
                - OperatorSum::op(OpKind::SigmaZ, 0).scale_re(0.5)).embed(&r).unwrap();
            let comm = &u * &n - &n * &u;
            prop_assert!(linalg::max_abs(&comm) < 1e-9);
        }
    }
}
