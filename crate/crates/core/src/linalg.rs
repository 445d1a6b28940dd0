//! Dense and sparse complex linear algebra helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const IM: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{i x}`.
#[inline]
pub fn cis(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Largest elementwise deviation of `m` from `m†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Largest elementwise deviation of `U†U` from the identity.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

/// Max-norm distance of `a` and `b` after removing a global phase. The phase is
/// fixed by the largest-magnitude element of `b`.
pub fn phase_aligned_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let phase = global_phase(a, b);
    max_abs_diff(a, &(b * phase))
}

/// Unit phase `p` such that `a ≈ p b`, read off the largest element of `b`.
pub fn global_phase(a: &CMatrix, b: &CMatrix) -> C64 {
    let (mut best, mut idx) = (-1.0, 0);
    for (k, z) in b.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            idx = k;
        }
    }
    let r = a.as_slice()[idx] / b.as_slice()[idx];
    if r.norm() == 0.0 || !r.is_finite() {
        ONE
    } else {
        r / r.norm()
    }
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0u32;
    let mut scale = 1.0;
    while norm1 * scale > 0.25 {
        s += 1;
        scale *= 0.5;
    }
    let x = a * C64::new(scale, 0.0);
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..40 {
        term = &term * &x * C64::new(1.0 / k as f64, 0.0);
        result += &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vecs.set_column(new, &eig.eigenvectors.column(old));
    }
    (vals, vecs)
}

/// `exp(-i t H)` for Hermitian `H` via eigendecomposition.
pub fn exp_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, v) = eigh(h);
    let mut scaled = v.clone();
    for (j, lam) in vals.iter().enumerate() {
        let ph = cis(-t * lam);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= ph;
        }
    }
    scaled * v.adjoint()
}

/// Eigenphases and eigenvectors of a unitary matrix.
///
/// Diagonalises a generic Hermitian combination of `U` and `U†`, which shares
/// eigenvectors with `U`, and checks the result.
pub fn unitary_eig(u: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = u.nrows();
    let ud = u.adjoint();
    let re = (u + &ud) * C64::new(0.5, 0.0);
    let im = (u - &ud) * C64::new(0.0, -0.5);
    let mut last = f64::INFINITY;
    for &(a, b) in &[(1.0, 0.618_033_988_7), (0.577_215_664_9, 1.0), (1.0, -0.414_213_562_4)] {
        let m = &re * C64::new(a, 0.0) + &im * C64::new(b, 0.0);
        let (_, v) = eigh(&m);
        let d = v.adjoint() * u * &v;
        let mut off = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off.max(d[(i, j)].norm());
                }
            }
        }
        if off < 1e-10 {
            let phases = (0..n).map(|i| d[(i, i)].arg()).collect();
            return Ok((phases, v));
        }
        last = last.min(off);
    }
    Err(Error::InvalidArgument(format!(
        "unitary eigendecomposition did not converge (residual {last:.2e})"
    )))
}

/// Principal matrix logarithm of a unitary: returns anti-Hermitian `L` with `U = e^L`.
/// Fails when an eigenphase lies within `1e-6` of `±π`.
pub fn logm_unitary(u: &CMatrix) -> Result<CMatrix> {
    let (phases, v) = unitary_eig(u)?;
    if let Some(p) = phases.iter().find(|p| std::f64::consts::PI - p.abs() < 1e-6) {
        return Err(Error::InvalidArgument(format!(
            "eigenphase {p:.9} too close to the branch cut"
        )));
    }
    let mut scaled = v.clone();
    for (j, p) in phases.iter().enumerate() {
        for z in scaled.column_mut(j).iter_mut() {
            *z *= C64::new(0.0, *p);
        }
    }
    Ok(scaled * v.adjoint())
}

/// Spectral (operator 2-) norm.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    let (vals, _) = eigh(&(m.adjoint() * m));
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Kronecker product with the first factor varying fastest in the combined index,
/// i.e. `kron_le(a, b)` acts as `b ⊗ a` in the usual big-endian notation.
pub fn kron_le(a: &CMatrix, b: &CMatrix) -> CMatrix {
    b.kronecker(a)
}

/// Row-list sparse matrix.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    pub n: usize,
    pub rows: Vec<Vec<(usize, C64)>>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, rows: vec![Vec::new(); n] }
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates and dropping zeros.
    pub fn from_triplets(n: usize, trips: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for (i, j, v) in trips {
            rows[i].push((j, v));
        }
        for row in rows.iter_mut() {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|e| e.1.norm() > 0.0);
            *row = merged;
        }
        Self { n, rows }
    }

    pub fn from_dense(m: &CMatrix, tol: f64) -> Self {
        let n = m.nrows();
        let mut trips = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)].norm() > tol {
                    trips.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(n, trips)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.n, self.triplets().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            n: self.n,
            rows: self.rows.iter().map(|r| r.iter().map(|&(j, v)| (j, v * s)).collect()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self::from_triplets(self.n, self.triplets().chain(other.triplets()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut trips = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &(k, a) in row {
                for &(j, b) in &other.rows[k] {
                    trips.push((i, j, a * b));
                }
            }
        }
        Self::from_triplets(self.n, trips)
    }

    pub fn matvec(&self, x: &[C64], out: &mut [C64]) {
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
    }

    /// `self · a` for a dense column-major matrix.
    pub fn mul_dense(&self, a: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, a.ncols());
        for j in 0..a.ncols() {
            let col = a.column(j);
            let src = col.as_slice();
            let mut dst = out.column_mut(j);
            for (i, row) in self.rows.iter().enumerate() {
                let mut acc = ZERO;
                for &(k, v) in row {
                    acc += v * src[k];
                }
                dst[i] = acc;
            }
        }
        out
    }

    /// `a · self`, using `(a S) = (S† a†)†`.
    pub fn dense_mul(&self, a: &CMatrix) -> CMatrix {
        self.adjoint().mul_dense(&a.adjoint()).adjoint()
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.add(&self.adjoint().scale(c(-1.0, 0.0)));
        d.triplets().fold(0.0, |acc, (_, _, v)| acc.max(v.norm()))
    }
}


/// Shortest round-trip decimal, in exponent form for magnitudes below 1e-4 so that
/// CSV cells stay short.
pub fn fmt_num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-4 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, -IM, IM, ZERO])
    }

    #[test]
    fn expm_of_pauli_rotation() {
        let t = 0.731;
        let u = expm(&(pauli_y() * c(0.0, -t)));
        let expect = CMatrix::from_row_slice(
            2,
            2,
            &[c(t.cos(), 0.0), c(-t.sin(), 0.0), c(t.sin(), 0.0), c(t.cos(), 0.0)],
        );
        assert!(max_abs_diff(&u, &expect) < 1e-13);
    }

    #[test]
    fn expm_matches_eigen_route() {
        let h = CMatrix::from_fn(5, 5, |i, j| c((i * j) as f64 * 0.3 + 1.0, i as f64 - j as f64));
        let h = (&h + h.adjoint()) * c(0.5, 0.0);
        let a = expm(&(&h * c(0.0, -2.3)));
        let b = exp_hermitian(&h, 2.3);
        assert!(max_abs_diff(&a, &b) < 1e-10);
    }

    #[test]
    fn log_inverts_exp() {
        let h = CMatrix::from_fn(4, 4, |i, j| c(0.1 * (i + 2 * j) as f64, 0.05 * (i as f64 - j as f64)));
        let h = (&h + h.adjoint()) * c(0.5, 0.0);
        let u = exp_hermitian(&h, 1.0);
        let l = logm_unitary(&u).unwrap();
        assert!(max_abs_diff(&l, &(&h * c(0.0, -1.0))) < 1e-10);
    }

    #[test]
    fn log_handles_degenerate_identity() {
        let l = logm_unitary(&identity(6)).unwrap();
        assert!(max_abs(&l) < 1e-14);
    }

    #[test]
    fn phase_alignment_ignores_global_phase() {
        let u = expm(&(pauli_y() * c(0.0, -0.4)));
        assert!(phase_aligned_distance(&u, &(&u * cis(1.3))) < 1e-14);
    }

    #[test]
    fn sparse_products_match_dense() {
        let a = CMatrix::from_fn(4, 4, |i, j| if (i + j) % 3 == 0 { c(i as f64, j as f64) } else { ZERO });
        let b = CMatrix::from_fn(4, 4, |i, j| c((i * 4 + j) as f64, 1.0));
        let s = SparseMatrix::from_dense(&a, 0.0);
        assert!(max_abs_diff(&s.mul_dense(&b), &(&a * &b)) < 1e-12);
        assert!(max_abs_diff(&s.dense_mul(&b), &(&b * &a)) < 1e-12);
        assert!(max_abs_diff(&s.mul(&s).to_dense(), &(&a * &a)) < 1e-12);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, -3.0)]));
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-12);
    }
}
