//! Gate primitives and their decompositions.
//!
//! Composite bodies are listed in time order: the first gate acts first. The matrix
//! of a composite is therefore the product of its body matrices in reverse order.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::Register;
use crate::linalg::{c, cis, CMatrix, C64, ONE, ZERO};

use super::circuit::Gate;

/// Native operations with a closed-form matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Primitive {
    /// `exp(-iθ(σ_- b† + σ_+ b))` on (qubit, mode).
    Jc { theta: f64 },
    /// `exp(-i a σ_z / 2)`.
    Rz { angle: f64 },
    /// `R_z(φ) R_x(θ) R_z(-φ)`.
    Prx { theta: f64, phi: f64 },
    X,
    Y,
    H,
    S,
    Sdg,
    /// Sites (q1, q2).
    Cz,
    /// Sites (control, target).
    Cnot,
    Swap,
    FSwap,
    /// `exp(-i(χ σ_z n/2 - K n(n-1)/2))` on (qubit, mode).
    CoherentError { chi_t: f64, kerr_t: f64 },
    /// `exp(-i α σ_z n)` on (qubit, mode).
    Dispersive { alpha: f64 },
    /// `exp(-i a n)` on a mode; a frame change, not a hardware gate.
    ModePhase { angle: f64 },
}

fn need(g: &Gate, n_sites: usize, n_params: usize) -> Result<()> {
    if g.sites.len() != n_sites || g.params.len() != n_params {
        return Err(Error::InvalidArgument(format!(
            "gate {} expects {n_sites} sites and {n_params} params, got {} and {}",
            g.name,
            g.sites.len(),
            g.params.len()
        )));
    }
    Ok(())
}

impl Primitive {
    pub fn parse(g: &Gate) -> Result<Self> {
        let p = &g.params;
        let prim = match g.name.as_str() {
            "jc" => {
                need(g, 2, 1)?;
                Self::Jc { theta: p[0] }
            }
            "rz" => {
                need(g, 1, 1)?;
                Self::Rz { angle: p[0] }
            }
            "prx" => {
                need(g, 1, 2)?;
                Self::Prx { theta: p[0], phi: p[1] }
            }
            "x" | "y" | "h" | "s" | "sdg" => {
                need(g, 1, 0)?;
                match g.name.as_str() {
                    "x" => Self::X,
                    "y" => Self::Y,
                    "h" => Self::H,
                    "s" => Self::S,
                    _ => Self::Sdg,
                }
            }
            "cz" | "cnot" | "swap" | "fswap" => {
                need(g, 2, 0)?;
                if g.sites[0] == g.sites[1] {
                    return Err(Error::InvalidArgument(format!("{} on a single qubit", g.name)));
                }
                match g.name.as_str() {
                    "cz" => Self::Cz,
                    "cnot" => Self::Cnot,
                    "swap" => Self::Swap,
                    _ => Self::FSwap,
                }
            }
            "coherent_error" => {
                need(g, 2, 2)?;
                Self::CoherentError { chi_t: p[0], kerr_t: p[1] }
            }
            "dispersive" => {
                need(g, 2, 1)?;
                Self::Dispersive { alpha: p[0] }
            }
            "mode_phase" => {
                need(g, 1, 1)?;
                Self::ModePhase { angle: p[0] }
            }
            other => return Err(Error::InvalidArgument(format!("unknown primitive gate `{other}`"))),
        };
        Ok(prim)
    }

    /// Site-kind pattern: `true` for qubit, `false` for mode.
    fn pattern(self) -> &'static [bool] {
        match self {
            Self::Jc { .. } | Self::CoherentError { .. } | Self::Dispersive { .. } => &[true, false],
            Self::Cz | Self::Cnot | Self::Swap | Self::FSwap => &[true, true],
            Self::ModePhase { .. } => &[false],
            _ => &[true],
        }
    }

    pub fn check_sites(self, g: &Gate, reg: &Register) -> Result<()> {
        for (&s, &qubit) in g.sites.iter().zip(self.pattern()) {
            if qubit {
                reg.require_qubit(s)?;
            } else {
                reg.require_mode(s)?;
            }
        }
        Ok(())
    }

    pub fn is_entangling(self) -> bool {
        self.pattern().len() == 2
    }

    /// Local matrix with the first listed site varying fastest. `mode_dim` is the
    /// truncation of the mode site, where there is one.
    pub fn matrix(self, mode_dim: usize) -> CMatrix {
        let two = |m: [C64; 4]| CMatrix::from_row_slice(2, 2, &m);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Self::Jc { theta } => jc_matrix(theta, mode_dim),
            Self::Rz { angle } => rz_matrix(angle),
            Self::Prx { theta, phi } => rz_matrix(phi) * rx_matrix(theta) * rz_matrix(-phi),
            Self::X => two([ZERO, ONE, ONE, ZERO]),
            Self::Y => two([ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
            Self::H => two([c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]),
            Self::S => two([ONE, ZERO, ZERO, c(0.0, 1.0)]),
            Self::Sdg => two([ONE, ZERO, ZERO, c(0.0, -1.0)]),
            Self::Cz => CMatrix::from_diagonal(&crate::CVector::from_vec(vec![ONE, ONE, ONE, -ONE])),
            Self::Cnot => permutation_matrix(&[0, 3, 2, 1]),
            Self::Swap => permutation_matrix(&[0, 2, 1, 3]),
            Self::FSwap => {
                let mut m = permutation_matrix(&[0, 2, 1, 3]);
                m[(3, 3)] = -ONE;
                m
            }
            Self::CoherentError { chi_t, kerr_t } => diagonal_qm(mode_dim, |z, n| {
                cis(-(chi_t * z * n / 2.0 - kerr_t * n * (n - 1.0) / 2.0))
            }),
            Self::Dispersive { alpha } => diagonal_qm(mode_dim, |z, n| cis(-alpha * z * n)),
            Self::ModePhase { angle } => {
                CMatrix::from_diagonal(&crate::CVector::from_fn(mode_dim, |n, _| cis(-angle * n as f64)))
            }
        }
    }
}

fn permutation_matrix(img: &[usize]) -> CMatrix {
    let mut m = CMatrix::zeros(img.len(), img.len());
    for (from, &to) in img.iter().enumerate() {
        m[(to, from)] = ONE;
    }
    m
}

fn diagonal_qm(d: usize, f: impl Fn(f64, f64) -> C64) -> CMatrix {
    let mut m = CMatrix::zeros(2 * d, 2 * d);
    for n in 0..d {
        for q in 0..2 {
            let z = if q == 0 { 1.0 } else { -1.0 };
            m[(q + 2 * n, q + 2 * n)] = f(z, n as f64);
        }
    }
    m
}

pub fn rz_matrix(a: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cis(-a / 2.0), ZERO, ZERO, cis(a / 2.0)])
}

pub fn rx_matrix(t: f64) -> CMatrix {
    let (s, co) = (t / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
}

/// Closed form: 2×2 blocks on `(|1,n-1⟩, |0,n⟩)` rotating by `√n θ`.
pub fn jc_matrix(theta: f64, d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2 * d, 2 * d);
    m[(0, 0)] = ONE;
    m[(1 + 2 * (d - 1), 1 + 2 * (d - 1))] = ONE;
    for n in 1..d {
        let a = 1 + 2 * (n - 1);
        let b = 2 * n;
        let (s, co) = ((n as f64).sqrt() * theta).sin_cos();
        m[(a, a)] = c(co, 0.0);
        m[(b, b)] = c(co, 0.0);
        m[(a, b)] = c(0.0, -s);
        m[(b, a)] = c(0.0, -s);
    }
    m
}

pub fn jc_gate(qubit: usize, mode: usize, theta: f64) -> Gate {
    Gate::primitive("jc", vec![qubit, mode], vec![theta])
}

pub fn rz(qubit: usize, angle: f64) -> Gate {
    Gate::primitive("rz", vec![qubit], vec![angle])
}

pub fn x(qubit: usize) -> Gate {
    Gate::primitive("x", vec![qubit], vec![])
}

pub fn hadamard(qubit: usize) -> Gate {
    Gate::primitive("h", vec![qubit], vec![])
}

pub fn s_gate(qubit: usize) -> Gate {
    Gate::primitive("s", vec![qubit], vec![])
}

pub fn sdg_gate(qubit: usize) -> Gate {
    Gate::primitive("sdg", vec![qubit], vec![])
}

pub fn cz(q1: usize, q2: usize) -> Result<Gate> {
    distinct(q1, q2)?;
    Ok(Gate::primitive("cz", vec![q1, q2], vec![]))
}

pub fn cnot(control: usize, target: usize) -> Result<Gate> {
    distinct(control, target)?;
    Ok(Gate::primitive("cnot", vec![control, target], vec![]))
}

fn distinct(a: usize, b: usize) -> Result<()> {
    if a == b {
        Err(Error::InvalidArgument(format!("two-qubit gate needs distinct qubits, got {a} twice")))
    } else {
        Ok(())
    }
}

/// JC gate with coupling phase: `exp(-iθ(σ_- b† e^{iφ} + σ_+ b e^{-iφ}))`.
pub fn phased_jc(qubit: usize, mode: usize, theta: f64, phi: f64) -> Gate {
    Gate::composite(
        "phased_jc",
        vec![qubit, mode],
        vec![theta, phi],
        vec![rz(qubit, phi), jc_gate(qubit, mode, theta), rz(qubit, -phi)],
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QrOrder {
    /// JC, X, JC, X in time order.
    Forward,
    /// X, JC, X, JC in time order.
    Backward,
}

/// Quantum-Rabi gate approximating `exp(-iθ σ_x (b† e^{iφ} + b e^{-iφ}))`.
pub fn qr_gate(qubit: usize, mode: usize, theta: f64, phi: f64, order: QrOrder) -> Gate {
    let p = || phased_jc(qubit, mode, theta, phi);
    let (name, body) = match order {
        QrOrder::Forward => ("qr_forward", vec![p(), x(qubit), p(), x(qubit)]),
        QrOrder::Backward => ("qr_backward", vec![x(qubit), p(), x(qubit), p()]),
    };
    Gate::composite(name, vec![qubit, mode], vec![theta, phi], body)
}

/// Longitudinal-coupling gate approximating `exp(-iθ σ_z (b† e^{iφ} + b e^{-iφ}))`.
pub fn lc_gate(qubit: usize, mode: usize, theta: f64, phi: f64, order: QrOrder) -> Gate {
    Gate::composite(
        "lc",
        vec![qubit, mode],
        vec![theta, phi],
        vec![hadamard(qubit), qr_gate(qubit, mode, theta, phi, order), hadamard(qubit)],
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadraticKind {
    /// `σ_x¹ σ_x² (b† e^{iφ} + h.c.)`.
    XX,
    /// `σ_z¹ σ_z² (b† e^{iφ} + h.c.)`.
    ZZ,
    /// `(σ_+¹σ_-² + σ_-¹σ_+²)(b† e^{iφ} + h.c.)`.
    HoppingReal,
    /// `σ_+¹σ_-² b† e^{iφ} + h.c.`, realised with JC cores only.
    HoppingChiral,
}

/// Quadratic spin-spin-boson coupling circuits. The core acts on the second qubit.
pub fn quadratic_coupling_circuit(
    kind: QuadraticKind,
    q1: usize,
    q2: usize,
    mode: usize,
    theta: f64,
    phi: f64,
    order: QrOrder,
) -> Result<Gate> {
    distinct(q1, q2)?;
    let u = || cnot(q2, q1).expect("distinct");
    let xx_core = |t: f64| vec![u(), qr_gate(q2, mode, t, phi, order), u()];
    let body = match kind {
        QuadraticKind::XX => xx_core(theta),
        QuadraticKind::ZZ => {
            let mut b = vec![hadamard(q1), hadamard(q2)];
            b.extend(xx_core(theta));
            b.extend([hadamard(q1), hadamard(q2)]);
            b
        }
        QuadraticKind::HoppingReal => {
            let mut b = xx_core(theta / 2.0);
            b.extend([sdg_gate(q1), sdg_gate(q2)]);
            b.extend(xx_core(theta / 2.0));
            b.extend([s_gate(q1), s_gate(q2)]);
            b
        }
        QuadraticKind::HoppingChiral => vec![
            u(),
            phased_jc(q2, mode, theta / 2.0, phi),
            cz(q1, q2)?,
            phased_jc(q2, mode, theta / 2.0, phi + PI),
            cz(q1, q2)?,
            u(),
        ],
    };
    let name = match kind {
        QuadraticKind::XX => "quadratic_xx",
        QuadraticKind::ZZ => "quadratic_zz",
        QuadraticKind::HoppingReal => "quadratic_hopping",
        QuadraticKind::HoppingChiral => "quadratic_chiral",
    };
    Ok(Gate::composite(name, vec![q1, q2, mode], vec![theta, phi], body))
}

pub fn prx(qubit: usize, theta: f64, phi: f64) -> Gate {
    Gate::primitive("prx", vec![qubit], vec![theta, phi])
}

/// Virtual `R_z(φ)` from two π pulses; equals `-R_z(φ)`.
pub fn rz_via_prx(qubit: usize, varphi: f64) -> Gate {
    Gate::composite("rz_via_prx", vec![qubit], vec![varphi], vec![prx(qubit, PI, 0.0), prx(qubit, PI, varphi / 2.0)])
}

pub fn swap_gate(q1: usize, q2: usize) -> Result<Gate> {
    distinct(q1, q2)?;
    Ok(Gate::primitive("swap", vec![q1, q2], vec![]))
}

pub fn fswap_gate(q1: usize, q2: usize) -> Result<Gate> {
    distinct(q1, q2)?;
    Ok(Gate::primitive("fswap", vec![q1, q2], vec![]))
}

pub fn coherent_error_gate(qubit: usize, mode: usize, chi_t: f64, kerr_t: f64) -> Gate {
    Gate::primitive("coherent_error", vec![qubit, mode], vec![chi_t, kerr_t])
}

pub fn mode_phase(mode: usize, angle: f64) -> Gate {
    Gate::primitive("mode_phase", vec![mode], vec![angle])
}

pub fn dispersive(qubit: usize, mode: usize, alpha: f64) -> Gate {
    Gate::primitive("dispersive", vec![qubit, mode], vec![alpha])
}

/// Conditional displacement of the mode through an auxiliary qubit in `|0⟩`.
pub fn aux_displacement(mode: usize, aux: usize, theta: f64) -> Gate {
    Gate::composite(
        "aux_displacement",
        vec![mode, aux],
        vec![theta],
        vec![lc_gate(aux, mode, theta, 0.0, QrOrder::Forward)],
    )
}

/// Fails when `ε <= 10 g`, outside the dispersive regime.
pub fn check_dispersive(epsilon: f64, g: f64) -> Result<()> {
    if epsilon <= 10.0 * g.abs() {
        Err(Error::DispersiveRegimeViolated { epsilon, limit: 10.0 * g.abs() })
    } else {
        Ok(())
    }
}

/// Mode rotation `exp(-i angle n)` from detuned JC evolution of an auxiliary qubit in `|0⟩`:
/// symmetric Trotterisation of `ε σ_z/2 + g H_JC` for a time `angle ε / g²`.
/// Logs a warning outside the dispersive regime.
pub fn aux_rotation(mode: usize, aux: usize, angle: f64, epsilon: f64, g: f64, n_trotter: usize) -> Gate {
    if let Err(e) = check_dispersive(epsilon, g) {
        log::warn!("aux_rotation: {e}");
    }
    let n = n_trotter.max(1);
    let t_aux = angle * epsilon / (g * g);
    let dt = t_aux / n as f64;
    let mut body = Vec::with_capacity(3 * n);
    for _ in 0..n {
        body.push(rz(aux, epsilon * dt / 2.0));
        body.push(jc_gate(aux, mode, g * dt));
        body.push(rz(aux, epsilon * dt / 2.0));
    }
    Gate::composite("aux_rotation", vec![mode, aux], vec![angle, epsilon, g, n as f64], body)
}

fn pauli_n_rotation(aux: usize, mode: usize, axis: char, beta: f64) -> Vec<Gate> {
    match axis {
        'x' => vec![hadamard(aux), dispersive(aux, mode, beta), hadamard(aux)],
        _ => vec![sdg_gate(aux), hadamard(aux), dispersive(aux, mode, beta), hadamard(aux), s_gate(aux)],
    }
}

/// Kerr gate `exp(-i angle σ_z^aux n²)` to leading order, from the group commutator
/// `e^A e^B e^{-A} e^{-B}` with `A = i√(angle/2) X n`, `B = i√(angle/2) Y n`.
pub fn aux_kerr(mode: usize, aux: usize, angle: f64) -> Gate {
    let alpha = -(angle.abs() / 2.0).sqrt() * angle.signum();
    let alpha_b = -(angle.abs() / 2.0).sqrt();
    let mut body = Vec::new();
    body.extend(pauli_n_rotation(aux, mode, 'y', -alpha_b));
    body.extend(pauli_n_rotation(aux, mode, 'x', -alpha));
    body.extend(pauli_n_rotation(aux, mode, 'y', alpha_b));
    body.extend(pauli_n_rotation(aux, mode, 'x', alpha));
    Gate::composite("aux_kerr", vec![mode, aux], vec![angle], body)
}
