//! Virtual-Z folding: single-qubit Z rotations are tracked as frames and absorbed
//! into the phases of π pulses (PRX gates), so that JC gates run unphased.
//!
//! A frame `D = Π_q R_z(F_q) Π_k exp(-iβ_k n_k)` is carried along. A JC gate on
//! `(q, k)` can be emitted bare when `F_q + β_k ≡ 0`. The mode frame `β_k` is fixed
//! the first time mode `k` is used; the qubit frame is steered by re-phasing the last
//! π pulse on that qubit, and only when no such pulse is available an explicit `rz` is
//! emitted.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::gateset::{prx, rz, Circuit, Gate, VirtualFrame};

/// Composite gates that are diagonal and may be passed through frames unchanged.
const DIAGONAL_BLOCKS: [&str; 1] = ["zz"];

#[derive(Clone, Copy)]
struct Pending {
    idx: usize,
    f_in: f64,
    g: f64,
    phi: f64,
}

struct Folder {
    n_qubits: usize,
    f: Vec<f64>,
    beta: Vec<Option<f64>>,
    pending: Vec<Option<Pending>>,
    out: Vec<Gate>,
    explicit_rz: usize,
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

impl Folder {
    fn is_qubit(&self, s: usize) -> bool {
        s < self.n_qubits
    }

    fn set_frame(&mut self, q: usize, target: f64) {
        let delta = wrap(target - self.f[q]);
        if delta.abs() < 1e-13 {
            return;
        }
        if let Some(p) = self.pending[q].as_mut() {
            p.g += delta;
            self.out[p.idx].params[1] = wrap(p.phi - (p.f_in + p.g) / 2.0);
        } else {
            self.out.push(rz(q, -delta));
            self.explicit_rz += 1;
        }
        self.f[q] += delta;
    }

    fn pi_pulse(&mut self, q: usize, phi: f64) {
        let f = self.f[q];
        self.out.push(prx(q, PI, wrap(phi - f)));
        self.pending[q] = Some(Pending { idx: self.out.len() - 1, f_in: f, g: f, phi });
    }

    fn gate(&mut self, g: Gate) {
        let s = g.sites.clone();
        match g.name.as_str() {
            "rz" => self.f[s[0]] += g.params[0],
            "s" => self.f[s[0]] += FRAC_PI_2,
            "sdg" => self.f[s[0]] -= FRAC_PI_2,
            "x" => self.pi_pulse(s[0], 0.0),
            "y" => self.pi_pulse(s[0], FRAC_PI_2),
            "prx" if (g.params[0] - PI).abs() < 1e-15 => self.pi_pulse(s[0], g.params[1]),
            "prx" => {
                let q = s[0];
                self.out.push(prx(q, g.params[0], g.params[1] - self.f[q]));
                self.pending[q] = None;
            }
            "cz" | "coherent_error" | "dispersive" | "mode_phase" => self.out.push(g),
            "swap" | "fswap" => {
                self.f.swap(s[0], s[1]);
                self.pending.swap(s[0], s[1]);
                self.out.push(g);
            }
            "cnot" => {
                self.set_frame(s[1], 0.0);
                self.pending[s[1]] = None;
                self.out.push(g);
            }
            "jc" => {
                let (q, k) = (s[0], s[1] - self.n_qubits);
                match self.beta[k] {
                    None => self.beta[k] = Some(-self.f[q]),
                    Some(b) => self.set_frame(q, -b),
                }
                self.pending[q] = None;
                self.out.push(g);
            }
            _ => {
                let qubits: Vec<usize> = s.iter().copied().filter(|&q| self.is_qubit(q)).collect();
                for q in qubits {
                    self.set_frame(q, 0.0);
                    self.pending[q] = None;
                }
                self.out.push(g);
            }
        }
    }

    fn walk(&mut self, g: &Gate) {
        if g.composite && DIAGONAL_BLOCKS.contains(&g.name.as_str()) {
            self.out.extend(g.flatten());
        } else if g.composite {
            for b in &g.body {
                self.walk(b);
            }
        } else {
            self.gate(g.clone());
        }
    }
}

/// Folds Z rotations of `c` into frames and π-pulse phases. Sites below `n_qubits`
/// are qubits, the rest modes. Top-level gates stay grouped: a composite at the top
/// level is returned as a composite of its folded primitives.
pub fn fold_virtual_z(c: &Circuit, n_qubits: usize, n_modes: usize) -> (Circuit, usize) {
    let mut f = Folder {
        n_qubits,
        f: vec![0.0; n_qubits],
        beta: vec![None; n_modes],
        pending: vec![None; n_qubits],
        out: Vec::new(),
        explicit_rz: 0,
    };
    let mut bounds = Vec::new();
    for g in &c.gates {
        let start = f.out.len();
        f.walk(g);
        bounds.push((start, f.out.len()));
    }
    let mut gates = Vec::new();
    for (g, (a, b)) in c.gates.iter().zip(bounds) {
        let body = f.out[a..b].to_vec();
        if g.composite {
            gates.push(Gate::composite(&g.name, g.sites.clone(), g.params.clone(), body));
        } else {
            gates.extend(body);
        }
    }
    let frame = VirtualFrame {
        qubits: f.f.iter().enumerate().map(|(q, &a)| (q, wrap(a))).collect(),
        modes: f.beta.iter().enumerate().map(|(k, b)| (n_qubits + k, b.map(wrap).unwrap_or(0.0))).collect(),
    };
    (Circuit { gates, frame: Some(frame), ..c.clone() }, f.explicit_rz)
}
