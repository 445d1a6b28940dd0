//! Circuit metrics and bosonic encoding costs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateset::{Circuit, Gate};
use crate::linalg::{c, C64, ZERO};

/// Gates that change frames or model errors and take no hardware time.
const VIRTUAL: [&str; 3] = ["rz", "mode_phase", "coherent_error"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    /// ASAP depth over non-virtual primitives.
    pub depth: usize,
    /// JC primitives per mode site in one Trotter step (`D_k`).
    pub d_k: BTreeMap<usize, usize>,
    /// Qubit-qubit entangling gates.
    pub entangling: usize,
    pub total_gates: usize,
    pub n_steps: usize,
}

impl CircuitMetrics {
    pub fn d_max(&self) -> usize {
        self.d_k.values().copied().max().unwrap_or(0)
    }
}

fn is_step(g: &Gate) -> bool {
    g.composite && g.name == "trotter_step"
}

pub fn metrics(circuit: &Circuit) -> CircuitMetrics {
    let flat = circuit.flatten();
    let mut level: BTreeMap<usize, usize> = BTreeMap::new();
    let mut depth = 0;
    let mut jc: BTreeMap<usize, usize> = BTreeMap::new();
    let mut entangling = 0;
    let mut total = 0;
    for g in &flat {
        if VIRTUAL.contains(&g.name.as_str()) {
            continue;
        }
        total += 1;
        let l = 1 + g.sites.iter().map(|s| level.get(s).copied().unwrap_or(0)).max().unwrap_or(0);
        for &s in &g.sites {
            level.insert(s, l);
        }
        depth = depth.max(l);
        match g.name.as_str() {
            "jc" => *jc.entry(g.sites[1]).or_default() += 1,
            "cz" | "cnot" | "swap" | "fswap" => entangling += 1,
            _ => {}
        }
    }
    let n_steps = circuit.gates.iter().filter(|g| is_step(g)).count().max(usize::from(!flat.is_empty()));
    let d_k = jc.into_iter().map(|(k, n)| (k, n / n_steps.max(1))).collect();
    CircuitMetrics { depth, d_k, entangling, total_gates: total, n_steps }
}

/// Distinct JC angles per mode index.
pub fn calibration_table(circuit: &Circuit, n_qubits: usize, n_modes: usize) -> Vec<(usize, Vec<f64>)> {
    let mut table: Vec<Vec<f64>> = vec![vec![]; n_modes];
    for g in circuit.flatten() {
        if g.name == "jc" {
            let k = g.sites[1] - n_qubits;
            let a = (g.params[0].abs() * 1e12).round() / 1e12;
            if !table[k].contains(&a) {
                table[k].push(a);
            }
        }
    }
    table
        .into_iter()
        .enumerate()
        .map(|(k, mut v)| {
            v.sort_by(f64::total_cmp);
            (k, v)
        })
        .collect()
}

/// Metrics with the calibration table, exportable as JSON or CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub name: String,
    pub metrics: CircuitMetrics,
    pub calibration: Vec<(usize, Vec<f64>)>,
}

impl MetricsReport {
    pub fn new(name: &str, circuit: &Circuit, n_qubits: usize, n_modes: usize) -> Self {
        Self {
            name: name.to_string(),
            metrics: metrics(circuit),
            calibration: calibration_table(circuit, n_qubits, n_modes),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialisation cannot fail")
    }

    /// `key,value` rows.
    pub fn to_csv(&self) -> String {
        let m = &self.metrics;
        let mut s = String::from("key,value\n");
        let _ = writeln!(s, "name,{}", self.name);
        let _ = writeln!(s, "depth,{}", m.depth);
        let _ = writeln!(s, "entangling,{}", m.entangling);
        let _ = writeln!(s, "total_gates,{}", m.total_gates);
        let _ = writeln!(s, "n_steps,{}", m.n_steps);
        for (k, n) in &m.d_k {
            let _ = writeln!(s, "d_k[site {k}],{n}");
        }
        for (k, angles) in &self.calibration {
            let list: Vec<String> = angles.iter().map(|a| format!("{a:.12}")).collect();
            let _ = writeln!(s, "jc_angles[mode {k}],{}", list.join(" "));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Encoding {
    ResonatorQubit,
    Unary,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingCost {
    pub qubits: usize,
    pub resonators: usize,
    /// Entangling gates for `exp(iφ σ_x (b† + b))`.
    pub entangling: usize,
    /// Pauli strings in the encoded `b† + b`.
    pub pauli_strings: usize,
}

/// Growth exponent of `values` sampled at increasing `sizes`, read from two finite
/// differences: `p = 1 + d ln Δ / d ln n` at the difference midpoints. Each difference
/// spans half the samples, so a period-two alternation in the increments averages
/// out. A sequence whose last difference vanishes has exponent 0.
pub fn scaling_exponent(sizes: &[usize], values: &[usize]) -> Result<f64> {
    if sizes.len() != values.len() || sizes.len() < 3 {
        return Err(Error::InvalidArgument("scaling_exponent needs at least three (size, value) points".into()));
    }
    let n = sizes.len();
    let s = n / 2;
    let diff = |k: usize| (values[k + s] as f64 - values[k] as f64) / (sizes[k + s] - sizes[k]) as f64;
    let mid = |k: usize| (sizes[k] + sizes[k + s]) as f64 / 2.0;
    let (last, prev) = (diff(n - 1 - s), diff(n - 2 - s));
    if last.abs() <= 1e-9 * values[n - 1] as f64 {
        return Ok(0.0);
    }
    if last <= 0.0 || prev <= 0.0 {
        return Err(Error::InvalidArgument(format!("values {values:?} are not increasing")));
    }
    Ok(1.0 + (last / prev).ln() / (mid(n - 1 - s) / mid(n - 2 - s)).ln())
}

/// Pauli strings (as `(x_mask, z_mask)` with their coefficients) of a `2^m`-dim matrix
/// given by a sparse element function.
fn pauli_decomposition(m: usize, elems: &[(usize, usize, f64)]) -> Vec<(usize, usize, C64)> {
    let dim = 1usize << m;
    let mut out = Vec::new();
    for x in 0..dim {
        for z in 0..dim {
            // Tr(P B) with P = Π X^{x_i} Z^{z_i} up to the Y phase; only weight matters.
            let mut tr = ZERO;
            for &(row, col, v) in elems {
                if row ^ col != x {
                    continue;
                }
                // ⟨col| X^x Z^z |row⟩ = (-1)^{popcount(z & row)}.
                let sign = if (z & row).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                tr += c(v * sign, 0.0);
            }
            let coeff = tr / dim as f64;
            if coeff.norm() > 1e-12 {
                out.push((x, z, coeff));
            }
        }
    }
    out
}

/// Hardware components and entangling gates for one spin-boson coupling with `d`
/// boson levels. Pauli strings of length `p` cost `2(p - 1)` CNOTs; the spin qubit
/// lengthens every string by one.
pub fn encoding_cost(d: usize, code: Encoding) -> Result<EncodingCost> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("encoding needs d >= 2, got {d}")));
    }
    let cost = |strings: &[usize]| strings.iter().map(|w| 2 * w).sum::<usize>();
    Ok(match code {
        Encoding::ResonatorQubit => EncodingCost { qubits: 1, resonators: 1, entangling: 2, pauli_strings: 0 },
        Encoding::Unary => {
            // √(n+1)(σ_+^{n+1} σ_-^n + h.c.) = √(n+1)(X X + Y Y)/2 on qubits n, n+1.
            let weights: Vec<usize> = (0..d - 1).flat_map(|_| [2, 2]).collect();
            EncodingCost { qubits: 1 + d, resonators: 0, entangling: cost(&weights), pauli_strings: weights.len() }
        }
        Encoding::Binary => {
            let m = usize::BITS as usize - (d - 1).leading_zeros() as usize;
            let mut elems = Vec::new();
            for n in 0..d - 1 {
                let v = ((n + 1) as f64).sqrt();
                elems.push((n + 1, n, v));
                elems.push((n, n + 1, v));
            }
            let strings = pauli_decomposition(m, &elems);
            let weights: Vec<usize> = strings.iter().map(|&(x, z, _)| (x | z).count_ones() as usize).collect();
            EncodingCost { qubits: 1 + m, resonators: 0, entangling: cost(&weights), pauli_strings: weights.len() }
        }
    })
}
