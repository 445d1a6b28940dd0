//! Gate applications and circuits, with a JSON form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::Register;

use super::gates::Primitive;

/// One gate application. Composite gates carry their expansion in `body`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gate {
    pub name: String,
    pub sites: Vec<usize>,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub composite: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub body: Vec<Gate>,
}

impl Gate {
    pub fn primitive(name: &str, sites: Vec<usize>, params: Vec<f64>) -> Self {
        Self { name: name.to_string(), sites, params, composite: false, body: Vec::new() }
    }

    pub fn composite(name: &str, sites: Vec<usize>, params: Vec<f64>, body: Vec<Gate>) -> Self {
        Self { name: name.to_string(), sites, params, composite: true, body }
    }

    /// Appends the primitive gates of this gate to `out`, in time order.
    pub fn flatten_into(&self, out: &mut Vec<Gate>) {
        if self.composite {
            for g in &self.body {
                g.flatten_into(out);
            }
        } else {
            out.push(self.clone());
        }
    }

    pub fn flatten(&self) -> Vec<Gate> {
        let mut v = Vec::new();
        self.flatten_into(&mut v);
        v
    }

    /// Checks the gate (and its expansion) against a register.
    pub fn check(&self, reg: &Register) -> Result<()> {
        for &s in &self.sites {
            reg.kind(s)?;
        }
        if self.composite {
            if self.body.is_empty() && !self.sites.is_empty() && self.name != "identity" {
                log::debug!("composite gate {} has an empty body", self.name);
            }
            for g in &self.body {
                g.check(reg)?;
            }
            Ok(())
        } else {
            Primitive::parse(self)?.check_sites(self, reg)
        }
    }

    pub fn is_primitive_named(&self, name: &str) -> bool {
        !self.composite && self.name == name
    }
}

/// Step metadata for one Trotter step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterMeta {
    pub step: usize,
    pub tau: f64,
}

/// Time-ordered gate list.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Circuit {
    #[serde(default)]
    pub name: String,
    pub gates: Vec<Gate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trotter: Option<TrotterMeta>,
    /// Logical-to-physical site map after the circuit, when routing moved sites.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    /// Virtual Z frames left by phase folding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<VirtualFrame>,
}

/// Frames of a folded circuit: the true unitary is `D_end · E · D_start†` where `E` is
/// the gate list, `D_start = Π exp(-iβ_k n_k)` and `D_end = Π R_z(F_q) · D_start`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirtualFrame {
    /// `(qubit site, F_q)` at the end.
    pub qubits: Vec<(usize, f64)>,
    /// `(mode site, β_k)`, constant through the circuit.
    pub modes: Vec<(usize, f64)>,
}

impl Circuit {
    pub fn new(name: &str) -> Self {
        Self { name: name.to_string(), ..Default::default() }
    }

    pub fn from_gates(name: &str, gates: Vec<Gate>) -> Self {
        Self { name: name.to_string(), gates, ..Default::default() }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) {
        self.gates.extend(gates);
    }

    pub fn append(&mut self, other: &Circuit) {
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// All primitive gates, in time order.
    pub fn flatten(&self) -> Vec<Gate> {
        let mut v = Vec::new();
        for g in &self.gates {
            g.flatten_into(&mut v);
        }
        v
    }

    pub fn flattened(&self) -> Circuit {
        Circuit { gates: self.flatten(), ..self.clone() }
    }

    pub fn check(&self, reg: &Register) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.check(reg))
    }

    /// Names of the primitive gates, in time order.
    pub fn gate_names(&self) -> Vec<String> {
        self.flatten().into_iter().map(|g| g.name).collect()
    }

    /// Inserts a `coherent_error` gate after every `jc` primitive.
    pub fn with_coherent_error(&self, chi_t: f64, kerr_t: f64) -> Circuit {
        let mut gates = Vec::new();
        for g in self.flatten() {
            let is_jc = g.is_primitive_named("jc");
            let sites = g.sites.clone();
            gates.push(g);
            if is_jc {
                gates.push(super::gates::coherent_error_gate(sites[0], sites[1], chi_t, kerr_t));
            }
        }
        Circuit { gates, ..self.clone() }
    }

    /// Equivalent circuit with the virtual frames applied as explicit gates.
    pub fn with_frame_gates(&self) -> Circuit {
        let Some(f) = &self.frame else { return self.clone() };
        let mut gates: Vec<Gate> =
            f.modes.iter().filter(|m| m.1 != 0.0).map(|&(k, b)| super::gates::mode_phase(k, -b)).collect();
        gates.extend(self.flatten());
        gates.extend(f.qubits.iter().filter(|q| q.1 != 0.0).map(|&(q, a)| super::gates::rz(q, a)));
        gates.extend(f.modes.iter().filter(|m| m.1 != 0.0).map(|&(k, b)| super::gates::mode_phase(k, b)));
        Circuit { gates, frame: None, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialisation cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("circuit JSON: {e}")))
    }
}
