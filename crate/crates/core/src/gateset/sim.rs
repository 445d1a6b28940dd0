//! Exact application of circuits to states, density matrices and unitaries.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::Result;
use crate::hilbert::{DensityMatrix, LocalAction, QuantumState, Register};
use crate::linalg::{self, CMatrix};

use super::circuit::{Circuit, Gate};
use super::gates::Primitive;

type Key = (String, Vec<u64>, Vec<usize>);

/// Circuit simulator bound to a register, with a memo of local gate actions.
pub struct Simulator {
    register: Register,
    cache: Mutex<HashMap<Key, Arc<LocalAction>>>,
}

impl Simulator {
    pub fn new(register: &Register) -> Self {
        Self { register: register.clone(), cache: Mutex::new(HashMap::new()) }
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    /// Local matrix of a primitive gate, first listed site fastest.
    pub fn local_matrix(&self, g: &Gate) -> Result<CMatrix> {
        gate_local_matrix(g, &self.register)
    }

    pub fn action(&self, g: &Gate) -> Result<Arc<LocalAction>> {
        let key = (g.name.clone(), g.params.iter().map(|p| p.to_bits()).collect(), g.sites.clone());
        if let Some(a) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(a.clone());
        }
        let m = self.local_matrix(g)?;
        let a = Arc::new(LocalAction::new(&self.register, &g.sites, &m)?);
        let mut cache = self.cache.lock().expect("cache poisoned");
        if cache.len() > 4096 {
            cache.clear();
        }
        cache.insert(key, a.clone());
        Ok(a)
    }

    pub fn apply_state(&self, circuit: &Circuit, psi: &mut QuantumState) -> Result<()> {
        for g in circuit.flatten() {
            self.action(&g)?.apply_vec(psi.amplitudes.as_mut_slice());
        }
        Ok(())
    }

    pub fn apply_gate_state(&self, g: &Gate, psi: &mut QuantumState) -> Result<()> {
        for p in g.flatten() {
            self.action(&p)?.apply_vec(psi.amplitudes.as_mut_slice());
        }
        Ok(())
    }

    pub fn apply_density(&self, circuit: &Circuit, rho: &mut DensityMatrix) -> Result<()> {
        for g in circuit.flatten() {
            self.action(&g)?.conjugate_hermitian(&mut rho.elements);
        }
        Ok(())
    }

    /// Full unitary of a circuit.
    pub fn unitary(&self, circuit: &Circuit) -> Result<CMatrix> {
        let mut u = linalg::identity(self.register.dim());
        for g in circuit.flatten() {
            self.action(&g)?.apply_columns(&mut u);
        }
        Ok(u)
    }

    pub fn gate_unitary(&self, g: &Gate) -> Result<CMatrix> {
        self.unitary(&Circuit::from_gates("", vec![g.clone()]))
    }
}

pub fn gate_local_matrix(g: &Gate, reg: &Register) -> Result<CMatrix> {
    let p = Primitive::parse(g)?;
    p.check_sites(g, reg)?;
    let mode_dim = g.sites.iter().find(|&&s| reg.is_mode(s)).map(|&s| reg.site_dim(s)).unwrap_or(2);
    Ok(p.matrix(mode_dim))
}

/// Unitary of a circuit on `reg`.
pub fn circuit_unitary(circuit: &Circuit, reg: &Register) -> Result<CMatrix> {
    circuit.check(reg)?;
    Simulator::new(reg).unitary(circuit)
}

pub fn gate_unitary(g: &Gate, reg: &Register) -> Result<CMatrix> {
    g.check(reg)?;
    Simulator::new(reg).gate_unitary(g)
}
