//! Coherent JC-gate errors `exp(-i χ_t σ_z n / 2)` in the QR construction and their
//! cancellation by the X conjugation of every second JC gate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateset::{circuit_unitary, coherent_error_gate, jc_gate, qr_gate, x, Circuit, QrOrder};
use crate::hilbert::{Register, SiteKind};
use crate::linalg;

use super::fit_power_law;

/// Operator-norm distance between the QR gate with injected coherent errors and the
/// error-free gate.
///
/// With `mitigated`, an error follows every JC primitive, so the X gates around the
/// second JC flip the sign of its error. Otherwise the anti-JC half is treated as one
/// native gate whose error is not conjugated: `E·AJC·E·JC`.
pub fn coherent_error_defect(theta: f64, chi_t: f64, d: usize, mitigated: bool) -> Result<f64> {
    let reg = Register::new(vec![SiteKind::Qubit, SiteKind::Mode(d)])?;
    let ideal = Circuit::from_gates("qr", vec![qr_gate(0, 1, theta, 0.0, QrOrder::Forward)]);
    let noisy = if mitigated {
        ideal.with_coherent_error(chi_t, 0.0)
    } else {
        Circuit::from_gates(
            "qr-unmitigated",
            vec![
                jc_gate(0, 1, theta),
                coherent_error_gate(0, 1, chi_t, 0.0),
                x(0),
                jc_gate(0, 1, theta),
                x(0),
                coherent_error_gate(0, 1, chi_t, 0.0),
            ],
        )
    };
    let a = circuit_unitary(&ideal, &reg)?;
    let b = circuit_unitary(&noisy, &reg)?;
    Ok(linalg::spectral_norm(&(a - b)))
}

/// Defect exponents under a common shrinking of the gate time: `θ` and `χ_t` both
/// scale with `t_gate`, at fixed ratio `theta / chi_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentErrorScaling {
    pub chi_t: Vec<f64>,
    pub theta: Vec<f64>,
    pub mitigated: Vec<f64>,
    pub unmitigated: Vec<f64>,
    pub mitigated_exponent: f64,
    pub unmitigated_exponent: f64,
}

pub fn coherent_error_scaling(chi_ts: &[f64], theta_per_chi: f64, d: usize) -> Result<CoherentErrorScaling> {
    if chi_ts.len() < 2 {
        return Err(Error::InvalidArgument("a scaling fit needs at least two values of chi_t".into()));
    }
    let theta: Vec<f64> = chi_ts.iter().map(|c| c * theta_per_chi).collect();
    let mut mitigated = Vec::new();
    let mut unmitigated = Vec::new();
    for (&c, &t) in chi_ts.iter().zip(&theta) {
        mitigated.push(coherent_error_defect(t, c, d, true)?);
        unmitigated.push(coherent_error_defect(t, c, d, false)?);
    }
    let (mitigated_exponent, _) = fit_power_law(chi_ts, &mitigated);
    let (unmitigated_exponent, _) = fit_power_law(chi_ts, &unmitigated);
    Ok(CoherentErrorScaling {
        chi_t: chi_ts.to_vec(),
        theta,
        mitigated,
        unmitigated,
        mitigated_exponent,
        unmitigated_exponent,
    })
}
