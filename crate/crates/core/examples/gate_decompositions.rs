//! Composite resonator-qubit gates built from JC primitives, compared with the
//! exponential of their target generators.
//!
//! Run with `cargo run --example gate_decompositions`.

use rqsim::gateset::{
    circuit_unitary, gate_unitary, lc_gate, qr_gate, quadratic_coupling_circuit, targets, Circuit, QrOrder,
    QuadraticKind,
};
use rqsim::hilbert::exact_propagator;
use rqsim::linalg::phase_aligned_distance;
use rqsim::{Register, SiteKind};

fn main() -> rqsim::Result<()> {
    let d = 6;
    let reg = Register::new(vec![SiteKind::Qubit, SiteKind::Mode(d)])?;
    println!("single-qubit couplings, d = {d}");
    println!("{:>8} {:>12} {:>12}", "theta", "QR defect", "LC defect");
    for theta in [0.2, 0.1, 0.05, 0.025] {
        let qr = gate_unitary(&qr_gate(0, 1, theta, 0.3, QrOrder::Forward), &reg)?;
        let lc = gate_unitary(&lc_gate(0, 1, theta, 0.3, QrOrder::Forward), &reg)?;
        let qr_target = exact_propagator(&targets::qr(0, 1, 0.3), &reg, theta)?;
        let lc_target = exact_propagator(&targets::lc(0, 1, 0.3), &reg, theta)?;
        println!(
            "{theta:>8} {:>12.3e} {:>12.3e}",
            phase_aligned_distance(&qr, &qr_target),
            phase_aligned_distance(&lc, &lc_target)
        );
    }

    // Forward then backward halves cancel the leading error.
    let theta = 0.1;
    let sym = Circuit::from_gates(
        "qr_symmetric",
        vec![qr_gate(0, 1, theta / 2.0, 0.0, QrOrder::Forward), qr_gate(0, 1, theta / 2.0, 0.0, QrOrder::Backward)],
    );
    let target = exact_propagator(&targets::qr(0, 1, 0.0), &reg, theta)?;
    println!("symmetric QR defect at theta = {theta}: {:.3e}", phase_aligned_distance(&circuit_unitary(&sym, &reg)?, &target));

    let reg2 = Register::new(vec![SiteKind::Qubit, SiteKind::Qubit, SiteKind::Mode(4)])?;
    println!("\ntwo-qubit couplings, d = 4, theta = 0.05");
    for kind in [QuadraticKind::XX, QuadraticKind::ZZ, QuadraticKind::HoppingReal, QuadraticKind::HoppingChiral] {
        let g = quadratic_coupling_circuit(kind, 0, 1, 2, 0.05, 0.0, QrOrder::Forward)?;
        let target = exact_propagator(&targets::quadratic(kind, 0, 1, 2, 0.0), &reg2, 0.05)?;
        println!("{kind:?}: {} primitives, defect {:.3e}", g.flatten().len(), phase_aligned_distance(&gate_unitary(&g, &reg2)?, &target));
    }
    Ok(())
}
