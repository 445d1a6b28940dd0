//! Gate primitives, composite decompositions and circuit simulation.

pub mod circuit;
pub mod gates;
pub mod sim;

pub use circuit::{Circuit, Gate, TrotterMeta, VirtualFrame};
pub use gates::*;
pub use sim::{circuit_unitary, gate_unitary, Simulator};

use crate::hilbert::{OpKind, OperatorSum};
use crate::linalg::cis;

/// Target generators of the decomposed gates, each with unit coupling.
pub mod targets {
    use super::*;

    /// `b† e^{iφ} + b e^{-iφ}` on `mode` times an optional qubit operator.
    fn quadrature(prefix: &[(OpKind, usize)], mode: usize, phi: f64) -> OperatorSum {
        let mut a: Vec<(OpKind, usize)> = prefix.to_vec();
        a.push((OpKind::Create, mode));
        let mut b: Vec<(OpKind, usize)> = prefix.to_vec();
        b.push((OpKind::Annihilate, mode));
        OperatorSum::product(cis(phi), &a) + OperatorSum::product(cis(-phi), &b)
    }

    /// `σ_- b† e^{iφ} + σ_+ b e^{-iφ}`.
    pub fn jc(qubit: usize, mode: usize, phi: f64) -> OperatorSum {
        OperatorSum::product(cis(phi), &[(OpKind::SigmaMinus, qubit), (OpKind::Create, mode)])
            + OperatorSum::product(cis(-phi), &[(OpKind::SigmaPlus, qubit), (OpKind::Annihilate, mode)])
    }

    /// `σ_+ b† e^{iφ} + σ_- b e^{-iφ}`, the counter-rotating part.
    pub fn anti_jc(qubit: usize, mode: usize, phi: f64) -> OperatorSum {
        OperatorSum::product(cis(phi), &[(OpKind::SigmaPlus, qubit), (OpKind::Create, mode)])
            + OperatorSum::product(cis(-phi), &[(OpKind::SigmaMinus, qubit), (OpKind::Annihilate, mode)])
    }

    pub fn qr(qubit: usize, mode: usize, phi: f64) -> OperatorSum {
        quadrature(&[(OpKind::SigmaX, qubit)], mode, phi)
    }

    pub fn lc(qubit: usize, mode: usize, phi: f64) -> OperatorSum {
        quadrature(&[(OpKind::SigmaZ, qubit)], mode, phi)
    }

    pub fn quadratic(kind: QuadraticKind, q1: usize, q2: usize, mode: usize, phi: f64) -> OperatorSum {
        match kind {
            QuadraticKind::XX => quadrature(&[(OpKind::SigmaX, q1), (OpKind::SigmaX, q2)], mode, phi),
            QuadraticKind::ZZ => quadrature(&[(OpKind::SigmaZ, q1), (OpKind::SigmaZ, q2)], mode, phi),
            QuadraticKind::HoppingReal => {
                quadrature(&[(OpKind::SigmaPlus, q1), (OpKind::SigmaMinus, q2)], mode, phi)
                    + quadrature(&[(OpKind::SigmaMinus, q1), (OpKind::SigmaPlus, q2)], mode, phi)
            }
            QuadraticKind::HoppingChiral => {
                OperatorSum::product(
                    cis(phi),
                    &[(OpKind::SigmaPlus, q1), (OpKind::SigmaMinus, q2), (OpKind::Create, mode)],
                ) + OperatorSum::product(
                    cis(-phi),
                    &[(OpKind::SigmaMinus, q1), (OpKind::SigmaPlus, q2), (OpKind::Annihilate, mode)],
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{exact_propagator, QuantumState, Register, SiteKind};
    use crate::linalg::{self, c, max_abs_diff, phase_aligned_distance, CMatrix, ONE};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn qm(d: usize) -> Register {
        Register::new(vec![SiteKind::Qubit, SiteKind::Mode(d)]).unwrap()
    }

    fn qqm(d: usize) -> Register {
        Register::new(vec![SiteKind::Qubit, SiteKind::Qubit, SiteKind::Mode(d)]).unwrap()
    }

    fn u(g: &Gate, r: &Register) -> CMatrix {
        gate_unitary(g, r).unwrap()
    }

    fn fit_exponent(xs: &[f64], ys: &[f64]) -> f64 {
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let n = xs.len() as f64;
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
        num / den
    }

    #[test]
    fn jc_examples() {
        let r = qm(5);
        assert!(max_abs_diff(&u(&jc_gate(0, 1, 0.0), &r), &linalg::identity(10)) < 1e-15);
        let m = u(&jc_gate(0, 1, FRAC_PI_2), &r);
        let i10 = r.basis_index(&[1, 0]).unwrap();
        let i01 = r.basis_index(&[0, 1]).unwrap();
        assert!((m[(i01, i10)] - c(0.0, -1.0)).norm() < 1e-12);
        let i12 = r.basis_index(&[1, 2]).unwrap();
        let i03 = r.basis_index(&[0, 3]).unwrap();
        let a = 3f64.sqrt() * FRAC_PI_2;
        assert!((m[(i12, i12)] - c(a.cos(), 0.0)).norm() < 1e-12);
        assert!((m[(i03, i12)] - c(0.0, -a.sin())).norm() < 1e-12);
    }

    #[test]
    fn jc_site_kinds_checked() {
        let r = qm(3);
        assert!(matches!(jc_gate(1, 0, 0.3).check(&r), Err(crate::Error::KindMismatch { .. })));
        assert!(matches!(prx(1, 0.3, 0.0).check(&r), Err(crate::Error::KindMismatch { .. })));
    }

    #[test]
    fn jc_manifold_rotation_angles() {
        let r = qm(6);
        for n in 1..=3usize {
            let theta = 0.37;
            let m = u(&jc_gate(0, 1, theta), &r);
            let a = r.basis_index(&[1, n - 1]).unwrap();
            let b = r.basis_index(&[0, n]).unwrap();
            let angle = m[(b, a)].im.atan2(m[(a, a)].re).abs();
            assert!((angle - (n as f64).sqrt() * theta).abs() < 1e-9);
        }
    }

    #[test]
    fn phased_jc_examples() {
        let r = qm(4);
        let theta = 0.41;
        assert!(max_abs_diff(&u(&phased_jc(0, 1, theta, 0.0), &r), &u(&jc_gate(0, 1, theta), &r)) < 1e-15);
        assert!(max_abs_diff(&u(&phased_jc(0, 1, theta, PI), &r), &u(&jc_gate(0, 1, -theta), &r)) < 1e-12);
        let phi = 1.0 * 3.0 * 0.2;
        let exact = exact_propagator(&targets::jc(0, 1, phi), &r, theta).unwrap();
        assert!(max_abs_diff(&u(&phased_jc(0, 1, theta, phi), &r), &exact) < 1e-12);
    }

    #[test]
    fn qr_examples() {
        let r = qm(6);
        for order in [QrOrder::Forward, QrOrder::Backward] {
            assert!(max_abs_diff(&u(&qr_gate(0, 1, 0.0, 0.0, order), &r), &linalg::identity(12)) < 1e-15);
        }
        let exact = exact_propagator(&targets::qr(0, 1, 0.0), &r, 0.05).unwrap();
        let m = u(&qr_gate(0, 1, 0.05, 0.0, QrOrder::Forward), &r);
        let psi0 = QuantumState::ground(&r);
        let a = &exact * &psi0.amplitudes;
        let b = &m * &psi0.amplitudes;
        assert!(a.dotc(&b).norm_sqr() >= 1.0 - 1e-4);
    }

    #[test]
    fn lc_conditional_sign() {
        let r = qm(6);
        let theta = 0.05;
        let m = u(&lc_gate(0, 1, theta, 0.0, QrOrder::Forward), &r);
        let exact = exact_propagator(&targets::lc(0, 1, 0.0), &r, theta).unwrap();
        let dist = phase_aligned_distance(&m, &exact);
        assert!(dist < 0.03, "lc defect {dist}");
        // Qubit in |0⟩: ⟨b⟩ = -iθ; qubit in |1⟩: +iθ.
        for (q, sign) in [(0usize, 1.0), (1, -1.0)] {
            let mut psi = QuantumState::basis(&r, &[q, 0]).unwrap();
            psi.apply_matrix(&m);
            let b = psi.expectation(&OperatorSum::op(OpKind::Annihilate, 1)).unwrap();
            assert!((b - c(0.0, -sign * theta)).norm() < 1e-3, "q={q} b={b}");
        }
        let rq = Register::new(vec![SiteKind::Qubit]).unwrap();
        let hxh = u(&hadamard(0), &rq) * OpKind::SigmaX.matrix(2) * u(&hadamard(0), &rq);
        assert!(max_abs_diff(&hxh, &OpKind::SigmaZ.matrix(2)) < 1e-15);
    }

    fn defect(g: impl Fn(f64) -> Gate, target: &OperatorSum, r: &Register, theta: f64) -> f64 {
        let exact = exact_propagator(target, r, theta).unwrap();
        phase_aligned_distance(&u(&g(theta), r), &exact)
    }

    #[test]
    fn decompositions_converge_quadratically() {
        let thetas = [0.2, 0.1, 0.05, 0.025];
        let r = qm(6);
        let rr = qqm(4);
        let cases: Vec<(Box<dyn Fn(f64) -> Gate>, OperatorSum, &Register)> = vec![
            (Box::new(|t| qr_gate(0, 1, t, 0.3, QrOrder::Forward)), targets::qr(0, 1, 0.3), &r),
            (Box::new(|t| qr_gate(0, 1, t, 0.0, QrOrder::Backward)), targets::qr(0, 1, 0.0), &r),
            (Box::new(|t| lc_gate(0, 1, t, -0.7, QrOrder::Forward)), targets::lc(0, 1, -0.7), &r),
            (
                Box::new(|t| quadratic_coupling_circuit(QuadraticKind::XX, 0, 1, 2, t, 0.2, QrOrder::Forward).unwrap()),
                targets::quadratic(QuadraticKind::XX, 0, 1, 2, 0.2),
                &rr,
            ),
            (
                Box::new(|t| quadratic_coupling_circuit(QuadraticKind::ZZ, 0, 1, 2, t, 0.0, QrOrder::Forward).unwrap()),
                targets::quadratic(QuadraticKind::ZZ, 0, 1, 2, 0.0),
                &rr,
            ),
            (
                Box::new(|t| {
                    quadratic_coupling_circuit(QuadraticKind::HoppingReal, 0, 1, 2, t, 0.0, QrOrder::Forward).unwrap()
                }),
                targets::quadratic(QuadraticKind::HoppingReal, 0, 1, 2, 0.0),
                &rr,
            ),
        ];
        for (k, (g, target, reg)) in cases.iter().enumerate() {
            let ys: Vec<f64> = thetas.iter().map(|&t| defect(g, target, reg, t)).collect();
            let p = fit_exponent(&thetas, &ys);
            assert!((p - 2.0).abs() <= 0.1, "case {k}: exponent {p}, defects {ys:?}");
        }
    }

    #[test]
    fn quadratic_xx_overlap() {
        let r = qqm(4);
        let g = quadratic_coupling_circuit(QuadraticKind::XX, 0, 1, 2, 0.05, 0.0, QrOrder::Forward).unwrap();
        let exact = exact_propagator(&targets::quadratic(QuadraticKind::XX, 0, 1, 2, 0.0), &r, 0.05).unwrap();
        let m = u(&g, &r);
        let psi = QuantumState::basis(&r, &[1, 0, 1]).unwrap();
        let a = &exact * &psi.amplitudes;
        let b = &m * &psi.amplitudes;
        assert!(a.dotc(&b).norm_sqr() >= 1.0 - 1e-3);
        assert!(quadratic_coupling_circuit(QuadraticKind::XX, 1, 1, 2, 0.05, 0.0, QrOrder::Forward).is_err());
    }

    #[test]
    fn chiral_hopping_is_exact_and_conserving() {
        let r = qqm(5);
        for &(theta, phi) in &[(0.3, 0.0), (1.1, 0.7), (-0.4, 2.0)] {
            let g = quadratic_coupling_circuit(QuadraticKind::HoppingChiral, 0, 1, 2, theta, phi, QrOrder::Forward)
                .unwrap();
            let m = u(&g, &r);
            let exact =
                exact_propagator(&targets::quadratic(QuadraticKind::HoppingChiral, 0, 1, 2, phi), &r, theta).unwrap();
            assert!(max_abs_diff(&m, &exact) < 1e-12);
            let n1 = OperatorSum::op(OpKind::SigmaZ, 0).scale_re(-0.5) + OperatorSum::identity(c(0.5, 0.0));
            let n2 = OperatorSum::op(OpKind::SigmaZ, 1).scale_re(-0.5) + OperatorSum::identity(c(0.5, 0.0));
            let nb = OperatorSum::op(OpKind::Number, 2);
            for q in [n1 + n2.clone(), n2 + nb] {
                let qm = q.embed(&r).unwrap();
                assert!(linalg::max_abs(&(&m * &qm - &qm * &m)) < 1e-9);
            }
        }
    }

    #[test]
    fn prx_examples() {
        let r = Register::new(vec![SiteKind::Qubit]).unwrap();
        assert!(phase_aligned_distance(&u(&prx(0, PI, 0.0), &r), &OpKind::SigmaX.matrix(2)) < 1e-15);
        assert!(phase_aligned_distance(&u(&rz_via_prx(0, 0.0), &r), &linalg::identity(2)) < 1e-15);
        let target = rz_matrix(PI / 3.0);
        assert!(phase_aligned_distance(&u(&rz_via_prx(0, PI / 3.0), &r), &target) < 1e-12);
        assert!(max_abs_diff(&u(&rz_via_prx(0, 0.9), &r), &(-rz_matrix(0.9))) < 1e-12);
    }

    #[test]
    fn swap_examples() {
        let r = Register::new(vec![SiteKind::Qubit, SiteKind::Qubit]).unwrap();
        let sw = u(&swap_gate(0, 1).unwrap(), &r);
        let i01 = r.basis_index(&[0, 1]).unwrap();
        let i10 = r.basis_index(&[1, 0]).unwrap();
        assert_eq!(sw[(i10, i01)], ONE);
        let fs = u(&fswap_gate(0, 1).unwrap(), &r);
        assert_eq!(fs[(3, 3)], -ONE);
        assert!(max_abs_diff(&(&fs * &fs), &linalg::identity(4)) < 1e-15);
        assert!(swap_gate(1, 1).is_err());
        assert!(fswap_gate(0, 0).is_err());
    }

    #[test]
    fn coherent_error_examples() {
        let r = qm(4);
        assert!(max_abs_diff(&u(&coherent_error_gate(0, 1, 0.0, 0.0), &r), &linalg::identity(8)) < 1e-15);
        let m = u(&coherent_error_gate(0, 1, 0.01, 0.0), &r);
        let i = r.basis_index(&[1, 2]).unwrap();
        // σ_z = -1, n = 2: exp(-i·0.01·(-1)·2/2) = e^{+0.01 i}.
        assert!((m[(i, i)] - linalg::cis(0.01)).norm() < 1e-15);
        let k = u(&coherent_error_gate(0, 1, 0.0, 0.2), &r);
        let i = r.basis_index(&[0, 3]).unwrap();
        assert!((k[(i, i)] - linalg::cis(0.2 * 3.0)).norm() < 1e-15);
    }

    #[test]
    fn aux_displacement_and_rotation() {
        let r = Register::new(vec![SiteKind::Mode(8), SiteKind::Qubit]).unwrap();
        assert!(max_abs_diff(&u(&aux_displacement(0, 1, 0.0), &r), &linalg::identity(16)) < 1e-15);
        let g = aux_rotation(0, 1, 0.1, 20.0, 1.0, 200);
        let m = u(&g, &r);
        let i0 = r.basis_index(&[0, 0]).unwrap();
        let i2 = r.basis_index(&[2, 0]).unwrap();
        let rel = (m[(i2, i2)] / m[(i0, i0)]).arg();
        assert!((rel + 0.2).abs() <= 0.02 * 0.2, "relative phase {rel}");
        assert!(check_dispersive(5.0, 1.0).is_err());
        assert!(check_dispersive(20.0, 1.0).is_ok());
    }

    #[test]
    fn aux_kerr_leading_order() {
        let r = Register::new(vec![SiteKind::Mode(6), SiteKind::Qubit]).unwrap();
        let mut errs = Vec::new();
        let angles = [0.05, 0.0125, 0.003125];
        for &a in &angles {
            let m = u(&aux_kerr(0, 1, a), &r);
            let i0 = r.basis_index(&[0, 0]).unwrap();
            let i2 = r.basis_index(&[2, 0]).unwrap();
            let amp = m[(i2, i2)] / m[(i0, i0)] * m[(i0, i0)].norm();
            errs.push((amp - linalg::cis(-a * 4.0)).norm());
        }
        // Error relative to the target phase shrinks at least as fast as angle^{3/2}.
        let p = fit_exponent(&angles, &errs);
        assert!(p >= 1.45, "exponent {p}, errors {errs:?}");
        assert!(errs[0] < 0.05);
    }

    #[test]
    fn circuit_json_round_trip() {
        let mut c = Circuit::new("demo");
        c.push(qr_gate(0, 2, 0.3, 0.1, QrOrder::Backward));
        c.push(quadratic_coupling_circuit(QuadraticKind::HoppingChiral, 0, 1, 2, 0.2, 0.5, QrOrder::Forward).unwrap());
        c.push(rz_via_prx(1, 0.25));
        c.trotter = Some(TrotterMeta { step: 3, tau: 0.2 });
        c.permutation = Some(vec![1, 0, 2]);
        let back = Circuit::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(Circuit::from_json("{\"gates\": [], \"bogus\": 1}").is_err());
    }

    #[test]
    fn coherent_error_injection_follows_each_jc() {
        let c = Circuit::from_gates("q", vec![qr_gate(0, 1, 0.2, 0.0, QrOrder::Forward)]).with_coherent_error(0.01, 0.0);
        let names = c.gate_names();
        let jcs = names.iter().filter(|n| *n == "jc").count();
        let errs = names.iter().filter(|n| *n == "coherent_error").count();
        assert_eq!(jcs, 2);
        assert_eq!(errs, 2);
        for (k, n) in names.iter().enumerate() {
            if n == "jc" {
                assert_eq!(names[k + 1], "coherent_error");
            }
        }
    }

    proptest! {
        #[test]
        fn flattened_circuits_are_unitary(theta in -2.0f64..2.0, phi in -3.2f64..3.2, k in 0usize..8) {
            let r = qqm(4);
            let g = match k {
                0 => qr_gate(0, 2, theta, phi, QrOrder::Forward),
                1 => lc_gate(1, 2, theta, phi, QrOrder::Backward),
                2 => quadratic_coupling_circuit(QuadraticKind::XX, 0, 1, 2, theta, phi, QrOrder::Forward).unwrap(),
                3 => quadratic_coupling_circuit(QuadraticKind::ZZ, 1, 0, 2, theta, phi, QrOrder::Forward).unwrap(),
                4 => quadratic_coupling_circuit(QuadraticKind::HoppingReal, 0, 1, 2, theta, phi, QrOrder::Backward).unwrap(),
                5 => quadratic_coupling_circuit(QuadraticKind::HoppingChiral, 0, 1, 2, theta, phi, QrOrder::Forward).unwrap(),
                6 => aux_kerr(2, 0, theta.abs() * 0.1),
                _ => rz_via_prx(0, phi),
            };
            let m = u(&g, &r);
            prop_assert!(linalg::unitarity_defect(&m) < 1e-9);
            let mut psi = QuantumState::basis(&r, &[1, 0, 2]).unwrap();
            Simulator::new(&r).apply_gate_state(&g, &mut psi).unwrap();
            prop_assert!((psi.norm() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn jc_matches_propagator_and_conserves(theta in -6.0f64..6.0, phi in -3.2f64..3.2, d in 2usize..8) {
            let r = qm(d);
            let m = u(&phased_jc(0, 1, theta, phi), &r);
            let exact = exact_propagator(&targets::jc(0, 1, phi), &r, theta).unwrap();
            prop_assert!(max_abs_diff(&m, &exact) < 1e-12);
            let n = (OperatorSum::op(OpKind::Number, 1) - OperatorSum::op(OpKind::SigmaZ, 0).scale_re(0.5)).embed(&r).unwrap();
            prop_assert!(linalg::max_abs(&(&m * &n - &n * &m)) < 1e-9);
        }

        #[test]
        fn rz_via_prx_inverse(phi in -6.3f64..6.3) {
            let r = Register::new(vec![SiteKind::Qubit]).unwrap();
            let p = u(&rz_via_prx(0, phi), &r) * u(&rz_via_prx(0, -phi), &r);
            prop_assert!(phase_aligned_distance(&p, &linalg::identity(2)) < 1e-12);
        }
    }
}
