//! Coherent JC-gate errors in the QR construction, with and without the X conjugation
//! of the second JC gate.
//!
//! Run with `cargo run --example coherent_errors`.

use rqsim::analysis::coherent_error_scaling;

fn main() -> rqsim::Result<()> {
    let chi = [0.02, 0.01, 0.005, 0.0025, 0.00125];
    let s = coherent_error_scaling(&chi, 10.0, 6)?;
    println!("{:>10} {:>10} {:>14} {:>14}", "chi_t", "theta", "conjugated", "unconjugated");
    for i in 0..chi.len() {
        println!("{:>10.5} {:>10.4} {:>14.3e} {:>14.3e}", s.chi_t[i], s.theta[i], s.mitigated[i], s.unmitigated[i]);
    }
    println!("defect exponent: {:.2} conjugated, {:.2} unconjugated", s.mitigated_exponent, s.unmitigated_exponent);
    Ok(())
}
