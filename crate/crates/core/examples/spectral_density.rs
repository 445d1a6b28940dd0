//! Spectral density of a damped bosonic bath: Lorentzian closed form against the
//! Fourier transform of the simulated mode correlation function.
//!
//! Run with `cargo run --release --example spectral_density`.

use rqsim::analysis::linspace;
use rqsim::noise::{bath_correlation, correlation_spectrum, spectral_function};

fn main() -> rqsim::Result<()> {
    let (v, omega, gamma, dephasing) = (0.1, 1.0, 0.1, 0.02);
    let grid = linspace(0.5, 1.5, 11);
    let width = gamma / 2.0 + dephasing;
    let lorentz = spectral_function(&[v], &[omega], &[width], &grid)?;
    let dt = 0.02;
    let corr = bath_correlation(v, omega, gamma, dephasing, 4, dt, 20000)?;
    let numeric = correlation_spectrum(&corr, dt, &grid);
    println!("{:>6} {:>12} {:>12} {:>9}", "omega", "lorentzian", "correlation", "rel diff");
    for ((w, a), b) in grid.iter().zip(&lorentz).zip(&numeric) {
        println!("{w:>6.2} {a:>12.5} {b:>12.5} {:>9.2e}", (a - b).abs() / a);
    }
    Ok(())
}
