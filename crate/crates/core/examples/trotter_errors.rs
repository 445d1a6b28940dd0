//! Leading Trotter error operators and the measured error scaling with step size.
//!
//! Run with `cargo run --release --example trotter_errors`.

use rqsim::analysis::{alpha1, alpha2, qr_split, trotter_error_scan, ScanConfig};
use rqsim::compiler::Network;
use rqsim::models::{preset, Preset, PresetParams};
use rqsim::{Register, SiteKind};

fn main() -> rqsim::Result<()> {
    let reg = Register::new(vec![SiteKind::Qubit, SiteKind::Mode(8)])?;
    let [jc, ajc] = qr_split(0, 1, 1.0);
    for tau in [0.2, 0.1, 0.05] {
        let a1 = alpha1(&[jc.clone(), ajc.clone()], tau, &reg)?;
        let a2 = alpha2(&jc, &ajc, tau, &reg)?;
        println!("tau {tau:<5} ||alpha1|| {:.3e}  ||alpha2|| {:.3e}", a1.norm, a2.norm);
    }

    let model = preset(Preset::DickeExample2x2, &PresetParams::default())?;
    let cfg = ScanConfig {
        orders: vec![1, 2],
        taus: vec![0.4, 0.2, 0.1, 0.05],
        ds: vec![4],
        t_total: 2.0,
        initial: vec![0, 0, 1, 0],
        network: Network::Auto,
    };
    let report = trotter_error_scan(&model, &cfg)?;
    print!("\n{}", report.to_csv());
    for f in &report.fits {
        println!("order {} d {} {:<10} exponent {:.2} ± {:.2}", f.order, f.d, f.metric, f.exponent, f.stderr);
    }
    Ok(())
}
