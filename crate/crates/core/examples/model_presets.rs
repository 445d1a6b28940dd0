//! Builds every model preset, checks Hermiticity in each frame and lists the standard
//! observables of the Dicke example.
//!
//! Run with `cargo run --example model_presets`.

use rqsim::analysis::{observable_names, observables_suite};
use rqsim::models::{build, preset, Frame, Preset, PresetParams};
use rqsim::QuantumState;

fn params(p: Preset) -> PresetParams {
    let two = |x: f64| Some(vec![x, x]);
    match p {
        Preset::DickeExample2x2 => PresetParams::default(),
        Preset::JaynesCummings => PresetParams { eps: Some(vec![-1.0]), omega: Some(vec![1.0]), v: Some(vec![vec![0.1]]), ..Default::default() },
        Preset::Dicke | Preset::TavisCummings | Preset::Holstein | Preset::HubbardHolstein => PresetParams {
            eps: two(-1.0),
            omega: two(1.0),
            v: Some(vec![vec![0.1, 0.05], vec![0.05, 0.1]]),
            hopping: Some(vec![(0, 1, 0.2)]),
            pair: Some(vec![(0, 1, 0.3)]),
            ..Default::default()
        },
        Preset::Frohlich => PresetParams {
            eps: two(0.5),
            omega: Some(vec![1.0]),
            v3: Some(vec![(0, 1, 0, 0.1), (0, 0, 0, 0.05)]),
            ..Default::default()
        },
        Preset::RpaRadical => PresetParams {
            eps: Some(vec![0.1, 0.2, 0.3, 0.4]),
            omega: Some(vec![1.0]),
            v3: Some(vec![(0, 1, 0, 0.1), (2, 3, 0, 0.1)]),
            ..Default::default()
        },
    }
}

fn main() -> rqsim::Result<()> {
    for p in Preset::ALL {
        let model = match preset(p, &params(p)) {
            Ok(m) => m,
            Err(e) => {
                println!("{:<16} skipped: {e}", p.name());
                continue;
            }
        };
        let reg = model.register(3)?;
        let herm: Vec<bool> = [Frame::Lab, Frame::RotatingModes]
            .iter()
            .map(|&f| build(&model, f, 0.7).map(|h| h.embed(&reg).map(|m| rqsim::linalg::hermiticity_defect(&m) < 1e-12)))
            .map(|r| matches!(r, Ok(Ok(true))))
            .collect();
        println!(
            "{:<16} sites {} modes {} couplings {:>2} dim(d=3) {:>5} hermitian(lab, rotating) {:?}",
            p.name(),
            model.n_sites,
            model.n_modes,
            model.couplings.len(),
            reg.dim(),
            herm
        );
    }

    let model = preset(Preset::DickeExample2x2, &PresetParams::default())?;
    println!("\nDicke example observables: {}", observable_names(&model).join(", "));
    let reg = model.register(4)?;
    let psi = QuantumState::basis(&reg, &[0, 1, 1, 0])?;
    for (name, v) in observables_suite(&model, &psi)? {
        println!("  {name:<12} {v:+.4}");
    }
    Ok(())
}
