//! Noisy Trotterized dynamics of the two-spin, two-mode Dicke example against the
//! exact solution and the effective Lindblad model.
//!
//! Run with `cargo run --release --example noise_mapping`.

use std::time::Instant;

use rqsim::analysis::{population_op, Observable};
use rqsim::compiler::{Compiler, Network, TrotterPlan};
use rqsim::models::{preset, Preset, PresetParams};
use rqsim::noise::{effective_lindbladian, simulate_lindblad_model, simulate_noisy_trotter, NoiseSpec};

fn main() -> rqsim::Result<()> {
    let model = preset(Preset::DickeExample2x2, &PresetParams::default())?;
    let d = 8;
    let tau = 0.2;
    let plan = TrotterPlan::new(2, tau, 100);
    let initial = [0, 0, 1, 0];
    let obs = vec![Observable::new("P_0", population_op(0)), Observable::new("P_1", population_op(1))];
    // Only t_gate * gamma enters.
    let noise = NoiseSpec::uniform(2, 0.005, 0.0, 1.0)?;

    let start = Instant::now();
    let noisy = simulate_noisy_trotter(&model, &plan, Network::Auto, &noise, d, &initial, &obs)?;
    println!("noisy trotter: {:.1?}", start.elapsed());

    let comp = Compiler::new(&model, &plan, Network::Auto)?;
    let eff = effective_lindbladian(&comp.step(0)?, &noise, tau, model.n_sites.max(model.n_modes))?;
    println!("D_k = {:?}, effective rates = {:?}", eff.d_k, eff.gamma);

    let start = Instant::now();
    let lind = simulate_lindblad_model(&model, &eff.as_rates(), d, &initial, &obs, &noisy.times, 0.02)?;
    println!("effective lindblad: {:.1?}", start.elapsed());

    let clean = simulate_noisy_trotter(&model, &plan, Network::Auto, &NoiseSpec::noiseless(2), d, &initial, &obs)?;
    let exact = simulate_lindblad_model(&model, &NoiseSpec::noiseless(2), d, &initial, &obs, &noisy.times, 0.02)?;

    println!("max |noisy - effective| = {:.4}", noisy.max_abs_diff(&lind));
    println!("max |noiseless - exact| = {:.4}", clean.max_abs_diff(&exact));
    for (i, t) in noisy.times.iter().enumerate().step_by(10) {
        println!(
            "t = {t:5.1}  P_0: exact {:.3} trotter {:.3} noisy {:.3} effective {:.3}",
            exact.values[i][0], clean.values[i][0], noisy.values[i][0], lind.values[i][0]
        );
    }
    Ok(())
}
