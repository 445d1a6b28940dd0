//! Digitized Rabi oscillations in the second and third JC manifolds, with resonator
//! damping and auxiliary-qubit state preparation.
//!
//! Run with `cargo run --release --example manifold_chevron`.

use std::f64::consts::PI;

use rqsim::analysis::{digitized_rabi_angle, initialize_with_aux, linspace, replicate_manifold_demo, Manifold, ManifoldDemo};

fn main() -> rqsim::Result<()> {
    for manifold in [Manifold::Second, Manifold::Third] {
        let demo = ManifoldDemo::new(manifold, linspace(-PI, PI, 9), 30);
        let res = replicate_manifold_demo(&demo)?;
        println!("{manifold:?}: effective angle per step {:.4}", manifold.effective_angle());
        for (dp, f) in res.delta_phi.iter().zip(res.fitted_frequencies()) {
            println!("  delta_phi {dp:+.3}  fitted {f:.4}  digitized {:.4}", digitized_rabi_angle(manifold.effective_angle(), *dp));
        }
    }

    let mut demo = ManifoldDemo::new(Manifold::Third, vec![0.0], 40);
    demo.gamma_t_gate = 0.01;
    let damped = replicate_manifold_demo(&demo)?;
    let stay = &damped.manifold_population[0];
    println!("\ndamped third manifold: in-manifold population after 0, 20, 40 steps: {:.3} {:.3} {:.3}", stay[0], stay[20], stay[40]);

    let init = initialize_with_aux(6, 64, 0.0, 0.0)?;
    println!("aux initialization: varphi {:.3}, acceptance {:.4}, post-selected fidelity {:.4}", init.varphi, init.acceptance, init.fidelity);
    demo.aux_init = true;
    let post = replicate_manifold_demo(&demo)?;
    println!("acceptance after 40 damped steps: {:.3}", post.acceptance[0][40]);
    Ok(())
}
