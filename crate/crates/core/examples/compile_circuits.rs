//! Compiles model presets to Trotter circuits: depth, JC count per mode, routing cost,
//! depth growth per model class and the encoding-cost comparison.
//!
//! Run with `cargo run --release --example compile_circuits`.

use rqsim::compiler::{encoding_cost, metrics, trotter_step, Compiler, Encoding, MetricsReport, Network, TrotterPlan};
use rqsim::models::{class_model, preset, ModelClass, Preset, PresetParams};

fn main() -> rqsim::Result<()> {
    let dicke = preset(Preset::DickeExample2x2, &PresetParams::default())?;
    for order in [1, 2] {
        let plan = TrotterPlan::new(order, 0.2, 10);
        let comp = Compiler::new(&dicke, &plan, Network::Auto)?;
        let report = MetricsReport::new("dicke", &comp.circuit()?, 2, 2);
        let step = metrics(&comp.step(0)?);
        println!("Dicke order {order}: depth {} over 10 steps, D_k per step {:?}", report.metrics.depth, step.d_k);
    }

    let hh = preset(
        Preset::HubbardHolstein,
        &PresetParams {
            n_sites: Some(4),
            n_modes: Some(2),
            eps: Some(vec![0.1; 4]),
            omega: Some(vec![1.0, 1.0]),
            v: Some(vec![vec![0.2, 0.0], vec![0.2, 0.0], vec![0.0, 0.2], vec![0.0, 0.2]]),
            hopping: Some(vec![(0, 2, 0.5), (1, 3, 0.5)]),
            pair: Some(vec![(0, 1, 0.8), (2, 3, 0.8)]),
            ..Default::default()
        },
    )?;
    let comp = Compiler::new(&hh, &TrotterPlan::new(1, 0.1, 1), Network::Linear)?;
    let m = metrics(&comp.step(0)?);
    println!("Hubbard-Holstein step: depth {}, {} entangling gates, drive shift {:?}", m.depth, m.entangling, comp.drive_shift);

    println!("\nstep depth by model class");
    for class in ModelClass::ALL {
        let depths: Vec<usize> = [2, 4, 6, 8]
            .iter()
            .map(|&n| trotter_step(&class_model(class, n), &TrotterPlan::new(2, 0.2, 1), 0).map(|c| metrics(&c).depth))
            .collect::<rqsim::Result<_>>()?;
        println!("  {class:<28?} N_b = 2,4,6,8: {depths:?}");
    }

    println!("\nencoding b† + b coupling, cost per term");
    for d in [4, 8, 16, 32] {
        let costs: Vec<String> = [Encoding::ResonatorQubit, Encoding::Unary, Encoding::Binary]
            .iter()
            .map(|&e| encoding_cost(d, e).map(|c| format!("{e:?}: {} qubits {} CNOTs", c.qubits, c.entangling)))
            .collect::<rqsim::Result<_>>()?;
        println!("  d = {d:>2}  {}", costs.join(" | "));
    }
    Ok(())
}
