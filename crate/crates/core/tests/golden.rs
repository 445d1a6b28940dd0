//! Circuit structure pinned in text files under `tests/golden/`. Set `RQSIM_BLESS=1`
//! to rewrite them after an intended change.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rqsim::analysis::init_circuit;
use rqsim::compiler::{metrics, Compiler, Network, PhaseConvention, TrotterPlan};
use rqsim::gateset::{Circuit, Gate};
use rqsim::models::{preset, Preset, PresetParams};

fn render(gates: &[Gate], depth: usize, out: &mut String) {
    for g in gates {
        let params: Vec<String> = g.params.iter().map(|p| format!("{:.6}", p + 0.0)).collect();
        let sites: Vec<String> = g.sites.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "{}{} [{}] ({})", "  ".repeat(depth), g.name, sites.join(","), params.join(", "));
        render(&g.body, depth + 1, out);
    }
}

fn check(name: &str, circuit: &Circuit) {
    let mut text = String::new();
    render(&circuit.gates, 0, &mut text);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("RQSIM_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &text).unwrap();
        return;
    }
    let want = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    if want != text {
        let line = want.lines().zip(text.lines()).position(|(a, b)| a != b).unwrap_or(want.lines().count().min(text.lines().count()));
        panic!("{name} differs from the golden file at line {}:\n{}", line + 1, text.lines().nth(line).unwrap_or("<end>"));
    }
}

fn dicke_plan() -> TrotterPlan {
    let mut plan = TrotterPlan::new(2, 0.2, 2);
    plan.phase_convention = PhaseConvention::LeftEdge;
    plan
}

#[test]
fn dicke_second_order_steps() {
    let model = preset(Preset::DickeExample2x2, &PresetParams::default()).unwrap();
    let comp = Compiler::new(&model, &dicke_plan(), Network::Auto).unwrap();
    let circuit = comp.circuit().unwrap();
    check("dicke_order2_tau0.2.txt", &circuit);
    // Eight JC primitives per resonator per step.
    let step = comp.step(0).unwrap();
    assert!(metrics(&step).d_k.values().all(|&n| n == 8));
}

#[test]
fn aux_initialization_placement() {
    check("aux_init.txt", &init_circuit(0, 1, 2, 0.25, 0.0));
}
