//! Runs every acceptance criterion and prints one line per criterion, then the
//! fault-injection self-test. Exits nonzero if anything fails.

use std::process::ExitCode;

use jumpstat::verify::{
    first_order_fidelity, monte_carlo, run_all, three_atom_populations, three_method_agreement, CheckResult, Fault,
};

fn main() -> ExitCode {
    let results = run_all(None);
    for r in &results {
        println!("{}", r.line());
        for n in &r.notes {
            println!("    note: {n}");
        }
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();

    let faulted: [(&str, CheckResult); 4] = [
        ("closed-form scale 1e-5", three_method_agreement(Some(Fault::ClosedFormScale(1e-5)))),
        ("first-order sign", first_order_fidelity(Some(Fault::FirstOrderSign))),
        ("population scale 1e-8", three_atom_populations(Some(Fault::PopulationScale(1.0 + 1e-8)))),
        ("triple jump scale 1.5", monte_carlo(Some(Fault::TripleJumpScale(1.5)))),
    ];
    let mut missed = Vec::new();
    for (name, r) in &faulted {
        let detected = !r.passed;
        println!("fault {name}: {}", if detected { "detected" } else { "MISSED" });
        if !detected {
            missed.push(*name);
        }
    }

    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() && missed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}; undetected faults: {missed:?}");
        ExitCode::FAILURE
    }
}
