use std::process::ExitCode;

use serde_json::Value;
use siegel_core::verify::*;

fn criterion(n: usize, title: &str, section: Option<&Section>) -> bool {
    let Some(section) = section else {
        println!("criterion {n} ({title}): FAIL (section missing)");
        return false;
    };
    let pass = section.status == Status::Pass;
    println!("criterion {n} ({title}): {}", if pass { "PASS" } else { "FAIL" });
    for check in section.details.as_array().into_iter().flatten() {
        if check["pass"] != Value::Bool(true) {
            println!("    failed check {}: {}", check["check"], check["value"]);
        }
    }
    pass
}

fn main() -> ExitCode {
    let first = verify_all(DEFAULT_SEED, DEFAULT_PRECISION_DIGITS);
    let second = verify_all(DEFAULT_SEED, DEFAULT_PRECISION_DIGITS);
    let mut ok = true;
    for (n, title, name) in [
        (1, "group arithmetic", "groups"),
        (2, "stabilizer lattice divisors", "cusps"),
        (3, "theta and Igusa suite", "theta"),
        (4, "F0 suite", "f0"),
        (5, "invariants", "invariants"),
        (6, "Voronoi", "voronoi"),
    ] {
        ok &= criterion(n, title, first.section(name));
    }
    let same = serde_json::to_string(&first).ok() == serde_json::to_string(&second).ok();
    println!("criterion 7 (determinism): {}", if same { "PASS" } else { "FAIL" });
    ok &= same;
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
