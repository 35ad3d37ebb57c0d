//! One line per acceptance criterion; non-zero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use qlab::verify::{run_criterion, VerifyConfig, CRITERIA};

fn main() -> ExitCode {
    let cfg = VerifyConfig::default();
    let mut failed = 0;
    for (id, _) in CRITERIA {
        let t = Instant::now();
        let res = run_criterion(id, &cfg);
        let secs = t.elapsed().as_secs_f64();
        let tag = if res.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {:>2}: {} ({secs:.2}s) {}", res.criterion_id, res.description, res.measured);
        if !res.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", CRITERIA.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
