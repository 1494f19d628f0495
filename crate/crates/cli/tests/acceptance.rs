//! One line per acceptance criterion. Criteria 1 to 9 are the property suite,
//! 10 is the golden-file comparison of the command line.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use krealize_cli::golden;
use krealize_core::suite;

const SEED: u64 = 0;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for id in suite::CRITERIA {
        let r = suite::run_criterion(id, SEED);
        println!("{r}");
        for f in r.failures.iter().take(5) {
            println!("    {f}");
        }
        if !r.passed() {
            failed.push(id);
        }
    }

    let start = Instant::now();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cases = golden::load(&dir).expect("golden directory");
    let mismatches: Vec<String> = cases.iter().filter_map(golden::Case::check).collect();
    let ok = !cases.is_empty() && mismatches.is_empty();
    println!(
        "criterion 10 {}: CLI golden files ({} cases, {} mismatches, {:.2}s)",
        if ok { "PASS" } else { "FAIL" },
        cases.len(),
        mismatches.len(),
        start.elapsed().as_secs_f64()
    );
    for m in mismatches.iter().take(5) {
        println!("    {m}");
    }
    if !ok {
        failed.push(10);
    }

    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
