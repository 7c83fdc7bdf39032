//! Runs every reproduction criterion and prints one line per check.
//! Exits nonzero if any check fails.

use std::process::ExitCode;

use bkising_validation::checks;

fn main() -> ExitCode {
    let mut failed = 0;
    for (id, check) in checks() {
        match check() {
            Ok(outcomes) => {
                for o in outcomes {
                    println!("{}", o.line());
                    failed += usize::from(!o.passed);
                }
            }
            Err(e) => {
                println!("criterion {id:<3} FAIL  error: {e}");
                failed += 1;
            }
        }
    }
    println!("acceptance: {failed} failing check(s)");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
