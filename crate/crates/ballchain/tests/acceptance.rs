//! The thirteen acceptance checks, one pass/fail line each.
//!
//! Runs without the libtest harness: checks execute sequentially so their
//! runtimes are not inflated by one another, and output is never captured.

use std::process::ExitCode;

use ballchain::suite::{checks, run_check, SuiteConfig};

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let mut failed = Vec::new();
    for check in checks() {
        let outcome = run_check(&check, &cfg);
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(format!("{} {}", outcome.id, outcome.name));
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
