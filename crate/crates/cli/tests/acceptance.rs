//! Acceptance suite: runs all thirteen checks and prints one PASS/FAIL line
//! per criterion directly to stdout (bypassing test capture).

use std::io::Write;

use kinlab_cli::suite;

#[test]
fn acceptance() {
    let mut stdout = std::io::stdout();
    let mut failures = Vec::new();
    for index in 1..=13usize {
        let r = suite::run_criterion(index);
        writeln!(
            stdout,
            "criterion {:2}: {} — {} ({:.1} s) [{}]",
            r.index,
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.seconds,
            r.detail
        )
        .unwrap();
        stdout.flush().unwrap();
        if !r.passed {
            failures.push((r.index, r.detail));
        }
    }
    assert!(failures.is_empty(), "failing criteria: {failures:?}");
}
