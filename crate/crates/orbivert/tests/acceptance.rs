//! Full acceptance run: one line per criterion, all of them must pass.

use orbivert::suite;

#[test]
fn acceptance_criteria() {
    let outcomes = suite::run_all();
    let mut failures = 0;
    for outcome in &outcomes {
        println!("{}", outcome.summary_line());
        if !outcome.passed {
            failures += 1;
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
