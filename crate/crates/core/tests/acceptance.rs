use std::io::Write;
use std::time::{Duration, Instant};

use zn_thomae::checks::{self, CheckReport};
use zn_thomae::CurveSpec;

fn battery() -> Vec<CurveSpec> {
    checks::battery(8, 5)
}

fn report(id: u32, title: &str, limit: Duration, run: impl FnOnce() -> CheckReport) {
    let start = Instant::now();
    let r = run();
    let elapsed = start.elapsed();
    let ok = r.passed() && elapsed <= limit;
    // Written to the raw handle so the verdict shows even when output is captured.
    let _ = writeln!(
        std::io::stderr().lock(),
        "criterion {id} {}: {title} ({} instances, {} violations, {:.2?})",
        if ok { "PASS" } else { "FAIL" },
        r.instances,
        r.violations,
        elapsed
    );
    for note in &r.notes {
        println!("    {note}");
    }
    for finding in &r.findings {
        println!("    violation: {finding}");
    }
    assert!(r.passed(), "criterion {id} has {} violations", r.violations);
    assert!(elapsed <= limit, "criterion {id} took {elapsed:?}, limit {limit:?}");
}

#[test]
fn criterion_1_f_tables() {
    report(1, "f tables", Duration::from_secs(10), || checks::check_f_tables(60));
}

#[test]
fn criterion_2_f_identities() {
    report(2, "f identities", Duration::from_secs(30), || checks::check_f_identities(40));
}

#[test]
fn criterion_3_operator_algebra() {
    report(3, "operator algebra", Duration::from_secs(120), || checks::check_operators(&battery()));
}

#[test]
fn criterion_4_nonspecialty() {
    report(4, "non-specialty equivalence", Duration::from_secs(60), || {
        checks::check_nonspecialty(&battery(), 6)
    });
}

#[test]
fn criterion_5_denominator_invariance() {
    report(5, "denominator invariance", Duration::from_secs(300), || checks::check_denominators(&battery()));
}

#[test]
fn criterion_6_worked_denominators() {
    report(6, "worked denominators", Duration::from_secs(60), checks::check_worked_denominators);
}

#[test]
fn criterion_7_counts() {
    report(7, "divisor and orbit counts", Duration::from_secs(300), checks::check_counts);
}

#[test]
fn criterion_8_transitivity() {
    report(8, "transitivity", Duration::from_secs(300), || checks::check_transitivity(&battery(), 7));
}

#[test]
fn criterion_9_structure() {
    report(9, "structural checks", Duration::from_secs(60), || checks::check_structure(&battery(), 20, 1));
}

// The following compare against claimed values that the exact computations
// here do not reproduce. They fail when run with `--ignored`.

#[test]
#[ignore = "claimed three-point family lists disagree with the computed classification"]
fn criterion_4_claimed_three_point_lists() {
    report(4, "claimed three-point family lists", Duration::from_secs(60), checks::check_third_family_claimed);
}

#[test]
#[ignore = "claimed avoid-point polynomial disagrees with the exhaustive count"]
fn criterion_7_claimed_avoid_counts() {
    report(7, "claimed avoid-point counts", Duration::from_secs(300), checks::check_claimed_avoid_counts);
}

#[test]
#[ignore = "the base-point denominator alone changes under swaps; only its difference with h is invariant"]
fn criterion_5_literal_q_invariance() {
    report(5, "literal base-point denominator invariance", Duration::from_secs(300), || {
        checks::check_literal_q_invariance(&battery())
    });
}
