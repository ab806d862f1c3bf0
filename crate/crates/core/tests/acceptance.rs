//! One test per acceptance criterion. Each prints a single
//! `criterion N: PASS|FAIL` line with the measured value and tolerance.

use std::sync::OnceLock;

use henon_core::verify::{run_check, CheckResult, Context, VerifyOptions};

fn context() -> &'static Context {
    static CTX: OnceLock<Context> = OnceLock::new();
    CTX.get_or_init(|| Context::new(VerifyOptions::default()))
}

fn criterion(id: u32) -> CheckResult {
    let c = run_check(id, context());
    println!(
        "criterion {id:>2}: {} {} measured={:.6e} tolerance={:.1e} expectation=\"{}\" {} ({:.2}s)",
        if c.passed { "PASS" } else { "FAIL" },
        c.name,
        c.measured,
        c.tolerance,
        c.expectation,
        c.detail,
        c.seconds
    );
    c
}

macro_rules! acceptance {
    ($($name:ident => $id:expr),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                let c = criterion($id);
                assert!(c.passed, "criterion {} ({}) failed: {}", $id, c.name, c.detail);
            }
        )*
    };
}

acceptance! {
    criterion_01_exact_low_orders => 1,
    criterion_02_parity_zeros => 2,
    criterion_03_constant_signs => 3,
    criterion_04_unperturbed_spectrum => 4,
    criterion_05_numerical_range => 5,
    criterion_06_coercivity => 6,
    criterion_07_stability => 7,
    criterion_08_argument_symmetry => 8,
    criterion_09_geometric_oracle => 9,
    criterion_10_sum_matches_resonance => 10,
    criterion_11_borel_pole_on_axis => 11,
    criterion_12_width_consistency => 12,
    criterion_13_kernel_normalization => 13,
}

#[test]
fn mutated_a2_breaks_sign_and_cross_checks() {
    let ctx = Context::new(VerifyOptions {
        mutate_a2: true,
        ..VerifyOptions::default()
    });
    for id in [1, 3, 10] {
        let c = run_check(id, &ctx);
        println!("mutation check {id}: {} {}", if c.passed { "PASS" } else { "FAIL" }, c.detail);
        assert!(!c.passed, "check {id} survived the a2 sign flip");
    }
}
