//! Property tests for the symbolic engine: determinism, report ordering,
//! and span sanity over generated programs and every example checker.

use knighter_core::cdsl::exemplars::exemplars;
use knighter_core::cdsl::CompiledChecker;
use knighter_core::engine::{analyze_function, EngineBudget};
use knighter_core::minilang::generate::{generate_function, GenConfig};
use knighter_core::minilang::parse_module;
use proptest::prelude::*;

fn checkers() -> Vec<CompiledChecker> {
    exemplars()
        .iter()
        .map(|ex| CompiledChecker::from_source(ex.checker).expect("example checker compiles"))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Two runs over the same function produce identical analyses.
    #[test]
    fn analysis_is_deterministic(seed in any::<u64>()) {
        let src = generate_function(seed, &GenConfig::default());
        let module = parse_module(&src).unwrap();
        let func = &module.functions[0];
        let budget = EngineBudget::default();
        for checker in &checkers() {
            let first = analyze_function(func, "gen.mc", checker, &budget).unwrap();
            let second = analyze_function(func, "gen.mc", checker, &budget).unwrap();
            prop_assert_eq!(first, second);
        }
    }

    /// Reports come out sorted and free of duplicates, and every span the
    /// engine hands back lies inside the function it analyzed.
    #[test]
    fn reports_are_sorted_deduplicated_and_in_bounds(seed in any::<u64>()) {
        let src = generate_function(seed, &GenConfig::default());
        let module = parse_module(&src).unwrap();
        let func = &module.functions[0];
        let budget = EngineBudget::default();
        for checker in &checkers() {
            let analysis = analyze_function(func, "gen.mc", checker, &budget).unwrap();
            for pair in analysis.reports.windows(2) {
                prop_assert!(
                    pair[0].sort_key() < pair[1].sort_key(),
                    "reports out of order or duplicated: {:?} then {:?}",
                    pair[0],
                    pair[1]
                );
            }
            for report in &analysis.reports {
                prop_assert!(
                    report.span.line >= func.span.line && report.span.line <= func.end_line,
                    "report at {} escapes the function ({}..{}):\n{}",
                    report.span,
                    func.span.line,
                    func.end_line,
                    src
                );
                for entry in &report.trace {
                    prop_assert!(
                        entry.span.line >= func.span.line && entry.span.line <= func.end_line,
                        "trace entry at {} escapes the function:\n{}",
                        entry.span,
                        src
                    );
                }
            }
        }
    }
}
