//! Property tests for the two frontends: pretty-printed programs and
//! checkers must parse back to what was printed.

use knighter_core::cdsl::exemplars::exemplars;
use knighter_core::cdsl::{parse_checker, print_checker};
use knighter_core::minilang::generate::{generate_function, GenConfig};
use knighter_core::minilang::{function_eq, parse_module, print_function, FunctionDef};
use proptest::prelude::*;

fn render(func: &FunctionDef) -> String {
    let mut out = String::new();
    print_function(func, &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    /// Any generated function survives a print→parse round trip, and the
    /// printer is a fixed point on its own output.
    #[test]
    fn generated_functions_round_trip_through_the_printer(seed in any::<u64>()) {
        let src = generate_function(seed, &GenConfig::default());
        let module = parse_module(&src).unwrap();
        let func = &module.functions[0];

        let printed = render(func);
        let reparsed = parse_module(&printed).unwrap();
        prop_assert_eq!(reparsed.functions.len(), 1);
        prop_assert!(
            function_eq(func, &reparsed.functions[0]),
            "round trip changed the function:\n--- original\n{}\n--- reprinted\n{}",
            src,
            printed
        );
        prop_assert_eq!(render(&reparsed.functions[0]), printed);
    }

    /// The example checkers keep parsing when retargeted at arbitrary callee
    /// names, and the checker printer round-trips the result.
    #[test]
    fn retargeted_checkers_round_trip_through_the_printer(
        which in 0..3usize,
        target in "[a-z][a-z0-9_]{0,11}",
    ) {
        let example = &exemplars()[which];
        let original = match which {
            0 => "devm_kzalloc",
            1 => "kmalloc",
            _ => "release_buf",
        };
        let source = example.checker.replace(original, &target);

        let def = parse_checker(&source).unwrap();
        let printed = print_checker(&def);
        let reparsed = parse_checker(&printed)
            .unwrap_or_else(|d| panic!("printer produced unparseable output: {d:?}\n{printed}"));
        prop_assert_eq!(&reparsed, &def);
        prop_assert_eq!(print_checker(&reparsed), printed);
    }
}
