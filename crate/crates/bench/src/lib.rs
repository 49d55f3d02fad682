//! Shared fixtures for the criterion benchmarks: seeded program batches,
//! compiled exemplar checkers, and the bundled corpus location.

use std::path::PathBuf;

use knighter_core::cdsl::{exemplars::exemplars, CompiledChecker};
use knighter_core::minilang::generate::{generate_function, GenConfig};
use knighter_core::minilang::{parse_module, FunctionDef};

/// Root of the bundled corpus that the scanner benchmarks walk.
pub fn corpus_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus")
}

/// Seeded function sources for parser benchmarks.
pub fn generated_sources(count: u64) -> Vec<String> {
    let config = GenConfig::default();
    (0..count).map(|seed| generate_function(seed, &config)).collect()
}

/// The same seeded batch, parsed into ASTs for engine benchmarks.
pub fn generated_functions(count: u64) -> Vec<FunctionDef> {
    generated_sources(count)
        .iter()
        .map(|src| {
            let module = parse_module(src).expect("generated source parses");
            module.functions.into_iter().next().expect("one function per seed")
        })
        .collect()
}

/// Compiles the three bundled exemplar checkers.
pub fn compiled_exemplars() -> Vec<CompiledChecker> {
    exemplars()
        .iter()
        .map(|e| CompiledChecker::from_source(e.checker).expect("exemplar compiles"))
        .collect()
}
