//! Path-sensitive symbolic execution for MiniLang functions.
//!
//! The engine explores one function at a time. It forks at branches, prunes
//! assumption contradictions, unrolls loops a fixed number of times, and
//! narrates everything it does — calls, branches, memory accesses, bindings,
//! scope ends — as a stream of [`EngineEvent`]s. Checkers are [`EventHooks`]
//! implementations; they keep their own facts in the shared [`ProgramState`]
//! and raise diagnostics via [`HookEffect::Report`].
//!
//! [`oracle`] holds an independent brute-force path enumerator used to
//! cross-check the explorer in differential tests.

mod event;
mod explore;
pub mod oracle;
mod region;
mod report;
mod state;

pub use event::{AccessKind, ArgView, CheckerRuntimeError, EngineEvent, EventHooks, HookEffect};
pub use explore::{analyze_function, Analysis, EngineBudget};
pub use region::{Region, SymbolId, SymbolOrigin, SymbolicValue};
pub use report::{sort_reports, Report, TraceEntry};
pub use state::{Nullness, ProgramState};
