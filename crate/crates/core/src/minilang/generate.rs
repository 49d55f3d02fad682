//! Seeded random MiniLang generator for differential testing.
//!
//! [`generate_function`] produces the source text of one self-contained
//! function, deterministically from a `u64` seed. The output always parses,
//! and always stays inside the subset the brute-force path oracle supports:
//! a bounded number of branching statements and no loop nested inside
//! another loop. Callee names are drawn from the same vocabulary the bundled
//! checkers watch (`devm_kzalloc`, `get_buf`, `kmalloc`, `release_buf`, ...)
//! so that generated programs actually exercise checker hooks rather than
//! merely parsing.
//!
//! Variables are used only in scopes dominated by their declaration, every
//! watched callee is called with the arity the checkers expect, and integer
//! and pointer expressions are kept apart, so the generator never produces a
//! program the engine would reject.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape limits for generated functions.
#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Upper bound on branching statements (`if` and `while` combined,
    /// counted recursively).
    pub max_branches: usize,
    /// Upper bound on call expressions anywhere in the function.
    pub max_calls: usize,
    /// Upper bound on statements emitted per block.
    pub max_block_stmts: usize,
    /// Whether `while` loops may be generated at all.
    pub allow_loops: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_branches: 4, max_calls: 2, max_block_stmts: 4, allow_loops: true }
    }
}

/// Callees that allocate: unary, return a pointer.
const ALLOC_CALLEES: &[&str] = &["devm_kzalloc", "get_buf", "kmalloc", "raw_buf_alloc"];

/// Callees that consume a pointer: unary, called for effect.
const SINK_CALLEES: &[&str] = &["release_buf", "validate_buf", "put_ref"];

/// Generates the source of one MiniLang function, deterministic in `seed`.
pub fn generate_function(seed: u64, config: &GenConfig) -> String {
    let mut gen = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        branches_left: config.max_branches,
        calls_left: config.max_calls,
        max_block_stmts: config.max_block_stmts.max(1),
        allow_loops: config.allow_loops,
        next_int: 0,
        next_ptr: 0,
        lines: Vec::new(),
    };
    gen.lines.push(format!("int gen_{seed}(int n, int* ext) {{"));
    let scope = Scope { ints: vec!["n".into()], ptrs: vec!["ext".into()] };
    gen.block(scope, 1, false, true);
    gen.lines.push("}".into());
    let mut src = gen.lines.join("\n");
    src.push('\n');
    src
}

#[derive(Clone)]
struct Scope {
    ints: Vec<String>,
    ptrs: Vec<String>,
}

struct Gen {
    rng: ChaCha8Rng,
    branches_left: usize,
    calls_left: usize,
    max_block_stmts: usize,
    allow_loops: bool,
    next_int: u32,
    next_ptr: u32,
    lines: Vec<String>,
}

impl Gen {
    /// Emits the statements of one block. Declarations extend only the local
    /// copy of `scope`, so nothing escapes into sibling blocks.
    fn block(&mut self, mut scope: Scope, depth: usize, in_loop: bool, is_top: bool) {
        let count = self.rng.gen_range(1..=self.max_block_stmts);
        for _ in 0..count {
            if self.stmt(&mut scope, depth, in_loop) {
                return;
            }
        }
        if is_top && self.rng.gen_range(0..10) < 8 {
            let expr = self.int_expr(&scope);
            self.push(depth, format!("return {expr};"));
        }
    }

    /// Emits one statement; returns true if it was a `return` (which ends
    /// the block).
    fn stmt(&mut self, scope: &mut Scope, depth: usize, in_loop: bool) -> bool {
        let mut menu: Vec<u32> = vec![1, 2, 3, 4, 5, 6, 7];
        if self.calls_left > 0 {
            menu.extend([0, 0, 8]);
        }
        if self.branches_left > 0 && depth < 3 {
            menu.extend([9, 9]);
            if self.allow_loops && !in_loop {
                menu.push(10);
            }
        }
        menu.push(11);
        match *menu.choose(&mut self.rng).expect("menu is never empty") {
            0 => {
                self.calls_left -= 1;
                let callee = ALLOC_CALLEES.choose(&mut self.rng).unwrap();
                let arg = self.int_expr(scope);
                let name = self.fresh_ptr();
                self.push(depth, format!("int* {name} = {callee}({arg});"));
                scope.ptrs.push(name);
            }
            1 => {
                let init = if self.rng.gen_bool(0.5) {
                    "NULL".to_string()
                } else {
                    self.ptr_var(scope)
                };
                let name = self.fresh_ptr();
                self.push(depth, format!("int* {name} = {init};"));
                scope.ptrs.push(name);
            }
            2 => {
                let init = self.int_expr(scope);
                let name = self.fresh_int();
                self.push(depth, format!("int {name} = {init};"));
                scope.ints.push(name);
            }
            3 => {
                let ptr = self.ptr_var(scope);
                let value = self.int_expr(scope);
                self.push(depth, format!("*{ptr} = {value};"));
            }
            4 => {
                let ptr = self.ptr_var(scope);
                let name = self.fresh_int();
                self.push(depth, format!("int {name} = *{ptr};"));
                scope.ints.push(name);
            }
            5 => {
                let ptr = self.ptr_var(scope);
                if self.rng.gen_bool(0.5) {
                    let value = self.int_expr(scope);
                    self.push(depth, format!("{ptr}->len = {value};"));
                } else {
                    let name = self.fresh_int();
                    self.push(depth, format!("int {name} = {ptr}->len;"));
                    scope.ints.push(name);
                }
            }
            6 => {
                let target = self.ptr_var(scope);
                let value = if self.rng.gen_bool(0.5) {
                    "NULL".to_string()
                } else {
                    self.ptr_var(scope)
                };
                if target != value {
                    self.push(depth, format!("{target} = {value};"));
                } else {
                    self.push(depth, format!("{target} = NULL;"));
                }
            }
            7 => {
                let var = self.int_var(scope);
                let name = self.fresh_ptr();
                self.push(depth, format!("int* {name} = &{var};"));
                scope.ptrs.push(name);
            }
            8 => {
                self.calls_left -= 1;
                let callee = SINK_CALLEES.choose(&mut self.rng).unwrap();
                let arg = self.ptr_var(scope);
                self.push(depth, format!("{callee}({arg});"));
            }
            9 => {
                self.branches_left -= 1;
                let cond = self.cond(scope);
                self.push(depth, format!("if ({cond}) {{"));
                self.block(scope.clone(), depth + 1, in_loop, false);
                if self.rng.gen_bool(0.4) {
                    self.push(depth, "} else {".to_string());
                    self.block(scope.clone(), depth + 1, in_loop, false);
                }
                self.push(depth, "}".to_string());
            }
            10 => {
                self.branches_left -= 1;
                let cond = self.cond(scope);
                self.push(depth, format!("while ({cond}) {{"));
                self.block(scope.clone(), depth + 1, true, false);
                self.push(depth, "}".to_string());
            }
            _ => {
                let expr = self.int_expr(scope);
                self.push(depth, format!("return {expr};"));
                return true;
            }
        }
        false
    }

    fn cond(&mut self, scope: &Scope) -> String {
        match self.rng.gen_range(0..6) {
            0 => format!("!{}", self.ptr_var(scope)),
            1 => format!("{} == NULL", self.ptr_var(scope)),
            2 => format!("{} != NULL", self.ptr_var(scope)),
            3 => {
                let var = self.int_var(scope);
                let op = if self.rng.gen_bool(0.5) { "==" } else { "!=" };
                let lit = self.rng.gen_range(0..3);
                format!("{var} {op} {lit}")
            }
            4 if scope.ptrs.len() >= 2 => {
                let lhs = self.ptr_var(scope);
                let rhs = self.ptr_var(scope);
                format!("{lhs} == {rhs}")
            }
            _ => {
                if self.rng.gen_bool(0.5) {
                    self.ptr_var(scope)
                } else {
                    self.int_var(scope)
                }
            }
        }
    }

    fn int_expr(&mut self, scope: &Scope) -> String {
        match self.rng.gen_range(0..4) {
            0 => self.rng.gen_range(0..6).to_string(),
            1 => self.int_var(scope),
            2 => format!("*{}", self.ptr_var(scope)),
            _ => format!("{}->len", self.ptr_var(scope)),
        }
    }

    fn int_var(&mut self, scope: &Scope) -> String {
        scope.ints.choose(&mut self.rng).expect("`n` is always in scope").clone()
    }

    fn ptr_var(&mut self, scope: &Scope) -> String {
        scope.ptrs.choose(&mut self.rng).expect("`ext` is always in scope").clone()
    }

    fn fresh_int(&mut self) -> String {
        let name = format!("v{}", self.next_int);
        self.next_int += 1;
        name
    }

    fn fresh_ptr(&mut self) -> String {
        let name = format!("p{}", self.next_ptr);
        self.next_ptr += 1;
        name
    }

    fn push(&mut self, depth: usize, line: String) {
        self.lines.push(format!("{}{line}", "    ".repeat(depth)));
    }
}
