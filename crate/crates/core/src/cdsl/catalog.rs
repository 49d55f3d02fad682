//! Documentation catalog for the checker language's built-in guards,
//! region expressions, and alias actions. The synthesis prompts embed this
//! table so generated checkers stick to the vocabulary the interpreter
//! actually implements.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuiltinDoc {
    pub name: &'static str,
    pub signature: &'static str,
    pub summary: &'static str,
}

static CATALOG: [BuiltinDoc; 9] = [
    BuiltinDoc {
        name: "callee_is",
        signature: "callee_is(\"name\")",
        summary: "guard on pre_call/post_call: the called function is exactly `name`",
    },
    BuiltinDoc {
        name: "arg_region",
        signature: "arg_region(index)",
        summary: "region of the zero-based call argument; fails the run if the index is out of bounds",
    },
    BuiltinDoc {
        name: "return_region",
        signature: "return_region",
        summary: "region holding the value a post_call returned",
    },
    BuiltinDoc {
        name: "base_region",
        signature: "base_region",
        summary: "on location events, the outermost object the access touches (fields stripped)",
    },
    BuiltinDoc {
        name: "null_test_on",
        signature: "null_test_on(var)",
        summary: "guard on branch_condition: passes when the condition tests a pointer against NULL and binds `var` to its region",
    },
    BuiltinDoc {
        name: "state_is",
        signature: "state_is(map, region, Tag)",
        summary: "guard on any event: the region currently carries `Tag` in `map`; an unbound variable on end_function matches every tagged region",
    },
    BuiltinDoc {
        name: "access_kind",
        signature: "access_kind(load|store)",
        summary: "guard on location events: the memory access reads or writes",
    },
    BuiltinDoc {
        name: "propagate_alias",
        signature: "propagate_alias(lhs, rhs)",
        summary: "action: record that two regions refer to the same object so state follows either name",
    },
    BuiltinDoc {
        name: "mark_all_aliases",
        signature: "mark_all_aliases(map, region, Tag)",
        summary: "action: tag the region's whole alias class in `map`",
    },
];

pub fn builtin_catalog() -> &'static [BuiltinDoc; 9] {
    &CATALOG
}

/// Renders the catalog as a markdown table for prompt embedding.
pub fn catalog_markdown() -> String {
    let mut out = String::from("| builtin | signature | meaning |\n|---|---|---|\n");
    for doc in builtin_catalog() {
        out.push_str(&format!("| {} | `{}` | {} |\n", doc.name, doc.signature, doc.summary));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_catalog_is_fixed_and_ordered() {
        let names: Vec<&str> = builtin_catalog().iter().map(|d| d.name).collect();
        assert_eq!(
            names,
            [
                "callee_is",
                "arg_region",
                "return_region",
                "base_region",
                "null_test_on",
                "state_is",
                "access_kind",
                "propagate_alias",
                "mark_all_aliases",
            ]
        );
    }

    #[test]
    fn test_markdown_table_has_one_row_per_builtin() {
        let table = catalog_markdown();
        assert_eq!(table.lines().count(), 2 + 9);
        assert!(table.contains("| state_is | `state_is(map, region, Tag)` |"));
    }
}
