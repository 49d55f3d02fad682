use crate::span::SourceSpan;
use serde::{Deserialize, Serialize};

/// Identity of a symbolic value conjured during exploration. Ids are unique
/// within one engine run.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolId(pub u32);

/// Where a symbol came from; kept for trace notes and debugging.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymbolOrigin {
    /// Return value of an opaque call.
    Call { callee: String, span: SourceSpan },
    /// Lazily materialized by a load from untouched memory.
    Load { span: SourceSpan },
    /// Initial value of a function parameter.
    Param { name: String, span: SourceSpan },
}

/// A memory region.
///
/// `Var` is a named local or parameter; `Sym` is the opaque block of memory a
/// symbolic pointer refers to; `Field` is a named field inside another
/// region. Field chains never nest more than two levels because the language
/// only dereferences fields through a bare name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    Var { func: String, name: String },
    Sym(SymbolId),
    Field { parent: Box<Region>, field: String },
}

impl Region {
    pub fn var(func: &str, name: &str) -> Region {
        Region::Var { func: func.to_string(), name: name.to_string() }
    }

    pub fn field(parent: Region, field: &str) -> Region {
        Region::Field { parent: Box::new(parent), field: field.to_string() }
    }

    /// Strips field layers: the base of `obj->f` is `obj`.
    pub fn base(&self) -> &Region {
        match self {
            Region::Field { parent, .. } => parent.base(),
            other => other,
        }
    }

    pub fn field_depth(&self) -> usize {
        match self {
            Region::Field { parent, .. } => 1 + parent.field_depth(),
            _ => 0,
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::Var { name, .. } => write!(f, "{name}"),
            Region::Sym(id) => write!(f, "obj{}", id.0),
            Region::Field { parent, field } => write!(f, "{parent}->{field}"),
        }
    }
}

/// A value flowing through the engine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolicValue {
    Concrete(i64),
    Null,
    Symbol { id: SymbolId, origin: SymbolOrigin },
    Unknown,
    RegionAddress(Region),
}

impl SymbolicValue {
    /// The region a value designates, if any: a symbolic pointer designates
    /// the memory it points at, an address designates its region. Plain
    /// integers, NULL, and unknowns designate nothing.
    pub fn region(&self) -> Option<Region> {
        match self {
            SymbolicValue::Symbol { id, .. } => Some(Region::Sym(*id)),
            SymbolicValue::RegionAddress(r) => Some(r.clone()),
            _ => None,
        }
    }
}
