use serde::{Deserialize, Serialize};

/// Bug categories used to tag commits, patterns, and metrics rows.
///
/// The set is closed: aggregation tables always carry all ten rows, zeros
/// included, so runs of different corpora stay comparable.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BugCategory {
    #[serde(rename = "NPD")]
    NullPointerDereference,
    #[serde(rename = "Integer-Overflow")]
    IntegerOverflow,
    #[serde(rename = "Out-of-Bound")]
    OutOfBound,
    #[serde(rename = "Buffer-Overflow")]
    BufferOverflow,
    #[serde(rename = "Memory-Leak")]
    MemoryLeak,
    #[serde(rename = "Use-After-Free")]
    UseAfterFree,
    #[serde(rename = "Double-Free")]
    DoubleFree,
    #[serde(rename = "UBI")]
    UseBeforeInitialization,
    #[serde(rename = "Concurrency")]
    Concurrency,
    #[serde(rename = "Misuse")]
    Misuse,
}

impl BugCategory {
    /// All categories in their fixed presentation order.
    pub const ALL: [BugCategory; 10] = [
        BugCategory::NullPointerDereference,
        BugCategory::IntegerOverflow,
        BugCategory::OutOfBound,
        BugCategory::BufferOverflow,
        BugCategory::MemoryLeak,
        BugCategory::UseAfterFree,
        BugCategory::DoubleFree,
        BugCategory::UseBeforeInitialization,
        BugCategory::Concurrency,
        BugCategory::Misuse,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            BugCategory::NullPointerDereference => "NPD",
            BugCategory::IntegerOverflow => "Integer-Overflow",
            BugCategory::OutOfBound => "Out-of-Bound",
            BugCategory::BufferOverflow => "Buffer-Overflow",
            BugCategory::MemoryLeak => "Memory-Leak",
            BugCategory::UseAfterFree => "Use-After-Free",
            BugCategory::DoubleFree => "Double-Free",
            BugCategory::UseBeforeInitialization => "UBI",
            BugCategory::Concurrency => "Concurrency",
            BugCategory::Misuse => "Misuse",
        }
    }
}

impl std::fmt::Display for BugCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for BugCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BugCategory::ALL
            .iter()
            .copied()
            .find(|c| c.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown bug category `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_category_set_is_the_fixed_ten() {
        assert_eq!(BugCategory::ALL.len(), 10);
        let labels: Vec<_> = BugCategory::ALL.iter().map(|c| c.label()).collect();
        assert_eq!(
            labels,
            vec![
                "NPD",
                "Integer-Overflow",
                "Out-of-Bound",
                "Buffer-Overflow",
                "Memory-Leak",
                "Use-After-Free",
                "Double-Free",
                "UBI",
                "Concurrency",
                "Misuse"
            ]
        );
    }

    #[test]
    fn test_category_round_trips_through_labels() {
        for c in BugCategory::ALL {
            assert_eq!(c.label().parse::<BugCategory>().unwrap(), c);
        }
        assert!("Heisenbug".parse::<BugCategory>().is_err());
    }
}
