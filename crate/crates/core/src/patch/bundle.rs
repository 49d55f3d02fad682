use std::path::Path;

use serde::Deserialize;

use super::{parse_patch, PatchCommit, PatchError};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    category: Option<String>,
}

/// Loads a commit bundle directory: `message.txt`, `patch.diff`, and an
/// optional `meta.toml` with a `category` key. The directory name becomes the
/// commit id.
pub fn load_commit_bundle(dir: &Path) -> Result<PatchCommit, PatchError> {
    let read = |name: &str| -> Result<String, PatchError> {
        let path = dir.join(name);
        std::fs::read_to_string(&path).map_err(|source| PatchError::Io {
            path: path.display().to_string(),
            source,
        })
    };

    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unnamed".to_string());
    let message = read("message.txt")?.trim_end().to_string();
    let (_, diffs) = parse_patch(&read("patch.diff")?)?;

    let meta_path = dir.join("meta.toml");
    let category = if meta_path.exists() {
        let text = read("meta.toml")?;
        let meta: Meta = toml::from_str(&text).map_err(|e| PatchError::MalformedDiff {
            line: 0,
            reason: format!("bad meta.toml in `{id}`: {e}"),
        })?;
        match meta.category {
            Some(c) => Some(c.parse().map_err(|e| PatchError::MalformedDiff {
                line: 0,
                reason: format!("bad meta.toml in `{id}`: {e}"),
            })?),
            None => None,
        }
    } else {
        None
    };

    Ok(PatchCommit { id, message, diffs, category })
}
