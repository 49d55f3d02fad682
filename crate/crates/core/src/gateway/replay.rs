//! Cassette replay: answers requests from a JSONL recording keyed by input
//! digest. Anything unrecorded is a hard error — replay runs must never
//! silently fall through to a different provider.

use super::{CassetteEntry, CompletionRequest, GatewayError, LlmProvider};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug)]
pub struct ReplayProvider {
    responses: BTreeMap<String, String>,
}

impl ReplayProvider {
    pub fn from_cassette(path: &Path) -> Result<ReplayProvider, GatewayError> {
        let entries = read_cassette(path)?;
        let mut responses = BTreeMap::new();
        for entry in entries {
            // Later recordings win, matching append-mode re-records.
            responses.insert(entry.digest, entry.response);
        }
        Ok(ReplayProvider { responses })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

pub fn read_cassette(path: &Path) -> Result<Vec<CassetteEntry>, GatewayError> {
    let text = std::fs::read_to_string(path)?;
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: CassetteEntry = serde_json::from_str(line).map_err(|e| {
            GatewayError::MalformedCassette { line: idx + 1, reason: e.to_string() }
        })?;
        entries.push(entry);
    }
    Ok(entries)
}

impl LlmProvider for ReplayProvider {
    fn id(&self) -> &str {
        "replay"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        self.responses.get(&request.bundle.inputs_digest).cloned().ok_or_else(|| {
            GatewayError::CassetteMiss {
                role: request.bundle.role,
                digest: request.bundle.inputs_digest.clone(),
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{render_prompt, Gateway, Role, RoleInputs, ScriptedProvider};

    fn npd_inputs() -> RoleInputs {
        let mut inputs = RoleInputs::new();
        inputs.insert("commit_message".to_string(), "fix".to_string());
        inputs.insert(
            "patch".to_string(),
            " int f(int n) {\n     int* p = get_buf(n);\n+    if (!p) {\n+        return -12;\n+    }\n     *p = n;\n".to_string(),
        );
        inputs
    }

    #[test]
    fn test_record_then_replay_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cassette = dir.path().join("run.jsonl");

        let mut recording =
            Gateway::new(Box::new(ScriptedProvider::new())).recording_to(&cassette);
        let recorded = recording.ask(Role::PatternAnalyst, npd_inputs()).unwrap();

        let mut replaying =
            Gateway::new(Box::new(ReplayProvider::from_cassette(&cassette).unwrap()));
        let replayed = replaying.ask(Role::PatternAnalyst, npd_inputs()).unwrap();
        assert_eq!(recorded, replayed);
        assert_eq!(replaying.provider_id(), "replay");
    }

    #[test]
    fn test_unrecorded_request_is_a_cassette_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cassette = dir.path().join("run.jsonl");
        let mut recording =
            Gateway::new(Box::new(ScriptedProvider::new())).recording_to(&cassette);
        recording.ask(Role::PatternAnalyst, npd_inputs()).unwrap();

        let provider = ReplayProvider::from_cassette(&cassette).unwrap();
        let mut other = npd_inputs();
        other.insert("patch".to_string(), "different".to_string());
        let bundle = render_prompt(Role::PatternAnalyst, &other);
        let err = provider
            .complete(&CompletionRequest { bundle, inputs: other })
            .unwrap_err();
        match err {
            GatewayError::CassetteMiss { role, .. } => assert_eq!(role, Role::PatternAnalyst),
            other => panic!("expected cassette miss, got {other:?}"),
        }
    }

    #[test]
    fn test_malformed_cassette_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let cassette = dir.path().join("bad.jsonl");
        std::fs::write(&cassette, "{\"digest\": \"d\", \"role\": \"planner\", \"response\": \"r\"}\nnot json\n").unwrap();
        let err = ReplayProvider::from_cassette(&cassette).unwrap_err();
        match err {
            GatewayError::MalformedCassette { line, .. } => assert_eq!(line, 2),
            other => panic!("expected malformed cassette, got {other:?}"),
        }
    }
}
