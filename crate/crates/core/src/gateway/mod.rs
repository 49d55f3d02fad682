//! The agent gateway: every request a pipeline stage makes to a language
//! model goes through here as a (role, inputs) pair. The gateway renders the
//! role's prompt, digests the inputs, asks the configured provider, and logs
//! a transcript entry.
//!
//! Three providers cover the lifecycle. `scripted` answers from fixed rules
//! and keeps the whole system hermetic; `replay` answers from a recorded
//! cassette and fails loudly on anything unrecorded; `live` talks to a real
//! HTTP endpoint. Record mode wraps any provider and appends each exchange
//! to a cassette so a live run can be replayed bit-for-bit later.

mod live;
mod prompt;
mod replay;
mod scripted;

pub use live::LiveProvider;
pub use prompt::render_prompt;
pub use replay::{read_cassette, ReplayProvider};
pub use scripted::{RefinerMode, ScriptedProvider};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// The pipeline stages that consult a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    PatternAnalyst,
    Planner,
    Implementer,
    SyntaxRepairer,
    TriageAnalyst,
    Refiner,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::PatternAnalyst => "pattern_analyst",
            Role::Planner => "planner",
            Role::Implementer => "implementer",
            Role::SyntaxRepairer => "syntax_repairer",
            Role::TriageAnalyst => "triage_analyst",
            Role::Refiner => "refiner",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Named inputs for one request. Keys are role-specific ("patch",
/// "checker", "diagnostics", ...); the map form keeps digests stable under
/// reordering.
pub type RoleInputs = BTreeMap<String, String>;

/// A rendered prompt plus the digest that identifies the request.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub role: Role,
    pub rendered_text: String,
    pub inputs_digest: String,
}

/// Digest over the role and every input, NUL-framed so neither keys nor
/// values can collide across boundaries.
pub fn inputs_digest(role: Role, inputs: &RoleInputs) -> String {
    let mut hasher = Sha256::new();
    hasher.update(role.as_str().as_bytes());
    hasher.update([0]);
    for (key, value) in inputs {
        hasher.update(key.as_bytes());
        hasher.update([0]);
        hasher.update(value.as_bytes());
        hasher.update([0]);
    }
    hex::encode(hasher.finalize())
}

/// What a provider sees. Scripted answers work from the structured inputs;
/// replay keys off the digest; live sends the rendered text.
#[derive(Clone, Debug)]
pub struct CompletionRequest {
    pub bundle: PromptBundle,
    pub inputs: RoleInputs,
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("no recorded response for {role} request {digest}")]
    CassetteMiss { role: Role, digest: String },
    #[error("cassette line {line} is malformed: {reason}")]
    MalformedCassette { line: usize, reason: String },
    #[error("provider unavailable: {reason}")]
    ProviderUnavailable { reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub trait LlmProvider: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError>;
}

/// One gateway exchange, as persisted in `transcript.jsonl`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub digest: String,
    pub role: Role,
    pub provider: String,
    pub response: String,
    pub at_epoch_ms: u64,
}

/// A recorded exchange in a cassette file: enough to replay the response
/// for an identical request.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub digest: String,
    pub role: Role,
    pub response: String,
}

pub struct Gateway {
    provider: Box<dyn LlmProvider>,
    record_to: Option<PathBuf>,
    transcript: Vec<TranscriptEntry>,
}

impl Gateway {
    pub fn new(provider: Box<dyn LlmProvider>) -> Gateway {
        Gateway { provider, record_to: None, transcript: Vec::new() }
    }

    /// Appends every exchange to a cassette at `path`, creating it on first
    /// use, so the run can later be replayed without the original provider.
    pub fn recording_to(mut self, path: impl Into<PathBuf>) -> Gateway {
        self.record_to = Some(path.into());
        self
    }

    pub fn provider_id(&self) -> &str {
        self.provider.id()
    }

    pub fn ask(&mut self, role: Role, inputs: RoleInputs) -> Result<String, GatewayError> {
        let bundle = render_prompt(role, &inputs);
        let digest = bundle.inputs_digest.clone();
        let request = CompletionRequest { bundle, inputs };
        let response = self.provider.complete(&request)?;
        if let Some(path) = &self.record_to {
            append_cassette_entry(
                path,
                &CassetteEntry { digest: digest.clone(), role, response: response.clone() },
            )?;
        }
        self.transcript.push(TranscriptEntry {
            digest,
            role,
            provider: self.provider.id().to_string(),
            response: response.clone(),
            at_epoch_ms: epoch_ms(),
        });
        Ok(response)
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// Writes the transcript so far as JSONL and clears the buffer, so one
    /// gateway can serve several commits with per-commit transcripts.
    pub fn drain_transcript_to(&mut self, path: &Path) -> Result<(), GatewayError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut out = String::new();
        for entry in &self.transcript {
            out.push_str(&serde_json::to_string(entry).expect("transcript entries serialize"));
            out.push('\n');
        }
        std::fs::write(path, out)?;
        self.transcript.clear();
        Ok(())
    }
}

fn append_cassette_entry(path: &Path, entry: &CassetteEntry) -> Result<(), GatewayError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let line = serde_json::to_string(entry).expect("cassette entries serialize");
    writeln!(file, "{line}")?;
    Ok(())
}

fn epoch_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Parses the `key: value` header block that structured responses open
/// with; the block ends at the first blank or non-matching line.
pub fn parse_front_matter(text: &str) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            break;
        }
        let Some((key, value)) = line.split_once(':') else {
            break;
        };
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            break;
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    out
}
