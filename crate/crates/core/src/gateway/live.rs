//! The live provider: POSTs rendered prompts to an OpenAI-style chat
//! completion endpoint. Network and decoding problems surface as
//! `ProviderUnavailable`; nothing here retries, since the pipeline's own
//! iteration loops already absorb unlucky responses.

use super::{CompletionRequest, GatewayError, LlmProvider};
use serde::Deserialize;
use serde_json::json;

pub struct LiveProvider {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

impl LiveProvider {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api_key: Option<String>) -> LiveProvider {
        let agent = ureq::AgentBuilder::new()
            .timeout(std::time::Duration::from_secs(120))
            .build();
        LiveProvider { endpoint: endpoint.into(), model: model.into(), api_key, agent }
    }
}

impl LlmProvider for LiveProvider {
    fn id(&self) -> &str {
        "live"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": request.bundle.rendered_text}],
        });
        let mut call = self.agent.post(&self.endpoint).set("content-type", "application/json");
        if let Some(key) = &self.api_key {
            call = call.set("authorization", &format!("Bearer {key}"));
        }
        let response = call.send_json(body).map_err(|e| GatewayError::ProviderUnavailable {
            reason: e.to_string(),
        })?;
        let parsed: ChatResponse =
            response.into_json().map_err(|e| GatewayError::ProviderUnavailable {
                reason: format!("undecodable response: {e}"),
            })?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| GatewayError::ProviderUnavailable {
                reason: "response carried no choices".to_string(),
            })
    }
}
