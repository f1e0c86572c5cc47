use chrono::{SecondsFormat, Utc};
use serde::Serialize;

/// Provenance echoed into every output: enough, with the binary, to rerun.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Resolved config with every default filled in.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub started: String,
    /// Unset while a streaming command is still running.
    pub finished: Option<String>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(subcommand: &str, config: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.into(),
            config: serde_json::to_value(config).expect("config serializes"),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            started: now(),
            finished: None,
        }
    }

    pub fn finish(mut self) -> Self {
        self.finished = Some(now());
        self
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("manifest serializes")
    }

    /// `# manifest: {...}` header for text outputs.
    pub fn comment_line(&self) -> String {
        format!("# manifest: {}", serde_json::to_string(self).expect("manifest serializes"))
    }
}
