//! Chat-completions proposer over HTTP. Every exchange is appended to a JSONL transcript.

use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::prompts::SYSTEM;
use super::{EffectRequest, Proposer};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpConfig {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub key_env: String,
    pub temperature: f64,
    pub timeout_secs: f64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://localhost:8000/v1".into(),
            model: "default".into(),
            key_env: "PREDINV_API_KEY".into(),
            temperature: 0.2,
            timeout_secs: 120.0,
        }
    }
}

pub struct HttpProposer {
    cfg: HttpConfig,
    key: String,
    client: reqwest::blocking::Client,
    transcript: Option<PathBuf>,
}

impl HttpProposer {
    pub fn new(cfg: &HttpConfig, transcript: Option<PathBuf>) -> Result<Self> {
        let key = std::env::var(&cfg.key_env)
            .map_err(|_| Error::Config(format!("http proposer needs an API key in the environment variable {}", cfg.key_env)))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_secs))
            .build()
            .map_err(|e| Error::Transport(e.to_string()))?;
        Ok(Self { cfg: cfg.clone(), key, client, transcript })
    }

    fn log(&self, prompt: &str, reply: &std::result::Result<String, String>) -> Result<()> {
        let Some(path) = &self.transcript else { return Ok(()) };
        let line = match reply {
            Ok(r) => json!({"model": self.cfg.model, "prompt": prompt, "reply": r}),
            Err(e) => json!({"model": self.cfg.model, "prompt": prompt, "error": e}),
        };
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        writeln!(f, "{line}")?;
        Ok(())
    }

    fn chat(&mut self, prompt: &str) -> Result<String> {
        let url = format!("{}/chat/completions", self.cfg.endpoint.trim_end_matches('/'));
        let body = json!({
            "model": self.cfg.model,
            "temperature": self.cfg.temperature,
            "messages": [
                {"role": "system", "content": SYSTEM},
                {"role": "user", "content": prompt},
            ],
        });
        let reply = (|| {
            let resp = self.client.post(&url).bearer_auth(&self.key).json(&body).send().map_err(|e| e.to_string())?;
            let status = resp.status();
            if !status.is_success() {
                return Err(format!("{url} answered {status}"));
            }
            let v: serde_json::Value = resp.json().map_err(|e| format!("unreadable response body: {e}"))?;
            v["choices"][0]["message"]["content"]
                .as_str()
                .map(str::to_owned)
                .ok_or_else(|| "response has no choices[0].message.content".to_string())
        })();
        self.log(prompt, &reply)?;
        reply.map_err(Error::Transport)
    }
}

impl Proposer for HttpProposer {
    fn complete_partial_domain(&mut self, prompt: &str) -> Result<String> {
        self.chat(prompt)
    }

    fn propose_effects(&mut self, req: &EffectRequest) -> Result<String> {
        self.chat(req.prompt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read};
    use std::net::TcpListener;

    /// Serves the given (status, body) pairs, one connection each.
    fn serve(answers: Vec<(u16, String)>) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            for (status, body) in answers {
                let (mut s, _) = listener.accept().unwrap();
                let mut r = BufReader::new(s.try_clone().unwrap());
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    r.read_line(&mut line).unwrap();
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    if line == "\r\n" {
                        break;
                    }
                }
                let mut buf = vec![0; len];
                r.read_exact(&mut buf).unwrap();
                let msg = format!("HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}", body.len());
                std::io::Write::write_all(&mut s, msg.as_bytes()).unwrap();
            }
        });
        format!("http://{addr}/v1")
    }

    #[test]
    fn rate_limit_is_a_transport_error_then_success_is_logged() {
        let ok = json!({"choices": [{"message": {"content": "(predicate p (?a - t))"}}]}).to_string();
        let endpoint = serve(vec![(429, "{}".into()), (200, ok)]);
        std::env::set_var("PREDINV_TEST_KEY_HTTP", "k");
        let dir = tempfile::tempdir().unwrap();
        let cfg = HttpConfig { endpoint, key_env: "PREDINV_TEST_KEY_HTTP".into(), timeout_secs: 5.0, ..Default::default() };
        let mut p = HttpProposer::new(&cfg, Some(dir.path().join("t.jsonl"))).unwrap();
        assert!(matches!(p.complete_partial_domain("hi"), Err(Error::Transport(_))));
        assert_eq!(p.complete_partial_domain("hi").unwrap(), "(predicate p (?a - t))");
        let lines = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
        assert_eq!(lines.lines().count(), 2);
    }

    #[test]
    fn missing_key_names_the_variable() {
        let cfg = HttpConfig { key_env: "PREDINV_SURELY_UNSET_VAR".into(), ..Default::default() };
        let err = HttpProposer::new(&cfg, None).err().unwrap();
        assert!(matches!(&err, Error::Config(m) if m.contains("PREDINV_SURELY_UNSET_VAR")));
    }
}
