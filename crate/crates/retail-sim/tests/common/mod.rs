#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use retail_sim::gateway::{serve_blocking, GameService};
use retail_sim::harness::store::SessionStore;
use serde_json::Value;

pub struct Gateway {
    pub base: String,
    pub dir: tempfile::TempDir,
    agent: ureq::Agent,
}

impl Gateway {
    pub fn start(idle: Duration, assets: Option<PathBuf>) -> Gateway {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path().join("sessions")).unwrap();
        let svc = Arc::new(GameService::new(store, idle));
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let base = format!("http://{}/v1", listener.local_addr().unwrap());
        std::thread::spawn(move || serve_blocking(listener, svc, assets));
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Gateway { base, dir, agent }
    }

    fn finish(resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> (u16, Value) {
        let resp = resp.unwrap();
        let status = resp.status().as_u16();
        let text = resp.into_body().read_to_string().unwrap();
        (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }

    pub fn get(&self, path: &str) -> (u16, Value) {
        Self::finish(self.agent.get(&format!("{}{path}", self.base)).call())
    }

    pub fn get_raw(&self, url: &str) -> (u16, String) {
        let resp = self.agent.get(url).call().unwrap();
        let status = resp.status().as_u16();
        (status, resp.into_body().read_to_string().unwrap())
    }

    pub fn post(&self, path: &str, body: &Value) -> (u16, Value) {
        self.post_text(path, &body.to_string())
    }

    pub fn post_text(&self, path: &str, body: &str) -> (u16, Value) {
        Self::finish(
            self.agent.post(&format!("{}{path}", self.base)).header("Content-Type", "application/json").send(body),
        )
    }
}
