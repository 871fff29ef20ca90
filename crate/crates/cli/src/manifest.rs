use std::time::Instant;

use serde::Serialize;

/// Provenance block embedded in every JSON report (and written next to CSV
/// artifacts, which cannot carry it inline).
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_path: Option<String>,
    pub seed: Option<u64>,
    pub output_paths: Vec<String>,
    pub tool_version: String,
    pub duration_seconds: f64,
}

pub struct ManifestBuilder {
    subcommand: String,
    config_path: Option<String>,
    seed: Option<u64>,
    output_paths: Vec<String>,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            config_path: None,
            seed: None,
            output_paths: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn config_path(mut self, path: Option<&std::path::Path>) -> Self {
        self.config_path = path.map(|p| p.display().to_string());
        self
    }

    pub fn seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn output(mut self, path: Option<&std::path::Path>) -> Self {
        if let Some(p) = path {
            self.output_paths.push(p.display().to_string());
        }
        self
    }

    pub fn finish(self) -> RunManifest {
        RunManifest {
            subcommand: self.subcommand,
            config_path: self.config_path,
            seed: self.seed,
            output_paths: self.output_paths,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: self.started.elapsed().as_secs_f64(),
        }
    }
}
