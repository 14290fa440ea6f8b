//! Optional second opinion from an external Prover9 binary.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::config::ProverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProverOutcome {
    Proved,
    NotProved { timed_out: bool },
    Unavailable,
}

impl ProverOutcome {
    /// `Some(true/false)` for a definite answer.
    pub fn definite(self) -> Option<bool> {
        match self {
            ProverOutcome::Proved => Some(true),
            ProverOutcome::NotProved { timed_out: false } => Some(false),
            _ => None,
        }
    }
}

/// The configured binary, else `prover9` found on `PATH`.
pub fn discover(config: &ProverConfig) -> Option<PathBuf> {
    if let Some(b) = &config.binary {
        return b.is_file().then(|| b.clone());
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|d| d.join("prover9"))
        .find(|p| p.is_file())
}

/// Feeds `job` on standard input and waits at most `timeout`.
pub fn external_prove(job: &str, binary: &Path, timeout: Duration) -> ProverOutcome {
    let mut child = match Command::new(binary)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(_) => return ProverOutcome::Unavailable,
    };
    let mut stdin = child.stdin.take().expect("piped stdin");
    let job = job.to_owned();
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(job.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut out = String::new();
        let _ = stdout.read_to_string(&mut out);
        out
    });
    let start = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                let _ = writer.join();
                let _ = reader.join();
                return ProverOutcome::NotProved { timed_out: true };
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(_) => return ProverOutcome::Unavailable,
        }
    }
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    if out.contains("THEOREM PROVED") {
        ProverOutcome::Proved
    } else {
        ProverOutcome::NotProved { timed_out: false }
    }
}
