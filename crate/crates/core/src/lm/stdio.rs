use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use super::protocol::{decode_line, ReplyCollector, ScoreRequest};
use super::{check_texts, LmError, LmScore, LmScorer};

const STDERR_TAIL_LINES: usize = 20;

/// Scorer process spoken to over stdin/stdout, one JSON object per line.
///
/// The command runs under `sh -c`. The process is spawned lazily, reused
/// across calls, and killed and respawned after a timeout or transport
/// failure. Writes are serialized per scorer; replies are matched by id.
pub struct StdioScorer {
    command: String,
    timeout: Duration,
    retries: u32,
    next_id: AtomicU64,
    process: Mutex<Option<ScorerProcess>>,
}

struct ScorerProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    stderr_tail: Arc<Mutex<VecDeque<String>>>,
}

impl ScorerProcess {
    fn spawn(command: &str) -> Result<Self, String> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| format!("cannot spawn scorer: {e}"))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let stderr = child.stderr.take().expect("piped stderr");

        let (tx, lines) = channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let stderr_tail = Arc::new(Mutex::new(VecDeque::new()));
        let tail = stderr_tail.clone();
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stderr);
            let mut buf = Vec::new();
            loop {
                buf.clear();
                match reader.by_ref().take(64 * 1024).read_until(b'\n', &mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(_) => {
                        let mut t = tail.lock().unwrap_or_else(|e| e.into_inner());
                        if t.len() == STDERR_TAIL_LINES {
                            t.pop_front();
                        }
                        t.push_back(String::from_utf8_lossy(&buf).trim_end().to_owned());
                    }
                }
            }
        });
        Ok(ScorerProcess {
            child,
            stdin,
            lines,
            stderr_tail,
        })
    }

    /// Recent stderr output and exit status, for error messages.
    fn diagnostics(&mut self) -> String {
        let mut out = String::new();
        if let Ok(Some(status)) = self.child.try_wait() {
            out.push_str(&format!("scorer exited with {status}"));
        }
        // Give the stderr reader a moment to catch up with a dying process.
        std::thread::sleep(Duration::from_millis(20));
        let tail = self.stderr_tail.lock().unwrap_or_else(|e| e.into_inner());
        if !tail.is_empty() {
            if !out.is_empty() {
                out.push_str("; ");
            }
            out.push_str("stderr: ");
            out.push_str(&tail.iter().cloned().collect::<Vec<_>>().join(" | "));
        }
        out
    }

    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for StdioScorer {
    fn drop(&mut self) {
        let slot = self.process.get_mut().unwrap_or_else(|e| e.into_inner());
        if let Some(p) = slot.take() {
            p.kill();
        }
    }
}

enum Failure {
    /// Worth retrying on a fresh process.
    Transient(LmError),
    Fatal(LmError),
}

impl StdioScorer {
    pub fn new(command: impl Into<String>, timeout: Duration, retries: u32) -> Self {
        StdioScorer {
            command: command.into(),
            timeout,
            retries,
            next_id: AtomicU64::new(0),
            process: Mutex::new(None),
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn attempt(&self, slot: &mut Option<ScorerProcess>, texts: &[&str]) -> Result<Vec<LmScore>, Failure> {
        if slot.is_none() {
            let p = ScorerProcess::spawn(&self.command).map_err(|message| {
                Failure::Transient(LmError::Transport {
                    endpoint: self.command.clone(),
                    message,
                })
            })?;
            *slot = Some(p);
        }
        let proc = slot.as_mut().expect("process present");
        let transport = |proc: &mut ScorerProcess, what: String| {
            let diag = proc.diagnostics();
            Failure::Transient(LmError::Transport {
                endpoint: self.command.clone(),
                message: if diag.is_empty() {
                    what
                } else {
                    format!("{what} ({diag})")
                },
            })
        };

        let ids: Vec<String> = texts
            .iter()
            .map(|_| self.next_id.fetch_add(1, Ordering::Relaxed).to_string())
            .collect();
        let mut payload = String::new();
        for (id, text) in ids.iter().zip(texts) {
            let req = ScoreRequest { id: id.clone(), text };
            payload.push_str(&serde_json::to_string(&req).expect("request serializes"));
            payload.push('\n');
        }
        if let Err(e) = proc
            .stdin
            .write_all(payload.as_bytes())
            .and_then(|()| proc.stdin.flush())
        {
            return Err(transport(proc, format!("write failed: {e}")));
        }

        let mut collector = ReplyCollector::new(&ids);
        while !collector.is_complete() {
            let started = Instant::now();
            let line = match proc.lines.recv_timeout(self.timeout) {
                Ok(line) => line,
                Err(RecvTimeoutError::Timeout) => {
                    return Err(Failure::Transient(LmError::Timeout {
                        endpoint: self.command.clone(),
                        after: started.elapsed(),
                    }))
                }
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(transport(proc, "scorer closed its output".to_owned()));
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let reply = decode_line(&line).map_err(Failure::Fatal)?;
            collector.accept(reply, &line).map_err(Failure::Fatal)?;
        }
        collector.finish().map_err(Failure::Fatal)
    }
}

impl LmScorer for StdioScorer {
    fn score_batch(&self, texts: &[&str]) -> Result<Vec<LmScore>, LmError> {
        check_texts(texts)?;
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let mut slot = self.process.lock().unwrap_or_else(|e| e.into_inner());
        let mut attempt = 0;
        loop {
            match self.attempt(&mut slot, texts) {
                Ok(scores) => return Ok(scores),
                // The stream is still in sync after a scorer-side error reply.
                Err(Failure::Fatal(e @ LmError::Scorer { .. })) => return Err(e),
                Err(Failure::Fatal(e)) => {
                    // Unknown stream state: start fresh next time.
                    if let Some(p) = slot.take() {
                        p.kill();
                    }
                    return Err(e);
                }
                Err(Failure::Transient(e)) => {
                    if let Some(p) = slot.take() {
                        p.kill();
                    }
                    if attempt >= self.retries {
                        return Err(e.after_attempts(attempt + 1));
                    }
                    log::warn!("scorer {:?}: {e}; retrying", self.command);
                    attempt += 1;
                }
            }
        }
    }

    fn name(&self) -> String {
        format!("stdio:{}", self.command)
    }
}
