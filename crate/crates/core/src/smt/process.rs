//! Solver subprocess: commands go to stdin, a reader thread splits stdout
//! into balanced responses.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use super::session::{Backend, SolverError};
use crate::sexpr::ParenScanner;

enum Msg {
    Response(String),
    Eof,
}

pub struct ProcessBackend {
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    rx: Receiver<Msg>,
    stderr: Arc<Mutex<String>>,
}

impl ProcessBackend {
    pub fn spawn(program: &Path, args: &[String]) -> Result<Self, SolverError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| SolverError::Spawn {
                program: program.display().to_string(),
                source,
            })?;
        let stdout = child.stdout.take().expect("piped stdout");
        let mut err_pipe = child.stderr.take().expect("piped stderr");
        let stdin = child.stdin.take().map(BufWriter::new);
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            let mut buf = String::new();
            let mut scan = ParenScanner::default();
            let mut line = String::new();
            loop {
                line.clear();
                match reader.read_line(&mut line) {
                    Ok(0) | Err(_) => {
                        let _ = tx.send(Msg::Eof);
                        return;
                    }
                    Ok(_) => {}
                }
                if buf.is_empty() && line.trim().is_empty() {
                    continue;
                }
                buf.push_str(&line);
                scan.feed(&line);
                if scan.depth() <= 0 {
                    scan = ParenScanner::default();
                    if tx.send(Msg::Response(std::mem::take(&mut buf))).is_err() {
                        return;
                    }
                }
            }
        });
        let stderr = Arc::new(Mutex::new(String::new()));
        let sink = stderr.clone();
        thread::spawn(move || {
            let mut s = String::new();
            let _ = err_pipe.read_to_string(&mut s);
            if let Ok(mut g) = sink.lock() {
                g.push_str(&s);
            }
        });
        Ok(ProcessBackend {
            child,
            stdin,
            rx,
            stderr,
        })
    }

    fn death_note(&mut self) -> String {
        let status = self
            .child
            .try_wait()
            .ok()
            .flatten()
            .map(|s| s.to_string())
            .unwrap_or_else(|| "closed its output".into());
        let err = self.stderr.lock().map(|s| s.trim().to_string()).unwrap_or_default();
        if err.is_empty() {
            status
        } else {
            format!("{status}: {err}")
        }
    }
}

impl Backend for ProcessBackend {
    fn send(&mut self, cmd: &str) -> Result<(), SolverError> {
        let Some(w) = self.stdin.as_mut() else {
            return Err(SolverError::Crashed("stdin closed".into()));
        };
        if w.write_all(cmd.as_bytes()).and_then(|_| w.write_all(b"\n")).is_err() {
            let note = self.death_note();
            return Err(SolverError::Crashed(note));
        }
        Ok(())
    }

    fn recv(&mut self, timeout: Option<Duration>) -> Result<Option<String>, SolverError> {
        if let Some(w) = self.stdin.as_mut() {
            if w.flush().is_err() {
                let note = self.death_note();
                return Err(SolverError::Crashed(note));
            }
        }
        let msg = match timeout {
            Some(t) => match self.rx.recv_timeout(t) {
                Ok(m) => m,
                Err(RecvTimeoutError::Timeout) => return Ok(None),
                Err(RecvTimeoutError::Disconnected) => Msg::Eof,
            },
            None => self.rx.recv().unwrap_or(Msg::Eof),
        };
        match msg {
            Msg::Response(r) => Ok(Some(r)),
            Msg::Eof => {
                let _ = self.child.wait();
                // Give the stderr thread a moment to drain.
                thread::sleep(Duration::from_millis(20));
                let note = self.death_note();
                Err(SolverError::Crashed(note))
            }
        }
    }

    fn kill(&mut self) {
        if let Some(mut w) = self.stdin.take() {
            let _ = w.flush();
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
