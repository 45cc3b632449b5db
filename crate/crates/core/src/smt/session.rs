//! Incremental solver sessions speaking SMT-LIB v2 to a backend.

use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use super::{ProcessBackend, SolverModel, Sort, SortError, Term, Value, Var};
use crate::sexpr::{parse_one, SExpr};

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "DIVPLAN_SOLVER";

/// Extra time granted to the solver's own timeout before the process is
/// killed.
const KILL_GRACE: Duration = Duration::from_secs(2);

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("cannot start solver `{program}`: {source}")]
    Spawn {
        program: String,
        source: std::io::Error,
    },
    #[error("solver process died: {0}")]
    Crashed(String),
    #[error("solver reported an error: {0}")]
    Backend(String),
    #[error("unexpected solver output: {0}")]
    Protocol(String),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("model requested but the last check was not sat")]
    NoModel,
    #[error("solver model violates assertion #{index}")]
    UnsoundModel { index: usize },
    #[error("session is no longer usable after an earlier failure")]
    Dead,
}

/// Transport to a solver. `send` queues a command; `recv` waits for one
/// complete response (`None` on timeout).
pub trait Backend: Send {
    fn send(&mut self, cmd: &str) -> Result<(), SolverError>;
    fn recv(&mut self, timeout: Option<Duration>) -> Result<Option<String>, SolverError>;
    fn kill(&mut self);
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub memory_mb: Option<u64>,
    pub seed: Option<u64>,
    /// Wall-clock deadline shared by every check of every session made from
    /// this configuration.
    pub deadline: Option<Instant>,
    /// Re-evaluate all assertions against each returned model.
    pub verify_models: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            program: PathBuf::from("z3"),
            args: vec!["-in".into(), "-smt2".into()],
            memory_mb: None,
            seed: None,
            deadline: None,
            verify_models: true,
        }
    }
}

impl SolverConfig {
    /// Default configuration, with the program taken from `DIVPLAN_SOLVER`
    /// when set.
    pub fn from_env() -> Self {
        let mut c = SolverConfig::default();
        if let Some(p) = std::env::var_os(SOLVER_ENV) {
            if !p.is_empty() {
                c.program = PathBuf::from(p);
            }
        }
        c
    }

    pub fn with_timeout(mut self, t: Option<Duration>) -> Self {
        self.deadline = t.map(|t| Instant::now() + t);
        self
    }

    pub fn open(&self) -> Result<Session, SolverError> {
        let mut args = self.args.clone();
        if let Some(mb) = self.memory_mb {
            args.push(format!("-memory:{mb}"));
        }
        let backend = ProcessBackend::spawn(&self.program, &args)?;
        Session::new(Box::new(backend), self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckResult {
    Sat,
    Unsat,
    /// The solver gave up, usually because the budget ran out.
    Unknown(String),
}

pub struct Session {
    backend: Box<dyn Backend>,
    names: Vec<String>,
    sorts: Vec<Sort>,
    assertions: Vec<Term>,
    model: Option<SolverModel>,
    deadline: Option<Instant>,
    verify: bool,
    dead: bool,
    checks: usize,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("variables", &self.names.len())
            .field("assertions", &self.assertions.len())
            .finish()
    }
}

fn symbol(name: &str, id: usize) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert(0, 'v');
    }
    format!("{s}.{id}")
}

impl Session {
    pub fn new(mut backend: Box<dyn Backend>, cfg: &SolverConfig) -> Result<Self, SolverError> {
        backend.send("(set-option :print-success false)")?;
        backend.send("(set-option :produce-models true)")?;
        if let Some(seed) = cfg.seed {
            backend.send(&format!("(set-option :random-seed {seed})"))?;
        }
        Ok(Session {
            backend,
            names: Vec::new(),
            sorts: Vec::new(),
            assertions: Vec::new(),
            model: None,
            deadline: cfg.deadline,
            verify: cfg.verify_models,
            dead: false,
            checks: 0,
        })
    }

    pub fn declare(&mut self, name: &str, sort: Sort) -> Result<Var, SolverError> {
        self.alive()?;
        let v = Var(self.names.len());
        let sym = symbol(name, v.0);
        self.send(&format!("(declare-const {sym} {})", sort.smt()))?;
        self.names.push(sym);
        self.sorts.push(sort);
        Ok(v)
    }

    pub fn sort_of(&self, v: Var) -> Sort {
        self.sorts[v.0]
    }

    pub fn symbol_of(&self, v: Var) -> &str {
        &self.names[v.0]
    }

    pub fn variable_count(&self) -> usize {
        self.names.len()
    }

    pub fn assertion_count(&self) -> usize {
        self.assertions.len()
    }

    pub fn assertions(&self) -> &[Term] {
        &self.assertions
    }

    pub fn check_count(&self) -> usize {
        self.checks
    }

    pub fn deadline(&self) -> Option<Instant> {
        self.deadline
    }

    pub fn set_deadline(&mut self, d: Option<Instant>) {
        self.deadline = d;
    }

    /// Conjoin `f` to the session; it must be boolean.
    pub fn assert_formula(&mut self, f: Term) -> Result<(), SolverError> {
        self.alive()?;
        if f.sort(&self.sorts)? != Sort::Bool {
            return Err(SortError("asserted term is not boolean".into()).into());
        }
        if f == Term::Bool(true) {
            self.assertions.push(f);
            return Ok(());
        }
        let text = format!("(assert {})", f.to_smt(&self.names, &self.sorts));
        self.send(&text)?;
        self.assertions.push(f);
        self.model = None;
        Ok(())
    }

    /// Check satisfiability under the session deadline. On `Sat` the model
    /// is fetched (and verified) immediately.
    pub fn check_sat(&mut self) -> Result<CheckResult, SolverError> {
        self.alive()?;
        self.model = None;
        self.checks += 1;
        let wait = match self.deadline {
            Some(d) => {
                let left = d.saturating_duration_since(Instant::now());
                if left.is_zero() {
                    return Ok(CheckResult::Unknown("timeout".into()));
                }
                self.send(&format!("(set-option :timeout {})", left.as_millis().max(1)))?;
                Some(left + KILL_GRACE)
            }
            None => None,
        };
        self.send("(check-sat)")?;
        let Some(resp) = self.recv(wait)? else {
            self.backend.kill();
            self.dead = true;
            return Ok(CheckResult::Unknown("killed after wall-clock budget".into()));
        };
        let result = match resp.trim() {
            "sat" => CheckResult::Sat,
            "unsat" => return Ok(CheckResult::Unsat),
            "unknown" => {
                let reason = self.reason_unknown(wait).unwrap_or_else(|_| "unknown".into());
                return Ok(CheckResult::Unknown(reason));
            }
            other => return Err(self.fail(SolverError::Protocol(other.to_string()))),
        };
        let model = self.fetch_model(wait)?;
        if self.verify {
            for (index, a) in self.assertions.iter().enumerate() {
                if model.eval_bool(a) != Ok(true) {
                    return Err(SolverError::UnsoundModel { index });
                }
            }
        }
        self.model = Some(model);
        Ok(result)
    }

    /// Model of the last satisfiable check.
    pub fn get_model(&self) -> Result<&SolverModel, SolverError> {
        self.model.as_ref().ok_or(SolverError::NoModel)
    }

    fn reason_unknown(&mut self, wait: Option<Duration>) -> Result<String, SolverError> {
        self.send("(get-info :reason-unknown)")?;
        let resp = self.recv(wait)?.unwrap_or_default();
        Ok(match parse_one(&resp, false) {
            Ok(SExpr::List(items, _)) if items.len() == 2 => {
                items[1].as_atom().unwrap_or("unknown").trim_matches('"').to_string()
            }
            _ => resp.trim().to_string(),
        })
    }

    fn fetch_model(&mut self, wait: Option<Duration>) -> Result<SolverModel, SolverError> {
        let mut model = SolverModel::new();
        if self.names.is_empty() {
            return Ok(model);
        }
        let cmd = format!("(get-value ({}))", self.names.join(" "));
        self.send(&cmd)?;
        let Some(resp) = self.recv(wait)? else {
            self.backend.kill();
            self.dead = true;
            return Err(SolverError::Crashed("no reply to get-value".into()));
        };
        let parsed = parse_one(&resp, false).map_err(|e| self.fail(SolverError::Protocol(e.to_string())))?;
        let pairs = parsed.as_list().unwrap_or(&[]);
        if pairs.len() != self.names.len() {
            return Err(self.fail(SolverError::Protocol(format!(
                "get-value returned {} of {} values",
                pairs.len(),
                self.names.len()
            ))));
        }
        for (i, pair) in pairs.iter().enumerate() {
            let value = match pair.as_list() {
                Some([name, val]) if name.as_atom() == Some(self.names[i].as_str()) => Value::from_sexpr(val),
                _ => None,
            };
            let value = match (value, self.sorts[i]) {
                (Some(Value::Bool(b)), Sort::Bool) => Value::Bool(b),
                (Some(Value::Num(r)), Sort::Int) if r.is_integer() => Value::Num(r),
                (Some(Value::Num(r)), Sort::Real) => Value::Num(r),
                _ => return Err(self.fail(SolverError::Protocol(format!("bad model entry {pair}")))),
            };
            model.insert(Var(i), value);
        }
        Ok(model)
    }

    fn alive(&self) -> Result<(), SolverError> {
        if self.dead {
            Err(SolverError::Dead)
        } else {
            Ok(())
        }
    }

    fn fail(&mut self, e: SolverError) -> SolverError {
        self.dead = true;
        e
    }

    fn send(&mut self, cmd: &str) -> Result<(), SolverError> {
        self.backend.send(cmd).map_err(|e| {
            self.dead = true;
            e
        })
    }

    fn recv(&mut self, wait: Option<Duration>) -> Result<Option<String>, SolverError> {
        match self.backend.recv(wait) {
            Ok(Some(r)) if r.trim_start().starts_with("(error") => {
                let msg = match parse_one(&r, false) {
                    Ok(SExpr::List(items, _)) if items.len() == 2 => {
                        items[1].as_atom().unwrap_or("").trim_matches('"').to_string()
                    }
                    _ => r.trim().to_string(),
                };
                self.dead = true;
                Err(SolverError::Backend(msg))
            }
            Ok(r) => Ok(r),
            Err(e) => {
                self.dead = true;
                Err(e)
            }
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        if !self.dead {
            let _ = self.backend.send("(exit)");
        }
        self.backend.kill();
    }
}

/// In-process backend replaying canned responses; every command sent is
/// recorded. A scripted `Err` simulates a crash.
pub struct ScriptedBackend {
    responses: VecDeque<Result<String, String>>,
    log: Arc<Mutex<Vec<String>>>,
}

impl ScriptedBackend {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedBackend {
            responses: responses.into_iter().map(|s| Ok(s.into())).collect(),
            log: Arc::new(Mutex::new(Vec::new())),
        }
    }

    /// Append a crash after the scripted responses.
    pub fn then_crash(mut self, msg: &str) -> Self {
        self.responses.push_back(Err(msg.to_string()));
        self
    }

    /// Shared handle to the command log.
    pub fn log(&self) -> Arc<Mutex<Vec<String>>> {
        self.log.clone()
    }
}

impl Backend for ScriptedBackend {
    fn send(&mut self, cmd: &str) -> Result<(), SolverError> {
        self.log.lock().expect("log lock").push(cmd.to_string());
        Ok(())
    }

    fn recv(&mut self, _timeout: Option<Duration>) -> Result<Option<String>, SolverError> {
        match self.responses.pop_front() {
            Some(Ok(r)) => Ok(Some(r)),
            Some(Err(m)) => Err(SolverError::Crashed(m)),
            None => Err(SolverError::Crashed("script exhausted".into())),
        }
    }

    fn kill(&mut self) {}
}
