//! Isolated execution of a candidate program with its unit tests.
//!
//! Each run writes the program and tests into a fresh temp directory,
//! executes them under the configured interpreter with a wall-clock
//! timeout, and maps the outcome onto pass / fail / timeout / error:
//! assertion failures are `fail`, everything else non-zero (syntax
//! errors, crashes, missing imports) is `error`. On timeout the whole
//! process group is killed so no child survives the call.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::util::Semaphore;

/// Where a run executes. Only fresh temp directories are supported; the
/// enum leaves room for retained workspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkdirPolicy {
    FreshTempdir,
}

/// One program + test execution order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRequest {
    pub program: String,
    pub test_code: String,
    pub timeout: Duration,
    pub interpreter_command: Vec<String>,
    pub workdir_policy: WorkdirPolicy,
}

impl ExecutionRequest {
    pub fn validate(&self) -> Result<(), SandboxError> {
        if self.timeout.is_zero() {
            return Err(SandboxError::InvalidRequest("timeout must be positive"));
        }
        if self.interpreter_command.is_empty() {
            return Err(SandboxError::InvalidRequest(
                "interpreter_command must be non-empty",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecStatus {
    Pass,
    Fail,
    Timeout,
    Error,
}

/// Outcome of one sandboxed run. Output excerpts are capped; they never
/// grow unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub status: ExecStatus,
    pub exit_code: Option<i32>,
    pub stdout_excerpt: String,
    pub stderr_excerpt: String,
    pub duration: Duration,
}

#[derive(Debug, Error)]
pub enum SandboxError {
    #[error("interpreter not available: {command:?}")]
    InterpreterMissing { command: String },
    #[error("failed to spawn interpreter: {0}")]
    Spawn(std::io::Error),
    #[error("sandbox io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid execution request: {0}")]
    InvalidRequest(&'static str),
}

/// Shared run parameters: interpreter, timeout, output caps, and the
/// process budget bounding concurrent executions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandboxDefaults {
    pub interpreter_command: Vec<String>,
    pub timeout: Duration,
    pub output_cap_bytes: usize,
    pub process_budget: usize,
    /// When set, per-run artifacts (program, outputs) are retained here.
    pub debug_dir: Option<PathBuf>,
}

impl Default for SandboxDefaults {
    fn default() -> Self {
        Self {
            interpreter_command: vec!["python3".into()],
            timeout: Duration::from_secs(10),
            output_cap_bytes: 4096,
            process_budget: 4,
            debug_dir: None,
        }
    }
}

/// Test-execution sandbox. Construction probes the interpreter once; runs
/// are safe to issue from multiple threads and are bounded by the process
/// budget.
#[derive(Debug)]
pub struct Sandbox {
    defaults: SandboxDefaults,
    permits: Semaphore,
}

static RUN_COUNTER: AtomicU64 = AtomicU64::new(0);

impl Sandbox {
    pub fn new(defaults: SandboxDefaults) -> Result<Self, SandboxError> {
        let command = defaults
            .interpreter_command
            .first()
            .ok_or(SandboxError::InvalidRequest(
                "interpreter_command must be non-empty",
            ))?;
        let available = Command::new(command)
            .arg("--version")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .map(|s| s.success())
            .unwrap_or(false);
        if !available {
            return Err(SandboxError::InterpreterMissing {
                command: command.clone(),
            });
        }
        let budget = defaults.process_budget.max(1);
        Ok(Self {
            defaults,
            permits: Semaphore::new(budget),
        })
    }

    pub fn defaults(&self) -> &SandboxDefaults {
        &self.defaults
    }

    /// Builds a request for `program` + `test_code` from the defaults.
    pub fn request(&self, program: impl Into<String>, test_code: impl Into<String>) -> ExecutionRequest {
        ExecutionRequest {
            program: program.into(),
            test_code: test_code.into(),
            timeout: self.defaults.timeout,
            interpreter_command: self.defaults.interpreter_command.clone(),
            workdir_policy: WorkdirPolicy::FreshTempdir,
        }
    }

    /// Runs the program and its tests in a fresh temp directory under the
    /// request's timeout. Exit 0 maps to pass, an assertion failure to
    /// fail, a wall-clock overrun to timeout (process group killed), and
    /// anything else to error.
    pub fn run_tests(&self, request: &ExecutionRequest) -> Result<ExecutionResult, SandboxError> {
        request.validate()?;
        let _permit = self.permits.acquire();

        let workdir = tempfile::tempdir()?;
        let source = format!("{}\n\n{}\n", request.program, request.test_code);
        let main_path = workdir.path().join("main.py");
        fs::write(&main_path, &source)?;

        let mut command = Command::new(&request.interpreter_command[0]);
        command
            .args(&request.interpreter_command[1..])
            .arg(&main_path)
            .current_dir(workdir.path())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        #[cfg(unix)]
        {
            use std::os::unix::process::CommandExt;
            // Own process group, so a timeout can kill the whole tree.
            command.process_group(0);
        }

        let start = Instant::now();
        let mut child = command.spawn().map_err(SandboxError::Spawn)?;
        let child_id = child.id();

        let mut stdout_pipe = child.stdout.take().expect("stdout piped");
        let mut stderr_pipe = child.stderr.take().expect("stderr piped");
        let stdout_reader = std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stdout_pipe.read_to_end(&mut buf);
            buf
        });
        let stderr_reader = std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stderr_pipe.read_to_end(&mut buf);
            buf
        });

        let mut timed_out = false;
        let exit_status = loop {
            if let Some(status) = child.try_wait()? {
                break Some(status);
            }
            if start.elapsed() >= request.timeout {
                timed_out = true;
                kill_process_group(child_id);
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            std::thread::sleep(Duration::from_millis(5));
        };
        let duration = start.elapsed();

        let stdout = stdout_reader.join().unwrap_or_default();
        let stderr = stderr_reader.join().unwrap_or_default();
        let stdout_excerpt = excerpt(&stdout, self.defaults.output_cap_bytes);
        let stderr_excerpt = excerpt(&stderr, self.defaults.output_cap_bytes);

        let (status, exit_code) = match exit_status {
            None => {
                debug_assert!(timed_out);
                (ExecStatus::Timeout, None)
            }
            Some(s) => {
                let code = s.code();
                match code {
                    Some(0) => (ExecStatus::Pass, code),
                    Some(_) if stderr_excerpt.contains("AssertionError") => {
                        (ExecStatus::Fail, code)
                    }
                    _ => (ExecStatus::Error, code),
                }
            }
        };

        if let Some(debug_dir) = &self.defaults.debug_dir {
            let run_id = RUN_COUNTER.fetch_add(1, Ordering::Relaxed);
            let dir = debug_dir.join(format!("run-{run_id:06}"));
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("main.py"), &source)?;
            fs::write(dir.join("stdout.txt"), &stdout)?;
            fs::write(dir.join("stderr.txt"), &stderr)?;
            fs::write(
                dir.join("status.txt"),
                format!("{status:?} exit={exit_code:?} duration={duration:?}\n"),
            )?;
        }

        Ok(ExecutionResult {
            status,
            exit_code,
            stdout_excerpt,
            stderr_excerpt,
            duration,
        })
    }
}

#[cfg(unix)]
fn kill_process_group(child_id: u32) {
    // The child was made its own process-group leader at spawn.
    unsafe {
        libc::kill(-(child_id as i32), libc::SIGKILL);
    }
}

#[cfg(not(unix))]
fn kill_process_group(_child_id: u32) {}

/// UTF-8-safe truncation to `cap` bytes with a marker when cut.
fn excerpt(bytes: &[u8], cap: usize) -> String {
    let text = String::from_utf8_lossy(bytes);
    if text.len() <= cap {
        return text.into_owned();
    }
    let mut end = cap;
    while end > 0 && !text.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}… [truncated at {cap} bytes]", &text[..end])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sandbox() -> Sandbox {
        Sandbox::new(SandboxDefaults {
            timeout: Duration::from_secs(5),
            ..SandboxDefaults::default()
        })
        .expect("python3 available")
    }

    #[test]
    fn passing_program() {
        let sb = sandbox();
        let result = sb
            .run_tests(&sb.request("def f():\n    return 3", "assert f() == 3"))
            .unwrap();
        assert_eq!(result.status, ExecStatus::Pass);
        assert_eq!(result.exit_code, Some(0));
    }

    #[test]
    fn failing_assertion() {
        let sb = sandbox();
        let result = sb
            .run_tests(&sb.request("def f():\n    return 3", "assert f() == 4"))
            .unwrap();
        assert_eq!(result.status, ExecStatus::Fail);
        assert_ne!(result.exit_code, Some(0));
        assert!(result.stderr_excerpt.contains("AssertionError"));
    }

    #[test]
    fn syntax_error_is_error_not_fail() {
        let sb = sandbox();
        let result = sb
            .run_tests(&sb.request("def f(:\n    pass", "assert True"))
            .unwrap();
        assert_eq!(result.status, ExecStatus::Error);
    }

    #[test]
    fn runtime_exception_is_error() {
        let sb = sandbox();
        let result = sb
            .run_tests(&sb.request("def f():\n    return [][1]", "f()"))
            .unwrap();
        assert_eq!(result.status, ExecStatus::Error);
        assert!(result.stderr_excerpt.contains("IndexError"));
    }

    #[test]
    fn hang_times_out_within_budget() {
        let sb = Sandbox::new(SandboxDefaults {
            timeout: Duration::from_secs(2),
            ..SandboxDefaults::default()
        })
        .unwrap();
        let request = sb.request("def f():\n    while True:\n        pass", "f()");
        let start = Instant::now();
        let result = sb.run_tests(&request).unwrap();
        assert_eq!(result.status, ExecStatus::Timeout);
        assert!(result.duration >= Duration::from_secs(2));
        assert!(start.elapsed() < Duration::from_secs(4), "grace exceeded");
        assert_eq!(result.exit_code, None);
    }

    #[cfg(unix)]
    #[test]
    fn no_child_survives_timeout() {
        let pid_dir = tempfile::tempdir().unwrap();
        let pid_file = pid_dir.path().join("grandchild.pid");
        let sb = Sandbox::new(SandboxDefaults {
            timeout: Duration::from_secs(1),
            ..SandboxDefaults::default()
        })
        .unwrap();
        // The program starts a long-lived grandchild, records its pid, and
        // then hangs until the sandbox kills the group.
        let program = format!(
            "import subprocess, time\n\
             p = subprocess.Popen(['sleep', '60'])\n\
             open({pid_file:?}, 'w').write(str(p.pid))\n\
             time.sleep(60)"
        );
        let result = sb.run_tests(&sb.request(program, "")).unwrap();
        assert_eq!(result.status, ExecStatus::Timeout);

        let pid: i32 = fs::read_to_string(&pid_file)
            .expect("grandchild pid recorded")
            .trim()
            .parse()
            .unwrap();
        // A killed-but-unreaped grandchild lingers as a zombie, which
        // kill(pid, 0) still reports as alive; check the /proc state.
        let running = |pid: i32| -> bool {
            match fs::read_to_string(format!("/proc/{pid}/stat")) {
                Ok(stat) => {
                    // Format is `pid (comm) state …`; comm may contain
                    // anything, so take the piece after the last paren.
                    let after_comm = stat.rsplit(')').next();
                    let state = after_comm
                        .and_then(|rest| rest.split_whitespace().next())
                        .unwrap_or("X");
                    !matches!(state, "Z" | "X" | "x")
                }
                Err(_) => false,
            }
        };
        for _ in 0..20 {
            if !running(pid) {
                break;
            }
            std::thread::sleep(Duration::from_millis(50));
        }
        assert!(!running(pid), "grandchild {pid} survived the timeout");
    }

    #[test]
    fn deterministic_status_across_runs() {
        let sb = sandbox();
        let request = sb.request("def f():\n    return 1", "assert f() == 2");
        let first = sb.run_tests(&request).unwrap();
        let second = sb.run_tests(&request).unwrap();
        assert_eq!(first.status, second.status);
        assert_eq!(first.exit_code, second.exit_code);
    }

    #[test]
    fn output_excerpts_are_capped() {
        let sb = Sandbox::new(SandboxDefaults {
            output_cap_bytes: 64,
            ..SandboxDefaults::default()
        })
        .unwrap();
        let result = sb
            .run_tests(&sb.request("print('x' * 10000)", ""))
            .unwrap();
        assert!(result.stdout_excerpt.len() < 200);
        assert!(result.stdout_excerpt.contains("truncated"));
    }

    #[test]
    fn missing_interpreter_detected_at_startup() {
        let err = Sandbox::new(SandboxDefaults {
            interpreter_command: vec!["definitely-not-an-interpreter".into()],
            ..SandboxDefaults::default()
        })
        .unwrap_err();
        assert!(matches!(err, SandboxError::InterpreterMissing { .. }));
    }

    #[test]
    fn zero_timeout_rejected() {
        let sb = sandbox();
        let mut request = sb.request("x = 1", "");
        request.timeout = Duration::ZERO;
        assert!(matches!(
            sb.run_tests(&request),
            Err(SandboxError::InvalidRequest(_))
        ));
    }

    #[test]
    fn debug_dir_retains_artifacts() {
        let debug = tempfile::tempdir().unwrap();
        let sb = Sandbox::new(SandboxDefaults {
            debug_dir: Some(debug.path().to_path_buf()),
            ..SandboxDefaults::default()
        })
        .unwrap();
        sb.run_tests(&sb.request("x = 1", "assert x == 1")).unwrap();
        let entries: Vec<_> = fs::read_dir(debug.path()).unwrap().collect();
        assert_eq!(entries.len(), 1);
    }
}
