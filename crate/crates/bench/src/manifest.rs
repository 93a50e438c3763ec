//! Run manifests: per-object status and wall-clock timings. The only output
//! that is allowed to differ between identical runs.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{exit, CliResult};
use crate::report::{write_json, TOOL, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Skipped,
    Warning,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObjectEntry {
    pub id: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
    /// Stage name and milliseconds, in execution order.
    pub timings_ms: Vec<(String, f64)>,
}

pub struct Manifest {
    command: String,
    config_hash: String,
    started: SystemTime,
    clock: Instant,
    objects: Vec<ObjectEntry>,
    stages: Vec<(String, f64)>,
    extra: serde_json::Map<String, Value>,
}

impl Manifest {
    pub fn new(command: &str, config_hash: String) -> Self {
        Manifest {
            command: command.into(),
            config_hash,
            started: SystemTime::now(),
            clock: Instant::now(),
            objects: Vec::new(),
            stages: Vec::new(),
            extra: serde_json::Map::new(),
        }
    }

    pub fn object(&mut self, entry: ObjectEntry) {
        self.objects.push(entry);
    }

    /// Runs `f` as a named batch-level stage.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.stages.push((name.into(), ms(t)));
        out
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.extra.insert(key.into(), value);
    }

    pub fn worst(&self) -> Status {
        self.objects.iter().map(|o| o.status).max().unwrap_or(Status::Ok)
    }

    pub fn exit_code(&self) -> i32 {
        if self.worst() == Status::Error {
            exit::OBJECT_ERRORS
        } else {
            exit::OK
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let started = self.started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let mut v = json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "config_hash": self.config_hash,
            "started_unix": started,
            "total_ms": ms(self.clock),
            "threads": rayon::current_num_threads(),
            "status": self.worst(),
            "stages_ms": self.stages,
            "objects": self.objects,
        });
        for (k, x) in &self.extra {
            v[k] = x.clone();
        }
        write_json(path, &v)
    }
}

pub fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Times consecutive stages of one object.
pub struct StageClock {
    last: Instant,
    pub timings: Vec<(String, f64)>,
}

impl StageClock {
    pub fn start() -> Self {
        StageClock { last: Instant::now(), timings: Vec::new() }
    }

    pub fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.timings.push((name.into(), (now - self.last).as_secs_f64() * 1e3));
        self.last = now;
    }
}
