//! Runs every task of a loaded config and writes the reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use rl_translate::report::Envelope;
use serde_json::json;

use crate::config::Loaded;
use crate::tasks::run_task;

#[derive(Debug)]
pub struct TaskResult {
    pub index: usize,
    pub kind: &'static str,
    pub required: bool,
    pub passed: bool,
    pub error: Option<String>,
    /// The JSON envelope, newline-terminated.
    pub report: String,
    pub extra: Vec<(&'static str, String)>,
}

impl TaskResult {
    pub fn file_stem(&self) -> String {
        format!("{:03}-{}", self.index, self.kind)
    }
}

fn run_one(ctx: &Loaded, index: usize) -> TaskResult {
    let doc = &ctx.config.tasks[index];
    let label = doc
        .name
        .clone()
        .unwrap_or_else(|| doc.task.kind().to_string());
    let (passed, payload, extra, error) = match run_task(ctx, index) {
        Ok(out) => (
            out.passed,
            json!({ "index": index, "required": doc.required, "result": out.payload }),
            out.extra,
            None,
        ),
        Err(e) => {
            let msg = format!("{e:#}");
            (
                false,
                json!({ "index": index, "required": doc.required, "error": msg }),
                Vec::new(),
                Some(msg),
            )
        }
    };
    let report = Envelope::new(label, ctx.hash.clone(), passed, payload)
        .to_json()
        .expect("report values serialize");
    TaskResult {
        index,
        kind: doc.task.kind(),
        required: doc.required,
        passed,
        error,
        report,
        extra,
    }
}

/// Runs all tasks on a small worker pool; results come back in task order.
pub fn execute(ctx: &Loaded) -> Vec<TaskResult> {
    let n = ctx.config.tasks.len();
    let workers = thread::available_parallelism()
        .map_or(1, |p| p.get())
        .min(n.max(1));
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(n));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = run_one(ctx, i);
                done.lock().unwrap().push(r);
            });
        }
    });
    let mut out = done.into_inner().unwrap();
    out.sort_by_key(|r| r.index);
    out
}

/// Writes `NNN-kind.json` plus side files; returns every path written.
pub fn write_reports(results: &[TaskResult], dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for r in results {
        let p = dir.join(format!("{}.json", r.file_stem()));
        fs::write(&p, &r.report)?;
        written.push(p);
        for (ext, body) in &r.extra {
            let p = dir.join(format!("{}.{ext}", r.file_stem()));
            fs::write(&p, body)?;
            written.push(p);
        }
    }
    Ok(written)
}

/// 0 iff every required task passed.
pub fn exit_code(results: &[TaskResult]) -> i32 {
    i32::from(results.iter().any(|r| r.required && !r.passed))
}
