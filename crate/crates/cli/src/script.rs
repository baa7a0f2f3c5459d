use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;
use vcalc_core::context::Context;

use crate::record::OutputRecord;
use crate::session::{OutputMode, SessionState};

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
}

/// Counts over one run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunReport {
    pub records: usize,
    pub errors: usize,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.errors == 0 {
            0
        } else {
            1
        }
    }
}

/// Feeds lines to `state` until they run out or `:quit`, passing each
/// record to `sink` with the output mode in force when it was made.
pub fn run_lines<'a>(
    state: &mut SessionState,
    lines: impl IntoIterator<Item = &'a str>,
    sink: &mut dyn FnMut(&OutputRecord, OutputMode),
) -> RunReport {
    let mut report = RunReport::default();
    for line in lines {
        if let Some(rec) = state.eval_line(line) {
            emit(&rec, state.output, &mut report, sink);
        }
        if state.quit_requested() {
            break;
        }
    }
    report
}

/// Emits the check tally, if any, and adds it to `report`.
pub fn finish(
    state: &SessionState,
    report: &mut RunReport,
    sink: &mut dyn FnMut(&OutputRecord, OutputMode),
) {
    if let Some(rec) = state.summary() {
        emit(&rec, state.output, report, sink);
    }
}

fn emit(
    rec: &OutputRecord,
    mode: OutputMode,
    report: &mut RunReport,
    sink: &mut dyn FnMut(&OutputRecord, OutputMode),
) {
    report.records += 1;
    if rec.is_error() {
        report.errors += 1;
    }
    sink(rec, mode);
}

pub fn read_script(path: &Path) -> Result<String, ScriptError> {
    std::fs::read_to_string(path).map_err(|source| ScriptError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs a script file in a fresh session and closes with the check tally.
pub fn run_script(
    path: &Path,
    ctx: Context,
    output: OutputMode,
    sink: &mut dyn FnMut(&OutputRecord, OutputMode),
) -> Result<RunReport, ScriptError> {
    let src = read_script(path)?;
    let mut state = SessionState::new(ctx);
    state.output = output;
    let mut report = run_lines(&mut state, src.lines(), sink);
    finish(&state, &mut report, sink);
    Ok(report)
}
