//! Session, commands and output records behind the `vcalc` binary.

mod record;
mod script;
mod session;
mod text;

pub use record::{
    export_json, CheckResult, Evidence, Kind, Num, OutputRecord, Payload, ScheduleSnapshot, Seen,
    Tolerances,
};
pub use script::{finish, read_script, run_lines, run_script, RunReport, ScriptError};
pub use session::{
    parse_schedule, repl_eval_line, Binding, CommandError, OutputMode, SessionState,
};
