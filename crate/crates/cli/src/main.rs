use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vcalc_cli::{
    export_json, finish, parse_schedule, read_script, run_lines, OutputMode, OutputRecord,
    SessionState,
};
use vcalc_core::context::Context;

/// Virtual calculus REPL and batch runner.
#[derive(Parser, Debug)]
#[command(name = "vcalc", version)]
struct Args {
    /// Script to run, one command per line, `#` starts a comment.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Command to run after the script. May be repeated.
    #[arg(long)]
    eval: Vec<String>,
    /// Emit one JSON object per record.
    #[arg(long)]
    json: bool,
    /// Sampling schedule as N0,RATIO,STEPS.
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<vcalc_core::context::SamplingSchedule>,
    /// Tolerance for limits and reductions.
    #[arg(long)]
    tol: Option<f64>,
    /// Absolute and relative quadrature tolerance.
    #[arg(long = "quad-tol")]
    quad_tol: Option<f64>,
}

fn print(rec: &OutputRecord, mode: OutputMode) {
    let mut out = io::stdout().lock();
    let _ = match mode {
        OutputMode::Json => writeln!(out, "{}", export_json(rec)),
        OutputMode::Plain => writeln!(out, "{rec}"),
    };
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut ctx = Context::default();
    if let Some(s) = args.schedule {
        ctx.schedule = s;
    }
    if let Some(t) = args.tol {
        ctx.tol = t;
    }
    if let Some(t) = args.quad_tol {
        ctx.quadrature.abs_tol = t;
        ctx.quadrature.rel_tol = t;
    }
    if let Err(e) = ctx.validate() {
        eprintln!("vcalc: {e}");
        return ExitCode::from(2);
    }
    let mut state = SessionState::new(ctx);
    state.output = if args.json {
        OutputMode::Json
    } else {
        OutputMode::Plain
    };
    let sink = &mut print;

    if args.script.is_none() && args.eval.is_empty() {
        repl(&mut state);
        return ExitCode::SUCCESS;
    }
    let src = match &args.script {
        Some(path) => match read_script(path) {
            Ok(src) => src,
            Err(e) => {
                eprintln!("vcalc: {e}");
                return ExitCode::from(2);
            }
        },
        None => String::new(),
    };
    let lines = src.lines().chain(args.eval.iter().map(String::as_str));
    let mut report = run_lines(&mut state, lines, sink);
    finish(&state, &mut report, sink);
    ExitCode::from(report.exit_code() as u8)
}

fn repl(state: &mut SessionState) {
    let interactive = io::stdin().is_terminal();
    let prompt = || {
        if interactive {
            print!("vcalc> ");
            let _ = io::stdout().flush();
        }
    };
    prompt();
    for line in io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        if let Some(rec) = state.eval_line(&line) {
            print(&rec, state.output);
        }
        if state.quit_requested() {
            break;
        }
        prompt();
    }
}
