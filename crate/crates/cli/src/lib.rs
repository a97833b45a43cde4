//! Command dispatch for the `logsurf` binary.
//!
//! Exit codes: 0 on success, 2 for parse, validation and input errors
//! (including rejected traces), 3 when an internal consistency check fails.

pub mod dot;
pub mod scenario;
pub mod tracefile;

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use logsurf_core::crepant::{analyze, crepant_pullback, BaseDesignation, LcCenter, SurfaceState};
use logsurf_core::decompose::{decompose_morphism, minimize, verify_trace, DecompositionTrace, MorphismSpec};
use logsurf_core::moves::{epsilon_bound, is_flop_minimal, is_log_flopping, is_nef_on_marked, FlopCheck, NefScope};
use logsurf_core::ratlin::Rat;
use logsurf_core::surface::{BlowUpTarget, CurveConfig, CurveId, PointId};

use scenario::{checked_config, load, parse_base, parse_ids, ScenarioFile};
use tracefile::TraceFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// A failed command: the exit code and the diagnostic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<logsurf_core::Error> for Failure {
    fn from(e: logsurf_core::Error) -> Self {
        let code = if e.is_internal() { EXIT_INTERNAL } else { EXIT_INPUT };
        Failure { code, message: e.to_string() }
    }
}

impl From<logsurf_core::surface::SurfaceError> for Failure {
    fn from(e: logsurf_core::surface::SurfaceError) -> Self {
        Failure::input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "logsurf", version, about = "Log terminal surfaces: classification, decomposition and minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check scenario files for SNC and coefficient violations.
    Validate {
        #[arg(required = true)]
        files: Vec<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Classify the pair obtained by contracting a set of curves.
    Classify {
        file: String,
        #[arg(long)]
        contract: Option<String>,
    },
    /// Print the crepant pullback and discrepancies.
    Discrepancies {
        file: String,
        #[arg(long)]
        contract: Option<String>,
    },
    /// List log-flopping type divisors.
    Flops {
        file: String,
        #[arg(long)]
        contract: Option<String>,
        #[arg(long)]
        base: Option<String>,
    },
    /// Factor a log crepant morphism into flops and log blow-downs.
    Decompose {
        file: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Contract flops, then log blow-downs, until none remain.
    Minimize {
        file: String,
        #[arg(long)]
        contract: Option<String>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Blow up a point and write the new scenario.
    Blowup {
        file: String,
        /// `point:ID`, `free:CURVE` or `generic`.
        #[arg(long)]
        at: String,
        #[arg(long)]
        coeff: String,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Replay a trace against its scenario.
    Verify {
        file: String,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Emit the dual graph in Graphviz DOT.
    Dot {
        file: String,
        #[arg(long)]
        contract: Option<String>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

/// Runs one command line. `argv[0]` is the program name.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_INPUT
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code
        }
    }
}

type CmdResult = Result<i32, Failure>;

fn io(e: std::io::Error) -> Failure {
    Failure::input(e.to_string())
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match command {
        Command::Validate { files, jobs } => validate(&files, jobs, out, err),
        Command::Classify { file, contract } => classify(&file, contract, out),
        Command::Discrepancies { file, contract } => discrepancies(&file, contract, out),
        Command::Flops { file, contract, base } => flops(&file, contract, base, out),
        Command::Decompose { file, from, to, trace } => decompose(&file, &from, &to, trace, out),
        Command::Minimize { file, contract, trace } => minimize_cmd(&file, contract, trace, out),
        Command::Blowup { file, at, coeff, output } => blowup(&file, &at, &coeff, &output, out),
        Command::Verify { file, trace } => verify(&file, &trace, out, err),
        Command::Dot { file, contract, output } => dot_cmd(&file, contract, output, out),
    }
}

struct Loaded {
    scenario: ScenarioFile,
    config: CurveConfig,
}

fn load_checked(file: &str) -> Result<Loaded, Failure> {
    let scenario = load(file)?;
    let config = checked_config(&scenario)?;
    Ok(Loaded { scenario, config })
}

impl Loaded {
    fn contracted(&self, flag: Option<String>) -> Result<BTreeSet<CurveId>, Failure> {
        let text = flag.or_else(|| self.scenario.contract.clone()).unwrap_or_default();
        parse_ids(&self.config, &text)
    }

    fn base(&self, flag: Option<String>) -> Result<BaseDesignation, Failure> {
        match flag.or_else(|| self.scenario.base.clone()) {
            Some(text) => parse_base(&self.config, &text),
            None => Ok(BaseDesignation::Point),
        }
    }

    fn labels<'a>(&self, ids: impl IntoIterator<Item = &'a CurveId>) -> String {
        let v: Vec<String> = ids.into_iter().map(|c| self.config.label(*c)).collect();
        if v.is_empty() {
            "(none)".into()
        } else {
            v.join(",")
        }
    }

    fn state(&self, contract: Option<String>, base: Option<String>) -> Result<SurfaceState, Failure> {
        Ok(SurfaceState::new(self.config.clone(), self.contracted(contract)?, self.base(base)?)?)
    }
}

fn validate(files: &[String], jobs: usize, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let check = |f: &String| load(f).and_then(|s| checked_config(&s)).map(|c| c.curves().len());
    let jobs = jobs.clamp(1, files.len().max(1));
    let chunk = files.len().div_ceil(jobs).max(1);
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> =
            files.chunks(chunk).map(|part| s.spawn(move || part.iter().map(check).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("validation thread panicked")).collect()
    });
    let mut code = EXIT_OK;
    for (file, result) in files.iter().zip(results) {
        match result {
            Ok(n) => writeln!(out, "{file}: ok ({n} curves)").map_err(io)?,
            Err(f) => {
                writeln!(err, "{file}: {f}").map_err(io)?;
                code = code.max(f.code);
            }
        }
    }
    Ok(code)
}

fn classify(file: &str, contract: Option<String>, out: &mut dyn Write) -> CmdResult {
    let l = load_checked(file)?;
    let state = l.state(contract, None)?;
    let analysis = analyze(&state)?;
    writeln!(out, "contracted: {}", l.labels(state.contracted())).map_err(io)?;
    writeln!(out, "classification: {:?}", analysis.classification).map_err(io)?;
    if analysis.classification.is_lc() {
        writeln!(out, "lc centres:").map_err(io)?;
        for c in &analysis.centers {
            let line = match c {
                LcCenter::Divisorial(k) => format!("  curve {}", l.labels([k])),
                LcCenter::Node(p) => {
                    let point = l.config.point(*p)?;
                    format!("  point {p} on {}", l.labels(&point.incident))
                }
                LcCenter::ComponentImage(comp) => format!("  image of {}", l.labels(comp)),
            };
            writeln!(out, "{line}").map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

fn fmt_vec(values: &[Rat]) -> String {
    format!("({})", values.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
}

fn discrepancies(file: &str, contract: Option<String>, out: &mut dyn Write) -> CmdResult {
    let l = load_checked(file)?;
    let state = l.state(contract, None)?;
    let data = crepant_pullback(&state)?;
    writeln!(out, "contracted: {}", l.labels(state.contracted())).map_err(io)?;
    let a: Vec<Rat> = data.discrepancies().into_values().collect();
    for (id, value) in data.discrepancies() {
        writeln!(out, "a({}) = {value}", l.labels([&id])).map_err(io)?;
    }
    writeln!(out, "a = {}", fmt_vec(&a)).map_err(io)?;
    for (id, e) in data.coefficients() {
        writeln!(out, "e({}) = {e}", l.labels([id])).map_err(io)?;
    }
    Ok(EXIT_OK)
}

fn flops(file: &str, contract: Option<String>, base: Option<String>, out: &mut dyn Write) -> CmdResult {
    let l = load_checked(file)?;
    let state = l.state(contract, base)?;
    writeln!(out, "contracted: {}", l.labels(state.contracted())).map_err(io)?;
    writeln!(out, "base: {}", scenario::format_base(state.base())).map_err(io)?;
    for i in state.surviving() {
        if !state.is_exceptional_over_base(i) {
            continue;
        }
        let line = match is_log_flopping(&state, i)? {
            FlopCheck::Flopping => {
                let eps = epsilon_bound(&state, i)?;
                format!("{}: flopping (epsilon < {}, chosen {})", l.labels([&i]), eps.supremum, eps.chosen)
            }
            FlopCheck::Rejected(r) => format!("{}: not flopping, {r}", l.labels([&i])),
        };
        writeln!(out, "{line}").map_err(io)?;
    }
    let nef = is_nef_on_marked(&state)?;
    let scope = match nef.scope {
        NefScope::Complete => "complete",
        NefScope::MarkedCurvesOnly => "marked curves only",
    };
    match &nef.witness {
        None => writeln!(out, "nef: yes ({scope})").map_err(io)?,
        Some((c, d)) => writeln!(out, "nef: no, {} has degree {d} ({scope})", l.labels([c])).map_err(io)?,
    }
    if nef.nef {
        let minimal = is_flop_minimal(&state)?;
        writeln!(out, "flop-minimal: {}", if minimal { "yes" } else { "no" }).map_err(io)?;
    }
    Ok(EXIT_OK)
}

fn print_trace(l: &Loaded, trace: &DecompositionTrace, out: &mut dyn Write) -> Result<(), Failure> {
    let mut parts = Vec::new();
    for (k, step) in trace.steps.iter().enumerate() {
        if k == trace.fm_index {
            writeln!(out, "-- flop-minimal --").map_err(io)?;
        }
        let text = format!("{}({})", step.kind, l.labels([&step.curve]));
        writeln!(out, "step {}: {text}", k + 1).map_err(io)?;
        parts.push(text);
    }
    if trace.fm_index == trace.steps.len() {
        writeln!(out, "-- flop-minimal --").map_err(io)?;
    }
    writeln!(out, "trace: {}", if parts.is_empty() { "(empty)".into() } else { parts.join("; ") }).map_err(io)?;
    writeln!(out, "end: {}", l.labels(&trace.end)).map_err(io)?;
    if let Some(last) = trace.steps.last() {
        let a: Vec<Rat> = last.certificate.discrepancies_after.values().cloned().collect();
        writeln!(out, "a = {}", fmt_vec(&a)).map_err(io)?;
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::input(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn decompose(file: &str, from: &str, to: &str, trace: Option<PathBuf>, out: &mut dyn Write) -> CmdResult {
    let l = load_checked(file)?;
    let spec = MorphismSpec::new(l.config.clone(), parse_ids(&l.config, from)?, parse_ids(&l.config, to)?)?;
    let t = decompose_morphism(&spec)?;
    print_trace(&l, &t, out)?;
    if let Some(path) = trace {
        write_json(&path, &TraceFile::from_trace(l.scenario.digest(), &t))?;
    }
    Ok(EXIT_OK)
}

fn minimize_cmd(file: &str, contract: Option<String>, trace: Option<PathBuf>, out: &mut dyn Write) -> CmdResult {
    let l = load_checked(file)?;
    let state = SurfaceState::over_point(l.config.clone(), l.contracted(contract)?)?;
    let t = minimize(&state)?;
    print_trace(&l, &t, out)?;
    if let Some(path) = trace {
        write_json(&path, &TraceFile::from_trace(l.scenario.digest(), &t))?;
    }
    Ok(EXIT_OK)
}

fn parse_target(config: &CurveConfig, text: &str) -> Result<BlowUpTarget, Failure> {
    if text == "generic" {
        return Ok(BlowUpTarget::Generic);
    }
    if let Some(p) = text.strip_prefix("point:") {
        let id: u32 = p.parse().map_err(|_| Failure::input(format!("bad point id {p:?}")))?;
        return Ok(BlowUpTarget::Point(PointId(id)));
    }
    if let Some(c) = text.strip_prefix("free:") {
        let id = config.find_curve(c).ok_or_else(|| Failure::input(format!("unknown curve {c:?}")))?;
        return Ok(BlowUpTarget::FreePointOn(id));
    }
    Err(Failure::input(format!("bad target {text:?}: expected point:ID, free:CURVE or generic")))
}

fn blowup(file: &str, at: &str, coeff: &str, output: &PathBuf, out: &mut dyn Write) -> CmdResult {
    let l = load_checked(file)?;
    let target = parse_target(&l.config, at)?;
    let coeff: Rat = coeff.parse().map_err(|e| Failure::input(format!("bad coefficient {coeff:?}: {e}")))?;
    let (config, id) = l.config.blow_up(&target, coeff)?;
    let doc = ScenarioFile {
        contract: l.scenario.contract.clone(),
        base: l.scenario.base.clone(),
        ..ScenarioFile::from_config(&config)
    };
    write_json(output, &doc)?;
    writeln!(out, "new curve {id}").map_err(io)?;
    Ok(EXIT_OK)
}

fn verify(file: &str, trace: &PathBuf, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let l = load_checked(file)?;
    let text = std::fs::read_to_string(trace).map_err(|e| Failure::input(format!("{}: {e}", trace.display())))?;
    let doc: TraceFile =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", trace.display())))?;
    if doc.scenario_digest != l.scenario.digest() {
        return Err(Failure::input("trace was recorded against a different scenario (digest mismatch)"));
    }
    let t = doc.to_trace(&l.config)?;
    let verdict = verify_trace(&l.config, &t.start, &t);
    match verdict.failure {
        None => {
            writeln!(out, "accepted: {} steps", t.steps.len()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Some(reason) => {
            writeln!(err, "rejected: {reason}").map_err(io)?;
            Ok(EXIT_INPUT)
        }
    }
}

fn dot_cmd(file: &str, contract: Option<String>, output: Option<PathBuf>, out: &mut dyn Write) -> CmdResult {
    let l = load_checked(file)?;
    let contracted = l.contracted(contract)?;
    let text = dot::render(&l.config, &contracted);
    match output {
        Some(path) => std::fs::write(&path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        None => out.write_all(text.as_bytes()).map_err(io)?,
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use logsurf_core::Error;

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(Failure::from(Error::TheoremViolation("x".into())).code, EXIT_INTERNAL);
        assert_eq!(Failure::from(Error::StuckInPhase2 { remaining: BTreeSet::new() }).code, EXIT_INTERNAL);
        assert_eq!(Failure::from(Error::NotNested).code, EXIT_INPUT);
        assert_eq!(Failure::from(Error::NoAdmissibleTarget).code, EXIT_INPUT);
    }
}
