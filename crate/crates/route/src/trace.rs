//! Trace files and the sequential game driver.
//!
//! ```text
//! # comment
//! find 0 5
//! remove 0      # by path id
//! remove -1     # most recent live path
//! verify
//! stats
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::time::Instant;

use serde::Serialize;

use exroute_core::oracle::OracleStats;
use exroute_core::router::{ErrorClass, RouteError, RouterStats};
use exroute_core::{RoutingEngine, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PathRef {
    Id(u64),
    /// `k`-th most recent live path, 1-based.
    Recent(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TraceCommand {
    Find(VertexId, VertexId),
    Remove(PathRef),
    Verify,
    Stats,
}

impl fmt::Display for TraceCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceCommand::Find(a, b) => write!(f, "find {a} {b}"),
            TraceCommand::Remove(PathRef::Id(id)) => write!(f, "remove {id}"),
            TraceCommand::Remove(PathRef::Recent(k)) => write!(f, "remove -{k}"),
            TraceCommand::Verify => f.write_str("verify"),
            TraceCommand::Stats => f.write_str("stats"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceLine {
    pub line: usize,
    pub command: TraceCommand,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceLine>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |reason: &str| ParseError { line, reason: reason.to_string() };
        let words: Vec<&str> = body.split_whitespace().collect();
        let command = match words[..] {
            ["find", a, b] => {
                let a = a.parse().map_err(|_| err("bad start vertex"))?;
                let b = b.parse().map_err(|_| err("bad end vertex"))?;
                TraceCommand::Find(VertexId(a), VertexId(b))
            }
            ["find", ..] => return Err(err("find takes two vertices")),
            ["remove", r] => {
                let r = if let Some(k) = r.strip_prefix('-') {
                    let k: usize = k.parse().map_err(|_| err("bad recent-path index"))?;
                    if k == 0 {
                        return Err(err("recent-path index starts at -1"));
                    }
                    PathRef::Recent(k)
                } else {
                    PathRef::Id(r.parse().map_err(|_| err("bad path id"))?)
                };
                TraceCommand::Remove(r)
            }
            ["remove", ..] => return Err(err("remove takes one path reference")),
            ["verify"] => TraceCommand::Verify,
            ["stats"] => TraceCommand::Stats,
            _ => return Err(err("unknown command")),
        };
        out.push(TraceLine { line, command });
    }
    Ok(out)
}

pub fn write_trace(commands: &[TraceCommand]) -> String {
    let mut s = String::new();
    for c in commands {
        s.push_str(&c.to_string());
        s.push('\n');
    }
    s
}

/// Numbers generated commands as lines `1..`.
pub fn number(commands: &[TraceCommand]) -> Vec<TraceLine> {
    commands.iter().enumerate().map(|(i, &command)| TraceLine { line: i + 1, command }).collect()
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Full verify after every `k`-th command.
    pub verify_every: Option<usize>,
    pub stop_on_failure: bool,
    /// Record per-request wall clock. Off for byte-stable reports.
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureClass {
    CallerError,
    ExpansionViolation,
    Setup,
}

impl From<ErrorClass> for FailureClass {
    fn from(c: ErrorClass) -> Self {
        match c {
            ErrorClass::Caller => FailureClass::CallerError,
            ErrorClass::Expansion => FailureClass::ExpansionViolation,
            ErrorClass::Setup => FailureClass::Setup,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub line: usize,
    pub command: String,
    pub class: FailureClass,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyOutcome {
    pub line: usize,
    pub findings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Percentiles {
    pub p50_us: f64,
    pub p90_us: f64,
    pub p99_us: f64,
    pub max_us: f64,
}

impl Percentiles {
    pub fn of(samples: &mut [f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        samples.sort_by(f64::total_cmp);
        let at = |q: f64| samples[((samples.len() - 1) as f64 * q).round() as usize] * 1e6;
        Some(Percentiles { p50_us: at(0.5), p90_us: at(0.9), p99_us: at(0.99), max_us: at(1.0) })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OracleCalls {
    pub out: OracleStats,
    #[serde(rename = "in")]
    pub inward: OracleStats,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub commands: usize,
    pub requests_served: usize,
    pub failures: Vec<Failure>,
    pub path_length_histogram: BTreeMap<usize, u64>,
    pub router: RouterStats,
    pub oracle_calls: OracleCalls,
    pub live_paths: usize,
    pub verify_runs: usize,
    /// Only verifies that found something.
    pub verify_findings: Vec<VerifyOutcome>,
    pub wall_clock_per_request: Option<Percentiles>,
}

impl RunReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty() && self.verify_findings.is_empty()
    }

    pub fn expansion_failures(&self) -> usize {
        self.failures.iter().filter(|f| f.class == FailureClass::ExpansionViolation).count()
    }
}

/// Live path ids, ascending, so `Recent(k)` is the `k`-th from the end.
fn resolve(engine: &RoutingEngine, r: PathRef) -> Result<u64, RouteError> {
    match r {
        PathRef::Id(id) => Ok(id),
        PathRef::Recent(k) => {
            let live = engine.live_count();
            if k > live {
                return Err(RouteError::UnknownPath(u64::MAX));
            }
            Ok(engine.live_paths().nth(live - k).expect("index in range").id)
        }
    }
}

fn emit_verify(out: &mut dyn Write, line: usize, findings: &[String]) -> io::Result<()> {
    if findings.is_empty() {
        writeln!(out, "VERIFY {line} ok")
    } else {
        writeln!(out, "VERIFY {line} {} findings", findings.len())?;
        for f in findings {
            writeln!(out, "  {f}")?;
        }
        Ok(())
    }
}

/// Runs `commands` strictly in order, writing one output line per find
/// (`PATH …` or `FAIL …`) and per verify/stats command to `out`.
pub fn run_trace(
    engine: &mut RoutingEngine,
    commands: &[TraceLine],
    options: &RunOptions,
    out: &mut dyn Write,
) -> io::Result<RunReport> {
    let mut report = RunReport::default();
    let mut times = Vec::new();
    for (i, tl) in commands.iter().enumerate() {
        report.commands += 1;
        let started = options.timing.then(Instant::now);
        let outcome = match tl.command {
            TraceCommand::Find(a, b) => match engine.find_path(a, b) {
                Ok(p) => {
                    writeln!(out, "{p}")?;
                    *report.path_length_histogram.entry(p.len()).or_default() += 1;
                    Ok(())
                }
                Err(e) => Err(e),
            },
            TraceCommand::Remove(r) => resolve(engine, r).and_then(|id| engine.remove_path(id)).map(|_| ()),
            TraceCommand::Verify => {
                let findings: Vec<String> = engine.verify().findings.iter().map(|f| f.to_string()).collect();
                report.verify_runs += 1;
                emit_verify(out, tl.line, &findings)?;
                if !findings.is_empty() {
                    report.verify_findings.push(VerifyOutcome { line: tl.line, findings });
                }
                Ok(())
            }
            TraceCommand::Stats => {
                let s = engine.stats();
                writeln!(
                    out,
                    "STATS {} live={} found={} failed={} rejected={} removed={}",
                    tl.line,
                    engine.live_count(),
                    s.found,
                    s.failed,
                    s.rejected,
                    s.removed
                )?;
                Ok(())
            }
        };
        let is_request = matches!(tl.command, TraceCommand::Find(..) | TraceCommand::Remove(_));
        if let Some(t) = started {
            if is_request {
                times.push(t.elapsed().as_secs_f64());
            }
        }
        let failed = match outcome {
            Ok(()) => {
                if is_request {
                    report.requests_served += 1;
                }
                false
            }
            Err(e) => {
                let class = FailureClass::from(e.class());
                let class_name = match class {
                    FailureClass::CallerError => "caller-error",
                    FailureClass::ExpansionViolation => "expansion-violation",
                    FailureClass::Setup => "setup",
                };
                writeln!(out, "FAIL {} {class_name} {e}", tl.line)?;
                report.failures.push(Failure {
                    line: tl.line,
                    command: tl.command.to_string(),
                    class,
                    message: e.to_string(),
                });
                true
            }
        };
        if let Some(k) = options.verify_every {
            if k > 0 && (i + 1) % k == 0 && !matches!(tl.command, TraceCommand::Verify) {
                let findings: Vec<String> = engine.verify().findings.iter().map(|f| f.to_string()).collect();
                report.verify_runs += 1;
                if !findings.is_empty() {
                    emit_verify(out, tl.line, &findings)?;
                    report.verify_findings.push(VerifyOutcome { line: tl.line, findings });
                }
            }
        }
        if failed && options.stop_on_failure {
            break;
        }
    }
    report.router = *engine.stats();
    report.oracle_calls = OracleCalls { out: *engine.out_oracle().stats(), inward: *engine.in_oracle().stats() };
    report.live_paths = engine.live_count();
    report.wall_clock_per_request = Percentiles::of(&mut times);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let t = parse_trace("find 0 5\nremove 0").unwrap();
        assert_eq!(
            t.iter().map(|l| l.command).collect::<Vec<_>>(),
            vec![TraceCommand::Find(VertexId(0), VertexId(5)), TraceCommand::Remove(PathRef::Id(0))]
        );
        let t = parse_trace("# comment\n\nverify").unwrap();
        assert_eq!(t, vec![TraceLine { line: 3, command: TraceCommand::Verify }]);
        assert_eq!(parse_trace("find 0").unwrap_err().line, 1);
        assert_eq!(parse_trace("stats\nremove -0").unwrap_err().line, 2);
        assert!(parse_trace("jump 1 2").is_err());
    }

    #[test]
    fn write_parse_round_trip() {
        let cmds = vec![
            TraceCommand::Find(VertexId(3), VertexId(4)),
            TraceCommand::Remove(PathRef::Recent(2)),
            TraceCommand::Remove(PathRef::Id(7)),
            TraceCommand::Verify,
            TraceCommand::Stats,
        ];
        let parsed: Vec<_> = parse_trace(&write_trace(&cmds)).unwrap().into_iter().map(|l| l.command).collect();
        assert_eq!(parsed, cmds);
    }
}
