//! Convergence records and their CSV form.
//!
//! A record file starts with `# key=value` metadata lines followed by a
//! `cycle,evaluations,best_f,wall_ms` table. Floats are written in Rust's
//! shortest round-trip form, so parsing an emitted record gives it back
//! exactly.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "cycle,evaluations,best_f,wall_ms";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    TargetReached,
    BudgetExhausted,
    FixedPoint,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::TargetReached => "target_reached",
            Status::BudgetExhausted => "budget_exhausted",
            Status::FixedPoint => "fixed_point",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "target_reached" => Ok(Status::TargetReached),
            "budget_exhausted" => Ok(Status::BudgetExhausted),
            "fixed_point" => Ok(Status::FixedPoint),
            other => Err(Error::Parse(format!("unknown status `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordPoint {
    pub cycle: u64,
    pub evaluations: u64,
    pub best_f: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub fingerprint: String,
    pub function: String,
    pub algorithm: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub meta: RecordMeta,
    pub points: Vec<RecordPoint>,
    pub status: Status,
}

impl RunRecord {
    pub fn new(algorithm: &str) -> Self {
        Self {
            meta: RecordMeta { algorithm: algorithm.to_string(), ..RecordMeta::default() },
            points: Vec::new(),
            status: Status::BudgetExhausted,
        }
    }

    /// Appends a point if it advances the evaluation count. The stored
    /// `best_f` is clamped so that the series never increases.
    pub fn push(&mut self, point: RecordPoint) {
        if let Some(last) = self.points.last() {
            if point.evaluations <= last.evaluations {
                return;
            }
            let best_f = if point.best_f < last.best_f { point.best_f } else { last.best_f };
            self.points.push(RecordPoint { best_f, ..point });
        } else {
            self.points.push(point);
        }
    }

    pub fn final_best(&self) -> f64 {
        self.points.last().map_or(f64::INFINITY, |p| p.best_f)
    }

    pub fn total_evaluations(&self) -> u64 {
        self.points.last().map_or(0, |p| p.evaluations)
    }

    /// Evaluations at the first point whose `best_f` is at or below `target`.
    pub fn evaluations_to(&self, target: f64) -> Option<u64> {
        self.points.iter().find(|p| p.best_f <= target).map(|p| p.evaluations)
    }

    /// Same trajectory, ignoring wall-clock timings.
    pub fn same_trajectory(&self, other: &RunRecord) -> bool {
        self.status == other.status
            && self.meta == other.meta
            && self.points.len() == other.points.len()
            && self.points.iter().zip(&other.points).all(|(a, b)| {
                a.cycle == b.cycle
                    && a.evaluations == b.evaluations
                    && a.best_f.to_bits() == b.best_f.to_bits()
            })
    }

    /// Record invariants: evaluations strictly increase, `best_f` never increases.
    pub fn is_consistent(&self) -> bool {
        self.points.windows(2).all(|w| w[1].evaluations > w[0].evaluations && w[1].best_f <= w[0].best_f)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# fingerprint={}\n", self.meta.fingerprint));
        out.push_str(&format!("# function={}\n", self.meta.function));
        out.push_str(&format!("# algorithm={}\n", self.meta.algorithm));
        out.push_str(&format!("# seed={}\n", self.meta.seed));
        out.push_str(&format!("# status={}\n", self.status));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!("{},{},{:?},{:?}\n", p.cycle, p.evaluations, p.best_f, p.wall_ms));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta = RecordMeta::default();
        let mut status = None;
        let mut points = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(kv) = line.strip_prefix('#') {
                let (key, value) = kv
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("line {}: bad metadata `{line}`", lineno + 1)))?;
                match key {
                    "fingerprint" => meta.fingerprint = value.to_string(),
                    "function" => meta.function = value.to_string(),
                    "algorithm" => meta.algorithm = value.to_string(),
                    "seed" => meta.seed = parse_field(value, lineno)?,
                    "status" => status = Some(value.parse()?),
                    _ => {}
                }
                continue;
            }
            if !header_seen {
                if line != CSV_HEADER {
                    return Err(Error::Parse(format!("line {}: expected header `{CSV_HEADER}`", lineno + 1)));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 fields", lineno + 1)));
            }
            points.push(RecordPoint {
                cycle: parse_field(fields[0], lineno)?,
                evaluations: parse_field(fields[1], lineno)?,
                best_f: parse_field(fields[2], lineno)?,
                wall_ms: parse_field(fields[3], lineno)?,
            });
        }
        if !header_seen {
            return Err(Error::Parse("missing CSV header".into()));
        }
        Ok(Self {
            meta,
            points,
            status: status.ok_or_else(|| Error::Parse("missing status metadata".into()))?,
        })
    }
}

fn parse_field<T: FromStr>(s: &str, lineno: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {}: cannot parse `{s}`", lineno + 1)))
}

/// Wall-clock helper for filling `wall_ms`.
#[derive(Clone, Copy, Debug)]
pub struct Stopwatch(Instant);

impl Stopwatch {
    pub fn start() -> Self {
        Self(Instant::now())
    }

    pub fn ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }

    pub fn secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Stopping rules shared by the serial drivers. Checked between iterations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub fitness_target: Option<f64>,
    pub max_evaluations: Option<u64>,
    pub max_iterations: Option<u64>,
    pub max_wall_seconds: Option<f64>,
}

impl Budget {
    /// Status to stop with, if any. `next_cost` is the price of the next
    /// iteration; a budget that cannot cover it counts as exhausted.
    pub fn check(&self, best_f: f64, evaluations: u64, next_cost: u64, iterations: u64, clock: &Stopwatch) -> Option<Status> {
        if self.fitness_target.is_some_and(|t| best_f <= t) {
            return Some(Status::TargetReached);
        }
        let over_evals = self.max_evaluations.is_some_and(|m| evaluations + next_cost > m);
        let over_iters = self.max_iterations.is_some_and(|m| iterations >= m);
        let over_time = self.max_wall_seconds.is_some_and(|s| clock.secs() >= s);
        (over_evals || over_iters || over_time).then_some(Status::BudgetExhausted)
    }
}
