//! Experiment configs, multi-seed runs and summary tables.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cc::{run_cc, CcConfig};
use crate::cma::{run_cma, DEFAULT_SIGMA};
use crate::dcc::{run_dcc, DccConfig};
use crate::error::{invalid, Error, Result};
use crate::lmcma::run_lmcma;
use crate::objective::{BaseFunction, ObjectiveInstance};
use crate::partition::default_decompose;
use crate::record::{Budget, RunRecord};

pub const ALGORITHMS: [&str; 4] = ["cc", "lmcma", "cma", "dcc"];
pub const DEFAULT_TARGET: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Cc,
    Lmcma,
    Cma,
    Dcc,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cc" => Ok(Algorithm::Cc),
            "lmcma" => Ok(Algorithm::Lmcma),
            "cma" => Ok(Algorithm::Cma),
            "dcc" => Ok(Algorithm::Dcc),
            other => Err(Error::UnknownAlgorithm { id: other.to_string(), valid: ALGORITHMS.join(", ") }),
        }
    }
}

/// One benchmark setting run over several seeds. Read from JSON or TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function: String,
    pub dimension: usize,
    pub seeds: Vec<u64>,
    pub algorithm: String,
    pub fitness_target: f64,
    pub max_evaluations: Option<u64>,
    pub max_wall_seconds: Option<f64>,
    /// Directory for per-seed CSVs and `summary.csv`.
    pub output_path: Option<PathBuf>,
    /// Random rotation and shift per seed; plain function otherwise.
    pub rotated: bool,
    pub initial_sigma: f64,
    /// Group count of the random CC partition.
    pub groups: usize,
    pub cc: CcConfig,
    pub dcc: DccConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            function: "sphere".into(),
            dimension: 128,
            seeds: vec![1, 2, 3, 4, 5],
            algorithm: "lmcma".into(),
            fitness_target: DEFAULT_TARGET,
            max_evaluations: None,
            max_wall_seconds: Some(600.0),
            output_path: None,
            rotated: true,
            initial_sigma: DEFAULT_SIGMA,
            groups: 4,
            cc: CcConfig::default(),
            dcc: DccConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses TOML when `path` ends in `.toml`, JSON otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
        }
    }

    pub fn validate(&self) -> Result<(BaseFunction, Algorithm)> {
        let base: BaseFunction = self.function.parse()?;
        let algorithm: Algorithm = self.algorithm.parse()?;
        if self.dimension == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if !(self.fitness_target > 0.0) {
            return Err(invalid(format!("fitness_target must be positive, got {}", self.fitness_target)));
        }
        if self.max_evaluations.is_none() && self.max_wall_seconds.is_none() {
            return Err(invalid("set max_evaluations or max_wall_seconds"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds must not be empty"));
        }
        if algorithm == Algorithm::Cc && (self.groups < 2 || self.groups > self.dimension) {
            return Err(invalid(format!("groups must lie in 2..={}, got {}", self.dimension, self.groups)));
        }
        if algorithm == Algorithm::Dcc {
            self.dcc.validate(self.dimension)?;
        }
        Ok((base, algorithm))
    }

    /// SHA-256 of the config's JSON form, hex encoded.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config always serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn instance(&self, seed: u64) -> Result<ObjectiveInstance> {
        let base: BaseFunction = self.function.parse()?;
        if self.rotated {
            ObjectiveInstance::rotated_shifted(base, self.dimension, seed)
        } else {
            ObjectiveInstance::new(base, self.dimension)
        }
    }
}

/// Runs one seed.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    let (_, algorithm) = config.validate()?;
    let obj = config.instance(seed)?;
    let budget = Budget {
        fitness_target: Some(config.fitness_target),
        max_evaluations: config.max_evaluations,
        max_iterations: None,
        max_wall_seconds: config.max_wall_seconds,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut record = match algorithm {
        Algorithm::Lmcma => run_lmcma(&obj, None, config.initial_sigma, &budget, &mut rng)?.0,
        Algorithm::Cma => run_cma(&obj, None, config.initial_sigma, &budget, &mut rng)?.0,
        Algorithm::Cc => {
            let partition = default_decompose(config.dimension, config.groups, seed)?;
            let cc = CcConfig {
                fitness_target: Some(config.fitness_target),
                max_evaluations: config.max_evaluations,
                max_wall_seconds: config.max_wall_seconds,
                initial_sigma: config.initial_sigma,
                ..config.cc.clone()
            };
            run_cc(&obj, &partition, &cc, &mut rng)?.record
        }
        Algorithm::Dcc => {
            let dcc = DccConfig {
                fitness_target: Some(config.fitness_target),
                max_evaluations: config.max_evaluations,
                max_wall_seconds: config.max_wall_seconds,
                initial_sigma: config.initial_sigma,
                ..config.dcc.clone()
            };
            run_dcc(&obj, &dcc, seed)?.record
        }
    };
    record.meta.fingerprint = config.fingerprint();
    record.meta.function = config.function.clone();
    record.meta.algorithm = config.algorithm.clone();
    record.meta.seed = seed;
    Ok(record)
}

/// One record per seed, in seed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    config.seeds.iter().map(|&s| run_seed(config, s)).collect()
}

/// Writes `<function>_<algorithm>_seed<seed>.csv` per record and
/// `summary.csv` into `dir`. Returns the record paths.
pub fn write_records(dir: &Path, records: &[RunRecord], target: f64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(records.len());
    for r in records {
        let path = dir.join(format!("{}_{}_seed{}.csv", r.meta.function, r.meta.algorithm, r.meta.seed));
        fs::write(&path, r.to_csv())?;
        paths.push(path);
    }
    fs::write(dir.join("summary.csv"), summary_csv(&summarize(records, target)))?;
    Ok(paths)
}

/// Per (function, algorithm) aggregate.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub function: String,
    pub algorithm: String,
    pub runs: usize,
    pub median_final: f64,
    /// Infinite when fewer than half of the runs reached the target.
    pub median_evaluations_to_target: f64,
    pub successes: usize,
}

/// Median; the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else if v[m - 1] == v[m] {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Groups records by (function, algorithm) in order of first appearance.
pub fn summarize(records: &[RunRecord], target: f64) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in records {
        let key = (r.meta.function.clone(), r.meta.algorithm.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(function, algorithm)| {
            let group: Vec<&RunRecord> =
                records.iter().filter(|r| r.meta.function == function && r.meta.algorithm == algorithm).collect();
            let finals: Vec<f64> = group.iter().map(|r| r.final_best()).collect();
            let to_target: Vec<f64> =
                group.iter().map(|r| r.evaluations_to(target).map_or(f64::INFINITY, |e| e as f64)).collect();
            SummaryRow {
                runs: group.len(),
                median_final: median(&finals),
                median_evaluations_to_target: median(&to_target),
                successes: to_target.iter().filter(|e| e.is_finite()).count(),
                function,
                algorithm,
            }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("function,algorithm,runs,median_final_f,median_evals_to_target,successes\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:e},{},{}\n",
            r.function, r.algorithm, r.runs, r.median_final, r.median_evaluations_to_target, r.successes
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{RecordPoint, Status};

    fn record(final_f: f64, reached_at: Option<u64>) -> RunRecord {
        let mut r = RunRecord::new("cma");
        r.meta.function = "sphere".into();
        r.push(RecordPoint { cycle: 0, evaluations: 1, best_f: 10.0, wall_ms: 0.0 });
        if let Some(e) = reached_at {
            r.push(RecordPoint { cycle: 1, evaluations: e, best_f: 1e-11, wall_ms: 0.0 });
        }
        r.push(RecordPoint { cycle: 2, evaluations: 1_000_000, best_f: final_f, wall_ms: 0.0 });
        r.status = Status::BudgetExhausted;
        r
    }

    #[test]
    fn medians() {
        let rs: Vec<RunRecord> = [1.0, 2.0, 3.0, 4.0, 5.0].iter().map(|&f| record(f, None)).collect();
        let rows = summarize(&rs, DEFAULT_TARGET);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].median_final, 3.0);
        assert_eq!(rows[0].median_evaluations_to_target, f64::INFINITY);
        assert_eq!(rows[0].successes, 0);
        assert_eq!(median(&[1.0, 3.0]), 2.0);
    }

    #[test]
    fn identical_records_summarize_to_themselves() {
        let rs = vec![record(1e-11, Some(5000)); 5];
        let row = &summarize(&rs, DEFAULT_TARGET)[0];
        assert_eq!(row.median_final, rs[0].final_best());
        assert_eq!(row.median_evaluations_to_target, 5000.0);
        assert_eq!(row.successes, 5);
    }

    #[test]
    fn validation() {
        let c = ExperimentConfig { function: "nope".into(), ..ExperimentConfig::default() };
        match c.validate() {
            Err(Error::UnknownFunction { valid, .. }) => assert!(valid.contains("ellipsoid")),
            other => panic!("{other:?}"),
        }
        let c = ExperimentConfig { algorithm: "pso".into(), ..ExperimentConfig::default() };
        assert!(matches!(c.validate(), Err(Error::UnknownAlgorithm { .. })));
        let c = ExperimentConfig { max_wall_seconds: None, ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { fitness_target: 0.0, ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn fingerprint_tracks_fields() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.dcc.better_fraction = 0.25;
        assert_ne!(a.fingerprint(), b.fingerprint());
        let c = ExperimentConfig { seeds: vec![1, 2, 3, 4, 6], ..a.clone() };
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn zero_budget_keeps_only_the_start() {
        for alg in ALGORITHMS {
            let c = ExperimentConfig {
                function: "sphere".into(),
                dimension: 8,
                seeds: vec![1, 2],
                algorithm: alg.into(),
                max_evaluations: Some(0),
                groups: 2,
                dcc: DccConfig { p: 2, k: 2, ..DccConfig::default() },
                ..ExperimentConfig::default()
            };
            for r in run_experiment(&c).unwrap() {
                assert_eq!(r.points.len(), 1, "{alg}");
                assert_eq!(r.status, Status::BudgetExhausted);
            }
        }
    }

    #[test]
    fn toml_and_json_agree() {
        let dir = tempfile::tempdir().unwrap();
        let toml_path = dir.path().join("c.toml");
        fs::write(&toml_path, "function = \"ellipsoid\"\ndimension = 16\nalgorithm = \"cma\"\nmax_evaluations = 1000\n[dcc]\np = 4\n").unwrap();
        let json_path = dir.path().join("c.json");
        fs::write(&json_path, r#"{"function":"ellipsoid","dimension":16,"algorithm":"cma","max_evaluations":1000,"dcc":{"p":4}}"#).unwrap();
        let a = ExperimentConfig::load(&toml_path).unwrap();
        assert_eq!(a, ExperimentConfig::load(&json_path).unwrap());
        assert_eq!(a.dcc.p, 4);
        fs::write(&json_path, r#"{"function":"sphere","typo":1}"#).unwrap();
        assert!(ExperimentConfig::load(&json_path).is_err());
    }
}
