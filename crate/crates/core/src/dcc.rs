//! Distributed cooperative coevolution: LM-CMA workers in the full space and
//! CC workers on decomposed subspaces run in parallel for a short budget,
//! then a serial meta level averages means, pools search directions, spawns
//! step-sizes and keeps the best-so-far solution.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cc::{cc_cycle_limited, CcConfig, CcState};
use crate::cma::{default_lambda, log_rank_weights, rank, DEFAULT_SIGMA};
use crate::error::{invalid, Error, Result};
use crate::lmcma::{lmcma_step, LmcmaState};
use crate::objective::{uniform_vector, Objective};
use crate::partition::{default_decompose, Partition};
use crate::record::{RecordPoint, RunRecord, Status, Stopwatch};

/// Driver configuration. Counts refer to worker threads only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DccConfig {
    pub p: usize,
    /// LM-CMA workers; `ceil(3p/4)` when absent.
    pub p_es: Option<usize>,
    /// CC workers; `p − p_es` when absent.
    pub p_cc: Option<usize>,
    /// Groups per CC worker.
    pub k: usize,
    /// Evaluations per worker per cycle; 100 λ of the full space when absent.
    pub cycle_evals: Option<usize>,
    pub better_fraction: f64,
    pub elitist_fraction: f64,
    pub meta_sigma_factors: (f64, f64),
    pub initial_sigma: f64,
    /// Non-elitist LM-CMA workers that also receive CC directions.
    pub inject_workers: usize,
    pub fitness_target: Option<f64>,
    pub max_evaluations: Option<u64>,
    pub max_cycles: Option<u64>,
    pub max_wall_seconds: Option<f64>,
}

impl Default for DccConfig {
    fn default() -> Self {
        Self {
            p: 8,
            p_es: None,
            p_cc: None,
            k: 4,
            cycle_evals: None,
            better_fraction: 0.2,
            elitist_fraction: 0.05,
            meta_sigma_factors: (2.0, 0.5),
            initial_sigma: DEFAULT_SIGMA,
            inject_workers: 1,
            fitness_target: None,
            max_evaluations: None,
            max_cycles: None,
            max_wall_seconds: None,
        }
    }
}

impl DccConfig {
    pub fn with_workers(p_es: usize, p_cc: usize) -> Self {
        Self { p: p_es + p_cc, p_es: Some(p_es), p_cc: Some(p_cc), ..Self::default() }
    }

    /// `(p_es, p_cc)` after defaults.
    pub fn split(&self) -> (usize, usize) {
        let p_es = self.p_es.unwrap_or_else(|| match self.p_cc {
            Some(c) => self.p.saturating_sub(c),
            None => (3 * self.p).div_ceil(4),
        });
        (p_es, self.p_cc.unwrap_or(self.p.saturating_sub(p_es)))
    }

    pub fn cycle_evals_for(&self, n: usize) -> usize {
        self.cycle_evals.unwrap_or(100 * default_lambda(n))
    }

    /// Subsolver settings of the CC workers: one cycle spends about
    /// `cycle_evals` split evenly over the `k` groups.
    pub fn cc_config(&self, n: usize) -> CcConfig {
        let group_max = n.div_ceil(self.k.max(1));
        let per_group = (self.cycle_evals_for(n) / self.k.max(1)).max(default_lambda(group_max));
        CcConfig { per_group_budget: Some(per_group), initial_sigma: self.initial_sigma, ..CcConfig::default() }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let (p_es, p_cc) = self.split();
        if self.p == 0 || p_es + p_cc != self.p {
            return Err(invalid(format!("p_es + p_cc must equal p >= 1, got {p_es} + {p_cc} vs {}", self.p)));
        }
        if !(self.elitist_fraction > 0.0 && self.elitist_fraction <= self.better_fraction && self.better_fraction < 1.0) {
            return Err(invalid(format!(
                "need 0 < elitist_fraction <= better_fraction < 1, got {} and {}",
                self.elitist_fraction, self.better_fraction
            )));
        }
        let (a, b) = self.meta_sigma_factors;
        if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
            return Err(invalid("meta_sigma_factors must be positive"));
        }
        if !(self.initial_sigma.is_finite() && self.initial_sigma > 0.0) {
            return Err(invalid("initial_sigma must be positive"));
        }
        if p_cc > 0 && (self.k < 2 || self.k > n) {
            return Err(invalid(format!("CC workers need 2 <= k <= n, got k={} for n={n}", self.k)));
        }
        if self.cycle_evals == Some(0) {
            return Err(invalid("cycle_evals must be positive"));
        }
        Ok(())
    }
}

/// Rng of worker `index`: the master seed on stream `index`, so worker 0
/// draws exactly what `ChaCha8Rng::seed_from_u64(seed)` draws.
pub fn worker_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Partition of the `cc_index`-th CC worker.
pub fn worker_partition(n: usize, k: usize, seed: u64, cc_index: usize) -> Result<Partition> {
    default_decompose(n, k, seed.wrapping_add(cc_index as u64))
}

fn count(fraction: f64, of: usize) -> usize {
    ((fraction * of as f64 - 1e-9).ceil() as usize).clamp(1, of.max(1))
}

#[derive(Clone, Debug)]
pub enum Worker {
    Es(LmcmaState),
    Cc(CcState),
}

impl Worker {
    fn mean(&self) -> &[f64] {
        match self {
            Worker::Es(s) => s.mean(),
            Worker::Cc(s) => s.context(),
        }
    }

    /// Best fitness seen in the last cycle (LM-CMA) or context fitness (CC).
    fn fitness(&self) -> f64 {
        match self {
            Worker::Es(s) => s.best().1,
            Worker::Cc(s) => s.context_fitness(),
        }
    }

    fn best_point(&self) -> (&[f64], f64) {
        match self {
            Worker::Es(s) => s.best(),
            Worker::Cc(s) => (s.context(), s.context_fitness()),
        }
    }

    fn healthy(&self) -> bool {
        match self {
            Worker::Es(s) => s.is_healthy(),
            Worker::Cc(s) => s.context().iter().all(|v| v.is_finite()) && !s.context_fitness().is_nan(),
        }
    }
}

/// Everything carried from one cycle to the next.
#[derive(Clone, Debug)]
pub struct MetaState {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub workers: Vec<Worker>,
    rngs: Vec<ChaCha8Rng>,
    meta_rng: ChaCha8Rng,
    pub cycle: u64,
    pub evaluations: u64,
    /// Workers that failed in the last cycle and were restarted.
    pub reinitialized: Vec<usize>,
}

impl MetaState {
    /// Workers `0..p_es` are LM-CMA, the rest CC. Each draws its start
    /// uniformly in the initial box from its own stream and evaluates it.
    pub fn new<O: Objective + ?Sized>(obj: &O, config: &DccConfig, seed: u64) -> Result<Self> {
        let n = obj.dim();
        config.validate(n)?;
        let (p_es, p_cc) = config.split();
        let mut rngs: Vec<ChaCha8Rng> = (0..config.p).map(|i| worker_rng(seed, i)).collect();
        let mut workers = Vec::with_capacity(config.p);
        let mut evaluations = 0;
        for (i, rng) in rngs.iter_mut().enumerate() {
            let x0 = uniform_vector(n, rng);
            evaluations += 1;
            if i < p_es {
                let mut s = LmcmaState::new(x0, config.initial_sigma)?;
                let f0 = obj.value(s.mean());
                let m = s.mean().to_vec();
                s.offer_best(&m, f0);
                workers.push(Worker::Es(s));
            } else {
                let part = worker_partition(n, config.k, seed, i - p_es)?;
                workers.push(Worker::Cc(CcState::new(obj, part, x0, config.initial_sigma)?));
            }
        }
        debug_assert_eq!(workers.len(), p_es + p_cc);
        let (best_x, best_f) = best_of(&workers, None);
        Ok(Self {
            best_x,
            best_f,
            workers,
            rngs,
            meta_rng: worker_rng(seed, config.p),
            cycle: 0,
            evaluations,
            reinitialized: Vec::new(),
        })
    }
}

fn best_of(workers: &[Worker], current: Option<(&[f64], f64)>) -> (Vec<f64>, f64) {
    let mut best: (Vec<f64>, f64) = current.map_or((Vec::new(), f64::INFINITY), |(x, f)| (x.to_vec(), f));
    for w in workers {
        let (x, f) = w.best_point();
        if f < best.1 || best.0.is_empty() {
            best = (x.to_vec(), f);
        }
    }
    best
}

/// Shared mean and the elitist workers.
///
/// The mean is the log-rank weighted average of the better half of the
/// workers' means. The `ceil(elitist_fraction · p)` best workers are
/// returned in rank order.
pub fn meta_mean_update(worker_means: &[Vec<f64>], worker_fitness: &[f64], elitist_fraction: f64) -> Result<(Vec<f64>, Vec<usize>)> {
    let p = worker_means.len();
    if p == 0 || worker_fitness.len() != p {
        return Err(invalid("meta_mean_update needs one fitness per worker and at least one worker"));
    }
    let n = worker_means[0].len();
    if let Some(m) = worker_means.iter().find(|m| m.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: m.len() });
    }
    let order = rank(worker_fitness);
    let weights = log_rank_weights((p / 2).max(1));
    // offsets from the best mean, so equal means average to themselves exactly
    let anchor = &worker_means[order[0]];
    let mut mean = anchor.clone();
    for (w, &i) in weights.iter().zip(&order).skip(1) {
        for ((m, x), a) in mean.iter_mut().zip(&worker_means[i]).zip(anchor) {
            *m += w * (x - a);
        }
    }
    let elitists = order[..count(elitist_fraction, p)].to_vec();
    Ok((mean, elitists))
}

/// Next-cycle step-sizes: the σ of the worker with the largest progress,
/// multiplied by the two factors alternately in worker order. A single
/// worker keeps its σ.
pub fn meta_es_sigma(worker_sigmas: &[f64], worker_progress: &[f64], factors: (f64, f64)) -> Vec<f64> {
    if worker_sigmas.len() < 2 {
        return worker_sigmas.to_vec();
    }
    let best = worker_progress
        .iter()
        .enumerate()
        .filter(|(_, d)| !d.is_nan())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i);
    let base = worker_sigmas[best];
    (0..worker_sigmas.len()).map(|i| base * if i % 2 == 0 { factors.0 } else { factors.1 }).collect()
}

/// What [`collective_covariance_learning`] did.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LearningReport {
    /// LM-CMA workers whose paths formed the pool, best first.
    pub pool_sources: Vec<usize>,
    /// Workers that received a resampled memory.
    pub resampled: Vec<usize>,
    /// Workers that also received CC directions.
    pub injected: Vec<usize>,
}

/// Pools the stored paths of the `ceil(better_fraction · p_es)` best LM-CMA
/// workers and gives every worker not in `keep` a uniform resample of that
/// pool (without replacement, pool order kept). The last `inject_count` of
/// those workers then have the newest half of their memory replaced by
/// `directions`, scaled to the typical path length `√n`.
pub fn collective_covariance_learning<R: Rng + ?Sized>(
    states: &mut [&mut LmcmaState],
    fitness: &[f64],
    keep: &[usize],
    directions: &[Vec<f64>],
    better_fraction: f64,
    inject_count: usize,
    rng: &mut R,
) -> Result<LearningReport> {
    let p_es = states.len();
    if p_es == 0 || fitness.len() != p_es {
        return Err(invalid("collective learning needs one fitness per LM-CMA worker"));
    }
    let order = rank(fitness);
    let pool_sources = order[..count(better_fraction, p_es)].to_vec();
    let pool: Vec<Vec<f64>> = pool_sources.iter().flat_map(|&i| states[i].paths().to_vec()).collect();
    let mut report = LearningReport { pool_sources, ..LearningReport::default() };
    if pool.is_empty() {
        return Ok(report);
    }
    let targets: Vec<usize> = (0..p_es).filter(|i| !keep.contains(i)).collect();
    let inject_from = targets.len().saturating_sub(inject_count);
    for (t, &i) in targets.iter().enumerate() {
        let state = &mut states[i];
        let n = state.dim();
        let capacity = state.params().memory_size;
        let mut picks = index::sample(rng, pool.len(), capacity.min(pool.len())).into_vec();
        picks.sort_unstable();
        let mut paths: Vec<Vec<f64>> = picks.into_iter().map(|j| pool[j].clone()).collect();
        if t >= inject_from && !directions.is_empty() {
            let slots = (capacity / 2).min(directions.len()).max(1);
            let offset = rng.random_range(0..directions.len());
            paths.truncate(capacity - slots);
            let scale = (n as f64).sqrt();
            for s in 0..slots {
                let d = &directions[(offset + s) % directions.len()];
                if d.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: d.len() });
                }
                paths.push(d.iter().map(|v| v * scale).collect());
            }
            report.injected.push(i);
        }
        state.set_paths(paths)?;
        report.resampled.push(i);
    }
    Ok(report)
}

/// One cycle's bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct DccCycleReport {
    pub worker_evaluations: Vec<usize>,
    pub meta_evaluations: usize,
    pub elitists: Vec<usize>,
    pub learning: LearningReport,
}

impl DccCycleReport {
    pub fn total(&self) -> usize {
        self.worker_evaluations.iter().sum::<usize>() + self.meta_evaluations
    }
}

fn run_worker<O: Objective + ?Sized>(
    worker: &mut Worker,
    rng: &mut ChaCha8Rng,
    obj: &O,
    budget: usize,
    cc_config: &CcConfig,
) -> Result<usize> {
    match worker {
        Worker::Es(s) => {
            s.reset_best();
            let mut used = 0;
            while used + s.lambda() <= budget && s.is_healthy() {
                used += lmcma_step(s, obj, rng)?;
            }
            Ok(used)
        }
        Worker::Cc(s) => Ok(cc_cycle_limited(s, obj, cc_config, budget, rng)?.evaluations),
    }
}

/// Runs every worker for up to `worker_budget` evaluations in parallel, then
/// the serial meta steps in order: mean averaging (with step-size spawning),
/// collective covariance learning, best-so-far update.
pub fn dcc_cycle<O: Objective + ?Sized>(
    meta: &mut MetaState,
    obj: &O,
    config: &DccConfig,
    worker_budget: usize,
) -> Result<DccCycleReport> {
    let n = obj.dim();
    let (p_es, _) = config.split();
    let cc_config = config.cc_config(n);
    let results: Vec<Result<usize>> = if meta.workers.len() == 1 {
        vec![run_worker(&mut meta.workers[0], &mut meta.rngs[0], obj, worker_budget, &cc_config)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = meta
                .workers
                .iter_mut()
                .zip(meta.rngs.iter_mut())
                .map(|(w, r)| {
                    let cc_config = &cc_config;
                    scope.spawn(move || run_worker(w, r, obj, worker_budget, cc_config))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(invalid("worker panicked"))))
                .collect()
        })
    };
    let mut worker_evaluations = Vec::with_capacity(results.len());
    let mut failed = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(e) => worker_evaluations.push(e),
            Err(_) => {
                worker_evaluations.push(worker_budget);
                failed.push(i);
            }
        }
        if !meta.workers[i].healthy() && !failed.contains(&i) {
            failed.push(i);
        }
    }
    let mut meta_evaluations = 0;

    // mean averaging and elitist retention
    let means: Vec<Vec<f64>> = meta.workers.iter().map(|w| w.mean().to_vec()).collect();
    let fitness: Vec<f64> = meta
        .workers
        .iter()
        .enumerate()
        .map(|(i, w)| if failed.contains(&i) { f64::INFINITY } else { w.fitness() })
        .collect();
    let (shared, elitists) = meta_mean_update(&means, &fitness, config.elitist_fraction)?;
    let mut shared_f = f64::INFINITY;
    if elitists.len() < meta.workers.len() && shared.iter().all(|v| v.is_finite()) {
        shared_f = obj.value(&shared);
        meta_evaluations += 1;
    }
    let es_fitness: Vec<f64> = fitness[..p_es].to_vec();
    let sigmas: Vec<f64> = meta.workers[..p_es]
        .iter()
        .map(|w| match w {
            Worker::Es(s) => s.sigma(),
            Worker::Cc(_) => unreachable!("LM-CMA workers come first"),
        })
        .collect();
    let progress: Vec<f64> = es_fitness.iter().map(|f| meta.best_f - f).collect();
    let spawned = meta_es_sigma(&sigmas, &progress, config.meta_sigma_factors);
    for (i, w) in meta.workers.iter_mut().enumerate() {
        if elitists.contains(&i) || failed.contains(&i) {
            continue;
        }
        match w {
            Worker::Es(s) => {
                s.set_mean(&shared);
                s.reset_paths();
                s.set_sigma(spawned[i]);
            }
            Worker::Cc(s) => {
                s.adopt(&shared, shared_f);
            }
        }
    }

    // collective covariance learning
    let directions: Vec<Vec<f64>> = meta
        .workers
        .iter()
        .filter_map(|w| match w {
            Worker::Cc(s) => Some(s.embedded_directions()),
            Worker::Es(_) => None,
        })
        .flatten()
        .collect();
    let learning = if p_es > 0 {
        let mut states: Vec<&mut LmcmaState> = meta
            .workers
            .iter_mut()
            .filter_map(|w| match w {
                Worker::Es(s) => Some(s),
                Worker::Cc(_) => None,
            })
            .collect();
        let keep: Vec<usize> = elitists.iter().copied().chain(failed.iter().copied()).filter(|&i| i < p_es).collect();
        collective_covariance_learning(
            &mut states,
            &es_fitness,
            &keep,
            &directions,
            config.better_fraction,
            config.inject_workers,
            &mut meta.meta_rng,
        )?
    } else {
        LearningReport::default()
    };

    // best-so-far
    let candidates = meta.workers.iter().enumerate().filter(|(i, _)| !failed.contains(i)).map(|(_, w)| w.best_point());
    for (x, f) in candidates.chain(std::iter::once((shared.as_slice(), shared_f))) {
        if f < meta.best_f {
            meta.best_f = f;
            meta.best_x = x.to_vec();
        }
    }
    for w in meta.workers.iter_mut() {
        if let Worker::Cc(s) = w {
            s.adopt(&meta.best_x, meta.best_f);
        }
    }

    // failed workers restart from the shared mean (or the best point)
    let restart = if shared.iter().all(|v| v.is_finite()) { shared.clone() } else { meta.best_x.clone() };
    for &i in &failed {
        meta.workers[i] = match &meta.workers[i] {
            Worker::Es(_) => Worker::Es(LmcmaState::new(restart.clone(), config.initial_sigma)?),
            Worker::Cc(s) => {
                meta_evaluations += 1;
                Worker::Cc(CcState::new(obj, s.partition().clone(), restart.clone(), config.initial_sigma)?)
            }
        };
    }
    meta.reinitialized = failed;
    meta.cycle += 1;
    let report = DccCycleReport { worker_evaluations, meta_evaluations, elitists, learning };
    meta.evaluations += report.total() as u64;
    Ok(report)
}

/// Final meta state of [`run_dcc`] with its record.
#[derive(Clone, Debug)]
pub struct DccRun {
    pub record: RunRecord,
    pub meta: MetaState,
}

/// Cycles until the fitness target, the evaluation budget, the cycle cap or
/// the wall-clock budget is hit. Worker budgets shrink in the last cycle so
/// the evaluation budget is not overrun by more than the meta-level
/// evaluations.
pub fn run_dcc<O: Objective + ?Sized>(obj: &O, config: &DccConfig, seed: u64) -> Result<DccRun> {
    let clock = Stopwatch::start();
    let mut meta = MetaState::new(obj, config, seed)?;
    let mut record = RunRecord::new("dcc");
    record.push(RecordPoint { cycle: 0, evaluations: meta.evaluations, best_f: meta.best_f, wall_ms: clock.ms() });
    let cycle_evals = config.cycle_evals_for(obj.dim());
    let max_evals = config.max_evaluations.unwrap_or(u64::MAX);
    record.status = loop {
        if config.fitness_target.is_some_and(|t| meta.best_f <= t) {
            break Status::TargetReached;
        }
        if config.max_cycles.is_some_and(|c| meta.cycle >= c) || config.max_wall_seconds.is_some_and(|s| clock.secs() >= s) {
            break Status::BudgetExhausted;
        }
        let remaining = max_evals.saturating_sub(meta.evaluations);
        let budget = usize::try_from(remaining / config.p as u64).unwrap_or(usize::MAX).min(cycle_evals);
        if budget == 0 {
            break Status::BudgetExhausted;
        }
        let report = dcc_cycle(&mut meta, obj, config, budget)?;
        if report.worker_evaluations.iter().all(|&e| e == 0) {
            break Status::BudgetExhausted;
        }
        record.push(RecordPoint { cycle: meta.cycle, evaluations: meta.evaluations, best_f: meta.best_f, wall_ms: clock.ms() });
    };
    Ok(DccRun { record, meta })
}
