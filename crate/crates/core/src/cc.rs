//! Serial cooperative coevolution: every cycle visits the groups of a
//! partition in ascending order and runs a subspace CMA-ES against the
//! current context, splicing a result in only when it strictly improves.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cma::{default_lambda, optimize_subspace_with, CmaState, DEFAULT_SIGMA};
use crate::error::{invalid, Error, Result};
use crate::objective::{uniform_vector, Objective};
use crate::partition::Partition;
use crate::record::{RecordPoint, RunRecord, Status, Stopwatch};

/// Smallest fitness decrease that counts as progress.
pub const TOL_FIX: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcConfig {
    /// Evaluations per group per cycle; `None` means 50 λ of that group.
    pub per_group_budget: Option<usize>,
    pub tol_fix: f64,
    /// Consecutive fixed-point cycles before stopping.
    pub patience: u32,
    pub initial_sigma: f64,
    pub fitness_target: Option<f64>,
    pub max_evaluations: Option<u64>,
    pub max_cycles: Option<u64>,
    pub max_wall_seconds: Option<f64>,
    /// Starting context; uniform in the initial box when absent.
    pub initial_point: Option<Vec<f64>>,
}

impl Default for CcConfig {
    fn default() -> Self {
        Self {
            per_group_budget: None,
            tol_fix: TOL_FIX,
            patience: 3,
            initial_sigma: DEFAULT_SIGMA,
            fitness_target: None,
            max_evaluations: None,
            max_cycles: None,
            max_wall_seconds: None,
            initial_point: None,
        }
    }
}

impl CcConfig {
    pub fn group_budget(&self, group_len: usize) -> usize {
        self.per_group_budget.unwrap_or(50 * default_lambda(group_len))
    }
}

/// Context vector plus one persistent CMA-ES state per group.
#[derive(Clone, Debug)]
pub struct CcState {
    partition: Partition,
    context: Vec<f64>,
    context_fitness: f64,
    sub_states: Vec<CmaState>,
    initial_sigma: f64,
    cycle: u64,
    fixed_point: bool,
    fixed_streak: u32,
}

/// What one cycle did.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleReport {
    pub evaluations: usize,
    /// Fitness decrease contributed by each group (0 when not spliced).
    pub improvements: Vec<f64>,
}

impl CcState {
    /// Evaluates `context` once.
    pub fn new<O: Objective + ?Sized>(obj: &O, partition: Partition, context: Vec<f64>, initial_sigma: f64) -> Result<Self> {
        if context.len() != obj.dim() {
            return Err(Error::DimensionMismatch { expected: obj.dim(), got: context.len() });
        }
        if partition.n() != obj.dim() {
            return Err(Error::DimensionMismatch { expected: obj.dim(), got: partition.n() });
        }
        if let Some(v) = partition.validate().violation {
            return Err(invalid(format!("invalid partition: {v}")));
        }
        let sub_states = partition
            .groups()
            .iter()
            .map(|g| CmaState::new(g.iter().map(|&i| context[i]).collect(), initial_sigma))
            .collect::<Result<Vec<_>>>()?;
        let context_fitness = obj.value(&context);
        Ok(Self {
            partition,
            context,
            context_fitness,
            sub_states,
            initial_sigma,
            cycle: 0,
            fixed_point: false,
            fixed_streak: 0,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn context(&self) -> &[f64] {
        &self.context
    }

    pub fn context_fitness(&self) -> f64 {
        self.context_fitness
    }

    pub fn sub_states(&self) -> &[CmaState] {
        &self.sub_states
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn fixed_point(&self) -> bool {
        self.fixed_point
    }

    /// Consecutive cycles that ended with the fixed-point flag set.
    pub fn fixed_streak(&self) -> u32 {
        self.fixed_streak
    }

    /// Replaces the context when `fitness` is strictly better.
    pub fn adopt(&mut self, x: &[f64], fitness: f64) -> bool {
        if x.len() == self.context.len() && fitness < self.context_fitness {
            self.context.copy_from_slice(x);
            self.context_fitness = fitness;
            true
        } else {
            false
        }
    }

    /// Per group, the unit leading eigenvector of its covariance embedded
    /// into the full space with zeros elsewhere.
    pub fn embedded_directions(&self) -> Vec<Vec<f64>> {
        self.partition
            .groups()
            .iter()
            .zip(&self.sub_states)
            .map(|(g, s)| {
                let mut full = vec![0.0; self.context.len()];
                for (&i, v) in g.iter().zip(s.leading_direction()) {
                    full[i] = v;
                }
                full
            })
            .collect()
    }
}

/// One pass over all groups in ascending order (Gauss-Seidel: every group
/// sees the splices made before it in the same cycle).
pub fn cc_cycle<O, R>(state: &mut CcState, obj: &O, config: &CcConfig, rng: &mut R) -> Result<CycleReport>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    cc_cycle_limited(state, obj, config, usize::MAX, rng)
}

/// Like [`cc_cycle`] but never spends more than `max_evals`. Groups whose
/// budget no longer fits one generation are skipped.
pub fn cc_cycle_limited<O, R>(
    state: &mut CcState,
    obj: &O,
    config: &CcConfig,
    max_evals: usize,
    rng: &mut R,
) -> Result<CycleReport>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let mut used = 0;
    let mut improvements = Vec::with_capacity(state.partition.len());
    for g in 0..state.partition.len() {
        let group = state.partition.group(g).to_vec();
        let sub = &mut state.sub_states[g];
        let budget = config.group_budget(group.len()).min(max_evals - used);
        if budget < sub.lambda() {
            improvements.push(0.0);
            continue;
        }
        let start: Vec<f64> = group.iter().map(|&i| state.context[i]).collect();
        sub.set_mean(&start);
        if state.cycle > 0 {
            sub.normalize_scale();
            sub.set_sigma((sub.sigma() * 10.0).min(state.initial_sigma));
        }
        sub.reset_best();
        let result = optimize_subspace_with(obj, &state.context, state.context_fitness, &group, sub, budget, rng)?;
        used += result.evaluations;
        if result.fitness < state.context_fitness {
            improvements.push(state.context_fitness - result.fitness);
            for (&i, v) in group.iter().zip(&result.best) {
                state.context[i] = *v;
            }
            state.context_fitness = result.fitness;
        } else {
            improvements.push(0.0);
        }
    }
    state.cycle += 1;
    state.fixed_point = improvements.iter().all(|&d| d <= config.tol_fix);
    state.fixed_streak = if state.fixed_point { state.fixed_streak + 1 } else { 0 };
    Ok(CycleReport { evaluations: used, improvements })
}

/// Final state of [`run_cc`] with its convergence record.
#[derive(Clone, Debug)]
pub struct CcRun {
    pub record: RunRecord,
    pub state: CcState,
}

/// Cycles until the target is met, a budget runs out, or the fixed-point
/// flag has held for `patience` cycles. With no bound set at all the run
/// stops only at a fixed point.
pub fn run_cc<O, R>(obj: &O, partition: &Partition, config: &CcConfig, rng: &mut R) -> Result<CcRun>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    if !(config.initial_sigma.is_finite() && config.initial_sigma > 0.0) {
        return Err(invalid("initial_sigma must be positive"));
    }
    let x0 = match &config.initial_point {
        Some(x) => x.clone(),
        None => uniform_vector(obj.dim(), rng),
    };
    let clock = Stopwatch::start();
    let mut state = CcState::new(obj, partition.clone(), x0, config.initial_sigma)?;
    let mut record = RunRecord::new("cc");
    let mut evaluations: u64 = 1;
    record.push(RecordPoint { cycle: 0, evaluations, best_f: state.context_fitness, wall_ms: clock.ms() });
    let max_evals = config.max_evaluations.unwrap_or(u64::MAX);
    record.status = loop {
        if config.fitness_target.is_some_and(|t| state.context_fitness <= t) {
            break Status::TargetReached;
        }
        if state.fixed_streak >= config.patience.max(1) {
            break Status::FixedPoint;
        }
        if evaluations >= max_evals
            || config.max_cycles.is_some_and(|c| state.cycle >= c)
            || config.max_wall_seconds.is_some_and(|s| clock.secs() >= s)
        {
            break Status::BudgetExhausted;
        }
        let remaining = usize::try_from(max_evals - evaluations).unwrap_or(usize::MAX);
        let report = cc_cycle_limited(&mut state, obj, config, remaining, rng)?;
        if report.evaluations == 0 {
            break Status::BudgetExhausted;
        }
        evaluations += report.evaluations as u64;
        record.push(RecordPoint {
            cycle: state.cycle,
            evaluations,
            best_f: state.context_fitness,
            wall_ms: clock.ms(),
        });
    };
    Ok(CcRun { record, state })
}
