//! Full CMA-ES (rank-one plus rank-μ covariance update, cumulative step-size
//! adaptation), used on low-dimensional subspaces against a frozen context.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::objective::{uniform_vector, Objective};
use crate::record::{Budget, RecordPoint, RunRecord, Status, Stopwatch};

/// Initial step-size: 0.3 × the width of the (−10, 10) box.
pub const DEFAULT_SIGMA: f64 = 3.0;

/// Default population size `4 + floor(3 ln n)`.
pub fn default_lambda(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

/// Positive, nonincreasing log-rank weights summing to one.
pub fn log_rank_weights(mu: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..mu)
        .map(|i| (mu as f64 + 0.5).ln() - ((i + 1) as f64).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Expected norm of an n-dimensional standard normal vector.
pub fn chi_n(dim: usize) -> f64 {
    let n = dim as f64;
    n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
}

/// Strategy parameters with the usual CMA-ES defaults.
#[derive(Clone, Debug)]
pub struct CmaParams {
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mueff: f64,
    pub cc: f64,
    pub cs: f64,
    pub c1: f64,
    pub cmu: f64,
    pub damps: f64,
    pub chi_n: f64,
}

impl CmaParams {
    pub fn new(dim: usize) -> Self {
        Self::with_lambda(dim, default_lambda(dim))
    }

    pub fn with_lambda(dim: usize, lambda: usize) -> Self {
        let n = dim as f64;
        let lambda = lambda.max(2);
        let mu = lambda / 2;
        let weights = log_rank_weights(mu);
        let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let cc = (4.0 + mueff / n) / (n + 4.0 + 2.0 * mueff / n);
        let cs = (mueff + 2.0) / (n + mueff + 5.0);
        let c1 = 2.0 / ((n + 1.3).powi(2) + mueff);
        let cmu = (1.0 - c1).min(2.0 * (mueff - 2.0 + 1.0 / mueff) / ((n + 2.0).powi(2) + mueff));
        let damps = 1.0 + 2.0 * (((mueff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + cs;
        Self { lambda, mu, weights, mueff, cc, cs, c1, cmu, damps, chi_n: chi_n(dim) }
    }
}

/// State of one CMA-ES instance.
#[derive(Clone, Debug)]
pub struct CmaState {
    dim: usize,
    mean: DVector<f64>,
    sigma: f64,
    cov: DMatrix<f64>,
    p_sigma: DVector<f64>,
    p_c: DVector<f64>,
    params: CmaParams,
    generation: u64,
    // eigendecomposition of `cov`, refreshed by `ask`
    basis: DMatrix<f64>,
    scales: DVector<f64>,
    best_x: Vec<f64>,
    best_f: f64,
}

impl CmaState {
    pub fn new(mean: Vec<f64>, sigma: f64) -> Result<Self> {
        let dim = mean.len();
        Self::with_params(mean, sigma, CmaParams::new(dim))
    }

    pub fn with_params(mean: Vec<f64>, sigma: f64, params: CmaParams) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(invalid("CMA-ES needs at least one dimension"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!("sigma must be positive and finite, got {sigma}")));
        }
        Ok(Self {
            dim,
            best_x: mean.clone(),
            mean: DVector::from_vec(mean),
            sigma,
            cov: DMatrix::identity(dim, dim),
            p_sigma: DVector::zeros(dim),
            p_c: DVector::zeros(dim),
            params,
            generation: 0,
            basis: DMatrix::identity(dim, dim),
            scales: DVector::from_element(dim, 1.0),
            best_f: f64::INFINITY,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> usize {
        self.params.lambda
    }

    pub fn params(&self) -> &CmaParams {
        &self.params
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn set_mean(&mut self, mean: &[f64]) {
        self.mean.copy_from_slice(mean);
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn set_sigma(&mut self, sigma: f64) {
        self.sigma = sigma;
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Best sample seen by `tell` (the initial mean before any generation).
    pub fn best(&self) -> (&[f64], f64) {
        (&self.best_x, self.best_f)
    }

    /// Forget the best-so-far sample, e.g. after the context changed.
    pub fn reset_best(&mut self) {
        self.best_x = self.mean.as_slice().to_vec();
        self.best_f = f64::INFINITY;
    }

    /// Rescales C to unit mean eigenvalue and folds the factor into σ; the
    /// sampling distribution is unchanged.
    pub fn normalize_scale(&mut self) {
        let mean_eig = self.cov.trace() / self.dim as f64;
        if mean_eig.is_finite() && mean_eig > 0.0 {
            self.cov /= mean_eig;
            self.sigma *= mean_eig.sqrt();
            self.scales /= mean_eig.sqrt();
        }
    }

    /// σ times the largest axis length of the sampling distribution.
    pub fn max_step(&self) -> f64 {
        self.sigma * self.scales.max()
    }

    /// Unit eigenvector of the covariance with the largest eigenvalue.
    pub fn leading_direction(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(symmetrized(&self.cov));
        let k = eig.eigenvalues.imax();
        let v = eig.eigenvectors.column(k).into_owned();
        let norm = v.norm();
        v.iter().map(|x| x / norm).collect()
    }

    fn refresh_eigen(&mut self) -> Result<()> {
        if try_decompose(&self.cov).map(|(b, d)| {
            self.basis = b;
            self.scales = d;
        }).is_some()
        {
            return Ok(());
        }
        self.repair_covariance()?;
        let (b, d) = try_decompose(&self.cov).ok_or(Error::CovarianceFailure)?;
        self.basis = b;
        self.scales = d;
        Ok(())
    }

    /// Floors eigenvalues at `1e-20 · trace / dim`.
    fn repair_covariance(&mut self) -> Result<()> {
        let c = symmetrized(&self.cov);
        let trace = c.trace();
        if !trace.is_finite() || trace <= 0.0 || c.iter().any(|v| !v.is_finite()) {
            return Err(Error::CovarianceFailure);
        }
        let floor = 1e-20 * trace / self.dim as f64;
        let eig = SymmetricEigen::new(c);
        let values = eig.eigenvalues.map(|v| if v.is_finite() { v.max(floor) } else { floor });
        let b = &eig.eigenvectors;
        self.cov = symmetrized(&(b * DMatrix::from_diagonal(&values) * b.transpose()));
        Ok(())
    }

    /// Samples λ candidates `mean + σ B D z`.
    pub fn ask<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        self.refresh_eigen()?;
        let mut population = Vec::with_capacity(self.params.lambda);
        for _ in 0..self.params.lambda {
            let z = DVector::from_fn(self.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
            let y = &self.basis * z.component_mul(&self.scales);
            let x = &self.mean + y * self.sigma;
            population.push(x.as_slice().to_vec());
        }
        Ok(population)
    }

    /// Updates mean, evolution paths, covariance and σ from an evaluated
    /// population. Non-finite fitness values rank last.
    pub fn tell(&mut self, population: &[Vec<f64>], fitness: &[f64]) -> Result<()> {
        let p = &self.params;
        if population.len() != p.lambda || fitness.len() != p.lambda {
            return Err(invalid(format!(
                "expected {} candidates and fitness values, got {} and {}",
                p.lambda,
                population.len(),
                fitness.len()
            )));
        }
        if let Some(bad) = population.iter().find(|x| x.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, got: bad.len() });
        }
        let order = rank(fitness);
        if fitness[order[0]].is_finite() && fitness[order[0]] < self.best_f {
            self.best_f = fitness[order[0]];
            self.best_x = population[order[0]].clone();
        }

        let n = self.dim as f64;
        let old_mean = self.mean.clone();
        let steps: Vec<DVector<f64>> = order[..p.mu]
            .iter()
            .map(|&i| (DVector::from_column_slice(&population[i]) - &old_mean) / self.sigma)
            .collect();
        let mut y_w = DVector::zeros(self.dim);
        for (w, y) in p.weights.iter().zip(&steps) {
            y_w.axpy(*w, y, 1.0);
        }
        self.mean = &old_mean + &y_w * self.sigma;

        // C^{-1/2} y_w = B D^{-1} Bᵀ y_w
        let inv_scaled = (self.basis.transpose() * &y_w).component_div(&self.scales);
        let whitened = &self.basis * inv_scaled;
        self.p_sigma = &self.p_sigma * (1.0 - p.cs) + whitened * (p.cs * (2.0 - p.cs) * p.mueff).sqrt();

        let gen = (self.generation + 1) as f64;
        let ps_norm = self.p_sigma.norm();
        let hsig = ps_norm / (1.0 - (1.0 - p.cs).powf(2.0 * gen)).sqrt() / p.chi_n < 1.4 + 2.0 / (n + 1.0);
        let hsig_f = if hsig { 1.0 } else { 0.0 };
        self.p_c = &self.p_c * (1.0 - p.cc) + &y_w * (hsig_f * (p.cc * (2.0 - p.cc) * p.mueff).sqrt());

        let mut rank_mu = DMatrix::zeros(self.dim, self.dim);
        for (w, y) in p.weights.iter().zip(&steps) {
            rank_mu.ger(*w, y, y, 1.0);
        }
        let correction = (1.0 - hsig_f) * p.cc * (2.0 - p.cc);
        let rank_one = &self.p_c * self.p_c.transpose();
        self.cov = &self.cov * (1.0 - p.c1 - p.cmu + p.c1 * correction) + rank_one * p.c1 + rank_mu * p.cmu;
        self.cov = symmetrized(&self.cov);

        self.sigma *= ((p.cs / p.damps) * (ps_norm / p.chi_n - 1.0)).exp();
        self.generation += 1;
        Ok(())
    }
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `(B, sqrt(eigenvalues))` when every eigenvalue is finite and positive.
fn try_decompose(cov: &DMatrix<f64>) -> Option<(DMatrix<f64>, DVector<f64>)> {
    if cov.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let eig = SymmetricEigen::new(symmetrized(cov));
    if eig.eigenvalues.iter().all(|v| v.is_finite() && *v > 0.0) {
        Some((eig.eigenvectors, eig.eigenvalues.map(f64::sqrt)))
    } else {
        None
    }
}

/// Indices sorted by ascending fitness; non-finite values rank last in input order.
pub fn rank(fitness: &[f64]) -> Vec<usize> {
    let key = |f: f64| if f.is_finite() { f } else { f64::INFINITY };
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| key(fitness[a]).total_cmp(&key(fitness[b])));
    order
}

/// Outcome of a subspace search.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceResult {
    /// Best values for the group's coordinates, in group order.
    pub best: Vec<f64>,
    /// Full-space fitness of the context with `best` spliced in.
    pub fitness: f64,
    pub evaluations: usize,
}

/// Runs a fresh CMA-ES on the coordinates in `group`, all others frozen at
/// `context`. Spends one extra evaluation on the context itself.
pub fn optimize_subspace<O, R>(
    obj: &O,
    context: &[f64],
    group: &[usize],
    budget_evals: usize,
    rng: &mut R,
) -> Result<SubspaceResult>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    if context.len() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), got: context.len() });
    }
    check_group(group, context.len())?;
    let start: Vec<f64> = group.iter().map(|&i| context[i]).collect();
    let mut state = CmaState::new(start, DEFAULT_SIGMA)?;
    let context_fitness = obj.value(context);
    let mut result = optimize_subspace_with(obj, context, context_fitness, group, &mut state, budget_evals, rng)?;
    result.evaluations += 1;
    Ok(result)
}

/// Subspace search with a caller-owned state and a known context fitness.
/// Returns the context's own values unless a strictly better candidate was
/// found, so the returned fitness never exceeds `context_fitness`.
pub fn optimize_subspace_with<O, R>(
    obj: &O,
    context: &[f64],
    context_fitness: f64,
    group: &[usize],
    state: &mut CmaState,
    budget_evals: usize,
    rng: &mut R,
) -> Result<SubspaceResult>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    check_group(group, context.len())?;
    if state.dim() != group.len() {
        return Err(Error::DimensionMismatch { expected: group.len(), got: state.dim() });
    }
    let lambda = state.lambda();
    if budget_evals < lambda {
        return Err(invalid(format!(
            "budget of {budget_evals} evaluations is below one generation ({lambda})"
        )));
    }
    let mut full = context.to_vec();
    let mut best = group.iter().map(|&i| context[i]).collect::<Vec<_>>();
    let mut best_f = context_fitness;
    let mut used = 0;
    let tol_x = 1e-13 * (1.0 + context.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    while used + lambda <= budget_evals {
        let population = state.ask(rng)?;
        let fitness: Vec<f64> = population
            .iter()
            .map(|cand| {
                for (&i, v) in group.iter().zip(cand) {
                    full[i] = *v;
                }
                obj.value(&full)
            })
            .collect();
        used += lambda;
        for (cand, &f) in population.iter().zip(&fitness) {
            if f.is_finite() && f < best_f {
                best_f = f;
                best.copy_from_slice(cand);
            }
        }
        state.tell(&population, &fitness)?;
        if state.max_step() < tol_x || !state.sigma().is_finite() {
            break;
        }
    }
    Ok(SubspaceResult { best, fitness: best_f, evaluations: used })
}

fn check_group(group: &[usize], n: usize) -> Result<()> {
    if group.is_empty() {
        return Err(invalid("group must not be empty"));
    }
    if let Some(&i) = group.iter().find(|&&i| i >= n) {
        return Err(invalid(format!("group index {} out of range for dimension {n}", i + 1)));
    }
    Ok(())
}

/// Serial full-space CMA-ES, laid out like [`run_lmcma`](crate::lmcma::run_lmcma).
pub fn run_cma<O, R>(
    obj: &O,
    initial_point: Option<&[f64]>,
    initial_sigma: f64,
    budget: &Budget,
    rng: &mut R,
) -> Result<(RunRecord, CmaState)>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let x0 = match initial_point {
        Some(x) => x.to_vec(),
        None => uniform_vector(obj.dim(), rng),
    };
    if x0.len() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), got: x0.len() });
    }
    let clock = Stopwatch::start();
    let mut state = CmaState::new(x0, initial_sigma)?;
    let f0 = obj.value(state.mean());
    let mut best_f = f0;
    let mut record = RunRecord::new("cma");
    let mut evaluations = 1u64;
    record.push(RecordPoint { cycle: 0, evaluations, best_f, wall_ms: clock.ms() });
    let lambda = state.lambda() as u64;
    record.status = loop {
        if let Some(status) = budget.check(best_f, evaluations, lambda, state.generation(), &clock) {
            break status;
        }
        if state.max_step() == 0.0 || !state.sigma().is_finite() {
            break Status::BudgetExhausted;
        }
        let population = state.ask(rng)?;
        let fitness: Vec<f64> = population.iter().map(|x| obj.value(x)).collect();
        state.tell(&population, &fitness)?;
        evaluations += lambda;
        best_f = fitness.iter().copied().filter(|f| f.is_finite()).fold(best_f, f64::min);
        record.push(RecordPoint { cycle: state.generation(), evaluations, best_f, wall_ms: clock.ms() });
    };
    Ok((record, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{BaseFunction, FnObjective, ObjectiveInstance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sphere(n: usize) -> FnObjective<impl Fn(&[f64]) -> f64 + Sync> {
        FnObjective::new(n, |x: &[f64]| x.iter().map(|v| v * v).sum())
    }

    #[test]
    fn defaults() {
        let p = CmaParams::new(10);
        assert_eq!(p.lambda, 10);
        assert_eq!(p.mu, 5);
        assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.weights.windows(2).all(|w| w[0] >= w[1] && w[1] > 0.0));
        assert!(p.c1 + p.cmu <= 1.0);
    }

    #[test]
    fn rejects_bad_sigma_and_dims() {
        assert!(CmaState::new(vec![0.0; 3], 0.0).is_err());
        assert!(CmaState::new(vec![0.0; 3], f64::NAN).is_err());
        assert!(CmaState::new(vec![], 1.0).is_err());
        let mut s = CmaState::new(vec![0.0; 3], 1.0).unwrap();
        assert!(s.tell(&[vec![0.0; 3]], &[1.0]).is_err());
    }

    #[test]
    fn tiny_sigma_samples_equal_mean() {
        let mut s = CmaState::new(vec![1.0, -2.0, 3.0], 1e-300).unwrap();
        let pop = s.ask(&mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(pop.iter().all(|x| x == &[1.0, -2.0, 3.0]));
    }

    #[test]
    fn identical_offspring_keep_mean() {
        let mut s = CmaState::new(vec![0.5, 0.25], 1.0).unwrap();
        let pop = vec![vec![0.5, 0.25]; s.lambda()];
        let fit: Vec<f64> = (0..s.lambda()).map(|i| i as f64).collect();
        s.tell(&pop, &fit).unwrap();
        assert_eq!(s.mean(), &[0.5, 0.25]);
    }

    #[test]
    fn seeded_population_is_reproducible() {
        let mut a = CmaState::new(vec![0.0; 5], 2.0).unwrap();
        let mut b = a.clone();
        let pa = a.ask(&mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let pb = b.ask(&mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(pa, pb);
    }

    #[test]
    fn identity_covariance_sample_moments() {
        let mut s = CmaState::with_params(vec![0.0; 4], 1.5, CmaParams::with_lambda(4, 1000)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut second = [[0.0f64; 4]; 4];
        let draws = 100_000;
        for _ in 0..draws / 1000 {
            for x in s.ask(&mut rng).unwrap() {
                for i in 0..4 {
                    for j in 0..4 {
                        second[i][j] += x[i] * x[j];
                    }
                }
            }
        }
        let var = 1.5f64 * 1.5;
        for i in 0..4 {
            for j in 0..4 {
                let est = second[i][j] / draws as f64;
                if i == j {
                    assert!((est - var).abs() <= 0.05 * var, "var {i}: {est}");
                } else {
                    assert!(est.abs() <= 0.05 * var, "cov {i}{j}: {est}");
                }
            }
        }
    }

    #[test]
    fn normalize_keeps_distribution() {
        let mut s = CmaState::new(vec![0.0; 3], 2.0).unwrap();
        s.cov = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.25]);
        let before = s.covariance() * s.sigma().powi(2);
        s.normalize_scale();
        let after = s.covariance() * s.sigma().powi(2);
        assert!((before - after).amax() < 1e-12);
        assert!((s.covariance().trace() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_fitness_ranks_last() {
        assert_eq!(rank(&[3.0, f64::NAN, 1.0, f64::NEG_INFINITY, -2.0]), vec![4, 2, 0, 1, 3]);
    }

    #[test]
    fn repairs_indefinite_covariance() {
        let mut s = CmaState::new(vec![0.0; 3], 1.0).unwrap();
        s.cov = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, -1e-3, 0.0, 0.0, 0.0, 1.0]);
        let pop = s.ask(&mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(pop.len(), s.lambda());
        assert!(pop.iter().flatten().all(|v| v.is_finite()));
        s.cov = DMatrix::from_element(3, 3, f64::NAN);
        assert!(matches!(s.ask(&mut ChaCha8Rng::seed_from_u64(3)), Err(Error::CovarianceFailure)));
    }

    #[test]
    fn sphere_10d_converges_for_ten_seeds() {
        let obj = sphere(10);
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = CmaState::new(vec![5.0; 10], 3.0).unwrap();
            let mut best = f64::INFINITY;
            let mut reached = None;
            for g in 0..2000 {
                let pop = s.ask(&mut rng).unwrap();
                let fit: Vec<f64> = pop.iter().map(|x| obj.value(x)).collect();
                s.tell(&pop, &fit).unwrap();
                let gen_best = fit.iter().copied().fold(f64::INFINITY, f64::min);
                assert!(s.best().1 <= best);
                best = best.min(gen_best);
                if best <= 1e-10 {
                    reached = Some(g);
                    break;
                }
                let c = s.covariance();
                assert!((c - c.transpose()).amax() < 1e-12);
            }
            assert!(reached.is_some(), "seed {seed} best {best}");
        }
    }

    #[test]
    fn subspace_best_response_on_f1() {
        let f1 = FnObjective::new(2, |v: &[f64]| 7.0 * v[0] * v[0] + 6.0 * v[0] * v[1] + 8.0 * v[1] * v[1]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = optimize_subspace(&f1, &[1.0, 1.0], &[0], 2000, &mut rng).unwrap();
        assert!((r.best[0] + 6.0 / 14.0).abs() < 1e-4, "{:?}", r.best);
        assert!(r.fitness <= 21.0);
        assert!(r.evaluations <= 2001);
    }

    #[test]
    fn full_group_is_plain_cma() {
        let obj = ObjectiveInstance::new(BaseFunction::Ellipsoid, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ctx = vec![3.0; 6];
        let r = optimize_subspace(&obj, &ctx, &[0, 1, 2, 3, 4, 5], 20_000, &mut rng).unwrap();
        assert!(r.fitness < 1e-10, "{}", r.fitness);
    }

    #[test]
    fn never_worse_than_context() {
        let obj = ObjectiveInstance::rotated_shifted(BaseFunction::Rosenbrock, 8, 4).unwrap();
        let ctx: Vec<f64> = obj.optimum_location().unwrap().to_vec();
        let f0 = obj.value(&ctx);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = optimize_subspace(&obj, &ctx, &[1, 4, 6], 300, &mut rng).unwrap();
        assert!(r.fitness <= f0);
        assert!(optimize_subspace(&obj, &ctx, &[1, 4, 6], 3, &mut rng).is_err());
        assert!(optimize_subspace(&obj, &ctx, &[8], 300, &mut rng).is_err());
    }
}
