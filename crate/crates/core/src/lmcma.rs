//! Limited-memory CMA: the covariance matrix is replaced by a short list of
//! stored evolution paths, and offspring directions are drawn through a
//! product of rank-one factors applied to a standard normal vector.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cma::{chi_n, default_lambda, log_rank_weights, rank};
use crate::error::{invalid, Error, Result};
use crate::objective::{uniform_vector, Objective};
use crate::record::{Budget, RecordPoint, RunRecord, Status, Stopwatch};

/// Memory capacity `4 + floor(3 ln n)`.
pub fn default_memory_size(n: usize) -> usize {
    4 + (3.0 * (n.max(1) as f64).ln()).floor() as usize
}

/// Rank-one learning rate `1 / (10 ln(n + 1))`.
pub fn default_c1(n: usize) -> f64 {
    1.0 / (10.0 * ((n + 1) as f64).ln())
}

/// Vector operations spent by [`sample_direction_counted`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCount {
    pub dots: usize,
    pub scaled_adds: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `d = F(p¹) F(p²) ⋯ F(pᵗ) z` with `F(p) = (1 − c1/2) I + (c1/2) p pᵀ`,
/// `memory` ordered oldest first. The newest factor touches `z` first.
pub fn sample_direction(memory: &[Vec<f64>], c1: f64, z: &[f64]) -> Result<Vec<f64>> {
    let mut count = OpCount::default();
    sample_direction_counted(memory, c1, z, &mut count)
}

pub fn sample_direction_counted(
    memory: &[Vec<f64>],
    c1: f64,
    z: &[f64],
    count: &mut OpCount,
) -> Result<Vec<f64>> {
    let n = z.len();
    if let Some(p) = memory.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let mut d = z.to_vec();
    let keep = 1.0 - 0.5 * c1;
    for p in memory.iter().rev() {
        let coef = 0.5 * c1 * dot(p, &d);
        count.dots += 1;
        for (di, pi) in d.iter_mut().zip(p) {
            *di = keep * *di + coef * pi;
        }
        count.scaled_adds += 1;
    }
    Ok(d)
}

/// Strategy constants for one dimension.
#[derive(Clone, Debug)]
pub struct LmcmaParams {
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mueff: f64,
    pub c1: f64,
    pub cc: f64,
    pub cs: f64,
    pub damps: f64,
    pub chi_n: f64,
    pub memory_size: usize,
    /// Generations between stored paths.
    pub target_spacing: u64,
    /// Length factor applied to stored paths. A path of typical length √n
    /// becomes a sampling vector of length 4.
    pub path_scale: f64,
}

impl LmcmaParams {
    pub fn new(n: usize) -> Self {
        Self::with_lambda(n, default_lambda(n))
    }

    pub fn with_lambda(n: usize, lambda: usize) -> Self {
        let nf = n as f64;
        let lambda = lambda.max(2);
        let mu = lambda / 2;
        let weights = log_rank_weights(mu);
        let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let cs = (mueff + 2.0) / (nf + mueff + 5.0);
        let memory_size = default_memory_size(n);
        Self {
            lambda,
            mu,
            weights,
            mueff,
            c1: default_c1(n),
            cc: 0.5 / nf.sqrt(),
            cs,
            damps: 1.0 + 2.0 * (((mueff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + cs,
            chi_n: chi_n(n),
            memory_size,
            target_spacing: 16,
            path_scale: 4.0 / nf.sqrt(),
        }
    }
}

/// State of one LM-CMA instance.
#[derive(Clone, Debug)]
pub struct LmcmaState {
    dim: usize,
    mean: Vec<f64>,
    sigma: f64,
    paths: Vec<Vec<f64>>,
    memory: Vec<Vec<f64>>,
    memory_gens: Vec<u64>,
    p_sigma: Vec<f64>,
    p_c: Vec<f64>,
    params: LmcmaParams,
    generation: u64,
    best_x: Vec<f64>,
    best_f: f64,
}

impl LmcmaState {
    pub fn new(mean: Vec<f64>, sigma: f64) -> Result<Self> {
        let n = mean.len();
        Self::with_params(mean, sigma, LmcmaParams::new(n))
    }

    pub fn with_params(mean: Vec<f64>, sigma: f64, params: LmcmaParams) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(invalid("LM-CMA needs at least one dimension"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!("sigma must be positive and finite, got {sigma}")));
        }
        if !(params.c1 > 0.0 && params.c1 < 1.0) {
            return Err(invalid(format!("c1 must lie in (0, 1), got {}", params.c1)));
        }
        Ok(Self {
            dim,
            best_x: mean.clone(),
            mean,
            sigma,
            paths: Vec::new(),
            memory: Vec::new(),
            memory_gens: Vec::new(),
            p_sigma: vec![0.0; dim],
            p_c: vec![0.0; dim],
            params,
            generation: 0,
            best_f: f64::INFINITY,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &LmcmaParams {
        &self.params
    }

    pub fn lambda(&self) -> usize {
        self.params.lambda
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
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

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Sampling vectors fed to [`sample_direction`], oldest first.
    pub fn memory(&self) -> &[Vec<f64>] {
        &self.memory
    }

    /// Raw evolution paths behind [`memory`](Self::memory), oldest first.
    pub fn paths(&self) -> &[Vec<f64>] {
        &self.paths
    }

    /// Generation at which each stored path was added.
    pub fn memory_generations(&self) -> &[u64] {
        &self.memory_gens
    }

    /// Replaces the stored paths; entries beyond capacity are dropped from the
    /// front. The new entries are dated `target_spacing` generations apart,
    /// the newest at the current generation.
    pub fn set_paths(&mut self, paths: Vec<Vec<f64>>) -> Result<()> {
        if let Some(p) = paths.iter().find(|p| p.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        let skip = paths.len().saturating_sub(self.params.memory_size);
        self.paths = paths.into_iter().skip(skip).collect();
        let t = self.params.target_spacing;
        let len = self.paths.len() as u64;
        self.memory_gens = (0..len).map(|i| (self.generation + (i + 1) * t).saturating_sub(len * t)).collect();
        self.rebuild_memory();
        Ok(())
    }

    /// Zeroes both evolution paths.
    pub fn reset_paths(&mut self) {
        self.p_sigma.iter_mut().for_each(|v| *v = 0.0);
        self.p_c.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn best(&self) -> (&[f64], f64) {
        (&self.best_x, self.best_f)
    }

    /// Forgets the best-so-far record (the search state is untouched).
    pub fn reset_best(&mut self) {
        self.best_x = self.mean.clone();
        self.best_f = f64::INFINITY;
    }

    /// Offers an externally found point to the best-so-far record.
    pub fn offer_best(&mut self, x: &[f64], f: f64) {
        if f.is_finite() && f < self.best_f {
            self.best_f = f;
            self.best_x = x.to_vec();
        }
    }

    /// Every stored quantity is finite and σ is positive.
    pub fn is_healthy(&self) -> bool {
        self.sigma.is_finite()
            && self.sigma > 0.0
            && self.mean.iter().chain(&self.p_sigma).chain(&self.p_c).all(|v| v.is_finite())
            && self.paths.iter().flatten().all(|v| v.is_finite())
    }

    /// Appends a path, evicting one entry when the memory is full.
    ///
    /// Eviction keeps stored paths spread over history: while all neighbour
    /// spacings are at least `target_spacing` generations the oldest entry
    /// goes, otherwise the interior entry whose removal leaves the smallest
    /// gap. The newest entry is never removed.
    pub fn update_memory(&mut self, path: Vec<f64>) -> Result<()> {
        if path.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: path.len() });
        }
        self.push_memory(path, self.generation);
        Ok(())
    }

    fn push_memory(&mut self, path: Vec<f64>, generation: u64) {
        self.paths.push(path);
        self.memory_gens.push(generation);
        if self.paths.len() > self.params.memory_size {
            let victim = eviction_index(&self.memory_gens, self.params.target_spacing);
            self.paths.remove(victim);
            self.memory_gens.remove(victim);
        }
        self.rebuild_memory();
    }

    /// Re-expresses every stored path in the coordinates of the factors
    /// before it: `vᵢ = s · (F(v₁) ⋯ F(vᵢ₋₁))⁻¹ pᵢ`.
    fn rebuild_memory(&mut self) {
        let c1 = self.params.c1;
        let a = 1.0 - 0.5 * c1;
        let b = 0.5 * c1;
        let mut memory: Vec<Vec<f64>> = Vec::with_capacity(self.paths.len());
        for path in &self.paths {
            let mut v = path.clone();
            for prev in &memory {
                // Sherman-Morrison inverse of aI + b q qᵀ
                let qq = dot(prev, prev);
                let coef = b * dot(prev, &v) / (a + b * qq);
                for (vi, qi) in v.iter_mut().zip(prev) {
                    *vi = (*vi - coef * qi) / a;
                }
            }
            let s = self.params.path_scale;
            v.iter_mut().for_each(|x| *x *= s);
            memory.push(v);
        }
        self.memory = memory;
    }

    /// Draws λ offspring `mean + σ d(z)`, returning them with their `z`.
    pub fn ask<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let mut xs = Vec::with_capacity(self.params.lambda);
        let mut zs = Vec::with_capacity(self.params.lambda);
        for _ in 0..self.params.lambda {
            let z: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            let d = sample_direction(&self.memory, self.params.c1, &z)?;
            xs.push(self.mean.iter().zip(&d).map(|(m, di)| m + self.sigma * di).collect());
            zs.push(z);
        }
        Ok((xs, zs))
    }

    /// Recombination, CSA and memory update from an evaluated population.
    pub fn tell(&mut self, xs: &[Vec<f64>], zs: &[Vec<f64>], fitness: &[f64]) -> Result<()> {
        let lambda = self.params.lambda;
        if xs.len() != lambda || zs.len() != lambda || fitness.len() != lambda {
            return Err(invalid(format!("expected {lambda} offspring, got {}", xs.len())));
        }
        let order = rank(fitness);
        self.offer_best(&xs[order[0]], fitness[order[0]]);

        let p = &self.params;
        let n = self.dim as f64;
        let mut z_w = vec![0.0; self.dim];
        let mut new_mean = vec![0.0; self.dim];
        for (w, &i) in p.weights.iter().zip(&order[..p.mu]) {
            for j in 0..self.dim {
                z_w[j] += w * zs[i][j];
                new_mean[j] += w * xs[i][j];
            }
        }
        let cs_scale = (p.cs * (2.0 - p.cs) * p.mueff).sqrt();
        for (ps, z) in self.p_sigma.iter_mut().zip(&z_w) {
            *ps = (1.0 - p.cs) * *ps + cs_scale * z;
        }
        let ps_norm = dot(&self.p_sigma, &self.p_sigma).sqrt();
        let gen = (self.generation + 1) as f64;
        let hsig = ps_norm / (1.0 - (1.0 - p.cs).powf(2.0 * gen)).sqrt() / p.chi_n < 1.4 + 2.0 / (n + 1.0);
        let cc_scale = if hsig { (p.cc * (2.0 - p.cc) * p.mueff).sqrt() } else { 0.0 };
        for j in 0..self.dim {
            let step = (new_mean[j] - self.mean[j]) / self.sigma;
            self.p_c[j] = (1.0 - p.cc) * self.p_c[j] + cc_scale * step;
        }
        self.mean = new_mean;
        self.sigma *= ((p.cs / p.damps) * (ps_norm / p.chi_n - 1.0)).exp();
        self.generation += 1;
        let gen = self.generation;
        if gen % p.target_spacing == 0 || self.memory.is_empty() {
            self.push_memory(self.p_c.clone(), gen);
        }
        Ok(())
    }
}

/// Index to drop from a memory whose add-generations are `gens` (ascending,
/// one entry over capacity). Never the last index.
pub fn eviction_index(gens: &[u64], target_spacing: u64) -> usize {
    let last = gens.len() - 1;
    if last < 2 {
        return 0;
    }
    let min_gap = gens.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0);
    if min_gap >= target_spacing {
        return 0;
    }
    (1..last).min_by_key(|&j| gens[j + 1] - gens[j - 1]).unwrap_or(0)
}

/// One generation on `obj`; consumes exactly λ evaluations.
pub fn lmcma_step<O, R>(state: &mut LmcmaState, obj: &O, rng: &mut R) -> Result<usize>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    if obj.dim() != state.dim {
        return Err(Error::DimensionMismatch { expected: state.dim, got: obj.dim() });
    }
    let (xs, zs) = state.ask(rng)?;
    let fitness: Vec<f64> = xs.iter().map(|x| obj.value(x)).collect();
    state.tell(&xs, &zs, &fitness)?;
    Ok(xs.len())
}

/// Serial LM-CMA from `initial_point` (uniform in the initial box when
/// absent). The start is evaluated once; one record point per generation.
pub fn run_lmcma<O, R>(
    obj: &O,
    initial_point: Option<&[f64]>,
    initial_sigma: f64,
    budget: &Budget,
    rng: &mut R,
) -> Result<(RunRecord, LmcmaState)>
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
    let mut state = LmcmaState::new(x0, initial_sigma)?;
    let f0 = obj.value(state.mean());
    let x0 = state.mean().to_vec();
    state.offer_best(&x0, f0);
    let mut record = RunRecord::new("lmcma");
    let mut evaluations = 1u64;
    record.push(RecordPoint { cycle: 0, evaluations, best_f: f0, wall_ms: clock.ms() });
    let lambda = state.lambda() as u64;
    record.status = loop {
        if let Some(status) = budget.check(state.best().1, evaluations, lambda, state.generation(), &clock) {
            break status;
        }
        if !state.is_healthy() {
            break Status::BudgetExhausted;
        }
        evaluations += lmcma_step(&mut state, obj, rng)? as u64;
        record.push(RecordPoint { cycle: state.generation(), evaluations, best_f: state.best().1, wall_ms: clock.ms() });
    };
    Ok((record, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{BaseFunction, ObjectiveInstance};
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense_oracle(memory: &[Vec<f64>], c1: f64, z: &[f64]) -> Vec<f64> {
        let n = z.len();
        let mut product = DMatrix::<f64>::identity(n, n);
        for p in memory {
            let p = DVector::from_column_slice(p);
            let factor = DMatrix::<f64>::identity(n, n) * (1.0 - c1 / 2.0) + &p * p.transpose() * (c1 / 2.0);
            product *= factor;
        }
        (product * DVector::from_column_slice(z)).as_slice().to_vec()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        diff / scale.max(f64::MIN_POSITIVE)
    }

    #[test]
    fn constants() {
        assert_eq!(default_memory_size(1), 4);
        assert_eq!(default_memory_size(256), 20);
        let c1 = default_c1(256);
        assert!(c1 > 0.0 && c1 < 1.0);
    }

    #[test]
    fn empty_memory_is_identity() {
        let z = vec![1.0, -2.0, 0.5];
        assert_eq!(sample_direction(&[], 0.3, &z).unwrap(), z);
    }

    #[test]
    fn single_path_along_itself() {
        let p = vec![1.0, 2.0, -2.0];
        let c1 = 0.2;
        let d = sample_direction(std::slice::from_ref(&p), c1, &p).unwrap();
        let k = (1.0 - c1 / 2.0) + (c1 / 2.0) * 9.0;
        for (a, b) in d.iter().zip(&p) {
            assert!((a - k * b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(sample_direction(&[vec![1.0, 2.0]], 0.1, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.random_range(2..=16);
            let m = rng.random_range(0..=5);
            let c1 = rng.random_range(0.01..0.99);
            let memory: Vec<Vec<f64>> =
                (0..m).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
            let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let fast = sample_direction(&memory, c1, &z).unwrap();
            assert!(rel_err(&fast, &dense_oracle(&memory, c1, &z)) <= 1e-12);
        }
    }

    #[test]
    fn counts_one_dot_per_factor() {
        let memory = vec![vec![1.0; 6]; 4];
        let mut count = OpCount::default();
        sample_direction_counted(&memory, 0.1, &[0.5; 6], &mut count).unwrap();
        assert_eq!(count, OpCount { dots: 4, scaled_adds: 4 });
    }

    proptest! {
        #[test]
        fn linear_in_z(
            seed in any::<u64>(),
            n in 2usize..=16,
            m in 0usize..=5,
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c1 = rng.random_range(0.01..0.99);
            let memory: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
            let z1: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let z2: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let mixed: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| alpha * a + beta * b).collect();
            let lhs = sample_direction(&memory, c1, &mixed).unwrap();
            let d1 = sample_direction(&memory, c1, &z1).unwrap();
            let d2 = sample_direction(&memory, c1, &z2).unwrap();
            let rhs: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| alpha * a + beta * b).collect();
            let scale = rhs.iter().chain(&d1).chain(&d2).fold(1.0f64, |s, v| s.max(v.abs()));
            for (a, b) in lhs.iter().zip(&rhs) {
                prop_assert!((a - b).abs() <= 1e-12 * scale * (alpha.abs() + beta.abs() + 1.0));
            }
        }

        #[test]
        fn eviction_spares_newest(gaps in proptest::collection::vec(1u64..20, 2..12), target in 1u64..10) {
            let mut gens = vec![0u64];
            for g in &gaps {
                gens.push(gens.last().unwrap() + g);
            }
            let victim = eviction_index(&gens, target);
            prop_assert!(victim < gens.len() - 1);
        }
    }

    #[test]
    fn memory_capacity_and_newest_retained() {
        let mut params = LmcmaParams::new(4);
        params.memory_size = 3;
        let mut s = LmcmaState::with_params(vec![0.0; 4], 1.0, params).unwrap();
        for i in 0..10 {
            s.update_memory(vec![i as f64; 4]).unwrap();
            s.generation += 1;
            assert!(s.memory().len() <= 3);
            assert_eq!(s.paths().last().unwrap()[0], i as f64);
            assert_eq!(s.memory().len(), s.paths().len());
        }
        assert_eq!(s.memory().len(), 3);
    }

    #[test]
    fn below_capacity_appends() {
        let mut s = LmcmaState::new(vec![0.0; 8], 1.0).unwrap();
        s.update_memory(vec![1.0; 8]).unwrap();
        s.update_memory(vec![2.0; 8]).unwrap();
        assert_eq!(s.paths(), &[vec![1.0; 8], vec![2.0; 8]]);
        assert!(s.update_memory(vec![1.0; 3]).is_err());
    }

    #[test]
    fn step_spends_lambda_evaluations() {
        let obj = ObjectiveInstance::new(BaseFunction::Sphere, 20).unwrap();
        let mut s = LmcmaState::new(vec![1.0; 20], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..5 {
            let before = obj.evaluations();
            assert_eq!(lmcma_step(&mut s, &obj, &mut rng).unwrap(), s.lambda());
            assert_eq!(obj.evaluations() - before, s.lambda() as u64);
        }
    }

    #[test]
    fn sphere_256_converges() {
        let n = 256;
        let obj = ObjectiveInstance::new(BaseFunction::Sphere, n).unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = LmcmaState::new(vec![5.0; n], 3.0).unwrap();
            let mut evals = 0;
            while evals < 300_000 && s.best().1 > 1e-10 {
                evals += lmcma_step(&mut s, &obj, &mut rng).unwrap();
            }
            assert!(s.best().1 <= 1e-10, "seed {seed}: {} after {evals}", s.best().1);
        }
    }

    #[test]
    fn memory_undoes_earlier_factors() {
        let n = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut s = LmcmaState::new(vec![0.0; n], 1.0).unwrap();
        let paths: Vec<Vec<f64>> = (0..4).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
        s.set_paths(paths.clone()).unwrap();
        let scale = s.params().path_scale;
        let c1 = s.params().c1;
        for i in 0..paths.len() {
            let v: Vec<f64> = s.memory()[i].iter().map(|x| x / scale).collect();
            let back = dense_oracle(&s.memory()[..i], c1, &v);
            assert!(rel_err(&back, &paths[i]) < 1e-12);
        }
    }

    fn unit_vector(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dot(&u, &u).sqrt();
        u.into_iter().map(|v| v / norm).collect()
    }

    /// Diagonal-covariance ES: CSA plus rank-one and rank-μ updates of a
    /// per-coordinate variance vector.
    fn diagonal_es_evals_to<F: Fn(&[f64]) -> f64>(f: F, n: usize, seed: u64, target: f64, cap: usize) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = crate::cma::CmaParams::new(n);
        let nf = n as f64;
        let c1 = (p.c1 * (nf + 2.0) / 3.0).min(1.0);
        let cmu = (p.cmu * (nf + 2.0) / 3.0).min(1.0 - c1);
        let mut mean = vec![5.0; n];
        let mut sigma = 3.0f64;
        let mut diag = vec![1.0f64; n];
        let mut ps = vec![0.0; n];
        let mut pc = vec![0.0; n];
        let mut evals = 0;
        while evals < cap {
            let zs: Vec<Vec<f64>> = (0..p.lambda).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
            let xs: Vec<Vec<f64>> = zs
                .iter()
                .map(|z| (0..n).map(|j| mean[j] + sigma * diag[j].sqrt() * z[j]).collect())
                .collect();
            let fit: Vec<f64> = xs.iter().map(|x| f(x)).collect();
            evals += p.lambda;
            if fit.iter().any(|&v| v <= target) {
                return evals;
            }
            let order = rank(&fit);
            let mut zw = vec![0.0; n];
            for (w, &i) in p.weights.iter().zip(&order[..p.mu]) {
                for j in 0..n {
                    zw[j] += w * zs[i][j];
                }
            }
            let cs = (p.cs * (2.0 - p.cs) * p.mueff).sqrt();
            let cc = (p.cc * (2.0 - p.cc) * p.mueff).sqrt();
            for j in 0..n {
                let yw = diag[j].sqrt() * zw[j];
                mean[j] += sigma * yw;
                ps[j] = (1.0 - p.cs) * ps[j] + cs * zw[j];
                pc[j] = (1.0 - p.cc) * pc[j] + cc * yw;
                let rank_mu: f64 = p.weights.iter().zip(&order[..p.mu]).map(|(w, &i)| w * diag[j] * zs[i][j] * zs[i][j]).sum();
                diag[j] = (1.0 - c1 - cmu) * diag[j] + c1 * pc[j] * pc[j] + cmu * rank_mu;
            }
            let norm = dot(&ps, &ps).sqrt();
            sigma *= ((p.cs / p.damps) * (norm / p.chi_n - 1.0)).exp();
        }
        usize::MAX
    }

    fn median(mut v: Vec<usize>) -> usize {
        v.sort_unstable();
        v[v.len() / 2]
    }

    #[test]
    fn rotated_cigar_beats_diagonal_baseline() {
        let n = 256;
        let target = 1e-8;
        let cap = 1_000_000;
        let mut lm = Vec::new();
        let mut diag = Vec::new();
        for seed in 0..5 {
            let u = unit_vector(n, 100 + seed);
            let cigar = move |x: &[f64]| {
                let a = dot(x, &u);
                a * a + 1e6 * (dot(x, x) - a * a)
            };
            let obj = crate::objective::FnObjective::new(n, &cigar);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = LmcmaState::new(vec![5.0; n], 3.0).unwrap();
            let mut evals = 0;
            while evals < cap && s.best().1 > target {
                evals += lmcma_step(&mut s, &obj, &mut rng).unwrap();
            }
            lm.push(if s.best().1 <= target { evals } else { usize::MAX });
            diag.push(diagonal_es_evals_to(&cigar, n, seed, target, cap));
        }
        let (a, b) = (median(lm.clone()), median(diag.clone()));
        assert!(a < b, "lmcma {lm:?} vs diagonal {diag:?}");
    }

    #[test]
    fn sigma_stable_on_rosenbrock() {
        let n = 16;
        let obj = ObjectiveInstance::new(BaseFunction::Rosenbrock, n).unwrap();
        let mut s = LmcmaState::new(vec![0.0; n], 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut last = f64::INFINITY;
        for _ in 0..10_000 {
            lmcma_step(&mut s, &obj, &mut rng).unwrap();
            assert!(s.sigma() > 0.0 && s.sigma().is_finite());
            assert!(s.best().1 <= last);
            last = s.best().1;
        }
    }
}
