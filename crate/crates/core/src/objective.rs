//! Benchmark objectives: the ten base functions, the rotation/shift wrapper
//! and sums of rotated-shifted Schwefel 1.2 terms over overlapping index sets.
//!
//! Every [`ObjectiveInstance`] is immutable after construction apart from its
//! evaluation counter, which is atomic so that one instance can be shared by
//! any number of worker threads.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Lower/upper bound of the initial search box on every coordinate.
pub const INITIAL_RANGE: (f64, f64) = (-10.0, 10.0);

/// A real-valued function of a fixed number of variables.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    /// Value at `x`. Callers pass exactly `dim()` coordinates.
    fn value(&self, x: &[f64]) -> f64;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
}

impl<T: Objective + ?Sized + Send> Objective for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
}

/// Adapts a closure into an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// The ten base functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseFunction {
    Sphere,
    Cigar,
    Discus,
    CigarDiscus,
    Ellipsoid,
    DifferentPowers,
    Schwefel221,
    Step,
    Rosenbrock,
    Schwefel12,
}

impl BaseFunction {
    pub const ALL: [BaseFunction; 10] = [
        BaseFunction::Sphere,
        BaseFunction::Cigar,
        BaseFunction::Discus,
        BaseFunction::CigarDiscus,
        BaseFunction::Ellipsoid,
        BaseFunction::DifferentPowers,
        BaseFunction::Schwefel221,
        BaseFunction::Step,
        BaseFunction::Rosenbrock,
        BaseFunction::Schwefel12,
    ];

    pub fn id(self) -> &'static str {
        match self {
            BaseFunction::Sphere => "sphere",
            BaseFunction::Cigar => "cigar",
            BaseFunction::Discus => "discus",
            BaseFunction::CigarDiscus => "cigar_discus",
            BaseFunction::Ellipsoid => "ellipsoid",
            BaseFunction::DifferentPowers => "different_powers",
            BaseFunction::Schwefel221 => "schwefel221",
            BaseFunction::Step => "step",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::Schwefel12 => "schwefel12",
        }
    }

    pub fn valid_ids() -> String {
        Self::ALL.iter().map(|b| b.id()).collect::<Vec<_>>().join(", ")
    }

    /// Whether the function is differentiable everywhere.
    pub fn is_smooth(self) -> bool {
        !matches!(self, BaseFunction::Step | BaseFunction::Schwefel221)
    }

    /// A minimizer of the unwrapped function in dimension `n` (value 0).
    pub fn optimum_point(self, n: usize) -> Vec<f64> {
        match self {
            BaseFunction::Rosenbrock => vec![1.0; n],
            _ => vec![0.0; n],
        }
    }

    /// Unwrapped value. Works for any `x.len() >= 1`.
    pub fn eval(self, x: &[f64]) -> f64 {
        let n = x.len();
        match self {
            BaseFunction::Sphere => x.iter().map(|v| v * v).sum(),
            BaseFunction::Cigar => x[0] * x[0] + 1e6 * x[1..].iter().map(|v| v * v).sum::<f64>(),
            BaseFunction::Discus => 1e6 * x[0] * x[0] + x[1..].iter().map(|v| v * v).sum::<f64>(),
            BaseFunction::CigarDiscus => {
                if n == 1 {
                    return x[0] * x[0];
                }
                let middle: f64 = x[1..n - 1].iter().map(|v| v * v).sum();
                x[0] * x[0] + 1e4 * middle + 1e6 * x[n - 1] * x[n - 1]
            }
            BaseFunction::Ellipsoid => x
                .iter()
                .enumerate()
                .map(|(i, v)| ellipsoid_weight(i, n) * v * v)
                .sum(),
            BaseFunction::DifferentPowers => x
                .iter()
                .enumerate()
                .map(|(i, v)| v.abs().powf(different_powers_exponent(i, n)))
                .sum(),
            BaseFunction::Schwefel221 => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            BaseFunction::Step => x
                .iter()
                .map(|v| {
                    let s = (v + 0.5).floor();
                    s * s
                })
                .sum(),
            BaseFunction::Rosenbrock => x
                .windows(2)
                .map(|w| {
                    let a = w[0] * w[0] - w[1];
                    let b = w[0] - 1.0;
                    100.0 * a * a + b * b
                })
                .sum(),
            BaseFunction::Schwefel12 => {
                let mut prefix = 0.0;
                let mut total = 0.0;
                for v in x {
                    prefix += v;
                    total += prefix * prefix;
                }
                total
            }
        }
    }
}

fn ellipsoid_weight(i: usize, n: usize) -> f64 {
    if n == 1 {
        1.0
    } else {
        10f64.powf(6.0 * i as f64 / (n - 1) as f64)
    }
}

fn different_powers_exponent(i: usize, n: usize) -> f64 {
    if n == 1 {
        2.0
    } else {
        2.0 + 4.0 * i as f64 / (n - 1) as f64
    }
}

impl fmt::Display for BaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for BaseFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|b| b.id() == s)
            .ok_or_else(|| Error::UnknownFunction {
                id: s.to_string(),
                valid: Self::valid_ids(),
            })
    }
}

/// A dense orthogonal matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    n: usize,
    data: Vec<f64>,
}

impl Rotation {
    /// Haar-distributed orthogonal matrix: QR of a standard-normal matrix
    /// with the column signs fixed by the diagonal of R.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let gauss: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
        let a = DMatrix::from_row_slice(n, n, &gauss);
        let qr = a.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(q[(i, j)]);
            }
        }
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    /// Planar rotation by `angle` radians.
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { n: 2, data: vec![c, -s, s, c] }
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// out = R v
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// Rᵀ v
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, vi) in v.iter().enumerate() {
            for (o, r) in out.iter_mut().zip(self.row(i)) {
                *o += r * vi;
            }
        }
        out
    }

    /// max |(RᵀR − I)_ij|
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| self.get(k, i) * self.get(k, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Index sets (0-based) of an overlapping sum of Schwefel 1.2 terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlappingSpec {
    pub n: usize,
    pub components: Vec<Vec<usize>>,
    /// Conforming components share one shift vector, so their shifts agree
    /// on common coordinates; conflicting components draw independent shifts.
    pub conforming: bool,
}

impl OverlappingSpec {
    /// `m_sub` contiguous components over `0..n`, consecutive ones sharing
    /// `overlap` coordinates.
    pub fn chain(n: usize, m_sub: usize, overlap: usize, conforming: bool) -> Result<Self> {
        if m_sub == 0 {
            return Err(invalid("overlapping function needs at least one component"));
        }
        let total = n + (m_sub - 1) * overlap;
        if total < m_sub * (overlap + 1) {
            return Err(invalid(format!(
                "cannot fit {m_sub} components with overlap {overlap} into {n} coordinates"
            )));
        }
        let mut components = Vec::with_capacity(m_sub);
        let mut start = 0;
        for c in 0..m_sub {
            let len = total / m_sub + usize::from(c < total % m_sub);
            components.push((start..start + len).collect::<Vec<_>>());
            start += len - overlap;
        }
        let spec = Self { n, components, conforming };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(invalid("overlapping function has no components"));
        }
        let mut seen = vec![0usize; self.n];
        for (c, idx) in self.components.iter().enumerate() {
            if idx.is_empty() {
                return Err(invalid(format!("component {c} is empty")));
            }
            for &i in idx {
                if i >= self.n {
                    return Err(invalid(format!(
                        "component {c} index {} out of range 1..={}",
                        i + 1,
                        self.n
                    )));
                }
                seen[i] += 1;
            }
        }
        if let Some(i) = seen.iter().position(|&c| c == 0) {
            return Err(invalid(format!("components do not cover index {}", i + 1)));
        }
        if self.components.len() > 1 && seen.iter().all(|&c| c <= 1) {
            return Err(invalid("components share no coordinate"));
        }
        Ok(())
    }
}

#[derive(Debug)]
struct Component {
    indices: Vec<usize>,
    rotation: Rotation,
    shift: Vec<f64>,
}

#[derive(Debug)]
enum Form {
    Table {
        base: BaseFunction,
        rotation: Option<Arc<Rotation>>,
        shift: Option<Arc<[f64]>>,
    },
    Overlapping {
        components: Vec<Component>,
    },
}

/// A benchmark function instance of fixed dimension.
#[derive(Debug)]
pub struct ObjectiveInstance {
    dimension: usize,
    form: Form,
    known_optimum_value: Option<f64>,
    optimum_location: Option<Vec<f64>>,
    evaluations: AtomicU64,
}

impl ObjectiveInstance {
    /// Unwrapped base function.
    pub fn new(base: BaseFunction, dimension: usize) -> Result<Self> {
        Self::wrapped(base, dimension, None, None)
    }

    /// `f(x) = base(R(x − s))`, each wrapper optional.
    pub fn wrapped(
        base: BaseFunction,
        dimension: usize,
        rotation: Option<Rotation>,
        shift: Option<Vec<f64>>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if let Some(r) = &rotation {
            if r.dim() != dimension {
                return Err(Error::DimensionMismatch { expected: dimension, got: r.dim() });
            }
        }
        if let Some(s) = &shift {
            if s.len() != dimension {
                return Err(Error::DimensionMismatch { expected: dimension, got: s.len() });
            }
        }
        let base_opt = base.optimum_point(dimension);
        let mut location = match &rotation {
            Some(r) => r.apply_transpose(&base_opt),
            None => base_opt,
        };
        if let Some(s) = &shift {
            for (l, si) in location.iter_mut().zip(s) {
                *l += si;
            }
        }
        Ok(Self {
            dimension,
            form: Form::Table {
                base,
                rotation: rotation.map(Arc::new),
                shift: shift.map(Arc::from),
            },
            known_optimum_value: Some(0.0),
            optimum_location: Some(location),
            evaluations: AtomicU64::new(0),
        })
    }

    /// Rotated and shifted base function. The rotation comes from a seeded
    /// Gaussian matrix, the shift is uniform in the initial range.
    pub fn rotated_shifted(base: BaseFunction, dimension: usize, seed: u64) -> Result<Self> {
        if dimension < 2 {
            return Err(invalid("rotated-shifted instances need dimension >= 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rotation = Rotation::random(dimension, &mut rng);
        let shift = uniform_vector(dimension, &mut rng);
        Self::wrapped(base, dimension, Some(rotation), Some(shift))
    }

    /// Sum of rotated-shifted Schwefel 1.2 terms over the given index sets.
    pub fn overlapping(spec: &OverlappingSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut components = Vec::with_capacity(spec.components.len());
        if spec.conforming {
            let rotations: Vec<Rotation> = spec
                .components
                .iter()
                .map(|idx| Rotation::random(idx.len(), &mut rng))
                .collect();
            let global = uniform_vector(spec.n, &mut rng);
            for (idx, rotation) in spec.components.iter().zip(rotations) {
                let shift = idx.iter().map(|&i| global[i]).collect();
                components.push(Component { indices: idx.clone(), rotation, shift });
            }
            Ok(Self {
                dimension: spec.n,
                form: Form::Overlapping { components },
                known_optimum_value: Some(0.0),
                optimum_location: Some(global),
                evaluations: AtomicU64::new(0),
            })
        } else {
            for idx in &spec.components {
                let rotation = Rotation::random(idx.len(), &mut rng);
                let shift = uniform_vector(idx.len(), &mut rng);
                components.push(Component { indices: idx.clone(), rotation, shift });
            }
            Ok(Self {
                dimension: spec.n,
                form: Form::Overlapping { components },
                known_optimum_value: None,
                optimum_location: None,
                evaluations: AtomicU64::new(0),
            })
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Function identifier, `overlapping` for overlapping sums.
    pub fn base_id(&self) -> &'static str {
        match &self.form {
            Form::Table { base, .. } => base.id(),
            Form::Overlapping { .. } => "overlapping",
        }
    }

    pub fn base(&self) -> Option<BaseFunction> {
        match &self.form {
            Form::Table { base, .. } => Some(*base),
            Form::Overlapping { .. } => None,
        }
    }

    pub fn rotation(&self) -> Option<&Rotation> {
        match &self.form {
            Form::Table { rotation, .. } => rotation.as_deref(),
            Form::Overlapping { .. } => None,
        }
    }

    pub fn shift(&self) -> Option<&[f64]> {
        match &self.form {
            Form::Table { shift, .. } => shift.as_deref(),
            Form::Overlapping { .. } => None,
        }
    }

    /// `None` when the optimum value is not known (conflicting overlaps).
    pub fn known_optimum_value(&self) -> Option<f64> {
        self.known_optimum_value
    }

    /// A point attaining the known optimum value, when one is known.
    pub fn optimum_location(&self) -> Option<&[f64]> {
        self.optimum_location.as_deref()
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Checked evaluation; counts one evaluation on success.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: x.len() });
        }
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        Ok(self.raw_value(x))
    }

    fn raw_value(&self, x: &[f64]) -> f64 {
        match &self.form {
            Form::Table { base, rotation, shift } => match (rotation, shift) {
                (None, None) => base.eval(x),
                (rotation, shift) => {
                    let mut centered = x.to_vec();
                    if let Some(s) = shift {
                        for (c, si) in centered.iter_mut().zip(s.iter()) {
                            *c -= si;
                        }
                    }
                    match rotation {
                        Some(r) => {
                            let mut z = vec![0.0; self.dimension];
                            r.apply_into(&centered, &mut z);
                            base.eval(&z)
                        }
                        None => base.eval(&centered),
                    }
                }
            },
            Form::Overlapping { components } => {
                let mut total = 0.0;
                let mut centered = Vec::new();
                let mut z = Vec::new();
                for c in components {
                    centered.clear();
                    centered.extend(c.indices.iter().zip(&c.shift).map(|(&i, s)| x[i] - s));
                    z.resize(c.indices.len(), 0.0);
                    c.rotation.apply_into(&centered, &mut z);
                    total += BaseFunction::Schwefel12.eval(&z);
                }
                total
            }
        }
    }
}

impl Objective for ObjectiveInstance {
    fn dim(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dimension, "objective dimension mismatch");
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        self.raw_value(x)
    }
}

/// Uniform sample from the initial search box.
pub fn uniform_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = INITIAL_RANGE;
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Exact Hessian of Schwefel 1.2 in dimension `n`:
/// `2 * M` with `M[i][j] = n + 1 - max(i, j)` (1-based indices).
pub fn schwefel12_hessian(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| 2.0 * (n - i.max(j)) as f64)
}
