//! The decomposition game: each group of a partition is a player that
//! controls its own coordinates and minimizes the shared objective.
//!
//! Provides best responses, pure Nash equilibrium certificates, closed-form
//! equilibrium sets for a few two-variable functions and Schwefel 2.21, a
//! refinement (downward propagation) check and best-response traces.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::objective::{Objective, Rotation, INITIAL_RANGE};
use crate::partition::Partition;
use crate::search::{compass_search, nelder_mead, scan_and_refine};

/// Rotation angle of the ill-conditioned two-variable quadratic, in degrees.
pub const F2_ROTATION_DEGREES: f64 = 0.5;
/// Values below this count as unbounded descent.
pub const UNBOUNDED_BELOW: f64 = -1e12;
pub const DEFAULT_PNE_TOL: f64 = 1e-8;

/// Closed-form test functions of the game toolkit.
#[derive(Clone, Debug, PartialEq)]
pub enum GameFunction {
    /// `7x² + 6xy + 8y²`
    F1,
    /// `x² + 10⁶ y²` after a planar rotation
    F2 { rotation: Rotation },
    /// `100(x² − y)² + (x − 1)²`
    F3,
    /// `|x − y| − min(x, y)`
    F4,
    /// `max_i |x_i|`
    Schwefel221 { n: usize },
}

impl GameFunction {
    pub const IDS: [&'static str; 5] = ["f1", "f2", "f3", "f4", "schwefel221"];

    pub fn f2() -> Self {
        GameFunction::F2 { rotation: Rotation::planar(F2_ROTATION_DEGREES.to_radians()) }
    }

    /// Parses an id; `schwefel221` takes its dimension from `n`.
    pub fn from_id(id: &str, n: usize) -> Result<Self> {
        match id {
            "f1" => Ok(GameFunction::F1),
            "f2" => Ok(Self::f2()),
            "f3" => Ok(GameFunction::F3),
            "f4" => Ok(GameFunction::F4),
            "schwefel221" if n >= 1 => Ok(GameFunction::Schwefel221 { n }),
            "schwefel221" => Err(invalid("schwefel221 needs a dimension of at least 1")),
            other => Err(Error::UnknownFunction { id: other.to_string(), valid: Self::IDS.join(", ") }),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            GameFunction::F1 => "f1",
            GameFunction::F2 { .. } => "f2",
            GameFunction::F3 => "f3",
            GameFunction::F4 => "f4",
            GameFunction::Schwefel221 { .. } => "schwefel221",
        }
    }
}

impl fmt::Display for GameFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for GameFunction {
    type Err = Error;

    /// Two-variable functions only; use [`GameFunction::from_id`] for
    /// `schwefel221`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "schwefel221" {
            return Err(invalid("schwefel221 needs a dimension; use from_id"));
        }
        Self::from_id(s, 2)
    }
}

impl Objective for GameFunction {
    fn dim(&self) -> usize {
        match self {
            GameFunction::Schwefel221 { n } => *n,
            _ => 2,
        }
    }

    fn value(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim(), "point has wrong dimension");
        match self {
            GameFunction::F1 => 7.0 * v[0] * v[0] + 6.0 * v[0] * v[1] + 8.0 * v[1] * v[1],
            GameFunction::F2 { rotation } => {
                let mut y = [0.0; 2];
                rotation.apply_into(v, &mut y);
                y[0] * y[0] + 1e6 * y[1] * y[1]
            }
            GameFunction::F3 => 100.0 * (v[0] * v[0] - v[1]).powi(2) + (v[0] - 1.0).powi(2),
            GameFunction::F4 => (v[0] - v[1]).abs() - v[0].min(v[1]),
            GameFunction::Schwefel221 { .. } => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

/// Settings of the best-response search.
#[derive(Clone, Debug, PartialEq)]
pub struct BestResponseOptions {
    pub bounds: (f64, f64),
    /// Starting points per multi-variable group (the current point is one).
    pub starts: usize,
    /// Target precision of the local searches.
    pub tolerance: f64,
    /// Evaluation cap for one local search.
    pub budget_per_start: usize,
    pub seed: u64,
}

impl Default for BestResponseOptions {
    fn default() -> Self {
        Self { bounds: INITIAL_RANGE, starts: 16, tolerance: 1e-10, budget_per_start: 4000, seed: 0 }
    }
}

/// A best response of one group.
#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse {
    /// Values for the group's coordinates, in group order.
    pub values: Vec<f64>,
    pub fitness: f64,
    /// Some probe fell below [`UNBOUNDED_BELOW`].
    pub unbounded: bool,
    pub evaluations: usize,
}

/// Minimizes over the coordinates of `partition.group(group_index)` with all
/// others frozen at `x`. One variable: grid scan plus bounded Brent.
/// Several: Nelder-Mead from the current point and `starts − 1` random
/// points, each polished by compass search. Never returns a value above
/// `f(x)`.
pub fn best_response<O: Objective + ?Sized>(
    obj: &O,
    partition: &Partition,
    x: &[f64],
    group_index: usize,
    options: &BestResponseOptions,
) -> Result<BestResponse> {
    if x.len() != obj.dim() || partition.n() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), got: x.len() });
    }
    if group_index >= partition.len() {
        return Err(invalid(format!("group index {group_index} out of range")));
    }
    let group = partition.group(group_index);
    if group.len() > 8 {
        return Err(invalid(format!("best responses are limited to groups of at most 8 variables, got {}", group.len())));
    }
    let (lo, hi) = options.bounds;
    let mut full = x.to_vec();
    let mut unbounded = false;
    let mut evals = 0usize;
    let mut eval = |values: &[f64]| {
        for (&i, v) in group.iter().zip(values) {
            full[i] = *v;
        }
        evals += 1;
        let f = obj.value(&full);
        if f < UNBOUNDED_BELOW {
            unbounded = true;
        }
        f
    };
    let current: Vec<f64> = group.iter().map(|&i| x[i]).collect();
    let f_current = eval(&current);
    let mut best = (current.clone(), f_current);

    if group.len() == 1 {
        let m = scan_and_refine(|t| eval(&[t]), lo, hi, 400, options.tolerance * 1e-3);
        if m.f <= best.1 {
            best = (m.x, m.f);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ (group_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let width = hi - lo;
        for s in 0..options.starts.max(1) {
            let start: Vec<f64> = if s == 0 {
                current.iter().map(|v| v.clamp(lo, hi)).collect()
            } else {
                (0..group.len()).map(|_| rng.random_range(lo..hi)).collect()
            };
            let m = nelder_mead(&mut eval, &start, 0.05 * width, options.bounds, 1e-16, options.tolerance, options.budget_per_start);
            let p = compass_search(&mut eval, &m.x, m.f, 1e-3 * width, options.tolerance, options.bounds, options.budget_per_start);
            if p.f < best.1 {
                best = (p.x, p.f);
            }
        }
    }
    Ok(BestResponse { values: best.0, fitness: best.1, unbounded, evaluations: evals })
}

/// Outcome of [`verify_pne`].
#[derive(Clone, Debug, PartialEq)]
pub struct PneCertificate {
    pub point: Vec<f64>,
    pub partition: Partition,
    pub tolerance: f64,
    pub is_pne: bool,
    pub is_strict: bool,
    /// Per group `f(best response) − f(point)`; never positive.
    pub per_group_gap: Vec<f64>,
    pub unbounded: bool,
}

/// Checks that no group can lower `f` by more than `tolerance` on its own.
///
/// Strictness is decided by probing every coordinate of every group with
/// relative steps of ±1e-3 and ±1e-6: strict iff each probe strictly
/// increases `f`.
pub fn verify_pne<O: Objective + ?Sized>(
    obj: &O,
    partition: &Partition,
    x: &[f64],
    tolerance: f64,
    options: &BestResponseOptions,
) -> Result<PneCertificate> {
    if obj.dim() > 16 {
        return Err(invalid(format!("verification is limited to 16 variables, got {}", obj.dim())));
    }
    if let Some(v) = partition.validate().violation {
        return Err(invalid(format!("invalid partition: {v}")));
    }
    let f_x = obj.value(x);
    let mut gaps = Vec::with_capacity(partition.len());
    let mut unbounded = false;
    for g in 0..partition.len() {
        let br = best_response(obj, partition, x, g, options)?;
        unbounded |= br.unbounded;
        gaps.push((br.fitness - f_x).min(0.0));
    }
    let is_pne = !unbounded && gaps.iter().all(|&d| d >= -tolerance);
    let is_strict = is_pne && strictly_isolated(obj, x, f_x);
    Ok(PneCertificate {
        point: x.to_vec(),
        partition: partition.clone(),
        tolerance,
        is_pne,
        is_strict,
        per_group_gap: gaps,
        unbounded,
    })
}

fn strictly_isolated<O: Objective + ?Sized>(obj: &O, x: &[f64], f_x: f64) -> bool {
    let mut y = x.to_vec();
    for i in 0..x.len() {
        for h in [1e-3, 1e-6] {
            for sign in [1.0, -1.0] {
                y[i] = x[i] + sign * h * x[i].abs().max(1.0);
                let worse = obj.value(&y) > f_x;
                y[i] = x[i];
                if !worse {
                    return false;
                }
            }
        }
    }
    true
}

/// Membership in the closed-form equilibrium set.
///
/// `f1`, `f2`: the origin. `f3`: `(1, 1)`. `f4`: the line `x = y`. These
/// require the coordinate partition `[[1],[2]]`. `schwefel221`: every group
/// has the same largest absolute coordinate, for any partition.
pub fn appendix_oracle(function: &GameFunction, point: &[f64], partition: &Partition) -> Result<bool> {
    if point.len() != function.dim() {
        return Err(Error::DimensionMismatch { expected: function.dim(), got: point.len() });
    }
    if let Some(v) = partition.validate().violation {
        return Err(invalid(format!("invalid partition: {v}")));
    }
    if partition.n() != point.len() {
        return Err(Error::DimensionMismatch { expected: point.len(), got: partition.n() });
    }
    match function {
        GameFunction::Schwefel221 { .. } => {
            let maxima: Vec<f64> = partition
                .groups()
                .iter()
                .map(|g| g.iter().fold(0.0f64, |m, &i| m.max(point[i].abs())))
                .collect();
            Ok(maxima.windows(2).all(|w| w[0] == w[1]))
        }
        _ => {
            if partition.canonical() != Partition::singletons(2) {
                return Err(invalid(format!(
                    "{} has a closed form only for the partition [[1],[2]], got {partition}",
                    function.id()
                )));
            }
            Ok(match function {
                GameFunction::F1 | GameFunction::F2 { .. } => point[0] == 0.0 && point[1] == 0.0,
                GameFunction::F3 => point[0] == 1.0 && point[1] == 1.0,
                _ => point[0] == point[1],
            })
        }
    }
}

/// True iff "PNE for `coarse`" implies "PNE for `refined`" at `x`.
pub fn check_downward_propagation<O: Objective + ?Sized>(
    obj: &O,
    coarse: &Partition,
    refined: &Partition,
    x: &[f64],
    tolerance: f64,
    options: &BestResponseOptions,
) -> Result<bool> {
    if !refined.is_refinement_of(coarse) {
        return Err(invalid(format!("{refined} is not a refinement of {coarse}")));
    }
    if !verify_pne(obj, coarse, x, tolerance, options)?.is_pne {
        return Ok(true);
    }
    Ok(verify_pne(obj, refined, x, tolerance, options)?.is_pne)
}

/// Points visited by alternating exact best responses.
#[derive(Clone, Debug, PartialEq)]
pub struct BestResponseTrace {
    /// `(cycle, point, f)`; the start is cycle 0, every group move is logged
    /// under the cycle it belongs to.
    pub rows: Vec<(usize, Vec<f64>, f64)>,
    pub cycles: usize,
    /// Stopped because a whole cycle moved the point by less than 1e-12.
    pub converged: bool,
}

impl BestResponseTrace {
    pub fn final_point(&self) -> &[f64] {
        &self.rows.last().expect("trace always holds the start").1
    }

    pub fn final_value(&self) -> f64 {
        self.rows.last().expect("trace always holds the start").2
    }

    /// `cycle,x,y,f` rows for two-variable traces.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,x,y,f\n");
        for (c, p, f) in &self.rows {
            let coords: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&format!("{c},{},{f:?}\n", coords.join(",")));
        }
        out
    }
}

/// Alternating best responses over a coordinate partition from `x0`.
pub fn trace_best_response_dynamics<O: Objective + ?Sized>(
    obj: &O,
    partition: &Partition,
    x0: &[f64],
    max_cycles: usize,
    options: &BestResponseOptions,
) -> Result<BestResponseTrace> {
    if x0.len() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), got: x0.len() });
    }
    if partition.groups().iter().any(|g| g.len() != 1) || !partition.validate().is_valid() {
        return Err(invalid(format!("best-response traces need a coordinate partition, got {partition}")));
    }
    let mut x = x0.to_vec();
    let mut rows = vec![(0, x.clone(), obj.value(&x))];
    let mut converged = false;
    let mut cycles = 0;
    while cycles < max_cycles {
        cycles += 1;
        let before = x.clone();
        for g in 0..partition.len() {
            let br = best_response(obj, partition, &x, g, options)?;
            partition.splice(g, &mut x, &br.values);
            rows.push((cycles, x.clone(), br.fitness));
        }
        let moved = x.iter().zip(&before).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if moved < 1e-12 {
            converged = true;
            break;
        }
    }
    Ok(BestResponseTrace { rows, cycles, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> BestResponseOptions {
        BestResponseOptions::default()
    }

    fn coord() -> Partition {
        Partition::singletons(2)
    }

    #[test]
    fn closed_form_best_responses() {
        let br = best_response(&GameFunction::F1, &coord(), &[0.0, 1.0], 0, &opts()).unwrap();
        assert!((br.values[0] + 3.0 / 7.0).abs() < 1e-8, "{br:?}");
        for x0 in [-2.0, 0.5, 1.7] {
            let br = best_response(&GameFunction::F3, &coord(), &[x0, 0.0], 1, &opts()).unwrap();
            assert!((br.values[0] - x0 * x0).abs() < 1e-7, "{br:?}");
        }
        for y0 in [-4.0, 0.0, 2.5] {
            let br = best_response(&GameFunction::F4, &coord(), &[0.0, y0], 0, &opts()).unwrap();
            assert!((br.values[0] - y0).abs() < 1e-10, "{br:?}");
        }
    }

    #[test]
    fn certificates() {
        let c = verify_pne(&GameFunction::F1, &coord(), &[0.0, 0.0], DEFAULT_PNE_TOL, &opts()).unwrap();
        assert!(c.is_pne && c.is_strict);
        assert!(verify_pne(&GameFunction::F4, &coord(), &[1.0, 1.0], DEFAULT_PNE_TOL, &opts()).unwrap().is_pne);
        assert!(!verify_pne(&GameFunction::F4, &coord(), &[1.0, 2.0], DEFAULT_PNE_TOL, &opts()).unwrap().is_pne);
        let s = GameFunction::Schwefel221 { n: 4 };
        let p: Partition = "[[1,2],[3,4]]".parse().unwrap();
        let c = verify_pne(&s, &p, &[2.0, 1.0, 2.0, 1.0], DEFAULT_PNE_TOL, &opts()).unwrap();
        assert!(c.is_pne && !c.is_strict);
        assert!(!verify_pne(&s, &p, &[2.0, 1.0, 1.0, 1.0], DEFAULT_PNE_TOL, &opts()).unwrap().is_pne);
    }

    #[test]
    fn gap_invariants() {
        let c = verify_pne(&GameFunction::F3, &coord(), &[0.3, -0.2], DEFAULT_PNE_TOL, &opts()).unwrap();
        assert!(c.per_group_gap.iter().all(|&g| g <= 0.0));
        assert_eq!(c.is_pne, c.per_group_gap.iter().all(|&g| g >= -c.tolerance));
        assert!(!c.is_strict || c.is_pne);
    }

    #[test]
    fn oracle_sets() {
        assert!(appendix_oracle(&GameFunction::F3, &[1.0, 1.0], &coord()).unwrap());
        assert!(appendix_oracle(&GameFunction::F4, &[-2.0, -2.0], &coord()).unwrap());
        assert!(!appendix_oracle(&GameFunction::F1, &[0.0, 1e-9], &coord()).unwrap());
        let s2 = GameFunction::Schwefel221 { n: 2 };
        assert!(appendix_oracle(&s2, &[0.0, 0.0], &coord()).unwrap());
        let c = verify_pne(&s2, &coord(), &[0.0, 0.0], DEFAULT_PNE_TOL, &opts()).unwrap();
        assert!(c.is_strict);
        let c = verify_pne(&s2, &coord(), &[0.5, -0.5], DEFAULT_PNE_TOL, &opts()).unwrap();
        assert!(c.is_pne && !c.is_strict);
        assert!(appendix_oracle(&GameFunction::F1, &[0.0, 0.0], &Partition::whole(2)).is_err());
    }

    #[test]
    fn unbounded_descent_is_flagged() {
        let f = crate::objective::FnObjective::new(2, |v: &[f64]| -1e14 * v[0] * v[0] + v[1]);
        let c = verify_pne(&f, &coord(), &[0.0, 0.0], DEFAULT_PNE_TOL, &opts()).unwrap();
        assert!(c.unbounded && !c.is_pne);
    }

    #[test]
    fn traces() {
        let t = trace_best_response_dynamics(&GameFunction::F1, &coord(), &[5.0, 5.0], 10_000, &opts()).unwrap();
        assert!(t.converged);
        assert!(t.final_point().iter().all(|v| v.abs() < 1e-8));
        let t2 = trace_best_response_dynamics(&GameFunction::f2(), &coord(), &[5.0, 5.0], 10_000, &opts()).unwrap();
        assert!(t2.converged && t2.cycles >= 10 * t.cycles, "{} vs {}", t2.cycles, t.cycles);
        let t4 = trace_best_response_dynamics(&GameFunction::F4, &coord(), &[3.0, 1.0], 100, &opts()).unwrap();
        let p = t4.final_point();
        assert!((p[0] - p[1]).abs() < 1e-8);
        assert!(t4.final_value() > -10.0);
        assert!(t4.to_csv().starts_with("cycle,x,y,f\n0,3.0,1.0,"));
    }

    #[test]
    fn propagation_requires_refinement() {
        let f = GameFunction::Schwefel221 { n: 3 };
        let coarse: Partition = "[[1],[2,3]]".parse().unwrap();
        let other: Partition = "[[1,2],[3]]".parse().unwrap();
        assert!(check_downward_propagation(&f, &coarse, &other, &[0.0; 3], 1e-8, &opts()).is_err());
        let fine = Partition::singletons(3);
        assert!(check_downward_propagation(&f, &coarse, &fine, &[0.0; 3], 1e-8, &opts()).unwrap());
    }
}
