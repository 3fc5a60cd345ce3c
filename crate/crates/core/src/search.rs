//! Derivative-free local searches inside a box: bounded Brent for one
//! variable, Nelder-Mead and compass search for several.

/// Outcome of a local search.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
}

fn clamp_into(x: &mut [f64], lo: f64, hi: f64) {
    for v in x.iter_mut() {
        *v = v.clamp(lo, hi);
    }
}

/// Brent's bounded minimizer on `[a, b]`. Stops when the bracket is
/// narrower than `xatol` plus a few ulps of the current point, or after
/// `max_iter` iterations.
pub fn brent_bounded<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xatol: f64, max_iter: usize) -> (f64, f64, usize) {
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut evals = 1;
    let (mut d, mut e): (f64, f64) = (0.0, 0.0);
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = 4.0 * f64::EPSILON * x.abs() + xatol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = f(u);
        evals += 1;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx, evals)
}

/// Grid scan over `[lo, hi]` followed by bounded Brent around the best
/// grid point.
pub fn scan_and_refine<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, grid: usize, xatol: f64) -> Minimum {
    let grid = grid.max(2);
    let step = (hi - lo) / grid as f64;
    let mut best = (lo, f64::INFINITY, 0usize);
    for k in 0..=grid {
        let x = if k == grid { hi } else { lo + step * k as f64 };
        let fx = f(x);
        if fx < best.1 || best.1.is_nan() {
            best = (x, fx, k);
        }
    }
    let a = lo + step * best.2.saturating_sub(1) as f64;
    let b = (lo + step * (best.2 + 1) as f64).min(hi);
    let (x, fx, evals) = brent_bounded(&mut f, a, b, xatol, 500);
    if fx <= best.1 {
        Minimum { x: vec![x], f: fx, evaluations: evals + grid + 1 }
    } else {
        Minimum { x: vec![best.0], f: best.1, evaluations: evals + grid + 1 }
    }
}

/// Nelder-Mead inside a box (points are clamped before evaluation).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    initial_step: f64,
    bounds: (f64, f64),
    ftol: f64,
    xtol: f64,
    max_evals: usize,
) -> Minimum {
    let n = start.len();
    let (lo, hi) = bounds;
    let mut evals = 0;
    let mut eval = |x: &mut Vec<f64>, evals: &mut usize| {
        clamp_into(x, lo, hi);
        *evals += 1;
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    let f0 = eval(&mut x0, &mut evals);
    simplex.push((x0.clone(), f0));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += if x[i] + initial_step <= hi { initial_step } else { -initial_step };
        let fx = eval(&mut x, &mut evals);
        simplex.push((x, fx));
    }
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_spread = (simplex[n].1 - simplex[0].1).abs();
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        let flat = f_spread <= ftol * (1.0 + simplex[0].1.abs());
        if (flat && x_spread <= xtol) || x_spread <= 1e-3 * xtol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (w - c)).collect()
        };
        let mut xr = along(-1.0);
        let fr = eval(&mut xr, &mut evals);
        if fr < simplex[0].1 {
            let mut xe = along(-2.0);
            let fe = eval(&mut xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (mut xc, fc) = if fr < simplex[n].1 {
                let mut xc = along(-0.5);
                let fc = eval(&mut xc, &mut evals);
                (xc, fc)
            } else {
                let mut xc = along(0.5);
                let fc = eval(&mut xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (std::mem::take(&mut xc), fc);
            } else {
                let best = simplex[0].0.clone();
                for (x, fx) in simplex[1..].iter_mut() {
                    for (xi, bi) in x.iter_mut().zip(&best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *fx = eval(x, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    Minimum { x, f, evaluations: evals }
}

/// Coordinate-wise pattern search with step halving down to `min_step`.
pub fn compass_search<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    f_start: f64,
    initial_step: f64,
    min_step: f64,
    bounds: (f64, f64),
    max_evals: usize,
) -> Minimum {
    let (lo, hi) = bounds;
    let mut x = start.to_vec();
    let mut fx = f_start;
    let mut step = initial_step;
    let mut evals = 0;
    while step >= min_step && evals < max_evals {
        let mut moved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] = (y[i] + dir * step).clamp(lo, hi);
                if y[i] == x[i] {
                    continue;
                }
                let fy = f(&y);
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Minimum { x, f: fx, evaluations: evals }
}
