//! Derivative-free minimization in scaled coordinates.

use nalgebra::{DMatrix, DVector};

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Simplex diameter below which the search is considered converged.
const MIN_DIAMETER: f64 = 1e-10;

/// Nelder–Mead with unit initial steps along each axis. Stops when the
/// spread of objective values over the simplex falls below `rel_tol`
/// relative to the best value, or when the simplex collapses.
pub(crate) fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    rel_tol: f64,
    max_evaluations: usize,
) -> Minimum {
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evaluations)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += 1.0;
        let v = eval(&x, &mut evaluations);
        simplex.push((x, v));
    }
    let mut converged = false;
    while evaluations < max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| max_abs_diff(x, &simplex[0].0))
            .fold(0.0, f64::max);
        if (worst - best).abs() <= rel_tol * best.abs() || diameter < MIN_DIAMETER {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evaluations);
        if fr < best {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evaluations);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evaluations);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evaluations);
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = x_best
                        .iter()
                        .zip(&entry.0)
                        .map(|(b, xi)| b + 0.5 * (xi - b))
                        .collect();
                    let v = eval(&x, &mut evaluations);
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    Minimum {
        x,
        f,
        evaluations,
        converged,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Step used for finite differences in scaled coordinates.
pub(crate) const FD_STEP: f64 = 1e-4;

/// Gauss–Newton refinement of `Σ r²` from `x0`, with step halving. The
/// Jacobian is formed by central differences.
pub(crate) fn gauss_newton(
    residuals: &mut dyn FnMut(&[f64]) -> Option<Vec<f64>>,
    x0: Minimum,
    max_iterations: usize,
) -> Minimum {
    let mut best = x0;
    let n = best.x.len();
    for _ in 0..max_iterations {
        let Some(r0) = residuals(&best.x) else { break };
        best.evaluations += 1;
        let m = r0.len();
        let mut jac = DMatrix::<f64>::zeros(m, n);
        let mut ok = true;
        for j in 0..n {
            let mut xp = best.x.clone();
            let mut xm = best.x.clone();
            xp[j] += FD_STEP;
            xm[j] -= FD_STEP;
            best.evaluations += 2;
            match (residuals(&xp), residuals(&xm)) {
                (Some(rp), Some(rm)) => {
                    for i in 0..m {
                        jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * FD_STEP);
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            break;
        }
        let r = DVector::from_vec(r0);
        let jt = jac.transpose();
        let Some(chol) = (&jt * &jac).cholesky() else { break };
        let step = chol.solve(&(-(&jt * &r)));
        let mut improved = false;
        let mut scale = 1.0;
        for _ in 0..8 {
            let x: Vec<f64> = best.x.iter().zip(step.iter()).map(|(a, d)| a + scale * d).collect();
            best.evaluations += 1;
            if let Some(rt) = residuals(&x) {
                let ft: f64 = rt.iter().map(|v| v * v).sum();
                if ft < best.f {
                    let gain = best.f - ft;
                    best.x = x;
                    best.f = ft;
                    improved = gain > 1e-14 * ft.max(f64::MIN_POSITIVE);
                    break;
                }
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    best
}

/// Central finite-difference Hessian of `f` at `x` with per-axis steps `h`.
pub(crate) fn hessian(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let f0 = f(x);
    let mut at = |d: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in d {
            y[i] += s;
        }
        f(&y)
    };
    let mut hm = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let fp = at(&[(i, h[i])]);
        let fm = at(&[(i, -h[i])]);
        hm[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let fpp = at(&[(i, h[i]), (j, h[j])]);
            let fpm = at(&[(i, h[i]), (j, -h[j])]);
            let fmp = at(&[(i, -h[i]), (j, h[j])]);
            let fmm = at(&[(i, -h[i]), (j, -h[j])]);
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hm[(i, j)] = v;
            hm[(j, i)] = v;
        }
    }
    hm
}
