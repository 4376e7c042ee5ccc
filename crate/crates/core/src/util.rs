//! Small numeric helpers shared across modules: vector norms, supremum
//! scans over an interval, and least-squares line fits.

/// Maximum of a smooth scalar function over `[lo, hi]`.
///
/// Coarse scan over `n_coarse + 1` uniform points (endpoints included),
/// followed by a ternary refinement of the bracket around the best sample.
/// For the smooth quotients this crate deals in, the refined value is
/// accurate to roughly machine precision relative to the true supremum.
pub fn sup_scan<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n_coarse: usize) -> f64 {
    assert!(hi >= lo, "sup_scan: empty interval");
    if hi == lo {
        return f(lo);
    }
    let n = n_coarse.max(2);
    let step = (hi - lo) / n as f64;
    let mut best_i = 0usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=n {
        let t = if i == n { hi } else { lo + i as f64 * step };
        let v = f(t);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // Refine inside the bracket spanning the neighbours of the best sample.
    let a = if best_i == 0 {
        lo
    } else {
        lo + (best_i - 1) as f64 * step
    };
    let b = if best_i >= n - 1 {
        hi
    } else {
        lo + (best_i + 1) as f64 * step
    };
    best.max(ternary_max(&f, a, b))
}

fn ternary_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
        if hi - lo < 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    f(mid).max(f(lo)).max(f(hi))
}

/// Ordinary least squares fit `y ≈ intercept + slope·x`.
///
/// Returns `(slope, intercept, r_squared)`; `None` with fewer than two
/// distinct abscissae.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Some((slope, intercept, r2))
}

/// Euclidean norm of a vector.
pub fn norm_euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Max-abs norm of a vector.
pub fn norm_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Componentwise difference `a - b`.
pub fn vec_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `n!` as a float; exact for `n ≤ 20`.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0f64, |acc, k| acc * k as f64)
}

/// The factorial a-priori bound `e^{αL} (αL)^n M / n!` shared by the real
/// and complex solvers (`0^0 = 1` when `αL = 0`).
pub fn factorial_bound(alpha: f64, lipschitz: f64, field_bound: f64, n: usize) -> f64 {
    let al = alpha * lipschitz;
    let power = if n == 0 { 1.0 } else { al.powi(n as i32) };
    al.exp() * power * field_bound / factorial(n)
}

/// The plain contraction estimate `c^n / (1 − c) · first_step`, or `None`
/// when the contraction factor `c` is not below one (the single-metric
/// argument does not apply there).
pub fn geometric_bound_from(contraction: f64, n: usize, first_step: f64) -> Option<f64> {
    if contraction < 1.0 {
        let power = if n == 0 {
            1.0
        } else {
            contraction.powi(n as i32)
        };
        Some(power / (1.0 - contraction) * first_step)
    } else {
        None
    }
}
