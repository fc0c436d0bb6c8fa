//! Bracketing root finders shared by the PDS and ORA solvers.

/// Stopping rule for [`bisect`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    /// Stop once the bracket is narrower than this.
    pub x: f64,
    /// Stop once `|f(mid)|` falls below this.
    pub f: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            x: 1e-12,
            f: 1e-12,
            max_iter: 200,
        }
    }
}

/// Bisection on `[lo, hi]` for a function that changes sign on the interval.
///
/// The sign of `f(lo)` decides which half is kept, so both increasing and
/// decreasing functions work. If the endpoints do not bracket a root the
/// endpoint with the smaller `|f|` is returned.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: Tolerance) -> f64 {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return lo;
    }
    if f_hi == 0.0 {
        return hi;
    }
    if f_lo.signum() == f_hi.signum() {
        return if f_lo.abs() <= f_hi.abs() { lo } else { hi };
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..tol.max_iter {
        mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 || f_mid.abs() <= tol.f || (hi - lo) <= tol.x {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// Every root of `f` on `[lo, hi]` found by sampling `points` equally spaced
/// abscissae, bracketing each sign change (and exact zeros), and refining each
/// bracket with [`bisect`]. Roots are returned in increasing order.
pub fn scan_roots<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    points: usize,
    tol: Tolerance,
) -> Vec<f64> {
    let points = points.max(2);
    let step = (hi - lo) / (points - 1) as f64;
    let at = |k: usize| {
        if k + 1 == points {
            hi
        } else {
            lo + step * k as f64
        }
    };
    let mut roots = Vec::new();
    let mut prev_x = at(0);
    let mut prev_f = f(prev_x);
    if prev_f == 0.0 {
        roots.push(prev_x);
    }
    for k in 1..points {
        let x = at(k);
        let fx = f(x);
        if fx == 0.0 {
            roots.push(x);
        } else if prev_f != 0.0
            && prev_f.is_finite()
            && fx.is_finite()
            && prev_f.signum() != fx.signum()
        {
            roots.push(bisect(&mut f, prev_x, x, tol));
        }
        prev_x = x;
        prev_f = fx;
    }
    roots
}
