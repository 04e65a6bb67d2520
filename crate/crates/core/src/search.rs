//! One-dimensional bracketing searches shared by the asymptotic solver and
//! the power-allocation optimiser.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a golden-section minimisation.
#[derive(Debug, Clone, Copy)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    /// Final bracket `[lo, hi]` that contains the minimiser.
    pub lo: f64,
    pub hi: f64,
}

/// Golden-section minimisation of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket width drops below `rel_tol * max(|x|, abs_floor)`.
pub fn golden_section_min<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64, abs_floor: f64) -> GoldenResult
where
    F: FnMut(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // 200 iterations shrink any finite bracket below f64 resolution.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs().max(abs_floor) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    GoldenResult { x, value, lo, hi }
}

/// Bisection for the sign change of `g` on `[lo, hi]`, where `g(lo)` and
/// `g(hi)` have opposite signs (or one is zero).
///
/// `stop(lo, hi, g_mid)` decides termination; returns the final midpoint.
pub fn bisect<G, S>(mut g: G, mut lo: f64, mut hi: f64, mut stop: S) -> f64
where
    G: FnMut(f64) -> f64,
    S: FnMut(f64, f64, f64) -> bool,
{
    let lo_sign = g(lo) > 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let gm = g(mid);
        if stop(lo, hi, gm) {
            return mid;
        }
        if (gm > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
