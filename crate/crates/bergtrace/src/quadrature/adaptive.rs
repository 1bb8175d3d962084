//! Adaptive 1-d quadrature (Gauss-Kronrod 7/15 with bisection).
//!
//! Worst-interval-first refinement. Endpoint singularities integrable in
//! the `(1-x)^t`, `ln x` family are handled by the bisection cascade; the
//! caller folds stronger weights into a Jacobi rule instead.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// 15-point Kronrod abscissae on [-1,1] (positive half) and weights,
// with the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// One Gauss-Kronrod 7/15 pass over `[a, b]`: `(kronrod, err_estimate)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut res_k = WGK[7] * fc;
    let mut res_g = WG[3] * fc;
    let mut res_abs = res_k.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(mid - dx);
        let f2 = f(mid + dx);
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        res_asc += WGK[j] * ((f(mid - dx) - mean).abs() + (f(mid + dx) - mean).abs());
    }
    let res_k = res_k * half;
    let res_g = res_g * half;
    let res_asc = res_asc * half.abs();
    let res_abs = res_abs * half.abs();

    let mut err = (res_k - res_g).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * 1.0_f64.min((200.0 * err / res_asc).powf(1.5));
    }
    let tiny = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if res_abs > tiny {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (res_k, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap by error; tie-break on the left endpoint for determinism
        self.err
            .total_cmp(&other.err)
            .then(other.a.total_cmp(&self.a))
    }
}

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol` or relative
/// tolerance `rel_tol`, whichever is laxer, refining at most `max_seg`
/// intervals. Returns `(value, error_estimate)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_seg: usize,
) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, err: e });
    let mut total_v = v;
    let mut total_e = e;

    while total_e > abs_tol.max(rel_tol * total_v.abs()) && heap.len() < max_seg {
        let worst = heap.pop().expect("heap non-empty");
        // stop refining a panel once abscissae would round onto a nonzero
        // endpoint; panels touching 0 may descend into subnormals
        let width = (worst.b - worst.a).abs();
        if width < worst.a.abs().max(worst.b.abs()) * 1e-13 {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total_v += v1 + v2 - worst.value;
        total_e += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
    }

    // deterministic re-summation in spatial order
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|s, t| s.a.total_cmp(&t.a));
    let value = segs.iter().map(|s| s.value).sum();
    let err = segs.iter().map(|s| s.err).sum();
    (value, err)
}

/// Convenience wrapper with the tolerances used throughout the crate.
pub fn integrate_tol<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate(f, a, b, tol, tol, 4000).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_integrand() {
        let (v, e) = integrate(|x| x.cos(), 0.0, 1.0, 1e-12, 1e-12, 100);
        assert!((v - 1.0f64.sin()).abs() < 1e-13);
        assert!(e < 1e-10);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫_0^1 ln(1/x) dx = 1
        let (v, _) = integrate(|x| -x.ln(), 0.0, 1.0, 1e-12, 1e-12, 4000);
        assert!((v - 1.0).abs() < 1e-11, "got {v}");
    }

    #[test]
    fn algebraic_endpoint_singularity() {
        // ∫_0^1 x^(-1/2) dx = 2; the panel at 0 keeps halving
        let (v, _) = integrate(|x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 }, 0.0, 1.0, 1e-11, 1e-11, 4000);
        assert!((v - 2.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn squared_log_singularity() {
        // ∫_0^1 ln(x)^2 dx = 2
        let (v, _) = integrate(|x| x.ln().powi(2), 1e-308, 1.0, 1e-11, 1e-11, 4000);
        assert!((v - 2.0).abs() < 1e-9, "got {v}");
    }
}
