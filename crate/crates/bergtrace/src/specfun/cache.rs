//! Chebyshev-grid caches for radial profiles on `(0,1)`.
//!
//! The profiles carry logarithmic singularities at `s = 0` (and algebraic
//! decay at `s = 1`), so a single global polynomial fit is useless. On a
//! dyadic panel `[h, 2h]`, however, `ln s = ln h + ln(s/h)` is analytic,
//! and so are the profiles; piecewise Chebyshev interpolation on panels
//! that shrink geometrically toward both endpoints is spectrally accurate
//! while staying O(log) to locate and O(degree) to evaluate.

/// Piecewise-Chebyshev interpolant of a function on `(0, 1)`.
#[derive(Clone, Debug)]
pub struct ProfileCache {
    /// Panel boundaries, ascending; panel `i` spans `bounds[i]..bounds[i+1]`.
    bounds: Vec<f64>,
    /// Chebyshev coefficients per panel, flattened.
    coeffs: Vec<f64>,
    degree: usize,
}

/// Smallest resolved abscissa; queries below are clamped to it.
const S_MIN_EXP: i32 = -44;
/// Number of dyadic levels toward `s = 1`.
const S_MAX_EXP: i32 = -44;

impl ProfileCache {
    /// Sample `f` on the dyadic panel layout with `degree + 1` Chebyshev
    /// nodes per panel.
    pub fn build<F: Fn(f64) -> f64>(f: F, degree: usize) -> Self {
        let mut bounds = Vec::new();
        for k in (1..=-S_MIN_EXP).rev() {
            bounds.push(2f64.powi(-k));
        }
        for k in 2..=-S_MAX_EXP {
            bounds.push(1.0 - 2f64.powi(-k));
        }
        let n = degree + 1;
        let mut coeffs = Vec::with_capacity((bounds.len() - 1) * n);
        let mut values = vec![0.0; n];
        for p in 0..bounds.len() - 1 {
            let (a, b) = (bounds[p], bounds[p + 1]);
            for (j, v) in values.iter_mut().enumerate() {
                let theta = std::f64::consts::PI * (2.0 * j as f64 + 1.0) / (2.0 * n as f64);
                let x = theta.cos();
                *v = f(a + 0.5 * (b - a) * (x + 1.0));
            }
            for k in 0..n {
                let mut acc = 0.0;
                for (j, v) in values.iter().enumerate() {
                    let theta = std::f64::consts::PI * (2.0 * j as f64 + 1.0) / (2.0 * n as f64);
                    acc += v * (k as f64 * theta).cos();
                }
                coeffs.push(acc * 2.0 / n as f64);
            }
        }
        ProfileCache { bounds, coeffs, degree }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let s = s.clamp(self.bounds[0], *self.bounds.last().unwrap());
        let p = match self.bounds.binary_search_by(|b| b.total_cmp(&s)) {
            Ok(i) => i.min(self.bounds.len() - 2),
            Err(i) => i - 1,
        };
        let (a, b) = (self.bounds[p], self.bounds[p + 1]);
        let x = 2.0 * (s - a) / (b - a) - 1.0;
        let n = self.degree + 1;
        let c = &self.coeffs[p * n..(p + 1) * n];
        // Clenshaw recurrence
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (1..n).rev() {
            let t = 2.0 * x * b1 - b2 + c[k];
            b2 = b1;
            b1 = t;
        }
        x * b1 - b2 + 0.5 * c[0]
    }

    /// Fault-injection hook: corrupt one coefficient so consistency checks
    /// must notice. Test and selftest plumbing only.
    pub fn corrupt_for_test(&mut self) {
        let mid = self.coeffs.len() / 2;
        self.coeffs[mid] += 1.0 + self.coeffs[mid].abs();
    }
}
