//! Gauss quadrature node/weight generation.
//!
//! Rules are built with the Golub-Welsch algorithm: the three-term
//! recurrence coefficients of the orthogonal polynomials form a symmetric
//! tridiagonal matrix whose eigenvalues are the nodes and whose first
//! eigenvector components give the weights.

use statrs::function::gamma::ln_gamma;

/// Eigen-decomposition of a symmetric tridiagonal matrix by the implicit
/// QL method (EISPACK `tql2`, first-row-of-eigenvector variant).
///
/// `diag` holds the diagonal, `off` the sub-diagonal (`off[0]` unused).
/// Returns `(eigenvalues, first_components)` sorted ascending.
fn tridiag_eigen(mut diag: Vec<f64>, mut off: Vec<f64>, max_iter: usize) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    // first row of the (accumulated) eigenvector matrix
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    if n == 1 {
        return (diag, z);
    }
    off.rotate_left(1); // off[i] now couples i and i+1
    off[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= max_iter, "tridiagonal QL failed to converge");

            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                // accumulate first-row component
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
    let nodes = order.iter().map(|&i| diag[i]).collect();
    let firsts = order.iter().map(|&i| z[i]).collect();
    (nodes, firsts)
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Gauss-Jacobi rule on `[-1, 1]` for the weight `(1-x)^alpha (1+x)^beta`.
///
/// Exact for polynomial factors of degree `<= 2n - 1`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
    let ab = alpha + beta;
    let mut diag = Vec::with_capacity(n);
    let mut off = vec![0.0; n];
    for k in 0..n {
        let kf = k as f64;
        let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        let a_k = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else if denom == 0.0 {
            0.0
        } else {
            (beta * beta - alpha * alpha) / denom
        };
        diag.push(a_k);
        if k >= 1 {
            let b_k = if k == 1 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
            } else {
                4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab)
                    / ((2.0 * kf + ab).powi(2) * (2.0 * kf + ab + 1.0) * (2.0 * kf + ab - 1.0))
            };
            off[k] = b_k.sqrt();
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_beta(alpha + 1.0, beta + 1.0)).exp();
    let (nodes, firsts) = tridiag_eigen(diag, off, 64);
    let weights = firsts.iter().map(|f| mu0 * f * f).collect();
    (nodes, weights)
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Rule for `∫_0^1 s^b (1-s)^a h(s) ds`: returns `(s_i, w_i)` such that the
/// integral is `Σ w_i h(s_i)` for smooth `h`, with the endpoint weight
/// folded in exactly.
pub fn gauss_unit_jacobi(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_jacobi(n, a, b);
    let scale = 0.5f64.powf(a + b + 1.0);
    let nodes = x.iter().map(|xi| 0.5 * (1.0 + xi)).collect();
    let weights = w.iter().map(|wi| wi * scale).collect();
    (nodes, weights)
}

/// Plain Gauss-Legendre on `[lo, hi]`.
pub fn gauss_legendre_on(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (
        x.iter().map(|xi| mid + half * xi).collect(),
        w.iter().map(|wi| wi * half).collect(),
    )
}
