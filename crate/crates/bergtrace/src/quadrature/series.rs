//! Exact series evaluation of kernel-power integrals over the ball.
//!
//! Expanding `|1 - <z,w>|^{-2b}` in the binomial series and integrating
//! sphere harmonics term by term gives
//!
//! ```text
//! ∫_{B_n} (|w|^2)^p (1-|w|^2)^{t+q} / |1-<z,w>|^{2b} dm(w)
//!   = pi^n/(n-1)! * sum_j c_j^2 m_j |z|^{2j} B(n+j+p, t+q+1)
//! ```
//!
//! with `c_j = Γ(j+b)/(Γ(b) j!)` and the sphere moments
//! `m_j = j!(n-1)!/(n-1+j)!`. All terms are positive, so the partial sums
//! are monotone and the truncation is controlled by the last term.

use statrs::function::gamma::ln_gamma;

/// `∫_{B_n} (|w|^2)^p (1-|w|^2)^{t+q} |1-<z,w>|^{-2b} dm(w)` at `|z|^2 = x`.
///
/// Requires `b > 0`, `n + p > 0` and `t + q > -1`. Converges for `x < 1`;
/// near the boundary the term count grows like `1/(1-x)`.
pub fn kernel_power_ball_integral(n: usize, t: f64, b: f64, p: f64, q: f64, x: f64) -> f64 {
    assert!(b > 0.0 && n as f64 + p > 0.0 && t + q > -1.0 && (0.0..1.0).contains(&x));
    let nf = n as f64;
    let c = t + q + 1.0;
    // T_0 = B(n+p, c)
    let mut term = (ln_gamma(nf + p) + ln_gamma(c) - ln_gamma(nf + p + c)).exp();
    let mut sum = term;
    let max_terms = 50_000_000u64;
    let mut j = 0.0f64;
    for _ in 0..max_terms {
        let ratio = ((j + b) / (j + 1.0)).powi(2) * (j + 1.0) / (nf + j) * (nf + j + p)
            / (nf + j + p + c)
            * x;
        term *= ratio;
        sum += term;
        j += 1.0;
        if term < 1e-17 * sum {
            break;
        }
    }
    let prefactor = (nf * std::f64::consts::PI.ln() - ln_gamma(nf)).exp();
    prefactor * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::disk_rule_lebesgue;
    use num_complex::Complex64;

    #[test]
    fn matches_direct_quadrature_mid_radius() {
        // n=1, t=0, kernel power 2b = 3, z = 0.6 on the axis
        let b = 1.5;
        let x: f64 = 0.36;
        let series = kernel_power_ball_integral(1, 0.0, b, 0.0, 0.0, x);
        let rule = disk_rule_lebesgue(80, 160);
        let z = Complex64::new(x.sqrt(), 0.0);
        let direct = rule.integrate(|w| {
            (Complex64::new(1.0, 0.0) - z * w[0].conj()).norm().powf(-2.0 * b)
        });
        assert!(
            (series - direct).abs() < 1e-8 * direct,
            "series {series} vs quadrature {direct}"
        );
    }

    #[test]
    fn matches_quadrature_with_radial_profile() {
        // profile s^(-1/2)(1-s), n=1, t=0.5, 2b = 2.0; the direct route
        // folds the radial weight s^p (1-s)^{t+q} into a Jacobi rule
        let (b, t, p, q) = (1.0, 0.5, -0.5, 1.0);
        let x: f64 = 0.25;
        let series = kernel_power_ball_integral(1, t, b, p, q, x);
        let (s_nodes, s_weights) = crate::quadrature::gauss::gauss_unit_jacobi(64, t + q, p);
        let n_ang = 256;
        let zr = x.sqrt();
        let mut direct = 0.0;
        for (s, ws) in s_nodes.iter().zip(&s_weights) {
            let r = s.sqrt();
            let mut ang = 0.0;
            for j in 0..n_ang {
                let th = std::f64::consts::TAU * j as f64 / n_ang as f64;
                let d = Complex64::new(1.0 - zr * r * th.cos(), zr * r * th.sin());
                ang += d.norm().powf(-2.0 * b);
            }
            direct += 0.5 * ws * ang * std::f64::consts::TAU / n_ang as f64;
        }
        assert!(
            (series - direct).abs() < 1e-9 * direct,
            "series {series} vs quadrature {direct}"
        );
    }

    #[test]
    fn unweighted_volume_limit() {
        // b -> anything with x = 0 reduces to the plain radial integral
        let v = kernel_power_ball_integral(2, 0.0, 2.0, 0.0, 0.0, 0.0);
        // ∫_{B_2} dm = pi^2/2
        assert!((v - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    }
}
