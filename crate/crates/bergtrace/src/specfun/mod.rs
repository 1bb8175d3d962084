//! Scalar special functions and radial-profile transforms: the `F(s,x)`
//! kernel, the trace-formula densities on disk and ball, the
//! `F_m/G_m` transform tower with its profile recursion, and the sphere
//! moment coefficients `d_{alpha,beta}`.

mod cache;

pub use cache::ProfileCache;

use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::geometry::{beta_fn, frame, Point};
use crate::quadrature::adaptive;
use crate::quadrature::gauss;
use crate::quadrature::reduce::KahanSum;
use crate::quadrature::sphere_rule;
use crate::symbols::MultiIndex;

type C64 = Complex64;

const PI: f64 = std::f64::consts::PI;

/// Default tolerance for the internal adaptive quadratures.
const QUAD_TOL: f64 = 1e-12;

/// The elementary kernel
/// `F(s,x) = -[x ln(s/x) + (1-x) ln((1-s)/(1-x))]` on `0 < s <= x < 1`.
pub fn f_kernel(s: f64, x: f64) -> Result<f64> {
    if !(0.0 < s && s <= x && x < 1.0) {
        return Err(Error::domain(format!("need 0 < s <= x < 1, got s={s}, x={x}")));
    }
    // stable form: x ln(x/s) + (1-x) ln1p((s-x)/(1-s))
    Ok(x * (x / s).ln() + (1.0 - x) * ((s - x) / (1.0 - s)).ln_1p())
}

/// Density of the disk correction term:
/// `(t+1)/(16 pi^2) ∫_s^1 (1-x)^t x^{-1} F(s,x) dx`, strictly positive on
/// `(0,1)` with a logarithmic singularity at `0`.
pub fn rho_disk(t: f64, s: f64) -> Result<f64> {
    if !(t > -1.0) {
        return Err(Error::domain("t must exceed -1"));
    }
    if !(0.0 < s && s < 1.0) {
        return Err(Error::domain("s must lie in (0,1)"));
    }
    let integral = weighted_tail_integral(
        |x| f_kernel(s, x).expect("x in [s,1)") / x,
        t,
        s,
        QUAD_TOL,
    );
    Ok((t + 1.0) / (16.0 * PI * PI) * integral)
}

/// Density of the ball correction term (general dimension formula):
///
/// `s^{-n-1} sum_{k=1}^n (n-1)! Γ^2(n+t+1) / ((n-k)! Γ(t+1+k) Γ(t+1) pi^{2n})
///  ∫_s^1 F(s,x) x^{n-k-1} (1-x)^{t+k-1} dx`.
pub fn rho_ball(n: usize, t: f64, s: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("n must be >= 1"));
    }
    if !(t > -1.0) || !(0.0 < s && s < 1.0) {
        return Err(Error::domain("need t > -1 and s in (0,1)"));
    }
    let nf = n as f64;
    let mut acc = 0.0;
    for k in 1..=n {
        let kf = k as f64;
        let ln_coef = ln_gamma(nf) + 2.0 * ln_gamma(nf + t + 1.0)
            - ln_gamma(nf - kf + 1.0)
            - ln_gamma(t + 1.0 + kf)
            - ln_gamma(t + 1.0)
            - 2.0 * nf * PI.ln();
        let integral = weighted_tail_integral(
            |x| f_kernel(s, x).expect("x in [s,1)") * x.powf(nf - kf - 1.0),
            t + kf - 1.0,
            s,
            QUAD_TOL,
        );
        acc += ln_coef.exp() * integral;
    }
    Ok(s.powf(-nf - 1.0) * acc)
}

/// `∫_s^1 h(r) (1-r)^t dr` with the endpoint weight folded into a
/// fixed Jacobi rule on `[1/2, 1]` and adaptive refinement on `[s, 1/2]`.
pub fn weighted_tail_integral<F: Fn(f64) -> f64>(h: F, t: f64, s: f64, tol: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&s));
    let split = 0.5f64.max(s);
    // Jacobi panel [split, 1]: r = split + (1-split) u, weight (1-u)^t folded
    let (u_nodes, u_weights) = gauss::gauss_unit_jacobi(48, t, 0.0);
    let width = 1.0 - split;
    let mut jac = KahanSum::new();
    for (u, w) in u_nodes.iter().zip(&u_weights) {
        jac.add(w * h(split + width * u));
    }
    let mut total = width.powf(t + 1.0) * jac.value();
    if s < split {
        let (v, _) = adaptive::integrate(|r| h(r) * (1.0 - r).powf(t), s, split, tol, tol, 4000);
        total += v;
    }
    total
}

/// `∫_s^1 r^{m-1} (1-r)^t dr` in the exact finite closed form.
pub fn incomplete_beta_int(m: u32, t: f64, s: f64) -> f64 {
    debug_assert!(m >= 1);
    let mf = m as f64;
    let mut acc = 0.0;
    for k in 1..=m {
        let kf = k as f64;
        let ln_c = ln_gamma(mf) + ln_gamma(t + 1.0) - ln_gamma(mf - kf + 1.0) - ln_gamma(t + 1.0 + kf);
        acc += ln_c.exp() * s.powi((m - k) as i32) * (1.0 - s).powf(t + kf);
    }
    acc
}

/// A nonnegative radial profile on `(0,1)` with a declared singularity
/// envelope: `eval(s)` is `O(s^{-a} (1-s)^b)` for the hint `(a, b)`.
#[derive(Clone)]
pub struct RadialProfile {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub singularity_hint: (f64, f64),
}

impl RadialProfile {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, hint: (f64, f64)) -> Self {
        RadialProfile { eval: Arc::new(f), singularity_hint: hint }
    }

    pub fn one() -> Self {
        Self::new(|_| 1.0, (0.0, 0.0))
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }
}

/// `F_m φ(s) = ∫_s^1 r^{m-1} φ(r) (1-r)^t dr`. A divergent integral (only
/// possible at `s = 0` when the singularity hint gives `a >= m`) reports
/// `+inf` instead of erroring.
pub fn transform_f(m: u32, t: f64, phi: &RadialProfile, s: f64) -> Result<f64> {
    if m < 1 || !(t > -1.0) || !(0.0..1.0).contains(&s) {
        return Err(Error::domain("need m >= 1, t > -1, s in [0,1)"));
    }
    let (a, _) = phi.singularity_hint;
    if s == 0.0 && a >= m as f64 {
        return Ok(f64::INFINITY);
    }
    let lo = if s == 0.0 { 0.0 } else { s };
    Ok(weighted_tail_integral(
        |r| r.powi(m as i32 - 1) * phi.eval(r),
        t,
        lo,
        QUAD_TOL,
    ))
}

/// `G_m φ(s) = F_m φ(s) / (s^m (1-s)^{t+1})`.
pub fn transform_g(m: u32, t: f64, phi: &RadialProfile, s: f64) -> Result<f64> {
    let f = transform_f(m, t, phi, s)?;
    if s == 0.0 {
        return Ok(if f == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(f / (s.powi(m as i32) * (1.0 - s).powf(t + 1.0)))
}

/// The profile tower `Φ_{n,k}`: `Φ_{n,0} = 1`,
/// `Φ_{n,k+1} = (1-s) (G_{n+k})^2 Φ_{n,k}`. Each `G` application is
/// cached on a dyadic Chebyshev grid before the next one integrates it.
pub fn phi_profile(n: u32, k: u32, t: f64) -> Result<RadialProfile> {
    if n < 1 || !(t > -1.0) {
        return Err(Error::domain("need n >= 1 and t > -1"));
    }
    if k == 0 {
        return Ok(RadialProfile::one());
    }
    let mut curr: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|_| 1.0);
    for j in 0..k {
        let m = n + j;
        let g1 = if j == 0 {
            // first level is the closed form G_m 1
            let cache = ProfileCache::build(
                move |s| incomplete_beta_int(m, t, s) / (s.powi(m as i32) * (1.0 - s).powf(t + 1.0)),
                20,
            );
            Arc::new(cache)
        } else {
            let prev = curr.clone();
            Arc::new(ProfileCache::build(
                move |s| {
                    let w = weighted_tail_integral(
                        |r| r.powi(m as i32 - 1) * prev(r),
                        t,
                        s,
                        1e-10,
                    );
                    w / (s.powi(m as i32) * (1.0 - s).powf(t + 1.0))
                },
                20,
            ))
        };
        let g1_eval = g1.clone();
        let g2 = Arc::new(ProfileCache::build(
            move |s| {
                let w = weighted_tail_integral(
                    |r| r.powi(m as i32 - 1) * g1_eval.eval(r),
                    t,
                    s,
                    1e-10,
                );
                w / (s.powi(m as i32) * (1.0 - s).powf(t + 1.0))
            },
            20,
        ));
        curr = Arc::new(move |s: f64| (1.0 - s) * g2.eval(s));
    }
    let hint = (n as f64 + k as f64 - 0.5, k as f64);
    let eval = curr;
    Ok(RadialProfile { eval: Arc::new(move |s| eval(s)), singularity_hint: hint })
}

/// Closed form of `Φ_{n,2}`:
/// `(1-s)^{-t} s^{-n-1} sum_k (n-1)! Γ(t+1)/((n-k)! Γ(t+1+k))
///  ∫_s^1 F(s,x) x^{n-k-1} (1-x)^{t+k-1} dx`.
pub fn phi_n2_closed(n: u32, t: f64, s: f64) -> Result<f64> {
    if n < 1 || !(t > -1.0) || !(0.0 < s && s < 1.0) {
        return Err(Error::domain("need n >= 1, t > -1, s in (0,1)"));
    }
    let nf = n as f64;
    let mut acc = 0.0;
    for k in 1..=n {
        let kf = k as f64;
        let ln_coef =
            ln_gamma(nf) + ln_gamma(t + 1.0) - ln_gamma(nf - kf + 1.0) - ln_gamma(t + 1.0 + kf);
        let integral = weighted_tail_integral(
            |x| f_kernel(s, x).expect("x in [s,1)") * x.powf(nf - kf - 1.0),
            t + kf - 1.0,
            s,
            QUAD_TOL,
        );
        acc += ln_coef.exp() * integral;
    }
    Ok((1.0 - s).powf(-t) * s.powf(-nf - 1.0) * acc)
}

/// Sum a positive series with eventually power-law terms. If the stopping
/// rule (`term < tol * partial`) has not fired by `cap` terms, close the
/// sum with the analytic power-tail estimate `last * J / (p - 1)`, where
/// `p` is the decay power measured from the terms themselves.
fn sum_power_series<F: Fn(u64) -> f64>(term: F, tol: f64, cap: u64) -> f64 {
    let mut acc = KahanSum::new();
    let mut j = 0u64;
    let mut last = 0.0;
    while j < cap {
        last = term(j);
        acc.add(last);
        if last < tol * acc.value() {
            return acc.value();
        }
        j += 1;
    }
    // analytic tail: measure the local decay power from a half-decade back
    let j_half = j / 2;
    let p = (term(j_half) / last).ln() / (j as f64 / j_half as f64).ln();
    if p > 1.0 + 1e-9 {
        acc.add(last * j as f64 / (p - 1.0));
    } else {
        acc.add(f64::INFINITY);
    }
    acc.value()
}

/// `F_{n+1} Φ_{n,1}(0) = sum_j B(n+1+j, t+1)/(1+j)`, the series route.
/// Terms decay like `j^{-t-2}`, so if the cap is reached before the
/// stopping rule fires the sum is closed with the measured power tail.
pub fn f_phi_zero_series(n: u32, t: f64) -> f64 {
    let nf = n as f64;
    let term_at = |j: u64| -> f64 {
        let jf = j as f64;
        (ln_gamma(nf + 1.0 + jf) + ln_gamma(t + 1.0) - ln_gamma(nf + jf + t + 2.0)).exp()
            / (1.0 + jf)
    };
    // sequential pass with the exact term ratio
    // t_{j+1}/t_j = (n+1+j)/(n+j+t+2) * (1+j)/(2+j)
    let cap = 1_000_000u64;
    let mut v = beta_fn(nf + 1.0, t + 1.0);
    let mut acc = KahanSum::new();
    let mut j = 0u64;
    loop {
        acc.add(v);
        if v < 1e-14 * acc.value() {
            return acc.value();
        }
        if j + 1 >= cap {
            break;
        }
        let jf = j as f64;
        v *= (nf + 1.0 + jf) / (nf + jf + t + 2.0) * (1.0 + jf) / (2.0 + jf);
        j += 1;
    }
    let p = (term_at(j / 2) / v).ln() / (j as f64 / (j / 2) as f64).ln();
    if p > 1.0 + 1e-9 {
        acc.add(v * j as f64 / (p - 1.0));
    }
    acc.value()
}

/// The same quantity as `-∫_0^1 (1-s)^{n-1} s^t ln s ds` by quadrature.
pub fn f_phi_zero_integral(n: u32, t: f64) -> f64 {
    // endpoint structure: s^t ln s at 0, (1-s)^{n-1} harmless
    let (v, _) = adaptive::integrate(
        |s| -(1.0 - s).powi(n as i32 - 1) * s.powf(t) * s.ln(),
        0.0,
        1.0,
        1e-13,
        1e-13,
        4000,
    );
    v
}

/// Canonical value via the digamma closed form
/// `B(n, t+1) (psi(n+t+1) - psi(t+1))`.
pub fn f_phi_zero(n: u32, t: f64) -> f64 {
    let nf = n as f64;
    beta_fn(nf, t + 1.0) * (digamma(nf + t + 1.0) - digamma(t + 1.0))
}

/// Leading coefficient of the ball trace formula:
/// `a_{n,t} = F_{n+1} Φ_{n,1}(0) / (B(n,t+1)^2 n (2 pi i)^n)`.
pub fn a_coeff(n: u32, t: f64) -> Result<C64> {
    if n < 1 || !(t > -1.0) {
        return Err(Error::domain("need n >= 1 and t > -1"));
    }
    let nf = n as f64;
    let numerator = f_phi_zero(n, t);
    let denom_mod = beta_fn(nf, t + 1.0).powi(2) * nf * (2.0 * PI).powi(n as i32);
    // (2 pi i)^n = (2 pi)^n i^n; dividing by i^n multiplies by i^{-n}
    let phase = match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    };
    Ok(phase * (numerator / denom_mod))
}

/// `psi_1(s) = (∫_s^1 r^{-1}(1-r)^t dr) / ((t+1)(1-s)^t)`, the first
/// intermediate profile of the disk iteration.
pub fn psi1(t: f64, s: f64) -> Result<f64> {
    if !(0.0 < s && s < 1.0) || !(t > -1.0) {
        return Err(Error::domain("need s in (0,1), t > -1"));
    }
    let integral = weighted_tail_integral(|r| 1.0 / r, t, s, QUAD_TOL);
    Ok(integral / ((t + 1.0) * (1.0 - s).powf(t)))
}

/// Cached disk density `rho_t` as a fast profile for inner loops.
pub fn rho_disk_cache(t: f64) -> Result<ProfileCache> {
    if !(t > -1.0) {
        return Err(Error::domain("t must exceed -1"));
    }
    Ok(ProfileCache::build(move |s| rho_disk(t, s).expect("s interior"), 16))
}

/// Cached ball density `rho_{n,t}`.
pub fn rho_ball_cache(n: usize, t: f64) -> Result<ProfileCache> {
    if n < 1 || !(t > -1.0) {
        return Err(Error::domain("need n >= 1, t > -1"));
    }
    Ok(ProfileCache::build(move |s| rho_ball(n, t, s).expect("s interior"), 16))
}

/// Verify a profile cache against direct evaluation on a sample grid;
/// returns the worst relative deviation. The selftest uses this as the
/// density-consistency check.
pub fn rho_cache_consistency(cache: &ProfileCache, t: f64, n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 1..40 {
        let s = i as f64 / 40.0;
        let direct = if n == 1 {
            // the disk cache stores rho_t
            rho_disk(t, s)?
        } else {
            rho_ball(n, t, s)?
        };
        let got = cache.eval(s);
        let denom = direct.abs().max(1e-300);
        worst = worst.max((got - direct).abs() / denom);
    }
    Ok(worst)
}

/// Sphere-average moment
/// `d_{alpha,beta}(z) = ∫_{S_n} (A_z ζ)^alpha conj(A_z ζ)^beta dσ/σ`.
pub fn d_coeff(alpha: &MultiIndex, beta: &MultiIndex, z: &Point) -> Result<C64> {
    let n = z.dim();
    if alpha.dim() != n || beta.dim() != n {
        return Err(Error::domain("multi-index dimension mismatch"));
    }
    let fr = frame(z)?;
    let res = (alpha.degree() + beta.degree()) as usize + 1;
    let rule = sphere_rule(n, res, true)?;
    let val = rule.integrate_c(|zeta| {
        let mut az = [C64::new(0.0, 0.0); 2];
        fr.apply(zeta, &mut az[..n]);
        alpha.eval(&az[..n]) * beta.eval(&az[..n]).conj()
    });
    Ok(val)
}

/// Closed form of `d_{alpha,beta}` at an axis point `z = (z_1, 0, ..., 0)`:
/// `delta_{alpha,beta} (1-|z|^2)^{alpha_1 + |alpha|} (n-1)! alpha! / (n-1+|alpha|)!`.
pub fn d_coeff_axis(alpha: &MultiIndex, beta: &MultiIndex, z_norm_sq: f64) -> f64 {
    if alpha != beta {
        return 0.0;
    }
    let n = alpha.dim() as f64;
    let deg = alpha.degree() as f64;
    let ln_c = ln_gamma(n) + alpha.0.iter().map(|&k| ln_gamma(k as f64 + 1.0)).sum::<f64>()
        - ln_gamma(n + deg);
    (1.0 - z_norm_sq).powf(alpha.0[0] as f64 + deg) * ln_c.exp()
}

/// First-order moment matrix `d_{e_i, e_j}(w) = (A_w A_w^*)_{ij} / n`
/// `= [(1-|w|^2)^2 P_w + (1-|w|^2) Q_w]_{ij} / n`, in closed form.
pub fn d_first_order(w: &Point) -> Result<Vec<C64>> {
    let n = w.dim();
    let ww = w.norm_sq();
    if 1.0 - ww < crate::geometry::BOUNDARY_EPS {
        return Err(Error::domain("w must be interior"));
    }
    let eta = 1.0 - ww;
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let p = if ww == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                w.coords()[i] * w.coords()[j].conj() / ww
            };
            let q = if i == j { C64::new(1.0, 0.0) - p } else { -p };
            out[i * n + j] = (eta * eta * p + eta * q) / n as f64;
        }
    }
    Ok(out)
}

/// A computed sphere moment with its arguments, for reporting.
#[derive(Clone, Debug)]
pub struct SurfaceMoment {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub z: Point,
    pub value: C64,
}

impl SurfaceMoment {
    pub fn compute(alpha: MultiIndex, beta: MultiIndex, z: Point) -> Result<Self> {
        let value = d_coeff(&alpha, &beta, &z)?;
        Ok(SurfaceMoment { alpha, beta, z, value })
    }
}

/// Moments of the three reference profiles `1`, `r`, `1-r` at `s = 0`:
/// `F_m 1(0) = B(m,t+1)`, `F_m r(0) = B(m+1,t+1)`, `F_m (1-r)(0) = B(m,t+2)`.
pub fn reference_moment(which: RefProfile, m: f64, t: f64) -> f64 {
    match which {
        RefProfile::One => beta_fn(m, t + 1.0),
        RefProfile::R => beta_fn(m + 1.0, t + 1.0),
        RefProfile::OneMinusR => beta_fn(m, t + 2.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefProfile {
    One,
    R,
    OneMinusR,
}

impl RefProfile {
    pub fn profile(self) -> RadialProfile {
        match self {
            RefProfile::One => RadialProfile::one(),
            RefProfile::R => RadialProfile::new(|r| r, (0.0, 0.0)),
            RefProfile::OneMinusR => RadialProfile::new(|r| 1.0 - r, (0.0, 1.0)),
        }
    }
}

/// Series side of the transform identity
/// `F_{m+k} G_m φ(0) = sum_j F_{m+k+j} φ(0)/(k+j)`, with the moment
/// sequence supplied by the caller.
pub fn transform_series_sum<F: Fn(u64) -> f64>(moments: F, k: u32, tol: f64) -> f64 {
    sum_power_series(|j| moments(j) / (k as u64 + j) as f64, tol, 400_000)
}

/// Wrap a shared cache as a radial profile with the given envelope hint.
pub fn profile_from_cache(cache: Arc<ProfileCache>, hint: (f64, f64)) -> RadialProfile {
    RadialProfile::new(move |s| cache.eval(s), hint)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_kernel_examples() {
        assert_eq!(f_kernel(0.3, 0.3).unwrap(), 0.0);
        // 0.5 ln 2 + 0.5 ln(2/3)
        let v = f_kernel(0.25, 0.5).unwrap();
        assert!((v - 0.143_841_036_225_890_34).abs() < 1e-15, "got {v}");
        assert!(f_kernel(0.5, 0.25).is_err());
        assert!(f_kernel(0.0, 0.5).is_err());
    }

    #[test]
    fn rho_disk_positivity_and_edges() {
        for &t in &[0.0, 1.0, 5.0] {
            for i in 1..=20 {
                let s = i as f64 / 21.0;
                let v = rho_disk(t, s).unwrap();
                assert!(v > 0.0, "rho_{t}({s}) = {v}");
            }
        }
        // s -> 1: the integration range collapses
        assert!(rho_disk(0.0, 1.0 - 1e-9).unwrap() < 1e-12);
    }

    #[test]
    fn rho_consistency_disk_vs_ball() {
        // rho_t(s) = s^2 rho_{1,t}(s) / 16, the two being independent code paths
        for &t in &[0.0, 2.0, 5.0] {
            for i in 1..=10 {
                let s = i as f64 / 11.0;
                let lhs = rho_disk(t, s).unwrap();
                let rhs = s * s * rho_ball(1, t, s).unwrap() / 16.0;
                assert!(
                    (lhs - rhs).abs() < 1e-8 * lhs.abs().max(1e-12),
                    "t={t} s={s}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn rho_ball_positive_n2() {
        for &t in &[2.0, 5.0] {
            for i in 1..=15 {
                let s = i as f64 / 16.0;
                assert!(rho_ball(2, t, s).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn a_coeff_dim_one_is_inverse_two_pi_i() {
        // 1/(2 pi i) = -i/(2 pi), independent of t
        for &t in &[0.0, 0.5, 3.0, 12.0] {
            let a = a_coeff(1, t).unwrap();
            let want = C64::new(0.0, -1.0 / (2.0 * PI));
            assert!((a - want).norm() < 1e-14, "t={t}: {a}");
        }
    }

    #[test]
    fn a_coeff_times_phase_positive() {
        for n in 1..=3u32 {
            let a = a_coeff(n, 1.5).unwrap();
            let phase = C64::new(0.0, 1.0).powu(n);
            let real = (a * phase * (2.0 * PI).powi(n as i32)).re;
            assert!(real > 0.0);
        }
    }

    #[test]
    fn f_phi_zero_routes_agree() {
        for &n in &[1u32, 2] {
            for &t in &[0.0, 1.0, 3.5] {
                let series = f_phi_zero_series(n, t);
                let integral = f_phi_zero_integral(n, t);
                let closed = f_phi_zero(n, t);
                assert!(
                    (series - integral).abs() < 1e-8 * integral,
                    "n={n} t={t}: series {series} vs integral {integral}"
                );
                assert!((closed - integral).abs() < 1e-10 * integral);
            }
        }
        // n=1, t=0: -∫ ln s ds = 1
        assert!((f_phi_zero(1, 0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn f_phi_zero_asymptotic() {
        // t^{n+1} value / n! -> 1
        for &n in &[1u32, 2] {
            let t = 200.0;
            let v = f_phi_zero(n, t);
            let ratio = t.powi(n as i32 + 1) * v / ln_gamma(n as f64 + 1.0).exp();
            assert!((ratio - 1.0).abs() < 0.05, "n={n}: ratio {ratio}");
        }
    }

    #[test]
    fn transform_examples() {
        let one = RadialProfile::one();
        // F_m 1(0) = B(m, t+1)
        for &(m, t) in &[(1u32, 0.0), (2, 1.0), (3, 0.5), (5, 2.5)] {
            let got = transform_f(m, t, &one, 0.0).unwrap();
            let want = beta_fn(m as f64, t + 1.0);
            assert!((got - want).abs() < 1e-10 * want, "m={m} t={t}");
        }
        assert!((transform_f(1, 0.0, &one, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((transform_f(2, 1.0, &one, 0.0).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        // closed form agrees
        for &s in &[0.0, 0.2, 0.7, 0.95] {
            let got = transform_f(3, 1.5, &one, s).unwrap();
            assert!((got - incomplete_beta_int(3, 1.5, s)).abs() < 1e-11);
        }
        // divergent: a >= m at s = 0 reports +inf, no panic
        let sing = RadialProfile::new(|s| s.powf(-1.5), (1.5, 0.0));
        assert!(transform_f(1, 0.0, &sing, 0.0).unwrap().is_infinite());
    }

    #[test]
    fn phi_profile_base_cases() {
        let p = phi_profile(2, 0, 1.0).unwrap();
        assert_eq!(p.eval(0.37), 1.0);

        // Phi_{1,1}(s) at t=0 equals ln(1/s)/s
        let p = phi_profile(1, 1, 0.0).unwrap();
        for &s in &[0.05f64, 0.3, 0.8] {
            let want = (1.0 / s).ln() / s;
            let got = p.eval(s);
            assert!((got - want).abs() < 1e-8 * want, "s={s}: {got} vs {want}");
        }
        // and matches psi1/s for general t
        let t = 1.3;
        let p = phi_profile(1, 1, t).unwrap();
        for &s in &[0.1, 0.5, 0.9] {
            let want = psi1(t, s).unwrap() / s;
            let got = p.eval(s);
            assert!((got - want).abs() < 1e-8 * want, "s={s}");
        }
    }

    #[test]
    fn phi_n2_closed_matches_recursion_spot() {
        for &(n, t) in &[(1u32, 0.0), (2, 2.0)] {
            let rec = phi_profile(n, 2, t).unwrap();
            for &s in &[0.1, 0.45, 0.8] {
                let a = rec.eval(s);
                let b = phi_n2_closed(n, t, s).unwrap();
                assert!((a - b).abs() < 1e-6 * b.abs(), "n={n} t={t} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn phi_growth_envelope() {
        // Phi_{n,k}(s) s^{n+k-1/2} (1-s)^{-k} bounded on a grid
        for &(n, k, t) in &[(1u32, 1u32, 0.0), (1, 2, 2.0), (2, 2, 1.0)] {
            let p = phi_profile(n, k, t).unwrap();
            let (a, b) = p.singularity_hint;
            let mut sup = 0.0f64;
            for i in 1..60 {
                let s = i as f64 / 60.0;
                sup = sup.max(p.eval(s) * s.powf(a) * (1.0 - s).powf(-b));
            }
            assert!(sup.is_finite() && sup < 1e3, "n={n} k={k}: envelope ratio {sup}");
        }
    }

    #[test]
    fn rho_relation_to_phi_n2() {
        // rho_{n,t}(s) = ((n-1)!/(pi^n B(n,t+1)))^2 (1-s)^t Phi_{n,2}(s)
        for &(n, t) in &[(1u32, 0.5), (2, 1.0)] {
            let c = crate::geometry::SpaceParams::new(n as usize, t).unwrap().normalization();
            for &s in &[0.2, 0.6] {
                let lhs = rho_ball(n as usize, t, s).unwrap();
                let rhs = c * c * (1.0 - s).powf(t) * phi_n2_closed(n, t, s).unwrap();
                assert!((lhs - rhs).abs() < 1e-9 * lhs, "n={n} t={t} s={s}");
            }
        }
    }

    #[test]
    fn envelope_preserved_by_g() {
        // a = m + 0.5 non-integer > m: G_m keeps the s^{-a}(1-s)^b envelope
        for &(m, b) in &[(1u32, 0.0), (1, 1.0), (2, 0.0), (2, 1.0)] {
            let t = 0.7;
            let phi = RadialProfile::new(
                move |s: f64| s.powf(-(m as f64 + 0.5)) * (1.0 - s).powf(b),
                (m as f64 + 0.5, b),
            );
            let mut ratio_sup = 0.0f64;
            for i in 1..40 {
                let s = i as f64 / 40.0;
                let g = transform_g(m, t, &phi, s).unwrap();
                ratio_sup = ratio_sup.max(g * s.powf(m as f64 + 0.5) * (1.0 - s).powf(-b));
            }
            assert!(ratio_sup.is_finite() && ratio_sup < 50.0, "m={m} b={b}: {ratio_sup}");
        }
    }

    #[test]
    fn d_coeff_examples() {
        // d_{0,0} = 1 anywhere
        let z = Point::new(vec![C64::new(0.3, 0.2), C64::new(-0.1, 0.25)]);
        let d = d_coeff(&MultiIndex::zero(2), &MultiIndex::zero(2), &z).unwrap();
        assert!((d - C64::new(1.0, 0.0)).norm() < 1e-13);

        // axis point closed form: n=2, alpha=beta=(1,0), z=(0.5,0) -> 0.28125
        let z = Point::from_re(&[0.5, 0.0]);
        let a = MultiIndex(vec![1, 0]);
        let d = d_coeff(&a, &a, &z).unwrap();
        assert!((d - C64::new(0.28125, 0.0)).norm() < 1e-12, "{d}");
        assert!((d_coeff_axis(&a, &a, 0.25) - 0.28125).abs() < 1e-14);

        // mismatched indices vanish at axis points
        let b = MultiIndex(vec![0, 1]);
        let d = d_coeff(&a, &b, &z).unwrap();
        assert!(d.norm() < 1e-13);
    }

    #[test]
    fn d_coeff_conjugate_symmetry() {
        let z = Point::new(vec![C64::new(0.25, -0.3), C64::new(0.1, 0.4)]);
        let a = MultiIndex(vec![2, 0]);
        let b = MultiIndex(vec![1, 1]);
        let dab = SurfaceMoment::compute(a.clone(), b.clone(), z.clone()).unwrap();
        let dba = SurfaceMoment::compute(b, a, z).unwrap();
        assert!((dab.value - dba.value.conj()).norm() < 1e-12);
    }

    #[test]
    fn d_first_order_matches_quadrature() {
        let w = Point::new(vec![C64::new(0.4, 0.1), C64::new(-0.2, 0.35)]);
        let closed = d_first_order(&w).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let d = d_coeff(&MultiIndex::unit(2, i), &MultiIndex::unit(2, j), &w).unwrap();
                assert!(
                    (d - closed[i * 2 + j]).norm() < 1e-12,
                    "({i},{j}): {d} vs {}",
                    closed[i * 2 + j]
                );
            }
        }
    }

    #[test]
    fn kernel_weighted_integral_bounded_lemma_f_estimate() {
        // ∫_0^x (1-s)^{-eps} F(s,x) ds <= C x^2
        for &eps in &[0.25, 0.5, 0.75] {
            let mut sup = 0.0f64;
            for i in 1..=12 {
                let x = i as f64 / 12.5;
                let (v, _) = adaptive::integrate(
                    |s| (1.0 - s).powf(-eps) * f_kernel(s, x).unwrap(),
                    0.0,
                    x,
                    1e-11,
                    1e-11,
                    4000,
                );
                sup = sup.max(v / (x * x));
            }
            assert!(sup.is_finite() && sup < 10.0, "eps={eps}: {sup}");
        }
    }

    #[test]
    fn rho_cache_matches_direct() {
        let cache = rho_disk_cache(0.5).unwrap();
        let worst = rho_cache_consistency(&cache, 0.5, 1).unwrap();
        assert!(worst < 1e-9, "cache deviation {worst}");
        let mut bad = cache.clone();
        bad.corrupt_for_test();
        assert!(rho_cache_consistency(&bad, 0.5, 1).unwrap() > 1e-6);
    }
}
