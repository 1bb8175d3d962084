//! Numerical checkers for the combined symbol growth conditions.
//!
//! The conditions bound pairings of gradients and Levi forms along `z - w`
//! by powers of the pseudo-hyperbolic distance and of `|1 - <z,w>|`. A
//! sampler can only produce evidence, so everything here reports empirical
//! suprema, never proofs.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{inner, norm_sq, pseudo_hyperbolic_sq, Point};
use crate::symbols::Symbol;

type C64 = Complex64;

/// `<d_z f, conj(z-w)> = sum_i d_i f(z) (z_i - w_i)`.
fn pair_holo(f: &dyn Symbol, z: &[C64], w: &[C64]) -> C64 {
    let n = f.dim();
    let mut g = vec![C64::new(0.0, 0.0); n];
    f.grad_holo(z, &mut g);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        acc += g[i] * (z[i] - w[i]);
    }
    acc
}

/// `<dbar_w g, z-w> = sum_j dbar_j g(w) conj(z_j - w_j)`.
fn pair_anti(g: &dyn Symbol, z: &[C64], w: &[C64]) -> C64 {
    let n = g.dim();
    let mut gr = vec![C64::new(0.0, 0.0); n];
    g.grad_anti(w, &mut gr);
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        acc += gr[j] * (z[j] - w[j]).conj();
    }
    acc
}

fn levi_along(f: &dyn Symbol, at: &[C64], z: &[C64], w: &[C64]) -> Result<C64> {
    let n = f.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += f.mixed_second(at, i, j)? * (z[i] - w[i]) * (z[j] - w[j]).conj();
        }
    }
    Ok(acc)
}

/// Ratio whose boundedness over all interior pairs is the growth condition.
///
/// `order == 1`: first-order gradient pairing against
/// `|phi_z(w)|^2 |1-<z,w>|^{n+eps}`. `order == 2`: the maximum of the three
/// second-order (Levi form) variants.
pub fn condition_ratio(
    f: &dyn Symbol,
    g: &dyn Symbol,
    epsilon: f64,
    z: &Point,
    w: &Point,
    order: u8,
) -> Result<f64> {
    let (zc, wc) = (z.coords(), w.coords());
    let n = f.dim() as f64;
    if zc == wc {
        return Err(Error::domain("condition ratio needs z != w"));
    }
    if 1.0 - norm_sq(zc) < crate::geometry::BOUNDARY_EPS
        || 1.0 - norm_sq(wc) < crate::geometry::BOUNDARY_EPS
    {
        return Err(Error::domain("condition ratio needs interior points"));
    }
    let phi2 = pseudo_hyperbolic_sq(zc, wc);
    let u = (C64::new(1.0, 0.0) - inner(zc, wc)).norm();
    if phi2 == 0.0 {
        return Err(Error::domain("pseudo-hyperbolic distance vanished"));
    }
    match order {
        1 => {
            let num = (pair_holo(f, zc, wc) * pair_anti(g, zc, wc)).norm();
            Ok(num / (phi2 * u.powf(n + epsilon)))
        }
        2 => {
            let phi = phi2.sqrt();
            let dfz = pair_holo(f, zc, wc).norm();
            let dgw = pair_anti(g, zc, wc).norm();
            let lf = levi_along(f, zc, zc, wc)?.norm();
            let lg = levi_along(g, wc, zc, wc)?.norm();
            let denom_pow = u.powf(n + epsilon);
            let r1 = dfz * lg / (phi.powi(3) * denom_pow);
            let r2 = lf * dgw / (phi.powi(3) * denom_pow);
            let r3 = lf * lg / (phi.powi(4) * denom_pow);
            Ok(r1.max(r2).max(r3))
        }
        k => Err(Error::domain(format!("order must be 1 or 2, got {k}"))),
    }
}

/// Result of an empirical supremum scan.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SupEstimate {
    pub sup: f64,
    pub argmax_z: Vec<(f64, f64)>,
    pub argmax_w: Vec<(f64, f64)>,
    pub samples: usize,
    pub depth: f64,
    pub seed: u64,
}

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| {
                C64::new(
                    rng.sample::<f64, _>(rand_distr_standard()),
                    rng.sample::<f64, _>(rand_distr_standard()),
                )
            })
            .collect();
        let nrm = norm_sq(&v).sqrt();
        if nrm > 1e-8 {
            return v.iter().map(|c| c / nrm).collect();
        }
    }
}

// Box-Muller standard normal without pulling in rand_distr.
struct StdNormal;
fn rand_distr_standard() -> StdNormal {
    StdNormal
}
impl rand::distributions::Distribution<f64> for StdNormal {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        (-2.0 * u1.ln()).sqrt() * u2.cos()
    }
}

/// Empirical supremum of the condition ratio over boundary-concentrated
/// random pairs: `1-|z|^2` is log-uniform in `[depth, 1)`, and half of the
/// draws place `w` in a shrinking neighborhood of `z`.
pub fn condition_sup_estimate(
    f: &dyn Symbol,
    g: &dyn Symbol,
    epsilon: f64,
    samples: usize,
    order: u8,
    depth: f64,
    seed: u64,
) -> Result<SupEstimate> {
    if samples < 1 {
        return Err(Error::domain("need at least one sample"));
    }
    let n = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_lo = depth.ln();
    let mut sup = 0.0f64;
    let mut arg_z = vec![C64::new(0.0, 0.0); n];
    let mut arg_w = vec![C64::new(0.0, 0.0); n];

    let draw_boundary_pt = |rng: &mut ChaCha8Rng| -> Vec<C64> {
        let eta = (rng.gen_range(log_lo..0.0f64)).exp(); // 1-|z|^2
        let dir = unit_direction(rng, n);
        let r = (1.0 - eta).sqrt();
        dir.iter().map(|c| c * r).collect()
    };

    for k in 0..samples {
        let z = draw_boundary_pt(&mut rng);
        let w = if k % 2 == 0 {
            draw_boundary_pt(&mut rng)
        } else {
            // perturb z: |w - z| log-uniform down to the same depth scale
            let delta = (rng.gen_range(log_lo..0.0f64)).exp();
            let dir = unit_direction(&mut rng, n);
            let cand: Vec<C64> = z.iter().zip(&dir).map(|(zi, di)| zi + delta * di).collect();
            if norm_sq(&cand) < 1.0 - 1e-12 {
                cand
            } else {
                draw_boundary_pt(&mut rng)
            }
        };
        if z == w {
            continue;
        }
        let zp = Point::new(z.clone());
        let wp = Point::new(w.clone());
        // pairs that collapse to zero pseudo-hyperbolic distance in floating
        // point carry no information; skip them
        let r = match condition_ratio(f, g, epsilon, &zp, &wp, order) {
            Ok(r) if r.is_finite() => r,
            _ => continue,
        };
        if r > sup {
            sup = r;
            arg_z.copy_from_slice(&z);
            arg_w.copy_from_slice(&w);
        }
    }
    Ok(SupEstimate {
        sup,
        argmax_z: arg_z.iter().map(|c| (c.re, c.im)).collect(),
        argmax_w: arg_w.iter().map(|c| (c.re, c.im)).collect(),
        samples,
        depth,
        seed,
    })
}

/// The single-symbol gradient envelope from the `f = conj(g)` reduction:
/// `(|P_pt(v)| + (1-|pt|^2)^{1/2} |Q_pt(v)|) (1-|pt|^2)^{(n-2+eps)/2}`.
pub fn gradient_envelope(pt: &[C64], v: &[C64], epsilon: f64) -> f64 {
    let n = pt.len() as f64;
    let pp = norm_sq(pt);
    let (p_len, q_len) = if pp == 0.0 {
        (0.0, norm_sq(v).sqrt())
    } else {
        let coef = inner(v, pt) / pp;
        let p: Vec<C64> = pt.iter().map(|c| coef * c).collect();
        let q: Vec<C64> = v.iter().zip(&p).map(|(vi, pi)| vi - pi).collect();
        (norm_sq(&p).sqrt(), norm_sq(&q).sqrt())
    };
    let eta = 1.0 - pp;
    (p_len + eta.sqrt() * q_len) * eta.powf(0.5 * (n - 2.0 + epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{bump, PolySymbol};
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_gradient_symbol_gives_zero_ratio() {
        // f free of z (anti-holomorphic): holomorphic gradient vanishes
        let f = PolySymbol::coordinate_bar(2, 0);
        let g = PolySymbol::coordinate(2, 1);
        let z = Point::from_re(&[0.3, 0.1]);
        let w = Point::from_re(&[0.1, -0.2]);
        let r = condition_ratio(&f, &g, 0.5, &z, &w, 1).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn coincident_points_rejected() {
        let f = PolySymbol::coordinate(2, 0);
        let z = Point::from_re(&[0.3, 0.1]);
        assert!(condition_ratio(&f, &f, 0.5, &z, &z, 1).is_err());
    }

    #[test]
    fn order1_spot_value_against_direct_formula() {
        // f = z1, g = zbar2 at fixed points: numerator |z1-w1| * |z2-w2|
        let f = PolySymbol::coordinate(2, 0);
        let g = PolySymbol::coordinate_bar(2, 1);
        let z = [c(0.4, 0.1), c(-0.2, 0.3)];
        let w = [c(0.1, -0.1), c(0.3, 0.0)];
        let r = condition_ratio(&f, &g, 0.5, &Point::new(z.to_vec()), &Point::new(w.to_vec()), 1)
            .unwrap();
        let num = (z[0] - w[0]).norm() * (z[1] - w[1]).norm();
        let phi2 = pseudo_hyperbolic_sq(&z, &w);
        let u = (c(1.0, 0.0) - inner(&z, &w)).norm();
        assert!((r - num / (phi2 * u.powf(2.5))).abs() < 1e-13);
    }

    #[test]
    fn compact_support_pair_has_finite_sup() {
        let f = bump(2, &[c(0.2, 0.0), c(0.0, 0.0)], 0.3).unwrap();
        let g = bump(2, &[c(-0.2, 0.0), c(0.0, 0.0)], 0.3).unwrap();
        let est = condition_sup_estimate(&f, &g, 0.5, 2000, 1, 1e-4, 7).unwrap();
        assert!(est.sup.is_finite());
    }

    #[test]
    fn trace_class_counterexample_grows_toward_boundary() {
        // f = z1, g = conj(z1): the anti-holomorphic Hankel counter-case
        let f = PolySymbol::coordinate(2, 0);
        let g = PolySymbol::coordinate_bar(2, 0);
        let shallow = condition_sup_estimate(&f, &g, 0.5, 20_000, 1, 1e-2, 11).unwrap();
        let deep = condition_sup_estimate(&f, &g, 0.5, 20_000, 1, 1e-6, 11).unwrap();
        assert!(
            deep.sup >= 10.0 * shallow.sup,
            "expected >=10x growth, got {} -> {}",
            shallow.sup,
            deep.sup
        );
    }

    #[test]
    fn product_symbol_envelope_bound() {
        // g = conj(z1) * bump: the envelope squared should bound the
        // condition-1 numerator through the two-point product
        let b = bump(2, &[c(0.0, 0.0), c(0.0, 0.0)], 0.7).unwrap();
        let zbar1 = PolySymbol::coordinate_bar(2, 0);
        let g = crate::symbols::product(Arc::new(zbar1), Arc::new(b));
        let f = crate::symbols::conj_symbol(Arc::new(g.clone()));
        let eps = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        // first pass: empirical C1
        let mut c1 = 0.0f64;
        let mut pts = Vec::new();
        for _ in 0..10_000 {
            let z: Vec<C64> = (0..2)
                .map(|_| c(rng.gen_range(-0.65..0.65), rng.gen_range(-0.65..0.65)))
                .collect();
            let w: Vec<C64> = (0..2)
                .map(|_| c(rng.gen_range(-0.65..0.65), rng.gen_range(-0.65..0.65)))
                .collect();
            if norm_sq(&z) >= 0.9 || norm_sq(&w) >= 0.9 || z == w {
                continue;
            }
            let v: Vec<C64> = z.iter().zip(&w).map(|(a, b)| a - b).collect();
            let mut gr = vec![c(0.0, 0.0); 2];
            for (pt, vv) in [(&z, &v), (&w, &v)] {
                g.grad_anti(pt, &mut gr);
                let pair: C64 = gr.iter().zip(vv.iter()).map(|(gi, vi)| gi * vi.conj()).sum();
                let env = gradient_envelope(pt, vv, eps);
                if env > 0.0 {
                    c1 = c1.max(pair.norm() / env);
                }
            }
            pts.push((z, w));
        }
        assert!(c1.is_finite() && c1 > 0.0);
        // second pass: numerator bounded by C1^2 * envelope product
        for (z, w) in pts {
            let v: Vec<C64> = z.iter().zip(&w).map(|(a, b)| a - b).collect();
            let num = (pair_holo(&f, &z, &w) * pair_anti(&g, &z, &w)).norm();
            let bound = c1 * c1 * gradient_envelope(&z, &v, eps) * gradient_envelope(&w, &v, eps);
            assert!(num <= bound * (1.0 + 1e-9) + 1e-300, "num {num} > bound {bound}");
        }
    }
}
