//! Integration rules over the disk, the two-ball, spheres, product
//! domains and the unit interval, with the Bergman weight folded in.

pub mod adaptive;
pub mod gauss;
pub mod reduce;
mod series;
pub mod sobol;

pub use series::kernel_power_ball_integral;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::SpaceParams;
use reduce::{pairwise_sum, pairwise_sum_c};
use sobol::SobolSeq;

type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Interval,
    Disk,
    Ball2,
    Sphere { n: usize },
    DiskPair,
    Ball2Pair,
}

/// Nodes-and-weights (or streaming Monte Carlo) rule for one domain.
///
/// Nodes are stored flat; each node occupies `node_dim` consecutive
/// complex entries (`2n` for pair domains).
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub domain: Domain,
    /// Weight exponent folded into the rule, if any.
    pub weight_t: Option<f64>,
    node_dim: usize,
    kind: RuleKind,
}

#[derive(Clone, Debug)]
enum RuleKind {
    Nodes { points: Vec<C64>, weights: Vec<f64> },
    /// Scrambled-Sobol stream over `B_2 x B_2`, equal-weight.
    SobolBall2Pair { samples: usize, seed: u64 },
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: usize,
    pub seed: u64,
}

impl QuadratureRule {
    pub fn node_dim(&self) -> usize {
        self.node_dim
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            RuleKind::Nodes { weights, .. } => weights.len(),
            RuleKind::SobolBall2Pair { samples, .. } => *samples,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterate `(node, weight)` for node-based rules.
    pub fn iter(&self) -> impl Iterator<Item = (&[C64], f64)> {
        match &self.kind {
            RuleKind::Nodes { points, weights } => points
                .chunks_exact(self.node_dim)
                .zip(weights.iter().copied()),
            RuleKind::SobolBall2Pair { .. } => {
                panic!("streaming Monte Carlo rule has no materialized nodes")
            }
        }
    }

    /// Deterministic integral of a real integrand (pairwise reduction,
    /// chunks mapped in parallel in index order).
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&[C64]) -> f64 + Sync,
    {
        match &self.kind {
            RuleKind::Nodes { points, weights } => {
                let dim = self.node_dim;
                let chunk = 4096;
                let partials: Vec<f64> = (0..weights.len())
                    .into_par_iter()
                    .chunks(chunk)
                    .map(|idx| {
                        let vals: Vec<f64> = idx
                            .iter()
                            .map(|&i| weights[i] * f(&points[i * dim..(i + 1) * dim]))
                            .collect();
                        pairwise_sum(&vals)
                    })
                    .collect();
                pairwise_sum(&partials)
            }
            RuleKind::SobolBall2Pair { .. } => self.integrate_mc(f).value,
        }
    }

    pub fn integrate_c<F>(&self, f: F) -> C64
    where
        F: Fn(&[C64]) -> C64 + Sync,
    {
        match &self.kind {
            RuleKind::Nodes { points, weights } => {
                let dim = self.node_dim;
                let chunk = 4096;
                let partials: Vec<C64> = (0..weights.len())
                    .into_par_iter()
                    .chunks(chunk)
                    .map(|idx| {
                        let vals: Vec<C64> = idx
                            .iter()
                            .map(|&i| weights[i] * f(&points[i * dim..(i + 1) * dim]))
                            .collect();
                        pairwise_sum_c(&vals)
                    })
                    .collect();
                pairwise_sum_c(&partials)
            }
            RuleKind::SobolBall2Pair { .. } => {
                let re = self.integrate_mc(|z| f(z).re).value;
                let im = self.integrate_mc(|z| f(z).im).value;
                C64::new(re, im)
            }
        }
    }

    /// Monte Carlo integral with standard error (Sobol rules only; for
    /// node rules the error field is zero).
    pub fn integrate_mc<F>(&self, f: F) -> McEstimate
    where
        F: Fn(&[C64]) -> f64 + Sync,
    {
        match &self.kind {
            RuleKind::Nodes { .. } => McEstimate {
                value: self.integrate(f),
                std_err: 0.0,
                samples: self.len(),
                seed: 0,
            },
            RuleKind::SobolBall2Pair { samples, seed } => {
                let vol = std::f64::consts::PI.powi(2) / 2.0;
                let vol2 = vol * vol;
                let seq = SobolSeq::new(8, *seed);
                let chunk = 1 << 16;
                let n_chunks = (samples + chunk - 1) / chunk;
                let partials: Vec<(f64, f64)> = (0..n_chunks)
                    .into_par_iter()
                    .map(|ci| {
                        let lo = ci * chunk;
                        let hi = (lo + chunk).min(*samples);
                        let mut acc = reduce::KahanSum::new();
                        let mut acc2 = reduce::KahanSum::new();
                        let mut pt = [0.0f64; 8];
                        let mut zw = [C64::new(0.0, 0.0); 4];
                        for k in lo..hi {
                            seq.point_at(k as u64, &mut pt);
                            ball2_pair_from_cube(&pt, &mut zw);
                            let v = f(&zw);
                            acc.add(v);
                            acc2.add(v * v);
                        }
                        (acc.value(), acc2.value())
                    })
                    .collect();
                let sum: f64 = pairwise_sum(&partials.iter().map(|p| p.0).collect::<Vec<_>>());
                let sum2: f64 = pairwise_sum(&partials.iter().map(|p| p.1).collect::<Vec<_>>());
                let nf = *samples as f64;
                let mean = sum / nf;
                let var = (sum2 / nf - mean * mean).max(0.0);
                McEstimate {
                    value: vol2 * mean,
                    std_err: vol2 * (var / nf).sqrt(),
                    samples: *samples,
                    seed: *seed,
                }
            }
        }
    }

    /// Single-pass complex Monte Carlo integral over the Sobol pair rule,
    /// with a combined standard error.
    pub fn integrate_mc_c<F>(&self, f: F) -> (C64, f64)
    where
        F: Fn(&[C64]) -> C64 + Sync,
    {
        match &self.kind {
            RuleKind::Nodes { .. } => (self.integrate_c(f), 0.0),
            RuleKind::SobolBall2Pair { samples, seed } => {
                let vol = std::f64::consts::PI.powi(2) / 2.0;
                let vol2 = vol * vol;
                let seq = SobolSeq::new(8, *seed);
                let chunk = 1 << 16;
                let n_chunks = (samples + chunk - 1) / chunk;
                let partials: Vec<(f64, f64, f64)> = (0..n_chunks)
                    .into_par_iter()
                    .map(|ci| {
                        let lo = ci * chunk;
                        let hi = (lo + chunk).min(*samples);
                        let mut acc_re = reduce::KahanSum::new();
                        let mut acc_im = reduce::KahanSum::new();
                        let mut acc_sq = reduce::KahanSum::new();
                        let mut pt = [0.0f64; 8];
                        let mut zw = [C64::new(0.0, 0.0); 4];
                        for k in lo..hi {
                            seq.point_at(k as u64, &mut pt);
                            ball2_pair_from_cube(&pt, &mut zw);
                            let v = f(&zw);
                            acc_re.add(v.re);
                            acc_im.add(v.im);
                            acc_sq.add(v.norm_sqr());
                        }
                        (acc_re.value(), acc_im.value(), acc_sq.value())
                    })
                    .collect();
                let sum_re = pairwise_sum(&partials.iter().map(|p| p.0).collect::<Vec<_>>());
                let sum_im = pairwise_sum(&partials.iter().map(|p| p.1).collect::<Vec<_>>());
                let sum_sq = pairwise_sum(&partials.iter().map(|p| p.2).collect::<Vec<_>>());
                let nf = *samples as f64;
                let mean = C64::new(sum_re / nf, sum_im / nf);
                let var = (sum_sq / nf - mean.norm_sqr()).max(0.0);
                (vol2 * mean, vol2 * (var / nf).sqrt())
            }
        }
    }

    /// Sum of weights (the measure of the domain under the declared weight).
    pub fn total_weight(&self) -> f64 {
        match &self.kind {
            RuleKind::Nodes { weights, .. } => pairwise_sum(weights),
            RuleKind::SobolBall2Pair { .. } => (std::f64::consts::PI.powi(2) / 2.0).powi(2),
        }
    }

    pub fn weights_positive(&self) -> bool {
        match &self.kind {
            RuleKind::Nodes { weights, .. } => weights.iter().all(|&w| w > 0.0),
            RuleKind::SobolBall2Pair { .. } => true,
        }
    }
}

/// Map a `[0,1)^4` cube point to a volume-uniform point of `B_2`.
fn ball2_from_cube(u: &[f64], out: &mut [C64]) {
    let r = u[0].powf(0.25);
    let s = u[1]; // sin^2 of the polar angle
    let (c1, s1) = (std::f64::consts::TAU * u[2]).sin_cos();
    let (c2, s2) = (std::f64::consts::TAU * u[3]).sin_cos();
    let r1 = r * (1.0 - s).sqrt();
    let r2 = r * s.sqrt();
    out[0] = C64::new(r1 * s1, r1 * c1);
    out[1] = C64::new(r2 * s2, r2 * c2);
}

fn ball2_pair_from_cube(u: &[f64], out: &mut [C64]) {
    ball2_from_cube(&u[..4], &mut out[..2]);
    ball2_from_cube(&u[4..], &mut out[2..]);
}

/// Gauss rule for the probability measure `dlambda_t` on the unit disk:
/// Gauss-Jacobi in `s = |z|^2` with the `(1-s)^t` weight folded, uniform
/// angular grid. Exact for integrands polynomial in `(z, conj z)` up to
/// degree `n_radial - 1` in each of `z`, `conj z` and angular harmonics
/// below `n_angular`.
pub fn disk_rule(t: f64, n_radial: usize, n_angular: usize) -> QuadratureRule {
    let (s_nodes, s_weights) = gauss::gauss_unit_jacobi(n_radial, t, 0.0);
    let mut points = Vec::with_capacity(n_radial * n_angular);
    let mut weights = Vec::with_capacity(n_radial * n_angular);
    let ang = std::f64::consts::TAU / n_angular as f64;
    for (s, ws) in s_nodes.iter().zip(&s_weights) {
        let r = s.sqrt();
        let w = (t + 1.0) * ws / n_angular as f64;
        for j in 0..n_angular {
            let (sin, cos) = (ang * j as f64).sin_cos();
            points.push(C64::new(r * cos, r * sin));
            weights.push(w);
        }
    }
    QuadratureRule {
        domain: Domain::Disk,
        weight_t: Some(t),
        node_dim: 1,
        kind: RuleKind::Nodes { points, weights },
    }
}

/// Same node layout but weights for the plain Lebesgue measure `dm`.
pub fn disk_rule_lebesgue(n_radial: usize, n_angular: usize) -> QuadratureRule {
    let mut rule = disk_rule(0.0, n_radial, n_angular);
    if let RuleKind::Nodes { weights, .. } = &mut rule.kind {
        weights.iter_mut().for_each(|w| *w *= std::f64::consts::PI);
    }
    rule.weight_t = None;
    rule
}

/// Gauss rule for `dlambda_t` on the two-ball: Jacobi in `s = |z|^2` with
/// weight `s (1-s)^t`, Gauss-Legendre in the polar variable, uniform
/// angular grids.
pub fn ball2_rule(t: f64, n_radial: usize, n_polar: usize, n_angular: usize) -> QuadratureRule {
    let params = SpaceParams { n: 2, t };
    let (s_nodes, s_weights) = gauss::gauss_unit_jacobi(n_radial, t, 1.0);
    let (u_nodes, u_weights) = gauss::gauss_legendre_on(n_polar, 0.0, 1.0);
    let cnt = params.normalization();
    let ang = std::f64::consts::TAU / n_angular as f64;
    let mut points = Vec::with_capacity(n_radial * n_polar * n_angular * n_angular);
    let mut weights = Vec::with_capacity(points.capacity());
    for (s, ws) in s_nodes.iter().zip(&s_weights) {
        let r = s.sqrt();
        for (u, wu) in u_nodes.iter().zip(&u_weights) {
            let r1 = r * (1.0 - u).sqrt();
            let r2 = r * u.sqrt();
            let w = cnt * 0.25 * ws * wu * ang * ang;
            for j1 in 0..n_angular {
                let (sin1, cos1) = (ang * j1 as f64).sin_cos();
                for j2 in 0..n_angular {
                    let (sin2, cos2) = (ang * j2 as f64).sin_cos();
                    points.push(C64::new(r1 * cos1, r1 * sin1));
                    points.push(C64::new(r2 * cos2, r2 * sin2));
                    weights.push(w);
                }
            }
        }
    }
    QuadratureRule {
        domain: Domain::Ball2,
        weight_t: Some(t),
        node_dim: 2,
        kind: RuleKind::Nodes { points, weights },
    }
}

/// Lebesgue-measure variant of [`ball2_rule`], restricted to `|z| <= radius`.
pub fn ball2_rule_lebesgue(
    n_radial: usize,
    n_polar: usize,
    n_angular: usize,
    radius: f64,
) -> QuadratureRule {
    let (s_nodes, s_weights) = gauss::gauss_unit_jacobi(n_radial, 0.0, 1.0);
    let (u_nodes, u_weights) = gauss::gauss_legendre_on(n_polar, 0.0, 1.0);
    let ang = std::f64::consts::TAU / n_angular as f64;
    let s_max = radius * radius;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (s, ws) in s_nodes.iter().zip(&s_weights) {
        // map s from [0,1] to [0, s_max]; the Jacobi s-weight scales by s_max^2
        let s = s * s_max;
        let ws = ws * s_max * s_max;
        let r = s.sqrt();
        for (u, wu) in u_nodes.iter().zip(&u_weights) {
            let r1 = r * (1.0 - u).sqrt();
            let r2 = r * u.sqrt();
            let w = 0.25 * ws * wu * ang * ang;
            for j1 in 0..n_angular {
                let (sin1, cos1) = (ang * j1 as f64).sin_cos();
                for j2 in 0..n_angular {
                    let (sin2, cos2) = (ang * j2 as f64).sin_cos();
                    points.push(C64::new(r1 * cos1, r1 * sin1));
                    points.push(C64::new(r2 * cos2, r2 * sin2));
                    weights.push(w);
                }
            }
        }
    }
    QuadratureRule {
        domain: Domain::Ball2,
        weight_t: None,
        node_dim: 2,
        kind: RuleKind::Nodes { points, weights },
    }
}

/// Surface rule on the unit sphere `S_n` (circle for `n = 1`, torus grid
/// over `S^3` for `n = 2`). Exact for monomials `zeta^a conj(zeta)^b`
/// with degrees up to `resolution`. Weights sum to the sphere area; pass
/// `normalized = true` for the average.
pub fn sphere_rule(n: usize, resolution: usize, normalized: bool) -> Result<QuadratureRule> {
    let scale = |w: f64, area: f64| if normalized { w / area } else { w };
    match n {
        1 => {
            let m = (2 * resolution + 1).max(8);
            let area = std::f64::consts::TAU;
            let w = scale(area / m as f64, area);
            let mut points = Vec::with_capacity(m);
            for j in 0..m {
                let (sin, cos) = (std::f64::consts::TAU * j as f64 / m as f64).sin_cos();
                points.push(C64::new(cos, sin));
            }
            Ok(QuadratureRule {
                domain: Domain::Sphere { n },
                weight_t: None,
                node_dim: 1,
                kind: RuleKind::Nodes { points, weights: vec![w; m] },
            })
        }
        2 => {
            let n_u = resolution / 2 + 2;
            let n_phi = (2 * resolution + 1).max(8);
            let (u_nodes, u_weights) = gauss::gauss_legendre_on(n_u, 0.0, 1.0);
            let area = 2.0 * std::f64::consts::PI.powi(2);
            let ang = std::f64::consts::TAU / n_phi as f64;
            let mut points = Vec::with_capacity(n_u * n_phi * n_phi);
            let mut weights = Vec::with_capacity(points.capacity());
            for (u, wu) in u_nodes.iter().zip(&u_weights) {
                let r1 = (1.0 - u).sqrt();
                let r2 = u.sqrt();
                let w = scale(0.5 * wu * ang * ang, area);
                for j1 in 0..n_phi {
                    let (sin1, cos1) = (ang * j1 as f64).sin_cos();
                    for j2 in 0..n_phi {
                        let (sin2, cos2) = (ang * j2 as f64).sin_cos();
                        points.push(C64::new(r1 * cos1, r1 * sin1));
                        points.push(C64::new(r2 * cos2, r2 * sin2));
                        weights.push(w);
                    }
                }
            }
            Ok(QuadratureRule {
                domain: Domain::Sphere { n },
                weight_t: None,
                node_dim: 2,
                kind: RuleKind::Nodes { points, weights },
            })
        }
        _ => Err(Error::unsupported("sphere rules are implemented for n in {1, 2}")),
    }
}

/// Tensor square of a disk or two-ball rule. Node count squares and the
/// ordering is deterministic.
pub fn product_rule(base: &QuadratureRule, cap: usize) -> Result<QuadratureRule> {
    let (domain, node_dim) = match base.domain {
        Domain::Disk => (Domain::DiskPair, 2),
        Domain::Ball2 => (Domain::Ball2Pair, 4),
        _ => return Err(Error::unsupported("product rule needs a disk or two-ball base")),
    };
    let n = base.len();
    let total = n.checked_mul(n).ok_or_else(|| Error::resource("node count overflow"))?;
    if total > cap {
        return Err(Error::resource(format!(
            "product rule would need {total} nodes (cap {cap}); switch to Monte Carlo"
        )));
    }
    let mut points = Vec::with_capacity(total * node_dim);
    let mut weights = Vec::with_capacity(total);
    for (zi, wi) in base.iter() {
        for (zj, wj) in base.iter() {
            points.extend_from_slice(zi);
            points.extend_from_slice(zj);
            weights.push(wi * wj);
        }
    }
    Ok(QuadratureRule {
        domain,
        weight_t: base.weight_t,
        node_dim,
        kind: RuleKind::Nodes { points, weights },
    })
}

/// Scrambled-Sobol equal-weight rule on `B_2 x B_2` (volume measure),
/// streaming and deterministic for a fixed seed.
pub fn mc_rule_ball2_pair(samples: usize, seed: u64) -> QuadratureRule {
    QuadratureRule {
        domain: Domain::Ball2Pair,
        weight_t: None,
        node_dim: 4,
        kind: RuleKind::SobolBall2Pair { samples, seed },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_rule_normalizes_and_moments() {
        for &t in &[0.0, 0.5, 2.0] {
            let rule = disk_rule(t, 24, 16);
            assert!((rule.total_weight() - 1.0).abs() < 1e-12);
            assert!(rule.weights_positive());
            // moment |z|^2 under lambda_t: B(2,t+1)/B(1,t+1) = 1/(t+2)
            let m = rule.integrate(|z| z[0].norm_sqr());
            assert!((m - 1.0 / (t + 2.0)).abs() < 1e-13, "t={t}: {m}");
        }
        // Lebesgue: area pi and ∫|z|^2 dm = pi/2
        let leb = disk_rule_lebesgue(16, 16);
        assert!((leb.total_weight() - std::f64::consts::PI).abs() < 1e-12);
        let m = leb.integrate(|z| z[0].norm_sqr());
        assert!((m - std::f64::consts::PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn disk_rule_polynomial_exactness() {
        let t = 1.5;
        let rule = disk_rule(t, 12, 24);
        for a in 0..10u32 {
            for b in 0..10u32 {
                let got = rule.integrate_c(|z| z[0].powu(a) * z[0].conj().powu(b));
                let want = if a == b {
                    // ||z^a||^2 = a! Gamma(2+t)/Gamma(2+t+a)
                    (statrs::function::gamma::ln_gamma(a as f64 + 1.0)
                        + statrs::function::gamma::ln_gamma(2.0 + t)
                        - statrs::function::gamma::ln_gamma(2.0 + t + a as f64))
                    .exp()
                } else {
                    0.0
                };
                assert!(
                    (got - C64::new(want, 0.0)).norm() < 1e-12,
                    "a={a} b={b}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn ball2_rule_normalizes_and_moments() {
        for &t in &[0.0, 1.0, 3.0] {
            let rule = ball2_rule(t, 12, 8, 12);
            assert!((rule.total_weight() - 1.0).abs() < 1e-12, "t={t}");
            // ||z1 z2||^2 = 1!1! Gamma(3+t)/Gamma(5+t)
            let got = rule.integrate(|z| (z[0] * z[1]).norm_sqr());
            let want = (statrs::function::gamma::ln_gamma(3.0 + t)
                - statrs::function::gamma::ln_gamma(5.0 + t))
            .exp();
            assert!((got - want).abs() < 1e-13, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn sphere_rule_examples() {
        // normalized average of 1 is 1
        for n in 1..=2usize {
            let rule = sphere_rule(n, 6, true).unwrap();
            assert!((rule.total_weight() - 1.0).abs() < 1e-12);
        }
        assert!(sphere_rule(3, 4, true).is_err());
        // n=2: ∫|zeta_1|^2 dsigma/sigma_3 = 1/2
        let rule = sphere_rule(2, 6, true).unwrap();
        let m = rule.integrate(|z| z[0].norm_sqr());
        assert!((m - 0.5).abs() < 1e-13);
        // zeta_1 conj(zeta_2): mismatched harmonics vanish
        let m = rule.integrate_c(|z| z[0] * z[1].conj());
        assert!(m.norm() < 1e-15);
        // moment formula |zeta^alpha|^2 -> alpha!(n-1)!/(n-1+|alpha|)!
        let m = rule.integrate(|z| (z[0] * z[1]).norm_sqr());
        assert!((m - 1.0 / 6.0).abs() < 1e-13, "got {m}");
    }

    #[test]
    fn product_rule_squares_and_caps() {
        let base = disk_rule(0.0, 6, 8);
        let prod = product_rule(&base, 10_000).unwrap();
        assert_eq!(prod.len(), base.len() * base.len());
        assert!((prod.total_weight() - 1.0).abs() < 1e-10);
        // separable integrand: ∫ (1-|z|^2)(1-|w|^2) dλ0(z) dλ0(w) = 1/4
        let v = prod.integrate(|zw| (1.0 - zw[0].norm_sqr()) * (1.0 - zw[1].norm_sqr()));
        assert!((v - 0.25).abs() < 1e-12);
        assert!(matches!(product_rule(&base, 10), Err(Error::Resource(_))));
    }

    #[test]
    fn sobol_ball_pair_volume_and_determinism() {
        let rule = mc_rule_ball2_pair(200_000, 42);
        let vol = rule.integrate_mc(|_| 1.0);
        let want = (std::f64::consts::PI.powi(2) / 2.0).powi(2);
        assert!((vol.value - want).abs() < 1e-9, "volume should be exact for f=1");
        // separable moment: ∫ |z_1|^2 over the pair = vol^2 * E[|z1|^2]
        // with E over uniform ball: ∫ |z1|^2 dm / vol = 1/3 (n=2 moment)
        let m = rule.integrate_mc(|zw| zw[0].norm_sqr());
        let exact = want / 3.0;
        assert!(
            (m.value - exact).abs() < 0.01 * exact,
            "rel err {} too big",
            ((m.value - exact) / exact).abs()
        );
        assert!(m.std_err > 0.0 && m.std_err < 0.01 * exact);
        let m2 = mc_rule_ball2_pair(200_000, 42).integrate_mc(|zw| zw[0].norm_sqr());
        assert_eq!(m.value.to_bits(), m2.value.to_bits(), "same seed, bit-identical");
        let m3 = mc_rule_ball2_pair(200_000, 43).integrate_mc(|zw| zw[0].norm_sqr());
        assert_ne!(m.value.to_bits(), m3.value.to_bits());
    }
}
