//! Geometry of the unit ball: Mobius transforms, reproducing kernels,
//! pseudo-hyperbolic metric, frame matrices and the weighted measure.
//!
//! Low-level routines operate on `&[Complex64]` slices so hot loops can
//! run allocation-free; [`Point`] is the owned wrapper used at API level.

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::symbols::Symbol;

/// Points closer to the sphere than this are rejected where the open
/// ball is required; kernel powers overflow beyond it.
pub const BOUNDARY_EPS: f64 = 1e-14;

/// Parameters `(n, t)` of the weighted Bergman space on the ball `B_n`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpaceParams {
    pub n: usize,
    pub t: f64,
}

impl SpaceParams {
    pub fn new(n: usize, t: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("dimension n must be >= 1"));
        }
        if !(t > -1.0) {
            return Err(Error::domain(format!("weight t must exceed -1, got {t}")));
        }
        Ok(SpaceParams { n, t })
    }

    /// Normalization `c_{n,t} = (n-1)! / (pi^n B(n, t+1))` making the
    /// weighted measure a probability measure.
    pub fn normalization(&self) -> f64 {
        let n = self.n as f64;
        (ln_gamma(n) - n * std::f64::consts::PI.ln() - ln_beta(n, self.t + 1.0)).exp()
    }

    /// Surface measure of the unit sphere, `sigma_{2n-1} = 2 pi^n / (n-1)!`.
    pub fn sphere_area(&self) -> f64 {
        let n = self.n as f64;
        2.0 * std::f64::consts::PI.powi(self.n as i32) / ln_gamma(n).exp()
    }

    /// Exponent `n + 1 + t` of the reproducing kernel.
    pub fn kernel_power(&self) -> f64 {
        self.n as f64 + 1.0 + self.t
    }
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn beta_fn(a: f64, b: f64) -> f64 {
    ln_beta(a, b).exp()
}

/// A point of the closed unit ball in `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<Complex64>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Point { coords }
    }

    pub fn from_re(re: &[f64]) -> Self {
        Point { coords: re.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn origin(n: usize) -> Self {
        Point { coords: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.coords)
    }
}

/// Hermitian inner product `<z, w> = sum z_i conj(w_i)`.
pub fn inner(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    debug_assert_eq!(z.len(), w.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (zi, wi) in z.iter().zip(w) {
        acc += zi * wi.conj();
    }
    acc
}

pub fn norm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

fn check_interior(z: &[Complex64], who: &str) -> Result<()> {
    if 1.0 - norm_sq(z) < BOUNDARY_EPS {
        return Err(Error::domain(format!("{who} must lie in the open ball")));
    }
    Ok(())
}

/// `phi_z(w)` written into `out`; slice form of [`mobius`].
pub fn mobius_into(z: &[Complex64], w: &[Complex64], out: &mut [Complex64]) {
    let zz = norm_sq(z);
    if zz == 0.0 {
        for (o, wi) in out.iter_mut().zip(w) {
            *o = -wi;
        }
        return;
    }
    let root = (1.0 - zz).sqrt();
    // P_z(w) = (<w,z>/|z|^2) z, Q_z(w) = w - P_z(w)
    let proj = inner(w, z) / zz;
    let denom = 1.0 - inner(w, z);
    for i in 0..z.len() {
        let p = proj * z[i];
        let q = w[i] - p;
        out[i] = (z[i] - p - root * q) / denom;
    }
}

/// The Mobius involution `phi_z(w)` exchanging `0` and `z`.
pub fn mobius(z: &Point, w: &Point) -> Result<Point> {
    check_interior(z.coords(), "base point z")?;
    let mut out = vec![Complex64::new(0.0, 0.0); z.dim()];
    mobius_into(z.coords(), w.coords(), &mut out);
    Ok(Point::new(out))
}

/// Pseudo-hyperbolic distance `|phi_z(w)|`, symmetric on the open ball.
pub fn pseudo_hyperbolic(z: &Point, w: &Point) -> Result<f64> {
    check_interior(z.coords(), "z")?;
    check_interior(w.coords(), "w")?;
    Ok(pseudo_hyperbolic_sq(z.coords(), w.coords()).sqrt())
}

/// `|phi_z(w)|^2` through the product identity
/// `1 - |phi_z(w)|^2 = (1-|z|^2)(1-|w|^2)/|1-<z,w>|^2`.
pub fn pseudo_hyperbolic_sq(z: &[Complex64], w: &[Complex64]) -> f64 {
    let num = (1.0 - norm_sq(z)) * (1.0 - norm_sq(w));
    let den = (Complex64::new(1.0, 0.0) - inner(z, w)).norm_sqr();
    (1.0 - num / den).clamp(0.0, 1.0)
}

/// Reproducing kernel `K_w(z) = (1 - <z,w>)^{-(n+1+t)}`, principal branch.
pub fn kernel(params: &SpaceParams, z: &Point, w: &Point) -> Result<Complex64> {
    let u = Complex64::new(1.0, 0.0) - inner(z.coords(), w.coords());
    if u.norm() < BOUNDARY_EPS {
        return Err(Error::domain("<z,w> = 1: kernel pole"));
    }
    Ok(u.powf(-params.kernel_power()))
}

/// The frame data of `phi_z`: the matrix `A_z` with
/// `z - phi_z(w) = A_z w / (1 - <w,z>)`, together with the projections.
#[derive(Clone, Debug)]
pub struct MobiusFrame {
    pub base: Point,
    /// `A_z = (1-|z|^2) P_z + sqrt(1-|z|^2) Q_z`, row-major n x n.
    pub a_matrix: Vec<Complex64>,
}

impl MobiusFrame {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// `A_z v`
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.a_matrix[i * n + j] * v[j];
            }
            out[i] = acc;
        }
    }

    /// Projection `P_z v` onto the complex line through `z` (zero if `z = 0`).
    pub fn project_line(&self, v: &[Complex64], out: &mut [Complex64]) {
        let z = self.base.coords();
        let zz = norm_sq(z);
        if zz == 0.0 {
            out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
            return;
        }
        let c = inner(v, z) / zz;
        for (o, zi) in out.iter_mut().zip(z) {
            *o = c * zi;
        }
    }
}

/// Frame of `phi_z` at an interior point.
pub fn frame(z: &Point) -> Result<MobiusFrame> {
    check_interior(z.coords(), "z")?;
    let n = z.dim();
    let zz = z.norm_sq();
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    let (cp, cq) = (1.0 - zz, (1.0 - zz).sqrt());
    for i in 0..n {
        for j in 0..n {
            // P_z has matrix z_i conj(z_j)/|z|^2; A_0 degenerates to identity
            let p = if zz == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                z.coords()[i] * z.coords()[j].conj() / zz
            };
            let q = if i == j { Complex64::new(1.0, 0.0) - p } else { -p };
            a[i * n + j] = cp * p + cq * q;
        }
    }
    Ok(MobiusFrame { base: z.clone(), a_matrix: a })
}

/// Density of the probability measure: `c_{n,t} (1-|z|^2)^t`.
pub fn measure_density(params: &SpaceParams, z: &Point) -> f64 {
    params.normalization() * (1.0 - z.norm_sq()).powf(params.t)
}

/// Levi form `L_z f (xi) = sum_{i,j} d_i dbar_j f(z) xi_i conj(xi_j)`.
pub fn levi_form(f: &dyn Symbol, z: &Point, xi: &[Complex64]) -> Result<Complex64> {
    let n = z.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += f.mixed_second(z.coords(), i, j)? * xi[i] * xi[j].conj();
        }
    }
    Ok(acc)
}

/// `d(z,w) = |1 - <z,w>|^{1/2}`; satisfies the triangle inequality on the
/// closed ball.
pub fn sqrt_metric(z: &[Complex64], w: &[Complex64]) -> f64 {
    (Complex64::new(1.0, 0.0) - inner(z, w)).norm().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mobius_at_origin_negates() {
        let z = Point::origin(1);
        let w = Point::new(vec![c(0.3, 0.1)]);
        let got = mobius(&z, &w).unwrap();
        assert!((got.coords()[0] - c(-0.3, -0.1)).norm() < 1e-15);
    }

    #[test]
    fn mobius_sends_base_to_zero_and_zero_to_base() {
        let z = Point::from_re(&[0.5]);
        assert!(mobius(&z, &z).unwrap().norm_sq() < 1e-28);
        let z2 = Point::from_re(&[0.5, 0.0]);
        let got = mobius(&z2, &Point::origin(2)).unwrap();
        assert!((got.coords()[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(got.coords()[1].norm() < 1e-15);
    }

    #[test]
    fn mobius_rejects_boundary_base() {
        let z = Point::from_re(&[1.0]);
        assert!(matches!(mobius(&z, &Point::origin(1)), Err(Error::Domain(_))));
    }

    #[test]
    fn pseudo_hyperbolic_examples() {
        let z = Point::origin(1);
        let w = Point::new(vec![c(0.2, -0.4)]);
        let d = pseudo_hyperbolic(&z, &w).unwrap();
        assert!((d - w.norm_sq().sqrt()).abs() < 1e-15);

        // |z-w| / |1 - z conj(w)| = 1/1.25 = 0.8
        let z = Point::from_re(&[0.5]);
        let w = Point::from_re(&[-0.5]);
        assert!((pseudo_hyperbolic(&z, &w).unwrap() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn kernel_examples() {
        let p = SpaceParams::new(1, 0.0).unwrap();
        let o = Point::origin(1);
        assert!((kernel(&p, &o, &o).unwrap() - c(1.0, 0.0)).norm() < 1e-15);

        let z = Point::from_re(&[0.5]);
        let k = kernel(&p, &z, &z).unwrap();
        assert!((k - c(16.0 / 9.0, 0.0)).norm() < 1e-14);

        // orthogonal points in B_2: <z,w> = 0 so the kernel is 1
        let p2 = SpaceParams::new(2, 1.0).unwrap();
        let z = Point::new(vec![c(0.5, 0.0), c(0.0, 0.0)]);
        let w = Point::new(vec![c(0.0, 0.0), c(0.5, 0.0)]);
        assert!((kernel(&p2, &z, &w).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn kernel_conjugate_symmetry() {
        let p = SpaceParams::new(2, 0.7).unwrap();
        let z = Point::new(vec![c(0.3, 0.2), c(-0.1, 0.4)]);
        let w = Point::new(vec![c(-0.5, 0.1), c(0.2, 0.2)]);
        let kzw = kernel(&p, &z, &w).unwrap();
        let kwz = kernel(&p, &w, &z).unwrap();
        assert!((kzw - kwz.conj()).norm() < 1e-12 * kzw.norm());
    }

    #[test]
    fn frame_examples() {
        // A_0 = I
        let f = frame(&Point::origin(2)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((f.a_matrix[i * 2 + j] - c(want, 0.0)).norm() < 1e-15);
            }
        }
        // n=1: scalar 1-|z|^2
        let f = frame(&Point::from_re(&[0.5])).unwrap();
        assert!((f.a_matrix[0] - c(0.75, 0.0)).norm() < 1e-15);
        // n=2, z on the first axis: diag(1-|z|^2, sqrt(1-|z|^2))
        let f = frame(&Point::from_re(&[0.6, 0.0])).unwrap();
        assert!((f.a_matrix[0] - c(0.64, 0.0)).norm() < 1e-15);
        assert!((f.a_matrix[3] - c(0.8, 0.0)).norm() < 1e-15);
        assert!(f.a_matrix[1].norm() < 1e-15 && f.a_matrix[2].norm() < 1e-15);
    }

    #[test]
    fn frame_reproduces_mobius_difference() {
        let z = Point::new(vec![c(0.4, 0.1), c(-0.2, 0.3)]);
        let w = Point::new(vec![c(0.1, -0.5), c(0.3, 0.2)]);
        let f = frame(&z).unwrap();
        let phi = mobius(&z, &w).unwrap();
        let mut aw = [c(0.0, 0.0); 2];
        f.apply(w.coords(), &mut aw);
        let denom = Complex64::new(1.0, 0.0) - inner(w.coords(), z.coords());
        for i in 0..2 {
            let lhs = z.coords()[i] - phi.coords()[i];
            let rhs = aw[i] / denom;
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn measure_density_examples() {
        let p = SpaceParams::new(1, 0.0).unwrap();
        let z = Point::from_re(&[0.3]);
        assert!((measure_density(&p, &z) - 1.0 / std::f64::consts::PI).abs() < 1e-15);

        let p = SpaceParams::new(1, 2.0).unwrap();
        assert!(
            (measure_density(&p, &Point::origin(1)) - 3.0 / std::f64::consts::PI).abs() < 1e-14
        );

        let p = SpaceParams::new(2, 0.0).unwrap();
        let want = 2.0 / std::f64::consts::PI.powi(2);
        assert!((measure_density(&p, &Point::origin(2)) - want).abs() < 1e-15);
    }

    #[test]
    fn mobius_involution_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = 1 + rng.gen_range(0..2usize);
            let rand_pt = |rng: &mut rand_chacha::ChaCha8Rng| {
                loop {
                    let v: Vec<Complex64> = (0..n)
                        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect();
                    if norm_sq(&v) < 0.98 {
                        return Point::new(v);
                    }
                }
            };
            let z = rand_pt(&mut rng);
            let w = rand_pt(&mut rng);
            let back = mobius(&z, &mobius(&z, &w).unwrap()).unwrap();
            let err: f64 = back
                .coords()
                .iter()
                .zip(w.coords())
                .map(|(a, b)| (a - b).norm())
                .sum();
            assert!(err < 1e-12, "involution error {err}");
        }
    }
}
