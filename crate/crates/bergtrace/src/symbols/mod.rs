//! Symbol algebra: exact polynomials in `z` and `conj(z)`, smooth bump
//! symbols with analytic derivatives, and combinators.

mod conditions;
mod parse;

pub use conditions::{condition_ratio, condition_sup_estimate, gradient_envelope, SupEstimate};
pub use parse::{parse_symbol, ParsedSymbol, SymbolSpec, TermSpec};

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

/// A multi-index in `N_0^n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `alpha! = prod alpha_i!`
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&k| statrs::function::gamma::ln_gamma(k as f64 + 1.0))
            .sum::<f64>()
            .exp()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut v = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            v.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(v))
    }

    /// Evaluate the monomial `z^self`.
    pub fn eval(&self, z: &[C64]) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for (zi, &k) in z.iter().zip(&self.0) {
            if k > 0 {
                acc *= zi.powu(k);
            }
        }
        acc
    }
}

/// Support descriptor of a symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Full,
    /// Contained in the closed ball of this radius (< 1).
    Compact(f64),
}

/// A function on the closed ball with first (and usually second mixed)
/// derivatives available.
pub trait Symbol: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, z: &[C64]) -> C64;

    /// Holomorphic gradient: `out[i] = d_i f(z)`.
    fn grad_holo(&self, z: &[C64], out: &mut [C64]);

    /// Anti-holomorphic gradient: `out[i] = dbar_i f(z)`.
    fn grad_anti(&self, z: &[C64], out: &mut [C64]);

    fn has_second(&self) -> bool {
        true
    }

    /// Mixed second partial `d_i dbar_j f(z)`.
    fn mixed_second(&self, z: &[C64], i: usize, j: usize) -> Result<C64>;

    /// Laplacian with the convention `Delta = 4 sum_i d_i dbar_i`.
    fn laplacian(&self, z: &[C64]) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            acc += self.mixed_second(z, i, i)?;
        }
        Ok(4.0 * acc)
    }

    fn support(&self) -> Support {
        Support::Full
    }
}

/// An exact polynomial `sum c_{ab} z^a conj(z)^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySymbol {
    n: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), C64>,
}

impl PolySymbol {
    pub fn zero(n: usize) -> Self {
        PolySymbol { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: C64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::zero(n), MultiIndex::zero(n), c);
        p
    }

    /// The monomial `c z^a conj(z)^b`.
    pub fn monomial(a: MultiIndex, b: MultiIndex, c: C64) -> Self {
        assert_eq!(a.dim(), b.dim());
        let mut p = Self::zero(a.dim());
        p.add_term(a, b, c);
        p
    }

    /// `z_i` as a polynomial.
    pub fn coordinate(n: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(n, i), MultiIndex::zero(n), C64::new(1.0, 0.0))
    }

    /// `conj(z_i)` as a polynomial.
    pub fn coordinate_bar(n: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::zero(n), MultiIndex::unit(n, i), C64::new(1.0, 0.0))
    }

    /// `|z|^2 = sum_i z_i conj(z_i)`.
    pub fn norm_squared(n: usize) -> Self {
        let mut p = Self::zero(n);
        for i in 0..n {
            p.add_term(MultiIndex::unit(n, i), MultiIndex::unit(n, i), C64::new(1.0, 0.0));
        }
        p
    }

    pub fn add_term(&mut self, a: MultiIndex, b: MultiIndex, c: C64) {
        let entry = self.terms.entry((a, b)).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() == 0.0 {
            // keep the map clean so bandwidth scans stay tight
            let key = self
                .terms
                .iter()
                .find(|(_, v)| v.norm() == 0.0)
                .map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, &C64)> {
        self.terms.iter().map(|((a, b), c)| (a, b, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|(a, b)| a.degree() == 0 && b.degree() == 0)
    }

    /// No `conj(z)` dependence in any term.
    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|(_, b)| b.degree() == 0)
    }

    pub fn plus(&self, other: &PolySymbol) -> PolySymbol {
        let mut out = self.clone();
        for ((a, b), c) in &other.terms {
            out.add_term(a.clone(), b.clone(), *c);
        }
        out
    }

    pub fn scaled(&self, c: C64) -> PolySymbol {
        let mut out = Self::zero(self.n);
        for ((a, b), v) in &self.terms {
            out.add_term(a.clone(), b.clone(), c * v);
        }
        out
    }

    pub fn times(&self, other: &PolySymbol) -> PolySymbol {
        let mut out = Self::zero(self.n);
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                out.add_term(a1.add(a2), b1.add(b2), c1 * c2);
            }
        }
        out
    }

    /// Complex conjugate: swaps `(a, b)` and conjugates coefficients.
    pub fn conj(&self) -> PolySymbol {
        let mut out = Self::zero(self.n);
        for ((a, b), c) in &self.terms {
            out.add_term(b.clone(), a.clone(), c.conj());
        }
        out
    }

    /// Exact derivative `d_i` (holomorphic) or `dbar_i` (anti).
    pub fn differentiate(&self, kind: DiffKind, i: usize) -> PolySymbol {
        let mut out = Self::zero(self.n);
        for ((a, b), c) in &self.terms {
            let (active, other) = match kind {
                DiffKind::Holo => (a, b),
                DiffKind::Anti => (b, a),
            };
            let k = active.0[i];
            if k == 0 {
                continue;
            }
            let mut lowered = active.clone();
            lowered.0[i] -= 1;
            let coeff = c * k as f64;
            match kind {
                DiffKind::Holo => out.add_term(lowered, other.clone(), coeff),
                DiffKind::Anti => out.add_term(other.clone(), lowered, coeff),
            }
        }
        out
    }

    /// `Delta f = 4 sum_i d_i dbar_i f`, exact.
    pub fn laplacian_poly(&self) -> PolySymbol {
        let mut out = Self::zero(self.n);
        for i in 0..self.n {
            let d = self.differentiate(DiffKind::Holo, i).differentiate(DiffKind::Anti, i);
            out = out.plus(&d);
        }
        out.scaled(C64::new(4.0, 0.0))
    }

    /// Substitute `z -> M z` for a linear map `M` (row-major n x n).
    pub fn compose_linear(&self, m: &[C64]) -> PolySymbol {
        let n = self.n;
        let mut out = Self::zero(n);
        for ((a, b), c) in &self.terms {
            let mut prod = Self::constant(n, *c);
            for i in 0..n {
                // (M z)_i and conj((M z)_i) as degree-1 polynomials
                let mut lin = Self::zero(n);
                let mut lin_bar = Self::zero(n);
                for j in 0..n {
                    lin.add_term(MultiIndex::unit(n, j), MultiIndex::zero(n), m[i * n + j]);
                    lin_bar.add_term(MultiIndex::zero(n), MultiIndex::unit(n, j), m[i * n + j].conj());
                }
                for _ in 0..a.0[i] {
                    prod = prod.times(&lin);
                }
                for _ in 0..b.0[i] {
                    prod = prod.times(&lin_bar);
                }
            }
            out = out.plus(&prod);
        }
        out
    }

    /// Coefficientwise comparison up to floating-point roundoff.
    pub fn approx_eq(&self, other: &PolySymbol, tol: f64) -> bool {
        let scale: f64 = self.terms.values().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        let keys: std::collections::BTreeSet<_> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().all(|k| {
            let a = self.terms.get(k).copied().unwrap_or(C64::new(0.0, 0.0));
            let b = other.terms.get(k).copied().unwrap_or(C64::new(0.0, 0.0));
            (a - b).norm() <= tol * scale
        })
    }

    /// Largest holomorphic/anti-holomorphic degree over all terms.
    pub fn max_degrees(&self) -> (u32, u32) {
        let mut da = 0;
        let mut db = 0;
        for (a, b) in self.terms.keys() {
            da = da.max(a.degree());
            db = db.max(b.degree());
        }
        (da, db)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffKind {
    Holo,
    Anti,
}

impl Symbol for PolySymbol {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, z: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let zbar: Vec<C64> = z.iter().map(|c| c.conj()).collect();
        for ((a, b), c) in &self.terms {
            acc += c * a.eval(z) * b.eval(&zbar);
        }
        acc
    }

    fn grad_holo(&self, z: &[C64], out: &mut [C64]) {
        let zbar: Vec<C64> = z.iter().map(|c| c.conj()).collect();
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for ((a, b), c) in &self.terms {
            let bv = b.eval(&zbar);
            for i in 0..self.n {
                let k = a.0[i];
                if k == 0 {
                    continue;
                }
                let mut lowered = a.clone();
                lowered.0[i] -= 1;
                out[i] += c * k as f64 * lowered.eval(z) * bv;
            }
        }
    }

    fn grad_anti(&self, z: &[C64], out: &mut [C64]) {
        let zbar: Vec<C64> = z.iter().map(|c| c.conj()).collect();
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for ((a, b), c) in &self.terms {
            let av = a.eval(z);
            for j in 0..self.n {
                let k = b.0[j];
                if k == 0 {
                    continue;
                }
                let mut lowered = b.clone();
                lowered.0[j] -= 1;
                out[j] += c * k as f64 * av * lowered.eval(&zbar);
            }
        }
    }

    fn mixed_second(&self, z: &[C64], i: usize, j: usize) -> Result<C64> {
        let zbar: Vec<C64> = z.iter().map(|c| c.conj()).collect();
        let mut acc = C64::new(0.0, 0.0);
        for ((a, b), c) in &self.terms {
            let (ka, kb) = (a.0[i], b.0[j]);
            if ka == 0 || kb == 0 {
                continue;
            }
            let mut la = a.clone();
            la.0[i] -= 1;
            let mut lb = b.clone();
            lb.0[j] -= 1;
            acc += c * (ka as f64 * kb as f64) * la.eval(z) * lb.eval(&zbar);
        }
        Ok(acc)
    }
}

type ValueFn = Arc<dyn Fn(&[C64]) -> C64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[C64], &mut [C64]) + Send + Sync>;
type MixedFn = Arc<dyn Fn(&[C64], usize, usize) -> C64 + Send + Sync>;

/// A smooth symbol given by callables for the value and its derivatives.
#[derive(Clone)]
pub struct SmoothSymbol {
    n: usize,
    value: ValueFn,
    holo: GradFn,
    anti: GradFn,
    mixed: Option<MixedFn>,
    support: Support,
}

impl Symbol for SmoothSymbol {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, z: &[C64]) -> C64 {
        (self.value)(z)
    }

    fn grad_holo(&self, z: &[C64], out: &mut [C64]) {
        (self.holo)(z, out)
    }

    fn grad_anti(&self, z: &[C64], out: &mut [C64]) {
        (self.anti)(z, out)
    }

    fn has_second(&self) -> bool {
        self.mixed.is_some()
    }

    fn mixed_second(&self, z: &[C64], i: usize, j: usize) -> Result<C64> {
        match &self.mixed {
            Some(m) => Ok(m(z, i, j)),
            None => Err(Error::unsupported("symbol has no second derivatives")),
        }
    }

    fn support(&self) -> Support {
        self.support
    }
}

/// Standard smooth bump `exp(1 - 1/(1 - |z-c|^2/r0^2))` on `|z-c| < r0`,
/// zero outside, with analytically coded derivatives.
pub fn bump(n: usize, center: &[C64], r0: f64) -> Result<SmoothSymbol> {
    if !(r0 > 0.0) {
        return Err(Error::domain("bump radius must be positive"));
    }
    let c_norm = crate::geometry::norm_sq(center).sqrt();
    if c_norm + r0 >= 1.0 {
        return Err(Error::domain("bump support must stay inside the open ball"));
    }
    let center: Vec<C64> = center.to_vec();
    let r2 = r0 * r0;
    // below this u the bump is < 1e-280; evaluating 1/u^4 there risks 0*inf
    const U_FLOOR: f64 = 1.5e-3;

    let geom = {
        let center = center.clone();
        move |z: &[C64]| -> Option<(f64, Vec<C64>)> {
            let mut q = 0.0;
            let mut dz = Vec::with_capacity(z.len());
            for (zi, ci) in z.iter().zip(&center) {
                let d = zi - ci;
                q += d.norm_sqr();
                dz.push(d);
            }
            let u = 1.0 - q / r2;
            if u <= U_FLOOR {
                None
            } else {
                Some((u, dz))
            }
        }
    };

    let g1 = geom.clone();
    let value: ValueFn = Arc::new(move |z| match g1(z) {
        Some((u, _)) => C64::new((1.0 - 1.0 / u).exp(), 0.0),
        None => C64::new(0.0, 0.0),
    });
    let g2 = geom.clone();
    let holo: GradFn = Arc::new(move |z, out| {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        if let Some((u, dz)) = g2(z) {
            let b = (1.0 - 1.0 / u).exp();
            for (o, d) in out.iter_mut().zip(&dz) {
                // d_i q = conj(z_i - c_i)/r0^2
                *o = -b / (u * u) * d.conj() / r2;
            }
        }
    });
    let g3 = geom.clone();
    let anti: GradFn = Arc::new(move |z, out| {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        if let Some((u, dz)) = g3(z) {
            let b = (1.0 - 1.0 / u).exp();
            for (o, d) in out.iter_mut().zip(&dz) {
                *o = -b / (u * u) * d / r2;
            }
        }
    });
    let g4 = geom;
    let mixed: MixedFn = Arc::new(move |z, i, j| match g4(z) {
        Some((u, dz)) => {
            let b = (1.0 - 1.0 / u).exp();
            let qi = dz[i].conj() / r2;
            let qj = dz[j] / r2;
            let kron = if i == j { 1.0 / r2 } else { 0.0 };
            C64::new(b, 0.0) * (qi * qj * (1.0 / u.powi(4) - 2.0 / u.powi(3)) - kron / (u * u))
        }
        None => C64::new(0.0, 0.0),
    });

    Ok(SmoothSymbol {
        n,
        value,
        holo,
        anti,
        mixed: Some(mixed),
        support: Support::Compact(c_norm + r0),
    })
}

/// The pair of the two-dimensional cone example: `f = psi(|z1|^2 - |z2|^2)`,
/// `g = psi(|z2|^2 - |z1|^2)` with `psi(s) = max(s,0)^{2+eps}/(2+eps)`.
///
/// These are C^1 but not C^2 across the cone, so no second derivatives.
pub fn example66_pair(epsilon: f64) -> Result<(SmoothSymbol, SmoothSymbol)> {
    if !(epsilon > 0.0) {
        return Err(Error::domain("epsilon must be positive"));
    }
    let make = move |sign: f64| -> SmoothSymbol {
        let psi = move |s: f64| {
            if s > 0.0 {
                s.powf(2.0 + epsilon) / (2.0 + epsilon)
            } else {
                0.0
            }
        };
        let dpsi = move |s: f64| if s > 0.0 { s.powf(1.0 + epsilon) } else { 0.0 };
        let h = move |z: &[C64]| sign * (z[0].norm_sqr() - z[1].norm_sqr());
        let value: ValueFn = Arc::new(move |z| C64::new(psi(h(z)), 0.0));
        let holo: GradFn = Arc::new(move |z, out| {
            let d = dpsi(h(z)) * sign;
            out[0] = d * z[0].conj();
            out[1] = -d * z[1].conj();
        });
        let anti: GradFn = Arc::new(move |z, out| {
            let d = dpsi(h(z)) * sign;
            out[0] = d * z[0];
            out[1] = -d * z[1];
        });
        SmoothSymbol { n: 2, value, holo, anti, mixed: None, support: Support::Full }
    };
    Ok((make(1.0), make(-1.0)))
}

/// Product of two symbols, derivatives by the product rule.
pub fn product(p: Arc<dyn Symbol>, q: Arc<dyn Symbol>) -> SmoothSymbol {
    assert_eq!(p.dim(), q.dim());
    let n = p.dim();
    let support = match (p.support(), q.support()) {
        (Support::Compact(a), Support::Compact(b)) => Support::Compact(a.min(b)),
        (Support::Compact(a), _) | (_, Support::Compact(a)) => Support::Compact(a),
        _ => Support::Full,
    };
    let has_second = p.has_second() && q.has_second();
    let (p1, q1) = (p.clone(), q.clone());
    let value: ValueFn = Arc::new(move |z| p1.eval(z) * q1.eval(z));
    let (p2, q2) = (p.clone(), q.clone());
    let holo: GradFn = Arc::new(move |z, out| {
        let mut gp = vec![C64::new(0.0, 0.0); out.len()];
        let mut gq = vec![C64::new(0.0, 0.0); out.len()];
        p2.grad_holo(z, &mut gp);
        q2.grad_holo(z, &mut gq);
        let (vp, vq) = (p2.eval(z), q2.eval(z));
        for i in 0..out.len() {
            out[i] = gp[i] * vq + vp * gq[i];
        }
    });
    let (p3, q3) = (p.clone(), q.clone());
    let anti: GradFn = Arc::new(move |z, out| {
        let mut gp = vec![C64::new(0.0, 0.0); out.len()];
        let mut gq = vec![C64::new(0.0, 0.0); out.len()];
        p3.grad_anti(z, &mut gp);
        q3.grad_anti(z, &mut gq);
        let (vp, vq) = (p3.eval(z), q3.eval(z));
        for i in 0..out.len() {
            out[i] = gp[i] * vq + vp * gq[i];
        }
    });
    let mixed: Option<MixedFn> = if has_second {
        let (p4, q4) = (p.clone(), q.clone());
        Some(Arc::new(move |z: &[C64], i: usize, j: usize| {
            let nn = p4.dim();
            let mut hp = vec![C64::new(0.0, 0.0); nn];
            let mut aq = vec![C64::new(0.0, 0.0); nn];
            let mut hq = vec![C64::new(0.0, 0.0); nn];
            let mut ap = vec![C64::new(0.0, 0.0); nn];
            p4.grad_holo(z, &mut hp);
            p4.grad_anti(z, &mut ap);
            q4.grad_holo(z, &mut hq);
            q4.grad_anti(z, &mut aq);
            let mpp = p4.mixed_second(z, i, j).expect("checked has_second");
            let mqq = q4.mixed_second(z, i, j).expect("checked has_second");
            mpp * q4.eval(z) + hp[i] * aq[j] + ap[j] * hq[i] + p4.eval(z) * mqq
        }))
    } else {
        None
    };
    SmoothSymbol { n, value, holo, anti, mixed, support }
}

/// Conjugate of a symbol as a symbol.
pub fn conj_symbol(f: Arc<dyn Symbol>) -> SmoothSymbol {
    let n = f.dim();
    let support = f.support();
    let has_second = f.has_second();
    let f1 = f.clone();
    let value: ValueFn = Arc::new(move |z| f1.eval(z).conj());
    let f2 = f.clone();
    let holo: GradFn = Arc::new(move |z, out| {
        f2.grad_anti(z, out);
        out.iter_mut().for_each(|o| *o = o.conj());
    });
    let f3 = f.clone();
    let anti: GradFn = Arc::new(move |z, out| {
        f3.grad_holo(z, out);
        out.iter_mut().for_each(|o| *o = o.conj());
    });
    let mixed: Option<MixedFn> = if has_second {
        let f4 = f.clone();
        Some(Arc::new(move |z: &[C64], i: usize, j: usize| {
            // d_i dbar_j conj(f) = conj(d_j dbar_i f)
            f4.mixed_second(z, j, i).expect("checked has_second").conj()
        }))
    } else {
        None
    };
    SmoothSymbol { n, value, holo, anti, mixed, support }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn fd_grad(f: &dyn Symbol, z: &[C64], i: usize, anti: bool) -> C64 {
        // centered differences in Re and Im of coordinate i
        let h = 1e-5;
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[i] += c(h, 0.0);
        zm[i] -= c(h, 0.0);
        let dre = (f.eval(&zp) - f.eval(&zm)) / (2.0 * h);
        zp = z.to_vec();
        zm = z.to_vec();
        zp[i] += c(0.0, h);
        zm[i] -= c(0.0, h);
        let dim = (f.eval(&zp) - f.eval(&zm)) / (2.0 * h);
        // d = (d/dx - i d/dy)/2, dbar = (d/dx + i d/dy)/2
        if anti {
            0.5 * (dre + c(0.0, 1.0) * dim)
        } else {
            0.5 * (dre - c(0.0, 1.0) * dim)
        }
    }

    #[test]
    fn differentiate_examples() {
        // d(z zbar)/dz = zbar at n=1
        let f = PolySymbol::norm_squared(1);
        let d = f.differentiate(DiffKind::Holo, 0);
        let want = PolySymbol::coordinate_bar(1, 0);
        assert_eq!(d, want);

        // dbar of a holomorphic polynomial is 0
        let h = PolySymbol::coordinate(1, 0).times(&PolySymbol::coordinate(1, 0));
        assert!(h.differentiate(DiffKind::Anti, 0).is_zero());

        // Delta(|z|^4) at z=0.5 equals 16|z|^2 = 4
        let f = PolySymbol::norm_squared(1).times(&PolySymbol::norm_squared(1));
        let lap = f.laplacian_poly();
        let z = [c(0.5, 0.0)];
        assert!((lap.eval(&z) - c(4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn poly_derivative_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut f = PolySymbol::zero(2);
        for _ in 0..6 {
            let a = MultiIndex(vec![rng.gen_range(0..3), rng.gen_range(0..3)]);
            let b = MultiIndex(vec![rng.gen_range(0..3), rng.gen_range(0..3)]);
            f.add_term(a, b, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        for _ in 0..100 {
            let z = [
                c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
                c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
            ];
            let mut g = [c(0.0, 0.0); 2];
            f.grad_holo(&z, &mut g);
            for i in 0..2 {
                let fd = fd_grad(&f, &z, i, false);
                assert!((g[i] - fd).norm() < 1e-6 * (1.0 + fd.norm()), "{:?} vs {:?}", g[i], fd);
            }
            f.grad_anti(&z, &mut g);
            for i in 0..2 {
                let fd = fd_grad(&f, &z, i, true);
                assert!((g[i] - fd).norm() < 1e-6 * (1.0 + fd.norm()));
            }
        }
    }

    #[test]
    fn conjugation_involution_and_product_rule() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rand_poly = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut f = PolySymbol::zero(2);
            for _ in 0..5 {
                let a = MultiIndex(vec![rng.gen_range(0..3), rng.gen_range(0..2)]);
                let b = MultiIndex(vec![rng.gen_range(0..2), rng.gen_range(0..3)]);
                f.add_term(a, b, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
            f
        };
        for _ in 0..20 {
            let f = rand_poly(&mut rng);
            let g = rand_poly(&mut rng);
            assert_eq!(f.conj().conj(), f);
            // coefficientwise product rule (roundoff-level tolerance only,
            // since the two routes associate the multiplications differently)
            let lhs = f.times(&g).differentiate(DiffKind::Holo, 0);
            let rhs = f
                .differentiate(DiffKind::Holo, 0)
                .times(&g)
                .plus(&f.times(&g.differentiate(DiffKind::Holo, 0)));
            assert!(lhs.approx_eq(&rhs, 1e-14));
        }
    }

    #[test]
    fn levi_of_norm_squared_is_identity() {
        // f = |z|^2: d_i dbar_j f = delta_ij, so L_z f(xi) = |xi|^2
        let f = PolySymbol::norm_squared(2);
        let z = [c(0.3, 0.1), c(-0.2, 0.4)];
        let xi = [c(0.7, -0.3), c(0.1, 0.9)];
        let l = crate::geometry::levi_form(&f, &crate::geometry::Point::new(z.to_vec()), &xi)
            .unwrap();
        let want: f64 = xi.iter().map(|v| v.norm_sqr()).sum();
        assert!((l - c(want, 0.0)).norm() < 1e-14);

        // holomorphic polynomial: Levi form vanishes
        let h = PolySymbol::coordinate(2, 0).times(&PolySymbol::coordinate(2, 1));
        let l = crate::geometry::levi_form(&h, &crate::geometry::Point::new(z.to_vec()), &xi)
            .unwrap();
        assert!(l.norm() < 1e-15);

        // f = |z1|^2 |z2|^2 at z=(0.5,0.5), xi=e_1: |z2|^2 = 0.25
        let f = PolySymbol::monomial(
            MultiIndex(vec![1, 1]),
            MultiIndex(vec![1, 1]),
            c(1.0, 0.0),
        );
        let z = crate::geometry::Point::from_re(&[0.5, 0.5]);
        let l = crate::geometry::levi_form(&f, &z, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((l - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let b = bump(2, &[c(0.1, 0.0), c(0.0, -0.1)], 0.6).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        while checked < 40 {
            let z = [
                c(rng.gen_range(-0.5..0.6), rng.gen_range(-0.5..0.5)),
                c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
            ];
            if b.eval(&z).norm() < 1e-3 {
                continue;
            }
            checked += 1;
            let mut g = [c(0.0, 0.0); 2];
            b.grad_holo(&z, &mut g);
            for i in 0..2 {
                let fd = fd_grad(&b, &z, i, false);
                assert!((g[i] - fd).norm() < 1e-4 * (1.0 + fd.norm()), "holo {:?} vs {:?}", g[i], fd);
            }
            b.grad_anti(&z, &mut g);
            for i in 0..2 {
                let fd = fd_grad(&b, &z, i, true);
                assert!((g[i] - fd).norm() < 1e-4 * (1.0 + fd.norm()));
            }
            // mixed second vs finite difference of the anti gradient
            for i in 0..2 {
                for j in 0..2 {
                    let h = 1e-5;
                    let (mut zp, mut zm) = (z, z);
                    zp[i] += c(h, 0.0);
                    zm[i] -= c(h, 0.0);
                    let mut gp = [c(0.0, 0.0); 2];
                    let mut gm = [c(0.0, 0.0); 2];
                    b.grad_anti(&zp, &mut gp);
                    b.grad_anti(&zm, &mut gm);
                    let d_re = (gp[j] - gm[j]) / (2.0 * h);
                    let (mut zp, mut zm) = (z, z);
                    zp[i] += c(0.0, h);
                    zm[i] -= c(0.0, h);
                    b.grad_anti(&zp, &mut gp);
                    b.grad_anti(&zm, &mut gm);
                    let d_im = (gp[j] - gm[j]) / (2.0 * h);
                    let fd = 0.5 * (d_re - c(0.0, 1.0) * d_im);
                    let got = b.mixed_second(&z, i, j).unwrap();
                    assert!((got - fd).norm() < 2e-4 * (1.0 + fd.norm()), "mixed {:?} vs {:?}", got, fd);
                }
            }
        }
    }

    #[test]
    fn example66_values_and_gradient() {
        let (f, g) = example66_pair(0.5).unwrap();
        // |z2| < |z1|: g and its gradient vanish
        let z = [c(0.8, 0.0), c(0.1, 0.0)];
        assert_eq!(g.eval(&z), c(0.0, 0.0));
        let mut grad = [c(0.0, 0.0); 2];
        g.grad_anti(&z, &mut grad);
        assert!(grad[0].norm() == 0.0 && grad[1].norm() == 0.0);
        // cone boundary: both vanish
        let z = [c(0.5, 0.0), c(0.5, 0.0)];
        assert_eq!(f.eval(&z), c(0.0, 0.0));
        assert_eq!(g.eval(&z), c(0.0, 0.0));
        // interior of f's cone: finite-difference gradient agreement
        let z = [c(0.6, 0.0), c(0.2, 0.0)];
        f.grad_holo(&z, &mut grad);
        for i in 0..2 {
            let fd = fd_grad(&f, &z, i, false);
            assert!((grad[i] - fd).norm() < 1e-4 * (1.0 + fd.norm()));
        }
        assert!(f.mixed_second(&z, 0, 0).is_err());
        assert!(example66_pair(0.0).is_err());
    }

    #[test]
    fn conj_combinator_consistent() {
        let b = bump(1, &[c(0.2, 0.1)], 0.5).unwrap();
        let cb = conj_symbol(Arc::new(b.clone()));
        let z = [c(0.25, 0.05)];
        assert!((cb.eval(&z) - b.eval(&z).conj()).norm() < 1e-15);
        let mut g1 = [c(0.0, 0.0)];
        let mut g2 = [c(0.0, 0.0)];
        cb.grad_holo(&z, &mut g1);
        b.grad_anti(&z, &mut g2);
        assert!((g1[0] - g2[0].conj()).norm() < 1e-15);
    }
}
