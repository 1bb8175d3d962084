//! Quadrature-built Toeplitz matrices for smooth symbols on the disk and
//! the two-ball.
//!
//! The basis is monomial, so every matrix element is a weighted moment
//! `∫ f z^beta conj(z)^gamma dlambda_t`. On the tensor grid
//! `(r, psi, phi_1, phi_2)` the monomial factors separate into radial and
//! polar powers times angular harmonics, so the angular sums of `f` are
//! precomputed once per Fourier mode and every element becomes a short
//! weighted sum over `(r, psi)`. Node counts scale with the symbol
//! support; compactly supported symbols are integrated only over their
//! support, which keeps the weight factor analytic.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::SpaceParams;
use crate::operators::{monomial_norm_sq, BasisIndexer, TruncatedOperator};
use crate::quadrature::gauss;
use crate::symbols::{Support, Symbol};

type C64 = Complex64;

/// Node counts for the smooth-symbol quadrature.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct SmoothBudget {
    pub n_radial: usize,
    pub n_polar: usize,
    pub n_angular: usize,
}

impl Default for SmoothBudget {
    fn default() -> Self {
        SmoothBudget { n_radial: 48, n_polar: 48, n_angular: 0 }
    }
}

pub struct SmoothToeplitzBuilder {
    params: SpaceParams,
    indexer: BasisIndexer,
    budget: SmoothBudget,
}

impl SmoothToeplitzBuilder {
    pub fn new(params: &SpaceParams, max_degree: u32, budget: SmoothBudget) -> Result<Self> {
        if params.n > 2 {
            return Err(Error::unsupported("smooth Toeplitz matrices need n <= 2"));
        }
        Ok(SmoothToeplitzBuilder {
            params: *params,
            indexer: BasisIndexer::new(params.n, max_degree),
            budget,
        })
    }

    pub fn indexer(&self) -> &BasisIndexer {
        &self.indexer
    }

    fn angular_count(&self) -> usize {
        if self.budget.n_angular > 0 {
            self.budget.n_angular
        } else {
            (2 * self.indexer.max_degree() as usize + 24).next_power_of_two()
        }
    }

    fn support_radius(&self, f: &dyn Symbol) -> f64 {
        match f.support() {
            Support::Compact(r) => r.min(1.0),
            Support::Full => 1.0,
        }
    }

    /// Build the truncated Toeplitz matrix of `f` by quadrature.
    pub fn build(&self, f: &dyn Symbol, desc: &str) -> Result<TruncatedOperator> {
        if f.dim() != self.params.n {
            return Err(Error::domain("symbol dimension mismatch"));
        }
        match self.params.n {
            1 => self.build_disk(f, desc),
            2 => self.build_ball(f, desc),
            _ => unreachable!(),
        }
    }

    fn build_disk(&self, f: &dyn Symbol, desc: &str) -> Result<TruncatedOperator> {
        let nn = self.indexer.max_degree() as usize;
        let n_phi = self.angular_count();
        let radius = self.support_radius(f);
        let t = self.params.t;
        // For full-support symbols the radial weight (1-r^2)^t is kept in
        // the integrand; Jacobi folding in s = r^2 handles the endpoint.
        let (r_nodes, r_factors) = if radius < 1.0 {
            let (x, w) = gauss::gauss_legendre_on(self.budget.n_radial, 0.0, radius);
            let f: Vec<f64> = x
                .iter()
                .zip(&w)
                .map(|(r, wr)| wr * r * (1.0 - r * r).powf(t))
                .collect();
            (x, f)
        } else {
            // s = r^2 with weight (1-s)^t: dm radial part r dr = ds/2
            let (s, w) = gauss::gauss_unit_jacobi(self.budget.n_radial, t, 0.0);
            let x: Vec<f64> = s.iter().map(|si| si.sqrt()).collect();
            let f: Vec<f64> = w.iter().map(|wi| 0.5 * wi).collect();
            (x, f)
        };
        let n_r = r_nodes.len();
        // Fourier modes of f on each radius: modes -N..N
        let modes = 2 * nn + 1;
        let mut table = vec![C64::new(0.0, 0.0); modes * n_r];
        let dphi = std::f64::consts::TAU / n_phi as f64;
        let rows: Vec<Vec<C64>> = (0..n_r)
            .into_par_iter()
            .map(|ir| {
                let r = r_nodes[ir];
                let vals: Vec<C64> = (0..n_phi)
                    .map(|j| {
                        let (s, c) = (dphi * j as f64).sin_cos();
                        f.eval(&[C64::new(r * c, r * s)])
                    })
                    .collect();
                let mut row = vec![C64::new(0.0, 0.0); modes];
                for (a_idx, slot) in row.iter_mut().enumerate() {
                    let a = a_idx as i64 - nn as i64;
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, v) in vals.iter().enumerate() {
                        let th = a as f64 * dphi * j as f64;
                        acc += v * C64::new(th.cos(), th.sin());
                    }
                    *slot = acc * dphi;
                }
                row
            })
            .collect();
        for (ir, row) in rows.into_iter().enumerate() {
            for (a_idx, v) in row.into_iter().enumerate() {
                table[a_idx * n_r + ir] = v;
            }
        }
        // power table r^p for p <= 2N
        let mut rpow = vec![1.0; n_r * (2 * nn + 1)];
        for ir in 0..n_r {
            for p in 1..=2 * nn {
                rpow[p * n_r + ir] = rpow[(p - 1) * n_r + ir] * r_nodes[ir];
            }
        }
        let cnorm = self.params.normalization();
        let dim = self.indexer.dim();
        let entries: Vec<C64> = (0..dim * dim)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / dim, idx % dim);
                let gamma = self.indexer.at(i).0[0] as usize;
                let beta = self.indexer.at(j).0[0] as usize;
                let a_idx = (beta as i64 - gamma as i64 + nn as i64) as usize;
                let mut acc = C64::new(0.0, 0.0);
                let p = beta + gamma;
                for ir in 0..n_r {
                    acc += r_factors[ir] * rpow[p * n_r + ir] * table[a_idx * n_r + ir];
                }
                let norm = (monomial_norm_sq(&self.params, self.indexer.at(j))
                    * monomial_norm_sq(&self.params, self.indexer.at(i)))
                .sqrt();
                acc * cnorm / norm
            })
            .collect();
        let matrix = Array2::from_shape_vec((dim, dim), entries).expect("shape");
        Ok(TruncatedOperator {
            indexer: self.indexer.clone(),
            matrix,
            params: self.params,
            symbol_desc: desc.to_string(),
        })
    }

    fn build_ball(&self, f: &dyn Symbol, desc: &str) -> Result<TruncatedOperator> {
        let nn = self.indexer.max_degree() as usize;
        let n_phi = self.angular_count();
        let radius = self.support_radius(f);
        let t = self.params.t;
        let (r_nodes, r_factors): (Vec<f64>, Vec<f64>) = {
            let (x, w) = gauss::gauss_legendre_on(self.budget.n_radial, 0.0, radius);
            let fac: Vec<f64> = x
                .iter()
                .zip(&w)
                .map(|(r, wr)| wr * r.powi(3) * (1.0 - r * r).powf(t))
                .collect();
            (x, fac)
        };
        let (psi_nodes, psi_factors): (Vec<f64>, Vec<f64>) = {
            let (x, w) = gauss::gauss_legendre_on(self.budget.n_polar, 0.0, std::f64::consts::FRAC_PI_2);
            let fac: Vec<f64> = x.iter().zip(&w).map(|(p, wp)| wp * p.cos() * p.sin()).collect();
            (x, fac)
        };
        let (n_r, n_psi) = (r_nodes.len(), psi_nodes.len());
        let modes = 2 * nn + 1;
        let dphi = std::f64::consts::TAU / n_phi as f64;

        // angular Fourier sums of f per (r, psi) grid point
        let table: Vec<Vec<C64>> = (0..n_r * n_psi)
            .into_par_iter()
            .map(|g| {
                let (ir, ip) = (g / n_psi, g % n_psi);
                let r = r_nodes[ir];
                let (r1, r2) = (r * psi_nodes[ip].cos(), r * psi_nodes[ip].sin());
                // sample f on the phi torus
                let mut vals = vec![C64::new(0.0, 0.0); n_phi * n_phi];
                for j1 in 0..n_phi {
                    let (s1, c1) = (dphi * j1 as f64).sin_cos();
                    let z1 = C64::new(r1 * c1, r1 * s1);
                    for j2 in 0..n_phi {
                        let (s2, c2) = (dphi * j2 as f64).sin_cos();
                        vals[j1 * n_phi + j2] = f.eval(&[z1, C64::new(r2 * c2, r2 * s2)]);
                    }
                }
                // separable DFT: first phi_2, then phi_1
                let mut half = vec![C64::new(0.0, 0.0); n_phi * modes];
                for j1 in 0..n_phi {
                    for (b_idx, slot) in half[j1 * modes..(j1 + 1) * modes].iter_mut().enumerate() {
                        let b = b_idx as i64 - nn as i64;
                        let mut acc = C64::new(0.0, 0.0);
                        for j2 in 0..n_phi {
                            let th = b as f64 * dphi * j2 as f64;
                            acc += vals[j1 * n_phi + j2] * C64::new(th.cos(), th.sin());
                        }
                        *slot = acc;
                    }
                }
                let mut out = vec![C64::new(0.0, 0.0); modes * modes];
                for a_idx in 0..modes {
                    let a = a_idx as i64 - nn as i64;
                    for b_idx in 0..modes {
                        let mut acc = C64::new(0.0, 0.0);
                        for j1 in 0..n_phi {
                            let th = a as f64 * dphi * j1 as f64;
                            acc += half[j1 * modes + b_idx] * C64::new(th.cos(), th.sin());
                        }
                        out[a_idx * modes + b_idx] = acc * (dphi * dphi);
                    }
                }
                out
            })
            .collect();

        // re-layout: mode-major with contiguous (r, psi) blocks
        let grid = n_r * n_psi;
        let mut mode_table = vec![C64::new(0.0, 0.0); modes * modes * grid];
        for (g, block) in table.iter().enumerate() {
            for m in 0..modes * modes {
                mode_table[m * grid + g] = block[m];
            }
        }

        // power tables
        let max_p = 2 * nn;
        let mut rpow = vec![1.0; (max_p + 1) * n_r];
        for ir in 0..n_r {
            for p in 1..=max_p {
                rpow[p * n_r + ir] = rpow[(p - 1) * n_r + ir] * r_nodes[ir];
            }
        }
        let mut cpow = vec![1.0; (max_p + 1) * n_psi];
        let mut spow = vec![1.0; (max_p + 1) * n_psi];
        for ip in 0..n_psi {
            for p in 1..=max_p {
                cpow[p * n_psi + ip] = cpow[(p - 1) * n_psi + ip] * psi_nodes[ip].cos();
                spow[p * n_psi + ip] = spow[(p - 1) * n_psi + ip] * psi_nodes[ip].sin();
            }
        }

        let cnorm = self.params.normalization();
        let dim = self.indexer.dim();
        let entries: Vec<C64> = (0..dim * dim)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / dim, idx % dim);
                let gamma = self.indexer.at(i);
                let beta = self.indexer.at(j);
                let (b1, b2) = (beta.0[0] as usize, beta.0[1] as usize);
                let (g1, g2) = (gamma.0[0] as usize, gamma.0[1] as usize);
                let a_idx = (b1 as i64 - g1 as i64 + nn as i64) as usize;
                let b_idx = (b2 as i64 - g2 as i64 + nn as i64) as usize;
                let block = &mode_table[(a_idx * modes + b_idx) * grid..(a_idx * modes + b_idx + 1) * grid];
                let p_r = b1 + b2 + g1 + g2;
                let p_c = b1 + g1;
                let p_s = b2 + g2;
                let mut acc = C64::new(0.0, 0.0);
                for ir in 0..n_r {
                    let rf = r_factors[ir] * rpow[p_r * n_r + ir];
                    let mut inner = C64::new(0.0, 0.0);
                    for ip in 0..n_psi {
                        inner += psi_factors[ip]
                            * cpow[p_c * n_psi + ip]
                            * spow[p_s * n_psi + ip]
                            * block[ir * n_psi + ip];
                    }
                    acc += rf * inner;
                }
                let norm = (monomial_norm_sq(&self.params, beta)
                    * monomial_norm_sq(&self.params, gamma))
                .sqrt();
                acc * cnorm / norm
            })
            .collect();
        let matrix = Array2::from_shape_vec((dim, dim), entries).expect("shape");
        Ok(TruncatedOperator {
            indexer: self.indexer.clone(),
            matrix,
            params: self.params,
            symbol_desc: desc.to_string(),
        })
    }
}
