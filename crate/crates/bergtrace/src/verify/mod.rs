//! Both-sides verification: geometric right-hand sides of the trace
//! identities, operator left-hand sides, asymptotic scans, and reports.

mod lemmas;

pub use lemmas::{lemma_check, lemma_ids};

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, SpaceParams};
use crate::operators::{semicommutator_trace, SmoothBudget, SmoothToeplitzBuilder};
use crate::quadrature::reduce::pairwise_sum_c;
use crate::quadrature::{ball2_rule_lebesgue, disk_rule_lebesgue, mc_rule_ball2_pair};
use crate::specfun::{a_coeff, rho_ball_cache, rho_disk};
use crate::symbols::{condition_sup_estimate, ParsedSymbol, Support, Symbol};

type C64 = Complex64;
const PI: f64 = std::f64::consts::PI;

/// Node counts, sample counts, truncation degrees and caps for one run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Budgets {
    /// Outer disk rule (radial x angular) for single-domain integrals.
    pub disk_radial: usize,
    pub disk_angular: usize,
    /// Inner (Mobius-substituted) rule of the pair integrals.
    pub inner_radial: usize,
    pub inner_angular: usize,
    /// Two-ball single-domain rule (radial x polar x angular).
    pub ball_radial: usize,
    pub ball_polar: usize,
    pub ball_angular: usize,
    /// Sobol samples for the pair integral over the two-ball.
    pub mc_samples: usize,
    /// Degree cut of the operator trace sums.
    pub max_degree: u32,
    /// Tolerance passed to the tail extrapolation.
    pub trace_tol: f64,
    /// Quadrature for smooth-symbol matrix elements.
    pub smooth: SmoothBudget,
    /// Hard cap on tensor-product node counts.
    pub node_cap: usize,
    pub seed: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            disk_radial: 64,
            disk_angular: 128,
            inner_radial: 64,
            inner_angular: 128,
            ball_radial: 14,
            ball_polar: 10,
            ball_angular: 14,
            mc_samples: 1_000_000,
            max_degree: 4000,
            trace_tol: 1e-6,
            smooth: SmoothBudget::default(),
            node_cap: 200_000_000,
            seed: 20_240_601,
        }
    }
}

/// The two summands of a trace-formula right-hand side.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TermPair {
    pub wedge_term: C64,
    pub correction_term: C64,
    /// Reported Monte Carlo standard error of the correction term (zero
    /// for tensor rules).
    pub correction_std_err: f64,
}

impl TermPair {
    pub fn total(&self) -> C64 {
        self.wedge_term + self.correction_term
    }
}

/// Which encoding of the first term to use on the ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WedgeForm {
    /// The (n,n)-form coefficient of `df ^ dbar g ^ [d dbar log(1-|w|^2)]^{n-1}`.
    Wedge,
    /// The radial-derivative integrand
    /// `(sum_i d_i f dbar_i g - Rf conj(R)g) / (1-|w|^2)^n`.
    Radial,
}

/// One verified identity: left side, right side terms, pass/fail.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub params: serde_json::Value,
    pub lhs: C64,
    pub rhs_terms: Vec<C64>,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
    pub seed: u64,
    pub budgets: serde_json::Value,
    pub wall_time_ms: u64,
}

impl VerificationReport {
    pub fn build(
        check_id: &str,
        params: serde_json::Value,
        lhs: C64,
        rhs_terms: Vec<C64>,
        tol: f64,
        seed: u64,
        budgets: serde_json::Value,
        started: Instant,
    ) -> Self {
        let rhs_total = rhs_terms.iter().fold(C64::new(0.0, 0.0), |a, b| a + b);
        let abs_err = (lhs - rhs_total).norm();
        let scale = lhs.norm().max(rhs_total.norm());
        let rel_err = if scale > 0.0 { abs_err / scale } else { 0.0 };
        VerificationReport {
            check_id: check_id.to_string(),
            params,
            lhs,
            rhs_terms,
            abs_err,
            rel_err,
            tol,
            pass: abs_err <= tol,
            seed,
            budgets,
            wall_time_ms: started.elapsed().as_millis() as u64,
        }
    }

    pub fn human_line(&self) -> String {
        format!(
            "{:<12} {}  lhs={:+.9e}{:+.9e}i  rhs={}  abs_err={:.3e}  tol={:.1e}  [{} ms]",
            self.check_id,
            if self.pass { "PASS" } else { "FAIL" },
            self.lhs.re,
            self.lhs.im,
            self.rhs_terms
                .iter()
                .map(|t| format!("{:+.6e}{:+.6e}i", t.re, t.im))
                .collect::<Vec<_>>()
                .join(" + "),
            self.abs_err,
            self.tol,
            self.wall_time_ms
        )
    }
}

/// Laplacian evaluator: exact polynomial when available, callable otherwise.
enum Laplacian<'a> {
    Poly(crate::symbols::PolySymbol),
    Smooth(&'a dyn Symbol),
}

impl<'a> Laplacian<'a> {
    fn of(sym: &'a ParsedSymbol) -> Result<Self> {
        match sym {
            ParsedSymbol::Poly(p) => Ok(Laplacian::Poly(p.laplacian_poly())),
            ParsedSymbol::Smooth(s) => {
                if !s.has_second() {
                    return Err(Error::unsupported(
                        "correction term needs second derivatives of the symbol",
                    ));
                }
                Ok(Laplacian::Smooth(s))
            }
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Laplacian::Poly(p) if p.is_zero())
    }

    fn eval(&self, z: &[C64]) -> C64 {
        match self {
            Laplacian::Poly(p) => p.eval(z),
            Laplacian::Smooth(s) => s.laplacian(z).expect("has_second checked"),
        }
    }
}

/// Right-hand side of the disk identity: the wedge term
/// `(1/ 2 pi i) ∫ df ^ dbar g = -(1/pi) ∫ d f dbar g dm` and the
/// correction `∫∫ rho_t(|phi_z(w)|^2) Delta f(z) Delta g(w) dm(z,w)`,
/// the latter through the Mobius substitution `w = phi_z(zeta)` that
/// pins the density singularity at `zeta = 0`.
pub fn rhs_disk(
    t: f64,
    f: &ParsedSymbol,
    g: &ParsedSymbol,
    budgets: &Budgets,
) -> Result<TermPair> {
    if !(t > -1.0) {
        return Err(Error::domain("t must exceed -1"));
    }
    let fs = f.as_symbol();
    let gs = g.as_symbol();
    if fs.dim() != 1 || gs.dim() != 1 {
        return Err(Error::domain("disk right-hand side needs n = 1 symbols"));
    }
    let rule = disk_rule_lebesgue(budgets.disk_radial, budgets.disk_angular);
    let term1 = -rule.integrate_c(|z| {
        let mut df = [C64::new(0.0, 0.0)];
        let mut dg = [C64::new(0.0, 0.0)];
        fs.grad_holo(z, &mut df);
        gs.grad_anti(z, &mut dg);
        df[0] * dg[0]
    }) / PI;

    let lap_f = Laplacian::of(f)?;
    let lap_g = Laplacian::of(g)?;
    let term2 = if lap_f.is_zero() || lap_g.is_zero() {
        C64::new(0.0, 0.0)
    } else {
        let outer = disk_rule_lebesgue(budgets.disk_radial, budgets.disk_angular);
        let inner = disk_rule_lebesgue(budgets.inner_radial, budgets.inner_angular);
        let total_nodes = outer.len().checked_mul(inner.len()).unwrap_or(usize::MAX);
        if total_nodes > budgets.node_cap {
            return Err(Error::resource(format!(
                "pair quadrature needs {total_nodes} node pairs (cap {})",
                budgets.node_cap
            )));
        }
        // density values at the inner radii (exact per radius, memoized)
        let mut rho_at: HashMap<u64, f64> = HashMap::new();
        for (zeta, _) in inner.iter() {
            let s = zeta[0].norm_sqr();
            rho_at.entry(s.to_bits()).or_insert(rho_disk(t, s)?);
        }
        let inner_nodes: Vec<(C64, f64)> = inner
            .iter()
            .map(|(zeta, w)| (zeta[0], w * rho_at[&zeta[0].norm_sqr().to_bits()]))
            .collect();
        let outer_nodes: Vec<(C64, f64)> = outer.iter().map(|(z, w)| (z[0], w)).collect();
        let partials: Vec<C64> = outer_nodes
            .par_iter()
            .map(|&(z, wz)| {
                let lf = lap_f.eval(&[z]);
                if lf.norm() == 0.0 {
                    return C64::new(0.0, 0.0);
                }
                let eta = 1.0 - z.norm_sqr();
                let mut vals = Vec::with_capacity(inner_nodes.len());
                for &(zeta, wr) in &inner_nodes {
                    // phi_z(zeta) and the real Jacobian (1-|z|^2)^2/|1-<z,zeta>|^4
                    let denom = C64::new(1.0, 0.0) - zeta * z.conj();
                    let w_pt = (z - zeta) / denom;
                    let jac = (eta / denom.norm_sqr()).powi(2);
                    vals.push(wr * jac * lap_g.eval(&[w_pt]));
                }
                wz * lf * pairwise_sum_c(&vals)
            })
            .collect();
        pairwise_sum_c(&partials)
    };
    Ok(TermPair { wedge_term: term1, correction_term: term2, correction_std_err: 0.0 })
}

/// The Levi form `L_z f (z - w)` contracted along the chord.
fn levi_chord(f: &dyn Symbol, at: &[C64], z: &[C64], w: &[C64]) -> C64 {
    let n = f.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let h = f.mixed_second(at, i, j).expect("second derivatives checked");
            if h.norm() != 0.0 {
                acc += h * (z[i] - w[i]) * (z[j] - w[j]).conj();
            }
        }
    }
    acc
}

/// First-term integrand of the ball formula in the wedge encoding,
/// as a density against Lebesgue measure.
pub(crate) fn wedge_density(f: &dyn Symbol, g: &dyn Symbol, z: &[C64]) -> C64 {
    let n = f.dim();
    let mut df = vec![C64::new(0.0, 0.0); n];
    let mut dg = vec![C64::new(0.0, 0.0); n];
    f.grad_holo(z, &mut df);
    g.grad_anti(z, &mut dg);
    match n {
        1 => C64::new(0.0, -2.0) * df[0] * dg[0],
        2 => {
            let eta = 1.0 - geometry::norm_sq(z);
            let tmat = |i: usize, j: usize| -> C64 {
                let kron = if i == j { 1.0 / eta } else { 0.0 };
                -C64::new(kron, 0.0) - z[i].conj() * z[j] / (eta * eta)
            };
            // df ^ dbar g ^ T picks the complementary index pairs with the
            // permutation signs of dz1 dzbar1 dz2 dzbar2, times the volume
            // factor (-2i)^2 = -4
            -4.0 * (df[0] * dg[0] * tmat(1, 1) - df[0] * dg[1] * tmat(1, 0)
                - df[1] * dg[0] * tmat(0, 1)
                + df[1] * dg[1] * tmat(0, 0))
        }
        _ => unreachable!("ball formulas support n <= 2"),
    }
}

/// First-term integrand in the radial-derivative encoding (times the
/// constant `-(2i)^n (n-1)!`).
pub(crate) fn radial_density(f: &dyn Symbol, g: &dyn Symbol, z: &[C64]) -> C64 {
    let n = f.dim();
    let mut df = vec![C64::new(0.0, 0.0); n];
    let mut dg = vec![C64::new(0.0, 0.0); n];
    f.grad_holo(z, &mut df);
    g.grad_anti(z, &mut dg);
    let mut dot = C64::new(0.0, 0.0);
    let mut rf = C64::new(0.0, 0.0);
    let mut rg = C64::new(0.0, 0.0);
    for i in 0..n {
        dot += df[i] * dg[i];
        rf += z[i] * df[i];
        rg += z[i].conj() * dg[i];
    }
    let eta = 1.0 - geometry::norm_sq(z);
    // -(2i)^n (n-1)! for n = 1, 2
    let phase = match n {
        1 => C64::new(0.0, -2.0),
        2 => C64::new(4.0, 0.0),
        _ => unreachable!(),
    };
    phase * (dot - rf * rg) / eta.powi(n as i32)
}

fn support_radius(f: &dyn Symbol, g: &dyn Symbol) -> Option<f64> {
    match (f.support(), g.support()) {
        (Support::Compact(a), Support::Compact(b)) => Some(a.max(b)),
        (Support::Compact(a), Support::Full) | (Support::Full, Support::Compact(a)) => Some(a),
        _ => None,
    }
}

/// Right-hand side of the ball identity at `n = 1` or `n = 2`:
/// `a_{n,t} ∫ df ^ dbar g ^ [d dbar log(1-|w|^2)]^{n-1}` plus the
/// Levi-form pair integral against `rho_{n,t}`.
pub fn rhs_ball(
    n: usize,
    t: f64,
    f: &ParsedSymbol,
    g: &ParsedSymbol,
    budgets: &Budgets,
    form: WedgeForm,
) -> Result<TermPair> {
    if n != 1 && n != 2 {
        return Err(Error::unsupported("ball right-hand side supports n in {1, 2}"));
    }
    let fs = f.as_symbol();
    let gs = g.as_symbol();
    if fs.dim() != n || gs.dim() != n {
        return Err(Error::domain("symbol dimension mismatch"));
    }
    if !fs.has_second() || !gs.has_second() {
        return Err(Error::unsupported("ball formula needs C^2 symbols"));
    }
    if n == 2 {
        warn_if_conditions_fail(fs, gs, budgets.seed);
    }

    // first term: a_{n,t} * integral of the chosen encoding
    let a = a_coeff(n as u32, t)?;
    // compact supports let the rule stop at the support radius, where the
    // boundary-degenerate factors stay analytic
    let radius = support_radius(fs, gs).unwrap_or(1.0).min(1.0);
    let wedge_integral = match n {
        1 => {
            let rule = disk_rule_lebesgue(budgets.disk_radial, budgets.disk_angular);
            match form {
                WedgeForm::Wedge => rule.integrate_c(|z| wedge_density(fs, gs, z)),
                WedgeForm::Radial => rule.integrate_c(|z| radial_density(fs, gs, z)),
            }
        }
        _ => {
            let rule = ball2_rule_lebesgue(
                budgets.ball_radial,
                budgets.ball_polar,
                budgets.ball_angular,
                radius,
            );
            match form {
                WedgeForm::Wedge => rule.integrate_c(|z| wedge_density(fs, gs, z)),
                WedgeForm::Radial => rule.integrate_c(|z| radial_density(fs, gs, z)),
            }
        }
    };
    let term1 = a * wedge_integral;

    // second term: pair integral of the Levi forms against rho_{n,t}
    let (term2, std_err) = match n {
        1 => (ball_pair_term_disk(t, fs, gs, budgets)?, 0.0),
        _ => ball_pair_term_mc(t, fs, gs, budgets)?,
    };
    Ok(TermPair { wedge_term: term1, correction_term: term2, correction_std_err: std_err })
}

/// `n = 1` pair term by the same Mobius-substituted tensor quadrature as
/// the disk route, but with the general (Levi form / kernel power) densities.
fn ball_pair_term_disk(t: f64, f: &dyn Symbol, g: &dyn Symbol, budgets: &Budgets) -> Result<C64> {
    let outer = disk_rule_lebesgue(budgets.disk_radial, budgets.disk_angular);
    let inner = disk_rule_lebesgue(budgets.inner_radial, budgets.inner_angular);
    let mut rho_at: HashMap<u64, f64> = HashMap::new();
    for (zeta, _) in inner.iter() {
        let s = zeta[0].norm_sqr();
        rho_at
            .entry(s.to_bits())
            .or_insert(crate::specfun::rho_ball(1, t, s)?);
    }
    let inner_nodes: Vec<(C64, f64)> = inner
        .iter()
        .map(|(zeta, w)| (zeta[0], w * rho_at[&zeta[0].norm_sqr().to_bits()]))
        .collect();
    let outer_nodes: Vec<(C64, f64)> = outer.iter().map(|(z, w)| (z[0], w)).collect();
    let partials: Vec<C64> = outer_nodes
        .par_iter()
        .map(|&(z, wz)| {
            let eta = 1.0 - z.norm_sqr();
            let mut vals = Vec::with_capacity(inner_nodes.len());
            for &(zeta, wr) in &inner_nodes {
                let denom = C64::new(1.0, 0.0) - zeta * z.conj();
                let w_pt = (z - zeta) / denom;
                let jac = (eta / denom.norm_sqr()).powi(2);
                let kernel_pow = {
                    // |1 - <z, w>|^{2n+2} at w = phi_z(zeta): (1-|z|^2)/|1-<z,zeta>|
                    let m = eta / (C64::new(1.0, 0.0) - z * zeta.conj()).norm();
                    m.powi(4)
                };
                let za = [z];
                let wa = [w_pt];
                let lf = levi_chord(f, &za, &za, &wa);
                if lf.norm() == 0.0 {
                    vals.push(C64::new(0.0, 0.0));
                    continue;
                }
                let lg = levi_chord(g, &wa, &za, &wa);
                vals.push(wr * jac * lf * lg / kernel_pow);
            }
            wz * pairwise_sum_c(&vals)
        })
        .collect();
    Ok(pairwise_sum_c(&partials))
}

/// `n = 2` pair term by scrambled-Sobol Monte Carlo over `B_2 x B_2`.
fn ball_pair_term_mc(
    t: f64,
    f: &dyn Symbol,
    g: &dyn Symbol,
    budgets: &Budgets,
) -> Result<(C64, f64)> {
    let rho = Arc::new(rho_ball_cache(2, t)?);
    let rule = mc_rule_ball2_pair(budgets.mc_samples, budgets.seed);
    let (value, std_err) = rule.integrate_mc_c(move |zw| {
        let (z, w) = (&zw[..2], &zw[2..]);
        let lf = levi_chord(f, z, z, w);
        if lf.norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let lg = levi_chord(g, w, z, w);
        if lg.norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let s = geometry::pseudo_hyperbolic_sq(z, w);
        if s <= 0.0 || s >= 1.0 {
            return C64::new(0.0, 0.0);
        }
        let u = (C64::new(1.0, 0.0) - geometry::inner(z, w)).norm_sqr();
        rho.eval(s) * lf * lg / u.powi(3)
    });
    Ok((value, std_err))
}

fn warn_if_conditions_fail(f: &dyn Symbol, g: &dyn Symbol, seed: u64) {
    let order = if f.has_second() && g.has_second() { 2 } else { 1 };
    for ord in 1..=order {
        if let Ok(est) = condition_sup_estimate(f, g, 0.5, 2000, ord, 1e-4, seed) {
            if !est.sup.is_finite() || est.sup > 1e6 {
                eprintln!(
                    "warning: sampled condition-{ord} ratio looks unbounded (sup {:.3e}); \
                     the trace identity may not apply to this symbol pair",
                    est.sup
                );
            }
        }
    }
}

/// Left-hand side: the operator trace, exact diagonals for polynomial
/// pairs, quadrature-built truncated matrices otherwise.
pub fn operator_lhs(
    params: &SpaceParams,
    f: &ParsedSymbol,
    g: &ParsedSymbol,
    budgets: &Budgets,
) -> Result<(C64, f64)> {
    match (f, g) {
        (ParsedSymbol::Poly(fp), ParsedSymbol::Poly(gp)) => {
            let (tr, info) =
                semicommutator_trace(params, fp, gp, budgets.max_degree, budgets.trace_tol);
            Ok((tr, info.err_estimate))
        }
        _ => {
            let builder = SmoothToeplitzBuilder::new(params, budgets.max_degree, budgets.smooth)?;
            let t_f = builder.build(f.as_symbol(), "f")?;
            let t_g = builder.build(g.as_symbol(), "g")?;
            let prod = crate::symbols::product(f.as_arc(), g.as_arc());
            let t_fg = builder.build(&prod, "fg")?;
            let lhs = t_f.product(&t_g).trace() - t_fg.trace();
            Ok((lhs, f64::NAN))
        }
    }
}

/// Verify the trace identity for one symbol pair at the given tolerance.
pub fn verify_identity(
    params: &SpaceParams,
    f: &ParsedSymbol,
    g: &ParsedSymbol,
    budgets: &Budgets,
    tol: f64,
    check_id: &str,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let (lhs, _) = operator_lhs(params, f, g, budgets)?;
    let pair = match params.n {
        1 => rhs_disk(params.t, f, g, budgets)?,
        2 => rhs_ball(2, params.t, f, g, budgets, WedgeForm::Wedge)?,
        _ => return Err(Error::unsupported("verification supports n in {1, 2}")),
    };
    Ok(VerificationReport::build(
        check_id,
        serde_json::json!({"n": params.n, "t": params.t}),
        lhs,
        vec![pair.wedge_term, pair.correction_term],
        tol,
        budgets.seed,
        serde_json::to_value(budgets)?,
        started,
    ))
}

/// One row of an asymptotic scan in `t`.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub lhs: C64,
    pub term1: C64,
    pub term2: C64,
    pub term2_abs: f64,
    /// Log-log slope of `|term2|` vs `t` fitted over the rows so far
    /// (`None` until two rows exist).
    pub slope_running: Option<f64>,
}

/// Scan the identity over increasing weights and fit the decay rate of
/// the correction term.
pub fn scan_asymptotic(
    n: usize,
    t_list: &[f64],
    f: &ParsedSymbol,
    g: &ParsedSymbol,
    budgets: &Budgets,
) -> Result<Vec<ScanRow>> {
    if t_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("t list must be strictly increasing"));
    }
    let mut rows: Vec<ScanRow> = Vec::with_capacity(t_list.len());
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &t in t_list {
        let params = SpaceParams::new(n, t)?;
        let (lhs, _) = operator_lhs(&params, f, g, budgets)?;
        let pair = match n {
            1 => rhs_disk(t, f, g, budgets)?,
            _ => rhs_ball(n, t, f, g, budgets, WedgeForm::Wedge)?,
        };
        let term2_abs = pair.correction_term.norm();
        if term2_abs > 0.0 {
            pts.push((t.ln(), term2_abs.ln()));
        }
        let slope = fit_slope(&pts);
        rows.push(ScanRow {
            t,
            lhs,
            term1: pair.wedge_term,
            term2: pair.correction_term,
            term2_abs,
            slope_running: slope,
        });
    }
    Ok(rows)
}

fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    (den > 0.0).then(|| num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{parse_symbol, PolySymbol};

    fn sym(src: &str, n: usize) -> ParsedSymbol {
        parse_symbol(src, n).unwrap().build(n).unwrap()
    }

    fn quick_budgets() -> Budgets {
        Budgets {
            disk_radial: 48,
            disk_angular: 96,
            inner_radial: 48,
            inner_angular: 96,
            max_degree: 2000,
            ..Budgets::default()
        }
    }

    #[test]
    fn disk_rhs_harmonic_pair() {
        // f=z, g=zbar: term1 = -1 exactly, term2 = 0 exactly (poly path)
        let b = quick_budgets();
        let pair = rhs_disk(0.0, &sym("z", 1), &sym("zbar", 1), &b).unwrap();
        assert!((pair.wedge_term - C64::new(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(pair.correction_term, C64::new(0.0, 0.0));

        // f=zbar, g=z: term1 = 0 (d f = 0)
        let pair = rhs_disk(0.0, &sym("zbar", 1), &sym("z", 1), &b).unwrap();
        assert!(pair.wedge_term.norm() < 1e-14);
    }

    #[test]
    fn disk_rhs_norm_squared_pair() {
        let b = quick_budgets();
        let pair = rhs_disk(0.0, &sym("|z|^2", 1), &sym("|z|^2", 1), &b).unwrap();
        assert!(
            (pair.wedge_term - C64::new(-0.5, 0.0)).norm() < 1e-10,
            "term1 {}",
            pair.wedge_term
        );
        let want = PI * PI / 6.0 - 1.5;
        assert!(
            (pair.correction_term - C64::new(want, 0.0)).norm() < 1e-4,
            "term2 {} vs {}",
            pair.correction_term,
            want
        );
    }

    #[test]
    fn ball_rhs_reduces_to_disk_at_n1() {
        let b = quick_budgets();
        let f = sym("|z|^2", 1);
        let g = sym("|z|^2 + 0.5*z", 1);
        let disk = rhs_disk(1.5, &f, &g, &b).unwrap();
        for form in [WedgeForm::Wedge, WedgeForm::Radial] {
            let ball = rhs_ball(1, 1.5, &f, &g, &b, form).unwrap();
            assert!(
                (disk.wedge_term - ball.wedge_term).norm() < 1e-9,
                "{form:?}: {} vs {}",
                disk.wedge_term,
                ball.wedge_term
            );
            assert!(
                (disk.correction_term - ball.correction_term).norm()
                    < 1e-6 * disk.correction_term.norm().max(1e-4),
                "{form:?}: {} vs {}",
                disk.correction_term,
                ball.correction_term
            );
        }
    }

    #[test]
    fn verify_identity_disk_cases() {
        let params = SpaceParams::new(1, 0.0).unwrap();
        // the tail extrapolation error is ~2/max_degree^2, so the tight
        // tolerance cases need the full acceptance budget
        let b = Budgets { max_degree: 40_000, ..quick_budgets() };
        let rep = verify_identity(&params, &sym("z", 1), &sym("zbar", 1), &b, 1e-8, "z-zbar")
            .unwrap();
        assert!(rep.pass, "{}", rep.human_line());
        assert!((rep.lhs - C64::new(-1.0, 0.0)).norm() < 1e-8);

        let rep = verify_identity(&params, &sym("zbar", 1), &sym("z", 1), &b, 1e-9, "zbar-z")
            .unwrap();
        assert!(rep.pass && rep.lhs.norm() < 1e-10, "{}", rep.human_line());
    }

    #[test]
    fn degenerate_constant_symbols() {
        let params = SpaceParams::new(1, 0.5).unwrap();
        let b = quick_budgets();
        let one = ParsedSymbol::Poly(PolySymbol::constant(1, C64::new(2.0, 0.0)));
        let rep = verify_identity(&params, &one, &sym("|z|^2", 1), &b, 1e-10, "const").unwrap();
        assert_eq!(rep.lhs, C64::new(0.0, 0.0));
        for term in &rep.rhs_terms {
            assert!(term.norm() < 1e-10);
        }
        assert!(rep.pass);
    }

    #[test]
    fn correction_term_symmetric_in_symbols() {
        let b = quick_budgets();
        let f = sym("|z|^2 + 0.3*z + 0.1*zbar^2", 1);
        let g = sym("0.4*|z|^2 - 0.2*z", 1);
        let p1 = rhs_disk(0.7, &f, &g, &b).unwrap();
        let p2 = rhs_disk(0.7, &g, &f, &b).unwrap();
        assert!(
            (p1.correction_term - p2.correction_term).norm()
                < 1e-8 * p1.correction_term.norm().max(1e-10),
            "{} vs {}",
            p1.correction_term,
            p2.correction_term
        );
    }

    #[test]
    fn scan_slope_in_window() {
        let b = Budgets {
            disk_radial: 40,
            disk_angular: 64,
            inner_radial: 40,
            inner_angular: 64,
            max_degree: 2000,
            ..Budgets::default()
        };
        let f = sym("|z|^2", 1);
        let rows = scan_asymptotic(1, &[4.0, 8.0, 16.0, 32.0], &f, &f, &b).unwrap();
        for r in &rows {
            assert!((r.term1 - C64::new(-0.5, 0.0)).norm() < 1e-6 * 0.5);
        }
        for w in rows.windows(2) {
            assert!(w[1].term2_abs < w[0].term2_abs, "term2 must decrease");
        }
        let slope = rows.last().unwrap().slope_running.unwrap();
        assert!((-1.3..=-0.8).contains(&slope), "slope {slope}");
    }
}
