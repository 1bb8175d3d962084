//! Symbol specifications: the command-line micro-syntax and the JSON
//! term-list form used in config files.
//!
//! Grammar of the micro-syntax (whitespace ignored, `*` mandatory):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := NUMBER | 'i' | var
//! var     := 'z' DIGIT? 'bar'? ('^' UINT)?  |  '|z' DIGIT? '|^2'
//! ```
//!
//! `z` and `zbar` without an axis digit refer to the sole coordinate when
//! `n = 1`; `|z|^2` means `sum_i |z_i|^2`. Smooth symbols use the template
//! forms `bump:r0=0.6[,c1=0.1,c2=-0.1,...]` (real center offsets per axis)
//! and `ex66:eps=0.5,side=f|g`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::{bump, example66_pair, MultiIndex, PolySymbol, SmoothSymbol};

type C64 = Complex64;

/// One monomial `c z^a conj(z)^b` in the JSON term-list form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermSpec {
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// A serializable symbol description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolSpec {
    Poly { terms: Vec<TermSpec> },
    Bump { r0: f64, #[serde(default)] center: Vec<f64> },
    Ex66 { eps: f64, side: String },
}

/// A parsed symbol: either exact polynomial or smooth-callable.
#[derive(Clone)]
pub enum ParsedSymbol {
    Poly(PolySymbol),
    Smooth(SmoothSymbol),
}

impl ParsedSymbol {
    pub fn as_symbol(&self) -> &dyn crate::symbols::Symbol {
        match self {
            ParsedSymbol::Poly(p) => p,
            ParsedSymbol::Smooth(s) => s,
        }
    }

    pub fn as_arc(&self) -> std::sync::Arc<dyn crate::symbols::Symbol> {
        match self {
            ParsedSymbol::Poly(p) => std::sync::Arc::new(p.clone()),
            ParsedSymbol::Smooth(s) => std::sync::Arc::new(s.clone()),
        }
    }

    pub fn poly(&self) -> Option<&PolySymbol> {
        match self {
            ParsedSymbol::Poly(p) => Some(p),
            ParsedSymbol::Smooth(_) => None,
        }
    }
}

impl SymbolSpec {
    pub fn build(&self, n: usize) -> Result<ParsedSymbol> {
        match self {
            SymbolSpec::Poly { terms } => {
                let mut p = PolySymbol::zero(n);
                for t in terms {
                    if t.a.len() != n || t.b.len() != n {
                        return Err(Error::bad_config(format!(
                            "term multi-index length must be n={n}"
                        )));
                    }
                    p.add_term(
                        MultiIndex(t.a.clone()),
                        MultiIndex(t.b.clone()),
                        C64::new(t.re, t.im),
                    );
                }
                Ok(ParsedSymbol::Poly(p))
            }
            SymbolSpec::Bump { r0, center } => {
                let mut c = vec![C64::new(0.0, 0.0); n];
                for (i, &x) in center.iter().enumerate() {
                    if i >= n {
                        return Err(Error::bad_config("bump center has too many entries"));
                    }
                    c[i] = C64::new(x, 0.0);
                }
                Ok(ParsedSymbol::Smooth(bump(n, &c, *r0)?))
            }
            SymbolSpec::Ex66 { eps, side } => {
                if n != 2 {
                    return Err(Error::bad_config("ex66 symbols require n = 2"));
                }
                let (f, g) = example66_pair(*eps)?;
                match side.as_str() {
                    "f" => Ok(ParsedSymbol::Smooth(f)),
                    "g" => Ok(ParsedSymbol::Smooth(g)),
                    s => Err(Error::bad_config(format!("ex66 side must be f or g, got {s}"))),
                }
            }
        }
    }
}

/// Parse the command-line micro-syntax into a [`SymbolSpec`].
pub fn parse_symbol(src: &str, n: usize) -> Result<SymbolSpec> {
    let src = src.trim();
    if let Some(rest) = src.strip_prefix("bump:") {
        return parse_bump(rest);
    }
    if let Some(rest) = src.strip_prefix("ex66:") {
        return parse_ex66(rest);
    }
    if src.starts_with('{') || src.starts_with('[') {
        let terms: Vec<TermSpec> = serde_json::from_str(src)?;
        return Ok(SymbolSpec::Poly { terms });
    }
    parse_poly_expr(src, n)
}

fn parse_bump(rest: &str) -> Result<SymbolSpec> {
    let mut r0 = None;
    let mut center: Vec<(usize, f64)> = Vec::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| Error::bad_config(format!("bump parameter `{part}` needs `=`")))?;
        let v: f64 = val
            .parse()
            .map_err(|_| Error::bad_config(format!("bad number `{val}` in bump spec")))?;
        if key == "r0" {
            r0 = Some(v);
        } else if let Some(axis) = key.strip_prefix('c') {
            let idx: usize = axis
                .parse()
                .map_err(|_| Error::bad_config(format!("bad bump center key `{key}`")))?;
            if idx == 0 {
                return Err(Error::bad_config("bump center axes are 1-based (c1, c2, ...)"));
            }
            center.push((idx - 1, v));
        } else {
            return Err(Error::bad_config(format!("unknown bump parameter `{key}`")));
        }
    }
    let r0 = r0.ok_or_else(|| Error::bad_config("bump spec requires r0"))?;
    let max_axis = center.iter().map(|(i, _)| i + 1).max().unwrap_or(0);
    let mut cv = vec![0.0; max_axis];
    for (i, v) in center {
        cv[i] = v;
    }
    Ok(SymbolSpec::Bump { r0, center: cv })
}

fn parse_ex66(rest: &str) -> Result<SymbolSpec> {
    let mut eps = None;
    let mut side = None;
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| Error::bad_config(format!("ex66 parameter `{part}` needs `=`")))?;
        match key {
            "eps" => {
                eps = Some(val.parse().map_err(|_| Error::bad_config("bad ex66 eps"))?);
            }
            "side" => side = Some(val.to_string()),
            k => return Err(Error::bad_config(format!("unknown ex66 parameter `{k}`"))),
        }
    }
    Ok(SymbolSpec::Ex66 {
        eps: eps.ok_or_else(|| Error::bad_config("ex66 spec requires eps"))?,
        side: side.ok_or_else(|| Error::bad_config("ex66 spec requires side=f|g"))?,
    })
}

fn parse_poly_expr(src: &str, n: usize) -> Result<SymbolSpec> {
    let mut terms = Vec::new();
    let mut rest = src;
    let mut sign = 1.0;
    loop {
        let (term_str, next) = split_top(rest);
        let term = parse_poly_term(term_str.trim(), n)?;
        for mut t in term {
            t.re *= sign;
            t.im *= sign;
            terms.push(t);
        }
        match next {
            Some(('+', r)) => {
                sign = 1.0;
                rest = r;
            }
            Some(('-', r)) => {
                sign = -1.0;
                rest = r;
            }
            None => break,
            _ => unreachable!(),
        }
    }
    Ok(SymbolSpec::Poly { terms })
}

/// Split at the first top-level `+`/`-` that is not a leading sign or an
/// exponent sign.
fn split_top(s: &str) -> (&str, Option<(char, &str)>) {
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if (ch == '+' || ch == '-') && i > 0 {
            let prev = bytes[i - 1] as char;
            if prev != '^' && prev != 'e' && prev != 'E' && prev != '*' {
                return (&s[..i], Some((ch, &s[i + 1..])));
            }
        }
        i += 1;
    }
    (s, None)
}

fn parse_poly_term(src: &str, n: usize) -> Result<Vec<TermSpec>> {
    let mut coeff = C64::new(1.0, 0.0);
    // |z|^2 expands to a sum, handled by accumulating partial products
    let mut expanded: Vec<(Vec<u32>, Vec<u32>)> = vec![(vec![0u32; n], vec![0u32; n])];

    let src = src.trim();
    let neg = src.starts_with('-');
    let src = src.trim_start_matches(['-', '+']);
    if neg {
        coeff = -coeff;
    }
    if src.is_empty() {
        return Err(Error::bad_config("empty symbol term"));
    }

    for factor in src.split('*').map(str::trim) {
        if factor.is_empty() {
            return Err(Error::bad_config("empty factor (stray `*`)"));
        }
        if factor == "i" {
            coeff *= C64::new(0.0, 1.0);
            continue;
        }
        if let Ok(x) = factor.parse::<f64>() {
            coeff *= x;
            continue;
        }
        if let Some(rest) = factor.strip_prefix("|z") {
            let rest = rest
                .strip_suffix("|^2")
                .ok_or_else(|| Error::bad_config(format!("bad factor `{factor}`")))?;
            if rest.is_empty() {
                // sum over axes: distribute over all accumulated monomials
                let mut next = Vec::new();
                for (pa, pb) in &expanded {
                    for ax in 0..n {
                        let mut qa = pa.clone();
                        let mut qb = pb.clone();
                        qa[ax] += 1;
                        qb[ax] += 1;
                        next.push((qa, qb));
                    }
                }
                expanded = next;
            } else {
                let ax = parse_axis(rest, n)?;
                for (pa, pb) in &mut expanded {
                    pa[ax] += 1;
                    pb[ax] += 1;
                }
            }
            continue;
        }
        if let Some(rest) = factor.strip_prefix('z') {
            let (body, power) = match rest.split_once('^') {
                Some((b, p)) => (
                    b,
                    p.parse::<u32>()
                        .map_err(|_| Error::bad_config(format!("bad power in `{factor}`")))?,
                ),
                None => (rest, 1),
            };
            let (axis_str, bar) = match body.strip_suffix("bar") {
                Some(s) => (s, true),
                None => (body, false),
            };
            let ax = if axis_str.is_empty() {
                if n != 1 {
                    return Err(Error::bad_config(
                        "bare `z` needs n = 1; use z1, z2, ... in higher dimension",
                    ));
                }
                0
            } else {
                parse_axis(axis_str, n)?
            };
            for (pa, pb) in &mut expanded {
                if bar {
                    pb[ax] += power;
                } else {
                    pa[ax] += power;
                }
            }
            continue;
        }
        return Err(Error::bad_config(format!("unrecognized factor `{factor}`")));
    }

    Ok(expanded
        .into_iter()
        .map(|(a, b)| TermSpec { a, b, re: coeff.re, im: coeff.im })
        .collect())
}

fn parse_axis(s: &str, n: usize) -> Result<usize> {
    let idx: usize = s
        .parse()
        .map_err(|_| Error::bad_config(format!("bad coordinate index `{s}`")))?;
    if idx == 0 || idx > n {
        return Err(Error::bad_config(format!("coordinate index {idx} out of range 1..={n}")));
    }
    Ok(idx - 1)
}
