//! Exact rational arithmetic and bivariate polynomials in `n` and `q = 2^n`.
//!
//! Every symbolic moment in this crate is a [`BiPoly`]: a finite sum
//! `sum c_{i,j} n^i q^j` with exact rational coefficients. Polynomials are
//! kept in canonical form (no zero coefficients stored), so equality of
//! values is structural equality of term maps.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arbitrary-precision rational; lowest terms and positive denominator are
/// maintained by `num-rational` itself.
pub type Rat = BigRational;

/// Convenience constructor for small rationals.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Exact `2^e` for possibly negative `e`.
pub fn pow2(e: i64) -> Rat {
    if e >= 0 {
        Rat::from_integer(BigInt::one() << e as usize)
    } else {
        Rat::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("leading term of the zero polynomial is undefined")]
    ZeroPolynomial,
    #[error("invalid polynomial json: {0}")]
    BadJson(String),
}

/// Bivariate polynomial in the formal symbols `n` and `q` (where `q` stands
/// for `2^n`) over [`Rat`].
///
/// Term keys are `(deg_q, deg_n)`; the map order matches the rendering order
/// (`q`-degree dominates, mirroring that `2^n` beats any power of `n`).
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Rat>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly::default()
    }

    pub fn one() -> Self {
        BiPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = BiPoly::default();
        if !c.is_zero() {
            p.terms.insert((0, 0), c);
        }
        p
    }

    /// The symbol `n`.
    pub fn var_n() -> Self {
        BiPoly::monomial(1, 0, Rat::one())
    }

    /// The symbol `q = 2^n`.
    pub fn var_q() -> Self {
        BiPoly::monomial(0, 1, Rat::one())
    }

    /// `c * n^deg_n * q^deg_q`.
    pub fn monomial(deg_n: u32, deg_q: u32, c: Rat) -> Self {
        let mut p = BiPoly::default();
        if !c.is_zero() {
            p.terms.insert((deg_q, deg_n), c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as `((deg_q, deg_n), coeff)` in ascending key order.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rat)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> BiPoly {
        let mut out = BiPoly::default();
        for (k, c) in &self.terms {
            out.terms.insert(*k, -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        let mut out = BiPoly::default();
        for ((q1, n1), c1) in &self.terms {
            for ((q2, n2), c2) in &other.terms {
                out.add_term((q1 + q2, n1 + n2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> BiPoly {
        if c.is_zero() {
            return BiPoly::zero();
        }
        let mut out = BiPoly::default();
        for (k, v) in &self.terms {
            out.terms.insert(*k, v * c);
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> BiPoly {
        let mut acc = BiPoly::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn add_term(&mut self, key: (u32, u32), c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Exact value at `n = n0`, `q = 2^n0`.
    pub fn eval_at_n(&self, n0: u32) -> Rat {
        let n = Rat::from_integer(BigInt::from(n0));
        let q = pow2(n0 as i64);
        let mut acc = Rat::zero();
        for ((dq, dn), c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..*dn {
                t *= &n;
            }
            for _ in 0..*dq {
                t *= &q;
            }
            acc += t;
        }
        acc
    }

    /// Maximal term under `(deg_q, deg_n)` lexicographic order, reflecting
    /// that `2^n` dominates every power of `n` as `n` grows.
    pub fn leading_term(&self) -> Result<(u32, u32, Rat), PolyError> {
        self.terms
            .iter()
            .next_back()
            .map(|((dq, dn), c)| (*dq, *dn, c.clone()))
            .ok_or(PolyError::ZeroPolynomial)
    }

    /// Degree in `n` (None for the zero polynomial).
    pub fn deg_n(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, dn)| dn).max()
    }

    /// Degree in `q` (None for the zero polynomial).
    pub fn deg_q(&self) -> Option<u32> {
        self.terms.keys().map(|&(dq, _)| dq).max()
    }

    pub fn render(&self, format: RenderFormat) -> String {
        match format {
            RenderFormat::Plain => self.render_text(TextStyle::Plain),
            RenderFormat::Maple => self.render_text(TextStyle::Maple),
            RenderFormat::Latex => self.render_text(TextStyle::Latex),
            RenderFormat::Json => self.to_json_string(),
        }
    }

    fn render_text(&self, style: TextStyle) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, ((dq, dn), c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&render_term(*dn, *dq, &c.abs(), style));
        }
        out
    }

    /// Serialize to the fixed JSON schema: `{"terms":[{"n":..,"q":..,"num":"..","den":".."},...]}`
    /// with terms sorted by `(q, n)` descending; the numerator carries the sign.
    pub fn to_json_string(&self) -> String {
        let doc = PolyJson {
            terms: self
                .terms
                .iter()
                .rev()
                .map(|((dq, dn), c)| TermJson {
                    n: *dn,
                    q: *dq,
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("poly json serialization")
    }

    /// Parse the JSON schema back into a canonical polynomial. Accepts
    /// unsorted or duplicated terms (they are summed) but rejects malformed
    /// numbers and nonpositive denominators.
    pub fn from_json_str(s: &str) -> Result<BiPoly, PolyError> {
        let doc: PolyJson =
            serde_json::from_str(s).map_err(|e| PolyError::BadJson(e.to_string()))?;
        let mut p = BiPoly::zero();
        for t in doc.terms {
            let num: BigInt = t
                .num
                .parse()
                .map_err(|_| PolyError::BadJson(format!("bad numerator {:?}", t.num)))?;
            let den: BigInt = t
                .den
                .parse()
                .map_err(|_| PolyError::BadJson(format!("bad denominator {:?}", t.den)))?;
            if den <= BigInt::zero() {
                return Err(PolyError::BadJson(format!(
                    "denominator must be positive, got {}",
                    den
                )));
            }
            p.add_term((t.q, t.n), Rat::new(num, den));
        }
        Ok(p)
    }
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiPoly({})", self.render_text(TextStyle::Plain))
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render_text(TextStyle::Plain))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderFormat {
    Plain,
    Latex,
    Maple,
    Json,
}

impl std::str::FromStr for RenderFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(RenderFormat::Plain),
            "latex" => Ok(RenderFormat::Latex),
            "maple" => Ok(RenderFormat::Maple),
            "json" => Ok(RenderFormat::Json),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

#[derive(Clone, Copy)]
enum TextStyle {
    Plain,
    Maple,
    Latex,
}

fn render_term(dn: u32, dq: u32, c: &Rat, style: TextStyle) -> String {
    let mut factors: Vec<String> = Vec::new();
    let num = c.numer();
    let den = c.denom();
    if !num.is_one() || (dn == 0 && dq == 0) {
        factors.push(num.to_string());
    }
    if dn > 0 {
        factors.push(match (dn, style) {
            (1, _) => "n".into(),
            (_, TextStyle::Latex) => format!("n^{{{dn}}}"),
            (_, _) => format!("n^{dn}"),
        });
    }
    if dq > 0 {
        factors.push(match (dq, style) {
            (1, TextStyle::Latex) => "2^{n}".into(),
            (1, _) => "2^n".into(),
            (_, TextStyle::Latex) => format!("(2^{{n}})^{{{dq}}}"),
            (_, _) => format!("(2^n)^{dq}"),
        });
    }
    let sep = match style {
        TextStyle::Latex => r"\cdot ",
        _ => "*",
    };
    let mut s = factors.join(sep);
    if !den.is_one() {
        s.push('/');
        s.push_str(&den.to_string());
    }
    s
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    n: u32,
    q: u32,
    num: String,
    den: String,
}

/// `binom(n, a)` as a degree-`a` polynomial in the symbol `n`:
/// `n(n-1)...(n-a+1)/a!`.
pub fn binom_poly(a: u32) -> BiPoly {
    let mut p = BiPoly::one();
    for j in 0..a {
        p = p.mul(&BiPoly::var_n().sub(&BiPoly::constant(rat(j as i64, 1))));
    }
    p.scale(&Rat::new(BigInt::one(), factorial(a)))
}

/// Ordered choices of `m` distinct tails of length `n - a`, as a polynomial
/// in `q`: `prod_{j=0}^{m-1} (q/2^a - j)`. Degree `m` in `q`, degree 0 in `n`.
pub fn falling_factorial_poly(a: u32, m: u32) -> BiPoly {
    let scaled_q = BiPoly::var_q().scale(&pow2(-(a as i64)));
    let mut p = BiPoly::one();
    for j in 0..m {
        p = p.mul(&scaled_q.sub(&BiPoly::constant(rat(j as i64, 1))));
    }
    p
}

pub fn factorial(a: u32) -> BigInt {
    (1..=a as u64).map(BigInt::from).product()
}

/// Exact integer `binom(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for j in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Parse an exact rational from a `"num/den"` or `"num"` string.
pub fn parse_rational(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (num_s, den_s) = match s.split_once('/') {
        Some((a, b)) => (a, b),
        None => (s, "1"),
    };
    let num: BigInt = num_s
        .trim()
        .parse()
        .map_err(|_| format!("bad numerator in {s:?}"))?;
    let den: BigInt = den_s
        .trim()
        .parse()
        .map_err(|_| format!("bad denominator in {s:?}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rat::new(num, den))
}

/// `floor(sqrt .)` scaled to `digits` decimal places, as a rational
/// approximation of `sqrt(x)` good to roughly `digits` digits.
pub fn sqrt_approx(x: &Rat, digits: u32) -> Rat {
    nth_root_approx(x, 2, digits)
}

/// Rational approximation of `x^{1/m}` with about `digits` decimal digits.
pub fn nth_root_approx(x: &Rat, m: u32, digits: u32) -> Rat {
    assert!(!x.is_negative(), "nth_root_approx of a negative value");
    let scale = BigInt::from(10u32).pow(digits);
    // x^{1/m} = (num * den^{m-1})^{1/m} / den; scale before the root.
    let num = x.numer();
    let den = x.denom();
    let mut radicand = num * &scale.pow(m);
    radicand *= den.pow(m - 1);
    let root = radicand.nth_root(m);
    Rat::new(root, den * &scale)
}

/// Render a (nonnegative) rational as a fixed-point decimal with `digits`
/// fractional digits, for stable human-readable output.
pub fn decimal_string(x: &Rat, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (x * Rat::from_integer(scale.clone())).round();
    let v = scaled.to_integer();
    let neg = v < BigInt::zero();
    let v = v.abs();
    let (int, frac) = (v.clone() / &scale, v % &scale);
    let mut frac_s = frac.to_string();
    while (frac_s.len() as u32) < digits {
        frac_s.insert(0, '0');
    }
    format!("{}{}.{}", if neg { "-" } else { "" }, int, frac_s)
}

/// Lossy f64 view of an exact rational, for report output only.
pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // fall back through a scaled integer when numer/denom individually overflow
        let digits = 30u32;
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = (x * Rat::from_integer(scale)).round().to_integer();
        scaled.to_f64().unwrap_or(f64::NAN) / 1e30
    })
}
