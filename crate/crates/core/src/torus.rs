//! Truncated elements of the torus `T = { sum_{j <= -1} a_j t^j }`, the residue
//! map and the additive character `e(alpha) = exp(2 pi i Tr(res alpha) / p)`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{parse_terms, render_term, Field, FieldElem, Poly};

/// A torus element known to precision `N`: the coefficients of
/// `t^-1, ..., t^-N`. `coeffs[j - 1]` holds the coefficient of `t^-j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TailSeries {
    coeffs: Vec<FieldElem>,
}

impl TailSeries {
    pub fn zero(precision: usize) -> Self {
        TailSeries { coeffs: vec![0; precision] }
    }

    /// Builds a series from dense coefficients of `t^-1, t^-2, ...`.
    pub fn from_dense(coeffs: Vec<FieldElem>) -> Self {
        TailSeries { coeffs }
    }

    /// `c * t^-j` at the given precision.
    pub fn monomial(c: FieldElem, j: usize, precision: usize) -> Self {
        let mut s = Self::zero(precision);
        if j >= 1 && j <= precision {
            s.coeffs[j - 1] = c;
        }
        s
    }

    /// Builds a series from `(exponent, coefficient)` pairs with negative exponents.
    pub fn from_terms(precision: usize, terms: &[(i64, FieldElem)]) -> Result<Self> {
        let mut s = Self::zero(precision);
        for &(e, c) in terms {
            if e >= 0 || (-e) as usize > precision {
                return Err(Error::Invalid(format!("exponent {e} outside [-{precision}, -1]")));
            }
            s.coeffs[(-e - 1) as usize] = c;
        }
        Ok(s)
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dense(&self) -> &[FieldElem] {
        &self.coeffs
    }

    /// Coefficient of `t^-j` (zero beyond the precision; callers must check).
    pub fn coeff(&self, j: usize) -> FieldElem {
        if j == 0 {
            return 0;
        }
        self.coeffs.get(j - 1).copied().unwrap_or(0)
    }

    pub fn set_coeff(&mut self, j: usize, c: FieldElem) {
        self.coeffs[j - 1] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Nonzero terms as `(exponent, coefficient)`, highest exponent first.
    pub fn terms(&self) -> Vec<(i64, FieldElem)> {
        self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (-(i as i64) - 1, c)).collect()
    }

    /// Same series at a lower precision.
    pub fn truncate(&self, precision: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(precision);
        TailSeries { coeffs }
    }

    /// Parses `t^-1+2t^-3`. Without an explicit precision the smallest
    /// exponent present decides it.
    pub fn parse(s: &str, precision: Option<usize>) -> Result<Self> {
        let terms: Vec<(i64, FieldElem)> = parse_terms(s, 't')?.into_iter().map(|(c, e)| (e, c)).collect();
        let lowest = terms.iter().map(|&(e, _)| (-e).max(0) as usize).max().unwrap_or(1);
        let prec = precision.unwrap_or(lowest.max(1));
        let mut seen = std::collections::HashSet::new();
        for &(e, _) in &terms {
            if !seen.insert(e) {
                return Err(Error::Parse(format!("repeated exponent {e} in {s:?}")));
            }
        }
        Self::from_terms(prec, &terms)
    }
}

impl fmt::Display for TailSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms().into_iter().map(|(e, c)| render_term(c, e, 't')).collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join("+"))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TailSeriesJson {
    precision: usize,
    terms: Vec<(i64, FieldElem)>,
}

impl Serialize for TailSeries {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        TailSeriesJson { precision: self.precision(), terms: self.terms() }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for TailSeries {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = TailSeriesJson::deserialize(de)?;
        TailSeries::from_terms(j.precision, &j.terms).map_err(serde::de::Error::custom)
    }
}

/// A value of the additive character: `exp(2 pi i exp / p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharValue {
    pub exp: u32,
    pub p: u32,
}

impl CharValue {
    pub fn trivial(p: u32) -> Self {
        CharValue { exp: 0, p }
    }

    pub fn mul(self, other: CharValue) -> CharValue {
        CharValue { exp: (self.exp + other.exp) % self.p, p: self.p }
    }

    pub fn conj(self) -> CharValue {
        CharValue { exp: (self.p - self.exp) % self.p, p: self.p }
    }

    pub fn to_complex(self) -> Complex64 {
        if self.p == 2 {
            return Complex64::new(if self.exp == 0 { 1.0 } else { -1.0 }, 0.0);
        }
        Complex64::from_polar(1.0, TAU * self.exp as f64 / self.p as f64)
    }
}

/// Fractional part of `a / h` to `precision` digits. `h` must be monic.
pub fn expand_rational(field: &Field, a: &Poly, h: &Poly, precision: usize) -> Result<TailSeries> {
    let d = h.degree().ok_or(Error::DivisionByZero)?;
    if !h.is_monic() {
        return Err(Error::NotMonic(h.to_string()));
    }
    let mut r = field.poly_rem(a, h)?.coeffs().to_vec();
    r.resize(d, 0);
    let mut out = vec![0; precision];
    if d == 0 {
        return Ok(TailSeries { coeffs: out });
    }
    let hc = h.coeffs();
    for slot in out.iter_mut() {
        // r <- t*r - c*h with c the new top coefficient
        let c = r[d - 1];
        for i in (1..d).rev() {
            r[i] = field.sub(r[i - 1], field.mul(c, hc[i]));
        }
        r[0] = field.neg(field.mul(c, hc[0]));
        *slot = c;
    }
    Ok(TailSeries { coeffs: out })
}

/// `ord alpha`: the largest exponent with a nonzero coefficient, or `None`
/// when the series vanishes to its precision (then `ord <= -(N+1)`).
pub fn ord_of(alpha: &TailSeries) -> Option<i64> {
    alpha.coeffs.iter().position(|&c| c != 0).map(|i| -(i as i64) - 1)
}

/// Decides `ord alpha <= bound`, failing when the precision cannot tell.
pub fn ord_at_most(alpha: &TailSeries, bound: i64) -> Result<bool> {
    match ord_of(alpha) {
        Some(o) => Ok(o <= bound),
        None => {
            let n = alpha.precision() as i64;
            if bound >= -n - 1 {
                Ok(true)
            } else {
                Err(Error::InsufficientPrecision { needed: (-bound) as usize, have: n as usize })
            }
        }
    }
}

/// `res alpha`, the coefficient of `t^-1`.
pub fn residue(alpha: &TailSeries) -> FieldElem {
    alpha.coeff(1)
}

pub fn character(field: &Field, alpha: &TailSeries) -> CharValue {
    CharValue { exp: field.trace(residue(alpha)), p: field.p() }
}

/// `res(f alpha)` directly, needing only `N >= deg f + 1`.
pub fn residue_mul(field: &Field, f: &Poly, alpha: &TailSeries) -> Result<FieldElem> {
    let Some(d) = f.degree() else { return Ok(0) };
    if alpha.precision() < d + 1 {
        return Err(Error::InsufficientPrecision { needed: d + 1, have: alpha.precision() });
    }
    let mut acc = 0;
    for (i, &c) in f.coeffs().iter().enumerate() {
        if c != 0 {
            acc = field.add(acc, field.mul(c, alpha.coeffs[i]));
        }
    }
    Ok(acc)
}

/// Fractional part of `f * alpha`, valid to precision `N - deg f`.
pub fn scalar_mul(field: &Field, f: &Poly, alpha: &TailSeries) -> Result<TailSeries> {
    let n = alpha.precision();
    let Some(d) = f.degree() else { return Ok(TailSeries::zero(n)) };
    if n <= d {
        return Err(Error::InsufficientPrecision { needed: d + 1, have: n });
    }
    let out_prec = n - d;
    let mut out = vec![0; out_prec];
    for (jm1, slot) in out.iter_mut().enumerate() {
        let mut acc = 0;
        for (i, &c) in f.coeffs().iter().enumerate() {
            if c != 0 {
                acc = field.add(acc, field.mul(c, alpha.coeffs[jm1 + i]));
            }
        }
        *slot = acc;
    }
    Ok(TailSeries { coeffs: out })
}

/// Integral part of `f * alpha`, exact whenever `N >= deg f`.
pub fn integral_mul(field: &Field, f: &Poly, alpha: &TailSeries) -> Result<Poly> {
    let Some(d) = f.degree() else { return Ok(Poly::zero()) };
    if alpha.precision() < d {
        return Err(Error::InsufficientPrecision { needed: d, have: alpha.precision() });
    }
    // coefficient of t^k for 0 <= k < d is sum_{i > k} f_i alpha_{-(i-k)}
    let mut out = vec![0; d];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = 0;
        for i in (k + 1)..=d {
            acc = field.add(acc, field.mul(f.coeff(i), alpha.coeff(i - k)));
        }
        *slot = acc;
    }
    Ok(Poly::from_coeffs(out))
}

pub fn tail_add(field: &Field, a: &TailSeries, b: &TailSeries) -> TailSeries {
    let n = a.precision().min(b.precision());
    TailSeries { coeffs: (0..n).map(|i| field.add(a.coeffs[i], b.coeffs[i])).collect() }
}

pub fn tail_sub(field: &Field, a: &TailSeries, b: &TailSeries) -> TailSeries {
    let n = a.precision().min(b.precision());
    TailSeries { coeffs: (0..n).map(|i| field.sub(a.coeffs[i], b.coeffs[i])).collect() }
}

pub fn tail_neg(field: &Field, a: &TailSeries) -> TailSeries {
    TailSeries { coeffs: a.coeffs.iter().map(|&c| field.neg(c)).collect() }
}

/// Checks that every coefficient belongs to the field.
pub fn check_tail(field: &Field, a: &TailSeries) -> Result<()> {
    a.coeffs.iter().try_for_each(|&c| field.check_elem(c))
}
