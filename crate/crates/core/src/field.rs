//! Exact arithmetic in `F_q` (q = p^m) and in the polynomial ring `F_q[t]`.
//!
//! Field elements are stored as integer codes: the element with coordinates
//! `(c_0, ..., c_{m-1})` in the basis `1, x, ..., x^(m-1)` of `F_p[x]/(modulus)`
//! has code `c_0 + c_1 p + ... + c_{m-1} p^(m-1)`. For prime fields the code is
//! the residue itself. Polynomials in `t` are coefficient vectors of codes.
//!
//! Every polynomial of degree `< n` has a canonical index in `[0, q^n)`: the
//! coefficient codes read as base-`q` digits with the constant term least
//! significant. Enumeration order, grid layouts and `Ord` on [`Poly`] all agree
//! with this index.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of elements any single enumeration may produce.
pub const DEFAULT_COUNT_LIMIT: u64 = 1 << 26;

/// Largest supported field size (arithmetic is table driven).
pub const MAX_Q: u32 = 256;

pub type FieldElem = u32;

/// Parameters of `F_q`: the characteristic, the extension degree and, for
/// `m > 1`, a monic irreducible modulus over `F_p` (coefficients low to high).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldParams {
    pub p: u32,
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

impl FieldParams {
    pub fn prime(p: u32) -> Self {
        FieldParams { p, m: 1, modulus: None }
    }

    pub fn extension(p: u32, modulus: Vec<u32>) -> Self {
        let m = modulus.len().saturating_sub(1) as u32;
        FieldParams { p, m, modulus: Some(modulus) }
    }

    /// `F_4 = F_2[x]/(x^2+x+1)`.
    pub fn f4() -> Self {
        Self::extension(2, vec![1, 1, 1])
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.m)
    }

    /// Parses `p`, `p,m` or `p,m,modulus` where the modulus is written in the
    /// variable `x`, e.g. `2,2,x^2+x+1`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let p: u32 = parts[0].parse().map_err(|_| Error::Parse(format!("bad characteristic {:?}", parts[0])))?;
        match parts.len() {
            1 => Ok(Self::prime(p)),
            2 | 3 => {
                let m: u32 =
                    parts[1].parse().map_err(|_| Error::Parse(format!("bad extension degree {:?}", parts[1])))?;
                if m == 1 {
                    return Ok(Self::prime(p));
                }
                let modulus = if parts.len() == 3 {
                    let terms = parse_terms(parts[2], 'x')?;
                    let mut coeffs = vec![0u32; m as usize + 1];
                    for (c, e) in terms {
                        if e < 0 || e > m as i64 {
                            return Err(Error::Parse(format!("modulus exponent {e} out of range")));
                        }
                        coeffs[e as usize] = (coeffs[e as usize] + c) % p;
                    }
                    coeffs
                } else {
                    default_modulus(p, m)
                        .ok_or_else(|| Error::Invalid(format!("no default modulus for p={p}, m={m}; pass one")))?
                };
                let fp = FieldParams { p, m, modulus: Some(modulus) };
                Ok(fp)
            }
            _ => Err(Error::Parse(format!("bad field spec {s:?}"))),
        }
    }
}

impl fmt::Display for FieldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.modulus {
            Some(md) if self.m > 1 => {
                let poly = Poly::from_coeffs(md.clone());
                write!(f, "{},{},{}", self.p, self.m, poly.render_var('x'))
            }
            _ => write!(f, "{}", self.p),
        }
    }
}

fn default_modulus(p: u32, m: u32) -> Option<Vec<u32>> {
    match (p, m) {
        (2, 2) => Some(vec![1, 1, 1]),
        (2, 3) => Some(vec![1, 1, 0, 1]),
        (2, 4) => Some(vec![1, 1, 0, 0, 1]),
        (3, 2) => Some(vec![1, 0, 1]),
        (3, 3) => Some(vec![1, 2, 0, 1]),
        (5, 2) => Some(vec![2, 0, 1]),
        _ => None,
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A polynomial in `t` over `F_q`, normalized so the leading coefficient is
/// nonzero. The zero polynomial has no coefficients and degree `None`, which
/// orders below every `Some(d)` and so plays the role of `-infinity`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<FieldElem>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![1] }
    }

    pub fn constant(c: FieldElem) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `t`
    pub fn t() -> Self {
        Poly { coeffs: vec![0, 1] }
    }

    pub fn monomial(c: FieldElem, d: usize) -> Self {
        let mut coeffs = vec![0; d + 1];
        coeffs[d] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree as a signed integer with `-1` standing in for the zero polynomial.
    /// Only for arithmetic on bounds where `deg 0 < 0` is all that matters.
    pub fn degree_i64(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn leading(&self) -> FieldElem {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    fn render_var(&self, var: char) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (e, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            parts.push(render_term(c, e as i64, var));
        }
        parts.join("+")
    }

    /// Parses the ASCII form `t^3+t+1`; coefficients are field-element codes
    /// written before the variable (`2t^2+1` or `2*t^2+1`). Repeated exponents
    /// are rejected because combining them needs the field.
    pub fn parse(s: &str) -> Result<Self> {
        let terms = parse_terms(s, 't')?;
        let mut coeffs: Vec<FieldElem> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (c, e) in terms {
            if e < 0 {
                return Err(Error::Parse(format!("negative exponent in polynomial {s:?}")));
            }
            if !seen.insert(e) {
                return Err(Error::Parse(format!("repeated exponent {e} in {s:?}")));
            }
            let e = e as usize;
            if coeffs.len() <= e {
                coeffs.resize(e + 1, 0);
            }
            coeffs[e] = c;
        }
        Ok(Poly::from_coeffs(coeffs))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_var('t'))
    }
}

impl std::str::FromStr for Poly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Poly::parse(s)
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: by degree, then coefficients from the top down. This is
/// the numeric order of canonical indices.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs.len().cmp(&other.coeffs.len()).then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

pub(crate) fn render_term(c: FieldElem, e: i64, var: char) -> String {
    let coef = if c == 1 && e != 0 { String::new() } else { c.to_string() };
    match e {
        0 => coef,
        1 => format!("{coef}{var}"),
        _ => format!("{coef}{var}^{e}"),
    }
}

/// Splits `2t^3+t^-1+1` into `(coefficient code, exponent)` pairs.
pub(crate) fn parse_terms(s: &str, var: char) -> Result<Vec<(FieldElem, i64)>> {
    let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    if cleaned == "0" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for term in cleaned.split('+') {
        if term.is_empty() {
            return Err(Error::Parse(format!("empty term in {s:?}")));
        }
        let bad = || Error::Parse(format!("bad term {term:?} in {s:?}"));
        match term.find(var) {
            None => {
                let c: u32 = term.parse().map_err(|_| bad())?;
                if c != 0 {
                    out.push((c, 0));
                }
            }
            Some(pos) => {
                let head = term[..pos].trim_end_matches('*');
                let c: u32 = if head.is_empty() { 1 } else { head.parse().map_err(|_| bad())? };
                let tail = &term[pos + var.len_utf8()..];
                let e: i64 = if tail.is_empty() {
                    1
                } else {
                    let rest = tail.strip_prefix('^').ok_or_else(bad)?;
                    rest.parse().map_err(|_| bad())?
                };
                if c != 0 {
                    out.push((c, e));
                }
            }
        }
    }
    Ok(out)
}

/// The finite field `F_q` together with its arithmetic tables and the global
/// enumeration cap. All polynomial arithmetic goes through this context.
#[derive(Clone, Debug)]
pub struct Field {
    params: FieldParams,
    q: u32,
    add: Vec<FieldElem>,
    mul: Vec<FieldElem>,
    neg: Vec<FieldElem>,
    inv: Vec<FieldElem>,
    trace: Vec<u32>,
    count_limit: u64,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
    }
}

impl Field {
    pub fn new(params: FieldParams) -> Result<Self> {
        let p = params.p;
        if !is_prime(p) {
            return Err(Error::Invalid(format!("characteristic {p} is not prime")));
        }
        if params.m == 0 {
            return Err(Error::Invalid("extension degree must be at least 1".into()));
        }
        let q64 = params.q();
        if q64 > MAX_Q as u64 {
            return Err(Error::Invalid(format!("q = {q64} exceeds the supported maximum {MAX_Q}")));
        }
        let q = q64 as u32;
        let m = params.m as usize;
        let modulus = if m > 1 {
            let md = params.modulus.clone().ok_or_else(|| Error::Invalid("extension field needs a modulus".into()))?;
            if md.len() != m + 1 || md[m] != 1 || md.iter().any(|&c| c >= p) {
                return Err(Error::Invalid(format!("modulus must be monic of degree {m} with coefficients below {p}")));
            }
            if !is_irreducible_fp(p, &md) {
                return Err(Error::Invalid("modulus is reducible over F_p".into()));
            }
            Some(md)
        } else {
            None
        };
        let qs = q as usize;
        let coords = |code: u32| -> Vec<u32> {
            let mut c = vec![0; m];
            let mut v = code;
            for slot in c.iter_mut() {
                *slot = v % p;
                v /= p;
            }
            c
        };
        let encode = |c: &[u32]| -> u32 { c.iter().rev().fold(0, |acc, &d| acc * p + d) };
        let mut add = vec![0; qs * qs];
        let mut mul = vec![0; qs * qs];
        for a in 0..q {
            let ca = coords(a);
            for b in 0..q {
                let cb = coords(b);
                let s: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
                add[(a * q + b) as usize] = encode(&s);
                let mut prod = vec![0u32; 2 * m];
                for i in 0..m {
                    for j in 0..m {
                        prod[i + j] = (prod[i + j] + ca[i] * cb[j]) % p;
                    }
                }
                if let Some(md) = &modulus {
                    for d in (m..2 * m - 1).rev() {
                        let c = prod[d];
                        if c != 0 {
                            for k in 0..=m {
                                let sub = c * md[k] % p;
                                prod[d - m + k] = (prod[d - m + k] + p - sub) % p;
                            }
                        }
                    }
                }
                mul[(a * q + b) as usize] = encode(&prod[..m]);
            }
        }
        let mut neg = vec![0; qs];
        let mut inv = vec![0; qs];
        for a in 0..q {
            for b in 0..q {
                if add[(a * q + b) as usize] == 0 {
                    neg[a as usize] = b;
                }
                if mul[(a * q + b) as usize] == 1 {
                    inv[a as usize] = b;
                }
            }
        }
        // Tr(x) = x + x^p + ... + x^(p^(m-1)); the result is a prime-field code.
        let mut trace = vec![0; qs];
        for a in 0..q {
            let mut acc = 0u32;
            let mut pw = a;
            for _ in 0..m {
                acc = add[(acc * q + pw) as usize];
                let mut next = 1u32;
                for _ in 0..p {
                    next = mul[(next * q + pw) as usize];
                }
                pw = next;
            }
            debug_assert!(acc < p);
            trace[a as usize] = acc;
        }
        Ok(Field { params, q, add, mul, neg, inv, trace, count_limit: DEFAULT_COUNT_LIMIT })
    }

    pub fn prime(p: u32) -> Result<Self> {
        Self::new(FieldParams::prime(p))
    }

    pub fn with_count_limit(mut self, limit: u64) -> Self {
        self.count_limit = limit;
        self
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn p(&self) -> u32 {
        self.params.p
    }

    pub fn m(&self) -> u32 {
        self.params.m
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn count_limit(&self) -> u64 {
        self.count_limit
    }

    /// Fails unless `count` fits under the enumeration cap.
    pub fn check_count(&self, count: u128) -> Result<()> {
        if count > self.count_limit as u128 {
            Err(Error::CountLimit { requested: count, limit: self.count_limit })
        } else {
            Ok(())
        }
    }

    /// `q^e` as a checked count.
    pub fn q_pow(&self, e: usize) -> u128 {
        (self.q as u128).checked_pow(e as u32).unwrap_or(u128::MAX)
    }

    // ---- scalar arithmetic ----

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add[(a * self.q + b) as usize]
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.mul[(a * self.q + b) as usize]
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        self.neg[a as usize]
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a == 0 {
            Err(Error::DivisionByZero)
        } else {
            Ok(self.inv[a as usize])
        }
    }

    /// `Tr_{F_q/F_p}(x)` as a residue mod p.
    #[inline]
    pub fn trace(&self, a: FieldElem) -> u32 {
        self.trace[a as usize]
    }

    /// Coordinates of an element in the basis `1, x, ..., x^(m-1)`.
    pub fn coords(&self, a: FieldElem) -> Vec<u32> {
        let p = self.p();
        let mut v = a;
        (0..self.m())
            .map(|_| {
                let d = v % p;
                v /= p;
                d
            })
            .collect()
    }

    pub fn check_elem(&self, a: FieldElem) -> Result<()> {
        if a < self.q {
            Ok(())
        } else {
            Err(Error::FieldMismatch(format!("element code {a} is not below q = {}", self.q)))
        }
    }

    /// Rejects polynomials whose coefficient codes do not belong to this field.
    pub fn check_poly(&self, a: &Poly) -> Result<()> {
        a.coeffs.iter().try_for_each(|&c| self.check_elem(c))
    }

    // ---- polynomial arithmetic ----

    pub fn poly_add(&self, a: &Poly, b: &Poly) -> Poly {
        let n = a.coeffs.len().max(b.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.add(a.coeff(i), b.coeff(i))).collect())
    }

    pub fn poly_sub(&self, a: &Poly, b: &Poly) -> Poly {
        let n = a.coeffs.len().max(b.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.sub(a.coeff(i), b.coeff(i))).collect())
    }

    pub fn poly_neg(&self, a: &Poly) -> Poly {
        Poly::from_coeffs(a.coeffs.iter().map(|&c| self.neg(c)).collect())
    }

    pub fn poly_scale(&self, c: FieldElem, a: &Poly) -> Poly {
        Poly::from_coeffs(a.coeffs.iter().map(|&x| self.mul(c, x)).collect())
    }

    pub fn poly_mul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() || b.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        Poly::from_coeffs(out)
    }

    /// Multiplication by `t^k`.
    pub fn poly_shift(&self, a: &Poly, k: usize) -> Poly {
        if a.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![0; k];
        coeffs.extend_from_slice(&a.coeffs);
        Poly { coeffs }
    }

    /// Euclidean division: `a = quot * b + rem` with `deg rem < deg b`.
    pub fn poly_divmod(&self, a: &Poly, b: &Poly) -> Result<(Poly, Poly)> {
        let db = b.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = self.inv(b.leading())?;
        let mut rem = a.coeffs.clone();
        if rem.len() <= db {
            return Ok((Poly::zero(), a.clone()));
        }
        let mut quot = vec![0; rem.len() - db];
        for i in (db..rem.len()).rev() {
            let c = rem[i];
            if c == 0 {
                continue;
            }
            let f = self.mul(c, lead_inv);
            quot[i - db] = f;
            for (j, &bc) in b.coeffs.iter().enumerate() {
                let idx = i - db + j;
                rem[idx] = self.sub(rem[idx], self.mul(f, bc));
            }
        }
        rem.truncate(db);
        Ok((Poly::from_coeffs(quot), Poly::from_coeffs(rem)))
    }

    pub fn poly_rem(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        Ok(self.poly_divmod(a, b)?.1)
    }

    pub fn poly_pow(&self, a: &Poly, e: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.poly_mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.poly_mul(&base, &base);
            }
        }
        result
    }

    /// `a^e mod h` by square-and-multiply with reduction at every step.
    pub fn poly_powmod(&self, a: &Poly, e: u32, h: &Poly) -> Result<Poly> {
        let mut result = self.poly_rem(&Poly::one(), h)?;
        let mut base = self.poly_rem(a, h)?;
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.poly_rem(&self.poly_mul(&result, &base), h)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.poly_rem(&self.poly_mul(&base, &base), h)?;
            }
        }
        Ok(result)
    }

    /// Scales a nonzero polynomial to be monic.
    pub fn make_monic(&self, a: &Poly) -> Result<Poly> {
        if a.is_zero() {
            return Err(Error::AllZero);
        }
        Ok(self.poly_scale(self.inv(a.leading())?, a))
    }

    /// Monic gcd of a list; zero entries are ignored.
    pub fn gcd_monic(&self, items: &[Poly]) -> Result<Poly> {
        let mut g = Poly::zero();
        for it in items {
            let mut a = g;
            let mut b = it.clone();
            while !b.is_zero() {
                let r = self.poly_rem(&a, &b)?;
                a = b;
                b = r;
            }
            g = a;
        }
        self.make_monic(&g)
    }

    /// Monic lcm of a list of nonzero polynomials.
    pub fn lcm_monic(&self, items: &[Poly]) -> Result<Poly> {
        if items.is_empty() || items.iter().any(Poly::is_zero) {
            return Err(Error::AllZero);
        }
        let mut l = Poly::one();
        for it in items {
            let g = self.gcd_monic(&[l.clone(), it.clone()])?;
            let (quot, _) = self.poly_divmod(&self.poly_mul(&l, it), &g)?;
            l = quot;
        }
        self.make_monic(&l)
    }

    // ---- canonical indices ----

    /// Canonical index of `a` (base-`q` digits, constant term least significant).
    pub fn poly_index(&self, a: &Poly) -> Result<u64> {
        let mut idx: u64 = 0;
        for &c in a.coeffs.iter().rev() {
            idx = idx
                .checked_mul(self.q as u64)
                .and_then(|v| v.checked_add(c as u64))
                .ok_or_else(|| Error::Invalid(format!("polynomial {a} too large to index")))?;
        }
        Ok(idx)
    }

    pub fn poly_from_index(&self, idx: u64) -> Poly {
        let q = self.q as u64;
        let mut coeffs = Vec::new();
        let mut v = idx;
        while v > 0 {
            coeffs.push((v % q) as u32);
            v /= q;
        }
        Poly { coeffs }
    }

    /// Sum of two polynomials given by canonical indices.
    #[inline]
    pub fn idx_add(&self, a: u64, b: u64) -> u64 {
        if self.q == 2 {
            return a ^ b;
        }
        let q = self.q as u64;
        let (mut a, mut b) = (a, b);
        let mut out = 0u64;
        let mut pw = 1u64;
        while a > 0 || b > 0 {
            let d = self.add((a % q) as u32, (b % q) as u32) as u64;
            out += d * pw;
            a /= q;
            b /= q;
            pw = pw.wrapping_mul(q);
        }
        out
    }

    #[inline]
    pub fn idx_neg(&self, a: u64) -> u64 {
        if self.params.p == 2 {
            return a;
        }
        let q = self.q as u64;
        let mut a = a;
        let mut out = 0u64;
        let mut pw = 1u64;
        while a > 0 {
            out += self.neg((a % q) as u32) as u64 * pw;
            a /= q;
            pw = pw.wrapping_mul(q);
        }
        out
    }

    #[inline]
    pub fn idx_sub(&self, a: u64, b: u64) -> u64 {
        self.idx_add(a, self.idx_neg(b))
    }

    /// Scalar multiple of a polynomial given by its index.
    pub fn idx_scale(&self, c: FieldElem, a: u64) -> u64 {
        if c == 1 {
            return a;
        }
        let q = self.q as u64;
        let mut a = a;
        let mut out = 0u64;
        let mut pw = 1u64;
        while a > 0 {
            out += self.mul(c, (a % q) as u32) as u64 * pw;
            a /= q;
            pw = pw.wrapping_mul(q);
        }
        out
    }

    /// Degree of the polynomial with index `a` (`None` for zero).
    pub fn idx_degree(&self, a: u64) -> Option<usize> {
        if a == 0 {
            return None;
        }
        if self.q == 2 {
            return Some(63 - a.leading_zeros() as usize);
        }
        let q = self.q as u64;
        let mut d = 0;
        let mut v = a / q;
        while v > 0 {
            d += 1;
            v /= q;
        }
        Some(d)
    }

    // ---- enumeration ----

    /// All polynomials of degree `< n` in canonical order; exactly `q^n` items.
    pub fn enumerate_degree_lt(&self, n: usize) -> Result<Vec<Poly>> {
        let count = self.q_pow(n);
        self.check_count(count)?;
        Ok((0..count as u64).map(|i| self.poly_from_index(i)).collect())
    }

    /// All monic polynomials of degree exactly `s`, in canonical order.
    pub fn enumerate_monic(&self, s: usize) -> Result<Vec<Poly>> {
        let count = self.q_pow(s);
        self.check_count(count)?;
        let top = self.q_pow(s) as u64;
        Ok((0..count as u64).map(|i| self.poly_from_index(top + i)).collect())
    }

    /// Product of all monic polynomials of degree `s`.
    pub fn product_of_monic(&self, s: usize) -> Result<Poly> {
        let mut acc = Poly::one();
        for h in self.enumerate_monic(s)? {
            acc = self.poly_mul(&acc, &h);
        }
        Ok(acc)
    }

    /// Polynomial over this field read from a list of codes, checked.
    pub fn poly_from_codes(&self, codes: Vec<u32>) -> Result<Poly> {
        codes.iter().try_for_each(|&c| self.check_elem(c))?;
        Ok(Poly::from_coeffs(codes))
    }

    /// Parses a polynomial and checks it belongs to this field.
    pub fn parse_poly(&self, s: &str) -> Result<Poly> {
        let terms = parse_terms(s, 't')?;
        let mut coeffs: Vec<FieldElem> = Vec::new();
        for (c, e) in terms {
            self.check_elem(c)?;
            if e < 0 {
                return Err(Error::Parse(format!("negative exponent in polynomial {s:?}")));
            }
            let e = e as usize;
            if coeffs.len() <= e {
                coeffs.resize(e + 1, 0);
            }
            coeffs[e] = self.add(coeffs[e], c);
        }
        Ok(Poly::from_coeffs(coeffs))
    }
}

/// Irreducibility over `F_p` by trial division with every monic polynomial of
/// degree at most `deg / 2`.
fn is_irreducible_fp(p: u32, modulus: &[u32]) -> bool {
    let fp = match Field::prime(p) {
        Ok(f) => f,
        Err(_) => return false,
    };
    let md = Poly::from_coeffs(modulus.to_vec());
    let deg = match md.degree() {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    for d in 1..=deg / 2 {
        let Ok(cands) = fp.enumerate_monic(d) else { return false };
        for cand in cands {
            if fp.poly_rem(&md, &cand).map(|r| r.is_zero()).unwrap_or(true) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Field {
        Field::prime(2).unwrap()
    }

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    #[test]
    fn frobenius_square_in_char_two() {
        let f = f2();
        assert_eq!(f.poly_mul(&p("t+1"), &p("t+1")), p("t^2+1"));
    }

    #[test]
    fn long_division_example() {
        let f = f2();
        // (t+1)(t^2+t+1) = t^3+1 over F_2, so the remainder is t+1
        let (quot, rem) = f.poly_divmod(&p("t^3+t"), &p("t^2+t+1")).unwrap();
        assert_eq!(quot, p("t+1"));
        assert_eq!(rem, p("t+1"));
        let (quot, rem) = f.poly_divmod(&p("t^3+1"), &p("t^2+t+1")).unwrap();
        assert_eq!((quot, rem), (p("t+1"), Poly::zero()));
        assert_eq!(f.poly_add(&p("t^2+1"), &Poly::zero()), p("t^2+1"));
        assert_eq!(f.poly_divmod(&p("t"), &Poly::zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn gcd_and_lcm() {
        let f = f2();
        assert_eq!(f.gcd_monic(&[p("t^2+t"), p("t")]).unwrap(), p("t"));
        assert_eq!(f.gcd_monic(&[p("t^3+t+1"), p("1")]).unwrap(), p("1"));
        assert_eq!(f.gcd_monic(&[Poly::zero(), p("t+1")]).unwrap(), p("t+1"));
        assert_eq!(f.gcd_monic(&[Poly::zero(), Poly::zero()]), Err(Error::AllZero));
        assert_eq!(f.lcm_monic(&[p("t"), p("t")]).unwrap(), p("t"));
        assert_eq!(f.lcm_monic(&[p("t"), p("t+1")]).unwrap(), p("t^2+t"));
        assert_eq!(f.lcm_monic(&[p("t"), Poly::zero()]), Err(Error::AllZero));
        let f3 = Field::prime(3).unwrap();
        assert_eq!(f3.lcm_monic(&[p("2t+1"), p("1")]).unwrap(), p("t+2"));
    }

    #[test]
    fn enumeration_order_and_counts() {
        let f = f2();
        assert_eq!(f.enumerate_degree_lt(0).unwrap(), vec![Poly::zero()]);
        assert_eq!(f.enumerate_degree_lt(2).unwrap(), vec![Poly::zero(), p("1"), p("t"), p("t+1")]);
        assert_eq!(Field::prime(3).unwrap().enumerate_degree_lt(1).unwrap().len(), 3);
        assert_eq!(f.enumerate_monic(0).unwrap(), vec![p("1")]);
        assert_eq!(f.enumerate_monic(1).unwrap(), vec![p("t"), p("t+1")]);
        assert_eq!(Field::prime(3).unwrap().enumerate_monic(2).unwrap().len(), 9);
        let small = f2().with_count_limit(8);
        assert!(matches!(small.enumerate_degree_lt(4), Err(Error::CountLimit { .. })));
    }

    #[test]
    fn trace_examples() {
        let f5 = Field::prime(5).unwrap();
        for x in 0..5 {
            assert_eq!(f5.trace(x), x);
        }
        let f4 = Field::new(FieldParams::f4()).unwrap();
        assert_eq!(f4.trace(0), 0);
        // code 2 is the generator x; x + x^2 = 1 mod x^2+x+1
        assert_eq!(f4.trace(2), 1);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(f4.trace(f4.add(a, b)), (f4.trace(a) + f4.trace(b)) % 2);
            }
        }
    }

    #[test]
    fn extension_field_is_a_field() {
        for params in [FieldParams::f4(), FieldParams::parse("3,2").unwrap()] {
            let f = Field::new(params).unwrap();
            for a in 1..f.q() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
        assert!(Field::new(FieldParams::extension(2, vec![1, 0, 1])).is_err());
        assert!(Field::prime(4).is_err());
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(p("t^3+t+1").to_string(), "t^3+t+1");
        assert_eq!(p("2*t^2 + 1").to_string(), "2t^2+1");
        assert_eq!(p("0"), Poly::zero());
        assert!(Poly::parse("t^-1").is_err());
        assert!(Poly::parse("t+").is_err());
        assert_eq!(FieldParams::parse("2,2,x^2+x+1").unwrap(), FieldParams::f4());
        assert_eq!(FieldParams::f4().to_string(), "2,2,x^2+x+1");
        assert!(f2().parse_poly("2t").is_err());
    }

    #[test]
    fn index_arithmetic_matches_polys() {
        for f in [f2(), Field::prime(3).unwrap(), Field::new(FieldParams::f4()).unwrap()] {
            let all = f.enumerate_degree_lt(3).unwrap();
            for a in all.iter().step_by(3) {
                for b in all.iter().step_by(2) {
                    let ia = f.poly_index(a).unwrap();
                    let ib = f.poly_index(b).unwrap();
                    assert_eq!(f.poly_from_index(f.idx_add(ia, ib)), f.poly_add(a, b));
                    assert_eq!(f.poly_from_index(f.idx_sub(ia, ib)), f.poly_sub(a, b));
                    assert_eq!(f.idx_degree(ia), a.degree());
                    assert_eq!(a.cmp(b), ia.cmp(&ib));
                }
            }
        }
    }
}
