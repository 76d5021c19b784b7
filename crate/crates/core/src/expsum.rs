//! Weyl sums `sum_{deg f < n} e(alpha_1 f^{r_1} + ... + alpha_k f^{r_k})`, the
//! normalized multiplier `M_n`, and the complete Gauss sums `Lambda(a, h)`.
//!
//! Sums of character values are accumulated exactly in a [`CycloSum`]: one
//! counter per `p`-th root of unity. Conversion to floating point happens only
//! when a complex value is requested.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arcs::{enumerate_centers, RationalPoint};
use crate::error::{Error, Result};
use crate::field::{Field, Poly};
use crate::torus::{expand_rational, TailSeries};

/// Default value of the minor-arc decay exponent used to label reports.
pub const DEFAULT_DELTA0: f64 = 0.05;

/// The exponent set `K = {r_1 < ... < r_k}` and its derived parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSystem {
    pub exponents: Vec<u32>,
    pub r_star: u32,
    /// `rho = 1 / rho_den` with `rho_den = 8 r*`.
    pub rho_den: u64,
    pub delta0: f64,
    pub coprime: Vec<bool>,
}

impl ExponentSystem {
    pub fn new(exponents: &[u32], p: u32) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::Invalid("exponent set is empty".into()));
        }
        if exponents.windows(2).any(|w| w[0] >= w[1]) || exponents[0] == 0 {
            return Err(Error::Invalid(format!(
                "exponents must be positive and strictly increasing, got {exponents:?}"
            )));
        }
        let r_star = *exponents.last().unwrap();
        Ok(ExponentSystem {
            exponents: exponents.to_vec(),
            r_star,
            rho_den: 8 * r_star as u64,
            delta0: DEFAULT_DELTA0,
            coprime: exponents.iter().map(|&r| r % p != 0).collect(),
        })
    }

    /// Sorts and deduplicates before building the system.
    pub fn from_unsorted(exponents: &[u32], p: u32) -> Result<Self> {
        let mut v = exponents.to_vec();
        v.sort_unstable();
        v.dedup();
        Self::new(&v, p)
    }

    pub fn k(&self) -> usize {
        self.exponents.len()
    }

    pub fn all_coprime(&self) -> bool {
        self.coprime.iter().all(|&c| c)
    }

    pub fn rho(&self) -> f64 {
        1.0 / self.rho_den as f64
    }
}

/// Exact sum of `p`-th roots of unity: `sum_j counts[j] * exp(2 pi i j / p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycloSum {
    pub counts: Vec<i64>,
}

impl CycloSum {
    pub fn new(p: u32) -> Self {
        CycloSum { counts: vec![0; p as usize] }
    }

    pub fn p(&self) -> u32 {
        self.counts.len() as u32
    }

    #[inline]
    pub fn add_root(&mut self, j: u32) {
        self.counts[j as usize] += 1;
    }

    pub fn merge(mut self, other: &CycloSum) -> CycloSum {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self
    }

    /// Number of summands (for sums built from roots only).
    pub fn total(&self) -> i64 {
        self.counts.iter().sum()
    }

    pub fn scale(&self, c: i64) -> CycloSum {
        CycloSum { counts: self.counts.iter().map(|&x| x * c).collect() }
    }

    /// Product in the group ring, i.e. cyclic convolution of the counters.
    pub fn mul(&self, other: &CycloSum) -> CycloSum {
        let p = self.counts.len();
        let mut out = vec![0i64; p];
        for (i, &a) in self.counts.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.counts.iter().enumerate() {
                out[(i + j) % p] += a * b;
            }
        }
        CycloSum { counts: out }
    }

    /// Complex conjugate: root `j` becomes root `-j`.
    pub fn conj(&self) -> CycloSum {
        let p = self.counts.len();
        CycloSum { counts: (0..p).map(|j| self.counts[(p - j) % p]).collect() }
    }

    /// Equality of the represented algebraic integers. The only relation among
    /// `p`-th roots of unity is `1 + zeta + ... + zeta^(p-1) = 0`, so two
    /// counter vectors agree in value iff they differ by a constant.
    pub fn value_eq(&self, other: &CycloSum) -> bool {
        let d0 = self.counts[0] - other.counts[0];
        self.counts.iter().zip(&other.counts).all(|(a, b)| a - b == d0)
    }

    pub fn is_zero_value(&self) -> bool {
        let c0 = self.counts[0];
        self.counts.iter().all(|&c| c == c0)
    }

    pub fn to_complex(&self) -> Complex64 {
        let p = self.counts.len();
        if p == 2 {
            return Complex64::new((self.counts[0] - self.counts[1]) as f64, 0.0);
        }
        // subtract the minimum first so the float sum sees small magnitudes
        let base = *self.counts.iter().min().unwrap_or(&0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &c) in self.counts.iter().enumerate() {
            let c = c - base;
            if c != 0 {
                acc += Complex64::from_polar(c as f64, TAU * j as f64 / p as f64);
            }
        }
        acc
    }
}

/// One coordinate of a frequency vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    /// The exact rational `a / h` with `h` monic.
    Rational { a: Poly, h: Poly },
    /// A truncated torus element.
    Tail(TailSeries),
}

impl Frequency {
    pub fn zero() -> Self {
        Frequency::Rational { a: Poly::zero(), h: Poly::one() }
    }

    /// Expansion to `precision` digits; exact for rationals.
    pub fn to_tail(&self, field: &Field, precision: usize) -> Result<TailSeries> {
        match self {
            Frequency::Rational { a, h } => expand_rational(field, a, h, precision),
            Frequency::Tail(t) => {
                if t.precision() < precision {
                    Err(Error::InsufficientPrecision { needed: precision, have: t.precision() })
                } else {
                    Ok(t.clone())
                }
            }
        }
    }
}

/// Splits a rational point into one exact frequency per coordinate.
pub fn rational_frequencies(c: &RationalPoint) -> Vec<Frequency> {
    c.a.iter().map(|a| Frequency::Rational { a: a.clone(), h: c.h.clone() }).collect()
}

/// Carry-less product of two `F_2[t]` bitmasks (no overflow check).
#[inline]
fn clmul(a: u128, b: u128) -> u128 {
    let mut out = 0u128;
    let mut a = a;
    let mut shift = 0;
    while a != 0 {
        if a & 1 == 1 {
            out ^= b << shift;
        }
        a >>= 1;
        shift += 1;
    }
    out
}

fn clpow(f: u128, e: u32) -> u128 {
    let mut result = 1u128;
    let mut base = f;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = clmul(result, base);
        }
        e >>= 1;
        if e > 0 {
            base = clmul(base, base);
        }
    }
    result
}

#[derive(Clone, Debug)]
enum PowerData {
    /// `q = 2`: bit `j` of entry `f` is the coefficient of `t^j` in `f^r`.
    Bits(Vec<Vec<u128>>),
    Generic(Vec<Vec<Poly>>),
}

/// The powers `f^{r_i}` for every `deg f < n`, computed once and reused for
/// many frequencies.
#[derive(Clone, Debug)]
pub struct PowerTable {
    field: Field,
    system: ExponentSystem,
    n: usize,
    count: u64,
    data: PowerData,
}

#[cfg(feature = "parallel")]
const CHUNK: usize = 1 << 12;

impl PowerTable {
    pub fn new(field: &Field, system: &ExponentSystem, n: usize) -> Result<Self> {
        let count = field.q_pow(n);
        field.check_count(count.saturating_mul(system.k() as u128))?;
        let count = count as u64;
        let max_deg = system.r_star as usize * n.saturating_sub(1);
        let data = if field.q() == 2 && max_deg < 128 {
            PowerData::Bits(
                system.exponents.iter().map(|&r| (0..count).map(|f| clpow(f as u128, r)).collect()).collect(),
            )
        } else {
            PowerData::Generic(
                system
                    .exponents
                    .iter()
                    .map(|&r| (0..count).map(|f| field.poly_pow(&field.poly_from_index(f), r)).collect())
                    .collect(),
            )
        };
        Ok(PowerTable { field: field.clone(), system: system.clone(), n, count, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn system(&self) -> &ExponentSystem {
        &self.system
    }

    /// Precision each coordinate needs so every residue is exact.
    pub fn required_precision(&self, i: usize) -> usize {
        self.system.exponents[i] as usize * self.n.saturating_sub(1) + 1
    }

    fn tails(&self, alphas: &[Frequency]) -> Result<Vec<TailSeries>> {
        if alphas.len() != self.system.k() {
            return Err(Error::Arity { expected: self.system.k(), got: alphas.len() });
        }
        alphas
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let t = a.to_tail(&self.field, self.required_precision(i))?;
                crate::torus::check_tail(&self.field, &t)?;
                Ok(t)
            })
            .collect()
    }

    /// Exact Weyl sum at the given frequencies.
    pub fn weyl_sum(&self, alphas: &[Frequency]) -> Result<CycloSum> {
        let tails = self.tails(alphas)?;
        Ok(self.weyl_sum_tails(&tails))
    }

    fn weyl_sum_tails(&self, tails: &[TailSeries]) -> CycloSum {
        let p = self.field.p();
        let count = self.count as usize;
        match &self.data {
            PowerData::Bits(powers) => {
                let masks: Vec<u128> = tails
                    .iter()
                    .map(|t| {
                        t.dense()
                            .iter()
                            .take(128)
                            .enumerate()
                            .fold(0u128, |m, (j, &c)| if c != 0 { m | (1u128 << j) } else { m })
                    })
                    .collect();
                let odd = |lo: usize, hi: usize| -> i64 {
                    let mut n_odd = 0i64;
                    for f in lo..hi {
                        let mut bits = 0u32;
                        for (pw, m) in powers.iter().zip(&masks) {
                            bits += (pw[f] & m).count_ones();
                        }
                        n_odd += (bits & 1) as i64;
                    }
                    n_odd
                };
                let n_odd = chunked_sum(count, odd);
                CycloSum { counts: vec![count as i64 - n_odd, n_odd] }
            }
            PowerData::Generic(powers) => {
                let field = &self.field;
                let partial = |lo: usize, hi: usize| -> CycloSum {
                    let mut acc = CycloSum::new(p);
                    for f in lo..hi {
                        let mut res = 0;
                        for (pw, t) in powers.iter().zip(tails) {
                            for (j, &c) in pw[f].coeffs().iter().enumerate() {
                                if c != 0 {
                                    res = field.add(res, field.mul(c, t.dense()[j]));
                                }
                            }
                        }
                        acc.add_root(field.trace(res));
                    }
                    acc
                };
                chunked_fold(count, p, partial)
            }
        }
    }

    /// `M_n(alpha)`.
    pub fn multiplier(&self, alphas: &[Frequency]) -> Result<Complex64> {
        Ok(self.weyl_sum(alphas)?.to_complex() / self.count as f64)
    }
}

#[cfg(feature = "parallel")]
fn chunked_sum(count: usize, f: impl Fn(usize, usize) -> i64 + Sync) -> i64 {
    use rayon::prelude::*;
    let chunks = count.div_ceil(CHUNK);
    (0..chunks).into_par_iter().map(|c| f(c * CHUNK, ((c + 1) * CHUNK).min(count))).sum()
}

#[cfg(not(feature = "parallel"))]
fn chunked_sum(count: usize, f: impl Fn(usize, usize) -> i64) -> i64 {
    f(0, count)
}

#[cfg(feature = "parallel")]
fn chunked_fold(count: usize, p: u32, f: impl Fn(usize, usize) -> CycloSum + Sync) -> CycloSum {
    use rayon::prelude::*;
    let chunks = count.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c * CHUNK, ((c + 1) * CHUNK).min(count)))
        .reduce(|| CycloSum::new(p), |a, b| a.merge(&b))
}

#[cfg(not(feature = "parallel"))]
fn chunked_fold(count: usize, _p: u32, f: impl Fn(usize, usize) -> CycloSum) -> CycloSum {
    f(0, count)
}

/// Exact `sum_{deg f < n} e(sum_i alpha_i f^{r_i})`.
pub fn weyl_sum(field: &Field, alphas: &[Frequency], system: &ExponentSystem, n: usize) -> Result<CycloSum> {
    if alphas.len() != system.k() {
        return Err(Error::Arity { expected: system.k(), got: alphas.len() });
    }
    PowerTable::new(field, system, n)?.weyl_sum(alphas)
}

/// `M_n(alpha) = q^-n * weyl_sum`.
pub fn multiplier_m(field: &Field, alphas: &[Frequency], system: &ExponentSystem, n: usize) -> Result<Complex64> {
    Ok(weyl_sum(field, alphas, system, n)?.to_complex() / field.q_pow(n) as f64)
}

/// A complete Gauss sum with its exact backing value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussSum {
    /// Unnormalized `sum_{deg f < deg h} e(...)`.
    pub cyclo: CycloSum,
    pub deg_h: usize,
    /// `Lambda(a, h) = q^-deg h * cyclo`.
    pub value: Complex64,
}

/// Row vectors `v_i[j] = [t^(d-1)] (a_i t^j mod h)`, so that
/// `res(a_i F / h) = sum_j F_j v_i[j]` for `deg F < d`.
fn residue_functionals(field: &Field, a: &[Poly], h: &Poly) -> Result<Vec<Vec<u32>>> {
    let d = h.degree().unwrap_or(0);
    a.iter()
        .map(|ai| {
            let mut cur = field.poly_rem(ai, h)?;
            let mut row = Vec::with_capacity(d);
            for _ in 0..d {
                row.push(cur.coeff(d - 1));
                cur = field.poly_rem(&field.poly_shift(&cur, 1), h)?;
            }
            Ok(row)
        })
        .collect()
}

/// `f^{r_i} mod h` for all `deg f < deg h`, one vector per exponent.
fn reduced_powers(field: &Field, system: &ExponentSystem, h: &Poly) -> Result<Vec<Vec<Poly>>> {
    let d = h.degree().unwrap_or(0);
    let fs = field.enumerate_degree_lt(d)?;
    system.exponents.iter().map(|&r| fs.iter().map(|f| field.poly_powmod(f, r, h)).collect()).collect()
}

fn gauss_from_parts(field: &Field, rows: &[Vec<u32>], powers: &[Vec<Poly>], d: usize) -> CycloSum {
    let mut acc = CycloSum::new(field.p());
    let count = powers.first().map(|v| v.len()).unwrap_or(1);
    for f in 0..count {
        let mut res = 0;
        for (row, pw) in rows.iter().zip(powers) {
            for (j, &c) in pw[f].coeffs().iter().enumerate() {
                if c != 0 && j < d {
                    res = field.add(res, field.mul(c, row[j]));
                }
            }
        }
        acc.add_root(field.trace(res));
    }
    acc
}

/// Validates `a / h` as a reduced rational point.
pub fn check_reduced(field: &Field, a: &[Poly], h: &Poly) -> Result<()> {
    field.check_poly(h)?;
    if !h.is_monic() {
        return Err(Error::NotMonic(h.to_string()));
    }
    let d = h.degree().unwrap();
    for ai in a {
        field.check_poly(ai)?;
        if ai.degree().is_some_and(|da| da >= d) {
            return Err(Error::Degree(format!("deg {ai} >= deg {h}")));
        }
    }
    let mut items: Vec<Poly> = a.to_vec();
    items.push(h.clone());
    if field.gcd_monic(&items)? != Poly::one() {
        return Err(Error::NotReduced(format!("gcd of numerators and {h} is not 1")));
    }
    Ok(())
}

/// `Lambda(a, h) = q^-deg h * sum_{deg f < deg h} e((a_1 f^{r_1} + ... ) / h)`.
pub fn gauss_sum(field: &Field, a: &[Poly], h: &Poly, system: &ExponentSystem) -> Result<GaussSum> {
    if a.len() != system.k() {
        return Err(Error::Arity { expected: system.k(), got: a.len() });
    }
    check_reduced(field, a, h)?;
    let d = h.degree().unwrap();
    field.check_count(field.q_pow(d))?;
    let rows = residue_functionals(field, a, h)?;
    let powers = reduced_powers(field, system, h)?;
    let cyclo = gauss_from_parts(field, &rows, &powers, d);
    let value = cyclo.to_complex() / field.q_pow(d) as f64;
    Ok(GaussSum { cyclo, deg_h: d, value })
}

pub fn gauss_sum_at(field: &Field, c: &RationalPoint, system: &ExponentSystem) -> Result<GaussSum> {
    gauss_sum(field, &c.a, &c.h, system)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussRow {
    pub center: RationalPoint,
    pub sum: GaussSum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussTable {
    pub s: usize,
    pub rows: Vec<GaussRow>,
    pub max_abs: f64,
}

impl GaussTable {
    pub fn lookup(&self, c: &RationalPoint) -> Option<&GaussSum> {
        self.rows.iter().find(|r| &r.center == c).map(|r| &r.sum)
    }
}

/// `Lambda(a, h)` for every monic `h` of degree `s` and every `a` in `A_h`.
pub fn gauss_table(field: &Field, s: usize, system: &ExponentSystem) -> Result<GaussTable> {
    let k = system.k();
    let work = field.q_pow(s).saturating_mul(field.q_pow(k * s)).saturating_mul(field.q_pow(s));
    field.check_count(work)?;
    let centers = enumerate_centers(field, s, k)?;
    let norm = field.q_pow(s) as f64;
    let mut rows = Vec::with_capacity(centers.len());
    let mut current_h: Option<(Poly, Vec<Vec<Poly>>)> = None;
    for c in centers {
        if current_h.as_ref().map(|(h, _)| h != &c.h).unwrap_or(true) {
            current_h = Some((c.h.clone(), reduced_powers(field, system, &c.h)?));
        }
        let powers = &current_h.as_ref().unwrap().1;
        let rows_a = residue_functionals(field, &c.a, &c.h)?;
        let cyclo = gauss_from_parts(field, &rows_a, powers, s);
        let value = cyclo.to_complex() / norm;
        rows.push(GaussRow { center: c, sum: GaussSum { cyclo, deg_h: s, value } });
    }
    let max_abs = rows.iter().map(|r| r.sum.value.norm()).fold(0.0, f64::max);
    Ok(GaussTable { s, rows, max_abs })
}
