//! The discrete operators on `l^2(F_q[t]^k)`, computed in physical space from
//! their explicit kernels:
//!
//! * `M_n g(x) = q^-n sum_{deg u < n} g(x_1 + u^{r_1}, ..., x_k + u^{r_k})`
//! * `D_{s,n} g(x) = q^{-sum r_i n} sum_{a/h} sum_{deg f_i < r_i n} e(-f.a/h) g(x + f)`
//! * `C_{s,n}`: the same kernel with each center weighted by `Lambda(a, h)`
//! * `L_{s,n} F(x) = q^{-sum (r_i n - R_s)} sum_{deg u_i < r_i n - R_s} F(x + Q_s u)`
//! * `G_s g(x) = q^{-k R_s} sum_{deg b_i < R_s} sum_{a/h} e(-b.a/h) g(x + b)`
//!
//! The character weight `sum_{a/h} e(-f.a/h)` depends on `f` only through
//! `f mod Q_s`, so it is tabulated once over residues.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arcs::{enumerate_centers, rational_gap_at_most, Ratio, RationalPoint, CONFORMING, NONCONFORMING};
use crate::error::{Error, Result};
use crate::expsum::{gauss_table, ExponentSystem, Frequency, GaussTable};
use crate::field::{Field, Poly};
use crate::torus::{expand_rational, ord_at_most, residue_mul, tail_sub};

/// A complex function on `F_q[t]^k` supported in the box `deg x_i < B_i`,
/// stored densely. Point `x` lives at `sum_i index(x_i) * stride_i` with
/// `stride_0 = 1` and `stride_{i+1} = stride_i * q^{B_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub q: u32,
    pub box_degs: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(field: &Field, box_degs: &[usize]) -> Result<Self> {
        let total: u128 = box_degs.iter().map(|&b| field.q_pow(b)).fold(1u128, |a, b| a.saturating_mul(b));
        field.check_count(total)?;
        Ok(GridFunction {
            q: field.q(),
            box_degs: box_degs.to_vec(),
            values: vec![Complex64::new(0.0, 0.0); total as usize],
        })
    }

    /// `delta_x` on the given box.
    pub fn delta(field: &Field, box_degs: &[usize], at: &[u64]) -> Result<Self> {
        let mut g = Self::zeros(field, box_degs)?;
        let i = g.flat(at).ok_or_else(|| Error::Invalid("delta point outside its box".into()))?;
        g.values[i] = Complex64::new(1.0, 0.0);
        Ok(g)
    }

    /// Random values on a box. Each point is nonzero with probability
    /// `density`; values are real and nonnegative when `nonneg` is set.
    pub fn random(field: &Field, box_degs: &[usize], density: f64, nonneg: bool, rng: &mut impl Rng) -> Result<Self> {
        let mut g = Self::zeros(field, box_degs)?;
        for v in g.values.iter_mut() {
            if rng.gen::<f64>() < density {
                *v = if nonneg {
                    Complex64::new(rng.gen_range(0.0..1.0), 0.0)
                } else {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                };
            }
        }
        Ok(g)
    }

    pub fn k(&self) -> usize {
        self.box_degs.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn side(&self, i: usize) -> u64 {
        (self.q as u64).pow(self.box_degs[i] as u32)
    }

    /// Flat position of a point given by coordinate indices, if inside the box.
    pub fn flat(&self, idx: &[u64]) -> Option<usize> {
        let mut pos = 0u64;
        let mut stride = 1u64;
        for (i, &x) in idx.iter().enumerate() {
            let side = self.side(i);
            if x >= side {
                return None;
            }
            pos += x * stride;
            stride *= side;
        }
        Some(pos as usize)
    }

    /// Coordinate indices of a flat position.
    pub fn point(&self, flat: usize) -> Vec<u64> {
        let mut rest = flat as u64;
        (0..self.k())
            .map(|i| {
                let side = self.side(i);
                let x = rest % side;
                rest /= side;
                x
            })
            .collect()
    }

    /// Value at a point (zero outside the box).
    pub fn get(&self, idx: &[u64]) -> Complex64 {
        self.flat(idx).map(|i| self.values[i]).unwrap_or_default()
    }

    pub fn set(&mut self, idx: &[u64], v: Complex64) -> Result<()> {
        let i = self.flat(idx).ok_or_else(|| Error::Invalid("point outside the box".into()))?;
        self.values[i] = v;
        Ok(())
    }

    /// Nonzero entries as `(flat, value)`.
    pub fn support(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.values.iter().copied().enumerate().filter(|(_, v)| *v != Complex64::default())
    }

    /// Squared l2 norm.
    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn abs(&self) -> GridFunction {
        GridFunction {
            q: self.q,
            box_degs: self.box_degs.clone(),
            values: self.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        GridFunction { q: self.q, box_degs: self.box_degs.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    /// The same function laid out on a box at least as large in every coordinate.
    pub fn extend_to(&self, field: &Field, box_degs: &[usize]) -> Result<GridFunction> {
        if box_degs.len() != self.k() {
            return Err(Error::Arity { expected: self.k(), got: box_degs.len() });
        }
        if box_degs == self.box_degs.as_slice() {
            return Ok(self.clone());
        }
        let mut out = GridFunction::zeros(field, box_degs)?;
        for (pos, v) in self.support() {
            let idx = self.point(pos);
            let j = out.flat(&idx).ok_or_else(|| Error::Invalid("target box is smaller".into()))?;
            out.values[j] = v;
        }
        Ok(out)
    }

    fn union_box(&self, other: &GridFunction) -> Vec<usize> {
        self.box_degs.iter().zip(&other.box_degs).map(|(&a, &b)| a.max(b)).collect()
    }

    pub fn add(&self, field: &Field, other: &GridFunction) -> Result<GridFunction> {
        let bx = self.union_box(other);
        let mut a = self.extend_to(field, &bx)?;
        let b = other.extend_to(field, &bx)?;
        for (x, y) in a.values.iter_mut().zip(&b.values) {
            *x += y;
        }
        Ok(a)
    }

    pub fn sub(&self, field: &Field, other: &GridFunction) -> Result<GridFunction> {
        self.add(field, &other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `max_x |self(x) - other(x)|` over the union of both boxes.
    pub fn max_abs_diff(&self, field: &Field, other: &GridFunction) -> Result<f64> {
        Ok(self.sub(field, other)?.sup())
    }

    /// JSON form `{k, box, entries: [[[x_1, ..., x_k], re, im], ...]}` with
    /// nonzero entries only and coordinates written as polynomials.
    pub fn to_json(&self, field: &Field) -> Value {
        let entries: Vec<Value> = self
            .support()
            .map(|(pos, v)| {
                let xs: Vec<String> = self.point(pos).iter().map(|&i| field.poly_from_index(i).to_string()).collect();
                json!([xs, v.re, v.im])
            })
            .collect();
        json!({ "k": self.k(), "box": self.box_degs, "entries": entries })
    }

    pub fn from_json(field: &Field, v: &Value) -> Result<GridFunction> {
        let bad = |m: &str| Error::Parse(format!("grid function JSON: {m}"));
        let k = v["k"].as_u64().ok_or_else(|| bad("missing k"))? as usize;
        let box_degs: Vec<usize> = v["box"]
            .as_array()
            .ok_or_else(|| bad("missing box"))?
            .iter()
            .map(|b| b.as_u64().map(|b| b as usize).ok_or_else(|| bad("box entries must be integers")))
            .collect::<Result<_>>()?;
        if box_degs.len() != k {
            return Err(Error::Arity { expected: k, got: box_degs.len() });
        }
        let mut g = GridFunction::zeros(field, &box_degs)?;
        for e in v["entries"].as_array().ok_or_else(|| bad("missing entries"))? {
            let xs = e[0].as_array().ok_or_else(|| bad("entry point must be an array"))?;
            if xs.len() != k {
                return Err(Error::Arity { expected: k, got: xs.len() });
            }
            let mut idx = Vec::with_capacity(k);
            for (i, x) in xs.iter().enumerate() {
                let p = field.parse_poly(x.as_str().ok_or_else(|| bad("coordinates must be strings"))?)?;
                if p.degree().is_some_and(|d| d >= box_degs[i]) {
                    return Err(Error::Degree(format!("coordinate {p} outside box degree {}", box_degs[i])));
                }
                idx.push(field.poly_index(&p)?);
            }
            let re = e[1].as_f64().ok_or_else(|| bad("re must be a number"))?;
            let im = e[2].as_f64().unwrap_or(0.0);
            g.set(&idx, Complex64::new(re, im))?;
        }
        Ok(g)
    }
}

/// Parameters of the degree-`s` operators at scale `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub system: ExponentSystem,
    pub s: usize,
    pub n: usize,
    pub rho: Ratio,
    /// `min { n : s < rho n }`
    pub ns: usize,
    pub qs: Poly,
    /// `deg Q_s = s q^s`
    pub rs: usize,
    pub centers: Vec<RationalPoint>,
    pub conforming: bool,
}

impl OperatorParams {
    pub fn new(field: &Field, system: &ExponentSystem, s: usize, n: usize) -> Result<Self> {
        let qs = field.product_of_monic(s)?;
        let rs = qs.degree().unwrap_or(0);
        let rho = Ratio { num: 1, den: system.rho_den };
        Ok(OperatorParams {
            system: system.clone(),
            s,
            n,
            rho,
            ns: Self::ns_for(s, rho),
            qs,
            rs,
            centers: enumerate_centers(field, s, system.k())?,
            conforming: true,
        })
    }

    fn ns_for(s: usize, rho: Ratio) -> usize {
        // s < n num/den  <=>  n > s den/num
        (s as u64 * rho.den / rho.num) as usize + 1
    }

    /// Replaces `rho`; every later output is stamped nonconforming.
    pub fn with_rho(mut self, rho: Ratio) -> Self {
        self.rho = rho;
        self.ns = Self::ns_for(self.s, rho);
        self.conforming = false;
        self
    }

    /// Lifts the range checks; every later output is stamped nonconforming.
    pub fn relaxed(mut self) -> Self {
        self.conforming = false;
        self
    }

    pub fn at_n(&self, n: usize) -> Self {
        let mut p = self.clone();
        p.n = n;
        p
    }

    pub fn stamp(&self) -> &'static str {
        if self.conforming {
            CONFORMING
        } else {
            NONCONFORMING
        }
    }

    /// `s < rho n`.
    pub fn active(&self) -> bool {
        (self.s as u64) * self.rho.den < (self.n as u64) * self.rho.num
    }

    /// `H_s = max(N_s, R_s^4)`, the start of the large scales.
    pub fn h_s(&self) -> usize {
        self.ns.max(self.rs.pow(4))
    }

    pub fn k(&self) -> usize {
        self.system.k()
    }

    fn r(&self, i: usize) -> usize {
        self.system.exponents[i] as usize
    }
}

/// `Q_s`-residues of every polynomial with index below `count`, as indices.
fn residues_mod(field: &Field, modulus: &Poly, count: u64) -> Result<Vec<u64>> {
    let d = modulus.degree().unwrap_or(0);
    if d == 0 {
        return Ok(vec![0; count as usize]);
    }
    let digits = field.idx_degree(count.saturating_sub(1)).map(|x| x + 1).unwrap_or(0);
    let mut powers = Vec::with_capacity(digits);
    let mut cur = Poly::one();
    for _ in 0..digits {
        let r = field.poly_rem(&cur, modulus)?;
        powers.push(field.poly_index(&r)?);
        cur = field.poly_shift(&r, 1);
    }
    let q = field.q() as u64;
    Ok((0..count)
        .map(|f| {
            let mut acc = 0u64;
            let mut rest = f;
            let mut j = 0;
            while rest > 0 {
                let c = (rest % q) as u32;
                if c != 0 {
                    acc = field.idx_add(acc, field.idx_scale(c, powers[j]));
                }
                rest /= q;
                j += 1;
            }
            acc
        })
        .collect())
}

/// Table of `sum_c w_c e(-r . a_c / h_c)` over residue tuples `r` with
/// `deg r_i < R_s`; tuple `r` lives at `sum_i index(r_i) q^{R_s i}`.
fn character_table(field: &Field, params: &OperatorParams, weights: &[Complex64]) -> Result<Vec<Complex64>> {
    let k = params.k();
    let rs = params.rs;
    let per = field.q_pow(rs);
    let size = per.saturating_pow(k as u32);
    field.check_count(size.saturating_mul(params.centers.len().max(1) as u128))?;
    let (per, size) = (per as u64, size as usize);
    let p = field.p();
    let roots: Vec<Complex64> = (0..p).map(|j| crate::torus::CharValue { exp: j, p }.to_complex()).collect();
    // per center and coordinate, the functional r -> [t^{d-1}](r a_i mod h)
    let mut table = vec![Complex64::default(); size];
    for (c, &w) in params.centers.iter().zip(weights) {
        let d = c.deg_h();
        let rows: Vec<Vec<u32>> =
            c.a.iter()
                .map(|ai| {
                    let mut cur = field.poly_rem(ai, &c.h)?;
                    let mut row = Vec::with_capacity(rs);
                    for _ in 0..rs {
                        row.push(if d == 0 { 0 } else { cur.coeff(d - 1) });
                        cur = field.poly_rem(&field.poly_shift(&cur, 1), &c.h)?;
                    }
                    Ok(row)
                })
                .collect::<Result<_>>()?;
        // residue functional per coordinate over all residues
        let per_coord: Vec<Vec<u32>> = rows
            .iter()
            .map(|row| {
                (0..per)
                    .map(|ri| {
                        let rp = field.poly_from_index(ri);
                        let mut acc = 0;
                        for (j, &cj) in rp.coeffs().iter().enumerate() {
                            acc = field.add(acc, field.mul(cj, row[j]));
                        }
                        field.trace(acc)
                    })
                    .collect()
            })
            .collect();
        for (slot, entry) in table.iter_mut().enumerate() {
            let mut rest = slot as u64;
            let mut e = 0u32;
            for coord in per_coord.iter().take(k) {
                e += coord[(rest % per) as usize];
                rest /= per;
            }
            // e(-x) is the conjugate root
            let e = (p - e % p) % p;
            *entry += w * roots[e as usize];
        }
    }
    Ok(table)
}

/// `out(x) += norm * W(f) * g(x + f)`, summed over offset tuples `f`, where
/// `W(f) = wtab[sum_i contrib_i[pos_i]]`.
fn scatter(
    field: &Field,
    g: &GridFunction,
    out_box: &[usize],
    offsets: &[Vec<u64>],
    contrib: &[Vec<usize>],
    wtab: &[Complex64],
    norm: f64,
) -> Result<GridFunction> {
    let mut out = GridFunction::zeros(field, out_box)?;
    let k = g.k();
    let combos: u128 = offsets.iter().map(|o| o.len() as u128).product();
    let support: Vec<(usize, Complex64)> = g.support().collect();
    field.check_count(combos.saturating_mul(support.len() as u128))?;
    let strides: Vec<u64> = {
        let mut s = Vec::with_capacity(k);
        let mut acc = 1u64;
        for i in 0..k {
            s.push(acc);
            acc *= out.side(i);
        }
        s
    };
    for (pos, v) in support {
        let y = g.point(pos);
        let v = v * norm;
        // odometer over offset positions
        let mut at = vec![0usize; k];
        loop {
            let mut flat = 0u64;
            let mut wi = 0usize;
            for i in 0..k {
                let x = field.idx_sub(y[i], offsets[i][at[i]]);
                flat += x * strides[i];
                wi += contrib[i][at[i]];
            }
            let w = wtab[wi];
            if w != Complex64::default() {
                out.values[flat as usize] += w * v;
            }
            let mut i = 0;
            loop {
                if i == k {
                    break;
                }
                at[i] += 1;
                if at[i] < offsets[i].len() {
                    break;
                }
                at[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    Ok(out)
}

fn check_arity(g: &GridFunction, k: usize) -> Result<()> {
    if g.k() != k {
        return Err(Error::Arity { expected: k, got: g.k() });
    }
    Ok(())
}

/// `M_n g`, supported in `deg x_i < max(B_i, r_i (n-1) + 1)`.
pub fn apply_m(field: &Field, g: &GridFunction, system: &ExponentSystem, n: usize) -> Result<GridFunction> {
    check_arity(g, system.k())?;
    let count = field.q_pow(n);
    let support: Vec<(usize, Complex64)> = g.support().collect();
    field.check_count(count.saturating_mul(support.len() as u128))?;
    let out_box: Vec<usize> = g
        .box_degs
        .iter()
        .zip(&system.exponents)
        .map(|(&b, &r)| if n == 0 { b } else { b.max(r as usize * (n - 1) + 1) })
        .collect();
    let mut out = GridFunction::zeros(field, &out_box)?;
    let powers: Vec<Vec<u64>> = system
        .exponents
        .iter()
        .map(|&r| {
            (0..count as u64)
                .map(|u| field.poly_index(&field.poly_pow(&field.poly_from_index(u), r)))
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<_>>()?;
    let norm = 1.0 / count as f64;
    let mut x = vec![0u64; g.k()];
    for (pos, v) in support {
        let y = g.point(pos);
        for u in 0..count as usize {
            for i in 0..g.k() {
                x[i] = field.idx_sub(y[i], powers[i][u]);
            }
            let j = out.flat(&x).expect("output box covers every shift");
            out.values[j] += v * norm;
        }
    }
    Ok(out)
}

/// `g^(alpha) = sum_x g(x) e(-x . alpha)`.
pub fn fourier_at(field: &Field, g: &GridFunction, alpha: &[Frequency]) -> Result<Complex64> {
    check_arity(g, alpha.len())?;
    let p = field.p();
    // per coordinate: character exponent of x_i alpha_i for every x_i in the box
    let mut chars = Vec::with_capacity(g.k());
    for (i, a) in alpha.iter().enumerate() {
        let side = g.side(i);
        let b = g.box_degs[i];
        let row: Vec<u32> = match a {
            Frequency::Rational { a, h } => {
                let t = expand_rational(field, a, h, b.max(1))?;
                (0..side)
                    .map(|x| residue_mul(field, &field.poly_from_index(x), &t).map(|r| field.trace(r)))
                    .collect::<Result<_>>()?
            }
            Frequency::Tail(t) => (0..side)
                .map(|x| residue_mul(field, &field.poly_from_index(x), t).map(|r| field.trace(r)))
                .collect::<Result<_>>()?,
        };
        chars.push(row);
    }
    let roots: Vec<Complex64> = (0..p).map(|j| crate::torus::CharValue { exp: j, p }.to_complex()).collect();
    let mut acc = Complex64::default();
    for (pos, v) in g.support() {
        let x = g.point(pos);
        let e: u32 = x.iter().enumerate().map(|(i, &xi)| chars[i][xi as usize]).sum::<u32>() % p;
        acc += v * roots[((p - e) % p) as usize];
    }
    Ok(acc)
}

/// `D_{s,n}^(alpha)`: the number of centers `a/h` with `alpha - a/h` in
/// `B_n = { ord beta_i < -r_i n }`. Disjointness makes this 0 or 1.
pub fn multiplier_d(field: &Field, alpha: &[Frequency], params: &OperatorParams) -> Result<u32> {
    if alpha.len() != params.k() {
        return Err(Error::Arity { expected: params.k(), got: alpha.len() });
    }
    if !params.active() {
        return Ok(0);
    }
    let mut hits = 0;
    'centers: for c in &params.centers {
        for (i, ai) in alpha.iter().enumerate() {
            let bound = -((params.r(i) * params.n) as i64) - 1;
            let inside = match ai {
                Frequency::Rational { a, h } => rational_gap_at_most(field, a, h, &c.a[i], &c.h, bound)?,
                Frequency::Tail(t) => {
                    let ct = expand_rational(field, &c.a[i], &c.h, t.precision())?;
                    ord_at_most(&tail_sub(field, t, &ct), bound)?
                }
            };
            if !inside {
                continue 'centers;
            }
        }
        hits += 1;
    }
    Ok(hits)
}

fn modulated_average(
    field: &Field,
    g: &GridFunction,
    params: &OperatorParams,
    weights: &[Complex64],
) -> Result<GridFunction> {
    check_arity(g, params.k())?;
    let k = params.k();
    let out_box: Vec<usize> = (0..k).map(|i| g.box_degs[i].max(params.r(i) * params.n)).collect();
    if !params.active() {
        return GridFunction::zeros(field, &out_box);
    }
    let wtab = character_table(field, params, weights)?;
    let per = field.q_pow(params.rs) as usize;
    let mut offsets = Vec::with_capacity(k);
    let mut contrib = Vec::with_capacity(k);
    let mut total_deg = 0usize;
    for i in 0..k {
        let deg = params.r(i) * params.n;
        total_deg += deg;
        let count = field.q_pow(deg);
        field.check_count(count)?;
        let res = residues_mod(field, &params.qs, count as u64)?;
        let stride = per.pow(i as u32);
        contrib.push(res.iter().map(|&r| r as usize * stride).collect());
        offsets.push((0..count as u64).collect());
    }
    let norm = 1.0 / field.q_pow(total_deg) as f64;
    scatter(field, g, &out_box, &offsets, &contrib, &wtab, norm)
}

/// `D_{s,n} g`, supported in `deg x_i < max(B_i, r_i n)`; zero unless `s < rho n`.
pub fn apply_d(field: &Field, g: &GridFunction, params: &OperatorParams) -> Result<GridFunction> {
    let ones = vec![Complex64::new(1.0, 0.0); params.centers.len()];
    modulated_average(field, g, params, &ones)
}

/// `C_{s,n} g`: the `D_{s,n}` kernel with each center weighted by `Lambda(a, h)`.
pub fn apply_c_piece(
    field: &Field,
    g: &GridFunction,
    params: &OperatorParams,
    table: &GaussTable,
) -> Result<GridFunction> {
    let weights: Vec<Complex64> = params
        .centers
        .iter()
        .map(|c| {
            table.lookup(c).map(|s| s.value).ok_or_else(|| Error::Invalid(format!("Gauss table has no row for {c}")))
        })
        .collect::<Result<_>>()?;
    modulated_average(field, g, params, &weights)
}

#[derive(Clone, Debug)]
pub struct CResult {
    pub value: GridFunction,
    /// Degrees `s` that were summed.
    pub pieces: Vec<usize>,
    /// True when `max_s` cut the sum short of `s < rho n`.
    pub truncated: bool,
}

/// `C_n g = sum_{s < rho n} C_{s,n} g`, optionally truncated at `max_s`.
pub fn apply_c(
    field: &Field,
    g: &GridFunction,
    system: &ExponentSystem,
    n: usize,
    max_s: Option<usize>,
) -> Result<CResult> {
    check_arity(g, system.k())?;
    let out_box: Vec<usize> = g.box_degs.iter().zip(&system.exponents).map(|(&b, &r)| b.max(r as usize * n)).collect();
    let mut acc = GridFunction::zeros(field, &out_box)?;
    let mut pieces = Vec::new();
    let mut truncated = false;
    let mut s = 0;
    loop {
        let params = OperatorParams::new(field, system, s, n)?;
        if !params.active() {
            break;
        }
        if max_s.is_some_and(|m| s > m) {
            truncated = true;
            break;
        }
        let table = gauss_table(field, s, system)?;
        let piece = apply_c_piece(field, g, &params, &table)?;
        acc = acc.add(field, &piece)?;
        pieces.push(s);
        s += 1;
    }
    Ok(CResult { value: acc, pieces, truncated })
}

/// `||M_n g - C_n g||^2` for each `n` in the range.
pub fn equivalence_probe(
    field: &Field,
    g: &GridFunction,
    system: &ExponentSystem,
    ns: std::ops::RangeInclusive<usize>,
) -> Result<Vec<(usize, f64)>> {
    ns.map(|n| {
        let m = apply_m(field, g, system, n)?;
        let c = apply_c(field, g, system, n, None)?.value;
        Ok((n, m.sub(field, &c)?.norm2()))
    })
    .collect()
}

fn check_large_range(params: &OperatorParams) -> Result<()> {
    if !params.active() {
        return Err(Error::Range(format!("s = {} is not below rho n = {} * {}", params.s, params.rho, params.n)));
    }
    for i in 0..params.k() {
        if params.r(i) * params.n < params.rs {
            return Err(Error::Range(format!(
                "r_{} n = {} is below R_s = {}",
                i + 1,
                params.r(i) * params.n,
                params.rs
            )));
        }
    }
    if params.conforming && params.n < params.h_s() {
        return Err(Error::Range(format!(
            "n = {} is below H_s = max(N_s, R_s^4) = {}; relax the parameters to run anyway",
            params.n,
            params.h_s()
        )));
    }
    Ok(())
}

/// `L_{s,n} F`, supported in `deg x_i < max(B_i, r_i n)`.
pub fn apply_l(field: &Field, f: &GridFunction, params: &OperatorParams) -> Result<GridFunction> {
    check_arity(f, params.k())?;
    check_large_range(params)?;
    let k = params.k();
    let out_box: Vec<usize> = (0..k).map(|i| f.box_degs[i].max(params.r(i) * params.n)).collect();
    let mut offsets = Vec::with_capacity(k);
    let mut total = 0usize;
    for i in 0..k {
        let deg = params.r(i) * params.n - params.rs;
        total += deg;
        let count = field.q_pow(deg);
        field.check_count(count)?;
        offsets.push(
            (0..count as u64)
                .map(|u| field.poly_index(&field.poly_mul(&params.qs, &field.poly_from_index(u))))
                .collect::<Result<Vec<u64>>>()?,
        );
    }
    let contrib: Vec<Vec<usize>> = offsets.iter().map(|o| vec![0; o.len()]).collect();
    let norm = 1.0 / field.q_pow(total) as f64;
    scatter(field, f, &out_box, &offsets, &contrib, &[Complex64::new(1.0, 0.0)], norm)
}

/// `G_s g`, supported in `deg x_i < max(B_i, R_s)`.
pub fn build_g(field: &Field, g: &GridFunction, params: &OperatorParams) -> Result<GridFunction> {
    check_arity(g, params.k())?;
    let k = params.k();
    let ones = vec![Complex64::new(1.0, 0.0); params.centers.len()];
    let wtab = character_table(field, params, &ones)?;
    let per = field.q_pow(params.rs);
    let out_box: Vec<usize> = g.box_degs.iter().map(|&b| b.max(params.rs)).collect();
    let offsets: Vec<Vec<u64>> = (0..k).map(|_| (0..per as u64).collect()).collect();
    let contrib: Vec<Vec<usize>> =
        (0..k).map(|i| (0..per as usize).map(|r| r * (per as usize).pow(i as u32)).collect()).collect();
    let norm = 1.0 / field.q_pow(k * params.rs) as f64;
    scatter(field, g, &out_box, &offsets, &contrib, &wtab, norm)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleReport {
    #[serde(rename = "maxAbsError")]
    pub max_abs_error: f64,
    pub points: usize,
    pub pass: bool,
    pub stamp: String,
}

/// Pointwise comparison of `D_{s,n} g` with `L_{s,n} G_s g`.
pub fn verify_large_scale_identity(
    field: &Field,
    g: &GridFunction,
    params: &OperatorParams,
) -> Result<LargeScaleReport> {
    check_large_range(params)?;
    let d = apply_d(field, g, params)?;
    let l = apply_l(field, &build_g(field, g, params)?, params)?;
    let err = d.max_abs_diff(field, &l)?;
    let points = d.len().max(l.len());
    Ok(LargeScaleReport { max_abs_error: err, points, pass: err <= 1e-9, stamp: params.stamp().to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f2() -> Field {
        Field::prime(2).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn k1() -> ExponentSystem {
        ExponentSystem::new(&[1], 2).unwrap()
    }

    #[test]
    fn m_examples() {
        let f = f2();
        let d = GridFunction::delta(&f, &[1], &[0]).unwrap();
        let m = apply_m(&f, &d, &k1(), 1).unwrap();
        // (M_1 delta_0)(x) = (delta_0(x) + delta_0(x+1)) / 2
        assert_eq!(m.get(&[0]), c(0.5));
        assert_eq!(m.get(&[1]), c(0.5));
        assert_eq!(apply_m(&f, &d, &k1(), 0).unwrap(), d);

        let mut ones = GridFunction::zeros(&f, &[6]).unwrap();
        ones.values.iter_mut().for_each(|v| *v = c(1.0));
        let m = apply_m(&f, &ones, &k1(), 2).unwrap();
        // deep inside: x + u stays in the box for every deg u < 2
        assert!((m.get(&[5]) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn fourier_examples() {
        let f = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = GridFunction::random(&f, &[3], 1.0, false, &mut rng).unwrap();
        let total: Complex64 = g.values.iter().sum();
        assert!((fourier_at(&f, &g, &[Frequency::zero()]).unwrap() - total).norm() < 1e-12);
        let d = GridFunction::delta(&f, &[2], &[0]).unwrap();
        let alpha = Frequency::Rational { a: Poly::parse("1").unwrap(), h: Poly::parse("t^2+t+1").unwrap() };
        assert_eq!(fourier_at(&f, &d, &[alpha]).unwrap(), c(1.0));
        let mut two = d.clone();
        two.set(&[1], c(1.0)).unwrap();
        let alpha = Frequency::Rational { a: Poly::one(), h: Poly::t() };
        assert_eq!(fourier_at(&f, &two, &[alpha]).unwrap(), c(0.0));
    }

    #[test]
    fn d_at_s0_is_box_average_and_l_matches() {
        let f = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = GridFunction::random(&f, &[3], 0.8, false, &mut rng).unwrap();
        let params = OperatorParams::new(&f, &k1(), 0, 3).unwrap();
        let d = apply_d(&f, &g, &params).unwrap();
        let l = apply_l(&f, &g, &params).unwrap();
        assert!(d.max_abs_diff(&f, &l).unwrap() < 1e-12);
        assert_eq!(build_g(&f, &g, &params).unwrap(), g);
        let table = gauss_table(&f, 0, &k1()).unwrap();
        let cp = apply_c_piece(&f, &g, &params, &table).unwrap();
        assert!(d.max_abs_diff(&f, &cp).unwrap() < 1e-12);
    }

    #[test]
    fn l_of_delta_at_s1() {
        let f = f2();
        let params = OperatorParams::new(&f, &k1(), 1, 5).unwrap().with_rho(Ratio::new(1, 2).unwrap());
        assert_eq!(params.qs, Poly::parse("t^2+t").unwrap());
        assert_eq!(params.rs, 2);
        let d = GridFunction::delta(&f, &[1], &[0]).unwrap();
        let l = apply_l(&f, &d, &params).unwrap();
        // L delta_0 (x) = 2^-(n-2) exactly when x = Q_s u with deg u < n - 2
        let hits: Vec<u64> =
            (0..8).map(|u| f.poly_index(&f.poly_mul(&params.qs, &f.poly_from_index(u))).unwrap()).collect();
        for x in 0..l.len() as u64 {
            let want = if hits.contains(&x) { 1.0 / 8.0 } else { 0.0 };
            assert_eq!(l.get(&[x]), c(want));
        }
        let strict = OperatorParams::new(&f, &k1(), 1, 5).unwrap();
        assert!(!strict.active());
        assert!(matches!(apply_l(&f, &d, &strict), Err(Error::Range(_))));
    }

    #[test]
    fn c_piece_vanishes_for_cubes_at_s1() {
        let f = f2();
        let k3 = ExponentSystem::new(&[3], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = GridFunction::random(&f, &[4], 0.7, false, &mut rng).unwrap();
        let params = OperatorParams::new(&f, &k3, 1, 2).unwrap().with_rho(Ratio::new(1, 1).unwrap());
        let table = gauss_table(&f, 1, &k3).unwrap();
        assert!(apply_c_piece(&f, &g, &params, &table).unwrap().sup() < 1e-12);
    }

    #[test]
    fn projection_and_multiplier() {
        let f = f2();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = GridFunction::random(&f, &[4], 0.6, false, &mut rng).unwrap();
        let params = OperatorParams::new(&f, &k1(), 1, 4).unwrap().with_rho(Ratio::new(1, 2).unwrap());
        assert_eq!(params.ns, 3);
        let d = apply_d(&f, &g, &params).unwrap();
        let dd = apply_d(&f, &d, &params).unwrap();
        assert!(d.max_abs_diff(&f, &dd).unwrap() < 1e-12);
        let inside = RationalPoint::new(&f, vec![Poly::one()], Poly::t()).unwrap().frequencies();
        assert_eq!(multiplier_d(&f, &inside, &params).unwrap(), 1);
        let lhs = fourier_at(&f, &d, &inside).unwrap();
        let rhs = fourier_at(&f, &g, &inside).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);
        let outside = vec![Frequency::zero()];
        assert_eq!(multiplier_d(&f, &outside, &params).unwrap(), 0);
        assert!(fourier_at(&f, &d, &outside).unwrap().norm() < 1e-10);
    }

    #[test]
    fn large_scale_identity_small() {
        let f = f2();
        let params = OperatorParams::new(&f, &k1(), 1, 6).unwrap().relaxed();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g0 = GridFunction::delta(&f, &[1], &[0]).unwrap();
        assert!(matches!(verify_large_scale_identity(&f, &g0, &params), Err(Error::Range(_))));
        let params = params.with_rho(Ratio::new(1, 2).unwrap());
        let g = GridFunction::random(&f, &[3], 0.5, false, &mut rng).unwrap();
        let rep = verify_large_scale_identity(&f, &g, &params).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.stamp, NONCONFORMING);
    }

    #[test]
    fn json_round_trip() {
        let f = Field::prime(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = GridFunction::random(&f, &[2, 1], 0.5, false, &mut rng).unwrap();
        let back = GridFunction::from_json(&f, &g.to_json(&f)).unwrap();
        assert_eq!(back, g);
    }
}
