//! Oscillation and maximal functionals.
//!
//! The maximal operator `L_s^* F(x) = sup_{n >= H_s} L_{s,n}|F|(x)` is exact
//! here: `L_{s,n}|F|(x)` is the normalized mass of `|F|` on the coset
//! `x + Q_s B_n`, where `B_n = { u : deg u_i < r_i n - R_s }`. Two points share
//! that coset iff they agree mod `Q_s` and in every coefficient of degree
//! `>= r_i n`, so cosets are keyed by `(x_i mod Q_s, x_i div t^{r_i n})`.
//! Cosets at level `n` nest inside cosets at level `n + 1`, which makes level
//! sets finite unions of a tree's nodes and lets them be counted on all of
//! `F_q[t]^k`, not just inside a box.

use std::collections::{HashMap, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::Frequency;
use crate::field::Field;
use crate::operators::{apply_d, multiplier_d, GridFunction, OperatorParams};

/// Strictly increasing cut points `n_1 < ... < n_t`, `t >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPoints(Vec<usize>);

impl CutPoints {
    pub fn new(cuts: Vec<usize>) -> Result<Self> {
        if cuts.len() < 2 {
            return Err(Error::Invalid("need at least two cut points".into()));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(format!("cut points {cuts:?} are not strictly increasing")));
        }
        Ok(CutPoints(cuts))
    }

    pub fn points(&self) -> &[usize] {
        &self.0
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }

    pub fn last(&self) -> usize {
        *self.0.last().unwrap()
    }
}

/// Values `a_n` for `n = start, start + 1, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueSequence {
    pub start: usize,
    pub values: Vec<Complex64>,
}

impl ValueSequence {
    pub fn new(start: usize, values: Vec<Complex64>) -> Self {
        ValueSequence { start, values }
    }

    pub fn get(&self, n: usize) -> Option<Complex64> {
        n.checked_sub(self.start).and_then(|i| self.values.get(i).copied())
    }

    fn covers(&self, cuts: &CutPoints) -> Result<()> {
        if cuts.first() < self.start || cuts.last() >= self.start + self.values.len() {
            return Err(Error::Range(format!(
                "sequence covers [{}, {}) but cuts span [{}, {}]",
                self.start,
                self.start + self.values.len(),
                cuts.first(),
                cuts.last()
            )));
        }
        Ok(())
    }
}

fn osc_squared(get: impl Fn(usize) -> Complex64, cuts: &CutPoints) -> f64 {
    cuts.points()
        .windows(2)
        .map(|w| {
            let end = get(w[1]);
            (w[0]..w[1]).map(|n| (get(n) - end).norm_sqr()).fold(0.0, f64::max)
        })
        .sum()
}

/// `(sum_j sup_{n_j <= n < n_{j+1}} |a_n - a_{n_{j+1}}|^2)^{1/2}`.
pub fn oscillation(seq: &ValueSequence, cuts: &CutPoints) -> Result<f64> {
    seq.covers(cuts)?;
    Ok(osc_squared(|n| seq.get(n).unwrap(), cuts).sqrt())
}

fn common_box(seqs: &[GridFunction]) -> Result<Vec<usize>> {
    let first = seqs.first().ok_or_else(|| Error::Invalid("empty operator sequence".into()))?;
    let mut bx = first.box_degs.clone();
    for g in seqs {
        if g.k() != bx.len() || g.q != first.q {
            return Err(Error::Arity { expected: bx.len(), got: g.k() });
        }
        for (b, &d) in bx.iter_mut().zip(&g.box_degs) {
            *b = (*b).max(d);
        }
    }
    Ok(bx)
}

fn aligned(field: &Field, seqs: &[GridFunction]) -> Result<Vec<GridFunction>> {
    let bx = common_box(seqs)?;
    seqs.iter().map(|g| g.extend_to(field, &bx)).collect()
}

/// `l^2` norm over `x` of the pointwise oscillation of `(A_n g(x))_n`, where
/// `seqs[i]` holds `A_{start + i} g`.
pub fn oscillation_norm(field: &Field, start: usize, seqs: &[GridFunction], cuts: &CutPoints) -> Result<f64> {
    let all = aligned(field, seqs)?;
    ValueSequence::new(start, vec![Complex64::default(); all.len()]).covers(cuts)?;
    let len = all[0].len();
    let total: f64 = (0..len).map(|x| osc_squared(|n| all[n - start].values[x], cuts)).sum();
    Ok(total.sqrt())
}

/// Pointwise `sup_n |A_n g|` over the given finite family.
pub fn maximal_sup(field: &Field, seqs: &[GridFunction]) -> Result<GridFunction> {
    let all = aligned(field, seqs)?;
    let mut out = all[0].abs();
    for g in &all[1..] {
        for (o, v) in out.values.iter_mut().zip(&g.values) {
            if v.norm() > o.re {
                *o = Complex64::new(v.norm(), 0.0);
            }
        }
    }
    Ok(out)
}

/// Coset keys of `x + Q_s B_n`.
struct CosetKeys<'a> {
    field: &'a Field,
    params: &'a OperatorParams,
}

type Key = Vec<(u64, u64)>;

impl<'a> CosetKeys<'a> {
    fn residues(&self, x: &[u64]) -> Result<Vec<u64>> {
        x.iter()
            .map(|&xi| self.field.poly_index(&self.field.poly_rem(&self.field.poly_from_index(xi), &self.params.qs)?))
            .collect()
    }

    fn key(&self, x: &[u64], residues: &[u64], n: usize) -> Key {
        let q = self.field.q() as u128;
        x.iter()
            .zip(residues)
            .enumerate()
            .map(|(i, (&xi, &ri))| {
                let shift = self.params.system.exponents[i] * n as u32;
                let high = q.checked_pow(shift).map(|d| (xi as u128 / d) as u64).unwrap_or(0);
                (ri, high)
            })
            .collect()
    }

    /// `log_q |B_n| = sum_i (r_i n - R_s)`.
    fn log_size(&self, n: usize) -> usize {
        self.params.system.exponents.iter().map(|&r| r as usize * n - self.params.rs).sum()
    }
}

/// The scales over which `L_s^*` takes its supremum start here.
pub fn hl_start(params: &OperatorParams) -> usize {
    let reach = params.system.exponents.iter().map(|&r| params.rs.div_ceil(r as usize)).max().unwrap_or(0);
    if params.conforming {
        params.h_s().max(reach)
    } else {
        params.ns.max(reach)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HlResult {
    pub value: GridFunction,
    pub start: usize,
    /// Beyond this scale every coset meeting the box holds the same part of
    /// `supp F`, so the averages only shrink and the supremum is final.
    pub stabilization_index: usize,
    pub stamp: &'static str,
}

/// Support of `|F|` with coset residues precomputed.
fn abs_support(keys: &CosetKeys, f: &GridFunction) -> Result<Vec<(Vec<u64>, Vec<u64>, f64)>> {
    f.support()
        .map(|(pos, v)| {
            let x = f.point(pos);
            let r = keys.residues(&x)?;
            Ok((x, r, v.norm()))
        })
        .collect()
}

fn level_sums(keys: &CosetKeys, support: &[(Vec<u64>, Vec<u64>, f64)], n: usize) -> HashMap<Key, f64> {
    let mut sums: HashMap<Key, f64> = HashMap::new();
    for (x, r, v) in support {
        *sums.entry(keys.key(x, r, n)).or_default() += v;
    }
    sums
}

/// `L_s^* F` on the box `out_box` (which must contain the box of `F`).
pub fn hl_maximal(field: &Field, f: &GridFunction, params: &OperatorParams, out_box: &[usize]) -> Result<HlResult> {
    let k = params.k();
    if f.k() != k || out_box.len() != k {
        return Err(Error::Arity { expected: k, got: f.k() });
    }
    let keys = CosetKeys { field, params };
    let start = hl_start(params);
    let reach = out_box.iter().zip(&f.box_degs).map(|(&a, &b)| a.max(b)).collect::<Vec<_>>();
    let cover = (0..k).map(|i| reach[i].div_ceil(params.system.exponents[i] as usize)).max().unwrap_or(0).max(start);
    let support = abs_support(&keys, f)?;
    let mut out = GridFunction::zeros(field, out_box)?;
    let points: Vec<(Vec<u64>, Vec<u64>)> = (0..out.len())
        .map(|pos| {
            let x = out.point(pos);
            let r = keys.residues(&x)?;
            Ok((x, r))
        })
        .collect::<Result<_>>()?;
    for n in start..=cover {
        let sums = level_sums(&keys, &support, n);
        let norm = 1.0 / field.q_pow(keys.log_size(n)) as f64;
        for (pos, (x, r)) in points.iter().enumerate() {
            if let Some(s) = sums.get(&keys.key(x, r, n)) {
                let v = s * norm;
                if v > out.values[pos].re {
                    out.values[pos] = Complex64::new(v, 0.0);
                }
            }
        }
    }
    Ok(HlResult { value: out, start, stabilization_index: cover, stamp: params.stamp() })
}

/// `#{ x in F_q[t]^k : L_s^* F(x) > alpha }`, counted exactly.
pub fn level_set_count(field: &Field, f: &GridFunction, params: &OperatorParams, alpha: f64) -> Result<u128> {
    if alpha <= 0.0 {
        return Err(Error::Invalid("alpha must be positive".into()));
    }
    let keys = CosetKeys { field, params };
    let support = abs_support(&keys, f)?;
    let mass: f64 = support.iter().map(|s| s.2).sum();
    let start = hl_start(params);
    // last level at which any coset can exceed alpha
    let mut top = None;
    let mut n = start;
    while mass / field.q_pow(keys.log_size(n)) as f64 > alpha {
        top = Some(n);
        n += 1;
    }
    let Some(top) = top else { return Ok(0) };
    let q = field.q() as u64;
    let mut good_above: Vec<(usize, HashSet<Key>)> = Vec::new();
    let mut count = 0u128;
    for n in (start..=top).rev() {
        let size = field.q_pow(keys.log_size(n));
        let mut good = HashSet::new();
        for (key, s) in level_sums(&keys, &support, n) {
            if s / size as f64 <= alpha {
                continue;
            }
            let inside_ancestor = good_above.iter().any(|(m, set)| {
                let up: Key = key
                    .iter()
                    .enumerate()
                    .map(|(i, &(r, h))| {
                        let shift = params.system.exponents[i] * (m - n) as u32;
                        (r, q.checked_pow(shift).map(|d| h / d).unwrap_or(0))
                    })
                    .collect();
                set.contains(&up)
            });
            if !inside_ancestor {
                count += size;
            }
            good.insert(key);
        }
        good_above.push((n, good));
    }
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub alpha: f64,
    pub count: u128,
    /// `||F||_1 / alpha`
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weak11Report {
    pub rows: Vec<LevelRow>,
    pub pass: bool,
    pub stamp: String,
}

/// `#{ L_s^* F > alpha } <= ||F||_1 / alpha` for each `alpha`, with exact counts.
pub fn weak_11_check(field: &Field, f: &GridFunction, params: &OperatorParams, alphas: &[f64]) -> Result<Weak11Report> {
    let l1 = f.l1();
    let rows = alphas
        .iter()
        .map(|&alpha| {
            let count = level_set_count(field, f, params, alpha)?;
            let bound = l1 / alpha;
            Ok(LevelRow { alpha, count, bound, pass: count as f64 <= bound * (1.0 + 1e-12) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Weak11Report { pass: rows.iter().all(|r| r.pass), rows, stamp: params.stamp().to_string() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VitaliSelection {
    /// Indices into the request list, in selection order.
    pub selected: Vec<usize>,
    pub disjoint: bool,
    pub covers: bool,
}

/// Greedy selection of pairwise disjoint translates `x + Q_s B_{n_x}`:
/// larger scales first, ties in canonical point order, skipping any request
/// whose point already lies in a selected translate.
pub fn vitali_select(
    field: &Field,
    requests: &[(Vec<u64>, usize)],
    params: &OperatorParams,
) -> Result<VitaliSelection> {
    let keys = CosetKeys { field, params };
    let min = hl_start(params);
    for (x, n) in requests {
        if x.len() != params.k() {
            return Err(Error::Arity { expected: params.k(), got: x.len() });
        }
        if *n < min {
            return Err(Error::Range(format!("scale {n} is below the start {min}")));
        }
    }
    let residues: Vec<Vec<u64>> = requests.iter().map(|(x, _)| keys.residues(x)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.sort_by(|&a, &b| requests[b].1.cmp(&requests[a].1).then_with(|| requests[a].0.cmp(&requests[b].0)));
    let in_translate = |x: usize, j: usize| {
        let n = requests[j].1;
        keys.key(&requests[x].0, &residues[x], n) == keys.key(&requests[j].0, &residues[j], n)
    };
    let mut selected: Vec<usize> = Vec::new();
    for &i in &order {
        if !selected.iter().any(|&j| in_translate(i, j)) {
            selected.push(i);
        }
    }
    let covers = (0..requests.len()).all(|i| selected.iter().any(|&j| in_translate(i, j)));
    // literal set check of disjointness
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut disjoint = true;
    let total: u128 = selected.iter().map(|&j| field.q_pow(keys.log_size(requests[j].1))).sum();
    field.check_count(total)?;
    for &j in &selected {
        let (x, n) = &requests[j];
        for u in translate_offsets(field, params, *n)? {
            let y: Vec<u64> = x.iter().zip(&u).map(|(&a, &b)| field.idx_add(a, b)).collect();
            if !seen.insert(y) {
                disjoint = false;
            }
        }
    }
    Ok(VitaliSelection { selected, disjoint, covers })
}

/// All elements of `Q_s B_n` as coordinate indices.
fn translate_offsets(field: &Field, params: &OperatorParams, n: usize) -> Result<Vec<Vec<u64>>> {
    let per: Vec<Vec<u64>> = params
        .system
        .exponents
        .iter()
        .map(|&r| {
            let count = field.q_pow(r as usize * n - params.rs) as u64;
            (0..count)
                .map(|u| field.poly_index(&field.poly_mul(&params.qs, &field.poly_from_index(u))))
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::new()];
    for coord in per {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u64>| {
                coord.iter().map(move |&c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    Ok(out)
}

/// Default small-scale range `[N_s, min(R_s^4, N_s + cap))`.
pub fn small_scale_range(params: &OperatorParams, cap: usize) -> (usize, usize) {
    let hi = params.rs.pow(4).min(params.ns + cap);
    (params.ns, hi.max(params.ns))
}

pub const DEFAULT_DYADIC_CAP: usize = 1 << 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicReport {
    /// `(M + 1)^2 ||g||^2`
    pub bound: f64,
    /// `sum_x sup_m |P_m g(x)|^2`
    pub attained: f64,
    pub ratio: f64,
    /// `(M + 1) sum_l sum_d ||P_{(d+1)2^l} g - P_{d 2^l} g||^2`
    pub chain: f64,
    pub m: u32,
    pub length: usize,
    /// Largest per-frequency dyadic-difference sum seen.
    pub max_frequency_sum: f64,
    pub frequencies: usize,
    pub pass: bool,
    pub stamp: String,
}

fn dyadic_m(len: usize) -> u32 {
    if len <= 1 {
        0
    } else {
        usize::BITS - (len - 1).leading_zeros()
    }
}

/// Dyadic differences of `P_0 = 0, P_1, ..., P_L` padded by `P_L` up to `2^M`:
/// for each level `l`, the pairs `(P_{(d+1)2^l}, P_{d 2^l})`.
fn dyadic_pairs(len: usize) -> Vec<Vec<(usize, usize)>> {
    let m = dyadic_m(len);
    let clamp = |i: usize| i.min(len);
    (0..=m)
        .map(|l| {
            let step = 1usize << l;
            (0..(1usize << (m - l))).map(|d| (clamp((d + 1) * step), clamp(d * step))).collect()
        })
        .collect()
}

/// Small-scale maximal bound for `P_m = D_{s, hi - m}`, `1 <= m <= hi - lo`.
/// `frequencies` are probe points for the per-frequency bound.
pub fn dyadic_maximal_check(
    field: &Field,
    g: &GridFunction,
    params: &OperatorParams,
    lo: usize,
    hi: usize,
    frequencies: &[Vec<Frequency>],
) -> Result<DyadicReport> {
    if lo >= hi {
        return Err(Error::Range(format!("empty scale range [{lo}, {hi})")));
    }
    if lo < params.ns {
        return Err(Error::Range(format!("scale {lo} is below N_s = {}", params.ns)));
    }
    let projections = (1..=hi - lo).map(|m| apply_d(field, g, &params.at_n(hi - m))).collect::<Result<Vec<_>>>()?;
    let mut rep = dyadic_check_from_projections(field, g, &projections)?;
    let len = projections.len();
    let mut worst: f64 = 0.0;
    for alpha in frequencies {
        // multipliers P^_0 = 0, P^_m = D^_{s, hi - m}
        let mut mult = vec![0.0];
        for m in 1..=len {
            mult.push(multiplier_d(field, alpha, &params.at_n(hi - m))? as f64);
        }
        for level in dyadic_pairs(len) {
            let s: f64 = level.iter().map(|&(a, b)| (mult[a] - mult[b]).powi(2)).sum();
            worst = worst.max(s);
        }
    }
    rep.max_frequency_sum = worst;
    rep.frequencies = frequencies.len();
    rep.pass = rep.pass && worst <= 1.0;
    rep.stamp = params.stamp().to_string();
    Ok(rep)
}

/// The spatial half of the check, from precomputed `P_1 g, ..., P_L g`.
pub fn dyadic_check_from_projections(
    field: &Field,
    g: &GridFunction,
    projections: &[GridFunction],
) -> Result<DyadicReport> {
    let len = projections.len();
    if len == 0 {
        return Err(Error::Invalid("no projections".into()));
    }
    let mut all = vec![g.scale(Complex64::default())];
    all.extend(projections.iter().cloned());
    let all = aligned(field, &all)?;
    let m = dyadic_m(len);
    let norm2 = g.norm2();
    let bound = ((m + 1) as f64).powi(2) * norm2;
    let attained = maximal_sup(field, &all[1..])?.norm2();
    let mut chain = 0.0;
    for level in dyadic_pairs(len) {
        for (a, b) in level {
            chain += all[a].values.iter().zip(&all[b].values).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>();
        }
    }
    chain *= (m + 1) as f64;
    let tol = 1e-9 * (1.0 + bound);
    let pass = attained <= chain + tol && chain <= bound + tol;
    Ok(DyadicReport {
        bound,
        attained,
        ratio: if bound > 0.0 { attained / bound } else { 0.0 },
        chain,
        m,
        length: len,
        max_frequency_sum: 0.0,
        frequencies: 0,
        pass,
        stamp: String::new(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOscillationReport {
    pub oscillation: f64,
    /// `|| sup_n |D_{s,n} g| ||` over the cut range.
    pub maximal: f64,
    /// `sum_j ||D_{n_j} g - D_{n_{j+1}} g||^2` over intervals with `n_j >= N_s`.
    pub difference_sum: f64,
    pub norm2: f64,
    /// Largest error in `D_n g - D_{n_{j+1}} g = D_n (D_{n_j} g - D_{n_{j+1}} g)`.
    pub factor_error: f64,
    pub pass: bool,
}

/// The monotone-projection mechanism behind the oscillation bound for
/// `D_{s,n}`, checked on one `g` and one cut family.
pub fn projection_oscillation_check(
    field: &Field,
    g: &GridFunction,
    params: &OperatorParams,
    cuts: &CutPoints,
) -> Result<ProjectionOscillationReport> {
    let start = cuts.first();
    let seq = (start..=cuts.last()).map(|n| apply_d(field, g, &params.at_n(n))).collect::<Result<Vec<_>>>()?;
    let all = aligned(field, &seq)?;
    let oscillation = oscillation_norm(field, start, &all, cuts)?;
    let maximal = maximal_sup(field, &all)?.norm2().sqrt();
    let mut difference_sum = 0.0;
    let mut factor_error: f64 = 0.0;
    for w in cuts.points().windows(2) {
        if w[0] < params.ns {
            continue;
        }
        let diff = all[w[0] - start].sub(field, &all[w[1] - start])?;
        difference_sum += diff.norm2();
        for n in w[0]..w[1] {
            let lhs = all[n - start].sub(field, &all[w[1] - start])?;
            let rhs = apply_d(field, &diff, &params.at_n(n))?;
            factor_error = factor_error.max(lhs.max_abs_diff(field, &rhs)?);
        }
    }
    let norm2 = g.norm2();
    let pass = difference_sum <= norm2 * (1.0 + 1e-9) + 1e-12 && factor_error <= 1e-9;
    Ok(ProjectionOscillationReport { oscillation, maximal, difference_sum, norm2, factor_error, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcs::Ratio;
    use crate::expsum::ExponentSystem;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn f2() -> Field {
        Field::prime(2).unwrap()
    }

    fn k1() -> ExponentSystem {
        ExponentSystem::new(&[1], 2).unwrap()
    }

    #[test]
    fn oscillation_examples() {
        let cuts = CutPoints::new(vec![1, 3]).unwrap();
        let seq = ValueSequence::new(1, vec![c(1.0), c(0.0), c(0.0)]);
        assert_eq!(oscillation(&seq, &cuts).unwrap(), 1.0);
        let flat = ValueSequence::new(1, vec![c(2.0); 3]);
        assert_eq!(oscillation(&flat, &cuts).unwrap(), 0.0);
        assert!(oscillation(&ValueSequence::new(2, vec![c(0.0); 2]), &cuts).is_err());
        assert!(CutPoints::new(vec![3, 3]).is_err());
        assert!(CutPoints::new(vec![1]).is_err());
    }

    #[test]
    fn oscillation_norm_single_point() {
        let f = f2();
        let seqs: Vec<GridFunction> =
            [1.0, 0.0, 0.0].iter().map(|&v| GridFunction::delta(&f, &[1], &[0]).unwrap().scale(c(v))).collect();
        let cuts = CutPoints::new(vec![1, 3]).unwrap();
        assert_eq!(oscillation_norm(&f, 1, &seqs, &cuts).unwrap(), 1.0);
        let same = vec![seqs[0].clone(); 3];
        assert_eq!(oscillation_norm(&f, 1, &same, &cuts).unwrap(), 0.0);
    }

    #[test]
    fn maximal_sup_examples() {
        let f = f2();
        let a = GridFunction::delta(&f, &[2], &[1]).unwrap().scale(c(-2.0));
        let b = GridFunction::delta(&f, &[2], &[3]).unwrap();
        assert_eq!(maximal_sup(&f, &[a.clone()]).unwrap(), a.abs());
        let m = maximal_sup(&f, &[a, b]).unwrap();
        assert_eq!(m.values, vec![c(0.0), c(2.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn hl_maximal_of_delta() {
        let f = f2();
        let params = OperatorParams::new(&f, &k1(), 0, 1).unwrap();
        let d = GridFunction::delta(&f, &[1], &[0]).unwrap();
        let res = hl_maximal(&f, &d, &params, &[5]).unwrap();
        assert_eq!(res.start, 1);
        for x in 0..32u64 {
            let deg = f.idx_degree(x).map(|d| d as i32).unwrap_or(-1);
            let want = 2f64.powi(-(deg + 1).max(1));
            assert_eq!(res.value.get(&[x]), c(want), "x = {x}");
        }
        assert_eq!(level_set_count(&f, &d, &params, 0.25).unwrap(), 2);
        let rep = weak_11_check(&f, &d, &params, &[0.25, 2.0]).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.rows[1].count, 0);
        let zero = GridFunction::zeros(&f, &[2]).unwrap();
        assert_eq!(hl_maximal(&f, &zero, &params, &[2]).unwrap().value.sup(), 0.0);
    }

    #[test]
    fn level_count_matches_box_count() {
        let f = f2();
        let params = OperatorParams::new(&f, &k1(), 1, 1).unwrap().with_rho(Ratio::new(1, 2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = GridFunction::random(&f, &[4], 0.5, true, &mut rng).unwrap();
        for alpha in [0.05, 0.1, 0.2] {
            let count = level_set_count(&f, &g, &params, alpha).unwrap();
            // the level set sits inside a box where cosets are still small
            let big = hl_maximal(&f, &g, &params, &[10]).unwrap();
            let inside = big.value.values.iter().filter(|v| v.re > alpha).count() as u128;
            assert_eq!(count, inside, "alpha {alpha}");
        }
    }

    #[test]
    fn vitali_examples() {
        let f = f2();
        let params = OperatorParams::new(&f, &k1(), 0, 1).unwrap();
        let one = vitali_select(&f, &[(vec![3], 2)], &params).unwrap();
        assert_eq!(one.selected, vec![0]);
        // 1 lies in 0 + B_2 = {0,1,2,3}, which holds 1 + B_1 = {0,1}
        let nested = vitali_select(&f, &[(vec![1], 1), (vec![0], 2)], &params).unwrap();
        assert_eq!(nested.selected, vec![1]);
        assert!(nested.disjoint && nested.covers);
        let apart = vitali_select(&f, &[(vec![0], 1), (vec![4], 1)], &params).unwrap();
        assert_eq!(apart.selected, vec![0, 1]);
    }

    #[test]
    fn dyadic_small() {
        let f = f2();
        let params = OperatorParams::new(&f, &k1(), 0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = GridFunction::random(&f, &[3], 0.7, false, &mut rng).unwrap();
        let freqs =
            vec![vec![Frequency::zero()], vec![Frequency::Rational { a: crate::Poly::one(), h: crate::Poly::t() }]];
        let rep = dyadic_maximal_check(&f, &g, &params, 1, 5, &freqs).unwrap();
        assert_eq!(rep.length, 4);
        assert_eq!(rep.m, 2);
        assert!(rep.pass, "{rep:?}");
        assert!(rep.max_frequency_sum <= 1.0);
        let zero = GridFunction::zeros(&f, &[3]).unwrap();
        let rep = dyadic_maximal_check(&f, &zero, &params, 1, 5, &[]).unwrap();
        assert_eq!(rep.attained, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn projection_oscillation() {
        let f = f2();
        let params = OperatorParams::new(&f, &k1(), 0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = GridFunction::random(&f, &[4], 0.6, false, &mut rng).unwrap();
        let cuts = CutPoints::new(vec![1, 2, 4, 6]).unwrap();
        let rep = projection_oscillation_check(&f, &g, &params, &cuts).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}
