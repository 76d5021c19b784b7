//! Finite translation systems `X = (F_q[t]/h)^d` with commuting actions
//! `T^{(j)}_a x = x + (a mod h) v_j`, their ergodic averages and the
//! transference to the shift model on `F_q[t]^k`.
//!
//! A function on `X` is a dense `Vec<f64>` indexed by
//! `sum_i index(x_i) q^{deg h * i}`. With integer-valued `g` every average is an
//! integer divided by `q^n`, so equal averages compare equal bit for bit.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::ExponentSystem;
use crate::field::{Field, Poly};
use crate::functionals::{oscillation_norm, CutPoints};
use crate::operators::{apply_m, GridFunction};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteSystem {
    pub h: Poly,
    pub d: usize,
    /// One direction per action, each a vector in `(F_q[t]/h)^d`.
    pub directions: Vec<Vec<Poly>>,
    #[serde(skip)]
    side: u64,
}

/// One monomial of an orbit polynomial: action `action` moves by `coeff * f^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitTerm {
    pub action: usize,
    pub coeff: Poly,
    pub exponent: u32,
}

/// Terms `(j, 1, r_j)`: action `j` moves by `f^{r_j}`.
pub fn monomial_terms(system: &ExponentSystem) -> Vec<OrbitTerm> {
    system
        .exponents
        .iter()
        .enumerate()
        .map(|(j, &r)| OrbitTerm { action: j, coeff: Poly::one(), exponent: r })
        .collect()
}

pub fn build_translation_system(field: &Field, h: Poly, d: usize, directions: Vec<Vec<Poly>>) -> Result<FiniteSystem> {
    field.check_poly(&h)?;
    if !h.is_monic() {
        return Err(Error::NotMonic(h.to_string()));
    }
    let deg = h.degree().unwrap();
    if deg == 0 {
        return Err(Error::Degree("the modulus must have degree at least 1".into()));
    }
    if d == 0 {
        return Err(Error::Invalid("dimension must be at least 1".into()));
    }
    field.check_count(field.q_pow(deg * d))?;
    let directions = directions
        .into_iter()
        .map(|v| {
            if v.len() != d {
                return Err(Error::Arity { expected: d, got: v.len() });
            }
            v.iter().map(|c| field.check_poly(c).and_then(|_| field.poly_rem(c, &h))).collect()
        })
        .collect::<Result<Vec<Vec<Poly>>>>()?;
    Ok(FiniteSystem { side: field.q_pow(deg) as u64, h, d, directions })
}

impl FiniteSystem {
    pub fn size(&self) -> usize {
        (self.side as usize).pow(self.d as u32)
    }

    pub fn actions(&self) -> usize {
        self.directions.len()
    }

    pub fn deg_h(&self) -> usize {
        self.h.degree().unwrap_or(0)
    }

    fn coords(&self, x: usize) -> Vec<u64> {
        let mut rest = x as u64;
        (0..self.d)
            .map(|_| {
                let c = rest % self.side;
                rest /= self.side;
                c
            })
            .collect()
    }

    fn state(&self, coords: &[u64]) -> usize {
        coords.iter().rev().fold(0u64, |acc, &c| acc * self.side + c) as usize
    }

    /// `x + y` coordinatewise.
    pub fn add(&self, field: &Field, x: usize, y: usize) -> usize {
        if field.q() == 2 {
            return x ^ y;
        }
        let (a, b) = (self.coords(x), self.coords(y));
        self.state(&a.iter().zip(&b).map(|(&u, &v)| field.idx_add(u, v)).collect::<Vec<_>>())
    }

    /// The translation vector of `T^{(j)}_a` as a state.
    pub fn shift(&self, field: &Field, j: usize, a: &Poly) -> Result<usize> {
        let v = self.directions.get(j).ok_or(Error::Arity { expected: self.actions(), got: j + 1 })?;
        let a = field.poly_rem(a, &self.h)?;
        let coords = v
            .iter()
            .map(|c| field.poly_index(&field.poly_rem(&field.poly_mul(&a, c), &self.h)?))
            .collect::<Result<Vec<u64>>>()?;
        Ok(self.state(&coords))
    }

    /// `T^{(j)}_a x`.
    pub fn act(&self, field: &Field, j: usize, a: &Poly, x: usize) -> Result<usize> {
        Ok(self.add(field, x, self.shift(field, j, a)?))
    }

    /// `(g o T^{(j)}_a)`.
    pub fn compose(&self, field: &Field, g: &[f64], j: usize, a: &Poly) -> Result<Vec<f64>> {
        let s = self.shift(field, j, a)?;
        Ok((0..self.size()).map(|x| g[self.add(field, x, s)]).collect())
    }

    /// Residue coordinates of a state, as polynomials.
    pub fn point(&self, field: &Field, x: usize) -> Vec<Poly> {
        self.coords(x).into_iter().map(|c| field.poly_from_index(c)).collect()
    }
}

fn check_terms(sys: &FiniteSystem, terms: &[OrbitTerm]) -> Result<()> {
    for t in terms {
        if t.action >= sys.actions() {
            return Err(Error::Arity { expected: sys.actions(), got: t.action + 1 });
        }
    }
    Ok(())
}

/// How often each translation `sum_terms coeff f^e v_action` occurs over
/// `deg f < n`.
pub fn shift_counts(field: &Field, sys: &FiniteSystem, terms: &[OrbitTerm], n: usize) -> Result<HashMap<usize, u64>> {
    check_terms(sys, terms)?;
    let count = field.q_pow(n);
    field.check_count(count)?;
    let mut out = HashMap::new();
    for fi in 0..count as u64 {
        let f = field.poly_from_index(fi);
        let mut s = 0;
        for t in terms {
            let m = field.poly_mul(&t.coeff, &field.poly_powmod(&f, t.exponent, &sys.h)?);
            s = sys.add(field, s, sys.shift(field, t.action, &m)?);
        }
        *out.entry(s).or_insert(0) += 1;
    }
    Ok(out)
}

fn average_from_counts(
    field: &Field,
    sys: &FiniteSystem,
    g: &[f64],
    counts: &HashMap<usize, u64>,
    n: usize,
) -> Vec<f64> {
    let norm = field.q_pow(n) as f64;
    let mut shifts: Vec<(&usize, &u64)> = counts.iter().collect();
    shifts.sort();
    (0..sys.size())
        .map(|x| shifts.iter().map(|(&s, &c)| c as f64 * g[sys.add(field, x, s)]).sum::<f64>() / norm)
        .collect()
}

fn check_g(sys: &FiniteSystem, g: &[f64]) -> Result<()> {
    if g.len() != sys.size() {
        return Err(Error::Arity { expected: sys.size(), got: g.len() });
    }
    Ok(())
}

/// `A_n g(x) = q^-n sum_{deg f < n} g(x + sum_terms coeff f^e v_action)`.
pub fn ergodic_average_terms(
    field: &Field,
    sys: &FiniteSystem,
    g: &[f64],
    terms: &[OrbitTerm],
    n: usize,
) -> Result<Vec<f64>> {
    check_g(sys, g)?;
    let counts = shift_counts(field, sys, terms, n)?;
    Ok(average_from_counts(field, sys, g, &counts, n))
}

/// `A_n g` along `S^{(1)}_{f^{r_1}} ... S^{(k)}_{f^{r_k}}`.
pub fn ergodic_average(
    field: &Field,
    sys: &FiniteSystem,
    g: &[f64],
    system: &ExponentSystem,
    n: usize,
) -> Result<Vec<f64>> {
    if sys.actions() != system.k() {
        return Err(Error::Arity { expected: system.k(), got: sys.actions() });
    }
    ergodic_average_terms(field, sys, g, &monomial_terms(system), n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageTrace {
    /// `averages[n]` is `A_n g` on all of `X`.
    pub averages: Vec<Vec<f64>>,
    /// Least `n_0` with `A_n g = A_{n_0} g` for every computed `n >= n_0`.
    pub stabilization_index: usize,
    pub limit: Vec<f64>,
    /// Whether the limit is invariant under every generator `T^{(j)}_1`.
    pub limit_invariant: bool,
}

pub fn convergence_probe(
    field: &Field,
    sys: &FiniteSystem,
    g: &[f64],
    system: &ExponentSystem,
    n_max: usize,
) -> Result<AverageTrace> {
    let averages = (0..=n_max).map(|n| ergodic_average(field, sys, g, system, n)).collect::<Result<Vec<_>>>()?;
    let last = averages.last().unwrap().clone();
    let mut stab = n_max;
    while stab > 0 && averages[stab - 1] == last {
        stab -= 1;
    }
    let mut invariant = true;
    for j in 0..sys.actions() {
        if sys.compose(field, &last, j, &Poly::one())? != last {
            invariant = false;
        }
    }
    Ok(AverageTrace { averages, stabilization_index: stab, limit: last, limit_invariant: invariant })
}

/// `Phi_{x,K}(a) = 1_{deg a_i < r_i K} g(x + sum_i a_i v_i)` on the box `deg a_i < r_i K`.
pub fn phi(
    field: &Field,
    sys: &FiniteSystem,
    g: &[f64],
    system: &ExponentSystem,
    big_k: usize,
    x: usize,
) -> Result<GridFunction> {
    let box_degs: Vec<usize> = system.exponents.iter().map(|&r| r as usize * big_k).collect();
    let mut out = GridFunction::zeros(field, &box_degs)?;
    // per coordinate, the translation of every a_i in the box
    let shifts: Vec<Vec<usize>> = box_degs
        .iter()
        .enumerate()
        .map(|(i, &b)| (0..field.q_pow(b) as u64).map(|a| sys.shift(field, i, &field.poly_from_index(a))).collect())
        .collect::<Result<_>>()?;
    for pos in 0..out.len() {
        let a = out.point(pos);
        let mut y = x;
        for (i, &ai) in a.iter().enumerate() {
            y = sys.add(field, y, shifts[i][ai as usize]);
        }
        out.values[pos] = Complex64::new(g[y], 0.0);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferenceReport {
    pub samples: usize,
    pub max_abs_error: f64,
    /// `sum_x ||Phi_x||^2` against `q^{K sum r_i} sum_x |g(x)|^2`.
    pub phi_norm_sum: f64,
    pub phi_norm_expected: f64,
    /// `q^{K sum r} ||O(A_n g)||^2` (unnormalized counting measure on `X`).
    pub oscillation_lhs: f64,
    /// `sum_x ||O(M_n Phi_x)||^2`, which must dominate the left side.
    pub oscillation_rhs: f64,
    pub pass: bool,
}

/// Checks `A_n(S_a g)(x) = M_n Phi_{x,K}(a)` for sampled `(x, a)` with
/// `deg a_i < r_i K` and every `n <= K`, plus the norm bookkeeping.
pub fn transference_check(
    field: &Field,
    sys: &FiniteSystem,
    g: &[f64],
    system: &ExponentSystem,
    big_k: usize,
    samples: usize,
    cuts: &CutPoints,
    rng: &mut impl Rng,
) -> Result<TransferenceReport> {
    check_g(sys, g)?;
    if sys.actions() != system.k() {
        return Err(Error::Arity { expected: system.k(), got: sys.actions() });
    }
    if cuts.last() > big_k {
        return Err(Error::Range(format!("cut {} exceeds K = {big_k}", cuts.last())));
    }
    let k = system.k();
    let sum_r: usize = system.exponents.iter().map(|&r| r as usize).sum();
    let phis: Vec<GridFunction> =
        (0..sys.size()).map(|x| phi(field, sys, g, system, big_k, x)).collect::<Result<_>>()?;
    let m_phi: Vec<Vec<GridFunction>> =
        phis.iter().map(|p| (0..=big_k).map(|n| apply_m(field, p, system, n)).collect()).collect::<Result<_>>()?;
    let averages: Vec<Vec<f64>> =
        (0..=big_k).map(|n| ergodic_average(field, sys, g, system, n)).collect::<Result<_>>()?;
    let mut max_err: f64 = 0.0;
    for _ in 0..samples {
        let x = rng.gen_range(0..sys.size());
        let a: Vec<u64> =
            (0..k).map(|i| rng.gen_range(0..field.q_pow(system.exponents[i] as usize * big_k) as u64)).collect();
        let mut s = 0;
        for (i, &ai) in a.iter().enumerate() {
            s = sys.add(field, s, sys.shift(field, i, &field.poly_from_index(ai))?);
        }
        for n in 0..=big_k {
            // A_n commutes with translations: A_n(S_a g)(x) = A_n g(x + s)
            let lhs = averages[n][sys.add(field, x, s)];
            let rhs = m_phi[x][n].get(&a);
            max_err = max_err.max((Complex64::new(lhs, 0.0) - rhs).norm());
        }
    }
    let phi_norm_sum: f64 = phis.iter().map(|p| p.norm2()).sum();
    let phi_norm_expected = field.q_pow(big_k * sum_r) as f64 * g.iter().map(|v| v * v).sum::<f64>();
    // oscillation of A_n g over X, as grid functions on a one-point box
    let start = cuts.first();
    let osc_x = |x: usize| -> Result<f64> {
        let seq: Vec<GridFunction> = (start..=cuts.last())
            .map(|n| {
                let mut gf = GridFunction::zeros(field, &[0])?;
                gf.values[0] = Complex64::new(averages[n][x], 0.0);
                Ok(gf)
            })
            .collect::<Result<_>>()?;
        Ok(oscillation_norm(field, start, &seq, cuts)?.powi(2))
    };
    let osc_a: f64 = (0..sys.size()).map(osc_x).sum::<Result<f64>>()?;
    let oscillation_lhs = field.q_pow(big_k * sum_r) as f64 * osc_a;
    let oscillation_rhs: f64 = m_phi
        .iter()
        .map(|seq| Ok(oscillation_norm(field, start, &seq[start..=cuts.last()], cuts)?.powi(2)))
        .sum::<Result<f64>>()?;
    let tol = 1e-9;
    let pass = max_err <= tol
        && (phi_norm_sum - phi_norm_expected).abs() <= tol * (1.0 + phi_norm_expected)
        && oscillation_lhs <= oscillation_rhs * (1.0 + tol) + tol;
    Ok(TransferenceReport {
        samples,
        max_abs_error: max_err,
        phi_norm_sum,
        phi_norm_expected,
        oscillation_lhs,
        oscillation_rhs,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationExperiment {
    pub families: usize,
    /// `max ||O(A_n g)||_{L^2(X)} / ||g||_{L^2(X)}` over the sampled cut families.
    pub max_ratio: f64,
    pub worst_cuts: Vec<usize>,
    pub stabilization_index: usize,
}

/// Random cut families in `[0, n_max]`; the measure on `X` is normalized.
pub fn oscillation_experiment(
    field: &Field,
    sys: &FiniteSystem,
    g: &[f64],
    system: &ExponentSystem,
    n_max: usize,
    families: usize,
    rng: &mut impl Rng,
) -> Result<OscillationExperiment> {
    let trace = convergence_probe(field, sys, g, system, n_max)?;
    let size = sys.size() as f64;
    let g_norm = (g.iter().map(|v| v * v).sum::<f64>() / size).sqrt();
    let mut max_ratio: f64 = 0.0;
    let mut worst = Vec::new();
    for _ in 0..families {
        let len = rng.gen_range(2..=(n_max + 1).clamp(2, 6));
        let mut pts: Vec<usize> = (0..=n_max).collect();
        for i in 0..len {
            let j = rng.gen_range(i..pts.len());
            pts.swap(i, j);
        }
        pts.truncate(len);
        pts.sort_unstable();
        let cuts = CutPoints::new(pts.clone())?;
        let osc: f64 = (0..sys.size())
            .map(|x| {
                cuts.points()
                    .windows(2)
                    .map(|w| {
                        let end = trace.averages[w[1]][x];
                        (w[0]..w[1]).map(|n| (trace.averages[n][x] - end).powi(2)).fold(0.0, f64::max)
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            / size;
        let ratio = if g_norm > 0.0 { osc.sqrt() / g_norm } else { 0.0 };
        if ratio > max_ratio || worst.is_empty() {
            max_ratio = max_ratio.max(ratio);
            worst = pts;
        }
    }
    Ok(OscillationExperiment { families, max_ratio, worst_cuts: worst, stabilization_index: trace.stabilization_index })
}

/// `sum_x g(T_a x) = sum_x g(x)` for every action and sampled `a`, compared
/// exactly, so non-integer `g` can fail on summation order.
pub fn check_measure_preservation(field: &Field, sys: &FiniteSystem, g: &[f64], samples: &[Poly]) -> Result<bool> {
    check_g(sys, g)?;
    let total: f64 = g.iter().sum();
    for j in 0..sys.actions() {
        for a in samples {
            let moved: f64 = sys.compose(field, g, j, a)?.iter().sum();
            if moved != total {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `T_{a+b} = T_a T_b` and `T^{(i)}_a T^{(j)}_b = T^{(j)}_b T^{(i)}_a`, exhaustively
/// over residues `a, b mod h`.
pub fn check_action_law(field: &Field, sys: &FiniteSystem) -> Result<bool> {
    let residues = field.enumerate_degree_lt(sys.deg_h())?;
    field.check_count((residues.len() as u128).pow(2) * sys.size() as u128 * sys.actions().pow(2) as u128)?;
    for i in 0..sys.actions() {
        for j in 0..sys.actions() {
            for a in &residues {
                for b in &residues {
                    for x in 0..sys.size() {
                        let ab = sys.act(field, i, b, sys.act(field, i, a, x)?)?;
                        if i == j && ab != sys.act(field, i, &field.poly_add(a, b), x)? {
                            return Ok(false);
                        }
                        let ij = sys.act(field, j, b, sys.act(field, i, a, x)?)?;
                        let ji = sys.act(field, i, a, sys.act(field, j, b, x)?)?;
                        if ij != ji {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}
