//! The Lucas order, shadows, rational approximation search and empirical
//! decay measurements for Weyl and Gauss sums.
//!
//! The decay constants are only known to exist, so fits are reported with
//! their residuals and only their signs are ever asserted.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arcs::{classify_among, ArcScale, Classification};
use crate::error::{Error, Result};
use crate::expsum::{gauss_table, ExponentSystem, Frequency, PowerTable};
use crate::field::{Field, Poly};
use crate::torus::{integral_mul, ord_of, scalar_mul, TailSeries};

fn digits(mut n: u64, p: u32) -> Vec<u64> {
    let mut out = Vec::new();
    while n > 0 {
        out.push(n % p as u64);
        n /= p as u64;
    }
    out
}

/// `j ⪯_p r`: every base-`p` digit of `j` is at most the matching digit of `r`.
pub fn lucas_leq(j: u64, r: u64, p: u32) -> bool {
    let (dj, dr) = (digits(j, p), digits(r, p));
    dj.len() <= dr.len() && dj.iter().zip(&dr).all(|(a, b)| a <= b)
}

/// `C(r, j) mod p` as the product of digit binomials.
pub fn binomial_mod_p(r: u64, j: u64, p: u32) -> u32 {
    if j > r {
        return 0;
    }
    let p64 = p as u64;
    // small binomials C(a, b) mod p for a, b < p
    let mut row = vec![1u64];
    let mut table = vec![row.clone()];
    for _ in 1..p {
        let mut next = vec![1u64; row.len() + 1];
        for i in 1..row.len() {
            next[i] = (row[i - 1] + row[i]) % p64;
        }
        table.push(next.clone());
        row = next;
    }
    let (mut r, mut j, mut acc) = (r, j, 1u64);
    while r > 0 || j > 0 {
        let (a, b) = ((r % p64) as usize, (j % p64) as usize);
        if b > a {
            return 0;
        }
        acc = acc * table[a][b] % p64;
        r /= p64;
        j /= p64;
    }
    acc as u32
}

fn check_k(k: &[u64]) -> Result<()> {
    if k.is_empty() {
        return Err(Error::Invalid("K must be nonempty".into()));
    }
    if k.contains(&0) {
        return Err(Error::Invalid("K holds positive integers only".into()));
    }
    Ok(())
}

/// `S(K) = { j >= 1 : j ⪯_p r for some r in K }`, by enumerating digit vectors.
pub fn shadow(k: &[u64], p: u32) -> Result<BTreeSet<u64>> {
    check_k(k)?;
    let mut out = BTreeSet::new();
    for &r in k {
        let dr = digits(r, p);
        let mut js = vec![0u64];
        let mut place = 1u64;
        for &d in &dr {
            js = js.iter().flat_map(|&j| (0..=d).map(move |c| j + c * place)).collect();
            place *= p as u64;
        }
        out.extend(js.into_iter().filter(|&j| j > 0));
    }
    Ok(out)
}

/// The shadow through the binomial criterion `p ∤ C(r, j)`.
pub fn shadow_binomial(k: &[u64], p: u32) -> Result<BTreeSet<u64>> {
    check_k(k)?;
    let max = *k.iter().max().unwrap();
    Ok((1..=max).filter(|&j| k.iter().any(|&r| binomial_mod_p(r, j, p) != 0)).collect())
}

/// `K* = { k in K : p ∤ k and p^nu k ∉ S(K) for all nu >= 1 }`.
pub fn k_star(k: &[u64], p: u32) -> Result<BTreeSet<u64>> {
    Ok(k_star_from(k, p, &shadow(k, p)?))
}

/// [`k_star`] through the binomial shadow.
pub fn k_star_binomial(k: &[u64], p: u32) -> Result<BTreeSet<u64>> {
    Ok(k_star_from(k, p, &shadow_binomial(k, p)?))
}

fn k_star_from(k: &[u64], p: u32, s: &BTreeSet<u64>) -> BTreeSet<u64> {
    let top = s.iter().next_back().copied().unwrap_or(0);
    k.iter()
        .copied()
        .filter(|&x| {
            if x % p as u64 == 0 {
                return false;
            }
            // the scan stops once p^nu x leaves the shadow's range
            let mut m = x * p as u64;
            while m <= top {
                if s.contains(&m) {
                    return false;
                }
                m *= p as u64;
            }
            true
        })
        .collect()
}

/// Elements of `K` with no other element of `K` above them in `⪯_p`.
///
/// The inverse theorem asks for `r_i` maximal in `K` without naming the
/// order; the major-arc analysis it feeds uses `⪯_p`. Both are read as
/// `⪯_p`-maximality here.
pub fn maximal_elements(k: &[u64], p: u32) -> Result<BTreeSet<u64>> {
    check_k(k)?;
    Ok(k.iter().copied().filter(|&x| !k.iter().any(|&y| y != x && lucas_leq(x, y, p))).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowReport {
    #[serde(rename = "K")]
    pub k: Vec<u64>,
    pub p: u32,
    pub shadow: BTreeSet<u64>,
    #[serde(rename = "kStar")]
    pub k_star: BTreeSet<u64>,
    #[serde(rename = "maximalElems")]
    pub maximal: BTreeSet<u64>,
    /// Whether the digit and binomial shadows agree.
    pub agree: bool,
}

pub fn shadow_report(k: &[u64], p: u32) -> Result<ShadowReport> {
    let s = shadow(k, p)?;
    let agree = s == shadow_binomial(k, p)?;
    Ok(ShadowReport { k: k.to_vec(), p, shadow: s, k_star: k_star(k, p)?, maximal: maximal_elements(k, p)?, agree })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxWitness {
    pub i: usize,
    pub a: Poly,
    pub g: Poly,
    /// `ord(g alpha - a)`; `None` when it vanishes to the available precision.
    #[serde(rename = "ordGap")]
    pub ord_gap: Option<i64>,
    #[serde(rename = "degG")]
    pub deg_g: usize,
    pub reduced: bool,
}

fn gap_key(gap: Option<i64>) -> i64 {
    gap.unwrap_or(i64::MIN)
}

/// Over monic `g` with `deg g <= max_deg`, the pair `(a, g)` minimizing
/// `ord(g alpha - a)`, where `a` is the polynomial part of `g alpha`. Ties go to
/// smaller `deg g`, then canonical order.
pub fn best_rational_approx(field: &Field, alpha: &TailSeries, rn: usize, max_deg: usize) -> Result<ApproxWitness> {
    let need = rn + max_deg;
    if alpha.precision() < need {
        return Err(Error::InsufficientPrecision { needed: need, have: alpha.precision() });
    }
    let mut best: Option<ApproxWitness> = None;
    for d in 0..=max_deg {
        for g in field.enumerate_monic(d)? {
            let frac = scalar_mul(field, &g, alpha)?;
            let gap = ord_of(&frac);
            if best.as_ref().is_some_and(|b| gap_key(gap) >= gap_key(b.ord_gap)) {
                continue;
            }
            let a = integral_mul(field, &g, alpha)?;
            let reduced = field.gcd_monic(&[a.clone(), g.clone()])? == Poly::one();
            best = Some(ApproxWitness { i: 0, a, g, ord_gap: gap, deg_g: d, reduced });
        }
    }
    Ok(best.unwrap())
}

/// Least-squares line `y = slope x + intercept`, with residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    pub points: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    Some(LineFit { slope, intercept, residuals, points: n })
}

fn log_q(q: u32, v: f64) -> f64 {
    v.ln() / (q as f64).ln()
}

fn require_coprime(system: &ExponentSystem) -> Result<()> {
    if !system.all_coprime() {
        return Err(Error::Invalid(format!(
            "exponents {:?} are not all prime to p; restrict to K* and the maximal exponents first",
            system.exponents
        )));
    }
    Ok(())
}

fn random_tail(field: &Field, precision: usize, top: usize, rng: &mut impl Rng) -> TailSeries {
    let mut t = TailSeries::zero(precision);
    for j in top.max(1)..=precision {
        t.set_coeff(j, rng.gen_range(0..field.q()));
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseSample {
    pub eta: f64,
    /// Per coordinate, the least `lambda` with a witness satisfying
    /// `ord(g alpha_i - a) < -r_i n + lambda` and `deg g <= lambda`.
    pub lambda: Vec<i64>,
    pub witnesses: Vec<ApproxWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseReport {
    pub n: usize,
    pub trials: usize,
    pub used: usize,
    pub excluded_zero: usize,
    pub excluded_eta: usize,
    pub samples: Vec<InverseSample>,
    /// Fit of `lambda` against `eta` over all coordinates.
    pub fit: Option<LineFit>,
    /// `C-hat`, the fitted slope.
    pub c_hat: Option<f64>,
    /// `D-hat`: the least intercept putting every sample under `C-hat eta + D-hat`.
    pub d_hat: Option<f64>,
    pub pass: bool,
}

/// For each sampled `alpha` with `|S| = q^{n - eta}`, `eta <= eta_max`, finds
/// per coordinate the smallest `lambda` for which a witness `(a, g)` exists
/// with `deg g <= max_deg`, and fits `lambda ~ C eta + D`.
pub fn verify_weyl_inverse(
    field: &Field,
    system: &ExponentSystem,
    n: usize,
    trials: usize,
    eta_max: f64,
    max_deg: usize,
    rng: &mut impl Rng,
) -> Result<InverseReport> {
    require_coprime(system)?;
    let table = PowerTable::new(field, system, n)?;
    let k = system.k();
    let top_r = *system.exponents.last().unwrap() as usize;
    let precision = top_r * n + max_deg + 2;
    let centers = crate::arcs::centers_up_to(field, 3, k)?;
    let mut samples = Vec::new();
    let (mut zero, mut over) = (0, 0);
    for trial in 0..trials {
        // alternate: near a low-degree rational, or uniformly random
        let alpha: Vec<TailSeries> = if trial % 2 == 0 {
            let c = &centers[rng.gen_range(0..centers.len())];
            let base = c.to_tails(field, precision)?;
            base.into_iter()
                .enumerate()
                .map(|(i, b)| {
                    let depth = system.exponents[i] as usize * n - rng.gen_range(0..=n / 2);
                    crate::torus::tail_add(field, &b, &random_tail(field, precision, depth.max(1), rng))
                })
                .collect()
        } else {
            (0..k).map(|_| random_tail(field, precision, 1, rng)).collect()
        };
        let freqs: Vec<Frequency> = alpha.iter().cloned().map(Frequency::Tail).collect();
        let s = table.weyl_sum(&freqs)?.to_complex().norm();
        if s < 1e-9 {
            zero += 1;
            continue;
        }
        let eta = (n as f64 - log_q(field.q(), s)).max(0.0);
        if eta > eta_max {
            over += 1;
            continue;
        }
        let mut lambda = Vec::with_capacity(k);
        let mut witnesses = Vec::with_capacity(k);
        for (i, a) in alpha.iter().enumerate() {
            let rn = system.exponents[i] as usize * n;
            let mut best: Option<(i64, ApproxWitness)> = None;
            for d in 0..=max_deg {
                let mut w = best_rational_approx(field, a, rn, d)?;
                w.i = i;
                // ord < -rn + lambda  and  deg g <= lambda
                let need_gap = w.ord_gap.map(|o| o + rn as i64 + 1).unwrap_or(i64::MIN);
                let need = need_gap.max(w.deg_g as i64);
                if best.as_ref().map(|b| need < b.0).unwrap_or(true) {
                    best = Some((need, w));
                }
            }
            let (l, w) = best.unwrap();
            lambda.push(l);
            witnesses.push(w);
        }
        samples.push(InverseSample { eta, lambda, witnesses });
    }
    let xs: Vec<f64> = samples.iter().flat_map(|s| s.lambda.iter().map(move |_| s.eta)).collect();
    let ys: Vec<f64> = samples.iter().flat_map(|s| s.lambda.iter().map(|&l| l as f64)).collect();
    let fit = fit_line(&xs, &ys);
    let c_hat = fit.as_ref().map(|f| f.slope);
    let d_hat = c_hat.map(|c| xs.iter().zip(&ys).map(|(x, y)| y - c * x).fold(f64::MIN, f64::max));
    Ok(InverseReport {
        n,
        trials,
        used: samples.len(),
        excluded_zero: zero,
        excluded_eta: over,
        pass: !samples.is_empty()
            && samples.iter().all(|s| s.lambda.iter().all(|&l| l <= (max_deg + top_r * n) as i64)),
        samples,
        fit,
        c_hat,
        d_hat,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub n: usize,
    pub delta: i64,
    /// `max |M_n(beta)|` over the samples; 1 for trivial rows.
    pub max_abs: f64,
    pub samples: usize,
    /// `trivial` for `delta <= 0`, `outside` for `delta >= n/2`, empty otherwise.
    pub flag: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub i: usize,
    pub rows: Vec<DecayRow>,
    /// Fit of `log_q max|M_n|` against `delta` over unflagged rows.
    pub fit: Option<LineFit>,
    /// `c-hat = -slope`.
    pub c_hat: Option<f64>,
}

/// `Delta = ord beta + r n`; one more scale moves it by `r >= 1`.
pub fn delta_at(ord_beta: i64, r: u32, n: usize) -> i64 {
    ord_beta + r as i64 * n as i64
}

/// `max |M_n(beta)|` over `beta` with `ord beta_i = Delta - r_i n` exactly and
/// the other coordinates uniform.
pub fn decay_profile(
    field: &Field,
    system: &ExponentSystem,
    i: usize,
    ns: &[usize],
    deltas: &[i64],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<DecayProfile> {
    require_coprime(system)?;
    if i >= system.k() {
        return Err(Error::Arity { expected: system.k(), got: i + 1 });
    }
    let mut rows = Vec::new();
    for &n in ns {
        let table = PowerTable::new(field, system, n)?;
        let prec = (0..system.k()).map(|j| table.required_precision(j)).max().unwrap_or(1);
        let ri = system.exponents[i] as i64;
        for &delta in deltas {
            let flag = if delta <= 0 {
                "trivial"
            } else if 2 * delta >= n as i64 {
                "outside"
            } else {
                ""
            };
            if delta <= 0 {
                rows.push(DecayRow { n, delta, max_abs: 1.0, samples: 0, flag: flag.into() });
                continue;
            }
            let ord = delta - ri * n as i64;
            if ord > -1 {
                return Err(Error::Range(format!("ord beta = {ord} is not in the torus")));
            }
            let top = (-ord) as usize;
            let mut max_abs: f64 = 0.0;
            for _ in 0..samples {
                let beta: Vec<Frequency> = (0..system.k())
                    .map(|j| {
                        if j == i {
                            let mut t = TailSeries::zero(prec.max(top));
                            t.set_coeff(top, rng.gen_range(1..field.q()));
                            for c in top + 1..=t.precision() {
                                t.set_coeff(c, rng.gen_range(0..field.q()));
                            }
                            Frequency::Tail(t)
                        } else {
                            Frequency::Tail(random_tail(field, prec, 1, rng))
                        }
                    })
                    .collect();
                max_abs = max_abs.max(table.multiplier(&beta)?.norm());
            }
            rows.push(DecayRow { n, delta, max_abs, samples, flag: flag.into() });
        }
    }
    let used: Vec<&DecayRow> = rows.iter().filter(|r| r.flag.is_empty() && r.max_abs > 1e-12).collect();
    let xs: Vec<f64> = used.iter().map(|r| r.delta as f64).collect();
    let ys: Vec<f64> = used.iter().map(|r| log_q(field.q(), r.max_abs)).collect();
    let fit = fit_line(&xs, &ys);
    let c_hat = fit.as_ref().map(|f| -f.slope);
    Ok(DecayProfile { i, rows, fit, c_hat })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorScanRow {
    pub n: usize,
    pub minor_samples: usize,
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorScan {
    pub rows: Vec<MinorScanRow>,
    /// Fit of `log_q max |M_n|` against `n`.
    pub fit: Option<LineFit>,
}

/// `max |M_n(alpha)|` over sampled minor-arc `alpha`, per `n`.
pub fn minor_arc_scan(
    field: &Field,
    system: &ExponentSystem,
    ns: &[usize],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<MinorScan> {
    let mut rows = Vec::new();
    for &n in ns {
        let table = PowerTable::new(field, system, n)?;
        let scale = ArcScale::new(system, n);
        let centers = scale.centers(field)?;
        let prec =
            (0..system.k()).map(|j| table.required_precision(j)).max().unwrap_or(1).max(scale.decision_precision());
        let mut max_abs: f64 = 0.0;
        let mut minor = 0;
        for _ in 0..samples {
            let alpha: Vec<Frequency> =
                (0..system.k()).map(|_| Frequency::Tail(random_tail(field, prec, 1, rng))).collect();
            if !matches!(classify_among(field, &alpha, &scale, &centers)?, Classification::Minor) {
                continue;
            }
            minor += 1;
            max_abs = max_abs.max(table.multiplier(&alpha)?.norm());
        }
        rows.push(MinorScanRow { n, minor_samples: minor, max_abs });
    }
    let used: Vec<&MinorScanRow> = rows.iter().filter(|r| r.max_abs > 0.0).collect();
    let fit = fit_line(
        &used.iter().map(|r| r.n as f64).collect::<Vec<_>>(),
        &used.iter().map(|r| log_q(field.q(), r.max_abs)).collect::<Vec<_>>(),
    );
    Ok(MinorScan { rows, fit })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussDecay {
    /// `(s, max_{deg h = s} |Lambda|)`
    pub rows: Vec<(usize, f64)>,
    /// Fit of `log_q max|Lambda|` against `s` for `s >= 1` with nonzero maxima.
    pub fit: Option<LineFit>,
    /// `gamma-hat = -slope`.
    pub gamma_hat: Option<f64>,
}

pub fn gauss_decay(field: &Field, system: &ExponentSystem, s_max: usize) -> Result<GaussDecay> {
    let rows: Vec<(usize, f64)> =
        (0..=s_max).map(|s| Ok((s, gauss_table(field, s, system)?.max_abs))).collect::<Result<_>>()?;
    let used: Vec<&(usize, f64)> = rows.iter().filter(|(s, m)| *s >= 1 && *m > 1e-12).collect();
    let fit = fit_line(
        &used.iter().map(|(s, _)| *s as f64).collect::<Vec<_>>(),
        &used.iter().map(|(_, m)| log_q(field.q(), *m)).collect::<Vec<_>>(),
    );
    let gamma_hat = fit.as_ref().map(|f| -f.slope);
    Ok(GaussDecay { rows, fit, gamma_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(v: &[u64]) -> BTreeSet<u64> {
        v.iter().copied().collect()
    }

    #[test]
    fn lucas() {
        assert!(lucas_leq(1, 3, 2));
        assert!(lucas_leq(2, 3, 2));
        assert!(!lucas_leq(1, 2, 2));
        assert!(lucas_leq(7, 7, 3));
        assert_eq!(binomial_mod_p(5, 2, 3), 1); // C(5,2) = 10
        assert_eq!(binomial_mod_p(6, 3, 2), 0); // C(6,3) = 20
        assert_eq!(binomial_mod_p(2, 3, 5), 0);
    }

    #[test]
    fn shadows() {
        assert_eq!(shadow(&[3], 2).unwrap(), set(&[1, 2, 3]));
        assert_eq!(shadow(&[2], 2).unwrap(), set(&[2]));
        assert_eq!(shadow(&[1], 5).unwrap(), set(&[1]));
        assert_eq!(k_star(&[3], 2).unwrap(), set(&[3]));
        assert_eq!(k_star(&[2], 2).unwrap(), set(&[]));
        assert_eq!(k_star(&[1, 2], 2).unwrap(), set(&[]));
        assert!(shadow(&[], 2).is_err());
        assert_eq!(maximal_elements(&[1, 2, 3], 2).unwrap(), set(&[3]));
        assert!(shadow_report(&[5, 6], 3).unwrap().agree);
    }

    #[test]
    fn approximations() {
        let f = Field::prime(2).unwrap();
        let inv_t = crate::torus::expand_rational(&f, &Poly::one(), &Poly::t(), 6).unwrap();
        let w = best_rational_approx(&f, &inv_t, 3, 1).unwrap();
        assert_eq!((w.g.clone(), w.a.clone(), w.ord_gap), (Poly::t(), Poly::one(), None));
        let a = TailSeries::parse("t^-1+t^-5", Some(8)).unwrap();
        let w = best_rational_approx(&f, &a, 4, 1).unwrap();
        assert_eq!((w.g, w.a, w.ord_gap), (Poly::t(), Poly::one(), Some(-4)));
        let w = best_rational_approx(&f, &TailSeries::zero(6), 3, 2).unwrap();
        assert_eq!((w.g, w.a, w.ord_gap), (Poly::one(), Poly::zero(), None));
        assert!(best_rational_approx(&f, &a, 8, 2).is_err());
    }

    #[test]
    fn inverse_small() {
        let f = Field::prime(2).unwrap();
        let k3 = ExponentSystem::new(&[3], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rep = verify_weyl_inverse(&f, &k3, 8, 20, 8.0, 3, &mut rng).unwrap();
        assert!(rep.pass, "{rep:?}");
        let k2 = ExponentSystem::new(&[2], 2).unwrap();
        assert!(verify_weyl_inverse(&f, &k2, 8, 2, 8.0, 2, &mut rng).is_err());
    }

    #[test]
    fn decay_rows() {
        let f = Field::prime(2).unwrap();
        let k1 = ExponentSystem::new(&[1], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let prof = decay_profile(&f, &k1, 0, &[8], &[0, 1, 2, 3], 5, &mut rng).unwrap();
        assert_eq!(prof.rows[0].flag, "trivial");
        assert_eq!(prof.rows[0].max_abs, 1.0);
        // ord beta >= -n kills the linear sum
        for r in &prof.rows[1..] {
            assert!(r.max_abs < 1e-12);
        }
        assert_eq!(delta_at(-10, 3, 4), 2);
        assert!(delta_at(-10, 3, 5) >= delta_at(-10, 3, 4) + 1);
    }

    #[test]
    fn lines() {
        let fit = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12 && (fit.intercept - 1.0).abs() < 1e-12);
        assert!(fit_line(&[1.0], &[1.0]).is_none());
    }
}
