//! Major-arc geometry: reduced rational centers `a/h`, the boxes
//! `N_n(a, h) = { alpha : ord(alpha_i - a_i/h) < -r_i n + n / (4 r*^2) }`,
//! major/minor classification and the pairwise disjointness check.
//!
//! Every strict inequality with a rational right-hand side is turned into an
//! integer bound once: `ord < T` is equivalent to `ord <= ceil(T) - 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::{check_reduced, gauss_sum_at, rational_frequencies, ExponentSystem, Frequency, PowerTable};
use crate::field::{Field, Poly};
use crate::torus::{expand_rational, ord_at_most, tail_add, tail_sub, TailSeries};

/// Stamp carried by every report produced under parameter overrides.
pub const NONCONFORMING: &str = "nonconforming parameters";
pub const CONFORMING: &str = "conforming";

/// A reduced rational vector `a / h`: `h` monic, `deg a_i < deg h`, and the
/// joint gcd of `a_1, ..., a_k, h` equal to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RationalPoint {
    pub h: Poly,
    pub a: Vec<Poly>,
}

impl RationalPoint {
    pub fn new(field: &Field, a: Vec<Poly>, h: Poly) -> Result<Self> {
        check_reduced(field, &a, &h)?;
        Ok(RationalPoint { h, a })
    }

    /// The origin `0/1` in dimension `k`.
    pub fn zero(k: usize) -> Self {
        RationalPoint { h: Poly::one(), a: vec![Poly::zero(); k] }
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    pub fn deg_h(&self) -> usize {
        self.h.degree().unwrap_or(0)
    }

    pub fn frequencies(&self) -> Vec<Frequency> {
        rational_frequencies(self)
    }

    pub fn to_tails(&self, field: &Field, precision: usize) -> Result<Vec<TailSeries>> {
        self.a.iter().map(|a| expand_rational(field, a, &self.h, precision)).collect()
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nums: Vec<String> = self.a.iter().map(|a| a.to_string()).collect();
        if nums.len() == 1 {
            write!(f, "({})/({})", nums[0], self.h)
        } else {
            write!(f, "({})/({})", nums.join(","), self.h)
        }
    }
}

/// All reduced `a / h` with `h` monic of degree `s`, in canonical order
/// (by `h`, then lexicographically by the numerator indices).
pub fn enumerate_centers(field: &Field, s: usize, k: usize) -> Result<Vec<RationalPoint>> {
    if s == 0 {
        return Ok(vec![RationalPoint::zero(k)]);
    }
    let per_h = field.q_pow(s).saturating_pow(k as u32);
    field.check_count(field.q_pow(s).saturating_mul(per_h))?;
    let per_h = per_h as u64;
    let nums = field.enumerate_degree_lt(s)?;
    let q_s = nums.len() as u64;
    let mut out = Vec::new();
    for h in field.enumerate_monic(s)? {
        for code in 0..per_h {
            let mut c = code;
            let mut a = Vec::with_capacity(k);
            for _ in 0..k {
                a.push(nums[(c % q_s) as usize].clone());
                c /= q_s;
            }
            a.reverse();
            let mut items = a.clone();
            items.push(h.clone());
            if field.gcd_monic(&items)? == Poly::one() {
                out.push(RationalPoint { h: h.clone(), a });
            }
        }
    }
    Ok(out)
}

/// Centers with `deg h <= max_s`.
pub fn centers_up_to(field: &Field, max_s: usize, k: usize) -> Result<Vec<RationalPoint>> {
    let mut out = Vec::new();
    for s in 0..=max_s {
        out.extend(enumerate_centers(field, s, k)?);
    }
    Ok(out)
}

/// A positive rational `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Invalid("zero denominator".into()));
        }
        Ok(Ratio { num, den })
    }

    /// `ceil(n * num / den)`
    pub fn ceil_times(&self, n: u64) -> u64 {
        (n * self.num).div_ceil(self.den)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad rational {s:?}"));
        match s.split_once('/') {
            Some((a, b)) => Ratio::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => Ratio::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// The scale `n` together with the box thresholds and the degree bound on `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcScale {
    pub n: usize,
    pub system: ExponentSystem,
    /// `deg h < rho * n`.
    pub rho: Ratio,
    /// Box width term: thresholds are `-r_i n + margin * n`.
    pub margin: Ratio,
    pub conforming: bool,
}

impl ArcScale {
    pub fn new(system: &ExponentSystem, n: usize) -> Self {
        let r = system.r_star as u64;
        ArcScale {
            n,
            system: system.clone(),
            rho: Ratio { num: 1, den: 8 * r },
            margin: Ratio { num: 1, den: 4 * r * r },
            conforming: true,
        }
    }

    /// Replaces `rho`; marks the scale nonconforming.
    pub fn with_rho(mut self, rho: Ratio) -> Self {
        self.rho = rho;
        self.conforming = false;
        self
    }

    /// Replaces the box width `1/(4 r*^2)`; marks the scale nonconforming.
    pub fn with_margin(mut self, margin: Ratio) -> Self {
        self.margin = margin;
        self.conforming = false;
        self
    }

    pub fn stamp(&self) -> &'static str {
        if self.conforming {
            CONFORMING
        } else {
            NONCONFORMING
        }
    }

    /// Integer form of the box condition on coordinate `i`: `ord <= bound`.
    pub fn ord_bound(&self, i: usize) -> i64 {
        let n = self.n as i64;
        -(self.system.exponents[i] as i64) * n + self.margin.ceil_times(self.n as u64) as i64 - 1
    }

    /// Largest admissible `deg h`, i.e. the largest `d` with `d < rho n`.
    pub fn max_deg_h(&self) -> Option<usize> {
        (self.rho.ceil_times(self.n as u64) as usize).checked_sub(1)
    }

    /// `deg h < rho n` by cross-multiplication.
    pub fn admits_degree(&self, d: usize) -> bool {
        (d as u64) * self.rho.den < (self.n as u64) * self.rho.num
    }

    /// All centers of the major arcs at this scale.
    pub fn centers(&self, field: &Field) -> Result<Vec<RationalPoint>> {
        match self.max_deg_h() {
            Some(d) => centers_up_to(field, d, self.system.k()),
            None => Ok(Vec::new()),
        }
    }

    /// Precision sufficient to decide every box comparison at this scale.
    pub fn decision_precision(&self) -> usize {
        (0..self.system.k()).map(|i| (-self.ord_bound(i)).max(1) as usize).max().unwrap_or(1)
    }
}

/// `ord(b/g - a/h) <= bound` for two rationals, exactly.
pub fn rational_gap_at_most(field: &Field, b: &Poly, g: &Poly, a: &Poly, h: &Poly, bound: i64) -> Result<bool> {
    let b = field.poly_rem(b, g)?;
    let a = field.poly_rem(a, h)?;
    let num = field.poly_sub(&field.poly_mul(&b, h), &field.poly_mul(&a, g));
    match num.degree() {
        None => Ok(true),
        Some(dn) => Ok(dn as i64 - (g.degree_i64() + h.degree_i64()) <= bound),
    }
}

/// True iff `alpha` lies in the box `N_n(center)`.
pub fn in_major_box(field: &Field, alpha: &[Frequency], center: &RationalPoint, scale: &ArcScale) -> Result<bool> {
    let k = scale.system.k();
    if alpha.len() != k || center.k() != k {
        return Err(Error::Arity { expected: k, got: alpha.len().min(center.k()) });
    }
    for (i, ai) in alpha.iter().enumerate() {
        let bound = scale.ord_bound(i);
        let inside = match ai {
            Frequency::Rational { a: b, h: g } => rational_gap_at_most(field, b, g, &center.a[i], &center.h, bound)?,
            Frequency::Tail(t) => {
                let c = expand_rational(field, &center.a[i], &center.h, t.precision())?;
                ord_at_most(&tail_sub(field, t, &c), bound)?
            }
        };
        if !inside {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "center", rename_all = "lowercase")]
pub enum Classification {
    Major(RationalPoint),
    Minor,
}

/// Major with the center whose box contains `alpha`, Minor otherwise.
pub fn classify(field: &Field, alpha: &[Frequency], scale: &ArcScale) -> Result<Classification> {
    classify_among(field, alpha, scale, &scale.centers(field)?)
}

/// As [`classify`] with a precomputed center list.
pub fn classify_among(
    field: &Field,
    alpha: &[Frequency],
    scale: &ArcScale,
    centers: &[RationalPoint],
) -> Result<Classification> {
    for c in centers {
        if in_major_box(field, alpha, c, scale)? {
            return Ok(Classification::Major(c.clone()));
        }
    }
    Ok(Classification::Minor)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointnessReport {
    pub n: usize,
    pub centers: usize,
    pub checked: u64,
    pub violations: Vec<(String, String)>,
    pub pass: bool,
    pub stamp: String,
}

/// Pairwise disjointness of all boxes at this scale. In an ultrametric space
/// two boxes of the same radii meet iff each center lies in the other's box,
/// i.e. iff `ord(a_i/h - b_i/g)` is within the bound for every `i`.
pub fn check_disjointness(field: &Field, scale: &ArcScale) -> Result<DisjointnessReport> {
    let centers = scale.centers(field)?;
    let mut checked = 0u64;
    let mut violations = Vec::new();
    for (x, c1) in centers.iter().enumerate() {
        for c2 in &centers[x + 1..] {
            checked += 1;
            let mut meet = true;
            for i in 0..scale.system.k() {
                if !rational_gap_at_most(field, &c1.a[i], &c1.h, &c2.a[i], &c2.h, scale.ord_bound(i))? {
                    meet = false;
                    break;
                }
            }
            if meet {
                violations.push((c1.to_string(), c2.to_string()));
            }
        }
    }
    Ok(DisjointnessReport {
        n: scale.n,
        centers: centers.len(),
        checked,
        pass: violations.is_empty(),
        violations,
        stamp: scale.stamp().to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorArcReport {
    pub center: String,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub abs_error: f64,
    /// `q^{deg h} S(alpha) = G(a,h) S(beta)` as cyclotomic integers.
    pub exact: bool,
    pub pass: bool,
}

/// Checks `M_n(a/h + beta) = Lambda(a, h) M_n(beta)` with a shared power table.
pub struct MajorArcVerifier {
    table: PowerTable,
    scale: ArcScale,
}

impl MajorArcVerifier {
    pub fn new(field: &Field, scale: &ArcScale) -> Result<Self> {
        Ok(MajorArcVerifier { table: PowerTable::new(field, &scale.system, scale.n)?, scale: scale.clone() })
    }

    pub fn scale(&self) -> &ArcScale {
        &self.scale
    }

    /// Precision at which `beta` must be given.
    pub fn precision(&self) -> usize {
        (0..self.scale.system.k()).map(|i| self.table.required_precision(i)).max().unwrap_or(1)
    }

    pub fn verify(&self, center: &RationalPoint, beta: &[TailSeries]) -> Result<MajorArcReport> {
        let field = self.table.field();
        let k = self.scale.system.k();
        if beta.len() != k {
            return Err(Error::Arity { expected: k, got: beta.len() });
        }
        let mut alpha = Vec::with_capacity(k);
        for (i, b) in beta.iter().enumerate() {
            let need = self.table.required_precision(i);
            if b.precision() < need {
                return Err(Error::InsufficientPrecision { needed: need, have: b.precision() });
            }
            let c = expand_rational(field, &center.a[i], &center.h, b.precision())?;
            alpha.push(Frequency::Tail(tail_add(field, &c, b)));
        }
        if !in_major_box(field, &alpha, center, &self.scale)? {
            return Err(Error::Range(format!("a/h + beta is not in the box around {center}")));
        }
        let gauss = gauss_sum_at(field, center, &self.scale.system)?;
        let beta_f: Vec<Frequency> = beta.iter().cloned().map(Frequency::Tail).collect();
        let s_alpha = self.table.weyl_sum(&alpha)?;
        let s_beta = self.table.weyl_sum(&beta_f)?;
        let scale_h = field.q_pow(gauss.deg_h) as i64;
        let exact = s_alpha.scale(scale_h).value_eq(&gauss.cyclo.mul(&s_beta));
        let q_n = field.q_pow(self.scale.n) as f64;
        let lhs = s_alpha.to_complex() / q_n;
        let rhs = gauss.value * (s_beta.to_complex() / q_n);
        let abs_error = (lhs - rhs).norm();
        Ok(MajorArcReport {
            center: center.to_string(),
            lhs_re: lhs.re,
            lhs_im: lhs.im,
            rhs_re: rhs.re,
            rhs_im: rhs.im,
            abs_error,
            exact,
            pass: exact && abs_error <= 1e-9,
        })
    }
}

pub fn verify_major_arc_identity(
    field: &Field,
    center: &RationalPoint,
    beta: &[TailSeries],
    scale: &ArcScale,
) -> Result<MajorArcReport> {
    MajorArcVerifier::new(field, scale)?.verify(center, beta)
}

/// A random `beta` with `a/h + beta` in the box: coefficients above the bound
/// are zero, the rest uniform.
pub fn random_box_offset(
    field: &Field,
    scale: &ArcScale,
    precision: usize,
    rng: &mut impl rand::Rng,
) -> Vec<TailSeries> {
    (0..scale.system.k())
        .map(|i| {
            let top = (-scale.ord_bound(i)).max(1) as usize;
            let mut t = TailSeries::zero(precision);
            for j in top..=precision {
                t.set_coeff(j, rng.gen_range(0..field.q()));
            }
            t
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn f2() -> Field {
        Field::prime(2).unwrap()
    }

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    fn tail(s: &str, prec: usize) -> Frequency {
        Frequency::Tail(TailSeries::parse(s, Some(prec)).unwrap())
    }

    #[test]
    fn centers() {
        let f = f2();
        assert_eq!(enumerate_centers(&f, 0, 2).unwrap(), vec![RationalPoint::zero(2)]);
        let c = enumerate_centers(&f, 1, 1).unwrap();
        let shown: Vec<String> = c.iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, vec!["(1)/(t)", "(1)/(t+1)"]);
        let c = enumerate_centers(&f, 1, 2).unwrap();
        let at_t: Vec<&RationalPoint> = c.iter().filter(|c| c.h == p("t")).collect();
        assert_eq!(at_t.len(), 3);
        assert!(RationalPoint::new(&f, vec![p("t")], p("t^2")).is_err());
    }

    #[test]
    fn box_membership() {
        let f = f2();
        let k1 = ExponentSystem::new(&[1], 2).unwrap();
        let sc = ArcScale::new(&k1, 9);
        assert_eq!(sc.ord_bound(0), -7);
        assert_eq!(sc.max_deg_h(), Some(1));
        let zero = RationalPoint::zero(1);
        assert!(in_major_box(&f, &[Frequency::zero()], &zero, &sc).unwrap());
        assert!(in_major_box(&f, &[tail("t^-8", 12)], &zero, &sc).unwrap());
        assert!(!in_major_box(&f, &[tail("t^-6", 12)], &zero, &sc).unwrap());
        assert!(in_major_box(&f, &[Frequency::Tail(TailSeries::zero(3))], &zero, &sc).is_err());
    }

    #[test]
    fn classification() {
        let f = f2();
        let k1 = ExponentSystem::new(&[1], 2).unwrap();
        let sc = ArcScale::new(&k1, 9);
        assert_eq!(classify(&f, &[Frequency::zero()], &sc).unwrap(), Classification::Major(RationalPoint::zero(1)));
        assert_eq!(classify(&f, &[tail("t^-1+t^-2", 12)], &sc).unwrap(), Classification::Minor);
        let one_over_t = Frequency::Tail(expand_rational(&f, &p("1"), &p("t"), 12).unwrap());
        let c = RationalPoint::new(&f, vec![p("1")], p("t")).unwrap();
        assert_eq!(classify(&f, &[one_over_t], &sc).unwrap(), Classification::Major(c));
    }

    #[test]
    fn disjointness() {
        let f = f2();
        let k1 = ExponentSystem::new(&[1], 2).unwrap();
        let single = check_disjointness(&f, &ArcScale::new(&k1, 2)).unwrap();
        assert_eq!(single.centers, 1);
        assert!(single.pass);
        let k12 = ExponentSystem::new(&[1, 2], 2).unwrap();
        let rep = check_disjointness(&f, &ArcScale::new(&k12, 17)).unwrap();
        assert_eq!(rep.centers, 7);
        assert_eq!(rep.checked, 21);
        assert!(rep.pass);
        // a widened degree bound lets 1/t^2 and 1/(t^2+1) collide
        let bad = ArcScale::new(&k1, 3).with_rho(Ratio::new(1, 1).unwrap());
        let rep = check_disjointness(&f, &bad).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.stamp, NONCONFORMING);
        assert!(rep.violations.contains(&("(1)/(t^2)".to_string(), "(1)/(t^2+1)".to_string())));
    }

    #[test]
    fn major_arc_identity_examples() {
        let f = f2();
        let k1 = ExponentSystem::new(&[1], 2).unwrap();
        let sc = ArcScale::new(&k1, 9);
        let v = MajorArcVerifier::new(&f, &sc).unwrap();
        let c = RationalPoint::new(&f, vec![p("1")], p("t")).unwrap();
        let prec = v.precision();
        assert!(v.verify(&c, &[TailSeries::zero(prec)]).unwrap().pass);
        assert!(v.verify(&c, &[TailSeries::monomial(1, 9, prec)]).unwrap().pass);
        assert!(v.verify(&c, &[TailSeries::monomial(1, 2, prec)]).is_err());

        let k12 = ExponentSystem::new(&[1, 2], 2).unwrap();
        let sc = ArcScale::new(&k12, 17);
        let c = RationalPoint::new(&f, vec![p("1"), Poly::zero()], p("t")).unwrap();
        let v = MajorArcVerifier::new(&f, &sc).unwrap();
        let prec = v.precision().max(40);
        let beta = [TailSeries::monomial(1, 18, prec), TailSeries::monomial(1, 34, prec)];
        assert!(v.verify(&c, &beta).unwrap().pass);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let beta = random_box_offset(&f, &sc, prec, &mut rng);
        assert!(v.verify(&c, &beta).unwrap().pass);
    }
}
