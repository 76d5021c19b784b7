//! Rewriting `T^{(1)}_{P_1(f)} ... T^{(l)}_{P_l(f)}` as
//! `S^{(1)}_{f^{r_1}} ... S^{(k)}_{f^{r_k}}` with every `r_i` prime to `p`.
//!
//! Monomials `a u^e` are grouped by the `p`-free part `r` of `e`. Writing
//! `e = p^nu r`, the class of `r` acts by `S_u = prod T^{(j)}_{a u^{p^nu}}`,
//! which is additive in `u` because Frobenius is.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ergodic::{FiniteSystem, OrbitTerm};
use crate::error::{Error, Result};
use crate::expsum::ExponentSystem;
use crate::field::{Field, Poly};

/// `e = p^nu r` with `p` not dividing `r`.
pub fn p_free_part(e: u64, p: u32) -> Result<(u64, u32)> {
    if e < 1 {
        return Err(Error::Invalid("exponent must be at least 1".into()));
    }
    let (mut r, mut nu) = (e, 0);
    while r % p as u64 == 0 {
        r /= p as u64;
        nu += 1;
    }
    Ok((r, nu))
}

/// Polynomials `P_1, ..., P_l` in `F_q[t][u]` as term lists, with constant
/// terms split off.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolySpec {
    pub actions: usize,
    /// `terms[j]` lists `(coeff, exponent)` of `P_j` with `exponent >= 1`.
    pub terms: Vec<Vec<(Poly, u32)>>,
    /// Constant term of each `P_j`.
    pub constants: Vec<Poly>,
}

impl PolySpec {
    /// Builds a spec from raw `(coeff, exponent)` lists, summing exponent-0
    /// terms into the constants and dropping zero coefficients.
    pub fn new(field: &Field, polys: Vec<Vec<(Poly, u32)>>) -> Result<Self> {
        let mut terms = Vec::with_capacity(polys.len());
        let mut constants = Vec::with_capacity(polys.len());
        for poly in polys {
            let mut c = Poly::zero();
            let mut t = Vec::new();
            for (coeff, e) in poly {
                field.check_poly(&coeff)?;
                if coeff.is_zero() {
                    continue;
                }
                if e == 0 {
                    c = field.poly_add(&c, &coeff);
                } else {
                    t.push((coeff, e));
                }
            }
            terms.push(t);
            constants.push(c);
        }
        Ok(PolySpec { actions: terms.len(), terms, constants })
    }

    /// `{"actions": l, "polys": [[[coeff, exponent], ...], ...]}`; a
    /// coefficient is a polynomial string or an integer element code.
    pub fn from_json(field: &Field, v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("poly spec: {m}"));
        let actions = v["actions"].as_u64().ok_or_else(|| bad("missing actions"))? as usize;
        let polys = v["polys"].as_array().ok_or_else(|| bad("missing polys"))?;
        if polys.len() != actions {
            return Err(Error::Arity { expected: actions, got: polys.len() });
        }
        let mut raw = Vec::with_capacity(actions);
        for poly in polys {
            let mut terms = Vec::new();
            for term in poly.as_array().ok_or_else(|| bad("each poly is a list of terms"))? {
                let coeff = match &term[0] {
                    Value::String(s) => field.parse_poly(s)?,
                    Value::Number(n) => {
                        let c = n.as_u64().ok_or_else(|| bad("coefficient codes are nonnegative"))? as u32;
                        field.check_elem(c)?;
                        Poly::constant(c)
                    }
                    _ => return Err(bad("coefficient must be a string or an integer")),
                };
                let e = term[1].as_u64().ok_or_else(|| bad("exponent must be a nonnegative integer"))? as u32;
                terms.push((coeff, e));
            }
            raw.push(terms);
        }
        Self::new(field, raw)
    }

    pub fn from_json_str(field: &Field, s: &str) -> Result<Self> {
        Self::from_json(field, &serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?)
    }

    pub fn term_count(&self) -> usize {
        self.terms.iter().map(|t| t.len()).sum()
    }

    /// The translations `P_j(f)` including constants.
    pub fn evaluate(&self, field: &Field, f: &Poly) -> Vec<Poly> {
        self.terms
            .iter()
            .zip(&self.constants)
            .map(|(terms, c)| {
                terms
                    .iter()
                    .fold(c.clone(), |acc, (a, e)| field.poly_add(&acc, &field.poly_mul(a, &field.poly_pow(f, *e))))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// 0-based index of the original action.
    #[serde(rename = "actionIndex")]
    pub action: usize,
    pub coeff: Poly,
    #[serde(rename = "pPower")]
    pub p_power: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormClass {
    pub r: u64,
    pub components: Vec<Component>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub p: u32,
    pub classes: Vec<NormalFormClass>,
    /// Constant translate per original action, absorbed into `g`.
    pub constants: Vec<Poly>,
}

impl NormalForm {
    pub fn exponents(&self) -> Vec<u64> {
        self.classes.iter().map(|c| c.r).collect()
    }

    /// The exponent set `{r_1 < ... < r_k}`; fails on the empty form.
    pub fn exponent_system(&self) -> Result<ExponentSystem> {
        let exps: Vec<u32> = self.classes.iter().map(|c| c.r as u32).collect();
        ExponentSystem::new(&exps, self.p)
    }

    /// The same orbit as terms `coeff * f^{p^nu r}` per original action.
    pub fn orbit_terms(&self) -> Vec<OrbitTerm> {
        self.classes
            .iter()
            .flat_map(|c| {
                c.components.iter().map(move |m| OrbitTerm {
                    action: m.action,
                    coeff: m.coeff.clone(),
                    exponent: (m.p_power * c.r) as u32,
                })
            })
            .collect()
    }
}

/// Groups every monomial by the `p`-free part of its exponent. With no
/// nonconstant term left this fails unless `allow_empty` is set.
pub fn reduce_to_normal_form(field: &Field, spec: &PolySpec, allow_empty: bool) -> Result<NormalForm> {
    let p = field.p();
    let mut classes: Vec<NormalFormClass> = Vec::new();
    for (j, terms) in spec.terms.iter().enumerate() {
        for (a, e) in terms {
            let (r, nu) = p_free_part(*e as u64, p)?;
            let comp = Component { action: j, coeff: a.clone(), p_power: (p as u64).pow(nu) };
            match classes.iter_mut().find(|c| c.r == r) {
                Some(c) => c.components.push(comp),
                None => classes.push(NormalFormClass { r, components: vec![comp] }),
            }
        }
    }
    if classes.is_empty() && !allow_empty {
        return Err(Error::Invalid("no nonconstant terms; pass the empty flag for the constant-only case".into()));
    }
    classes.sort_by_key(|c| c.r);
    Ok(NormalForm { p, classes, constants: spec.constants.clone() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub samples: usize,
    pub mismatches: usize,
    pub additivity_checks: usize,
    pub additivity_failures: usize,
    pub pass: bool,
}

fn class_shift(field: &Field, sys: &FiniteSystem, class: &NormalFormClass, u: &Poly) -> Result<usize> {
    let mut s = 0;
    for c in &class.components {
        let m = field.poly_mul(&c.coeff, &field.poly_powmod(u, c.p_power as u32, &sys.h)?);
        s = sys.add(field, s, sys.shift(field, c.action, &m)?);
    }
    Ok(s)
}

/// Compares `T_{P(f)} x` with `S^{(1)}_{f^{r_1}} ... S^{(k)}_{f^{r_k}}` applied
/// after the constant translate, for sampled `f` and `x`, and checks
/// `S_{u+v} = S_u S_v` on sampled `u, v`.
pub fn verify_normal_form(
    field: &Field,
    nf: &NormalForm,
    spec: &PolySpec,
    sys: &FiniteSystem,
    samples: usize,
    max_deg: usize,
    rng: &mut impl Rng,
) -> Result<NormalFormReport> {
    if sys.actions() != spec.actions {
        return Err(Error::Arity { expected: spec.actions, got: sys.actions() });
    }
    let bound = field.q_pow(max_deg).min(u64::MAX as u128) as u64;
    let mut constant = 0;
    for (j, c) in nf.constants.iter().enumerate() {
        constant = sys.add(field, constant, sys.shift(field, j, c)?);
    }
    let mut mismatches = 0;
    let mut additivity_failures = 0;
    for _ in 0..samples {
        let f = field.poly_from_index(rng.gen_range(0..bound));
        let x = rng.gen_range(0..sys.size());
        let mut lhs = x;
        for (j, pj) in spec.evaluate(field, &f).iter().enumerate() {
            lhs = sys.act(field, j, pj, lhs)?;
        }
        let mut rhs = sys.add(field, x, constant);
        for class in &nf.classes {
            let fr = field.poly_powmod(&f, class.r as u32, &sys.h)?;
            rhs = sys.add(field, rhs, class_shift(field, sys, class, &fr)?);
        }
        if lhs != rhs {
            mismatches += 1;
        }
        let u = field.poly_from_index(rng.gen_range(0..bound));
        let v = field.poly_from_index(rng.gen_range(0..bound));
        for class in &nf.classes {
            let sum = class_shift(field, sys, class, &field.poly_add(&u, &v))?;
            let prod = sys.add(field, class_shift(field, sys, class, &u)?, class_shift(field, sys, class, &v)?);
            if sum != prod {
                additivity_failures += 1;
            }
        }
    }
    Ok(NormalFormReport {
        samples,
        mismatches,
        additivity_checks: samples * nf.classes.len(),
        additivity_failures,
        pass: mismatches == 0 && additivity_failures == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergodic::build_translation_system;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> Poly {
        Poly::parse(s).unwrap()
    }

    #[test]
    fn p_free() {
        assert_eq!(p_free_part(12, 2).unwrap(), (3, 2));
        assert_eq!(p_free_part(5, 5).unwrap(), (1, 1));
        assert_eq!(p_free_part(7, 3).unwrap(), (7, 0));
        assert!(p_free_part(0, 2).is_err());
    }

    #[test]
    fn grouping() {
        let f2 = Field::prime(2).unwrap();
        let spec = PolySpec::new(&f2, vec![vec![(p("1"), 3), (p("1"), 6)]]).unwrap();
        let nf = reduce_to_normal_form(&f2, &spec, false).unwrap();
        assert_eq!(nf.classes.len(), 1);
        assert_eq!(nf.classes[0].r, 3);
        let pw: Vec<u64> = nf.classes[0].components.iter().map(|c| c.p_power).collect();
        assert_eq!(pw, vec![1, 2]);

        let sq = reduce_to_normal_form(&f2, &PolySpec::new(&f2, vec![vec![(p("1"), 2)]]).unwrap(), false).unwrap();
        assert_eq!(sq.classes[0].r, 1);
        assert_eq!(sq.classes[0].components[0].p_power, 2);

        let f3 = Field::prime(3).unwrap();
        let two = PolySpec::new(&f3, vec![vec![(p("1"), 1)], vec![(p("1"), 2)]]).unwrap();
        let nf = reduce_to_normal_form(&f3, &two, false).unwrap();
        assert_eq!(nf.exponents(), vec![1, 2]);
        assert_eq!(nf.classes[1].components[0].action, 1);

        let constant = PolySpec::new(&f2, vec![vec![(p("t"), 0)]]).unwrap();
        assert!(reduce_to_normal_form(&f2, &constant, false).is_err());
        assert!(reduce_to_normal_form(&f2, &constant, true).unwrap().classes.is_empty());
    }

    #[test]
    fn json_spec() {
        let f2 = Field::prime(2).unwrap();
        let spec =
            PolySpec::from_json_str(&f2, r#"{"actions": 1, "polys": [[["t", 0], [1, 3], ["t+1", 6]]]}"#).unwrap();
        assert_eq!(spec.constants, vec![p("t")]);
        assert_eq!(spec.term_count(), 2);
        let nf = reduce_to_normal_form(&f2, &spec, false).unwrap();
        let js = serde_json::to_value(&nf).unwrap();
        assert_eq!(js["classes"][0]["components"][1]["pPower"], 2);
    }

    #[test]
    fn verification() {
        let f2 = Field::prime(2).unwrap();
        let sys = build_translation_system(&f2, p("t^3+t+1"), 1, vec![vec![p("1")]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for polys in [
            vec![vec![(p("1"), 1)]],
            vec![vec![(p("1"), 3), (p("1"), 6)]],
            vec![vec![(p("t"), 0), (p("t+1"), 12), (p("1"), 5), (p("t"), 2)]],
        ] {
            let spec = PolySpec::new(&f2, polys).unwrap();
            let nf = reduce_to_normal_form(&f2, &spec, false).unwrap();
            let rep = verify_normal_form(&f2, &nf, &spec, &sys, 50, 8, &mut rng).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
        let spec = PolySpec::new(&f2, vec![vec![(p("t"), 0)]]).unwrap();
        let nf = reduce_to_normal_form(&f2, &spec, true).unwrap();
        assert!(verify_normal_form(&f2, &nf, &spec, &sys, 20, 6, &mut rng).unwrap().pass);
    }
}
