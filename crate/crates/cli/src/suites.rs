//! `verify` suites. Each returns an artifact whose `pass` entry drives the
//! exit status.

use clap::ValueEnum;
use ffcircle::arcs::{centers_up_to, check_disjointness, random_box_offset, ArcScale, MajorArcVerifier, CONFORMING};
use ffcircle::ergodic::{build_translation_system, transference_check};
use ffcircle::expsum::{CycloSum, Frequency, PowerTable};
use ffcircle::functionals::{weak_11_check, CutPoints};
use ffcircle::operators::{apply_d, verify_large_scale_identity, GridFunction, OperatorParams};
use ffcircle::torus::{ord_of, TailSeries};
use ffcircle::{Poly, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::Artifact;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Orthogonality,
    MajorArc,
    LargeScale,
    Weak11,
    Transference,
    Projections,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Orthogonality => "orthogonality",
            Suite::MajorArc => "major-arc",
            Suite::LargeScale => "large-scale",
            Suite::Weak11 => "weak11",
            Suite::Transference => "transference",
            Suite::Projections => "projections",
            Suite::All => "all",
        }
    }

    pub fn each() -> [Suite; 6] {
        [
            Suite::Orthogonality,
            Suite::MajorArc,
            Suite::LargeScale,
            Suite::Weak11,
            Suite::Transference,
            Suite::Projections,
        ]
    }
}

const TOL: f64 = 1e-9;

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn finish(mut art: Artifact, pass: bool) -> Artifact {
    art.meta("pass", pass);
    art
}

/// Operator parameters with the rho override applied when given.
pub fn operator_params(cfg: &RunConfig, default_k: &[u32], s: usize, n: usize) -> Result<OperatorParams> {
    let p = OperatorParams::new(&cfg.field, &cfg.system_or(default_k)?, s, n)?;
    Ok(match cfg.override_rho {
        Some(r) => p.with_rho(r),
        None => p,
    })
}

pub fn run(cfg: &RunConfig, suite: Suite) -> Result<Artifact> {
    match suite {
        Suite::Orthogonality => orthogonality(cfg),
        Suite::MajorArc => major_arc(cfg),
        Suite::LargeScale => large_scale(cfg),
        Suite::Weak11 => weak11(cfg),
        Suite::Transference => transference(cfg),
        Suite::Projections => projections(cfg),
        Suite::All => unreachable!("expanded by the caller"),
    }
}

fn orthogonality(cfg: &RunConfig) -> Result<Artifact> {
    let f = &cfg.field;
    let q = f.q();
    let n_max = cfg.n.unwrap_or(8);
    let prec = n_max.max(12) + 4;
    let system = ffcircle::expsum::ExponentSystem::new(&[1], f.p())?;
    let mut rng = rng(cfg);
    let mut alphas = Vec::new();
    for t in 0..500 {
        let o = 1 + t % 12;
        let mut a = TailSeries::zero(prec);
        a.set_coeff(o, rng.gen_range(1..q));
        for j in o + 1..=prec {
            a.set_coeff(j, rng.gen_range(0..q));
        }
        alphas.push(Frequency::Tail(a));
    }
    for c in centers_up_to(f, 2, 1)? {
        alphas.push(Frequency::Rational { a: c.a[0].clone(), h: c.h });
    }
    let mut art =
        Artifact::new("verify orthogonality", cfg, CONFORMING, &["n", "samples", "failures", "max_abs_error", "pass"]);
    art.meta("K", json!([1]));
    let mut all = true;
    for n in 0..=n_max {
        let table = PowerTable::new(f, &system, n)?;
        let (mut failures, mut worst) = (0, 0.0f64);
        for alpha in &alphas {
            let tail = alpha.to_tail(f, prec)?;
            let mut want = CycloSum::new(f.p());
            if ord_of(&tail).map(|o| o < -(n as i64)).unwrap_or(true) {
                want.add_root(0);
                want = want.scale(f.q_pow(n) as i64);
            }
            let got = table.weyl_sum(std::slice::from_ref(alpha))?;
            worst = worst.max((got.to_complex() - want.to_complex()).norm());
            if !got.value_eq(&want) {
                failures += 1;
            }
        }
        let pass = failures == 0 && worst <= TOL;
        all &= pass;
        art.row(vec![json!(n), json!(alphas.len()), json!(failures), json!(worst), json!(pass)]);
    }
    Ok(finish(art, all))
}

fn major_arc(cfg: &RunConfig) -> Result<Artifact> {
    let f = &cfg.field;
    let system = cfg.system_or(&[1])?;
    let mut scale = ArcScale::new(&system, cfg.n.unwrap_or(9));
    if let Some(r) = cfg.override_rho {
        scale = scale.with_rho(r);
    }
    let ver = MajorArcVerifier::new(f, &scale)?;
    let prec = ver.precision().max(scale.decision_precision());
    let mut rng = rng(cfg);
    let mut art =
        Artifact::new("verify major-arc", cfg, scale.stamp(), &["center", "samples", "max_abs_error", "exact", "pass"]);
    art.meta("K", json!(system.exponents)).meta("n", scale.n);
    let mut all = true;
    for c in scale.centers(f)? {
        let (mut worst, mut exact, mut pass) = (0.0f64, true, true);
        for _ in 0..50 {
            let beta = random_box_offset(f, &scale, prec, &mut rng);
            let rep = ver.verify(&c, &beta)?;
            worst = worst.max(rep.abs_error);
            exact &= rep.exact;
            pass &= rep.pass;
        }
        all &= pass;
        art.row(vec![json!(c.to_string()), json!(50), json!(worst), json!(exact), json!(pass)]);
    }
    let disjoint = check_disjointness(f, &scale)?;
    art.meta("disjoint_pairs_checked", disjoint.checked).meta("disjoint_violations", disjoint.violations.len());
    Ok(finish(art, all && disjoint.pass))
}

fn large_scale(cfg: &RunConfig) -> Result<Artifact> {
    let f = &cfg.field;
    let params = operator_params(cfg, &[1], cfg.s.unwrap_or(1), cfg.n.unwrap_or(16))?;
    let k = params.k();
    let mut rng = rng(cfg);
    let mut gs = vec![("delta_0".to_string(), GridFunction::delta(f, &vec![1; k], &vec![0; k])?)];
    for i in 0..5 {
        gs.push((
            format!("random_{i}"),
            GridFunction::random(f, &vec![if k == 1 { 6 } else { 3 }; k], 0.1, false, &mut rng)?,
        ));
    }
    let mut art =
        Artifact::new("verify large-scale", cfg, params.stamp(), &["function", "points", "max_abs_error", "pass"]);
    art.meta("K", json!(params.system.exponents)).meta("s", params.s).meta("n", params.n);
    let mut all = true;
    for (name, g) in &gs {
        let rep = verify_large_scale_identity(f, g, &params)?;
        all &= rep.pass;
        art.row(vec![json!(name), json!(rep.points), json!(rep.max_abs_error), json!(rep.pass)]);
    }
    Ok(finish(art, all))
}

fn weak11(cfg: &RunConfig) -> Result<Artifact> {
    let f = &cfg.field;
    let params = operator_params(cfg, &[1], cfg.s.unwrap_or(0), cfg.n.unwrap_or(1))?;
    let k = params.k();
    let mut rng = rng(cfg);
    let mut art =
        Artifact::new("verify weak11", cfg, params.stamp(), &["function", "box", "l1", "max_count_ratio", "pass"]);
    art.meta("K", json!(params.system.exponents)).meta("s", params.s);
    let mut all = true;
    for t in 0..50 {
        let d = if k == 1 { 4 + t % 7 } else { 2 + t % 3 };
        let g = GridFunction::random(f, &vec![d; k], 0.3, true, &mut rng)?;
        let top = g.sup().max(1e-3);
        let alphas: Vec<f64> = (0..20).map(|j| top * 2f64.powf(-(j as f64) / 2.0)).collect();
        let rep = weak_11_check(f, &g, &params, &alphas)?;
        let l1 = g.l1();
        let ratio =
            rep.rows.iter().map(|r| if l1 > 0.0 { r.count as f64 * r.alpha / l1 } else { 0.0 }).fold(0.0, f64::max);
        all &= rep.pass;
        art.row(vec![json!(t), json!(format!("{d}^{k}")), json!(l1), json!(ratio), json!(rep.pass)]);
    }
    Ok(finish(art, all))
}

fn transference(cfg: &RunConfig) -> Result<Artifact> {
    let f = &cfg.field;
    let system = cfg.system_or(&[1, 2])?;
    let big_k = cfg.n.unwrap_or(3);
    let h = f.parse_poly("t^2+t+1")?;
    let dirs: Vec<Vec<Poly>> = (0..system.k()).map(|j| vec![f.poly_shift(&Poly::one(), j)]).collect();
    let sys = build_translation_system(f, h.clone(), 1, dirs)?;
    let mut rng = rng(cfg);
    let g: Vec<f64> = (0..sys.size()).map(|_| rng.gen_range(0..5) as f64).collect();
    let cuts = CutPoints::new((0..=big_k).collect())?;
    let rep = transference_check(f, &sys, &g, &system, big_k, 20, &cuts, &mut rng)?;
    let mut art = Artifact::new(
        "verify transference",
        cfg,
        CONFORMING,
        &[
            "samples",
            "max_abs_error",
            "phi_norm_sum",
            "phi_norm_expected",
            "oscillation_lhs",
            "oscillation_rhs",
            "pass",
        ],
    );
    art.meta("K", json!(system.exponents)).meta("bigK", big_k).meta("modulus", h.to_string());
    art.row(vec![
        json!(rep.samples),
        json!(rep.max_abs_error),
        json!(rep.phi_norm_sum),
        json!(rep.phi_norm_expected),
        json!(rep.oscillation_lhs),
        json!(rep.oscillation_rhs),
        json!(rep.pass),
    ]);
    Ok(finish(art, rep.pass))
}

fn projections(cfg: &RunConfig) -> Result<Artifact> {
    let f = &cfg.field;
    let s = cfg.s.unwrap_or(0);
    let base = operator_params(cfg, &[1], s, 1)?;
    let n1 = cfg.n.unwrap_or(base.ns.max(2));
    let params = base.at_n(n1);
    let later = params.at_n(n1 + 2);
    let k = params.k();
    let mut rng = rng(cfg);
    let mut art = Artifact::new(
        "verify projections",
        cfg,
        params.stamp(),
        &["function", "idempotence_error", "monotone_error", "pass"],
    );
    art.meta("K", json!(params.system.exponents)).meta("s", s).meta("n1", n1).meta("n2", n1 + 2);
    let mut all = true;
    for t in 0..20 {
        let g = GridFunction::random(f, &vec![if k == 1 { 4 } else { 2 }; k], 0.6, false, &mut rng)?;
        let d1 = apply_d(f, &g, &params)?;
        let idem = d1.max_abs_diff(f, &apply_d(f, &d1, &params)?)?;
        let mono = apply_d(f, &g, &later)?.max_abs_diff(f, &apply_d(f, &d1, &later)?)?;
        let pass = idem <= TOL && mono <= TOL;
        all &= pass;
        art.row(vec![json!(t), json!(idem), json!(mono), json!(pass)]);
    }
    Ok(finish(art, all))
}
