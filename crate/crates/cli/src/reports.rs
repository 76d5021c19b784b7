//! Reports and single-purpose commands.

use clap::{Args, ValueEnum};
use ffcircle::arcs::{classify, ArcScale, Classification, CONFORMING};
use ffcircle::ergodic::{build_translation_system, convergence_probe, oscillation_experiment, FiniteSystem};
use ffcircle::expsum::{gauss_table, ExponentSystem, Frequency};
use ffcircle::functionals::{oscillation, CutPoints, ValueSequence};
use ffcircle::inverse::{
    best_rational_approx, decay_profile, gauss_decay, k_star, minor_arc_scan, shadow_report, verify_weyl_inverse,
};
use ffcircle::torus::TailSeries;
use ffcircle::{Error, Field, Poly, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::Artifact;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Gauss,
    Decay,
    Inverse,
    Oscillation,
    MinorArcScan,
}

/// Knobs shared by the experiments; each reads only the ones it needs.
#[derive(Args, Debug, Clone, Default)]
pub struct ExperimentArgs {
    /// Exponent index for the decay profile (0-based).
    #[arg(long)]
    pub i: Option<usize>,
    /// Targets `Delta` for the decay profile, as `lo..hi` (inclusive) or a list.
    #[arg(long)]
    pub deltas: Option<String>,
    /// Scales, as `lo..hi` (inclusive) or a list.
    #[arg(long = "n-range")]
    pub n_range: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "eta-max")]
    pub eta_max: Option<f64>,
    #[arg(long = "max-deg")]
    pub max_deg: Option<usize>,
    /// Modulus `h` of the translation system.
    #[arg(long)]
    pub modulus: Option<String>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Cut points `n_0 < n_1 < ...`.
    #[arg(long)]
    pub cuts: Option<String>,
    #[arg(long)]
    pub families: Option<usize>,
}

pub fn parse_range(s: &str) -> Result<Vec<i64>> {
    let bad = || Error::Parse(format!("bad range {s:?}; use lo..hi or a,b,c"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn parse_usizes(s: &str) -> Result<Vec<usize>> {
    parse_range(s)?
        .into_iter()
        .map(|v| usize::try_from(v).map_err(|_| Error::Parse(format!("negative value in {s:?}"))))
        .collect()
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn fit_meta(art: &mut Artifact, prefix: &str, fit: &Option<ffcircle::inverse::LineFit>) {
    if let Some(f) = fit {
        let rss: f64 = f.residuals.iter().map(|r| r * r).sum();
        art.meta(&format!("{prefix}_slope"), f.slope)
            .meta(&format!("{prefix}_intercept"), f.intercept)
            .meta(&format!("{prefix}_residual_ss"), rss)
            .meta(&format!("{prefix}_points"), f.points);
    }
}

pub fn report(cfg: &RunConfig, kind: ReportKind, x: &ExperimentArgs) -> Result<Artifact> {
    match kind {
        ReportKind::Gauss => gauss(cfg),
        ReportKind::Decay => decay(cfg, x),
        ReportKind::Inverse => inverse(cfg, x),
        ReportKind::Oscillation => oscillation_report(cfg, x),
        ReportKind::MinorArcScan => minor_scan(cfg, x),
    }
}

fn gauss(cfg: &RunConfig) -> Result<Artifact> {
    let f = &cfg.field;
    let system = cfg.system_or(&[3])?;
    let s_max = cfg.s.unwrap_or(4);
    let decay = gauss_decay(f, &system, s_max)?;
    let mut art = if cfg.exact {
        Artifact::new("report gauss", cfg, CONFORMING, &["s", "center", "abs", "re", "im", "root_counts"])
    } else {
        Artifact::new("report gauss", cfg, CONFORMING, &["s", "centers", "max_abs"])
    };
    art.meta("K", json!(system.exponents)).meta("s_max", s_max);
    if cfg.exact {
        art.meta("root_counts", "times exp(2 pi i j/p) occurs in the sum, for j = 0..p-1");
    }
    if let Some(g) = decay.gamma_hat {
        art.meta("gamma_hat", g);
    }
    fit_meta(&mut art, "fit", &decay.fit);
    for s in 0..=s_max {
        let table = gauss_table(f, s, &system)?;
        if cfg.exact {
            for r in &table.rows {
                let v = r.sum.value;
                art.row(vec![
                    json!(s),
                    json!(r.center.to_string()),
                    json!(v.norm()),
                    json!(v.re),
                    json!(v.im),
                    json!(r.sum.cyclo.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")),
                ]);
            }
        } else {
            art.row(vec![json!(s), json!(table.rows.len()), json!(table.max_abs)]);
        }
    }
    Ok(art)
}

fn decay(cfg: &RunConfig, x: &ExperimentArgs) -> Result<Artifact> {
    let f = &cfg.field;
    let system = cfg.system_or(&[3])?;
    let ns = match &x.n_range {
        Some(r) => parse_usizes(r)?,
        None => vec![cfg.n.unwrap_or(14)],
    };
    let deltas = parse_range(x.deltas.as_deref().unwrap_or("0..6"))?;
    let i = x.i.unwrap_or(0);
    let samples = x.samples.unwrap_or(200);
    let prof = decay_profile(f, &system, i, &ns, &deltas, samples, &mut rng(cfg))?;
    let mut art = Artifact::new("report decay", cfg, CONFORMING, &["n", "delta", "max_abs", "samples", "flag"]);
    art.meta("K", json!(system.exponents)).meta("i", i);
    art.meta("c_hat", prof.c_hat.map(|c| json!(c)).unwrap_or(json!(null)));
    fit_meta(&mut art, "fit", &prof.fit);
    for r in &prof.rows {
        art.row(vec![json!(r.n), json!(r.delta), json!(r.max_abs), json!(r.samples), json!(r.flag)]);
    }
    Ok(art)
}

fn inverse(cfg: &RunConfig, x: &ExperimentArgs) -> Result<Artifact> {
    let f = &cfg.field;
    let system = cfg.system_or(&[3])?;
    let n = cfg.n.unwrap_or(10);
    let trials = x.trials.unwrap_or(200);
    let eta_max = x.eta_max.unwrap_or(n as f64);
    let max_deg = x.max_deg.unwrap_or(n / 2);
    let rep = verify_weyl_inverse(f, &system, n, trials, eta_max, max_deg, &mut rng(cfg))?;
    let mut art = Artifact::new(
        "report inverse",
        cfg,
        CONFORMING,
        &["sample", "eta", "i", "lambda", "deg_g", "ord_gap", "g", "a"],
    );
    art.meta("K", json!(system.exponents))
        .meta("n", n)
        .meta("trials", trials)
        .meta("eta_max", eta_max)
        .meta("max_deg", max_deg)
        .meta("used", rep.used)
        .meta("excluded_zero", rep.excluded_zero)
        .meta("excluded_eta", rep.excluded_eta)
        .meta("C_hat", rep.c_hat.map(|c| json!(c)).unwrap_or(json!(null)))
        .meta("D_hat", rep.d_hat.map(|c| json!(c)).unwrap_or(json!(null)))
        .meta("pass", rep.pass);
    fit_meta(&mut art, "fit", &rep.fit);
    for (k, s) in rep.samples.iter().enumerate() {
        for (i, w) in s.witnesses.iter().enumerate() {
            art.row(vec![
                json!(k),
                json!(s.eta),
                json!(i),
                json!(s.lambda[i]),
                json!(w.deg_g),
                w.ord_gap.map(|o| json!(o)).unwrap_or(json!("-inf")),
                json!(w.g.to_string()),
                json!(w.a.to_string()),
            ]);
        }
    }
    Ok(art)
}

fn translation_system(f: &Field, modulus: Option<&str>, actions: usize) -> Result<FiniteSystem> {
    let h = f.parse_poly(modulus.unwrap_or("t^2+t+1"))?;
    let dirs: Vec<Vec<Poly>> = (0..actions).map(|j| vec![f.poly_shift(&Poly::one(), j)]).collect();
    build_translation_system(f, h, 1, dirs)
}

fn seeded_g(sys: &FiniteSystem, rng: &mut impl rand::Rng) -> Vec<f64> {
    (0..sys.size()).map(|_| rng.gen_range(0..10) as f64).collect()
}

fn oscillation_report(cfg: &RunConfig, x: &ExperimentArgs) -> Result<Artifact> {
    let f = &cfg.field;
    let system = cfg.system_or(&[1])?;
    let sys = translation_system(f, x.modulus.as_deref(), system.k())?;
    let mut rng = rng(cfg);
    let g = seeded_g(&sys, &mut rng);
    let n_max = x.nmax.unwrap_or(6);
    let families = x.families.unwrap_or(50);
    let rep = oscillation_experiment(f, &sys, &g, &system, n_max, families, &mut rng)?;
    let mut art = Artifact::new(
        "report oscillation",
        cfg,
        CONFORMING,
        &["families", "n_max", "max_ratio", "worst_cuts", "stabilization_index"],
    );
    art.meta("K", json!(system.exponents)).meta("modulus", sys.h.to_string());
    art.row(vec![
        json!(families),
        json!(n_max),
        json!(rep.max_ratio),
        json!(rep.worst_cuts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")),
        json!(rep.stabilization_index),
    ]);
    Ok(art)
}

fn minor_scan(cfg: &RunConfig, x: &ExperimentArgs) -> Result<Artifact> {
    let f = &cfg.field;
    let system = cfg.system_or(&[3])?;
    let ns = match &x.n_range {
        Some(r) => parse_usizes(r)?,
        None => (8..=cfg.n.unwrap_or(14)).collect(),
    };
    let samples = x.samples.unwrap_or(200);
    let scan = minor_arc_scan(f, &system, &ns, samples, &mut rng(cfg))?;
    let mut art = Artifact::new("report minor-arc-scan", cfg, CONFORMING, &["n", "minor_samples", "max_abs"]);
    art.meta("K", json!(system.exponents)).meta("samples", samples);
    fit_meta(&mut art, "fit", &scan.fit);
    for r in &scan.rows {
        art.row(vec![json!(r.n), json!(r.minor_samples), json!(r.max_abs)]);
    }
    Ok(art)
}

fn k_list(cfg: &RunConfig) -> Result<Vec<u64>> {
    let exps = cfg.exponents.clone().ok_or_else(|| Error::Invalid("pass the exponent set with --exponents".into()))?;
    Ok(exps.into_iter().map(u64::from).collect())
}

fn set_str(s: impl IntoIterator<Item = u64>) -> String {
    format!("{{{}}}", s.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
}

pub fn shadow_cmd(cfg: &RunConfig) -> Result<Artifact> {
    let k = k_list(cfg)?;
    let rep = shadow_report(&k, cfg.field.p())?;
    let mut art = Artifact::new("shadow", cfg, CONFORMING, &["K", "p", "shadow", "kStar", "maximalElems", "agree"]);
    art.row(vec![
        json!(set_str(rep.k.iter().copied())),
        json!(rep.p),
        json!(set_str(rep.shadow)),
        json!(set_str(rep.k_star)),
        json!(set_str(rep.maximal)),
        json!(rep.agree),
    ]);
    Ok(art)
}

pub fn kstar_cmd(cfg: &RunConfig) -> Result<Artifact> {
    let k = k_list(cfg)?;
    let ks = k_star(&k, cfg.field.p())?;
    let mut art = Artifact::new("kstar", cfg, CONFORMING, &["K", "p", "kStar"]);
    art.row(vec![json!(set_str(k)), json!(cfg.field.p()), json!(set_str(ks))]);
    Ok(art)
}

#[derive(Args, Debug, Clone)]
pub struct ApproxArgs {
    /// Torus element, e.g. `t^-1+t^-5`.
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub precision: Option<usize>,
    /// `r_i n`, the depth the gap is measured against.
    #[arg(long)]
    pub rn: usize,
    #[arg(long = "max-deg")]
    pub max_deg: usize,
}

pub fn approx_cmd(cfg: &RunConfig, a: &ApproxArgs) -> Result<Artifact> {
    let alpha = TailSeries::parse(&a.alpha, Some(a.precision.unwrap_or(a.rn + a.max_deg)))?;
    ffcircle::torus::check_tail(&cfg.field, &alpha)?;
    let w = best_rational_approx(&cfg.field, &alpha, a.rn, a.max_deg)?;
    let mut art = Artifact::new("approx", cfg, CONFORMING, &["g", "a", "ordGap", "degG", "reduced"]);
    art.meta("alpha", a.alpha.clone()).meta("precision", alpha.precision()).meta("rn", a.rn).meta("maxDeg", a.max_deg);
    art.row(vec![
        json!(w.g.to_string()),
        json!(w.a.to_string()),
        w.ord_gap.map(|o| json!(o)).unwrap_or(json!("-inf")),
        json!(w.deg_g),
        json!(w.reduced),
    ]);
    Ok(art)
}

pub fn ergodic_sim(cfg: &RunConfig, x: &ExperimentArgs) -> Result<Artifact> {
    let f = &cfg.field;
    let system = cfg.system_or(&[1])?;
    let sys = translation_system(f, x.modulus.as_deref(), system.k())?;
    let g = seeded_g(&sys, &mut rng(cfg));
    let n_max = x.nmax.unwrap_or(sys.deg_h() + 3);
    let trace = convergence_probe(f, &sys, &g, &system, n_max)?;
    let cuts = match &x.cuts {
        Some(c) => CutPoints::new(parse_usizes(c)?)?,
        None => CutPoints::new(vec![0, n_max])?,
    };
    if cuts.last() > n_max {
        return Err(Error::Range(format!("cut {} exceeds --nmax {n_max}", cuts.last())));
    }
    let mut osc2 = 0.0;
    for xi in 0..sys.size() {
        let seq = ValueSequence::new(0, trace.averages.iter().map(|a| Complex64::new(a[xi], 0.0)).collect());
        osc2 += oscillation(&seq, &cuts)?.powi(2);
    }
    let mut art = Artifact::new("ergodic-sim", cfg, CONFORMING, &["n", "x", "g", "average"]);
    art.meta("K", json!(system.exponents))
        .meta("modulus", sys.h.to_string())
        .meta("nmax", n_max)
        .meta("cuts", json!(cuts.points()))
        .meta("stabilization_index", trace.stabilization_index)
        .meta("limit_invariant", trace.limit_invariant)
        .meta("oscillation_norm", osc2.sqrt());
    for (n, avg) in trace.averages.iter().enumerate() {
        for (xi, v) in avg.iter().enumerate() {
            art.row(vec![json!(n), json!(xi), json!(g[xi]), json!(v)]);
        }
    }
    Ok(art)
}

#[derive(Args, Debug, Clone)]
pub struct ClassifyArgs {
    /// One torus element per exponent, e.g. `--alpha t^-3 --alpha 0`.
    #[arg(long, required = true)]
    pub alpha: Vec<String>,
}

pub fn classify_cmd(cfg: &RunConfig, a: &ClassifyArgs) -> Result<Artifact> {
    let system: ExponentSystem = cfg.system_or(&[1])?;
    if a.alpha.len() != system.k() {
        return Err(Error::Arity { expected: system.k(), got: a.alpha.len() });
    }
    let mut scale = ArcScale::new(&system, cfg.n.unwrap_or(8));
    if let Some(r) = cfg.override_rho {
        scale = scale.with_rho(r);
    }
    let prec = scale.decision_precision();
    let alpha: Vec<Frequency> = a
        .alpha
        .iter()
        .map(|s| {
            let t = if s.trim() == "0" { TailSeries::zero(prec) } else { TailSeries::parse(s, Some(prec))? };
            ffcircle::torus::check_tail(&cfg.field, &t)?;
            Ok(Frequency::Tail(t))
        })
        .collect::<Result<_>>()?;
    let class = classify(&cfg.field, &alpha, &scale)?;
    let mut art = Artifact::new("classify", cfg, scale.stamp(), &["alpha", "class", "center"]);
    art.meta("K", json!(system.exponents)).meta("n", scale.n).meta("precision", prec);
    let (name, center) = match class {
        Classification::Major(c) => ("major", c.to_string()),
        Classification::Minor => ("minor", String::new()),
    };
    art.row(vec![json!(a.alpha.join(" ; ")), json!(name), json!(center)]);
    Ok(art)
}
