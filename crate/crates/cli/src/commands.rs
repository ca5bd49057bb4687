//! One function per subcommand: build the inputs, run the experiment, fill
//! a [`Table`]. Summaries that do not fit the table go to stderr.

use std::path::Path;
use std::sync::Arc;

use clap::{Args, Subcommand};
use cotlab::contfrac::{
    c_alpha_r, cf_expand, emeasure_sweep, growth_fit, shift_check, tail_depth, BigUint, RealInput, WSequence,
};
use cotlab::cotangent::{c0, coprime_window, Window};
use cotlab::distribution::{
    decomposition_bounds, equidist_experiment, from_sample_set, g_vs_c_scatter, quantile_cells, tail_measure,
    EmpiricalCDF,
};
use cotlab::gseries::{g_decompose_batch, Damping, GEvaluator};
use cotlab::moments::{
    abs_moment_from_samples, hk_from_cotangent, hk_from_samples, radius_diagnostics, MomentEstimate, MomentMethod,
    Normalization,
};
use cotlab::rng::uniform_points;
use cotlab::tolerances::{E_Z_GRID, LIMSUP_TOLERANCE};
use rayon::prelude::*;

use crate::cache::Cache;
use crate::config::Settings;
use crate::output::{float, Cell, Table};
use crate::CliError;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// c0(r/b) for every reduced r/b in a window
    C0(C0Args),
    /// g at given points, or at seeded uniform points
    G(GArgs),
    /// Continued-fraction expansion with convergents and c(alpha, r)
    Cf(CfArgs),
    /// Moment estimates H_k or absolute moments
    Moments(MomentsArgs),
    /// rho_k = (H_k / (2k)!)^(1/k) with envelope and limsup checks
    Radius(RadiusArgs),
    /// Tail measures meas{|g| >= t} with a log-linear fit
    Tail(TailArgs),
    /// Equidistribution of c0(r/b)/b against the law of g
    Equidist(EquidistArgs),
    /// Head/middle/tail split of g and its bounds on I(k)
    Decompose(DecomposeArgs),
    /// Monte Carlo measures of the exceptional sets E(z, r)
    Emeasure(EmeasureArgs),
    /// |g| against the truncated c(alpha, R), with the covering envelope
    Scatter(ScatterArgs),
}

#[derive(Debug, Args)]
pub struct C0Args {
    #[arg(long)]
    pub b: u64,
    #[arg(long, default_value_t = 0.0)]
    pub a0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a1: f64,
}

#[derive(Debug, Args)]
pub struct GArgs {
    /// Comma-separated points; without them `--samples` uniform points are drawn
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct CfArgs {
    /// p/q, a decimal such as 0.618, `golden` or `sqrt2-1`
    #[arg(long)]
    pub x: String,
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    /// Stop once a denominator q_r exceeds this
    #[arg(long)]
    pub q_bound: Option<String>,
    /// Also check that T^r shifts the expansion, for this r
    #[arg(long)]
    pub shift: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Comma-separated k (or L for absolute moments)
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub k: Vec<u32>,
    /// quadrature, cotangent or absolute
    #[arg(long, default_value = "quadrature")]
    pub estimator: String,
    /// Denominator for the cotangent estimator
    #[arg(long)]
    pub b: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    pub a0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a1: f64,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    /// Moments CSV as written by `moments`; computed afresh when absent
    #[arg(long)]
    pub input: Option<std::path::PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub k_max: u32,
    /// Largest L of the absolute moments behind the envelope fit
    #[arg(long, default_value_t = 12)]
    pub l_max: u32,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8")]
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct EquidistArgs {
    #[arg(long, default_value_t = 10007)]
    pub b: u64,
    #[arg(long, default_value_t = 0.51)]
    pub a0: f64,
    #[arg(long, default_value_t = 0.99)]
    pub a1: f64,
    /// Number of equal-mass cells of the reference law
    #[arg(long, default_value_t = 8)]
    pub cells: usize,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Comma-separated points; without them the sampled bound report is produced
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct EmeasureArgs {
    #[arg(long, value_delimiter = ',')]
    pub z: Vec<f64>,
    #[arg(long, default_value_t = 6)]
    pub r_max: usize,
    /// Base A of the exponential lower bound q_r >= A^r
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub growth_base: f64,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    /// Truncation R of c(alpha, R); defaults to the depth for a 1e-6 tail
    #[arg(long)]
    pub depth: Option<usize>,
}

fn status(msg: impl AsRef<str>) {
    eprintln!("cotlab: {}", msg.as_ref());
}

pub fn evaluator(s: &Settings, cache: &Cache) -> Result<GEvaluator, CliError> {
    let table = if s.method.uses_fourier() {
        Some(Arc::new(cache.divisor_table(2 * s.m_terms)?))
    } else {
        None
    };
    let damping = if s.fejer { Damping::Fejer } else { Damping::None };
    Ok(GEvaluator::with_table(s.method, s.n_terms, s.m_terms, table)?
        .with_tolerance(s.tolerance)
        .with_damping(damping))
}

pub fn run(cmd: &Command, s: &Settings) -> Result<Table, CliError> {
    let cache = Cache::new(s.cache_dir());
    match cmd {
        Command::C0(a) => cmd_c0(a),
        Command::G(a) => cmd_g(a, s, &cache),
        Command::Cf(a) => cmd_cf(a),
        Command::Moments(a) => cmd_moments(a, s, &cache),
        Command::Radius(a) => cmd_radius(a, s, &cache),
        Command::Tail(a) => cmd_tail(a, s, &cache),
        Command::Equidist(a) => cmd_equidist(a, s, &cache),
        Command::Decompose(a) => cmd_decompose(a, s, &cache),
        Command::Emeasure(a) => cmd_emeasure(a, s),
        Command::Scatter(a) => cmd_scatter(a, s, &cache),
    }
}

fn cmd_c0(a: &C0Args) -> Result<Table, CliError> {
    let w = Window::relaxed(a.b, a.a0, a.a1)?;
    let fractions = coprime_window(&w);
    let values: Vec<f64> = fractions.par_iter().map(c0).collect();
    let mut t = Table::new(&["b", "r", "c0", "c0_over_b"]);
    for (f, v) in fractions.iter().zip(values) {
        t.push(vec![f.b().into(), f.r().into(), v.into(), (v / f.b() as f64).into()]);
    }
    Ok(t)
}

fn cmd_g(a: &GArgs, s: &Settings, cache: &Cache) -> Result<Table, CliError> {
    let cfg = evaluator(s, cache)?;
    let alphas = if a.alpha.is_empty() { uniform_points(s.samples, s.seed, 0, 1.0) } else { a.alpha.clone() };
    if let Some(x) = alphas.iter().find(|x| !x.is_finite()) {
        return Err(CliError::Usage(format!("alpha must be finite, got {x}")));
    }
    let values = cfg.eval_batch(&alphas);
    let flagged = values.iter().filter(|v| v.flagged).count();
    if flagged > 0 {
        status(format!("{flagged} of {} estimates exceed the spread tolerance {}", values.len(), s.tolerance));
    }
    let mut t = Table::new(&["alpha", "value", "spread", "method", "N", "M", "seed"]);
    for (x, v) in alphas.iter().zip(values) {
        t.push(vec![
            (*x).into(),
            v.value.into(),
            v.spread.into(),
            cfg.method().name().into(),
            s.n_terms.into(),
            s.m_terms.into(),
            s.seed.into(),
        ]);
    }
    Ok(t)
}

fn cmd_cf(a: &CfArgs) -> Result<Table, CliError> {
    let x = RealInput::parse(&a.x)?;
    let bound = a
        .q_bound
        .as_deref()
        .map(|q| q.parse::<BigUint>().map_err(|_| CliError::Usage(format!("cannot parse q bound {q:?}"))))
        .transpose()?;
    let cf = cf_expand(&x, a.depth, bound.as_ref())?;
    let mut t = Table::new(&["r", "a", "p", "q", "c_alpha_r"]);
    for r in 1..=cf.depth() {
        let c = if r < cf.depth() { Cell::Float(c_alpha_r(&cf, r)?) } else { Cell::Missing };
        let ri = r as isize;
        t.push(vec![
            r.into(),
            cf.a(r).to_string().into(),
            cf.p(ri).to_string().into(),
            cf.q(ri).to_string().into(),
            c,
        ]);
    }
    if cf.terminated() {
        status("expansion terminated (exact rational)");
    }
    if cf.depth() >= 2 {
        status(format!("growth fit min q_r^(1/r) = {}", float(growth_fit(&cf)?)));
    }
    if let Some(r) = a.shift {
        let depth = a.depth.saturating_sub(r).max(1);
        status(format!("shift check T^{r}, {depth} digits: {}", shift_check(&x, r, depth)?));
    }
    Ok(t)
}

const MOMENT_HEADER: [&str; 7] = ["k", "method", "normalization", "value", "stderr", "n", "seed"];

fn moment_row(m: &MomentEstimate) -> Vec<Cell> {
    vec![
        m.k.into(),
        m.method.name().into(),
        m.normalization.map_or("none", |n| n.name()).into(),
        m.value.into(),
        m.stderr.into(),
        m.n.into(),
        m.seed.map_or(Cell::Missing, Cell::from),
    ]
}

fn cmd_moments(a: &MomentsArgs, s: &Settings, cache: &Cache) -> Result<Table, CliError> {
    let method = MomentMethod::parse(&a.estimator).ok_or_else(|| {
        CliError::Usage(format!("unknown estimator {:?} (quadrature, cotangent, absolute)", a.estimator))
    })?;
    let rows: Vec<MomentEstimate> = match method {
        MomentMethod::Cotangent => {
            let b = a.b.ok_or_else(|| CliError::Usage("the cotangent estimator needs --b".into()))?;
            let w = Window::relaxed(b, a.a0, a.a1)?;
            a.k.iter().map(|&k| hk_from_cotangent(k, &w)).collect::<Result<_, _>>()?
        }
        MomentMethod::Quadrature | MomentMethod::Absolute => {
            let cfg = evaluator(s, cache)?;
            let set = cache.sample_set(s, &cfg)?;
            report_rejections(set.rejected(), set.unresolved(), set.len());
            a.k.iter()
                .map(|&k| match method {
                    MomentMethod::Quadrature => hk_from_samples(&set, k, s.normalization),
                    _ => abs_moment_from_samples(&set, k),
                })
                .collect::<Result<_, _>>()?
        }
    };
    let mut t = Table::new(&MOMENT_HEADER);
    rows.iter().for_each(|m| t.push(moment_row(m)));
    Ok(t)
}

fn report_rejections(rejected: usize, unresolved: usize, n: usize) {
    if rejected > 0 {
        status(format!("{rejected} flagged g evaluations redrawn over {n} samples"));
    }
    if rejected * 100 > n {
        status("warning: more than 1% of g evaluations were flagged");
    }
    if unresolved > 0 {
        status(format!("warning: {unresolved} samples still flagged after resampling"));
    }
}

pub fn read_moments_csv(path: &Path) -> Result<Vec<MomentEstimate>, CliError> {
    let bad = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != MOMENT_HEADER {
        return Err(bad(format!("expected header {}", MOMENT_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = i + 2;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let num = |j: usize| -> Result<f64, CliError> {
            field(j).parse().map_err(|_| bad(format!("line {line}: bad number {:?}", field(j))))
        };
        let method = MomentMethod::parse(field(1)).ok_or_else(|| bad(format!("line {line}: bad method")))?;
        let normalization = match field(2) {
            "none" => None,
            other => Some(Normalization::parse(other).ok_or_else(|| bad(format!("line {line}: bad normalization")))?),
        };
        out.push(MomentEstimate {
            k: field(0).parse().map_err(|_| bad(format!("line {line}: bad k")))?,
            method,
            normalization,
            value: num(3)?,
            stderr: num(4)?,
            n: field(5).parse().map_err(|_| bad(format!("line {line}: bad n")))?,
            seed: if field(6).is_empty() {
                None
            } else {
                Some(field(6).parse().map_err(|_| bad(format!("line {line}: bad seed")))?)
            },
            rejected: 0,
        });
    }
    Ok(out)
}

fn cmd_radius(a: &RadiusArgs, s: &Settings, cache: &Cache) -> Result<Table, CliError> {
    let moments = match &a.input {
        Some(path) => read_moments_csv(path)?,
        None => {
            let cfg = evaluator(s, cache)?;
            let set = cache.sample_set(s, &cfg)?;
            report_rejections(set.rejected(), set.unresolved(), set.len());
            let mut m: Vec<MomentEstimate> =
                (0..=a.k_max).map(|k| hk_from_samples(&set, k, s.normalization)).collect::<Result<_, _>>()?;
            for l in 1..=a.l_max {
                m.push(abs_moment_from_samples(&set, l)?);
            }
            m
        }
    };
    let d = radius_diagnostics(&moments, LIMSUP_TOLERANCE)?;
    let norm = d.normalization.map_or("none", |n| n.name());
    status(format!(
        "normalization {norm}: max rho_k = {}, consistent with limsup >= 1/pi^2 - {LIMSUP_TOLERANCE}: {}",
        float(d.max_rho),
        d.meets_limsup
    ));
    if let (Some(c), Some(below)) = (d.c_fit, d.below_envelope) {
        status(format!("envelope constant C = {}, rho_k below envelope: {below}", float(c)));
    }
    let mut t = Table::new(&["k", "Hk", "rho_k"]);
    for r in &d.rows {
        t.push(vec![r.k.into(), r.hk.into(), r.rho.into()]);
    }
    Ok(t)
}

fn cmd_tail(a: &TailArgs, s: &Settings, cache: &Cache) -> Result<Table, CliError> {
    let cfg = evaluator(s, cache)?;
    let set = cache.sample_set(s, &cfg)?;
    report_rejections(set.rejected(), set.unresolved(), set.len());
    let fit = tail_measure(&a.thresholds, &from_sample_set(&set).cdf)?;
    match fit.slope {
        Some(slope) => status(format!("log-measure slope {}", float(slope))),
        None => status("fewer than two thresholds with enough hits; no slope"),
    }
    let mut t = Table::new(&["t", "measure", "stderr", "log_measure"]);
    for r in &fit.rows {
        t.push(vec![r.t.into(), r.measure.into(), r.stderr.into(), r.log_measure.into()]);
    }
    Ok(t)
}

fn cmd_equidist(a: &EquidistArgs, s: &Settings, cache: &Cache) -> Result<Table, CliError> {
    if a.cells == 0 {
        return Err(CliError::Usage("--cells must be at least 1".into()));
    }
    let w = Window::relaxed(a.b, a.a0, a.a1)?;
    let cfg = evaluator(s, cache)?;
    let set = cache.sample_set(s, &cfg)?;
    report_rejections(set.rejected(), set.unresolved(), set.len());
    // c0(r/b)/b is compared with g/D for the normalization divisor D
    let reference: EmpiricalCDF = from_sample_set(&set).cdf.scaled(1.0 / s.normalization.divisor());
    let rep = equidist_experiment(&w, &quantile_cells(&reference, a.cells), &reference)?;
    status(format!(
        "window mass {}/{} = {} (target {}), max abs err {}, KS {}",
        rep.window_count,
        rep.phi_b,
        float(rep.window_count as f64 / rep.phi_b as f64),
        float(w.width()),
        float(rep.max_abs_err),
        float(rep.ks_distance)
    ));
    let mut t = Table::new(&[
        "b", "a0", "a1", "alpha", "beta", "count", "phi_b", "lhs", "rhs", "abs_err", "max_abs_err", "ks_distance",
    ]);
    for c in &rep.cells {
        t.push(vec![
            rep.b.into(),
            rep.a0.into(),
            rep.a1.into(),
            c.alpha.into(),
            c.beta.into(),
            c.count.into(),
            rep.phi_b.into(),
            c.lhs.into(),
            c.rhs.into(),
            c.abs_err.into(),
            rep.max_abs_err.into(),
            rep.ks_distance.into(),
        ]);
    }
    Ok(t)
}

fn cmd_decompose(a: &DecomposeArgs, s: &Settings, cache: &Cache) -> Result<Table, CliError> {
    let cfg = evaluator(s, cache)?;
    if !a.alpha.is_empty() {
        let parts = g_decompose_batch(&a.alpha, a.k, a.delta, &cfg)?;
        let mut t = Table::new(&["alpha", "k", "delta", "head_end", "middle_end", "g1", "g2", "g3", "value", "spread"]);
        for (x, d) in a.alpha.iter().zip(parts) {
            t.push(vec![
                (*x).into(),
                d.k.into(),
                d.delta.into(),
                d.head_end.into(),
                d.middle_end.into(),
                d.g1.into(),
                d.g2.into(),
                d.g3.into(),
                d.total.value.into(),
                d.total.spread.into(),
            ]);
        }
        return Ok(t);
    }
    let r = decomposition_bounds(a.k, a.delta, s.samples, s.seed, &cfg)?;
    let mut t = Table::new(&[
        "k",
        "delta",
        "head_end",
        "middle_end",
        "n_samples",
        "seed",
        "min_g1",
        "exact_min_g1",
        "g1_bound",
        "max_abs_g2",
        "g2_bound",
        "g2_harmonic",
        "exceptional_fraction",
        "exceptional_stderr",
        "exceptional_reference",
    ]);
    t.push(vec![
        r.k.into(),
        r.delta.into(),
        r.head_end.into(),
        r.middle_end.into(),
        r.n_samples.into(),
        r.seed.into(),
        r.min_g1.into(),
        r.exact_min_g1.into(),
        r.g1_bound.into(),
        r.max_abs_g2.into(),
        r.g2_bound.into(),
        r.g2_harmonic.into(),
        r.exceptional_fraction.into(),
        r.exceptional_stderr.into(),
        r.exceptional_reference.into(),
    ]);
    Ok(t)
}

fn cmd_emeasure(a: &EmeasureArgs, s: &Settings) -> Result<Table, CliError> {
    let ws = WSequence::new(a.growth_base)?;
    let zs = if a.z.is_empty() { E_Z_GRID.to_vec() } else { a.z.clone() };
    let rows = emeasure_sweep(&zs, a.r_max, s.samples, s.seed, &ws)?;
    let mut t = Table::new(&["z", "r", "estimate", "stderr", "bound", "n_samples", "seed"]);
    for r in rows {
        t.push(vec![
            r.z.into(),
            r.r.into(),
            r.estimate.into(),
            r.stderr.into(),
            r.bound.into(),
            r.n_samples.into(),
            r.seed.into(),
        ]);
    }
    Ok(t)
}

fn cmd_scatter(a: &ScatterArgs, s: &Settings, cache: &Cache) -> Result<Table, CliError> {
    let cfg = evaluator(s, cache)?;
    let depth = a.depth.unwrap_or_else(|| tail_depth(1e-6, std::f64::consts::SQRT_2));
    let sc = g_vs_c_scatter(s.samples, s.seed, &cfg, depth)?;
    status(format!(
        "envelope |g| <= {} c + {}; {} samples dropped, {} flagged",
        float(sc.c2),
        float(sc.c3),
        sc.dropped,
        sc.flagged
    ));
    let mut t = Table::new(&["c_trunc", "abs_g"]);
    for (c, g) in sc.points {
        t.push(vec![c.into(), g.into()]);
    }
    Ok(t)
}
