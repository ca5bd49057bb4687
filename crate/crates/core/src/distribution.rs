//! The law of `g`: empirical distribution functions, Kolmogorov-Smirnov
//! distances, tail measures, the `|g|` against `c(a, R)` scatter, the
//! head/middle/tail bounds on `I(k) = [0, e^{-2k}]`, and equidistribution of
//! the normalized cotangent sums `c0(r/b)/b` against the law of `g`.

use crate::contfrac::{binomial, sample_c_prefixes};
use crate::cotangent::{c0_window_scaled, euler_phi, Window};
use crate::error::{domain, LabError, Result};
use crate::gseries::{decomposition_ranges, g_decompose_batch, GEvaluator};
use crate::moments::GSampleSet;
use crate::rng;

/// Minimum number of g-samples behind the reference law in equidistribution runs.
pub const MIN_REFERENCE_SAMPLES: usize = 100_000;
/// Minimum hits for a tail entry to enter the slope fit.
pub const TAIL_MIN_HITS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCDF {
    samples: Vec<f64>,
}

impl EmpiricalCDF {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return domain("empirical distribution needs at least one sample");
        }
        if samples.iter().any(|x| x.is_nan()) {
            return domain("samples contain NaN");
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `#{x <= z} / n`.
    pub fn cdf(&self, z: f64) -> f64 {
        self.samples.partition_point(|&x| x <= z) as f64 / self.len() as f64
    }

    /// Average of the left and right limits at `z`.
    pub fn cdf_mid(&self, z: f64) -> f64 {
        let below = self.samples.partition_point(|&x| x < z);
        let upto = self.samples.partition_point(|&x| x <= z);
        (below + upto) as f64 / (2 * self.len()) as f64
    }

    /// Smallest sample `x` with `cdf(x) >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.samples[idx]
    }

    /// The law of `factor * X`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut s: Vec<f64> = self.samples.iter().map(|x| x * factor).collect();
        s.sort_by(f64::total_cmp);
        Self { samples: s }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }
}

/// `sup_z |F_a(z) - F_b(z)|`, by a merged sweep over both sorted samples.
pub fn ks_distance(a: &EmpiricalCDF, b: &EmpiricalCDF) -> f64 {
    let (xs, ys) = (a.samples(), b.samples());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let z = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= z {
            i += 1;
        }
        while j < ys.len() && ys[j] <= z {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    // one side is exhausted; the other's cdf can only rise towards 1
    d.max((i as f64 / na - j as f64 / nb).abs())
}

/// Seeded draw from the law of `g`.
#[derive(Debug, Clone)]
pub struct GLawSample {
    pub cdf: EmpiricalCDF,
    pub seed: u64,
    pub rejected: usize,
    /// More than 1% of evaluations were flagged and redrawn.
    pub warning: bool,
}

pub fn sample_f(n: usize, seed: u64, cfg: &GEvaluator) -> Result<GLawSample> {
    let set = GSampleSet::draw(n, seed, cfg)?;
    Ok(from_sample_set(&set))
}

pub fn from_sample_set(set: &GSampleSet) -> GLawSample {
    let cdf = EmpiricalCDF::new(set.values().to_vec()).expect("a sample set is nonempty and finite");
    GLawSample { cdf, seed: set.seed(), rejected: set.rejected(), warning: set.rejected() * 100 > set.len() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquidistCell {
    pub alpha: f64,
    pub beta: f64,
    /// `#{r in window : alpha < c0(r/b)/b <= beta}`.
    pub count: usize,
    /// `count / phi(b)`.
    pub lhs: f64,
    /// `(a1 - a0)(F(beta) - F(alpha))` with the midpoint convention.
    pub rhs: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquidistReport {
    pub b: u64,
    pub a0: f64,
    pub a1: f64,
    pub phi_b: u64,
    pub window_count: usize,
    pub cells: Vec<EquidistCell>,
    pub max_abs_err: f64,
    /// KS distance between the window law of `c0(r/b)/b`, as a probability,
    /// and the reference law.
    pub ks_distance: f64,
}

/// Cells `(-inf, q_1], (q_1, q_2], ..., (q_{m-1}, +inf)` at the reference
/// quantiles `j/m`.
pub fn quantile_cells(reference: &EmpiricalCDF, m: usize) -> Vec<(f64, f64)> {
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend((1..m).map(|j| reference.quantile(j as f64 / m as f64)));
    edges.push(f64::INFINITY);
    edges.windows(2).map(|e| (e[0], e[1])).collect()
}

/// Compares the counts of `c0(r/b)/b` in each cell with the reference mass.
pub fn equidist_experiment(w: &Window, cells: &[(f64, f64)], reference: &EmpiricalCDF) -> Result<EquidistReport> {
    let b = w.b();
    if b < 1000 {
        return domain(format!("b={b} is below 1000"));
    }
    if reference.len() < MIN_REFERENCE_SAMPLES {
        return domain(format!(
            "reference law has {} samples, need {MIN_REFERENCE_SAMPLES}",
            reference.len()
        ));
    }
    if let Some(c) = cells.iter().find(|c| !(c.0 < c.1)) {
        return domain(format!("cell ({}, {}] is empty", c.0, c.1));
    }
    let values: Vec<f64> = c0_window_scaled(w).into_iter().map(|(_, v)| v).collect();
    if values.is_empty() {
        return domain(format!("window [{}, {}] holds no fraction with denominator {b}", w.a0(), w.a1()));
    }
    let phi_b = euler_phi(b)?;
    let law = EmpiricalCDF::new(values)?;
    let width = w.width();
    let cells: Vec<EquidistCell> = cells
        .iter()
        .map(|&(alpha, beta)| {
            let s = law.samples();
            let count = s.partition_point(|&x| x <= beta) - s.partition_point(|&x| x <= alpha);
            let lhs = count as f64 / phi_b as f64;
            let rhs = width * (reference.cdf_mid(beta) - reference.cdf_mid(alpha));
            EquidistCell { alpha, beta, count, lhs, rhs, abs_err: (lhs - rhs).abs() }
        })
        .collect();
    let max_abs_err = cells.iter().map(|c| c.abs_err).fold(0.0, f64::max);
    Ok(EquidistReport {
        b,
        a0: w.a0(),
        a1: w.a1(),
        phi_b,
        window_count: law.len(),
        cells,
        max_abs_err,
        ks_distance: ks_distance(&law, reference),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub t: f64,
    pub hits: usize,
    /// `meas{|g| >= t}`.
    pub measure: f64,
    pub stderr: f64,
    pub log_measure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub rows: Vec<TailRow>,
    /// Least-squares slope of `log measure` against `t` over rows with
    /// enough hits; `None` with fewer than two such rows.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

pub fn tail_measure(thresholds: &[f64], law: &EmpiricalCDF) -> Result<TailFit> {
    if thresholds.is_empty() {
        return domain("no thresholds given");
    }
    if thresholds.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("thresholds must be nonnegative and strictly ascending");
    }
    let mut abs: Vec<f64> = law.samples().iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let n = abs.len();
    let rows: Vec<TailRow> = thresholds
        .iter()
        .map(|&t| {
            let hits = n - abs.partition_point(|&x| x < t);
            let measure = hits as f64 / n as f64;
            let stderr = (measure * (1.0 - measure) / n as f64).sqrt();
            TailRow { t, hits, measure, stderr, log_measure: (hits > 0).then(|| measure.ln()) }
        })
        .collect();
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.hits >= TAIL_MIN_HITS).filter_map(|r| r.log_measure.map(|y| (r.t, y))).collect();
    let (slope, intercept) = match least_squares(&pts) {
        Some((s, i)) => (Some(s), Some(i)),
        None => (None, None),
    };
    Ok(TailFit { rows, slope, intercept })
}

/// `(slope, intercept)` of the least-squares line; `None` below two points.
pub fn least_squares(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scatter {
    /// `(c(a, R), |g(a)|)`.
    pub points: Vec<(f64, f64)>,
    /// Samples whose expansion could not be certified.
    pub dropped: usize,
    /// Points where the g estimate was flagged.
    pub flagged: usize,
    pub c2: f64,
    pub c3: f64,
}

/// `|g(a)|` against `c(a, depth)` at seeded uniform points, with the
/// covering envelope `|g| <= c2 c + c3`.
pub fn g_vs_c_scatter(n: usize, seed: u64, cfg: &GEvaluator, depth: usize) -> Result<Scatter> {
    if n == 0 || depth == 0 {
        return domain("scatter needs samples and a positive depth");
    }
    let (samples, dropped) = sample_c_prefixes(n, seed, depth);
    if samples.is_empty() {
        return Err(LabError::Precision("no sample could be expanded".into()));
    }
    let alphas: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let g = cfg.eval_batch(&alphas);
    let points: Vec<(f64, f64)> = samples.iter().zip(&g).map(|(s, v)| (s.1[depth], v.value.abs())).collect();
    let (c2, c3) = envelope_fit(&points);
    Ok(Scatter { flagged: g.iter().filter(|v| v.flagged).count(), points, dropped, c2, c3 })
}

/// The line `y = c2 x + c3` with `c2, c3 >= 0` lying above every point and
/// lowest at the mean abscissa.
pub fn envelope_fit(points: &[(f64, f64)]) -> (f64, f64) {
    if points.is_empty() {
        return (0.0, 0.0);
    }
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let hull = upper_hull(points);
    let intercept = |s: f64| points.iter().map(|&(x, y)| y - s * x).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    // the objective s * mean_x + intercept(s) is convex and piecewise linear,
    // with breakpoints at the hull edge slopes
    let mut candidates = vec![0.0];
    candidates.extend(hull.windows(2).map(|e| (e[1].1 - e[0].1) / (e[1].0 - e[0].0)).filter(|s| *s > 0.0));
    candidates
        .into_iter()
        .map(|s| (s, intercept(s)))
        .min_by(|a, b| (a.0 * mean_x + a.1).total_cmp(&(b.0 * mean_x + b.1)))
        .expect("at least one candidate")
}

fn upper_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|a, b| a.0 == b.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Sampled checks of the head, middle and tail bounds for `(k, delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub k: u32,
    pub delta: f64,
    pub head_end: usize,
    pub middle_end: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// Smallest `g1` over samples in `I(k)`.
    pub min_g1: f64,
    /// `H_L - 2 L e^{-2k}`, the exact minimum of `g1` on `I(k)` for `L = head_end`.
    pub exact_min_g1: f64,
    /// `(1 - 8 delta) 2k`.
    pub g1_bound: f64,
    /// Largest `|g2|` over uniform samples in `[0, 1]`.
    pub max_abs_g2: f64,
    /// `16 delta k`.
    pub g2_bound: f64,
    /// `sum_{head_end < l <= middle_end} 1/l`, which dominates `|g2|` everywhere.
    pub g2_harmonic: f64,
    /// Fraction of samples in `I(k)` with `|g3| > delta k`.
    pub exceptional_fraction: f64,
    pub exceptional_stderr: f64,
    /// `e^{-2k(1+delta)} / |I(k)|`.
    pub exceptional_reference: f64,
}

pub fn decomposition_bounds(k: u32, delta: f64, n: usize, seed: u64, cfg: &GEvaluator) -> Result<DecompositionReport> {
    if !(1..=3).contains(&k) {
        return domain(format!("k={k} outside {{1, 2, 3}}"));
    }
    if !(0.02..=0.1).contains(&delta) {
        return domain(format!("delta={delta} outside [0.02, 0.1]"));
    }
    if n == 0 {
        return domain("need at least one sample");
    }
    let (head_end, middle_end) = decomposition_ranges(k, delta)?;
    let i_len = (-2.0 * k as f64).exp();
    // the two sample families use disjoint stream ranges
    let in_i = g_decompose_batch(&rng::uniform_points(n, seed, 0, i_len), k, delta, cfg)?;
    let full = g_decompose_batch(&rng::uniform_points(n, seed, 1 << 32, 1.0), k, delta, cfg)?;

    let min_g1 = in_i.iter().map(|d| d.g1).fold(f64::INFINITY, f64::min);
    let max_abs_g2 = full.iter().map(|d| d.g2.abs()).fold(0.0, f64::max);
    let hits = in_i.iter().filter(|d| d.g3.abs() > delta * k as f64).count();
    let (exceptional_fraction, exceptional_stderr) = binomial(hits, n);
    Ok(DecompositionReport {
        k,
        delta,
        head_end,
        middle_end,
        n_samples: n,
        seed,
        min_g1,
        exact_min_g1: exact_min_g1(k, head_end),
        g1_bound: (1.0 - 8.0 * delta) * 2.0 * k as f64,
        max_abs_g2,
        g2_bound: 16.0 * delta * k as f64,
        g2_harmonic: (head_end + 1..=middle_end).map(|l| 1.0 / l as f64).sum(),
        exceptional_fraction,
        exceptional_stderr,
        exceptional_reference: (-2.0 * k as f64 * (1.0 + delta)).exp() / i_len,
    })
}

/// On `I(k)` every `l a` with `l <= L` stays below 1 when `L e^{-2k} < 1`, so
/// `g1(a) = H_L - 2 L a` there and its minimum sits at the right endpoint.
fn exact_min_g1(k: u32, head_end: usize) -> f64 {
    let i_len = (-2.0 * k as f64).exp();
    debug_assert!((head_end as f64) * i_len < 1.0);
    let h: f64 = (1..=head_end).map(|l| 1.0 / l as f64).sum();
    h - (1..=head_end).map(|l| 2.0 * l as f64 * i_len / l as f64).sum::<f64>()
}

/// Smallest `k0 <= k_max` such that the exact minimum of `g1` on `I(k)` meets
/// `(1 - 8 delta) 2k` for every `k0 <= k <= k_max`.
pub fn empirical_k0(delta: f64, k_max: u32) -> Result<Option<u32>> {
    let mut k0 = None;
    for k in (1..=k_max).rev() {
        let (head_end, _) = decomposition_ranges(k, delta)?;
        if exact_min_g1(k, head_end) >= (1.0 - 8.0 * delta) * 2.0 * k as f64 {
            k0 = Some(k);
        } else {
            break;
        }
    }
    Ok(k0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gseries::{divisor_sieve, GMethod};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn cdf(v: &[f64]) -> EmpiricalCDF {
        EmpiricalCDF::new(v.to_vec()).unwrap()
    }

    fn brute_ks(a: &EmpiricalCDF, b: &EmpiricalCDF) -> f64 {
        a.samples().iter().chain(b.samples()).map(|&z| (a.cdf(z) - b.cdf(z)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn cdf_basics() {
        let f = cdf(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(f.cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(f.cdf(f64::INFINITY), 1.0);
        assert_eq!(f.cdf(2.0), 0.75);
        assert_eq!(f.cdf_mid(2.0), 0.5);
        assert_eq!(f.quantile(0.5), 2.0);
        assert_eq!(f.quantile(0.0), 1.0);
        assert_eq!(f.quantile(1.0), 3.0);
        assert_eq!(f.negated().samples(), &[-3.0, -2.0, -2.0, -1.0]);
        assert!(EmpiricalCDF::new(vec![]).is_err());
        assert!(EmpiricalCDF::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn ks_examples() {
        let a = cdf(&[0.0, 1.0, 2.0]);
        assert_eq!(ks_distance(&a, &a), 0.0);
        assert_eq!(ks_distance(&a, &cdf(&[5.0, 6.0])), 1.0);
        let b = cdf(&[0.0, 1.0, 2.0, 100.0]);
        assert!((ks_distance(&a, &b) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn tail_examples() {
        let law = cdf(&(0..1000).map(|i| (i as f64 / 100.0) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>());
        let fit = tail_measure(&[0.0, 1.0, 2.0, 5.0, 9.0], &law).unwrap();
        assert_eq!(fit.rows[0].measure, 1.0);
        assert!(fit.rows.windows(2).all(|w| w[1].measure <= w[0].measure));
        assert!(fit.slope.unwrap() < 0.0);
        assert!(tail_measure(&[2.0, 1.0], &law).is_err());
        assert!(tail_measure(&[-1.0], &law).is_err());
        let sparse = tail_measure(&[0.0], &law).unwrap();
        assert_eq!(sparse.slope, None);
    }

    #[test]
    fn envelope_covers_points() {
        let pts = vec![(0.0, 1.0), (1.0, 2.5), (2.0, 2.0), (3.0, 4.0), (1.5, 0.5)];
        let (c2, c3) = envelope_fit(&pts);
        assert!(c2 >= 0.0 && c3 >= 0.0);
        for (x, y) in &pts {
            assert!(c2 * x + c3 >= y - 1e-12);
        }
        // the hull edge through (1, 2.5), (3, 4) is the cheapest at mean x = 1.5
        assert!((c2 - 0.75).abs() < 1e-12 && (c3 - 1.75).abs() < 1e-12, "{c2} {c3}");
    }

    #[test]
    fn exact_g1_minimum() {
        let (head, _) = decomposition_ranges(2, 0.05).unwrap();
        assert_eq!(head, 36);
        let m = exact_min_g1(2, head);
        let direct: f64 = (1..=36).map(|l| crate::gseries::sawtooth(l as f64 * (-4f64).exp()) / l as f64).sum();
        assert!((m - direct).abs() < 1e-12);
        assert!(m > 2.4 && m < 3.68, "{m}");
    }

    #[test]
    fn k0_exists_for_small_delta() {
        let k0 = empirical_k0(0.05, 8).unwrap();
        assert!(k0.is_some());
    }

    #[test]
    fn decomposition_report_shape() {
        let table = Arc::new(divisor_sieve(40_000).unwrap());
        let cfg = GEvaluator::with_table(GMethod::Fourier, 20_000, 20_000, Some(table)).unwrap();
        let rep = decomposition_bounds(2, 0.05, 2000, 1, &cfg).unwrap();
        assert_eq!((rep.head_end, rep.middle_end), (36, 81));
        assert!(rep.min_g1 >= rep.exact_min_g1 - 1e-12);
        assert!(rep.max_abs_g2 <= rep.g2_harmonic + 1e-12);
        assert!(decomposition_bounds(4, 0.05, 10, 1, &cfg).is_err());
        assert!(decomposition_bounds(2, 0.01, 10, 1, &cfg).is_err());
    }

    #[test]
    fn equidist_validation() {
        let reference = cdf(&vec![0.0; 10]);
        let w = Window::new(10007, 0.51, 0.99).unwrap();
        assert!(equidist_experiment(&w, &[(-1.0, 1.0)], &reference).is_err());
        let small = Window::new(997, 0.51, 0.99).unwrap();
        let big = cdf(&vec![0.0; MIN_REFERENCE_SAMPLES]);
        assert!(equidist_experiment(&small, &[(-1.0, 1.0)], &big).is_err());
        assert!(equidist_experiment(&w, &[(1.0, 1.0)], &big).is_err());
    }

    #[test]
    fn equidist_full_cell_and_partition() {
        let reference = EmpiricalCDF::new((0..MIN_REFERENCE_SAMPLES).map(|i| (i as f64 / 1e5 - 0.5) * 2.0).collect()).unwrap();
        let w = Window::new(1009, 0.51, 0.99).unwrap();
        let full = equidist_experiment(&w, &[(f64::NEG_INFINITY, f64::INFINITY)], &reference).unwrap();
        assert_eq!(full.cells[0].count, full.window_count);
        assert!((full.cells[0].rhs - w.width()).abs() < 1e-15);
        let cells = quantile_cells(&reference, 8);
        assert_eq!(cells.len(), 8);
        let rep = equidist_experiment(&w, &cells, &reference).unwrap();
        assert_eq!(rep.cells.iter().map(|c| c.count).sum::<usize>(), rep.window_count);
        assert!(rep.cells.iter().all(|c| (0.0..=1.0).contains(&c.lhs) && (0.0..=1.0).contains(&c.rhs)));
    }

    #[test]
    fn equidist_reflection_symmetry() {
        let reference = EmpiricalCDF::new((0..MIN_REFERENCE_SAMPLES).map(|i| i as f64 / 1e5 - 0.5).collect()).unwrap();
        let w = Window::new(1009, 0.55, 0.8).unwrap();
        let cell = [(-0.3, 0.3)];
        let a = equidist_experiment(&w, &cell, &reference).unwrap();
        let b = equidist_experiment(&w.reflect(), &cell, &reference).unwrap();
        assert_eq!(a.cells[0].count, b.cells[0].count);
    }

    proptest! {
        #[test]
        fn ks_matches_brute_force(
            a in proptest::collection::vec(-5i32..5, 1..100),
            b in proptest::collection::vec(-5i32..5, 1..100),
        ) {
            let fa = cdf(&a.iter().map(|&x| x as f64).collect::<Vec<_>>());
            let fb = cdf(&b.iter().map(|&x| x as f64 * 0.7).collect::<Vec<_>>());
            prop_assert!((ks_distance(&fa, &fb) - brute_ks(&fa, &fb)).abs() < 1e-15);
        }

        #[test]
        fn extra_far_sample_moves_ks_by_one_over_n(a in proptest::collection::vec(-100.0f64..100.0, 1..100)) {
            let fa = cdf(&a);
            let mut more = a.clone();
            more.push(1e9);
            let fb = cdf(&more);
            let d = ks_distance(&fa, &fb);
            prop_assert!((d - brute_ks(&fa, &fb)).abs() < 1e-15);
            prop_assert!(d <= 1.0 / (a.len() + 1) as f64 + 1e-15);
        }

        #[test]
        fn cdf_is_monotone(a in proptest::collection::vec(-10.0f64..10.0, 1..50), z1 in -12.0f64..12.0, z2 in -12.0f64..12.0) {
            let f = cdf(&a);
            let (lo, hi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
            prop_assert!(f.cdf(lo) <= f.cdf(hi));
            prop_assert!(f.cdf_mid(lo) <= f.cdf_mid(hi));
        }
    }
}
