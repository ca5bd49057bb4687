//! The sawtooth series `g(a) = sum_{l>=1} (1 - 2{l a}) / l`.
//!
//! Two independent routes are provided. The direct route sums the series
//! itself. The Fourier route sums its expansion in divisor counts,
//! `g(a) = (2/pi) sum_{m>=1} tau(m) sin(2 pi m a) / m`. Both converge only
//! conditionally, so every estimate carries the spread between truncations at
//! `N` and `2N` (or `M` and `2M`) as its error gauge.

mod divisor;
mod grid;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::sum::CompensatedSum;

pub use divisor::{divisor_sieve, tau_trial, DivisorTable};
pub use grid::SineGrid;

/// Default truncation for both routes.
pub const DEFAULT_TERMS: usize = 1_000_000;
/// Default spread above which an estimate is flagged.
pub const DEFAULT_TOLERANCE: f64 = 0.1;
/// Longest direct partial sum `g_decompose` will attempt.
pub const DIRECT_FEASIBILITY: usize = 100_000_000;

/// `B(u) = 1 - 2{u}`, in `(-1, 1]`.
#[inline]
pub fn sawtooth(u: f64) -> f64 {
    1.0 - 2.0 * frac(u)
}

#[inline]
fn frac(u: f64) -> f64 {
    // truncating cast instead of floor(), which is a libm call on baseline x86-64
    let t = u as i64 as f64;
    let f = u - t;
    if f < 0.0 {
        f + 1.0
    } else {
        f
    }
}

/// Compensated `sum_{l=lo}^{hi} B(l a) / l`.
fn direct_range(alpha: f64, lo: usize, hi: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for l in lo.max(1)..=hi {
        let lf = l as f64;
        acc.add(sawtooth(lf * alpha) / lf);
    }
    acc.value()
}

/// Partial sums at `n` and `2n` in one pass.
fn direct_pair(alpha: f64, n: usize) -> (f64, f64) {
    let mut acc = CompensatedSum::new();
    let mut at_n = 0.0;
    for l in 1..=2 * n {
        let lf = l as f64;
        acc.add(sawtooth(lf * alpha) / lf);
        if l == n {
            at_n = acc.value();
        }
    }
    (at_n, acc.value())
}

/// `sum_{l<=n} B(l a) / l`; the empty sum for `n = 0`.
pub fn g_direct(alpha: f64, n: usize) -> f64 {
    direct_range(alpha, 1, n)
}

/// Optional damping of the Fourier coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Damping {
    #[default]
    None,
    /// Fejer (triangular) weights `1 - m/(M+1)`.
    Fejer,
}

/// `c_m = (2/pi) tau(m)/m` for `m = 1..=cap`, damped as requested.
pub fn fourier_coefficients(cap: usize, table: &DivisorTable, damping: Damping) -> Result<Vec<f64>> {
    check_cap(cap, table)?;
    let damp = |m: usize| match damping {
        Damping::None => 1.0,
        Damping::Fejer => 1.0 - m as f64 / (cap + 1) as f64,
    };
    Ok((1..=cap).map(|m| 2.0 / PI * table.get(m) as f64 / m as f64 * damp(m)).collect())
}

fn check_cap(cap: usize, table: &DivisorTable) -> Result<()> {
    if cap > table.limit() {
        return domain(format!("Fourier cap {cap} exceeds divisor table limit {}", table.limit()));
    }
    Ok(())
}

/// Truncated Fourier expansion of `g` with `m <= cap`.
pub fn g_fourier(alpha: f64, cap: usize, table: &DivisorTable, damping: Damping) -> Result<f64> {
    let coeffs = fourier_coefficients(cap, table, damping)?;
    Ok(sine_sum(&coeffs, alpha))
}

fn sine_sum(coeffs: &[f64], alpha: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for (i, c) in coeffs.iter().enumerate() {
        let phase = frac((i + 1) as f64 * alpha);
        acc.add(c * (2.0 * PI * phase).sin());
    }
    acc.value()
}

/// `Z(x; theta) = sum_{n<=x} tau(n) sin(2 pi theta n)`.
pub fn z_tau_exact(x: usize, theta: f64, table: &DivisorTable) -> Result<f64> {
    if x > table.limit() {
        return domain(format!("Z_tau cap {x} exceeds divisor table limit {}", table.limit()));
    }
    let mut acc = CompensatedSum::new();
    for n in 1..=x {
        let phase = frac(n as f64 * theta);
        acc.add(table.get(n) as f64 * (2.0 * PI * phase).sin());
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GMethod {
    Direct,
    Fourier,
    CrossChecked,
}

impl GMethod {
    pub fn name(&self) -> &'static str {
        match self {
            GMethod::Direct => "direct",
            GMethod::Fourier => "fourier",
            GMethod::CrossChecked => "cross-checked",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "direct" => Some(GMethod::Direct),
            "fourier" => Some(GMethod::Fourier),
            "cross-checked" | "cross" => Some(GMethod::CrossChecked),
            _ => None,
        }
    }

    pub fn uses_fourier(&self) -> bool {
        !matches!(self, GMethod::Direct)
    }

    pub fn uses_direct(&self) -> bool {
        !matches!(self, GMethod::Fourier)
    }
}

/// One estimate of `g(a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GValue {
    /// Mean of the truncation estimates.
    pub value: f64,
    /// Largest pairwise discrepancy among them.
    pub spread: f64,
    /// `spread` exceeded the evaluator tolerance.
    pub flagged: bool,
}

type GridKey = (usize, Damping);

fn grid_cache() -> &'static Mutex<HashMap<GridKey, Arc<SineGrid>>> {
    static CACHE: OnceLock<Mutex<HashMap<GridKey, Arc<SineGrid>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Configured estimator of `g`.
#[derive(Debug, Clone)]
pub struct GEvaluator {
    method: GMethod,
    n_terms: usize,
    m_terms: usize,
    tolerance: f64,
    damping: Damping,
    table: Option<Arc<DivisorTable>>,
}

impl GEvaluator {
    /// Sieves its own divisor table when the method needs one.
    pub fn new(method: GMethod, n_terms: usize, m_terms: usize) -> Result<Self> {
        let table = if method.uses_fourier() {
            Some(Arc::new(divisor_sieve(2 * m_terms.max(1))?))
        } else {
            None
        };
        Self::with_table(method, n_terms, m_terms, table)
    }

    pub fn with_table(
        method: GMethod,
        n_terms: usize,
        m_terms: usize,
        table: Option<Arc<DivisorTable>>,
    ) -> Result<Self> {
        if n_terms < 2 || m_terms < 2 {
            return domain(format!("truncations must be at least 2, got N={n_terms}, M={m_terms}"));
        }
        if method.uses_fourier() {
            match &table {
                None => return domain("Fourier evaluation needs a divisor table"),
                Some(t) if t.limit() < 2 * m_terms => {
                    return domain(format!(
                        "Fourier cap 2M={} exceeds divisor table limit {}",
                        2 * m_terms,
                        t.limit()
                    ))
                }
                _ => {}
            }
        }
        Ok(Self { method, n_terms, m_terms, tolerance: DEFAULT_TOLERANCE, damping: Damping::None, table })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_damping(mut self, damping: Damping) -> Self {
        self.damping = damping;
        self
    }

    pub fn method(&self) -> GMethod {
        self.method
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn m_terms(&self) -> usize {
        self.m_terms
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn damping(&self) -> Damping {
        self.damping
    }

    pub fn table(&self) -> Option<&Arc<DivisorTable>> {
        self.table.as_ref()
    }

    fn table_ref(&self) -> &DivisorTable {
        self.table.as_deref().expect("validated at construction")
    }

    fn combine(&self, estimates: &[f64]) -> GValue {
        let n = estimates.len() as f64;
        let value = estimates.iter().sum::<f64>() / n;
        let max = estimates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = estimates.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = max - min;
        GValue { value, spread, flagged: !(spread <= self.tolerance) }
    }

    /// Pointwise estimate from exact finite sums.
    pub fn eval(&self, alpha: f64) -> GValue {
        let mut est = Vec::with_capacity(4);
        if self.method.uses_direct() {
            let (a, b) = direct_pair(alpha, self.n_terms);
            est.extend([a, b]);
        }
        if self.method.uses_fourier() {
            let t = self.table_ref();
            for cap in [self.m_terms, 2 * self.m_terms] {
                est.push(g_fourier(alpha, cap, t, self.damping).expect("validated at construction"));
            }
        }
        self.combine(&est)
    }

    /// Shared grid for the Fourier truncation at `cap`.
    fn grid(&self, cap: usize) -> Arc<SineGrid> {
        let key = (cap, self.damping);
        let mut cache = grid_cache().lock().unwrap_or_else(|e| e.into_inner());
        if let Some(g) = cache.get(&key) {
            return Arc::clone(g);
        }
        let coeffs = fourier_coefficients(cap, self.table_ref(), self.damping).expect("validated at construction");
        let g = Arc::new(SineGrid::build(&coeffs));
        cache.insert(key, Arc::clone(&g));
        g
    }

    /// Estimates at many points.
    ///
    /// Fourier truncations go through a tabulated grid and agree with
    /// [`GEvaluator::eval`] to within the grid's remainder bound plus rounding
    /// (about `1e-12`). Runs on the ambient rayon pool; the output depends only
    /// on the inputs.
    pub fn eval_batch(&self, alphas: &[f64]) -> Vec<GValue> {
        let grids = if self.method.uses_fourier() {
            Some((self.grid(self.m_terms), self.grid(2 * self.m_terms)))
        } else {
            None
        };
        alphas
            .par_iter()
            .with_min_len(256)
            .map(|&a| {
                let mut est = [0.0; 4];
                let mut n = 0;
                if self.method.uses_direct() {
                    let (x, y) = direct_pair(a, self.n_terms);
                    est[0] = x;
                    est[1] = y;
                    n = 2;
                }
                if let Some((g1, g2)) = &grids {
                    est[n] = g1.eval(a);
                    est[n + 1] = g2.eval(a);
                    n += 2;
                }
                self.combine(&est[..n])
            })
            .collect()
    }
}

impl Default for GEvaluator {
    fn default() -> Self {
        Self::new(GMethod::Fourier, DEFAULT_TERMS, DEFAULT_TERMS).expect("default caps are valid")
    }
}

/// `g_estimate`, the pointwise wrapper used by the experiments.
pub fn g_eval(alpha: f64, cfg: &GEvaluator) -> GValue {
    cfg.eval(alpha)
}

/// Split of `g` into head, middle and tail around `l0 = e^{2k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GDecomposition {
    pub k: u32,
    pub delta: f64,
    pub l0: f64,
    /// `floor(l0^{1-2 delta})`, the last index of the head.
    pub head_end: usize,
    /// `floor(l0^{1+2 delta})`, the last index of the middle.
    pub middle_end: usize,
    pub g1: f64,
    pub g2: f64,
    /// `g_eval - g1 - g2`.
    pub g3: f64,
    pub total: GValue,
}

/// Index ranges `(head_end, middle_end)` for `(k, delta)`.
pub fn decomposition_ranges(k: u32, delta: f64) -> Result<(usize, usize)> {
    if k == 0 {
        return domain("decomposition needs k >= 1");
    }
    if !(delta > 0.0 && delta <= 0.1) {
        return domain(format!("delta must lie in (0, 0.1], got {delta}"));
    }
    let log_l0 = 2.0 * k as f64;
    let upper = (log_l0 * (1.0 + 2.0 * delta)).exp();
    if !(upper <= DIRECT_FEASIBILITY as f64) {
        return domain(format!(
            "middle range cap l0^(1+2 delta) = {upper:.3e} exceeds the direct-sum bound {DIRECT_FEASIBILITY}"
        ));
    }
    let head = (log_l0 * (1.0 - 2.0 * delta)).exp().floor() as usize;
    Ok((head, upper.floor() as usize))
}

fn check_decomposition_caps(middle_end: usize, cfg: &GEvaluator) -> Result<()> {
    if cfg.method.uses_direct() && cfg.n_terms < middle_end {
        return domain(format!(
            "direct cap N={} is below the middle range end {middle_end}",
            cfg.n_terms
        ));
    }
    Ok(())
}

fn decompose_with(alpha: f64, k: u32, delta: f64, ranges: (usize, usize), total: GValue) -> GDecomposition {
    let (head_end, middle_end) = ranges;
    let g1 = direct_range(alpha, 1, head_end);
    let g2 = direct_range(alpha, head_end + 1, middle_end);
    GDecomposition {
        k,
        delta,
        l0: (2.0 * k as f64).exp(),
        head_end,
        middle_end,
        g1,
        g2,
        g3: total.value - g1 - g2,
        total,
    }
}

pub fn g_decompose(alpha: f64, k: u32, delta: f64, cfg: &GEvaluator) -> Result<GDecomposition> {
    let ranges = decomposition_ranges(k, delta)?;
    check_decomposition_caps(ranges.1, cfg)?;
    Ok(decompose_with(alpha, k, delta, ranges, cfg.eval(alpha)))
}

/// [`g_decompose`] over many points, with the totals from
/// [`GEvaluator::eval_batch`].
pub fn g_decompose_batch(alphas: &[f64], k: u32, delta: f64, cfg: &GEvaluator) -> Result<Vec<GDecomposition>> {
    let ranges = decomposition_ranges(k, delta)?;
    check_decomposition_caps(ranges.1, cfg)?;
    let totals = cfg.eval_batch(alphas);
    Ok(alphas
        .par_iter()
        .zip(totals.par_iter())
        .map(|(&a, &t)| decompose_with(a, k, delta, ranges, t))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    fn small_eval(method: GMethod) -> GEvaluator {
        GEvaluator::new(method, 20_000, 20_000).unwrap()
    }

    #[test]
    fn sawtooth_values() {
        assert_eq!(sawtooth(0.25), 0.5);
        assert_eq!(sawtooth(3.0), 1.0);
        assert_eq!(sawtooth(0.75), -0.5);
        assert_eq!(sawtooth(-0.25), -0.5);
        assert_eq!(sawtooth(0.0), 1.0);
    }

    #[test]
    fn empty_direct_sum() {
        assert_eq!(g_direct(GOLDEN, 0), 0.0);
    }

    #[test]
    fn routes_agree_at_golden_ratio() {
        let n = 1_000_000;
        let t = divisor_sieve(n).unwrap();
        let d = g_direct(GOLDEN, n);
        let f = g_fourier(GOLDEN, n, &t, Damping::None).unwrap();
        assert!((d - f).abs() < 0.05, "direct {d} fourier {f}");
    }

    #[test]
    fn fourier_vanishes_at_half() {
        let t = divisor_sieve(5000).unwrap();
        for cap in [1, 10, 5000] {
            assert!(g_fourier(0.5, cap, &t, Damping::None).unwrap().abs() < 1e-12);
        }
        assert!(g_fourier(0.5, 5001, &t, Damping::None).is_err());
    }

    #[test]
    fn fourier_only_eval_at_half() {
        let v = small_eval(GMethod::Fourier).eval(0.5);
        assert!(v.value.abs() < 1e-12 && v.spread < 1e-12);
    }

    #[test]
    fn cross_checked_spread_covers_route_gap() {
        let cfg = small_eval(GMethod::CrossChecked);
        for i in 1..20 {
            let a = (i as f64 * GOLDEN).fract();
            let v = cfg.eval(a);
            let d = g_direct(a, cfg.n_terms());
            let f = g_fourier(a, cfg.m_terms(), cfg.table_ref(), Damping::None).unwrap();
            assert!((d - f).abs() <= v.spread + 1e-15);
        }
    }

    #[test]
    fn batch_matches_pointwise() {
        let cfg = small_eval(GMethod::CrossChecked);
        let alphas: Vec<f64> = (1..300).map(|i| (i as f64 * 0.754_877_666_246_692_7).fract()).collect();
        let batch = cfg.eval_batch(&alphas);
        for (a, b) in alphas.iter().zip(&batch) {
            let p = cfg.eval(*a);
            assert!((p.value - b.value).abs() < 1e-11, "a={a}");
            assert!((p.spread - b.spread).abs() < 1e-11);
        }
    }

    #[test]
    fn fejer_damping_is_opt_in() {
        let t = divisor_sieve(4000).unwrap();
        let plain = g_fourier(GOLDEN, 2000, &t, Damping::None).unwrap();
        let damped = g_fourier(GOLDEN, 2000, &t, Damping::Fejer).unwrap();
        assert_ne!(plain, damped);
        let cfg = small_eval(GMethod::Fourier);
        assert_eq!(cfg.damping(), Damping::None);
        let damped_cfg = cfg.clone().with_damping(Damping::Fejer);
        let a = 0.3141;
        let b = damped_cfg.eval_batch(&[a])[0].value;
        assert!((b - damped_cfg.eval(a).value).abs() < 1e-11);
    }

    #[test]
    fn evaluator_validation() {
        assert!(GEvaluator::new(GMethod::Direct, 1, 10).is_err());
        let t = Arc::new(divisor_sieve(100).unwrap());
        assert!(GEvaluator::with_table(GMethod::Fourier, 10, 60, Some(t.clone())).is_err());
        assert!(GEvaluator::with_table(GMethod::Fourier, 10, 50, Some(t)).is_ok());
        assert!(GEvaluator::with_table(GMethod::Fourier, 10, 50, None).is_err());
    }

    #[test]
    fn spread_is_small_for_most_samples() {
        use rand::Rng;
        let cfg = GEvaluator::new(GMethod::CrossChecked, 200_000, 200_000).unwrap();
        let mut rng = crate::rng::stream(11, 0);
        let alphas: Vec<f64> = (0..200).map(|_| rng.gen::<f64>()).collect();
        let ok = cfg.eval_batch(&alphas).iter().filter(|v| v.spread < 0.1).count();
        assert!(ok as f64 >= 0.95 * alphas.len() as f64, "{ok}/200");
    }

    #[test]
    fn z_tau_values() {
        let t = divisor_sieve(100).unwrap();
        assert!((z_tau_exact(3, 0.25, &t).unwrap() + 1.0).abs() < 1e-12);
        for x in [1, 7, 100] {
            assert!(z_tau_exact(x, 0.5, &t).unwrap().abs() < 1e-12);
        }
        let theta = 0.1234;
        assert!((z_tau_exact(1, theta, &t).unwrap() - (2.0 * PI * theta).sin()).abs() < 1e-15);
        assert!(z_tau_exact(101, 0.1, &t).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let cfg = small_eval(GMethod::CrossChecked);
        let d = g_decompose(0.001, 2, 0.05, &cfg).unwrap();
        assert_eq!((d.head_end, d.middle_end), (36, 81));
        assert!(d.g1 >= (1.0 - 8.0 * 0.05) * 4.0);
        assert!(d.g1 >= 3.68);
        assert_eq!(d.g1 + d.g2 + d.g3, d.g1 + d.g2 + (d.total.value - d.g1 - d.g2));
        for i in 1..50 {
            let a = (i as f64 * GOLDEN).fract();
            let d = g_decompose(a, 2, 0.05, &cfg).unwrap();
            assert!(d.g2.abs() <= 16.0 * 0.05 * 2.0);
            assert!((d.g1 + d.g2 + d.g3 - d.total.value).abs() <= 1e-14 * (1.0 + d.total.value.abs()));
            // head and middle slices are slices of the direct series
            let head = g_direct(a, d.head_end);
            let through_middle = g_direct(a, d.middle_end);
            assert!((d.g1 - head).abs() < 1e-14);
            assert!((d.g1 + d.g2 - through_middle).abs() < 1e-13);
        }
    }

    #[test]
    fn decomposition_feasibility() {
        let cfg = small_eval(GMethod::Fourier);
        assert!(g_decompose(0.1, 10, 0.1, &cfg).is_err());
        assert!(g_decompose(0.1, 2, 0.2, &cfg).is_err());
        assert!(g_decompose(0.1, 0, 0.05, &cfg).is_err());
        let direct = GEvaluator::new(GMethod::Direct, 50, 50).unwrap();
        assert!(g_decompose(0.1, 2, 0.05, &direct).is_err());
    }

    proptest! {
        #[test]
        fn fourier_is_odd(a in 0.0001f64..0.9999) {
            let t = divisor_sieve(3000).unwrap();
            let x = g_fourier(a, 3000, &t, Damping::None).unwrap();
            let y = g_fourier(1.0 - a, 3000, &t, Damping::None).unwrap();
            prop_assert!((x + y).abs() < 1e-11);
        }

        #[test]
        fn direct_is_odd(a in 0.0001f64..0.9999) {
            let x = g_direct(a, 5000);
            let y = g_direct(1.0 - a, 5000);
            // generic a: no l a is an integer for l <= 5000
            prop_assert!((x + y).abs() < 1e-9);
        }
    }
}
