//! Moments of the limiting law: `H_k = int_0^1 (g/D)^{2k}` by stratified
//! quadrature, the finite cotangent averages converging to them, absolute
//! moments `int |g|^L`, and growth diagnostics for `sum H_k x^k / (2k)!`.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_traits::One;
use rand::distributions::Open01;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::contfrac::ln_big;
use crate::cotangent::{c0_window_scaled, euler_phi, Window};
use crate::error::{domain, Result};
use crate::gseries::{fourier_coefficients, DivisorTable, Damping, GEvaluator};
use crate::rng;
use crate::sum::{compensated_sum, CompensatedSum};

pub const STRATA: usize = 1024;
pub const MIN_SAMPLES: usize = 10_000;
pub const MAX_K: u32 = 12;
pub const MAX_L: u32 = 24;
/// Resampling rounds for flagged evaluations before the last draw is kept.
const MAX_RESAMPLE_ROUNDS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// `H_k = int (g / 2 pi)^{2k}`.
    TwoPi,
    /// `H_k = int (g / pi)^{2k}`; the limit of the cotangent averages.
    Pi,
}

impl Normalization {
    pub fn divisor(&self) -> f64 {
        match self {
            Normalization::TwoPi => 2.0 * PI,
            Normalization::Pi => PI,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Normalization::TwoPi => "two-pi",
            Normalization::Pi => "pi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "two-pi" | "2pi" => Some(Normalization::TwoPi),
            "pi" => Some(Normalization::Pi),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentMethod {
    Quadrature,
    Cotangent,
    Absolute,
}

impl MomentMethod {
    pub fn name(&self) -> &'static str {
        match self {
            MomentMethod::Quadrature => "quadrature",
            MomentMethod::Cotangent => "cotangent",
            MomentMethod::Absolute => "absolute",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quadrature" => Some(MomentMethod::Quadrature),
            "cotangent" => Some(MomentMethod::Cotangent),
            "absolute" => Some(MomentMethod::Absolute),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    /// `k` for `H_k`, `L` for absolute moments.
    pub k: u32,
    pub value: f64,
    pub stderr: f64,
    pub method: MomentMethod,
    /// `None` for absolute moments and cotangent averages.
    pub normalization: Option<Normalization>,
    /// Sample count, or the denominator `b` for cotangent averages.
    pub n: u64,
    pub seed: Option<u64>,
    /// Flagged g evaluations that were redrawn.
    pub rejected: usize,
}

/// Values of `g` at stratified uniform points: stratum `s` covers
/// `[s/S, (s+1)/S)` and draws from its own seeded stream.
#[derive(Debug, Clone)]
pub struct GSampleSet {
    seed: u64,
    offsets: Vec<usize>,
    alphas: Vec<f64>,
    values: Vec<f64>,
    rejected: usize,
    unresolved: usize,
}

impl GSampleSet {
    pub fn draw(n: usize, seed: u64, cfg: &GEvaluator) -> Result<Self> {
        if n < MIN_SAMPLES {
            return domain(format!("need at least {MIN_SAMPLES} samples, got {n}"));
        }
        let strata = STRATA.min(n / 2);
        let offsets: Vec<usize> = (0..=strata).map(|s| s * n / strata).collect();
        let mut streams: Vec<ChaCha8Rng> = (0..strata).map(|s| rng::stream(seed, s as u64)).collect();
        let draw = |s: usize, g: &mut ChaCha8Rng| (s as f64 + g.sample::<f64, _>(Open01)) / strata as f64;

        let mut alphas = Vec::with_capacity(n);
        for (s, g) in streams.iter_mut().enumerate() {
            for _ in offsets[s]..offsets[s + 1] {
                alphas.push(draw(s, g));
            }
        }
        let evals = cfg.eval_batch(&alphas);
        let mut values: Vec<f64> = evals.iter().map(|v| v.value).collect();
        let mut pending: Vec<usize> = (0..n).filter(|&i| evals[i].flagged).collect();
        let mut rejected = 0;
        for _ in 0..MAX_RESAMPLE_ROUNDS {
            if pending.is_empty() {
                break;
            }
            rejected += pending.len();
            // pending is ascending, so each stratum's stream is consumed in index order
            let mut s = 0;
            for &i in &pending {
                while offsets[s + 1] <= i {
                    s += 1;
                }
                alphas[i] = draw(s, &mut streams[s]);
            }
            let redo: Vec<f64> = pending.iter().map(|&i| alphas[i]).collect();
            let evals = cfg.eval_batch(&redo);
            let mut still = Vec::new();
            for (&i, v) in pending.iter().zip(&evals) {
                values[i] = v.value;
                if v.flagged {
                    still.push(i);
                }
            }
            pending = still;
        }
        Ok(Self { seed, offsets, alphas, values, rejected, unresolved: pending.len() })
    }

    /// Reassembles a set from its parts, e.g. after reading it back from disk.
    pub fn from_parts(
        seed: u64,
        offsets: Vec<usize>,
        alphas: Vec<f64>,
        values: Vec<f64>,
        rejected: usize,
        unresolved: usize,
    ) -> Result<Self> {
        let n = values.len();
        let consistent = offsets.len() >= 2
            && offsets[0] == 0
            && offsets[offsets.len() - 1] == n
            && offsets.windows(2).all(|w| w[0] < w[1])
            && alphas.len() == n
            && alphas.iter().all(|a| *a > 0.0 && *a < 1.0)
            && values.iter().all(|v| v.is_finite());
        if !consistent {
            return domain("inconsistent sample set");
        }
        Ok(Self { seed, offsets, alphas, values, rejected, unresolved })
    }

    /// Stratum boundaries into `alphas` and `values`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn strata(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    /// Points still flagged after the last resampling round.
    pub fn unresolved(&self) -> usize {
        self.unresolved
    }

    /// Stratified estimate of `int_0^1 f(g)` with its standard error.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let strata = self.strata();
        let mut mean = CompensatedSum::new();
        let mut var = CompensatedSum::new();
        for s in 0..strata {
            let ys: Vec<f64> = self.values[self.offsets[s]..self.offsets[s + 1]].iter().map(|&g| f(g)).collect();
            let m = ys.len() as f64;
            let mu = compensated_sum(ys.iter().copied()) / m;
            let ss = compensated_sum(ys.iter().map(|y| (y - mu) * (y - mu)));
            mean.add(mu);
            if ys.len() > 1 {
                var.add(ss / (m - 1.0) / m);
            }
        }
        let w = strata as f64;
        (mean.value() / w, (var.value().max(0.0)).sqrt() / w)
    }
}

fn check_k(k: u32) -> Result<()> {
    if k > MAX_K {
        return domain(format!("k={k} exceeds the cap {MAX_K}"));
    }
    Ok(())
}

/// `H_k` from an existing sample set.
pub fn hk_from_samples(samples: &GSampleSet, k: u32, normalization: Normalization) -> Result<MomentEstimate> {
    check_k(k)?;
    let d = normalization.divisor();
    let (value, stderr) = samples.integrate(|g| (g / d).powi(2 * k as i32));
    Ok(MomentEstimate {
        k,
        value,
        stderr,
        method: MomentMethod::Quadrature,
        normalization: Some(normalization),
        n: samples.len() as u64,
        seed: Some(samples.seed()),
        rejected: samples.rejected(),
    })
}

/// Stratified Monte Carlo estimate of `H_k`.
pub fn hk_quadrature(
    k: u32,
    n: usize,
    seed: u64,
    cfg: &GEvaluator,
    normalization: Normalization,
) -> Result<MomentEstimate> {
    check_k(k)?;
    hk_from_samples(&GSampleSet::draw(n, seed, cfg)?, k, normalization)
}

/// `phi(b)^{-1} (a1 - a0)^{-1} sum_r (c0(r/b)/b)^{2k}` over the window; exact,
/// so the reported stderr is zero and the error is the finite-`b` bias.
pub fn hk_from_cotangent(k: u32, w: &Window) -> Result<MomentEstimate> {
    check_k(k)?;
    let b = w.b();
    if b < 100 {
        return domain(format!("b={b} is below 100"));
    }
    let vals = c0_window_scaled(w);
    if vals.is_empty() {
        return domain(format!("window [{}, {}] holds no fraction with denominator {b}", w.a0(), w.a1()));
    }
    let phi = euler_phi(b)? as f64;
    let total = compensated_sum(vals.iter().map(|(_, v)| v.powi(2 * k as i32)));
    Ok(MomentEstimate {
        k,
        value: total / (phi * w.width()),
        stderr: 0.0,
        method: MomentMethod::Cotangent,
        normalization: None,
        n: b,
        seed: None,
        rejected: 0,
    })
}

pub fn abs_moment_from_samples(samples: &GSampleSet, l: u32) -> Result<MomentEstimate> {
    if l == 0 || l > MAX_L {
        return domain(format!("L={l} outside [1, {MAX_L}]"));
    }
    let (value, stderr) = samples.integrate(|g| g.abs().powi(l as i32));
    Ok(MomentEstimate {
        k: l,
        value,
        stderr,
        method: MomentMethod::Absolute,
        normalization: None,
        n: samples.len() as u64,
        seed: Some(samples.seed()),
        rejected: samples.rejected(),
    })
}

/// Stratified Monte Carlo estimate of `int_0^1 |g|^L`.
pub fn abs_moment(l: u32, n: usize, seed: u64, cfg: &GEvaluator) -> Result<MomentEstimate> {
    if l == 0 || l > MAX_L {
        return domain(format!("L={l} outside [1, {MAX_L}]"));
    }
    abs_moment_from_samples(&GSampleSet::draw(n, seed, cfg)?, l)
}

/// `(1/2) sum_{m<=cap} c_m^2` for the Fourier coefficients of `g`: the
/// energy `int g^2` of the truncated series.
pub fn fourier_energy(cap: usize, table: &DivisorTable) -> Result<f64> {
    let c = fourier_coefficients(cap, table, Damping::None)?;
    Ok(0.5 * compensated_sum(c.iter().map(|x| x * x)))
}

pub fn ln_factorial(n: u32) -> f64 {
    let f: BigUint = (1..=n).fold(BigUint::one(), |acc, i| acc * i);
    ln_big(&f)
}

/// `(2k)! >= (2k/e)^{2k}`, decided in integers with the rational
/// underestimate `e > 2718281828 / 10^9`.
pub fn stirling_guard(k: u32) -> bool {
    let n = 2 * k;
    let fact: BigUint = (1..=n).fold(BigUint::one(), |acc, i| acc * i);
    let e_lo = BigUint::from(2_718_281_828u64);
    let scale = BigUint::from(1_000_000_000u64);
    fact * e_lo.pow(n) >= BigUint::from(n).pow(n) * scale.pow(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusRow {
    pub k: u32,
    pub hk: f64,
    /// `(H_k / (2k)!)^{1/k}`.
    pub rho: f64,
    /// `rho_k` implied by `int |g|^L <= C^L L^L` at the fitted `C`.
    pub envelope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusDiagnostics {
    pub normalization: Option<Normalization>,
    pub rows: Vec<RadiusRow>,
    /// `max_L (int |g|^L)^{1/L} / L` over the absolute moments supplied.
    pub c_fit: Option<f64>,
    pub max_rho: f64,
    /// `max rho_k >= 1/pi^2 - tolerance`.
    pub meets_limsup: bool,
    /// Every `rho_k` is at most its envelope value; `None` without absolute moments.
    pub below_envelope: Option<bool>,
}

/// `rho_k = (H_k / (2k)!)^{1/k}` for each `H_k` row with `k >= 1`, the
/// envelope constant from any absolute-moment rows, and consistency flags.
pub fn radius_diagnostics(moments: &[MomentEstimate], tolerance: f64) -> Result<RadiusDiagnostics> {
    let (abs, hk): (Vec<&MomentEstimate>, Vec<&MomentEstimate>) =
        moments.iter().partition(|m| m.method == MomentMethod::Absolute);
    let Some(first) = hk.first() else {
        return domain("no H_k rows supplied");
    };
    let normalization = first.normalization;
    if hk.iter().any(|m| m.normalization != normalization) {
        return domain("H_k rows mix normalizations");
    }
    let c_fit = abs
        .iter()
        .filter(|m| m.value > 0.0)
        .map(|m| m.value.powf(1.0 / m.k as f64) / m.k as f64)
        .reduce(f64::max);
    // cotangent averages converge to the pi-normalized moments
    let d = normalization.unwrap_or(Normalization::Pi).divisor();
    let mut rows: Vec<RadiusRow> = hk
        .iter()
        .filter(|m| m.k >= 1)
        .map(|m| {
            let k = m.k as f64;
            let lf = ln_factorial(2 * m.k);
            let rho = ((m.value.ln() - lf) / k).exp();
            let envelope = c_fit.map(|c| (2.0 * (2.0 * k * c / d).ln() - lf / k).exp());
            RadiusRow { k: m.k, hk: m.value, rho, envelope }
        })
        .collect();
    rows.sort_by_key(|r| r.k);
    let max_rho = rows.iter().map(|r| r.rho).fold(f64::NEG_INFINITY, f64::max);
    let below_envelope = c_fit.map(|_| rows.iter().all(|r| r.envelope.is_some_and(|e| r.rho <= e)));
    Ok(RadiusDiagnostics {
        normalization,
        meets_limsup: max_rho >= 1.0 / (PI * PI) - tolerance,
        rows,
        c_fit,
        max_rho,
        below_envelope,
    })
}
