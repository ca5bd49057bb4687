//! Continued fractions, the Gauss map and its invariant measure, the
//! Brjuno-type sums `c(a, r) = sum_{j<=r} log(q_{j+1}) / q_j`, the threshold
//! ladder `w^(r)` with its sets `E(z, r)`, and best approximations.
//!
//! Reals are handled through certified enclosures: an input is either an
//! exact rational or a rational interval known to contain it. A partial
//! quotient is reported only when both interval endpoints agree on it, so
//! every digit is valid for every point of the interval.

use std::f64::consts::LN_2;

pub use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, LabError, Result};
use crate::rng;
use crate::sum::{compensated_sum, CompensatedSum};

/// Bits of slack required beyond `2 log2(q_bound)`.
pub const PRECISION_SLACK_BITS: u64 = 64;
/// Initial and maximal precision of sampled uniform reals.
const SAMPLE_BITS: u32 = 192;
const SAMPLE_MAX_BITS: u32 = 8192;
const SAMPLE_REFINE_BITS: u32 = 128;

/// A nonnegative rational `num / den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ratio {
    pub num: BigUint,
    pub den: BigUint,
}

impl Ratio {
    pub fn new(num: impl Into<BigUint>, den: impl Into<BigUint>) -> Self {
        Self { num: num.into(), den: den.into() }
    }

    fn to_f64(&self) -> f64 {
        let shift = self.den.bits().saturating_sub(60);
        let n = (&self.num >> shift).to_f64().unwrap_or(f64::INFINITY);
        let d = (&self.den >> shift).to_f64().unwrap_or(f64::INFINITY);
        n / d
    }

    /// One step of the Gauss map: `(partial quotient, remainder)`.
    fn gauss_step(&self) -> (BigUint, Ratio) {
        let (a, rem) = self.den.div_rem(&self.num);
        (a, Ratio { num: rem, den: self.num.clone() })
    }
}

/// A real number in `(0, 1)` given exactly or by a rational enclosure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RealInput {
    Exact(Ratio),
    /// The real lies in `[lo, hi]`.
    Interval { lo: Ratio, hi: Ratio },
}

impl RealInput {
    pub fn rational(num: u64, den: u64) -> Result<Self> {
        if num == 0 || num >= den {
            return domain(format!("{num}/{den} is not in (0, 1)"));
        }
        Ok(RealInput::Exact(Ratio::new(num, den)))
    }

    /// The double `x` as the exact dyadic rational it represents.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return domain(format!("{x} is not in (0, 1)"));
        }
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if raw_exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), raw_exp - 1075) };
        let shift = (-exp) as u64;
        let tz = (mant.trailing_zeros() as u64).min(shift);
        Ok(RealInput::Exact(Ratio::new(mant >> tz, BigUint::one() << (shift - tz))))
    }

    /// The dyadic cell `[m / 2^bits, (m + 1) / 2^bits]`.
    pub fn dyadic(mantissa: BigUint, bits: u32) -> Result<Self> {
        let den = BigUint::one() << bits;
        if mantissa.is_zero() || mantissa.clone() + 1u32 >= den {
            return domain("dyadic cell must lie strictly inside (0, 1)");
        }
        let hi = Ratio { num: &mantissa + 1u32, den: den.clone() };
        Ok(RealInput::Interval { lo: Ratio { num: mantissa, den }, hi })
    }

    /// `(sqrt(n) - offset) / scale` enclosed at `bits` bits, for integers with
    /// the result in `(0, 1)`.
    fn surd(n: u32, offset: u32, scale: u32, bits: u32) -> Self {
        let one = BigUint::one();
        let root = (BigUint::from(n) << (2 * bits)).sqrt(); // floor(sqrt(n) 2^bits)
        let den = (&one << bits) * scale;
        let off = BigUint::from(offset) << bits;
        RealInput::Interval {
            lo: Ratio { num: &root - &off, den: den.clone() },
            hi: Ratio { num: &root + &one - &off, den },
        }
    }

    /// `(sqrt 5 - 1) / 2`.
    pub fn golden_ratio(bits: u32) -> Self {
        Self::surd(5, 1, 2, bits)
    }

    /// `sqrt 2 - 1`.
    pub fn sqrt2_minus_one(bits: u32) -> Self {
        Self::surd(2, 1, 1, bits)
    }

    /// Parses `p/q`, a decimal such as `0.618`, `golden` or `sqrt2-1`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "golden" => return Ok(Self::golden_ratio(512)),
            "sqrt2-1" => return Ok(Self::sqrt2_minus_one(512)),
            _ => {}
        }
        let bad = || LabError::Domain(format!("cannot parse real number {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p: BigUint = p.trim().parse().map_err(|_| bad())?;
            let q: BigUint = q.trim().parse().map_err(|_| bad())?;
            if p.is_zero() || p >= q {
                return domain(format!("{s} is not in (0, 1)"));
            }
            return Ok(RealInput::Exact(Ratio { num: p, den: q }));
        }
        let digits = s.strip_prefix("0.").or_else(|| s.strip_prefix('.')).ok_or_else(bad)?;
        if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let num: BigUint = digits.parse().map_err(|_| bad())?;
        if num.is_zero() {
            return domain("0 is not in (0, 1)");
        }
        let den = BigUint::from(10u32).pow(digits.len() as u32);
        Ok(RealInput::Exact(Ratio { num, den }))
    }

    /// Number of bits to which the input is known.
    pub fn precision_bits(&self) -> u64 {
        match self {
            RealInput::Exact(_) => u64::MAX,
            RealInput::Interval { lo, hi } => {
                let width_num = &hi.num * &lo.den - &lo.num * &hi.den;
                let den_bits = (&lo.den * &hi.den).bits();
                den_bits.saturating_sub(width_num.bits())
            }
        }
    }

    pub fn approx(&self) -> f64 {
        match self {
            RealInput::Exact(r) => r.to_f64(),
            RealInput::Interval { lo, hi } => 0.5 * (lo.to_f64() + hi.to_f64()),
        }
    }
}

/// Partial quotients `a_1..a_R` with convergents `p_r / q_r` for `r = -1..=R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFExpansion {
    a: Vec<BigUint>,
    // p[i] holds p_{i-1}
    p: Vec<BigUint>,
    q: Vec<BigUint>,
    terminated: bool,
}

impl CFExpansion {
    pub fn from_partial_quotients(a: Vec<BigUint>, terminated: bool) -> Self {
        let mut p = vec![BigUint::one(), BigUint::zero()];
        let mut q = vec![BigUint::zero(), BigUint::one()];
        for (i, ai) in a.iter().enumerate() {
            let pn = ai * &p[i + 1] + &p[i];
            let qn = ai * &q[i + 1] + &q[i];
            p.push(pn);
            q.push(qn);
        }
        Self { a, p, q, terminated }
    }

    /// Number of partial quotients `R`.
    pub fn depth(&self) -> usize {
        self.a.len()
    }

    /// True when the expansion of an exact rational ran to completion.
    pub fn terminated(&self) -> bool {
        self.terminated
    }

    /// `a_r` for `1 <= r <= R`.
    pub fn a(&self, r: usize) -> &BigUint {
        assert!(r >= 1, "partial quotients start at a_1");
        &self.a[r - 1]
    }

    pub fn partial_quotients(&self) -> &[BigUint] {
        &self.a
    }

    /// `p_r` for `-1 <= r <= R`.
    pub fn p(&self, r: isize) -> &BigUint {
        &self.p[(r + 1) as usize]
    }

    /// `q_r` for `-1 <= r <= R`.
    pub fn q(&self, r: isize) -> &BigUint {
        &self.q[(r + 1) as usize]
    }

    /// Checks the two-term recursion for every index.
    pub fn recursion_holds(&self) -> bool {
        (0..self.depth()).all(|i| {
            self.p[i + 2] == &self.a[i] * &self.p[i + 1] + &self.p[i]
                && self.q[i + 2] == &self.a[i] * &self.q[i + 1] + &self.q[i]
        })
    }

    /// Checks `p_r q_{r-1} - p_{r-1} q_r = (-1)^{r-1}` for `0 <= r <= R`.
    pub fn determinant_holds(&self) -> bool {
        (0..=self.depth() as isize).all(|r| {
            let left = self.p(r) * self.q(r - 1);
            let right = self.p(r - 1) * self.q(r);
            if (r - 1).rem_euclid(2) == 0 {
                left == right + 1u32
            } else {
                right == left + 1u32
            }
        })
    }

    /// `gcd(p_r, q_r) = 1` for `0 <= r <= R`.
    pub fn convergents_reduced(&self) -> bool {
        (0..=self.depth() as isize).all(|r| self.p(r).gcd(self.q(r)).is_one())
    }
}

/// Natural log of a big integer, accurate to double precision.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("fits in a double").ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("fits in a double").ln() + shift as f64 * LN_2
    }
}

fn exceeds(q: &BigUint, bound: Option<&BigUint>) -> bool {
    bound.is_some_and(|b| q > b)
}

/// Expands `x` until `max_depth` partial quotients are known, a denominator
/// `q_r` exceeds `q_bound`, or an exact rational terminates.
///
/// Interval inputs need `2 log2(q_bound) + 64` bits of precision; without an
/// explicit bound the largest bound the precision supports is used. A
/// precision error is returned whenever the enclosure cannot certify the
/// next digit before a stopping rule applies.
pub fn cf_expand(x: &RealInput, max_depth: usize, q_bound: Option<&BigUint>) -> Result<CFExpansion> {
    match x {
        RealInput::Exact(r) => Ok(expand_exact(r, max_depth, q_bound)),
        RealInput::Interval { lo, hi } => {
            let have = x.precision_bits();
            let derived;
            let bound = match q_bound {
                Some(b) => {
                    let need = 2 * b.bits() + PRECISION_SLACK_BITS;
                    if have < need {
                        return Err(LabError::Precision(format!(
                            "enclosure has {have} bits, q_bound needs {need}"
                        )));
                    }
                    b
                }
                None => {
                    let bits = have.saturating_sub(PRECISION_SLACK_BITS) / 2;
                    derived = BigUint::one() << bits;
                    &derived
                }
            };
            expand_interval(lo, hi, max_depth, bound)
        }
    }
}

fn expand_exact(x: &Ratio, max_depth: usize, q_bound: Option<&BigUint>) -> CFExpansion {
    let mut a = Vec::new();
    let (mut q_prev, mut q_cur) = (BigUint::zero(), BigUint::one());
    let mut cur = x.clone();
    let mut terminated = cur.num.is_zero();
    while !terminated && a.len() < max_depth && !exceeds(&q_cur, q_bound) {
        let (digit, rem) = cur.gauss_step();
        let q_next = &digit * &q_cur + &q_prev;
        q_prev = std::mem::replace(&mut q_cur, q_next);
        a.push(digit);
        terminated = rem.num.is_zero();
        cur = rem;
    }
    CFExpansion::from_partial_quotients(a, terminated)
}

fn expand_interval(lo: &Ratio, hi: &Ratio, max_depth: usize, q_bound: &BigUint) -> Result<CFExpansion> {
    let mut a = Vec::new();
    let (mut q_prev, mut q_cur) = (BigUint::zero(), BigUint::one());
    let (mut x, mut y) = (lo.clone(), hi.clone());
    loop {
        if a.len() >= max_depth || q_cur > *q_bound {
            return Ok(CFExpansion::from_partial_quotients(a, false));
        }
        if x.num.is_zero() || y.num.is_zero() {
            break;
        }
        let (dx, rx) = x.gauss_step();
        let (dy, ry) = y.gauss_step();
        if dx != dy {
            break;
        }
        let q_next = &dx * &q_cur + &q_prev;
        q_prev = std::mem::replace(&mut q_cur, q_next);
        a.push(dx);
        x = rx;
        y = ry;
    }
    Err(LabError::Precision(format!(
        "enclosure certifies only {} partial quotients",
        a.len()
    )))
}

/// `T(x) = 1/x - floor(1/x)`.
pub fn gauss_map(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return domain(format!("Gauss map is defined on (0, 1], got {x}"));
    }
    let y = 1.0 / x;
    Ok(y - y.floor())
}

/// Gauss measure of `[lo, hi]`: `log2((1 + hi) / (1 + lo))`.
pub fn gauss_measure(lo: f64, hi: f64) -> Result<f64> {
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return domain(format!("need 0 <= lo <= hi <= 1, got [{lo}, {hi}]"));
    }
    Ok((hi.ln_1p() - lo.ln_1p()) / LN_2)
}

/// Monte Carlo estimate of the Gauss measure of `T^{-1}(0, t)`.
///
/// Points are drawn from the Gauss measure itself by inverting its
/// distribution function, `x = 2^u - 1`. Returns `(estimate, stderr)`.
pub fn gauss_preimage_mc(t: f64, n: usize, seed: u64) -> Result<(f64, f64)> {
    if !(0.0 < t && t <= 1.0) {
        return domain(format!("t must lie in (0, 1], got {t}"));
    }
    if n == 0 {
        return domain("need at least one sample");
    }
    let hits: usize = rng::chunks(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, start, end)| {
            use rand::Rng;
            let mut g = rng::stream(seed, c);
            (start..end)
                .filter(|_| {
                    let u: f64 = g.sample(rand::distributions::Open01);
                    let x = (u * LN_2).exp_m1();
                    gauss_map(x).map(|y| y < t).unwrap_or(false)
                })
                .count()
        })
        .sum();
    Ok(binomial(hits, n))
}

/// `(p, stderr)` for `hits` of `n`, with the variance floored at `1/n` so an
/// empty count still reports an error of order `1/n`.
pub(crate) fn binomial(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    let var = (p * (1.0 - p)).max(1.0 / n as f64);
    (p, (var / n as f64).sqrt())
}

/// Compares the first `depth` digits of `T^r x` with `a_{r+1}..a_{r+depth}`.
pub fn shift_check(x: &RealInput, r: usize, depth: usize) -> Result<bool> {
    let full = cf_expand(x, r + depth, None)?;
    let shifted_input = match x {
        RealInput::Exact(v) => {
            let mut cur = v.clone();
            for _ in 0..r {
                if cur.num.is_zero() {
                    break;
                }
                cur = cur.gauss_step().1;
            }
            if cur.num.is_zero() {
                return Ok(full.depth() <= r);
            }
            RealInput::Exact(cur)
        }
        RealInput::Interval { lo, hi } => {
            let (mut x, mut y) = (lo.clone(), hi.clone());
            for step in 0..r {
                if x.num.is_zero() || y.num.is_zero() {
                    return Err(LabError::Precision(format!("enclosure collapsed after {step} shifts")));
                }
                let (dx, rx) = x.gauss_step();
                let (dy, ry) = y.gauss_step();
                if dx != dy {
                    return Err(LabError::Precision(format!("enclosure straddles a branch after {step} shifts")));
                }
                // T is decreasing on each branch
                x = ry;
                y = rx;
            }
            RealInput::Interval { lo: x, hi: y }
        }
    };
    let shifted = cf_expand(&shifted_input, depth, None)?;
    let available = full.depth().saturating_sub(r).min(depth);
    if shifted.depth() < available {
        return Ok(false);
    }
    Ok((0..available).all(|i| shifted.a(i + 1) == full.a(r + i + 1)))
}

/// `c(a, r) = sum_{j=0}^{r} log(q_{j+1}) / q_j`.
pub fn c_alpha_r(cf: &CFExpansion, r: usize) -> Result<f64> {
    if cf.depth() < r + 1 {
        return domain(format!(
            "c(alpha, {r}) needs depth {}, expansion has {}",
            r + 1,
            cf.depth()
        ));
    }
    Ok(c_prefix(cf, r)[r])
}

/// `[c(a, 0), ..., c(a, r)]`.
fn c_prefix(cf: &CFExpansion, r: usize) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    (0..=r)
        .map(|j| {
            let j = j as isize;
            let term = ln_big(cf.q(j + 1)) / cf.q(j).to_f64().unwrap_or(f64::INFINITY);
            acc.add(term);
            acc.value()
        })
        .collect()
}

/// The ladder `w^(r) = 1/2 + c_0 sum_{j<=r} A^{-j/2}` with
/// `c_0 sum_{j>=0} A^{-j/2} = 1/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WSequence {
    growth_base: f64,
    c_small: f64,
}

impl WSequence {
    pub fn new(growth_base: f64) -> Result<Self> {
        if !(growth_base > 1.0 && growth_base.is_finite()) {
            return domain(format!("growth base must exceed 1, got {growth_base}"));
        }
        Ok(Self { growth_base, c_small: (1.0 - growth_base.powf(-0.5)) / 4.0 })
    }

    pub fn growth_base(&self) -> f64 {
        self.growth_base
    }

    pub fn c_small(&self) -> f64 {
        self.c_small
    }

    pub fn w(&self, r: usize) -> f64 {
        0.5 + self.c_small * compensated_sum((0..=r).map(|j| self.growth_base.powf(-(j as f64) / 2.0)))
    }

    /// `exp(-c_0 A^{r/2} z / 2)`, the decay bound for `meas E(z, r)`.
    pub fn decay_bound(&self, z: f64, r: usize) -> f64 {
        (-0.5 * self.c_small * self.growth_base.powf(r as f64 / 2.0) * z).exp()
    }
}

impl Default for WSequence {
    /// `A = sqrt 2`, from `q_{r+2} >= 2 q_r`.
    fn default() -> Self {
        Self::new(std::f64::consts::SQRT_2).expect("sqrt 2 exceeds 1")
    }
}

/// Depth needed to evaluate every `E(z, r)` with `r <= max_r`.
pub fn e_depth(max_r: usize) -> usize {
    (max_r + 1).max(2)
}

/// Membership in `E(z, r)` given the prefix sums `c[j] = c(a, j)`.
///
/// `E(z, 0)` is `c(a, 1) >= z/2`; for `r >= 1`, `E(z, r)` is
/// `c(a, r-1) < w^(r-1) z` and `c(a, r) >= w^(r) z`.
fn in_e_prefix(c: &[f64], z: f64, r: usize, ws: &WSequence) -> bool {
    if r == 0 {
        c[1] >= 0.5 * z
    } else {
        c[r - 1] < ws.w(r - 1) * z && c[r] >= ws.w(r) * z
    }
}

pub fn in_e(cf: &CFExpansion, z: f64, r: usize, ws: &WSequence) -> Result<bool> {
    check_e_depth(cf, r)?;
    Ok(in_e_prefix(&c_prefix(cf, r.max(1)), z, r, ws))
}

fn check_e_depth(cf: &CFExpansion, max_r: usize) -> Result<()> {
    let need = e_depth(max_r);
    if cf.depth() < need {
        return domain(format!("E(z, r <= {max_r}) needs depth {need}, expansion has {}", cf.depth()));
    }
    Ok(())
}

/// The smallest `r <= max_r` with `a in E(z, r)`.
pub fn classify_e(cf: &CFExpansion, z: f64, ws: &WSequence, max_r: usize) -> Result<Option<usize>> {
    if !(z > 0.0) {
        return domain(format!("z must be positive, got {z}"));
    }
    check_e_depth(cf, max_r)?;
    let c = c_prefix(cf, max_r.max(1));
    Ok((0..=max_r).find(|&r| in_e_prefix(&c, z, r, ws)))
}

/// A uniform real in `(0, 1)` whose binary digits are drawn on demand.
#[derive(Debug, Clone)]
pub struct UniformReal {
    mantissa: BigUint,
    bits: u32,
}

impl UniformReal {
    pub fn draw(rng: &mut ChaCha8Rng) -> Self {
        let mut s = Self { mantissa: BigUint::zero(), bits: 0 };
        s.refine(rng, SAMPLE_BITS);
        s
    }

    pub fn refine(&mut self, rng: &mut ChaCha8Rng, extra: u32) {
        for _ in 0..extra.div_ceil(64) {
            self.mantissa = (&self.mantissa << 64u32) + rng.next_u64();
            self.bits += 64;
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn as_input(&self) -> Result<RealInput> {
        RealInput::dyadic(self.mantissa.clone(), self.bits)
    }

    /// Nearest double (truncated to 53 bits).
    pub fn to_f64(&self) -> f64 {
        let top = (&self.mantissa >> (self.bits - 53)).to_u64().expect("53 bits");
        top as f64 / (1u64 << 53) as f64
    }

    /// Expansion to `depth` digits, drawing more bits until they are
    /// certified.
    pub fn expand(&mut self, rng: &mut ChaCha8Rng, depth: usize) -> Result<CFExpansion> {
        loop {
            let attempt = self.as_input().and_then(|x| cf_expand(&x, depth, None));
            match attempt {
                Ok(cf) if cf.depth() >= depth => return Ok(cf),
                Ok(_) | Err(_) if self.bits + SAMPLE_REFINE_BITS <= SAMPLE_MAX_BITS => {
                    self.refine(rng, SAMPLE_REFINE_BITS)
                }
                _ => {
                    return Err(LabError::Precision(format!(
                        "{depth} digits not certified within {SAMPLE_MAX_BITS} bits"
                    )))
                }
            }
        }
    }
}

/// Truncation depth `R` for `c(a, +inf)`: smallest `R` with
/// `sum_{j>R} (j+1) log(A) / A^j <= eps`, i.e. the tail evaluated at the
/// minimal growth `q_j = A^j`.
pub fn tail_depth(eps: f64, growth_base: f64) -> usize {
    let ln_a = growth_base.ln();
    let term = |j: usize| (j + 1) as f64 * ln_a * (-(j as f64) * ln_a).exp();
    let mut r = 1;
    loop {
        let tail: f64 = (r + 1..r + 2000).map(term).sum();
        if tail <= eps || r > 10_000 {
            return r;
        }
        r += 1;
    }
}

/// Prefix sums `c(a, 0..=max_r)` at `n` seeded uniform samples, together with
/// the samples as doubles. Samples whose digits cannot be certified are
/// dropped; the count is returned.
pub fn sample_c_prefixes(n: usize, seed: u64, max_r: usize) -> (Vec<(f64, Vec<f64>)>, usize) {
    let depth = max_r + 1;
    let per_chunk: Vec<(Vec<(f64, Vec<f64>)>, usize)> = rng::chunks(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, start, end)| {
            let mut g = rng::stream(seed, c);
            let mut out = Vec::with_capacity(end - start);
            let mut dropped = 0;
            for _ in start..end {
                let mut x = UniformReal::draw(&mut g);
                match x.expand(&mut g, depth) {
                    Ok(cf) => out.push((x.to_f64(), c_prefix(&cf, max_r))),
                    Err(_) => dropped += 1,
                }
            }
            (out, dropped)
        })
        .collect();
    let dropped = per_chunk.iter().map(|c| c.1).sum();
    (per_chunk.into_iter().flat_map(|c| c.0).collect(), dropped)
}

/// One row of an exceptional-set sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EMeasureRow {
    pub z: f64,
    pub r: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Monte Carlo estimates of `meas E(z, r)` for every `z` and `r <= max_r`
/// from one shared set of samples.
pub fn emeasure_sweep(zs: &[f64], max_r: usize, n: usize, seed: u64, ws: &WSequence) -> Result<Vec<EMeasureRow>> {
    if n < 1000 {
        return domain(format!("need at least 1000 samples, got {n}"));
    }
    if let Some(z) = zs.iter().find(|z| !(**z > 0.0)) {
        return domain(format!("z must be positive, got {z}"));
    }
    let (samples, dropped) = sample_c_prefixes(n, seed, max_r.max(1));
    let used = n - dropped;
    let mut rows = Vec::new();
    for &z in zs {
        for r in 0..=max_r {
            let hits = samples.iter().filter(|(_, c)| in_e_prefix(c, z, r, ws)).count();
            let (estimate, stderr) = binomial(hits, used);
            rows.push(EMeasureRow { z, r, estimate, stderr, bound: ws.decay_bound(z, r), n_samples: used, seed });
        }
    }
    Ok(rows)
}

/// Monte Carlo estimate of `meas E(z, r)`; `(estimate, stderr)`.
pub fn measure_e_mc(z: f64, r: usize, n: usize, seed: u64, ws: &WSequence) -> Result<(f64, f64)> {
    let row = emeasure_sweep(&[z], r, n, seed, ws)?.pop().expect("one row");
    Ok((row.estimate, row.stderr))
}

/// Monte Carlo estimate of `meas {c(a, R) >= z}` with `R = tail_depth(eps, A)`,
/// the one-sided proxy for `E(z, +inf)`.
pub fn measure_e_infinity_mc(z: f64, n: usize, seed: u64, eps: f64, ws: &WSequence) -> Result<(f64, f64)> {
    if n < 1000 {
        return domain(format!("need at least 1000 samples, got {n}"));
    }
    let depth = tail_depth(eps, ws.growth_base());
    let (samples, dropped) = sample_c_prefixes(n, seed, depth);
    let hits = samples.iter().filter(|(_, c)| c[depth] >= z).count();
    Ok(binomial(hits, n - dropped))
}

/// `mu(theta; Q) = min_{1<=m<=Q} ||m theta||` and its least minimizer
/// `q(theta; Q)`, from the convergents of `theta`.
pub fn best_approx(theta: f64, big_q: u64) -> Result<(u64, f64)> {
    if big_q == 0 {
        return domain("Q must be at least 1");
    }
    if !theta.is_finite() {
        return domain(format!("theta must be finite, got {theta}"));
    }
    let frac = theta - theta.floor();
    if frac == 0.0 {
        return Ok((1, 0.0));
    }
    let RealInput::Exact(exact) = RealInput::from_f64(frac)? else { unreachable!() };
    let cf = expand_exact(&exact, usize::MAX, Some(&BigUint::from(big_q)));
    // the last convergent denominator not exceeding Q
    let q = (0..=cf.depth() as isize)
        .rev()
        .map(|r| cf.q(r))
        .find(|q| **q <= BigUint::from(big_q))
        .and_then(|q| q.to_u64())
        .unwrap_or(1);
    let mu = exact_distance(&exact, q);
    debug_assert!(mu <= 1.0 / big_q as f64 + f64::EPSILON);
    Ok((q, mu))
}

/// `||m x||` for an exact rational `x`, rounded once to a double.
pub fn exact_distance(x: &Ratio, m: u64) -> f64 {
    let rem = (&x.num * m) % &x.den;
    let other = &x.den - &rem;
    let near = if rem <= other { rem } else { other };
    Ratio { num: near, den: x.den.clone() }.to_f64()
}

/// `min_{r>=2} q_r^{1/r}`, the empirical exponential growth base.
pub fn growth_fit(cf: &CFExpansion) -> Result<f64> {
    if cf.depth() < 2 {
        return domain(format!("growth fit needs depth >= 2, got {}", cf.depth()));
    }
    Ok((2..=cf.depth())
        .map(|r| (ln_big(cf.q(r as isize)) / r as f64).exp())
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn digits(cf: &CFExpansion) -> Vec<u64> {
        cf.partial_quotients().iter().map(|a| a.to_u64().unwrap()).collect()
    }

    fn qs(cf: &CFExpansion) -> Vec<u64> {
        (0..=cf.depth() as isize).map(|r| cf.q(r).to_u64().unwrap()).collect()
    }

    #[test]
    fn rational_expansions() {
        let cf = cf_expand(&RealInput::rational(7, 10).unwrap(), 100, None).unwrap();
        assert_eq!(digits(&cf), vec![1, 2, 3]);
        assert!(cf.terminated());
        assert_eq!(cf.p(3).to_u64(), Some(7));
        assert_eq!(cf.q(3).to_u64(), Some(10));
        let cf = cf_expand(&RealInput::rational(1, 2).unwrap(), 100, None).unwrap();
        assert_eq!(digits(&cf), vec![2]);
    }

    #[test]
    fn golden_ratio_is_fibonacci() {
        let cf = cf_expand(&RealInput::golden_ratio(256), 8, None).unwrap();
        assert_eq!(digits(&cf), vec![1; 8]);
        assert_eq!(qs(&cf), vec![1, 1, 2, 3, 5, 8, 13, 21, 34]);
    }

    #[test]
    fn precision_is_enforced() {
        let x = RealInput::golden_ratio(100);
        let bound = BigUint::one() << 40u32;
        assert!(matches!(cf_expand(&x, 1000, Some(&bound)), Err(LabError::Precision(_))));
        // a coarse enclosure runs out of digits before the depth rule
        let coarse = RealInput::dyadic(BigUint::from(5u32), 4).unwrap();
        assert!(matches!(cf_expand(&coarse, 50, Some(&BigUint::one())), Err(LabError::Precision(_))));
    }

    #[test]
    fn interval_digits_hold_for_both_endpoints() {
        let x = RealInput::sqrt2_minus_one(300);
        let cf = cf_expand(&x, 60, None).unwrap();
        assert_eq!(digits(&cf), vec![2; 60]);
    }

    #[test]
    fn q_bound_stops_expansion() {
        let x = RealInput::golden_ratio(512);
        let cf = cf_expand(&x, 1000, Some(&BigUint::from(100u32))).unwrap();
        assert_eq!(cf.q(cf.depth() as isize).to_u64(), Some(144));
    }

    #[test]
    fn parsing() {
        assert_eq!(RealInput::parse("7/10").unwrap(), RealInput::rational(7, 10).unwrap());
        assert_eq!(RealInput::parse("0.25").unwrap(), RealInput::Exact(Ratio::new(25u32, 100u32)));
        assert!(RealInput::parse("1.5").is_err());
        assert!(RealInput::parse("3/2").is_err());
        assert!(RealInput::parse("0.").is_err());
        assert!(matches!(RealInput::parse("golden").unwrap(), RealInput::Interval { .. }));
    }

    #[test]
    fn from_f64_is_exact() {
        let RealInput::Exact(r) = RealInput::from_f64(0.375).unwrap() else { panic!() };
        assert_eq!((r.num.to_u64(), r.den.to_u64()), (Some(3), Some(8)));
    }

    #[test]
    fn gauss_map_values() {
        assert!((gauss_map(0.4).unwrap() - 0.5).abs() < 1e-15);
        assert!((gauss_map(2.0 / 7.0).unwrap() - 0.5).abs() < 1e-14);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        assert!((gauss_map(phi).unwrap() - phi).abs() < 1e-15);
        assert!(gauss_map(0.0).is_err());
    }

    #[test]
    fn gauss_measure_values() {
        assert!((gauss_measure(0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((gauss_measure(0.0, 0.5).unwrap() - 1.5f64.ln() / LN_2).abs() < 1e-15);
        assert_eq!(gauss_measure(0.3, 0.3).unwrap(), 0.0);
        assert!(gauss_measure(0.5, 0.2).is_err());
        assert!(gauss_measure(-0.1, 0.2).is_err());
    }

    #[test]
    fn shift_examples() {
        assert!(shift_check(&RealInput::golden_ratio(256), 3, 5).unwrap());
        assert!(shift_check(&RealInput::rational(7, 10).unwrap(), 1, 2).unwrap());
        assert!(shift_check(&RealInput::rational(7, 10).unwrap(), 0, 3).unwrap());
        assert!(shift_check(&RealInput::sqrt2_minus_one(256), 0, 10).unwrap());
        assert!(shift_check(&RealInput::parse("0.8414709848078965").unwrap(), 4, 6).unwrap());
    }

    #[test]
    fn c_alpha_examples() {
        let cf = cf_expand(&RealInput::golden_ratio(256), 30, None).unwrap();
        assert_eq!(c_alpha_r(&cf, 0).unwrap(), 0.0);
        assert!((c_alpha_r(&cf, 1).unwrap() - LN_2).abs() < 1e-15);
        let mut prev = 0.0;
        for r in 0..29 {
            let c = c_alpha_r(&cf, r).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        assert!(c_alpha_r(&cf, 30).is_err());
    }

    #[test]
    fn w_ladder() {
        let ws = WSequence::default();
        assert!((ws.w(0) - (0.5 + ws.c_small())).abs() < 1e-15);
        assert!((ws.c_small() - (1.0 - 2f64.powf(-0.25)) / 4.0).abs() < 1e-15);
        for r in 0..60 {
            assert!(ws.w(r + 1) > ws.w(r));
        }
        for r in 60..200 {
            assert!(ws.w(r + 1) >= ws.w(r));
        }
        assert!((ws.w(2000) - 0.75).abs() < 1e-12);
        assert!(WSequence::new(1.0).is_err());
    }

    #[test]
    fn e_classification() {
        let ws = WSequence::default();
        let golden = cf_expand(&RealInput::golden_ratio(512), 22, None).unwrap();
        assert_eq!(classify_e(&golden, 1e6, &ws, 20).unwrap(), None);
        // [0; 1, 10^6]: c(a, 1) = log(10^6 + 1) ~ 13.8
        let big = CFExpansion::from_partial_quotients(
            vec![BigUint::from(1u32), BigUint::from(1_000_000u32), BigUint::from(1u32)],
            false,
        );
        assert_eq!(classify_e(&big, 20.0, &ws, 1).unwrap(), Some(0));
        assert!(in_e(&big, 20.0, 0, &ws).unwrap());
        assert!(!in_e(&big, 30.0, 0, &ws).unwrap());
        assert!(classify_e(&big, 20.0, &ws, 5).is_err());
    }

    #[test]
    fn best_approx_examples() {
        let (q, mu) = best_approx(2f64.sqrt() - 1.0, 5).unwrap();
        assert_eq!(q, 5);
        assert!((mu - (5.0 * (2f64.sqrt() - 1.0) - 2.0)).abs() < 1e-12);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (q, mu) = best_approx(phi, 10).unwrap();
        assert_eq!(q, 8);
        assert!((mu - (8.0 * phi - 5.0).abs()).abs() < 1e-12);
        let (q, mu) = best_approx(0.3, 1).unwrap();
        assert_eq!(q, 1);
        assert!((mu - 0.3).abs() < 1e-15);
        assert!(best_approx(0.3, 0).is_err());
    }

    #[test]
    fn growth_fit_examples() {
        let golden = cf_expand(&RealInput::golden_ratio(256), 20, None).unwrap();
        let g = growth_fit(&golden).unwrap();
        assert!(g > 1.4 && g < 1.7, "{g}");
        let twos = cf_expand(&RealInput::sqrt2_minus_one(256), 10, None).unwrap();
        assert!(growth_fit(&twos).unwrap() >= 2f64.sqrt());
        let short = cf_expand(&RealInput::rational(1, 2).unwrap(), 10, None).unwrap();
        assert!(growth_fit(&short).is_err());
    }

    #[test]
    fn tail_depth_meets_its_bound() {
        let a = std::f64::consts::SQRT_2;
        let r = tail_depth(1e-6, a);
        let tail = |r: usize| -> f64 { (r + 1..r + 5000).map(|j| (j + 1) as f64 * a.ln() / a.powi(j as i32)).sum() };
        assert!(tail(r) <= 1e-6);
        assert!(tail(r - 1) > 1e-6);
    }

    #[test]
    fn sampler_certifies_digits() {
        let mut g = rng::stream(3, 0);
        for _ in 0..200 {
            let mut x = UniformReal::draw(&mut g);
            let cf = x.expand(&mut g, 40).unwrap();
            assert_eq!(cf.depth(), 40);
            // every digit agrees with the expansion of the lower endpoint
            let RealInput::Interval { lo, .. } = x.as_input().unwrap() else { panic!() };
            let exact = expand_exact(&lo, 40, None);
            assert_eq!(exact.partial_quotients(), cf.partial_quotients());
        }
    }

    #[test]
    fn huge_z_gives_empty_estimate() {
        let ws = WSequence::default();
        let (p, se) = measure_e_mc(1000.0, 2, 2000, 5, &ws).unwrap();
        assert_eq!(p, 0.0);
        assert!(se > 0.0 && se <= 1.0 / 1000.0);
        assert!(measure_e_mc(1.0, 2, 10, 5, &ws).is_err());
    }

    proptest! {
        #[test]
        fn convergent_identities(num in 1u64..1_000_000_000, den in 2u64..1_000_000_000) {
            prop_assume!(num < den);
            let x = RealInput::rational(num, den).unwrap();
            let cf = cf_expand(&x, usize::MAX, None).unwrap();
            prop_assert!(cf.terminated());
            prop_assert!(cf.recursion_holds());
            prop_assert!(cf.determinant_holds());
            prop_assert!(cf.convergents_reduced());
            let g = num.gcd(&den);
            let r = cf.depth() as isize;
            prop_assert_eq!(cf.p(r).to_u64(), Some(num / g));
            prop_assert_eq!(cf.q(r).to_u64(), Some(den / g));
        }

        #[test]
        fn best_approx_matches_brute_force(theta in 0.0f64..1.0, big_q in 1u64..3000) {
            let (q, mu) = best_approx(theta, big_q).unwrap();
            let RealInput::Exact(x) = RealInput::from_f64(theta).unwrap() else { unreachable!() };
            let brute = (1..=big_q)
                .min_by(|&a, &b| {
                    let da = (&x.num * a) % &x.den;
                    let da = da.clone().min(&x.den - &da);
                    let db = (&x.num * b) % &x.den;
                    let db = db.clone().min(&x.den - &db);
                    da.cmp(&db).then(a.cmp(&b))
                })
                .unwrap();
            prop_assert_eq!(q, brute);
            prop_assert_eq!(mu, exact_distance(&x, brute));
            prop_assert!(mu <= 1.0 / big_q as f64);
        }

        #[test]
        fn convergents_approximate(seed in 0u64..1000) {
            let mut g = rng::stream(seed, 1);
            let mut x = UniformReal::draw(&mut g);
            let cf = x.expand(&mut g, 25).unwrap();
            let RealInput::Interval { lo, .. } = x.as_input().unwrap() else { unreachable!() };
            // |x - p_r/q_r| < 1/(q_r q_{r+1}) in exact integers
            for r in 0..24isize {
                let (p, q, q1) = (cf.p(r), cf.q(r), cf.q(r + 1));
                let lhs_num = (&lo.num * q).max(p * &lo.den) - (&lo.num * q).min(p * &lo.den);
                prop_assert!(lhs_num * q1 < &lo.den * 1u32);
            }
        }
    }
}
