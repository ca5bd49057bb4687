//! Exact evaluation of the cotangent sums
//! `c0(r/b) = -sum_{m=1}^{b-1} (m/b) cot(pi m r / b)` and enumeration of
//! the coprime residue windows they are averaged over.

use std::f64::consts::PI;

use num_integer::Integer;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::sum::CompensatedSum;

/// Largest accepted denominator.
pub const MAX_DENOMINATOR: u64 = 1 << 31;

/// Above this size `c0_window_scaled` evaluates cotangents on the fly instead
/// of tabulating them.
const TABLE_LIMIT: u64 = 1 << 24;

/// A reduced fraction `r/b` with `0 < r < b` and `gcd(r, b) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedFraction {
    r: u64,
    b: u64,
}

impl ReducedFraction {
    pub fn new(r: u64, b: u64) -> Result<Self> {
        if b < 2 || b > MAX_DENOMINATOR {
            return domain(format!("denominator b={b} outside [2, 2^31]"));
        }
        if r == 0 || r >= b {
            return domain(format!("numerator r={r} outside (0, {b})"));
        }
        if r.gcd(&b) != 1 {
            return domain(format!("{r}/{b} is not reduced"));
        }
        Ok(Self { r, b })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// The reflected fraction `(b - r)/b`.
    pub fn reflect(&self) -> Self {
        Self { r: self.b - self.r, b: self.b }
    }

    pub fn to_f64(&self) -> f64 {
        self.r as f64 / self.b as f64
    }
}

/// A residue window `{r : a0 b <= r <= a1 b}` for a fixed denominator `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    b: u64,
    a0: f64,
    a1: f64,
}

impl Window {
    /// A window with `1/2 < a0 < a1 < 1`.
    pub fn new(b: u64, a0: f64, a1: f64) -> Result<Self> {
        if !(0.5 < a0 && a0 < a1 && a1 < 1.0) {
            return domain(format!("window requires 1/2 < a0 < a1 < 1, got a0={a0}, a1={a1}"));
        }
        Self::relaxed(b, a0, a1)
    }

    /// A window with `0 <= a0 < a1 <= 1`, used for whole-range dumps.
    pub fn relaxed(b: u64, a0: f64, a1: f64) -> Result<Self> {
        if b < 2 || b > MAX_DENOMINATOR {
            return domain(format!("denominator b={b} outside [2, 2^31]"));
        }
        if !(0.0 <= a0 && a0 < a1 && a1 <= 1.0) {
            return domain(format!("window requires 0 <= a0 < a1 <= 1, got a0={a0}, a1={a1}"));
        }
        Ok(Self { b, a0, a1 })
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn width(&self) -> f64 {
        self.a1 - self.a0
    }

    /// The window seen through `r -> b - r`: `(1 - a1, 1 - a0)`.
    pub fn reflect(&self) -> Self {
        Self { b: self.b, a0: 1.0 - self.a1, a1: 1.0 - self.a0 }
    }

    /// Inclusive integer range of `r` covered, clipped to `[1, b-1]`.
    fn range(&self) -> (u64, u64) {
        let b = self.b as f64;
        let lo = (self.a0 * b).ceil().max(1.0) as u64;
        let hi = ((self.a1 * b).floor() as u64).min(self.b - 1);
        (lo, hi)
    }
}

/// Euler's totient by trial factorization.
pub fn euler_phi(b: u64) -> Result<u64> {
    if b == 0 {
        return domain("euler_phi(0) is undefined");
    }
    let mut n = b;
    let mut phi = b;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            phi -= phi / p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        phi -= phi / n;
    }
    Ok(phi)
}

/// All reduced fractions `r/b` with `a0 b <= r <= a1 b`, ascending.
pub fn coprime_window(w: &Window) -> Vec<ReducedFraction> {
    let (lo, hi) = w.range();
    (lo..=hi)
        .filter(|r| r.gcd(&w.b) == 1)
        .map(|r| ReducedFraction { r, b: w.b })
        .collect()
}

/// `cot(pi j / b)` for `0 < j < b`, reduced to an argument in `(0, pi/2]`.
#[inline]
fn cot_pi_frac(j: u64, b: u64) -> f64 {
    let (jj, sign) = if 2 * j <= b { (j, 1.0) } else { (b - j, -1.0) };
    let theta = PI * (jj as f64 / b as f64);
    sign * theta.cos() / theta.sin()
}

/// Summation order over `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumOrder {
    Ascending,
    Descending,
}

fn c0_by<F: Fn(u64) -> f64>(f: &ReducedFraction, order: SumOrder, cot: F) -> f64 {
    let (r, b) = (f.r, f.b);
    let inv_b = 1.0 / b as f64;
    let mut acc = CompensatedSum::new();
    match order {
        SumOrder::Ascending => {
            // j = m r mod b, stepped exactly in integers
            let mut j = r;
            for m in 1..b {
                acc.add(m as f64 * inv_b * cot(j));
                j += r;
                if j >= b {
                    j -= b;
                }
            }
        }
        SumOrder::Descending => {
            for m in (1..b).rev() {
                let j = ((m as u128 * r as u128) % b as u128) as u64;
                acc.add(m as f64 * inv_b * cot(j));
            }
        }
    }
    -acc.value()
}

/// The cotangent sum `c0(r/b)`, summed in ascending `m`.
pub fn c0(f: &ReducedFraction) -> f64 {
    c0_ordered(f, SumOrder::Ascending)
}

pub fn c0_ordered(f: &ReducedFraction, order: SumOrder) -> f64 {
    c0_by(f, order, |j| cot_pi_frac(j, f.b))
}

/// `(r/b, c0(r/b)/b)` for every fraction of the window, ascending in `r`.
///
/// Runs on the ambient rayon pool. Each value is computed sequentially, so the
/// output does not depend on the number of workers.
pub fn c0_window_scaled(w: &Window) -> Vec<(ReducedFraction, f64)> {
    let fractions = coprime_window(w);
    let b = w.b;
    if b <= TABLE_LIMIT {
        let table: Vec<f64> = (0..b).map(|j| if j == 0 { 0.0 } else { cot_pi_frac(j, b) }).collect();
        fractions
            .into_par_iter()
            .map(|f| {
                let v = c0_by(&f, SumOrder::Ascending, |j| table[j as usize]);
                (f, v / b as f64)
            })
            .collect()
    } else {
        fractions.into_par_iter().map(|f| (f, c0(&f) / b as f64)).collect()
    }
}
