//! Batched evaluation of a finite sine series `sum_{m<=cap} c_m sin(2 pi m x)`.
//!
//! The series and its first `p` derivatives are tabulated on a uniform grid
//! of `K` points with one inverse FFT per derivative order. A query point is
//! then a degree-`p-1` Taylor polynomial around the nearest grid node. With
//! `|x - x_k| <= h/2` the Taylor remainder is at most
//! `sum_m |c_m| (pi m h)^p / p!`, which fixes `p` at construction.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Taylor remainder target.
const REMAINDER_TARGET: f64 = 1e-13;
const MAX_ORDER: usize = 48;

#[derive(Debug)]
pub struct SineGrid {
    size: usize,
    order: usize,
    // node-major: data[k * order + j] is the j-th scaled Taylor coefficient at node k
    data: Vec<f64>,
    remainder_bound: f64,
}

impl SineGrid {
    /// `coeffs[m - 1]` is `c_m`.
    pub fn build(coeffs: &[f64]) -> Self {
        let cap = coeffs.len();
        let size = (cap + 1).next_power_of_two().max(64);
        let h = 1.0 / size as f64;

        // choose the Taylor order from the rigorous remainder bound
        let mut order = 1;
        loop {
            let bound = remainder(coeffs, h, order);
            if bound <= REMAINDER_TARGET || order >= MAX_ORDER {
                break;
            }
            order += 1;
        }
        let remainder_bound = remainder(coeffs, h, order);

        let fft = FftPlanner::<f64>::new().plan_fft_inverse(size);
        let mut weights: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        let mut data = vec![0.0; size * order];
        for j in 0..order {
            if j > 0 {
                // weights_m <- weights_m * (2 pi i m h) / j
                for (idx, w) in weights.iter_mut().enumerate() {
                    let step = 2.0 * PI * (idx + 1) as f64 * h / j as f64;
                    *w = Complex64::new(-w.im * step, w.re * step);
                }
            }
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            buf[1..=cap].copy_from_slice(&weights);
            fft.process(&mut buf);
            for (k, z) in buf.iter().enumerate() {
                data[k * order + j] = z.im;
            }
        }
        Self { size, order, data, remainder_bound }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Bound on the truncation error of the Taylor step (rounding excluded).
    pub fn remainder_bound(&self) -> f64 {
        self.remainder_bound
    }

    pub fn eval(&self, x: f64) -> f64 {
        let y = (x - x.floor()) * self.size as f64;
        let nearest = y.round();
        let t = y - nearest;
        let k = (nearest as usize) % self.size;
        let row = &self.data[k * self.order..(k + 1) * self.order];
        row.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
}

fn remainder(coeffs: &[f64], h: f64, p: usize) -> f64 {
    let log_fact: f64 = (1..=p).map(|i| (i as f64).ln()).sum();
    coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let x = PI * (idx + 1) as f64 * h;
            c.abs() * (p as f64 * x.ln() - log_fact).exp()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(coeffs: &[f64], x: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * (2.0 * PI * (i + 1) as f64 * x).sin())
            .sum()
    }

    #[test]
    fn matches_direct_sum() {
        let coeffs: Vec<f64> = (1..=3000).map(|m| 1.0 / m as f64).collect();
        let grid = SineGrid::build(&coeffs);
        assert!(grid.remainder_bound() <= REMAINDER_TARGET);
        for i in 0..200 {
            let x = (i as f64 * 0.618_033_988_749_895) % 1.0 + 1e-7;
            let d = direct(&coeffs, x);
            assert!((grid.eval(x) - d).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn periodic_and_handles_nodes() {
        let coeffs = vec![0.0, 1.0];
        let grid = SineGrid::build(&coeffs);
        assert!((grid.eval(0.125) - (0.5 * PI).sin()).abs() < 1e-13);
        assert!((grid.eval(1.125) - grid.eval(0.125)).abs() < 1e-13);
        assert!((grid.eval(-0.875) - grid.eval(0.125)).abs() < 1e-13);
        assert!(grid.eval(0.0).abs() < 1e-13);
        assert!(grid.eval(1.0 - 1e-17).abs() < 1e-13);
    }
}
