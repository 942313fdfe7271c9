//! Numerical integration and summation helpers.
//!
//! Adaptive Gauss-Kronrod (7/15) with a global error budget, a change of
//! variables for integrable power singularities at the left endpoint, and
//! pairwise summation for order-stable accumulation.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTol {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for QuadTol {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadTol {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadValue {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive Gauss-Kronrod integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: QuadTol) -> Result<QuadValue> {
    if a == b {
        return Ok(QuadValue {
            value: 0.0,
            error: 0.0,
        });
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, err: e });
    let mut total = v;
    let mut total_err = e;
    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureFailure {
                tol: tol.abs.max(tol.rel * total.abs()),
                estimate: total_err,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in floating point
            heap.push(worst);
            return Err(Error::QuadratureFailure {
                tol: tol.abs.max(tol.rel * total.abs()),
                estimate: total_err,
            });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        if !total.is_finite() {
            return Err(Error::QuadratureFailure {
                tol: tol.abs,
                estimate: f64::INFINITY,
            });
        }
    }
    // re-sum from the segments to shed accumulated update rounding
    let segs = heap.into_vec();
    let value = pairwise_sum(&segs.iter().map(|s| s.value).collect::<Vec<_>>());
    let error = segs.iter().map(|s| s.err).sum();
    Ok(QuadValue { value, error })
}

/// Integral of `f` over `[a, inf)` through the map `x = a + u / (1 - u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: QuadTol) -> Result<QuadValue> {
    integrate(
        |u| {
            let one_minus = 1.0 - u;
            let x = a + u / one_minus;
            let jac = 1.0 / (one_minus * one_minus);
            let y = f(x);
            if y == 0.0 {
                0.0
            } else {
                y * jac
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Integral over `[0, a]` of `g(x) * x^{-alpha}` with `0 <= alpha < 1`, where
/// `g` is smooth. Uses `u = x^{1 - alpha}`, which turns the integrand into
/// `g(u^{1/(1-alpha)}) / (1 - alpha)`.
pub fn integrate_power_singular<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    alpha: f64,
    tol: QuadTol,
) -> Result<QuadValue> {
    debug_assert!((0.0..1.0).contains(&alpha));
    if a <= 0.0 {
        return Ok(QuadValue {
            value: 0.0,
            error: 0.0,
        });
    }
    let q = 1.0 - alpha;
    let upper = a.powf(q);
    integrate(|u| g(u.powf(1.0 / q)) / q, 0.0, upper, tol)
}

/// Pairwise (tree) summation. The result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, QuadTol::default()).unwrap();
        assert!((v.value - 0.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_tail() {
        let v = integrate_to_infinity(|x| (-x * x).exp(), 0.0, QuadTol::default()).unwrap();
        assert!((v.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_endpoint() {
        // int_0^4 s^{-1/2} ds = 4
        let v = integrate_power_singular(|_| 1.0, 4.0, 0.5, QuadTol::default()).unwrap();
        assert!((v.value - 4.0).abs() < 1e-12);
        let w = integrate_power_singular(|x| 1.0 - x, 1.0, 0.5, QuadTol::default()).unwrap();
        assert!((w.value - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_is_exact_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn failure_is_reported() {
        let tol = QuadTol {
            abs: 1e-300,
            rel: 0.0,
            max_intervals: 4,
        };
        let r = integrate(|x: f64| x.sin() * 1e3, 0.0, 100.0, tol);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
