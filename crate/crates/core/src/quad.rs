//! Quadrature: Gauss–Legendre rules and adaptive Gauss–Kronrod(7,15).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        w[0] = 2.0;
    }
    (x, w)
}

/// Composite Gauss–Legendre nodes/weights on [a, b] with `panels` equal panels.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x0, w0) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut x = Vec::with_capacity(panels * order);
    let mut w = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x0.iter().zip(&w0) {
            x.push(lo + 0.5 * h * (xi + 1.0));
            w.push(0.5 * h * wi);
        }
    }
    (x, w)
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = WGK[7] * fc;
    let mut rg = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive Gauss–Kronrod integrator with global error control.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_intervals: 20_000,
        }
    }
}

impl Adaptive {
    pub fn new(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    /// Integrate `f` over `[a, b]`, subdividing at the given interior break points first.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> Result<QuadResult> {
        if breaks.len() < 2 {
            return Err(Error::InvalidInput("need at least two break points".into()));
        }
        let mut heap = BinaryHeap::new();
        let (mut total, mut err) = (0.0, 0.0);
        for w in breaks.windows(2) {
            let (v, e) = gk15(&f, w[0], w[1]);
            total += v;
            err += e;
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value: v,
                error: e,
            });
        }
        let target = |total: f64| self.abs_tol.max(self.rel_tol * total.abs());
        while err > target(total) {
            if heap.len() >= self.max_intervals {
                return Err(Error::Quadrature {
                    value: total,
                    error: err,
                });
            }
            let s = heap.pop().expect("heap is nonempty");
            let m = 0.5 * (s.a + s.b);
            if m <= s.a || m >= s.b {
                // interval exhausted at machine resolution
                heap.push(Segment { error: 0.0, ..s });
                err = heap.iter().map(|s| s.error).sum();
                if err <= target(total) {
                    break;
                }
                continue;
            }
            let (v1, e1) = gk15(&f, s.a, m);
            let (v2, e2) = gk15(&f, m, s.b);
            total += v1 + v2 - s.value;
            err += e1 + e2 - s.error;
            heap.push(Segment {
                a: s.a,
                b: m,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                a: m,
                b: s.b,
                value: v2,
                error: e2,
            });
            // guard against drift in the running sums
            if heap.len() % 64 == 0 {
                total = heap.iter().map(|s| s.value).sum();
                err = heap.iter().map(|s| s.error).sum();
            }
        }
        total = heap.iter().map(|s| s.value).sum();
        err = heap.iter().map(|s| s.error).sum();
        Ok(QuadResult {
            value: total,
            error: err,
            intervals: heap.len(),
        })
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrate over `[a, ∞)` using x = a + s/(1-s).
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(&self, f: F, a: f64) -> Result<QuadResult> {
        let g = |s: f64| {
            if s >= 1.0 {
                return 0.0;
            }
            let d = 1.0 - s;
            let v = f(a + s / d) / (d * d);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        self.integrate(g, 0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 12, 33] {
            let (x, w) = gauss_legendre(n);
            for k in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} k={k} q={q}");
            }
        }
    }

    #[test]
    fn nodes_are_symmetric() {
        let (x, w) = gauss_legendre(20);
        for i in 0..20 {
            assert_eq!(x[i], -x[19 - i]);
            assert_eq!(w[i], w[19 - i]);
        }
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let r = Adaptive::new(1e-12)
            .integrate(|x| (1.0 - x * x).max(0.0).sqrt(), -1.0, 1.0)
            .unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn adaptive_semi_infinite_gaussian() {
        let r = Adaptive::new(1e-12)
            .integrate_to_infinity(|x| (-x * x).exp(), 0.0)
            .unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn failure_reports_estimate() {
        let q = Adaptive {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_intervals: 4,
        };
        match q.integrate(|x: f64| (400.0 * x).sin().powi(2), 0.0, 3.0) {
            Err(Error::Quadrature { error, .. }) => assert!(error > 0.0),
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
