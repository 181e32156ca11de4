//! Quartic potential V(z) = t z²/2 + g z⁴/4, its critical constants and equilibrium densities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::Adaptive;

/// Potential coefficients and weight scale N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub t: f64,
    pub g: f64,
    /// Weight scale N in e^{-N V}.
    pub size: usize,
}

impl ModelParams {
    pub fn new(t: f64, g: f64, size: usize) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("t must be finite, got {t}")));
        }
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidInput(format!("g must be positive, got {g}")));
        }
        if size == 0 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        Ok(Self { t, g, size })
    }

    /// N as a float.
    pub fn nf(&self) -> f64 {
        self.size as f64
    }

    /// n/N.
    pub fn ratio(&self, n: usize) -> f64 {
        n as f64 / self.nf()
    }

    pub fn with_size(&self, size: usize) -> Self {
        Self { size, ..*self }
    }

    pub fn potential(&self, z: f64) -> f64 {
        let z2 = z * z;
        0.5 * self.t * z2 + 0.25 * self.g * z2 * z2
    }

    pub fn potential_c(&self, z: Complex64) -> Complex64 {
        let z2 = z * z;
        0.5 * self.t * z2 + 0.25 * self.g * z2 * z2
    }

    pub fn potential_deriv(&self, z: f64) -> f64 {
        self.t * z + self.g * z * z * z
    }

    /// Minimum of V over the real line.
    pub fn potential_min(&self) -> f64 {
        if self.t < 0.0 {
            -self.t * self.t / (4.0 * self.g)
        } else {
            0.0
        }
    }

    pub fn t_c(&self) -> f64 {
        -2.0 * self.g.sqrt()
    }

    pub fn lambda_c(&self) -> f64 {
        self.t * self.t / (4.0 * self.g)
    }

    /// Upper bound on R_n: (-t + √(t² + 4g n/N)) / (2g).
    pub fn r_bound(&self, n: usize) -> f64 {
        let l = self.ratio(n);
        (-self.t + (self.t * self.t + 4.0 * self.g * l).sqrt()) / (2.0 * self.g)
    }

    /// Double-scaling variable y = c₀⁻¹ N^{2/3} (n/N - λ_c).
    pub fn y_of(&self, n: usize) -> Result<f64> {
        let c = self.derive_constants()?;
        Ok(self.nf().powf(2.0 / 3.0) * (self.ratio(n) - c.lambda_c) / c.c0)
    }

    pub fn regime(&self) -> Regime {
        let tc = self.t_c();
        if (self.t - tc).abs() <= 1e-12 * self.t.abs().max(1.0) {
            Regime::Critical
        } else if self.t > tc {
            Regime::OneCut
        } else {
            Regime::TwoCut
        }
    }

    pub fn derive_constants(&self) -> Result<DerivedConstants> {
        DerivedConstants::new(self)
    }

    pub fn equilibrium(&self) -> EquilibriumDensity {
        EquilibriumDensity::new(self)
    }

    pub fn density(&self, x: f64) -> f64 {
        self.equilibrium().eval(x)
    }
}

/// Closed-form constants of the double-scaling analysis (t < 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub t_c: f64,
    pub lambda_c: f64,
    pub z0: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// C = (32 / (|t| g))^{1/6}
    pub big_c: f64,
    pub c9: f64,
}

impl DerivedConstants {
    pub fn new(p: &ModelParams) -> Result<Self> {
        let (t, g) = (p.t, p.g);
        if t >= 0.0 {
            return Err(Error::Domain(format!("critical constants need t < 0, got t = {t}")));
        }
        let at = -t;
        Ok(Self {
            t_c: p.t_c(),
            lambda_c: p.lambda_c(),
            z0: (2.0 * at / g).sqrt(),
            c0: (t * t / (2.0 * g)).cbrt(),
            c1: (2.0 * at / (g * g)).cbrt(),
            c2: 0.5 * (1.0 / (2.0 * at * g)).cbrt(),
            big_c: (32.0 / (at * g)).powf(1.0 / 6.0),
            c9: 2f64.powf(14.0 / 3.0) * g.powf(2.0 / 3.0) / at.powf(4.0 / 3.0),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    OneCut,
    Critical,
    TwoCut,
}

/// Equilibrium density in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumDensity {
    pub regime: Regime,
    /// Outer endpoint a.
    pub a: f64,
    /// Inner endpoint b (zero unless two-cut).
    pub b: f64,
    pub b0: f64,
    pub b2: f64,
}

impl EquilibriumDensity {
    pub fn new(p: &ModelParams) -> Self {
        let (t, g) = (p.t, p.g);
        match p.regime() {
            Regime::OneCut => {
                let a2 = (-2.0 * t + (4.0 * t * t + 48.0 * g).sqrt()) / (3.0 * g);
                Self {
                    regime: Regime::OneCut,
                    a: a2.sqrt(),
                    b: 0.0,
                    b0: (t + (t * t / 4.0 + 3.0 * g).sqrt()) / 3.0,
                    b2: g / 2.0,
                }
            }
            Regime::Critical => Self {
                regime: Regime::Critical,
                a: 2.0 / g.powf(0.25),
                b: 0.0,
                b0: 0.0,
                b2: g / 2.0,
            },
            Regime::TwoCut => {
                let sg = g.sqrt();
                Self {
                    regime: Regime::TwoCut,
                    a: ((2.0 * sg - t) / g).sqrt(),
                    b: ((-2.0 * sg - t) / g).sqrt(),
                    b0: g / 2.0,
                    b2: 0.0,
                }
            }
        }
    }

    /// Support endpoints in increasing order.
    pub fn endpoints(&self) -> Vec<f64> {
        match self.regime {
            Regime::TwoCut => vec![-self.a, -self.b, self.b, self.a],
            _ => vec![-self.a, self.a],
        }
    }

    /// Support intervals.
    pub fn support(&self) -> Vec<(f64, f64)> {
        let e = self.endpoints();
        e.chunks(2).map(|c| (c[0], c[1])).collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x2 = x * x;
        let a2 = self.a * self.a;
        if x2 >= a2 {
            return 0.0;
        }
        match self.regime {
            Regime::OneCut | Regime::Critical => (self.b0 + self.b2 * x2) * (a2 - x2).sqrt() / PI,
            Regime::TwoCut => {
                let b2 = self.b * self.b;
                if x2 <= b2 {
                    return 0.0;
                }
                self.b0 * x.abs() * ((a2 - x2) * (x2 - b2)).sqrt() / PI
            }
        }
    }
}

/// ∫ p(x) dx over the support by adaptive quadrature.
pub fn density_normalization(p: &ModelParams, quad_tol: f64) -> Result<f64> {
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "quad_tol must be positive, got {quad_tol}"
        )));
    }
    let eq = p.equilibrium();
    let q = Adaptive::new(quad_tol).with_abs(0.1 * quad_tol);
    let mut total = 0.0;
    for (lo, hi) in eq.support() {
        let mid = 0.5 * (lo + hi);
        let r = q.integrate_with_breaks(|x| eq.eval(x), &[lo, mid, hi])?;
        total += r.value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(t: f64) -> ModelParams {
        ModelParams::new(t, 1.0, 100).unwrap()
    }

    #[test]
    fn constants_at_t_minus_two() {
        let c = params(-2.0).derive_constants().unwrap();
        assert_eq!(c.t_c, -2.0);
        assert!((c.z0 - 2.0).abs() < 1e-15);
        assert!((c.lambda_c - 1.0).abs() < 1e-15);
        assert!((c.big_c - 2f64.powf(2.0 / 3.0)).abs() < 1e-14);
        assert!((c.c0 - 2f64.cbrt()).abs() < 1e-14);
        assert!((c.c1 - 4f64.cbrt()).abs() < 1e-14);
        assert!((c.c2 - 0.5 / 4f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn lambda_c_at_t_minus_one() {
        assert_eq!(params(-1.0).lambda_c(), 0.25);
    }

    #[test]
    fn constants_need_negative_t() {
        assert!(matches!(params(0.5).derive_constants(), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(-1.0, 0.0, 10).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 1).is_err());
    }

    #[test]
    fn density_reference_values() {
        assert_eq!(params(-2.0).density(0.0), 0.0);
        let p1 = params(-2.0).density(1.0);
        assert!((p1 - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-15);
        let eq = params(-3.0).equilibrium();
        assert_eq!(eq.regime, Regime::TwoCut);
        assert!((eq.a - 5f64.sqrt()).abs() < 1e-15);
        assert!((eq.b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn regime_dispatch() {
        assert_eq!(params(-1.0).regime(), Regime::OneCut);
        assert_eq!(params(-2.0).regime(), Regime::Critical);
        assert_eq!(params(-2.0 + 1e-13).regime(), Regime::Critical);
        assert_eq!(params(-3.0).regime(), Regime::TwoCut);
    }

    #[test]
    fn limits_across_critical_point() {
        let above = params(-2.0 + 1e-6).equilibrium();
        let below = params(-2.0 - 1e-6).equilibrium();
        assert!(above.b0.abs() < 1e-6);
        assert!(below.b < 1e-2);
        assert!((above.a - 2.0).abs() < 1e-6);
        assert!((below.a - 2.0).abs() < 1e-6);
    }

    #[test]
    fn normalization_all_regimes() {
        for t in [-1.0, -2.0, -3.0] {
            let m = density_normalization(&params(t), 1e-12).unwrap();
            assert!((m - 1.0).abs() < 1e-10, "t = {t}: {m}");
        }
    }

    proptest! {
        #[test]
        fn density_is_even_and_vanishes_at_endpoints(t in -5.0f64..-0.01, g in 0.2f64..3.0, x in -4.0f64..4.0) {
            let p = ModelParams::new(t, g, 10).unwrap();
            let eq = p.equilibrium();
            prop_assert_eq!(eq.eval(x), eq.eval(-x));
            prop_assert!(eq.eval(x) >= 0.0);
            for e in eq.endpoints() {
                prop_assert!(eq.eval(e).abs() < 1e-10);
            }
        }

        #[test]
        fn normalization_holds(t in -5.0f64..1.0, g in 0.2f64..3.0) {
            let p = ModelParams::new(t, g, 10).unwrap();
            let m = density_normalization(&p, 1e-11).unwrap();
            prop_assert!((m - 1.0).abs() < 1e-9);
        }

        #[test]
        fn constants_positive(t in -5.0f64..-0.01, g in 0.2f64..3.0) {
            let c = ModelParams::new(t, g, 10).unwrap().derive_constants().unwrap();
            for v in [c.z0, c.c0, c.c1, c.c2, c.big_c, c.c9] {
                prop_assert!(v > 0.0);
            }
        }
    }
}
