//! Explicit WKB, turning-point and critical-point approximants to (ψ_n, ψ_{n-1})
//! near λ_c, the asymptotics of h_n, the zeroth-order map ζ₀ and the period equation.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::freud::ansatz_r;
use crate::model::ModelParams;
use crate::orthopoly::PsiEvaluator;
use crate::painleve2::{airy_real, HMGrid};
use crate::psi_cp::{fit_slope, PhiSolution};
use crate::quad::{composite_gauss_legendre, Adaptive};
use crate::table::Table;

type Mat2 = [[f64; 2]; 2];

const QUAD_TOL: f64 = 1e-13;

fn quad() -> Adaptive {
    Adaptive::new(QUAD_TOL).with_abs(1e-15)
}

fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn apply(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Ansatz values of R_{n-1}, R_n, R_{n+1} and θ_n⁰ = t + gR_n⁰ + gR_{n+1}⁰.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzFrame {
    pub params: ModelParams,
    pub n: usize,
    pub y: f64,
    pub r_prev0: f64,
    pub r_n0: f64,
    pub r_next0: f64,
    pub theta_n0: f64,
    /// Hastings–McLeod u, v and w = u' at y.
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

pub fn build_frame(params: &ModelParams, n: usize, hm: &HMGrid) -> Result<AnsatzFrame> {
    if n == 0 {
        return Err(Error::InvalidInput("the frame needs n ≥ 1".into()));
    }
    let y = params.y_of(n)?;
    let h = hm.at(y)?;
    let r_prev0 = ansatz_r(params, n - 1, hm)?;
    let r_n0 = ansatz_r(params, n, hm)?;
    let r_next0 = ansatz_r(params, n + 1, hm)?;
    Ok(AnsatzFrame {
        params: *params,
        n,
        y,
        r_prev0,
        r_n0,
        r_next0,
        theta_n0: params.t + params.g * (r_n0 + r_next0),
        u: h.u,
        v: h.v,
        w: h.up,
    })
}

impl AnsatzFrame {
    fn eps(&self) -> f64 {
        if self.n.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Leading coefficient of θ_n⁰ ≈ N^{-2/3} c₅.
    pub fn c5(&self) -> f64 {
        let (t, g) = (self.params.t.abs(), self.params.g);
        (g * g / (2.0 * t)).cbrt() * (self.v + 2.0 * self.eps() * self.w)
    }

    /// N^{-4/3} coefficient of the constant term of U⁰.
    pub fn c3(&self) -> f64 {
        let (t, g) = (self.params.t.abs(), self.params.g);
        -(g * t).cbrt() / 2f64.powf(5.0 / 3.0) * (self.v * self.v - 4.0 * self.w * self.w)
    }

    /// N^{-5/3} coefficient of the constant term of U⁰.
    pub fn c4(&self) -> f64 {
        let (t, g) = (self.params.t.abs(), self.params.g);
        self.eps() * (g * g / t).cbrt() / 2f64.cbrt() * self.w
    }

    pub fn theta_prev0(&self) -> f64 {
        self.params.t + self.params.g * (self.r_prev0 + self.r_n0)
    }
}

/// Exponentially scaled pair: value = exp(log_scale) · v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPair {
    pub log_scale: f64,
    pub v: [f64; 2],
}

/// The potential U⁰ built on an ansatz frame, with its turning point z0N near z_0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbData {
    pub frame: AnsatzFrame,
    pub z0: f64,
    pub z0n: f64,
    pub mu3: f64,
    pub mu1: f64,
    pub mu_m1: f64,
    /// c₃N^{-4/3} + c₄N^{-5/3}
    pub constant: f64,
    /// Regularized ∫_{z0N}^∞ √U⁰.
    pub regularized: f64,
}

impl WkbData {
    pub fn new(frame: AnsatzFrame) -> Result<Self> {
        let p = frame.params;
        let c = p.derive_constants()?;
        let nf = p.nf();
        let lam = p.ratio(frame.n);
        let mut w = WkbData {
            frame,
            z0: c.z0,
            z0n: c.z0,
            mu3: p.g / 2.0,
            mu1: p.t / 2.0,
            mu_m1: -lam - 0.5 / nf,
            constant: frame.c3() * nf.powf(-4.0 / 3.0) + frame.c4() * nf.powf(-5.0 / 3.0),
            regularized: 0.0,
        };
        if frame.r_n0 <= 0.0 {
            return Err(Error::Domain(format!("R_n⁰ = {} is not positive", frame.r_n0)));
        }
        w.z0n = w.find_root()?;
        if w.a12(w.z0n) <= 0.0 {
            return Err(Error::Domain("a₁₂⁰ vanishes near the turning point".into()));
        }
        w.regularized = w.compute_regularized()?;
        Ok(w)
    }

    pub fn build(params: &ModelParams, n: usize, hm: &HMGrid) -> Result<Self> {
        Self::new(build_frame(params, n, hm)?)
    }

    fn nf(&self) -> f64 {
        self.frame.params.nf()
    }

    fn shift(&self) -> f64 {
        let p = &self.frame.params;
        p.ratio(self.frame.n) - p.lambda_c()
    }

    fn find_root(&self) -> Result<f64> {
        let mut z = self.z0;
        for _ in 0..60 {
            let f = self.u0(z);
            let d = self.du0(z);
            if d <= 0.0 {
                return Err(Error::Domain("U⁰ is not increasing at its outer root".into()));
            }
            let step = f / d;
            z -= step;
            if step.abs() <= 1e-15 * z.abs() {
                return Ok(z);
            }
        }
        Err(Error::Convergence {
            what: "turning point Newton iteration".into(),
            iterations: 60,
            residual: self.u0(z).abs(),
        })
    }

    pub fn a11(&self, z: f64) -> f64 {
        let p = &self.frame.params;
        -z * (0.5 * p.t + 0.5 * p.g * z * z + p.g * self.frame.r_n0)
    }

    pub fn a12(&self, z: f64) -> f64 {
        let p = &self.frame.params;
        self.frame.r_n0.sqrt() * (p.g * z * z + self.frame.theta_n0)
    }

    pub fn a21(&self, z: f64) -> f64 {
        let p = &self.frame.params;
        -self.frame.r_n0.sqrt() * (p.g * z * z + self.frame.theta_prev0())
    }

    /// U¹ + gz²/2, written without cancellation.
    fn u1_shifted<T>(&self, z: T) -> T
    where
        T: Copy
            + std::ops::Mul<f64, Output = T>
            + std::ops::Add<f64, Output = T>
            + std::ops::Mul<T, Output = T>
            + std::ops::Div<T, Output = T>,
    {
        let p = &self.frame.params;
        let g = p.g;
        let f = &self.frame;
        let z2 = z * z;
        z2 * (g * g * (f.r_n0 - f.r_next0)) / (z2 * g + f.theta_n0) + (-0.5 * p.t - g * f.r_n0)
    }

    /// U¹ = a₁₁⁰' - a₁₁⁰ a₁₂⁰'/a₁₂⁰.
    pub fn u1(&self, z: f64) -> f64 {
        self.u1_shifted(z) - 0.5 * self.frame.params.g * z * z
    }

    fn u1_c(&self, z: Complex64) -> Complex64 {
        self.u1_shifted(z) - 0.5 * self.frame.params.g * z * z
    }

    fn du1(&self, z: f64) -> f64 {
        let f = &self.frame;
        let g = f.params.g;
        let q = g * z * z + f.theta_n0;
        -g * z + 2.0 * g * g * (f.r_n0 - f.r_next0) * z * f.theta_n0 / (q * q)
    }

    /// Limit potential -d(z) = (g²z⁴/4)(z² - z_0²) - g(n/N - λ_c)z².
    pub fn limit_potential(&self, z: f64) -> f64 {
        let g = self.frame.params.g;
        let z2 = z * z;
        0.25 * g * g * z2 * z2 * (z2 - self.z0 * self.z0) - g * self.shift() * z2
    }

    /// U⁰(z) for real z.
    pub fn u0(&self, z: f64) -> f64 {
        self.limit_potential(z) + self.constant + self.u1(z) / self.nf()
    }

    pub fn u0_c(&self, z: Complex64) -> Complex64 {
        let g = self.frame.params.g;
        let z2 = z * z;
        0.25 * g * g * z2 * z2 * (z2 - self.z0 * self.z0) - g * self.shift() * z2
            + self.constant
            + self.u1_c(z) / self.nf()
    }

    pub fn du0(&self, z: f64) -> f64 {
        let g = self.frame.params.g;
        let z2 = z * z;
        0.25 * g * g * z * z2 * (6.0 * z2 - 4.0 * self.z0 * self.z0) - 2.0 * g * self.shift() * z
            + self.du1(z) / self.nf()
    }

    /// Constant term -R_n⁰θ_n⁰θ_{n-1}⁰ of a₁₁⁰² + a₁₂⁰a₂₁⁰.
    pub fn det_constant(&self) -> f64 {
        let f = &self.frame;
        -f.r_n0 * f.theta_n0 * f.theta_prev0()
    }

    /// μ^c(z) = √U⁰(z) for real z ≥ z0N.
    pub fn mu_c(&self, z: f64) -> f64 {
        self.u0(z).max(0.0).sqrt()
    }

    /// μ₁(z) = √(-U⁰(z)) for real z ≤ z0N.
    pub fn mu_1(&self, z: f64) -> f64 {
        (-self.u0(z)).max(0.0).sqrt()
    }

    /// ξ^c(z) = ∫_{z0N}^z μ^c for real z ≥ z0N.
    pub fn xi_c(&self, z: f64) -> Result<f64> {
        if z < self.z0n {
            return Err(Error::Domain(format!("ξ^c needs z ≥ z0N = {}, got {z}", self.z0n)));
        }
        let s = (z - self.z0n).sqrt();
        if s == 0.0 {
            return Ok(0.0);
        }
        let f = |r: f64| 2.0 * r * self.mu_c(self.z0n + r * r);
        Ok(quad().integrate(f, 0.0, s)?.value)
    }

    /// ξ₁(z) = ∫_{z0N}^z μ₁ for real z ≤ z0N (negative inside).
    pub fn xi_1(&self, z: f64) -> Result<f64> {
        if z > self.z0n {
            return Err(Error::Domain(format!("ξ₁ needs z ≤ z0N = {}, got {z}", self.z0n)));
        }
        let s = (self.z0n - z).sqrt();
        if s == 0.0 {
            return Ok(0.0);
        }
        let f = |r: f64| 2.0 * r * self.mu_1(self.z0n - r * r);
        Ok(-quad().integrate(f, 0.0, s)?.value)
    }

    /// ξ^c along z0N → z_0 + d₁ → z, counterclockwise around the band for points below the axis.
    pub fn xi_c_complex(&self, z: Complex64, d1: f64) -> Result<Complex64> {
        let anchor = self.z0 + d1;
        if z.im == 0.0 && z.re >= self.z0n {
            return Ok(Complex64::new(self.xi_c(z.re)?, 0.0));
        }
        let base = self.xi_c(anchor)?;
        let mut path: Vec<(Complex64, Complex64)> = Vec::new();
        if z.im > 0.0 {
            path.push((Complex64::new(anchor, 0.0), z));
        } else if z.norm() >= anchor {
            // arc of radius `anchor` from angle 0 to arg z ∈ (π, 2π], then radially out
            let mut phi = z.im.atan2(z.re);
            if phi <= 0.0 {
                phi += 2.0 * PI;
            }
            let pieces = 16;
            for k in 0..pieces {
                let a = phi * k as f64 / pieces as f64;
                let b = phi * (k + 1) as f64 / pieces as f64;
                path.push((Complex64::from_polar(anchor, a), Complex64::from_polar(anchor, b)));
            }
            path.push((Complex64::from_polar(anchor, phi), z));
        } else {
            return Err(Error::Domain(format!("no detour to {z} below the band")));
        }
        let (nodes, weights) = composite_gauss_legendre(0.0, 1.0, 8, 20);
        let mut mu_prev = Complex64::new(self.mu_c(anchor), 0.0);
        let mut total = Complex64::new(base, 0.0);
        for (a, b) in path {
            let dz = b - a;
            for (s, w) in nodes.iter().zip(&weights) {
                let x = a + dz * *s;
                let mut mu = self.u0_c(x).sqrt();
                if (mu - mu_prev).norm() > (mu + mu_prev).norm() {
                    mu = -mu;
                }
                if (mu - mu_prev).norm() > 0.5 * (mu.norm() + mu_prev.norm()).max(1e-300) {
                    return Err(Error::Domain(format!("branch tracking lost near {x}")));
                }
                mu_prev = mu;
                total += mu * dz * *w;
            }
        }
        Ok(total)
    }

    /// Polynomial-log part μ₃z⁴/4 + μ₁z²/2 + μ₋₁ ln z of the antiderivative at infinity.
    pub fn singular_part(&self, z: f64) -> f64 {
        0.25 * self.mu3 * z.powi(4) + 0.5 * self.mu1 * z * z + self.mu_m1 * z.ln()
    }

    /// μ^c(z) - μ₃z³ - μ₁z - μ₋₁/z for large real z, evaluated stably.
    pub fn mu_remainder(&self, z: f64) -> f64 {
        let p = &self.frame.params;
        let g = p.g;
        let z2 = z * z;
        let z3 = z2 * z;
        let nf = self.nf();
        // U⁰ = (g²z⁶/4)(1 + ρ)
        let low = -g * self.shift() * z2 + self.constant + self.u1(z) / nf;
        let rho = 2.0 * p.t / (g * z2) + 4.0 * low / (g * g * z3 * z3);
        let s = (1.0 + rho).sqrt();
        let head = -0.25 * g * z3 * rho * rho / ((1.0 + s) * (1.0 + s));
        let tail = (g * p.lambda_c() * z2 + self.constant + self.u1_shifted(z) / nf) / (g * z3);
        head + tail
    }

    fn compute_regularized(&self) -> Result<f64> {
        let z1 = 2.0 * self.z0n + 1.0;
        let inner = self.xi_c(z1)?;
        let tail = quad().integrate_to_infinity(|z| self.mu_remainder(z), z1)?.value;
        Ok(inner - self.singular_part(z1) + tail)
    }

    /// T^c(z) for real z > z0N.
    pub fn t_c(&self, z: f64) -> Mat2 {
        gauge(self.a11(z), self.a12(z), self.mu_c(z))
    }

    /// T₁(z) for real z < z0N.
    pub fn t_1(&self, z: f64) -> Mat2 {
        gauge(self.a11(z), self.a12(z), self.mu_1(z))
    }

    /// Turning-point map w(z) = ((3/2)∫_{z0N}^z √U⁰)^{2/3}, continued through z0N.
    pub fn tp(&self, z: f64) -> Result<f64> {
        if z >= self.z0n {
            Ok((1.5 * self.xi_c(z)?).powf(2.0 / 3.0))
        } else {
            Ok(-(-1.5 * self.xi_1(z)?).powf(2.0 / 3.0))
        }
    }

    pub fn tp_deriv(&self, z: f64) -> Result<f64> {
        let scale = 1e-7 * self.z0n;
        if (z - self.z0n).abs() < scale {
            return Ok(self.du0(self.z0n).cbrt());
        }
        let w = self.tp(z)?;
        if z > self.z0n {
            Ok(self.mu_c(z) / w.sqrt())
        } else {
            Ok(self.mu_1(z) / (-w).sqrt())
        }
    }

    /// W(z) = (a₁₂/w')^{1/2} [[1, 0], [-a₁₁/a₁₂, w'/a₁₂]].
    pub fn w_mat(&self, z: f64) -> Result<Mat2> {
        Ok(gauge(self.a11(z), self.a12(z), self.tp_deriv(z)?))
    }

    /// Exterior approximant (2√π)^{-1} (R_n⁰)^{-1/4} T^c (e^{-Nξ^c}, -e^{-Nξ^c}).
    pub fn psi_wkb_exterior(&self, z: f64) -> Result<ScaledPair> {
        if z <= self.z0n {
            return Err(Error::Domain(format!(
                "exterior approximant needs z > z0N = {}",
                self.z0n
            )));
        }
        let xi = self.xi_c(z)?;
        let log_scale = -self.nf() * xi - (2.0 * PI.sqrt()).ln() - 0.25 * self.frame.r_n0.ln();
        Ok(ScaledPair {
            log_scale,
            v: apply(&self.t_c(z), [1.0, -1.0]),
        })
    }

    /// Bulk approximant π^{-1/2} (R_n⁰)^{-1/4} T₁ (cos(Nξ₁ + π/4), -sin(Nξ₁ + π/4)).
    pub fn psi_wkb_bulk(&self, z: f64) -> Result<[f64; 2]> {
        if !(z > 0.0 && z < self.z0n) {
            return Err(Error::Domain(format!(
                "bulk approximant needs 0 < z < z0N = {}",
                self.z0n
            )));
        }
        let ph = self.nf() * self.xi_1(z)? + FRAC_PI_4;
        let amp = self.frame.r_n0.powf(-0.25) / PI.sqrt();
        let v = apply(&self.t_1(z), [ph.cos(), -ph.sin()]);
        Ok([amp * v[0], amp * v[1]])
    }

    /// Turning-point approximant (R_n⁰)^{-1/4} W (N^{1/6} Ai(N^{2/3}w), N^{-1/6} Ai'(N^{2/3}w)).
    pub fn psi_airy_tp(&self, z: f64) -> Result<[f64; 2]> {
        let nf = self.nf();
        let (a, d) = airy_real(nf.powf(2.0 / 3.0) * self.tp(z)?);
        let v = apply(&self.w_mat(z)?, [nf.powf(1.0 / 6.0) * a, nf.powf(-1.0 / 6.0) * d]);
        let amp = self.frame.r_n0.powf(-0.25);
        Ok([amp * v[0], amp * v[1]])
    }

    /// Critical-point approximant π^{-1/2} (R_n⁰)^{-1/4} Φ(N^{1/3} ζ₀(z)) with unit gauge.
    pub fn psi_critical(&self, zeta: &ZetaMaps, phi: &PhiSolution, z: f64) -> Result<[f64; 2]> {
        let s = self.nf().cbrt() * zeta.zeta_0(z)?;
        let v = phi.eval(s)?;
        let amp = self.frame.r_n0.powf(-0.25) / PI.sqrt();
        Ok([amp * v[0], amp * v[1]])
    }

    /// 2N ∫_{z0N}^∞ μ^c, regularized at infinity.
    pub fn hn_asymptotic(&self) -> f64 {
        2.0 * self.nf() * self.regularized
    }

    /// hn_asymptotic plus the normalization constant ln 2π of the weight e^{-NV}.
    pub fn hn_asymptotic_normalized(&self) -> f64 {
        self.hn_asymptotic() + (2.0 * PI).ln()
    }
}

fn gauge(a11: f64, a12: f64, mu: f64) -> Mat2 {
    let pre = (a12 / mu).sqrt();
    [[pre, 0.0], [-pre * a11 / a12, pre * mu / a12]]
}

pub fn det_gauge(m: &Mat2) -> f64 {
    det(m)
}

/// The zeroth-order change of variable ζ₀ = ζ_∞ + N^{-2/3} y ζ₁ and its ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaMaps {
    pub params: ModelParams,
    pub y: f64,
    pub z0: f64,
    pub c0: f64,
    pub big_c: f64,
    /// Period-equation shift α(y); not used by ζ₀.
    pub alpha: f64,
}

const SERIES_TERMS: usize = 400;

/// S(x) - 1 with D_∞ = (g z_0/6) z³ S(z²/z_0²).
fn series_s_m1(x: Complex64) -> Complex64 {
    // 3 Σ_{k≥1} binom(1/2, k) (-x)^k / (2k+3)
    let mut b = 0.5;
    let mut xp = -x;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..SERIES_TERMS {
        let term = xp * (3.0 * b / (2 * k + 3) as f64);
        sum += term;
        if k > 4 && term.norm() < 1e-18 * sum.norm() {
            break;
        }
        b *= (0.5 - k as f64) / (k + 1) as f64;
        xp *= -x;
    }
    sum
}

fn series_s(x: Complex64) -> Complex64 {
    1.0 + series_s_m1(x)
}

/// A(x) - 1 with A(x) = arcsin(√x)/√x.
fn series_a_m1(x: Complex64) -> Complex64 {
    let mut c = 0.5;
    let mut xp = x;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..SERIES_TERMS {
        let term = xp * (c / (2 * k + 1) as f64);
        sum += term;
        if k > 4 && term.norm() < 1e-18 * sum.norm() {
            break;
        }
        c *= (2 * k + 1) as f64 / (2 * k + 2) as f64;
        xp *= x;
    }
    sum
}

#[cfg(test)]
fn series_a(x: Complex64) -> Complex64 {
    1.0 + series_a_m1(x)
}

pub fn zeta_maps(params: &ModelParams, y: f64) -> Result<ZetaMaps> {
    let c = params.derive_constants()?;
    Ok(ZetaMaps {
        params: *params,
        y,
        z0: c.z0,
        c0: c.c0,
        big_c: c.big_c,
        alpha: period_alpha(params, y)?,
    })
}

impl ZetaMaps {
    fn ratio(&self, z: Complex64) -> Result<Complex64> {
        let x = z * z / (self.z0 * self.z0);
        if x.norm() > 0.81 {
            return Err(Error::Domain(format!("{z} lies outside the ζ-map rectangle")));
        }
        Ok(x)
    }

    /// D_∞(z) = ∫_0^z (gu²/2)√(z_0² - u²) du; closed form away from 0.
    pub fn d_inf_c(&self, z: Complex64) -> Result<Complex64> {
        let a = self.z0;
        let x = z * z / (a * a);
        if x.norm() <= 0.25 {
            return Ok(self.params.g * a / 6.0 * z * z * z * series_s(x));
        }
        if z.im == 0.0 && z.re.abs() > a {
            return Err(Error::Domain(format!("D_∞ is evaluated on [-z_0, z_0], got {z}")));
        }
        let root = (a * a - z * z).sqrt();
        let a4 = a.powi(4);
        Ok(0.5 * self.params.g * (z / 8.0 * (2.0 * z * z - a * a) * root + a4 / 8.0 * (z / a).asin()))
    }

    /// D₁(z) = c_0 arcsin(z/z_0).
    pub fn d_1_c(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 && z.re.abs() > self.z0 {
            return Err(Error::Domain(format!("D₁ is evaluated on [-z_0, z_0], got {z}")));
        }
        Ok(self.c0 * (z / self.z0).asin())
    }

    pub fn zeta_inf_c(&self, z: Complex64) -> Result<Complex64> {
        let x = self.ratio(z)?;
        Ok(z * series_s(x).powf(1.0 / 3.0) / self.big_c)
    }

    pub fn zeta_1_c(&self, z: Complex64) -> Result<Complex64> {
        let x = self.ratio(z)?;
        if x.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let sm1 = series_s_m1(x);
        let s3 = (1.0 + sm1).powf(1.0 / 3.0);
        // (A - S^{1/3})/x, both pieces expanded from their x¹ terms
        let cube_m1 = sm1 / (s3 * s3 + s3 + 1.0);
        let q = (series_a_m1(x) - cube_m1) / x;
        Ok(self.big_c * z * q / (4.0 * self.z0 * self.z0 * s3 * s3))
    }

    pub fn zeta_0_c(&self, z: Complex64) -> Result<Complex64> {
        let nf = self.params.nf();
        Ok(self.zeta_inf_c(z)? + nf.powf(-2.0 / 3.0) * self.y * self.zeta_1_c(z)?)
    }

    pub fn d_inf(&self, z: f64) -> Result<f64> {
        if z.abs() == self.z0 {
            return Ok(z.signum() * self.d_inf_full());
        }
        Ok(self.d_inf_c(z.into())?.re)
    }

    pub fn d_1(&self, z: f64) -> Result<f64> {
        Ok(self.d_1_c(z.into())?.re)
    }

    pub fn zeta_inf(&self, z: f64) -> Result<f64> {
        Ok(self.zeta_inf_c(z.into())?.re)
    }

    pub fn zeta_1(&self, z: f64) -> Result<f64> {
        Ok(self.zeta_1_c(z.into())?.re)
    }

    pub fn zeta_0(&self, z: f64) -> Result<f64> {
        Ok(self.zeta_0_c(z.into())?.re)
    }

    /// ζ₀'(0) = C^{-1} + N^{-2/3} y C/(15 z_0²).
    pub fn zeta0_prime0(&self) -> f64 {
        let nf = self.params.nf();
        1.0 / self.big_c + nf.powf(-2.0 / 3.0) * self.y * self.big_c / (15.0 * self.z0 * self.z0)
    }

    /// D_∞ over the full half-band, πg z_0⁴/32.
    pub fn d_inf_full(&self) -> f64 {
        PI * self.params.g * self.z0.powi(4) / 32.0
    }
}

/// Zero ŝ² near 1 of 1 - x₁ - σ - x₂σ².
fn period_root_sq(x1: f64, x2: f64) -> Result<f64> {
    let disc = 1.0 + 4.0 * x2 * (1.0 - x1);
    if disc <= 0.0 || x1 >= 1.0 {
        return Err(Error::Domain(format!("period chart left at x₁ = {x1}, x₂ = {x2}")));
    }
    Ok(2.0 * (1.0 - x1) / (1.0 + disc.sqrt()))
}

/// I(x₁, x₂) = ∫_0^ŝ √(-s⁴ + (1-x₁)s² - x₂s⁶) ds by real quadrature.
pub fn period_integral(x1: f64, x2: f64) -> Result<f64> {
    let sh = period_root_sq(x1, x2)?;
    // σ = s², then σ = ŝ² - r² removes the endpoint root
    let q = |sig: f64| (1.0 - x1 - sig - x2 * sig * sig).max(0.0).sqrt();
    let r = sh.sqrt();
    let f = |rho: f64| rho * q(sh - rho * rho);
    Ok(quad().integrate(f, 0.0, r)?.value)
}

/// I(x₁, x₂) as half the loop integral from 0 around ŝ back to 0 on the circle |s - 1| = 1.
pub fn period_integral_contour(x1: f64, x2: f64, panels: usize) -> Result<f64> {
    period_root_sq(x1, x2)?;
    let (nodes, weights) = composite_gauss_legendre(-PI, PI, panels, 20);
    let mut prev = Complex64::new((1.0 - x1).sqrt(), 0.0);
    let mut total = Complex64::new(0.0, 0.0);
    for (phi, w) in nodes.iter().zip(&weights) {
        let e = Complex64::from_polar(1.0, *phi);
        let s = 1.0 + e;
        let ds = Complex64::new(0.0, 1.0) * e;
        let mut r = (1.0 - x1 - s * s - x2 * s * s * s * s).sqrt();
        if (r - prev).norm() > (r + prev).norm() {
            r = -r;
        }
        prev = r;
        total += s * r * ds * *w;
    }
    Ok(0.5 * total.re)
}

/// α(y) from I(α̂N^{-2/3}, c₉N^{-2/3}y/32) = I(0, 0), α = yα̂.
pub fn period_alpha(params: &ModelParams, y: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    let c = params.derive_constants()?;
    let eps = params.nf().powf(-2.0 / 3.0);
    let x2 = c.c9 * eps * y / 32.0;
    if x2.abs() > 0.1 {
        return Err(Error::Domain(format!("|x₂| = {} exceeds the local chart", x2.abs())));
    }
    let target = 1.0 / 3.0;
    let mut x1 = -8.0 / 15.0 * x2;
    for it in 0..50 {
        let f = period_integral(x1, x2)? - target;
        let h = 1e-6;
        let d = (period_integral(x1 + h, x2)? - period_integral(x1 - h, x2)?) / (2.0 * h);
        let step = f / d;
        x1 -= step;
        if step.abs() < 1e-15 {
            return Ok(y * x1 / eps);
        }
        if it == 49 {
            return Err(Error::Convergence {
                what: "period equation".into(),
                iterations: 50,
                residual: f.abs(),
            });
        }
    }
    unreachable!()
}

/// Comparison regions on the positive real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Exterior,
    Bulk,
    TurningPoint,
    Critical,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Exterior, Region::Bulk, Region::TurningPoint, Region::Critical];

    pub fn name(&self) -> &'static str {
        match self {
            Region::Exterior => "exterior",
            Region::Bulk => "bulk",
            Region::TurningPoint => "turning_point",
            Region::Critical => "critical",
        }
    }

    pub fn code(&self) -> f64 {
        match self {
            Region::Exterior => 0.0,
            Region::Bulk => 1.0,
            Region::TurningPoint => 2.0,
            Region::Critical => 3.0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "exterior" => Region::Exterior,
            "bulk" => Region::Bulk,
            "turning_point" | "tp" => Region::TurningPoint,
            "critical" => Region::Critical,
            _ => return Err(Error::InvalidInput(format!("unknown region {s}"))),
        })
    }
}

/// Region widths d₁ = z_0/4, d₂ = z_0/20 and the grid sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub d1_frac: f64,
    pub d2_frac: f64,
    pub points: usize,
    pub oracle_tol: f64,
    /// Critical window |z| ≤ s·C·N^{-1/3}, where the unit gauge is I + O(N^{-1/3}).
    pub critical_window: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            d1_frac: 0.25,
            d2_frac: 0.05,
            points: 41,
            oracle_tol: 1e-13,
            critical_window: 0.5,
        }
    }
}

impl CompareOptions {
    /// Sample points of a region for the model behind `wkb`.
    pub fn grid(&self, region: Region, wkb: &WkbData) -> Result<Vec<f64>> {
        let z0 = wkb.z0;
        let d1 = self.d1_frac * z0;
        let (a, b) = match region {
            Region::Exterior => (z0 + d1, z0 + 1.0),
            Region::Bulk => (d1, z0 - d1),
            Region::TurningPoint => (z0 - d1, z0 + d1),
            Region::Critical => {
                let p = &wkb.frame.params;
                let c = p.derive_constants()?;
                let h = (self.critical_window * c.big_c * p.nf().powf(-1.0 / 3.0)).min(d1);
                (-h, h)
            }
        };
        let m = self.points.max(2);
        Ok((0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect())
    }
}

/// Error of one approximant at one degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub size: usize,
    pub n: usize,
    pub region: Region,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    /// Fitted exponent p of sup_error ~ N^{-p} per region.
    pub rates: Vec<(Region, f64)>,
}

impl CompareReport {
    /// Collect rows and fit the rate of each region over the sizes present.
    pub fn from_rows(rows: Vec<CompareRow>, regions: &[Region]) -> Self {
        let rates = regions
            .iter()
            .map(|&region| {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.region == region)
                    .map(|r| ((r.size as f64).ln(), r.sup_error.ln()))
                    .collect();
                let rate = if pts.len() >= 2 { -fit_slope(&pts) } else { f64::NAN };
                (region, rate)
            })
            .collect();
        Self { rows, rates }
    }

    pub fn rate(&self, region: Region) -> Option<f64> {
        self.rates.iter().find(|r| r.0 == region).map(|r| r.1)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["N", "n", "region", "sup_error", "fitted_rate"]);
        t.comment("region codes: 0 exterior, 1 bulk, 2 turning_point, 3 critical");
        for r in &self.rows {
            let rate = self.rate(r.region).unwrap_or(f64::NAN);
            t.push(vec![r.size as f64, r.n as f64, r.region.code(), r.sup_error, rate]);
        }
        t
    }
}

fn vec_norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Sup error of the approximant for `region` against the exact (ψ_n, ψ_{n-1}).
///
/// Exterior and turning-point errors are pointwise relative; bulk and critical
/// errors are normalized by the largest exact value on the grid.
pub fn region_error(wkb: &WkbData, eval: &PsiEvaluator, region: Region, grid: &[f64], hm: &HMGrid) -> Result<f64> {
    let n = wkb.frame.n;
    let exact = |z: f64| -> Result<ScaledPair> {
        let p = eval.pair(n, z.into())?;
        Ok(ScaledPair {
            log_scale: p.log_scale,
            v: [p.psi_n.re, p.psi_prev.re],
        })
    };
    match region {
        Region::Exterior => {
            let mut err = 0.0f64;
            for &z in grid {
                let e = exact(z)?;
                let a = wkb.psi_wkb_exterior(z)?;
                let k = (a.log_scale - e.log_scale).exp();
                let d = [e.v[0] - k * a.v[0], e.v[1] - k * a.v[1]];
                err = err.max(vec_norm(d) / vec_norm(e.v));
            }
            Ok(err)
        }
        Region::TurningPoint => {
            let mut err = 0.0f64;
            for &z in grid {
                let e = exact(z)?;
                let a = wkb.psi_airy_tp(z)?;
                let k = (-e.log_scale).exp();
                let d = [e.v[0] - k * a[0], e.v[1] - k * a[1]];
                err = err.max(vec_norm(d) / vec_norm(e.v));
            }
            Ok(err)
        }
        Region::Bulk | Region::Critical => {
            let (phi, zeta) = if region == Region::Critical {
                let y = wkb.frame.y;
                let phi = crate::psi_cp::solve_phi(hm, y, (n % 4) as u8, Default::default())?;
                (Some(phi), Some(zeta_maps(&wkb.frame.params, y)?))
            } else {
                (None, None)
            };
            let mut err = 0.0f64;
            let mut scale = 0.0f64;
            for &z in grid {
                let e = exact(z)?;
                let k = e.log_scale.exp();
                let ev = [k * e.v[0], k * e.v[1]];
                let a = match (&phi, &zeta) {
                    (Some(phi), Some(zeta)) => wkb.psi_critical(zeta, phi, z)?,
                    _ => wkb.psi_wkb_bulk(z)?,
                };
                err = err.max((ev[0] - a[0]).abs().max((ev[1] - a[1]).abs()));
                scale = scale.max(ev[0].abs().max(ev[1].abs()));
            }
            Ok(err / scale)
        }
    }
}

/// Error table over sizes N with n = round(λ_c N) + k, and fitted rates per region.
pub fn compare_harness(
    base: &ModelParams,
    sizes: &[usize],
    k: i64,
    regions: &[Region],
    opts: &CompareOptions,
    hm: &HMGrid,
) -> Result<CompareReport> {
    let mut rows = Vec::new();
    for &size in sizes {
        let p = base.with_size(size);
        let n = ((p.lambda_c() * size as f64).round() as i64 + k).max(1) as usize;
        let eval = crate::orthopoly::oracle(&p, n + 2, opts.oracle_tol)?;
        let wkb = WkbData::build(&p, n, hm)?;
        for &region in regions {
            let grid = opts.grid(region, &wkb)?;
            let sup_error = region_error(&wkb, &eval, region, &grid, hm)?;
            rows.push(CompareRow {
                size,
                n,
                region,
                sup_error,
            });
        }
    }
    Ok(CompareReport::from_rows(rows, regions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::oracle;
    use crate::painleve2::default_grid;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn params(size: usize) -> ModelParams {
        ModelParams::new(-1.0, 1.0, size).unwrap()
    }

    fn wkb(size: usize) -> WkbData {
        let p = params(size);
        let n = (p.lambda_c() * size as f64).round() as usize;
        WkbData::build(&p, n, default_grid()).unwrap()
    }

    struct Case {
        wkb: WkbData,
        eval: PsiEvaluator,
    }

    fn cases() -> &'static Vec<Case> {
        static C: OnceLock<Vec<Case>> = OnceLock::new();
        C.get_or_init(|| {
            [100, 200, 400, 800]
                .iter()
                .map(|&size| {
                    let w = wkb(size);
                    let eval = oracle(&w.frame.params, w.frame.n + 2, 1e-13).unwrap();
                    Case { wkb: w, eval }
                })
                .collect()
        })
    }

    fn errors(region: Region) -> Vec<f64> {
        let opts = CompareOptions::default();
        cases()
            .iter()
            .map(|c| {
                let grid = opts.grid(region, &c.wkb).unwrap();
                region_error(&c.wkb, &c.eval, region, &grid, default_grid()).unwrap()
            })
            .collect()
    }

    fn rate(errs: &[f64]) -> f64 {
        let pts: Vec<(f64, f64)> = [100.0f64, 200.0, 400.0, 800.0]
            .iter()
            .zip(errs)
            .map(|(n, e)| (n.ln(), e.ln()))
            .collect();
        -fit_slope(&pts)
    }

    #[test]
    fn frame_sign_flip_at_y_zero() {
        let hm = default_grid();
        for (size, n) in [(400usize, 100usize), (404, 101)] {
            let p = params(size);
            let f = build_frame(&p, n, hm).unwrap();
            assert_eq!(f.y, 0.0);
            let c = p.derive_constants().unwrap();
            let nf = size as f64;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            let u0 = hm.at(0.0).unwrap().u;
            let expect = 0.5 + sign * c.c1 * nf.powf(-1.0 / 3.0) * u0 + c.c2 * nf.powf(-2.0 / 3.0) * f.v;
            assert!((f.r_n0 - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn theta_approaches_c5() {
        let hm = default_grid();
        let dev: Vec<f64> = [200usize, 400, 800, 1600, 3200]
            .iter()
            .map(|&size| {
                let f = build_frame(&params(size), size / 4, hm).unwrap();
                (f.theta_n0 * (size as f64).powf(2.0 / 3.0) / f.c5() - 1.0).abs()
            })
            .collect();
        for w in dev.windows(2) {
            assert!(w[1] < w[0], "{dev:?}");
        }
        assert!(dev[4] < 0.12, "{dev:?}");
    }

    #[test]
    fn ansatz_positive_on_scan() {
        let hm = default_grid();
        for size in [100usize, 200, 400, 800] {
            let p = params(size);
            let c = p.derive_constants().unwrap();
            let nf = size as f64;
            let lo = ((c.lambda_c - 2.0 * c.c0 * nf.powf(-2.0 / 3.0)) * nf).ceil() as usize;
            let hi = ((c.lambda_c + 2.0 * c.c0 * nf.powf(-2.0 / 3.0)) * nf).floor() as usize;
            for n in lo..=hi {
                let f = build_frame(&p, n, hm).unwrap();
                assert!(f.r_prev0 > 0.0 && f.r_n0 > 0.0 && f.r_next0 > 0.0);
            }
        }
    }

    #[test]
    fn frame_rejects_out_of_range_y() {
        let p = params(100);
        assert!(build_frame(&p, 0, default_grid()).is_err());
        assert!(build_frame(&p, 90, default_grid()).is_err());
    }

    #[test]
    fn turning_point_near_z0() {
        let mut scaled = Vec::new();
        for size in [100, 200, 400, 800, 1600] {
            let w = wkb(size);
            assert!(w.u0(w.z0n).abs() < 1e-14);
            scaled.push((w.z0n - w.z0).abs() * (size as f64).powf(2.0 / 3.0));
        }
        assert!(scaled.iter().all(|&s| s < 0.2), "{scaled:?}");
    }

    #[test]
    fn constant_term_matches_exact_recurrence() {
        // c₃N^{-4/3} + c₄N^{-5/3} against -R_nθ_nθ_{n-1} from the exact R_n
        for c in cases() {
            let r = &c.eval.recurrence.r;
            let n = c.wkb.frame.n;
            let t = c.wkb.frame.params.t;
            let exact = -r[n] * (t + r[n] + r[n + 1]) * (t + r[n - 1] + r[n]);
            let nf = c.wkb.frame.params.nf();
            assert!((exact - c.wkb.constant).abs() * nf * nf < 0.5, "N = {nf}");
        }
    }

    #[test]
    fn potential_approaches_limit() {
        for size in [100, 400, 1600] {
            let w = wkb(size);
            for z in [0.3, 0.8, 1.2, 1.8, 2.5] {
                let d = (w.u0(z) - w.limit_potential(z)).abs() * size as f64;
                assert!(d < 2.0 * (1.0 + z * z), "N = {size}, z = {z}: {d}");
            }
        }
    }

    #[test]
    fn xi_c_basic_identities() {
        let w = wkb(200);
        assert_eq!(w.xi_c(w.z0n).unwrap(), 0.0);
        let z = w.z0 + 0.5;
        let h = 1e-4;
        let fd = (w.xi_c(z + h).unwrap() - w.xi_c(z - h).unwrap()) / (2.0 * h);
        // second-order stencil error ~ h² μ''/6
        assert!((fd / w.mu_c(z) - 1.0).abs() < 1e-8);
        let (a, b, c) = (w.z0n + 0.1, w.z0 + 0.7, w.z0 + 1.9);
        let direct = quad().integrate(|u| w.mu_c(u), a, c).unwrap().value;
        let by_parts =
            quad().integrate(|u| w.mu_c(u), a, b).unwrap().value + quad().integrate(|u| w.mu_c(u), b, c).unwrap().value;
        let from_xi = w.xi_c(c).unwrap() - w.xi_c(a).unwrap();
        assert!((direct - by_parts).abs() < 1e-10 * direct);
        assert!((direct - from_xi).abs() < 1e-10 * direct);
    }

    #[test]
    fn regularized_tail_converges() {
        let w = wkb(200);
        let diffs: Vec<f64> = [4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|&z| (w.xi_c(z).unwrap() - w.singular_part(z) - w.regularized).abs())
            .collect();
        // remainder ~ μ₋₃/(2z²)
        let scaled: Vec<f64> = diffs
            .iter()
            .zip([4.0f64, 8.0, 16.0, 32.0])
            .map(|(d, z)| d * z * z)
            .collect();
        for s in scaled.windows(2) {
            assert!((s[1] / s[0] - 1.0).abs() < 0.05, "{diffs:?}");
        }
        assert!(diffs[3] < 2e-4, "{diffs:?}");
    }

    #[test]
    fn complex_xi_extends_real_values() {
        let w = wkb(200);
        let d1 = 0.25 * w.z0;
        let z = Complex64::new(w.z0 + 0.6, 0.0);
        let above = w.xi_c_complex(Complex64::new(w.z0 + 0.6, 1e-9), d1).unwrap();
        assert!((above - w.xi_c(z.re).unwrap()).norm() < 1e-7);
        // derivative along the upper detour
        let p = Complex64::new(0.4, 0.3);
        let h = 1e-4;
        let fd = (w.xi_c_complex(p + h, d1).unwrap() - w.xi_c_complex(p - h, d1).unwrap()) / (2.0 * h);
        let mu = w.u0_c(p).sqrt();
        assert!((fd - mu).norm().min((fd + mu).norm()) < 1e-6 * mu.norm());
        // below the axis the counterclockwise route is taken
        let q = Complex64::new(0.2, -2.0);
        assert!(w.xi_c_complex(q, d1).is_ok());
        assert!(w.xi_c_complex(Complex64::new(0.2, -0.1), d1).is_err());
    }

    #[test]
    fn gauges_are_unimodular() {
        let w = wkb(400);
        for z in [w.z0 + 0.4, w.z0 + 1.0, w.z0 + 3.0] {
            assert!((det_gauge(&w.t_c(z)) - 1.0).abs() < 1e-10);
        }
        for z in [0.4, 0.8, 1.0] {
            assert!((det_gauge(&w.t_1(z)) - 1.0).abs() < 1e-10);
        }
        for z in [w.z0 - 0.3, w.z0n, w.z0 + 0.3] {
            assert!((det_gauge(&w.w_mat(z).unwrap()) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn tp_map_at_root() {
        let w = wkb(400);
        assert_eq!(w.tp(w.z0n).unwrap(), 0.0);
        let d0 = w.tp_deriv(w.z0n).unwrap();
        assert!((d0 - w.du0(w.z0n).cbrt()).abs() < 1e-14);
        let lead = (w.z0.powi(5) / 2.0).cbrt();
        assert!((d0 - lead).abs() < 400f64.powf(-1.0 / 3.0));
        let h = 1e-3;
        let fd = (w.tp(w.z0n + h).unwrap() - w.tp(w.z0n - h).unwrap()) / (2.0 * h);
        assert!((fd - d0).abs() < 1e-5);
        for z in [w.z0 - 0.3, w.z0 + 0.3] {
            let h = 1e-5;
            let fd = (w.tp(z + h).unwrap() - w.tp(z - h).unwrap()) / (2.0 * h);
            assert!((fd - w.tp_deriv(z).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn exterior_error_within_five_over_n() {
        for c in cases()
            .iter()
            .filter(|c| [100.0, 400.0].contains(&c.wkb.frame.params.nf()))
        {
            let z = c.wkb.z0 + 1.0;
            let e = region_error(&c.wkb, &c.eval, Region::Exterior, &[z], default_grid()).unwrap();
            assert!(e <= 5.0 / c.wkb.frame.params.nf(), "{e}");
        }
        let errs = errors(Region::Exterior);
        for w in errs.windows(2) {
            assert!(w[1] < w[0], "{errs:?}");
        }
        assert!(rate(&errs) >= 0.9, "{errs:?}");
    }

    #[test]
    fn bulk_error_is_order_one_over_n() {
        let errs = errors(Region::Bulk);
        let scaled: Vec<f64> = errs
            .iter()
            .zip([100.0, 200.0, 400.0, 800.0])
            .map(|(e, n)| e * n)
            .collect();
        assert!(scaled.iter().all(|&s| s < 3.0), "{scaled:?}");
        assert!(rate(&errs) >= 0.9, "{errs:?}");
    }

    #[test]
    fn bulk_zero_count_matches() {
        let c = &cases()[0];
        let grid: Vec<f64> = {
            let z0 = c.wkb.z0;
            let (a, b) = (0.25 * z0, 0.75 * z0);
            (0..=2000).map(|i| a + (b - a) * i as f64 / 2000.0).collect()
        };
        let count = |f: &dyn Fn(f64) -> f64| grid.windows(2).filter(|w| f(w[0]) * f(w[1]) < 0.0).count();
        let n = c.wkb.frame.n;
        let exact = count(&|z| c.eval.psi_real(n, z).unwrap());
        let approx = count(&|z| c.wkb.psi_wkb_bulk(z).unwrap()[0]);
        assert!(exact > 3);
        assert_eq!(exact, approx);
    }

    #[test]
    fn turning_point_error_and_seam() {
        let errs = errors(Region::TurningPoint);
        assert!(rate(&errs) >= 0.9, "{errs:?}");
        for c in cases() {
            let nf = c.wkb.frame.params.nf();
            let z0 = c.wkb.z0;
            let e = region_error(&c.wkb, &c.eval, Region::TurningPoint, &[z0], default_grid()).unwrap();
            assert!(e * nf < 1.0, "{e}");
            let seam = 0.75 * z0;
            let a = c.wkb.psi_airy_tp(seam).unwrap();
            let b = c.wkb.psi_wkb_bulk(seam).unwrap();
            let diff = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
            assert!(diff < 10.0 / nf, "N = {nf}: {diff}");
        }
    }

    #[test]
    fn critical_error_decays_at_cube_root_rate() {
        let errs = errors(Region::Critical);
        for w in errs.windows(2) {
            assert!(w[1] < w[0], "{errs:?}");
        }
        assert!(rate(&errs) >= 0.25, "{errs:?}");
    }

    #[test]
    fn hn_offset_bounded() {
        let hm = default_grid();
        let mut diffs = Vec::new();
        for size in [40usize, 80, 120, 160, 200] {
            let p = params(size);
            let n = size / 4;
            let w = WkbData::build(&p, n, hm).unwrap();
            let rec = crate::orthopoly::stieltjes_recurrence(&p, n + 2, 1e-13).unwrap();
            diffs.push(rec.log_h[n] - w.hn_asymptotic_normalized());
        }
        for (d, size) in diffs.iter().zip([40.0, 80.0, 120.0, 160.0, 200.0]) {
            assert!(d.abs() * size < 0.5, "{diffs:?}");
        }
        assert!(diffs[4].abs() < diffs[0].abs(), "{diffs:?}");
    }

    #[test]
    fn hn_difference_tracks_log_r() {
        let hm = default_grid();
        let p = params(400);
        let rec = crate::orthopoly::stieltjes_recurrence(&p, 103, 1e-13).unwrap();
        let a = WkbData::build(&p, 100, hm).unwrap().hn_asymptotic();
        let b = WkbData::build(&p, 101, hm).unwrap().hn_asymptotic();
        assert!((b - a - rec.r[101].ln()).abs() < 5.0 / 400.0);
    }

    #[test]
    fn hn_at_critical_coupling() {
        let p = ModelParams::new(-2.0, 1.0, 100).unwrap();
        let w = WkbData::build(&p, 100, default_grid()).unwrap();
        assert!(w.regularized.is_finite());
        let z = 30.0;
        let lead = 0.5 * z * z * (z * z - w.z0 * w.z0).sqrt();
        assert!((w.mu_c(z) / lead - 1.0).abs() < 1e-3);
    }

    fn maps(size: usize, y: f64) -> ZetaMaps {
        zeta_maps(&params(size), y).unwrap()
    }

    #[test]
    fn zeta_taylor_data() {
        let m = maps(400, 0.7);
        let h = 1e-6;
        let d_inf = (m.zeta_inf(h).unwrap() - m.zeta_inf(-h).unwrap()) / (2.0 * h);
        assert!((d_inf * m.big_c - 1.0).abs() < 1e-10);
        let d1 = (m.zeta_1(h).unwrap() - m.zeta_1(-h).unwrap()) / (2.0 * h);
        let expect = m.big_c / (15.0 * m.z0 * m.z0);
        assert!((d1 / expect - 1.0).abs() < 1e-9, "{d1} vs {expect}");
        let d0 = (m.zeta_0(h).unwrap() - m.zeta_0(-h).unwrap()) / (2.0 * h);
        assert!((d0 - m.zeta0_prime0()).abs() < 1e-10);
    }

    #[test]
    fn d_inf_full_band() {
        let p = ModelParams::new(-2.0, 1.0, 100).unwrap();
        let m = zeta_maps(&p, 0.0).unwrap();
        assert!((m.z0 - 2.0).abs() < 1e-15);
        assert!((m.d_inf(2.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((m.d_inf(2.0 - 1e-12).unwrap() - PI / 2.0).abs() < 1e-9);
        let num = quad()
            .integrate(|u| 0.5 * u * u * (4.0 - u * u).sqrt(), 0.0, 1.3)
            .unwrap()
            .value;
        assert!((m.d_inf(1.3).unwrap() - num).abs() < 1e-13);
    }

    #[test]
    fn series_and_closed_forms_agree() {
        let m = maps(200, -0.4);
        for z in [0.45, 0.6, 0.9, 1.2] {
            let x = Complex64::new(z * z / (m.z0 * m.z0), 0.0);
            let series = m.params.g * m.z0 / 6.0 * z * z * z * series_s(x).re;
            assert!((series - m.d_inf(z).unwrap()).abs() < 1e-13);
            let d1 = m.c0 / m.z0 * z * series_a(x).re;
            assert!((d1 - m.d_1(z).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn zeta_0_assembly_is_exact() {
        let m = maps(300, 1.3);
        let eps = 300f64.powf(-2.0 / 3.0);
        for z in [-0.9, -0.2, 0.0, 0.05, 0.6, 1.0] {
            let lhs = m.zeta_0(z).unwrap();
            let rhs = m.zeta_inf(z).unwrap() + eps * 1.3 * m.zeta_1(z).unwrap();
            assert_eq!(lhs, rhs);
        }
        assert!(m.zeta_0(1.3).is_err());
    }

    #[test]
    fn zeta_1_linear_near_origin() {
        let m = maps(300, 1.0);
        let slope = m.big_c / (15.0 * m.z0 * m.z0);
        for z in [1e-12, 1e-8, 1e-5] {
            assert!((m.zeta_1(z).unwrap() / (slope * z) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zeta_map_solves_leading_ode() {
        // (4ζ∞² ζ∞') = (g z²/2)√(z_0² - z²)
        let m = maps(300, 0.0);
        for z in [0.2, 0.5, 0.9] {
            let h = 1e-5;
            let d = (m.zeta_inf(z + h).unwrap() - m.zeta_inf(z - h).unwrap()) / (2.0 * h);
            let zi = m.zeta_inf(z).unwrap();
            let rhs = 0.5 * z * z * (m.z0 * m.z0 - z * z).sqrt();
            assert!((4.0 * zi * zi * d - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn period_integral_oracle() {
        assert!((period_integral(0.0, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((period_integral_contour(0.0, 0.0, 64).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        for (x1, x2) in [(0.01, -0.02), (-0.03, 0.01), (0.05, 0.04)] {
            let a = period_integral(x1, x2).unwrap();
            let b = period_integral_contour(x1, x2, 64).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn period_alpha_quadratic() {
        let p = params(400);
        assert_eq!(period_alpha(&p, 0.0).unwrap(), 0.0);
        let c9 = p.derive_constants().unwrap().c9;
        let ratios: Vec<f64> = [0.8, 0.4, 0.2, 0.1]
            .iter()
            .map(|&y| period_alpha(&p, y).unwrap() / (y * y))
            .collect();
        let lim = -c9 / 60.0;
        let devs: Vec<f64> = ratios.iter().map(|r| (r - lim).abs()).collect();
        for d in devs.windows(2) {
            assert!(d[1] < d[0], "{ratios:?}");
        }
        assert!(devs[3] < 1e-3 * lim.abs(), "{ratios:?} vs {lim}");
        let neg = period_alpha(&p, -0.4).unwrap() / 0.16;
        assert!((neg - lim).abs() < 0.05 * lim.abs());
    }

    #[test]
    fn harness_reports_rates() {
        let p = params(100);
        let opts = CompareOptions {
            points: 9,
            ..Default::default()
        };
        let rep = compare_harness(
            &p,
            &[100, 200],
            1,
            &[Region::Exterior, Region::Bulk],
            &opts,
            default_grid(),
        )
        .unwrap();
        assert_eq!(rep.rows.len(), 4);
        assert!(rep.rate(Region::Exterior).unwrap() > 0.5);
        let t = rep.to_table();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.columns, vec!["N", "n", "region", "sup_error", "fitted_rate"]);
    }

    proptest! {
        #[test]
        fn zeta_maps_are_odd(re in -1.0f64..1.0, im in -0.07f64..0.07, y in -2.0f64..2.0) {
            let m = maps(200, y);
            let z = Complex64::new(re, im);
            for f in [ZetaMaps::d_inf_c, ZetaMaps::d_1_c, ZetaMaps::zeta_inf_c, ZetaMaps::zeta_1_c, ZetaMaps::zeta_0_c] {
                let a = f(&m, z).unwrap();
                let b = f(&m, -z).unwrap();
                prop_assert!((a + b).norm() <= 1e-12 * (1.0 + a.norm()));
            }
        }
    }
}
