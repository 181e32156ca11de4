//! The critical-point system Φ' = A(z) Φ with
//! A = (4z² + v) J + 2εw σ₁ + 4εuz σ₃, ε = (-1)^n, and the critical kernel Q_c.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::rk8_step;
use crate::painleve2::HMGrid;
use crate::table::Table;

/// Hastings–McLeod data entering A(z) at fixed y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub y: f64,
    pub u: f64,
    /// u'(y)
    pub up: f64,
    pub v: f64,
    pub d: f64,
    /// (-1)^n
    pub eps: f64,
}

impl Coefficients {
    pub fn new(hm: &HMGrid, y: f64, n_parity: u8) -> Result<Self> {
        let p = hm.at(y)?;
        Ok(Self {
            y,
            u: p.u,
            up: p.up,
            v: p.v,
            d: p.d,
            eps: if n_parity.is_multiple_of(2) { 1.0 } else { -1.0 },
        })
    }

    /// A(z) as [[a11, a12], [a21, a22]].
    pub fn a(&self, z: f64) -> [[f64; 2]; 2] {
        let e = self.eps;
        let r = 4.0 * z * z + self.v;
        let a11 = 4.0 * e * self.u * z;
        [[a11, r + 2.0 * e * self.up], [-r + 2.0 * e * self.up, -a11]]
    }

    /// B(z) of the y-equation ∂_y Φ = B Φ.
    pub fn b(&self, z: f64) -> [[f64; 2]; 2] {
        let eu = self.eps * self.u;
        [[eu, z], [-z, -eu]]
    }

    pub fn rhs(&self, z: f64, phi: &[f64; 2]) -> [f64; 2] {
        let a = self.a(z);
        [a[0][0] * phi[0] + a[0][1] * phi[1], a[1][0] * phi[0] + a[1][1] * phi[1]]
    }

    /// Coefficients (α_m, β_m), m = 0..=order, of the formal solution
    /// e^{iθ} Σ (α_m e + β_m f) z^{-m}, e = (1, i), f = (1, -i), θ = 4z³/3 + yz.
    pub fn formal_series(&self, order: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let i = Complex64::i();
        let e = self.eps;
        let (u, w, y) = (self.u, self.up, self.y);
        let s = y + u * u;
        let mut alpha = vec![Complex64::new(0.0, 0.0); order + 2];
        let mut beta = vec![Complex64::new(0.0, 0.0); order + 3];
        alpha[0] = Complex64::new(1.0, 0.0);
        beta[1] = -i * e * u / 2.0;
        for m in 1..=order {
            let bm2 = if m >= 2 { beta[m - 2] } else { Complex64::new(0.0, 0.0) };
            let x = (m as f64 - 2.0) * bm2 - 2.0 * i * s * beta[m - 1] + 2.0 * i * e * w * alpha[m - 1];
            alpha[m] = ((i * e * u / 2.0) * (m as f64 - 1.0) * beta[m - 1] + e * u * s * beta[m] + (e * w / 4.0) * x)
                / m as f64;
            beta[m + 1] = (x + 4.0 * e * u * alpha[m]) / (8.0 * i);
        }
        alpha.truncate(order + 1);
        beta.truncate(order + 1);
        (alpha, beta)
    }

    /// Real solution Re[e^{-iφ} e^{iθ} S(z)] for z > 0, with phase φ in units of π/2.
    pub fn asymptotic(&self, z: f64, quarter_turns: u8, order: usize) -> [f64; 2] {
        self.asymptotic_with_derivative(z, quarter_turns, order).0
    }

    /// The truncated formal solution and its exact z-derivative.
    pub fn asymptotic_with_derivative(&self, z: f64, quarter_turns: u8, order: usize) -> ([f64; 2], [f64; 2]) {
        let (alpha, beta) = self.formal_series(order);
        let i = Complex64::i();
        let zero = Complex64::new(0.0, 0.0);
        let (mut s1, mut s2, mut d1, mut d2) = (zero, zero, zero, zero);
        let mut zp = 1.0;
        for m in 0..=order {
            let c1 = alpha[m] + beta[m];
            let c2 = i * (alpha[m] - beta[m]);
            s1 += c1 * zp;
            s2 += c2 * zp;
            d1 -= m as f64 * c1 * zp / z;
            d2 -= m as f64 * c2 * zp / z;
            zp /= z;
        }
        let theta = 4.0 * z * z * z / 3.0 + self.y * z;
        let dtheta = 4.0 * z * z + self.y;
        let ph = Complex64::from_polar(1.0, theta - FRAC_PI_2 * quarter_turns as f64);
        let v = [(ph * s1).re, (ph * s2).re];
        let d = [(ph * (i * dtheta * s1 + d1)).re, (ph * (i * dtheta * s2 + d2)).re];
        (v, d)
    }
}

/// Leading real-axis asymptotics (cos(θ - πn/2), -sin(θ - πn/2)).
pub fn leading_asymptotic(z: f64, y: f64, n_parity: u8) -> [f64; 2] {
    let a = 4.0 * z * z * z / 3.0 + y * z - FRAC_PI_2 * n_parity as f64;
    [a.cos(), -a.sin()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiOptions {
    pub z_far: f64,
    /// RK8 steps over [0, z_far]; `None` picks the oscillation-resolving default.
    pub steps: Option<usize>,
    /// Order of the 1/z initializer; 0 uses the leading asymptotics only.
    pub series_order: usize,
}

impl Default for PhiOptions {
    fn default() -> Self {
        Self {
            z_far: 12.0,
            steps: None,
            series_order: 12,
        }
    }
}

/// Φ on a symmetric uniform grid, symmetrized by the parity relation.
#[derive(Debug, Clone)]
pub struct PhiSolution {
    pub coeffs: Coefficients,
    pub n_parity: u8,
    pub z: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub dphi1: Vec<f64>,
    pub dphi2: Vec<f64>,
    /// Parity defect of the raw solution at z = 0.
    pub mismatch: f64,
    /// max_z |Φ(-z) - (-1)^n σ₃ Φ(z)| of the raw solution.
    pub parity_defect: f64,
    pub options: PhiOptions,
    h: f64,
}

fn default_steps(z_far: f64, y: f64) -> usize {
    let hmax = 2.0 * PI / (40.0 * (4.0 * z_far * z_far + y.abs()));
    (z_far / hmax).ceil() as usize
}

/// Integrate from +z_far down to -z_far; returns the grid and raw values (increasing z).
fn sweep(c: &Coefficients, quarter_turns: u8, opts: &PhiOptions) -> Result<(Vec<f64>, Vec<[f64; 2]>, f64)> {
    let zf = opts.z_far;
    if !(zf >= 8.0) {
        return Err(Error::InvalidInput(format!("z_far must be at least 8, got {zf}")));
    }
    let half = opts.steps.unwrap_or_else(|| default_steps(zf, c.y));
    if half < default_steps(zf, c.y) / 4 {
        return Err(Error::InvalidInput(format!(
            "{half} steps do not resolve the oscillation"
        )));
    }
    let h = zf / half as f64;
    let start = if opts.series_order == 0 {
        leading_asymptotic(zf, c.y, quarter_turns)
    } else {
        c.asymptotic(zf, quarter_turns, opts.series_order)
    };
    let total = 2 * half;
    let mut vals = vec![[0.0; 2]; total + 1];
    let mut zs = vec![0.0; total + 1];
    vals[total] = start;
    zs[total] = zf;
    let f = |z: f64, p: &[f64; 2]| c.rhs(z, p);
    for k in (0..total).rev() {
        let z1 = zf - (total - k - 1) as f64 * h;
        vals[k] = rk8_step(&f, z1, &vals[k + 1], -h);
        zs[k] = zf - (total - k) as f64 * h;
    }
    zs[half] = 0.0;
    Ok((zs, vals, h))
}

pub fn solve_phi(hm: &HMGrid, y: f64, n_parity: u8, opts: PhiOptions) -> Result<PhiSolution> {
    let n_parity = n_parity % 4;
    let c = Coefficients::new(hm, y, n_parity)?;
    let (z, raw, h) = sweep(&c, n_parity, &opts)?;
    let m = z.len();
    let half = m / 2;
    let sig = if n_parity.is_multiple_of(2) { 1.0 } else { -1.0 };
    // parity matrix (-1)^n σ₃
    let par = |p: [f64; 2]| [sig * p[0], -sig * p[1]];
    let mut parity_defect = 0.0f64;
    let mut phi1 = vec![0.0; m];
    let mut phi2 = vec![0.0; m];
    for k in 0..m {
        let mirrored = par(raw[m - 1 - k]);
        let d = (raw[k][0] - mirrored[0]).abs().max((raw[k][1] - mirrored[1]).abs());
        parity_defect = parity_defect.max(d);
        phi1[k] = 0.5 * (raw[k][0] + mirrored[0]);
        phi2[k] = 0.5 * (raw[k][1] + mirrored[1]);
    }
    let p0 = raw[half];
    let q0 = par(p0);
    let mismatch = (p0[0] - q0[0]).abs().max((p0[1] - q0[1]).abs());
    let (dphi1, dphi2): (Vec<f64>, Vec<f64>) = (0..m)
        .map(|k| {
            let d = c.rhs(z[k], &[phi1[k], phi2[k]]);
            (d[0], d[1])
        })
        .unzip();
    let sol = PhiSolution {
        coeffs: c,
        n_parity,
        z,
        phi1,
        phi2,
        dphi1,
        dphi2,
        mismatch,
        parity_defect,
        options: opts,
        h,
    };
    if mismatch > 0.05 {
        return Err(Error::Convergence {
            what: "Φ matching at z = 0 (increase z_far or steps)".into(),
            iterations: m,
            residual: mismatch,
        });
    }
    Ok(sol)
}

/// Raw solution of the same system started with phase shifted by `quarter_turns`·π/2.
pub fn solve_phi_phase(
    hm: &HMGrid,
    y: f64,
    n_parity: u8,
    quarter_turns: u8,
    opts: PhiOptions,
) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
    let c = Coefficients::new(hm, y, n_parity)?;
    let (z, raw, _) = sweep(&c, quarter_turns, &opts)?;
    Ok((z, raw))
}

impl PhiSolution {
    pub fn y(&self) -> f64 {
        self.coeffs.y
    }

    pub fn z_far(&self) -> f64 {
        self.options.z_far
    }

    /// Φ(z) by one RK8 step from the nearest grid node.
    pub fn eval(&self, z: f64) -> Result<[f64; 2]> {
        let zf = self.z_far();
        if !(z.abs() <= zf * (1.0 + 1e-12)) {
            return Err(Error::OutOfRange {
                quantity: "z".into(),
                value: z,
                lo: -zf,
                hi: zf,
            });
        }
        let k = (((z + zf) / self.h).round() as usize).min(self.z.len() - 1);
        let p = [self.phi1[k], self.phi2[k]];
        let dz = z - self.z[k];
        if dz == 0.0 {
            return Ok(p);
        }
        let f = |x: f64, q: &[f64; 2]| self.coeffs.rhs(x, q);
        Ok(rk8_step(&f, self.z[k], &p, dz))
    }

    /// (Φ, Φ') at z.
    pub fn eval_with_derivative(&self, z: f64) -> Result<([f64; 2], [f64; 2])> {
        let p = self.eval(z)?;
        Ok((p, self.coeffs.rhs(z, &p)))
    }

    /// |Φ¹ - cos(θ - πn/2)| + |Φ² + sin(θ - πn/2)|.
    pub fn asymptotic_defect(&self, z: f64) -> Result<f64> {
        let p = self.eval(z)?;
        let l = leading_asymptotic(z, self.y(), self.n_parity);
        Ok((p[0] - l[0]).abs() + (p[1] - l[1]).abs())
    }

    /// Max over grid nodes of ‖Φ' - AΦ‖ / (‖A‖ ‖Φ‖), Φ' from the 9-point central stencil.
    pub fn ode_residual(&self) -> f64 {
        const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
        let mut worst = 0.0f64;
        for k in 4..self.z.len() - 4 {
            let (mut d1, mut d2) = (0.0, 0.0);
            for (j, w) in W.iter().enumerate() {
                d1 += w * (self.phi1[k + j + 1] - self.phi1[k - j - 1]);
                d2 += w * (self.phi2[k + j + 1] - self.phi2[k - j - 1]);
            }
            d1 /= self.h;
            d2 /= self.h;
            let a = self.coeffs.a(self.z[k]);
            let anorm = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            let scale = anorm * self.phi1[k].abs().max(self.phi2[k].abs());
            let r = (d1 - self.dphi1[k]).abs().max((d2 - self.dphi2[k]).abs()) / scale;
            worst = worst.max(r);
        }
        worst
    }

    /// Envelope slope of the asymptotic defect on [lo, hi], from log-log fit of windowed maxima.
    pub fn defect_slope(&self, lo: f64, hi: f64, windows: usize) -> Result<f64> {
        let mut pts = Vec::new();
        let w = (hi - lo) / windows as f64;
        for j in 0..windows {
            let a = lo + j as f64 * w;
            let mut best = 0.0f64;
            let samples = 400;
            for s in 0..=samples {
                let z = a + w * s as f64 / samples as f64;
                best = best.max(self.asymptotic_defect(z)?);
            }
            pts.push(((a + 0.5 * w).ln(), best.ln()));
        }
        Ok(fit_slope(&pts))
    }

    pub fn to_table(&self, stride: usize) -> Table {
        let mut t = Table::new(&["z", "phi1", "phi2"]);
        t.comment(format!(
            "phi y={} n_parity={} z_far={} mismatch={:e}",
            self.y(),
            self.n_parity,
            self.z_far(),
            self.mismatch
        ));
        for k in (0..self.z.len()).step_by(stride.max(1)) {
            t.push(vec![self.z[k], self.phi1[k], self.phi2[k]]);
        }
        t
    }
}

/// Least-squares slope of (x, y) pairs.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (k * sxy - sx * sy) / (k * sxx - sx * sx)
}

/// Q_c(u, v) = (Φ¹(u)Φ²(v) - Φ¹(v)Φ²(u)) / (π(u - v)).
pub fn critical_kernel(phi: &PhiSolution, u: f64, v: f64) -> Result<f64> {
    if (u - v).abs() < 1e-6 {
        let (p, d) = phi.eval_with_derivative(0.5 * (u + v))?;
        return Ok((d[0] * p[1] - d[1] * p[0]) / PI);
    }
    let a = phi.eval(u)?;
    let b = phi.eval(v)?;
    Ok((a[0] * b[1] - b[0] * a[1]) / (PI * (u - v)))
}

/// Diagonal Q_c(u, u) written through the entries of A.
pub fn critical_kernel_diagonal_by_a(phi: &PhiSolution, u: f64) -> Result<f64> {
    let p = phi.eval(u)?;
    let a = phi.coeffs.a(u);
    Ok((a[0][1] * p[1] * p[1] - a[1][0] * p[0] * p[0] + 2.0 * a[0][0] * p[0] * p[1]) / PI)
}
