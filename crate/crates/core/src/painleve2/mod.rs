//! Airy functions and the Hastings–McLeod solution of u'' = y u + 2u³.

pub mod airy;

use std::sync::OnceLock;

use crate::error::{Error, Result};
pub use airy::{ai, aip, airy, airy_real};

/// Tabulated Hastings–McLeod data on a uniform grid.
#[derive(Debug, Clone)]
pub struct HMGrid {
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    /// u'(y)
    pub up: Vec<f64>,
    pub v: Vec<f64>,
    /// D(y) = ∫_y^∞ u²
    pub d: Vec<f64>,
    pub q: Vec<f64>,
    pub h: f64,
    pub newton_iterations: usize,
    /// Newton step max-norm at termination.
    pub newton_step: f64,
    /// Size of the first omitted term of the left boundary series.
    pub boundary_error: f64,
}

/// Interpolated HM data at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HMPoint {
    pub y: f64,
    pub u: f64,
    pub up: f64,
    pub v: f64,
    pub d: f64,
    pub q: f64,
}

/// Roots s₁² < s₂² of s⁴ + (y/2)s² + q = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoints {
    pub s1_sq: f64,
    pub s2_sq: f64,
    pub discriminant: f64,
}

fn rhs(y: f64, u: f64) -> f64 {
    y * u + 2.0 * u * u * u
}

/// Left boundary value from the y → -∞ expansion.
pub fn left_tail(y: f64) -> f64 {
    let y3 = y * y * y;
    (-y / 2.0).sqrt() * (1.0 + 1.0 / (8.0 * y3) - 73.0 / (128.0 * y3 * y3))
}

fn initial_guess(y: f64) -> f64 {
    (((y * y + 1.0).sqrt() - y) / 4.0).sqrt() * (-(2.0 / 3.0) * y.max(0.0).powf(1.5)).exp()
}

/// Solve a symmetric-pattern tridiagonal system in place (Thomas algorithm).
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut b = diag[0];
    if b == 0.0 {
        return Err(Error::Domain("singular tridiagonal system".into()));
    }
    rhs[0] /= b;
    for i in 1..n {
        c[i - 1] = sup[i - 1] / b;
        b = diag[i] - sub[i - 1] * c[i - 1];
        if b == 0.0 {
            return Err(Error::Domain("singular tridiagonal system".into()));
        }
        rhs[i] = (rhs[i] - sub[i - 1] * rhs[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Numerov residual r_i = u_{i+1} - 2u_i + u_{i-1} - h²/12 (f_{i+1} + 10 f_i + f_{i-1}).
fn numerov_residual(y: &[f64], u: &[f64], h: f64) -> Vec<f64> {
    let f: Vec<f64> = y.iter().zip(u).map(|(&y, &u)| rhs(y, u)).collect();
    (1..u.len() - 1)
        .map(|i| u[i + 1] - 2.0 * u[i] + u[i - 1] - h * h / 12.0 * (f[i + 1] + 10.0 * f[i] + f[i - 1]))
        .collect()
}

fn newton(y: &[f64], u: &mut [f64], h: f64, tol: f64, max_iter: usize) -> Result<(usize, f64)> {
    let m = u.len();
    let k = h * h / 12.0;
    let mut last_step = f64::INFINITY;
    for it in 1..=max_iter {
        let res = numerov_residual(y, u, h);
        let fp: Vec<f64> = y.iter().zip(u.iter()).map(|(&y, &u)| y + 6.0 * u * u).collect();
        let n = m - 2;
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n.saturating_sub(1)];
        let mut sup = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            diag[i] = -2.0 - 10.0 * k * fp[i + 1];
        }
        // unknown i sits at grid node i + 1
        for i in 0..n.saturating_sub(1) {
            sub[i] = 1.0 - k * fp[i + 1];
            sup[i] = 1.0 - k * fp[i + 2];
        }
        let mut delta: Vec<f64> = res.iter().map(|r| -r).collect();
        thomas(&sub, &diag, &sup, &mut delta)?;
        let step = delta.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        // damp large steps to stay near the physical branch
        let damp = if step > 0.5 { 0.5 / step } else { 1.0 };
        for i in 0..n {
            u[i + 1] += damp * delta[i];
        }
        last_step = step;
        if step <= tol {
            return Ok((it, step));
        }
        if !step.is_finite() {
            break;
        }
    }
    Err(Error::Convergence {
        what: "Hastings–McLeod Newton iteration".into(),
        iterations: max_iter,
        residual: last_step,
    })
}

/// Solve the Hastings–McLeod boundary value problem on `[y_min, y_max]` with `mesh` intervals.
pub fn solve_hastings_mcleod(y_min: f64, y_max: f64, mesh: usize, tol: f64) -> Result<HMGrid> {
    if y_min > -8.0 || y_max < 6.0 {
        return Err(Error::InvalidInput(format!(
            "grid [{y_min}, {y_max}] must contain [-8, 6]"
        )));
    }
    if mesh < 400 {
        return Err(Error::InvalidInput(format!("mesh {mesh} below 400")));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let h = (y_max - y_min) / mesh as f64;
    let y: Vec<f64> = (0..=mesh).map(|i| y_min + i as f64 * h).collect();
    let mut u: Vec<f64> = y.iter().map(|&y| initial_guess(y)).collect();
    u[0] = left_tail(y_min);
    u[mesh] = ai(y_max);

    let (iters, step) = match newton(&y, &mut u, h, tol, 60) {
        Ok(r) => r,
        Err(_) => {
            // continuation: start from the decoupled Airy/algebraic profile with heavier damping
            for (ui, &yi) in u.iter_mut().zip(&y) {
                *ui = if yi > 0.0 {
                    ai(yi) / ai(0.0) * 0.367
                } else {
                    (-yi / 2.0 + 0.135).sqrt()
                };
            }
            u[0] = left_tail(y_min);
            u[mesh] = ai(y_max);
            newton(&y, &mut u, h, tol, 200)?
        }
    };

    let f: Vec<f64> = y.iter().zip(&u).map(|(&y, &u)| rhs(y, u)).collect();
    let mut up = vec![0.0; mesh + 1];
    for i in 1..mesh {
        up[i] = (u[i + 1] - u[i - 1]) / (2.0 * h) - h * (f[i + 1] - f[i - 1]) / 12.0;
    }
    up[0] = (u[1] - u[0]) / h - h * (2.0 * f[0] + f[1]) / 6.0;
    up[mesh] = (u[mesh] - u[mesh - 1]) / h + h * (2.0 * f[mesh] + f[mesh - 1]) / 6.0;

    let v: Vec<f64> = y.iter().zip(&u).map(|(&y, &u)| y + 2.0 * u * u).collect();

    // D by backward Hermite-corrected trapezoid, closed by ∫_x^∞ Ai² = Ai'(x)² - x Ai(x)²
    let mut d = vec![0.0; mesh + 1];
    let (a, ap) = airy_real(y_max);
    d[mesh] = ap * ap - y_max * a * a;
    for i in (0..mesh).rev() {
        let (f0, f1) = (u[i] * u[i], u[i + 1] * u[i + 1]);
        let (g0, g1) = (2.0 * u[i] * up[i], 2.0 * u[i + 1] * up[i + 1]);
        d[i] = d[i + 1] + 0.5 * h * (f0 + f1) + h * h / 12.0 * (g0 - g1);
    }
    let q: Vec<f64> = v.iter().zip(&up).map(|(&v, &w)| (v * v - 4.0 * w * w) / 16.0).collect();

    let boundary_error = (-y_min / 2.0).sqrt() * 10657.0 / 1024.0 / y_min.abs().powi(9);

    Ok(HMGrid {
        y,
        u,
        up,
        v,
        d,
        q,
        h,
        newton_iterations: iters,
        newton_step: step,
        boundary_error,
    })
}

/// Shared default grid on [-16, 10] with spacing 1/200.
pub fn default_grid() -> &'static HMGrid {
    static G: OnceLock<HMGrid> = OnceLock::new();
    G.get_or_init(|| solve_hastings_mcleod(-16.0, 10.0, 5200, 1e-13).expect("default Hastings–McLeod grid"))
}

fn hermite(h: f64, t: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let val = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let der = dh00 * f0 + dh10 * d0 + dh01 * f1 + dh11 * d1;
    (val, der)
}

impl HMGrid {
    pub fn y_min(&self) -> f64 {
        self.y[0]
    }

    pub fn y_max(&self) -> f64 {
        *self.y.last().expect("nonempty grid")
    }

    fn locate(&self, y: f64) -> Result<(usize, f64)> {
        let tol = 1e-12 * self.h;
        if !(y >= self.y_min() - tol && y <= self.y_max() + tol) {
            return Err(Error::OutOfRange {
                quantity: "y".into(),
                value: y,
                lo: self.y_min(),
                hi: self.y_max(),
            });
        }
        let n = self.y.len() - 1;
        let j = (((y - self.y_min()) / self.h).floor().max(0.0) as usize).min(n - 1);
        let t = ((y - self.y[j]) / self.h).clamp(0.0, 1.0);
        Ok((j, t))
    }

    /// Cubic Hermite interpolation of all HM quantities at `y`.
    pub fn at(&self, y: f64) -> Result<HMPoint> {
        let (j, t) = self.locate(y)?;
        let h = self.h;
        let upp = |i: usize| rhs(self.y[i], self.u[i]);
        let (u, _) = hermite(h, t, self.u[j], self.u[j + 1], self.up[j], self.up[j + 1]);
        let (up, _) = hermite(h, t, self.up[j], self.up[j + 1], upp(j), upp(j + 1));
        let (d, _) = hermite(
            h,
            t,
            self.d[j],
            self.d[j + 1],
            -self.u[j] * self.u[j],
            -self.u[j + 1] * self.u[j + 1],
        );
        let (q, _) = hermite(h, t, self.q[j], self.q[j + 1], self.v[j] / 8.0, self.v[j + 1] / 8.0);
        Ok(HMPoint {
            y,
            u,
            up,
            v: y + 2.0 * u * u,
            d,
            q,
        })
    }

    pub fn u_at(&self, y: f64) -> Result<f64> {
        Ok(self.at(y)?.u)
    }

    /// Max over interior nodes of |u'' - y u - 2u³| with u'' from the compact scheme.
    pub fn painleve_residual(&self) -> f64 {
        numerov_residual(&self.y, &self.u, self.h)
            .iter()
            .fold(0.0f64, |a, r| a.max(r.abs()))
            / (self.h * self.h)
    }

    /// D from the algebraic identity -y u² - u⁴ + u'² at node `i`.
    pub fn d_identity(&self, i: usize) -> f64 {
        let (y, u, w) = (self.y[i], self.u[i], self.up[i]);
        -y * u * u - u.powi(4) + w * w
    }

    pub fn turning_points(&self, y: f64) -> Result<TurningPoints> {
        let p = self.at(y)?;
        Ok(turning_points_from(y, p.d))
    }

    /// The positive zero of q.
    pub fn find_y0(&self) -> Result<f64> {
        let start = self.y.iter().position(|&y| y > 0.0).unwrap_or(self.y.len());
        let mut bracket = None;
        for i in start.max(1)..self.y.len() {
            if self.q[i - 1] < 0.0 && self.q[i] >= 0.0 && self.y[i - 1] >= 0.0 {
                bracket = Some((self.y[i - 1], self.y[i]));
                break;
            }
        }
        let (mut lo, mut hi) = bracket.ok_or_else(|| Error::Domain("q has no sign change on y > 0".into()))?;
        let q = |y: f64| self.at(y).map(|p| p.q);
        let (mut qlo, mut qhi) = (q(lo)?, q(hi)?);
        for _ in 0..200 {
            // secant proposal, bisection fallback
            let mut mid = lo - qlo * (hi - lo) / (qhi - qlo);
            if !(mid > lo && mid < hi) {
                mid = 0.5 * (lo + hi);
            }
            let qm = q(mid)?;
            if qm < 0.0 {
                lo = mid;
                qlo = qm;
            } else {
                hi = mid;
                qhi = qm;
            }
            if hi - lo < 1e-12 || qm.abs() < 1e-16 {
                return Ok(mid);
            }
            let bis = 0.5 * (lo + hi);
            let qb = q(bis)?;
            if qb < 0.0 {
                lo = bis;
                qlo = qb;
            } else {
                hi = bis;
                qhi = qb;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Number of sign changes of v over the grid.
    pub fn v_sign_changes(&self) -> usize {
        self.v.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count()
    }
}

/// Roots of the biquadratic from the discriminant D(y) = p² - 4q with p = y/2.
pub fn turning_points_from(y: f64, discriminant: f64) -> TurningPoints {
    let p = 0.5 * y;
    let s = discriminant.max(0.0).sqrt();
    TurningPoints {
        s1_sq: 0.5 * (-p - s),
        s2_sq: 0.5 * (-p + s),
        discriminant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> &'static HMGrid {
        default_grid()
    }

    #[test]
    fn u_at_zero() {
        let u0 = grid().u_at(0.0).unwrap();
        assert!((u0 - 0.367_061_551_5).abs() < 1e-8, "u(0) = {u0}");
    }

    #[test]
    fn derivative_at_zero() {
        let w0 = grid().at(0.0).unwrap().up;
        assert!((w0 + 0.295_372_105_4).abs() < 1e-8, "u'(0) = {w0}");
    }

    #[test]
    fn residual_small() {
        assert!(grid().painleve_residual() < 1e-10);
    }

    #[test]
    fn right_tail_matches_airy() {
        let r = grid().u_at(5.0).unwrap() / ai(5.0);
        assert!((r - 1.0).abs() < 1e-4, "ratio {r}");
    }

    #[test]
    fn left_tail_matches_series() {
        let r = grid().u_at(-6.0).unwrap() / 3f64.sqrt();
        assert!((r - (1.0 - 1.0 / 1728.0)).abs() < 1e-4, "ratio {r}");
    }

    #[test]
    fn d_positive_and_decreasing() {
        let g = grid();
        assert!(g.d.iter().all(|&d| d > 0.0));
        assert!(g.d.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn d_identity_agrees_with_quadrature() {
        let g = grid();
        let worst = (0..g.y.len())
            .map(|i| (g.d_identity(i) - g.d[i]).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-7, "worst {worst:e}");
    }

    #[test]
    fn derivative_identities() {
        let g = grid();
        let h = 1e-3;
        for &y in &[-7.0, -2.5, 0.0, 1.7, 4.0] {
            let dp = (g.at(y + h).unwrap().d - g.at(y - h).unwrap().d) / (2.0 * h);
            let u = g.u_at(y).unwrap();
            assert!((dp + u * u).abs() < 1e-6);
            let qp = (g.at(y + h).unwrap().q - g.at(y - h).unwrap().q) / (2.0 * h);
            assert!((qp - g.at(y).unwrap().v / 8.0).abs() < 1e-6);
        }
    }

    #[test]
    fn y0_positive_and_unique() {
        let g = grid();
        let y0 = g.find_y0().unwrap();
        assert!(y0 > 0.0);
        let changes =
            g.q.windows(2)
                .zip(g.y.windows(2))
                .filter(|(q, y)| y[0] > 0.0 && (q[0] < 0.0) != (q[1] < 0.0))
                .count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn turning_point_asymptotics() {
        let tp = grid().turning_points(-10.0).unwrap();
        assert!((tp.s2_sq / 5.0 - 1.0).abs() < 0.02);
        assert!((tp.s1_sq / (-1.0 / 1600.0) - 1.0).abs() < 0.2);
        let tp = grid().turning_points(6.0).unwrap();
        assert!(tp.s1_sq < 0.0 && tp.s2_sq < 0.0);
        assert!((tp.s1_sq + 1.5).abs() < 1e-3 && (tp.s2_sq + 1.5).abs() < 1e-3);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(matches!(grid().at(50.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn v_single_sign_change() {
        assert_eq!(grid().v_sign_changes(), 1);
    }
}
