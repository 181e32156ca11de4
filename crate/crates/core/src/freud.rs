//! The string (Freud) equation n/N = R_n (t + g R_{n-1} + g R_n + g R_{n+1}).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::model::ModelParams;
use crate::orthopoly::stieltjes_recurrence;
use crate::painleve2::HMGrid;
use crate::quad::Adaptive;
use crate::table::Table;

/// Extra indices solved beyond `n_max` to keep the closure away from the output window.
const PAD: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Forward,
    Variational,
    QuadratureOracle,
    Initial,
}

/// Recurrence coefficients R_0 = 0, R_1, ..., R_{n_max}.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    pub r: Vec<f64>,
    pub method: Method,
    /// First index at which forward recursion left the admissible band.
    pub blowup: Option<usize>,
    /// Max string residual over interior indices.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl Trajectory {
    pub fn new(params: ModelParams, r: Vec<f64>, method: Method) -> Self {
        let mut t = Self {
            params,
            r,
            method,
            blowup: None,
            residual: 0.0,
            iterations: 0,
            converged: true,
        };
        t.residual = string_residual(&t.params, &t.r);
        t
    }

    pub fn n_max(&self) -> usize {
        self.r.len() - 1
    }

    /// String residual at index n (needs R_{n+1}).
    pub fn residual_at(&self, n: usize) -> Option<f64> {
        (n >= 1 && n + 1 < self.r.len()).then(|| string_residual_at(&self.params, &self.r, n))
    }

    /// Whether 0 < R_n < bound for all n ≥ 1.
    pub fn within_bound(&self) -> bool {
        (1..self.r.len()).all(|n| self.r[n] > 0.0 && self.r[n] < self.params.r_bound(n))
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["n", "R_n", "residual_n"]);
        t.comment(format!(
            "trajectory method={:?} t={} g={} N={} n_max={}",
            self.method,
            self.params.t,
            self.params.g,
            self.params.size,
            self.n_max()
        ));
        for n in 0..self.r.len() {
            t.push(vec![n as f64, self.r[n], self.residual_at(n).unwrap_or(f64::NAN)]);
        }
        t
    }
}

fn string_residual_at(p: &ModelParams, r: &[f64], n: usize) -> f64 {
    r[n] * (p.t + p.g * (r[n - 1] + r[n] + r[n + 1])) - p.ratio(n)
}

/// max_n |R_n (t + g R_{n-1} + g R_n + g R_{n+1}) - n/N| over 1 ≤ n < len-1.
pub fn string_residual(p: &ModelParams, r: &[f64]) -> f64 {
    (1..r.len().saturating_sub(1)).fold(0.0f64, |a, n| a.max(string_residual_at(p, r, n).abs()))
}

/// R_1 = ∫ z² e^{-NV} / ∫ e^{-NV} by adaptive quadrature.
pub fn initial_r1(p: &ModelParams) -> Result<f64> {
    let nf = p.nf();
    let shift = p.potential_min();
    let w = |z: f64| (-nf * (p.potential(z) - shift)).exp();
    let peak = if p.t < 0.0 { (-p.t / p.g).sqrt() } else { 0.0 };
    let mut l = peak.max(1.0);
    while nf * (p.potential(l) - shift) < 800.0 {
        l *= 1.25;
    }
    let width = 1.0 / (nf * (p.t.abs() + p.g)).sqrt();
    let mut breaks = vec![0.0];
    for x in [peak - 4.0 * width, peak, peak + 4.0 * width] {
        if x > *breaks.last().unwrap() && x < l {
            breaks.push(x);
        }
    }
    breaks.push(l);
    let q = Adaptive::new(1e-13);
    let m0 = q.integrate_with_breaks(w, &breaks)?;
    let m2 = q.integrate_with_breaks(|z| z * z * w(z), &breaks)?;
    Ok(m2.value / m0.value)
}

/// Forward recursion from the exact R_1, truncated where it leaves the band (0, bound).
pub fn forward_recursion(p: &ModelParams, n_max: usize) -> Result<Trajectory> {
    let r1 = initial_r1(p)?;
    Ok(forward_from(p, n_max, r1))
}

pub fn forward_from(p: &ModelParams, n_max: usize, r1: f64) -> Trajectory {
    let mut r = vec![0.0, r1];
    let mut blowup = None;
    for n in 1..n_max {
        let rn = r[n];
        if rn.abs() <= 1e-300 {
            blowup = Some(n);
            break;
        }
        let next = (p.ratio(n) / rn - p.t - p.g * r[n - 1] - p.g * rn) / p.g;
        if !(next > 0.0 && next < p.r_bound(n + 1)) {
            blowup = Some(n + 1);
            break;
        }
        r.push(next);
    }
    r.truncate(n_max + 1);
    let mut t = Trajectory::new(*p, r, Method::Forward);
    t.blowup = blowup;
    t
}

/// Branches attracting the string equation at a fixed ratio λ = n/N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoints {
    pub lambda: f64,
    pub branch_r: f64,
    pub branch_l: f64,
}

impl FixedPoints {
    pub fn is_two_cut(&self) -> bool {
        self.branch_r != self.branch_l
    }
}

pub fn fixed_points(p: &ModelParams, lambda: f64) -> Result<FixedPoints> {
    if p.t >= 0.0 {
        return Err(Error::Domain(format!("fixed points need t < 0, got {}", p.t)));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidInput(format!("lambda must be nonnegative, got {lambda}")));
    }
    let (t, g) = (p.t, p.g);
    if lambda < p.lambda_c() {
        let s = (t * t - 4.0 * lambda * g).sqrt();
        Ok(FixedPoints {
            lambda,
            branch_r: (-t + s) / (2.0 * g),
            branch_l: (-t - s) / (2.0 * g),
        })
    } else {
        let r = one_cut_fixed_point(p, lambda);
        Ok(FixedPoints {
            lambda,
            branch_r: r,
            branch_l: r,
        })
    }
}

/// Positive root of 3 g R² + t R = λ.
pub fn one_cut_fixed_point(p: &ModelParams, lambda: f64) -> f64 {
    let (t, g) = (p.t, p.g);
    (-t + (t * t + 12.0 * g * lambda).sqrt()) / (6.0 * g)
}

/// Fixed-point initial trajectory: interleaved branches below λ_c, one branch above.
///
/// The parity carrying the larger branch is chosen to match R_1.
pub fn fixed_point_init(p: &ModelParams, n_max: usize, r1: f64) -> Result<Trajectory> {
    let mut r = vec![0.0; n_max + 1];
    let fp1 = fixed_points(p, p.ratio(1))?;
    let odd_is_r = (r1 - fp1.branch_r).abs() <= (r1 - fp1.branch_l).abs();
    for (n, rn) in r.iter_mut().enumerate().skip(1) {
        *rn = init_value(p, n, odd_is_r)?;
    }
    Ok(Trajectory::new(*p, r, Method::Initial))
}

fn init_value(p: &ModelParams, n: usize, odd_is_r: bool) -> Result<f64> {
    let f = fixed_points(p, p.ratio(n))?;
    let take_r = (n % 2 == 1) == odd_is_r;
    let v = if take_r { f.branch_r } else { f.branch_l };
    // keep strictly inside the band
    let bound = p.r_bound(n);
    Ok(v.clamp(1e-3 * bound, (1.0 - 1e-9) * bound))
}

/// Discretized stationarity problem: ratios λ_n, bounds and the fixed closure value.
struct Problem<'a> {
    p: &'a ModelParams,
    lam: Vec<f64>,
    bound: Vec<f64>,
    closure: f64,
}

impl Problem<'_> {
    fn next(&self, r: &[f64], n: usize) -> f64 {
        if n + 1 == r.len() {
            self.closure
        } else {
            r[n + 1]
        }
    }

    fn gradient(&self, r: &[f64]) -> Vec<f64> {
        let p = self.p;
        (1..r.len())
            .map(|n| p.t + p.g * (r[n - 1] + r[n] + self.next(r, n)) - self.lam[n] / r[n])
            .collect()
    }

    fn feasible(&self, r: &[f64]) -> bool {
        (1..r.len()).all(|n| r[n] > 0.0 && r[n] < self.bound[n])
    }

    fn residual(&self, r: &[f64], upto: usize) -> f64 {
        let p = self.p;
        (1..=upto.min(r.len() - 1)).fold(0.0f64, |a, n| {
            a.max((r[n] * (p.t + p.g * (r[n - 1] + r[n] + self.next(r, n))) - self.lam[n]).abs())
        })
    }

    /// Damped Newton with a gradient-descent fallback; returns (iterations, converged).
    fn minimize(&self, r: &mut Vec<f64>, upto: usize, tol: f64, max_iter: usize) -> (usize, bool) {
        let p = self.p;
        let m = r.len() - 1;
        let mut grad = self.gradient(r);
        let mut merit = norm2(&grad);
        for it in 0..max_iter {
            if self.residual(r, upto) <= tol {
                return (it, true);
            }
            let diag: Vec<f64> = (1..=m).map(|n| p.g + self.lam[n] / (r[n] * r[n])).collect();
            let off = vec![p.g; m - 1];
            let rhs: Vec<f64> = grad.iter().map(|x| -x).collect();
            let newton = solve_tridiagonal(&off, &diag, &off, &rhs).ok();
            let mut accepted = false;
            for dir in [newton, Some(rhs.clone())].into_iter().flatten() {
                let mut alpha = 1.0;
                while alpha > 1e-12 {
                    let trial: Vec<f64> = std::iter::once(0.0)
                        .chain((1..=m).map(|n| r[n] + alpha * dir[n - 1]))
                        .collect();
                    if self.feasible(&trial) {
                        let g2 = self.gradient(&trial);
                        let m2 = norm2(&g2);
                        if m2 < (1.0 - 1e-4 * alpha) * merit {
                            *r = trial;
                            grad = g2;
                            merit = m2;
                            accepted = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                if accepted {
                    break;
                }
            }
            if !accepted {
                return (it, self.residual(r, upto) <= tol);
            }
        }
        (max_iter, self.residual(r, upto) <= tol)
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const MAX_ITER: usize = 500;

/// Stationary point of F(R) = Σ [t R_n + (g/2) R_n² + g R_n R_{n+1} - (n/N) ln R_n]
/// by damped Newton on the gradient, with R_{m+1} fixed to the fixed-point value.
pub fn variational_solve(p: &ModelParams, n_max: usize, init: &Trajectory, tol: f64) -> Result<Trajectory> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    if init.r.len() < 2 || !init.within_bound() {
        return Err(Error::InvalidInput(
            "initial trajectory must satisfy the R_n bound".into(),
        ));
    }
    let m = n_max + PAD;
    let r1 = init.r[1];
    let fp1 = fixed_points(p, p.ratio(1))?;
    let odd_is_r = (r1 - fp1.branch_r).abs() <= (r1 - fp1.branch_l).abs();
    let mut r = vec![0.0; m + 1];
    for n in 1..=m {
        r[n] = if n < init.r.len() {
            init.r[n]
        } else {
            init_value(p, n, odd_is_r)?
        };
    }
    let problem = Problem {
        p,
        lam: (0..=m + 1).map(|n| p.ratio(n)).collect(),
        bound: (0..=m + 1).map(|n| p.r_bound(n)).collect(),
        closure: init_value(p, m + 1, odd_is_r)?,
    };
    let (iterations, converged) = problem.minimize(&mut r, n_max, tol, MAX_ITER);
    r.truncate(n_max + 1);
    let mut t = Trajectory::new(*p, r, Method::Variational);
    t.iterations = iterations;
    t.converged = converged;
    Ok(t)
}

/// Variational solve with the ratio n/N replaced by a constant λ for every n.
///
/// Returns R_1..R_{n_max}; the closure is the one-cut fixed point at λ.
pub fn variational_solve_fixed_ratio(
    p: &ModelParams,
    lambda: f64,
    n_max: usize,
    init: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    let bound = (-p.t + (p.t * p.t + 4.0 * p.g * lambda).sqrt()) / (2.0 * p.g);
    if init.len() != n_max + 1 || init[1..].iter().any(|&v| !(v > 0.0 && v < bound)) {
        return Err(Error::InvalidInput("initial values must lie in (0, bound)".into()));
    }
    let problem = Problem {
        p,
        lam: std::iter::once(0.0)
            .chain(std::iter::repeat_n(lambda, n_max + 1))
            .collect(),
        bound: vec![bound; n_max + 2],
        closure: one_cut_fixed_point(p, lambda),
    };
    let mut r = init.to_vec();
    r[0] = 0.0;
    let (iterations, converged) = problem.minimize(&mut r, n_max, tol, MAX_ITER);
    let residual = problem.residual(&r, n_max);
    Ok(Trajectory {
        params: *p,
        r,
        method: Method::Variational,
        blowup: None,
        residual,
        iterations,
        converged,
    })
}

/// Variational solve started from the fixed-point initializer.
pub fn solve(p: &ModelParams, n_max: usize, tol: f64) -> Result<Trajectory> {
    let r1 = initial_r1(p)?;
    let init = fixed_point_init(p, n_max, r1)?;
    let t = variational_solve(p, n_max, &init, tol)?;
    if !t.converged {
        return Err(Error::Convergence {
            what: "variational string equation solve".into(),
            iterations: t.iterations,
            residual: t.residual,
        });
    }
    Ok(t)
}

/// Trajectory from the quadrature-based Stieltjes recurrence.
pub fn quadrature_oracle(p: &ModelParams, n_max: usize, tol: f64) -> Result<Trajectory> {
    let rec = stieltjes_recurrence(p, n_max, tol)?;
    Ok(Trajectory::new(*p, rec.r, Method::QuadratureOracle))
}

/// R_n⁰ = |t|/(2g) + N^{-1/3} c₁ (-1)^{n+1} u(y) + N^{-2/3} c₂ v(y).
pub fn ansatz_r(p: &ModelParams, n: usize, hm: &HMGrid) -> Result<f64> {
    let c = p.derive_constants()?;
    let y = p.y_of(n)?;
    let h = hm.at(y)?;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let nf = p.nf();
    Ok(-p.t / (2.0 * p.g) + nf.powf(-1.0 / 3.0) * c.c1 * sign * h.u + nf.powf(-2.0 / 3.0) * c.c2 * h.v)
}

/// Branch gap |R_{n+1} - R_n|.
pub fn branch_gap(r: &[f64], n: usize) -> f64 {
    (r[n + 1] - r[n]).abs()
}

/// Merge index from a linear fit of the squared branch gap over [lo, hi].
///
/// Below λ_c the gap² between the two branches is linear in n.
pub fn merge_index(r: &[f64], lo: usize, hi: usize) -> f64 {
    let pts: Vec<(f64, f64)> = (lo..=hi).map(|n| (n as f64, branch_gap(r, n).powi(2))).collect();
    let k = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    let icpt = (sy - slope * sx) / k;
    -icpt / slope
}
