//! Orthogonal polynomials for the weight e^{-N V}: discretized Stieltjes recurrence,
//! ψ-functions, the Christoffel–Darboux kernel and Lax-pair residuals.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quad::composite_gauss_legendre;
use crate::table::Table;

const PANEL_ORDER: usize = 20;
const GRAM_BOUND: f64 = 1e-8;
const RESCALE: f64 = 1e150;

/// Composite Gauss–Legendre rule on [-L, L] for the weight e^{-N V}.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    /// Plain Gauss–Legendre weights.
    pub weights: Vec<f64>,
    /// e^{-N (V(x) - V_min)} times the Gauss–Legendre weight.
    pub measure: Vec<f64>,
    /// V_min, the shift applied to the exponent.
    pub shift: f64,
    pub half_width: f64,
    pub panels: usize,
    pub target_tol: f64,
}

impl QuadratureRule {
    pub fn new(params: &ModelParams, half_width: f64, panels: usize, target_tol: f64) -> Self {
        let (nodes, weights) = composite_gauss_legendre(-half_width, half_width, panels, PANEL_ORDER);
        let shift = params.potential_min();
        let nf = params.nf();
        let measure = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| w * (-nf * (params.potential(x) - shift)).exp())
            .collect();
        Self {
            nodes,
            weights,
            measure,
            shift,
            half_width,
            panels,
            target_tol,
        }
    }

    /// Rule sized for ψ_n with n ≤ n_max.
    pub fn for_degree(params: &ModelParams, n_max: usize, target_tol: f64) -> Self {
        let l = default_half_width(params, n_max);
        let panels = 16 + n_max.div_ceil(3);
        Self::new(params, l, panels, target_tol)
    }

    /// The same interval extended by 10% with twice the panels.
    pub fn refined(&self, params: &ModelParams) -> Self {
        Self::new(params, 1.1 * self.half_width, 2 * self.panels, self.target_tol)
    }

    /// log ∫ e^{-N V}.
    pub fn log_mass(&self, params: &ModelParams) -> f64 {
        self.measure.iter().sum::<f64>().ln() - params.nf() * self.shift
    }

    /// ∫ f dx with plain weights.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Half-width beyond which every ψ_n, n ≤ n_max, is below 1e-22 in modulus squared.
fn default_half_width(params: &ModelParams, n_max: usize) -> f64 {
    let a = 2.0 * params.r_bound(n_max.max(1)).sqrt();
    let a = a.max((2.0 * params.t.abs() / params.g).sqrt());
    let nf = params.nf();
    let va = params.potential(a);
    let excess = |x: f64| nf * (params.potential(x) - va) - 2.0 * n_max as f64 * (x / a).ln();
    let mut l = 1.05 * a;
    while excess(l) < 120.0 {
        l *= 1.02;
    }
    l
}

/// Recurrence coefficients R_n (R_0 = 0) and log h_n.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceData {
    pub r: Vec<f64>,
    pub log_h: Vec<f64>,
}

impl RecurrenceData {
    /// Build from R_1..R_n and log h_0.
    pub fn from_r(r: Vec<f64>, log_h0: f64) -> Result<Self> {
        if r.is_empty() || r[0] != 0.0 {
            return Err(Error::InvalidInput("R must start with R_0 = 0".into()));
        }
        if let Some((i, v)) = r.iter().enumerate().skip(1).find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::InvalidInput(format!("R_{i} = {v} is not positive")));
        }
        let mut log_h = Vec::with_capacity(r.len());
        log_h.push(log_h0);
        for k in 1..r.len() {
            log_h.push(log_h[k - 1] + r[k].ln());
        }
        Ok(Self { r, log_h })
    }

    /// Largest index n with R_n stored.
    pub fn n_max(&self) -> usize {
        self.r.len() - 1
    }

    pub fn to_table(&self, params: &ModelParams) -> Table {
        let mut t = Table::new(&["n", "R_n", "log_h_n"]);
        t.comment(format!("recurrence t={} g={} N={}", params.t, params.g, params.size));
        for n in 0..self.r.len() {
            t.push(vec![n as f64, self.r[n], self.log_h[n]]);
        }
        t
    }
}

fn stieltjes_on(rule: &QuadratureRule, params: &ModelParams, n_max: usize, check_gram: bool) -> Result<RecurrenceData> {
    let m = rule.len();
    let mass: f64 = rule.measure.iter().sum();
    let mut prev = vec![0.0; m];
    let mut cur: Vec<f64> = rule.measure.iter().map(|w| (w / mass).sqrt()).collect();
    let mut r = vec![0.0; n_max + 1];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    if check_gram {
        basis.push(cur.clone());
    }
    let mut b_prev = 0.0;
    for k in 0..n_max {
        let a: f64 = (0..m).map(|i| rule.nodes[i] * cur[i] * cur[i]).sum();
        let mut next: Vec<f64> = (0..m)
            .map(|i| (rule.nodes[i] - a) * cur[i] - b_prev * prev[i])
            .collect();
        let b = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(b > 0.0) {
            return Err(Error::Domain(format!("Stieltjes breakdown at degree {}", k + 1)));
        }
        next.iter_mut().for_each(|v| *v /= b);
        r[k + 1] = b * b;
        b_prev = b;
        prev = std::mem::replace(&mut cur, next);
        if check_gram {
            basis.push(cur.clone());
        }
    }
    if check_gram {
        let mut defect = 0.0f64;
        for j in 0..basis.len() {
            for k in 0..=j {
                let g: f64 = basis[j].iter().zip(&basis[k]).map(|(x, y)| x * y).sum();
                let e = if j == k { (g - 1.0).abs() } else { g.abs() };
                defect = defect.max(e);
            }
        }
        if defect > GRAM_BOUND {
            return Err(Error::Orthogonality {
                defect,
                bound: GRAM_BOUND,
            });
        }
    }
    RecurrenceData::from_r(r, rule.log_mass(params))
}

/// Recurrence coefficients on a given rule, with the Gram check.
pub fn stieltjes_with_rule(rule: &QuadratureRule, params: &ModelParams, n_max: usize) -> Result<RecurrenceData> {
    stieltjes_on(rule, params, n_max, true)
}

/// Recurrence coefficients up to `n_max`, stable to `tol` under rule refinement.
pub fn stieltjes_recurrence(params: &ModelParams, n_max: usize, tol: f64) -> Result<RecurrenceData> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    let mut rule = QuadratureRule::for_degree(params, n_max, tol);
    let mut coarse = stieltjes_on(&rule, params, n_max, false)?;
    let mut change = f64::INFINITY;
    for _ in 0..4 {
        rule = rule.refined(params);
        let fine = stieltjes_on(&rule, params, n_max, false)?;
        change = coarse
            .r
            .iter()
            .zip(&fine.r)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        coarse = fine;
        if change <= tol {
            return stieltjes_with_rule(&rule, params, n_max);
        }
    }
    Err(Error::Convergence {
        what: "Stieltjes rule refinement".into(),
        iterations: 4,
        residual: change,
    })
}

/// ψ_n and ψ_n' sharing a common scale: value = mantissa · e^{log_scale}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiPair {
    pub psi_n: Complex64,
    pub psi_prev: Complex64,
    pub dpsi_n: Complex64,
    pub dpsi_prev: Complex64,
    pub log_scale: f64,
}

impl PsiPair {
    fn factor(&self) -> f64 {
        self.log_scale.exp()
    }

    /// (ψ_n, ψ_{n-1}) as plain numbers (may underflow).
    pub fn values(&self) -> (Complex64, Complex64) {
        let f = self.factor();
        (self.psi_n * f, self.psi_prev * f)
    }

    pub fn derivatives(&self) -> (Complex64, Complex64) {
        let f = self.factor();
        (self.dpsi_n * f, self.dpsi_prev * f)
    }
}

/// Evaluates ψ_n(z) = h_n^{-1/2} P_n(z) e^{-N V(z)/2} by upward recurrence.
#[derive(Debug, Clone)]
pub struct PsiEvaluator {
    pub recurrence: RecurrenceData,
    pub params: ModelParams,
    sqrt_r: Vec<f64>,
}

impl PsiEvaluator {
    pub fn new(recurrence: RecurrenceData, params: ModelParams) -> Self {
        let sqrt_r = recurrence.r.iter().map(|r| r.sqrt()).collect();
        Self {
            recurrence,
            params,
            sqrt_r,
        }
    }

    pub fn n_max(&self) -> usize {
        self.recurrence.n_max()
    }

    /// Run the recurrence to degree n, calling `visit(k, ψ_k, ψ_k', log_scale)` for each k.
    fn run<F: FnMut(usize, Complex64, Complex64, f64)>(&self, n: usize, z: Complex64, mut visit: F) -> Result<PsiPair> {
        if n > self.n_max() {
            return Err(Error::InvalidInput(format!(
                "degree {n} exceeds available recurrence data ({})",
                self.n_max()
            )));
        }
        let nf = self.params.nf();
        let e = -0.5 * nf * self.params.potential_c(z) - 0.5 * self.recurrence.log_h[0];
        let mut log_scale = e.re;
        let phase = Complex64::from_polar(1.0, e.im);
        let vp = self.params.t * z + self.params.g * z * z * z;
        let mut p0 = phase;
        let mut d0 = -0.5 * nf * vp * p0;
        let (mut pm, mut dm) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        visit(0, p0, d0, log_scale);
        for k in 0..n {
            // z ψ_k = √R_{k+1} ψ_{k+1} + √R_k ψ_{k-1}
            let s1 = self.sqrt_r[k + 1];
            let s0 = self.sqrt_r[k];
            let p1 = (z * p0 - s0 * pm) / s1;
            let d1 = (p0 + z * d0 - s0 * dm) / s1;
            pm = p0;
            dm = d0;
            p0 = p1;
            d0 = d1;
            let mag = p0.norm().max(d0.norm() / (1.0 + nf));
            if mag > RESCALE || (mag < 1.0 / RESCALE && mag > 0.0) {
                let s = 1.0 / mag;
                p0 *= s;
                d0 *= s;
                pm *= s;
                dm *= s;
                log_scale += mag.ln();
            }
            visit(k + 1, p0, d0, log_scale);
        }
        Ok(PsiPair {
            psi_n: p0,
            psi_prev: pm,
            dpsi_n: d0,
            dpsi_prev: dm,
            log_scale,
        })
    }

    /// (ψ_n, ψ_{n-1}) and derivatives at complex z, in scaled form.
    pub fn pair(&self, n: usize, z: Complex64) -> Result<PsiPair> {
        self.run(n, z, |_, _, _, _| {})
    }

    pub fn psi(&self, n: usize, z: Complex64) -> Result<Complex64> {
        Ok(self.pair(n, z)?.values().0)
    }

    pub fn psi_real(&self, n: usize, x: f64) -> Result<f64> {
        Ok(self.psi(n, Complex64::new(x, 0.0))?.re)
    }

    /// log|ψ_n(x)| and the sign of ψ_n(x) for real x.
    pub fn log_psi_real(&self, n: usize, x: f64) -> Result<(f64, f64)> {
        let p = self.pair(n, Complex64::new(x, 0.0))?;
        Ok((p.psi_n.re.abs().ln() + p.log_scale, p.psi_n.re.signum()))
    }

    /// ψ_0(x)..ψ_n(x) for real x.
    pub fn all_real(&self, n: usize, x: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n + 1);
        self.run(n, Complex64::new(x, 0.0), |_, p, _, s| out.push(p.re * s.exp()))?;
        Ok(out)
    }

    /// Christoffel–Darboux kernel Q_N(z, w) = Σ_{k<N} ψ_k(z) ψ_k(w).
    pub fn cd_kernel(&self, level: usize, z: f64, w: f64) -> Result<f64> {
        if level == 0 || level > self.n_max() {
            return Err(Error::InvalidInput(format!(
                "kernel level {level} outside 1..={}",
                self.n_max()
            )));
        }
        let s = self.sqrt_r[level];
        if (z - w).abs() < 1e-6 {
            let x = 0.5 * (z + w);
            let p = self.pair(level, Complex64::new(x, 0.0))?;
            let f = (2.0 * p.log_scale).exp();
            return Ok(s * (p.dpsi_n.re * p.psi_prev.re - p.dpsi_prev.re * p.psi_n.re) * f);
        }
        let a = self.pair(level, Complex64::new(z, 0.0))?;
        let b = self.pair(level, Complex64::new(w, 0.0))?;
        let f = (a.log_scale + b.log_scale).exp();
        Ok(s * (a.psi_n.re * b.psi_prev.re - a.psi_prev.re * b.psi_n.re) * f / (z - w))
    }

    /// Q_N(z, w) by direct summation of ψ_k products.
    pub fn cd_kernel_sum(&self, level: usize, z: f64, w: f64) -> Result<f64> {
        let a = self.all_real(level - 1, z)?;
        let b = self.all_real(level - 1, w)?;
        Ok(a.iter().zip(&b).map(|(x, y)| x * y).sum())
    }

    /// det[Q_N(z_i, z_j)] for pairwise distinct points.
    pub fn correlation(&self, level: usize, points: &[f64]) -> Result<f64> {
        for i in 0..points.len() {
            for j in 0..i {
                if (points[i] - points[j]).abs() <= 1e-9 {
                    return Err(Error::InvalidInput(
                        "coincident points: use the diagonal limit of the kernel determinant".into(),
                    ));
                }
            }
        }
        let m = points.len();
        let mut a = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i..m {
                let q = self.cd_kernel(level, points[i], points[j])?;
                a[i][j] = q;
                a[j][i] = q;
            }
        }
        Ok(determinant(a))
    }

    /// ψ_0..ψ_{n} sampled on an x-grid as a table.
    pub fn to_table(&self, n: usize, xs: &[f64]) -> Result<Table> {
        let mut cols = vec!["x".to_string()];
        cols.extend((0..=n).map(|k| format!("psi_{k}")));
        let refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
        let mut t = Table::new(&refs);
        t.comment(format!(
            "psi t={} g={} N={}",
            self.params.t, self.params.g, self.params.size
        ));
        for &x in xs {
            let mut row = vec![x];
            row.extend(self.all_real(n, x)?);
            t.push(row);
        }
        Ok(t)
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let m = a.len();
    let mut det = 1.0;
    for c in 0..m {
        let p = (c..m)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .expect("nonempty column");
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for i in c + 1..m {
            let f = a[i][c] / a[c][c];
            for j in c..m {
                a[i][j] -= f * a[c][j];
            }
        }
    }
    det
}

type Mat2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn mat_norm(a: &Mat2) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, x| m.max(x.norm()))
}

/// Lax matrix A_n(z) with Ψ⃗' = N A_n Ψ⃗, Ψ⃗ = (ψ_n, ψ_{n-1}).
pub fn lax_a(params: &ModelParams, r: &[f64], n: usize, z: Complex64) -> Mat2 {
    let (t, g) = (params.t, params.g);
    let (rp, rc, rn) = (r[n - 1], r[n], r[n + 1]);
    let sr = rc.sqrt();
    let a11 = -(0.5 * t * z + 0.5 * g * z * z * z + g * z * rc);
    let a12 = sr * (t + g * z * z + g * rc + g * rn);
    let a21 = -sr * (t + g * z * z + g * rp + g * rc);
    [[a11, a12], [a21, -a11]]
}

/// Shift matrix U_n(z) with Ψ⃗_{n+1} = U_n Ψ⃗_n.
pub fn lax_u(r: &[f64], n: usize, z: Complex64) -> Mat2 {
    let s1 = r[n + 1].sqrt();
    let zero = Complex64::new(0.0, 0.0);
    [
        [z / s1, Complex64::new(-r[n].sqrt() / s1, 0.0)],
        [Complex64::new(1.0, 0.0), zero],
    ]
}

/// Residuals of the Lax equations at `n` over a grid of complex points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaxResiduals {
    /// max ‖U_n' - N A_{n+1} U_n + N U_n A_n‖
    pub compatibility: f64,
    /// max ‖Ψ⃗_n' - N A_n Ψ⃗_n‖ / (N ‖A_n‖ ‖Ψ⃗_n‖)
    pub psi_equation: f64,
}

pub fn lax_residuals(eval: &PsiEvaluator, n: usize, z_grid: &[Complex64]) -> Result<LaxResiduals> {
    let r = &eval.recurrence.r;
    if n < 1 || n + 2 >= r.len() {
        return Err(Error::InvalidInput(format!(
            "n = {n} needs 1 ≤ n ≤ {}",
            r.len().saturating_sub(3)
        )));
    }
    let params = &eval.params;
    let nf = params.nf();
    let mut compat = 0.0f64;
    let mut psi_res = 0.0f64;
    for &z in z_grid {
        let scale = 1.0 + z.norm();
        let h = 1e-4 * scale;
        let stencil = |f: &dyn Fn(Complex64) -> Mat2| -> Mat2 {
            let fm2 = f(z - 2.0 * h);
            let fm1 = f(z - h);
            let fp1 = f(z + h);
            let fp2 = f(z + 2.0 * h);
            let mut d = [[Complex64::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    d[i][j] = (fm2[i][j] - 8.0 * fm1[i][j] + 8.0 * fp1[i][j] - fp2[i][j]) / (12.0 * h);
                }
            }
            d
        };
        let du = stencil(&|x| lax_u(r, n, x));
        let u = lax_u(r, n, z);
        let a_n = lax_a(params, r, n, z);
        let a_next = lax_a(params, r, n + 1, z);
        let left = mat_mul(&a_next, &u);
        let right = mat_mul(&u, &a_n);
        let mut res = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                res[i][j] = du[i][j] - nf * left[i][j] + nf * right[i][j];
            }
        }
        compat = compat.max(mat_norm(&res));

        let p = eval.pair(n, z)?;
        let (v0, v1) = (p.psi_n, p.psi_prev);
        let e0 = p.dpsi_n - nf * (a_n[0][0] * v0 + a_n[0][1] * v1);
        let e1 = p.dpsi_prev - nf * (a_n[1][0] * v0 + a_n[1][1] * v1);
        let denom = nf * mat_norm(&a_n) * v0.norm().max(v1.norm());
        psi_res = psi_res.max(e0.norm().max(e1.norm()) / denom);
    }
    Ok(LaxResiduals {
        compatibility: compat,
        psi_equation: psi_res,
    })
}

/// Quadrature-oracle evaluator at (params, n_max) with refinement tolerance `tol`.
pub fn oracle(params: &ModelParams, n_max: usize, tol: f64) -> Result<PsiEvaluator> {
    Ok(PsiEvaluator::new(stieltjes_recurrence(params, n_max, tol)?, *params))
}
