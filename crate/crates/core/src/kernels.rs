//! Universal limit kernels and finite-N scaling checks of the Christoffel–Darboux kernel.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::orthopoly::{oracle, PsiEvaluator};
use crate::painleve2::{airy_real, HMGrid};
use crate::psi_cp::{critical_kernel, solve_phi, PhiSolution};
use crate::semiclassics::{zeta_maps, WkbData};
use crate::table::Table;

/// Below this separation kernels switch to their confluent form at the midpoint.
pub const CONFLUENT_GAP: f64 = 1e-6;

/// sin(π(u - v)) / (π(u - v)); 1 on the diagonal.
pub fn sine_kernel(u: f64, v: f64) -> f64 {
    let x = PI * (u - v);
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// (Ai(u)Ai'(v) - Ai(v)Ai'(u)) / (u - v); Ai'(u)² - u Ai(u)² on the diagonal.
pub fn airy_kernel(u: f64, v: f64) -> f64 {
    if (u - v).abs() < CONFLUENT_GAP {
        let m = 0.5 * (u + v);
        let (a, d) = airy_real(m);
        return d * d - m * a * a;
    }
    let (au, du) = airy_real(u);
    let (av, dv) = airy_real(v);
    (au * dv - av * du) / (u - v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelKind {
    Sine,
    Airy,
    Critical,
    FiniteN,
}

/// A kernel together with the data it needs.
#[derive(Debug, Clone, Copy)]
pub enum KernelEval<'a> {
    Sine,
    Airy,
    Critical(&'a PhiSolution),
    /// (1/s) Q_N(center + u/s, center + v/s) with s = scale.
    FiniteN {
        eval: &'a PsiEvaluator,
        level: usize,
        center: f64,
        scale: f64,
    },
}

impl KernelEval<'_> {
    pub fn kind(&self) -> KernelKind {
        match self {
            KernelEval::Sine => KernelKind::Sine,
            KernelEval::Airy => KernelKind::Airy,
            KernelEval::Critical(_) => KernelKind::Critical,
            KernelEval::FiniteN { .. } => KernelKind::FiniteN,
        }
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<f64> {
        match *self {
            KernelEval::Sine => Ok(sine_kernel(u, v)),
            KernelEval::Airy => Ok(airy_kernel(u, v)),
            KernelEval::Critical(phi) => critical_kernel(phi, u, v),
            KernelEval::FiniteN {
                eval,
                level,
                center,
                scale,
            } => Ok(eval.cd_kernel(level, center + u / scale, center + v / scale)? / scale),
        }
    }

    /// Kernel samples (u, v, K) on the product grid.
    pub fn to_table(&self, grid: &[f64]) -> Result<Table> {
        let mut t = Table::new(&["u", "v", "K"]);
        t.comment(format!("kernel {:?}", self.kind()));
        for &u in grid {
            for &v in grid {
                t.push(vec![u, v, self.eval(u, v)?]);
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingRegime {
    Bulk,
    Edge,
    Critical,
}

impl ScalingRegime {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "bulk" => ScalingRegime::Bulk,
            "edge" => ScalingRegime::Edge,
            "critical" => ScalingRegime::Critical,
            _ => return Err(Error::InvalidInput(format!("unknown regime {s}"))),
        })
    }
}

/// Coupling t = t_c + c_0 y N^{-2/3} near the critical point, with c_0 taken at t_c.
pub fn critical_params(g: f64, y: f64, size: usize) -> Result<ModelParams> {
    let base = ModelParams::new(-2.0 * g.sqrt(), g, size)?;
    let c0 = base.derive_constants()?.c0;
    ModelParams::new(base.t + c0 * y * (size as f64).powf(-2.0 / 3.0), g, size)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub regime: ScalingRegime,
    #[serde(rename = "N")]
    pub size: usize,
    pub y: f64,
    pub t: f64,
    pub center: f64,
    /// Local scale c N^γ.
    pub scale: f64,
    pub sup_error: f64,
}

/// Options for a scaling check; `center = None` picks z_0/2, z0N or 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOptions {
    pub center: Option<f64>,
    pub offsets: Vec<f64>,
    pub oracle_tol: f64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            center: None,
            offsets: (0..=8).map(|i| -2.0 + 0.5 * i as f64).collect(),
            oracle_tol: 1e-13,
        }
    }
}

/// Compare the rescaled Q_N at t = t_c + c_0yN^{-2/3}, n = N with its limit kernel.
pub fn scaling_limit_check(
    regime: ScalingRegime,
    g: f64,
    size: usize,
    y: f64,
    opts: &ScalingOptions,
    hm: &HMGrid,
) -> Result<ScalingReport> {
    Ok(scaling_limit_grid(regime, g, size, y, opts, hm)?.0)
}

/// As `scaling_limit_check`, also returning (u, v, K_N, K) on the offset grid.
pub fn scaling_limit_grid(
    regime: ScalingRegime,
    g: f64,
    size: usize,
    y: f64,
    opts: &ScalingOptions,
    hm: &HMGrid,
) -> Result<(ScalingReport, Table)> {
    if opts.offsets.is_empty() {
        return Err(Error::InvalidInput("no offsets given".into()));
    }
    let p = critical_params(g, y, size)?;
    let nf = p.nf();
    let eval = oracle(&p, size + 1, opts.oracle_tol)?;
    let phi;
    let (center, scale, limit) = match regime {
        ScalingRegime::Bulk => {
            let z0 = p.derive_constants()?.z0;
            let c = opts.center.unwrap_or(0.5 * z0);
            let rho = p.density(c);
            if rho <= 0.0 {
                return Err(Error::Domain(format!("center {c} lies outside the support")));
            }
            (c, rho * nf, KernelEval::Sine)
        }
        ScalingRegime::Edge => {
            let wkb = WkbData::build(&p, size, hm)?;
            let c = opts.center.unwrap_or(wkb.z0n);
            (c, wkb.tp_deriv(wkb.z0n)? * nf.powf(2.0 / 3.0), KernelEval::Airy)
        }
        ScalingRegime::Critical => {
            let yn = p.y_of(size)?;
            phi = solve_phi(hm, yn, (size % 4) as u8, Default::default())?;
            let zeta = zeta_maps(&p, yn)?;
            let c = opts.center.unwrap_or(0.0);
            (c, zeta.zeta0_prime0() * nf.cbrt(), KernelEval::Critical(&phi))
        }
    };
    let finite = KernelEval::FiniteN {
        eval: &eval,
        level: size,
        center,
        scale,
    };
    let mut table = Table::new(&["u", "v", "K_N", "K_limit"]);
    table.comment(format!(
        "kernel regime={regime:?} N={size} y={y} t={} center={center} scale={scale}",
        p.t
    ));
    let mut sup = 0.0f64;
    for &u in &opts.offsets {
        for &v in &opts.offsets {
            let (kn, kl) = (finite.eval(u, v)?, limit.eval(u, v)?);
            sup = sup.max((kn - kl).abs());
            table.push(vec![u, v, kn, kl]);
        }
    }
    let report = ScalingReport {
        regime,
        size,
        y,
        t: p.t,
        center,
        scale,
        sup_error: sup,
    };
    Ok((report, table))
}

/// Q_N(z, z)/N, the finite-N one-point density.
pub fn density_from_kernel(eval: &PsiEvaluator, z: f64) -> Result<f64> {
    let n = eval.params.size;
    Ok(eval.cd_kernel(n, z, z)? / eval.params.nf())
}

/// Kernel density and equilibrium density on a grid, from one oracle at n_max = N.
pub fn density_profile(params: &ModelParams, zs: &[f64], tol: f64) -> Result<Table> {
    let eval = oracle(params, params.size, tol)?;
    let mut t = Table::new(&["z", "kernel_density", "equilibrium_density"]);
    t.comment(format!("density t={} g={} N={}", params.t, params.g, params.size));
    for &z in zs {
        t.push(vec![z, density_from_kernel(&eval, z)?, params.density(z)]);
    }
    Ok(t)
}

/// First positive zero of v ↦ K(0, v), bracketed on a grid of step h.
pub fn first_zero<F: Fn(f64) -> Result<f64>>(k: F, h: f64, v_max: f64) -> Result<f64> {
    let mut a = h;
    let mut fa = k(a)?;
    while a < v_max {
        let b = a + h;
        let fb = k(b)?;
        if fa * fb <= 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                let fm = k(m)?;
                if flo * fm <= 0.0 {
                    hi = m;
                } else {
                    lo = m;
                    flo = fm;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    Err(Error::Domain(format!("no zero found below {v_max}")))
}
