//! Airy function Ai and its derivative for real and complex arguments.
//!
//! On `|x| <= 12` values come from a table of (Ai, Ai') at spacing 1/4,
//! produced by Taylor-stepping the Airy equation inward from the large-|x|
//! asymptotic expansions (the stable direction on both half-lines), and are
//! then Taylor-expanded from the nearest node. Beyond the table the
//! exponential (x > 0) or oscillatory (x < 0) asymptotic series are used.
//! Complex arguments with `|z| < 12` are reached by Taylor-stepping from the
//! nearest real node along a vertical path.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

const TABLE_EDGE: f64 = 12.0;
const TABLE_STEP: f64 = 0.25;

/// Ai(0).
pub const AI0: f64 = 0.355_028_053_887_817_24;
/// Ai'(0).
pub const AIP0: f64 = -0.258_819_403_792_806_8;

struct Table {
    ai: Vec<f64>,
    aip: Vec<f64>,
}

fn node(j: usize) -> f64 {
    -TABLE_EDGE + j as f64 * TABLE_STEP
}

fn node_count() -> usize {
    (2.0 * TABLE_EDGE / TABLE_STEP).round() as usize + 1
}

/// Taylor coefficients of the Airy-equation solution through (x0, y0, y0').
fn taylor_real(x0: f64, y0: f64, y1: f64, h: f64) -> (f64, f64) {
    let (mut am1, mut a0, mut a1) = (0.0, y0, y1);
    let mut val = y0 + y1 * h;
    let mut der = y1;
    let mut hk = h; // h^(k+1) for the coefficient a_{k+2} below
    let scale = y0.abs() + y1.abs() * h.abs().max(1e-300);
    for k in 0..200 {
        let a2 = (x0 * a0 + am1) / ((k + 2) as f64 * (k + 1) as f64);
        der += (k + 2) as f64 * a2 * hk;
        hk *= h;
        let term = a2 * hk;
        val += term;
        am1 = a0;
        a0 = a1;
        a1 = a2;
        if k > 4 && term.abs() < 1e-18 * scale && (a2 * hk).abs() < 1e-18 * scale {
            break;
        }
    }
    (val, der)
}

fn taylor_complex(z0: Complex64, y0: Complex64, y1: Complex64, h: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let (mut am1, mut a0, mut a1) = (zero, y0, y1);
    let mut val = y0 + h * y1;
    let mut der = y1;
    let mut hk = h;
    let mut small = 0;
    for k in 0..400 {
        let a2 = (z0 * a0 + am1) / ((k + 2) as f64 * (k + 1) as f64);
        der += hk * a2 * (k + 2) as f64;
        hk *= h;
        let term = hk * a2;
        val += term;
        am1 = a0;
        a0 = a1;
        a1 = a2;
        if term.norm() < 1e-18 * val.norm() {
            small += 1;
            if small > 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    (val, der)
}

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| {
        let n = node_count();
        let mid = n / 2;
        let mut ai = vec![0.0; n];
        let mut aip = vec![0.0; n];
        // right half: march down from +edge
        let (a, d) = asymptotic_positive(TABLE_EDGE);
        ai[n - 1] = a;
        aip[n - 1] = d;
        for j in (mid..n - 1).rev() {
            // split the step to keep every Taylor expansion short
            let (mut y, mut yp) = (ai[j + 1], aip[j + 1]);
            let mut x = node(j + 1);
            for _ in 0..2 {
                let (ny, nyp) = taylor_real(x, y, yp, -TABLE_STEP / 2.0);
                y = ny;
                yp = nyp;
                x -= TABLE_STEP / 2.0;
            }
            ai[j] = y;
            aip[j] = yp;
        }
        // left half: march up from -edge
        let (a, d) = asymptotic_negative(TABLE_EDGE);
        ai[0] = a;
        aip[0] = d;
        for j in 1..mid {
            let (mut y, mut yp) = (ai[j - 1], aip[j - 1]);
            let mut x = node(j - 1);
            for _ in 0..2 {
                let (ny, nyp) = taylor_real(x, y, yp, TABLE_STEP / 2.0);
                y = ny;
                yp = nyp;
                x += TABLE_STEP / 2.0;
            }
            ai[j] = y;
            aip[j] = yp;
        }
        Table { ai, aip }
    })
}

fn u_coeffs(n: usize) -> Vec<f64> {
    let mut u = vec![1.0; n];
    for k in 1..n {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
    }
    u
}

fn coeffs() -> &'static (Vec<f64>, Vec<f64>) {
    static C: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    C.get_or_init(|| {
        let u = u_coeffs(60);
        let v: Vec<f64> = u
            .iter()
            .enumerate()
            .map(|(k, uk)| {
                let kf = k as f64;
                -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk
            })
            .collect();
        (u, v)
    })
}

/// Sum Σ (sign)^k c_k ζ^-k up to the smallest term.
fn asym_sum(c: &[f64], inv: Complex64, alternate: bool, stride: usize, offset: usize) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    let inv_s = inv.powu(stride as u32);
    let mut p = inv.powu(offset as u32);
    let mut sign = 1.0;
    let mut k = offset;
    while k < c.len() {
        let term = p * (c[k] * sign);
        let mag = term.norm();
        if mag > last {
            break;
        }
        s += term;
        if mag < 1e-18 * s.norm() {
            break;
        }
        last = mag;
        p *= inv_s;
        if alternate {
            sign = -sign;
        }
        k += stride;
    }
    s
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let (a, d) = asymptotic_exp(Complex64::new(x, 0.0));
    (a.re, d.re)
}

fn asymptotic_negative(x: f64) -> (f64, f64) {
    let (a, d) = asymptotic_osc(Complex64::new(x, 0.0));
    (a.re, d.re)
}

/// Exponential-type expansion, valid for |arg z| < π.
fn asymptotic_exp(z: Complex64) -> (Complex64, Complex64) {
    let (u, v) = coeffs();
    let zeta = z.powf(1.5) * (2.0 / 3.0);
    let inv = -zeta.inv();
    let q = z.powf(0.25);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let su = asym_sum(u, inv, false, 1, 0);
    let sv = asym_sum(v, inv, false, 1, 0);
    (e / q * su, -e * q * sv)
}

/// Oscillatory expansion of Ai(-w), Ai'(-w), valid for |arg w| < 2π/3.
fn asymptotic_osc(w: Complex64) -> (Complex64, Complex64) {
    let (u, v) = coeffs();
    let zeta = w.powf(1.5) * (2.0 / 3.0);
    let inv = zeta.inv();
    let q = w.powf(0.25);
    let ph = zeta - FRAC_PI_4;
    let (c, s) = (ph.cos(), ph.sin());
    let ue = asym_sum(u, inv, true, 2, 0);
    let uo = asym_sum(u, inv, true, 2, 1);
    let ve = asym_sum(v, inv, true, 2, 0);
    let vo = asym_sum(v, inv, true, 2, 1);
    let sp = PI.sqrt();
    let ai = (c * ue + s * uo) / (q * sp);
    let aip = q / sp * (s * ve - c * vo);
    (ai, aip)
}

/// Ai(x) and Ai'(x) for real x.
pub fn airy_real(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x > TABLE_EDGE {
        return asymptotic_positive(x);
    }
    if x < -TABLE_EDGE {
        return asymptotic_negative(-x);
    }
    let t = table();
    let j = ((x + TABLE_EDGE) / TABLE_STEP).round() as usize;
    let j = j.min(node_count() - 1);
    let x0 = node(j);
    taylor_real(x0, t.ai[j], t.aip[j], x - x0)
}

pub fn ai(x: f64) -> f64 {
    airy_real(x).0
}

pub fn aip(x: f64) -> f64 {
    airy_real(x).1
}

/// Ai(z) and Ai'(z) for complex z.
pub fn airy(z: Complex64) -> (Complex64, Complex64) {
    if z.im == 0.0 {
        let (a, d) = airy_real(z.re);
        return (Complex64::new(a, 0.0), Complex64::new(d, 0.0));
    }
    let r = z.norm();
    if r >= TABLE_EDGE {
        if z.arg().abs() <= 2.0 * PI / 3.0 {
            return asymptotic_exp(z);
        }
        let (a, d) = asymptotic_osc(-z);
        return (a, -d);
    }
    // march vertically from the nearest real node, then across the remaining offset
    let t = table();
    let j = ((z.re + TABLE_EDGE) / TABLE_STEP)
        .round()
        .clamp(0.0, (node_count() - 1) as f64) as usize;
    let x0 = node(j);
    let mut base = Complex64::new(x0, 0.0);
    let mut y = Complex64::new(t.ai[j], 0.0);
    let mut yp = Complex64::new(t.aip[j], 0.0);
    let steps = (z.im.abs() / 0.5).ceil().max(1.0) as usize;
    let dy = Complex64::new(0.0, z.im / steps as f64);
    for _ in 0..steps {
        let (ny, nyp) = taylor_complex(base, y, yp, dy);
        y = ny;
        yp = nyp;
        base += dy;
    }
    taylor_complex(base, y, yp, z - base)
}
