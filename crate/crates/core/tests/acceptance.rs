//! Acceptance suite: one line per criterion, nonzero exit if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use qcrit::freud;
use qcrit::kernels::{scaling_limit_check, KernelEval, ScalingOptions, ScalingRegime};
use qcrit::model::ModelParams;
use qcrit::orthopoly::{lax_residuals, oracle, stieltjes_recurrence, QuadratureRule};
use qcrit::painleve2::{ai, default_grid, solve_hastings_mcleod};
use qcrit::psi_cp::{fit_slope, solve_phi, solve_phi_phase, PhiOptions};
use qcrit::semiclassics::{compare_harness, CompareOptions, Region, WkbData};

type Outcome = Result<(bool, String), String>;

struct Criterion {
    id: usize,
    name: &'static str,
    limit_s: f64,
    run: fn() -> Outcome,
}

fn params(t: f64, n: usize) -> ModelParams {
    ModelParams::new(t, 1.0, n).unwrap()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rate(sizes: &[usize], errs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = sizes
        .iter()
        .zip(errs)
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .collect();
    -fit_slope(&pts)
}

fn c1_oracle_equivalence() -> Outcome {
    let p = params(-1.0, 40);
    let v = freud::solve(&p, 60, 1e-13).map_err(err)?;
    let o = stieltjes_recurrence(&p, 60, 1e-13).map_err(err)?;
    let d = v.r.iter().zip(&o.r).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    Ok((d <= 1e-8, format!("max |ΔR| = {d:.2e} (bound 1e-8)")))
}

fn c2_branch_merge() -> Outcome {
    let p = params(-1.0, 400);
    let t = freud::solve(&p, 200, 1e-13).map_err(err)?;
    let split = (1..=90)
        .map(|n| freud::branch_gap(&t.r, n))
        .fold(f64::INFINITY, f64::min);
    let merged = (110..200).map(|n| freud::branch_gap(&t.r, n)).fold(0.0, f64::max);
    let c = freud::merge_index(&t.r, 20, 80);
    let ok = split > 0.1 && merged < 0.05 && (c - 100.0).abs() <= 5.0;
    Ok((
        ok,
        format!("min gap n≤90 = {split:.3} (> 0.1), max gap n≥110 = {merged:.2e} (< 0.05), merge at {c:.1} (100 ± 5)"),
    ))
}

fn c3_ansatz() -> Outcome {
    let hm = default_grid();
    let sizes = [100usize, 200, 400, 800];
    let mut errs = Vec::new();
    for &size in &sizes {
        let p = params(-1.0, size);
        let ns: Vec<usize> = (1..size)
            .filter(|&n| p.y_of(n).map(|y| y.abs() <= 2.0).unwrap_or(false))
            .collect();
        let hi = *ns.last().ok_or("empty window")?;
        let t = freud::solve(&p, hi + 1, 1e-13).map_err(err)?;
        let mut worst = 0.0f64;
        for &n in &ns {
            worst = worst.max((t.r[n] - freud::ansatz_r(&p, n, hm).map_err(err)?).abs());
        }
        errs.push(worst);
    }
    let scaled: Vec<String> = errs
        .iter()
        .zip(&sizes)
        .map(|(e, &n)| format!("{:.3}", e * n as f64))
        .collect();
    let r = rate(&sizes, &errs);
    Ok((
        r >= 0.9,
        format!("max|R-R⁰|·N = [{}], exponent {r:.3} (≥ 0.9)", scaled.join(", ")),
    ))
}

fn c4_hastings_mcleod() -> Outcome {
    let g = default_grid();
    let res = g.painleve_residual();
    let coarse = solve_hastings_mcleod(-16.0, 10.0, 2600, 1e-13).map_err(err)?;
    let du0 = (g.u_at(0.0).map_err(err)? - coarse.u_at(0.0).map_err(err)?).abs();
    let right = g.u_at(5.0).map_err(err)? / ai(5.0);
    let left = g.u_at(-6.0).map_err(err)? / 3f64.sqrt();
    let d_pos = g.d.iter().all(|&d| d > 0.0);
    let ident = (0..g.y.len())
        .map(|i| (g.d_identity(i) - g.d[i]).abs())
        .fold(0.0, f64::max);
    let ok = res <= 1e-10
        && du0 <= 1e-7
        && (0.9999..=1.0001).contains(&right)
        && (1.0 - 3e-3..=1.0).contains(&left)
        && d_pos
        && ident <= 1e-7;
    Ok((
        ok,
        format!(
            "residual {res:.1e}, Δu(0) under mesh doubling {du0:.1e}, u(5)/Ai(5) = {right:.6}, u(-6)/√3 = {left:.6}, D > 0: {d_pos}, identity {ident:.1e}"
        ),
    ))
}

fn c5_turning_points() -> Outcome {
    let g = default_grid();
    let y0 = g.find_y0().map_err(err)?;
    let roots =
        g.q.windows(2)
            .zip(g.y.windows(2))
            .filter(|(q, y)| y[0] > 0.0 && (q[0] < 0.0) != (q[1] < 0.0))
            .count();
    let below = g.turning_points(y0 - 0.05).map_err(err)?.s2_sq;
    let above = g.turning_points(y0 + 0.05).map_err(err)?.s2_sq;
    let tp = g.turning_points(-10.0).map_err(err)?;
    let e2 = (tp.s2_sq / 5.0 - 1.0).abs();
    let e1 = (tp.s1_sq / (-1.0 / 1600.0) - 1.0).abs();
    let ok = roots == 1 && y0 > 0.0 && below * above < 0.0 && e2 <= 0.05 && e1 <= 0.25;
    Ok((
        ok,
        format!("positive roots {roots}, y0 = {y0:.6}, s₂² sign change {below:.2e} → {above:.2e}, rel. err at y=-10: s₂² {e2:.3} (≤ 0.05), s₁² {e1:.3} (≤ 0.25)"),
    ))
}

fn c6_phi() -> Outcome {
    let hm = default_grid();
    let opts = PhiOptions::default();
    let mut defect = 0.0f64;
    for parity in 0..4u8 {
        let p = solve_phi(hm, 0.0, parity, opts).map_err(err)?;
        defect = defect.max(p.mismatch).max(p.parity_defect);
    }
    let (_, a) = solve_phi_phase(hm, 0.0, 0, 0, opts).map_err(err)?;
    let (_, b) = solve_phi_phase(hm, 0.0, 0, 1, opts).map_err(err)?;
    let w: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p[0] * q[1] - p[1] * q[0]).collect();
    let spread = w.iter().fold(0.0f64, |m, x| m.max((x - w[0]).abs()));
    let (y, h) = (0.3, 1e-3);
    let plus = solve_phi(hm, y + h, 0, opts).map_err(err)?;
    let minus = solve_phi(hm, y - h, 0, opts).map_err(err)?;
    let mid = solve_phi(hm, y, 0, opts).map_err(err)?;
    let mut dy = 0.0f64;
    for k in 0..=30 {
        let z = -3.0 + 0.2 * k as f64;
        let (pa, pb, pm) = (
            plus.eval(z).map_err(err)?,
            minus.eval(z).map_err(err)?,
            mid.eval(z).map_err(err)?,
        );
        let bm = mid.coeffs.b(z);
        for i in 0..2 {
            let fd = (pa[i] - pb[i]) / (2.0 * h);
            dy = dy.max((fd - (bm[i][0] * pm[0] + bm[i][1] * pm[1])).abs());
        }
    }
    let ok = defect <= 1e-3 && spread <= 1e-8 && dy <= 1e-4;
    Ok((
        ok,
        format!("parity/matching defect {defect:.1e} (≤ 1e-3), Wronskian spread {spread:.1e} (≤ 1e-8), y-derivative {dy:.1e} (≤ 1e-4)"),
    ))
}

fn c7_lax() -> Outcome {
    let p = params(-1.0, 40);
    let e = oracle(&p, 64, 1e-13).map_err(err)?;
    let grid: Vec<Complex64> = (0..10)
        .map(|k| Complex64::new(-1.2 + 0.27 * k as f64, 0.1 + 0.05 * k as f64))
        .collect();
    let mut worst = 0.0f64;
    for n in [1, 10, 20, 30, 60] {
        worst = worst.max(lax_residuals(&e, n, &grid).map_err(err)?.compatibility);
    }
    Ok((
        worst <= 1e-6 * 40.0,
        format!("max compatibility residual {worst:.1e} (≤ 4e-5)"),
    ))
}

fn c8_semiclassics() -> Outcome {
    let sizes = [100usize, 200, 400, 800];
    let rep = compare_harness(
        &params(-1.0, 100),
        &sizes,
        0,
        &Region::ALL,
        &CompareOptions::default(),
        default_grid(),
    )
    .map_err(err)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for region in Region::ALL {
        let r = rep.rate(region).unwrap_or(f64::NAN);
        let bound = if region == Region::Critical { 0.25 } else { 0.9 };
        ok &= r >= bound;
        parts.push(format!("{} {r:.3} (≥ {bound})", region.name()));
    }
    Ok((ok, format!("exponents: {}", parts.join(", "))))
}

fn c9_hn() -> Outcome {
    let hm = default_grid();
    let sizes = [40usize, 80, 120, 160, 200];
    let mut diffs = Vec::new();
    for &size in &sizes {
        let p = params(-1.0, size);
        let n = size / 4;
        let w = WkbData::build(&p, n, hm).map_err(err)?;
        let rec = stieltjes_recurrence(&p, n + 2, 1e-13).map_err(err)?;
        diffs.push((rec.log_h[n] - w.hn_asymptotic_normalized()).abs());
    }
    let offset = (2.0 * std::f64::consts::PI).ln();
    let non_growing = diffs.windows(2).all(|w| w[1] <= w[0] * 1.05);
    let bounded = diffs.iter().all(|&d| d < 0.05);
    let list: Vec<String> = diffs.iter().map(|d| format!("{d:.2e}")).collect();
    Ok((
        non_growing && bounded,
        format!(
            "|log h_n - 2N·I - ln 2π| = [{}] (bounded by 0.05, non-growing; normalization ln 2π = {offset:.4})",
            list.join(", ")
        ),
    ))
}

fn c10_universality() -> Outcome {
    let hm = default_grid();
    let opts = ScalingOptions::default();
    let bulk = scaling_limit_check(ScalingRegime::Bulk, 1.0, 200, 0.0, &opts, hm).map_err(err)?;
    let e1 = scaling_limit_check(ScalingRegime::Edge, 1.0, 100, 0.0, &opts, hm).map_err(err)?;
    let e2 = scaling_limit_check(ScalingRegime::Edge, 1.0, 200, 0.0, &opts, hm).map_err(err)?;
    let c1 = scaling_limit_check(ScalingRegime::Critical, 1.0, 100, 0.0, &opts, hm).map_err(err)?;
    let c2 = scaling_limit_check(ScalingRegime::Critical, 1.0, 400, 0.0, &opts, hm).map_err(err)?;
    let ok = bulk.sup_error <= 0.05 && e2.sup_error < e1.sup_error && c2.sup_error < c1.sup_error;
    Ok((
        ok,
        format!(
            "bulk N=200 at z={:.3}: {:.4} (≤ 0.05); edge {:.4} → {:.4} (N 100 → 200); critical {:.4} → {:.4} (N 100 → 400)",
            bulk.center, bulk.sup_error, e1.sup_error, e2.sup_error, c1.sup_error, c2.sup_error
        ),
    ))
}

fn c11_kernel_identities() -> Outcome {
    let p = params(-1.0, 40);
    let e = oracle(&p, 40, 1e-13).map_err(err)?;
    let rule = QuadratureRule::for_degree(&p, 40, 1e-13).refined(&p);
    let trace = rule.integrate(|x| e.cd_kernel(40, x, x).unwrap());
    let dt = (trace - 40.0).abs();
    let mut dp = 0.0f64;
    for (x, z) in [(0.3, -0.9), (-1.1, 0.4), (0.8, 0.8)] {
        let proj = rule.integrate(|y| e.cd_kernel(40, x, y).unwrap() * e.cd_kernel(40, y, z).unwrap());
        dp = dp.max((proj - e.cd_kernel(40, x, z).map_err(err)?).abs());
    }
    let phi = solve_phi(default_grid(), 0.0, 0, PhiOptions::default()).map_err(err)?;
    let mut sym = 0.0f64;
    let mut diag = 0.0f64;
    for k in [KernelEval::Sine, KernelEval::Airy, KernelEval::Critical(&phi)] {
        for i in 0..=16 {
            let u = -1.9 + 0.2375 * i as f64;
            let v = 0.45 - 0.8 * u;
            sym = sym.max((k.eval(u, v).map_err(err)? - k.eval(v, u).map_err(err)?).abs());
            let d = k.eval(u, u).map_err(err)?;
            for h in [1e-4, 1e-5] {
                diag = diag.max((k.eval(u - 0.5 * h, u + 0.5 * h).map_err(err)? - d).abs() / d.abs());
            }
        }
    }
    let ok = dt <= 1e-8 && dp <= 1e-8 && sym <= 1e-12 && diag <= 1e-6;
    Ok((
        ok,
        format!(
            "trace {dt:.1e}, projection {dp:.1e} (≤ 1e-8), symmetry {sym:.1e}, diagonal limits {diag:.1e} (≤ 1e-6)"
        ),
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "oracle equivalence",
            limit_s: 30.0,
            run: c1_oracle_equivalence,
        },
        Criterion {
            id: 2,
            name: "branch merge at N=400",
            limit_s: 120.0,
            run: c2_branch_merge,
        },
        Criterion {
            id: 3,
            name: "double-scaling ansatz rate",
            limit_s: 120.0,
            run: c3_ansatz,
        },
        Criterion {
            id: 4,
            name: "Hastings–McLeod solution",
            limit_s: 20.0,
            run: c4_hastings_mcleod,
        },
        Criterion {
            id: 5,
            name: "turning points of the quartic",
            limit_s: 20.0,
            run: c5_turning_points,
        },
        Criterion {
            id: 6,
            name: "critical Φ-system",
            limit_s: 60.0,
            run: c6_phi,
        },
        Criterion {
            id: 7,
            name: "Lax compatibility",
            limit_s: 30.0,
            run: c7_lax,
        },
        Criterion {
            id: 8,
            name: "semiclassical approximants",
            limit_s: 600.0,
            run: c8_semiclassics,
        },
        Criterion {
            id: 9,
            name: "h_n asymptotics",
            limit_s: 60.0,
            run: c9_hn,
        },
        Criterion {
            id: 10,
            name: "kernel scaling limits",
            limit_s: 900.0,
            run: c10_universality,
        },
        Criterion {
            id: 11,
            name: "kernel identities",
            limit_s: 30.0,
            run: c11_kernel_identities,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (ok && secs <= c.limit_s, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {}: {} [{secs:.1} s, limit {} s]",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            c.limit_s
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
