use qcrit::freud;
use qcrit::kernels::{density_from_kernel, sine_kernel, KernelEval};
use qcrit::model::ModelParams;
use qcrit::orthopoly::{oracle, stieltjes_recurrence};
use qcrit::painleve2::default_grid;
use qcrit::semiclassics::{compare_harness, CompareOptions, Region, WkbData};

#[test]
fn string_equation_and_quadrature_agree_across_regimes() {
    for t in [-3.0, -2.0, -1.0, -0.5] {
        let p = ModelParams::new(t, 1.0, 30).unwrap();
        let v = freud::solve(&p, 40, 1e-13).unwrap();
        let o = stieltjes_recurrence(&p, 40, 1e-13).unwrap();
        let d = v.r.iter().zip(&o.r).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(d < 1e-8, "t = {t}: {d:e}");
    }
}

#[test]
fn ansatz_close_to_exact_near_critical_index() {
    let p = ModelParams::new(-1.0, 1.0, 400).unwrap();
    let t = freud::solve(&p, 120, 1e-13).unwrap();
    for n in 95..=105 {
        let a = freud::ansatz_r(&p, n, default_grid()).unwrap();
        assert!((t.r[n] - a).abs() < 1.0 / 400.0, "n = {n}");
    }
}

#[test]
fn finite_kernel_near_sine_in_the_bulk() {
    let p = ModelParams::new(-1.0, 1.0, 300).unwrap();
    let e = oracle(&p, 300, 1e-13).unwrap();
    let z = 0.4;
    let rho = density_from_kernel(&e, z).unwrap();
    let k = KernelEval::FiniteN {
        eval: &e,
        level: 300,
        center: z,
        scale: rho * 300.0,
    };
    for u in [-0.5, 0.25, 0.75] {
        let a = k.eval(0.0, u).unwrap();
        assert!((a - sine_kernel(0.0, u)).abs() < 0.02, "{u}: {a}");
    }
}

#[test]
fn compare_and_hn_at_one_size() {
    let p = ModelParams::new(-1.0, 1.0, 200).unwrap();
    let rep = compare_harness(&p, &[200], 0, &Region::ALL, &CompareOptions::default(), default_grid()).unwrap();
    assert_eq!(rep.rows.len(), 4);
    for r in &rep.rows {
        assert!(r.sup_error < 0.5, "{r:?}");
    }
    let w = WkbData::build(&p, 50, default_grid()).unwrap();
    let rec = stieltjes_recurrence(&p, 52, 1e-13).unwrap();
    assert!((rec.log_h[50] - w.hn_asymptotic_normalized()).abs() < 0.01);
}
