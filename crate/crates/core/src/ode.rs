//! Fixed-step explicit Runge–Kutta integration of order 8 (Cooper–Verner, 11 stages).

use std::sync::OnceLock;

struct Tableau {
    c: [f64; 11],
    a: [[f64; 10]; 11],
    b: [f64; 11],
}

fn tableau() -> &'static Tableau {
    static T: OnceLock<Tableau> = OnceLock::new();
    T.get_or_init(|| {
        let s = 21f64.sqrt();
        let mut a = [[0.0; 10]; 11];
        a[1][0] = 0.5;
        a[2][0] = 0.25;
        a[2][1] = 0.25;
        a[3][0] = 1.0 / 7.0;
        a[3][1] = (-7.0 - 3.0 * s) / 98.0;
        a[3][2] = (21.0 + 5.0 * s) / 49.0;
        a[4][0] = (11.0 + s) / 84.0;
        a[4][2] = (18.0 + 4.0 * s) / 63.0;
        a[4][3] = (21.0 - s) / 252.0;
        a[5][0] = (5.0 + s) / 48.0;
        a[5][2] = (9.0 + s) / 36.0;
        a[5][3] = (-231.0 + 14.0 * s) / 360.0;
        a[5][4] = (63.0 - 7.0 * s) / 80.0;
        a[6][0] = (10.0 - s) / 42.0;
        a[6][2] = (-432.0 + 92.0 * s) / 315.0;
        a[6][3] = (633.0 - 145.0 * s) / 90.0;
        a[6][4] = (-504.0 + 115.0 * s) / 70.0;
        a[6][5] = (63.0 - 13.0 * s) / 35.0;
        a[7][0] = 1.0 / 14.0;
        a[7][4] = (14.0 - 3.0 * s) / 126.0;
        a[7][5] = (13.0 - 3.0 * s) / 63.0;
        a[7][6] = 1.0 / 9.0;
        a[8][0] = 1.0 / 32.0;
        a[8][4] = (91.0 - 21.0 * s) / 576.0;
        a[8][5] = 11.0 / 72.0;
        a[8][6] = (-385.0 - 75.0 * s) / 1152.0;
        a[8][7] = (63.0 + 13.0 * s) / 128.0;
        a[9][0] = 1.0 / 14.0;
        a[9][4] = 1.0 / 9.0;
        a[9][5] = (-733.0 - 147.0 * s) / 2205.0;
        a[9][6] = (515.0 + 111.0 * s) / 504.0;
        a[9][7] = (-51.0 - 11.0 * s) / 56.0;
        a[9][8] = (132.0 + 28.0 * s) / 245.0;
        a[10][4] = (-42.0 + 7.0 * s) / 18.0;
        a[10][5] = (-18.0 + 28.0 * s) / 45.0;
        a[10][6] = (-273.0 - 53.0 * s) / 72.0;
        a[10][7] = (301.0 + 53.0 * s) / 72.0;
        a[10][8] = (28.0 - 28.0 * s) / 45.0;
        a[10][9] = (49.0 - 7.0 * s) / 18.0;
        let mut c = [0.0; 11];
        for i in 0..11 {
            c[i] = a[i].iter().sum();
        }
        let mut b = [0.0; 11];
        b[0] = 1.0 / 20.0;
        b[7] = 49.0 / 180.0;
        b[8] = 16.0 / 45.0;
        b[9] = 49.0 / 180.0;
        b[10] = 1.0 / 20.0;
        Tableau { c, a, b }
    })
}

/// One step of size `h` from `(x, y)`.
pub fn rk8_step<const D: usize, F>(f: &F, x: f64, y: &[f64; D], h: f64) -> [f64; D]
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let t = tableau();
    let mut k = [[0.0; D]; 11];
    for i in 0..11 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            let aij = t.a[i][j];
            if aij != 0.0 {
                for d in 0..D {
                    yi[d] += h * aij * kj[d];
                }
            }
        }
        k[i] = f(x + t.c[i] * h, &yi);
    }
    let mut out = *y;
    for (i, ki) in k.iter().enumerate() {
        if t.b[i] != 0.0 {
            for d in 0..D {
                out[d] += h * t.b[i] * ki[d];
            }
        }
    }
    out
}

/// Integrate from `x0` to `x1` in `steps` equal steps, recording every state.
pub fn rk8_path<const D: usize, F>(f: &F, x0: f64, y0: [f64; D], x1: f64, steps: usize) -> Vec<(f64, [f64; D])>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let h = (x1 - x0) / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push((x0, y));
    for i in 0..steps {
        let x = x0 + i as f64 * h;
        y = rk8_step(f, x, &y, h);
        let xn = if i + 1 == steps { x1 } else { x0 + (i + 1) as f64 * h };
        out.push((xn, y));
    }
    out
}
