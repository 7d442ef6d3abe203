//! Gauss–Legendre rules, panel interpolation and differentiation.

use std::f64::consts::PI;

/// Nodes and weights of the `q`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    for i in 0..q {
        let mut t = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(q, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(q, t);
        x[q - 1 - i] = t;
        w[q - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Gauss–Legendre rule at `prec` bits, Newton-polished from the f64 nodes.
pub fn gauss_legendre_mp(q: usize, prec: u32) -> (Vec<rug::Float>, Vec<rug::Float>) {
    use rug::Float;
    let (x0, _) = gauss_legendre(q);
    let eval = |t: &Float| {
        let mut p0 = Float::with_val(prec, 1);
        let mut p1 = t.clone();
        for k in 2..=q {
            let p2 = (Float::with_val(prec, t * &p1) * (2 * k - 1) as u32 - Float::with_val(prec, &p0 * (k - 1) as u32)) / k as u32;
            p0 = p1;
            p1 = p2;
        }
        let tt = Float::with_val(prec, t * t) - 1u32;
        let dp = (Float::with_val(prec, t * &p1) - &p0) * q as u32 / &tt;
        (p1, dp)
    };
    let mut xs = Vec::with_capacity(q);
    let mut ws = Vec::with_capacity(q);
    for &g in &x0 {
        let mut t = Float::with_val(prec, g);
        for _ in 0..(prec as f64 / 40.0).log2().ceil() as usize + 3 {
            let (p, dp) = eval(&t);
            t -= p / dp;
        }
        let (_, dp) = eval(&t);
        let one_m = Float::with_val(prec, 1u32) - Float::with_val(prec, &t * &t);
        ws.push(Float::with_val(prec, 2u32) / (one_m * Float::with_val(prec, &dp * &dp)));
        xs.push(t);
    }
    (xs, ws)
}

fn legendre(q: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=q {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = q as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// Barycentric weights for interpolation through `x`.
pub fn bary_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len()).map(|j| 1.0 / (0..x.len()).filter(|&k| k != j).map(|k| x[j] - x[k]).product::<f64>()).collect()
}

/// Row of the interpolation operator that maps samples on `x` to the value at `t`.
pub fn interp_row(x: &[f64], bw: &[f64], t: f64) -> Vec<f64> {
    if let Some(j) = x.iter().position(|&xj| xj == t) {
        let mut r = vec![0.0; x.len()];
        r[j] = 1.0;
        return r;
    }
    let terms: Vec<f64> = (0..x.len()).map(|j| bw[j] / (t - x[j])).collect();
    let s: f64 = terms.iter().sum();
    terms.into_iter().map(|v| v / s).collect()
}

/// Spectral differentiation matrix on the nodes `x`.
pub fn diff_matrix(x: &[f64]) -> Vec<Vec<f64>> {
    let q = x.len();
    let bw = bary_weights(x);
    let mut d = vec![vec![0.0; q]; q];
    for i in 0..q {
        let mut s = 0.0;
        for j in 0..q {
            if i != j {
                d[i][j] = bw[j] / bw[i] / (x[i] - x[j]);
                s += d[i][j];
            }
        }
        d[i][i] = -s;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn mp_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre_mp(12, 256);
        let mut s = rug::Float::with_val(256, 0);
        for (xi, wi) in x.iter().zip(&w) {
            let v = rug::Float::with_val(256, xi.clone().pow(22u32));
            s += v * wi;
        }
        let exact = rug::Float::with_val(256, 2) / 23u32;
        assert!((s - exact).abs().to_f64() < 1e-70);
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(12);
        for deg in 0..24 {
            let s: f64 = x.iter().zip(&w).map(|(t, wt)| wt * t.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn differentiation_and_interpolation() {
        let (x, _) = gauss_legendre(16);
        let f: Vec<f64> = x.iter().map(|t| (2.0 * t).sin()).collect();
        let d = diff_matrix(&x);
        for i in 0..16 {
            let df: f64 = (0..16).map(|j| d[i][j] * f[j]).sum();
            assert!((df - 2.0 * (2.0 * x[i]).cos()).abs() < 1e-10);
        }
        let bw = bary_weights(&x);
        let r = interp_row(&x, &bw, 0.123);
        let v: f64 = r.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert!((v - 0.246f64.sin()).abs() < 1e-13);
    }
}
