//! Small dense matrices over [`Cx`] and a pivoted real solver.

use super::cx::Cx;
use num_complex::Complex64;
use rug::Float;
use std::ops::{Add, Mul, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<const N: usize>(pub [[Cx; N]; N]);

pub type Mat2 = Mat<2>;
pub type Mat3 = Mat<3>;

impl<const N: usize> Mat<N> {
    pub fn from_fn(f: impl Fn(usize, usize) -> Cx) -> Self {
        Mat(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }
    pub fn zeros(prec: u32) -> Self {
        Self::from_fn(|_, _| Cx::zero(prec))
    }
    pub fn identity(prec: u32) -> Self {
        Self::from_fn(|i, j| if i == j { Cx::one(prec) } else { Cx::zero(prec) })
    }
    pub fn diag(d: [Cx; N]) -> Self {
        let p = d[0].prec();
        let mut m = Self::zeros(p);
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }
    pub fn prec(&self) -> u32 {
        self.0[0][0].prec()
    }
    pub fn get(&self, i: usize, j: usize) -> &Cx {
        &self.0[i][j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: Cx) {
        self.0[i][j] = v;
    }
    pub fn scale(&self, s: &Cx) -> Self {
        Self::from_fn(|i, j| &self.0[i][j] * s)
    }
    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].clone())
    }
    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        let mut s = Float::with_val(self.prec(), 0);
        for row in &self.0 {
            for v in row {
                s += v.0.clone().norm().real();
            }
        }
        s.sqrt().to_f64()
    }
    /// Frobenius distance to the identity.
    pub fn dist_identity(&self) -> f64 {
        (self - &Self::identity(self.prec())).norm()
    }
    pub fn to_c64(&self) -> [[Complex64; N]; N] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j].to_c64()))
    }
    pub fn with_prec(&self, prec: u32) -> Self {
        Self::from_fn(|i, j| self.0[i][j].with_prec(prec))
    }
    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> Cx {
        let (lu, _, sign) = self.lu();
        let mut d = Cx::real(self.prec(), sign);
        for i in 0..N {
            d = &d * &lu.0[i][i];
        }
        d
    }
    fn lu(&self) -> (Self, [usize; N], f64) {
        let mut a = self.clone();
        let mut perm: [usize; N] = std::array::from_fn(|i| i);
        let mut sign = 1.0;
        for k in 0..N {
            let mut piv = k;
            let mut best = a.0[k][k].abs();
            for r in k + 1..N {
                let v = a.0[r][k].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if piv != k {
                a.0.swap(piv, k);
                perm.swap(piv, k);
                sign = -sign;
            }
            if a.0[k][k].is_zero() {
                continue;
            }
            for r in k + 1..N {
                let f = &a.0[r][k] / &a.0[k][k];
                for c in k..N {
                    let t = &f * &a.0[k][c];
                    a.0[r][c] -= &t;
                }
                a.0[r][k] = f;
            }
        }
        (a, perm, sign)
    }
    /// Inverse via LU; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let p = self.prec();
        let (lu, perm, _) = self.lu();
        if (0..N).any(|i| lu.0[i][i].is_zero()) {
            return None;
        }
        let mut inv = Self::zeros(p);
        for col in 0..N {
            let mut y: Vec<Cx> = (0..N).map(|i| if perm[i] == col { Cx::one(p) } else { Cx::zero(p) }).collect();
            for i in 0..N {
                for k in 0..i {
                    let t = &lu.0[i][k] * &y[k];
                    y[i] -= &t;
                }
            }
            for i in (0..N).rev() {
                for k in i + 1..N {
                    let t = &lu.0[i][k] * &y[k];
                    y[i] -= &t;
                }
                y[i] = &y[i] / &lu.0[i][i];
            }
            for (i, v) in y.into_iter().enumerate() {
                inv.0[i][col] = v;
            }
        }
        Some(inv)
    }
}

impl Mat2 {
    /// Places this 2×2 block on rows/columns `(i, j)` of a 3×3 identity.
    pub fn embed(&self, ch: (usize, usize)) -> Mat3 {
        let mut m = Mat3::identity(self.prec());
        let idx = [ch.0, ch.1];
        for a in 0..2 {
            for b in 0..2 {
                m.0[idx[a]][idx[b]] = self.0[a][b].clone();
            }
        }
        m
    }
}

impl<const N: usize> Mul<&Mat<N>> for &Mat<N> {
    type Output = Mat<N>;
    fn mul(self, rhs: &Mat<N>) -> Mat<N> {
        let p = self.prec();
        Mat::from_fn(|i, j| {
            let mut s = Cx::zero(p);
            for k in 0..N {
                s += &self.0[i][k] * &rhs.0[k][j];
            }
            s
        })
    }
}

impl<const N: usize> Mul<Mat<N>> for Mat<N> {
    type Output = Mat<N>;
    fn mul(self, rhs: Mat<N>) -> Mat<N> {
        &self * &rhs
    }
}

impl<const N: usize> Add<&Mat<N>> for &Mat<N> {
    type Output = Mat<N>;
    fn add(self, rhs: &Mat<N>) -> Mat<N> {
        Mat::from_fn(|i, j| &self.0[i][j] + &rhs.0[i][j])
    }
}

impl<const N: usize> Sub<&Mat<N>> for &Mat<N> {
    type Output = Mat<N>;
    fn sub(self, rhs: &Mat<N>) -> Mat<N> {
        Mat::from_fn(|i, j| &self.0[i][j] - &rhs.0[i][j])
    }
}

/// Solves the real system `A x = b` by Gaussian elimination with partial
/// pivoting. Returns the solution and a cheap condition estimate
/// `max|u_ii| / min|u_ii|`, or `None` when a pivot vanishes.
pub fn solve_real(mut a: Vec<Vec<Float>>, mut b: Vec<Float>) -> Option<(Vec<Float>, f64)> {
    let n = b.len();
    if n == 0 {
        return Some((vec![], 1.0));
    }
    let prec = b[0].prec();
    for k in 0..n {
        let piv = (k..n).max_by(|&r, &s| a[r][k].clone().abs().partial_cmp(&a[s][k].clone().abs()).unwrap()).unwrap();
        a.swap(piv, k);
        b.swap(piv, k);
        if a[k][k].is_zero() {
            return None;
        }
        for r in k + 1..n {
            let f = Float::with_val(prec, &a[r][k] / &a[k][k]);
            for c in k..n {
                let t = Float::with_val(prec, &f * &a[k][c]);
                a[r][c] -= t;
            }
            let t = Float::with_val(prec, &f * &b[k]);
            b[r] -= t;
        }
    }
    let mut x = vec![Float::new(prec); n];
    for i in (0..n).rev() {
        let mut s = b[i].clone();
        for k in i + 1..n {
            s -= Float::with_val(prec, &a[i][k] * &x[k]);
        }
        x[i] = s / &a[i][i];
    }
    let piv: Vec<f64> = (0..n).map(|i| a[i][i].to_f64().abs()).collect();
    let mx = piv.iter().cloned().fold(0.0, f64::max);
    let mn = piv.iter().cloned().fold(f64::INFINITY, f64::min);
    Some((x, mx / mn))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Mat3 {
        let v = [[2.0, -1.0, 0.5], [0.3, 4.0, 1.0], [-1.0, 0.2, 3.0]];
        Mat3::from_fn(|i, j| Cx::new(160, v[i][j], 0.1 * (i as f64 - j as f64)))
    }

    #[test]
    fn inverse_roundtrip() {
        let m = sample();
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).dist_identity() < 1e-40);
    }

    #[test]
    fn det_of_product() {
        let m = sample();
        let d = (&m * &m).det();
        let e = &m.det() * &m.det();
        assert!((&d - &e).abs_f64() < 1e-38);
    }

    #[test]
    fn embedding_preserves_determinant() {
        let b = Mat2::from_fn(|i, j| Cx::new(100, (1 + i + 2 * j) as f64, 0.5));
        for ch in [(0, 1), (0, 2), (1, 2)] {
            let e = b.embed(ch);
            assert!((&e.det() - &b.det()).abs_f64() < 1e-25);
        }
    }

    #[test]
    fn real_solver() {
        let p = 128;
        let f = |x: f64| Float::with_val(p, x);
        let a = vec![vec![f(1e-3), f(2.0)], vec![f(3.0), f(4.0)]];
        let b = vec![f(2.001), f(7.0)];
        let (x, _) = solve_real(a, b).unwrap();
        assert!((x[0].to_f64() - 1.0).abs() < 1e-15 && (x[1].to_f64() - 1.0).abs() < 1e-15);
    }
}
