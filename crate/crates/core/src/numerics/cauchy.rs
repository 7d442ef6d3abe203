//! Panel discretizations of oriented contours and Cauchy transforms.
//!
//! The "minus" side of an arc is the right-hand side of its orientation.

use super::quad::{bary_weights, diff_matrix, gauss_legendre, interp_row};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

/// `t ∈ [0, 1] ↦ (γ(t), γ′(t))`.
pub type ArcFn = Arc<dyn Fn(f64) -> (C64, C64) + Send + Sync>;

#[derive(Debug, Error, PartialEq)]
pub enum CauchyError {
    #[error("evaluation point {0} lies on the contour")]
    NearContour(C64),
    #[error("density has {got} samples, contour has {want} nodes")]
    Length { got: usize, want: usize },
}

#[derive(Clone)]
pub struct OrientedArc {
    pub param: ArcFn,
    /// Parameter breakpoints, increasing from 0 to 1.
    pub breaks: Vec<f64>,
    pub tag: String,
}

impl std::fmt::Debug for OrientedArc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "OrientedArc({}, {} panels)", self.tag, self.breaks.len() - 1)
    }
}

impl OrientedArc {
    pub fn new(tag: &str, param: ArcFn, panels: usize) -> Self {
        let breaks = (0..=panels).map(|k| k as f64 / panels as f64).collect();
        OrientedArc { param, breaks, tag: tag.to_string() }
    }

    pub fn segment(tag: &str, a: C64, b: C64, panels: usize) -> Self {
        Self::new(tag, Arc::new(move |t| (a + (b - a) * t, b - a)), panels)
    }

    /// Full circle, counterclockwise, starting at angle `start`.
    pub fn circle(tag: &str, c: C64, r: f64, start: f64, panels: usize) -> Self {
        Self::new(
            tag,
            Arc::new(move |t| {
                let e = C64::from_polar(r, start + 2.0 * PI * t);
                (c + e, C64::i() * e * 2.0 * PI)
            }),
            panels,
        )
    }

    /// Panels refined geometrically toward the requested ends.
    pub fn graded(mut self, levels: usize, at_start: bool, at_end: bool) -> Self {
        let mut b = self.breaks.clone();
        for _ in 0..levels {
            if at_start {
                let x = b[1] / 2.0;
                b.insert(1, x);
            }
            if at_end {
                let n = b.len();
                let x = (b[n - 2] + 1.0) / 2.0;
                b.insert(n - 1, x);
            }
        }
        self.breaks = b;
        self
    }

    pub fn reversed(&self) -> Self {
        let p = self.param.clone();
        let breaks = self.breaks.iter().rev().map(|t| 1.0 - t).collect();
        OrientedArc {
            param: Arc::new(move |t| {
                let (z, d) = p(1.0 - t);
                (z, -d)
            }),
            breaks,
            tag: self.tag.clone(),
        }
    }

    pub fn point(&self, t: f64) -> C64 {
        (self.param)(t).0
    }

    pub fn is_closed(&self) -> bool {
        let (a, b) = (self.breaks[0], self.breaks[self.breaks.len() - 1]);
        (self.point(a) - self.point(b)).norm() < 1e-13
    }

    /// The sub-arc made of panels `from..to`.
    pub fn panels(&self, from: usize, to: usize) -> Self {
        OrientedArc { param: self.param.clone(), breaks: self.breaks[from..=to].to_vec(), tag: self.tag.clone() }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub s: C64,
    /// Complex quadrature weight `γ′(t)·dt`.
    pub w: C64,
    pub tangent: C64,
    pub arc: usize,
    pub panel: usize,
    pub t: f64,
}

/// A union of oriented arcs discretized by `q`-point Gauss–Legendre panels.
#[derive(Clone, Debug)]
pub struct Contour {
    pub arcs: Vec<OrientedArc>,
    pub nodes: Vec<Node>,
    pub q: usize,
    gx: Vec<f64>,
    gw: Vec<f64>,
    panel_start: Vec<Vec<usize>>,
}

impl Contour {
    pub fn new(arcs: Vec<OrientedArc>, q: usize) -> Self {
        let (gx, gw) = gauss_legendre(q);
        let mut nodes = Vec::new();
        let mut panel_start = Vec::new();
        for (ai, arc) in arcs.iter().enumerate() {
            let mut starts = Vec::new();
            for (pi, win) in arc.breaks.windows(2).enumerate() {
                starts.push(nodes.len());
                let (a, b) = (win[0], win[1]);
                let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
                for k in 0..q {
                    let t = m + h * gx[k];
                    let (s, d) = (arc.param)(t);
                    nodes.push(Node { s, w: d * h * gw[k], tangent: d / d.norm(), arc: ai, panel: pi, t });
                }
            }
            panel_start.push(starts);
        }
        Contour { arcs, nodes, q, gx, gw, panel_start }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same arcs with every panel split in two.
    pub fn refined(&self) -> Self {
        let arcs = self
            .arcs
            .iter()
            .map(|a| {
                let mut b = Vec::new();
                for w in a.breaks.windows(2) {
                    b.push(w[0]);
                    b.push((w[0] + w[1]) / 2.0);
                }
                b.push(a.breaks[a.breaks.len() - 1]);
                OrientedArc { param: a.param.clone(), breaks: b, tag: a.tag.clone() }
            })
            .collect();
        Contour::new(arcs, self.q)
    }

    fn check(&self, f: &[C64]) -> Result<(), CauchyError> {
        if f.len() != self.len() {
            return Err(CauchyError::Length { got: f.len(), want: self.len() });
        }
        Ok(())
    }

    /// `(1/2πi) ∫ f(s)/(s − z) ds`, with adaptive panel upsampling when `z`
    /// is close to the contour.
    pub fn cauchy_transform(&self, f: &[C64], z: C64) -> Result<C64, CauchyError> {
        self.check(f)?;
        let mut acc = C64::new(0.0, 0.0);
        for (ai, arc) in self.arcs.iter().enumerate() {
            for (pi, win) in arc.breaks.windows(2).enumerate() {
                let st = self.panel_start[ai][pi];
                let vals = &f[st..st + self.q];
                acc += self.panel_integral(arc, win[0], win[1], vals, z, 0)?;
            }
        }
        Ok(acc / (C64::i() * 2.0 * PI))
    }

    fn panel_integral(&self, arc: &OrientedArc, a: f64, b: f64, vals: &[C64], z: C64, depth: usize) -> Result<C64, CauchyError> {
        self.sub_integral(arc, (a, b), (a, b), vals, z, depth)
    }

    /// Integral over the sub-interval `sub` of the panel `pan`, the density
    /// being interpolated from its samples on `pan`.
    fn sub_integral(&self, arc: &OrientedArc, pan: (f64, f64), sub: (f64, f64), vals: &[C64], z: C64, depth: usize) -> Result<C64, CauchyError> {
        let (a, b) = sub;
        let len = (arc.point(b) - arc.point(a)).norm().max((arc.point((a + b) / 2.0) - arc.point(a)).norm() * 2.0);
        let mid = arc.point((a + b) / 2.0);
        let dist = (mid - z).norm();
        if dist < 1.2 * len {
            if depth >= 36 {
                return Err(CauchyError::NearContour(z));
            }
            let m = (a + b) / 2.0;
            return Ok(self.sub_integral(arc, pan, (a, m), vals, z, depth + 1)? + self.sub_integral(arc, pan, (m, b), vals, z, depth + 1)?);
        }
        let (pm, ph) = ((pan.0 + pan.1) / 2.0, (pan.1 - pan.0) / 2.0);
        let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
        let bw = bary_weights(&self.gx);
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..self.q {
            let t = m + h * self.gx[k];
            let (s, d) = (arc.param)(t);
            if s == z {
                return Err(CauchyError::NearContour(z));
            }
            let fv: C64 = if depth == 0 {
                vals[k]
            } else {
                let row = interp_row(&self.gx, &bw, (t - pm) / ph);
                row.iter().zip(vals).map(|(r, v)| v * *r).sum()
            };
            acc += fv * d * h * self.gw[k] / (s - z);
        }
        Ok(acc)
    }

    /// `∫_arc ds/(s − s_j)`, principal value when node `j` lies on the arc.
    fn log_integral(&self, ai: usize, j: usize) -> C64 {
        let arc = &self.arcs[ai];
        let sj = self.nodes[j].s;
        let mut ts: Vec<f64> = arc.breaks.clone();
        for win in arc.breaks.windows(2) {
            let (m, h) = ((win[0] + win[1]) / 2.0, (win[1] - win[0]) / 2.0);
            ts.extend(self.gx.iter().map(|x| m + h * x));
        }
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        let own = self.nodes[j].arc == ai;
        let tj = self.nodes[j].t;
        let closed = arc.is_closed();
        let sweep = |vs: &[C64]| -> f64 { vs.windows(2).map(|w| (w[1] / w[0]).arg()).sum() };
        if !own {
            let vs: Vec<C64> = ts.iter().map(|&t| arc.point(t) - sj).collect();
            let re = if closed { 0.0 } else { (vs[vs.len() - 1].norm() / vs[0].norm()).ln() };
            return C64::new(re, sweep(&vs));
        }
        let tan = self.nodes[j].tangent;
        let mut before: Vec<C64> = ts.iter().filter(|&&t| t < tj).map(|&t| arc.point(t) - sj).collect();
        before.push(-tan);
        let mut after = vec![tan];
        after.extend(ts.iter().filter(|&&t| t > tj).map(|&t| arc.point(t) - sj));
        let im = sweep(&before) + sweep(&after);
        if closed {
            return C64::new(0.0, im);
        }
        let re = (after[after.len() - 1].norm() / before[0].norm()).ln();
        C64::new(re, im)
    }

    /// Dense matrix of the boundary-value operator 𝓒₊ (`side = +1`) or
    /// 𝓒₋ (`side = −1`) acting on nodal samples.
    pub fn boundary_matrix(&self, side: f64) -> DMatrix<C64> {
        let n = self.len();
        let d = diff_matrix(&self.gx);
        let c = C64::new(0.0, -1.0 / (2.0 * PI));
        let rows: Vec<Vec<C64>> = {
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map(|j| {
                    let nj = &self.nodes[j];
                    let mut row = vec![C64::new(0.0, 0.0); n];
                    let mut diag = C64::new(0.0, 0.0);
                    for (i, ni) in self.nodes.iter().enumerate() {
                        if i != j {
                            let k = ni.w / (ni.s - nj.s);
                            row[i] += c * k;
                            diag -= k;
                        }
                    }
                    for ai in 0..self.arcs.len() {
                        diag += self.log_integral(ai, j);
                    }
                    row[j] += c * diag + side * 0.5;
                    let st = self.panel_start[nj.arc][nj.panel];
                    let lj = j - st;
                    for k in 0..self.q {
                        row[st + k] += c * self.gw[lj] * d[lj][k];
                    }
                    row
                })
                .collect()
        };
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    /// 𝓒₋f at the nodes by singularity subtraction.
    pub fn cauchy_minus(&self, f: &[C64]) -> Result<Vec<C64>, CauchyError> {
        self.check(f)?;
        let m = self.boundary_matrix(-1.0);
        Ok((0..self.len()).map(|j| (0..self.len()).map(|i| m[(j, i)] * f[i]).sum()).collect())
    }

    /// 𝓒₊f at the nodes by singularity subtraction.
    pub fn cauchy_plus(&self, f: &[C64]) -> Result<Vec<C64>, CauchyError> {
        self.check(f)?;
        let m = self.boundary_matrix(1.0);
        Ok((0..self.len()).map(|j| (0..self.len()).map(|i| m[(j, i)] * f[i]).sum()).collect())
    }

    /// 𝓒₋f at node `j` by evaluating off the contour on the minus side at
    /// offsets ε, ε/2, ε/4 and Richardson-extrapolating to ε = 0.
    pub fn cauchy_minus_offset(&self, f: &[C64], j: usize, eps: f64) -> Result<C64, CauchyError> {
        let nj = &self.nodes[j];
        let normal = -C64::i() * nj.tangent;
        let v: Vec<C64> = (0..3).map(|k| self.cauchy_transform(f, nj.s + normal * (eps / 2f64.powi(k)))).collect::<Result<_, _>>()?;
        let r1 = v[1] * 2.0 - v[0];
        let r2 = v[2] * 2.0 - v[1];
        Ok((r2 * 4.0 - r1) / 3.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_circle(panels: usize) -> Contour {
        Contour::new(vec![OrientedArc::circle("c", C64::new(0.0, 0.0), 1.0, 0.3, panels)], 12)
    }

    #[test]
    fn examples() {
        let seg = Contour::new(vec![OrientedArc::segment("s", C64::new(0.0, 0.0), C64::new(1.0, 0.0), 4)], 16);
        let ones = vec![C64::new(1.0, 0.0); seg.len()];
        let zeros = vec![C64::new(0.0, 0.0); seg.len()];
        assert_eq!(seg.cauchy_transform(&zeros, C64::new(0.5, 0.5)).unwrap(), C64::new(0.0, 0.0));
        let v = seg.cauchy_transform(&ones, C64::new(-1.0, 0.0)).unwrap();
        assert!((v - C64::new(0.0, -0.11031780007632579)).norm() < 1e-14);
        let c = unit_circle(8);
        let f: Vec<C64> = c.nodes.iter().map(|n| n.s).collect();
        assert!(c.cauchy_transform(&f, C64::new(0.0, 0.0)).unwrap().norm() < 1e-14);
    }

    #[test]
    fn constant_density_on_circle() {
        let c = unit_circle(8);
        let ones = vec![C64::new(1.0, 0.0); c.len()];
        let m = c.cauchy_minus(&ones).unwrap();
        let p = c.cauchy_plus(&ones).unwrap();
        for (a, b) in m.iter().zip(&p) {
            assert!(a.norm() < 1e-12);
            assert!((b - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn offset_route_agrees_with_subtraction() {
        let arc = OrientedArc::new("p", Arc::new(|t: f64| (C64::new(t, 0.3 * t * t), C64::new(1.0, 0.6 * t))), 6);
        let c = Contour::new(vec![arc], 12);
        let f: Vec<C64> = c.nodes.iter().map(|n| (n.s * 0.7).exp()).collect();
        let m = c.cauchy_minus(&f).unwrap();
        for j in [5, 30, 50] {
            let o = c.cauchy_minus_offset(&f, j, 1e-3).unwrap();
            assert!((o - m[j]).norm() < 1e-7, "node {j}: {}", (o - m[j]).norm());
        }
    }

    #[test]
    fn zero_near_contour_is_rejected() {
        let seg = Contour::new(vec![OrientedArc::segment("s", C64::new(0.0, 0.0), C64::new(1.0, 0.0), 2)], 8);
        let ones = vec![C64::new(1.0, 0.0); seg.len()];
        let z = seg.nodes[3].s;
        assert!(matches!(seg.cauchy_transform(&ones, z), Err(CauchyError::NearContour(_))));
    }
}
