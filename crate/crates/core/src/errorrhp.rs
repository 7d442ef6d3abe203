//! The error problem for R = S P⁻¹: jumps on Σ_R, the singular integral
//! equation R₋ = I + 𝓒₋(R₋ W_R), and the expansion R = I + R₁/z + O(z⁻²).
//!
//! Jump matrices are evaluated at the working precision of the deformation
//! and rounded; the collocation system is solved in double precision.

use crate::curve::Side;
use crate::deform::Deformation;
use crate::local::{GlobalParametrix, LocalError};
use crate::numerics::cauchy::{CauchyError, Contour, OrientedArc};
use crate::{Cx, Mat3};
use faer::linalg::solvers::Solve;
use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

pub type M3 = Matrix3<C64>;

/// Node counts above which the Neumann iteration replaces the dense solve.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Error)]
pub enum ErrorRhpError {
    #[error("jump evaluation failed at {node} on {piece}: {source}")]
    Eval {
        node: C64,
        piece: String,
        #[source]
        source: LocalError,
    },
    #[error(transparent)]
    Cauchy(#[from] CauchyError),
    #[error("Neumann iteration diverged: update {update:.3e} after {iterations} steps (contraction {rate:.3})")]
    Divergence { update: f64, iterations: usize, rate: f64 },
    #[error("collocation system is singular")]
    Singular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PieceKind {
    /// Boundary circle of an endpoint disk, clockwise; J_R = P N⁻¹.
    Circle,
    /// Lens lip outside the disks; J_R = N J_S N⁻¹.
    Lip,
    /// Real tail beyond a soft edge; J_R = N J_T N⁻¹.
    Tail,
    /// Part of the S-contour inside a disk; J_R = P₋ J_S P₊⁻¹.
    Interior,
}

#[derive(Clone, Debug)]
enum Piece {
    Circle { disk: usize },
    Lip { conductor: usize },
    Tail,
    RealInterior { disk: usize },
    LipInterior { disk: usize, conductor: usize, upper: bool },
}

impl Piece {
    fn kind(&self) -> PieceKind {
        match self {
            Piece::Circle { .. } => PieceKind::Circle,
            Piece::Lip { .. } => PieceKind::Lip,
            Piece::Tail => PieceKind::Tail,
            _ => PieceKind::Interior,
        }
    }
}

/// Discretization of Σ_R.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SigmaGrid {
    /// Gauss–Legendre points per panel.
    pub q: usize,
    /// Panels per circle arc between two crossings.
    pub circle_panels: usize,
    pub lip_panels: usize,
    pub tail_panels: usize,
    pub interior_panels: usize,
    /// Geometric refinement levels toward junctions and endpoints.
    pub grading: usize,
    /// Times every panel is halved after construction.
    pub refinements: usize,
    /// Panels on which every node has ‖W_R‖ below this are dropped.
    pub drop_below: f64,
}

impl Default for SigmaGrid {
    fn default() -> Self {
        SigmaGrid { q: 8, circle_panels: 1, lip_panels: 4, tail_panels: 3, interior_panels: 2, grading: 2, refinements: 0, drop_below: 1e-40 }
    }
}

impl SigmaGrid {
    /// Same grid with every panel split in two.
    pub fn doubled(&self) -> Self {
        SigmaGrid { refinements: self.refinements + 1, ..self.clone() }
    }
}

/// W_R = J_R − I at the nodes of Σ_R.
#[derive(Clone, Debug)]
pub struct JumpData {
    pub n: usize,
    pub contour: Contour,
    /// Kind of each arc of `contour`.
    pub kinds: Vec<PieceKind>,
    pub w: Vec<M3>,
    /// Nodes removed with their panels because W_R was negligible there.
    pub dropped: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpSummary {
    pub nodes: usize,
    pub dropped: usize,
    pub sup: f64,
    /// Arc-length weighted quadratic mean of ‖W_R‖.
    pub rms: f64,
    pub circle_sup: f64,
    pub lip_sup: f64,
    pub tail_sup: f64,
    pub interior_sup: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeDump {
    pub s: [f64; 2],
    pub weight: [f64; 2],
    pub kind: PieceKind,
    pub tag: String,
    /// Row-major entries of W_R as (re, im).
    pub w: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JumpDump {
    pub n: usize,
    pub summary: JumpSummary,
    pub nodes: Vec<NodeDump>,
}

pub fn to_m3(m: &Mat3) -> M3 {
    let a = m.to_c64();
    M3::from_fn(|i, j| a[i][j])
}

impl JumpData {
    /// Jump data from an explicit W on a contour, one kind per arc.
    pub fn from_fn(n: usize, contour: Contour, kinds: Vec<PieceKind>, w: impl Fn(C64) -> M3) -> Self {
        let w = contour.nodes.iter().map(|nd| w(nd.s)).collect();
        JumpData { n, contour, kinds, w, dropped: 0 }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn kind_of(&self, node: usize) -> PieceKind {
        self.kinds[self.contour.nodes[node].arc]
    }

    pub fn summary(&self) -> JumpSummary {
        let mut s = JumpSummary { nodes: self.len(), dropped: self.dropped, ..Default::default() };
        let (mut num, mut den) = (0.0, 0.0);
        for (k, (nd, w)) in self.contour.nodes.iter().zip(&self.w).enumerate() {
            let v = w.norm();
            s.sup = s.sup.max(v);
            num += nd.w.norm() * v * v;
            den += nd.w.norm();
            let slot = match self.kind_of(k) {
                PieceKind::Circle => &mut s.circle_sup,
                PieceKind::Lip => &mut s.lip_sup,
                PieceKind::Tail => &mut s.tail_sup,
                PieceKind::Interior => &mut s.interior_sup,
            };
            *slot = slot.max(v);
        }
        s.rms = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
        s
    }

    pub fn dump(&self) -> JumpDump {
        let nodes = self
            .contour
            .nodes
            .iter()
            .zip(&self.w)
            .map(|(nd, w)| NodeDump {
                s: [nd.s.re, nd.s.im],
                weight: [nd.w.re, nd.w.im],
                kind: self.kinds[nd.arc],
                tag: self.contour.arcs[nd.arc].tag.clone(),
                w: (0..9).map(|k| [w[(k / 3, k % 3)].re, w[(k / 3, k % 3)].im]).collect(),
            })
            .collect();
        JumpDump { n: self.n, summary: self.summary(), nodes }
    }
}

fn circle_arc(tag: String, c: C64, r: f64, a: f64, b: f64, panels: usize) -> OrientedArc {
    // clockwise from angle b down to angle a
    OrientedArc::new(
        &tag,
        Arc::new(move |t| {
            let e = C64::from_polar(r, b - (b - a) * t);
            (c + e, -C64::i() * e * (b - a))
        }),
        panels,
    )
}

fn lip_arc(tag: String, d: &Deformation, c: usize, upper: bool, t0: f64, t1: f64, panels: usize) -> OrientedArc {
    let cs = d.cs.clone();
    OrientedArc::new(
        &tag,
        Arc::new(move |u| {
            let t = t0 + (t1 - t0) * u;
            (cs.lip_point(c, upper, t), cs.lip_tangent(c, upper, t) * (t1 - t0))
        }),
        panels,
    )
}

/// The arcs of Σ_R before truncation.
fn sigma_r(d: &Deformation, grid: &SigmaGrid) -> (Vec<OrientedArc>, Vec<Piece>) {
    let cs = &d.cs;
    let mut arcs = Vec::new();
    let mut pieces = Vec::new();
    let lips: Vec<(usize, bool, f64, f64)> = (0..cs.conductors.len())
        .flat_map(|c| [true, false].map(|up| (c, up)))
        .map(|(c, up)| {
            let (ta, tb) = cs.lip_range_outside(c, up);
            (c, up, ta, tb)
        })
        .collect();
    for (k, disk) in cs.disks.iter().enumerate() {
        let (c, r) = (C64::new(disk.center, 0.0), disk.radius);
        let mut angles = vec![0.0, PI];
        for &(ci, up, ta, tb) in &lips {
            for t in [ta, tb] {
                let z = cs.lip_point(ci, up, t) - c;
                if (z.norm() - r).abs() < 1e-8 * r {
                    angles.push(z.arg().rem_euclid(2.0 * PI));
                }
            }
        }
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        angles.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        angles.push(angles[0] + 2.0 * PI);
        for w in angles.windows(2) {
            let arc = circle_arc(format!("{} circle", disk.name), c, r, w[0], w[1], grid.circle_panels);
            arcs.push(arc.graded(grid.grading, true, true));
            pieces.push(Piece::Circle { disk: k });
        }
    }
    for &(ci, up, ta, tb) in &lips {
        let tag = format!("{} {} lip", cs.conductors[ci].name, if up { "upper" } else { "lower" });
        arcs.push(lip_arc(tag, d, ci, up, ta, tb, grid.lip_panels).graded(grid.grading, true, true));
        pieces.push(Piece::Lip { conductor: ci });
    }
    let touches = |x: f64| cs.disks.iter().any(|k| ((x - k.center).abs() - k.radius).abs() < 1e-9 * k.radius.max(1.0));
    for t in &cs.tails {
        let seg = OrientedArc::segment("tail", C64::new(t.from, 0.0), C64::new(t.to, 0.0), grid.tail_panels);
        arcs.push(seg.graded(grid.grading, touches(t.from), touches(t.to)));
        pieces.push(Piece::Tail);
    }
    for (k, disk) in cs.disks.iter().enumerate() {
        let (c, r) = (disk.center, disk.radius);
        for (a, b) in [(c - r, c), (c, c + r)] {
            let seg = OrientedArc::segment(&format!("{} axis", disk.name), C64::new(a, 0.0), C64::new(b, 0.0), grid.interior_panels);
            arcs.push(seg.graded(grid.grading, true, true));
            pieces.push(Piece::RealInterior { disk: k });
        }
        for &(ci, up, ta, tb) in &lips {
            for (t0, t1) in [(0.0, ta), (tb, 1.0)] {
                if cs.disk_of(cs.lip_point(ci, up, 0.5 * (t0 + t1))) != Some(k) {
                    continue;
                }
                let tag = format!("{} {} lip in {}", cs.conductors[ci].name, if up { "upper" } else { "lower" }, disk.name);
                arcs.push(lip_arc(tag, d, ci, up, t0, t1, grid.interior_panels).graded(grid.grading, true, true));
                pieces.push(Piece::LipInterior { disk: k, conductor: ci, upper: up });
            }
        }
    }
    (arcs, pieces)
}

fn inv(m: &Mat3) -> Result<Mat3, LocalError> {
    m.inverse().ok_or(LocalError::Outer(crate::outer::OuterError::Singular))
}

fn jump_r(g: &GlobalParametrix, d: &Deformation, piece: &Piece, s: C64) -> Result<Mat3, LocalError> {
    let p = d.prec;
    let z = Cx::from_c64(p, s);
    Ok(match piece {
        Piece::Circle { disk } => {
            let n = g.outer.eval(&z)?;
            &g.locals[*disk].eval(&z)? * &inv(&n)?
        }
        Piece::Lip { conductor } => {
            let n = g.outer.eval(&z)?;
            &(&n * &d.lip_factor(*conductor, &z)?) * &inv(&n)?
        }
        Piece::Tail => {
            let n = g.outer.eval_side(&Cx::real(p, s.re), Side::Upper)?;
            &(&n * &d.jump_t(&Float::with_val(p, s.re))?) * &inv(&n)?
        }
        Piece::RealInterior { disk } => {
            let l = &g.locals[*disk];
            let (pp, pm) = l.real_boundary_values(s.re)?;
            &(&pm * &l.s_jump_real(s.re)?) * &inv(&pp)?
        }
        Piece::LipInterior { disk, conductor, upper } => {
            let (pp, pm) = g.locals[*disk].lip_boundary_values(*conductor, *upper, &z)?;
            &(&pm * &d.lip_factor(*conductor, &z)?) * &inv(&pp)?
        }
    })
}

/// W_R on Σ_R for the global parametrix `g`: clockwise disk circles, lips
/// outside the disks, truncated tails, and the pieces of the S-contour
/// inside the disks (which vanish where P reproduces the jumps of S).
pub fn assemble_wr(g: &GlobalParametrix, d: &Deformation, grid: &SigmaGrid) -> Result<JumpData, ErrorRhpError> {
    let (arcs, pieces) = sigma_r(d, grid);
    let mut full = Contour::new(arcs, grid.q);
    for _ in 0..grid.refinements {
        full = full.refined();
    }
    let id = M3::identity();
    let w: Vec<M3> = full
        .nodes
        .par_iter()
        .map(|nd| {
            let piece = &pieces[nd.arc];
            jump_r(g, d, piece, nd.s).map(|j| to_m3(&j) - id).map_err(|source| ErrorRhpError::Eval { node: nd.s, piece: full.arcs[nd.arc].tag.clone(), source })
        })
        .collect::<Result<_, _>>()?;
    let mut arcs = Vec::new();
    let mut kinds = Vec::new();
    let mut kept = Vec::new();
    let mut node = 0;
    for (ai, arc) in full.arcs.iter().enumerate() {
        let panels = arc.breaks.len() - 1;
        let live: Vec<bool> = (0..panels).map(|p| (0..grid.q).any(|k| w[node + p * grid.q + k].norm() >= grid.drop_below)).collect();
        let mut p = 0;
        while p < panels {
            if !live[p] {
                p += 1;
                continue;
            }
            let start = p;
            while p < panels && live[p] {
                p += 1;
            }
            arcs.push(arc.panels(start, p));
            kinds.push(pieces[ai].kind());
            kept.extend_from_slice(&w[node + start * grid.q..node + p * grid.q]);
        }
        node += panels * grid.q;
    }
    let dropped = w.len() - kept.len();
    Ok(JumpData { n: d.n(), contour: Contour::new(arcs, grid.q), kinds, w: kept, dropped })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    /// Dense below [`DENSE_LIMIT`] nodes, Neumann above.
    Auto,
    Dense,
    Neumann,
}

/// Boundary values R₋ at the nodes of Σ_R.
#[derive(Clone, Debug)]
pub struct RMinus {
    pub values: Vec<M3>,
    pub method: SolveMethod,
    pub iterations: usize,
    /// max over nodes of ‖R₋ − I − 𝓒₋(R₋ W_R)‖.
    pub residual: f64,
    /// Estimated contraction factor of u ↦ 𝓒₋(u W_R).
    pub contraction: f64,
    /// Relative update of each Neumann step.
    pub trace: Vec<f64>,
}

/// 𝓒₋(V W) at the nodes for the node-wise 3×3 values V.
fn apply(cm: &DMatrix<C64>, w: &[M3], v: &[M3]) -> Vec<M3> {
    let n = w.len();
    let u = DMatrix::from_fn(n, 9, |i, k| (v[i] * w[i])[(k / 3, k % 3)]);
    let c = cm * u;
    (0..n).map(|j| M3::from_fn(|a, b| c[(j, 3 * a + b)])).collect()
}

fn sup_norm(v: &[M3]) -> f64 {
    v.iter().map(|m| m.norm()).fold(0.0, f64::max)
}

fn contraction(cm: &DMatrix<C64>, w: &[M3], steps: usize) -> f64 {
    let mut v: Vec<M3> = vec![M3::identity(); w.len()];
    let mut prev = sup_norm(&v);
    let mut rate = 0.0;
    for _ in 0..steps {
        v = apply(cm, w, &v);
        let s = sup_norm(&v);
        if prev == 0.0 || s == 0.0 {
            return 0.0;
        }
        rate = s / prev;
        let k = C64::new(1.0 / s, 0.0);
        v.iter_mut().for_each(|m| *m *= k);
        prev = 1.0;
    }
    rate
}

fn dense(cm: &DMatrix<C64>, w: &[M3]) -> Result<Vec<M3>, ErrorRhpError> {
    let n = w.len();
    // unknown (m, j) ↦ m n + j: component m of a row of R₋ at node j
    let a = faer::Mat::<C64>::from_fn(3 * n, 3 * n, |r, c| {
        let (m, j) = (r / n, r % n);
        let (l, i) = (c / n, c % n);
        let d = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        d - cm[(j, i)] * w[i][(l, m)]
    });
    let lu = a.partial_piv_lu();
    let mut x = faer::Mat::<C64>::from_fn(3 * n, 3, |r, k| if r / n == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    lu.solve_in_place(x.as_mut());
    let out: Vec<M3> = (0..n).map(|j| M3::from_fn(|k, m| x[(m * n + j, k)])).collect();
    if out.iter().any(|m| m.iter().any(|v| !v.is_finite())) {
        return Err(ErrorRhpError::Singular);
    }
    Ok(out)
}

fn neumann(cm: &DMatrix<C64>, w: &[M3]) -> Result<(Vec<M3>, usize, Vec<f64>), ErrorRhpError> {
    let id = M3::identity();
    let mut v = vec![id; w.len()];
    let mut trace = Vec::new();
    for it in 1..=50 {
        let next: Vec<M3> = apply(cm, w, &v).into_iter().map(|c| id + c).collect();
        let diff: Vec<M3> = next.iter().zip(&v).map(|(a, b)| a - b).collect();
        let upd = sup_norm(&diff) / sup_norm(&next);
        trace.push(upd);
        v = next;
        let rate = if it > 1 { upd / trace[it - 2] } else { 0.0 };
        if !upd.is_finite() || upd > 1e6 || (it > 5 && rate >= 1.0) {
            return Err(ErrorRhpError::Divergence { update: upd, iterations: it, rate });
        }
        if upd < 1e-12 {
            return Ok((v, it, trace));
        }
    }
    Ok((v, 50, trace))
}

/// Solves R₋ = I + 𝓒₋(R₋ W_R) at the nodes.
pub fn solve_rminus(jd: &JumpData, method: SolveMethod) -> Result<RMinus, ErrorRhpError> {
    let cm = jd.contour.boundary_matrix(-1.0);
    let method = match method {
        SolveMethod::Auto if jd.len() <= DENSE_LIMIT => SolveMethod::Dense,
        SolveMethod::Auto => SolveMethod::Neumann,
        m => m,
    };
    let rate = contraction(&cm, &jd.w, 8);
    let (values, iterations, trace) = match method {
        SolveMethod::Neumann => {
            if rate >= 1.0 {
                return Err(ErrorRhpError::Divergence { update: f64::NAN, iterations: 0, rate });
            }
            neumann(&cm, &jd.w)?
        }
        _ => (dense(&cm, &jd.w)?, 1, Vec::new()),
    };
    let id = M3::identity();
    let c = apply(&cm, &jd.w, &values);
    let residual = values.iter().zip(&c).map(|(v, c)| (v - id - c).norm()).fold(0.0, f64::max);
    Ok(RMinus { values, method, iterations, residual, contraction: rate, trace })
}

/// R(z) = I + (1/2πi) ∫ R₋(s) W_R(s) ds/(s − z) off Σ_R.
pub fn reconstruct_r(rm: &RMinus, jd: &JumpData, z: C64) -> Result<M3, ErrorRhpError> {
    let u: Vec<M3> = rm.values.iter().zip(&jd.w).map(|(r, w)| r * w).collect();
    let mut out = M3::identity();
    for i in 0..3 {
        for j in 0..3 {
            let f: Vec<C64> = u.iter().map(|m| m[(i, j)]).collect();
            out[(i, j)] += jd.contour.cauchy_transform(&f, z)?;
        }
    }
    Ok(out)
}

/// R₁ = −(1/2πi) ∫ R₋(s) W_R(s) ds.
pub fn extract_r1(rm: &RMinus, jd: &JumpData) -> M3 {
    let mut s = M3::zeros();
    for ((r, w), nd) in rm.values.iter().zip(&jd.w).zip(&jd.contour.nodes) {
        s += (r * w) * nd.w;
    }
    s * (-1.0 / (C64::i() * 2.0 * PI))
}

/// Bound on ‖R(z) − I‖ from the node sum, valid for |z| beyond the contour.
pub fn far_field_bound(rm: &RMinus, jd: &JumpData, z: C64) -> f64 {
    let reach = jd.contour.nodes.iter().map(|nd| nd.s.norm()).fold(0.0, f64::max);
    let mass: f64 = rm.values.iter().zip(&jd.w).zip(&jd.contour.nodes).map(|((r, w), nd)| (r * w).norm() * nd.w.norm()).sum();
    mass / (2.0 * PI * (z.norm() - reach))
}

/// Largest deviation from the closed form on the unit circle with constant
/// nilpotent jump I + c E₁₃: R₋ = I, R = I + c E₁₃ inside, I outside, R₁ = 0.
pub fn constant_jump_error(c: f64, method: SolveMethod) -> Result<f64, ErrorRhpError> {
    let mut w = M3::zeros();
    w[(0, 2)] = C64::new(c, 0.0);
    let contour = Contour::new(vec![OrientedArc::circle("c", C64::new(0.0, 0.0), 1.0, 0.2, 8)], 12);
    let jd = JumpData::from_fn(0, contour, vec![PieceKind::Circle], |_| w);
    let rm = solve_rminus(&jd, method)?;
    let id = M3::identity();
    let mut err = rm.values.iter().map(|v| (v - id).norm()).fold(0.0, f64::max);
    err = err.max((reconstruct_r(&rm, &jd, C64::new(0.1, 0.3))? - id - w).norm());
    err = err.max((reconstruct_r(&rm, &jd, C64::new(-1.5, 0.7))? - id).norm());
    Ok(err.max(extract_r1(&rm, &jd).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(panels: usize, q: usize) -> Contour {
        Contour::new(vec![OrientedArc::circle("c", C64::new(0.0, 0.0), 1.0, 0.2, panels)], q)
    }

    #[test]
    fn zero_perturbation() {
        let jd = JumpData::from_fn(8, circle(6, 10), vec![PieceKind::Circle], |_| M3::zeros());
        let rm = solve_rminus(&jd, SolveMethod::Dense).unwrap();
        assert!(rm.values.iter().all(|v| *v == M3::identity()));
        assert_eq!(extract_r1(&rm, &jd), M3::zeros());
        assert_eq!(reconstruct_r(&rm, &jd, C64::new(0.2, 0.1)).unwrap(), M3::identity());
    }

    #[test]
    fn constant_jump_on_the_circle() {
        for method in [SolveMethod::Dense, SolveMethod::Neumann] {
            let err = constant_jump_error(0.1, method).unwrap();
            assert!(err < 1e-12, "{method:?}: {err}");
        }
    }

    fn wavy(s: C64) -> M3 {
        let mut m = M3::zeros();
        m[(0, 1)] = s * 0.15;
        m[(1, 2)] = s.inv() * 0.1;
        m[(2, 0)] = (s * s) * 0.05;
        m[(1, 1)] = C64::new(0.02, 0.03);
        m
    }

    fn two_arcs(panels: usize) -> (Contour, Vec<PieceKind>) {
        let c = Contour::new(
            vec![OrientedArc::circle("c", C64::new(0.0, 0.0), 1.0, 0.2, panels), OrientedArc::segment("s", C64::new(1.5, -0.5), C64::new(3.0, 0.5), panels)],
            10,
        );
        (c, vec![PieceKind::Circle, PieceKind::Lip])
    }

    #[test]
    fn neumann_matches_dense_on_400_nodes() {
        let (c, kinds) = two_arcs(20);
        let jd = JumpData::from_fn(8, c, kinds, wavy);
        assert_eq!(jd.len(), 400);
        let a = solve_rminus(&jd, SolveMethod::Dense).unwrap();
        let b = solve_rminus(&jd, SolveMethod::Neumann).unwrap();
        assert!(b.contraction < 1.0);
        let gap = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(gap < 1e-10, "{gap}");
        assert!(a.residual < 1e-11 && b.residual < 1e-11, "{} {}", a.residual, b.residual);
    }

    #[test]
    fn jump_holds_between_nodes() {
        let (c, kinds) = two_arcs(12);
        let jd = JumpData::from_fn(8, c, kinds, wavy);
        let rm = solve_rminus(&jd, SolveMethod::Dense).unwrap();
        let eps = 1e-8;
        for th in [0.77f64, 2.9, -1.3] {
            let s = C64::from_polar(1.0, th);
            // counterclockwise circle: + side inside
            let plus = reconstruct_r(&rm, &jd, s * (1.0 - eps)).unwrap();
            let minus = reconstruct_r(&rm, &jd, s * (1.0 + eps)).unwrap();
            let gap = (plus - minus * (M3::identity() + wavy(s))).norm();
            assert!(gap < 1e-6, "θ {th}: {gap}");
        }
    }

    #[test]
    fn far_field_decay() {
        let (c, kinds) = two_arcs(8);
        let jd = JumpData::from_fn(8, c, kinds, wavy);
        let rm = solve_rminus(&jd, SolveMethod::Dense).unwrap();
        let z = C64::new(6e3, 8e3);
        let dev = (reconstruct_r(&rm, &jd, z).unwrap() - M3::identity()).norm();
        assert!(dev <= far_field_bound(&rm, &jd, z));
        let r1 = extract_r1(&rm, &jd);
        assert!((dev - (r1 / z).norm()).abs() < 1e-3 * dev);
    }

    #[test]
    fn diverging_iteration_is_reported() {
        let jd = JumpData::from_fn(8, circle(6, 10), vec![PieceKind::Circle], |s| wavy(s) * C64::new(40.0, 0.0));
        assert!(matches!(solve_rminus(&jd, SolveMethod::Neumann), Err(ErrorRhpError::Divergence { .. })));
    }
}
