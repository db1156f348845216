//! Lattice dispersion and the two- and three-body kinetic-energy surfaces.
//!
//! `ε(p) = 2 Σ_i (1 − cos p_i)` is the only dispersion in use; every other
//! module reaches it through this file.
//!
//! Both kinetic surfaces are sums of independent per-axis terms, so their
//! extrema over the torus are sums of per-axis extrema. Band edges are found
//! axis by axis: an exhaustive scan of the grid axis, then Newton refinement
//! from every local extremum of the scan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{wrap_angle, Dim, QuadGrid, TorusPoint};

/// Energy spread below which a fiber counts as degenerate (a single point).
pub const DEGENERATE_WIDTH: f64 = 1e-12;

/// Physical parameters: coupling `mu`, mass ratio `gamma` and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    mu: f64,
    gamma: f64,
    dim: Dim,
}

impl Coupling {
    pub fn new(mu: f64, gamma: f64, dim: Dim) -> Result<Self> {
        if !mu.is_finite() || mu == 0.0 {
            return Err(Error::invalid(format!("coupling mu must be finite and nonzero (mu != 0), got {mu}")));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::invalid(format!("mass ratio gamma must be finite and > 0, got {gamma}")));
        }
        Ok(Coupling { mu, gamma, dim })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn repulsive(&self) -> bool {
        self.mu > 0.0
    }
}

/// A closed energy interval with the points where its ends are attained.
///
/// For two-body bands each argument list holds one point `q`; for the
/// three-body band it holds the pair `[p, q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub argmin: Vec<TorusPoint>,
    pub argmax: Vec<TorusPoint>,
}

impl Band {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.width() <= DEGENERATE_WIDTH
    }

    pub fn contains(&self, e: f64) -> bool {
        (self.lo..=self.hi).contains(&e)
    }

    /// Distance from `e` to the interval (zero inside).
    pub fn distance(&self, e: f64) -> f64 {
        if e < self.lo {
            self.lo - e
        } else if e > self.hi {
            e - self.hi
        } else {
            0.0
        }
    }

    /// Shifts the whole band by a constant.
    pub fn shifted(&self, by: f64) -> Band {
        Band {
            lo: self.lo + by,
            hi: self.hi + by,
            ..self.clone()
        }
    }
}

#[inline]
fn eps1(x: f64) -> f64 {
    2.0 * (1.0 - x.cos())
}

/// `ε(p) = 2 Σ (1 − cos p_i)`.
pub fn epsilon(p: &TorusPoint) -> f64 {
    p.coords().iter().map(|&x| eps1(x)).sum()
}

/// `𝓔_{γ,k}(q) = ε(q) + γ ε(k − q)`.
pub fn two_body_dispersion(k: &TorusPoint, q: &TorusPoint, gamma: f64) -> f64 {
    let (k, q) = (k.raw(), q.raw());
    (0..dim_of(k.len(), q.len()))
        .map(|a| eps1(q[a]) + gamma * eps1(k[a] - q[a]))
        .sum()
}

/// `E(K; p, q) = ε(p) + ε(q) + γ ε(K − p − q)`.
///
/// Bit-for-bit symmetric in `(p, q)`.
pub fn three_body_dispersion(big_k: &TorusPoint, p: &TorusPoint, q: &TorusPoint, gamma: f64) -> f64 {
    let d = big_k.dim().get();
    let (kk, pp, qq) = (big_k.raw(), p.raw(), q.raw());
    let mut acc = 0.0;
    for a in 0..d {
        acc += (eps1(pp[a]) + eps1(qq[a])) + gamma * eps1(kk[a] - (pp[a] + qq[a]));
    }
    acc
}

fn dim_of(a: usize, b: usize) -> usize {
    debug_assert_eq!(a, b);
    a
}

#[derive(Clone, Copy, PartialEq)]
enum Goal {
    Min,
    Max,
}

impl Goal {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Goal::Min => a < b,
            Goal::Max => a > b,
        }
    }
}

/// Per-axis two-body term `2(1 − cos q) + 2γ(1 − cos(k − q))` and its first
/// two derivatives in `q`.
fn axis2(k: f64, gamma: f64, q: f64) -> (f64, f64, f64) {
    let v = eps1(q) + gamma * eps1(k - q);
    let g = 2.0 * q.sin() - 2.0 * gamma * (k - q).sin();
    let h = 2.0 * q.cos() + 2.0 * gamma * (k - q).cos();
    (v, g, h)
}

fn refine_axis2(k: f64, gamma: f64, q0: f64, goal: Goal, step_cap: f64, tol: f64) -> (f64, f64) {
    let (mut q, mut best) = (q0, axis2(k, gamma, q0).0);
    for _ in 0..60 {
        let (v, g, h) = axis2(k, gamma, q);
        let curvature_ok = match goal {
            Goal::Min => h > 0.0,
            Goal::Max => h < 0.0,
        };
        if !curvature_ok || g == 0.0 {
            break;
        }
        let step = (-g / h).clamp(-step_cap, step_cap);
        let q_new = wrap_angle(q + step);
        let v_new = axis2(k, gamma, q_new).0;
        if goal.better(v, v_new) {
            break;
        }
        let change = (v_new - v).abs();
        q = q_new;
        best = v_new;
        if change < tol {
            break;
        }
    }
    (q, best)
}

/// Indices of periodic local extrema of `values`.
fn local_extrema_1d(values: &[f64], goal: Goal) -> Vec<usize> {
    let n = values.len();
    let mut out: Vec<usize> = (0..n)
        .filter(|&i| {
            let (l, r) = (values[(i + n - 1) % n], values[(i + 1) % n]);
            !goal.better(l, values[i]) && !goal.better(r, values[i])
        })
        .collect();
    cap_candidates(&mut out, |i| values[i], goal);
    out
}

fn cap_candidates(idx: &mut Vec<usize>, value: impl Fn(usize) -> f64, goal: Goal) {
    const MAX_CANDIDATES: usize = 8;
    idx.sort_by(|&a, &b| {
        let (va, vb) = (value(a), value(b));
        match goal {
            Goal::Min => va.total_cmp(&vb),
            Goal::Max => vb.total_cmp(&va),
        }
        .then(a.cmp(&b))
    });
    idx.truncate(MAX_CANDIDATES);
}

fn extremum_axis2(k: f64, gamma: f64, axis: &[f64], goal: Goal, tol: f64) -> (f64, f64) {
    let values: Vec<f64> = axis.iter().map(|&q| axis2(k, gamma, q).0).collect();
    let h = std::f64::consts::TAU / axis.len() as f64;
    let mut best: Option<(f64, f64)> = None;
    for i in local_extrema_1d(&values, goal) {
        let (q, v) = refine_axis2(k, gamma, axis[i], goal, h, tol);
        let cand = if goal.better(values[i], v) {
            (axis[i], values[i])
        } else {
            (q, v)
        };
        if best.is_none_or(|b| goal.better(cand.1, b.1)) {
            best = Some(cand);
        }
    }
    // the global extremum of the scan is always a local one
    best.expect("nonempty candidate list")
}

fn check_tol(refine_tol: f64) -> Result<()> {
    if !(refine_tol > 0.0 && refine_tol.is_finite()) {
        return Err(Error::invalid(format!("refine_tol must be > 0, got {refine_tol}")));
    }
    Ok(())
}

/// `[𝓔_min(k), 𝓔_max(k)]`: the range of `q ↦ 𝓔_{γ,k}(q)` over the torus.
pub fn band_two_body(k: &TorusPoint, gamma: f64, grid: &QuadGrid, refine_tol: f64) -> Result<Band> {
    check_tol(refine_tol)?;
    let d = k.dim();
    let (mut lo, mut hi) = (0.0, 0.0);
    let (mut qmin, mut qmax) = ([0.0; 2], [0.0; 2]);
    for a in 0..d.get() {
        let ka = k.raw()[a];
        let (q, v) = extremum_axis2(ka, gamma, grid.axis(), Goal::Min, refine_tol);
        lo += v;
        qmin[a] = q;
        let (q, v) = extremum_axis2(ka, gamma, grid.axis(), Goal::Max, refine_tol);
        hi += v;
        qmax[a] = q;
    }
    Ok(Band {
        lo,
        hi: hi.max(lo),
        argmin: vec![TorusPoint::from_wrapped(d, qmin)],
        argmax: vec![TorusPoint::from_wrapped(d, qmax)],
    })
}

/// Per-axis three-body term with gradient and Hessian in `(p, q)`.
fn axis3(k: f64, gamma: f64, p: f64, q: f64) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let r = k - (p + q);
    let v = eps1(p) + eps1(q) + gamma * eps1(r);
    let sr = 2.0 * gamma * r.sin();
    let cr = 2.0 * gamma * r.cos();
    let g = [2.0 * p.sin() - sr, 2.0 * q.sin() - sr];
    let h = [[2.0 * p.cos() + cr, cr], [cr, 2.0 * q.cos() + cr]];
    (v, g, h)
}

fn refine_axis3(k: f64, gamma: f64, start: (f64, f64), goal: Goal, cap: f64, tol: f64) -> (f64, f64, f64) {
    let (mut p, mut q) = start;
    let mut best = axis3(k, gamma, p, q).0;
    for _ in 0..60 {
        let (v, g, h) = axis3(k, gamma, p, q);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let definite = det > 0.0
            && match goal {
                Goal::Min => h[0][0] > 0.0,
                Goal::Max => h[0][0] < 0.0,
            };
        if !definite {
            break;
        }
        let dp = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let dq = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        let (pn, qn) = (
            wrap_angle(p + dp.clamp(-cap, cap)),
            wrap_angle(q + dq.clamp(-cap, cap)),
        );
        let vn = axis3(k, gamma, pn, qn).0;
        if goal.better(v, vn) {
            break;
        }
        let change = (vn - v).abs();
        p = pn;
        q = qn;
        best = vn;
        if change < tol {
            break;
        }
    }
    (p, q, best)
}

fn extremum_axis3(k: f64, gamma: f64, axis: &[f64], goal: Goal, tol: f64) -> (f64, f64, f64) {
    let n = axis.len();
    let values: Vec<f64> = (0..n * n)
        .map(|ij| axis3(k, gamma, axis[ij / n], axis[ij % n]).0)
        .collect();
    let mut cands: Vec<usize> = (0..n * n)
        .filter(|&ij| {
            let (i, j) = (ij / n, ij % n);
            let v = values[ij];
            (0..3).all(|di| {
                (0..3).all(|dj| {
                    let nb = ((i + n + di - 1) % n) * n + (j + n + dj - 1) % n;
                    !goal.better(values[nb], v)
                })
            })
        })
        .collect();
    cap_candidates(&mut cands, |ij| values[ij], goal);
    let h = std::f64::consts::TAU / n as f64;
    let first = cands[0];
    let mut best = (axis[first / n], axis[first % n], values[first]);
    for ij in cands {
        let start = (axis[ij / n], axis[ij % n]);
        let (p, q, v) = refine_axis3(k, gamma, start, goal, h, tol);
        let cand = if goal.better(values[ij], v) {
            (start.0, start.1, values[ij])
        } else {
            (p, q, v)
        };
        if goal.better(cand.2, best.2) {
            best = cand;
        }
    }
    best
}

/// `[E_min(K), E_max(K)]`: the range of `(p, q) ↦ E(K; p, q)`.
pub fn band_three_body(big_k: &TorusPoint, gamma: f64, grid: &QuadGrid, refine_tol: f64) -> Result<Band> {
    check_tol(refine_tol)?;
    let d = big_k.dim();
    let (mut lo, mut hi) = (0.0, 0.0);
    let (mut pmin, mut qmin, mut pmax, mut qmax) = ([0.0; 2], [0.0; 2], [0.0; 2], [0.0; 2]);
    for a in 0..d.get() {
        let ka = big_k.raw()[a];
        let (p, q, v) = extremum_axis3(ka, gamma, grid.axis(), Goal::Min, refine_tol);
        lo += v;
        pmin[a] = p;
        qmin[a] = q;
        let (p, q, v) = extremum_axis3(ka, gamma, grid.axis(), Goal::Max, refine_tol);
        hi += v;
        pmax[a] = p;
        qmax[a] = q;
    }
    Ok(Band {
        lo,
        hi: hi.max(lo),
        argmin: vec![TorusPoint::from_wrapped(d, pmin), TorusPoint::from_wrapped(d, qmin)],
        argmax: vec![TorusPoint::from_wrapped(d, pmax), TorusPoint::from_wrapped(d, qmax)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn pt(x: &[f64]) -> TorusPoint {
        TorusPoint::wrap(x).unwrap()
    }

    fn grid(dim: Dim, n: usize) -> QuadGrid {
        QuadGrid::new(dim, n).unwrap()
    }

    /// Brute-force extremum over a dense product grid, independent of the
    /// per-axis search.
    fn dense_scan_three(k: &TorusPoint, gamma: f64, n: usize) -> (f64, f64) {
        let g = grid(k.dim(), n);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in g.nodes() {
            for q in g.nodes() {
                let e = three_body_dispersion(k, p, q, gamma);
                lo = lo.min(e);
                hi = hi.max(e);
            }
        }
        (lo, hi)
    }

    #[test]
    fn coupling_validation() {
        assert!(Coupling::new(0.0, 1.0, Dim::One).is_err());
        assert!(Coupling::new(1.0, 0.0, Dim::One).is_err());
        assert!(Coupling::new(1.0, -2.0, Dim::Two).is_err());
        assert!(Coupling::new(f64::NAN, 1.0, Dim::One).is_err());
        let c = Coupling::new(-1.0, 2.0, Dim::Two).unwrap();
        assert!(!c.repulsive());
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon(&TorusPoint::zero(Dim::One)), 0.0);
        assert_abs_diff_eq!(epsilon(&pt(&[PI / 2.0])), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(epsilon(&pt(&[PI, PI])), 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(epsilon(&TorusPoint::corner(Dim::Two)), 8.0, epsilon = 1e-15);
    }

    #[test]
    fn two_body_dispersion_examples() {
        let z = TorusPoint::zero(Dim::One);
        assert_abs_diff_eq!(two_body_dispersion(&z, &pt(&[PI]), 1.0), 8.0, epsilon = 1e-14);
        let k = pt(&[0.7]);
        assert_abs_diff_eq!(two_body_dispersion(&k, &k, 3.3), epsilon(&k), epsilon = 1e-15);
        let kpi = pt(&[PI]);
        for q in [-2.0, -0.3, 0.0, 1.1, 3.0] {
            assert_abs_diff_eq!(two_body_dispersion(&kpi, &pt(&[q]), 1.0), 4.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn three_body_dispersion_examples() {
        let z = TorusPoint::zero(Dim::One);
        assert_eq!(three_body_dispersion(&z, &z, &z, 1.0), 0.0);
        let p = pt(&[PI]);
        assert_abs_diff_eq!(three_body_dispersion(&z, &p, &p, 1.0), 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(three_body_dispersion(&p, &z, &z, 2.0), 8.0, epsilon = 1e-14);
    }

    #[test]
    fn band_two_body_examples() {
        let g = grid(Dim::One, 64);
        let b = band_two_body(&TorusPoint::zero(Dim::One), 1.0, &g, 1e-13).unwrap();
        assert_abs_diff_eq!(b.lo, 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(b.hi, 8.0, epsilon = 1e-13);
        assert!(!b.is_degenerate());

        let b = band_two_body(&pt(&[PI]), 1.0, &g, 1e-13).unwrap();
        assert_abs_diff_eq!(b.lo, 4.0, epsilon = 1e-13);
        assert_abs_diff_eq!(b.hi, 4.0, epsilon = 1e-13);
        assert!(b.is_degenerate());

        let b = band_two_body(&TorusPoint::corner(Dim::Two), 1.0, &grid(Dim::Two, 16), 1e-13).unwrap();
        assert_abs_diff_eq!(b.lo, 8.0, epsilon = 1e-13);
        assert_abs_diff_eq!(b.hi, 8.0, epsilon = 1e-13);
        assert!(b.is_degenerate());
    }

    #[test]
    fn band_two_body_off_grid_extremum() {
        // γ = 1: per axis 4 − 4 cos(k/2) cos(q − k/2), so the top is 4 + 4|cos(k/2)|.
        let k = pt(&[1.0]);
        let b = band_two_body(&k, 1.0, &grid(Dim::One, 16), 1e-14).unwrap();
        assert_abs_diff_eq!(b.hi, 4.0 + 4.0 * 0.5f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.lo, 4.0 - 4.0 * 0.5f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(two_body_dispersion(&k, &b.argmax[0], 1.0), b.hi, epsilon = 1e-12);
    }

    #[test]
    fn band_three_body_examples() {
        let g = grid(Dim::One, 64);
        let z = TorusPoint::zero(Dim::One);
        let b = band_three_body(&z, 1.0, &g, 1e-13).unwrap();
        assert_abs_diff_eq!(b.lo, 0.0, epsilon = 1e-13);
        // 6 − 2(cos p + cos q + cos(p + q)) peaks at p = q = 2π/3.
        assert_abs_diff_eq!(b.hi, 9.0, epsilon = 1e-11);
        let (slo, shi) = dense_scan_three(&z, 1.0, 512);
        assert!(b.lo <= slo + 1e-12 && b.hi >= shi - 1e-12);
        assert!(shi > 9.0 - 1e-3);

        let kpi = pt(&[PI]);
        let b = band_three_body(&kpi, 1.0, &g, 1e-13).unwrap();
        let (slo, _) = dense_scan_three(&kpi, 1.0, 512);
        // minimum 3 at p = q = π/3
        assert_abs_diff_eq!(b.lo, 3.0, epsilon = 1e-11);
        assert!(b.lo > 0.0 && b.lo <= slo + 1e-12 && slo - b.lo < 1e-3);

        for kk in [0.3, 1.9, -2.5] {
            let k = pt(&[kk]);
            let b = band_three_body(&k, 2.0, &g, 1e-13).unwrap();
            assert!(b.lo <= three_body_dispersion(&k, &z, &z, 2.0));
            assert!(b.lo <= 2.0 * epsilon(&k) + 1e-15);
        }
    }

    #[test]
    fn band_three_body_two_dimensional_is_axis_sum() {
        let k2 = pt(&[0.4, -1.3]);
        let g2 = grid(Dim::Two, 24);
        let b2 = band_three_body(&k2, 1.5, &g2, 1e-13).unwrap();
        let g1 = grid(Dim::One, 24);
        let bx = band_three_body(&pt(&[0.4]), 1.5, &g1, 1e-13).unwrap();
        let by = band_three_body(&pt(&[-1.3]), 1.5, &g1, 1e-13).unwrap();
        assert_abs_diff_eq!(b2.lo, bx.lo + by.lo, epsilon = 1e-13);
        assert_abs_diff_eq!(b2.hi, bx.hi + by.hi, epsilon = 1e-13);
        let (slo, shi) = dense_scan_three(&k2, 1.5, 24);
        assert!(b2.lo <= slo + 1e-12 && b2.hi >= shi - 1e-12);
    }

    #[test]
    fn refine_tol_must_be_positive() {
        let g = grid(Dim::One, 8);
        assert!(band_two_body(&TorusPoint::zero(Dim::One), 1.0, &g, 0.0).is_err());
        assert!(band_three_body(&TorusPoint::zero(Dim::One), 1.0, &g, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn epsilon_range_and_evenness(x in -10.0f64..10.0, y in -10.0f64..10.0) {
            let p = pt(&[x, y]);
            let e = epsilon(&p);
            prop_assert!((0.0..=8.0).contains(&e));
            prop_assert!((e - epsilon(&-p)).abs() < 1e-14);
        }

        #[test]
        fn three_body_symmetric(k in -4.0f64..4.0, p in -4.0f64..4.0, q in -4.0f64..4.0, g in 0.1f64..5.0) {
            let (k, p, q) = (pt(&[k, -k]), pt(&[p, q]), pt(&[q, p]));
            let e = three_body_dispersion(&k, &p, &q, g);
            prop_assert_eq!(e, three_body_dispersion(&k, &q, &p, g));
            prop_assert!(e >= 0.0);
        }

        #[test]
        fn band_two_body_even_in_k(k in -3.1f64..3.1, g in 0.2f64..4.0) {
            let gr = grid(Dim::One, 32);
            let a = band_two_body(&pt(&[k]), g, &gr, 1e-13).unwrap();
            let b = band_two_body(&pt(&[-k]), g, &gr, 1e-13).unwrap();
            prop_assert!((a.lo - b.lo).abs() < 1e-12);
            prop_assert!((a.hi - b.hi).abs() < 1e-12);
        }

        #[test]
        fn band_refinement_consistent_under_grid_doubling(k in -3.1f64..3.1, g in 0.2f64..4.0) {
            let tol = 1e-12;
            let k = pt(&[k]);
            let a = band_two_body(&k, g, &grid(Dim::One, 16), tol).unwrap();
            let b = band_two_body(&k, g, &grid(Dim::One, 32), tol).unwrap();
            prop_assert!((a.lo - b.lo).abs() < 10.0 * tol && (a.hi - b.hi).abs() < 10.0 * tol);
            let a = band_three_body(&k, g, &grid(Dim::One, 16), tol).unwrap();
            let b = band_three_body(&k, g, &grid(Dim::One, 32), tol).unwrap();
            prop_assert!((a.lo - b.lo).abs() < 10.0 * tol && (a.hi - b.hi).abs() < 10.0 * tol);
        }
    }
}
