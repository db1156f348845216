//! Torus geometry, uniform periodic grids and Haar-measure quadrature.
//!
//! The Brillouin zone is `[-π, π)^d` with `d ∈ {1, 2}`. Integrals against the
//! normalized Haar measure are approximated by the periodic trapezoid rule on
//! an `n^d` tensor grid with nodes `-π + 2πj/n`, which places both `0` and
//! `(π, …, π) ≡ (-π, …, -π)` on the grid whenever `n` is even.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn get(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        match d {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            _ => Err(Error::invalid(format!("dimension must be 1 or 2, got {d}"))),
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}

/// Reduces an angle to `[-π, π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x - TAU * ((x + PI) / TAU).floor();
    // Rounding can land exactly on the excluded right end.
    if y >= PI {
        y - TAU
    } else if y < -PI {
        -PI
    } else {
        y
    }
}

/// A quasi-momentum in `[-π, π)^d`.
///
/// Coordinates are always stored wrapped. Unused trailing coordinates (for
/// `d = 1`) are zero.
#[derive(Clone, Copy, PartialEq)]
pub struct TorusPoint {
    dim: Dim,
    coords: [f64; 2],
}

impl TorusPoint {
    /// Wraps raw coordinates onto the torus. The slice length sets `d`.
    pub fn wrap(raw: &[f64]) -> Result<Self> {
        let dim = Dim::try_from(raw.len())?;
        if let Some(bad) = raw.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
        let mut coords = [0.0; 2];
        for (c, &x) in coords.iter_mut().zip(raw) {
            *c = wrap_angle(x);
        }
        Ok(TorusPoint { dim, coords })
    }

    pub fn zero(dim: Dim) -> Self {
        TorusPoint {
            dim,
            coords: [0.0; 2],
        }
    }

    /// The corner `(π, …, π)`, stored as `(-π, …, -π)`.
    pub fn corner(dim: Dim) -> Self {
        let mut coords = [0.0; 2];
        coords[..dim.get()].fill(-PI);
        TorusPoint { dim, coords }
    }

    /// Same value in every coordinate.
    pub fn splat(dim: Dim, x: f64) -> Result<Self> {
        TorusPoint::wrap(&vec![x; dim.get()])
    }

    pub(crate) fn from_wrapped(dim: Dim, coords: [f64; 2]) -> Self {
        TorusPoint { dim, coords }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim.get()]
    }

    pub(crate) fn raw(&self) -> [f64; 2] {
        self.coords
    }

    fn combine(self, rhs: TorusPoint, op: impl Fn(f64, f64) -> f64) -> TorusPoint {
        assert_eq!(self.dim, rhs.dim, "torus points of different dimension");
        let mut coords = [0.0; 2];
        for (i, c) in coords.iter_mut().enumerate().take(self.dim.get()) {
            *c = wrap_angle(op(self.coords[i], rhs.coords[i]));
        }
        TorusPoint {
            dim: self.dim,
            coords,
        }
    }
}

impl fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl Add for TorusPoint {
    type Output = TorusPoint;
    fn add(self, rhs: TorusPoint) -> TorusPoint {
        self.combine(rhs, |a, b| a + b)
    }
}

impl Sub for TorusPoint {
    type Output = TorusPoint;
    fn sub(self, rhs: TorusPoint) -> TorusPoint {
        self.combine(rhs, |a, b| a - b)
    }
}

impl Neg for TorusPoint {
    type Output = TorusPoint;
    fn neg(self) -> TorusPoint {
        TorusPoint::zero(self.dim) - self
    }
}

/// Uniform tensor grid on the torus carrying equal weights `1/n^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    dim: Dim,
    n: usize,
    axis: Vec<f64>,
    nodes: Vec<TorusPoint>,
}

impl QuadGrid {
    /// `n` must be even and at least 8.
    pub fn new(dim: Dim, n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::invalid(format!(
                "nodes per axis must be even and >= 8, got {n}"
            )));
        }
        let axis: Vec<f64> = (0..n)
            .map(|j| -PI + TAU * j as f64 / n as f64)
            .collect();
        let nodes = match dim {
            Dim::One => axis
                .iter()
                .map(|&x| TorusPoint::from_wrapped(dim, [x, 0.0]))
                .collect(),
            Dim::Two => axis
                .iter()
                .flat_map(|&x| axis.iter().map(move |&y| TorusPoint::from_wrapped(dim, [x, y])))
                .collect(),
        };
        Ok(QuadGrid {
            dim,
            n,
            axis,
            nodes,
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature weight of every node.
    pub fn weight(&self) -> f64 {
        1.0 / self.nodes.len() as f64
    }

    /// Row-major node list.
    pub fn nodes(&self) -> &[TorusPoint] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> TorusPoint {
        self.nodes[idx]
    }

    /// One-dimensional axis values.
    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    /// Spacing between neighbouring nodes along an axis.
    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    /// Per-axis integer indices of a flat node index.
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            Dim::One => [idx, 0],
            Dim::Two => [idx / self.n, idx % self.n],
        }
    }

    pub fn flat_index(&self, mi: [usize; 2]) -> usize {
        match self.dim {
            Dim::One => mi[0],
            Dim::Two => mi[0] * self.n + mi[1],
        }
    }

    fn axis_map(&self, idx: usize, f: impl Fn(usize) -> usize) -> usize {
        let mut mi = self.multi_index(idx);
        for m in mi.iter_mut().take(self.dim.get()) {
            *m = f(*m);
        }
        self.flat_index(mi)
    }

    /// Index of the node `-p_idx`.
    pub fn neg_index(&self, idx: usize) -> usize {
        let n = self.n;
        self.axis_map(idx, |j| (n - j) % n)
    }

    /// Index of the node `p_a + p_b`.
    pub fn add_index(&self, a: usize, b: usize) -> usize {
        let (n, ma, mb) = (self.n, self.multi_index(a), self.multi_index(b));
        let mut out = [0; 2];
        for ax in 0..self.dim.get() {
            // (-π + 2πa/n) + (-π + 2πb/n) = -π + 2π(a + b - n/2)/n
            out[ax] = (ma[ax] + mb[ax] + n / 2) % n;
        }
        self.flat_index(out)
    }

    /// Index of the node `p_a - p_b`.
    pub fn sub_index(&self, a: usize, b: usize) -> usize {
        self.add_index(a, self.neg_index(b))
    }

    /// Index of the grid node nearest to `p`.
    pub fn nearest_index(&self, p: &TorusPoint) -> usize {
        let n = self.n as f64;
        let mut mi = [0; 2];
        for (ax, m) in mi.iter_mut().enumerate().take(self.dim.get()) {
            let j = ((p.raw()[ax] + PI) / TAU * n).round() as usize;
            *m = j % self.n;
        }
        self.flat_index(mi)
    }
}

/// `per_axis^d` evenly spaced momenta `-π + 2πj/per_axis`, row-major.
/// Negation-closed whenever `per_axis` is even.
pub fn sweep(dim: Dim, per_axis: usize) -> Vec<TorusPoint> {
    let axis: Vec<f64> = (0..per_axis)
        .map(|j| wrap_angle(-PI + TAU * j as f64 / per_axis as f64))
        .collect();
    match dim {
        Dim::One => axis.iter().map(|&x| TorusPoint::from_wrapped(dim, [x, 0.0])).collect(),
        Dim::Two => axis
            .iter()
            .flat_map(|&x| axis.iter().map(move |&y| TorusPoint::from_wrapped(dim, [x, y])))
            .collect(),
    }
}

/// Periodic trapezoid rule: the weighted node sum in row-major order.
pub fn quad_integrate<F>(f: F, grid: &QuadGrid) -> Result<f64>
where
    F: Fn(&TorusPoint) -> f64,
{
    let mut acc = 0.0;
    for node in grid.nodes() {
        let v = f(node);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                node: *node,
                value: v,
            });
        }
        acc += v;
    }
    Ok(acc * grid.weight())
}
