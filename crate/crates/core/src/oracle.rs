//! Brute-force reference layer: dense matrices of the fiber operators on the
//! quadrature grid, their spectra, the fermion contact amplitude and the
//! position-space decay of sampled eigenfunctions.
//!
//! Nothing here goes through the determinant or kernel code, so agreement
//! with those paths is an independent check.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::defaults;
use crate::dispersion::{three_body_dispersion, two_body_dispersion, Coupling};
use crate::error::{Error, Result};
use crate::field::GridFunction;
use crate::linalg;
use crate::par;
use crate::torus::{QuadGrid, TorusPoint};

#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// Delta functions on the grid nodes.
    Momentum { nodes: usize },
    /// `(e_{ij} − e_{ji})/√2` for node pairs `i < j`, in lexicographic order.
    AntisymmetricPairs { nodes: usize, pairs: Vec<(u32, u32)> },
}

/// Real symmetric matrix, row-major.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub dim: usize,
    pub entries: Vec<f64>,
    pub basis: Basis,
}

impl DenseOperator {
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::sym_eigenvalues(self.dim, &self.entries)
    }

    pub fn eigen(&self) -> Result<linalg::SymEigen> {
        linalg::sym_eigen(self.dim, &self.entries)
    }

    pub fn asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.entries[i * n + j] - self.entries[j * n + i]).abs());
            }
        }
        worst
    }
}

fn check_dims(p: &TorusPoint, cpl: &Coupling, grid: &QuadGrid) -> Result<()> {
    if p.dim() != cpl.dim() || grid.dim() != cpl.dim() {
        return Err(Error::invalid("momentum, coupling and grid dimensions differ"));
    }
    Ok(())
}

/// `h_μ(k)`: `diag(𝓔_{γ,k}(q_i)) + μ w 𝟙𝟙ᵀ`.
pub fn h_matrix(k: &TorusPoint, cpl: &Coupling, grid: &QuadGrid, limit: usize) -> Result<DenseOperator> {
    check_dims(k, cpl, grid)?;
    let n = grid.len();
    if n > limit {
        return Err(Error::SizeLimit { rows: n, limit });
    }
    let off = cpl.mu() * grid.weight();
    let mut entries = vec![off; n * n];
    for (i, q) in grid.nodes().iter().enumerate() {
        entries[i * n + i] += two_body_dispersion(k, q, cpl.gamma());
    }
    Ok(DenseOperator {
        dim: n,
        entries,
        basis: Basis::Momentum { nodes: n },
    })
}

/// Size of the antisymmetric pair basis over `nodes` grid points.
pub fn pair_count(nodes: usize) -> usize {
    nodes * nodes.saturating_sub(1) / 2
}

/// Position of the pair `(i, j)`, `i < j`, in the lexicographic pair order.
fn pair_index(nodes: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    i * nodes - i * (i + 1) / 2 + (j - i - 1)
}

/// `H_μ(K)` restricted to antisymmetric functions of the two fermion momenta.
///
/// In the basis `(e_{ij} − e_{ji})/√2`, `i < j`, the kinetic part is
/// `E(K; p_i, p_j)` and each partial average contributes `μ w` between pairs
/// sharing an index, with sign `+` when the shared index sits in the same
/// slot and `−` otherwise.
pub fn h3_matrix(big_k: &TorusPoint, cpl: &Coupling, grid: &QuadGrid, limit: usize) -> Result<DenseOperator> {
    check_dims(big_k, cpl, grid)?;
    let n = grid.len();
    let dim = pair_count(n);
    if dim > limit {
        return Err(Error::SizeLimit { rows: dim, limit });
    }
    let mut pairs = Vec::with_capacity(dim);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i as u32, j as u32));
        }
    }
    debug_assert_eq!(pairs.len(), dim);
    let c = cpl.mu() * grid.weight();
    let nodes = grid.nodes();
    let mut entries = vec![0.0; dim * dim];
    par::fill_rows(&mut entries, dim, |row, out| {
        let (i, j) = (pairs[row].0 as usize, pairs[row].1 as usize);
        out[row] = three_body_dispersion(big_k, &nodes[i], &nodes[j], cpl.gamma()) + 2.0 * c;
        // pairs (i, l) and (l, j): same slot, +; pairs (l, i) and (j, l): crossed, −
        for l in 0..n {
            if l != j && l != i {
                let (a, b, s) = if i < l { (i, l, 1.0) } else { (l, i, -1.0) };
                // (i, l) shares i in slot one with (i, j)
                out[pair_index(n, a, b)] += s * c;
                let (a, b, s) = if l < j { (l, j, 1.0) } else { (j, l, -1.0) };
                out[pair_index(n, a, b)] += s * c;
            }
        }
    });
    Ok(DenseOperator {
        dim,
        entries,
        basis: Basis::AntisymmetricPairs { nodes: n, pairs },
    })
}

/// Expands pair-basis coefficients into grid samples `f(p_i, p_j)` with the
/// same `L²` norm convention as [`GridFunction::norm`].
pub fn pairs_to_function(grid: &QuadGrid, coeffs: &[f64]) -> Result<GridFunction> {
    let n = grid.len();
    if coeffs.len() != pair_count(n) {
        return Err(Error::invalid("coefficient count does not match the pair basis"));
    }
    // unit basis vector ↦ ±1/√2 at (i,j),(j,i); dividing by w restores the
    // grid norm w² Σ |f|² = Σ |c|²
    let scale = std::f64::consts::FRAC_1_SQRT_2 / grid.weight();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = scale * coeffs[pair_index(n, i, j)];
            values[i * n + j] = v;
            values[j * n + i] = -v;
        }
    }
    GridFunction::new(grid.clone(), 2, values)
}

/// `(H f)(p_i, p_j) = E(K; p_i, p_j) f_ij + μ (w Σ_t f_it + w Σ_t f_tj)` for
/// two-slot samples, without assuming antisymmetry.
pub fn apply_h3(big_k: &TorusPoint, cpl: &Coupling, f: &GridFunction) -> Result<Vec<f64>> {
    let grid = f.grid();
    check_dims(big_k, cpl, grid)?;
    if f.slots() != 2 {
        return Err(Error::invalid("expected a two-slot function"));
    }
    let n = grid.len();
    let w = grid.weight();
    let v = f.values();
    let rows: Vec<f64> = (0..n).map(|i| w * v[i * n..(i + 1) * n].iter().sum::<f64>()).collect();
    let cols: Vec<f64> = (0..n).map(|j| w * (0..n).map(|t| v[t * n + j]).sum::<f64>()).collect();
    let nodes = grid.nodes();
    let mut out = vec![0.0; n * n];
    par::fill_rows(&mut out, n, |i, row| {
        for (j, o) in row.iter_mut().enumerate() {
            let e = three_body_dispersion(big_k, &nodes[i], &nodes[j], cpl.gamma());
            *o = e * v[i * n + j] + cpl.mu() * (rows[i] + cols[j]);
        }
    });
    Ok(out)
}

/// `max_s |Σ_t w f(t, s − t)|`: the amplitude a contact interaction between
/// the two fermions would see. Vanishes for antisymmetric `f`.
pub fn contact_amplitude(f: &GridFunction) -> Result<f64> {
    if f.slots() != 2 {
        return Err(Error::invalid("expected a two-slot function"));
    }
    let grid = f.grid();
    let n = grid.len();
    let w = grid.weight();
    let amps = par::map_range(n, |s| {
        // pair t with s − t so each antisymmetric pair cancels exactly
        let mut acc = 0.0;
        for t in 0..n {
            let u = grid.sub_index(s, t);
            if t < u {
                acc += f.at(t, u) + f.at(u, t);
            } else if t == u {
                acc += f.at(t, t);
            }
        }
        (w * acc).abs()
    });
    Ok(amps.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct PauliReport {
    pub max_violation: f64,
    pub passed: bool,
}

/// Contact amplitude of an antisymmetric function; rejects other input.
pub fn pauli_check(f: &GridFunction) -> Result<PauliReport> {
    if f.slots() != 2 {
        return Err(Error::invalid("expected a two-slot function"));
    }
    let defect = f.antisymmetry_defect();
    if defect != 0.0 {
        return Err(Error::invalid(format!(
            "input is not antisymmetric: max |f(p,q) + f(q,p)| = {defect:e}"
        )));
    }
    let max_violation = contact_amplitude(f)?;
    Ok(PauliReport {
        max_violation,
        passed: max_violation < defaults::PAULI_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    /// Least-squares slope of `ln max_{|x|=r} |ψ(x)|` against `r`.
    pub slope: Option<f64>,
    pub threshold: f64,
    /// The position profile is concentrated at the origin, so there is no
    /// tail to fit.
    pub skipped: bool,
    pub passed: bool,
    /// Radii used in the fit.
    pub fit_range: (usize, usize),
}

/// Fits the exponential decay rate of `f` in position space.
///
/// Each momentum slot is Fourier transformed to the lattice; the radius of a
/// site is its largest min-image coordinate. The fit uses radii in
/// `[n/8, 3n/8]` whose profile sits above the round-off floor.
pub fn decay_check(f: &GridFunction, threshold: f64) -> Result<DecayReport> {
    let grid = f.grid();
    let n = grid.n();
    if !n.is_power_of_two() {
        return Err(Error::invalid(format!("grid size {n} is not a power of two")));
    }
    let norm = f.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!("input is not normalized: norm {norm}")));
    }
    let rank = f.slots() * grid.dim().get();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_all_axes(&mut data, n, rank);

    let half = n / 2;
    let mut profile = vec![0.0f64; half + 1];
    for (flat, z) in data.iter().enumerate() {
        let mut rem = flat;
        let mut r = 0;
        for _ in 0..rank {
            let x = rem % n;
            rem /= n;
            r = r.max(x.min(n - x));
        }
        profile[r] = profile[r].max(z.norm());
    }
    let peak = profile.iter().copied().fold(0.0, f64::max);
    let floor = 1e-12 * peak;
    if profile[1..].iter().all(|&m| m <= floor) {
        return Ok(DecayReport {
            slope: None,
            threshold,
            skipped: true,
            passed: true,
            fit_range: (0, 0),
        });
    }
    let fit = |lo: usize, hi: usize| -> Option<(f64, (usize, usize))> {
        let pts: Vec<(f64, f64)> = (lo..=hi)
            .filter(|&r| profile[r] > floor)
            .map(|r| (r as f64, profile[r].ln()))
            .collect();
        (pts.len() >= 3).then(|| (least_squares_slope(&pts), (lo, hi)))
    };
    let (lo, hi) = ((n / 8).max(1), 3 * n / 8);
    let (slope, range) = fit(lo, hi)
        .or_else(|| fit(1, hi))
        .or_else(|| fit(1, half))
        .unwrap_or((f64::NEG_INFINITY, (1, half)));
    Ok(DecayReport {
        slope: Some(slope),
        threshold,
        skipped: false,
        passed: slope < -threshold,
        fit_range: range,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    num / den
}

/// In-place FFT along each of `rank` axes of an `n^rank` row-major array.
fn fft_all_axes(data: &mut [Complex64], n: usize, rank: usize) {
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..rank {
        let stride = n.pow((rank - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for (t, l) in line.iter_mut().enumerate() {
                    *l = data[base + t * stride];
                }
                fft.process(&mut line);
                for (t, l) in line.iter().enumerate() {
                    data[base + t * stride] = *l;
                }
            }
        }
    }
}
