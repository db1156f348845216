//! Three-particle fiber operator `H_μ(K)`: two identical fermions with
//! momenta `p, q` and a third particle of mass ratio `1/γ` carrying `K − p − q`,
//! with contact interaction `μ` between the third particle and each fermion.
//!
//! Acting on antisymmetric `f`,
//!
//! ```text
//! (H f)(p, q) = E(K; p, q) f(p, q) + μ (φ(p) − φ(q)),   φ(p) = ∫ f(p, t) η(dt)
//! ```
//!
//! Bound states are found as zeros of the Fredholm determinant
//! `D(z) = det(I − L(z))` of the symmetrized kernel
//!
//! ```text
//! L(z)(p, q) = μ Δ(p, z)^{-1/2} Δ(q, z)^{-1/2} / (E(K; p, q) − z),
//! Δ(p, z)    = 1 + μ ∫ η(dt) / (E(K; p, t) − z),
//! ```
//!
//! outside the essential spectrum, where every `Δ` is positive.

use serde::Serialize;

use crate::defaults;
use crate::dispersion::{band_three_body, epsilon, three_body_dispersion, Band, Coupling};
use crate::error::{Error, Result};
use crate::field::GridFunction;
use crate::linalg;
use crate::oracle;
use crate::par;
use crate::roots;
use crate::torus::{QuadGrid, TorusPoint};
use crate::two_body::{self, solve_bound_state};

fn check_dims(k: &TorusPoint, cpl: &Coupling, grid: &QuadGrid) -> Result<()> {
    if k.dim() != cpl.dim() || grid.dim() != cpl.dim() {
        return Err(Error::invalid("momentum, coupling and grid dimensions differ"));
    }
    Ok(())
}

/// `Z(K, p) = e_μ(K − p) + ε(p)`: a bound pair recoiling against a free fermion.
pub fn branch_energy(big_k: &TorusPoint, p: &TorusPoint, cpl: &Coupling, grid: &QuadGrid, tol: f64) -> Result<f64> {
    Ok(solve_bound_state(&(*big_k - *p), cpl, grid, tol)?.energy + epsilon(p))
}

#[derive(Debug, Clone, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone)]
pub struct EssentialSpectrumReport {
    pub big_k: TorusPoint,
    /// `[E_min(K), E_max(K)]`.
    pub three_body_band: Band,
    /// Range of `Z(K, ·)`; `argmin`/`argmax` hold the extremal `p`.
    pub two_body_branch: Band,
    pub tau_b: f64,
    pub tau_t: f64,
    /// Disjoint, sorted.
    pub pieces: Vec<Interval>,
}

impl EssentialSpectrumReport {
    /// Threshold on the bound-state side for this coupling sign.
    pub fn threshold(&self, mu: f64) -> f64 {
        if mu > 0.0 {
            self.tau_t
        } else {
            self.tau_b
        }
    }

    pub fn distance(&self, e: f64) -> f64 {
        self.pieces
            .iter()
            .map(|iv| {
                if e < iv.lo {
                    iv.lo - e
                } else if e > iv.hi {
                    e - iv.hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Essential spectrum of `H_μ(K)`: the three-particle band together with
/// the range of `Z(K, ·)`, scanned over `ps` and polished off the scan.
pub fn essential_spectrum(
    big_k: &TorusPoint,
    cpl: &Coupling,
    ps: &[TorusPoint],
    grid: &QuadGrid,
    tol: f64,
) -> Result<EssentialSpectrumReport> {
    check_dims(big_k, cpl, grid)?;
    if ps.is_empty() {
        return Err(Error::invalid("p sweep is empty"));
    }
    let band = band_three_body(big_k, cpl.gamma(), grid, defaults::REFINE_TOL)?;
    let z: Vec<f64> = par::map_slice(ps, |p| branch_energy(big_k, p, cpl, grid, tol).map_err(|e| e.at(*p)))
        .into_iter()
        .collect::<Result<_>>()?;
    let (imin, imax) = two_body::extreme_indices(z.iter().copied());
    let h = sweep_spacing(ps.len(), cpl.dim().get());
    let eval = |p: &TorusPoint| branch_energy(big_k, p, cpl, grid, tol);
    let (pmin, zmin) = roots::polish_on_torus(ps[imin], z[imin], -1.0, h, eval)?;
    let (pmax, zmax) = roots::polish_on_torus(ps[imax], z[imax], 1.0, h, eval)?;
    let branch = Band {
        lo: zmin,
        hi: zmax,
        argmin: vec![pmin],
        argmax: vec![pmax],
    };
    let pieces = union(
        Interval { lo: zmin, hi: zmax },
        Interval { lo: band.lo, hi: band.hi },
    );
    Ok(EssentialSpectrumReport {
        big_k: *big_k,
        tau_b: pieces[0].lo,
        tau_t: pieces[pieces.len() - 1].hi,
        three_body_band: band,
        two_body_branch: branch,
        pieces,
    })
}

pub(crate) fn sweep_spacing(len: usize, d: usize) -> f64 {
    std::f64::consts::TAU / (len as f64).powf(1.0 / d as f64).round().max(1.0)
}

fn union(a: Interval, b: Interval) -> Vec<Interval> {
    let (a, b) = if a.lo <= b.lo { (a, b) } else { (b, a) };
    if b.lo <= a.hi {
        vec![Interval { lo: a.lo, hi: a.hi.max(b.hi) }]
    } else {
        vec![a, b]
    }
}

/// `E(K; p_i, p_j)` for all node pairs, row-major.
pub fn pair_energies(big_k: &TorusPoint, gamma: f64, grid: &QuadGrid) -> Vec<f64> {
    let n = grid.len();
    let nodes = grid.nodes();
    let mut e = vec![0.0; n * n];
    par::fill_rows(&mut e, n, |i, row| {
        for (j, out) in row.iter_mut().enumerate() {
            *out = three_body_dispersion(big_k, &nodes[i], &nodes[j], gamma);
        }
    });
    e
}

/// `Δ(K, p; z)` by quadrature over the partner momentum.
pub fn channel_det(big_k: &TorusPoint, p: &TorusPoint, z: f64, cpl: &Coupling, grid: &QuadGrid) -> Result<f64> {
    check_dims(big_k, cpl, grid)?;
    let row: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|q| three_body_dispersion(big_k, p, q, cpl.gamma()))
        .collect();
    two_body::resolvent_det(&row, cpl.mu(), z, grid)
}

/// Discretized Birman–Schwinger kernel at one spectral parameter.
#[derive(Debug, Clone)]
pub struct BsKernel {
    pub z: f64,
    pub size: usize,
    /// Row-major `L(z)`.
    pub entries: Vec<f64>,
    /// `Δ(K, p_i; z)`.
    pub channel: Vec<f64>,
}

fn assemble(energies: &[f64], z: f64, cpl: &Coupling, grid: &QuadGrid) -> Result<BsKernel> {
    let n = grid.len();
    let channel: Vec<f64> = par::map_range(n, |i| two_body::resolvent_det(&energies[i * n..(i + 1) * n], cpl.mu(), z, grid))
        .into_iter()
        .collect::<Result<_>>()?;
    if let Some((i, &delta)) = channel.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
        return Err(Error::SideViolation {
            p: grid.node(i),
            z,
            delta,
        });
    }
    let s: Vec<f64> = channel.iter().map(|d| 1.0 / d.sqrt()).collect();
    let c = cpl.mu() * grid.weight();
    let mut entries = vec![0.0; n * n];
    par::fill_rows(&mut entries, n, |i, row| {
        for (j, out) in row.iter_mut().enumerate() {
            *out = c * s[i] * s[j] / (energies[i * n + j] - z);
        }
    });
    Ok(BsKernel {
        z,
        size: n,
        entries,
        channel,
    })
}

/// `L(z)` on the quadrature grid.
pub fn bs_matrix(big_k: &TorusPoint, z: f64, cpl: &Coupling, grid: &QuadGrid) -> Result<BsKernel> {
    check_dims(big_k, cpl, grid)?;
    assemble(&pair_energies(big_k, cpl.gamma(), grid), z, cpl, grid)
}

/// `det(I − L)` kept as sign and log-magnitude.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FredholmDet {
    pub sign: f64,
    pub ln_abs: f64,
}

impl FredholmDet {
    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

fn det_of(kernel: &BsKernel) -> Result<FredholmDet> {
    let n = kernel.size;
    let mut m: Vec<f64> = kernel.entries.iter().map(|x| -x).collect();
    for i in 0..n {
        m[i * n + i] += 1.0;
    }
    let (sign, ln_abs) = linalg::log_det(n, &m)?;
    Ok(FredholmDet { sign, ln_abs })
}

pub fn fredholm_det(big_k: &TorusPoint, z: f64, cpl: &Coupling, grid: &QuadGrid) -> Result<FredholmDet> {
    det_of(&bs_matrix(big_k, z, cpl, grid)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side3 {
    AboveTop,
    BelowBottom,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootInfo {
    pub energy: f64,
    /// `|D|` at the reported energy.
    pub residual: f64,
    /// Found as a local minimum of `|D|` without a sign change.
    pub tangent: bool,
}

#[derive(Debug, Clone)]
pub struct BoundState3 {
    pub big_k: TorusPoint,
    /// The zero furthest from the essential spectrum.
    pub energy: f64,
    pub side: Side3,
    /// Every zero found in the search window, nearest the threshold first.
    pub roots: Vec<RootInfo>,
    /// Unit-eigenvalue eigenvector `ψ` of `L(energy)`, grid-normalized.
    pub bs_eigenvector: GridFunction,
    /// Eigenvalue of `L(energy)` closest to 1.
    pub bs_eigenvalue: f64,
    /// `|D(energy)|`.
    pub residual: f64,
    pub grid_n: usize,
    pub threshold: f64,
}

/// The bound state of `H_μ(K)` beyond the essential spectrum.
///
/// Samples `D` on geometric offsets from the threshold, first over
/// `[δ, span]` and then over successive doublings of the span while nothing
/// is found. Every sign change is refined to `tol`; `|D|` minima that touch
/// zero without changing sign are reported as tangent roots.
pub fn solve_three_body(
    big_k: &TorusPoint,
    cpl: &Coupling,
    grid: &QuadGrid,
    tol: f64,
    ess: &EssentialSpectrumReport,
) -> Result<BoundState3> {
    check_dims(big_k, cpl, grid)?;
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tol must be positive, got {tol}")));
    }
    let mu = cpl.mu();
    let s = mu.signum();
    let threshold = ess.threshold(mu);
    let energies = pair_energies(big_k, cpl.gamma(), grid);
    let d_at = |x: f64| -> Result<f64> { Ok(det_of(&assemble(&energies, threshold + s * x, cpl, grid)?)?.value()) };

    let delta = defaults::three_body_offset(mu);
    let mut span = defaults::three_body_span(mu);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut lo = delta;
    let mut count = defaults::SCAN_SAMPLES;
    let mut found = Vec::new();
    for _ in 0..=defaults::SPAN_DOUBLINGS {
        let xs = geometric(lo, span, count);
        let vals: Vec<Result<f64>> = par::map_slice(&xs, |&x| d_at(x));
        for (x, v) in xs.into_iter().zip(vals) {
            if samples.last().is_some_and(|&(px, _)| px >= x) {
                continue;
            }
            samples.push((x, v?));
        }
        found = locate(&samples, &d_at, tol)?;
        if !found.is_empty() {
            break;
        }
        lo = span;
        span *= 2.0;
        count = defaults::SCAN_SAMPLES / 4;
    }
    if found.is_empty() {
        return Err(Error::NotFound {
            k: *big_k,
            samples: samples.iter().map(|&(x, d)| (threshold + s * x, d)).collect(),
        });
    }

    let best = found
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, |a, (x, _, _)| a.max(x));
    let energy = threshold + s * best;
    let kernel = assemble(&energies, energy, cpl, grid)?;
    let residual = det_of(&kernel)?.value().abs();
    let eig = linalg::sym_eigen(kernel.size, &kernel.entries)?;
    let k = (0..eig.values.len())
        .min_by(|&a, &b| (eig.values[a] - 1.0).abs().total_cmp(&(eig.values[b] - 1.0).abs()))
        .ok_or_else(|| Error::Linalg("empty kernel".into()))?;
    let mut psi = eig.vectors[k].clone();
    // grid normalization w Σ ψ² = 1, sign fixed by the largest component
    let scale = 1.0 / grid.weight().sqrt();
    let pivot = psi.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
    let sgn = if pivot < 0.0 { -1.0 } else { 1.0 };
    psi.iter_mut().for_each(|v| *v *= sgn * scale);

    Ok(BoundState3 {
        big_k: *big_k,
        energy,
        side: if mu > 0.0 { Side3::AboveTop } else { Side3::BelowBottom },
        roots: found
            .iter()
            .map(|&(x, r, tangent)| RootInfo {
                energy: threshold + s * x,
                residual: r,
                tangent,
            })
            .collect(),
        bs_eigenvector: GridFunction::new(grid.clone(), 1, psi)?,
        bs_eigenvalue: eig.values[k],
        residual,
        grid_n: grid.n(),
        threshold,
    })
}

fn geometric(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let r = (hi / lo).ln();
    (0..count)
        .map(|j| {
            if j + 1 == count {
                hi
            } else {
                lo * (r * j as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Zeros of `D` among sorted samples: `(offset, |D|, tangent)`.
fn locate<F>(samples: &[(f64, f64)], d_at: &F, tol: f64) -> Result<Vec<(f64, f64, bool)>>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut out = Vec::new();
    for w in samples.windows(2) {
        let ((xa, da), (xb, db)) = (w[0], w[1]);
        if da == 0.0 {
            out.push((xa, 0.0, false));
        } else if da.signum() != db.signum() && db != 0.0 {
            let r = roots::bisect(d_at, xa, xb, da, tol)?;
            let res = d_at(r.root).map(f64::abs).unwrap_or(f64::NAN);
            out.push((r.root, res, false));
        }
    }
    for w in samples.windows(3) {
        let ((xa, _), (xm, dm), (xb, _)) = (w[0], w[1], w[2]);
        let local_min = dm.abs() < w[0].1.abs() && dm.abs() < w[2].1.abs();
        if local_min && dm.signum() == w[0].1.signum() && dm.signum() == w[2].1.signum() {
            let (x, v) = roots::golden_max(|x| d_at(x).map(|d| -d.abs()), xa, xb, tol.max(1e-12 * xm))?;
            if -v < TANGENT_TOL {
                out.push((x, -v, true));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// `|D|` below which a sign-preserving minimum counts as a double zero.
const TANGENT_TOL: f64 = 1e-10;

/// Antisymmetric eigenfunction `f(p, q) = μ c (φ(p) − φ(q)) / (E − E(K; p, q))`
/// with `φ = Δ^{-1/2} ψ`, normalized with `c > 0`.
pub fn eigenfunction3(state: &BoundState3, cpl: &Coupling, grid: &QuadGrid) -> Result<GridFunction> {
    check_dims(&state.big_k, cpl, grid)?;
    if state.grid_n != grid.n() {
        return Err(Error::invalid("state and grid sizes differ"));
    }
    let energies = pair_energies(&state.big_k, cpl.gamma(), grid);
    let kernel = assemble(&energies, state.energy, cpl, grid)?;
    let n = grid.len();
    let phi: Vec<f64> = state
        .bs_eigenvector
        .values()
        .iter()
        .zip(&kernel.channel)
        .map(|(psi, d)| psi / d.sqrt())
        .collect();
    let mut f = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = cpl.mu() * (phi[i] - phi[j]) / (state.energy - energies[i * n + j]);
            f[i * n + j] = v;
            f[j * n + i] = -v;
        }
    }
    let w = grid.weight();
    let norm = (w * w * f.iter().map(|v| v * v).sum::<f64>()).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Linalg(format!("eigenfunction norm {norm}")));
    }
    let c = 1.0 / norm;
    f.iter_mut().for_each(|v| *v *= c);
    GridFunction::new(grid.clone(), 2, f)
}

#[derive(Debug, Clone, Serialize)]
pub struct WrongSideReport {
    pub passed: bool,
    /// Distance of the extreme dense eigenvalue inside the band edge on the
    /// forbidden side; negative means it crossed.
    pub margin: f64,
    pub extreme_eigenvalue: f64,
    pub edge: f64,
}

/// No eigenvalue of the dense operator lies beyond the three-particle band on
/// the side opposite the interaction sign.
pub fn wrong_side_check(big_k: &TorusPoint, cpl: &Coupling, grid: &QuadGrid, tol: f64) -> Result<WrongSideReport> {
    let ev = oracle::h3_matrix(big_k, cpl, grid, defaults::DENSE_LIMIT_PAIRS)?.eigenvalues()?;
    let band = band_three_body(big_k, cpl.gamma(), grid, defaults::REFINE_TOL)?;
    Ok(wrong_side_from_spectrum(&ev, &band, cpl.mu(), tol))
}

/// [`wrong_side_check`] on an already computed ascending spectrum.
pub fn wrong_side_from_spectrum(ev: &[f64], band: &Band, mu: f64, tol: f64) -> WrongSideReport {
    let (margin, extreme, edge) = if mu > 0.0 {
        (ev[0] - band.lo, ev[0], band.lo)
    } else {
        let top = ev[ev.len() - 1];
        (band.hi - top, top, band.hi)
    };
    WrongSideReport {
        passed: margin >= -tol,
        margin,
        extreme_eigenvalue: extreme,
        edge,
    }
}
