//! Two-particle fiber operator `h_μ(k) = h_{γ,0}(k) + μ v`.
//!
//! `h_{γ,0}(k)` multiplies by `𝓔_{γ,k}` and `v` averages over the torus, so
//! `h_μ(k)` is diagonal plus rank one. Its single eigenvalue outside the
//! band is the zero of
//!
//! ```text
//! Δ(k; z) = 1 + μ ∫ η(dq) / (𝓔_{γ,k}(q) − z)
//! ```
//!
//! above the band for `μ > 0` and below it for `μ < 0`.

use serde::Serialize;

use crate::defaults;
use crate::dispersion::{band_two_body, two_body_dispersion, Band, Coupling};
use crate::error::{Error, Result};
use crate::field::GridFunction;
use crate::par;
use crate::roots;
use crate::torus::{QuadGrid, TorusPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    AboveBand,
    BelowBand,
}

impl Side {
    pub fn of(mu: f64) -> Side {
        if mu > 0.0 {
            Side::AboveBand
        } else {
            Side::BelowBand
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundState2 {
    pub k: TorusPoint,
    pub energy: f64,
    pub side: Side,
    /// `[𝓔_min(k), 𝓔_max(k)]`, refined off the grid.
    pub band: Band,
    /// `|Δ(k; energy)|` on the quadrature grid.
    pub residual: f64,
    pub grid_n: usize,
    /// The fiber is flat and the rank-one closed form was used.
    pub degenerate: bool,
    /// `false` when the grid root lands inside the refined band, which
    /// happens when the binding energy is below the grid's energy spacing.
    pub resolved: bool,
}

fn check_dims(k: &TorusPoint, cpl: &Coupling, grid: &QuadGrid) -> Result<()> {
    if k.dim() != cpl.dim() || grid.dim() != cpl.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: k is {}d, coupling {}d, grid {}d",
            k.dim(),
            cpl.dim(),
            grid.dim()
        )));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!("tol must be positive, got {tol}")));
    }
    Ok(())
}

/// `𝓔_{γ,k}` on every grid node.
pub fn fiber_energies(k: &TorusPoint, gamma: f64, grid: &QuadGrid) -> Vec<f64> {
    grid.nodes()
        .iter()
        .map(|q| two_body_dispersion(k, q, gamma))
        .collect()
}

/// `1 + μ w Σ_i 1/(energies_i − z)` with the pole-safety check.
pub(crate) fn resolvent_det(energies: &[f64], mu: f64, z: f64, grid: &QuadGrid) -> Result<f64> {
    let mut sum = 0.0;
    for (i, &e) in energies.iter().enumerate() {
        let gap = e - z;
        if gap.abs() < defaults::POLE_SAFETY {
            return Err(Error::PoleProximity {
                z,
                energy: e,
                distance: gap.abs(),
                node: grid.node(i),
            });
        }
        sum += 1.0 / gap;
    }
    Ok(1.0 + mu * grid.weight() * sum)
}

/// `Δ(k; z)` by quadrature.
pub fn det2(k: &TorusPoint, z: f64, cpl: &Coupling, grid: &QuadGrid) -> Result<f64> {
    check_dims(k, cpl, grid)?;
    if !z.is_finite() {
        return Err(Error::invalid(format!("z must be finite, got {z}")));
    }
    resolvent_det(&fiber_energies(k, cpl.gamma(), grid), cpl.mu(), z, grid)
}

/// The unique eigenvalue `e_μ(k)` of `h_μ(k)` outside its band.
pub fn solve_bound_state(
    k: &TorusPoint,
    cpl: &Coupling,
    grid: &QuadGrid,
    tol: f64,
) -> Result<BoundState2> {
    check_dims(k, cpl, grid)?;
    check_tol(tol)?;
    let mu = cpl.mu();
    let band = band_two_body(k, cpl.gamma(), grid, defaults::REFINE_TOL)?;
    let energies = fiber_energies(k, cpl.gamma(), grid);
    let side = Side::of(mu);

    if band.is_degenerate() {
        // h = c I + μ v with v a projection: the eigenvalue is c + μ.
        let energy = band.lo + mu;
        let residual = resolvent_det(&energies, mu, energy, grid)?.abs();
        return Ok(BoundState2 {
            k: *k,
            energy,
            side,
            band,
            residual,
            grid_n: grid.n(),
            degenerate: true,
            resolved: true,
        });
    }

    // Work in the outward offset x from the refined band edge; the
    // determinant increases in x from −∞ at the grid edge towards 1.
    let s = mu.signum();
    let edge = if mu > 0.0 { band.hi } else { band.lo };
    let grid_edge = if mu > 0.0 {
        energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        energies.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let f = |x: f64| resolvent_det(&energies, mu, edge + s * x, grid);
    let x_pole = s * (grid_edge - edge);

    let mut x = defaults::bracket_delta(mu, cpl.dim());
    let mut fx = f(x)?;
    let (a, fa, b, fb);
    if fx < 0.0 {
        let mut expansions = 0;
        loop {
            let (xp, fp) = (x, fx);
            x *= 2.0;
            fx = f(x)?;
            if fx >= 0.0 {
                (a, fa, b, fb) = (xp, fp, x, fx);
                break;
            }
            expansions += 1;
            if expansions > 1100 {
                return Err(Error::NoSignChange {
                    k: *k,
                    lo: edge + s * xp,
                    hi: edge + s * x,
                });
            }
        }
    } else {
        loop {
            let gap = 0.5 * (x - x_pole);
            if gap < defaults::POLE_SAFETY {
                let (lo, hi) = (edge + s * x_pole, edge + s * x);
                return Err(Error::NoSignChange {
                    k: *k,
                    lo: lo.min(hi),
                    hi: lo.max(hi),
                });
            }
            let xn = x_pole + gap;
            let fnew = f(xn)?;
            if fnew < 0.0 {
                (a, fa, b, fb) = (xn, fnew, x, fx);
                break;
            }
            (x, fx) = (xn, fnew);
        }
    }

    let root = roots::brent(f, a, b, fa, fb, tol)?.root;
    let energy = edge + s * root;
    let residual = resolvent_det(&energies, mu, energy, grid)?.abs();
    Ok(BoundState2 {
        k: *k,
        energy,
        side,
        band,
        residual,
        grid_n: grid.n(),
        degenerate: false,
        resolved: root > 0.0,
    })
}

/// Normalized eigenfunction `μ c / (e − 𝓔_{γ,k})` with `c > 0`; the
/// constant function for a flat fiber.
pub fn eigenfunction2(state: &BoundState2, cpl: &Coupling, grid: &QuadGrid) -> Result<GridFunction> {
    check_dims(&state.k, cpl, grid)?;
    if state.grid_n != grid.n() {
        return Err(Error::invalid(format!(
            "state was solved on n = {}, grid has n = {}",
            state.grid_n,
            grid.n()
        )));
    }
    if !state.residual.is_finite() {
        return Err(Error::invalid("state residual is not finite"));
    }
    if state.degenerate {
        return GridFunction::new(grid.clone(), 1, vec![1.0; grid.len()]);
    }
    let mu = cpl.mu();
    let energies = fiber_energies(&state.k, cpl.gamma(), grid);
    let mut values = Vec::with_capacity(energies.len());
    for (i, &e) in energies.iter().enumerate() {
        let gap = state.energy - e;
        if gap.abs() < defaults::POLE_SAFETY {
            return Err(Error::PoleProximity {
                z: state.energy,
                energy: e,
                distance: gap.abs(),
                node: grid.node(i),
            });
        }
        values.push(mu / gap);
    }
    let norm = (grid.weight() * values.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let c = 1.0 / norm;
    values.iter_mut().for_each(|v| *v *= c);
    GridFunction::new(grid.clone(), 1, values)
}

/// `(h_μ(k) f)(q_i) = 𝓔_{γ,k}(q_i) f_i + μ w Σ_j f_j`.
pub fn apply_fiber(k: &TorusPoint, cpl: &Coupling, grid: &QuadGrid, f: &[f64]) -> Vec<f64> {
    let avg = grid.weight() * f.iter().sum::<f64>();
    fiber_energies(k, cpl.gamma(), grid)
        .iter()
        .zip(f)
        .map(|(e, v)| e * v + cpl.mu() * avg)
        .collect()
}

/// One solve per momentum, in input order. Failures stay in their slot,
/// tagged with the momentum.
pub fn dispersion_rows(
    cpl: &Coupling,
    ks: &[TorusPoint],
    grid: &QuadGrid,
    tol: f64,
) -> Vec<Result<BoundState2>> {
    par::map_slice(ks, |k| solve_bound_state(k, cpl, grid, tol).map_err(|e| e.at(*k)))
}

/// `e_μ(k)` over a list of momenta.
pub fn dispersion_curve(
    cpl: &Coupling,
    ks: &[TorusPoint],
    grid: &QuadGrid,
    tol: f64,
) -> Result<Vec<BoundState2>> {
    if ks.is_empty() {
        return Err(Error::invalid("k grid is empty"));
    }
    dispersion_rows(cpl, ks, grid, tol).into_iter().collect()
}

/// `[min_k e_μ(k), max_k e_μ(k)]`, the band spectrum of the full two-particle
/// operator. Grid extrema are polished by coordinate-wise golden-section
/// search within one sweep spacing.
pub fn band_spectrum_h(cpl: &Coupling, ks: &[TorusPoint], grid: &QuadGrid, tol: f64) -> Result<Band> {
    let curve = dispersion_curve(cpl, ks, grid, tol)?;
    let (imin, imax) = extreme_indices(curve.iter().map(|s| s.energy));
    let h = crate::three_body::sweep_spacing(ks.len(), cpl.dim().get());
    let eval = |k: &TorusPoint| Ok(solve_bound_state(k, cpl, grid, tol)?.energy);
    let (kmin, lo) = roots::polish_on_torus(curve[imin].k, curve[imin].energy, -1.0, h, eval)?;
    let (kmax, hi) = roots::polish_on_torus(curve[imax].k, curve[imax].energy, 1.0, h, eval)?;
    Ok(Band {
        lo,
        hi,
        argmin: vec![kmin],
        argmax: vec![kmax],
    })
}

/// Indices of the first minimum and first maximum.
pub(crate) fn extreme_indices(values: impl Iterator<Item = f64>) -> (usize, usize) {
    let (mut imin, mut imax) = (0, 0);
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v < vmin {
            (imin, vmin) = (i, v);
        }
        if v > vmax {
            (imax, vmax) = (i, v);
        }
    }
    (imin, imax)
}
