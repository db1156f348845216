//! Every numerical default in one place. The CLI reads these, and so does
//! the config serializer, so a run's header records them explicitly.

use crate::torus::Dim;

/// Quadrature nodes per axis.
pub fn quadrature_n(dim: Dim) -> usize {
    match dim {
        Dim::One => 256,
        Dim::Two => 48,
    }
}

/// Quadrature nodes per axis for three-body solves (the kernel is `N^d` square).
pub fn three_body_n(dim: Dim) -> usize {
    match dim {
        Dim::One => 128,
        Dim::Two => 24,
    }
}

/// Root bracket width.
pub const TOL: f64 = 1e-12;

/// Tolerance used when refining band extrema.
pub const REFINE_TOL: f64 = 1e-13;

/// Distance below which a spectral parameter counts as sitting on a pole.
pub const POLE_SAFETY: f64 = 1e-12;

/// Floor of the initial two-body bracket offset from the band edge.
pub const BRACKET_DELTA_MIN: f64 = 1e-6;

/// Two-body bracket offset `max(BRACKET_DELTA_MIN, mu^2 / (32 d))`.
pub fn bracket_delta(mu: f64, dim: Dim) -> f64 {
    BRACKET_DELTA_MIN.max(mu * mu / (32.0 * dim.get() as f64))
}

/// Offset of the three-body determinant scan from the essential spectrum.
pub fn three_body_offset(mu: f64) -> f64 {
    1e-4 * (1.0 + mu.abs())
}

/// Initial span of the three-body scan beyond the essential spectrum.
pub fn three_body_span(mu: f64) -> f64 {
    (4.0 * mu.abs()).max(1.0)
}

/// How many times the three-body span may double before giving up.
pub const SPAN_DOUBLINGS: u32 = 6;

/// Samples of the Fredholm determinant per scan window.
pub const SCAN_SAMPLES: usize = 96;

/// Largest `h`-matrix the oracle will build.
pub const DENSE_LIMIT_H: usize = 4096;

/// Largest antisymmetric pair basis the oracle will build
/// (`12^2` nodes in two dimensions gives 10296).
pub const DENSE_LIMIT_PAIRS: usize = 10_500;

/// Minimum decay rate per lattice site for the position-space check.
pub const DECAY_THRESHOLD: f64 = 0.1;

/// Largest contact amplitude accepted by the Pauli check.
pub const PAULI_TOL: f64 = 1e-12;

/// Momentum sweep points per axis when a sweep is requested without a count.
pub const SWEEP: usize = 32;

/// Points per axis when scanning the two-particle branch `Z(K, ·)`.
pub fn branch_sweep(dim: Dim) -> usize {
    match dim {
        Dim::One => 64,
        Dim::Two => 16,
    }
}

/// Quadrature nodes per axis for the verification suite, which builds the
/// dense antisymmetric oracle.
pub fn verify_n(dim: Dim) -> usize {
    match dim {
        Dim::One => 64,
        Dim::Two => 8,
    }
}

/// Largest distance of a continuum eigenvalue of the dense oracle from the
/// essential spectrum accepted by the coverage check.
pub const COVERAGE_TOL: f64 = 0.1;

/// Agreement required between determinant zeros and dense eigenvalues on a
/// shared grid (the two are algebraically equivalent there).
pub const MATCH_TOL: f64 = 1e-7;
