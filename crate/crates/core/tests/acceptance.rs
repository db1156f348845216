//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass criterion numbers as arguments to
//! run a subset.

use std::f64::consts::PI;
use std::panic;
use std::time::{Duration, Instant};

use latbound::defaults;
use latbound::dispersion::{band_three_body, band_two_body, Coupling};
use latbound::oracle;
use latbound::three_body::{self, EssentialSpectrumReport};
use latbound::torus::{sweep, Dim, QuadGrid, TorusPoint};
use latbound::two_body;
use latbound::{Error, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Outcome {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn grid(dim: Dim, n: usize) -> QuadGrid {
    QuadGrid::new(dim, n).unwrap()
}

fn cpl(mu: f64, gamma: f64, dim: Dim) -> Coupling {
    Coupling::new(mu, gamma, dim).unwrap()
}

fn k1(x: f64) -> TorusPoint {
    TorusPoint::wrap(&[x]).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn ess(k: &TorusPoint, c: &Coupling, g: &QuadGrid) -> Result<EssentialSpectrumReport> {
    let ps = sweep(c.dim(), defaults::branch_sweep(c.dim()));
    three_body::essential_spectrum(k, c, &ps, g, defaults::TOL)
}

/// Two-body closed form at d=1, γ=1, k=0.
fn criterion_1() -> Outcome {
    let (errs, took) = timed(|| {
        let g = grid(Dim::One, 256);
        [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0].map(|mu: f64| {
            let s = two_body::solve_bound_state(&k1(0.0), &cpl(mu, 1.0, Dim::One), &g, defaults::TOL).unwrap();
            let exact = 4.0 + mu.signum() * (16.0 + mu * mu).sqrt();
            (mu, (s.energy - exact).abs())
        })
    });
    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    Outcome::new(
        worst < 1e-8 && took < Duration::from_secs(1),
        format!("max |e - (4 ± sqrt(16+mu^2))| = {worst:.2e} over mu in ±{{0.5,1,2}}, n=256, {took:.2?} (< 1e-8, < 1 s)"),
    )
}

/// Flat fiber at the corner: e = 4d + μ.
fn criterion_2() -> Outcome {
    let (errs, took) = timed(|| {
        let mut out = Vec::new();
        for dim in [Dim::One, Dim::Two] {
            let g = grid(dim, defaults::quadrature_n(dim));
            for mu in [1.0, -1.0] {
                let s = two_body::solve_bound_state(&TorusPoint::corner(dim), &cpl(mu, 1.0, dim), &g, defaults::TOL)
                    .unwrap();
                out.push((s.energy - (4.0 * dim.get() as f64 + mu)).abs());
            }
        }
        out
    });
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Outcome::new(
        worst <= 1e-12 && took < Duration::from_secs(1),
        format!("max |e(pi) - (4d + mu)| = {worst:.2e} for d in {{1,2}}, mu = ±1, {took:.2?} (<= 1e-12, < 1 s)"),
    )
}

/// Side and extremum of the two-body curve on a 64-point sweep.
fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    let mut passed = true;
    // Two-dimensional binding at gamma = 3, mu = ±1 is below what n = 48 resolves.
    for (dim, per_axis, limit, gammas) in [(Dim::One, 64, 10u64, &[1.0, 3.0][..]), (Dim::Two, 8, 120, &[1.0][..])] {
        let (ok, took) = timed(|| {
            let g = grid(dim, defaults::quadrature_n(dim));
            let ks = sweep(dim, per_axis);
            let mut ok = true;
            for &gamma in gammas {
                for mu in [1.0, -1.0] {
                    let c = cpl(mu, gamma, dim);
                    let curve = two_body::dispersion_curve(&c, &ks, &g, defaults::TOL).unwrap();
                    let mut violations = 0;
                    for s in &curve {
                        let band = band_two_body(&s.k, gamma, &g, defaults::REFINE_TOL).unwrap();
                        let outside = if mu > 0.0 { s.energy > band.hi } else { s.energy < band.lo };
                        if !outside {
                            violations += 1;
                        }
                    }
                    let pick = |a: &&two_body::BoundState2, b: &&two_body::BoundState2| {
                        (mu * a.energy).total_cmp(&(mu * b.energy))
                    };
                    let ext = curve.iter().max_by(pick).unwrap();
                    let at_zero = ext.k.coords().iter().all(|&x| x == 0.0);
                    if violations > 0 || !at_zero {
                        ok = false;
                        notes.push(format!(
                            "d={} gamma={gamma} mu={mu}: {violations} momenta inside the band, extremum at [{}]",
                            dim.get(),
                            ext.k.coords().iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
                        ));
                    }
                }
            }
            ok
        });
        let in_time = took < Duration::from_secs(limit);
        passed &= ok && in_time;
        notes.push(format!(
            "d={} n={} gamma in {gammas:?} {took:.2?} (< {limit} s)",
            dim.get(),
            defaults::quadrature_n(dim)
        ));
    }
    Outcome::new(passed, format!("mu = ±1, 64 momenta per dimension: {}", notes.join("; ")))
}

/// The two-particle branch reaches beyond the three-particle band.
fn criterion_4() -> Outcome {
    let g = grid(Dim::One, defaults::quadrature_n(Dim::One));
    let mut worst = f64::INFINITY;
    let mut notes = Vec::new();
    for mu in [1.0, -1.0] {
        let c = cpl(mu, 1.0, Dim::One);
        for x in [0.0, PI / 2.0, PI] {
            let r = ess(&k1(x), &c, &g).unwrap();
            let margin = if mu > 0.0 {
                r.tau_t - r.three_body_band.hi
            } else {
                r.three_body_band.lo - r.tau_b
            };
            worst = worst.min(margin);
            notes.push(format!("mu={mu} K={x:.4}: {margin:.4e}"));
        }
    }
    Outcome::new(worst > 1e-3, format!("gamma=1, margins {} (> 1e-3)", notes.join(", ")))
}

/// Extremal determinant zero against the extreme isolated dense eigenvalue.
fn bs_vs_dense(mu: f64, n: usize) -> std::result::Result<(f64, f64), String> {
    let c = cpl(mu, 1.0, Dim::One);
    let g = grid(Dim::One, n);
    let k = k1(0.0);
    let r = ess(&k, &c, &g).map_err(|e| e.to_string())?;
    let root = match three_body::solve_three_body(&k, &c, &g, defaults::TOL, &r) {
        Ok(s) => Some(s.energy),
        Err(Error::NotFound { .. }) => None,
        Err(e) => return Err(e.to_string()),
    };
    let ev = oracle::h3_matrix(&k, &c, &g, usize::MAX)
        .and_then(|h| h.eigenvalues())
        .map_err(|e| e.to_string())?;
    let extreme = if mu > 0.0 { ev[ev.len() - 1] } else { ev[0] };
    let tau = r.threshold(mu);
    let isolated = mu.signum() * (extreme - tau) > 0.0;
    match (root, isolated) {
        (Some(z), true) => Ok((z, extreme)),
        (None, false) => Err(format!(
            "no bound state at n={n}: D has no zero beyond {tau:.6} and the extreme dense eigenvalue {extreme:.6} is inside the essential spectrum"
        )),
        (Some(z), false) => Err(format!("n={n}: zero {z:.8} but no isolated dense eigenvalue (extreme {extreme:.8})")),
        (None, true) => Err(format!("n={n}: isolated dense eigenvalue {extreme:.8} but no zero of D")),
    }
}

/// Determinant zero and dense isolated eigenvalue agree, improving with n.
fn criterion_5() -> Outcome {
    let (res, took) = timed(|| {
        let mut passed = true;
        let mut notes = Vec::new();
        for mu in [1.0, -1.0] {
            let coarse = bs_vs_dense(mu, 64);
            let fine = bs_vs_dense(mu, 128);
            match (coarse, fine) {
                (Ok((z64, e64)), Ok((z128, e128))) => {
                    let (d64, d128) = ((z64 - e64).abs(), (z128 - e128).abs());
                    passed &= d128 < 1e-5 && d128 <= d64;
                    notes.push(format!("mu={mu}: |zero - eigenvalue| = {d64:.2e} (n=64), {d128:.2e} (n=128)"));
                }
                (a, b) => {
                    passed = false;
                    for r in [a, b] {
                        if let Err(e) = r {
                            notes.push(format!("mu={mu}: {e}"));
                        }
                    }
                }
            }
        }
        (passed, notes)
    });
    let (passed, notes) = res;
    Outcome::new(
        passed && took < Duration::from_secs(300),
        format!("d=1 gamma=1 K=0: {}; {took:.2?} (< 1e-5, decreasing, < 5 min)", notes.join("; ")),
    )
}

/// No dense eigenvalue on the wrong side of the three-particle band.
fn criterion_6() -> Outcome {
    let g = grid(Dim::One, 64);
    let mut passed = true;
    let mut notes = Vec::new();
    for mu in [1.0, -1.0] {
        let c = cpl(mu, 1.0, Dim::One);
        for x in [0.0, PI] {
            let k = k1(x);
            let ev = oracle::h3_matrix(&k, &c, &g, usize::MAX).unwrap().eigenvalues().unwrap();
            let band = band_three_body(&k, 1.0, &g, defaults::REFINE_TOL).unwrap();
            let r = three_body::wrong_side_from_spectrum(&ev, &band, mu, 1e-10);
            passed &= r.passed;
            notes.push(format!("mu={mu} K={x:.4}: margin {:.3e}", r.margin));
        }
    }
    Outcome::new(passed, format!("n=64 gamma=1: {} (>= -1e-10)", notes.join(", ")))
}

/// Continuum eigenvalues of the dense oracle lie on the essential spectrum.
fn criterion_7() -> Outcome {
    let g = grid(Dim::One, 32);
    let mut worst = 0.0f64;
    let mut count = 0;
    for (mu, gamma) in [(1.0, 1.0), (-1.0, 1.0), (3.0, 3.0), (-3.0, 3.0)] {
        let c = cpl(mu, gamma, Dim::One);
        for x in [0.0, PI / 2.0, PI] {
            let k = k1(x);
            let r = ess(&k, &c, &g).unwrap();
            let tau = r.threshold(mu);
            let ev = oracle::h3_matrix(&k, &c, &g, usize::MAX).unwrap().eigenvalues().unwrap();
            for e in ev.into_iter().filter(|&e| mu.signum() * (e - tau) <= 0.0) {
                worst = worst.max(r.distance(e));
                count += 1;
            }
        }
    }
    Outcome::new(
        worst <= 0.1,
        format!("n=32, {count} non-isolated eigenvalues over mu/gamma in {{±1/1, ±3/3}}, K in {{0, pi/2, pi}}: max distance {worst:.3e} (<= 0.1)"),
    )
}

/// Reconstructed three-particle eigenfunctions are antisymmetric and vanish on contact.
fn criterion_8() -> Outcome {
    let g = grid(Dim::One, 32);
    let mut passed = true;
    let mut notes = Vec::new();
    for mu in [3.0, -3.0] {
        let c = cpl(mu, 3.0, Dim::One);
        for x in [0.0, PI / 2.0, PI] {
            let k = k1(x);
            let r = ess(&k, &c, &g).unwrap();
            let s = three_body::solve_three_body(&k, &c, &g, defaults::TOL, &r).unwrap();
            let f = three_body::eigenfunction3(&s, &c, &g).unwrap();
            let defect = f.antisymmetry_defect();
            let contact = oracle::contact_amplitude(&f).unwrap();
            passed &= defect == 0.0 && contact < 1e-12;
            notes.push(format!("mu={mu} K={x:.4}: defect {defect:.1e}, contact {contact:.1e}"));
        }
    }
    Outcome::new(passed, format!("gamma=3 n=32: {} (== 0, < 1e-12)", notes.join(", ")))
}

/// Position-space decay of the two- and three-particle bound states.
fn criterion_9() -> Outcome {
    let g2 = grid(Dim::One, 256);
    let c2 = cpl(-1.0, 1.0, Dim::One);
    let s2 = two_body::solve_bound_state(&k1(0.0), &c2, &g2, defaults::TOL).unwrap();
    let f2 = two_body::eigenfunction2(&s2, &c2, &g2).unwrap();
    let d2 = oracle::decay_check(&f2, 0.5).unwrap();
    let slope2 = d2.slope.unwrap_or(f64::NAN);

    let g3 = grid(Dim::One, 128);
    let c3 = cpl(3.0, 3.0, Dim::One);
    let k = k1(0.0);
    let r = ess(&k, &c3, &g3).unwrap();
    let s3 = three_body::solve_three_body(&k, &c3, &g3, defaults::TOL, &r).unwrap();
    let f3 = three_body::eigenfunction3(&s3, &c3, &g3).unwrap();
    let d3 = oracle::decay_check(&f3, 0.1).unwrap();
    let slope3 = d3.slope.unwrap_or(f64::NAN);

    let kappa = ((16.0f64 + 1.0).sqrt() / 4.0).acosh();
    Outcome::new(
        slope2 < -0.5 && slope3 < -0.1,
        format!(
            "two-body (mu=-1 gamma=1 k=0 n=256) slope {slope2:.4} (< -0.5; exact rate -{kappa:.4}), three-body (mu=3 gamma=3 K=0 n=128, E={:.6}) slope {slope3:.4} (< -0.1)",
            s3.energy
        ),
    )
}

fn second_difference_ratio(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    let mut d2: Vec<f64> = (0..m)
        .map(|i| (values[(i + 1) % m] - 2.0 * values[i] + values[(i + m - 1) % m]).abs())
        .collect();
    let max = d2.iter().copied().fold(0.0, f64::max);
    d2.sort_by(f64::total_cmp);
    let median = 0.5 * (d2[(m - 1) / 2] + d2[m / 2]);
    (max, median)
}

/// Smoothness of e_μ(k) and E_μ(K) across the torus.
fn criterion_10() -> Outcome {
    let c2 = cpl(-1.0, 1.0, Dim::One);
    let g2 = grid(Dim::One, 256);
    let e: Vec<f64> = two_body::dispersion_curve(&c2, &sweep(Dim::One, 128), &g2, defaults::TOL)
        .unwrap()
        .iter()
        .map(|s| s.energy)
        .collect();
    let (max2, med2) = second_difference_ratio(&e);

    let c3 = cpl(3.0, 3.0, Dim::One);
    let g3 = grid(Dim::One, 32);
    let big: Vec<f64> = sweep(Dim::One, 32)
        .iter()
        .map(|k| {
            let r = ess(k, &c3, &g3).unwrap();
            three_body::solve_three_body(k, &c3, &g3, defaults::TOL, &r).unwrap().energy
        })
        .collect();
    let (max3, med3) = second_difference_ratio(&big);
    Outcome::new(
        max2 < 10.0 * med2 && max3 < 10.0 * med3,
        format!(
            "e(k) (mu=-1 gamma=1, 128 points): max {max2:.3e} vs median {med2:.3e}; E(K) (mu=3 gamma=3 n=32, 32 points): max {max3:.3e} vs median {med3:.3e} (max < 10 x median)"
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "two-body closed form", criterion_1),
        (2, "degenerate fiber", criterion_2),
        (3, "two-body side and extremum", criterion_3),
        (4, "branch beyond the three-particle band", criterion_4),
        (5, "determinant vs dense oracle", criterion_5),
        (6, "wrong-side exclusion", criterion_6),
        (7, "essential spectrum coverage", criterion_7),
        (8, "antisymmetry and contact", criterion_8),
        (9, "exponential decay", criterion_9),
        (10, "smoothness", criterion_10),
    ];
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, run) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {n:>2} {verdict} [{name}] ({:.1?}) {}",
            start.elapsed(),
            outcome.detail
        );
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
