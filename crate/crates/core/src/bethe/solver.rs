use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    bae_jacobian, bae_residual_cleared, bae_residual_norm, matched_distance, BetheSolution, OdeSpec, SolverConfig,
};
use crate::error::Result;
use crate::exec::map_indexed;
use crate::linalg::{self, canonical_key, lu_solve, CVector};
use crate::poly::{ComplexPoly, C64};

/// Bookkeeping for one `solve_all` run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub starts: usize,
    pub converged: usize,
    pub failed: usize,
    pub rejected_certification: usize,
    pub duplicates: usize,
    pub x_multiple_roots: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub solutions: Vec<BetheSolution>,
    pub stats: SolveStats,
}

/// Certified, deduplicated solutions in canonical order.
pub fn solve_all(spec: &OdeSpec, cfg: &SolverConfig) -> Result<Vec<BetheSolution>> {
    Ok(solve_all_with_stats(spec, cfg)?.solutions)
}

pub fn solve_all_with_stats(spec: &OdeSpec, cfg: &SolverConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let mut stats = SolveStats { x_multiple_roots: spec.x_has_multiple_roots(), ..SolveStats::default() };
    let n = spec.n();
    if n == 0 {
        let sol = BetheSolution::evaluate(spec, Vec::new(), cfg);
        stats.starts = 1;
        stats.converged = 1;
        let solutions = if sol.certified {
            vec![sol]
        } else {
            stats.rejected_certification = 1;
            Vec::new()
        };
        return Ok(SolveOutcome { solutions, stats });
    }

    let geom = StartGeometry::new(spec)?;
    let runs = map_indexed(cfg.execution, cfg.restarts, |k| {
        let start = geom.sample(n, cfg.seed, k);
        newton_polish(spec, &start, cfg)
    });

    stats.starts = runs.len();
    let mut accepted: Vec<BetheSolution> = Vec::new();
    for run in runs {
        let Some(roots) = run else {
            stats.failed += 1;
            continue;
        };
        stats.converged += 1;
        let sol = BetheSolution::evaluate(spec, roots, cfg);
        if !sol.certified {
            stats.rejected_certification += 1;
            continue;
        }
        let dup =
            accepted.iter().any(|a| matched_distance(a.roots.as_slice(), sol.roots.as_slice()) < 10.0 * cfg.sep_tol);
        if dup {
            stats.duplicates += 1;
        } else {
            accepted.push(sol);
        }
    }
    sort_solutions(&mut accepted);
    Ok(SolveOutcome { solutions: accepted, stats })
}

/// Orders solutions by (c0, c1, c2) then roots, on the quantized grid.
pub fn sort_solutions(sols: &mut [BetheSolution]) {
    sols.sort_by_key(|s| {
        let mut key = vec![canonical_key(s.c0), canonical_key(s.c1), canonical_key(s.c2)];
        key.extend(s.roots.as_slice().iter().map(|&z| canonical_key(z)));
        key
    });
}

pub(crate) struct StartGeometry {
    center: C64,
    radius: f64,
    anchors: Vec<C64>,
}

impl StartGeometry {
    pub(crate) fn new(spec: &OdeSpec) -> Result<Self> {
        let xr = spec.x_roots()?;
        let yr = if spec.y().degree().unwrap_or(0) >= 1 { linalg::poly_roots(&spec.y())? } else { Vec::new() };
        let center = if !xr.is_empty() {
            xr.iter().sum::<C64>() / xr.len() as f64
        } else if !yr.is_empty() {
            yr.iter().sum::<C64>() / yr.len() as f64
        } else {
            C64::new(0.0, 0.0)
        };
        let far = xr.iter().chain(yr.iter()).map(|z| z.norm()).fold(0.0, f64::max);
        let mut anchors = xr.clone();
        for i in 0..xr.len() {
            for j in i + 1..xr.len() {
                anchors.push((xr[i] + xr[j]) * 0.5);
            }
        }
        anchors.extend(yr);
        Ok(StartGeometry { center, radius: 2.0 * (1.0 + far), anchors })
    }

    /// Start `k`: even indices draw from the disk, odd indices perturb anchors.
    fn sample(&self, n: usize, seed: u64, k: usize) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        self.draw(&mut rng, n, k % 2 == 1)
    }

    /// A quarter of the disk points use four times the radius: roots of `S`
    /// can sit well outside the hull of the zeros of `X` and `Y` when the
    /// exponents are negative.
    pub(crate) fn draw<R: Rng>(&self, rng: &mut R, n: usize, anchored: bool) -> Vec<C64> {
        let use_anchors = anchored && !self.anchors.is_empty();
        (0..n)
            .map(|_| {
                if use_anchors {
                    let a = self.anchors[rng.random_range(0..self.anchors.len())];
                    a + disk_point(rng, 0.1 * self.radius)
                } else {
                    let reach = if rng.random_bool(0.25) { 4.0 } else { 1.0 };
                    self.center + disk_point(rng, reach * self.radius)
                }
            })
            .collect()
    }
}

pub(crate) fn disk_point<R: Rng>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * rng.random::<f64>().sqrt();
    C64::from_polar(r, TAU * rng.random::<f64>())
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn guards_ok(x: &ComplexPoly, xscale: f64, z: &[C64], cfg: &SolverConfig) -> bool {
    z.iter().all(|v| v.re.is_finite() && v.im.is_finite())
        && linalg::min_separation(z) >= cfg.sep_tol
        && z.iter().all(|&v| x.eval(v).norm() >= cfg.pole_tol * xscale)
}

/// Damped Newton on the cleared residual from `start`. Returns the converged
/// roots, or `None` if the iteration stalls, fails a guard, or runs out of
/// iterations.
pub fn newton_polish(spec: &OdeSpec, start: &[C64], cfg: &SolverConfig) -> Option<Vec<C64>> {
    let x = spec.x();
    let xscale = x.max_abs_coeff().max(f64::MIN_POSITIVE);
    let mut z = start.to_vec();
    if !guards_ok(&x, xscale, &z, cfg) {
        return None;
    }
    let mut f = bae_residual_cleared(spec, &z);
    let mut fnorm = norm2(&f);
    for _ in 0..cfg.max_iters {
        if bae_residual_norm(spec, &z) <= cfg.newton_tol {
            return Some(final_steps(spec, z, fnorm, cfg));
        }
        let jac = bae_jacobian(spec, &z);
        let rhs = CVector::from_iterator(f.len(), f.iter().map(|v| -v));
        let step = lu_solve(&jac, &rhs)?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<C64> = z.iter().zip(step.iter()).map(|(a, s)| a + s * t).collect();
            if guards_ok(&x, xscale, &cand, cfg) {
                let fc = bae_residual_cleared(spec, &cand);
                let fcn = norm2(&fc);
                if fcn < (1.0 - 1e-4 * t) * fnorm {
                    accepted = Some((cand, fc, fcn));
                    break;
                }
            }
            t *= cfg.damping;
        }
        match accepted {
            Some((cand, fc, fcn)) => {
                let moved = norm2(&z.iter().zip(&cand).map(|(a, b)| a - b).collect::<Vec<_>>());
                z = cand;
                f = fc;
                fnorm = fcn;
                if moved <= 1e-15 * (1.0 + norm2(&z)) {
                    return (bae_residual_norm(spec, &z) <= cfg.cert_tol).then(|| final_steps(spec, z, fnorm, cfg));
                }
            }
            // no descent left: accept only if already at rounding level
            None => {
                return (bae_residual_norm(spec, &z) <= cfg.cert_tol).then(|| final_steps(spec, z, fnorm, cfg));
            }
        }
    }
    (bae_residual_norm(spec, &z) <= cfg.newton_tol).then_some(z)
}

/// Up to three full Newton steps past the tolerance, kept while the cleared
/// residual does not grow. The pole guard is dropped here: a root may sit on
/// a zero of `X` that is also a zero of `Y`, and the substitution check
/// decides whether such a point is a solution.
fn final_steps(spec: &OdeSpec, mut z: Vec<C64>, mut fnorm: f64, cfg: &SolverConfig) -> Vec<C64> {
    for _ in 0..3 {
        let f = bae_residual_cleared(spec, &z);
        let rhs = CVector::from_iterator(f.len(), f.iter().map(|v| -v));
        let Some(step) = lu_solve(&bae_jacobian(spec, &z), &rhs) else { break };
        let cand: Vec<C64> = z.iter().zip(step.iter()).map(|(a, s)| a + s).collect();
        let finite = cand.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        if !finite || linalg::min_separation(&cand) < cfg.sep_tol {
            break;
        }
        let fcn = norm2(&bae_residual_cleared(spec, &cand));
        if fcn > fnorm {
            break;
        }
        z = cand;
        fnorm = fcn;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;

    fn cfg() -> SolverConfig {
        SolverConfig { restarts: 200, seed: 11, ..SolverConfig::default() }
    }

    #[test]
    fn two_electron_n1_roots() {
        // delta = 2, gamma = 1: X = z^3 - z, Y = 2 z^2 - 1
        let s = OdeSpec::from_real([0.0, -1.0, 0.0, 1.0, 0.0], [-1.0, 0.0, 2.0, 0.0], 1).unwrap();
        let sols = solve_all(&s, &cfg()).unwrap();
        assert_eq!(sols.len(), 2);
        let h = 0.5f64.sqrt();
        let mut found: Vec<f64> = sols.iter().map(|s| s.roots.as_slice()[0].re).collect();
        found.sort_by(f64::total_cmp);
        assert!((found[0] + h).abs() < 1e-12 && (found[1] - h).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_mode_independent() {
        let s = OdeSpec::from_real([0.3, -1.0, 0.2, 1.0, 0.5], [0.2, -1.0, 0.7, 0.4], 2).unwrap();
        let a = solve_all(&s, &cfg().with_execution(Execution::Sequential)).unwrap();
        let b = solve_all(&s, &cfg().with_execution(Execution::Parallel)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
    }

    #[test]
    fn n0_has_single_trivial_solution() {
        let s = OdeSpec::from_real([1.0, 0.0, 1.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], 0).unwrap();
        let sols = solve_all(&s, &cfg()).unwrap();
        assert_eq!(sols.len(), 1);
        assert!(sols[0].roots.is_empty());
        assert_eq!(sols[0].coeffs(), [C64::new(0.0, 0.0); 3]);
    }
}
