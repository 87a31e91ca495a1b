//! Brute-force oracle: solves `X S'' + Y S' + Z S = 0` directly for the
//! coefficients of monic `S` and for `c1, c0`, by Newton on the vanishing of
//! the coefficients of `z^0 .. z^{n+1}`. `c2` is fixed by the `z^{n+2}`
//! coefficient. Nothing here goes through the Bethe equations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bethe::{OdeSpec, SolverConfig};
use crate::error::{QesError, Result};
use crate::exec::map_indexed;
use crate::linalg::{self, sort_canonical};
use crate::poly::{ComplexPoly, C64};

pub const MAX_ORACLE_DEGREE: usize = 4;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    /// Ascending coefficients of monic `S`, length `n + 1`.
    pub s_coeffs: Vec<C64>,
    pub roots: Vec<C64>,
    pub c2: C64,
    pub c1: C64,
    pub c0: C64,
    /// Max coefficient of the remainder relative to the largest term size.
    pub residual: f64,
}

/// `c2` from the top coefficient: `a4 n(n-1) + b3 n + c2 = 0`.
pub fn forced_c2(spec: &OdeSpec) -> C64 {
    let n = spec.n() as f64;
    -(spec.a()[4] * (n * (n - 1.0)) + spec.b()[3] * n)
}

struct System<'a> {
    a: &'a [C64; 5],
    b: &'a [C64; 4],
    n: usize,
    c2: C64,
}

impl System<'_> {
    /// Full coefficient list of monic S from the unknown vector.
    fn s_of(&self, u: &[C64]) -> Vec<C64> {
        let mut s = u[..self.n].to_vec();
        s.push(ONE);
        s
    }

    /// Coefficients of `X S'' + Y S' + Z S` for general `s` (not necessarily
    /// monic) up to `z^{n+2}`, plus the sum of term magnitudes per coefficient.
    fn remainder(&self, s: &[C64], c1: C64, c0: C64) -> (Vec<C64>, Vec<f64>) {
        let len = self.n + 3;
        let mut t = vec![ZERO; len];
        let mut mag = vec![0.0; len];
        let z = [c0, c1, self.c2];
        for (k, &sk) in s.iter().enumerate() {
            let kf = k as f64;
            for (j, &aj) in self.a.iter().enumerate() {
                if k >= 2 && j + k - 2 < len {
                    let v = aj * sk * (kf * (kf - 1.0));
                    t[j + k - 2] += v;
                    mag[j + k - 2] += v.norm();
                }
            }
            for (j, &bj) in self.b.iter().enumerate() {
                if k >= 1 && j + k - 1 < len {
                    let v = bj * sk * kf;
                    t[j + k - 1] += v;
                    mag[j + k - 1] += v.norm();
                }
            }
            for (j, &zj) in z.iter().enumerate() {
                if j + k < len {
                    let v = zj * sk;
                    t[j + k] += v;
                    mag[j + k] += v.norm();
                }
            }
        }
        (t, mag)
    }

    /// Residual: coefficients of `z^0 .. z^{n+1}`.
    fn residual(&self, u: &[C64]) -> Vec<C64> {
        let s = self.s_of(u);
        let (mut t, _) = self.remainder(&s, u[self.n], u[self.n + 1]);
        t.truncate(self.n + 2);
        t
    }

    fn relative_residual(&self, u: &[C64]) -> f64 {
        let s = self.s_of(u);
        let (t, mag) = self.remainder(&s, u[self.n], u[self.n + 1]);
        t.iter().zip(&mag).map(|(v, m)| if *m > 0.0 { v.norm() / m } else { v.norm() }).fold(0.0, f64::max)
    }

    /// The system is bilinear, so the `s_k` column is the remainder of `z^k`.
    fn jacobian(&self, u: &[C64]) -> Vec<Vec<C64>> {
        let m = self.n + 2;
        let s = self.s_of(u);
        let mut jac = vec![vec![ZERO; m]; m];
        for k in 0..self.n {
            let mut e = vec![ZERO; self.n + 1];
            e[k] = ONE;
            let (col, _) = self.remainder(&e, u[self.n], u[self.n + 1]);
            for r in 0..m {
                jac[r][k] = col[r];
            }
        }
        for r in 0..m {
            // d/dc1 (c1 z S) and d/dc0 (c0 S)
            jac[r][self.n] = if r >= 1 { s[r - 1] } else { ZERO };
            jac[r][self.n + 1] = if r <= self.n { s[r] } else { ZERO };
        }
        jac
    }
}

/// Dense Gaussian elimination with partial pivoting.
fn gauss_solve(mut m: Vec<Vec<C64>>, mut rhs: Vec<C64>) -> Option<Vec<C64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))?;
        if m[piv][col].norm() == 0.0 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != ZERO {
                for k in col..n {
                    let v = m[col][k];
                    m[row][k] -= f * v;
                }
                let v = rhs[col];
                rhs[row] -= f * v;
            }
        }
    }
    let mut x = vec![ZERO; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(x)
}

fn sq_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn newton(sys: &System<'_>, mut u: Vec<C64>, max_iters: usize, tol: f64) -> Option<Vec<C64>> {
    let mut r = sys.residual(&u);
    for _ in 0..max_iters {
        if sys.relative_residual(&u) <= tol {
            return Some(u);
        }
        let step = gauss_solve(sys.jacobian(&u), r.iter().map(|v| -v).collect())?;
        let base = sq_norm(&r);
        let mut t = 1.0;
        loop {
            let cand: Vec<C64> = u.iter().zip(&step).map(|(a, s)| a + s * t).collect();
            let rc = sys.residual(&cand);
            if sq_norm(&rc) < base {
                u = cand;
                r = rc;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return (sys.relative_residual(&u) <= 1e3 * tol).then_some(u);
            }
        }
    }
    (sys.relative_residual(&u) <= tol).then_some(u)
}

/// Random start: `S` from random roots in a disk, then `c1` and `c0` from the
/// two top remaining equations, which are triangular in them.
fn start(sys: &System<'_>, radius: f64, seed: u64, k: usize) -> Vec<C64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0a1c_1e00_u64);
    rng.set_stream(k as u64);
    let mut s = vec![ONE];
    for _ in 0..sys.n {
        let r = radius * rng.random::<f64>().sqrt();
        let root = C64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>());
        let mut next = vec![ZERO; s.len() + 1];
        for (i, &c) in s.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * root;
        }
        s = next;
    }
    let mut u: Vec<C64> = s[..sys.n].to_vec();
    u.push(ZERO);
    u.push(ZERO);
    let (t, _) = sys.remainder(&s, ZERO, ZERO);
    // z^{n+1}: t + c1 = 0 (S monic); z^n: t + c1 s_{n-1} + c0 = 0
    let c1 = -t[sys.n + 1];
    let s_top = if sys.n >= 1 { s[sys.n - 1] } else { ZERO };
    let c0 = -(t[sys.n] + c1 * s_top);
    u[sys.n] = c1;
    u[sys.n + 1] = c0;
    u
}

/// All distinct solutions found by multistart Newton on the coefficient system.
pub fn coeff_system_solve(spec: &OdeSpec, cfg: &SolverConfig) -> Result<Vec<OracleSolution>> {
    cfg.validate()?;
    let n = spec.n();
    if n > MAX_ORACLE_DEGREE {
        return Err(QesError::DegreeTooLarge { n, max: MAX_ORACLE_DEGREE });
    }
    let sys = System { a: spec.a(), b: spec.b(), n, c2: forced_c2(spec) };
    let scale = |p: &[C64]| {
        // Cauchy bound on roots
        let lead = p.iter().rposition(|c| c.norm() > 0.0);
        match lead {
            Some(d) if d > 0 => 1.0 + p[..d].iter().map(|c| (c / p[d]).norm()).fold(0.0, f64::max),
            _ => 1.0,
        }
    };
    let radius = 2.0 * scale(spec.a()).max(scale(spec.b()));
    let tol = 1e-14;
    let runs = map_indexed(cfg.execution, cfg.restarts, |k| {
        newton(&sys, start(&sys, radius, cfg.seed, k), cfg.max_iters, tol)
    });
    let mut found: Vec<OracleSolution> = Vec::new();
    for u in runs.into_iter().flatten() {
        let dup = found.iter().any(|f| {
            f.s_coeffs[..n]
                .iter()
                .zip(&u[..n])
                .chain([(&f.c1, &u[n]), (&f.c0, &u[n + 1])])
                .all(|(a, b)| (a - b).norm() <= 1e-7 * (1.0 + a.norm()))
        });
        if dup {
            continue;
        }
        let s = sys.s_of(&u);
        let mut roots = linalg::poly_roots(&ComplexPoly::new(s.clone()))?;
        sort_canonical(&mut roots);
        found.push(OracleSolution {
            residual: sys.relative_residual(&u),
            s_coeffs: s,
            roots,
            c2: sys.c2,
            c1: u[n],
            c0: u[n + 1],
        });
    }
    found.sort_by_key(|f| [f.c0, f.c1].map(|c| ((c.re * 1e8).round() as i64, (c.im * 1e8).round() as i64)));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_solvable_case() {
        // S'' + z S' + Z S = 0, n = 1: S = z, Z = -1
        let s = OdeSpec::from_real([1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], 1).unwrap();
        let sols = coeff_system_solve(&s, &SolverConfig::default().with_restarts(20)).unwrap();
        assert_eq!(sols.len(), 1);
        let f = &sols[0];
        assert_eq!(f.c2, C64::new(0.0, 0.0));
        assert!(f.s_coeffs[0].norm() < 1e-12);
        assert!(f.c1.norm() < 1e-12);
        assert!((f.c0 + 1.0).norm() < 1e-12);
    }

    #[test]
    fn n0_is_trivial() {
        let s = OdeSpec::from_real([1.0, 0.0, 0.0, 0.0, 1.0], [0.0, 1.0, 0.0, 2.0], 0).unwrap();
        let sols = coeff_system_solve(&s, &SolverConfig::default().with_restarts(5)).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].c1, C64::new(0.0, 0.0));
        assert_eq!(sols[0].c0, C64::new(0.0, 0.0));
    }

    #[test]
    fn forced_c2_matches_theorem() {
        let s = OdeSpec::from_real([1.0, 0.5, -0.2, 0.3, 0.7], [0.0, 1.0, 0.4, 2.0], 3).unwrap();
        assert_eq!(forced_c2(&s), crate::bethe::coeff_c2(&s));
    }

    #[test]
    fn too_large_degree_rejected() {
        let s = OdeSpec::from_real([1.0, 0.0, 0.0, 0.0, 0.0], [0.0; 4], 5).unwrap();
        assert!(coeff_system_solve(&s, &SolverConfig::default()).is_err());
    }
}
