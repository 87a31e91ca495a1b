//! The sl(2) algebraization: when `b3 = -2(n-1) a4` the operator
//! `X d² + Y d + c2 z² + c1 z` is a quadratic element `H` of the enveloping
//! algebra of
//! `J+ = z² d - n z`, `J0 = z d - n/2`, `J- = d`,
//! which preserves polynomials of degree `<= n`. Its eigenvalues are the
//! values `-c0`.

use serde::Serialize;

use crate::bethe::{bae_residual_norm, certify_ode, coeff_c2, BetheSolution, OdeSpec, RootConfig, SolverConfig};
use crate::error::{QesError, Result};
use crate::linalg::{self, sort_canonical, CMatrix};
use crate::poly::{ComplexPoly, C64};

/// Relative tolerance on the dependence condition.
pub const DEPENDENCE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Sl2Matrix {
    pub n: usize,
    /// Column `k` holds the coefficients of `H z^k` in the basis `1, z, ..., z^n`.
    pub entries: CMatrix,
    /// Largest coefficient of any `H z^k` above degree `n`; zero when the
    /// degree-`n` subspace is invariant.
    pub overflow: f64,
}

struct Generators {
    n: f64,
}

impl Generators {
    fn plus(&self, p: &ComplexPoly) -> ComplexPoly {
        &p.derivative().shift(2) - &p.shift(1).scale(C64::new(self.n, 0.0))
    }

    fn zero(&self, p: &ComplexPoly) -> ComplexPoly {
        &p.derivative().shift(1) - &p.scale(C64::new(self.n / 2.0, 0.0))
    }

    fn minus(&self, p: &ComplexPoly) -> ComplexPoly {
        p.derivative()
    }
}

/// `H p` for the operator of [`build_sl2_matrix`].
pub fn apply_h(spec: &OdeSpec, p: &ComplexPoly) -> ComplexPoly {
    let nn = spec.n() as f64;
    let (a, b) = (spec.a(), spec.b());
    let g = Generators { n: nn };
    let terms = [
        g.plus(&g.plus(p)).scale(a[4]),
        g.plus(&g.zero(p)).scale(a[3]),
        g.zero(&g.zero(p)).scale(a[2]),
        g.zero(&g.minus(p)).scale(a[1]),
        g.minus(&g.minus(p)).scale(a[0]),
        g.plus(p).scale(a[3] * (0.5 * (3.0 * nn - 2.0)) + b[2]),
        g.zero(p).scale(a[2] * (nn - 1.0) + b[1]),
        g.minus(p).scale(a[1] * (nn / 2.0) + b[0]),
        p.scale(-a[2] * (nn * nn / 4.0) + (a[2] * (nn - 1.0) + b[1]) * (nn / 2.0)),
    ];
    terms.iter().fold(ComplexPoly::zero(), |acc, t| &acc + t)
}

/// Matrix of `H` on `span{1, z, ..., z^n}`, built by applying `H` to each
/// monomial. Rejects specs violating the dependence condition.
pub fn build_sl2_matrix(spec: &OdeSpec) -> Result<Sl2Matrix> {
    if !spec.is_dependent(DEPENDENCE_TOL) {
        return Err(QesError::NotDependent { gap: spec.dependence_gap() });
    }
    let n = spec.n();
    let mut entries = CMatrix::zeros(n + 1, n + 1);
    let mut overflow: f64 = 0.0;
    for k in 0..=n {
        let image = apply_h(spec, &ComplexPoly::monomial(C64::new(1.0, 0.0), k));
        for (j, &c) in image.coeffs().iter().enumerate() {
            if j <= n {
                entries[(j, k)] = c;
            } else {
                overflow = overflow.max(c.norm());
            }
        }
    }
    Ok(Sl2Matrix { n, entries, overflow })
}

/// The `n+1` eigenvalues of `H`, counted with multiplicity, in canonical order.
pub fn sl2_spectrum(m: &Sl2Matrix) -> Result<Vec<C64>> {
    let mut ev = linalg::eigenvalues(&m.entries)?;
    sort_canonical(&mut ev);
    Ok(ev)
}

/// One eigenpair of `H` turned into a solution: `S` is the null vector of
/// `H + c0` made monic, `c0 = -eigenvalue`, and `c1 = -n(n-1) a3 - n b2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sl2Solution {
    pub eigenvalue: C64,
    /// `|leading coefficient| / |S|` before normalisation; near zero means the
    /// eigenvector has degree below `n`
    pub leading_weight: f64,
    pub solution: BetheSolution,
}

pub fn sl2_solutions(spec: &OdeSpec, cfg: &SolverConfig) -> Result<Vec<Sl2Solution>> {
    let m = build_sl2_matrix(spec)?;
    let n = spec.n();
    let nf = n as f64;
    let (a, b) = (spec.a(), spec.b());
    let c2 = coeff_c2(spec);
    let c1 = -(a[3] * (nf * (nf - 1.0))) - b[2] * nf;
    let mut out = Vec::new();
    for ev in sl2_spectrum(&m)? {
        let shifted = &m.entries - CMatrix::identity(n + 1, n + 1) * ev;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or(QesError::EigenFailure(n + 1))?;
        let k = svd.singular_values.imin();
        let v: Vec<C64> = v_t.row(k).iter().map(|z| z.conj()).collect();
        let total = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let lead = v[n];
        let leading_weight = lead.norm() / total;
        let s_poly = ComplexPoly::new(v.iter().map(|z| z / lead).collect());
        let roots = if n == 0 { Vec::new() } else { linalg::poly_roots(&s_poly)? };
        let roots = RootConfig::new(roots);
        let c0 = -ev;
        let bae_residual = bae_residual_norm(spec, roots.as_slice());
        let ode_residual = certify_ode(spec, roots.as_slice(), [c2, c1, c0]);
        let certified = leading_weight > 1e-12
            && ode_residual <= cfg.cert_tol
            && (roots.len() < 2 || roots.min_separation() >= cfg.sep_tol);
        out.push(Sl2Solution {
            eigenvalue: ev,
            leading_weight,
            solution: BetheSolution { roots, c2, c1, c0, bae_residual, ode_residual, certified },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn n0_is_scalar() {
        let s = OdeSpec::from_real([1.0, 2.0, 3.0, 4.0, 5.0], [1.0, 2.0, 3.0, 10.0], 0).unwrap();
        let m = build_sl2_matrix(&s).unwrap();
        assert_eq!(m.entries.shape(), (1, 1));
        assert_eq!(m.entries[(0, 0)], c(0.0));
    }

    #[test]
    fn j_plus_kills_top_monomial() {
        let g = Generators { n: 4.0 };
        assert!(g.plus(&ComplexPoly::monomial(c(1.0), 4)).is_zero());
    }

    #[test]
    fn rejects_independent_spec() {
        let s = OdeSpec::from_real([1.0, 0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 0.0, 1.0], 2).unwrap();
        assert!(matches!(build_sl2_matrix(&s), Err(QesError::NotDependent { .. })));
    }

    #[test]
    fn matches_differential_operator() {
        // a4 = 0.7, n = 3 => b3 = -2.8
        let s = OdeSpec::new(
            [C64::new(0.2, 0.1), c(-0.4), C64::new(1.1, -0.3), c(0.5), c(0.7)],
            [c(0.3), C64::new(-0.6, 0.2), c(0.9), c(-2.8)],
            3,
        )
        .unwrap();
        let m = build_sl2_matrix(&s).unwrap();
        assert_eq!(m.overflow, 0.0);
        let c2 = crate::bethe::coeff_c2(&s);
        // c1 with the root sum replaced: for dependent specs c1 = -n(n-1) a3 - n b2
        let c1 = -s.a()[3] * 6.0 - s.b()[2] * 3.0;
        for k in 0..=3 {
            let p = ComplexPoly::monomial(c(1.0), k);
            let direct = &(&(&s.x() * &p.derivative().derivative()) + &(&s.y() * &p.derivative()))
                + &(&ComplexPoly::new(vec![c(0.0), c1, c2]) * &p);
            let h = apply_h(&s, &p);
            assert!((&direct - &h).max_abs_coeff() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn two_electron_n1_eigenvalues() {
        // H = J+J- - J0J- + [(3n-2)/2 + delta] J+ - (1/gamma + n/2) J-, here via X = z^3 - z, Y = delta z^2 - 1/gamma
        let (delta, gamma) = (2.0, 0.5);
        let s = OdeSpec::from_real([0.0, -1.0, 0.0, 1.0, 0.0], [-1.0 / gamma, 0.0, delta, 0.0], 1).unwrap();
        let ev = sl2_spectrum(&build_sl2_matrix(&s).unwrap()).unwrap();
        let z1 = 1.0 / (delta * gamma as f64).sqrt();
        assert!((ev[0] - c(-delta * z1)).norm() < 1e-12);
        assert!((ev[1] - c(delta * z1)).norm() < 1e-12);
    }

    #[test]
    fn eigenvectors_give_certified_solutions() {
        let s = OdeSpec::from_real([0.0, -1.0, 0.0, 1.0, 0.0], [-1.0 / 0.8, 0.0, 1.5, 0.0], 2).unwrap();
        let sols = sl2_solutions(&s, &SolverConfig::default()).unwrap();
        assert_eq!(sols.len(), 3);
        for x in &sols {
            assert!(x.solution.certified, "{x:?}");
        }
    }
}
