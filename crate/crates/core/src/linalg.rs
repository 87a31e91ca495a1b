//! Small dense complex linear algebra: Newton steps, least-squares steps,
//! eigenvalues and polynomial roots. Backed by nalgebra.

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{QesError, Result};
use crate::poly::{is_finite, ComplexPoly, C64};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Solves `a x = b` by LU with partial pivoting. `None` if singular or if the
/// solution is not finite.
pub fn lu_solve(a: &CMatrix, b: &CVector) -> Option<CVector> {
    let x = a.clone().lu().solve(b)?;
    x.iter().all(|&v| is_finite(v)).then_some(x)
}

/// Minimum-norm least-squares solution of `a x ≈ b` via SVD, discarding
/// singular values below `1e-13 * sigma_max`.
pub fn least_squares(a: &CMatrix, b: &CVector) -> Option<CVector> {
    if a.ncols() == 0 {
        return Some(CVector::zeros(0));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax.is_finite() && smax > 0.0) {
        return None;
    }
    let x = svd.solve(b, 1e-13 * smax).ok()?;
    x.iter().all(|&v| is_finite(v)).then_some(x)
}

/// All eigenvalues of a square complex matrix, counted with multiplicity.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(QesError::EigenFailure(n))?;
    let (_, t) = schur.unpack();
    let scale = t.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        // complex Schur forms are triangular; guard against an unreduced 2x2 block anyway
        if i + 1 < n && t[(i + 1, i)].norm() > 1e-14 * scale {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let tr = a + d;
            let disc = ((a - d) * (a - d) + b * c * 4.0).sqrt();
            out.push((tr + disc) * 0.5);
            out.push((tr - disc) * 0.5);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    if out.iter().all(|&v| is_finite(v)) {
        Ok(out)
    } else {
        Err(QesError::EigenFailure(n))
    }
}

/// Roots of `p` from the eigenvalues of its companion matrix, each polished by
/// a few Newton steps on `p` itself.
pub fn poly_roots(p: &ComplexPoly) -> Result<Vec<C64>> {
    let deg = match p.degree() {
        None | Some(0) => return Ok(Vec::new()),
        Some(d) => d,
    };
    let lead = p.coeff(deg);
    if deg == 1 {
        return Ok(vec![-p.coeff(0) / lead]);
    }
    let mut companion = CMatrix::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for k in 0..deg {
        companion[(k, deg - 1)] = -p.coeff(k) / lead;
    }
    let mut roots = eigenvalues(&companion)?;
    let dp = p.derivative();
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = dp.eval(*r);
            if d.norm() == 0.0 {
                break;
            }
            let cand = *r - p.eval(*r) / d;
            if is_finite(cand) && p.eval(cand).norm() < p.eval(*r).norm() {
                *r = cand;
            } else {
                break;
            }
        }
    }
    Ok(roots)
}

/// Smallest pairwise distance, `f64::INFINITY` for fewer than two points.
pub fn min_separation(points: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min((points[i] - points[j]).norm());
        }
    }
    best
}

/// Sorts complex values lexicographically by (Re, Im) after quantizing to a
/// relative grid, so values equal up to rounding keep a stable order.
pub fn sort_canonical(values: &mut [C64]) {
    values.sort_by(|a, b| canonical_key(*a).cmp(&canonical_key(*b)));
}

pub(crate) fn canonical_key(z: C64) -> (i64, i64) {
    (quantize(z.re), quantize(z.im))
}

pub(crate) fn quantize(x: f64) -> i64 {
    const GRID: f64 = 1e-8;
    (x / GRID).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_triangular_and_rotation() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, 0.0),
                C64::new(2.0, 1.0),
                C64::new(0.0, 3.0),
                C64::new(0.0, 0.0),
                C64::new(-2.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.5, 0.5),
            ],
        );
        let mut ev = eigenvalues(&m).unwrap();
        sort_canonical(&mut ev);
        let expect = [C64::new(-2.0, 0.0), C64::new(0.5, 0.5), C64::new(1.0, 0.0)];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).norm() < 1e-12);
        }
        let rot = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        );
        let mut ev = eigenvalues(&rot).unwrap();
        sort_canonical(&mut ev);
        assert!((ev[0] - C64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - C64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn poly_roots_recover_construction() {
        let roots = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 2.0), C64::new(0.3, -0.7)];
        let p = ComplexPoly::from_roots(&roots).scale(C64::new(2.0, -1.0));
        let mut found = poly_roots(&p).unwrap();
        let mut want = roots.to_vec();
        sort_canonical(&mut found);
        sort_canonical(&mut want);
        for (a, b) in found.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn least_squares_consistent_overdetermined() {
        let a = CMatrix::from_row_slice(
            3,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        );
        let b = CVector::from_vec(vec![C64::new(1.0, 1.0), C64::new(2.0, 0.0), C64::new(3.0, 1.0)]);
        let x = least_squares(&a, &b).unwrap();
        assert!((x[0] - C64::new(1.0, 1.0)).norm() < 1e-13);
        assert!((x[1] - C64::new(2.0, 0.0)).norm() < 1e-13);
    }
}
