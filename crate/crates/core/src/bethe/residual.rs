//! Pole-cleared Bethe residual
//! `F_i = 2 X(z_i) Σ_{j≠i} Π_{k≠i,j} (z_i - z_k) + Y(z_i) Π_{j≠i} (z_i - z_j)`
//! and its analytic Jacobian.
//!
//! With `p_i(w) = Π_{j≠i} (w - z_j)` this is `F_i = 2 X(z_i) p_i'(z_i) + Y(z_i) p_i(z_i)`.
//! `p_i` does not depend on `z_i`, and for `m != i`, `p_i = (w - z_m) r_im` so
//! `∂p_i/∂z_m = -r_im`.

use super::OdeSpec;
use crate::linalg::CMatrix;
use crate::poly::C64;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Product of `d[k]` over `k` not in `skip`.
fn prod_skip(d: &[C64], skip: &[usize]) -> C64 {
    d.iter().enumerate().filter(|(k, _)| !skip.contains(k)).fold(ONE, |acc, (_, &v)| acc * v)
}

/// Value, first and second derivative at `z_i` of `Π_{k ∉ skip} (w - z_k)`,
/// where `d[k] = z_i - z_k` and `i` itself is in `skip`.
fn local_jet(d: &[C64], skip: &[usize], want_second: bool) -> (C64, C64, C64) {
    let live: Vec<usize> = (0..d.len()).filter(|k| !skip.contains(k)).collect();
    let value = prod_skip(d, skip);
    let mut first = ZERO;
    let mut second = ZERO;
    for (a, &j) in live.iter().enumerate() {
        let mut s1 = skip.to_vec();
        s1.push(j);
        first += prod_skip(d, &s1);
        if want_second {
            for &k in live.iter().skip(a + 1) {
                let mut s2 = s1.clone();
                s2.push(k);
                second += prod_skip(d, &s2) * 2.0;
            }
        }
    }
    (value, first, second)
}

fn diffs(roots: &[C64], i: usize) -> Vec<C64> {
    roots.iter().map(|&zk| roots[i] - zk).collect()
}

pub fn bae_residual_cleared(spec: &OdeSpec, roots: &[C64]) -> Vec<C64> {
    let (x, y) = (spec.x(), spec.y());
    (0..roots.len())
        .map(|i| {
            let d = diffs(roots, i);
            let (p, q, _) = local_jet(&d, &[i], false);
            x.eval(roots[i]) * q * 2.0 + y.eval(roots[i]) * p
        })
        .collect()
}

pub fn bae_jacobian(spec: &OdeSpec, roots: &[C64]) -> CMatrix {
    let n = roots.len();
    let (x, y) = (spec.x(), spec.y());
    let (dx, dy) = (x.derivative(), y.derivative());
    let mut jac = CMatrix::zeros(n, n);
    for i in 0..n {
        let zi = roots[i];
        let d = diffs(roots, i);
        let (xv, yv) = (x.eval(zi), y.eval(zi));
        let (p, q, pp) = local_jet(&d, &[i], true);
        jac[(i, i)] = dx.eval(zi) * q * 2.0 + xv * pp * 2.0 + dy.eval(zi) * p + yv * q;
        for m in 0..n {
            if m != i {
                let (r, rp, _) = local_jet(&d, &[i, m], false);
                jac[(i, m)] = -(xv * rp * 2.0 + yv * r);
            }
        }
    }
    jac
}

/// `M_i`: the same expression as `F_i` with every factor replaced by its
/// modulus bound. Coefficient terms are sized at radius `>= 1` so that a root
/// sitting on a zero of `Y` near the origin is not measured 0/0.
pub fn bae_residual_scales(spec: &OdeSpec, roots: &[C64]) -> Vec<f64> {
    let (x, y) = (spec.x(), spec.y());
    let mags: Vec<f64> = roots.iter().map(|z| z.norm()).collect();
    (0..roots.len())
        .map(|i| {
            let sums: Vec<C64> = mags.iter().map(|&m| C64::new(mags[i] + m, 0.0)).collect();
            let (p, q, _) = local_jet(&sums, &[i], false);
            let r_i = mags[i].max(1.0);
            2.0 * x.eval_abs(r_i) * q.re + y.eval_abs(r_i) * p.re
        })
        .collect()
}

/// `max_i |F_i| / M_i`, a relative cancellation measure.
pub fn bae_residual_norm(spec: &OdeSpec, roots: &[C64]) -> f64 {
    let f = bae_residual_cleared(spec, roots);
    bae_residual_scales(spec, roots)
        .iter()
        .zip(&f)
        .map(|(&m, fi)| if m > 0.0 { fi.norm() / m } else { fi.norm() })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(a: [f64; 5], b: [f64; 4], n: usize) -> OdeSpec {
        OdeSpec::from_real(a, b, n).unwrap()
    }

    #[test]
    fn n1_reduces_to_y() {
        let s = spec([1.0, 2.0, 0.5, -1.0, 0.3], [0.2, -1.0, 0.7, 0.4], 1);
        let z = C64::new(0.4, -0.3);
        let f = bae_residual_cleared(&s, &[z]);
        assert!((f[0] - s.y().eval(z)).norm() < 1e-15);
        let j = bae_jacobian(&s, &[z]);
        assert!((j[(0, 0)] - s.y().derivative().eval(z)).norm() < 1e-14);
    }

    #[test]
    fn matches_rational_form() {
        let s = spec([0.5, -1.0, 0.2, 1.0, 0.3], [0.2, -1.0, 0.7, 0.4], 3);
        let z = [C64::new(0.4, -0.3), C64::new(-1.2, 0.5), C64::new(0.9, 1.1)];
        let f = bae_residual_cleared(&s, &z);
        for i in 0..3 {
            let mut rational = s.y().eval(z[i]) / s.x().eval(z[i]);
            let mut pfac = C64::new(1.0, 0.0);
            for j in 0..3 {
                if j != i {
                    rational += C64::new(2.0, 0.0) / (z[i] - z[j]);
                    pfac *= z[i] - z[j];
                }
            }
            let expect = rational * s.x().eval(z[i]) * pfac;
            assert!((f[i] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let s = spec([0.5, -1.0, 0.2, 1.0, 0.3], [0.2, -1.0, 0.7, 0.4], 4);
        let z = [C64::new(0.4, -0.3), C64::new(-1.2, 0.5), C64::new(0.9, 1.1), C64::new(0.1, 0.8)];
        let jac = bae_jacobian(&s, &z);
        let h = 1e-6;
        for m in 0..4 {
            let mut zp = z;
            let mut zm = z;
            zp[m] += h;
            zm[m] -= h;
            let fp = bae_residual_cleared(&s, &zp);
            let fm = bae_residual_cleared(&s, &zm);
            for i in 0..4 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((fd - jac[(i, m)]).norm() <= 1e-6 * (1.0 + jac[(i, m)].norm()));
            }
        }
    }

    #[test]
    fn phi6_closed_form_roots_solve() {
        // X = z^4 + z^2 - 2, Y = -5 z^3 + 8 z at 1/eps^2 = 2
        let s = spec([-2.0, 0.0, 1.0, 0.0, 1.0], [0.0, 8.0, 0.0, -5.0], 2);
        let r2 = 2f64.sqrt();
        let z = [C64::new(r2, 0.0), C64::new(-r2, 0.0)];
        assert!(bae_residual_cleared(&s, &z).iter().all(|f| f.norm() < 1e-13));
        assert!(bae_residual_norm(&s, &z) < 1e-15);
    }
}
