use super::OdeSpec;
use crate::poly::C64;

/// `Σ_{i<j} z_i z_j`.
pub fn pair_sum(z: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            acc += z[i] * z[j];
        }
    }
    acc
}

fn sum(z: &[C64]) -> C64 {
    z.iter().sum()
}

fn sum_sq(z: &[C64]) -> C64 {
    z.iter().map(|v| v * v).sum()
}

/// `c2 = -n(n-1) a4 - n b3`.
pub fn coeff_c2(spec: &OdeSpec) -> C64 {
    let n = spec.n() as f64;
    let (a, b) = (spec.a(), spec.b());
    -a[4] * (n * (n - 1.0)) - b[3] * n
}

/// `c1 = -[2(n-1) a4 + b3] Σ z_i - n(n-1) a3 - n b2`.
pub fn coeff_c1(spec: &OdeSpec, roots: &[C64]) -> C64 {
    let n = spec.n() as f64;
    let (a, b) = (spec.a(), spec.b());
    -(a[4] * (2.0 * (n - 1.0)) + b[3]) * sum(roots) - a[3] * (n * (n - 1.0)) - b[2] * n
}

/// `c0 = -[2(n-1) a4 + b3] Σ z_i² - 2 a4 Σ_{i<j} z_i z_j - [2(n-1) a3 + b2] Σ z_i
/// - n(n-1) a2 - n b1`.
pub fn coeff_c0(spec: &OdeSpec, roots: &[C64]) -> C64 {
    let n = spec.n() as f64;
    let (a, b) = (spec.a(), spec.b());
    -(a[4] * (2.0 * (n - 1.0)) + b[3]) * sum_sq(roots)
        - a[4] * 2.0 * pair_sum(roots)
        - (a[3] * (2.0 * (n - 1.0)) + b[2]) * sum(roots)
        - a[2] * (n * (n - 1.0))
        - b[1] * n
}

/// `[c2, c1, c0]`.
pub fn theorem_coeffs(spec: &OdeSpec, roots: &[C64]) -> [C64; 3] {
    [coeff_c2(spec), coeff_c1(spec, roots), coeff_c0(spec, roots)]
}

/// `c0` as printed for the sl(2)-dependent case, where the `b1` term carries a
/// factor 2: `-c0 = n[(n-1) a2 + 2 b1] + 2 a4 Σ_{i<j} z_i z_j + [2(n-1) a3 + b2] Σ z_i`.
/// It differs from [`coeff_c0`] by `n b1` on dependent specs; kept only so the
/// discrepancy can be measured.
pub fn corollary_text_c0(spec: &OdeSpec, roots: &[C64]) -> C64 {
    let n = spec.n() as f64;
    let (a, b) = (spec.a(), spec.b());
    -((a[2] * (n - 1.0) + b[1] * 2.0) * n
        + a[4] * 2.0 * pair_sum(roots)
        + (a[3] * (2.0 * (n - 1.0)) + b[2]) * sum(roots))
}

/// Residuals `|LHS - RHS|` of the four double-sum identities over ordered
/// pairs `i != j`:
/// `Σ 1/(z_i-z_j) = 0`, `Σ z_i/(z_i-z_j) = n(n-1)/2`,
/// `Σ z_i²/(z_i-z_j) = (n-1) Σ z_i`,
/// `Σ z_i³/(z_i-z_j) = (n-1) Σ z_i² + Σ_{i<j} z_i z_j`.
pub fn symmetric_identity_suite(points: &[C64]) -> [f64; 4] {
    let n = points.len();
    let mut lhs = [C64::new(0.0, 0.0); 4];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let inv = (points[i] - points[j]).inv();
            let zi = points[i];
            lhs[0] += inv;
            lhs[1] += zi * inv;
            lhs[2] += zi * zi * inv;
            lhs[3] += zi * zi * zi * inv;
        }
    }
    let nf = n as f64;
    let rhs = [
        C64::new(0.0, 0.0),
        C64::new(nf * (nf - 1.0) / 2.0, 0.0),
        sum(points) * (nf - 1.0),
        sum_sq(points) * (nf - 1.0) + pair_sum(points),
    ];
    [0, 1, 2, 3].map(|k| (lhs[k] - rhs[k]).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn c2_examples() {
        let s = OdeSpec::from_real([0.0, 0.0, 0.0, 0.0, 1.0], [0.0; 4], 2).unwrap();
        assert_eq!(coeff_c2(&s), c(-2.0));
        assert_eq!(coeff_c2(&s.with_n(0)), c(0.0));
        let dep = OdeSpec::from_real([0.0, 0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 0.0, -4.0], 3).unwrap();
        assert_eq!(coeff_c2(&dep), c(6.0));
    }

    #[test]
    fn c1_examples() {
        let s = OdeSpec::from_real([0.0, 0.0, 0.0, 0.0, 1.0], [0.0; 4], 2).unwrap();
        assert_eq!(coeff_c1(&s, &[c(1.0), c(2.0)]), c(-6.0));
        let s1 = OdeSpec::from_real([1.0, 2.0, 3.0, 4.0, 5.0], [0.5, 1.5, -2.0, 3.0], 1).unwrap();
        let z = C64::new(0.3, -0.2);
        assert!((coeff_c1(&s1, &[z]) - (-(c(3.0) * z) + c(2.0))).norm() < 1e-15);
    }

    #[test]
    fn c0_examples() {
        let s = OdeSpec::from_real([1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], 1).unwrap();
        assert_eq!(coeff_c0(&s, &[c(0.0)]), c(-1.0));
        assert_eq!(coeff_c0(&s.with_n(0), &[]), c(0.0));
    }

    #[test]
    fn identity_examples() {
        let r = symmetric_identity_suite(&[c(0.0), c(1.0)]);
        assert!(r.iter().all(|&v| v < 1e-15));
        assert_eq!(symmetric_identity_suite(&[c(3.0)]), [0.0; 4]);
        let pts: Vec<C64> = (0..10).map(|k| C64::from_polar(1.0 + 0.1 * k as f64, 0.7 * k as f64)).collect();
        assert!(symmetric_identity_suite(&pts).iter().all(|&v| v < 1e-10));
    }

    #[test]
    fn corollary_text_differs_by_n_b1() {
        let s = OdeSpec::from_real([0.3, -0.2, 1.1, 0.4, 0.9], [0.2, 0.7, -0.5, -3.6], 3).unwrap();
        let z = [C64::new(0.1, 0.2), C64::new(-0.4, 0.3), C64::new(1.0, -0.5)];
        let d = corollary_text_c0(&s, &z) - coeff_c0(&s, &z);
        assert!((d + c(3.0 * 0.7)).norm() < 1e-13);
    }
}
