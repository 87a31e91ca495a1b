use super::{theorem_coeffs, OdeSpec};
use crate::poly::{ComplexPoly, C64};

/// `T = X S'' + Y S' + Z S` with `S` monic on `roots` and `Z = c2 z² + c1 z + c0`.
pub fn ode_remainder(spec: &OdeSpec, roots: &[C64], c: [C64; 3]) -> ComplexPoly {
    let s = ComplexPoly::from_roots(roots);
    let ds = s.derivative();
    let dds = ds.derivative();
    let z = ComplexPoly::new(vec![c[2], c[1], c[0]]);
    &(&(&spec.x() * &dds) + &(&spec.y() * &ds)) + &(&z * &s)
}

/// `max |coeff T| / scale`, with
/// `scale = max(1, max(|X|, |Y|, |Z|) * max(1, |S|) * n!)` over coefficient
/// sup-norms.
pub fn certify_ode(spec: &OdeSpec, roots: &[C64], c: [C64; 3]) -> f64 {
    let t = ode_remainder(spec, roots, c);
    let s = ComplexPoly::from_roots(roots);
    let zmax = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let inputs = spec.coeff_scale().max(zmax);
    let fact: f64 = (1..=roots.len()).map(|k| k as f64).product();
    let scale = (inputs * s.max_abs_coeff().max(1.0) * fact).max(1.0);
    t.max_abs_coeff() / scale
}

/// [`certify_ode`] with the coefficients computed from the roots.
pub fn certify_roots(spec: &OdeSpec, roots: &[C64]) -> f64 {
    certify_ode(spec, roots, theorem_coeffs(spec, roots))
}
