//! Closed-form wavefunction descriptors: `x^power · exp(Σ e_k x^k) · env(x) · S(z(x))`.

use serde::Serialize;

use crate::poly::{ComplexPoly, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum VariableMap {
    /// `z = scale · x`
    Scaled { scale: f64 },
    /// `z = x²`
    Square,
    /// `z = cosh(mu x / 2)`
    CoshHalf { mu: f64 },
}

impl VariableMap {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            VariableMap::Scaled { scale } => scale * x,
            VariableMap::Square => x * x,
            VariableMap::CoshHalf { mu } => (0.5 * mu * x).cosh(),
        }
    }
}

/// Extra non-polynomial factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    None,
    /// `(1 + k + sinh²(mu x / 2))^(-3/2)`
    SinhPower {
        k: f64,
        mu: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Wavefunction {
    pub variable: &'static str,
    pub map: VariableMap,
    pub power: f64,
    /// coefficients `e_k` of the exponent polynomial in `x`
    pub exponent: Vec<f64>,
    pub envelope: Envelope,
    /// polynomial factor in `z`
    pub poly: ComplexPoly,
}

impl Wavefunction {
    pub fn eval(&self, x: f64) -> C64 {
        let expo: f64 = self.exponent.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        let env = match self.envelope {
            Envelope::None => 1.0,
            Envelope::SinhPower { k, mu } => (1.0 + k + (0.5 * mu * x).sinh().powi(2)).powf(-1.5),
        };
        let z = C64::new(self.map.apply(x), 0.0);
        self.poly.eval(z) * (x.powf(self.power) * expo.exp() * env)
    }

    pub fn eval_grid(&self, xs: &[f64]) -> Vec<C64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// `count` evenly spaced points on `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = grid(0.5, 2.0, 4);
        assert_eq!(g, vec![0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn gaussian_times_linear() {
        let w = Wavefunction {
            variable: "r",
            map: VariableMap::Square,
            power: 1.0,
            exponent: vec![0.0, 0.0, -0.5],
            envelope: Envelope::None,
            poly: ComplexPoly::from_real(&[-1.0, 1.0]),
        };
        let x: f64 = 1.3;
        let expect = x * (-0.5 * x * x).exp() * (x * x - 1.0);
        assert!((w.eval(x).re - expect).abs() < 1e-15);
    }
}
