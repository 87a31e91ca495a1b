//! O(N)-invariant decatic oscillator `V = λ₁x² + λ₂x⁴ + λ₃x⁶ + λ₄x⁸ + x¹⁰`.
//! With `z = r²` and `R = r^l e^{-αr²/2 - βr⁴/4 - γr⁶/6} φ(z)`, where
//! `γ = √2`, `β = λ₄/√2`, `α = (λ₃ - λ₄²/4)/√2`, `φ` solves a one-pole
//! equation with exponent `l + N/2` and drift `-(γz² + βz + α)`; `λ₃, λ₄`
//! are fixed by the `c2, c1` identifications and `E` follows from `c0`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::wave::{Envelope, VariableMap, Wavefunction};
use super::{AppMeta, Transcription};
use crate::augmented::{
    solve_augmented, AugmentedSolution, AugmentedStats, AugmentedSystem, Constraint, Discarded, ParamDef, ParamDomain,
};
use crate::bethe::{theorem_coeffs, OdeSpec, SolverConfig};
use crate::error::{QesError, Result};
use crate::forms::{CanonicalForm, FormKind, GHeun4Form};
use crate::poly::{is_real, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaticParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub dim: u32,
    pub l: u32,
    pub n: usize,
}

impl DecaticParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || !(self.lambda1.is_finite() && self.lambda2.is_finite()) {
            return Err(QesError::InvalidParams(format!("need N >= 1 and finite couplings, got {self:?}")));
        }
        Ok(())
    }

    /// `N + 2l + shift`
    fn k(&self, shift: f64) -> f64 {
        self.dim as f64 + 2.0 * self.l as f64 + shift
    }

    fn eta(&self) -> f64 {
        self.l as f64 + 0.5 * self.dim as f64
    }
}

/// `(α, β, γ)` from `(λ₃, λ₄)`.
pub fn exponents(lambda3: C64, lambda4: C64) -> (C64, C64, C64) {
    let alpha = (lambda3 - lambda4 * lambda4 * 0.25) / SQRT_2;
    (alpha, lambda4 / SQRT_2, C64::new(SQRT_2, 0.0))
}

pub fn form(p: &DecaticParams, lambda3: C64, lambda4: C64) -> GHeun4Form {
    let (alpha, beta, gamma) = exponents(lambda3, lambda4);
    GHeun4Form { h: C64::new(0.0, 0.0), eta: C64::new(p.eta(), 0.0), lambda: -gamma, gamma: -beta, delta: -alpha }
}

/// `[c2, c1]` of `Z = ¼[(2αβ - γ(N+2l+4) - 2λ₂) z² + (α² - β(N+2l+2) - 2λ₁) z + 2E - α(N+2l)]`.
pub fn physical_c2_c1(p: &DecaticParams, lambda3: C64, lambda4: C64) -> [C64; 2] {
    let (alpha, beta, gamma) = exponents(lambda3, lambda4);
    let c2 = (alpha * beta * 2.0 - gamma * p.k(4.0) - 2.0 * p.lambda2) * 0.25;
    let c1 = (alpha * alpha - beta * p.k(2.0) - 2.0 * p.lambda1) * 0.25;
    [c2, c1]
}

/// `E` from the `c0` identification.
pub fn energy_from_c0(p: &DecaticParams, lambda3: C64, lambda4: C64, c0: C64) -> C64 {
    let (alpha, _, _) = exponents(lambda3, lambda4);
    (c0 * 4.0 + alpha * p.k(0.0)) * 0.5
}

/// `E = α/2 (4n + N + 2l) + 2β Σz + 2γ Σz²`.
pub fn energy_from_roots(p: &DecaticParams, lambda3: C64, lambda4: C64, roots: &[C64]) -> C64 {
    let (alpha, beta, gamma) = exponents(lambda3, lambda4);
    let s1: C64 = roots.iter().sum();
    let s2: C64 = roots.iter().map(|z| z * z).sum();
    alpha * 0.5 * (4.0 * roots.len() as f64 + p.k(0.0)) + beta * s1 * 2.0 + gamma * s2 * 2.0
}

fn cbrt(z: C64) -> C64 {
    if z.im == 0.0 {
        C64::new(z.re.cbrt(), 0.0)
    } else {
        z.powf(1.0 / 3.0)
    }
}

/// `∛(-q/2 + √D) + ∛(-q/2 - √D)` with `D = (q/2)² + (p/3)³`, real cube roots
/// for real radicands.
pub fn cardano(p: f64, q: f64) -> C64 {
    let disc = C64::new((0.5 * q).powi(2) + (p / 3.0).powi(3), 0.0).sqrt();
    let h = C64::new(-0.5 * q, 0.0);
    cbrt(h + disc) + cbrt(h - disc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecaticReference {
    pub lambda3: f64,
    pub lambda4: f64,
    pub energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z1: Option<f64>,
}

/// `φ = 1`: `λ₄` from the depressed cubic, then `λ₃` and `E`. The printed
/// `q` lacks the factor `√2` on its last term.
pub fn reference_n0(p: &DecaticParams, variant: Transcription) -> Option<DecaticReference> {
    let (l1, l2) = (p.lambda1, p.lambda2);
    let (k2, k4) = (p.k(2.0), p.k(4.0));
    let tail = (k4 + SQRT_2 * l2).powi(2) / k2;
    let pp = -24.0 * l1 * l1 / (9.0 * k2 * k2);
    let q = 32.0 * SQRT_2 * l1.powi(3) / (27.0 * k2.powi(3))
        - match variant {
            Transcription::Printed => tail,
            Transcription::Corrected => SQRT_2 * tail,
        };
    let root = cardano(pp, q);
    if root.im.abs() > 1e-12 * (1.0 + root.re.abs()) {
        return None;
    }
    let mut t = root.re;
    for _ in 0..2 {
        let d = 3.0 * t * t + pp;
        if d != 0.0 {
            t -= (t * t * t + pp * t + q) / d;
        }
    }
    let lambda4 = -2.0 * SQRT_2 * l1 / (3.0 * k2) + t;
    let lambda3 = 0.25 * lambda4 * lambda4 + SQRT_2 * (k4 + SQRT_2 * l2) / lambda4;
    let energy = (lambda3 - 0.25 * lambda4 * lambda4) * p.k(0.0) / (2.0 * SQRT_2);
    Some(DecaticReference { lambda3, lambda4, energy, z1: None })
}

/// Root of the one-root Bethe equation `γz³ + βz² + αz - (l + N/2) = 0` at
/// given `(λ₃, λ₄)`, for the chosen transcription.
pub fn z1_at(p: &DecaticParams, lambda3: f64, lambda4: f64, variant: Transcription) -> Option<f64> {
    let a = lambda3 - 0.25 * lambda4 * lambda4;
    let z = match variant {
        Transcription::Printed => {
            let u = lambda4 * lambda4 / 24.0 - 0.5 * lambda3;
            let v = 5.0 * lambda4.powi(3) / 432.0 - 0.5 * lambda3 + p.k(0.0) / (2.0 * SQRT_2);
            cardano(u, v) + lambda4 / 6.0
        }
        Transcription::Corrected => {
            let pp = 0.5 * a - lambda4 * lambda4 / 12.0;
            let q = lambda4.powi(3) / 108.0 - lambda4 * a / 12.0 - p.eta() / SQRT_2;
            cardano(pp, q) - lambda4 / 6.0
        }
    };
    (z.im.abs() <= 1e-12 * (1.0 + z.re.abs())).then_some(z.re)
}

/// One root: eliminate `λ₃` through the `c2` relation and solve the `c1`
/// relation for `λ₄ > 0` by bracketing and bisection.
pub fn reference_n1(p: &DecaticParams, variant: Transcription) -> Option<DecaticReference> {
    let (k0, l1, l2) = (p.k(0.0), p.lambda1, p.lambda2);
    let a_of = |l4: f64| SQRT_2 * (k0 + 8.0 + SQRT_2 * l2) / l4;
    let g = |l4: f64| -> Option<f64> {
        let a = a_of(l4);
        let z1 = z1_at(p, 0.25 * l4 * l4 + a, l4, variant)?;
        Some(0.5 * a * a - l4 * (k0 + 6.0) / SQRT_2 - 2.0 * l1 - 4.0 * SQRT_2 * z1)
    };
    let grid: Vec<f64> = (0..=400).map(|k| 1e-2 * 1.03f64.powi(k)).collect();
    let mut bracket = None;
    for w in grid.windows(2) {
        if let (Some(ga), Some(gb)) = (g(w[0]), g(w[1])) {
            if ga == 0.0 || ga.signum() != gb.signum() {
                bracket = Some((w[0], w[1], ga));
                break;
            }
        }
    }
    let (mut lo, mut hi, mut glo) = bracket?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    let lambda4 = 0.5 * (lo + hi);
    let a = a_of(lambda4);
    let z1 = z1_at(p, 0.25 * lambda4 * lambda4 + a, lambda4, variant)?;
    let energy = a * (k0 + 4.0) / (2.0 * SQRT_2) + SQRT_2 * lambda4 * z1 + 2.0 * SQRT_2 * z1 * z1;
    Some(DecaticReference { lambda3: 0.25 * lambda4 * lambda4 + a, lambda4, energy, z1: Some(z1) })
}

pub fn reference(p: &DecaticParams, variant: Transcription) -> Option<DecaticReference> {
    match p.n {
        0 => reference_n0(p, variant),
        1 => reference_n1(p, variant),
        _ => None,
    }
}

pub struct DecaticSystem {
    p: DecaticParams,
    defs: Vec<ParamDef>,
}

impl DecaticSystem {
    /// Start box `λ₃ ∈ [0.5, 15]`, `λ₄ ∈ [0.2, 6]`.
    pub fn new(p: &DecaticParams) -> Result<Self> {
        p.validate()?;
        let defs = vec![
            ParamDef::new("lambda3", 0.5, 15.0, ParamDomain::Real),
            ParamDef::new("lambda4", 0.2, 6.0, ParamDomain::Real),
        ];
        Ok(DecaticSystem { p: *p, defs })
    }
}

impl AugmentedSystem for DecaticSystem {
    fn params(&self) -> &[ParamDef] {
        &self.defs
    }

    fn n(&self) -> usize {
        self.p.n
    }

    fn spec(&self, q: &[C64]) -> Result<OdeSpec> {
        CanonicalForm::GHeun4(form(&self.p, q[0], q[1])).to_spec(self.p.n)
    }

    fn constraints(&self, q: &[C64], roots: &[C64]) -> Vec<Constraint> {
        let Ok(spec) = self.spec(q) else { return Vec::new() };
        let th = theorem_coeffs(&spec, roots);
        let phys = physical_c2_c1(&self.p, q[0], q[1]);
        (0..2).map(|k| Constraint::new(th[k] - phys[k], 1.0 + th[k].norm() + phys[k].norm())).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecaticState {
    pub solution: AugmentedSolution,
    pub lambda3: f64,
    pub lambda4: f64,
    pub energy: f64,
    /// `|E from c0 - E from the root sums|`
    pub energy_consistency: f64,
    pub wavefunction: Wavefunction,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecaticResult {
    pub meta: AppMeta,
    pub params: DecaticParams,
    pub states: Vec<DecaticState>,
    pub discarded: Vec<Discarded>,
    pub stats: AugmentedStats,
}

pub fn solve(p: &DecaticParams, cfg: &SolverConfig) -> Result<DecaticResult> {
    let sys = DecaticSystem::new(p)?;
    let out = solve_augmented(&sys, cfg)?;
    let mut states = Vec::new();
    let mut discarded = out.discarded;
    for s in out.solutions {
        let (l3, l4) = (s.params[0].value, s.params[1].value);
        let (alpha, beta, _) = exponents(l3, l4);
        let e0 = energy_from_c0(p, l3, l4, s.solution.c0);
        let e1 = energy_from_roots(p, l3, l4, s.roots());
        let bad = if !(alpha.re > 0.0 && beta.re > 0.0) {
            Some(format!("alpha = {}, beta = {} not both positive", alpha.re, beta.re))
        } else if !is_real(e0) {
            Some(format!("E = {e0} is not real"))
        } else {
            None
        };
        if let Some(reason) = bad {
            discarded.push(Discarded { solution: s, reason });
            continue;
        }
        let wavefunction = Wavefunction {
            variable: "r",
            map: VariableMap::Square,
            power: p.l as f64,
            exponent: vec![0.0, 0.0, -0.5 * alpha.re, 0.0, -0.25 * beta.re, 0.0, -SQRT_2 / 6.0],
            envelope: Envelope::None,
            poly: s.solution.s(),
        };
        states.push(DecaticState {
            lambda3: l3.re,
            lambda4: l4.re,
            energy: e0.re,
            energy_consistency: (e0 - e1).norm(),
            wavefunction,
            solution: s,
        });
    }
    let meta = AppMeta::new("decatic", "hbar = 1, unit mass, x^10 coefficient 1", FormKind::GHeun4)
        .branch("alpha, beta", "positive");
    Ok(DecaticResult { meta, params: *p, states, discarded, stats: out.stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l1: f64, l2: f64, n: usize) -> DecaticParams {
        DecaticParams { lambda1: l1, lambda2: l2, dim: 3, l: 0, n }
    }

    #[test]
    fn n0_reference_solves_constraints() {
        for (l1, l2) in [(0.0, 0.0), (1.0, 0.5), (-1.0, 2.0)] {
            let p = params(l1, l2, 0);
            let r = reference_n0(&p, Transcription::Corrected).unwrap();
            let [c2, c1] = physical_c2_c1(&p, C64::new(r.lambda3, 0.0), C64::new(r.lambda4, 0.0));
            assert!(c2.norm() < 1e-12 && c1.norm() < 1e-12, "{c2} {c1}");
        }
        let r = reference_n0(&params(0.0, 0.0, 0), Transcription::Corrected).unwrap();
        assert!((r.lambda3 - 5.56374).abs() < 1e-5 && (r.lambda4 - 2.40204).abs() < 1e-5);
        let printed = reference_n0(&params(0.0, 0.0, 0), Transcription::Printed).unwrap();
        assert!((printed.lambda4 - r.lambda4).abs() > 0.1);
    }

    #[test]
    fn n1_reference_values() {
        let r = reference_n1(&params(0.0, 0.0, 1), Transcription::Corrected).unwrap();
        assert!((r.lambda3 - 7.6915).abs() < 1e-4 && (r.lambda4 - 2.5821).abs() < 1e-4);
        assert!((r.z1.unwrap() - 0.30339).abs() < 1e-5);
    }

    #[test]
    fn solver_matches_reference_n1() {
        let p = params(1.0, 0.5, 1);
        let out = solve(&p, &SolverConfig::default().with_restarts(64)).unwrap();
        let r = reference_n1(&p, Transcription::Corrected).unwrap();
        let hit = out.states.iter().find(|s| (s.lambda4 - r.lambda4).abs() < 1e-8).expect("reference branch");
        assert!((hit.lambda3 - r.lambda3).abs() < 1e-8 && (hit.energy - r.energy).abs() < 1e-8);
        assert!(hit.energy_consistency < 1e-10);
    }
}
