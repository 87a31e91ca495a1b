//! Planar Dirac electron in a Coulomb field plus a uniform magnetic field.
//! With `F = r^ξ e^{-eB r²/4} f(r)`, `ξ = √((l+½)² - (Zα)²)` and
//! `r₀ = Zα/(E+m)`, `f` solves a two-pole equation with poles `0, -r₀`,
//! exponents `2ξ+1, -1` and drift `-eB r`.

use serde::{Deserialize, Serialize};

use super::wave::{Envelope, VariableMap, Wavefunction};
use super::{layout, resolve, AppMeta, Quantity, FINE_STRUCTURE};
use crate::augmented::{
    solve_augmented, AugmentedSolution, AugmentedStats, AugmentedSystem, Constraint, Discarded, ParamDef, ParamDomain,
};
use crate::bethe::{theorem_coeffs, OdeSpec, SolverConfig};
use crate::error::{QesError, Result};
use crate::forms::{CanonicalForm, FormKind, GHeun3Form};
use crate::poly::{is_real, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracParams {
    pub m_e: f64,
    pub l: i32,
    pub energy: Quantity,
    pub charge: Quantity,
    pub e_b: Quantity,
    pub n: usize,
    /// put the `n = 0` closed form first among the starts
    #[serde(default)]
    pub closed_form_start: bool,
}

impl DiracParams {
    /// `Z` given; `E ∈ [-0.9 m, -0.05 m]` and `eB ∈ [-1.5 m², -0.01 m²]`
    /// solved for.
    pub fn with_fixed_charge(m_e: f64, l: i32, charge: f64, n: usize) -> Self {
        DiracParams {
            m_e,
            l,
            energy: Quantity::unknown(-0.9 * m_e, -0.05 * m_e),
            charge: Quantity::fixed(charge),
            e_b: Quantity::unknown(-1.5 * m_e * m_e, -0.01 * m_e * m_e),
            n,
            closed_form_start: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m_e.is_finite() && self.m_e > 0.0) {
            return Err(QesError::InvalidParams(format!("m_e must be positive, got {}", self.m_e)));
        }
        if let Quantity::Fixed { value } = self.charge {
            let za = value * FINE_STRUCTURE;
            let j = self.l as f64 + 0.5;
            if za == 0.0 || j * j <= za * za {
                return Err(QesError::InvalidParams(format!("need 0 < (Z alpha)^2 < (l + 1/2)^2, got Z = {value}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiracPoint {
    pub energy: C64,
    pub charge: C64,
    pub e_b: C64,
    pub m_e: f64,
    pub l: i32,
    pub xi: C64,
    pub r0: C64,
}

impl DiracPoint {
    pub fn new(energy: C64, charge: C64, e_b: C64, m_e: f64, l: i32) -> Self {
        let za = charge * FINE_STRUCTURE;
        let j = l as f64 + 0.5;
        let xi = (C64::new(j * j, 0.0) - za * za).sqrt();
        DiracPoint { energy, charge, e_b, m_e, l, xi, r0: za / (energy + m_e) }
    }

    fn za(&self) -> C64 {
        self.charge * FINE_STRUCTURE
    }

    pub fn form(&self) -> GHeun3Form {
        let zero = C64::new(0.0, 0.0);
        GHeun3Form {
            g1: zero,
            g2: -self.r0,
            sigma1: self.xi * 2.0 + 1.0,
            sigma2: C64::new(-1.0, 0.0),
            sigma: -self.e_b,
            kappa: zero,
        }
    }

    pub fn spec(&self, n: usize) -> Result<OdeSpec> {
        CanonicalForm::GHeun3(self.form()).to_spec(n)
    }

    pub fn physical_coeffs(&self) -> [C64; 3] {
        let (e, m, eb, xi, r0, l) = (self.energy, self.m_e, self.e_b, self.xi, self.r0, self.l as f64);
        let gap = e * e - m * m;
        let two_eza = e * self.za() * 2.0;
        let c2 = gap - eb * (xi + l + 1.5);
        let c1 = two_eza + (gap - eb * (xi + l + 2.5)) * r0;
        let c0 = two_eza * r0 - xi + l + 0.5;
        [c2, c1, c0]
    }

    /// The three relations fixing `E, Z, B` for degree `n`, as
    /// `|lhs - rhs| / (1 + |lhs| + |rhs|)`.
    pub fn relation_residuals(&self, roots: &[C64]) -> [f64; 3] {
        let n = roots.len() as f64;
        let (e, m, eb, xi, r0, l) = (self.energy, self.m_e, self.e_b, self.xi, self.r0, self.l as f64);
        let s1: C64 = roots.iter().sum();
        let s2: C64 = roots.iter().map(|z| z * z).sum();
        let two_eza = e * self.za() * 2.0;
        let pairs = [
            (e * e, eb * (xi + n + l + 1.5) + m * m),
            (two_eza, eb * (r0 + s1)),
            (two_eza * r0, -(xi * 2.0 + n - 1.0) * n + xi - (l + 0.5) + eb * (s2 + r0 * s1)),
        ];
        pairs.map(|(a, b)| (a - b).norm() / (1.0 + a.norm() + b.norm()))
    }

    /// `F = r^ξ e^{-eB r²/4} f(r)`; requires real `ξ` and `eB`.
    pub fn big_component(&self, f: &crate::poly::ComplexPoly) -> Option<Wavefunction> {
        (is_real(self.xi) && is_real(self.e_b)).then(|| Wavefunction {
            variable: "r",
            map: VariableMap::Scaled { scale: 1.0 },
            power: self.xi.re,
            exponent: vec![0.0, 0.0, -0.25 * self.e_b.re],
            envelope: Envelope::None,
            poly: f.clone(),
        })
    }

    /// The printed small component for `f = 1`:
    /// `G = (ξ - l - ½ + eB r²) / ((E+m) r + Zα) · r^ξ e^{-eB r²/4}`.
    pub fn small_component_n0(&self, r: f64) -> C64 {
        let (xi, eb) = (self.xi, self.e_b);
        let num = xi - (self.l as f64 + 0.5) + eb * (r * r);
        let den = (self.energy + self.m_e) * r + self.za();
        num / den * C64::new(r, 0.0).powc(xi) * (-eb * (0.25 * r * r)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiracClosedForm {
    pub xi: f64,
    pub e_b: f64,
    pub energy: f64,
}

/// `eB = -m²(l+½+ξ)/(l+1+ξ)²`, `E = -m/(2(l+1+ξ))` for `f = 1`.
pub fn closed_form_n0(m_e: f64, l: i32, charge: f64) -> DiracClosedForm {
    let za = charge * FINE_STRUCTURE;
    let j = l as f64 + 0.5;
    let xi = (j * j - za * za).sqrt();
    let big = l as f64 + 1.0 + xi;
    DiracClosedForm { xi, e_b: -m_e * m_e * (j + xi) / (big * big), energy: -m_e / (2.0 * big) }
}

pub struct DiracSystem {
    p: DiracParams,
    defs: Vec<ParamDef>,
    slots: Vec<std::result::Result<f64, usize>>,
}

impl DiracSystem {
    pub fn new(p: &DiracParams) -> Result<Self> {
        p.validate()?;
        let (defs, slots) = layout(&[
            ("energy", p.energy, ParamDomain::Real),
            ("charge", p.charge, ParamDomain::Positive),
            ("e_b", p.e_b, ParamDomain::Real),
        ]);
        Ok(DiracSystem { p: *p, defs, slots })
    }

    pub fn point(&self, p: &[C64]) -> DiracPoint {
        let v = resolve(&self.slots, p);
        DiracPoint::new(v[0], v[1], v[2], self.p.m_e, self.p.l)
    }
}

impl AugmentedSystem for DiracSystem {
    fn params(&self) -> &[ParamDef] {
        &self.defs
    }

    fn n(&self) -> usize {
        self.p.n
    }

    fn spec(&self, p: &[C64]) -> Result<OdeSpec> {
        self.point(p).spec(self.p.n)
    }

    fn constraints(&self, p: &[C64], roots: &[C64]) -> Vec<Constraint> {
        let pt = self.point(p);
        let Ok(spec) = pt.spec(self.p.n) else { return Vec::new() };
        let theorem = theorem_coeffs(&spec, roots);
        let phys = pt.physical_coeffs();
        (0..3).map(|k| Constraint::new(theorem[k] - phys[k], 1.0 + theorem[k].norm() + phys[k].norm())).collect()
    }

    fn seeded_starts(&self) -> Vec<(Vec<C64>, Vec<C64>)> {
        let Quantity::Fixed { value: charge } = self.p.charge else { return Vec::new() };
        if !self.p.closed_form_start || self.p.n != 0 {
            return Vec::new();
        }
        let cf = closed_form_n0(self.p.m_e, self.p.l, charge);
        let mut start = Vec::new();
        if let Quantity::Unknown { .. } = self.p.energy {
            start.push(C64::new(cf.energy, 0.0));
        }
        if let Quantity::Unknown { .. } = self.p.e_b {
            start.push(C64::new(cf.e_b, 0.0));
        }
        vec![(start, Vec::new())]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiracState {
    pub solution: AugmentedSolution,
    pub point: DiracPoint,
    pub relation_residuals: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_component: Option<Wavefunction>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiracResult {
    pub meta: AppMeta,
    pub params: DiracParams,
    pub states: Vec<DiracState>,
    pub discarded: Vec<Discarded>,
    pub stats: AugmentedStats,
}

pub fn solve(p: &DiracParams, cfg: &SolverConfig) -> Result<DiracResult> {
    let sys = DiracSystem::new(p)?;
    let out = solve_augmented(&sys, cfg)?;
    let states = out
        .solutions
        .into_iter()
        .map(|s| {
            let point = sys.point(&s.param_values());
            DiracState {
                relation_residuals: point.relation_residuals(s.roots()),
                big_component: point.big_component(&s.solution.s()),
                point,
                solution: s,
            }
        })
        .collect();
    let meta = AppMeta::new("dirac", "hbar = c = 1, alpha = 1/137", FormKind::GHeun3).branch("xi", "positive root");
    Ok(DiracResult { meta, params: *p, states, discarded: out.discarded, stats: out.stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_satisfies_relations() {
        for l in 0..3 {
            let cf = closed_form_n0(1.0, l, 50.0);
            let pt = DiracPoint::new(C64::new(cf.energy, 0.0), C64::new(50.0, 0.0), C64::new(cf.e_b, 0.0), 1.0, l);
            assert!(pt.relation_residuals(&[]).iter().all(|&r| r < 1e-14));
            let spec = pt.spec(0).unwrap();
            let th = theorem_coeffs(&spec, &[]);
            for (a, b) in th.iter().zip(pt.physical_coeffs()) {
                assert!((a - b).norm() < 1e-14);
            }
            // E = -m/2 + sqrt(m^2 + 2 eB)/2
            assert!((cf.energy - (-0.5 + 0.5 * (1.0 + 2.0 * cf.e_b).sqrt())).abs() < 1e-14);
        }
    }

    #[test]
    fn solver_recovers_closed_form() {
        let p = DiracParams::with_fixed_charge(1.0, 1, 50.0, 0);
        let out = solve(&p, &SolverConfig::default().with_restarts(24)).unwrap();
        let cf = closed_form_n0(1.0, 1, 50.0);
        assert!(out
            .states
            .iter()
            .any(|s| (s.point.energy.re - cf.energy).abs() < 1e-10 && (s.point.e_b.re - cf.e_b).abs() < 1e-10));
    }
}
