//! Static scalar perturbation of the Reissner-Nordström black hole with the
//! outer horizon at `r = 1` and `r₋ = g_m²/2`. With
//! `φ = r^μ e^{-m_s r} f(r)`, `μ = (1 ± √(1 - 8a²))/2`, the equation for `f`
//! has poles `0, 1, r₋` with exponents `2μ, 1, 1` and drift `-2 m_s`.

use serde::{Deserialize, Serialize};

use super::wave::{Envelope, VariableMap, Wavefunction};
use super::{layout, resolve, AppMeta, Quantity, Transcription};
use crate::augmented::{
    solve_augmented, AugmentedSolution, AugmentedStats, AugmentedSystem, Constraint, Discarded, ParamDef, ParamDomain,
};
use crate::bethe::{theorem_coeffs, OdeSpec, SolverConfig};
use crate::error::{QesError, Result};
use crate::forms::{CanonicalForm, FormKind, GHeun2Form};
use crate::poly::{is_real, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuBranch {
    Plus,
    #[default]
    Minus,
}

impl MuBranch {
    pub fn mu(self, a: C64) -> C64 {
        let root = (C64::new(1.0, 0.0) - a * a * 8.0).sqrt();
        match self {
            MuBranch::Plus => (root + 1.0) * 0.5,
            MuBranch::Minus => (-root + 1.0) * 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RnParams {
    pub a: Quantity,
    pub m_s: Quantity,
    pub g_m: Quantity,
    pub branch: MuBranch,
    pub n: usize,
}

impl RnParams {
    /// `g_m` given, `a` and `m_s` solved for from the box `a ∈ [-0.35, 0.35]`,
    /// `m_s ∈ [0, 2]`. The sign of `a` is not determined; `a ≥ 0` is reported.
    pub fn with_fixed_charge(g_m: f64, branch: MuBranch, n: usize) -> Self {
        RnParams {
            a: Quantity::unknown(-0.35, 0.35),
            m_s: Quantity::unknown(0.0, 2.0),
            g_m: Quantity::fixed(g_m),
            branch,
            n,
        }
    }
}

/// `[a, m_s, g_m]` in physical units with derived `r₋` and `μ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RnPoint {
    pub a: C64,
    pub m_s: C64,
    pub g_m: C64,
    pub r_minus: C64,
    pub mu: C64,
}

impl RnPoint {
    pub fn new(a: C64, m_s: C64, g_m: C64, branch: MuBranch) -> Self {
        RnPoint { a, m_s, g_m, r_minus: g_m * g_m * 0.5, mu: branch.mu(a) }
    }

    pub fn form(&self) -> GHeun2Form {
        let one = C64::new(1.0, 0.0);
        GHeun2Form { f: [C64::new(0.0, 0.0), one, self.r_minus], nu_s: [self.mu * 2.0, one, one], nu: -self.m_s * 2.0 }
    }

    pub fn spec(&self, n: usize) -> Result<OdeSpec> {
        CanonicalForm::GHeun2(self.form()).to_spec(n)
    }

    /// The `Z` coefficients of the transformed equation, `[c2, c1, c0]`.
    pub fn physical_coeffs(&self) -> [C64; 3] {
        let (a2, m, g2, r, mu) = (self.a * self.a, self.m_s, self.g_m * self.g_m, self.r_minus, self.mu);
        let one = C64::new(1.0, 0.0);
        let c2 = a2 * 2.0 * (one + one / r) - m * 2.0 * (mu + 1.0)
            + (g2 * (a2 + m * m * r) - m * m * (one + r * r) + a2 * 2.0 / r) / (one - r);
        let c1 = (m * (mu * 2.0 + 1.0) + mu) * (r + 1.0)
            - a2 * 2.0 * (r + 1.0) * (r + 1.0) / r
            - (g2 * (a2 + m * m) * r - m * m * (one + r * r) * r + a2 * 2.0 / r) / (one - r);
        let c0 = a2 * 2.0 + (a2 - mu * (m + 1.0)) * r * 2.0;
        [c2, c1, c0]
    }

    /// Right-hand sides of the three identification relations as printed for
    /// degree `n`, or their form implied by the general formulas.
    pub fn relation_rhs(&self, roots: &[C64], variant: Transcription) -> [C64; 3] {
        let n = roots.len() as f64;
        let (m, r, mu) = (self.m_s, self.r_minus, self.mu);
        let s1: C64 = roots.iter().sum();
        let s2: C64 = roots.iter().map(|z| z * z).sum();
        let rhs2 = m * 2.0 * n;
        let rhs1 = m * 2.0 * s1 - (mu * 2.0 + m * 2.0 * (r + 1.0) + n + 1.0) * n;
        let tail = match variant {
            Transcription::Printed => ((-mu * 2.0 + n) * (r + 1.0) - m * r * 2.0) * n,
            Transcription::Corrected => ((mu * 2.0 + n) * (r + 1.0) + m * r * 2.0) * n,
        };
        let rhs0 = m * 2.0 * s2 - (mu + m * (r + 1.0) + n) * s1 * 2.0 + tail;
        [rhs2, rhs1, rhs0]
    }

    /// `|lhs - rhs| / (1 + |lhs| + |rhs|)` for each relation.
    pub fn relation_residuals(&self, roots: &[C64], variant: Transcription) -> [f64; 3] {
        let lhs = self.physical_coeffs();
        let rhs = self.relation_rhs(roots, variant);
        [0, 1, 2].map(|k| (lhs[k] - rhs[k]).norm() / (1.0 + lhs[k].norm() + rhs[k].norm()))
    }
}

pub struct RnSystem {
    n: usize,
    branch: MuBranch,
    defs: Vec<ParamDef>,
    slots: Vec<std::result::Result<f64, usize>>,
}

impl RnSystem {
    pub fn new(p: &RnParams) -> Result<Self> {
        if let Quantity::Fixed { value } = p.g_m {
            let r = 0.5 * value * value;
            if !(r > 0.0 && r < 1.0) {
                return Err(QesError::InvalidParams(format!("need 0 < g_m^2/2 < 1, got r_minus = {r}")));
            }
        }
        // every relation depends on a only through a², and a = 0 is a double
        // root in a, so a² is the unknown
        let a_sq = match p.a {
            Quantity::Fixed { value } => Quantity::fixed(value * value),
            Quantity::Unknown { lo, hi } => {
                let top = lo.abs().max(hi.abs());
                let bottom = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { lo.abs().min(hi.abs()) };
                Quantity::unknown(bottom * bottom, top * top)
            }
        };
        let (defs, slots) = layout(&[
            ("a_sq", a_sq, ParamDomain::NonNegative),
            ("m_s", p.m_s, ParamDomain::NonNegative),
            ("g_m", p.g_m, ParamDomain::Positive),
        ]);
        Ok(RnSystem { n: p.n, branch: p.branch, defs, slots })
    }

    pub fn point(&self, p: &[C64]) -> RnPoint {
        let v = resolve(&self.slots, p);
        RnPoint::new(v[0].sqrt(), v[1], v[2], self.branch)
    }
}

impl AugmentedSystem for RnSystem {
    fn params(&self) -> &[ParamDef] {
        &self.defs
    }

    fn n(&self) -> usize {
        self.n
    }

    fn spec(&self, p: &[C64]) -> Result<OdeSpec> {
        self.point(p).spec(self.n)
    }

    fn constraints(&self, p: &[C64], roots: &[C64]) -> Vec<Constraint> {
        let pt = self.point(p);
        let Ok(spec) = pt.spec(self.n) else { return Vec::new() };
        let theorem = theorem_coeffs(&spec, roots);
        let phys = pt.physical_coeffs();
        (0..3).map(|k| Constraint::new(theorem[k] - phys[k], 1.0 + theorem[k].norm() + phys[k].norm())).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RnState {
    pub solution: AugmentedSolution,
    pub point: RnPoint,
    /// printed-relation residuals (equal to the corrected ones at `n = 0`)
    pub relation_residuals: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavefunction: Option<Wavefunction>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RnResult {
    pub meta: AppMeta,
    pub params: RnParams,
    pub states: Vec<RnState>,
    pub discarded: Vec<Discarded>,
    pub stats: AugmentedStats,
}

pub fn solve(p: &RnParams, cfg: &SolverConfig) -> Result<RnResult> {
    let sys = RnSystem::new(p)?;
    let out = solve_augmented(&sys, cfg)?;
    let states = out
        .solutions
        .into_iter()
        .map(|s| {
            let point = sys.point(&s.param_values());
            let wavefunction = (is_real(point.mu) && is_real(point.m_s)).then(|| Wavefunction {
                variable: "r",
                map: VariableMap::Scaled { scale: 1.0 },
                power: point.mu.re,
                exponent: vec![0.0, -point.m_s.re],
                envelope: Envelope::None,
                poly: s.solution.s(),
            });
            RnState {
                relation_residuals: point.relation_residuals(s.roots(), Transcription::Printed),
                point,
                wavefunction,
                solution: s,
            }
        })
        .collect();
    let meta = AppMeta::new("reissner-nordstrom", "1/sqrt(8 pi G) = 1, r_+ = 1", FormKind::GHeun2).branch(
        "mu",
        match p.branch {
            MuBranch::Plus => "(1 + sqrt(1 - 8a^2))/2",
            MuBranch::Minus => "(1 - sqrt(1 - 8a^2))/2",
        },
    );
    Ok(RnResult { meta, params: *p, states, discarded: out.discarded, stats: out.stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrected_relations_match_theorem() {
        let pt = RnPoint::new(C64::new(0.2, 0.0), C64::new(0.7, 0.0), C64::new(0.9, 0.0), MuBranch::Plus);
        let roots = [C64::new(2.0, 0.3), C64::new(-0.4, 1.0)];
        let spec = pt.spec(2).unwrap();
        let th = theorem_coeffs(&spec, &roots);
        let rhs = pt.relation_rhs(&roots, Transcription::Corrected);
        for k in 0..3 {
            assert!((th[k] - rhs[k]).norm() < 1e-12, "k = {k}");
        }
        let printed = pt.relation_rhs(&roots, Transcription::Printed);
        assert!((printed[2] - th[2]).norm() > 1e-3);
        assert_eq!(pt.relation_rhs(&[], Transcription::Printed), pt.relation_rhs(&[], Transcription::Corrected));
    }

    #[test]
    fn n0_fixed_charge_converges() {
        let p = RnParams::with_fixed_charge(1.0, MuBranch::Minus, 0);
        let out = solve(&p, &SolverConfig::default().with_restarts(16)).unwrap();
        assert!(!out.states.is_empty());
        for st in &out.states {
            assert!(st.relation_residuals.iter().all(|&r| r <= 1e-9), "{:?}", st.relation_residuals);
        }
    }
}
