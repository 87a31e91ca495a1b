//! Kink stability operator of the φ⁶ theory. With `z = cosh(μx/2)` and
//! `k = 1/ε²` the equation has `X = z⁴ + (k-1) z² - k`, `Y = -5z³ + (k+6) z`
//! and `Z = (4E/μ² + 5) z² + k(4E/μ² - 1) - 6`. Matching `Z` against the
//! Bethe coefficients gives `E = μ²(c2 - 5)/4`, `c1 = 0` and
//! `c0 = (c2 - 6) k - 6`, with `k` unknown.

use serde::{Deserialize, Serialize};

use super::wave::{Envelope, VariableMap, Wavefunction};
use super::AppMeta;
use crate::augmented::{
    collapse_free, solve_augmented, AugmentedSolution, AugmentedStats, AugmentedSystem, Constraint, Discarded,
    ParamDef, ParamDomain,
};
use crate::bethe::{theorem_coeffs, OdeSpec, SolverConfig};
use crate::error::{QesError, Result};
use crate::forms::FormKind;
use crate::poly::C64;

pub const INV_EPS_SQ: &str = "inv_eps_sq";

/// Below this `1/ε²` the poles `±i/ε` merge at the origin.
pub const DEGENERATE_K: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phi6Params {
    pub mu: f64,
    pub n: usize,
}

impl Phi6Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(QesError::InvalidParams(format!("mu must be positive, got {}", self.mu)));
        }
        Ok(())
    }
}

pub fn spec_for(k: C64, n: usize) -> Result<OdeSpec> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    OdeSpec::new([-k, zero, k - one, zero, one], [zero, k + 6.0, zero, C64::new(-5.0, 0.0)], n)
}

/// `E = μ²(n-1)(5-n)/4`
pub fn energy_closed_form(mu: f64, n: usize) -> f64 {
    let n = n as f64;
    0.25 * mu * mu * (n - 1.0) * (5.0 - n)
}

pub struct Phi6System {
    n: usize,
    params: Vec<ParamDef>,
}

impl Phi6System {
    /// Start box `1/ε² ∈ (0, 10]`.
    pub fn new(n: usize) -> Self {
        Phi6System { n, params: vec![ParamDef::new(INV_EPS_SQ, 1e-3, 10.0, ParamDomain::Positive)] }
    }
}

impl AugmentedSystem for Phi6System {
    fn params(&self) -> &[ParamDef] {
        &self.params
    }

    fn n(&self) -> usize {
        self.n
    }

    fn spec(&self, p: &[C64]) -> Result<OdeSpec> {
        spec_for(p[0], self.n)
    }

    fn constraints(&self, p: &[C64], roots: &[C64]) -> Vec<Constraint> {
        let k = p[0];
        let Ok(spec) = self.spec(p) else { return Vec::new() };
        let [c2, c1, c0] = theorem_coeffs(&spec, roots);
        let mag: f64 = roots.iter().map(|z| z.norm()).sum();
        let target = (c2 - 6.0) * k - 6.0;
        vec![Constraint::new(c1, 1.0 + 5.0 * mag), Constraint::new(c0 - target, 1.0 + c0.norm() + target.norm())]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Phi6State {
    pub solution: AugmentedSolution,
    /// `None` when `1/ε²` is free at this solution
    pub inv_eps_sq: Option<f64>,
    pub energy: f64,
    pub energy_closed_form: f64,
    pub stable: bool,
    pub wavefunction: Wavefunction,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Phi6Result {
    pub meta: AppMeta,
    pub params: Phi6Params,
    pub states: Vec<Phi6State>,
    pub discarded: Vec<Discarded>,
    pub stats: AugmentedStats,
}

pub fn solve(p: &Phi6Params, cfg: &SolverConfig) -> Result<Phi6Result> {
    p.validate()?;
    let sys = Phi6System::new(p.n);
    let out = solve_augmented(&sys, cfg)?;
    let mut discarded = out.discarded;
    let states = collapse_free(&sys, out.solutions, cfg)
        .into_iter()
        .filter_map(|fa| {
            let k = fa.solution.params[0].value.re;
            let free = fa.free.iter().any(|f| f == INV_EPS_SQ);
            if !free && k < DEGENERATE_K {
                let reason = format!("1/eps^2 = {k:e}: X = z^2 (z^2 - 1) has a double root");
                discarded.push(Discarded { solution: fa.solution, reason });
                return None;
            }
            Some(fa)
        })
        .map(|fa| {
            let k = fa.solution.params[0].value.re;
            let energy = 0.25 * p.mu * p.mu * (fa.solution.solution.c2.re - 5.0);
            let wavefunction = Wavefunction {
                variable: "x",
                map: VariableMap::CoshHalf { mu: p.mu },
                power: 0.0,
                exponent: Vec::new(),
                envelope: Envelope::SinhPower { k, mu: p.mu },
                poly: fa.solution.solution.s(),
            };
            Phi6State {
                inv_eps_sq: (!fa.free.iter().any(|f| f == INV_EPS_SQ)).then_some(k),
                energy,
                energy_closed_form: energy_closed_form(p.mu, p.n),
                stable: energy >= 0.0,
                wavefunction,
                solution: fa.solution,
            }
        })
        .collect();
    let meta = AppMeta::new("phi6", "energies in units of mu^2; x in units of 1/mu", FormKind::GHeun1)
        .branch(INV_EPS_SQ, "real positive");
    Ok(Phi6Result { meta, params: *p, states, discarded, stats: out.stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n2_first_excited_state() {
        let p = Phi6Params { mu: 1.0, n: 2 };
        let out = solve(&p, &SolverConfig::default().with_restarts(60)).unwrap();
        assert_eq!(out.states.len(), 1);
        let st = &out.states[0];
        assert!((st.inv_eps_sq.unwrap() - 2.0).abs() < 1e-10);
        assert!((st.energy - 0.75).abs() < 1e-12);
        // k = -1 with roots ±i/2 is found and rejected by the positivity flag
        assert!(out.discarded.iter().any(|d| (d.solution.params[0].value.re + 1.0).abs() < 1e-8));
        // psi(0) = y(1) (1 + k)^(-3/2) = -3^(-3/2)
        assert!((st.wavefunction.eval(0.0).re + 3f64.powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn n1_ground_state_has_free_epsilon() {
        let p = Phi6Params { mu: 2.0, n: 1 };
        let out = solve(&p, &SolverConfig::default().with_restarts(30)).unwrap();
        assert_eq!(out.states.len(), 1);
        assert!(out.states[0].inv_eps_sq.is_none());
        assert_eq!(out.states[0].energy, 0.0);
    }

    #[test]
    fn n3_only_boundary_or_negative_couplings() {
        let p = Phi6Params { mu: 1.0, n: 3 };
        let out = solve(&p, &SolverConfig::default().with_restarts(100)).unwrap();
        assert!(out.states.is_empty());
        for d in &out.discarded {
            let k = d.solution.params[0].value.re;
            assert!(k < DEGENERATE_K, "k = {k}");
            assert!((0.25 * (d.solution.solution.c2.re - 5.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn only_five_nonnegative_levels() {
        let count = (1..=40).filter(|&n| energy_closed_form(1.0, n) >= 0.0).count();
        assert_eq!(count, 5);
        assert_eq!(energy_closed_form(1.0, 6), -1.25);
    }
}
