//! Heine-Stieltjes counting experiment: for generic `X` of degree 3 or 4 and
//! `deg Y = deg X - 1` there should be `binom(n + deg X - 2, n)` solutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bethe::{solve_all_with_stats, OdeSpec, SolverConfig};
use crate::error::Result;
use crate::forms::{CanonicalForm, GHeun1Form, HeunForm};
use crate::poly::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecFamily {
    Heun,
    GHeun1,
}

impl SpecFamily {
    pub fn deg_x(self) -> usize {
        match self {
            SpecFamily::Heun => 3,
            SpecFamily::GHeun1 => 4,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "heun" => Some(SpecFamily::Heun),
            "gheun1" => Some(SpecFamily::GHeun1),
            _ => None,
        }
    }
}

/// `binom(n + deg X - 2, n)`
pub fn heine_stieltjes_count(deg_x: usize, n: usize) -> usize {
    let top = n + deg_x.saturating_sub(2);
    (1..=n).fold(1usize, |acc, k| acc * (top + 1 - k) / k)
}

/// Relative gap below which a four-pole draw counts as a near miss of the
/// dependence condition and is redrawn.
pub const NEAR_MISS: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionResidual {
    pub bae: f64,
    pub ode: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub family: SpecFamily,
    pub dependent: bool,
    pub spec: OdeSpec,
    pub n: usize,
    pub deg_x: usize,
    pub found: usize,
    pub expected: usize,
    /// restart budgets tried in order; the last one produced `found`
    pub restarts_used: Vec<usize>,
    pub dependence_gap: f64,
    pub residuals: Vec<SolutionResidual>,
}

impl CountReport {
    pub fn matches(&self) -> bool {
        self.found == self.expected
    }
}

fn unit(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::new(rng.random_range(-radius..radius), rng.random_range(-radius..radius))
}

/// Random pole form of the family. With `dependent`, the four-pole exponents
/// are shifted so that `Σ μ = -2(n-1)`, which is the sl(2) case with `n + 1`
/// solutions; otherwise near misses of that condition are redrawn.
pub fn draw_spec(family: SpecFamily, n: usize, dependent: bool, rng: &mut ChaCha8Rng) -> Result<OdeSpec> {
    loop {
        let form = match family {
            SpecFamily::Heun => {
                let d = [0, 1, 2].map(|_| unit(rng, 2.0));
                let alpha = [0, 1, 2].map(|_| unit(rng, 1.5) + 1.0);
                CanonicalForm::Heun(HeunForm { d, alpha })
            }
            SpecFamily::GHeun1 => {
                let e = [0, 1, 2, 3].map(|_| unit(rng, 2.0));
                let mut mu = [0, 1, 2, 3].map(|_| unit(rng, 1.5) + 1.0);
                if dependent {
                    let rest: C64 = mu[..3].iter().sum();
                    mu[3] = C64::new(-2.0 * (n as f64 - 1.0), 0.0) - rest;
                }
                CanonicalForm::GHeun1(GHeun1Form { e, mu })
            }
        };
        let Ok(spec) = form.to_spec(n) else { continue };
        let near_miss = spec.dependence_gap() <= NEAR_MISS * spec.coeff_scale().max(1.0);
        if family == SpecFamily::Heun || dependent || !near_miss {
            return Ok(spec);
        }
    }
}

/// Expected number of solutions for a spec of the family.
pub fn expected_count(family: SpecFamily, n: usize, dependent: bool) -> usize {
    if dependent {
        n + 1
    } else {
        heine_stieltjes_count(family.deg_x(), n)
    }
}

/// Counts the solutions of one spec, multiplying the restart budget by 4 up
/// to `escalations` times while fewer than `expected` are found.
pub fn count_spec(
    spec: &OdeSpec,
    expected: usize,
    escalations: usize,
    cfg: &SolverConfig,
) -> Result<(usize, Vec<usize>, Vec<SolutionResidual>)> {
    let mut budgets = Vec::new();
    let mut restarts = cfg.restarts;
    loop {
        budgets.push(restarts);
        let out = solve_all_with_stats(spec, &cfg.clone().with_restarts(restarts))?;
        let found = out.solutions.len();
        if found >= expected || budgets.len() > escalations {
            let res =
                out.solutions.iter().map(|s| SolutionResidual { bae: s.bae_residual, ode: s.ode_residual }).collect();
            return Ok((found, budgets, res));
        }
        restarts *= 4;
    }
}

/// One report per trial; specs are drawn from `cfg.seed`.
pub fn run_count(
    family: SpecFamily,
    n: usize,
    trials: usize,
    dependent: bool,
    cfg: &SolverConfig,
) -> Result<Vec<CountReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_c0de);
    let expected = expected_count(family, n, dependent);
    let mut reports = Vec::with_capacity(trials);
    for _ in 0..trials {
        let spec = draw_spec(family, n, dependent, &mut rng)?;
        let (found, restarts_used, residuals) = count_spec(&spec, expected, 2, cfg)?;
        reports.push(CountReport {
            family,
            dependent,
            dependence_gap: spec.dependence_gap(),
            deg_x: spec.deg_x(),
            spec,
            n,
            found,
            expected,
            restarts_used,
            residuals,
        });
    }
    Ok(reports)
}
