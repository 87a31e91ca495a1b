//! Polynomial solutions of `X S'' + Y S' + Z S = 0` with `deg X <= 4`,
//! `deg Y <= 3`, `deg Z <= 2`, via the Bethe ansatz equations for the roots
//! of `S`.

mod certify;
mod coeffs;
mod residual;
mod solver;

use serde::{Deserialize, Serialize};

use crate::error::{QesError, Result};
use crate::exec::Execution;
use crate::linalg::{self, sort_canonical};
use crate::poly::{is_finite, ComplexPoly, C64};

pub use certify::{certify_ode, certify_roots, ode_remainder};
pub use coeffs::{coeff_c0, coeff_c1, coeff_c2, corollary_text_c0, pair_sum, symmetric_identity_suite, theorem_coeffs};
pub use residual::{bae_jacobian, bae_residual_cleared, bae_residual_norm, bae_residual_scales};
pub(crate) use solver::{guards_ok, StartGeometry};
pub use solver::{newton_polish, solve_all, solve_all_with_stats, sort_solutions, SolveOutcome, SolveStats};

/// The nine fixed coefficients of `X = Σ a_k z^k` and `Y = Σ b_k z^k`, plus
/// the target degree `n` of `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct OdeSpec {
    a: [C64; 5],
    b: [C64; 4],
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    a: [C64; 5],
    b: [C64; 4],
    n: usize,
}

impl TryFrom<RawSpec> for OdeSpec {
    type Error = QesError;
    fn try_from(raw: RawSpec) -> Result<Self> {
        OdeSpec::new(raw.a, raw.b, raw.n)
    }
}

impl From<OdeSpec> for RawSpec {
    fn from(s: OdeSpec) -> Self {
        RawSpec { a: s.a, b: s.b, n: s.n }
    }
}

impl OdeSpec {
    pub fn new(a: [C64; 5], b: [C64; 4], n: usize) -> Result<Self> {
        if !a.iter().chain(b.iter()).all(|&c| is_finite(c)) {
            return Err(QesError::InvalidSpec("non-finite coefficient".into()));
        }
        if a.iter().all(|c| c.norm() == 0.0) {
            return Err(QesError::InvalidSpec("X is identically zero".into()));
        }
        Ok(OdeSpec { a, b, n })
    }

    pub fn from_real(a: [f64; 5], b: [f64; 4], n: usize) -> Result<Self> {
        Self::new(a.map(|v| C64::new(v, 0.0)), b.map(|v| C64::new(v, 0.0)), n)
    }

    /// Builds a spec from polynomials; fails if `deg X > 4` or `deg Y > 3`.
    pub fn from_polys(x: &ComplexPoly, y: &ComplexPoly, n: usize) -> Result<Self> {
        if x.degree().map_or(false, |d| d > 4) || y.degree().map_or(false, |d| d > 3) {
            return Err(QesError::InvalidSpec(format!(
                "degrees too large: deg X = {:?}, deg Y = {:?}",
                x.degree(),
                y.degree()
            )));
        }
        let mut a = [C64::new(0.0, 0.0); 5];
        let mut b = [C64::new(0.0, 0.0); 4];
        for (k, slot) in a.iter_mut().enumerate() {
            *slot = x.coeff(k);
        }
        for (k, slot) in b.iter_mut().enumerate() {
            *slot = y.coeff(k);
        }
        Self::new(a, b, n)
    }

    pub fn a(&self) -> &[C64; 5] {
        &self.a
    }

    pub fn b(&self) -> &[C64; 4] {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn with_n(&self, n: usize) -> Self {
        OdeSpec { n, ..self.clone() }
    }

    pub fn x(&self) -> ComplexPoly {
        ComplexPoly::new(self.a.to_vec())
    }

    pub fn y(&self) -> ComplexPoly {
        ComplexPoly::new(self.b.to_vec())
    }

    pub fn deg_x(&self) -> usize {
        self.x().degree().unwrap_or(0)
    }

    /// Largest coefficient magnitude among `a` and `b`.
    pub fn coeff_scale(&self) -> f64 {
        self.a.iter().chain(self.b.iter()).map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `|b3 + 2(n-1) a4|`; zero exactly in the sl(2)-algebraizable case.
    pub fn dependence_gap(&self) -> f64 {
        let n1 = self.n as f64 - 1.0;
        (self.b[3] + self.a[4] * (2.0 * n1)).norm()
    }

    pub fn is_dependent(&self, rel_tol: f64) -> bool {
        self.dependence_gap() <= rel_tol * self.coeff_scale().max(1.0)
    }

    pub fn x_roots(&self) -> Result<Vec<C64>> {
        let mut r = linalg::poly_roots(&self.x())?;
        sort_canonical(&mut r);
        Ok(r)
    }

    /// True when two roots of `X` are closer than `1e-8 (1 + max |root|)`.
    pub fn x_has_multiple_roots(&self) -> bool {
        match self.x_roots() {
            Ok(r) => {
                let big = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
                linalg::min_separation(&r) < 1e-8 * (1.0 + big)
            }
            Err(_) => true,
        }
    }
}

/// Tolerances and budgets for the multistart solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub newton_tol: f64,
    pub cert_tol: f64,
    pub sep_tol: f64,
    pub pole_tol: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub damping: f64,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-12,
            cert_tol: 1e-9,
            sep_tol: 1e-8,
            pole_tol: 1e-10,
            max_iters: 200,
            restarts: 500,
            seed: 0,
            damping: 0.5,
            execution: Execution::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let tols = [
            ("newton_tol", self.newton_tol),
            ("cert_tol", self.cert_tol),
            ("sep_tol", self.sep_tol),
            ("pole_tol", self.pole_tol),
        ];
        for (name, v) in tols {
            if !(v.is_finite() && v > 0.0) {
                return Err(QesError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.restarts == 0 {
            return Err(QesError::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(QesError::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(QesError::InvalidConfig(format!("damping must lie in (0,1), got {}", self.damping)));
        }
        Ok(())
    }
}

/// Roots of `S` in canonical (Re, Im) order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RootConfig(Vec<C64>);

impl RootConfig {
    pub fn new(mut roots: Vec<C64>) -> Self {
        sort_canonical(&mut roots);
        RootConfig(roots)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_separation(&self) -> f64 {
        linalg::min_separation(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheSolution {
    pub roots: RootConfig,
    pub c2: C64,
    pub c1: C64,
    pub c0: C64,
    pub bae_residual: f64,
    pub ode_residual: f64,
    pub certified: bool,
}

impl BetheSolution {
    /// Evaluates coefficients and both residuals for `roots` under `spec`.
    pub fn evaluate(spec: &OdeSpec, roots: Vec<C64>, cfg: &SolverConfig) -> Self {
        let roots = RootConfig::new(roots);
        let [c2, c1, c0] = theorem_coeffs(spec, roots.as_slice());
        let bae_residual = bae_residual_norm(spec, roots.as_slice());
        let ode_residual = certify_ode(spec, roots.as_slice(), [c2, c1, c0]);
        let certified = ode_residual <= cfg.cert_tol
            && bae_residual <= cfg.cert_tol
            && (roots.len() < 2 || roots.min_separation() >= cfg.sep_tol);
        BetheSolution { roots, c2, c1, c0, bae_residual, ode_residual, certified }
    }

    pub fn coeffs(&self) -> [C64; 3] {
        [self.c2, self.c1, self.c0]
    }

    pub fn s(&self) -> ComplexPoly {
        ComplexPoly::from_roots(self.roots.as_slice())
    }

    pub fn z(&self) -> ComplexPoly {
        ComplexPoly::new(vec![self.c0, self.c1, self.c2])
    }
}

/// Greedy nearest-neighbour matching distance between two root multisets of
/// equal size: the largest distance among matched pairs.
pub fn matched_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &za in a {
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        for (j, &zb) in b.iter().enumerate() {
            if !used[j] {
                let d = (za - zb).norm();
                if d < best {
                    best = d;
                    best_j = j;
                }
            }
        }
        if best_j == usize::MAX {
            return f64::INFINITY;
        }
        used[best_j] = true;
        worst = worst.max(best);
    }
    worst
}
