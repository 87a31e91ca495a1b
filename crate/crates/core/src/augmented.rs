//! Bethe systems in which some ODE coefficients are unknown parameters, fixed
//! jointly with the roots by extra identification constraints. Solved by
//! multistart Gauss-Newton on the stacked residual `[F(roots); constraints]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bethe::{
    bae_jacobian, bae_residual_cleared, bae_residual_norm, bae_residual_scales, guards_ok, matched_distance, solve_all,
    BetheSolution, OdeSpec, SolverConfig, StartGeometry,
};
use crate::error::{QesError, Result};
use crate::exec::map_indexed;
use crate::linalg::{canonical_key, least_squares, CMatrix, CVector};
use crate::poly::{is_real, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamDomain {
    Any,
    Real,
    NonNegative,
    Positive,
}

impl ParamDomain {
    pub fn admits(self, v: C64) -> bool {
        match self {
            ParamDomain::Any => true,
            ParamDomain::Real => is_real(v),
            ParamDomain::NonNegative => is_real(v) && v.re >= -1e-12,
            ParamDomain::Positive => is_real(v) && v.re > 0.0,
        }
    }
}

/// An unknown parameter with its start box. Starts are uniform in
/// `[lo, hi]`, plus an imaginary part uniform in `im` when given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<(f64, f64)>,
    pub domain: ParamDomain,
}

impl ParamDef {
    pub fn new(name: &str, lo: f64, hi: f64, domain: ParamDomain) -> Self {
        ParamDef { name: name.to_string(), lo, hi, im: None, domain }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> C64 {
        let re = self.lo + (self.hi - self.lo) * rng.random::<f64>();
        let im = self.im.map_or(0.0, |(a, b)| a + (b - a) * rng.random::<f64>());
        C64::new(re, im)
    }
}

/// One identification constraint value with the size of the terms it
/// balances; acceptance uses `|value| / max(1, scale)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub value: C64,
    pub scale: f64,
}

impl Constraint {
    pub fn new(value: C64, scale: f64) -> Self {
        Constraint { value, scale }
    }

    pub fn relative(&self) -> f64 {
        self.value.norm() / self.scale.max(1.0)
    }
}

pub trait AugmentedSystem: Sync {
    fn params(&self) -> &[ParamDef];
    fn n(&self) -> usize;
    /// The realized ODE for a parameter vector.
    fn spec(&self, params: &[C64]) -> Result<OdeSpec>;
    /// Identification equations, zero at a solution.
    fn constraints(&self, params: &[C64], roots: &[C64]) -> Vec<Constraint>;
    /// Extra `(params, roots)` starts tried before the random ones.
    fn seeded_starts(&self) -> Vec<(Vec<C64>, Vec<C64>)> {
        Vec::new()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentedSolution {
    pub params: Vec<NamedValue>,
    pub spec: OdeSpec,
    pub solution: BetheSolution,
    pub constraint_residual: f64,
    /// `|J^H r|` of the unscaled stacked residual at the accepted point.
    pub gradient_norm: f64,
}

impl AugmentedSolution {
    pub fn param(&self, name: &str) -> Option<C64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn param_values(&self) -> Vec<C64> {
        self.params.iter().map(|p| p.value).collect()
    }

    pub fn roots(&self) -> &[C64] {
        self.solution.roots.as_slice()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discarded {
    pub solution: AugmentedSolution,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AugmentedStats {
    pub starts: usize,
    pub converged: usize,
    pub rejected_certification: usize,
    pub duplicates: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentedOutcome {
    pub solutions: Vec<AugmentedSolution>,
    pub discarded: Vec<Discarded>,
    pub stats: AugmentedStats,
}

/// Unknowns: all roots plus the parameters listed in `free`; the rest of the
/// parameter vector is held at `base`.
struct Problem<'a, S: AugmentedSystem + ?Sized> {
    sys: &'a S,
    base: Vec<C64>,
    free: Vec<usize>,
    n: usize,
    /// free parameters whose domain is real are stepped along the real axis only
    real: Vec<bool>,
}

struct Eval {
    spec: OdeSpec,
    stacked: Vec<C64>,
    /// row sizes: BAE term bounds, then constraint scales
    scales: Vec<f64>,
    /// max of the normalized BAE residual and the relative constraint residuals
    measure: f64,
    constraint_residual: f64,
}

impl<S: AugmentedSystem + ?Sized> Problem<'_, S> {
    fn unpack(&self, u: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let mut p = self.base.clone();
        for (k, &idx) in self.free.iter().enumerate() {
            p[idx] = u[self.n + k];
        }
        (p, u[..self.n].to_vec())
    }

    fn eval(&self, u: &[C64]) -> Option<Eval> {
        let (p, z) = self.unpack(u);
        let spec = self.sys.spec(&p).ok()?;
        let cons = self.sys.constraints(&p, &z);
        let mut stacked = bae_residual_cleared(&spec, &z);
        stacked.extend(cons.iter().map(|c| c.value));
        if !stacked.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return None;
        }
        let mut scales = bae_residual_scales(&spec, &z);
        scales.extend(cons.iter().map(|c| c.scale.max(1.0)));
        let constraint_residual = cons.iter().map(Constraint::relative).fold(0.0, f64::max);
        let measure = bae_residual_norm(&spec, &z).max(constraint_residual);
        Some(Eval { spec, stacked, scales, measure, constraint_residual })
    }

    fn guards(&self, spec: &OdeSpec, u: &[C64], cfg: &SolverConfig) -> bool {
        let x = spec.x();
        guards_ok(&x, x.max_abs_coeff().max(f64::MIN_POSITIVE), &u[..self.n], cfg)
    }

    /// Analytic block for `∂F/∂roots`, central differences elsewhere.
    fn jacobian(&self, u: &[C64], ev: &Eval) -> Option<CMatrix> {
        let rows = ev.stacked.len();
        let cols = u.len();
        let mut jac = CMatrix::zeros(rows, cols);
        let z = &u[..self.n];
        let analytic = bae_jacobian(&ev.spec, z);
        for i in 0..self.n {
            for j in 0..self.n {
                jac[(i, j)] = analytic[(i, j)];
            }
        }
        for col in 0..cols {
            let h = 1e-6 * (1.0 + u[col].norm());
            let mut up = u.to_vec();
            let mut um = u.to_vec();
            up[col] += h;
            um[col] -= h;
            let fp = self.eval(&up)?.stacked;
            let fm = self.eval(&um)?.stacked;
            let first_row = if col < self.n { self.n } else { 0 };
            for r in first_row..rows {
                jac[(r, col)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        Some(jac)
    }

    /// Damped Gauss-Newton with rows weighted by their term scales. Returns the final point if
    /// its residual measure reaches `cert_tol`.
    fn gauss_newton(&self, mut u: Vec<C64>, cfg: &SolverConfig) -> Option<Vec<C64>> {
        let mut ev = self.eval(&u)?;
        if !self.guards(&ev.spec, &u, cfg) {
            return None;
        }
        for _ in 0..cfg.max_iters {
            if ev.measure <= cfg.newton_tol {
                return Some(u);
            }
            let jac = self.jacobian(&u, &ev)?;
            // weights frozen for this step so the line search compares like with like
            let weights: Vec<f64> = ev.scales.iter().map(|&m| if m > 0.0 { 1.0 / m } else { 1.0 }).collect();
            let mut wj = jac.clone();
            for (r, &w) in weights.iter().enumerate() {
                wj.row_mut(r).scale_mut(w);
            }
            let weighted = |s: &[C64]| s.iter().zip(&weights).map(|(v, w)| (v * *w).norm_sqr()).sum::<f64>();
            let rhs = CVector::from_iterator(ev.stacked.len(), ev.stacked.iter().zip(&weights).map(|(v, w)| -v * *w));
            let step = self.step(&wj, &rhs)?;
            let base = weighted(&ev.stacked);
            let mut t = 1.0;
            let mut next = None;
            for _ in 0..50 {
                let cand: Vec<C64> = u.iter().zip(step.iter()).map(|(a, s)| a + s * t).collect();
                if let Some(ec) = self.eval(&cand) {
                    if self.guards(&ec.spec, &cand, cfg) && weighted(&ec.stacked) < (1.0 - 1e-4 * t) * base {
                        next = Some((cand, ec));
                        break;
                    }
                }
                t *= cfg.damping;
            }
            match next {
                Some((cand, ec)) => {
                    let moved: f64 = u.iter().zip(&cand).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                    let size: f64 = cand.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    u = cand;
                    ev = ec;
                    if moved <= 1e-15 * (1.0 + size) {
                        break;
                    }
                }
                None => break,
            }
        }
        (ev.measure <= cfg.cert_tol).then_some(u)
    }

    /// Least-squares step; real-constrained columns are solved in the
    /// realified system `[Re; Im]` with one real unknown each.
    fn step(&self, wj: &CMatrix, rhs: &CVector) -> Option<Vec<C64>> {
        if !self.real.iter().any(|&r| r) {
            return least_squares(wj, rhs).map(|v| v.iter().copied().collect());
        }
        let rows = wj.nrows();
        let mut cols: Vec<(usize, bool)> = Vec::new();
        for c in 0..wj.ncols() {
            cols.push((c, false));
            if c < self.n || !self.real[c - self.n] {
                cols.push((c, true));
            }
        }
        let mut m = CMatrix::zeros(2 * rows, cols.len());
        for (k, &(c, imag)) in cols.iter().enumerate() {
            for r in 0..rows {
                let j = wj[(r, c)];
                let (top, bottom) = if imag { (-j.im, j.re) } else { (j.re, j.im) };
                m[(r, k)] = C64::new(top, 0.0);
                m[(rows + r, k)] = C64::new(bottom, 0.0);
            }
        }
        let b = CVector::from_iterator(
            2 * rows,
            rhs.iter().map(|v| C64::new(v.re, 0.0)).chain(rhs.iter().map(|v| C64::new(v.im, 0.0))),
        );
        let x = least_squares(&m, &b)?;
        let mut out = vec![C64::new(0.0, 0.0); wj.ncols()];
        for (k, &(c, imag)) in cols.iter().enumerate() {
            if imag {
                out[c].im += x[k].re;
            } else {
                out[c].re += x[k].re;
            }
        }
        Some(out)
    }

    fn gradient_norm(&self, u: &[C64]) -> f64 {
        let Some(ev) = self.eval(u) else { return f64::INFINITY };
        let Some(jac) = self.jacobian(u, &ev) else { return f64::INFINITY };
        let r = CVector::from_vec(ev.stacked.clone());
        (jac.adjoint() * r).norm()
    }
}

fn validate(sys: &(impl AugmentedSystem + ?Sized)) -> Result<()> {
    let unknowns = sys.n() + sys.params().len();
    let probe: Vec<C64> = sys.params().iter().map(|p| C64::new(0.5 * (p.lo + p.hi), 0.0)).collect();
    let equations = sys.n() + sys.constraints(&probe, &vec![C64::new(0.0, 0.0); sys.n()]).len();
    if equations < unknowns {
        return Err(QesError::InvalidSystem(format!(
            "{equations} equations for {unknowns} unknowns; the system must not be under-determined"
        )));
    }
    Ok(())
}

/// Multistart Gauss-Newton over roots and parameters. Solutions whose
/// parameters fall outside their declared domain are moved to `discarded`.
pub fn solve_augmented(sys: &(impl AugmentedSystem + ?Sized), cfg: &SolverConfig) -> Result<AugmentedOutcome> {
    cfg.validate()?;
    let n = sys.n();
    let defs = sys.params();
    let num_constraints = {
        let probe: Vec<C64> = defs.iter().map(|p| C64::new(0.5 * (p.lo + p.hi), 0.0)).collect();
        sys.constraints(&probe, &vec![C64::new(0.0, 0.0); n]).len()
    };
    if defs.is_empty() && num_constraints == 0 {
        let spec = sys.spec(&[])?;
        let sols = solve_all(&spec, cfg)?;
        let solutions = sols
            .into_iter()
            .map(|s| AugmentedSolution {
                params: Vec::new(),
                spec: spec.clone(),
                solution: s,
                constraint_residual: 0.0,
                gradient_norm: 0.0,
            })
            .collect();
        let stats = AugmentedStats { starts: cfg.restarts, ..AugmentedStats::default() };
        return Ok(AugmentedOutcome { solutions, discarded: Vec::new(), stats });
    }
    validate(sys)?;

    let real = defs.iter().map(|d| d.domain != ParamDomain::Any).collect();
    let problem = Problem { sys, base: vec![C64::new(0.0, 0.0); defs.len()], free: (0..defs.len()).collect(), n, real };
    let seeded = sys.seeded_starts();
    let total = seeded.len() + cfg.restarts;
    let runs = map_indexed(cfg.execution, total, |k| {
        let start = if k < seeded.len() {
            let (p, z) = &seeded[k];
            let mut u = z.clone();
            u.extend_from_slice(p);
            u
        } else {
            random_start(sys, cfg.seed, k - seeded.len())?
        };
        problem.gauss_newton(start, cfg)
    });

    let mut stats = AugmentedStats { starts: total, ..AugmentedStats::default() };
    let mut kept: Vec<AugmentedSolution> = Vec::new();
    for u in runs.into_iter().flatten() {
        stats.converged += 1;
        let (p, z) = problem.unpack(&u);
        let Some(ev) = problem.eval(&u) else { continue };
        let solution = BetheSolution::evaluate(&ev.spec, z, cfg);
        if !solution.certified || ev.constraint_residual > cfg.cert_tol {
            stats.rejected_certification += 1;
            continue;
        }
        let cand = AugmentedSolution {
            params: defs.iter().zip(&p).map(|(d, &v)| NamedValue { name: d.name.clone(), value: v }).collect(),
            spec: ev.spec,
            solution,
            constraint_residual: ev.constraint_residual,
            gradient_norm: problem.gradient_norm(&u),
        };
        if kept.iter().any(|k| same_point(k, &cand, cfg)) {
            stats.duplicates += 1;
        } else {
            kept.push(cand);
        }
    }
    sort_augmented(&mut kept);
    let mut solutions = Vec::new();
    let mut discarded = Vec::new();
    for s in kept {
        let bad: Vec<String> = defs
            .iter()
            .zip(&s.params)
            .filter(|(d, p)| !d.domain.admits(p.value))
            .map(|(d, p)| format!("{} = {} violates {:?}", d.name, p.value, d.domain))
            .collect();
        if bad.is_empty() {
            solutions.push(s);
        } else {
            discarded.push(Discarded { solution: s, reason: bad.join("; ") });
        }
    }
    Ok(AugmentedOutcome { solutions, discarded, stats })
}

fn random_start(sys: &(impl AugmentedSystem + ?Sized), seed: u64, k: usize) -> Option<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let p: Vec<C64> = sys.params().iter().map(|d| d.draw(&mut rng)).collect();
    let spec = sys.spec(&p).ok()?;
    let mut u =
        if sys.n() > 0 { StartGeometry::new(&spec).ok()?.draw(&mut rng, sys.n(), k % 2 == 1) } else { Vec::new() };
    u.extend(p);
    Some(u)
}

fn same_point(a: &AugmentedSolution, b: &AugmentedSolution, cfg: &SolverConfig) -> bool {
    a.params.iter().zip(&b.params).all(|(x, y)| (x.value - y.value).norm() <= 1e-7 * (1.0 + x.value.norm()))
        && matched_distance(a.roots(), b.roots()) < 10.0 * cfg.sep_tol
}

fn sort_augmented(sols: &mut [AugmentedSolution]) {
    sols.sort_by_key(|s| {
        let mut key: Vec<(i64, i64)> = s.params.iter().map(|p| canonical_key(p.value)).collect();
        key.extend(s.roots().iter().map(|&z| canonical_key(z)));
        key
    });
}

/// Parameters that can be moved by `±1e-6` while the remaining unknowns are
/// re-converged to a residual within `cert_tol`.
pub fn free_parameter_detect(
    sys: &(impl AugmentedSystem + ?Sized),
    sol: &AugmentedSolution,
    cfg: &SolverConfig,
) -> Vec<String> {
    let defs = sys.params();
    let values = sol.param_values();
    let mut free = Vec::new();
    for idx in 0..defs.len() {
        let others: Vec<usize> = (0..defs.len()).filter(|&k| k != idx).collect();
        let moved = [1e-6, -1e-6].iter().all(|&delta| {
            let mut base = values.clone();
            base[idx] += delta;
            let real = others.iter().map(|&k| defs[k].domain != ParamDomain::Any).collect();
            let problem = Problem { sys, base, free: others.clone(), n: sys.n(), real };
            let mut u = sol.roots().to_vec();
            u.extend(others.iter().map(|&k| values[k]));
            problem.gauss_newton(u, cfg).is_some()
        });
        if moved {
            free.push(defs[idx].name.clone());
        }
    }
    free
}

/// A solution with the parameters found to be free at it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeAnnotated {
    pub solution: AugmentedSolution,
    pub free: Vec<String>,
}

/// Runs [`free_parameter_detect`] on each solution and merges solutions that
/// differ only in free parameters, keeping the first in canonical order.
pub fn collapse_free(
    sys: &(impl AugmentedSystem + ?Sized),
    sols: Vec<AugmentedSolution>,
    cfg: &SolverConfig,
) -> Vec<FreeAnnotated> {
    let mut out: Vec<FreeAnnotated> = Vec::new();
    for s in sols {
        let free = free_parameter_detect(sys, &s, cfg);
        let merged =
            out.iter().any(|k| {
                k.free == free
                    && matched_distance(k.solution.roots(), s.roots()) < 10.0 * cfg.sep_tol
                    && k.solution.params.iter().zip(&s.params).all(|(a, b)| {
                        free.contains(&a.name) || (a.value - b.value).norm() <= 1e-7 * (1.0 + a.value.norm())
                    })
            });
        if !merged {
            out.push(FreeAnnotated { solution: s, free });
        }
    }
    out
}
