//! Two electrons on a D-sphere. With `z = u/(2R)` the inter-electron equation
//! is Heun with poles `0, -1, 1`, exponents `1/γ, (δ-1/γ)/2, (δ-1/γ)/2` and
//! `Z = -4R²E z + 2R`, so `R = c0/2` and `E = -c1/(4R²)`.

use serde::{Deserialize, Serialize};

use super::wave::{Envelope, VariableMap, Wavefunction};
use super::AppMeta;
use crate::bethe::{solve_all, BetheSolution, OdeSpec, SolverConfig};
use crate::error::{QesError, Result};
use crate::forms::{CanonicalForm, FormKind, HeunForm};
use crate::oracle::{build_sl2_matrix, sl2_spectrum};
use crate::poly::{is_real, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoElectronParams {
    pub delta: f64,
    pub gamma: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusBranch {
    /// keep `R > 0`, tag the rest discarded
    #[default]
    Positive,
    All,
}

impl TwoElectronParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.gamma.is_finite()) || self.gamma == 0.0 {
            return Err(QesError::InvalidParams(format!("need finite delta and nonzero gamma, got {self:?}")));
        }
        Ok(())
    }

    pub fn form(&self) -> HeunForm {
        let c = |v: f64| C64::new(v, 0.0);
        let side = 0.5 * (self.delta - 1.0 / self.gamma);
        HeunForm { d: [c(0.0), c(-1.0), c(1.0)], alpha: [c(1.0 / self.gamma), c(side), c(side)] }
    }

    pub fn spec(&self) -> Result<OdeSpec> {
        self.validate()?;
        CanonicalForm::Heun(self.form()).to_spec(self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoElectronState {
    pub solution: BetheSolution,
    pub radius: C64,
    pub energy: C64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavefunction: Option<Wavefunction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discarded: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoElectronResult {
    pub meta: AppMeta,
    pub params: TwoElectronParams,
    pub states: Vec<TwoElectronState>,
    pub discarded: Vec<TwoElectronState>,
}

pub fn state_from(sol: BetheSolution) -> TwoElectronState {
    let radius = sol.c0 * 0.5;
    // c0 vanishes up to rounding on the z1 = -z2 branch
    let zero = radius.norm() <= 1e-12 * (1.0 + sol.c1.norm());
    let energy = if zero { C64::new(f64::NAN, 0.0) } else { -sol.c1 / (radius * radius * 4.0) };
    let discarded = if zero {
        Some("R = 0".to_string())
    } else if !(is_real(radius) && radius.re > 0.0) {
        Some(format!("R = {:.6e}{:+.1e}i is not positive", radius.re, radius.im))
    } else if !is_real(energy) {
        Some(format!("E = {:.6e}{:+.1e}i is not real", energy.re, energy.im))
    } else {
        None
    };
    let wavefunction = discarded.is_none().then(|| Wavefunction {
        variable: "u",
        map: VariableMap::Scaled { scale: 0.5 / radius.re },
        power: 0.0,
        exponent: Vec::new(),
        envelope: Envelope::None,
        poly: sol.s(),
    });
    TwoElectronState { solution: sol, radius, energy, wavefunction, discarded }
}

pub fn solve(p: &TwoElectronParams, branch: RadiusBranch, cfg: &SolverConfig) -> Result<TwoElectronResult> {
    let spec = p.spec()?;
    let mut states = Vec::new();
    let mut discarded = Vec::new();
    for sol in solve_all(&spec, cfg)? {
        let st = state_from(sol);
        if st.discarded.is_some() && branch == RadiusBranch::Positive {
            discarded.push(st);
        } else {
            states.push(st);
        }
    }
    let meta = AppMeta::new("two-electron", "atomic units; z = u/(2R)", FormKind::Heun).branch(
        "radius",
        match branch {
            RadiusBranch::Positive => "R > 0",
            RadiusBranch::All => "all",
        },
    );
    Ok(TwoElectronResult { meta, params: *p, states, discarded })
}

/// `R = -eigenvalue/2` over the spectrum of the sl(2) operator `H`.
pub fn sl2_radii(p: &TwoElectronParams) -> Result<Vec<C64>> {
    let m = build_sl2_matrix(&p.spec()?)?;
    Ok(sl2_spectrum(&m)?.into_iter().map(|ev| -ev * 0.5).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedForm {
    pub roots: Vec<f64>,
    pub radius: f64,
    pub energy: f64,
}

/// The printed `n = 1, 2` solutions on the `R > 0` branch.
pub fn closed_form(p: &TwoElectronParams) -> Option<ClosedForm> {
    let (d, g) = (p.delta, p.gamma);
    match p.n {
        1 => {
            let z1 = -1.0 / (d * g).sqrt();
            Some(ClosedForm { roots: vec![z1], radius: 0.5 * (d / g).sqrt(), energy: g })
        }
        2 => {
            let big = (2.0 * (d + 2.0) + (4.0 * d + 6.0) / g).sqrt();
            let small = (2.0 * (d + 2.0) - 2.0 / g).sqrt();
            let den = 2.0 * (d + 2.0);
            let mut roots = vec![(-big - small) / den, (-big + small) / den];
            roots.sort_by(f64::total_cmp);
            Some(ClosedForm { roots, radius: 0.5 * big, energy: g * (d + 1.0) / (g * (d + 2.0) + 2.0 * d + 3.0) })
        }
        _ => None,
    }
}
