//! The five physical systems: each builds its ODE, runs the generic solver and
//! maps the `c` coefficients back to physical quantities, with closed forms
//! kept alongside for regression.

pub mod decatic;
pub mod dirac;
pub mod phi6;
pub mod rn;
pub mod two_electron;
pub mod wave;

use serde::Serialize;

use crate::forms::FormKind;

pub const FINE_STRUCTURE: f64 = 1.0 / 137.0;

/// Output metadata shared by every application.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AppMeta {
    pub system: &'static str,
    pub units: &'static str,
    pub form: &'static str,
    pub branches: Vec<(String, String)>,
}

impl AppMeta {
    pub(crate) fn new(system: &'static str, units: &'static str, form: FormKind) -> Self {
        AppMeta { system, units, form: form.name(), branches: Vec::new() }
    }

    pub(crate) fn branch(mut self, name: &str, choice: impl Into<String>) -> Self {
        self.branches.push((name.to_string(), choice.into()));
        self
    }
}

/// `|a - b| / |b|`, or the absolute error when `b = 0`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if b == 0.0 {
        d
    } else {
        d / b.abs()
    }
}

/// Which transcription of a printed formula to evaluate. `Printed` follows
/// the source text literally; `Corrected` is the form consistent with the
/// general coefficient formulas.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transcription {
    Printed,
    #[default]
    Corrected,
}

/// A scalar that is either given or solved for, with its start box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    Fixed { value: f64 },
    Unknown { lo: f64, hi: f64 },
}

impl Quantity {
    pub fn fixed(value: f64) -> Self {
        Quantity::Fixed { value }
    }

    pub fn unknown(lo: f64, hi: f64) -> Self {
        Quantity::Unknown { lo, hi }
    }
}

/// Splits named quantities into solver parameters and a closure-friendly
/// layout: `slots[i]` is `Ok(value)` for fixed entries, `Err(index)` into the
/// parameter vector otherwise.
pub(crate) fn layout(
    named: &[(&str, Quantity, crate::augmented::ParamDomain)],
) -> (Vec<crate::augmented::ParamDef>, Vec<std::result::Result<f64, usize>>) {
    let mut defs = Vec::new();
    let mut slots = Vec::new();
    for &(name, q, domain) in named {
        match q {
            Quantity::Fixed { value } => slots.push(Ok(value)),
            Quantity::Unknown { lo, hi } => {
                slots.push(Err(defs.len()));
                defs.push(crate::augmented::ParamDef::new(name, lo, hi, domain));
            }
        }
    }
    (defs, slots)
}

pub(crate) fn resolve(slots: &[std::result::Result<f64, usize>], p: &[crate::poly::C64]) -> Vec<crate::poly::C64> {
    slots
        .iter()
        .map(|s| match *s {
            Ok(v) => crate::poly::C64::new(v, 0.0),
            Err(i) => p[i],
        })
        .collect()
}
