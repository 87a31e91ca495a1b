//! The five pole-form shapes of the ODE for `deg X = 3, 4, 3, 2, 1`, their
//! expansion to raw coefficients, recovery from raw coefficients, and the
//! per-form coefficient formulas.

use serde::{Deserialize, Serialize};

use crate::bethe::{pair_sum, OdeSpec};
use crate::error::{QesError, Result};
use crate::linalg::{self, sort_canonical};
use crate::poly::{ComplexPoly, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Minimum pole separation, relative to `1 + max |pole|`.
pub const POLE_SEPARATION: f64 = 1e-8;

/// `S'' + Σ α_s/(z-d_s) S' + Z/Π(z-d_s) S = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeunForm {
    pub d: [C64; 3],
    pub alpha: [C64; 3],
}

/// `S'' + Σ μ_s/(z-e_s) S' + Z/Π(z-e_s) S = 0`, four poles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GHeun1Form {
    pub e: [C64; 4],
    pub mu: [C64; 4],
}

/// Three poles plus a constant drift `ν`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GHeun2Form {
    pub f: [C64; 3],
    pub nu_s: [C64; 3],
    pub nu: C64,
}

/// Two poles plus a linear drift `σ z + κ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GHeun3Form {
    pub g1: C64,
    pub g2: C64,
    pub sigma1: C64,
    pub sigma2: C64,
    pub sigma: C64,
    pub kappa: C64,
}

/// One pole plus a quadratic drift `λ z² + γ z + δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GHeun4Form {
    pub h: C64,
    pub eta: C64,
    pub lambda: C64,
    pub gamma: C64,
    pub delta: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form")]
pub enum CanonicalForm {
    #[serde(rename = "heun")]
    Heun(HeunForm),
    #[serde(rename = "gheun1")]
    GHeun1(GHeun1Form),
    #[serde(rename = "gheun2")]
    GHeun2(GHeun2Form),
    #[serde(rename = "gheun3")]
    GHeun3(GHeun3Form),
    #[serde(rename = "gheun4")]
    GHeun4(GHeun4Form),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Heun,
    GHeun1,
    GHeun2,
    GHeun3,
    GHeun4,
}

impl FormKind {
    pub const ALL: [FormKind; 5] =
        [FormKind::Heun, FormKind::GHeun1, FormKind::GHeun2, FormKind::GHeun3, FormKind::GHeun4];

    pub fn name(self) -> &'static str {
        match self {
            FormKind::Heun => "heun",
            FormKind::GHeun1 => "gheun1",
            FormKind::GHeun2 => "gheun2",
            FormKind::GHeun3 => "gheun3",
            FormKind::GHeun4 => "gheun4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn deg_x(self) -> usize {
        match self {
            FormKind::Heun | FormKind::GHeun2 => 3,
            FormKind::GHeun1 => 4,
            FormKind::GHeun3 => 2,
            FormKind::GHeun4 => 1,
        }
    }
}

/// Which text of the per-form `c` formulas to evaluate. Two of the printed
/// `c0` formulas (four poles, and three poles with drift) carry sign slips;
/// `Corrected` is the version that follows from the general coefficient
/// formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AppendixVariant {
    Printed,
    Corrected,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixCoeffs {
    /// Not given for the Heun form, where it vanishes identically.
    pub c2: Option<C64>,
    pub c1: C64,
    pub c0: C64,
}

impl AppendixCoeffs {
    pub fn as_array(&self) -> [C64; 3] {
        [self.c2.unwrap_or(ZERO), self.c1, self.c0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuchsianCheck {
    pub alpha: C64,
    pub beta: C64,
    pub residual: f64,
}

fn check_poles(poles: &[C64]) -> Result<()> {
    let big = poles.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let sep = linalg::min_separation(poles);
    if sep < POLE_SEPARATION * (1.0 + big) {
        return Err(QesError::CoincidentPoles { separation: sep });
    }
    Ok(())
}

/// `Σ_s w_s Π_{t≠s} (z - p_t)`.
fn residue_sum(poles: &[C64], weights: &[C64]) -> ComplexPoly {
    let mut acc = ComplexPoly::zero();
    for (s, &w) in weights.iter().enumerate() {
        let others: Vec<C64> = poles.iter().enumerate().filter(|&(t, _)| t != s).map(|(_, &p)| p).collect();
        acc = &acc + &ComplexPoly::from_roots(&others).scale(w);
    }
    acc
}

impl CanonicalForm {
    pub fn kind(&self) -> FormKind {
        match self {
            CanonicalForm::Heun(_) => FormKind::Heun,
            CanonicalForm::GHeun1(_) => FormKind::GHeun1,
            CanonicalForm::GHeun2(_) => FormKind::GHeun2,
            CanonicalForm::GHeun3(_) => FormKind::GHeun3,
            CanonicalForm::GHeun4(_) => FormKind::GHeun4,
        }
    }

    pub fn poles(&self) -> Vec<C64> {
        match self {
            CanonicalForm::Heun(f) => f.d.to_vec(),
            CanonicalForm::GHeun1(f) => f.e.to_vec(),
            CanonicalForm::GHeun2(f) => f.f.to_vec(),
            CanonicalForm::GHeun3(f) => vec![f.g1, f.g2],
            CanonicalForm::GHeun4(f) => vec![f.h],
        }
    }

    /// Residues of `Y/X` at the poles, in pole order.
    pub fn residues(&self) -> Vec<C64> {
        match self {
            CanonicalForm::Heun(f) => f.alpha.to_vec(),
            CanonicalForm::GHeun1(f) => f.mu.to_vec(),
            CanonicalForm::GHeun2(f) => f.nu_s.to_vec(),
            CanonicalForm::GHeun3(f) => vec![f.sigma1, f.sigma2],
            CanonicalForm::GHeun4(f) => vec![f.eta],
        }
    }

    /// Polynomial part of `Y/X`.
    pub fn drift(&self) -> ComplexPoly {
        match self {
            CanonicalForm::Heun(_) | CanonicalForm::GHeun1(_) => ComplexPoly::zero(),
            CanonicalForm::GHeun2(f) => ComplexPoly::constant(f.nu),
            CanonicalForm::GHeun3(f) => ComplexPoly::new(vec![f.kappa, f.sigma]),
            CanonicalForm::GHeun4(f) => ComplexPoly::new(vec![f.delta, f.gamma, f.lambda]),
        }
    }

    /// Monic `X = Π (z - pole)` and `Y = X (Σ res/(z - pole) + drift)`.
    pub fn to_spec(&self, n: usize) -> Result<OdeSpec> {
        let poles = self.poles();
        check_poles(&poles)?;
        let x = ComplexPoly::from_roots(&poles);
        let y = &residue_sum(&poles, &self.residues()) + &(&x * &self.drift());
        OdeSpec::from_polys(&x, &y, n)
    }

    /// Recovers the form of the given kind from raw coefficients. `X` is made
    /// monic first; poles come from a companion eigenvalue solve, residues
    /// from `R(p)/X'(p)` with `R = Y mod X`, and the drift is `Y div X`.
    pub fn from_spec(spec: &OdeSpec, kind: FormKind) -> Result<Self> {
        let mismatch = |reason: String| QesError::FormMismatch { form: kind.name(), reason };
        let x = spec.x();
        let dx = x.degree().unwrap_or(0);
        if dx != kind.deg_x() {
            return Err(mismatch(format!("deg X = {dx}, expected {}", kind.deg_x())));
        }
        let lead = x.leading().expect("X is nonzero");
        let inv = lead.inv();
        let x = x.scale(inv);
        let y = spec.y().scale(inv);
        let mut poles = linalg::poly_roots(&x)?;
        sort_canonical(&mut poles);
        check_poles(&poles)?;
        let (quot, rem) = y.div_rem(&x);
        let dxp = x.derivative();
        let res: Vec<C64> = poles.iter().map(|&p| rem.eval(p) / dxp.eval(p)).collect();
        let q = |k: usize| quot.coeff(k);
        let tiny = 1e-12 * (1.0 + y.max_abs_coeff());
        let form = match kind {
            FormKind::Heun => {
                if quot.max_abs_coeff() > tiny {
                    return Err(mismatch("Y/X has a polynomial part (b3 != 0)".into()));
                }
                CanonicalForm::Heun(HeunForm { d: [poles[0], poles[1], poles[2]], alpha: [res[0], res[1], res[2]] })
            }
            FormKind::GHeun1 => CanonicalForm::GHeun1(GHeun1Form {
                e: [poles[0], poles[1], poles[2], poles[3]],
                mu: [res[0], res[1], res[2], res[3]],
            }),
            FormKind::GHeun2 => CanonicalForm::GHeun2(GHeun2Form {
                f: [poles[0], poles[1], poles[2]],
                nu_s: [res[0], res[1], res[2]],
                nu: q(0),
            }),
            FormKind::GHeun3 => CanonicalForm::GHeun3(GHeun3Form {
                g1: poles[0],
                g2: poles[1],
                sigma1: res[0],
                sigma2: res[1],
                sigma: q(1),
                kappa: q(0),
            }),
            FormKind::GHeun4 => {
                CanonicalForm::GHeun4(GHeun4Form { h: poles[0], eta: res[0], lambda: q(2), gamma: q(1), delta: q(0) })
            }
        };
        Ok(form)
    }

    /// Max over `i` of `|Σ_{j≠i} 2/(z_i-z_j) + Σ_s res_s/(z_i-p_s) + drift(z_i)|`,
    /// divided by the sum of the moduli of those terms.
    pub fn pole_form_bae_residual(&self, roots: &[C64]) -> f64 {
        let (poles, res, drift) = (self.poles(), self.residues(), self.drift());
        let mut worst: f64 = 0.0;
        for (i, &zi) in roots.iter().enumerate() {
            let mut total = ZERO;
            let mut mag = 0.0;
            let mut add = |v: C64| {
                total += v;
                mag += v.norm();
            };
            for (j, &zj) in roots.iter().enumerate() {
                if j != i {
                    add(C64::new(2.0, 0.0) / (zi - zj));
                }
            }
            for (&p, &r) in poles.iter().zip(&res) {
                add(r / (zi - p));
            }
            for (k, &c) in drift.coeffs().iter().enumerate() {
                add(c * zi.powu(k as u32));
            }
            worst = worst.max(if mag > 0.0 { total.norm() / mag } else { 0.0 });
        }
        worst
    }
}

fn sum(z: &[C64]) -> C64 {
    z.iter().sum()
}

fn sum_sq(z: &[C64]) -> C64 {
    z.iter().map(|v| v * v).sum()
}

/// Per-form `c` coefficients from the form parameters and the roots.
pub fn appendix_coeffs(form: &CanonicalForm, n: usize, roots: &[C64], variant: AppendixVariant) -> AppendixCoeffs {
    let nf = n as f64;
    let nn1 = nf * (nf - 1.0);
    let (p1, p2) = (sum(roots), sum_sq(roots));
    match form {
        CanonicalForm::Heun(f) => {
            let sa = sum(&f.alpha);
            let [d1, d2, d3] = f.d;
            let [a1, a2, a3] = f.alpha;
            let c1 = -(sa + (nf - 1.0)) * nf;
            let c0 = -(sa + 2.0 * (nf - 1.0)) * p1
                + sum(&f.d) * nn1
                + (a1 * (d2 + d3) + a2 * (d1 + d3) + a3 * (d1 + d2)) * nf;
            AppendixCoeffs { c2: None, c1, c0 }
        }
        CanonicalForm::GHeun1(f) => {
            let m = sum(&f.mu);
            let e1 = sum(&f.e);
            let e2 = pair_sum(&f.e);
            let p = gheun1_p(f);
            let q = gheun1_q(f);
            let c2 = -(m + (nf - 1.0)) * nf;
            let c1 = -(m + 2.0 * (nf - 1.0)) * p1 + (e1 * (nf - 1.0) + p) * nf;
            let lead = -(m + 2.0 * (nf - 1.0)) * p2;
            let c0 = match variant {
                AppendixVariant::Printed => {
                    lead + pair_sum(roots) * 2.0 - (e1 * (2.0 * (nf - 1.0)) + p) * p1 + e2 * nn1 + q * nf
                }
                AppendixVariant::Corrected => {
                    lead - pair_sum(roots) * 2.0 + (e1 * (2.0 * (nf - 1.0)) + p) * p1 - e2 * nn1 - q * nf
                }
            };
            AppendixCoeffs { c2: Some(c2), c1, c0 }
        }
        CanonicalForm::GHeun2(f) => {
            let [f1, f2, f3] = f.f;
            let [v1, v2, v3] = f.nu_s;
            let shift = sum(&f.nu_s) - f.nu * sum(&f.f);
            let c2 = -f.nu * nf;
            let c1 = -f.nu * p1 - (shift + (nf - 1.0)) * nf;
            let last = f.nu * (f1 * f2 + f1 * f3 + f2 * f3) - v1 * (f2 + f3) - v2 * (f1 + f3) - v3 * (f1 + f2);
            let last = match variant {
                AppendixVariant::Printed => last,
                AppendixVariant::Corrected => -last,
            };
            let c0 = -f.nu * p2 - (shift + 2.0 * (nf - 1.0)) * p1 + sum(&f.f) * nn1 + last * nf;
            AppendixCoeffs { c2: Some(c2), c1, c0 }
        }
        CanonicalForm::GHeun3(f) => {
            let k = f.kappa - f.sigma * (f.g1 + f.g2);
            let c2 = -f.sigma * nf;
            let c1 = -f.sigma * p1 - k * nf;
            let c0 = -f.sigma * p2
                - k * p1
                - nn1
                - (f.sigma1 + f.sigma2 + f.sigma * f.g1 * f.g2 - f.kappa * (f.g1 + f.g2)) * nf;
            AppendixCoeffs { c2: Some(c2), c1, c0 }
        }
        CanonicalForm::GHeun4(f) => {
            let g = f.gamma - f.lambda * f.h;
            let c2 = -f.lambda * nf;
            let c1 = -f.lambda * p1 - g * nf;
            let c0 = -f.lambda * p2 - g * p1 - (f.delta - f.gamma * f.h) * nf;
            AppendixCoeffs { c2: Some(c2), c1, c0 }
        }
    }
}

/// `P = Σ_s μ_s (E1 - e_s)` with `E1 = Σ e`.
fn gheun1_p(f: &GHeun1Form) -> C64 {
    let e1 = sum(&f.e);
    f.mu.iter().zip(&f.e).map(|(&m, &e)| m * (e1 - e)).sum()
}

/// `Q = Σ_s μ_s e2(e without e_s)`, where `e2` of the remaining three poles is
/// `E2 - e_s (E1 - e_s)`.
fn gheun1_q(f: &GHeun1Form) -> C64 {
    let e1 = sum(&f.e);
    let e2 = pair_sum(&f.e);
    f.mu.iter().zip(&f.e).map(|(&m, &e)| m * (e2 - e * (e1 - e))).sum()
}

/// For the Heun form with `c1 = αβ`: `α = -n`, `β = Σ α_s + n - 1`, and the
/// residual of `α + β + 1 = Σ α_s`.
pub fn fuchsian_check(form: &HeunForm, n: usize) -> FuchsianCheck {
    let nf = C64::new(n as f64, 0.0);
    let sa = sum(&form.alpha);
    let alpha = -nf;
    let beta = sa + nf - 1.0;
    let residual = (alpha + beta + 1.0 - sa).norm();
    FuchsianCheck { alpha, beta, residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe::theorem_coeffs;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    fn two_electron(delta: f64, gamma: f64) -> CanonicalForm {
        let side = (delta - 1.0 / gamma) / 2.0;
        CanonicalForm::Heun(HeunForm { d: [c(0.0), c(-1.0), c(1.0)], alpha: [c(1.0 / gamma), c(side), c(side)] })
    }

    #[test]
    fn heun_two_electron_spec() {
        let s = two_electron(2.0, 0.5).to_spec(1).unwrap();
        assert_eq!(s.x().coeffs(), &[c(0.0), c(-1.0), c(0.0), c(1.0)]);
        let y = s.y();
        assert!((y.coeff(2) - c(2.0)).norm() < 1e-15);
        assert!((y.coeff(0) + c(2.0)).norm() < 1e-15);
        assert!(y.coeff(1).norm() < 1e-15);
    }

    #[test]
    fn gheun1_phi6_x() {
        let eps = 0.7f64;
        let i_eps = C64::new(0.0, 1.0 / eps);
        let f = CanonicalForm::GHeun1(GHeun1Form { e: [c(1.0), c(-1.0), i_eps, -i_eps], mu: [c(0.0); 4] });
        let s = f.to_spec(2).unwrap();
        let k = 1.0 / (eps * eps);
        let want = [c(-k), c(0.0), c(k - 1.0), c(0.0), c(1.0)];
        for (got, w) in s.a().iter().zip(want) {
            assert!((got - w).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_exponents_give_zero_y() {
        let f = CanonicalForm::Heun(HeunForm { d: [c(0.0), c(1.0), c(2.0)], alpha: [c(0.0); 3] });
        assert!(f.to_spec(1).unwrap().b().iter().all(|b| b.norm() == 0.0));
    }

    #[test]
    fn coincident_poles_rejected() {
        let f = CanonicalForm::GHeun3(GHeun3Form {
            g1: c(1.0),
            g2: c(1.0),
            sigma1: c(1.0),
            sigma2: c(1.0),
            sigma: c(1.0),
            kappa: c(0.0),
        });
        assert!(matches!(f.to_spec(1), Err(QesError::CoincidentPoles { .. })));
    }

    #[test]
    fn round_trip_gheun2() {
        let f = CanonicalForm::GHeun2(GHeun2Form {
            f: [c(-1.0), c(0.0), C64::new(0.5, 0.5)],
            nu_s: [c(0.3), C64::new(-0.2, 1.0), c(2.0)],
            nu: c(-1.5),
        });
        let back = CanonicalForm::from_spec(&f.to_spec(2).unwrap(), FormKind::GHeun2).unwrap();
        let CanonicalForm::GHeun2(b) = back else { panic!() };
        assert!((b.nu - c(-1.5)).norm() < 1e-12);
        for (p, r) in f.poles().iter().zip(f.residues()) {
            let idx = b.f.iter().position(|q| (q - p).norm() < 1e-10).unwrap();
            assert!((b.nu_s[idx] - r).norm() < 1e-10);
        }
    }

    #[test]
    fn heun_requires_vanishing_drift() {
        let s = OdeSpec::from_real([0.0, -1.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0], 1).unwrap();
        assert!(CanonicalForm::from_spec(&s, FormKind::Heun).is_err());
        assert!(CanonicalForm::from_spec(&s, FormKind::GHeun2).is_ok());
        assert!(CanonicalForm::from_spec(&s, FormKind::GHeun1).is_err());
    }

    #[test]
    fn fuchsian() {
        let f = HeunForm { d: [c(0.0), c(1.0), c(2.0)], alpha: [c(0.5), c(0.5), c(1.0)] };
        let r = fuchsian_check(&f, 1);
        assert_eq!((r.alpha, r.beta, r.residual), (c(-1.0), c(2.0), 0.0));
    }

    #[test]
    fn gheun4_trivial_limit() {
        let f =
            CanonicalForm::GHeun4(GHeun4Form { h: c(0.3), eta: c(1.0), lambda: c(0.0), gamma: c(0.0), delta: c(0.0) });
        let r = appendix_coeffs(&f, 3, &[c(1.0), c(2.0), c(-0.5)], AppendixVariant::Printed);
        assert_eq!(r.as_array(), [c(0.0); 3]);
    }

    #[test]
    fn gheun1_p_q_match_literal_sums() {
        let e = [c(1.0), C64::new(-0.5, 0.2), c(2.0), C64::new(0.0, -1.0)];
        let mu = [c(0.7), c(-0.3), C64::new(0.1, 0.4), c(1.5)];
        let f = GHeun1Form { e, mu };
        let [e1, e2, e3, e4] = e;
        let [m1, m2, m3, m4] = mu;
        let p = m1 * (e2 + e3 + e4) + m2 * (e1 + e3 + e4) + m3 * (e1 + e2 + e4) + m4 * (e1 + e2 + e3);
        let q = m1 * (e2 * e3 + e2 * e4 + e3 * e4)
            + m2 * (e1 * e3 + e1 * e4 + e3 * e4)
            + m3 * (e1 * e2 + e1 * e4 + e2 * e4)
            + m4 * (e1 * e2 + e1 * e3 + e2 * e3);
        assert!((gheun1_p(&f) - p).norm() < 1e-14);
        assert!((gheun1_q(&f) - q).norm() < 1e-14);
    }

    #[test]
    fn corrected_variants_agree_with_general_formulas_on_any_roots() {
        // agreement of c2, c1 and corrected c0 is an identity in the roots
        let roots = [C64::new(0.2, 0.1), C64::new(-0.7, 0.4), c(1.3)];
        let forms = [
            two_electron(1.5, 0.8),
            CanonicalForm::GHeun1(GHeun1Form {
                e: [c(1.0), c(-1.0), C64::new(0.2, 1.0), C64::new(0.1, -2.0)],
                mu: [c(0.5), c(-1.2), C64::new(0.3, 0.3), c(2.0)],
            }),
            CanonicalForm::GHeun2(GHeun2Form {
                f: [c(-1.0), c(0.0), C64::new(0.5, 0.5)],
                nu_s: [c(0.3), C64::new(-0.2, 1.0), c(2.0)],
                nu: c(-1.5),
            }),
            CanonicalForm::GHeun3(GHeun3Form {
                g1: c(0.0),
                g2: c(-0.4),
                sigma1: c(2.1),
                sigma2: c(-1.0),
                sigma: c(0.8),
                kappa: C64::new(0.2, -0.3),
            }),
            CanonicalForm::GHeun4(GHeun4Form {
                h: c(0.0),
                eta: c(1.5),
                lambda: c(-1.4),
                gamma: c(-0.6),
                delta: c(-0.9),
            }),
        ];
        for f in &forms {
            let spec = f.to_spec(3).unwrap();
            let want = theorem_coeffs(&spec, &roots);
            let got = appendix_coeffs(f, 3, &roots, AppendixVariant::Corrected).as_array();
            for k in 0..3 {
                assert!((want[k] - got[k]).norm() < 1e-12, "{:?} k={k}: {} vs {}", f.kind(), want[k], got[k]);
            }
        }
    }
}
