//! The shrinkage families: phi(w), its derivative, and vector application
//! x -> (1 - phi(||x||^2)/||x||^2) x.
//!
//! The alpha family is evaluated through the power series
//!
//!   psi(alpha, w) = sum_i w^i prod_{j=0..i} (p - 2 + 2j/alpha)^{-1},
//!
//! whose terms are positive with a simple recursive ratio, accumulated with
//! scale tracking so that ln psi stays finite long after psi itself
//! overflows. Far in the tail (term budget exceeded) the series is traded
//! for the exact identity psi = (alpha/2) e^s gamma(a, s) s^{-a} with
//! a = alpha(p-2)/2, s = alpha*w/2, evaluated in log space.

use crate::error::{Error, Result};
use crate::gamma::{ln_gamma, ln_reg_lower};
use serde::{Deserialize, Serialize};

/// Shrinkage function selector. `Alpha(1)` is the harmonic-prior
/// (Kubokawa) estimator; `Alpha` tends to `PositivePart` as alpha grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// phi(w) = c; c = p-2 is the James-Stein estimator.
    Constant(f64),
    /// phi(w) = min(w, p-2), the James-Stein positive part.
    PositivePart,
    /// The smooth bridge family, alpha >= 1.
    Alpha(f64),
    /// Li-Kuo n=1: phi(w) = p-2 - a1 w^{-b1}, with a1 derived from b1.
    LiKuo1(f64),
    /// Kuriki-Takemura type 1 with radius r.
    KurikiTakemura1(f64),
    /// Kuriki-Takemura type 2 with radius r.
    KurikiTakemura2(f64),
}

/// A shrinkage function phi in dimension p (>= 3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiFamily {
    family: Family,
    p: u32,
}

/// Series evaluator for psi(alpha, w) with explicit truncation contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiSeries {
    pub p: u32,
    pub alpha: f64,
    pub truncation_tol: f64,
    pub max_terms: usize,
}

/// Beyond this many predicted series terms the closed incomplete-gamma
/// representation takes over (exact, log-space).
const SERIES_TERM_BUDGET: usize = 150_000;

impl PsiSeries {
    pub fn new(p: u32, alpha: f64) -> Result<Self> {
        if p < 3 {
            return Err(Error::Domain(format!("psi needs p >= 3, got {p}")));
        }
        if !alpha.is_finite() || alpha < 1.0 {
            return Err(Error::Domain(format!("psi needs alpha >= 1, got {alpha}")));
        }
        Ok(Self {
            p,
            alpha,
            truncation_tol: 1e-14,
            max_terms: 1_000_000,
        })
    }

    /// psi(alpha, w). Overflows to +inf where the true value exceeds f64
    /// range (it grows like e^{alpha w/2}); use `ln_psi` in that regime.
    pub fn psi(&self, w: f64) -> Result<f64> {
        Ok(self.ln_psi(w)?.exp())
    }

    /// ln psi(alpha, w), finite for all finite w >= 0.
    pub fn ln_psi(&self, w: f64) -> Result<f64> {
        Ok(self.sum_series(w, false)?.0)
    }

    /// (ln psi, ln psi') in one pass; psi' is the term-differentiated series.
    pub(crate) fn ln_psi_and_deriv(&self, w: f64) -> Result<(f64, f64)> {
        self.sum_series(w, true)
    }

    /// Number of terms before the ratio w/(p-2+2i/alpha) drops under 1.
    fn predicted_terms(&self, w: f64) -> usize {
        let p2 = (self.p - 2) as f64;
        let rise = (self.alpha * (w - p2) / 2.0).max(0.0);
        // decay tail after the peak is a few hundred terms at tol 1e-14
        (rise + 64.0 * (1.0 + self.alpha * w / 2.0).sqrt() + 64.0) as usize
    }

    fn sum_series(&self, w: f64, with_deriv: bool) -> Result<(f64, f64)> {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Domain(format!("psi needs w >= 0, got {w}")));
        }
        let p2 = (self.p - 2) as f64;
        if w == 0.0 {
            // first term only; derivative series starts at 1/((p-2)(p-2+2/alpha))
            let d0 = -(p2.ln() + (p2 + 2.0 / self.alpha).ln());
            return Ok((-p2.ln(), d0));
        }

        // the gamma representation is only well-conditioned past the
        // incomplete-gamma transition s > a, i.e. w > p-2; max_terms stays
        // the series' own contract and does not trigger the switch
        let s = self.alpha * w / 2.0;
        let a = self.alpha * p2 / 2.0;
        if self.predicted_terms(w) > SERIES_TERM_BUDGET && s > a + 1.0 {
            return self.gamma_representation(w, with_deriv);
        }

        const RESCALE: f64 = 1e250;
        const LN_RESCALE: f64 = 575.646_273_248_511_4; // ln(1e250)
        let mut term = 1.0 / p2;
        let mut sum = term;
        let mut dsum = 0.0; // sum of i * term_i / w
        let mut offset = 0.0;
        let mut i = 0usize;
        loop {
            i += 1;
            if i > self.max_terms {
                return Err(Error::Truncation {
                    w,
                    alpha: self.alpha,
                    terms: i - 1,
                });
            }
            let ratio = w / (p2 + 2.0 * i as f64 / self.alpha);
            term *= ratio;
            sum += term;
            if with_deriv {
                dsum += term * i as f64 / w;
            }
            if sum > RESCALE {
                sum /= RESCALE;
                term /= RESCALE;
                dsum /= RESCALE;
                offset += LN_RESCALE;
            }
            if ratio < 1.0 && term < self.truncation_tol * sum {
                break;
            }
        }
        Ok((sum.ln() + offset, dsum.ln() + offset))
    }

    /// psi = (alpha/2) e^s gamma(a, s) s^{-a}, a = alpha(p-2)/2, s = alpha w/2;
    /// psi' = (alpha/2)^2 [F (1 - a/s) + 1/s] with F = e^s gamma(a,s) s^{-a}.
    fn gamma_representation(&self, w: f64, with_deriv: bool) -> Result<(f64, f64)> {
        let p2 = (self.p - 2) as f64;
        let a = self.alpha * p2 / 2.0;
        let s = self.alpha * w / 2.0;
        let ln_gamma_as = ln_gamma(a) + ln_reg_lower(a, s)?;
        let ln_f = s + ln_gamma_as - a * s.ln();
        let ln_psi = (self.alpha / 2.0).ln() + ln_f;
        if !with_deriv {
            return Ok((ln_psi, f64::NEG_INFINITY));
        }
        // F(1 - a/s) + 1/s, all positive in this regime (s >> a)
        let inner = ln_f.exp() * (1.0 - a / s) + 1.0 / s;
        let ln_dpsi = 2.0 * (self.alpha / 2.0).ln() + inner.ln();
        Ok((ln_psi, ln_dpsi))
    }
}

impl PhiFamily {
    pub fn new(family: Family, p: u32) -> Result<Self> {
        if p < 3 {
            return Err(Error::Domain(format!("family needs p >= 3, got {p}")));
        }
        match family {
            Family::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::Domain("constant c must be finite".into()));
                }
            }
            Family::Alpha(alpha) => {
                if !alpha.is_finite() || alpha < 1.0 {
                    return Err(Error::Domain(format!(
                        "alpha family needs alpha >= 1, got {alpha}"
                    )));
                }
            }
            Family::LiKuo1(b1) => {
                let cap = (p as f64 - 2.0) / 4.0;
                if !(b1 > 0.0 && b1 < cap) {
                    return Err(Error::Domain(format!(
                        "li-kuo needs 0 < b1 < (p-2)/4 = {cap}, got {b1}"
                    )));
                }
            }
            Family::KurikiTakemura1(r) | Family::KurikiTakemura2(r) => {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(Error::Domain(format!("kt radius must be > 0, got {r}")));
                }
            }
            Family::PositivePart => {}
        }
        Ok(Self { family, p })
    }

    /// James-Stein: Constant(p-2).
    pub fn james_stein(p: u32) -> Result<Self> {
        Self::new(Family::Constant(p as f64 - 2.0), p)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Constants outside (0, 2(p-2)) are accepted but carry no domination
    /// guarantee; reports surface this flag.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Family::Constant(c) = self.family {
            let hi = 2.0 * (self.p as f64 - 2.0);
            if !(c > 0.0 && c < hi) {
                out.push(format!(
                    "constant c={c} outside (0, {hi}); domination over X not guaranteed"
                ));
            }
        }
        out
    }

    /// Short stable label used in reports and CSV rows.
    pub fn label(&self) -> String {
        match self.family {
            Family::Constant(c) => {
                if (c - (self.p as f64 - 2.0)).abs() == 0.0 {
                    "js".to_string()
                } else {
                    format!("constant({c})")
                }
            }
            Family::PositivePart => "positive-part".to_string(),
            Family::Alpha(a) => format!("alpha({a})"),
            Family::LiKuo1(b1) => format!("li-kuo({b1})"),
            Family::KurikiTakemura1(r) => format!("kt1({r})"),
            Family::KurikiTakemura2(r) => format!("kt2({r})"),
        }
    }

    fn psi_series(&self, alpha: f64) -> PsiSeries {
        PsiSeries {
            p: self.p,
            alpha,
            truncation_tol: 1e-14,
            max_terms: 1_000_000,
        }
    }

    /// KT2 kink location ((p-1)/(p-2))^2 r^2.
    fn kt2_threshold(&self, r: f64) -> f64 {
        let p = self.p as f64;
        ((p - 1.0) / (p - 2.0)).powi(2) * r * r
    }

    /// phi(w). For LiKuo1 at w = 0 the value is -inf (returned as the IEEE
    /// indicator, not an error); callers integrating near 0 rely on the
    /// b1 < (p-2)/4 constraint for integrability.
    pub fn phi(&self, w: f64) -> Result<f64> {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Domain(format!("phi needs w >= 0, got {w}")));
        }
        let p2 = self.p as f64 - 2.0;
        match self.family {
            Family::Constant(c) => Ok(c),
            Family::PositivePart => Ok(w.min(p2)),
            Family::Alpha(alpha) => {
                if w == 0.0 {
                    // psi(alpha, 0) = 1/(p-2) exactly
                    return Ok(0.0);
                }
                let ln_psi = self.psi_series(alpha).ln_psi(w)?;
                Ok(p2 - (-ln_psi).exp())
            }
            Family::LiKuo1(b1) => {
                if w == 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                let a1 = li_kuo_coefficient(self.p, b1)?;
                Ok(p2 - a1 * w.powf(-b1))
            }
            Family::KurikiTakemura1(r) => {
                if w <= r * r {
                    return Ok(0.0);
                }
                let q = r / w.sqrt();
                let mut s = 0.0;
                let mut qi = 1.0;
                for _ in 0..(self.p - 2) {
                    qi *= q;
                    s += qi;
                }
                Ok(p2 - s)
            }
            Family::KurikiTakemura2(r) => {
                if w <= self.kt2_threshold(r) {
                    return Ok(0.0);
                }
                Ok(p2 - r / (w.sqrt() - r))
            }
        }
    }

    /// phi'(w); piecewise families return the right derivative at kinks.
    pub fn phi_prime(&self, w: f64) -> Result<f64> {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Domain(format!("phi_prime needs w >= 0, got {w}")));
        }
        let p2 = self.p as f64 - 2.0;
        match self.family {
            Family::Constant(_) => Ok(0.0),
            Family::PositivePart => Ok(if w < p2 { 1.0 } else { 0.0 }),
            Family::Alpha(alpha) => {
                if w == 0.0 {
                    // psi'(0)/psi(0)^2 = (p-2)/(p-2+2/alpha)
                    return Ok(p2 / (p2 + 2.0 / alpha));
                }
                let (ln_psi, ln_dpsi) = self.psi_series(alpha).ln_psi_and_deriv(w)?;
                Ok((ln_dpsi - 2.0 * ln_psi).exp())
            }
            Family::LiKuo1(b1) => {
                if w == 0.0 {
                    return Ok(f64::INFINITY);
                }
                let a1 = li_kuo_coefficient(self.p, b1)?;
                Ok(a1 * b1 * w.powf(-b1 - 1.0))
            }
            Family::KurikiTakemura1(r) => {
                if w < r * r {
                    return Ok(0.0);
                }
                let mut s = 0.0;
                for i in 1..=(self.p - 2) {
                    let fi = i as f64;
                    s += 0.5 * fi * r.powi(i as i32) * w.powf(-fi / 2.0 - 1.0);
                }
                Ok(s)
            }
            Family::KurikiTakemura2(r) => {
                if w < self.kt2_threshold(r) {
                    return Ok(0.0);
                }
                let sq = w.sqrt();
                Ok(r / (2.0 * sq * (sq - r) * (sq - r)))
            }
        }
    }

    /// Interior points where phi' jumps; risk integrals split here.
    pub fn kink_points(&self) -> Vec<f64> {
        match self.family {
            Family::PositivePart => vec![self.p as f64 - 2.0],
            Family::KurikiTakemura1(r) => vec![r * r],
            Family::KurikiTakemura2(r) => vec![self.kt2_threshold(r)],
            _ => Vec::new(),
        }
    }

    /// The estimator itself: (1 - phi(||x||^2)/||x||^2) x.
    ///
    /// At x = 0 the shrink factor has a finite limit for Alpha,
    /// PositivePart and the KT families (zero vector returned) and is
    /// unbounded for LiKuo1 and nonzero constants (domain error).
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.p as usize {
            return Err(Error::DimensionMismatch {
                expected: self.p as usize,
                got: x.len(),
            });
        }
        let w: f64 = x.iter().map(|v| v * v).sum();
        if w == 0.0 {
            return match self.family {
                Family::Alpha(_) | Family::PositivePart => Ok(vec![0.0; x.len()]),
                Family::KurikiTakemura1(_) | Family::KurikiTakemura2(_) => Ok(vec![0.0; x.len()]),
                // c = 0 is the identity estimator, the one constant whose
                // shrink factor stays bounded at the origin
                Family::Constant(c) => {
                    if c == 0.0 {
                        Ok(vec![0.0; x.len()])
                    } else {
                        Err(Error::Domain(
                            "shrink factor unbounded at the origin for this family".into(),
                        ))
                    }
                }
                Family::LiKuo1(_) => Err(Error::Domain(
                    "shrink factor unbounded at the origin for this family".into(),
                )),
            };
        }
        let factor = 1.0 - self.phi(w)? / w;
        Ok(x.iter().map(|v| factor * v).collect())
    }
}

/// Li-Kuo a1 = 2 b1 2^{b1} Γ(p/2 - b1 - 1) / Γ(p/2 - 2 b1 - 1).
pub fn li_kuo_coefficient(p: u32, b1: f64) -> Result<f64> {
    let cap = (p as f64 - 2.0) / 4.0;
    if !(b1 > 0.0 && b1 < cap) {
        return Err(Error::Domain(format!(
            "li_kuo_coefficient needs 0 < b1 < (p-2)/4 = {cap}, got {b1}"
        )));
    }
    let half_p = p as f64 / 2.0;
    let ln = (2.0 * b1).ln() + b1 * std::f64::consts::LN_2 + ln_gamma(half_p - b1 - 1.0)
        - ln_gamma(half_p - 2.0 * b1 - 1.0);
    Ok(ln.exp())
}
