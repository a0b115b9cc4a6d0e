//! Pseudo-Bayes machinery: marginal functions m(w) with their log
//! derivative, the SURE-difference functional Delta(m, mk) against
//! competitors delta_m + k(||X||^2) X, and a numeric probe of the
//! quasi-admissibility criterion (both integrals of w^{-p/2}/m(w)
//! divergent).
//!
//! Divergence cannot be decided numerically in general, so the probe
//! classifies increment patterns along decade checkpoints and reports
//! Inconclusive whenever neither pattern is convincing.
//!
//! Convention: m is a function of w = ||x||^2 throughout. The James-Stein
//! marginal is m(w) = w^{1 - p/2}, i.e. m(||x||^2) = ||x||^{2-p}; with this
//! reading the probe integrand for James-Stein is exactly 1/w.

use crate::error::{Error, Result};
use crate::estimators::{Family, PhiFamily, PsiSeries};
use crate::quad::{self, QuadOptions};
use serde::{Deserialize, Serialize};

/// Marginal function kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MarginalKind {
    /// m(w) = w^e. e = 1 - p/2 is the James-Stein marginal, e = 0 the
    /// identity estimator.
    PowerLaw(f64),
    /// m_alpha(w) = (∫_0^1 t^{alpha(p/2-1)-1} e^{-alpha w t / 2} dt)^{1/alpha},
    /// evaluated in log space through the psi-series identity.
    AlphaMarginal { alpha: f64 },
    /// Tabulated log m over log w, monotone-cubic interpolated, with the
    /// boundary log-log slope extended linearly beyond the table.
    Custom(LogLogTable),
}

/// A positive function m(w) of w = ||x||^2 in dimension p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalFn {
    kind: MarginalKind,
    p: u32,
}

impl MarginalFn {
    pub fn power_law(p: u32, exponent: f64) -> Result<Self> {
        if p < 3 {
            return Err(Error::Domain(format!("marginal needs p >= 3, got {p}")));
        }
        if !exponent.is_finite() {
            return Err(Error::Domain("power-law exponent must be finite".into()));
        }
        Ok(Self {
            kind: MarginalKind::PowerLaw(exponent),
            p,
        })
    }

    /// The James-Stein marginal w^{1-p/2}.
    pub fn james_stein(p: u32) -> Result<Self> {
        Self::power_law(p, 1.0 - p as f64 / 2.0)
    }

    pub fn alpha(p: u32, alpha: f64) -> Result<Self> {
        PsiSeries::new(p, alpha)?;
        Ok(Self {
            kind: MarginalKind::AlphaMarginal { alpha },
            p,
        })
    }

    pub fn custom(p: u32, points: &[(f64, f64)]) -> Result<Self> {
        if p < 3 {
            return Err(Error::Domain(format!("marginal needs p >= 3, got {p}")));
        }
        let table = LogLogTable::new(points)?;
        Ok(Self {
            kind: MarginalKind::Custom(table),
            p,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn kind(&self) -> &MarginalKind {
        &self.kind
    }

    pub fn label(&self) -> String {
        match &self.kind {
            MarginalKind::PowerLaw(e) => {
                if (*e - (1.0 - self.p as f64 / 2.0)).abs() < 1e-12 {
                    "js-power-law".into()
                } else if *e == 0.0 {
                    "identity".into()
                } else {
                    format!("power({e})")
                }
            }
            MarginalKind::AlphaMarginal { alpha } => format!("alpha-marginal({alpha})"),
            MarginalKind::Custom(t) => format!("custom({} knots)", t.ln_w.len()),
        }
    }

    /// ln m(w), finite for all w > 0 (and at w = 0 for AlphaMarginal).
    pub fn ln_m(&self, w: f64) -> Result<f64> {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Domain(format!("ln_m needs w >= 0, got {w}")));
        }
        match &self.kind {
            MarginalKind::PowerLaw(e) => {
                if w == 0.0 {
                    return Err(Error::Domain("power-law marginal singular at 0".into()));
                }
                Ok(e * w.ln())
            }
            MarginalKind::AlphaMarginal { alpha } => {
                let s = PsiSeries::new(self.p, *alpha)?;
                // psi = (alpha/2) e^{alpha w/2} Integral  =>  ln Integral
                Ok((s.ln_psi(w)? + (2.0 / alpha).ln() - alpha * w / 2.0) / alpha)
            }
            MarginalKind::Custom(t) => {
                if w == 0.0 {
                    return Err(Error::Domain("tabulated marginal needs w > 0".into()));
                }
                Ok(t.eval(w.ln()).0)
            }
        }
    }

    /// m'(w)/m(w). For AlphaMarginal this is -phi_alpha(w)/(2w), the
    /// identity tying the marginal to its estimator family.
    pub fn log_m_derivative(&self, w: f64) -> Result<f64> {
        if w <= 0.0 || !w.is_finite() || w.is_nan() {
            return Err(Error::Domain(format!(
                "log_m_derivative needs w > 0, got {w}"
            )));
        }
        match &self.kind {
            MarginalKind::PowerLaw(e) => Ok(e / w),
            MarginalKind::AlphaMarginal { alpha } => {
                let fam = PhiFamily::new(Family::Alpha(*alpha), self.p)?;
                Ok(-fam.phi(w)? / (2.0 * w))
            }
            MarginalKind::Custom(t) => {
                let (_, dlnm_dlnw) = t.eval(w.ln());
                Ok(dlnm_dlnw / w)
            }
        }
    }
}

/// Monotone cubic (Fritsch-Carlson) interpolant of ln m against ln w.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLogTable {
    ln_w: Vec<f64>,
    ln_m: Vec<f64>,
    slope: Vec<f64>,
}

impl LogLogTable {
    fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain("table needs at least 2 points".into()));
        }
        let mut ln_w = Vec::with_capacity(points.len());
        let mut ln_m = Vec::with_capacity(points.len());
        for &(w, m) in points {
            if !(w > 0.0 && m > 0.0) {
                return Err(Error::Domain(format!(
                    "table points need w > 0, m > 0, got ({w}, {m})"
                )));
            }
            ln_w.push(w.ln());
            ln_m.push(m.ln());
        }
        if !ln_w.windows(2).all(|p| p[1] > p[0]) {
            return Err(Error::Domain("table w values must be increasing".into()));
        }

        let n = ln_w.len();
        let mut secant = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            secant.push((ln_m[i + 1] - ln_m[i]) / (ln_w[i + 1] - ln_w[i]));
        }
        let mut slope = vec![0.0; n];
        slope[0] = secant[0];
        slope[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            if secant[i - 1] * secant[i] <= 0.0 {
                slope[i] = 0.0;
            } else {
                slope[i] = 0.5 * (secant[i - 1] + secant[i]);
            }
        }
        // Fritsch-Carlson limiter keeps the interpolant monotone per segment
        for i in 0..n - 1 {
            if secant[i] == 0.0 {
                slope[i] = 0.0;
                slope[i + 1] = 0.0;
                continue;
            }
            let a = slope[i] / secant[i];
            let b = slope[i + 1] / secant[i];
            let norm = a * a + b * b;
            if norm > 9.0 {
                let t = 3.0 / norm.sqrt();
                slope[i] = t * a * secant[i];
                slope[i + 1] = t * b * secant[i];
            }
        }
        Ok(Self { ln_w, ln_m, slope })
    }

    /// (ln m, d ln m / d ln w) at x = ln w, linearly extended beyond the
    /// table with the boundary slope (power-law continuation).
    fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.ln_w.len();
        if x <= self.ln_w[0] {
            return (
                self.ln_m[0] + self.slope[0] * (x - self.ln_w[0]),
                self.slope[0],
            );
        }
        if x >= self.ln_w[n - 1] {
            return (
                self.ln_m[n - 1] + self.slope[n - 1] * (x - self.ln_w[n - 1]),
                self.slope[n - 1],
            );
        }
        let i = match self.ln_w.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return (self.ln_m[i], self.slope[i]),
            Err(i) => i - 1,
        };
        let h = self.ln_w[i + 1] - self.ln_w[i];
        let t = (x - self.ln_w[i]) / h;
        let (y0, y1) = (self.ln_m[i], self.ln_m[i + 1]);
        let (d0, d1) = (self.slope[i], self.slope[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        let dh00 = 6.0 * t2 - 6.0 * t;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t2 - 2.0 * t;
        let deriv = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
        (value, deriv)
    }
}

/// Competitor delta_{m,k} = delta_m + k(||X||^2) X.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CompetitorK {
    /// k = 0: the null competitor.
    Null,
    /// k(w) = (p-2)/w - 1 for w < p-2, else 0: turns the James-Stein
    /// estimator into its positive part.
    PositivePartCompetitor { p: u32 },
}

impl CompetitorK {
    pub fn k(&self, w: f64) -> Result<f64> {
        self.check_w(w)?;
        Ok(match self {
            CompetitorK::Null => 0.0,
            CompetitorK::PositivePartCompetitor { p } => {
                let p2 = *p as f64 - 2.0;
                if w < p2 {
                    p2 / w - 1.0
                } else {
                    0.0
                }
            }
        })
    }

    /// k'(w), right derivative at the kink.
    pub fn k_prime(&self, w: f64) -> Result<f64> {
        self.check_w(w)?;
        Ok(match self {
            CompetitorK::Null => 0.0,
            CompetitorK::PositivePartCompetitor { p } => {
                let p2 = *p as f64 - 2.0;
                if w < p2 {
                    -p2 / (w * w)
                } else {
                    0.0
                }
            }
        })
    }

    fn check_w(&self, w: f64) -> Result<()> {
        if w <= 0.0 || !w.is_finite() || w.is_nan() {
            return Err(Error::Domain(format!("competitor needs w > 0, got {w}")));
        }
        Ok(())
    }

    pub fn description(&self) -> &'static str {
        match self {
            CompetitorK::Null => "k = 0",
            CompetitorK::PositivePartCompetitor { .. } => "k(w) = (p-2)/w - 1 below p-2, else 0",
        }
    }
}

/// Delta(m, mk) = 4w (m'/m) k + 2p k + 4w k' + w k^2: the pointwise
/// SURE difference between delta_{m,k} and delta_m.
pub fn delta_functional(m: &MarginalFn, comp: &CompetitorK, w: f64) -> Result<f64> {
    let k = comp.k(w)?;
    let kp = comp.k_prime(w)?;
    let lmd = m.log_m_derivative(w)?;
    Ok(4.0 * w * lmd * k + 2.0 * m.p() as f64 * k + 4.0 * w * kp + w * k * k)
}

/// Classification of one side's integral behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegralClass {
    Divergent,
    Convergent,
    Inconclusive,
}

/// Probe verdict; quasi-admissibility is indicated only when both sides
/// classify divergent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeVerdict {
    QuasiAdmissibleIndicated,
    NotCertified,
    Inconclusive,
}

impl std::fmt::Display for ProbeVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProbeVerdict::QuasiAdmissibleIndicated => {
                write!(f, "quasi-admissible (numerically indicated)")
            }
            ProbeVerdict::NotCertified => write!(f, "not certified"),
            ProbeVerdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// One side of the probe: decade checkpoints with increments and running
/// totals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SideProbe {
    /// Outer integration bound per checkpoint (10^k toward the tail,
    /// 10^-k toward the origin).
    pub bounds: Vec<f64>,
    pub increments: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub class: IntegralClass,
}

/// Full probe report for one marginal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    pub marginal: String,
    pub origin: SideProbe,
    pub tail: SideProbe,
    pub verdict: ProbeVerdict,
}

/// Number of decade checkpoints per side.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub decades: u32,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { decades: 6 }
    }
}

/// Divergent when the last three decade increments each hold at least
/// 0.4 of the first one; convergent when the last increment is below
/// 1e-6 of the running total.
///
/// The 0.4 factor leaves room for the first decade's transient: marginals
/// that approach their power-law tail from below inflate the first
/// increment by up to 2x before the increments settle to a constant.
fn classify(increments: &[f64]) -> IntegralClass {
    let n = increments.len();
    let total: f64 = increments.iter().sum();
    let first = increments[0];
    let last = increments[n - 1];
    if first > 0.0 && increments[n - 3..].iter().all(|&x| x >= 0.4 * first) {
        IntegralClass::Divergent
    } else if last < 1e-6 * total {
        IntegralClass::Convergent
    } else {
        IntegralClass::Inconclusive
    }
}

/// Probes both integrals ∫ w^{-p/2} m(w)^{-1} dw (over (0,1] and [1,∞))
/// along decade checkpoints.
pub fn divergence_probe(m: &MarginalFn, cfg: &ProbeConfig) -> Result<ProbeReport> {
    if cfg.decades < 4 {
        return Err(Error::Domain(
            "probe needs at least 4 decades to classify".into(),
        ));
    }
    let half_p = m.p() as f64 / 2.0;
    let slot = std::cell::RefCell::new(None::<Error>);
    let integrand = |w: f64| -> f64 {
        match m.ln_m(w) {
            Ok(lnm) => (-half_p * w.ln() - lnm).exp(),
            Err(e) => {
                slot.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let opts = QuadOptions::default();

    let segment = |a: f64, b: f64| -> Result<f64> {
        let r = quad::integrate(integrand, a, b, &opts)?;
        if let Some(e) = slot.borrow_mut().take() {
            return Err(e);
        }
        Ok(r.value)
    };

    let mut tail = SideProbe {
        bounds: Vec::new(),
        increments: Vec::new(),
        cumulative: Vec::new(),
        class: IntegralClass::Inconclusive,
    };
    let mut acc = 0.0;
    for k in 1..=cfg.decades {
        let (a, b) = (10f64.powi(k as i32 - 1), 10f64.powi(k as i32));
        let inc = segment(a, b)?;
        acc += inc;
        tail.bounds.push(b);
        tail.increments.push(inc);
        tail.cumulative.push(acc);
    }
    tail.class = classify(&tail.increments);

    let mut origin = SideProbe {
        bounds: Vec::new(),
        increments: Vec::new(),
        cumulative: Vec::new(),
        class: IntegralClass::Inconclusive,
    };
    acc = 0.0;
    for k in 1..=cfg.decades {
        let (a, b) = (10f64.powi(-(k as i32)), 10f64.powi(1 - k as i32));
        let inc = segment(a, b)?;
        acc += inc;
        origin.bounds.push(a);
        origin.increments.push(inc);
        origin.cumulative.push(acc);
    }
    origin.class = classify(&origin.increments);

    let verdict = match (origin.class, tail.class) {
        (IntegralClass::Divergent, IntegralClass::Divergent) => {
            ProbeVerdict::QuasiAdmissibleIndicated
        }
        (IntegralClass::Convergent, _) | (_, IntegralClass::Convergent) => {
            ProbeVerdict::NotCertified
        }
        _ => ProbeVerdict::Inconclusive,
    };

    Ok(ProbeReport {
        marginal: m.label(),
        origin,
        tail,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_log_derivative() {
        // JS marginal at p=5: e = -1.5, m'/m at w=2 is -0.75
        let m = MarginalFn::james_stein(5).unwrap();
        assert!((m.log_m_derivative(2.0).unwrap() + 0.75).abs() < 1e-15);
        // identity marginal
        let m = MarginalFn::power_law(5, 0.0).unwrap();
        assert_eq!(m.log_m_derivative(7.0).unwrap(), 0.0);
        assert!(m.log_m_derivative(0.0).is_err());
    }

    #[test]
    fn alpha_marginal_ties_to_phi() {
        // -2w (log m)' = phi_alpha(w) on the standard grid
        for &alpha in &[1.0, 2.0, 5.0] {
            let m = MarginalFn::alpha(5, alpha).unwrap();
            let fam = PhiFamily::new(Family::Alpha(alpha), 5).unwrap();
            for &w in crate::grid::standard_w_grid().iter().filter(|&&w| w > 0.0) {
                let lhs = -2.0 * w * m.log_m_derivative(w).unwrap();
                let rhs = fam.phi(w).unwrap();
                assert!((lhs - rhs).abs() < 1e-9, "alpha={alpha} w={w}");
            }
        }
    }

    #[test]
    fn alpha_marginal_log_derivative_matches_finite_difference() {
        let m = MarginalFn::alpha(5, 1.0).unwrap();
        let w = 3.0;
        let h = 1e-6 * w;
        let fd = (m.ln_m(w + h).unwrap() - m.ln_m(w - h).unwrap()) / (2.0 * h);
        let got = m.log_m_derivative(w).unwrap();
        assert!((got - fd).abs() < 1e-7, "{got} vs fd {fd}");
    }

    #[test]
    fn alpha_marginal_finite_at_zero() {
        for &alpha in &[1.0, 2.0, 5.0] {
            let m = MarginalFn::alpha(5, alpha).unwrap();
            let v = m.ln_m(0.0).unwrap().exp();
            assert!(v > 0.0 && v.is_finite(), "alpha={alpha}: {v}");
        }
    }

    #[test]
    fn delta_null_competitor_is_zero() {
        let m = MarginalFn::james_stein(5).unwrap();
        for &w in &[0.1, 1.0, 10.0] {
            assert_eq!(delta_functional(&m, &CompetitorK::Null, w).unwrap(), 0.0);
        }
    }

    #[test]
    fn delta_positive_part_closed_form() {
        // p=5, JS marginal, positive-part competitor:
        // Delta(w) = (p-2)^2/w - 2(p-2) - 4 + w = 9/w - 10 + w on w < 3
        let m = MarginalFn::james_stein(5).unwrap();
        let comp = CompetitorK::PositivePartCompetitor { p: 5 };
        let cases = [(1.0, 0.0), (0.5, 8.5), (2.0, -3.5)];
        for (w, expect) in cases {
            let got = delta_functional(&m, &comp, w).unwrap();
            assert!((got - expect).abs() < 1e-12, "w={w}: {got} vs {expect}");
        }
        // above the kink the competitor vanishes
        assert_eq!(delta_functional(&m, &comp, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn probe_js_power_law_both_divergent() {
        let m = MarginalFn::james_stein(5).unwrap();
        let r = divergence_probe(&m, &ProbeConfig::default()).unwrap();
        assert_eq!(r.origin.class, IntegralClass::Divergent);
        assert_eq!(r.tail.class, IntegralClass::Divergent);
        assert_eq!(r.verdict, ProbeVerdict::QuasiAdmissibleIndicated);
        // integrand is exactly 1/w: every decade increment is ln 10
        for inc in r.tail.increments {
            assert!((inc - 10f64.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn probe_identity_marginal_tail_converges() {
        let m = MarginalFn::power_law(5, 0.0).unwrap();
        let r = divergence_probe(&m, &ProbeConfig::default()).unwrap();
        assert_eq!(r.tail.class, IntegralClass::Convergent);
        assert_eq!(r.origin.class, IntegralClass::Divergent);
        assert_eq!(r.verdict, ProbeVerdict::NotCertified);
        // closed form: ∫_1^T w^{-p/2} dw = (2/3)(1 - T^{-3/2}) for p=5
        let total = r.tail.cumulative.last().unwrap();
        assert!((total - 2.0 / 3.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn custom_table_recovers_power_law() {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let w = 10f64.powf(-2.0 + 4.0 * i as f64 / 39.0);
                (w, w.powf(-1.5))
            })
            .collect();
        let m = MarginalFn::custom(5, &pts).unwrap();
        for &w in &[0.05, 1.0, 30.0] {
            assert!((m.ln_m(w).unwrap() - (-1.5) * w.ln()).abs() < 1e-9);
            assert!((m.log_m_derivative(w).unwrap() - (-1.5) / w).abs() < 1e-9);
        }
        // extrapolation keeps the tail exponent
        assert!((m.log_m_derivative(1e5).unwrap() - (-1.5) / 1e5).abs() < 1e-12);
    }

    #[test]
    fn custom_table_validation() {
        assert!(MarginalFn::custom(5, &[(1.0, 1.0)]).is_err());
        assert!(MarginalFn::custom(5, &[(1.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(MarginalFn::custom(5, &[(1.0, 0.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn probe_requires_enough_decades() {
        let m = MarginalFn::james_stein(5).unwrap();
        assert!(divergence_probe(&m, &ProbeConfig { decades: 3 }).is_err());
    }
}
