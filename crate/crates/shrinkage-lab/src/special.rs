//! Central and noncentral chi-square densities plus the `y^{-1}`-weighted
//! cumulative integral the risk identities are built on.

use crate::error::{Error, Result};
use crate::gamma::{ln_gamma, reg_upper};
use crate::quad::{self, QuadOptions};

const LN_2: f64 = std::f64::consts::LN_2;
/// Relative cutoff for Poisson-mixture terms.
const MIX_TOL: f64 = 1e-15;

/// Chi-square law in dimension `p` with noncentrality `lambda` (= ||theta||^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareLaw {
    p: u32,
    lambda: f64,
}

impl ChiSquareLaw {
    pub fn new(p: u32, lambda: f64) -> Result<Self> {
        if p < 1 {
            return Err(Error::Domain(format!("dimension p must be >= 1, got {p}")));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Domain(format!(
                "noncentrality must be finite and >= 0, got {lambda}"
            )));
        }
        Ok(Self { p, lambda })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// log of the central chi-square density with k degrees of freedom.
    fn ln_central_density(k: f64, y: f64) -> f64 {
        (k / 2.0 - 1.0) * y.ln() - y / 2.0 - (k / 2.0) * LN_2 - ln_gamma(k / 2.0)
    }

    /// Density f_p(y; lambda), by the Poisson mixture over central densities.
    ///
    /// Terms are evaluated in log space, starting at the Poisson mode
    /// floor(lambda/2) and expanding both ways until a term's relative
    /// contribution drops below 1e-15 past the term-ratio peak.
    pub fn density(&self, y: f64) -> Result<f64> {
        if !y.is_finite() || y < 0.0 {
            return Err(Error::Domain(format!("density needs y >= 0, got {y}")));
        }
        Ok(self.density_raw(y))
    }

    pub(crate) fn density_raw(&self, y: f64) -> f64 {
        let p = self.p as f64;
        if y == 0.0 {
            // y^{p/2-1} prefactor: +inf for p=1, 1/2 for p=2, 0 for p>=3
            return match self.p {
                1 => f64::INFINITY,
                2 => 0.5 * (-self.lambda / 2.0).exp(),
                _ => 0.0,
            };
        }
        if self.lambda == 0.0 {
            return Self::ln_central_density(p, y).exp();
        }

        let half_l = self.lambda / 2.0;
        let ln_half_l = half_l.ln();
        let ln_term = |j: u32| {
            let jf = j as f64;
            -half_l + jf * ln_half_l - ln_gamma(jf + 1.0)
                + Self::ln_central_density(p + 2.0 * jf, y)
        };
        // t_{j+1}/t_j = lambda*y / (4 (j+1)(j + p/2)) is decreasing in j, so
        // the mixture terms are unimodal in j.
        let ratio = |j: u32| {
            let jf = j as f64;
            self.lambda * y / (4.0 * (jf + 1.0) * (jf + p / 2.0))
        };

        let j0 = half_l.floor() as u32;
        let mut sum = ln_term(j0).exp();

        let mut j = j0;
        loop {
            let t = ln_term(j + 1).exp();
            sum += t;
            j += 1;
            if ratio(j) < 1.0 && t < MIX_TOL * sum {
                break;
            }
        }
        j = j0;
        while j > 0 {
            let t = ln_term(j - 1).exp();
            sum += t;
            j -= 1;
            // going down, terms grow while ratio(j-1) > 1; stop once decayed
            if (j == 0) || (ratio(j - 1) >= 1.0 && t < MIX_TOL * sum) {
                break;
            }
        }
        sum
    }

    /// G_p(w; lambda) = ∫_0^w y^{-1} f_p(y; lambda) dy for p >= 3.
    ///
    /// Evaluated through the substitution y = w*u, which maps the integral
    /// onto [0, 1] with an integrand u^{-1} f_p(w u; lambda) whose origin
    /// behavior u^{p/2-2} is integrable exactly when p >= 3.
    pub fn g_weight(&self, w: f64) -> Result<f64> {
        self.g_weight_tol(w, &QuadOptions::default())
    }

    /// `g_weight` with caller-controlled quadrature tolerances; identity
    /// checks against phi_K need far tighter tolerances than the default.
    pub fn g_weight_tol(&self, w: f64, opts: &QuadOptions) -> Result<f64> {
        if self.p < 3 {
            return Err(Error::Domain(format!(
                "g_weight needs p >= 3 (y^{{-1}} f_p integrable at 0), got p={}",
                self.p
            )));
        }
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Domain(format!("g_weight needs w >= 0, got {w}")));
        }
        if w == 0.0 {
            return Ok(0.0);
        }
        let r = quad::integrate(|u| self.density_raw(w * u) / u, 0.0, 1.0, opts)?;
        Ok(r.value)
    }

    /// Upper tail mass P(W > w), via the mixture of regularized upper
    /// incomplete gammas (no 1 - CDF cancellation).
    pub fn survival(&self, w: f64) -> Result<f64> {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::Domain(format!("survival needs w >= 0, got {w}")));
        }
        if self.lambda == 0.0 {
            return reg_upper(self.p as f64 / 2.0, w / 2.0);
        }
        let half_l = self.lambda / 2.0;
        let ln_half_l = half_l.ln();
        let ln_pois = |j: u32| {
            let jf = j as f64;
            -half_l + jf * ln_half_l - ln_gamma(jf + 1.0)
        };
        let j0 = half_l.floor() as u32;
        let mut sum = 0.0;
        let mut weight_used = 0.0;

        let mut add = |j: u32| -> Result<bool> {
            let pw = ln_pois(j).exp();
            weight_used += pw;
            sum += pw * reg_upper(self.p as f64 / 2.0 + j as f64, w / 2.0)?;
            Ok(pw < 1e-18 && weight_used > 0.5)
        };

        add(j0)?;
        let mut j = j0 + 1;
        loop {
            if add(j)? {
                break;
            }
            j += 1;
        }
        j = j0;
        while j > 0 {
            if add(j - 1)? {
                break;
            }
            j -= 1;
        }
        Ok(sum)
    }

    /// Smallest w (to ~0.1% relative) with survival mass below `mass`.
    /// Used to truncate the risk integrals' outer domain.
    pub fn upper_tail_cutoff(&self, mass: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&mass) || mass <= 0.0 {
            return Err(Error::Domain(format!(
                "tail mass must be in (0, 1), got {mass}"
            )));
        }
        let mut hi = (self.p as f64 + self.lambda).max(1.0);
        let mut iter = 0;
        while self.survival(hi)? > mass {
            hi *= 2.0;
            iter += 1;
            if iter > 60 {
                return Err(Error::Domain("tail cutoff bracket failed".into()));
            }
        }
        let mut lo = hi / 2.0;
        if iter == 0 {
            lo = 0.0;
        }
        while hi - lo > 1e-3 * hi {
            let mid = 0.5 * (lo + hi);
            if self.survival(mid)? > mass {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}
