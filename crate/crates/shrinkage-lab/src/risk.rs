//! Risk of a shrinkage estimator at noncentrality lambda, computed three
//! independent ways: Monte Carlo over draws of X ~ N_p(theta, I), averaging
//! the unbiased risk statistic (SURE) over the same draws, and chi-square
//! quadrature of the risk identity. The Kubokawa identity for the risk
//! difference against James-Stein is a fourth, cross-checking route.
//!
//! Monte Carlo work is split into fixed-size batches; batch b draws from
//! ChaCha8 stream b of the configured seed and partial sums are merged in
//! batch order, so results are bit-identical for any worker count,
//! including the sequential fallback.

use crate::error::{Error, Result};
use crate::estimators::{Family, PhiFamily};
use crate::grid::W_MAX_PROBE;
use crate::quad::{self, QuadOptions};
use crate::special::ChiSquareLaw;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;

/// How a risk value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RiskMethod {
    MonteCarlo,
    Sure,
    Quadrature,
    KubokawaDiff,
}

/// Risk of `estimator` at `lambda = ||theta||^2`.
///
/// Risk depends on theta only through lambda (orthogonal equivariance);
/// internally theta = (sqrt(lambda), 0, ..., 0).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RiskPoint {
    pub lambda: f64,
    pub estimator: PhiFamily,
    pub value: f64,
    pub method: RiskMethod,
    /// Sample standard error (Monte Carlo / SURE); 0 for quadrature.
    pub std_error: f64,
    /// Accumulated quadrature error bound, when applicable.
    pub quad_error: Option<f64>,
    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
}

/// Monte Carlo configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 1_000_000,
            seed: 20_240_101,
            antithetic: true,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::Domain("n_samples must be >= 2".into()));
        }
        if self.antithetic && !self.n_samples.is_multiple_of(2) {
            return Err(Error::Domain(
                "antithetic pairing needs an even n_samples".into(),
            ));
        }
        Ok(())
    }
}

/// Draws per ChaCha stream; the unit of deterministic work splitting.
const BATCH_UNITS: u64 = 4096;

#[derive(Debug, Clone, Copy, Default)]
struct BatchAcc {
    sum: f64,
    sum_sq: f64,
    units: u64,
}

#[derive(Debug, Clone, Copy)]
enum McStat {
    Loss,
    Sure,
}

/// Squared error ||delta(x) - theta||^2 expressed through w = ||x||^2 and
/// x·theta = x0 sqrt(lambda); avoids materializing the estimate vector.
fn loss_at(fam: &PhiFamily, w: f64, x0: f64, lambda: f64) -> Result<f64> {
    let factor = 1.0 - fam.phi(w)? / w;
    Ok(factor * factor * w - 2.0 * factor * x0 * lambda.sqrt() + lambda)
}

fn sure_at_w(fam: &PhiFamily, w: f64) -> Result<f64> {
    if w == 0.0 {
        return Err(Error::Domain("SURE undefined at ||x||^2 = 0".into()));
    }
    let p = fam.p() as f64;
    let phi = fam.phi(w)?;
    let dphi = fam.phi_prime(w)?;
    Ok(p - phi * (2.0 * (p - 2.0) - phi) / w - 4.0 * dphi)
}

/// Stein's unbiased risk estimate at the observation x.
///
/// At kinks of piecewise families the right derivative is used, matching
/// `phi_prime`; the kink set has measure zero under any lambda.
pub fn sure(fam: &PhiFamily, x: &[f64]) -> Result<f64> {
    if x.len() != fam.p() as usize {
        return Err(Error::DimensionMismatch {
            expected: fam.p() as usize,
            got: x.len(),
        });
    }
    sure_at_w(fam, x.iter().map(|v| v * v).sum())
}

fn run_batch(
    fam: &PhiFamily,
    lambda: f64,
    cfg: &McConfig,
    stat: McStat,
    batch: u64,
    units: u64,
) -> Result<BatchAcc> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(batch);
    let p = fam.p();
    let sqrt_l = lambda.sqrt();
    let mut acc = BatchAcc::default();

    for _ in 0..units {
        let z0: f64 = rng.sample(StandardNormal);
        let mut rest_sq = 0.0;
        for _ in 1..p {
            let z: f64 = rng.sample(StandardNormal);
            rest_sq += z * z;
        }
        let eval = |x0: f64| -> Result<Option<f64>> {
            let w = x0 * x0 + rest_sq;
            if w == 0.0 {
                // probability-zero event; skip rather than poison the run
                return Ok(None);
            }
            let v = match stat {
                McStat::Loss => loss_at(fam, w, x0, lambda)?,
                McStat::Sure => sure_at_w(fam, w)?,
            };
            Ok(Some(v))
        };
        let first = eval(sqrt_l + z0)?;
        let value = if cfg.antithetic {
            match (first, eval(sqrt_l - z0)?) {
                (Some(a), Some(b)) => Some(0.5 * (a + b)),
                _ => None,
            }
        } else {
            first
        };
        if let Some(v) = value {
            acc.sum += v;
            acc.sum_sq += v * v;
            acc.units += 1;
        }
    }
    Ok(acc)
}

fn merge_batches(parts: Vec<BatchAcc>) -> (f64, f64, u64) {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut units = 0;
    for b in parts {
        sum += b.sum;
        sum_sq += b.sum_sq;
        units += b.units;
    }
    (sum, sum_sq, units)
}

fn mc_run(
    fam: &PhiFamily,
    lambda: f64,
    cfg: &McConfig,
    stat: McStat,
    parallel: bool,
) -> Result<RiskPoint> {
    cfg.validate()?;
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let n_units = if cfg.antithetic {
        cfg.n_samples / 2
    } else {
        cfg.n_samples
    };
    let n_batches = n_units.div_ceil(BATCH_UNITS);
    let units_in = |b: u64| {
        if b + 1 == n_batches {
            n_units - b * BATCH_UNITS
        } else {
            BATCH_UNITS
        }
    };

    let parts: Vec<BatchAcc> = if parallel {
        #[cfg(feature = "parallel")]
        {
            (0..n_batches)
                .into_par_iter()
                .map(|b| run_batch(fam, lambda, cfg, stat, b, units_in(b)))
                .collect::<Result<Vec<_>>>()?
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n_batches)
                .map(|b| run_batch(fam, lambda, cfg, stat, b, units_in(b)))
                .collect::<Result<Vec<_>>>()?
        }
    } else {
        (0..n_batches)
            .map(|b| run_batch(fam, lambda, cfg, stat, b, units_in(b)))
            .collect::<Result<Vec<_>>>()?
    };

    let (sum, sum_sq, units) = merge_batches(parts);
    if units < 2 {
        return Err(Error::Domain("fewer than 2 effective samples".into()));
    }
    let n = units as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(RiskPoint {
        lambda,
        estimator: *fam,
        value: mean,
        method: match stat {
            McStat::Loss => RiskMethod::MonteCarlo,
            McStat::Sure => RiskMethod::Sure,
        },
        std_error: (var / n).sqrt(),
        quad_error: None,
        n_samples: Some(cfg.n_samples),
        seed: Some(cfg.seed),
    })
}

/// Monte Carlo risk estimate; parallel over batches when the `parallel`
/// feature is enabled, with output identical to `risk_mc_seq`.
pub fn risk_mc(fam: &PhiFamily, lambda: f64, cfg: &McConfig) -> Result<RiskPoint> {
    mc_run(fam, lambda, cfg, McStat::Loss, cfg!(feature = "parallel"))
}

/// Sequential reference path for `risk_mc`; same batching, same bits.
pub fn risk_mc_seq(fam: &PhiFamily, lambda: f64, cfg: &McConfig) -> Result<RiskPoint> {
    mc_run(fam, lambda, cfg, McStat::Loss, false)
}

/// Mean of SURE over Monte Carlo draws: an unbiased risk estimate sharing
/// no identity with the loss-based `risk_mc` beyond the draws themselves.
pub fn sure_mean_mc(fam: &PhiFamily, lambda: f64, cfg: &McConfig) -> Result<RiskPoint> {
    mc_run(fam, lambda, cfg, McStat::Sure, cfg!(feature = "parallel"))
}

/// Captures the first error raised inside a quadrature integrand, which
/// itself must be an infallible f64 -> f64 closure.
struct ErrSlot(RefCell<Option<Error>>);

impl ErrSlot {
    fn new() -> Self {
        Self(RefCell::new(None))
    }
    fn guard(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    }
    fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Risk by chi-square quadrature of the identity
/// R = p - ∫ [phi(w)(2(p-2)-phi(w))/w + 4 phi'(w)] f_p(w; lambda) dw.
pub fn risk_quadrature(fam: &PhiFamily, lambda: f64) -> Result<RiskPoint> {
    risk_quadrature_tol(fam, lambda, &QuadOptions::default())
}

pub fn risk_quadrature_tol(fam: &PhiFamily, lambda: f64, opts: &QuadOptions) -> Result<RiskPoint> {
    let p = fam.p() as f64;
    let law = ChiSquareLaw::new(fam.p(), lambda)?;
    let w_max = law.upper_tail_cutoff(1e-12)?;
    let slot = ErrSlot::new();
    let integrand = |w: f64| -> f64 {
        let v = (|| {
            let phi = fam.phi(w)?;
            let dphi = fam.phi_prime(w)?;
            Ok((phi * (2.0 * (p - 2.0) - phi) / w + 4.0 * dphi) * law.density_raw(w))
        })();
        slot.guard(v)
    };
    let r = quad::integrate_split(integrand, 0.0, w_max, &fam.kink_points(), opts)?;
    slot.check()?;
    Ok(RiskPoint {
        lambda,
        estimator: *fam,
        value: p - r.value,
        method: RiskMethod::Quadrature,
        std_error: 0.0,
        quad_error: Some(r.error),
        n_samples: None,
        seed: None,
    })
}

fn require_js_limit(fam: &PhiFamily) -> Result<()> {
    let p2 = fam.p() as f64 - 2.0;
    let tail = fam.phi(W_MAX_PROBE)?;
    let dev = (tail - p2).abs();
    if dev >= 0.01 || dev.is_nan() {
        return Err(Error::UnsupportedFamily(format!(
            "{}: phi({W_MAX_PROBE:.0}) = {tail:.4} is not within 0.01 of p-2 = {p2} \
             (the Kubokawa identity needs phi -> p-2)",
            fam.label()
        )));
    }
    Ok(())
}

fn g_weight_memo<'a>(
    law: &'a ChiSquareLaw,
    cache: &'a RefCell<HashMap<u64, f64>>,
) -> impl Fn(f64) -> Result<f64> + 'a {
    move |w: f64| {
        if let Some(&g) = cache.borrow().get(&w.to_bits()) {
            return Ok(g);
        }
        let g = law.g_weight(w)?;
        cache.borrow_mut().insert(w.to_bits(), g);
        Ok(g)
    }
}

/// Kubokawa's identity for R(JS) - R(phi), valid for families with
/// phi(w) -> p-2:
/// 2 ∫ phi'(w) [ (phi(w)-(p-2)) G_p(w;lambda) + 2 f_p(w;lambda) ] dw,
/// the product form of phi - (p-2) + 2 f/G times G, which stays finite as
/// G -> 0 at the origin.
pub fn kubokawa_risk_diff(fam: &PhiFamily, lambda: f64) -> Result<f64> {
    require_js_limit(fam)?;
    let p2 = fam.p() as f64 - 2.0;
    let law = ChiSquareLaw::new(fam.p(), lambda)?;
    let w_max = law.upper_tail_cutoff(1e-12)?;
    let cache = RefCell::new(HashMap::new());
    let g = g_weight_memo(&law, &cache);
    let slot = ErrSlot::new();
    let integrand = |w: f64| -> f64 {
        let v = (|| {
            let dphi = fam.phi_prime(w)?;
            if dphi == 0.0 {
                return Ok(0.0);
            }
            let phi = fam.phi(w)?;
            Ok(dphi * ((phi - p2) * g(w)? + 2.0 * law.density_raw(w)))
        })();
        slot.guard(v)
    };
    let r = quad::integrate_split(
        integrand,
        0.0,
        w_max,
        &fam.kink_points(),
        &QuadOptions::default(),
    )?;
    slot.check()?;
    Ok(2.0 * r.value)
}

/// Risk difference against James-Stein at the origin:
/// 2 ∫ phi'(w) (phi(w) - phi_K(w)) G_p(w; 0) dw with phi_K = Alpha(1).
pub fn risk_diff_at_origin(fam: &PhiFamily) -> Result<f64> {
    require_js_limit(fam)?;
    let phi_k = PhiFamily::new(Family::Alpha(1.0), fam.p())?;
    let law = ChiSquareLaw::new(fam.p(), 0.0)?;
    let w_max = law.upper_tail_cutoff(1e-12)?;
    let cache = RefCell::new(HashMap::new());
    let g = g_weight_memo(&law, &cache);
    let slot = ErrSlot::new();
    let integrand = |w: f64| -> f64 {
        let v = (|| {
            let dphi = fam.phi_prime(w)?;
            if dphi == 0.0 {
                return Ok(0.0);
            }
            let gap = fam.phi(w)? - phi_k.phi(w)?;
            if gap == 0.0 {
                return Ok(0.0);
            }
            Ok(dphi * gap * g(w)?)
        })();
        slot.guard(v)
    };
    let r = quad::integrate_split(
        integrand,
        0.0,
        w_max,
        &fam.kink_points(),
        &QuadOptions::default(),
    )?;
    slot.check()?;
    Ok(2.0 * r.value)
}
