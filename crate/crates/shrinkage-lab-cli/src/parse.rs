//! Parsing of family and marginal specifiers from the command line.
//!
//! Families: `js`, `positive-part`, `constant=C`, `alpha=A`, `li-kuo=B1`,
//! `kt1=R`, `kt2=R`. Marginals (qa-check): `js`, `identity`, `power=E`,
//! `alpha=A`.

use shrinkage_lab::estimators::{Family, PhiFamily};
use shrinkage_lab::quasi_adm::MarginalFn;
use shrinkage_lab::Error;

fn split_kv(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once('=') {
        Some((k, v)) => (k.trim(), Some(v.trim())),
        None => (spec.trim(), None),
    }
}

fn num(name: &str, v: Option<&str>) -> Result<f64, Error> {
    let raw = v.ok_or_else(|| Error::Domain(format!("{name} needs a parameter, e.g. {name}=2")))?;
    raw.parse::<f64>()
        .map_err(|_| Error::Domain(format!("cannot parse number {raw:?} in {name} spec")))
}

pub fn parse_family(spec: &str, p: u32) -> Result<PhiFamily, Error> {
    let (kind, val) = split_kv(spec);
    match kind {
        "js" | "james-stein" => PhiFamily::james_stein(p),
        "positive-part" | "js+" => PhiFamily::new(Family::PositivePart, p),
        "constant" => PhiFamily::new(Family::Constant(num(kind, val)?), p),
        "alpha" => PhiFamily::new(Family::Alpha(num(kind, val)?), p),
        "li-kuo" => PhiFamily::new(Family::LiKuo1(num(kind, val)?), p),
        "kt1" => PhiFamily::new(Family::KurikiTakemura1(num(kind, val)?), p),
        "kt2" => PhiFamily::new(Family::KurikiTakemura2(num(kind, val)?), p),
        other => Err(Error::Domain(format!(
            "unknown family {other:?}; expected js, positive-part, constant=C, alpha=A, li-kuo=B1, kt1=R, kt2=R"
        ))),
    }
}

pub fn parse_marginal(spec: &str, p: u32) -> Result<MarginalFn, Error> {
    let (kind, val) = split_kv(spec);
    match kind {
        "js" | "james-stein" => MarginalFn::james_stein(p),
        "identity" | "flat" => MarginalFn::power_law(p, 0.0),
        "power" => MarginalFn::power_law(p, num(kind, val)?),
        "alpha" => MarginalFn::alpha(p, num(kind, val)?),
        other => Err(Error::Domain(format!(
            "unknown marginal {other:?}; expected js, identity, power=E, alpha=A"
        ))),
    }
}

/// Comma-separated list of f64, e.g. "0,1,4,9,25".
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let vals: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|_| Error::Grid(format!("cannot parse grid {spec:?}")))?;
    if vals.is_empty() {
        return Err(Error::Grid("grid is empty".into()));
    }
    if !vals.windows(2).all(|p| p[1] > p[0]) {
        return Err(Error::Grid("grid must be strictly increasing".into()));
    }
    Ok(vals)
}
