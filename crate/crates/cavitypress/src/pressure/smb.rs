//! Shannon-McMillan-Breiman ratio series, ergodic averages along Folner
//! sets, and the pressure-minus-energy prediction they converge to.

use crate::error::{Error, Result};
use crate::gibbs::oracle::{MeasureOracle, PointSource};
use crate::gibbs::partition::Model;
use crate::group::{FiniteRegion, FolnerSchedule, GroupDescriptor};
use crate::pressure::series::ConvergenceSeries;
use crate::subshift::Pattern;

/// Pattern of the point `x` on `region`: `q(t) = x(t h)` for the
/// translated point `h . x`.
pub(crate) fn point_pattern(
    desc: &GroupDescriptor,
    source: &PointSource,
    region: &FiniteRegion,
    h: &crate::group::GroupPoint,
) -> Result<Pattern> {
    let mut pairs = Vec::new();
    for t in region.iter() {
        pairs.push((t.clone(), source.value_at(&desc.mul(t, h))?));
    }
    Ok(Pattern::from_pairs(pairs))
}

/// `-|T_n|^{-1} ln nu([x_{T_n}])` along the schedule, evaluated at the
/// point `x`.
pub fn smb_ratio_series(
    nu: &MeasureOracle,
    x: &PointSource,
    desc: &GroupDescriptor,
    sched: &FolnerSchedule,
    n_max: usize,
) -> Result<ConvergenceSeries> {
    if n_max == 0 {
        return Err(Error::precondition("empty schedule: n_max must be positive"));
    }
    let mut series = ConvergenceSeries::new("smb_ratio");
    for n in 1..=n_max {
        let t = sched.t_set(desc, n);
        let pat = point_pattern(desc, x, &t, &desc.identity())?;
        let p = nu.cylinder_prob(&pat)?;
        if p <= 0.0 {
            return Err(Error::precondition(format!(
                "zero-probability cylinder at n={n}"
            )));
        }
        series.push_point(n, t.len(), -p.ln() / t.len() as f64);
    }
    Ok(series)
}

/// The Gurevich-Tempelman prediction the SMB ratios converge to for an
/// ergodic `nu`: `P(phi) - [G:H]^{-1} E_nu[phi_K]`.
pub fn gt_prediction(model: &Model, pressure: f64, nu: &MeasureOracle) -> Result<f64> {
    let desc = model.desc;
    let region = model.phi.phi_k_region(desc);
    let mean = nu.expect_local(&region, &|p| model.phi.phi_k(desc, p))?;
    Ok(pressure - mean / desc.index() as f64)
}

/// Folner averages `|F_n|^{-1} sum_{h in F_n} f(h . x)` for a local
/// observable reading the sites of `region`.
pub fn ergodic_average(
    source: &PointSource,
    desc: &GroupDescriptor,
    region: &FiniteRegion,
    f: &dyn Fn(&Pattern) -> Result<f64>,
    sched: &FolnerSchedule,
    n_max: usize,
) -> Result<ConvergenceSeries> {
    if n_max == 0 {
        return Err(Error::precondition("empty schedule: n_max must be positive"));
    }
    let mut series = ConvergenceSeries::new("ergodic_average");
    for n in 1..=n_max {
        let fset = sched.f_set(desc, n);
        let mut acc = 0.0;
        for h in fset.iter() {
            acc += f(&point_pattern(desc, source, region, h)?)?;
        }
        series.push_point(n, fset.len(), acc / fset.len() as f64);
    }
    Ok(series)
}
