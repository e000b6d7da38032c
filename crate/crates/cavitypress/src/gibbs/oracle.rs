//! A common interface over the concrete measures the laboratory can
//! integrate against: exact chain measures, torus Boltzmann measures,
//! empirical measures from sampling, and atomic or periodic-orbit measures.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gibbs::markov::MarkovOracle;
use crate::gibbs::sampler::EmpiricalOracle;
use crate::gibbs::torus::TorusOracle;
use crate::group::{FiniteRegion, GroupDescriptor, GroupPoint};
use crate::subshift::Pattern;

/// A single point of the shift space given in closed form.
#[derive(Clone, Debug)]
pub enum PointSource {
    /// The constant configuration with this symbol everywhere.
    Constant(u8),
    /// Values on a fundamental domain, repeated with the given lattice
    /// periods in each coordinate.
    Periodic { periods: Vec<i64>, values: BTreeMap<GroupPoint, u8> },
}

impl PointSource {
    pub fn value_at(&self, p: &GroupPoint) -> Result<u8> {
        match self {
            PointSource::Constant(v) => Ok(*v),
            PointSource::Periodic { periods, values } => {
                if p.lattice.len() != periods.len() {
                    return Err(Error::precondition("point rank does not match the periods"));
                }
                let key = GroupPoint::new(
                    p.coset,
                    p.lattice
                        .iter()
                        .zip(periods)
                        .map(|(&x, &q)| x.rem_euclid(q))
                        .collect(),
                );
                values.get(&key).copied().ok_or_else(|| {
                    Error::precondition("periodic point is missing a fundamental-domain value")
                })
            }
        }
    }

    fn pattern_on(&self, region: &FiniteRegion) -> Result<Pattern> {
        let mut pairs = Vec::new();
        for p in region.iter() {
            pairs.push((p.clone(), self.value_at(p)?));
        }
        Ok(Pattern::from_pairs(pairs))
    }
}

/// A measure the laboratory can ask for cylinder probabilities and local
/// expectations.
#[derive(Clone, Debug)]
pub enum MeasureOracle {
    /// Exact stationary chain measure (rank-one models).
    Markov(MarkovOracle),
    /// Exact Boltzmann measure on a torus quotient.
    Torus(GroupDescriptor, TorusOracle),
    /// Empirical measure from a recorded sampler trajectory.
    Empirical(EmpiricalOracle),
    /// Dirac mass at one explicitly given point.
    Atomic(PointSource),
    /// Uniform measure on the orbit of a periodic point under the group
    /// elements of one fundamental domain.
    PeriodicOrbit(GroupDescriptor, PointSource),
}

impl MeasureOracle {
    pub fn cylinder_prob(&self, pattern: &Pattern) -> Result<f64> {
        match self {
            MeasureOracle::Markov(m) => m.cylinder_prob(pattern),
            MeasureOracle::Torus(_, t) => t.cylinder_prob(pattern),
            MeasureOracle::Empirical(e) => e.cylinder_prob(pattern),
            MeasureOracle::Atomic(src) => {
                for (p, v) in pattern.iter() {
                    if src.value_at(p)? != v {
                        return Ok(0.0);
                    }
                }
                Ok(1.0)
            }
            MeasureOracle::PeriodicOrbit(desc, src) => {
                let (hits, total) = orbit_matches(desc, src, pattern)?;
                Ok(hits as f64 / total as f64)
            }
        }
    }

    /// Expectation of a local observable `f` reading the sites of
    /// `region`. The observable receives one admissible pattern on the
    /// region at a time.
    pub fn expect_local(
        &self,
        region: &FiniteRegion,
        f: &dyn Fn(&Pattern) -> Result<f64>,
    ) -> Result<f64> {
        match self {
            MeasureOracle::Markov(m) => {
                let s = m.alphabet_size();
                let sites: Vec<GroupPoint> = region.iter().cloned().collect();
                let combos = (s as f64).powi(sites.len() as i32);
                if combos > 2e6 {
                    return Err(Error::budget("too many local patterns to integrate"));
                }
                let mut acc = 0.0;
                let mut vals = vec![0u8; sites.len()];
                loop {
                    let pat = Pattern::from_pairs(
                        sites.iter().cloned().zip(vals.iter().copied()),
                    );
                    let w = self.cylinder_prob(&pat)?;
                    if w > 0.0 {
                        acc += w * f(&pat)?;
                    }
                    // Mixed-radix increment.
                    let mut k = 0;
                    loop {
                        if k == vals.len() {
                            return Ok(acc);
                        }
                        vals[k] += 1;
                        if (vals[k] as usize) < s {
                            break;
                        }
                        vals[k] = 0;
                        k += 1;
                    }
                }
            }
            MeasureOracle::Torus(_, t) => {
                t.expect_config(&|full| f(&full.restrict(region)))
            }
            MeasureOracle::Empirical(e) => {
                e.expect_local(&|full| f(&full.restrict(region)))
            }
            MeasureOracle::Atomic(src) => f(&src.pattern_on(region)?),
            MeasureOracle::PeriodicOrbit(d, src) => {
                let mut acc = 0.0;
                let mut total = 0usize;
                for g in orbit_elements(d, src)? {
                    let mut pairs = Vec::new();
                    for p in region.iter() {
                        pairs.push((p.clone(), src.value_at(&d.mul(p, &g))?));
                    }
                    acc += f(&Pattern::from_pairs(pairs))?;
                    total += 1;
                }
                Ok(acc / total as f64)
            }
        }
    }

    /// Exact entropy per site where one is available.
    pub fn entropy(&self) -> Option<f64> {
        match self {
            MeasureOracle::Markov(m) => Some(m.entropy_rate()),
            MeasureOracle::Atomic(_) | MeasureOracle::PeriodicOrbit(..) => Some(0.0),
            MeasureOracle::Torus(..) | MeasureOracle::Empirical(_) => None,
        }
    }

    pub fn is_translation_invariant(&self) -> bool {
        !matches!(self, MeasureOracle::Atomic(_) | MeasureOracle::Empirical(_))
    }
}

fn orbit_elements(desc: &GroupDescriptor, src: &PointSource) -> Result<Vec<GroupPoint>> {
    let periods: Vec<i64> = match src {
        PointSource::Constant(_) => vec![1; desc.rank()],
        PointSource::Periodic { periods, .. } => periods.clone(),
    };
    if periods.len() != desc.rank() || periods.iter().any(|&q| q < 1) {
        return Err(Error::precondition("orbit needs one positive period per rank"));
    }
    let mut positions = vec![vec![]];
    for &q in &periods {
        let mut next = Vec::new();
        for p in &positions {
            for c in 0..q {
                let mut r = p.clone();
                r.push(c);
                next.push(r);
            }
        }
        positions = next;
    }
    let mut out = Vec::new();
    for c in 0..desc.index() {
        for p in &positions {
            out.push(GroupPoint::new(c, p.clone()));
        }
    }
    Ok(out)
}

fn orbit_matches(
    desc: &GroupDescriptor,
    src: &PointSource,
    pattern: &Pattern,
) -> Result<(usize, usize)> {
    let elements = orbit_elements(desc, src)?;
    let total = elements.len();
    let mut hits = 0;
    for g in elements {
        let mut ok = true;
        for (p, v) in pattern.iter() {
            if src.value_at(&desc.mul(p, &g))? != v {
                ok = false;
                break;
            }
        }
        if ok {
            hits += 1;
        }
    }
    Ok((hits, total))
}
