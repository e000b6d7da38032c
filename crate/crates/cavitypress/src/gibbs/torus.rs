//! Exact Boltzmann measures on small torus quotients, used as
//! translation-invariant test measures and as the sampler's state space.

use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupPoint};
use crate::potential::Interaction;
use crate::subshift::{Pattern, SftSpec};

/// Shared torus geometry: layers x wrapped lattice sites.
#[derive(Clone, Debug)]
pub(crate) struct TorusGeometry {
    pub layers: usize,
    pub sides: Vec<i64>,
    /// Site order: layer-major over sorted wrapped positions.
    pub sites: Vec<GroupPoint>,
}

impl TorusGeometry {
    pub fn new(desc: &GroupDescriptor, sides: Vec<i64>) -> Result<Self> {
        if sides.len() != desc.rank() || sides.iter().any(|&s| s < 2) {
            return Err(Error::precondition(
                "torus needs one side of length >= 2 per lattice rank",
            ));
        }
        let mut positions = vec![vec![]];
        for &s in &sides {
            let mut next = Vec::new();
            for p in &positions {
                for c in 0..s {
                    let mut q = p.clone();
                    q.push(c);
                    next.push(q);
                }
            }
            positions = next;
        }
        let mut sites = Vec::new();
        for c in 0..desc.index() {
            for p in &positions {
                sites.push(GroupPoint::new(c, p.clone()));
            }
        }
        sites.sort();
        Ok(TorusGeometry { layers: desc.index(), sides, sites })
    }

    pub fn wrap(&self, p: &GroupPoint) -> GroupPoint {
        let lattice = p
            .lattice
            .iter()
            .zip(&self.sides)
            .map(|(&x, &s)| x.rem_euclid(s))
            .collect();
        GroupPoint::new(p.coset, lattice)
    }

    pub fn index_of(&self, p: &GroupPoint) -> usize {
        let w = self.wrap(p);
        self.sites.binary_search(&w).expect("wrapped site is on the torus")
    }

    /// Window translates on the torus: for every torus element `g`, the
    /// wrapped sites of `M g`, as site indices in window order.
    pub fn window_instances(
        &self,
        desc: &GroupDescriptor,
        window: &[GroupPoint],
    ) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for g in &self.sites {
            out.push(window.iter().map(|m| self.index_of(&desc.mul(m, g))).collect());
        }
        out
    }

    /// Term translates for each torus element, as `(term, site indices)`.
    pub fn term_instances(
        &self,
        desc: &GroupDescriptor,
        phi: &Interaction,
    ) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        for (ti, term) in phi.terms().iter().enumerate() {
            for g in &self.sites {
                out.push((
                    ti,
                    term.shape().iter().map(|a| self.index_of(&desc.mul(a, g))).collect(),
                ));
            }
        }
        out
    }

}

/// Exact Boltzmann distribution over torus-admissible configurations.
#[derive(Clone, Debug)]
pub struct TorusOracle {
    pub(crate) geom: TorusGeometry,
    configs: Vec<Vec<u8>>,
    weights: Vec<f64>,
    z: f64,
}

impl TorusOracle {
    pub fn new(
        desc: &GroupDescriptor,
        sft: &SftSpec,
        phi: &Interaction,
        sides: Vec<i64>,
        max_sites: usize,
    ) -> Result<Self> {
        let geom = TorusGeometry::new(desc, sides)?;
        let n = geom.sites.len();
        if n > max_sites {
            return Err(Error::budget(format!(
                "torus has {n} sites, budget is {max_sites}"
            )));
        }
        let s = sft.alphabet.size();
        let windows = geom.window_instances(desc, sft.window());
        let terms = geom.term_instances(desc, phi);
        let mut configs = Vec::new();
        let mut weights = Vec::new();
        let total = s.pow(n as u32);
        let mut config = vec![0u8; n];
        for code in 0..total {
            let mut c = code;
            for slot in config.iter_mut() {
                *slot = (c % s) as u8;
                c /= s;
            }
            let ok = windows.iter().all(|inst| {
                let row: Vec<u8> = inst.iter().map(|&i| config[i]).collect();
                !sft.is_forbidden(&row)
            });
            if !ok {
                continue;
            }
            let energy: f64 = terms
                .iter()
                .map(|(ti, idx)| {
                    let row: Vec<u8> = idx.iter().map(|&i| config[i]).collect();
                    phi.terms()[*ti].value(&row, s)
                })
                .sum();
            configs.push(config.clone());
            weights.push((-energy).exp());
        }
        if configs.is_empty() {
            return Err(Error::precondition("no torus-admissible configuration"));
        }
        let z: f64 = weights.iter().sum();
        Ok(TorusOracle { geom, configs, weights, z })
    }

    pub fn partition_value(&self) -> f64 {
        self.z
    }

    pub fn config_count(&self) -> usize {
        self.configs.len()
    }

    pub fn sides(&self) -> &[i64] {
        &self.geom.sides
    }

    /// Probability that a configuration matches the (wrapped) pattern.
    pub fn cylinder_prob(&self, pattern: &Pattern) -> Result<f64> {
        // Wrapped requirements; conflicting wraps force probability zero.
        let mut wants: Vec<(usize, u8)> = Vec::new();
        for (p, v) in pattern.iter() {
            if p.lattice.len() != self.geom.sides.len() {
                return Err(Error::precondition("pattern rank does not match the torus"));
            }
            let i = self.geom.index_of(p);
            if let Some(&(_, old)) = wants.iter().find(|&&(j, _)| j == i) {
                if old != v {
                    return Ok(0.0);
                }
                continue;
            }
            wants.push((i, v));
        }
        let mut acc = 0.0;
        for (cfg, w) in self.configs.iter().zip(&self.weights) {
            if wants.iter().all(|&(i, v)| cfg[i] == v) {
                acc += w;
            }
        }
        Ok(acc / self.z)
    }

    pub fn conditional_prob(&self, target: &Pattern, cond: &Pattern) -> Result<f64> {
        let joint = target
            .merge(cond)
            .ok_or_else(|| Error::precondition("target conflicts with the condition"))?;
        let pc = self.cylinder_prob(cond)?;
        if pc <= 0.0 {
            return Err(Error::precondition("conditioning cylinder has probability zero"));
        }
        Ok(self.cylinder_prob(&joint)? / pc)
    }

    /// Expectation of a function of the full configuration pattern.
    pub fn expect_config(&self, f: &dyn Fn(&Pattern) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (cfg, w) in self.configs.iter().zip(&self.weights) {
            let pat = Pattern::from_pairs(
                self.geom.sites.iter().cloned().zip(cfg.iter().copied()),
            );
            acc += w * f(&pat)?;
        }
        Ok(acc / self.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subshift::Alphabet;
    use approx::assert_relative_eq;

    #[test]
    fn golden_mean_four_cycle() {
        let d = GroupDescriptor::zd(1);
        let gm = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, 1.0).unwrap();
        let t = TorusOracle::new(&d, &gm, &phi, vec![4], 20).unwrap();
        // Independent sets of the 4-cycle: the Lucas number L_4 = 7.
        assert_eq!(t.config_count(), 7);
        assert_relative_eq!(t.partition_value(), 7.0);
    }

    #[test]
    fn single_site_uniform() {
        let d = GroupDescriptor::zd(1);
        let full = SftSpec::full(&d, Alphabet::binary());
        let zero = Interaction::zero(2);
        let t = TorusOracle::new(&d, &full, &zero, vec![2], 20).unwrap();
        for v in 0..2u8 {
            let p = t.cylinder_prob(&Pattern::from_word(0, &[v])).unwrap();
            assert_relative_eq!(p, 0.5);
        }
    }

    #[test]
    fn translation_invariant_marginals() {
        let d = GroupDescriptor::zd(1);
        let gm = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, 1.4).unwrap();
        let t = TorusOracle::new(&d, &gm, &phi, vec![5], 20).unwrap();
        let base = t.cylinder_prob(&Pattern::from_word(0, &[1])).unwrap();
        for x in 1..5i64 {
            let p = t.cylinder_prob(&Pattern::from_word(x, &[1])).unwrap();
            assert_relative_eq!(p, base, epsilon = 1e-14);
        }
        // Layer marginal sums to one.
        let p0 = t.cylinder_prob(&Pattern::from_word(0, &[0])).unwrap();
        assert_relative_eq!(p0 + base, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn dlr_on_torus() {
        // Conditional at a site given both neighbors equals the
        // specification.
        let d = GroupDescriptor::zd(1);
        let gm = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, 0.8).unwrap();
        let t = TorusOracle::new(&d, &gm, &phi, vec![6], 20).unwrap();
        let model = crate::gibbs::partition::Model { desc: &d, sft: &gm, phi: &phi };
        let cond = Pattern::from_pairs([
            (GroupPoint::lattice(vec![-1]), 0u8),
            (GroupPoint::lattice(vec![1]), 0u8),
        ]);
        for v in 0..2u8 {
            let target = Pattern::from_word(0, &[v]);
            let lhs = t.conditional_prob(&target, &cond).unwrap();
            let rhs =
                crate::gibbs::partition::specification_prob(&model, &target, &cond, 100_000)
                    .unwrap();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn product_group_torus() {
        let d = GroupDescriptor::z_cross_z2();
        let gm = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, 1.0).unwrap();
        let t = TorusOracle::new(&d, &gm, &phi, vec![4], 20).unwrap();
        // Two independent 4-cycles: 7 * 7 configurations.
        assert_eq!(t.config_count(), 49);
    }
}
