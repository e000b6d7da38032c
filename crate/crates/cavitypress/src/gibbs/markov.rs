//! Exact Gibbs measures for one-dimensional nearest-neighbor models,
//! realized as stationary Markov chains over column states (one symbol per
//! transversal layer) with Perron transfer data.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::GroupDescriptor;
use crate::potential::Interaction;
use crate::subshift::{Pattern, SftSpec};

#[derive(Clone, Debug)]
pub struct MarkovOracle {
    /// Symbols per column = the group index `[G:H]`.
    layers: usize,
    alphabet_size: usize,
    /// Column states as layer-value vectors, in index order.
    states: Vec<Vec<u8>>,
    /// Perron root of the transfer matrix.
    rho: f64,
    /// Stationary transition matrix.
    p: Vec<Vec<f64>>,
    /// Stationary distribution.
    pi: Vec<f64>,
    /// Pressure per group site: `log(rho) / layers`.
    pressure: f64,
}

pub(crate) fn perron(b: &[Vec<f64>]) -> (f64, Vec<f64>, Vec<f64>) {
    // Power iteration on B + I (kills periodicity); eigenvalue shifts by 1.
    let n = b.len();
    let mut v = vec![1.0f64; n];
    let mut u = vec![1.0f64; n];
    let mut lam = 0.0;
    for _ in 0..100_000 {
        let mut nv = vec![0.0; n];
        let mut nu = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                nv[i] += b[i][j] * v[j];
                nu[j] += u[i] * b[i][j];
            }
        }
        for i in 0..n {
            nv[i] += v[i];
            nu[i] += u[i];
        }
        let sv: f64 = nv.iter().sum();
        let su: f64 = nu.iter().sum();
        let new_lam = sv;
        for i in 0..n {
            nv[i] /= sv;
            nu[i] /= su;
        }
        let done = v
            .iter()
            .zip(&nv)
            .chain(u.iter().zip(&nu))
            .all(|(a, b)| (a - b).abs() < 1e-16);
        v = nv;
        u = nu;
        lam = new_lam - 1.0;
        if done {
            break;
        }
    }
    (lam, v, u)
}

impl MarkovOracle {
    /// Build the unique Gibbs chain of a 1D nearest-neighbor model. The
    /// shift acts on columns `K x {x}`; window and term shapes must span at
    /// most two adjacent columns.
    pub fn from_nearest_neighbor(
        desc: &GroupDescriptor,
        sft: &SftSpec,
        phi: &Interaction,
    ) -> Result<Self> {
        if desc.rank() != 1 {
            return Err(Error::precondition("transfer construction needs rank 1"));
        }
        let span_ok = |shape: &[crate::group::GroupPoint]| {
            let lo = shape.iter().map(|p| p.lattice[0]).min().unwrap();
            let hi = shape.iter().map(|p| p.lattice[0]).max().unwrap();
            hi - lo <= 1
        };
        if !span_ok(sft.window()) || phi.terms().iter().any(|t| !span_ok(t.shape())) {
            return Err(Error::precondition(
                "window and term shapes must span at most two adjacent columns",
            ));
        }
        let m = desc.index();
        let s = sft.alphabet.size();
        let count = s.pow(m as u32);
        if count > 4096 {
            return Err(Error::budget("column state space larger than 4096"));
        }
        let states: Vec<Vec<u8>> = (0..count)
            .map(|mut c| {
                let mut v = vec![0u8; m];
                for slot in v.iter_mut() {
                    *slot = (c % s) as u8;
                    c /= s;
                }
                v
            })
            .collect();

        // Two-column block pattern for (c at x=0, c' at x=1).
        let block = |c: &[u8], cp: &[u8]| {
            Pattern::from_pairs(
                (0..m)
                    .map(|l| (crate::group::GroupPoint::new(l, vec![0]), c[l]))
                    .chain((0..m).map(|l| (crate::group::GroupPoint::new(l, vec![1]), cp[l]))),
            )
        };
        let mut b = vec![vec![0.0f64; count]; count];
        for (i, c) in states.iter().enumerate() {
            for (j, cp) in states.iter().enumerate() {
                let pat = block(c, cp);
                if !crate::subshift::locally_admissible(desc, sft, &pat) {
                    continue;
                }
                // Energy attributed to this step: term translates whose
                // leftmost column is x = 0.
                let mut w = 0.0;
                for (ti, g) in phi.instances_inside(desc, &pat.support()) {
                    let term = &phi.terms()[ti];
                    let min_col = term
                        .shape()
                        .iter()
                        .map(|a| desc.mul(a, &g).lattice[0])
                        .min()
                        .unwrap();
                    if min_col == 0 {
                        w += phi
                            .instance_value(desc, ti, &g, &pat)
                            .expect("block covers the instance");
                    }
                }
                b[i][j] = (-w).exp();
            }
        }

        // Restrict to the strongly connected part through positive entries;
        // error if admissible states split into several classes.
        let live: Vec<usize> = (0..count)
            .filter(|&i| b[i].iter().any(|&x| x > 0.0) && (0..count).any(|k| b[k][i] > 0.0))
            .collect();
        if live.is_empty() {
            return Err(Error::precondition("no admissible column transitions"));
        }
        let reach = |from: usize, mat: &dyn Fn(usize, usize) -> f64| -> Vec<bool> {
            let mut seen = vec![false; live.len()];
            let mut stack = vec![from];
            seen[from] = true;
            while let Some(x) = stack.pop() {
                for y in 0..live.len() {
                    if !seen[y] && mat(live[x], live[y]) > 0.0 {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            seen
        };
        let fwd = reach(0, &|a, c| b[a][c]);
        let bwd = reach(0, &|a, c| b[c][a]);
        if fwd.iter().any(|&x| !x) || bwd.iter().any(|&x| !x) {
            return Err(Error::precondition(
                "reducible transition structure; the Gibbs chain is not unique",
            ));
        }

        let sub: Vec<Vec<f64>> = live
            .iter()
            .map(|&i| live.iter().map(|&j| b[i][j]).collect())
            .collect();
        let (rho, v, u) = perron(&sub);
        let n = live.len();
        let mut p = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                p[i][j] = sub[i][j] * v[j] / (rho * v[i]);
            }
        }
        let dot: f64 = (0..n).map(|i| u[i] * v[i]).sum();
        let pi: Vec<f64> = (0..n).map(|i| u[i] * v[i] / dot).collect();
        Ok(MarkovOracle {
            layers: m,
            alphabet_size: s,
            states: live.iter().map(|&i| states[i].clone()).collect(),
            rho,
            p,
            pi,
            pressure: rho.ln() / m as f64,
        })
    }

    /// A chain given directly: `pi` and transitions over single-symbol
    /// states (layers = 1). Bernoulli measures use identical rows.
    pub fn from_chain(pi: Vec<f64>, p: Vec<Vec<f64>>) -> Result<Self> {
        let n = pi.len();
        if n == 0 || p.len() != n || p.iter().any(|r| r.len() != n) {
            return Err(Error::precondition("chain dimensions disagree"));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || pi.iter().any(|&x| x < 0.0) {
            return Err(Error::precondition("pi must be a distribution"));
        }
        for (i, row) in p.iter().enumerate() {
            let rs: f64 = row.iter().sum();
            if (rs - 1.0).abs() > 1e-9 || row.iter().any(|&x| x < 0.0) {
                return Err(Error::precondition(format!("row {i} is not stochastic")));
            }
        }
        // Stationarity: pi P = pi.
        for j in 0..n {
            let pj: f64 = (0..n).map(|i| pi[i] * p[i][j]).sum();
            if (pj - pi[j]).abs() > 1e-9 {
                return Err(Error::precondition("pi is not stationary for p"));
            }
        }
        Ok(MarkovOracle {
            layers: 1,
            alphabet_size: n,
            states: (0..n).map(|i| vec![i as u8]).collect(),
            rho: f64::NAN,
            p,
            pi,
            pressure: f64::NAN,
        })
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    /// Chain entropy per group site:
    /// `-(1/layers) sum_i pi_i sum_j p_ij log p_ij`.
    pub fn entropy_rate(&self) -> f64 {
        let mut h = 0.0;
        for (i, row) in self.p.iter().enumerate() {
            for &x in row {
                if x > 0.0 {
                    h -= self.pi[i] * x * x.ln();
                }
            }
        }
        h / self.layers as f64
    }

    fn state_matches(&self, st: &[u8], wants: Option<&BTreeMap<usize, u8>>) -> bool {
        match wants {
            None => true,
            Some(w) => w.iter().all(|(&l, &v)| st[l] == v),
        }
    }

    /// Exact cylinder probability by the forward algorithm over columns.
    pub fn cylinder_prob(&self, pattern: &Pattern) -> Result<f64> {
        if pattern.is_empty() {
            return Ok(1.0);
        }
        // Column constraints: x -> {layer -> value}.
        let mut cols: BTreeMap<i64, BTreeMap<usize, u8>> = BTreeMap::new();
        for (pt, v) in pattern.iter() {
            if pt.lattice.len() != 1 {
                return Err(Error::precondition("markov oracle answers rank-1 cylinders"));
            }
            if v as usize >= self.alphabet_size || pt.coset >= self.layers {
                return Err(Error::precondition("cylinder symbol or layer out of range"));
            }
            cols.entry(pt.lattice[0]).or_default().insert(pt.coset, v);
        }
        let lo = *cols.keys().next().unwrap();
        let hi = *cols.keys().last().unwrap();
        let n = self.states.len();
        let mut alpha: Vec<f64> = (0..n)
            .map(|i| {
                if self.state_matches(&self.states[i], cols.get(&lo)) {
                    self.pi[i]
                } else {
                    0.0
                }
            })
            .collect();
        for x in (lo + 1)..=hi {
            let wants = cols.get(&x);
            let mut next = vec![0.0; n];
            for (j, stj) in self.states.iter().enumerate() {
                if !self.state_matches(stj, wants) {
                    continue;
                }
                let mut acc = 0.0;
                for i in 0..n {
                    acc += alpha[i] * self.p[i][j];
                }
                next[j] = acc;
            }
            alpha = next;
        }
        Ok(alpha.iter().sum())
    }

    /// `mu([target] | [cond])`; errors on a zero-probability condition.
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
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::partition::{specification_prob, Model};
    use crate::group::{FiniteRegion, GroupPoint};
    use crate::subshift::enumerate_patterns;
    use approx::assert_relative_eq;

    fn golden() -> (GroupDescriptor, SftSpec, Interaction, MarkovOracle) {
        let d = GroupDescriptor::zd(1);
        let sft = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, 1.0).unwrap();
        let m = MarkovOracle::from_nearest_neighbor(&d, &sft, &phi).unwrap();
        (d, sft, phi, m)
    }

    const PHI_G: f64 = 1.618033988749894848204586834365638118;

    #[test]
    fn golden_mean_perron_data() {
        let (_, _, _, m) = golden();
        assert_relative_eq!(m.rho(), PHI_G, epsilon = 1e-13);
        assert_relative_eq!(m.pressure(), PHI_G.ln(), epsilon = 1e-13);
        // State order: [0], [1].
        assert_relative_eq!(m.transitions()[0][0], 1.0 / PHI_G, epsilon = 1e-12);
        assert_relative_eq!(m.transitions()[1][0], 1.0, epsilon = 1e-12);
        let mu0 = m.cylinder_prob(&Pattern::from_word(0, &[0])).unwrap();
        assert_relative_eq!(mu0, PHI_G * PHI_G / (1.0 + PHI_G * PHI_G), epsilon = 1e-12);
        // Layer sums to one.
        let mu1 = m.cylinder_prob(&Pattern::from_word(0, &[1])).unwrap();
        assert_relative_eq!(mu0 + mu1, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn golden_mean_entropy() {
        let (_, _, _, m) = golden();
        // For the measure of maximal entropy, h = log phi.
        assert_relative_eq!(m.entropy_rate(), PHI_G.ln(), epsilon = 1e-12);
    }

    #[test]
    fn cylinder_matches_windowed_count() {
        let (d, sft, _, m) = golden();
        let cyl = Pattern::from_word(0, &[0, 1, 0]);
        let exact = m.cylinder_prob(&cyl).unwrap();
        // Windowed ratio on [0, 12): admissible length-12 words with 010 in
        // the middle, uniform weights (lambda = 1).
        let t = FiniteRegion::interval(-4, 7);
        let pats = enumerate_patterns(&d, &sft, &t, 1, 10_000_000).unwrap();
        let hit = pats
            .iter()
            .filter(|p| (0..3).all(|i| p.get(&GroupPoint::lattice(vec![i])) == cyl.get(&GroupPoint::lattice(vec![i]))))
            .count();
        let ratio = hit as f64 / pats.len() as f64;
        assert!((exact - ratio).abs() < 1e-3, "exact {exact} ratio {ratio}");
    }

    #[test]
    fn full_support_short_cylinders() {
        let (d, sft, _, m) = golden();
        for n in 1..=10i64 {
            let t = FiniteRegion::interval(0, n - 1);
            for p in enumerate_patterns(&d, &sft, &t, 1, 10_000_000).unwrap() {
                assert!(m.cylinder_prob(&p).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn dlr_against_specification() {
        let (d, sft, phi, m) = golden();
        let model = Model { desc: &d, sft: &sft, phi: &phi };
        // mu(x_0 | x_{-1}, x_1) equals the one-site specification.
        for (a, b) in [(0u8, 0u8), (0, 1), (1, 0)] {
            let cond = Pattern::from_pairs([
                (GroupPoint::lattice(vec![-1]), a),
                (GroupPoint::lattice(vec![1]), b),
            ]);
            for v in 0..2u8 {
                let target = Pattern::from_word(0, &[v]);
                if target.merge(&cond).is_none() {
                    continue;
                }
                let joint_ok = crate::subshift::locally_admissible(
                    &d,
                    &sft,
                    &target.merge(&cond).unwrap(),
                );
                if !joint_ok {
                    continue;
                }
                let lhs = m.conditional_prob(&target, &cond).unwrap();
                let rhs = specification_prob(&model, &target, &cond, 1_000_000).unwrap();
                assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hardcore_and_ising_pressures() {
        let d = GroupDescriptor::zd(1);
        let gm = SftSpec::golden_mean(&d);
        for lam in [0.25f64, 1.0, 2.0] {
            let phi = Interaction::hardcore(&d, lam).unwrap();
            let m = MarkovOracle::from_nearest_neighbor(&d, &gm, &phi).unwrap();
            let expect = ((1.0 + (1.0 + 4.0 * lam).sqrt()) / 2.0).ln();
            assert_relative_eq!(m.pressure(), expect, epsilon = 1e-12);
        }
        let full = SftSpec::full(&d, crate::subshift::Alphabet::binary());
        for beta in [0.3f64, 1.1] {
            let phi = Interaction::ising(&d, beta, 0.0).unwrap();
            let m = MarkovOracle::from_nearest_neighbor(&d, &full, &phi).unwrap();
            assert_relative_eq!(m.pressure(), (2.0 * beta.cosh()).ln(), epsilon = 1e-12);
        }
        // Full shift with hardcore weight: log(1 + lambda).
        let lam = 0.75;
        let phi = Interaction::hardcore(&d, lam).unwrap();
        let m = MarkovOracle::from_nearest_neighbor(&d, &full, &phi).unwrap();
        assert_relative_eq!(m.pressure(), (1.0 + lam).ln(), epsilon = 1e-12);
    }

    #[test]
    fn product_model_layers() {
        let d = GroupDescriptor::z_cross_z2();
        let sft = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, 1.0).unwrap();
        let m = MarkovOracle::from_nearest_neighbor(&d, &sft, &phi).unwrap();
        assert_eq!(m.layers(), 2);
        // Two independent golden chains: pressure and entropy per group
        // site both log phi.
        assert_relative_eq!(m.pressure(), PHI_G.ln(), epsilon = 1e-12);
        assert_relative_eq!(m.entropy_rate(), PHI_G.ln(), epsilon = 1e-12);
        // Marginal of one layer matches the 1D chain; layers independent.
        let mu0 = PHI_G * PHI_G / (1.0 + PHI_G * PHI_G);
        let a = Pattern::from_pairs([(GroupPoint::new(0, vec![0]), 0u8)]);
        let b = Pattern::from_pairs([(GroupPoint::new(1, vec![0]), 0u8)]);
        assert_relative_eq!(m.cylinder_prob(&a).unwrap(), mu0, epsilon = 1e-12);
        assert_relative_eq!(m.cylinder_prob(&b).unwrap(), mu0, epsilon = 1e-12);
        let ab = a.merge(&b).unwrap();
        assert_relative_eq!(m.cylinder_prob(&ab).unwrap(), mu0 * mu0, epsilon = 1e-12);
        // Invariance under the finite factor: translate by k.
        let k = GroupPoint::new(1, vec![0]);
        let cyl = Pattern::from_pairs([
            (GroupPoint::new(0, vec![0]), 1u8),
            (GroupPoint::new(1, vec![1]), 0u8),
            (GroupPoint::new(0, vec![2]), 0u8),
        ]);
        let moved = cyl.translate(&d, &k);
        assert_relative_eq!(
            m.cylinder_prob(&cyl).unwrap(),
            m.cylinder_prob(&moved).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn from_chain_validation() {
        assert!(MarkovOracle::from_chain(vec![0.5, 0.5], vec![vec![0.5, 0.5]; 2]).is_ok());
        // Bernoulli(3/4).
        let bern =
            MarkovOracle::from_chain(vec![0.25, 0.75], vec![vec![0.25, 0.75]; 2]).unwrap();
        let p = bern.cylinder_prob(&Pattern::from_word(0, &[1, 1, 0])).unwrap();
        assert_relative_eq!(p, 0.75 * 0.75 * 0.25, epsilon = 1e-14);
        // Non-stationary pi rejected.
        assert!(MarkovOracle::from_chain(
            vec![0.9, 0.1],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]]
        )
        .is_err());
        // Reducible nearest-neighbor structure errors out.
        let d = GroupDescriptor::zd(1);
        let no01 = SftSpec::no01_1d();
        let zero = Interaction::zero(2);
        assert!(MarkovOracle::from_nearest_neighbor(&d, &no01, &zero).is_err());
    }
}
