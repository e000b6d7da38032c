//! Variational diagnostics: the pressure-minus-free-energy gap and the
//! coset decomposition of entropy through truncated pasts.

use crate::error::{Error, Result};
use crate::gibbs::oracle::MeasureOracle;
use crate::gibbs::partition::Model;
use crate::group::{coset_past_membership, FiniteRegion, GroupDescriptor, GroupPoint};

/// `P(phi) - [h(nu) + Int phi d nu]`. Nonnegative for every invariant
/// `nu` by the variational principle, and zero exactly at equilibrium.
pub fn variational_gap(model: &Model, pressure: f64, nu: &MeasureOracle) -> Result<f64> {
    let desc = model.desc;
    let h = nu.entropy().ok_or_else(|| {
        Error::precondition("no entropy estimator for this oracle kind")
    })?;
    let region = model.phi.phi_region(desc);
    let energy = nu.expect_local(&region, &|p| model.phi.local_energy(desc, p))?;
    Ok(pressure - (h + energy))
}

/// The box of half-width `depth` across every coset, cut down to the
/// algebraic past of block `i`.
fn truncated_past(desc: &GroupDescriptor, i: usize, depth: usize) -> Result<FiniteRegion> {
    let rank = desc.rank();
    let mut pts = Vec::new();
    let mut stack: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..rank {
        let mut next = Vec::new();
        for v in &stack {
            for x in -(depth as i64)..=depth as i64 {
                let mut q = v.clone();
                q.push(x);
                next.push(q);
            }
        }
        stack = next;
    }
    for v in stack {
        for c in 0..desc.index() {
            let g = GroupPoint::new(c, v.clone());
            if coset_past_membership(desc, i, &g)? {
                pts.push(g);
            }
        }
    }
    Ok(FiniteRegion::from_points(pts))
}

/// Truncated-past estimate of the entropy of `nu` through the coset
/// decomposition: `[G:H]^{-1} sum_i [H(L_i u C_i) - H(C_i)]` with `C_i`
/// the depth-truncated past of block `i`. Nonincreasing in `depth` and
/// independent of the partition in the limit.
pub fn entropy_decomposition(
    nu: &MeasureOracle,
    desc: &GroupDescriptor,
    depth: usize,
) -> Result<f64> {
    if !nu.is_translation_invariant() {
        return Err(Error::precondition(
            "entropy decomposition needs an invariant exact oracle",
        ));
    }
    let shannon = |region: &FiniteRegion| -> Result<f64> {
        if region.is_empty() {
            return Ok(0.0);
        }
        nu.expect_local(region, &|p| {
            let q = nu.cylinder_prob(p)?;
            if q <= 0.0 {
                return Err(Error::precondition("zero-probability cylinder"));
            }
            Ok(-q.ln())
        })
    };
    let mut total = 0.0;
    for (bi, block) in desc.partition().iter().enumerate() {
        let c_i = truncated_past(desc, bi + 1, depth)?;
        let l_i = FiniteRegion::from_points(
            block.iter().map(|&c| GroupPoint::new(c, vec![0; desc.rank()])),
        );
        total += shannon(&l_i.union(&c_i))? - shannon(&c_i)?;
    }
    Ok(total / desc.index() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::markov::MarkovOracle;
    use crate::gibbs::oracle::PointSource;
    use crate::potential::Interaction;
    use crate::subshift::{Alphabet, SftSpec};
    use approx::assert_relative_eq;

    const PHI_G: f64 = 1.618033988749894848204586834365638118;

    #[test]
    fn gibbs_chain_sits_at_equilibrium() {
        let d = GroupDescriptor::zd(1);
        let gm = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, 2.0).unwrap();
        let model = Model { desc: &d, sft: &gm, phi: &phi };
        let chain = MarkovOracle::from_nearest_neighbor(&d, &gm, &phi).unwrap();
        let pressure = chain.pressure();
        let nu = MeasureOracle::Markov(chain);
        let gap = variational_gap(&model, pressure, &nu).unwrap();
        assert!(gap.abs() < 1e-10, "{gap}");
    }

    #[test]
    fn atomic_point_pays_the_full_entropy() {
        let d = GroupDescriptor::zd(1);
        let gm = SftSpec::golden_mean(&d);
        let zero = Interaction::zero(2);
        let model = Model { desc: &d, sft: &gm, phi: &zero };
        let nu = MeasureOracle::Atomic(PointSource::Constant(0));
        let gap = variational_gap(&model, PHI_G.ln(), &nu).unwrap();
        assert_relative_eq!(gap, PHI_G.ln(), epsilon = 1e-12);
    }

    #[test]
    fn biased_bernoulli_gap_is_the_entropy_deficit() {
        let d = GroupDescriptor::zd(1);
        let full = SftSpec::full(&d, Alphabet::binary());
        let zero = Interaction::zero(2);
        let model = Model { desc: &d, sft: &full, phi: &zero };
        let q = 0.75f64;
        let chain = MarkovOracle::from_chain(
            vec![1.0 - q, q],
            vec![vec![1.0 - q, q], vec![1.0 - q, q]],
        )
        .unwrap();
        let nu = MeasureOracle::Markov(chain);
        let gap = variational_gap(&model, 2.0f64.ln(), &nu).unwrap();
        let h34 = -(q * q.ln() + (1.0 - q) * (1.0 - q).ln());
        assert_relative_eq!(gap, 2.0f64.ln() - h34, epsilon = 1e-12);
        assert!(gap > 0.0);
    }

    #[test]
    fn no_entropy_estimator_is_a_precondition_error() {
        let d = GroupDescriptor::zd(1);
        let gm = SftSpec::golden_mean(&d);
        let zero = Interaction::zero(2);
        let model = Model { desc: &d, sft: &gm, phi: &zero };
        let chain = MarkovOracle::from_nearest_neighbor(
            &d,
            &gm,
            &Interaction::hardcore(&d, 1.0).unwrap(),
        )
        .unwrap();
        let torus = crate::gibbs::torus::TorusOracle::new(
            &d,
            &gm,
            &Interaction::hardcore(&d, 1.0).unwrap(),
            vec![6],
            1 << 20,
        )
        .unwrap();
        drop(chain);
        let nu = MeasureOracle::Torus(d.clone(), torus);
        let err = variational_gap(&model, PHI_G.ln(), &nu).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn markov_decomposition_is_exact_at_depth_one() {
        let d = GroupDescriptor::zd(1);
        let gm = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, 1.0).unwrap();
        let chain = MarkovOracle::from_nearest_neighbor(&d, &gm, &phi).unwrap();
        let h = chain.entropy_rate();
        let nu = MeasureOracle::Markov(chain);
        for depth in [1usize, 2, 4] {
            let est = entropy_decomposition(&nu, &d, depth).unwrap();
            assert_relative_eq!(est, h, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_iid_gives_log_alphabet_at_every_depth() {
        let d = GroupDescriptor::zd(1);
        let chain = MarkovOracle::from_chain(
            vec![0.5, 0.5],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap();
        let nu = MeasureOracle::Markov(chain);
        for depth in [0usize, 1, 3] {
            let est = entropy_decomposition(&nu, &d, depth).unwrap();
            assert_relative_eq!(est, 2.0f64.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn product_model_partitions_agree_on_entropy() {
        let d = GroupDescriptor::z_cross_z2();
        let gm = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, 1.0).unwrap();
        let chain = MarkovOracle::from_nearest_neighbor(&d, &gm, &phi).unwrap();
        let nu = MeasureOracle::Markov(chain);
        let d1 = d.clone().with_partition(vec![vec![0, 1]]).unwrap();
        let two = entropy_decomposition(&nu, &d, 2).unwrap();
        let one = entropy_decomposition(&nu, &d1, 2).unwrap();
        assert_relative_eq!(two, one, epsilon = 1e-10);
    }
}
