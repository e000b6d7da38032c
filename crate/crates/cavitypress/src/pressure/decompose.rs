//! The sequential decomposition identity: minus the log-probability of a
//! cylinder on `T_n` equals the ordered sum of single-block conditional
//! information terms along the coset pasts.

use crate::error::{Error, Result};
use crate::gibbs::oracle::MeasureOracle;
use crate::group::{local_past, FiniteRegion, FolnerSchedule, GroupDescriptor, GroupPoint};
use crate::subshift::Pattern;

/// One information slot `(i, h)`: the block sites it introduces and the
/// conditioning region, both already right-translated into `T_n`.
#[derive(Clone, Debug)]
pub struct Slot {
    pub block: usize,
    pub h: GroupPoint,
    pub added: Vec<GroupPoint>,
    pub past: FiniteRegion,
}

/// Ordered slots for the decomposition of `T_n`, with the chain property
/// verified: each slot conditions on exactly the union of all earlier
/// blocks, and the slots tile `T_n`.
pub fn decomposition_slots(
    desc: &GroupDescriptor,
    sched: &FolnerSchedule,
    n: usize,
) -> Result<Vec<Slot>> {
    let t_n = sched.t_set(desc, n);
    let f_n = sched.f_set(desc, n);
    let mut slots = Vec::new();
    let mut acc = FiniteRegion::new();
    for (bi, block) in desc.partition().iter().enumerate() {
        for h in f_n.iter() {
            let past = local_past(desc, sched, n, h, bi + 1)?.right_mul(desc, h);
            if past != acc {
                return Err(Error::precondition(format!(
                    "slot ({}, {:?}) does not chain: past has {} sites, accumulated {}",
                    bi + 1,
                    h,
                    past.len(),
                    acc.len()
                )));
            }
            let added: Vec<GroupPoint> = block
                .iter()
                .map(|&c| desc.mul(&GroupPoint::new(c, vec![0; desc.rank()]), h))
                .collect();
            for p in &added {
                acc = acc.union(&FiniteRegion::from_points([p.clone()]));
            }
            slots.push(Slot { block: bi + 1, h: h.clone(), added, past });
        }
    }
    if acc != t_n {
        return Err(Error::precondition("slots do not tile T_n"));
    }
    Ok(slots)
}

/// Evaluate the identity at one cylinder: returns
/// `(residual, information total)` where the total is
/// `sum_i sum_h I(L_i | T^-_{n,h}(i))(h . x)`.
///
/// Each information term is queried at the translated point `h . x`, so
/// the measure's invariance is part of what is being tested.
pub fn decomposition_check(
    nu: &MeasureOracle,
    x: &Pattern,
    desc: &GroupDescriptor,
    sched: &FolnerSchedule,
    n: usize,
) -> Result<(f64, f64)> {
    let t_n = sched.t_set(desc, n);
    for p in t_n.iter() {
        if x.get(p).is_none() {
            return Err(Error::precondition("cylinder pattern does not cover T_n"));
        }
    }
    let slots = decomposition_slots(desc, sched, n)?;
    let mut total = 0.0f64;
    for slot in &slots {
        // Pattern of h . x on the untranslated conditioning region.
        let shift = |region_sites: &mut dyn Iterator<Item = &GroupPoint>| -> Pattern {
            Pattern::from_pairs(region_sites.map(|t| {
                let site = desc.mul(t, &slot.h);
                (t.clone(), x.get(&site).expect("covered above"))
            }))
        };
        let hinv = desc.inv(&slot.h);
        let past_untranslated: Vec<GroupPoint> =
            slot.past.iter().map(|p| desc.mul(p, &hinv)).collect();
        let block_untranslated: Vec<GroupPoint> =
            slot.added.iter().map(|p| desc.mul(p, &hinv)).collect();
        let cond = shift(&mut past_untranslated.iter());
        let joint = shift(&mut past_untranslated.iter().chain(block_untranslated.iter()));
        let pc = nu.cylinder_prob(&cond)?;
        let pj = nu.cylinder_prob(&joint)?;
        if pj <= 0.0 || pc <= 0.0 {
            return Err(Error::precondition(format!(
                "zero conditional at slot ({}, {:?})",
                slot.block, slot.h
            )));
        }
        total += pc.ln() - pj.ln();
    }
    let full = nu.cylinder_prob(&x.restrict(&t_n))?;
    if full <= 0.0 {
        return Err(Error::precondition("cylinder has probability zero"));
    }
    Ok(((-full.ln() - total).abs(), total))
}

/// Exhaustive sweep of the identity over every positive-probability
/// cylinder on `T_n`, against an exact Markov oracle. Returns the maximal
/// residual and the number of cylinders visited.
///
/// Per slot the conditioning and joint probabilities are assembled from a
/// forward filter and an independently computed backward suffix sum, while
/// the leaf cylinder probability comes from the plain forward product, so
/// the two sides of the identity follow different arithmetic paths.
pub fn decomposition_sweep(
    nu: &MeasureOracle,
    desc: &GroupDescriptor,
    sched: &FolnerSchedule,
    n: usize,
    budget: usize,
) -> Result<(f64, usize)> {
    let chain = match nu {
        MeasureOracle::Markov(m) => m,
        _ => return Err(Error::precondition("sweep requires an exact markov oracle")),
    };
    if desc.rank() != 1 {
        return Err(Error::precondition("sweep handles rank-1 lattices"));
    }
    if chain.layers() != desc.index() {
        return Err(Error::precondition("oracle layer count disagrees with the group"));
    }
    decomposition_slots(desc, sched, n)?;

    let cols: Vec<i64> = sched.f_set(desc, n).iter().map(|h| h.lattice[0]).collect();
    let w = cols.len();
    for pair in cols.windows(2) {
        if pair[1] != pair[0] + 1 {
            return Err(Error::precondition("schedule columns are not consecutive"));
        }
    }
    let blocks = desc.partition();
    let states = chain.states();
    let p = chain.transitions();
    let pi = chain.stationary();
    let ns = states.len();
    let s = chain.alphabet_size();

    // block_mask[b][combo][state]: does the state agree with assigning the
    // combo's symbols to block b's layers?
    let mut block_mask: Vec<Vec<Vec<f64>>> = Vec::new();
    for block in blocks {
        let combos = s.pow(block.len() as u32);
        let mut masks = vec![vec![1.0f64; ns]; combos];
        for (u, mask) in masks.iter_mut().enumerate() {
            let mut rem = u;
            for &layer in block {
                let v = (rem % s) as u8;
                rem /= s;
                for (si, st) in states.iter().enumerate() {
                    if st[layer] != v {
                        mask[si] = 0.0;
                    }
                }
            }
        }
        block_mask.push(masks);
    }

    struct Engine<'a> {
        p: &'a [Vec<f64>],
        pi: &'a [f64],
        ns: usize,
        w: usize,
        blocks: usize,
        block_mask: Vec<Vec<Vec<f64>>>,
        budget: usize,
    }

    struct Scratch {
        /// Chosen combo per (block, column), in DFS order.
        chosen: Vec<Vec<usize>>,
        /// Forward filters, one row of `ns` values per DFS depth.
        alpha: Vec<f64>,
        /// Backward suffix products per pass, `(w + 1) * ns` values each.
        beta: Vec<Vec<f64>>,
        nodes: usize,
    }

    impl Engine<'_> {
        fn mask_below(&self, pass: usize, chosen: &[Vec<usize>], c: usize, st: usize) -> f64 {
            let mut m = 1.0;
            for b in 0..pass {
                m *= self.block_mask[b][chosen[b][c]][st];
            }
            m
        }

        /// Suffix sums for the constraints of blocks below `pass`:
        /// `beta[c][s] = P(columns c.. match | state s enters column c)`.
        fn fill_beta(&self, pass: usize, scr: &mut Scratch) {
            let ns = self.ns;
            let beta = &mut scr.beta[pass];
            for st in 0..ns {
                beta[self.w * ns + st] = 1.0;
            }
            for c in (0..self.w).rev() {
                for st in 0..ns {
                    let mut acc = 0.0;
                    for st2 in 0..ns {
                        acc += self.p[st][st2] * beta[(c + 1) * ns + st2];
                    }
                    let mut m = 1.0;
                    for b in 0..pass {
                        m *= self.block_mask[b][scr.chosen[b][c]][st];
                    }
                    beta[c * ns + st] = m * acc;
                }
            }
        }

        fn go(
            &self,
            pass: usize,
            c: usize,
            info: f64,
            scr: &mut Scratch,
        ) -> Result<(f64, usize)> {
            let ns = self.ns;
            let depth = pass * self.w + c;
            // Forward predictive weights into column c under the constraints
            // of blocks <= pass on earlier columns.
            let mut alpha_p = vec![0.0f64; ns];
            if c == 0 {
                alpha_p.copy_from_slice(self.pi);
            } else {
                for st2 in 0..ns {
                    let mut acc = 0.0;
                    for st in 0..ns {
                        acc += scr.alpha[(depth - 1) * ns + st] * self.p[st][st2];
                    }
                    alpha_p[st2] = acc;
                }
            }
            // Suffix weight out of column c for the blocks below this pass.
            let mut suffix = vec![0.0f64; ns];
            for st in 0..ns {
                let mut acc = 0.0;
                for st2 in 0..ns {
                    acc += self.p[st][st2] * scr.beta[pass][(c + 1) * ns + st2];
                }
                suffix[st] = acc;
            }
            let mut cond = 0.0;
            for st in 0..ns {
                cond += alpha_p[st] * self.mask_below(pass, &scr.chosen, c, st) * suffix[st];
            }
            if cond <= 0.0 {
                return Err(Error::precondition("zero conditional in the sweep"));
            }

            let mut worst = 0.0f64;
            let mut count = 0usize;
            for u in 0..self.block_mask[pass].len() {
                scr.nodes += 1;
                if scr.nodes > self.budget {
                    return Err(Error::budget("decomposition sweep exceeded its budget"));
                }
                let mut joint = 0.0;
                for st in 0..ns {
                    let m = self.mask_below(pass, &scr.chosen, c, st)
                        * self.block_mask[pass][u][st];
                    scr.alpha[depth * ns + st] = alpha_p[st] * m;
                    joint += alpha_p[st] * m * suffix[st];
                }
                if joint <= 0.0 {
                    continue;
                }
                scr.chosen[pass][c] = u;
                let info2 = info + cond.ln() - joint.ln();
                let (r, k) = if c + 1 < self.w {
                    self.go(pass, c + 1, info2, scr)?
                } else if pass + 1 < self.blocks {
                    self.fill_beta(pass + 1, scr);
                    self.go(pass + 1, 0, info2, scr)?
                } else {
                    let mut full = 0.0;
                    for st in 0..ns {
                        full += scr.alpha[depth * ns + st];
                    }
                    ((-full.ln() - info2).abs(), 1)
                };
                worst = worst.max(r);
                count += k;
            }
            Ok((worst, count))
        }
    }

    let engine = Engine {
        p,
        pi,
        ns,
        w,
        blocks: blocks.len(),
        block_mask,
        budget,
    };
    let mut scratch = Scratch {
        chosen: vec![vec![0; w]; blocks.len()],
        alpha: vec![0.0; blocks.len() * w * ns],
        beta: vec![vec![0.0; (w + 1) * ns]; blocks.len()],
        nodes: 0,
    };
    engine.fill_beta(0, &mut scratch);
    let (worst, count) = engine.go(0, 0, 0.0, &mut scratch)?;
    if count == 0 {
        return Err(Error::precondition("no positive-probability cylinder on T_n"));
    }
    Ok((worst, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::markov::MarkovOracle;
    use crate::gibbs::oracle::PointSource;
    use crate::potential::Interaction;
    use crate::subshift::SftSpec;

    fn golden_chain(lambda: f64) -> (GroupDescriptor, MeasureOracle) {
        let d = GroupDescriptor::zd(1);
        let gm = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, lambda).unwrap();
        let chain = MarkovOracle::from_nearest_neighbor(&d, &gm, &phi).unwrap();
        (d, MeasureOracle::Markov(chain))
    }

    #[test]
    fn slots_chain_and_tile() {
        let d = GroupDescriptor::zd(1);
        let slots = decomposition_slots(&d, &FolnerSchedule::centered(), 3).unwrap();
        assert_eq!(slots.len(), 7);
        assert!(slots[0].past.is_empty());
        assert_eq!(slots.last().unwrap().past.len(), 6);

        let d2 = GroupDescriptor::z_cross_z2();
        let slots2 = decomposition_slots(&d2, &FolnerSchedule::centered(), 2).unwrap();
        assert_eq!(slots2.len(), 10); // two singleton blocks
        let d2b = d2.with_partition(vec![vec![0, 1]]).unwrap();
        let slots2b = decomposition_slots(&d2b, &FolnerSchedule::centered(), 2).unwrap();
        assert_eq!(slots2b.len(), 5);
    }

    #[test]
    fn single_cylinder_residual_is_tiny() {
        let (d, nu) = golden_chain(1.3);
        let x = Pattern::from_word(-4, &[0, 1, 0, 0, 1, 0, 1, 0, 0]);
        let (residual, total) =
            decomposition_check(&nu, &x, &d, &FolnerSchedule::centered(), 4).unwrap();
        assert!(residual < 1e-12, "{residual}");
        let full = nu.cylinder_prob(&x).unwrap();
        assert!((total + full.ln()).abs() < 1e-12);
    }

    #[test]
    fn sweep_golden_mean() {
        let (d, nu) = golden_chain(1.0);
        let (worst, count) =
            decomposition_sweep(&nu, &d, &FolnerSchedule::centered(), 3, 10_000_000)
                .unwrap();
        // Admissible words of length 7: Fibonacci(9).
        assert_eq!(count, 34);
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn sweep_product_both_partitions() {
        let d = GroupDescriptor::z_cross_z2();
        let gm = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, 1.0).unwrap();
        let chain = MarkovOracle::from_nearest_neighbor(&d, &gm, &phi).unwrap();
        let nu = MeasureOracle::Markov(chain);
        let sched = FolnerSchedule::centered();
        let (w2, c2) = decomposition_sweep(&nu, &d, &sched, 3, usize::MAX).unwrap();
        let d1 = d.clone().with_partition(vec![vec![0, 1]]).unwrap();
        let (w1, c1) = decomposition_sweep(&nu, &d1, &sched, 3, usize::MAX).unwrap();
        // Independent golden-mean layers: 34 * 34 admissible cylinders.
        assert_eq!(c1, 1156);
        assert_eq!(c2, 1156);
        assert!(w1 < 1e-12 && w2 < 1e-12, "{w1} {w2}");
    }

    #[test]
    fn sweep_budget_is_enforced() {
        let (d, nu) = golden_chain(1.0);
        let err = decomposition_sweep(&nu, &d, &FolnerSchedule::centered(), 3, 10)
            .unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn product_model_partitions_agree() {
        let d = GroupDescriptor::z_cross_z2();
        let gm = SftSpec::golden_mean(&d);
        let phi = Interaction::hardcore(&d, 1.0).unwrap();
        let chain = MarkovOracle::from_nearest_neighbor(&d, &gm, &phi).unwrap();
        let nu = MeasureOracle::Markov(chain);
        let d2 = d.clone().with_partition(vec![vec![0, 1]]).unwrap();

        // One random-ish admissible cylinder, both partitions.
        let mut x = Pattern::empty();
        let word0 = [0u8, 1, 0, 0, 1];
        let word1 = [1u8, 0, 0, 1, 0];
        for (j, t) in (-2..=2).enumerate() {
            x.set(GroupPoint::new(0, vec![t]), word0[j]);
            x.set(GroupPoint::new(1, vec![t]), word1[j]);
        }
        let sched = FolnerSchedule::centered();
        let (r1, t1) = decomposition_check(&nu, &x, &d, &sched, 2).unwrap();
        let (r2, t2) = decomposition_check(&nu, &x, &d2, &sched, 2).unwrap();
        assert!(r1 < 1e-12 && r2 < 1e-12, "{r1} {r2}");
        assert!((t1 - t2).abs() < 1e-12);
    }

    #[test]
    fn atomic_measure_decomposes_trivially() {
        let d = GroupDescriptor::zd(1);
        let nu = MeasureOracle::Atomic(PointSource::Constant(0));
        let x = Pattern::from_word(-2, &[0, 0, 0, 0, 0]);
        let (residual, total) =
            decomposition_check(&nu, &x, &d, &FolnerSchedule::centered(), 2).unwrap();
        assert_eq!(residual, 0.0);
        assert_eq!(total, 0.0);
    }
}
