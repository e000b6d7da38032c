//! Partition functions with free and fixed boundary conditions, the Gibbs
//! specification, and the finite-scale sandwich bound machinery.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::{FiniteRegion, FolnerSchedule, GroupDescriptor, GroupPoint};
use crate::potential::Interaction;
use crate::subshift::{enumerate_patterns, safe_symbol, window_instances, Pattern, SftSpec};

/// A model bundle: group, subshift, potential.
#[derive(Clone, Copy)]
pub struct Model<'a> {
    pub desc: &'a GroupDescriptor,
    pub sft: &'a SftSpec,
    pub phi: &'a Interaction,
}

/// Which term translates contribute energy to a clamped sum.
enum EnergyScope {
    /// `E(x_T)`: translates fully inside the region.
    Inside(FiniteRegion),
    /// `E(x_T | y)`: translates meeting the region (all sites must still be
    /// determined, otherwise the boundary collar is insufficient).
    Meeting(FiniteRegion),
}

/// Frontier dynamic program: sum of `exp(-E)` over all symbol assignments
/// of `free` (with `clamps` fixed) that are admissible on the combined site
/// set, where `E` collects the term translates selected by `scope`. The
/// state space is capped by `budget`.
fn clamped_sum(
    model: &Model,
    free: &FiniteRegion,
    clamps: &Pattern,
    scope: &EnergyScope,
    budget: usize,
) -> Result<f64> {
    let desc = model.desc;
    let sft = model.sft;
    let all = free.union(&clamps.support());
    let sites = all.to_vec();
    if sites.is_empty() {
        return Ok(1.0);
    }
    let n = sites.len();

    // Hard constraints: every window translate inside the site set.
    let constraints = window_instances(desc, sft, &sites);

    // Weighted instances per the energy scope.
    let index_of: BTreeMap<&GroupPoint, usize> =
        sites.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut weights: Vec<(usize, Vec<usize>)> = Vec::new(); // (term, site idx)
    match scope {
        EnergyScope::Inside(region) => {
            for (ti, g) in model.phi.instances_inside(desc, region) {
                let term = &model.phi.terms()[ti];
                let idx: Vec<usize> = term
                    .shape()
                    .iter()
                    .map(|a| index_of[&desc.mul(a, &g)])
                    .collect();
                weights.push((ti, idx));
            }
        }
        EnergyScope::Meeting(region) => {
            // Anchor any shape site at a region site; require all sites
            // inside the combined set.
            for (ti, term) in model.phi.terms().iter().enumerate() {
                let mut seen = std::collections::BTreeSet::new();
                for a in term.shape() {
                    let ainv = desc.inv(a);
                    for t in region.iter() {
                        let g = desc.mul(&ainv, t);
                        if !seen.insert(g.clone()) {
                            continue;
                        }
                        let mut idx = Vec::with_capacity(term.shape().len());
                        let mut ok = true;
                        for b in term.shape() {
                            match index_of.get(&desc.mul(b, &g)) {
                                Some(&i) => idx.push(i),
                                None => {
                                    ok = false;
                                    break;
                                }
                            }
                        }
                        if !ok {
                            return Err(Error::precondition(format!(
                                "boundary collar too small: a term translate meeting the \
                                 region leaves the site set; supply a collar of radius {}",
                                model.phi.range(desc)
                            )));
                        }
                        weights.push((ti, idx));
                    }
                }
            }
        }
    }

    // Completion step of each instance and liveness per step.
    let c_done: Vec<usize> = constraints
        .iter()
        .map(|inst| *inst.sites.iter().max().unwrap())
        .collect();
    let w_done: Vec<usize> = weights
        .iter()
        .map(|(_, idx)| *idx.iter().max().unwrap())
        .collect();
    // needed_beyond[i] = last step at which site i is read.
    let mut needed_beyond = vec![0usize; n];
    for (ci, inst) in constraints.iter().enumerate() {
        for &i in &inst.sites {
            needed_beyond[i] = needed_beyond[i].max(c_done[ci]);
        }
    }
    for (wi, (_, idx)) in weights.iter().enumerate() {
        for &i in idx {
            needed_beyond[i] = needed_beyond[i].max(w_done[wi]);
        }
    }
    // live[k] = sites assigned by step k still needed after step k.
    let live: Vec<Vec<usize>> = (0..n)
        .map(|k| (0..=k).filter(|&i| needed_beyond[i] > k).collect())
        .collect();
    let mut c_by_step: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ci, &s) in c_done.iter().enumerate() {
        c_by_step[s].push(ci);
    }
    let mut w_by_step: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (wi, &s) in w_done.iter().enumerate() {
        w_by_step[s].push(wi);
    }

    let clamp_at: Vec<Option<u8>> = sites.iter().map(|p| clamps.get(p)).collect();
    let s_count = sft.alphabet.size() as u8;

    // DP over (live-site values) -> accumulated weight.
    let mut states: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    states.insert(Vec::new(), 1.0);
    let mut prev_live: Vec<usize> = Vec::new();
    for k in 0..n {
        let mut next: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        let options: Vec<u8> = match clamp_at[k] {
            Some(c) => vec![c],
            None => (0..s_count).collect(),
        };
        // Position of each live site in the previous key.
        let pos: BTreeMap<usize, usize> =
            prev_live.iter().enumerate().map(|(j, &i)| (i, j)).collect();
        for (key, w) in &states {
            let value_at = |i: usize, v: u8| -> u8 {
                if i == k {
                    v
                } else {
                    key[pos[&i]]
                }
            };
            'sym: for &v in &options {
                for &ci in &c_by_step[k] {
                    let row: Vec<u8> = constraints[ci]
                        .sites
                        .iter()
                        .map(|&i| value_at(i, v))
                        .collect();
                    if sft.is_forbidden(&row) {
                        continue 'sym;
                    }
                }
                let mut factor = 1.0f64;
                for &wi in &w_by_step[k] {
                    let (ti, ref idx) = weights[wi];
                    let row: Vec<u8> = idx.iter().map(|&i| value_at(i, v)).collect();
                    factor *= (-model.phi.terms()[ti].value(&row, s_count as usize)).exp();
                }
                let new_key: Vec<u8> = live[k].iter().map(|&i| value_at(i, v)).collect();
                *next.entry(new_key).or_insert(0.0) += w * factor;
                if next.len() > budget {
                    return Err(Error::budget(format!(
                        "partition state space exceeded {budget}"
                    )));
                }
            }
        }
        states = next;
        prev_live = live[k].clone();
        if states.is_empty() {
            return Ok(0.0);
        }
    }
    Ok(states.values().sum())
}

/// Sum of `exp(-E)` over fills of `free` under `clamps`, with energy from
/// term translates meeting `meeting`. Used by the bracket machinery.
pub(crate) fn clamped_partition(
    model: &Model,
    free: &FiniteRegion,
    clamps: &Pattern,
    meeting: &FiniteRegion,
    budget: usize,
) -> Result<f64> {
    clamped_sum(model, free, clamps, &EnergyScope::Meeting(meeting.clone()), budget)
}

/// `Z(T) = sum over x_T in X_T of exp(-E(x_T))`. With a safe symbol the
/// admissibility of `x_T` is decided exactly by clamping the collar to it;
/// otherwise patterns are enumerated with the requested collar.
pub fn partition_free(model: &Model, t: &FiniteRegion, r: usize, budget: usize) -> Result<f64> {
    if t.is_empty() {
        return Ok(1.0);
    }
    let rc = model
        .sft
        .window_diameter(model.desc)
        .max(model.phi.range(model.desc))
        .max(r);
    match safe_symbol(model.desc, model.sft, budget)? {
        Some(s0) => {
            let collar = t.collar(model.desc, rc);
            let clamps =
                Pattern::from_pairs(collar.iter().map(|p| (p.clone(), s0)));
            clamped_sum(model, t, &clamps, &EnergyScope::Inside(t.clone()), budget)
        }
        None => {
            let pats = enumerate_patterns(model.desc, model.sft, t, r, budget)?;
            let parts: Vec<f64> = pats
                .iter()
                .map(|p| (-model.phi.energy(model.desc, p)).exp())
                .collect();
            Ok(crate::potential::compensated_sum(parts))
        }
    }
}

/// `Z(T | y)`: boundary condition `y` on a collar of `T`.
pub fn partition_boundary(
    model: &Model,
    t: &FiniteRegion,
    y: &Pattern,
    budget: usize,
) -> Result<f64> {
    clamped_sum(model, t, y, &EnergyScope::Meeting(t.clone()), budget)
}

/// `pi^y_T([x_T]) = exp(-E(x_T|y)) / Z(T|y)`.
pub fn specification_prob(
    model: &Model,
    x_t: &Pattern,
    y: &Pattern,
    budget: usize,
) -> Result<f64> {
    let t = x_t.support();
    let z = partition_boundary(model, &t, y, budget)?;
    if z <= 0.0 {
        return Err(Error::precondition(
            "zero partition function under the given boundary",
        ));
    }
    let e = model
        .phi
        .boundary_energy(model.desc, Some(model.sft), x_t, y)?;
    Ok((-e).exp() / z)
}

/// `r_n = |T_hat \ T| (log|S| + 4 norm) + 2 sup_z |E(z_T|z) - E(z_T)|`,
/// the sup taken exactly over admissible local classes of the straddling
/// term translates.
pub fn rn_bound(
    model: &Model,
    t: &FiniteRegion,
    t_hat: &FiniteRegion,
    budget: usize,
) -> Result<f64> {
    if !t.is_subset(t_hat) {
        return Err(Error::precondition("T must be contained in T_hat"));
    }
    let desc = model.desc;
    let s = model.sft.alphabet.size() as f64;
    let norm = model.phi.norm(desc, Some(model.sft));
    let volume_term = (t_hat.len() - t.len()) as f64 * (s.ln() + 4.0 * norm);

    // Straddling translates: meeting T but not inside it. Their sites all
    // lie within range of T.
    let rc = model.phi.range(desc);
    let collar = t.collar(desc, rc.max(1));
    let combined = t.union(&collar);
    let mut straddle_sites = FiniteRegion::new();
    let mut straddlers: Vec<(usize, GroupPoint)> = Vec::new();
    for (ti, term) in model.phi.terms().iter().enumerate() {
        let mut seen = std::collections::BTreeSet::new();
        for a in term.shape() {
            let ainv = desc.inv(a);
            for p in t.iter() {
                let g = desc.mul(&ainv, p);
                if !seen.insert(g.clone()) {
                    continue;
                }
                let sites: Vec<GroupPoint> =
                    term.shape().iter().map(|b| desc.mul(b, &g)).collect();
                let inside_t = sites.iter().all(|q| t.contains(q));
                if inside_t {
                    continue;
                }
                debug_assert!(sites.iter().all(|q| combined.contains(q)));
                for q in &sites {
                    straddle_sites.insert(q.clone());
                }
                straddlers.push((ti, g));
            }
        }
    }
    let sup = if straddlers.is_empty() {
        0.0
    } else {
        let pats = enumerate_patterns(desc, model.sft, &straddle_sites, 1, budget)?;
        let mut best = 0.0f64;
        for p in &pats {
            let parts: Vec<f64> = straddlers
                .iter()
                .map(|(ti, g)| {
                    model
                        .phi
                        .instance_value(desc, *ti, g, p)
                        .expect("straddle sites cover the instance")
                })
                .collect();
            best = best.max(crate::potential::compensated_sum(parts).abs());
        }
        best
    };
    Ok(volume_term + 2.0 * sup)
}

/// Largest `|log(mu([x_T]) e^{E(x_T)} Z(T))|` over all admissible cylinders
/// on `T_n`, evaluated against an exact cylinder oracle. The sandwich bound
/// says this never exceeds `r_n`.
pub fn sandwich_defect(
    model: &Model,
    cylinder_prob: &dyn Fn(&Pattern) -> Result<f64>,
    sched: &FolnerSchedule,
    n: usize,
    budget: usize,
) -> Result<f64> {
    let t = sched.t_set(model.desc, n);
    let z = partition_free(model, &t, 1, budget)?;
    let pats = enumerate_patterns(model.desc, model.sft, &t, 1, budget)?;
    let mut worst = 0.0f64;
    for p in &pats {
        let mu = cylinder_prob(p)?;
        if mu <= 0.0 {
            return Err(Error::precondition(
                "oracle assigns zero probability to an admissible cylinder",
            ));
        }
        let e = model.phi.energy(model.desc, p);
        let v = mu.ln() + e + z.ln();
        worst = worst.max(v.abs());
    }
    Ok(worst)
}
