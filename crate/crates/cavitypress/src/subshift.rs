//! Alphabets, patterns, subshifts of finite type, admissibility and pattern
//! enumeration, safe symbols, gap-gluing certificates, and mixing checks.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::{region_distance, FiniteRegion, GroupDescriptor, GroupPoint};

/// A finite ordered alphabet. Symbols are addressed by index everywhere;
/// labels exist for I/O.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(symbols: Vec<String>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::precondition("alphabet must be nonempty"));
        }
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if !seen.insert(s.clone()) {
                return Err(Error::precondition(format!("duplicate symbol {s}")));
            }
        }
        Ok(Alphabet { symbols })
    }

    pub fn binary() -> Self {
        Alphabet { symbols: vec!["0".into(), "1".into()] }
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn label(&self, i: u8) -> &str {
        &self.symbols[i as usize]
    }

    pub fn index(&self, label: &str) -> Option<u8> {
        self.symbols.iter().position(|s| s == label).map(|i| i as u8)
    }
}

/// A finite pattern: a total assignment of symbol indices on a finite
/// support.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Pattern {
    map: BTreeMap<GroupPoint, u8>,
}

impl Pattern {
    pub fn empty() -> Self {
        Pattern { map: BTreeMap::new() }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (GroupPoint, u8)>) -> Self {
        Pattern { map: pairs.into_iter().collect() }
    }

    /// 1D convenience: values at consecutive lattice sites starting at `lo`.
    pub fn from_word(lo: i64, word: &[u8]) -> Self {
        Pattern::from_pairs(
            word.iter()
                .enumerate()
                .map(|(i, &v)| (GroupPoint::lattice(vec![lo + i as i64]), v)),
        )
    }

    pub fn support(&self) -> FiniteRegion {
        FiniteRegion::from_points(self.map.keys().cloned())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, p: &GroupPoint) -> Option<u8> {
        self.map.get(p).copied()
    }

    pub fn set(&mut self, p: GroupPoint, v: u8) {
        self.map.insert(p, v);
    }

    pub fn unset(&mut self, p: &GroupPoint) {
        self.map.remove(p);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupPoint, u8)> {
        self.map.iter().map(|(p, &v)| (p, v))
    }

    /// Values in sorted-support order.
    pub fn values(&self) -> Vec<u8> {
        self.map.values().copied().collect()
    }

    /// `g . p`: support moves to `supp(p) g^{-1}` and `(g.x)(h) = x(h g)`.
    pub fn translate(&self, desc: &GroupDescriptor, g: &GroupPoint) -> Pattern {
        let ginv = desc.inv(g);
        Pattern {
            map: self
                .map
                .iter()
                .map(|(t, &v)| (desc.mul(t, &ginv), v))
                .collect(),
        }
    }

    pub fn restrict(&self, region: &FiniteRegion) -> Pattern {
        Pattern {
            map: self
                .map
                .iter()
                .filter(|(p, _)| region.contains(p))
                .map(|(p, &v)| (p.clone(), v))
                .collect(),
        }
    }

    /// Concatenation on disjoint or agreeing supports; None on conflict.
    pub fn merge(&self, other: &Pattern) -> Option<Pattern> {
        let mut map = self.map.clone();
        for (p, &v) in &other.map {
            if let Some(&old) = map.get(p) {
                if old != v {
                    return None;
                }
            } else {
                map.insert(p.clone(), v);
            }
        }
        Some(Pattern { map })
    }
}

/// A subshift of finite type: window `M` and forbidden assignments on `M`.
#[derive(Clone, Debug)]
pub struct SftSpec {
    pub alphabet: Alphabet,
    /// Sorted window sites; forbidden rows are indexed in this order.
    window: Vec<GroupPoint>,
    forbidden: BTreeSet<Vec<u8>>,
}

impl SftSpec {
    pub fn new(
        alphabet: Alphabet,
        window: FiniteRegion,
        forbidden: BTreeSet<Vec<u8>>,
    ) -> Result<Self> {
        if window.is_empty() {
            return Err(Error::precondition("window must be nonempty"));
        }
        let w: Vec<GroupPoint> = window.to_vec();
        for row in &forbidden {
            if row.len() != w.len() {
                return Err(Error::precondition(
                    "forbidden rows must assign the whole window",
                ));
            }
            if row.iter().any(|&v| v as usize >= alphabet.size()) {
                return Err(Error::precondition("forbidden row uses a symbol out of range"));
            }
        }
        Ok(SftSpec { alphabet, window: w, forbidden })
    }

    /// Full shift: nothing forbidden, single-site window.
    pub fn full(desc: &GroupDescriptor, alphabet: Alphabet) -> Self {
        SftSpec {
            alphabet,
            window: vec![desc.identity()],
            forbidden: BTreeSet::new(),
        }
    }

    /// Hardcore adjacency constraint along each positive lattice generator:
    /// no two adjacent 1s. Window `{e, e_1, ..., e_d}`.
    pub fn golden_mean(desc: &GroupDescriptor) -> Self {
        let d = desc.rank();
        let mut window = vec![desc.identity()];
        for i in 0..d {
            let mut v = vec![0i64; d];
            v[i] = 1;
            window.push(GroupPoint::lattice(v));
        }
        window.sort();
        let e_pos = window
            .iter()
            .position(|p| p.is_identity())
            .expect("identity is in the window");
        let mut forbidden = BTreeSet::new();
        for bits in 0..(1u32 << (d + 1)) {
            let row: Vec<u8> = (0..d + 1).map(|j| ((bits >> j) & 1) as u8).collect();
            if row[e_pos] == 1 && row.iter().enumerate().any(|(j, &v)| j != e_pos && v == 1) {
                forbidden.insert(row);
            }
        }
        SftSpec { alphabet: Alphabet::binary(), window, forbidden }
    }

    /// 1D SFT forbidding the word 01; points look like 1...10...0.
    pub fn no01_1d() -> Self {
        let window = vec![GroupPoint::lattice(vec![0]), GroupPoint::lattice(vec![1])];
        let mut forbidden = BTreeSet::new();
        forbidden.insert(vec![0u8, 1u8]);
        SftSpec { alphabet: Alphabet::binary(), window, forbidden }
    }

    pub fn window(&self) -> &[GroupPoint] {
        &self.window
    }

    pub fn window_region(&self) -> FiniteRegion {
        FiniteRegion::from_points(self.window.iter().cloned())
    }

    pub fn forbidden(&self) -> &BTreeSet<Vec<u8>> {
        &self.forbidden
    }

    pub fn is_forbidden(&self, row: &[u8]) -> bool {
        self.forbidden.contains(row)
    }

    /// Largest word-metric distance between two window sites: a window
    /// translate meeting a region stays within this radius of it.
    pub fn window_diameter(&self, desc: &GroupDescriptor) -> usize {
        let mut r = 0;
        for a in &self.window {
            let ainv = desc.inv(a);
            for b in &self.window {
                if let Some(n) = crate::group::word_norm(desc, &desc.mul(b, &ainv), 64) {
                    r = r.max(n);
                }
            }
        }
        r
    }

    /// Radius of the window around the identity in the word metric (an upper
    /// bound via coordinate sums, adequate for the shipped presets).
    pub fn window_radius(&self) -> usize {
        self.window
            .iter()
            .map(|p| {
                let lat: i64 = p.lattice.iter().map(|c| c.abs()).sum();
                lat as usize + if p.coset == 0 { 0 } else { 1 }
            })
            .max()
            .unwrap_or(0)
    }
}

/// True iff no fully contained window translate carries a forbidden row.
pub fn locally_admissible(desc: &GroupDescriptor, sft: &SftSpec, p: &Pattern) -> bool {
    if sft.forbidden.is_empty() || p.is_empty() {
        return true;
    }
    let supp = p.support();
    let anchor_inv = desc.inv(&sft.window[0]);
    let mut seen = BTreeSet::new();
    for t in supp.iter() {
        // Candidate g with window[0] g = t.
        let g = desc.mul(&anchor_inv, t);
        if !seen.insert(g.clone()) {
            continue;
        }
        let mut row = Vec::with_capacity(sft.window.len());
        let mut full = true;
        for m in &sft.window {
            match p.get(&desc.mul(m, &g)) {
                Some(v) => row.push(v),
                None => {
                    full = false;
                    break;
                }
            }
        }
        if full && sft.is_forbidden(&row) {
            return false;
        }
    }
    true
}

/// One window translate `Mg` landing inside a site list, recorded as site
/// indices in window order.
pub(crate) struct Instance {
    pub(crate) sites: Vec<usize>,
}

pub(crate) fn window_instances(
    desc: &GroupDescriptor,
    sft: &SftSpec,
    sites: &[GroupPoint],
) -> Vec<Instance> {
    let index_of: BTreeMap<&GroupPoint, usize> =
        sites.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let anchor_inv = desc.inv(&sft.window[0]);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in sites {
        let g = desc.mul(&anchor_inv, t);
        if !seen.insert(g.clone()) {
            continue;
        }
        let mut idx = Vec::with_capacity(sft.window.len());
        let mut ok = true;
        for m in &sft.window {
            match index_of.get(&desc.mul(m, &g)) {
                Some(&i) => idx.push(i),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.push(Instance { sites: idx });
        }
    }
    out
}

/// True iff every completion of the partial window row is forbidden.
pub(crate) fn all_completions_forbidden(sft: &SftSpec, row: &mut [Option<u8>]) -> bool {
    match row.iter().position(|v| v.is_none()) {
        None => {
            let full: Vec<u8> = row.iter().map(|v| v.unwrap()).collect();
            sft.is_forbidden(&full)
        }
        Some(j) => {
            for v in 0..sft.alphabet.size() as u8 {
                row[j] = Some(v);
                if !all_completions_forbidden(sft, row) {
                    row[j] = None;
                    return false;
                }
            }
            row[j] = None;
            true
        }
    }
}

/// Backtracking fill of `region` (plus an `r`-collar) respecting `clamps`,
/// returning up to `limit` distinct restrictions to `region` in symbol-index
/// lexicographic order over the sorted support. `budget` caps search nodes.
pub(crate) fn admissible_fills(
    desc: &GroupDescriptor,
    sft: &SftSpec,
    region: &FiniteRegion,
    clamps: &Pattern,
    extra: &FiniteRegion,
    r: usize,
    budget: usize,
    limit: usize,
) -> Result<Vec<Pattern>> {
    let full = region
        .union(&region.collar(desc, r))
        .union(&clamps.support())
        .union(extra);
    let sites = full.to_vec();
    // Region sites first in sort order, then collar sites, so distinct
    // restrictions appear in lexicographic order and early cutoffs work.
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by_key(|&i| (!region.contains(&sites[i]), sites[i].clone()));
    let rank_of: Vec<usize> = {
        let mut r = vec![0; sites.len()];
        for (step, &i) in order.iter().enumerate() {
            r[i] = step;
        }
        r
    };
    // Instances keyed by every step they touch, so a branch dies as soon as
    // some instance is forbidden under all completions.
    let instances = window_instances(desc, sft, &sites);
    let mut by_touch: Vec<Vec<usize>> = vec![Vec::new(); sites.len()];
    for (k, inst) in instances.iter().enumerate() {
        for &i in &inst.sites {
            by_touch[rank_of[i]].push(k);
        }
    }
    let clamp_at: Vec<Option<u8>> = order
        .iter()
        .map(|&i| clamps.get(&sites[i]))
        .collect();
    let region_steps: Vec<usize> = order
        .iter()
        .enumerate()
        .filter(|(_, &i)| region.contains(&sites[i]))
        .map(|(s, _)| s)
        .collect();

    struct Dfs<'a> {
        sft: &'a SftSpec,
        instances: &'a [Instance],
        by_touch: &'a [Vec<usize>],
        rank_of: &'a [usize],
        clamp_at: &'a [Option<u8>],
        region_steps: &'a [usize],
        assign: Vec<u8>,
        out: BTreeSet<Vec<u8>>,
        nodes: usize,
        budget: usize,
        limit: usize,
    }
    impl Dfs<'_> {
        /// Returns the depth to unwind to; `usize::MAX` means keep going.
        /// After a complete fill, unwind past the collar zone: one witness
        /// fill per region assignment is enough.
        fn go(&mut self, step: usize) -> Result<usize> {
            if self.out.len() >= self.limit {
                return Ok(0);
            }
            if step == self.assign.len() {
                let key: Vec<u8> = self.region_steps.iter().map(|&s| self.assign[s]).collect();
                self.out.insert(key);
                return Ok(self.region_steps.len());
            }
            let options: Vec<u8> = match self.clamp_at[step] {
                Some(c) => vec![c],
                None => (0..self.sft.alphabet.size() as u8).collect(),
            };
            for v in options {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(Error::budget(format!(
                        "pattern enumeration exceeded {} search nodes",
                        self.budget
                    )));
                }
                self.assign[step] = v;
                let ok = self.by_touch[step].iter().all(|&k| {
                    let mut row: Vec<Option<u8>> = self.instances[k]
                        .sites
                        .iter()
                        .map(|&i| {
                            let r = self.rank_of[i];
                            (r <= step).then(|| self.assign[r])
                        })
                        .collect();
                    !all_completions_forbidden(self.sft, &mut row)
                });
                if ok {
                    let unwind = self.go(step + 1)?;
                    if step >= unwind {
                        return Ok(unwind);
                    }
                }
            }
            Ok(usize::MAX)
        }
    }
    let mut dfs = Dfs {
        sft,
        instances: &instances,
        by_touch: &by_touch,
        rank_of: &rank_of,
        clamp_at: &clamp_at,
        region_steps: &region_steps,
        assign: vec![0u8; sites.len()],
        out: BTreeSet::new(),
        nodes: 0,
        budget,
        limit,
    };
    dfs.go(0)?;
    let out = dfs.out;

    let region_sites: Vec<GroupPoint> = region_steps
        .iter()
        .map(|&s| sites[order[s]].clone())
        .collect();
    Ok(out
        .into_iter()
        .map(|vals| Pattern::from_pairs(region_sites.iter().cloned().zip(vals)))
        .collect())
}

/// Patterns on `T` extendable to an `r`-collar, deduplicated and sorted.
/// Exact language restriction when a safe symbol exists.
pub fn enumerate_patterns(
    desc: &GroupDescriptor,
    sft: &SftSpec,
    t: &FiniteRegion,
    r: usize,
    budget: usize,
) -> Result<Vec<Pattern>> {
    admissible_fills(
        desc,
        sft,
        t,
        &Pattern::empty(),
        &FiniteRegion::new(),
        r,
        budget,
        usize::MAX,
    )
}

/// True iff some fill of `region`'s collar extends `clamps` admissibly.
pub fn extendable(
    desc: &GroupDescriptor,
    sft: &SftSpec,
    clamps: &Pattern,
    r: usize,
    budget: usize,
) -> Result<bool> {
    let region = clamps.support();
    let fills = admissible_fills(desc, sft, &region, clamps, &FiniteRegion::new(), r, budget, 1)?;
    Ok(!fills.is_empty())
}

/// A symbol that can replace any single coordinate of any admissible
/// pattern; checked exhaustively over admissible window assignments.
pub fn safe_symbol(desc: &GroupDescriptor, sft: &SftSpec, budget: usize) -> Result<Option<u8>> {
    let wregion = sft.window_region();
    let admissible = enumerate_patterns(desc, sft, &wregion, 0, budget)?;
    's0: for s0 in 0..sft.alphabet.size() as u8 {
        for p in &admissible {
            for site in sft.window() {
                let mut q = p.clone();
                q.set(site.clone(), s0);
                if !locally_admissible(desc, sft, &q) {
                    continue 's0;
                }
            }
        }
        return Ok(Some(s0));
    }
    Ok(None)
}

/// Finite-scale gap-gluing certificate: over all disjoint nonempty
/// `U, V` inside `probe` at word distance at least `gap`, every pair of
/// separately extendable patterns must merge into an extendable pattern.
/// Returns None on pass, or the first witness pair on failure.
pub fn tssm_gap_check(
    desc: &GroupDescriptor,
    sft: &SftSpec,
    gap: usize,
    probe: &FiniteRegion,
    r: usize,
    budget: usize,
) -> Result<Option<(Pattern, Pattern)>> {
    let pts = probe.to_vec();
    let n = pts.len();
    if n > 16 {
        return Err(Error::budget("tssm probe larger than 16 sites"));
    }
    let dist_cap = 4 * n + 4;
    for umask in 1u32..(1 << n) {
        for vmask in 1u32..(1 << n) {
            if umask & vmask != 0 || umask > vmask {
                continue; // unordered pairs once
            }
            let u = FiniteRegion::from_points(
                (0..n).filter(|i| umask >> i & 1 == 1).map(|i| pts[i].clone()),
            );
            let v = FiniteRegion::from_points(
                (0..n).filter(|i| vmask >> i & 1 == 1).map(|i| pts[i].clone()),
            );
            match region_distance(desc, &u, &v, dist_cap) {
                Some(d) if d >= gap => {}
                _ => continue,
            }
            let us = enumerate_patterns(desc, sft, &u, r, budget)?;
            let vs = enumerate_patterns(desc, sft, &v, r, budget)?;
            let joint = enumerate_patterns(desc, sft, &u.union(&v), r, budget)?;
            for pu in &us {
                for pv in &vs {
                    let glued = pu.merge(pv).expect("disjoint supports");
                    if joint.binary_search(&glued).is_err() {
                        return Ok(Some((pu.clone(), pv.clone())));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug)]
pub enum CheckMode {
    Exhaustive,
    Sampled { pairs: usize, seed: u64 },
}

/// Mixing check: for interior patterns `x` on `T` and boundary patterns `y`
/// on the collar outside `T_hat`, some `z` must agree with `x` on `T` and
/// with `y` outside while staying admissible. Returns None on pass or the
/// first failing `(x, y)` pair.
pub fn condition_d_check(
    desc: &GroupDescriptor,
    sft: &SftSpec,
    t: &FiniteRegion,
    t_hat: &FiniteRegion,
    r: usize,
    mode: CheckMode,
    budget: usize,
) -> Result<Option<(Pattern, Pattern)>> {
    if !t.is_subset(t_hat) {
        return Err(Error::precondition("T must be contained in T_hat"));
    }
    let annulus = t_hat.collar(desc, r.max(1));
    let xs = enumerate_patterns(desc, sft, t, r, budget)?;
    let ys = enumerate_patterns(desc, sft, &annulus, r, budget)?;
    // Which (interior, boundary) pairs are jointly realizable: restrictions
    // of admissible fills of T_hat plus collar, computed in one sweep.
    let gluable = admissible_fills(
        desc,
        sft,
        &t.union(&annulus),
        &Pattern::empty(),
        t_hat,
        r,
        budget,
        usize::MAX,
    )?;
    let ok_pair = |x: &Pattern, y: &Pattern| -> bool {
        let glued = x.merge(y).expect("T and the outer annulus are disjoint");
        gluable.binary_search(&glued).is_ok()
    };
    match mode {
        CheckMode::Exhaustive => {
            for x in &xs {
                for y in &ys {
                    if !ok_pair(x, y) {
                        return Ok(Some((x.clone(), y.clone())));
                    }
                }
            }
        }
        CheckMode::Sampled { pairs, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..pairs {
                let x = &xs[rng.gen_range(0..xs.len())];
                let y = &ys[rng.gen_range(0..ys.len())];
                if !ok_pair(x, y) {
                    return Ok(Some((x.clone(), y.clone())));
                }
            }
        }
    }
    Ok(None)
}
