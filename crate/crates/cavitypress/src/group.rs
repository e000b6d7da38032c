//! Group-theoretic machinery: points of `G = K * Z^d`, the lexicographic
//! order and algebraic past on `H = Z^d`, Folner schedules and their
//! diagnostics, transversals, coset pasts, local pasts, and the directed-set
//! bookkeeping used by the sequential decomposition.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// An element of `G` in the normal form `g = k_c * h`, with `c` an index into
/// the transversal and `h` a lattice vector in `Z^d`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupPoint {
    pub lattice: Vec<i64>,
    pub coset: usize,
}

impl GroupPoint {
    pub fn lattice(v: Vec<i64>) -> Self {
        GroupPoint { lattice: v, coset: 0 }
    }

    pub fn new(coset: usize, lattice: Vec<i64>) -> Self {
        GroupPoint { lattice, coset }
    }

    pub fn in_subgroup(&self) -> bool {
        self.coset == 0
    }

    /// Strict lexicographic `h < e` on the lattice part, first coordinate
    /// most significant. Only meaningful for points of `H`.
    pub fn lex_negative(&self) -> bool {
        for &c in &self.lattice {
            if c < 0 {
                return true;
            }
            if c > 0 {
                return false;
            }
        }
        false
    }

    pub fn is_identity(&self) -> bool {
        self.coset == 0 && self.lattice.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{}*{:?}", self.coset, self.lattice)
    }
}

/// A virtually orderable group presented as a finite extension of `Z^d`:
/// transversal labels `K = (k_1, ..., k_m)` with `k_1 = e`, an extension
/// table realizing `k_i k_j = k_m h`, and a partition `L_1 | ... | L_l` of
/// the transversal. The lattice subgroup is assumed central, which covers
/// plain `Z^d` and products with finite abelian groups.
#[derive(Clone, Debug)]
pub struct GroupDescriptor {
    rank: usize,
    labels: Vec<String>,
    /// mult[i][j] = (m, h) with k_i k_j = k_m h.
    mult: Vec<Vec<(usize, Vec<i64>)>>,
    /// Partition of transversal indices into blocks L_1..L_l.
    partition: Vec<Vec<usize>>,
}

impl GroupDescriptor {
    /// Plain `Z^d` with the trivial transversal.
    pub fn zd(rank: usize) -> Self {
        GroupDescriptor {
            rank,
            labels: vec!["e".to_string()],
            mult: vec![vec![(0, vec![0; rank])]],
            partition: vec![vec![0]],
        }
    }

    /// Direct product `Z x Z/2`, transversal `{e, k}`, partition `{e} | {k}`.
    pub fn z_cross_z2() -> Self {
        GroupDescriptor::new(
            1,
            vec!["e".to_string(), "k".to_string()],
            vec![
                vec![(0, vec![0]), (1, vec![0])],
                vec![(1, vec![0]), (0, vec![0])],
            ],
            vec![vec![0], vec![1]],
        )
        .expect("builtin descriptor is valid")
    }

    pub fn new(
        rank: usize,
        labels: Vec<String>,
        mult: Vec<Vec<(usize, Vec<i64>)>>,
        partition: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let desc = GroupDescriptor { rank, labels, mult, partition };
        desc.validate()?;
        Ok(desc)
    }

    fn validate(&self) -> Result<()> {
        let m = self.labels.len();
        if m == 0 || self.rank == 0 {
            return Err(Error::precondition("rank and index must be positive"));
        }
        if m > 8 {
            return Err(Error::precondition("transversal index must be at most 8"));
        }
        let mut seen = BTreeSet::new();
        for l in &self.labels {
            if !seen.insert(l.clone()) {
                return Err(Error::precondition(format!("duplicate transversal label {l}")));
            }
        }
        if self.mult.len() != m || self.mult.iter().any(|r| r.len() != m) {
            return Err(Error::precondition("extension table must be index x index"));
        }
        for row in &self.mult {
            for (c, h) in row {
                if *c >= m || h.len() != self.rank {
                    return Err(Error::precondition("extension table entry out of range"));
                }
            }
        }
        // Identity: k_1 = e acts trivially on both sides.
        for j in 0..m {
            if self.mult[0][j] != (j, vec![0; self.rank]) || self.mult[j][0] != (j, vec![0; self.rank]) {
                return Err(Error::precondition("label 0 must be a two-sided identity"));
            }
        }
        // Associativity over all label triples (lattice parts propagate by
        // centrality, so triples of labels suffice).
        for i in 0..m {
            for j in 0..m {
                for l in 0..m {
                    let (mij, ref hij) = self.mult[i][j];
                    let (lhs_c, ref h1) = self.mult[mij][l];
                    let lhs_h: Vec<i64> = h1.iter().zip(hij).map(|(a, b)| a + b).collect();
                    let (mjl, ref hjl) = self.mult[j][l];
                    let (rhs_c, ref h2) = self.mult[i][mjl];
                    let rhs_h: Vec<i64> = h2.iter().zip(hjl).map(|(a, b)| a + b).collect();
                    if lhs_c != rhs_c || lhs_h != rhs_h {
                        return Err(Error::precondition(format!(
                            "extension table is not associative at labels ({i},{j},{l})"
                        )));
                    }
                }
            }
        }
        // Inverses: every label reaches the identity coset on both sides.
        for i in 0..m {
            let right = (0..m).any(|j| self.mult[i][j].0 == 0);
            let left = (0..m).any(|j| self.mult[j][i].0 == 0);
            if !right || !left {
                return Err(Error::precondition(format!("label {i} has no inverse")));
            }
        }
        // Partition covers the transversal disjointly.
        let mut covered = BTreeSet::new();
        for block in &self.partition {
            if block.is_empty() {
                return Err(Error::precondition("partition blocks must be nonempty"));
            }
            for &c in block {
                if c >= m || !covered.insert(c) {
                    return Err(Error::precondition("partition must be a disjoint cover of the transversal"));
                }
            }
        }
        if covered.len() != m {
            return Err(Error::precondition("partition must cover the transversal"));
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn index(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn partition(&self) -> &[Vec<usize>] {
        &self.partition
    }

    /// Number of blocks `l` in the transversal partition.
    pub fn block_count(&self) -> usize {
        self.partition.len()
    }

    /// Replace the transversal partition (blocks of transversal indices).
    pub fn with_partition(mut self, partition: Vec<Vec<usize>>) -> Result<Self> {
        self.partition = partition;
        self.validate()?;
        Ok(self)
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::new(0, vec![0; self.rank])
    }

    pub fn mul(&self, a: &GroupPoint, b: &GroupPoint) -> GroupPoint {
        let (c, ref h) = self.mult[a.coset][b.coset];
        let lattice = h
            .iter()
            .zip(a.lattice.iter().zip(&b.lattice))
            .map(|(x, (y, z))| x + y + z)
            .collect();
        GroupPoint::new(c, lattice)
    }

    pub fn inv(&self, a: &GroupPoint) -> GroupPoint {
        let j = (0..self.index())
            .find(|&j| self.mult[a.coset][j].0 == 0)
            .expect("validated descriptors have inverses");
        let h = &self.mult[a.coset][j].1;
        let lattice = h
            .iter()
            .zip(&a.lattice)
            .map(|(x, y)| -(x + y))
            .collect();
        GroupPoint::new(j, lattice)
    }

    /// Canonical generators: lattice steps `+-e_i` plus the nontrivial
    /// transversal labels and their inverses. Used for the word metric.
    pub fn generators(&self) -> Vec<GroupPoint> {
        let mut gens = Vec::new();
        for i in 0..self.rank {
            let mut v = vec![0i64; self.rank];
            v[i] = 1;
            gens.push(GroupPoint::lattice(v.clone()));
            v[i] = -1;
            gens.push(GroupPoint::lattice(v));
        }
        for c in 1..self.index() {
            let g = GroupPoint::new(c, vec![0; self.rank]);
            let gi = self.inv(&g);
            gens.push(g);
            gens.push(gi);
        }
        gens.sort();
        gens.dedup();
        gens
    }

    /// Word-metric ball of radius `r` around the identity.
    pub fn ball(&self, r: usize) -> FiniteRegion {
        let gens = self.generators();
        let mut ball: BTreeSet<GroupPoint> = BTreeSet::new();
        ball.insert(self.identity());
        let mut frontier: Vec<GroupPoint> = vec![self.identity()];
        for _ in 0..r {
            let mut next = Vec::new();
            for g in &frontier {
                for s in &gens {
                    let p = self.mul(g, s);
                    if ball.insert(p.clone()) {
                        next.push(p);
                    }
                }
            }
            frontier = next;
        }
        FiniteRegion::from_set(ball)
    }
}

/// A finite subset of `G`, kept sorted and duplicate-free.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FiniteRegion {
    points: BTreeSet<GroupPoint>,
}

impl FiniteRegion {
    pub fn new() -> Self {
        FiniteRegion { points: BTreeSet::new() }
    }

    pub fn from_set(points: BTreeSet<GroupPoint>) -> Self {
        FiniteRegion { points }
    }

    pub fn from_points(points: impl IntoIterator<Item = GroupPoint>) -> Self {
        FiniteRegion { points: points.into_iter().collect() }
    }

    /// 1D lattice interval `[lo, hi]` inside `H`.
    pub fn interval(lo: i64, hi: i64) -> Self {
        FiniteRegion::from_points((lo..=hi).map(|i| GroupPoint::lattice(vec![i])))
    }

    /// Axis-aligned box `prod [lo_i, hi_i]` inside `H`.
    pub fn lattice_box(bounds: &[(i64, i64)]) -> Self {
        let mut pts = vec![vec![]];
        for &(lo, hi) in bounds {
            let mut next = Vec::new();
            for p in &pts {
                for c in lo..=hi {
                    let mut q = p.clone();
                    q.push(c);
                    next.push(q);
                }
            }
            pts = next;
        }
        FiniteRegion::from_points(pts.into_iter().map(GroupPoint::lattice))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &GroupPoint) -> bool {
        self.points.contains(p)
    }

    pub fn insert(&mut self, p: GroupPoint) {
        self.points.insert(p);
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupPoint> {
        self.points.iter()
    }

    pub fn points(&self) -> &BTreeSet<GroupPoint> {
        &self.points
    }

    pub fn to_vec(&self) -> Vec<GroupPoint> {
        self.points.iter().cloned().collect()
    }

    pub fn left_mul(&self, desc: &GroupDescriptor, g: &GroupPoint) -> FiniteRegion {
        FiniteRegion::from_points(self.points.iter().map(|p| desc.mul(g, p)))
    }

    pub fn right_mul(&self, desc: &GroupDescriptor, g: &GroupPoint) -> FiniteRegion {
        FiniteRegion::from_points(self.points.iter().map(|p| desc.mul(p, g)))
    }

    pub fn inverse(&self, desc: &GroupDescriptor) -> FiniteRegion {
        FiniteRegion::from_points(self.points.iter().map(|p| desc.inv(p)))
    }

    pub fn union(&self, other: &FiniteRegion) -> FiniteRegion {
        FiniteRegion::from_points(self.points.union(&other.points).cloned())
    }

    pub fn intersection(&self, other: &FiniteRegion) -> FiniteRegion {
        FiniteRegion::from_points(self.points.intersection(&other.points).cloned())
    }

    pub fn difference(&self, other: &FiniteRegion) -> FiniteRegion {
        FiniteRegion::from_points(self.points.difference(&other.points).cloned())
    }

    pub fn sym_diff(&self, other: &FiniteRegion) -> FiniteRegion {
        FiniteRegion::from_points(self.points.symmetric_difference(&other.points).cloned())
    }

    pub fn is_subset(&self, other: &FiniteRegion) -> bool {
        self.points.is_subset(&other.points)
    }

    /// `(B_r(e) * self) \ self` for the right-invariant word metric.
    pub fn collar(&self, desc: &GroupDescriptor, r: usize) -> FiniteRegion {
        let ball = desc.ball(r);
        let mut out = BTreeSet::new();
        for b in ball.iter() {
            for p in self.iter() {
                let q = desc.mul(b, p);
                if !self.contains(&q) {
                    out.insert(q);
                }
            }
        }
        FiniteRegion::from_set(out)
    }

    /// CSV dump of sorted coordinates: one row per point, `coset,c1,..,cd`.
    pub fn to_csv(&self, desc: &GroupDescriptor) -> String {
        let mut s = String::from("coset");
        for i in 0..desc.rank() {
            s.push_str(&format!(",c{i}"));
        }
        s.push('\n');
        for p in self.iter() {
            s.push_str(&desc.labels()[p.coset]);
            for c in &p.lattice {
                s.push_str(&format!(",{c}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Word length of `g` for the canonical generators, up to `cap`.
pub fn word_norm(desc: &GroupDescriptor, g: &GroupPoint, cap: usize) -> Option<usize> {
    let gens = desc.generators();
    let mut seen: BTreeSet<GroupPoint> = BTreeSet::new();
    seen.insert(desc.identity());
    let mut frontier = vec![desc.identity()];
    if g.is_identity() {
        return Some(0);
    }
    for r in 1..=cap {
        let mut next = Vec::new();
        for p in &frontier {
            for s in &gens {
                let q = desc.mul(s, p);
                if seen.insert(q.clone()) {
                    if &q == g {
                        return Some(r);
                    }
                    next.push(q);
                }
            }
        }
        frontier = next;
    }
    None
}

/// Right-invariant distance `min |a b^{-1}|` between two finite regions.
pub fn region_distance(
    desc: &GroupDescriptor,
    u: &FiniteRegion,
    v: &FiniteRegion,
    cap: usize,
) -> Option<usize> {
    let mut best = None;
    for a in u.iter() {
        for b in v.iter() {
            let d = desc.mul(a, &desc.inv(b));
            if let Some(r) = word_norm(desc, &d, cap) {
                best = Some(best.map_or(r, |x: usize| x.min(r)));
            }
        }
    }
    best
}

/// Rule producing the Folner sets `F_n` of `H`; `T_n := K F_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FolnerShape {
    /// Centered boxes `[-n, n]^d` (the default).
    CenteredBox,
    /// Half-open boxes `[0, n)^d`.
    HalfOpenBox,
}

#[derive(Clone, Copy, Debug)]
pub struct FolnerSchedule {
    pub shape: FolnerShape,
}

impl Default for FolnerSchedule {
    fn default() -> Self {
        FolnerSchedule { shape: FolnerShape::CenteredBox }
    }
}

impl FolnerSchedule {
    pub fn centered() -> Self {
        FolnerSchedule { shape: FolnerShape::CenteredBox }
    }

    pub fn half_open() -> Self {
        FolnerSchedule { shape: FolnerShape::HalfOpenBox }
    }

    /// The Folner set `F_n` of `H` (points with the identity coset label).
    pub fn f_set(&self, desc: &GroupDescriptor, n: usize) -> FiniteRegion {
        let n = n as i64;
        let bounds: Vec<(i64, i64)> = match self.shape {
            FolnerShape::CenteredBox => vec![(-n, n); desc.rank()],
            FolnerShape::HalfOpenBox => vec![(0, n - 1); desc.rank()],
        };
        FiniteRegion::lattice_box(&bounds)
    }

    /// `T_n = K F_n`: one copy of `F_n` per transversal label.
    pub fn t_set(&self, desc: &GroupDescriptor, n: usize) -> FiniteRegion {
        let f = self.f_set(desc, n);
        let mut pts = BTreeSet::new();
        for c in 0..desc.index() {
            let k = GroupPoint::new(c, vec![0; desc.rank()]);
            for h in f.iter() {
                pts.insert(desc.mul(&k, h));
            }
        }
        FiniteRegion::from_set(pts)
    }
}

pub type Defect = Ratio<i64>;

/// `|g T_n (sym diff) T_n| / |T_n|` by explicit set arithmetic.
pub fn folner_defect(
    desc: &GroupDescriptor,
    sched: &FolnerSchedule,
    n: usize,
    g: &GroupPoint,
) -> Defect {
    let t = sched.t_set(desc, n);
    let gt = t.left_mul(desc, g);
    Ratio::new(gt.sym_diff(&t).len() as i64, t.len() as i64)
}

/// Finite-horizon Shulman constant:
/// `max_{2 <= n <= N} |T_n|^{-1} |union_{k<n} T_k^{-1} T_n|`.
pub fn tempered_constant(desc: &GroupDescriptor, sched: &FolnerSchedule, big_n: usize) -> Defect {
    assert!(big_n >= 2, "tempered_constant needs N >= 2");
    let mut best = Ratio::new(0, 1);
    for n in 2..=big_n {
        let tn = sched.t_set(desc, n);
        let mut acc: BTreeSet<GroupPoint> = BTreeSet::new();
        for k in 1..n {
            let tk_inv = sched.t_set(desc, k).inverse(desc);
            for a in tk_inv.iter() {
                for b in tn.iter() {
                    acc.insert(desc.mul(a, b));
                }
            }
        }
        let r = Ratio::new(acc.len() as i64, tn.len() as i64);
        if r > best {
            best = r;
        }
    }
    best
}

/// `{h in H : K h subset T}`.
pub fn inner_core(desc: &GroupDescriptor, t: &FiniteRegion) -> FiniteRegion {
    // Candidates: h with k_1 h = h in T (k_1 = e), i.e. the H-points of T.
    let mut out = BTreeSet::new();
    for p in t.iter() {
        if !p.in_subgroup() {
            continue;
        }
        let ok = (0..desc.index()).all(|c| {
            let k = GroupPoint::new(c, vec![0; desc.rank()]);
            t.contains(&desc.mul(&k, p))
        });
        if ok {
            out.insert(p.clone());
        }
    }
    FiniteRegion::from_set(out)
}

/// Membership in the coset past `G^-_i = L_i H^- | K_{i-1} H` (1-based `i`).
pub fn coset_past_membership(desc: &GroupDescriptor, i: usize, g: &GroupPoint) -> Result<bool> {
    if i == 0 || i > desc.block_count() {
        return Err(Error::precondition(format!(
            "block index {i} outside 1..={}",
            desc.block_count()
        )));
    }
    for (bi, block) in desc.partition().iter().enumerate() {
        if block.contains(&g.coset) {
            if bi + 1 < i {
                return Ok(true); // g in K_{i-1} H
            }
            if bi + 1 == i {
                return Ok(g.lex_negative()); // g in L_i H^-
            }
            return Ok(false);
        }
    }
    unreachable!("partition covers the transversal")
}

/// `T^-_{n,h}(i) = T_n h^{-1} intersect G^-_i`.
pub fn local_past(
    desc: &GroupDescriptor,
    sched: &FolnerSchedule,
    n: usize,
    h: &GroupPoint,
    i: usize,
) -> Result<FiniteRegion> {
    let f = sched.f_set(desc, n);
    if !f.contains(h) {
        return Err(Error::precondition(format!("{h:?} is not in F_{n}")));
    }
    let hinv = desc.inv(h);
    let mut out = BTreeSet::new();
    for t in sched.t_set(desc, n).iter() {
        let p = desc.mul(t, &hinv);
        if coset_past_membership(desc, i, &p)? {
            out.insert(p);
        }
    }
    Ok(FiniteRegion::from_set(out))
}

/// `F^M_n = {h in F_n : M h subset T_n}`.
pub fn shrunk_core(
    desc: &GroupDescriptor,
    sched: &FolnerSchedule,
    n: usize,
    m: &FiniteRegion,
) -> FiniteRegion {
    let f = sched.f_set(desc, n);
    let t = sched.t_set(desc, n);
    let mut out = BTreeSet::new();
    for h in f.iter() {
        if m.iter().all(|p| t.contains(&desc.mul(p, h))) {
            out.insert(h.clone());
        }
    }
    FiniteRegion::from_set(out)
}

/// Thresholded schedule `gamma` of Lemma-style core shrinking: given a family
/// `M_1, M_2, ...`, returns `gamma(1..=n_max)` with
/// `|F_n^{M_{gamma(n)}}| / |F_n| >= 1 - 1/gamma(n)`, built from the minimal
/// thresholds `n(j)` found by scanning (`n(1) = 1`).
pub fn gamma_schedule(
    desc: &GroupDescriptor,
    sched: &FolnerSchedule,
    family: &dyn Fn(usize) -> FiniteRegion,
    n_max: usize,
    scan_cap: usize,
) -> Result<Vec<usize>> {
    let horizon = n_max.max(1);
    // ratio[j][n] for the M_j currently under scan; computed on demand.
    let ratio = |j: usize, n: usize| -> f64 {
        let m = family(j);
        let core = shrunk_core(desc, sched, n, &m);
        core.len() as f64 / sched.f_set(desc, n).len() as f64
    };
    let mut thresholds = vec![1usize]; // n(1) = 1
    loop {
        let j = thresholds.len() + 1;
        let prev = *thresholds.last().unwrap();
        let mut found = None;
        for n0 in (prev + 1)..=scan_cap {
            // Minimal n0 such that the bound holds on the whole horizon tail.
            let ok = (n0..=horizon.max(n0)).all(|n| ratio(j, n) >= 1.0 - 1.0 / j as f64);
            if ok {
                found = Some(n0);
                break;
            }
            if n0 > horizon && ratio(j, n0) >= 1.0 - 1.0 / j as f64 {
                found = Some(n0);
                break;
            }
        }
        match found {
            Some(n0) => {
                thresholds.push(n0);
                if n0 > horizon {
                    break;
                }
            }
            None => {
                if thresholds.len() == 1 {
                    return Err(Error::budget(format!(
                        "gamma_schedule: no threshold for j=2 within scan cap {scan_cap}"
                    )));
                }
                break;
            }
        }
    }
    let mut gamma = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        let j = thresholds.iter().take_while(|&&nj| nj <= n).count();
        gamma.push(j.max(1));
    }
    Ok(gamma)
}

/// The directed order on `[{F_n}]`: `(n1,h1) <= (n2,h2)` iff `n1 <= n2` and
/// every local past at `(n1,h1)` is contained in the one at `(n2,h2)`.
pub fn directed_leq(
    desc: &GroupDescriptor,
    sched: &FolnerSchedule,
    a: (usize, &GroupPoint),
    b: (usize, &GroupPoint),
) -> Result<bool> {
    if a.0 > b.0 {
        return Ok(false);
    }
    for i in 1..=desc.block_count() {
        let pa = local_past(desc, sched, a.0, a.1, i)?;
        let pb = local_past(desc, sched, b.0, b.1, i)?;
        if !pa.is_subset(&pb) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Common upper bound in the directed set, by the shrunk-core construction:
/// the first `n >= max(n1,n2)` with `F_n^M` nonempty for
/// `M = F_{n1} h1^{-1} union F_{n2} h2^{-1}`, with `h` the minimal core point.
pub fn directed_upper_bound(
    desc: &GroupDescriptor,
    sched: &FolnerSchedule,
    a: (usize, &GroupPoint),
    b: (usize, &GroupPoint),
    n_cap: usize,
) -> Result<Option<(usize, GroupPoint)>> {
    let m = sched
        .f_set(desc, a.0)
        .right_mul(desc, &desc.inv(a.1))
        .union(&sched.f_set(desc, b.0).right_mul(desc, &desc.inv(b.1)));
    for n in a.0.max(b.0)..=n_cap {
        let core = shrunk_core(desc, sched, n, &m);
        if let Some(h) = core.points().iter().next().cloned() {
            return Ok(Some((n, h)));
        }
    }
    Ok(None)
}
