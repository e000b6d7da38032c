//! Finite-range translation-invariant potentials: the norm, local energies,
//! and the energy functionals with and without boundary conditions.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{FiniteRegion, GroupDescriptor, GroupPoint};
use crate::subshift::{locally_admissible, Pattern, SftSpec};

/// Compensated (Neumaier) sum, so energy accumulations are stable and
/// independent of chunking.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

/// One interaction term: an anchored shape (containing the identity) and a
/// table of energies indexed by symbol assignments on the shape. The full
/// potential is the translation closure over all shape translates.
#[derive(Clone, Debug)]
pub struct InteractionTerm {
    /// Sorted shape sites; the identity is one of them.
    shape: Vec<GroupPoint>,
    /// Mixed-radix table: row `(v_0, ..., v_{k-1})` in sorted-shape order
    /// maps to index `sum_j v_j s^j`.
    table: Vec<f64>,
}

impl InteractionTerm {
    pub fn new(shape: FiniteRegion, table: Vec<f64>, alphabet_size: usize) -> Result<Self> {
        let sites = shape.to_vec();
        if !sites.iter().any(|p| p.is_identity()) {
            return Err(Error::precondition("term shape must contain the identity"));
        }
        let expect = alphabet_size.pow(sites.len() as u32);
        if table.len() != expect {
            return Err(Error::precondition(format!(
                "table has {} rows, shape needs {expect}",
                table.len()
            )));
        }
        Ok(InteractionTerm { shape: sites, table })
    }

    pub fn shape(&self) -> &[GroupPoint] {
        &self.shape
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub(crate) fn value(&self, row: &[u8], s: usize) -> f64 {
        let mut idx = 0usize;
        for &v in row.iter().rev() {
            idx = idx * s + v as usize;
        }
        self.table[idx]
    }
}

#[derive(Clone, Debug)]
pub struct Interaction {
    alphabet_size: usize,
    terms: Vec<InteractionTerm>,
}

impl Interaction {
    pub fn new(alphabet_size: usize, terms: Vec<InteractionTerm>) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::precondition("alphabet must be nonempty"));
        }
        let mut shapes = BTreeSet::new();
        for t in &terms {
            if !shapes.insert(t.shape.clone()) {
                return Err(Error::precondition("term shapes must be pairwise distinct"));
            }
        }
        Ok(Interaction { alphabet_size, terms })
    }

    pub fn zero(alphabet_size: usize) -> Self {
        Interaction { alphabet_size, terms: Vec::new() }
    }

    /// Single-site activity: energy `-log(lambda)` for symbol 1, 0 for
    /// symbol 0.
    pub fn hardcore(desc: &GroupDescriptor, lambda: f64) -> Result<Self> {
        if lambda <= 0.0 {
            return Err(Error::precondition("activity must be positive"));
        }
        let shape = FiniteRegion::from_points([desc.identity()]);
        let term = InteractionTerm::new(shape, vec![0.0, -lambda.ln()], 2)?;
        Interaction::new(2, vec![term])
    }

    /// Nearest-neighbor Ising along each positive lattice generator, with
    /// spins `+1` for symbol 0 and `-1` for symbol 1. Bond energy
    /// `-beta sigma_a sigma_b`, field energy `-field sigma` per site.
    pub fn ising(desc: &GroupDescriptor, beta: f64, field: f64) -> Result<Self> {
        let sigma = |v: usize| if v == 0 { 1.0 } else { -1.0 };
        let mut terms = Vec::new();
        for i in 0..desc.rank() {
            let mut v = vec![0i64; desc.rank()];
            v[i] = 1;
            let shape = FiniteRegion::from_points([desc.identity(), GroupPoint::lattice(v)]);
            // Bond energy is symmetric, so slot order does not matter.
            let mut table = vec![0.0; 4];
            for a in 0..2usize {
                for b in 0..2usize {
                    table[a + 2 * b] = -beta * sigma(a) * sigma(b);
                }
            }
            terms.push(InteractionTerm::new(shape, table, 2)?);
        }
        if field != 0.0 {
            let shape = FiniteRegion::from_points([desc.identity()]);
            terms.push(InteractionTerm::new(
                shape,
                vec![-field * sigma(0), -field * sigma(1)],
                2,
            )?);
        }
        Interaction::new(2, terms)
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn terms(&self) -> &[InteractionTerm] {
        &self.terms
    }

    /// All distinct anchored shapes: translates `A a^{-1}` containing the
    /// identity, each tagged with its source term and anchor.
    fn anchored(&self, desc: &GroupDescriptor) -> Vec<(usize, GroupPoint, Vec<GroupPoint>)> {
        let mut seen: BTreeSet<Vec<GroupPoint>> = BTreeSet::new();
        let mut out = Vec::new();
        for (ti, term) in self.terms.iter().enumerate() {
            for a in &term.shape {
                let ainv = desc.inv(a);
                let mut set: Vec<GroupPoint> =
                    term.shape.iter().map(|p| desc.mul(p, &ainv)).collect();
                set.sort();
                if seen.insert(set.clone()) {
                    out.push((ti, ainv.clone(), set));
                }
            }
        }
        out
    }

    /// Sites a pattern must cover for `local_energy` to be defined.
    pub fn phi_region(&self, desc: &GroupDescriptor) -> FiniteRegion {
        let mut pts = std::collections::BTreeSet::new();
        for (_, _, set) in self.anchored(desc) {
            pts.extend(set);
        }
        FiniteRegion::from_set(pts)
    }

    /// Sites a pattern must cover for `phi_k` to be defined: each anchored
    /// shape right-translated by each transversal label.
    pub fn phi_k_region(&self, desc: &GroupDescriptor) -> FiniteRegion {
        let mut pts = std::collections::BTreeSet::new();
        for c in 0..desc.index() {
            let k = GroupPoint::new(c, vec![0; desc.rank()]);
            for (_, _, set) in self.anchored(desc) {
                for p in set {
                    pts.insert(desc.mul(&p, &k));
                }
            }
        }
        FiniteRegion::from_set(pts)
    }

    /// Largest word-metric distance between two sites of one shape: a term
    /// translate meeting a region stays within this radius of it.
    pub fn range(&self, desc: &GroupDescriptor) -> usize {
        let mut r = 0;
        for term in &self.terms {
            for a in &term.shape {
                let ainv = desc.inv(a);
                for b in &term.shape {
                    let d = desc.mul(b, &ainv);
                    if let Some(n) = crate::group::word_norm(desc, &d, 64) {
                        r = r.max(n);
                    }
                }
            }
        }
        r
    }

    /// `sum over anchored shapes of sup |value|`; the sup is restricted to
    /// locally admissible rows when a subshift is supplied.
    pub fn norm(&self, desc: &GroupDescriptor, sft: Option<&SftSpec>) -> f64 {
        let s = self.alphabet_size;
        let mut total = 0.0;
        for (ti, ainv, set) in self.anchored(desc) {
            let term = &self.terms[ti];
            let k = term.shape.len();
            let mut sup = 0.0f64;
            for code in 0..s.pow(k as u32) {
                // Row over the original shape order.
                let mut row = vec![0u8; k];
                let mut c = code;
                for slot in row.iter_mut() {
                    *slot = (c % s) as u8;
                    c /= s;
                }
                if let Some(spec) = sft {
                    let pat = Pattern::from_pairs(
                        term.shape
                            .iter()
                            .map(|p| desc.mul(p, &ainv))
                            .zip(row.iter().copied()),
                    );
                    if !locally_admissible(desc, spec, &pat) {
                        continue;
                    }
                }
                sup = sup.max(term.value(&row, s).abs());
            }
            let _ = set;
            total += sup;
        }
        total
    }

    /// Value of the term translate `A g` read from a pattern; None if the
    /// pattern misses a site.
    pub(crate) fn instance_value(
        &self,
        desc: &GroupDescriptor,
        ti: usize,
        g: &GroupPoint,
        p: &Pattern,
    ) -> Option<f64> {
        let term = &self.terms[ti];
        let mut row = Vec::with_capacity(term.shape.len());
        for a in &term.shape {
            row.push(p.get(&desc.mul(a, g))?);
        }
        Some(term.value(&row, self.alphabet_size))
    }

    /// Local energy `phi(x) = -sum over anchored M of |M|^{-1} Phi(M, x)`.
    pub fn local_energy(&self, desc: &GroupDescriptor, p: &Pattern) -> Result<f64> {
        let mut parts = Vec::new();
        for (ti, ainv, set) in self.anchored(desc) {
            match self.instance_value(desc, ti, &ainv, p) {
                Some(v) => parts.push(-v / set.len() as f64),
                None => {
                    let missing: Vec<String> = set
                        .iter()
                        .filter(|q| p.get(q).is_none())
                        .map(|q| format!("{q:?}"))
                        .collect();
                    return Err(Error::precondition(format!(
                        "pattern does not determine {}",
                        missing.join(", ")
                    )));
                }
            }
        }
        Ok(compensated_sum(parts))
    }

    /// `phi_i(x) = phi(k_i . x)` for the transversal label `i` (0-based).
    pub fn coset_local_energy(
        &self,
        desc: &GroupDescriptor,
        p: &Pattern,
        i: usize,
    ) -> Result<f64> {
        if i >= desc.index() {
            return Err(Error::precondition(format!("no transversal label {i}")));
        }
        let k = GroupPoint::new(i, vec![0; desc.rank()]);
        self.local_energy(desc, &p.translate(desc, &k))
    }

    /// `phi_K = sum_i phi_i`.
    pub fn phi_k(&self, desc: &GroupDescriptor, p: &Pattern) -> Result<f64> {
        let mut parts = Vec::new();
        for i in 0..desc.index() {
            parts.push(self.coset_local_energy(desc, p, i)?);
        }
        Ok(compensated_sum(parts))
    }

    /// Term translates `A g` with all sites inside `region`, as `(term, g)`.
    pub(crate) fn instances_inside(
        &self,
        desc: &GroupDescriptor,
        region: &FiniteRegion,
    ) -> Vec<(usize, GroupPoint)> {
        let mut out = Vec::new();
        for (ti, term) in self.terms.iter().enumerate() {
            let anchor_inv = desc.inv(&term.shape[0]);
            let mut seen = BTreeSet::new();
            for t in region.iter() {
                let g = desc.mul(&anchor_inv, t);
                if !seen.insert(g.clone()) {
                    continue;
                }
                if term.shape.iter().all(|a| region.contains(&desc.mul(a, &g))) {
                    out.push((ti, g));
                }
            }
        }
        out
    }

    /// `E(x_T)`: sum over term translates fully inside the support of `p`.
    pub fn energy(&self, desc: &GroupDescriptor, p: &Pattern) -> f64 {
        let region = p.support();
        let parts: Vec<f64> = self
            .instances_inside(desc, &region)
            .into_iter()
            .map(|(ti, g)| {
                self.instance_value(desc, ti, &g, p)
                    .expect("instance sites are inside the support")
            })
            .collect();
        compensated_sum(parts)
    }

    /// `E(x_T | y)`: sum over term translates meeting `T`, with `q` supplying
    /// the boundary condition; `+infinity` when the concatenation is locally
    /// inadmissible for `sft` on the combined support.
    pub fn boundary_energy(
        &self,
        desc: &GroupDescriptor,
        sft: Option<&SftSpec>,
        p: &Pattern,
        q: &Pattern,
    ) -> Result<f64> {
        let t_region = p.support();
        let combined = p
            .merge(q)
            .ok_or_else(|| Error::precondition("interior and boundary patterns disagree"))?;
        if let Some(spec) = sft {
            if !locally_admissible(desc, spec, &combined) {
                return Ok(f64::INFINITY);
            }
        }
        // Instances meeting T: anchor any shape site at a T site.
        let mut parts = Vec::new();
        for (ti, term) in self.terms.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for a in &term.shape {
                let ainv = desc.inv(a);
                for t in t_region.iter() {
                    // g with a g = t.
                    let g = desc.mul(&ainv, t);
                    if !seen.insert(g.clone()) {
                        continue;
                    }
                    match self.instance_value(desc, ti, &g, &combined) {
                        Some(v) => parts.push(v),
                        None => {
                            let needed = self.range(desc) * 2;
                            return Err(Error::precondition(format!(
                                "boundary pattern too small: a term translate meeting T \
                                 leaves the combined support; supply a collar of radius {needed}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(compensated_sum(parts))
    }

    /// Consistency audit of the translation closure: wherever two term
    /// translates coincide as sets, their tables must agree on random rows;
    /// plus random checks that the two evaluation routes for a translate
    /// (direct read vs. translate-then-read) agree bit-exactly.
    pub fn invariance_check(&self, desc: &GroupDescriptor, samples: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = self.alphabet_size;
        let n = self.terms.len();
        for i in 0..n {
            for j in 0..n {
                for a in &self.terms[i].shape {
                    for b in &self.terms[j].shape {
                        if i == j && a == b {
                            continue;
                        }
                        // g with A_i g = A_j, candidate g = a^{-1} b.
                        let g = desc.mul(&desc.inv(a), b);
                        let mut moved: Vec<GroupPoint> = self.terms[i]
                            .shape
                            .iter()
                            .map(|p| desc.mul(p, &g))
                            .collect();
                        moved.sort();
                        if moved != self.terms[j].shape {
                            continue;
                        }
                        for _ in 0..samples {
                            let pat = Pattern::from_pairs(
                                self.terms[j]
                                    .shape
                                    .iter()
                                    .map(|p| (p.clone(), rng.gen_range(0..s) as u8)),
                            );
                            let vi = self.instance_value(desc, i, &g, &pat);
                            let vj = self.instance_value(desc, j, &desc.identity(), &pat);
                            if vi != vj {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        // Route check on random translates.
        let ball = desc.ball(3).to_vec();
        for _ in 0..samples {
            let ti = if n == 0 { return true } else { rng.gen_range(0..n) };
            let g = ball[rng.gen_range(0..ball.len())].clone();
            let pat = Pattern::from_pairs(self.terms[ti].shape.iter().map(|p| {
                (desc.mul(p, &g), rng.gen_range(0..s) as u8)
            }));
            let direct = self.instance_value(desc, ti, &g, &pat);
            let translated =
                self.instance_value(desc, ti, &desc.identity(), &pat.translate(desc, &g));
            if direct != translated {
                return false;
            }
        }
        true
    }
}
