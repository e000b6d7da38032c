//! Glauber (single-site heat-bath) dynamics on a torus, and the empirical
//! measure built from its trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gibbs::partition::Model;
use crate::gibbs::torus::TorusGeometry;
use crate::subshift::Pattern;

/// Empirical measure over recorded torus configurations.
#[derive(Clone, Debug)]
pub struct EmpiricalOracle {
    pub(crate) geom: TorusGeometry,
    samples: Vec<Vec<u8>>,
    seed: u64,
}

impl EmpiricalOracle {
    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sides(&self) -> &[i64] {
        &self.geom.sides
    }

    /// Fraction of recorded configurations matching the wrapped pattern.
    pub fn cylinder_prob(&self, pattern: &Pattern) -> Result<f64> {
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
        let hits = self
            .samples
            .iter()
            .filter(|cfg| wants.iter().all(|&(i, v)| cfg[i] == v))
            .count();
        Ok(hits as f64 / self.samples.len() as f64)
    }

    /// Time-and-space average of the fraction of sites holding `symbol`.
    pub fn symbol_frequency(&self, symbol: u8) -> f64 {
        let n = self.geom.sites.len();
        let total: usize = self
            .samples
            .iter()
            .map(|cfg| cfg.iter().filter(|&&v| v == symbol).count())
            .sum();
        total as f64 / (n * self.samples.len()) as f64
    }

    /// Average of `f` over the recorded configurations, each presented as
    /// a pattern on the torus fundamental domain.
    pub fn expect_local(&self, f: &dyn Fn(&Pattern) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for cfg in &self.samples {
            let pat = Pattern::from_pairs(
                self.geom.sites.iter().cloned().zip(cfg.iter().copied()),
            );
            acc += f(&pat)?;
        }
        Ok(acc / self.samples.len() as f64)
    }

    /// One row per sample, sites in sorted order; the header records the
    /// generator seed and torus shape.
    pub fn to_csv(&self) -> String {
        let sides: Vec<String> = self.geom.sides.iter().map(|s| s.to_string()).collect();
        let mut out = format!(
            "# seed={} sides={} layers={}\n",
            self.seed,
            sides.join("x"),
            self.geom.layers
        );
        for (k, cfg) in self.samples.iter().enumerate() {
            let row: Vec<String> = cfg.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{},{}\n", k, row.join(",")));
        }
        out
    }
}

/// Run raster-scan heat-bath dynamics on the torus and record the
/// configuration at time zero and after each full sweep.
pub fn glauber_samples(
    model: &Model,
    sides: Vec<i64>,
    sweeps: usize,
    seed: u64,
) -> Result<EmpiricalOracle> {
    let desc = model.desc;
    let sft = model.sft;
    let phi = model.phi;
    let geom = TorusGeometry::new(desc, sides)?;
    let n = geom.sites.len();
    let s = sft.alphabet.size();

    let windows = geom.window_instances(desc, sft.window());
    let terms = geom.term_instances(desc, phi);
    let mut windows_at = vec![Vec::new(); n];
    for (k, inst) in windows.iter().enumerate() {
        for &i in inst {
            if !windows_at[i].contains(&k) {
                windows_at[i].push(k);
            }
        }
    }
    let mut terms_at = vec![Vec::new(); n];
    for (k, (_, idx)) in terms.iter().enumerate() {
        for &i in idx {
            if !terms_at[i].contains(&k) {
                terms_at[i].push(k);
            }
        }
    }

    // Start from a torus-admissible constant configuration.
    let admissible = |cfg: &[u8]| {
        windows.iter().all(|inst| {
            let row: Vec<u8> = inst.iter().map(|&i| cfg[i]).collect();
            !sft.is_forbidden(&row)
        })
    };
    let mut config = None;
    for v in 0..s as u8 {
        let c = vec![v; n];
        if admissible(&c) {
            config = Some(c);
            break;
        }
    }
    let mut config =
        config.ok_or_else(|| Error::precondition("no admissible constant start configuration"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![config.clone()];
    for _ in 0..sweeps {
        for i in 0..n {
            let mut weights = vec![0.0f64; s];
            for (v, w) in weights.iter_mut().enumerate() {
                config[i] = v as u8;
                let ok = windows_at[i].iter().all(|&k| {
                    let row: Vec<u8> = windows[k].iter().map(|&j| config[j]).collect();
                    !sft.is_forbidden(&row)
                });
                if !ok {
                    continue;
                }
                let energy: f64 = terms_at[i]
                    .iter()
                    .map(|&k| {
                        let (ti, idx) = &terms[k];
                        let row: Vec<u8> = idx.iter().map(|&j| config[j]).collect();
                        phi.terms()[*ti].value(&row, s)
                    })
                    .sum();
                *w = (-energy).exp();
            }
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                return Err(Error::precondition("heat-bath site has no admissible symbol"));
            }
            let mut u = rng.gen::<f64>() * total;
            let mut pick = s - 1;
            for (v, w) in weights.iter().enumerate() {
                if u < *w {
                    pick = v;
                    break;
                }
                u -= w;
            }
            config[i] = pick as u8;
        }
        samples.push(config.clone());
    }
    Ok(EmpiricalOracle { geom, samples, seed })
}
