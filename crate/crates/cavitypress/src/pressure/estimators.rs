//! Pressure estimators: finite-volume partition-function sequences, exact
//! one-dimensional transfer matrices, and two-dimensional strip brackets.

use crate::error::{Error, Result};
use crate::gibbs::markov::{perron, MarkovOracle};
use crate::gibbs::partition::{partition_free, Model};
use crate::subshift::all_completions_forbidden;
use crate::group::FolnerSchedule;
use crate::pressure::series::ConvergenceSeries;

/// `|T_n|^{-1} ln Z(T_n)` for `n = 1..=n_max`. Every entry is checked
/// against the a priori bound `ln|S| + ||phi||`.
pub fn pressure_sequence(
    model: &Model,
    sched: &FolnerSchedule,
    n_max: usize,
    r: usize,
    budget: usize,
) -> Result<ConvergenceSeries> {
    if n_max == 0 {
        return Err(Error::precondition("empty schedule: n_max must be positive"));
    }
    let bound =
        (model.sft.alphabet.size() as f64).ln() + model.phi.norm(model.desc, None);
    let mut series = ConvergenceSeries::new("pressure_sequence");
    for n in 1..=n_max {
        let t = sched.t_set(model.desc, n);
        let z = partition_free(model, &t, r, budget)?;
        let value = z.ln() / t.len() as f64;
        if value > bound + 1e-9 {
            return Err(Error::Tolerance(format!(
                "pressure entry {value} at n={n} exceeds the a priori bound {bound}"
            )));
        }
        series.push_point(n, t.len(), value);
    }
    Ok(series)
}

/// Exact pressure for rank-one models from the Perron root of the
/// weighted transfer matrix.
pub fn transfer_pressure_1d(model: &Model) -> Result<f64> {
    let oracle = MarkovOracle::from_nearest_neighbor(model.desc, model.sft, model.phi)?;
    Ok(oracle.pressure())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum StripBoundary {
    Free,
    Periodic,
}

/// Transfer matrix over height-`w` column states for a rank-two model.
/// Instances are attributed to the column holding their leftmost site.
fn strip_transfer(
    model: &Model,
    w: usize,
    boundary: StripBoundary,
    budget: usize,
) -> Result<(Vec<Vec<f64>>, usize)> {
    let s = model.sft.alphabet.size();
    if s.pow(w as u32) > budget {
        return Err(Error::budget(format!("strip width {w} exceeds the state budget")));
    }
    let wi = w as i64;

    // Offsets of window and interaction sites relative to the anchor.
    let window: Vec<(i64, i64)> = model
        .sft
        .window()
        .iter()
        .map(|p| (p.lattice[0], p.lattice[1]))
        .collect();
    let shapes: Vec<(usize, Vec<(i64, i64)>)> = model
        .phi
        .terms()
        .iter()
        .enumerate()
        .map(|(ti, t)| (ti, t.shape().iter().map(|p| (p.lattice[0], p.lattice[1])).collect()))
        .collect();
    let x_span = |offs: &[(i64, i64)]| -> (i64, i64) {
        let lo = offs.iter().map(|o| o.0).min().unwrap();
        let hi = offs.iter().map(|o| o.0).max().unwrap();
        (lo, hi)
    };
    let (wlo, whi) = x_span(&window);
    if whi - wlo > 1 {
        return Err(Error::precondition("window spans more than two columns"));
    }
    for (_, offs) in &shapes {
        let (lo, hi) = x_span(offs);
        if hi - lo > 1 {
            return Err(Error::precondition(
                "interaction shape spans more than two columns",
            ));
        }
    }

    // Site lookup within the two-column block; None for sites off a free
    // strip, which act as unconstrained jokers in window rows and drop
    // the interaction instance (free boundary).
    let lookup = |c: &[u8], c2: &[u8], x: i64, y: i64| -> Option<u8> {
        let yy = match boundary {
            StripBoundary::Free => {
                if y < 0 || y >= wi {
                    return None;
                }
                y as usize
            }
            StripBoundary::Periodic => y.rem_euclid(wi) as usize,
        };
        Some(match x {
            0 => c[yy],
            _ => c2[yy],
        })
    };

    let all_dy = window
        .iter()
        .chain(shapes.iter().flat_map(|(_, offs)| offs.iter()))
        .map(|o| o.1);
    let dy_min = all_dy.clone().min().unwrap();
    let dy_max = all_dy.max().unwrap();
    let anchor_ys: Vec<i64> = match boundary {
        StripBoundary::Free => ((-dy_max)..=(wi - 1 - dy_min)).collect(),
        StripBoundary::Periodic => (0..wi).collect(),
    };

    let count = s.pow(w as u32);
    let states: Vec<Vec<u8>> = (0..count)
        .map(|code| {
            let mut col = vec![0u8; w];
            let mut c = code;
            for v in col.iter_mut() {
                *v = (c % s) as u8;
                c /= s;
            }
            col
        })
        .collect();

    let m = states.len();
    let mut b = vec![vec![0.0f64; m]; m];
    for (i, c) in states.iter().enumerate() {
        'next: for (j, c2) in states.iter().enumerate() {
            let mut energy = 0.0f64;
            for &y in &anchor_ys {
                // Window instances with leftmost site in column 0.
                let mut row: Vec<Option<u8>> = window
                    .iter()
                    .map(|&(dx, dy)| lookup(c, c2, dx - wlo, y + dy))
                    .collect();
                if all_completions_forbidden(model.sft, &mut row) {
                    continue 'next;
                }
                for (ti, offs) in &shapes {
                    let (slo, _) = x_span(offs);
                    let arow: Option<Vec<u8>> = offs
                        .iter()
                        .map(|&(dx, dy)| lookup(c, c2, dx - slo, y + dy))
                        .collect();
                    if let Some(r) = arow {
                        energy += model.phi.terms()[*ti].value(&r, s);
                    }
                }
            }
            b[i][j] = (-energy).exp();
        }
    }
    Ok((b, m))
}

/// Strip pressure brackets for rank-two models: per width `w`, the min
/// and max of the free-boundary eigenvalue ratios at `w` and `w-1` and
/// the periodic per-site value at `w`.
pub fn strip_pressure_2d(
    model: &Model,
    widths: &[usize],
    budget: usize,
) -> Result<ConvergenceSeries> {
    if model.desc.rank() != 2 || model.desc.index() != 1 {
        return Err(Error::precondition("strip estimator needs a rank-two lattice"));
    }
    let w_max = *widths
        .iter()
        .max()
        .ok_or_else(|| Error::precondition("no strip widths requested"))?;
    if widths.iter().any(|&w| w == 0) {
        return Err(Error::precondition("strip widths must be positive"));
    }

    // Free-boundary Perron roots for all widths up to the maximum.
    let mut ln_free = vec![0.0f64; w_max + 1];
    for w in 1..=w_max {
        let (b, _) = strip_transfer(model, w, StripBoundary::Free, budget)?;
        ln_free[w] = perron(&b).0.ln();
    }

    let mut series = ConvergenceSeries::new("strip_pressure_2d");
    for &w in widths {
        let (bp, m) = strip_transfer(model, w, StripBoundary::Periodic, budget)?;
        let per_site = perron(&bp).0.ln() / w as f64;
        let ratio_w = ln_free[w] - ln_free[w - 1];
        let mut vals = vec![ratio_w, per_site];
        if w >= 2 {
            vals.push(ln_free[w - 1] - ln_free[w - 2]);
        }
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        series.push(w, m, lo, hi);
    }
    Ok(series)
}
