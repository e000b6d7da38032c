//! Sequential cavity representation of the hardcore pressure in 1D: the
//! information net along the algebraic past collapses geometrically, and
//! the certified cavity interval pins the transfer-matrix value.
//!
//! Run with: cargo run --example cavity_hardcore

use cavitypress::gibbs::oracle::{MeasureOracle, PointSource};
use cavitypress::gibbs::partition::Model;
use cavitypress::group::{FolnerSchedule, GroupDescriptor};
use cavitypress::potential::Interaction;
use cavitypress::pressure::{
    cavity_pressure, depth_schedule, information_net, transfer_pressure_1d, InfoMode,
};
use cavitypress::subshift::SftSpec;

fn main() -> cavitypress::Result<()> {
    let desc = GroupDescriptor::zd(1);
    let sft = SftSpec::golden_mean(&desc);
    let phi = Interaction::hardcore(&desc, 1.0)?;
    let model = Model { desc: &desc, sft: &sft, phi: &phi };
    let sched = FolnerSchedule::centered();
    let exact = transfer_pressure_1d(&model)?;
    println!("transfer pressure: {exact:.15}");

    // Integrate against the point mass at the empty configuration; the
    // conditional information of the origin given an all-zero past equals
    // the pressure here because the boundary term vanishes on zeros.
    let nu = MeasureOracle::Atomic(PointSource::Constant(0));
    let schedule = depth_schedule(&desc, 12);
    let net = information_net(&model, &nu, &sched, 1, &schedule, InfoMode::Bracket, 1 << 22)?;
    println!("information net (cauchy defect {:.3e}):", net.cauchy_defect);
    for e in &net.series.entries {
        println!(
            "  depth {:2}: past {:3} sites, [{:.12}, {:.12}], width {:.3e}",
            e.n,
            e.h_count,
            e.lo,
            e.hi,
            e.hi - e.lo
        );
    }

    for depth in [10usize, 20, 30] {
        let iv = cavity_pressure(&model, &nu, &sched, depth, InfoMode::Bracket, 1e-2, 1 << 22)?;
        println!(
            "cavity interval at depth {depth}: [{:.15}, {:.15}], contains exact: {}",
            iv.lo,
            iv.hi,
            iv.contains(exact)
        );
    }

    // The same representation integrated against the Gibbs chain itself.
    let chain = cavitypress::gibbs::markov::MarkovOracle::from_nearest_neighbor(&desc, &sft, &phi)?;
    let nu = MeasureOracle::Markov(chain);
    let iv = cavity_pressure(&model, &nu, &sched, 12, InfoMode::Bracket, 5e-3, 1 << 22)?;
    println!("cavity against the chain itself: [{:.12}, {:.12}]", iv.lo, iv.hi);
    Ok(())
}
