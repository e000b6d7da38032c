//! Finite-volume pressure of the 1D golden-mean shift with a hardcore
//! weight, converging to the exact transfer-matrix value.
//!
//! Run with: cargo run --example golden_mean_pressure

use cavitypress::gibbs::partition::Model;
use cavitypress::group::{FolnerSchedule, GroupDescriptor};
use cavitypress::potential::Interaction;
use cavitypress::pressure::{pressure_sequence, transfer_pressure_1d};
use cavitypress::subshift::SftSpec;

fn main() -> cavitypress::Result<()> {
    let desc = GroupDescriptor::zd(1);
    let sft = SftSpec::golden_mean(&desc);
    let sched = FolnerSchedule::centered();

    for lambda in [1.0f64, 2.0] {
        let phi = Interaction::hardcore(&desc, lambda)?;
        let model = Model { desc: &desc, sft: &sft, phi: &phi };
        let exact = transfer_pressure_1d(&model)?;
        println!("lambda = {lambda}: exact pressure {exact:.12}");
        let series = pressure_sequence(&model, &sched, 12, 1, 1 << 22)?;
        for e in &series.entries {
            println!(
                "  n = {:2}  |T_n| = {:3}  estimate {:.12}  gap {:+.3e}",
                e.n,
                e.h_count,
                e.lo,
                e.lo - exact
            );
        }
    }

    // lambda = 1 is the topological entropy of the golden-mean shift,
    // the logarithm of the golden ratio.
    let phi = Interaction::hardcore(&desc, 1.0)?;
    let model = Model { desc: &desc, sft: &sft, phi: &phi };
    let p = transfer_pressure_1d(&model)?;
    let log_phi = ((1.0 + 5.0f64.sqrt()) / 2.0).ln();
    println!("log golden ratio = {log_phi:.15}, transfer value = {p:.15}");
    assert!((p - log_phi).abs() < 1e-12);
    Ok(())
}
