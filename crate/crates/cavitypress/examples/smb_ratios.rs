//! Shannon-McMillan-Breiman ratios of the exact hardcore chain measure
//! along a fixed point, against the predicted limit, together with the
//! sandwich bound linking cylinder probabilities to the specification.
//!
//! Run with: cargo run --example smb_ratios

use cavitypress::gibbs::markov::MarkovOracle;
use cavitypress::gibbs::oracle::{MeasureOracle, PointSource};
use cavitypress::gibbs::partition::{rn_bound, sandwich_defect, Model};
use cavitypress::group::{FolnerSchedule, GroupDescriptor};
use cavitypress::potential::Interaction;
use cavitypress::pressure::{gt_prediction, smb_ratio_series, transfer_pressure_1d};
use cavitypress::subshift::SftSpec;

fn main() -> cavitypress::Result<()> {
    let desc = GroupDescriptor::zd(1);
    let sft = SftSpec::golden_mean(&desc);
    let phi = Interaction::hardcore(&desc, 1.0)?;
    let model = Model { desc: &desc, sft: &sft, phi: &phi };
    let sched = FolnerSchedule::centered();

    let chain = MarkovOracle::from_nearest_neighbor(&desc, &sft, &phi)?;
    let nu = MeasureOracle::Markov(chain.clone());
    let pressure = transfer_pressure_1d(&model)?;
    let prediction = gt_prediction(&model, pressure, &nu)?;
    println!("pressure {pressure:.12}, predicted SMB limit {prediction:.12}");

    let x = PointSource::Constant(0);
    let series = smb_ratio_series(&nu, &x, &desc, &sched, 20)?;
    for e in series.entries.iter().step_by(4) {
        println!(
            "  n = {:2}: ratio {:.12}, gap to prediction {:+.3e}",
            e.n,
            e.lo,
            e.lo - prediction
        );
    }

    // The finite-volume sandwich: cylinder probabilities against the free
    // specification, within exp(+-r_n).
    println!("sandwich bound against the exact chain:");
    for n in [2usize, 4, 6] {
        let t = sched.t_set(&desc, n);
        let t_hat = sched.t_set(&desc, n + 1);
        let rn = rn_bound(&model, &t, &t_hat, 1 << 22)?;
        let worst = sandwich_defect(&model, &|p| chain.cylinder_prob(p), &sched, n, 1 << 22)?;
        println!(
            "  n = {n}: defect {worst:.4} <= r_n {rn:.4}, r_n/|T_n| = {:.4}",
            rn / t.len() as f64
        );
        assert!(worst <= rn);
    }
    Ok(())
}
