//! Finite-scale mixing certificates: safe symbols, topological strong
//! spatial mixing with a gap, condition (D) gluing, and certified
//! conditional-probability brackets that shrink with the screening
//! radius.
//!
//! Run with: cargo run --example mixing_certificates

use cavitypress::gibbs::bracket::conditional_bracket;
use cavitypress::gibbs::partition::Model;
use cavitypress::group::{FolnerSchedule, GroupDescriptor, GroupPoint};
use cavitypress::potential::Interaction;
use cavitypress::subshift::{
    condition_d_check, safe_symbol, tssm_gap_check, CheckMode, Pattern, SftSpec,
};

fn main() -> cavitypress::Result<()> {
    let desc = GroupDescriptor::zd(1);
    let sched = FolnerSchedule::centered();
    let budget = 1 << 22;

    for (name, sft) in [
        ("golden mean", SftSpec::golden_mean(&desc)),
        ("no-01", SftSpec::no01_1d()),
    ] {
        println!("{name}:");
        match safe_symbol(&desc, &sft, budget)? {
            Some(s) => println!("  safe symbol: {s}"),
            None => println!("  no safe symbol"),
        }
        let probe = desc.ball(2);
        match tssm_gap_check(&desc, &sft, 2, &probe, 1, budget)? {
            None => println!("  TSSM with gap 2: pass"),
            Some((u, v)) => println!("  TSSM witness: {u:?} / {v:?}"),
        }
        let t = sched.t_set(&desc, 1);
        let t_hat = sched.t_set(&desc, 2);
        match condition_d_check(&desc, &sft, &t, &t_hat, 1, CheckMode::Exhaustive, budget)? {
            None => println!("  condition (D): pass"),
            Some((x, y)) => println!("  condition (D) witness: {x:?} / {y:?}"),
        }
    }

    // Brackets: uniform over all Gibbs measures of the specification, and
    // collapsing geometrically with the screening radius.
    let sft = SftSpec::golden_mean(&desc);
    let phi = Interaction::hardcore(&desc, 1.0)?;
    let model = Model { desc: &desc, sft: &sft, phi: &phi };
    let x_m = Pattern::from_pairs([(GroupPoint::lattice(vec![0]), 0u8)]);
    let cond = Pattern::from_pairs([(GroupPoint::lattice(vec![-1]), 0u8)]);
    println!("bracket for mu(x_0 = 0 | x_-1 = 0):");
    for radius in 1..=6 {
        let b = conditional_bracket(&model, &x_m, &cond, radius, budget)?;
        println!(
            "  radius {radius}: [{:.10}, {:.10}], width {:.3e}",
            b.lo,
            b.hi,
            b.width()
        );
    }
    let phi_g = (1.0 + 5.0f64.sqrt()) / 2.0;
    println!("exact transition probability 1/phi = {:.10}", 1.0 / phi_g);
    Ok(())
}
