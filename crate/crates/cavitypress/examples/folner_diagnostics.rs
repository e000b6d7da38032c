//! Folner-set diagnostics for Z and the Z x Z/2 product: translation
//! defects, the finite-horizon tempered constant, inner cores, and the
//! gamma schedule of core shrinking.
//!
//! Run with: cargo run --example folner_diagnostics

use cavitypress::group::{
    folner_defect, gamma_schedule, inner_core, tempered_constant, FolnerSchedule, GroupDescriptor,
};

fn main() -> cavitypress::Result<()> {
    for desc in [GroupDescriptor::zd(1), GroupDescriptor::z_cross_z2()] {
        println!("group with transversal {:?}", desc.labels());
        let sched = FolnerSchedule::centered();
        for g in desc.generators() {
            print!("  defect of {g:?}:");
            for n in [5usize, 10, 25, 50] {
                let d = folner_defect(&desc, &sched, n, &g);
                print!("  n={n} -> {d}");
            }
            println!();
        }

        let half = FolnerSchedule::half_open();
        println!("  tempered constant on [0,n), N=8: {}", tempered_constant(&desc, &half, 8));

        for n in [5usize, 20, 50] {
            let t = sched.t_set(&desc, n);
            let core = inner_core(&desc, &t);
            println!(
                "  n={n}: |T_n| = {}, |K.core|/|T_n| = {:.4}",
                t.len(),
                (core.len() * desc.index()) as f64 / t.len() as f64
            );
        }

        // Shrink cores against growing word-metric balls.
        let d = desc.clone();
        let balls = move |j: usize| d.ball(j);
        let gamma = gamma_schedule(&desc, &sched, &balls, 30, 200)?;
        println!("  gamma(1..=30) = {gamma:?}");
    }
    Ok(())
}
