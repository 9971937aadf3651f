//! The cluster graph G(2,12): its lumped cluster walk, the tabulated
//! cluster law, and the exact search for a target that moves once.

use moving_targets::gnm::{
    build_gnm, certify_counterexample, compare_cluster_chains, shuttle_expectation, LongEdgeRule, TrajectorySearch,
};
use moving_targets::{Rational, Scalar};

fn main() -> moving_targets::Result<()> {
    let g = build_gnm(2, 12, LongEdgeRule::Literal)?;
    println!("{} vertices, degree {}", g.n_vertices(), g.degree(0));

    let cmp = compare_cluster_chains(&g)?;
    let show = |h: &[Rational]| h.iter().map(Scalar::to_text).collect::<Vec<_>>().join(", ");
    println!("lumped cluster hitting times:    {}", show(&cmp.literal_h[1..=6]));
    println!("tabulated cluster hitting times: {}", show(&cmp.tabulated_h[1..=6]));
    let shuttle = shuttle_expectation(&cmp.tabulated)?;
    println!("shuttle accounting {} vs direct {}", shuttle.accounting.to_text(), shuttle.direct.to_text());

    let report = certify_counterexample::<Rational>(&g, true, &TrajectorySearch::full(&g, 4))?;
    println!("static max {} at {:?}", report.static_max.to_text(), report.static_argmax);
    println!("best wait-then-move {} ({}), margin {}", report.best_moving.to_text(), report.best_trajectory, report.margin.to_text());
    if let Some(r) = &report.reference {
        println!("{}: {} (gain {} over its settled target)", r.trajectory, r.value.to_text(), r.gain_over_settled.to_text());
    }
    Ok(())
}
