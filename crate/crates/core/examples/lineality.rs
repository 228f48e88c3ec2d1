//! Sampled test that the directions of recession with nonpositive cost form
//! a linear space.

use bolza::convex::{ConvexFn, Plq};
use bolza::integrand::{EndpointFn, TimeIntegrand};
use bolza::measure::{BVArc, BaseMeasure, DiscreteRadonMeasure, Grid};
use bolza::solver::check_lineality;

fn main() -> bolza::Result<()> {
    let grid = Grid::uniform(1.0, 10, 1)?;
    let base = BaseMeasure::lebesgue(grid.clone());
    let constant = BVArc::constant(base.clone(), vec![1.0])?;
    let ramp = BVArc::new(vec![0.0], DiscreteRadonMeasure::new(base.clone(), vec![vec![1.0]; 10], vec![])?)?;

    // quadratic costs recede only along zero: every nonzero direction costs +inf both ways
    let q = ConvexFn::broadcast(Plq::quadratic(0.5, 0.0, 0.0), 1);
    let k = TimeIntegrand::constant(grid.clone(), q.clone(), q)?;
    let r = check_lineality(&k, &EndpointFn::free(1), &[constant.clone(), ramp.clone()])?;
    println!("quadratic:        linear = {}, counterexamples {:?}", r.linear, r.counterexamples);

    // a one-sided state constraint: constants are free upward but not downward
    let k = TimeIntegrand::constant(
        grid,
        ConvexFn::new(vec![Plq::indicator(0.0, f64::INFINITY)?])?,
        ConvexFn::broadcast(Plq::abs(), 1),
    )?;
    let r = check_lineality(&k, &EndpointFn::free(1), &[constant, ramp])?;
    println!("x >= 0, |u| cost: linear = {}, counterexamples {:?}", r.linear, r.counterexamples);
    for (i, e) in r.entries.iter().enumerate() {
        println!("  direction {i}: value {}, negated {}", e.value, e.negated_value);
    }
    Ok(())
}
