//! Impulsive control: the state must jump from 0 to at least 1 when the
//! lower bound switches on at `t = ½`, with total variation as the cost.

use bolza::convex::{ConvexFn, Plq};
use bolza::integrand::{EndpointFn, TimeIntegrand};
use bolza::measure::{BaseMeasure, DiscreteRadonMeasure, Grid};
use bolza::optimality::certify;
use bolza::solver::{duality_gap, SolveConfig};

fn main() -> bolza::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let grid = Grid::uniform(1.0, n, 1)?;
    let before = (ConvexFn::new(vec![Plq::indicator(0.0, f64::INFINITY)?])?, ConvexFn::broadcast(Plq::abs(), 1));
    let after = (ConvexFn::new(vec![Plq::indicator(1.0, f64::INFINITY)?])?, ConvexFn::broadcast(Plq::abs(), 1));
    let k = TimeIntegrand::switched(grid.clone(), vec![before, after], &[0.5])?;
    let end = EndpointFn::new(ConvexFn::new(vec![Plq::point(0.0)])?, ConvexFn::zero(1))?;
    let u = DiscreteRadonMeasure::zero(BaseMeasure::lebesgue(grid));

    let r = duality_gap(&k, &end, &u, &SolveConfig::default())?;
    println!("primal {:.9} (converged: {})", r.primal.value, r.primal.converged);
    println!("dual   {:.9} (converged: {})", r.dual.value, r.dual.converged);
    println!("gap    {:.3e}", r.gap);
    let dx = r.primal.decision.differential();
    for a in dx.atoms() {
        println!("atom at t = {:.4}: {:+.6}", a.t, a.mass[0]);
    }
    println!("absolutely continuous variation: {:.3e}", dx.total_variation() - dx.atoms().iter().map(|a| a.mass[0].abs()).sum::<f64>());
    let y = &r.dual.decision;
    println!("y(1/2) = {:.6}", y.eval(0.5)?[0]);

    let cert = certify(&k, &end, &r.primal.decision, y, 2e-2)?;
    println!("{}", serde_json::to_string_pretty(&cert).expect("report serialises"));
    Ok(())
}
