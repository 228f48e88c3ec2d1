//! Value of the quadratic regulator perturbed by an impulse `eps` at `t = ½`,
//! with the dual solutions as supporting slopes.

use bolza::convex::{ConvexFn, Plq};
use bolza::integrand::{EndpointFn, TimeIntegrand};
use bolza::measure::{BaseMeasure, DiscreteRadonMeasure, Grid};
use bolza::solver::{value_sweep, SolveConfig};

fn main() -> bolza::Result<()> {
    let grid = Grid::uniform(1.0, 400, 1)?;
    let q = ConvexFn::broadcast(Plq::quadratic(0.5, 0.0, 0.0), 1);
    let k = TimeIntegrand::constant(grid.clone(), q.clone(), q)?;
    let end = EndpointFn::new(ConvexFn::new(vec![Plq::point(1.0)])?, ConvexFn::zero(1))?;
    let u1 = DiscreteRadonMeasure::atom(BaseMeasure::lebesgue(grid), 0.5, vec![1.0])?;

    let eps: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let r = value_sweep(&k, &end, &u1, &eps, &SolveConfig::default())?;
    println!("{:>5} {:>12} {:>12} {:>10}", "eps", "value", "dual", "slope");
    for p in &r.points {
        println!("{:>5.2} {:>12.8} {:>12.8} {:>10.6}", p.eps, p.value, p.dual_value, p.slope);
    }
    println!("convexity violation   {:.2e}", r.convexity_violation);
    println!("subgradient violation {:.2e}", r.subgradient_violation);
    Ok(())
}
