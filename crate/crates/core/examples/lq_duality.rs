//! Linear-quadratic regulator with a fixed initial state: primal and dual
//! solves against the closed form `½ tanh 1`.

use std::time::Instant;

use bolza::convex::{ConvexFn, Plq};
use bolza::integrand::{EndpointFn, TimeIntegrand};
use bolza::measure::{BaseMeasure, DiscreteRadonMeasure, Grid};
use bolza::solver::{duality_gap, SolveConfig};

fn main() -> bolza::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let grid = Grid::uniform(1.0, n, 1)?;
    let half_square = ConvexFn::broadcast(Plq::quadratic(0.5, 0.0, 0.0), 1);
    let k = TimeIntegrand::constant(grid.clone(), half_square.clone(), half_square)?;
    let end = EndpointFn::new(ConvexFn::new(vec![Plq::point(1.0)])?, ConvexFn::zero(1))?;
    let u = DiscreteRadonMeasure::zero(BaseMeasure::lebesgue(grid));

    let start = Instant::now();
    let r = duality_gap(&k, &end, &u, &SolveConfig::default())?;
    let exact = 0.5 * 1f64.tanh();
    println!("N = {n}, {:.2?}", start.elapsed());
    println!("primal {:.9}  (converged: {})", r.primal.value, r.primal.converged);
    println!("dual   {:.9}  (converged: {})", r.dual.value, r.dual.converged);
    println!("exact  {exact:.9}");
    println!("gap    {:.3e}", r.gap);
    println!("iterations: primal {}, dual {}", r.primal.summary.iterations, r.dual.summary.iterations);

    let y = &r.dual.decision;
    let worst = (0..=n)
        .map(|j| {
            let t = j as f64 / n as f64;
            (y.node_value(j)[0] + (1.0 - t).sinh() / 1f64.cosh()).abs()
        })
        .fold(0.0, f64::max);
    println!("max |y + sinh(1-t)/cosh 1| = {worst:.3e}");
    Ok(())
}
