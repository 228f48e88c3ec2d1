//! Optimality residuals for the regulator: the closed-form pair passes,
//! a shifted dual arc does not.

use bolza::convex::{ConvexFn, Plq};
use bolza::integrand::{EndpointFn, TimeIntegrand};
use bolza::measure::{BVArc, BaseMeasure, ContinuousArc, DiscreteRadonMeasure, Grid};
use bolza::optimality::certify;

fn main() -> bolza::Result<()> {
    let n = 2000;
    let grid = Grid::uniform(1.0, n, 1)?;
    let q = ConvexFn::broadcast(Plq::quadratic(0.5, 0.0, 0.0), 1);
    let k = TimeIntegrand::constant(grid.clone(), q.clone(), q)?;
    let end = EndpointFn::new(ConvexFn::new(vec![Plq::point(1.0)])?, ConvexFn::zero(1))?;

    let c = 1f64.cosh();
    let xs = |t: f64| (1.0 - t).cosh() / c;
    let base = BaseMeasure::lebesgue(grid.clone());
    let slopes = (0..n).map(|i| vec![(xs(grid.node(i + 1)) - xs(grid.node(i))) / base.mass(i)]).collect();
    let x = BVArc::new(vec![1.0], DiscreteRadonMeasure::new(base, slopes, vec![])?)?;
    let y = ContinuousArc::from_fn(grid, |t| vec![-(1.0 - t).sinh() / c])?;

    for (label, y) in [("closed form", y.clone()), ("shifted by 0.1", y.map_values(|v| v + 0.1))] {
        let r = certify(&k, &end, &x, &y, 1e-2)?;
        println!(
            "{label:<15} hamiltonian {:.2e}  singular {:.2e}  transversality {:.2e}  gap {:.2e}  -> {:?}",
            r.hamiltonian_residual_l1, r.singular_residual, r.transversality_residual, r.fenchel_gap, r.verdict
        );
    }
    Ok(())
}
