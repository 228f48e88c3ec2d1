//! Picard iteration for `dy = F(y) dm + dv`: Lebesgue driver, a driver with
//! an atom, and the continuity of the solution in the forcing term.

use bolza::measure::{BaseMeasure, ContinuousArc, Grid};
use bolza::ode::{continuity_probe, picard_solve, DriverMeasure, LipschitzField};

fn main() -> bolza::Result<()> {
    let grid = Grid::uniform(1.0, 10_000, 1)?;
    let field = LipschitzField::linear(grid.clone(), vec![1.0], vec![0.0])?;
    let lebesgue = DriverMeasure::atomless(&BaseMeasure::lebesgue(grid.clone()));
    let zero = ContinuousArc::constant(grid.clone(), vec![0.0])?;

    let sol = picard_solve(&field, &lebesgue, &zero, &[1.0], 1e-12)?;
    let y1 = sol.arc.right_end()[0];
    println!("y' = y, y(0) = 1: y(1) = {y1:.10}, error {:.2e}, {} iterations", (y1 - 1f64.exp()).abs(), sol.iterations);
    println!("growth bound {:.4}", sol.gronwall_bound);

    // an atom of mass ½ at t = ½ multiplies the state by 3/2
    let coarse = Grid::uniform(1.0, 4, 1)?;
    let field = LipschitzField::linear(coarse.clone(), vec![1.0], vec![0.0])?;
    let driver = DriverMeasure::new(coarse.clone(), vec![0.0; 4], &[(0.5, 0.5)])?;
    let zero = ContinuousArc::constant(coarse, vec![0.0])?;
    let sol = picard_solve(&field, &driver, &zero, &[1.0], 1e-12)?;
    println!("atom only: y before {:.6}, after {:.6}", sol.arc.value_at(0.5)?[0], sol.arc.right_end()[0]);

    let grid = Grid::uniform(1.0, 200, 1)?;
    let field = LipschitzField::linear(grid.clone(), vec![-2.0], vec![1.0])?;
    let driver = DriverMeasure::atomless(&BaseMeasure::lebesgue(grid.clone()));
    let v = ContinuousArc::from_fn(grid.clone(), |t| vec![t.sin()])?;
    let seq: Vec<ContinuousArc> = (1..=5)
        .map(|n| ContinuousArc::from_fn(grid.clone(), |t| vec![t.sin() + (10.0 * t).cos() / (n * n) as f64]))
        .collect::<bolza::Result<_>>()?;
    for row in continuity_probe(&field, &driver, &[0.0], &v, &seq, 1e-12)? {
        println!("|v_n - v| = {:.4e}  ->  |y_n - y| = {:.4e}", row.v_distance, row.y_distance);
    }
    Ok(())
}
