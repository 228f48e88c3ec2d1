//! Outer regularity and inner semicontinuity of box-valued domain maps at
//! their switching times.

use bolza::convex::BoxDomain;
use bolza::integrand::{check_regularity, interval_box, DomainMap, Side};
use bolza::measure::Grid;

fn show(name: &str, map: &DomainMap) {
    for side in [Side::TwoSided, Side::Left] {
        let r = check_regularity(map, side);
        print!("{name:<28} {side:<10?} outer regular {:<5}  inner semicontinuous {:<5}", r.outer_regular, r.inner_semicontinuous);
        if let Some(b) = r.breakpoints.iter().find(|b| !b.outer_regular) {
            if let Some(w) = b.outer_witness {
                print!("  (at t = {}: {} escapes)", b.t, w.point);
            }
        }
        println!();
    }
}

fn main() -> bolza::Result<()> {
    let grid = Grid::uniform(1.0, 2, 1)?;
    let cells = |a: BoxDomain, b: BoxDomain| vec![a, b];

    // the switch point takes the right-hand box
    let jump_up = DomainMap::from_cells(grid.clone(), cells(interval_box(0.0, f64::INFINITY), interval_box(1.0, f64::INFINITY)))?;
    show("[0,inf) -> [1,inf)", &jump_up);

    // node box is the union of both sides
    let widened = DomainMap::new(
        grid.clone(),
        cells(interval_box(0.0, 1.0), interval_box(2.0, 3.0)),
        vec![interval_box(0.0, 1.0), interval_box(0.0, 3.0), interval_box(2.0, 3.0)],
    )?;
    show("[0,1] | [0,3] | [2,3]", &widened);

    // node box is strictly smaller than both sides
    let pinched = DomainMap::new(
        grid,
        cells(interval_box(-1.0, 1.0), interval_box(-1.0, 1.0)),
        vec![interval_box(-1.0, 1.0), interval_box(0.0, 0.0), interval_box(-1.0, 1.0)],
    )?;
    show("[-1,1] | {0} | [-1,1]", &pinched);
    Ok(())
}
