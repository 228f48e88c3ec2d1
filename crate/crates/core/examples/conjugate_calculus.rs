//! Exact conjugates and recession functions of piecewise linear-quadratic
//! terms, and the sampled transform for a function outside that class.

use bolza::convex::{llt_conjugate, Axis, Piece, Plq, SampledConvex};

fn main() -> bolza::Result<()> {
    // Huber-like: quadratic on [-1, 1], linear outside
    let huber = Plq::new(
        f64::NEG_INFINITY,
        f64::INFINITY,
        vec![-1.0, 1.0],
        vec![Piece::new(0.0, -1.0, -0.5), Piece::new(0.5, 0.0, 0.0), Piece::new(0.0, 1.0, -0.5)],
    )?;
    let conj = huber.conjugate();
    println!("f       = {huber}");
    println!("f*      = {conj}");
    println!("f**     = {}", conj.conjugate());
    println!("f** == f: {}", conj.conjugate() == huber);
    println!("f^inf   = {}", huber.recession());

    // Fenchel-Young holds with equality exactly on the graph of the subdifferential
    for z in [-2.0, -1.0, 0.3, 1.0, 4.0] {
        let (lo, hi) = huber.subdiff(z)?;
        let w = 0.5 * (lo + hi);
        let slack = huber.value(z) + conj.value(w) - z * w;
        println!("z = {z:+.1}: subgradient {w:+.2}, f(z) + f*(w) - zw = {slack:.1e}");
    }

    let box_ind = Plq::indicator(-1.0, 2.0)?;
    println!("indicator [-1, 2]: conjugate {}", box_ind.conjugate());

    // exp is not PLQ; sample it and transform on a dual axis
    let f = SampledConvex::from_fn(Axis::span(-5.0, 3.0, 8001)?, f64::exp)?;
    let g = llt_conjugate(&f, &Axis::span(0.5, 10.0, 20)?)?;
    for (w, v) in g.axis.points().zip(&g.values).step_by(5) {
        let exact = w * w.ln() - w;
        println!("exp*({w:.2}) = {v:.6}  (exact {exact:.6})");
    }
    Ok(())
}
