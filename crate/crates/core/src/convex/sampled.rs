//! Sampled convex functions and their discrete Legendre transform.

use serde::{Deserialize, Serialize};

use crate::error::{BolzaError, Result};

/// Uniform abscissae `start + i * step`, `i < len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if len == 0 || !start.is_finite() || !step.is_finite() || (len > 1 && step <= 0.0) {
            return Err(BolzaError::invalid(format!("bad axis start={start} step={step} len={len}")));
        }
        Ok(Axis { start, step, len })
    }

    /// `len` equispaced points covering `[lo, hi]`.
    pub fn span(lo: f64, hi: f64, len: usize) -> Result<Self> {
        let step = if len > 1 { (hi - lo) / (len - 1) as f64 } else { 0.0 };
        Axis::new(lo, step, len)
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.point(i))
    }
}

/// Values of a function on a 1-D uniform grid; `+∞` marks points outside the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledConvex {
    pub axis: Axis,
    #[serde(with = "super::ext_real::vec")]
    pub values: Vec<f64>,
}

impl SampledConvex {
    pub fn new(axis: Axis, values: Vec<f64>) -> Result<Self> {
        if values.len() != axis.len {
            return Err(BolzaError::invalid(format!("{} values for {} abscissae", values.len(), axis.len)));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(BolzaError::invalid("sample values must be real or +inf"));
        }
        Ok(SampledConvex { axis, values })
    }

    pub fn from_fn(axis: Axis, f: impl Fn(f64) -> f64) -> Result<Self> {
        SampledConvex::new(axis, axis.points().map(f).collect())
    }
}

/// Values on a tensor grid, `values[i * y.len + j]` at `(x_i, y_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledConvex2 {
    pub x: Axis,
    pub y: Axis,
    #[serde(with = "super::ext_real::vec")]
    pub values: Vec<f64>,
}

impl SampledConvex2 {
    pub fn new(x: Axis, y: Axis, values: Vec<f64>) -> Result<Self> {
        if values.len() != x.len * y.len {
            return Err(BolzaError::invalid(format!("{} values for a {}x{} grid", values.len(), x.len, y.len)));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(BolzaError::invalid("sample values must be real or +inf"));
        }
        Ok(SampledConvex2 { x, y, values })
    }

    pub fn from_fn(x: Axis, y: Axis, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(x.len * y.len);
        for a in x.points() {
            for b in y.points() {
                values.push(f(a, b));
            }
        }
        SampledConvex2::new(x, y, values)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.y.len + j]
    }
}

struct Hull {
    /// sample indices of the lower hull, increasing abscissa
    verts: Vec<usize>,
    /// samples strictly above the hull but within rounding of it, per hull gap
    near: Vec<Vec<usize>>,
}

fn lower_hull(z: &[f64], f: &[f64], wmax: f64) -> Hull {
    let mut verts: Vec<usize> = Vec::new();
    for i in 0..z.len() {
        if f[i] == f64::INFINITY {
            continue;
        }
        while verts.len() >= 2 {
            let (a, b) = (verts[verts.len() - 2], verts[verts.len() - 1]);
            // drop b when it lies strictly above the chord a–i
            if (f[b] - f[a]) * (z[i] - z[a]) > (f[i] - f[a]) * (z[b] - z[a]) {
                verts.pop();
            } else {
                break;
            }
        }
        verts.push(i);
    }
    let mut near = vec![Vec::new(); verts.len().saturating_sub(1)];
    for (g, w) in verts.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let slope = (f[b] - f[a]) / (z[b] - z[a]);
        for j in a + 1..b {
            if f[j] == f64::INFINITY {
                continue;
            }
            let chord = f[a] + slope * (z[j] - z[a]);
            let slack = 1e-9 * (1.0 + f[j].abs() + z[j].abs() * wmax);
            if f[j] - chord <= slack {
                near[g].push(j);
            }
        }
    }
    Hull { verts, near }
}

fn conjugate_samples(z: &[f64], f: &[f64], dual: &Axis) -> Result<Vec<f64>> {
    if f.iter().all(|v| *v == f64::INFINITY) {
        return Err(BolzaError::invalid("sampled function is +inf everywhere"));
    }
    let wmax = dual.point(0).abs().max(dual.point(dual.len - 1).abs());
    let hull = lower_hull(z, f, wmax);
    let h = hull.verts.len();
    let val = |w: f64, i: usize| w * z[i] - f[i];
    let mut out = Vec::with_capacity(dual.len);
    let mut k = 0;
    for q in 0..dual.len {
        let w = dual.point(q);
        while k + 1 < h && val(w, hull.verts[k + 1]) >= val(w, hull.verts[k]) {
            k += 1;
        }
        // the maximiser in exact arithmetic is hull vertex k; take the
        // floating maximum over its neighbourhood so the result is the
        // same number a direct double loop produces
        let lo = k.saturating_sub(2);
        let hi = (k + 2).min(h - 1);
        let mut best = f64::NEG_INFINITY;
        for kk in lo..=hi {
            best = best.max(val(w, hull.verts[kk]));
        }
        for g in lo..hi {
            for &j in &hull.near[g] {
                best = best.max(val(w, j));
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Discrete conjugate `g(w) = max_i (w z_i − f(z_i))` on the dual axis, in
/// time linear in the number of samples plus dual points.
pub fn llt_conjugate(f: &SampledConvex, dual: &Axis) -> Result<SampledConvex> {
    let z: Vec<f64> = f.axis.points().collect();
    let values = conjugate_samples(&z, &f.values, dual)?;
    Ok(SampledConvex { axis: *dual, values })
}

/// Two-dimensional discrete conjugate, one axis at a time.
pub fn llt_conjugate_2d(f: &SampledConvex2, dual_x: &Axis, dual_y: &Axis) -> Result<SampledConvex2> {
    let zy: Vec<f64> = f.y.points().collect();
    let zx: Vec<f64> = f.x.points().collect();
    // rows[i][b] = max_j (w_b y_j − f(x_i, y_j))
    let mut rows = vec![f64::NEG_INFINITY; f.x.len * dual_y.len];
    let mut any = false;
    for i in 0..f.x.len {
        let row = &f.values[i * f.y.len..(i + 1) * f.y.len];
        if row.iter().all(|v| *v == f64::INFINITY) {
            continue;
        }
        any = true;
        let g = conjugate_samples(&zy, row, dual_y)?;
        rows[i * dual_y.len..(i + 1) * dual_y.len].copy_from_slice(&g);
    }
    if !any {
        return Err(BolzaError::invalid("sampled function is +inf everywhere"));
    }
    let mut values = vec![0.0; dual_x.len * dual_y.len];
    let mut col = vec![0.0; f.x.len];
    for b in 0..dual_y.len {
        for i in 0..f.x.len {
            col[i] = -rows[i * dual_y.len + b];
        }
        let g = conjugate_samples(&zx, &col, dual_x)?;
        for a in 0..dual_x.len {
            values[a * dual_y.len + b] = g[a];
        }
    }
    Ok(SampledConvex2 { x: *dual_x, y: *dual_y, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(f: &SampledConvex, dual: &Axis) -> Vec<f64> {
        dual.points()
            .map(|w| {
                f.axis
                    .points()
                    .zip(&f.values)
                    .map(|(z, v)| w * z - v)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    #[test]
    fn quartic_matches_double_loop() {
        let f = SampledConvex::from_fn(Axis::span(-1.0, 1.0, 101).unwrap(), |z| z.powi(4)).unwrap();
        let dual = Axis::span(-4.0, 4.0, 161).unwrap();
        assert_eq!(llt_conjugate(&f, &dual).unwrap().values, brute(&f, &dual));
    }

    #[test]
    fn single_point_at_origin() {
        let f = SampledConvex::new(Axis::new(0.0, 1.0, 1).unwrap(), vec![0.0]).unwrap();
        let g = llt_conjugate(&f, &Axis::span(-3.0, 3.0, 7).unwrap()).unwrap();
        assert!(g.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn all_infinite_is_rejected() {
        let f = SampledConvex::new(Axis::span(0.0, 1.0, 3).unwrap(), vec![f64::INFINITY; 3]).unwrap();
        assert!(llt_conjugate(&f, &Axis::span(0.0, 1.0, 2).unwrap()).is_err());
    }

    #[test]
    fn quadratic_is_close_to_itself() {
        let h = 2.0 / 400.0;
        let f = SampledConvex::from_fn(Axis::span(-2.0, 2.0, 801).unwrap(), |z| 0.5 * z * z).unwrap();
        let g = llt_conjugate(&f, &Axis::span(-1.5, 1.5, 31).unwrap()).unwrap();
        for (w, v) in g.axis.points().zip(&g.values) {
            assert!((v - 0.5 * w * w).abs() <= h * h);
        }
    }

    #[test]
    fn two_dimensional_quadratic() {
        let ax = Axis::span(-2.0, 2.0, 81).unwrap();
        let f = SampledConvex2::from_fn(ax, ax, |a, b| 0.5 * (a * a + b * b)).unwrap();
        let d = Axis::span(-1.0, 1.0, 11).unwrap();
        let g = llt_conjugate_2d(&f, &d, &d).unwrap();
        for (i, a) in d.points().enumerate() {
            for (j, b) in d.points().enumerate() {
                assert!((g.value(i, j) - 0.5 * (a * a + b * b)).abs() < 2e-3);
            }
        }
    }
}
