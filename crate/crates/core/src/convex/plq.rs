//! One-dimensional piecewise linear-quadratic (PLQ) convex functions.
//!
//! A [`Plq`] is a proper, closed, convex `f: R → R ∪ {+∞}` given by a domain
//! interval, interior breakpoints and one quadratic `a z² + p z + q` (with
//! `a >= 0`) per piece. The class is closed under conjugation and recession,
//! so both are computed exactly.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{BolzaError, Result};

/// Relative slack used when a point sits on the boundary of a domain.
/// Points within this distance of a finite endpoint are treated as lying on it.
pub const DOMAIN_SNAP: f64 = 1e-12;

const SHAPE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Piece {
    pub a: f64,
    pub p: f64,
    pub q: f64,
}

impl From<[f64; 3]> for Piece {
    fn from(c: [f64; 3]) -> Self {
        Piece { a: c[0], p: c[1], q: c[2] }
    }
}

impl From<Piece> for [f64; 3] {
    fn from(c: Piece) -> Self {
        [c.a, c.p, c.q]
    }
}

impl Piece {
    pub fn new(a: f64, p: f64, q: f64) -> Self {
        Piece { a, p, q }
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        (self.a * z + self.p) * z + self.q
    }

    #[inline]
    pub fn slope(&self, z: f64) -> f64 {
        2.0 * self.a * z + self.p
    }

    fn approx_eq(&self, o: &Piece, tol: f64) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()));
        close(self.a, o.a) && close(self.p, o.p) && close(self.q, o.q)
    }
}

/// Proper closed convex piecewise linear-quadratic function of one variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlqRepr", into = "PlqRepr")]
pub struct Plq {
    lo: f64,
    hi: f64,
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
}

impl Plq {
    /// Validates and canonicalizes a PLQ encoding.
    pub fn new(lo: f64, hi: f64, breaks: Vec<f64>, pieces: Vec<Piece>) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(BolzaError::invalid(format!("empty or malformed domain [{lo}, {hi}]")));
        }
        if pieces.len() != breaks.len() + 1 {
            return Err(BolzaError::invalid(format!(
                "{} breakpoints need {} pieces, got {}",
                breaks.len(),
                breaks.len() + 1,
                pieces.len()
            )));
        }
        if breaks.iter().any(|b| !b.is_finite() || *b <= lo || *b >= hi) {
            return Err(BolzaError::invalid("breakpoints must lie strictly inside the domain"));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BolzaError::invalid("breakpoints must be strictly increasing"));
        }
        for (k, c) in pieces.iter().enumerate() {
            if !(c.a.is_finite() && c.p.is_finite() && c.q.is_finite()) {
                return Err(BolzaError::invalid(format!("piece {k} has non-finite coefficients")));
            }
            if c.a < 0.0 {
                return Err(BolzaError::invalid(format!("piece {k} is concave (a < 0)")));
            }
        }
        for (k, &b) in breaks.iter().enumerate() {
            let (l, r) = (pieces[k], pieces[k + 1]);
            let (vl, vr) = (l.eval(b), r.eval(b));
            if (vl - vr).abs() > SHAPE_TOL * (1.0 + vl.abs().max(vr.abs())) {
                return Err(BolzaError::invalid(format!("discontinuous at breakpoint {b}: {vl} vs {vr}")));
            }
            let (sl, sr) = (l.slope(b), r.slope(b));
            if sl > sr + SHAPE_TOL * (1.0 + sl.abs().max(sr.abs())) {
                return Err(BolzaError::invalid(format!("not convex at breakpoint {b}: slopes {sl} > {sr}")));
            }
        }
        let mut f = Plq { lo, hi, breaks, pieces };
        f.canonicalize();
        Ok(f)
    }

    fn canonicalize(&mut self) {
        if self.lo == self.hi {
            let v = self.pieces[0].eval(self.lo);
            self.pieces = vec![Piece::new(0.0, 0.0, v)];
            self.breaks.clear();
            return;
        }
        let mut breaks = Vec::with_capacity(self.breaks.len());
        let mut pieces = vec![self.pieces[0]];
        for (k, &b) in self.breaks.iter().enumerate() {
            let next = self.pieces[k + 1];
            let last = pieces.last_mut().unwrap();
            if last.approx_eq(&next, 1e-12) {
                continue;
            }
            breaks.push(b);
            pieces.push(next);
        }
        self.breaks = breaks;
        self.pieces = pieces;
        // no negative zeros in output
        for piece in &mut self.pieces {
            piece.a += 0.0;
            piece.p += 0.0;
            piece.q += 0.0;
        }
        for b in &mut self.breaks {
            *b += 0.0;
        }
    }

    /// `a z² + p z + q` on all of `R` (`a >= 0`).
    pub fn quadratic(a: f64, p: f64, q: f64) -> Self {
        Plq::new(f64::NEG_INFINITY, f64::INFINITY, vec![], vec![Piece::new(a, p, q)]).expect("valid quadratic")
    }

    pub fn zero() -> Self {
        Plq::quadratic(0.0, 0.0, 0.0)
    }

    pub fn linear(p: f64, q: f64) -> Self {
        Plq::quadratic(0.0, p, q)
    }

    /// `c |z|`, `c >= 0`.
    pub fn abs_scaled(c: f64) -> Self {
        Plq::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            vec![0.0],
            vec![Piece::new(0.0, -c, 0.0), Piece::new(0.0, c, 0.0)],
        )
        .expect("valid absolute value")
    }

    pub fn abs() -> Self {
        Plq::abs_scaled(1.0)
    }

    /// Indicator of `[lo, hi]`.
    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        Plq::new(lo, hi, vec![], vec![Piece::new(0.0, 0.0, 0.0)])
    }

    /// Indicator of the single point `{c}`.
    pub fn point(c: f64) -> Self {
        Plq::indicator(c, c).expect("finite point")
    }

    /// `max(0, z)`-style hinge `c max(0, z - z0)`.
    pub fn hinge(c: f64, z0: f64) -> Self {
        Plq::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            vec![z0],
            vec![Piece::new(0.0, 0.0, 0.0), Piece::new(0.0, c, -c * z0)],
        )
        .expect("valid hinge")
    }

    /// Restricts `self` to `[lo, hi] ∩ dom self`.
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Self> {
        let (nlo, nhi) = (self.lo.max(lo), self.hi.min(hi));
        if nlo > nhi {
            return Err(BolzaError::invalid("restriction has empty domain"));
        }
        let mut breaks = Vec::new();
        let mut pieces = vec![self.pieces[self.piece_index(nlo)]];
        for (k, &b) in self.breaks.iter().enumerate() {
            if b > nlo && b < nhi {
                breaks.push(b);
                pieces.push(self.pieces[k + 1]);
            }
        }
        Plq::new(nlo, nhi, breaks, pieces)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Domain endpoints (when finite) and breakpoints, in increasing order.
    pub fn kinks(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.breaks.len() + 2);
        if self.lo.is_finite() {
            out.push(self.lo);
        }
        out.extend_from_slice(&self.breaks);
        if self.hi.is_finite() && self.hi != self.lo {
            out.push(self.hi);
        }
        out
    }

    /// Maps `z` onto the domain when it lies within [`DOMAIN_SNAP`] of it.
    #[inline]
    pub fn snap(&self, z: f64) -> Option<f64> {
        if z < self.lo {
            (self.lo - z <= DOMAIN_SNAP * (1.0 + self.lo.abs())).then_some(self.lo)
        } else if z > self.hi {
            (z - self.hi <= DOMAIN_SNAP * (1.0 + self.hi.abs())).then_some(self.hi)
        } else if z.is_nan() {
            None
        } else {
            Some(z)
        }
    }

    pub fn contains(&self, z: f64) -> bool {
        self.snap(z).is_some()
    }

    #[inline]
    pub(crate) fn piece_index(&self, z: f64) -> usize {
        self.breaks.partition_point(|&b| b < z)
    }

    /// The quadratic active at `z` (the left piece at a breakpoint).
    pub fn piece_at(&self, z: f64) -> Piece {
        self.pieces[self.piece_index(z)]
    }

    /// `f(z)`, `+∞` outside the domain.
    #[inline]
    pub fn value(&self, z: f64) -> f64 {
        match self.snap(z) {
            Some(z) => self.pieces[self.piece_index(z)].eval(z),
            None => f64::INFINITY,
        }
    }

    fn right_slope_in(&self, z: f64) -> f64 {
        if z >= self.hi {
            return f64::INFINITY;
        }
        let k = self.breaks.partition_point(|&b| b <= z);
        self.pieces[k].slope(z)
    }

    fn left_slope_in(&self, z: f64) -> f64 {
        if z <= self.lo {
            return f64::NEG_INFINITY;
        }
        let k = self.breaks.partition_point(|&b| b < z);
        self.pieces[k].slope(z)
    }

    /// `∂f(z) = [f'₋(z), f'₊(z)]`; the interval is unbounded at finite domain ends.
    pub fn subdiff(&self, z: f64) -> Result<(f64, f64)> {
        let Some(z) = self.snap(z) else {
            return Err(BolzaError::OutOfDomain { point: z, lo: self.lo, hi: self.hi });
        };
        Ok((self.left_slope_in(z), self.right_slope_in(z)))
    }

    /// Exact Legendre–Fenchel conjugate `f*(w) = sup_z { wz − f(z) }`.
    pub fn conjugate(&self) -> Plq {
        if self.lo == self.hi {
            let v = self.pieces[0].eval(self.lo);
            return Plq::linear(self.lo, -v);
        }
        // (w_lo, w_hi, piece of f*) in increasing w
        let mut segs: Vec<(f64, f64, Piece)> = Vec::new();
        let mut vertices: Vec<f64> = Vec::with_capacity(self.breaks.len() + 2);
        if self.lo.is_finite() {
            vertices.push(self.lo);
        }
        vertices.extend_from_slice(&self.breaks);
        if self.hi.is_finite() {
            vertices.push(self.hi);
        }
        let push_vertex = |segs: &mut Vec<(f64, f64, Piece)>, z: f64| {
            let (wl, wr) = (self.left_slope_in(z), self.right_slope_in(z));
            if wr > wl {
                segs.push((wl, wr, Piece::new(0.0, z, -self.value(z))));
            }
        };
        let push_piece = |segs: &mut Vec<(f64, f64, Piece)>, k: usize, zl: f64, zr: f64| {
            let c = self.pieces[k];
            if c.a > 0.0 {
                let wl = if zl.is_finite() { c.slope(zl) } else { f64::NEG_INFINITY };
                let wr = if zr.is_finite() { c.slope(zr) } else { f64::INFINITY };
                let inv = 1.0 / (4.0 * c.a);
                segs.push((wl, wr, Piece::new(inv, -c.p * 2.0 * inv, c.p * c.p * inv - c.q)));
            }
        };
        let mut zl = self.lo;
        let mut vi = 0;
        if self.lo.is_finite() {
            push_vertex(&mut segs, self.lo);
            vi = 1;
        }
        for k in 0..self.pieces.len() {
            let zr = if k < self.breaks.len() { self.breaks[k] } else { self.hi };
            push_piece(&mut segs, k, zl, zr);
            if zr.is_finite() && vi < vertices.len() {
                push_vertex(&mut segs, zr);
                vi += 1;
            }
            zl = zr;
        }
        if segs.is_empty() {
            // a single affine piece on R
            let c = self.pieces[0];
            return Plq::point(c.p).with_value_at_point(-c.q);
        }
        let lo = segs[0].0;
        let hi = segs[segs.len() - 1].1;
        if lo == hi {
            let v = segs[0].2.eval(lo);
            return Plq::point(lo).with_value_at_point(v);
        }
        let near = |a: f64, b: f64| a.is_finite() && b.is_finite() && (a - b).abs() <= DOMAIN_SNAP * (1.0 + a.abs().max(b.abs()));
        let mut breaks: Vec<f64> = Vec::with_capacity(segs.len());
        let mut pieces = Vec::with_capacity(segs.len());
        for (i, (wl, _wr, c)) in segs.iter().enumerate() {
            if i > 0 {
                let prev_end = segs[i - 1].1;
                let b = if prev_end.is_finite() { prev_end } else { *wl };
                if b >= hi || near(b, hi) {
                    // the remaining pieces are slivers at the right end
                    break;
                }
                if let Some(&last) = breaks.last() {
                    if b <= last || near(b, last) {
                        // degenerate sliver from rounding: keep the newer piece
                        pieces.pop();
                        breaks.pop();
                    }
                }
                if b <= lo || near(b, lo) {
                    pieces.clear();
                    breaks.clear();
                } else {
                    breaks.push(b);
                }
            }
            pieces.push(*c);
        }
        let mut f = Plq { lo, hi, breaks, pieces };
        f.canonicalize();
        f
    }

    fn with_value_at_point(mut self, v: f64) -> Plq {
        self.pieces = vec![Piece::new(0.0, 0.0, v)];
        self
    }

    /// Recession function `f^∞(z) = lim_{α→∞} f(αz + z̄)/α`, sublinear and closed.
    pub fn recession(&self) -> Plq {
        let right = if self.hi.is_finite() {
            None
        } else {
            let c = self.pieces[self.pieces.len() - 1];
            (c.a == 0.0).then_some(c.p)
        };
        let left = if self.lo.is_finite() {
            None
        } else {
            let c = self.pieces[0];
            (c.a == 0.0).then_some(c.p)
        };
        match (left, right) {
            (None, None) => Plq::point(0.0),
            (None, Some(pr)) => Plq::new(0.0, f64::INFINITY, vec![], vec![Piece::new(0.0, pr, 0.0)]).unwrap(),
            (Some(pl), None) => Plq::new(f64::NEG_INFINITY, 0.0, vec![], vec![Piece::new(0.0, pl, 0.0)]).unwrap(),
            (Some(pl), Some(pr)) => Plq::new(
                f64::NEG_INFINITY,
                f64::INFINITY,
                vec![0.0],
                vec![Piece::new(0.0, pl, 0.0), Piece::new(0.0, pr, 0.0)],
            )
            .unwrap(),
        }
    }

    /// `z ↦ f(−z)`.
    pub fn reflect(&self) -> Plq {
        let breaks = self.breaks.iter().rev().map(|b| -b).collect();
        let pieces = self.pieces.iter().rev().map(|c| Piece::new(c.a, -c.p, c.q)).collect();
        Plq { lo: -self.hi, hi: -self.lo, breaks, pieces }
    }

    /// `argmin_z f(z) + (z − v)² / (2t)`, `t > 0`.
    pub fn prox(&self, v: f64, t: f64) -> f64 {
        let mut best = (f64::INFINITY, self.lo.max(v.min(self.hi)));
        let inv = 1.0 / t;
        for (k, c) in self.pieces.iter().enumerate() {
            let zl = if k == 0 { self.lo } else { self.breaks[k - 1] };
            let zr = if k == self.breaks.len() { self.hi } else { self.breaks[k] };
            let z = ((v * inv - c.p) / (2.0 * c.a + inv)).clamp(zl, zr);
            let obj = c.eval(z) + 0.5 * inv * (z - v) * (z - v);
            if obj < best.0 {
                best = (obj, z);
            }
        }
        best.1
    }

    /// Structural equality up to a relative tolerance on every field.
    pub fn approx_eq(&self, other: &Plq, tol: f64) -> bool {
        let close = |x: f64, y: f64| x == y || (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()));
        close(self.lo, other.lo)
            && close(self.hi, other.hi)
            && self.breaks.len() == other.breaks.len()
            && self.breaks.iter().zip(&other.breaks).all(|(a, b)| close(*a, *b))
            && self.pieces.iter().zip(&other.pieces).all(|(a, b)| a.approx_eq(b, tol))
    }

    /// True when the function is an indicator (zero on its domain, possibly plus a constant).
    pub fn is_flat(&self) -> bool {
        self.pieces.len() == 1 && self.pieces[0].a == 0.0 && self.pieces[0].p == 0.0
    }
}

impl fmt::Display for Plq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PLQ on [{}, {}]", self.lo, self.hi)?;
        for (k, c) in self.pieces.iter().enumerate() {
            let zl = if k == 0 { self.lo } else { self.breaks[k - 1] };
            write!(f, "; [{zl}, ..): {}z²+{}z+{}", c.a, c.p, c.q)?;
        }
        Ok(())
    }
}

/// Serde helpers for extended reals: numbers, `null`, or the strings `"inf"`, `"-inf"`.
pub mod ext_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
        Null(()),
    }

    pub(crate) fn parse_str(s: &str) -> Option<f64> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
            "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
            other => other.parse().ok(),
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => parse_str(&s).ok_or_else(|| de::Error::custom(format!("not an extended real: {s}"))),
            Raw::Null(()) => Ok(f64::NAN),
        }
    }

    /// Same, for a `Vec<f64>`.
    pub mod vec {
        use serde::{ser::SerializeSeq, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&super::Wrapper(*x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let raw: Vec<super::Wrapper> = Vec::deserialize(d)?;
            Ok(raw.into_iter().map(|w| w.0).collect())
        }
    }

    #[derive(serde::Serialize, Deserialize)]
    pub(crate) struct Wrapper(#[serde(with = "super::ext_real")] pub f64);
}

#[derive(Serialize, Deserialize)]
struct PlqRepr {
    #[serde(with = "ext_real::vec")]
    dom: Vec<f64>,
    #[serde(default)]
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
}

impl TryFrom<PlqRepr> for Plq {
    type Error = BolzaError;

    fn try_from(r: PlqRepr) -> Result<Self> {
        if r.dom.len() != 2 {
            return Err(BolzaError::invalid("dom must have two entries"));
        }
        // null stands for the unbounded end on either side
        let lo = if r.dom[0].is_nan() { f64::NEG_INFINITY } else { r.dom[0] };
        let hi = if r.dom[1].is_nan() { f64::INFINITY } else { r.dom[1] };
        Plq::new(lo, hi, r.breaks, r.pieces)
    }
}

impl From<Plq> for PlqRepr {
    fn from(f: Plq) -> Self {
        PlqRepr { dom: vec![f.lo, f.hi], breaks: f.breaks, pieces: f.pieces }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_encodings() {
        let inf = f64::INFINITY;
        assert!(Plq::new(1.0, 0.0, vec![], vec![Piece::new(0.0, 0.0, 0.0)]).is_err());
        assert!(Plq::new(-inf, inf, vec![0.0], vec![Piece::new(0.0, 1.0, 0.0), Piece::new(0.0, -1.0, 0.0)]).is_err());
        assert!(Plq::new(-inf, inf, vec![0.0], vec![Piece::new(0.0, 0.0, 0.0), Piece::new(0.0, 0.0, 1.0)]).is_err());
        assert!(Plq::new(-inf, inf, vec![], vec![Piece::new(-1.0, 0.0, 0.0)]).is_err());
        assert!(Plq::new(0.0, 1.0, vec![2.0], vec![Piece::new(0.0, 0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn canonical_merge_of_collinear_pieces() {
        let inf = f64::INFINITY;
        let f = Plq::new(-inf, inf, vec![0.0], vec![Piece::new(0.0, 1.0, 0.0); 2]).unwrap();
        assert!(f.breaks().is_empty());
    }

    #[test]
    fn conjugate_examples() {
        let half = Plq::quadratic(0.5, 0.0, 0.0);
        assert!(half.conjugate().approx_eq(&half, 1e-15));

        let abs = Plq::abs().conjugate();
        assert!(abs.approx_eq(&Plq::indicator(-1.0, 1.0).unwrap(), 1e-15));

        let box01 = Plq::indicator(0.0, 1.0).unwrap().conjugate();
        assert!(box01.approx_eq(&Plq::hinge(1.0, 0.0), 1e-15));
        for w in [-2.0, -0.1, 0.0, 0.3, 4.0] {
            assert_eq!(box01.value(w), w.max(0.0));
        }

        let pt = Plq::point(2.0).conjugate();
        assert_eq!(pt.value(3.0), 6.0);
        let aff = Plq::linear(2.0, 1.0).conjugate();
        assert_eq!(aff.domain(), (2.0, 2.0));
        assert_eq!(aff.value(2.0), -1.0);
        assert_eq!(aff.value(2.5), f64::INFINITY);
    }

    #[test]
    fn conjugate_of_huber_like_function() {
        // f(z) = z²/2 on [-1,1], |z| - 1/2 outside
        let inf = f64::INFINITY;
        let f = Plq::new(
            -inf,
            inf,
            vec![-1.0, 1.0],
            vec![Piece::new(0.0, -1.0, -0.5), Piece::new(0.5, 0.0, 0.0), Piece::new(0.0, 1.0, -0.5)],
        )
        .unwrap();
        let g = f.conjugate();
        assert_eq!(g.domain(), (-1.0, 1.0));
        assert!((g.value(0.5) - 0.125).abs() < 1e-15);
        assert!(g.conjugate().approx_eq(&f, 1e-12));
    }

    #[test]
    fn recession_examples() {
        assert!(Plq::quadratic(0.5, 0.0, 0.0).recession().approx_eq(&Plq::point(0.0), 0.0));
        assert!(Plq::abs().recession().approx_eq(&Plq::abs(), 0.0));
        assert!(Plq::indicator(0.0, 1.0).unwrap().recession().approx_eq(&Plq::point(0.0), 0.0));
        let h = Plq::hinge(1.0, 3.0).recession();
        assert_eq!(h.value(-2.0), 0.0);
        assert_eq!(h.value(2.0), 2.0);
        let half_line = Plq::indicator(1.0, f64::INFINITY).unwrap().recession();
        assert_eq!(half_line.value(5.0), 0.0);
        assert_eq!(half_line.value(-5.0), f64::INFINITY);
    }

    #[test]
    fn subdiff_examples() {
        assert_eq!(Plq::abs().subdiff(0.0).unwrap(), (-1.0, 1.0));
        assert_eq!(Plq::quadratic(0.5, 0.0, 0.0).subdiff(3.0).unwrap(), (3.0, 3.0));
        assert_eq!(Plq::indicator(0.0, 1.0).unwrap().subdiff(1.0).unwrap(), (0.0, f64::INFINITY));
        assert_eq!(Plq::indicator(0.0, 1.0).unwrap().subdiff(0.0).unwrap(), (f64::NEG_INFINITY, 0.0));
        assert_eq!(Plq::point(0.0).subdiff(0.0).unwrap(), (f64::NEG_INFINITY, f64::INFINITY));
        assert!(matches!(
            Plq::indicator(0.0, 1.0).unwrap().subdiff(2.0),
            Err(BolzaError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn prox_matches_closed_forms() {
        // soft thresholding
        assert_eq!(Plq::abs().prox(3.0, 1.0), 2.0);
        assert_eq!(Plq::abs().prox(0.5, 1.0), 0.0);
        // projection
        assert_eq!(Plq::indicator(0.0, 1.0).unwrap().prox(3.0, 0.1), 1.0);
        // quadratic shrink
        assert!((Plq::quadratic(0.5, 0.0, 0.0).prox(2.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_with_infinite_ends() {
        let f = Plq::indicator(1.0, f64::INFINITY).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"dom":[1.0,"inf"],"breaks":[],"pieces":[[0.0,0.0,0.0]]}"#);
        let g: Plq = serde_json::from_str(r#"{"dom":[null,null],"pieces":[[0.5,0,0]]}"#).unwrap();
        assert_eq!(g, Plq::quadratic(0.5, 0.0, 0.0));
        let bad: std::result::Result<Plq, _> = serde_json::from_str(r#"{"dom":[0,1],"pieces":[[-1,0,0]]}"#);
        assert!(bad.is_err());
    }
}
