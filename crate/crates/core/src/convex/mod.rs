//! Exact convex calculus for coordinate-separable PLQ functions, plus a
//! sampled Legendre transform for everything else.

mod plq;
mod sampled;

pub use plq::{ext_real, Piece, Plq, DOMAIN_SNAP};
pub use sampled::{llt_conjugate, llt_conjugate_2d, Axis, SampledConvex, SampledConvex2};

use serde::{Deserialize, Serialize};

use crate::error::{BolzaError, Result};

/// Closed interval with possibly infinite ends; JSON form `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntervalRepr", into = "IntervalRepr")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr(#[serde(with = "ext_real::vec")] Vec<f64>);

impl TryFrom<IntervalRepr> for Interval {
    type Error = BolzaError;

    fn try_from(r: IntervalRepr) -> Result<Self> {
        if r.0.len() != 2 {
            return Err(BolzaError::invalid("an interval is a pair [lo, hi]"));
        }
        let lo = if r.0[0].is_nan() { f64::NEG_INFINITY } else { r.0[0] };
        let hi = if r.0[1].is_nan() { f64::INFINITY } else { r.0[1] };
        if lo > hi {
            return Err(BolzaError::invalid(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }
}

impl From<Interval> for IntervalRepr {
    fn from(i: Interval) -> Self {
        IntervalRepr(vec![i.lo, i.hi])
    }
}

impl Interval {
    pub const REAL: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(z: f64) -> Self {
        Interval { lo: z, hi: z }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub fn contains(&self, z: f64) -> bool {
        self.lo <= z && z <= self.hi
    }

    /// Membership with a relative slack `tol` at finite ends.
    pub fn contains_within(&self, z: f64, tol: f64) -> bool {
        self.distance(z) <= tol * (1.0 + z.abs())
    }

    pub fn distance(&self, z: f64) -> f64 {
        if z < self.lo {
            self.lo - z
        } else if z > self.hi {
            z - self.hi
        } else {
            0.0
        }
    }

    pub fn intersect(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.max(o.lo), hi: self.hi.min(o.hi) }
    }

    pub fn is_subset(&self, o: &Interval) -> bool {
        self.is_empty() || (o.lo <= self.lo && self.hi <= o.hi)
    }
}

/// Product of intervals, one per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxDomain(pub Vec<Interval>);

impl BoxDomain {
    pub fn real(d: usize) -> Self {
        BoxDomain(vec![Interval::REAL; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().any(Interval::is_empty)
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        self.0.len() == z.len() && self.0.iter().zip(z).all(|(i, &v)| i.contains(v))
    }

    pub fn intersect(&self, o: &BoxDomain) -> BoxDomain {
        BoxDomain(self.0.iter().zip(&o.0).map(|(a, b)| a.intersect(b)).collect())
    }

    /// First coordinate where `self ⊄ o`, if any.
    pub fn subset_witness(&self, o: &BoxDomain) -> Option<usize> {
        if self.is_empty() {
            return None;
        }
        self.0.iter().zip(&o.0).position(|(a, b)| !a.is_subset(b))
    }

    /// Euclidean distance from `z` to the box.
    pub fn distance(&self, z: &[f64]) -> f64 {
        self.0.iter().zip(z).map(|(i, &v)| i.distance(v).powi(2)).sum::<f64>().sqrt()
    }
}

/// Normal cone of the box `b` at `z`, coordinatewise.
///
/// Points within [`DOMAIN_SNAP`] of an end count as lying on it.
pub fn normal_cone_box(b: &BoxDomain, z: &[f64]) -> Result<BoxDomain> {
    normal_cone_box_tol(b, z, DOMAIN_SNAP)
}

/// [`normal_cone_box`] with an explicit relative activity tolerance.
pub fn normal_cone_box_tol(b: &BoxDomain, z: &[f64], tol: f64) -> Result<BoxDomain> {
    if b.dim() != z.len() {
        return Err(BolzaError::invalid(format!("box has dimension {}, point {}", b.dim(), z.len())));
    }
    let mut out = Vec::with_capacity(z.len());
    for (iv, &v) in b.0.iter().zip(z) {
        let slack = |e: f64| tol * (1.0 + e.abs());
        let at_lo = iv.lo.is_finite() && (v - iv.lo).abs() <= slack(iv.lo);
        let at_hi = iv.hi.is_finite() && (v - iv.hi).abs() <= slack(iv.hi);
        if !at_lo && !at_hi && !iv.contains(v) {
            return Err(BolzaError::OutOfDomain { point: v, lo: iv.lo, hi: iv.hi });
        }
        out.push(match (at_lo, at_hi) {
            (true, true) => Interval::REAL,
            (true, false) => Interval::new(f64::NEG_INFINITY, 0.0),
            (false, true) => Interval::new(0.0, f64::INFINITY),
            (false, false) => Interval::ZERO,
        });
    }
    Ok(BoxDomain(out))
}

/// Coordinate-separable convex function `f(x) = Σ_c f_c(x_c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Plq>", into = "Vec<Plq>")]
pub struct ConvexFn {
    terms: Vec<Plq>,
}

impl TryFrom<Vec<Plq>> for ConvexFn {
    type Error = BolzaError;

    fn try_from(terms: Vec<Plq>) -> Result<Self> {
        ConvexFn::new(terms)
    }
}

impl From<ConvexFn> for Vec<Plq> {
    fn from(f: ConvexFn) -> Self {
        f.terms
    }
}

impl ConvexFn {
    pub fn new(terms: Vec<Plq>) -> Result<Self> {
        if terms.is_empty() {
            return Err(BolzaError::invalid("a convex function needs at least one coordinate"));
        }
        Ok(ConvexFn { terms })
    }

    /// The same term in every one of `d` coordinates.
    pub fn broadcast(term: Plq, d: usize) -> Self {
        assert!(d > 0, "dimension must be positive");
        ConvexFn { terms: vec![term; d] }
    }

    pub fn zero(d: usize) -> Self {
        ConvexFn::broadcast(Plq::zero(), d)
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Plq] {
        &self.terms
    }

    pub fn term(&self, c: usize) -> &Plq {
        &self.terms[c]
    }

    /// `Σ f_c(x_c)`; `+∞` as soon as one term is.
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut s = 0.0;
        for (f, &z) in self.terms.iter().zip(x) {
            let v = f.value(z);
            if v == f64::INFINITY {
                return v;
            }
            s += v;
        }
        s
    }

    pub fn conjugate(&self) -> ConvexFn {
        ConvexFn { terms: self.terms.iter().map(Plq::conjugate).collect() }
    }

    pub fn recession(&self) -> ConvexFn {
        ConvexFn { terms: self.terms.iter().map(Plq::recession).collect() }
    }

    /// `x ↦ f(−x)`.
    pub fn reflect(&self) -> ConvexFn {
        ConvexFn { terms: self.terms.iter().map(Plq::reflect).collect() }
    }

    pub fn domain(&self) -> BoxDomain {
        BoxDomain(self.terms.iter().map(|f| Interval::new(f.lo(), f.hi())).collect())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.terms.iter().zip(x).all(|(f, &z)| f.contains(z))
    }

    /// Per-coordinate subdifferential intervals.
    pub fn subdiff(&self, x: &[f64]) -> Result<BoxDomain> {
        if x.len() != self.dim() {
            return Err(BolzaError::invalid(format!("point has dimension {}, function {}", x.len(), self.dim())));
        }
        let mut out = Vec::with_capacity(x.len());
        for (f, &z) in self.terms.iter().zip(x) {
            let (l, r) = f.subdiff(z)?;
            out.push(Interval::new(l, r));
        }
        Ok(BoxDomain(out))
    }

    pub fn approx_eq(&self, o: &ConvexFn, tol: f64) -> bool {
        self.dim() == o.dim() && self.terms.iter().zip(&o.terms).all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// `H(x, y) = φ(x) − ψ*(y)` for `K(x, u) = φ(x) + ψ(u)`, with `ψ*` computed once.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    phi: ConvexFn,
    psi_conj: ConvexFn,
}

impl Hamiltonian {
    pub fn new(phi: &ConvexFn, psi: &ConvexFn) -> Result<Self> {
        if phi.dim() != psi.dim() {
            return Err(BolzaError::invalid("state and velocity parts differ in dimension"));
        }
        Ok(Hamiltonian { phi: phi.clone(), psi_conj: psi.conjugate() })
    }

    /// `−∞` when `ψ*(y) = +∞`; otherwise `+∞` when `φ(x) = +∞`.
    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        let s = self.psi_conj.value(y);
        if s == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        self.phi.value(x) - s
    }

    pub fn state_part(&self) -> &ConvexFn {
        &self.phi
    }

    pub fn velocity_conjugate(&self) -> &ConvexFn {
        &self.psi_conj
    }
}

pub fn hamiltonian(phi: &ConvexFn, psi: &ConvexFn, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != phi.dim() || y.len() != psi.dim() {
        return Err(BolzaError::invalid("point dimensions do not match the integrand"));
    }
    Ok(Hamiltonian::new(phi, psi)?.value(x, y))
}

/// Conjugates of both parts: the dual integrand is `(y, v) ↦ φ*(v) + ψ*(y)`.
pub fn dual_integrand(phi: &ConvexFn, psi: &ConvexFn) -> Result<(ConvexFn, ConvexFn)> {
    if phi.dim() != psi.dim() {
        return Err(BolzaError::invalid("state and velocity parts differ in dimension"));
    }
    Ok((phi.conjugate(), psi.conjugate()))
}

/// Dual endpoint terms `(k₀*, b ↦ k_T*(−b))`.
pub fn dual_endpoint(k0: &ConvexFn, kt: &ConvexFn) -> Result<(ConvexFn, ConvexFn)> {
    if k0.dim() != kt.dim() {
        return Err(BolzaError::invalid("endpoint blocks differ in dimension"));
    }
    Ok((k0.conjugate(), kt.conjugate().reflect()))
}
