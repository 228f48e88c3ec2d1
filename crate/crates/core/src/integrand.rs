//! Problem data: separable integrands that are piecewise constant in time,
//! endpoint functions, the functionals built from them, and diagnostics on
//! the domain of the Hamiltonian.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::convex::{BoxDomain, ConvexFn, Hamiltonian, Interval, Plq};
use crate::error::{BolzaError, Result};
use crate::measure::{BVArc, BaseMeasure, ContinuousArc, DiscreteRadonMeasure, Grid};

/// `K(x, u) = φ(x) + ψ(u)` on one time cell, with the derived pieces cached.
#[derive(Clone, Debug)]
pub struct CellIntegrand {
    phi: ConvexFn,
    psi: ConvexFn,
    phi_conj: ConvexFn,
    psi_conj: ConvexFn,
    psi_rec: ConvexFn,
}

impl PartialEq for CellIntegrand {
    fn eq(&self, o: &Self) -> bool {
        self.phi == o.phi && self.psi == o.psi
    }
}

impl CellIntegrand {
    pub fn new(phi: ConvexFn, psi: ConvexFn) -> Result<Self> {
        if phi.dim() != psi.dim() {
            return Err(BolzaError::invalid(format!(
                "state part has dimension {}, velocity part {}",
                phi.dim(),
                psi.dim()
            )));
        }
        let phi_conj = phi.conjugate();
        let psi_conj = psi.conjugate();
        let psi_rec = psi.recession();
        Ok(CellIntegrand { phi, psi, phi_conj, psi_conj, psi_rec })
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn phi(&self) -> &ConvexFn {
        &self.phi
    }

    pub fn psi(&self) -> &ConvexFn {
        &self.psi
    }

    pub fn phi_conj(&self) -> &ConvexFn {
        &self.phi_conj
    }

    pub fn psi_conj(&self) -> &ConvexFn {
        &self.psi_conj
    }

    /// `u ↦ K^∞(0, u) = ψ^∞(u)`.
    pub fn psi_recession(&self) -> &ConvexFn {
        &self.psi_rec
    }

    pub fn value(&self, x: &[f64], u: &[f64]) -> f64 {
        let a = self.phi.value(x);
        if a == f64::INFINITY {
            return a;
        }
        a + self.psi.value(u)
    }

    pub fn hamiltonian(&self, x: &[f64], y: &[f64]) -> f64 {
        let s = self.psi_conj.value(y);
        if s == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        self.phi.value(x) - s
    }

    pub fn to_hamiltonian(&self) -> Hamiltonian {
        Hamiltonian::new(&self.phi, &self.psi).expect("dimensions checked on construction")
    }

    /// `(y, v) ↦ φ*(v) + ψ*(y)`, as a state/velocity split.
    pub fn dual(&self) -> CellIntegrand {
        CellIntegrand {
            phi: self.psi_conj.clone(),
            psi: self.phi_conj.clone(),
            phi_conj: self.psi.clone(),
            psi_conj: self.phi.clone(),
            psi_rec: self.phi_conj.recession(),
        }
    }

    pub fn recession(&self) -> Result<CellIntegrand> {
        CellIntegrand::new(self.phi.recession(), self.psi_rec.clone())
    }
}

/// Integrand that is constant on each grid cell. Distinct cell integrands are
/// stored once and shared between cells.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeIntegrand {
    grid: Grid,
    parts: Vec<Arc<CellIntegrand>>,
    cell_part: Vec<usize>,
}

impl TimeIntegrand {
    /// The same integrand on every cell.
    pub fn constant(grid: Grid, phi: ConvexFn, psi: ConvexFn) -> Result<Self> {
        TimeIntegrand::piecewise(grid, vec![(phi, psi)], |_| 0)
    }

    /// `parts[select(i)]` on cell `i`.
    pub fn piecewise(grid: Grid, parts: Vec<(ConvexFn, ConvexFn)>, select: impl Fn(usize) -> usize) -> Result<Self> {
        let parts = parts
            .into_iter()
            .map(|(phi, psi)| CellIntegrand::new(phi, psi).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        let cell_part: Vec<usize> = (0..grid.cells()).map(select).collect();
        TimeIntegrand::from_parts(grid, parts, cell_part)
    }

    /// `parts[k]` on every cell whose left node lies in `[until[k-1], until[k])`.
    /// The last part extends to the horizon.
    pub fn switched(grid: Grid, parts: Vec<(ConvexFn, ConvexFn)>, until: &[f64]) -> Result<Self> {
        if until.len() + 1 != parts.len() {
            return Err(BolzaError::invalid("need one switching time fewer than parts"));
        }
        if until.windows(2).any(|w| w[1] < w[0]) {
            return Err(BolzaError::invalid("switching times must be nondecreasing"));
        }
        let nodes = grid.nodes().to_vec();
        let until = until.to_vec();
        TimeIntegrand::piecewise(grid, parts, move |i| until.partition_point(|&s| s <= nodes[i]))
    }

    pub fn from_parts(grid: Grid, parts: Vec<Arc<CellIntegrand>>, cell_part: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(BolzaError::invalid("integrand needs at least one part"));
        }
        if cell_part.len() != grid.cells() {
            return Err(BolzaError::GridMismatch(format!(
                "{} cell assignments for {} cells",
                cell_part.len(),
                grid.cells()
            )));
        }
        if let Some(&k) = cell_part.iter().find(|&&k| k >= parts.len()) {
            return Err(BolzaError::invalid(format!("cell refers to missing part {k}")));
        }
        if let Some(p) = parts.iter().find(|p| p.dim() != grid.dim()) {
            return Err(BolzaError::invalid(format!(
                "integrand has dimension {}, grid {}",
                p.dim(),
                grid.dim()
            )));
        }
        Ok(TimeIntegrand { grid, parts, cell_part })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn cells(&self) -> usize {
        self.grid.cells()
    }

    pub fn cell(&self, i: usize) -> &CellIntegrand {
        &self.parts[self.cell_part[i]]
    }

    /// Integrand in force at time `t` (the cell `[t_{i-1}, t_i)` containing it).
    pub fn at(&self, t: f64) -> Result<&CellIntegrand> {
        Ok(self.cell(self.grid.cell_of(t)?))
    }

    pub fn parts(&self) -> &[Arc<CellIntegrand>] {
        &self.parts
    }

    pub fn part_of(&self, i: usize) -> usize {
        self.cell_part[i]
    }

    /// `(y, v) ↦ φ*(v) + ψ*(y)` on every cell.
    pub fn dual(&self) -> TimeIntegrand {
        TimeIntegrand {
            grid: self.grid.clone(),
            parts: self.parts.iter().map(|p| Arc::new(p.dual())).collect(),
            cell_part: self.cell_part.clone(),
        }
    }

    pub fn recession(&self) -> TimeIntegrand {
        TimeIntegrand {
            grid: self.grid.clone(),
            parts: self.parts.iter().map(|p| Arc::new(p.recession().expect("same dimensions"))).collect(),
            cell_part: self.cell_part.clone(),
        }
    }

    /// Same data on a grid whose cells subdivide the current ones.
    pub fn refine(&self, factor: usize) -> TimeIntegrand {
        let cell_part = self.cell_part.iter().flat_map(|&k| std::iter::repeat(k).take(factor)).collect();
        TimeIntegrand { grid: self.grid.refine(factor), parts: self.parts.clone(), cell_part }
    }
}

/// Endpoint cost `k(a, b) = k₀(a) + k_T(b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointFn {
    pub k0: ConvexFn,
    #[serde(rename = "kT")]
    pub kt: ConvexFn,
}

impl EndpointFn {
    pub fn new(k0: ConvexFn, kt: ConvexFn) -> Result<Self> {
        if k0.dim() != kt.dim() {
            return Err(BolzaError::invalid("endpoint blocks differ in dimension"));
        }
        Ok(EndpointFn { k0, kt })
    }

    /// Indicator of the single pair `(a, b)`.
    pub fn fixed_pair(a: &[f64], b: &[f64]) -> Result<Self> {
        let k0 = ConvexFn::new(a.iter().map(|&v| Plq::point(v)).collect())?;
        let kt = ConvexFn::new(b.iter().map(|&v| Plq::point(v)).collect())?;
        EndpointFn::new(k0, kt)
    }

    pub fn free(d: usize) -> Self {
        EndpointFn { k0: ConvexFn::zero(d), kt: ConvexFn::zero(d) }
    }

    pub fn dim(&self) -> usize {
        self.k0.dim()
    }

    pub fn value(&self, a: &[f64], b: &[f64]) -> f64 {
        let v = self.k0.value(a);
        if v == f64::INFINITY {
            return v;
        }
        v + self.kt.value(b)
    }

    /// `(ã, b̃) ↦ k₀*(ã) + k_T*(−b̃)`.
    pub fn dual(&self) -> EndpointFn {
        EndpointFn { k0: self.k0.conjugate(), kt: self.kt.conjugate().reflect() }
    }

    pub fn recession(&self) -> EndpointFn {
        EndpointFn { k0: self.k0.recession(), kt: self.kt.recession() }
    }
}

fn check_grid(k: &TimeIntegrand, other: &Grid, what: &str) -> Result<()> {
    if k.grid() != other {
        return Err(BolzaError::GridMismatch(format!("integrand and {what}")));
    }
    Ok(())
}

/// `J_K(x, θ)`: the integral of `K(x, dθ^a/dμ)` plus the recession term on the
/// atoms of `θ`.
///
/// The state enters through the midpoint of each affine piece of `x`; the
/// value is `+∞` unless `x` stays in `dom φ` on every piece.
pub fn eval_jk(k: &TimeIntegrand, x: &BVArc, theta: &DiscreteRadonMeasure) -> Result<f64> {
    check_grid(k, x.grid(), "arc")?;
    check_grid(k, theta.grid(), "measure")?;
    let base = x.base();
    let mut total = 0.0;
    for seg in x.segments() {
        let cell = k.cell(seg.cell);
        let w = x.differential().density(seg.cell);
        let end = seg.end(w);
        if !cell.phi().contains(&seg.start) || !cell.phi().contains(&end) {
            return Ok(f64::INFINITY);
        }
        let v = cell.phi().value(&seg.midpoint(w));
        if v == f64::INFINITY {
            return Ok(v);
        }
        total += seg.mass * v;
    }
    for i in 0..k.cells() {
        let v = k.cell(i).psi().value(theta.density(i));
        if v == f64::INFINITY {
            return Ok(v);
        }
        total += base.mass(i) * v;
    }
    for atom in theta.atoms() {
        let v = k.at(atom.t)?.psi_recession().value(&atom.mass);
        if v == f64::INFINITY {
            return Ok(v);
        }
        total += v;
    }
    Ok(total)
}

/// `J_K̃(y, Dy)` for a continuous piecewise-linear dual arc.
pub fn eval_dual_jk(k: &TimeIntegrand, base: &BaseMeasure, y: &ContinuousArc) -> Result<f64> {
    let arc = y.to_bv_arc(base)?;
    eval_jk(&k.dual(), &arc, arc.differential())
}

/// `I_H(x, y) = ∫ H(x_t, y_t) dμ`, sampled at the midpoint of each affine piece of `x`.
///
/// `+∞` if any piece contributes `+∞`, otherwise `−∞` if any contributes `−∞`.
pub fn eval_ih(k: &TimeIntegrand, x: &BVArc, y: &ContinuousArc) -> Result<f64> {
    check_grid(k, x.grid(), "arc")?;
    check_grid(k, y.grid(), "dual arc")?;
    let mut total = 0.0;
    let mut minus_inf = false;
    for seg in x.segments() {
        let w = x.differential().density(seg.cell);
        let ym = y.eval(0.5 * (seg.t0 + seg.t1))?;
        let h = k.cell(seg.cell).hamiltonian(&seg.midpoint(w), &ym);
        if h == f64::INFINITY {
            return Ok(h);
        }
        if h == f64::NEG_INFINITY {
            minus_inf = true;
        } else {
            total += seg.mass * h;
        }
    }
    Ok(if minus_inf { f64::NEG_INFINITY } else { total })
}

/// Piecewise-constant box-valued map with explicit values at the nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainMap {
    #[serde(with = "grid_nodes")]
    pub grid: Grid,
    /// Box on each cell.
    pub cells: Vec<BoxDomain>,
    /// Box at each node `t_0, …, t_N`.
    pub nodes: Vec<BoxDomain>,
}

mod grid_nodes {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::measure::Grid;

    pub fn serialize<S: Serializer>(g: &Grid, s: S) -> Result<S::Ok, S::Error> {
        g.nodes().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Grid, D::Error> {
        let nodes = Vec::<f64>::deserialize(d)?;
        // dimension is fixed up by DomainMap::validate
        Grid::new(nodes, 1).map_err(serde::de::Error::custom)
    }
}

impl DomainMap {
    pub fn new(grid: Grid, cells: Vec<BoxDomain>, nodes: Vec<BoxDomain>) -> Result<Self> {
        let m = DomainMap { grid, cells, nodes };
        m.validate()
    }

    /// Nodes take the box of the cell to their right (the last node that of the last cell).
    pub fn from_cells(grid: Grid, cells: Vec<BoxDomain>) -> Result<Self> {
        let mut nodes = cells.clone();
        if let Some(last) = cells.last() {
            nodes.push(last.clone());
        }
        DomainMap::new(grid, cells, nodes)
    }

    /// Checks shapes and non-emptiness; the grid takes the boxes' dimension.
    pub fn validate(mut self) -> Result<Self> {
        let n = self.grid.cells();
        if self.cells.len() != n || self.nodes.len() != n + 1 {
            return Err(BolzaError::invalid(format!(
                "domain map needs {n} cell boxes and {} node boxes, got {} and {}",
                n + 1,
                self.cells.len(),
                self.nodes.len()
            )));
        }
        let d = self.cells[0].dim();
        for (what, boxes) in [("cell", &self.cells), ("node", &self.nodes)] {
            for (i, b) in boxes.iter().enumerate() {
                if b.dim() != d {
                    return Err(BolzaError::invalid(format!("{what} box {i} has dimension {}, expected {d}", b.dim())));
                }
                if b.is_empty() {
                    return Err(BolzaError::invalid(format!("{what} box {i} is empty")));
                }
            }
        }
        self.grid = self.grid.with_dim(d);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }
}

/// `(dom₁H, dom₂H) = (dom φ, dom ψ*)` cell by cell; node values follow the
/// half-open cell convention.
pub fn domain_maps(k: &TimeIntegrand) -> (DomainMap, DomainMap) {
    let n = k.cells();
    let dom1 = (0..n).map(|i| k.cell(i).phi().domain()).collect();
    let dom2 = (0..n).map(|i| k.cell(i).psi_conj().domain()).collect();
    (
        DomainMap::from_cells(k.grid().clone(), dom1).expect("proper integrands have nonempty domains"),
        DomainMap::from_cells(k.grid().clone(), dom2).expect("proper integrands have nonempty domains"),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    TwoSided,
    Left,
}

/// A coordinate and a point of `R` showing a failed inclusion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub coord: usize,
    pub point: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakpointReport {
    pub node: usize,
    pub t: f64,
    pub outer_regular: bool,
    pub outer_witness: Option<Witness>,
    pub inner_semicontinuous: bool,
    pub isc_witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub side: Side,
    pub breakpoints: Vec<BreakpointReport>,
    pub outer_regular: bool,
    pub inner_semicontinuous: bool,
}

/// A point of `a` outside `b` on the first coordinate where `a ⊄ b`.
fn inclusion_witness(a: &BoxDomain, b: &BoxDomain) -> Option<Witness> {
    let c = a.subset_witness(b)?;
    let (ia, ib) = (a.0[c], b.0[c]);
    let point = if ia.lo < ib.lo {
        if ia.lo.is_finite() {
            ia.lo
        } else {
            ia.hi.min(ib.lo - 1.0)
        }
    } else if ia.hi.is_finite() {
        ia.hi
    } else {
        ia.lo.max(ib.hi + 1.0)
    };
    Some(Witness { coord: c, point })
}

/// Outer regularity and inner semicontinuity of a piecewise-constant box map
/// at every interior node where the map changes.
///
/// With left and right cell boxes `B⁻`, `B⁺` and node box `B_τ`:
/// two-sided outer regularity is `B⁻ ∩ B⁺ ⊆ B_τ` and inner semicontinuity is
/// `B_τ ⊆ B⁻ ∩ B⁺`; on the left side both comparisons use `B⁻` alone.
pub fn check_regularity(s: &DomainMap, side: Side) -> RegularityReport {
    let mut breakpoints = Vec::new();
    for j in 1..s.grid.cells() {
        let (left, right, node) = (&s.cells[j - 1], &s.cells[j], &s.nodes[j]);
        if left == right && right == node {
            continue;
        }
        let limit = match side {
            Side::TwoSided => left.intersect(right),
            Side::Left => left.clone(),
        };
        let outer_witness = inclusion_witness(&limit, node);
        let isc_witness = inclusion_witness(node, &limit);
        breakpoints.push(BreakpointReport {
            node: j,
            t: s.grid.node(j),
            outer_regular: outer_witness.is_none(),
            outer_witness,
            inner_semicontinuous: isc_witness.is_none(),
            isc_witness,
        });
    }
    RegularityReport {
        side,
        outer_regular: breakpoints.iter().all(|b| b.outer_regular),
        inner_semicontinuous: breakpoints.iter().all(|b| b.inner_semicontinuous),
        breakpoints,
    }
}

/// `(K^∞, k^∞)`.
pub fn recession_integrand(k: &TimeIntegrand, end: &EndpointFn) -> (TimeIntegrand, EndpointFn) {
    (k.recession(), end.recession())
}

/// One-dimensional box helper.
pub fn interval_box(lo: f64, hi: f64) -> BoxDomain {
    BoxDomain(vec![Interval::new(lo, hi)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;

    fn f1(p: Plq) -> ConvexFn {
        ConvexFn::broadcast(p, 1)
    }

    fn unit(cells: usize) -> BaseMeasure {
        BaseMeasure::lebesgue(Grid::uniform(1.0, cells, 1).unwrap())
    }

    fn jump_arc(base: &BaseMeasure, t: f64, m: f64) -> BVArc {
        BVArc::new(vec![0.0], DiscreteRadonMeasure::atom(base.clone(), t, vec![m]).unwrap()).unwrap()
    }

    #[test]
    fn total_variation_integrand() {
        let base = unit(10);
        let k = TimeIntegrand::constant(base.grid().clone(), ConvexFn::zero(1), f1(Plq::abs())).unwrap();
        let x = jump_arc(&base, 0.5, 1.0);
        assert_eq!(eval_jk(&k, &x, x.differential()).unwrap(), 1.0);
    }

    #[test]
    fn quadratic_velocity_forbids_jumps() {
        let base = unit(10);
        let k = TimeIntegrand::constant(base.grid().clone(), ConvexFn::zero(1), f1(Plq::quadratic(0.5, 0.0, 0.0)))
            .unwrap();
        let x = jump_arc(&base, 0.35, 1e-3);
        assert_eq!(eval_jk(&k, &x, x.differential()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn state_constraint_is_checked_on_whole_pieces() {
        let base = unit(2);
        let k = TimeIntegrand::constant(
            base.grid().clone(),
            f1(Plq::indicator(0.0, f64::INFINITY).unwrap()),
            f1(Plq::zero()),
        )
        .unwrap();
        // x goes from 0.2 down to -0.2 on the first cell; the midpoint is feasible
        let d = DiscreteRadonMeasure::new(base.clone(), vec![vec![-0.8], vec![0.8]], vec![]).unwrap();
        let x = BVArc::new(vec![0.2], d).unwrap();
        assert_eq!(eval_jk(&k, &x, x.differential()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn hamiltonian_integral_examples() {
        let base = unit(4);
        let q = f1(Plq::quadratic(0.5, 0.0, 0.0));
        let k = TimeIntegrand::constant(base.grid().clone(), q.clone(), q).unwrap();
        let g = base.grid().clone();
        let zero_x = BVArc::constant(base.clone(), vec![0.0]).unwrap();
        let one_x = BVArc::constant(base.clone(), vec![1.0]).unwrap();
        assert_eq!(eval_ih(&k, &zero_x, &ContinuousArc::constant(g.clone(), vec![0.0]).unwrap()).unwrap(), 0.0);
        assert_eq!(eval_ih(&k, &one_x, &ContinuousArc::constant(g.clone(), vec![1.0]).unwrap()).unwrap(), 0.0);

        let tv = TimeIntegrand::constant(g.clone(), ConvexFn::zero(1), f1(Plq::abs())).unwrap();
        let y = ContinuousArc::constant(g, vec![2.0]).unwrap();
        assert_eq!(eval_ih(&tv, &zero_x, &y).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn domain_map_examples() {
        let g = Grid::uniform(1.0, 4, 1).unwrap();
        let q = f1(Plq::quadratic(0.5, 0.0, 0.0));
        let (d1, d2) = domain_maps(&TimeIntegrand::constant(g.clone(), q.clone(), q.clone()).unwrap());
        assert!(d1.cells.iter().chain(&d2.cells).all(|b| *b == BoxDomain::real(1)));

        let c = 0.3;
        let k = TimeIntegrand::constant(g.clone(), f1(Plq::indicator(c, f64::INFINITY).unwrap()), f1(Plq::abs()))
            .unwrap();
        let (d1, d2) = domain_maps(&k);
        assert_eq!(d1.cells[0], interval_box(c, f64::INFINITY));
        assert_eq!(d2.cells[0], interval_box(-1.0, 1.0));

        let (d1, d2) = domain_maps(&TimeIntegrand::constant(g, f1(Plq::point(0.0)), q).unwrap());
        assert_eq!(d1.cells[3], interval_box(0.0, 0.0));
        assert_eq!(d2.nodes[4], BoxDomain::real(1));
    }

    #[test]
    fn worked_regularity_examples() {
        let g = Grid::uniform(1.0, 2, 1).unwrap();
        let inf = f64::INFINITY;
        let s = DomainMap::new(
            g.clone(),
            vec![interval_box(0.0, inf), interval_box(1.0, inf)],
            vec![interval_box(0.0, inf), interval_box(1.0, inf), interval_box(1.0, inf)],
        )
        .unwrap();
        let r = check_regularity(&s, Side::Left);
        assert!(!r.outer_regular);
        assert_eq!(r.breakpoints[0].outer_witness, Some(Witness { coord: 0, point: 0.0 }));

        let c = DomainMap::from_cells(g.clone(), vec![interval_box(0.0, 1.0); 2]).unwrap();
        let r = check_regularity(&c, Side::TwoSided);
        assert!(r.outer_regular && r.inner_semicontinuous);

        let s = DomainMap::new(
            g,
            vec![interval_box(0.0, 1.0), interval_box(1.0, 2.0)],
            vec![interval_box(0.0, 1.0), interval_box(1.0, 1.0), interval_box(1.0, 2.0)],
        )
        .unwrap();
        let r = check_regularity(&s, Side::TwoSided);
        assert!(r.outer_regular && r.inner_semicontinuous);
    }

    #[test]
    fn recession_examples() {
        let g = Grid::uniform(1.0, 2, 1).unwrap();
        let q = f1(Plq::quadratic(0.5, 0.0, 0.0));
        let (kr, _) = recession_integrand(
            &TimeIntegrand::constant(g.clone(), q.clone(), q).unwrap(),
            &EndpointFn::free(1),
        );
        assert_eq!(kr.cell(0).phi(), &f1(Plq::point(0.0)));
        assert_eq!(kr.cell(0).psi(), &f1(Plq::point(0.0)));

        let tv = TimeIntegrand::constant(g, ConvexFn::zero(1), f1(Plq::abs())).unwrap();
        let end = EndpointFn::new(f1(Plq::point(1.0)), ConvexFn::zero(1)).unwrap();
        let (kr, er) = recession_integrand(&tv, &end);
        assert_eq!(kr.cell(1).psi(), &f1(Plq::abs()));
        assert_eq!(er.k0, f1(Plq::point(0.0)));
        assert_eq!(er.kt, f1(Plq::zero()));
        let (kr2, er2) = recession_integrand(&kr, &er);
        assert_eq!(kr2, kr);
        assert_eq!(er2, er);
    }

    #[test]
    fn fenchel_inequality_on_a_feasible_pair() {
        let base = unit(8);
        let g = base.grid().clone();
        let k = TimeIntegrand::constant(g.clone(), f1(Plq::quadratic(0.5, 0.0, 0.0)), f1(Plq::abs())).unwrap();
        let end = EndpointFn::new(f1(Plq::point(1.0)), ConvexFn::zero(1)).unwrap();
        let dx = DiscreteRadonMeasure::new(
            base.clone(),
            (0..8).map(|i| vec![(i as f64 - 3.0) * 0.2]).collect(),
            vec![Atom::new(0.375, vec![-0.5]), Atom::new(0.6, vec![0.25])],
        )
        .unwrap();
        let x = BVArc::new(vec![1.0], dx).unwrap();
        let y = ContinuousArc::from_fn(g, |t| vec![0.9 * (3.0 * (1.0 - t)).sin()]).unwrap();
        let total = eval_jk(&k, &x, x.differential()).unwrap()
            + end.value(x.x0(), &x.right_end())
            + eval_dual_jk(&k, &base, &y).unwrap()
            + end.dual().value(y.start(), y.end());
        assert!(total.is_finite() && total >= -1e-12, "{total}");
    }

    #[test]
    fn switched_integrand_assigns_cells_by_left_node() {
        let g = Grid::uniform(1.0, 4, 1).unwrap();
        let a = (ConvexFn::zero(1), ConvexFn::zero(1));
        let b = (f1(Plq::indicator(1.0, f64::INFINITY).unwrap()), ConvexFn::zero(1));
        let k = TimeIntegrand::switched(g, vec![a, b], &[0.5]).unwrap();
        assert_eq!((0..4).map(|i| k.part_of(i)).collect::<Vec<_>>(), vec![0, 0, 1, 1]);
        assert_eq!(k.at(0.5).unwrap().phi().term(0).lo(), 1.0);
    }
}
