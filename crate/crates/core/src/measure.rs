//! Grids on `[0, T]`, the base measure `μ`, signed vector measures made of a
//! `μ`-density plus finitely many atoms, and arcs of bounded variation.
//!
//! A [`BVArc`] is left-continuous: `x_t = x_0 + Dx([0, t))`, with the right
//! limit past the horizon `x_{T+} = x_0 + Dx([0, T])` available separately.
//! Inside a cell the base measure is spread uniformly in time, so an arc with
//! piecewise-constant density is piecewise linear in `t` between atoms.

use std::sync::Arc;

use crate::error::{BolzaError, Result};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Strictly increasing time nodes `0 = t_0 < … < t_N = T` and the state dimension.
#[derive(Clone, Debug)]
pub struct Grid {
    nodes: Arc<[f64]>,
    dim: usize,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && (Arc::ptr_eq(&self.nodes, &other.nodes) || self.nodes == other.nodes)
    }
}

impl Grid {
    pub fn new(nodes: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(BolzaError::invalid("dimension must be positive"));
        }
        if nodes.len() < 2 {
            return Err(BolzaError::invalid("grid needs at least one cell"));
        }
        if nodes[0] != 0.0 {
            return Err(BolzaError::invalid("grid must start at t = 0"));
        }
        if nodes.iter().any(|t| !t.is_finite()) {
            return Err(BolzaError::invalid("grid nodes must be finite"));
        }
        if let Some(w) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(BolzaError::invalid(format!("grid nodes not strictly increasing at index {}", w + 1)));
        }
        Ok(Grid { nodes: nodes.into(), dim })
    }

    /// `cells` equal cells on `[0, horizon]`.
    pub fn uniform(horizon: f64, cells: usize, dim: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(BolzaError::invalid("horizon must be positive and finite"));
        }
        if cells == 0 {
            return Err(BolzaError::invalid("grid needs at least one cell"));
        }
        let nodes = (0..=cells)
            .map(|i| if i == cells { horizon } else { horizon * i as f64 / cells as f64 })
            .collect();
        Grid::new(nodes, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    pub fn with_dim(&self, dim: usize) -> Grid {
        Grid { nodes: self.nodes.clone(), dim }
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < 0.0 || t > self.horizon() {
            return Err(BolzaError::TimeOutOfRange { t, horizon: self.horizon() });
        }
        Ok(())
    }

    /// Index of the cell `[t_i, t_{i+1})` containing `t`; `T` belongs to the last cell.
    pub fn cell_of(&self, t: f64) -> Result<usize> {
        self.check_time(t)?;
        let k = self.nodes.partition_point(|&n| n <= t);
        Ok(k.saturating_sub(1).min(self.cells() - 1))
    }

    /// Index of the node located exactly at `t`, if any.
    pub fn node_at(&self, t: f64) -> Option<usize> {
        let k = self.nodes.partition_point(|&n| n < t);
        (k < self.nodes.len() && self.nodes[k] == t).then_some(k)
    }

    /// Splits every cell into `factor` equal sub-cells.
    pub fn refine(&self, factor: usize) -> Grid {
        let factor = factor.max(1);
        let mut nodes = Vec::with_capacity(self.cells() * factor + 1);
        for w in self.nodes.windows(2) {
            for k in 0..factor {
                nodes.push(w[0] + (w[1] - w[0]) * k as f64 / factor as f64);
            }
        }
        nodes.push(self.horizon());
        Grid { nodes: nodes.into(), dim: self.dim }
    }
}

/// The atomless, strictly positive base measure `μ`, stored as a positive mass
/// per cell and spread uniformly in time inside each cell.
#[derive(Clone, Debug)]
pub struct BaseMeasure {
    grid: Grid,
    cell_mass: Arc<[f64]>,
    cumulative: Arc<[f64]>,
}

impl PartialEq for BaseMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid
            && (Arc::ptr_eq(&self.cell_mass, &other.cell_mass) || self.cell_mass == other.cell_mass)
    }
}

impl BaseMeasure {
    pub fn new(grid: Grid, cell_mass: Vec<f64>) -> Result<Self> {
        if cell_mass.len() != grid.cells() {
            return Err(BolzaError::invalid(format!(
                "expected {} cell masses, got {}",
                grid.cells(),
                cell_mass.len()
            )));
        }
        if let Some(i) = cell_mass.iter().position(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(BolzaError::invalid(format!("cell mass {i} must be positive and finite")));
        }
        let mut cumulative = Vec::with_capacity(cell_mass.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for m in &cell_mass {
            acc += m;
            cumulative.push(acc);
        }
        Ok(BaseMeasure { grid, cell_mass: cell_mass.into(), cumulative: cumulative.into() })
    }

    /// Lebesgue measure restricted to the grid.
    pub fn lebesgue(grid: Grid) -> Self {
        let masses = grid.nodes().windows(2).map(|w| w[1] - w[0]).collect();
        BaseMeasure::new(grid, masses).expect("grid cells have positive length")
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

    pub fn mass(&self, cell: usize) -> f64 {
        self.cell_mass[cell]
    }

    pub fn masses(&self) -> &[f64] {
        &self.cell_mass
    }

    pub fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    /// `μ([a, b))` for `a <= b` inside one cell.
    pub(crate) fn mass_within(&self, cell: usize, a: f64, b: f64) -> f64 {
        let (lo, hi) = (self.grid.node(cell), self.grid.node(cell + 1));
        self.cell_mass[cell] * (b - a) / (hi - lo)
    }

    /// `μ([0, t))`, equal to `μ([0, t])` since `μ` has no atoms.
    pub fn mass_before(&self, t: f64) -> Result<f64> {
        let i = self.grid.cell_of(t)?;
        Ok(self.cumulative[i] + self.mass_within(i, self.grid.node(i), t))
    }

    pub fn with_dim(&self, dim: usize) -> BaseMeasure {
        BaseMeasure { grid: self.grid.with_dim(dim), cell_mass: self.cell_mass.clone(), cumulative: self.cumulative.clone() }
    }

    /// Same measure on a grid with every cell split into `factor` sub-cells.
    pub fn refine(&self, factor: usize) -> BaseMeasure {
        let factor = factor.max(1);
        let masses = self
            .cell_mass
            .iter()
            .flat_map(|m| std::iter::repeat(m / factor as f64).take(factor))
            .collect();
        BaseMeasure::new(self.grid.refine(factor), masses).expect("refinement keeps masses positive")
    }
}

/// A point mass `mass · δ_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub t: f64,
    pub mass: Vec<f64>,
}

impl Atom {
    pub fn new(t: f64, mass: Vec<f64>) -> Self {
        Atom { t, mass }
    }
}

/// Signed `R^d`-valued measure `θ = θ^a + θ^s` with `θ^a` given by a
/// `μ`-density that is constant on each cell and `θ^s` a finite atom list.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteRadonMeasure {
    base: BaseMeasure,
    density: Vec<f64>,
    atoms: Vec<Atom>,
}

/// Result of [`DiscreteRadonMeasure::lebesgue_decompose`].
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// `dθ^a/dμ`, one vector per cell.
    pub density: Vec<Vec<f64>>,
    pub atoms: Vec<Atom>,
    /// `dθ^s/d|θ^s|` at each atom: the unit vector `s/|s|`.
    pub directions: Vec<Vec<f64>>,
    /// `|θ^s|([0, T]) = Σ |s|`.
    pub singular_variation: f64,
}

impl DiscreteRadonMeasure {
    /// Builds a measure; atoms are sorted, atoms sharing a location are merged
    /// and zero atoms are dropped.
    pub fn new(base: BaseMeasure, density: Vec<Vec<f64>>, atoms: Vec<Atom>) -> Result<Self> {
        let d = base.dim();
        if density.len() != base.cells() {
            return Err(BolzaError::invalid(format!(
                "density has {} cells, grid has {}",
                density.len(),
                base.cells()
            )));
        }
        let mut flat = Vec::with_capacity(d * density.len());
        for (i, row) in density.iter().enumerate() {
            if row.len() != d {
                return Err(BolzaError::invalid(format!("density[{i}] has dimension {}, expected {d}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(BolzaError::invalid(format!("density[{i}] is not finite")));
            }
            flat.extend_from_slice(row);
        }
        let atoms = canonical_atoms(&base, atoms)?;
        Ok(DiscreteRadonMeasure { base, density: flat, atoms })
    }

    pub fn zero(base: BaseMeasure) -> Self {
        let n = base.cells() * base.dim();
        DiscreteRadonMeasure { base, density: vec![0.0; n], atoms: Vec::new() }
    }

    /// A single atom and no density.
    pub fn atom(base: BaseMeasure, t: f64, mass: Vec<f64>) -> Result<Self> {
        let density = vec![vec![0.0; base.dim()]; base.cells()];
        DiscreteRadonMeasure::new(base, density, vec![Atom::new(t, mass)])
    }

    pub fn base(&self) -> &BaseMeasure {
        &self.base
    }

    pub fn grid(&self) -> &Grid {
        self.base.grid()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn density(&self, cell: usize) -> &[f64] {
        let d = self.dim();
        &self.density[cell * d..(cell + 1) * d]
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms.is_empty()
    }

    /// Mass of the atom located at `t`, if there is one.
    pub fn atom_at(&self, t: f64) -> Option<&[f64]> {
        self.atoms.iter().find(|a| a.t == t).map(|a| a.mass.as_slice())
    }

    pub fn scaled(&self, alpha: f64) -> DiscreteRadonMeasure {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.t, a.mass.iter().map(|m| alpha * m).collect()))
            .filter(|a| a.mass.iter().any(|m| *m != 0.0))
            .collect();
        DiscreteRadonMeasure { base: self.base.clone(), density: self.density.iter().map(|v| alpha * v).collect(), atoms }
    }

    pub fn add(&self, other: &DiscreteRadonMeasure) -> Result<DiscreteRadonMeasure> {
        if self.base != other.base {
            return Err(BolzaError::GridMismatch("measures live on different base measures".into()));
        }
        let density = self.density.iter().zip(&other.density).map(|(a, b)| a + b).collect::<Vec<_>>();
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let atoms = canonical_atoms(&self.base, atoms)?;
        Ok(DiscreteRadonMeasure { base: self.base.clone(), density, atoms })
    }

    fn accumulate(&self, t: f64, include_t: bool) -> Result<Vec<f64>> {
        let grid = self.grid();
        grid.check_time(t)?;
        let d = self.dim();
        let mut acc = vec![0.0; d];
        for i in 0..grid.cells() {
            let (lo, hi) = (grid.node(i), grid.node(i + 1));
            if lo >= t {
                break;
            }
            let m = self.base.mass_within(i, lo, hi.min(t));
            for (a, w) in acc.iter_mut().zip(self.density(i)) {
                *a += w * m;
            }
        }
        for atom in &self.atoms {
            if atom.t < t || (include_t && atom.t == t) {
                for (a, s) in acc.iter_mut().zip(&atom.mass) {
                    *a += s;
                }
            }
        }
        Ok(acc)
    }

    /// `θ([0, t))`.
    pub fn measure_before(&self, t: f64) -> Result<Vec<f64>> {
        self.accumulate(t, false)
    }

    /// `θ([0, t])`.
    pub fn measure_through(&self, t: f64) -> Result<Vec<f64>> {
        self.accumulate(t, true)
    }

    /// `θ([0, T])`.
    pub fn total(&self) -> Vec<f64> {
        self.accumulate(self.grid().horizon(), true).expect("horizon is in range")
    }

    /// Splits `θ` into its `μ`-density and atomic part together with the
    /// polar direction of every atom and `|θ^s|([0, T])`.
    pub fn lebesgue_decompose(&self) -> Decomposition {
        let density = (0..self.base.cells()).map(|i| self.density(i).to_vec()).collect();
        let directions = self
            .atoms
            .iter()
            .map(|a| {
                let n = norm(&a.mass);
                a.mass.iter().map(|m| m / n).collect()
            })
            .collect();
        let singular_variation = self.atoms.iter().map(|a| norm(&a.mass)).sum();
        Decomposition { density, atoms: self.atoms.clone(), directions, singular_variation }
    }

    /// `|θ|([0, T])` with the Euclidean norm on `R^d`.
    pub fn total_variation(&self) -> f64 {
        let ac: f64 = (0..self.base.cells()).map(|i| norm(self.density(i)) * self.base.mass(i)).sum();
        ac + self.atoms.iter().map(|a| norm(&a.mass)).sum::<f64>()
    }

    /// The same measure on a refined grid (densities copied, atoms unchanged).
    pub fn refine(&self, factor: usize) -> DiscreteRadonMeasure {
        let factor = factor.max(1);
        let base = self.base.refine(factor);
        let density = (0..self.base.cells())
            .flat_map(|i| std::iter::repeat(self.density(i).to_vec()).take(factor))
            .collect();
        DiscreteRadonMeasure::new(base, density, self.atoms.clone()).expect("refinement preserves validity")
    }
}

fn canonical_atoms(base: &BaseMeasure, mut atoms: Vec<Atom>) -> Result<Vec<Atom>> {
    let d = base.dim();
    for a in &atoms {
        base.grid().check_time(a.t)?;
        if a.mass.len() != d {
            return Err(BolzaError::invalid(format!("atom at t={} has dimension {}, expected {d}", a.t, a.mass.len())));
        }
        if a.mass.iter().any(|m| !m.is_finite()) {
            return Err(BolzaError::invalid(format!("atom at t={} is not finite", a.t)));
        }
    }
    atoms.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if last.t == a.t => {
                for (l, m) in last.mass.iter_mut().zip(&a.mass) {
                    *l += m;
                }
            }
            _ => out.push(a),
        }
    }
    out.retain(|a| a.mass.iter().any(|m| *m != 0.0));
    Ok(out)
}

/// Where to evaluate an arc: a time in `[0, T]` or the right limit past `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArcTime {
    At(f64),
    RightOfEnd,
}

/// A maximal time interval inside one cell on which a [`BVArc`] is affine.
#[derive(Clone, Debug)]
pub(crate) struct Segment {
    pub cell: usize,
    pub t0: f64,
    pub t1: f64,
    /// `μ([t0, t1))`.
    pub mass: f64,
    /// Value right after `t0` (atoms at `t0` included).
    pub start: Vec<f64>,
}

impl Segment {
    pub fn end(&self, density: &[f64]) -> Vec<f64> {
        self.start.iter().zip(density).map(|(x, w)| x + w * self.mass).collect()
    }

    pub fn midpoint(&self, density: &[f64]) -> Vec<f64> {
        self.start.iter().zip(density).map(|(x, w)| x + 0.5 * w * self.mass).collect()
    }
}

/// Left-continuous arc of bounded variation `x_t = x_0 + Dx([0, t))`.
#[derive(Clone, Debug, PartialEq)]
pub struct BVArc {
    x0: Vec<f64>,
    differential: DiscreteRadonMeasure,
}

impl BVArc {
    pub fn new(x0: Vec<f64>, differential: DiscreteRadonMeasure) -> Result<Self> {
        if x0.len() != differential.dim() {
            return Err(BolzaError::invalid(format!(
                "x0 has dimension {}, differential has {}",
                x0.len(),
                differential.dim()
            )));
        }
        Ok(BVArc { x0, differential })
    }

    pub fn constant(base: BaseMeasure, value: Vec<f64>) -> Result<Self> {
        BVArc::new(value, DiscreteRadonMeasure::zero(base))
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn differential(&self) -> &DiscreteRadonMeasure {
        &self.differential
    }

    pub fn base(&self) -> &BaseMeasure {
        self.differential.base()
    }

    pub fn grid(&self) -> &Grid {
        self.differential.grid()
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn eval(&self, at: ArcTime) -> Result<Vec<f64>> {
        let inc = match at {
            ArcTime::At(t) => self.differential.measure_before(t)?,
            ArcTime::RightOfEnd => self.differential.total(),
        };
        Ok(self.x0.iter().zip(inc).map(|(a, b)| a + b).collect())
    }

    /// `x_t` (left-continuous value).
    pub fn value_at(&self, t: f64) -> Result<Vec<f64>> {
        self.eval(ArcTime::At(t))
    }

    /// `x_{T+}`.
    pub fn right_end(&self) -> Vec<f64> {
        self.eval(ArcTime::RightOfEnd).expect("right end is always defined")
    }

    /// `x_T`, the left-continuous value at the horizon (excludes an atom at `T`).
    pub fn at_horizon(&self) -> Vec<f64> {
        self.value_at(self.grid().horizon()).expect("horizon is in range")
    }

    /// Affine pieces of the arc, cell by cell, split at interior atoms.
    pub(crate) fn segments(&self) -> Vec<Segment> {
        let grid = self.grid();
        let base = self.base();
        let atoms = self.differential.atoms();
        let mut x = self.x0.clone();
        let mut k = 0;
        let mut out = Vec::with_capacity(grid.cells() + atoms.len());
        for i in 0..grid.cells() {
            let (lo, hi) = (grid.node(i), grid.node(i + 1));
            let w = self.differential.density(i);
            let mut start = lo;
            while k < atoms.len() && atoms[k].t < hi {
                if atoms[k].t <= start {
                    for (xi, s) in x.iter_mut().zip(&atoms[k].mass) {
                        *xi += s;
                    }
                    k += 1;
                } else {
                    let tau = atoms[k].t;
                    let mass = base.mass_within(i, start, tau);
                    let seg = Segment { cell: i, t0: start, t1: tau, mass, start: x.clone() };
                    x = seg.end(w);
                    out.push(seg);
                    start = tau;
                }
            }
            let mass = base.mass_within(i, start, hi);
            let seg = Segment { cell: i, t0: start, t1: hi, mass, start: x.clone() };
            x = seg.end(w);
            out.push(seg);
        }
        out
    }

    /// CSV samples `t,x_1,…,x_d` at every node and atom; at an atom a second
    /// row with the same `t` carries the value after the jump (for `t = T`
    /// that row is `x_{T+}`).
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::from("t");
        for c in 1..=d {
            out.push_str(&format!(",x_{c}"));
        }
        out.push('\n');
        let mut times: Vec<f64> = self.grid().nodes().to_vec();
        times.extend(self.differential.atoms().iter().map(|a| a.t));
        times.sort_by(f64::total_cmp);
        times.dedup();
        let write_row = |out: &mut String, t: f64, x: &[f64]| {
            out.push_str(&format!("{t}"));
            for v in x {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        };
        for t in times {
            let x = self.value_at(t).expect("sample times are in range");
            write_row(&mut out, t, &x);
            if let Some(s) = self.differential.atom_at(t) {
                let after: Vec<f64> = x.iter().zip(s).map(|(a, b)| a + b).collect();
                write_row(&mut out, t, &after);
            }
        }
        out
    }
}

/// Continuous arc, piecewise linear in `t` between grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousArc {
    grid: Grid,
    values: Vec<f64>,
}

impl ContinuousArc {
    pub fn new(grid: Grid, values: Vec<Vec<f64>>) -> Result<Self> {
        let d = grid.dim();
        if values.len() != grid.cells() + 1 {
            return Err(BolzaError::invalid(format!(
                "continuous arc needs {} node values, got {}",
                grid.cells() + 1,
                values.len()
            )));
        }
        let mut flat = Vec::with_capacity(values.len() * d);
        for (j, v) in values.iter().enumerate() {
            if v.len() != d {
                return Err(BolzaError::invalid(format!("node value {j} has dimension {}, expected {d}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(BolzaError::invalid(format!("node value {j} is not finite")));
            }
            flat.extend_from_slice(v);
        }
        Ok(ContinuousArc { grid, values: flat })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        ContinuousArc::new(grid, values)
    }

    pub fn constant(grid: Grid, value: Vec<f64>) -> Result<Self> {
        let values = vec![value; grid.cells() + 1];
        ContinuousArc::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn node_value(&self, j: usize) -> &[f64] {
        let d = self.dim();
        &self.values[j * d..(j + 1) * d]
    }

    pub fn start(&self) -> &[f64] {
        self.node_value(0)
    }

    pub fn end(&self) -> &[f64] {
        self.node_value(self.grid.cells())
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let i = self.grid.cell_of(t)?;
        let (lo, hi) = (self.grid.node(i), self.grid.node(i + 1));
        let lam = (t - lo) / (hi - lo);
        Ok(self
            .node_value(i)
            .iter()
            .zip(self.node_value(i + 1))
            .map(|(a, b)| if lam == 0.0 { *a } else { a + lam * (b - a) })
            .collect())
    }

    /// Average of the arc over cell `i` (the value at the cell midpoint).
    pub fn cell_average(&self, i: usize) -> Vec<f64> {
        self.node_value(i).iter().zip(self.node_value(i + 1)).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// `dDy/dμ` on cell `i`.
    pub fn mu_slope(&self, base: &BaseMeasure, i: usize) -> Vec<f64> {
        let m = base.mass(i);
        self.node_value(i).iter().zip(self.node_value(i + 1)).map(|(a, b)| (b - a) / m).collect()
    }

    /// Reinterprets the arc as a [`BVArc`] whose differential has density only.
    pub fn to_bv_arc(&self, base: &BaseMeasure) -> Result<BVArc> {
        if base.grid() != &self.grid {
            return Err(BolzaError::GridMismatch("continuous arc and base measure".into()));
        }
        let density = (0..self.grid.cells()).map(|i| self.mu_slope(base, i)).collect();
        let diff = DiscreteRadonMeasure::new(base.clone(), density, Vec::new())?;
        BVArc::new(self.start().to_vec(), diff)
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ContinuousArc {
        ContinuousArc { grid: self.grid.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.dim()).map(|c| c.to_vec()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for c in 1..=self.dim() {
            out.push_str(&format!(",y_{c}"));
        }
        out.push('\n');
        for (j, t) in self.grid.nodes().iter().enumerate() {
            out.push_str(&format!("{t}"));
            for v in self.node_value(j) {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

fn check_shared(grid: &Grid, other: &Grid) -> Result<()> {
    if grid != other {
        return Err(BolzaError::GridMismatch(format!(
            "{} cells / d={} vs {} cells / d={}",
            grid.cells(),
            grid.dim(),
            other.cells(),
            other.dim()
        )));
    }
    Ok(())
}

/// `⟨u, y⟩ = ∫ y du`; exact for piecewise-linear `y` and cellwise-constant densities.
pub fn pair_measure_continuous(u: &DiscreteRadonMeasure, y: &ContinuousArc) -> Result<f64> {
    check_shared(u.grid(), y.grid())?;
    let base = u.base();
    let mut total = 0.0;
    for i in 0..base.cells() {
        total += base.mass(i) * dot(u.density(i), &y.cell_average(i));
    }
    for a in u.atoms() {
        total += dot(&y.eval(a.t)?, &a.mass);
    }
    Ok(total)
}

/// `⟨x, v⟩ = x_0·v_{-1} + ∫ v dx`.
pub fn pair_arc_v(x: &BVArc, v_minus1: &[f64], v: &ContinuousArc) -> Result<f64> {
    if v_minus1.len() != x.dim() {
        return Err(BolzaError::invalid("v_{-1} has the wrong dimension"));
    }
    Ok(dot(x.x0(), v_minus1) + pair_measure_continuous(x.differential(), v)?)
}

/// `∫ x dv` for a piecewise-linear `v` (whose differential has a cellwise density).
pub fn integrate_arc_against(x: &BVArc, v: &ContinuousArc) -> Result<f64> {
    check_shared(x.grid(), v.grid())?;
    let base = x.base();
    let mut total = 0.0;
    for seg in x.segments() {
        let slope = v.mu_slope(base, seg.cell);
        let mid = seg.midpoint(x.differential().density(seg.cell));
        total += seg.mass * dot(&mid, &slope);
    }
    Ok(total)
}

/// `|∫v dx − x_{T+}·v_T + x_0·v_0 + ∫x dv|`, zero up to rounding for every
/// `x ∈ X` and continuous piecewise-linear `v`.
pub fn integration_by_parts_residual(x: &BVArc, v: &ContinuousArc) -> Result<f64> {
    let v_dx = pair_measure_continuous(x.differential(), v)?;
    let x_dv = integrate_arc_against(x, v)?;
    Ok((v_dx - dot(&x.right_end(), v.end()) + dot(x.x0(), v.start()) + x_dv).abs())
}
