//! Measure-driven ODEs `dy = F_t(y + v_t) dμ_t`, `y_0 = a`, solved by Picard
//! iteration of the trapezoidal transcription.
//!
//! The driver may carry atoms at grid nodes. At an atom of mass `m` the
//! solution jumps by `m·F_τ(y_τ + v_τ)`, evaluated at the pre-jump value; the
//! returned [`BVArc`] is left-continuous, so `y_τ` is the value before the jump
//! and the jump is an atom of `Dy`.

use std::fmt;
use std::sync::Arc;

use crate::error::{BolzaError, Result};
use crate::measure::{norm, Atom, BVArc, BaseMeasure, ContinuousArc, DiscreteRadonMeasure, Grid};

type Callback = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
enum Field {
    /// `A_i y + b_i` on cell `i`, with `A_i` row-major
    Affine { a: Vec<Vec<f64>>, b: Vec<Vec<f64>> },
    Callback(Arc<Callback>),
}

/// `F_t(y)` with a per-cell constant `c` bounding both its Lipschitz constant
/// and its growth, `|F_t(y)| ≤ (1 + |y|)·c`.
#[derive(Clone)]
pub struct LipschitzField {
    grid: Grid,
    field: Field,
    bound: Vec<f64>,
}

impl fmt::Debug for LipschitzField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.field {
            Field::Affine { .. } => "affine",
            Field::Callback(_) => "callback",
        };
        f.debug_struct("LipschitzField").field("kind", &kind).field("bound", &self.bound).finish()
    }
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl LipschitzField {
    /// `A_i y + b_i` on cell `i`; without an explicit bound, `c_i = max(‖A_i‖_F, |b_i|)`.
    pub fn affine(grid: Grid, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, bound: Option<Vec<f64>>) -> Result<Self> {
        let (n, d) = (grid.cells(), grid.dim());
        if a.len() != n || b.len() != n {
            return Err(BolzaError::GridMismatch(format!("affine field needs {n} cells")));
        }
        if a.iter().any(|m| m.len() != d * d) || b.iter().any(|v| v.len() != d) {
            return Err(BolzaError::invalid(format!("affine field needs {d}×{d} matrices and length-{d} offsets")));
        }
        let bound = match bound {
            Some(c) => c,
            None => a.iter().zip(&b).map(|(m, v)| frobenius(m).max(norm(v))).collect(),
        };
        LipschitzField::checked(grid, Field::Affine { a, b }, bound)
    }

    /// The same `A y + b` on every cell.
    pub fn linear(grid: Grid, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let n = grid.cells();
        LipschitzField::affine(grid, vec![a; n], vec![b; n], None)
    }

    /// An arbitrary field with a declared per-cell bound; the bound is
    /// spot-checked on every evaluation made by the solver.
    pub fn from_fn(grid: Grid, bound: Vec<f64>, f: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Result<Self> {
        LipschitzField::checked(grid, Field::Callback(Arc::new(f)), bound)
    }

    fn checked(grid: Grid, field: Field, bound: Vec<f64>) -> Result<Self> {
        if bound.len() != grid.cells() {
            return Err(BolzaError::GridMismatch(format!("{} bounds for {} cells", bound.len(), grid.cells())));
        }
        if bound.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(BolzaError::invalid("field bounds must be finite and nonnegative"));
        }
        Ok(LipschitzField { grid, field, bound })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bound(&self) -> &[f64] {
        &self.bound
    }

    /// `F` on cell `cell` at time `t`.
    pub fn eval(&self, cell: usize, t: f64, y: &[f64]) -> Vec<f64> {
        match &self.field {
            Field::Affine { a, b } => {
                let d = y.len();
                (0..d).map(|r| b[cell][r] + (0..d).map(|c| a[cell][r * d + c] * y[c]).sum::<f64>()).collect()
            }
            Field::Callback(f) => f(t, y),
        }
    }

    /// `s ↦ −F_{T−s}` on the reflected grid.
    pub fn reversed(&self) -> LipschitzField {
        let grid = reflect_grid(&self.grid);
        let horizon = self.grid.horizon();
        let field = match &self.field {
            Field::Affine { a, b } => Field::Affine {
                a: a.iter().rev().map(|m| m.iter().map(|v| -v).collect()).collect(),
                b: b.iter().rev().map(|v| v.iter().map(|x| -x).collect()).collect(),
            },
            Field::Callback(f) => {
                let f = Arc::clone(f);
                Field::Callback(Arc::new(move |s: f64, y: &[f64]| f(horizon - s, y).into_iter().map(|v| -v).collect()))
            }
        };
        LipschitzField { grid, field, bound: self.bound.iter().rev().copied().collect() }
    }
}

fn reflect_grid(g: &Grid) -> Grid {
    let t = g.horizon();
    let mut nodes: Vec<f64> = g.nodes().iter().rev().map(|s| t - s).collect();
    nodes[0] = 0.0;
    *nodes.last_mut().expect("grid has nodes") = t;
    Grid::new(nodes, g.dim()).expect("reflection of a valid grid")
}

/// A nonnegative scalar measure: cell masses (zero allowed) plus atoms at grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct DriverMeasure {
    grid: Grid,
    cells: Vec<f64>,
    /// mass of the atom at node `j`, zero when there is none
    atoms: Vec<f64>,
}

impl DriverMeasure {
    pub fn new(grid: Grid, cell_mass: Vec<f64>, atoms: &[(f64, f64)]) -> Result<Self> {
        if cell_mass.len() != grid.cells() {
            return Err(BolzaError::GridMismatch(format!("{} cell masses for {} cells", cell_mass.len(), grid.cells())));
        }
        if cell_mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(BolzaError::invalid("driver cell masses must be finite and nonnegative"));
        }
        let mut masses = vec![0.0; grid.cells() + 1];
        for &(t, m) in atoms {
            let j = grid
                .node_at(t)
                .ok_or_else(|| BolzaError::invalid(format!("driver atom at t = {t} is not at a grid node")))?;
            if !(m.is_finite() && m >= 0.0) {
                return Err(BolzaError::invalid(format!("driver atom at t = {t} has mass {m}")));
            }
            if masses[j] != 0.0 {
                return Err(BolzaError::invalid(format!("two driver atoms at t = {t}")));
            }
            masses[j] = m;
        }
        Ok(DriverMeasure { grid, cells: cell_mass, atoms: masses })
    }

    pub fn atomless(base: &BaseMeasure) -> Self {
        let n = base.cells();
        DriverMeasure { grid: base.grid().clone(), cells: base.masses().to_vec(), atoms: vec![0.0; n + 1] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cell_mass(&self, cell: usize) -> f64 {
        self.cells[cell]
    }

    pub fn atom_mass(&self, node: usize) -> f64 {
        self.atoms[node]
    }

    pub fn has_atoms(&self) -> bool {
        self.atoms.iter().any(|m| *m != 0.0)
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum::<f64>() + self.atoms.iter().sum::<f64>()
    }

    pub fn reversed(&self) -> DriverMeasure {
        DriverMeasure {
            grid: reflect_grid(&self.grid),
            cells: self.cells.iter().rev().copied().collect(),
            atoms: self.atoms.iter().rev().copied().collect(),
        }
    }
}

/// `γ_T = ∫ c dμ`, atoms included.
pub fn gamma(field: &LipschitzField, driver: &DriverMeasure) -> f64 {
    let n = driver.grid().cells();
    let cells: f64 = (0..n).map(|i| field.bound[i] * driver.cells[i]).sum();
    let atoms: f64 = (0..=n).map(|j| field.bound[j.min(n - 1)] * driver.atoms[j]).sum();
    cells + atoms
}

/// `(|a| + (1 + r)γ_T) e^{γ_T}` with `r` the sup norm of `v`.
pub fn gronwall_bound(field: &LipschitzField, driver: &DriverMeasure, v: &ContinuousArc, a: &[f64]) -> f64 {
    let g = gamma(field, driver);
    let r = sup_norm_nodes(v);
    (norm(a) + (1.0 + r) * g) * g.exp()
}

fn sup_norm_nodes(v: &ContinuousArc) -> f64 {
    (0..=v.grid().cells()).map(|j| norm(v.node_value(j))).fold(0.0, f64::max)
}

/// Node values of a discrete solution: before and after the atom at each node,
/// and the cell densities in between.
#[derive(Clone, Debug, PartialEq)]
struct Nodes {
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl Nodes {
    fn constant(n: usize, a: &[f64]) -> Self {
        Nodes { pre: vec![a.to_vec(); n + 1], post: vec![a.to_vec(); n + 1] }
    }

    fn distance(&self, o: &Nodes) -> f64 {
        let d = |p: &[Vec<f64>], q: &[Vec<f64>]| {
            p.iter().zip(q).map(|(a, b)| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))).fold(0.0, f64::max)
        };
        d(&self.pre, &o.pre).max(d(&self.post, &o.post))
    }

    fn sup(&self) -> f64 {
        self.pre.iter().chain(&self.post).map(|v| norm(v)).fold(0.0, f64::max)
    }

    /// The arc with `Dy` expressed against Lebesgue measure on `grid`.
    fn to_arc(&self, grid: &Grid) -> Result<BVArc> {
        let base = BaseMeasure::lebesgue(grid.clone());
        let atoms = (0..self.pre.len())
            .filter_map(|j| {
                let jump: Vec<f64> = self.post[j].iter().zip(&self.pre[j]).map(|(b, a)| b - a).collect();
                jump.iter().any(|v| *v != 0.0).then(|| Atom::new(grid.node(j), jump))
            })
            .collect();
        let density = (0..grid.cells())
            .map(|i| self.pre[i + 1].iter().zip(&self.post[i]).map(|(b, a)| (b - a) / base.mass(i)).collect())
            .collect();
        BVArc::new(self.pre[0].clone(), DiscreteRadonMeasure::new(base, density, atoms)?)
    }

    fn from_arc(y: &BVArc) -> Result<Self> {
        let grid = y.grid();
        let n = grid.cells();
        let dx = y.differential();
        let mut pre = Vec::with_capacity(n + 1);
        let mut post = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let t = grid.node(j);
            let before = y.value_at(t)?;
            let after = match dx.atom_at(t) {
                Some(m) => before.iter().zip(m).map(|(a, b)| a + b).collect(),
                None => before.clone(),
            };
            pre.push(before);
            post.push(after);
        }
        if dx.atoms().iter().any(|a| grid.node_at(a.t).is_none()) {
            return Err(BolzaError::invalid("arc atoms must sit at grid nodes"));
        }
        Ok(Nodes { pre, post })
    }
}

struct Problem<'a> {
    field: &'a LipschitzField,
    driver: &'a DriverMeasure,
    v: &'a ContinuousArc,
    a: &'a [f64],
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl Problem<'_> {
    fn check(&self) -> Result<()> {
        let g = self.driver.grid();
        if self.field.grid() != g || self.v.grid() != g {
            return Err(BolzaError::GridMismatch("field, driver and perturbation".into()));
        }
        if self.a.len() != g.dim() {
            return Err(BolzaError::invalid(format!("initial value has length {}, expected {}", self.a.len(), g.dim())));
        }
        Ok(())
    }

    /// `F` at `(cell, t, z)` with the declared bound enforced; `memo` holds the
    /// previous evaluation in the same slot for a Lipschitz spot check.
    fn f(&self, cell: usize, t: f64, z: &[f64], memo: &mut Option<(Vec<f64>, Vec<f64>)>) -> Result<Vec<f64>> {
        let out = self.field.eval(cell, t, z);
        if out.len() != z.len() {
            return Err(BolzaError::invalid(format!("field returned {} components, expected {}", out.len(), z.len())));
        }
        let c = self.field.bound[cell];
        let growth = norm(&out);
        let limit = (1.0 + norm(z)) * c;
        if growth > limit * (1.0 + 1e-9) + 1e-12 {
            return Err(BolzaError::BoundViolated(format!(
                "|F({t}, {z:?})| = {growth} exceeds (1 + |y|)·c = {limit} on cell {cell}"
            )));
        }
        if let (Field::Callback(_), Some((pz, pf))) = (&self.field.field, memo.as_ref()) {
            let dz = norm(&pz.iter().zip(z).map(|(a, b)| a - b).collect::<Vec<_>>());
            let df = norm(&pf.iter().zip(&out).map(|(a, b)| a - b).collect::<Vec<_>>());
            if df > c * dz * (1.0 + 1e-9) + 1e-12 {
                return Err(BolzaError::BoundViolated(format!(
                    "|F(y¹) − F(y²)| = {df} exceeds c·|y¹ − y²| = {} on cell {cell} at t = {t}, y¹ = {pz:?}, y² = {z:?}",
                    c * dz
                )));
            }
        }
        *memo = Some((z.to_vec(), out.clone()));
        Ok(out)
    }

    /// One application of the discrete Picard map to `prev`.
    fn picard(&self, prev: &Nodes, memo: &mut [Option<(Vec<f64>, Vec<f64>)>]) -> Result<Nodes> {
        let grid = self.driver.grid();
        let n = grid.cells();
        let mut out = Nodes::constant(n, self.a);
        for j in 0..=n {
            let m = self.driver.atoms[j];
            out.post[j] = if m != 0.0 {
                let t = grid.node(j);
                let f = self.f(j.min(n - 1), t, &add(&prev.pre[j], self.v.node_value(j)), &mut memo[3 * j])?;
                out.pre[j].iter().zip(&f).map(|(y, g)| y + m * g).collect()
            } else {
                out.pre[j].clone()
            };
            if j < n {
                let f0 = self.f(j, grid.node(j), &add(&prev.post[j], self.v.node_value(j)), &mut memo[3 * j + 1])?;
                let f1 =
                    self.f(j, grid.node(j + 1), &add(&prev.pre[j + 1], self.v.node_value(j + 1)), &mut memo[3 * j + 2])?;
                let w: Vec<f64> = f0.iter().zip(&f1).map(|(a, b)| 0.5 * (a + b)).collect();
                let mu = self.driver.cells[j];
                out.pre[j + 1] = out.post[j].iter().zip(&w).map(|(y, wi)| y + mu * wi).collect();
            }
        }
        Ok(out)
    }

    fn memo(&self) -> Vec<Option<(Vec<f64>, Vec<f64>)>> {
        vec![None; 3 * (self.driver.grid().cells() + 1)]
    }

    /// Iterations allowed: `4·ν½·⌈log₂(2Δ₀/tol)⌉`, with `ν½` the smallest `ν` such
    /// that `γ^ν/ν! < ½` and `Δ₀` the first Picard step.
    fn budget(&self, first_step: f64, tol: f64) -> usize {
        let g = gamma(self.field, self.driver);
        let mut nu = 1usize;
        let mut term = g;
        while term >= 0.5 {
            nu += 1;
            term *= g / nu as f64;
        }
        let halvings = (2.0 * first_step / tol).log2().ceil().max(1.0) as usize;
        4 * nu * halvings
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub arc: BVArc,
    pub iterations: usize,
    /// Sup-norm change of the last Picard step.
    pub last_step: f64,
    pub gronwall_bound: f64,
}

/// Solves `y = a + ∫ F(y + v) dμ` by Picard iteration from `y ≡ a`.
pub fn picard_solve(field: &LipschitzField, driver: &DriverMeasure, v: &ContinuousArc, a: &[f64], tol: f64) -> Result<OdeSolution> {
    picard_solve_from(field, driver, v, a, tol, None).map(|(s, _)| s)
}

/// [`picard_solve`] started from a given arc (`None` for `y ≡ a`); also returns the fixed-point residual.
pub fn picard_solve_from(
    field: &LipschitzField,
    driver: &DriverMeasure,
    v: &ContinuousArc,
    a: &[f64],
    tol: f64,
    start: Option<&BVArc>,
) -> Result<(OdeSolution, f64)> {
    if !(tol > 0.0) {
        return Err(BolzaError::invalid("tolerance must be positive"));
    }
    let p = Problem { field, driver, v, a };
    p.check()?;
    let n = driver.grid().cells();
    let mut y = match start {
        Some(s) => Nodes::from_arc(s)?,
        None => Nodes::constant(n, a),
    };
    let mut memo = p.memo();
    let mut next = p.picard(&y, &mut memo)?;
    let mut step = next.distance(&y);
    let budget = p.budget(step, tol);
    let mut iterations = 1;
    while step > tol {
        if iterations >= budget {
            return Err(BolzaError::NonConvergence(format!(
                "Picard iteration still moving by {step:e} after {iterations} steps; the declared bound c is likely too small"
            )));
        }
        y = next;
        next = p.picard(&y, &mut memo)?;
        step = next.distance(&y);
        iterations += 1;
    }
    let residual = p.picard(&next, &mut memo)?.distance(&next);
    let bound = gronwall_bound(field, driver, v, a);
    let sup = next.sup();
    if sup > bound * (1.0 + 1e-9) + tol {
        return Err(BolzaError::BoundViolated(format!("solution reaches {sup}, above the Gronwall bound {bound}")));
    }
    let arc = next.to_arc(driver.grid())?;
    Ok((OdeSolution { arc, iterations, last_step: step, gronwall_bound: bound }, residual))
}

/// Sup-norm distance `‖T_v y − y‖` over node values.
pub fn fixed_point_residual(field: &LipschitzField, driver: &DriverMeasure, v: &ContinuousArc, a: &[f64], y: &BVArc) -> Result<f64> {
    let p = Problem { field, driver, v, a };
    p.check()?;
    let nodes = Nodes::from_arc(y)?;
    Ok(p.picard(&nodes, &mut p.memo())?.distance(&nodes))
}

/// Sup norm over node values, before and after each atom.
pub fn sup_distance(y1: &BVArc, y2: &BVArc) -> Result<f64> {
    Ok(Nodes::from_arc(y1)?.distance(&Nodes::from_arc(y2)?))
}

/// Solves the terminal-value problem `y_T = b` by integrating the reversed
/// field backwards; atomless drivers only.
pub fn solve_terminal(field: &LipschitzField, driver: &DriverMeasure, v: &ContinuousArc, b: &[f64], tol: f64) -> Result<OdeSolution> {
    if driver.has_atoms() {
        return Err(BolzaError::invalid("time reversal needs an atomless driver"));
    }
    let rg = reflect_grid(driver.grid());
    let n = rg.cells();
    let rv = ContinuousArc::new(rg, (0..=n).rev().map(|j| v.node_value(j).to_vec()).collect())?;
    let rev = picard_solve(&field.reversed(), &driver.reversed(), &rv, b, tol)?;
    let nodes = Nodes::from_arc(&rev.arc)?;
    let pre: Vec<Vec<f64>> = nodes.pre.into_iter().rev().collect();
    let forward = Nodes { post: pre.clone(), pre };
    Ok(OdeSolution { arc: forward.to_arc(driver.grid())?, ..rev })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeRow {
    /// `‖v^ν − v‖` over nodes
    pub v_distance: f64,
    /// `‖y^{v^ν} − y^v‖` over nodes
    pub y_distance: f64,
}

/// Distances of perturbed solutions from the solution at `v`.
pub fn continuity_probe(
    field: &LipschitzField,
    driver: &DriverMeasure,
    a: &[f64],
    v: &ContinuousArc,
    sequence: &[ContinuousArc],
    tol: f64,
) -> Result<Vec<ProbeRow>> {
    let reference = picard_solve(field, driver, v, a, tol)?.arc;
    sequence
        .iter()
        .map(|vn| {
            let y = picard_solve(field, driver, vn, a, tol)?.arc;
            let v_distance = (0..=v.grid().cells())
                .map(|j| v.node_value(j).iter().zip(vn.node_value(j)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
                .fold(0.0, f64::max);
            Ok(ProbeRow { v_distance, y_distance: sup_distance(&y, &reference)? })
        })
        .collect()
}
