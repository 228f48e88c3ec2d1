//! JSON forms of problems, measures and arcs.
//!
//! Convex terms accept either the exact form
//! `{"dom": [lo, hi], "breaks": [..], "pieces": [[a, p, q], ..]}` (null for an
//! infinite end) or a named shorthand such as `{"kind": "quadratic", "a": 0.5}`.
//! A single term, or a list of one term, is broadcast to every coordinate.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::convex::{ConvexFn, Plq};
use crate::error::{BolzaError, Result};
use crate::integrand::{EndpointFn, TimeIntegrand};
use crate::measure::{Atom, BVArc, BaseMeasure, ContinuousArc, DiscreteRadonMeasure, Grid};
use crate::ode::{DriverMeasure, LipschitzField};
use crate::solver::SolveConfig;

/// Parses JSON, reporting the path to the offending field on failure.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        BolzaError::invalid(format!("at `{path}`: {}", e.into_inner()))
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| BolzaError::Io(format!("{}: {e}", path.display())))?;
    from_json(&text).map_err(|e| match e {
        BolzaError::Invalid(m) => BolzaError::Invalid(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serialises")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Nodes(Vec<f64>),
    Uniform { horizon: f64, cells: usize },
}

impl GridSpec {
    pub fn build(&self, d: usize) -> Result<Grid> {
        match self {
            GridSpec::Nodes(n) => Grid::new(n.clone(), d),
            GridSpec::Uniform { horizon, cells } => Grid::uniform(*horizon, *cells, d),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySpec {
    PerCell(Vec<Vec<f64>>),
    Constant(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub t: f64,
    pub mass: Vec<f64>,
}

/// `{"grid", "d", "cell_mass", "density", "atoms"}`; all but `atoms` optional
/// when a default grid is supplied by the context.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_mass: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
}

fn base_from(grid: Option<&GridSpec>, d: Option<usize>, cell_mass: Option<&Vec<f64>>, fallback: Option<&BaseMeasure>) -> Result<BaseMeasure> {
    match (grid, fallback) {
        (Some(g), fallback) => {
            let d = d.or(fallback.map(|b| b.dim())).unwrap_or(1);
            let grid = g.build(d)?;
            let base = match cell_mass {
                Some(m) => BaseMeasure::new(grid, m.clone())?,
                None => BaseMeasure::lebesgue(grid),
            };
            if let Some(f) = fallback {
                if &base != f {
                    return Err(BolzaError::GridMismatch("measure and problem grids differ".into()));
                }
            }
            Ok(base)
        }
        (None, Some(f)) => {
            if cell_mass.is_some() {
                return Err(BolzaError::invalid("cell_mass given without a grid"));
            }
            if d.is_some_and(|d| d != f.dim()) {
                return Err(BolzaError::invalid(format!("measure has d = {}, problem {}", d.unwrap_or(0), f.dim())));
            }
            Ok(f.clone())
        }
        (None, None) => Err(BolzaError::invalid("a grid is required")),
    }
}

fn density_rows(spec: Option<&DensitySpec>, cells: usize, d: usize) -> Result<Vec<Vec<f64>>> {
    match spec {
        None => Ok(vec![vec![0.0; d]; cells]),
        Some(DensitySpec::Constant(v)) => Ok(vec![v.clone(); cells]),
        Some(DensitySpec::PerCell(rows)) if rows.len() == cells => Ok(rows.clone()),
        Some(DensitySpec::PerCell(rows)) => {
            Err(BolzaError::GridMismatch(format!("{} density rows for {cells} cells", rows.len())))
        }
    }
}

impl MeasureSpec {
    pub fn build(&self, fallback: Option<&BaseMeasure>) -> Result<DiscreteRadonMeasure> {
        let base = base_from(self.grid.as_ref(), self.d, self.cell_mass.as_ref(), fallback)?;
        let density = density_rows(self.density.as_ref(), base.cells(), base.dim())?;
        let atoms = self.atoms.iter().map(|a| Atom::new(a.t, a.mass.clone())).collect();
        DiscreteRadonMeasure::new(base, density, atoms)
    }

    pub fn from_measure(m: &DiscreteRadonMeasure) -> Self {
        let base = m.base();
        let lebesgue = BaseMeasure::lebesgue(base.grid().clone());
        MeasureSpec {
            grid: Some(GridSpec::Nodes(base.grid().nodes().to_vec())),
            d: Some(m.dim()),
            cell_mass: (base != &lebesgue).then(|| base.masses().to_vec()),
            density: Some(DensitySpec::PerCell((0..base.cells()).map(|i| m.density(i).to_vec()).collect())),
            atoms: m.atoms().iter().map(|a| AtomSpec { t: a.t, mass: a.mass.clone() }).collect(),
        }
    }
}

/// A [`MeasureSpec`] plus the initial value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub x0: Vec<f64>,
    #[serde(flatten)]
    pub differential: MeasureSpec,
}

impl ArcSpec {
    pub fn build(&self, fallback: Option<&BaseMeasure>) -> Result<BVArc> {
        let mut m = self.differential.clone();
        if m.d.is_none() && m.grid.is_some() {
            m.d = Some(self.x0.len());
        }
        BVArc::new(self.x0.clone(), m.build(fallback)?)
    }

    pub fn from_arc(x: &BVArc) -> Self {
        ArcSpec { x0: x.x0().to_vec(), differential: MeasureSpec::from_measure(x.differential()) }
    }
}

/// `{"grid", "values": [[..] per node]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousArcSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub values: Vec<Vec<f64>>,
}

impl ContinuousArcSpec {
    pub fn build(&self, fallback: Option<&Grid>) -> Result<ContinuousArc> {
        let d = self.values.first().map_or(1, |v| v.len());
        let grid = match (&self.grid, fallback) {
            (Some(g), Some(f)) => {
                let g = g.build(d)?;
                if &g != f {
                    return Err(BolzaError::GridMismatch("arc and problem grids differ".into()));
                }
                g
            }
            (Some(g), None) => g.build(d)?,
            (None, Some(f)) => f.clone(),
            (None, None) => return Err(BolzaError::invalid("a grid is required")),
        };
        ContinuousArc::new(grid, self.values.clone())
    }

    pub fn from_arc(y: &ContinuousArc) -> Self {
        ContinuousArcSpec { grid: Some(GridSpec::Nodes(y.grid().nodes().to_vec())), values: y.values() }
    }
}

/// Arc files may hold the arc itself or a solver output with a `decision` field.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Wrapped<T> {
    Decision { decision: T },
    Bare(T),
}

impl<T> Wrapped<T> {
    pub fn into_inner(self) -> T {
        match self {
            Wrapped::Decision { decision } | Wrapped::Bare(decision) => decision,
        }
    }
}

fn neg_inf() -> f64 {
    f64::NEG_INFINITY
}

fn pos_inf() -> f64 {
    f64::INFINITY
}

/// Named convex terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NamedPlq {
    Zero,
    /// `a z² + p z + q`
    Quadratic {
        a: f64,
        #[serde(default)]
        p: f64,
        #[serde(default)]
        q: f64,
    },
    /// `scale·|z|`
    Abs {
        #[serde(default = "one")]
        scale: f64,
    },
    /// `c·max(0, z − at)`
    Hinge {
        c: f64,
        #[serde(default)]
        at: f64,
    },
    /// Indicator of `[lo, hi]`; null for an infinite end.
    Indicator {
        #[serde(default = "neg_inf", with = "crate::convex::ext_real")]
        lo: f64,
        #[serde(default = "pos_inf", with = "crate::convex::ext_real")]
        hi: f64,
    },
    /// Indicator of `{at}`.
    Point { at: f64 },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlqSpec {
    Named(NamedPlq),
    Exact(Plq),
}

impl PlqSpec {
    pub fn build(&self) -> Result<Plq> {
        Ok(match self {
            PlqSpec::Exact(f) => f.clone(),
            PlqSpec::Named(n) => match *n {
                NamedPlq::Zero => Plq::zero(),
                NamedPlq::Quadratic { a, p, q } => {
                    if a < 0.0 {
                        return Err(BolzaError::invalid("quadratic coefficient must be nonnegative"));
                    }
                    Plq::quadratic(a, p, q)
                }
                NamedPlq::Abs { scale } => {
                    if scale < 0.0 {
                        return Err(BolzaError::invalid("abs scale must be nonnegative"));
                    }
                    Plq::abs_scaled(scale)
                }
                NamedPlq::Hinge { c, at } => {
                    if c < 0.0 {
                        return Err(BolzaError::invalid("hinge slope must be nonnegative"));
                    }
                    Plq::hinge(c, at)
                }
                NamedPlq::Indicator { lo, hi } => {
                    let lo = if lo.is_nan() { f64::NEG_INFINITY } else { lo };
                    let hi = if hi.is_nan() { f64::INFINITY } else { hi };
                    Plq::indicator(lo, hi)?
                }
                NamedPlq::Point { at } => Plq::point(at),
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConvexFnSpec {
    Terms(Vec<PlqSpec>),
    One(PlqSpec),
}

impl ConvexFnSpec {
    pub fn build(&self, d: usize) -> Result<ConvexFn> {
        let terms = match self {
            ConvexFnSpec::One(t) => vec![t.build()?],
            ConvexFnSpec::Terms(ts) => ts.iter().map(PlqSpec::build).collect::<Result<_>>()?,
        };
        match terms.len() {
            1 => Ok(ConvexFn::broadcast(terms.into_iter().next().expect("one term"), d)),
            n if n == d => ConvexFn::new(terms),
            n => Err(BolzaError::invalid(format!("{n} terms for dimension {d}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartSpec {
    pub phi: ConvexFnSpec,
    pub psi: ConvexFnSpec,
}

/// One part for all times, or parts switching at the `until` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntegrandSpec {
    Switched {
        parts: Vec<PartSpec>,
        #[serde(default)]
        until: Vec<f64>,
    },
    Single(PartSpec),
}

impl IntegrandSpec {
    pub fn build(&self, grid: &Grid) -> Result<TimeIntegrand> {
        let d = grid.dim();
        let (parts, until): (&[PartSpec], &[f64]) = match self {
            IntegrandSpec::Single(p) => (std::slice::from_ref(p), &[]),
            IntegrandSpec::Switched { parts, until } => (parts, until),
        };
        let built = parts.iter().map(|p| Ok((p.phi.build(d)?, p.psi.build(d)?))).collect::<Result<Vec<_>>>()?;
        TimeIntegrand::switched(grid.clone(), built, until)
    }
}

fn zero_fn() -> ConvexFnSpec {
    ConvexFnSpec::One(PlqSpec::Named(NamedPlq::Zero))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointSpec {
    #[serde(default = "zero_fn")]
    pub k0: ConvexFnSpec,
    #[serde(default = "zero_fn", rename = "kT")]
    pub kt: ConvexFnSpec,
}

impl Default for EndpointSpec {
    fn default() -> Self {
        EndpointSpec { k0: zero_fn(), kt: zero_fn() }
    }
}

/// Problem file for the solver commands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub grid: GridSpec,
    #[serde(default = "one_usize")]
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_mass: Option<Vec<f64>>,
    pub integrand: IntegrandSpec,
    #[serde(default)]
    pub endpoint: EndpointSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<SolveConfig>,
}

fn one_usize() -> usize {
    1
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub k: TimeIntegrand,
    pub end: EndpointFn,
    pub u: DiscreteRadonMeasure,
    pub config: SolveConfig,
}

impl Problem {
    pub fn base(&self) -> &BaseMeasure {
        self.u.base()
    }
}

impl ProblemSpec {
    /// Builds the problem, optionally on a uniform grid of `cells` cells over the same horizon.
    pub fn build(&self, cells: Option<usize>) -> Result<Problem> {
        if self.d == 0 {
            return Err(BolzaError::invalid("d must be positive"));
        }
        let mut grid = self.grid.build(self.d)?;
        if let Some(n) = cells {
            if self.cell_mass.is_some() {
                return Err(BolzaError::invalid("cannot regrid a problem with explicit cell masses"));
            }
            grid = Grid::uniform(grid.horizon(), n, self.d)?;
        }
        let base = match &self.cell_mass {
            Some(m) => BaseMeasure::new(grid.clone(), m.clone())?,
            None => BaseMeasure::lebesgue(grid.clone()),
        };
        let k = self.integrand.build(&grid)?;
        let end = EndpointFn::new(self.endpoint.k0.build(self.d)?, self.endpoint.kt.build(self.d)?)?;
        let u = match &self.u {
            Some(spec) => {
                let mut spec = spec.clone();
                if cells.is_some() {
                    spec.grid = None;
                }
                spec.build(Some(&base))?
            }
            None => DiscreteRadonMeasure::zero(base),
        };
        let config = self.config.clone().unwrap_or_default();
        config.validate()?;
        Ok(Problem { k, end, u, config })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    PerCell(Vec<Vec<f64>>),
    Constant(Vec<f64>),
}

/// Affine field `A_i y + b_i`; matrices row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub grid: GridSpec,
    #[serde(default = "one_usize")]
    pub d: usize,
    pub a: MatrixSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<Vec<f64>>,
}

impl FieldSpec {
    pub fn build(&self) -> Result<LipschitzField> {
        let grid = self.grid.build(self.d)?;
        let n = grid.cells();
        let expand = |m: &MatrixSpec, what: &str| -> Result<Vec<Vec<f64>>> {
            match m {
                MatrixSpec::Constant(v) => Ok(vec![v.clone(); n]),
                MatrixSpec::PerCell(rows) if rows.len() == n => Ok(rows.clone()),
                MatrixSpec::PerCell(rows) => Err(BolzaError::GridMismatch(format!("{} {what} rows for {n} cells", rows.len()))),
            }
        };
        let a = expand(&self.a, "matrix")?;
        let b = match &self.b {
            Some(b) => expand(b, "offset")?,
            None => vec![vec![0.0; self.d]; n],
        };
        LipschitzField::affine(grid, a, b, self.bound.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarAtomSpec {
    pub t: f64,
    pub mass: f64,
}

/// Driver measure; cell masses default to the cell lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_mass: Option<Vec<f64>>,
    #[serde(default)]
    pub atoms: Vec<ScalarAtomSpec>,
}

impl DriverSpec {
    pub fn build(&self, fallback: &Grid) -> Result<DriverMeasure> {
        let grid = match &self.grid {
            Some(g) => {
                let g = g.build(fallback.dim())?;
                if &g != fallback {
                    return Err(BolzaError::GridMismatch("driver and field grids differ".into()));
                }
                g
            }
            None => fallback.clone(),
        };
        let masses = match &self.cell_mass {
            Some(m) => m.clone(),
            None => grid.nodes().windows(2).map(|w| w[1] - w[0]).collect(),
        };
        let atoms: Vec<(f64, f64)> = self.atoms.iter().map(|a| (a.t, a.mass)).collect();
        DriverMeasure::new(grid, masses, &atoms)
    }
}
