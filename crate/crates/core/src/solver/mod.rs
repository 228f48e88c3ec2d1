//! Grid transcriptions of the primal and dual problems and a first-order
//! solver for them.
//!
//! Both integrands and endpoint terms are coordinate-separable, so every
//! problem splits into `d` scalar chains that are solved independently. Each
//! chain is a `Program`; it is solved by preconditioned PDHG, and
//! the iterates are periodically projected onto the feasible set and refined
//! on the active set read off from them. A refinement whose optimality
//! conditions check out ends the solve.

mod pdhg;
mod polish;
mod program;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{Interval, Plq};
use crate::error::{BolzaError, Result};
use crate::integrand::{eval_dual_jk, eval_jk, EndpointFn, TimeIntegrand};
use crate::measure::{pair_measure_continuous, Atom, BVArc, BaseMeasure, ContinuousArc, DiscreteRadonMeasure};

use pdhg::Pdhg;
use program::Program;

/// Iteration controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    /// PDHG iteration cap per scalar chain.
    pub max_iters: usize,
    /// Accepts an unrefined iterate once its fixed-point residual drops below this.
    pub tol: f64,
    /// Recorded for reproducibility; the method itself is deterministic.
    pub seed: u64,
    /// PDHG iterations between refinement attempts.
    pub check_every: usize,
    /// Initial ratio of primal to dual step scaling.
    pub primal_weight: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { max_iters: 200_000, tol: 1e-9, seed: 0, check_every: 1000, primal_weight: 1.0 }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(BolzaError::invalid("tolerance must be positive"));
        }
        if self.check_every == 0 || !(self.primal_weight > 0.0) {
            return Err(BolzaError::invalid("check_every and primal_weight must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub iteration: usize,
    pub residual: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    /// Largest PDHG iteration count over the scalar chains.
    pub iterations: usize,
    pub restarts: usize,
    pub refinements_tried: usize,
    /// Chains whose optimality conditions were verified after refinement.
    pub verified_chains: usize,
    pub chains: usize,
    /// Per-chain trace of the best objective, for the slowest chain.
    pub history: Vec<HistoryPoint>,
}

#[derive(Clone, Debug)]
pub struct SolveResult<D> {
    pub decision: D,
    /// Objective of `decision`: the primal value, or the dual value `sup` side.
    pub value: f64,
    pub converged: bool,
    pub summary: IterationSummary,
}

/// Primal unknowns: initial state, cell densities of `Dx` and node atoms (one per node, zero allowed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimalDecision {
    pub x0: Vec<f64>,
    pub w: Vec<Vec<f64>>,
    pub s: Vec<Vec<f64>>,
}

impl PrimalDecision {
    pub fn to_arc(&self, base: &BaseMeasure) -> Result<BVArc> {
        let grid = base.grid();
        if self.s.len() != grid.cells() + 1 {
            return Err(BolzaError::invalid(format!(
                "{} node atoms for {} nodes",
                self.s.len(),
                grid.cells() + 1
            )));
        }
        let atoms = self.s.iter().enumerate().map(|(j, m)| Atom::new(grid.node(j), m.clone())).collect();
        let diff = DiscreteRadonMeasure::new(base.clone(), self.w.clone(), atoms)?;
        BVArc::new(self.x0.clone(), diff)
    }

    /// Reads the decision off an arc whose atoms all sit at grid nodes.
    pub fn from_arc(x: &BVArc) -> Result<Self> {
        let grid = x.grid();
        let d = x.dim();
        let mut s = vec![vec![0.0; d]; grid.cells() + 1];
        for a in x.differential().atoms() {
            let j = grid
                .node_at(a.t)
                .ok_or_else(|| BolzaError::invalid(format!("atom at t = {} is not at a grid node", a.t)))?;
            s[j] = a.mass.clone();
        }
        let w = (0..grid.cells()).map(|i| x.differential().density(i).to_vec()).collect();
        Ok(PrimalDecision { x0: x.x0().to_vec(), w, s })
    }
}

fn check_problem(k: &TimeIntegrand, end: &EndpointFn, u: &DiscreteRadonMeasure) -> Result<()> {
    if k.grid() != u.grid() {
        return Err(BolzaError::GridMismatch("integrand and parameter measure".into()));
    }
    if end.dim() != k.dim() {
        return Err(BolzaError::invalid(format!(
            "endpoint function has dimension {}, integrand {}",
            end.dim(),
            k.dim()
        )));
    }
    Ok(())
}

fn interval(f: &Plq) -> Interval {
    Interval::new(f.lo(), f.hi())
}

/// `a − b` as sets.
fn minus(a: Interval, b: Interval) -> Interval {
    Interval::new(a.lo - b.hi, a.hi - b.lo)
}

fn scale(a: Interval, c: f64) -> Interval {
    debug_assert!(c > 0.0);
    Interval::new(a.lo * c, a.hi * c)
}

fn shift(a: Interval, c: f64) -> Interval {
    Interval::new(a.lo + c, a.hi + c)
}

/// Intersection that tolerates crossings at rounding level.
fn meet(a: Interval, b: Interval) -> Option<Interval> {
    let r = a.intersect(&b);
    if r.lo <= r.hi {
        return Some(r);
    }
    let gap = r.lo - r.hi;
    if gap <= 1e-12 * (1.0 + r.lo.abs().max(r.hi.abs())) {
        let m = 0.5 * (r.lo + r.hi);
        return Some(Interval::point(m));
    }
    None
}

fn clamp(v: f64, i: Interval) -> f64 {
    if i.lo == i.hi {
        return i.lo;
    }
    v.max(i.lo).min(i.hi)
}

/// Function table shared by the rows of one chain.
struct Funcs<'a> {
    prog: &'a mut Program,
    cache: HashMap<(usize, u8), usize>,
}

impl Funcs<'_> {
    fn get(&mut self, key: (usize, u8), make: impl FnOnce() -> Plq) -> usize {
        if let Some(&i) = self.cache.get(&key) {
            return i;
        }
        let i = self.prog.add_func(make());
        self.cache.insert(key, i);
        i
    }
}

struct PrimalChain {
    prog: Program,
    n_cells: usize,
    mass: Vec<f64>,
    /// backward-propagated feasible sets for P_j and L_j
    f_sets: Vec<Interval>,
    g_sets: Vec<Interval>,
    atom_sets: Vec<Interval>,
    w_sets: Vec<Interval>,
}

const X0: usize = 0;

#[inline]
fn p_idx(j: usize) -> usize {
    1 + 2 * j
}

#[inline]
fn w_idx(i: usize) -> usize {
    2 + 2 * i
}

fn primal_chain(k: &TimeIntegrand, end: &EndpointFn, u: &DiscreteRadonMeasure, c: usize) -> Result<PrimalChain> {
    let base = u.base();
    let grid = base.grid();
    let n = grid.cells();
    let mut prog = Program::new(2 * n + 2);
    let node_atom = |j: usize| u.atom_at(grid.node(j)).map_or(0.0, |m| m[c]);
    let cell_of_node = |j: usize| j.min(n - 1);

    let (k0, kt) = (end.k0.term(c).clone(), end.kt.term(c).clone());
    let (i_k0, i_kt);
    {
        let mut f = Funcs { prog: &mut prog, cache: HashMap::new() };
        i_k0 = f.get((usize::MAX, 0), || k0.clone());
        i_kt = f.get((usize::MAX, 1), || kt.clone());
    }
    prog.add_row(&[(X0, 1.0)], 0.0, 1.0, i_k0);
    prog.add_row(&[(p_idx(n), 1.0)], 0.0, 1.0, i_kt);

    let mut funcs = Funcs { prog: &mut prog, cache: HashMap::new() };
    let mut rows: Vec<(Vec<(usize, f64)>, f64, f64, usize)> = Vec::new();
    for j in 0..=n {
        let cell = cell_of_node(j);
        let part = k.part_of(cell);
        let rec = k.cell(cell).psi_recession().term(c).clone();
        let fi = funcs.get((part, 2), || rec);
        let terms = if j == 0 {
            vec![(p_idx(0), 1.0), (X0, -1.0)]
        } else {
            vec![(p_idx(j), 1.0), (p_idx(j - 1), -1.0), (w_idx(j - 1), -base.mass(j - 1))]
        };
        rows.push((terms, node_atom(j), 1.0, fi));
    }
    for i in 0..n {
        let part = k.part_of(i);
        let cell = k.cell(i);
        let mu = base.mass(i);
        let phi = cell.phi().term(c).clone();
        let psi = cell.psi().term(c).clone();
        let dom = Plq::indicator(phi.lo(), phi.hi())?;
        let fphi = funcs.get((part, 0), || phi);
        let fpsi = funcs.get((part, 1), || psi);
        let fdom = funcs.get((part, 3), || dom);
        rows.push((vec![(p_idx(i), 1.0), (w_idx(i), 0.5 * mu)], 0.0, mu, fphi));
        rows.push((vec![(w_idx(i), 1.0)], u.density(i)[c], mu, fpsi));
        rows.push((vec![(p_idx(i), 1.0)], 0.0, 1.0, fdom));
        rows.push((vec![(p_idx(i), 1.0), (w_idx(i), mu)], 0.0, 1.0, fdom));
    }
    drop(funcs);
    for (terms, off, w, f) in rows {
        prog.add_row(&terms, off, w, f);
    }

    // feasibility sets, propagated backwards along the chain
    let atom_sets: Vec<Interval> = (0..=n)
        .map(|j| shift(interval(k.cell(cell_of_node(j)).psi_recession().term(c)), -node_atom(j)))
        .collect();
    let w_sets: Vec<Interval> =
        (0..n).map(|i| shift(interval(k.cell(i).psi().term(c)), -u.density(i)[c])).collect();
    let dom = |i: usize| interval(k.cell(i).phi().term(c));
    let mut f_sets = vec![Interval::REAL; n + 1];
    let mut g_sets = vec![Interval::REAL; n + 1];
    f_sets[n] = interval(&kt);
    for j in (1..=n).rev() {
        g_sets[j] = meet(minus(f_sets[j], atom_sets[j]), dom(j - 1)).ok_or_else(|| {
            BolzaError::Infeasible(format!(
                "coordinate {c}: no admissible state at t = {} (node {j})",
                grid.node(j)
            ))
        })?;
        f_sets[j - 1] = meet(dom(j - 1), minus(g_sets[j], scale(w_sets[j - 1], base.mass(j - 1)))).ok_or_else(|| {
            BolzaError::Infeasible(format!(
                "coordinate {c}: state constraint on cell {} = [{}, {}) cannot be met",
                j - 1,
                grid.node(j - 1),
                grid.node(j)
            ))
        })?;
    }
    g_sets[0] = meet(minus(f_sets[0], atom_sets[0]), interval(&k0)).ok_or_else(|| {
        BolzaError::Infeasible(format!("coordinate {c}: no admissible initial state"))
    })?;
    Ok(PrimalChain { prog, n_cells: n, mass: base.masses().to_vec(), f_sets, g_sets, atom_sets, w_sets })
}

impl PrimalChain {
    /// Nearest feasible point, coordinate by coordinate along the chain.
    fn repair(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n_cells;
        let mut out = vec![0.0; z.len()];
        let mut l = clamp(z[X0], self.g_sets[0]);
        out[X0] = l;
        for j in 0..=n {
            let prev_l = if j == 0 { z[X0] } else { z[p_idx(j - 1)] + self.mass[j - 1] * z[w_idx(j - 1)] };
            let want = z[p_idx(j)] - prev_l;
            let allowed = meet(self.atom_sets[j], shift(self.f_sets[j], -l)).unwrap_or(self.atom_sets[j]);
            let s = clamp(want, allowed);
            let p = l + s;
            out[p_idx(j)] = p;
            if j < n {
                let mu = self.mass[j];
                let reach = scale(shift(self.g_sets[j + 1], -p), 1.0 / mu);
                let allowed = meet(self.w_sets[j], reach).unwrap_or(self.w_sets[j]);
                let w = clamp(z[w_idx(j)], allowed);
                out[w_idx(j)] = w;
                l = p + mu * w;
            }
        }
        out
    }
}

struct DualChain {
    prog: Program,
    mass: Vec<f64>,
    f_sets: Vec<Interval>,
    v_sets: Vec<Interval>,
}

fn dual_chain(k: &TimeIntegrand, end: &EndpointFn, u: &DiscreteRadonMeasure, c: usize) -> Result<DualChain> {
    let base = u.base();
    let grid = base.grid();
    let n = grid.cells();
    let mut prog = Program::new(n + 1);
    let k0c = end.k0.term(c).conjugate();
    let ktc = end.kt.term(c).conjugate();
    let i0 = prog.add_func(k0c.clone());
    let it = prog.add_func(ktc.clone());
    prog.add_row(&[(0, 1.0)], 0.0, 1.0, i0);
    prog.add_row(&[(n, -1.0)], 0.0, 1.0, it);
    let mut cache: HashMap<(usize, u8), usize> = HashMap::new();
    for i in 0..n {
        let part = k.part_of(i);
        let cell = k.cell(i);
        let mu = base.mass(i);
        let mut get = |role: u8, make: &dyn Fn() -> Plq, prog: &mut Program| {
            *cache.entry((part, role)).or_insert_with(|| prog.add_func(make()))
        };
        let fpsi = get(0, &|| cell.psi_conj().term(c).clone(), &mut prog);
        let fphi = get(1, &|| cell.phi_conj().term(c).clone(), &mut prog);
        let fdom = get(
            2,
            &|| {
                let t = cell.psi_conj().term(c);
                Plq::indicator(t.lo(), t.hi()).expect("nonempty domain")
            },
            &mut prog,
        );
        prog.add_row(&[(i, 0.5), (i + 1, 0.5)], 0.0, mu, fpsi);
        prog.add_row(&[(i, -1.0 / mu), (i + 1, 1.0 / mu)], 0.0, mu, fphi);
        prog.add_row(&[(i, 1.0)], 0.0, 1.0, fdom);
        prog.add_row(&[(i + 1, 1.0)], 0.0, 1.0, fdom);
        let ui = u.density(i)[c];
        prog.g[i] -= 0.5 * mu * ui;
        prog.g[i + 1] -= 0.5 * mu * ui;
    }
    for a in u.atoms() {
        let i = grid.cell_of(a.t)?;
        let (lo, hi) = (grid.node(i), grid.node(i + 1));
        let lam = (a.t - lo) / (hi - lo);
        prog.g[i] -= (1.0 - lam) * a.mass[c];
        prog.g[i + 1] -= lam * a.mass[c];
    }

    let dom = |i: usize| interval(k.cell(i).psi_conj().term(c));
    let v_sets: Vec<Interval> = (0..n).map(|i| interval(k.cell(i).phi_conj().term(c))).collect();
    let infeasible = |j: usize| {
        BolzaError::Infeasible(format!("dual, coordinate {c}: no admissible value at t = {} (node {j})", grid.node(j)))
    };
    let mut node_sets = Vec::with_capacity(n + 1);
    node_sets.push(meet(interval(&k0c), dom(0)).ok_or_else(|| infeasible(0))?);
    for j in 1..n {
        node_sets.push(meet(dom(j - 1), dom(j)).ok_or_else(|| infeasible(j))?);
    }
    let end_set = Interval::new(-ktc.hi(), -ktc.lo());
    node_sets.push(meet(dom(n - 1), end_set).ok_or_else(|| infeasible(n))?);
    let mut f_sets = node_sets.clone();
    for j in (0..n).rev() {
        let reach = minus(f_sets[j + 1], scale(v_sets[j], base.mass(j)));
        f_sets[j] = meet(node_sets[j], reach).ok_or_else(|| infeasible(j))?;
    }
    Ok(DualChain { prog, mass: base.masses().to_vec(), f_sets, v_sets })
}

impl DualChain {
    fn repair(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        out[0] = clamp(z[0], self.f_sets[0]);
        for j in 0..self.mass.len() {
            let reach = shift(scale(self.v_sets[j], self.mass[j]), out[j]);
            let allowed = meet(self.f_sets[j + 1], reach).unwrap_or(self.f_sets[j + 1]);
            out[j + 1] = clamp(z[j + 1], allowed);
        }
        out
    }
}

struct ChainOutcome {
    z: Vec<f64>,
    verified: bool,
    converged: bool,
    iterations: usize,
    restarts: usize,
    refinements: usize,
    history: Vec<HistoryPoint>,
}

const ETAS: [f64; 6] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

fn solve_chain(
    prog: &Program,
    z0: Vec<f64>,
    cfg: &SolveConfig,
    repair: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
) -> Result<ChainOutcome> {
    let m = prog.rows.len();
    let mut pd = Pdhg::new(prog, z0, vec![0.0; m]);
    pd.omega = cfg.primal_weight;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut verified = false;
    let mut refinements = 0;
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    loop {
        let (zc, lc, res) = pd.candidate();
        residual = residual.min(res);
        let zr = repair(&zc);
        let v = prog.objective(&zr);
        if best.as_ref().map_or(true, |b| v < b.0) {
            best = Some((v, zr));
        }
        for eta in ETAS {
            refinements += 1;
            let Some(p) = polish::polish(prog, &zc, &lc, eta) else { continue };
            if !p.verified {
                continue;
            }
            let zp = repair(&p.z);
            let vp = prog.objective(&zp);
            let bv = best.as_ref().map_or(f64::INFINITY, |b| b.0);
            if vp <= bv + 1e-9 * (1.0 + bv.abs()) {
                best = Some((vp, zp));
                verified = true;
                break;
            }
        }
        history.push(HistoryPoint { iteration: pd.iterations, residual: res, value: best.as_ref().unwrap().0 });
        if verified || pd.iterations >= cfg.max_iters || residual <= cfg.tol {
            break;
        }
        if !pd.z.iter().chain(&pd.lam).all(|v| v.is_finite()) {
            return Err(BolzaError::NonConvergence("iterates diverged; the problem may be unbounded".into()));
        }
        let chunk = cfg.check_every.min(cfg.max_iters - pd.iterations);
        pd.run(chunk, 64.min(chunk).max(1));
    }
    let (_, z) = best.expect("at least one candidate");
    Ok(ChainOutcome {
        z,
        verified,
        converged: verified || residual <= cfg.tol,
        iterations: pd.iterations,
        restarts: pd.restarts,
        refinements,
        history,
    })
}

fn summary(outcomes: &[ChainOutcome]) -> IterationSummary {
    let slowest = outcomes.iter().max_by_key(|o| o.iterations).expect("at least one chain");
    IterationSummary {
        iterations: slowest.iterations,
        restarts: outcomes.iter().map(|o| o.restarts).sum(),
        refinements_tried: outcomes.iter().map(|o| o.refinements).sum(),
        verified_chains: outcomes.iter().filter(|o| o.verified).count(),
        chains: outcomes.len(),
        history: slowest.history.clone(),
    }
}

/// `J_K(x, Dx + u) + k(x₀, x_{T+})`.
pub fn primal_objective(k: &TimeIntegrand, end: &EndpointFn, u: &DiscreteRadonMeasure, x: &BVArc) -> Result<f64> {
    let theta = x.differential().add(u)?;
    let j = eval_jk(k, x, &theta)?;
    if j == f64::INFINITY {
        return Ok(j);
    }
    Ok(j + end.value(x.x0(), &x.right_end()))
}

/// `⟨u, y⟩ − J_K̃(y, Dy) − k̃(y₀, y_T)`; `−∞` outside the dual domain.
pub fn dual_objective(k: &TimeIntegrand, end: &EndpointFn, u: &DiscreteRadonMeasure, y: &ContinuousArc) -> Result<f64> {
    let j = eval_dual_jk(k, u.base(), y)?;
    let e = end.dual().value(y.start(), y.end());
    if j == f64::INFINITY || e == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(pair_measure_continuous(u, y)? - j - e)
}

/// Minimises `J_K(x, Dx + u) + k(x₀, x_{T+})` over arcs with atoms at grid nodes.
pub fn solve_primal(
    k: &TimeIntegrand,
    end: &EndpointFn,
    u: &DiscreteRadonMeasure,
    cfg: &SolveConfig,
) -> Result<SolveResult<BVArc>> {
    solve_primal_from(k, end, u, cfg, None)
}

/// [`solve_primal`] started from a given decision.
pub fn solve_primal_from(
    k: &TimeIntegrand,
    end: &EndpointFn,
    u: &DiscreteRadonMeasure,
    cfg: &SolveConfig,
    warm: Option<&PrimalDecision>,
) -> Result<SolveResult<BVArc>> {
    cfg.validate()?;
    check_problem(k, end, u)?;
    let base = u.base();
    let n = base.cells();
    let d = k.dim();
    if let Some(w) = warm {
        if w.x0.len() != d || w.w.len() != n || w.s.len() != n + 1 {
            return Err(BolzaError::invalid("warm start does not match the problem shape"));
        }
    }
    let outcomes = (0..d)
        .into_par_iter()
        .map(|c| {
            let chain = primal_chain(k, end, u, c)?;
            let z0 = primal_start_exact(warm, base, c);
            solve_chain(&chain.prog, z0, cfg, &|z: &[f64]| chain.repair(z))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut dec = PrimalDecision { x0: vec![0.0; d], w: vec![vec![0.0; d]; n], s: vec![vec![0.0; d]; n + 1] };
    for (c, o) in outcomes.iter().enumerate() {
        dec.x0[c] = o.z[X0];
        let mut l = o.z[X0];
        for j in 0..=n {
            dec.s[j][c] = o.z[p_idx(j)] - l;
            if j < n {
                dec.w[j][c] = o.z[w_idx(j)];
                l = o.z[p_idx(j)] + base.mass(j) * o.z[w_idx(j)];
            }
        }
    }
    let x = dec.to_arc(base)?;
    let value = primal_objective(k, end, u, &x)?;
    if value == f64::INFINITY {
        return Err(BolzaError::Infeasible("no feasible arc found on this grid".into()));
    }
    Ok(SolveResult { decision: x, value, converged: outcomes.iter().all(|o| o.converged), summary: summary(&outcomes) })
}

fn primal_start_exact(warm: Option<&PrimalDecision>, base: &BaseMeasure, c: usize) -> Vec<f64> {
    let n = base.cells();
    let mut z = vec![0.0; 2 * n + 2];
    let Some(w) = warm else {
        return z;
    };
    z[X0] = w.x0[c];
    let mut l = w.x0[c];
    for j in 0..=n {
        let p = l + w.s[j][c];
        z[p_idx(j)] = p;
        if j < n {
            z[w_idx(j)] = w.w[j][c];
            l = p + base.mass(j) * w.w[j][c];
        }
    }
    z
}

/// Maximises `⟨u, y⟩ − J_K̃(y, Dy) − k̃(y₀, y_T)` over continuous piecewise-linear arcs.
pub fn solve_dual(
    k: &TimeIntegrand,
    end: &EndpointFn,
    u: &DiscreteRadonMeasure,
    cfg: &SolveConfig,
) -> Result<SolveResult<ContinuousArc>> {
    solve_dual_from(k, end, u, cfg, None)
}

/// [`solve_dual`] started from a given arc.
pub fn solve_dual_from(
    k: &TimeIntegrand,
    end: &EndpointFn,
    u: &DiscreteRadonMeasure,
    cfg: &SolveConfig,
    warm: Option<&ContinuousArc>,
) -> Result<SolveResult<ContinuousArc>> {
    cfg.validate()?;
    check_problem(k, end, u)?;
    let n = u.base().cells();
    let d = k.dim();
    let outcomes = (0..d)
        .into_par_iter()
        .map(|c| {
            let chain = dual_chain(k, end, u, c)?;
            let z0 = match warm {
                Some(y) => (0..=n).map(|j| y.node_value(j)[c]).collect(),
                None => vec![0.0; n + 1],
            };
            solve_chain(&chain.prog, z0, cfg, &|z: &[f64]| chain.repair(z))
        })
        .collect::<Result<Vec<_>>>()?;
    let values = (0..=n).map(|j| outcomes.iter().map(|o| o.z[j]).collect()).collect();
    let y = ContinuousArc::new(u.grid().clone(), values)?;
    let value = dual_objective(k, end, u, &y)?;
    if value == f64::NEG_INFINITY {
        return Err(BolzaError::Infeasible("no feasible dual arc found on this grid".into()));
    }
    Ok(SolveResult { decision: y, value, converged: outcomes.iter().all(|o| o.converged), summary: summary(&outcomes) })
}

#[derive(Clone, Debug)]
pub struct GapReport {
    pub primal: SolveResult<BVArc>,
    pub dual: SolveResult<ContinuousArc>,
    /// `primal.value − dual.value`, nonnegative up to rounding.
    pub gap: f64,
}

pub fn duality_gap(
    k: &TimeIntegrand,
    end: &EndpointFn,
    u: &DiscreteRadonMeasure,
    cfg: &SolveConfig,
) -> Result<GapReport> {
    let (primal, dual) = rayon::join(|| solve_primal(k, end, u, cfg), || solve_dual(k, end, u, cfg));
    let (primal, dual) = (primal?, dual?);
    let gap = primal.value - dual.value;
    Ok(GapReport { primal, dual, gap })
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub eps: f64,
    pub value: f64,
    pub dual_value: f64,
    pub y: ContinuousArc,
    /// `⟨u₁, y*_ε⟩`, the slope of the supporting line at `ε`.
    pub slope: f64,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// Largest excess of a value over the chord of its neighbours.
    pub convexity_violation: f64,
    /// Largest `φ(ε) + (ε′ − ε)⟨u₁, y*_ε⟩ − φ(ε′)` over all pairs.
    pub subgradient_violation: f64,
}

/// Value function `ε ↦ inf (P_{ε u₁})` along a ray, with dual optimisers.
pub fn value_sweep(
    k: &TimeIntegrand,
    end: &EndpointFn,
    u1: &DiscreteRadonMeasure,
    eps: &[f64],
    cfg: &SolveConfig,
) -> Result<SweepReport> {
    if eps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BolzaError::invalid("sweep parameters must be strictly increasing"));
    }
    let points = eps
        .par_iter()
        .map(|&e| {
            let u = u1.scaled(e);
            let r = duality_gap(k, end, &u, cfg)?;
            let slope = pair_measure_continuous(u1, &r.dual.decision)?;
            Ok(SweepPoint { eps: e, value: r.primal.value, dual_value: r.dual.value, y: r.dual.decision, slope })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut convexity_violation = 0.0f64;
    for w in points.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let chord = ((c.eps - b.eps) * a.value + (b.eps - a.eps) * c.value) / (c.eps - a.eps);
        convexity_violation = convexity_violation.max(b.value - chord);
    }
    let mut subgradient_violation = 0.0f64;
    for p in &points {
        for q in &points {
            subgradient_violation = subgradient_violation.max(p.value + (q.eps - p.eps) * p.slope - q.value);
        }
    }
    Ok(SweepReport { points, convexity_violation, subgradient_violation })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinealityEntry {
    /// `J_{K^∞}(x, Dx) + k^∞(x₀, x_{T+})` at the direction and at its negation.
    #[serde(with = "crate::convex::ext_real")]
    pub value: f64,
    #[serde(with = "crate::convex::ext_real")]
    pub negated_value: f64,
    pub passes: bool,
    pub negation_passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinealityReport {
    pub entries: Vec<LinealityEntry>,
    /// Every tested direction with nonpositive recession value has a negation that also has one.
    pub linear: bool,
    /// Indices of directions whose negation fails.
    pub counterexamples: Vec<usize>,
}

/// Sampled test that `{x | J_{K^∞}(x, Dx) + k^∞(x₀, x_{T+}) ≤ 0}` is a linear space.
pub fn check_lineality(k: &TimeIntegrand, end: &EndpointFn, directions: &[BVArc]) -> Result<LinealityReport> {
    let (kr, er) = crate::integrand::recession_integrand(k, end);
    let rec = |x: &BVArc| -> Result<f64> {
        let j = eval_jk(&kr, x, x.differential())?;
        if j == f64::INFINITY {
            return Ok(j);
        }
        Ok(j + er.value(x.x0(), &x.right_end()))
    };
    let tol = 1e-12;
    let mut entries = Vec::with_capacity(directions.len());
    let mut counterexamples = Vec::new();
    for (idx, d) in directions.iter().enumerate() {
        if d.x0().iter().all(|v| *v == 0.0) && d.differential().total_variation() == 0.0 {
            return Err(BolzaError::invalid(format!("direction {idx} is zero")));
        }
        let neg = BVArc::new(d.x0().iter().map(|v| -v).collect(), d.differential().scaled(-1.0))?;
        let (v, nv) = (rec(d)?, rec(&neg)?);
        let (p, np) = (v <= tol, nv <= tol);
        if p != np {
            counterexamples.push(idx);
        }
        entries.push(LinealityEntry { value: v, negated_value: nv, passes: p, negation_passes: np });
    }
    Ok(LinealityReport { linear: counterexamples.is_empty(), entries, counterexamples })
}
