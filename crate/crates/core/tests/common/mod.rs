//! Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

use bolza::convex::{ConvexFn, Piece, Plq};
use bolza::integrand::{EndpointFn, TimeIntegrand};
use bolza::measure::{Atom, BVArc, BaseMeasure, ContinuousArc, DiscreteRadonMeasure, Grid};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `½ tanh 1`, the value of the regulator with `x(0) = 1` on `[0, 1]`.
pub fn lq_value() -> f64 {
    0.5 * 1f64.tanh()
}

pub fn lq_problem(n: usize) -> (TimeIntegrand, EndpointFn, DiscreteRadonMeasure) {
    let grid = Grid::uniform(1.0, n, 1).unwrap();
    let q = ConvexFn::broadcast(Plq::quadratic(0.5, 0.0, 0.0), 1);
    let k = TimeIntegrand::constant(grid.clone(), q.clone(), q).unwrap();
    let end = EndpointFn::new(ConvexFn::new(vec![Plq::point(1.0)]).unwrap(), ConvexFn::zero(1)).unwrap();
    (k, end, DiscreteRadonMeasure::zero(BaseMeasure::lebesgue(grid)))
}

/// Closed-form optimal pair `x = cosh(1−t)/cosh 1`, `y = −sinh(1−t)/cosh 1`,
/// with `x` interpolated linearly between nodes.
pub fn lq_pair(n: usize) -> (BVArc, ContinuousArc) {
    let grid = Grid::uniform(1.0, n, 1).unwrap();
    let c = 1f64.cosh();
    let xs = |t: f64| (1.0 - t).cosh() / c;
    let base = BaseMeasure::lebesgue(grid.clone());
    let w = (0..n).map(|i| vec![(xs(grid.node(i + 1)) - xs(grid.node(i))) / base.mass(i)]).collect();
    let x = BVArc::new(vec![1.0], DiscreteRadonMeasure::new(base, w, vec![]).unwrap()).unwrap();
    let y = ContinuousArc::from_fn(grid, |t| vec![-(1.0 - t).sinh() / c]).unwrap();
    (x, y)
}

/// `|u| + δ_{[c_t, ∞)}(x)` with `c` jumping from 0 to 1 at `½`, started at 0.
pub fn impulse_problem(n: usize) -> (TimeIntegrand, EndpointFn, DiscreteRadonMeasure) {
    let grid = Grid::uniform(1.0, n, 1).unwrap();
    let part = |c: f64| {
        (ConvexFn::new(vec![Plq::indicator(c, f64::INFINITY).unwrap()]).unwrap(), ConvexFn::broadcast(Plq::abs(), 1))
    };
    let k = TimeIntegrand::switched(grid.clone(), vec![part(0.0), part(1.0)], &[0.5]).unwrap();
    let end = EndpointFn::new(ConvexFn::new(vec![Plq::point(0.0)]).unwrap(), ConvexFn::zero(1)).unwrap();
    (k, end, DiscreteRadonMeasure::zero(BaseMeasure::lebesgue(grid)))
}

/// Multiples of `1/8` in `[lo, hi]`.
pub fn dyadic(r: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let (a, b) = ((lo * 8.0).ceil() as i64, (hi * 8.0).floor() as i64);
    r.gen_range(a..=b) as f64 / 8.0
}

fn curvature(r: &mut impl Rng) -> f64 {
    if r.gen_bool(0.5) {
        0.0
    } else {
        dyadic(r, 0.125, 2.0)
    }
}

/// Random convex PLQ on one of the line, a half-line, an interval or a point,
/// with dyadic data so that calculus round-trips are close to exact.
pub fn random_plq(r: &mut impl Rng) -> Plq {
    let kind = r.gen_range(0..10);
    let (lo, hi) = match kind {
        0..=3 => (f64::NEG_INFINITY, f64::INFINITY),
        4 | 5 => (dyadic(r, -3.0, 1.0), f64::INFINITY),
        6 | 7 => (f64::NEG_INFINITY, dyadic(r, -1.0, 3.0)),
        8 => {
            let a = dyadic(r, -3.0, 0.0);
            (a, a + dyadic(r, 0.25, 3.0))
        }
        _ => {
            let a = dyadic(r, -2.0, 2.0);
            (a, a)
        }
    };
    let (blo, bhi) = (lo.max(-4.0), hi.min(4.0));
    let mut breaks: Vec<f64> = Vec::new();
    if lo < hi {
        for _ in 0..r.gen_range(0..4) {
            let b = dyadic(r, blo, bhi);
            if b > lo && b < hi && !breaks.contains(&b) {
                breaks.push(b);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    let mut pieces = vec![Piece::new(curvature(r), dyadic(r, -2.0, 2.0), dyadic(r, -2.0, 2.0))];
    for &b in &breaks {
        let prev = *pieces.last().unwrap();
        let a = curvature(r);
        let slope = prev.slope(b) + if r.gen_bool(0.2) { 0.0 } else { dyadic(r, 0.125, 2.0) };
        let p = slope - 2.0 * a * b;
        let q = prev.eval(b) - a * b * b - p * b;
        pieces.push(Piece::new(a, p, q));
    }
    Plq::new(lo, hi, breaks, pieces).expect("generator builds convex PLQ")
}

/// Random PLQ that is finite on all of `R` and grows at most linearly or
/// quadratically; keeps random problems feasible.
pub fn random_finite_plq(r: &mut impl Rng) -> Plq {
    loop {
        let f = random_plq(r);
        if f.lo() == f64::NEG_INFINITY && f.hi() == f64::INFINITY {
            return f;
        }
    }
}

pub fn random_grid(r: &mut impl Rng, cells: usize, d: usize) -> Grid {
    let mut nodes = vec![0.0];
    for _ in 0..cells {
        let last = *nodes.last().unwrap();
        nodes.push(last + r.gen_range(0.05..0.4));
    }
    Grid::new(nodes, d).unwrap()
}

pub fn random_base(r: &mut impl Rng, cells: usize, d: usize) -> BaseMeasure {
    let grid = random_grid(r, cells, d);
    let masses = (0..cells).map(|_| r.gen_range(0.05..0.5)).collect();
    BaseMeasure::new(grid, masses).unwrap()
}

fn random_vec(r: &mut impl Rng, d: usize, s: f64) -> Vec<f64> {
    (0..d).map(|_| r.gen_range(-s..s)).collect()
}

/// Random measure with a cellwise density and up to four atoms, some at
/// nodes and some strictly inside cells.
pub fn random_measure(r: &mut impl Rng, base: &BaseMeasure, scale: f64) -> DiscreteRadonMeasure {
    let d = base.dim();
    let grid = base.grid().clone();
    let density = (0..base.cells()).map(|_| random_vec(r, d, scale)).collect();
    let mut atoms = Vec::new();
    for _ in 0..r.gen_range(0..5) {
        let t = if r.gen_bool(0.5) {
            grid.node(r.gen_range(0..=grid.cells()))
        } else {
            r.gen_range(0.0..grid.horizon())
        };
        atoms.push(Atom::new(t, random_vec(r, d, scale)));
    }
    DiscreteRadonMeasure::new(base.clone(), density, atoms).unwrap()
}

pub fn random_arc(r: &mut impl Rng, base: &BaseMeasure, scale: f64) -> BVArc {
    let x0 = random_vec(r, base.dim(), scale);
    BVArc::new(x0, random_measure(r, base, scale)).unwrap()
}

pub fn random_continuous(r: &mut impl Rng, grid: &Grid, scale: f64) -> ContinuousArc {
    let values = (0..=grid.cells()).map(|_| random_vec(r, grid.dim(), scale)).collect();
    ContinuousArc::new(grid.clone(), values).unwrap()
}

pub fn pick<'a, T>(r: &mut impl Rng, items: &'a [T]) -> &'a T {
    items.choose(r).unwrap()
}

/// `min c·x` subject to `A_ub x ≤ b_ub`, `A_eq x = b_eq`, `x ≥ 0`, by a dense
/// two-phase tableau simplex with Bland's rule. `None` when infeasible or unbounded.
pub fn simplex_min(c: &[f64], a_ub: &[Vec<f64>], b_ub: &[f64], a_eq: &[Vec<f64>], b_eq: &[f64]) -> Option<(f64, Vec<f64>)> {
    let n = c.len();
    let m_ub = a_ub.len();
    let m = m_ub + a_eq.len();
    // columns: originals, slacks, artificials, rhs
    let ncol = n + m_ub + m + 1;
    let mut t = vec![vec![0.0; ncol]; m];
    for i in 0..m {
        let (row, rhs, slack) = if i < m_ub { (&a_ub[i], b_ub[i], Some(i)) } else { (&a_eq[i - m_ub], b_eq[i - m_ub], None) };
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * row[j];
        }
        if let Some(s) = slack {
            t[i][n + s] = sign;
        }
        t[i][n + m_ub + i] = 1.0;
        t[i][ncol - 1] = sign * rhs;
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n + m_ub + i).collect();
    let eps = 1e-11;

    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| -> bool {
        loop {
            // reduced costs
            let mut enter = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for i in 0..t.len() {
                    rc -= cost[basis[i]] * t[i][j];
                }
                if rc < -eps {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..t.len() {
                if t[i][j] > eps {
                    let ratio = t[i][ncol - 1] / t[i][j];
                    match leave {
                        Some((l, best)) if ratio > best + eps || (ratio >= best - eps && basis[i] > basis[l]) => {}
                        _ => leave = Some((i, ratio)),
                    }
                }
            }
            let Some((p, _)) = leave else { return false };
            let piv = t[p][j];
            for v in t[p].iter_mut() {
                *v /= piv;
            }
            for i in 0..t.len() {
                if i != p && t[i][j] != 0.0 {
                    let f = t[i][j];
                    let (src, dst) = if i < p {
                        let (a, b) = t.split_at_mut(p);
                        (&b[0], &mut a[i])
                    } else {
                        let (a, b) = t.split_at_mut(i);
                        (&a[p], &mut b[0])
                    };
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d -= f * s;
                    }
                }
            }
            basis[p] = j;
        }
    };

    let mut phase1 = vec![0.0; ncol - 1];
    for v in &mut phase1[n + m_ub..] {
        *v = 1.0;
    }
    run(&mut t, &mut basis, &phase1, ncol - 1);
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= n + m_ub).map(|i| t[i][ncol - 1]).sum();
    if infeas > 1e-8 {
        return None;
    }
    let mut phase2 = vec![0.0; ncol - 1];
    phase2[..n].copy_from_slice(c);
    // artificials stay at zero: forbid them from entering
    if !run(&mut t, &mut basis, &phase2, n + m_ub) {
        return None;
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][ncol - 1];
        }
    }
    let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    Some((value, x))
}

/// The impulse problem on `n` uniform cells as a linear program in its own
/// variables: node jumps `a_j = a⁺_j − a⁻_j` (`j = 0..n`) and cell increments
/// `d_i = d⁺_i − d⁻_i`. The state right after node `j` is
/// `S_j = Σ_{k≤j} a_k + Σ_{i<j} d_i`, and on cell `i` both `S_i` and
/// `S_i + d_i` must lie above the bound of that cell. Returns the value and
/// the jump at every node.
pub fn impulse_lp(n: usize) -> (f64, Vec<f64>) {
    let bound = |i: usize| if (i as f64 + 0.5) / (n as f64) < 0.5 { 0.0 } else { 1.0 };
    let nv = 2 * (n + 1) + 2 * n;
    let ap = |j: usize| 2 * j;
    let am = |j: usize| 2 * j + 1;
    let dp = |i: usize| 2 * (n + 1) + 2 * i;
    let dm = |i: usize| 2 * (n + 1) + 2 * i + 1;
    let c = vec![1.0; nv];
    let mut a_ub = Vec::new();
    let mut b_ub = Vec::new();
    for i in 0..n {
        // -S_i <= -c_i and -(S_i + d_i) <= -c_i
        let mut row = vec![0.0; nv];
        for k in 0..=i {
            row[ap(k)] = -1.0;
            row[am(k)] = 1.0;
        }
        for k in 0..i {
            row[dp(k)] = -1.0;
            row[dm(k)] = 1.0;
        }
        a_ub.push(row.clone());
        b_ub.push(-bound(i));
        row[dp(i)] = -1.0;
        row[dm(i)] = 1.0;
        a_ub.push(row);
        b_ub.push(-bound(i));
    }
    let (value, z) = simplex_min(&c, &a_ub, &b_ub, &[], &[]).expect("impulse LP is feasible and bounded");
    let jumps = (0..=n).map(|j| z[ap(j)] - z[am(j)]).collect();
    (value, jumps)
}
