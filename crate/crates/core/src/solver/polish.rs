//! Active-set refinement: guess which rows sit at a kink, solve the resulting
//! equality-constrained quadratic program, and verify the optimality
//! conditions of the original program at the result.

use super::program::Program;

/// Symmetric positive definite matrix in lower band storage.
pub(crate) struct Banded {
    n: usize,
    bw: usize,
    /// `a[i * (bw + 1) + k]` holds entry `(i, i - k)`
    a: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Banded { n, bw, a: vec![0.0; n * (bw + 1)] }
    }

    /// Adds `v` at `(i, j)` and `(j, i)`; `|i - j| <= bw`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        self.a[hi * (self.bw + 1) + (hi - lo)] += v;
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.a[i * (self.bw + 1)]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        self.a[hi * (self.bw + 1) + (hi - lo)]
    }

    /// In-place `LDLᵀ` factorisation without pivoting, for quasi-definite
    /// matrices; `D` replaces the diagonal.
    pub fn factor_ldl(&mut self) -> bool {
        let w = self.bw + 1;
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.bw);
            for j in j0..=i {
                let mut s = self.a[i * w + (i - j)];
                let k0 = j0.max(j.saturating_sub(self.bw));
                for k in k0..j {
                    s -= self.a[i * w + (i - k)] * self.a[k * w] * self.a[j * w + (j - k)];
                }
                if i == j {
                    if !(s.abs() > 1e-300) || !s.is_finite() {
                        return false;
                    }
                    self.a[i * w] = s;
                } else {
                    self.a[i * w + (i - j)] = s / self.a[j * w];
                }
            }
        }
        true
    }

    pub fn solve_ldl(&self, b: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let mut s = b[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.a[i * w + (i - k)] * b[k];
            }
            b[i] = s;
        }
        for i in 0..self.n {
            b[i] /= self.a[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + self.bw + 1).min(self.n) {
                s -= self.a[k * w + (k - i)] * b[k];
            }
            b[i] = s;
        }
    }

}

#[derive(Clone, Copy, Debug)]
enum Active {
    /// `a·z + b` pinned at this kink
    Kink(f64),
    /// inside piece `p` with `[lo, hi]`
    Piece(usize, f64, f64),
}

pub(crate) struct Polished {
    pub z: Vec<f64>,
    pub verified: bool,
}

fn classify(prog: &Program, z: &[f64], eta: f64) -> Vec<Active> {
    prog.rows
        .iter()
        .map(|row| {
            let f = &prog.funcs[row.func];
            let s = row.eval(z);
            if f.lo() == f.hi() {
                return Active::Kink(f.lo());
            }
            if s <= f.lo() {
                return Active::Kink(f.lo());
            }
            if s >= f.hi() {
                return Active::Kink(f.hi());
            }
            let near = f
                .kinks()
                .into_iter()
                .map(|k| ((s - k).abs(), k))
                .filter(|(d, k)| *d <= eta * (1.0 + k.abs()))
                .min_by(|a, b| a.0.total_cmp(&b.0));
            if let Some((_, k)) = near {
                return Active::Kink(k);
            }
            let p = f.breaks().partition_point(|&b| b < s);
            let lo = if p == 0 { f.lo() } else { f.breaks()[p - 1] };
            let hi = if p == f.breaks().len() { f.hi() } else { f.breaks()[p] };
            Active::Piece(p, lo, hi)
        })
        .collect()
}

/// Refines `(z, lam)` under the active set read off at distance `eta` from the kinks.
pub(crate) fn polish(prog: &Program, z0: &[f64], lam0: &[f64], eta: f64) -> Option<Polished> {
    let n = prog.n;
    let bw = prog.bandwidth();
    let active = classify(prog, z0, eta);

    let mut h = Banded::zeros(n, bw);
    let mut c = prog.g.clone();
    // equality rows, normalised: (row index, norm, target)
    let mut eqs: Vec<(usize, f64, f64, f64)> = Vec::new();
    for (r, (row, act)) in prog.rows.iter().zip(&active).enumerate() {
        match *act {
            Active::Piece(p, ..) => {
                let piece = prog.funcs[row.func].pieces()[p];
                let qa = row.weight * piece.a;
                let lin = row.weight * (2.0 * piece.a * row.offset + piece.p);
                for (i, ci) in row.terms() {
                    c[i] += lin * ci;
                    if qa != 0.0 {
                        for (j, cj) in row.terms() {
                            if j <= i {
                                h.add(i, j, 2.0 * qa * ci * cj);
                            }
                        }
                    }
                }
            }
            Active::Kink(k) => {
                let nrm = row.norm();
                if nrm == 0.0 {
                    if (row.offset - k).abs() > 1e-12 * (1.0 + k.abs()) {
                        return None;
                    }
                    continue;
                }
                eqs.push((r, nrm, (k - row.offset) / nrm, k));
            }
        }
    }
    let mut s0: f64 = (0..n).map(|i| h.diag(i)).fold(0.0, f64::max);
    if s0 == 0.0 {
        s0 = c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    }
    let rho = 1e-10 * s0;
    let delta = 1e-10 / s0;

    // interleave each equality row right after the last variable it touches
    let m = eqs.len();
    let mut keys: Vec<(usize, usize, usize)> = (0..n).map(|i| (i, 0, i)).collect();
    for (e, &(r, ..)) in eqs.iter().enumerate() {
        let last = prog.rows[r].terms().map(|(i, _)| i).max().unwrap_or(0);
        keys.push((last, 1, n + e));
    }
    keys.sort_unstable();
    let mut pos = vec![0; n + m];
    for (p, &(.., u)) in keys.iter().enumerate() {
        pos[u] = p;
    }
    let mut kbw = bw;
    for (e, &(r, ..)) in eqs.iter().enumerate() {
        for (i, _) in prog.rows[r].terms() {
            kbw = kbw.max(pos[n + e].abs_diff(pos[i]));
        }
    }
    for i in 0..n {
        for j in i.saturating_sub(bw)..i {
            kbw = kbw.max(pos[i].abs_diff(pos[j]));
        }
    }
    let mut kkt = Banded::zeros(n + m, kbw);
    for i in 0..n {
        kkt.add(pos[i], pos[i], h.diag(i) + rho);
        for j in i.saturating_sub(bw)..i {
            let v = h.get(i, j);
            if v != 0.0 {
                kkt.add(pos[i], pos[j], v);
            }
        }
    }
    for (e, &(r, nrm, ..)) in eqs.iter().enumerate() {
        kkt.add(pos[n + e], pos[n + e], -delta);
        for (i, ci) in prog.rows[r].terms() {
            kkt.add(pos[n + e], pos[i], ci / nrm);
        }
    }
    if !kkt.factor_ldl() {
        return None;
    }
    let mut lam: Vec<f64> = eqs.iter().map(|&(r, nrm, ..)| lam0.get(r).copied().unwrap_or(0.0) * nrm).collect();
    let mut z = z0.to_vec();
    let target_scale = 1.0 + eqs.iter().fold(0.0f64, |m, e| m.max(e.2.abs()));
    let mut converged = false;
    let mut rhs = vec![0.0; n + m];
    for _ in 0..100 {
        // one proximal step, solved to working accuracy by refinement
        let (z_anchor, lam_anchor) = (z.clone(), lam.clone());
        for _ in 0..4 {
            let mut gz = c.clone();
            for i in 0..n {
                gz[i] += (h.diag(i) + rho) * z[i] - rho * z_anchor[i];
                for j in i.saturating_sub(bw)..i {
                    let v = h.get(i, j);
                    gz[i] += v * z[j];
                    gz[j] += v * z[i];
                }
            }
            for (e, &(r, nrm, tgt, _)) in eqs.iter().enumerate() {
                let row = &prog.rows[r];
                for (i, ci) in row.terms() {
                    gz[i] += ci / nrm * lam[e];
                }
                rhs[pos[n + e]] = tgt - row.linear(&z) / nrm + delta * (lam[e] - lam_anchor[e]);
            }
            for i in 0..n {
                rhs[pos[i]] = -gz[i];
            }
            kkt.solve_ldl(&mut rhs);
            for i in 0..n {
                z[i] += rhs[pos[i]];
            }
            for e in 0..m {
                lam[e] += rhs[pos[n + e]];
            }
        }
        let step = z.iter().zip(&z_anchor).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if !z.iter().chain(&lam).all(|v| v.is_finite()) {
            return None;
        }
        let viol = eqs.iter().fold(0.0f64, |m, &(r, nrm, tgt, _)| m.max((prog.rows[r].linear(&z) / nrm - tgt).abs()));
        let zscale = 1.0 + z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if viol <= 1e-13 * target_scale && step <= 1e-12 * zscale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Some(Polished { z, verified: false });
    }
    let verified = verify(prog, &z, &active, &eqs, &lam);
    Some(Polished { z, verified })
}

fn verify(prog: &Program, z: &[f64], active: &[Active], eqs: &[(usize, f64, f64, f64)], lam: &[f64]) -> bool {
    for (row, act) in prog.rows.iter().zip(active) {
        if let Active::Piece(_, lo, hi) = *act {
            let s = row.eval(z);
            let tol = 1e-9 * (1.0 + s.abs());
            if s < lo - tol || s > hi + tol {
                return false;
            }
        }
    }
    for (e, &(r, nrm, _, k)) in eqs.iter().enumerate() {
        let row = &prog.rows[r];
        let f = &prog.funcs[row.func];
        let xi = lam[e] / nrm;
        let Ok((l, u)) = f.subdiff(k) else {
            return false;
        };
        let (l, u) = (row.weight * l, row.weight * u);
        let tol = 1e-8 * (xi.abs() + row.weight);
        if xi < l - tol || xi > u + tol {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banded_ldl_solves_quasi_definite_system() {
        let n = 6;
        let mut m = Banded::zeros(n, 1);
        for i in 0..n {
            m.add(i, i, if i % 2 == 0 { 2.0 } else { -2.0 });
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let mut b: Vec<f64> = (0..n)
            .map(|i| {
                let d = if i % 2 == 0 { 2.0 } else { -2.0 };
                d * x[i] - if i > 0 { x[i - 1] } else { 0.0 } - if i + 1 < n { x[i + 1] } else { 0.0 }
            })
            .collect();
        assert!(m.factor_ldl());
        m.solve_ldl(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }
}
