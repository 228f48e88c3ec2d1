//! Finite convex programs of the form
//!
//! ```text
//! minimize  g·z + Σ_r w_r h_r(a_r·z + b_r)
//! ```
//!
//! with scalar PLQ terms `h_r`, weights `w_r > 0` and at most three nonzeros
//! per row.

use crate::convex::Plq;

#[derive(Clone, Debug)]
pub(crate) struct Row {
    pub idx: [usize; 3],
    pub coef: [f64; 3],
    pub len: usize,
    pub offset: f64,
    pub weight: f64,
    pub func: usize,
}

impl Row {
    #[inline]
    pub fn eval(&self, z: &[f64]) -> f64 {
        let mut s = self.offset;
        for k in 0..self.len {
            s += self.coef[k] * z[self.idx[k]];
        }
        s
    }

    #[inline]
    pub fn linear(&self, z: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..self.len {
            s += self.coef[k] * z[self.idx[k]];
        }
        s
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len).map(move |k| (self.idx[k], self.coef[k]))
    }

    pub fn norm(&self) -> f64 {
        self.coef[..self.len].iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Program {
    pub n: usize,
    pub g: Vec<f64>,
    pub rows: Vec<Row>,
    pub funcs: Vec<Plq>,
}

impl Program {
    pub fn new(n: usize) -> Self {
        Program { n, g: vec![0.0; n], rows: Vec::new(), funcs: Vec::new() }
    }

    pub fn add_func(&mut self, f: Plq) -> usize {
        self.funcs.push(f);
        self.funcs.len() - 1
    }

    /// Adds `weight · funcs[func](Σ coef·z[idx] + offset)`; rows whose term is
    /// identically zero are dropped.
    pub fn add_row(&mut self, terms: &[(usize, f64)], offset: f64, weight: f64, func: usize) {
        let f = &self.funcs[func];
        if f.lo() == f64::NEG_INFINITY && f.hi() == f64::INFINITY && f.is_flat() && f.pieces()[0].q == 0.0 {
            return;
        }
        let mut row = Row { idx: [0; 3], coef: [0.0; 3], len: 0, offset, weight, func };
        for &(i, c) in terms {
            if c != 0.0 {
                row.idx[row.len] = i;
                row.coef[row.len] = c;
                row.len += 1;
            }
        }
        if row.len == 0 {
            // a constant row still matters when it is infeasible
            row.idx[0] = 0;
            row.coef[0] = 0.0;
            row.len = 1;
        }
        self.rows.push(row);
    }

    pub fn objective(&self, z: &[f64]) -> f64 {
        let mut total: f64 = self.g.iter().zip(z).map(|(a, b)| a * b).sum();
        for r in &self.rows {
            let v = self.funcs[r.func].value(r.eval(z));
            if v == f64::INFINITY {
                return v;
            }
            total += r.weight * v;
        }
        total
    }

    pub fn bandwidth(&self) -> usize {
        self.rows
            .iter()
            .map(|r| {
                let idx = &r.idx[..r.len];
                idx.iter().max().unwrap() - idx.iter().min().unwrap()
            })
            .max()
            .unwrap_or(0)
    }
}
