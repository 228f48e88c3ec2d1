//! Diagonally preconditioned primal-dual hybrid gradient with adaptive
//! restarts for [`Program`].

use super::program::Program;

pub(crate) struct Pdhg<'a> {
    prog: &'a Program,
    tau: Vec<f64>,
    sigma: Vec<f64>,
    pub z: Vec<f64>,
    pub lam: Vec<f64>,
    pub omega: f64,
    z_avg: Vec<f64>,
    lam_avg: Vec<f64>,
    avg_count: f64,
    z_anchor: Vec<f64>,
    lam_anchor: Vec<f64>,
    last_restart_residual: f64,
    prev_candidate_residual: f64,
    since_restart: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub residual: f64,
    az: Vec<f64>,
    atl: Vec<f64>,
}

impl<'a> Pdhg<'a> {
    pub fn new(prog: &'a Program, z0: Vec<f64>, lam0: Vec<f64>) -> Self {
        let n = prog.n;
        let m = prog.rows.len();
        let mut col = vec![0.0; n];
        let mut sigma = vec![0.0; m];
        for (r, row) in prog.rows.iter().enumerate() {
            for (i, c) in row.terms() {
                col[i] += c.abs();
                sigma[r] += c.abs();
            }
        }
        let tau = col.iter().map(|&c| if c > 0.0 { 1.0 / c } else { 1.0 }).collect();
        let sigma = sigma.iter().map(|&s| if s > 0.0 { 1.0 / s } else { 1.0 }).collect();
        Pdhg {
            prog,
            tau,
            sigma,
            z_avg: z0.clone(),
            lam_avg: lam0.clone(),
            avg_count: 0.0,
            z_anchor: z0.clone(),
            lam_anchor: lam0.clone(),
            z: z0,
            lam: lam0,
            omega: 1.0,
            last_restart_residual: f64::INFINITY,
            prev_candidate_residual: f64::INFINITY,
            since_restart: 0,
            iterations: 0,
            restarts: 0,
            residual: f64::INFINITY,
            az: vec![0.0; m],
            atl: vec![0.0; n],
        }
    }

    fn at_lambda(&self, lam: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.prog.g);
        for (row, &l) in self.prog.rows.iter().zip(lam) {
            for (i, c) in row.terms() {
                out[i] += c * l;
            }
        }
    }

    /// One PDHG step from `(z, lam)`; returns the new pair.
    fn step(&mut self, z: &[f64], lam: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let prog = self.prog;
        let mut atl = std::mem::take(&mut self.atl);
        self.at_lambda(lam, &mut atl);
        let znew: Vec<f64> =
            z.iter().zip(&atl).zip(&self.tau).map(|((zi, gi), t)| zi - t / self.omega * gi).collect();
        self.atl = atl;
        let mut lnew = Vec::with_capacity(lam.len());
        for (r, row) in prog.rows.iter().enumerate() {
            let mut bar = 0.0;
            for (i, c) in row.terms() {
                bar += c * (2.0 * znew[i] - z[i]);
            }
            self.az[r] = bar;
            let sig = self.sigma[r] * self.omega;
            let v = lam[r] + sig * bar;
            let q = v / sig;
            let f = &prog.funcs[row.func];
            let s = f.prox(q + row.offset, row.weight / sig) - row.offset;
            lnew.push(v - sig * s);
        }
        (znew, lnew)
    }

    fn movement(&self, z0: &[f64], l0: &[f64], z1: &[f64], l1: &[f64]) -> f64 {
        let mut p = 0.0;
        for i in 0..z0.len() {
            let d = z1[i] - z0[i];
            p += d * d / self.tau[i] * self.omega;
        }
        let mut q = 0.0;
        for r in 0..l0.len() {
            let d = l1[r] - l0[r];
            q += d * d / self.sigma[r] / self.omega;
        }
        (p + q).sqrt()
    }

    /// Fixed-point residual of the PDHG map at `(z, lam)`.
    fn residual_at(&mut self, z: &[f64], lam: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let (z1, l1) = self.step(z, lam);
        (self.movement(z, lam, &z1, &l1), z1, l1)
    }

    /// Runs `iters` iterations with restart checks every `check` iterations.
    pub fn run(&mut self, iters: usize, check: usize) {
        for _ in 0..iters {
            let (z1, l1) = self.step(&self.z.clone(), &self.lam.clone());
            self.z = z1;
            self.lam = l1;
            self.avg_count += 1.0;
            let w = 1.0 / self.avg_count;
            for (a, b) in self.z_avg.iter_mut().zip(&self.z) {
                *a += w * (b - *a);
            }
            for (a, b) in self.lam_avg.iter_mut().zip(&self.lam) {
                *a += w * (b - *a);
            }
            self.iterations += 1;
            self.since_restart += 1;
            if self.since_restart % check == 0 {
                self.maybe_restart();
            }
        }
    }

    fn maybe_restart(&mut self) {
        let (z, l) = (self.z.clone(), self.lam.clone());
        let (za, la) = (self.z_avg.clone(), self.lam_avg.clone());
        let (r_cur, ..) = self.residual_at(&z, &l);
        let (r_avg, ..) = self.residual_at(&za, &la);
        let (r, cz, cl) = if r_avg < r_cur { (r_avg, za, la) } else { (r_cur, z, l) };
        self.residual = r;
        let restart = r <= 0.2 * self.last_restart_residual
            || (r <= 0.8 * self.last_restart_residual && r > self.prev_candidate_residual)
            || self.since_restart as f64 >= 0.36 * self.iterations as f64 && self.iterations > 1000;
        self.prev_candidate_residual = r;
        if !restart {
            return;
        }
        // primal weight update from the movement since the last restart
        let dz: f64 = cz.iter().zip(&self.z_anchor).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let dl: f64 = cl.iter().zip(&self.lam_anchor).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dz > 1e-10 && dl > 1e-10 {
            let target = (dl / dz).clamp(1e-6, 1e6);
            self.omega = (0.5 * target.ln() + 0.5 * self.omega.ln()).exp();
        }
        self.z = cz.clone();
        self.lam = cl.clone();
        self.z_avg = cz.clone();
        self.lam_avg = cl.clone();
        self.z_anchor = cz;
        self.lam_anchor = cl;
        self.avg_count = 0.0;
        self.last_restart_residual = r;
        self.prev_candidate_residual = f64::INFINITY;
        self.since_restart = 0;
        self.restarts += 1;
    }

    /// Best of the current and the averaged iterate by fixed-point residual.
    pub fn candidate(&mut self) -> (Vec<f64>, Vec<f64>, f64) {
        let (z, l) = (self.z.clone(), self.lam.clone());
        let (za, la) = (self.z_avg.clone(), self.lam_avg.clone());
        let (r_cur, ..) = self.residual_at(&z, &l);
        if self.avg_count == 0.0 {
            return (z, l, r_cur);
        }
        let (r_avg, ..) = self.residual_at(&za, &la);
        if r_avg < r_cur {
            (za, la, r_avg)
        } else {
            (z, l, r_cur)
        }
    }
}
