//! Dense two-phase tableau simplex with Bland's rule.

use crate::error::{check_len, Error, Result};
use crate::linalg::dot;

pub const FEAS_TOL: f64 = 1e-9;
pub const OPT_TOL: f64 = 1e-9;
pub const GAP_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 1_000_000;
const PIVOT_EPS: f64 = 1e-9;
const REINVERT_EVERY: usize = 32;

/// `min cᵀx` subject to `A_ub x ≤ b_ub`, `A_eq x = b_eq`. Variables are free unless
/// flagged non-negative.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub nonneg: Vec<bool>,
}

impl LinearProgram {
    pub fn new(c: Vec<f64>) -> Self {
        let n = c.len();
        Self {
            c,
            nonneg: vec![false; n],
            ..Default::default()
        }
    }

    pub fn vars(&self) -> usize {
        self.c.len()
    }

    pub fn le(&mut self, row: Vec<f64>, b: f64) -> &mut Self {
        self.a_ub.push(row);
        self.b_ub.push(b);
        self
    }

    pub fn eq(&mut self, row: Vec<f64>, b: f64) -> &mut Self {
        self.a_eq.push(row);
        self.b_eq.push(b);
        self
    }

    pub fn set_nonneg(&mut self, j: usize) -> &mut Self {
        self.nonneg[j] = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vars();
        if n == 0 {
            return Err(Error::Empty("linear program has no variables"));
        }
        check_len(n, self.nonneg.len())?;
        check_len(self.a_ub.len(), self.b_ub.len())?;
        check_len(self.a_eq.len(), self.b_eq.len())?;
        for r in self.a_ub.iter().chain(&self.a_eq) {
            check_len(n, r.len())?;
        }
        let finite = self
            .c
            .iter()
            .chain(self.b_ub.iter())
            .chain(self.b_eq.iter())
            .chain(self.a_ub.iter().flatten())
            .chain(self.a_eq.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite LP coefficient".into()));
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        dot(&self.c, x)
    }

    pub fn slacks(&self, x: &[f64]) -> Vec<f64> {
        self.a_ub
            .iter()
            .zip(&self.b_ub)
            .map(|(r, b)| b - dot(r, x))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
    /// Multipliers λ ≥ 0 of the inequality rows.
    pub ineq_duals: Vec<f64>,
    /// Multipliers ν of the equality rows.
    pub eq_duals: Vec<f64>,
    /// Inequality rows with zero slack at `x`.
    pub active_rows: Vec<usize>,
    pub iterations: usize,
}

/// Residuals of an optimal primal/dual pair.
#[derive(Debug, Clone, Copy)]
pub struct Certificate {
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub complementary_slackness: f64,
    pub duality_gap: f64,
}

impl Certificate {
    pub fn passes(&self) -> bool {
        self.primal_infeasibility <= FEAS_TOL
            && self.dual_infeasibility <= FEAS_TOL
            && self.complementary_slackness <= FEAS_TOL
            && self.duality_gap <= GAP_TOL
    }
}

impl LpSolution {
    /// Checks feasibility, dual feasibility, complementary slackness and the duality gap.
    pub fn certify(&self, lp: &LinearProgram) -> Certificate {
        let x = &self.x;
        let slack = lp.slacks(x);
        let mut primal = slack.iter().fold(0.0f64, |m, s| m.max(-s));
        for (r, b) in lp.a_eq.iter().zip(&lp.b_eq) {
            primal = primal.max((dot(r, x) - b).abs());
        }
        for (j, &nn) in lp.nonneg.iter().enumerate() {
            if nn {
                primal = primal.max(-x[j]);
            }
        }
        // r = c + A_ubᵀλ − A_eqᵀν
        let mut red = lp.c.clone();
        for (row, l) in lp.a_ub.iter().zip(&self.ineq_duals) {
            for (rj, a) in red.iter_mut().zip(row) {
                *rj += l * a;
            }
        }
        for (row, nu) in lp.a_eq.iter().zip(&self.eq_duals) {
            for (rj, a) in red.iter_mut().zip(row) {
                *rj -= nu * a;
            }
        }
        let mut dual = self.ineq_duals.iter().fold(0.0f64, |m, l| m.max(-l));
        let mut cs = 0.0f64;
        for (j, &nn) in lp.nonneg.iter().enumerate() {
            if nn {
                dual = dual.max(-red[j]);
                cs = cs.max((red[j] * x[j]).abs());
            } else {
                dual = dual.max(red[j].abs());
            }
        }
        for (l, s) in self.ineq_duals.iter().zip(&slack) {
            cs = cs.max((l * s).abs());
        }
        let primal_obj = lp.objective(x);
        let dual_obj = -dot(&lp.b_ub, &self.ineq_duals) + dot(&lp.b_eq, &self.eq_duals);
        Certificate {
            primal_infeasibility: primal,
            dual_infeasibility: dual,
            complementary_slackness: cs,
            duality_gap: (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs()),
        }
    }
}

struct Tableau {
    /// Constraint rows as first built; the basis is refactorized against these.
    orig: Vec<Vec<f64>>,
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
    iterations: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                row[e] = 0.0;
            }
        }
        let f = self.obj[e];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.obj[e] = 0.0;
        }
        self.basis[r] = e;
    }

    fn price(&mut self, cost: &[f64]) {
        self.cost = cost.to_vec();
        let mut obj: Vec<f64> = cost.to_vec();
        obj.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (o, v) in obj.iter_mut().zip(&self.rows[i]) {
                    *o -= cb * v;
                }
            }
        }
        self.obj = obj;
    }

    /// Rebuilds the tableau as `B⁻¹[A | b]` from the original rows, discarding pivot drift.
    /// Leaves the tableau untouched when the basis matrix is numerically singular.
    fn reinvert(&mut self) {
        let m = self.rows.len();
        if m == 0 {
            return;
        }
        let b = nalgebra::DMatrix::from_fn(m, m, |i, k| self.orig[i][self.basis[k]]);
        let Some(inv) = b.lu().try_inverse() else { return };
        let width = self.ncols + 1;
        let a = nalgebra::DMatrix::from_fn(m, width, |i, j| self.orig[i][j]);
        let fresh = inv * a;
        if fresh.iter().any(|v| !v.is_finite()) {
            return;
        }
        for (i, row) in self.rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = fresh[(i, j)];
            }
            row[self.basis[i]] = 1.0;
        }
        let cost = std::mem::take(&mut self.cost);
        self.price(&cost);
    }

    /// Pivots with Bland's rule until optimal; `Err(Unbounded)` when a column has no pivot.
    fn run(&mut self, allowed: &[bool]) -> Result<()> {
        let mut fresh = false;
        loop {
            let entering = (0..self.ncols).find(|&j| allowed[j] && self.obj[j] < -OPT_TOL);
            let Some(e) = entering else {
                if fresh {
                    return Ok(());
                }
                self.reinvert();
                fresh = true;
                continue;
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][e];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12
                                || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, e);
            self.iterations += 1;
            fresh = false;
            if self.iterations % REINVERT_EVERY == 0 {
                self.reinvert();
            }
            if self.iterations > MAX_ITERATIONS {
                return Err(Error::IterationLimit(MAX_ITERATIONS));
            }
        }
    }
}

/// Solve an LP. Infeasible and unbounded programs are reported through `status`;
/// `Err` is reserved for malformed input and the iteration cap.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.vars();
    let m_ub = lp.a_ub.len();
    let m = m_ub + lp.a_eq.len();

    // column layout: structural (split when free), slacks, artificials
    let mut pos = Vec::with_capacity(n);
    let mut neg = Vec::with_capacity(n);
    let mut col = 0;
    for j in 0..n {
        pos.push(col);
        col += 1;
        if lp.nonneg[j] {
            neg.push(None);
        } else {
            neg.push(Some(col));
            col += 1;
        }
    }
    let slack0 = col;
    col += m_ub;
    let mut sigma = vec![1.0; m];
    let mut ident = vec![0usize; m];
    let mut artificial = Vec::new();
    for i in 0..m {
        let b = if i < m_ub { lp.b_ub[i] } else { lp.b_eq[i - m_ub] };
        if b < 0.0 {
            sigma[i] = -1.0;
        }
        if i < m_ub && sigma[i] > 0.0 {
            ident[i] = slack0 + i;
        } else {
            ident[i] = col;
            artificial.push(col);
            col += 1;
        }
    }
    let ncols = col;
    let mut is_art = vec![false; ncols];
    for &a in &artificial {
        is_art[a] = true;
    }

    let mut rows = vec![vec![0.0; ncols + 1]; m];
    for i in 0..m {
        let (coef, b) = if i < m_ub {
            (&lp.a_ub[i], lp.b_ub[i])
        } else {
            (&lp.a_eq[i - m_ub], lp.b_eq[i - m_ub])
        };
        let s = sigma[i];
        let row = &mut rows[i];
        for j in 0..n {
            row[pos[j]] = s * coef[j];
            if let Some(nj) = neg[j] {
                row[nj] = -s * coef[j];
            }
        }
        if i < m_ub {
            row[slack0 + i] = s;
        }
        if is_art[ident[i]] {
            row[ident[i]] = 1.0;
        }
        row[ncols] = s * b;
    }

    let mut t = Tableau {
        orig: rows.clone(),
        rows,
        cost: Vec::new(),
        obj: Vec::new(),
        basis: ident.clone(),
        ncols,
        iterations: 0,
    };

    let bscale = 1.0
        + lp
            .b_ub
            .iter()
            .chain(&lp.b_eq)
            .fold(0.0f64, |a, b| a.max(b.abs()));

    if !artificial.is_empty() {
        let mut c1 = vec![0.0; ncols];
        for &a in &artificial {
            c1[a] = 1.0;
        }
        t.price(&c1);
        let allowed = vec![true; ncols];
        match t.run(&allowed) {
            Ok(()) => {}
            Err(Error::Unbounded) => {
                return Err(Error::Certification("phase one reported an unbounded ray".into()))
            }
            Err(e) => return Err(e),
        }
        let infeas = -t.obj[ncols];
        if infeas > FEAS_TOL * bscale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![f64::NAN; n],
                value: f64::NAN,
                ineq_duals: Vec::new(),
                eq_duals: Vec::new(),
                active_rows: Vec::new(),
                iterations: t.iterations,
            });
        }
        // drive zero-level artificials out of the basis where possible
        for i in 0..m {
            if is_art[t.basis[i]] {
                if let Some(j) = (0..ncols)
                    .filter(|&j| !is_art[j])
                    .max_by(|&a, &b| t.rows[i][a].abs().total_cmp(&t.rows[i][b].abs()))
                    .filter(|&j| t.rows[i][j].abs() > 1e-9)
                {
                    t.pivot(i, j);
                }
            }
        }
    }

    let mut c2 = vec![0.0; ncols];
    for j in 0..n {
        c2[pos[j]] = lp.c[j];
        if let Some(nj) = neg[j] {
            c2[nj] = -lp.c[j];
        }
    }
    t.price(&c2);
    let allowed: Vec<bool> = (0..ncols).map(|j| !is_art[j]).collect();
    match t.run(&allowed) {
        Ok(()) => {}
        Err(Error::Unbounded) => {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: vec![f64::NAN; n],
                value: f64::NEG_INFINITY,
                ineq_duals: Vec::new(),
                eq_duals: Vec::new(),
                active_rows: Vec::new(),
                iterations: t.iterations,
            })
        }
        Err(e) => return Err(e),
    }

    let mut z = vec![0.0; ncols];
    for (i, &b) in t.basis.iter().enumerate() {
        z[b] = t.rhs(i);
    }
    let x: Vec<f64> = (0..n)
        .map(|j| z[pos[j]] - neg[j].map_or(0.0, |nj| z[nj]))
        .collect();
    let y: Vec<f64> = (0..m).map(|i| -sigma[i] * t.obj[ident[i]]).collect();
    let ineq_duals: Vec<f64> = y[..m_ub].iter().map(|v| -v).collect();
    let eq_duals = y[m_ub..].to_vec();
    let slack = lp.slacks(&x);
    let active_rows = slack
        .iter()
        .enumerate()
        .filter(|(i, s)| s.abs() <= FEAS_TOL * (1.0 + lp.b_ub[*i].abs()))
        .map(|(i, _)| i)
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: lp.objective(&x),
        x,
        ineq_duals,
        eq_duals,
        active_rows,
        iterations: t.iterations,
    })
}

/// Solve and insist on a certified optimum.
pub fn solve_optimal(lp: &LinearProgram) -> Result<LpSolution> {
    let sol = solve(lp)?;
    match sol.status {
        LpStatus::Infeasible => Err(Error::Infeasible),
        LpStatus::Unbounded => Err(Error::Unbounded),
        LpStatus::Optimal => {
            let cert = sol.certify(lp);
            if !cert.passes() {
                return Err(Error::Certification(format!("{cert:?}")));
            }
            Ok(sol)
        }
    }
}
