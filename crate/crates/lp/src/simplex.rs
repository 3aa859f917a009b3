//! Bounded-variable revised primal simplex.
//!
//! Every row `a'x (<=|>=|=) b` gets a slack `s` so that `a'x + s = b`, with
//! the slack bounds encoding the sense. Phase one adds one artificial column
//! per row whose slack cannot absorb the initial residual and minimises
//! their sum; phase two prices the original costs. The basis inverse is a
//! sparse LU factorisation followed by a product-form eta file that is
//! refactorised periodically.

use std::time::Instant;

use crate::error::SolveError;
use crate::lu::{factorize, Factorization, LuFactors};
use crate::model::{LinearModel, Sense};

pub const FEASIBILITY_TOL: f64 = 1e-7;
pub const OPTIMALITY_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
const REFACTOR_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Structural column values (empty unless optimal).
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    Lower,
    Upper,
    Free,
}

struct Eta {
    pos: usize,
    pivot: f64,
    col: Vec<(usize, f64)>,
}

enum Step {
    Optimal,
    Unbounded,
    Continue,
}

/// Solves the LP relaxation of `model` with the column bounds replaced by
/// `lower`/`upper`.
pub fn solve_lp(
    model: &LinearModel,
    lower: &[f64],
    upper: &[f64],
    deadline: Option<Instant>,
) -> Result<LpOutcome, SolveError> {
    for j in 0..model.num_columns() {
        if lower[j] > upper[j] {
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: f64::INFINITY,
                iterations: 0,
            });
        }
    }
    let mut s = Simplex::new(model, lower, upper, deadline);
    s.run()?;
    Ok(s.outcome(model))
}

struct Simplex {
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    col_scale: Vec<f64>,
    art_row: Vec<usize>,
    art_sign: Vec<f64>,
    orig_cost: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    b: Vec<f64>,
    lu: Option<LuFactors>,
    etas: Vec<Eta>,
    iterations: usize,
    max_iterations: usize,
    degenerate_run: usize,
    bland_after: usize,
    deadline: Option<Instant>,
    status: LpStatus,
    // scratch
    work_row: Vec<f64>,
    work_pos: Vec<f64>,
    duals: Vec<f64>,
    alpha: Vec<f64>,
}

fn pow2_scale(max: f64, min: f64) -> f64 {
    if max <= 0.0 || !max.is_finite() {
        return 1.0;
    }
    let g = (max * min).sqrt();
    (2.0f64).powi(-(g.log2().round() as i32))
}

impl Simplex {
    fn new(model: &LinearModel, lower: &[f64], upper: &[f64], deadline: Option<Instant>) -> Self {
        let m = model.num_rows();
        let n = model.num_columns();

        // Geometric equilibration with power-of-two factors (exact in binary).
        let mut row_scale = vec![1.0; m];
        for (i, row) in model.rows().iter().enumerate() {
            let (mut mx, mut mn) = (0.0f64, f64::INFINITY);
            for &(_, a) in &row.coeffs {
                mx = mx.max(a.abs());
                mn = mn.min(a.abs());
            }
            row_scale[i] = pow2_scale(mx, mn);
        }
        let mut counts = vec![0usize; n];
        for row in model.rows() {
            for &(j, _) in &row.coeffs {
                counts[j] += 1;
            }
        }
        let mut col_start = vec![0usize; n + 1];
        for j in 0..n {
            col_start[j + 1] = col_start[j] + counts[j];
        }
        let nnz = col_start[n];
        let mut col_row = vec![0usize; nnz];
        let mut col_val = vec![0.0; nnz];
        let mut fill = col_start.clone();
        for (i, row) in model.rows().iter().enumerate() {
            for &(j, a) in &row.coeffs {
                col_row[fill[j]] = i;
                col_val[fill[j]] = a * row_scale[i];
                fill[j] += 1;
            }
        }
        let mut col_scale = vec![1.0; n];
        for j in 0..n {
            let (mut mx, mut mn) = (0.0f64, f64::INFINITY);
            for k in col_start[j]..col_start[j + 1] {
                mx = mx.max(col_val[k].abs());
                mn = mn.min(col_val[k].abs());
            }
            col_scale[j] = pow2_scale(mx, mn);
            for k in col_start[j]..col_start[j + 1] {
                col_val[k] *= col_scale[j];
            }
        }

        let mut lo = Vec::with_capacity(n + m);
        let mut hi = Vec::with_capacity(n + m);
        let mut orig_cost = Vec::with_capacity(n + m);
        for j in 0..n {
            lo.push(lower[j] / col_scale[j]);
            hi.push(upper[j] / col_scale[j]);
            orig_cost.push(model.column(j).cost * col_scale[j]);
        }
        for row in model.rows() {
            let (l, h) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lo.push(l);
            hi.push(h);
            orig_cost.push(0.0);
        }
        let b: Vec<f64> = model
            .rows()
            .iter()
            .enumerate()
            .map(|(i, r)| r.rhs * row_scale[i])
            .collect();

        let total = n + m;
        let mut s = Simplex {
            m,
            n,
            col_start,
            col_row,
            col_val,
            col_scale,
            art_row: Vec::new(),
            art_sign: Vec::new(),
            cost: vec![0.0; total],
            orig_cost,
            lo,
            hi,
            x: vec![0.0; total],
            state: vec![VarState::Lower; total],
            basis: Vec::with_capacity(m),
            b,
            lu: None,
            etas: Vec::new(),
            iterations: 0,
            max_iterations: 200 * (n + m) + 10_000,
            degenerate_run: 0,
            bland_after: 10 * n.max(1),
            deadline,
            status: LpStatus::Optimal,
            work_row: vec![0.0; m],
            work_pos: vec![0.0; m],
            duals: vec![0.0; m],
            alpha: vec![0.0; m],
        };
        s.initial_basis();
        s
    }

    fn num_vars(&self) -> usize {
        self.n + self.m + self.art_row.len()
    }

    fn for_column(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                f(self.col_row[k], self.col_val[k]);
            }
        } else if j < self.n + self.m {
            f(j - self.n, 1.0);
        } else {
            let a = j - self.n - self.m;
            f(self.art_row[a], self.art_sign[a]);
        }
    }

    fn column_vec(&self, j: usize) -> Vec<(usize, f64)> {
        let mut v = Vec::new();
        self.for_column(j, |i, a| v.push((i, a)));
        v
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lo[j] == self.hi[j]
    }

    fn initial_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        for j in 0..n {
            if self.lo[j].is_finite() {
                self.state[j] = VarState::Lower;
                self.x[j] = self.lo[j];
            } else if self.hi[j].is_finite() {
                self.state[j] = VarState::Upper;
                self.x[j] = self.hi[j];
            } else {
                self.state[j] = VarState::Free;
                self.x[j] = 0.0;
            }
        }
        let mut resid = self.b.clone();
        for j in 0..n {
            let xj = self.x[j];
            if xj != 0.0 {
                for k in self.col_start[j]..self.col_start[j + 1] {
                    resid[self.col_row[k]] -= self.col_val[k] * xj;
                }
            }
        }
        for (i, &r) in resid.iter().enumerate() {
            let sl = n + i;
            let (l, h) = (self.lo[sl], self.hi[sl]);
            if r >= l - FEASIBILITY_TOL && r <= h + FEASIBILITY_TOL {
                self.state[sl] = VarState::Basic;
                self.x[sl] = r;
                self.basis.push(sl);
            } else {
                let bound = if r > h { h } else { l };
                self.state[sl] = if r > h {
                    VarState::Upper
                } else {
                    VarState::Lower
                };
                self.x[sl] = bound;
                let sign = if r > bound { 1.0 } else { -1.0 };
                self.art_row.push(i);
                self.art_sign.push(sign);
                self.lo.push(0.0);
                self.hi.push(f64::INFINITY);
                self.cost.push(0.0);
                self.orig_cost.push(0.0);
                self.x.push((r - bound).abs());
                self.state.push(VarState::Basic);
                self.basis.push(n + m + self.art_row.len() - 1);
            }
        }
    }

    fn outcome(&self, model: &LinearModel) -> LpOutcome {
        let iterations = self.iterations;
        if self.status != LpStatus::Optimal {
            return LpOutcome {
                status: self.status,
                x: Vec::new(),
                objective: f64::INFINITY,
                iterations,
            };
        }
        let x: Vec<f64> = (0..self.n).map(|j| self.x[j] * self.col_scale[j]).collect();
        let objective = model.evaluate(&x);
        LpOutcome {
            status: LpStatus::Optimal,
            x,
            objective,
            iterations,
        }
    }

    fn run(&mut self) -> Result<(), SolveError> {
        self.refactor()?;
        if !self.art_row.is_empty() {
            for a in 0..self.art_row.len() {
                self.cost[self.n + self.m + a] = 1.0;
            }
            match self.phase()? {
                Step::Optimal => {}
                Step::Unbounded => {
                    return Err(self.breakdown("phase one reported unbounded"));
                }
                Step::Continue => return Ok(()),
            }
            let infeas: f64 = (0..self.art_row.len())
                .map(|a| self.x[self.n + self.m + a].max(0.0))
                .sum();
            if infeas > 1e-6 {
                self.status = LpStatus::Infeasible;
                return Ok(());
            }
            let first_art = self.n + self.m;
            for j in first_art..self.num_vars() {
                self.hi[j] = 0.0;
                self.cost[j] = 0.0;
                if self.state[j] != VarState::Basic {
                    self.state[j] = VarState::Lower;
                    self.x[j] = 0.0;
                }
            }
            self.drive_out_artificials()?;
        }
        let total = self.num_vars();
        self.cost[..total].copy_from_slice(&self.orig_cost[..total]);
        self.degenerate_run = 0;
        match self.phase()? {
            Step::Optimal => {
                self.status = LpStatus::Optimal;
            }
            Step::Unbounded => self.status = LpStatus::Unbounded,
            Step::Continue => {}
        }
        Ok(())
    }

    fn breakdown(&self, reason: &str) -> SolveError {
        SolveError::NumericalBreakdown {
            iterations: self.iterations,
            reason: reason.to_string(),
        }
    }

    /// Runs simplex iterations with the current cost vector. Returns
    /// `Continue` only when the deadline was hit (status already set).
    fn phase(&mut self) -> Result<Step, SolveError> {
        let mut confirmed = false;
        loop {
            if self.iterations.is_multiple_of(64) {
                if let Some(d) = self.deadline {
                    if Instant::now() >= d {
                        self.status = LpStatus::TimeLimit;
                        return Ok(Step::Continue);
                    }
                }
            }
            if self.iterations > self.max_iterations {
                return Err(self.breakdown("iteration guard exceeded"));
            }
            if self.etas.len() >= REFACTOR_EVERY {
                self.refactor()?;
            }
            match self.iterate()? {
                Step::Optimal => {
                    if self.etas.is_empty() || confirmed {
                        self.check_primal()?;
                        return Ok(Step::Optimal);
                    }
                    // Confirm on a fresh factorisation.
                    self.refactor()?;
                    confirmed = true;
                }
                Step::Unbounded => return Ok(Step::Unbounded),
                Step::Continue => confirmed = false,
            }
        }
    }

    fn check_primal(&self) -> Result<(), SolveError> {
        let mut worst = 0.0f64;
        for &j in &self.basis {
            worst = worst.max(self.lo[j] - self.x[j]).max(self.x[j] - self.hi[j]);
        }
        if worst > 1e-6 {
            return Err(self.breakdown(&format!("primal infeasibility {worst:e} at optimum")));
        }
        Ok(())
    }

    fn compute_duals(&mut self) {
        let lu = self.lu.as_ref().expect("factorised");
        for (p, &j) in self.basis.iter().enumerate() {
            self.work_pos[p] = self.cost[j];
        }
        for eta in self.etas.iter().rev() {
            let mut s = self.work_pos[eta.pos];
            for &(i, a) in &eta.col {
                s -= a * self.work_pos[i];
            }
            self.work_pos[eta.pos] = s / eta.pivot;
        }
        lu.btran(&mut self.work_pos, &mut self.duals);
    }

    fn ftran_column(&mut self, j: usize) {
        self.work_row.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                self.work_row[self.col_row[k]] = self.col_val[k];
            }
        } else if j < self.n + self.m {
            self.work_row[j - self.n] = 1.0;
        } else {
            let a = j - self.n - self.m;
            self.work_row[self.art_row[a]] = self.art_sign[a];
        }
        self.ftran_work();
    }

    /// `alpha = B^-1 work_row` (work_row is consumed).
    fn ftran_work(&mut self) {
        let lu = self.lu.as_ref().expect("factorised");
        lu.ftran(&mut self.work_row, &mut self.alpha);
        for eta in &self.etas {
            let xp = self.alpha[eta.pos] / eta.pivot;
            self.alpha[eta.pos] = xp;
            if xp != 0.0 {
                for &(i, a) in &eta.col {
                    self.alpha[i] -= a * xp;
                }
            }
        }
    }

    fn reduced_cost(&self, j: usize) -> f64 {
        let mut d = self.cost[j];
        self.for_column(j, |i, a| d -= self.duals[i] * a);
        d
    }

    fn iterate(&mut self) -> Result<Step, SolveError> {
        self.compute_duals();
        let bland = self.degenerate_run > self.bland_after;

        // Pricing.
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.num_vars() {
            let st = self.state[j];
            if st == VarState::Basic || self.is_fixed(j) {
                continue;
            }
            let d = self.reduced_cost(j);
            let dir = match st {
                VarState::Lower if d < -OPTIMALITY_TOL => 1.0,
                VarState::Upper if d > OPTIMALITY_TOL => -1.0,
                VarState::Free if d.abs() > OPTIMALITY_TOL => -d.signum(),
                _ => continue,
            };
            if bland {
                best = Some((j, dir));
                break;
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        let (q, dir) = match best {
            Some(b) => b,
            None => return Ok(Step::Optimal),
        };

        self.ftran_column(q);

        // Ratio test (Harris two-pass, or textbook under Bland's rule).
        let range = self.hi[q] - self.lo[q];
        let mut leave: Option<(usize, f64)> = None;
        if bland {
            let mut best_ratio = f64::INFINITY;
            let mut best_var = usize::MAX;
            for p in 0..self.m {
                let a = self.alpha[p];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let j = self.basis[p];
                let delta = dir * a;
                let ratio = if delta > 0.0 {
                    if self.lo[j].is_finite() {
                        (self.x[j] - self.lo[j]) / delta
                    } else {
                        continue;
                    }
                } else if self.hi[j].is_finite() {
                    (self.hi[j] - self.x[j]) / -delta
                } else {
                    continue;
                };
                let ratio = ratio.max(0.0);
                if ratio < best_ratio || (ratio == best_ratio && j < best_var) {
                    best_ratio = ratio;
                    best_var = j;
                    leave = Some((p, ratio));
                }
            }
        } else {
            let mut theta_max = f64::INFINITY;
            for p in 0..self.m {
                let a = self.alpha[p];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let j = self.basis[p];
                let delta = dir * a;
                let t = if delta > 0.0 {
                    if self.lo[j].is_finite() {
                        (self.x[j] - self.lo[j] + FEASIBILITY_TOL) / delta
                    } else {
                        continue;
                    }
                } else if self.hi[j].is_finite() {
                    (self.hi[j] - self.x[j] + FEASIBILITY_TOL) / -delta
                } else {
                    continue;
                };
                theta_max = theta_max.min(t);
            }
            if theta_max.is_finite() {
                let mut best_abs = 0.0;
                for p in 0..self.m {
                    let a = self.alpha[p];
                    if a.abs() < PIVOT_TOL {
                        continue;
                    }
                    let j = self.basis[p];
                    let delta = dir * a;
                    let ratio = if delta > 0.0 {
                        if self.lo[j].is_finite() {
                            (self.x[j] - self.lo[j]) / delta
                        } else {
                            continue;
                        }
                    } else if self.hi[j].is_finite() {
                        (self.hi[j] - self.x[j]) / -delta
                    } else {
                        continue;
                    };
                    if ratio <= theta_max && a.abs() > best_abs {
                        best_abs = a.abs();
                        leave = Some((p, ratio.max(0.0)));
                    }
                }
            }
        }

        let flip = match leave {
            Some((_, theta)) => range.is_finite() && range <= theta,
            None => range.is_finite(),
        };
        if leave.is_none() && !flip {
            return Ok(Step::Unbounded);
        }
        let theta = if flip {
            range
        } else {
            leave.expect("leaving row").1
        };

        // Update primal values.
        if theta != 0.0 {
            for p in 0..self.m {
                let a = self.alpha[p];
                if a != 0.0 {
                    let j = self.basis[p];
                    self.x[j] -= theta * dir * a;
                }
            }
        }
        self.iterations += 1;
        if theta < 1e-12 {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }

        if flip {
            if dir > 0.0 {
                self.state[q] = VarState::Upper;
                self.x[q] = self.hi[q];
            } else {
                self.state[q] = VarState::Lower;
                self.x[q] = self.lo[q];
            }
            return Ok(Step::Continue);
        }

        let (p, _) = leave.expect("leaving row");
        self.x[q] += dir * theta;
        let out = self.basis[p];
        if dir * self.alpha[p] > 0.0 {
            self.state[out] = VarState::Lower;
            self.x[out] = self.lo[out];
        } else {
            self.state[out] = VarState::Upper;
            self.x[out] = self.hi[out];
        }
        if !self.x[out].is_finite() {
            self.state[out] = VarState::Free;
            self.x[out] = 0.0;
        }
        self.state[q] = VarState::Basic;
        self.basis[p] = q;
        self.push_eta(p);
        Ok(Step::Continue)
    }

    fn push_eta(&mut self, p: usize) {
        let pivot = self.alpha[p];
        let col: Vec<(usize, f64)> = self
            .alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != p && a.abs() > DROP_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta { pos: p, pivot, col });
    }

    fn refactor(&mut self) -> Result<(), SolveError> {
        for _attempt in 0..self.m.max(1) + 1 {
            let cols: Vec<Vec<(usize, f64)>> =
                self.basis.iter().map(|&j| self.column_vec(j)).collect();
            match factorize(self.m, &cols) {
                Factorization::Ok(lu) => {
                    self.lu = Some(lu);
                    self.etas.clear();
                    self.recompute_basic_values();
                    return Ok(());
                }
                Factorization::Singular {
                    dependent,
                    free_rows,
                } => {
                    for (&pos, &row) in dependent.iter().zip(&free_rows) {
                        let out = self.basis[pos];
                        let slack = self.n + row;
                        self.set_nonbasic_near(out);
                        self.basis[pos] = slack;
                        self.state[slack] = VarState::Basic;
                    }
                }
            }
        }
        Err(self.breakdown("basis repair failed"))
    }

    fn set_nonbasic_near(&mut self, j: usize) {
        let (l, h, v) = (self.lo[j], self.hi[j], self.x[j]);
        if l.is_finite() && (!h.is_finite() || (v - l).abs() <= (h - v).abs()) {
            self.state[j] = VarState::Lower;
            self.x[j] = l;
        } else if h.is_finite() {
            self.state[j] = VarState::Upper;
            self.x[j] = h;
        } else {
            self.state[j] = VarState::Free;
        }
    }

    fn recompute_basic_values(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.num_vars() {
            if self.state[j] != VarState::Basic {
                let xj = self.x[j];
                if xj != 0.0 {
                    let mut entries = Vec::new();
                    self.for_column(j, |i, a| entries.push((i, a)));
                    for (i, a) in entries {
                        rhs[i] -= a * xj;
                    }
                }
            }
        }
        self.work_row.copy_from_slice(&rhs);
        self.ftran_work();
        for p in 0..self.m {
            let j = self.basis[p];
            self.x[j] = self.alpha[p];
        }
    }

    /// Pivots zero-valued artificials out of the basis where a structural or
    /// slack column can replace them.
    fn drive_out_artificials(&mut self) -> Result<(), SolveError> {
        let first_art = self.n + self.m;
        let mut changed = false;
        for p in 0..self.m {
            if self.basis[p] < first_art {
                continue;
            }
            // Row p of B^-1.
            let lu = self.lu.as_ref().expect("factorised");
            self.work_pos.iter_mut().for_each(|v| *v = 0.0);
            self.work_pos[p] = 1.0;
            for eta in self.etas.iter().rev() {
                let mut s = self.work_pos[eta.pos];
                for &(i, a) in &eta.col {
                    s -= a * self.work_pos[i];
                }
                self.work_pos[eta.pos] = s / eta.pivot;
            }
            lu.btran(&mut self.work_pos, &mut self.duals);
            let mut best: Option<(usize, f64)> = None;
            for j in 0..first_art {
                if self.state[j] == VarState::Basic || self.is_fixed(j) {
                    continue;
                }
                let mut v = 0.0;
                self.for_column(j, |i, a| v += self.duals[i] * a);
                if v.abs() > 1e-7 && best.is_none_or(|b| v.abs() > b.1) {
                    best = Some((j, v.abs()));
                }
            }
            if let Some((q, _)) = best {
                self.ftran_column(q);
                let out = self.basis[p];
                self.state[out] = VarState::Lower;
                self.x[out] = 0.0;
                self.state[q] = VarState::Basic;
                self.basis[p] = q;
                self.push_eta(p);
                changed = true;
                if self.etas.len() >= REFACTOR_EVERY {
                    self.refactor()?;
                }
            }
        }
        if changed {
            self.refactor()?;
        }
        Ok(())
    }
}
