//! Sparse LU factorisation of a simplex basis.
//!
//! Right-looking Gaussian elimination with singleton detection and a
//! threshold Markowitz fallback. Bases arising from flow problems are close
//! to triangular, so nearly every pivot is a singleton and fill stays small.

const ABS_PIVOT_TOL: f64 = 1e-11;
const REL_PIVOT_TOL: f64 = 0.1;
const SINGLETON_REL_TOL: f64 = 0.01;

#[derive(Debug, Clone)]
pub(crate) struct LuFactors {
    piv_row: Vec<usize>,
    piv_col: Vec<usize>,
    diag: Vec<f64>,
    /// Per pivot: `(row, multiplier)` of the eliminated entries.
    l_cols: Vec<Vec<(usize, f64)>>,
    /// Per pivot: off-diagonal entries of the pivot row, by basis position.
    u_rows: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug)]
pub(crate) enum Factorization {
    Ok(LuFactors),
    /// Basis positions that could not be pivoted, and the rows left without
    /// a pivot. Both lists have equal length.
    Singular {
        dependent: Vec<usize>,
        free_rows: Vec<usize>,
    },
}

pub(crate) fn factorize(m: usize, cols: &[Vec<(usize, f64)>]) -> Factorization {
    debug_assert_eq!(cols.len(), m);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut col_pat: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (j, col) in cols.iter().enumerate() {
        for &(i, v) in col {
            if v != 0.0 {
                rows[i].push((j, v));
                col_pat[j].push(i);
            }
        }
    }
    let mut col_cnt: Vec<usize> = col_pat.iter().map(Vec::len).collect();
    let mut row_active = vec![true; m];
    let mut col_active = vec![true; m];
    let mut col_single: Vec<usize> = (0..m).rev().filter(|&j| col_cnt[j] == 1).collect();
    let mut row_single: Vec<usize> = (0..m).rev().filter(|&i| rows[i].len() == 1).collect();
    let mut work_pos = vec![usize::MAX; m];

    let mut f = LuFactors {
        piv_row: Vec::with_capacity(m),
        piv_col: Vec::with_capacity(m),
        diag: Vec::with_capacity(m),
        l_cols: Vec::with_capacity(m),
        u_rows: Vec::with_capacity(m),
    };
    let mut dependent = Vec::new();

    for j in 0..m {
        if col_cnt[j] == 0 {
            col_active[j] = false;
            dependent.push(j);
        }
    }

    let entry = |rows: &Vec<Vec<(usize, f64)>>, i: usize, j: usize| -> Option<f64> {
        rows[i].iter().find(|e| e.0 == j).map(|e| e.1)
    };

    loop {
        if f.piv_row.len() + dependent.len() >= m {
            break;
        }
        let mut chosen: Option<(usize, usize)> = None;

        while let Some(c) = col_single.pop() {
            if !col_active[c] || col_cnt[c] != 1 {
                continue;
            }
            let r = match col_pat[c].iter().copied().find(|&i| row_active[i]) {
                Some(r) => r,
                None => continue,
            };
            if entry(&rows, r, c).is_some_and(|v| v.abs() > ABS_PIVOT_TOL) {
                chosen = Some((r, c));
                break;
            }
        }

        if chosen.is_none() {
            while let Some(r) = row_single.pop() {
                if !row_active[r] || rows[r].len() != 1 {
                    continue;
                }
                let (c, v) = rows[r][0];
                let col_max = col_pat[c]
                    .iter()
                    .filter(|&&i| row_active[i])
                    .filter_map(|&i| entry(&rows, i, c))
                    .fold(0.0f64, |a, b| a.max(b.abs()));
                if v.abs() > ABS_PIVOT_TOL && v.abs() >= SINGLETON_REL_TOL * col_max {
                    chosen = Some((r, c));
                    break;
                }
            }
        }

        if chosen.is_none() {
            // Markowitz search over the sparsest active columns.
            let mut best_counts: Vec<(usize, usize)> = Vec::new();
            for j in 0..m {
                if col_active[j] {
                    best_counts.push((col_cnt[j], j));
                }
            }
            if best_counts.is_empty() {
                break;
            }
            best_counts.sort_unstable();
            let mut best: Option<(usize, usize, usize)> = None;
            for &(cnt, c) in best_counts.iter().take(4) {
                let vals: Vec<(usize, f64)> = col_pat[c]
                    .iter()
                    .filter(|&&i| row_active[i])
                    .filter_map(|&i| entry(&rows, i, c).map(|v| (i, v)))
                    .collect();
                let col_max = vals.iter().fold(0.0f64, |a, e| a.max(e.1.abs()));
                if col_max <= ABS_PIVOT_TOL {
                    continue;
                }
                for &(i, v) in &vals {
                    if v.abs() >= REL_PIVOT_TOL * col_max {
                        let cost = (rows[i].len() - 1) * (cnt.max(1) - 1);
                        if best.is_none_or(|b| cost < b.0) {
                            best = Some((cost, i, c));
                        }
                    }
                }
            }
            match best {
                Some((_, r, c)) => chosen = Some((r, c)),
                None => {
                    // All candidate columns are numerically empty.
                    for &(_, c) in best_counts.iter().take(4) {
                        let vals_max = col_pat[c]
                            .iter()
                            .filter(|&&i| row_active[i])
                            .filter_map(|&i| entry(&rows, i, c))
                            .fold(0.0f64, |a, b| a.max(b.abs()));
                        if vals_max <= ABS_PIVOT_TOL {
                            col_active[c] = false;
                            dependent.push(c);
                            for &i in &col_pat[c] {
                                if row_active[i] {
                                    rows[i].retain(|e| e.0 != c);
                                    if rows[i].len() == 1 {
                                        row_single.push(i);
                                    }
                                }
                            }
                        }
                    }
                    continue;
                }
            }
        }

        let (r, c) = chosen.expect("pivot chosen");
        let pivot_val = entry(&rows, r, c).expect("pivot entry");
        let urow: Vec<(usize, f64)> = rows[r].iter().copied().filter(|e| e.0 != c).collect();
        let mut lcol = Vec::new();
        let pattern = std::mem::take(&mut col_pat[c]);
        for &i in &pattern {
            if i == r || !row_active[i] {
                continue;
            }
            let idx = match rows[i].iter().position(|e| e.0 == c) {
                Some(idx) => idx,
                None => continue,
            };
            let a_ic = rows[i].swap_remove(idx).1;
            let l = a_ic / pivot_val;
            lcol.push((i, l));
            for (p, e) in rows[i].iter().enumerate() {
                work_pos[e.0] = p;
            }
            for &(j, u) in &urow {
                match work_pos[j] {
                    usize::MAX => {
                        rows[i].push((j, -l * u));
                        col_pat[j].push(i);
                        col_cnt[j] += 1;
                    }
                    p => rows[i][p].1 -= l * u,
                }
            }
            for e in &rows[i] {
                work_pos[e.0] = usize::MAX;
            }
            if rows[i].len() == 1 {
                row_single.push(i);
            }
        }
        col_pat[c] = pattern;
        row_active[r] = false;
        col_active[c] = false;
        for &(j, _) in &urow {
            col_cnt[j] -= 1;
            if col_cnt[j] == 1 {
                col_single.push(j);
            }
        }
        rows[r].clear();
        f.piv_row.push(r);
        f.piv_col.push(c);
        f.diag.push(pivot_val);
        f.l_cols.push(lcol);
        f.u_rows.push(urow);
    }

    if dependent.is_empty() && f.piv_row.len() == m {
        Factorization::Ok(f)
    } else {
        let free_rows: Vec<usize> = (0..m).filter(|&i| row_active[i]).collect();
        let mut dependent = dependent;
        dependent.extend((0..m).filter(|&j| col_active[j]));
        dependent.truncate(free_rows.len());
        Factorization::Singular {
            dependent,
            free_rows,
        }
    }
}

impl LuFactors {
    /// Solves `B x = b`. `b` is indexed by row and is overwritten; the
    /// solution is written by basis position into `x`.
    pub(crate) fn ftran(&self, b: &mut [f64], x: &mut [f64]) {
        for k in 0..self.piv_row.len() {
            let br = b[self.piv_row[k]];
            if br != 0.0 {
                for &(i, l) in &self.l_cols[k] {
                    b[i] -= l * br;
                }
            }
        }
        for k in (0..self.piv_row.len()).rev() {
            let mut s = b[self.piv_row[k]];
            for &(j, u) in &self.u_rows[k] {
                s -= u * x[j];
            }
            x[self.piv_col[k]] = s / self.diag[k];
        }
    }

    /// Solves `y' B = c'`. `c` is indexed by basis position and is
    /// overwritten; `y` is written by row.
    pub(crate) fn btran(&self, c: &mut [f64], y: &mut [f64]) {
        for k in 0..self.piv_row.len() {
            let w = c[self.piv_col[k]] / self.diag[k];
            y[self.piv_row[k]] = w;
            if w != 0.0 {
                for &(j, u) in &self.u_rows[k] {
                    c[j] -= w * u;
                }
            }
        }
        for k in (0..self.piv_row.len()).rev() {
            let mut s = 0.0;
            for &(i, l) in &self.l_cols[k] {
                s += l * y[i];
            }
            if s != 0.0 {
                y[self.piv_row[k]] -= s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(cols: &[Vec<(usize, f64)>], x: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (j, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                out[i] += v * x[j];
            }
        }
        out
    }

    fn random_basis(m: usize, seed: u64) -> Vec<Vec<(usize, f64)>> {
        // Diagonally dominant sparse matrix with a few off-diagonal entries.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        (0..m)
            .map(|j| {
                let mut col = vec![(j, 4.0 + (next() % 5) as f64)];
                for _ in 0..2 {
                    let i = next() % m;
                    if i != j && !col.iter().any(|e| e.0 == i) {
                        col.push((i, (next() % 7) as f64 - 3.0));
                    }
                }
                col
            })
            .collect()
    }

    #[test]
    fn ftran_and_btran_invert_the_basis() {
        for seed in 0..20 {
            let m = 30;
            let cols = random_basis(m, seed);
            let lu = match factorize(m, &cols) {
                Factorization::Ok(lu) => lu,
                Factorization::Singular { .. } => continue,
            };
            let b: Vec<f64> = (0..m).map(|i| (i as f64) - 7.5).collect();
            let mut work = b.clone();
            let mut x = vec![0.0; m];
            lu.ftran(&mut work, &mut x);
            let back = dense_mul(&cols, &x, m);
            for i in 0..m {
                assert!((back[i] - b[i]).abs() < 1e-9, "seed {seed} row {i}");
            }

            let c: Vec<f64> = (0..m).map(|j| ((j * 7) % 5) as f64 - 2.0).collect();
            let mut work = c.clone();
            let mut y = vec![0.0; m];
            lu.btran(&mut work, &mut y);
            for (j, col) in cols.iter().enumerate() {
                let dot: f64 = col.iter().map(|&(i, v)| v * y[i]).sum();
                assert!((dot - c[j]).abs() < 1e-9, "seed {seed} col {j}");
            }
        }
    }

    #[test]
    fn detects_dependent_columns() {
        let cols = vec![
            vec![(0, 1.0), (1, 1.0)],
            vec![(0, 2.0), (1, 2.0)],
            vec![(2, 1.0)],
        ];
        match factorize(3, &cols) {
            Factorization::Singular {
                dependent,
                free_rows,
            } => {
                assert_eq!(dependent.len(), 1);
                assert_eq!(free_rows.len(), 1);
            }
            Factorization::Ok(_) => panic!("expected singular"),
        }
    }

    #[test]
    fn permutation_matrix_is_all_singletons() {
        let m = 5;
        let cols: Vec<Vec<(usize, f64)>> = (0..m).map(|j| vec![((j + 2) % m, 1.0)]).collect();
        let lu = match factorize(m, &cols) {
            Factorization::Ok(lu) => lu,
            _ => panic!(),
        };
        let nnz: usize = lu.l_cols.iter().map(Vec::len).sum::<usize>()
            + lu.u_rows.iter().map(Vec::len).sum::<usize>();
        assert_eq!(nnz, 0);
    }
}
