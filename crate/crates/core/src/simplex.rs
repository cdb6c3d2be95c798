//! Small dense two-phase revised simplex with Bland's rule, specialized to
//! standard-form problems with three equality rows:
//! `min c^T x  s.t.  A x = b, x >= 0` where `A` is `3 x n`.
//!
//! This backs the max-min kernel program, whose dual has exactly the shape
//! above with one column per grid constraint. Bland's rule guarantees
//! termination; at three rows an explicit basis inverse is exact enough that
//! no factorization updates are needed.

use crate::error::{Error, Result};

pub(crate) struct LpSolution {
    pub objective: f64,
    /// Simplex multipliers `y` with `y^T A_j <= c_j` at optimality.
    pub multipliers: [f64; 3],
}

const REDUCED_COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const MAX_ITERS: usize = 200_000;

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut inv = [[0.0; 3]; 3];
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
    Some(inv)
}

fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn vec_mat(v: [f64; 3], m: &[[f64; 3]; 3]) -> [f64; 3] {
    [
        v[0] * m[0][0] + v[1] * m[1][0] + v[2] * m[2][0],
        v[0] * m[0][1] + v[1] * m[1][1] + v[2] * m[2][1],
        v[0] * m[0][2] + v[1] * m[1][2] + v[2] * m[2][2],
    ]
}

/// Columns of the constraint matrix: `column(j)` is `A_j in R^3` for
/// `j < n`; indices `n..n+3` address the phase-1 artificial identity columns.
struct Columns<'a> {
    rows: [&'a [f64]; 3],
    n: usize,
}

impl Columns<'_> {
    fn get(&self, j: usize) -> [f64; 3] {
        if j < self.n {
            [self.rows[0][j], self.rows[1][j], self.rows[2][j]]
        } else {
            let mut e = [0.0; 3];
            e[j - self.n] = 1.0;
            e
        }
    }
}

struct Tableau<'a> {
    cols: Columns<'a>,
    basis: [usize; 3],
}

impl Tableau<'_> {
    fn basis_inverse(&self) -> Result<[[f64; 3]; 3]> {
        let mut b = [[0.0; 3]; 3];
        for (i, &j) in self.basis.iter().enumerate() {
            let col = self.cols.get(j);
            for r in 0..3 {
                b[r][i] = col[r];
            }
        }
        invert3(&b).ok_or(Error::Lp("singular basis"))
    }

    /// One phase of Bland-rule simplex over the candidate column set.
    /// `costs(j)` must be defined for every candidate and basis column.
    fn run(
        &mut self,
        candidates: &[usize],
        costs: impl Fn(usize) -> f64,
        rhs: [f64; 3],
    ) -> Result<(f64, [f64; 3])> {
        for _ in 0..MAX_ITERS {
            let inv = self.basis_inverse()?;
            let x_b = mat_vec(&inv, rhs);
            let c_b = [
                costs(self.basis[0]),
                costs(self.basis[1]),
                costs(self.basis[2]),
            ];
            let y = vec_mat(c_b, &inv);

            // Bland: entering column is the smallest index with a negative
            // reduced cost.
            let mut entering = None;
            for &j in candidates {
                if self.basis.contains(&j) {
                    continue;
                }
                let a = self.cols.get(j);
                let reduced = costs(j) - (y[0] * a[0] + y[1] * a[1] + y[2] * a[2]);
                if reduced < -REDUCED_COST_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j_in) = entering else {
                let objective = c_b[0] * x_b[0] + c_b[1] * x_b[1] + c_b[2] * x_b[2];
                return Ok((objective, y));
            };

            let d = mat_vec(&inv, self.cols.get(j_in));
            // Bland: among minimum-ratio rows, leave with the smallest basis
            // variable index.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..3 {
                if d[i] > PIVOT_TOL {
                    let ratio = x_b[i] / d[i];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((best_i, best)) => {
                            if ratio < best - 1e-12
                                || (ratio < best + 1e-12 && self.basis[i] < self.basis[best_i])
                            {
                                Some((i, ratio))
                            } else {
                                Some((best_i, best))
                            }
                        }
                    };
                }
            }
            let Some((i_out, _)) = leave else {
                return Err(Error::Lp("unbounded"));
            };
            self.basis[i_out] = j_in;
        }
        Err(Error::Lp("iteration limit"))
    }
}

/// Solve `min c^T x  s.t.  A x = b, x >= 0` with `A` given by three dense rows.
/// Returns the optimal objective and the simplex multipliers.
pub(crate) fn solve_standard_form(
    rows: [&[f64]; 3],
    b: [f64; 3],
    costs: &[f64],
) -> Result<LpSolution> {
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) || costs.len() != n {
        return Err(Error::Lp("shape mismatch"));
    }
    debug_assert!(b.iter().all(|v| *v >= 0.0), "rhs must be nonnegative");

    let cols = Columns { rows, n };
    let mut tab = Tableau { cols, basis: [n, n + 1, n + 2] };

    // Phase 1: drive the artificial variables out.
    let candidates: Vec<usize> = (0..n).collect();
    let phase1_cost = |j: usize| if j >= n { 1.0 } else { 0.0 };
    let (infeas, _) = tab.run(&candidates, phase1_cost, b)?;
    if infeas > 1e-7 {
        return Err(Error::Lp("infeasible"));
    }

    // Pivot any leftover zero-level artificial out of the basis.
    for i in 0..3 {
        if tab.basis[i] >= n {
            let inv = tab.basis_inverse()?;
            let replacement = (0..n).find(|&j| {
                !tab.basis.contains(&j) && mat_vec(&inv, tab.cols.get(j))[i].abs() > 1e-9
            });
            match replacement {
                Some(j) => tab.basis[i] = j,
                None => return Err(Error::Lp("degenerate rows")),
            }
        }
    }

    // Phase 2 over the real columns only.
    let phase2_cost = |j: usize| if j < n { costs[j] } else { f64::INFINITY };
    let (objective, multipliers) = tab.run(&candidates, phase2_cost, b)?;
    Ok(LpSolution { objective, multipliers })
}
