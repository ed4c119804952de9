//! Dense two-phase simplex for box-constrained minimization problems
//!
//! ```text
//! minimize c'x   subject to  G x >= h,  0 <= x <= 1
//! ```
//!
//! which is the exact shape of the preference-system programs in [`crate::gsd`].
//! The tableau is dense; pricing is Dantzig's rule with a permanent switch to
//! Bland's rule once a long degenerate streak suggests cycling. After one
//! two-phase solve, further objectives over the same constraints re-use the
//! optimal basis: the reduced-cost row is rebuilt from the maintained
//! `B^-1 A` body and phase 2 resumes, which keeps sweeps of pairwise
//! dominance objectives cheap.

use crate::error::{Error, Result};

const PRICE_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;
const DEGENERATE_STREAK: usize = 200;

/// One `sum coef * x >= rhs` row, dense coefficients.
#[derive(Debug, Clone)]
pub struct LpRow {
    pub coefs: Vec<f64>,
    pub rhs: f64,
}

/// `minimize c'x : rows hold, x in [0,1]^n`. The objective is supplied to
/// [`TwoPhaseSimplex::minimize`], so one problem can serve many objectives.
#[derive(Debug, Clone)]
pub struct BoxedLp {
    pub n_vars: usize,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
}

pub struct TwoPhaseSimplex {
    /// `m x (n_total + 1)` tableau, RHS in the last column.
    tab: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_structural: usize,
    n_total: usize,
    art_start: usize,
}

impl TwoPhaseSimplex {
    /// Builds the tableau and runs phase 1. Errors if the constraints are
    /// infeasible or phase 1 fails numerically.
    pub fn new(lp: &BoxedLp) -> Result<Self> {
        let n = lp.n_vars;
        for (i, row) in lp.rows.iter().enumerate() {
            if row.coefs.len() != n {
                return Err(Error::Lp(format!("row {i} arity mismatch")));
            }
        }
        let m_ub = n;
        let m_ge = lp.rows.len();
        let m = m_ub + m_ge;
        // columns: structural | ub slacks | surpluses | artificials | rhs
        let surplus_start = n + m_ub;
        let art_start = surplus_start + m_ge;

        // count artificials: one per >= row whose (sign-normalized) surplus
        // cannot serve as the initial basic variable
        let needs_art: Vec<bool> = lp.rows.iter().map(|r| r.rhs >= 0.0).collect();
        let n_art = needs_art.iter().filter(|&&b| b).count();
        let n_total = art_start + n_art;

        let mut tab = vec![vec![0.0; n_total + 1]; m];
        let mut basis = vec![0usize; m];

        // upper bound rows: x_j + s_j = 1
        for j in 0..n {
            tab[j][j] = 1.0;
            tab[j][n + j] = 1.0;
            tab[j][n_total] = 1.0;
            basis[j] = n + j;
        }
        // >= rows
        let mut art = art_start;
        for (i, row) in lp.rows.iter().enumerate() {
            let r = m_ub + i;
            if row.rhs < 0.0 {
                // negate: -coefs x + t = -rhs, surplus is basic
                for (j, &c) in row.coefs.iter().enumerate() {
                    tab[r][j] = -c;
                }
                tab[r][surplus_start + i] = 1.0;
                tab[r][n_total] = -row.rhs;
                basis[r] = surplus_start + i;
            } else {
                // coefs x - t + a = rhs, artificial is basic
                for (j, &c) in row.coefs.iter().enumerate() {
                    tab[r][j] = c;
                }
                tab[r][surplus_start + i] = -1.0;
                tab[r][art] = 1.0;
                tab[r][n_total] = row.rhs;
                basis[r] = art;
                art += 1;
            }
        }

        let mut solver = TwoPhaseSimplex {
            tab,
            basis,
            n_structural: n,
            n_total,
            art_start,
        };

        if n_art > 0 {
            // phase 1: minimize the sum of artificials
            let mut c1 = vec![0.0; n_total];
            for j in art_start..n_total {
                c1[j] = 1.0;
            }
            let obj = solver.run(&c1, false)?;
            if obj > 1e-7 {
                return Err(Error::Lp(format!(
                    "infeasible constraint system (phase-1 objective {obj:.3e})"
                )));
            }
            solver.evict_artificials()?;
        }
        Ok(solver)
    }

    /// Minimizes a structural objective over the feasible region, warm
    /// starting from the current basis.
    pub fn minimize(&mut self, c: &[f64]) -> Result<LpSolution> {
        if c.len() != self.n_structural {
            return Err(Error::Lp("objective arity mismatch".into()));
        }
        let mut full = vec![0.0; self.n_total];
        full[..self.n_structural].copy_from_slice(c);
        let objective = self.run(&full, true)?;
        Ok(LpSolution {
            objective,
            x: self.structural_values(),
        })
    }

    pub fn structural_values(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_structural {
                x[b] = self.tab[i][self.n_total];
            }
        }
        x
    }

    /// Pivots any basic artificial out of the basis (it must sit at zero
    /// after a successful phase 1); a row with no eligible pivot column is
    /// redundant and gets cleared.
    fn evict_artificials(&mut self) -> Result<()> {
        let m = self.tab.len();
        for i in 0..m {
            if self.basis[i] >= self.art_start {
                let pivot_col = (0..self.art_start).find(|&j| self.tab[i][j].abs() > PIVOT_TOL);
                match pivot_col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        // redundant row: zero it so it can never bind
                        for v in self.tab[i].iter_mut() {
                            *v = 0.0;
                        }
                    }
                }
            }
        }
        // artificials never re-enter: zero their columns
        for row in self.tab.iter_mut() {
            for j in self.art_start..self.n_total {
                row[j] = 0.0;
            }
        }
        Ok(())
    }

    /// Primal simplex from the current (feasible) basis. Returns the optimal
    /// objective value. `exclude_artificials` bars artificial columns from
    /// entering (phase 2).
    fn run(&mut self, c: &[f64], exclude_artificials: bool) -> Result<f64> {
        let m = self.tab.len();
        let n_total = self.n_total;
        let rhs_col = n_total;
        let enter_limit = if exclude_artificials {
            self.art_start
        } else {
            n_total
        };

        let mut cost = vec![0.0; n_total + 1];
        let rebuild = |tab: &Vec<Vec<f64>>, basis: &Vec<usize>, cost: &mut Vec<f64>| {
            // reduced costs z_j - c_j stored negated: cost[j] = c_j - c_B' B^-1 A_j
            for j in 0..=n_total {
                let mut acc = 0.0;
                for (i, &b) in basis.iter().enumerate() {
                    if c[b] != 0.0 {
                        acc += c[b] * tab[i][j];
                    }
                }
                cost[j] = if j < n_total { c[j] - acc } else { -acc };
            }
        };
        rebuild(&self.tab, &self.basis, &mut cost);

        let mut bland = false;
        let mut stall = 0usize;
        let max_iter = 400 * (m + n_total) + 20_000;
        for _ in 0..max_iter {
            // entering column
            let mut enter: Option<usize> = None;
            if bland {
                for (j, &cj) in cost.iter().enumerate().take(enter_limit) {
                    if cj < -PRICE_TOL {
                        enter = Some(j);
                        break;
                    }
                }
            } else {
                let mut best = -PRICE_TOL;
                for (j, &cj) in cost.iter().enumerate().take(enter_limit) {
                    if cj < best {
                        best = cj;
                        enter = Some(j);
                    }
                }
            }
            let Some(enter) = enter else {
                return Ok(-cost[rhs_col]);
            };

            // ratio test
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..m {
                let a = self.tab[i][enter];
                if a > PIVOT_TOL {
                    let ratio = self.tab[i][rhs_col] / a;
                    let better = ratio < best_ratio - 1e-12
                        || (ratio < best_ratio + 1e-12
                            && leave.map_or(true, |l| {
                                if bland {
                                    self.basis[i] < self.basis[l]
                                } else {
                                    i < l
                                }
                            }));
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(leave) = leave else {
                return Err(Error::Lp("unbounded objective (should not happen in [0,1] box)".into()));
            };

            if best_ratio < 1e-12 {
                stall += 1;
                if stall > DEGENERATE_STREAK && !bland {
                    bland = true;
                }
            } else {
                stall = 0;
            }

            self.pivot(leave, enter);
            // incremental cost row update
            let piv_cost = cost[enter];
            if piv_cost != 0.0 {
                let row = &self.tab[leave];
                for j in 0..=n_total {
                    cost[j] -= piv_cost * row[j];
                }
                cost[enter] = 0.0;
            }
        }
        Err(Error::Lp("iteration cap exceeded after Bland's-rule fallback".into()))
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let m = self.tab.len();
        let piv = self.tab[row][col];
        let inv = 1.0 / piv;
        for v in self.tab[row].iter_mut() {
            *v *= inv;
        }
        for i in 0..m {
            if i != row {
                let factor = self.tab[i][col];
                if factor != 0.0 {
                    // split borrow: copy the pivot row values on the fly
                    let (pivot_row, target_row) = if i < row {
                        let (a, b) = self.tab.split_at_mut(row);
                        (&b[0], &mut a[i])
                    } else {
                        let (a, b) = self.tab.split_at_mut(i);
                        (&a[row], &mut b[0])
                    };
                    for (t, p) in target_row.iter_mut().zip(pivot_row.iter()) {
                        *t -= factor * p;
                    }
                }
            }
        }
        self.basis[row] = col;
    }
}

/// Convenience wrapper: one objective, one solve.
pub fn solve_boxed_lp(lp: &BoxedLp, c: &[f64]) -> Result<LpSolution> {
    TwoPhaseSimplex::new(lp)?.minimize(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn box_only_minimum_sits_at_lower_bound() {
        let lp = BoxedLp {
            n_vars: 1,
            rows: vec![],
        };
        let sol = solve_boxed_lp(&lp, &[1.0]).unwrap();
        assert!(sol.objective.abs() < 1e-9);
        assert!(sol.x[0].abs() < 1e-9);
        // maximize by negating: lands at the upper bound
        let sol = solve_boxed_lp(&lp, &[-1.0]).unwrap();
        assert!((sol.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_variable_hand_lp() {
        // minimize x0 - x1 subject to x0 >= x1 (i.e. x0 - x1 >= 0), box [0,1]
        // optimum: x0 = x1 -> objective 0
        let lp = BoxedLp {
            n_vars: 2,
            rows: vec![LpRow {
                coefs: vec![1.0, -1.0],
                rhs: 0.0,
            }],
        };
        let sol = solve_boxed_lp(&lp, &[1.0, -1.0]).unwrap();
        assert!(sol.objective.abs() < 1e-9, "{}", sol.objective);

        // minimize -x0 - x1 with x0 + x1 >= 0.5: optimum -2 at (1, 1)
        let lp = BoxedLp {
            n_vars: 2,
            rows: vec![LpRow {
                coefs: vec![1.0, 1.0],
                rhs: 0.5,
            }],
        };
        let sol = solve_boxed_lp(&lp, &[-1.0, -1.0]).unwrap();
        assert!((sol.objective + 2.0).abs() < 1e-9);
        assert!((sol.x[0] - 1.0).abs() < 1e-9 && (sol.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn margin_chain_is_respected() {
        // x2 >= x1 + 0.3, x1 >= x0 + 0.3; minimize x2 -> 0.6 at (0, .3, .6)
        let lp = BoxedLp {
            n_vars: 3,
            rows: vec![
                LpRow {
                    coefs: vec![0.0, -1.0, 1.0],
                    rhs: 0.3,
                },
                LpRow {
                    coefs: vec![-1.0, 1.0, 0.0],
                    rhs: 0.3,
                },
            ],
        };
        let sol = solve_boxed_lp(&lp, &[0.0, 0.0, 1.0]).unwrap();
        assert!((sol.objective - 0.6).abs() < 1e-9);
    }

    #[test]
    fn infeasible_system_is_reported() {
        // x0 >= 0.7 and -x0 >= -0.2 (x0 <= 0.2) cannot both hold
        let lp = BoxedLp {
            n_vars: 1,
            rows: vec![
                LpRow {
                    coefs: vec![1.0],
                    rhs: 0.7,
                },
                LpRow {
                    coefs: vec![-1.0],
                    rhs: -0.2,
                },
            ],
        };
        assert!(TwoPhaseSimplex::new(&lp).is_err());
    }

    #[test]
    fn warm_restarts_match_cold_solves() {
        let mut rng = Rng::new(17);
        for _ in 0..10 {
            let n = 4 + rng.next_below(4);
            let n_rows = 3 + rng.next_below(5);
            let rows: Vec<LpRow> = (0..n_rows)
                .map(|_| LpRow {
                    coefs: (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect(),
                    rhs: rng.next_f64() * 0.5 - 0.4,
                })
                .collect();
            let lp = BoxedLp { n_vars: n, rows };
            let Ok(mut solver) = TwoPhaseSimplex::new(&lp) else {
                continue; // random system happened to be infeasible
            };
            for _ in 0..4 {
                let c: Vec<f64> = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
                let warm = solver.minimize(&c).unwrap();
                let cold = solve_boxed_lp(&lp, &c).unwrap();
                assert!(
                    (warm.objective - cold.objective).abs() < 1e-7,
                    "warm {} cold {}",
                    warm.objective,
                    cold.objective
                );
            }
        }
    }

    #[test]
    fn random_monotone_systems_are_feasible() {
        // systems of the gsd shape (monotonicity rows with zero margins)
        // always admit constants; the solver must agree on 100 instances
        let mut rng = Rng::new(23);
        for _ in 0..100 {
            let n = 3 + rng.next_below(6);
            let mut rows = Vec::new();
            for _ in 0..(n * 2) {
                let a = rng.next_below(n);
                let b = rng.next_below(n);
                if a == b {
                    continue;
                }
                let mut coefs = vec![0.0; n];
                coefs[a] = 1.0;
                coefs[b] = -1.0;
                rows.push(LpRow { coefs, rhs: 0.0 });
            }
            let lp = BoxedLp { n_vars: n, rows };
            let solver = TwoPhaseSimplex::new(&lp);
            assert!(solver.is_ok());
        }
    }
}
