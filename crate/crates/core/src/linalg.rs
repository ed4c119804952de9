//! Small dense symmetric linear algebra.
//!
//! Every matrix in this crate is tiny (GLM information matrices up to a
//! handful of parameters, 2x2 quadrature Hessians), so the routines here are
//! plain Cholesky factorizations on `Vec<Vec<f64>>` rather than a linear
//! algebra dependency.

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// Returns `Err(column)` with the offending pivot column when the matrix is
/// not positive definite to working precision.
pub fn cholesky(a: &[Vec<f64>]) -> std::result::Result<Vec<Vec<f64>>, usize> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(j);
        }
        l[j][j] = d.sqrt();
        for i in (j + 1)..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    Ok(l)
}

/// Solves `A x = b` given the Cholesky factor `L` of `A`.
pub fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// `log |A|` from the Cholesky factor of `A`.
pub fn cholesky_log_det(l: &[Vec<f64>]) -> f64 {
    2.0 * l.iter().enumerate().map(|(i, row)| row[i].ln()).sum::<f64>()
}

/// Solves `A x = b` for symmetric positive-definite `A`.
pub fn solve_spd(a: &[Vec<f64>], b: &[f64]) -> std::result::Result<Vec<f64>, usize> {
    let l = cholesky(a)?;
    Ok(cholesky_solve(&l, b))
}

/// Quadratic form `x' A^-1 x` for symmetric positive-definite `A`.
pub fn quad_form_inv(a: &[Vec<f64>], x: &[f64]) -> std::result::Result<f64, usize> {
    let z = solve_spd(a, x)?;
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi * zi).sum())
}

/// Maximum relative asymmetry `|a_ij - a_ji| / max(1, |a_ij|)`.
pub fn max_asymmetry(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let denom = a[i][j].abs().max(1.0);
            worst = worst.max((a[i][j] - a[j][i]).abs() / denom);
        }
    }
    worst
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Numerically stable `log(sum(exp(xs)))`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}
