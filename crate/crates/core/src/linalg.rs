//! Small dense helpers: Cholesky factorization and least squares through the
//! normal equations.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky<S: Scalar>(a: ArrayView2<'_, S>) -> Result<Array2<S>> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(Error::Shape(format!("cholesky of a {}x{} matrix", p, a.ncols())));
    }
    let scale = (0..p).map(|i| a[[i, i]].abs()).fold(S::zero(), S::max);
    let floor = scale * S::epsilon() * S::lit(p as f64 * 16.0);
    let mut l = Array2::<S>::zeros((p, p));
    for i in 0..p {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s = s - l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if s <= floor {
                    return Err(Error::Numeric(format!(
                        "matrix is singular or not positive definite (pivot {} at {i})",
                        s
                    )));
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the lower factor `L`.
pub fn cholesky_solve<S: Scalar>(l: ArrayView2<'_, S>, b: ArrayView1<'_, S>) -> Array1<S> {
    let p = l.nrows();
    let mut y = Array1::<S>::zeros(p);
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    let mut x = Array1::<S>::zeros(p);
    for i in (0..p).rev() {
        let mut s = y[i];
        for k in i + 1..p {
            s = s - l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Ordinary least squares without intercept.
pub fn least_squares<S: Scalar>(x: ArrayView2<'_, S>, y: ArrayView1<'_, S>) -> Result<Array1<S>> {
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!("X has {} rows, y has {}", x.nrows(), y.len())));
    }
    if x.ncols() == 0 {
        return Ok(Array1::zeros(0));
    }
    let xtx = x.t().dot(&x);
    let xty = x.t().dot(&y);
    let l = cholesky(xtx.view())?;
    Ok(cholesky_solve(l.view(), xty.view()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn solves_spd_system() {
        let a: Array2<f64> = array![[4.0, 2.0, 0.6], [2.0, 5.0, 1.0], [0.6, 1.0, 3.0]];
        let b = array![1.0, -2.0, 0.5];
        let l = cholesky(a.view()).unwrap();
        let x = cholesky_solve(l.view(), b.view());
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn singular_design_is_rejected() {
        let x = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let y = array![1.0, 2.0, 3.0];
        assert!(matches!(least_squares(x.view(), y.view()), Err(Error::Numeric(_))));
    }

    #[test]
    fn exact_fit_recovered() {
        let x: Array2<f64> = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, -1.0]];
        let y = x.dot(&array![0.5, -1.5]);
        let b = least_squares(x.view(), y.view()).unwrap();
        assert!((b[0] - 0.5).abs() < 1e-12 && (b[1] + 1.5).abs() < 1e-12);
    }
}
