//! Dense complex linear algebra: LAPACK-backed eigen/singular value solves
//! and a Padé scaling-and-squaring matrix exponential.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, EigVals, Inverse, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn norm_one(a: &Array2<Complex64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn frobenius(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `||AA* - A*A||_F / ||A||_F²`, zero for normal matrices.
pub fn non_normality(a: &Array2<Complex64>) -> f64 {
    let ah = a.t().mapv(|z| z.conj());
    let comm = a.dot(&ah) - ah.dot(a);
    let f = frobenius(a);
    if f == 0.0 {
        0.0
    } else {
        frobenius(&comm) / (f * f)
    }
}

fn eigensolver_error(a: &Array2<Complex64>, message: String) -> Error {
    Error::Eigensolver {
        message,
        dim: a.nrows(),
        norm_one: norm_one(a),
        non_normality: non_normality(a),
    }
}

pub fn eigenvalues(a: &Array2<Complex64>) -> Result<Array1<Complex64>> {
    a.eigvals().map_err(|e| eigensolver_error(a, e.to_string()))
}

/// Eigenvalues and right eigenvectors (as columns).
pub fn eigenpairs(a: &Array2<Complex64>) -> Result<(Array1<Complex64>, Array2<Complex64>)> {
    a.eig().map_err(|e| eigensolver_error(a, e.to_string()))
}

pub fn singular_values(a: &Array2<Complex64>) -> Result<Array1<f64>> {
    let (_, s, _) = a
        .svd(false, false)
        .map_err(|e| Error::Linalg(format!("singular value solve failed: {e}")))?;
    Ok(s)
}

pub fn largest_singular_value(a: &Array2<Complex64>) -> Result<f64> {
    Ok(singular_values(a)?.iter().copied().fold(0.0, f64::max))
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm bound below which the degree-13 Padé approximant is accurate to unit roundoff.
const THETA13: f64 = 5.371920351148152;

/// `exp(A)` by scaling and squaring with a [13/13] Padé approximant.
pub fn expm(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Contract(format!("expm of a non-square {}x{} matrix", n, a.ncols())));
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Domain("expm of a matrix with non-finite entries".into()));
    }
    let norm = norm_one(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * Complex64::new(2f64.powi(-squarings), 0.0);

    let b = |i: usize| Complex64::new(PADE13[i], 0.0);
    let ident = Array2::<Complex64>::eye(n);
    let a2 = scaled.dot(&scaled);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let inner_u = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = scaled.dot(&(a6.dot(&inner_u) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1)));
    let inner_v = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = a6.dot(&inner_v) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);

    let denom = (&v - &u)
        .inv()
        .map_err(|e| Error::Linalg(format!("Padé denominator is singular: {e}")))?;
    let mut r = denom.dot(&(&v + &u));
    for _ in 0..squarings {
        r = r.dot(&r);
        if r.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Divergence("matrix exponential overflowed".into()));
        }
    }
    if r.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Divergence("matrix exponential overflowed".into()));
    }
    Ok(r)
}
