//! Polynomial root finding through companion-matrix eigenvalues.
//!
//! Coefficients are always given in descending order, `c[0] x^n + ... + c[n]`.

use nalgebra::{Complex, DMatrix};

/// Horner evaluation.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Value and first derivative in one Horner pass.
pub fn eval_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// All complex roots of the polynomial, leading zeros stripped.
///
/// Uses the eigenvalues of the Frobenius companion matrix of the monic
/// polynomial. Returns an empty vector for constant polynomials.
pub fn companion_roots(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let start = coeffs.iter().position(|&c| c != 0.0);
    let Some(start) = start else {
        return Vec::new();
    };
    let c = &coeffs[start..];
    let degree = c.len() - 1;
    match degree {
        0 => Vec::new(),
        1 => vec![Complex::new(-c[1] / c[0], 0.0)],
        _ => {
            let mut companion = DMatrix::<f64>::zeros(degree, degree);
            for j in 0..degree {
                companion[(0, j)] = -c[j + 1] / c[0];
            }
            for i in 1..degree {
                companion[(i, i - 1)] = 1.0;
            }
            companion.complex_eigenvalues().iter().copied().collect()
        }
    }
}

/// Newton refinement of a real root. Stops as soon as an iterate fails to
/// reduce the residual, so a well-converged input is returned unchanged.
pub fn polish_real_root(coeffs: &[f64], mut x: f64) -> f64 {
    let mut best = eval(coeffs, x).abs();
    for _ in 0..8 {
        let (p, dp) = eval_with_derivative(coeffs, x);
        if p == 0.0 || dp == 0.0 {
            break;
        }
        let next = x - p / dp;
        let res = eval(coeffs, next).abs();
        if !(res < best) {
            break;
        }
        best = res;
        x = next;
    }
    x
}
