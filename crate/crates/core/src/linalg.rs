//! Small dense helpers on top of nalgebra for complex Hermitian matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_real(a: &RMatrix) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `max |A - A^H|` over entries.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Relative Hermitian check: `‖A − A^H‖_max ≤ tol·max(‖A‖_max, tiny)`.
pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && hermitian_defect(a) <= tol * max_abs(a).max(f64::MIN_POSITIVE)
}

/// `(A + A^H)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).map(|z| z * 0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let h = hermitian_part(a);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

pub fn max_diag_re(a: &CMatrix) -> f64 {
    a.diagonal().iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re))
}

/// Inverse of a square complex matrix, `None` if singular.
pub fn inverse(a: &CMatrix) -> Option<CMatrix> {
    a.clone().try_inverse()
}

/// 2-norm condition number via singular values.
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().fold(0.0_f64, |m, &s| m.max(s));
    let min = sv.iter().fold(f64::INFINITY, |m, &s| m.min(s));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `log det` of a Hermitian positive-definite matrix; `None` if not PD.
pub fn hermitian_logdet(a: &CMatrix) -> Option<f64> {
    let chol = hermitian_part(a).cholesky()?;
    Some(chol.l().diagonal().iter().map(|z| 2.0 * z.re.ln()).sum())
}

/// Real-symmetric `log det`, `None` if not PD.
pub fn sym_logdet(a: &RMatrix) -> Option<f64> {
    let chol = a.clone().cholesky()?;
    Some(chol.l().diagonal().iter().map(|x| 2.0 * x.ln()).sum())
}

pub fn to_complex(a: &RMatrix) -> CMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Spectral radius of the companion matrix of `z ↦ I − Σ_j C_j z^j`.
pub fn companion_radius(coefs: &[RMatrix]) -> f64 {
    let m = coefs.len();
    if m == 0 {
        return 0.0;
    }
    let p = coefs[0].nrows();
    let mut comp = RMatrix::zeros(p * m, p * m);
    for (j, c) in coefs.iter().enumerate() {
        comp.view_mut((0, j * p), (p, p)).copy_from(c);
    }
    for i in p..p * m {
        comp[(i, i - p)] = 1.0;
    }
    if comp.iter().all(|x| *x == 0.0) {
        return 0.0;
    }
    // unbounded Schur iterations can stall on defective matrices
    if let Some(schur) = nalgebra::linalg::Schur::try_new(comp.clone(), 1e-14, 10_000) {
        return schur.complex_eigenvalues().iter().fold(0.0, |r, z| r.max(z.norm()));
    }
    gelfand_radius(comp)
}

/// `‖A^k‖^{1/k}` by repeated squaring, rescaled to stay finite.
fn gelfand_radius(mut a: RMatrix) -> f64 {
    let mut log_scale = 0.0;
    let mut k = 1.0;
    for _ in 0..12 {
        let norm = a.norm();
        if norm == 0.0 {
            return 0.0;
        }
        a /= norm;
        log_scale += norm.ln() / k;
        a = &a * &a;
        k *= 2.0;
    }
    (log_scale + a.norm().ln() / k).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_radius_cases() {
        assert_eq!(companion_radius(&[RMatrix::zeros(3, 3)]), 0.0);
        let c = RMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.25]);
        assert!((companion_radius(&[c]) - 0.5).abs() < 1e-12);
        // x_t = 0.9 x_{t-2}: roots ±√0.9
        let c1 = RMatrix::zeros(1, 1);
        let c2 = RMatrix::from_element(1, 1, 0.9);
        assert!((companion_radius(&[c1, c2]) - 0.9f64.sqrt()).abs() < 1e-12);
        let jordan = RMatrix::from_row_slice(2, 2, &[0.3, 1.0, 0.0, 0.3]);
        assert!((gelfand_radius(jordan) - 0.3).abs() < 0.01);
    }

    #[test]
    fn hermitian_helpers() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.5, 0.5),
                Complex64::new(0.5, -0.5),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(is_hermitian(&a, 1e-14));
        let ev = hermitian_eigenvalues(&a);
        assert!((ev[0] + ev[1] - 3.0).abs() < 1e-12);
        assert!((ev[0] * ev[1] - 1.5).abs() < 1e-12);
        let ld = hermitian_logdet(&a).unwrap();
        assert!((ld - 1.5f64.ln()).abs() < 1e-12);
        let inv = inverse(&a).unwrap();
        let id = &a * &inv;
        assert!((id[(0, 0)].re - 1.0).abs() < 1e-12 && id[(0, 1)].norm() < 1e-12);
    }
}
