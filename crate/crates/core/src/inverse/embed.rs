use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, max_abs, CMatrix, RMatrix};

/// `[[Re S, Im S], [−Im S, Re S]]` for a Hermitian `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealEmbedding {
    matrix: RMatrix,
}

impl RealEmbedding {
    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> RMatrix {
        self.matrix
    }

    /// Complex dimension `p` (the embedding is `2p × 2p`).
    pub fn p(&self) -> usize {
        self.matrix.nrows() / 2
    }
}

pub fn real_embed(s: &CMatrix) -> Result<RealEmbedding> {
    if !s.is_square() {
        return Err(Error::InvalidInput("embedding needs a square matrix".into()));
    }
    if hermitian_defect(s) > 1e-8 * max_abs(s).max(1.0) {
        return Err(Error::InvalidInput("embedding needs a Hermitian matrix".into()));
    }
    Ok(RealEmbedding {
        matrix: embed_unchecked(s),
    })
}

pub(crate) fn embed_unchecked(s: &CMatrix) -> RMatrix {
    let p = s.nrows();
    let mut out = RMatrix::zeros(2 * p, 2 * p);
    for j in 0..p {
        for k in 0..p {
            let z = s[(j, k)];
            out[(j, k)] = z.re;
            out[(j + p, k + p)] = z.re;
            out[(j, k + p)] = z.im;
            out[(j + p, k)] = -z.im;
        }
    }
    out
}

/// Entry `(j,k)` is `(B[j,k] + B[j+p,k+p])/2 + i·(B[j,k+p] − B[j+p,k])/2`.
pub fn complex_recover(b: &RMatrix) -> CMatrix {
    let p = b.nrows() / 2;
    CMatrix::from_fn(p, p, |j, k| {
        Complex64::new(
            0.5 * (b[(j, k)] + b[(j + p, k + p)]),
            0.5 * (b[(j, k + p)] - b[(j + p, k)]),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn herm3() -> CMatrix {
        CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.3, 0.7),
                c(-0.1, 0.2),
                c(0.3, -0.7),
                c(1.5, 0.0),
                c(0.4, -0.9),
                c(-0.1, -0.2),
                c(0.4, 0.9),
                c(3.0, 0.0),
            ],
        )
    }

    #[test]
    fn identity_and_scalar() {
        let e = real_embed(&CMatrix::identity(3, 3)).unwrap();
        assert_eq!(e.matrix(), &RMatrix::identity(6, 6));
        assert_eq!(complex_recover(e.matrix()), CMatrix::identity(3, 3));
        let e = real_embed(&CMatrix::from_element(1, 1, c(2.0, 0.0))).unwrap();
        assert_eq!(e.matrix(), &RMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]));
        assert_eq!(complex_recover(e.matrix())[(0, 0)], c(2.0, 0.0));
    }

    #[test]
    fn round_trip_and_symmetry() {
        let s = herm3();
        let e = real_embed(&s).unwrap();
        assert_eq!(e.matrix(), &e.matrix().transpose());
        assert!((complex_recover(e.matrix()) - &s).iter().all(|z| z.norm() < 1e-14));
        let mut ev: Vec<f64> = e.matrix().clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for pair in ev.chunks(2) {
            assert!((pair[0] - pair[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_is_multiplicative() {
        let s = herm3();
        let inv = s.clone().try_inverse().unwrap();
        let prod = embed_unchecked(&s) * embed_unchecked(&inv);
        assert!((prod - RMatrix::identity(6, 6)).amax() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut s = herm3();
        s[(0, 1)] = c(5.0, 0.0);
        assert!(matches!(real_embed(&s), Err(Error::InvalidInput(_))));
    }
}
