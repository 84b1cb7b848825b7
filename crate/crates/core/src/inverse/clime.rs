use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DVector;

use super::embed::{complex_recover, real_embed};
use super::{InverseEstimate, InverseMethod};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, max_abs_real, CMatrix, RMatrix};

/// CLIME on the real embedding `E` of `S`: column-wise
/// `min ‖b‖₁` subject to `‖E b − e_j‖_∞ ≤ λ`, then entrywise
/// min-magnitude symmetrisation.
///
/// `E` commutes with `J = [[0, I], [−I, 0]]`, so if `b` solves column `j`
/// then `−J b` solves column `j + p` with the same ℓ1 norm; only the first
/// `p` programs are solved.
pub fn clime_solve(s: &CMatrix, lambda: f64) -> Result<InverseEstimate> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("CLIME penalty must be positive, got {lambda}")));
    }
    let embedding = real_embed(s)?;
    let e = embedding.matrix();
    let p = embedding.p();
    let dim = 2 * p;

    let mut raw = RMatrix::zeros(dim, dim);
    for j in 0..p {
        let col = column_program(e, j, lambda)?;
        for r in 0..p {
            raw[(r, j)] = col[r];
            raw[(r + p, j)] = col[r + p];
            // −J (x; y) = (−y; x)
            raw[(r, j + p)] = -col[r + p];
            raw[(r + p, j + p)] = col[r];
        }
    }
    let feasibility_gap = max_abs_real(&(e * &raw - RMatrix::identity(dim, dim)));

    let sym = RMatrix::from_fn(dim, dim, |a, b| {
        let (x, y) = (raw[(a, b)], raw[(b, a)]);
        if x.abs() <= y.abs() {
            x
        } else {
            y
        }
    });
    Ok(InverseEstimate {
        matrix: hermitian_part(&complex_recover(&sym)),
        lambda,
        method: InverseMethod::Clime,
        feasibility_gap,
        duality_gap: None,
    })
}

fn column_program(e: &RMatrix, j: usize, lambda: f64) -> Result<DVector<f64>> {
    let dim = e.nrows();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let plus: Vec<_> = (0..dim).map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    let minus: Vec<_> = (0..dim).map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for r in 0..dim {
        let target = if r == j { 1.0 } else { 0.0 };
        let terms: Vec<_> = (0..dim)
            .filter(|&c| e[(r, c)] != 0.0)
            .flat_map(|c| [(plus[c], e[(r, c)]), (minus[c], -e[(r, c)])])
            .collect();
        lp.add_constraint(terms.as_slice(), ComparisonOp::Le, target + lambda);
        lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, target - lambda);
    }
    let outcome = lp.solve().map_err(|err| match err {
        microlp::Error::Infeasible => Error::InfeasiblePenalty { lambda },
        other => Error::DegenerateInverse(format!("CLIME column {j}: {other}")),
    })?;
    let solution = outcome
        .solution()
        .ok_or_else(|| Error::DegenerateInverse(format!("CLIME column {j}: solve interrupted")))?;
    Ok(DVector::from_fn(dim, |c, _| {
        solution.var_value(plus[c]) - solution.var_value(minus[c])
    }))
}
