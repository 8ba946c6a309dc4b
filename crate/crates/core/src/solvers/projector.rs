//! Orthogonal projection onto {x : Ax = y}.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::sampling::{LinearOperator, ReducedConstraint};

const DENSE_ROW_LIMIT: usize = 4096;
const CG_TOL: f64 = 1e-13;
const CG_MAX: usize = 1000;

enum Factor {
    Cholesky(Cholesky<f64, Dyn>),
    Pseudo(DMatrix<f64>),
}

enum Kind<'a> {
    Dense {
        a: &'a DMatrix<f64>,
        factor: Factor,
        rhs: DVector<f64>,
    },
    Iterative {
        op: Box<dyn LinearOperator + 'a>,
        rhs: Vec<f64>,
        diagonal: Option<Vec<f64>>,
        warm: Vec<f64>,
    },
}

/// x ↦ x − Bᵀ(BBᵀ)⁻¹(Bx − y_B), with B either the stored matrix (cached
/// factorization of BBᵀ) or an equivalent reduced operator (preconditioned CG).
pub struct AffineProjector<'a> {
    kind: Kind<'a>,
    /// Multiplier w of the last projection: P(z) = z − Bᵀw.
    last_multiplier: Vec<f64>,
}

struct Borrowed<'a>(&'a dyn LinearOperator);

impl LinearOperator for Borrowed<'_> {
    fn rows(&self) -> usize {
        self.0.rows()
    }
    fn cols(&self) -> usize {
        self.0.cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.apply(x)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.0.adjoint(y)
    }
}

impl<'a> AffineProjector<'a> {
    pub fn new(op: &'a dyn LinearOperator, y: &[f64]) -> Self {
        if let Some(a) = op.dense().filter(|a| a.nrows() <= DENSE_ROW_LIMIT) {
            let g = a * a.transpose();
            return Self {
                kind: Kind::Dense {
                    a,
                    factor: factorize(g),
                    rhs: DVector::from_column_slice(y),
                },
                last_multiplier: Vec::new(),
            };
        }
        let (op, rhs, diagonal): (Box<dyn LinearOperator + 'a>, Vec<f64>, Option<Vec<f64>>) =
            match op.reduced_constraint(y) {
                Some(ReducedConstraint { op, rhs, diagonal }) => (op, rhs, Some(diagonal)),
                None => (Box::new(Borrowed(op)), y.to_vec(), None),
            };
        let warm = vec![0.0; op.rows()];
        Self {
            kind: Kind::Iterative { op, rhs, diagonal, warm },
            last_multiplier: Vec::new(),
        }
    }

    /// Projection of `z`.
    pub fn project(&mut self, z: &[f64]) -> Vec<f64> {
        match &mut self.kind {
            Kind::Dense { a, factor, rhs } => {
                let zv = DVector::from_column_slice(z);
                let r = *a * &zv - &*rhs;
                let w = match factor {
                    Factor::Cholesky(c) => c.solve(&r),
                    Factor::Pseudo(p) => &*p * r,
                };
                let x = zv - a.tr_mul(&w);
                self.last_multiplier = w.data.into();
                x.data.into()
            }
            Kind::Iterative { op, rhs, diagonal, warm } => {
                let mut r = op.apply(z);
                r.iter_mut().zip(rhs.iter()).for_each(|(a, b)| *a -= b);
                let w = conjugate_gradient(op.as_ref(), &r, diagonal.as_deref(), warm);
                let corr = op.adjoint(&w);
                warm.copy_from_slice(&w);
                self.last_multiplier = w;
                z.iter().zip(corr).map(|(a, b)| a - b).collect()
            }
        }
    }

    /// Projection of `z` when Az is already known. Only the stored-matrix path
    /// uses `az`; otherwise this is [`Self::project`].
    pub fn project_known(&mut self, z: &[f64], az: &[f64]) -> Vec<f64> {
        match &mut self.kind {
            Kind::Dense { a, factor, rhs } => {
                let r = DVector::from_column_slice(az) - &*rhs;
                let w = match factor {
                    Factor::Cholesky(c) => c.solve(&r),
                    Factor::Pseudo(p) => &*p * r,
                };
                let x = DVector::from_column_slice(z) - a.tr_mul(&w);
                self.last_multiplier = w.data.into();
                x.data.into()
            }
            Kind::Iterative { .. } => self.project(z),
        }
    }

    /// The stored matrix when the projection goes through its factorization.
    pub fn dense_matrix(&self) -> Option<&'a DMatrix<f64>> {
        match self.kind {
            Kind::Dense { a, .. } => Some(a),
            Kind::Iterative { .. } => None,
        }
    }

    /// Multiplier of the last projection in the measurement space of the stored
    /// matrix (None on the iterative path).
    pub fn multiplier(&self) -> Option<&[f64]> {
        match self.kind {
            Kind::Dense { .. } => Some(&self.last_multiplier),
            Kind::Iterative { .. } => None,
        }
    }
}

fn factorize(g: DMatrix<f64>) -> Factor {
    let n = g.nrows();
    let trace_scale = (0..n).map(|i| g[(i, i)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if let Some(c) = Cholesky::new(g.clone()) {
        let l = c.l_dirty();
        let min_pivot = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_pivot > 1e-10 * trace_scale {
            return Factor::Cholesky(c);
        }
    }
    let eig = g.symmetric_eigen();
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let inv = eig.eigenvalues.map(|v| if v > 1e-12 * max { 1.0 / v } else { 0.0 });
    let q = &eig.eigenvectors;
    Factor::Pseudo(q * DMatrix::from_diagonal(&inv) * q.transpose())
}

/// Solves (BBᵀ) w = r by Jacobi-preconditioned CG from the warm start.
fn conjugate_gradient(op: &dyn LinearOperator, r: &[f64], diagonal: Option<&[f64]>, warm: &[f64]) -> Vec<f64> {
    let apply = |v: &[f64]| op.apply(&op.adjoint(v));
    let precond = |v: &[f64]| -> Vec<f64> {
        match diagonal {
            Some(d) => v.iter().zip(d).map(|(a, b)| if *b > 0.0 { a / b } else { *a }).collect(),
            None => v.to_vec(),
        }
    };
    let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rnorm == 0.0 {
        return vec![0.0; r.len()];
    }
    let mut w = warm.to_vec();
    let gw = apply(&w);
    let mut res: Vec<f64> = r.iter().zip(&gw).map(|(a, b)| a - b).collect();
    let mut z = precond(&res);
    let mut p = z.clone();
    let mut rz: f64 = res.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..CG_MAX {
        let res_norm = res.iter().map(|v| v * v).sum::<f64>().sqrt();
        if res_norm <= CG_TOL * rnorm {
            break;
        }
        let gp = apply(&p);
        let pgp: f64 = p.iter().zip(&gp).map(|(a, b)| a * b).sum();
        if pgp <= 0.0 {
            break;
        }
        let alpha = rz / pgp;
        w.iter_mut().zip(&p).for_each(|(a, b)| *a += alpha * b);
        res.iter_mut().zip(&gp).for_each(|(a, b)| *a -= alpha * b);
        z = precond(&res);
        let rz_new: f64 = res.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(a, b)| *a = b + beta * *a);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{gaussian_matrix, DenseOperator};

    #[test]
    fn dense_and_iterative_agree() {
        let a = gaussian_matrix(5, 12, 1);
        let op = DenseOperator::new(a.clone());
        let y: Vec<f64> = (0..5).map(|i| i as f64 - 2.0).collect();
        let z: Vec<f64> = (0..12).map(|i| (i as f64).cos()).collect();
        let x1 = AffineProjector::new(&op, &y).project(&z);

        struct Plain(DenseOperator);
        impl LinearOperator for Plain {
            fn rows(&self) -> usize {
                self.0.rows()
            }
            fn cols(&self) -> usize {
                self.0.cols()
            }
            fn apply(&self, x: &[f64]) -> Vec<f64> {
                self.0.apply(x)
            }
            fn adjoint(&self, y: &[f64]) -> Vec<f64> {
                self.0.adjoint(y)
            }
        }
        let plain = Plain(op.clone());
        let x2 = AffineProjector::new(&plain, &y).project(&z);
        assert!(x1.iter().zip(&x2).all(|(a, b)| (a - b).abs() < 1e-10));
        let ax = op.apply(&x1);
        assert!(ax.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn singular_rows_use_pseudo_inverse() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let op = DenseOperator::new(a);
        let x = AffineProjector::new(&op, &[2.0, 2.0, 3.0]).project(&[0.0, 0.0, 5.0]);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12 && (x[2] - 5.0).abs() < 1e-12);
    }
}
