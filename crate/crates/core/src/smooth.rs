//! Smooth convex parts `γ` with Lipschitz gradients.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, sym_eig, DenseMatrix, SymMatrix};
use crate::scalar::Scalar;

/// A convex function on all of `R^n` with an `L`-Lipschitz gradient.
pub trait SmoothFunction<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[T]) -> T;
    fn gradient(&self, x: &[T]) -> Vec<T>;
    /// Lipschitz constant `L_γ` of the gradient.
    fn lipschitz(&self) -> T;

    fn value_and_gradient(&self, x: &[T]) -> (T, Vec<T>) {
        (self.value(x), self.gradient(x))
    }
}

/// Shared handle to a smooth part.
pub type SmoothPart<T> = Arc<dyn SmoothFunction<T>>;

/// `γ ≡ 0`
#[derive(Clone, Debug)]
pub struct ZeroSmooth {
    dim: usize,
}

impl ZeroSmooth {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl<T: Scalar> SmoothFunction<T> for ZeroSmooth {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &[T]) -> T {
        T::zero()
    }
    fn gradient(&self, _x: &[T]) -> Vec<T> {
        vec![T::zero(); self.dim]
    }
    fn lipschitz(&self) -> T {
        T::zero()
    }
}

/// `γ(x) = ½ xᵀQx + qᵀx` with `Q` symmetric positive semidefinite.
#[derive(Clone, Debug)]
pub struct Quadratic<T> {
    hessian: Option<DenseMatrix<T>>,
    linear: Vec<T>,
    lipschitz: T,
}

impl<T: Scalar> Quadratic<T> {
    pub fn new(hessian: DenseMatrix<T>, linear: Vec<T>) -> Result<Self> {
        let n = linear.len();
        check_dim("quadratic hessian rows", n, hessian.rows())?;
        check_dim("quadratic hessian cols", n, hessian.cols())?;
        let scale = T::one() + hessian.frobenius();
        if !hessian.is_symmetric(T::lit(1e-12) * scale) {
            return Err(Error::InvalidParameter("quadratic hessian must be symmetric".into()));
        }
        let eig = sym_eig(&SymMatrix::from_full(n, hessian.as_slice())?)?;
        let smallest = eig.values.last().copied().unwrap_or(T::zero());
        if smallest < -T::lit(1e-10) * scale {
            return Err(Error::InvalidParameter(
                "quadratic hessian must be positive semidefinite".into(),
            ));
        }
        let lipschitz = eig.values.first().copied().unwrap_or(T::zero()).max(T::zero());
        Ok(Self {
            hessian: Some(hessian),
            linear,
            lipschitz,
        })
    }

    /// `γ(x) = cᵀx`
    pub fn linear(c: Vec<T>) -> Self {
        Self {
            hessian: None,
            linear: c,
            lipschitz: T::zero(),
        }
    }

    pub fn hessian(&self) -> Option<&DenseMatrix<T>> {
        self.hessian.as_ref()
    }

    pub fn linear_term(&self) -> &[T] {
        &self.linear
    }
}

impl<T: Scalar> SmoothFunction<T> for Quadratic<T> {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn value(&self, x: &[T]) -> T {
        let lin = dot(&self.linear, x);
        match &self.hessian {
            Some(q) => lin + T::lit(0.5) * dot(x, &q.matvec(x)),
            None => lin,
        }
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        match &self.hessian {
            Some(q) => q
                .matvec(x)
                .into_iter()
                .zip(&self.linear)
                .map(|(a, &b)| a + b)
                .collect(),
            None => self.linear.clone(),
        }
    }

    fn lipschitz(&self) -> T {
        self.lipschitz
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_vector, norm2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_value_gradient_lipschitz() {
        let q = Quadratic::new(DenseMatrix::diag(&[1.0, 10.0]), vec![1.0, -1.0]).unwrap();
        assert_eq!(q.value(&[1.0, 1.0]), 0.5 * 11.0);
        assert_eq!(q.gradient(&[1.0, 1.0]), vec![2.0, 9.0]);
        assert!((q.lipschitz() - 10.0f64).abs() < 1e-12);
    }

    #[test]
    fn quadratic_rejects_indefinite_or_asymmetric() {
        assert!(Quadratic::new(DenseMatrix::diag(&[1.0, -1.0]), vec![0.0; 2]).is_err());
        let asym = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(Quadratic::new(asym, vec![0.0; 2]).is_err());
        assert!(Quadratic::new(DenseMatrix::<f64>::identity(2), vec![0.0; 3]).is_err());
    }

    #[test]
    fn finite_difference_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = DenseMatrix::<f64>::random(3, 3, &mut rng);
        let q = Quadratic::new(b.transpose().matmul(&b), gaussian_vector(&mut rng, 3)).unwrap();
        let h = 1e-5;
        for _ in 0..20 {
            let x: Vec<f64> = gaussian_vector(&mut rng, 3);
            let mut v: Vec<f64> = gaussian_vector(&mut rng, 3);
            let nv = norm2(&v);
            v.iter_mut().for_each(|e| *e /= nv);
            let xp: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
            let fd = (q.value(&xp) - q.value(&x)) / h;
            assert!((fd - dot(&q.gradient(&x), &v)).abs() <= 10.0 * h * q.lipschitz());
        }
    }

    #[test]
    fn zero_smooth() {
        let z = ZeroSmooth::new(2);
        assert_eq!(SmoothFunction::<f64>::value(&z, &[1.0, 2.0]), 0.0);
        assert_eq!(SmoothFunction::<f64>::gradient(&z, &[1.0, 2.0]), vec![0.0, 0.0]);
        assert_eq!(SmoothFunction::<f64>::lipschitz(&z), 0.0);
    }
}
