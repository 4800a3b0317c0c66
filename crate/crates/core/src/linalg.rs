//! Dense linear algebra at desk scale.
//!
//! Vectors are plain slices. [`DenseMatrix`] stores entries row-major,
//! [`LinearMap`] wraps any operator with a forward map and an adjoint, and
//! [`SymMatrix`] keeps symmetric matrices in scaled-svec form so that the
//! Euclidean norm of the vector equals the Frobenius norm of the matrix.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

#[inline]
pub fn norm2<T: Scalar>(a: &[T]) -> T {
    norm_sq(a).sqrt()
}

#[inline]
pub fn norm1<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc + x.abs())
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scaled<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `y += a * x`
#[inline]
pub fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

pub fn all_finite<T: Scalar>(a: &[T]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Draws a vector of independent standard normals.
pub fn gaussian_vector<T: Scalar, R: rand::Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<T> {
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            T::lit(z)
        })
        .collect()
}

/// Row-major dense matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        check_dim("dense matrix entries", rows * cols, data.len())?;
        if !all_finite(&data) {
            return Err(Error::NumericFailure("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a list of rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_dim("dense matrix row length", cols, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn diag(d: &[T]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Random matrix with i.i.d. standard normal entries.
    pub fn random<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            rows,
            cols,
            data: gaussian_vector(rng, rows * cols),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "matvec dimension");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn matvec_t(&self, w: &[T]) -> Vec<T> {
        assert_eq!(w.len(), self.rows, "matvec_t dimension");
        let mut out = vec![T::zero(); self.cols];
        for (i, &wi) in w.iter().enumerate() {
            if wi != T::zero() {
                axpy(wi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> T {
        norm2(&self.data)
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (i + 1..self.cols).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol)
            })
    }
}

impl<T: fmt::Debug> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = if self.cols == 0 {
            vec![&[]; self.rows]
        } else {
            self.data.chunks(self.cols).collect()
        };
        f.debug_struct("DenseMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &rows)
            .finish()
    }
}

/// A linear operator `R^n -> R^m` together with its adjoint.
pub trait LinearOperator<T: Scalar>: Send + Sync {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn apply(&self, v: &[T]) -> Vec<T>;
    fn apply_adjoint(&self, w: &[T]) -> Vec<T>;
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn in_dim(&self) -> usize {
        self.cols
    }
    fn out_dim(&self) -> usize {
        self.rows
    }
    fn apply(&self, v: &[T]) -> Vec<T> {
        self.matvec(v)
    }
    fn apply_adjoint(&self, w: &[T]) -> Vec<T> {
        self.matvec_t(w)
    }
}

type MapFn<T> = dyn Fn(&[T]) -> Vec<T> + Send + Sync;

/// Operator given by a pair of closures.
pub struct FnOperator<T> {
    in_dim: usize,
    out_dim: usize,
    forward: Box<MapFn<T>>,
    adjoint: Box<MapFn<T>>,
}

impl<T: Scalar> LinearOperator<T> for FnOperator<T> {
    fn in_dim(&self) -> usize {
        self.in_dim
    }
    fn out_dim(&self) -> usize {
        self.out_dim
    }
    fn apply(&self, v: &[T]) -> Vec<T> {
        let out = (self.forward)(v);
        assert_eq!(out.len(), self.out_dim, "forward map output dimension");
        out
    }
    fn apply_adjoint(&self, w: &[T]) -> Vec<T> {
        let out = (self.adjoint)(w);
        assert_eq!(out.len(), self.in_dim, "adjoint map output dimension");
        out
    }
}

/// Shared handle to a linear map `A` and its adjoint `A^T`.
#[derive(Clone)]
pub struct LinearMap<T> {
    op: Arc<dyn LinearOperator<T>>,
    dense: Option<Arc<DenseMatrix<T>>>,
}

impl<T: Scalar> LinearMap<T> {
    pub fn dense(matrix: DenseMatrix<T>) -> Self {
        let m = Arc::new(matrix);
        Self {
            op: m.clone(),
            dense: Some(m),
        }
    }

    pub fn from_fns<F, G>(in_dim: usize, out_dim: usize, forward: F, adjoint: G) -> Self
    where
        F: Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
        G: Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    {
        Self::from_operator(FnOperator {
            in_dim,
            out_dim,
            forward: Box::new(forward),
            adjoint: Box::new(adjoint),
        })
    }

    pub fn from_operator<O: LinearOperator<T> + 'static>(op: O) -> Self {
        Self {
            op: Arc::new(op),
            dense: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::dense(DenseMatrix::identity(n))
    }

    #[inline]
    pub fn in_dim(&self) -> usize {
        self.op.in_dim()
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.op.out_dim()
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.in_dim(), "linear map input dimension");
        self.op.apply(v)
    }

    pub fn apply_adjoint(&self, w: &[T]) -> Vec<T> {
        assert_eq!(w.len(), self.out_dim(), "linear map adjoint input dimension");
        self.op.apply_adjoint(w)
    }

    /// The backing matrix, when the map was built from one.
    pub fn as_dense(&self) -> Option<&DenseMatrix<T>> {
        self.dense.as_deref()
    }

    /// Largest relative violation of `<Av, w> = <v, A^T w>` over random probes.
    pub fn adjoint_mismatch(&self, probes: usize, seed: u64) -> T {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = T::zero();
        for _ in 0..probes {
            let v: Vec<T> = gaussian_vector(&mut rng, self.in_dim());
            let w: Vec<T> = gaussian_vector(&mut rng, self.out_dim());
            let av = self.apply(&v);
            let atw = self.apply_adjoint(&w);
            let lhs = dot(&av, &w);
            let rhs = dot(&v, &atw);
            let scale = norm2(&av) * norm2(&w) + norm2(&v) * norm2(&atw);
            let rel = (lhs - rhs).abs() / (T::one() + scale);
            worst = worst.max(rel);
        }
        worst
    }
}

impl<T: Scalar> fmt::Debug for LinearMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearMap")
            .field("in_dim", &self.in_dim())
            .field("out_dim", &self.out_dim())
            .field("dense", &self.dense.is_some())
            .finish()
    }
}

/// Default iteration cap for [`spectral_norm`].
///
/// Grows like `20 ln(dim)` but never drops below 1000 iterations, since the
/// logarithmic cap alone cannot reach a 1e-8 relative tolerance on maps
/// whose top two singular values are close.
pub fn default_power_iterations(dim: usize) -> usize {
    let log_cap = (20.0 * (dim.max(2) as f64).ln()).ceil() as usize;
    log_cap.max(1000)
}

/// Estimates the largest singular value of `map` by power iteration on `A^T A`.
///
/// The start vector is drawn from `seed`. If the iterate collapses (start
/// orthogonal to the dominant subspace, or a zero map), the iteration restarts
/// once from a fresh random vector; a second collapse means the map is zero.
pub fn spectral_norm<T: Scalar>(map: &LinearMap<T>, tol: T, max_iter: usize, seed: u64) -> Result<T> {
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let n = map.in_dim();
    if n == 0 || map.out_dim() == 0 {
        return Ok(T::zero());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tiny = T::min_positive_value().sqrt();
    let mut restarted = false;

    let mut x: Vec<T> = gaussian_vector(&mut rng, n);
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut prev = T::zero();
    let mut estimate = T::zero();
    let mut iter = 0;
    while iter < max_iter {
        iter += 1;
        let ax = map.apply(&x);
        let z = map.apply_adjoint(&ax);
        let nz = norm2(&z);
        if !nz.is_finite() || !all_finite(&z) {
            return Err(Error::NumericFailure(
                "non-finite value in power iteration".into(),
            ));
        }
        if nz <= tiny {
            if restarted {
                return Ok(T::zero());
            }
            restarted = true;
            x = gaussian_vector(&mut rng, n);
            let nx = norm2(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            prev = T::zero();
            continue;
        }
        // ||A^T A x|| with ||x|| = 1 lower-bounds sigma_max^2 and increases monotonically
        estimate = nz.sqrt();
        x = z.into_iter().map(|v| v / nz).collect();
        if iter > 1 && (estimate - prev).abs() <= tol * estimate * T::lit(0.01) {
            break;
        }
        prev = estimate;
    }
    Ok(estimate)
}

/// Number of svec coordinates of a `d x d` symmetric matrix.
#[inline]
pub const fn svec_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Inverse of [`svec_len`]; `None` if `len` is not triangular.
pub fn svec_dim(len: usize) -> Option<usize> {
    let mut d = 0;
    while svec_len(d) < len {
        d += 1;
    }
    (svec_len(d) == len).then_some(d)
}

/// Symmetric matrix in scaled-svec storage.
///
/// Coordinates enumerate the upper triangle row by row, `(0,0), (0,1), ...,
/// (0,d-1), (1,1), ...`; off-diagonal entries carry a factor `sqrt(2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    svec: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn from_svec(dim: usize, svec: Vec<T>) -> Result<Self> {
        check_dim("svec length", svec_len(dim), svec.len())?;
        Ok(Self { dim, svec })
    }

    /// Builds from a full row-major `dim x dim` array, symmetrizing as `(M + M^T)/2`.
    pub fn from_full(dim: usize, full: &[T]) -> Result<Self> {
        check_dim("full symmetric matrix entries", dim * dim, full.len())?;
        let sqrt2 = T::SQRT_2();
        let half = T::lit(0.5);
        let mut svec = Vec::with_capacity(svec_len(dim));
        for i in 0..dim {
            for j in i..dim {
                if i == j {
                    svec.push(full[i * dim + i]);
                } else {
                    svec.push(sqrt2 * half * (full[i * dim + j] + full[j * dim + i]));
                }
            }
        }
        Ok(Self { dim, svec })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        let mut full = Vec::with_capacity(dim * dim);
        for r in rows {
            check_dim("symmetric matrix row length", dim, r.len())?;
            full.extend_from_slice(r);
        }
        Self::from_full(dim, &full)
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![T::one(); dim])
    }

    pub fn diag(d: &[T]) -> Self {
        let dim = d.len();
        let mut full = vec![T::zero(); dim * dim];
        for (i, &v) in d.iter().enumerate() {
            full[i * dim + i] = v;
        }
        Self::from_full(dim, &full).expect("consistent dimensions")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn svec(&self) -> &[T] {
        &self.svec
    }

    pub fn into_svec(self) -> Vec<T> {
        self.svec
    }

    /// Full row-major matrix.
    pub fn to_full(&self) -> Vec<T> {
        let d = self.dim;
        let inv = T::one() / T::SQRT_2();
        let mut full = vec![T::zero(); d * d];
        let mut idx = 0;
        for i in 0..d {
            for j in i..d {
                let v = if i == j { self.svec[idx] } else { self.svec[idx] * inv };
                full[i * d + j] = v;
                full[j * d + i] = v;
                idx += 1;
            }
        }
        full
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        let full = self.to_full();
        full.chunks(self.dim.max(1)).map(<[T]>::to_vec).take(self.dim).collect()
    }

    pub fn frobenius(&self) -> T {
        norm2(&self.svec)
    }
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEig<T> {
    /// Eigenvalues in descending order.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: DenseMatrix<T>,
}

impl<T: Scalar> SymEig<T> {
    /// `V diag(f(lambda)) V^T` as a full row-major matrix.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Vec<T> {
        let d = self.values.len();
        let mut full = vec![T::zero(); d * d];
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == T::zero() {
                continue;
            }
            for i in 0..d {
                let vik = self.vectors.get(i, k) * w;
                for j in 0..d {
                    full[i * d + j] += vik * self.vectors.get(j, k);
                }
            }
        }
        full
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn sym_eig<T: Scalar>(m: &SymMatrix<T>) -> Result<SymEig<T>> {
    if !all_finite(m.svec()) {
        return Err(Error::NumericFailure("non-finite symmetric matrix".into()));
    }
    let d = m.dim();
    let mut a = m.to_full();
    let mut v = DenseMatrix::<T>::identity(d);
    let scale = m.frobenius();
    let threshold = (T::epsilon() * scale) * (T::epsilon() * scale);

    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..d {
            for q in p + 1..d {
                off += a[p * d + q] * a[p * d + q];
            }
        }
        if off <= threshold || off == T::zero() {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (T::one() + theta * theta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // A <- A J
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                // A <- J^T A
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                a[p * d + q] = T::zero();
                a[q * d + p] = T::zero();
                for k in 0..d {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        a[j * d + j]
            .partial_cmp(&a[i * d + i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[i * d + i]).collect();
    let mut vectors = DenseMatrix::zeros(d, d);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..d {
            vectors.set(k, new, v.get(k, old));
        }
    }
    Ok(SymEig { values, vectors })
}

/// Solves the square system `M x = rhs` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `pivot_tol` times the
/// largest entry of `M`.
pub fn solve_dense<T: Scalar>(m: &DenseMatrix<T>, rhs: &[T], pivot_tol: T) -> Option<Vec<T>> {
    let n = m.rows();
    assert_eq!(m.cols(), n, "solve_dense needs a square matrix");
    assert_eq!(rhs.len(), n, "solve_dense rhs dimension");
    let mut a = m.as_slice().to_vec();
    let mut b = rhs.to_vec();
    let scale = a.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    if n > 0 && scale == T::zero() {
        return None;
    }
    for col in 0..n {
        let (piv, pval) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pval <= pivot_tol * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[r * n + k] -= f * v;
            }
            let bc = b[col];
            b[r] -= f * bc;
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= a[r * n + k] * x[k];
        }
        x[r] = s / a[r * n + r];
    }
    Some(x)
}
