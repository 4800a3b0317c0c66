//! Closed convex cones with Euclidean projection, distance and dual membership.
//!
//! Second-order cone points are laid out as `(t, x)` with the scalar first.
//! PSD cones act on scaled-svec coordinates (see [`crate::linalg::SymMatrix`]),
//! so the Euclidean geometry of the coordinates is the Frobenius geometry of
//! the matrices.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm2, svec_len, sym_eig, SymMatrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cone {
    /// `{0} ⊂ R^m`
    Zero(usize),
    /// `R^m`; appears as the dual of [`Cone::Zero`].
    Free(usize),
    /// `R^m_+`
    NonNeg(usize),
    /// `{(t, x) : ||x||_2 <= t} ⊂ R^m`
    SecondOrder(usize),
    /// `S^d_+` in svec coordinates, ambient dimension `d(d+1)/2`.
    Psd(usize),
    Product(ProductCone),
}

/// Cartesian product of non-product cones with precomputed block offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductCone {
    blocks: Vec<Cone>,
    offsets: Vec<usize>,
    dim: usize,
}

impl ProductCone {
    pub fn blocks(&self) -> &[Cone] {
        &self.blocks
    }

    /// Iterates `(block, coordinate range)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&Cone, std::ops::Range<usize>)> {
        self.blocks
            .iter()
            .zip(&self.offsets)
            .map(|(c, &o)| (c, o..o + c.dim()))
    }
}

impl Cone {
    /// Builds a product cone, flattening nested products.
    pub fn product(blocks: Vec<Cone>) -> Cone {
        let mut flat = Vec::with_capacity(blocks.len());
        for b in blocks {
            match b {
                Cone::Product(p) => flat.extend(p.blocks),
                other => flat.push(other),
            }
        }
        let mut offsets = Vec::with_capacity(flat.len());
        let mut dim = 0;
        for b in &flat {
            offsets.push(dim);
            dim += b.dim();
        }
        Cone::Product(ProductCone {
            blocks: flat,
            offsets,
            dim,
        })
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            Cone::Zero(m) | Cone::Free(m) | Cone::NonNeg(m) | Cone::SecondOrder(m) => *m,
            Cone::Psd(d) => svec_len(*d),
            Cone::Product(p) => p.dim,
        }
    }

    /// The dual cone `K* = {y : <y, x> >= 0 for all x in K}`.
    pub fn dual(&self) -> Cone {
        match self {
            Cone::Zero(m) => Cone::Free(*m),
            Cone::Free(m) => Cone::Zero(*m),
            Cone::Product(p) => Cone::product(p.blocks.iter().map(Cone::dual).collect()),
            self_dual => self_dual.clone(),
        }
    }

    /// Euclidean projection onto the cone.
    pub fn project<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim("cone projection", self.dim(), v.len())?;
        let mut out = v.to_vec();
        self.project_in_place(&mut out)?;
        Ok(out)
    }

    /// Projects `v` onto the cone, overwriting it.
    pub fn project_in_place<T: Scalar>(&self, v: &mut [T]) -> Result<()> {
        check_dim("cone projection", self.dim(), v.len())?;
        match self {
            Cone::Zero(_) => v.iter_mut().for_each(|x| *x = T::zero()),
            Cone::Free(_) => {}
            Cone::NonNeg(_) => v.iter_mut().for_each(|x| *x = x.max(T::zero())),
            Cone::SecondOrder(_) => project_soc(v),
            Cone::Psd(d) => project_psd(*d, v)?,
            Cone::Product(p) => {
                for (block, range) in p.iter() {
                    block.project_in_place(&mut v[range])?;
                }
            }
        }
        Ok(())
    }

    /// `d_K(v) = ||v - Π_K(v)||_2`
    pub fn distance<T: Scalar>(&self, v: &[T]) -> Result<T> {
        let p = self.project(v)?;
        Ok(crate::linalg::dist(v, &p))
    }

    /// `v - Π_K(v)`, the complementary projection.
    pub fn project_complement<T: Scalar>(&self, v: &[T]) -> Result<Vec<T>> {
        let p = self.project(v)?;
        Ok(v.iter().zip(&p).map(|(&a, &b)| a - b).collect())
    }

    pub fn contains<T: Scalar>(&self, v: &[T], tol: T) -> Result<bool> {
        Ok(self.distance(v)? <= tol)
    }

    /// Distance from `y` to the dual cone.
    pub fn dual_distance<T: Scalar>(&self, y: &[T]) -> Result<T> {
        self.dual().distance(y)
    }

    /// Whether `y` lies within `tol` of the dual cone.
    pub fn in_dual<T: Scalar>(&self, y: &[T], tol: T) -> Result<bool> {
        if tol < T::zero() {
            return Err(Error::InvalidParameter("tolerance must be nonnegative".into()));
        }
        Ok(self.dual_distance(y)? <= tol)
    }
}

fn project_soc<T: Scalar>(v: &mut [T]) {
    let Some((t, x)) = v.split_first_mut() else {
        return;
    };
    let nx = norm2(x);
    if nx <= *t {
        return;
    }
    if nx <= -*t {
        *t = T::zero();
        x.iter_mut().for_each(|e| *e = T::zero());
        return;
    }
    let half = T::lit(0.5) * (*t + nx);
    *t = half;
    let s = half / nx;
    x.iter_mut().for_each(|e| *e *= s);
}

fn project_psd<T: Scalar>(d: usize, v: &mut [T]) -> Result<()> {
    let m = SymMatrix::from_svec(d, v.to_vec())?;
    let eig = sym_eig(&m)?;
    if eig.values.iter().all(|&l| l >= T::zero()) {
        return Ok(());
    }
    let full = eig.reconstruct_with(|l| l.max(T::zero()));
    let p = SymMatrix::from_full(d, &full)?;
    v.copy_from_slice(p.svec());
    Ok(())
}

/// A vector tagged with the cone it is meant to live in.
#[derive(Clone, Debug)]
pub struct ConePoint<'a, T> {
    cone: &'a Cone,
    coords: Vec<T>,
}

impl<'a, T: Scalar> ConePoint<'a, T> {
    pub fn new(cone: &'a Cone, coords: Vec<T>) -> Result<Self> {
        check_dim("cone point", cone.dim(), coords.len())?;
        Ok(Self { cone, coords })
    }

    /// The projection of `v` onto `cone`, which is a member by construction.
    pub fn projected(cone: &'a Cone, v: &[T]) -> Result<Self> {
        Ok(Self {
            cone,
            coords: cone.project(v)?,
        })
    }

    pub fn cone(&self) -> &Cone {
        self.cone
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn membership_residual(&self) -> T {
        self.cone
            .distance(&self.coords)
            .expect("dimension checked at construction")
    }

    pub fn inner(&self, other: &[T]) -> T {
        dot(&self.coords, other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_vector, sub, SymMatrix};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn nonneg_projection_and_distance() {
        let k = Cone::NonNeg(2);
        assert_eq!(k.project(&[1.0, -2.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(k.distance(&[1.0, -2.0]).unwrap(), 2.0);
    }

    #[test]
    fn zero_cone_distance_is_norm() {
        assert_eq!(Cone::Zero(2).distance(&[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn psd_projection_clips_negative_eigenvalue() {
        let k = Cone::Psd(2);
        let m = SymMatrix::diag(&[1.0, -1.0]);
        let p = k.project(m.svec()).unwrap();
        assert_vec_close(&p, SymMatrix::diag(&[1.0, 0.0]).svec(), 1e-14);
    }

    #[test]
    fn psd_distance_of_swap_matrix() {
        // eigenvalues of [[0,1],[1,0]] are ±1; clipping -1 moves the matrix by Frobenius 1
        let m = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d: f64 = Cone::Psd(2).distance(m.svec()).unwrap();
        assert!((d - 1.0).abs() <= 1e-14, "{d}");
    }

    #[test]
    fn soc_projection_closed_form() {
        let k = Cone::SecondOrder(3);
        assert_vec_close(&k.project(&[0.0, 2.0, 0.0]).unwrap(), &[1.0, 1.0, 0.0], 1e-15);
        // ||x|| <= -t puts v in the polar cone, which projects to the origin
        assert_eq!(k.project(&[-2.0, 1.0, 0.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(k.project(&[2.0, 1.0, 0.0]).unwrap(), vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn dual_membership_examples() {
        assert!(Cone::NonNeg(2).in_dual(&[0.0, 3.0], 0.0).unwrap());
        assert!(Cone::Zero(2).in_dual(&[5.0, -7.0], 0.0).unwrap());
        assert!(!Cone::SecondOrder(3).in_dual(&[1.0, 2.0, 0.0], 1e-9).unwrap());
        assert!(Cone::NonNeg(1).in_dual(&[1.0], -1.0).is_err());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            Cone::NonNeg(3).project(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Cone::Psd(2).distance(&[1.0; 4]).is_err());
    }

    #[test]
    fn product_flattens_and_offsets() {
        let inner = Cone::product(vec![Cone::NonNeg(1), Cone::Zero(2)]);
        let k = Cone::product(vec![inner, Cone::Psd(2), Cone::SecondOrder(3)]);
        let Cone::Product(p) = &k else { panic!() };
        assert_eq!(p.blocks().len(), 4);
        assert_eq!(k.dim(), 1 + 2 + 3 + 3);
        let ranges: Vec<_> = p.iter().map(|(_, r)| r).collect();
        assert_eq!(ranges, vec![0..1, 1..3, 3..6, 6..9]);
        assert_eq!(
            k.dual(),
            Cone::product(vec![
                Cone::NonNeg(1),
                Cone::Free(2),
                Cone::Psd(2),
                Cone::SecondOrder(3)
            ])
        );
    }

    #[test]
    fn cone_point_checks_dimension() {
        let k = Cone::NonNeg(2);
        assert!(ConePoint::new(&k, vec![1.0]).is_err());
        let p = ConePoint::projected(&k, &[-1.0, 2.0]).unwrap();
        assert_eq!(p.coords(), &[0.0, 2.0]);
        assert_eq!(p.membership_residual(), 0.0);
        assert_eq!(p.inner(&[1.0, 1.0]), 2.0);
    }

    fn cones() -> Vec<Cone> {
        vec![
            Cone::Zero(3),
            Cone::NonNeg(5),
            Cone::SecondOrder(4),
            Cone::Psd(3),
            Cone::product(vec![Cone::NonNeg(2), Cone::SecondOrder(3), Cone::Psd(2), Cone::Zero(1)]),
        ]
    }

    #[test]
    fn projection_identities_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for k in cones() {
            for _ in 0..1000 {
                let v: Vec<f64> = gaussian_vector(&mut rng, k.dim())
                    .into_iter()
                    .map(|x: f64| 3.0 * x)
                    .collect();
                let p = k.project(&v).unwrap();
                let pc = sub(&v, &p);
                let nv = norm2(&v);
                assert!(dot(&pc, &p).abs() <= 1e-8 * (1.0 + nv * nv), "{k:?}");
                let neg: Vec<f64> = pc.iter().map(|x| -x).collect();
                assert!(k.dual_distance(&neg).unwrap() <= 1e-8 * (1.0 + nv), "{k:?}");
                assert!(k.distance(&p).unwrap() <= 1e-10 * (1.0 + nv));
                let pp = k.project(&p).unwrap();
                assert!(norm2(&sub(&pp, &p)) <= 1e-10 * (1.0 + nv));
            }
        }
    }

    #[test]
    fn polar_points_project_to_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in cones() {
            for _ in 0..100 {
                let w: Vec<f64> = gaussian_vector(&mut rng, k.dim());
                let dual_point = k.dual().project(&w).unwrap();
                let polar: Vec<f64> = dual_point.iter().map(|x| -x).collect();
                let p = k.project(&polar).unwrap();
                assert!(norm2(&p) <= 1e-10, "{k:?}");
            }
        }
    }

    fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, len)
    }

    proptest! {
        #[test]
        fn firm_nonexpansiveness(
            v1 in vec_strategy(9), v2 in vec_strategy(9),
        ) {
            let k = Cone::product(vec![Cone::NonNeg(3), Cone::Psd(2), Cone::SecondOrder(3)]);
            let (p1, p2) = (k.project(&v1).unwrap(), k.project(&v2).unwrap());
            let (c1, c2) = (sub(&v1, &p1), sub(&v2, &p2));
            let lhs = norm2(&sub(&p1, &p2)).powi(2) + norm2(&sub(&c1, &c2)).powi(2);
            let rhs = norm2(&sub(&v1, &v2)).powi(2);
            prop_assert!(lhs <= rhs + 1e-10 * (1.0 + rhs));
        }

        #[test]
        fn distance_perturbation_bound(
            y in vec_strategy(6), dy in vec_strategy(6),
        ) {
            let k = Cone::Psd(3);
            let shifted: Vec<f64> = y.iter().zip(&dy).map(|(a, b)| a + b).collect();
            let lhs = k.distance(&y).unwrap();
            let rhs = k.distance(&shifted).unwrap() + norm2(&dy);
            prop_assert!(lhs <= rhs + 1e-10);
        }
    }
}
