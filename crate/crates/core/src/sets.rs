//! Simple sets `χ` paired with a regularizer `ρ`.
//!
//! The central operation is the generalized projection
//!
//! ```text
//! argmin { scale·ρ(x) + ||x - x̄||² : x ∈ χ }
//! ```
//!
//! Note the quadratic carries no factor ½. With `ρ = λ||·||₁` the
//! soft-threshold level is therefore `scale·λ/2`, not `scale·λ` as in the
//! usual `½||·||²` convention.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, norm1};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum SetKind<T> {
    /// `{x : lo <= x <= hi}`
    Box { lo: Vec<T>, hi: Vec<T> },
    /// `{x : ||x||₁ <= radius}`
    L1Ball { radius: T },
    /// `{x : ||x - center||₂ <= radius}`
    L2Ball { center: Vec<T>, radius: T },
    /// Unit simplex `{x >= 0 : Σx = 1}`.
    Simplex,
    /// `[-radius, radius]^n`, a compact stand-in for the whole space.
    BoundedWhole { radius: T },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Regularizer<T> {
    Zero,
    L1 { weight: T },
}

impl<T: Scalar> Regularizer<T> {
    pub fn value(&self, x: &[T]) -> T {
        match self {
            Regularizer::Zero => T::zero(),
            Regularizer::L1 { weight } => *weight * norm1(x),
        }
    }
}

/// The pair `(χ, ρ)` with a stored Euclidean diameter of `χ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleSetProx<T> {
    dim: usize,
    set: SetKind<T>,
    reg: Regularizer<T>,
    diameter: T,
}

impl<T: Scalar> SimpleSetProx<T> {
    /// Validates the set parameters and the `(set, regularizer)` pairing.
    ///
    /// Supported pairs: any set with [`Regularizer::Zero`]; `L1` with
    /// `Box`, `BoundedWhole` and `L1Ball`.
    pub fn new(dim: usize, set: SetKind<T>, reg: Regularizer<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("set dimension must be positive".into()));
        }
        let diameter = match &set {
            SetKind::Box { lo, hi } => {
                check_dim("box lower bound", dim, lo.len())?;
                check_dim("box upper bound", dim, hi.len())?;
                if lo.iter().chain(hi).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("box bounds must be finite".into()));
                }
                if lo.iter().zip(hi).any(|(l, h)| l > h) {
                    return Err(Error::InvalidParameter("box needs lo <= hi".into()));
                }
                dist(hi, lo)
            }
            SetKind::L1Ball { radius } => {
                positive_radius(*radius)?;
                *radius + *radius
            }
            SetKind::L2Ball { center, radius } => {
                check_dim("ball center", dim, center.len())?;
                positive_radius(*radius)?;
                *radius + *radius
            }
            SetKind::Simplex => {
                if dim < 2 {
                    return Err(Error::InvalidParameter(
                        "simplex needs at least two coordinates".into(),
                    ));
                }
                T::SQRT_2()
            }
            SetKind::BoundedWhole { radius } => {
                positive_radius(*radius)?;
                (*radius + *radius) * T::from_usize_lossy(dim).sqrt()
            }
        };
        if !(diameter > T::zero()) {
            return Err(Error::InvalidParameter("set has zero diameter".into()));
        }
        if let Regularizer::L1 { weight } = &reg {
            if !(*weight >= T::zero()) || !weight.is_finite() {
                return Err(Error::InvalidParameter("l1 weight must be nonnegative".into()));
            }
            match &set {
                SetKind::Box { .. } | SetKind::BoundedWhole { .. } | SetKind::L1Ball { .. } => {}
                SetKind::L2Ball { .. } => {
                    return Err(Error::Unsupported("l1 regularizer over an l2 ball".into()))
                }
                SetKind::Simplex => {
                    return Err(Error::Unsupported("l1 regularizer over the simplex".into()))
                }
            }
        }
        Ok(Self {
            dim,
            set,
            reg,
            diameter,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&self) -> &SetKind<T> {
        &self.set
    }

    pub fn regularizer(&self) -> &Regularizer<T> {
        &self.reg
    }

    /// Exact Euclidean diameter `Δ_χ`.
    #[inline]
    pub fn diameter(&self) -> T {
        self.diameter
    }

    /// `ρ(x)`
    pub fn reg_value(&self, x: &[T]) -> T {
        self.reg.value(x)
    }

    /// `argmin { scale·ρ(x) + ||x - xbar||² : x ∈ χ }`
    pub fn generalized_projection(&self, xbar: &[T], scale: T) -> Vec<T> {
        assert_eq!(xbar.len(), self.dim, "generalized projection dimension");
        debug_assert!(scale >= T::zero());
        let level = match &self.reg {
            Regularizer::Zero => T::zero(),
            Regularizer::L1 { weight } => scale * *weight * T::lit(0.5),
        };
        match &self.set {
            SetKind::Box { lo, hi } => xbar
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&l, &h))| soft_threshold(v, level).max(l).min(h))
                .collect(),
            SetKind::BoundedWhole { radius } => xbar
                .iter()
                .map(|&v| soft_threshold(v, level).max(-*radius).min(*radius))
                .collect(),
            SetKind::L1Ball { radius } => {
                let theta = l1_ball_threshold(xbar, *radius, level);
                xbar.iter().map(|&v| soft_threshold(v, theta)).collect()
            }
            SetKind::L2Ball { center, radius } => {
                let d = dist(xbar, center);
                if d <= *radius {
                    xbar.to_vec()
                } else {
                    let s = *radius / d;
                    xbar.iter()
                        .zip(center)
                        .map(|(&v, &c)| c + (v - c) * s)
                        .collect()
                }
            }
            SetKind::Simplex => simplex_project(xbar),
        }
    }

    /// Euclidean projection onto `χ` (the generalized projection with `scale = 0`).
    pub fn project(&self, x: &[T]) -> Vec<T> {
        self.generalized_projection(x, T::zero())
    }

    /// `d_χ(x)`
    pub fn distance_to(&self, x: &[T]) -> T {
        dist(x, &self.project(x))
    }

    pub fn contains(&self, x: &[T], tol: T) -> bool {
        x.len() == self.dim && self.distance_to(x) <= tol
    }

    /// Objective of the generalized projection evaluated at `x`.
    pub fn prox_objective(&self, x: &[T], xbar: &[T], scale: T) -> T {
        let d = dist(x, xbar);
        scale * self.reg_value(x) + d * d
    }
}

fn positive_radius<T: Scalar>(r: T) -> Result<()> {
    if r > T::zero() && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("radius must be positive and finite".into()))
    }
}

#[inline]
pub fn soft_threshold<T: Scalar>(v: T, level: T) -> T {
    if v > level {
        v - level
    } else if v < -level {
        v + level
    } else {
        T::zero()
    }
}

/// Threshold `θ >= floor` such that soft-thresholding `xbar` at `θ` lands in
/// the ℓ₁ ball of the given radius, with `θ = floor` whenever that already
/// suffices.
///
/// Solves `Σ max(|x̄ᵢ| - θ, 0) = radius` exactly by sorting magnitudes.
pub fn l1_ball_threshold<T: Scalar>(xbar: &[T], radius: T, floor: T) -> T {
    let shrunk: T = xbar.iter().map(|&v| (v.abs() - floor).max(T::zero())).sum();
    if shrunk <= radius {
        return floor;
    }
    let mut mags: Vec<T> = xbar.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut theta = floor;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - radius) / T::from_usize_lossy(j + 1);
        if u > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    theta.max(floor)
}

/// Euclidean projection onto the unit simplex (sort and threshold).
pub fn simplex_project<T: Scalar>(xbar: &[T]) -> Vec<T> {
    if xbar.is_empty() {
        return Vec::new();
    }
    let mut u = xbar.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let candidate = (cumsum - T::one()) / T::from_usize_lossy(j + 1);
        if uj > candidate {
            theta = candidate;
        }
    }
    xbar.iter().map(|&v| (v - theta).max(T::zero())).collect()
}

/// Convenience for checking a result lies in the set up to `tol`.
pub fn membership_residual<T: Scalar>(set: &SimpleSetProx<T>, x: &[T]) -> T {
    match &set.set {
        SetKind::Simplex => {
            let neg = x.iter().fold(T::zero(), |acc, &v| acc.max(-v));
            let sum: T = x.iter().copied().sum();
            neg.max((sum - T::one()).abs())
        }
        SetKind::L1Ball { radius } => (norm1(x) - *radius).max(T::zero()),
        _ => set.distance_to(x),
    }
}
