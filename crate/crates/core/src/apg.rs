//! Accelerated proximal gradient (FISTA) for `min { ρ̄(x) + γ̄(x) : x ∈ χ }`.
//!
//! Each step takes a proximal gradient step with the constant `1/L_γ̄` from
//! the extrapolated point and then advances the momentum recursion
//! `t⁺ = (1 + sqrt(1 + 4t²))/2`. There is no line search and no restart.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{all_finite, norm2};
use crate::scalar::Scalar;
use crate::sets::SimpleSetProx;
use crate::smooth::SmoothFunction;

/// Iteration count at which [`apg_minimize`] gives up regardless of the stopping rule.
pub const HARD_ITERATION_CAP: usize = 10_000_000;

/// Consecutive steps that must move the iterate by at most a few ulps before
/// the stall test fires.
const STALL_STEPS: usize = 2;

/// Problem data for one APG run.
///
/// `ρ̄ = reg_scale·ρ` where `ρ` is the regularizer carried by `prox`.
pub struct ApgProblem<'a, T: Scalar> {
    prox: &'a SimpleSetProx<T>,
    smooth: &'a dyn SmoothFunction<T>,
    reg_scale: T,
    lipschitz: T,
    distance_bound: T,
    start: Vec<T>,
}

impl<'a, T: Scalar> ApgProblem<'a, T> {
    /// Defaults: `reg_scale = 1`, `L_γ̄` from `smooth`, distance bound `Δ_χ`.
    pub fn new(
        prox: &'a SimpleSetProx<T>,
        smooth: &'a dyn SmoothFunction<T>,
        start: Vec<T>,
    ) -> Result<Self> {
        check_dim("apg smooth part", prox.dim(), smooth.dim())?;
        check_dim("apg start point", prox.dim(), start.len())?;
        if !all_finite(&start) {
            return Err(Error::NumericFailure("non-finite start point".into()));
        }
        let scale = T::one() + start.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let tol = T::lit(1e-10).max(T::epsilon() * T::lit(100.0)) * scale;
        if prox.distance_to(&start) > tol {
            return Err(Error::InvalidParameter("apg start point lies outside the set".into()));
        }
        Ok(Self {
            prox,
            smooth,
            reg_scale: T::one(),
            lipschitz: smooth.lipschitz(),
            distance_bound: prox.diameter(),
            start,
        })
    }

    pub fn with_reg_scale(mut self, reg_scale: T) -> Result<Self> {
        if !(reg_scale >= T::zero()) || !reg_scale.is_finite() {
            return Err(Error::InvalidParameter("regularizer scale must be nonnegative".into()));
        }
        self.reg_scale = reg_scale;
        Ok(self)
    }

    /// Overrides the gradient Lipschitz constant used as the step constant.
    pub fn with_lipschitz(mut self, lipschitz: T) -> Result<Self> {
        self.lipschitz = lipschitz;
        Ok(self)
    }

    /// Upper bound on `||x₀ - x*||` used in the reported accuracy guarantee.
    pub fn with_distance_bound(mut self, d: T) -> Self {
        self.distance_bound = d;
        self
    }

    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    pub fn start(&self) -> &[T] {
        &self.start
    }

    /// `ρ̄(x) + γ̄(x)`
    pub fn objective(&self, x: &[T]) -> T {
        self.reg_scale * self.prox.reg_value(x) + self.smooth.value(x)
    }

    fn check_lipschitz(&self) -> Result<()> {
        if self.lipschitz > T::zero() && self.lipschitz.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "apg needs a positive finite Lipschitz constant, got {}",
                self.lipschitz
            )))
        }
    }

    /// The proximal gradient map from `point` given `∇γ̄(point)`.
    fn prox_grad(&self, point: &[T], grad: &[T]) -> Vec<T> {
        let inv_l = T::one() / self.lipschitz;
        let target: Vec<T> = point.iter().zip(grad).map(|(&p, &g)| p - g * inv_l).collect();
        // argmin ρ̄(x) + <g, x - p> + (L/2)||x - p||²  ==  argmin (2ρ̄/L)(x) + ||x - target||²
        let scale = (self.reg_scale + self.reg_scale) * inv_l;
        self.prox.generalized_projection(&target, scale)
    }
}

/// Iterate of the APG recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct ApgState<T> {
    /// Main iterate `x_ℓ^(1)`, always in `χ`.
    pub x1: Vec<T>,
    /// Previous main iterate `x_{ℓ-1}^(1)`.
    pub x1_prev: Vec<T>,
    /// Extrapolated point `x_{ℓ+1}^(2)` used by the next step; may leave `χ`.
    pub x2: Vec<T>,
    /// Momentum scalar paired with `x2`.
    pub t: T,
    pub iter: usize,
}

impl<T: Scalar> ApgState<T> {
    pub fn new(start: &[T]) -> Self {
        Self {
            x1: start.to_vec(),
            x1_prev: start.to_vec(),
            x2: start.to_vec(),
            t: T::one(),
            iter: 0,
        }
    }
}

/// `t⁺ = (1 + sqrt(1 + 4t²)) / 2`
#[inline]
pub fn next_momentum<T: Scalar>(t: T) -> T {
    (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) * T::lit(0.5)
}

fn step_with_gradient<T: Scalar>(
    state: &ApgState<T>,
    prob: &ApgProblem<'_, T>,
) -> Result<(ApgState<T>, Vec<T>)> {
    prob.check_lipschitz()?;
    let grad = prob.smooth.gradient(&state.x2);
    if !all_finite(&grad) {
        return Err(Error::NumericFailure(format!(
            "non-finite gradient at apg iteration {}",
            state.iter + 1
        )));
    }
    let x1 = prob.prox_grad(&state.x2, &grad);
    let t_next = next_momentum(state.t);
    let beta = (state.t - T::one()) / t_next;
    let x2 = x1
        .iter()
        .zip(&state.x1)
        .map(|(&a, &b)| a + beta * (a - b))
        .collect();
    let next = ApgState {
        x1_prev: state.x1.clone(),
        x1,
        x2,
        t: t_next,
        iter: state.iter + 1,
    };
    Ok((next, grad))
}

/// One APG iteration.
pub fn apg_step<T: Scalar>(state: &ApgState<T>, prob: &ApgProblem<'_, T>) -> Result<ApgState<T>> {
    step_with_gradient(state, prob).map(|(s, _)| s)
}

/// When to stop the APG loop. At least one criterion must be set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingRule<T> {
    pub max_iters: Option<usize>,
    pub gradient_tol: Option<T>,
    /// Also stop once steps no longer move the iterate beyond rounding error.
    pub stall_check: bool,
}

impl<T: Scalar> StoppingRule<T> {
    pub fn max_iters(n: usize) -> Self {
        Self {
            max_iters: Some(n),
            gradient_tol: None,
            stall_check: false,
        }
    }

    pub fn composite_gradient(tol: T) -> Self {
        Self {
            max_iters: None,
            gradient_tol: Some(tol),
            stall_check: false,
        }
    }

    pub fn both(n: usize, tol: T) -> Self {
        Self {
            max_iters: Some(n),
            gradient_tol: Some(tol),
            stall_check: false,
        }
    }

    pub fn with_stall_check(mut self) -> Self {
        self.stall_check = true;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    CompositeGradient,
    /// The iterate stopped changing beyond rounding error.
    Stalled,
}

#[derive(Clone, Debug)]
pub struct ApgOutcome<T> {
    pub x: Vec<T>,
    pub iters: usize,
    /// `2 L D² / (iters + 1)²`, the accuracy guaranteed after `iters` steps
    /// when `D` bounds the distance from the start to a minimizer.
    pub gap_bound: T,
    pub stopped_by: StopReason,
    /// `q = ∇γ̄(x₁⁺) - ∇γ̄(x₂) - L(x₁⁺ - x₂)`, a subgradient of the composite
    /// objective plus the normal cone of `χ` at `x`. Present whenever a step
    /// was taken under a gradient stopping rule.
    pub certificate: Option<Vec<T>>,
    pub certificate_norm: Option<T>,
}

/// Runs APG until the stopping rule fires.
pub fn apg_minimize<T: Scalar>(
    prob: &ApgProblem<'_, T>,
    stop: &StoppingRule<T>,
) -> Result<ApgOutcome<T>> {
    apg_minimize_observed(prob, stop, |_| {})
}

/// [`apg_minimize`] with a callback invoked on every state, starting with the initial one.
pub fn apg_minimize_observed<T: Scalar>(
    prob: &ApgProblem<'_, T>,
    stop: &StoppingRule<T>,
    mut observe: impl FnMut(&ApgState<T>),
) -> Result<ApgOutcome<T>> {
    if stop.max_iters.is_none() && stop.gradient_tol.is_none() {
        return Err(Error::InvalidParameter("stopping rule has no criterion".into()));
    }
    prob.check_lipschitz()?;
    let mut state = ApgState::new(&prob.start);
    observe(&state);
    let mut last_q: Option<(Vec<T>, T)> = None;
    let mut still = 0usize;
    let finish = |state: ApgState<T>, reason, q: Option<(Vec<T>, T)>| {
        let k = T::from_usize_lossy(state.iter + 1);
        let d = prob.distance_bound;
        let (certificate, certificate_norm) = match q {
            Some((v, n)) => (Some(v), Some(n)),
            None => (None, None),
        };
        ApgOutcome {
            gap_bound: T::lit(2.0) * prob.lipschitz * d * d / (k * k),
            x: state.x1,
            iters: state.iter,
            stopped_by: reason,
            certificate,
            certificate_norm,
        }
    };
    loop {
        if let Some(cap) = stop.max_iters {
            if state.iter >= cap {
                return Ok(finish(state, StopReason::MaxIters, last_q));
            }
        }
        if state.iter >= HARD_ITERATION_CAP {
            return Err(Error::NonConvergence {
                iterations: state.iter,
                residual: last_q.map_or(f64::NAN, |(_, n)| n.as_f64()),
            });
        }
        let x2 = state.x2.clone();
        let (next, grad_x2) = step_with_gradient(&state, prob)?;
        state = next;
        observe(&state);
        if stop.stall_check {
            let size = state.x1.iter().fold(T::one(), |a, v| a.max(v.abs()));
            let moved = state
                .x1
                .iter()
                .zip(&state.x1_prev)
                .fold(T::zero(), |a, (&u, &v)| a.max((u - v).abs()));
            still = if moved <= T::lit(4.0) * T::epsilon() * size {
                still + 1
            } else {
                0
            };
        }
        if let Some(tol) = stop.gradient_tol {
            let grad_x1 = prob.smooth.gradient(&state.x1);
            let l = prob.lipschitz;
            let q: Vec<T> = grad_x1
                .iter()
                .zip(&grad_x2)
                .zip(state.x1.iter().zip(&x2))
                .map(|((&g1, &g2), (&a, &b))| g1 - g2 - l * (a - b))
                .collect();
            let qn = norm2(&q);
            if !qn.is_finite() {
                return Err(Error::NumericFailure(
                    "non-finite composite gradient".into(),
                ));
            }
            let fired = qn <= tol;
            last_q = Some((q, qn));
            if fired {
                return Ok(finish(state, StopReason::CompositeGradient, last_q));
            }
        }
        if still >= STALL_STEPS {
            return Ok(finish(state, StopReason::Stalled, last_q));
        }
    }
}

/// Smallest `ℓ >= sqrt(2L/ε)·D - 1`: iterations after which the APG iterate
/// is `ε`-optimal when `D` bounds the distance from the start to a minimizer.
pub fn iterations_for_accuracy<T: Scalar>(lipschitz: T, eps: T, distance: T) -> usize {
    let raw = (T::lit(2.0) * lipschitz / eps).sqrt() * distance - T::one();
    ceil_snapped(raw)
}

/// `ceil(x)` that treats values within 1e-9 relative of an integer as that
/// integer, so that exact bounds are not pushed up by rounding error.
pub fn ceil_snapped<T: Scalar>(x: T) -> usize {
    if !(x > T::zero()) {
        return 0;
    }
    if !x.is_finite() {
        return usize::MAX;
    }
    let r = x.round();
    let v = if (x - r).abs() <= T::lit(1e-9) * x.max(T::one()) {
        r
    } else {
        x.ceil()
    };
    v.to_usize().unwrap_or(usize::MAX)
}
