//! Inexact augmented Lagrangian method for conic convex programs.
//!
//! Solves
//!
//! ```text
//! min { ρ(x) + γ(x) : Ax - b ∈ K, x ∈ χ }
//! ```
//!
//! by approximately minimizing the penalty Lagrangian
//! `L_μ(x, y) = p(x) + (μ/2)·d_K(Ax - b - y/μ)² - ||y||²/(2μ)` over `χ` with
//! APG, updating the multiplier `y ← μ[Π_K(v) - v]` with
//! `v = Ax - b - y/μ`, and growing `μ` geometrically while the inner
//! tolerances `α_k`, `η_k` shrink.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::apg::{
    apg_minimize, ceil_snapped, ApgProblem, StopReason, StoppingRule, HARD_ITERATION_CAP,
};
use crate::cones::Cone;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    all_finite, default_power_iterations, dist, dot, norm2, spectral_norm, LinearMap,
};
use crate::scalar::Scalar;
use crate::sets::SimpleSetProx;
use crate::smooth::{SmoothFunction, SmoothPart};

/// Safety factor applied to the estimated `σ_max(A)` before it enters the
/// APG step constant.
pub const SIGMA_SAFETY: f64 = 1.01;

/// Multiple of machine epsilon, relative to the magnitudes entering the
/// composite gradient, below which the inner gradient tolerance is not pushed.
pub const NOISE_FLOOR_FACTOR: f64 = 1.0;

/// Known optimal values used to audit per-iterate bounds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Reference<T> {
    pub p_star: Option<T>,
    pub x_star: Option<Vec<T>>,
    pub y_star: Option<Vec<T>>,
}

/// A conic program `min { ρ(x) + γ(x) : Ax - b ∈ K, x ∈ χ }`.
#[derive(Clone)]
pub struct ConicProgram<T: Scalar> {
    prox: SimpleSetProx<T>,
    smooth: SmoothPart<T>,
    map: LinearMap<T>,
    offset: Vec<T>,
    cone: Cone,
    witness: Option<Vec<T>>,
    reference: Option<Reference<T>>,
}

impl<T: Scalar> std::fmt::Debug for ConicProgram<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConicProgram")
            .field("dim", &self.prox.dim())
            .field("rows", &self.offset.len())
            .field("cone", &self.cone)
            .field("has_witness", &self.witness.is_some())
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> ConicProgram<T> {
    pub fn new(
        prox: SimpleSetProx<T>,
        smooth: SmoothPart<T>,
        map: LinearMap<T>,
        offset: Vec<T>,
        cone: Cone,
    ) -> Result<Self> {
        let n = prox.dim();
        check_dim("smooth part dimension", n, smooth.dim())?;
        check_dim("linear map input dimension", n, map.in_dim())?;
        check_dim("offset b", map.out_dim(), offset.len())?;
        check_dim("cone dimension", map.out_dim(), cone.dim())?;
        if !all_finite(&offset) {
            return Err(Error::NumericFailure("non-finite offset b".into()));
        }
        Ok(Self {
            prox,
            smooth,
            map,
            offset,
            cone,
            witness: None,
            reference: None,
        })
    }

    /// Attaches a feasible point, which also becomes the starting iterate.
    pub fn with_witness(mut self, x: Vec<T>) -> Result<Self> {
        check_dim("feasibility witness", self.dim(), x.len())?;
        let tol = T::lit(1e-8) * (T::one() + norm2(&self.offset));
        if self.prox.distance_to(&x) > tol {
            return Err(Error::InvalidParameter("witness lies outside the simple set".into()));
        }
        let infeas = self.infeasibility(&x);
        if infeas > tol {
            return Err(Error::InvalidParameter(format!(
                "witness violates the conic constraint by {infeas:e}"
            )));
        }
        self.witness = Some(x);
        Ok(self)
    }

    pub fn with_reference(mut self, reference: Reference<T>) -> Result<Self> {
        if let Some(x) = &reference.x_star {
            check_dim("reference x*", self.dim(), x.len())?;
        }
        if let Some(y) = &reference.y_star {
            check_dim("reference y*", self.rows(), y.len())?;
        }
        self.reference = Some(reference);
        Ok(self)
    }

    /// Number of variables `n`.
    pub fn dim(&self) -> usize {
        self.prox.dim()
    }

    /// Number of conic rows `m`.
    pub fn rows(&self) -> usize {
        self.offset.len()
    }

    pub fn prox(&self) -> &SimpleSetProx<T> {
        &self.prox
    }

    pub fn smooth(&self) -> &dyn SmoothFunction<T> {
        self.smooth.as_ref()
    }

    pub fn map(&self) -> &LinearMap<T> {
        &self.map
    }

    pub fn offset(&self) -> &[T] {
        &self.offset
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn witness(&self) -> Option<&[T]> {
        self.witness.as_deref()
    }

    pub fn reference(&self) -> Option<&Reference<T>> {
        self.reference.as_ref()
    }

    /// Starting iterate: the witness if present, otherwise the projection of
    /// the origin onto `χ`.
    pub fn start_point(&self) -> Vec<T> {
        match &self.witness {
            Some(x) => x.clone(),
            None => self.prox.project(&vec![T::zero(); self.dim()]),
        }
    }

    /// `p(x) = ρ(x) + γ(x)`
    pub fn objective(&self, x: &[T]) -> T {
        self.prox.reg_value(x) + self.smooth.value(x)
    }

    /// `Ax - b`
    pub fn residual(&self, x: &[T]) -> Vec<T> {
        let mut r = self.map.apply(x);
        r.iter_mut().zip(&self.offset).for_each(|(ri, &bi)| *ri -= bi);
        r
    }

    /// `d_K(Ax - b)`
    pub fn infeasibility(&self, x: &[T]) -> T {
        self.cone
            .distance(&self.residual(x))
            .expect("dimensions checked at construction")
    }

    /// `v = Ax - b - y/μ`
    pub fn shifted_residual(&self, x: &[T], y: &[T], mu: T) -> Vec<T> {
        let mut v = self.residual(x);
        v.iter_mut().zip(y).for_each(|(vi, &yi)| *vi -= yi / mu);
        v
    }
}

/// Parameters of the geometric schedule
/// `μ_k = β^k μ₀`, `α_k = α₀ / (k^{2(1+c)} β^k)`, `η_k = η₀ / (k^{2(1+c)} β^k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig<T> {
    pub alpha0: T,
    pub eta0: T,
    pub mu0: T,
    pub beta: T,
    pub c: T,
    pub max_outer: usize,
    pub target_eps: T,
    /// Stop as soon as the certificate reaches `target_eps`; when false all
    /// `max_outer` iterations run.
    pub stop_at_target: bool,
    /// Seed for the start vector of the spectral norm estimate.
    pub seed: u64,
}

impl<T: Scalar> Default for ScheduleConfig<T> {
    fn default() -> Self {
        Self {
            alpha0: T::one(),
            eta0: T::one(),
            mu0: T::one(),
            beta: T::lit(2.0),
            c: T::lit(0.5),
            max_outer: 60,
            target_eps: T::lit(1e-6),
            stop_at_target: true,
            seed: 0,
        }
    }
}

impl<T: Scalar> ScheduleConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("alpha0", self.alpha0)?;
        positive("eta0", self.eta0)?;
        positive("mu0", self.mu0)?;
        positive("c", self.c)?;
        positive("target_eps", self.target_eps)?;
        if !(self.beta > T::one()) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must exceed 1, got {}",
                self.beta
            )));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter("max_outer must be at least 1".into()));
        }
        Ok(())
    }

    fn decay(&self, k: usize) -> T {
        let kk = T::from_usize_lossy(k);
        let exponent = T::lit(2.0) * (T::one() + self.c);
        T::one() / (kk.powf(exponent) * self.beta.powi(k as i32))
    }

    /// `μ_k`, for `k >= 1`.
    pub fn mu(&self, k: usize) -> T {
        self.beta.powi(k as i32) * self.mu0
    }

    /// `α_k`, for `k >= 1`.
    pub fn alpha(&self, k: usize) -> T {
        self.alpha0 * self.decay(k)
    }

    /// `η_k`, for `k >= 1`.
    pub fn eta(&self, k: usize) -> T {
        self.eta0 * self.decay(k)
    }

    /// Computable majorant `max{α_k, η_k Δ_χ}` of the inexactness budget `ξ^(k)`.
    pub fn xi_majorant(&self, k: usize, diameter: T) -> T {
        self.alpha(k).max(self.eta(k) * diameter)
    }
}

/// Inner iteration cap `ceil( sqrt(2 μ_k L_k / α_k) · D )`.
pub fn inner_iteration_cap<T: Scalar>(mu: T, lipschitz: T, alpha: T, distance: T) -> usize {
    ceil_snapped((T::lit(2.0) * mu * lipschitz * distance * distance / alpha).sqrt())
}

/// `L_μ(x, y) = p(x) + (μ/2)·d_K(Ax - b - y/μ)² - ||y||²/(2μ)`
pub fn penalty_lagrangian<T: Scalar>(prog: &ConicProgram<T>, x: &[T], y: &[T], mu: T) -> Result<T> {
    if !(mu > T::zero()) {
        return Err(Error::InvalidParameter("penalty parameter must be positive".into()));
    }
    check_dim("dual variable", prog.rows(), y.len())?;
    let v = prog.shifted_residual(x, y, mu);
    let d = prog.cone.distance(&v)?;
    let half = T::lit(0.5);
    Ok(prog.objective(x) + half * mu * d * d - norm2(y).powi(2) * half / mu)
}

/// `∇_x f_k(x, y) = Aᵀ(v - Π_K(v))` with `v = Ax - b - y/μ`.
pub fn subproblem_gradient<T: Scalar>(prog: &ConicProgram<T>, x: &[T], y: &[T], mu: T) -> Vec<T> {
    debug_assert!(mu > T::zero());
    let v = prog.shifted_residual(x, y, mu);
    let pc = prog
        .cone
        .project_complement(&v)
        .expect("dimensions checked at construction");
    prog.map.apply_adjoint(&pc)
}

/// `y⁺ = μ[Π_K(v) - v]`
pub fn dual_update<T: Scalar>(v: &[T], mu: T, cone: &Cone) -> Result<Vec<T>> {
    let p = cone.project(v)?;
    Ok(p.iter().zip(v).map(|(&pi, &vi)| mu * (pi - vi)).collect())
}

/// Smooth part of the `k`-th subproblem, `γ(x)/μ + ½ d_K(Ax - b - y/μ)²`.
struct SubproblemSmooth<'a, T: Scalar> {
    prog: &'a ConicProgram<T>,
    y: &'a [T],
    mu: T,
    lipschitz: T,
}

impl<T: Scalar> SmoothFunction<T> for SubproblemSmooth<'_, T> {
    fn dim(&self) -> usize {
        self.prog.dim()
    }

    fn value(&self, x: &[T]) -> T {
        let v = self.prog.shifted_residual(x, self.y, self.mu);
        let d = self.prog.cone.distance(&v).expect("checked dimensions");
        self.prog.smooth.value(x) / self.mu + T::lit(0.5) * d * d
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut g = subproblem_gradient(self.prog, x, self.y, self.mu);
        let gs = self.prog.smooth.gradient(x);
        g.iter_mut().zip(&gs).for_each(|(a, &b)| *a += b / self.mu);
        g
    }

    fn lipschitz(&self) -> T {
        self.lipschitz
    }
}

/// Which inexactness condition the oracle certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleCondition {
    /// Function gap at most `α_k/μ_k`, guaranteed by running the full iteration cap.
    FunctionGap,
    /// Composite subgradient of norm at most `η_k/μ_k`.
    Subgradient,
    /// `η_k/μ_k` lies below rounding noise; the subgradient reached the noise
    /// floor or the iterate stopped changing.
    RoundingFloor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCert<T> {
    pub condition: OracleCondition,
    /// `α_k/μ_k` for the gap path, `||q||` for the subgradient path.
    pub value: T,
    /// The iteration cap `ℓ_max(k)` in force.
    pub iteration_cap: usize,
}

#[derive(Clone, Debug)]
pub struct OracleOutput<T> {
    pub x: Vec<T>,
    pub inner_iters: usize,
    pub cert: OracleCert<T>,
}

/// Residuals of the KKT conditions for a primal-dual pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals<T> {
    /// `d_K(Ax - b)`
    pub primal_infeas: T,
    /// `d_{K*}(y)`
    pub dual_membership: T,
    /// `|<y, Π_K(Ax - b)>|`
    pub complementarity: T,
    /// `||x - prox(x - ∇_x L_μ(x, y))||`, the natural composite-gradient residual.
    pub stationarity: T,
}

impl<T: Scalar> Residuals<T> {
    pub fn max(&self) -> T {
        self.primal_infeas
            .max(self.dual_membership)
            .max(self.complementarity)
            .max(self.stationarity)
    }

    fn scaled(&self, s: T) -> Self {
        Self {
            primal_infeas: self.primal_infeas / s,
            dual_membership: self.dual_membership / s,
            complementarity: self.complementarity / s,
            stationarity: self.stationarity / s,
        }
    }
}

/// KKT residuals in absolute and `(1 + ||b||)`-relative form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate<T> {
    pub absolute: Residuals<T>,
    pub relative: Residuals<T>,
}

/// KKT residuals of `(x, y)`; stationarity is measured on `L_μ(·, y)` over `χ`.
pub fn kkt_certificate<T: Scalar>(prog: &ConicProgram<T>, x: &[T], y: &[T], mu: T) -> Certificate<T> {
    let r = prog.residual(x);
    let cone = &prog.cone;
    let pr = cone.project(&r).expect("checked dimensions");
    let primal_infeas = dist(&r, &pr);
    let dual_membership = cone.dual_distance(y).expect("checked dimensions");
    let complementarity = dot(y, &pr).abs();

    let mut grad = subproblem_gradient(prog, x, y, mu);
    grad.iter_mut().for_each(|g| *g *= mu);
    let gs = prog.smooth.gradient(x);
    grad.iter_mut().zip(&gs).for_each(|(a, &b)| *a += b);
    let target: Vec<T> = x.iter().zip(&grad).map(|(&a, &g)| a - g).collect();
    // argmin ρ(z) + <g, z - x> + ½||z - x||²
    let stepped = prog.prox.generalized_projection(&target, T::lit(2.0));
    let stationarity = dist(x, &stepped);

    let absolute = Residuals {
        primal_infeas,
        dual_membership,
        complementarity,
        stationarity,
    };
    Certificate {
        absolute,
        relative: absolute.scaled(T::one() + norm2(&prog.offset)),
    }
}

/// Audits of the per-iterate bounds. Each value is `lhs - rhs` of an
/// inequality that should hold, so a nonpositive value means the bound held.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundResiduals<T> {
    /// `d_K(Ax_k - b) - (||y_k|| + ||y_{k+1} - y_k||)/μ_k`
    pub infeasibility: T,
    /// `(p(x_k) - p*) - (ξ_k + ||y_k||²/(2μ_k))`; needs `p*`.
    pub suboptimality_upper: Option<T>,
    /// `(-||y*||·d_K(Ax_k - b - y_k/μ_k) + <y_k, y*>/μ_k) - (p(x_k) - p*)`; needs `p*` and `y*`.
    pub suboptimality_lower: Option<T>,
    /// `||y_k|| - (Σ_{j<k} sqrt(2 ξ_j μ_j) + ||y*||)`; needs `y*`.
    pub dual_norm: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterIterate<T> {
    pub k: usize,
    pub x: Vec<T>,
    /// `y_k`, the multiplier used by this subproblem.
    pub y: Vec<T>,
    /// `y_{k+1}`, produced by the dual update after this subproblem.
    pub y_next: Vec<T>,
    pub mu: T,
    pub alpha: T,
    pub eta: T,
    pub inner_iters: usize,
    pub oracle: OracleCert<T>,
    /// `d_K(Ax_k - b)`
    pub infeas: T,
    /// `d_K(Ax_k - b - y_k/μ_k)`
    pub shifted_infeas: T,
    /// `p(x_k)`
    pub obj: T,
    /// `max{α_k, η_k Δ_χ}`
    pub xi: T,
    pub bounds: BoundResiduals<T>,
    pub certificate: Certificate<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxOuterReached,
    NumericFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace<T> {
    pub iterates: Vec<OuterIterate<T>>,
    pub status: SolveStatus,
    pub final_kkt: Option<Certificate<T>>,
    /// Estimated `σ_max(A)` before the safety factor.
    pub sigma_max: T,
    /// Reason for a numeric failure, if any.
    pub failure: Option<String>,
}

impl<T: Scalar> SolveTrace<T> {
    pub fn last(&self) -> Option<&OuterIterate<T>> {
        self.iterates.last()
    }

    /// Primal point of the last outer iterate.
    pub fn solution(&self) -> Option<&[T]> {
        self.last().map(|it| it.x.as_slice())
    }

    /// Most recent multiplier `y_{N+1}`.
    pub fn final_dual(&self) -> Option<&[T]> {
        self.last().map(|it| it.y_next.as_slice())
    }

    pub fn total_inner_iters(&self) -> usize {
        self.iterates.iter().map(|it| it.inner_iters).sum()
    }
}

/// Solver state shared by the outer iterations of one solve.
pub struct Alcc<'a, T: Scalar> {
    prog: &'a ConicProgram<T>,
    schedule: ScheduleConfig<T>,
    sigma_max: T,
}

impl<'a, T: Scalar> Alcc<'a, T> {
    /// Validates the schedule and estimates `σ_max(A)` once.
    pub fn new(prog: &'a ConicProgram<T>, schedule: ScheduleConfig<T>) -> Result<Self> {
        schedule.validate()?;
        let dim = prog.dim().max(prog.rows());
        let tol = T::lit(1e-8).max(T::epsilon() * T::lit(10.0));
        let sigma_max = spectral_norm(prog.map(), tol, default_power_iterations(dim), schedule.seed)?;
        Ok(Self {
            prog,
            schedule,
            sigma_max,
        })
    }

    pub fn sigma_max(&self) -> T {
        self.sigma_max
    }

    pub fn schedule(&self) -> &ScheduleConfig<T> {
        &self.schedule
    }

    /// `L_γ̄_k = L_γ/μ_k + σ²_max(A)`, with the safety factor on `σ_max`.
    pub fn subproblem_lipschitz(&self, k: usize) -> T {
        self.subproblem_lipschitz_at(self.schedule.mu(k))
    }

    /// `ℓ_max(k)` with `d_{χ*_k}(x_{k-1})` majorized by `Δ_χ`.
    pub fn iteration_cap(&self, k: usize) -> usize {
        inner_iteration_cap(
            self.schedule.mu(k),
            self.subproblem_lipschitz(k),
            self.schedule.alpha(k),
            self.prog.prox.diameter(),
        )
    }

    /// Size of the rounding error in the composite gradient near `x`. Once
    /// `η_k/μ_k` falls below it the gradient test could never fire.
    pub fn certificate_noise_floor(&self, y: &[T], mu: T, x: &[T]) -> T {
        let s = self.sigma_max * T::lit(SIGMA_SAFETY);
        let scale = self.subproblem_lipschitz_at(mu) * (T::one() + norm2(x))
            + s * (norm2(&self.prog.offset) + norm2(y) / mu)
            + norm2(&self.prog.smooth.gradient(x)) / mu;
        T::lit(NOISE_FLOOR_FACTOR) * T::epsilon() * scale
    }

    fn subproblem_lipschitz_at(&self, mu: T) -> T {
        let s = self.sigma_max * T::lit(SIGMA_SAFETY);
        let l = self.prog.smooth.lipschitz() / mu + s * s;
        if l > T::zero() {
            l
        } else {
            // A ≡ 0 and γ affine: any positive constant is a valid step constant
            T::one()
        }
    }

    /// Approximately minimizes `P_k(·, y_k)` over `χ`, warm-started at `warm`.
    pub fn oracle(&self, y: &[T], k: usize, warm: &[T]) -> Result<OracleOutput<T>> {
        if k == 0 {
            return Err(Error::InvalidParameter("outer index starts at 1".into()));
        }
        check_dim("oracle multiplier", self.prog.rows(), y.len())?;
        let mu = self.schedule.mu(k);
        let alpha = self.schedule.alpha(k);
        let eta = self.schedule.eta(k);
        let lipschitz = self.subproblem_lipschitz(k);
        let smooth = SubproblemSmooth {
            prog: self.prog,
            y,
            mu,
            lipschitz,
        };
        let cap = self.iteration_cap(k);
        let problem = ApgProblem::new(&self.prog.prox, &smooth, warm.to_vec())?
            .with_reg_scale(T::one() / mu)?
            .with_lipschitz(lipschitz)?;
        let floor = self.certificate_noise_floor(y, mu, warm);
        let tol = (eta / mu).max(floor);
        let rule = StoppingRule::both(cap.min(HARD_ITERATION_CAP), tol).with_stall_check();
        let outcome = apg_minimize(&problem, &rule)?;
        let q_norm = outcome.certificate_norm.unwrap_or(T::zero());
        let cert = match outcome.stopped_by {
            StopReason::MaxIters if cap > HARD_ITERATION_CAP => {
                return Err(Error::NonConvergence {
                    iterations: outcome.iters,
                    residual: q_norm.as_f64(),
                })
            }
            StopReason::MaxIters => OracleCert {
                condition: OracleCondition::FunctionGap,
                value: alpha / mu,
                iteration_cap: cap,
            },
            StopReason::CompositeGradient if q_norm <= eta / mu => OracleCert {
                condition: OracleCondition::Subgradient,
                value: q_norm,
                iteration_cap: cap,
            },
            StopReason::CompositeGradient | StopReason::Stalled => OracleCert {
                condition: OracleCondition::RoundingFloor,
                value: q_norm,
                iteration_cap: cap,
            },
        };
        Ok(OracleOutput {
            x: outcome.x,
            inner_iters: outcome.iters,
            cert,
        })
    }

    /// Runs the outer loop from `y₁ = 0` until the KKT residuals (and the
    /// reference gap, when `p*` is known) fall below `target_eps`, or
    /// `max_outer` iterations have run.
    pub fn solve(&self) -> SolveTrace<T> {
        let prog = self.prog;
        let sched = &self.schedule;
        let diameter = prog.prox.diameter();
        let reference = prog.reference.clone().unwrap_or_default();
        let y_star_norm = reference.y_star.as_ref().map(|y| norm2(y));
        let half = T::lit(0.5);

        let mut x_prev = prog.start_point();
        let mut y = vec![T::zero(); prog.rows()];
        let mut dual_budget = T::zero();
        let mut iterates = Vec::new();
        let mut status = SolveStatus::MaxOuterReached;
        let mut failure = None;

        for k in 1..=sched.max_outer {
            let mu = sched.mu(k);
            let out = match self.oracle(&y, k, &x_prev) {
                Ok(out) => out,
                Err(e) => {
                    status = SolveStatus::NumericFailure;
                    failure = Some(format!("outer iteration {k}: {e}"));
                    break;
                }
            };
            let x = out.x;
            let v = prog.shifted_residual(&x, &y, mu);
            let y_next = dual_update(&v, mu, &prog.cone).expect("checked dimensions");
            let infeas = prog.infeasibility(&x);
            let shifted_infeas = prog.cone.distance(&v).expect("checked dimensions");
            let obj = prog.objective(&x);
            let xi = sched.xi_majorant(k, diameter);
            let y_norm = norm2(&y);

            let infeasibility = infeas - (y_norm + dist(&y_next, &y)) / mu;
            let suboptimality_upper = reference
                .p_star
                .map(|p| (obj - p) - (xi + half * y_norm * y_norm / mu));
            let suboptimality_lower = match (reference.p_star, &reference.y_star, y_star_norm) {
                (Some(p), Some(ys), Some(ysn)) => {
                    Some((-ysn * shifted_infeas + dot(&y, ys) / mu) - (obj - p))
                }
                _ => None,
            };
            let dual_norm = y_star_norm.map(|ysn| y_norm - (dual_budget + ysn));
            dual_budget += (T::lit(2.0) * xi * mu).sqrt();

            let certificate = kkt_certificate(prog, &x, &y, mu);
            let finite = all_finite(&x)
                && all_finite(&y_next)
                && obj.is_finite()
                && infeas.is_finite()
                && certificate.absolute.max().is_finite();

            debug!(
                "k={k} mu={mu:e} inner={} via {:?} infeas={infeas:e} obj={obj:e} kkt={:e}",
                out.inner_iters,
                out.cert.condition,
                certificate.absolute.max()
            );

            let gap_ok = reference
                .p_star
                .map_or(true, |p| (obj - p).abs() <= sched.target_eps);
            let at_target = finite && certificate.absolute.max() <= sched.target_eps && gap_ok;

            iterates.push(OuterIterate {
                k,
                x: x.clone(),
                y: y.clone(),
                y_next: y_next.clone(),
                mu,
                alpha: sched.alpha(k),
                eta: sched.eta(k),
                inner_iters: out.inner_iters,
                oracle: out.cert,
                infeas,
                shifted_infeas,
                obj,
                xi,
                bounds: BoundResiduals {
                    infeasibility,
                    suboptimality_upper,
                    suboptimality_lower,
                    dual_norm,
                },
                certificate,
            });

            if !finite {
                status = SolveStatus::NumericFailure;
                failure = Some(format!("non-finite values at outer iteration {k}"));
                break;
            }
            if at_target {
                status = SolveStatus::Converged;
                if sched.stop_at_target {
                    break;
                }
            } else {
                status = SolveStatus::MaxOuterReached;
            }
            y = y_next;
            x_prev = x;
        }

        info!(
            "alcc finished: {:?} after {} outer / {} inner iterations",
            status,
            iterates.len(),
            iterates.iter().map(|it| it.inner_iters).sum::<usize>()
        );
        SolveTrace {
            final_kkt: iterates.last().map(|it| it.certificate),
            iterates,
            status,
            sigma_max: self.sigma_max,
            failure,
        }
    }
}

/// Solves `prog` with the given schedule.
pub fn solve<T: Scalar>(prog: &ConicProgram<T>, schedule: &ScheduleConfig<T>) -> Result<SolveTrace<T>> {
    Ok(Alcc::new(prog, schedule.clone())?.solve())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_vector, DenseMatrix};
    use crate::sets::{Regularizer, SetKind};
    use crate::smooth::{Quadratic, ZeroSmooth};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn unit_box(n: usize) -> SimpleSetProx<f64> {
        SimpleSetProx::new(
            n,
            SetKind::Box {
                lo: vec![0.0; n],
                hi: vec![1.0; n],
            },
            Regularizer::Zero,
        )
        .unwrap()
    }

    /// min x₁ + 2x₂ s.t. x₁ + x₂ - 1 >= 0 over [0,1]²
    fn two_var_lp() -> ConicProgram<f64> {
        ConicProgram::new(
            unit_box(2),
            Arc::new(Quadratic::linear(vec![1.0, 2.0])),
            LinearMap::dense(DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap()),
            vec![1.0],
            Cone::NonNeg(1),
        )
        .unwrap()
    }

    fn random_program(seed: u64, cone: Cone) -> (ConicProgram<f64>, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = cone.dim();
        let a = DenseMatrix::random(m, 3, &mut rng);
        let b = gaussian_vector(&mut rng, m);
        let c = Quadratic::new(DenseMatrix::identity(3), gaussian_vector(&mut rng, 3)).unwrap();
        let prog = ConicProgram::new(
            SimpleSetProx::new(3, SetKind::BoundedWhole { radius: 2.0 }, Regularizer::Zero).unwrap(),
            Arc::new(c),
            LinearMap::dense(a),
            b,
            cone,
        )
        .unwrap();
        (prog, rng)
    }

    #[test]
    fn schedule_values() {
        let s = ScheduleConfig::<f64>::default();
        assert_eq!(s.mu(1), 2.0);
        assert_eq!(s.alpha(1), 0.5);
        assert!((s.alpha(2) - 1.0 / (8.0 * 4.0)).abs() < 1e-15);
        for k in 1..30 {
            assert!(s.mu(k + 1) > s.mu(k));
            assert!(s.alpha(k + 1) < s.alpha(k) && s.eta(k + 1) < s.eta(k));
        }
        let bad = ScheduleConfig {
            beta: 1.0,
            ..ScheduleConfig::<f64>::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn schedule_budget_terms_decay_like_power_law() {
        let s = ScheduleConfig::<f64>::default();
        let diam = 2f64.sqrt();
        let term = |k: usize| (2.0 * s.xi_majorant(k, diam) * s.mu(k)).sqrt();
        for k in 1..60 {
            // sqrt(2 ξ_k μ_k) <= k^{-(1+c)} sqrt(2 μ₀ max{α₀, η₀Δ})
            let bound = (k as f64).powf(-1.5) * (2.0 * diam).sqrt();
            assert!(term(k) <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn iteration_cap_arithmetic() {
        // L = 1, μ₁ = 2, α₁ = 1/2, Δ = sqrt(2) gives sqrt(2·2·1/0.5)·sqrt(2) = 4
        assert_eq!(inner_iteration_cap(2.0, 1.0, 0.5, 2f64.sqrt()), 4);
    }

    #[test]
    fn penalty_lagrangian_feasible_point_is_objective() {
        let prog = two_var_lp();
        for mu in [0.5, 1.0, 10.0] {
            let l = penalty_lagrangian(&prog, &[1.0, 0.5], &[0.0], mu).unwrap();
            assert!((l - 2.0).abs() < 1e-15);
        }
        assert!(penalty_lagrangian(&prog, &[1.0, 0.5], &[0.0], 0.0).is_err());
    }

    #[test]
    fn penalty_lagrangian_zero_cone_expansion() {
        let (prog, mut rng) = random_program(3, Cone::Zero(2));
        for _ in 0..20 {
            let x: Vec<f64> = gaussian_vector(&mut rng, 3);
            let y: Vec<f64> = gaussian_vector(&mut rng, 2);
            let mu = 0.7;
            let r = prog.residual(&x);
            let expanded = prog.objective(&x) - dot(&y, &r) + 0.5 * mu * norm2(&r).powi(2);
            let l = penalty_lagrangian(&prog, &x, &y, mu).unwrap();
            assert!((l - expanded).abs() <= 1e-12 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn penalty_lagrangian_matches_slack_minimization() {
        // L_μ = min_{s ∈ K} p(x) - <y, Ax - s - b> + (μ/2)||Ax - s - b||², attained at s = Π_K(Ax - b - y/μ)
        let cone = Cone::product(vec![Cone::NonNeg(2), Cone::SecondOrder(3)]);
        let (prog, mut rng) = random_program(4, cone.clone());
        for _ in 0..20 {
            let x: Vec<f64> = gaussian_vector(&mut rng, 3);
            let y: Vec<f64> = gaussian_vector(&mut rng, 5);
            let mu = 1.3;
            let r = prog.residual(&x);
            let v: Vec<f64> = r.iter().zip(&y).map(|(a, b)| a - b / mu).collect();
            let s = cone.project(&v).unwrap();
            let w: Vec<f64> = r.iter().zip(&s).map(|(a, b)| a - b).collect();
            let direct = prog.objective(&x) - dot(&y, &w) + 0.5 * mu * norm2(&w).powi(2);
            let l = penalty_lagrangian(&prog, &x, &y, mu).unwrap();
            assert!((l - direct).abs() <= 1e-12 * (1.0 + l.abs()));
            // no other slack in K does better
            for _ in 0..10 {
                let s2 = cone.project(&gaussian_vector::<f64, _>(&mut rng, 5)).unwrap();
                let w2: Vec<f64> = r.iter().zip(&s2).map(|(a, b)| a - b).collect();
                let other = prog.objective(&x) - dot(&y, &w2) + 0.5 * mu * norm2(&w2).powi(2);
                assert!(l <= other + 1e-12);
            }
        }
    }

    #[test]
    fn subproblem_gradient_cases() {
        let prog = two_var_lp();
        assert_eq!(subproblem_gradient(&prog, &[1.0, 0.5], &[0.0], 3.0), vec![0.0, 0.0]);
        let (zprog, mut rng) = random_program(5, Cone::Zero(2));
        let x: Vec<f64> = gaussian_vector(&mut rng, 3);
        let y: Vec<f64> = gaussian_vector(&mut rng, 2);
        let v = zprog.shifted_residual(&x, &y, 2.0);
        let want = zprog.map().apply_adjoint(&v);
        let got = subproblem_gradient(&zprog, &x, &y, 2.0);
        assert!(dist(&got, &want) <= 1e-14);
    }

    #[test]
    fn subproblem_gradient_matches_finite_differences() {
        let cone = Cone::product(vec![Cone::NonNeg(2), Cone::SecondOrder(3), Cone::Psd(2)]);
        let (prog, mut rng) = random_program(6, cone);
        let h = 1e-6;
        for _ in 0..100 {
            let x: Vec<f64> = gaussian_vector(&mut rng, 3);
            let y: Vec<f64> = gaussian_vector(&mut rng, 8);
            let mu = 1.7;
            let f = |z: &[f64]| 0.5 * prog.cone().distance(&prog.shifted_residual(z, &y, mu)).unwrap().powi(2);
            let g = subproblem_gradient(&prog, &x, &y, mu);
            let fd: Vec<f64> = (0..3)
                .map(|i| {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    (f(&xp) - f(&xm)) / (2.0 * h)
                })
                .collect();
            assert!(dist(&g, &fd) <= 1e-5 * (1.0 + norm2(&g)), "{g:?} vs {fd:?}");
        }
    }

    #[test]
    fn dual_update_cases() {
        let k = Cone::NonNeg(2);
        assert_eq!(dual_update(&[1.0, 2.0], 5.0, &k).unwrap(), vec![0.0, 0.0]);
        assert_eq!(dual_update(&[1.0, -2.0], 3.0, &k).unwrap(), vec![0.0, 6.0]);
        let soc = Cone::SecondOrder(3);
        let polar = [-2.0, 1.0, 0.0];
        assert_eq!(dual_update(&polar, 2.0, &soc).unwrap(), vec![4.0, -2.0, 0.0]);
    }

    #[test]
    fn dual_update_is_gradient_step_in_y() {
        let cone = Cone::product(vec![Cone::NonNeg(2), Cone::SecondOrder(3)]);
        let (prog, mut rng) = random_program(7, cone);
        let h = 1e-6;
        for _ in 0..20 {
            let x: Vec<f64> = gaussian_vector(&mut rng, 3);
            let y: Vec<f64> = gaussian_vector(&mut rng, 5);
            let mu = 2.5;
            let v = prog.shifted_residual(&x, &y, mu);
            let y_next = dual_update(&v, mu, prog.cone()).unwrap();
            let grad_y: Vec<f64> = (0..5)
                .map(|i| {
                    let mut yp = y.clone();
                    let mut ym = y.clone();
                    yp[i] += h;
                    ym[i] -= h;
                    (penalty_lagrangian(&prog, &x, &yp, mu).unwrap()
                        - penalty_lagrangian(&prog, &x, &ym, mu).unwrap())
                        / (2.0 * h)
                })
                .collect();
            let via_gradient: Vec<f64> = y.iter().zip(&grad_y).map(|(a, g)| a + mu * g).collect();
            assert!(dist(&y_next, &via_gradient) <= 1e-5 * (1.0 + norm2(&y_next)));
            assert!(prog.cone().in_dual(&y_next, 1e-12).unwrap());
        }
    }

    #[test]
    fn kkt_certificate_flags() {
        let prog = two_var_lp();
        let good = kkt_certificate(&prog, &[1.0, 0.0], &[1.0], 4.0);
        assert!(good.absolute.max() <= 1e-12, "{good:?}");
        let no_dual = kkt_certificate(&prog, &[1.0, 0.0], &[0.0], 4.0);
        assert!(no_dual.absolute.stationarity > 0.1);
        let bad_dual = kkt_certificate(&prog, &[1.0, 0.0], &[-1.0], 4.0);
        assert!(bad_dual.absolute.dual_membership >= 1.0 - 1e-12);
        assert!((good.relative.primal_infeas - good.absolute.primal_infeas / 2.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_zero_cone_program() {
        let b = vec![0.3, 0.6];
        let prog = ConicProgram::new(
            unit_box(2),
            Arc::new(ZeroSmooth::new(2)),
            LinearMap::identity(2),
            b.clone(),
            Cone::Zero(2),
        )
        .unwrap();
        let trace = solve(&prog, &ScheduleConfig::default()).unwrap();
        assert_eq!(trace.status, SolveStatus::Converged);
        assert!(trace.iterates.len() <= 10, "{}", trace.iterates.len());
        assert!(dist(trace.solution().unwrap(), &b) <= 1e-6);
        assert!(norm2(trace.final_dual().unwrap()) <= 1e-6);
    }

    #[test]
    fn trivial_program_from_witness_stops_at_once() {
        let b = vec![0.3, 0.6];
        let prog = ConicProgram::new(
            unit_box(2),
            Arc::new(ZeroSmooth::new(2)),
            LinearMap::identity(2),
            b.clone(),
            Cone::Zero(2),
        )
        .unwrap()
        .with_witness(b.clone())
        .unwrap();
        let trace = solve(&prog, &ScheduleConfig::default()).unwrap();
        assert_eq!(trace.status, SolveStatus::Converged);
        assert!(trace.iterates.len() <= 2);
        assert_eq!(trace.solution().unwrap(), &b[..]);
    }

    #[test]
    fn two_var_lp_solves() {
        let prog = two_var_lp()
            .with_reference(Reference {
                p_star: Some(1.0),
                x_star: Some(vec![1.0, 0.0]),
                y_star: Some(vec![1.0]),
            })
            .unwrap();
        let trace = solve(&prog, &ScheduleConfig::default()).unwrap();
        assert_eq!(trace.status, SolveStatus::Converged, "{:?}", trace.failure);
        let last = trace.last().unwrap();
        assert!((last.obj - 1.0).abs() <= 1e-5);
        for it in &trace.iterates {
            assert!(it.bounds.infeasibility <= 1e-9 * (1.0 + norm2(&it.y)) / it.mu);
            assert!(prog.cone().in_dual(&it.y_next, 1e-8).unwrap());
            assert!(it.bounds.suboptimality_upper.unwrap() <= 1e-8);
            assert!(it.bounds.suboptimality_lower.unwrap() <= 1e-8);
            assert!(it.bounds.dual_norm.unwrap() <= 1e-8);
        }
    }

    #[test]
    fn witness_and_reference_validation() {
        let prog = two_var_lp();
        assert!(prog.clone().with_witness(vec![0.2, 0.2]).is_err());
        assert!(prog.clone().with_witness(vec![0.5, 0.6]).is_ok());
        assert!(prog
            .with_reference(Reference {
                p_star: None,
                x_star: Some(vec![1.0]),
                y_star: None
            })
            .is_err());
    }

    #[test]
    fn program_dimension_checks() {
        let r = ConicProgram::new(
            unit_box(2),
            Arc::new(ZeroSmooth::new(2)),
            LinearMap::identity(2),
            vec![0.0; 3],
            Cone::Zero(3),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn single_precision_solve() {
        let prog = ConicProgram::<f32>::new(
            SimpleSetProx::new(
                2,
                SetKind::Box {
                    lo: vec![0.0; 2],
                    hi: vec![1.0; 2],
                },
                Regularizer::Zero,
            )
            .unwrap(),
            Arc::new(Quadratic::linear(vec![1.0, 2.0])),
            LinearMap::dense(DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap()),
            vec![1.0],
            Cone::NonNeg(1),
        )
        .unwrap();
        let schedule = ScheduleConfig {
            target_eps: 1e-3,
            max_outer: 15,
            ..ScheduleConfig::default()
        };
        let trace = solve(&prog, &schedule).unwrap();
        assert!((trace.last().unwrap().obj - 1.0).abs() < 1e-2, "{:?}", trace.status);
    }
}
