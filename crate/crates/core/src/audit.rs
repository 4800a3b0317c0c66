//! Re-derives the per-iterate bounds of a [`SolveTrace`] from the program and
//! schedule, without trusting the bound columns recorded in the trace.

use serde::Serialize;

use crate::linalg::{dist, dot, norm2};
use crate::scalar::Scalar;
use crate::solver::{ConicProgram, ScheduleConfig, SolveTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Recorded `infeas`, `obj`, `mu` agree with values recomputed from `x_k`.
    Consistency,
    /// `d_K(Ax_k - b) <= (||y_k|| + ||y_{k+1} - y_k||)/μ_k`
    Infeasibility,
    /// `p(x_k) - p* <= max{α_k, η_k Δ_χ} + ||y_k||²/(2μ_k)`
    SuboptimalityUpper,
    /// `-||y*||·d_K(Ax_k - b - y_k/μ_k) + <y_k, y*>/μ_k <= p(x_k) - p*`
    SuboptimalityLower,
    /// `||y_k|| <= Σ_{j<k} sqrt(2 ξ_j μ_j) + ||y*||`
    DualNorm,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundKind::Consistency => "consistency",
            BoundKind::Infeasibility => "infeasibility",
            BoundKind::SuboptimalityUpper => "subopt-upper",
            BoundKind::SuboptimalityLower => "subopt-lower",
            BoundKind::DualNorm => "dual-norm",
        }
    }
}

/// One inequality `lhs <= rhs` checked at outer iterate `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AuditRow<T> {
    pub k: usize,
    pub kind: BoundKind,
    pub lhs: T,
    pub rhs: T,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditTolerances<T> {
    /// Relative slack on the infeasibility bound.
    pub infeasibility_rel: T,
    /// Absolute slack on the suboptimality and dual-norm bounds.
    pub sandwich_abs: T,
    /// Relative tolerance when comparing recorded and recomputed values.
    pub consistency_rel: T,
}

impl<T: Scalar> Default for AuditTolerances<T> {
    fn default() -> Self {
        Self {
            infeasibility_rel: T::lit(1e-9),
            sandwich_abs: T::lit(1e-8),
            consistency_rel: T::lit(1e-12).max(T::epsilon() * T::lit(8.0)),
        }
    }
}

fn close<T: Scalar>(a: T, b: T, rel: T) -> bool {
    (a - b).abs() <= rel * (T::one() + a.abs().max(b.abs()))
}

/// Checks every computable bound at every iterate. Rows needing `p*` or `y*`
/// appear only when the program carries that reference data.
pub fn audit_trace<T: Scalar>(
    prog: &ConicProgram<T>,
    schedule: &ScheduleConfig<T>,
    trace: &SolveTrace<T>,
    tol: &AuditTolerances<T>,
) -> Vec<AuditRow<T>> {
    let reference = prog.reference().cloned().unwrap_or_default();
    let y_star_norm = reference.y_star.as_ref().map(|y| norm2(y));
    let diameter = prog.prox().diameter();
    let b_scale = T::one() + norm2(prog.offset());
    let half = T::lit(0.5);
    let mut rows = Vec::new();
    let mut dual_budget = T::zero();

    for it in &trace.iterates {
        let k = it.k;
        let mu = schedule.mu(k);
        let xi = schedule.xi_majorant(k, diameter);
        let shape_ok = it.x.len() == prog.dim()
            && it.y.len() == prog.rows()
            && it.y_next.len() == prog.rows();
        if !shape_ok {
            rows.push(AuditRow {
                k,
                kind: BoundKind::Consistency,
                lhs: T::infinity(),
                rhs: T::zero(),
                pass: false,
            });
            continue;
        }

        let infeas = prog.infeasibility(&it.x);
        let obj = prog.objective(&it.x);
        let mismatch = [(it.infeas, infeas), (it.obj, obj), (it.mu, mu)]
            .iter()
            .map(|&(a, b)| (a - b).abs() / (T::one() + a.abs().max(b.abs())))
            .fold(T::zero(), |m, d| if d.is_nan() { T::infinity() } else { m.max(d) });
        rows.push(AuditRow {
            k,
            kind: BoundKind::Consistency,
            lhs: mismatch,
            rhs: tol.consistency_rel,
            pass: close(it.infeas, infeas, tol.consistency_rel)
                && close(it.obj, obj, tol.consistency_rel)
                && close(it.mu, mu, tol.consistency_rel),
        });

        let y_norm = norm2(&it.y);
        let rhs = (y_norm + dist(&it.y_next, &it.y)) / mu;
        // an absolute floor at rounding level keeps `0 <= 0` cases from failing on noise
        let slack = tol.infeasibility_rel * rhs + T::epsilon() * b_scale;
        rows.push(AuditRow {
            k,
            kind: BoundKind::Infeasibility,
            lhs: it.infeas,
            rhs,
            pass: it.infeas <= rhs + slack,
        });

        if let Some(p) = reference.p_star {
            let gap = it.obj - p;
            let upper = xi + half * y_norm * y_norm / mu;
            rows.push(AuditRow {
                k,
                kind: BoundKind::SuboptimalityUpper,
                lhs: gap,
                rhs: upper,
                pass: gap <= upper + tol.sandwich_abs,
            });
            if let (Some(ys), Some(ysn)) = (&reference.y_star, y_star_norm) {
                let v = prog.shifted_residual(&it.x, &it.y, mu);
                let d = prog.cone().distance(&v).unwrap_or(T::infinity());
                let lower = -ysn * d + dot(&it.y, ys) / mu;
                rows.push(AuditRow {
                    k,
                    kind: BoundKind::SuboptimalityLower,
                    lhs: lower,
                    rhs: gap,
                    pass: lower <= gap + tol.sandwich_abs,
                });
            }
        }
        if let Some(ysn) = y_star_norm {
            let bound = dual_budget + ysn;
            rows.push(AuditRow {
                k,
                kind: BoundKind::DualNorm,
                lhs: y_norm,
                rhs: bound,
                pass: y_norm <= bound + tol.sandwich_abs,
            });
        }
        dual_budget += (T::lit(2.0) * xi * mu).sqrt();
    }
    rows
}
