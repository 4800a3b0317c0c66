//! Brute-force reference solutions, independent of the solver code paths
//! they are compared against.

use alcc::linalg::{solve_dense, DenseMatrix, SymMatrix};
use alcc::problems::L1LmiInstance;
use alcc::sets::{Regularizer, SetKind, SimpleSetProx};

/// Default grid spacing of the grid oracles.
pub const GRID_STEP: f64 = 1e-3;

/// Grid indices `k` with `k·h ∈ [a, b]`, counting points that miss the
/// interval only by rounding in `a` or `b` as inside. Without this, grid
/// points lying exactly on a face such as `x₁ + x₂ = 1.2` are lost.
fn grid_range(a: f64, b: f64, h: f64) -> Option<(i64, i64)> {
    const SNAP: f64 = 1e-9;
    let lo = (a / h - SNAP).ceil() as i64;
    let hi = (b / h + SNAP).floor() as i64;
    (lo <= hi).then_some((lo, hi))
}

/// Grid points of `[a, b]` bracketing the minimizer of the convex function
/// `(t - c)² + w|t|` restricted to `[a, b]`. By convexity the grid minimum is
/// one of them.
fn bracket(a: f64, b: f64, c: f64, w: f64, h: f64) -> Vec<f64> {
    if a == b {
        return vec![a];
    }
    let Some((lo, hi)) = grid_range(a, b, h) else {
        return Vec::new();
    };
    let half = 0.5 * w;
    let t = if c > half {
        c - half
    } else if c < -half {
        c + half
    } else {
        0.0
    };
    let t = t.clamp(a, b);
    let f = ((t / h).floor() as i64).clamp(lo, hi);
    let g = ((t / h).ceil() as i64).clamp(lo, hi);
    let mut out = vec![f as f64 * h];
    if g != f {
        out.push(g as f64 * h);
    }
    out
}

/// Range of the first coordinate, and the interval of the last coordinate
/// given the others, for the sets the grid oracle understands.
fn first_range(set: &SetKind<f64>) -> (f64, f64) {
    match set {
        SetKind::Box { lo, hi } => (lo[0], hi[0]),
        SetKind::BoundedWhole { radius } | SetKind::L1Ball { radius } => (-radius, *radius),
        SetKind::L2Ball { center, radius } => (center[0] - radius, center[0] + radius),
        SetKind::Simplex => (0.0, 1.0),
    }
}

fn last_interval(set: &SetKind<f64>, dim: usize, x1: f64) -> Option<(f64, f64)> {
    let j = dim - 1;
    let iv = match set {
        SetKind::Box { lo, hi } => (lo[j], hi[j]),
        SetKind::BoundedWhole { radius } => (-radius, *radius),
        SetKind::L1Ball { radius } => {
            let r = if dim == 1 { *radius } else { radius - x1.abs() };
            (-r, r)
        }
        SetKind::L2Ball { center, radius } => {
            let r2 = if dim == 1 {
                radius * radius
            } else {
                radius * radius - (x1 - center[0]).powi(2)
            };
            let r = r2.max(0.0).sqrt();
            (center[j] - r, center[j] + r)
        }
        SetKind::Simplex => {
            let v = if dim == 1 { 1.0 } else { 1.0 - x1 };
            (v, v)
        }
    };
    (iv.0 <= iv.1).then_some(iv)
}

/// `argmin { scale·ρ(x) + ||x - x̄||² : x ∈ χ }` over the grid `hℤ^d ∩ χ`,
/// for `d ∈ {1, 2}`. The simplex is sampled along its edge, and the circle
/// bounding an ℓ2 ball is added at arc length `h`, since lattice points near
/// a curved boundary sit up to `h` inside it.
pub fn grid_generalized_projection(
    prox: &SimpleSetProx<f64>,
    xbar: &[f64],
    scale: f64,
    h: f64,
) -> Vec<f64> {
    let dim = prox.dim();
    assert!(dim == 1 || dim == 2, "grid oracle handles 1 or 2 dimensions");
    let w = match prox.regularizer() {
        Regularizer::Zero => 0.0,
        Regularizer::L1 { weight } => scale * weight,
    };
    let objective = |x: &[f64]| -> f64 {
        x.iter()
            .zip(xbar)
            .map(|(&v, &c)| (v - c).powi(2) + w * v.abs())
            .sum()
    };
    let set = prox.set();
    let mut best = (f64::INFINITY, Vec::new());
    let mut consider = |x: Vec<f64>| {
        let v = objective(&x);
        if v < best.0 {
            best = (v, x);
        }
    };
    if dim == 1 {
        if let Some((a, b)) = last_interval(set, 1, 0.0) {
            for t in bracket(a, b, xbar[0], w, h) {
                consider(vec![t]);
            }
        }
    } else {
        let (a1, b1) = first_range(set);
        let Some((lo, hi)) = grid_range(a1, b1, h) else {
            return best.1;
        };
        for i in lo..=hi {
            let x1 = i as f64 * h;
            if let Some((a, b)) = last_interval(set, 2, x1) {
                for t in bracket(a, b, xbar[1], w, h) {
                    consider(vec![x1, t]);
                }
            }
        }
        if let SetKind::L2Ball { center, radius } = set {
            let steps = (std::f64::consts::TAU * radius / h).ceil() as usize;
            for s in 0..steps {
                let theta = std::f64::consts::TAU * s as f64 / steps as f64;
                consider(vec![
                    center[0] + radius * theta.cos(),
                    center[1] + radius * theta.sin(),
                ]);
            }
        }
    }
    best.1
}

/// Minimizer and optimal value of `½xᵀQx + qᵀx` over `[lo, hi]`, by trying
/// every lower/upper/free pattern and keeping the one that satisfies KKT.
/// `Q` must be positive definite.
pub fn box_qp_minimizer(
    q_mat: &DenseMatrix<f64>,
    q: &[f64],
    lo: &[f64],
    hi: &[f64],
) -> Option<(Vec<f64>, f64)> {
    let n = q.len();
    let tol = 1e-9 * (1.0 + q_mat.frobenius() + q.iter().map(|v| v.abs()).sum::<f64>());
    for code in 0..3usize.pow(n as u32) {
        let mut state = vec![0u8; n];
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let mut x: Vec<f64> = (0..n)
            .map(|j| match state[j] {
                0 => lo[j],
                1 => hi[j],
                _ => 0.0,
            })
            .collect();
        let free: Vec<usize> = (0..n).filter(|&j| state[j] == 2).collect();
        if !free.is_empty() {
            let mut sys = DenseMatrix::zeros(free.len(), free.len());
            let mut rhs = vec![0.0; free.len()];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    sys.set(r, s, q_mat.get(i, j));
                }
                rhs[r] = -q[i]
                    - (0..n)
                        .filter(|j| state[*j] != 2)
                        .map(|j| q_mat.get(i, j) * x[j])
                        .sum::<f64>();
            }
            let Some(sol) = solve_dense(&sys, &rhs, 1e-12) else {
                continue;
            };
            free.iter().zip(&sol).for_each(|(&j, &v)| x[j] = v);
        }
        let g: Vec<f64> = q_mat.matvec(&x).iter().zip(q).map(|(a, b)| a + b).collect();
        let ok = (0..n).all(|j| match state[j] {
            0 => g[j] >= -tol,
            1 => g[j] <= tol,
            _ => x[j] >= lo[j] - tol && x[j] <= hi[j] + tol && g[j].abs() <= tol,
        });
        if ok {
            let value = 0.5 * x.iter().zip(q_mat.matvec(&x)).map(|(a, b)| a * b).sum::<f64>()
                + x.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
            return Some((x, value));
        }
    }
    None
}

/// `{t : P + tA ⪰ 0}` for 2×2 symmetric `P`, `A` given as `[m11, m12, m22]`.
/// Always an interval, possibly unbounded or empty.
pub fn psd2_interval(p: [f64; 3], a: [f64; 3]) -> Option<(f64, f64)> {
    // det(P + tA) = α t² + β t + γ, tr(P + tA) = p_tr + a_tr t
    let alpha = a[0] * a[2] - a[1] * a[1];
    let beta = p[0] * a[2] + a[0] * p[2] - 2.0 * p[1] * a[1];
    let gamma = p[0] * p[2] - p[1] * p[1];
    let (p_tr, a_tr) = (p[0] + p[2], a[0] + a[2]);

    let mut cuts = vec![f64::NEG_INFINITY, f64::INFINITY];
    if a_tr != 0.0 {
        cuts.push(-p_tr / a_tr);
    }
    if alpha != 0.0 {
        let disc = beta * beta - 4.0 * alpha * gamma;
        if disc >= 0.0 {
            let s = disc.sqrt();
            let q = -0.5 * (beta + beta.signum() * s);
            if q != 0.0 {
                cuts.push(q / alpha);
                cuts.push(gamma / q);
            } else {
                cuts.push(0.0);
            }
        }
    } else if beta != 0.0 {
        cuts.push(-gamma / beta);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let psd = |t: f64| {
        let (m11, m12, m22) = (p[0] + t * a[0], p[1] + t * a[1], p[2] + t * a[2]);
        let scale = 1e-12 * (1.0 + m11.abs() + m22.abs()).powi(2);
        m11 + m22 >= 0.0 && m11 * m22 - m12 * m12 >= -scale
    };
    let probe = |lo: f64, hi: f64| match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (false, true) => hi - 1.0 - hi.abs(),
        (true, false) => lo + 1.0 + lo.abs(),
        (false, false) => 0.0,
    };
    let mut out: Option<(f64, f64)> = None;
    for w in cuts.windows(2) {
        if psd(probe(w[0], w[1])) {
            out = Some(match out {
                None => (w[0], w[1]),
                Some((lo, _)) => (lo, w[1]),
            });
        }
    }
    if out.is_none() {
        // isolated feasible point
        out = cuts.iter().copied().filter(|t| t.is_finite() && psd(*t)).map(|t| (t, t)).next();
    }
    out
}

fn sym2(m: &SymMatrix<f64>) -> [f64; 3] {
    let full = m.to_full();
    [full[0], full[1], full[3]]
}

/// Minimum of `||x||₁` over grid points `x ∈ hℤ³` with `||x||₁ <= R` and
/// `M(x) ⪰ 0`, for an instance with `n = 3`, `m = 2`. For each `(x₁, x₂)`
/// the feasible `x₃` form an interval computed in closed form, so the third
/// coordinate is exact on the grid rather than sampled.
pub fn lmi_grid_minimum(inst: &L1LmiInstance<f64>, h: f64) -> Option<(f64, [f64; 3])> {
    assert_eq!(inst.dim(), 3, "grid oracle needs n = 3");
    assert_eq!(inst.order(), 2, "grid oracle needs m = 2");
    let r = inst.radius();
    let b = sym2(inst.offset());
    let a: Vec<[f64; 3]> = inst.mats().iter().map(sym2).collect();
    let (lo, hi) = grid_range(-r, r, h)?;
    let mut best: Option<(f64, [f64; 3])> = None;
    for i in lo..=hi {
        let x1 = i as f64 * h;
        let rest = r - x1.abs();
        let (lo2, hi2) = grid_range(-rest, rest, h).unwrap_or((1, 0));
        for j in lo2..=hi2 {
            let x2 = j as f64 * h;
            let base = x1.abs() + x2.abs();
            if let Some((ref bv, _)) = best {
                if base >= *bv {
                    continue;
                }
            }
            let p = [
                b[0] + a[0][0] * x1 + a[1][0] * x2,
                b[1] + a[0][1] * x1 + a[1][1] * x2,
                b[2] + a[0][2] * x1 + a[1][2] * x2,
            ];
            let Some((t_lo, t_hi)) = psd2_interval(p, a[2]) else {
                continue;
            };
            let budget = r - base;
            let (t_lo, t_hi) = (t_lo.max(-budget), t_hi.min(budget));
            let Some((k_lo, k_hi)) = grid_range(t_lo, t_hi, h) else {
                continue;
            };
            let k = 0i64.clamp(k_lo, k_hi);
            let x3 = k as f64 * h;
            let v = base + x3.abs();
            if best.as_ref().map_or(true, |(bv, _)| v < *bv) {
                best = Some((v, [x1, x2, x3]));
            }
        }
    }
    best
}

/// Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest eigenvalue of `CᵀC` by power iteration with a Rayleigh quotient.
pub fn gram_top_eigenvalue(c: &DenseMatrix<f64>, iters: usize) -> f64 {
    let n = c.cols();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = c.matvec_t(&c.matvec(&v));
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let vv: f64 = v.iter().map(|x| x * x).sum();
        lambda = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / vv;
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lambda
}
