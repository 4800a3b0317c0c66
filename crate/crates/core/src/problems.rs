//! Instance generators: min-max games, ℓ1-minimization over an LMI, and box
//! LPs with enumerated primal and dual optima.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::solver::{ConicProgram, Reference};
use crate::cones::Cone;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    dot, gaussian_vector, norm1, norm2, solve_dense, svec_len, sym_eig, DenseMatrix, LinearMap,
    SymMatrix,
};
use crate::scalar::Scalar;
use crate::sets::{simplex_project, Regularizer, SetKind, SimpleSetProx};
use crate::smooth::{Quadratic, SmoothFunction, ZeroSmooth};

/// `γ(x) = max_{y ∈ Δ_p} yᵀCx - (τ/2)||y||²`, the smoothed worst-case cost
/// of a decision `x` against an adversary mixing over the rows of `C`.
#[derive(Clone, Debug)]
pub struct MinMaxGame<T> {
    payoff: DenseMatrix<T>,
    tau: T,
    lipschitz: T,
}

impl<T: Scalar> MinMaxGame<T> {
    /// `payoff` is `p × n`. The Lipschitz constant `σ²_max(C)/τ` is computed
    /// from a dense eigendecomposition of the smaller Gram matrix.
    pub fn new(payoff: DenseMatrix<T>, tau: T) -> Result<Self> {
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        if payoff.rows() == 0 {
            return Err(Error::InvalidParameter("payoff matrix needs at least one row".into()));
        }
        let gram = if payoff.rows() <= payoff.cols() {
            payoff.matmul(&payoff.transpose())
        } else {
            payoff.transpose().matmul(&payoff)
        };
        let eig = sym_eig(&SymMatrix::from_full(gram.rows(), gram.as_slice())?)?;
        let sigma_sq = eig.values.first().copied().unwrap_or(T::zero()).max(T::zero());
        Ok(Self {
            payoff,
            tau,
            lipschitz: sigma_sq / tau,
        })
    }

    pub fn random<R: Rng + ?Sized>(p: usize, n: usize, tau: T, rng: &mut R) -> Result<Self> {
        Self::new(DenseMatrix::random(p, n, rng), tau)
    }

    pub fn payoff(&self) -> &DenseMatrix<T> {
        &self.payoff
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    /// The adversary's response `y(x) = Π_Δ(Cx/τ)`.
    pub fn best_response(&self, x: &[T]) -> Vec<T> {
        let scaled: Vec<T> = self.payoff.matvec(x).into_iter().map(|v| v / self.tau).collect();
        simplex_project(&scaled)
    }
}

/// Value and gradient `Cᵀy(x)` of the min-max smooth part.
pub fn eval_gamma_minmax<T: Scalar>(game: &MinMaxGame<T>, x: &[T]) -> (T, Vec<T>) {
    let cx = game.payoff.matvec(x);
    let scaled: Vec<T> = cx.iter().map(|&v| v / game.tau).collect();
    let y = simplex_project(&scaled);
    let value = dot(&y, &cx) - T::lit(0.5) * game.tau * dot(&y, &y);
    (value, game.payoff.matvec_t(&y))
}

impl<T: Scalar> SmoothFunction<T> for MinMaxGame<T> {
    fn dim(&self) -> usize {
        self.payoff.cols()
    }

    fn value(&self, x: &[T]) -> T {
        eval_gamma_minmax(self, x).0
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        eval_gamma_minmax(self, x).1
    }

    fn lipschitz(&self) -> T {
        self.lipschitz
    }

    fn value_and_gradient(&self, x: &[T]) -> (T, Vec<T>) {
        eval_gamma_minmax(self, x)
    }
}

/// `min { ||x||₁ : Σ_j A_j x_j + B ⪰ 0 }` with a known feasible `x₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct L1LmiInstance<T> {
    mats: Vec<SymMatrix<T>>,
    offset: SymMatrix<T>,
    x0: Vec<T>,
}

impl<T: Scalar> L1LmiInstance<T> {
    pub fn new(mats: Vec<SymMatrix<T>>, offset: SymMatrix<T>, x0: Vec<T>) -> Result<Self> {
        check_dim("LMI witness", mats.len(), x0.len())?;
        for a in &mats {
            check_dim("LMI coefficient matrix", offset.dim(), a.dim())?;
        }
        let inst = Self { mats, offset, x0 };
        let eig = sym_eig(&inst.lmi_matrix(&inst.x0))?;
        let smallest = eig.values.last().copied().unwrap_or(T::zero());
        if smallest < -T::lit(1e-8) {
            return Err(Error::InvalidParameter(format!(
                "x0 is not feasible for the LMI (smallest eigenvalue {smallest:e})"
            )));
        }
        if norm1(&inst.x0) <= T::zero() {
            return Err(Error::InvalidParameter("x0 = 0 is already optimal".into()));
        }
        Ok(inst)
    }

    /// Random instance with `A_j` symmetric Gaussian and `B` chosen so that
    /// `M(x₀) = I/2` while `B` itself is indefinite, so `x = 0` is infeasible.
    pub fn random(n: usize, m: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let mats: Vec<SymMatrix<T>> = (0..n)
                .map(|_| {
                    let g = DenseMatrix::<T>::random(m, m, &mut rng);
                    SymMatrix::from_full(m, g.as_slice())
                })
                .collect::<Result<_>>()?;
            let x0: Vec<T> = gaussian_vector(&mut rng, n);
            let mut b = SymMatrix::identity(m).into_svec();
            b.iter_mut().for_each(|v| *v *= T::lit(0.5));
            for (a, &xj) in mats.iter().zip(&x0) {
                b.iter_mut().zip(a.svec()).for_each(|(bi, &ai)| *bi -= ai * xj);
            }
            let offset = SymMatrix::from_svec(m, b)?;
            if sym_eig(&offset)?.values.last().copied().unwrap_or(T::zero()) < T::zero() {
                return Self::new(mats, offset, x0);
            }
        }
        Err(Error::NumericFailure("could not draw an LMI with infeasible origin".into()))
    }

    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    /// Order `m` of the matrices.
    pub fn order(&self) -> usize {
        self.offset.dim()
    }

    pub fn mats(&self) -> &[SymMatrix<T>] {
        &self.mats
    }

    pub fn offset(&self) -> &SymMatrix<T> {
        &self.offset
    }

    pub fn witness(&self) -> &[T] {
        &self.x0
    }

    /// Radius `||x₀||₁` of the ℓ1 ball that contains the optimum.
    pub fn radius(&self) -> T {
        norm1(&self.x0)
    }

    /// `Σ_j A_j x_j + B`
    pub fn lmi_matrix(&self, x: &[T]) -> SymMatrix<T> {
        let mut s = self.offset.svec().to_vec();
        for (a, &xj) in self.mats.iter().zip(x) {
            s.iter_mut().zip(a.svec()).for_each(|(si, &ai)| *si += ai * xj);
        }
        SymMatrix::from_svec(self.order(), s).expect("consistent svec length")
    }

    /// The instance as `min ||x||₁` over `{||x||₁ <= ||x₀||₁}` with `x₀` as witness.
    pub fn program(&self) -> Result<ConicProgram<T>> {
        let (map, b, cone) = lmi_as_linear_map(self);
        let prox = SimpleSetProx::new(
            self.dim(),
            SetKind::L1Ball {
                radius: self.radius(),
            },
            Regularizer::L1 { weight: T::one() },
        )?;
        ConicProgram::new(prox, Arc::new(ZeroSmooth::new(self.dim())), map, b, cone)?
            .with_witness(self.x0.clone())
    }
}

/// `Ax = svec(Σ A_j x_j)`, `b = svec(-B)`, `K = S^m_+`.
pub fn lmi_as_linear_map<T: Scalar>(inst: &L1LmiInstance<T>) -> (LinearMap<T>, Vec<T>, Cone) {
    let rows = svec_len(inst.order());
    let mut a = DenseMatrix::zeros(rows, inst.dim());
    for (j, mat) in inst.mats.iter().enumerate() {
        for (i, &v) in mat.svec().iter().enumerate() {
            a.set(i, j, v);
        }
    }
    let b = inst.offset.svec().iter().map(|&v| -v).collect();
    (LinearMap::dense(a), b, Cone::Psd(inst.order()))
}

/// `min { cᵀx : Ax >= b, lo <= x <= hi }`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxLp {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxLp {
    pub fn new(c: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<f64>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let n = c.len();
        check_dim("LP rows of A", b.len(), a.len())?;
        for row in &a {
            check_dim("LP columns of A", n, row.len())?;
        }
        check_dim("LP lower bounds", n, lo.len())?;
        check_dim("LP upper bounds", n, hi.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidParameter("LP box needs lo <= hi".into()));
        }
        Ok(Self { c, a, b, lo, hi })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().map(|row| dot(row, x)).collect()
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&l, &h))| v >= l - tol && v <= h + tol)
            && self
                .row_activity(x)
                .iter()
                .zip(&self.b)
                .all(|(&ax, &bi)| ax >= bi - tol)
    }

    /// Lagrangian dual `g₀(y) = bᵀy + Σ_j min_{x_j ∈ [lo_j, hi_j]} (c - Aᵀy)_j x_j`.
    pub fn dual_value(&self, y: &[f64]) -> f64 {
        let reduced = self.reduced_cost(y);
        dot(&self.b, y)
            + reduced
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .map(|(&d, (&l, &h))| (d * l).min(d * h))
                .sum::<f64>()
    }

    /// `c - Aᵀy`
    pub fn reduced_cost(&self, y: &[f64]) -> Vec<f64> {
        let mut d = self.c.clone();
        for (row, &yi) in self.a.iter().zip(y) {
            d.iter_mut().zip(row).for_each(|(dj, &aij)| *dj -= aij * yi);
        }
        d
    }

    /// The LP as a conic program with `K = R^m_+` and `χ` the box.
    pub fn program(&self) -> Result<ConicProgram<f64>> {
        let prox = SimpleSetProx::new(
            self.n(),
            SetKind::Box {
                lo: self.lo.clone(),
                hi: self.hi.clone(),
            },
            Regularizer::Zero,
        )?;
        let map = if self.m() == 0 {
            LinearMap::dense(DenseMatrix::zeros(0, self.n()))
        } else {
            LinearMap::dense(DenseMatrix::from_rows(&self.a)?)
        };
        ConicProgram::new(
            prox,
            Arc::new(Quadratic::linear(self.c.clone())),
            map,
            self.b.clone(),
            Cone::NonNeg(self.m()),
        )
    }
}

/// A box LP with optima found by exhaustive enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpFixture {
    pub lp: BoxLp,
    pub p_star: f64,
    pub x_star: Vec<f64>,
    /// Minimum-norm optimal dual vertex.
    pub y_star: Vec<f64>,
    pub primal_unique: bool,
    pub dual_unique: bool,
}

impl LpFixture {
    pub fn reference(&self) -> Reference<f64> {
        Reference {
            p_star: Some(self.p_star),
            x_star: Some(self.x_star.clone()),
            y_star: Some(self.y_star.clone()),
        }
    }

    /// The conic program with the enumerated optimum attached as reference.
    pub fn program(&self) -> Result<ConicProgram<f64>> {
        self.lp.program()?.with_reference(self.reference())
    }
}

const FEAS_TOL: f64 = 1e-9;
const SAME_POINT_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-10;

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn square_solve(rows: Vec<Vec<f64>>, rhs: &[f64]) -> Option<Vec<f64>> {
    if rows.is_empty() {
        return Some(Vec::new());
    }
    solve_dense(&DenseMatrix::from_rows(&rows).ok()?, rhs, PIVOT_TOL)
}

/// Feasible vertices: each coordinate sits at a bound or is free, and the
/// free coordinates are pinned by as many active rows.
fn primal_vertices(lp: &BoxLp) -> Vec<Vec<f64>> {
    let n = lp.n();
    let mut out = Vec::new();
    // 0 = lo, 1 = hi, 2 = free
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut state = vec![0u8; n];
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&j| state[j] == 2).collect();
        if free.len() > lp.m() {
            continue;
        }
        let mut base = vec![0.0; n];
        for j in 0..n {
            base[j] = match state[j] {
                0 => lp.lo[j],
                1 => lp.hi[j],
                _ => 0.0,
            };
        }
        for rows in combinations(lp.m(), free.len()) {
            let sys: Vec<Vec<f64>> = rows
                .iter()
                .map(|&i| free.iter().map(|&j| lp.a[i][j]).collect())
                .collect();
            let rhs: Vec<f64> = rows.iter().map(|&i| lp.b[i] - dot(&lp.a[i], &base)).collect();
            if let Some(sol) = square_solve(sys, &rhs) {
                let mut x = base.clone();
                free.iter().zip(&sol).for_each(|(&j, &v)| x[j] = v);
                if lp.is_feasible(&x, FEAS_TOL) {
                    out.push(x);
                }
            }
        }
    }
    out
}

/// Vertices of the arrangement `{y_i = 0} ∪ {(Aᵀy)_j = c_j}` lying in `y >= 0`.
fn dual_vertices(lp: &BoxLp) -> Vec<Vec<f64>> {
    let (n, m) = (lp.n(), lp.m());
    let mut out = Vec::new();
    for pick in combinations(n + m, m) {
        let mut sys = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for &h in &pick {
            if h < m {
                let mut row = vec![0.0; m];
                row[h] = 1.0;
                sys.push(row);
                rhs.push(0.0);
            } else {
                let j = h - m;
                sys.push((0..m).map(|i| lp.a[i][j]).collect());
                rhs.push(lp.c[j]);
            }
        }
        if let Some(y) = square_solve(sys, &rhs) {
            if y.iter().all(|&v| v >= -FEAS_TOL) {
                out.push(y.into_iter().map(|v| v.max(0.0)).collect());
            }
        }
    }
    out
}

fn all_close(points: &[&Vec<f64>]) -> bool {
    points
        .iter()
        .all(|p| crate::linalg::dist(p, points[0]) <= SAME_POINT_TOL)
}

/// Enumerates the optima of an explicit box LP.
pub fn box_lp_fixture(lp: BoxLp) -> Result<LpFixture> {
    let primal = primal_vertices(&lp);
    let values: Vec<f64> = primal.iter().map(|x| dot(&lp.c, x)).collect();
    let (best, p_star) = values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InvalidParameter("LP has no feasible vertex".into()))?;
    let scale = 1.0 + p_star.abs();
    let optimal: Vec<&Vec<f64>> = primal
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v <= p_star + 1e-9 * scale)
        .map(|(x, _)| x)
        .collect();
    let primal_unique = all_close(&optimal);

    let duals = dual_vertices(&lp);
    let dvals: Vec<f64> = duals.iter().map(|y| lp.dual_value(y)).collect();
    let d_star = dvals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !((d_star - p_star).abs() <= 1e-8 * scale) {
        return Err(Error::NumericFailure(format!(
            "primal {p_star} and dual {d_star} enumerations disagree"
        )));
    }
    let dual_opt: Vec<&Vec<f64>> = duals
        .iter()
        .zip(&dvals)
        .filter(|(_, &v)| v >= d_star - 1e-9 * scale)
        .map(|(y, _)| y)
        .collect();
    let dual_unique = all_close(&dual_opt);
    let y_star = dual_opt
        .iter()
        .min_by(|a, b| norm2(a).total_cmp(&norm2(b)))
        .map(|y| (*y).clone())
        .expect("a dual vertex attains the maximum");

    Ok(LpFixture {
        x_star: primal[best].clone(),
        lp,
        p_star,
        y_star,
        primal_unique,
        dual_unique,
    })
}

/// Box LP on `[0,1]^n` with `m` rows that is strictly feasible and has
/// unique primal and dual optima. Degenerate draws are replaced, up to 10
/// times, by further draws from the same stream.
pub fn random_solvable_lp(n: usize, m: usize, seed: u64) -> Result<LpFixture> {
    if n == 0 || n > 12 {
        return Err(Error::InvalidParameter(format!("need 1 <= n <= 12, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10 {
        let a = DenseMatrix::<f64>::random(m, n, &mut rng);
        let x_int: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..0.8)).collect();
        let slack: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..0.5)).collect();
        let b: Vec<f64> = a
            .matvec(&x_int)
            .iter()
            .zip(&slack)
            .map(|(ax, s)| ax - s)
            .collect();
        let u: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..1.5)).collect();
        let noise: Vec<f64> = gaussian_vector(&mut rng, n);
        let c: Vec<f64> = a
            .matvec_t(&u)
            .iter()
            .zip(&noise)
            .map(|(v, z)| v + 0.3 * z)
            .collect();
        let lp = BoxLp::new(c, a.to_rows(), b, vec![0.0; n], vec![1.0; n])?;
        match box_lp_fixture(lp) {
            Ok(f) if f.primal_unique && f.dual_unique => return Ok(f),
            _ => continue,
        }
    }
    Err(Error::NumericFailure(format!(
        "no nondegenerate LP in 10 draws for n={n}, m={m}, seed={seed}"
    )))
}
