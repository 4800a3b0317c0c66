//! JSON problem files.
//!
//! ```json
//! {
//!   "n": 2,
//!   "cone": {"nonneg": 1},
//!   "A": [[1.0, 1.0]],
//!   "b": [1.0],
//!   "set": {"box": {"lo": [0, 0], "hi": [1, 1]}},
//!   "smooth": {"quadratic": {"q": [1.0, 2.0]}},
//!   "reference": {"p_star": 1.0, "x_star": [1.0, 0.0], "y_star": [1.0]}
//! }
//! ```
//!
//! `A` is either dense rows or `{"lmi": {"dim": m, "mats": [A_1, ..., A_n]}}`
//! with full symmetric `m × m` matrices, in which case `Ax = svec(Σ A_j x_j)`
//! and `b` lives in svec coordinates.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cones::Cone;
use crate::error::{Error, Result};
use crate::linalg::{svec_len, DenseMatrix, LinearMap, SymMatrix};
use crate::problems::{LpFixture, L1LmiInstance, MinMaxGame};
use crate::sets::{Regularizer, SetKind, SimpleSetProx};
use crate::smooth::{Quadratic, SmoothPart, ZeroSmooth};
use crate::solver::{ConicProgram, Reference};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConeSpec {
    Zero(usize),
    Free(usize),
    Nonneg(usize),
    Soc(usize),
    Psd(usize),
    Product(Vec<ConeSpec>),
}

impl ConeSpec {
    pub fn to_cone(&self) -> Cone {
        match self {
            ConeSpec::Zero(m) => Cone::Zero(*m),
            ConeSpec::Free(m) => Cone::Free(*m),
            ConeSpec::Nonneg(m) => Cone::NonNeg(*m),
            ConeSpec::Soc(m) => Cone::SecondOrder(*m),
            ConeSpec::Psd(d) => Cone::Psd(*d),
            ConeSpec::Product(blocks) => Cone::product(blocks.iter().map(|b| b.to_cone()).collect()),
        }
    }

    pub fn from_cone(cone: &Cone) -> Self {
        match cone {
            Cone::Zero(m) => ConeSpec::Zero(*m),
            Cone::Free(m) => ConeSpec::Free(*m),
            Cone::NonNeg(m) => ConeSpec::Nonneg(*m),
            Cone::SecondOrder(m) => ConeSpec::Soc(*m),
            Cone::Psd(d) => ConeSpec::Psd(*d),
            Cone::Product(p) => ConeSpec::Product(p.blocks().iter().map(ConeSpec::from_cone).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmiSpec {
    pub dim: usize,
    pub mats: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Dense(Vec<Vec<f64>>),
    Lmi { lmi: LmiSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    L1ball { r: f64 },
    L2ball { center: Vec<f64>, r: f64 },
    Simplex {},
    Bounded { r: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RegSpec {
    None {},
    L1 { lambda: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SmoothSpec {
    Quadratic {
        #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
        hessian: Option<Vec<Vec<f64>>>,
        q: Vec<f64>,
    },
    Minmax {
        #[serde(rename = "C")]
        payoff: Vec<Vec<f64>>,
        tau: f64,
    },
    Zero {},
}

impl Default for RegSpec {
    fn default() -> Self {
        RegSpec::None {}
    }
}

impl Default for SmoothSpec {
    fn default() -> Self {
        SmoothSpec::Zero {}
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub cone: ConeSpec,
    #[serde(rename = "A")]
    pub a: MapSpec,
    pub b: Vec<f64>,
    pub set: SetSpec,
    #[serde(default)]
    pub reg: RegSpec,
    #[serde(default)]
    pub smooth: SmoothSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Reference<f64>>,
    /// Feasible starting point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

fn schema(field: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        field: field.to_string(),
        message: message.into(),
    }
}

fn expect_len(field: &str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(schema(field, format!("expected length {expected}, found {found}")))
    }
}

fn dense_rows(field: &str, rows: &[Vec<f64>], ncols: usize) -> Result<DenseMatrix<f64>> {
    for (i, row) in rows.iter().enumerate() {
        expect_len(&format!("{field}[{i}]"), ncols, row.len())?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(schema(&format!("{field}[{i}]"), "non-finite entry"));
        }
    }
    if rows.is_empty() {
        Ok(DenseMatrix::zeros(0, ncols))
    } else {
        DenseMatrix::from_rows(rows).map_err(|e| schema(field, e.to_string()))
    }
}

fn symmetric(field: &str, m: usize, rows: &[Vec<f64>]) -> Result<SymMatrix<f64>> {
    let dense = dense_rows(field, rows, m)?;
    expect_len(field, m, dense.rows())?;
    let scale = 1.0 + dense.frobenius();
    if !dense.is_symmetric(1e-12 * scale) {
        return Err(schema(field, "matrix is not symmetric"));
    }
    SymMatrix::from_full(m, dense.as_slice()).map_err(|e| schema(field, e.to_string()))
}

impl ProblemFile {
    /// Parses a problem file. Syntax errors carry serde's line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema {
            field: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Compact serialization of the parsed document. Formatting and key order
    /// of the source file do not affect it, so it is the input to content hashes.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("problem files always serialize")
    }

    /// Number of conic rows implied by `A`.
    pub fn rows(&self) -> usize {
        match &self.a {
            MapSpec::Dense(rows) => rows.len(),
            MapSpec::Lmi { lmi } => svec_len(lmi.dim),
        }
    }

    fn map(&self) -> Result<LinearMap<f64>> {
        match &self.a {
            MapSpec::Dense(rows) => Ok(LinearMap::dense(dense_rows("A", rows, self.n)?)),
            MapSpec::Lmi { lmi } => {
                expect_len("A.lmi.mats", self.n, lmi.mats.len())?;
                let mats = lmi
                    .mats
                    .iter()
                    .enumerate()
                    .map(|(j, m)| symmetric(&format!("A.lmi.mats[{j}]"), lmi.dim, m))
                    .collect::<Result<Vec<_>>>()?;
                let mut a = DenseMatrix::zeros(svec_len(lmi.dim), self.n);
                for (j, mat) in mats.iter().enumerate() {
                    for (i, &v) in mat.svec().iter().enumerate() {
                        a.set(i, j, v);
                    }
                }
                Ok(LinearMap::dense(a))
            }
        }
    }

    fn prox(&self) -> Result<SimpleSetProx<f64>> {
        let set = match &self.set {
            SetSpec::Box { lo, hi } => {
                expect_len("set.box.lo", self.n, lo.len())?;
                expect_len("set.box.hi", self.n, hi.len())?;
                SetKind::Box {
                    lo: lo.clone(),
                    hi: hi.clone(),
                }
            }
            SetSpec::L1ball { r } => SetKind::L1Ball { radius: *r },
            SetSpec::L2ball { center, r } => {
                expect_len("set.l2ball.center", self.n, center.len())?;
                SetKind::L2Ball {
                    center: center.clone(),
                    radius: *r,
                }
            }
            SetSpec::Simplex {} => SetKind::Simplex,
            SetSpec::Bounded { r } => SetKind::BoundedWhole { radius: *r },
        };
        let reg = match self.reg {
            RegSpec::None {} => Regularizer::Zero,
            RegSpec::L1 { lambda } => Regularizer::L1 { weight: lambda },
        };
        SimpleSetProx::new(self.n, set, reg).map_err(|e| schema("set", e.to_string()))
    }

    fn smooth_part(&self) -> Result<SmoothPart<f64>> {
        Ok(match &self.smooth {
            SmoothSpec::Zero {} => Arc::new(ZeroSmooth::new(self.n)),
            SmoothSpec::Quadratic { hessian, q } => {
                expect_len("smooth.quadratic.q", self.n, q.len())?;
                match hessian {
                    None => Arc::new(Quadratic::linear(q.clone())),
                    Some(rows) => {
                        let h = dense_rows("smooth.quadratic.Q", rows, self.n)?;
                        expect_len("smooth.quadratic.Q", self.n, h.rows())?;
                        Arc::new(
                            Quadratic::new(h, q.clone())
                                .map_err(|e| schema("smooth.quadratic.Q", e.to_string()))?,
                        )
                    }
                }
            }
            SmoothSpec::Minmax { payoff, tau } => {
                let c = dense_rows("smooth.minmax.C", payoff, self.n)?;
                Arc::new(MinMaxGame::new(c, *tau).map_err(|e| schema("smooth.minmax", e.to_string()))?)
            }
        })
    }

    /// Validates dimensions and builds the program.
    pub fn to_program(&self) -> Result<ConicProgram<f64>> {
        if self.n == 0 {
            return Err(schema("n", "must be positive"));
        }
        let rows = self.rows();
        let cone = self.cone.to_cone();
        expect_len("cone", rows, cone.dim())?;
        expect_len("b", rows, self.b.len())?;
        if let MapSpec::Lmi { lmi } = &self.a {
            if !matches!(cone, Cone::Psd(d) if d == lmi.dim) {
                return Err(schema("cone", format!("an LMI map needs {{\"psd\": {}}}", lmi.dim)));
            }
        }
        if self.b.iter().any(|v| !v.is_finite()) {
            return Err(schema("b", "non-finite entry"));
        }
        let mut prog = ConicProgram::new(self.prox()?, self.smooth_part()?, self.map()?, self.b.clone(), cone)?;
        if let Some(x0) = &self.x0 {
            expect_len("x0", self.n, x0.len())?;
            prog = prog.with_witness(x0.clone()).map_err(|e| schema("x0", e.to_string()))?;
        }
        if let Some(r) = &self.reference {
            prog = prog
                .with_reference(r.clone())
                .map_err(|e| schema("reference", e.to_string()))?;
        }
        Ok(prog)
    }
}

impl From<&LpFixture> for ProblemFile {
    fn from(f: &LpFixture) -> Self {
        ProblemFile {
            n: f.lp.n(),
            cone: ConeSpec::Nonneg(f.lp.m()),
            a: MapSpec::Dense(f.lp.a.clone()),
            b: f.lp.b.clone(),
            set: SetSpec::Box {
                lo: f.lp.lo.clone(),
                hi: f.lp.hi.clone(),
            },
            reg: RegSpec::None {},
            smooth: SmoothSpec::Quadratic {
                hessian: None,
                q: f.lp.c.clone(),
            },
            reference: Some(f.reference()),
            x0: None,
        }
    }
}

impl From<&L1LmiInstance<f64>> for ProblemFile {
    fn from(inst: &L1LmiInstance<f64>) -> Self {
        let m = inst.order();
        ProblemFile {
            n: inst.dim(),
            cone: ConeSpec::Psd(m),
            a: MapSpec::Lmi {
                lmi: LmiSpec {
                    dim: m,
                    mats: inst.mats().iter().map(|a| a.to_rows()).collect(),
                },
            },
            b: inst.offset().svec().iter().map(|v| -v).collect(),
            set: SetSpec::L1ball { r: inst.radius() },
            reg: RegSpec::L1 { lambda: 1.0 },
            smooth: SmoothSpec::Zero {},
            reference: None,
            x0: Some(inst.witness().to_vec()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{box_lp_fixture, random_solvable_lp, BoxLp};
    use crate::solver::{solve, ScheduleConfig};

    const TWO_VAR: &str = r#"{
        "n": 2,
        "cone": {"nonneg": 1},
        "A": [[1.0, 1.0]],
        "b": [1.0],
        "set": {"box": {"lo": [0, 0], "hi": [1, 1]}},
        "smooth": {"quadratic": {"q": [1.0, 2.0]}},
        "reference": {"p_star": 1.0, "x_star": [1.0, 0.0], "y_star": [1.0]}
    }"#;

    #[test]
    fn parses_and_solves_two_var_lp() {
        let file = ProblemFile::from_json(TWO_VAR).unwrap();
        assert_eq!(file.reg, RegSpec::None {});
        let prog = file.to_program().unwrap();
        let trace = solve(&prog, &ScheduleConfig::default()).unwrap();
        assert!((trace.last().unwrap().obj - 1.0).abs() <= 1e-5);
    }

    #[test]
    fn round_trip_through_json() {
        let f = random_solvable_lp(3, 2, 4).unwrap();
        let file = ProblemFile::from(&f);
        let back = ProblemFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        let inst = L1LmiInstance::<f64>::random(3, 2, 1).unwrap();
        let file = ProblemFile::from(&inst);
        let back = ProblemFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        let prog = back.to_program().unwrap();
        let direct = inst.program().unwrap();
        let x = [0.1, -0.4, 0.3];
        assert_eq!(prog.residual(&x), direct.residual(&x));
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = ProblemFile::from_json("{\n  \"n\": 2,\n  oops\n}").unwrap_err();
        match err {
            Error::Schema { field, .. } => assert!(field.starts_with("line 3"), "{field}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_errors_name_the_field() {
        let bad = TWO_VAR.replace("\"b\": [1.0]", "\"b\": [1.0, 2.0]");
        let err = ProblemFile::from_json(&bad).unwrap().to_program().unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "b"), "{err:?}");
        let bad = TWO_VAR.replace("[[1.0, 1.0]]", "[[1.0]]");
        let err = ProblemFile::from_json(&bad).unwrap().to_program().unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "A[0]"), "{err:?}");
        let bad = TWO_VAR.replace("\"n\": 2,", "\"n\": 2, \"extra\": 1,");
        assert!(ProblemFile::from_json(&bad).is_err());
    }

    #[test]
    fn nonsymmetric_lmi_rejected() {
        let text = r#"{"n": 1, "cone": {"psd": 2}, "A": {"lmi": {"dim": 2, "mats": [[[1, 2], [0, 1]]]}},
            "b": [0, 0, 0], "set": {"l1ball": {"r": 1}}, "reg": {"l1": {"lambda": 1}}}"#;
        let err = ProblemFile::from_json(text).unwrap().to_program().unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field.starts_with("A.lmi")));
    }

    #[test]
    fn minmax_and_product_cone_parse() {
        let text = r#"{"n": 2, "cone": {"product": [{"nonneg": 1}, {"soc": 3}]},
            "A": [[1, 0], [0, 1], [1, 1], [1, -1]], "b": [0, 0, 0, 0],
            "set": {"simplex": {}}, "smooth": {"minmax": {"C": [[1, 2], [3, 4]], "tau": 0.5}}}"#;
        let prog = ProblemFile::from_json(text).unwrap().to_program().unwrap();
        assert_eq!(prog.rows(), 4);
        assert!(prog.smooth().lipschitz() > 0.0);
    }

    #[test]
    fn fixture_file_keeps_reference() {
        let f = box_lp_fixture(BoxLp::new(vec![1.0], vec![vec![1.0]], vec![0.5], vec![0.0], vec![1.0]).unwrap()).unwrap();
        let prog = ProblemFile::from(&f).to_program().unwrap();
        assert_eq!(prog.reference().unwrap().p_star, Some(0.5));
    }
}
