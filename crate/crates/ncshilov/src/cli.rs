//! JSON problem files and reports for the `ncshilov` binary.
//!
//! A problem file selects a task, a seed, optional tolerance overrides,
//! and a task-specific payload.  Operator spaces are given either
//! inline (`{"rows": r, "cols": c, "basis": [...]}`, each basis matrix
//! a row-major list of `[re, im]` pairs) or by gallery name
//! (`{"gallery": "weighted_row3"}`).  Reports serialize deterministically: a
//! fixed `(problem, seed)` pair produces byte-identical output.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::envelope::{triple_envelope_with, EnvelopeOptions, TripleEnvelope};
use crate::gallery;
use crate::matcore::{CMatrix, CVector, Tolerances, C64};
use crate::minspace::{
    cross_validate_multipliers, env_banach_check, realize_min, Ball, BanachSpace,
};
use crate::multiplier::{
    adjointable_left, adjointable_right, banach_stone, left_multipliers, multiplier_norm,
    right_multipliers,
};
use crate::oplication::{brs_certify, derive_theta, verify_cc, BilinearAction, CcVerdict};
use crate::opspace::OperatorSpace;
use crate::search::SearchParams;
use crate::{Error, Result};

/// Version tag accepted in problem files.
pub const PROBLEM_VERSION: &str = "1";

/// The tasks the front end can dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Envelope,
    Multipliers,
    Brs,
    Oplication,
    BanachStone,
    MinCrossValidate,
}

impl Task {
    pub fn parse(s: &str) -> Result<Task> {
        match s {
            "envelope" => Ok(Task::Envelope),
            "multipliers" => Ok(Task::Multipliers),
            "brs" => Ok(Task::Brs),
            "oplication" => Ok(Task::Oplication),
            "banach_stone" => Ok(Task::BanachStone),
            "min_cross_validate" => Ok(Task::MinCrossValidate),
            other => Err(Error::InvalidInput(format!(
                "unknown task '{other}' (expected envelope, multipliers, brs, \
                 oplication, banach_stone or min_cross_validate)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::Envelope => "envelope",
            Task::Multipliers => "multipliers",
            Task::Brs => "brs",
            Task::Oplication => "oplication",
            Task::BanachStone => "banach_stone",
            Task::MinCrossValidate => "min_cross_validate",
        }
    }
}

/// Optional tolerance overrides in a problem file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ToleranceOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_eps: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Result<Tolerances> {
        let tol = Tolerances {
            rank_eps: self.rank_eps.unwrap_or(base.rank_eps),
            norm_eps: self.norm_eps.unwrap_or(base.norm_eps),
            gap_eps: self.gap_eps.unwrap_or(base.gap_eps),
        };
        tol.validate()?;
        Ok(tol)
    }
}

/// A parsed problem file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub version: String,
    pub task: Task,
    #[serde(default)]
    pub payload: Value,
    #[serde(default)]
    pub tolerances: Option<ToleranceOverrides>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<ProblemFile> {
        let p: ProblemFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("problem file: {e}")))?;
        if p.version != PROBLEM_VERSION {
            return Err(Error::InvalidInput(format!(
                "unrecognized version '{}' (expected '{PROBLEM_VERSION}')",
                p.version
            )));
        }
        Ok(p)
    }
}

/// The machine-readable report emitted for every computed verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub task: String,
    pub tool_version: String,
    pub seed: u64,
    pub tolerances: ReportTolerances,
    pub verdicts: Vec<String>,
    pub warnings: Vec<String>,
    pub data: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportTolerances {
    pub rank_eps: f64,
    pub norm_eps: f64,
    pub gap_eps: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table for `--human`.
    pub fn to_human(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("task      {}\n", self.task));
        out.push_str(&format!("seed      {}\n", self.seed));
        out.push_str(&format!(
            "tol       rank {:.1e}  norm {:.1e}  gap {:.1e}\n",
            self.tolerances.rank_eps, self.tolerances.norm_eps, self.tolerances.gap_eps
        ));
        for v in &self.verdicts {
            out.push_str(&format!("verdict   {v}\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning   {w}\n"));
        }
        if let Value::Object(map) = &self.data {
            for (k, v) in map {
                out.push_str(&format!("{k:<24} {v}\n"));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------
// JSON codecs for matrices and spaces
// ---------------------------------------------------------------------

fn json_err(field: &str, msg: &str) -> Error {
    Error::InvalidInput(format!("payload field '{field}': {msg}"))
}

fn complex_from_json(v: &Value, field: &str) -> Result<C64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| json_err(field, "complex entries must be [re, im] pairs"))?;
    let re = pair[0]
        .as_f64()
        .ok_or_else(|| json_err(field, "non-numeric real part"))?;
    let im = pair[1]
        .as_f64()
        .ok_or_else(|| json_err(field, "non-numeric imaginary part"))?;
    Ok(C64::new(re, im))
}

/// Parse a row-major matrix given as a flat list of `[re, im]` pairs.
pub fn matrix_from_json(v: &Value, rows: usize, cols: usize, field: &str) -> Result<CMatrix> {
    let entries = v
        .as_array()
        .ok_or_else(|| json_err(field, "matrix must be a flat row-major list"))?;
    if entries.len() != rows * cols {
        return Err(json_err(
            field,
            &format!("expected {} entries, found {}", rows * cols, entries.len()),
        ));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (idx, e) in entries.iter().enumerate() {
        m[(idx / cols, idx % cols)] = complex_from_json(e, field)?;
    }
    Ok(m)
}

pub fn vector_from_json(v: &Value, field: &str) -> Result<CVector> {
    let entries = v
        .as_array()
        .ok_or_else(|| json_err(field, "vector must be a list of [re, im] pairs"))?;
    let mut out = CVector::zeros(entries.len());
    for (i, e) in entries.iter().enumerate() {
        out[i] = complex_from_json(e, field)?;
    }
    Ok(out)
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            entries.push(serde_json::json!([m[(i, j)].re, m[(i, j)].im]));
        }
    }
    Value::Array(entries)
}

/// Parse an operator space: inline basis or gallery reference.
pub fn space_from_json(
    v: &Value,
    field: &str,
    sample_size: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<OperatorSpace> {
    let obj = v
        .as_object()
        .ok_or_else(|| json_err(field, "expected an object"))?;
    if let Some(name) = obj.get("gallery") {
        let name = name
            .as_str()
            .ok_or_else(|| json_err(field, "gallery name must be a string"))?;
        return Ok(gallery::fixture(name, sample_size, seed, tol)?.space);
    }
    let rows = obj
        .get("rows")
        .and_then(Value::as_u64)
        .ok_or_else(|| json_err(field, "missing integer 'rows'"))? as usize;
    let cols = obj
        .get("cols")
        .and_then(Value::as_u64)
        .ok_or_else(|| json_err(field, "missing integer 'cols'"))? as usize;
    let basis_json = obj
        .get("basis")
        .and_then(Value::as_array)
        .ok_or_else(|| json_err(field, "missing array 'basis'"))?;
    let mut basis = Vec::with_capacity(basis_json.len());
    for (k, b) in basis_json.iter().enumerate() {
        basis.push(matrix_from_json(b, rows, cols, &format!("{field}.basis[{k}]"))?);
    }
    let label = obj
        .get("label")
        .and_then(Value::as_str)
        .unwrap_or("inline");
    OperatorSpace::new(rows, cols, basis, label, tol)
}

fn banach_from_json(v: &Value, field: &str) -> Result<BanachSpace> {
    let obj = v
        .as_object()
        .ok_or_else(|| json_err(field, "expected an object"))?;
    let dim = obj
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| json_err(field, "missing integer 'dim'"))? as usize;
    let ball = obj
        .get("ball")
        .ok_or_else(|| json_err(field, "missing 'ball'"))?;
    match ball {
        Value::String(s) => match s.as_str() {
            "l1" => Ok(BanachSpace::l1(dim)),
            "linf" => Ok(BanachSpace::linf(dim)),
            "l2" => Ok(BanachSpace::l2(dim)),
            other => Err(json_err(field, &format!("unknown ball '{other}'"))),
        },
        Value::Object(o) => {
            let verts = o
                .get("polytope")
                .and_then(Value::as_array)
                .ok_or_else(|| json_err(field, "ball object must carry 'polytope'"))?;
            let mut pts = Vec::with_capacity(verts.len());
            for p in verts {
                let xy = p
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| json_err(field, "polytope vertices must be [x, y]"))?;
                pts.push([
                    xy[0].as_f64().ok_or_else(|| json_err(field, "non-numeric vertex"))?,
                    xy[1].as_f64().ok_or_else(|| json_err(field, "non-numeric vertex"))?,
                ]);
            }
            BanachSpace::new(dim, Ball::Polytope(pts), "polytope")
        }
        _ => Err(json_err(field, "'ball' must be a string or a polytope object")),
    }
}

// ---------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------

fn payload_u64(p: &Value, key: &str) -> Option<u64> {
    p.get(key).and_then(Value::as_u64)
}

fn cc_verdict_json(v: &CcVerdict) -> Value {
    match v {
        CcVerdict::Pass => serde_json::json!({ "verdict": "pass" }),
        CcVerdict::Fail { level, ratio, .. } => serde_json::json!({
            "verdict": "fail", "level": level, "ratio": ratio,
        }),
        CcVerdict::Inconclusive { ratio } => serde_json::json!({
            "verdict": "inconclusive", "ratio": ratio,
        }),
    }
}

fn compute_envelope(
    space: &OperatorSpace,
    seed: u64,
    level_cap: Option<usize>,
    tol: &Tolerances,
) -> Result<TripleEnvelope> {
    let mut opts = EnvelopeOptions::new(seed);
    if let Some(cap) = level_cap {
        opts = opts.with_level_cap(cap);
    }
    triple_envelope_with(space, tol, &opts)
}

fn envelope_data(env: &TripleEnvelope) -> Value {
    let block_sizes: Vec<usize> = env
        .linking
        .decomposition
        .blocks
        .iter()
        .map(|b| b.dim)
        .collect();
    let removed: Vec<usize> = env.shilov_ideal.block_indices.iter().copied().collect();
    let kept_sizes: Vec<usize> = env.quotient_map.kept.iter().map(|b| b.dim).collect();
    serde_json::json!({
        "space_dim": env.source.dim(),
        "space_shape": [env.source.rows, env.source.cols],
        "linking_dim": env.linking.algebra.dim(),
        "linking_block_sizes": block_sizes,
        "shilov_ideal_blocks": removed,
        "envelope_block_sizes": kept_sizes,
        "quotient_dim": env.quotient.dim(),
        "triple_system_dim": env.t_basis.len(),
        "left_corner_dim": env.e_corner.dim(),
        "right_corner_dim": env.f_corner.dim(),
        "embedding_defect": env.j_report.defect,
        "greedy_fallback": env.boundary.greedy_fallback,
    })
}

fn run_envelope(p: &Value, seed: u64, level_cap: Option<usize>, tol: &Tolerances) -> Result<(Vec<String>, Value)> {
    let sample = payload_u64(p, "sample_size").unwrap_or(32) as usize;
    let space = space_from_json(
        p.get("space").ok_or_else(|| json_err("space", "missing"))?,
        "space",
        sample,
        seed,
        tol,
    )?;
    let env = compute_envelope(&space, seed, level_cap, tol)?;
    let verdicts = vec![format!(
        "triple envelope computed: {} block(s) {:?}, triple system of dimension {}",
        env.quotient_map.kept.len(),
        env.quotient_map.kept.iter().map(|b| b.dim).collect::<Vec<_>>(),
        env.t_basis.len()
    )];
    Ok((verdicts, envelope_data(&env)))
}

fn run_multipliers(
    p: &Value,
    seed: u64,
    level_cap: Option<usize>,
    tol: &Tolerances,
) -> Result<(Vec<String>, Value)> {
    let sample = payload_u64(p, "sample_size").unwrap_or(32) as usize;
    let space = space_from_json(
        p.get("space").ok_or_else(|| json_err("space", "missing"))?,
        "space",
        sample,
        seed,
        tol,
    )?;
    let env = compute_envelope(&space, seed, level_cap, tol)?;
    let params = SearchParams::default().with_seed(seed);
    let ml = left_multipliers(&env, tol)?;
    let mr = right_multipliers(&env, tol)?;
    let al = adjointable_left(&env, tol)?;
    let ar = adjointable_right(&env, tol)?;
    let mut data = serde_json::json!({
        "envelope": envelope_data(&env),
        "left_dim": ml.dim(),
        "right_dim": mr.dim(),
        "adjointable_left_dim": al.dim(),
        "adjointable_right_dim": ar.dim(),
    });
    let mut verdicts = vec![format!(
        "multiplier dims: M_l {}, M_r {}, A_l {}, A_r {}",
        ml.dim(),
        mr.dim(),
        al.dim(),
        ar.dim()
    )];
    if let Some(ops) = p.get("operators").and_then(Value::as_array) {
        let d = space.dim();
        let mut norms = Vec::new();
        for (k, op_json) in ops.iter().enumerate() {
            let op = matrix_from_json(op_json, d, d, &format!("operators[{k}]"))?;
            let res = multiplier_norm(&env, &ml, &op, tol, &params)?;
            verdicts.push(format!(
                "operator {k}: multiplier norm {:.9}, cb lower bound {:.9}",
                res.multiplier_norm, res.cb_norm_lower
            ));
            norms.push(serde_json::json!({
                "multiplier_norm": res.multiplier_norm,
                "cb_norm_lower": res.cb_norm_lower,
            }));
        }
        data["operator_norms"] = Value::Array(norms);
    }
    Ok((verdicts, data))
}

fn action_from_payload(
    p: &Value,
    seed: u64,
    tol: &Tolerances,
) -> Result<(BilinearAction, OperatorSpace)> {
    let sample = payload_u64(p, "sample_size").unwrap_or(32) as usize;
    let x = space_from_json(
        p.get("x").ok_or_else(|| json_err("x", "missing"))?,
        "x",
        sample,
        seed,
        tol,
    )?;
    let y = match p.get("y") {
        Some(v) => space_from_json(v, "y", sample, seed, tol)?,
        None => x.clone(),
    };
    let m_json = p
        .get("m")
        .and_then(Value::as_array)
        .ok_or_else(|| json_err("m", "missing array of action matrices"))?;
    let d = x.dim();
    let mut m = Vec::with_capacity(m_json.len());
    for (k, mj) in m_json.iter().enumerate() {
        m.push(matrix_from_json(mj, d, d, &format!("m[{k}]"))?);
    }
    let e = match p.get("e") {
        Some(v) => Some(vector_from_json(v, "e")?),
        None => None,
    };
    let action = BilinearAction::new(y, x.clone(), m, e, tol)?;
    Ok((action, x))
}

fn run_brs(p: &Value, seed: u64, level_cap: Option<usize>, tol: &Tolerances) -> Result<(Vec<String>, Value)> {
    let (action, x) = action_from_payload(p, seed, tol)?;
    let e = action
        .identity_coeffs
        .clone()
        .ok_or_else(|| json_err("e", "brs requires unit coefficients"))?;
    if !action.is_self_action() {
        return Err(json_err("y", "brs checks a multiplication of X on itself; omit 'y'"));
    }
    let env = compute_envelope(&x, seed, level_cap, tol)?;
    let params = SearchParams::default().with_seed(seed);
    let cert = brs_certify(&x, action.m.clone(), e, &env, tol, &params)?;
    let verdicts = vec![if cert.is_operator_algebra {
        "certified operator algebra".to_string()
    } else {
        "not an operator algebra under the given multiplication".to_string()
    }];
    let data = serde_json::json!({
        "cc": cc_verdict_json(&cert.cc_verdict),
        "is_operator_algebra": cert.is_operator_algebra,
        "associative": cert.associative,
        "theta_unital": cert.certificate.as_ref().and_then(|c| c.theta_unital),
        "theta_homomorphism": cert.certificate.as_ref().and_then(|c| c.theta_homomorphism),
        "theta_completely_isometric": cert
            .certificate
            .as_ref()
            .map(|c| c.theta_completely_isometric),
    });
    Ok((verdicts, data))
}

fn run_oplication(
    p: &Value,
    seed: u64,
    level_cap: Option<usize>,
    tol: &Tolerances,
) -> Result<(Vec<String>, Value)> {
    let (action, x) = action_from_payload(p, seed, tol)?;
    let params = SearchParams::default().with_seed(seed);
    let cap = level_cap.unwrap_or_else(|| x.rows.max(x.cols).max(1));
    let cc = verify_cc(&action, cap, tol, &params)?;
    if !cc.passed() {
        let data = serde_json::json!({ "cc": cc_verdict_json(&cc) });
        return Ok((
            vec!["action is not completely contractive; no theta derived".into()],
            data,
        ));
    }
    let env = compute_envelope(&x, seed, level_cap, tol)?;
    let cert = derive_theta(&action, &env, cc, tol, &params)?;
    let verdicts = vec![format!(
        "theta derived into M_l(X): unital {:?}, homomorphism {:?}, completely isometric {}",
        cert.theta_unital, cert.theta_homomorphism, cert.theta_completely_isometric
    )];
    let data = serde_json::json!({
        "cc": cc_verdict_json(&cert.cc_verdict),
        "theta_unital": cert.theta_unital,
        "theta_homomorphism": cert.theta_homomorphism,
        "theta_completely_isometric": cert.theta_completely_isometric,
        "adjointable_range": cert.adjointable_range,
        "theta": cert.theta.iter().map(matrix_to_json).collect::<Vec<_>>(),
    });
    Ok((verdicts, data))
}

fn run_banach_stone(p: &Value, seed: u64, tol: &Tolerances) -> Result<(Vec<String>, Value)> {
    let sample = payload_u64(p, "sample_size").unwrap_or(32) as usize;
    let a = space_from_json(
        p.get("a").ok_or_else(|| json_err("a", "missing"))?,
        "a",
        sample,
        seed,
        tol,
    )?;
    let b = space_from_json(
        p.get("b").ok_or_else(|| json_err("b", "missing"))?,
        "b",
        sample,
        seed,
        tol,
    )?;
    let a_unit = vector_from_json(
        p.get("a_unit").ok_or_else(|| json_err("a_unit", "missing"))?,
        "a_unit",
    )?;
    let b_unit = vector_from_json(
        p.get("b_unit").ok_or_else(|| json_err("b_unit", "missing"))?,
        "b_unit",
    )?;
    let tmap = matrix_from_json(
        p.get("t").ok_or_else(|| json_err("t", "missing"))?,
        a.dim(),
        a.dim(),
        "t",
    )?;
    let params = SearchParams::default().with_seed(seed);
    let res = banach_stone(&a, &a_unit, &b, &b_unit, &tmap, tol, &params)?;
    let verdicts = vec![format!(
        "factorized T = u·pi with unitary defect {:.3e}; pi homomorphism: {}",
        res.u_unitary_defect, res.pi_is_homomorphism
    )];
    let data = serde_json::json!({
        "u": matrix_to_json(&res.u),
        "u_unitary_defect": res.u_unitary_defect,
        "pi_is_homomorphism": res.pi_is_homomorphism,
        "pi_completely_isometric": res.pi_report.is_complete_isometry,
        "triple_promotion_ok": res.triple_promotion_ok,
    });
    Ok((verdicts, data))
}

fn run_min_cross_validate(p: &Value, seed: u64, tol: &Tolerances) -> Result<(Vec<String>, Value)> {
    let banach = banach_from_json(
        p.get("banach").ok_or_else(|| json_err("banach", "missing"))?,
        "banach",
    )?;
    let sample = payload_u64(p, "sample_size").unwrap_or(32) as usize;
    let r = realize_min(&banach, sample, seed, tol)?;
    let cv = cross_validate_multipliers(&r, tol, seed)?;
    let verdicts = vec![format!(
        "multiplier dims: banach {}, envelope {} ({}); max norm gap {:.3e}",
        cv.banach_dim,
        cv.envelope_dim,
        if cv.dims_agree { "agree" } else { "disagree" },
        cv.max_norm_gap
    )];
    let data = serde_json::json!({
        "banach_dim": cv.banach_dim,
        "envelope_dim": cv.envelope_dim,
        "dims_agree": cv.dims_agree,
        "max_norm_gap": cv.max_norm_gap,
        "sampled_functionals": r.functionals.len(),
        "dual_sphere_defect": env_banach_check(&r),
    });
    Ok((verdicts, data))
}

/// Dispatch a problem file and build the report.
pub fn run(problem: &ProblemFile) -> Result<Report> {
    run_with(problem, None, None)
}

/// Dispatch with command-line overrides for seed and level cap.
pub fn run_with(
    problem: &ProblemFile,
    seed_override: Option<u64>,
    level_cap: Option<usize>,
) -> Result<Report> {
    let seed = seed_override.or(problem.seed).unwrap_or(42);
    let tol = problem
        .tolerances
        .clone()
        .unwrap_or_default()
        .apply(Tolerances::default())?;
    let p = &problem.payload;
    let (verdicts, data) = match problem.task {
        Task::Envelope => run_envelope(p, seed, level_cap, &tol)?,
        Task::Multipliers => run_multipliers(p, seed, level_cap, &tol)?,
        Task::Brs => run_brs(p, seed, level_cap, &tol)?,
        Task::Oplication => run_oplication(p, seed, level_cap, &tol)?,
        Task::BanachStone => run_banach_stone(p, seed, &tol)?,
        Task::MinCrossValidate => run_min_cross_validate(p, seed, &tol)?,
    };
    Ok(Report {
        task: problem.task.name().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        tolerances: ReportTolerances {
            rank_eps: tol.rank_eps,
            norm_eps: tol.norm_eps,
            gap_eps: tol.gap_eps,
        },
        verdicts,
        warnings: Vec::new(),
        data,
    })
}

/// A canonical problem file for a gallery fixture under a given task.
pub fn gallery_problem(task: Task, name: &str, seed: u64) -> Result<ProblemFile> {
    if !gallery::NAMES.contains(&name) && name != "d2" && name != "m2" {
        return Err(Error::InvalidInput(format!(
            "unknown gallery fixture '{name}'; known names: {}",
            gallery::NAMES.join(", ")
        )));
    }
    let payload = match task {
        Task::MinCrossValidate => {
            let ball = match name {
                "l1_2" => "l1",
                "linf_2" => "linf",
                other => {
                    return Err(Error::InvalidInput(format!(
                        "fixture '{other}' is not a Banach-space fixture; \
                         min_cross_validate accepts l1_2 or linf_2"
                    )))
                }
            };
            serde_json::json!({ "banach": { "dim": 2, "ball": ball }, "sample_size": 32 })
        }
        _ => serde_json::json!({ "space": { "gallery": name } }),
    };
    Ok(ProblemFile {
        version: PROBLEM_VERSION.to_string(),
        task,
        payload,
        tolerances: None,
        seed: Some(seed),
    })
}

/// Exit code classification for the binary: input and hypothesis
/// problems exit 2, numerics alarms exit 3.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::NotApplicable(_)
        | Error::NotHermitian(_)
        | Error::NotIsometric(_)
        | Error::NotAMultiplier(_) => 2,
        Error::NumericalDegeneracy(_)
        | Error::InconsistentNumerics(_)
        | Error::StructureViolation(_)
        | Error::TheoremViolation(_) => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(task: &str, payload: Value) -> ProblemFile {
        ProblemFile {
            version: PROBLEM_VERSION.to_string(),
            task: Task::parse(task).unwrap(),
            payload,
            tolerances: None,
            seed: Some(42),
        }
    }

    #[test]
    fn envelope_on_gallery_fixture() {
        let p = problem("envelope", serde_json::json!({ "space": { "gallery": "t2" } }));
        let r = run(&p).unwrap();
        assert_eq!(r.task, "envelope");
        assert_eq!(r.data["triple_system_dim"], 4);
        assert_eq!(r.data["shilov_ideal_blocks"], serde_json::json!([]));
    }

    #[test]
    fn inline_space_roundtrip() {
        // span{e11} in M_2, written out as [re, im] pairs.
        let payload = serde_json::json!({
            "space": {
                "rows": 2, "cols": 2,
                "basis": [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]],
            }
        });
        let p = problem("envelope", payload);
        let r = run(&p).unwrap();
        assert_eq!(r.data["space_dim"], 1);
        assert_eq!(r.data["triple_system_dim"], 1);
    }

    #[test]
    fn ragged_basis_is_an_input_error() {
        let payload = serde_json::json!({
            "space": {
                "rows": 2, "cols": 2,
                "basis": [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]],
            }
        });
        let p = problem("envelope", payload);
        let err = run(&p).unwrap_err();
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn reports_are_byte_identical() {
        let p = problem("envelope", serde_json::json!({ "space": { "gallery": "t2" } }));
        let a = run(&p).unwrap().to_json();
        let b = run(&p).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_gallery_name_lists_fixtures() {
        let err = gallery_problem(Task::Envelope, "nope", 42).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("weighted_row3") && msg.contains("linf_2"));
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn version_gate() {
        let text = r#"{ "version": "99", "task": "envelope" }"#;
        assert!(ProblemFile::from_json(text).is_err());
    }

    #[test]
    fn min_cross_validate_task_runs() {
        let p = problem(
            "min_cross_validate",
            serde_json::json!({ "banach": { "dim": 2, "ball": "linf" }, "sample_size": 8 }),
        );
        let r = run(&p).unwrap();
        assert_eq!(r.data["dims_agree"], true);
    }
}
