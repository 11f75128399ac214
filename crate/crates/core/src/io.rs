//! JSON encoding of matrices, systems, solutions and reports.
//!
//! A matrix is `{"rows": m, "cols": n, "data": [[[w,x,y,z], ...], ...]}`.
//! Decoding walks the document by hand so that every error names the
//! offending field, e.g. `equations[1].B.data[2]`.

use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::matrix::QuatMatrix;
use crate::phi::{PhiEquation, PhiSolution, PhiSystem};
use crate::quat::{Involution, Quaternion};
use crate::sylvester::{ConsistencyReport, FourTermEquation, RankCondition, SylvesterSystem, SystemSolution};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("{path}: {source}")]
    Model {
        path: String,
        #[source]
        source: Error,
    },
}

fn field_err(path: &str, message: impl Into<String>) -> FormatError {
    FormatError::Field {
        path: path.to_string(),
        message: message.into(),
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, FormatError> {
    v.as_object()
        .ok_or_else(|| field_err(path_or_root(path), "expected an object"))
}

fn path_or_root(path: &str) -> &str {
    if path.is_empty() {
        "<root>"
    } else {
        path
    }
}

fn get<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, FormatError> {
    obj.get(key).ok_or_else(|| field_err(&join(path, key), "missing field"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, FormatError> {
    v.as_array().ok_or_else(|| field_err(path, "expected an array"))
}

fn usize_field(obj: &Map<String, Value>, path: &str, key: &str) -> Result<usize, FormatError> {
    let p = join(path, key);
    get(obj, path, key)?
        .as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| field_err(&p, "expected a nonnegative integer"))
}

fn number(v: &Value, path: &str) -> Result<f64, FormatError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| field_err(path, "expected a finite number"))
}

pub fn quaternion_to_json(q: Quaternion) -> Value {
    json!([q.w, q.x, q.y, q.z])
}

pub fn matrix_to_json(m: &QuatMatrix) -> Value {
    let data: Vec<Value> = (0..m.rows())
        .map(|i| Value::Array(m.row(i).iter().map(|&q| quaternion_to_json(q)).collect()))
        .collect();
    json!({"rows": m.rows(), "cols": m.cols(), "data": data})
}

pub fn matrix_from_json(v: &Value, path: &str) -> Result<QuatMatrix, FormatError> {
    let obj = object(v, path)?;
    let rows = usize_field(obj, path, "rows")?;
    let cols = usize_field(obj, path, "cols")?;
    let data_path = join(path, "data");
    let data = array(get(obj, path, "data")?, &data_path)?;
    if data.len() != rows {
        return Err(field_err(
            &data_path,
            format!("has {} rows, expected {rows}", data.len()),
        ));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for (i, row) in data.iter().enumerate() {
        let row_path = format!("{data_path}[{i}]");
        let row = array(row, &row_path)?;
        if row.len() != cols {
            return Err(field_err(
                &row_path,
                format!("has {} entries, expected {cols}", row.len()),
            ));
        }
        for (j, q) in row.iter().enumerate() {
            let q_path = format!("{row_path}[{j}]");
            let comps = array(q, &q_path)?;
            if comps.len() != 4 {
                return Err(field_err(&q_path, "expected [w, x, y, z]"));
            }
            let mut c = [0.0; 4];
            for (t, v) in comps.iter().enumerate() {
                c[t] = number(v, &format!("{q_path}[{t}]"))?;
            }
            entries.push(Quaternion::from_array(c));
        }
    }
    QuatMatrix::new(rows, cols, entries).map_err(|source| FormatError::Model {
        path: path_or_root(path).to_string(),
        source,
    })
}

fn matrix_list_to_json(ms: &[QuatMatrix]) -> Value {
    Value::Array(ms.iter().map(matrix_to_json).collect())
}

fn matrix_list_from_json(v: &Value, path: &str) -> Result<Vec<QuatMatrix>, FormatError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, m)| matrix_from_json(m, &format!("{path}[{i}]")))
        .collect()
}

fn reals_to_json(xs: &[f64]) -> Value {
    json!(xs)
}

fn reals_from_json(v: &Value, path: &str) -> Result<Vec<f64>, FormatError> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

/// `"k"` must match the number of equations.
fn equations_of(obj: &Map<String, Value>) -> Result<&Vec<Value>, FormatError> {
    let k = usize_field(obj, "", "k")?;
    let eqs = array(get(obj, "", "equations")?, "equations")?;
    if eqs.len() != k {
        return Err(field_err("equations", format!("has {} entries but k = {k}", eqs.len())));
    }
    Ok(eqs)
}

pub fn system_to_json(sys: &SylvesterSystem) -> Value {
    let eqs: Vec<Value> = sys
        .equations()
        .iter()
        .map(|eq| {
            json!({
                "A": matrix_to_json(eq.a()),
                "B": matrix_to_json(eq.b()),
                "C": matrix_to_json(eq.c()),
                "D": matrix_to_json(eq.d()),
                "F": matrix_to_json(eq.f()),
                "G": matrix_to_json(eq.g()),
                "E": matrix_to_json(eq.e()),
            })
        })
        .collect();
    json!({"k": sys.k(), "equations": eqs})
}

pub fn system_from_json(v: &Value) -> Result<SylvesterSystem, FormatError> {
    let obj = object(v, "")?;
    let mut equations = Vec::new();
    for (i, eq) in equations_of(obj)?.iter().enumerate() {
        let path = format!("equations[{i}]");
        let eobj = object(eq, &path)?;
        let m = |key: &str| matrix_from_json(get(eobj, &path, key)?, &join(&path, key));
        let equation =
            FourTermEquation::new(m("A")?, m("B")?, m("C")?, m("D")?, m("F")?, m("G")?, m("E")?).map_err(|source| {
                FormatError::Model {
                    path: path.clone(),
                    source,
                }
            })?;
        equations.push(equation);
    }
    SylvesterSystem::new(equations).map_err(|source| FormatError::Model {
        path: "equations".into(),
        source,
    })
}

pub fn phi_system_to_json(ps: &PhiSystem) -> Value {
    let eqs: Vec<Value> = ps
        .equations()
        .iter()
        .map(|eq| {
            json!({
                "A": matrix_to_json(eq.a()),
                "C": matrix_to_json(eq.c()),
                "F": matrix_to_json(eq.f()),
                "E": matrix_to_json(eq.e()),
            })
        })
        .collect();
    json!({"axis": ps.involution().axis(), "k": ps.k(), "equations": eqs})
}

pub fn phi_system_from_json(v: &Value) -> Result<PhiSystem, FormatError> {
    let obj = object(v, "")?;
    let axis = reals_from_json(get(obj, "", "axis")?, "axis")?;
    let axis: [f64; 3] = axis
        .try_into()
        .map_err(|_| field_err("axis", "expected three numbers"))?;
    let phi = Involution::from_axis(axis).map_err(|source| FormatError::Model {
        path: "axis".into(),
        source,
    })?;
    let mut equations = Vec::new();
    for (i, eq) in equations_of(obj)?.iter().enumerate() {
        let path = format!("equations[{i}]");
        let eobj = object(eq, &path)?;
        let m = |key: &str| matrix_from_json(get(eobj, &path, key)?, &join(&path, key));
        let equation = PhiEquation::new(m("A")?, m("C")?, m("F")?, m("E")?).map_err(|source| FormatError::Model {
            path: path.clone(),
            source,
        })?;
        equations.push(equation);
    }
    PhiSystem::new(phi, equations).map_err(|source| FormatError::Model {
        path: "equations".into(),
        source,
    })
}

/// A general or φ-structured instance, told apart by the `"axis"` field.
#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    General(SylvesterSystem),
    Phi(PhiSystem),
}

impl Instance {
    pub fn to_json(&self) -> Value {
        match self {
            Instance::General(s) => system_to_json(s),
            Instance::Phi(p) => phi_system_to_json(p),
        }
    }
}

pub fn instance_from_json(v: &Value) -> Result<Instance, FormatError> {
    let obj = object(v, "")?;
    if obj.contains_key("axis") {
        phi_system_from_json(v).map(Instance::Phi)
    } else {
        system_from_json(v).map(Instance::General)
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    instance_from_json(&serde_json::from_str(text)?)
}

pub fn solution_to_json(sol: &SystemSolution) -> Value {
    json!({
        "X": matrix_list_to_json(&sol.x),
        "Y": matrix_list_to_json(&sol.y),
        "Z": matrix_list_to_json(&sol.z),
        "residuals": reals_to_json(&sol.residuals),
    })
}

/// `"residuals"` is optional on input.
pub fn solution_from_json(v: &Value) -> Result<SystemSolution, FormatError> {
    let obj = object(v, "")?;
    let residuals = match obj.get("residuals") {
        Some(r) => reals_from_json(r, "residuals")?,
        None => Vec::new(),
    };
    Ok(SystemSolution::new(
        matrix_list_from_json(get(obj, "", "X")?, "X")?,
        matrix_list_from_json(get(obj, "", "Y")?, "Y")?,
        matrix_list_from_json(get(obj, "", "Z")?, "Z")?,
        residuals,
    ))
}

pub fn phi_solution_to_json(sol: &PhiSolution) -> Value {
    json!({
        "X": matrix_list_to_json(&sol.x),
        "Z": matrix_list_to_json(&sol.z),
        "residuals": reals_to_json(&sol.residuals),
        "phi_defects": reals_to_json(&sol.phi_defects),
    })
}

pub fn phi_solution_from_json(v: &Value) -> Result<PhiSolution, FormatError> {
    let obj = object(v, "")?;
    let residuals = match obj.get("residuals") {
        Some(r) => reals_from_json(r, "residuals")?,
        None => Vec::new(),
    };
    Ok(PhiSolution::new(
        matrix_list_from_json(get(obj, "", "X")?, "X")?,
        matrix_list_from_json(get(obj, "", "Z")?, "Z")?,
        residuals,
    ))
}

pub fn condition_to_json(c: &RankCondition) -> Value {
    json!({
        "family": c.family.name(),
        "m": c.m,
        "n": c.n,
        "lhs_rank": c.lhs_rank,
        "rhs_rank": c.rhs_rank,
        "margin_lhs": c.margin_lhs,
        "margin_rhs": c.margin_rhs,
        "pass": c.pass,
    })
}

pub fn report_to_json(r: &ConsistencyReport) -> Value {
    json!({
        "consistent": r.consistent,
        "conditions": r.conditions.iter().map(condition_to_json).collect::<Vec<_>>(),
    })
}

/// Pretty-printed with sorted keys and a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
