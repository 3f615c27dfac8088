//! JSON encoding of model elements.
//!
//! A complex number is `[re, im]` (a bare real is also accepted), a matrix is
//! a row-major nested array, and a symbol is
//! `{"d": d, "coeffs": {"k": matrix, ...}}` keyed by the power `k`.

use serde_json::{json, Map, Value};

use super::{Laurent, ModelElement, SubdiagonalModel};
use crate::error::{Error, Result};
use crate::opcore::{CMat, C64};

pub fn complex_to_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn complex_from_json(v: &Value) -> Result<C64> {
    match v {
        Value::Number(n) => Ok(C64::new(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64();
            let im = a[1].as_f64();
            match (re, im) {
                (Some(re), Some(im)) => Ok(C64::new(re, im)),
                _ => Err(Error::Parse(format!("bad complex number {v}"))),
            }
        }
        _ => Err(Error::Parse(format!("bad complex number {v}"))),
    }
}

pub fn matrix_to_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value) -> Result<CMat> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let n = rows.len();
    let mut cols = None;
    let mut entries = Vec::new();
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?;
        if *cols.get_or_insert(row.len()) != row.len() {
            return Err(Error::Shape("ragged matrix".into()));
        }
        for z in row {
            entries.push(complex_from_json(z)?);
        }
    }
    Ok(CMat::from_row_slice(n, cols.unwrap_or(0), &entries))
}

pub fn element_to_json(x: &ModelElement) -> Value {
    match x {
        ModelElement::Matrix(m) => matrix_to_json(m),
        ModelElement::Laurent(l) => {
            let coeffs: Map<String, Value> = l
                .iter()
                .filter(|(_, c)| c.iter().any(|z| z.norm() > 0.0))
                .map(|(k, c)| (k.to_string(), matrix_to_json(c)))
                .collect();
            json!({ "d": l.d(), "coeffs": coeffs })
        }
    }
}

pub fn element_from_json(v: &Value) -> Result<ModelElement> {
    match v {
        Value::Array(_) => {
            let m = matrix_from_json(v)?;
            if m.nrows() != m.ncols() {
                return Err(Error::NotSquare {
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
            Ok(ModelElement::Matrix(m))
        }
        Value::Object(obj) => {
            let d = obj
                .get("d")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse("symbol needs integer field `d`".into()))?
                as usize;
            let coeffs = obj
                .get("coeffs")
                .and_then(Value::as_object)
                .ok_or_else(|| Error::Parse("symbol needs object field `coeffs`".into()))?;
            let pairs = coeffs
                .iter()
                .map(|(k, c)| {
                    let k: i64 = k
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad power `{k}`")))?;
                    Ok((k, matrix_from_json(c)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ModelElement::Laurent(Laurent::from_pairs(d, pairs)?))
        }
        _ => Err(Error::Parse("element must be a matrix or a symbol object".into())),
    }
}

/// Parses an element and checks it against `model`.
pub fn element_for_model(model: &SubdiagonalModel, v: &Value) -> Result<ModelElement> {
    let x = element_from_json(v)?;
    model.check(&x)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{c, real};

    #[test]
    fn round_trips() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, -2.0), real(0.5), real(0.0), c(0.0, 3.0)]);
        let x = ModelElement::Matrix(m);
        assert_eq!(element_from_json(&element_to_json(&x)).unwrap(), x);
        let l = Laurent::scalar(&[(-2, c(1.0, 1.0)), (0, real(2.0)), (1, real(-1.0))]);
        let y = ModelElement::Laurent(l);
        assert_eq!(element_from_json(&element_to_json(&y)).unwrap(), y);
    }

    #[test]
    fn accepts_real_entries_and_rejects_garbage() {
        let v: Value = serde_json::from_str("[[1, 2], [0, 3]]").unwrap();
        let x = element_from_json(&v).unwrap();
        assert_eq!(x.as_matrix().unwrap()[(0, 1)], real(2.0));
        let bad: Value = serde_json::from_str("[[1, 2], [0]]").unwrap();
        assert!(element_from_json(&bad).is_err());
        assert!(element_from_json(&json!("x")).is_err());
        let model = SubdiagonalModel::triangular(3).unwrap();
        assert!(element_for_model(&model, &v).is_err());
    }
}
