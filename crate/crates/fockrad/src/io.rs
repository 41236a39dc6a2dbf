//! File formats: tuple files, polynomial files, and fixed-precision JSON output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64};
use crate::toeplitz::MultiToeplitzPoly;
use crate::tuple::OperatorTuple;
use crate::words::Word;

/// Row-major nested arrays of `[re, im]` pairs.
pub type MatrixRepr = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_repr(m: &CMatrix) -> MatrixRepr {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_repr(r: &MatrixRepr, rows: usize, cols: usize, label: &str) -> Result<CMatrix> {
    if r.len() != rows {
        return Err(Error::Shape(format!("{label}: expected {rows} rows, found {}", r.len())));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, row) in r.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Shape(format!(
                "{label}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (j, z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(Error::NonFinite(format!("{label}: entry ({i},{j})")));
            }
            data.push(C64::new(z[0], z[1]));
        }
    }
    Ok(CMatrix::from_vec(rows, cols, data))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TupleFile {
    pub n: usize,
    pub dim: usize,
    pub matrices: Vec<MatrixRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl TupleFile {
    pub fn from_tuple(t: &OperatorTuple, name: Option<String>, seed: Option<u64>) -> Self {
        TupleFile {
            n: t.n(),
            dim: t.dim(),
            matrices: t.mats().iter().map(matrix_to_repr).collect(),
            name,
            seed,
        }
    }

    pub fn to_tuple(&self) -> Result<OperatorTuple> {
        if self.n == 0 {
            return Err(Error::Shape("n must be at least 1".into()));
        }
        if self.matrices.len() != self.n {
            return Err(Error::Shape(format!(
                "n = {} but {} matrices given",
                self.n,
                self.matrices.len()
            )));
        }
        let mats = self
            .matrices
            .iter()
            .enumerate()
            .map(|(i, r)| matrix_from_repr(r, self.dim, self.dim, &format!("matrix {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        OperatorTuple::new(mats)
    }
}

pub fn parse_tuple_str(s: &str) -> Result<OperatorTuple> {
    let f: TupleFile = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
    f.to_tuple()
}

pub fn parse_tuple(path: &std::path::Path) -> Result<OperatorTuple> {
    parse_tuple_str(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub word: Word,
    pub matrix: MatrixRepr,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyFile {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub coefficients: Vec<CoefficientEntry>,
    pub a0: MatrixRepr,
}

impl PolyFile {
    pub fn from_poly(p: &MultiToeplitzPoly) -> Self {
        PolyFile {
            n: p.n(),
            m: p.m(),
            d: p.d(),
            coefficients: p
                .coefficients()
                .iter()
                .map(|(w, a)| CoefficientEntry { word: w.clone(), matrix: matrix_to_repr(a) })
                .collect(),
            a0: matrix_to_repr(p.a0()),
        }
    }

    pub fn to_poly(&self) -> Result<MultiToeplitzPoly> {
        let a0 = matrix_from_repr(&self.a0, self.d, self.d, "a0")?;
        let coeffs = self
            .coefficients
            .iter()
            .map(|c| {
                let label = format!("coefficient {}", c.word);
                Ok((c.word.clone(), matrix_from_repr(&c.matrix, self.d, self.d, &label)?))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiToeplitzPoly::new(self.n, self.m, a0, coeffs)
    }
}

pub fn parse_poly_str(s: &str) -> Result<MultiToeplitzPoly> {
    let f: PolyFile = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
    f.to_poly()
}

/// A grid of points of `C^n` for spectrum queries: `[[[re, im], ...], ...]`.
pub fn parse_grid_str(s: &str, n: usize) -> Result<Vec<Vec<C64>>> {
    let raw: Vec<Vec<[f64; 2]>> = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
    raw.into_iter()
        .enumerate()
        .map(|(k, p)| {
            if p.len() != n {
                return Err(Error::Shape(format!("grid point {k} has {} coordinates, expected {n}", p.len())));
            }
            p.into_iter()
                .map(|z| {
                    if z[0].is_finite() && z[1].is_finite() {
                        Ok(C64::new(z[0], z[1]))
                    } else {
                        Err(Error::NonFinite(format!("grid point {k}")))
                    }
                })
                .collect()
        })
        .collect()
}

/// JSON formatter that prints every float with 17 significant digits.
pub struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        if v.is_finite() {
            write!(w, "{}", fmt17(v))
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, w: &mut W, v: f32) -> std::io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// `v` in scientific notation with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser).expect("serialization to memory cannot fail");
    let mut s = String::from_utf8(out).expect("JSON is UTF-8");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gaussian_matrix, rng_from_seed};

    #[test]
    fn tuple_round_trip() {
        let mut rng = rng_from_seed(17);
        for n in 1..4 {
            let t = OperatorTuple::new((0..n).map(|_| gaussian_matrix(&mut rng, 3, 3)).collect()).unwrap();
            let s = to_json(&TupleFile::from_tuple(&t, Some("x".into()), Some(5)));
            let back = parse_tuple_str(&s).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn identity_pair() {
        let s = r#"{"n":2,"dim":2,"matrices":[[[[1,0],[0,0]],[[0,0],[1,0]]],[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        let t = parse_tuple_str(s).unwrap();
        assert_eq!((t.n(), t.dim()), (2, 2));
        assert_eq!(t.get(1), &CMatrix::identity(2));
    }

    #[test]
    fn distinct_errors() {
        let bad_json = parse_tuple_str("{\"n\":1,").unwrap_err();
        let bad_shape =
            parse_tuple_str(r#"{"n":1,"dim":2,"matrices":[[[[1,0],[0,0]]]]}"#).unwrap_err();
        let bad_count = parse_tuple_str(r#"{"n":2,"dim":1,"matrices":[[[[1,0]]]]}"#).unwrap_err();
        let bad_value = parse_tuple_str(r#"{"n":1,"dim":1,"matrices":[[[[1e999,0]]]]}"#).unwrap_err();
        assert!(matches!(bad_json, Error::Json(_)));
        assert!(matches!(bad_shape, Error::Shape(_)));
        assert!(matches!(bad_count, Error::Shape(_)));
        assert!(matches!(bad_value, Error::Json(_) | Error::NonFinite(_)));
        assert_ne!(bad_json.code(), bad_shape.code());
        assert_ne!(bad_shape.code(), Error::NonFinite(String::new()).code());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
        let s = to_json(&vec![0.5f64, -2.0]);
        assert_eq!(s, "[5.0000000000000000e-1,-2.0000000000000000e0]\n");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.5, -2.0]);
    }
}
