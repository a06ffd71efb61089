use serde::{Deserialize, Serialize};

use super::exponent::Exponent;
use super::poly::MultiPoly;
use super::shape::ProductSphereShape;
use crate::error::{Error, Result};

/// How a polynomial in a problem file is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Objective,
    /// Inequality constraint `g(x) ≥ 0`.
    Geq0,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDocument {
    pub exp: Vec<u32>,
    pub coef: f64,
}

/// On-disk polynomial: `{"shape": [...], "terms": [{"exp": [...], "coef": c}]}`
/// with an optional `"role"` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyDocument {
    pub shape: Vec<usize>,
    pub terms: Vec<TermDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
}

impl PolyDocument {
    pub fn to_poly(&self) -> Result<MultiPoly> {
        let shape = ProductSphereShape::new(self.shape.clone())?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                if t.exp.len() != shape.total_dim() {
                    return Err(Error::DimensionMismatch {
                        expected: shape.total_dim(),
                        got: t.exp.len(),
                    });
                }
                if !t.coef.is_finite() {
                    return Err(Error::Parse(format!("non-finite coefficient {}", t.coef)));
                }
                Ok((Exponent::new(t.exp.clone()), t.coef))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiPoly::from_terms(&shape, terms)
    }

    pub fn from_poly(p: &MultiPoly, role: Option<Role>) -> Self {
        Self {
            shape: p.shape().block_dims().to_vec(),
            terms: p
                .terms()
                .map(|(e, c)| TermDocument {
                    exp: e.powers().to_vec(),
                    coef: c,
                })
                .collect(),
            role,
        }
    }
}

impl MultiPoly {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PolyDocument::from_poly(self, None))
            .expect("polynomial documents always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: PolyDocument = serde_json::from_str(s)?;
        doc.to_poly()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_sums_duplicates() {
        let p = MultiPoly::from_json(
            r#"{"shape": [2, 2], "terms": [
                {"exp": [1, 0, 1, 0], "coef": 1.5},
                {"exp": [1, 0, 1, 0], "coef": -0.5},
                {"exp": [0, 0, 0, 0], "coef": 2.0}]}"#,
        )
        .unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.eval(&[1.0, 0.0, 1.0, 0.0]).unwrap(), 3.0);
    }

    #[test]
    fn rejects_bad_exponent_length() {
        let r = MultiPoly::from_json(r#"{"shape": [2], "terms": [{"exp": [1], "coef": 1}]}"#);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn role_tag_round_trips() {
        let doc: PolyDocument = serde_json::from_str(
            r#"{"shape": [2], "terms": [{"exp": [1, 0], "coef": 1}], "role": "geq0"}"#,
        )
        .unwrap();
        assert_eq!(doc.role, Some(Role::Geq0));
        let p = doc.to_poly().unwrap();
        assert_eq!(MultiPoly::from_json(&p.to_json()).unwrap(), p);
    }
}
