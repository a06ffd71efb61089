use serde::Deserialize;
use spheropt::polyring::{PolyDocument, Role};
use spheropt::tensor::DenseTensor;
use spheropt::{MultiPoly, PolyProblem};

use crate::CliError;

#[derive(Deserialize)]
#[serde(untagged)]
enum ProblemFile {
    Single(PolyDocument),
    Many(Vec<PolyDocument>),
}

/// Problem files hold one polynomial (the objective) or an array of
/// polynomials tagged `"objective"` / `"geq0"`. An untagged entry in an
/// array is the objective.
pub fn parse_problem(text: &str) -> Result<PolyProblem, CliError> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
    let docs = match file {
        ProblemFile::Single(d) => vec![d],
        ProblemFile::Many(v) => v,
    };
    let mut objective: Option<MultiPoly> = None;
    let mut inequalities = Vec::new();
    for d in docs {
        let p = d.to_poly().map_err(|e| CliError::Input(e.to_string()))?;
        match d.role {
            Some(Role::Geq0) => inequalities.push(p),
            Some(Role::Objective) | None => {
                if objective.replace(p).is_some() {
                    return Err(CliError::Input("more than one objective".into()));
                }
            }
        }
    }
    let objective = objective.ok_or_else(|| CliError::Input("no objective".into()))?;
    if let Some(g) = inequalities.iter().find(|g| g.shape() != objective.shape()) {
        return Err(CliError::Input(format!(
            "constraint shape {:?} differs from objective shape {:?}",
            g.shape().block_dims(),
            objective.shape().block_dims()
        )));
    }
    Ok(PolyProblem::on_product_of_spheres(objective).with_inequalities(inequalities))
}

pub fn parse_tensor(text: &str) -> Result<DenseTensor, CliError> {
    DenseTensor::parse(text).map_err(|e| CliError::Input(e.to_string()))
}

/// Warnings for objectives outside `R[x]_{=d}`.
pub fn multihomogeneity_warnings(problem: &PolyProblem) -> Vec<String> {
    match problem.objective.multidegree() {
        Ok(Some(_)) => Vec::new(),
        Ok(None) => vec!["objective is not multihomogeneous; solving it anyway".into()],
        Err(_) => vec!["objective is the zero polynomial".into()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_array() {
        let text = r#"[
            {"shape": [2], "terms": [{"exp": [0, 1], "coef": 1.0}], "role": "objective"},
            {"shape": [2], "terms": [{"exp": [1, 0], "coef": 1.0}], "role": "geq0"}
        ]"#;
        let p = parse_problem(text).unwrap();
        assert_eq!(p.inequalities.len(), 1);
        assert!(multihomogeneity_warnings(&p).is_empty());
    }

    #[test]
    fn two_objectives_are_rejected() {
        let one = r#"{"shape": [2], "terms": [{"exp": [0, 1], "coef": 1.0}]}"#;
        assert!(parse_problem(&format!("[{one}, {one}]")).is_err());
        assert!(parse_problem("[]").is_err());
    }

    #[test]
    fn mixed_degrees_warn() {
        let p = parse_problem(r#"{"shape": [2], "terms": [{"exp": [0, 1], "coef": 1.0}, {"exp": [0, 2], "coef": 1.0}]}"#).unwrap();
        assert_eq!(multihomogeneity_warnings(&p).len(), 1);
    }
}
