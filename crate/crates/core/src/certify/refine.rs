use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::polyring::MultiPoly;
use crate::problem::PolyProblem;

/// Outcome of Newton polishing of one atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedPoint {
    pub point: Vec<f64>,
    /// KKT residual norm at the starting point and at `point`.
    pub residual_before: f64,
    pub residual_after: f64,
    pub iterations: usize,
    /// Distance moved from the starting point.
    pub displacement: f64,
}

struct Kkt<'a> {
    f: &'a MultiPoly,
    cons: Vec<&'a MultiPoly>,
}

impl Kkt<'_> {
    fn residual(&self, p: &[f64], nu: &DVector<f64>) -> Result<DVector<f64>> {
        let n = p.len();
        let mut r = DVector::zeros(n + self.cons.len());
        let mut g = self.f.gradient(p)?;
        for (k, c) in self.cons.iter().enumerate() {
            g -= c.gradient(p)? * nu[k];
            r[n + k] = c.eval(p)?;
        }
        r.rows_mut(0, n).copy_from(&g);
        Ok(r)
    }

    fn jacobian(&self, p: &[f64], nu: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = p.len();
        let m = self.cons.len();
        let mut j = DMatrix::zeros(n + m, n + m);
        let mut h = self.f.hessian(p)?;
        for (k, c) in self.cons.iter().enumerate() {
            h -= c.hessian(p)? * nu[k];
            let grad = c.gradient(p)?;
            for i in 0..n {
                j[(i, n + k)] = -grad[i];
                j[(n + k, i)] = grad[i];
            }
        }
        j.view_mut((0, 0), (n, n)).copy_from(&h);
        Ok(j)
    }

    /// Least-squares multipliers at `p`.
    fn multipliers(&self, p: &[f64]) -> Result<DVector<f64>> {
        let m = self.cons.len();
        if m == 0 {
            return Ok(DVector::zeros(0));
        }
        let mut g = DMatrix::zeros(p.len(), m);
        for (k, c) in self.cons.iter().enumerate() {
            g.set_column(k, &c.gradient(p)?);
        }
        let grad = self.f.gradient(p)?;
        Ok(g
            .svd(true, true)
            .solve(&grad, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(m)))
    }
}

/// Newton's method on the KKT system of `problem` with the equalities and the
/// inequalities that are nearly active at `p0` (within `active_radius`)
/// treated as equalities. The polished point is kept only if it lowers the
/// residual and stays within `max_move` of `p0`.
pub fn refine_critical_point(
    problem: &PolyProblem,
    p0: &[f64],
    active_radius: f64,
    max_move: f64,
) -> Result<RefinedPoint> {
    let mut cons: Vec<&MultiPoly> = problem.equalities.iter().collect();
    for g in &problem.inequalities {
        if g.eval(p0)?.abs() <= active_radius {
            cons.push(g);
        }
    }
    let kkt = Kkt {
        f: &problem.objective,
        cons,
    };
    let n = p0.len();
    let mut p = p0.to_vec();
    let mut nu = kkt.multipliers(&p)?;
    let mut res = kkt.residual(&p, &nu)?;
    let before = res.norm();
    let mut iterations = 0;
    for _ in 0..30 {
        let norm = res.norm();
        if norm <= 1e-15 {
            break;
        }
        let jac = kkt.jacobian(&p, &nu)?;
        let Some(step) = jac.lu().solve(&(-&res)) else {
            break;
        };
        let mut accepted = false;
        let mut alpha = 1.0;
        for _ in 0..20 {
            let trial_p: Vec<f64> = (0..n).map(|i| p[i] + alpha * step[i]).collect();
            let trial_nu = &nu + step.rows(n, kkt.cons.len()) * alpha;
            let trial = kkt.residual(&trial_p, &trial_nu)?;
            if trial.norm() < norm {
                p = trial_p;
                nu = trial_nu;
                res = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        iterations += 1;
    }
    let after = res.norm();
    let displacement = p.iter().zip(p0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    if after < before && displacement <= max_move {
        Ok(RefinedPoint {
            point: p,
            residual_before: before,
            residual_after: after,
            iterations,
            displacement,
        })
    } else {
        Ok(RefinedPoint {
            point: p0.to_vec(),
            residual_before: before,
            residual_after: before,
            iterations: 0,
            displacement: 0.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{Exponent, ProductSphereShape};

    #[test]
    fn polishes_perturbed_minimizer() {
        let s = ProductSphereShape::new(vec![2, 2]).unwrap();
        let f = MultiPoly::from_terms(&s, [(Exponent::new(vec![1, 0, 1, 0]), 1.0)]).unwrap();
        let problem = PolyProblem::on_product_of_spheres(f);
        let p0 = [1.0 - 1e-6, 2e-5, -1.0, -1e-5];
        let r = refine_critical_point(&problem, &p0, 1e-3, 1e-2).unwrap();
        assert!(r.residual_after < 1e-14);
        let target = [1.0, 0.0, -1.0, 0.0];
        for (a, b) in r.point.iter().zip(target) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
