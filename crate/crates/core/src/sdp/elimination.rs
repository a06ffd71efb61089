//! Elimination of the linear equalities `B y = b` by sparse reduced row
//! echelon form. The pivot of every row is its highest-index variable, so on
//! moment problems the eliminated moments are those of the largest monomials
//! and the surviving free variables are the normal-form moments.

use std::collections::BTreeMap;

use crate::moments::LinearEquality;

/// How one original variable depends on the free variables `z`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum VarMap {
    Free(usize),
    /// `y = constant + Σ coef · z`.
    Dependent {
        constant: f64,
        terms: Vec<(usize, f64)>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Elimination {
    pub num_free: usize,
    pub vars: Vec<VarMap>,
    /// Equations found linearly dependent on earlier ones.
    pub redundant: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Inconsistent {
    pub residual: f64,
}

type Row = BTreeMap<usize, f64>;

const DROP_TOL: f64 = 1e-12;

fn axpy(target: &mut Row, rhs_target: &mut f64, scale: f64, row: &Row, rhs: f64) {
    for (&c, &v) in row {
        let e = target.entry(c).or_insert(0.0);
        *e += scale * v;
    }
    *rhs_target += scale * rhs;
}

fn prune(row: &mut Row) {
    let scale = row.values().fold(0.0f64, |m, v| m.max(v.abs()));
    row.retain(|_, v| v.abs() > DROP_TOL * scale.max(1.0));
}

impl Elimination {
    pub fn eliminate(num_vars: usize, equalities: &[LinearEquality]) -> Result<Self, Inconsistent> {
        // pivot column -> (row with unit pivot and no other pivot columns, rhs)
        let mut reduced: BTreeMap<usize, (Row, f64)> = BTreeMap::new();
        let mut redundant = 0;

        for eq in equalities {
            let mut row: Row = BTreeMap::new();
            for &(v, c) in &eq.terms {
                *row.entry(v).or_insert(0.0) += c;
            }
            let mut rhs = eq.rhs;
            let scale = row.values().fold(0.0f64, |m, v| m.max(v.abs())).max(rhs.abs()).max(1.0);

            let hits: Vec<(usize, f64)> = row
                .iter()
                .filter(|(c, _)| reduced.contains_key(c))
                .map(|(&c, &v)| (c, v))
                .collect();
            for (c, v) in hits {
                let (prow, prhs) = &reduced[&c];
                axpy(&mut row, &mut rhs, -v, prow, *prhs);
                row.remove(&c);
            }
            prune(&mut row);

            let Some((&pivot, &pv)) = row.iter().next_back() else {
                if rhs.abs() > 1e-9 * scale {
                    return Err(Inconsistent { residual: rhs });
                }
                redundant += 1;
                continue;
            };
            row.values_mut().for_each(|v| *v /= pv);
            rhs /= pv;
            row.insert(pivot, 1.0);

            for (prow, prhs) in reduced.values_mut() {
                if let Some(v) = prow.remove(&pivot) {
                    let mut other = row.clone();
                    other.remove(&pivot);
                    axpy(prow, prhs, -v, &other, rhs);
                    prune(prow);
                }
            }
            reduced.insert(pivot, (row, rhs));
        }

        let mut vars = Vec::with_capacity(num_vars);
        let mut free_index = vec![usize::MAX; num_vars];
        let mut num_free = 0;
        for v in 0..num_vars {
            if !reduced.contains_key(&v) {
                free_index[v] = num_free;
                num_free += 1;
            }
        }
        for v in 0..num_vars {
            match reduced.get(&v) {
                None => vars.push(VarMap::Free(free_index[v])),
                Some((row, rhs)) => {
                    let terms = row
                        .iter()
                        .filter(|(&c, _)| c != v)
                        .map(|(&c, &coef)| (free_index[c], -coef))
                        .collect();
                    vars.push(VarMap::Dependent {
                        constant: *rhs,
                        terms,
                    });
                }
            }
        }
        Ok(Self {
            num_free,
            vars,
            redundant,
        })
    }

    /// Original variables from free values.
    pub fn expand(&self, z: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .map(|m| match m {
                VarMap::Free(i) => z[*i],
                VarMap::Dependent { constant, terms } => {
                    constant + terms.iter().map(|&(i, c)| c * z[i]).sum::<f64>()
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq(terms: &[(usize, f64)], rhs: f64) -> LinearEquality {
        LinearEquality {
            terms: terms.to_vec(),
            rhs,
        }
    }

    #[test]
    fn solves_and_expands() {
        // y0 = 1, y0 − y1 − y2 = 0, y1 + y3 = 0.5
        let eqs = [
            eq(&[(0, 1.0)], 1.0),
            eq(&[(0, 1.0), (1, -1.0), (2, -1.0)], 0.0),
            eq(&[(1, 1.0), (3, 1.0)], 0.5),
        ];
        let e = Elimination::eliminate(4, &eqs).unwrap();
        assert_eq!(e.num_free, 1);
        for t in [-2.0, 0.0, 0.7] {
            let y = e.expand(&[t]);
            for q in &eqs {
                let lhs: f64 = q.terms.iter().map(|&(v, c)| c * y[v]).sum();
                assert!((lhs - q.rhs).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn detects_redundancy_and_inconsistency() {
        let eqs = [eq(&[(0, 1.0), (1, 1.0)], 1.0), eq(&[(0, 2.0), (1, 2.0)], 2.0)];
        let e = Elimination::eliminate(2, &eqs).unwrap();
        assert_eq!((e.num_free, e.redundant), (1, 1));

        let eqs = [eq(&[(0, 1.0)], 1.0), eq(&[(0, 1.0)], 2.0)];
        let err = Elimination::eliminate(1, &eqs).unwrap_err();
        assert!((err.residual.abs() - 1.0).abs() < 1e-14);
    }
}
