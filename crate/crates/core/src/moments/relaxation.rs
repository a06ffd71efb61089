use std::collections::BTreeSet;

use super::basis::MonomialBasis;
use super::conic::{BlockEntry, ConicProblem, LinearEquality, PsdBlock};
use crate::error::{Error, Result};
use crate::polyring::{Exponent, MultiPoly};
use crate::problem::PolyProblem;

/// A problem together with a relaxation order `k`.
#[derive(Debug, Clone)]
pub struct RelaxationSpec {
    pub problem: PolyProblem,
    pub order: u32,
}

impl RelaxationSpec {
    pub fn new(problem: PolyProblem, order: u32) -> Result<Self> {
        let minimum = problem.d_bar();
        if order < minimum {
            return Err(Error::OrderBelowMinimum { order, minimum });
        }
        Ok(Self { problem, order })
    }

    pub fn d_f(&self) -> u32 {
        self.problem.d_f()
    }

    pub fn d_k(&self) -> u32 {
        self.problem.d_k()
    }

    pub fn d_bar(&self) -> u32 {
        self.problem.d_bar()
    }
}

fn localizing_block(label: String, g: &MultiPoly, t: u32, vars: &MonomialBasis) -> PsdBlock {
    let rows = vars.prefix_len(t);
    let mut entries = Vec::with_capacity(rows * rows * g.num_terms());
    for i in 0..rows {
        for j in 0..rows {
            let ab = vars.get(i) + vars.get(j);
            for (d, c) in g.terms() {
                let var = vars.index_of(&(&ab + d)).expect("degree within 2k");
                entries.push(BlockEntry {
                    row: i,
                    col: j,
                    var,
                    coef: c,
                });
            }
        }
    }
    PsdBlock {
        label,
        dim: rows,
        entries,
    }
}

/// Scalar equations `L_y(x^γ h) = 0` for every `|γ| ≤ 2t`: one representative
/// per distinct `γ = α + β` of the matrix equation `M_t(h y) = 0`.
fn equality_family(h: &MultiPoly, t: u32, vars: &MonomialBasis) -> Vec<LinearEquality> {
    let gammas: BTreeSet<Exponent> = {
        let s = vars.prefix_len(t);
        (0..s)
            .flat_map(|i| (i..s).map(move |j| (i, j)))
            .map(|(i, j)| vars.get(i) + vars.get(j))
            .collect()
    };
    gammas
        .into_iter()
        .map(|gamma| {
            let mut terms: Vec<(usize, f64)> = h
                .terms()
                .map(|(d, c)| (vars.index_of(&(&gamma + d)).expect("degree within 2k"), c))
                .collect();
            terms.sort_by_key(|&(v, _)| v);
            LinearEquality { terms, rhs: 0.0 }
        })
        .collect()
}

/// The order-`k` moment relaxation as a conic problem:
/// minimize `Σ f_α y_α` subject to `M_k(y) ⪰ 0`, `M_{k−d_g}(g y) ⪰ 0`,
/// `M_{k−d_h}(h y) = 0` and `y_0 = 1`.
pub fn assemble(spec: &RelaxationSpec) -> Result<ConicProblem> {
    let k = spec.order;
    let minimum = spec.d_bar();
    if k < minimum {
        return Err(Error::OrderBelowMinimum { order: k, minimum });
    }
    let p = &spec.problem;
    let n = p.nvars();
    let vars = MonomialBasis::new(n, 2 * k);

    let mut objective = vec![0.0; vars.len()];
    for (e, c) in p.objective.terms() {
        objective[vars.index_of(e).expect("deg f ≤ 2k")] = c;
    }

    let one = MultiPoly::constant(p.shape(), 1.0);
    let mut blocks = vec![localizing_block("moment".into(), &one, k, &vars)];
    for (j, g) in p.inequalities.iter().enumerate() {
        blocks.push(localizing_block(
            format!("localizing g{}", j + 1),
            g,
            k - g.half_degree(),
            &vars,
        ));
    }

    let mut equalities = Vec::new();
    for h in &p.equalities {
        equalities.extend(equality_family(h, k - h.half_degree(), &vars));
    }
    equalities.push(LinearEquality {
        terms: vec![(0, 1.0)],
        rhs: 1.0,
    });

    Ok(ConicProblem {
        nvars: n,
        order: 2 * k,
        num_vars: vars.len(),
        objective,
        blocks,
        equalities,
    })
}
