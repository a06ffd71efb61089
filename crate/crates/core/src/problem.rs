use crate::polyring::{MultiPoly, ProductSphereShape};

/// A polynomial optimization problem
/// `min f(x) s.t. h_i(x) = 0, g_j(x) ≥ 0`.
///
/// Over a product of spheres the equalities are `s_i = 1 − ‖x_i‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyProblem {
    pub objective: MultiPoly,
    pub equalities: Vec<MultiPoly>,
    pub inequalities: Vec<MultiPoly>,
}

impl PolyProblem {
    /// Minimize `f` over the product of spheres of its shape.
    pub fn on_product_of_spheres(objective: MultiPoly) -> Self {
        let shape = objective.shape().clone();
        let equalities = (0..shape.num_blocks())
            .map(|i| MultiPoly::sphere_constraint(&shape, i))
            .collect();
        Self {
            objective,
            equalities,
            inequalities: Vec::new(),
        }
    }

    pub fn with_inequalities(mut self, inequalities: Vec<MultiPoly>) -> Self {
        for g in &inequalities {
            assert_eq!(g.shape(), self.shape(), "inequality on a different shape");
        }
        self.inequalities = inequalities;
        self
    }

    pub fn shape(&self) -> &ProductSphereShape {
        self.objective.shape()
    }

    pub fn nvars(&self) -> usize {
        self.shape().total_dim()
    }

    /// `d_f = ⌈deg f / 2⌉`.
    pub fn d_f(&self) -> u32 {
        self.objective.half_degree()
    }

    /// `d_K = max{1, d_g_j, d_h_i}`.
    pub fn d_k(&self) -> u32 {
        self.equalities
            .iter()
            .chain(&self.inequalities)
            .map(MultiPoly::half_degree)
            .fold(1, u32::max)
    }

    /// `d̄ = max{d_f, d_K}`, the smallest admissible relaxation order.
    pub fn d_bar(&self) -> u32 {
        self.d_f().max(self.d_k())
    }

    /// Same feasible set, objective replaced.
    pub fn with_objective(&self, objective: MultiPoly) -> Self {
        assert_eq!(objective.shape(), self.shape());
        Self {
            objective,
            equalities: self.equalities.clone(),
            inequalities: self.inequalities.clone(),
        }
    }
}
