//! Catalog of maximally monotone operators with exact resolvents.
//!
//! Every variant is maximally monotone by construction, so its resolvent
//! `J_A = (Id + gamma A)^{-1}` is a total single-valued firmly nonexpansive
//! map. Its reflection `R_A = 2 J_A - Id` is nonexpansive, and
//! `x -> (J_A x, x - J_A x)` sweeps out the whole graph of `A` (Minty).

mod checks;
mod maps;
mod sets;

use alloc::vec::Vec;

pub use checks::{check_firmly_nonexpansive, check_monotone, check_nonexpansive, PropertyCheck, DEFAULT_SLACK};
pub use maps::OperatorMap;
pub use sets::{project, ConvexSet};

use crate::error::{check_dim, invalid, Error, Result};
use crate::hilbert::Vector;
use crate::linalg::{Lu, Matrix};

/// `x -> M x` with `M + M^T` positive semidefinite.
///
/// The factorization of `I + M` is computed once, at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMonotone {
    matrix: Matrix,
    unit_step: Lu,
}

impl LinearMonotone {
    /// `rows` is the matrix in row-major order.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let matrix = Matrix::from_rows(rows).ok_or_else(|| invalid("matrix", "must be square and non-empty"))?;
        if matrix.data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix", "non-finite entry"));
        }
        if !matrix.symmetric_part_is_psd() {
            return Err(invalid("matrix", "M + M^T is not positive semidefinite"));
        }
        let unit_step = Lu::factor(&matrix.shifted_identity(1.0))?;
        Ok(LinearMonotone { matrix, unit_step })
    }

    pub fn identity(dim: usize) -> Self {
        let matrix = Matrix::identity(dim);
        let unit_step = Lu::factor(&matrix.shifted_identity(1.0)).expect("2I is invertible");
        LinearMonotone { matrix, unit_step }
    }

    pub fn dim(&self) -> usize {
        self.matrix.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.rows()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        Vector::from(self.matrix.mul_vec(x.coords()))
    }

    fn solve_shifted(&self, rhs: &Vector, gamma: f64) -> Result<Vector> {
        let sol = if gamma == 1.0 {
            self.unit_step.solve(rhs.coords())
        } else {
            Lu::factor(&self.matrix.shifted_identity(gamma))?.solve(rhs.coords())
        };
        Ok(Vector::from(sol))
    }
}

/// Gradient of `x -> 1/2 <x, Q x> + <b, x>` with `Q` symmetric positive
/// semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGradient {
    q: LinearMonotone,
    b: Vector,
}

impl QuadraticGradient {
    pub fn new(q_rows: &[Vec<f64>], b: Vector) -> Result<Self> {
        let q = LinearMonotone::new(q_rows).map_err(|e| match e {
            Error::InvalidParameter { reason, .. } => Error::InvalidParameter { field: "q", reason },
            other => other,
        })?;
        if !q.matrix.is_symmetric(1e-12 * (1.0 + q.matrix.max_abs())) {
            return Err(invalid("q", "must be symmetric"));
        }
        check_dim(q.dim(), b.dim())?;
        if !b.is_finite() {
            return Err(invalid("b", "non-finite coordinate"));
        }
        Ok(QuadraticGradient { q, b })
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn q_rows(&self) -> Vec<Vec<f64>> {
        self.q.rows()
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        let mut out = self.q.apply(x);
        out.axpy(1.0, &self.b);
        out
    }
}

/// A maximally monotone operator from the catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneOperator {
    /// `A = 0`, defined on every dimension.
    Zero,
    LinearMonotone(LinearMonotone),
    /// Normal cone `N_S` of a closed convex set; `J = P_S`.
    NormalCone(ConvexSet),
    /// `∂(weight * ||.||_1)`, defined on every dimension.
    SubdiffAbsSum { weight: f64 },
    SubdiffQuadratic(QuadraticGradient),
    /// `(A_1, ..., A_m)` acting blockwise on a flattened product point.
    Blockwise { ops: Vec<MonotoneOperator>, block_dim: usize },
}

/// A point `(point, value)` of `gra A`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphPoint {
    pub point: Vector,
    pub value: Vector,
}

impl MonotoneOperator {
    pub fn linear(rows: &[Vec<f64>]) -> Result<Self> {
        LinearMonotone::new(rows).map(MonotoneOperator::LinearMonotone)
    }

    pub fn normal_cone(set: ConvexSet) -> Result<Self> {
        set.validate()?;
        Ok(MonotoneOperator::NormalCone(set))
    }

    pub fn abs_sum(weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(invalid("weight", "must be finite and > 0"));
        }
        Ok(MonotoneOperator::SubdiffAbsSum { weight })
    }

    pub fn quadratic(q_rows: &[Vec<f64>], b: Vector) -> Result<Self> {
        QuadraticGradient::new(q_rows, b).map(MonotoneOperator::SubdiffQuadratic)
    }

    pub fn blockwise(ops: Vec<MonotoneOperator>, block_dim: usize) -> Result<Self> {
        if ops.len() < 2 {
            return Err(Error::TooFewBlocks(ops.len()));
        }
        if block_dim == 0 {
            return Err(invalid("block_dim", "must be at least 1"));
        }
        for op in &ops {
            if let Some(d) = op.dim() {
                check_dim(block_dim, d)?;
            }
        }
        Ok(MonotoneOperator::Blockwise { ops, block_dim })
    }

    /// Ambient dimension, or `None` for operators defined on every dimension.
    pub fn dim(&self) -> Option<usize> {
        match self {
            MonotoneOperator::Zero | MonotoneOperator::SubdiffAbsSum { .. } => None,
            MonotoneOperator::LinearMonotone(m) => Some(m.dim()),
            MonotoneOperator::NormalCone(s) => Some(s.dim()),
            MonotoneOperator::SubdiffQuadratic(q) => Some(q.dim()),
            MonotoneOperator::Blockwise { ops, block_dim } => Some(ops.len() * block_dim),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MonotoneOperator::Zero => "zero",
            MonotoneOperator::LinearMonotone(_) => "linear_monotone",
            MonotoneOperator::NormalCone(_) => "normal_cone",
            MonotoneOperator::SubdiffAbsSum { .. } => "subdiff_abs_sum",
            MonotoneOperator::SubdiffQuadratic(_) => "subdiff_quadratic",
            MonotoneOperator::Blockwise { .. } => "blockwise",
        }
    }

    fn check_input(&self, x: &Vector) -> Result<()> {
        match self.dim() {
            Some(d) => check_dim(d, x.dim()),
            None => Ok(()),
        }
    }

    /// `J_A x` with unit step.
    pub fn resolvent(&self, x: &Vector) -> Result<Vector> {
        self.resolvent_scaled(x, 1.0)
    }

    /// `(Id + gamma A)^{-1} x`: the unique `p` with `p + gamma u = x` for some
    /// `u` in `A p`.
    pub fn resolvent_scaled(&self, x: &Vector, gamma: f64) -> Result<Vector> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(invalid("gamma", "must be finite and > 0"));
        }
        self.check_input(x)?;
        match self {
            MonotoneOperator::Zero => Ok(x.clone()),
            MonotoneOperator::LinearMonotone(m) => m.solve_shifted(x, gamma),
            MonotoneOperator::NormalCone(s) => Ok(s.project_unchecked(x)),
            MonotoneOperator::SubdiffAbsSum { weight } => Ok(soft_threshold(x, gamma * weight)),
            MonotoneOperator::SubdiffQuadratic(q) => {
                let rhs = x.lincomb(1.0, &q.b, -gamma);
                q.q.solve_shifted(&rhs, gamma)
            }
            MonotoneOperator::Blockwise { ops, block_dim } => {
                let mut out = Vec::with_capacity(x.dim());
                for (op, chunk) in ops.iter().zip(x.coords().chunks(*block_dim)) {
                    let block = op.resolvent_scaled(&Vector::from(chunk.to_vec()), gamma)?;
                    out.extend_from_slice(block.coords());
                }
                Ok(Vector::from(out))
            }
        }
    }

    /// `R_A x = 2 J_A x - x`.
    pub fn reflected_resolvent(&self, x: &Vector) -> Result<Vector> {
        Ok(self.resolvent(x)?.lincomb(2.0, x, -1.0))
    }

    /// `(J_A x, x - J_A x)`, a point of `gra A`.
    pub fn minty_sample(&self, x: &Vector) -> Result<GraphPoint> {
        let point = self.resolvent(x)?;
        let value = x - &point;
        Ok(GraphPoint { point, value })
    }

    /// Distance of `(x, u)` from `gra A` measured through the Minty
    /// parametrization: `||J_A(x + u) - x||`, zero iff `u` is in `A x`.
    pub fn graph_gap(&self, x: &Vector, u: &Vector) -> Result<f64> {
        check_dim(x.dim(), u.dim())?;
        Ok(self.resolvent(&(x + u))?.distance(x))
    }

    /// `(x, A x)` for the single-valued variants, `None` otherwise.
    pub fn graph_point(&self, x: &Vector) -> Result<Option<GraphPoint>> {
        self.check_input(x)?;
        let value = match self {
            MonotoneOperator::Zero => Vector::zeros(x.dim()),
            MonotoneOperator::LinearMonotone(m) => m.apply(x),
            MonotoneOperator::SubdiffQuadratic(q) => q.apply(x),
            _ => return Ok(None),
        };
        Ok(Some(GraphPoint {
            point: x.clone(),
            value,
        }))
    }
}

/// Componentwise `sign(x) max(|x| - level, 0)`; ties `|x_k| = level` map to 0.
pub fn soft_threshold(x: &Vector, level: f64) -> Vector {
    Vector::from(
        x.coords()
            .iter()
            .map(|&v| {
                let m = v.abs() - level;
                if m > 0.0 {
                    libm::copysign(m, v)
                } else {
                    0.0
                }
            })
            .collect::<Vec<_>>(),
    )
}

pub fn resolvent(a: &MonotoneOperator, x: &Vector, gamma: f64) -> Result<Vector> {
    a.resolvent_scaled(x, gamma)
}

pub fn reflected_resolvent(a: &MonotoneOperator, x: &Vector) -> Result<Vector> {
    a.reflected_resolvent(x)
}

pub fn minty_sample(a: &MonotoneOperator, x: &Vector) -> Result<GraphPoint> {
    a.minty_sample(x)
}
