//! Closed convex sets with closed-form projectors.

use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Error, Result};
use crate::hilbert::{product_project, AffineSubspace, ProductPoint, ProductProjection, Vector};

/// Tolerance on `|normal| = 1` for half-spaces.
const UNIT_TOL: f64 = 1e-9;

/// A nonempty closed convex set. Build through the checked constructors; the
/// variants are public so callers can match on them.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Ball { center: Vector, radius: f64 },
    /// Componentwise `lower <= x <= upper`; infinite bounds are allowed.
    Box { lower: Vector, upper: Vector },
    Affine(AffineSubspace),
    /// `{x : <normal, x> <= offset}` with a unit normal.
    Halfspace { normal: Vector, offset: f64 },
    /// Diagonal `{(y, ..., y)}` of the product space `(R^block_dim)^blocks`,
    /// acting on flattened product points.
    Diagonal { blocks: usize, block_dim: usize },
}

impl ConvexSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        let s = ConvexSet::Ball { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        let s = ConvexSet::Box { lower, upper };
        s.validate()?;
        Ok(s)
    }

    pub fn affine(c: AffineSubspace) -> Self {
        ConvexSet::Affine(c)
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        let s = ConvexSet::Halfspace { normal, offset };
        s.validate()?;
        Ok(s)
    }

    pub fn diagonal(blocks: usize, block_dim: usize) -> Result<Self> {
        let s = ConvexSet::Diagonal { blocks, block_dim };
        s.validate()?;
        Ok(s)
    }

    /// Re-checks the invariants of a set built by hand.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexSet::Ball { center, radius } => {
                if !center.is_finite() {
                    return Err(invalid("center", "non-finite coordinate"));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(invalid("radius", "must be finite and > 0"));
                }
            }
            ConvexSet::Box { lower, upper } => {
                check_dim(lower.dim(), upper.dim())?;
                for (l, u) in lower.coords().iter().zip(upper.coords()) {
                    if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                        return Err(invalid("lower", "need lower <= upper componentwise"));
                    }
                }
            }
            ConvexSet::Affine(c) => {
                if !c.anchor().is_finite() {
                    return Err(invalid("anchor", "non-finite coordinate"));
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                if !normal.is_finite() || (normal.norm() - 1.0).abs() > UNIT_TOL {
                    return Err(invalid("normal", "must be a unit vector"));
                }
                if !offset.is_finite() {
                    return Err(invalid("offset", "must be finite"));
                }
            }
            ConvexSet::Diagonal { blocks, block_dim } => {
                if *blocks < 2 {
                    return Err(Error::TooFewBlocks(*blocks));
                }
                if *block_dim == 0 {
                    return Err(invalid("block_dim", "must be at least 1"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Ball { center, .. } => center.dim(),
            ConvexSet::Box { lower, .. } => lower.dim(),
            ConvexSet::Affine(c) => c.ambient_dim(),
            ConvexSet::Halfspace { normal, .. } => normal.dim(),
            ConvexSet::Diagonal { blocks, block_dim } => blocks * block_dim,
        }
    }

    pub fn project(&self, z: &Vector) -> Result<Vector> {
        check_dim(self.dim(), z.dim())?;
        Ok(self.project_unchecked(z))
    }

    pub(crate) fn project_unchecked(&self, z: &Vector) -> Vector {
        match self {
            ConvexSet::Ball { center, radius } => {
                let offset = z - center;
                let sq = offset.norm_squared();
                if sq <= radius * radius {
                    return z.clone();
                }
                // sqrt(1/s) rounds (1,1) to the correctly rounded 1/sqrt 2
                let scale = if sq.is_finite() {
                    radius * libm::sqrt(1.0 / sq)
                } else {
                    radius / offset.norm()
                };
                let mut p = center.clone();
                p.axpy(scale, &offset);
                p
            }
            ConvexSet::Box { lower, upper } => {
                let coords: Vec<f64> = z
                    .coords()
                    .iter()
                    .zip(lower.coords().iter().zip(upper.coords()))
                    .map(|(v, (l, u))| v.max(*l).min(*u))
                    .collect();
                Vector::from(coords)
            }
            ConvexSet::Affine(c) => c.project_unchecked(z),
            ConvexSet::Halfspace { normal, offset } => {
                let excess = z.dot(normal) - offset;
                if excess <= 0.0 {
                    z.clone()
                } else {
                    let mut p = z.clone();
                    p.axpy(-excess, normal);
                    p
                }
            }
            ConvexSet::Diagonal { blocks, .. } => {
                let p = ProductPoint::from_flat(z, *blocks).expect("validated dimensions");
                product_project(ProductProjection::Diagonal, &p).flatten()
            }
        }
    }

    pub fn distance(&self, z: &Vector) -> Result<f64> {
        Ok(z.distance(&self.project(z)?))
    }

    pub fn contains(&self, z: &Vector, tol: f64) -> Result<bool> {
        Ok(self.distance(z)? <= tol)
    }
}

/// `P_S z` for a convex set `S`.
pub fn project(set: &ConvexSet, z: &Vector) -> Result<Vector> {
    set.project(z)
}
