//! Finite model of a real Hilbert space.
//!
//! A [`Vector`] of dimension `d` stands for the element of l2 whose first `d`
//! coordinates are stored and whose remaining coordinates are zero. Sequences
//! with moving finite support (such as `e_0 + e_n`) live exactly in the model
//! once `d` exceeds the largest index they touch.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{check_dim, invalid, Error, Result};

/// Tolerance used when validating orthonormal bases.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// Gram-Schmidt drop tolerance for user supplied spanning sets.
pub const DROP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("coords", "dimension must be at least 1"));
        }
        Ok(Vector(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.0.get(k).copied()
    }

    /// Inner product. Panics on mismatched dimensions; use [`inner`] for the
    /// checked version.
    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_squared())
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        libm::sqrt(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|a| a * factor).collect())
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &Vector) {
        assert_eq!(self.dim(), x.dim(), "dimension mismatch");
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            *s += alpha * v;
        }
    }

    /// `alpha * self + beta * other`
    pub fn lincomb(&self, alpha: f64, other: &Vector, beta: f64) -> Vector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Coordinates at the given indices, in order.
    pub fn restrict(&self, indices: &[usize]) -> Result<Vec<f64>> {
        indices
            .iter()
            .map(|&k| {
                self.get(k).ok_or(Error::IndexOutOfRange {
                    index: k,
                    dim: self.dim(),
                })
            })
            .collect()
    }
}

impl From<Vec<f64>> for Vector {
    /// Panics on an empty vector.
    fn from(coords: Vec<f64>) -> Self {
        Vector::new(coords).expect("vector must have dimension >= 1")
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(coords: [f64; N]) -> Self {
        Vector::from(coords.to_vec())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.lincomb(1.0, rhs, 1.0)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.lincomb(1.0, rhs, -1.0)
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scaled(self)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scaled(-1.0)
    }
}

/// Checked inner product `sum_k x_k y_k`.
pub fn inner(x: &Vector, y: &Vector) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    Ok(x.dot(y))
}

pub fn norm(x: &Vector) -> f64 {
    x.norm()
}

/// `e_k` in dimension `dim`.
pub fn standard_basis_vector(k: usize, dim: usize) -> Result<Vector> {
    if dim == 0 {
        return Err(invalid("dim", "dimension must be at least 1"));
    }
    if k >= dim {
        return Err(Error::IndexOutOfRange { index: k, dim });
    }
    let mut v = Vector::zeros(dim);
    v.0[k] = 1.0;
    Ok(v)
}

/// Closed affine subspace `anchor + span(basis)` with an orthonormal basis
/// of the direction space `V = C - C`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AffineSubspace {
    anchor: Vector,
    basis: Vec<Vector>,
}

impl AffineSubspace {
    /// Builds `anchor + span(spanning)`, orthonormalizing the spanning set by
    /// modified Gram-Schmidt. Vectors whose residual falls below
    /// [`DROP_TOL`] relative to their norm are dropped.
    pub fn new(anchor: Vector, spanning: Vec<Vector>) -> Result<Self> {
        let d = anchor.dim();
        let mut basis: Vec<Vector> = Vec::with_capacity(spanning.len());
        for (i, v) in spanning.into_iter().enumerate() {
            check_dim(d, v.dim())?;
            if !v.is_finite() {
                return Err(invalid("basis", "non-finite coordinate"));
            }
            let scale = v.norm();
            if scale == 0.0 {
                log::debug!("spanning vector {i} is zero; dropped");
                continue;
            }
            let mut r = v.scaled(1.0 / scale);
            // two passes keep the basis orthonormal to working precision
            for _ in 0..2 {
                for b in &basis {
                    let c = r.dot(b);
                    r.axpy(-c, b);
                }
            }
            let rn = r.norm();
            if rn < DROP_TOL {
                log::debug!("spanning vector {i} is dependent (residual {rn:e}); dropped");
                continue;
            }
            basis.push(r.scaled(1.0 / rn));
        }
        Ok(AffineSubspace { anchor, basis })
    }

    /// Accepts a basis that is already orthonormal within
    /// [`ORTHONORMAL_TOL`], rejecting it otherwise.
    pub fn from_orthonormal(anchor: Vector, basis: Vec<Vector>) -> Result<Self> {
        let d = anchor.dim();
        for (i, b) in basis.iter().enumerate() {
            check_dim(d, b.dim())?;
            if (b.norm() - 1.0).abs() > ORTHONORMAL_TOL {
                return Err(invalid("basis", "basis vector is not of unit norm"));
            }
            for c in &basis[..i] {
                if b.dot(c).abs() > ORTHONORMAL_TOL {
                    return Err(invalid("basis", "basis vectors are not orthogonal"));
                }
            }
        }
        Ok(AffineSubspace { anchor, basis })
    }

    pub fn singleton(point: Vector) -> Self {
        AffineSubspace {
            anchor: point,
            basis: Vec::new(),
        }
    }

    /// The whole space `R^dim`, spanned by the standard basis.
    pub fn full_space(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|k| standard_basis_vector(k, dim).expect("k < dim"))
            .collect();
        AffineSubspace {
            anchor: Vector::zeros(dim),
            basis,
        }
    }

    /// Linear span of the given vectors (anchor at the origin).
    pub fn span(dim: usize, spanning: Vec<Vector>) -> Result<Self> {
        Self::new(Vector::zeros(dim), spanning)
    }

    /// `point + (C - C)^perp`: the affine subspace through `point` whose
    /// direction is the orthogonal complement of this one's.
    pub fn orthogonal_through(&self, point: Vector) -> Result<Self> {
        check_dim(self.ambient_dim(), point.dim())?;
        Ok(AffineSubspace {
            anchor: point,
            basis: complement_basis(self),
        })
    }

    pub fn anchor(&self) -> &Vector {
        &self.anchor
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.anchor.dim()
    }

    /// Dimension of the direction space `V = C - C`.
    pub fn direction_dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection onto the direction space `V`.
    pub fn project_direction(&self, z: &Vector) -> Vector {
        let mut out = Vector::zeros(z.dim());
        for b in &self.basis {
            out.axpy(z.dot(b), b);
        }
        out
    }

    /// Nearest point of the subspace; panics on mismatched dimension.
    pub fn project_unchecked(&self, z: &Vector) -> Vector {
        if self.basis.len() == self.ambient_dim() {
            return z.clone();
        }
        let shifted = z - &self.anchor;
        let mut out = self.anchor.clone();
        for b in &self.basis {
            out.axpy(shifted.dot(b), b);
        }
        out
    }

    pub fn distance(&self, z: &Vector) -> f64 {
        z.distance(&self.project_unchecked(z))
    }
}

/// `P_C z = anchor + sum_b <z - anchor, b> b`.
pub fn affine_project(c: &AffineSubspace, z: &Vector) -> Result<Vector> {
    check_dim(c.ambient_dim(), z.dim())?;
    Ok(c.project_unchecked(z))
}

/// Orthonormal basis of `(C - C)^perp`.
///
/// Standard basis vectors are swept in order and Gram-Schmidt reduced against
/// the current basis; a candidate is kept when its residual exceeds the
/// threshold. A greedy second sweep (largest residual first) completes the
/// basis if the first sweep falls short.
pub fn complement_basis(c: &AffineSubspace) -> Vec<Vector> {
    let d = c.ambient_dim();
    let need = d.saturating_sub(c.direction_dim());
    let mut all: Vec<Vector> = c.basis.clone();
    let mut out: Vec<Vector> = Vec::with_capacity(need);

    let residual = |k: usize, all: &[Vector]| -> Vector {
        let mut r = standard_basis_vector(k, d).expect("k < d");
        let mut touched = false;
        for b in all {
            // <e_k, b> = b_k
            let coef = b[k];
            if coef != 0.0 {
                r.axpy(-coef, b);
                touched = true;
            }
        }
        if touched {
            for b in all {
                let coef = r.dot(b);
                r.axpy(-coef, b);
            }
        }
        r
    };

    let mut taken = vec![false; d];
    for k in 0..d {
        if out.len() == need {
            break;
        }
        let r = residual(k, &all);
        let rn = r.norm();
        if rn > 0.5 {
            let q = r.scaled(1.0 / rn);
            all.push(q.clone());
            out.push(q);
            taken[k] = true;
        }
    }
    while out.len() < need {
        let best = (0..d)
            .filter(|&k| !taken[k])
            .map(|k| {
                let r = residual(k, &all);
                let rn = r.norm();
                (k, r, rn)
            })
            .max_by(|a, b| a.2.total_cmp(&b.2));
        let Some((k, r, rn)) = best else { break };
        taken[k] = true;
        if rn < DROP_TOL {
            break;
        }
        let q = r.scaled(1.0 / rn);
        all.push(q.clone());
        out.push(q);
    }
    out
}

/// Outcome of [`check_orthogonal_pair`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrthogonalPairCheck {
    pub passed: bool,
    pub dim_c: usize,
    pub dim_d: usize,
    pub ambient: usize,
    /// Largest `|<b, c>|` over direction basis vectors `b` of C and `c` of D.
    pub worst_cross: f64,
}

/// Tests `D - D = (C - C)^perp`: the direction dimensions add up to the
/// ambient dimension and every cross inner product is below `1e-12`.
pub fn check_orthogonal_pair(c: &AffineSubspace, d: &AffineSubspace) -> Result<OrthogonalPairCheck> {
    check_dim(c.ambient_dim(), d.ambient_dim())?;
    let mut worst = 0.0f64;
    for b in &c.basis {
        for e in &d.basis {
            worst = worst.max(b.dot(e).abs());
        }
    }
    let passed = c.direction_dim() + d.direction_dim() == c.ambient_dim() && worst < ORTHONORMAL_TOL;
    Ok(OrthogonalPairCheck {
        passed,
        dim_c: c.direction_dim(),
        dim_d: d.direction_dim(),
        ambient: c.ambient_dim(),
        worst_cross: worst,
    })
}

/// Element of the product space `X^m` with `m >= 2` blocks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProductPoint {
    blocks: Vec<Vector>,
}

impl ProductPoint {
    pub fn new(blocks: Vec<Vector>) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::TooFewBlocks(blocks.len()));
        }
        let d = blocks[0].dim();
        for b in &blocks[1..] {
            check_dim(d, b.dim())?;
        }
        Ok(ProductPoint { blocks })
    }

    /// The diagonal point `(x, x, ..., x)`.
    pub fn diagonal(x: &Vector, m: usize) -> Result<Self> {
        Self::new(vec![x.clone(); m])
    }

    /// Splits a flat vector of dimension `m * d` into `m` blocks.
    pub fn from_flat(flat: &Vector, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::TooFewBlocks(m));
        }
        if !flat.dim().is_multiple_of(m) {
            return Err(invalid("blocks", "flat dimension is not a multiple of m"));
        }
        let d = flat.dim() / m;
        let blocks = flat
            .coords()
            .chunks(d)
            .map(|c| Vector::new(c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(blocks)
    }

    pub fn flatten(&self) -> Vector {
        Vector(self.blocks.iter().flat_map(|b| b.coords().iter().copied()).collect())
    }

    pub fn blocks(&self) -> &[Vector] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dim(&self) -> usize {
        self.blocks[0].dim()
    }

    /// Blockwise mean `(1/m) sum_i x_i`.
    pub fn mean(&self) -> Vector {
        let mut acc = Vector::zeros(self.block_dim());
        let w = 1.0 / self.blocks.len() as f64;
        for b in &self.blocks {
            acc.axpy(w, b);
        }
        acc
    }

    pub fn inner(&self, other: &ProductPoint) -> Result<f64> {
        if self.blocks.len() != other.blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks.len(),
                found: other.blocks.len(),
            });
        }
        check_dim(self.block_dim(), other.block_dim())?;
        Ok(self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.dot(b)).sum())
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.blocks.iter().map(Vector::norm_squared).sum())
    }
}

/// Which of the two complementary product-space projectors to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ProductProjection {
    /// Onto `{(y, ..., y)}`: every block becomes the blockwise mean.
    Diagonal,
    /// Onto `{(y_i) : sum_i y_i = 0}`: each block loses the mean.
    Antidiagonal,
}

pub fn product_project(kind: ProductProjection, p: &ProductPoint) -> ProductPoint {
    let mean = p.mean();
    let blocks = match kind {
        ProductProjection::Diagonal => vec![mean; p.num_blocks()],
        ProductProjection::Antidiagonal => p.blocks.iter().map(|b| b - &mean).collect(),
    };
    ProductPoint { blocks }
}
