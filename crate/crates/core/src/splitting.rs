//! Douglas-Rachford splitting for `0 in A x + B x`.
//!
//! The governing operator is
//!
//! ```text
//! T = 1/2 Id + 1/2 R_B R_A = J_B (2 J_A - Id) + (Id - J_A)
//! ```
//!
//! and `J_A` maps its fixed points onto `zer(A + B)`. Iterating `T` from
//! `z_0` gives the governing sequence `z_n`; the shadow sequence `J_A z_n`
//! is what converges to a zero.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Error, Result};
use crate::hilbert::{product_project, ProductPoint, ProductProjection, Vector};
use crate::operators::{ConvexSet, MonotoneOperator};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Slack allowed on the monotone decrease of the residuals.
pub const MONOTONE_RESIDUAL_SLACK: f64 = 1e-12;

/// `T z = z - J_A z + J_B(2 J_A z - z)`.
pub fn dr_map(a: &MonotoneOperator, b: &MonotoneOperator, z: &Vector) -> Result<Vector> {
    let x = a.resolvent(z)?;
    let y = x.lincomb(2.0, z, -1.0);
    let w = b.resolvent(&y)?;
    let mut tz = z - &x;
    tz.axpy(1.0, &w);
    Ok(tz)
}

/// The averaged-reflection form `T z = 1/2 z + 1/2 R_B(R_A z)`.
pub fn dr_map_reflected(a: &MonotoneOperator, b: &MonotoneOperator, z: &Vector) -> Result<Vector> {
    let ra = a.reflected_resolvent(z)?;
    let rbra = b.reflected_resolvent(&ra)?;
    Ok(z.lincomb(0.5, &rbra, 0.5))
}

/// How much of the run to keep in the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceOptions {
    /// Iterations recorded in full.
    pub full_cap: usize,
    /// Past the cap, every `stride`-th iterate is kept.
    pub stride: usize,
    /// Length of the rolling window of most recent iterates kept past the cap.
    pub tail: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            full_cap: 10_000,
            stride: 100,
            tail: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DrProblem {
    pub a: MonotoneOperator,
    pub b: MonotoneOperator,
    pub z0: Vector,
    pub tol: f64,
    pub max_iter: usize,
    /// Coordinates used for weak-limit surrogates and CSV export.
    pub probes: Vec<usize>,
    pub trace: TraceOptions,
}

impl DrProblem {
    pub fn new(a: MonotoneOperator, b: MonotoneOperator, z0: Vector) -> Result<Self> {
        for op in [&a, &b] {
            if let Some(d) = op.dim() {
                check_dim(d, z0.dim())?;
            }
        }
        if !z0.is_finite() {
            return Err(invalid("z0", "non-finite coordinate"));
        }
        let probes = (0..z0.dim()).collect();
        Ok(DrProblem {
            a,
            b,
            z0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            probes,
            trace: TraceOptions::default(),
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_probes(mut self, probes: Vec<usize>) -> Self {
        self.probes = probes;
        self
    }

    pub fn with_trace(mut self, trace: TraceOptions) -> Self {
        self.trace = trace;
        self
    }

    pub fn dim(&self) -> usize {
        self.z0.dim()
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(invalid("tol", "must be finite and >= 0"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be positive"));
        }
        if let Some(&k) = self.probes.iter().find(|&&k| k >= self.dim()) {
            return Err(Error::IndexOutOfRange { index: k, dim: self.dim() });
        }
        if self.trace.stride == 0 {
            return Err(invalid("stride", "must be positive"));
        }
        Ok(())
    }

    /// Evaluates one step at `z`, returning the record and `T z`.
    fn step(&self, n: usize, z: Vector) -> Result<(TraceRecord, Vector)> {
        let shadow = self.a.resolvent(&z)?;
        let reflected = shadow.lincomb(2.0, &z, -1.0);
        let w = self.b.resolvent(&reflected)?;
        let mut tz = &z - &shadow;
        tz.axpy(1.0, &w);
        let residual = shadow.distance(&w);
        let inner_diag = shadow.dot(&(&z - &shadow));
        Ok((
            TraceRecord {
                iter: n,
                z,
                shadow,
                reflected,
                residual,
                inner_diag,
            },
            tz,
        ))
    }
}

/// One iterate of the Douglas-Rachford run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRecord {
    pub iter: usize,
    /// Governing point `z_n`.
    pub z: Vector,
    /// Shadow `x_n = J_A z_n`.
    pub shadow: Vector,
    /// `y_n = R_A z_n`.
    pub reflected: Vector,
    /// `r_n = ||z_n - T z_n||`.
    pub residual: f64,
    /// `<x_n, z_n - x_n>`.
    pub inner_diag: f64,
}

/// Recorded iterates in increasing `iter` order. Past the trace cap the
/// record is sparse (strided samples plus a contiguous tail).
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.residual).collect()
    }

    pub fn governing(&self) -> Vec<Vector> {
        self.records.iter().map(|r| r.z.clone()).collect()
    }

    pub fn shadows(&self) -> Vec<Vector> {
        self.records.iter().map(|r| r.shadow.clone()).collect()
    }

    pub fn reflections(&self) -> Vec<Vector> {
        self.records.iter().map(|r| r.reflected.clone()).collect()
    }

    /// True when the records are the consecutive iterates `0..len`.
    pub fn is_contiguous(&self) -> bool {
        self.records.iter().enumerate().all(|(i, r)| r.iter == i)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolutionReport {
    pub converged: bool,
    /// Applications of `T` performed before stopping.
    pub iterations: usize,
    pub z_limit: Vector,
    /// `J_A z_limit`
    pub shadow_limit: Vector,
    /// `||J_A z - J_B(R_A z)||` at `z_limit`; equals the last residual.
    pub zer_residual: f64,
    /// `u = z - J_A z`, an element of `A(shadow_limit)`.
    pub witness_a: Vector,
    /// `v = R_A z - J_B(R_A z)`, an element of `B(J_B R_A z)`.
    pub witness_b: Vector,
}

/// Runs `z_{n+1} = T z_n` until `r_n <= tol` or `max_iter` steps.
/// Non-convergence is reported through `converged = false`.
pub fn dr_iterate(p: &DrProblem) -> Result<(IterationTrace, SolutionReport)> {
    p.validate()?;
    let opts = p.trace;
    let mut head: Vec<TraceRecord> = Vec::new();
    let mut sampled: Vec<TraceRecord> = Vec::new();
    let mut tail: VecDeque<TraceRecord> = VecDeque::with_capacity(opts.tail + 1);

    let mut z = p.z0.clone();
    let mut n = 0usize;
    let (last, converged) = loop {
        let (rec, tz) = p.step(n, z)?;
        if !rec.residual.is_finite() {
            return Err(invalid("z", "iteration produced a non-finite value"));
        }
        let done = rec.residual <= p.tol;
        let exhausted = n >= p.max_iter;
        if done || exhausted {
            break (rec, done);
        }
        if n < opts.full_cap {
            head.push(rec);
        } else {
            if n.is_multiple_of(opts.stride) {
                sampled.push(rec.clone());
            }
            tail.push_back(rec);
            if tail.len() > opts.tail {
                tail.pop_front();
            }
        }
        z = tz;
        n += 1;
    };

    let report = SolutionReport {
        converged,
        iterations: last.iter,
        z_limit: last.z.clone(),
        shadow_limit: last.shadow.clone(),
        zer_residual: last.residual,
        witness_a: &last.z - &last.shadow,
        witness_b: &last.reflected - &p.b.resolvent(&last.reflected)?,
    };

    let mut records = head;
    let tail_start = tail.front().map_or(usize::MAX, |r| r.iter);
    records.extend(sampled.into_iter().filter(|r| r.iter < tail_start));
    records.extend(tail);
    records.push(last);
    Ok((IterationTrace { records }, report))
}

/// Outcome of [`asymptotic_regularity_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegularityCheck {
    pub passed: bool,
    /// Largest `r_{n+1} - r_n` over recorded neighbours.
    pub max_increase: f64,
    pub final_residual: f64,
}

/// Passes iff the residuals never increase by more than
/// [`MONOTONE_RESIDUAL_SLACK`] and the final residual is at most `tol`.
pub fn asymptotic_regularity_check(t: &IterationTrace, tol: f64) -> Result<RegularityCheck> {
    if t.records.len() < 2 {
        return Err(invalid("trace", "needs at least two records"));
    }
    let r = t.residuals();
    let max_increase = r.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let final_residual = *r.last().expect("len >= 2");
    Ok(RegularityCheck {
        passed: max_increase <= MONOTONE_RESIDUAL_SLACK && final_residual <= tol,
        max_increase,
        final_residual,
    })
}

/// A Douglas-Rachford problem on `X^m` encoding `0 in sum_i A_i x`.
///
/// `A` acts blockwise and `B` is the normal cone of the diagonal, so
/// `J_B` is the blockwise mean.
#[derive(Debug, Clone)]
pub struct ConsensusProblem {
    pub problem: DrProblem,
    pub blocks: usize,
    pub block_dim: usize,
}

/// Solution of a lifted problem read back in the base space.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConsensusSolution {
    /// Mean of the shadow blocks.
    pub point: Vector,
    /// Largest distance between a shadow block and `point`.
    pub block_spread: f64,
    /// `u_i`, an element of `A_i(x_i)` per block.
    pub witnesses: Vec<Vector>,
}

/// Lifts `m >= 2` operators to the product space. `z0` is either a base-space
/// point (replicated in every block) or a flattened product point.
pub fn consensus_lift(ops: Vec<MonotoneOperator>, z0: &Vector) -> Result<ConsensusProblem> {
    let m = ops.len();
    if m < 2 {
        return Err(Error::TooFewBlocks(m));
    }
    let mut dims = ops.iter().filter_map(MonotoneOperator::dim);
    // when no operator fixes the dimension, z0 is read as a base point
    let d = dims.next().unwrap_or(z0.dim());
    for other in dims {
        check_dim(d, other)?;
    }
    let flat_z0 = if z0.dim() == d {
        ProductPoint::diagonal(z0, m)?.flatten()
    } else if z0.dim() == m * d {
        z0.clone()
    } else {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: z0.dim(),
        });
    };
    let a = MonotoneOperator::blockwise(ops, d)?;
    let b = MonotoneOperator::NormalCone(ConvexSet::diagonal(m, d)?);
    Ok(ConsensusProblem {
        problem: DrProblem::new(a, b, flat_z0)?,
        blocks: m,
        block_dim: d,
    })
}

impl ConsensusProblem {
    pub fn solve(&self) -> Result<(IterationTrace, SolutionReport, ConsensusSolution)> {
        let (trace, report) = dr_iterate(&self.problem)?;
        let sol = self.map_back(&report)?;
        Ok((trace, report, sol))
    }

    /// Reads the common block off a lifted report.
    pub fn map_back(&self, report: &SolutionReport) -> Result<ConsensusSolution> {
        let shadow = ProductPoint::from_flat(&report.shadow_limit, self.blocks)?;
        let point = product_project(ProductProjection::Diagonal, &shadow).blocks()[0].clone();
        let block_spread = shadow.blocks().iter().map(|b| b.distance(&point)).fold(0.0, f64::max);
        let witnesses = ProductPoint::from_flat(&report.witness_a, self.blocks)?.blocks().to_vec();
        Ok(ConsensusSolution {
            point,
            block_spread,
            witnesses,
        })
    }

    /// Splits a flat iterate into its blocks.
    pub fn blocks_of(&self, flat: &Vector) -> Result<Vec<Vector>> {
        Ok(ProductPoint::from_flat(flat, self.blocks)?.blocks().to_vec())
    }
}

/// Solves `0 in A x + B x` and returns only the report.
pub fn solve(p: &DrProblem) -> Result<SolutionReport> {
    dr_iterate(p).map(|(_, r)| r)
}
