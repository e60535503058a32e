//! Demiclosedness certificates over recorded sequences.
//!
//! Each checker takes finitely many terms of one or more sequences, verifies
//! the hypotheses of a demiclosedness principle on a tail window, estimates
//! the limits, and measures how far the principle's conclusion is from
//! holding at those limits.
//!
//! Strong hypotheses (`a_n -> a`) are tested in norm: the tail is the maximum
//! of `||a_n - a||` over the window. Weak hypotheses (`a_n ⇀ a`) use the
//! coordinatewise surrogate of [`weak_limit_estimate`]: on a declared set of
//! probe coordinates the last `window` values must settle, and the sequence
//! must stay bounded. For bounded sequences in the finite model this is weak
//! convergence restricted to the probes; coordinates outside the probes are
//! taken to vanish in the limit.
//!
//! A report whose hypotheses all pass but whose conclusion gap exceeds the
//! tolerance contradicts the underlying theorem and is flagged as a defect
//! ([`CertificateReport::is_defect`]).

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Error, Result};
use crate::hilbert::{check_orthogonal_pair, AffineSubspace, Vector};
use crate::operators::{check_firmly_nonexpansive, GraphPoint, MonotoneOperator, OperatorMap, DEFAULT_SLACK};

pub const DEFAULT_HYP_TOL: f64 = 1e-6;
pub const DEFAULT_CONCL_TOL: f64 = 1e-6;
/// Largest tail window used when none is given.
pub const DEFAULT_MAX_WINDOW: usize = 64;
/// Norm above which a sequence counts as unbounded.
pub const UNBOUNDED_NORM: f64 = 1e8;
/// Largest admissible Minty reconstruction gap for a graph sequence.
pub const GRAPH_MEMBERSHIP_TOL: f64 = 1e-9;

/// Window and thresholds shared by all certificates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tolerances {
    /// Tail window; `None` means `min(64, len / 4)` (at least 1).
    pub window: Option<usize>,
    pub hyp_tol: f64,
    pub concl_tol: f64,
    /// Probe coordinates for weak limits; `None` probes every coordinate.
    pub probes: Option<Vec<usize>>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            window: None,
            hyp_tol: DEFAULT_HYP_TOL,
            concl_tol: DEFAULT_CONCL_TOL,
            probes: None,
        }
    }
}

impl Tolerances {
    pub fn with_probes(mut self, probes: Vec<usize>) -> Self {
        self.probes = Some(probes);
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = Some(window);
        self
    }

    pub fn window_for(&self, len: usize) -> usize {
        self.window
            .unwrap_or_else(|| DEFAULT_MAX_WINDOW.min(len / 4))
            .max(1)
            .min(len.max(1))
    }

    fn probes_for(&self, dim: usize) -> Vec<usize> {
        match &self.probes {
            Some(p) => p.clone(),
            None => (0..dim).collect(),
        }
    }
}

/// Coordinatewise weak-limit estimate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeakLimit {
    pub dim: usize,
    pub probes: Vec<usize>,
    /// Window mean of each probe coordinate.
    pub values: Vec<f64>,
    /// Largest max-minus-min of a probe coordinate over the window.
    pub spread: f64,
    /// Largest norm over the whole sequence.
    pub max_norm: f64,
    pub converged: bool,
}

impl WeakLimit {
    /// The estimate as a full vector, zero off the probes.
    pub fn embed(&self) -> Vector {
        let mut coords = alloc::vec![0.0; self.dim];
        for (&k, &v) in self.probes.iter().zip(&self.values) {
            coords[k] = v;
        }
        Vector::from(coords)
    }

    /// How far the estimate is from settling: the spread, or infinity for an
    /// unbounded sequence.
    pub fn tail(&self) -> f64 {
        if self.max_norm > UNBOUNDED_NORM || !self.max_norm.is_finite() {
            f64::INFINITY
        } else {
            self.spread
        }
    }
}

/// Surrogate for `seq ⇀ limit`: every probe coordinate must have spread below
/// `tol` over the last `window` terms and the sequence must stay within norm
/// [`UNBOUNDED_NORM`].
pub fn weak_limit_estimate(seq: &[Vector], probes: &[usize], window: usize, tol: f64) -> Result<WeakLimit> {
    let first = seq.first().ok_or(Error::EmptySequence)?;
    let dim = first.dim();
    if window == 0 || window > seq.len() {
        return Err(invalid("window", format!("must be in 1..={}", seq.len())));
    }
    if let Some(&k) = probes.iter().find(|&&k| k >= dim) {
        return Err(Error::IndexOutOfRange { index: k, dim });
    }
    let mut max_norm = 0.0f64;
    for v in seq {
        check_dim(dim, v.dim())?;
        let n = v.norm();
        max_norm = if n.is_nan() { f64::INFINITY } else { max_norm.max(n) };
    }
    let tail = &seq[seq.len() - window..];
    let mut spread = 0.0f64;
    let values = probes
        .iter()
        .map(|&k| {
            let (lo, hi, sum) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), v| {
                (lo.min(v[k]), hi.max(v[k]), s + v[k])
            });
            let w = hi - lo;
            spread = if w.is_nan() { f64::INFINITY } else { spread.max(w) };
            if lo == hi {
                lo
            } else {
                sum / window as f64
            }
        })
        .collect();
    let converged = spread < tol && max_norm <= UNBOUNDED_NORM;
    Ok(WeakLimit {
        dim,
        probes: probes.to_vec(),
        values,
        spread,
        max_norm,
        converged,
    })
}

/// How a hypothesis is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Convergence {
    Strong,
    Weak,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hypothesis {
    pub name: String,
    pub mode: Convergence,
    /// Window maximum of the residual (strong) or the surrogate spread (weak).
    pub tail: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Conclusion {
    pub name: String,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", content = "hypothesis", rename_all = "snake_case"))]
pub enum Verdict {
    Pass,
    /// Names the first hypothesis that failed.
    HypothesisFailed(String),
    ConclusionFailed,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertificateReport {
    pub certificate: String,
    pub window: usize,
    pub hyp_tol: f64,
    pub concl_tol: f64,
    pub hypothesis_residuals: Vec<Hypothesis>,
    pub surrogate_limits: Vec<(String, Vector)>,
    pub inner_product_trace: Vec<f64>,
    pub conclusions: Vec<Conclusion>,
    /// Largest conclusion gap.
    pub conclusion_gap: f64,
    pub verdict: Verdict,
    /// Report of the principle this one reduces to, when it does.
    pub reduction: Option<Box<CertificateReport>>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Hypotheses hold but the conclusion does not: a contradiction of the
    /// theorem, hence an implementation defect.
    pub fn is_defect(&self) -> bool {
        self.verdict == Verdict::ConclusionFailed
    }

    pub fn failed_hypothesis(&self) -> Option<&str> {
        match &self.verdict {
            Verdict::HypothesisFailed(n) => Some(n),
            _ => None,
        }
    }

    pub fn hypothesis(&self, name: &str) -> Option<&Hypothesis> {
        self.hypothesis_residuals.iter().find(|h| h.name == name)
    }

    pub fn limit(&self, name: &str) -> Option<&Vector> {
        self.surrogate_limits.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    /// Every hypothesis name whose check failed, in order.
    pub fn failed_hypotheses(&self) -> Vec<&str> {
        self.hypothesis_residuals
            .iter()
            .filter(|h| !h.passed)
            .map(|h| h.name.as_str())
            .collect()
    }
}

/// Accumulates hypotheses and conclusions, then settles the verdict.
struct Builder {
    certificate: &'static str,
    window: usize,
    hyp_tol: f64,
    concl_tol: f64,
    hypotheses: Vec<Hypothesis>,
    limits: Vec<(String, Vector)>,
    conclusions: Vec<Conclusion>,
    inner_trace: Vec<f64>,
    reduction: Option<Box<CertificateReport>>,
}

impl Builder {
    fn new(certificate: &'static str, window: usize, tol: &Tolerances) -> Self {
        Builder {
            certificate,
            window,
            hyp_tol: tol.hyp_tol,
            concl_tol: tol.concl_tol,
            hypotheses: Vec::new(),
            limits: Vec::new(),
            conclusions: Vec::new(),
            inner_trace: Vec::new(),
            reduction: None,
        }
    }

    fn strong(&mut self, name: impl Into<String>, residuals: &[f64]) {
        let tail = tail_max(residuals, self.window);
        self.push(name.into(), Convergence::Strong, tail, self.hyp_tol);
    }

    fn strong_with(&mut self, name: impl Into<String>, tail: f64, tol: f64) {
        self.push(name.into(), Convergence::Strong, tail, tol);
    }

    fn weak(&mut self, name: impl Into<String>, limit_name: &str, w: &WeakLimit) -> Vector {
        let v = w.embed();
        self.push(name.into(), Convergence::Weak, w.tail(), self.hyp_tol);
        self.limits.push((limit_name.to_string(), v.clone()));
        v
    }

    fn push(&mut self, name: String, mode: Convergence, tail: f64, tol: f64) {
        self.hypotheses.push(Hypothesis {
            name,
            mode,
            tail,
            passed: tail < tol,
        });
    }

    fn limit(&mut self, name: &str, v: Vector) {
        self.limits.push((name.to_string(), v));
    }

    fn conclude(&mut self, name: impl Into<String>, gap: f64) {
        self.conclusions.push(Conclusion {
            name: name.into(),
            gap: if gap.is_nan() { f64::INFINITY } else { gap },
        });
    }

    fn finish(self) -> CertificateReport {
        let conclusion_gap = self.conclusions.iter().fold(0.0f64, |m, c| m.max(c.gap));
        let verdict = match self.hypotheses.iter().find(|h| !h.passed) {
            Some(h) => Verdict::HypothesisFailed(h.name.clone()),
            None if conclusion_gap < self.concl_tol => Verdict::Pass,
            None => Verdict::ConclusionFailed,
        };
        if verdict == Verdict::ConclusionFailed {
            log::warn!("{}: hypotheses hold but the conclusion gap is {conclusion_gap:e}", self.certificate);
        }
        CertificateReport {
            certificate: self.certificate.to_string(),
            window: self.window,
            hyp_tol: self.hyp_tol,
            concl_tol: self.concl_tol,
            hypothesis_residuals: self.hypotheses,
            surrogate_limits: self.limits,
            inner_product_trace: self.inner_trace,
            conclusions: self.conclusions,
            conclusion_gap,
            verdict,
            reduction: self.reduction,
        }
    }
}

fn tail_max(values: &[f64], window: usize) -> f64 {
    let start = values.len().saturating_sub(window);
    values[start..]
        .iter()
        .fold(0.0f64, |m, &v| if v.is_nan() { f64::INFINITY } else { m.max(v) })
}

fn common_dim(seqs: &[&[Vector]]) -> Result<usize> {
    let first = seqs
        .iter()
        .find_map(|s| s.first())
        .ok_or(Error::EmptySequence)?;
    let d = first.dim();
    for s in seqs {
        if s.is_empty() {
            return Err(Error::EmptySequence);
        }
        for v in s.iter() {
            check_dim(d, v.dim())?;
        }
    }
    Ok(d)
}

fn require_orthogonal(c: &AffineSubspace, d: &AffineSubspace) -> Result<()> {
    let chk = check_orthogonal_pair(c, d)?;
    if chk.passed {
        Ok(())
    } else {
        Err(Error::NotOrthogonalPair {
            worst_cross: chk.worst_cross,
            dims: (chk.dim_c, chk.dim_d, chk.ambient),
        })
    }
}

fn apply_all(map: &OperatorMap, seq: &[Vector]) -> Result<Vec<Vector>> {
    seq.iter().map(|z| map.apply(z)).collect()
}

/// Pairs `(x_n, u_n)`, optionally tagged with the operator whose graph they
/// are claimed to lie in.
#[derive(Debug, Clone)]
pub struct GraphSequence {
    pub pairs: Vec<GraphPoint>,
    pub operator: Option<MonotoneOperator>,
}

impl GraphSequence {
    pub fn new(pairs: Vec<GraphPoint>, operator: Option<MonotoneOperator>) -> Result<Self> {
        let first = pairs.first().ok_or(Error::EmptySequence)?;
        let d = first.point.dim();
        for p in &pairs {
            check_dim(d, p.point.dim())?;
            check_dim(d, p.value.dim())?;
        }
        if let Some(op) = &operator {
            if let Some(od) = op.dim() {
                check_dim(od, d)?;
            }
        }
        Ok(GraphSequence { pairs, operator })
    }

    /// The Minty sequence `(F z_n, z_n - F z_n)`.
    pub fn from_map(f: &OperatorMap, zs: &[Vector]) -> Result<Self> {
        let pairs = zs
            .iter()
            .map(|z| {
                let fz = f.apply(z)?;
                let value = z - &fz;
                Ok(GraphPoint { point: fz, value })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs, None)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.pairs[0].point.dim()
    }

    /// Largest `||J_A(x_n + u_n) - x_n||`, or `None` without an operator.
    pub fn membership_gap(&self) -> Result<Option<f64>> {
        let Some(op) = &self.operator else { return Ok(None) };
        let mut worst = 0.0f64;
        for p in &self.pairs {
            worst = worst.max(op.graph_gap(&p.point, &p.value)?);
        }
        Ok(Some(worst))
    }
}

/// Demiclosedness of a maximally monotone operator along a pair of mutually
/// orthogonal affine subspaces.
///
/// Given `(x_n, u_n)` in `gra A` with `(x_n, u_n) ⇀ (x, u)` and
/// `(x_n, u_n) - P_{C×D}(x_n, u_n) -> 0`, where `D - D = (C - C)^perp`, the
/// limit satisfies `x in C`, `u in D`, `(x, u) in gra A`, and
/// `<x_n, u_n> -> <x, u>`.
pub fn theorem22_certificate(
    g: &GraphSequence,
    c: &AffineSubspace,
    d: &AffineSubspace,
    tol: &Tolerances,
) -> Result<CertificateReport> {
    require_orthogonal(c, d)?;
    check_dim(c.ambient_dim(), g.dim())?;
    let xs: Vec<Vector> = g.pairs.iter().map(|p| p.point.clone()).collect();
    let us: Vec<Vector> = g.pairs.iter().map(|p| p.value.clone()).collect();
    let window = tol.window_for(g.len());
    let probes = tol.probes_for(g.dim());
    let mut b = Builder::new("theorem22", window, tol);

    let x = b.weak("x_n ⇀ x", "x", &weak_limit_estimate(&xs, &probes, window, tol.hyp_tol)?);
    let u = b.weak("u_n ⇀ u", "u", &weak_limit_estimate(&us, &probes, window, tol.hyp_tol)?);
    if let Some(gap) = g.membership_gap()? {
        b.strong_with("(x_n, u_n) in gra A", gap, GRAPH_MEMBERSHIP_TOL);
    }
    let rc: Vec<f64> = xs.iter().map(|x| c.distance(x)).collect();
    b.strong("x_n - P_C x_n -> 0", &rc);
    let rd: Vec<f64> = us.iter().map(|u| d.distance(u)).collect();
    b.strong("u_n - P_D u_n -> 0", &rd);

    b.inner_trace = xs.iter().zip(&us).map(|(x, u)| x.dot(u)).collect();
    let limit_inner = x.dot(&u);
    let inner_gaps: Vec<f64> = b.inner_trace.iter().map(|v| (v - limit_inner).abs()).collect();

    b.conclude("x in C", c.distance(&x));
    b.conclude("u in D", d.distance(&u));
    if let Some(op) = &g.operator {
        b.conclude("(x, u) in gra A", op.graph_gap(&x, &u)?);
    }
    b.conclude("<x_n, u_n> -> <x, u>", tail_max(&inner_gaps, window));
    Ok(b.finish())
}

/// Firm nonexpansiveness principle: for firmly nonexpansive `F` with
/// `z_n ⇀ z`, `F z_n ⇀ x`, `F z_n - P_C F z_n -> 0` and
/// `(z_n - F z_n) - P_D(z_n - F z_n) -> 0`, one has `x in C`, `z in x + D`
/// and `F z = x`.
///
/// `F` is spot-checked for firm nonexpansiveness on consecutive recorded
/// points; a violation is a precondition error.
pub fn firm_principle_certificate(
    f: &OperatorMap,
    zs: &[Vector],
    c: &AffineSubspace,
    d: &AffineSubspace,
    tol: &Tolerances,
) -> Result<CertificateReport> {
    require_orthogonal(c, d)?;
    let dim = common_dim(&[zs])?;
    check_dim(c.ambient_dim(), dim)?;
    let fz = apply_all(f, zs)?;
    spot_check_firm(f, zs)?;

    let window = tol.window_for(zs.len());
    let probes = tol.probes_for(dim);
    let mut b = Builder::new("firm_principle", window, tol);
    let z = b.weak("z_n ⇀ z", "z", &weak_limit_estimate(zs, &probes, window, tol.hyp_tol)?);
    let x = b.weak("F z_n ⇀ x", "x", &weak_limit_estimate(&fz, &probes, window, tol.hyp_tol)?);

    let rc: Vec<f64> = fz.iter().map(|v| c.distance(v)).collect();
    b.strong("F z_n - P_C F z_n -> 0", &rc);
    let resid: Vec<Vector> = zs.iter().zip(&fz).map(|(z, f)| z - f).collect();
    let rd: Vec<f64> = resid.iter().map(|v| d.distance(v)).collect();
    b.strong("(z_n - F z_n) - P_D(z_n - F z_n) -> 0", &rd);
    b.inner_trace = fz.iter().zip(&resid).map(|(a, r)| a.dot(r)).collect();

    b.conclude("x in C", c.distance(&x));
    b.conclude("z in x + D", d.distance(&(&z - &x)));
    b.conclude("F z = x", f.apply(&z)?.distance(&x));
    Ok(b.finish())
}

fn spot_check_firm(f: &OperatorMap, zs: &[Vector]) -> Result<()> {
    if zs.len() < 2 {
        return Ok(());
    }
    let pairs: Vec<(Vector, Vector)> = zs.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    let chk = check_firmly_nonexpansive(f, &pairs, DEFAULT_SLACK)?;
    if chk.passed {
        Ok(())
    } else {
        Err(Error::PreconditionFailed {
            name: "F firmly nonexpansive".to_string(),
            value: chk.worst_margin,
        })
    }
}

/// Per-iterate residuals of the nonexpansiveness principle:
/// `z_n + T z_n - P_C z_n - P_C T z_n` and `z_n - T z_n - P_D z_n - P_D(-T z_n)`.
pub fn nonexp_residuals(
    z: &Vector,
    tz: &Vector,
    c: &AffineSubspace,
    d: &AffineSubspace,
) -> (Vector, Vector) {
    let mut rc = z + tz;
    rc.axpy(-1.0, &c.project_unchecked(z));
    rc.axpy(-1.0, &c.project_unchecked(tz));
    let mut rd = z - tz;
    rd.axpy(-1.0, &d.project_unchecked(z));
    rd.axpy(-1.0, &d.project_unchecked(&-tz));
    (rc, rd)
}

/// Nonexpansiveness principle: for nonexpansive `T` with `z_n ⇀ z`,
/// `T z_n ⇀ y` and the two projected residuals vanishing, one has
/// `(z + y)/2 in C`, `(z - y)/2 in D` and `T z = y`.
///
/// The averaged map `F = (Id + T)/2` is run through
/// [`firm_principle_certificate`] and attached as the reduction.
pub fn nonexp_principle_certificate(
    t: &OperatorMap,
    zs: &[Vector],
    c: &AffineSubspace,
    d: &AffineSubspace,
    tol: &Tolerances,
) -> Result<CertificateReport> {
    require_orthogonal(c, d)?;
    let dim = common_dim(&[zs])?;
    check_dim(c.ambient_dim(), dim)?;
    let tz = apply_all(t, zs)?;

    let window = tol.window_for(zs.len());
    let probes = tol.probes_for(dim);
    let mut b = Builder::new("nonexp_principle", window, tol);
    let z = b.weak("z_n ⇀ z", "z", &weak_limit_estimate(zs, &probes, window, tol.hyp_tol)?);
    let y = b.weak("T z_n ⇀ y", "y", &weak_limit_estimate(&tz, &probes, window, tol.hyp_tol)?);

    let (rc, rd): (Vec<f64>, Vec<f64>) = zs
        .iter()
        .zip(&tz)
        .map(|(z, t)| {
            let (a, b) = nonexp_residuals(z, t, c, d);
            (a.norm(), b.norm())
        })
        .unzip();
    b.strong("z_n + T z_n - P_C z_n - P_C T z_n -> 0", &rc);
    b.strong("z_n - T z_n - P_D z_n - P_D(-T z_n) -> 0", &rd);
    b.inner_trace = zs
        .iter()
        .zip(&tz)
        .map(|(z, t)| z.lincomb(0.5, t, 0.5).dot(&z.lincomb(0.5, t, -0.5)))
        .collect();

    b.conclude("(z + y)/2 in C", c.distance(&z.lincomb(0.5, &y, 0.5)));
    b.conclude("(z - y)/2 in D", d.distance(&z.lincomb(0.5, &y, -0.5)));
    b.conclude("T z = y", t.apply(&z)?.distance(&y));

    let averaged = OperatorMap::averaged(t.clone());
    b.reduction = Some(Box::new(firm_principle_certificate(&averaged, zs, c, d, tol)?));
    Ok(b.finish())
}

/// Classical demiclosedness: nonexpansive `T`, `z_n ⇀ z` and
/// `z_n - T z_n -> x` strongly give `z - T z = x`.
///
/// Strong convergence of `z_n - T z_n` to `x_strong` is a precondition; when
/// it fails on the tail window the certificate refuses with
/// [`Error::PreconditionFailed`]. Otherwise the data is routed through
/// [`nonexp_principle_certificate`] with `C = X` and `D = {x/2}`.
pub fn classical_certificate(
    t: &OperatorMap,
    zs: &[Vector],
    x_strong: &Vector,
    tol: &Tolerances,
) -> Result<CertificateReport> {
    let dim = common_dim(&[zs])?;
    check_dim(dim, x_strong.dim())?;
    let tz = apply_all(t, zs)?;
    let window = tol.window_for(zs.len());
    let pre: Vec<f64> = zs
        .iter()
        .zip(&tz)
        .map(|(z, t)| (z - t).distance(x_strong))
        .collect();
    let pre_tail = tail_max(&pre, window);
    if !(pre_tail < tol.hyp_tol) {
        return Err(Error::PreconditionFailed {
            name: "z_n - T z_n -> x".to_string(),
            value: pre_tail,
        });
    }

    let c = AffineSubspace::full_space(dim);
    let d = AffineSubspace::singleton(x_strong.scaled(0.5));
    let inner = nonexp_principle_certificate(t, zs, &c, &d, tol)?;

    let mut b = Builder::new("classical", window, tol);
    b.strong("z_n - T z_n -> x", &pre);
    let mut z = None;
    for h in &inner.hypothesis_residuals {
        b.push(h.name.clone(), h.mode, h.tail, if h.passed { f64::INFINITY } else { 0.0 });
    }
    for (name, v) in &inner.surrogate_limits {
        if name == "z" {
            z = Some(v.clone());
        }
        b.limit(name, v.clone());
    }
    let z = z.expect("nonexp certificate reports z");
    b.inner_trace = inner.inner_product_trace.clone();
    b.conclude("z - T z = x", (&z - &t.apply(&z)?).distance(x_strong));
    b.reduction = Some(Box::new(inner));
    Ok(b.finish())
}

fn check_bundle(zs: &[Vec<Vector>], maps: usize) -> Result<usize> {
    let m = zs.len();
    if m < 2 {
        return Err(Error::TooFewBlocks(m));
    }
    if maps != m {
        return Err(invalid("maps", format!("{maps} maps for {m} sequences")));
    }
    let len = zs[0].len();
    if zs.iter().any(|s| s.len() != len) {
        return Err(invalid("sequences", "all sequences must have the same length"));
    }
    let refs: Vec<&[Vector]> = zs.iter().map(Vec::as_slice).collect();
    common_dim(&refs)
}

/// Multi-operator principle for firmly nonexpansive `F_1, ..., F_m`:
/// `z_{i,n} ⇀ z_i`, `F_i z_{i,n} ⇀ x`, `sum_i (z_{i,n} - F_i z_{i,n}) -> -m x + sum_i z_i`
/// and `F_i z_{i,n} - F_j z_{j,n} -> 0` give `F_i z_i = x` for every `i`.
///
/// Hypotheses are checked in the order: weak limits, pairwise gap, common
/// limit, summed residual.
pub fn multi_firm_certificate(fs: &[OperatorMap], zs: &[Vec<Vector>], tol: &Tolerances) -> Result<CertificateReport> {
    let dim = check_bundle(zs, fs.len())?;
    let m = zs.len();
    let len = zs[0].len();
    let fz: Vec<Vec<Vector>> = fs.iter().zip(zs).map(|(f, s)| apply_all(f, s)).collect::<Result<_>>()?;

    let window = tol.window_for(len);
    let probes = tol.probes_for(dim);
    let mut b = Builder::new("multi_firm", window, tol);
    let mut z_lims = Vec::with_capacity(m);
    for (i, s) in zs.iter().enumerate() {
        let w = weak_limit_estimate(s, &probes, window, tol.hyp_tol)?;
        z_lims.push(b.weak(format!("z_{{{},n}} ⇀ z_{}", i + 1, i + 1), &format!("z_{}", i + 1), &w));
    }
    let mut x_lims = Vec::with_capacity(m);
    for (i, s) in fz.iter().enumerate() {
        let w = weak_limit_estimate(s, &probes, window, tol.hyp_tol)?;
        x_lims.push(b.weak(format!("F_{} z_{{{},n}} ⇀ x_{}", i + 1, i + 1, i + 1), &format!("x_{}", i + 1), &w));
    }

    let pairwise: Vec<f64> = (0..len)
        .map(|n| {
            let mut worst = 0.0f64;
            for i in 0..m {
                for j in i + 1..m {
                    worst = worst.max(fz[i][n].distance(&fz[j][n]));
                }
            }
            worst
        })
        .collect();
    b.strong("pairwise_gap", &pairwise);

    let mut x = Vector::zeros(dim);
    for xi in &x_lims {
        x.axpy(1.0 / m as f64, xi);
    }
    let spread = x_lims.iter().map(|xi| xi.distance(&x)).fold(0.0, f64::max);
    b.strong_with("common_limit", spread, tol.hyp_tol);
    b.limit("x", x.clone());

    let mut target = x.scaled(-(m as f64));
    for zi in &z_lims {
        target.axpy(1.0, zi);
    }
    let sums: Vec<f64> = (0..len)
        .map(|n| {
            let mut s = Vector::zeros(dim);
            for i in 0..m {
                s.axpy(1.0, &zs[i][n]);
                s.axpy(-1.0, &fz[i][n]);
            }
            s.distance(&target)
        })
        .collect();
    b.strong("sum_residual", &sums);

    b.inner_trace = (0..len)
        .map(|n| (0..m).map(|i| fz[i][n].dot(&(&zs[i][n] - &fz[i][n]))).sum())
        .collect();

    for (i, (f, zi)) in fs.iter().zip(&z_lims).enumerate() {
        b.conclude(format!("F_{} z_{} = x", i + 1, i + 1), f.apply(zi)?.distance(&x));
    }
    Ok(b.finish())
}

/// Multi-operator principle for nonexpansive `T_1, ..., T_m`:
/// `z_{i,n} ⇀ z_i`, `T_i z_{i,n} ⇀ y_i`,
/// `sum_i (z_{i,n} - T_i z_{i,n}) -> sum_i (z_i - y_i)` and
/// `z_{i,n} - z_{j,n} + T_i z_{i,n} - T_j z_{j,n} -> 0` give `T_i z_i = y_i`.
///
/// Reduces to [`multi_firm_certificate`] with `F_i = (Id + T_i)/2`.
pub fn multi_nonexp_certificate(ts: &[OperatorMap], zs: &[Vec<Vector>], tol: &Tolerances) -> Result<CertificateReport> {
    let dim = check_bundle(zs, ts.len())?;
    let m = zs.len();
    let len = zs[0].len();
    let tz: Vec<Vec<Vector>> = ts.iter().zip(zs).map(|(t, s)| apply_all(t, s)).collect::<Result<_>>()?;

    let window = tol.window_for(len);
    let probes = tol.probes_for(dim);
    let mut b = Builder::new("multi_nonexp", window, tol);
    let mut z_lims = Vec::with_capacity(m);
    for (i, s) in zs.iter().enumerate() {
        let w = weak_limit_estimate(s, &probes, window, tol.hyp_tol)?;
        z_lims.push(b.weak(format!("z_{{{},n}} ⇀ z_{}", i + 1, i + 1), &format!("z_{}", i + 1), &w));
    }
    let mut y_lims = Vec::with_capacity(m);
    for (i, s) in tz.iter().enumerate() {
        let w = weak_limit_estimate(s, &probes, window, tol.hyp_tol)?;
        y_lims.push(b.weak(format!("T_{} z_{{{},n}} ⇀ y_{}", i + 1, i + 1, i + 1), &format!("y_{}", i + 1), &w));
    }

    let pairwise: Vec<f64> = (0..len)
        .map(|n| {
            let mut worst = 0.0f64;
            for i in 0..m {
                let si = &zs[i][n] + &tz[i][n];
                for j in i + 1..m {
                    let sj = &zs[j][n] + &tz[j][n];
                    worst = worst.max(si.distance(&sj));
                }
            }
            worst
        })
        .collect();
    b.strong("pairwise_gap", &pairwise);

    let mut target = Vector::zeros(dim);
    for (zi, yi) in z_lims.iter().zip(&y_lims) {
        target.axpy(1.0, zi);
        target.axpy(-1.0, yi);
    }
    let sums: Vec<f64> = (0..len)
        .map(|n| {
            let mut s = Vector::zeros(dim);
            for i in 0..m {
                s.axpy(1.0, &zs[i][n]);
                s.axpy(-1.0, &tz[i][n]);
            }
            s.distance(&target)
        })
        .collect();
    b.strong("sum_residual", &sums);

    for (i, ((t, zi), yi)) in ts.iter().zip(&z_lims).zip(&y_lims).enumerate() {
        b.conclude(format!("T_{} z_{} = y_{}", i + 1, i + 1, i + 1), t.apply(zi)?.distance(yi));
    }

    let averaged: Vec<OperatorMap> = ts.iter().cloned().map(OperatorMap::averaged).collect();
    let reduced = multi_firm_certificate(&averaged, zs, tol)?;
    b.inner_trace = reduced.inner_product_trace.clone();
    b.reduction = Some(Box::new(reduced));
    Ok(b.finish())
}
