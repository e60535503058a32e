//! Canned runs: the projector discontinuity on the unit ball, the failure of
//! the naive weak-weak demiclosedness, shadow convergence of Douglas-Rachford
//! certified by the multi-operator principle, and convex feasibility.
//!
//! Every run is deterministic; the returned [`ExperimentResult`] is plain
//! data that the companion crate serializes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::demiclosedness::{
    classical_certificate, firm_principle_certificate, multi_firm_certificate, multi_nonexp_certificate,
    weak_limit_estimate, CertificateReport, Tolerances,
};
use crate::error::{check_dim, invalid, Error, Result};
use crate::hilbert::{standard_basis_vector, AffineSubspace, Vector};
use crate::operators::{check_firmly_nonexpansive, ConvexSet, MonotoneOperator, OperatorMap, DEFAULT_SLACK};
use crate::splitting::{consensus_lift, dr_iterate, DrProblem, IterationTrace, TraceOptions, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Agreement required of values that are equal in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-12;
/// Agreement required of limits produced by an iteration.
pub const LIMIT_TOL: f64 = 1e-8;

/// Solver and certificate settings shared by the iterative experiments.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub trace: TraceOptions,
    pub certificate: Tolerances,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            trace: TraceOptions::default(),
            certificate: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentResult {
    pub name: String,
    pub parameters: BTreeMap<String, String>,
    /// Scalar sequences indexed by iterate.
    pub sequences: BTreeMap<String, Vec<f64>>,
    /// Vector sequences restricted to the probe coordinates.
    pub traces: BTreeMap<String, Vec<Vec<f64>>>,
    pub scalars: BTreeMap<String, f64>,
    pub vectors: BTreeMap<String, Vector>,
    /// Named pass/fail checks; the experiment passes when all hold.
    pub checks: BTreeMap<String, bool>,
    pub certificates: BTreeMap<String, CertificateReport>,
    /// Certificates that declined to run, with the reason.
    pub refusals: BTreeMap<String, String>,
    pub passed: bool,
    /// Files written for this result; filled in by the caller that writes them.
    pub artifacts: Vec<String>,
    /// Full iteration record, kept for CSV export.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub trace: Option<IterationTrace>,
}

impl ExperimentResult {
    fn new(name: &str) -> Self {
        ExperimentResult {
            name: name.to_string(),
            ..Default::default()
        }
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    fn scalar(&mut self, key: &str, value: f64) {
        self.scalars.insert(key.to_string(), value);
    }

    fn check(&mut self, key: &str, ok: bool) {
        self.checks.insert(key.to_string(), ok);
    }

    fn finish(mut self) -> Self {
        self.passed = !self.checks.is_empty() && self.checks.values().all(|&b| b);
        self
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, &ok)| !ok).map(|(k, _)| k.as_str()).collect()
    }
}

fn restrict_all(seq: &[Vector], probes: &[usize]) -> Vec<Vec<f64>> {
    seq.iter().map(|v| probes.iter().map(|&k| v[k]).collect()).collect()
}

fn probe_list(probes: Option<Vec<usize>>, dim: usize) -> Result<Vec<usize>> {
    let probes = probes.unwrap_or_else(|| (0..dim.min(11)).collect());
    if let Some(&k) = probes.iter().find(|&&k| k >= dim) {
        return Err(Error::IndexOutOfRange { index: k, dim });
    }
    if probes.is_empty() {
        return Err(invalid("probes", "at least one probe is needed"));
    }
    Ok(probes)
}

/// `z_n = e_0 + e_n`, `n = 1..=n_max`, in dimension `n_max + 2`.
pub fn unit_vector_sequence(n_max: usize) -> Result<Vec<Vector>> {
    if n_max == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let d = n_max + 2;
    let e0 = standard_basis_vector(0, d)?;
    (1..=n_max).map(|n| Ok(&e0 + &standard_basis_vector(n, d)?)).collect()
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Projects `z_n = e_0 + e_n` onto the closed unit ball. The sequence
/// converges weakly to `e_0` while its projections converge weakly to
/// `e_0 / sqrt 2`, not to `P e_0 = e_0`.
pub fn zarantonello_run(n: usize, probes: Option<Vec<usize>>) -> Result<ExperimentResult> {
    let zs = unit_vector_sequence(n)?;
    let d = n + 2;
    let probes = probe_list(probes, d)?;
    let ball = ConvexSet::ball(Vector::zeros(d), 1.0)?;
    let pz: Vec<Vector> = zs.iter().map(|z| ball.project(z)).collect::<Result<_>>()?;
    let e0 = standard_basis_vector(0, d)?;
    let pe0 = ball.project(&e0)?;

    let mut r = ExperimentResult::new("zarantonello");
    r.param("n", n);
    r.param("dim", d);
    r.param("probes", format!("{probes:?}"));

    let coord0: Vec<f64> = pz.iter().map(|p| p[0]).collect();
    let dist: Vec<f64> = pz.iter().map(|p| p.distance(&pe0)).collect();
    let tol = Tolerances::default().with_probes(probes.clone());
    let window = tol.window_for(zs.len());
    let wz = weak_limit_estimate(&zs, &probes, window, tol.hyp_tol)?;
    let wp = weak_limit_estimate(&pz, &probes, window, tol.hyp_tol)?;
    let z_lim = wz.embed();
    let p_lim = wp.embed();
    let p_of_lim = ball.project(&z_lim)?;
    let one_over_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;

    r.scalar("coord0_first", coord0[0]);
    r.scalar("coord0_spread", spread(&coord0));
    r.scalar("distance_to_p_e0", dist[0]);
    r.scalar("distance_spread", spread(&dist));
    r.scalar("weak_limit_gap", p_lim.distance(&p_of_lim));
    r.scalar("window", window as f64);
    r.check("z_n weakly converges", wz.converged);
    r.check("P z_n weakly converges", wp.converged);
    r.check("weak limit of z_n is e_0", z_lim.distance(&e0) < EXACT_TOL);
    r.check(
        "weak limit of P z_n is e_0/sqrt2",
        p_lim.distance(&e0.scaled(one_over_sqrt2)) < EXACT_TOL,
    );
    r.check("coordinate 0 constant in n", spread(&coord0) < 1e-15);
    r.check("distance to P e_0 constant in n", spread(&dist) < 1e-15);
    r.check("P z_n does not approach P e_0", dist.iter().all(|&v| v > 0.5));

    // F = P: the firm principle with C = X and D = {z - x} declines to
    // conclude, since z_n - P z_n does not converge in norm.
    let c = AffineSubspace::full_space(d);
    let dd = AffineSubspace::singleton(&z_lim - &p_lim);
    let cert = firm_principle_certificate(&OperatorMap::Projector(ball), &zs, &c, &dd, &tol)?;
    r.check(
        "firm principle hypotheses fail",
        cert.failed_hypothesis() == Some("(z_n - F z_n) - P_D(z_n - F z_n) -> 0"),
    );
    r.certificates.insert("firm_principle".to_string(), cert);

    r.sequences.insert("proj_coord0".to_string(), coord0);
    r.sequences.insert("proj_distance_to_p_e0".to_string(), dist);
    r.traces.insert("proj_probes".to_string(), restrict_all(&pz, &probes));
    r.vectors.insert("z_weak_limit".to_string(), z_lim);
    r.vectors.insert("proj_weak_limit".to_string(), p_lim);
    r.vectors.insert("proj_of_weak_limit".to_string(), p_of_lim);
    Ok(r.finish())
}

/// `T = Id - P` for the unit ball along `x_n = e_0 + e_n`: `x_n ⇀ e_0` and
/// `x_n - T x_n ⇀ e_0 / sqrt 2`, yet `e_0 - T e_0 = e_0`.
pub fn remark14_run(n: usize, probes: Option<Vec<usize>>) -> Result<ExperimentResult> {
    let xs = unit_vector_sequence(n)?;
    let d = n + 2;
    let probes = probe_list(probes, d)?;
    let ball = ConvexSet::ball(Vector::zeros(d), 1.0)?;
    let t = OperatorMap::ComplementProjector(ball);
    let resid: Vec<Vector> = xs
        .iter()
        .map(|x| Ok(x - &t.apply(x)?))
        .collect::<Result<_>>()?;

    let mut r = ExperimentResult::new("counterexample");
    r.param("n", n);
    r.param("dim", d);
    r.param("probes", format!("{probes:?}"));

    let tol = Tolerances::default().with_probes(probes.clone());
    let window = tol.window_for(xs.len());
    let wx = weak_limit_estimate(&xs, &probes, window, tol.hyp_tol)?;
    let wr = weak_limit_estimate(&resid, &probes, window, tol.hyp_tol)?;
    let x = wx.embed();
    let w = wr.embed();
    let at_limit = &x - &t.apply(&x)?;
    let gap = at_limit.distance(&w);
    let e0 = standard_basis_vector(0, d)?;

    r.scalar("gap", gap);
    r.scalar("window", window as f64);
    r.check("x_n weakly converges", wx.converged);
    r.check("x_n - T x_n weakly converges", wr.converged);
    r.check("weak limit of x_n is e_0", x.distance(&e0) < EXACT_TOL);
    r.check("naive principle fails", gap > 0.25);

    match classical_certificate(&t, &xs, &w, &tol) {
        Err(Error::PreconditionFailed { name, value }) => {
            r.scalar("classical_precondition_tail", value);
            r.refusals.insert("classical".to_string(), format!("precondition `{name}` fails: tail {value:e}"));
            r.check("classical certificate refuses", true);
        }
        Err(e) => return Err(e),
        Ok(rep) => {
            r.certificates.insert("classical".to_string(), rep);
            r.check("classical certificate refuses", false);
        }
    }

    let mut pairs: Vec<(Vector, Vector)> = xs.windows(2).map(|p| (p[0].clone(), p[1].clone())).collect();
    pairs.extend(xs.iter().map(|v| (v.clone(), e0.clone())));
    let firm = check_firmly_nonexpansive(&t, &pairs, DEFAULT_SLACK)?;
    r.scalar("firm_worst_margin", firm.worst_margin);
    r.check("T firmly nonexpansive on the data", firm.passed);

    r.traces.insert("residual_probes".to_string(), restrict_all(&resid, &probes));
    r.vectors.insert("x_weak_limit".to_string(), x);
    r.vectors.insert("residual_weak_limit".to_string(), w);
    r.vectors.insert("residual_at_limit".to_string(), at_limit);
    Ok(r.finish())
}

/// Runs Douglas-Rachford for `(A, B)` and certifies the shadow limit with the
/// multi-operator firm principle applied to `F_1 = J_A`, `F_2 = J_B` along
/// `(z_n)` and `(R_A z_n)`.
pub fn svaiter_shadow_run(
    a: MonotoneOperator,
    b: MonotoneOperator,
    z0: Vector,
    cfg: &RunSettings,
) -> Result<ExperimentResult> {
    let mut r = ExperimentResult::new("svaiter");
    r.param("a", a.kind());
    r.param("b", b.kind());
    r.param("z0", format!("{:?}", z0.coords()));
    r.param("tol", cfg.tol);
    r.param("max_iter", cfg.max_iter);

    let problem = DrProblem::new(a.clone(), b.clone(), z0)?
        .with_tol(cfg.tol)
        .with_max_iter(cfg.max_iter)
        .with_trace(cfg.trace);
    let (trace, report) = dr_iterate(&problem)?;
    r.scalar("iterations", report.iterations as f64);
    r.scalar("final_residual", report.zer_residual);
    r.check("converged", report.converged);
    r.vectors.insert("z_limit".to_string(), report.z_limit.clone());
    r.vectors.insert("shadow_limit".to_string(), report.shadow_limit.clone());
    r.sequences.insert("residual".to_string(), trace.residuals());

    if report.converged {
        let zs = trace.governing();
        let ys = trace.reflections();
        let t = OperatorMap::DouglasRachford(a.clone(), b.clone());
        let mut worst_sum = 0.0f64;
        let mut worst_step = 0.0f64;
        for (z, y) in zs.iter().zip(&ys) {
            let ja = a.resolvent(z)?;
            let jb = b.resolvent(y)?;
            let diff = &ja - &jb;
            let mut lhs = z - &ja;
            lhs.axpy(1.0, &(y - &jb));
            worst_sum = worst_sum.max(lhs.distance(&diff));
            worst_step = worst_step.max(diff.distance(&(z - &t.apply(z)?)));
        }
        r.scalar("identity_sum_gap", worst_sum);
        r.scalar("identity_step_gap", worst_step);
        r.check("z_n - J_A z_n + y_n - J_B y_n = J_A z_n - J_B y_n", worst_sum <= EXACT_TOL);
        r.check("J_A z_n - J_B y_n = z_n - T z_n", worst_step <= EXACT_TOL);

        let cert = multi_firm_certificate(
            &[OperatorMap::Resolvent(a.clone()), OperatorMap::Resolvent(b)],
            &[zs, ys],
            &cfg.certificate,
        )?;
        let x = cert.limit("x").cloned().unwrap_or_else(|| Vector::zeros(report.z_limit.dim()));
        let ja_z = a.resolvent(&report.z_limit)?;
        let gap = report.shadow_limit.distance(&ja_z);
        r.scalar("shadow_gap", gap);
        r.scalar("certified_limit_gap", x.distance(&report.shadow_limit));
        r.check("multi firm certificate passes", cert.passed());
        r.check("shadow limit equals J_A z", gap < LIMIT_TOL);
        r.check("certified limit matches shadow limit", x.distance(&report.shadow_limit) < LIMIT_TOL);
        r.certificates.insert("multi_firm".to_string(), cert);
    }
    r.trace = Some(trace);
    Ok(r.finish())
}

/// Finds a point of `S_1 ∩ ... ∩ S_m`: directly for two sets, through the
/// consensus lift beyond that. The iterates are cross-checked with the
/// multi-operator nonexpansive principle applied to the reflectors.
pub fn feasibility_demo_run(sets: Vec<ConvexSet>, z0: Vector, cfg: &RunSettings) -> Result<ExperimentResult> {
    let m = sets.len();
    if m < 2 {
        return Err(Error::TooFewBlocks(m));
    }
    for s in &sets {
        s.validate()?;
        check_dim(s.dim(), z0.dim())?;
    }
    let mut r = ExperimentResult::new("feasibility");
    r.param("sets", m);
    r.param("z0", format!("{:?}", z0.coords()));
    r.param("tol", cfg.tol);
    r.param("max_iter", cfg.max_iter);

    let ops: Vec<MonotoneOperator> = sets.iter().cloned().map(MonotoneOperator::normal_cone).collect::<Result<_>>()?;
    let (trace, report, point, reflectors, seqs) = if m == 2 {
        let problem = DrProblem::new(ops[0].clone(), ops[1].clone(), z0)?
            .with_tol(cfg.tol)
            .with_max_iter(cfg.max_iter)
            .with_trace(cfg.trace);
        let (trace, report) = dr_iterate(&problem)?;
        let point = report.shadow_limit.clone();
        let reflectors = alloc::vec![OperatorMap::Reflector(ops[0].clone()), OperatorMap::Reflector(ops[1].clone())];
        let seqs = alloc::vec![trace.governing(), trace.reflections()];
        (trace, report, point, reflectors, seqs)
    } else {
        let mut lifted = consensus_lift(ops.clone(), &z0)?;
        lifted.problem = lifted.problem.with_tol(cfg.tol).with_max_iter(cfg.max_iter).with_trace(cfg.trace);
        let (trace, report, sol) = lifted.solve()?;
        r.scalar("block_spread", sol.block_spread);
        let reflectors = ops.iter().cloned().map(OperatorMap::Reflector).collect();
        let mut seqs: Vec<Vec<Vector>> = alloc::vec![Vec::with_capacity(trace.len()); m];
        for rec in &trace.records {
            for (i, blk) in lifted.blocks_of(&rec.z)?.into_iter().enumerate() {
                seqs[i].push(blk);
            }
        }
        (trace, report, sol.point, reflectors, seqs)
    };

    r.scalar("iterations", report.iterations as f64);
    r.scalar("final_residual", report.zer_residual);
    r.check("converged", report.converged);
    let mut worst = 0.0f64;
    for (i, s) in sets.iter().enumerate() {
        let g = s.distance(&point)?;
        worst = worst.max(g);
        r.scalar(&format!("membership_gap_{}", i + 1), g);
    }
    r.scalar("membership_gap_max", worst);
    r.check("common point lies in every set", worst < LIMIT_TOL);
    r.sequences.insert("residual".to_string(), trace.residuals());
    r.vectors.insert("point".to_string(), point);

    if report.converged {
        let cert = multi_nonexp_certificate(&reflectors, &seqs, &cfg.certificate)?;
        r.check("multi nonexp certificate passes", cert.passed());
        r.certificates.insert("multi_nonexp".to_string(), cert);
    }
    r.trace = Some(trace);
    Ok(r.finish())
}
