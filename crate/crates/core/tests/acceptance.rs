//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::f64::consts::FRAC_1_SQRT_2;
use std::panic::{catch_unwind, AssertUnwindSafe};

use common::{catalog, random_monotone_matrix, random_psd, sets_through};
use monodr_core::demiclosedness::{
    classical_certificate, firm_principle_certificate, multi_firm_certificate, multi_nonexp_certificate,
    nonexp_principle_certificate, theorem22_certificate, CertificateReport, GraphSequence, Tolerances, Verdict,
};
use monodr_core::experiments::{
    feasibility_demo_run, remark14_run, svaiter_shadow_run, unit_vector_sequence, zarantonello_run, RunSettings,
};
use monodr_core::hilbert::standard_basis_vector;
use monodr_core::operators::{
    check_firmly_nonexpansive, check_monotone, check_nonexpansive, GraphPoint, PropertyCheck, DEFAULT_SLACK,
};
use monodr_core::sampling::{Sampler, DEFAULT_SEED};
use monodr_core::splitting::{asymptotic_regularity_check, dr_iterate, DrProblem};
use monodr_core::{AffineSubspace, ConvexSet, Error, MonotoneOperator, OperatorMap, Vector};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn v(c: &[f64]) -> Vector {
    Vector::from(c.to_vec())
}

fn e(k: usize, d: usize) -> Vector {
    standard_basis_vector(k, d).unwrap()
}

fn zarantonello() -> Outcome {
    let r = zarantonello_run(1000, Some((0..=10).collect())).map_err(|e| e.to_string())?;
    let expected: f64 = "0.7071067811865476".parse().unwrap();
    let coord0 = &r.sequences["proj_coord0"];
    ensure(coord0.len() == 1000, "expected 1000 iterates")?;
    let worst = coord0.iter().map(|c| (c - expected).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-12, format!("coordinate 0 off by {worst:e}"))?;
    let lim = &r.vectors["proj_weak_limit"];
    let lim_err = lim.distance(&e(0, 1002).scaled(expected));
    ensure(lim_err <= 1e-12, format!("weak limit off by {lim_err:e}"))?;
    // the two nonzero coordinates of P z_n - e_0 are 1/sqrt2 - 1 and 1/sqrt2
    let hand = ((1.0 - expected).powi(2) + expected.powi(2)).sqrt();
    let dist = &r.sequences["proj_distance_to_p_e0"];
    let worst = dist.iter().map(|x| (x - hand).abs()).fold(0.0, f64::max);
    ensure(worst <= 1e-12, format!("distance off by {worst:e}"))?;
    ensure(format!("{hand}").starts_with("0.7653668647"), "distance constant")?;
    ensure(r.passed, format!("failed checks {:?}", r.failed_checks()))?;
    Ok(format!("P z_n[0] = {}, ||P z_n - P e_0|| = {}", coord0[0], dist[0]))
}

fn counterexample() -> Outcome {
    let r = remark14_run(1000, Some((0..=10).collect())).map_err(|e| e.to_string())?;
    let gap = r.scalars["gap"];
    let expected = 1.0 - FRAC_1_SQRT_2;
    ensure((gap - expected).abs() <= 1e-12, format!("gap {gap}"))?;
    ensure((gap - 0.2928932188134524).abs() <= 1e-12, format!("gap {gap}"))?;
    let refusal = r.refusals.get("classical").ok_or("classical certificate did not refuse")?;
    ensure(refusal.contains("z_n - T z_n -> x"), refusal.clone())?;
    ensure(r.passed, format!("failed checks {:?}", r.failed_checks()))?;
    Ok(format!("gap = {gap}; classical: {refusal}"))
}

fn firm_suite() -> Outcome {
    let mut s = Sampler::new(DEFAULT_SEED);
    let d = 3;
    let ops = catalog(&mut s, d);
    let pairs = s.pairs(10_000, d, 5.0);
    let mut worst = f64::NEG_INFINITY;
    let mut record = |name: String, c: PropertyCheck| -> Result<(), String> {
        worst = worst.max(c.worst_margin);
        ensure(c.passed && c.worst_margin <= 1e-9, format!("{name}: margin {:e}", c.worst_margin))
    };
    for a in &ops {
        record(a.kind().to_string(), check_firmly_nonexpansive(&OperatorMap::Resolvent(a.clone()), &pairs, DEFAULT_SLACK).unwrap())?;
    }
    for a in &ops {
        for b in &ops {
            let t = OperatorMap::DouglasRachford(a.clone(), b.clone());
            record(format!("T({}, {})", a.kind(), b.kind()), check_firmly_nonexpansive(&t, &pairs, DEFAULT_SLACK).unwrap())?;
        }
    }
    let control = check_firmly_nonexpansive(&OperatorMap::Scale(2.0), &pairs, DEFAULT_SLACK).unwrap();
    ensure(!control.passed, "x -> 2x passed")?;
    Ok(format!(
        "{} resolvents and {} DR maps on 10^4 pairs, worst margin {worst:e}; 2x rejected",
        ops.len(),
        ops.len() * ops.len()
    ))
}

fn equivalence() -> Outcome {
    let mut s = Sampler::new(DEFAULT_SEED ^ 4);
    let d = 3;
    let mut maps: Vec<OperatorMap> = catalog(&mut s, d).into_iter().map(OperatorMap::Resolvent).collect();
    maps.extend([OperatorMap::Scale(2.0), OperatorMap::Scale(-0.5), OperatorMap::Identity]);
    let mut both = [0usize; 2];
    for f in &maps {
        let r = match f {
            OperatorMap::Resolvent(a) => OperatorMap::Reflector(a.clone()),
            OperatorMap::Scale(c) => OperatorMap::Scale(2.0 * c - 1.0),
            _ => OperatorMap::Identity,
        };
        for pair in s.pairs(1000, d, 4.0) {
            let p = [pair];
            let firm = check_firmly_nonexpansive(f, &p, DEFAULT_SLACK).unwrap().passed;
            let ne = check_nonexpansive(&r, &p, DEFAULT_SLACK).unwrap().passed;
            ensure(firm == ne, format!("{f:?} disagrees at {:?}", p[0]))?;
            both[firm as usize] += 1;
        }
    }
    ensure(both[0] > 0 && both[1] > 0, "only one direction exercised")?;
    Ok(format!("{} pairs agree ({} both pass, {} both fail)", both[0] + both[1], both[1], both[0]))
}

fn minty() -> Outcome {
    let mut s = Sampler::new(DEFAULT_SEED ^ 5);
    let d = 3;
    let mut worst = f64::NEG_INFINITY;
    let ops = catalog(&mut s, d);
    for a in &ops {
        let samples: Vec<GraphPoint> = (0..1000).map(|_| a.minty_sample(&s.vector(d, 5.0)).unwrap()).collect();
        let c = check_monotone(&samples, DEFAULT_SLACK).unwrap();
        worst = worst.max(c.worst_margin);
        ensure(c.passed, format!("{}: margin {:e}", a.kind(), c.worst_margin))?;
    }
    Ok(format!("{} operators, worst -<dx,du> = {worst:e}", ops.len()))
}

fn dr_convergence() -> Outcome {
    let (s30, c30) = (30f64.to_radians().sin(), 30f64.to_radians().cos());
    let l1 = AffineSubspace::span(2, vec![v(&[1.0, 0.0])]).unwrap();
    let l2 = AffineSubspace::span(2, vec![v(&[c30, s30])]).unwrap();
    let a = MonotoneOperator::normal_cone(ConvexSet::affine(l1)).unwrap();
    let b = MonotoneOperator::normal_cone(ConvexSet::affine(l2)).unwrap();
    let p = DrProblem::new(a, b, v(&[5.0, 3.0])).unwrap().with_tol(1e-10).with_max_iter(500);
    let (trace, rep) = dr_iterate(&p).map_err(|e| e.to_string())?;
    ensure(rep.converged && rep.iterations <= 500, format!("{} iterations", rep.iterations))?;
    ensure(rep.shadow_limit.norm() <= 1e-8, format!("shadow {:?}", rep.shadow_limit))?;
    let reg = asymptotic_regularity_check(&trace, 1e-10).map_err(|e| e.to_string())?;
    ensure(reg.passed, format!("residual increase {:e}", reg.max_increase))?;
    ensure(trace.is_contiguous(), "trace not contiguous")?;
    Ok(format!(
        "{} iterations, |shadow| = {:e}, max residual increase {:e}",
        rep.iterations,
        rep.shadow_limit.norm(),
        reg.max_increase
    ))
}

fn svaiter() -> Outcome {
    let cfg = RunSettings::default();
    let ball = MonotoneOperator::normal_cone(ConvexSet::ball(Vector::zeros(2), 1.0).unwrap()).unwrap();
    let line = MonotoneOperator::normal_cone(ConvexSet::affine(
        AffineSubspace::new(v(&[0.5, 0.0]), vec![v(&[0.0, 1.0])]).unwrap(),
    ))
    .unwrap();
    let skew = MonotoneOperator::linear(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
    let quad = MonotoneOperator::quadratic(&[vec![1.0, 0.0], vec![0.0, 1.0]], Vector::zeros(2)).unwrap();
    let cases = [
        ("ball/line", ball, line, v(&[3.0, -2.0])),
        ("zero/zero", MonotoneOperator::Zero, MonotoneOperator::Zero, v(&[1.0, 2.0])),
        ("skew/quadratic", skew, quad, v(&[4.0, 1.0])),
    ];
    let mut notes = Vec::new();
    for (name, a, b, z0) in cases {
        let r = svaiter_shadow_run(a, b, z0.clone(), &cfg).map_err(|e| e.to_string())?;
        let cert = r.certificates.get("multi_firm").ok_or(format!("{name}: no certificate"))?;
        ensure(cert.passed(), format!("{name}: {:?}", cert.verdict))?;
        let tail = cert.hypothesis_residuals.iter().map(|h| h.tail).fold(0.0, f64::max);
        ensure(tail < 1e-6, format!("{name}: tail {tail:e}"))?;
        ensure(r.scalars["shadow_gap"] < 1e-8, format!("{name}: shadow gap"))?;
        ensure(r.scalars["identity_step_gap"] <= 1e-12, format!("{name}: identity gap {:e}", r.scalars["identity_step_gap"]))?;
        let x = &r.vectors["shadow_limit"];
        match name {
            "ball/line" => ensure((x[0] - 0.5).abs() < 1e-8 && x.norm() <= 1.0 + 1e-8, format!("{name}: {x:?}"))?,
            "zero/zero" => ensure(x == &z0, format!("{name}: {x:?}"))?,
            _ => ensure(x.norm() < 1e-8, format!("{name}: {x:?}"))?,
        }
        ensure(r.passed, format!("{name}: {:?}", r.failed_checks()))?;
        notes.push(format!("{name} tail {tail:.1e}"));
    }
    Ok(notes.join(", "))
}

fn consensus() -> Outcome {
    let boxes = [(0.0, 2.0), (1.0, 3.0), (1.5, 2.5)]
        .iter()
        .map(|&(lo, hi)| ConvexSet::boxed(v(&[lo]), v(&[hi])).unwrap())
        .collect();
    let r = feasibility_demo_run(boxes, v(&[-4.0]), &RunSettings::default()).map_err(|e| e.to_string())?;
    let x = r.vectors["point"][0];
    ensure((1.5 - 1e-8..=2.0 + 1e-8).contains(&x), format!("point {x}"))?;
    ensure(r.scalars["membership_gap_max"] < 1e-8, "membership gap")?;
    let cert = r.certificates.get("multi_nonexp").ok_or("no certificate")?;
    ensure(cert.passed(), format!("{:?}", cert.verdict))?;
    Ok(format!("point {x}, gap {:e}", r.scalars["membership_gap_max"]))
}

/// `(A, B)` with `zer(A + B)` nonempty by construction.
fn combination(s: &mut Sampler, i: usize) -> (MonotoneOperator, MonotoneOperator, Vector) {
    let d = 2 + s.index(2);
    let p = s.vector(d, 1.0);
    let sets = sets_through(s, &p);
    let mut cone = || MonotoneOperator::normal_cone(sets[s.index(sets.len())].clone()).unwrap();
    let (a, b) = match i % 5 {
        0 => (cone(), cone()),
        1 => (cone(), MonotoneOperator::quadratic(&random_psd(s, d, 1.0), s.vector(d, 1.0)).unwrap()),
        2 => (
            MonotoneOperator::abs_sum(s.uniform(0.1, 1.5)).unwrap(),
            MonotoneOperator::quadratic(&random_psd(s, d, 1.0), s.vector(d, 2.0)).unwrap(),
        ),
        3 => (
            MonotoneOperator::linear(&random_monotone_matrix(s, d)).unwrap(),
            MonotoneOperator::quadratic(&random_psd(s, d, 1.0), s.vector(d, 1.0)).unwrap(),
        ),
        _ => (MonotoneOperator::Zero, cone()),
    };
    let z0 = s.vector(d, 5.0);
    if i % 2 == 1 {
        (b, a, z0)
    } else {
        (a, b, z0)
    }
}

fn soundness() -> Outcome {
    let mut s = Sampler::new(DEFAULT_SEED);
    let tol = Tolerances::default();
    let mut converged = 0;
    for i in 0..20 {
        let (a, b, z0) = combination(&mut s, i);
        let label = format!("#{i} {}+{}", a.kind(), b.kind());
        let (trace, rep) = dr_iterate(&DrProblem::new(a.clone(), b.clone(), z0).unwrap()).map_err(|e| e.to_string())?;
        if !rep.converged {
            continue;
        }
        converged += 1;
        let d = rep.z_limit.dim();
        let zs = trace.governing();
        let t = OperatorMap::DouglasRachford(a.clone(), b.clone());
        let firm = firm_principle_certificate(
            &t,
            &zs,
            &AffineSubspace::full_space(d),
            &AffineSubspace::singleton(Vector::zeros(d)),
            &tol,
        )
        .map_err(|e| format!("{label}: {e}"))?;
        let g = GraphSequence::new(
            zs.iter().map(|z| a.minty_sample(z).unwrap()).collect(),
            Some(a.clone()),
        )
        .unwrap();
        let t22 = theorem22_certificate(
            &g,
            &AffineSubspace::full_space(d),
            &AffineSubspace::singleton(rep.witness_a.clone()),
            &tol,
        )
        .map_err(|e| format!("{label}: {e}"))?;
        for (name, c) in [("firm", &firm), ("theorem22", &t22)] {
            ensure(!c.is_defect(), format!("{label}: {name} conclusion fails under passing hypotheses"))?;
            ensure(c.passed(), format!("{label}: {name} {:?}", c.verdict))?;
        }
    }
    ensure(converged == 20, format!("only {converged}/20 runs converged"))?;
    Ok("20/20 runs converged; both certificates pass on each".to_string())
}

fn only_failure(name: &str, r: &CertificateReport, expected: &str) -> Result<(), String> {
    ensure(
        r.failed_hypotheses() == vec![expected] && r.verdict == Verdict::HypothesisFailed(expected.to_string()),
        format!("{name}: failed {:?}, verdict {:?}", r.failed_hypotheses(), r.verdict),
    )
}

fn negative_controls() -> Outcome {
    let n = 60;
    let d = n + 2;
    let zs = unit_vector_sequence(n).unwrap();
    let probes = Tolerances::default().with_probes((0..=10).collect());
    let ball = OperatorMap::Projector(ConvexSet::ball(Vector::zeros(d), 1.0).unwrap());
    let c = AffineSubspace::span(d, vec![e(0, d)]).unwrap();
    let dd = c.orthogonal_through(e(0, d).scaled(1.0 - FRAC_1_SQRT_2)).unwrap();
    let err = |e: Error| e.to_string();

    let g = GraphSequence::from_map(&ball, &zs).map_err(err)?;
    only_failure("theorem22", &theorem22_certificate(&g, &c, &dd, &probes).map_err(err)?, "x_n - P_C x_n -> 0")?;
    only_failure(
        "firm",
        &firm_principle_certificate(&ball, &zs, &c, &dd, &probes).map_err(err)?,
        "F z_n - P_C F z_n -> 0",
    )?;

    let const_e0 = vec![e(0, 2); 16];
    only_failure(
        "nonexp",
        &nonexp_principle_certificate(
            &OperatorMap::Identity,
            &const_e0,
            &AffineSubspace::full_space(2),
            &AffineSubspace::singleton(v(&[3.0, 0.0])),
            &Tolerances::default(),
        )
        .map_err(err)?,
        "z_n - T z_n - P_D z_n - P_D(-T z_n) -> 0",
    )?;

    // T is constant, so only z_n can fail to settle; the strong precondition
    // z_n - T z_n -> x keeps the oscillation below the tolerance
    let t_const = OperatorMap::custom("constant", |_: &Vector| Vector::from(vec![1.0, 1.0]));
    let loose = Tolerances { hyp_tol: 1e-2, ..Tolerances::default() };
    let osc: Vec<Vector> = (0..40).map(|k| v(&[2.0 + 0.008 * (-1f64).powi(k), 1.0])).collect();
    only_failure(
        "classical",
        &classical_certificate(&t_const, &osc, &v(&[1.0, 0.0]), &loose).map_err(err)?,
        "z_n ⇀ z",
    )?;

    let s2: Vec<Vector> = zs.iter().map(|z| z.scaled(FRAC_1_SQRT_2)).collect();
    only_failure(
        "multi_firm",
        &multi_firm_certificate(&[ball, OperatorMap::Identity], &[zs.clone(), s2], &probes).map_err(err)?,
        "sum_residual",
    )?;
    only_failure(
        "multi_nonexp",
        &multi_nonexp_certificate(
            &[OperatorMap::Identity, OperatorMap::Identity],
            &[vec![e(0, 2); 12], vec![e(0, 2).scaled(2.0); 12]],
            &Tolerances::default(),
        )
        .map_err(err)?,
        "pairwise_gap",
    )?;
    Ok("theorem22, firm, nonexp, classical, multi_firm, multi_nonexp each name their failing hypothesis".to_string())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("zarantonello reproduction", zarantonello),
        ("naive principle counterexample", counterexample),
        ("firm nonexpansiveness suite", firm_suite),
        ("firm / reflected equivalence", equivalence),
        ("minty monotonicity", minty),
        ("DR convergence on 30 degree lines", dr_convergence),
        ("shadow certification", svaiter),
        ("consensus of three boxes", consensus),
        ("certificate soundness", soundness),
        ("negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
