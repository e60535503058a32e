mod common;

use common::{catalog, sets_through};
use monodr_core::demiclosedness::{
    firm_principle_certificate, nonexp_principle_certificate, nonexp_residuals, theorem22_certificate, GraphSequence,
    Tolerances,
};
use monodr_core::hilbert::{product_project, ProductProjection};
use monodr_core::operators::{
    check_firmly_nonexpansive, check_monotone, check_nonexpansive, soft_threshold, DEFAULT_SLACK,
};
use monodr_core::sampling::Sampler;
use monodr_core::splitting::{consensus_lift, dr_iterate, dr_map, dr_map_reflected, DrProblem};
use monodr_core::{AffineSubspace, MonotoneOperator, OperatorMap, ProductPoint, Vector};
use proptest::prelude::*;

fn subspace(s: &mut Sampler, d: usize, k: usize) -> AffineSubspace {
    let vecs = (0..k).map(|_| s.vector(d, 1.0)).collect();
    AffineSubspace::new(s.vector(d, 2.0), vecs).unwrap()
}

fn point_of(c: &AffineSubspace, s: &mut Sampler) -> Vector {
    let mut p = c.anchor().clone();
    for b in c.basis() {
        p.axpy(s.uniform(-5.0, 5.0), b);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn affine_projection_is_nearest(seed in any::<u64>(), d in 1usize..6, k in 0usize..6) {
        let mut s = Sampler::new(seed);
        let c = subspace(&mut s, d, k.min(d));
        let z = s.vector(d, 4.0);
        let pz = c.project_unchecked(&z);
        let best = z.distance(&pz);
        for _ in 0..100 {
            let q = point_of(&c, &mut s);
            prop_assert!(best <= z.distance(&q) + 1e-10);
        }
    }

    #[test]
    fn affine_projection_is_affine(seed in any::<u64>(), d in 1usize..6, k in 0usize..6) {
        let mut s = Sampler::new(seed);
        let c = subspace(&mut s, d, k.min(d));
        let a = s.vector(d, 3.0);
        let b = s.vector(d, 3.0);
        let lhs = c.project_unchecked(&a.lincomb(0.5, &b, 0.5));
        let rhs = c.project_unchecked(&a).lincomb(0.5, &c.project_unchecked(&b), 0.5);
        prop_assert!(lhs.distance(&rhs) < 1e-10);
    }

    #[test]
    fn pythagoras(seed in any::<u64>(), d in 1usize..7, k in 0usize..7) {
        let mut s = Sampler::new(seed);
        let vecs = (0..k.min(d)).map(|_| s.vector(d, 1.0)).collect();
        let v = AffineSubspace::span(d, vecs).unwrap();
        let w = v.orthogonal_through(Vector::zeros(d)).unwrap();
        let z = s.vector(d, 3.0);
        let total = v.project_unchecked(&z).norm_squared() + w.project_unchecked(&z).norm_squared();
        prop_assert!((z.norm_squared() - total).abs() < 1e-10);
    }

    #[test]
    fn product_projectors(seed in any::<u64>(), m in 2usize..5, d in 1usize..4) {
        let mut s = Sampler::new(seed);
        let p = ProductPoint::new((0..m).map(|_| s.vector(d, 2.0)).collect()).unwrap();
        let dg = product_project(ProductProjection::Diagonal, &p);
        let an = product_project(ProductProjection::Antidiagonal, &p);
        let dd = product_project(ProductProjection::Diagonal, &dg);
        let aa = product_project(ProductProjection::Antidiagonal, &an);
        let da = product_project(ProductProjection::Diagonal, &an);
        let ad = product_project(ProductProjection::Antidiagonal, &dg);
        prop_assert!(dd.flatten().distance(&dg.flatten()) < 1e-12);
        prop_assert!(aa.flatten().distance(&an.flatten()) < 1e-12);
        prop_assert!(da.norm() < 1e-12 && ad.norm() < 1e-12);
    }

    #[test]
    fn firm_iff_reflection_nonexpansive(seed in any::<u64>(), c in -1.0f64..2.0) {
        let mut s = Sampler::new(seed);
        let d = 3;
        let pairs = s.pairs(50, d, 3.0);
        let mut maps: Vec<(OperatorMap, OperatorMap)> = catalog(&mut s, d)
            .into_iter()
            .map(|a| (OperatorMap::Resolvent(a.clone()), OperatorMap::Reflector(a)))
            .collect();
        maps.push((OperatorMap::Scale(c), OperatorMap::Scale(2.0 * c - 1.0)));
        for (f, r) in &maps {
            let firm = check_firmly_nonexpansive(f, &pairs, DEFAULT_SLACK).unwrap();
            let ne = check_nonexpansive(r, &pairs, DEFAULT_SLACK).unwrap();
            prop_assert_eq!(firm.passed, ne.passed, "{:?}", f);
        }
    }

    #[test]
    fn scaled_resolvent_lands_on_the_graph(seed in any::<u64>(), gamma in 0.1f64..5.0) {
        let mut s = Sampler::new(seed);
        let d = 3;
        for a in catalog(&mut s, d) {
            let x = s.vector(d, 4.0);
            let p = a.resolvent_scaled(&x, gamma).unwrap();
            let u = (&x - &p).scaled(1.0 / gamma);
            prop_assert!(a.graph_gap(&p, &u).unwrap() < 1e-10 * (1.0 + x.norm()), "{}", a.kind());
            if let Some(g) = a.graph_point(&p).unwrap() {
                let back = p.lincomb(1.0, &g.value, gamma);
                prop_assert!(back.distance(&x) < 1e-10 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn soft_threshold_matches_brute_force(seed in any::<u64>(), three in any::<bool>()) {
        let mut s = Sampler::new(seed);
        let d = if three { 3 } else { 1 };
        let x = s.vector(d, 3.0);
        let level = s.uniform(0.0, 2.0);
        let got = soft_threshold(&x, level);
        // separable objective: minimize each coordinate on a grid
        let h = 1e-4;
        for k in 0..d {
            let xk = x[k];
            let obj = |t: f64| 0.5 * (t - xk) * (t - xk) + level * t.abs();
            let steps = ((2.0 * xk.abs() + 2.0) / h) as i64;
            let lo = -xk.abs() - 1.0;
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..=steps {
                let t = lo + i as f64 * h;
                let v = obj(t);
                if v < best.0 {
                    best = (v, t);
                }
            }
            prop_assert!((got[k] - best.1).abs() <= h);
        }
        let a = MonotoneOperator::abs_sum(level.max(1e-3)).unwrap();
        let j = a.resolvent(&x).unwrap();
        prop_assert_eq!(j, soft_threshold(&x, level.max(1e-3)));
    }

    #[test]
    fn minty_samples_are_monotone(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let d = 3;
        for a in catalog(&mut s, d) {
            let samples: Vec<_> = (0..60).map(|_| a.minty_sample(&s.vector(d, 4.0)).unwrap()).collect();
            prop_assert!(check_monotone(&samples, DEFAULT_SLACK).unwrap().passed, "{}", a.kind());
        }
    }

    #[test]
    fn dr_operator_is_firm_and_forms_agree(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let d = 3;
        let ops = catalog(&mut s, d);
        let pairs = s.pairs(20, d, 3.0);
        for a in &ops {
            for b in &ops {
                let t = OperatorMap::DouglasRachford(a.clone(), b.clone());
                prop_assert!(check_firmly_nonexpansive(&t, &pairs, DEFAULT_SLACK).unwrap().passed);
                let z = s.vector(d, 3.0);
                let u = dr_map(a, b, &z).unwrap();
                let v = dr_map_reflected(a, b, &z).unwrap();
                prop_assert!(u.distance(&v) < 1e-12 * (1.0 + z.norm()));
            }
        }
    }

    #[test]
    fn zero_witnesses_match_the_step(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let d = 3;
        let p = s.vector(d, 1.0);
        let sets = sets_through(&mut s, &p);
        let a = MonotoneOperator::normal_cone(sets[s.index(4)].clone()).unwrap();
        let b = MonotoneOperator::normal_cone(sets[s.index(4)].clone()).unwrap();
        let problem = DrProblem::new(a.clone(), b.clone(), s.vector(d, 5.0)).unwrap().with_max_iter(2000);
        let (_, rep) = dr_iterate(&problem).unwrap();
        let z = &rep.z_limit;
        let step = z - &dr_map(&a, &b, z).unwrap();
        let sum = &rep.witness_a + &rep.witness_b;
        prop_assert!(sum.distance(&step) < 1e-12 * (1.0 + z.norm()));
        let jb = b.resolvent(&a.reflected_resolvent(z).unwrap()).unwrap();
        prop_assert!(sum.distance(&(&rep.shadow_limit - &jb)) < 1e-12 * (1.0 + z.norm()));
    }

    #[test]
    fn consensus_diagonal_is_the_product_projector(seed in any::<u64>(), m in 2usize..5, d in 1usize..4) {
        let mut s = Sampler::new(seed);
        let ops = vec![MonotoneOperator::Zero; m];
        let lifted = consensus_lift(ops, &Vector::zeros(d)).unwrap();
        let flat = s.vector(m * d, 3.0);
        let via_op = lifted.problem.b.resolvent(&flat).unwrap();
        let via_product = product_project(ProductProjection::Diagonal, &ProductPoint::from_flat(&flat, m).unwrap()).flatten();
        prop_assert_eq!(via_op, via_product);
    }

    #[test]
    fn nonexp_reduces_to_firm(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let d = 3;
        let ops = catalog(&mut s, d);
        let t = OperatorMap::Reflector(ops[s.index(ops.len())].clone());
        let f = OperatorMap::averaged(t.clone());
        let c = AffineSubspace::new(s.vector(d, 1.0), vec![s.vector(d, 1.0)]).unwrap();
        let dd = c.orthogonal_through(s.vector(d, 1.0)).unwrap();
        let base = s.vector(d, 2.0);
        // constant data: every weak-limit hypothesis holds exactly
        let zs = vec![base; 12];
        for z in &zs {
            let tz = t.apply(z).unwrap();
            let fz = f.apply(z).unwrap();
            let (rc, rd) = nonexp_residuals(z, &tz, &c, &dd);
            let r = z - &fz;
            prop_assert!(rc.distance(&(&fz - &c.project_unchecked(&fz)).scaled(2.0)) < 1e-12);
            prop_assert!(rd.distance(&(&r - &dd.project_unchecked(&r)).scaled(2.0)) < 1e-12);
        }
        let tol = Tolerances::default();
        let ne = nonexp_principle_certificate(&t, &zs, &c, &dd, &tol).unwrap();
        let red: &monodr_core::demiclosedness::CertificateReport = ne.reduction.as_ref().unwrap();
        prop_assert_eq!(red, &firm_principle_certificate(&f, &zs, &c, &dd, &tol).unwrap());
        // residual tails differ by exactly the factor 2 of the reduction
        for (h_ne, h_f) in ne.hypothesis_residuals[2..].iter().zip(&red.hypothesis_residuals[2..]) {
            prop_assert!((h_ne.tail - 2.0 * h_f.tail).abs() < 1e-12);
        }
        if ne.hypothesis_residuals.iter().all(|h| h.tail < 0.5 * tol.hyp_tol || h.tail > 2.0 * tol.hyp_tol) {
            prop_assert_eq!(ne.passed(), red.passed());
        }
    }

    #[test]
    fn passing_theorem22_has_small_inner_product_gap(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let d = 3;
        let ops = catalog(&mut s, d);
        let a = ops[s.index(ops.len())].clone();
        let target = s.vector(d, 2.0);
        let zs: Vec<Vector> = (0..60)
            .map(|n| {
                let mut z = target.clone();
                z.axpy(0.5f64.powi(n), &s.vector(d, 1.0));
                z
            })
            .collect();
        let g = GraphSequence::new(zs.iter().map(|z| a.minty_sample(z).unwrap()).collect(), Some(a.clone())).unwrap();
        let u_star = &target - &a.resolvent(&target).unwrap();
        let rep = theorem22_certificate(
            &g,
            &AffineSubspace::full_space(d),
            &AffineSubspace::singleton(u_star),
            &Tolerances::default(),
        )
        .unwrap();
        prop_assert!(!rep.is_defect());
        if rep.passed() {
            let gap = rep.conclusions.iter().find(|c| c.name == "<x_n, u_n> -> <x, u>").unwrap().gap;
            prop_assert!(gap < rep.concl_tol);
        }
    }
}
