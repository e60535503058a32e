#![allow(dead_code)]

use monodr_core::sampling::Sampler;
use monodr_core::{AffineSubspace, ConvexSet, MonotoneOperator, Vector};

/// `G G^T` for a random `G`, optionally shifted by `shift * I`.
pub fn random_psd(s: &mut Sampler, d: usize, shift: f64) -> Vec<Vec<f64>> {
    let g: Vec<Vector> = (0..d).map(|_| s.vector(d, 1.0)).collect();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let v: f64 = (0..d).map(|k| g[i][k] * g[j][k]).sum();
                    if i == j {
                        v + shift
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect()
}

/// Positive semidefinite part plus a skew part.
pub fn random_monotone_matrix(s: &mut Sampler, d: usize) -> Vec<Vec<f64>> {
    let mut m = random_psd(s, d, 0.0);
    for i in 0..d {
        for j in 0..i {
            let w = s.uniform(-1.0, 1.0);
            m[i][j] += w;
            m[j][i] -= w;
        }
    }
    m
}

pub fn unit(s: &mut Sampler, d: usize) -> Vector {
    loop {
        let v = s.vector(d, 1.0);
        let n = v.norm();
        if n > 0.1 {
            return v.scaled(1.0 / n);
        }
    }
}

/// One set of each kind, all containing `p`.
pub fn sets_through(s: &mut Sampler, p: &Vector) -> Vec<ConvexSet> {
    let d = p.dim();
    let mut center = p.clone();
    center.axpy(1.0, &s.vector(d, 0.5));
    let radius = center.distance(p) + s.uniform(0.2, 1.5);
    let lower = p - &Vector::from(vec![s.uniform(0.1, 1.0); d]);
    let upper = p + &Vector::from(vec![s.uniform(0.1, 1.0); d]);
    let dir = unit(s, d);
    let normal = unit(s, d);
    let offset = normal.dot(p) + s.uniform(0.0, 1.0);
    vec![
        ConvexSet::ball(center, radius).unwrap(),
        ConvexSet::boxed(lower, upper).unwrap(),
        ConvexSet::affine(AffineSubspace::new(p.clone(), vec![dir]).unwrap()),
        ConvexSet::halfspace(normal, offset).unwrap(),
    ]
}

/// Every catalog variant in dimension `d`, with seeded payloads.
pub fn catalog(s: &mut Sampler, d: usize) -> Vec<MonotoneOperator> {
    let p = s.vector(d, 1.0);
    let mut ops = vec![
        MonotoneOperator::Zero,
        MonotoneOperator::linear(&random_monotone_matrix(s, d)).unwrap(),
        MonotoneOperator::abs_sum(s.uniform(0.1, 2.0)).unwrap(),
        MonotoneOperator::quadratic(&random_psd(s, d, 0.0), s.vector(d, 1.0)).unwrap(),
    ];
    for set in sets_through(s, &p) {
        ops.push(MonotoneOperator::normal_cone(set).unwrap());
    }
    ops
}
