//! Sampled property checkers: firm nonexpansiveness, nonexpansiveness and
//! monotonicity.

use super::{GraphPoint, OperatorMap};
use crate::error::{check_dim, Error, Result};
use crate::hilbert::Vector;

/// Default slack for the checkers, absorbing rounding across norms.
pub const DEFAULT_SLACK: f64 = 1e-9;

/// Verdict of a sampled property check. `worst_margin` is the largest value
/// of `lhs - rhs` over the samples; the property holds on a pair when its
/// margin is at most the slack.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PropertyCheck {
    pub passed: bool,
    pub worst_margin: f64,
    pub worst_index: usize,
    pub samples: usize,
}

fn fold_margins(margins: impl Iterator<Item = Result<f64>>, slack: f64) -> Result<PropertyCheck> {
    let mut worst = (f64::NEG_INFINITY, 0usize);
    let mut count = 0;
    for (i, m) in margins.enumerate() {
        let m = m?;
        count += 1;
        // NaN counts as a violation
        if m.is_nan() || m > worst.0 {
            worst = (if m.is_nan() { f64::INFINITY } else { m }, i);
        }
    }
    if count == 0 {
        return Err(Error::EmptySequence);
    }
    Ok(PropertyCheck {
        passed: worst.0 <= slack,
        worst_margin: worst.0,
        worst_index: worst.1,
        samples: count,
    })
}

/// `||Fx - Fy||^2 + ||(x - Fx) - (y - Fy)||^2 <= ||x - y||^2 + slack` on every pair.
pub fn check_firmly_nonexpansive(f: &OperatorMap, pairs: &[(Vector, Vector)], slack: f64) -> Result<PropertyCheck> {
    let margins = pairs.iter().map(|(x, y)| {
        check_dim(x.dim(), y.dim())?;
        let fx = f.apply(x)?;
        let fy = f.apply(y)?;
        let d = x - y;
        let fd = &fx - &fy;
        let rd = &d - &fd;
        Ok(fd.norm_squared() + rd.norm_squared() - d.norm_squared())
    });
    fold_margins(margins, slack)
}

/// `||Tx - Ty|| <= ||x - y|| + slack` on every pair.
pub fn check_nonexpansive(t: &OperatorMap, pairs: &[(Vector, Vector)], slack: f64) -> Result<PropertyCheck> {
    let margins = pairs.iter().map(|(x, y)| {
        check_dim(x.dim(), y.dim())?;
        let tx = t.apply(x)?;
        let ty = t.apply(y)?;
        Ok(tx.distance(&ty) - x.distance(y))
    });
    fold_margins(margins, slack)
}

/// `<x - y, u - v> >= -slack` over all pairs of graph samples. The margin
/// reported is `-<x - y, u - v>`.
pub fn check_monotone(samples: &[GraphPoint], slack: f64) -> Result<PropertyCheck> {
    if samples.len() < 2 {
        return Err(Error::EmptySequence);
    }
    let d = samples[0].point.dim();
    for s in samples {
        check_dim(d, s.point.dim())?;
        check_dim(d, s.value.dim())?;
    }
    let margins = samples.iter().enumerate().flat_map(|(i, a)| {
        samples[i + 1..].iter().map(move |b| {
            let dx = &a.point - &b.point;
            let du = &a.value - &b.value;
            Ok(-dx.dot(&du))
        })
    });
    fold_margins(margins, slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{ConvexSet, MonotoneOperator};
    use crate::sampling::Sampler;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn projector_and_complement_are_firm() {
        let mut s = Sampler::new(7);
        let pairs = s.pairs(2000, 4, 3.0);
        let ball = ConvexSet::ball(Vector::zeros(4), 1.0).unwrap();
        let p = check_firmly_nonexpansive(&OperatorMap::Projector(ball.clone()), &pairs, DEFAULT_SLACK).unwrap();
        assert!(p.passed, "{p:?}");
        let q = check_firmly_nonexpansive(&OperatorMap::ComplementProjector(ball), &pairs, DEFAULT_SLACK).unwrap();
        assert!(q.passed, "{q:?}");
    }

    #[test]
    fn doubling_fails_both_checks() {
        let mut s = Sampler::new(8);
        let pairs = s.pairs(50, 3, 1.0);
        let f = check_firmly_nonexpansive(&OperatorMap::Scale(2.0), &pairs, DEFAULT_SLACK).unwrap();
        assert!(!f.passed && f.worst_margin > 0.0);
        let n = check_nonexpansive(&OperatorMap::Scale(2.0), &pairs, DEFAULT_SLACK).unwrap();
        assert!(!n.passed && n.worst_margin > 0.0);
        assert!(check_nonexpansive(&OperatorMap::Identity, &pairs, DEFAULT_SLACK).unwrap().passed);
    }

    #[test]
    fn monotone_examples() {
        let mut s = Sampler::new(9);
        let skew = MonotoneOperator::linear(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let pts: Vec<GraphPoint> = (0..40)
            .map(|_| skew.graph_point(&s.vector(2, 5.0)).unwrap().unwrap())
            .collect();
        let c = check_monotone(&pts, DEFAULT_SLACK).unwrap();
        assert!(c.passed);
        assert_eq!(c.worst_margin, 0.0);

        let zero: Vec<GraphPoint> = (0..10).map(|_| MonotoneOperator::Zero.minty_sample(&s.vector(3, 1.0)).unwrap()).collect();
        assert!(check_monotone(&zero, DEFAULT_SLACK).unwrap().passed);

        let neg: Vec<GraphPoint> = (0..10)
            .map(|_| {
                let x = s.vector(3, 1.0);
                GraphPoint { value: x.scaled(-1.0), point: x }
            })
            .collect();
        assert!(!check_monotone(&neg, DEFAULT_SLACK).unwrap().passed);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert_eq!(check_firmly_nonexpansive(&OperatorMap::Identity, &[], 0.0), Err(Error::EmptySequence));
        assert_eq!(check_monotone(&[], 0.0), Err(Error::EmptySequence));
    }
}
