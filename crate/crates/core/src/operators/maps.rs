use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

use super::{ConvexSet, MonotoneOperator};
use crate::error::Result;
use crate::hilbert::Vector;
use crate::splitting::dr_map;

/// A single-valued map `X -> X`, the `T` / `F` argument of the property
/// checkers and the certificates.
#[derive(Clone)]
pub enum OperatorMap {
    Identity,
    /// `x -> factor * x`
    Scale(f64),
    /// `J_A`
    Resolvent(MonotoneOperator),
    /// `R_A = 2 J_A - Id`
    Reflector(MonotoneOperator),
    /// `P_S`
    Projector(ConvexSet),
    /// `Id - P_S`
    ComplementProjector(ConvexSet),
    /// Douglas-Rachford operator of the pair `(A, B)`.
    DouglasRachford(MonotoneOperator, MonotoneOperator),
    /// `1/2 Id + 1/2 T`
    Averaged(Box<OperatorMap>),
    Custom {
        name: String,
        map: Arc<dyn Fn(&Vector) -> Vector + Send + Sync>,
    },
}

impl OperatorMap {
    pub fn averaged(inner: OperatorMap) -> Self {
        OperatorMap::Averaged(Box::new(inner))
    }

    pub fn custom(name: impl Into<String>, map: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        OperatorMap::Custom {
            name: name.into(),
            map: Arc::new(map),
        }
    }

    pub fn kind(&self) -> &str {
        match self {
            OperatorMap::Identity => "identity",
            OperatorMap::Scale(_) => "scale",
            OperatorMap::Resolvent(_) => "resolvent",
            OperatorMap::Reflector(_) => "reflected_resolvent",
            OperatorMap::Projector(_) => "projector",
            OperatorMap::ComplementProjector(_) => "complement_projector",
            OperatorMap::DouglasRachford(..) => "douglas_rachford",
            OperatorMap::Averaged(_) => "averaged",
            OperatorMap::Custom { name, .. } => name,
        }
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        match self {
            OperatorMap::Identity => Ok(x.clone()),
            OperatorMap::Scale(c) => Ok(x.scaled(*c)),
            OperatorMap::Resolvent(a) => a.resolvent(x),
            OperatorMap::Reflector(a) => a.reflected_resolvent(x),
            OperatorMap::Projector(s) => s.project(x),
            OperatorMap::ComplementProjector(s) => Ok(x - &s.project(x)?),
            OperatorMap::DouglasRachford(a, b) => dr_map(a, b, x),
            OperatorMap::Averaged(t) => Ok(x.lincomb(0.5, &t.apply(x)?, 0.5)),
            OperatorMap::Custom { map, .. } => Ok(map(x)),
        }
    }
}

impl fmt::Debug for OperatorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorMap::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish_non_exhaustive(),
            OperatorMap::Identity => f.write_str("Identity"),
            OperatorMap::Scale(c) => f.debug_tuple("Scale").field(c).finish(),
            OperatorMap::Resolvent(a) => f.debug_tuple("Resolvent").field(a).finish(),
            OperatorMap::Reflector(a) => f.debug_tuple("Reflector").field(a).finish(),
            OperatorMap::Projector(s) => f.debug_tuple("Projector").field(s).finish(),
            OperatorMap::ComplementProjector(s) => f.debug_tuple("ComplementProjector").field(s).finish(),
            OperatorMap::DouglasRachford(a, b) => f.debug_tuple("DouglasRachford").field(a).field(b).finish(),
            OperatorMap::Averaged(t) => f.debug_tuple("Averaged").field(t).finish(),
        }
    }
}
