//! Model manifolds, embedded submanifolds, adapted frames, and the natural
//! measure on the unit conormal bundle SN*H.

mod cotangent;
mod frame;
mod model;
mod quadrature;
pub mod sphere_chart;
mod submanifold;

pub use cotangent::CotangentPoint;
pub use frame::{adapted_frame, AdaptedFrame};
pub use model::{ModelDescriptor, ModelKindTag, ModelManifold, SphereModel, TorusModel};
pub use quadrature::{
    snh_quadrature, vol_ball, vol_sphere, SNHQuadrature, SnhNode, MIN_NODES_PER_DIM,
};
pub use submanifold::{
    HKindTag, Submanifold, SubmanifoldDescriptor, CIRCLE_RADIUS_FRACTION, SPHERE_POLE_MARGIN,
};
