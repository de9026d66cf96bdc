//! Cone-type systems, part graphs and finite unfoldings of the decomposition tree.

mod part;
mod system;
mod unfold;

pub use part::{EdgeRef, PartGraph, Side, VirtualEdge};
pub use system::{
    validate_system, ChildFile, ChildSlot, ConeType, ConeTypeSystem, EdgeFile, EdgeSpec,
    LocalVertex, RootFile, SystemFile, TypeFile, TypeId, ValidationReport,
};
pub use unfold::{
    extract_ball, extract_ball_with_step, unfold, Arc, EdgeId, FiniteGraph, GluedEdge, NodeId,
    NodePath, TreeNode, UnfoldedDecomposition, VertexId,
};
