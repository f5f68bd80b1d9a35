//! Time-slab flagging and element-topology classes.

use std::collections::HashMap;

use super::{SpaceTimeMesh, TopoFlag};

fn quantize(v: f64) -> i64 {
    (v * 1e9).round() as i64
}

/// One time-like facet on a side, in coordinates normalized to the element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SideFacetKey {
    pub t0: i64,
    pub t1: i64,
    pub degree: u32,
    /// `h_Fx / h_Kx`, quantized.
    pub h_ratio: i64,
}

/// Dilation and translation invariant description of a leaf element.
///
/// Elements with equal signatures have identical local matrices after
/// normalization to the unit square. Normalized coordinates are stored as
/// integers in units of `1e-9`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TopoSignature {
    pub degree: u32,
    pub left: Vec<SideFacetKey>,
    pub right: Vec<SideFacetKey>,
    pub bottom: Vec<(i64, i64)>,
}

pub(super) fn compute_slabs(mesh: &mut SpaceTimeMesh) {
    let tol = mesh.tol_t();
    let mut cuts: Vec<f64> = mesh
        .leaf_elements()
        .flat_map(|e| [e.t_iv.lo, e.t_iv.hi])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|b, a| (*b - *a).abs() <= tol);

    // straddle[i] > 0 iff some element has cuts[i] in its interior.
    let mut diff = vec![0i64; cuts.len() + 1];
    for e in mesh.leaf_elements() {
        let i0 = cuts.partition_point(|&c| c <= e.t_iv.lo + tol);
        let i1 = cuts.partition_point(|&c| c < e.t_iv.hi - tol);
        if i0 < i1 {
            diff[i0] += 1;
            diff[i1] -= 1;
        }
    }
    let mut kept = Vec::new();
    let mut run = 0;
    for (i, &c) in cuts.iter().enumerate() {
        run += diff[i];
        if run == 0 {
            kept.push(c);
        }
    }
    let slab_count = kept.len() - 1;
    for i in 0..mesh.leaves.len() {
        let id = mesh.leaves[i];
        let lo = mesh.elements[id.0].t_iv.lo;
        let s = kept.partition_point(|&c| c <= lo + tol) - 1;
        mesh.elements[id.0].slab = s.min(slab_count - 1);
    }
    mesh.slab_count = slab_count;
}

pub(super) fn signature(mesh: &SpaceTimeMesh, e: &super::Element) -> TopoSignature {
    let adj = &mesh.adjacency[e.id.0];
    let side = |ids: &[usize]| -> Vec<SideFacetKey> {
        ids.iter()
            .map(|&f| {
                let f = &mesh.time_facets[f];
                SideFacetKey {
                    t0: quantize((f.t_iv.lo - e.t_iv.lo) / e.h_t()),
                    t1: quantize((f.t_iv.hi - e.t_iv.lo) / e.h_t()),
                    degree: f.moment_degree,
                    h_ratio: quantize(f.h_fx / e.h_x()),
                }
            })
            .collect()
    };
    TopoSignature {
        degree: e.degree,
        left: side(&adj.left),
        right: side(&adj.right),
        bottom: adj
            .bottom
            .iter()
            .map(|&f| {
                let f = &mesh.space_facets[f];
                (
                    quantize((f.x_iv.lo - e.x_iv.lo) / e.h_x()),
                    quantize((f.x_iv.hi - e.x_iv.lo) / e.h_x()),
                )
            })
            .collect(),
    }
}

/// Flags are numbered in order of first appearance among the leaves.
pub(super) fn compute_topo_flags(mesh: &mut SpaceTimeMesh) {
    let mut table: HashMap<TopoSignature, usize> = HashMap::new();
    let mut classes = Vec::new();
    for i in 0..mesh.leaves.len() {
        let id = mesh.leaves[i];
        let sig = signature(mesh, &mesh.elements[id.0]);
        let next = classes.len();
        let flag = *table.entry(sig.clone()).or_insert_with(|| {
            classes.push(sig);
            next
        });
        mesh.elements[id.0].topo_flag = TopoFlag(flag);
    }
    mesh.topo_classes = classes;
}
