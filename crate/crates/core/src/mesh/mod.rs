//! Prismatic space-time meshes in 1+1 dimensions.
//!
//! Elements are rectangles `x_iv x t_iv`. Refinement splits an element into
//! four siblings without touching its neighbours, so sides may be covered by
//! several facets (hanging nodes). All facet data, time slabs and topology
//! flags are recomputed from the leaf elements after every change.

mod facets;
mod generators;
mod io;
mod topology;

use std::collections::BTreeSet;

use crate::error::{Result, StvemError};
use crate::polybasis::Interval;

pub use generators::{cartesian_mesh, graded_mesh_t, graded_mesh_xt, tensor_mesh};
pub use io::{parse_mesh, write_mesh, MeshDump};
pub use topology::{SideFacetKey, TopoSignature};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId(pub usize);

/// Equivalence class of elements that coincide up to per-axis dilation and
/// translation, including their degree data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopoFlag(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub id: ElementId,
    pub x_iv: Interval,
    pub t_iv: Interval,
    pub degree: u32,
    pub topo_flag: TopoFlag,
    pub slab: usize,
    pub children: Option<[ElementId; 4]>,
    pub parent: Option<ElementId>,
}

impl Element {
    #[inline]
    pub fn h_x(&self) -> f64 {
        self.x_iv.len()
    }

    #[inline]
    pub fn h_t(&self) -> f64 {
        self.t_iv.len()
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.h_x() * self.h_t()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// A facet `{x_pos} x t_iv`. Its normal points in the `+x` direction, from
/// `left_elem` into `right_elem`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeLikeFacet {
    pub id: usize,
    pub x_pos: f64,
    pub t_iv: Interval,
    pub left_elem: Option<ElementId>,
    pub right_elem: Option<ElementId>,
    pub moment_degree: u32,
    pub h_fx: f64,
}

impl TimeLikeFacet {
    pub fn is_boundary(&self) -> bool {
        self.left_elem.is_none() || self.right_elem.is_none()
    }

    /// The element owning a boundary facet, or the left neighbour otherwise.
    pub fn owner(&self) -> ElementId {
        self.left_elem
            .or(self.right_elem)
            .expect("facet without neighbours")
    }

    /// Outward normal of `elem` on this facet.
    pub fn normal_sign(&self, elem: ElementId) -> f64 {
        if self.left_elem == Some(elem) {
            1.0
        } else {
            -1.0
        }
    }
}

/// A facet `x_iv x {t_pos}` lying on the bottom of `above_elem`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceLikeFacet {
    pub id: usize,
    pub t_pos: f64,
    pub x_iv: Interval,
    pub below_elem: Option<ElementId>,
    pub above_elem: ElementId,
    pub moment_degree: u32,
}

/// Facets touching a leaf element, each list sorted along its side.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ElementFacets {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub bottom: Vec<usize>,
    pub top: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SpaceTimeMesh {
    omega: Interval,
    t_final: f64,
    elements: Vec<Element>,
    leaves: Vec<ElementId>,
    time_facets: Vec<TimeLikeFacet>,
    space_facets: Vec<SpaceLikeFacet>,
    adjacency: Vec<ElementFacets>,
    slab_count: usize,
    topo_classes: Vec<TopoSignature>,
}

/// Relative tolerance for coordinate matching.
pub(crate) const MATCH_TOL: f64 = 1e-12;

impl SpaceTimeMesh {
    /// Builds a mesh whose root elements are the given rectangles.
    ///
    /// The rectangles must tile `omega x (0, t_final)`.
    pub fn from_rectangles(
        omega: Interval,
        t_final: f64,
        rects: impl IntoIterator<Item = (Interval, Interval, u32)>,
    ) -> Result<Self> {
        let t_dom = Interval::new(0.0, t_final)?;
        let tol_x = MATCH_TOL * omega.len();
        let tol_t = MATCH_TOL * t_final;
        let mut elements = Vec::new();
        let mut area = 0.0;
        for (i, (x_iv, t_iv, degree)) in rects.into_iter().enumerate() {
            if degree == 0 {
                return Err(StvemError::InvalidDegree(0));
            }
            if x_iv.lo < omega.lo - tol_x
                || x_iv.hi > omega.hi + tol_x
                || t_iv.lo < t_dom.lo - tol_t
                || t_iv.hi > t_dom.hi + tol_t
            {
                return Err(StvemError::InvalidMesh(format!(
                    "element {i} lies outside the space-time domain"
                )));
            }
            area += x_iv.len() * t_iv.len();
            elements.push(Element {
                id: ElementId(i),
                x_iv,
                t_iv,
                degree,
                topo_flag: TopoFlag(0),
                slab: 0,
                children: None,
                parent: None,
            });
        }
        if elements.is_empty() {
            return Err(StvemError::InvalidMesh("no elements".into()));
        }
        let total = omega.len() * t_final;
        if ((area - total) / total).abs() > 1e-10 {
            return Err(StvemError::InvalidMesh(format!(
                "elements cover area {area}, domain has {total}"
            )));
        }
        let leaves = elements.iter().map(|e| e.id).collect();
        let mut mesh = Self {
            omega,
            t_final,
            elements,
            leaves,
            time_facets: Vec::new(),
            space_facets: Vec::new(),
            adjacency: Vec::new(),
            slab_count: 0,
            topo_classes: Vec::new(),
        };
        mesh.rebuild()?;
        Ok(mesh)
    }

    pub fn omega(&self) -> Interval {
        self.omega
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Leaf elements in their deterministic mesh order.
    pub fn leaves(&self) -> &[ElementId] {
        &self.leaves
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn element(&self, id: ElementId) -> &Element {
        &self.elements[id.0]
    }

    /// Every element ever created, including refined parents.
    pub fn all_elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn leaf_elements(&self) -> impl Iterator<Item = &Element> + '_ {
        self.leaves.iter().map(|&id| &self.elements[id.0])
    }

    pub fn time_facets(&self) -> &[TimeLikeFacet] {
        &self.time_facets
    }

    pub fn space_facets(&self) -> &[SpaceLikeFacet] {
        &self.space_facets
    }

    pub fn facets_of(&self, id: ElementId) -> &ElementFacets {
        &self.adjacency[id.0]
    }

    pub fn slab_count(&self) -> usize {
        self.slab_count
    }

    pub fn class_count(&self) -> usize {
        self.topo_classes.len()
    }

    pub fn topo_signature(&self, flag: TopoFlag) -> &TopoSignature {
        &self.topo_classes[flag.0]
    }

    pub fn max_degree(&self) -> u32 {
        self.leaf_elements().map(|e| e.degree).max().unwrap_or(0)
    }

    /// Leaf ids grouped by time slab, each group in mesh order.
    pub fn slab_members(&self) -> Vec<Vec<ElementId>> {
        let mut out = vec![Vec::new(); self.slab_count];
        for e in self.leaf_elements() {
            out[e.slab].push(e.id);
        }
        out
    }

    /// Distinct mesh vertices: element corners and hanging nodes.
    pub fn vertices(&self) -> BTreeSet<(u64, u64)> {
        let mut set = BTreeSet::new();
        let mut add = |x: f64, t: f64| {
            set.insert((x.to_bits(), t.to_bits()));
        };
        for f in &self.time_facets {
            add(f.x_pos, f.t_iv.lo);
            add(f.x_pos, f.t_iv.hi);
        }
        for f in &self.space_facets {
            add(f.x_iv.lo, f.t_pos);
            add(f.x_iv.hi, f.t_pos);
        }
        set
    }

    /// Sets the degree of every leaf, then recomputes facet degrees and flags.
    pub fn set_degrees(&mut self, degree_of: impl Fn(&Element) -> u32) -> Result<()> {
        for i in 0..self.leaves.len() {
            let id = self.leaves[i];
            let p = degree_of(&self.elements[id.0]);
            if p == 0 {
                return Err(StvemError::InvalidDegree(0));
            }
            self.elements[id.0].degree = p;
        }
        self.rebuild()
    }

    /// Returns a copy of the mesh in which every marked leaf is split into
    /// four congruent children. Neighbours are left untouched.
    pub fn refine(&self, marked: &[ElementId]) -> Result<Self> {
        let mut next = self.clone();
        next.refine_in_place(marked)?;
        Ok(next)
    }

    pub fn refine_in_place(&mut self, marked: &[ElementId]) -> Result<()> {
        let marked: BTreeSet<ElementId> = marked.iter().copied().collect();
        for &id in &marked {
            if id.0 >= self.elements.len() || !self.elements[id.0].is_leaf() {
                return Err(StvemError::NotALeaf(id.0));
            }
        }
        if marked.is_empty() {
            return Ok(());
        }
        let mut leaves = Vec::with_capacity(self.leaves.len() + 3 * marked.len());
        for i in 0..self.leaves.len() {
            let id = self.leaves[i];
            if !marked.contains(&id) {
                leaves.push(id);
                continue;
            }
            let parent = self.elements[id.0].clone();
            let xm = parent.x_iv.mid();
            let tm = parent.t_iv.mid();
            let xs = [
                Interval::raw(parent.x_iv.lo, xm),
                Interval::raw(xm, parent.x_iv.hi),
            ];
            let ts = [
                Interval::raw(parent.t_iv.lo, tm),
                Interval::raw(tm, parent.t_iv.hi),
            ];
            let mut kids = [ElementId(0); 4];
            for (k, kid) in kids.iter_mut().enumerate() {
                let cid = ElementId(self.elements.len());
                self.elements.push(Element {
                    id: cid,
                    x_iv: xs[k % 2],
                    t_iv: ts[k / 2],
                    degree: parent.degree,
                    topo_flag: TopoFlag(0),
                    slab: 0,
                    children: None,
                    parent: Some(id),
                });
                *kid = cid;
                leaves.push(cid);
            }
            self.elements[id.0].children = Some(kids);
        }
        self.leaves = leaves;
        self.rebuild()
    }

    /// Recomputes facets, facet degrees, slabs and topology flags.
    fn rebuild(&mut self) -> Result<()> {
        facets::build_facets(self)?;
        facets::assign_facet_degrees(self);
        topology::compute_slabs(self);
        topology::compute_topo_flags(self);
        Ok(())
    }

    pub(crate) fn tol_x(&self) -> f64 {
        MATCH_TOL * self.omega.len()
    }

    pub(crate) fn tol_t(&self) -> f64 {
        MATCH_TOL * self.t_final
    }
}
