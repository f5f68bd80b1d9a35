//! Per-element virtual element machinery.
//!
//! The degrees of freedom of an element `K = Kx x (a_t, b_t)` are, in order:
//! bulk moments against `P_{p-1}(K)`, moments against `P_{p_F}(F_t)` on every
//! time-like facet (left side first, each side bottom to top), and moments of
//! the trace at `t = a_t` against `P_p(Kx)`. All moments are normalized by the
//! measure of their domain and taken against scaled monomials, so the
//! projector matrices only depend on the element shape up to per-axis
//! dilation.

mod forms;
mod projectors;

use std::ops::Range;

use crate::mesh::{ElementId, SpaceTimeMesh};
use crate::polybasis::{basis_1d, dim_p2, exponents_2d, moments, Interval, QuadPolicy};

pub use forms::{
    initial_load, load_vector, local_forms, upwind_coupling, LocalMatrices, ReferenceLocal,
};
pub use projectors::{
    build_pi0_bulk, build_pi0_facet, build_pi_n, build_pi_star, bottom_trace, dof_matrix,
    ProjectorSet,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Reference coordinate of the side, `-1/2` or `1/2`.
    pub fn xi(self) -> f64 {
        match self {
            Side::Left => -0.5,
            Side::Right => 0.5,
        }
    }

    /// Outward normal component.
    pub fn normal(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// A time-like facet seen from one element.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFacet {
    /// Global facet id, or the position on the side for detached elements.
    pub id: usize,
    pub side: Side,
    pub t_iv: Interval,
    pub degree: u32,
    pub h_fx: f64,
}

/// Geometry and degree data of one element, detached from the mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalElement {
    pub x_iv: Interval,
    pub t_iv: Interval,
    pub degree: u32,
    pub facets: Vec<LocalFacet>,
}

impl LocalElement {
    pub fn from_mesh(mesh: &SpaceTimeMesh, id: ElementId) -> Self {
        let e = mesh.element(id);
        let adj = mesh.facets_of(id);
        let facet = |f: usize, side| {
            let tf = &mesh.time_facets()[f];
            LocalFacet {
                id: f,
                side,
                t_iv: tf.t_iv,
                degree: tf.moment_degree,
                h_fx: tf.h_fx,
            }
        };
        let facets = adj
            .left
            .iter()
            .map(|&f| facet(f, Side::Left))
            .chain(adj.right.iter().map(|&f| facet(f, Side::Right)))
            .collect();
        Self {
            x_iv: e.x_iv,
            t_iv: e.t_iv,
            degree: e.degree,
            facets,
        }
    }

    /// A rectangle whose sides are single facets of degree `p`; `h_Fx`
    /// equals the element width.
    pub fn rectangle(x_iv: Interval, t_iv: Interval, p: u32) -> Self {
        let facets = [Side::Left, Side::Right]
            .into_iter()
            .enumerate()
            .map(|(i, side)| LocalFacet {
                id: i,
                side,
                t_iv,
                degree: p,
                h_fx: x_iv.len(),
            })
            .collect();
        Self {
            x_iv,
            t_iv,
            degree: p,
            facets,
        }
    }

    pub fn h_x(&self) -> f64 {
        self.x_iv.len()
    }

    pub fn h_t(&self) -> f64 {
        self.t_iv.len()
    }

    pub fn area(&self) -> f64 {
        self.h_x() * self.h_t()
    }

    /// The same element mapped onto the unit square `(0,1)^2`.
    pub fn normalized(&self) -> Self {
        let unit = Interval::raw(0.0, 1.0);
        let (t0, ht, hx) = (self.t_iv.lo, self.h_t(), self.h_x());
        let facets = self
            .facets
            .iter()
            .map(|f| LocalFacet {
                id: f.id,
                side: f.side,
                t_iv: Interval::raw((f.t_iv.lo - t0) / ht, (f.t_iv.hi - t0) / ht),
                degree: f.degree,
                h_fx: f.h_fx / hx,
            })
            .collect();
        Self {
            x_iv: unit,
            t_iv: unit,
            degree: self.degree,
            facets,
        }
    }

    /// Offsets `c0` and length ratio `c1` such that the element's reference
    /// time `tau` equals `c0 + c1 s` for the facet's reference time `s`.
    pub(crate) fn facet_map(&self, f: &LocalFacet) -> (f64, f64) {
        (
            (f.t_iv.mid() - self.t_iv.mid()) / self.h_t(),
            f.t_iv.len() / self.h_t(),
        )
    }
}

/// Index ranges of the local degrees of freedom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalDofSet {
    pub degree: u32,
    pub bulk: Range<usize>,
    pub facets: Vec<Range<usize>>,
    pub space: Range<usize>,
}

impl LocalDofSet {
    pub fn len(&self) -> usize {
        self.space.end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn dof_layout(elem: &LocalElement) -> LocalDofSet {
    let p = elem.degree;
    let bulk = 0..dim_p2(p - 1);
    let mut next = bulk.end;
    let facets = elem
        .facets
        .iter()
        .map(|f| {
            let r = next..next + f.degree as usize + 1;
            next = r.end;
            r
        })
        .collect();
    let space = next..next + p as usize + 1;
    LocalDofSet {
        degree: p,
        bulk,
        facets,
        space,
    }
}

/// Degrees of freedom of a function known in closed form.
pub fn dof_evaluate(
    f: impl Fn(f64, f64) -> f64,
    elem: &LocalElement,
    layout: &LocalDofSet,
    policy: &dyn QuadPolicy,
) -> Vec<f64> {
    let p = elem.degree;
    let mut out = vec![0.0; layout.len()];

    let bulk_basis = crate::polybasis::basis_2d(p.max(2) - 1, elem.x_iv, elem.t_iv)
        .expect("positive degree");
    let rule = policy.rule_2d(elem.x_iv, elem.t_iv, p);
    let m = moments(|pt| f(pt[0], pt[1]), &bulk_basis, &rule);
    out[layout.bulk.clone()].copy_from_slice(&m[..layout.bulk.len()]);

    for (f_loc, range) in elem.facets.iter().zip(&layout.facets) {
        let x = match f_loc.side {
            Side::Left => elem.x_iv.lo,
            Side::Right => elem.x_iv.hi,
        };
        let basis = basis_1d(f_loc.degree, f_loc.t_iv);
        let (_, rt) = policy.rules(elem.x_iv, f_loc.t_iv, f_loc.degree);
        let m = moments(|t| f(x, t[0]), &basis, &rt);
        out[range.clone()].copy_from_slice(&m);
    }

    let basis = basis_1d(p, elem.x_iv);
    let (rx, _) = policy.rules(elem.x_iv, elem.t_iv, p);
    let m = moments(|x| f(x[0], elem.t_iv.lo), &basis, &rx);
    out[layout.space.clone()].copy_from_slice(&m);
    out
}

/// Exponents of the bulk test space `P_{p-1}(K)`.
pub(crate) fn bulk_exponents(p: u32) -> Vec<[u32; 2]> {
    let mut e = exponents_2d(p);
    e.truncate(dim_p2(p - 1));
    e
}
