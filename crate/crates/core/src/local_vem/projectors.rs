//! Projector matrices mapping local DoF vectors to scaled-monomial
//! coefficients.

use nalgebra::DMatrix;

use super::{bulk_exponents, dof_layout, LocalDofSet, LocalElement};
use crate::error::{Result, StvemError};
use crate::polybasis::{binomial, dim_p2, exponents_2d, index_2d, ref_monomial_integral as ri};

/// `int_{-1/2}^{1/2} (c0 + c1 s)^b s^j ds`.
fn shifted_moment(b: u32, j: u32, c0: f64, c1: f64) -> f64 {
    (0..=b)
        .map(|i| binomial(b, i) * c0.powi((b - i) as i32) * c1.powi(i as i32) * ri(i + j))
        .sum()
}

/// Normalized Gram matrix `I(i + j)` of the 1D scaled monomials up to `q`.
pub(crate) fn gram_1d(q: u32) -> DMatrix<f64> {
    let n = q as usize + 1;
    DMatrix::from_fn(n, n, |i, j| ri((i + j) as u32))
}

/// Normalized Gram matrix of `P_{p-1}(K)`.
pub(crate) fn gram_bulk(p: u32) -> DMatrix<f64> {
    let e = bulk_exponents(p);
    DMatrix::from_fn(e.len(), e.len(), |i, j| {
        ri(e[i][0] + e[j][0]) * ri(e[i][1] + e[j][1])
    })
}

fn solve(g: DMatrix<f64>, b: DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    g.full_piv_lu()
        .solve(&b)
        .ok_or(StvemError::SingularLocal { element: 0, what })
}

/// DoF values of the `P_p(K)` scaled monomials, one column per monomial.
pub fn dof_matrix(elem: &LocalElement, layout: &LocalDofSet) -> DMatrix<f64> {
    let p = elem.degree;
    let mono = exponents_2d(p);
    let bulk = bulk_exponents(p);
    let mut d = DMatrix::zeros(layout.len(), mono.len());
    for (k, &[ak, bk]) in mono.iter().enumerate() {
        for (r, &[a, b]) in bulk.iter().enumerate() {
            d[(layout.bulk.start + r, k)] = ri(a + ak) * ri(b + bk);
        }
        for (f, range) in elem.facets.iter().zip(&layout.facets) {
            let (c0, c1) = elem.facet_map(f);
            let xi = f.side.xi().powi(ak as i32);
            for (j, row) in range.clone().enumerate() {
                d[(row, k)] = xi * shifted_moment(bk, j as u32, c0, c1);
            }
        }
        let bottom = (-0.5f64).powi(bk as i32);
        for (g, row) in layout.space.clone().enumerate() {
            d[(row, k)] = ri(g as u32 + ak) * bottom;
        }
    }
    d
}

/// `Pi^N_p`: gradient projection fixed by time-only bulk moments and the
/// mean of the bottom trace. Gradient conditions are evaluated by parts
/// from bulk and time-like facet moments.
pub fn build_pi_n(elem: &LocalElement, layout: &LocalDofSet) -> Result<DMatrix<f64>> {
    let p = elem.degree;
    let mono = exponents_2d(p);
    let n = mono.len();
    let mut g = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, layout.len());
    let mut row = 0;
    // Rows are scaled by h_x / h_t.
    for &[ar, br] in mono.iter().filter(|e| e[0] >= 1) {
        for (k, &[ak, bk]) in mono.iter().enumerate() {
            if ak >= 1 {
                g[(row, k)] = f64::from(ar * ak) * ri(ar + ak - 2) * ri(br + bk);
            }
        }
        if ar >= 2 {
            let col = layout.bulk.start + index_2d(ar - 2, br);
            b[(row, col)] -= f64::from(ar * (ar - 1));
        }
        for (f, range) in elem.facets.iter().zip(&layout.facets) {
            let (c0, c1) = elem.facet_map(f);
            let scale = f.side.normal() * f64::from(ar) * f.side.xi().powi(ar as i32 - 1) * c1;
            for j in 0..=br {
                let coef = binomial(br, j) * c0.powi((br - j) as i32) * c1.powi(j as i32);
                b[(row, range.start + j as usize)] += scale * coef;
            }
        }
        row += 1;
    }
    for bt in 0..p {
        for (k, &[ak, bk]) in mono.iter().enumerate() {
            g[(row, k)] = ri(ak) * ri(bt + bk);
        }
        b[(row, layout.bulk.start + index_2d(0, bt))] = 1.0;
        row += 1;
    }
    for (k, &[ak, bk]) in mono.iter().enumerate() {
        g[(row, k)] = ri(ak) * (-0.5f64).powi(bk as i32);
    }
    b[(row, layout.space.start)] = 1.0;
    debug_assert_eq!(row + 1, n);
    solve(g, b, "Pi^N")
}

/// `Pi^*_p`: fixed by all bulk moments and all bottom-trace moments.
pub fn build_pi_star(elem: &LocalElement, layout: &LocalDofSet) -> Result<DMatrix<f64>> {
    let d = dof_matrix(elem, layout);
    let n = dim_p2(elem.degree);
    let rows: Vec<usize> = layout.bulk.clone().chain(layout.space.clone()).collect();
    debug_assert_eq!(rows.len(), n);
    let g = DMatrix::from_fn(n, n, |r, k| d[(rows[r], k)]);
    let b = DMatrix::from_fn(n, layout.len(), |r, c| if c == rows[r] { 1.0 } else { 0.0 });
    solve(g, b, "Pi^*")
}

/// `L^2(K)` projection onto `P_{p-1}(K)`, read off the bulk moments.
pub fn build_pi0_bulk(layout: &LocalDofSet) -> DMatrix<f64> {
    let nb = layout.bulk.len();
    let e = DMatrix::from_fn(nb, layout.len(), |r, c| {
        if c == layout.bulk.start + r {
            1.0
        } else {
            0.0
        }
    });
    gram_bulk(layout.degree)
        .full_piv_lu()
        .solve(&e)
        .expect("bulk Gram matrix is positive definite")
}

/// `L^2(F)` projection onto `P_{p_F}(F)` in the facet's scaled monomials.
pub fn build_pi0_facet(layout: &LocalDofSet, k: usize) -> DMatrix<f64> {
    restricted_gram_solve(layout, layout.facets[k].clone())
}

/// Bottom trace `v(., a_t)` in the scaled monomials of `Kx`.
pub fn bottom_trace(layout: &LocalDofSet) -> DMatrix<f64> {
    restricted_gram_solve(layout, layout.space.clone())
}

fn restricted_gram_solve(layout: &LocalDofSet, range: std::ops::Range<usize>) -> DMatrix<f64> {
    let q = range.len() as u32 - 1;
    let e = DMatrix::from_fn(range.len(), layout.len(), |r, c| {
        if c == range.start + r {
            1.0
        } else {
            0.0
        }
    });
    gram_1d(q)
        .full_piv_lu()
        .solve(&e)
        .expect("1D Gram matrix is positive definite")
}

/// All projector matrices of one element.
#[derive(Clone, Debug)]
pub struct ProjectorSet {
    pub layout: LocalDofSet,
    pub d: DMatrix<f64>,
    pub pi_n: DMatrix<f64>,
    pub pi_star: DMatrix<f64>,
    pub pi0_bulk: DMatrix<f64>,
    pub pi0_facet: Vec<DMatrix<f64>>,
    pub trace: DMatrix<f64>,
}

impl ProjectorSet {
    pub fn new(elem: &LocalElement) -> Result<Self> {
        let layout = dof_layout(elem);
        let d = dof_matrix(elem, &layout);
        let pi_n = build_pi_n(elem, &layout)?;
        let pi_star = build_pi_star(elem, &layout)?;
        let pi0_bulk = build_pi0_bulk(&layout);
        let pi0_facet = (0..layout.facets.len())
            .map(|k| build_pi0_facet(&layout, k))
            .collect();
        let trace = bottom_trace(&layout);
        Ok(Self {
            layout,
            d,
            pi_n,
            pi_star,
            pi0_bulk,
            pi0_facet,
            trace,
        })
    }
}
