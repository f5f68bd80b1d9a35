//! Local bilinear forms and load vectors.
//!
//! Matrices are indexed `[test, trial]`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::projectors::{gram_1d, gram_bulk};
use super::{LocalDofSet, LocalElement, ProjectorSet};
use crate::error::Result;
use crate::polybasis::{
    basis_1d, basis_2d, dim_p2, exponents_2d, gauss_rule, index_2d, moments, ref_monomial_integral as ri,
    Interval, QuadPolicy,
};

/// Local matrices of one element for given `nu` and `c_H`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMatrices {
    /// `a^K(Pi^N u, Pi^N v)`.
    pub a_proj: DMatrix<f64>,
    /// Stabilization `S^K` on DoF vectors, without the factor `nu`.
    pub stab: DMatrix<f64>,
    /// `a_h^K`.
    pub ah: DMatrix<f64>,
    /// `c_H (d_t Pi^* u, Pi^0_{p-1} v)_K`.
    pub tmat: DMatrix<f64>,
    /// `c_H (Pi^* u(., a_t), v(., a_t))_{Kx}`.
    pub u_self: DMatrix<f64>,
}

impl LocalMatrices {
    /// `b_h` restricted to the element, upwind self term included.
    pub fn element_matrix(&self) -> DMatrix<f64> {
        &self.ah + &self.tmat + &self.u_self
    }
}

/// `d_t` as a map from `P_p` to `P_{p-1}` coefficients, times `h_t`.
fn time_derivative(p: u32) -> DMatrix<f64> {
    let mono = exponents_2d(p);
    let mut dt = DMatrix::zeros(dim_p2(p - 1), mono.len());
    for (k, &[a, b]) in mono.iter().enumerate() {
        if b >= 1 {
            dt[(index_2d(a, b - 1), k)] = f64::from(b);
        }
    }
    dt
}

/// `int_K d_x m_k d_x m_l`, times `h_x / h_t`.
fn gradient_gram(p: u32) -> DMatrix<f64> {
    let mono = exponents_2d(p);
    DMatrix::from_fn(mono.len(), mono.len(), |k, l| {
        let ([ak, bk], [al, bl]) = (mono[k], mono[l]);
        if ak == 0 || al == 0 {
            0.0
        } else {
            f64::from(ak * al) * ri(ak + al - 2) * ri(bk + bl)
        }
    })
}

/// Computes the local matrices directly on the element.
pub fn local_forms(elem: &LocalElement, proj: &ProjectorSet, nu: f64, c_h: f64) -> LocalMatrices {
    let p = elem.degree;
    let pf = f64::from(p);
    let layout = &proj.layout;
    let n = layout.len();
    let (hx, ht) = (elem.h_x(), elem.h_t());
    let aspect = ht / hx;

    let a_proj = proj.pi_n.transpose() * gradient_gram(p) * &proj.pi_n * (nu * aspect);

    let pb = &proj.pi0_bulk;
    let mut stab = pb.transpose() * gram_bulk(p) * pb * (pf * pf * aspect);
    for (f, pf_mat) in elem.facets.iter().zip(&proj.pi0_facet) {
        let w = pf * f.t_iv.len() / f.h_fx;
        stab += pf_mat.transpose() * gram_1d(f.degree) * pf_mat * w;
    }
    let tr = &proj.trace;
    let bottom_gram = tr.transpose() * gram_1d(p) * tr;
    stab += &bottom_gram * (pf * aspect);

    let resid = DMatrix::identity(n, n) - &proj.d * &proj.pi_n;
    let ah = &a_proj + resid.transpose() * &stab * &resid * nu;

    let dt_pstar = time_derivative(p) * &proj.pi_star;
    let mut tmat = DMatrix::zeros(n, n);
    let scale = c_h * hx;
    for (r, row) in layout.bulk.clone().enumerate() {
        for c in 0..n {
            tmat[(row, c)] = scale * dt_pstar[(r, c)];
        }
    }
    let u_self = bottom_gram * (c_h * hx);

    LocalMatrices {
        a_proj,
        stab,
        ah,
        tmat,
        u_self,
    }
}

/// Projectors and local matrices of an element normalized to the unit
/// square with `nu = c_H = 1`.
#[derive(Clone, Debug)]
pub struct ReferenceLocal {
    pub proj: Arc<ProjectorSet>,
    pub mats: LocalMatrices,
}

impl ReferenceLocal {
    pub fn new(elem: &LocalElement) -> Result<Self> {
        let unit = elem.normalized();
        let proj = ProjectorSet::new(&unit)?;
        let mats = local_forms(&unit, &proj, 1.0, 1.0);
        Ok(Self {
            proj: Arc::new(proj),
            mats,
        })
    }

    /// Local matrices of a dilated copy with the given sizes and coefficients.
    pub fn scaled(&self, h_x: f64, h_t: f64, nu: f64, c_h: f64) -> LocalMatrices {
        let aspect = h_t / h_x;
        LocalMatrices {
            a_proj: &self.mats.a_proj * (nu * aspect),
            stab: &self.mats.stab * aspect,
            ah: &self.mats.ah * (nu * aspect),
            tmat: &self.mats.tmat * (c_h * h_x),
            u_self: &self.mats.u_self * (c_h * h_x),
        }
    }
}

/// `(f, Pi^0_{p-1} v)_K` for every local basis function.
pub fn load_vector(
    f: impl Fn(f64, f64) -> f64,
    elem: &LocalElement,
    layout: &LocalDofSet,
    policy: &dyn QuadPolicy,
) -> Vec<f64> {
    let p = elem.degree;
    let basis = basis_2d(p.max(2) - 1, elem.x_iv, elem.t_iv).expect("positive degree");
    let rule = policy.rule_2d(elem.x_iv, elem.t_iv, p);
    let nb = layout.bulk.len();
    let fm = moments(|pt| f(pt[0], pt[1]), &basis, &rule);
    let fm = DVector::from_column_slice(&fm[..nb]);
    let c = gram_bulk(p)
        .full_piv_lu()
        .solve(&fm)
        .expect("bulk Gram matrix is positive definite");
    let mut out = vec![0.0; layout.len()];
    for (r, row) in layout.bulk.clone().enumerate() {
        out[row] = elem.area() * c[r];
    }
    out
}

/// `c_H (u0, v(., 0))_{Kx}` for an element resting on `t = 0`.
pub fn initial_load(
    u0: impl Fn(f64) -> f64,
    elem: &LocalElement,
    proj: &ProjectorSet,
    c_h: f64,
    policy: &dyn QuadPolicy,
) -> Vec<f64> {
    let p = elem.degree;
    let basis = basis_1d(p, elem.x_iv);
    let (rx, _) = policy.rules(elem.x_iv, elem.t_iv, p);
    let m = moments(|x| u0(x[0]), &basis, &rx);
    let v = proj.trace.transpose() * DVector::from_column_slice(&m) * (c_h * elem.h_x());
    v.as_slice().to_vec()
}

/// Upwind coupling `-c_H (Pi^* u|_{K-}(., t*), v|_{K+}(., t*))_{Ex}`
/// across the space-like facet `ex`, with `t*` the bottom of `plus` and the
/// top of `minus`. Rows follow the DoFs of `plus`, columns those of `minus`.
pub fn upwind_coupling(
    plus: &LocalElement,
    proj_plus: &ProjectorSet,
    minus: &LocalElement,
    proj_minus: &ProjectorSet,
    ex: Interval,
    c_h: f64,
) -> DMatrix<f64> {
    let bp = basis_1d(plus.degree, plus.x_iv);
    let bm = basis_2d(minus.degree, minus.x_iv, minus.t_iv).expect("positive degree");
    let t_star = minus.t_iv.hi;
    let n = (plus.degree + minus.degree) as usize / 2 + 1;
    let rule = gauss_rule(n, ex);
    let mut q = DMatrix::zeros(bp.dim(), bm.dim());
    for (x, w) in rule.iter() {
        let vp = bp.eval(x);
        let vm = bm.eval([x[0], t_star]);
        for (g, a) in vp.iter().enumerate() {
            for (k, b) in vm.iter().enumerate() {
                q[(g, k)] += w * a * b;
            }
        }
    }
    proj_plus.trace.transpose() * q * &proj_minus.pi_star * (-c_h)
}
