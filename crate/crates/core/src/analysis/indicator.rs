//! Five-term residual indicator.

use rayon::prelude::*;

use super::{element_basis, eval, eval_d, eval_dxx, l2_sq_poly, DiscreteFields};
use crate::assembly::{Discretization, ProblemData};
use crate::mesh::SpaceTimeMesh;
use crate::polybasis::QuadPolicy;

#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorReport {
    /// `eta_{K,i}^2`, per leaf.
    pub local: Vec<[f64; 5]>,
    /// `eta_i`.
    pub parts: [f64; 5],
    pub eta: f64,
}

impl IndicatorReport {
    /// `eta_K^2` per leaf.
    pub fn element_sq(&self) -> Vec<f64> {
        self.local.iter().map(|l| l.iter().sum()).collect()
    }

    pub fn effectivity(&self, ey: f64) -> f64 {
        self.eta / ey
    }
}

pub fn indicator(
    mesh: &SpaceTimeMesh,
    disc: &Discretization,
    fields: &DiscreteFields,
    data: &ProblemData,
    policy: &dyn QuadPolicy,
) -> IndicatorReport {
    let (nu, c_h) = (disc.nu, disc.c_h);
    let local: Vec<[f64; 5]> = (0..disc.locals.len())
        .into_par_iter()
        .map(|k| {
            let loc = &disc.locals[k];
            let e = &loc.elem;
            let p = f64::from(e.degree);
            let b = element_basis(disc, k);
            let (cn, cs) = (&fields.pi_n[k], &fields.pi_star[k]);
            let mut eta = [0.0; 5];

            let rule = policy.rule_2d(e.x_iv, e.t_iv, e.degree);
            let r2 = rule.integrate(|[x, t]| {
                let r = (data.f)(x, t) + nu * eval_dxx(&b, cn, x, t) - c_h * eval_d(&b, cs, x, t, 1);
                r * r
            });
            eta[0] = e.h_x() * e.h_x() / (nu * p * p) * r2;

            for lf in &e.facets {
                let tf = &mesh.time_facets()[lf.id];
                let x = tf.x_pos;
                if tf.is_boundary() {
                    let (_, rt) = policy.rules(e.x_iv, tf.t_iv, e.degree);
                    let m = rt.integrate(|t| (eval(&b, cn, x, t[0]) - (data.g)(x, t[0])).powi(2));
                    eta[2] += nu * p / tf.h_fx * m;
                    continue;
                }
                let other = if tf.left_elem == Some(loc.id) { tf.right_elem } else { tf.left_elem };
                let ko = disc.dofs.position(other.expect("interior facet"));
                let bo = element_basis(disc, ko);
                let co = &fields.pi_n[ko];
                let deg = e.degree.max(disc.locals[ko].elem.degree);
                let jump_dx = l2_sq_poly(tf.t_iv, deg, |t| {
                    eval_d(&b, cn, x, t, 0) - eval_d(&bo, co, x, t, 0)
                });
                let jump = l2_sq_poly(tf.t_iv, deg, |t| eval(&b, cn, x, t) - eval(&bo, co, x, t));
                eta[1] += 0.5 * nu * tf.h_fx / p * jump_dx;
                eta[2] += 0.5 * nu * p / tf.h_fx * jump;
            }

            for &sid in &mesh.facets_of(loc.id).bottom {
                let sf = &mesh.space_facets()[sid];
                let t = sf.t_pos;
                eta[3] += c_h
                    * match sf.below_elem {
                        None => {
                            let (rx, _) = policy.rules(sf.x_iv, e.t_iv, e.degree);
                            rx.integrate(|x| (eval(&b, cs, x[0], t) - (data.u0)(x[0])).powi(2))
                        }
                        Some(below) => {
                            let km = disc.dofs.position(below);
                            let bm = element_basis(disc, km);
                            let deg = e.degree.max(disc.locals[km].elem.degree);
                            l2_sq_poly(sf.x_iv, deg, |x| {
                                eval(&b, cs, x, t) - eval(&bm, &fields.pi_star[km], x, t)
                            })
                        }
                    };
            }

            let m = loc.matrices(nu, c_h);
            let d = &fields.dofs[k];
            let r = d - &loc.proj.d * cn;
            eta[4] = nu * r.dot(&(&m.stab * &r));
            eta
        })
        .collect();
    let mut sq = [0.0; 5];
    for l in &local {
        for i in 0..5 {
            sq[i] += l[i];
        }
    }
    IndicatorReport {
        local,
        parts: sq.map(f64::sqrt),
        eta: sq.iter().sum::<f64>().sqrt(),
    }
}
