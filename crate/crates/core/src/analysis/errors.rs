//! `E^Y`, `E^N`, `E^U` and `E^X`.

use nalgebra::DVector;
use rayon::prelude::*;

use super::{element_basis, eval, eval_d, l2_sq_poly, DiscreteFields, ExactSolution};
use crate::assembly::{free_system, upwind_couplings, Discretization};
use crate::error::Result;
use crate::local_vem::dof_evaluate;
use crate::mesh::SpaceTimeMesh;
use crate::polybasis::QuadPolicy;

#[derive(Clone, Copy, Debug)]
pub struct ErrorOptions {
    /// Solve for the discrete Newton potential.
    pub compute_en: bool,
}

impl Default for ErrorOptions {
    fn default() -> Self {
        Self { compute_en: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub ey: f64,
    pub en: Option<f64>,
    pub eu: f64,
    /// Initial, interior-jump and final contributions to `(E^U)^2`.
    pub eu_parts: [f64; 3],
    /// Requires `en`.
    pub ex: Option<f64>,
    /// `E^Y` contributions `nu |d_x (u - Pi^N u_h)|^2_K`, per leaf.
    pub ey_local: Vec<f64>,
    /// The Newton potential system needed a regularized fallback.
    pub en_fallback: bool,
}

pub fn compute_errors(
    mesh: &SpaceTimeMesh,
    disc: &Discretization,
    fields: &DiscreteFields,
    exact: &ExactSolution,
    policy: &dyn QuadPolicy,
    opts: ErrorOptions,
) -> Result<ErrorReport> {
    let nu = disc.nu;
    let n = disc.locals.len();
    let ey_local: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let e = &disc.locals[k].elem;
            let b = element_basis(disc, k);
            let c = &fields.pi_n[k];
            let rule = policy.rule_2d(e.x_iv, e.t_iv, e.degree);
            nu * rule.integrate(|[x, t]| ((exact.u_x)(x, t) - eval_d(&b, c, x, t, 0)).powi(2))
        })
        .collect();
    let ey = ey_local.iter().sum::<f64>().sqrt();

    // phi = Pi^*(u - u_h), element by element
    let phi: Vec<DVector<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let loc = &disc.locals[k];
            let ue = dof_evaluate(|x, t| (exact.u)(x, t), &loc.elem, &loc.proj.layout, policy);
            let diff = DVector::from_vec(ue) - &fields.dofs[k];
            &loc.proj.pi_star * diff
        })
        .collect();

    let eu_parts = energy_jumps(mesh, disc, &phi);
    let eu = eu_parts.iter().sum::<f64>().sqrt();

    let (en, en_fallback) = if opts.compute_en {
        let (v, fb) = newton_potential_norm(mesh, disc, &phi)?;
        (Some(v), fb)
    } else {
        (None, false)
    };
    let ex = en.map(|en| (ey * ey + en * en + eu * eu).sqrt());
    Ok(ErrorReport {
        ey,
        en,
        eu,
        eu_parts,
        ex,
        ey_local,
        en_fallback,
    })
}

/// The three parts of `(E^U)^2` for the piecewise polynomial `phi`:
/// initial trace, jumps across interior space-like facets, final trace.
fn energy_jumps(mesh: &SpaceTimeMesh, disc: &Discretization, phi: &[DVector<f64>]) -> [f64; 3] {
    let tf = mesh.t_final();
    let tol = 1e-12 * tf;
    let mut sum = [0.0; 3];
    for (k, loc) in disc.locals.iter().enumerate() {
        let e = &loc.elem;
        let b = element_basis(disc, k);
        if e.t_iv.lo.abs() <= tol {
            sum[0] += l2_sq_poly(e.x_iv, e.degree, |x| eval(&b, &phi[k], x, e.t_iv.lo));
        }
        if (e.t_iv.hi - tf).abs() <= tol {
            sum[2] += l2_sq_poly(e.x_iv, e.degree, |x| eval(&b, &phi[k], x, e.t_iv.hi));
        }
    }
    for sf in mesh.space_facets() {
        let Some(below) = sf.below_elem else { continue };
        let kp = disc.dofs.position(sf.above_elem);
        let km = disc.dofs.position(below);
        let (bp, bm) = (element_basis(disc, kp), element_basis(disc, km));
        let deg = disc.locals[kp].elem.degree.max(disc.locals[km].elem.degree);
        sum[1] += l2_sq_poly(sf.x_iv, deg, |x| {
            eval(&bp, &phi[kp], x, sf.t_pos) - eval(&bm, &phi[km], x, sf.t_pos)
        });
    }
    sum.map(|v| 0.5 * disc.c_h * v)
}

/// `|Pi^N N_h phi|_Y` with `N_h` defined through the symmetric form `a_h`.
/// Returns the norm and whether the regularized fallback was used.
fn newton_potential_norm(
    mesh: &SpaceTimeMesh,
    disc: &Discretization,
    phi: &[DVector<f64>],
) -> Result<(f64, bool)> {
    let (nu, c_h) = (disc.nu, disc.c_h);
    // DoFs of phi on each element; phi is a polynomial there, so Pi^* D = I
    // turns the time and upwind blocks of b_h into the required pairings.
    let dphi: Vec<DVector<f64>> = disc
        .locals
        .iter()
        .zip(phi)
        .map(|(loc, c)| &loc.proj.d * c)
        .collect();
    let mut loads: Vec<Vec<f64>> = disc
        .locals
        .par_iter()
        .zip(&dphi)
        .map(|(loc, d)| {
            let m = loc.matrices(nu, c_h);
            ((&m.tmat + &m.u_self) * d).as_slice().to_vec()
        })
        .collect();
    for (kp, km, c) in upwind_couplings(mesh, disc, c_h) {
        let v = c * &dphi[km];
        loads[kp].iter_mut().zip(v.iter()).for_each(|(a, b)| *a += b);
    }
    let sys = free_system(disc, |loc| loc.matrices(nu, c_h).ah, &loads);
    let (w, fallback) = match sys.solve() {
        Ok(w) => (w, false),
        Err(_) => {
            // Tikhonov-regularized normal solve as a least-squares surrogate.
            let scale = sys.triplets.iter().fold(0.0f64, |m, t| m.max(t.2.abs()));
            let mut reg = sys.clone();
            for i in 0..reg.dim() {
                reg.triplets.push((i, i, 1e-12 * scale));
            }
            (reg.solve()?, true)
        }
    };
    let mut global = vec![0.0; disc.dofs.n_dofs];
    for (&g, v) in sys.unknowns.iter().zip(w) {
        global[g] = v;
    }
    // collected first so the reduction order does not depend on threads
    let parts: Vec<f64> = (0..disc.locals.len())
        .into_par_iter()
        .map(|k| {
            let wk = disc.local_values(k, &global);
            let m = disc.locals[k].matrices(nu, c_h);
            wk.dot(&(&m.a_proj * &wk))
        })
        .collect();
    let en2: f64 = parts.iter().sum();
    Ok((en2.max(0.0).sqrt(), fallback))
}
