//! Exact solutions, error quantities, the residual indicator and the
//! effectivity index.

mod errors;
mod exact;
mod indicator;
mod quadrature;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::assembly::Discretization;
use crate::polybasis::{basis_2d, gauss_rule, Basis2d, Interval};

pub use errors::{compute_errors, ErrorOptions, ErrorReport};
pub use exact::{test_case, ExactSolution, QuadHints, Regularity, Spectrum, SERIES_TERMS};
pub use indicator::{indicator, IndicatorReport};
pub use quadrature::GradedPolicy;

/// Local DoFs and projected polynomials of a discrete solution.
#[derive(Clone, Debug)]
pub struct DiscreteFields {
    pub dofs: Vec<DVector<f64>>,
    /// `Pi^N u_h` coefficients per leaf.
    pub pi_n: Vec<DVector<f64>>,
    /// `Pi^* u_h` coefficients per leaf.
    pub pi_star: Vec<DVector<f64>>,
}

impl DiscreteFields {
    pub fn new(disc: &Discretization, u: &[f64]) -> Self {
        let per: Vec<_> = (0..disc.locals.len())
            .into_par_iter()
            .map(|k| {
                let d = disc.local_values(k, u);
                let proj = &disc.locals[k].proj;
                let n = &proj.pi_n * &d;
                let s = &proj.pi_star * &d;
                (d, n, s)
            })
            .collect();
        let mut out = Self {
            dofs: Vec::with_capacity(per.len()),
            pi_n: Vec::with_capacity(per.len()),
            pi_star: Vec::with_capacity(per.len()),
        };
        for (d, n, s) in per {
            out.dofs.push(d);
            out.pi_n.push(n);
            out.pi_star.push(s);
        }
        out
    }
}

pub(crate) fn element_basis(disc: &Discretization, k: usize) -> Basis2d {
    let e = &disc.locals[k].elem;
    basis_2d(e.degree, e.x_iv, e.t_iv).expect("positive degree")
}

/// Value of a polynomial (coefficients `c` in `basis`) at `(x, t)`.
pub(crate) fn eval(basis: &Basis2d, c: &DVector<f64>, x: f64, t: f64) -> f64 {
    basis.eval_combination(c.as_slice(), [x, t])
}

/// `d/dx` (axis 0) or `d/dt` (axis 1) of a polynomial at `(x, t)`.
pub(crate) fn eval_d(basis: &Basis2d, c: &DVector<f64>, x: f64, t: f64, axis: usize) -> f64 {
    basis
        .eval_deriv([x, t], axis)
        .iter()
        .zip(c.iter())
        .map(|(a, b)| a * b)
        .sum()
}

/// `d^2/dx^2` of a polynomial at `(x, t)`, from the exponents.
pub(crate) fn eval_dxx(basis: &Basis2d, c: &DVector<f64>, x: f64, t: f64) -> f64 {
    let [xc, tc] = basis.center();
    let [hx, ht] = basis.scale();
    let (xi, tau) = ((x - xc) / hx, (t - tc) / ht);
    basis
        .exponents()
        .iter()
        .zip(c.iter())
        .filter(|([a, _], _)| *a >= 2)
        .map(|(&[a, b], ci)| {
            ci * f64::from(a * (a - 1)) * xi.powi(a as i32 - 2) * tau.powi(b as i32) / (hx * hx)
        })
        .sum()
}

/// `int_iv (p(s) - q(s))^2 ds` for polynomials of degree `<= deg`.
pub(crate) fn l2_sq_poly(iv: Interval, deg: u32, f: impl Fn(f64) -> f64) -> f64 {
    gauss_rule(deg as usize + 1, iv).integrate(|s| f(s[0]).powi(2))
}
