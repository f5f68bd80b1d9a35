//! Closed-form solutions of the three test problems.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::assembly::{ProblemData, SpaceTimeFn};
use crate::error::{Result, StvemError};
use crate::polybasis::Interval;

/// Number of retained terms in the Fourier series of test case 3.
pub const SERIES_TERMS: usize = 251;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularity {
    Smooth,
    /// `t^alpha` behaviour at `t = 0`.
    TimeSingular(f64),
    /// Incompatible initial and boundary data meeting at the bottom corners.
    Incompatible,
}

/// Sinusoidal modes `sin(k pi x) exp(-rate k^2 t)` with `k <= k_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spectrum {
    pub k_max: f64,
    pub rate: f64,
}

impl Spectrum {
    /// Largest wavenumber whose amplitude at time `t` exceeds `1e-8`.
    pub fn active(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.k_max;
        }
        let k = (8.0 * std::f64::consts::LN_10 / (self.rate * t)).sqrt();
        k.min(self.k_max)
    }
}

/// Where integrands built from the solution need graded quadrature.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuadHints {
    /// Grade toward `t = 0` on elements resting on the initial time.
    pub time_zero: bool,
    /// Spatial positions of corner singularities at `t = 0`.
    pub corners: Vec<f64>,
    pub spectrum: Option<Spectrum>,
}

#[derive(Clone)]
pub struct ExactSolution {
    pub name: String,
    pub omega: Interval,
    pub t_final: f64,
    pub u: SpaceTimeFn,
    pub u_x: SpaceTimeFn,
    pub u_t: SpaceTimeFn,
    pub u_xx: SpaceTimeFn,
    /// Source, boundary and initial data for the given coefficients.
    pub data: ProblemData,
    pub regularity: Regularity,
    pub hints: QuadHints,
    /// `u_t = u_xx` holds identically, so the source vanishes for `c_H = nu`.
    pub unit_heat: bool,
}

impl std::fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExactSolution")
            .field("name", &self.name)
            .field("t_final", &self.t_final)
            .field("regularity", &self.regularity)
            .finish_non_exhaustive()
    }
}

impl ExactSolution {
    /// Recomputes the source for other coefficients: `f = c_H u_t - nu u_xx`.
    pub fn with_coefficients(mut self, nu: f64, c_h: f64) -> Self {
        let (ut, uxx) = (Arc::clone(&self.u_t), Arc::clone(&self.u_xx));
        self.data.nu = nu;
        self.data.c_h = c_h;
        self.data.f = if self.unit_heat && c_h == nu {
            Arc::new(|_, _| 0.0)
        } else {
            Arc::new(move |x: f64, t: f64| c_h * ut(x, t) - nu * uxx(x, t))
        };
        self
    }

    /// A polynomial solution given through its derivatives; boundary and
    /// initial data are its traces.
    pub fn polynomial(
        name: &str,
        u: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        u_x: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        u_t: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        u_xx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let u: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> = Arc::new(u);
        let mut data = crate::assembly::ProblemData::homogeneous(1.0, 1.0);
        data.g = Arc::clone(&u);
        let u0 = Arc::clone(&u);
        data.u0 = Arc::new(move |x| u0(x, 0.0));
        Self {
            name: name.into(),
            omega: Interval::raw(0.0, 1.0),
            t_final: 1.0,
            u,
            u_x: Arc::new(u_x),
            u_t: Arc::new(u_t),
            u_xx: Arc::new(u_xx),
            data,
            regularity: Regularity::Smooth,
            hints: QuadHints::default(),
            unit_heat: false,
        }
        .with_coefficients(1.0, 1.0)
    }
}

/// Test problems with `nu = c_H = 1`. `alpha` is required for case 2.
pub fn test_case(id: u32, alpha: Option<f64>) -> Result<ExactSolution> {
    match id {
        1 => Ok(case_1()),
        2 => {
            let a = alpha.ok_or_else(|| StvemError::invalid("alpha", "required for test case 2"))?;
            if !(a > 0.5 && a.is_finite()) {
                return Err(StvemError::invalid("alpha", format!("{a} must exceed 1/2")));
            }
            Ok(case_2(a))
        }
        3 => Ok(case_3()),
        _ => Err(StvemError::invalid("test_case", format!("unknown id {id}"))),
    }
}

fn assemble(
    name: String,
    t_final: f64,
    fns: [SpaceTimeFn; 4],
    u0: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    regularity: Regularity,
    hints: QuadHints,
) -> ExactSolution {
    let [u, u_x, u_t, u_xx] = fns;
    let mut data = ProblemData::homogeneous(1.0, 1.0);
    data.u0 = u0;
    ExactSolution {
        name,
        omega: Interval::raw(0.0, 1.0),
        t_final,
        u,
        u_x,
        u_t,
        u_xx,
        data,
        unit_heat: regularity == Regularity::Incompatible,
        regularity,
        hints,
    }
    .with_coefficients(1.0, 1.0)
}

fn case_1() -> ExactSolution {
    assemble(
        "u1".into(),
        1.0,
        [
            Arc::new(|x: f64, t: f64| (-t).exp() * (PI * x).sin()),
            Arc::new(|x: f64, t: f64| (-t).exp() * PI * (PI * x).cos()),
            Arc::new(|x: f64, t: f64| -(-t).exp() * (PI * x).sin()),
            Arc::new(|x: f64, t: f64| -(-t).exp() * PI * PI * (PI * x).sin()),
        ],
        Arc::new(|x| (PI * x).sin()),
        Regularity::Smooth,
        QuadHints::default(),
    )
}

fn case_2(alpha: f64) -> ExactSolution {
    assemble(
        format!("u2(alpha={alpha})"),
        0.1,
        [
            Arc::new(move |x: f64, t: f64| (PI * x).sin() * t.powf(alpha)),
            Arc::new(move |x: f64, t: f64| PI * (PI * x).cos() * t.powf(alpha)),
            Arc::new(move |x: f64, t: f64| {
                if t <= 0.0 {
                    0.0
                } else {
                    alpha * (PI * x).sin() * t.powf(alpha - 1.0)
                }
            }),
            Arc::new(move |x: f64, t: f64| -PI * PI * (PI * x).sin() * t.powf(alpha)),
        ],
        Arc::new(|_| 0.0),
        Regularity::TimeSingular(alpha),
        QuadHints {
            time_zero: true,
            ..QuadHints::default()
        },
    )
}

/// Which sum of the test case 3 series to evaluate.
#[derive(Clone, Copy)]
enum SeriesPart {
    Value,
    DxValue,
    DtValue,
}

/// Partial sums of `sum_n 4/((2n+1) pi) sin((2n+1) pi x) exp(-(2n+1)^2 pi^2 t)`
/// and its derivatives, by trigonometric and geometric recurrences.
fn series(part: SeriesPart, x: f64, t: f64) -> f64 {
    let theta = PI * x;
    // sin/cos of k theta for odd k, stepping k by 2
    let (s2, c2) = (2.0 * theta).sin_cos();
    let (mut s, mut c) = theta.sin_cos();
    let a = PI * PI * t;
    // e_n = exp(-(2n+1)^2 a); e_{n+1} = e_n q^{n+1}, q = exp(-8a)
    let mut e = (-a).exp();
    let q = (-8.0 * a).exp();
    let mut ratio = q;
    let mut sum = 0.0;
    for n in 0..SERIES_TERMS {
        let k = (2 * n + 1) as f64;
        let term = match part {
            SeriesPart::Value => 4.0 / (k * PI) * s,
            SeriesPart::DxValue => 4.0 * c,
            SeriesPart::DtValue => -4.0 * k * PI * s,
        };
        sum += term * e;
        if e < 1e-300 || (t > 0.0 && e * k < 1e-18) {
            break;
        }
        let (ns, nc) = (s * c2 + c * s2, c * c2 - s * s2);
        s = ns;
        c = nc;
        e *= ratio;
        ratio *= q;
    }
    sum
}

fn case_3() -> ExactSolution {
    let k_max = (2 * SERIES_TERMS - 1) as f64;
    assemble(
        "u3".into(),
        1.0,
        [
            Arc::new(|x: f64, t: f64| series(SeriesPart::Value, x, t)),
            Arc::new(|x: f64, t: f64| series(SeriesPart::DxValue, x, t)),
            Arc::new(|x: f64, t: f64| series(SeriesPart::DtValue, x, t)),
            // the series solves u_t = u_xx term by term
            Arc::new(|x: f64, t: f64| series(SeriesPart::DtValue, x, t)),
        ],
        Arc::new(|_| 1.0),
        Regularity::Incompatible,
        QuadHints {
            time_zero: true,
            corners: vec![0.0, 1.0],
            spectrum: Some(Spectrum {
                k_max,
                rate: PI * PI,
            }),
        },
    )
}
