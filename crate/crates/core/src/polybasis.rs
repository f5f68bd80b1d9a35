//! Scaled monomial bases, Gauss rules and measure-normalized moments.
//!
//! Every basis function is a product `((x - x_c) / h_x)^a ((t - t_c) / h_t)^b`
//! with the center at the midpoint of the domain and `h` the side length, so
//! the reference variables live in `[-1/2, 1/2]`. The functions are invariant
//! under translation and per-axis dilation of the domain.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use crate::error::{Result, StvemError};

/// An open interval `(lo, hi)` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(StvemError::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// Constructor for intervals whose ordering is known by construction.
    pub(crate) fn raw(lo: f64, hi: f64) -> Self {
        debug_assert!(lo < hi, "degenerate interval ({lo}, {hi})");
        Self { lo, hi }
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Maps `s` in `[-1/2, 1/2]` onto the interval.
    #[inline]
    pub fn from_ref(&self, s: f64) -> f64 {
        self.mid() + s * self.len()
    }

    /// Maps a point of the interval onto `[-1/2, 1/2]`.
    #[inline]
    pub fn to_ref(&self, x: f64) -> f64 {
        (x - self.mid()) / self.len()
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }
}

/// Scaled monomials of total degree `<= degree` in `D` variables.
///
/// In two variables the members are ordered by total degree and, within a
/// degree, by increasing power of the second variable, so the leading
/// `dim P_{q}` members span `P_q` for every `q <= degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMonomialBasis<const D: usize> {
    degree: u32,
    center: [f64; D],
    scale: [f64; D],
    exponents: Vec<[u32; D]>,
}

pub type Basis1d = ScaledMonomialBasis<1>;
pub type Basis2d = ScaledMonomialBasis<2>;

/// `dim P_p` in two variables.
#[inline]
pub const fn dim_p2(p: u32) -> usize {
    ((p + 1) * (p + 2) / 2) as usize
}

/// Position of `xi^a tau^b` in a two-variable basis.
#[inline]
pub const fn index_2d(a: u32, b: u32) -> usize {
    let k = a + b;
    (k * (k + 1) / 2 + b) as usize
}

/// Exponents of the two-variable basis of degree `p`, in basis order.
pub fn exponents_2d(p: u32) -> Vec<[u32; 2]> {
    let mut out = Vec::with_capacity(dim_p2(p));
    for k in 0..=p {
        for b in 0..=k {
            out.push([k - b, b]);
        }
    }
    out
}

/// Basis of `P_p` on the rectangle `x_iv x t_iv`.
pub fn basis_2d(p: u32, x_iv: Interval, t_iv: Interval) -> Result<Basis2d> {
    if p == 0 {
        return Err(StvemError::InvalidDegree(p));
    }
    Ok(ScaledMonomialBasis {
        degree: p,
        center: [x_iv.mid(), t_iv.mid()],
        scale: [x_iv.len(), t_iv.len()],
        exponents: exponents_2d(p),
    })
}

/// Basis of `P_p` on an interval.
pub fn basis_1d(p: u32, iv: Interval) -> Basis1d {
    ScaledMonomialBasis {
        degree: p,
        center: [iv.mid()],
        scale: [iv.len()],
        exponents: (0..=p).map(|a| [a]).collect(),
    }
}

impl<const D: usize> ScaledMonomialBasis<D> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> &[[u32; D]] {
        &self.exponents
    }

    pub fn center(&self) -> [f64; D] {
        self.center
    }

    pub fn scale(&self) -> [f64; D] {
        self.scale
    }

    /// Lebesgue measure of the basis domain.
    pub fn measure(&self) -> f64 {
        self.scale.iter().product()
    }

    fn reference_powers(&self, pt: [f64; D]) -> [Vec<f64>; D] {
        std::array::from_fn(|d| {
            let s = (pt[d] - self.center[d]) / self.scale[d];
            let mut pw = Vec::with_capacity(self.degree as usize + 1);
            let mut acc = 1.0;
            for _ in 0..=self.degree {
                pw.push(acc);
                acc *= s;
            }
            pw
        })
    }

    /// Values of all members at `pt`.
    pub fn eval(&self, pt: [f64; D]) -> Vec<f64> {
        let pw = self.reference_powers(pt);
        self.exponents
            .iter()
            .map(|e| (0..D).map(|d| pw[d][e[d] as usize]).product())
            .collect()
    }

    /// Values of the partial derivative along `axis` of all members at `pt`.
    pub fn eval_deriv(&self, pt: [f64; D], axis: usize) -> Vec<f64> {
        let pw = self.reference_powers(pt);
        self.exponents
            .iter()
            .map(|e| {
                if e[axis] == 0 {
                    return 0.0;
                }
                let mut v = f64::from(e[axis]) / self.scale[axis];
                for d in 0..D {
                    let k = if d == axis { e[d] - 1 } else { e[d] };
                    v *= pw[d][k as usize];
                }
                v
            })
            .collect()
    }

    /// Evaluates `sum_i coeffs[i] m_i(pt)`.
    pub fn eval_combination(&self, coeffs: &[f64], pt: [f64; D]) -> f64 {
        debug_assert_eq!(coeffs.len(), self.dim());
        self.eval(pt).iter().zip(coeffs).map(|(m, c)| m * c).sum()
    }
}

/// Nodes and weights of a quadrature rule on a `D`-dimensional box.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<const D: usize> {
    pub nodes: Vec<[f64; D]>,
    pub weights: Vec<f64>,
}

pub type Rule1d = QuadratureRule<1>;
pub type Rule2d = QuadratureRule<2>;

impl<const D: usize> QuadratureRule<D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut([f64; D]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; D], f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

impl Rule1d {
    /// Tensor product with a second one-dimensional rule.
    pub fn tensor(&self, other: &Rule1d) -> Rule2d {
        let mut nodes = Vec::with_capacity(self.len() * other.len());
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for (x, wx) in self.iter() {
            for (t, wt) in other.iter() {
                nodes.push([x[0], t[0]]);
                weights.push(wx * wt);
            }
        }
        QuadratureRule { nodes, weights }
    }
}

const MAX_CACHED_POINTS: usize = 64;

/// Gauss-Legendre nodes/weights on `[-1/2, 1/2]`.
fn reference_gauss(n: usize) -> &'static [(f64, f64)] {
    static CACHE: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let table = CACHE.get_or_init(|| {
        (0..=MAX_CACHED_POINTS)
            .map(|k| match NonZeroUsize::new(k) {
                None => Vec::new(),
                Some(k) => {
                    let mut pairs: Vec<(f64, f64)> = gauss_quad::GaussLegendre::new(k)
                        .iter()
                        .map(|(x, w)| (0.5 * x, 0.5 * w))
                        .collect();
                    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                    pairs
                }
            })
            .collect()
    });
    assert!(
        (1..=MAX_CACHED_POINTS).contains(&n),
        "gauss rule with {n} points not supported"
    );
    &table[n]
}

/// `n`-point Gauss-Legendre rule on `iv`, exact up to degree `2n - 1`.
pub fn gauss_rule(n: usize, iv: Interval) -> Rule1d {
    let h = iv.len();
    let (nodes, weights) = reference_gauss(n)
        .iter()
        .map(|&(s, w)| ([iv.from_ref(s)], w * h))
        .unzip();
    QuadratureRule { nodes, weights }
}

/// Which endpoint of an interval carries the singularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularEnd {
    Lo,
    Hi,
}

/// Ratio between consecutive layers of a graded rule.
pub const GRADING_RATIO: f64 = 0.15;

/// Composite Gauss rule on `layers` subintervals that shrink geometrically
/// (ratio [`GRADING_RATIO`]) toward `singular_end`.
///
/// The subinterval breakpoints sit at normalized distances `0.15^k`,
/// `k = 1, ..., layers - 1`, from the singular endpoint; `layers = 1` is the
/// plain `n`-point rule. The `j`-th layer counted from the singular end uses
/// `n + j / 10` points, so the outer layers, which carry most of the
/// integral, are resolved slightly better. Layers that underflow to zero
/// width are dropped.
pub fn graded_rule(iv: Interval, singular_end: SingularEnd, layers: usize, n: usize) -> Rule1d {
    let cells = graded_cells(iv, singular_end, layers);
    let mut rule = QuadratureRule {
        nodes: Vec::with_capacity(cells.len() * (n + 3)),
        weights: Vec::with_capacity(cells.len() * (n + 3)),
    };
    for (j, cell) in cells {
        let g = gauss_rule(n + j / 10, cell);
        rule.nodes.extend(g.nodes);
        rule.weights.extend(g.weights);
    }
    rule
}

/// Cells of the geometric partition used by [`graded_rule`], each tagged
/// with its layer index counted from the singular end.
pub fn graded_cells(iv: Interval, singular_end: SingularEnd, layers: usize) -> Vec<(usize, Interval)> {
    let layers = layers.max(1);
    let mut cuts = Vec::with_capacity(layers + 1);
    cuts.push(0.0);
    for k in (1..layers).rev() {
        cuts.push(GRADING_RATIO.powi(k as i32));
    }
    cuts.push(1.0);
    let h = iv.len();
    cuts.windows(2)
        .enumerate()
        .filter_map(|(j, w)| {
            let (lo, hi) = match singular_end {
                SingularEnd::Lo => (iv.lo + w[0] * h, iv.lo + w[1] * h),
                SingularEnd::Hi => (iv.hi - w[1] * h, iv.hi - w[0] * h),
            };
            (lo < hi).then(|| (j, Interval::raw(lo, hi)))
        })
        .collect()
}

/// Chooses one-dimensional rules for integrals over a rectangle
/// `x_iv x t_iv` carrying polynomials of degree `p`.
pub trait QuadPolicy: Sync {
    /// Rules along `x` and along `t`.
    fn rules(&self, x_iv: Interval, t_iv: Interval, p: u32) -> (Rule1d, Rule1d);

    fn rule_2d(&self, x_iv: Interval, t_iv: Interval, p: u32) -> Rule2d {
        let (rx, rt) = self.rules(x_iv, t_iv, p);
        rx.tensor(&rt)
    }
}

/// Plain Gauss rules with `p + 4 + extra` points per direction.
#[derive(Clone, Copy, Debug, Default)]
pub struct PlainGauss {
    pub extra: usize,
}

impl QuadPolicy for PlainGauss {
    fn rules(&self, x_iv: Interval, t_iv: Interval, p: u32) -> (Rule1d, Rule1d) {
        let n = p as usize + 4 + self.extra;
        (gauss_rule(n, x_iv), gauss_rule(n, t_iv))
    }
}

/// Measure-normalized moments `(1/|D|) int_D f m_i` of `f` against every
/// member of `basis`, evaluated with `rule`.
pub fn moments<const D: usize>(
    f: impl Fn([f64; D]) -> f64,
    basis: &ScaledMonomialBasis<D>,
    rule: &QuadratureRule<D>,
) -> Vec<f64> {
    let mut out = vec![0.0; basis.dim()];
    for (pt, w) in rule.iter() {
        let fw = w * f(pt);
        for (o, m) in out.iter_mut().zip(basis.eval(pt)) {
            *o += fw * m;
        }
    }
    let inv = 1.0 / basis.measure();
    out.iter_mut().for_each(|o| *o *= inv);
    out
}

/// `int_{-1/2}^{1/2} s^n ds`.
#[inline]
pub fn ref_monomial_integral(n: u32) -> f64 {
    if n % 2 == 1 {
        0.0
    } else {
        0.5_f64.powi(n as i32) / f64::from(n + 1)
    }
}

/// `int_a^b s^n ds`.
#[inline]
pub fn monomial_integral(n: u32, a: f64, b: f64) -> f64 {
    (b.powi(n as i32 + 1) - a.powi(n as i32 + 1)) / f64::from(n + 1)
}

/// Binomial coefficient as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn dimensions_of_bases() {
        for (p, dim) in [(1, 3), (2, 6), (3, 10)] {
            assert_eq!(basis_2d(p, unit(), unit()).unwrap().dim(), dim);
        }
        assert_eq!(basis_1d(0, unit()).dim(), 1);
        assert_eq!(basis_1d(2, unit()).dim(), 3);
        assert!(matches!(
            basis_2d(0, unit(), unit()),
            Err(StvemError::InvalidDegree(0))
        ));
    }

    #[test]
    fn linear_1d_basis_on_unit_interval() {
        let b = basis_1d(1, unit());
        let v = b.eval([0.8]);
        assert_relative_eq!(v[0], 1.0);
        assert_relative_eq!(v[1], 0.8 - 0.5, epsilon = 1e-15);
        assert_eq!(basis_1d(0, unit()).eval([0.3]), vec![1.0]);
    }

    #[test]
    fn index_matches_exponent_list() {
        for (i, e) in exponents_2d(5).iter().enumerate() {
            assert_eq!(index_2d(e[0], e[1]), i);
        }
    }

    #[test]
    fn derivative_of_scaled_monomial() {
        let b = basis_2d(2, Interval::new(1.0, 3.0).unwrap(), unit()).unwrap();
        // xi^2 with xi = (x - 2)/2; d/dx = 2 xi / 2 = xi
        let i = index_2d(2, 0);
        let d = b.eval_deriv([2.5, 0.1], 0);
        assert_relative_eq!(d[i], 0.25, epsilon = 1e-15);
        assert_eq!(b.eval_deriv([2.5, 0.1], 1)[i], 0.0);
    }

    #[test]
    fn gauss_examples() {
        assert_relative_eq!(gauss_rule(2, unit()).integrate(|x| x[0].powi(3)), 0.25, epsilon = 1e-15);
        assert_relative_eq!(
            gauss_rule(1, Interval::new(-1.0, 1.0).unwrap()).integrate(|_| 1.0),
            2.0
        );
        assert_relative_eq!(
            gauss_rule(5, unit()).integrate(|x| x[0].powi(8)),
            1.0 / 9.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn graded_rule_integrates_weak_singularity() {
        let iv = Interval::new(0.0, 0.1).unwrap();
        let rule = graded_rule(iv, SingularEnd::Lo, 30, 10);
        let exact = 0.1_f64.powf(0.55) / 0.55;
        let approx = rule.integrate(|t| t[0].powf(-0.45));
        assert!(((approx - exact) / exact).abs() <= 1e-8, "{approx} vs {exact}");

        let hi = graded_rule(Interval::new(-0.1, 0.0).unwrap(), SingularEnd::Hi, 30, 10);
        let approx = hi.integrate(|t| (-t[0]).powf(-0.45));
        assert!(((approx - exact) / exact).abs() <= 1e-8);
    }

    #[test]
    fn graded_rule_smooth_and_single_layer() {
        let iv = Interval::new(0.2, 1.7).unwrap();
        let f = |x: [f64; 1]| (3.0 * x[0]).sin() + x[0].powi(4);
        let plain = gauss_rule(12, iv).integrate(f);
        let graded = graded_rule(iv, SingularEnd::Hi, 30, 12).integrate(f);
        assert_relative_eq!(plain, graded, max_relative = 1e-12);
        assert_eq!(graded_rule(iv, SingularEnd::Lo, 1, 4), gauss_rule(4, iv));
    }

    #[test]
    fn moment_examples() {
        let b = basis_1d(3, unit());
        let rule = gauss_rule(10, unit());
        assert_relative_eq!(moments(|_| 1.0, &b, &rule)[0], 1.0, epsilon = 1e-15);
        let m = moments(|x| (std::f64::consts::PI * x[0]).sin(), &b, &rule);
        assert_relative_eq!(m[0], 2.0 / std::f64::consts::PI, epsilon = 1e-12);

        // moments of a basis member give the normalized Gram row
        let self_m = moments(|x| b.eval(x)[2], &b, &rule);
        for (j, v) in self_m.iter().enumerate() {
            assert_relative_eq!(*v, ref_monomial_integral(2 + j as u32), epsilon = 1e-15);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
    }
}
