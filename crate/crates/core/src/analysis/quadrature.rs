//! Quadrature adapted to the singular behaviour of the test solutions.

use super::exact::QuadHints;
use crate::polybasis::{
    gauss_rule, graded_cells, Interval, QuadPolicy, QuadratureRule, Rule1d, Rule2d, SingularEnd,
};

/// Gauss rules with `p + 4 + extra` points, graded toward `t = 0` and the
/// bottom corners when the hints ask for it, and subdivided in `x` so that
/// every live Fourier mode is resolved.
#[derive(Clone, Debug)]
pub struct GradedPolicy {
    pub hints: QuadHints,
    pub extra: usize,
    pub layers: usize,
}

impl GradedPolicy {
    pub fn new(hints: QuadHints) -> Self {
        Self {
            hints,
            extra: 0,
            layers: 24,
        }
    }

    pub fn with_extra(mut self, extra: usize) -> Self {
        self.extra = extra;
        self
    }

    fn points(&self, p: u32) -> usize {
        p as usize + 4 + self.extra
    }

    fn at_start(&self, t_iv: Interval) -> bool {
        self.hints.time_zero && t_iv.lo <= 1e-14 * t_iv.len()
    }

    /// Graded cells of `x_iv` toward the corners it touches; an interval
    /// touching two corners is halved and graded both ways.
    fn corner_cells(&self, x_iv: Interval) -> Vec<(usize, Interval)> {
        let tol = 1e-12 * x_iv.len();
        let near = |x: f64| self.hints.corners.iter().any(|&c| (x - c).abs() <= tol);
        match (near(x_iv.lo), near(x_iv.hi)) {
            (true, true) => {
                let m = x_iv.mid();
                let mut cells = graded_cells(Interval::raw(x_iv.lo, m), SingularEnd::Lo, self.layers);
                cells.extend(graded_cells(Interval::raw(m, x_iv.hi), SingularEnd::Hi, self.layers));
                cells
            }
            (true, false) => graded_cells(x_iv, SingularEnd::Lo, self.layers),
            (false, true) => graded_cells(x_iv, SingularEnd::Hi, self.layers),
            (false, false) => vec![(0, x_iv)],
        }
    }

    /// Composite `x` rule: graded toward a corner if asked, with no cell
    /// wider than a third of the period of the fastest squared mode alive
    /// at `t`.
    fn x_rule(&self, x_iv: Interval, t: f64, graded: bool, n: usize) -> Rule1d {
        let cells = if graded {
            self.corner_cells(x_iv)
        } else {
            vec![(0, x_iv)]
        };
        let max_w = match self.hints.spectrum {
            Some(s) => 1.0 / (3.0 * s.active(t)),
            None => f64::INFINITY,
        };
        let mut rule = QuadratureRule {
            nodes: Vec::new(),
            weights: Vec::new(),
        };
        for (j, cell) in cells {
            let pieces = (cell.len() / max_w).ceil().max(1.0) as usize;
            let w = cell.len() / pieces as f64;
            for i in 0..pieces {
                let lo = cell.lo + i as f64 * w;
                let hi = if i + 1 == pieces { cell.hi } else { lo + w };
                let g = gauss_rule(n + j / 10, Interval::raw(lo, hi));
                rule.nodes.extend(g.nodes);
                rule.weights.extend(g.weights);
            }
        }
        rule
    }
}

impl QuadPolicy for GradedPolicy {
    fn rules(&self, x_iv: Interval, t_iv: Interval, p: u32) -> (Rule1d, Rule1d) {
        let n = self.points(p);
        let start = self.at_start(t_iv);
        let rt = if start {
            let mut rule = QuadratureRule {
                nodes: Vec::new(),
                weights: Vec::new(),
            };
            // the layers resolve exp(-lambda t) for a range of lambda at
            // once, which needs a few more points than the polynomial part
            for (j, cell) in graded_cells(t_iv, SingularEnd::Lo, self.layers) {
                let g = gauss_rule(n + 4 + j / 10, cell);
                rule.nodes.extend(g.nodes);
                rule.weights.extend(g.weights);
            }
            rule
        } else {
            gauss_rule(n, t_iv)
        };
        (self.x_rule(x_iv, t_iv.lo, start, n), rt)
    }

    /// On elements resting on `t = 0` the `x` resolution follows the decay
    /// of the spectrum from one time node to the next.
    fn rule_2d(&self, x_iv: Interval, t_iv: Interval, p: u32) -> Rule2d {
        let (rx, rt) = self.rules(x_iv, t_iv, p);
        if !self.at_start(t_iv) || self.hints.spectrum.is_none() {
            return rx.tensor(&rt);
        }
        let n = self.points(p);
        let mut rule = QuadratureRule {
            nodes: Vec::new(),
            weights: Vec::new(),
        };
        let mut cached: Option<(usize, Rule1d)> = None;
        for (t, wt) in rt.iter() {
            let s = self.hints.spectrum.expect("checked above");
            let key = (3.0 * x_iv.len() * s.active(t[0])).ceil() as usize;
            if cached.as_ref().is_none_or(|(k, _)| *k != key) {
                cached = Some((key, self.x_rule(x_iv, t[0], true, n)));
            }
            let (_, rx) = cached.as_ref().expect("filled");
            for (x, wx) in rx.iter() {
                rule.nodes.push([x[0], t[0]]);
                rule.weights.push(wx * wt);
            }
        }
        rule
    }
}
