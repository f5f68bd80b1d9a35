//! Doerfler marking, the adaptive SOLVE -> ESTIMATE -> MARK -> REFINE loop and
//! the prescribed mesh sequences of the uniform and hp studies.

use std::time::Instant;

use crate::analysis::{
    compute_errors, indicator, test_case, DiscreteFields, ErrorOptions, ErrorReport, ExactSolution,
    GradedPolicy, IndicatorReport,
};
use crate::assembly::{build_dof_map, solve_slabs, Discretization, ReferenceCache, SolveOptions};
use crate::error::{Result, StvemError};
use crate::mesh::{cartesian_mesh, graded_mesh_t, graded_mesh_xt, ElementId, SpaceTimeMesh};

/// Minimal set of elements carrying the fraction `theta` of `sum eta_K^2`.
///
/// `eta_sq` holds the squared local indicators. Elements are taken in
/// decreasing order of `eta_K^2`, ties by ascending id, until the marked part
/// reaches `theta` times the total. The result is sorted by id.
pub fn doerfler_mark(eta_sq: &[(ElementId, f64)], theta: f64) -> Result<Vec<ElementId>> {
    if eta_sq.is_empty() {
        return Err(StvemError::EmptyMesh);
    }
    check_theta(theta)?;
    if let Some(&(id, v)) = eta_sq.iter().find(|(_, v)| !(*v >= 0.0) || !v.is_finite()) {
        return Err(StvemError::invalid("eta", format!("element {} has eta^2 = {v}", id.0)));
    }
    let mut order: Vec<(ElementId, f64)> = eta_sq.to_vec();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    // summing in the same order makes theta = 1 reachable exactly
    let total: f64 = order.iter().map(|e| e.1).sum();
    let target = theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for (id, v) in order {
        if acc >= target {
            break;
        }
        acc += v;
        marked.push(id);
    }
    marked.sort();
    Ok(marked)
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(StvemError::invalid("theta", format!("{theta} is not in (0, 1]")))
    }
}

/// What to compute at every step of a study.
#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    pub compute_en: bool,
    /// Share local matrices between congruent elements.
    pub use_cache: bool,
    /// Extra quadrature points on top of the graded default.
    pub quad_extra: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            compute_en: true,
            use_cache: true,
            quad_extra: 0,
        }
    }
}

/// One row of a study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub step: usize,
    pub n_dofs: usize,
    pub ey: f64,
    pub en: Option<f64>,
    pub eu: f64,
    pub ex: Option<f64>,
    pub eta_parts: [f64; 5],
    pub eta: f64,
    pub effectivity: f64,
    pub n_elements: usize,
    pub n_slabs: usize,
    pub n_ref_elements: usize,
    /// Wall time of solve and estimate.
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
}

/// Everything computed on one mesh.
pub struct Evaluation {
    pub row: StudyRow,
    pub disc: Discretization,
    pub solution: Vec<f64>,
    pub errors: ErrorReport,
    pub indicator: IndicatorReport,
}

impl Evaluation {
    /// `(id, eta_K^2)` in leaf order.
    pub fn eta_sq(&self, mesh: &SpaceTimeMesh) -> Vec<(ElementId, f64)> {
        mesh.leaves()
            .iter()
            .copied()
            .zip(self.indicator.element_sq())
            .collect()
    }

    /// Relative change of `E^Y` when every rule gets `extra` more points.
    pub fn quadrature_drift(&self, mesh: &SpaceTimeMesh, exact: &ExactSolution, opts: EvalOptions, extra: usize) -> Result<f64> {
        let policy = GradedPolicy::new(exact.hints.clone()).with_extra(opts.quad_extra + extra);
        let fields = DiscreteFields::new(&self.disc, &self.solution);
        let finer = compute_errors(mesh, &self.disc, &fields, exact, &policy, ErrorOptions { compute_en: false })?;
        Ok((finer.ey - self.errors.ey).abs() / finer.ey)
    }
}

/// SOLVE and ESTIMATE on one mesh.
pub fn evaluate(
    step: usize,
    mesh: &SpaceTimeMesh,
    exact: &ExactSolution,
    cache: &mut ReferenceCache,
    opts: EvalOptions,
) -> Result<Evaluation> {
    let start = Instant::now();
    let data = &exact.data;
    let disc = Discretization::new(mesh, data.nu, data.c_h, opts.use_cache.then_some(cache))?;
    let policy = GradedPolicy::new(exact.hints.clone()).with_extra(opts.quad_extra);
    let solution = solve_slabs(mesh, &disc, data, &policy, SolveOptions::default())?;
    let fields = DiscreteFields::new(&disc, &solution);
    let errors = compute_errors(
        mesh,
        &disc,
        &fields,
        exact,
        &policy,
        ErrorOptions {
            compute_en: opts.compute_en,
        },
    )?;
    let ind = indicator(mesh, &disc, &fields, data, &policy);
    let row = StudyRow {
        step,
        n_dofs: disc.dofs.n_dofs,
        ey: errors.ey,
        en: errors.en,
        eu: errors.eu,
        ex: errors.ex,
        eta_parts: ind.parts,
        eta: ind.eta,
        effectivity: ind.effectivity(errors.ey),
        n_elements: mesh.n_leaves(),
        n_slabs: mesh.slab_count(),
        n_ref_elements: mesh.class_count(),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok(Evaluation {
        row,
        disc,
        solution,
        errors,
        indicator: ind,
    })
}

/// Evaluates a prescribed mesh sequence, sharing one reference cache.
/// `observer` sees each mesh with its evaluation.
pub fn run_sequence(
    meshes: &[SpaceTimeMesh],
    exact: &ExactSolution,
    opts: EvalOptions,
    mut observer: impl FnMut(&SpaceTimeMesh, &Evaluation) -> Result<()>,
) -> Result<StudyReport> {
    let mut cache = ReferenceCache::new();
    let mut report = StudyReport::default();
    for (i, mesh) in meshes.iter().enumerate() {
        let step = i + 1;
        let ev = evaluate(step, mesh, exact, &mut cache, opts).map_err(|e| step_failed(step, e))?;
        observer(mesh, &ev)?;
        report.rows.push(ev.row);
    }
    Ok(report)
}

fn step_failed(step: usize, e: StvemError) -> StvemError {
    StvemError::StepFailed {
        step,
        source: Box::new(e),
    }
}

/// Uniform meshes with `nx 2^i x nt 2^i` cells, `i = 0, ..., levels - 1`.
pub fn uniform_sequence(exact: &ExactSolution, nx: usize, nt: usize, levels: usize, p: u32) -> Result<Vec<SpaceTimeMesh>> {
    if levels == 0 {
        return Err(StvemError::invalid("levels", "must be at least 1"));
    }
    (0..levels)
        .map(|i| cartesian_mesh(exact.omega, exact.t_final, nx << i, nt << i, p))
        .collect()
}

/// Geometric grading used by an hp study. Level `L` has `L` time layers
/// with degrees `1, ..., L` from the bottom up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HpGrading {
    /// Fixed spatial width, time layers graded towards `t = 0`.
    Time { h_x: f64, sigma_t: f64 },
    /// Grading towards both spatial ends and `t = 0`.
    SpaceTime { sigma_x: f64, sigma_t: f64 },
}

impl HpGrading {
    /// The grading used for the singular test cases: 2 (in time) and 3 (in
    /// space and time).
    pub fn for_test(test: u32) -> Result<Self> {
        match test {
            2 => Ok(Self::Time {
                h_x: 0.05,
                sigma_t: 0.1,
            }),
            3 => Ok(Self::SpaceTime {
                sigma_x: 0.25,
                sigma_t: 0.25,
            }),
            _ => Err(StvemError::invalid("test_case", format!("no hp grading for test {test}"))),
        }
    }
}

pub fn hp_sequence(exact: &ExactSolution, grading: HpGrading, levels: usize) -> Result<Vec<SpaceTimeMesh>> {
    if levels == 0 {
        return Err(StvemError::invalid("levels", "must be at least 1"));
    }
    (1..=levels)
        .map(|l| {
            let degrees: Vec<u32> = (1..=l as u32).collect();
            match grading {
                HpGrading::Time { h_x, sigma_t } => graded_mesh_t(exact.omega, exact.t_final, h_x, sigma_t, &degrees),
                HpGrading::SpaceTime { sigma_x, sigma_t } => {
                    graded_mesh_xt(exact.omega, exact.t_final, sigma_x, sigma_t, &degrees)
                }
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct AdaptiveConfig {
    pub theta: f64,
    pub max_steps: usize,
    /// No mesh with more DoFs than this is solved.
    pub max_dofs: usize,
    pub degree: u32,
    pub test_case: u32,
    pub alpha: Option<f64>,
    pub eval: EvalOptions,
}

impl AdaptiveConfig {
    pub fn new(test_case: u32, alpha: Option<f64>, degree: u32, theta: f64) -> Self {
        Self {
            theta,
            max_steps: 25,
            max_dofs: 200_000,
            degree,
            test_case,
            alpha,
            eval: EvalOptions {
                compute_en: false,
                ..EvalOptions::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        if self.max_steps == 0 {
            return Err(StvemError::invalid("max_steps", "must be at least 1"));
        }
        if self.degree == 0 {
            return Err(StvemError::invalid("p", "must be at least 1"));
        }
        Ok(())
    }
}

/// Passed to the observer of [`adapt_loop_with`] after each MARK step.
pub struct StepView<'a> {
    pub step: usize,
    pub mesh: &'a SpaceTimeMesh,
    pub eval: &'a Evaluation,
    /// Empty on the last step.
    pub marked: &'a [ElementId],
    pub cache_len: usize,
}

#[derive(Debug)]
pub struct AdaptiveOutcome {
    pub report: StudyReport,
    pub mesh: SpaceTimeMesh,
}

/// Adaptive loop for the configured test case, started from the one-element
/// mesh of the space-time domain.
pub fn adapt_loop(config: &AdaptiveConfig) -> Result<AdaptiveOutcome> {
    config.validate()?;
    let exact = test_case(config.test_case, config.alpha)?;
    let mesh0 = cartesian_mesh(exact.omega, exact.t_final, 1, 1, config.degree)?;
    adapt_loop_with(config, &exact, mesh0, |_| Ok(()))
}

/// SOLVE -> ESTIMATE -> MARK -> REFINE from `mesh0` until `max_steps` meshes
/// were solved or the next mesh would exceed `max_dofs`.
pub fn adapt_loop_with(
    config: &AdaptiveConfig,
    exact: &ExactSolution,
    mut mesh: SpaceTimeMesh,
    mut observer: impl FnMut(StepView<'_>) -> Result<()>,
) -> Result<AdaptiveOutcome> {
    config.validate()?;
    let mut cache = ReferenceCache::new();
    let mut report = StudyReport::default();
    for step in 1..=config.max_steps {
        let ev = evaluate(step, &mesh, exact, &mut cache, config.eval).map_err(|e| step_failed(step, e))?;
        let marked = if step < config.max_steps {
            doerfler_mark(&ev.eta_sq(&mesh), config.theta)?
        } else {
            Vec::new()
        };
        let next = if marked.is_empty() {
            None
        } else {
            let next = mesh.refine(&marked).map_err(|e| step_failed(step, e))?;
            (build_dof_map(&next).n_dofs <= config.max_dofs).then_some(next)
        };
        let shown: &[ElementId] = if next.is_some() { &marked } else { &[] };
        observer(StepView {
            step,
            mesh: &mesh,
            eval: &ev,
            marked: shown,
            cache_len: cache.len(),
        })?;
        report.rows.push(ev.row);
        match next {
            Some(m) => mesh = m,
            None => break,
        }
    }
    Ok(AdaptiveOutcome { report, mesh })
}

#[cfg(test)]
mod tests;
