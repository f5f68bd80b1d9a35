//! Validation studies behind the acceptance suite.
//!
//! Every criterion produces an [`Outcome`]; the numerical studies they share
//! are run once by [`Studies::run`].

use std::fmt;

use nalgebra::DMatrix;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use stvem::adaptivity::{
    adapt_loop_with, evaluate, hp_sequence, run_sequence, uniform_sequence, AdaptiveConfig, EvalOptions, HpGrading,
    StudyReport, StudyRow,
};
use stvem::analysis::{compute_errors, test_case, DiscreteFields, ErrorOptions, ExactSolution};
use stvem::assembly::{solve_monolithic, solve_slabs, Discretization, ReferenceCache, SolveOptions};
use stvem::local_vem::{LocalElement, LocalFacet, ProjectorSet, Side};
use stvem::mesh::{cartesian_mesh, ElementId, SpaceTimeMesh};
use stvem::polybasis::{dim_p2, Interval, PlainGauss};
use stvem::Result;
use stvem_cli::rates::{algebraic_fit, exponential_fit};

pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} criterion {:2} {}: {}", self.id, self.name, self.detail)
    }
}

fn outcome(id: u32, name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, name, pass, detail }
}

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).expect("valid interval")
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn draw<S: Strategy>(runner: &mut TestRunner, s: S) -> S::Value {
    s.new_tree(runner).expect("strategy").current()
}

/// Rectangle at a random place and scale, with `0..=3` splits per vertical
/// side and facet degrees `p` or `p + 1`.
pub fn random_element(runner: &mut TestRunner) -> LocalElement {
    let side = || proptest::collection::vec((0.2f64..1.0, 0u32..=1, 0.25f64..=1.0), 1..=4);
    let (p, x0, lx, t0, lt, left, right) = draw(
        runner,
        (1u32..=4, -5.0f64..5.0, -3.0f64..0.0, 0.0f64..5.0, -3.0f64..0.0, side(), side()),
    );
    let (hx, ht) = (10f64.powf(lx), 10f64.powf(lt));
    let t_iv = iv(t0, t0 + ht);
    let mut facets = Vec::new();
    for (s, pieces) in [(Side::Left, left), (Side::Right, right)] {
        let total: f64 = pieces.iter().map(|w| w.0).sum();
        let mut lo = 0.0;
        for (i, &(w, dp, r)) in pieces.iter().enumerate() {
            let hi = if i + 1 == pieces.len() { 1.0 } else { lo + w / total };
            facets.push(LocalFacet {
                id: facets.len(),
                side: s,
                t_iv: iv(t0 + lo * ht, t0 + hi * ht),
                degree: p + dp,
                h_fx: hx * r,
            });
            lo = hi;
        }
    }
    LocalElement {
        x_iv: iv(x0, x0 + hx),
        t_iv,
        degree: p,
        facets,
    }
}

/// Cartesian mesh of the unit square after a few rounds of random local
/// refinement, so that hanging nodes appear on both kinds of facet.
pub fn random_mesh(runner: &mut TestRunner, p: u32) -> SpaceTimeMesh {
    let (nx, nt, rounds) = draw(runner, (1usize..=3, 1usize..=3, 1usize..=4));
    let mut m = cartesian_mesh(iv(0.0, 1.0), 1.0, nx, nt, p).expect("mesh");
    for _ in 0..rounds {
        let picks = draw(runner, proptest::collection::vec(proptest::num::usize::ANY, 1..4));
        let n = m.n_leaves();
        let mut marked: Vec<ElementId> = picks.iter().map(|&i| m.leaves()[i % n]).collect();
        marked.sort();
        marked.dedup();
        m.refine_in_place(&marked).expect("refine");
    }
    m
}

/// `sum c_ab x^a t^b` over `a + b <= p` with random coefficients.
pub fn random_polynomial(runner: &mut TestRunner, p: u32) -> ExactSolution {
    let p = p as i32;
    let exps: Vec<(i32, i32)> = (0..=p).flat_map(|a| (0..=p - a).map(move |b| (a, b))).collect();
    let cs = draw(runner, proptest::collection::vec(-1.0f64..1.0, exps.len()));
    let terms: std::sync::Arc<Vec<(i32, i32, f64)>> =
        std::sync::Arc::new(exps.iter().zip(cs).map(|(&(a, b), c)| (a, b, c)).collect());
    let d = move |dx: i32, dt: i32| {
        let terms = terms.clone();
        move |x: f64, t: f64| {
            let fall = |n: i32, k: i32| (0..k).map(|i| f64::from(n - i)).product::<f64>();
            terms
                .iter()
                .filter(|(a, b, _)| *a >= dx && *b >= dt)
                .map(|&(a, b, c)| c * fall(a, dx) * fall(b, dt) * x.powi(a - dx) * t.powi(b - dt))
                .sum::<f64>()
        }
    };
    ExactSolution::polynomial("random polynomial", d(0, 0), d(1, 0), d(0, 1), d(2, 0))
}

pub fn criterion_1() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let (mut worst_n, mut worst_star, mut rank_failures) = (0.0f64, 0.0f64, 0);
    for _ in 0..1000 {
        let e = random_element(&mut runner);
        let proj = ProjectorSet::new(&e).expect("projectors");
        let n = dim_p2(e.degree);
        let id = DMatrix::<f64>::identity(n, n);
        worst_n = worst_n.max(max_abs(&(&proj.pi_n * &proj.d - &id)));
        worst_star = worst_star.max(max_abs(&(&proj.pi_star * &proj.d - &id)));
        if proj.d.rank(1e-10 * max_abs(&proj.d)) != n {
            rank_failures += 1;
        }
    }
    outcome(
        1,
        "projectors and unisolvence",
        worst_n <= 1e-10 && worst_star <= 1e-10 && rank_failures == 0,
        format!("1000 elements, max |Pi^N D - I| = {worst_n:.1e}, max |Pi* D - I| = {worst_star:.1e}, rank deficient: {rank_failures}"),
    )
}

pub fn criterion_2() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for p in 1..=3 {
        for _ in 0..5 {
            let mesh = random_mesh(&mut runner, p);
            let ex = random_polynomial(&mut runner, p);
            let policy = PlainGauss { extra: 2 };
            let disc = Discretization::new(&mesh, ex.data.nu, ex.data.c_h, Some(&mut ReferenceCache::new()))
                .expect("discretization");
            let u = solve_slabs(&mesh, &disc, &ex.data, &policy, SolveOptions::default()).expect("solve");
            let fields = DiscreteFields::new(&disc, &u);
            let err = compute_errors(&mesh, &disc, &fields, &ex, &policy, ErrorOptions { compute_en: false })
                .expect("errors");
            worst = worst.max(err.ey);
            cases += 1;
        }
    }
    outcome(
        2,
        "patch test",
        worst <= 1e-9,
        format!("{cases} refined meshes, p = 1..3, max E^Y = {worst:.1e}"),
    )
}

pub fn criterion_3() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let mut worst = 0.0f64;
    for k in 0..5 {
        let p = 1 + k % 3;
        let mesh = random_mesh(&mut runner, p);
        let ex = test_case(1, None).expect("test 1");
        let policy = PlainGauss { extra: 2 };
        let disc = Discretization::new(&mesh, ex.data.nu, ex.data.c_h, Some(&mut ReferenceCache::new()))
            .expect("discretization");
        let a = solve_slabs(&mesh, &disc, &ex.data, &policy, SolveOptions::default()).expect("slab solve");
        let b = solve_monolithic(&mesh, &disc, &ex.data, &policy).expect("monolithic solve");
        let scale = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let diff = a.iter().zip(&b).fold(0.0f64, |d, (x, y)| d.max((x - y).abs()));
        worst = worst.max(diff / scale);
    }
    outcome(
        3,
        "slab equivalence",
        worst <= 1e-9,
        format!("5 refined meshes, max relative difference {worst:.1e}"),
    )
}

fn ey_slope(rows: &[StudyRow]) -> f64 {
    let n: Vec<f64> = rows.iter().map(|r| r.n_dofs as f64).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.ey).collect();
    algebraic_fit(&n, &e).expect("three rows").slope
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

/// Everything the rate, hp, effectivity and adaptive criteria look at.
pub struct Studies {
    /// Test 2 h-version, `alpha = 0.55` (with `E^N`) and `alpha = 0.75`.
    pub h2: [StudyReport; 2],
    /// Test 3 h-version, with `E^N`.
    pub h3: StudyReport,
    pub hp2: StudyReport,
    pub hp3: StudyReport,
    /// Test 2, `p = 2`, uniform refinement of the one-element mesh.
    pub u2: StudyReport,
    pub ad2: AdaptiveRun,
    pub ad3: AdaptiveRun,
}

/// Adaptive study with the bookkeeping checks of every step.
pub struct AdaptiveRun {
    pub report: StudyReport,
    /// Largest relative mismatch between `eta^2`, `sum_i eta_i^2` and
    /// `sum_K eta_K^2`.
    pub bookkeeping: f64,
    pub markings: usize,
    /// Markings that were not minimal.
    pub non_minimal: usize,
}

/// Steps of the adaptive studies, as many as the reference flagging counts cover.
pub const ADAPTIVE_STEPS: usize = 12;

fn adaptive_run(test: u32, alpha: Option<f64>, p: u32, theta: f64) -> Result<AdaptiveRun> {
    let mut cfg = AdaptiveConfig::new(test, alpha, p, theta);
    cfg.max_steps = ADAPTIVE_STEPS;
    let ex = test_case(test, alpha)?;
    let mesh0 = cartesian_mesh(ex.omega, ex.t_final, 1, 1, p)?;
    let (mut bookkeeping, mut markings, mut non_minimal) = (0.0f64, 0, 0);
    let out = adapt_loop_with(&cfg, &ex, mesh0, |v| {
        let ind = &v.eval.indicator;
        let eta_sq = ind.eta * ind.eta;
        let by_part: f64 = ind.parts.iter().map(|e| e * e).sum();
        let sq = v.eval.eta_sq(v.mesh);
        let by_elem: f64 = sq.iter().map(|e| e.1).sum();
        bookkeeping = bookkeeping
            .max((eta_sq - by_part).abs() / eta_sq)
            .max((eta_sq - by_elem).abs() / eta_sq);
        if !v.marked.is_empty() {
            markings += 1;
            if !is_minimal(&sq, v.marked, theta) {
                non_minimal += 1;
            }
        }
        Ok(())
    })?;
    Ok(AdaptiveRun {
        report: out.report,
        bookkeeping,
        markings,
        non_minimal,
    })
}

/// The marked set carries the fraction `theta`, no smaller subset of it
/// does, and nothing left out is larger than a marked element.
pub fn is_minimal(eta_sq: &[(ElementId, f64)], marked: &[ElementId], theta: f64) -> bool {
    let total: f64 = eta_sq.iter().map(|e| e.1).sum();
    let value = |id: &ElementId| eta_sq.iter().find(|e| e.0 == *id).map(|e| e.1);
    let Some(values) = marked.iter().map(value).collect::<Option<Vec<f64>>>() else {
        return false;
    };
    let sum: f64 = values.iter().sum();
    let smallest = values.iter().copied().fold(f64::INFINITY, f64::min);
    let largest_left = eta_sq
        .iter()
        .filter(|e| !marked.contains(&e.0))
        .map(|e| e.1)
        .fold(0.0f64, f64::max);
    sum >= theta * total * (1.0 - 1e-12) && sum - smallest < theta * total && largest_left <= smallest
}

impl Studies {
    pub fn run() -> Result<Self> {
        let with_en = EvalOptions::default();
        let no_en = EvalOptions {
            compute_en: false,
            ..with_en
        };
        let study = |ex: &ExactSolution, meshes: Vec<SpaceTimeMesh>, opts| run_sequence(&meshes, ex, opts, |_, _| Ok(()));

        // h_t = 2 h_x = 0.2 2^{-i}, i = 1..6, on (0,1) x (0,0.1)
        let u2a = test_case(2, Some(0.55))?;
        let u2b = test_case(2, Some(0.75))?;
        let h2 = [
            study(&u2a, uniform_sequence(&u2a, 20, 1, 6, 1)?, with_en)?,
            study(&u2b, uniform_sequence(&u2b, 20, 1, 6, 1)?, no_en)?,
        ];
        // h_x = h_t / 2 = 2^{-i}, i = 1..8, on (0,1) x (0,1)
        let u3 = test_case(3, None)?;
        let h3 = study(&u3, uniform_sequence(&u3, 2, 1, 8, 1)?, with_en)?;
        let hp2 = study(&u2a, hp_sequence(&u2a, HpGrading::for_test(2)?, 7)?, with_en)?;
        let hp3 = study(&u3, hp_sequence(&u3, HpGrading::for_test(3)?, 7)?, with_en)?;
        let u2 = study(&u2a, uniform_sequence(&u2a, 1, 1, 7, 2)?, no_en)?;
        Ok(Self {
            h2,
            h3,
            hp2,
            hp3,
            u2,
            ad2: adaptive_run(2, Some(0.55), 2, 0.99)?,
            ad3: adaptive_run(3, None, 1, 0.9)?,
        })
    }
}

pub fn criterion_4(s: &Studies) -> Outcome {
    let (a, b) = (ey_slope(&s.h2[0].rows), ey_slope(&s.h2[1].rows));
    outcome(
        4,
        "test 2 h-version rates",
        within(a, -0.525, 0.10) && within(b, -0.625, 0.10),
        format!("E^Y slope {a:.3} for alpha = 0.55 (want -0.525 +- 0.10), {b:.3} for alpha = 0.75 (want -0.625 +- 0.10)"),
    )
}

pub fn criterion_5(s: &Studies) -> Outcome {
    let a = ey_slope(&s.h3.rows);
    outcome(
        5,
        "test 3 h-version rate",
        within(a, -0.125, 0.05),
        format!("E^Y slope {a:.3} (want -0.125 +- 0.05)"),
    )
}

/// `E^X` of an h-study at `n` DoFs, interpolated linearly in log-log
/// between the bracketing meshes (the end segment outside the range).
fn ex_at(rows: &[StudyRow], n: f64) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n_dofs as f64).ln(), r.ex.expect("E^X computed").ln()))
        .collect();
    let x = n.ln();
    let k = pts.windows(2).position(|w| x <= w[1].0).unwrap_or(pts.len() - 2);
    let ((x0, y0), (x1, y1)) = (pts[k], pts[k + 1]);
    (y0 + (y1 - y0) * (x - x0) / (x1 - x0)).exp()
}

pub fn criterion_6(s: &Studies) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, hp, h) in [("test 2", &s.hp2, &s.h2[0]), ("test 3", &s.hp3, &s.h3)] {
        let tail = &hp.rows[2..];
        let n: Vec<f64> = tail.iter().map(|r| r.n_dofs as f64).collect();
        let ex: Vec<f64> = tail.iter().map(|r| r.ex.expect("E^X computed")).collect();
        let fit = exponential_fit(&n, &ex).expect("five levels");
        let last = tail.last().expect("rows");
        let reference = ex_at(&h.rows, last.n_dofs as f64);
        let gain = reference / ex[ex.len() - 1];
        pass &= fit.r2 >= 0.98 && gain >= 10.0;
        parts.push(format!(
            "{name}: R^2 = {:.4} over levels 3..7, final E^X = {:.3e} at N = {} vs h-version {:.3e} ({gain:.1}x)",
            fit.r2, ex[ex.len() - 1], last.n_dofs, reference
        ));
    }
    outcome(6, "hp exponential convergence", pass, parts.join("; "))
}

/// Relative spread `max / min - 1` of the effectivity over the last three meshes.
fn effectivity_spread(rows: &[StudyRow]) -> f64 {
    let tail = &rows[rows.len() - 3..];
    let max = tail.iter().map(|r| r.effectivity).fold(f64::MIN, f64::max);
    let min = tail.iter().map(|r| r.effectivity).fold(f64::MAX, f64::min);
    max / min - 1.0
}

pub fn criterion_7() -> Result<Outcome> {
    let opts = EvalOptions {
        compute_en: false,
        ..EvalOptions::default()
    };
    let mut cases: Vec<(String, StudyReport)> = Vec::new();
    let u1 = test_case(1, None)?;
    for p in 1..=3 {
        let seq = uniform_sequence(&u1, 10, 10, 4, p)?;
        cases.push((format!("test 1 p = {p}"), run_sequence(&seq, &u1, opts, |_, _| Ok(()))?));
    }
    // test 2 starts from h_x = 10 h_t = 0.1
    let u2 = test_case(2, Some(0.55))?;
    let seq = uniform_sequence(&u2, 10, 10, 4, 2)?;
    cases.push(("test 2 p = 2".into(), run_sequence(&seq, &u2, opts, |_, _| Ok(()))?));
    let u3 = test_case(3, None)?;
    let seq = uniform_sequence(&u3, 10, 10, 4, 2)?;
    cases.push(("test 3 p = 2".into(), run_sequence(&seq, &u3, opts, |_, _| Ok(()))?));

    let mut pass = true;
    let parts: Vec<String> = cases
        .iter()
        .map(|(name, rep)| {
            let spread = effectivity_spread(&rep.rows);
            pass &= spread < 0.2;
            let last = rep.rows.last().expect("rows").effectivity;
            format!("{name}: spread {:.1}% (last {last:.3})", 100.0 * spread)
        })
        .collect();
    Ok(outcome(7, "effectivity flatness", pass, parts.join("; ")))
}

pub fn criterion_8(s: &Studies) -> Outcome {
    let a2 = ey_slope(&s.ad2.report.rows);
    let u2 = ey_slope(&s.u2.rows);
    let a3 = ey_slope(&s.ad3.report.rows);
    let u3 = ey_slope(&s.h3.rows);
    outcome(
        8,
        "adaptive rates",
        within(a2, -1.0, 0.15) && within(u2, -0.52, 0.10) && within(a3, -0.33, 0.07) && within(u3, -0.13, 0.05),
        format!(
            "test 2: adaptive {a2:.3} (want -1.0 +- 0.15), uniform {u2:.3} (want -0.52 +- 0.10); \
             test 3: adaptive {a3:.3} (want -0.33 +- 0.07), uniform {u3:.3} (want -0.13 +- 0.05)"
        ),
    )
}

/// Reference flagging counts per step: `(step, classes, elements, slabs)`.
pub const FLAG_TABLE_2: [(usize, usize, usize, usize); 6] =
    [(2, 1, 4, 2), (4, 1, 52, 5), (6, 16, 265, 10), (8, 19, 1189, 21), (10, 24, 5110, 45), (12, 24, 21883, 103)];
pub const FLAG_TABLE_3: [(usize, usize, usize, usize); 6] =
    [(2, 1, 4, 2), (4, 3, 22, 4), (6, 9, 91, 5), (8, 21, 361, 9), (10, 33, 1204, 13), (12, 35, 3493, 21)];

/// Class count of a table at `elements`, interpolated linearly in the log
/// of the element count; `None` outside the tabulated range.
fn table_classes(table: &[(usize, usize, usize, usize)], elements: usize) -> Option<f64> {
    let x = (elements as f64).ln();
    table.windows(2).find_map(|w| {
        let (x0, x1) = ((w[0].2 as f64).ln(), (w[1].2 as f64).ln());
        (x0 <= x && x <= x1).then(|| w[0].1 as f64 + (w[1].1 as f64 - w[0].1 as f64) * (x - x0) / (x1 - x0))
    })
}

pub fn criterion_9(s: &Studies) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, run, table) in [("test 2", &s.ad2, &FLAG_TABLE_2[..]), ("test 3", &s.ad3, &FLAG_TABLE_3[..])] {
        let rows = &run.report.rows;
        let m2 = &rows[1];
        let second = m2.n_elements == 4 && m2.n_slabs == 2 && m2.n_ref_elements == 1;
        let max_classes = rows.iter().map(|r| r.n_ref_elements).max().unwrap_or(0);
        let max_elements = rows.iter().map(|r| r.n_elements).max().unwrap_or(0);
        let mut worst_ratio = 1.0f64;
        for r in rows {
            if let Some(c) = table_classes(table, r.n_elements) {
                let ratio = r.n_ref_elements as f64 / c;
                if (ratio.ln()).abs() > worst_ratio.ln().abs() {
                    worst_ratio = ratio;
                }
            }
        }
        pass &= second && max_classes <= 40 && max_elements >= 1000 && (0.5..=2.0).contains(&worst_ratio);
        let trail: Vec<String> = rows
            .iter()
            .filter(|r| r.step % 2 == 0)
            .map(|r| format!("m{} {}/{}/{}", r.step, r.n_ref_elements, r.n_elements, r.n_slabs))
            .collect();
        parts.push(format!(
            "{name}: m2 = ({}, {}, {}), max classes {max_classes}, max elements {max_elements}, \
             worst class ratio to table {worst_ratio:.2} [classes/elements/slabs: {}]",
            m2.n_elements,
            m2.n_slabs,
            m2.n_ref_elements,
            trail.join(", ")
        ));
    }
    outcome(9, "flagging accounting", pass, parts.join("; "))
}

pub fn criterion_10(s: &Studies) -> Outcome {
    let bookkeeping = s.ad2.bookkeeping.max(s.ad3.bookkeeping);
    let markings = s.ad2.markings + s.ad3.markings;
    let non_minimal = s.ad2.non_minimal + s.ad3.non_minimal;
    outcome(
        10,
        "indicator bookkeeping",
        bookkeeping <= 1e-12 && non_minimal == 0 && markings > 0,
        format!("max relative mismatch {bookkeeping:.1e}, {markings} markings, {non_minimal} not minimal"),
    )
}

/// Evaluates the meshes of a test 3 adaptive run with and without the
/// reference cache, a fresh cache per mesh so that the counters are per mesh.
pub fn criterion_11() -> Result<Outcome> {
    let u3 = test_case(3, None)?;
    let mut cfg = AdaptiveConfig::new(3, None, 1, 0.9);
    cfg.max_steps = 8;
    let mut meshes = Vec::new();
    adapt_loop_with(&cfg, &u3, cartesian_mesh(u3.omega, u3.t_final, 1, 1, 1)?, |v| {
        meshes.push(v.mesh.clone());
        Ok(())
    })?;
    let on = EvalOptions::default();
    let off = EvalOptions {
        use_cache: false,
        ..on
    };
    let (mut diff, mut counters_ok) = (0.0f64, true);
    let close = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
    for (k, m) in meshes.iter().enumerate() {
        let a = evaluate(k + 1, m, &u3, &mut ReferenceCache::new(), on)?;
        let b = evaluate(k + 1, m, &u3, &mut ReferenceCache::new(), off)?;
        counters_ok &= a.disc.computations == m.class_count() && b.disc.computations == m.n_leaves();
        for (x, y) in a.solution.iter().zip(&b.solution) {
            diff = diff.max(close(*x, *y));
        }
        let pairs = [
            (a.row.ey, b.row.ey),
            (a.row.eu, b.row.eu),
            (a.row.en.unwrap_or(0.0), b.row.en.unwrap_or(0.0)),
            (a.row.eta, b.row.eta),
        ];
        for (x, y) in pairs {
            diff = diff.max(close(x, y));
        }
    }
    let last = meshes.last().expect("meshes");
    Ok(outcome(
        11,
        "cache soundness",
        diff <= 1e-12 && counters_ok,
        format!(
            "{} meshes, max difference {diff:.1e}, computations = classes with cache and = elements without: {counters_ok} \
             (last mesh {} classes, {} elements)",
            meshes.len(),
            last.class_count(),
            last.n_leaves()
        ),
    ))
}
