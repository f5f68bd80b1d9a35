//! Property tests for the invariants of every layer: quadrature, meshes,
//! local projectors and forms, global solves and marking.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use stvem::adaptivity::doerfler_mark;
use stvem::analysis::{compute_errors, DiscreteFields, ErrorOptions, ExactSolution};
use stvem::assembly::{data_terms, solve_monolithic, solve_slabs, Discretization, ReferenceCache, SolveOptions};
use stvem::local_vem::{local_forms, LocalElement, LocalFacet, ProjectorSet, ReferenceLocal, Side};
use stvem::mesh::{cartesian_mesh, ElementId, SpaceTimeMesh};
use stvem::polybasis::{basis_2d, dim_p2, gauss_rule, moments, monomial_integral, Interval, PlainGauss};

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Refinement picks are raw indices reduced modulo the current leaf count.
fn refined_mesh(nx: usize, nt: usize, p: u32, picks: &[Vec<usize>], degrees: &[u32]) -> SpaceTimeMesh {
    let mut m = cartesian_mesh(iv(0.0, 1.0), 1.0, nx, nt, p).unwrap();
    for round in picks {
        let n = m.n_leaves();
        let mut marked: Vec<ElementId> = round.iter().map(|&i| m.leaves()[i % n]).collect();
        marked.sort();
        marked.dedup();
        m.refine_in_place(&marked).unwrap();
    }
    if !degrees.is_empty() {
        m.set_degrees(|e| degrees[e.id.0 % degrees.len()]).unwrap();
    }
    m
}

fn mesh_strategy(max_rounds: usize) -> impl Strategy<Value = SpaceTimeMesh> {
    (
        1usize..=3,
        1usize..=3,
        1u32..=3,
        prop::collection::vec(prop::collection::vec(any::<usize>(), 1..4), 0..=max_rounds),
        prop::collection::vec(1u32..=3, 0..4),
    )
        .prop_map(|(nx, nt, p, picks, degrees)| refined_mesh(nx, nt, p, &picks, &degrees))
}

/// Polynomial `sum c_ab x^a t^b` with `a + b <= p`, with its derivatives.
#[derive(Clone, Debug)]
struct Poly {
    terms: Vec<(i32, i32, f64)>,
}

impl Poly {
    fn eval(&self, x: f64, t: f64, dx: i32, dt: i32) -> f64 {
        let fall = |n: i32, k: i32| (0..k).map(|i| f64::from(n - i)).product::<f64>();
        self.terms
            .iter()
            .filter(|(a, b, _)| *a >= dx && *b >= dt)
            .map(|&(a, b, c)| c * fall(a, dx) * fall(b, dt) * x.powi(a - dx) * t.powi(b - dt))
            .sum()
    }

    fn solution(self) -> ExactSolution {
        let p = Arc::new(self);
        let (p1, p2, p3, p4) = (p.clone(), p.clone(), p.clone(), p);
        ExactSolution::polynomial(
            "random",
            move |x, t| p1.eval(x, t, 0, 0),
            move |x, t| p2.eval(x, t, 1, 0),
            move |x, t| p3.eval(x, t, 0, 1),
            move |x, t| p4.eval(x, t, 2, 0),
        )
    }
}

fn poly_strategy(p: u32) -> impl Strategy<Value = Poly> {
    let p = p as i32;
    let exps: Vec<(i32, i32)> = (0..=p).flat_map(|a| (0..=p - a).map(move |b| (a, b))).collect();
    prop::collection::vec(-1.0f64..1.0, exps.len()).prop_map(move |cs| Poly {
        terms: exps.iter().zip(cs).map(|(&(a, b), c)| (a, b, c)).collect(),
    })
}

/// Element with `0..=3` random splits per side and facet degrees `p` or `p + 1`.
fn element_strategy() -> impl Strategy<Value = LocalElement> {
    let side = || {
        prop::collection::vec((0.2f64..1.0, 0u32..=1, 0.25f64..=1.0), 1..=4)
    };
    (1u32..=4, -5.0f64..5.0, -2.0f64..0.0, 0.0f64..5.0, -2.0f64..0.0, side(), side()).prop_map(
        |(p, x0, lx, t0, lt, left, right)| {
            let (hx, ht) = (10f64.powf(lx), 10f64.powf(lt));
            let x_iv = iv(x0, x0 + hx);
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
                        t_iv: iv(t_iv.from_ref(lo - 0.5), t_iv.from_ref(hi - 0.5)),
                        degree: p + dp,
                        h_fx: hx * r,
                    });
                    lo = hi;
                }
            }
            LocalElement {
                x_iv,
                t_iv,
                degree: p,
                facets,
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projectors_reproduce_polynomials_and_d_has_full_rank(e in element_strategy()) {
        let proj = ProjectorSet::new(&e).unwrap();
        let n = dim_p2(e.degree);
        let id = DMatrix::<f64>::identity(n, n);
        prop_assert!(max_abs(&(&proj.pi_n * &proj.d - &id)) <= 1e-10);
        prop_assert!(max_abs(&(&proj.pi_star * &proj.d - &id)) <= 1e-10);
        prop_assert_eq!(proj.d.ncols(), n);
        prop_assert!(proj.d.nrows() >= n);
        prop_assert_eq!(proj.d.rank(1e-10 * max_abs(&proj.d)), n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gauss_rules_integrate_polynomials_exactly(
        n in 1usize..8,
        lo in -3.0f64..3.0,
        len in 0.01f64..4.0,
        cs in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let deg = 2 * n - 1;
        let (a, b) = (lo, lo + len);
        let rule = gauss_rule(n, iv(a, b));
        let got = rule.integrate(|s| (0..=deg).map(|k| cs[k] * s[0].powi(k as i32)).sum());
        let exact: f64 = (0..=deg).map(|k| cs[k] * monomial_integral(k as u32, a, b)).sum();
        let scale: f64 = (0..=deg).map(|k| (cs[k] * monomial_integral(k as u32, a, b)).abs()).sum();
        prop_assert!((got - exact).abs() <= 1e-12 * scale.max(1e-300), "{} vs {}", got, exact);
    }

    #[test]
    fn gram_conditioning_is_invariant(
        p in 1u32..=4,
        x0 in -10.0f64..10.0,
        t0 in 0.0f64..10.0,
        sx in 0.001f64..100.0,
        st in 0.001f64..100.0,
    ) {
        let cond = |x: Interval, t: Interval| {
            let b = basis_2d(p, x, t).unwrap();
            let rule = gauss_rule(p as usize + 1, x).tensor(&gauss_rule(p as usize + 1, t));
            let n = b.dim();
            let mut g = DMatrix::<f64>::zeros(n, n);
            for (pt, w) in rule.iter() {
                let v = b.eval(pt);
                for i in 0..n {
                    for j in 0..n {
                        g[(i, j)] += w * v[i] * v[j] / b.measure();
                    }
                }
            }
            let sv = g.singular_values();
            sv.max() / sv.min()
        };
        let reference = cond(iv(-0.5, 0.5), iv(-0.5, 0.5));
        let moved = cond(iv(x0, x0 + sx), iv(t0, t0 + st));
        prop_assert!((moved - reference).abs() <= 1e-10 * reference);
    }

    #[test]
    fn moments_are_linear(
        p in 1u32..=4,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        k in 0.0f64..3.0,
    ) {
        let basis = basis_2d(p, iv(0.3, 0.7), iv(1.0, 1.5)).unwrap();
        let rule = gauss_rule(6, iv(0.3, 0.7)).tensor(&gauss_rule(6, iv(1.0, 1.5)));
        let f = |pt: [f64; 2]| (k * pt[0]).sin() * pt[1];
        let g = |pt: [f64; 2]| (pt[0] * pt[1]).exp();
        let mf = moments(f, &basis, &rule);
        let mg = moments(g, &basis, &rule);
        let mc = moments(|pt| a * f(pt) + b * g(pt), &basis, &rule);
        for i in 0..mc.len() {
            let want = a * mf[i] + b * mg[i];
            prop_assert!((mc[i] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn local_forms_scale_exactly_and_ah_is_symmetric(e in element_strategy()) {
        let proj = ProjectorSet::new(&e).unwrap();
        let direct = local_forms(&e, &proj, 1.0, 1.0);
        let reference = ReferenceLocal::new(&e.normalized()).unwrap();
        let scaled = reference.scaled(e.h_x(), e.h_t(), 1.0, 1.0);
        for (a, b) in [
            (&direct.ah, &scaled.ah),
            (&direct.tmat, &scaled.tmat),
            (&direct.u_self, &scaled.u_self),
            (&direct.stab, &scaled.stab),
            (&direct.a_proj, &scaled.a_proj),
        ] {
            prop_assert!(max_abs(&(a - b)) <= 1e-12 * max_abs(a).max(1e-300));
        }
        let asym = &direct.ah - direct.ah.transpose();
        prop_assert!(max_abs(&asym) <= 1e-13 * max_abs(&direct.ah));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn meshes_stay_valid_under_refinement(m in mesh_strategy(4)) {
        let (tx, tt) = (1e-13, 1e-13);
        let area: f64 = m.leaf_elements().map(|e| e.area()).sum();
        prop_assert!((area - 1.0).abs() <= 1e-12);

        for e in m.leaf_elements() {
            let adj = m.facets_of(e.id);
            for side in [&adj.left, &adj.right] {
                let ivs: Vec<Interval> = side.iter().map(|&f| m.time_facets()[f].t_iv).collect();
                prop_assert!((ivs[0].lo - e.t_iv.lo).abs() <= tt);
                prop_assert!((ivs[ivs.len() - 1].hi - e.t_iv.hi).abs() <= tt);
                for w in ivs.windows(2) {
                    prop_assert!((w[0].hi - w[1].lo).abs() <= tt);
                }
            }
            let bottom: Vec<Interval> = adj.bottom.iter().map(|&f| m.space_facets()[f].x_iv).collect();
            prop_assert!((bottom[0].lo - e.x_iv.lo).abs() <= tx);
            prop_assert!((bottom[bottom.len() - 1].hi - e.x_iv.hi).abs() <= tx);
            for w in bottom.windows(2) {
                prop_assert!((w[0].hi - w[1].lo).abs() <= tx);
            }
        }

        for f in m.time_facets() {
            let want = match (f.left_elem, f.right_elem) {
                (Some(l), Some(r)) => m.element(l).h_x().min(m.element(r).h_x()),
                _ => m.element(f.owner()).h_x(),
            };
            prop_assert_eq!(f.h_fx, want);
        }

        // slab bounds: no element interior contains one
        let mut cuts = vec![0.0];
        for members in m.slab_members() {
            let hi = members.iter().map(|&id| m.element(id).t_iv.hi).fold(f64::MIN, f64::max);
            let lo = members.iter().map(|&id| m.element(id).t_iv.lo).fold(f64::MAX, f64::min);
            prop_assert!((lo - cuts[cuts.len() - 1]).abs() <= tt);
            cuts.push(hi);
        }
        for e in m.leaf_elements() {
            for &c in &cuts {
                prop_assert!(!(c > e.t_iv.lo + tt && c < e.t_iv.hi - tt));
            }
        }
    }

    #[test]
    fn single_refinement_adds_at_most_five_vertices(m in mesh_strategy(3), pick in any::<usize>()) {
        let id = m.leaves()[pick % m.n_leaves()];
        let before = m.vertices().len();
        let after = m.refine(&[id]).unwrap().vertices().len();
        prop_assert!(after > before && after - before <= 5);
    }

    #[test]
    fn equal_flags_give_equal_normalized_matrices(m in mesh_strategy(3)) {
        let mut seen: std::collections::HashMap<usize, DMatrix<f64>> = Default::default();
        for &id in m.leaves() {
            let e = LocalElement::from_mesh(&m, id).normalized();
            let r = ReferenceLocal::new(&e).unwrap();
            let mat = r.mats.element_matrix();
            let flag = m.element(id).topo_flag.0;
            if let Some(prev) = seen.get(&flag) {
                prop_assert!(max_abs(&(prev - &mat)) <= 1e-12 * max_abs(prev));
            } else {
                seen.insert(flag, mat);
            }
        }
        prop_assert_eq!(seen.len(), m.class_count());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn slab_and_monolithic_solves_agree(m in mesh_strategy(3), u in poly_strategy(3)) {
        let ex = u.solution().with_coefficients(0.7, 1.3);
        let policy = PlainGauss { extra: 2 };
        let disc = Discretization::new(&m, 0.7, 1.3, Some(&mut ReferenceCache::new())).unwrap();
        let a = solve_slabs(&m, &disc, &ex.data, &policy, SolveOptions::default()).unwrap();
        let b = solve_monolithic(&m, &disc, &ex.data, &policy).unwrap();
        let scale = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn galerkin_residual_vanishes(m in mesh_strategy(3), u in poly_strategy(2)) {
        // data of a non-polynomial solution, so the discrete solution is not exact
        let ex = u.solution();
        let mut data = ex.data.clone();
        data.f = Arc::new(|x: f64, t: f64| (3.0 * x).sin() * (1.0 + t * t));
        let policy = PlainGauss { extra: 2 };
        let disc = Discretization::new(&m, data.nu, data.c_h, Some(&mut ReferenceCache::new())).unwrap();
        let sol = solve_slabs(&m, &disc, &data, &policy, SolveOptions::default()).unwrap();
        let terms = data_terms(&m, &disc, &data, &policy).unwrap();
        // residual assembled element by element from the local pieces
        let mut res = vec![0.0; disc.dofs.n_dofs];
        let mut load_norm = 0.0f64;
        for (k, loc) in disc.locals.iter().enumerate() {
            let mut r = loc.matrices(data.nu, data.c_h).element_matrix() * disc.local_values(k, &sol)
                - DVector::from_column_slice(&terms.loads[k]);
            for (kp, km, c) in &terms.couplings {
                if *kp == k {
                    r += c * disc.local_values(*km, &sol);
                }
            }
            for (i, &g) in disc.dofs.local_to_global[k].iter().enumerate() {
                res[g] += r[i];
                load_norm = load_norm.max(terms.loads[k][i].abs());
            }
        }
        for (g, r) in res.iter().enumerate() {
            if !disc.dofs.constrained[g] {
                prop_assert!(r.abs() <= 1e-9 * load_norm.max(1.0), "dof {}: {}", g, r);
            }
        }
    }

    #[test]
    fn polynomial_solutions_are_reproduced(m in mesh_strategy(3), p in 1u32..=3, seed in any::<u64>()) {
        let m = {
            let mut m = m;
            m.set_degrees(|_| p).unwrap();
            m
        };
        let mut runner = proptest::test_runner::TestRunner::new_with_rng(
            Default::default(),
            proptest::test_runner::TestRng::from_seed(proptest::test_runner::RngAlgorithm::ChaCha, &{
                let mut s = [0u8; 32];
                s[..8].copy_from_slice(&seed.to_le_bytes());
                s
            }),
        );
        let u = poly_strategy(p).new_tree(&mut runner).unwrap().current();
        let ex = u.solution().with_coefficients(0.8, 1.7);
        let policy = PlainGauss { extra: 2 };
        let disc = Discretization::new(&m, 0.8, 1.7, Some(&mut ReferenceCache::new())).unwrap();
        let sol = solve_slabs(&m, &disc, &ex.data, &policy, SolveOptions::default()).unwrap();
        let fields = DiscreteFields::new(&disc, &sol);
        let err = compute_errors(&m, &disc, &fields, &ex, &policy, ErrorOptions { compute_en: false }).unwrap();
        prop_assert!(err.ey <= 1e-9, "E^Y = {}", err.ey);
    }

    #[test]
    fn doerfler_set_is_minimal(vals in prop::collection::vec(0.0f64..10.0, 1..40), theta in 0.01f64..=1.0) {
        let sq: Vec<(ElementId, f64)> = vals.iter().enumerate().map(|(i, &v)| (ElementId(i), v * v)).collect();
        let marked = doerfler_mark(&sq, theta).unwrap();
        let total: f64 = sq.iter().map(|e| e.1).sum();
        let value = |id: &ElementId| sq[id.0].1;
        let sum: f64 = marked.iter().map(value).sum();
        prop_assert!(sum >= theta * total * (1.0 - 1e-12));
        if let Some(smallest) = marked.iter().map(value).min_by(f64::total_cmp) {
            prop_assert!(sum - smallest < theta * total);
        }
        // nothing left out is larger than something marked
        let floor = marked.iter().map(value).fold(f64::INFINITY, f64::min);
        for e in &sq {
            if !marked.contains(&e.0) {
                prop_assert!(e.1 <= floor);
            }
        }
    }
}
