use super::*;
use crate::analysis::Regularity;

fn ids(v: &[f64]) -> Vec<(ElementId, f64)> {
    v.iter().enumerate().map(|(i, &e)| (ElementId(i), e)).collect()
}

/// Smallest cardinality over all subsets satisfying the inequality.
fn min_card_by_enumeration(sq: &[f64], theta: f64) -> usize {
    let total: f64 = sq.iter().sum();
    (0u32..1 << sq.len())
        .filter(|mask| {
            let s: f64 = (0..sq.len()).filter(|i| mask & (1 << i) != 0).map(|i| sq[i]).sum();
            s >= theta * total * (1.0 - 1e-14)
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

#[test]
fn doerfler_examples() {
    let sq: Vec<f64> = [4.0f64, 1.0, 1.0].iter().map(|e| e * e).collect();
    assert_eq!(min_card_by_enumeration(&sq, 0.5), 1);
    assert_eq!(doerfler_mark(&ids(&sq), 0.5).unwrap(), vec![ElementId(0)]);

    let equal = ids(&[2.0; 4]);
    assert_eq!(min_card_by_enumeration(&[2.0; 4], 0.5), 2);
    // ties broken by ascending id
    assert_eq!(doerfler_mark(&equal, 0.5).unwrap(), vec![ElementId(0), ElementId(1)]);

    let with_zero = ids(&[0.3, 0.0, 0.1, 0.2, 0.0]);
    let all = doerfler_mark(&with_zero, 1.0).unwrap();
    assert_eq!(all, vec![ElementId(0), ElementId(2), ElementId(3)]);
}

#[test]
fn doerfler_matches_enumeration_on_small_sets() {
    let vals = [
        vec![0.5, 0.1, 0.9, 0.3, 0.3, 0.05],
        vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
        vec![1e-3, 1.0, 1e-3, 1e-3],
    ];
    for v in &vals {
        for theta in [0.1, 0.5, 0.9, 0.99, 1.0] {
            let m = doerfler_mark(&ids(v), theta).unwrap();
            assert_eq!(m.len(), min_card_by_enumeration(v, theta), "{v:?} {theta}");
        }
    }
}

#[test]
fn doerfler_rejects_bad_input() {
    assert!(matches!(doerfler_mark(&[], 0.5), Err(StvemError::EmptyMesh)));
    for theta in [0.0, 1.5, f64::NAN] {
        let e = doerfler_mark(&ids(&[1.0]), theta).unwrap_err();
        assert!(e.to_string().contains("theta"));
    }
    assert!(doerfler_mark(&ids(&[1.0, -1.0]), 0.5).is_err());
}

#[test]
fn hp_sequences_follow_the_grading_law() {
    let u2 = test_case(2, Some(0.55)).unwrap();
    let seq = hp_sequence(&u2, HpGrading::for_test(2).unwrap(), 3).unwrap();
    assert_eq!(seq[0].n_leaves(), 20);
    assert_eq!(seq[0].slab_count(), 1);
    assert!(seq[0].leaf_elements().all(|e| e.degree == 1 && (e.h_x() - 0.05).abs() < 1e-14));
    let m = &seq[2];
    let mut cuts: Vec<(f64, u32)> = m
        .leaf_elements()
        .map(|e| (e.t_iv.lo, e.degree))
        .collect();
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    cuts.dedup();
    assert_eq!(cuts.len(), 3);
    for ((t, p), (te, pe)) in cuts.iter().zip([(0.0, 1), (0.001, 2), (0.01, 3)]) {
        assert!((t - te).abs() < 1e-15);
        assert_eq!(*p, pe);
    }

    let u3 = test_case(3, None).unwrap();
    let seq = hp_sequence(&u3, HpGrading::for_test(3).unwrap(), 2).unwrap();
    assert_eq!(seq[0].n_leaves(), 2);
    let m = &seq[1];
    assert_eq!(m.n_leaves(), 8);
    let mut xs: Vec<f64> = m.leaf_elements().map(|e| e.x_iv.lo).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    assert_eq!(xs, vec![0.0, 0.125, 0.5, 0.875]);
    for e in m.leaf_elements() {
        let bottom = e.t_iv.lo == 0.0;
        assert_eq!(e.degree, if bottom { 1 } else { 2 });
        assert!((e.t_iv.len() - if bottom { 0.25 } else { 0.75 }).abs() < 1e-15);
    }
    assert!(HpGrading::for_test(1).is_err());
    assert!(hp_sequence(&u3, HpGrading::for_test(3).unwrap(), 0).is_err());
}

#[test]
fn uniform_sequence_doubles() {
    let u1 = test_case(1, None).unwrap();
    let seq = uniform_sequence(&u1, 2, 3, 3, 1).unwrap();
    let n: Vec<usize> = seq.iter().map(|m| m.n_leaves()).collect();
    assert_eq!(n, vec![6, 24, 96]);
}

#[test]
fn smooth_case_refines_nearly_uniformly() {
    let u1 = test_case(1, None).unwrap();
    let mut cfg = AdaptiveConfig::new(1, None, 1, 0.9);
    cfg.max_steps = 5;
    let mesh0 = cartesian_mesh(u1.omega, u1.t_final, 2, 2, 1).unwrap();
    let mut fractions = Vec::new();
    let mut prev: Option<SpaceTimeMesh> = None;
    let mut prev_marked: Vec<ElementId> = Vec::new();
    let out = adapt_loop_with(&cfg, &u1, mesh0, |view| {
        if let Some(p) = &prev {
            // unmarked leaves survive unchanged
            for &id in p.leaves() {
                if prev_marked.binary_search(&id).is_err() {
                    let (a, b) = (p.element(id), view.mesh.element(id));
                    assert!(b.is_leaf());
                    assert_eq!((a.x_iv, a.t_iv), (b.x_iv, b.t_iv));
                }
            }
        }
        fractions.push(view.marked.len() as f64 / view.mesh.n_leaves() as f64);
        prev = Some(view.mesh.clone());
        prev_marked = view.marked.to_vec();
        Ok(())
    })
    .unwrap();
    let rows = &out.report.rows;
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[1].n_dofs > w[0].n_dofs));
    assert!(rows.windows(2).all(|w| w[1].ey < w[0].ey));
    for f in &fractions[2..4] {
        assert!(*f >= 0.6, "{fractions:?}");
    }
    assert_eq!(*fractions.last().unwrap(), 0.0);
}

#[test]
fn first_refinement_of_one_element() {
    let mut cfg = AdaptiveConfig::new(2, Some(0.55), 2, 0.99);
    cfg.max_steps = 2;
    let out = adapt_loop(&cfg).unwrap();
    let r = &out.report.rows;
    assert_eq!((r[0].n_elements, r[0].n_slabs, r[0].n_ref_elements), (1, 1, 1));
    assert_eq!((r[1].n_elements, r[1].n_slabs, r[1].n_ref_elements), (4, 2, 1));
    assert_eq!(r[1].step, 2);
    assert!(r[0].en.is_none());
}

#[test]
fn max_dofs_stops_before_solving() {
    let mut cfg = AdaptiveConfig::new(1, None, 1, 1.0);
    cfg.max_dofs = 40;
    let out = adapt_loop(&cfg).unwrap();
    let last = out.report.rows.last().unwrap();
    assert!(last.n_dofs <= 40);
    assert!(build_dof_map(&out.mesh.refine(out.mesh.leaves()).unwrap()).n_dofs > 40);
}

#[test]
fn failures_carry_the_step() {
    let bad = test_case(1, None).unwrap().with_coefficients(-1.0, 1.0);
    let cfg = AdaptiveConfig::new(1, None, 1, 0.5);
    let mesh0 = cartesian_mesh(bad.omega, bad.t_final, 1, 1, 1).unwrap();
    match adapt_loop_with(&cfg, &bad, mesh0, |_| Ok(())) {
        Err(StvemError::StepFailed { step, .. }) => assert_eq!(step, 1),
        other => panic!("{:?}", other.err()),
    }
    let mut cfg = AdaptiveConfig::new(1, None, 1, 0.5);
    cfg.theta = 2.0;
    assert!(adapt_loop(&cfg).unwrap_err().to_string().contains("theta"));
}

#[test]
fn cache_toggle_changes_nothing() {
    let u3 = test_case(3, None).unwrap();
    assert_eq!(u3.regularity, Regularity::Incompatible);
    let m = cartesian_mesh(u3.omega, u3.t_final, 2, 2, 1).unwrap();
    let m = m.refine(&[m.leaves()[0]]).unwrap();
    let on = EvalOptions::default();
    let off = EvalOptions {
        use_cache: false,
        ..on
    };
    let a = evaluate(1, &m, &u3, &mut ReferenceCache::new(), on).unwrap();
    let b = evaluate(1, &m, &u3, &mut ReferenceCache::new(), off).unwrap();
    assert_eq!(a.disc.computations, m.class_count());
    assert_eq!(b.disc.computations, m.n_leaves());
    for (x, y) in a.solution.iter().zip(&b.solution) {
        assert!((x - y).abs() <= 1e-12);
    }
    assert!((a.row.ey - b.row.ey).abs() <= 1e-12);
    assert!((a.row.eta - b.row.eta).abs() <= 1e-12);
}
