//! Facet extraction by interval overlap along mesh lines.

use super::{ElementFacets, ElementId, SpaceLikeFacet, SpaceTimeMesh, TimeLikeFacet};
use crate::error::{Result, StvemError};
use crate::polybasis::Interval;

/// Sorted representatives of `values`, merging entries closer than `tol`.
fn cluster(mut values: Vec<f64>, tol: f64) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut reps: Vec<f64> = Vec::new();
    for v in values {
        match reps.last() {
            Some(&r) if v - r <= tol => {}
            _ => reps.push(v),
        }
    }
    reps
}

fn line_index(reps: &[f64], v: f64, tol: f64) -> usize {
    let i = reps.partition_point(|&r| r < v - tol);
    debug_assert!(i < reps.len() && (reps[i] - v).abs() <= tol);
    i
}

/// Pieces of a side on one mesh line: `(lo, hi, element)`.
type Side = (f64, f64, ElementId);

/// Overlaps of two sorted side lists on the same line.
fn sweep(a: &mut [Side], b: &mut [Side], tol: f64) -> Result<Vec<(Interval, ElementId, ElementId)>> {
    a.sort_by(|p, q| p.0.total_cmp(&q.0));
    b.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi - lo > tol {
            out.push((Interval::raw(lo, hi), a[i].2, b[j].2));
        }
        if a[i].1 < b[j].1 - tol {
            i += 1;
        } else if b[j].1 < a[i].1 - tol {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    if i < a.len() || j < b.len() {
        return Err(StvemError::InvalidMesh(
            "element sides on an interior line do not match".into(),
        ));
    }
    Ok(out)
}

pub(super) fn build_facets(mesh: &mut SpaceTimeMesh) -> Result<()> {
    let tol_x = mesh.tol_x();
    let tol_t = mesh.tol_t();
    let n_all = mesh.elements.len();
    let mut adjacency = vec![ElementFacets::default(); n_all];

    let leaves: Vec<_> = mesh.leaf_elements().cloned().collect();

    // Time-like facets, line by line in increasing x.
    let xs = cluster(
        leaves.iter().flat_map(|e| [e.x_iv.lo, e.x_iv.hi]).collect(),
        tol_x,
    );
    let mut left_of: Vec<Vec<Side>> = vec![Vec::new(); xs.len()];
    let mut right_of: Vec<Vec<Side>> = vec![Vec::new(); xs.len()];
    for e in &leaves {
        right_of[line_index(&xs, e.x_iv.lo, tol_x)].push((e.t_iv.lo, e.t_iv.hi, e.id));
        left_of[line_index(&xs, e.x_iv.hi, tol_x)].push((e.t_iv.lo, e.t_iv.hi, e.id));
    }
    let mut time_facets = Vec::new();
    for (k, &x) in xs.iter().enumerate() {
        let on_left_bd = (x - mesh.omega.lo).abs() <= tol_x;
        let on_right_bd = (x - mesh.omega.hi).abs() <= tol_x;
        let pieces: Vec<(Interval, Option<ElementId>, Option<ElementId>)> = if on_left_bd {
            if !left_of[k].is_empty() {
                return Err(StvemError::InvalidMesh("element left of the domain".into()));
            }
            let mut r = std::mem::take(&mut right_of[k]);
            r.sort_by(|p, q| p.0.total_cmp(&q.0));
            r.into_iter()
                .map(|(lo, hi, e)| (Interval::raw(lo, hi), None, Some(e)))
                .collect()
        } else if on_right_bd {
            if !right_of[k].is_empty() {
                return Err(StvemError::InvalidMesh("element right of the domain".into()));
            }
            let mut l = std::mem::take(&mut left_of[k]);
            l.sort_by(|p, q| p.0.total_cmp(&q.0));
            l.into_iter()
                .map(|(lo, hi, e)| (Interval::raw(lo, hi), Some(e), None))
                .collect()
        } else {
            sweep(&mut left_of[k], &mut right_of[k], tol_t)?
                .into_iter()
                .map(|(iv, l, r)| (iv, Some(l), Some(r)))
                .collect()
        };
        for (t_iv, l, r) in pieces {
            let id = time_facets.len();
            if let Some(l) = l {
                adjacency[l.0].right.push(id);
            }
            if let Some(r) = r {
                adjacency[r.0].left.push(id);
            }
            let h_fx = match (l, r) {
                (Some(l), Some(r)) => mesh.elements[l.0].h_x().min(mesh.elements[r.0].h_x()),
                (Some(e), None) | (None, Some(e)) => mesh.elements[e.0].h_x(),
                (None, None) => unreachable!(),
            };
            time_facets.push(TimeLikeFacet {
                id,
                x_pos: x,
                t_iv,
                left_elem: l,
                right_elem: r,
                moment_degree: 0,
                h_fx,
            });
        }
    }

    // Space-like facets, line by line in increasing t.
    let ts = cluster(
        leaves.iter().flat_map(|e| [e.t_iv.lo, e.t_iv.hi]).collect(),
        tol_t,
    );
    let mut below_of: Vec<Vec<Side>> = vec![Vec::new(); ts.len()];
    let mut above_of: Vec<Vec<Side>> = vec![Vec::new(); ts.len()];
    for e in &leaves {
        above_of[line_index(&ts, e.t_iv.lo, tol_t)].push((e.x_iv.lo, e.x_iv.hi, e.id));
        below_of[line_index(&ts, e.t_iv.hi, tol_t)].push((e.x_iv.lo, e.x_iv.hi, e.id));
    }
    let mut space_facets = Vec::new();
    for (k, &t) in ts.iter().enumerate() {
        if (t - mesh.t_final).abs() <= tol_t {
            continue;
        }
        let pieces: Vec<(Interval, Option<ElementId>, ElementId)> = if t.abs() <= tol_t {
            let mut a = std::mem::take(&mut above_of[k]);
            a.sort_by(|p, q| p.0.total_cmp(&q.0));
            a.into_iter()
                .map(|(lo, hi, e)| (Interval::raw(lo, hi), None, e))
                .collect()
        } else {
            sweep(&mut below_of[k], &mut above_of[k], tol_x)?
                .into_iter()
                .map(|(iv, b, a)| (iv, Some(b), a))
                .collect()
        };
        for (x_iv, below, above) in pieces {
            let id = space_facets.len();
            adjacency[above.0].bottom.push(id);
            if let Some(b) = below {
                adjacency[b.0].top.push(id);
            }
            space_facets.push(SpaceLikeFacet {
                id,
                t_pos: t,
                x_iv,
                below_elem: below,
                above_elem: above,
                moment_degree: 0,
            });
        }
    }

    mesh.time_facets = time_facets;
    mesh.space_facets = space_facets;
    mesh.adjacency = adjacency;
    Ok(())
}

/// Maximum rule on interior time-like facets, owner degree elsewhere.
pub(super) fn assign_facet_degrees(mesh: &mut SpaceTimeMesh) {
    let elements = &mesh.elements;
    for f in &mut mesh.time_facets {
        f.moment_degree = [f.left_elem, f.right_elem]
            .into_iter()
            .flatten()
            .map(|e| elements[e.0].degree)
            .max()
            .unwrap_or(1);
    }
    for f in &mut mesh.space_facets {
        f.moment_degree = elements[f.above_elem.0].degree;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_merges_close_values() {
        let r = cluster(vec![1.0, 0.0, 1.0 + 1e-15, 0.5], 1e-12);
        assert_eq!(r, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn sweep_splits_overlaps() {
        let e = ElementId;
        let mut a = vec![(0.0, 1.0, e(0))];
        let mut b = vec![(0.5, 1.0, e(2)), (0.0, 0.5, e(1))];
        let out = sweep(&mut a, &mut b, 1e-12).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].0, Interval::raw(0.0, 0.5));
        assert_eq!(out[0].2, e(1));
        assert_eq!(out[1].0, Interval::raw(0.5, 1.0));
    }
}
