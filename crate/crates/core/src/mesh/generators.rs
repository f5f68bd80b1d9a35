//! Tensor-product mesh generators.

use super::SpaceTimeMesh;
use crate::error::{Result, StvemError};
use crate::polybasis::Interval;

/// Tensor mesh from strictly increasing cut lists that include both ends.
/// Elements are listed row by row in `t`, left to right within a row.
pub fn tensor_mesh(
    xs: &[f64],
    ts: &[f64],
    degree_of: impl Fn(usize, usize) -> u32,
) -> Result<SpaceTimeMesh> {
    if xs.len() < 2 || ts.len() < 2 {
        return Err(StvemError::InvalidMesh("need at least one cell per axis".into()));
    }
    let omega = Interval::new(xs[0], xs[xs.len() - 1])?;
    let t_final = ts[ts.len() - 1];
    if ts[0] != 0.0 {
        return Err(StvemError::InvalidMesh("time cuts must start at 0".into()));
    }
    for w in ts.windows(2) {
        if !(w[1] - w[0] >= 1e-14 * t_final) {
            return Err(StvemError::DegenerateLayer {
                thickness: w[1] - w[0],
            });
        }
    }
    let mut rects = Vec::with_capacity((xs.len() - 1) * (ts.len() - 1));
    for (it, tw) in ts.windows(2).enumerate() {
        let t_iv = Interval::new(tw[0], tw[1])?;
        for (ix, xw) in xs.windows(2).enumerate() {
            rects.push((Interval::new(xw[0], xw[1])?, t_iv, degree_of(ix, it)));
        }
    }
    SpaceTimeMesh::from_rectangles(omega, t_final, rects)
}

fn uniform_cuts(iv: Interval, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if i == n {
                iv.hi
            } else {
                iv.lo + iv.len() * i as f64 / n as f64
            }
        })
        .collect()
}

/// Uniform `nx x nt` mesh of degree `p`.
pub fn cartesian_mesh(omega: Interval, t_final: f64, nx: usize, nt: usize, p: u32) -> Result<SpaceTimeMesh> {
    if nx == 0 || nt == 0 {
        return Err(StvemError::invalid("nx/nt", "must be at least 1"));
    }
    let t_dom = Interval::new(0.0, t_final)?;
    tensor_mesh(&uniform_cuts(omega, nx), &uniform_cuts(t_dom, nt), |_, _| p)
}

/// Geometric time cuts `0, sigma^{L-1} T, ..., sigma T, T`.
fn graded_time_cuts(t_final: f64, sigma: f64, layers: usize) -> Result<Vec<f64>> {
    if layers == 0 {
        return Err(StvemError::invalid("layers", "must be at least 1"));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(StvemError::invalid("sigma_t", "must lie in (0, 1)"));
    }
    let mut ts = vec![0.0];
    for k in (1..layers).rev() {
        ts.push(sigma.powi(k as i32) * t_final);
    }
    ts.push(t_final);
    Ok(ts)
}

/// Uniform spatial partition of width about `h_x` and `L = degrees.len()`
/// time layers graded towards `t = 0`. `degrees[k]` is the degree of the
/// `k`-th layer counted from the bottom.
pub fn graded_mesh_t(
    omega: Interval,
    t_final: f64,
    h_x: f64,
    sigma_t: f64,
    degrees: &[u32],
) -> Result<SpaceTimeMesh> {
    if !(h_x > 0.0) {
        return Err(StvemError::invalid("h_x", "must be positive"));
    }
    let nx = ((omega.len() / h_x).round() as usize).max(1);
    let ts = graded_time_cuts(t_final, sigma_t, degrees.len())?;
    tensor_mesh(&uniform_cuts(omega, nx), &ts, |_, it| degrees[it])
}

/// Tensor grading towards both spatial endpoints and `t = 0`. Every level
/// adds the spatial cuts at relative positions `sigma_x^k / 2` and
/// `1 - sigma_x^k / 2`, and one time layer; lines run through the whole
/// domain. `degrees[k]` is the degree of the `k`-th time layer from the bottom.
pub fn graded_mesh_xt(
    omega: Interval,
    t_final: f64,
    sigma_x: f64,
    sigma_t: f64,
    degrees: &[u32],
) -> Result<SpaceTimeMesh> {
    if !(sigma_x > 0.0 && sigma_x < 1.0) {
        return Err(StvemError::invalid("sigma_x", "must lie in (0, 1)"));
    }
    let layers = degrees.len();
    let ts = graded_time_cuts(t_final, sigma_t, layers)?;
    let mut rel = vec![0.0, 0.5, 1.0];
    for k in 1..layers {
        let d = 0.5 * sigma_x.powi(k as i32);
        rel.push(d);
        rel.push(1.0 - d);
    }
    rel.sort_by(f64::total_cmp);
    let xs: Vec<f64> = rel
        .iter()
        .map(|&r| {
            if r == 1.0 {
                omega.hi
            } else {
                omega.lo + r * omega.len()
            }
        })
        .collect();
    tensor_mesh(&xs, &ts, |_, it| degrees[it])
}
