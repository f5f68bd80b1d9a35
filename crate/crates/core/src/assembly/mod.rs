//! Global degrees of freedom, cached local matrices and the slab-by-slab
//! direct solve.
//!
//! Time-like facet moments are shared by the two neighbouring elements,
//! which realizes the nonconformity condition exactly. Moments on boundary
//! facets are fixed to the moments of the Dirichlet datum and are dropped
//! from the test space.

use std::collections::HashMap;
use std::io::Write;
use std::ops::Range;
use std::sync::Arc;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Result, StvemError};
use crate::local_vem::{
    dof_layout, initial_load, load_vector, local_forms, upwind_coupling, LocalElement, LocalMatrices,
    ProjectorSet, ReferenceLocal,
};
use crate::mesh::{ElementId, SpaceTimeMesh, TopoSignature};
use crate::polybasis::{basis_1d, moments, QuadPolicy};

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coefficients and data of `c_H d_t u - nu d_xx u = f`, `u = g` on the
/// lateral boundary and `u(., 0) = u0`.
#[derive(Clone)]
pub struct ProblemData {
    pub nu: f64,
    pub c_h: f64,
    pub f: SpaceTimeFn,
    pub g: SpaceTimeFn,
    pub u0: SpaceFn,
}

impl ProblemData {
    /// Zero source, zero boundary and zero initial data.
    pub fn homogeneous(nu: f64, c_h: f64) -> Self {
        Self {
            nu,
            c_h,
            f: Arc::new(|_, _| 0.0),
            g: Arc::new(|_, _| 0.0),
            u0: Arc::new(|_| 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(StvemError::invalid("nu", "must be positive"));
        }
        if !(self.c_h > 0.0 && self.c_h.is_finite()) {
            return Err(StvemError::invalid("c_H", "must be positive"));
        }
        Ok(())
    }
}

impl std::fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemData")
            .field("nu", &self.nu)
            .field("c_h", &self.c_h)
            .finish_non_exhaustive()
    }
}

/// Local-to-global numbering. DoFs are numbered slab by slab; inside a slab
/// the element-private DoFs (bulk and bottom moments) of each element come
/// first, in leaf order, followed by the time-like facet moments.
#[derive(Clone, Debug)]
pub struct GlobalDofMap {
    /// Indexed by leaf position.
    pub local_to_global: Vec<Vec<usize>>,
    pub n_dofs: usize,
    /// Boundary facet moments, fixed by the Dirichlet datum.
    pub constrained: Vec<bool>,
    pub slab_ranges: Vec<Range<usize>>,
    /// Global range of every time-like facet.
    pub facet_dofs: Vec<Range<usize>>,
    /// Leaf position of every element id, `None` for refined elements.
    pub leaf_pos: Vec<Option<usize>>,
}

impl GlobalDofMap {
    pub fn n_constrained(&self) -> usize {
        self.constrained.iter().filter(|&&c| c).count()
    }

    pub fn n_free(&self) -> usize {
        self.n_dofs - self.n_constrained()
    }

    pub fn position(&self, id: ElementId) -> usize {
        self.leaf_pos[id.0].expect("element is a leaf")
    }
}

pub fn build_dof_map(mesh: &SpaceTimeMesh) -> GlobalDofMap {
    let locals: Vec<LocalElement> = mesh
        .leaves()
        .iter()
        .map(|&id| LocalElement::from_mesh(mesh, id))
        .collect();
    build_dof_map_with(mesh, &locals)
}

fn build_dof_map_with(mesh: &SpaceTimeMesh, locals: &[LocalElement]) -> GlobalDofMap {
    let mut leaf_pos = vec![None; mesh.all_elements().len()];
    for (k, id) in mesh.leaves().iter().enumerate() {
        leaf_pos[id.0] = Some(k);
    }
    let n_slabs = mesh.slab_count();
    let mut facets_by_slab = vec![Vec::new(); n_slabs];
    for f in mesh.time_facets() {
        facets_by_slab[mesh.element(f.owner()).slab].push(f.id);
    }
    let layouts: Vec<_> = locals.iter().map(dof_layout).collect();
    let mut private = vec![(0usize, 0usize); locals.len()];
    let mut facet_dofs = vec![0..0; mesh.time_facets().len()];
    let mut constrained = Vec::new();
    let mut slab_ranges = Vec::with_capacity(n_slabs);
    let mut next = 0;
    for (s, members) in mesh.slab_members().iter().enumerate() {
        let start = next;
        for id in members {
            let k = leaf_pos[id.0].expect("slab members are leaves");
            private[k] = (next, layouts[k].bulk.len());
            next += layouts[k].bulk.len() + layouts[k].space.len();
        }
        constrained.resize(next, false);
        for &f in &facets_by_slab[s] {
            let tf = &mesh.time_facets()[f];
            let n = tf.moment_degree as usize + 1;
            facet_dofs[f] = next..next + n;
            next += n;
            constrained.resize(next, tf.is_boundary());
        }
        slab_ranges.push(start..next);
    }
    let local_to_global = locals
        .iter()
        .zip(&layouts)
        .zip(&private)
        .map(|((loc, lay), &(base, nb))| {
            let mut map = vec![0; lay.len()];
            for (i, slot) in map[lay.bulk.clone()].iter_mut().enumerate() {
                *slot = base + i;
            }
            for (f, r) in loc.facets.iter().zip(&lay.facets) {
                for (i, slot) in map[r.clone()].iter_mut().enumerate() {
                    *slot = facet_dofs[f.id].start + i;
                }
            }
            for (i, slot) in map[lay.space.clone()].iter_mut().enumerate() {
                *slot = base + nb + i;
            }
            map
        })
        .collect();
    GlobalDofMap {
        local_to_global,
        n_dofs: next,
        constrained,
        slab_ranges,
        facet_dofs,
        leaf_pos,
    }
}

/// Reference matrices keyed by element topology, shared across meshes of an
/// adaptive sequence.
#[derive(Debug, Default)]
pub struct ReferenceCache {
    entries: HashMap<TopoSignature, Arc<ReferenceLocal>>,
    computations: usize,
}

impl ReferenceCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of reference computations performed so far.
    pub fn computations(&self) -> usize {
        self.computations
    }

    /// Makes sure every class of `mesh` has an entry; missing ones are
    /// computed in parallel from their first representative.
    fn populate(&mut self, mesh: &SpaceTimeMesh, locals: &[LocalElement]) -> Result<()> {
        let mut todo: Vec<(TopoSignature, usize)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (k, e) in mesh.leaf_elements().enumerate() {
            let sig = mesh.topo_signature(e.topo_flag);
            if !self.entries.contains_key(sig) && seen.insert(sig.clone()) {
                todo.push((sig.clone(), k));
            }
        }
        let fresh: Vec<_> = todo
            .par_iter()
            .map(|(_, k)| {
                ReferenceLocal::new(&locals[*k]).map_err(|e| with_element(e, mesh.leaves()[*k]))
            })
            .collect::<Result<_>>()?;
        self.computations += fresh.len();
        for ((sig, _), r) in todo.into_iter().zip(fresh) {
            self.entries.insert(sig, Arc::new(r));
        }
        Ok(())
    }

    fn get(&self, sig: &TopoSignature) -> Arc<ReferenceLocal> {
        Arc::clone(&self.entries[sig])
    }
}

fn with_element(e: StvemError, id: ElementId) -> StvemError {
    match e {
        StvemError::SingularLocal { what, .. } => StvemError::SingularLocal { element: id.0, what },
        other => other,
    }
}

#[derive(Clone, Debug)]
enum MatrixSource {
    Reference(Arc<ReferenceLocal>),
    Direct(Box<LocalMatrices>),
}

/// Everything the global solve needs about one leaf element.
#[derive(Clone, Debug)]
pub struct ElementLocal {
    pub id: ElementId,
    pub slab: usize,
    pub elem: LocalElement,
    pub proj: Arc<ProjectorSet>,
    source: MatrixSource,
}

impl ElementLocal {
    pub fn matrices(&self, nu: f64, c_h: f64) -> LocalMatrices {
        match &self.source {
            MatrixSource::Reference(r) => r.scaled(self.elem.h_x(), self.elem.h_t(), nu, c_h),
            MatrixSource::Direct(m) => (**m).clone(),
        }
    }
}

/// Local data of all leaves of a mesh for fixed `nu` and `c_H`.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub nu: f64,
    pub c_h: f64,
    /// Indexed by leaf position.
    pub locals: Vec<ElementLocal>,
    pub dofs: GlobalDofMap,
    /// Projector and matrix computations performed while building.
    pub computations: usize,
}

impl Discretization {
    /// With a cache, local matrices are rescaled copies of one reference per
    /// topology class; without, every element is computed directly.
    pub fn new(
        mesh: &SpaceTimeMesh,
        nu: f64,
        c_h: f64,
        cache: Option<&mut ReferenceCache>,
    ) -> Result<Self> {
        let leaves = mesh.leaves();
        let geo: Vec<LocalElement> = leaves
            .par_iter()
            .map(|&id| LocalElement::from_mesh(mesh, id))
            .collect();
        let dofs = build_dof_map_with(mesh, &geo);
        let (locals, computations) = match cache {
            Some(cache) => {
                let before = cache.computations();
                cache.populate(mesh, &geo)?;
                let locals = geo
                    .into_iter()
                    .zip(leaves)
                    .map(|(elem, &id)| {
                        let e = mesh.element(id);
                        let r = cache.get(mesh.topo_signature(e.topo_flag));
                        ElementLocal {
                            id,
                            slab: e.slab,
                            elem,
                            proj: Arc::clone(&r.proj),
                            source: MatrixSource::Reference(r),
                        }
                    })
                    .collect();
                (locals, cache.computations() - before)
            }
            None => {
                let locals = geo
                    .into_par_iter()
                    .zip(leaves.par_iter())
                    .map(|(elem, &id)| {
                        let proj = ProjectorSet::new(&elem).map_err(|e| with_element(e, id))?;
                        let mats = local_forms(&elem, &proj, nu, c_h);
                        Ok(ElementLocal {
                            id,
                            slab: mesh.element(id).slab,
                            elem,
                            proj: Arc::new(proj),
                            source: MatrixSource::Direct(Box::new(mats)),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let n = locals.len();
                (locals, n)
            }
        };
        Ok(Self {
            nu,
            c_h,
            locals,
            dofs,
            computations,
        })
    }

    /// Local DoF values of leaf `k`.
    pub fn local_values(&self, k: usize, u: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.dofs.local_to_global[k].len(),
            self.dofs.local_to_global[k].iter().map(|&g| u[g]),
        )
    }
}

/// Data-dependent terms: element loads (source plus initial datum),
/// upwind couplings and the values of constrained DoFs.
pub struct DataTerms {
    /// Indexed by leaf position.
    pub loads: Vec<Vec<f64>>,
    /// `(plus, minus, matrix)` per interior space-like facet, leaf positions.
    pub couplings: Vec<(usize, usize, DMatrix<f64>)>,
    /// Prescribed values, meaningful only at constrained DoFs.
    pub prescribed: Vec<f64>,
}

pub fn data_terms(
    mesh: &SpaceTimeMesh,
    disc: &Discretization,
    data: &ProblemData,
    policy: &dyn QuadPolicy,
) -> Result<DataTerms> {
    let loads = disc
        .locals
        .par_iter()
        .map(|loc| {
            let mut l = load_vector(|x, t| (data.f)(x, t), &loc.elem, &loc.proj.layout, policy);
            if loc.elem.t_iv.lo == 0.0 {
                let u0 = initial_load(|x| (data.u0)(x), &loc.elem, &loc.proj, data.c_h, policy);
                l.iter_mut().zip(u0).for_each(|(a, b)| *a += b);
            }
            l
        })
        .collect();

    let couplings = upwind_couplings(mesh, disc, data.c_h);

    let mut prescribed = vec![0.0; disc.dofs.n_dofs];
    for tf in mesh.time_facets().iter().filter(|f| f.is_boundary()) {
        let owner = mesh.element(tf.owner());
        let basis = basis_1d(tf.moment_degree, tf.t_iv);
        let (_, rt) = policy.rules(owner.x_iv, tf.t_iv, tf.moment_degree);
        let m = moments(|t| (data.g)(tf.x_pos, t[0]), &basis, &rt);
        prescribed[disc.dofs.facet_dofs[tf.id].clone()].copy_from_slice(&m);
    }
    Ok(DataTerms {
        loads,
        couplings,
        prescribed,
    })
}

/// `(plus, minus, matrix)` for every space-like facet above `t = 0`, as
/// leaf positions, in facet order.
pub fn upwind_couplings(
    mesh: &SpaceTimeMesh,
    disc: &Discretization,
    c_h: f64,
) -> Vec<(usize, usize, DMatrix<f64>)> {
    let pairs: Vec<(usize, usize, usize)> = mesh
        .space_facets()
        .iter()
        .filter_map(|sf| {
            sf.below_elem.map(|below| {
                (sf.id, disc.dofs.position(sf.above_elem), disc.dofs.position(below))
            })
        })
        .collect();
    pairs
        .par_iter()
        .map(|&(f, kp, km)| {
            let (p, m) = (&disc.locals[kp], &disc.locals[km]);
            let ex = mesh.space_facets()[f].x_iv;
            (kp, km, upwind_coupling(&p.elem, &p.proj, &m.elem, &m.proj, ex, c_h))
        })
        .collect()
}

/// System over all unconstrained DoFs for the element matrices `matrix_of`
/// and element loads `loads`, with zero values at constrained DoFs.
pub fn free_system(
    disc: &Discretization,
    matrix_of: impl Fn(&ElementLocal) -> DMatrix<f64>,
    loads: &[Vec<f64>],
) -> SlabSystem {
    let dofs = &disc.dofs;
    let unknowns: Vec<usize> = (0..dofs.n_dofs).filter(|&g| !dofs.constrained[g]).collect();
    let mut index = vec![usize::MAX; dofs.n_dofs];
    for (i, &g) in unknowns.iter().enumerate() {
        index[g] = i;
    }
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; unknowns.len()];
    for (k, loc) in disc.locals.iter().enumerate() {
        let l2g = &dofs.local_to_global[k];
        let m = matrix_of(loc);
        for (i, &gi) in l2g.iter().enumerate() {
            let r = index[gi];
            if r == usize::MAX {
                continue;
            }
            rhs[r] += loads[k][i];
            for (j, &gj) in l2g.iter().enumerate() {
                let c = index[gj];
                if c != usize::MAX && m[(i, j)] != 0.0 {
                    triplets.push((r, c, m[(i, j)]));
                }
            }
        }
    }
    SlabSystem {
        slab: 0,
        unknowns,
        triplets,
        rhs,
    }
}

/// Sparse system over a set of unknown global DoFs.
#[derive(Clone, Debug)]
pub struct SlabSystem {
    pub slab: usize,
    /// Global DoF of every unknown, in system order.
    pub unknowns: Vec<usize>,
    /// `(row, col, value)` with rows for test functions; duplicates add up.
    pub triplets: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
}

impl SlabSystem {
    pub fn dim(&self) -> usize {
        self.unknowns.len()
    }

    /// Writes the matrix as `row col value` lines, one per entry.
    pub fn write_coordinate(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "% slab {} size {}", self.slab, self.dim())?;
        for &(r, c, v) in &self.triplets {
            writeln!(w, "{r} {c} {v:.17e}")?;
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        if n == 0 {
            return Ok(Vec::new());
        }
        let fail = || StvemError::SingularSlab { slab: self.slab };
        let trip: Vec<_> = self
            .triplets
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, v))
            .collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip).map_err(|_| fail())?;
        let lu = a.sp_lu().map_err(|_| fail())?;
        let b = faer::Mat::<f64>::from_fn(n, 1, |i, _| self.rhs[i]);
        let x = lu.solve(&b);
        let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(fail())
        }
    }
}

/// Assembles the rows of `elements` over the unknowns flagged in `index`
/// (`usize::MAX` marks a known value taken from `u`).
#[allow(clippy::too_many_arguments)]
fn assemble_block(
    disc: &Discretization,
    terms: &DataTerms,
    coupling_of: &[Vec<usize>],
    elements: &[usize],
    index: &[usize],
    u: &[f64],
    slab: usize,
    unknowns: Vec<usize>,
) -> SlabSystem {
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; unknowns.len()];
    let dofs = &disc.dofs;
    let mut add_block = |rows: &[usize], cols: &[usize], m: &DMatrix<f64>, rhs: &mut [f64]| {
        for (i, &gi) in rows.iter().enumerate() {
            let r = index[gi];
            if r == usize::MAX {
                continue;
            }
            for (j, &gj) in cols.iter().enumerate() {
                let v = m[(i, j)];
                if v == 0.0 {
                    continue;
                }
                match index[gj] {
                    usize::MAX => rhs[r] -= v * u[gj],
                    c => triplets.push((r, c, v)),
                }
            }
        }
    };
    for &k in elements {
        let rows = &dofs.local_to_global[k];
        let m = disc.locals[k].matrices(disc.nu, disc.c_h).element_matrix();
        add_block(rows, rows, &m, &mut rhs);
        for &c in &coupling_of[k] {
            let (_, km, ref cm) = terms.couplings[c];
            add_block(rows, &dofs.local_to_global[km], cm, &mut rhs);
        }
        for (i, &gi) in rows.iter().enumerate() {
            if index[gi] != usize::MAX {
                rhs[index[gi]] += terms.loads[k][i];
            }
        }
    }
    SlabSystem {
        slab,
        unknowns,
        triplets,
        rhs,
    }
}

fn couplings_by_plus(disc: &Discretization, terms: &DataTerms) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); disc.locals.len()];
    for (c, (kp, _, _)) in terms.couplings.iter().enumerate() {
        out[*kp].push(c);
    }
    out
}

/// Options for [`solve_slabs`].
#[derive(Default)]
pub struct SolveOptions<'a> {
    /// Receives every slab system before it is solved.
    pub dump: Option<&'a mut dyn FnMut(&SlabSystem) -> std::io::Result<()>>,
}

/// Solves slab by slab in time order. Returns the global DoF vector,
/// constrained entries included.
pub fn solve_slabs(
    mesh: &SpaceTimeMesh,
    disc: &Discretization,
    data: &ProblemData,
    policy: &dyn QuadPolicy,
    mut opts: SolveOptions<'_>,
) -> Result<Vec<f64>> {
    data.validate()?;
    let terms = data_terms(mesh, disc, data, policy)?;
    let by_plus = couplings_by_plus(disc, &terms);
    let dofs = &disc.dofs;
    let mut u = terms.prescribed.clone();
    let mut index = vec![usize::MAX; dofs.n_dofs];
    for (s, members) in mesh.slab_members().iter().enumerate() {
        let unknowns: Vec<usize> = dofs.slab_ranges[s]
            .clone()
            .filter(|&g| !dofs.constrained[g])
            .collect();
        for (i, &g) in unknowns.iter().enumerate() {
            index[g] = i;
        }
        let elements: Vec<usize> = members.iter().map(|&id| dofs.position(id)).collect();
        let sys = assemble_block(disc, &terms, &by_plus, &elements, &index, &u, s, unknowns);
        if let Some(dump) = opts.dump.as_mut() {
            dump(&sys)?;
        }
        let x = sys.solve()?;
        for (&g, v) in sys.unknowns.iter().zip(x) {
            u[g] = v;
            index[g] = usize::MAX;
        }
    }
    Ok(u)
}

/// Solves the whole space-time system at once.
pub fn solve_monolithic(
    mesh: &SpaceTimeMesh,
    disc: &Discretization,
    data: &ProblemData,
    policy: &dyn QuadPolicy,
) -> Result<Vec<f64>> {
    data.validate()?;
    let terms = data_terms(mesh, disc, data, policy)?;
    let by_plus = couplings_by_plus(disc, &terms);
    let dofs = &disc.dofs;
    let unknowns: Vec<usize> = (0..dofs.n_dofs).filter(|&g| !dofs.constrained[g]).collect();
    let mut index = vec![usize::MAX; dofs.n_dofs];
    for (i, &g) in unknowns.iter().enumerate() {
        index[g] = i;
    }
    let elements: Vec<usize> = (0..disc.locals.len()).collect();
    let mut u = terms.prescribed.clone();
    let sys = assemble_block(disc, &terms, &by_plus, &elements, &index, &u, 0, unknowns);
    let x = sys.solve()?;
    for (&g, v) in sys.unknowns.iter().zip(x) {
        u[g] = v;
    }
    Ok(u)
}

/// Convenience wrapper: discretize with a fresh cache and solve slab by slab.
pub fn assemble_and_solve(
    mesh: &SpaceTimeMesh,
    data: &ProblemData,
    policy: &dyn QuadPolicy,
) -> Result<(Discretization, Vec<f64>)> {
    let mut cache = ReferenceCache::new();
    let disc = Discretization::new(mesh, data.nu, data.c_h, Some(&mut cache))?;
    let u = solve_slabs(mesh, &disc, data, policy, SolveOptions::default())?;
    Ok((disc, u))
}
