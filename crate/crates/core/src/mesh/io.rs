//! Plain-text mesh dump (`stvem-mesh/1`).
//!
//! ```text
//! stvem-mesh/1
//! domain <x_lo> <x_hi> <t_final>
//! elements <n>
//! <id> <x_lo> <x_hi> <t_lo> <t_hi> <degree> <slab> <flag>
//! time_facets <n>
//! <id> <x> <t_lo> <t_hi> <left|-> <right|-> <degree> <h_fx>
//! space_facets <n>
//! <id> <t> <x_lo> <x_hi> <below|-> <above> <degree>
//! ```
//!
//! Element ids are positions in the leaf list. Floats use the shortest
//! representation that round-trips.

use std::collections::HashMap;
use std::io::Write;

use super::{ElementId, SpaceTimeMesh};
use crate::error::{Result, StvemError};

pub fn write_mesh(mesh: &SpaceTimeMesh, w: &mut impl Write) -> Result<()> {
    let pos: HashMap<ElementId, usize> = mesh
        .leaves()
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i))
        .collect();
    let opt = |e: Option<ElementId>| e.map_or_else(|| "-".to_string(), |e| pos[&e].to_string());
    writeln!(w, "stvem-mesh/1")?;
    writeln!(w, "domain {} {} {}", mesh.omega().lo, mesh.omega().hi, mesh.t_final())?;
    writeln!(w, "elements {}", mesh.n_leaves())?;
    for (i, e) in mesh.leaf_elements().enumerate() {
        writeln!(
            w,
            "{i} {} {} {} {} {} {} {}",
            e.x_iv.lo, e.x_iv.hi, e.t_iv.lo, e.t_iv.hi, e.degree, e.slab, e.topo_flag.0
        )?;
    }
    writeln!(w, "time_facets {}", mesh.time_facets().len())?;
    for f in mesh.time_facets() {
        writeln!(
            w,
            "{} {} {} {} {} {} {} {}",
            f.id,
            f.x_pos,
            f.t_iv.lo,
            f.t_iv.hi,
            opt(f.left_elem),
            opt(f.right_elem),
            f.moment_degree,
            f.h_fx
        )?;
    }
    writeln!(w, "space_facets {}", mesh.space_facets().len())?;
    for f in mesh.space_facets() {
        writeln!(
            w,
            "{} {} {} {} {} {} {}",
            f.id,
            f.t_pos,
            f.x_iv.lo,
            f.x_iv.hi,
            opt(f.below_elem),
            pos[&f.above_elem],
            f.moment_degree
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementRecord {
    pub x: (f64, f64),
    pub t: (f64, f64),
    pub degree: u32,
    pub slab: usize,
    pub flag: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeFacetRecord {
    pub x: f64,
    pub t: (f64, f64),
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub degree: u32,
    pub h_fx: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceFacetRecord {
    pub t: f64,
    pub x: (f64, f64),
    pub below: Option<usize>,
    pub above: usize,
    pub degree: u32,
}

/// Parsed contents of a mesh dump.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshDump {
    pub domain: (f64, f64, f64),
    pub elements: Vec<ElementRecord>,
    pub time_facets: Vec<TimeFacetRecord>,
    pub space_facets: Vec<SpaceFacetRecord>,
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> StvemError {
        StvemError::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<Vec<&'a str>> {
        let (i, l) = self.it.next().ok_or_else(|| self.err("unexpected end of input"))?;
        self.line = i + 1;
        Ok(l.split_whitespace().collect())
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let tok = self.next()?;
        if tok.len() != 2 || tok[0] != name {
            return Err(self.err(format!("expected `{name} <count>`")));
        }
        self.num(tok[1])
    }

    fn num<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad number `{s}`")))
    }

    fn opt(&self, s: &str) -> Result<Option<usize>> {
        if s == "-" {
            Ok(None)
        } else {
            self.num(s).map(Some)
        }
    }

    fn row(&mut self, n: usize) -> Result<Vec<&'a str>> {
        let tok = self.next()?;
        if tok.len() != n {
            return Err(self.err(format!("expected {n} fields, got {}", tok.len())));
        }
        Ok(tok)
    }
}

pub fn parse_mesh(text: &str) -> Result<MeshDump> {
    let mut l = Lines {
        it: text.lines().enumerate(),
        line: 0,
    };
    if l.next()? != ["stvem-mesh/1"] {
        return Err(l.err("missing `stvem-mesh/1` header"));
    }
    let d = l.next()?;
    if d.len() != 4 || d[0] != "domain" {
        return Err(l.err("expected `domain <x_lo> <x_hi> <t_final>`"));
    }
    let domain = (l.num(d[1])?, l.num(d[2])?, l.num(d[3])?);

    let n = l.section("elements")?;
    let mut elements = Vec::with_capacity(n);
    for _ in 0..n {
        let r = l.row(8)?;
        elements.push(ElementRecord {
            x: (l.num(r[1])?, l.num(r[2])?),
            t: (l.num(r[3])?, l.num(r[4])?),
            degree: l.num(r[5])?,
            slab: l.num(r[6])?,
            flag: l.num(r[7])?,
        });
    }
    let n = l.section("time_facets")?;
    let mut time_facets = Vec::with_capacity(n);
    for _ in 0..n {
        let r = l.row(8)?;
        time_facets.push(TimeFacetRecord {
            x: l.num(r[1])?,
            t: (l.num(r[2])?, l.num(r[3])?),
            left: l.opt(r[4])?,
            right: l.opt(r[5])?,
            degree: l.num(r[6])?,
            h_fx: l.num(r[7])?,
        });
    }
    let n = l.section("space_facets")?;
    let mut space_facets = Vec::with_capacity(n);
    for _ in 0..n {
        let r = l.row(7)?;
        space_facets.push(SpaceFacetRecord {
            t: l.num(r[1])?,
            x: (l.num(r[2])?, l.num(r[3])?),
            below: l.opt(r[4])?,
            above: l.num(r[5])?,
            degree: l.num(r[6])?,
        });
    }
    Ok(MeshDump {
        domain,
        elements,
        time_facets,
        space_facets,
    })
}
