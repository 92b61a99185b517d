//! The map carried by a subgroup on its quotient surface: darts are the
//! special triangles, edges are the even lines and faces are the tiles.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::farey::FareySymbol;
use crate::invariants::signature_of;
use crate::perm::{is_transitive, Perm};
use crate::permrep::{LineKind, Omega};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    /// Paired with itself, a single dart.
    Free,
    /// Both ends at the same vertex.
    Loop,
    Segment,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeKind::Free => "free",
            EdgeKind::Loop => "loop",
            EdgeKind::Segment => "segment",
        })
    }
}

#[derive(Clone, Debug)]
pub struct MapStruct {
    /// Dart labels in index order.
    pub darts: Vec<String>,
    pub r1: Perm,
    pub r2: Perm,
    /// Cusp classes.
    pub vertices: usize,
    /// Even-line classes, free edges included.
    pub edges: usize,
    pub faces: usize,
    pub genus: u64,
    /// One entry per edge, labelled by its line number.
    pub edge_kinds: Vec<(String, EdgeKind)>,
}

impl MapStruct {
    pub fn free_edges(&self) -> usize {
        self.edge_kinds.iter().filter(|(_, k)| *k == EdgeKind::Free).count()
    }

    /// V − E + F of the cell structure on the closed surface. A free edge
    /// folds onto half of itself and ends at an order-2 point, which is a
    /// vertex of the cell structure although it is not a cusp.
    pub fn euler_characteristic(&self) -> i64 {
        (self.vertices + self.free_edges()) as i64 - self.edges as i64 + self.faces as i64
    }

    pub fn to_json(&self, om: &Omega) -> Value {
        json!({
            "darts": self.darts,
            "r1": om.format(&self.r1),
            "r2": om.format(&self.r2),
            "V": self.vertices,
            "free_ends": self.free_edges(),
            "E": self.edges,
            "F": self.faces,
            "genus": self.genus,
            "edges": self.edge_kinds.iter().map(|(l, k)| json!({"label": l, "kind": k.to_string()})).collect::<Vec<_>>(),
        })
    }
}

/// Edge kinds of the lines of `om`, with cusp classes read from `sym`.
pub fn classify_edges(sym: &FareySymbol, om: &Omega) -> Vec<(String, EdgeKind)> {
    let classes = sym.cusp_classes();
    om.lines
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let kind = match l.kind {
                LineKind::SelfPaired => EdgeKind::Free,
                LineKind::Shared if classes[l.ends.0] == classes[l.ends.1] => EdgeKind::Loop,
                LineKind::Shared => EdgeKind::Segment,
            };
            ((k + 1).to_string(), kind)
        })
        .collect()
}

pub fn map_of(sym: &FareySymbol) -> Result<(MapStruct, Omega)> {
    let om = Omega::of(sym)?;
    let sig = signature_of(sym)?;
    let (r1, r2) = (om.f_s.clone(), om.f_r.clone());
    let n = om.size();
    if !is_transitive(&[r1.clone(), r2.clone()], n) {
        return Err(Error::CorruptSymbol("map is not connected".into()));
    }
    let m = MapStruct {
        darts: om.labels().to_vec(),
        vertices: om.cusp_count(),
        edges: om.lines.len(),
        faces: om.tiles.len(),
        genus: 0,
        edge_kinds: classify_edges(sym, &om),
        r1,
        r2,
    };
    let chi = m.euler_characteristic();
    if chi > 2 || chi % 2 != 0 || ((2 - chi) / 2) as u64 != sig.g {
        return Err(Error::CorruptSymbol(format!("Euler characteristic {chi} disagrees with genus {}", sig.g)));
    }
    Ok((MapStruct { genus: sig.g, ..m }, om))
}

/// Order of the automorphism group, the centralizer of ⟨r1, r2⟩.
pub fn aut_order(map: &MapStruct) -> Result<usize> {
    Ok(crate::perm::centralizer(&[map.r1.clone(), map.r2.clone()], map.darts.len())?.len())
}
