//! Abstract assemblies: tile types, tile instances, the bond graph, cut
//! stability, and the rigid-component face graph. Geometry enters only
//! through configurations (see configspace); an assembly itself is a graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

use crate::geometry::{Glue, Side};

/// A tile type: an id and one glue per side, indexed N, E, S, W.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TileType {
    pub id: String,
    pub glues: [Glue; 4],
}

impl TileType {
    pub fn new(id: &str, north: Glue, east: Glue, south: Glue, west: Glue) -> Arc<TileType> {
        Arc::new(TileType {
            id: id.to_string(),
            glues: [north, east, south, west],
        })
    }

    pub fn glue(&self, side: Side) -> &Glue {
        &self.glues[side.index()]
    }
}

/// One endpoint of a bond: a tile instance and the side it binds on.
pub type BondEnd = (u64, Side);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Bond {
    pub a: BondEnd,
    pub b: BondEnd,
    pub strength: u32,
    pub flexible: bool,
}

impl Bond {
    pub fn touches(&self, uid: u64) -> bool {
        self.a.0 == uid || self.b.0 == uid
    }

    /// The endpoint on the far side from `uid`.
    pub fn other_end(&self, uid: u64) -> BondEnd {
        if self.a.0 == uid {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum AssemblyError {
    #[error("assembly is not connected")]
    NotConnected,
    #[error("tile {0} not present")]
    NoSuchTile(u64),
    #[error("tile {0} already present")]
    DuplicateTile(u64),
    #[error("glue ({uid}, {side}) already carries a bond")]
    GlueInUse { uid: u64, side: Side },
    #[error("glues at ({0}, {1}) and ({2}, {3}) cannot form a bond")]
    IncompatibleGlues(u64, Side, u64, Side),
}

/// Connected, instance-identified bond graph of tiles.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assembly {
    pub tiles: BTreeMap<u64, Arc<TileType>>,
    pub bonds: Vec<Bond>,
}

impl Assembly {
    pub fn new() -> Assembly {
        Assembly::default()
    }

    pub fn single(uid: u64, tt: Arc<TileType>) -> Assembly {
        let mut a = Assembly::new();
        a.add_tile(uid, tt);
        a
    }

    pub fn add_tile(&mut self, uid: u64, tt: Arc<TileType>) {
        let prev = self.tiles.insert(uid, tt);
        assert!(prev.is_none(), "duplicate tile uid {uid}");
    }

    pub fn next_uid(&self) -> u64 {
        self.tiles.keys().next_back().map_or(0, |m| m + 1)
    }

    pub fn tile_type(&self, uid: u64) -> &Arc<TileType> {
        self.tiles.get(&uid).expect("no such tile")
    }

    pub fn glue_at(&self, end: BondEnd) -> &Glue {
        self.tile_type(end.0).glue(end.1)
    }

    /// Index of the bond on this glue, if any. Each glue carries at most one.
    pub fn bond_at(&self, end: BondEnd) -> Option<usize> {
        self.bonds.iter().position(|b| b.a == end || b.b == end)
    }

    /// Add a bond between two glues, deriving strength and flexibility from
    /// the glue records. Checks labels and glue exclusivity, not geometry.
    pub fn try_add_bond(&mut self, a: BondEnd, b: BondEnd) -> Result<usize, AssemblyError> {
        for end in [a, b] {
            if !self.tiles.contains_key(&end.0) {
                return Err(AssemblyError::NoSuchTile(end.0));
            }
            if self.bond_at(end).is_some() {
                return Err(AssemblyError::GlueInUse {
                    uid: end.0,
                    side: end.1,
                });
            }
        }
        let (ga, gb) = (self.glue_at(a), self.glue_at(b));
        let compatible = ga.label.is_complement_of(&gb.label)
            && ga.strength == gb.strength
            && ga.strength > 0
            && ga.flexible == gb.flexible;
        if !compatible {
            return Err(AssemblyError::IncompatibleGlues(a.0, a.1, b.0, b.1));
        }
        let bond = Bond {
            a,
            b,
            strength: ga.strength,
            flexible: ga.flexible,
        };
        self.bonds.push(bond);
        Ok(self.bonds.len() - 1)
    }

    pub fn add_bond(&mut self, a: BondEnd, b: BondEnd) -> usize {
        match self.try_add_bond(a, b) {
            Ok(i) => i,
            Err(e) => panic!("add_bond({a:?}, {b:?}): {e}"),
        }
    }

    pub fn flexible_bond_indices(&self) -> Vec<usize> {
        (0..self.bonds.len())
            .filter(|&i| self.bonds[i].flexible)
            .collect()
    }

    /// Map uid -> indices of incident bonds.
    pub fn adjacency(&self) -> BTreeMap<u64, Vec<usize>> {
        let mut adj: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for uid in self.tiles.keys() {
            adj.insert(*uid, Vec::new());
        }
        for (i, b) in self.bonds.iter().enumerate() {
            adj.get_mut(&b.a.0).expect("bond endpoint missing").push(i);
            adj.get_mut(&b.b.0).expect("bond endpoint missing").push(i);
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        let Some((&start, _)) = self.tiles.iter().next() else {
            return true;
        };
        let adj = self.adjacency();
        let mut seen = BTreeSet::from([start]);
        let mut queue = vec![start];
        while let Some(u) = queue.pop() {
            for &bi in &adj[&u] {
                let (v, _) = self.bonds[bi].other_end(u);
                if seen.insert(v) {
                    queue.push(v);
                }
            }
        }
        seen.len() == self.tiles.len()
    }

    /// Sides carrying a non-empty glue with no bond on it.
    pub fn unbound_glues(&self) -> Vec<BondEnd> {
        let mut bound: BTreeSet<BondEnd> = BTreeSet::new();
        for b in &self.bonds {
            bound.insert(b.a);
            bound.insert(b.b);
        }
        let mut out = Vec::new();
        for (&uid, tt) in &self.tiles {
            for side in Side::ALL {
                if !tt.glue(side).is_empty() && !bound.contains(&(uid, side)) {
                    out.push((uid, side));
                }
            }
        }
        out
    }
}

/// Weight of the global minimum bond cut; u64::MAX for a single tile.
pub fn min_cut_weight(a: &Assembly) -> Result<u64, AssemblyError> {
    if !a.is_connected() {
        return Err(AssemblyError::NotConnected);
    }
    let uids: Vec<u64> = a.tiles.keys().copied().collect();
    let n = uids.len();
    if n <= 1 {
        return Ok(u64::MAX);
    }
    let index: BTreeMap<u64, usize> = uids.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let mut w = vec![vec![0u64; n]; n];
    for b in &a.bonds {
        let (i, j) = (index[&b.a.0], index[&b.b.0]);
        if i != j {
            w[i][j] += b.strength as u64;
            w[j][i] += b.strength as u64;
        }
    }
    Ok(global_min_cut(w))
}

/// Stoer-Wagner minimum cut over a symmetric weight matrix.
fn global_min_cut(mut w: Vec<Vec<u64>>) -> u64 {
    let n = w.len();
    let mut active: Vec<usize> = (0..n).collect();
    let mut best = u64::MAX;
    while active.len() > 1 {
        let m = active.len();
        // Maximum-adjacency order; the last vertex's connectivity is the
        // cut of the phase.
        let mut wsum = vec![0u64; m];
        let mut added = vec![false; m];
        let (mut s, mut t) = (0usize, 0usize);
        for _ in 0..m {
            let mut sel = usize::MAX;
            for i in 0..m {
                if !added[i] && (sel == usize::MAX || wsum[i] > wsum[sel]) {
                    sel = i;
                }
            }
            added[sel] = true;
            s = t;
            t = sel;
            for i in 0..m {
                if !added[i] {
                    wsum[i] += w[active[sel]][active[i]];
                }
            }
        }
        best = best.min(wsum[t]);
        // Merge t into s.
        let (vs, vt) = (active[s], active[t]);
        for i in 0..m {
            let vi = active[i];
            if vi != vs && vi != vt {
                w[vs][vi] += w[vt][vi];
                w[vi][vs] = w[vs][vi];
            }
        }
        active.remove(t);
    }
    best
}

/// Whether every cut separating the assembly has total strength >= tau.
/// A single tile is stable by convention.
pub fn tau_stable(a: &Assembly, tau: u32) -> Result<bool, AssemblyError> {
    Ok(min_cut_weight(a)? >= tau as u64)
}

/// Assembly graph with rigidly-connected groups contracted to single nodes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FaceGraph {
    /// Maximal rigid groups, each sorted; ordered by smallest member.
    pub nodes: Vec<BTreeSet<u64>>,
    /// Unordered node index pairs joined by at least one flexible bond.
    pub edges: BTreeSet<(usize, usize)>,
}

pub fn face_graph(a: &Assembly) -> FaceGraph {
    // Union-find over rigid bonds.
    let uids: Vec<u64> = a.tiles.keys().copied().collect();
    let index: BTreeMap<u64, usize> = uids.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let mut parent: Vec<usize> = (0..uids.len()).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for b in &a.bonds {
        if !b.flexible {
            let (ra, rb) = (
                find(&mut parent, index[&b.a.0]),
                find(&mut parent, index[&b.b.0]),
            );
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<u64>> = BTreeMap::new();
    for (&uid, &i) in &index {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().insert(uid);
    }
    let nodes: Vec<BTreeSet<u64>> = groups.into_values().collect();
    let node_of: BTreeMap<u64, usize> = nodes
        .iter()
        .enumerate()
        .flat_map(|(i, g)| g.iter().map(move |&u| (u, i)))
        .collect();
    let mut edges = BTreeSet::new();
    for b in &a.bonds {
        if b.flexible {
            let (x, y) = (node_of[&b.a.0], node_of[&b.b.0]);
            if x != y {
                edges.insert((x.min(y), x.max(y)));
            }
        }
    }
    FaceGraph { nodes, edges }
}

/// A tile system: the available tile types, a seed assembly, and the
/// temperature every attachment and cut must meet.
#[derive(Clone, PartialEq, Debug)]
pub struct FtamSystem {
    pub tile_types: Vec<Arc<TileType>>,
    pub seed: Assembly,
    pub temperature: u32,
}

impl FtamSystem {
    pub fn tile_type_by_id(&self, id: &str) -> Option<&Arc<TileType>> {
        self.tile_types.iter().find(|t| t.id == id)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    DuplicateGlueUse { uid: u64, side: Side },
    DanglingBond { bond: usize },
    BondGlueMismatch { bond: usize },
    UnknownTileType { uid: u64, type_id: String },
    NotConnected,
    NotTauStable,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Violation::DuplicateGlueUse { uid, side } => {
                write!(f, "glue ({uid}, {side}) carries more than one bond")
            }
            Violation::DanglingBond { bond } => {
                write!(f, "bond {bond} references a missing tile")
            }
            Violation::BondGlueMismatch { bond } => {
                write!(f, "bond {bond} does not match its endpoint glues")
            }
            Violation::UnknownTileType { uid, type_id } => {
                write!(f, "tile {uid} has type `{type_id}` not in the system")
            }
            Violation::NotConnected => write!(f, "assembly is not connected"),
            Violation::NotTauStable => write!(f, "assembly is not stable at the temperature"),
        }
    }
}

/// All structural violations of an assembly against a system: glue
/// exclusivity, bond/glue agreement, known tile types, connectivity,
/// and cut stability.
pub fn check_assembly(a: &Assembly, s: &FtamSystem) -> Vec<Violation> {
    let mut out = Vec::new();
    for (&uid, tt) in &a.tiles {
        match s.tile_type_by_id(&tt.id) {
            Some(known) if known.as_ref() == tt.as_ref() => {}
            _ => out.push(Violation::UnknownTileType {
                uid,
                type_id: tt.id.clone(),
            }),
        }
    }
    let mut used: BTreeMap<BondEnd, u32> = BTreeMap::new();
    for (i, b) in a.bonds.iter().enumerate() {
        if !a.tiles.contains_key(&b.a.0) || !a.tiles.contains_key(&b.b.0) {
            out.push(Violation::DanglingBond { bond: i });
            continue;
        }
        *used.entry(b.a).or_insert(0) += 1;
        *used.entry(b.b).or_insert(0) += 1;
        let (ga, gb) = (a.glue_at(b.a), a.glue_at(b.b));
        let ok = ga.label.is_complement_of(&gb.label)
            && ga.strength == gb.strength
            && ga.strength == b.strength
            && b.strength > 0
            && ga.flexible == gb.flexible
            && ga.flexible == b.flexible;
        if !ok {
            out.push(Violation::BondGlueMismatch { bond: i });
        }
    }
    for (end, count) in used {
        if count > 1 {
            out.push(Violation::DuplicateGlueUse {
                uid: end.0,
                side: end.1,
            });
        }
    }
    if !a.is_connected() {
        out.push(Violation::NotConnected);
    } else if tau_stable(a, s.temperature) != Ok(true) {
        out.push(Violation::NotTauStable);
    }
    out
}
