//! Compiles a voxel solid into a tile system whose terminal assemblies fold
//! into the scaled surface outline of the solid.
//!
//! Every surface unit square becomes a face_scale x face_scale patch of
//! unique tile types. Coplanar neighbours bond rigidly, each crease segment
//! is crossed by exactly one fold bond, and the corner loop at a vertex
//! closes cooperatively: its last tile needs both of its strength-1 bonds at
//! once, so the loop can only complete folded shut.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::vertex::{classify_vertex, corner_loops, quartet_kind, CornerSquare, SegmentKind, VertexKind};
use super::{GeneratorError, Polycube};
use crate::assembly::{Assembly, FtamSystem, TileType};
use crate::configspace::Embedding;
use crate::geometry::{
    classify_orientation, shared_edge, v3, AxisDirection, Glue, Mat3, Placement,
    RelativeOrientation, Side, Vec3,
};

/// Which of the determinism conditions the solid satisfies, and what was
/// found for the ambiguous fold directions that extra edge frames introduce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminismReport {
    /// The solid equals its mirror image up to rotation and translation.
    pub symmetric: bool,
    /// No corner required a reconfigurable recipe (always true on success;
    /// compilation fails otherwise).
    pub no_reconfigurable_corners: bool,
    /// Connected components of the crease graph.
    pub edge_frame_count: usize,
    pub edges_connected: bool,
    /// Fold-over ambiguities introduced by separating plates: one per
    /// (plate, side) where a whole side of the surface could mirror through
    /// the plate's plane.
    pub ambiguous_flips: usize,
    /// How many of those flips are harmless (land on themselves) or blocked
    /// by a collision with the rest of the surface.
    pub mitigated_flips: usize,
    pub deterministic: bool,
}

pub fn compile_polycube(
    p: &Polycube,
    face_scale: i64,
) -> Result<(FtamSystem, DeterminismReport), GeneratorError> {
    let p = normalize(p);
    let built = build_outline(&p, face_scale)?;
    let report = determinism_report(&p);
    let system = FtamSystem {
        tile_types: built.types,
        seed: built.seed,
        temperature: 2,
    };
    Ok((system, report))
}

/// The designed placement of every tile, keyed by its index in the sorted
/// tile order (the same order compile_polycube emits tile types in).
pub fn outline_embedding(p: &Polycube, face_scale: i64) -> Result<Embedding, GeneratorError> {
    let p = normalize(p);
    let built = build_outline(&p, face_scale)?;
    Ok(Embedding {
        placements: built
            .tiles
            .iter()
            .enumerate()
            .map(|(i, t)| (i as u64, t.placement))
            .collect(),
    })
}

/// Translate so the least corner sits at the origin; keeps ids and glue
/// labels free of negative coordinates.
fn normalize(p: &Polycube) -> Polycube {
    let min = p.cells().fold(None::<Vec3>, |acc, c| match acc {
        None => Some(c),
        Some(m) => Some(v3(m.x.min(c.x), m.y.min(c.y), m.z.min(c.z))),
    });
    let min = min.expect("polycubes are never empty");
    Polycube::new(p.cells().map(|c| c - min)).expect("translation preserves connectivity")
}

fn axis_of(v: Vec3, a: usize) -> i64 {
    match a {
        0 => v.x,
        1 => v.y,
        _ => v.z,
    }
}

fn dir_token(d: AxisDirection) -> &'static str {
    match d {
        AxisDirection::PosX => "px",
        AxisDirection::NegX => "nx",
        AxisDirection::PosY => "py",
        AxisDirection::NegY => "ny",
        AxisDirection::PosZ => "pz",
        AxisDirection::NegZ => "nz",
    }
}

struct TileRec {
    placement: Placement,
    cell: Vec3,
    outward: AxisDirection,
    rim: bool,
}

struct BondRec {
    a: usize,
    b: usize,
    a_side: Side,
    b_side: Side,
    strength: u32,
    flexible: bool,
}

struct Built {
    tiles: Vec<TileRec>,
    types: Vec<Arc<TileType>>,
    seed: Assembly,
}

/// Tile (i, j) of the patch covering the face of `cell` that points
/// `outward`, at scale k. Tiles on z-plates orient +y, all others +z.
fn face_placement(cell: Vec3, outward: AxisDirection, k: i64, i: i64, j: i64) -> Placement {
    let a = outward.axis();
    let others: Vec<usize> = (0..3).filter(|&x| x != a).collect();
    let mut loc = [cell.x * k, cell.y * k, cell.z * k];
    if outward.sign() > 0 {
        loc[a] += k;
    }
    loc[others[0]] += i;
    loc[others[1]] += j;
    let orientation = if a == 2 {
        AxisDirection::PosY
    } else {
        AxisDirection::PosZ
    };
    Placement::new(v3(loc[0], loc[1], loc[2]), outward, orientation)
}

/// The patch tile whose corner touches the scaled image of `point`.
fn corner_placement(sq: &CornerSquare, point: Vec3, k: i64) -> Placement {
    let a = sq.outward.axis();
    let others: Vec<usize> = (0..3).filter(|&x| x != a).collect();
    let mut offsets = [0i64; 2];
    for (n, &ax) in others.iter().enumerate() {
        let c = axis_of(sq.cell, ax);
        let p = axis_of(point, ax);
        debug_assert!(p == c || p == c + 1);
        offsets[n] = if p == c { 0 } else { k - 1 };
    }
    face_placement(sq.cell, sq.outward, k, offsets[0], offsets[1])
}

/// Kind of the unit segment a (scaled) tile edge lies on. Only meaningful
/// for edges on scaled cell boundaries, which is where creases live.
fn unit_segment_kind(p: &Polycube, mid2: Vec3, k: i64) -> SegmentKind {
    let m = [mid2.x, mid2.y, mid2.z];
    let axis = (0..3)
        .find(|&a| m[a] % 2 == 1)
        .expect("an edge midpoint is odd along exactly one axis");
    let mut base = [0i64; 3];
    for a in 0..3 {
        if a == axis {
            base[a] = ((m[a] - 1) / 2).div_euclid(k);
        } else {
            debug_assert_eq!(m[a] % (2 * k), 0, "crease edges sit on cell boundaries");
            base[a] = m[a] / (2 * k);
        }
    }
    segment_kind(p, v3(base[0], base[1], base[2]), axis)
}

/// Kind of the unit segment from `base` to `base + unit(axis)`.
fn segment_kind(p: &Polycube, base: Vec3, axis: usize) -> SegmentKind {
    let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
    let cyc = [(0i64, 0i64), (1, 0), (1, 1), (0, 1)];
    let mut filled = [false; 4];
    for (n, &(u, w)) in cyc.iter().enumerate() {
        let cell = base + Vec3::unit(others[0]) * (u - 1) + Vec3::unit(others[1]) * (w - 1);
        filled[n] = p.contains(cell);
    }
    quartet_kind(filled)
}

fn build_outline(p: &Polycube, k: i64) -> Result<Built, GeneratorError> {
    if k < 2 {
        return Err(GeneratorError::FaceScaleTooSmall { face_scale: k });
    }

    let mut tiles: Vec<TileRec> = Vec::new();
    for (cell, outward) in p.surface_faces() {
        for i in 0..k {
            for j in 0..k {
                tiles.push(TileRec {
                    placement: face_placement(cell, outward, k, i, j),
                    cell,
                    outward,
                    rim: false,
                });
            }
        }
    }
    tiles.sort_by_key(|t| t.placement);
    let slot_of: BTreeMap<(Vec3, usize), usize> = tiles
        .iter()
        .enumerate()
        .map(|(i, t)| (t.placement.slot(), i))
        .collect();
    assert_eq!(slot_of.len(), tiles.len(), "surface squares never overlap");

    // A tile is on its plate's rim when some in-plane neighbour slot has no
    // tile of the same normal (plate boundaries and creases).
    for i in 0..tiles.len() {
        let pl = tiles[i].placement;
        let a = pl.normal.axis();
        let rim = (0..3).filter(|&x| x != a).any(|ax| {
            [-1i64, 1].iter().any(|&s| {
                let nloc = pl.location + Vec3::unit(ax) * s;
                match slot_of.get(&(nloc, a)) {
                    Some(&j) => tiles[j].placement.normal != pl.normal,
                    None => true,
                }
            })
        });
        tiles[i].rim = rim;
    }

    // Group tile sides by the edge they sit on, then bond across each edge.
    let mut edge_map: BTreeMap<Vec3, Vec<usize>> = BTreeMap::new();
    for (i, t) in tiles.iter().enumerate() {
        for s in Side::ALL {
            edge_map
                .entry(t.placement.side_edge_mid2(s))
                .or_default()
                .push(i);
        }
    }

    let mut bonds: Vec<BondRec> = Vec::new();
    let mut bond_of_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&mid2, ends) in &edge_map {
        for x in 0..ends.len() {
            for y in x + 1..ends.len() {
                let (i, j) = (ends[x], ends[y]);
                let (pi, pj) = (tiles[i].placement, tiles[j].placement);
                let rec = match classify_orientation(&pi, &pj) {
                    Ok(RelativeOrientation::Straight) => {
                        // Same plate: rigid. Rim rows carry the frame, so
                        // they bind alone; fillers must wait for two
                        // neighbours.
                        let strength = if tiles[i].rim && tiles[j].rim { 2 } else { 1 };
                        Some((strength, false))
                    }
                    Ok(RelativeOrientation::Up) | Ok(RelativeOrientation::Down) => {
                        // Fold bonds stay on one sheet of the surface: both
                        // squares bound the same solid cell (convex, pinch)
                        // or wrap the same empty cell at a concave crease.
                        let same_cell = tiles[i].cell == tiles[j].cell;
                        let same_void = tiles[i].cell + tiles[i].outward.vec()
                            == tiles[j].cell + tiles[j].outward.vec();
                        let concave = same_void
                            && unit_segment_kind(p, mid2, k) == SegmentKind::ConcaveCrease;
                        (same_cell || concave).then_some((1, true))
                    }
                    Ok(RelativeOrientation::Incompatible) | Err(_) => None,
                };
                if let Some((strength, flexible)) = rec {
                    bond_of_pair.insert((i, j), bonds.len());
                    let (sa, sb, _) = shared_edge(&pi, &pj).expect("ends share this edge");
                    bonds.push(BondRec {
                        a: i,
                        b: j,
                        a_side: sa,
                        b_side: sb,
                        strength,
                        flexible,
                    });
                }
            }
        }
    }

    // Corner loops: all but the last two bonds of a loop are strength 2, so
    // growth can walk around the corner; the closing tile then needs both
    // weak bonds at once, which only a fully folded corner offers.
    let mut reconfigurable: Vec<Vec3> = Vec::new();
    let mut scheduled: BTreeSet<usize> = BTreeSet::new();
    let seed_point = p.cells().next().expect("polycubes are never empty");
    let mut seed_tiles: Option<Vec<usize>> = None;
    for &pt in &p.lattice_points() {
        let vc = match classify_vertex(p, pt) {
            Ok(vc) => vc,
            Err(GeneratorError::InteriorPoint { .. }) => continue,
            Err(e) => return Err(e),
        };
        match vc.value {
            VertexKind::NonVertex => continue,
            VertexKind::V3 | VertexKind::V7 => {
                reconfigurable.push(pt);
                continue;
            }
            _ => {}
        }
        for lp in corner_loops(p, pt)? {
            let n = lp.squares.len();
            let loop_tiles: Vec<usize> = lp
                .squares
                .iter()
                .map(|sq| slot_of[&corner_placement(sq, pt, k).slot()])
                .collect();
            for si in 0..n {
                let (t1, t2) = (loop_tiles[si], loop_tiles[(si + 1) % n]);
                let bidx = bond_of_pair[&(t1.min(t2), t1.max(t2))];
                assert!(scheduled.insert(bidx), "corner loops never share a bond");
                bonds[bidx].strength = if si + 2 < n { 2 } else { 1 };
                debug_assert_eq!(bonds[bidx].flexible, lp.steps[si].1 != SegmentKind::Flat);
            }
            if pt == seed_point {
                assert_eq!(n, 3, "the least corner of the least cell is convex");
                seed_tiles = Some(loop_tiles);
            }
        }
    }
    if !reconfigurable.is_empty() {
        return Err(GeneratorError::Reconfigurable {
            points: reconfigurable,
        });
    }
    let seed_tiles = seed_tiles.expect("the least cell exposes its least corner");

    // Glues: one unique label per bond, named after the shared edge and the
    // two plate normals (a pinch carries two bonds on one edge).
    let mut glue_sets: Vec<[Glue; 4]> = (0..tiles.len())
        .map(|_| [Glue::empty(), Glue::empty(), Glue::empty(), Glue::empty()])
        .collect();
    let mut labels: BTreeSet<String> = BTreeSet::new();
    for b in &bonds {
        let (pa, pb) = (tiles[b.a].placement, tiles[b.b].placement);
        let mid2 = pa.side_edge_mid2(b.a_side);
        let (mut t1, mut t2) = (dir_token(pa.normal), dir_token(pb.normal));
        if t1 > t2 {
            std::mem::swap(&mut t1, &mut t2);
        }
        let label = format!("g{}_{}_{}_{}{}", mid2.x, mid2.y, mid2.z, t1, t2);
        assert!(labels.insert(label.clone()), "bond labels are unique");
        glue_sets[b.a][b.a_side.index()] = Glue::new(&label, b.strength, b.flexible);
        glue_sets[b.b][b.b_side.index()] = Glue::new(&format!("{label}*"), b.strength, b.flexible);
    }
    let types: Vec<Arc<TileType>> = tiles
        .iter()
        .zip(&glue_sets)
        .map(|(t, g)| {
            let loc = t.placement.location;
            let id = format!(
                "t{}_{}_{}_{}",
                loc.x,
                loc.y,
                loc.z,
                dir_token(t.placement.normal)
            );
            TileType::new(&id, g[0].clone(), g[1].clone(), g[2].clone(), g[3].clone())
        })
        .collect();

    let mut seed = Assembly::new();
    for (u, &ti) in seed_tiles.iter().enumerate() {
        seed.add_tile(u as u64, types[ti].clone());
    }
    for (x, y) in [(0usize, 1usize), (1, 2), (2, 0)] {
        let (ti, tj) = (seed_tiles[x], seed_tiles[y]);
        let b = &bonds[bond_of_pair[&(ti.min(tj), ti.max(tj))]];
        let uid = |tile: usize| seed_tiles.iter().position(|&t| t == tile).unwrap() as u64;
        seed.try_add_bond((uid(b.a), b.a_side), (uid(b.b), b.b_side))
            .expect("seed loop bonds are well formed");
    }

    Ok(Built { tiles, types, seed })
}

fn canonical_cells(cells: &[Vec3]) -> Vec<Vec3> {
    let mut best: Option<Vec<Vec3>> = None;
    for m in Mat3::all_proper_rotations() {
        let rotated: Vec<Vec3> = cells
            .iter()
            .map(|&c| {
                let c2 = m.mul_vec(c * 2 + v3(1, 1, 1));
                v3(
                    (c2.x - 1).div_euclid(2),
                    (c2.y - 1).div_euclid(2),
                    (c2.z - 1).div_euclid(2),
                )
            })
            .collect();
        let min = rotated
            .iter()
            .fold(rotated[0], |m, &c| v3(m.x.min(c.x), m.y.min(c.y), m.z.min(c.z)));
        let mut set: Vec<Vec3> = rotated.iter().map(|&c| c - min).collect();
        set.sort();
        if best.as_ref().map_or(true, |b| &set < b) {
            best = Some(set);
        }
    }
    best.expect("24 rotations")
}

fn is_mirror_symmetric(p: &Polycube) -> bool {
    let cells: Vec<Vec3> = p.cells().collect();
    let mirrored: Vec<Vec3> = cells.iter().map(|&c| v3(c.x, c.y, -1 - c.z)).collect();
    canonical_cells(&cells) == canonical_cells(&mirrored)
}

type SegKey = (Vec3, usize);

/// Connected components of the crease graph: unit segments where the surface
/// bends, joined at shared lattice points.
fn crease_frames(p: &Polycube) -> (BTreeMap<SegKey, usize>, usize) {
    let pts = p.lattice_points();
    let mut segs: Vec<SegKey> = Vec::new();
    for &pt in &pts {
        for axis in 0..3 {
            if segment_kind(p, pt, axis).bends() {
                segs.push((pt, axis));
            }
        }
    }
    let mut by_point: BTreeMap<Vec3, Vec<usize>> = BTreeMap::new();
    for (i, &(base, axis)) in segs.iter().enumerate() {
        by_point.entry(base).or_default().push(i);
        by_point.entry(base + Vec3::unit(axis)).or_default().push(i);
    }
    let mut comp = vec![usize::MAX; segs.len()];
    let mut count = 0;
    for start in 0..segs.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = count;
        let mut stack = vec![start];
        while let Some(s) = stack.pop() {
            let (base, axis) = segs[s];
            for ep in [base, base + Vec3::unit(axis)] {
                for &t in &by_point[&ep] {
                    if comp[t] == usize::MAX {
                        comp[t] = count;
                        stack.push(t);
                    }
                }
            }
        }
        count += 1;
    }
    let map = segs.into_iter().zip(comp).collect();
    (map, count)
}

fn face_slot(c: Vec3, d: AxisDirection) -> (Vec3, usize) {
    let q = if d.sign() > 0 { c + Vec3::unit(d.axis()) } else { c };
    (q, d.axis())
}

/// The four unit segments bounding the square of face (c, d).
fn face_boundary(c: Vec3, d: AxisDirection) -> [SegKey; 4] {
    let q = if d.sign() > 0 { c + Vec3::unit(d.axis()) } else { c };
    let others: Vec<usize> = (0..3).filter(|&a| a != d.axis()).collect();
    let (i, j) = (others[0], others[1]);
    [
        (q, i),
        (q, j),
        (q + Vec3::unit(j), i),
        (q + Vec3::unit(i), j),
    ]
}

/// For every plate whose boundary touches more than one edge frame, the
/// surface on either side of its plane could mirror through it. Count those
/// flips, and how many are mitigated: either the flip lands the squares on
/// themselves, or it collides with the unflipped surface or solid.
fn flip_analysis(p: &Polycube, frame_of: &BTreeMap<SegKey, usize>) -> (usize, usize) {
    let faces = p.surface_faces();
    let idx_of: BTreeMap<(Vec3, AxisDirection), usize> = faces
        .iter()
        .enumerate()
        .map(|(i, &f)| (f, i))
        .collect();

    let mut plate = vec![usize::MAX; faces.len()];
    let mut plate_count = 0;
    for start in 0..faces.len() {
        if plate[start] != usize::MAX {
            continue;
        }
        plate[start] = plate_count;
        let mut stack = vec![start];
        while let Some(fi) = stack.pop() {
            let (c, d) = faces[fi];
            for ax in (0..3).filter(|&a| a != d.axis()) {
                for s in [-1i64, 1] {
                    if let Some(&nj) = idx_of.get(&(c + Vec3::unit(ax) * s, d)) {
                        if plate[nj] == usize::MAX {
                            plate[nj] = plate_count;
                            stack.push(nj);
                        }
                    }
                }
            }
        }
        plate_count += 1;
    }

    let mut plate_frames: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); plate_count];
    let mut plate_face: Vec<usize> = vec![usize::MAX; plate_count];
    for (fi, &(c, d)) in faces.iter().enumerate() {
        plate_face[plate[fi]] = fi;
        for seg in face_boundary(c, d) {
            if let Some(&fr) = frame_of.get(&seg) {
                plate_frames[plate[fi]].insert(fr);
            }
        }
    }

    let all_slots: BTreeSet<(Vec3, usize)> =
        faces.iter().map(|&(c, d)| face_slot(c, d)).collect();
    let mut ambiguous = 0;
    let mut mitigated = 0;
    for pl in 0..plate_count {
        if plate_frames[pl].len() < 2 {
            continue;
        }
        let (c0, d0) = faces[plate_face[pl]];
        let a = d0.axis();
        let v = axis_of(c0, a) + if d0.sign() > 0 { 1 } else { 0 };
        // above: the face lies entirely in coordinates >= v on axis a.
        let side_of = |c: Vec3, d: AxisDirection| -> Option<bool> {
            if d.axis() == a {
                let w = axis_of(c, a) + if d.sign() > 0 { 1 } else { 0 };
                (w != v).then_some(w > v)
            } else {
                let lo = axis_of(c, a);
                if lo >= v {
                    Some(true)
                } else if lo + 1 <= v {
                    Some(false)
                } else {
                    None
                }
            }
        };
        for above in [false, true] {
            let side_faces: Vec<(Vec3, AxisDirection)> = faces
                .iter()
                .filter(|&&(c, d)| side_of(c, d) == Some(above))
                .cloned()
                .collect();
            if side_faces.is_empty() {
                continue;
            }
            ambiguous += 1;
            let reflect = |(c, d): (Vec3, AxisDirection)| -> (Vec3, AxisDirection) {
                let mut cc = [c.x, c.y, c.z];
                cc[a] = 2 * v - cc[a] - 1;
                let dd = if d.axis() == a { d.inverse() } else { d };
                (v3(cc[0], cc[1], cc[2]), dd)
            };
            let side_slots: BTreeSet<(Vec3, usize)> =
                side_faces.iter().map(|&(c, d)| face_slot(c, d)).collect();
            let reflected: BTreeSet<(Vec3, usize)> = side_faces
                .iter()
                .map(|&f| {
                    let (c, d) = reflect(f);
                    face_slot(c, d)
                })
                .collect();
            let lands_on_itself = reflected == side_slots;
            let hits_surface = reflected
                .iter()
                .any(|s| !side_slots.contains(s) && all_slots.contains(s));
            let solid_on_far_side = |cell: Vec3| {
                p.contains(cell)
                    && if above {
                        axis_of(cell, a) + 1 <= v
                    } else {
                        axis_of(cell, a) >= v
                    }
            };
            let hits_solid = reflected.iter().any(|&(q, ax)| {
                solid_on_far_side(q) || solid_on_far_side(q - Vec3::unit(ax))
            });
            if lands_on_itself || hits_surface || hits_solid {
                mitigated += 1;
            }
        }
    }
    (ambiguous, mitigated)
}

fn determinism_report(p: &Polycube) -> DeterminismReport {
    let symmetric = is_mirror_symmetric(p);
    let (frame_of, edge_frame_count) = crease_frames(p);
    let edges_connected = edge_frame_count <= 1;
    let (ambiguous_flips, mitigated_flips) = if edges_connected {
        (0, 0)
    } else {
        flip_analysis(p, &frame_of)
    };
    let deterministic =
        symmetric && (edges_connected || mitigated_flips == ambiguous_flips);
    DeterminismReport {
        symmetric,
        no_reconfigurable_corners: true,
        edge_frame_count,
        edges_connected,
        ambiguous_flips,
        mitigated_flips,
        deterministic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::check_assembly;
    use crate::configspace::{
        canonical_anchor, canonical_placement, canonical_shape_key, chiral, compute_embedding,
        is_rigid, visit_configs,
    };
    use crate::dynamics::{run_to_terminal, RunOutcome, RunState};
    use std::ops::ControlFlow;

    fn cube() -> Polycube {
        Polycube::new([v3(0, 0, 0)]).unwrap()
    }

    fn dumbbell() -> Polycube {
        let mut cells = Vec::new();
        for x in 0..3 {
            for y in 0..3 {
                cells.push(v3(x, y, 0));
                cells.push(v3(x, y, 2));
            }
        }
        cells.push(v3(1, 1, 1));
        Polycube::new(cells).unwrap()
    }

    #[test]
    fn face_scale_below_two_is_rejected() {
        match compile_polycube(&cube(), 1) {
            Err(GeneratorError::FaceScaleTooSmall { face_scale: 1 }) => {}
            other => panic!("expected FaceScaleTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn reconfigurable_corners_are_refused() {
        let tripod =
            Polycube::new([v3(0, 0, 0), v3(1, 0, 0), v3(0, 1, 0), v3(0, 0, 1)]).unwrap();
        match compile_polycube(&tripod, 2) {
            Err(GeneratorError::Reconfigurable { points }) => {
                assert!(points.contains(&v3(1, 1, 1)));
            }
            other => panic!("expected Reconfigurable, got {other:?}"),
        }
    }

    #[test]
    fn unit_cube_compiles_to_a_sealed_shell() {
        let (system, report) = compile_polycube(&cube(), 2).unwrap();
        assert_eq!(system.tile_types.len(), 24);
        assert_eq!(system.temperature, 2);
        let ids: BTreeSet<&str> = system.tile_types.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids.len(), 24);
        // Every side of every tile is bonded: 48 bonds, 96 glue ends.
        for t in &system.tile_types {
            for s in Side::ALL {
                assert!(!t.glue(s).is_empty(), "{} has an open {s:?} side", t.id);
            }
        }
        assert_eq!(system.seed.tiles.len(), 3);
        assert_eq!(system.seed.bonds.len(), 3);
        assert!(check_assembly(&system.seed, &system).is_empty());
        assert!(report.symmetric);
        assert_eq!(report.edge_frame_count, 1);
        assert!(report.edges_connected);
        assert!(report.deterministic);
    }

    #[test]
    fn unit_cube_outline_is_the_scaled_shell() {
        let e = outline_embedding(&cube(), 2).unwrap();
        assert_eq!(e.placements.len(), 24);
        let slots = e.occupied_slots();
        assert_eq!(slots.len(), 24);
        for (loc, _) in slots.keys() {
            for c in [loc.x, loc.y, loc.z] {
                assert!((0..=4).contains(&c));
            }
        }
    }

    #[test]
    fn dumbbell_report_counts_frames_and_blocking() {
        let (system, report) = compile_polycube(&dumbbell(), 2).unwrap();
        assert_eq!(system.tile_types.len(), 248);
        assert!(report.symmetric);
        assert_eq!(report.edge_frame_count, 3);
        assert!(!report.edges_connected);
        assert_eq!(report.ambiguous_flips, 4);
        assert_eq!(report.mitigated_flips, 4);
        assert!(report.deterministic);
    }

    /// The bond graph a terminal assembly should realize, recovered from the
    /// glue labels alone: every base label binds its complement once.
    fn expected_bond_count(system: &FtamSystem) -> usize {
        system
            .tile_types
            .iter()
            .flat_map(|t| Side::ALL.iter().map(|&s| t.glue(s)))
            .filter(|g| !g.is_empty())
            .count()
            / 2
    }

    fn terminal_graph(a: &Assembly) -> Vec<((String, Side), (String, Side), u32, bool)> {
        let mut edges: Vec<_> = a
            .bonds
            .iter()
            .map(|b| {
                let ta = (a.tile_type(b.a.0).id.clone(), b.a.1);
                let tb = (a.tile_type(b.b.0).id.clone(), b.b.1);
                let (x, y) = if ta <= tb { (ta, tb) } else { (tb, ta) };
                (x, y, b.strength, b.flexible)
            })
            .collect();
        edges.sort();
        edges
    }

    /// Canonical shape keys of one valid configuration and its chiral twin.
    /// A folded assembly always embeds in both hands, so "matches the
    /// outline" means the outline key appears among these two.
    fn shape_keys_of_terminal(a: &Assembly) -> [Vec<(Vec3, Vec3)>; 2] {
        let mut config = None;
        visit_configs(a, None, 10_000_000, |view| {
            config = Some(view.config.clone());
            ControlFlow::Break(())
        })
        .unwrap();
        let c = config.expect("terminal assemblies have a valid configuration");
        let anchor = canonical_anchor(a).unwrap();
        let embed = |c: &crate::configspace::Configuration| {
            compute_embedding(a, c, anchor, canonical_placement()).unwrap()
        };
        let mut keys = [
            canonical_shape_key(&embed(&c)),
            canonical_shape_key(&embed(&chiral(&c))),
        ];
        keys.sort();
        keys
    }

    #[test]
    fn cube_growth_is_deterministic() {
        let (system, _) = compile_polycube(&cube(), 2).unwrap();
        let outline = canonical_shape_key(&outline_embedding(&cube(), 2).unwrap());
        let want_bonds = expected_bond_count(&system);
        assert_eq!(want_bonds, 48);
        let mut graphs = Vec::new();
        for seed in [11u64, 23, 157] {
            let (st, outcome) =
                run_to_terminal(&system, RunState::new(&system, seed), 500).unwrap();
            assert_eq!(outcome, RunOutcome::Terminal);
            assert_eq!(st.assembly.tiles.len(), 24);
            assert_eq!(st.assembly.bonds.len(), want_bonds);
            assert!(check_assembly(&st.assembly, &system).is_empty());
            assert!(is_rigid(&st.assembly).unwrap());
            assert!(shape_keys_of_terminal(&st.assembly).contains(&outline));
            graphs.push(terminal_graph(&st.assembly));
        }
        assert!(graphs.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn chiral_solid_compiles_but_reports_asymmetry() {
        let staircase =
            Polycube::new([v3(0, 0, 0), v3(1, 0, 0), v3(1, 1, 0), v3(1, 1, 1)]).unwrap();
        let (system, report) = compile_polycube(&staircase, 2).unwrap();
        assert!(!report.symmetric);
        assert!(!report.deterministic);
        assert!(report.edges_connected);
        // The bond graph is still unique; only the embedding keeps a choice
        // of hand.
        let (st, outcome) =
            run_to_terminal(&system, RunState::new(&system, 5), 500).unwrap();
        assert_eq!(outcome, RunOutcome::Terminal);
        assert_eq!(st.assembly.tiles.len(), system.tile_types.len());
        assert_eq!(st.assembly.bonds.len(), expected_bond_count(&system));
        assert!(check_assembly(&st.assembly, &system).is_empty());
    }

    /// Fixed small solids, deduplicated by rotation: every mirror-symmetric,
    /// edge-connected shape without reconfigurable corners must reach its
    /// outline from any seed.
    #[test]
    fn small_symmetric_solids_assemble_their_outline() {
        let mut shapes: BTreeSet<Vec<Vec3>> = BTreeSet::new();
        let mut frontier: Vec<Vec<Vec3>> = vec![vec![v3(0, 0, 0)]];
        shapes.insert(vec![v3(0, 0, 0)]);
        for _ in 1..4 {
            let mut next = Vec::new();
            for shape in &frontier {
                for &c in shape {
                    for d in AxisDirection::ALL {
                        let n = c + d.vec();
                        if shape.contains(&n) {
                            continue;
                        }
                        let mut grown = shape.clone();
                        grown.push(n);
                        let canon = canonical_cells(&grown);
                        if shapes.insert(canon.clone()) {
                            next.push(canon);
                        }
                    }
                }
            }
            frontier = next;
        }
        let mut compiled = 0;
        for cells in &shapes {
            let p = Polycube::new(cells.iter().cloned()).unwrap();
            let (system, report) = match compile_polycube(&p, 2) {
                Ok(ok) => ok,
                Err(GeneratorError::Reconfigurable { .. }) => continue,
                Err(e) => panic!("unexpected compile failure: {e:?}"),
            };
            if !report.deterministic {
                continue;
            }
            compiled += 1;
            let outline = canonical_shape_key(&outline_embedding(&p, 2).unwrap());
            let want_bonds = expected_bond_count(&system);
            for seed in (0..20u64).map(|i| 1000 + 37 * i) {
                let (st, outcome) =
                    run_to_terminal(&system, RunState::new(&system, seed), 2_000).unwrap();
                assert_eq!(outcome, RunOutcome::Terminal, "{cells:?} seed {seed}");
                assert_eq!(st.assembly.tiles.len(), system.tile_types.len());
                assert_eq!(st.assembly.bonds.len(), want_bonds);
                assert!(check_assembly(&st.assembly, &system).is_empty());
                assert!(
                    shape_keys_of_terminal(&st.assembly).contains(&outline),
                    "{cells:?} seed {seed}"
                );
            }
        }
        // 1-cell, domino, straight and bent trominoes all qualify.
        assert!(compiled >= 4, "only {compiled} shapes qualified");
    }
}
