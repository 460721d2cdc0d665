//! Classifies lattice points on a voxel solid's surface by how the
//! surrounding squares fold around them, and gives the bond recipe that
//! makes each foldable corner close one way only.

use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::{v3, AxisDirection, Vec3};

use super::{GeneratorError, Polycube};

/// Corner shapes a surface lattice point can take. The numbered kinds are
/// corners where more than two creases meet; `V3` and `V7` admit several
/// incompatible folds, `TwoConvex` is two independent simple corners meeting
/// at one point, and `NonVertex` covers points in the middle of a face or
/// edge.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum VertexKind {
    Convex,
    Concave,
    V3,
    V4,
    V6,
    V7,
    TwoConvex,
    NonVertex,
}

impl VertexKind {
    /// Number of distinct edges a growth front can arrive along, up to the
    /// corner's own symmetry.
    pub fn perspectives(self) -> usize {
        match self {
            VertexKind::Convex => 1,
            VertexKind::Concave => 3,
            VertexKind::V3 => 1,
            VertexKind::V4 => 2,
            VertexKind::V6 => 5,
            VertexKind::V7 => 3,
            VertexKind::TwoConvex => 1,
            VertexKind::NonVertex => 0,
        }
    }

    pub fn class(self) -> VertexClass {
        VertexClass {
            value: self,
            perspectives: self.perspectives(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct VertexClass {
    pub value: VertexKind,
    pub perspectives: usize,
}

/// Whether a loop bond holds its two tiles coplanar or lets them fold.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum BondKind {
    Rigid,
    Flexible,
}

/// Recipe for the tile loop closing around a corner: how many tiles, and
/// which consecutive pairs bond rigidly vs flexibly, starting from the bond
/// on the arriving edge (always flexible).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Protocol {
    pub loop_length: usize,
    pub bond_sequence: Vec<BondKind>,
}

use BondKind::{Flexible as F, Rigid as R};

const CONVEX_SEQS: &[&[BondKind]] = &[&[F, F, F]];
const CONCAVE_SEQS: &[&[BondKind]] = &[
    &[F, R, R, F, F],
    &[F, F, R, R, F],
    &[F, F, F, R, R],
];
const V4_SEQS: &[&[BondKind]] = &[&[F, R, F, F, R, F], &[F, F, R, F, F, R]];
const V6_SEQS: &[&[BondKind]] = &[
    &[F, R, F, R, F, F, F],
    &[F, R, F, F, F, F, R],
    &[F, F, R, F, R, F, F],
    &[F, F, F, R, F, R, F],
    &[F, F, F, F, R, F, R],
];

/// The bond recipe for one corner class as seen from one arriving edge.
pub fn protocol_for(vc: VertexClass, perspective: usize) -> Result<Protocol, GeneratorError> {
    let seqs: &[&[BondKind]] = match vc.value {
        VertexKind::Convex | VertexKind::TwoConvex => CONVEX_SEQS,
        VertexKind::Concave => CONCAVE_SEQS,
        VertexKind::V4 => V4_SEQS,
        VertexKind::V6 => V6_SEQS,
        VertexKind::V3 | VertexKind::V7 => {
            return Err(GeneratorError::Reconfigurable { points: vec![] })
        }
        VertexKind::NonVertex => {
            return Err(GeneratorError::InvalidPerspective {
                perspective,
                available: 0,
            })
        }
    };
    let seq = seqs
        .get(perspective)
        .ok_or(GeneratorError::InvalidPerspective {
            perspective,
            available: seqs.len(),
        })?;
    Ok(Protocol {
        loop_length: seq.len(),
        bond_sequence: seq.to_vec(),
    })
}

/// The all-flexible 6-loop shared by the V3 and V7 corners. It closes in
/// several incompatible ways, which is exactly why those corners have no
/// deterministic recipe.
pub fn reconfigurable_loop() -> Protocol {
    Protocol {
        loop_length: 6,
        bond_sequence: vec![F; 6],
    }
}

/// How the surface crosses one of the six unit segments leaving a lattice
/// point, determined by the four cells around the segment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum SegmentKind {
    /// All four cells filled or all empty: no surface here.
    Unused,
    /// Two adjacent cells filled: two coplanar squares continue across.
    Flat,
    /// One cell filled: two squares meet at 90 degrees.
    ConvexCrease,
    /// Three cells filled: two squares meet at 270 degrees.
    ConcaveCrease,
    /// Two diagonal cells filled: two separate sheets share the segment.
    Pinch,
}

impl SegmentKind {
    pub(crate) fn bends(self) -> bool {
        matches!(
            self,
            SegmentKind::ConvexCrease | SegmentKind::ConcaveCrease | SegmentKind::Pinch
        )
    }
}

/// Kind of a unit segment from the occupancy of the four cells around it,
/// given in rotational order.
pub(crate) fn quartet_kind(filled: [bool; 4]) -> SegmentKind {
    match filled.iter().filter(|&&b| b).count() {
        0 | 4 => SegmentKind::Unused,
        1 => SegmentKind::ConvexCrease,
        3 => SegmentKind::ConcaveCrease,
        _ => {
            if filled[0] == filled[2] {
                SegmentKind::Pinch
            } else {
                SegmentKind::Flat
            }
        }
    }
}

/// Block cell index: bit k set means the cell extends in +axis k from the
/// point; clear means -axis k.
type CellIdx = usize;

/// Surface square between two block cells, smaller index first.
type Square = (CellIdx, CellIdx);

fn bit(idx: CellIdx, axis: usize) -> usize {
    (idx >> axis) & 1
}

fn square(i: CellIdx, j: CellIdx) -> Square {
    (i.min(j), i.max(j))
}

struct SegInfo {
    axis: usize,
    positive: bool,
    kind: SegmentKind,
    /// Pairs of squares joined across this segment.
    pairs: Vec<(Square, Square)>,
}

fn segment_info(filled: &[bool; 8], axis: usize, positive: bool) -> SegInfo {
    let side = positive as usize;
    let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
    // The four cells around the segment, in rotational order.
    let cyc = [(0, 0), (1, 0), (1, 1), (0, 1)];
    let q: Vec<CellIdx> = cyc
        .iter()
        .map(|&(u, v)| (side << axis) | (u << others[0]) | (v << others[1]))
        .collect();
    let f: Vec<bool> = q.iter().map(|&i| filled[i]).collect();
    let kind = quartet_kind([f[0], f[1], f[2], f[3]]);
    let pairs = match kind {
        SegmentKind::Unused => vec![],
        SegmentKind::ConvexCrease | SegmentKind::ConcaveCrease => {
            // One odd cell out; the two squares against it fold around the
            // segment.
            let lone = kind == SegmentKind::ConvexCrease;
            let odd = f.iter().position(|&b| b == lone).unwrap();
            let c = q[odd];
            let n1 = q[(odd + 1) % 4];
            let n2 = q[(odd + 3) % 4];
            vec![(square(c, n1), square(c, n2))]
        }
        SegmentKind::Pinch => {
            // Diagonal pair: each solid keeps its own two squares together,
            // so the sheets touch but do not merge.
            let a = f.iter().position(|&b| b).unwrap();
            let (p1, p2) = (q[a], q[a + 2]);
            let (e1, e2) = (q[(a + 1) % 4], q[(a + 3) % 4]);
            vec![
                (square(p1, e1), square(p1, e2)),
                (square(p2, e1), square(p2, e2)),
            ]
        }
        SegmentKind::Flat => {
            // Adjacent pair: the surface runs straight across.
            let a = f.iter().position(|&b| b).unwrap();
            let b = (a + 1..4).find(|&i| f[i]).unwrap();
            let (pa, pb) = if b == a + 1 { (a, b) } else { (3, 0) };
            let s1 = square(q[pa], q[(pa + 3) % 4]);
            let s2 = square(q[pb], q[(pb + 1) % 4]);
            vec![(s1, s2)]
        }
    };
    SegInfo {
        axis,
        positive,
        kind,
        pairs,
    }
}

fn all_segments(filled: &[bool; 8]) -> Vec<SegInfo> {
    let mut out = Vec::with_capacity(6);
    for axis in 0..3 {
        for positive in [false, true] {
            out.push(segment_info(filled, axis, positive));
        }
    }
    out
}

struct LocalLoop {
    squares: Vec<Square>,
    /// steps[i] is the segment (index into the SegInfo list) joining
    /// squares[i] and squares[(i+1) % len].
    steps: Vec<usize>,
}

/// Every surface square around the point sits in exactly one closed loop;
/// walk them out of the per-segment pairings.
fn assemble_loops(segs: &[SegInfo]) -> Vec<LocalLoop> {
    let mut adj: BTreeMap<Square, Vec<(Square, usize)>> = BTreeMap::new();
    for (si, seg) in segs.iter().enumerate() {
        for &(a, b) in &seg.pairs {
            adj.entry(a).or_default().push((b, si));
            adj.entry(b).or_default().push((a, si));
        }
    }
    for v in adj.values() {
        debug_assert_eq!(v.len(), 2, "every surface square pairs at both its segments");
    }
    let starts: Vec<Square> = adj.keys().copied().collect();
    let mut visited: BTreeSet<Square> = BTreeSet::new();
    let mut out = Vec::new();
    for start in starts {
        if visited.contains(&start) {
            continue;
        }
        visited.insert(start);
        let mut squares = vec![start];
        let mut steps = Vec::new();
        let (mut cur, mut via) = adj[&start][0];
        let mut prev = start;
        steps.push(via);
        while cur != start {
            squares.push(cur);
            visited.insert(cur);
            // Two distinct squares share at most one segment, so the arrival
            // pairing is the one pointing back at prev.
            let nexts = &adj[&cur];
            let (n, s) = if nexts[0].0 == prev { nexts[1] } else { nexts[0] };
            prev = cur;
            cur = n;
            via = s;
            steps.push(via);
        }
        out.push(LocalLoop { squares, steps });
    }
    out
}

fn classify_loops(segs: &[SegInfo], loops: &[LocalLoop]) -> VertexKind {
    if loops.len() == 1 {
        let kinds: Vec<SegmentKind> = loops[0].steps.iter().map(|&si| segs[si].kind).collect();
        let n = kinds.len();
        let flats: Vec<usize> = kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == SegmentKind::Flat)
            .map(|(i, _)| i)
            .collect();
        let pinches = kinds.iter().filter(|k| **k == SegmentKind::Pinch).count();
        return match n {
            3 => VertexKind::Convex,
            5 => VertexKind::Concave,
            6 if flats.is_empty() && pinches == 0 => VertexKind::V3,
            6 if flats.is_empty() => VertexKind::V7,
            6 if flats.len() == 2 && flats[1] - flats[0] == 3 => VertexKind::V4,
            7 if flats.len() == 2 => VertexKind::V6,
            // Anything else is treated as reconfigurable rather than guessed.
            _ => VertexKind::V7,
        };
    }
    if loops.iter().all(|l| l.squares.len() == 3) {
        VertexKind::TwoConvex
    } else {
        VertexKind::V7
    }
}

fn block_occupancy(p: &Polycube, point: Vec3) -> [bool; 8] {
    let mut filled = [false; 8];
    for (idx, slot) in filled.iter_mut().enumerate() {
        let d = v3(
            bit(idx, 0) as i64 - 1,
            bit(idx, 1) as i64 - 1,
            bit(idx, 2) as i64 - 1,
        );
        *slot = p.contains(point + d);
    }
    filled
}

fn classify_block(filled: &[bool; 8]) -> VertexKind {
    let segs = all_segments(filled);
    let bent: Vec<&SegInfo> = segs.iter().filter(|s| s.kind.bends()).collect();
    if bent.is_empty() {
        return VertexKind::NonVertex;
    }
    if bent.len() == 2 && bent[0].axis == bent[1].axis && bent[0].kind == bent[1].kind {
        // The surface bends only across one straight line through the point:
        // this is the middle of an edge, not a corner.
        return VertexKind::NonVertex;
    }
    let loops = assemble_loops(&segs);
    classify_loops(&segs, &loops)
}

/// Classify the surface point of a voxel solid by the loop of squares
/// around it.
pub fn classify_vertex(p: &Polycube, point: Vec3) -> Result<VertexClass, GeneratorError> {
    let filled = block_occupancy(p, point);
    let s = filled.iter().filter(|&&b| b).count();
    if s == 0 {
        return Err(GeneratorError::ExteriorPoint { point });
    }
    if s == 8 {
        return Err(GeneratorError::InteriorPoint { point });
    }
    Ok(classify_block(&filled).class())
}

/// One surface square at a corner: the filled cell it lies on and the
/// outward direction toward the empty side.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub(crate) struct CornerSquare {
    pub cell: Vec3,
    pub outward: AxisDirection,
}

/// A closed fan of surface squares around a lattice point. `steps[i]` gives
/// the segment between `squares[i]` and `squares[(i+1) % len]`: its lattice
/// direction out of the point and how the surface crosses it.
#[derive(Clone, Debug)]
pub(crate) struct CornerLoop {
    pub squares: Vec<CornerSquare>,
    pub steps: Vec<(AxisDirection, SegmentKind)>,
}

impl CornerLoop {
    /// The loop's bond letters: rigid across flats, flexible across bends.
    pub fn bond_word(&self) -> Vec<BondKind> {
        self.steps
            .iter()
            .map(|(_, k)| if *k == SegmentKind::Flat { R } else { F })
            .collect()
    }
}

/// The square loops around a surface lattice point, with absolute geometry.
pub(crate) fn corner_loops(p: &Polycube, point: Vec3) -> Result<Vec<CornerLoop>, GeneratorError> {
    let filled = block_occupancy(p, point);
    let s = filled.iter().filter(|&&b| b).count();
    if s == 0 {
        return Err(GeneratorError::ExteriorPoint { point });
    }
    if s == 8 {
        return Err(GeneratorError::InteriorPoint { point });
    }
    let segs = all_segments(&filled);
    let loops = assemble_loops(&segs);
    let to_square = |&(i, j): &Square| {
        let (fi, ei) = if filled[i] { (i, j) } else { (j, i) };
        debug_assert!(filled[fi] && !filled[ei]);
        let cell = point
            + v3(
                bit(fi, 0) as i64 - 1,
                bit(fi, 1) as i64 - 1,
                bit(fi, 2) as i64 - 1,
            );
        let axis = (0..3).find(|&a| bit(fi, a) != bit(ei, a)).unwrap();
        let sign = bit(ei, axis) as i64 - bit(fi, axis) as i64;
        CornerSquare {
            cell,
            outward: AxisDirection::from_vec(Vec3::unit(axis) * sign).unwrap(),
        }
    };
    Ok(loops
        .into_iter()
        .map(|l| CornerLoop {
            squares: l.squares.iter().map(to_square).collect(),
            steps: l
                .steps
                .iter()
                .map(|&si| {
                    let seg = &segs[si];
                    let dir = AxisDirection::from_vec(
                        Vec3::unit(seg.axis) * if seg.positive { 1 } else { -1 },
                    )
                    .unwrap();
                    (dir, seg.kind)
                })
                .collect(),
        })
        .collect())
}
