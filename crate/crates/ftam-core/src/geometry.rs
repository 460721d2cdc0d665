//! Exact integer geometry of unit-square tiles on the cubic lattice.
//!
//! A tile occupies one face of a unit cell: an axis-aligned unit square with
//! an outward normal and an in-plane orientation vector. All arithmetic uses
//! doubled coordinates (twice the real values) so square centers and edge
//! midpoints stay integral and every classification is exact.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Vec3 {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

pub const fn v3(x: i64, y: i64, z: i64) -> Vec3 {
    Vec3 { x, y, z }
}

impl Vec3 {
    pub const ZERO: Vec3 = v3(0, 0, 0);

    pub fn unit(axis: usize) -> Vec3 {
        match axis {
            0 => v3(1, 0, 0),
            1 => v3(0, 1, 0),
            2 => v3(0, 0, 1),
            _ => panic!("axis out of range"),
        }
    }

    pub fn dot(self, o: Vec3) -> i64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        v3(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }
}

impl Index<usize> for Vec3 {
    type Output = i64;
    fn index(&self, axis: usize) -> &i64 {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        v3(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        v3(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        v3(-self.x, -self.y, -self.z)
    }
}

impl Mul<i64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: i64) -> Vec3 {
        v3(self.x * k, self.y * k, self.z * k)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

/// 3x3 integer matrix; rows act on column vectors.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Mat3(pub [[i64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1, 0, 0], [0, 1, 0], [0, 0, 1]]);

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let r = &self.0;
        v3(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    pub fn mul(&self, o: &Mat3) -> Mat3 {
        let mut out = [[0i64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[i][j] += self.0[i][k] * o.0[k][j];
                }
            }
        }
        Mat3(out)
    }

    pub fn det(&self) -> i64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Right-handed rotation by `quarter_turns` * 90 degrees about the positive axis.
    pub fn rotation_about(axis: usize, quarter_turns: u32) -> Mat3 {
        let step = match axis {
            0 => Mat3([[1, 0, 0], [0, 0, -1], [0, 1, 0]]),
            1 => Mat3([[0, 0, 1], [0, 1, 0], [-1, 0, 0]]),
            2 => Mat3([[0, -1, 0], [1, 0, 0], [0, 0, 1]]),
            _ => panic!("axis out of range"),
        };
        let mut m = Mat3::IDENTITY;
        for _ in 0..(quarter_turns % 4) {
            m = step.mul(&m);
        }
        m
    }

    /// The 24 proper rotations of the cubic lattice, in a fixed deterministic order.
    pub fn all_proper_rotations() -> Vec<Mat3> {
        let mut out = vec![Mat3::IDENTITY];
        let gens = [Mat3::rotation_about(0, 1), Mat3::rotation_about(1, 1)];
        let mut i = 0;
        while i < out.len() {
            let cur = out[i];
            for g in &gens {
                let next = g.mul(&cur);
                if !out.contains(&next) {
                    out.push(next);
                }
            }
            i += 1;
        }
        debug_assert_eq!(out.len(), 24);
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum AxisDirection {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

use AxisDirection::*;

impl AxisDirection {
    pub const ALL: [AxisDirection; 6] = [PosX, NegX, PosY, NegY, PosZ, NegZ];

    pub fn vec(self) -> Vec3 {
        match self {
            PosX => v3(1, 0, 0),
            NegX => v3(-1, 0, 0),
            PosY => v3(0, 1, 0),
            NegY => v3(0, -1, 0),
            PosZ => v3(0, 0, 1),
            NegZ => v3(0, 0, -1),
        }
    }

    pub fn from_vec(v: Vec3) -> Option<AxisDirection> {
        AxisDirection::ALL.into_iter().find(|d| d.vec() == v)
    }

    pub fn axis(self) -> usize {
        match self {
            PosX | NegX => 0,
            PosY | NegY => 1,
            PosZ | NegZ => 2,
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            PosX | PosY | PosZ => 1,
            NegX | NegY | NegZ => -1,
        }
    }

    pub fn inverse(self) -> AxisDirection {
        match self {
            PosX => NegX,
            NegX => PosX,
            PosY => NegY,
            NegY => PosY,
            PosZ => NegZ,
            NegZ => PosZ,
        }
    }

    pub fn is_perpendicular_to(self, o: AxisDirection) -> bool {
        self.axis() != o.axis()
    }
}

impl fmt::Display for AxisDirection {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let s = match self {
            PosX => "+x",
            NegX => "-x",
            PosY => "+y",
            NegY => "-y",
            PosZ => "+z",
            NegZ => "-z",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for AxisDirection {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, GeometryError> {
        match s {
            "+x" => Ok(PosX),
            "-x" => Ok(NegX),
            "+y" => Ok(PosY),
            "-y" => Ok(NegY),
            "+z" => Ok(PosZ),
            "-z" => Ok(NegZ),
            _ => Err(GeometryError::BadAxisDirection(s.to_string())),
        }
    }
}

/// Tile side, named relative to the tile's orientation vector (north = orientation).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Side {
    North,
    East,
    South,
    West,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::North, Side::East, Side::South, Side::West];

    pub fn opposite(self) -> Side {
        match self {
            Side::North => Side::South,
            Side::East => Side::West,
            Side::South => Side::North,
            Side::West => Side::East,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::North => 0,
            Side::East => 1,
            Side::South => 2,
            Side::West => 3,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let s = match self {
            Side::North => "N",
            Side::East => "E",
            Side::South => "S",
            Side::West => "W",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Side {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, GeometryError> {
        match s {
            "N" => Ok(Side::North),
            "E" => Ok(Side::East),
            "S" => Ok(Side::South),
            "W" => Ok(Side::West),
            _ => Err(GeometryError::BadSide(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RelativeOrientation {
    Straight,
    Up,
    Down,
    Incompatible,
}

/// Fold state of a bond: coplanar, folded toward the normals, or folded away.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum BondOrientation {
    Straight,
    Up,
    Down,
}

impl BondOrientation {
    pub const ALL: [BondOrientation; 3] = [
        BondOrientation::Straight,
        BondOrientation::Up,
        BondOrientation::Down,
    ];

    pub fn chiral(self) -> BondOrientation {
        match self {
            BondOrientation::Straight => BondOrientation::Straight,
            BondOrientation::Up => BondOrientation::Down,
            BondOrientation::Down => BondOrientation::Up,
        }
    }

    pub fn rel(self) -> RelativeOrientation {
        match self {
            BondOrientation::Straight => RelativeOrientation::Straight,
            BondOrientation::Up => RelativeOrientation::Up,
            BondOrientation::Down => RelativeOrientation::Down,
        }
    }
}

impl RelativeOrientation {
    pub fn bond_orientation(self) -> Option<BondOrientation> {
        match self {
            RelativeOrientation::Straight => Some(BondOrientation::Straight),
            RelativeOrientation::Up => Some(BondOrientation::Up),
            RelativeOrientation::Down => Some(BondOrientation::Down),
            RelativeOrientation::Incompatible => None,
        }
    }
}

impl fmt::Display for BondOrientation {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let s = match self {
            BondOrientation::Straight => "S",
            BondOrientation::Up => "U",
            BondOrientation::Down => "D",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for BondOrientation {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, GeometryError> {
        match s {
            "S" => Ok(BondOrientation::Straight),
            "U" => Ok(BondOrientation::Up),
            "D" => Ok(BondOrientation::Down),
            _ => Err(GeometryError::BadOrientation(s.to_string())),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("orientation {orientation} is not perpendicular to normal {normal}")]
    NotPerpendicular {
        normal: AxisDirection,
        orientation: AxisDirection,
    },
    #[error("placements do not share a full lattice edge")]
    NotEdgeAdjacent,
    #[error("placements overlap (same location and plane)")]
    OverlappingPlacements,
    #[error("bad axis direction `{0}`")]
    BadAxisDirection(String),
    #[error("bad side `{0}`")]
    BadSide(String),
    #[error("bad bond orientation `{0}`")]
    BadOrientation(String),
}

/// Where a unit tile sits: min corner of its square, outward normal, and the
/// in-plane direction its north side faces. The square spans the two positive
/// axes perpendicular to the normal, starting at `location`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Placement {
    pub location: Vec3,
    pub normal: AxisDirection,
    pub orientation: AxisDirection,
}

impl Placement {
    pub fn try_new(
        location: Vec3,
        normal: AxisDirection,
        orientation: AxisDirection,
    ) -> Result<Placement, GeometryError> {
        if !normal.is_perpendicular_to(orientation) {
            return Err(GeometryError::NotPerpendicular {
                normal,
                orientation,
            });
        }
        Ok(Placement {
            location,
            normal,
            orientation,
        })
    }

    pub fn new(location: Vec3, normal: AxisDirection, orientation: AxisDirection) -> Placement {
        Placement::try_new(location, normal, orientation).expect("malformed placement")
    }

    /// The two axes spanning the tile plane, ascending.
    pub fn in_plane_axes(&self) -> (usize, usize) {
        match self.normal.axis() {
            0 => (1, 2),
            1 => (0, 2),
            2 => (0, 1),
            _ => unreachable!(),
        }
    }

    /// Square center in doubled coordinates.
    pub fn center2(&self) -> Vec3 {
        let (i, j) = self.in_plane_axes();
        self.location * 2 + Vec3::unit(i) + Vec3::unit(j)
    }

    /// Rebuild a placement from its doubled center (in-plane components odd,
    /// normal-axis component even).
    pub fn from_center2(c2: Vec3, normal: AxisDirection, orientation: AxisDirection) -> Placement {
        let k = normal.axis();
        let mut loc = [0i64; 3];
        for axis in 0..3 {
            if axis == k {
                debug_assert_eq!(c2[axis] % 2, 0, "normal-axis coordinate must be even");
                loc[axis] = c2[axis] / 2;
            } else {
                debug_assert_ne!(c2[axis] % 2, 0, "in-plane coordinate must be odd");
                loc[axis] = (c2[axis] - 1) / 2;
            }
        }
        Placement::new(v3(loc[0], loc[1], loc[2]), normal, orientation)
    }

    /// The 4 lattice corners of the square, sorted.
    pub fn footprint(&self) -> [Vec3; 4] {
        let (i, j) = self.in_plane_axes();
        let (u, v) = (Vec3::unit(i), Vec3::unit(j));
        let l = self.location;
        let mut corners = [l, l + u, l + v, l + u + v];
        corners.sort();
        corners
    }

    /// Unit vector from the center toward the given side.
    pub fn side_dir(&self, s: Side) -> Vec3 {
        let o = self.orientation.vec();
        let n = self.normal.vec();
        match s {
            Side::North => o,
            Side::South => -o,
            Side::East => o.cross(n),
            Side::West => n.cross(o),
        }
    }

    pub fn side_of_dir(&self, w: Vec3) -> Option<Side> {
        Side::ALL.into_iter().find(|&s| self.side_dir(s) == w)
    }

    /// Midpoint of the side's lattice edge, doubled. Exactly one component is
    /// odd: the axis the edge runs along. This value identifies the edge.
    pub fn side_edge_mid2(&self, s: Side) -> Vec3 {
        self.center2() + self.side_dir(s)
    }

    /// Occupancy key: two placements overlap iff their slots are equal.
    pub fn slot(&self) -> (Vec3, usize) {
        (self.location, self.normal.axis())
    }

    /// Apply an orthogonal lattice transform plus translation. Improper
    /// transforms flip the normal an extra time: a mirrored tile is seen from
    /// its other side, which keeps side labels consistent with the glues.
    pub fn transformed(&self, m: &Mat3, t: Vec3) -> Placement {
        let c2 = m.mul_vec(self.center2()) + t * 2;
        let n = m.mul_vec(self.normal.vec());
        let n = if m.det() == 1 { n } else { -n };
        let o = m.mul_vec(self.orientation.vec());
        Placement::from_center2(
            c2,
            AxisDirection::from_vec(n).unwrap(),
            AxisDirection::from_vec(o).unwrap(),
        )
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{} {} {}", self.location, self.normal, self.orientation)
    }
}

/// Axis a lattice edge runs along, given its doubled midpoint.
pub fn edge_axis_of_mid2(m: Vec3) -> usize {
    for axis in 0..3 {
        if m[axis] % 2 != 0 {
            return axis;
        }
    }
    panic!("not an edge midpoint: {m}");
}

/// The sides along which two placements share a full lattice edge, plus the
/// edge's doubled midpoint. Distinct unit squares share at most one edge.
pub fn shared_edge(p: &Placement, p2: &Placement) -> Option<(Side, Side, Vec3)> {
    for s in Side::ALL {
        let m = p.side_edge_mid2(s);
        for s2 in Side::ALL {
            if p2.side_edge_mid2(s2) == m {
                return Some((s, s2, m));
            }
        }
    }
    None
}

/// Classify how two edge-adjacent tiles sit relative to each other: coplanar
/// (`Straight`), folded so the normal rays from the centers meet (`Up`),
/// folded so the inverse rays meet (`Down`), or `Incompatible`.
pub fn classify_orientation(
    p: &Placement,
    p2: &Placement,
) -> Result<RelativeOrientation, GeometryError> {
    if p.slot() == p2.slot() {
        return Err(GeometryError::OverlappingPlacements);
    }
    if shared_edge(p, p2).is_none() {
        return Err(GeometryError::NotEdgeAdjacent);
    }
    let (ca, cb) = (p.center2(), p2.center2());
    let (na, nb) = (p.normal, p2.normal);
    if na.axis() == nb.axis() {
        // Coplanar neighbors: compatible only when the normals agree.
        return Ok(if na == nb {
            RelativeOrientation::Straight
        } else {
            RelativeOrientation::Incompatible
        });
    }
    let (i, j) = (na.axis(), nb.axis());
    let k = 3 - i - j;
    if ca[k] != cb[k] {
        return Ok(RelativeOrientation::Incompatible);
    }
    // Rays from the centers along the normals meet iff both parameters are
    // positive; inverse rays iff both are negative. Parity makes them nonzero.
    let t = (cb[i] - ca[i]) * na.sign();
    let s = (ca[j] - cb[j]) * nb.sign();
    Ok(if t > 0 && s > 0 {
        RelativeOrientation::Up
    } else if t < 0 && s < 0 {
        RelativeOrientation::Down
    } else {
        RelativeOrientation::Incompatible
    })
}

/// Placement of the tile bonded at side `s` of `p` in fold state `orient`,
/// positioned so the new tile's side `s2` lies on the shared edge.
pub fn propagate_placement(
    p: &Placement,
    s: Side,
    orient: BondOrientation,
    s2: Side,
) -> Placement {
    let d = p.side_dir(s);
    let n = p.normal.vec();
    let c2 = p.center2();
    let (c2b, nb, w) = match orient {
        // w is the direction the new tile's side s2 must face: back across
        // the shared edge toward the new tile's center.
        BondOrientation::Straight => (c2 + d * 2, p.normal.vec(), -d),
        BondOrientation::Up => (c2 + d + n, -d, -n),
        BondOrientation::Down => (c2 + d - n, d, n),
    };
    let nb = AxisDirection::from_vec(nb).unwrap();
    let ob = match s2 {
        Side::North => w,
        Side::South => -w,
        Side::East => nb.vec().cross(w),
        Side::West => w.cross(nb.vec()),
    };
    let out = Placement::from_center2(c2b, nb, AxisDirection::from_vec(ob).unwrap());
    debug_assert_eq!(out.side_edge_mid2(s2), p.side_edge_mid2(s));
    debug_assert_eq!(classify_orientation(p, &out), Ok(orient.rel()));
    out
}

/// Glue label: empty, or a base name with or without the complement mark.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GlueLabel {
    Empty,
    Name { base: String, complemented: bool },
}

impl GlueLabel {
    /// Parse "a" or "a*"; "-" and "" mean the empty label.
    pub fn parse(s: &str) -> GlueLabel {
        if s.is_empty() || s == "-" {
            return GlueLabel::Empty;
        }
        match s.strip_suffix('*') {
            Some(base) => GlueLabel::Name {
                base: base.to_string(),
                complemented: true,
            },
            None => GlueLabel::Name {
                base: s.to_string(),
                complemented: false,
            },
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == GlueLabel::Empty
    }

    pub fn complement(&self) -> GlueLabel {
        match self {
            GlueLabel::Empty => GlueLabel::Empty,
            GlueLabel::Name { base, complemented } => GlueLabel::Name {
                base: base.clone(),
                complemented: !complemented,
            },
        }
    }

    pub fn is_complement_of(&self, other: &GlueLabel) -> bool {
        !self.is_empty() && *self == other.complement()
    }
}

impl fmt::Display for GlueLabel {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            GlueLabel::Empty => f.write_str("-"),
            GlueLabel::Name { base, complemented } => {
                write!(f, "{}{}", base, if *complemented { "*" } else { "" })
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Glue {
    pub label: GlueLabel,
    pub strength: u32,
    pub flexible: bool,
}

impl Glue {
    pub fn empty() -> Glue {
        Glue {
            label: GlueLabel::Empty,
            strength: 0,
            flexible: false,
        }
    }

    pub fn new(label: &str, strength: u32, flexible: bool) -> Glue {
        let label = GlueLabel::parse(label);
        let strength = if label.is_empty() { 0 } else { strength };
        Glue {
            label,
            strength,
            flexible,
        }
    }

    pub fn rigid(label: &str, strength: u32) -> Glue {
        Glue::new(label, strength, false)
    }

    pub fn flexible(label: &str, strength: u32) -> Glue {
        Glue::new(label, strength, true)
    }

    pub fn is_empty(&self) -> bool {
        self.label.is_empty()
    }
}

impl fmt::Display for Glue {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.is_empty() {
            f.write_str("-")
        } else {
            write!(
                f,
                "{}:{}:{}",
                self.label,
                self.strength,
                if self.flexible { "f" } else { "r" }
            )
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BondDescriptor {
    pub strength: u32,
    pub flexible: bool,
}

/// Whether two glues bond when their tiles sit in the given relative
/// orientation: complementary labels, equal positive strength, equal
/// flexibility, and rigid pairs must be Straight.
pub fn can_bind(a: &Glue, b: &Glue, rel: RelativeOrientation) -> Option<BondDescriptor> {
    if !a.label.is_complement_of(&b.label) {
        return None;
    }
    if a.strength == 0 || a.strength != b.strength || a.flexible != b.flexible {
        return None;
    }
    let geometry_ok = if a.flexible {
        rel != RelativeOrientation::Incompatible
    } else {
        rel == RelativeOrientation::Straight
    };
    geometry_ok.then_some(BondDescriptor {
        strength: a.strength,
        flexible: a.flexible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn pl(l: (i64, i64, i64), n: AxisDirection, o: AxisDirection) -> Placement {
        Placement::new(v3(l.0, l.1, l.2), n, o)
    }

    fn all_placements_at(loc: Vec3) -> Vec<Placement> {
        let mut out = Vec::new();
        for n in AxisDirection::ALL {
            for o in AxisDirection::ALL {
                if n.is_perpendicular_to(o) {
                    out.push(Placement::new(loc, n, o));
                }
            }
        }
        assert_eq!(out.len(), 24);
        out
    }

    #[test]
    fn footprint_follows_min_corner_convention() {
        let corners = pl((0, 0, 0), PosZ, PosY).footprint();
        assert_eq!(
            corners,
            [v3(0, 0, 0), v3(0, 1, 0), v3(1, 0, 0), v3(1, 1, 0)]
        );

        let corners = pl((1, 0, 0), NegX, PosZ).footprint();
        assert_eq!(
            corners,
            [v3(1, 0, 0), v3(1, 0, 1), v3(1, 1, 0), v3(1, 1, 1)]
        );

        // Orientation only relabels sides; the corner set is unchanged.
        assert_eq!(
            pl((0, 0, 0), PosZ, PosX).footprint(),
            pl((0, 0, 0), PosZ, PosY).footprint()
        );
    }

    #[test]
    fn placement_requires_perpendicular_orientation() {
        assert!(Placement::try_new(Vec3::ZERO, PosZ, NegZ).is_err());
        assert!(Placement::try_new(Vec3::ZERO, PosZ, PosY).is_ok());
    }

    #[test]
    fn classify_examples() {
        let a = pl((0, 0, 0), PosZ, PosY);
        // Coplanar east neighbor.
        assert_eq!(
            classify_orientation(&a, &pl((1, 0, 0), PosZ, PosY)),
            Ok(RelativeOrientation::Straight)
        );
        // Folded up: rays from the centers meet at (0.5, 0.5, 0.5).
        assert_eq!(
            classify_orientation(&a, &pl((1, 0, 0), NegX, PosY)),
            Ok(RelativeOrientation::Up)
        );
        // Folded down: the inverse rays meet at (0.5, 0.5, -0.5).
        assert_eq!(
            classify_orientation(&a, &pl((1, 0, -1), PosX, PosY)),
            Ok(RelativeOrientation::Down)
        );
        // Perpendicular with the normal facing away: no ray intersection.
        assert_eq!(
            classify_orientation(&a, &pl((1, 0, 0), PosX, PosY)),
            Ok(RelativeOrientation::Incompatible)
        );
    }

    #[test]
    fn classify_rejects_non_adjacent_and_overlapping() {
        let a = pl((0, 0, 0), PosZ, PosY);
        assert_eq!(
            classify_orientation(&a, &pl((2, 0, 0), PosZ, PosY)),
            Err(GeometryError::NotEdgeAdjacent)
        );
        assert_eq!(
            classify_orientation(&a, &pl((0, 0, 0), NegZ, PosX)),
            Err(GeometryError::OverlappingPlacements)
        );
    }

    /// Independent oracle: build the coplanar neighbor, then physically rotate
    /// it by a quarter turn about the shared edge. Rotating toward the first
    /// tile's normal must read Up, away must read Down, and the rotated
    /// placement must equal what propagate_placement produces.
    #[test]
    fn classify_and_propagate_match_rotation_about_shared_edge() {
        for p in all_placements_at(v3(3, -2, 5)) {
            for s in Side::ALL {
                for s2 in Side::ALL {
                    let straight = propagate_placement(&p, s, BondOrientation::Straight, s2);
                    assert_eq!(
                        classify_orientation(&p, &straight),
                        Ok(RelativeOrientation::Straight)
                    );

                    let m = p.side_edge_mid2(s);
                    let k = edge_axis_of_mid2(m);
                    let d = p.side_dir(s);
                    let n = p.normal.vec();
                    for (orient, target) in [
                        (BondOrientation::Up, n),
                        (BondOrientation::Down, -n),
                    ] {
                        let r = [1u32, 3]
                            .into_iter()
                            .map(|q| Mat3::rotation_about(k, q))
                            .find(|r| r.mul_vec(d) == target)
                            .unwrap();
                        let c2r = m + r.mul_vec(straight.center2() - m);
                        let nr = AxisDirection::from_vec(r.mul_vec(straight.normal.vec())).unwrap();
                        let or_ = AxisDirection::from_vec(r.mul_vec(straight.orientation.vec()))
                            .unwrap();
                        let rotated = Placement::from_center2(c2r, nr, or_);
                        assert_eq!(classify_orientation(&p, &rotated), Ok(orient.rel()));
                        assert_eq!(rotated, propagate_placement(&p, s, orient, s2));
                    }
                }
            }
        }
    }

    /// Around any shared edge there are exactly three compatible second
    /// placements modulo orientation: one Straight, one Up, one Down. The
    /// classification is symmetric and ignores orientation vectors.
    #[test]
    fn exactly_three_compatible_positions_per_edge() {
        for p in all_placements_at(Vec3::ZERO) {
            for s in Side::ALL {
                let m = p.side_edge_mid2(s);
                let k = edge_axis_of_mid2(m);
                let mut by_position: BTreeMap<(Vec3, AxisDirection), BTreeSet<_>> = BTreeMap::new();
                for j in 0..3 {
                    if j == k {
                        continue;
                    }
                    let h = 3 - k - j;
                    for dh in [-1i64, 1] {
                        let c2 = m + Vec3::unit(h) * dh;
                        for nsign in [1i64, -1] {
                            let nb = AxisDirection::from_vec(Vec3::unit(j) * nsign).unwrap();
                            for ob in AxisDirection::ALL {
                                if !ob.is_perpendicular_to(nb) {
                                    continue;
                                }
                                let q = Placement::from_center2(c2, nb, ob);
                                if q.slot() == p.slot() {
                                    assert_eq!(
                                        classify_orientation(&p, &q),
                                        Err(GeometryError::OverlappingPlacements)
                                    );
                                    continue;
                                }
                                let rel = classify_orientation(&p, &q).unwrap();
                                assert_eq!(classify_orientation(&q, &p).unwrap(), rel);
                                by_position.entry((c2, nb)).or_default().insert(rel);
                            }
                        }
                    }
                }
                let mut compatible = Vec::new();
                for rels in by_position.values() {
                    // Orientation never affects the classification.
                    assert_eq!(rels.len(), 1);
                    let rel = *rels.iter().next().unwrap();
                    if rel != RelativeOrientation::Incompatible {
                        compatible.push(rel);
                    }
                }
                compatible.sort();
                assert_eq!(
                    compatible,
                    [
                        RelativeOrientation::Straight,
                        RelativeOrientation::Up,
                        RelativeOrientation::Down
                    ]
                );
            }
        }
    }

    #[test]
    fn bond_rules() {
        use RelativeOrientation::*;
        let r2 = Glue::rigid("a", 2);
        let r2c = Glue::rigid("a*", 2);
        let f2 = Glue::flexible("a", 2);
        let f2c = Glue::flexible("a*", 2);

        let bond = can_bind(&r2, &r2c, Straight).unwrap();
        assert_eq!((bond.strength, bond.flexible), (2, false));
        let bond = can_bind(&f2, &f2c, Up).unwrap();
        assert_eq!((bond.strength, bond.flexible), (2, true));
        // Rigid pairs only bind coplanar.
        assert_eq!(can_bind(&r2, &r2c, Up), None);
        // Strength mismatch.
        assert_eq!(can_bind(&Glue::rigid("a", 1), &r2c, Straight), None);
        // Empty glue binds nothing.
        assert_eq!(can_bind(&Glue::empty(), &r2c, Straight), None);
        // Equal labels are not complementary; mixed flexibility never binds.
        assert_eq!(can_bind(&r2, &r2, Straight), None);
        assert_eq!(can_bind(&r2, &f2c, Straight), None);
        // Flexible pairs never bind an incompatible geometry.
        assert_eq!(can_bind(&f2, &f2c, Incompatible), None);
        // Symmetric in the glue arguments.
        assert_eq!(can_bind(&f2c, &f2, Down), can_bind(&f2, &f2c, Down));
    }

    #[test]
    fn glue_labels_round_trip() {
        let a = GlueLabel::parse("edge_3");
        let ac = a.complement();
        assert_eq!(ac.to_string(), "edge_3*");
        assert_eq!(ac.complement(), a);
        assert!(a.is_complement_of(&ac));
        assert!(ac.is_complement_of(&a));
        assert!(!a.is_complement_of(&a));
        assert_eq!(GlueLabel::parse("-"), GlueLabel::Empty);
        assert!(!GlueLabel::Empty.is_complement_of(&GlueLabel::Empty));
    }

    #[test]
    fn rotation_group_has_24_elements() {
        let rots = Mat3::all_proper_rotations();
        assert_eq!(rots.len(), 24);
        for r in &rots {
            assert_eq!(r.det(), 1);
        }
    }

    #[test]
    fn transform_keeps_side_glue_geometry_consistent() {
        // Under any lattice isometry, bonded neighbors stay bonded with the
        // same sides; improper isometries swap Up and Down.
        let mirror = Mat3([[-1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        for p in all_placements_at(v3(1, 2, 3)) {
            for s in Side::ALL {
                for orient in BondOrientation::ALL {
                    let q = propagate_placement(&p, s, orient, Side::West);
                    let (pt, qt) = (
                        p.transformed(&mirror, v3(5, 0, 0)),
                        q.transformed(&mirror, v3(5, 0, 0)),
                    );
                    // The same physical sides still meet on the shared edge.
                    assert_eq!(pt.side_edge_mid2(s), qt.side_edge_mid2(Side::West));
                    assert_eq!(
                        classify_orientation(&pt, &qt).unwrap(),
                        match orient {
                            BondOrientation::Straight => RelativeOrientation::Straight,
                            BondOrientation::Up => RelativeOrientation::Down,
                            BondOrientation::Down => RelativeOrientation::Up,
                        }
                    );
                    for r in Mat3::all_proper_rotations() {
                        let (pr, qr) = (p.transformed(&r, Vec3::ZERO), q.transformed(&r, Vec3::ZERO));
                        assert_eq!(pr.side_edge_mid2(s), qr.side_edge_mid2(Side::West));
                        assert_eq!(classify_orientation(&pr, &qr).unwrap(), orient.rel());
                    }
                }
            }
        }
    }
}
