//! Staged film whose free flaps are locked up or down by a second tile batch.
//!
//! The base stage grows a rigid plate in the z = 0 plane with one hinged flap
//! per pixel plus four hinged marker flaps in the front row. Each flap's
//! coplanar position is blocked by a plate tile, so a finished base has
//! exactly two states per flap and 2^(pixels+4) configurations overall.
//!
//! Stage two adds a full plate above (z = 1) and below (z = -1). Each plate
//! bootstraps off two marker flaps through strength-2 pin bonds, which fixes
//! it against the base, and then locks every pixel flap through a strength-1
//! bond: upward into the top plate where the image is true, downward into the
//! bottom plate elsewhere. The finished sandwich is rigid.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::assembly::{Assembly, FtamSystem, TileType};
use crate::dynamics::StagedSystem;
use crate::geometry::{shared_edge, v3, AxisDirection, Glue, Placement, Side};

fn plate_placement(x: i64, y: i64, z: i64) -> Placement {
    Placement::new(v3(x, y, z), AxisDirection::PosZ, AxisDirection::PosY)
}

/// Vertical flap square in the plane x = `x`, spanning z in [0,1] when `up`,
/// [-1,0] otherwise.
fn flap_placement(x: i64, y: i64, up: bool) -> Placement {
    let z = if up { 0 } else { -1 };
    Placement::new(v3(x, y, z), AxisDirection::PosX, AxisDirection::PosZ)
}

struct TileRec {
    id: String,
    placement: Placement,
    stage2: bool,
}

struct BondSpec {
    a: usize,
    b: usize,
    strength: u32,
    flexible: bool,
    label: String,
}

/// Build the staged film system. `image` has `rows` rows of `cols` pixels;
/// true pixels are locked upward by stage two, the rest downward.
pub fn generate_film(rows: usize, cols: usize, image: &[Vec<bool>]) -> StagedSystem {
    assert!(rows >= 1 && cols >= 1, "film needs at least one pixel");
    assert_eq!(image.len(), rows, "image row count");
    for row in image {
        assert_eq!(row.len(), cols, "image column count");
    }

    let w = 4 * cols as i64 + 2;
    let h = 2 * rows as i64 + 1;

    // Flaps: four markers on the front row, then one per pixel. Markers 0 and
    // 1 end up, markers 2 and 3 end down; their asymmetric pattern tells the
    // two chiral embeddings of the finished film apart.
    struct Flap {
        id: String,
        hinge: (i64, i64),
        up: bool,
    }
    let mut flaps: Vec<Flap> = (0..4)
        .map(|k| Flap {
            id: format!("m{k}"),
            hinge: (k, 0),
            up: k < 2,
        })
        .collect();
    for j in 0..rows {
        for i in 0..cols {
            flaps.push(Flap {
                id: format!("f{i}_{j}"),
                hinge: (4 * i as i64 + 1, 2 * j as i64 + 1),
                up: image[j][i],
            });
        }
    }

    let mut recs: Vec<TileRec> = Vec::new();
    let mut base_idx: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut top_idx: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut bot_idx: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for x in 0..w {
        for y in 0..h {
            base_idx.insert((x, y), recs.len());
            recs.push(TileRec {
                id: format!("b{x}_{y}"),
                placement: plate_placement(x, y, 0),
                stage2: false,
            });
        }
    }
    let flap_base = recs.len();
    for f in &flaps {
        recs.push(TileRec {
            id: f.id.clone(),
            placement: flap_placement(f.hinge.0 + 1, f.hinge.1, f.up),
            stage2: false,
        });
    }
    for x in 0..w {
        for y in 0..h {
            top_idx.insert((x, y), recs.len());
            recs.push(TileRec {
                id: format!("u{x}_{y}"),
                placement: plate_placement(x, y, 1),
                stage2: true,
            });
        }
    }
    for x in 0..w {
        for y in 0..h {
            bot_idx.insert((x, y), recs.len());
            recs.push(TileRec {
                id: format!("d{x}_{y}"),
                placement: plate_placement(x, y, -1),
                stage2: true,
            });
        }
    }

    // A flap claims the plate edge under its hinge and the plate edge its far
    // side locks into, so those edges carry no grid bond. Each claimed edge
    // is named by the plate tile whose west side it is.
    let base_claimed: Vec<(i64, i64)> = flaps.iter().map(|f| (f.hinge.0 + 1, f.hinge.1)).collect();
    let top_claimed: Vec<(i64, i64)> = flaps
        .iter()
        .filter(|f| f.up)
        .map(|f| (f.hinge.0 + 1, f.hinge.1))
        .collect();
    let bot_claimed: Vec<(i64, i64)> = flaps
        .iter()
        .filter(|f| !f.up)
        .map(|f| (f.hinge.0 + 1, f.hinge.1))
        .collect();

    let mut bonds: Vec<BondSpec> = Vec::new();
    let mut grid = |idx: &BTreeMap<(i64, i64), usize>, tag: &str, claimed: &[(i64, i64)]| {
        for x in 0..w {
            for y in 0..h {
                if x + 1 < w && !claimed.contains(&(x + 1, y)) {
                    bonds.push(BondSpec {
                        a: idx[&(x, y)],
                        b: idx[&(x + 1, y)],
                        strength: 2,
                        flexible: false,
                        label: format!("{tag}{x}_{y}_h"),
                    });
                }
                if y + 1 < h {
                    bonds.push(BondSpec {
                        a: idx[&(x, y)],
                        b: idx[&(x, y + 1)],
                        strength: 2,
                        flexible: false,
                        label: format!("{tag}{x}_{y}_v"),
                    });
                }
            }
        }
    };
    grid(&base_idx, "b", &base_claimed);
    grid(&top_idx, "u", &top_claimed);
    grid(&bot_idx, "d", &bot_claimed);

    for (n, f) in flaps.iter().enumerate() {
        bonds.push(BondSpec {
            a: base_idx[&f.hinge],
            b: flap_base + n,
            strength: 2,
            flexible: true,
            label: format!("h{n}"),
        });
        // Markers pin with strength 2 so the stage-two plates can bootstrap
        // from them; pixel locks are strength 1 and only form once the plate
        // has grown past them.
        let plate = if f.up { &top_idx } else { &bot_idx };
        bonds.push(BondSpec {
            a: flap_base + n,
            b: plate[&(f.hinge.0 + 1, f.hinge.1)],
            strength: if n < 4 { 2 } else { 1 },
            flexible: true,
            label: format!("p{n}"),
        });
    }

    // Resolve each bond to the tile sides meeting at its edge in the
    // reference embedding, and reject any side asked to carry two glues.
    let mut sides: BTreeMap<(usize, Side), Glue> = BTreeMap::new();
    for b in &bonds {
        let (sa, sb, _) = shared_edge(&recs[b.a].placement, &recs[b.b].placement)
            .expect("designed bonds join edge-adjacent tiles");
        let prev = sides.insert(
            (b.a, sa),
            Glue::new(&b.label, b.strength, b.flexible),
        );
        assert!(prev.is_none(), "side ({}, {sa}) carries two glues", recs[b.a].id);
        let prev = sides.insert(
            (b.b, sb),
            Glue::new(&format!("{}*", b.label), b.strength, b.flexible),
        );
        assert!(prev.is_none(), "side ({}, {sb}) carries two glues", recs[b.b].id);
    }

    let glue_of = |i: usize, s: Side, sides: &BTreeMap<(usize, Side), Glue>| {
        sides.get(&(i, s)).cloned().unwrap_or_else(Glue::empty)
    };
    let mut base_types: Vec<Arc<TileType>> = Vec::new();
    let mut stage_types: Vec<Arc<TileType>> = Vec::new();
    for (i, r) in recs.iter().enumerate() {
        let tt = TileType::new(
            &r.id,
            glue_of(i, Side::North, &sides),
            glue_of(i, Side::East, &sides),
            glue_of(i, Side::South, &sides),
            glue_of(i, Side::West, &sides),
        );
        if r.stage2 {
            stage_types.push(tt);
        } else {
            base_types.push(tt);
        }
    }

    let seed = Assembly::single(0, base_types[0].clone());
    StagedSystem {
        base: FtamSystem {
            tile_types: base_types,
            seed,
            temperature: 2,
        },
        stages: vec![stage_types],
    }
}
