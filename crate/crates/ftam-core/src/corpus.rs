//! Reproducible randomized corpora for the test suites: geometrically grown
//! assemblies that always admit at least one valid configuration, raw
//! weighted bond graphs for cut checks, and tile systems wrapped around an
//! assembly.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::assembly::{Assembly, Bond, FtamSystem, TileType};
use crate::geometry::{
    classify_orientation, propagate_placement, shared_edge, BondOrientation, Glue, Placement,
    Side, Vec3,
};
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug)]
pub struct FoldableParams {
    pub tiles: usize,
    /// Cycle-closing bonds to add between already-adjacent tiles.
    pub extra_bonds: usize,
    /// Hard cap on the number of flexible bonds.
    pub max_flexible: usize,
    /// Chance in percent that an unbonded side gets a free glue from a small
    /// shared label pool.
    pub free_glue_chance_percent: u64,
}

fn pool_glue(rng: &mut SplitMix64) -> Glue {
    let base = format!("p{}", rng.gen_range(4));
    let label = if rng.gen_range(2) == 0 {
        base
    } else {
        format!("{base}*")
    };
    Glue::new(&label, 1 + rng.gen_range(2) as u32, rng.gen_range(2) == 0)
}

/// Grow an assembly tile by tile at valid geometric offsets, then close a few
/// extra bonds between adjacent free sides. The orientations chosen during
/// growth always form one valid configuration, so the configuration space is
/// never empty. Tile uids are 0..n with per-tile unique types.
pub fn random_foldable_assembly(rng: &mut SplitMix64, p: &FoldableParams) -> Assembly {
    let mut placements: Vec<Placement> = vec![crate::configspace::canonical_placement()];
    let mut occupied: BTreeSet<(Vec3, usize)> = BTreeSet::from([placements[0].slot()]);
    let mut straight_edges: BTreeSet<Vec3> = BTreeSet::new();
    let mut used: BTreeSet<(usize, Side)> = BTreeSet::new();
    // (i, side of i, j, side of j, orientation, flexible)
    let mut recs: Vec<(usize, Side, usize, Side, BondOrientation, bool)> = Vec::new();
    let mut flex_count = 0usize;

    while placements.len() < p.tiles {
        let mut placed = false;
        for _attempt in 0..200 {
            let i = rng.gen_range(placements.len() as u64) as usize;
            let s = Side::ALL[rng.gen_range(4) as usize];
            if used.contains(&(i, s)) {
                continue;
            }
            let o = if flex_count < p.max_flexible {
                BondOrientation::ALL[rng.gen_range(3) as usize]
            } else {
                BondOrientation::Straight
            };
            let s2 = Side::ALL[rng.gen_range(4) as usize];
            let q = propagate_placement(&placements[i], s, o, s2);
            if occupied.contains(&q.slot()) {
                continue;
            }
            let edge = placements[i].side_edge_mid2(s);
            if o == BondOrientation::Straight && straight_edges.contains(&edge) {
                continue;
            }
            let flexible = if o == BondOrientation::Straight {
                flex_count < p.max_flexible && rng.gen_range(2) == 0
            } else {
                true
            };
            let t = placements.len();
            placements.push(q);
            occupied.insert(q.slot());
            if o == BondOrientation::Straight {
                straight_edges.insert(edge);
            }
            if flexible {
                flex_count += 1;
            }
            used.insert((i, s));
            used.insert((t, s2));
            recs.push((i, s, t, s2, o, flexible));
            placed = true;
            break;
        }
        if !placed {
            // Boxed in; settle for a smaller assembly.
            break;
        }
    }

    let n = placements.len();
    let mut candidates: Vec<(usize, Side, usize, Side, BondOrientation)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let Some((si, sj, _)) = shared_edge(&placements[i], &placements[j]) else {
                continue;
            };
            let Ok(rel) = classify_orientation(&placements[i], &placements[j]) else {
                continue;
            };
            let Some(o) = rel.bond_orientation() else {
                continue;
            };
            candidates.push((i, si, j, sj, o));
        }
    }
    for _ in 0..p.extra_bonds {
        if candidates.is_empty() {
            break;
        }
        let pick = rng.gen_range(candidates.len() as u64) as usize;
        let (i, si, j, sj, o) = candidates.swap_remove(pick);
        if used.contains(&(i, si)) || used.contains(&(j, sj)) {
            continue;
        }
        let edge = placements[i].side_edge_mid2(si);
        if o == BondOrientation::Straight && straight_edges.contains(&edge) {
            continue;
        }
        let flexible = if o == BondOrientation::Straight {
            flex_count < p.max_flexible && rng.gen_range(2) == 0
        } else if flex_count < p.max_flexible {
            true
        } else {
            continue;
        };
        if o == BondOrientation::Straight {
            straight_edges.insert(edge);
        }
        if flexible {
            flex_count += 1;
        }
        used.insert((i, si));
        used.insert((j, sj));
        recs.push((i, si, j, sj, o, flexible));
    }

    let mut glues: Vec<[Glue; 4]> = vec![
        [Glue::empty(), Glue::empty(), Glue::empty(), Glue::empty()];
        n
    ];
    for (k, &(i, si, j, sj, _o, flexible)) in recs.iter().enumerate() {
        let strength = 1 + rng.gen_range(2) as u32;
        glues[i][si.index()] = Glue::new(&format!("b{k}"), strength, flexible);
        glues[j][sj.index()] = Glue::new(&format!("b{k}*"), strength, flexible);
    }
    for (t, tg) in glues.iter_mut().enumerate() {
        for s in Side::ALL {
            if tg[s.index()].is_empty()
                && rng.gen_range(100) < p.free_glue_chance_percent
                && !used.contains(&(t, s))
            {
                tg[s.index()] = pool_glue(rng);
            }
        }
    }

    let mut a = Assembly::new();
    for (t, g) in glues.iter().enumerate() {
        let [gn, ge, gs, gw] = g.clone();
        a.add_tile(t as u64, TileType::new(&format!("t{t}"), gn, ge, gs, gw));
    }
    for &(i, si, j, sj, _, _) in &recs {
        a.add_bond((i as u64, si), (j as u64, sj));
    }
    a
}

/// Connected multigraph with random strengths 1..=3, pushed as raw bonds.
/// Only the bond graph is meaningful; glue structure is not maintained.
pub fn random_bond_graph(rng: &mut SplitMix64, max_tiles: u64) -> Assembly {
    let n = 2 + rng.gen_range(max_tiles - 1);
    let mut a = Assembly::new();
    for uid in 0..n {
        a.add_tile(
            uid,
            TileType::new(
                &format!("t{uid}"),
                Glue::empty(),
                Glue::empty(),
                Glue::empty(),
                Glue::empty(),
            ),
        );
    }
    let push = |a: &mut Assembly, u: u64, v: u64, strength: u32| {
        a.bonds.push(Bond {
            a: (u, Side::North),
            b: (v, Side::South),
            strength,
            flexible: false,
        });
    };
    for v in 1..n {
        let u = rng.gen_range(v);
        push(&mut a, u, v, 1 + rng.gen_range(3) as u32);
    }
    for _ in 0..rng.gen_range(n + 1) {
        let u = rng.gen_range(n);
        let v = rng.gen_range(n);
        if u != v {
            push(&mut a, u.min(v), u.max(v), 1 + rng.gen_range(3) as u32);
        }
    }
    a
}

/// Wrap an assembly into a system: its own tile types plus a few random
/// types drawn from the shared free-glue pool, seeded with the assembly.
pub fn random_system(
    rng: &mut SplitMix64,
    a: &Assembly,
    extra_types: usize,
    temperature: u32,
) -> FtamSystem {
    let mut tile_types: Vec<Arc<TileType>> = a.tiles.values().cloned().collect();
    tile_types.sort_by(|x, y| x.id.cmp(&y.id));
    tile_types.dedup_by(|x, y| x.id == y.id);
    for k in 0..extra_types {
        let mut g = [Glue::empty(), Glue::empty(), Glue::empty(), Glue::empty()];
        for slot in &mut g {
            if rng.gen_range(2) == 0 {
                *slot = pool_glue(rng);
            }
        }
        let [gn, ge, gs, gw] = g;
        tile_types.push(TileType::new(&format!("x{k}"), gn, ge, gs, gw));
    }
    FtamSystem {
        tile_types,
        seed: a.clone(),
        temperature,
    }
}
