//! Stochastic growth dynamics: frontier computation, uniform sampling over
//! the frontier multiset, bond-maximal attachment steps, terminality, staged
//! runs, and history replay.
//!
//! One step samples a (configuration, frontier site) pair uniformly from the
//! multiset union of all valid configurations' frontiers, attaches the tile,
//! then re-folds: among the grown assembly's configurations forming the most
//! new bonds, one is chosen uniformly and all those bonds are formed.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;
use std::sync::Arc;
use thiserror::Error;

use crate::assembly::{Assembly, BondEnd, FtamSystem, TileType};
pub use crate::configspace::FrontierSite;
use crate::configspace::{
    embed_with_context, new_bond_matching_with, visit_configs, ConfigError, ConfigView,
    Configuration, EmbedFailure, DEFAULT_SEARCH_BUDGET,
};
use crate::geometry::{
    can_bind, classify_orientation, propagate_placement, BondOrientation, Glue, GlueLabel,
    RelativeOrientation, Side, Vec3,
};
use crate::rng::SplitMix64;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    #[error(transparent)]
    Search(#[from] ConfigError),
    #[error(transparent)]
    Embed(#[from] EmbedFailure),
}

/// Tile-type sides indexed by the glue that binds them.
pub struct GlueIndex {
    by_key: BTreeMap<(GlueLabel, u32, bool), Vec<(usize, Side)>>,
}

impl GlueIndex {
    pub fn new(types: &[Arc<TileType>]) -> GlueIndex {
        let mut by_key: BTreeMap<(GlueLabel, u32, bool), Vec<(usize, Side)>> = BTreeMap::new();
        for (ti, tt) in types.iter().enumerate() {
            for side in Side::ALL {
                let g = tt.glue(side);
                if !g.is_empty() {
                    by_key
                        .entry((g.label.clone(), g.strength, g.flexible))
                        .or_default()
                        .push((ti, side));
                }
            }
        }
        GlueIndex { by_key }
    }

    /// (type index, side) pairs whose glue is complementary to g with equal
    /// strength and flexibility.
    pub fn partners(&self, g: &Glue) -> &[(usize, Side)] {
        self.by_key
            .get(&(g.label.complement(), g.strength, g.flexible))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// All attachment sites of one embedded configuration: tile type placements
/// adjacent to the assembly that bind every side they can, one partner per
/// side, with total strength at least the temperature.
fn sites_for_view(
    s: &FtamSystem,
    idx: &GlueIndex,
    a: &Assembly,
    unbound: &[BondEnd],
    view: &ConfigView,
) -> BTreeSet<FrontierSite> {
    let emb = view.embedding;
    let mut stub_edges: BTreeMap<Vec3, Vec<BondEnd>> = BTreeMap::new();
    for &(uid, side) in unbound {
        let edge = emb.placements[&uid].side_edge_mid2(side);
        stub_edges.entry(edge).or_default().push((uid, side));
    }
    let straight_full = |edge: &Vec3| view.straight_edges.get(edge).copied().unwrap_or(0) >= 1;

    let mut sites = BTreeSet::new();
    for &(uid, side) in unbound {
        let g = a.glue_at((uid, side));
        let p = emb.placements[&uid];
        let origin_edge = p.side_edge_mid2(side);
        let orients: &[BondOrientation] = if g.flexible {
            &BondOrientation::ALL
        } else {
            &[BondOrientation::Straight]
        };
        for &orient in orients {
            if orient == BondOrientation::Straight && straight_full(&origin_edge) {
                continue;
            }
            for &(ti, own) in idx.partners(g) {
                let q = propagate_placement(&p, side, orient, own);
                if view.occupied.contains_key(&q.slot()) {
                    continue;
                }
                let tt = &s.tile_types[ti];
                // Per own side, the existing stubs this placement can bind.
                let mut side_options: Vec<(Side, Vec<((u64, Side), u32)>)> = Vec::new();
                for s2 in Side::ALL {
                    let g2 = tt.glue(s2);
                    if g2.is_empty() {
                        continue;
                    }
                    let edge2 = q.side_edge_mid2(s2);
                    let mut opts = Vec::new();
                    for &(uid2, side2) in stub_edges.get(&edge2).map(Vec::as_slice).unwrap_or(&[])
                    {
                        let p2 = emb.placements[&uid2];
                        let Ok(rel) = classify_orientation(&q, &p2) else {
                            continue;
                        };
                        let Some(desc) = can_bind(g2, a.glue_at((uid2, side2)), rel) else {
                            continue;
                        };
                        if rel == RelativeOrientation::Straight && straight_full(&edge2) {
                            continue;
                        }
                        opts.push(((uid2, side2), desc.strength));
                    }
                    if !opts.is_empty() {
                        side_options.push((s2, opts));
                    }
                }
                if side_options.is_empty() {
                    continue;
                }
                // Cartesian product: every bindable side binds exactly one
                // partner (attachment forms all bonds it can).
                let mut combos: Vec<(BTreeSet<(u64, Side, Side)>, u32)> =
                    vec![(BTreeSet::new(), 0)];
                for (s2, opts) in &side_options {
                    let mut next = Vec::with_capacity(combos.len() * opts.len());
                    for (binds, strength) in &combos {
                        for ((uid2, side2), st2) in opts {
                            let mut b = binds.clone();
                            b.insert((*uid2, *side2, *s2));
                            next.push((b, strength + st2));
                        }
                    }
                    combos = next;
                }
                for (binds, strength) in combos {
                    if strength >= s.temperature {
                        sites.insert(FrontierSite {
                            tile_type: tt.clone(),
                            placement: q,
                            binds,
                        });
                    }
                }
            }
        }
    }
    sites
}

/// Frontier of one valid configuration.
pub fn frontier(
    s: &FtamSystem,
    a: &Assembly,
    c: &Configuration,
) -> Result<Vec<FrontierSite>, EmbedFailure> {
    let (emb, occupied, straight) = embed_with_context(a, c)?;
    let idx = GlueIndex::new(&s.tile_types);
    let unbound = a.unbound_glues();
    let view = ConfigView {
        config: c,
        embedding: &emb,
        occupied: &occupied,
        straight_edges: &straight,
    };
    Ok(sites_for_view(s, &idx, a, &unbound, &view)
        .into_iter()
        .collect())
}

/// Union with multiplicity of the frontiers of every valid configuration.
pub fn frontier_multiset(
    s: &FtamSystem,
    a: &Assembly,
    budget: Option<u64>,
) -> Result<BTreeMap<FrontierSite, u64>, ConfigError> {
    let idx = GlueIndex::new(&s.tile_types);
    let unbound = a.unbound_glues();
    let mut out: BTreeMap<FrontierSite, u64> = BTreeMap::new();
    visit_configs(a, None, budget.unwrap_or(DEFAULT_SEARCH_BUDGET), |view| {
        for site in sites_for_view(s, &idx, a, &unbound, &view) {
            *out.entry(site).or_insert(0) += 1;
        }
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// True iff no configuration admits any attachment.
pub fn is_terminal(s: &FtamSystem, a: &Assembly, budget: Option<u64>) -> Result<bool, ConfigError> {
    let idx = GlueIndex::new(&s.tile_types);
    let unbound = a.unbound_glues();
    let mut found = false;
    visit_configs(a, None, budget.unwrap_or(DEFAULT_SEARCH_BUDGET), |view| {
        if sites_for_view(s, &idx, a, &unbound, &view).is_empty() {
            ControlFlow::Continue(())
        } else {
            found = true;
            ControlFlow::Break(())
        }
    })?;
    Ok(!found)
}

/// Configurations forming the most new bonds, with that count.
pub fn c_max(
    a: &Assembly,
    budget: Option<u64>,
) -> Result<(Vec<Configuration>, u32), ConfigError> {
    let unbound = a.unbound_glues();
    let mut best: u32 = 0;
    let mut configs: Vec<Configuration> = Vec::new();
    visit_configs(a, None, budget.unwrap_or(DEFAULT_SEARCH_BUDGET), |view| {
        let n = new_bond_matching_with(a, &unbound, view.embedding, view.straight_edges).len()
            as u32;
        if n > best {
            best = n;
            configs.clear();
        }
        if n == best {
            configs.push(view.config.clone());
        }
        ControlFlow::Continue(())
    })?;
    configs.sort();
    Ok((configs, best))
}

/// One attachment: which tile went where and what the re-fold decided.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HistoryEntry {
    pub tile_type_id: String,
    pub new_uid: u64,
    pub binds: BTreeSet<(u64, Side, Side)>,
    /// Configuration of the grown assembly chosen from the bond maximizers.
    pub chosen_config: Configuration,
    /// Bonds formed in that configuration beyond the attachment's own.
    pub formed_bonds: Vec<(BondEnd, BondEnd)>,
}

#[derive(Clone, Debug)]
pub struct RunState {
    pub assembly: Assembly,
    pub rng_seed: u64,
    pub rng: SplitMix64,
    pub step_count: u64,
    pub history: Vec<HistoryEntry>,
}

impl RunState {
    pub fn new(s: &FtamSystem, rng_seed: u64) -> RunState {
        RunState {
            assembly: s.seed.clone(),
            rng_seed,
            rng: SplitMix64::new(rng_seed),
            step_count: 0,
            history: Vec::new(),
        }
    }
}

/// One step of the growth process; false means the assembly is terminal and
/// nothing changed. Uses two seeded draws: the frontier multiset sample and
/// the bond-maximizer sample.
pub fn step_mut(
    s: &FtamSystem,
    st: &mut RunState,
    budget: u64,
) -> Result<bool, DynamicsError> {
    let idx = GlueIndex::new(&s.tile_types);
    let unbound = st.assembly.unbound_glues();
    let mut flat: Vec<FrontierSite> = Vec::new();
    visit_configs(&st.assembly, None, budget, |view| {
        flat.extend(sites_for_view(s, &idx, &st.assembly, &unbound, &view));
        ControlFlow::Continue(())
    })?;
    if flat.is_empty() {
        return Ok(false);
    }
    let r = st.rng.gen_range(flat.len() as u64);
    let site = flat.swap_remove(r as usize);
    drop(flat);

    let new_uid = st.assembly.next_uid();
    st.assembly.add_tile(new_uid, site.tile_type.clone());
    for &(uid, side, own) in &site.binds {
        st.assembly
            .try_add_bond((uid, side), (new_uid, own))
            .expect("frontier site binds are valid bonds");
    }

    // Re-fold: uniform choice among configurations forming the most bonds.
    let unbound = st.assembly.unbound_glues();
    let mut best: u32 = 0;
    let mut maximizers: Vec<(Configuration, Vec<(BondEnd, BondEnd)>)> = Vec::new();
    visit_configs(&st.assembly, None, budget, |view| {
        let matching =
            new_bond_matching_with(&st.assembly, &unbound, view.embedding, view.straight_edges);
        let n = matching.len() as u32;
        if n > best {
            best = n;
            maximizers.clear();
        }
        if n == best {
            maximizers.push((view.config.clone(), matching));
        }
        ControlFlow::Continue(())
    })?;
    assert!(
        !maximizers.is_empty(),
        "grown assembly keeps at least one configuration"
    );
    let r2 = st.rng.gen_range(maximizers.len() as u64);
    let (chosen_config, formed_bonds) = maximizers.swap_remove(r2 as usize);
    for &(x, y) in &formed_bonds {
        st.assembly
            .try_add_bond(x, y)
            .expect("matched glue pairs are valid bonds");
    }

    st.history.push(HistoryEntry {
        tile_type_id: site.tile_type.id.clone(),
        new_uid,
        binds: site.binds.clone(),
        chosen_config,
        formed_bonds,
    });
    st.step_count += 1;
    Ok(true)
}

pub fn assembly_step(s: &FtamSystem, mut st: RunState) -> Result<RunState, DynamicsError> {
    step_mut(s, &mut st, DEFAULT_SEARCH_BUDGET)?;
    Ok(st)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RunOutcome {
    Terminal,
    Capped,
}

/// Step until terminal or until max_steps attachments happened.
pub fn run_to_terminal(
    s: &FtamSystem,
    mut st: RunState,
    max_steps: u64,
) -> Result<(RunState, RunOutcome), DynamicsError> {
    for _ in 0..max_steps {
        if !step_mut(s, &mut st, DEFAULT_SEARCH_BUDGET)? {
            return Ok((st, RunOutcome::Terminal));
        }
    }
    // max_steps reached; terminal only if nothing further attaches.
    let outcome = if is_terminal(s, &st.assembly, None)? {
        RunOutcome::Terminal
    } else {
        RunOutcome::Capped
    };
    Ok((st, outcome))
}

#[derive(Clone, Debug)]
pub struct StagedSystem {
    pub base: FtamSystem,
    /// Tile-type batches added after each terminal point.
    pub stages: Vec<Vec<Arc<TileType>>>,
}

#[derive(Error, Debug)]
pub enum StagedRunError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("stage {stage} did not reach a terminal assembly within {max_steps} steps")]
    StageCapped { stage: usize, max_steps: u64 },
    #[error("stage {stage} reuses tile type id {id}")]
    DuplicateTypeId { stage: usize, id: String },
}

/// Run the base system to terminal, then after each stage's tile types are
/// added run to terminal again; one snapshot per stage boundary. A single
/// seeded rng threads through the whole schedule.
pub fn staged_run(
    ss: &StagedSystem,
    rng_seed: u64,
    max_steps: u64,
) -> Result<Vec<RunState>, StagedRunError> {
    let mut ids: BTreeSet<String> = ss.base.tile_types.iter().map(|t| t.id.clone()).collect();
    for (si, stage) in ss.stages.iter().enumerate() {
        for t in stage {
            if !ids.insert(t.id.clone()) {
                return Err(StagedRunError::DuplicateTypeId {
                    stage: si + 1,
                    id: t.id.clone(),
                });
            }
        }
    }
    let mut sys = ss.base.clone();
    let mut st = RunState::new(&sys, rng_seed);
    let mut out = Vec::new();
    for stage in 0..=ss.stages.len() {
        let (next, outcome) = run_to_terminal(&sys, st, max_steps)?;
        st = next;
        if outcome != RunOutcome::Terminal {
            return Err(StagedRunError::StageCapped { stage, max_steps });
        }
        out.push(st.clone());
        if stage < ss.stages.len() {
            sys.tile_types.extend(ss.stages[stage].iter().cloned());
        }
    }
    Ok(out)
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("history step {step}: unknown tile type {id}")]
    UnknownType { step: usize, id: String },
    #[error("history step {step}: expected uid {expected}, recorded {recorded}")]
    UidMismatch {
        step: usize,
        expected: u64,
        recorded: u64,
    },
    #[error("history step {step}: {reason}")]
    BadBond { step: usize, reason: String },
}

/// Rebuild the assembly a history describes, starting from the seed.
pub fn replay(s: &FtamSystem, history: &[HistoryEntry]) -> Result<Assembly, ReplayError> {
    let mut a = s.seed.clone();
    for (step, h) in history.iter().enumerate() {
        let tt = s
            .tile_type_by_id(&h.tile_type_id)
            .ok_or_else(|| ReplayError::UnknownType {
                step,
                id: h.tile_type_id.clone(),
            })?
            .clone();
        let expected = a.next_uid();
        if h.new_uid != expected {
            return Err(ReplayError::UidMismatch {
                step,
                expected,
                recorded: h.new_uid,
            });
        }
        a.add_tile(h.new_uid, tt);
        for &(uid, side, own) in &h.binds {
            a.try_add_bond((uid, side), (h.new_uid, own))
                .map_err(|e| ReplayError::BadBond {
                    step,
                    reason: e.to_string(),
                })?;
        }
        for &(x, y) in &h.formed_bonds {
            a.try_add_bond(x, y).map_err(|e| ReplayError::BadBond {
                step,
                reason: e.to_string(),
            })?;
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::tau_stable;
    use crate::configspace::{canonical_placement, enumerate_configs, validate};
    use crate::geometry::{Mat3, Placement, Vec3};

    fn tt(id: &str, n: Glue, e: Glue, s: Glue, w: Glue) -> Arc<TileType> {
        TileType::new(id, n, e, s, w)
    }

    #[test]
    fn frontier_of_single_glue_seed() {
        let seed = tt("seed", Glue::empty(), Glue::flexible("a", 2), Glue::empty(), Glue::empty());
        let joiner = tt("x", Glue::empty(), Glue::empty(), Glue::empty(), Glue::flexible("a*", 2));
        let a = Assembly::single(0, seed.clone());
        let s = FtamSystem {
            tile_types: vec![seed.clone(), joiner],
            seed: a.clone(),
            temperature: 2,
        };
        let f = frontier(&s, &a, &Configuration::default()).unwrap();
        assert_eq!(f.len(), 3);
        for site in &f {
            assert_eq!(site.binds.len(), 1);
            assert!(crate::configspace::verify_nonterminality_certificate(
                &s,
                &a,
                &Configuration::default(),
                site
            ));
        }

        // Rigid glue: only the straight site.
        let seed_r = tt("seedr", Glue::empty(), Glue::rigid("a", 2), Glue::empty(), Glue::empty());
        let joiner_r = tt("xr", Glue::empty(), Glue::empty(), Glue::empty(), Glue::rigid("a*", 2));
        let a = Assembly::single(0, seed_r.clone());
        let s = FtamSystem {
            tile_types: vec![seed_r, joiner_r],
            seed: a.clone(),
            temperature: 2,
        };
        let f = frontier(&s, &a, &Configuration::default()).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(
            f[0].placement,
            Placement::new(
                crate::geometry::v3(1, 0, 0),
                crate::geometry::AxisDirection::PosZ,
                crate::geometry::AxisDirection::PosY
            )
        );
    }

    #[test]
    fn cooperative_corner_needs_both_glues() {
        // Tiles at (0,0) and (1,1) plus a connector at (0,1); the slot at
        // (1,0) binds both strength-1 rigid glues straight, reaching tau 2.
        let a0 = tt("a0", Glue::rigid("up", 2), Glue::rigid("c1", 1), Glue::empty(), Glue::empty());
        let conn = tt(
            "conn",
            Glue::empty(),
            Glue::rigid("over", 2),
            Glue::rigid("up*", 2),
            Glue::empty(),
        );
        let b = tt(
            "b",
            Glue::empty(),
            Glue::empty(),
            Glue::rigid("c2", 1),
            Glue::rigid("over*", 2),
        );
        let filler = tt(
            "filler",
            Glue::rigid("c2*", 1),
            Glue::empty(),
            Glue::empty(),
            Glue::rigid("c1*", 1),
        );
        let mut a = Assembly::new();
        a.add_tile(0, a0.clone());
        a.add_tile(1, conn.clone());
        a.add_tile(2, b.clone());
        a.add_bond((0, Side::North), (1, Side::South));
        a.add_bond((1, Side::East), (2, Side::West));
        let s = FtamSystem {
            tile_types: vec![a0, conn, b, filler],
            seed: a.clone(),
            temperature: 2,
        };
        let f = frontier(&s, &a, &Configuration::default()).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].tile_type.id, "filler");
        assert_eq!(
            f[0].binds,
            BTreeSet::from([(0, Side::East, Side::West), (2, Side::South, Side::North)])
        );

        // No complementary types at all: empty frontier.
        let bare = FtamSystem {
            tile_types: vec![s.tile_types[0].clone()],
            seed: a.clone(),
            temperature: 2,
        };
        assert!(frontier(&bare, &a, &Configuration::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn multiset_counts_sites_per_configuration() {
        // Flexible two-tile pair; the anchor exposes one more strong glue.
        let t0 = tt(
            "t0",
            Glue::flexible("n", 2),
            Glue::flexible("e", 2),
            Glue::empty(),
            Glue::empty(),
        );
        let t1 = tt("t1", Glue::empty(), Glue::empty(), Glue::empty(), Glue::flexible("e*", 2));
        let nt = tt("nt", Glue::empty(), Glue::empty(), Glue::flexible("n*", 2), Glue::empty());
        let mut a = Assembly::new();
        a.add_tile(0, t0.clone());
        a.add_tile(1, t1.clone());
        a.add_bond((0, Side::East), (1, Side::West));
        let s = FtamSystem {
            tile_types: vec![t0, t1, nt],
            seed: a.clone(),
            temperature: 2,
        };
        assert_eq!(enumerate_configs(&a, None).unwrap().len(), 3);
        let ms = frontier_multiset(&s, &a, None).unwrap();
        // The anchor's north glue admits the same 3 sites in all 3 configs.
        assert_eq!(ms.len(), 3);
        assert!(ms.values().all(|&m| m == 3));
        assert!(ms.keys().all(|site| site.tile_type.id == "nt"));

        // A rigid assembly's multiset is exactly its single frontier.
        let r0 = tt("r0", Glue::rigid("m", 2), Glue::empty(), Glue::empty(), Glue::empty());
        let rn = tt("rn", Glue::empty(), Glue::empty(), Glue::rigid("m*", 2), Glue::empty());
        let ra = Assembly::single(0, r0.clone());
        let rs = FtamSystem {
            tile_types: vec![r0, rn],
            seed: ra.clone(),
            temperature: 2,
        };
        let ms = frontier_multiset(&rs, &ra, None).unwrap();
        let f = frontier(&rs, &ra, &Configuration::default()).unwrap();
        assert_eq!(ms.len(), f.len());
        assert!(ms.values().all(|&m| m == 1));
    }

    /// Chain whose Up,Up,Up fold brings one complementary glue pair together.
    fn arch() -> Assembly {
        let mut a = Assembly::new();
        a.add_tile(
            0,
            tt("b", Glue::empty(), Glue::flexible("bg", 1), Glue::empty(), Glue::flexible("h", 1)),
        );
        a.add_tile(
            1,
            tt("g", Glue::empty(), Glue::flexible("gh", 1), Glue::empty(), Glue::flexible("bg*", 1)),
        );
        a.add_tile(
            2,
            tt("h", Glue::empty(), Glue::flexible("hd", 1), Glue::empty(), Glue::flexible("gh*", 1)),
        );
        a.add_tile(
            3,
            tt("d", Glue::flexible("hd*", 1), Glue::empty(), Glue::flexible("h*", 1), Glue::empty()),
        );
        a.add_bond((0, Side::East), (1, Side::West));
        a.add_bond((1, Side::East), (2, Side::West));
        a.add_bond((2, Side::East), (3, Side::North));
        a
    }

    #[test]
    fn c_max_prefers_bond_forming_folds() {
        use BondOrientation::{Down as D, Up as U};
        let a = arch();
        let (configs, best) = c_max(&a, None).unwrap();
        assert_eq!(best, 1);
        let fold = |o: BondOrientation| {
            Configuration::new(BTreeMap::from([(0, o), (1, o), (2, o)]))
        };
        assert_eq!(configs, vec![fold(U), fold(D)]);

        // An assembly where nothing can form bonds maximizes everywhere.
        let pair_type = tt("p", Glue::empty(), Glue::flexible("q", 1), Glue::empty(), Glue::empty());
        let pair_mate = tt("pm", Glue::empty(), Glue::empty(), Glue::empty(), Glue::flexible("q*", 1));
        let mut pair = Assembly::new();
        pair.add_tile(0, pair_type);
        pair.add_tile(1, pair_mate);
        pair.add_bond((0, Side::East), (1, Side::West));
        let (configs, best) = c_max(&pair, None).unwrap();
        assert_eq!(best, 0);
        assert_eq!(configs.len(), 3);
    }

    #[test]
    fn chirality_gives_a_frontier_bijection() {
        let mirror = Mat3([[1, 0, 0], [0, 1, 0], [0, 0, -1]]);
        let mut rng = SplitMix64::new(0xC1A1);
        for _ in 0..12 {
            let a = crate::corpus::random_foldable_assembly(
                &mut rng,
                &crate::corpus::FoldableParams {
                    tiles: 5,
                    extra_bonds: 1,
                    max_flexible: 4,
                    free_glue_chance_percent: 60,
                },
            );
            let s = crate::corpus::random_system(&mut rng, &a, 4, 2);
            for c in enumerate_configs(&a, None).unwrap() {
                let f = frontier(&s, &a, &c).unwrap();
                let fc = frontier(&s, &a, &c.chiral()).unwrap();
                let mapped: BTreeSet<FrontierSite> = f
                    .iter()
                    .map(|site| site.transformed(&mirror, Vec3::ZERO))
                    .collect();
                assert_eq!(mapped, fc.into_iter().collect());
            }
        }
    }

    #[test]
    fn steps_are_deterministic_and_preserve_stability() {
        let seed = tt("seed", Glue::empty(), Glue::rigid("a", 2), Glue::empty(), Glue::empty());
        let grow = tt("grow", Glue::empty(), Glue::rigid("a", 2), Glue::empty(), Glue::rigid("a*", 2));
        let a = Assembly::single(0, seed.clone());
        let s = FtamSystem {
            tile_types: vec![seed, grow],
            seed: a,
            temperature: 2,
        };
        let st1 = RunState::new(&s, 42);
        let st1 = assembly_step(&s, st1).unwrap();
        assert_eq!(st1.assembly.tiles.len(), 2);
        assert_eq!(st1.step_count, 1);
        assert!(tau_stable(&st1.assembly, 2).unwrap());

        // Same seeds, same result; the chain keeps growing deterministically.
        let st2 = assembly_step(&s, RunState::new(&s, 42)).unwrap();
        assert_eq!(st1.assembly, st2.assembly);
        assert_eq!(st1.history, st2.history);

        let (ran, outcome) = run_to_terminal(&s, st1, 5).unwrap();
        assert_eq!(outcome, RunOutcome::Capped);
        assert_eq!(ran.assembly.tiles.len(), 7);
        assert!(tau_stable(&ran.assembly, 2).unwrap());
        assert!(check_all(&s, &ran));
    }

    fn check_all(s: &FtamSystem, st: &RunState) -> bool {
        crate::assembly::check_assembly(&st.assembly, s).is_empty()
            && replay(s, &st.history).unwrap() == st.assembly
    }

    #[test]
    fn terminal_states_are_fixpoints() {
        let lone = tt("lone", Glue::empty(), Glue::rigid("z", 2), Glue::empty(), Glue::empty());
        let a = Assembly::single(0, lone.clone());
        let s = FtamSystem {
            tile_types: vec![lone],
            seed: a.clone(),
            temperature: 2,
        };
        assert!(is_terminal(&s, &a, None).unwrap());
        let st = RunState::new(&s, 7);
        let st2 = assembly_step(&s, st.clone()).unwrap();
        assert_eq!(st.assembly, st2.assembly);
        assert_eq!(st2.step_count, 0);
        let (st3, outcome) = run_to_terminal(&s, st2, 100).unwrap();
        assert_eq!(outcome, RunOutcome::Terminal);
        assert_eq!(st3.step_count, 0);
    }

    #[test]
    fn growth_forms_extra_bonds_opportunistically() {
        // Seed is the arch chain minus its last tile; once the hanging tile
        // attaches, the bond-maximal fold also forms the free glue pair.
        let arch_full = arch();
        let mut seed = arch_full.clone();
        seed.tiles.remove(&3);
        seed.bonds.truncate(2);
        let dtype = arch_full.tiles[&3].clone();
        let s = FtamSystem {
            tile_types: arch_full.tiles.values().cloned().collect(),
            seed,
            temperature: 1,
        };
        let mut found_folded = false;
        for rng_seed in 0..12 {
            let (st, _) = run_to_terminal(&s, RunState::new(&s, rng_seed), 3).unwrap();
            assert!(check_all(&s, &st));
            if st.assembly.tiles.len() == 4
                && st.assembly.tiles[&3] == dtype
                && st.assembly.bonds.len() == 4
            {
                found_folded = true;
            }
        }
        // The hanging tile can also attach by its other glue or stay open,
        // but across seeds the folded closure must appear.
        assert!(found_folded);
    }

    #[test]
    fn staged_runs_snapshot_each_boundary() {
        let seed = tt("seed", Glue::empty(), Glue::rigid("a", 2), Glue::empty(), Glue::empty());
        let first = tt("first", Glue::empty(), Glue::rigid("b", 2), Glue::empty(), Glue::rigid("a*", 2));
        let second = tt("second", Glue::empty(), Glue::empty(), Glue::empty(), Glue::rigid("b*", 2));
        let ss = StagedSystem {
            base: FtamSystem {
                tile_types: vec![seed.clone(), first.clone()],
                seed: Assembly::single(0, seed.clone()),
                temperature: 2,
            },
            stages: vec![vec![second.clone()]],
        };
        let states = staged_run(&ss, 9, 100).unwrap();
        assert_eq!(states.len(), 2);
        assert_eq!(states[0].assembly.tiles.len(), 2);
        assert_eq!(states[1].assembly.tiles.len(), 3);

        // Duplicate ids across stages are rejected.
        let bad = StagedSystem {
            base: ss.base.clone(),
            stages: vec![vec![first.clone()]],
        };
        assert!(matches!(
            staged_run(&bad, 9, 100),
            Err(StagedRunError::DuplicateTypeId { .. })
        ));
    }

    #[test]
    fn random_runs_replay_exactly() {
        let mut rng = SplitMix64::new(0xEE11);
        for case in 0..8 {
            let a = crate::corpus::random_foldable_assembly(
                &mut rng,
                &crate::corpus::FoldableParams {
                    tiles: 4,
                    extra_bonds: 1,
                    max_flexible: 3,
                    free_glue_chance_percent: 70,
                },
            );
            let s = crate::corpus::random_system(&mut rng, &a, 5, 1);
            let (st, _) = run_to_terminal(&s, RunState::new(&s, case), 4).unwrap();
            assert_eq!(replay(&s, &st.history).unwrap(), st.assembly);
            assert!(st.assembly.is_connected());
            assert!(tau_stable(&st.assembly, 1).unwrap());
            // Every intermediate state had a valid configuration.
            let configs = enumerate_configs(&st.assembly, None).unwrap();
            assert!(!configs.is_empty());
            for c in configs.iter().take(5) {
                assert!(validate(&st.assembly, c).valid);
            }
        }
    }

    #[test]
    fn canonical_placement_is_the_origin_up_tile() {
        assert_eq!(
            canonical_placement(),
            Placement::new(
                Vec3::ZERO,
                crate::geometry::AxisDirection::PosZ,
                crate::geometry::AxisDirection::PosY
            )
        );
    }
}
