//! Configurations of flexible bonds, their geometric embeddings, validity,
//! chirality, exhaustive enumeration, rigidity, and certificate checking.
//!
//! A configuration maps every flexible bond of an assembly to a fold state;
//! rigid bonds are implicitly Straight. Fixing one anchor tile's placement
//! determines every other tile's placement by propagation, so a configuration
//! is valid iff that propagation closes every bond cycle consistently, never
//! overlaps two tiles, and never routes two Straight bonds through the same
//! lattice edge gap.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::ControlFlow;
use thiserror::Error;

use crate::assembly::{Assembly, BondEnd, FtamSystem, TileType};
use crate::geometry::{
    can_bind, classify_orientation, propagate_placement, v3, AxisDirection, Mat3, Placement,
    RelativeOrientation, Side, Vec3,
};
pub use crate::geometry::BondOrientation;

/// Default cap on backtracking nodes for enumeration-based queries.
pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

/// Fold state for every flexible bond, keyed by bond index in the assembly.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Configuration {
    pub orientations: BTreeMap<usize, BondOrientation>,
}

impl Configuration {
    pub fn new(orientations: BTreeMap<usize, BondOrientation>) -> Configuration {
        Configuration { orientations }
    }

    pub fn get(&self, bond: usize) -> Option<BondOrientation> {
        self.orientations.get(&bond).copied()
    }

    pub fn set(&mut self, bond: usize, o: BondOrientation) {
        self.orientations.insert(bond, o);
    }

    /// Domain is exactly the flexible bonds of the assembly.
    pub fn is_complete_for(&self, a: &Assembly) -> bool {
        let flex: BTreeSet<usize> = a.flexible_bond_indices().into_iter().collect();
        self.orientations.keys().copied().collect::<BTreeSet<_>>() == flex
    }

    /// Swap Up and Down on every bond; Straight is fixed. Involution.
    pub fn chiral(&self) -> Configuration {
        Configuration {
            orientations: self
                .orientations
                .iter()
                .map(|(&b, o)| (b, o.chiral()))
                .collect(),
        }
    }

    /// Configuration with every flexible bond Straight.
    pub fn all_straight(a: &Assembly) -> Configuration {
        Configuration {
            orientations: a
                .flexible_bond_indices()
                .into_iter()
                .map(|i| (i, BondOrientation::Straight))
                .collect(),
        }
    }

    /// Orientations of the listed bonds as a word like "UDSS".
    pub fn word(&self, bonds: &[usize]) -> String {
        bonds
            .iter()
            .map(|b| match self.get(*b) {
                Some(o) => o.to_string(),
                None => "?".to_string(),
            })
            .collect()
    }
}

pub fn chiral(c: &Configuration) -> Configuration {
    c.chiral()
}

/// Placement of every tile, keyed by uid.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Embedding {
    pub placements: BTreeMap<u64, Placement>,
}

impl Embedding {
    pub fn get(&self, uid: u64) -> Option<&Placement> {
        self.placements.get(&uid)
    }

    pub fn occupied_slots(&self) -> BTreeMap<(Vec3, usize), u64> {
        self.placements
            .iter()
            .map(|(&u, p)| (p.slot(), u))
            .collect()
    }

    /// Inclusive bounds over all footprint corners.
    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        let mut bounds: Option<(Vec3, Vec3)> = None;
        for p in self.placements.values() {
            for c in p.footprint() {
                bounds = Some(match bounds {
                    None => (c, c),
                    Some((lo, hi)) => (
                        v3(lo.x.min(c.x), lo.y.min(c.y), lo.z.min(c.z)),
                        v3(hi.x.max(c.x), hi.y.max(c.y), hi.z.max(c.z)),
                    ),
                });
            }
        }
        bounds
    }

    pub fn transformed(&self, m: &Mat3, t: Vec3) -> Embedding {
        Embedding {
            placements: self
                .placements
                .iter()
                .map(|(&u, p)| (u, p.transformed(m, t)))
                .collect(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ValidityViolation {
    Overlap,
    BondThroughSameSpace,
    ContradictingLoop,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ValidityVerdict {
    pub valid: bool,
    pub violation: Option<ValidityViolation>,
}

impl ValidityVerdict {
    pub fn valid() -> ValidityVerdict {
        ValidityVerdict {
            valid: true,
            violation: None,
        }
    }

    pub fn invalid(v: ValidityViolation) -> ValidityVerdict {
        ValidityVerdict {
            valid: false,
            violation: Some(v),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EmbedFailure {
    #[error("invalid configuration: {0:?}")]
    Invalid(ValidityViolation),
    #[error("anchor tile {0} not in assembly")]
    NoSuchAnchor(u64),
    #[error("flexible bond {0} has no orientation")]
    Incomplete(usize),
    #[error("assembly is not connected")]
    Disconnected,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("search budget exceeded after {visited} nodes")]
    BudgetExceeded { visited: u64 },
    #[error("assembly is not connected")]
    Disconnected,
}

/// Anchor used for canonical embeddings: smallest uid, placed flat at the
/// origin facing up with north along +y.
pub fn canonical_anchor(a: &Assembly) -> Option<u64> {
    a.tiles.keys().next().copied()
}

pub fn canonical_placement() -> Placement {
    Placement::new(Vec3::ZERO, AxisDirection::PosZ, AxisDirection::PosY)
}

fn bond_end_on(a: &Assembly, bond: usize, uid: u64) -> BondEnd {
    let b = &a.bonds[bond];
    if b.a.0 == uid {
        b.a
    } else {
        b.b
    }
}

/// Place every tile by breadth-first propagation from the anchor. Fails with
/// Overlap when two tiles land in the same slot and ContradictingLoop when a
/// non-tree bond closes inconsistently. Same-space checking is validate's job.
pub fn compute_embedding(
    a: &Assembly,
    c: &Configuration,
    anchor: u64,
    anchor_placement: Placement,
) -> Result<Embedding, EmbedFailure> {
    if !a.tiles.contains_key(&anchor) {
        return Err(EmbedFailure::NoSuchAnchor(anchor));
    }
    let adj = a.adjacency();
    let mut emb = Embedding::default();
    let mut occupied: BTreeMap<(Vec3, usize), u64> = BTreeMap::new();
    emb.placements.insert(anchor, anchor_placement);
    occupied.insert(anchor_placement.slot(), anchor);
    let mut queue = VecDeque::from([anchor]);
    let mut pending: Vec<usize> = Vec::new(); // bonds to re-check once both ends placed
    let mut seen_bonds: BTreeSet<usize> = BTreeSet::new();
    while let Some(u) = queue.pop_front() {
        for &bi in &adj[&u] {
            if !seen_bonds.insert(bi) {
                continue;
            }
            let b = &a.bonds[bi];
            let from = bond_end_on(a, bi, u);
            let to = b.other_end(u);
            let orient = if b.flexible {
                c.get(bi).ok_or(EmbedFailure::Incomplete(bi))?
            } else {
                BondOrientation::Straight
            };
            if emb.placements.contains_key(&to.0) {
                pending.push(bi);
                continue;
            }
            let pu = emb.placements[&from.0];
            let q = propagate_placement(&pu, from.1, orient, to.1);
            if occupied.contains_key(&q.slot()) {
                return Err(EmbedFailure::Invalid(ValidityViolation::Overlap));
            }
            occupied.insert(q.slot(), to.0);
            emb.placements.insert(to.0, q);
            queue.push_back(to.0);
        }
    }
    if emb.placements.len() != a.tiles.len() {
        return Err(EmbedFailure::Disconnected);
    }
    for bi in pending {
        let b = &a.bonds[bi];
        let (pa, pb) = (emb.placements[&b.a.0], emb.placements[&b.b.0]);
        let orient = if b.flexible {
            c.get(bi).ok_or(EmbedFailure::Incomplete(bi))?
        } else {
            BondOrientation::Straight
        };
        let consistent = pa.side_edge_mid2(b.a.1) == pb.side_edge_mid2(b.b.1)
            && classify_orientation(&pa, &pb) == Ok(orient.rel());
        if !consistent {
            return Err(EmbedFailure::Invalid(ValidityViolation::ContradictingLoop));
        }
    }
    Ok(emb)
}

/// Straight-bond count per lattice edge (doubled midpoints). Rigid bonds are
/// always Straight; flexible bonds contribute per the configuration.
fn straight_bond_edges(
    a: &Assembly,
    c: &Configuration,
    emb: &Embedding,
) -> BTreeMap<Vec3, u32> {
    let mut out: BTreeMap<Vec3, u32> = BTreeMap::new();
    for (bi, b) in a.bonds.iter().enumerate() {
        let straight = if b.flexible {
            c.get(bi) == Some(BondOrientation::Straight)
        } else {
            true
        };
        if straight {
            let edge = emb.placements[&b.a.0].side_edge_mid2(b.a.1);
            *out.entry(edge).or_insert(0) += 1;
        }
    }
    out
}

/// Full validity: the embedding exists and no lattice edge carries two
/// Straight bonds (two surfaces may touch at an edge, but not cross the same
/// gap flat).
pub fn validate(a: &Assembly, c: &Configuration) -> ValidityVerdict {
    let Some(anchor) = canonical_anchor(a) else {
        return ValidityVerdict::valid();
    };
    match compute_embedding(a, c, anchor, canonical_placement()) {
        Ok(emb) => {
            let straight = straight_bond_edges(a, c, &emb);
            if straight.values().any(|&n| n > 1) {
                ValidityVerdict::invalid(ValidityViolation::BondThroughSameSpace)
            } else {
                ValidityVerdict::valid()
            }
        }
        Err(EmbedFailure::Invalid(v)) => ValidityVerdict::invalid(v),
        Err(e) => panic!("validate precondition broken: {e}"),
    }
}

/// Everything the enumerator knows at a leaf, lent to visitors.
pub struct ConfigView<'a> {
    pub config: &'a Configuration,
    pub embedding: &'a Embedding,
    pub occupied: &'a BTreeMap<(Vec3, usize), u64>,
    pub straight_edges: &'a BTreeMap<Vec3, u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct VisitSummary {
    pub nodes: u64,
    pub leaves: u64,
    pub stopped_early: bool,
}

struct Step {
    bond: usize,
    from: BondEnd,
    to: BondEnd,
}

struct SearchPlan {
    steps: Vec<Step>,
    /// checks[i]: non-tree bonds decided right after steps[i] places its tile.
    checks: Vec<Vec<usize>>,
    feasible: bool,
}

/// Spanning tree in breadth-first order from the anchor, exploring rigid
/// bonds first so branching happens on as few tree bonds as possible.
fn build_plan(a: &Assembly, anchor: u64) -> Result<SearchPlan, ConfigError> {
    let mut adj = a.adjacency();
    for list in adj.values_mut() {
        list.sort_by_key(|&i| (a.bonds[i].flexible, i));
    }
    let mut pos: BTreeMap<u64, usize> = BTreeMap::from([(anchor, 0)]);
    let mut steps: Vec<Step> = Vec::new();
    let mut checks: Vec<Vec<usize>> = Vec::new();
    let mut handled: BTreeSet<usize> = BTreeSet::new();
    let mut feasible = true;
    let mut queue = VecDeque::from([anchor]);
    while let Some(u) = queue.pop_front() {
        for &bi in &adj[&u] {
            if !handled.insert(bi) {
                continue;
            }
            let b = &a.bonds[bi];
            if b.a.0 == b.b.0 {
                // A tile cannot bond to itself: no two of its sides share an edge.
                feasible = false;
                continue;
            }
            let from = bond_end_on(a, bi, u);
            let to = b.other_end(u);
            match pos.get(&to.0).copied() {
                None => {
                    pos.insert(to.0, steps.len() + 1);
                    steps.push(Step { bond: bi, from, to });
                    checks.push(Vec::new());
                    queue.push_back(to.0);
                }
                Some(tpos) => {
                    let at = pos[&u].max(tpos);
                    debug_assert!(at > 0, "distinct endpoints both at anchor position");
                    checks[at - 1].push(bi);
                }
            }
        }
    }
    if pos.len() != a.tiles.len() {
        return Err(ConfigError::Disconnected);
    }
    Ok(SearchPlan {
        steps,
        checks,
        feasible,
    })
}

struct Dfs<'a, F> {
    a: &'a Assembly,
    plan: &'a SearchPlan,
    allowed: Option<&'a BTreeMap<usize, Vec<BondOrientation>>>,
    budget: u64,
    nodes: u64,
    leaves: u64,
    emb: Embedding,
    occupied: BTreeMap<(Vec3, usize), u64>,
    straight: BTreeMap<Vec3, u32>,
    assigned: BTreeMap<usize, BondOrientation>,
    visitor: F,
}

impl<'a, F: FnMut(ConfigView) -> ControlFlow<()>> Dfs<'a, F> {
    fn allowed_for(&self, bond: usize) -> &'a [BondOrientation] {
        const ALL: [BondOrientation; 3] = BondOrientation::ALL;
        const STRAIGHT: [BondOrientation; 1] = [BondOrientation::Straight];
        if !self.a.bonds[bond].flexible {
            return &STRAIGHT;
        }
        match self.allowed.and_then(|m| m.get(&bond)) {
            Some(list) => list,
            None => &ALL,
        }
    }

    /// Record a decided bond orientation; false means pruned. Appends an undo
    /// token (the edge) when a straight count was bumped.
    fn commit_bond(
        &mut self,
        bond: usize,
        orient: BondOrientation,
        edge: Vec3,
        undo_straight: &mut Vec<Vec3>,
    ) -> bool {
        if orient == BondOrientation::Straight {
            let n = self.straight.entry(edge).or_insert(0);
            if *n >= 1 {
                return false;
            }
            *n += 1;
            undo_straight.push(edge);
        }
        if self.a.bonds[bond].flexible {
            self.assigned.insert(bond, orient);
        }
        true
    }

    fn go(&mut self, i: usize) -> Result<ControlFlow<()>, ConfigError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(ConfigError::BudgetExceeded {
                visited: self.nodes,
            });
        }
        if i == self.plan.steps.len() {
            self.leaves += 1;
            let config = Configuration {
                orientations: self.assigned.clone(),
            };
            return Ok((self.visitor)(ConfigView {
                config: &config,
                embedding: &self.emb,
                occupied: &self.occupied,
                straight_edges: &self.straight,
            }));
        }
        let step = &self.plan.steps[i];
        let pu = self.emb.placements[&step.from.0];
        let edge = pu.side_edge_mid2(step.from.1);
        for &orient in self.allowed_for(step.bond) {
            let q = propagate_placement(&pu, step.from.1, orient, step.to.1);
            if self.occupied.contains_key(&q.slot()) {
                continue;
            }
            let mut undo_straight: Vec<Vec3> = Vec::new();
            if !self.commit_bond(step.bond, orient, edge, &mut undo_straight) {
                continue;
            }
            self.occupied.insert(q.slot(), step.to.0);
            self.emb.placements.insert(step.to.0, q);
            let mut ok = true;
            let mut undo_assigned: Vec<usize> = Vec::new();
            for &cb in &self.plan.checks[i] {
                let b = &self.a.bonds[cb];
                let (pa, pb) = (self.emb.placements[&b.a.0], self.emb.placements[&b.b.0]);
                let cedge = pa.side_edge_mid2(b.a.1);
                if cedge != pb.side_edge_mid2(b.b.1) {
                    ok = false;
                    break;
                }
                let Ok(rel) = classify_orientation(&pa, &pb) else {
                    ok = false;
                    break;
                };
                let Some(bo) = rel.bond_orientation() else {
                    ok = false;
                    break;
                };
                if !self.allowed_for(cb).contains(&bo) {
                    ok = false;
                    break;
                }
                if !self.commit_bond(cb, bo, cedge, &mut undo_straight) {
                    ok = false;
                    break;
                }
                if b.flexible {
                    undo_assigned.push(cb);
                }
            }
            let flow = if ok { self.go(i + 1)? } else { ControlFlow::Continue(()) };
            // Undo this branch.
            for e in undo_straight {
                *self.straight.get_mut(&e).unwrap() -= 1;
            }
            for cb in undo_assigned {
                self.assigned.remove(&cb);
            }
            if self.a.bonds[step.bond].flexible {
                self.assigned.remove(&step.bond);
            }
            self.emb.placements.remove(&step.to.0);
            self.occupied.remove(&q.slot());
            if flow == ControlFlow::Break(()) {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

/// Depth-first enumeration of all valid configurations, visiting each exactly
/// once with its canonical embedding. `allowed` restricts the orientations of
/// individual flexible bonds. The visitor can stop the search early.
pub fn visit_configs<F: FnMut(ConfigView) -> ControlFlow<()>>(
    a: &Assembly,
    allowed: Option<&BTreeMap<usize, Vec<BondOrientation>>>,
    budget: u64,
    visitor: F,
) -> Result<VisitSummary, ConfigError> {
    let Some(anchor) = canonical_anchor(a) else {
        // Empty assembly: one empty configuration.
        let mut visitor = visitor;
        let config = Configuration::default();
        let emb = Embedding::default();
        let flow = visitor(ConfigView {
            config: &config,
            embedding: &emb,
            occupied: &BTreeMap::new(),
            straight_edges: &BTreeMap::new(),
        });
        return Ok(VisitSummary {
            nodes: 1,
            leaves: 1,
            stopped_early: flow == ControlFlow::Break(()),
        });
    };
    let plan = build_plan(a, anchor)?;
    if !plan.feasible {
        return Ok(VisitSummary::default());
    }
    let ap = canonical_placement();
    let mut dfs = Dfs {
        a,
        plan: &plan,
        allowed,
        budget,
        nodes: 0,
        leaves: 0,
        emb: Embedding {
            placements: BTreeMap::from([(anchor, ap)]),
        },
        occupied: BTreeMap::from([(ap.slot(), anchor)]),
        straight: BTreeMap::new(),
        assigned: BTreeMap::new(),
        visitor,
    };
    let flow = dfs.go(0)?;
    Ok(VisitSummary {
        nodes: dfs.nodes,
        leaves: dfs.leaves,
        stopped_early: flow == ControlFlow::Break(()),
    })
}

/// All valid configurations, sorted. Errors out (never truncates) if the
/// search exceeds the node budget.
pub fn enumerate_configs(
    a: &Assembly,
    budget: Option<u64>,
) -> Result<Vec<Configuration>, ConfigError> {
    enumerate_configs_restricted(a, None, budget)
}

pub fn enumerate_configs_restricted(
    a: &Assembly,
    allowed: Option<&BTreeMap<usize, Vec<BondOrientation>>>,
    budget: Option<u64>,
) -> Result<Vec<Configuration>, ConfigError> {
    let mut out = Vec::new();
    visit_configs(a, allowed, budget.unwrap_or(DEFAULT_SEARCH_BUDGET), |view| {
        out.push(view.config.clone());
        ControlFlow::Continue(())
    })?;
    out.sort();
    Ok(out)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RigidityVerdict {
    /// One valid configuration, or exactly two forming a chiral pair.
    Rigid { configs: Vec<Configuration> },
    /// Two valid configurations that are neither equal nor chiral.
    Flexible {
        witness: (Configuration, Configuration),
    },
    /// No valid configuration at all.
    Empty,
}

/// Decide rigidity by enumeration, stopping as soon as a flexibility witness
/// appears.
pub fn check_rigidity(a: &Assembly, budget: Option<u64>) -> Result<RigidityVerdict, ConfigError> {
    let mut found: Vec<Configuration> = Vec::new();
    let mut witness: Option<(Configuration, Configuration)> = None;
    visit_configs(a, None, budget.unwrap_or(DEFAULT_SEARCH_BUDGET), |view| {
        let c = view.config.clone();
        if let Some(first) = found.first() {
            if c != first.chiral() {
                witness = Some((first.clone(), c));
                return ControlFlow::Break(());
            }
        }
        found.push(c);
        ControlFlow::Continue(())
    })?;
    Ok(match witness {
        Some(w) => RigidityVerdict::Flexible { witness: w },
        None if found.is_empty() => RigidityVerdict::Empty,
        None => RigidityVerdict::Rigid { configs: found },
    })
}

/// True iff |C| = 1, or |C| = 2 and the two configurations are chiral.
pub fn is_rigid(a: &Assembly) -> Result<bool, ConfigError> {
    Ok(matches!(
        check_rigidity(a, None)?,
        RigidityVerdict::Rigid { .. }
    ))
}

/// A pair of distinct valid configurations witnesses flexibility unless they
/// are chiral images of each other.
pub fn verify_flexibility_certificate(
    a: &Assembly,
    c: &Configuration,
    c2: &Configuration,
) -> bool {
    c.is_complete_for(a)
        && c2.is_complete_for(a)
        && validate(a, c).valid
        && validate(a, c2).valid
        && c != c2
        && *c2 != c.chiral()
}

/// Embedding plus derived occupancy and straight-edge maps; fails on any
/// validity violation.
pub(crate) fn embed_with_context(
    a: &Assembly,
    c: &Configuration,
) -> Result<(Embedding, BTreeMap<(Vec3, usize), u64>, BTreeMap<Vec3, u32>), EmbedFailure> {
    let anchor = canonical_anchor(a).ok_or(EmbedFailure::NoSuchAnchor(0))?;
    let emb = compute_embedding(a, c, anchor, canonical_placement())?;
    let straight = straight_bond_edges(a, c, &emb);
    if straight.values().any(|&n| n > 1) {
        return Err(EmbedFailure::Invalid(ValidityViolation::BondThroughSameSpace));
    }
    let occupied = emb.occupied_slots();
    Ok((emb, occupied, straight))
}

/// Unbound glue sides grouped by the lattice edge they sit on.
fn stubs_by_edge(unbound: &[BondEnd], emb: &Embedding) -> BTreeMap<Vec3, Vec<BondEnd>> {
    let mut out: BTreeMap<Vec3, Vec<BondEnd>> = BTreeMap::new();
    for &end in unbound {
        let edge = emb.placements[&end.0].side_edge_mid2(end.1);
        out.entry(edge).or_default().push(end);
    }
    out
}

/// Largest set of disjoint bindable stub pairs on one edge, at most
/// `straight_budget` of them Straight; ties broken lexicographically.
fn best_edge_matching(
    pairs: &[(BondEnd, BondEnd, bool)],
    straight_budget: u32,
) -> Vec<(BondEnd, BondEnd)> {
    fn rec(
        pairs: &[(BondEnd, BondEnd, bool)],
        i: usize,
        used: &mut BTreeSet<BondEnd>,
        straight_left: u32,
        current: &mut Vec<(BondEnd, BondEnd)>,
        best: &mut Vec<(BondEnd, BondEnd)>,
    ) {
        if i == pairs.len() {
            if current.len() > best.len() || (current.len() == best.len() && *current < *best) {
                *best = current.clone();
            }
            return;
        }
        let (x, y, straight) = pairs[i];
        if !used.contains(&x) && !used.contains(&y) && (!straight || straight_left > 0) {
            used.insert(x);
            used.insert(y);
            current.push((x.min(y), x.max(y)));
            rec(
                pairs,
                i + 1,
                used,
                straight_left - if straight { 1 } else { 0 },
                current,
                best,
            );
            current.pop();
            used.remove(&x);
            used.remove(&y);
        }
        rec(pairs, i + 1, used, straight_left, current, best);
    }
    let mut best = Vec::new();
    let mut current = Vec::new();
    rec(
        pairs,
        0,
        &mut BTreeSet::new(),
        straight_budget,
        &mut current,
        &mut best,
    );
    best.sort();
    best
}

/// Maximum set of new bonds formable without moving any tile, given an
/// already-computed embedding and its straight-bond edge map: unbound
/// complementary glue pairs across shared edges, each glue used once, and
/// never a second Straight bond through an edge.
pub fn new_bond_matching_in(
    a: &Assembly,
    emb: &Embedding,
    straight: &BTreeMap<Vec3, u32>,
) -> Vec<(BondEnd, BondEnd)> {
    new_bond_matching_with(a, &a.unbound_glues(), emb, straight)
}

/// new_bond_matching_in with the unbound-glue list precomputed, for callers
/// scoring many configurations of one assembly.
pub fn new_bond_matching_with(
    a: &Assembly,
    unbound: &[BondEnd],
    emb: &Embedding,
    straight: &BTreeMap<Vec3, u32>,
) -> Vec<(BondEnd, BondEnd)> {
    let mut out = Vec::new();
    for (edge, stubs) in stubs_by_edge(unbound, emb) {
        if stubs.len() < 2 {
            continue;
        }
        let mut pairs = Vec::new();
        for i in 0..stubs.len() {
            for j in i + 1..stubs.len() {
                let (pi, pj) = (emb.placements[&stubs[i].0], emb.placements[&stubs[j].0]);
                let Ok(rel) = classify_orientation(&pi, &pj) else {
                    continue;
                };
                if can_bind(a.glue_at(stubs[i]), a.glue_at(stubs[j]), rel).is_some() {
                    pairs.push((stubs[i], stubs[j], rel == RelativeOrientation::Straight));
                }
            }
        }
        if pairs.is_empty() {
            continue;
        }
        let budget = 1 - straight.get(&edge).copied().unwrap_or(0).min(1);
        out.extend(best_edge_matching(&pairs, budget));
    }
    out.sort();
    out
}

/// new_bond_matching_in for a configuration's canonical embedding.
pub fn max_new_bond_matching(
    a: &Assembly,
    c: &Configuration,
) -> Result<Vec<(BondEnd, BondEnd)>, EmbedFailure> {
    let (emb, _occupied, straight) = embed_with_context(a, c)?;
    Ok(new_bond_matching_in(a, &emb, &straight))
}

/// The number of new bonds max_new_bond_matching would form.
pub fn count_new_bonds(a: &Assembly, c: &Configuration) -> Result<u32, EmbedFailure> {
    Ok(max_new_bond_matching(a, c)?.len() as u32)
}

/// An attachment opportunity: a tile type, where it would sit in the
/// configuration's canonical embedding, and the maximal set of bonds it forms
/// there, as (existing tile, existing side, own side) records. Sites are
/// always relative to one specific valid configuration.
#[derive(Clone, Debug)]
pub struct FrontierSite {
    pub tile_type: std::sync::Arc<TileType>,
    pub placement: Placement,
    pub binds: BTreeSet<(u64, Side, Side)>,
}

impl FrontierSite {
    fn key(&self) -> (&str, Placement, &BTreeSet<(u64, Side, Side)>) {
        (&self.tile_type.id, self.placement, &self.binds)
    }

    /// Total strength of the bonds the site would form.
    pub fn total_strength(&self, a: &Assembly) -> u32 {
        self.binds
            .iter()
            .map(|&(uid, side, _)| a.glue_at((uid, side)).strength)
            .sum()
    }

    /// The same site in the mirrored embedding of the chiral configuration.
    pub fn transformed(&self, m: &Mat3, t: Vec3) -> FrontierSite {
        FrontierSite {
            tile_type: self.tile_type.clone(),
            placement: self.placement.transformed(m, t),
            binds: self.binds.clone(),
        }
    }
}

impl PartialEq for FrontierSite {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for FrontierSite {}
impl PartialOrd for FrontierSite {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FrontierSite {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

/// Accept (configuration, frontier site) as a witness that the assembly can
/// still grow: the configuration must validate, the site's slot must be free
/// in its canonical embedding, every bind must be geometrically and
/// glue-compatible, and the bound strength must reach the temperature.
pub fn verify_nonterminality_certificate(
    s: &FtamSystem,
    a: &Assembly,
    c: &Configuration,
    f: &FrontierSite,
) -> bool {
    if !c.is_complete_for(a) || f.binds.is_empty() {
        return false;
    }
    let Ok((emb, occupied, straight)) = embed_with_context(a, c) else {
        return false;
    };
    if occupied.contains_key(&f.placement.slot()) {
        return false;
    }
    let known = match s.tile_type_by_id(&f.tile_type.id) {
        Some(t) if t.as_ref() == f.tile_type.as_ref() => t,
        _ => return false,
    };
    let mut total = 0u32;
    let mut own_sides = BTreeSet::new();
    let mut existing = BTreeSet::new();
    for &(uid, side, own) in &f.binds {
        if !own_sides.insert(own) || !existing.insert((uid, side)) {
            return false;
        }
        let Some(p) = emb.get(uid) else {
            return false;
        };
        if a.bond_at((uid, side)).is_some() {
            return false;
        }
        let edge = p.side_edge_mid2(side);
        if edge != f.placement.side_edge_mid2(own) {
            return false;
        }
        let Ok(rel) = classify_orientation(p, &f.placement) else {
            return false;
        };
        let Some(desc) = can_bind(a.glue_at((uid, side)), known.glue(own), rel) else {
            return false;
        };
        if rel == RelativeOrientation::Straight && straight.get(&edge).copied().unwrap_or(0) >= 1 {
            return false;
        }
        total += desc.strength;
    }
    total >= s.temperature
}

/// Canonical form of an embedding under the 24 lattice rotations plus
/// translation, preserving tile identities.
pub fn canonical_embedding_key(e: &Embedding) -> Vec<(u64, Placement)> {
    Mat3::all_proper_rotations()
        .into_iter()
        .map(|m| {
            let rotated: Vec<(u64, Placement)> = e
                .placements
                .iter()
                .map(|(&u, p)| (u, p.transformed(&m, Vec3::ZERO)))
                .collect();
            let min = rotated.iter().fold(None::<Vec3>, |acc, (_, p)| {
                Some(match acc {
                    None => p.location,
                    Some(lo) => v3(
                        lo.x.min(p.location.x),
                        lo.y.min(p.location.y),
                        lo.z.min(p.location.z),
                    ),
                })
            });
            let min = min.unwrap_or(Vec3::ZERO);
            rotated
                .into_iter()
                .map(|(u, p)| {
                    (
                        u,
                        Placement {
                            location: p.location - min,
                            ..p
                        },
                    )
                })
                .collect::<Vec<_>>()
        })
        .min()
        .unwrap()
}

/// Canonical form of the bare surface: the set of (doubled center, normal)
/// squares up to rotation and translation, forgetting tile identity and
/// orientation labels.
pub fn canonical_shape_key(e: &Embedding) -> Vec<(Vec3, Vec3)> {
    Mat3::all_proper_rotations()
        .into_iter()
        .map(|m| {
            let mut squares: Vec<(Vec3, Vec3)> = e
                .placements
                .values()
                .map(|p| (m.mul_vec(p.center2()), m.mul_vec(p.normal.vec())))
                .collect();
            let min = squares.iter().fold(None::<Vec3>, |acc, (c, _)| {
                Some(match acc {
                    None => *c,
                    Some(lo) => v3(lo.x.min(c.x), lo.y.min(c.y), lo.z.min(c.z)),
                })
            });
            let min = min.unwrap_or(Vec3::ZERO);
            for (c, _) in &mut squares {
                *c = *c - min;
            }
            squares.sort();
            squares
        })
        .min()
        .unwrap()
}
