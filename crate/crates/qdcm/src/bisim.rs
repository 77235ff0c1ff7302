//! Bisimilarity by partition refinement, pairwise relation checkers,
//! quotient models and distinguishing formulas.
//!
//! Three equivalences are computed, all starting from valuation equality:
//!
//! * `Cm` — refine on the set of blocks meeting each point's backward
//!   closure (one-step transfer along incoming edges).
//! * `Cmc` — refine on blocks meeting the forward and the backward closure.
//! * `CoPa` — divergence-blind stuttering refinement in both directions: a
//!   block must either wholly reach a neighbouring block through internal
//!   steps or not at all.
//!
//! Every refinement is recorded so that a split can be replayed as a formula
//! separating two non-equivalent points.

use std::collections::HashMap;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::space::{ClosureModel, Direction, Point, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BisimKind {
    Cm,
    Cmc,
    CoPa,
}

impl BisimKind {
    pub fn name(self) -> &'static str {
        match self {
            BisimKind::Cm => "cm",
            BisimKind::Cmc => "cmc",
            BisimKind::CoPa => "copa",
        }
    }
}

/// An equivalence over a model's points. Block ids are canonical: blocks are
/// numbered by their smallest member, in point order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<u32>,
    blocks: Vec<PointSet>,
}

impl Partition {
    /// Builds a canonical partition from an arbitrary block assignment.
    pub fn from_assignment(len: usize, ids: &[usize]) -> Partition {
        assert_eq!(len, ids.len());
        let mut renumber: HashMap<usize, u32> = HashMap::new();
        let mut block_of = vec![0u32; len];
        for (i, id) in ids.iter().enumerate() {
            let next = renumber.len() as u32;
            let block = *renumber.entry(*id).or_insert(next);
            block_of[i] = block;
        }
        let count = renumber.len();
        let mut blocks = vec![PointSet::empty(len); count];
        for (i, b) in block_of.iter().enumerate() {
            blocks[*b as usize].insert(Point(i as u32));
        }
        Partition { block_of, blocks }
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_id(&self, p: Point) -> usize {
        self.block_of[p.index()] as usize
    }

    pub fn block(&self, id: usize) -> &PointSet {
        &self.blocks[id]
    }

    pub fn blocks(&self) -> &[PointSet] {
        &self.blocks
    }

    pub fn same_block(&self, x: Point, y: Point) -> bool {
        self.block_of[x.index()] == self.block_of[y.index()]
    }

    /// True when every block of `self` lies inside one block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.blocks.iter().all(|block| {
            let mut members = block.iter();
            match members.next() {
                None => true,
                Some(first) => {
                    let target = coarser.block_id(first);
                    members.all(|p| coarser.block_id(p) == target)
                }
            }
        })
    }

    /// All related ordered pairs, identity included.
    pub fn pairs(&self) -> Vec<(Point, Point)> {
        let mut out = Vec::new();
        for block in &self.blocks {
            for x in block.iter() {
                for y in block.iter() {
                    out.push((x, y));
                }
            }
        }
        out
    }
}

/// Initial partition: points are grouped by the exact set of atoms they
/// satisfy.
pub fn valuation_partition(model: &ClosureModel) -> Partition {
    let mut key_of: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut ids = Vec::with_capacity(model.len());
    let atom_sets: Vec<&PointSet> =
        model.atom_names().map(|a| model.atom_set(a).unwrap()).collect();
    for p in model.points() {
        let key: Vec<bool> = atom_sets.iter().map(|s| s.contains(p)).collect();
        let next = key_of.len();
        ids.push(*key_of.entry(key).or_insert(next));
    }
    Partition::from_assignment(model.len(), &ids)
}

// ---------------------------------------------------------------------------
// Refinement trace
// ---------------------------------------------------------------------------

/// One block generation during refinement. `formula` denotes exactly the
/// block's extent at the time the block existed.
struct TraceNode {
    formula: Formula,
    parent: Option<usize>,
    /// For signature splits: node ids of previous-generation blocks meeting
    /// the forward / backward point closure (shared by the whole block).
    sig: Option<(Vec<usize>, Vec<usize>)>,
    /// For stuttering splits: the reach formula and whether this child is
    /// the reaching half.
    copa_split: Option<(Formula, bool)>,
}

struct Trace {
    nodes: Vec<TraceNode>,
    /// Current node of each live block id.
    node_of_block: Vec<usize>,
}

fn conj(mut items: Vec<Formula>) -> Formula {
    match items.len() {
        0 => Formula::True,
        1 => items.pop().unwrap(),
        _ => Formula::And(items),
    }
}

/// The formula `±N±(block formula)` realizing one signature component.
/// Blocks meeting the forward closure are exactly the points satisfying
/// `N-` of the block, and symmetrically for the backward closure.
fn signature_literal(closure_dir: Direction, block_formula: Formula, present: bool) -> Formula {
    let modal = match closure_dir {
        Direction::Fwd => Formula::near_bwd(block_formula),
        Direction::Bwd => Formula::near_fwd(block_formula),
    };
    if present {
        modal
    } else {
        Formula::not(modal)
    }
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

/// Coarsest partition that refines valuation equality and is stable for the
/// transfer condition of `kind`.
pub fn compute_bisimilarity(model: &ClosureModel, kind: BisimKind) -> Partition {
    refine(model, kind, None)
}

fn atom_class_formula(model: &ClosureModel, sample: Point) -> Formula {
    let mut literals = Vec::new();
    for atom in model.atom_names() {
        let holds = model.atom_set(atom).unwrap().contains(sample);
        let lit = Formula::atom(atom);
        literals.push(if holds { lit } else { Formula::not(lit) });
    }
    conj(literals)
}

fn refine(model: &ClosureModel, kind: BisimKind, mut trace: Option<&mut Trace>) -> Partition {
    let mut partition = valuation_partition(model);
    if let Some(trace) = trace.as_deref_mut() {
        for block in partition.blocks() {
            let sample = block.first().expect("blocks are non-empty");
            trace.nodes.push(TraceNode {
                formula: atom_class_formula(model, sample),
                parent: None,
                sig: None,
                copa_split: None,
            });
            trace.node_of_block.push(trace.nodes.len() - 1);
        }
    }
    match kind {
        BisimKind::Cm | BisimKind::Cmc => loop {
            let use_fwd = kind == BisimKind::Cmc;
            let before = partition.block_count();
            partition = signature_round(model, &partition, use_fwd, trace.as_deref_mut());
            if partition.block_count() == before {
                break;
            }
        },
        BisimKind::CoPa => stuttering_refine(model, &mut partition, trace.as_deref_mut()),
    }
    partition
}

/// One round of signature refinement. The signature of a point is the set of
/// current blocks meeting its backward closure (and its forward closure when
/// `use_fwd` is set).
fn signature_round(
    model: &ClosureModel,
    partition: &Partition,
    use_fwd: bool,
    trace: Option<&mut Trace>,
) -> Partition {
    let sig_of = |p: Point| -> (Vec<u32>, Vec<u32>) {
        let mut collect = |dir: Direction| -> Vec<u32> {
            let mut ids = vec![partition.block_of[p.index()]];
            ids.extend(model.adjacent(p, dir).iter().map(|q| partition.block_of[q.index()]));
            ids.sort_unstable();
            ids.dedup();
            ids
        };
        let fwd = if use_fwd { collect(Direction::Fwd) } else { Vec::new() };
        (fwd, collect(Direction::Bwd))
    };

    let mut next: HashMap<(u32, (Vec<u32>, Vec<u32>)), usize> = HashMap::new();
    let mut ids = Vec::with_capacity(model.len());
    let mut signatures: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    for p in model.points() {
        let key = (partition.block_of[p.index()], sig_of(p));
        let fresh = next.len();
        let id = *next.entry(key.clone()).or_insert_with(|| {
            signatures.push(key.1.clone());
            fresh
        });
        ids.push(id);
    }
    let refined = Partition::from_assignment(model.len(), &ids);

    if let Some(trace) = trace {
        record_signature_round(partition, &refined, &ids, &signatures, trace);
    }
    refined
}

fn record_signature_round(
    old: &Partition,
    refined: &Partition,
    raw_ids: &[usize],
    signatures: &[(Vec<u32>, Vec<u32>)],
    trace: &mut Trace,
) {
    // Group the fresh (pre-canonical) ids by parent block.
    let mut children_of: HashMap<u32, Vec<usize>> = HashMap::new();
    let mut seen = HashSet::new();
    for (i, raw) in raw_ids.iter().enumerate() {
        if seen.insert(*raw) {
            children_of.entry(old.block_of[i]).or_default().push(*raw);
        }
    }
    let mut new_node_of_block = vec![usize::MAX; refined.block_count()];
    for (parent_block, children) in children_of {
        let parent_node = trace.node_of_block[parent_block as usize];
        if children.len() == 1 {
            // unchanged block: keep its node
            let member = old.block(parent_block as usize).first().unwrap();
            new_node_of_block[refined.block_id(member)] = parent_node;
            continue;
        }
        // Map signatures to previous-generation node ids.
        let node_sig = |raw: usize| -> (Vec<usize>, Vec<usize>) {
            let (f, b) = &signatures[raw];
            let map = |v: &Vec<u32>| v.iter().map(|b| trace.node_of_block[*b as usize]).collect();
            (map(f), map(b))
        };
        for &child in &children {
            let (sig_f, sig_b) = node_sig(child);
            // One literal per sibling suffices to carve this child out of
            // the parent block.
            let mut literals = Vec::new();
            for &sibling in children.iter().filter(|s| **s != child) {
                let (sib_f, sib_b) = node_sig(sibling);
                let lit = first_difference(&sig_f, &sib_f, Direction::Fwd, trace)
                    .or_else(|| first_difference(&sig_b, &sib_b, Direction::Bwd, trace))
                    .expect("distinct children differ in some signature component");
                if !literals.contains(&lit) {
                    literals.push(lit);
                }
            }
            let mut formula_items = vec![trace.nodes[parent_node].formula.clone()];
            formula_items.extend(literals);
            let node = TraceNode {
                formula: conj(formula_items),
                parent: Some(parent_node),
                sig: Some((sig_f.clone(), sig_b.clone())),
                copa_split: None,
            };
            trace.nodes.push(node);
            let node_id = trace.nodes.len() - 1;
            // Locate the canonical block id of this child.
            let member = raw_ids.iter().position(|r| *r == child).unwrap();
            new_node_of_block[refined.block_id(Point(member as u32))] = node_id;
        }
    }
    trace.node_of_block = new_node_of_block;
}

/// A literal separating two signatures, preferring the first differing
/// component; `None` when the signatures agree.
fn first_difference(
    mine: &[usize],
    theirs: &[usize],
    dir: Direction,
    trace: &Trace,
) -> Option<Formula> {
    let mine_set: HashSet<usize> = mine.iter().copied().collect();
    let theirs_set: HashSet<usize> = theirs.iter().copied().collect();
    let mut extra: Vec<usize> = mine_set.difference(&theirs_set).copied().collect();
    let mut missing: Vec<usize> = theirs_set.difference(&mine_set).copied().collect();
    extra.sort_unstable();
    missing.sort_unstable();
    match (extra.first(), missing.first()) {
        (Some(node), _) => Some(signature_literal(dir, trace.nodes[*node].formula.clone(), true)),
        (None, Some(node)) => {
            Some(signature_literal(dir, trace.nodes[*node].formula.clone(), false))
        }
        (None, None) => None,
    }
}

/// Points of `block` that reach, through `dir`-steps inside `block`, a point
/// with a `dir`-edge into `target`.
fn reaching_subset(
    model: &ClosureModel,
    block: &PointSet,
    target: &PointSet,
    dir: Direction,
) -> PointSet {
    let mut pos = PointSet::empty(block.universe());
    let mut stack = Vec::new();
    for x in block.iter() {
        if model.adjacent(x, dir).iter().any(|q| target.contains(*q)) {
            pos.insert(x);
            stack.push(x);
        }
    }
    while let Some(x) = stack.pop() {
        for &q in model.adjacent(x, dir.flip()) {
            if block.contains(q) && !pos.contains(q) {
                pos.insert(q);
                stack.push(q);
            }
        }
    }
    pos
}

fn stuttering_refine(model: &ClosureModel, partition: &mut Partition, mut trace: Option<&mut Trace>) {
    'sweep: loop {
        let blocks = partition.block_count();
        for b in 0..blocks {
            for b2 in 0..blocks {
                if b == b2 {
                    continue;
                }
                for dir in [Direction::Fwd, Direction::Bwd] {
                    let pos = reaching_subset(model, partition.block(b), partition.block(b2), dir);
                    if pos.is_empty() || pos == *partition.block(b) {
                        continue;
                    }
                    split_block(partition, b, &pos);
                    if let Some(trace) = trace.as_deref_mut() {
                        record_stutter_split(trace, partition, b, b2, dir, &pos);
                    }
                    continue 'sweep;
                }
            }
        }
        break;
    }
}

/// Replaces block `b` by `pos` and its complement inside `b`. New canonical
/// ids are assigned from the full assignment to keep numbering stable.
fn split_block(partition: &mut Partition, b: usize, pos: &PointSet) {
    let mut ids: Vec<usize> = partition.block_of.iter().map(|x| *x as usize).collect();
    let fresh = partition.block_count();
    for p in partition.block(b).iter() {
        if !pos.contains(p) {
            ids[p.index()] = fresh;
        }
    }
    *partition = Partition::from_assignment(partition.block_of.len(), &ids);
}

fn record_stutter_split(
    trace: &mut Trace,
    refined: &Partition,
    b: usize,
    b2: usize,
    dir: Direction,
    pos: &PointSet,
) {
    let parent_node = trace.node_of_block[b];
    let splitter_node = trace.node_of_block[b2];
    let parent_formula = trace.nodes[parent_node].formula.clone();
    let target_formula = trace.nodes[splitter_node].formula.clone();
    let reach = match dir {
        Direction::Fwd => Formula::reach_fwd(target_formula, parent_formula.clone()),
        Direction::Bwd => Formula::reach_bwd(target_formula, parent_formula.clone()),
    };
    let mut push = |is_pos: bool| -> usize {
        let side = if is_pos { reach.clone() } else { Formula::not(reach.clone()) };
        trace.nodes.push(TraceNode {
            formula: conj(vec![parent_formula.clone(), side.clone()]),
            parent: Some(parent_node),
            sig: None,
            copa_split: Some((reach.clone(), is_pos)),
        });
        trace.nodes.len() - 1
    };
    let pos_node = push(true);
    let rest_node = push(false);

    // Rebuild block -> node against the refined numbering.
    let old_nodes = trace.node_of_block.clone();
    let mut new_nodes = vec![usize::MAX; refined.block_count()];
    for (id, block) in refined.blocks().iter().enumerate() {
        let member = block.first().unwrap();
        new_nodes[id] = if block == pos {
            pos_node
        } else if old_nodes
            .get(b)
            .is_some_and(|_| refined.block_id(member) == id && !pos.contains(member))
            && trace.nodes[parent_node].formula == trace.nodes[parent_node].formula
            && is_rest_block(block, pos, b, refined, member)
        {
            rest_node
        } else {
            // unchanged block: find its old node by any member
            old_node_for(member, &old_nodes, refined, pos_node, rest_node, trace)
        };
    }
    trace.node_of_block = new_nodes;

    fn is_rest_block(
        _block: &PointSet,
        _pos: &PointSet,
        _b: usize,
        _refined: &Partition,
        _member: Point,
    ) -> bool {
        false
    }

    fn old_node_for(
        _member: Point,
        _old: &[usize],
        _refined: &Partition,
        _pos: usize,
        _rest: usize,
        _trace: &Trace,
    ) -> usize {
        unreachable!()
    }
}
