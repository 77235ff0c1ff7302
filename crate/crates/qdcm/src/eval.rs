//! Set semantics of formulas over a closure model.
//!
//! Denotations are computed bottom-up. `N+`/`N-` are one closure step;
//! `reach±` is a least fixpoint computed by backward worklist propagation;
//! `rho±` is reachability with the start point exempt from the path
//! condition; `surr` is the standard derived surround operator.

use std::collections::HashMap;
use std::collections::VecDeque;

use crate::bisim::{compute_bisimilarity, BisimKind};
use crate::error::Result;
use crate::formula::Formula;
use crate::space::{ClosureModel, Direction, Point, PointSet};

/// The three logic fragments; each is characterized by one bisimilarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Logic {
    Iml,
    Imlc,
    Icrl,
}

impl Logic {
    pub fn kind(self) -> BisimKind {
        match self {
            Logic::Iml => BisimKind::Cm,
            Logic::Imlc => BisimKind::Cmc,
            Logic::Icrl => BisimKind::CoPa,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum WorklistOrder {
    Fifo,
    Lifo,
}

/// Least fixpoint `S = goal ∪ (via ∩ {x | closure(x, dir) meets S})`.
///
/// Membership in `S` means: some `dir`-path from `x` ends in `goal` with all
/// earlier points (including `x`) in `via`, or `x` is already in `goal`.
pub(crate) fn reach_set(
    model: &ClosureModel,
    goal: &PointSet,
    via: &PointSet,
    dir: Direction,
    order: WorklistOrder,
) -> PointSet {
    let mut set = goal.clone();
    let mut work: VecDeque<Point> = goal.iter().collect();
    // New members x are found one step before a member: an edge x -> s for
    // Fwd, an edge s -> x for Bwd.
    let back = dir.flip();
    while let Some(s) = match order {
        WorklistOrder::Fifo => work.pop_front(),
        WorklistOrder::Lifo => work.pop_back(),
    } {
        for &x in model.adjacent(s, back) {
            if via.contains(x) && !set.contains(x) {
                set.insert(x);
                work.push_back(x);
            }
        }
    }
    set
}

/// One-step predecessors of `set` in `dir`, including `set` itself.
fn pre_step(model: &ClosureModel, set: &PointSet, dir: Direction) -> PointSet {
    let mut out = set.clone();
    for s in set.iter() {
        for &x in model.adjacent(s, dir.flip()) {
            out.insert(x);
        }
    }
    out
}

struct Evaluator<'m> {
    model: &'m ClosureModel,
    cache: HashMap<Formula, PointSet>,
    undeclared: Vec<String>,
}

impl<'m> Evaluator<'m> {
    fn eval(&mut self, f: &Formula) -> PointSet {
        if let Some(hit) = self.cache.get(f) {
            return hit.clone();
        }
        let model = self.model;
        let set = match f {
            Formula::True => model.full_set(),
            Formula::False => model.empty_set(),
            Formula::Atom(name) => match model.atom_set(name) {
                Some(set) => set.clone(),
                None => {
                    if !self.undeclared.iter().any(|n| n == name) {
                        self.undeclared.push(name.clone());
                    }
                    model.empty_set()
                }
            },
            Formula::Not(inner) => self.eval(inner).complement(),
            Formula::And(items) => {
                let mut acc = model.full_set();
                for item in items {
                    acc.intersect_with(&self.eval(item));
                }
                acc
            }
            Formula::Or(items) => {
                let mut acc = model.empty_set();
                for item in items {
                    acc.union_with(&self.eval(item));
                }
                acc
            }
            Formula::NearFwd(inner) => {
                let s = self.eval(inner);
                model.closure_unchecked(&s, Direction::Fwd)
            }
            Formula::NearBwd(inner) => {
                let s = self.eval(inner);
                model.closure_unchecked(&s, Direction::Bwd)
            }
            Formula::ReachFwd(goal, via) => {
                let (goal, via) = (self.eval(goal), self.eval(via));
                reach_set(model, &goal, &via, Direction::Fwd, WorklistOrder::Fifo)
            }
            Formula::ReachBwd(goal, via) => {
                let (goal, via) = (self.eval(goal), self.eval(via));
                reach_set(model, &goal, &via, Direction::Bwd, WorklistOrder::Fifo)
            }
            Formula::RhoFwd(goal, via) => self.rho(goal, via, Direction::Fwd),
            Formula::RhoBwd(goal, via) => self.rho(goal, via, Direction::Bwd),
            Formula::Surround(inner, border) => {
                // inner ∧ ¬rho(¬(inner ∨ border))[¬border]
                let inner_set = self.eval(inner);
                let border_set = self.eval(border);
                let escape = inner_set.union(&border_set).complement();
                let lax = border_set.complement();
                let reach = reach_set(model, &escape, &lax, Direction::Fwd, WorklistOrder::Fifo);
                let rho = pre_step(model, &reach, Direction::Fwd);
                inner_set.intersection(&rho.complement())
            }
        };
        self.cache.insert(f.clone(), set.clone());
        set
    }

    /// `goal ∪ {x | a dir-step of x enters the reach set}`: the start point
    /// itself is exempt from the `via` condition.
    fn rho(&mut self, goal: &Formula, via: &Formula, dir: Direction) -> PointSet {
        let (goal, via) = (self.eval(goal), self.eval(via));
        let reach = reach_set(self.model, &goal, &via, dir, WorklistOrder::Fifo);
        let mut out = pre_step(self.model, &reach, dir);
        out.union_with(&goal);
        out
    }
}

/// Denotation of `f` in `model`, with the names of undeclared atoms that were
/// evaluated as the empty set.
pub fn eval_with_warnings(model: &ClosureModel, f: &Formula) -> (PointSet, Vec<String>) {
    let mut ev = Evaluator { model, cache: HashMap::new(), undeclared: Vec::new() };
    let set = ev.eval(f);
    (set, ev.undeclared)
}

/// Denotation of `f` in `model`. Undeclared atoms denote the empty set.
pub fn eval(model: &ClosureModel, f: &Formula) -> PointSet {
    eval_with_warnings(model, f).0
}

pub fn satisfies(model: &ClosureModel, x: Point, f: &Formula) -> Result<bool> {
    model.point_closure(x, Direction::Fwd)?; // validates x
    Ok(eval(model, f).contains(x))
}

/// Whether `x` and `y` satisfy the same formulas of `logic`, decided through
/// the matching bisimilarity partition.
pub fn logic_equivalent(model: &ClosureModel, x: Point, y: Point, logic: Logic) -> Result<bool> {
    model.point_closure(x, Direction::Fwd)?;
    model.point_closure(y, Direction::Fwd)?;
    let partition = compute_bisimilarity(model, logic.kind());
    Ok(partition.block_id(x) == partition.block_id(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::io::load_model_str;

    fn grid4x4() -> ClosureModel {
        load_model_str(include_str!("../../../models/grid4x4.json")).unwrap()
    }

    fn fork9() -> ClosureModel {
        load_model_str(include_str!("../../../models/fork9.json")).unwrap()
    }

    fn names(model: &ClosureModel, set: &PointSet) -> Vec<String> {
        set.iter().map(|p| model.name(p).to_string()).collect()
    }

    #[test]
    fn near_sets_on_grid() {
        let m = grid4x4();
        let fwd = eval(&m, &parse("N+ green").unwrap());
        assert_eq!(names(&m, &fwd), ["3", "4", "6", "7", "8", "11"]);
        let bwd = eval(&m, &parse("N- blue").unwrap());
        assert_eq!(names(&m, &bwd), ["5", "9", "10", "13", "14", "15"]);
    }

    #[test]
    fn reach_sets_on_fork() {
        let m = fork9();
        let cases = [
            ("reach+ red [red]", vec!["x1", "x2", "x6", "x7"]),
            ("reach+ red [blue]", vec!["x1", "x2", "x4", "x5", "x6", "x7"]),
            (
                "reach+ (reach+ red [blue]) [!blue]",
                vec!["x1", "x2", "x3", "x4", "x5", "x6", "x7"],
            ),
            ("!(reach+ (reach+ red [blue]) [!blue])", vec!["x8", "x9"]),
            ("reach- red [blue]", vec!["x1", "x2", "x6", "x7", "x8", "x9"]),
        ];
        for (text, expected) in cases {
            let got = eval(&m, &parse(text).unwrap());
            assert_eq!(names(&m, &got), expected, "for {text}");
        }
    }

    #[test]
    fn near_blue_on_sources_sinks() {
        let m = load_model_str(include_str!("../../../models/sources_sinks.json")).unwrap();
        let set = eval(&m, &parse("N+ blue").unwrap());
        assert!(set.contains(m.point("v2").unwrap()));
        assert!(!set.contains(m.point("v1").unwrap()));
        assert!(!set.contains(m.point("v3").unwrap()));
    }

    #[test]
    fn reach_with_false_via_is_goal() {
        let m = fork9();
        let goal = eval(&m, &parse("red | green").unwrap());
        let reach = eval(&m, &parse("reach+ (red | green) [false]").unwrap());
        assert_eq!(reach, goal);
    }

    #[test]
    fn satisfies_examples() {
        let m = load_model_str(include_str!("../../../models/two_chains.json")).unwrap();
        let u = m.point("u").unwrap();
        let x = m.point("x").unwrap();
        let near_green = parse("N- green").unwrap();
        assert!(satisfies(&m, u, &near_green).unwrap());
        assert!(!satisfies(&m, x, &near_green).unwrap());
        assert!(satisfies(&m, x, &Formula::True).unwrap());
    }

    #[test]
    fn undeclared_atom_warns_and_is_empty() {
        let m = fork9();
        let (set, warned) = eval_with_warnings(&m, &parse("mystery | red").unwrap());
        assert_eq!(set, eval(&m, &parse("red").unwrap()));
        assert_eq!(warned, ["mystery"]);
    }

    #[test]
    fn worklist_order_does_not_matter() {
        for model in [grid4x4(), fork9()] {
            for dir in [Direction::Fwd, Direction::Bwd] {
                let goal = eval(&model, &parse("red").unwrap());
                let via = eval(&model, &parse("blue | green").unwrap());
                let fifo = reach_set(&model, &goal, &via, dir, WorklistOrder::Fifo);
                let lifo = reach_set(&model, &goal, &via, dir, WorklistOrder::Lifo);
                assert_eq!(fifo, lifo);
            }
        }
    }

    #[test]
    fn double_negation_is_identity() {
        let m = fork9();
        let f = parse("reach+ red [blue] & !green").unwrap();
        let nn = Formula::not(Formula::not(f.clone()));
        assert_eq!(eval(&m, &f), eval(&m, &nn));
    }
}
