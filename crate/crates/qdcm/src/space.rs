//! Finite quasi-discrete closure models.
//!
//! A model is a finite set of named points, a generating binary relation
//! (stored as forward and backward adjacency), and a valuation assigning to
//! each atomic proposition the set of points where it holds. The closure of a
//! set `A` in direction `d` is `A` together with every point one `d`-edge away
//! from `A`; the interior is its De Morgan dual. Closure is reflexive by
//! definition, so the relation itself is stored without self-edges.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rng::Lcg;

/// Dense index of a point inside one model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(pub(crate) u32);

impl Point {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Which of the two closure operators to use: `Fwd` follows the generating
/// relation, `Bwd` its converse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Fwd,
    Bwd,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Fwd => Direction::Bwd,
            Direction::Bwd => Direction::Fwd,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Fwd => write!(f, "fwd"),
            Direction::Bwd => write!(f, "bwd"),
        }
    }
}

const WORD_BITS: usize = 64;

/// A subset of a model's points, as a fixed-width bitset over dense indices.
///
/// Unused bits of the last word are kept at zero, so equality and hashing are
/// structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    len: usize,
    words: Vec<u64>,
}

impl PointSet {
    pub fn empty(len: usize) -> Self {
        PointSet { len, words: vec![0; len.div_ceil(WORD_BITS)] }
    }

    pub fn full(len: usize) -> Self {
        let mut s = PointSet::empty(len);
        for w in &mut s.words {
            *w = !0;
        }
        s.mask_tail();
        s
    }

    fn mask_tail(&mut self) {
        let tail = self.len % WORD_BITS;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }

    /// Number of points the set ranges over (the model size, not the
    /// cardinality).
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, p: Point) {
        debug_assert!(p.index() < self.len);
        self.words[p.index() / WORD_BITS] |= 1 << (p.index() % WORD_BITS);
    }

    pub fn remove(&mut self, p: Point) {
        debug_assert!(p.index() < self.len);
        self.words[p.index() / WORD_BITS] &= !(1 << (p.index() % WORD_BITS));
    }

    pub fn contains(&self, p: Point) -> bool {
        p.index() < self.len
            && self.words[p.index() / WORD_BITS] >> (p.index() % WORD_BITS) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &PointSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &PointSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &PointSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn complement(&self) -> PointSet {
        let mut s = self.clone();
        for w in &mut s.words {
            *w = !*w;
        }
        s.mask_tail();
        s
    }

    pub fn is_subset_of(&self, other: &PointSet) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &PointSet) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(Point((wi * WORD_BITS + b) as u32))
                }
            })
        })
    }

    pub fn first(&self) -> Option<Point> {
        self.iter().next()
    }

    pub fn from_points(len: usize, points: impl IntoIterator<Item = Point>) -> Self {
        let mut s = PointSet::empty(len);
        for p in points {
            s.insert(p);
        }
        s
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|p| p.index())).finish()
    }
}

/// Grid provenance attached by image ingestion; lets results be rendered back
/// to a pixmap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMeta {
    pub width: usize,
    pub height: usize,
}

/// A finite quasi-discrete closure model: points, generating relation and
/// valuation. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ClosureModel {
    names: Vec<String>,
    index: HashMap<String, Point>,
    fwd: Vec<Vec<Point>>,
    bwd: Vec<Vec<Point>>,
    atoms: BTreeMap<String, PointSet>,
    grid: Option<GridMeta>,
}

impl ClosureModel {
    /// Builds a model from named points, edges and a valuation.
    ///
    /// Duplicate edges and self-edges are dropped (closure is reflexive and
    /// set-valued either way). With `symmetric`, every edge is added in both
    /// directions. Unknown names in edges or atom lists are rejected.
    pub fn build(
        points: Vec<String>,
        edges: &[(String, String)],
        symmetric: bool,
        atoms: &[(String, Vec<String>)],
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(points.len());
        for (i, name) in points.iter().enumerate() {
            if index.insert(name.clone(), Point(i as u32)).is_some() {
                return Err(Error::DuplicatePoint(name.clone()));
            }
        }
        let n = points.len();
        let look = |name: &String| -> Result<Point> {
            index.get(name).copied().ok_or_else(|| Error::UnknownPoint(name.clone()))
        };

        let mut fwd = vec![Vec::new(); n];
        let mut bwd = vec![Vec::new(); n];
        let mut add = |from: Point, to: Point, fwd: &mut Vec<Vec<Point>>, bwd: &mut Vec<Vec<Point>>| {
            if from != to {
                fwd[from.index()].push(to);
                bwd[to.index()].push(from);
            }
        };
        for (a, b) in edges {
            let (pa, pb) = (look(a)?, look(b)?);
            add(pa, pb, &mut fwd, &mut bwd);
            if symmetric {
                add(pb, pa, &mut fwd, &mut bwd);
            }
        }
        for adj in fwd.iter_mut().chain(bwd.iter_mut()) {
            adj.sort_unstable();
            adj.dedup();
        }

        let mut valuation = BTreeMap::new();
        for (atom, members) in atoms {
            let set = valuation.entry(atom.clone()).or_insert_with(|| PointSet::empty(n));
            for name in members {
                set.insert(look(name)?);
            }
        }

        Ok(ClosureModel { names: points, index, fwd, bwd, atoms: valuation, grid: None })
    }

    pub(crate) fn set_grid(&mut self, grid: GridMeta) {
        self.grid = Some(grid);
    }

    pub fn grid(&self) -> Option<&GridMeta> {
        self.grid.as_ref()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.names.len()).map(|i| Point(i as u32))
    }

    pub fn point(&self, name: &str) -> Result<Point> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    pub fn name(&self, p: Point) -> &str {
        &self.names[p.index()]
    }

    pub fn point_names(&self) -> &[String] {
        &self.names
    }

    /// Successors (`Fwd`) or predecessors (`Bwd`) of `p` under the generating
    /// relation, without the reflexive step.
    pub fn adjacent(&self, p: Point, dir: Direction) -> &[Point] {
        match dir {
            Direction::Fwd => &self.fwd[p.index()],
            Direction::Bwd => &self.bwd[p.index()],
        }
    }

    /// Edges of the generating relation, in dense-index order.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.points().flat_map(move |p| self.fwd[p.index()].iter().map(move |q| (p, *q)))
    }

    pub fn atom_names(&self) -> impl Iterator<Item = &str> {
        self.atoms.keys().map(|s| s.as_str())
    }

    /// Denotation of an atom; `None` when the atom is not declared.
    pub fn atom_set(&self, atom: &str) -> Option<&PointSet> {
        self.atoms.get(atom)
    }

    /// Sorted names of the atoms holding at `p`.
    pub fn atoms_of(&self, p: Point) -> Vec<&str> {
        self.atoms
            .iter()
            .filter(|(_, set)| set.contains(p))
            .map(|(name, _)| name.as_str())
            .collect()
    }

    pub fn empty_set(&self) -> PointSet {
        PointSet::empty(self.len())
    }

    pub fn full_set(&self) -> PointSet {
        PointSet::full(self.len())
    }

    pub fn set_of_names(&self, names: &[&str]) -> Result<PointSet> {
        let mut set = self.empty_set();
        for name in names {
            set.insert(self.point(name)?);
        }
        Ok(set)
    }

    fn check_set(&self, set: &PointSet) -> Result<()> {
        if set.universe() != self.len() {
            return Err(Error::SetSizeMismatch { set: set.universe(), model: self.len() });
        }
        Ok(())
    }

    fn check_point(&self, p: Point) -> Result<()> {
        if p.index() >= self.len() {
            return Err(Error::PointOutOfRange { index: p.index(), size: self.len() });
        }
        Ok(())
    }

    /// Closure of `set`: the set itself plus every point one `dir`-edge away
    /// from it.
    pub fn closure(&self, set: &PointSet, dir: Direction) -> Result<PointSet> {
        self.check_set(set)?;
        Ok(self.closure_unchecked(set, dir))
    }

    pub(crate) fn closure_unchecked(&self, set: &PointSet, dir: Direction) -> PointSet {
        let mut out = set.clone();
        for p in set.iter() {
            for q in self.adjacent(p, dir) {
                out.insert(*q);
            }
        }
        out
    }

    /// Interior of `set`: the dual `complement(closure(complement(set)))`.
    pub fn interior(&self, set: &PointSet, dir: Direction) -> Result<PointSet> {
        self.check_set(set)?;
        Ok(self.closure_unchecked(&set.complement(), dir).complement())
    }

    /// Closure of a single point: the point plus its `dir`-neighbours.
    pub fn point_closure(&self, p: Point, dir: Direction) -> Result<PointSet> {
        self.check_point(p)?;
        Ok(self.point_closure_unchecked(p, dir))
    }

    pub(crate) fn point_closure_unchecked(&self, p: Point, dir: Direction) -> PointSet {
        let mut out = self.empty_set();
        out.insert(p);
        for q in self.adjacent(p, dir) {
            out.insert(*q);
        }
        out
    }

    /// Whether `x` lies in the forward closure of `A`.
    ///
    /// Checked through the converse characterization: `x` is in the forward
    /// closure of `A` exactly when the backward closure of `x` meets `A`.
    pub fn membership_characterization(&self, x: Point, set: &PointSet) -> Result<bool> {
        self.check_point(x)?;
        self.check_set(set)?;
        let via_converse = self.point_closure_unchecked(x, Direction::Bwd).intersects(set);
        debug_assert_eq!(via_converse, self.closure_unchecked(set, Direction::Fwd).contains(x));
        Ok(via_converse)
    }

    /// Samples random subsets and re-checks the closure axioms on them.
    ///
    /// A relation-induced closure satisfies them by construction, so any
    /// violation reported here is an implementation bug.
    pub fn check_closure_axioms(&self, samples: usize, seed: u64) -> AxiomReport {
        let mut rng = Lcg::new(seed);
        let mut violations = Vec::new();
        let random_set = |rng: &mut Lcg| {
            let mut s = self.empty_set();
            for p in self.points() {
                if rng.chance(1, 2) {
                    s.insert(p);
                }
            }
            s
        };
        for dir in [Direction::Fwd, Direction::Bwd] {
            if !self.closure_unchecked(&self.empty_set(), dir).is_empty() {
                violations.push(format!("closure({dir}) of the empty set is non-empty"));
            }
            for round in 0..samples {
                let a1 = random_set(&mut rng);
                let a2 = random_set(&mut rng);
                let c1 = self.closure_unchecked(&a1, dir);
                if !a1.is_subset_of(&c1) {
                    violations.push(format!("sample {round}: set not contained in its {dir} closure"));
                }
                let both = self.closure_unchecked(&a1.union(&a2), dir);
                if both != c1.union(&self.closure_unchecked(&a2, dir)) {
                    violations.push(format!("sample {round}: {dir} closure is not additive"));
                }
                let mut pointwise = self.empty_set();
                for p in a1.iter() {
                    pointwise.union_with(&self.point_closure_unchecked(p, dir));
                }
                if pointwise != c1 {
                    violations.push(format!(
                        "sample {round}: {dir} closure differs from the union of point closures"
                    ));
                }
            }
        }
        AxiomReport { samples, violations }
    }
}

/// Outcome of [`ClosureModel::check_closure_axioms`].
#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub samples: usize,
    pub violations: Vec<String>,
}

impl AxiomReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::load_model_str;

    fn chain3() -> ClosureModel {
        ClosureModel::build(
            vec!["x".into(), "y".into(), "z".into()],
            &[("x".into(), "y".into()), ("y".into(), "z".into())],
            false,
            &[],
        )
        .unwrap()
    }

    // Fan-out/fan-in components: x1->y1 | x2->y2,z2 | x3->y3 | t1,u1->v1 |
    // t2,u2->v2 | t3->v3, with red sources/sinks, blue and green leaves.
    pub(crate) fn sources_sinks() -> ClosureModel {
        load_model_str(include_str!("../../../models/sources_sinks.json")).unwrap()
    }

    #[test]
    fn closure_of_blue_adds_v2() {
        let m = sources_sinks();
        let blue = m.atom_set("blue").unwrap().clone();
        let closed = m.closure(&blue, Direction::Fwd).unwrap();
        let expected = m.set_of_names(&["y1", "y2", "z2", "t2", "v2"]).unwrap();
        assert_eq!(closed, expected);
    }

    #[test]
    fn closure_of_empty_is_empty() {
        let m = chain3();
        for dir in [Direction::Fwd, Direction::Bwd] {
            assert!(m.closure(&m.empty_set(), dir).unwrap().is_empty());
        }
    }

    #[test]
    fn backward_closure_follows_converse_edges() {
        let m = chain3();
        let a = m.set_of_names(&["z"]).unwrap();
        let closed = m.closure(&a, Direction::Bwd).unwrap();
        assert_eq!(closed, m.set_of_names(&["z", "y"]).unwrap());
    }

    #[test]
    fn interior_of_everything_is_everything() {
        let m = sources_sinks();
        for dir in [Direction::Fwd, Direction::Bwd] {
            assert_eq!(m.interior(&m.full_set(), dir).unwrap(), m.full_set());
        }
    }

    /// Independent route for the interior: drop the points of `A` that have a
    /// `dir`-predecessor outside `A`.
    fn interior_by_scan(m: &ClosureModel, a: &PointSet, dir: Direction) -> PointSet {
        let mut out = a.clone();
        for p in a.iter() {
            if m.adjacent(p, dir.flip())
                .iter()
                .chain(std::iter::empty())
                .any(|q| !a.contains(*q))
            {
                // A point q outside A with an edge q->p (in dir) pulls p out
                // of the interior. adjacent(p, flip) lists exactly those q.
                out.remove(p);
            }
        }
        out
    }

    #[test]
    fn interior_matches_definitional_scan_on_chain() {
        let m = chain3();
        let a = m.set_of_names(&["x", "y"]).unwrap();
        let by_duality = m.interior(&a, Direction::Fwd).unwrap();
        assert_eq!(by_duality, interior_by_scan(&m, &a, Direction::Fwd));
        // x has no predecessor and y's only predecessor is x, inside A.
        assert_eq!(by_duality, m.set_of_names(&["x", "y"]).unwrap());
    }

    #[test]
    fn interior_matches_definitional_scan_on_fan_component() {
        let m = sources_sinks();
        let a = m.set_of_names(&["x2", "y2", "z2"]).unwrap();
        let by_duality = m.interior(&a, Direction::Bwd).unwrap();
        assert_eq!(by_duality, interior_by_scan(&m, &a, Direction::Bwd));
        // The component is closed under successors, so nothing is dropped.
        assert_eq!(by_duality, a);
    }

    #[test]
    fn point_closures_on_chain() {
        let m = chain3();
        let x = m.point("x").unwrap();
        let z = m.point("z").unwrap();
        assert_eq!(m.point_closure(x, Direction::Fwd).unwrap(), m.set_of_names(&["x", "y"]).unwrap());
        assert_eq!(m.point_closure(z, Direction::Fwd).unwrap(), m.set_of_names(&["z"]).unwrap());
        assert_eq!(m.point_closure(z, Direction::Bwd).unwrap(), m.set_of_names(&["z", "y"]).unwrap());
    }

    #[test]
    fn membership_examples() {
        let m = ClosureModel::build(
            vec!["x".into(), "y".into(), "z".into(), "u".into(), "v".into()],
            &[("x".into(), "y".into()), ("y".into(), "z".into()), ("u".into(), "v".into())],
            false,
            &[],
        )
        .unwrap();
        let v = m.point("v").unwrap();
        let z = m.point("z").unwrap();
        let u_set = m.set_of_names(&["u"]).unwrap();
        let x_set = m.set_of_names(&["x"]).unwrap();
        assert!(m.membership_characterization(v, &u_set).unwrap());
        assert!(!m.membership_characterization(z, &x_set).unwrap());
        assert!(!m.membership_characterization(v, &m.empty_set()).unwrap());
    }

    #[test]
    fn axioms_hold_on_samples() {
        assert!(sources_sinks().check_closure_axioms(64, 1).is_ok());
        let loop1 = ClosureModel::build(
            vec!["p".into()],
            &[("p".into(), "p".into())],
            false,
            &[],
        )
        .unwrap();
        let report = loop1.check_closure_axioms(8, 2);
        assert!(report.is_ok());
        let p = loop1.set_of_names(&["p"]).unwrap();
        assert_eq!(loop1.closure(&p, Direction::Fwd).unwrap(), p);
    }

    #[test]
    fn unknown_names_are_rejected() {
        let err = ClosureModel::build(
            vec!["a".into()],
            &[("a".into(), "b".into())],
            false,
            &[],
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownPoint(name) if name == "b"));
        let m = chain3();
        assert!(m.point("w").is_err());
        let foreign = PointSet::empty(17);
        assert!(m.closure(&foreign, Direction::Fwd).is_err());
    }

    #[test]
    fn duplicate_edges_are_collapsed() {
        let m = ClosureModel::build(
            vec!["a".into(), "b".into()],
            &[("a".into(), "b".into()), ("a".into(), "b".into())],
            false,
            &[],
        )
        .unwrap();
        assert_eq!(m.adjacent(m.point("a").unwrap(), Direction::Fwd).len(), 1);
    }
}
