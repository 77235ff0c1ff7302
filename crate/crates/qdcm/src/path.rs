//! Finite forward/backward paths and path compatibility.
//!
//! A path is a non-empty point sequence where every step stays inside the
//! point closure of its predecessor: repeat the point or follow an edge in
//! the path's direction. Two paths are compatible with respect to a pair
//! relation when total monotone surjections onto a common zone range `1..=N`
//! align them so that co-zoned points are always related; `compatible`
//! decides this by dynamic programming over zone boundaries and returns a
//! witness with the minimal `N`.

use crate::error::{Error, Result};
use crate::space::{ClosureModel, Direction, Point};

/// Paths are index sequences; keep index arithmetic inside `i32` range.
pub const MAX_PATH_LEN: usize = (i32::MAX - 1) as usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    dir: Direction,
    seq: Vec<Point>,
}

impl Path {
    pub fn dir(&self) -> Direction {
        self.dir
    }

    /// Number of steps; one less than the number of sequence entries.
    pub fn len(&self) -> usize {
        self.seq.len() - 1
    }

    pub fn points(&self) -> &[Point] {
        &self.seq
    }

    pub fn first(&self) -> Point {
        self.seq[0]
    }

    pub fn last(&self) -> Point {
        *self.seq.last().unwrap()
    }
}

/// Validates `seq` as a path in `dir`; reports the first offending step.
pub fn make_path(model: &ClosureModel, dir: Direction, seq: Vec<Point>) -> Result<Path> {
    if seq.is_empty() {
        return Err(Error::EmptyPath);
    }
    if seq.len() - 1 > MAX_PATH_LEN {
        return Err(Error::PathTooLong(seq.len() - 1));
    }
    for (i, p) in seq.iter().enumerate() {
        if p.index() >= model.len() {
            return Err(Error::PointOutOfRange { index: p.index(), size: model.len() });
        }
        if i > 0 {
            let prev = seq[i - 1];
            let ok = *p == prev || model.adjacent(prev, dir).binary_search(p).is_ok();
            if !ok {
                return Err(Error::InvalidStep(i));
            }
        }
    }
    Ok(Path { dir, seq })
}

/// Parses the textual path syntax `fwd: x1 x1 x2` / `bwd: z y x`.
pub fn parse_path(model: &ClosureModel, text: &str) -> Result<Path> {
    let (dir_word, rest) = text
        .split_once(':')
        .ok_or_else(|| Error::Syntax { line: 1, col: 1, msg: "expected `fwd:` or `bwd:` prefix".into() })?;
    let dir = match dir_word.trim() {
        "fwd" => Direction::Fwd,
        "bwd" => Direction::Bwd,
        other => {
            return Err(Error::Syntax {
                line: 1,
                col: 1,
                msg: format!("unknown direction `{other}`"),
            })
        }
    };
    let mut seq = Vec::new();
    for name in rest.split_whitespace() {
        seq.push(model.point(name)?);
    }
    make_path(model, dir, seq)
}

pub fn concat(p1: &Path, p2: &Path) -> Result<Path> {
    if p1.dir != p2.dir {
        return Err(Error::DirectionMismatch);
    }
    if p1.last() != p2.first() {
        return Err(Error::EndpointMismatch(
            format!("#{}", p1.last().index()),
            format!("#{}", p2.first().index()),
        ));
    }
    if p1.len() + p2.len() > MAX_PATH_LEN {
        return Err(Error::PathTooLong(p1.len() + p2.len()));
    }
    let mut seq = p1.seq.clone();
    seq.extend_from_slice(&p2.seq[1..]);
    Ok(Path { dir: p1.dir, seq })
}

/// Drops the first `k` steps: `(x_{j+k})` for `j` in `0..=len-k`.
pub fn shift(p: &Path, k: usize) -> Result<Path> {
    if k > p.len() {
        return Err(Error::IndexOutOfRange { index: k, max: p.len() });
    }
    Ok(Path { dir: p.dir, seq: p.seq[k..].to_vec() })
}

/// Restricts to the first `k` steps: indices `0..=k`.
pub fn prefix(p: &Path, k: usize) -> Result<Path> {
    if k > p.len() {
        return Err(Error::IndexOutOfRange { index: k, max: p.len() });
    }
    Ok(Path { dir: p.dir, seq: p.seq[..=k].to_vec() })
}

/// Matching functions `f`, `g` onto `1..=zone_count`, total, monotone and
/// surjective, with related points wherever `f(i) = g(j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingWitness {
    pub zone_count: usize,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
}

/// Decides compatibility of `p1` and `p2` with respect to the symmetric pair
/// predicate `rel`, returning a minimal-zone-count witness. Ties are broken
/// towards the earliest zone boundaries in `p1`, then in `p2`.
pub fn compatible(
    p1: &Path,
    p2: &Path,
    rel: impl Fn(Point, Point) -> bool,
) -> Result<Option<MatchingWitness>> {
    if p1.dir != p2.dir {
        return Err(Error::DirectionMismatch);
    }
    let (a, b) = (&p1.seq, &p2.seq);
    let (n, m) = (a.len(), b.len());
    let related = |i: usize, j: usize| rel(a[i], b[j]);

    // run[i][j]: number of consecutive related cells in row i starting at
    // column j.
    let mut run = vec![vec![0usize; m + 1]; n];
    for i in 0..n {
        for j in (0..m).rev() {
            run[i][j] = if related(i, j) { run[i][j + 1] + 1 } else { 0 };
        }
    }

    const INF: usize = usize::MAX;
    // suffix[i][j]: minimal zones decomposing a[i..] x b[j..]; the exhausted
    // corner costs zero, one-sided exhaustion is impossible.
    let mut suffix = vec![vec![INF; m + 1]; n + 1];
    suffix[n][m] = 0;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            // One zone [i..=i2] x [j..=j2]; width = how far j2 may go while
            // every row i..=i2 stays related.
            let mut width = run[i][j];
            let mut best = INF;
            for i2 in i..n {
                width = width.min(run[i2][j]);
                if width == 0 {
                    break;
                }
                for j2 in j..j + width {
                    let rest = suffix[i2 + 1][j2 + 1];
                    if rest != INF {
                        best = best.min(rest + 1);
                    }
                }
            }
            suffix[i][j] = best;
        }
    }

    if suffix[0][0] == INF {
        return Ok(None);
    }

    let zone_count = suffix[0][0];
    let mut f = vec![0usize; n];
    let mut g = vec![0usize; m];
    let (mut i, mut j) = (0usize, 0usize);
    for zone in 1..=zone_count {
        let remaining = zone_count - zone;
        let mut chosen = None;
        let mut width = run[i][j];
        'pick: for i2 in i..n {
            width = width.min(run[i2][j]);
            if width == 0 {
                break;
            }
            for j2 in j..j + width {
                if suffix[i2 + 1][j2 + 1] == remaining {
                    chosen = Some((i2, j2));
                    break 'pick;
                }
            }
        }
        let (i2, j2) = chosen.expect("reconstruction follows the suffix table");
        for fi in f.iter_mut().take(i2 + 1).skip(i) {
            *fi = zone;
        }
        for gj in g.iter_mut().take(j2 + 1).skip(j) {
            *gj = zone;
        }
        i = i2 + 1;
        j = j2 + 1;
    }
    Ok(Some(MatchingWitness { zone_count, f, g }))
}

/// Number of zones of `path` under `block_of`: maximal runs of consecutive
/// points in one block, counted by the tail recursion
/// `zones((x)) = 1`, `zones = zones(tail) (+1 on a block change)`.
pub fn zones(path: &Path, block_of: impl Fn(Point) -> usize) -> usize {
    let mut count = 1;
    for pair in path.seq.windows(2) {
        if block_of(pair[0]) != block_of(pair[1]) {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::load_model_str;

    fn chain3() -> ClosureModel {
        load_model_str(include_str!("../../../models/chain3.json")).unwrap()
    }

    fn pts(model: &ClosureModel, names: &[&str]) -> Vec<Point> {
        names.iter().map(|n| model.point(n).unwrap()).collect()
    }

    #[test]
    fn stuttering_chain_paths_are_valid() {
        let m = chain3();
        let fwd = make_path(
            &m,
            Direction::Fwd,
            pts(&m, &["x1", "x1", "x1", "x2", "x2", "x2", "x3", "x3"]),
        );
        assert!(fwd.is_ok());
        let bwd = make_path(
            &m,
            Direction::Bwd,
            pts(&m, &["x3", "x3", "x2", "x1", "x1", "x1", "x1"]),
        );
        assert!(bwd.is_ok());
    }

    #[test]
    fn skipping_a_point_is_invalid() {
        let m = chain3();
        let err = make_path(&m, Direction::Fwd, pts(&m, &["x1", "x3"])).unwrap_err();
        assert!(matches!(err, Error::InvalidStep(1)));
    }

    #[test]
    fn concat_cases() {
        let m = chain3();
        let p = |names: &[&str]| make_path(&m, Direction::Fwd, pts(&m, names)).unwrap();
        assert_eq!(concat(&p(&["x1", "x2"]), &p(&["x2", "x3"])).unwrap(), p(&["x1", "x2", "x3"]));
        assert_eq!(concat(&p(&["x1"]), &p(&["x1"])).unwrap(), p(&["x1"]));
        assert_eq!(
            concat(&p(&["x1", "x1"]), &p(&["x1", "x2", "x3"])).unwrap(),
            p(&["x1", "x1", "x2", "x3"])
        );
        assert!(matches!(
            concat(&p(&["x1", "x2"]), &p(&["x1", "x2"])).unwrap_err(),
            Error::EndpointMismatch(..)
        ));
    }

    #[test]
    fn shift_and_prefix() {
        let m = chain3();
        let p = make_path(&m, Direction::Fwd, pts(&m, &["x1", "x2", "x3"])).unwrap();
        assert_eq!(shift(&p, 1).unwrap().points(), &pts(&m, &["x2", "x3"])[..]);
        assert_eq!(prefix(&p, 0).unwrap().points(), &pts(&m, &["x1"])[..]);
        assert_eq!(shift(&p, p.len()).unwrap().points(), &pts(&m, &["x3"])[..]);
        assert!(shift(&p, 3).is_err());
    }

    #[test]
    fn parse_path_syntax() {
        let m = chain3();
        let p = parse_path(&m, "fwd: x1 x1 x2").unwrap();
        assert_eq!(p.dir(), Direction::Fwd);
        assert_eq!(p.len(), 2);
        let b = parse_path(&m, "bwd: x3 x2 x1").unwrap();
        assert_eq!(b.dir(), Direction::Bwd);
        assert!(parse_path(&m, "up: x1").is_err());
        assert!(parse_path(&m, "fwd: nowhere").is_err());
    }

    #[test]
    fn singleton_paths_are_compatible_with_one_zone() {
        let m = chain3();
        let p = make_path(&m, Direction::Fwd, pts(&m, &["x1"])).unwrap();
        let w = compatible(&p, &p, |a, b| a == b).unwrap().unwrap();
        assert_eq!(w.zone_count, 1);
        assert_eq!(w.f, vec![1]);
        assert_eq!(w.g, vec![1]);
    }

    #[test]
    fn surjectivity_can_rule_out_witnesses() {
        // p1 = (x1,x2), p2 = (x1); rel relates x1 with x1 only. The second
        // zone of p1 would have no partner indices left in p2.
        let m = chain3();
        let p1 = make_path(&m, Direction::Fwd, pts(&m, &["x1", "x2"])).unwrap();
        let p2 = make_path(&m, Direction::Fwd, pts(&m, &["x1"])).unwrap();
        let w = compatible(&p1, &p2, |a, b| a == b).unwrap();
        assert!(w.is_none());
    }

    #[test]
    fn zones_counts_block_runs() {
        let m = chain3();
        let single = make_path(&m, Direction::Fwd, pts(&m, &["x2"])).unwrap();
        assert_eq!(zones(&single, |_| 0), 1);
        let p = make_path(&m, Direction::Fwd, pts(&m, &["x1", "x1", "x2", "x3", "x3"])).unwrap();
        assert_eq!(zones(&p, |_| 0), 1);
        // block x1 alone vs the rest
        assert_eq!(zones(&p, |p| usize::from(p.index() > 0)), 2);
    }
}
