//! Finite models of a Noetherian topological space.
//!
//! A model is a finite poset: `x ⤳ y` records that `y` lies in the closure
//! of `x` (so `x` is the more generic point). Closed sets are the
//! specialization-closed point sets, open sets the generization-closed ones.
//! Only honest posets are accepted; every point is then the unique generic
//! point of its closure.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Spaces are capped at 64 points so point sets fit in one machine word.
pub const MAX_POINTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("specialization relation has a cycle through `{0}` and `{1}`")]
    CycleError(String, String),
    #[error("codim must strictly increase along `{0}` ⤳ `{1}` (got {2} then {3})")]
    CodimError(String, String, u32, u32),
    #[error("duplicate point `{0}`")]
    DuplicatePoint(String),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("point set {0} is not specialization-closed")]
    NotClosed(String),
    #[error("point set {0} is not generization-closed")]
    NotOpen(String),
    #[error("space has {0} points; at most {MAX_POINTS} are supported")]
    TooManyPoints(usize),
    #[error("malformed space file: {0}")]
    Parse(String),
}

/// A set of point indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointSet(u64);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    pub fn from_bits(bits: u64) -> Self {
        PointSet(bits)
    }
    pub fn bits(self) -> u64 {
        self.0
    }
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            PointSet(u64::MAX)
        } else {
            PointSet((1u64 << n) - 1)
        }
    }
    pub fn singleton(i: usize) -> Self {
        PointSet(1 << i)
    }
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }
    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }
    pub fn union(self, o: PointSet) -> Self {
        PointSet(self.0 | o.0)
    }
    pub fn intersection(self, o: PointSet) -> Self {
        PointSet(self.0 & o.0)
    }
    pub fn difference(self, o: PointSet) -> Self {
        PointSet(self.0 & !o.0)
    }
    pub fn is_subset(self, o: PointSet) -> bool {
        self.0 & !o.0 == 0
    }
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

impl FromIterator<usize> for PointSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = PointSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Codimension of a closed set; the empty set has codimension `Infinite`,
/// so it belongs to every codimension family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Codim {
    Finite(u32),
    Infinite,
}

impl Codim {
    pub fn at_least(self, d: i64) -> bool {
        match self {
            Codim::Finite(c) => c as i64 >= d,
            Codim::Infinite => true,
        }
    }
}

/// A specialization-closed point set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClosedSet(PointSet);

impl ClosedSet {
    pub fn points(self) -> PointSet {
        self.0
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SpaceModel {
    ids: Vec<String>,
    codim: Vec<u32>,
    /// `up[x]` = closure of `x` = `{y : x ⤳ y}` (reflexive).
    up: Vec<PointSet>,
    /// `down[x]` = generizations of `x` = `{y : y ⤳ x}` (reflexive).
    down: Vec<PointSet>,
}

impl fmt::Debug for SpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<(&str, &str)> = self
            .strict_pairs()
            .map(|(x, y)| (self.ids[x].as_str(), self.ids[y].as_str()))
            .collect();
        f.debug_struct("SpaceModel")
            .field("points", &self.ids)
            .field("codim", &self.codim)
            .field("specializations", &edges)
            .finish()
    }
}

impl SpaceModel {
    /// Builds a space from `(id, codim)` points and `(generic, special)` edges,
    /// taking the reflexive-transitive closure of the edges.
    pub fn validate(points: &[(String, u32)], edges: &[(String, String)]) -> Result<Self, SpaceError> {
        if points.len() > MAX_POINTS {
            return Err(SpaceError::TooManyPoints(points.len()));
        }
        let mut index = HashMap::new();
        for (i, (id, _)) in points.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(SpaceError::DuplicatePoint(id.clone()));
            }
        }
        let n = points.len();
        let mut up: Vec<PointSet> = (0..n).map(PointSet::singleton).collect();
        for (a, b) in edges {
            let ia = *index.get(a).ok_or_else(|| SpaceError::UnknownPoint(a.clone()))?;
            let ib = *index.get(b).ok_or_else(|| SpaceError::UnknownPoint(b.clone()))?;
            up[ia].insert(ib);
        }
        // Warshall on bit rows.
        for k in 0..n {
            for i in 0..n {
                if up[i].contains(k) {
                    up[i] = up[i].union(up[k]);
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if up[i].contains(j) && up[j].contains(i) {
                    return Err(SpaceError::CycleError(points[i].0.clone(), points[j].0.clone()));
                }
            }
        }
        let codim: Vec<u32> = points.iter().map(|(_, c)| *c).collect();
        for i in 0..n {
            for j in up[i].iter() {
                if j != i && codim[j] <= codim[i] {
                    return Err(SpaceError::CodimError(
                        points[i].0.clone(),
                        points[j].0.clone(),
                        codim[i],
                        codim[j],
                    ));
                }
            }
        }
        let mut down = vec![PointSet::EMPTY; n];
        for i in 0..n {
            for j in up[i].iter() {
                down[j].insert(i);
            }
        }
        Ok(SpaceModel { ids: points.iter().map(|(id, _)| id.clone()).collect(), codim, up, down })
    }

    fn build(points: &[(&str, u32)], edges: &[(&str, &str)]) -> Self {
        let pts: Vec<(String, u32)> = points.iter().map(|(a, c)| (a.to_string(), *c)).collect();
        let es: Vec<(String, String)> =
            edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        Self::validate(&pts, &es).expect("built-in space is valid")
    }

    /// One point of codimension 0.
    pub fn point() -> Self {
        Self::build(&[("pt", 0)], &[])
    }

    /// The Sierpinski model: generic `eta`, closed `x`.
    pub fn sierpinski() -> Self {
        Self::build(&[("eta", 0), ("x", 1)], &[("eta", "x")])
    }

    /// `eta ⤳ y ⤳ x` with codimensions 0, 1, 2.
    pub fn chain3() -> Self {
        Self::build(&[("eta", 0), ("y", 1), ("x", 2)], &[("eta", "y"), ("y", "x")])
    }

    /// A generic point with two closed points `a`, `b` of codimension 1.
    pub fn v_space() -> Self {
        Self::build(&[("eta", 0), ("a", 1), ("b", 1)], &[("eta", "a"), ("eta", "b")])
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
    pub fn ids(&self) -> &[String] {
        &self.ids
    }
    pub fn id(&self, x: usize) -> &str {
        &self.ids[x]
    }
    pub fn codim(&self, x: usize) -> u32 {
        self.codim[x]
    }
    pub fn all_points(&self) -> PointSet {
        PointSet::full(self.len())
    }

    pub fn index_of(&self, id: &str) -> Result<usize, SpaceError> {
        self.ids.iter().position(|s| s == id).ok_or_else(|| SpaceError::UnknownPoint(id.into()))
    }

    /// `x ⤳ y`: `y` lies in the closure of `x` (reflexive).
    pub fn specializes(&self, x: usize, y: usize) -> bool {
        self.up[x].contains(y)
    }

    /// Closure of a point as a raw point set.
    pub fn up(&self, x: usize) -> PointSet {
        self.up[x]
    }

    /// Generizations of a point, i.e. the smallest open set containing it.
    pub fn down(&self, x: usize) -> PointSet {
        self.down[x]
    }

    /// All pairs `(x, y)` with `x ⤳ y`, `x != y`, in index order.
    pub fn strict_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |x| self.up[x].iter().filter(move |&y| y != x).map(move |y| (x, y)))
    }

    pub fn closure(&self, x: usize) -> ClosedSet {
        ClosedSet(self.up[x])
    }

    pub fn closure_of_id(&self, id: &str) -> Result<ClosedSet, SpaceError> {
        Ok(self.closure(self.index_of(id)?))
    }

    /// Specialization closure of an arbitrary point set.
    pub fn close(&self, s: PointSet) -> PointSet {
        s.iter().fold(PointSet::EMPTY, |acc, x| acc.union(self.up[x]))
    }

    /// Generization closure of an arbitrary point set.
    pub fn open_hull(&self, s: PointSet) -> PointSet {
        s.iter().fold(PointSet::EMPTY, |acc, x| acc.union(self.down[x]))
    }

    pub fn is_closed(&self, s: PointSet) -> bool {
        self.close(s) == s
    }

    pub fn is_open(&self, s: PointSet) -> bool {
        self.open_hull(s) == s
    }

    pub fn closed_set(&self, s: PointSet) -> Result<ClosedSet, SpaceError> {
        if self.is_closed(s) {
            Ok(ClosedSet(s))
        } else {
            Err(SpaceError::NotClosed(self.format_set(s)))
        }
    }

    /// Minimum codimension over the members; `Infinite` for the empty set.
    pub fn codim_of_set(&self, z: PointSet) -> Result<Codim, SpaceError> {
        if !self.is_closed(z) {
            return Err(SpaceError::NotClosed(self.format_set(z)));
        }
        Ok(z.iter().map(|x| Codim::Finite(self.codim[x])).min().unwrap_or(Codim::Infinite))
    }

    /// Generic points of the irreducible components: the minimal members.
    pub fn irreducible_components(&self, z: PointSet) -> Result<Vec<usize>, SpaceError> {
        if !self.is_closed(z) {
            return Err(SpaceError::NotClosed(self.format_set(z)));
        }
        Ok(z.iter().filter(|&x| self.down[x].intersection(z) == PointSet::singleton(x)).collect())
    }

    /// Every closed subset, enumerated by brute force over subsets.
    pub fn closed_sets(&self) -> Vec<ClosedSet> {
        assert!(self.len() <= 20, "closed-set enumeration is for small spaces");
        (0..(1u64 << self.len()))
            .map(PointSet::from_bits)
            .filter(|&s| self.is_closed(s))
            .map(ClosedSet)
            .collect()
    }

    /// Every open subset.
    pub fn open_sets(&self) -> Vec<PointSet> {
        assert!(self.len() <= 20, "open-set enumeration is for small spaces");
        (0..(1u64 << self.len())).map(PointSet::from_bits).filter(|&s| self.is_open(s)).collect()
    }

    /// The open subspace on `u`, with the map from subspace indices to
    /// indices in `self`.
    pub fn open_subspace(&self, u: PointSet) -> Result<(SpaceModel, Vec<usize>), SpaceError> {
        if !self.is_open(u) {
            return Err(SpaceError::NotOpen(self.format_set(u)));
        }
        let members: Vec<usize> = u.iter().collect();
        let pts: Vec<(String, u32)> =
            members.iter().map(|&x| (self.ids[x].clone(), self.codim[x])).collect();
        let mut edges = Vec::new();
        for &x in &members {
            for y in self.up[x].intersection(u).iter() {
                if y != x {
                    edges.push((self.ids[x].clone(), self.ids[y].clone()));
                }
            }
        }
        Ok((SpaceModel::validate(&pts, &edges)?, members))
    }

    pub fn format_set(&self, s: PointSet) -> String {
        let names: Vec<&str> = s.iter().filter(|&i| i < self.len()).map(|i| self.id(i)).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn to_json(&self) -> SpaceJson {
        SpaceJson {
            points: self
                .ids
                .iter()
                .zip(&self.codim)
                .map(|(id, c)| PointJson { id: id.clone(), codim: *c })
                .collect(),
            specializations: self
                .strict_pairs()
                .filter(|&(x, y)| self.is_cover(x, y))
                .map(|(x, y)| (self.ids[x].clone(), self.ids[y].clone()))
                .collect(),
        }
    }

    /// `x ⤳ y` with nothing strictly between.
    pub fn is_cover(&self, x: usize, y: usize) -> bool {
        x != y
            && self.specializes(x, y)
            && !self.up[x].intersection(self.down[y]).iter().any(|z| z != x && z != y)
    }

    pub fn from_json(json: &SpaceJson) -> Result<Self, SpaceError> {
        let pts: Vec<(String, u32)> = json.points.iter().map(|p| (p.id.clone(), p.codim)).collect();
        Self::validate(&pts, &json.specializations)
    }

    pub fn from_json_str(s: &str) -> Result<Self, SpaceError> {
        let json: SpaceJson = serde_json::from_str(s).map_err(|e| SpaceError::Parse(e.to_string()))?;
        Self::from_json(&json)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct PointJson {
    pub id: String,
    pub codim: u32,
}

/// On-disk space description; edges are `(more generic, more special)`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SpaceJson {
    pub points: Vec<PointJson>,
    #[serde(default)]
    pub specializations: Vec<(String, String)>,
}

/// All posets on `n` labelled points, as strict "less-than" bit rows
/// (`rows[i]` has bit `j` iff `i < j`).
fn labelled_posets(n: usize) -> Vec<Vec<u64>> {
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut rows = vec![0u64; n];
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                rows[i] |= 1 << j;
            }
        }
        let antisym = (0..n).all(|i| (0..n).all(|j| !(rows[i] >> j & 1 == 1 && rows[j] >> i & 1 == 1)));
        let transitive = (0..n).all(|i| {
            (0..n).filter(|&j| rows[i] >> j & 1 == 1).all(|j| rows[j] & !rows[i] == 0)
        });
        if antisym && transitive {
            out.push(rows);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn canonical_key(rows: &[u64], codim: &[u32], perms: &[Vec<usize>]) -> (Vec<u64>, Vec<u32>) {
    let n = rows.len();
    perms
        .iter()
        .map(|perm| {
            let mut r = vec![0u64; n];
            let mut c = vec![0u32; n];
            for i in 0..n {
                c[perm[i]] = codim[i];
                for j in 0..n {
                    if rows[i] >> j & 1 == 1 {
                        r[perm[i]] |= 1 << perm[j];
                    }
                }
            }
            (r, c)
        })
        .min()
        .expect("at least one permutation")
}

fn space_from_rows(rows: &[u64], codim: &[u32]) -> SpaceModel {
    let n = rows.len();
    let pts: Vec<(String, u32)> = (0..n).map(|i| (format!("p{i}"), codim[i])).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rows[i] >> j & 1 == 1 {
                edges.push((format!("p{i}"), format!("p{j}")));
            }
        }
    }
    SpaceModel::validate(&pts, &edges).expect("enumerated space is valid")
}

/// All spaces with `1..=max_points` points up to isomorphism: every poset
/// together with every strictly monotone codimension assignment with values
/// in `0..=max_codim`.
pub fn enumerate_spaces(max_points: usize, max_codim: u32) -> Vec<SpaceModel> {
    let mut out = Vec::new();
    for n in 1..=max_points {
        let perms = permutations(n);
        let mut seen = BTreeSet::new();
        for rows in labelled_posets(n) {
            let mut codim = vec![0u32; n];
            let total = (max_codim as u64 + 1).pow(n as u32);
            for code in 0..total {
                let mut c = code;
                for slot in codim.iter_mut() {
                    *slot = (c % (max_codim as u64 + 1)) as u32;
                    c /= max_codim as u64 + 1;
                }
                let monotone = (0..n).all(|i| {
                    (0..n).filter(|&j| rows[i] >> j & 1 == 1).all(|j| codim[j] > codim[i])
                });
                if !monotone {
                    continue;
                }
                let key = canonical_key(&rows, &codim, &perms);
                if seen.insert(key.clone()) {
                    out.push(space_from_rows(&key.0, &key.1));
                }
            }
        }
    }
    out
}

/// All posets with `1..=max_points` points up to isomorphism, with codim set
/// to the height of each point.
pub fn enumerate_posets(max_points: usize) -> Vec<SpaceModel> {
    let mut out = Vec::new();
    for n in 1..=max_points {
        let perms = permutations(n);
        let mut seen = BTreeMap::new();
        for rows in labelled_posets(n) {
            let zero = vec![0u32; n];
            let key = canonical_key(&rows, &zero, &perms);
            seen.entry(key.0).or_insert(());
        }
        for rows in seen.keys() {
            let mut height = vec![0u32; n];
            // points in a chain of length <= n; iterate to a fixed point
            for _ in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        if rows[i] >> j & 1 == 1 {
                            height[j] = height[j].max(height[i] + 1);
                        }
                    }
                }
            }
            out.push(space_from_rows(rows, &height));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(&str, u32)]) -> Vec<(String, u32)> {
        v.iter().map(|(a, c)| (a.to_string(), *c)).collect()
    }
    fn edges(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn validate_examples() {
        let single = SpaceModel::validate(&pts(&[("pt", 0)]), &[]).unwrap();
        assert_eq!(single.len(), 1);
        let sier = SpaceModel::validate(&pts(&[("eta", 0), ("x", 1)]), &edges(&[("eta", "x")])).unwrap();
        assert_eq!(sier, SpaceModel::sierpinski());
        let err = SpaceModel::validate(&pts(&[("eta", 0), ("x", 0)]), &edges(&[("eta", "x")]));
        assert!(matches!(err, Err(SpaceError::CodimError(..))));
        let dup = SpaceModel::validate(&pts(&[("a", 0), ("a", 1)]), &[]);
        assert!(matches!(dup, Err(SpaceError::DuplicatePoint(_))));
        let cyc = SpaceModel::validate(
            &pts(&[("a", 0), ("b", 1)]),
            &edges(&[("a", "b"), ("b", "a")]),
        );
        assert!(matches!(cyc, Err(SpaceError::CycleError(..))));
    }

    #[test]
    fn closure_examples() {
        let s = SpaceModel::sierpinski();
        assert_eq!(s.closure_of_id("eta").unwrap().points(), PointSet::from_bits(0b11));
        assert_eq!(s.closure_of_id("x").unwrap().points(), PointSet::singleton(1));
        let c = SpaceModel::chain3();
        // y ⤳ x comes from the edge list; eta ⤳ x only from transitivity
        assert_eq!(c.closure_of_id("y").unwrap().points(), PointSet::from_bits(0b110));
        assert!(c.specializes(0, 2));
        assert!(matches!(s.closure_of_id("z"), Err(SpaceError::UnknownPoint(_))));
    }

    #[test]
    fn codim_of_set_examples() {
        let s = SpaceModel::sierpinski();
        assert_eq!(s.codim_of_set(PointSet::singleton(1)).unwrap(), Codim::Finite(1));
        assert_eq!(s.codim_of_set(PointSet::from_bits(0b11)).unwrap(), Codim::Finite(0));
        assert_eq!(s.codim_of_set(PointSet::EMPTY).unwrap(), Codim::Infinite);
        assert!(s.codim_of_set(PointSet::singleton(0)).is_err());
    }

    #[test]
    fn components_examples() {
        let s = SpaceModel::sierpinski();
        assert_eq!(s.irreducible_components(PointSet::from_bits(0b11)).unwrap(), vec![0]);
        assert_eq!(s.irreducible_components(PointSet::EMPTY).unwrap(), Vec::<usize>::new());
        let v = SpaceModel::v_space();
        assert_eq!(v.irreducible_components(PointSet::from_bits(0b110)).unwrap(), vec![1, 2]);
    }

    #[test]
    fn closure_is_irreducible_and_closed() {
        for space in enumerate_spaces(4, 3).iter().take(200) {
            for x in 0..space.len() {
                let z = space.closure(x).points();
                assert!(space.is_closed(z));
                assert_eq!(space.irreducible_components(z).unwrap(), vec![x]);
            }
        }
    }

    #[test]
    fn codim_of_union_is_min() {
        for space in enumerate_spaces(5, 3).iter().filter(|s| s.len() == 5).step_by(37) {
            let closed = space.closed_sets();
            for a in &closed {
                for b in &closed {
                    let u = a.points().union(b.points());
                    let i = a.points().intersection(b.points());
                    assert!(space.is_closed(u) && space.is_closed(i));
                    let ca = space.codim_of_set(a.points()).unwrap();
                    let cb = space.codim_of_set(b.points()).unwrap();
                    assert_eq!(space.codim_of_set(u).unwrap(), ca.min(cb));
                }
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        // unlabelled posets on 1..=4 points: 1, 2, 5, 16
        let by_size = |n| enumerate_posets(4).iter().filter(|s| s.len() == n).count();
        assert_eq!((by_size(1), by_size(2), by_size(3), by_size(4)), (1, 2, 5, 16));
        assert_eq!(enumerate_spaces(1, 3).len(), 4);
    }

    #[test]
    fn json_round_trip() {
        let c = SpaceModel::chain3();
        let text = serde_json::to_string(&c.to_json()).unwrap();
        assert_eq!(SpaceModel::from_json_str(&text).unwrap(), c);
        let raw = r#"{"points":[{"id":"eta","codim":0},{"id":"x","codim":1}],"specializations":[["eta","x"]]}"#;
        assert_eq!(SpaceModel::from_json_str(raw).unwrap(), SpaceModel::sierpinski());
    }

    #[test]
    fn open_subspace() {
        let c = SpaceModel::chain3();
        let (u, map) = c.open_subspace(PointSet::from_bits(0b011)).unwrap();
        assert_eq!(u.len(), 2);
        assert_eq!(map, vec![0, 1]);
        assert!(c.open_subspace(PointSet::singleton(2)).is_err());
    }
}
