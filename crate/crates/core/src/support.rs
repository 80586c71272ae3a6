//! Families of supports and support data.
//!
//! A support datum is stored as its supporting function `p`; the level
//! families `Φ^n = {z : p(z) ≥ n}` are derived views. Families are encoded
//! by their set of member points, so a closed set is a member iff all of its
//! points are.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::space::{PointSet, SpaceError, SpaceModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SupportError {
    #[error("operands live on different spaces")]
    SpaceMismatch,
    #[error("levels are not decreasing at n = {0}")]
    NotDecreasing(i64),
    #[error("levels are not eventually full and eventually empty")]
    NotBounded,
    #[error("supporting function decreases along `{0}` ⤳ `{1}`")]
    NotMonotone(String, String),
    #[error("missing value for point `{0}`")]
    MissingPoint(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

fn same_space(a: &Arc<SpaceModel>, b: &Arc<SpaceModel>) -> Result<(), SupportError> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(SupportError::SpaceMismatch)
    }
}

/// A family of supports, given by its specialization-closed set of points.
#[derive(Clone, PartialEq, Eq)]
pub struct FamilyOfSupports {
    space: Arc<SpaceModel>,
    members: PointSet,
}

impl fmt::Debug for FamilyOfSupports {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Family{}", self.space.format_set(self.members))
    }
}

impl FamilyOfSupports {
    /// The family generated by the closures of the named points.
    pub fn from_points(space: &Arc<SpaceModel>, ids: &[&str]) -> Result<Self, SupportError> {
        let mut s = PointSet::EMPTY;
        for id in ids {
            s.insert(space.index_of(id)?);
        }
        Ok(Self::from_set(space, s))
    }

    /// The family generated by the closures of `pts`.
    pub fn from_set(space: &Arc<SpaceModel>, pts: PointSet) -> Self {
        FamilyOfSupports { space: space.clone(), members: space.close(pts) }
    }

    pub fn full(space: &Arc<SpaceModel>) -> Self {
        Self::from_set(space, space.all_points())
    }

    pub fn empty(space: &Arc<SpaceModel>) -> Self {
        FamilyOfSupports { space: space.clone(), members: PointSet::EMPTY }
    }

    pub fn space(&self) -> &Arc<SpaceModel> {
        &self.space
    }

    pub fn members(&self) -> PointSet {
        self.members
    }

    /// Whether the closed set `z` belongs to the family.
    pub fn contains_closed(&self, z: PointSet) -> bool {
        z.is_subset(self.members)
    }

    pub fn join(&self, other: &Self) -> Result<Self, SupportError> {
        same_space(&self.space, &other.space)?;
        Ok(FamilyOfSupports { space: self.space.clone(), members: self.members.union(other.members) })
    }

    pub fn meet(&self, other: &Self) -> Result<Self, SupportError> {
        same_space(&self.space, &other.space)?;
        Ok(FamilyOfSupports {
            space: self.space.clone(),
            members: self.members.intersection(other.members),
        })
    }

    /// Restriction to an open subspace, as a family on that subspace.
    pub fn restrict(&self, sub: &Arc<SpaceModel>, embedding: &[usize]) -> Self {
        let pts = embedding
            .iter()
            .enumerate()
            .filter(|&(_, &x)| self.members.contains(x))
            .map(|(i, _)| i)
            .collect();
        FamilyOfSupports { space: sub.clone(), members: pts }
    }
}

/// Convention for `σ^{<n}` in the level-wise criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaConvention {
    /// `σ^{<n} = σ^{≤n−1}`.
    Standard,
    /// Negative control: `σ^{<n} = σ^{≤n}`.
    #[cfg(feature = "mutation")]
    LeqAsLt,
}

/// A support datum, held as its supporting function.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SupportDatum {
    space: Arc<SpaceModel>,
    p: Vec<i64>,
}

impl fmt::Debug for SupportDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (x, v) in self.p.iter().enumerate() {
            m.entry(&self.space.id(x), v);
        }
        m.finish()
    }
}

impl SupportDatum {
    /// Wraps a supporting function, checking monotonicity along specialization.
    pub fn from_function(space: &Arc<SpaceModel>, p: Vec<i64>) -> Result<Self, SupportError> {
        assert_eq!(p.len(), space.len(), "one value per point");
        if let Some((x, y)) = space.strict_pairs().find(|&(x, y)| p[y] < p[x]) {
            return Err(SupportError::NotMonotone(space.id(x).into(), space.id(y).into()));
        }
        Ok(SupportDatum { space: space.clone(), p })
    }

    /// Negative control: admits non-monotone functions.
    #[cfg(feature = "mutation")]
    pub fn from_function_unchecked(space: &Arc<SpaceModel>, p: Vec<i64>) -> Self {
        SupportDatum { space: space.clone(), p }
    }

    pub fn from_map(space: &Arc<SpaceModel>, map: &BTreeMap<String, i64>) -> Result<Self, SupportError> {
        for id in map.keys() {
            space.index_of(id)?;
        }
        let p = space
            .ids()
            .iter()
            .map(|id| map.get(id).copied().ok_or_else(|| SupportError::MissingPoint(id.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_function(space, p)
    }

    /// Builds a datum from consecutive levels `Φ^first, Φ^{first+1}, …`.
    /// The first level must be everything and the last empty.
    pub fn from_levels(space: &Arc<SpaceModel>, first: i64, levels: &[FamilyOfSupports]) -> Result<Self, SupportError> {
        let sets: Vec<PointSet> = levels
            .iter()
            .map(|l| same_space(space, &l.space).map(|_| l.members))
            .collect::<Result<_, _>>()?;
        Self::from_level_sets(space, first, &sets)
    }

    pub fn from_level_sets(space: &Arc<SpaceModel>, first: i64, sets: &[PointSet]) -> Result<Self, SupportError> {
        match (sets.first(), sets.last()) {
            (Some(&a), Some(&b)) if a == space.all_points() && b.is_empty() => {}
            _ => return Err(SupportError::NotBounded),
        }
        for s in sets {
            space.closed_set(*s)?;
        }
        for (i, w) in sets.windows(2).enumerate() {
            if !w[1].is_subset(w[0]) {
                return Err(SupportError::NotDecreasing(first + i as i64 + 1));
            }
        }
        let p = (0..space.len())
            .map(|x| first + sets.iter().take_while(|s| s.contains(x)).count() as i64 - 1)
            .collect();
        Self::from_function(space, p)
    }

    /// `p ≡ 0`.
    pub fn standard_t(space: &Arc<SpaceModel>) -> Self {
        SupportDatum { space: space.clone(), p: vec![0; space.len()] }
    }

    /// `p = codim`.
    pub fn standard_s(space: &Arc<SpaceModel>) -> Self {
        SupportDatum { space: space.clone(), p: (0..space.len()).map(|x| space.codim(x) as i64).collect() }
    }

    pub fn constant(space: &Arc<SpaceModel>, c: i64) -> Self {
        SupportDatum { space: space.clone(), p: vec![c; space.len()] }
    }

    pub fn space(&self) -> &Arc<SpaceModel> {
        &self.space
    }

    pub fn p(&self, x: usize) -> i64 {
        self.p[x]
    }

    pub fn values(&self) -> &[i64] {
        &self.p
    }

    pub fn to_map(&self) -> BTreeMap<String, i64> {
        self.space.ids().iter().cloned().zip(self.p.iter().copied()).collect()
    }

    pub fn min_value(&self) -> i64 {
        self.p.iter().copied().min().unwrap_or(0)
    }

    pub fn max_value(&self) -> i64 {
        self.p.iter().copied().max().unwrap_or(0)
    }

    /// `Φ^n` as a point set.
    pub fn level_set(&self, n: i64) -> PointSet {
        self.p.iter().enumerate().filter(|&(_, &v)| v >= n).map(|(x, _)| x).collect()
    }

    pub fn level(&self, n: i64) -> FamilyOfSupports {
        FamilyOfSupports { space: self.space.clone(), members: self.level_set(n) }
    }

    /// `(first, [Φ^first, …, Φ^last])` running from the last full level to
    /// the first empty one.
    pub fn levels(&self) -> (i64, Vec<PointSet>) {
        let (lo, hi) = (self.min_value(), self.max_value());
        (lo, (lo..=hi + 1).map(|n| self.level_set(n)).collect())
    }

    /// Levelwise inclusion `self ⊆ other`.
    pub fn is_contained_in(&self, other: &Self) -> bool {
        self.p.iter().zip(&other.p).all(|(a, b)| a <= b)
    }

    pub fn meet(&self, other: &Self) -> Result<Self, SupportError> {
        same_space(&self.space, &other.space)?;
        Ok(self.zip_with(other, |a, b| a.min(b)))
    }

    pub fn join(&self, other: &Self) -> Result<Self, SupportError> {
        same_space(&self.space, &other.space)?;
        Ok(self.zip_with(other, |a, b| a.max(b)))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(i64, i64) -> i64) -> Self {
        SupportDatum { space: self.space.clone(), p: self.p.iter().zip(&other.p).map(|(&a, &b)| f(a, b)).collect() }
    }

    /// `σ^{≤n}Φ`.
    pub fn sigma_leq(&self, n: i64) -> Self {
        SupportDatum { space: self.space.clone(), p: self.p.iter().map(|&v| v.min(n)).collect() }
    }

    /// `σ^{<n}Φ` under the given convention.
    pub fn sigma_lt(&self, n: i64, conv: SigmaConvention) -> Self {
        match conv {
            SigmaConvention::Standard => self.sigma_leq(n - 1),
            #[cfg(feature = "mutation")]
            SigmaConvention::LeqAsLt => self.sigma_leq(n),
        }
    }

    /// `Φ∘Ψ`, whose supporting function is the pointwise sum.
    pub fn convolve(&self, other: &Self) -> Result<Self, SupportError> {
        same_space(&self.space, &other.space)?;
        let out = self.zip_with(other, |a, b| a + b);
        #[cfg(debug_assertions)]
        {
            for n in out.min_value() - 1..=out.max_value() + 1 {
                let expected = out.level_set(n);
                debug_assert_eq!(self.union_formula(other, n), expected);
                debug_assert_eq!(self.intersection_formula(other, n), expected);
            }
        }
        Ok(out)
    }

    /// `∪_{i+j=n} Φ^i ∩ Ψ^j`.
    pub fn union_formula(&self, other: &Self, n: i64) -> PointSet {
        (self.min_value()..=self.max_value())
            .map(|i| self.level_set(i).intersection(other.level_set(n - i)))
            .fold(PointSet::EMPTY, PointSet::union)
    }

    /// `∩_{i+j=n+1} Φ^i ∪ Ψ^j`.
    pub fn intersection_formula(&self, other: &Self, n: i64) -> PointSet {
        (self.min_value()..=self.max_value() + 1)
            .map(|i| self.level_set(i).union(other.level_set(n + 1 - i)))
            .fold(self.space.all_points(), PointSet::intersection)
    }

    /// `Φ_*`: level `n` holds the closed `Z` with `codim(Z ∩ Φ^k) ≥ n + k`
    /// for every `k`. Evaluated from the level definition.
    pub fn dual_star(&self) -> Self {
        let s = &self.space;
        let (lo, hi) = (self.min_value(), self.max_value());
        let cmin = (0..s.len()).map(|x| s.codim(x) as i64).min().unwrap_or(0);
        let cmax = (0..s.len()).map(|x| s.codim(x) as i64).max().unwrap_or(0);
        let levels: Vec<PointSet> = (lo..=hi).map(|k| self.level_set(k)).collect();
        let member = |x: usize, n: i64| {
            levels.iter().zip(lo..).all(|(&lk, k)| {
                let z = s.up(x).intersection(lk);
                s.codim_of_set(z).expect("closed").at_least(n + k)
            })
        };
        let p: Vec<i64> = (0..s.len())
            .map(|x| {
                (cmin - hi..=cmax - lo)
                    .rev()
                    .find(|&n| member(x, n))
                    .expect("the bottom of the range is always a member")
            })
            .collect();
        let out = SupportDatum { space: s.clone(), p };
        debug_assert!(SupportDatum::from_function(s, out.p.clone()).is_ok(), "dual datum is monotone");
        out
    }

    /// `(Ψ_a)^n = {Z : Φ^k ∩ Z ⊆ Θ^{k+n} for every k ≤ a}`, evaluated
    /// from the level definition.
    pub fn psi_truncated(&self, theta: &Self, a: i64) -> Result<Self, SupportError> {
        same_space(&self.space, &theta.space)?;
        let s = &self.space;
        let (lo, hi) = (self.min_value(), self.max_value());
        let ks: Vec<i64> = (lo.min(a)..=a.min(hi)).collect();
        let nlo = theta.min_value() - a.min(hi);
        let nhi = theta.max_value() - a.min(lo);
        let member = |x: usize, n: i64| {
            ks.iter().all(|&k| s.up(x).intersection(self.level_set(k)).is_subset(theta.level_set(k + n)))
        };
        let p = (0..s.len())
            .map(|x| (nlo..=nhi).rev().find(|&n| member(x, n)).expect("bottom of range is a member"))
            .collect();
        Ok(SupportDatum { space: s.clone(), p })
    }

    /// Solves `Φ∘Ψ = Θ` for `Ψ`.
    pub fn residuate(&self, theta: &Self) -> Result<Residuation, SupportError> {
        same_space(&self.space, &theta.space)?;
        let s = &self.space;
        let p: Vec<i64> = (0..s.len())
            .map(|x| s.up(x).iter().map(|y| theta.p[y] - self.p[y]).min().expect("x ∈ closure(x)"))
            .collect();
        let psi = SupportDatum { space: s.clone(), p };
        debug_assert_eq!(psi, self.psi_truncated(theta, self.max_value())?);
        if self.convolve(&psi)? == *theta {
            return Ok(Residuation::Solution(psi));
        }
        let (generic, special) = s
            .strict_pairs()
            .find(|&(x, y)| {
                let dp = self.p[y] - self.p[x];
                dp < 0 || dp > theta.p[y] - theta.p[x]
            })
            .expect("a failed residuation has a violating pair");
        Ok(Residuation::NoSolution { generic, special })
    }

    /// First pair `x ⤳ y` with `p(y) − p(x) > codim(y) − codim(x)`.
    pub fn codim_jump_violation(&self) -> Option<(usize, usize)> {
        let s = &self.space;
        s.strict_pairs().find(|&(x, y)| self.p[y] - self.p[x] > s.codim(y) as i64 - s.codim(x) as i64)
    }

    /// The level-wise condition: for every `n, k`,
    /// `(σ^{<n}Φ)_*^k ⊆ Φ^n ∪ (σ^{≤n}Φ)_*^k`. Returns the first failure.
    pub fn level_violation(&self, conv: SigmaConvention) -> Option<Witness> {
        for n in self.min_value() + 1..=self.max_value() + 1 {
            let lt = self.sigma_lt(n, conv).dual_star();
            let le = self.sigma_leq(n).dual_star();
            let kmin = lt.min_value().min(le.min_value());
            let kmax = lt.max_value().max(le.max_value()) + 1;
            let phin = self.level_set(n);
            for k in kmin..=kmax {
                let lhs = lt.level_set(k);
                let rhs = phin.union(le.level_set(k));
                if let Some(point) = lhs.difference(rhs).iter().next() {
                    return Some(Witness::Level { n, k, point });
                }
            }
        }
        None
    }

    /// Evaluates the four equivalent conditions without asserting agreement.
    pub fn evaluate_criterion(&self, conv: SigmaConvention) -> CriterionReport {
        let s = &self.space;
        let jump = self.codim_jump_violation();
        let sdatum = SupportDatum::standard_s(s);
        let dual_ok = self.convolve(&self.dual_star()).expect("same space") == sdatum;
        let resid = self.residuate(&sdatum).expect("same space");
        let level = self.level_violation(conv);
        let witness = jump
            .map(|(generic, special)| Witness::Pair { generic, special })
            .or(match resid {
                Residuation::NoSolution { generic, special } => Some(Witness::Pair { generic, special }),
                Residuation::Solution(_) => None,
            })
            .or(level);
        CriterionReport {
            codim_jumps: jump.is_none(),
            dual_convolution: dual_ok,
            residuation: resid.is_solution(),
            level_inclusions: level.is_none(),
            witness,
        }
    }

    /// Decides whether the datum satisfies the coherence criterion, asserting
    /// that all four equivalent formulations agree.
    pub fn check_t_criterion(&self) -> CriterionReport {
        let report = self.evaluate_criterion(SigmaConvention::Standard);
        assert!(report.agrees(), "criterion formulations disagree on {self:?}: {report:?}");
        report
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Residuation {
    Solution(SupportDatum),
    /// A pair `generic ⤳ special` where the jump of `Φ` is negative or
    /// exceeds the jump of `Θ`.
    NoSolution { generic: usize, special: usize },
}

impl Residuation {
    pub fn is_solution(&self) -> bool {
        matches!(self, Residuation::Solution(_))
    }
    pub fn solution(self) -> Option<SupportDatum> {
        match self {
            Residuation::Solution(d) => Some(d),
            Residuation::NoSolution { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    Pair { generic: usize, special: usize },
    Level { n: i64, k: i64, point: usize },
}

impl Witness {
    pub fn to_json(&self, space: &SpaceModel) -> serde_json::Value {
        match *self {
            Witness::Pair { generic, special } => serde_json::json!({
                "generic": space.id(generic),
                "special": space.id(special),
            }),
            Witness::Level { n, k, point } => serde_json::json!({"n": n, "k": k, "point": space.id(point)}),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionReport {
    /// `p(y) − p(x) ≤ codim(y) − codim(x)` along every specialization.
    pub codim_jumps: bool,
    /// `Φ∘Φ_* = 𝔖`.
    pub dual_convolution: bool,
    /// Some `Ψ` has `Φ∘Ψ = 𝔖`.
    pub residuation: bool,
    /// The level-wise inclusions.
    pub level_inclusions: bool,
    pub witness: Option<Witness>,
}

impl CriterionReport {
    pub fn agrees(&self) -> bool {
        let v = self.codim_jumps;
        self.dual_convolution == v && self.residuation == v && self.level_inclusions == v
    }

    pub fn holds(&self) -> bool {
        self.codim_jumps && self.agrees()
    }

    pub fn to_json(&self, space: &SpaceModel) -> serde_json::Value {
        serde_json::json!({
            "codim_jumps": self.codim_jumps,
            "dual_convolution": self.dual_convolution,
            "residuation": self.residuation,
            "level_inclusions": self.level_inclusions,
            "holds": self.holds(),
            "witness": self.witness.map(|w| w.to_json(space)),
        })
    }
}

/// Every monotone supporting function with values in `lo..=hi`.
pub fn enumerate_data(space: &Arc<SpaceModel>, lo: i64, hi: i64) -> Vec<SupportDatum> {
    enumerate_functions(space, lo, hi, true)
        .into_iter()
        .map(|p| SupportDatum { space: space.clone(), p })
        .collect()
}

/// Every function `points → lo..=hi`, or only the monotone ones.
pub fn enumerate_functions(space: &SpaceModel, lo: i64, hi: i64, monotone: bool) -> Vec<Vec<i64>> {
    let n = space.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| space.codim(x));
    let mut out = Vec::new();
    let mut cur = vec![0i64; n];
    fn go(
        space: &SpaceModel,
        order: &[usize],
        i: usize,
        lo: i64,
        hi: i64,
        monotone: bool,
        cur: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if i == order.len() {
            out.push(cur.clone());
            return;
        }
        let x = order[i];
        // generizations of x come earlier in `order`
        let floor = if monotone {
            space.down(x).iter().filter(|&y| y != x).map(|y| cur[y]).max().unwrap_or(lo).max(lo)
        } else {
            lo
        };
        for v in floor..=hi {
            cur[x] = v;
            go(space, order, i + 1, lo, hi, monotone, cur, out);
        }
    }
    go(space, &order, 0, lo, hi, monotone, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sier() -> Arc<SpaceModel> {
        Arc::new(SpaceModel::sierpinski())
    }
    fn datum(s: &Arc<SpaceModel>, p: &[i64]) -> SupportDatum {
        SupportDatum::from_function(s, p.to_vec()).unwrap()
    }

    /// Independent oracle for `Φ_*`: enumerate every closed set and every
    /// integer `k` in a generous window.
    fn dual_oracle(phi: &SupportDatum) -> Vec<i64> {
        let s = phi.space();
        let closed = s.closed_sets();
        let member = |z: PointSet, n: i64| {
            (-20..=20).all(|k| {
                let zk: PointSet = z.iter().filter(|&y| phi.p(y) >= k).collect();
                zk.iter().all(|y| s.codim(y) as i64 >= n + k)
            })
        };
        (0..s.len())
            .map(|x| {
                (-20..=20)
                    .filter(|&n| closed.iter().any(|z| z.points().contains(x) && member(z.points(), n)))
                    .max()
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn family_examples() {
        let s = sier();
        assert_eq!(FamilyOfSupports::from_points(&s, &["eta"]).unwrap().members().bits(), 0b11);
        assert_eq!(FamilyOfSupports::from_points(&s, &["x"]).unwrap().members().bits(), 0b10);
        assert!(FamilyOfSupports::from_points(&s, &[]).unwrap().members().is_empty());
        let x = FamilyOfSupports::from_points(&s, &["x"]).unwrap();
        let all = FamilyOfSupports::full(&s);
        assert_eq!(x.join(&all).unwrap(), all);
        assert_eq!(x.meet(&all).unwrap(), x);
        assert!(matches!(
            FamilyOfSupports::from_points(&s, &["nope"]),
            Err(SupportError::Space(SpaceError::UnknownPoint(_)))
        ));
    }

    #[test]
    fn join_contains_reducible_union() {
        let v = Arc::new(SpaceModel::v_space());
        let a = FamilyOfSupports::from_points(&v, &["a"]).unwrap();
        let b = FamilyOfSupports::from_points(&v, &["b"]).unwrap();
        let ab = PointSet::from_bits(0b110);
        let j = a.join(&b).unwrap();
        assert!(j.contains_closed(ab));
        assert!(!a.contains_closed(ab) && !b.contains_closed(ab));
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let a = SupportDatum::standard_s(&sier());
        let b = SupportDatum::standard_s(&Arc::new(SpaceModel::chain3()));
        assert_eq!(a.convolve(&b), Err(SupportError::SpaceMismatch));
    }

    #[test]
    fn datum_from_level_examples() {
        let s = sier();
        let full = s.all_points();
        let x = PointSet::singleton(1);
        let t = SupportDatum::from_level_sets(&s, 0, &[full, PointSet::EMPTY]).unwrap();
        assert_eq!(t.values(), &[0, 0]);
        let sd = SupportDatum::from_level_sets(&s, 0, &[full, x, PointSet::EMPTY]).unwrap();
        assert_eq!(sd.values(), &[0, 1]);
        let oco = SupportDatum::from_level_sets(&s, 0, &[full, x, x, PointSet::EMPTY]).unwrap();
        assert_eq!(oco.values(), &[0, 2]);
        assert_eq!(
            SupportDatum::from_level_sets(&s, 0, &[full, PointSet::EMPTY, x, PointSet::EMPTY]),
            Err(SupportError::NotDecreasing(2))
        );
        assert_eq!(SupportDatum::from_level_sets(&s, 0, &[x, PointSet::EMPTY]), Err(SupportError::NotBounded));
    }

    #[test]
    fn standard_data() {
        let s = sier();
        assert_eq!(SupportDatum::standard_t(&s).values(), &[0, 0]);
        assert_eq!(SupportDatum::standard_s(&s).values(), &[0, 1]);
        let c = Arc::new(SpaceModel::chain3());
        assert_eq!(SupportDatum::standard_s(&c).values(), &[0, 1, 2]);
    }

    #[test]
    fn sigma_examples() {
        let c = Arc::new(SpaceModel::chain3());
        assert_eq!(SupportDatum::standard_s(&c).sigma_leq(1).values(), &[0, 1, 1]);
        let oco = datum(&sier(), &[0, 2]);
        assert_eq!(oco.sigma_leq(5), oco);
        assert_eq!(oco.sigma_leq(0), SupportDatum::standard_t(&sier()));
    }

    #[test]
    fn convolution_examples() {
        let s = sier();
        let sd = SupportDatum::standard_s(&s);
        let t = SupportDatum::standard_t(&s);
        assert_eq!(sd.convolve(&sd).unwrap().values(), &[0, 2]);
        assert_eq!(sd.convolve(&t).unwrap(), sd);
        assert_eq!(t.convolve(&datum(&s, &[-1, 3])).unwrap(), datum(&s, &[-1, 3]));
    }

    #[test]
    fn dual_examples_against_oracle() {
        for space in crate::space::enumerate_spaces(3, 3) {
            let s = Arc::new(space);
            let t = SupportDatum::standard_t(&s);
            let sd = SupportDatum::standard_s(&s);
            assert_eq!(t.dual_star(), sd);
            assert_eq!(sd.dual_star(), t);
            for d in enumerate_data(&s, -1, 2) {
                assert_eq!(d.dual_star().values(), dual_oracle(&d).as_slice(), "{d:?}");
            }
        }
        let oco = datum(&sier(), &[0, 2]);
        assert_eq!(oco.dual_star().values(), &[-1, -1]);
        assert_eq!(dual_oracle(&oco), vec![-1, -1]);
    }

    #[test]
    fn residuation_examples() {
        let s = sier();
        let t = SupportDatum::standard_t(&s);
        let sd = SupportDatum::standard_s(&s);
        let theta = datum(&s, &[1, 3]);
        assert_eq!(t.residuate(&theta).unwrap(), Residuation::Solution(theta.clone()));
        assert_eq!(sd.residuate(&sd).unwrap(), Residuation::Solution(t.clone()));
        let oco = datum(&s, &[0, 2]);
        assert_eq!(oco.residuate(&sd).unwrap(), Residuation::NoSolution { generic: 0, special: 1 });
    }

    /// Oracle for `Ψ_a`: every closed set, every `k ≤ a` down to far below.
    fn psi_oracle(phi: &SupportDatum, theta: &SupportDatum, a: i64) -> Vec<i64> {
        let s = phi.space();
        let closed = s.closed_sets();
        let member = |z: PointSet, n: i64| {
            (-30..=a).all(|k| z.iter().filter(|&y| phi.p(y) >= k).all(|y| theta.p(y) >= k + n))
        };
        (0..s.len())
            .map(|x| {
                (-40..=40)
                    .filter(|&n| closed.iter().any(|z| z.points().contains(x) && member(z.points(), n)))
                    .max()
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn psi_truncated_examples() {
        let s = sier();
        let sd = SupportDatum::standard_s(&s);
        let psi0 = sd.psi_truncated(&sd, 0).unwrap();
        assert_eq!(psi0.values(), psi_oracle(&sd, &sd, 0).as_slice());
        assert_eq!(psi0.values(), &[0, 1]);
        assert_eq!(sd.psi_truncated(&sd, 10).unwrap(), SupportDatum::standard_t(&s));
        // far below the data, only Φ^a = everything constrains
        assert_eq!(sd.psi_truncated(&sd, -5).unwrap().values(), &[5, 6]);
        for space in crate::space::enumerate_spaces(3, 2) {
            let s = Arc::new(space);
            let data = enumerate_data(&s, -1, 1);
            for phi in &data {
                for theta in data.iter().step_by(3) {
                    let mut prev: Option<SupportDatum> = None;
                    for a in -3..=3 {
                        let psi = phi.psi_truncated(theta, a).unwrap();
                        assert_eq!(psi.values(), psi_oracle(phi, theta, a).as_slice());
                        if let Some(prev) = prev {
                            assert!(psi.is_contained_in(&prev));
                        }
                        prev = Some(psi);
                    }
                }
            }
        }
    }

    #[test]
    fn criterion_examples() {
        for space in [SpaceModel::point(), SpaceModel::sierpinski(), SpaceModel::chain3(), SpaceModel::v_space()] {
            let s = Arc::new(space);
            assert!(SupportDatum::standard_s(&s).check_t_criterion().holds());
            assert!(SupportDatum::standard_t(&s).check_t_criterion().holds());
        }
        let oco = datum(&sier(), &[0, 2]);
        let r = oco.check_t_criterion();
        assert!(!r.holds());
        assert!(!r.codim_jumps && !r.dual_convolution && !r.residuation && !r.level_inclusions);
        assert_eq!(r.witness, Some(Witness::Pair { generic: 0, special: 1 }));
        assert_eq!(oco.level_violation(SigmaConvention::Standard), Some(Witness::Level { n: 2, k: 0, point: 0 }));
    }

    #[test]
    fn level_round_trip() {
        for space in crate::space::enumerate_spaces(3, 3) {
            let s = Arc::new(space);
            for d in enumerate_data(&s, -2, 3) {
                let (first, levels) = d.levels();
                assert_eq!(SupportDatum::from_level_sets(&s, first, &levels).unwrap(), d);
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        let s = sier();
        // monotone pairs a ≤ b in a 3-value window
        assert_eq!(enumerate_data(&s, 0, 2).len(), 6);
        assert_eq!(enumerate_functions(&s, 0, 2, false).len(), 9);
    }
}
