//! Bounded complexes of sheaves and chain maps.
//!
//! Shift convention: `M[s]^k = M^{k+s}` with differential `(−1)^s d`.
//! Cone convention: `Cone(f)^k = X^{k+1} ⊕ Y^k`, `d = [[−d_X, 0], [f, d_Y]]`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use super::{Sheaf, SheafError, SheafMorphism};
use crate::linalg::{Field, Matrix};
use crate::space::SpaceModel;

/// Terms in degrees `lo .. lo + terms.len()`; `d[i]` maps `terms[i]` to
/// `terms[i + 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex<F: Field> {
    space: Arc<SpaceModel>,
    field: F,
    lo: i64,
    terms: Vec<Sheaf<F>>,
    d: Vec<SheafMorphism<F>>,
}

impl<F: Field> Complex<F> {
    pub fn new(
        space: &Arc<SpaceModel>,
        field: &F,
        lo: i64,
        terms: Vec<Sheaf<F>>,
        d: Vec<SheafMorphism<F>>,
    ) -> Result<Self, SheafError> {
        assert_eq!(d.len(), terms.len().saturating_sub(1), "one differential between consecutive terms");
        let c = Complex { space: space.clone(), field: field.clone(), lo, terms, d };
        c.validate()?;
        Ok(c)
    }

    pub(crate) fn new_unchecked(
        space: &Arc<SpaceModel>,
        field: &F,
        lo: i64,
        terms: Vec<Sheaf<F>>,
        d: Vec<SheafMorphism<F>>,
    ) -> Self {
        debug_assert_eq!(d.len(), terms.len().saturating_sub(1));
        let c = Complex { space: space.clone(), field: field.clone(), lo, terms, d };
        debug_assert_eq!(c.validate(), Ok(()));
        c
    }

    pub fn zero(space: &Arc<SpaceModel>, field: &F) -> Self {
        Complex { space: space.clone(), field: field.clone(), lo: 0, terms: Vec::new(), d: Vec::new() }
    }

    /// `F` placed in degree `deg`.
    pub fn from_sheaf(sheaf: &Sheaf<F>, deg: i64) -> Self {
        Complex {
            space: sheaf.space().clone(),
            field: sheaf.field().clone(),
            lo: deg,
            terms: vec![sheaf.clone()],
            d: Vec::new(),
        }
    }

    pub fn space(&self) -> &Arc<SpaceModel> {
        &self.space
    }
    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn lo(&self) -> i64 {
        self.lo
    }
    /// One past the top degree.
    pub fn hi(&self) -> i64 {
        self.lo + self.terms.len() as i64
    }
    pub fn degrees(&self) -> std::ops::Range<i64> {
        self.lo..self.hi()
    }

    pub fn term(&self, k: i64) -> Option<&Sheaf<F>> {
        if k < self.lo {
            return None;
        }
        self.terms.get((k - self.lo) as usize)
    }

    pub fn term_or_zero(&self, k: i64) -> Sheaf<F> {
        self.term(k).cloned().unwrap_or_else(|| Sheaf::zero(&self.space, &self.field))
    }

    pub fn dim(&self, k: i64, q: usize) -> usize {
        self.term(k).map_or(0, |t| t.dim(q))
    }

    /// `d^k` at the point `q`, zero outside the stored range.
    pub fn diff(&self, k: i64, q: usize) -> Matrix<F> {
        if k >= self.lo {
            if let Some(m) = self.d.get((k - self.lo) as usize) {
                return m.comps[q].clone();
            }
        }
        Matrix::zeros(&self.field, self.dim(k + 1, q), self.dim(k, q))
    }

    pub fn diff_morphism(&self, k: i64) -> SheafMorphism<F> {
        SheafMorphism { comps: (0..self.space.len()).map(|q| self.diff(k, q)).collect() }
    }

    /// Restriction on the degree-`k` term, zero-shaped outside the range.
    pub fn res(&self, k: i64, special: usize, generic: usize) -> Matrix<F> {
        match self.term(k) {
            Some(t) => t.res(special, generic),
            None => Matrix::zeros(&self.field, 0, 0),
        }
    }

    pub fn validate(&self) -> Result<(), SheafError> {
        let s = &self.space;
        for t in &self.terms {
            t.validate()?;
        }
        for (i, m) in self.d.iter().enumerate() {
            let k = self.lo + i as i64;
            for q in 0..s.len() {
                if m.comps[q].shape() != (self.dim(k + 1, q), self.dim(k, q)) {
                    return Err(SheafError::Shape(
                        s.id(q).into(),
                        s.id(q).into(),
                        m.comps[q].shape(),
                        (self.dim(k + 1, q), self.dim(k, q)),
                    ));
                }
            }
            for (g, sp) in s.strict_pairs() {
                if self.terms[i + 1].res_ref(sp, g).mul(&m.comps[sp]) != m.comps[g].mul(self.terms[i].res_ref(sp, g)) {
                    return Err(SheafError::NotNatural(k, s.id(sp).into(), s.id(g).into()));
                }
            }
        }
        for k in self.lo..self.hi() - 2 {
            for q in 0..s.len() {
                if !self.diff(k + 1, q).mul(&self.diff(k, q)).is_zero() {
                    return Err(SheafError::NotAComplex(k, s.id(q).into()));
                }
            }
        }
        Ok(())
    }

    /// Drops zero terms at both ends.
    pub fn trimmed(&self) -> Self {
        let first = self.terms.iter().position(|t| !t.is_zero());
        let Some(first) = first else {
            return Complex::zero(&self.space, &self.field);
        };
        let last = self.terms.iter().rposition(|t| !t.is_zero()).expect("nonempty");
        Complex {
            space: self.space.clone(),
            field: self.field.clone(),
            lo: self.lo + first as i64,
            terms: self.terms[first..=last].to_vec(),
            d: self.d[first..last].to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.is_zero())
    }

    /// `M[s]`.
    pub fn shift(&self, s: i64) -> Self {
        let d = if s.rem_euclid(2) == 1 { self.d.iter().map(|m| m.neg()).collect() } else { self.d.clone() };
        Complex { space: self.space.clone(), field: self.field.clone(), lo: self.lo - s, terms: self.terms.clone(), d }
    }

    /// `dim H^k(M)_q` for every point.
    pub fn cohomology_dims(&self, k: i64) -> Vec<usize> {
        (0..self.space.len())
            .map(|q| {
                let n = self.dim(k, q);
                n - self.diff(k, q).rank() - self.diff(k - 1, q).rank()
            })
            .collect()
    }

    /// Nonzero cohomology stalk dimensions by degree.
    pub fn cohomology_table(&self) -> BTreeMap<i64, Vec<usize>> {
        self.degrees()
            .map(|k| (k, self.cohomology_dims(k)))
            .filter(|(_, v)| v.iter().any(|&d| d > 0))
            .collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.cohomology_table().is_empty()
    }

    pub fn lowest_cohomology(&self) -> Option<i64> {
        self.cohomology_table().keys().next().copied()
    }

    pub fn highest_cohomology(&self) -> Option<i64> {
        self.cohomology_table().keys().next_back().copied()
    }

    /// The cohomology sheaf `H^k(M)`, with restrictions induced on
    /// chosen complements of the boundaries.
    pub fn cohomology_sheaf(&self, k: i64) -> Sheaf<F> {
        let s = &self.space;
        let n = s.len();
        let mut bounds = Vec::with_capacity(n);
        let mut reps = Vec::with_capacity(n);
        for q in 0..n {
            let z = self.diff(k, q).kernel();
            let b = self.diff(k - 1, q).image();
            let idx = Matrix::extend_basis(&b, &z);
            reps.push(z.select_cols(&idx));
            bounds.push(b);
        }
        let dims: Vec<usize> = reps.iter().map(|r| r.cols()).collect();
        let mut res = BTreeMap::new();
        for (g, sp) in s.strict_pairs() {
            let v = self.res(k, sp, g).mul(&reps[sp]);
            let basis = bounds[g].hstack(&reps[g]);
            let x = basis.solve(&v).expect("cycles restrict to cycles");
            let rows: Vec<usize> = (bounds[g].cols()..basis.cols()).collect();
            res.insert((sp, g), x.select_rows(&rows));
        }
        let h = Sheaf { space: s.clone(), field: self.field.clone(), dims, res };
        debug_assert_eq!(h.validate(), Ok(()));
        h
    }

    /// `ker d^k` as a subsheaf of `M^k`.
    pub fn kernel_sheaf(&self, k: i64) -> (Sheaf<F>, SheafMorphism<F>) {
        let t = self.term_or_zero(k);
        let bases: Vec<Matrix<F>> = (0..self.space.len()).map(|q| self.diff(k, q).kernel()).collect();
        t.subsheaf(&bases)
    }

    /// Smart truncation `τ^{≤n}` with its inclusion.
    pub fn truncate_leq(&self, n: i64) -> (Complex<F>, ChainMap<F>) {
        if n < self.lo {
            let z = Complex::zero(&self.space, &self.field);
            let map = ChainMap::zero();
            return (z, map);
        }
        if n >= self.hi() - 1 {
            return (self.clone(), ChainMap::identity(self));
        }
        let top = (n - self.lo) as usize;
        let (ker, incl) = self.kernel_sheaf(n);
        let mut terms = self.terms[..top].to_vec();
        terms.push(ker);
        let mut d = self.d[..top.saturating_sub(1)].to_vec();
        if top > 0 {
            // the differential into degree n factors through the kernel
            let prev = &self.d[top - 1];
            let comps = (0..self.space.len())
                .map(|q| incl.comps[q].solve(&prev.comps[q]).expect("boundaries are cycles"))
                .collect();
            d.push(SheafMorphism { comps });
        }
        let sub = Complex::new_unchecked(&self.space, &self.field, self.lo, terms, d);
        let mut comps: Vec<SheafMorphism<F>> = self.terms[..top].iter().map(SheafMorphism::identity).collect();
        comps.push(incl);
        let map = ChainMap { lo: self.lo, comps };
        (sub, map)
    }

    /// Smart truncation `τ^{≥n}` with its projection.
    pub fn truncate_geq(&self, n: i64) -> (Complex<F>, ChainMap<F>) {
        // τ^{≥n} M = Cone(τ^{≤n−1} M → M) up to quasi-isomorphism
        let (low, incl) = self.truncate_leq(n - 1);
        let cone = Complex::cone(&incl, &low, self);
        let map = ChainMap::cone_inclusion(&low, self);
        (cone, map)
    }

    /// `Cone(f: X → Y)`.
    pub fn cone(f: &ChainMap<F>, x: &Complex<F>, y: &Complex<F>) -> Complex<F> {
        let space = &x.space;
        let field = &x.field;
        let lo = (x.lo - 1).min(y.lo);
        let hi = (x.hi() - 1).max(y.hi());
        if x.terms.is_empty() {
            return y.clone();
        }
        if y.terms.is_empty() {
            return x.shift(1);
        }
        let terms: Vec<Sheaf<F>> =
            (lo..hi).map(|k| x.term_or_zero(k + 1).direct_sum(&y.term_or_zero(k))).collect();
        let d = (lo..hi - 1)
            .map(|k| {
                let comps = (0..space.len())
                    .map(|q| {
                        Matrix::block(
                            &x.diff(k + 1, q).neg(),
                            &Matrix::zeros(field, x.dim(k + 2, q), y.dim(k, q)),
                            &f.component(k + 1, q, x, y),
                            &y.diff(k, q),
                        )
                    })
                    .collect();
                SheafMorphism { comps }
            })
            .collect();
        Complex::new_unchecked(space, field, lo, terms, d)
    }

    /// Restriction to an open subspace.
    pub fn restrict(&self, sub: &Arc<SpaceModel>, embedding: &[usize]) -> Complex<F> {
        let terms = self.terms.iter().map(|t| t.restrict(sub, embedding)).collect();
        let d = self
            .d
            .iter()
            .map(|m| SheafMorphism { comps: embedding.iter().map(|&x| m.comps[x].clone()).collect() })
            .collect();
        Complex { space: sub.clone(), field: self.field.clone(), lo: self.lo, terms, d }
    }

    /// A random complex with terms in degrees `lo..=hi`, built from the top
    /// down: each differential is a random map into the kernel of the next.
    pub fn random<R: Rng + ?Sized>(
        space: &Arc<SpaceModel>,
        field: &F,
        lo: i64,
        hi: i64,
        max_dim: usize,
        rng: &mut R,
    ) -> Complex<F> {
        let len = (hi - lo + 1) as usize;
        let terms: Vec<Sheaf<F>> = (0..len).map(|_| Sheaf::random(space, field, max_dim, rng)).collect();
        let mut d: Vec<SheafMorphism<F>> = Vec::new();
        for i in (0..len.saturating_sub(1)).rev() {
            let (ker, incl) = if i + 1 == len - 1 {
                let t = &terms[i + 1];
                (t.clone(), SheafMorphism::identity(t))
            } else {
                let bases: Vec<Matrix<F>> = (0..space.len()).map(|q| d[0].comps[q].kernel()).collect();
                terms[i + 1].subsheaf(&bases)
            };
            let m = terms[i].random_hom(&ker, rng);
            d.insert(0, incl.compose(&m));
        }
        Complex::new_unchecked(space, field, lo, terms, d)
    }

    /// Zero-extension of `terms` to a larger degree range, for aligned
    /// componentwise constructions.
    pub fn pad(&self, lo: i64, hi: i64) -> Complex<F> {
        let lo = lo.min(self.lo);
        let hi = hi.max(self.hi());
        let terms: Vec<Sheaf<F>> = (lo..hi).map(|k| self.term_or_zero(k)).collect();
        let d = (lo..hi - 1).map(|k| self.diff_morphism(k)).collect();
        Complex { space: self.space.clone(), field: self.field.clone(), lo, terms, d }
    }
}

/// A degreewise family of sheaf morphisms; degrees outside `lo..` are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainMap<F: Field> {
    pub lo: i64,
    pub comps: Vec<SheafMorphism<F>>,
}

impl<F: Field> ChainMap<F> {
    /// The zero map; components are implicit, so no shapes are needed.
    pub fn zero() -> Self {
        ChainMap { lo: 0, comps: Vec::new() }
    }

    pub fn identity(c: &Complex<F>) -> Self {
        ChainMap { lo: c.lo, comps: c.terms.iter().map(SheafMorphism::identity).collect() }
    }

    pub fn get(&self, k: i64) -> Option<&SheafMorphism<F>> {
        if k < self.lo {
            return None;
        }
        self.comps.get((k - self.lo) as usize)
    }

    /// The matrix at degree `k` and point `q`, zero-shaped when absent.
    pub fn component(&self, k: i64, q: usize, src: &Complex<F>, tgt: &Complex<F>) -> Matrix<F> {
        match self.get(k) {
            Some(m) if m.comps[q].shape() == (tgt.dim(k, q), src.dim(k, q)) => m.comps[q].clone(),
            Some(m) => {
                debug_assert!(m.comps[q].is_zero(), "component shape mismatch at degree {k}");
                Matrix::zeros(&src.field, tgt.dim(k, q), src.dim(k, q))
            }
            None => Matrix::zeros(&src.field, tgt.dim(k, q), src.dim(k, q)),
        }
    }

    /// `self ∘ first`, where `first: a → b` and `self: b → c`.
    pub fn compose(&self, first: &ChainMap<F>, a: &Complex<F>, b: &Complex<F>, c: &Complex<F>) -> ChainMap<F> {
        let lo = a.lo;
        let comps = a
            .degrees()
            .map(|k| SheafMorphism {
                comps: (0..a.space.len())
                    .map(|q| self.component(k, q, b, c).mul(&first.component(k, q, a, b)))
                    .collect(),
            })
            .collect();
        ChainMap { lo, comps }
    }

    pub fn is_chain_map(&self, src: &Complex<F>, tgt: &Complex<F>) -> bool {
        let s = &src.space;
        let lo = src.lo.min(tgt.lo) - 1;
        let hi = src.hi().max(tgt.hi()) + 1;
        for k in lo..hi {
            for q in 0..s.len() {
                let lhs = tgt.diff(k, q).mul(&self.component(k, q, src, tgt));
                let rhs = self.component(k + 1, q, src, tgt).mul(&src.diff(k, q));
                if lhs != rhs {
                    return false;
                }
            }
            if let (Some(a), Some(b)) = (src.term(k), tgt.term(k)) {
                for (g, sp) in s.strict_pairs() {
                    let f = |q| self.component(k, q, src, tgt);
                    if b.res_ref(sp, g).mul(&f(sp)) != f(g).mul(a.res_ref(sp, g)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether the induced maps on cohomology stalks are isomorphisms,
    /// checked as acyclicity of the cone.
    pub fn is_quasi_isomorphism(&self, src: &Complex<F>, tgt: &Complex<F>) -> bool {
        Complex::cone(self, src, tgt).is_acyclic()
    }

    /// `Y → Cone(f: X → Y)`.
    pub fn cone_inclusion(x: &Complex<F>, y: &Complex<F>) -> ChainMap<F> {
        if x.terms.is_empty() {
            return ChainMap::identity(y);
        }
        let comps = y
            .degrees()
            .map(|k| SheafMorphism {
                comps: (0..y.space.len())
                    .map(|q| Matrix::zeros(&y.field, x.dim(k + 1, q), y.dim(k, q)).vstack(&Matrix::identity(&y.field, y.dim(k, q))))
                    .collect(),
            })
            .collect();
        ChainMap { lo: y.lo, comps }
    }

    /// `Cone(f: X → Y)[−1] → X`, the projection onto the first summand.
    pub fn cocone_projection(x: &Complex<F>, y: &Complex<F>) -> ChainMap<F> {
        if x.terms.is_empty() {
            return ChainMap { lo: 0, comps: Vec::new() };
        }
        if y.terms.is_empty() {
            return ChainMap::identity(x);
        }
        let comps = x
            .degrees()
            .map(|k| SheafMorphism {
                comps: (0..x.space.len())
                    .map(|q| Matrix::identity(&x.field, x.dim(k, q)).hstack(&Matrix::zeros(&x.field, x.dim(k, q), y.dim(k - 1, q))))
                    .collect(),
            })
            .collect();
        ChainMap { lo: x.lo, comps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PrimeField;
    use crate::space::PointSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sier() -> Arc<SpaceModel> {
        Arc::new(SpaceModel::sierpinski())
    }

    #[test]
    fn identity_complex_is_acyclic() {
        let s = sier();
        let f = PrimeField::f2();
        let k = Sheaf::constant(&s, &f);
        let c = Complex::new(&s, &f, 0, vec![k.clone(), k.clone()], vec![SheafMorphism::identity(&k)]).unwrap();
        assert!(c.is_acyclic());
        assert!(c.cohomology_sheaf(0).is_zero() && c.cohomology_sheaf(1).is_zero());
        let single = Complex::from_sheaf(&k, 0);
        assert_eq!(single.cohomology_sheaf(0), k);
    }

    #[test]
    fn cone_of_extension_by_zero() {
        let s = sier();
        let f = PrimeField::f2();
        let j = Sheaf::extension_by_zero(&s, &f, PointSet::singleton(0));
        let k = Sheaf::constant(&s, &f);
        let incl = SheafMorphism { comps: vec![Matrix::identity(&f, 1), Matrix::zeros(&f, 1, 0)] };
        assert!(incl.is_natural(&j, &k));
        let x = Complex::from_sheaf(&j, 0);
        let y = Complex::from_sheaf(&k, 0);
        let map = ChainMap { lo: 0, comps: vec![incl] };
        assert!(map.is_chain_map(&x, &y));
        let cone = Complex::cone(&map, &x, &y);
        let table = cone.cohomology_table();
        assert_eq!(table, BTreeMap::from([(0, vec![0, 1])]));
        assert_eq!(cone.cohomology_sheaf(0).dims(), &[0, 1]);
    }

    #[test]
    fn bad_complex_rejected() {
        let s = sier();
        let f = PrimeField::f2();
        let k = Sheaf::constant(&s, &f);
        let id = SheafMorphism::identity(&k);
        let err = Complex::new(&s, &f, 0, vec![k.clone(), k.clone(), k.clone()], vec![id.clone(), id]);
        assert!(matches!(err, Err(SheafError::NotAComplex(0, _))));
    }

    #[test]
    fn random_complexes_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = PrimeField::new(3).unwrap();
        for space in [SpaceModel::sierpinski(), SpaceModel::chain3(), SpaceModel::v_space()] {
            let s = Arc::new(space);
            for _ in 0..20 {
                let c = Complex::random(&s, &f, -2, 2, 3, &mut rng);
                c.validate().unwrap();
                let (t, incl) = c.truncate_leq(0);
                assert!(incl.is_chain_map(&t, &c));
                for k in -2..=0 {
                    assert_eq!(t.cohomology_dims(k), c.cohomology_dims(k));
                }
                assert!(t.cohomology_table().keys().all(|&k| k <= 0));
                let (u, proj) = c.truncate_geq(1);
                assert!(proj.is_chain_map(&c, &u));
                for k in -3..=3 {
                    let expect = if k >= 1 { c.cohomology_dims(k) } else { vec![0; s.len()] };
                    assert_eq!(u.cohomology_dims(k), expect);
                }
                for k in -3..=3 {
                    let h = c.cohomology_sheaf(k);
                    assert_eq!(h.dims(), c.cohomology_dims(k).as_slice());
                }
            }
        }
    }

    #[test]
    fn shift_bookkeeping() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = PrimeField::f2();
        let s = Arc::new(SpaceModel::chain3());
        let c = Complex::random(&s, &f, -1, 1, 2, &mut rng);
        let sh = c.shift(2);
        for k in -3..3 {
            assert_eq!(sh.cohomology_dims(k - 2), c.cohomology_dims(k));
        }
        sh.validate().unwrap();
    }
}
