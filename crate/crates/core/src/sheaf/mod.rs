//! Sheaves of finite-dimensional vector spaces on a finite space, stored as
//! poset representations: one stalk per point and a restriction matrix
//! `F_special → F_generic` for every strict specialization.

pub mod complex;
pub mod injective;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::linalg::{Field, Matrix};
use crate::space::{PointSet, SpaceModel};
use crate::support::FamilyOfSupports;

pub use complex::{ChainMap, Complex};
pub use injective::{InjComplex, Resolution};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SheafError {
    #[error("restriction `{0}` -> `{1}` has shape {2:?}, expected {3:?}")]
    Shape(String, String, (usize, usize), (usize, usize)),
    #[error("restrictions along `{0}` -> `{1}` -> `{2}` do not compose")]
    NotFunctorial(String, String, String),
    #[error("missing restriction `{0}` -> `{1}`")]
    MissingTransition(String, String),
    #[error("`{0}` does not specialize to `{1}`")]
    NotASpecialization(String, String),
    #[error("d∘d ≠ 0 at degree {0}, point `{1}`")]
    NotAComplex(i64, String),
    #[error("differential in degree {0} is not natural at `{1}` -> `{2}`")]
    NotNatural(i64, String, String),
    #[error("resolution exceeded its length cap of {0}")]
    ResolutionCapExceeded(usize),
    #[error("operands live on different spaces")]
    SpaceMismatch,
}

/// A sheaf on a finite space. Invariant: `res(p, q)` composes along chains.
#[derive(Clone, PartialEq)]
pub struct Sheaf<F: Field> {
    space: Arc<SpaceModel>,
    field: F,
    dims: Vec<usize>,
    /// keyed by `(special, generic)`
    res: BTreeMap<(usize, usize), Matrix<F>>,
}

impl<F: Field> fmt::Debug for Sheaf<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (x, d) in self.dims.iter().enumerate() {
            m.entry(&self.space.id(x), d);
        }
        m.finish()
    }
}

impl<F: Field> Sheaf<F> {
    pub fn zero(space: &Arc<SpaceModel>, field: &F) -> Self {
        Self::from_parts_unchecked(space, field, vec![0; space.len()], BTreeMap::new())
    }

    /// Fills in zero-shaped restrictions where either side vanishes.
    fn from_parts_unchecked(
        space: &Arc<SpaceModel>,
        field: &F,
        dims: Vec<usize>,
        mut res: BTreeMap<(usize, usize), Matrix<F>>,
    ) -> Self {
        for (g, s) in space.strict_pairs() {
            res.entry((s, g)).or_insert_with(|| Matrix::zeros(field, dims[g], dims[s]));
        }
        Sheaf { space: space.clone(), field: field.clone(), dims, res }
    }

    /// Builds a sheaf from restrictions along covering specializations
    /// `(special, generic)`. Longer restrictions are composed; any supplied
    /// non-cover restriction must agree with the composite.
    pub fn from_covers(
        space: &Arc<SpaceModel>,
        field: &F,
        dims: Vec<usize>,
        given: BTreeMap<(usize, usize), Matrix<F>>,
    ) -> Result<Self, SheafError> {
        assert_eq!(dims.len(), space.len());
        for (&(s, g), m) in &given {
            if s == g || !space.specializes(g, s) {
                return Err(SheafError::NotASpecialization(space.id(g).into(), space.id(s).into()));
            }
            if m.shape() != (dims[g], dims[s]) {
                return Err(SheafError::Shape(space.id(s).into(), space.id(g).into(), m.shape(), (dims[g], dims[s])));
            }
        }
        let mut res = BTreeMap::new();
        // process pairs by increasing codim gap so shorter composites exist first
        let mut pairs: Vec<(usize, usize)> = space.strict_pairs().collect();
        pairs.sort_by_key(|&(g, s)| space.codim(s) - space.codim(g));
        for (g, s) in pairs {
            let m = if space.is_cover(g, s) {
                match given.get(&(s, g)) {
                    Some(m) => m.clone(),
                    None if dims[g] == 0 || dims[s] == 0 => Matrix::zeros(field, dims[g], dims[s]),
                    None => return Err(SheafError::MissingTransition(space.id(s).into(), space.id(g).into())),
                }
            } else {
                let mid = space
                    .up(g)
                    .intersection(space.down(s))
                    .iter()
                    .find(|&r| r != g && r != s && space.is_cover(g, r))
                    .expect("a non-cover has an intermediate point");
                let m: &Matrix<F> = &res[&(mid, g)];
                m.mul(&res[&(s, mid)])
            };
            res.insert((s, g), m);
        }
        let sheaf = Sheaf { space: space.clone(), field: field.clone(), dims, res };
        for (&(s, g), m) in &given {
            if sheaf.res[&(s, g)] != *m {
                return Err(SheafError::NotFunctorial(space.id(s).into(), "…".into(), space.id(g).into()));
            }
        }
        sheaf.validate()?;
        Ok(sheaf)
    }

    /// `k` on a convex point set `s`, identity restrictions inside it.
    pub fn indicator(space: &Arc<SpaceModel>, field: &F, s: PointSet) -> Self {
        let dims: Vec<usize> = (0..space.len()).map(|x| s.contains(x) as usize).collect();
        let mut res = BTreeMap::new();
        for (g, sp) in space.strict_pairs() {
            if s.contains(g) && s.contains(sp) {
                res.insert((sp, g), Matrix::identity(field, 1));
            }
        }
        for (g, sp) in space.strict_pairs() {
            for r in space.up(g).intersection(space.down(sp)).iter() {
                assert!(!(s.contains(g) && s.contains(sp)) || s.contains(r), "indicator set must be convex");
            }
        }
        Self::from_parts_unchecked(space, field, dims, res)
    }

    /// The indecomposable injective `I_p`: `k` on the closure of `p`.
    pub fn injective(space: &Arc<SpaceModel>, field: &F, p: usize) -> Self {
        Self::indicator(space, field, space.up(p))
    }

    /// The constant sheaf `k_X`.
    pub fn constant(space: &Arc<SpaceModel>, field: &F) -> Self {
        Self::indicator(space, field, space.all_points())
    }

    /// `j_! k_U` for an open `u`.
    pub fn extension_by_zero(space: &Arc<SpaceModel>, field: &F, u: PointSet) -> Self {
        assert!(space.is_open(u));
        Self::indicator(space, field, u)
    }

    pub fn space(&self) -> &Arc<SpaceModel> {
        &self.space
    }
    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn dim(&self, x: usize) -> usize {
        self.dims[x]
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    /// Restriction `F_special → F_generic`; identity when the points agree.
    pub fn res(&self, special: usize, generic: usize) -> Matrix<F> {
        if special == generic {
            Matrix::identity(&self.field, self.dims[special])
        } else {
            self.res[&(special, generic)].clone()
        }
    }

    pub fn res_ref(&self, special: usize, generic: usize) -> &Matrix<F> {
        &self.res[&(special, generic)]
    }

    pub fn validate(&self) -> Result<(), SheafError> {
        let s = &self.space;
        for (&(sp, g), m) in &self.res {
            if m.shape() != (self.dims[g], self.dims[sp]) {
                return Err(SheafError::Shape(s.id(sp).into(), s.id(g).into(), m.shape(), (self.dims[g], self.dims[sp])));
            }
        }
        for (g, sp) in s.strict_pairs() {
            for r in s.up(g).intersection(s.down(sp)).iter().filter(|&r| r != g && r != sp) {
                if self.res[&(r, g)].mul(&self.res[&(sp, r)]) != self.res[&(sp, g)] {
                    return Err(SheafError::NotFunctorial(s.id(sp).into(), s.id(r).into(), s.id(g).into()));
                }
            }
        }
        Ok(())
    }

    /// The family generated by the points with nonzero stalk.
    pub fn support_family(&self) -> FamilyOfSupports {
        FamilyOfSupports::from_set(&self.space, self.support_points())
    }

    pub fn support_points(&self) -> PointSet {
        (0..self.space.len()).filter(|&x| self.dims[x] > 0).collect()
    }

    /// The subsheaf spanned at each point by the columns of `bases[x]`.
    /// The columns must be independent and stable under restriction.
    pub fn subsheaf(&self, bases: &[Matrix<F>]) -> (Sheaf<F>, SheafMorphism<F>) {
        let dims: Vec<usize> = bases.iter().map(|b| b.cols()).collect();
        let mut res = BTreeMap::new();
        for (g, sp) in self.space.strict_pairs() {
            let image = self.res[&(sp, g)].mul(&bases[sp]);
            let coords = bases[g].solve(&image).expect("subsheaf is stable under restriction");
            res.insert((sp, g), coords);
        }
        let sub = Sheaf { space: self.space.clone(), field: self.field.clone(), dims, res };
        debug_assert!(sub.validate().is_ok());
        (sub, SheafMorphism { comps: bases.to_vec() })
    }

    /// Sections supported in the closed set `z`: at `q`, the vectors whose
    /// restriction to every generization outside `z` vanishes.
    pub fn gamma(&self, z: PointSet) -> (Sheaf<F>, SheafMorphism<F>) {
        let s = &self.space;
        let bases: Vec<Matrix<F>> = (0..s.len())
            .map(|q| {
                if !z.contains(q) {
                    return Matrix::zeros(&self.field, self.dims[q], 0);
                }
                let outside: Vec<usize> = s.down(q).difference(z).iter().collect();
                if outside.is_empty() {
                    return Matrix::identity(&self.field, self.dims[q]);
                }
                let stacked = outside
                    .iter()
                    .map(|&g| self.res[&(q, g)].clone())
                    .reduce(|a, b| a.vstack(&b))
                    .expect("nonempty");
                stacked.kernel()
            })
            .collect();
        self.subsheaf(&bases)
    }

    pub fn gamma_family(&self, phi: &FamilyOfSupports) -> Sheaf<F> {
        self.gamma(phi.members()).0
    }

    /// Restriction to an open subspace.
    pub fn restrict(&self, sub: &Arc<SpaceModel>, embedding: &[usize]) -> Sheaf<F> {
        let dims = embedding.iter().map(|&x| self.dims[x]).collect();
        let mut res = BTreeMap::new();
        for (g, sp) in sub.strict_pairs() {
            res.insert((sp, g), self.res[&(embedding[sp], embedding[g])].clone());
        }
        Sheaf { space: sub.clone(), field: self.field.clone(), dims, res }
    }

    pub fn direct_sum(&self, other: &Sheaf<F>) -> Sheaf<F> {
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let mut res = BTreeMap::new();
        for (g, sp) in self.space.strict_pairs() {
            let a = &self.res[&(sp, g)];
            let b = &other.res[&(sp, g)];
            let z1 = Matrix::zeros(&self.field, a.rows(), b.cols());
            let z2 = Matrix::zeros(&self.field, b.rows(), a.cols());
            res.insert((sp, g), Matrix::block(a, &z1, &z2, b));
        }
        Sheaf { space: self.space.clone(), field: self.field.clone(), dims, res }
    }

    /// A basis of `Hom(self, target)`, each as per-point matrices.
    pub fn hom_basis(&self, target: &Sheaf<F>) -> Vec<SheafMorphism<F>> {
        let s = &self.space;
        let n = s.len();
        let mut offset = vec![0usize; n + 1];
        for q in 0..n {
            offset[q + 1] = offset[q] + target.dims[q] * self.dims[q];
        }
        let unknowns = offset[n];
        let f = &self.field;
        let mut eqs: Vec<Vec<F::Elem>> = Vec::new();
        // naturality G.res(sp,g) f_sp = f_g F.res(sp,g), entrywise
        for (g, sp) in s.strict_pairs().filter(|&(g, sp)| s.is_cover(g, sp)) {
            let gr = &target.res[&(sp, g)];
            let fr = &self.res[&(sp, g)];
            for i in 0..target.dims[g] {
                for j in 0..self.dims[sp] {
                    let mut row = vec![f.zero(); unknowns];
                    for k in 0..target.dims[sp] {
                        let idx = offset[sp] + k * self.dims[sp] + j;
                        row[idx] = f.add(&row[idx], gr.get(i, k));
                    }
                    for k in 0..self.dims[g] {
                        let idx = offset[g] + i * self.dims[g] + k;
                        row[idx] = f.sub(&row[idx], fr.get(k, j));
                    }
                    eqs.push(row);
                }
            }
        }
        let system = Matrix::from_rows(f, eqs.len(), unknowns, eqs.into_iter().flatten().collect());
        let kernel = system.kernel();
        (0..kernel.cols())
            .map(|c| {
                let comps = (0..n)
                    .map(|q| {
                        let data = (0..target.dims[q] * self.dims[q])
                            .map(|t| kernel.get(offset[q] + t, c).clone())
                            .collect();
                        Matrix::from_rows(f, target.dims[q], self.dims[q], data)
                    })
                    .collect();
                SheafMorphism { comps }
            })
            .collect()
    }

    /// A random morphism `self → target`.
    pub fn random_hom<R: Rng + ?Sized>(&self, target: &Sheaf<F>, rng: &mut R) -> SheafMorphism<F> {
        let basis = self.hom_basis(target);
        let mut out = SheafMorphism::zero(self, target);
        for b in &basis {
            let c = self.field.random(rng);
            out = out.add(&b.scale(&c));
        }
        out
    }

    /// A random sheaf: the kernel of a random map between sums of
    /// indecomposable injectives, with every stalk of dimension ≤ `max_dim`.
    pub fn random<R: Rng + ?Sized>(space: &Arc<SpaceModel>, field: &F, max_dim: usize, rng: &mut R) -> Sheaf<F> {
        let n = space.len();
        let count = rng.gen_range(0..=max_dim);
        let src: Vec<usize> = (0..count).map(|_| rng.gen_range(0..n)).collect();
        let tgt_count = rng.gen_range(0..=2usize);
        let tgt: Vec<usize> = (0..tgt_count).map(|_| rng.gen_range(0..n)).collect();
        let mut m = Matrix::zeros(field, tgt.len(), src.len());
        for (b, &lb) in tgt.iter().enumerate() {
            for (a, &la) in src.iter().enumerate() {
                if space.specializes(la, lb) {
                    m.set(b, a, field.random(rng));
                }
            }
        }
        let inj = InjComplex::new(space, field, 0, vec![src, tgt], vec![m]);
        let c = inj.to_complex();
        let (ker, _) = c.kernel_sheaf(0);
        ker
    }
}

/// Per-point matrices `F_x → G_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct SheafMorphism<F: Field> {
    pub comps: Vec<Matrix<F>>,
}

impl<F: Field> SheafMorphism<F> {
    pub fn zero(src: &Sheaf<F>, tgt: &Sheaf<F>) -> Self {
        SheafMorphism {
            comps: (0..src.space.len()).map(|q| Matrix::zeros(&src.field, tgt.dims[q], src.dims[q])).collect(),
        }
    }

    pub fn identity(f: &Sheaf<F>) -> Self {
        SheafMorphism { comps: f.dims.iter().map(|&d| Matrix::identity(&f.field, d)).collect() }
    }

    pub fn compose(&self, first: &SheafMorphism<F>) -> Self {
        SheafMorphism { comps: self.comps.iter().zip(&first.comps).map(|(a, b)| a.mul(b)).collect() }
    }

    pub fn add(&self, other: &SheafMorphism<F>) -> Self {
        SheafMorphism { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        SheafMorphism { comps: self.comps.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn neg(&self) -> Self {
        SheafMorphism { comps: self.comps.iter().map(|a| a.neg()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|m| m.is_zero())
    }

    /// Whether the matrices commute with restriction.
    pub fn is_natural(&self, src: &Sheaf<F>, tgt: &Sheaf<F>) -> bool {
        src.space.strict_pairs().all(|(g, sp)| {
            tgt.res[&(sp, g)].mul(&self.comps[sp]) == self.comps[g].mul(&src.res[&(sp, g)])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PrimeField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sier() -> Arc<SpaceModel> {
        Arc::new(SpaceModel::sierpinski())
    }

    #[test]
    fn standard_sheaves_on_sier() {
        let s = sier();
        let f = PrimeField::f2();
        let kx = Sheaf::injective(&s, &f, 1);
        assert_eq!(kx.dims(), &[0, 1]);
        let c = Sheaf::constant(&s, &f);
        assert_eq!(c, Sheaf::injective(&s, &f, 0));
        let j = Sheaf::extension_by_zero(&s, &f, PointSet::singleton(0));
        assert_eq!(j.dims(), &[1, 0]);
        for sh in [&kx, &c, &j] {
            sh.validate().unwrap();
        }
    }

    #[test]
    fn support_examples() {
        let s = sier();
        let f = PrimeField::f2();
        assert!(Sheaf::zero(&s, &f).support_family().members().is_empty());
        assert_eq!(Sheaf::injective(&s, &f, 1).support_family().members().bits(), 0b10);
        let j = Sheaf::extension_by_zero(&s, &f, PointSet::singleton(0));
        assert_eq!(j.support_family().members().bits(), 0b11);
    }

    #[test]
    fn gamma_examples() {
        let s = sier();
        let f = PrimeField::f2();
        let x = PointSet::singleton(1);
        let kx = Sheaf::injective(&s, &f, 1);
        assert_eq!(kx.gamma(x).0.dims(), &[0, 1]);
        assert!(Sheaf::constant(&s, &f).gamma(x).0.is_zero());
        let c = Sheaf::constant(&s, &f);
        assert_eq!(c.gamma(s.all_points()).0, c);
    }

    #[test]
    fn from_covers_composes_and_checks() {
        let c = Arc::new(SpaceModel::chain3());
        let f = PrimeField::new(3).unwrap();
        let mut given = BTreeMap::new();
        given.insert((1, 0), Matrix::from_i64_rows(&f, &[vec![2]], 1));
        given.insert((2, 1), Matrix::from_i64_rows(&f, &[vec![2]], 1));
        let sh = Sheaf::from_covers(&c, &f, vec![1, 1, 1], given.clone()).unwrap();
        assert_eq!(sh.res(2, 0), Matrix::from_i64_rows(&f, &[vec![1]], 1));
        given.insert((2, 0), Matrix::from_i64_rows(&f, &[vec![2]], 1));
        assert!(matches!(Sheaf::from_covers(&c, &f, vec![1, 1, 1], given), Err(SheafError::NotFunctorial(..))));
        let missing = Sheaf::from_covers(&c, &f, vec![1, 1, 1], BTreeMap::new());
        assert!(matches!(missing, Err(SheafError::MissingTransition(..))));
    }

    #[test]
    fn hom_basis_dimensions() {
        let s = sier();
        let f = PrimeField::f2();
        for p in 0..2 {
            let ip = Sheaf::injective(&s, &f, p);
            for src in [Sheaf::constant(&s, &f), Sheaf::injective(&s, &f, 1), Sheaf::extension_by_zero(&s, &f, PointSet::singleton(0))] {
                // Hom(F, I_p) is dual to the stalk at p
                assert_eq!(src.hom_basis(&ip).len(), src.dim(p));
                for m in src.hom_basis(&ip) {
                    assert!(m.is_natural(&src, &ip));
                }
            }
        }
    }

    #[test]
    fn random_sheaves_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = PrimeField::new(5).unwrap();
        for space in [SpaceModel::sierpinski(), SpaceModel::chain3(), SpaceModel::v_space()] {
            let s = Arc::new(space);
            for _ in 0..30 {
                let a = Sheaf::random(&s, &f, 3, &mut rng);
                a.validate().unwrap();
                assert!(a.dims().iter().all(|&d| d <= 3));
                let b = Sheaf::random(&s, &f, 3, &mut rng);
                let m = a.random_hom(&b, &mut rng);
                assert!(m.is_natural(&a, &b));
            }
        }
    }
}
