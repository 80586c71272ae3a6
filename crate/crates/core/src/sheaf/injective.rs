//! Complexes of injective sheaves, injective resolutions and the derived
//! functors computed from them.
//!
//! Every injective here is a finite sum of indecomposables `I_p` (`k` on the
//! closure of `p`). `Hom(I_a, I_b)` is `k` when `a ⤳ b` and zero otherwise,
//! so a map between sums is a scalar matrix whose entry `(b, a)` may be
//! nonzero only when `label(a) ⤳ label(b)`. `Hom(F, I_p)` is the dual of the
//! stalk `F_p`, so a map into a sum of indecomposables is one functional per
//! summand.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::Rng;

use super::{ChainMap, Complex, Sheaf, SheafError, SheafMorphism};
use crate::linalg::{Field, Matrix};
use crate::space::{PointSet, SpaceModel};

/// A bounded complex of sums of indecomposable injectives. Degree `lo + i`
/// has summands labelled `labels[i]`; `d[i]` has shape
/// `labels[i + 1].len() × labels[i].len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct InjComplex<F: Field> {
    space: Arc<SpaceModel>,
    field: F,
    lo: i64,
    labels: Vec<Vec<usize>>,
    d: Vec<Matrix<F>>,
}

impl<F: Field> InjComplex<F> {
    pub fn new(space: &Arc<SpaceModel>, field: &F, lo: i64, labels: Vec<Vec<usize>>, d: Vec<Matrix<F>>) -> Self {
        assert_eq!(d.len(), labels.len().saturating_sub(1));
        let c = InjComplex { space: space.clone(), field: field.clone(), lo, labels, d };
        debug_assert!(c.is_valid());
        c
    }

    fn is_valid(&self) -> bool {
        let shapes = self.d.iter().enumerate().all(|(i, m)| m.shape() == (self.labels[i + 1].len(), self.labels[i].len()));
        let labelled = self.d.iter().enumerate().all(|(i, m)| {
            (0..m.rows()).all(|b| {
                (0..m.cols()).all(|a| {
                    self.field.is_zero(m.get(b, a)) || self.space.specializes(self.labels[i][a], self.labels[i + 1][b])
                })
            })
        });
        let square = self.d.windows(2).all(|w| w[1].mul(&w[0]).is_zero());
        shapes && labelled && square
    }

    pub fn space(&self) -> &Arc<SpaceModel> {
        &self.space
    }
    pub fn lo(&self) -> i64 {
        self.lo
    }
    pub fn hi(&self) -> i64 {
        self.lo + self.labels.len() as i64
    }

    pub fn labels(&self, k: i64) -> &[usize] {
        if k < self.lo {
            return &[];
        }
        self.labels.get((k - self.lo) as usize).map_or(&[], |v| v.as_slice())
    }

    /// Scalar matrix of `d^k`, zero-shaped outside the range.
    pub fn diff(&self, k: i64) -> Matrix<F> {
        if k >= self.lo {
            if let Some(m) = self.d.get((k - self.lo) as usize) {
                return m.clone();
            }
        }
        Matrix::zeros(&self.field, self.labels(k + 1).len(), self.labels(k).len())
    }

    /// Number of summands in each degree.
    pub fn summand_count(&self) -> usize {
        self.labels.iter().map(|v| v.len()).sum()
    }

    /// Summands of degree `k` whose label specializes to `q`: these span
    /// the stalk at `q`.
    pub fn stalk_indices(&self, k: i64, q: usize) -> Vec<usize> {
        self.labels(k).iter().enumerate().filter(|&(_, &l)| self.space.specializes(l, q)).map(|(i, _)| i).collect()
    }

    /// The underlying complex of sheaves.
    pub fn to_complex(&self) -> Complex<F> {
        let s = &self.space;
        let n = s.len();
        let degrees: Vec<i64> = (self.lo..self.hi()).collect();
        let stalks: Vec<Vec<Vec<usize>>> =
            degrees.iter().map(|&k| (0..n).map(|q| self.stalk_indices(k, q)).collect()).collect();
        let terms: Vec<Sheaf<F>> = stalks
            .iter()
            .map(|st| {
                let dims = st.iter().map(|v| v.len()).collect();
                let mut res = BTreeMap::new();
                for (g, sp) in s.strict_pairs() {
                    let mut m = Matrix::zeros(&self.field, st[g].len(), st[sp].len());
                    for (r, idx) in st[g].iter().enumerate() {
                        let c = st[sp].iter().position(|x| x == idx).expect("generic stalk is a sub-sum");
                        m.set(r, c, self.field.one());
                    }
                    res.insert((sp, g), m);
                }
                Sheaf { space: s.clone(), field: self.field.clone(), dims, res }
            })
            .collect();
        let d = self
            .d
            .iter()
            .enumerate()
            .map(|(i, m)| SheafMorphism { comps: (0..n).map(|q| m.submatrix(&stalks[i + 1][q], &stalks[i][q])).collect() })
            .collect();
        Complex::new_unchecked(s, &self.field, self.lo, terms, d)
    }

    /// `Γ_Z`: the summands labelled inside the closed set `z`, with the
    /// kept indices per degree.
    pub fn select(&self, z: PointSet) -> (InjComplex<F>, Vec<Vec<usize>>) {
        let keep: Vec<Vec<usize>> = self
            .labels
            .iter()
            .map(|ls| ls.iter().enumerate().filter(|&(_, &l)| z.contains(l)).map(|(i, _)| i).collect())
            .collect();
        let labels = keep.iter().zip(&self.labels).map(|(k, ls)| k.iter().map(|&i| ls[i]).collect()).collect();
        let d = self.d.iter().enumerate().map(|(i, m)| m.submatrix(&keep[i + 1], &keep[i])).collect();
        (InjComplex::new(&self.space, &self.field, self.lo, labels, d), keep)
    }

    /// Reinterprets labels on a larger space via `embedding`.
    pub fn relabel(&self, target: &Arc<SpaceModel>, embedding: &[usize]) -> InjComplex<F> {
        let labels = self.labels.iter().map(|ls| ls.iter().map(|&l| embedding[l]).collect()).collect();
        InjComplex::new(target, &self.field, self.lo, labels, self.d.clone())
    }

    /// Restriction to an open subspace: summands labelled outside it vanish.
    pub fn restrict(&self, sub: &Arc<SpaceModel>, embedding: &[usize]) -> InjComplex<F> {
        let u: PointSet = embedding.iter().copied().collect();
        let (kept, _) = self.select_any(u);
        let back: HashMap<usize, usize> = embedding.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let labels = kept.labels.iter().map(|ls| ls.iter().map(|l| back[l]).collect()).collect();
        InjComplex::new(sub, &self.field, self.lo, labels, kept.d)
    }

    /// Like `select`, without requiring the set to be closed. Open sets
    /// keep a quotient complex rather than a subcomplex.
    fn select_any(&self, z: PointSet) -> (InjComplex<F>, Vec<Vec<usize>>) {
        let keep: Vec<Vec<usize>> = self
            .labels
            .iter()
            .map(|ls| ls.iter().enumerate().filter(|&(_, &l)| z.contains(l)).map(|(i, _)| i).collect())
            .collect();
        let labels = keep.iter().zip(&self.labels).map(|(k, ls)| k.iter().map(|&i| ls[i]).collect()).collect();
        let d = self.d.iter().enumerate().map(|(i, m)| m.submatrix(&keep[i + 1], &keep[i])).collect();
        (InjComplex { space: self.space.clone(), field: self.field.clone(), lo: self.lo, labels, d }, keep)
    }

    /// Cancels every invertible entry between equally labelled summands,
    /// updating `aug` so it stays a quasi-isomorphism into the result.
    pub fn minimize(&mut self, mut aug: Option<(&mut Augmentation<F>, &Complex<F>)>) {
        loop {
            let found = self.d.iter().enumerate().find_map(|(i, m)| {
                (0..m.rows()).find_map(|b| {
                    (0..m.cols()).find_map(|a| {
                        (self.labels[i][a] == self.labels[i + 1][b] && !self.field.is_zero(m.get(b, a))).then_some((i, a, b))
                    })
                })
            });
            let Some((i, a, b)) = found else { break };
            if let Some((aug, src)) = aug.as_mut() {
                let m = &self.d[i];
                let phi_inv = self.field.inv(m.get(b, a)).expect("nonzero");
                let k = self.lo + i as i64;
                let lb = self.labels[i + 1][b];
                let row_b = aug.rows[i + 1][b].clone();
                for y in 0..m.rows() {
                    if y == b || self.field.is_zero(m.get(y, a)) {
                        continue;
                    }
                    let coeff = self.field.neg(&self.field.mul(m.get(y, a), &phi_inv));
                    let ly = self.labels[i + 1][y];
                    let moved = row_b.mul(&src.res(k + 1, ly, lb)).scale(&coeff);
                    aug.rows[i + 1][y] = aug.rows[i + 1][y].add(&moved);
                }
                aug.rows[i].remove(a);
                aug.rows[i + 1].remove(b);
            }
            self.eliminate(i, a, b);
        }
        debug_assert!(self.is_valid());
    }

    fn eliminate(&mut self, i: usize, a: usize, b: usize) {
        let f = self.field.clone();
        let m = &mut self.d[i];
        let phi_inv = f.inv(m.get(b, a)).expect("nonzero");
        for y in 0..m.rows() {
            if y == b {
                continue;
            }
            let c = m.get(y, a).clone();
            if !f.is_zero(&c) {
                m.add_row_multiple(y, b, &f.neg(&f.mul(&c, &phi_inv)));
            }
        }
        self.d[i] = self.d[i].remove_row(b).remove_col(a);
        if i > 0 {
            self.d[i - 1] = self.d[i - 1].remove_row(a);
        }
        if i + 1 < self.d.len() {
            self.d[i + 1] = self.d[i + 1].remove_col(b);
        }
        self.labels[i].remove(a);
        self.labels[i + 1].remove(b);
    }

    /// No two equally labelled summands are joined by a nonzero entry.
    pub fn is_minimal(&self) -> bool {
        self.d.iter().enumerate().all(|(i, m)| {
            (0..m.rows()).all(|b| (0..m.cols()).all(|a| self.labels[i][a] != self.labels[i + 1][b] || self.field.is_zero(m.get(b, a))))
        })
    }

    /// Drops empty degrees at both ends.
    pub fn trimmed(&self) -> InjComplex<F> {
        let Some(first) = self.labels.iter().position(|l| !l.is_empty()) else {
            return InjComplex { space: self.space.clone(), field: self.field.clone(), lo: 0, labels: vec![], d: vec![] };
        };
        let last = self.labels.iter().rposition(|l| !l.is_empty()).expect("nonempty");
        InjComplex {
            space: self.space.clone(),
            field: self.field.clone(),
            lo: self.lo + first as i64,
            labels: self.labels[first..=last].to_vec(),
            d: self.d[first..last].to_vec(),
        }
    }
}

/// A map from a complex `M` into an injective complex, as one functional on
/// `M^k_{label}` (a `1 × dim` matrix) per target summand.
#[derive(Clone, Debug, PartialEq)]
pub struct Augmentation<F: Field> {
    pub lo: i64,
    pub rows: Vec<Vec<Matrix<F>>>,
}

impl<F: Field> Augmentation<F> {
    /// The chain map `M → inj.to_complex()`.
    pub fn to_chain_map(&self, src: &Complex<F>, inj: &InjComplex<F>) -> ChainMap<F> {
        let n = src.space().len();
        let comps = (inj.lo()..inj.hi())
            .map(|k| {
                let rows = &self.rows[(k - self.lo) as usize];
                let labels = inj.labels(k);
                SheafMorphism {
                    comps: (0..n)
                        .map(|q| {
                            let idx = inj.stalk_indices(k, q);
                            let mut m = Matrix::zeros(src.field(), idx.len(), src.dim(k, q));
                            for (r, &i) in idx.iter().enumerate() {
                                let row = rows[i].mul(&src.res(k, q, labels[i]));
                                for c in 0..row.cols() {
                                    m.set(r, c, row.get(0, c).clone());
                                }
                            }
                            m
                        })
                        .collect(),
                }
            })
            .collect();
        ChainMap { lo: inj.lo(), comps }
    }
}

/// An injective replacement with its quasi-isomorphism from the source.
#[derive(Clone, Debug)]
pub struct Resolution<F: Field> {
    pub inj: InjComplex<F>,
    pub aug: Augmentation<F>,
}

impl<F: Field> Resolution<F> {
    pub fn chain_map(&self, src: &Complex<F>) -> ChainMap<F> {
        self.aug.to_chain_map(src, &self.inj)
    }
}

/// Strict chains `c_0, c_1, …` with each `c_{i+1} ⤳ c_i` (getting more
/// generic), grouped by length.
fn chains(space: &SpaceModel) -> Vec<Vec<Vec<usize>>> {
    let mut by_len: Vec<Vec<Vec<usize>>> = vec![(0..space.len()).map(|x| vec![x]).collect()];
    loop {
        let next: Vec<Vec<usize>> = by_len
            .last()
            .expect("nonempty")
            .iter()
            .flat_map(|c| {
                let last = *c.last().expect("nonempty");
                space.down(last).iter().filter(move |&g| g != last).map(move |g| {
                    let mut c2 = c.clone();
                    c2.push(g);
                    c2
                })
            })
            .collect();
        if next.is_empty() {
            return by_len;
        }
        by_len.push(next);
    }
}

/// The canonical resolution by chains: degree `a` of the resolution of a
/// sheaf `F` is the sum over chains `c_0, …, c_a` of `I_{c_0} ⊗ F_{c_a}`. For a
/// complex this is the total complex, with `D = δ + (−1)^a d_M`.
pub fn chain_resolution<F: Field>(m: &Complex<F>) -> Result<Resolution<F>, SheafError> {
    let space = m.space();
    let field = m.field();
    let all = chains(space);
    if all.len() > space.len().max(1) {
        return Err(SheafError::ResolutionCapExceeded(space.len()));
    }
    let height = all.len() as i64;
    let m_trim = m;
    if m_trim.degrees().is_empty() {
        let inj = InjComplex::new(space, field, 0, vec![], vec![]);
        return Ok(Resolution { inj, aug: Augmentation { lo: 0, rows: vec![] } });
    }
    let lo = m_trim.lo();
    let hi = m_trim.hi() - 1 + height; // exclusive
    // summand index: (b, a, chain index, j)
    let mut index: Vec<HashMap<(i64, usize, usize, usize), usize>> = Vec::new();
    let mut labels: Vec<Vec<usize>> = Vec::new();
    for t in lo..hi {
        let mut idx = HashMap::new();
        let mut ls = Vec::new();
        for b in m_trim.degrees() {
            let a = t - b;
            if a < 0 || a >= height {
                continue;
            }
            for (ci, c) in all[a as usize].iter().enumerate() {
                for j in 0..m_trim.dim(b, *c.last().expect("nonempty")) {
                    idx.insert((b, a as usize, ci, j), ls.len());
                    ls.push(c[0]);
                }
            }
        }
        index.push(idx);
        labels.push(ls);
    }
    let chain_pos: Vec<HashMap<Vec<usize>, usize>> =
        all.iter().map(|cs| cs.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect()).collect();
    let mut d = Vec::new();
    for t in lo..hi - 1 {
        let ti = (t - lo) as usize;
        let mut mat = Matrix::zeros(field, labels[ti + 1].len(), labels[ti].len());
        for (&(b, a, ci, j), &col) in &index[ti] {
            let c = &all[a][ci];
            let last = *c.last().expect("nonempty");
            // δ: insert a point at every position of the chain
            if a + 1 < all.len() {
                for pos in 0..=c.len() {
                    let candidates: Vec<usize> = (0..space.len())
                        .filter(|&p| {
                            let after_prev = pos == 0 || (space.specializes(p, c[pos - 1]) && p != c[pos - 1]);
                            let before_next = pos == c.len() || (space.specializes(c[pos], p) && p != c[pos]);
                            after_prev && before_next
                        })
                        .collect();
                    for p in candidates {
                        let mut c2 = c.clone();
                        c2.insert(pos, p);
                        let ci2 = chain_pos[a + 1][&c2];
                        let sign = if pos % 2 == 0 { field.one() } else { field.neg(&field.one()) };
                        if pos < c.len() {
                            let row = index[ti + 1][&(b, a + 1, ci2, j)];
                            mat.set(row, col, field.add(mat.get(row, col), &sign));
                        } else {
                            let r = m_trim.res(b, last, p);
                            for j2 in 0..r.rows() {
                                let v = field.mul(&sign, r.get(j2, j));
                                if field.is_zero(&v) {
                                    continue;
                                }
                                let row = index[ti + 1][&(b, a + 1, ci2, j2)];
                                mat.set(row, col, field.add(mat.get(row, col), &v));
                            }
                        }
                    }
                }
            }
            // vertical part (−1)^a d_M at the last point of the chain
            let dm = m_trim.diff(b, last);
            let sign = if a % 2 == 0 { field.one() } else { field.neg(&field.one()) };
            for j2 in 0..dm.rows() {
                let v = field.mul(&sign, dm.get(j2, j));
                if field.is_zero(&v) {
                    continue;
                }
                let row = index[ti + 1][&(b + 1, a, ci, j2)];
                mat.set(row, col, field.add(mat.get(row, col), &v));
            }
        }
        d.push(mat);
    }
    let aug_rows: Vec<Vec<Matrix<F>>> = (lo..hi)
        .map(|t| {
            let ti = (t - lo) as usize;
            let mut rows = vec![Matrix::zeros(field, 1, 0); labels[ti].len()];
            for (&(b, a, ci, j), &i) in &index[ti] {
                let c = &all[a][ci];
                rows[i] = if a == 0 && b == t {
                    let mut e = Matrix::zeros(field, 1, m_trim.dim(b, c[0]));
                    e.set(0, j, field.one());
                    e
                } else {
                    Matrix::zeros(field, 1, m_trim.dim(t, c[0]))
                };
            }
            rows
        })
        .collect();
    let inj = InjComplex::new(space, field, lo, labels, d);
    Ok(Resolution { inj, aug: Augmentation { lo, rows: aug_rows } })
}

/// The minimal injective replacement of `m` with its quasi-isomorphism.
pub fn resolve<F: Field>(m: &Complex<F>) -> Result<Resolution<F>, SheafError> {
    let Resolution { mut inj, mut aug } = chain_resolution(m)?;
    inj.minimize(Some((&mut aug, m)));
    let first = inj.labels.iter().position(|l| !l.is_empty());
    if let Some(first) = first {
        let last = inj.labels.iter().rposition(|l| !l.is_empty()).expect("nonempty");
        let trimmed = inj.trimmed();
        aug = Augmentation { lo: trimmed.lo, rows: aug.rows[first..=last].to_vec() };
        inj = trimmed;
    } else {
        inj = inj.trimmed();
        aug = Augmentation { lo: 0, rows: vec![] };
    }
    Ok(Resolution { inj, aug })
}

/// The minimal injective model of `m` as a complex of sheaves.
pub fn minimal_model<F: Field>(m: &Complex<F>) -> Result<Complex<F>, SheafError> {
    Ok(resolve(m)?.inj.to_complex())
}

/// `RΓ_Z(M)` for a closed `z`, in the injective model.
pub fn r_gamma_inj<F: Field>(m: &Complex<F>, z: PointSet) -> Result<InjComplex<F>, SheafError> {
    Ok(resolve(m)?.inj.select(z).0)
}

/// `RΓ_Z(M)` as a complex of sheaves.
pub fn r_gamma<F: Field>(m: &Complex<F>, z: PointSet) -> Result<Complex<F>, SheafError> {
    Ok(r_gamma_inj(m, z)?.to_complex())
}

/// `H^n_Z(M)`.
pub fn local_cohomology<F: Field>(m: &Complex<F>, z: PointSet, n: i64) -> Result<Sheaf<F>, SheafError> {
    Ok(r_gamma(m, z)?.cohomology_sheaf(n))
}

/// `Rj_*` for the open inclusion given by `embedding`.
pub fn pushforward_open<F: Field>(
    n: &Complex<F>,
    target: &Arc<SpaceModel>,
    embedding: &[usize],
) -> Result<Complex<F>, SheafError> {
    let u: PointSet = embedding.iter().copied().collect();
    if !target.is_open(u) {
        return Err(SheafError::SpaceMismatch);
    }
    Ok(resolve(n)?.inj.relabel(target, embedding).to_complex())
}

/// Index of the graded pieces of `Hom^•(M, I)`: one coordinate per
/// (source degree, target summand, stalk coordinate at the label).
struct HomIndex {
    entries: Vec<(i64, usize, usize)>,
    pos: HashMap<(i64, usize, usize), usize>,
}

fn hom_index<F: Field>(m: &Complex<F>, inj: &InjComplex<F>, n: i64) -> HomIndex {
    let mut entries = Vec::new();
    for i in m.degrees() {
        for (b, &l) in inj.labels(i + n).iter().enumerate() {
            for c in 0..m.dim(i, l) {
                entries.push((i, b, c));
            }
        }
    }
    let pos = entries.iter().enumerate().map(|(p, &e)| (e, p)).collect();
    HomIndex { entries, pos }
}

/// `D: Hom^n → Hom^{n+1}`, `D(f) = d_I f − (−1)^n f d_M`.
fn hom_differential<F: Field>(m: &Complex<F>, inj: &InjComplex<F>, n: i64, src: &HomIndex, tgt: &HomIndex) -> Matrix<F> {
    let f = m.field();
    let mut out = Matrix::zeros(f, tgt.entries.len(), src.entries.len());
    for (col, &(i, b, c)) in src.entries.iter().enumerate() {
        let lb = inj.labels(i + n)[b];
        // d_I f: summand b feeds summands b' of the next degree
        let di = inj.diff(i + n);
        for bp in 0..di.rows() {
            let coeff = di.get(bp, b);
            if f.is_zero(coeff) {
                continue;
            }
            let lbp = inj.labels(i + n + 1)[bp];
            let r = m.res(i, lbp, lb);
            for cp in 0..r.cols() {
                let v = f.mul(coeff, r.get(c, cp));
                if f.is_zero(&v) {
                    continue;
                }
                let row = tgt.pos[&(i, bp, cp)];
                out.set(row, col, f.add(out.get(row, col), &v));
            }
        }
        // −(−1)^n f d_M: the component at degree i feeds degree i − 1
        let dm = m.diff(i - 1, lb);
        let sign = if n % 2 == 0 { f.neg(&f.one()) } else { f.one() };
        for cp in 0..dm.cols() {
            let v = f.mul(&sign, dm.get(c, cp));
            if f.is_zero(&v) {
                continue;
            }
            let row = tgt.pos[&(i - 1, b, cp)];
            out.set(row, col, f.add(out.get(row, col), &v));
        }
    }
    out
}

/// `dim Hom_D(M, N[n])` for every `n` in `lo..=hi`.
pub fn rhom_range<F: Field>(m: &Complex<F>, n: &Complex<F>, lo: i64, hi: i64) -> Result<BTreeMap<i64, usize>, SheafError> {
    let inj = resolve(n)?.inj;
    Ok(rhom_into_injective(m, &inj, lo, hi))
}

pub fn rhom_into_injective<F: Field>(m: &Complex<F>, inj: &InjComplex<F>, lo: i64, hi: i64) -> BTreeMap<i64, usize> {
    let idx: Vec<HomIndex> = (lo - 1..=hi + 1).map(|t| hom_index(m, inj, t)).collect();
    let diffs: Vec<Matrix<F>> =
        (lo - 1..=hi).map(|t| hom_differential(m, inj, t, &idx[(t - lo + 1) as usize], &idx[(t - lo + 2) as usize])).collect();
    (lo..=hi)
        .map(|t| {
            let p = (t - lo + 1) as usize;
            let dim = idx[p].entries.len();
            (t, dim - diffs[p].rank() - diffs[p - 1].rank())
        })
        .collect()
}

/// `dim Hom_D(M, N[n])` over every `n` where the Hom complex is nonzero.
pub fn rhom<F: Field>(m: &Complex<F>, n: &Complex<F>) -> Result<BTreeMap<i64, usize>, SheafError> {
    let inj = resolve(n)?.inj;
    if m.degrees().is_empty() || inj.labels.is_empty() {
        return Ok(BTreeMap::new());
    }
    let lo = inj.lo() - (m.hi() - 1);
    let hi = inj.hi() - 1 - m.lo();
    Ok(rhom_into_injective(m, &inj, lo, hi))
}

/// A random chain map `M → inj.to_complex()`, drawn uniformly from the
/// degree-0 cocycles of the Hom complex.
pub fn random_chain_map_into<F: Field, R: Rng + ?Sized>(m: &Complex<F>, inj: &InjComplex<F>, rng: &mut R) -> ChainMap<F> {
    let f = m.field();
    let i0 = hom_index(m, inj, 0);
    let i1 = hom_index(m, inj, 1);
    let cocycles = hom_differential(m, inj, 0, &i0, &i1).kernel();
    let mut v = Matrix::zeros(f, i0.entries.len(), 1);
    for c in 0..cocycles.cols() {
        v = v.add(&cocycles.column(c).scale(&f.random(rng)));
    }
    let rows: Vec<Vec<Matrix<F>>> = (inj.lo()..inj.hi())
        .map(|k| {
            inj.labels(k)
                .iter()
                .enumerate()
                .map(|(b, &l)| {
                    let dim = m.dim(k, l);
                    let data = (0..dim).map(|c| v.get(i0.pos[&(k, b, c)], 0).clone()).collect();
                    Matrix::from_rows(f, 1, dim, data)
                })
                .collect()
        })
        .collect();
    Augmentation { lo: inj.lo(), rows }.to_chain_map(m, inj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{PrimeField, Rationals};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sier() -> Arc<SpaceModel> {
        Arc::new(SpaceModel::sierpinski())
    }

    #[test]
    fn chain_resolution_is_a_quasi_isomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = PrimeField::new(3).unwrap();
        for space in [SpaceModel::sierpinski(), SpaceModel::chain3(), SpaceModel::v_space()] {
            let s = Arc::new(space);
            for _ in 0..15 {
                let c = Complex::random(&s, &f, -1, 1, 3, &mut rng);
                let res = chain_resolution(&c).unwrap();
                let map = res.chain_map(&c);
                let ic = res.inj.to_complex();
                assert!(map.is_chain_map(&c, &ic));
                assert!(map.is_quasi_isomorphism(&c, &ic));
                let min = resolve(&c).unwrap();
                assert!(min.inj.is_minimal());
                let map = min.chain_map(&c);
                let ic = min.inj.to_complex();
                assert!(map.is_chain_map(&c, &ic));
                assert!(map.is_quasi_isomorphism(&c, &ic));
            }
        }
    }

    #[test]
    fn resolution_examples_on_sier() {
        let s = sier();
        let f = PrimeField::f2();
        let kx = Complex::from_sheaf(&Sheaf::injective(&s, &f, 1), 0);
        let r = resolve(&kx).unwrap().inj;
        assert_eq!((r.lo(), r.labels(0)), (0, &[1usize][..]));
        assert_eq!(r.hi(), 1);
        let k = Complex::from_sheaf(&Sheaf::constant(&s, &f), 0);
        let r = resolve(&k).unwrap().inj;
        assert_eq!((r.lo(), r.hi(), r.labels(0)), (0, 1, &[0usize][..]));
        // j_!k_U ↪ I_η → I_x
        let j = Complex::from_sheaf(&Sheaf::extension_by_zero(&s, &f, PointSet::singleton(0)), 0);
        let r = resolve(&j).unwrap().inj;
        assert_eq!((r.lo(), r.hi()), (0, 2));
        assert_eq!((r.labels(0), r.labels(1)), (&[0usize][..], &[1usize][..]));
        assert_eq!(r.diff(0).rank(), 1);
    }

    #[test]
    fn local_cohomology_examples_on_sier() {
        let s = sier();
        let f = PrimeField::f2();
        let x = PointSet::singleton(1);
        let kx = Complex::from_sheaf(&Sheaf::injective(&s, &f, 1), 0);
        assert_eq!(r_gamma(&kx, x).unwrap().cohomology_table(), BTreeMap::from([(0, vec![0, 1])]));
        assert_eq!(local_cohomology(&kx, x, 0).unwrap().dims(), &[0, 1]);
        let j = Complex::from_sheaf(&Sheaf::extension_by_zero(&s, &f, PointSet::singleton(0)), 0);
        assert_eq!(r_gamma(&j, x).unwrap().cohomology_table(), BTreeMap::from([(1, vec![0, 1])]));
        assert_eq!(local_cohomology(&j, x, 1).unwrap().dims(), &[0, 1]);
        let k = Complex::from_sheaf(&Sheaf::constant(&s, &f), 0);
        assert!(r_gamma(&k, x).unwrap().is_acyclic());
        for n in -2..3 {
            assert!(local_cohomology(&j, PointSet::EMPTY, n).unwrap().is_zero());
        }
    }

    #[test]
    fn open_restriction_and_pushforward() {
        let s = sier();
        let f = PrimeField::f2();
        let u = PointSet::singleton(0);
        let (sub, emb) = s.open_subspace(u).unwrap();
        let sub = Arc::new(sub);
        let j = Complex::from_sheaf(&Sheaf::extension_by_zero(&s, &f, u), 0);
        let r = j.restrict(&sub, &emb);
        assert_eq!(r.cohomology_table(), BTreeMap::from([(0, vec![1])]));
        let ku = Complex::from_sheaf(&Sheaf::constant(&sub, &f), 0);
        let pushed = pushforward_open(&ku, &s, &emb).unwrap();
        assert_eq!(pushed.cohomology_table(), BTreeMap::from([(0, vec![1, 1])]));
        // RΓ_x Rj_* k_U ≃ 0
        assert!(r_gamma(&pushed, PointSet::singleton(1)).unwrap().is_acyclic());
    }

    #[test]
    fn rhom_examples() {
        let s = sier();
        let f = PrimeField::f2();
        let kx = Complex::from_sheaf(&Sheaf::injective(&s, &f, 1), 0);
        let k = Complex::from_sheaf(&Sheaf::constant(&s, &f), 0);
        let nonzero = |m: BTreeMap<i64, usize>| m.into_iter().filter(|&(_, v)| v > 0).collect::<BTreeMap<_, _>>();
        assert_eq!(nonzero(rhom(&kx, &kx).unwrap()), BTreeMap::from([(0, 1)]));
        assert!(nonzero(rhom(&kx, &k).unwrap()).is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = Complex::random(&Arc::new(SpaceModel::chain3()), &f, -1, 1, 2, &mut rng);
        let a = rhom_range(&c, &c, -3, 3).unwrap();
        let b = rhom_range(&c, &c.shift(1), -4, 2).unwrap();
        for n in -3..=2 {
            assert_eq!(b[&n], a[&(n + 1)]);
        }
    }

    #[test]
    fn injectives_corepresent_stalks() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = Rationals;
        for space in [SpaceModel::sierpinski(), SpaceModel::chain3(), SpaceModel::v_space()] {
            let s = Arc::new(space);
            for _ in 0..10 {
                let sh = Sheaf::random(&s, &f, 3, &mut rng);
                let m = Complex::from_sheaf(&sh, 0);
                for p in 0..s.len() {
                    let ip = Complex::from_sheaf(&Sheaf::injective(&s, &f, p), 0);
                    let dims = rhom_range(&m, &ip, -2, 2).unwrap();
                    for (&n, &d) in &dims {
                        assert_eq!(d, if n == 0 { sh.dim(p) } else { 0 });
                    }
                }
            }
        }
    }

    #[test]
    fn random_chain_maps_are_chain_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = PrimeField::new(5).unwrap();
        let s = Arc::new(SpaceModel::v_space());
        for _ in 0..10 {
            let a = Complex::random(&s, &f, -1, 1, 2, &mut rng);
            let b = Complex::random(&s, &f, -1, 1, 2, &mut rng);
            let inj = resolve(&b).unwrap().inj;
            let map = random_chain_map_into(&a, &inj, &mut rng);
            assert!(map.is_chain_map(&a, &inj.to_complex()));
        }
    }
}
