//! Membership tests for the aisles of the t-structure attached to a support
//! datum, the constructive truncation, and heart cohomology.
//!
//! `M ∈ D^{≤n}` iff `Supp H^k(M) ⊆ Φ^{k−n}` for all `k`;
//! `M ∈ D^{≥n}` iff `RΓ_{Φ^k}(M) ∈ D^{≥k+n}` (standard) for all `k`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::linalg::Field;
use crate::sheaf::injective::{resolve, InjComplex};
use crate::sheaf::{ChainMap, Complex, SheafError};
use crate::space::PointSet;
use crate::support::SupportDatum;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TStructError {
    #[error("certificate failure: {0}")]
    CertificateFailure(String),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Leq,
    Geq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    /// `Supp H^k ⊆ Φ^level`.
    Support { k: i64, support: PointSet, level: i64 },
    /// Lowest degree with nonzero cohomology of `RΓ_{Φ^k}(M)`, if any.
    Vanishing { k: i64, lowest: Option<i64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipCertificate {
    pub side: Side,
    pub n: i64,
    pub evidence: Vec<Evidence>,
}

/// The first violated level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MembershipFailure {
    /// `H^k` has a nonzero stalk at `point` outside `Φ^{k−n}`.
    Support { k: i64, point: usize },
    /// `RΓ_{Φ^k}(M)` has cohomology in `degree < k + n`.
    Vanishing { k: i64, degree: i64 },
}

impl MembershipFailure {
    pub fn to_json(&self, space: &crate::space::SpaceModel) -> serde_json::Value {
        match *self {
            MembershipFailure::Support { k, point } => serde_json::json!({"k": k, "point": space.id(point)}),
            MembershipFailure::Vanishing { k, degree } => serde_json::json!({"k": k, "degree": degree}),
        }
    }
}

fn closure_of_support<F: Field>(m: &Complex<F>, dims: &[usize]) -> PointSet {
    m.space().close((0..dims.len()).filter(|&x| dims[x] > 0).collect())
}

/// `M ∈ ^ΦD^{≤n}`.
pub fn in_leq<F: Field>(m: &Complex<F>, phi: &SupportDatum, n: i64) -> Result<MembershipCertificate, MembershipFailure> {
    let mut evidence = Vec::new();
    for (k, dims) in m.cohomology_table() {
        let support = closure_of_support(m, &dims);
        let level = phi.level_set(k - n);
        if let Some(point) = support.difference(level).iter().next() {
            return Err(MembershipFailure::Support { k, point });
        }
        evidence.push(Evidence::Support { k, support, level: k - n });
    }
    Ok(MembershipCertificate { side: Side::Leq, n, evidence })
}

/// `M ∈ ^ΦD^{≥n}`. Levels below `min p` equal the whole space and levels
/// above `max p` are empty, so only `min p ..= max p` is inspected.
pub fn in_geq<F: Field>(m: &Complex<F>, phi: &SupportDatum, n: i64) -> Result<MembershipCertificate, MembershipFailure> {
    let inj = resolve(m).expect("resolution of a finite complex").inj;
    in_geq_inj(&inj, phi, n)
}

/// As [`in_geq`], for a complex already in injective form.
pub fn in_geq_inj<F: Field>(inj: &InjComplex<F>, phi: &SupportDatum, n: i64) -> Result<MembershipCertificate, MembershipFailure> {
    let mut evidence = Vec::new();
    for k in phi.min_value()..=phi.max_value() {
        let lowest = inj.select(phi.level_set(k)).0.to_complex().lowest_cohomology();
        if let Some(degree) = lowest {
            if degree < k + n {
                return Err(MembershipFailure::Vanishing { k, degree });
            }
        }
        evidence.push(Evidence::Vanishing { k, lowest });
    }
    Ok(MembershipCertificate { side: Side::Geq, n, evidence })
}

impl MembershipCertificate {
    /// Recomputes the evidence from scratch.
    pub fn recheck<F: Field>(&self, m: &Complex<F>, phi: &SupportDatum) -> bool {
        let again = match self.side {
            Side::Leq => in_leq(m, phi, self.n),
            Side::Geq => in_geq(m, phi, self.n),
        };
        again.as_ref() == Ok(self)
    }
}

/// The truncation triangle `M_lt → M → M_geq → M_lt[1]`.
#[derive(Clone, Debug)]
pub struct TruncationResult<F: Field> {
    /// `Cone(map_to_geq)[−1]`, in `^ΦD^{<0}`.
    pub m_lt: Complex<F>,
    /// A minimal injective complex in `^ΦD^{≥0}`.
    pub m_geq: Complex<F>,
    pub geq_inj: InjComplex<F>,
    pub map_to_geq: ChainMap<F>,
    pub lt_to_m: ChainMap<F>,
    pub cert_lt: MembershipCertificate,
    pub cert_geq: MembershipCertificate,
    /// `(n, cohomology of the piece split off at step n)`.
    pub iterations: Vec<(i64, BTreeMap<i64, Vec<usize>>)>,
}

/// Splits `M` along the t-structure of `Φ`, by repeatedly coning off
/// `τ^{≤n} RΓ_{Φ^{n+1}}` of the current injective model.
pub fn truncate<F: Field>(m: &Complex<F>, phi: &SupportDatum) -> Result<TruncationResult<F>, TStructError> {
    let space = m.space();
    let field = m.field();
    let Some(mut n) = m.lowest_cohomology() else {
        let zero = Complex::zero(space, field);
        let empty = InjComplex::new(space, field, 0, vec![], vec![]);
        return finish(m, phi, zero, empty, ChainMap { lo: 0, comps: vec![] }, Vec::new());
    };
    let res = resolve(m)?;
    let mut inj = res.inj.clone();
    let mut cur = inj.to_complex();
    let mut map = res.chain_map(m);
    let mut iterations = Vec::new();
    while !phi.level_set(n + 1).is_empty() {
        let (r_inj, keep) = inj.select(phi.level_set(n + 1));
        let r = r_inj.to_complex();
        let (a, a_to_r) = r.truncate_leq(n);
        let table = a.cohomology_table();
        if !table.is_empty() {
            let r_to_cur = selection_map(&inj, &r_inj, &keep, &r, &cur);
            let a_to_cur = r_to_cur.compose(&a_to_r, &a, &r, &cur);
            let cone = Complex::cone(&a_to_cur, &a, &cur);
            let to_cone = ChainMap::cone_inclusion(&a, &cur);
            let next = resolve(&cone)?;
            let to_next = next.chain_map(&cone);
            let next_c = next.inj.to_complex();
            let via_cone = to_cone.compose(&map, m, &cur, &cone);
            map = to_next.compose(&via_cone, m, &cone, &next_c);
            inj = next.inj;
            cur = next_c;
            iterations.push((n, table));
        }
        n += 1;
    }
    finish(m, phi, cur, inj, map, iterations)
}

fn finish<F: Field>(
    m: &Complex<F>,
    phi: &SupportDatum,
    m_geq: Complex<F>,
    geq_inj: InjComplex<F>,
    map_to_geq: ChainMap<F>,
    iterations: Vec<(i64, BTreeMap<i64, Vec<usize>>)>,
) -> Result<TruncationResult<F>, TStructError> {
    debug_assert!(map_to_geq.is_chain_map(m, &m_geq));
    let m_lt = Complex::cone(&map_to_geq, m, &m_geq).shift(-1);
    let lt_to_m = ChainMap::cocone_projection(m, &m_geq);
    let cert_lt = in_leq(&m_lt, phi, -1)
        .map_err(|w| TStructError::CertificateFailure(format!("lower piece not in D^<0: {w:?}")))?;
    let cert_geq = in_geq_inj(&geq_inj, phi, 0)
        .map_err(|w| TStructError::CertificateFailure(format!("upper piece not in D^>=0: {w:?}")))?;
    Ok(TruncationResult { m_lt, m_geq, geq_inj, map_to_geq, lt_to_m, cert_lt, cert_geq, iterations })
}

/// The inclusion of a selected injective subcomplex, as a chain map.
fn selection_map<F: Field>(
    full: &InjComplex<F>,
    sub: &InjComplex<F>,
    keep: &[Vec<usize>],
    sub_c: &Complex<F>,
    full_c: &Complex<F>,
) -> ChainMap<F> {
    let space = full.space();
    let field = full_c.field();
    let comps = (sub.lo()..sub.hi())
        .map(|k| {
            let kept = &keep[(k - full.lo()) as usize];
            crate::sheaf::SheafMorphism {
                comps: (0..space.len())
                    .map(|q| {
                        let rows = full.stalk_indices(k, q);
                        let cols = sub.stalk_indices(k, q);
                        let mut mat = crate::linalg::Matrix::zeros(field, rows.len(), cols.len());
                        for (c, &si) in cols.iter().enumerate() {
                            let r = rows.iter().position(|&fi| fi == kept[si]).expect("selected summand");
                            mat.set(r, c, field.one());
                        }
                        mat
                    })
                    .collect(),
            }
        })
        .collect();
    let map = ChainMap { lo: sub.lo(), comps };
    debug_assert!(map.is_chain_map(sub_c, full_c));
    map
}

/// Heart cohomology `^ΦH^n(M) = τ^{≥n} τ^{≤n} M`, with the certificates
/// that it lies in `D^{≤n} ∩ D^{≥n}`.
pub fn heart_cohomology<F: Field>(
    m: &Complex<F>,
    phi: &SupportDatum,
    n: i64,
) -> Result<(Complex<F>, MembershipCertificate, MembershipCertificate), TStructError> {
    // τ^{≤n} M = τ^{<0}(M[n+1])[−n−1] and τ^{≥n} X = τ^{≥0}(X[n])[−n]
    let low = truncate(&m.shift(n + 1), phi)?.m_lt.shift(-n - 1);
    let h = truncate(&low.shift(n), phi)?.m_geq.shift(-n);
    let leq = in_leq(&h, phi, n).map_err(|w| TStructError::CertificateFailure(format!("{w:?}")))?;
    let geq = in_geq(&h, phi, n).map_err(|w| TStructError::CertificateFailure(format!("{w:?}")))?;
    Ok((h, leq, geq))
}
