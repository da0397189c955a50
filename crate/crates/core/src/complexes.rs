//! Admissible homomorphisms and bounded complexes of terms.
//!
//! A differential matrix is stored sparsely as a list of monomial entries
//! `α h̃_R` from column (source summand) to row (target summand). Several
//! entries may share a position when their shifts differ; distinct shifts are
//! linearly independent, so every zero test groups by `(row, col, shift)`.
//!
//! A monomial whose `x^R` lies in the ideal of its target (`R_j >= M'_j` for
//! some `j` with `M'_j > 0`) is the zero map; normalization drops it.
//!
//! Signs: Čech `(-1)^{#{i in I : i < j}}`, `d_tot = d_h + (-1)^i d_v` on
//! `A^{i,j}`, `cone(φ)^n = D^n ⊕ C^{n+1}` with `[[d_D, φ], [0, -d_C]]`, and
//! `C[n]^k = C^{k+n}` with differential `(-1)^n d`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::terms::Term;
use crate::weight_lattice::{IndexSet, Params};
use crate::zpm::Zpm;

/// One monomial `α h̃_R` of a differential or morphism matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub alpha: u64,
    pub shift: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleHom {
    pub source: Term,
    pub target: Term,
    pub alpha: u64,
    pub shift: Vec<u64>,
}

impl AdmissibleHom {
    pub fn zero(source: Term, target: Term) -> Self {
        let g = source.orders.0.len();
        Self {
            source,
            target,
            alpha: 0,
            shift: vec![0; g],
        }
    }
}

/// `x^R` lies in the ideal `(x_j^{M_j} : M_j > 0)`.
pub fn annihilates(shift: &[u64], target_orders: &[u64]) -> bool {
    shift
        .iter()
        .zip(target_orders)
        .any(|(&r, &m)| m > 0 && r >= m)
}

/// Reason why `α h̃_R : source -> target` fails to be admissible, if it does.
pub fn admissibility_violation(
    params: &Params,
    source: &Term,
    target: &Term,
    alpha: u64,
    shift: &[u64],
) -> Option<String> {
    if params.ring().reduce(alpha as i64) == 0 {
        return None;
    }
    let g = params.g;
    if shift.len() != g || source.weight.k.len() != g || target.weight.k.len() != g {
        return Some("tuple lengths differ from g".into());
    }
    if let Some(i) = shift.iter().position(|r| r % params.step() != 0) {
        return Some(format!(
            "shift entry {i} is not a multiple of {}",
            params.step()
        ));
    }
    if source.weight.w != target.weight.w {
        return Some(format!(
            "normalizations {} and {} differ",
            source.weight.w, target.weight.w
        ));
    }
    let delta = params.weight_shift_of(shift);
    for i in 0..g {
        if target.weight.k[i] - source.weight.k[i] != delta[i] {
            return Some(format!(
                "weight difference {:?} is not the shift of {:?}",
                target
                    .weight
                    .k
                    .iter()
                    .zip(&source.weight.k)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
                shift
            ));
        }
    }
    let (m, mt) = (&source.orders.0, &target.orders.0);
    for i in 0..g {
        if m[i] > 0 && (mt[i] == 0 || m[i] + shift[i] < mt[i]) {
            return Some(format!(
                "index {i}: source order {}, shift {}, target order {}",
                m[i], shift[i], mt[i]
            ));
        }
    }
    None
}

pub fn is_admissible(params: &Params, h: &AdmissibleHom) -> bool {
    admissibility_violation(params, &h.source, &h.target, h.alpha, &h.shift).is_none()
}

/// `f ∘ h`
pub fn compose(params: &Params, f: &AdmissibleHom, h: &AdmissibleHom) -> Result<AdmissibleHom> {
    if h.target != f.source {
        return Err(Error::EndpointMismatch);
    }
    let ring = params.ring();
    Ok(AdmissibleHom {
        source: h.source.clone(),
        target: f.target.clone(),
        alpha: ring.mul(f.alpha, h.alpha),
        shift: f.shift.iter().zip(&h.shift).map(|(a, b)| a + b).collect(),
    })
}

fn add_shift(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

type Grouped = BTreeMap<(usize, usize, Vec<u64>), u64>;

fn group(ring: &Zpm, entries: impl IntoIterator<Item = Entry>) -> Grouped {
    let mut out = Grouped::new();
    for e in entries {
        let slot = out.entry((e.row, e.col, e.shift)).or_insert(0);
        *slot = ring.add(*slot, e.alpha);
    }
    out
}

/// Product `f · h` of sparse matrices (`h` first), grouped but not reduced.
pub fn multiply(ring: &Zpm, f: &[Entry], h: &[Entry]) -> Vec<Entry> {
    let mut by_row: BTreeMap<usize, Vec<&Entry>> = BTreeMap::new();
    for e in f {
        by_row.entry(e.col).or_default().push(e);
    }
    let mut prods = Vec::new();
    for eh in h {
        if let Some(fs) = by_row.get(&eh.row) {
            for ef in fs {
                prods.push(Entry {
                    row: ef.row,
                    col: eh.col,
                    alpha: ring.mul(ef.alpha, eh.alpha),
                    shift: add_shift(&ef.shift, &eh.shift),
                });
            }
        }
    }
    ungroup(group(ring, prods))
}

fn ungroup(g: Grouped) -> Vec<Entry> {
    g.into_iter()
        .map(|((row, col, shift), alpha)| Entry {
            row,
            col,
            alpha,
            shift,
        })
        .collect()
}

/// Merge equal monomials, drop zero coefficients and monomials that vanish on
/// their target, and sort.
pub fn normalize(ring: &Zpm, entries: Vec<Entry>, targets: &[Term]) -> Vec<Entry> {
    ungroup(group(ring, entries))
        .into_iter()
        .filter(|e| e.alpha != 0 && !annihilates(&e.shift, &targets[e.row].orders.0))
        .collect()
}

pub fn negate(ring: &Zpm, entries: &[Entry]) -> Vec<Entry> {
    entries
        .iter()
        .map(|e| Entry {
            alpha: ring.neg(e.alpha),
            ..e.clone()
        })
        .collect()
}

fn offset(entries: &[Entry], dr: usize, dc: usize) -> impl Iterator<Item = Entry> + '_ {
    entries.iter().map(move |e| Entry {
        row: e.row + dr,
        col: e.col + dc,
        ..e.clone()
    })
}

/// A bounded complex; `diffs[i]` maps degree `lo + i` to `lo + i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complex {
    pub params: Params,
    pub w: i64,
    pub lo: i64,
    pub terms: Vec<Vec<Term>>,
    pub diffs: Vec<Vec<Entry>>,
}

impl Complex {
    /// Validates shapes, shared normalization, divisibility and entrywise
    /// admissibility, and normalizes the entries. Does not check `d² = 0`.
    pub fn new(
        params: Params,
        w: i64,
        lo: i64,
        terms: Vec<Vec<Term>>,
        diffs: Vec<Vec<Entry>>,
    ) -> Result<Self> {
        params.validate()?;
        let expected = terms.len().saturating_sub(1);
        if diffs.len() != expected {
            return Err(Error::MalformedComplex(format!(
                "{} degrees need {expected} differentials, got {}",
                terms.len(),
                diffs.len()
            )));
        }
        for t in terms.iter().flatten() {
            t.validate(&params)?;
            if t.weight.w != w {
                return Err(Error::NormalizationMismatch(w, t.weight.w));
            }
        }
        let ring = params.ring();
        let mut norm = Vec::with_capacity(diffs.len());
        for (i, d) in diffs.into_iter().enumerate() {
            let (src, tgt) = (&terms[i], &terms[i + 1]);
            for e in &d {
                if e.col >= src.len() || e.row >= tgt.len() {
                    return Err(Error::MalformedComplex(format!(
                        "entry ({}, {}) outside {}x{} in degree {}",
                        e.row,
                        e.col,
                        tgt.len(),
                        src.len(),
                        lo + i as i64
                    )));
                }
                if e.shift.len() != params.g {
                    return Err(Error::LengthMismatch {
                        expected: params.g,
                        got: e.shift.len(),
                    });
                }
            }
            let d = normalize(&ring, d, tgt);
            for e in &d {
                if let Some(why) =
                    admissibility_violation(&params, &src[e.col], &tgt[e.row], e.alpha, &e.shift)
                {
                    return Err(Error::NotAdmissible(format!(
                        "degree {} entry ({}, {}): {why}",
                        lo + i as i64,
                        e.row,
                        e.col
                    )));
                }
            }
            norm.push(d);
        }
        Ok(Self {
            params,
            w,
            lo,
            terms,
            diffs: norm,
        })
    }

    pub fn empty(params: Params, w: i64) -> Self {
        Self {
            params,
            w,
            lo: 0,
            terms: Vec::new(),
            diffs: Vec::new(),
        }
    }

    pub fn single(params: Params, term: Term, degree: i64) -> Result<Self> {
        let w = term.weight.w;
        Self::new(params, w, degree, vec![vec![term]], Vec::new())
    }

    /// Highest degree (exclusive).
    pub fn end(&self) -> i64 {
        self.lo + self.terms.len() as i64
    }

    pub fn terms_at(&self, n: i64) -> &[Term] {
        if n < self.lo || n >= self.end() {
            return &[];
        }
        &self.terms[(n - self.lo) as usize]
    }

    /// Differential out of degree `n`.
    pub fn diff_at(&self, n: i64) -> &[Entry] {
        if n < self.lo || n + 1 >= self.end() {
            return &[];
        }
        &self.diffs[(n - self.lo) as usize]
    }

    pub fn num_terms(&self) -> usize {
        self.terms.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.num_terms() == 0
    }

    /// Maximal dimension of a term, if there are any.
    pub fn dimension(&self) -> Option<usize> {
        self.terms.iter().flatten().map(Term::dimension).max()
    }

    /// Re-index over an explicit degree range, padding with zero modules.
    pub fn over_range(&self, lo: i64, end: i64) -> Self {
        let lo = lo.min(self.lo);
        let end = end.max(self.end());
        let terms = (lo..end)
            .map(|n| self.terms_at(n).to_vec())
            .collect::<Vec<_>>();
        let diffs = (lo..end - 1).map(|n| self.diff_at(n).to_vec()).collect();
        Self {
            params: self.params,
            w: self.w,
            lo,
            terms,
            diffs,
        }
    }

    /// Drop zero modules at both ends.
    pub fn trimmed(&self) -> Self {
        let Some(first) = self.terms.iter().position(|t| !t.is_empty()) else {
            return Self::empty(self.params, self.w);
        };
        let last = self.terms.iter().rposition(|t| !t.is_empty()).unwrap();
        Self {
            params: self.params,
            w: self.w,
            lo: self.lo + first as i64,
            terms: self.terms[first..=last].to_vec(),
            diffs: self.diffs[first..last].to_vec(),
        }
    }
}

/// A nonzero `(row, col, shift)` group of `d_{n+1} ∘ d_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub degree: i64,
    pub row: usize,
    pub col: usize,
    pub shift: Vec<u64>,
    pub coefficient: u64,
}

fn nonzero_groups(ring: &Zpm, entries: Vec<Entry>, targets: &[Term]) -> Vec<Entry> {
    ungroup(group(ring, entries))
        .into_iter()
        .filter(|e| e.alpha != 0 && !annihilates(&e.shift, &targets[e.row].orders.0))
        .collect()
}

pub fn check_d_squared(c: &Complex) -> Vec<Violation> {
    let ring = c.params.ring();
    let mut out = Vec::new();
    for n in c.lo..c.end() - 2 {
        let comp = multiply(&ring, c.diff_at(n + 1), c.diff_at(n));
        for e in nonzero_groups(&ring, comp, c.terms_at(n + 2)) {
            out.push(Violation {
                degree: n,
                row: e.row,
                col: e.col,
                shift: e.shift,
                coefficient: e.alpha,
            });
        }
    }
    out
}

/// A degree-preserving morphism; `maps[n]` goes from `C^n` to `D^n`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Morphism {
    pub maps: BTreeMap<i64, Vec<Entry>>,
}

impl Morphism {
    pub fn at(&self, n: i64) -> &[Entry] {
        self.maps.get(&n).map_or(&[], Vec::as_slice)
    }
}

/// Entrywise admissibility and `d_D φ = φ d_C`.
pub fn check_morphism(c: &Complex, d: &Complex, phi: &Morphism) -> Result<()> {
    let params = &c.params;
    let ring = params.ring();
    for (&n, entries) in &phi.maps {
        let (src, tgt) = (c.terms_at(n), d.terms_at(n));
        for e in entries {
            if e.col >= src.len() || e.row >= tgt.len() {
                return Err(Error::MalformedComplex(format!(
                    "morphism entry out of range in degree {n}"
                )));
            }
            if annihilates(&e.shift, &tgt[e.row].orders.0) {
                continue;
            }
            if let Some(why) =
                admissibility_violation(params, &src[e.col], &tgt[e.row], e.alpha, &e.shift)
            {
                return Err(Error::NotAdmissible(format!("morphism degree {n}: {why}")));
            }
        }
    }
    let lo = c.lo.min(d.lo);
    let end = c.end().max(d.end());
    for n in lo..end {
        let mut diff = multiply(&ring, d.diff_at(n), phi.at(n));
        diff.extend(negate(&ring, &multiply(&ring, phi.at(n + 1), c.diff_at(n))));
        let bad = nonzero_groups(&ring, diff, d.terms_at(n + 1));
        if let Some(e) = bad.first() {
            return Err(Error::MalformedComplex(format!(
                "morphism does not commute with differentials at degree {n}, entry ({}, {}) shift {:?}",
                e.row, e.col, e.shift
            )));
        }
    }
    Ok(())
}

/// `C[n]`
pub fn shift(c: &Complex, n: i64) -> Complex {
    let ring = c.params.ring();
    let diffs = if n.rem_euclid(2) == 1 {
        c.diffs.iter().map(|d| negate(&ring, d)).collect()
    } else {
        c.diffs.clone()
    };
    Complex {
        params: c.params,
        w: c.w,
        lo: c.lo - n,
        terms: c.terms.clone(),
        diffs,
    }
}

fn check_compatible(c: &Complex, d: &Complex) -> Result<()> {
    if c.params != d.params {
        return Err(Error::InvalidParams(
            "complexes have different parameters".into(),
        ));
    }
    if c.w != d.w && !c.is_empty() && !d.is_empty() {
        return Err(Error::NormalizationMismatch(c.w, d.w));
    }
    Ok(())
}

pub fn direct_sum(c: &Complex, d: &Complex) -> Result<Complex> {
    check_compatible(c, d)?;
    let w = if c.is_empty() { d.w } else { c.w };
    let lo = c.lo.min(d.lo);
    let end = c.end().max(d.end());
    let mut terms = Vec::new();
    let mut diffs = Vec::new();
    for n in lo..end {
        let mut ts = c.terms_at(n).to_vec();
        ts.extend_from_slice(d.terms_at(n));
        terms.push(ts);
        if n + 1 < end {
            let (r, s) = (c.terms_at(n + 1).len(), c.terms_at(n).len());
            let mut e: Vec<Entry> = c.diff_at(n).to_vec();
            e.extend(offset(d.diff_at(n), r, s));
            diffs.push(e);
        }
    }
    Complex::new(c.params, w, lo, terms, diffs)
}

/// `cone(φ)^n = D^n ⊕ C^{n+1}`, summands of `D` first.
pub fn cone(c: &Complex, d: &Complex, phi: &Morphism) -> Result<Complex> {
    check_compatible(c, d)?;
    check_morphism(c, d, phi)?;
    let ring = c.params.ring();
    let w = if d.is_empty() { c.w } else { d.w };
    let lo = d.lo.min(c.lo - 1);
    let end = d.end().max(c.end() - 1);
    let mut terms = Vec::new();
    let mut diffs = Vec::new();
    for n in lo..end {
        let mut ts = d.terms_at(n).to_vec();
        ts.extend_from_slice(c.terms_at(n + 1));
        terms.push(ts);
        if n + 1 < end {
            let dn1 = d.terms_at(n + 1).len();
            let dn = d.terms_at(n).len();
            let mut e: Vec<Entry> = d.diff_at(n).to_vec();
            e.extend(offset(phi.at(n + 1), 0, dn));
            e.extend(offset(&negate(&ring, c.diff_at(n + 1)), dn1, dn));
            diffs.push(e);
        }
    }
    Complex::new(c.params, w, lo, terms, diffs)
}

/// A double complex `A^{i,j}` with `d_h : (i,j) -> (i+1,j)` and
/// `d_v : (i,j) -> (i,j+1)`, with commuting squares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleComplex {
    pub params: Params,
    pub w: i64,
    pub terms: BTreeMap<(i64, i64), Vec<Term>>,
    pub horiz: BTreeMap<(i64, i64), Vec<Entry>>,
    pub vert: BTreeMap<(i64, i64), Vec<Entry>>,
}

impl DoubleComplex {
    pub fn new(params: Params, w: i64) -> Self {
        Self {
            params,
            w,
            terms: BTreeMap::new(),
            horiz: BTreeMap::new(),
            vert: BTreeMap::new(),
        }
    }

    fn at(&self, ij: (i64, i64)) -> &[Term] {
        self.terms.get(&ij).map_or(&[], Vec::as_slice)
    }

    fn h(&self, ij: (i64, i64)) -> &[Entry] {
        self.horiz.get(&ij).map_or(&[], Vec::as_slice)
    }

    fn v(&self, ij: (i64, i64)) -> &[Entry] {
        self.vert.get(&ij).map_or(&[], Vec::as_slice)
    }

    /// Rows and columns square to zero and squares commute.
    pub fn check(&self) -> Result<()> {
        let ring = self.params.ring();
        for &(i, j) in self.terms.keys() {
            let checks = [
                (
                    multiply(&ring, self.h((i + 1, j)), self.h((i, j))),
                    (i + 2, j),
                    "horizontal d²",
                ),
                (
                    multiply(&ring, self.v((i, j + 1)), self.v((i, j))),
                    (i, j + 2),
                    "vertical d²",
                ),
            ];
            for (comp, tgt, what) in checks {
                if !nonzero_groups(&ring, comp, self.at(tgt)).is_empty() {
                    return Err(Error::MalformedComplex(format!(
                        "{what} nonzero at ({i}, {j})"
                    )));
                }
            }
            let mut sq = multiply(&ring, self.v((i + 1, j)), self.h((i, j)));
            sq.extend(negate(
                &ring,
                &multiply(&ring, self.h((i, j + 1)), self.v((i, j))),
            ));
            if !nonzero_groups(&ring, sq, self.at((i + 1, j + 1))).is_empty() {
                return Err(Error::MalformedComplex(format!(
                    "square at ({i}, {j}) does not commute"
                )));
            }
        }
        Ok(())
    }
}

/// `Tot^n = ⊕_{i+j=n} A^{i,j}` ordered by increasing `i`, with `d = d_h + (-1)^i d_v`.
pub fn total(a: &DoubleComplex) -> Result<Complex> {
    a.check()?;
    let ring = a.params.ring();
    if a.terms.is_empty() {
        return Ok(Complex::empty(a.params, a.w));
    }
    let degs: Vec<i64> = a.terms.keys().map(|(i, j)| i + j).collect();
    let lo = *degs.iter().min().unwrap();
    let end = *degs.iter().max().unwrap() + 1;
    // position of each block inside its total degree
    let mut layout: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut terms = Vec::new();
    for n in lo..end {
        let mut ts = Vec::new();
        for (&(i, j), t) in a.terms.range((i64::MIN, i64::MIN)..) {
            if i + j == n {
                layout.insert((i, j), ts.len());
                ts.extend_from_slice(t);
            }
        }
        terms.push(ts);
    }
    let mut diffs = vec![Vec::new(); terms.len().saturating_sub(1)];
    for &(i, j) in a.terms.keys() {
        let n = i + j;
        if n + 1 >= end {
            continue;
        }
        let col0 = layout[&(i, j)];
        let slot = &mut diffs[(n - lo) as usize];
        if let Some(&row0) = layout.get(&(i + 1, j)) {
            slot.extend(offset(a.h((i, j)), row0, col0));
        }
        if let Some(&row0) = layout.get(&(i, j + 1)) {
            let v = if i.rem_euclid(2) == 1 {
                negate(&ring, a.v((i, j)))
            } else {
                a.v((i, j)).to_vec()
            };
            slot.extend(offset(&v, row0, col0));
        }
    }
    Complex::new(a.params, a.w, lo, terms, diffs)
}

/// `C` separated into its dimension-`r` part (one subcomplex per support)
/// and the rest, so that `C ≅ cone(connecting : eq -> lt[1])[-1]`.
#[derive(Debug, Clone)]
pub struct Split {
    pub eq_by_support: BTreeMap<Vec<usize>, Complex>,
    pub eq: Complex,
    pub lt: Complex,
    /// `connecting.maps[n]` goes from `eq^n` to `lt^{n+1}`.
    pub connecting: Morphism,
    /// Original index of every summand of `eq` and of `lt`, per degree.
    pub eq_origin: Vec<Vec<usize>>,
    pub lt_origin: Vec<Vec<usize>>,
}

pub fn split_by_dimension(c: &Complex, r: usize) -> Result<Split> {
    if let Some(d) = c.dimension() {
        if d > r {
            return Err(Error::MalformedComplex(format!(
                "complex has dimension {d} > {r}"
            )));
        }
    }
    let ring = c.params.ring();
    let nd = c.terms.len();
    let mut eq_origin = vec![Vec::new(); nd];
    let mut lt_origin = vec![Vec::new(); nd];
    // new index of each original summand: (is_eq, position)
    let mut place: Vec<Vec<(bool, usize)>> = vec![Vec::new(); nd];
    for (n, ts) in c.terms.iter().enumerate() {
        for (idx, t) in ts.iter().enumerate() {
            if t.dimension() == r {
                place[n].push((true, eq_origin[n].len()));
                eq_origin[n].push(idx);
            } else {
                place[n].push((false, lt_origin[n].len()));
                lt_origin[n].push(idx);
            }
        }
    }
    let mut eq_d = vec![Vec::new(); nd.saturating_sub(1)];
    let mut lt_d = vec![Vec::new(); nd.saturating_sub(1)];
    let mut connecting = Morphism::default();
    for (n, d) in c.diffs.iter().enumerate() {
        for e in d {
            let (se, sp) = place[n][e.col];
            let (te, tp) = place[n + 1][e.row];
            let moved = Entry {
                row: tp,
                col: sp,
                ..e.clone()
            };
            match (se, te) {
                (true, true) => {
                    if c.terms[n][e.col].support() != c.terms[n + 1][e.row].support() {
                        return Err(Error::SupportMismatch(
                            "nonzero map between distinct supports of equal dimension".into(),
                        ));
                    }
                    eq_d[n].push(moved)
                }
                (false, false) => lt_d[n].push(moved),
                (true, false) => connecting
                    .maps
                    .entry(c.lo + n as i64)
                    .or_default()
                    .push(Entry {
                        alpha: ring.neg(e.alpha),
                        ..moved
                    }),
                (false, true) => {
                    return Err(Error::MalformedComplex(format!(
                        "nonzero map from dimension < {r} to dimension {r} in degree {}",
                        c.lo + n as i64
                    )))
                }
            }
        }
    }
    let pick = |origin: &Vec<Vec<usize>>| -> Vec<Vec<Term>> {
        origin
            .iter()
            .enumerate()
            .map(|(n, ix)| ix.iter().map(|&i| c.terms[n][i].clone()).collect())
            .collect()
    };
    let eq = Complex::new(c.params, c.w, c.lo, pick(&eq_origin), eq_d)?;
    let lt = Complex::new(c.params, c.w, c.lo, pick(&lt_origin), lt_d)?;

    let mut supports: Vec<Vec<usize>> = eq
        .terms
        .iter()
        .flatten()
        .map(|t| t.support().into_iter().collect())
        .collect();
    supports.sort();
    supports.dedup();
    let mut eq_by_support = BTreeMap::new();
    for s in supports {
        let want: IndexSet = s.iter().copied().collect();
        let mut pos: Vec<Vec<Option<usize>>> = Vec::new();
        let mut terms = Vec::new();
        for ts in &eq.terms {
            let mut p = Vec::new();
            let mut kept = Vec::new();
            for t in ts {
                if t.support() == want {
                    p.push(Some(kept.len()));
                    kept.push(t.clone());
                } else {
                    p.push(None);
                }
            }
            pos.push(p);
            terms.push(kept);
        }
        let diffs = eq
            .diffs
            .iter()
            .enumerate()
            .map(|(n, d)| {
                d.iter()
                    .filter_map(|e| match (pos[n][e.col], pos[n + 1][e.row]) {
                        (Some(cc), Some(rr)) => Some(Entry {
                            row: rr,
                            col: cc,
                            ..e.clone()
                        }),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        eq_by_support.insert(s, Complex::new(c.params, c.w, c.lo, terms, diffs)?);
    }
    Ok(Split {
        eq_by_support,
        eq,
        lt,
        connecting,
        eq_origin,
        lt_origin,
    })
}

/// `cone(connecting : eq -> lt[1])[-1]`, summands of `lt` first in each degree.
pub fn reassemble(s: &Split) -> Result<Complex> {
    let lt1 = shift(&s.lt, 1);
    Ok(shift(&cone(&s.eq, &lt1, &s.connecting)?, -1).trimmed())
}
