//! Monomial-quotient realization of admissible complexes over Z/p^m and exact
//! verification through strands.
//!
//! A term with orders `M` is realized as `R[x_1..x_g] / (x_i^{M_i} : M_i > 0)`
//! and `α h̃_R` as multiplication by `α x^R`. Each summand `s` is regraded by
//! an offset `o_s` so that every map has degree zero: the monomial `x^e` of
//! `s` sits in multidegree `o_s + e`. The complex then splits into strands,
//! one per multidegree, each a finite complex of free modules of rank at most
//! one per summand.
//!
//! Membership of a summand in a strand only changes at the critical values
//! `o_{s,c}` and `o_{s,c} + b_{s,c}`, so one representative per cell of the
//! critical grid decides exactness everywhere.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::{annihilates, Complex, Entry};
use crate::error::{Error, Result};
use crate::resolution::{Bracket, Resolution};
use crate::snf::homology_over_zpm;
use crate::terms::Term;
use crate::zpm::{ModMatrix, Zpm};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialQuotient {
    /// `Some(b)` means `x_i^b = 0`; `None` means no relation in `x_i`.
    pub bounds: Vec<Option<u64>>,
}

impl MonomialQuotient {
    pub fn free(g: usize) -> Self {
        Self {
            bounds: vec![None; g],
        }
    }

    fn orders(&self) -> Vec<u64> {
        self.bounds.iter().map(|b| b.unwrap_or(0)).collect()
    }
}

pub fn realize_term(t: &Term) -> MonomialQuotient {
    MonomialQuotient {
        bounds: t.orders.0.iter().map(|&m| (m > 0).then_some(m)).collect(),
    }
}

/// Whether `x^R` maps `source` into `target` compatibly with the relations.
pub fn is_well_defined(source: &MonomialQuotient, target: &MonomialQuotient, exps: &[u64]) -> bool {
    if annihilates(exps, &target.orders()) {
        return true;
    }
    source
        .bounds
        .iter()
        .enumerate()
        .all(|(c, a)| match (a, target.bounds[c]) {
            (None, _) => true,
            (Some(a), Some(b)) => a + exps[c] >= b,
            (Some(_), None) => false,
        })
}

/// A complex of monomial quotients; `maps[i]` goes from degree `lo + i` to `lo + i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyComplex {
    pub ring: Zpm,
    pub g: usize,
    pub lo: i64,
    pub modules: Vec<Vec<MonomialQuotient>>,
    pub maps: Vec<Vec<Entry>>,
    /// Grading offset of every summand.
    pub offsets: Vec<Vec<Vec<i64>>>,
}

impl ToyComplex {
    /// Checks well-definedness of every map, `d² = 0` and consistency of the
    /// multigrading, and computes the offsets.
    pub fn new(
        ring: Zpm,
        g: usize,
        lo: i64,
        modules: Vec<Vec<MonomialQuotient>>,
        maps: Vec<Vec<Entry>>,
    ) -> Result<Self> {
        if maps.len() != modules.len().saturating_sub(1) {
            return Err(Error::MalformedComplex(
                "wrong number of differentials".into(),
            ));
        }
        for mq in modules.iter().flatten() {
            if mq.bounds.len() != g {
                return Err(Error::LengthMismatch {
                    expected: g,
                    got: mq.bounds.len(),
                });
            }
        }
        let mut clean = Vec::new();
        for (n, d) in maps.into_iter().enumerate() {
            let mut kept = Vec::new();
            for e in d {
                let (Some(s), Some(t)) = (modules[n].get(e.col), modules[n + 1].get(e.row)) else {
                    return Err(Error::MalformedComplex(format!(
                        "entry out of range in degree {}",
                        lo + n as i64
                    )));
                };
                if e.shift.len() != g {
                    return Err(Error::LengthMismatch {
                        expected: g,
                        got: e.shift.len(),
                    });
                }
                if !is_well_defined(s, t, &e.shift) {
                    return Err(Error::IllDefinedMonomialMap(format!(
                        "x^{:?} from {:?} to {:?} in degree {}",
                        e.shift,
                        s.bounds,
                        t.bounds,
                        lo + n as i64
                    )));
                }
                let alpha = e.alpha % ring.modulus();
                if alpha != 0 && !annihilates(&e.shift, &t.orders()) {
                    kept.push(Entry { alpha, ..e });
                }
            }
            clean.push(kept);
        }
        let mut tc = Self {
            ring,
            g,
            lo,
            modules,
            maps: clean,
            offsets: Vec::new(),
        };
        tc.check_d_squared()?;
        tc.offsets = tc.compute_offsets()?;
        Ok(tc)
    }

    fn check_d_squared(&self) -> Result<()> {
        for n in 0..self.maps.len().saturating_sub(1) {
            let comp = crate::complexes::multiply(&self.ring, &self.maps[n + 1], &self.maps[n]);
            for e in comp {
                if e.alpha != 0 && !annihilates(&e.shift, &self.modules[n + 2][e.row].orders()) {
                    return Err(Error::MalformedComplex(format!(
                        "d² ≠ 0 at degree {}: ({}, {}) x^{:?}",
                        self.lo + n as i64,
                        e.row,
                        e.col,
                        e.shift
                    )));
                }
            }
        }
        Ok(())
    }

    fn compute_offsets(&self) -> Result<Vec<Vec<Vec<i64>>>> {
        let g = self.g;
        let mut adj: BTreeMap<(usize, usize), Vec<((usize, usize), Vec<i64>)>> = BTreeMap::new();
        for (n, d) in self.maps.iter().enumerate() {
            for e in d {
                let s = (n, e.col);
                let t = (n + 1, e.row);
                let r: Vec<i64> = e.shift.iter().map(|&x| x as i64).collect();
                let neg: Vec<i64> = r.iter().map(|x| -x).collect();
                // o_t = o_s - R
                adj.entry(s).or_default().push((t, neg));
                adj.entry(t).or_default().push((s, r));
            }
        }
        let mut off: Vec<Vec<Option<Vec<i64>>>> =
            self.modules.iter().map(|ms| vec![None; ms.len()]).collect();
        for n in 0..self.modules.len() {
            for i in 0..self.modules[n].len() {
                if off[n][i].is_some() {
                    continue;
                }
                let mut comp = vec![(n, i)];
                off[n][i] = Some(vec![0; g]);
                let mut queue = VecDeque::from([(n, i)]);
                while let Some(u) = queue.pop_front() {
                    let ou = off[u.0][u.1].clone().unwrap();
                    for (v, delta) in adj.get(&u).map_or(&[][..], Vec::as_slice) {
                        let want: Vec<i64> = ou.iter().zip(delta).map(|(a, b)| a + b).collect();
                        match &off[v.0][v.1] {
                            Some(have) if *have != want => {
                                return Err(Error::InconsistentGrading(format!(
                                    "summand {} in degree {} gets offsets {:?} and {:?}",
                                    v.1,
                                    self.lo + v.0 as i64,
                                    have,
                                    want
                                )))
                            }
                            Some(_) => {}
                            None => {
                                off[v.0][v.1] = Some(want);
                                comp.push(*v);
                                queue.push_back(*v);
                            }
                        }
                    }
                }
                let mins: Vec<i64> = (0..g)
                    .map(|c| {
                        comp.iter()
                            .map(|u| off[u.0][u.1].as_ref().unwrap()[c])
                            .min()
                            .unwrap()
                    })
                    .collect();
                for u in comp {
                    let o = off[u.0][u.1].as_mut().unwrap();
                    for c in 0..g {
                        o[c] -= mins[c];
                    }
                }
            }
        }
        Ok(off
            .into_iter()
            .map(|v| v.into_iter().map(Option::unwrap).collect())
            .collect())
    }

    fn contributes(&self, n: usize, i: usize, a: &[i64]) -> bool {
        let o = &self.offsets[n][i];
        let b = &self.modules[n][i].bounds;
        (0..self.g).all(|c| a[c] >= o[c] && b[c].is_none_or(|bc| a[c] < o[c] + bc as i64))
    }

    /// Critical values on every axis.
    pub fn critical_values(&self) -> Vec<BTreeSet<i64>> {
        let mut out = vec![BTreeSet::from([0]); self.g];
        for (n, ms) in self.modules.iter().enumerate() {
            for (i, mq) in ms.iter().enumerate() {
                let o = &self.offsets[n][i];
                for c in 0..self.g {
                    out[c].insert(o[c]);
                    if let Some(b) = mq.bounds[c] {
                        out[c].insert(o[c] + b as i64);
                    }
                }
            }
        }
        out
    }

    /// Smallest box beyond which every strand repeats one inside it.
    pub fn required_box(&self) -> Vec<i64> {
        self.critical_values()
            .iter()
            .map(|s| s.iter().max().unwrap() + 1)
            .collect()
    }

    pub fn strand(&self, a: &[i64]) -> Strand {
        let members: Vec<Vec<usize>> = self
            .modules
            .iter()
            .enumerate()
            .map(|(n, ms)| {
                (0..ms.len())
                    .filter(|&i| self.contributes(n, i, a))
                    .collect()
            })
            .collect();
        let mut matrices = Vec::new();
        for (n, d) in self.maps.iter().enumerate() {
            let (src, tgt) = (&members[n], &members[n + 1]);
            let mut m = ModMatrix::zeros(tgt.len(), src.len());
            if !src.is_empty() && !tgt.is_empty() {
                let si: BTreeMap<usize, usize> =
                    src.iter().enumerate().map(|(k, &v)| (v, k)).collect();
                let ti: BTreeMap<usize, usize> =
                    tgt.iter().enumerate().map(|(k, &v)| (v, k)).collect();
                for e in d {
                    if let (Some(&c), Some(&r)) = (si.get(&e.col), ti.get(&e.row)) {
                        m.add_to(&self.ring, r, c, e.alpha);
                    }
                }
            }
            matrices.push(m);
        }
        Strand {
            multidegree: a.to_vec(),
            lo: self.lo,
            members,
            matrices,
        }
    }
}

/// The strand of a toy complex at one multidegree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strand {
    pub multidegree: Vec<i64>,
    pub lo: i64,
    /// Contributing summands per degree.
    pub members: Vec<Vec<usize>>,
    /// `matrices[i]` maps degree `lo + i` to `lo + i + 1`.
    pub matrices: Vec<ModMatrix>,
}

impl Strand {
    pub fn ranks(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    fn d_in(&self, i: usize) -> ModMatrix {
        if i == 0 {
            ModMatrix::zeros(self.members[0].len(), 0)
        } else {
            self.matrices[i - 1].clone()
        }
    }

    fn d_out(&self, i: usize) -> ModMatrix {
        if i < self.matrices.len() {
            self.matrices[i].clone()
        } else {
            ModMatrix::zeros(0, self.members[i].len())
        }
    }

    /// Positions (as indices from `lo`) with nonzero homology.
    pub fn inexact_positions(&self, ring: &Zpm) -> Vec<usize> {
        let lens: Vec<u32> = self.matrices.iter().map(|m| m.image_length(ring)).collect();
        (0..self.members.len())
            .filter(|&i| {
                let out = lens.get(i).copied().unwrap_or(0);
                let inc = if i == 0 { 0 } else { lens[i - 1] };
                ring.m() * self.members[i].len() as u32 != out + inc
            })
            .collect()
    }

    /// Exponents of the homology at position `i` (index from `lo`).
    pub fn homology(&self, ring: &Zpm, i: usize) -> Result<Vec<u32>> {
        homology_over_zpm(ring, &self.d_in(i), &self.d_out(i))
    }
}

pub fn realize_complex(c: &Complex) -> Result<ToyComplex> {
    let modules = c
        .terms
        .iter()
        .map(|ts| ts.iter().map(realize_term).collect())
        .collect();
    ToyComplex::new(c.params.ring(), c.params.g, c.lo, modules, c.diffs.clone()).map_err(internal)
}

fn internal(e: Error) -> Error {
    match e {
        Error::IllDefinedMonomialMap(s) => {
            Error::Internal(format!("admissible input realized badly: {s}"))
        }
        other => other,
    }
}

/// `source -> complex^0 -> complex^1 -> ...` with the source in degree -1.
pub fn augmented(
    ring: Zpm,
    source: &MonomialQuotient,
    in_map: &[Entry],
    complex: &ToyComplex,
) -> Result<ToyComplex> {
    if complex.lo < 0 {
        return Err(Error::MalformedComplex(
            "bracket must start in degree 0".into(),
        ));
    }
    let g = source.bounds.len();
    let end = (complex.lo + complex.modules.len() as i64).max(1);
    let module_at = |n: i64| {
        let i = n - complex.lo;
        if i >= 0 && (i as usize) < complex.modules.len() {
            complex.modules[i as usize].clone()
        } else {
            Vec::new()
        }
    };
    let map_at = |n: i64| {
        let i = n - complex.lo;
        if i >= 0 && (i as usize) < complex.maps.len() {
            complex.maps[i as usize].clone()
        } else {
            Vec::new()
        }
    };
    let mut modules = vec![vec![source.clone()]];
    let mut maps = vec![in_map.to_vec()];
    for n in 0..end {
        modules.push(module_at(n));
        if n + 1 < end {
            maps.push(map_at(n));
        }
    }
    ToyComplex::new(ring, g, -1, modules, maps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepMode {
    /// One representative per cell of the critical grid.
    Cells,
    /// Every multidegree in the box.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrandFailure {
    pub multidegree: Vec<i64>,
    pub degree: i64,
    /// Homology `⊕ Z/p^{e}` as the exponents `e`.
    pub divisors: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactnessReport {
    pub strands_checked: usize,
    pub required_box: Vec<i64>,
    pub failures: Vec<StrandFailure>,
}

impl ExactnessReport {
    pub fn is_exact(&self) -> bool {
        self.failures.is_empty()
    }
}

fn grid(axes: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for ax in axes {
        let mut next = Vec::with_capacity(out.len() * ax.len());
        for p in &out {
            for &v in ax {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Exactness of every strand of `tc` inside `bx`. The box must exceed every
/// critical value, so that strands outside it repeat strands inside it.
pub fn verify_exactness(tc: &ToyComplex, bx: &[i64], mode: SweepMode) -> Result<ExactnessReport> {
    let required = tc.required_box();
    if bx.len() != tc.g || bx.iter().zip(&required).any(|(b, r)| b < r) {
        return Err(Error::BoxTooSmall {
            given: bx.to_vec(),
            required,
        });
    }
    let axes: Vec<Vec<i64>> = match mode {
        SweepMode::Cells => tc
            .critical_values()
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
        SweepMode::Exhaustive => bx.iter().map(|&b| (0..b).collect()).collect(),
    };
    let points = grid(&axes);
    let ring = tc.ring;
    let failures: Result<Vec<Vec<StrandFailure>>> = points
        .par_iter()
        .map(|a| {
            let s = tc.strand(a);
            let mut out = Vec::new();
            for i in s.inexact_positions(&ring) {
                out.push(StrandFailure {
                    multidegree: a.clone(),
                    degree: tc.lo + i as i64,
                    divisors: s.homology(&ring, i)?,
                });
            }
            Ok(out)
        })
        .collect();
    let mut failures: Vec<StrandFailure> = failures?.into_iter().flatten().collect();
    failures.sort_by(|x, y| (&x.multidegree, x.degree).cmp(&(&y.multidegree, y.degree)));
    Ok(ExactnessReport {
        strands_checked: points.len(),
        required_box: required,
        failures,
    })
}

/// The augmented complex `source -> bracket` is exact on every strand in the box.
pub fn verify_quasi_isomorphism(
    source: &MonomialQuotient,
    in_map: &[Entry],
    bracket: &ToyComplex,
    bx: &[i64],
    mode: SweepMode,
) -> Result<ExactnessReport> {
    let aug = augmented(bracket.ring, source, in_map, bracket)?;
    verify_exactness(&aug, bx, mode)
}

/// Realize a single-term bracket together with its in-map.
pub fn realize_bracket(b: &Bracket) -> Result<ToyComplex> {
    let tc = realize_complex(&b.complex)?;
    augmented(tc.ring, &realize_term(&b.source), &[b.in_map()], &tc)
}

/// Realize a resolution together with its in-map from the source term.
pub fn realize_resolution(r: &Resolution) -> Result<ToyComplex> {
    let tc = realize_complex(&r.complex)?;
    augmented(tc.ring, &realize_term(&r.source), &r.in_map, &tc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mq(b: &[Option<u64>]) -> MonomialQuotient {
        MonomialQuotient { bounds: b.to_vec() }
    }

    fn e(row: usize, col: usize, alpha: u64, shift: &[u64]) -> Entry {
        Entry {
            row,
            col,
            alpha,
            shift: shift.to_vec(),
        }
    }

    #[test]
    fn realize_term_bounds() {
        use crate::weight_lattice::{Params, Weight};
        let p = Params::new(3, 3, 1, 4).unwrap();
        let t = Term::new(&p, Weight::new(vec![2, 2, 2], 0), vec![2, 0, 0]).unwrap();
        assert_eq!(realize_term(&t).bounds, vec![Some(2), None, None]);
        let t = Term::full(&p, Weight::new(vec![2, 2, 2], 0)).unwrap();
        assert_eq!(realize_term(&t), MonomialQuotient::free(3));
    }

    #[test]
    fn well_definedness() {
        let a = mq(&[Some(2), None]);
        assert!(is_well_defined(&a, &mq(&[Some(2), Some(4)]), &[0, 0]));
        assert!(!is_well_defined(&a, &mq(&[Some(6), None]), &[2, 0]));
        assert!(!is_well_defined(&a, &mq(&[None, None]), &[0, 0]));
        // zero map because x^R is in the target ideal
        assert!(is_well_defined(&a, &mq(&[None, Some(2)]), &[0, 2]));
        assert!(is_well_defined(&mq(&[None, None]), &a, &[0, 0]));
    }

    #[test]
    fn ill_defined_map_rejected() {
        let r = Zpm::new(3, 1).unwrap();
        let res = ToyComplex::new(
            r,
            1,
            0,
            vec![vec![mq(&[Some(2)])], vec![mq(&[None])]],
            vec![vec![e(0, 0, 1, &[0])]],
        );
        assert!(matches!(res, Err(Error::IllDefinedMonomialMap(_))));
    }

    #[test]
    fn inconsistent_grading_rejected() {
        let r = Zpm::new(3, 1).unwrap();
        let f = || mq(&[None]);
        let res = ToyComplex::new(
            r,
            1,
            0,
            vec![vec![f()], vec![f()]],
            vec![vec![e(0, 0, 1, &[0]), e(0, 0, 1, &[2])]],
        );
        assert!(matches!(res, Err(Error::InconsistentGrading(_))));
    }

    #[test]
    fn strand_membership() {
        let r = Zpm::new(3, 1).unwrap();
        // R[x] --x^2--> R[x]
        let tc = ToyComplex::new(
            r,
            1,
            0,
            vec![vec![mq(&[None])], vec![mq(&[None])]],
            vec![vec![e(0, 0, 1, &[2])]],
        )
        .unwrap();
        assert_eq!(tc.offsets, vec![vec![vec![2]], vec![vec![0]]]);
        assert_eq!(tc.strand(&[0]).ranks(), vec![0, 1]);
        assert_eq!(tc.strand(&[1]).ranks(), vec![0, 1]);
        let s = tc.strand(&[2]);
        assert_eq!(s.ranks(), vec![1, 1]);
        assert_eq!(s.matrices[0].get(0, 0), 1);
    }

    #[test]
    fn multiplication_by_power_has_cokernel() {
        let r = Zpm::new(3, 1).unwrap();
        let tc = ToyComplex::new(
            r,
            1,
            0,
            vec![vec![mq(&[None])], vec![mq(&[None])]],
            vec![vec![e(0, 0, 1, &[2])]],
        )
        .unwrap();
        let rep = verify_exactness(&tc, &[3], SweepMode::Exhaustive).unwrap();
        assert_eq!(rep.failures.len(), 2);
        assert_eq!(rep.failures[0].divisors, vec![1]);
        assert!(matches!(
            verify_exactness(&tc, &[2], SweepMode::Cells),
            Err(Error::BoxTooSmall { .. })
        ));
    }

    #[test]
    fn short_exact_sequence_is_exact() {
        // 0 -> R[x]/x^2 --x^4--> R[x]/x^6 -> R[x]/x^4 -> 0 over Z/9
        let r = Zpm::new(3, 2).unwrap();
        let tc = ToyComplex::new(
            r,
            1,
            0,
            vec![
                vec![mq(&[Some(2)])],
                vec![mq(&[Some(6)])],
                vec![mq(&[Some(4)])],
            ],
            vec![vec![e(0, 0, 1, &[4])], vec![e(0, 0, 1, &[0])]],
        )
        .unwrap();
        for mode in [SweepMode::Cells, SweepMode::Exhaustive] {
            assert!(verify_exactness(&tc, &[8], mode).unwrap().is_exact());
        }
    }

    #[test]
    fn scalar_three_on_z9_is_detected() {
        let r = Zpm::new(3, 2).unwrap();
        let tc = ToyComplex::new(
            r,
            1,
            0,
            vec![vec![mq(&[Some(2)])], vec![mq(&[Some(2)])]],
            vec![vec![e(0, 0, 3, &[0])]],
        )
        .unwrap();
        let rep = verify_exactness(&tc, &[3], SweepMode::Cells).unwrap();
        assert_eq!(rep.failures.len(), 2);
        assert!(rep.failures.iter().all(|f| f.divisors == vec![1]));
    }
}
