//! Koszul resolutions of restricted terms, the chain maps between them, and
//! the inductive construction of a complex of favorable terms.
//!
//! Every bracket here is an instance of one construction. For a term `t` and
//! an exponent tuple `E`, the bracket has one summand for each subset `I` of
//! `P = { c : E_c > 0 }`, placed in degree `#I`, with weight `k + E_p` and
//! orders
//!
//! * `E_c` for `c ∈ I`,
//! * `M_c + E_c` for `c ∉ I` with `M_c > 0`,
//! * `0` for `c ∉ I` with `M_c = 0`,
//!
//! and signed restrictions as differentials. The in-map is `h̃_E`. The
//! stratum resolution is `E = N^{(J)}` on the support and zero elsewhere; the
//! lower resolution is `E = N·1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complexes::{
    annihilates, check_d_squared, check_morphism, multiply, normalize, total, AdmissibleHom,
    Complex, DoubleComplex, Entry, Morphism,
};
use crate::error::{Error, Result};
use crate::terms::{check_favorable, Term, VanishingTuple};
use crate::weight_lattice::{make_favorable_exponents, DeltaModel, IndexSet, Params, Weight};

/// A resolution `t -> [B^0 -> B^1 -> ...]` of a single term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bracket {
    pub source: Term,
    pub exponents: Vec<u64>,
    pub complex: Complex,
    /// The index set `I` of every summand, per degree.
    pub subsets: Vec<Vec<Vec<usize>>>,
}

impl Bracket {
    /// The in-map `h̃_E` into the degree-0 summand.
    pub fn in_map(&self) -> Entry {
        Entry {
            row: 0,
            col: 0,
            alpha: 1,
            shift: self.exponents.clone(),
        }
    }

    fn position(&self, subset: &[usize]) -> Option<usize> {
        self.subsets
            .get(subset.len())?
            .iter()
            .position(|s| s == subset)
    }
}

fn subsets_of_size(items: &[usize], s: usize) -> Vec<Vec<usize>> {
    fn rec(
        items: &[usize],
        s: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, s, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, s, 0, &mut Vec::new(), &mut out);
    out
}

/// The bracket of `t` for an arbitrary exponent tuple `E` (see module docs).
pub fn koszul_resolution(params: &Params, t: &Term, exponents: &[u64]) -> Result<Bracket> {
    t.validate(params)?;
    let g = params.g;
    if exponents.len() != g {
        return Err(Error::LengthMismatch {
            expected: g,
            got: exponents.len(),
        });
    }
    let step = params.step();
    if let Some(index) = exponents.iter().position(|e| e % step != 0) {
        return Err(Error::Divisibility {
            index,
            value: exponents[index],
            step,
        });
    }
    let ring = params.ring();
    let m = &t.orders.0;
    let weight = t.weight.shifted(&params.weight_shift_of(exponents));
    let live: Vec<usize> = (0..g).filter(|&c| exponents[c] > 0).collect();
    let subsets: Vec<Vec<Vec<usize>>> = (0..=live.len())
        .map(|s| subsets_of_size(&live, s))
        .collect();
    let terms: Vec<Vec<Term>> = subsets
        .iter()
        .map(|level| {
            level
                .iter()
                .map(|i| {
                    let orders = (0..g)
                        .map(|c| {
                            if i.contains(&c) {
                                exponents[c]
                            } else if m[c] > 0 {
                                m[c] + exponents[c]
                            } else {
                                0
                            }
                        })
                        .collect();
                    Term {
                        weight: weight.clone(),
                        orders: VanishingTuple(orders),
                    }
                })
                .collect()
        })
        .collect();
    let mut diffs = Vec::new();
    for s in 0..live.len() {
        let mut d = Vec::new();
        for (col, i) in subsets[s].iter().enumerate() {
            for &j in &live {
                if i.contains(&j) {
                    continue;
                }
                let mut bigger = i.clone();
                bigger.push(j);
                bigger.sort_unstable();
                let row = subsets[s + 1].iter().position(|x| *x == bigger).unwrap();
                let below = i.iter().filter(|&&x| x < j).count();
                let alpha = if below % 2 == 0 { 1 } else { ring.neg(1) };
                d.push(Entry {
                    row,
                    col,
                    alpha,
                    shift: vec![0; g],
                });
            }
        }
        diffs.push(d);
    }
    let complex = Complex::new(*params, t.weight.w, 0, terms, diffs)?;
    Ok(Bracket {
        source: t.clone(),
        exponents: exponents.to_vec(),
        complex,
        subsets,
    })
}

/// Resolution of a term supported on `J` by multiplication with `h̃_{N^{(J)}}`.
/// `n` is a full `g`-tuple, positive exactly on the support of `t`.
pub fn koszul_stratum_resolution(params: &Params, t: &Term, n: &[u64]) -> Result<Bracket> {
    if n.len() != params.g {
        return Err(Error::LengthMismatch {
            expected: params.g,
            got: n.len(),
        });
    }
    let supp = t.support();
    let given: IndexSet = (0..params.g).filter(|&i| n[i] > 0).collect();
    if supp != given {
        return Err(Error::SupportMismatch(format!(
            "term has support {supp:?} but exponents are positive on {given:?}"
        )));
    }
    koszul_resolution(params, t, n)
}

/// Resolution by multiplication with `h̃_{N·1}`.
pub fn lower_dim_resolution(params: &Params, t: &Term, n: u64) -> Result<Bracket> {
    if n == 0 {
        return Err(Error::InvalidParams("N must be positive".into()));
    }
    koszul_resolution(params, t, &vec![n; params.g])
}

/// Lift `α h̃_R : src.source -> tgt.source` to the brackets: the summand `I`
/// maps to the summand `I` by `α h̃_{R + E_tgt - E_src}`.
pub fn connect_resolutions(
    params: &Params,
    h: &AdmissibleHom,
    src: &Bracket,
    tgt: &Bracket,
) -> Result<Morphism> {
    if h.source != src.source || h.target != tgt.source {
        return Err(Error::EndpointMismatch);
    }
    let mut phi = Morphism::default();
    for (deg, e) in lift_entry(params, h.alpha, &h.shift, src, tgt)? {
        phi.maps.entry(deg).or_default().push(e);
    }
    let ring = params.ring();
    for (deg, entries) in phi.maps.iter_mut() {
        *entries = normalize(&ring, std::mem::take(entries), tgt.complex.terms_at(*deg));
    }
    check_morphism(&src.complex, &tgt.complex, &phi)?;
    Ok(phi)
}

/// Lifted entries `(degree, entry)`, summand `I` to summand `I`.
fn lift_entry(
    params: &Params,
    alpha: u64,
    shift: &[u64],
    src: &Bracket,
    tgt: &Bracket,
) -> Result<Vec<(i64, Entry)>> {
    let g = params.g;
    let alpha = params.ring().reduce(alpha as i64);
    if alpha == 0 {
        return Ok(Vec::new());
    }
    let mut lifted = vec![0u64; g];
    for c in 0..g {
        let x = shift[c] as i64 + tgt.exponents[c] as i64 - src.exponents[c] as i64;
        if x < 0 {
            return Err(Error::NotAdmissible(format!(
                "lifted exponent at index {c} is negative; the plan's N is too small"
            )));
        }
        lifted[c] = x as u64;
    }
    let mut out = Vec::new();
    for (deg, level) in src.subsets.iter().enumerate() {
        for (col, i) in level.iter().enumerate() {
            if let Some(row) = tgt.position(i) {
                let tt = &tgt.complex.terms[deg][row];
                if annihilates(&lifted, &tt.orders.0) {
                    continue;
                }
                out.push((
                    deg as i64,
                    Entry {
                        row,
                        col,
                        alpha,
                        shift: lifted.clone(),
                    },
                ));
            }
        }
    }
    Ok(out)
}

/// Exponents chosen for one support class in one iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassPlan {
    pub support: Vec<usize>,
    pub terms: usize,
    /// `N^{(J)}`, zero off the support.
    pub hasse: Vec<u64>,
    /// The q-twist certifying favorability, zero on the support.
    pub theta: Vec<u64>,
    /// Exponent tuple actually used for the class's resolutions.
    pub exponents: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationPlan {
    pub dimension: usize,
    pub classes: Vec<ClassPlan>,
    /// Global `N`, present when lower-dimensional terms were resolved.
    pub n: Option<u64>,
    pub lower_terms: usize,
    pub new_terms: usize,
    pub favorable_added: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionMetadata {
    pub iterations: usize,
    pub degenerate_g1: bool,
    pub terms: usize,
    pub terms_per_degree: Vec<usize>,
    pub all_favorable: bool,
    pub favorability_budget_exhausted: usize,
    /// The q-twist witnessing favorability of each term, per degree.
    pub twists: Vec<Vec<Vec<u64>>>,
}

/// A complex of favorable terms with a quasi-isomorphism from `source`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub complex: Complex,
    pub source: Term,
    /// `source -> complex^0`
    pub in_map: Vec<Entry>,
    pub plan: Vec<IterationPlan>,
    pub metadata: ResolutionMetadata,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ResolutionOptions {
    /// Budget for every exponent search; `None` uses the default rule.
    pub budget: Option<u64>,
}

struct State {
    lo: i64,
    terms: Vec<Vec<Term>>,
    done: Vec<Vec<bool>>,
    diffs: Vec<Vec<Entry>>,
    in_map: Vec<Entry>,
}

impl State {
    fn terms_at(&self, n: i64) -> &[Term] {
        let i = n - self.lo;
        if i < 0 || i as usize >= self.terms.len() {
            &[]
        } else {
            &self.terms[i as usize]
        }
    }
}

fn componentwise_max(rows: impl Iterator<Item = Vec<u64>>, g: usize) -> Vec<u64> {
    let mut out = vec![0; g];
    for r in rows {
        for i in 0..g {
            out[i] = out[i].max(r[i]);
        }
    }
    out
}

/// Theorem-level driver: a bounded admissible complex of favorable terms
/// quasi-isomorphic to the unrestricted term of weight `wt`.
pub fn favorable_resolution(
    params: &Params,
    model: &dyn DeltaModel,
    wt: &Weight,
    opts: ResolutionOptions,
) -> Result<Resolution> {
    params.validate()?;
    if wt.k.len() != params.g {
        return Err(Error::LengthMismatch {
            expected: params.g,
            got: wt.k.len(),
        });
    }
    if !wt.is_paritious() {
        return Err(Error::NotParitious {
            k: wt.k.clone(),
            w: wt.w,
        });
    }
    let g = params.g;
    let step = params.step();
    let ring = params.ring();
    let source = Term::full(params, wt.clone())?;
    let already = check_favorable(params, model, &source, opts.budget).favorable;
    let mut st = State {
        lo: 0,
        terms: vec![vec![source.clone()]],
        done: vec![vec![already]],
        diffs: Vec::new(),
        in_map: vec![Entry {
            row: 0,
            col: 0,
            alpha: 1,
            shift: vec![0; g],
        }],
    };
    let mut plans = Vec::new();

    loop {
        let rest: Vec<(usize, usize)> = st
            .done
            .iter()
            .enumerate()
            .flat_map(|(n, f)| {
                f.iter()
                    .enumerate()
                    .filter(|(_, d)| !**d)
                    .map(move |(i, _)| (n, i))
            })
            .collect();
        if rest.is_empty() {
            break;
        }
        if plans.len() > g {
            return Err(Error::Internal("dimension failed to drop".into()));
        }
        let r = rest
            .iter()
            .map(|&(n, i)| st.terms[n][i].dimension())
            .max()
            .unwrap();
        let lower = rest.iter().any(|&(n, i)| st.terms[n][i].dimension() < r);

        // one exponent choice per support class of dimension r
        let mut classes: BTreeMap<Vec<usize>, Vec<Term>> = BTreeMap::new();
        for &(n, i) in &rest {
            let t = &st.terms[n][i];
            if t.dimension() == r {
                classes
                    .entry(t.support().into_iter().collect())
                    .or_default()
                    .push(t.clone());
            }
        }
        let mut class_plans = Vec::new();
        for (supp, ts) in &classes {
            let jset: IndexSet = supp.iter().copied().collect();
            let pad: Vec<u64> = (0..g)
                .map(|c| if lower && !jset.contains(&c) { step } else { 0 })
                .collect();
            let plan = if supp.is_empty() {
                ClassPlan {
                    support: Vec::new(),
                    terms: ts.len(),
                    hasse: vec![0; g],
                    theta: vec![0; g],
                    exponents: vec![0; g],
                }
            } else {
                let orders = componentwise_max(ts.iter().map(|t| t.orders.0.clone()), g);
                let eff: Vec<u64> = orders.iter().zip(&pad).map(|(a, b)| a + b).collect();
                let shift = params.weight_shift_of(&pad);
                let mut weights: Vec<Weight> =
                    ts.iter().map(|t| t.weight.shifted(&shift)).collect();
                weights.sort();
                weights.dedup();
                let fav =
                    make_favorable_exponents(params, model, &jset, &eff, &weights, opts.budget)?;
                let exponents = fav.hasse.iter().zip(&pad).map(|(a, b)| a + b).collect();
                ClassPlan {
                    support: supp.clone(),
                    terms: ts.len(),
                    hasse: fav.hasse,
                    theta: fav.theta,
                    exponents,
                }
            };
            class_plans.push(plan);
        }
        let n_global = lower.then(|| {
            let top = class_plans
                .iter()
                .flat_map(|c| c.hasse.iter().copied())
                .max()
                .unwrap_or(0);
            step * (1 + top / step)
        });
        let exps_for = |t: &Term| -> Vec<u64> {
            if t.dimension() == r {
                let supp: Vec<usize> = t.support().into_iter().collect();
                class_plans
                    .iter()
                    .find(|c| c.support == supp)
                    .unwrap()
                    .exponents
                    .clone()
            } else {
                vec![n_global.unwrap(); g]
            }
        };

        // resolve every remaining term
        let mut brackets: BTreeMap<(usize, usize), Bracket> = BTreeMap::new();
        for &(n, i) in &rest {
            let t = &st.terms[n][i];
            brackets.insert((n, i), koszul_resolution(params, t, &exps_for(t))?);
        }

        // double complex A^{i,j}: column i is the degree in the current complex
        let mut a = DoubleComplex::new(*params, wt.w);
        let mut block: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (&(n, i), b) in &brackets {
            let col = st.lo + n as i64;
            let mut offs = Vec::new();
            for (j, ts) in b.complex.terms.iter().enumerate() {
                let slot = a.terms.entry((col, j as i64)).or_default();
                offs.push(slot.len());
                slot.extend(ts.iter().cloned());
            }
            block.insert((n, i), offs);
        }
        for (&(n, i), b) in &brackets {
            let col = st.lo + n as i64;
            let offs = &block[&(n, i)];
            for (j, d) in b.complex.diffs.iter().enumerate() {
                let slot = a.vert.entry((col, j as i64)).or_default();
                for e in d {
                    slot.push(Entry {
                        row: e.row + offs[j + 1],
                        col: e.col + offs[j],
                        ..e.clone()
                    });
                }
            }
        }
        for (n, d) in st.diffs.iter().enumerate() {
            for e in d {
                let (s, t) = ((n, e.col), (n + 1, e.row));
                let (Some(bs), Some(bt)) = (brackets.get(&s), brackets.get(&t)) else {
                    continue;
                };
                let (os, ot) = (&block[&s], &block[&t]);
                let col = st.lo + n as i64;
                for (deg, le) in lift_entry(params, e.alpha, &e.shift, bs, bt)? {
                    let du = deg as usize;
                    a.horiz.entry((col, deg)).or_default().push(Entry {
                        row: le.row + ot[du],
                        col: le.col + os[du],
                        ..le
                    });
                }
            }
        }
        let d_tot = total(&a)?;

        // where each (column, Koszul degree, index) lands in the total complex
        let mut tot_pos: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        {
            let mut fill: BTreeMap<i64, usize> = BTreeMap::new();
            for (&(i, j), ts) in &a.terms {
                let f = fill.entry(i + j).or_insert(0);
                tot_pos.insert((i, j), *f);
                *f += ts.len();
            }
        }

        // assemble the next state: done terms first, then the total complex
        let lo = st.lo.min(d_tot.lo);
        let end = (st.lo + st.terms.len() as i64).max(d_tot.end());
        let mut terms = Vec::new();
        let mut done = Vec::new();
        let mut keep: Vec<Vec<Option<usize>>> = Vec::new();
        for deg in lo..end {
            let mut ts = Vec::new();
            let mut fl = Vec::new();
            let mut kp = Vec::new();
            let old = st.terms_at(deg);
            let old_done: &[bool] = if old.is_empty() {
                &[]
            } else {
                &st.done[(deg - st.lo) as usize]
            };
            for (idx, t) in old.iter().enumerate() {
                if old_done[idx] {
                    kp.push(Some(ts.len()));
                    ts.push(t.clone());
                    fl.push(true);
                } else {
                    kp.push(None);
                }
            }
            for t in d_tot.terms_at(deg) {
                fl.push(t.dimension() == r);
                ts.push(t.clone());
            }
            terms.push(ts);
            done.push(fl);
            keep.push(kp);
        }
        let n_done = |deg: i64| -> usize { keep[(deg - lo) as usize].iter().flatten().count() };

        let mut diffs = vec![Vec::new(); terms.len().saturating_sub(1)];
        for (n, d) in st.diffs.iter().enumerate() {
            let deg = st.lo + n as i64;
            let slot = (deg - lo) as usize;
            for e in d {
                let src_new = keep[slot][e.col];
                let Some(src_new) = src_new else { continue };
                match keep[slot + 1][e.row] {
                    Some(tgt_new) => diffs[slot].push(Entry {
                        row: tgt_new,
                        col: src_new,
                        ..e.clone()
                    }),
                    None => {
                        // done -> rest, composed with the in-map of the rest term
                        let b = &brackets[&(n + 1, e.row)];
                        let base =
                            n_done(deg + 1) + tot_pos[&(deg + 1, 0)] + block[&(n + 1, e.row)][0];
                        let shift = e
                            .shift
                            .iter()
                            .zip(&b.exponents)
                            .map(|(x, y)| x + y)
                            .collect();
                        diffs[slot].push(Entry {
                            row: base,
                            col: src_new,
                            alpha: e.alpha,
                            shift,
                        });
                    }
                }
            }
        }
        for (k, d) in d_tot.diffs.iter().enumerate() {
            let deg = d_tot.lo + k as i64;
            let slot = (deg - lo) as usize;
            let (rs, cs) = (n_done(deg + 1), n_done(deg));
            for e in d {
                diffs[slot].push(Entry {
                    row: e.row + rs,
                    col: e.col + cs,
                    ..e.clone()
                });
            }
        }
        let mut in_map = Vec::new();
        let slot0 = (0 - lo) as usize;
        for e in &st.in_map {
            match keep[slot0][e.row] {
                Some(new) => in_map.push(Entry {
                    row: new,
                    ..e.clone()
                }),
                None => {
                    let b = &brackets[&((0 - st.lo) as usize, e.row)];
                    let row =
                        n_done(0) + tot_pos[&(0, 0)] + block[&((0 - st.lo) as usize, e.row)][0];
                    let shift = e
                        .shift
                        .iter()
                        .zip(&b.exponents)
                        .map(|(x, y)| x + y)
                        .collect();
                    in_map.push(Entry {
                        row,
                        col: 0,
                        alpha: e.alpha,
                        shift,
                    });
                }
            }
        }
        let in_map = normalize(&ring, in_map, &terms[slot0]);
        for (slot, d) in diffs.iter_mut().enumerate() {
            *d = normalize(&ring, std::mem::take(d), &terms[slot + 1]);
        }

        let favorable_added = d_tot
            .terms
            .iter()
            .flatten()
            .filter(|t| t.dimension() == r)
            .count();
        plans.push(IterationPlan {
            dimension: r,
            classes: class_plans,
            n: n_global,
            lower_terms: rest
                .iter()
                .filter(|&&(n, i)| st.terms[n][i].dimension() < r)
                .count(),
            new_terms: d_tot.num_terms(),
            favorable_added,
        });
        st = State {
            lo,
            terms,
            done,
            diffs,
            in_map,
        };
    }

    let complex = Complex::new(*params, wt.w, st.lo, st.terms, st.diffs)?;
    let violations = check_d_squared(&complex);
    if !violations.is_empty() {
        return Err(Error::Internal(format!(
            "constructed complex has d² ≠ 0: {:?}",
            violations[0]
        )));
    }
    let aug = multiply(&ring, complex.diff_at(0), &st.in_map);
    let aug = normalize(&ring, aug, complex.terms_at(1));
    if !aug.is_empty() {
        return Err(Error::Internal("in-map is not a chain map".into()));
    }
    let trimmed = complex.trimmed();
    let in_map = st.in_map;

    let mut exhausted = 0;
    let mut all_favorable = true;
    let mut twists = Vec::new();
    for ts in &trimmed.terms {
        let mut row = Vec::new();
        for t in ts {
            let chk = check_favorable(params, model, t, opts.budget);
            all_favorable &= chk.favorable;
            exhausted += usize::from(chk.budget_exhausted);
            row.push(chk.twist.unwrap_or_default());
        }
        twists.push(row);
    }
    let metadata = ResolutionMetadata {
        iterations: plans.len(),
        degenerate_g1: params.is_degenerate(),
        terms: trimmed.num_terms(),
        terms_per_degree: trimmed.terms.iter().map(Vec::len).collect(),
        all_favorable,
        favorability_budget_exhausted: exhausted,
        twists,
    };
    Ok(Resolution {
        complex: trimmed,
        source,
        in_map,
        plan: plans,
        metadata,
    })
}
