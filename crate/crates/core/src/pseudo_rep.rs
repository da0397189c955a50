//! Pseudo-representations of finite groups with values in Z/p^m, the
//! generators of the universal two-dimensional pseudo-representation ring,
//! and traces of explicit matrix representations.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zpm::Zpm;

/// A finite group given by its multiplication table: `table[a][b] = a·b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    pub elements: Vec<String>,
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
}

impl FiniteGroup {
    /// Validates closure, the identity, inverses and associativity.
    pub fn new(elements: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::InvalidGroup("no elements".into()));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGroup(format!("table is not {n}x{n}")));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(Error::InvalidGroup("table entry out of range".into()));
        }
        let names: BTreeSet<&String> = elements.iter().collect();
        if names.len() != n {
            return Err(Error::InvalidGroup("duplicate element names".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        for a in 0..n {
            if !(0..n).any(|b| table[a][b] == identity && table[b][a] == identity) {
                return Err(Error::InvalidGroup(format!(
                    "{} has no inverse",
                    elements[a]
                )));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({}, {}, {})",
                            elements[a], elements[b], elements[c]
                        )));
                    }
                }
            }
        }
        Ok(Self {
            elements,
            table,
            identity,
        })
    }

    /// The permutation group generated by `gens` (one-line notation on `0..degree`).
    /// Elements are named by their one-line notation; `(a·b)(i) = a(b(i))`.
    pub fn from_permutations(gens: &[Vec<usize>]) -> Result<Self> {
        let degree = gens.first().map_or(0, Vec::len);
        for g in gens {
            let set: BTreeSet<usize> = g.iter().copied().collect();
            if g.len() != degree || set.len() != degree || set.iter().any(|&x| x >= degree) {
                return Err(Error::InvalidGroup(format!(
                    "{g:?} is not a permutation of 0..{degree}"
                )));
            }
        }
        let id: Vec<usize> = (0..degree).collect();
        let compose =
            |a: &[usize], b: &[usize]| -> Vec<usize> { b.iter().map(|&i| a[i]).collect() };
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::from([id.clone()]);
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = compose(g, &x);
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        let perms: Vec<Vec<usize>> = seen.into_iter().collect();
        let index: BTreeMap<&Vec<usize>, usize> =
            perms.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| index[&compose(a, b)]).collect())
            .collect();
        let names = perms
            .iter()
            .map(|p| {
                format!(
                    "[{}]",
                    p.iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
            .collect();
        Self::new(names, table)
    }

    /// `Z/n` with elements `e, g, g2, ...`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::words(n, false)
    }

    /// `S_3` as the symmetries of a triangle.
    pub fn symmetric3() -> Result<Self> {
        Self::dihedral(3)
    }

    /// Symmetries of a regular `n`-gon, of order `2n`, with elements `r^i s^j`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGroup(format!("dihedral group of a {n}-gon")));
        }
        Self::words(n, true)
    }

    /// The group generated by an `n`-cycle `r` (and a reflection `s`), listed
    /// as `r^i s^j` and named by those words.
    fn words(n: usize, reflection: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        let rot: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let refl: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
        let gens = if reflection {
            vec![rot, refl]
        } else {
            vec![rot]
        };
        let perms = Self::from_permutations(&gens)?;
        let find = |p: &Vec<usize>| {
            perms
                .index_of(&perm_name(p))
                .expect("generator is an element")
        };
        let r = find(&gens[0]);
        let letter = if reflection { "r" } else { "g" };
        let mut order = Vec::new();
        for j in 0..if reflection { 2 } else { 1 } {
            for i in 0..n {
                let mut x = perms.product(std::iter::repeat_n(r, i));
                let mut name = match i {
                    0 => String::new(),
                    1 => letter.to_string(),
                    _ => format!("{letter}{i}"),
                };
                if j == 1 {
                    x = perms.mul(x, find(&gens[1]));
                    name.push('s');
                }
                if name.is_empty() {
                    name.push('e');
                }
                order.push((x, name));
            }
        }
        perms.relabel(&order)
    }

    /// The same group with elements listed as `order` gives them: `(old index, new name)`.
    pub fn relabel(&self, order: &[(usize, String)]) -> Result<Self> {
        let n = self.order();
        let mut pos = vec![usize::MAX; n];
        for (new, &(old, _)) in order.iter().enumerate() {
            if old >= n || pos[old] != usize::MAX {
                return Err(Error::InvalidGroup("relabeling is not a bijection".into()));
            }
            pos[old] = new;
        }
        if order.len() != n {
            return Err(Error::InvalidGroup("relabeling is not a bijection".into()));
        }
        let table = order
            .iter()
            .map(|&(a, _)| order.iter().map(|&(b, _)| pos[self.mul(a, b)]).collect())
            .collect();
        Self::new(order.iter().map(|(_, name)| name.clone()).collect(), table)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn product(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter()
            .fold(self.identity, |acc, x| self.table[acc][x])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }
}

fn perm_name(p: &[usize]) -> String {
    format!(
        "[{}]",
        p.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    )
}

/// A candidate `τ : G -> Z/p^m` with claimed dimension `d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoRep {
    pub group: FiniteGroup,
    pub ring: Zpm,
    pub values: Vec<u64>,
    pub d: usize,
}

/// All permutations of `0..n` with their signs, in lexicographic order.
fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| cur[i] > cur[j])
            .count();
        out.push((cur.clone(), inversions % 2 == 0));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Cycles of `sigma` (one-line, `i ↦ sigma[i]`), each starting at its smallest letter.
fn cycles(sigma: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; sigma.len()];
    let mut out = Vec::new();
    for start in 0..sigma.len() {
        if seen[start] {
            continue;
        }
        let mut c = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            c.push(i);
            i = sigma[i];
        }
        out.push(c);
    }
    out
}

/// `τ_σ(g_1, ..., g_{d+1})`: the product over the cycles `(i_1 ... i_r)` of
/// `τ(g_{i_1} ... g_{i_r})`.
pub fn tau_sigma(tau: &PseudoRep, sigma: &[usize], gs: &[usize]) -> u64 {
    let ring = &tau.ring;
    cycles(sigma).iter().fold(1, |acc, c| {
        let prod = tau.group.product(c.iter().map(|&i| gs[i]));
        ring.mul(acc, tau.values[prod])
    })
}

struct Identity {
    terms: Vec<(Vec<Vec<usize>>, bool)>,
}

impl Identity {
    fn new(letters: usize) -> Self {
        Self {
            terms: permutations(letters)
                .into_iter()
                .map(|(s, sign)| (cycles(&s), sign))
                .collect(),
        }
    }

    fn eval(&self, tau: &PseudoRep, gs: &[usize]) -> u64 {
        let ring = &tau.ring;
        self.terms.iter().fold(0, |acc, (cs, positive)| {
            let v = cs.iter().fold(1, |a, c| {
                let prod = tau.group.product(c.iter().map(|&i| gs[i]));
                ring.mul(a, tau.values[prod])
            });
            if *positive {
                ring.add(acc, v)
            } else {
                ring.sub(acc, v)
            }
        })
    }
}

/// The signed sum `Σ_{σ ∈ S_{d+1}} sign(σ) τ_σ(g_1, ..., g_{d+1})`.
pub fn signed_sum(tau: &PseudoRep, gs: &[usize]) -> u64 {
    Identity::new(gs.len()).eval(tau, gs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    /// `sampled` is set when a tuple space exceeded the cap and was sampled.
    /// `minimality_witness` is a `d`-tuple on which the `d`-letter identity fails.
    Valid {
        sampled: bool,
        minimality_witness: Option<Vec<usize>>,
    },
    FailsCondition {
        condition: u8,
        witness: Vec<usize>,
    },
    NotMinimal {
        sampled: bool,
    },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Largest tuple space swept exhaustively.
    pub cap: u64,
    /// Number of sampled tuples beyond the cap.
    pub samples: u64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            cap: 10_000_000,
            samples: 1_000_000,
            seed: 0,
        }
    }
}

/// Searches `G^len` for a tuple where `bad` holds; returns it and whether sampling was used.
fn find_tuple(
    n: usize,
    len: usize,
    opts: &CheckOptions,
    mut bad: impl FnMut(&[usize]) -> bool,
) -> (Option<Vec<usize>>, bool) {
    let space = (n as u64).checked_pow(len as u32);
    match space {
        Some(sz) if sz <= opts.cap => {
            let mut t = vec![0usize; len];
            for _ in 0..sz {
                if bad(&t) {
                    return (Some(t), false);
                }
                for x in t.iter_mut().rev() {
                    *x += 1;
                    if *x < n {
                        break;
                    }
                    *x = 0;
                }
            }
            (None, false)
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut t = vec![0usize; len];
            for _ in 0..opts.samples {
                for x in t.iter_mut() {
                    *x = rng.gen_range(0..n);
                }
                if bad(&t) {
                    return (Some(t), true);
                }
            }
            (None, true)
        }
    }
}

pub fn check_pseudo_rep(tau: &PseudoRep, opts: &CheckOptions) -> Verdict {
    let g = &tau.group;
    let ring = &tau.ring;
    let n = g.order();
    if tau.d == 0 {
        return Verdict::FailsCondition {
            condition: 1,
            witness: vec![g.identity],
        };
    }
    if tau.values[g.identity] != ring.reduce(tau.d as i64) {
        return Verdict::FailsCondition {
            condition: 1,
            witness: vec![g.identity],
        };
    }
    for a in 0..n {
        for b in 0..n {
            if tau.values[g.mul(a, b)] != tau.values[g.mul(b, a)] {
                return Verdict::FailsCondition {
                    condition: 2,
                    witness: vec![a, b],
                };
            }
        }
    }
    let top = Identity::new(tau.d + 1);
    let (bad, sampled_top) = find_tuple(n, tau.d + 1, opts, |t| top.eval(tau, t) != 0);
    if let Some(witness) = bad {
        return Verdict::FailsCondition {
            condition: 3,
            witness,
        };
    }
    if tau.d == 1 {
        return Verdict::Valid {
            sampled: sampled_top,
            minimality_witness: None,
        };
    }
    let below = Identity::new(tau.d);
    let (found, sampled_below) = find_tuple(n, tau.d, opts, |t| below.eval(tau, t) != 0);
    match found {
        Some(w) => Verdict::Valid {
            sampled: sampled_top || sampled_below,
            minimality_witness: Some(w),
        },
        None => Verdict::NotMinimal {
            sampled: sampled_below,
        },
    }
}

pub type Matrix = Vec<Vec<u64>>;

fn mat_mul(ring: &Zpm, a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(0, |acc, k| ring.add(acc, ring.mul(a[i][k], b[k][j]))))
                .collect()
        })
        .collect()
}

/// `τ(g) = tr ρ(g)` for a matrix representation given on every element.
pub fn trace_of_rep(group: &FiniteGroup, ring: Zpm, rho: &[Matrix]) -> Result<PseudoRep> {
    let n = group.order();
    if rho.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: rho.len(),
        });
    }
    let dim = rho[0].len();
    if dim == 0 {
        return Err(Error::NotHomomorphism("zero-dimensional matrices".into()));
    }
    let rho: Vec<Matrix> = rho
        .iter()
        .map(|m| {
            m.iter()
                .map(|r| r.iter().map(|&x| x % ring.modulus()).collect())
                .collect()
        })
        .collect();
    for m in &rho {
        if m.len() != dim || m.iter().any(|r| r.len() != dim) {
            return Err(Error::NotHomomorphism(
                "matrices are not all square of one size".into(),
            ));
        }
    }
    for a in 0..n {
        for b in 0..n {
            if mat_mul(&ring, &rho[a], &rho[b]) != rho[group.mul(a, b)] {
                return Err(Error::NotHomomorphism(format!(
                    "ρ({})ρ({}) ≠ ρ({})",
                    group.elements[a],
                    group.elements[b],
                    group.elements[group.mul(a, b)]
                )));
            }
        }
    }
    let values = rho
        .iter()
        .map(|m| (0..dim).fold(0, |acc, i| ring.add(acc, m[i][i])))
        .collect();
    Ok(PseudoRep {
        group: group.clone(),
        ring,
        values,
        d: dim,
    })
}

/// An integer polynomial: sorted variable multiset ↦ coefficient.
pub type Polynomial = BTreeMap<Vec<usize>, i64>;

fn add_term(p: &mut Polynomial, mono: Vec<usize>, c: i64) {
    let mut mono = mono;
    mono.sort_unstable();
    let e = p.entry(mono.clone()).or_insert(0);
    *e += c;
    if *e == 0 {
        p.remove(&mono);
    }
}

fn leading(p: &Polynomial) -> Option<(&Vec<usize>, &i64)> {
    p.iter()
        .max_by(|a, b| (a.0.len(), a.0).cmp(&(b.0.len(), b.0)))
}

fn normalized(p: Polynomial) -> Polynomial {
    match leading(&p) {
        Some((_, &c)) if c < 0 => p.into_iter().map(|(m, c)| (m, -c)).collect(),
        _ => p,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    /// `unit`, `commutator` or `cubic`.
    pub kind: String,
    /// The group elements the relation is instantiated at.
    pub args: Vec<usize>,
    pub poly: Polynomial,
}

/// Generators of the ideal defining the universal ring of two-dimensional
/// pseudo-representations: `t_1 - 2`, `t_{ab} - t_{ba}` and the cubic trace
/// relation, instantiated at every tuple. Syntactic zeros and duplicates
/// (up to sign) are dropped, keeping the first occurrence.
pub fn universal_ring_relations(group: &FiniteGroup) -> Vec<Relation> {
    let n = group.order();
    let e = group.identity;
    let mut out = Vec::new();
    let mut seen: BTreeSet<Vec<(Vec<usize>, i64)>> = BTreeSet::new();
    let mut push = |kind: &str, args: Vec<usize>, poly: Polynomial, out: &mut Vec<Relation>| {
        if poly.is_empty() {
            return;
        }
        let poly = normalized(poly);
        if seen.insert(poly.clone().into_iter().collect()) {
            out.push(Relation {
                kind: kind.into(),
                args,
                poly,
            });
        }
    };
    let mut unit = Polynomial::new();
    add_term(&mut unit, vec![e], 1);
    add_term(&mut unit, vec![], -2);
    push("unit", vec![e], unit, &mut out);
    for a in 0..n {
        for b in 0..n {
            let mut p = Polynomial::new();
            add_term(&mut p, vec![group.mul(a, b)], 1);
            add_term(&mut p, vec![group.mul(b, a)], -1);
            push("commutator", vec![a, b], p, &mut out);
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut p = Polynomial::new();
                add_term(&mut p, vec![a, b, c], 1);
                add_term(&mut p, vec![group.product([a, b, c])], 1);
                add_term(&mut p, vec![group.product([a, c, b])], 1);
                add_term(&mut p, vec![a, group.mul(b, c)], -1);
                add_term(&mut p, vec![b, group.mul(a, c)], -1);
                add_term(&mut p, vec![c, group.mul(a, b)], -1);
                push("cubic", vec![a, b, c], p, &mut out);
            }
        }
    }
    out
}

/// Substitute integer values for some variables.
pub fn substitute(p: &Polynomial, values: &BTreeMap<usize, i64>) -> Polynomial {
    let mut out = Polynomial::new();
    for (mono, &c) in p {
        let mut coeff = c;
        let mut rest = Vec::new();
        for &v in mono {
            match values.get(&v) {
                Some(&x) => coeff *= x,
                None => rest.push(v),
            }
        }
        add_term(&mut out, rest, coeff);
    }
    out
}

pub fn evaluate(p: &Polynomial, ring: &Zpm, values: &[u64]) -> u64 {
    p.iter().fold(0, |acc, (mono, &c)| {
        let m = mono
            .iter()
            .fold(ring.reduce(c), |a, &v| ring.mul(a, values[v]));
        ring.add(acc, m)
    })
}

/// Residual of every relation at `t_g = values[g]`.
pub fn evaluate_relations(rels: &[Relation], ring: &Zpm, values: &[u64]) -> Vec<u64> {
    rels.iter()
        .map(|r| evaluate(&r.poly, ring, values))
        .collect()
}

/// Pull a table of Hecke eigenvalues back to a candidate two-dimensional
/// `τ` through a labeling of group elements by primes, and check it.
pub fn hecke_assignment(
    group: &FiniteGroup,
    ring: Zpm,
    labels: &BTreeMap<String, usize>,
    eigenvalues: &BTreeMap<String, u64>,
    opts: &CheckOptions,
) -> Result<(PseudoRep, Verdict)> {
    let n = group.order();
    let mut values: Vec<Option<u64>> = vec![None; n];
    for (q, &a) in eigenvalues {
        let &g = labels
            .get(q)
            .ok_or_else(|| Error::Unlabeled(format!("prime {q} has no Frobenius label")))?;
        if g >= n {
            return Err(Error::IndexOutOfRange { index: g, len: n });
        }
        let a = a % ring.modulus();
        match values[g] {
            Some(prev) if prev != a => {
                return Err(Error::InvalidGroup(format!(
                    "element {} receives eigenvalues {prev} and {a}",
                    group.elements[g]
                )))
            }
            _ => values[g] = Some(a),
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(g, v)| {
            v.ok_or_else(|| {
                Error::Unlabeled(format!("element {} has no eigenvalue", group.elements[g]))
            })
        })
        .collect::<Result<Vec<u64>>>()?;
    let tau = PseudoRep {
        group: group.clone(),
        ring,
        values,
        d: 2,
    };
    let verdict = check_pseudo_rep(&tau, opts);
    Ok((tau, verdict))
}
