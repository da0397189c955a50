//! The weight lattice Z^g: Hasse and theta shift vectors, parity predicates,
//! the vanishing-cone model Δ_w and the exponent searches that push weights
//! into it.
//!
//! Indices are 0-based throughout; the cyclic predecessor of `0` is `g - 1`.

use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zpm::{is_prime, Zpm};

pub type IndexSet = BTreeSet<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub p: u64,
    pub g: usize,
    pub m: u32,
    pub delta_threshold: i64,
}

impl Params {
    pub fn new(p: u64, g: usize, m: u32, delta_threshold: i64) -> Result<Self> {
        let params = Self {
            p,
            g,
            m,
            delta_threshold,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::InvalidParams(format!("p = {} is not prime", self.p)));
        }
        if self.g == 0 {
            return Err(Error::InvalidParams("g must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        if self.delta_threshold < 2 {
            return Err(Error::InvalidParams(
                "delta_threshold must be at least 2".into(),
            ));
        }
        Zpm::new(self.p, self.m).map(|_| ())
    }

    /// `2 p^{m-1}`: every vanishing order and every shift exponent is a multiple of this.
    pub fn step(&self) -> u64 {
        2 * self.p.pow(self.m - 1)
    }

    pub fn ring(&self) -> Zpm {
        Zpm::new(self.p, self.m).expect("validated params")
    }

    /// The degenerate one-embedding case, where `i - 1 = i` cyclically.
    pub fn is_degenerate(&self) -> bool {
        self.g == 1
    }

    pub fn model(&self) -> ThresholdModel {
        ThresholdModel {
            threshold: self.delta_threshold,
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.g {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.g,
            });
        }
        Ok(())
    }

    fn prev(&self, i: usize) -> usize {
        (i + self.g - 1) % self.g
    }

    /// `p_i = p e_{i-1} - e_i`
    pub fn shift_p(&self, i: usize) -> Result<ShiftVector> {
        self.check_index(i)?;
        let mut v = vec![0i64; self.g];
        v[self.prev(i)] += self.p as i64;
        v[i] -= 1;
        Ok(ShiftVector(v))
    }

    /// `q_i = p e_{i-1} + e_i`
    pub fn shift_q(&self, i: usize) -> Result<ShiftVector> {
        self.check_index(i)?;
        let mut v = vec![0i64; self.g];
        v[self.prev(i)] += self.p as i64;
        v[i] += 1;
        Ok(ShiftVector(v))
    }

    /// `Σ M_i p_i`; component `j` is `p M_{j+1} - M_j`.
    pub fn weight_shift_of(&self, exps: &[u64]) -> Vec<i64> {
        let g = self.g;
        (0..g)
            .map(|j| self.p as i64 * exps[(j + 1) % g] as i64 - exps[j] as i64)
            .collect()
    }

    /// `Σ T_i q_i`; component `j` is `p T_{j+1} + T_j`.
    pub fn theta_shift_of(&self, exps: &[u64]) -> Vec<i64> {
        let g = self.g;
        (0..g)
            .map(|j| self.p as i64 * exps[(j + 1) % g] as i64 + exps[j] as i64)
            .collect()
    }

    /// Inverse of [`Params::weight_shift_of`]: the exponent tuple `R` with
    /// `R_p = delta`, if it is integral.
    pub fn exponents_for_shift(&self, delta: &[i64]) -> Option<Vec<i64>> {
        // delta_j = p R_{j+1} - R_j, so R_j = p R_{j+1} - delta_j. Going round the
        // cycle expresses R_0 in terms of itself: R_0 (p^g - 1) = Σ_j p^j delta_j.
        let g = self.g;
        let p = self.p as i128;
        let mut acc: i128 = 0;
        let mut pw: i128 = 1;
        for &d in delta.iter().take(g) {
            acc += pw * d as i128;
            pw *= p;
        }
        let den = pw - 1;
        if acc % den != 0 {
            return None;
        }
        let mut r = vec![0i128; g];
        r[0] = acc / den;
        // R_{j+1} = (R_j + delta_j) / p, walking forward
        for j in 0..g - 1 {
            let num = r[j] + delta[j] as i128;
            if num % p != 0 {
                return None;
            }
            r[j + 1] = num / p;
        }
        Some(r.into_iter().map(|x| x as i64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight {
    pub k: Vec<i64>,
    pub w: i64,
}

impl Weight {
    pub fn new(k: Vec<i64>, w: i64) -> Self {
        Self { k, w }
    }

    pub fn is_paritious(&self) -> bool {
        self.k.iter().all(|&ki| (ki - self.w).rem_euclid(2) == 0)
    }

    pub fn is_regular(&self) -> bool {
        self.k.iter().all(|&ki| ki > 1)
    }

    pub fn shifted(&self, delta: &[i64]) -> Weight {
        Weight {
            k: self.k.iter().zip(delta).map(|(a, b)| a + b).collect(),
            w: self.w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftVector(pub Vec<i64>);

/// A model of the set Δ_w of weights with vanishing higher cohomology.
pub trait DeltaModel: Sync {
    fn contains(&self, wt: &Weight) -> bool;

    /// Whether every paritious `k'` with `|k'_i - k_i| <= radius` lies in the model.
    ///
    /// The default enumerates the whole box.
    fn contains_ball(&self, wt: &Weight, radius: u64) -> bool {
        let r = radius as i64;
        let g = wt.k.len();
        let mut offs = vec![-r; g];
        loop {
            let cand = wt.shifted(&offs);
            if cand.is_paritious() && !self.contains(&cand) {
                return false;
            }
            let mut i = 0;
            loop {
                if i == g {
                    return true;
                }
                if offs[i] < r {
                    offs[i] += 1;
                    break;
                }
                offs[i] = -r;
                i += 1;
            }
        }
    }

    /// True if membership is preserved by increasing any coordinate by an even amount.
    fn is_upward_closed(&self) -> bool {
        false
    }
}

/// `{ paritious k : min_i k_i >= threshold }`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdModel {
    pub threshold: i64,
}

impl DeltaModel for ThresholdModel {
    fn contains(&self, wt: &Weight) -> bool {
        wt.is_paritious() && wt.k.iter().all(|&x| x >= self.threshold)
    }

    fn contains_ball(&self, wt: &Weight, radius: u64) -> bool {
        if !wt.is_paritious() {
            // the ball is then centred off-lattice; fall back to the definition
            return DeltaModel::contains_ball(&BruteForce(*self), wt, radius);
        }
        let r = radius as i64;
        // smallest paritious value within distance r below k_i
        wt.k.iter().all(|&x| {
            let lo = if r % 2 == 0 { x - r } else { x - r + 1 };
            lo >= self.threshold
        })
    }

    fn is_upward_closed(&self) -> bool {
        true
    }
}

struct BruteForce(ThresholdModel);

impl DeltaModel for BruteForce {
    fn contains(&self, wt: &Weight) -> bool {
        self.0.contains(wt)
    }
}

pub fn in_delta(model: &dyn DeltaModel, wt: &Weight) -> bool {
    model.contains(wt)
}

/// Condition (∗): `wt` is regular and every paritious weight within
/// `p · #J · max_i M_i` of it (in each coordinate) lies in Δ_w.
pub fn star_condition(
    params: &Params,
    model: &dyn DeltaModel,
    wt: &Weight,
    orders: &[u64],
    j: &IndexSet,
) -> bool {
    let max_m = orders.iter().copied().max().unwrap_or(0);
    let radius = params.p * j.len() as u64 * max_m;
    wt.is_regular() && model.contains_ball(wt, radius)
}

/// Membership in the truncated paritious cylinder around the diagonal:
/// positive entries, `(a, w)` paritious, `dist(a, ℓ)^2 < C^2` and `||E(a)||^2 > D^2`.
/// The bounds are given squared, as exact rationals.
pub fn cylinder_membership(a: &[i64], c_sq: Ratio<i64>, d_sq: Ratio<i64>, w: i64) -> bool {
    if a.iter().any(|&x| x <= 0) {
        return false;
    }
    if !Weight::new(a.to_vec(), w).is_paritious() {
        return false;
    }
    let g = a.len() as i64;
    let sum: i64 = a.iter().sum();
    let norm_sq: i64 = a.iter().map(|x| x * x).sum();
    let proj_sq = Ratio::new(sum * sum, g);
    let dist_sq = Ratio::from_integer(norm_sq) - proj_sq;
    dist_sq < c_sq && proj_sq > d_sq
}

/// Default search budget on `Σ N_j`.
pub fn default_budget(params: &Params, orders: &[u64], weights: &[Weight]) -> u64 {
    let max_m = orders.iter().copied().max().unwrap_or(0) as i64;
    let max_k = weights
        .iter()
        .flat_map(|w| w.k.iter().map(|x| x.abs()))
        .max()
        .unwrap_or(0);
    let span = (params.delta_threshold + max_m + max_k).max(1) as u64;
    64 * params.step() * params.g as u64 * span
}

/// Exponents produced by [`make_favorable_exponents`]: Hasse exponents on the
/// support `J` and theta exponents on its complement, both as full `g`-tuples
/// (zero off their index set).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FavorableExponents {
    pub hasse: Vec<u64>,
    pub theta: Vec<u64>,
}

impl FavorableExponents {
    pub fn total(&self) -> u64 {
        self.hasse.iter().chain(&self.theta).sum()
    }
}

/// Calls `visit` on every tuple with the given per-coordinate minima (in
/// units) and coordinate sum `total`, in lexicographic order, stopping at the
/// first `true`.
pub(crate) fn for_each_composition(
    mins: &[u64],
    allowed: &dyn Fn(usize, u64) -> bool,
    total: u64,
    visit: &mut dyn FnMut(&[u64]) -> bool,
) -> bool {
    fn rec(
        i: usize,
        rem: u64,
        mins: &[u64],
        tail_min: &[u64],
        allowed: &dyn Fn(usize, u64) -> bool,
        cur: &mut Vec<u64>,
        visit: &mut dyn FnMut(&[u64]) -> bool,
    ) -> bool {
        let n = mins.len();
        if i + 1 == n {
            if rem >= mins[i] && allowed(i, rem) {
                cur[i] = rem;
                return visit(cur);
            }
            return false;
        }
        let max_here = rem.saturating_sub(tail_min[i + 1]);
        let mut x = mins[i];
        while x <= max_here {
            if allowed(i, x) {
                cur[i] = x;
                if rec(i + 1, rem - x, mins, tail_min, allowed, cur, visit) {
                    return true;
                }
            }
            x += 1;
        }
        false
    }
    if mins.is_empty() {
        return total == 0 && visit(&[]);
    }
    let mut tail_min = vec![0u64; mins.len() + 1];
    for i in (0..mins.len()).rev() {
        tail_min[i] = tail_min[i + 1] + mins[i];
    }
    if total < tail_min[0] {
        return false;
    }
    let mut cur = vec![0u64; mins.len()];
    rec(0, total, mins, &tail_min, allowed, &mut cur, visit)
}

/// Exponents `N_J` (Hasse, on the support `J` of `orders`) and `N_{J^c}`
/// (theta, on the complement, each exceeding `M_j + step`) such that every
/// `k + Σ_J N_j p_j + Σ_{J^c} N_j q_j` is regular and satisfies condition (∗)
/// for the nonzero indices of `orders`.
///
/// Search order: smallest `Σ N_j` first, then lexicographic.
pub fn make_favorable_exponents(
    params: &Params,
    model: &dyn DeltaModel,
    support: &IndexSet,
    orders: &[u64],
    weights: &[Weight],
    budget: Option<u64>,
) -> Result<FavorableExponents> {
    let g = params.g;
    let step = params.step();
    if orders.len() != g {
        return Err(Error::LengthMismatch {
            expected: g,
            got: orders.len(),
        });
    }
    let actual: IndexSet = (0..g).filter(|&i| orders[i] == 0).collect();
    if &actual != support {
        return Err(Error::SupportMismatch(format!(
            "orders {orders:?} have support {actual:?}, expected {support:?}"
        )));
    }
    if let Some(w0) = weights.first() {
        for wt in weights {
            if wt.w != w0.w {
                return Err(Error::NormalizationMismatch(w0.w, wt.w));
            }
            if !wt.is_paritious() {
                return Err(Error::NotParitious {
                    k: wt.k.clone(),
                    w: wt.w,
                });
            }
        }
    }
    let budget = budget.unwrap_or_else(|| default_budget(params, orders, weights));
    let star_set: IndexSet = (0..g).filter(|i| !support.contains(i)).collect();

    // minima in units of step: 1 on J, M_j/step + 2 on J^c (N_j > M_j + step)
    let mins: Vec<u64> = (0..g)
        .map(|i| {
            if support.contains(&i) {
                1
            } else {
                orders[i] / step + 2
            }
        })
        .collect();
    let min_total: u64 = mins.iter().sum();
    let max_total = budget / step;

    let mut found = None;
    for total in min_total..=max_total {
        let hit = for_each_composition(&mins, &|_, _| true, total, &mut |units| {
            let n: Vec<u64> = units.iter().map(|u| u * step).collect();
            let ok = weights.iter().all(|wt| {
                let hasse: Vec<u64> = (0..g)
                    .map(|i| if support.contains(&i) { n[i] } else { 0 })
                    .collect();
                let theta: Vec<u64> = (0..g)
                    .map(|i| if support.contains(&i) { 0 } else { n[i] })
                    .collect();
                let h = wt
                    .shifted(&params.weight_shift_of(&hasse))
                    .shifted(&params.theta_shift_of(&theta));
                star_condition(params, model, &h, orders, &star_set)
            });
            if ok {
                found = Some(n);
            }
            ok
        });
        if hit {
            break;
        }
    }
    let n = found.ok_or(Error::BudgetExhausted { budget })?;
    Ok(FavorableExponents {
        hasse: (0..g)
            .map(|i| if support.contains(&i) { n[i] } else { 0 })
            .collect(),
        theta: (0..g)
            .map(|i| if support.contains(&i) { 0 } else { n[i] })
            .collect(),
    })
}
