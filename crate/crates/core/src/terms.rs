//! Vanishing-order tuples and the terms `ω^{(k,w)}(-D)|_{Z_M}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weight_lattice::{
    default_budget, for_each_composition, star_condition, DeltaModel, IndexSet, Params, Weight,
};

/// Orders of vanishing along the partial Hasse divisors; every entry is a
/// multiple of `step`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VanishingTuple(pub Vec<u64>);

impl VanishingTuple {
    pub fn zero(g: usize) -> Self {
        Self(vec![0; g])
    }

    pub fn validate(&self, params: &Params) -> Result<()> {
        if self.0.len() != params.g {
            return Err(Error::LengthMismatch {
                expected: params.g,
                got: self.0.len(),
            });
        }
        let step = params.step();
        for (index, &value) in self.0.iter().enumerate() {
            if value % step != 0 {
                return Err(Error::Divisibility { index, value, step });
            }
        }
        Ok(())
    }

    /// `|M| = { i : M_i = 0 }`
    pub fn support(&self) -> IndexSet {
        support(&self.0)
    }

    pub fn dimension(&self) -> usize {
        self.0.iter().filter(|&&x| x == 0).count()
    }

    pub fn max(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

pub fn support(orders: &[u64]) -> IndexSet {
    (0..orders.len()).filter(|&i| orders[i] == 0).collect()
}

pub fn dimension(orders: &[u64]) -> usize {
    orders.iter().filter(|&&x| x == 0).count()
}

/// `ω^{(k,w)}(-D)` restricted to `Z_M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    pub weight: Weight,
    pub orders: VanishingTuple,
}

impl Term {
    pub fn new(params: &Params, weight: Weight, orders: Vec<u64>) -> Result<Self> {
        let t = Term {
            weight,
            orders: VanishingTuple(orders),
        };
        t.validate(params)?;
        Ok(t)
    }

    /// The unrestricted sheaf `ω^{(k,w)}(-D)`.
    pub fn full(params: &Params, weight: Weight) -> Result<Self> {
        Self::new(params, weight, vec![0; params.g])
    }

    pub fn validate(&self, params: &Params) -> Result<()> {
        if self.weight.k.len() != params.g {
            return Err(Error::LengthMismatch {
                expected: params.g,
                got: self.weight.k.len(),
            });
        }
        if !self.weight.is_paritious() {
            return Err(Error::NotParitious {
                k: self.weight.k.clone(),
                w: self.weight.w,
            });
        }
        self.orders.validate(params)
    }

    pub fn support(&self) -> IndexSet {
        self.orders.support()
    }

    pub fn dimension(&self) -> usize {
        self.orders.dimension()
    }
}

/// Outcome of a favorability check. `twist` is the q-twist witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FavorabilityCheck {
    pub favorable: bool,
    pub twist: Option<Vec<u64>>,
    pub budget_exhausted: bool,
}

/// Whether some q-twist `T` (zero on `|M|`, and zero or a multiple of `step`
/// exceeding `M_r + step` elsewhere) moves the weight into condition (∗) for
/// `M` and the index set `{ r : M_r > 0 }` that `M` lives on.
pub fn check_favorable(
    params: &Params,
    model: &dyn DeltaModel,
    t: &Term,
    budget: Option<u64>,
) -> FavorabilityCheck {
    let g = params.g;
    let step = params.step();
    let orders = &t.orders.0;
    let supp = t.support();
    let live: IndexSet = (0..g).filter(|i| !supp.contains(i)).collect();
    let budget =
        budget.unwrap_or_else(|| default_budget(params, orders, std::slice::from_ref(&t.weight)));
    let max_units = budget / step;

    let test = |twist: &[u64]| {
        let h = t.weight.shifted(&params.theta_shift_of(twist));
        star_condition(params, model, &h, orders, &live)
    };

    if live.is_empty() {
        let zero = vec![0; g];
        let ok = test(&zero);
        return FavorabilityCheck {
            favorable: ok,
            twist: ok.then_some(zero),
            budget_exhausted: false,
        };
    }

    let allowed = |i: usize, u: u64| {
        if supp.contains(&i) {
            u == 0
        } else {
            u == 0 || u * step > orders[i] + step
        }
    };
    let zeros = vec![0u64; g];
    for total in 0..=max_units {
        if model.is_upward_closed() {
            // every twist of this total is dominated by the one with `total` on each live index
            let top: Vec<u64> = (0..g)
                .map(|i| if live.contains(&i) { total * step } else { 0 })
                .collect();
            if !test(&top) {
                continue;
            }
        }
        let mut found = None;
        for_each_composition(&zeros, &allowed, total, &mut |units| {
            let twist: Vec<u64> = units.iter().map(|u| u * step).collect();
            if test(&twist) {
                found = Some(twist);
                true
            } else {
                false
            }
        });
        if let Some(twist) = found {
            return FavorabilityCheck {
                favorable: true,
                twist: Some(twist),
                budget_exhausted: false,
            };
        }
    }
    FavorabilityCheck {
        favorable: false,
        twist: None,
        budget_exhausted: true,
    }
}

pub fn is_favorable(params: &Params, model: &dyn DeltaModel, t: &Term) -> bool {
    check_favorable(params, model, t, None).favorable
}
