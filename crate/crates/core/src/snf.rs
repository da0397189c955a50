//! Smith normal form and homology of complexes over Z/p^m.
//!
//! Z/p^m is a chain ring: every element is a unit times a power of p, so the
//! entry of least valuation divides its whole block and elimination never
//! leaves the ring. Homology is presented as the kernel `⊕ Z/p^{v_i}` of
//! `d_out` modulo the image of `d_in` written in kernel coordinates.

use crate::error::{Error, Result};
use crate::zpm::{ModMatrix, Zpm};

/// `p · a · q = diag` for some invertible `p`. `valuations[i]` is the valuation
/// of the `i`-th diagonal entry, `m` past the rank.
#[derive(Debug, Clone)]
pub struct Smith {
    pub valuations: Vec<u32>,
    pub q: ModMatrix,
    pub q_inv: ModMatrix,
}

fn identity(n: usize) -> ModMatrix {
    let mut i = ModMatrix::zeros(n, n);
    for k in 0..n {
        i.set(k, k, 1);
    }
    i
}

fn swap_rows(a: &mut ModMatrix, x: usize, y: usize) {
    for j in 0..a.cols() {
        let (u, v) = (a.get(x, j), a.get(y, j));
        a.set(x, j, v);
        a.set(y, j, u);
    }
}

fn swap_cols(a: &mut ModMatrix, x: usize, y: usize) {
    for i in 0..a.rows() {
        let (u, v) = (a.get(i, x), a.get(i, y));
        a.set(i, x, v);
        a.set(i, y, u);
    }
}

/// Smith form over Z/p^m, tracking the column transform and its inverse.
pub fn smith(ring: &Zpm, a: &ModMatrix) -> Smith {
    let (rows, cols) = (a.rows(), a.cols());
    let mut a = a.clone();
    let mut q = identity(cols);
    let mut q_inv = identity(cols);
    let mut valuations = vec![ring.m(); cols];
    for t in 0..rows.min(cols) {
        let mut best: Option<(usize, usize, u32)> = None;
        'search: for i in t..rows {
            for j in t..cols {
                let v = ring.valuation(a.get(i, j));
                if v < ring.m() && best.is_none_or(|(_, _, bv)| v < bv) {
                    best = Some((i, j, v));
                    if v == 0 {
                        break 'search;
                    }
                }
            }
        }
        let Some((pi, pj, v)) = best else { break };
        swap_rows(&mut a, t, pi);
        swap_cols(&mut a, t, pj);
        swap_cols(&mut q, t, pj);
        swap_rows(&mut q_inv, t, pj);
        let scale = ring.p().pow(v);
        let unit_inv = ring
            .inverse(a.get(t, t) / scale)
            .expect("pivot cofactor is a unit");
        for i in t + 1..rows {
            let c = ring.mul(a.get(i, t) / scale, unit_inv);
            if c != 0 {
                for j in t..cols {
                    let x = ring.sub(a.get(i, j), ring.mul(c, a.get(t, j)));
                    a.set(i, j, x);
                }
            }
        }
        // column j -= c · column t; the inverse transform adds c · row j to row t
        for j in t + 1..cols {
            let c = ring.mul(a.get(t, j) / scale, unit_inv);
            if c == 0 {
                continue;
            }
            for i in 0..rows {
                let x = ring.sub(a.get(i, j), ring.mul(c, a.get(i, t)));
                a.set(i, j, x);
            }
            for i in 0..cols {
                let x = ring.sub(q.get(i, j), ring.mul(c, q.get(i, t)));
                q.set(i, j, x);
            }
            for k in 0..cols {
                let x = ring.add(q_inv.get(t, k), ring.mul(c, q_inv.get(j, k)));
                q_inv.set(t, k, x);
            }
        }
        valuations[t] = v;
    }
    Smith {
        valuations,
        q,
        q_inv,
    }
}

/// Exponents `e_1 <= e_2 <= ...` such that `ker d_out / im d_in ≅ ⊕ Z/p^{e_t}`.
///
/// `d_in` maps `(Z/p^m)^a -> (Z/p^m)^n` and `d_out` maps `(Z/p^m)^n -> (Z/p^m)^b`;
/// either may have zero rows/columns.
pub fn homology_over_zpm(ring: &Zpm, d_in: &ModMatrix, d_out: &ModMatrix) -> Result<Vec<u32>> {
    let n = d_out.cols();
    if d_in.rows() != n {
        return Err(Error::Composability(format!(
            "d_in has {} rows but d_out has {} columns",
            d_in.rows(),
            n
        )));
    }
    if !d_out.mul(ring, d_in)?.is_zero() {
        return Err(Error::Composability("d_out * d_in != 0".into()));
    }
    let m = ring.m();
    let s = smith(ring, d_out);
    // kernel coordinate i is p^{m - v_i} Z/p^m ≅ Z/p^{v_i}
    let live: Vec<usize> = (0..n).filter(|&i| s.valuations[i] > 0).collect();
    let y = s.q_inv.mul(ring, d_in)?;
    // presentation of the homology: rows are kernel coordinates, columns are
    // the relations p^{v_i} e_i followed by the image of d_in
    let mut rels: Vec<Vec<u64>> = live
        .iter()
        .enumerate()
        .map(|(r, _)| {
            live.iter()
                .enumerate()
                .map(|(c, &i)| {
                    if c == r {
                        ring.pow_p(s.valuations[i])
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..d_in.cols() {
        for (r, &i) in live.iter().enumerate() {
            let x = y.get(i, col);
            let shift = m - s.valuations[i];
            if ring.valuation(x) < shift {
                return Err(Error::Internal("image not contained in the kernel".into()));
            }
            rels[r].push(x / ring.p().pow(shift));
        }
    }
    let pres = ModMatrix::from_rows(&rels, live.len() + d_in.cols());
    let vals = pres.smith_valuations(ring);
    let free = live.len() - vals.len();
    let mut out: Vec<u32> = vals.into_iter().filter(|&v| v > 0).collect();
    out.extend(std::iter::repeat_n(m, free));
    out.sort_unstable();
    Ok(out)
}
