//! Arithmetic in Z/p^m and dense matrices over it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The coefficient ring Z/p^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Zpm {
    p: u64,
    m: u32,
    modulus: u64,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Zpm {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not prime")));
        }
        if m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        let modulus = p
            .checked_pow(m)
            .filter(|&q| q < (1 << 31))
            .ok_or_else(|| Error::InvalidParams(format!("{p}^{m} is too large")))?;
        Ok(Self { p, m, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.modulus as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.modulus
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.modulus - b % self.modulus) % self.modulus
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.modulus - a % self.modulus) % self.modulus
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a % self.modulus) * (b % self.modulus) % self.modulus
    }

    /// p-adic valuation of a residue; `m` for zero.
    pub fn valuation(&self, a: u64) -> u32 {
        let mut a = a % self.modulus;
        if a == 0 {
            return self.m;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    pub fn inverse(&self, a: u64) -> Option<u64> {
        let (g, x, _) = ext_gcd(a as i64 % self.modulus as i64, self.modulus as i64);
        (g == 1).then(|| self.reduce(x))
    }

    pub fn pow_p(&self, e: u32) -> u64 {
        if e >= self.m {
            0
        } else {
            self.p.pow(e)
        }
    }
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Dense row-major matrix with entries in Z/p^m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols);
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_to(&mut self, ring: &Zpm, i: usize, j: usize, v: u64) {
        let k = i * self.cols + j;
        self.data[k] = ring.add(self.data[k], v);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, ring: &Zpm, other: &ModMatrix) -> Result<ModMatrix> {
        if self.cols != other.rows {
            return Err(Error::Composability(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ModMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b != 0 {
                        out.add_to(ring, i, j, ring.mul(a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, ring: &Zpm, v: &[u64]) -> Vec<u64> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(0, |acc, j| ring.add(acc, ring.mul(self.get(i, j), v[j]))))
            .collect()
    }

    /// Valuations `v_1 <= v_2 <= ...` of the nonzero diagonal entries of the
    /// Smith form over Z/p^m (so the image is `⊕ p^{v_i} Z/p^m`).
    pub fn smith_valuations(&self, ring: &Zpm) -> Vec<u32> {
        let mut a = self.clone();
        let mut out = Vec::new();
        let mut top = 0;
        while top < a.rows.min(a.cols) {
            // pivot of minimal valuation in the remaining block
            let mut best: Option<(usize, usize, u32)> = None;
            for i in top..a.rows {
                for j in top..a.cols {
                    let v = ring.valuation(a.get(i, j));
                    if v < ring.m() && best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                        if v == 0 {
                            break;
                        }
                    }
                }
                if matches!(best, Some((_, _, 0))) {
                    break;
                }
            }
            let Some((pi, pj, v)) = best else { break };
            a.swap_rows(top, pi);
            a.swap_cols(top, pj);
            let pivot = a.get(top, top);
            let unit = pivot / ring.p().pow(v);
            let unit_inv = ring.inverse(unit).expect("pivot cofactor is a unit");
            let scale = ring.p().pow(v);
            for i in top + 1..a.rows {
                let x = a.get(i, top);
                if x == 0 {
                    continue;
                }
                let c = ring.mul(x / scale, unit_inv);
                for j in top..a.cols {
                    let nv = ring.sub(a.get(i, j), ring.mul(c, a.get(top, j)));
                    a.set(i, j, nv);
                }
            }
            // column elimination only touches the pivot row once the column is clear
            for j in top + 1..a.cols {
                a.set(top, j, 0);
            }
            out.push(v);
            top += 1;
        }
        out.sort_unstable();
        out
    }

    /// Composition length of the image submodule.
    pub fn image_length(&self, ring: &Zpm) -> u32 {
        self.smith_valuations(ring)
            .iter()
            .map(|v| ring.m() - v)
            .sum()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}
