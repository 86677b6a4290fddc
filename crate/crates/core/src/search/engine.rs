//! Bitset kernel for exhaustive emptiness scans at a fixed prime.
//!
//! With a primitive root g write x = g^a and A = g^b, so f(x) = g^{b + k a}.
//! Substituting e = k a, the pairs (x, f(x)) are (g^{k' e}, g^{b + e}) with
//! k k' ≡ 1 mod (p−1). Cell (i, j) is nonempty exactly when the bitset
//! `U_i = {e : class(g^{k' e}) = i}` meets the shift by b of
//! `V_j = {e : class(g^e) = j}`. `V_j` depends only on p and n, `U_i` only on
//! k, and each (A, k) test is a handful of word ANDs.

use crate::modnum::{gcd, Modulus};

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// The 64 bits of `bits` starting at bit `off`.
#[inline(always)]
fn window(bits: &[u64], off: usize) -> u64 {
    let q = off >> 6;
    let r = off & 63;
    if r == 0 {
        bits[q]
    } else {
        (bits[q] >> r) | (bits[q + 1] << (64 - r))
    }
}

/// Per-(p, n) tables shared by every exponent.
pub(crate) struct PrimeTables {
    pub n: usize,
    /// Group order p − 1.
    pub order: usize,
    /// `g^a mod p` for `a ∈ [0, p−1)`.
    pub gpow: Vec<u32>,
    /// `g^a mod p mod n`.
    cls: Vec<u8>,
    live: Vec<usize>,
    /// Words per `U_i`.
    nw: usize,
    /// `V_j` over `[0, 2(p−1))`, padded, one vector per class.
    v: Vec<Vec<u64>>,
    /// Exponents b with `g^b ≤ (p−1)/2`.
    pub half: Vec<u32>,
    /// Words sampled by the fast path.
    fast_words: usize,
    /// `window(V_j, b + 64 w)` at `[(w n + j) · |half| + idx]`.
    fast: Vec<u64>,
}

/// Enough sample words that a typical spec sees every cell in the fast path.
fn fast_word_count(n: usize, nw: usize) -> usize {
    let cells = (n * n) as f64;
    let want = (cells * (50.0 * cells).ln() / 64.0).ceil() as usize;
    want.clamp(1, nw)
}

impl PrimeTables {
    pub fn new(p: u64, n: usize, g: u64) -> Self {
        assert!(p < u32::MAX as u64 && n >= 2 && n <= 255);
        let order = (p - 1) as usize;
        let m = Modulus::new(p).expect("prime modulus");
        let mut gpow = Vec::with_capacity(order);
        let mut x = 1u64;
        for _ in 0..order {
            gpow.push(x as u32);
            x = m.mul(x, g);
        }
        let cls: Vec<u8> = gpow.iter().map(|&x| (x as usize % n) as u8).collect();
        let mut present = vec![false; n];
        for &c in &cls {
            present[c as usize] = true;
        }
        let live: Vec<usize> = (0..n).filter(|&j| present[j]).collect();
        let nw = words_for(order);
        let vw = words_for(2 * order) + 2;
        let mut v = vec![vec![0u64; vw]; n];
        for e in 0..2 * order {
            let c = cls[e % order] as usize;
            v[c][e >> 6] |= 1 << (e & 63);
        }
        let half_bound = (p - 1) / 2;
        let half: Vec<u32> = (0..order as u32)
            .filter(|&b| gpow[b as usize] as u64 <= half_bound)
            .collect();
        let fast_words = fast_word_count(n, nw);
        let hm = half.len();
        let mut fast = vec![0u64; fast_words * n * hm];
        for w in 0..fast_words {
            for j in 0..n {
                let row = &mut fast[(w * n + j) * hm..(w * n + j + 1) * hm];
                for (slot, &b) in row.iter_mut().zip(&half) {
                    *slot = window(&v[j], b as usize + 64 * w);
                }
            }
        }
        PrimeTables {
            n,
            order,
            gpow,
            cls,
            live,
            nw,
            v,
            half,
            fast_words,
            fast,
        }
    }

    /// The first `words` words of each `U_i`, laid out `[i · words + w]`.
    fn u_bits(&self, k_inv: usize, words: usize) -> Vec<u64> {
        let mut u = vec![0u64; self.n * words];
        let mut a = 0usize;
        for e in 0..self.order.min(64 * words) {
            let c = self.cls[a] as usize;
            u[c * words + (e >> 6)] |= 1 << (e & 63);
            a += k_inv;
            if a >= self.order {
                a -= self.order;
            }
        }
        u
    }

    fn cell_empty(&self, u: &mut LazyU, b: usize, i: usize, j: usize) -> bool {
        let vj = &self.v[j];
        !(0..self.nw).any(|w| u.word(self, i, w) & window(vj, b + 64 * w) != 0)
    }

    /// Every empty live cell for shift `b`, in lexicographic order.
    fn empty_cells(&self, u: &mut LazyU, b: usize) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        for &i in &self.live {
            for &j in &self.live {
                if self.cell_empty(u, b, i, j) {
                    out.push((i as u64, j as u64));
                }
            }
        }
        out
    }

    /// Clears `ok[idx]` when some cell misses every sampled word for `half[idx]`.
    #[inline(always)]
    fn fast_pass(&self, u: &[u64], ok: &mut [u64], acc: &mut [u64]) {
        let hm = self.half.len();
        let nonzero = |t: u64| (t | t.wrapping_neg()) >> 63;
        for &i in &self.live {
            for &j in &self.live {
                if self.fast_words == 1 {
                    let ui = u[i];
                    let col = &self.fast[j * hm..(j + 1) * hm];
                    for (o, &wj) in ok.iter_mut().zip(col) {
                        *o &= nonzero(ui & wj);
                    }
                } else {
                    acc.fill(0);
                    for w in 0..self.fast_words {
                        let ui = u[i * self.fast_words + w];
                        let col = &self.fast[(w * self.n + j) * hm..(w * self.n + j + 1) * hm];
                        for (a, &wj) in acc.iter_mut().zip(col) {
                            *a |= ui & wj;
                        }
                    }
                    for (o, &a) in ok.iter_mut().zip(acc.iter()) {
                        *o &= nonzero(a);
                    }
                }
            }
        }
    }

    /// `fast_pass` with the class count and sample width fixed at compile
    /// time, so the cell loop unrolls and the index loop vectorizes.
    #[inline(always)]
    fn fast_pass_fixed<const N: usize, const W: usize>(&self, u: &[u64], ok: &mut [u64]) {
        let hm = self.half.len();
        let mut ui = [[0u64; W]; N];
        for (i, row) in ui.iter_mut().enumerate() {
            row.copy_from_slice(&u[i * W..(i + 1) * W]);
        }
        let cols: [[&[u64]; W]; N] = std::array::from_fn(|j| {
            std::array::from_fn(|w| &self.fast[(w * N + j) * hm..(w * N + j + 1) * hm])
        });
        for (idx, o) in ok.iter_mut().enumerate() {
            let mut all = 1u64;
            for col in &cols {
                let wj: [u64; W] = std::array::from_fn(|w| col[w][idx]);
                for row in &ui {
                    let mut t = 0u64;
                    for w in 0..W {
                        t |= row[w] & wj[w];
                    }
                    all &= (t | t.wrapping_neg()) >> 63;
                }
            }
            *o = all;
        }
    }

    #[inline(always)]
    fn fast_pass_any(&self, u: &[u64], ok: &mut [u64], acc: &mut [u64]) {
        if self.live.len() == self.n {
            macro_rules! fixed {
                ($(($n:literal, $w:literal)),*) => {
                    match (self.n, self.fast_words) {
                        $(($n, $w) => return self.fast_pass_fixed::<$n, $w>(u, ok),)*
                        _ => {}
                    }
                };
            }
            fixed!((2, 1), (3, 1), (4, 2), (5, 3), (6, 5), (7, 6), (8, 9));
        }
        self.fast_pass(u, ok, acc)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn fast_pass_avx2(&self, u: &[u64], ok: &mut [u64], acc: &mut [u64]) {
        self.fast_pass_any(u, ok, acc)
    }

    /// Shifts b from `half` that leave some cell empty for exponent `k`,
    /// with their empty cells.
    pub fn scan_exponent(&self, k: u64) -> Vec<(u32, Vec<(u64, u64)>)> {
        let order = self.order as u64;
        let k_inv = if order == 1 {
            0
        } else {
            Modulus::new(order)
                .and_then(|m| m.inv(k))
                .expect("unit exponent") as usize
        };
        let u = self.u_bits(k_inv, self.fast_words);
        let hm = self.half.len();
        let mut ok = vec![1u64; hm];
        let mut acc = vec![0u64; hm];
        #[cfg(target_arch = "x86_64")]
        {
            if std::arch::is_x86_feature_detected!("avx2") {
                // SAFETY: the CPU supports AVX2, checked just above.
                unsafe { self.fast_pass_avx2(&u, &mut ok, &mut acc) };
            } else {
                self.fast_pass_any(&u, &mut ok, &mut acc);
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        self.fast_pass_any(&u, &mut ok, &mut acc);
        let mut full = LazyU::new(self, k_inv);
        ok.iter()
            .enumerate()
            .filter(|&(_, &o)| o == 0)
            .filter_map(|(idx, _)| {
                let b = self.half[idx];
                let any = self.live.iter().any(|&i| {
                    self.live
                        .iter()
                        .any(|&j| self.cell_empty(&mut full, b as usize, i, j))
                });
                any.then(|| (b, self.empty_cells(&mut full, b as usize)))
            })
            .collect()
    }

}

/// `U_i` words filled in on demand; most specs need only a few past the
/// fast-path sample.
struct LazyU {
    words: Vec<u64>,
    k_inv: usize,
    /// Exponents `e < filled` are recorded.
    filled: usize,
    a: usize,
}

impl LazyU {
    fn new(t: &PrimeTables, k_inv: usize) -> Self {
        LazyU {
            words: vec![0; t.n * t.nw],
            k_inv,
            filled: 0,
            a: 0,
        }
    }

    #[inline]
    fn word(&mut self, t: &PrimeTables, i: usize, w: usize) -> u64 {
        let want = (64 * (w + 1)).min(t.order);
        while self.filled < want {
            let e = self.filled;
            let c = t.cls[self.a] as usize;
            self.words[c * t.nw + (e >> 6)] |= 1 << (e & 63);
            self.a += self.k_inv;
            if self.a >= t.order {
                self.a -= t.order;
            }
            self.filled += 1;
        }
        self.words[i * t.nw + w]
    }
}

/// Units k of Z/(p−1) accepted by `keep`, paired with their inverses.
pub(crate) fn exponent_pairs(p: u64, keep: impl Fn(u64) -> bool) -> Vec<(u64, u64)> {
    let order = p - 1;
    let m = Modulus::new(order.max(2)).expect("order");
    (1..order.max(2))
        .filter(|&k| gcd(k as i64, order as i64) == 1 && keep(k))
        .map(|k| (k, if order == 1 { 1 } else { m.inv(k).expect("unit") }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modnum::{primes_in, primitive_root};
    use crate::residue::{image_matrix, normalize_spec};

    #[test]
    fn window_reads_across_words() {
        let bits = [0xFFFF_0000_0000_0000u64, 0x0000_0000_0000_00FF, 0];
        assert_eq!(window(&bits, 0), bits[0]);
        assert_eq!(window(&bits, 48), 0xFFFF | (0xFF << 16));
        assert_eq!(window(&bits, 64), 0xFF);
    }

    #[test]
    fn kernel_matches_direct_test() {
        for p in primes_in(3, 260) {
            let g = primitive_root(p).unwrap();
            for n in 2..=7 {
                let t = PrimeTables::new(p, n, g);
                for (k, _) in exponent_pairs(p, |_| true) {
                    let hits = t.scan_exponent(k);
                    for &b in &t.half {
                        let a = t.gpow[b as usize] as i64;
                        let s = normalize_spec(p as i64, a, k as i64).unwrap();
                        let want = image_matrix(&s, n as u64).unwrap().empty_cells();
                        let got = hits
                            .iter()
                            .find(|h| h.0 == b)
                            .map(|h| h.1.clone())
                            .unwrap_or_default();
                        assert_eq!(got, want, "p={p} n={n} A={a} k={k}");
                    }
                }
            }
        }
    }
}

