//! Residue-class partitions, image matrices and map-type classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modnum::{self, abs_least, gcd, AbsLeast, Modulus, MAX_MODULUS};

/// Which exponent family a spec belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KMode {
    Linear,
    Sqrt,
    Other,
}

impl KMode {
    pub fn as_str(self) -> &'static str {
        match self {
            KMode::Linear => "linear",
            KMode::Sqrt => "sqrt",
            KMode::Other => "other",
        }
    }
}

/// A validated map f(x) = A x^k mod p that permutes {1, …, p−1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermutationSpec {
    pub p: u64,
    #[serde(rename = "A")]
    pub a: AbsLeast,
    pub k: u64,
    pub k_raw: i64,
}

/// Validate `(p, A, k)`, reducing A to its absolute-least residue and k into `[1, p−2]`.
pub fn normalize_spec(p: i64, a: i64, k: i64) -> Result<PermutationSpec> {
    if p < 3 || !modnum::is_odd_prime(p as u64) {
        return Err(Error::NotOddPrime(p));
    }
    let pu = p as u64;
    if pu >= MAX_MODULUS {
        return Err(Error::ModulusTooLarge(pu));
    }
    let a_red = abs_least(a as i128, pu)?;
    if a_red.value() == 0 {
        return Err(Error::ZeroCoefficient { a, p: pu });
    }
    let order = pu - 1;
    let k_red = (k as i128).rem_euclid(order as i128) as u64;
    let g = gcd(k_red as i64, order as i64);
    if g != 1 {
        return Err(Error::ExponentNotCoprime {
            k,
            order,
            gcd: gcd(k, order as i64),
        });
    }
    Ok(PermutationSpec {
        p: pu,
        a: a_red,
        k: k_red,
        k_raw: k,
    })
}

impl PermutationSpec {
    pub fn new(p: i64, a: i64, k: i64) -> Result<Self> {
        normalize_spec(p, a, k)
    }

    pub fn modulus(&self) -> Modulus {
        Modulus::new(self.p).expect("validated prime")
    }

    /// A as a least nonnegative residue.
    pub fn a_residue(&self) -> u64 {
        self.a.residue(self.p)
    }

    pub fn kind(&self) -> KMode {
        if self.k == 1 {
            KMode::Linear
        } else if self.k == (self.p + 1) / 2 {
            KMode::Sqrt
        } else {
            KMode::Other
        }
    }

    /// f(x) = A x^k mod p, as a value in `[1, p−1]`.
    pub fn eval(&self, x: u64) -> Result<u64> {
        if x == 0 || x >= self.p {
            return Err(Error::OutOfRange { x, max: self.p - 1 });
        }
        let m = self.modulus();
        Ok(m.mul(self.a_residue(), m.pow(x, self.k)))
    }

    /// The map with coefficient −A and the same exponent.
    pub fn negated(&self) -> PermutationSpec {
        PermutationSpec {
            a: self.a.negated(),
            ..*self
        }
    }

    /// The compositional inverse, A^{−k′} x^{k′} with k k′ ≡ 1 mod (p−1).
    pub fn inverse(&self) -> PermutationSpec {
        let m = self.modulus();
        let order = self.p - 1;
        let k_inv = if order == 1 {
            1
        } else {
            Modulus::new(order)
                .and_then(|o| o.inv(self.k))
                .expect("k coprime to p-1")
        };
        let a_inv = m.inv(self.a_residue()).expect("A nonzero");
        let coeff = m.pow(a_inv, k_inv);
        PermutationSpec {
            p: self.p,
            a: abs_least(coeff as i128, self.p).expect("odd prime"),
            k: k_inv,
            k_raw: k_inv as i64,
        }
    }
}

/// The class index of `x` modulo `n`, in `[0, n)`.
pub fn class_of(x: i64, n: u64) -> u64 {
    (x as i128).rem_euclid(n as i128) as u64
}

/// Paper-style label: classes are numbered 1..n with n standing for class 0.
pub fn one_based_label(j: u64, n: u64) -> u64 {
    if j == 0 {
        n
    } else {
        j
    }
}

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        Err(Error::ClassModulus(n))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResiduePartition {
    pub n: u64,
    pub sizes: Vec<u64>,
}

/// Size of the class `{1 ≤ x ≤ p−1 : x ≡ j mod n}`.
pub fn class_size(p: u64, n: u64, j: u64) -> u64 {
    if j == 0 {
        (p - 1) / n
    } else if j > p - 1 {
        0
    } else {
        (p - 1 - j) / n + 1
    }
}

pub fn partition(p: u64, n: u64) -> Result<ResiduePartition> {
    check_n(n)?;
    if !modnum::is_odd_prime(p) {
        return Err(Error::NotOddPrime(p as i64));
    }
    Ok(ResiduePartition {
        n,
        sizes: (0..n).map(|j| class_size(p, n, j)).collect(),
    })
}

/// Counts `m[i][j] = |{x ∈ I_i : f(x) ∈ I_j}|`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageMatrix {
    pub spec: PermutationSpec,
    pub n: u64,
    pub counts: Vec<u64>,
}

impl ImageMatrix {
    pub fn get(&self, i: u64, j: u64) -> u64 {
        self.counts[(i * self.n + j) as usize]
    }

    pub fn row(&self, i: u64) -> &[u64] {
        let n = self.n as usize;
        &self.counts[i as usize * n..(i as usize + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn row_sum(&self, i: u64) -> u64 {
        self.row(i).iter().sum()
    }

    pub fn col_sum(&self, j: u64) -> u64 {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    /// Smallest count over cells whose row and column classes are nonempty.
    pub fn min_cell(&self) -> u64 {
        self.admissible_cells()
            .map(|(i, j)| self.get(i, j))
            .min()
            .unwrap_or(0)
    }

    fn admissible_cells(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let n = self.n;
        let p = self.spec.p;
        (0..n)
            .filter(move |&i| class_size(p, n, i) > 0)
            .flat_map(move |i| {
                (0..n)
                    .filter(move |&j| class_size(p, n, j) > 0)
                    .map(move |j| (i, j))
            })
    }

    /// Zero cells between nonempty classes, in lexicographic order.
    pub fn empty_cells(&self) -> Vec<(u64, u64)> {
        self.admissible_cells()
            .filter(|&(i, j)| self.get(i, j) == 0)
            .collect()
    }
}

/// Exact image matrix from one walk over the cyclic group.
pub fn image_matrix(spec: &PermutationSpec, n: u64) -> Result<ImageMatrix> {
    check_n(n)?;
    let p = spec.p;
    let m = spec.modulus();
    let g = modnum::primitive_root(p)?;
    let gk = m.pow(g, spec.k);
    let mut counts = vec![0u64; (n * n) as usize];
    let mut x = 1u64;
    let mut y = spec.a_residue();
    for _ in 0..p - 1 {
        counts[((x % n) * n + y % n) as usize] += 1;
        x = m.mul(x, g);
        y = m.mul(y, gk);
    }
    Ok(ImageMatrix {
        spec: *spec,
        n,
        counts,
    })
}

/// Order in which `has_missed_cell` visits the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanOrder {
    #[default]
    Sequential,
    /// A seeded affine permutation `t ↦ 1 + (a t + b mod (p−1))` of the domain.
    Seeded(u64),
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn affine_order(p: u64, seed: u64) -> (u64, u64) {
    let order = p - 1;
    let mut state = seed;
    let mut a = splitmix64(&mut state) % order;
    while gcd(a as i64, order as i64) != 1 {
        a = (a + 1) % order;
    }
    let b = splitmix64(&mut state) % order;
    (a, b)
}

/// Early-exiting emptiness test: `None` once every cell between nonempty
/// classes has been hit, else the least empty cell after a full pass.
pub fn has_missed_cell(
    spec: &PermutationSpec,
    n: u64,
    order: ScanOrder,
) -> Result<Option<(u64, u64)>> {
    check_n(n)?;
    let p = spec.p;
    let m = spec.modulus();
    let live: Vec<bool> = (0..n).map(|j| class_size(p, n, j) > 0).collect();
    let live_count = live.iter().filter(|&&b| b).count() as u64;
    let mut remaining = live_count * live_count;
    let mut seen = vec![false; (n * n) as usize];
    let a = spec.a_residue();
    let (step, offset) = match order {
        ScanOrder::Sequential => (1, 0),
        ScanOrder::Seeded(seed) => affine_order(p, seed),
    };
    let modulus_order = p - 1;
    let mut t_pos = offset;
    for _ in 0..modulus_order {
        let x = 1 + t_pos;
        let y = m.mul(a, m.pow(x, spec.k));
        let cell = ((x % n) * n + y % n) as usize;
        if !seen[cell] {
            seen[cell] = true;
            remaining -= 1;
            if remaining == 0 {
                return Ok(None);
            }
        }
        t_pos = (t_pos + step) % modulus_order;
    }
    for i in 0..n {
        for j in 0..n {
            if live[i as usize] && live[j as usize] && !seen[(i * n + j) as usize] {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// Which of the map types hold, with witnesses (0-based class labels).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeReport {
    pub n: u64,
    pub type_i: bool,
    pub type_iia: bool,
    pub type_iib: bool,
    pub type_iii: bool,
    pub type_iv: bool,
    /// The class map σ for Type (iia), as pairs (i, σ(i)).
    pub class_permutation: Option<Vec<(u64, u64)>>,
    /// Classes j with f(I_j) = I_j.
    pub fixed_classes: Vec<u64>,
    /// Pairs (i, j) with f(I_i) ⊆ I_j.
    pub contained: Vec<(u64, u64)>,
    /// Pairs (i, j) with f(I_i) ∩ I_j = ∅.
    pub empty_cells: Vec<(u64, u64)>,
}

pub fn classify_matrix(mat: &ImageMatrix) -> TypeReport {
    let n = mat.n;
    let p = mat.spec.p;
    let size = |j: u64| class_size(p, n, j);
    let nonempty: Vec<u64> = (0..n).filter(|&j| size(j) > 0).collect();

    let fixed_classes: Vec<u64> = nonempty
        .iter()
        .copied()
        .filter(|&j| mat.get(j, j) == size(j))
        .collect();
    let type_i = fixed_classes.len() == nonempty.len();

    let contained: Vec<(u64, u64)> = nonempty
        .iter()
        .filter_map(|&i| {
            let mut hits = (0..n).filter(|&j| mat.get(i, j) > 0);
            let first = hits.next()?;
            hits.next().is_none().then_some((i, first))
        })
        .collect();

    let class_permutation = if contained.len() == nonempty.len() {
        let mut targets: Vec<u64> = contained.iter().map(|&(_, j)| j).collect();
        targets.sort_unstable();
        targets.dedup();
        let sizes_match = contained.iter().all(|&(i, j)| size(i) == size(j));
        (targets.len() == contained.len() && sizes_match).then(|| contained.clone())
    } else {
        None
    };

    let empty_cells = mat.empty_cells();
    TypeReport {
        n,
        type_i,
        type_iia: class_permutation.is_some(),
        type_iib: !fixed_classes.is_empty(),
        type_iii: !contained.is_empty(),
        type_iv: !empty_cells.is_empty(),
        class_permutation,
        fixed_classes,
        contained,
        empty_cells,
    }
}

pub fn classify(spec: &PermutationSpec, n: u64) -> Result<TypeReport> {
    Ok(classify_matrix(&image_matrix(spec, n)?))
}
