//! Finite fields `F_{p^j}` and finite chain rings `O_K/pO_K`.
//!
//! Elements are coefficient vectors over `Z/p` with entries in `[0, p)`.
//! A chain ring is stored by its structure constants on the basis reduced
//! from the ring of integers, so ring automorphisms are plain matrices
//! over `Z/p` and multiplication is table-driven.

use crate::error::{Error, Result};
use std::sync::Arc;

// ---------------------------------------------------------------------------
// Z/p scalar helpers
// ---------------------------------------------------------------------------

#[inline]
pub fn fp_add(p: u64, a: u64, b: u64) -> u64 {
    (a + b) % p
}

#[inline]
pub fn fp_sub(p: u64, a: u64, b: u64) -> u64 {
    (a + p - b) % p
}

#[inline]
pub fn fp_mul(p: u64, a: u64, b: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

pub fn fp_pow(p: u64, mut a: u64, mut n: u64) -> u64 {
    let mut acc = 1u64;
    a %= p;
    while n > 0 {
        if n & 1 == 1 {
            acc = fp_mul(p, acc, a);
        }
        a = fp_mul(p, a, a);
        n >>= 1;
    }
    acc
}

#[inline]
pub fn fp_inv(p: u64, a: u64) -> u64 {
    debug_assert!(a % p != 0);
    fp_pow(p, a, p - 2)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ---------------------------------------------------------------------------
// Dense polynomials over Z/p (ascending coefficients), used for field moduli
// ---------------------------------------------------------------------------

fn zp_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn zp_mul(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = fp_add(p, out[i + j], fp_mul(p, ai, bj));
        }
    }
    zp_trim(&mut out);
    out
}

/// Remainder of `a` under division by monic `m`.
fn zp_rem(p: u64, a: &[u64], m: &[u64]) -> Vec<u64> {
    debug_assert_eq!(*m.last().unwrap(), 1);
    let mut r: Vec<u64> = a.to_vec();
    zp_trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for i in 0..=dm {
                r[shift + i] = fp_sub(p, r[shift + i], fp_mul(p, lead, m[i]));
            }
        }
        r.pop();
        zp_trim(&mut r);
        if r.len() <= dm {
            break;
        }
    }
    r
}

fn zp_is_zero(v: &[u64]) -> bool {
    v.iter().all(|&c| c == 0)
}

// ---------------------------------------------------------------------------
// Finite fields
// ---------------------------------------------------------------------------

/// An element of `F_{p^j}`: `j` coefficients over `Z/p`, ascending.
pub type FqElem = Vec<u64>;

/// The field `F_{p^j}` as `Z/p[x]` modulo a monic irreducible polynomial.
///
/// The modulus is the lexicographically smallest monic irreducible of
/// degree `j`, coefficients compared low-degree-first, which makes the
/// construction deterministic without Conway polynomial tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteField {
    p: u64,
    j: usize,
    modulus: Vec<u64>,
}

impl FiniteField {
    pub fn new(p: u64, j: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::CompositeCharacteristic(p));
        }
        assert!(j >= 1, "extension degree must be at least 1");
        let modulus = smallest_irreducible(p, j);
        Ok(FiniteField { p, j, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.j
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn size(&self) -> u128 {
        (self.p as u128).pow(self.j as u32)
    }

    pub fn zero(&self) -> FqElem {
        vec![0; self.j]
    }

    pub fn one(&self) -> FqElem {
        let mut v = vec![0; self.j];
        v[0] = 1 % self.p;
        v
    }

    /// The residue class of the generator `x` (equals 1 when j = 1).
    pub fn gen(&self) -> FqElem {
        let mut v = vec![0; self.j];
        if self.j > 1 {
            v[1] = 1;
        } else {
            v[0] = 1 % self.p;
        }
        v
    }

    pub fn from_u64(&self, n: u64) -> FqElem {
        let mut v = vec![0; self.j];
        v[0] = n % self.p;
        v
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.iter().zip(b).map(|(&x, &y)| fp_add(self.p, x, y)).collect()
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.iter().zip(b).map(|(&x, &y)| fp_sub(self.p, x, y)).collect()
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        a.iter().map(|&x| fp_sub(self.p, 0, x)).collect()
    }

    pub fn scalar_mul(&self, c: u64, a: &FqElem) -> FqElem {
        a.iter().map(|&x| fp_mul(self.p, c, x)).collect()
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let prod = zp_mul(self.p, a, b);
        let mut r = zp_rem(self.p, &prod, &self.modulus);
        r.resize(self.j, 0);
        r
    }

    pub fn pow(&self, a: &FqElem, mut n: u128) -> FqElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FqElem) -> Option<FqElem> {
        if self.is_zero(a) {
            return None;
        }
        Some(self.pow(a, self.size() - 2))
    }

    /// Frobenius `x -> x^p`.
    pub fn frobenius(&self, a: &FqElem) -> FqElem {
        self.pow(a, self.p as u128)
    }

    /// Multiplicative order of the Frobenius automorphism.
    pub fn frobenius_order(&self) -> usize {
        let g = self.gen();
        let mut x = self.frobenius(&g);
        let mut k = 1;
        while x != g {
            x = self.frobenius(&x);
            k += 1;
        }
        k
    }

    pub fn elem_of_index(&self, mut k: u128) -> FqElem {
        let mut v = vec![0; self.j];
        for c in v.iter_mut() {
            *c = (k % self.p as u128) as u64;
            k /= self.p as u128;
        }
        v
    }

    pub fn index_of(&self, a: &FqElem) -> u128 {
        let mut k = 0u128;
        for &c in a.iter().rev() {
            k = k * self.p as u128 + c as u128;
        }
        k
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.size()).map(move |k| self.elem_of_index(k))
    }

    /// Evaluate a polynomial with `F_q` coefficients (ascending) at `x`.
    pub fn eval_poly(&self, poly: &[FqElem], x: &FqElem) -> FqElem {
        let mut acc = self.zero();
        for c in poly.iter().rev() {
            acc = self.add(&self.mul(&acc, x), c);
        }
        acc
    }

    /// Lexicographically smallest monic irreducible of degree `n` over this
    /// field, coefficients compared low-degree-first.
    pub fn smallest_irreducible_over(&self, n: usize) -> Vec<FqElem> {
        assert!(n >= 1);
        let q = self.size();
        let mut idx = vec![0u128; n];
        loop {
            let mut poly: Vec<FqElem> = idx.iter().map(|&k| self.elem_of_index(k)).collect();
            poly.push(self.one());
            if self.poly_is_irreducible(&poly) {
                return poly;
            }
            // increment the tuple (c_{n-1} fastest, c_0 is the primary key)
            let mut i = n;
            loop {
                if i == 0 {
                    unreachable!("no irreducible polynomial found");
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < q {
                    break;
                }
                idx[i] = 0;
            }
        }
    }

    fn poly_is_irreducible(&self, poly: &[FqElem]) -> bool {
        let n = poly.len() - 1;
        if n == 1 {
            return true;
        }
        if self.is_zero(&poly[0]) {
            return false;
        }
        // trial division by every monic polynomial of degree 1..=n/2
        for d in 1..=n / 2 {
            let cand_count = self.size().pow(d as u32);
            for k in 0..cand_count {
                let mut g: Vec<FqElem> = Vec::with_capacity(d + 1);
                let mut kk = k;
                for _ in 0..d {
                    g.push(self.elem_of_index(kk % self.size()));
                    kk /= self.size();
                }
                g.push(self.one());
                if self.poly_rem_is_zero(poly, &g) {
                    return false;
                }
            }
        }
        true
    }

    fn poly_rem_is_zero(&self, a: &[FqElem], m: &[FqElem]) -> bool {
        let mut r: Vec<FqElem> = a.to_vec();
        let dm = m.len() - 1;
        while r.len() > dm {
            let lead = r.last().unwrap().clone();
            let shift = r.len() - 1 - dm;
            if !self.is_zero(&lead) {
                for i in 0..=dm {
                    let t = self.mul(&lead, &m[i]);
                    r[shift + i] = self.sub(&r[shift + i], &t);
                }
            }
            r.pop();
            while r.len() > dm && self.is_zero(r.last().unwrap()) {
                r.pop();
            }
        }
        r.iter().all(|c| self.is_zero(c))
    }
}

/// Lexicographically smallest monic irreducible of degree `j` over `Z/p`.
fn smallest_irreducible(p: u64, j: usize) -> Vec<u64> {
    if j == 1 {
        // x itself: constant coefficient 0 is the smallest choice
        return vec![0, 1];
    }
    let total = (p as u128).pow(j as u32);
    for k in 0..total {
        // low-degree-first comparison: c_0 is the most significant digit
        let mut cand = vec![0u64; j + 1];
        cand[j] = 1;
        let mut kk = k;
        for i in (0..j).rev() {
            cand[i] = (kk % p as u128) as u64;
            kk /= p as u128;
        }
        if zp_poly_is_irreducible(p, &cand) {
            return cand;
        }
    }
    unreachable!("irreducible polynomial of degree {j} over F_{p} must exist")
}

fn zp_poly_is_irreducible(p: u64, poly: &[u64]) -> bool {
    let n = poly.len() - 1;
    if n == 1 {
        return true;
    }
    if poly[0] == 0 {
        return false;
    }
    for d in 1..=n / 2 {
        let cand_count = (p as u128).pow(d as u32);
        for k in 0..cand_count {
            let mut g = vec![0u64; d + 1];
            g[d] = 1;
            let mut kk = k;
            for c in g.iter_mut().take(d) {
                *c = (kk % p as u128) as u64;
                kk /= p as u128;
            }
            if zp_is_zero(&zp_rem(p, poly, &g)) {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Linear maps over Z/p and ring automorphisms
// ---------------------------------------------------------------------------

/// A `Z/p`-linear map on coefficient vectors, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpLinearMap {
    pub p: u64,
    pub matrix: Vec<Vec<u64>>,
}

impl FpLinearMap {
    pub fn identity(p: u64, dim: usize) -> Self {
        let matrix = (0..dim)
            .map(|r| (0..dim).map(|c| u64::from(r == c)).collect())
            .collect();
        FpLinearMap { p, matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(0u64, |acc, (&m, &x)| fp_add(self.p, acc, fp_mul(self.p, m, x)))
            })
            .collect()
    }

    /// `self` after `other`: `(self * other)(v) = self(other(v))`.
    pub fn compose(&self, other: &FpLinearMap) -> FpLinearMap {
        let dim = self.dim();
        let mut matrix = vec![vec![0u64; dim]; dim];
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = 0;
                for k in 0..dim {
                    acc = fp_add(self.p, acc, fp_mul(self.p, self.matrix[r][k], other.matrix[k][c]));
                }
                matrix[r][c] = acc;
            }
        }
        FpLinearMap { p: self.p, matrix }
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.iter().enumerate().all(|(r, row)| {
            row.iter()
                .enumerate()
                .all(|(c, &m)| m == u64::from(r == c))
        })
    }
}

/// A ring automorphism of a chain ring, as a matrix over `Z/p` plus its order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingAuto {
    pub map: FpLinearMap,
    pub order: usize,
}

impl RingAuto {
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        self.map.apply(v)
    }

    pub fn identity(p: u64, dim: usize) -> Self {
        RingAuto { map: FpLinearMap::identity(p, dim), order: 1 }
    }

    pub fn pow(&self, k: usize) -> FpLinearMap {
        let mut acc = FpLinearMap::identity(self.map.p, self.map.dim());
        for _ in 0..k {
            acc = self.map.compose(&acc);
        }
        acc
    }
}

/// Solve `M x = rhs` over `Z/p` by Gaussian elimination; `None` if unsolvable.
pub fn fp_solve(p: u64, matrix: &[Vec<u64>], rhs: &[u64]) -> Option<Vec<u64>> {
    let rows = matrix.len();
    let cols = if rows == 0 { 0 } else { matrix[0].len() };
    let mut a: Vec<Vec<u64>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    let mut pivot_col_of_row = vec![usize::MAX; rows];
    let mut rank = 0;
    for col in 0..cols {
        let piv = (rank..rows).find(|&r| a[r][col] != 0);
        let Some(piv) = piv else { continue };
        a.swap(rank, piv);
        let inv = fp_inv(p, a[rank][col]);
        for x in a[rank].iter_mut() {
            *x = fp_mul(p, *x, inv);
        }
        for r in 0..rows {
            if r != rank && a[r][col] != 0 {
                let factor = a[r][col];
                for c in col..=cols {
                    let t = fp_mul(p, factor, a[rank][c]);
                    a[r][c] = fp_sub(p, a[r][c], t);
                }
            }
        }
        pivot_col_of_row[rank] = col;
        rank += 1;
        if rank == rows {
            break;
        }
    }
    // consistency: no row 0 = nonzero
    for r in rank..rows {
        if a[r][cols] != 0 {
            return None;
        }
    }
    let mut x = vec![0u64; cols];
    for r in 0..rank {
        x[pivot_col_of_row[r]] = a[r][cols];
    }
    Some(x)
}

/// Rank of a matrix over `Z/p`.
pub fn fp_rank(p: u64, matrix: &[Vec<u64>]) -> usize {
    let mut a: Vec<Vec<u64>> = matrix.to_vec();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut rank = 0;
    for col in 0..cols {
        let piv = (rank..rows).find(|&r| a[r][col] != 0);
        let Some(piv) = piv else { continue };
        a.swap(rank, piv);
        let inv = fp_inv(p, a[rank][col]);
        let pivot_row: Vec<u64> = a[rank].iter().map(|&x| fp_mul(p, x, inv)).collect();
        a[rank] = pivot_row.clone();
        for r in 0..rows {
            if r != rank && a[r][col] != 0 {
                let factor = a[r][col];
                for c in 0..cols {
                    let t = fp_mul(p, factor, pivot_row[c]);
                    a[r][c] = fp_sub(p, a[r][c], t);
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Reduced row-echelon form over `Z/p` (canonical), zero rows dropped.
pub fn fp_rref(p: u64, matrix: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut a: Vec<Vec<u64>> = matrix.to_vec();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut rank = 0;
    for col in 0..cols {
        let piv = (rank..rows).find(|&r| a[r][col] != 0);
        let Some(piv) = piv else { continue };
        a.swap(rank, piv);
        let inv = fp_inv(p, a[rank][col]);
        for x in a[rank].iter_mut() {
            *x = fp_mul(p, *x, inv);
        }
        let pivot_row = a[rank].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let factor = row[col];
                for c in 0..cols {
                    let t = fp_mul(p, factor, pivot_row[c]);
                    row[c] = fp_sub(p, row[c], t);
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    a.truncate(rank);
    a
}

// ---------------------------------------------------------------------------
// Finite chain rings
// ---------------------------------------------------------------------------

/// An element of a chain ring: coefficients over `Z/p` on the reduced basis.
pub type ChainElem = Vec<u64>;

/// A finite chain ring `O_K/pO_K` with `q^e` elements, `q = p^f`.
///
/// Stored by structure constants over `Z/p` on the basis reduced from the
/// ring of integers; the basis element at index 0 is the ring identity.
/// Every element is a unit or nilpotent, and the ideals form a chain
/// generated by powers of `max_ideal_gen`.
#[derive(Debug, Clone)]
pub struct ChainRing {
    p: u64,
    e: usize,
    f_deg: usize,
    dim: usize,
    table: Arc<Vec<Vec<ChainElem>>>,
    max_ideal_gen: ChainElem,
}

impl PartialEq for ChainRing {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.e == other.e
            && self.f_deg == other.f_deg
            && (Arc::ptr_eq(&self.table, &other.table) || self.table == other.table)
            && self.max_ideal_gen == other.max_ideal_gen
    }
}

impl ChainRing {
    pub fn new(
        p: u64,
        e: usize,
        f_deg: usize,
        table: Vec<Vec<ChainElem>>,
        max_ideal_gen: ChainElem,
    ) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::CompositeCharacteristic(p));
        }
        let dim = e * f_deg;
        assert_eq!(table.len(), dim);
        assert!(table.iter().all(|row| row.len() == dim));
        let ring = ChainRing { p, e, f_deg, dim, table: Arc::new(table), max_ideal_gen };
        ring.validate()?;
        Ok(ring)
    }

    /// A finite field viewed as a chain ring with nilpotency index 1.
    pub fn from_field(ff: &FiniteField) -> Self {
        let dim = ff.degree();
        let mut table = vec![vec![vec![0u64; dim]; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut bi = ff.zero();
                bi[i] = 1;
                let mut bj = ff.zero();
                bj[j] = 1;
                table[i][j] = ff.mul(&bi, &bj);
            }
        }
        ChainRing {
            p: ff.p(),
            e: 1,
            f_deg: dim,
            dim,
            table: Arc::new(table),
            max_ideal_gen: vec![0; dim],
        }
    }

    fn validate(&self) -> Result<()> {
        // commutativity + associativity on basis triples; identity at index 0
        for i in 0..self.dim {
            for j in 0..self.dim {
                if self.table[i][j] != self.table[j][i] {
                    return Err(Error::Unsupported(
                        "chain ring structure constants are not commutative".into(),
                    ));
                }
            }
        }
        let one = self.one();
        for i in 0..self.dim {
            let b = self.basis_elem(i);
            if self.mul(&one, &b) != b {
                return Err(Error::Unsupported("basis element 0 is not an identity".into()));
            }
        }
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    let bi = self.basis_elem(i);
                    let bj = self.basis_elem(j);
                    let bk = self.basis_elem(k);
                    let l = self.mul(&self.mul(&bi, &bj), &bk);
                    let r = self.mul(&bi, &self.mul(&bj, &bk));
                    if l != r {
                        return Err(Error::Unsupported(
                            "chain ring structure constants are not associative".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Nilpotency index of the maximal ideal.
    pub fn nilpotency(&self) -> usize {
        self.e
    }

    /// Residue degree: the residue field has `p^f_deg` elements.
    pub fn residue_degree(&self) -> usize {
        self.f_deg
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> u128 {
        (self.p as u128).pow(self.dim as u32)
    }

    pub fn max_ideal_gen(&self) -> &ChainElem {
        &self.max_ideal_gen
    }

    pub fn table(&self) -> &[Vec<ChainElem>] {
        &self.table
    }

    pub fn zero(&self) -> ChainElem {
        vec![0; self.dim]
    }

    pub fn one(&self) -> ChainElem {
        let mut v = vec![0; self.dim];
        v[0] = 1 % self.p;
        v
    }

    pub fn basis_elem(&self, i: usize) -> ChainElem {
        let mut v = vec![0; self.dim];
        v[i] = 1;
        v
    }

    pub fn from_u64(&self, n: u64) -> ChainElem {
        let mut v = vec![0; self.dim];
        v[0] = n % self.p;
        v
    }

    pub fn is_zero(&self, a: &ChainElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &ChainElem, b: &ChainElem) -> ChainElem {
        a.iter().zip(b).map(|(&x, &y)| fp_add(self.p, x, y)).collect()
    }

    pub fn sub(&self, a: &ChainElem, b: &ChainElem) -> ChainElem {
        a.iter().zip(b).map(|(&x, &y)| fp_sub(self.p, x, y)).collect()
    }

    pub fn neg(&self, a: &ChainElem) -> ChainElem {
        a.iter().map(|&x| fp_sub(self.p, 0, x)).collect()
    }

    pub fn scalar_mul(&self, c: u64, a: &ChainElem) -> ChainElem {
        a.iter().map(|&x| fp_mul(self.p, c, x)).collect()
    }

    pub fn mul(&self, a: &ChainElem, b: &ChainElem) -> ChainElem {
        let mut out = vec![0u64; self.dim];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let coef = fp_mul(self.p, ai, bj);
                for (k, &t) in self.table[i][j].iter().enumerate() {
                    out[k] = fp_add(self.p, out[k], fp_mul(self.p, coef, t));
                }
            }
        }
        out
    }

    /// Matrix of multiplication by `x` (columns are `x * b_j`).
    pub fn mul_matrix(&self, x: &ChainElem) -> Vec<Vec<u64>> {
        let mut m = vec![vec![0u64; self.dim]; self.dim];
        for j in 0..self.dim {
            let col = self.mul(x, &self.basis_elem(j));
            for r in 0..self.dim {
                m[r][j] = col[r];
            }
        }
        m
    }

    /// Exact division: some `q` with `q * x = y`, if one exists.
    pub fn divide(&self, y: &ChainElem, x: &ChainElem) -> Option<ChainElem> {
        fp_solve(self.p, &self.mul_matrix(x), y)
    }

    pub fn inverse(&self, x: &ChainElem) -> Option<ChainElem> {
        let inv = self.divide(&self.one(), x)?;
        // a solution of x*q = 1 certifies the unit; guard against spurious
        // solutions in the non-unit case
        if self.mul(&inv, x) == self.one() {
            Some(inv)
        } else {
            None
        }
    }

    /// True iff the element generates the whole ring, i.e. lies outside the
    /// maximal ideal.
    pub fn is_unit(&self, x: &ChainElem) -> bool {
        self.inverse(x).is_some()
    }

    /// Largest `k <= e` with `x` in the `k`-th power of the maximal ideal.
    pub fn valuation(&self, x: &ChainElem) -> usize {
        if self.is_zero(x) {
            return self.e;
        }
        let mut v = 0;
        let mut pw = self.one();
        for k in 1..self.e {
            pw = self.mul(&pw, &self.max_ideal_gen);
            // x in (g^k) iff g^k * q = x is solvable
            if fp_solve(self.p, &self.mul_matrix(&pw), x).is_some() {
                v = k;
            } else {
                break;
            }
        }
        v
    }

    pub fn elem_of_index(&self, mut k: u128) -> ChainElem {
        let mut v = vec![0; self.dim];
        for c in v.iter_mut() {
            *c = (k % self.p as u128) as u64;
            k /= self.p as u128;
        }
        v
    }

    pub fn index_of(&self, a: &ChainElem) -> u128 {
        let mut k = 0u128;
        for &c in a.iter().rev() {
            k = k * self.p as u128 + c as u128;
        }
        k
    }

    pub fn elements(&self) -> impl Iterator<Item = ChainElem> + '_ {
        (0..self.size()).map(move |k| self.elem_of_index(k))
    }

    /// The residue field `S/m` as a `FiniteField` together with the
    /// projection of each basis element, when the ring is itself a field.
    pub fn as_field(&self) -> Option<FiniteField> {
        if self.e == 1 {
            FiniteField::new(self.p, self.f_deg).ok()
        } else {
            None
        }
    }
}

/// `make_finite_field(p, j)`: `F_{p^j}` with the deterministic modulus.
pub fn make_finite_field(p: u64, j: usize) -> Result<FiniteField> {
    FiniteField::new(p, j)
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

pub fn chain_ring_to_json(ring: &ChainRing, automorphisms: &[RingAuto]) -> serde_json::Value {
    serde_json::json!({
        "p": ring.p(),
        "e": ring.nilpotency(),
        "f": ring.residue_degree(),
        "structure_constants": ring.table().to_vec(),
        "max_ideal_gen": ring.max_ideal_gen(),
        "automorphisms": automorphisms
            .iter()
            .map(|a| serde_json::json!({"matrix": a.map.matrix, "order": a.order}))
            .collect::<Vec<_>>(),
    })
}

pub fn finite_field_to_json(ff: &FiniteField) -> serde_json::Value {
    let ring = ChainRing::from_field(ff);
    let frob_matrix: Vec<Vec<u64>> = {
        let dim = ff.degree();
        let mut cols = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut b = ff.zero();
            b[i] = 1;
            cols.push(ff.frobenius(&b));
        }
        (0..dim).map(|r| (0..dim).map(|c| cols[c][r]).collect()).collect()
    };
    let frob = RingAuto {
        map: FpLinearMap { p: ff.p(), matrix: frob_matrix },
        order: ff.frobenius_order(),
    };
    let mut v = chain_ring_to_json(&ring, &[frob]);
    v["modulus"] = serde_json::json!(ff.modulus());
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_modulus_is_x() {
        let f = make_finite_field(3, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.size(), 3);
    }

    #[test]
    fn f9_has_nine_elements_and_frobenius_order_two() {
        let f = make_finite_field(3, 2).unwrap();
        assert_eq!(f.size(), 9);
        assert_eq!(f.modulus(), &[1, 0, 1]); // x^2 + 1
        assert_eq!(f.frobenius_order(), 2);
        // generator squares to -1
        let g = f.gen();
        assert_eq!(f.mul(&g, &g), f.from_u64(2));
    }

    #[test]
    fn composite_characteristic_rejected() {
        assert_eq!(make_finite_field(6, 1).unwrap_err(), Error::CompositeCharacteristic(6));
    }

    #[test]
    fn f125_fermat_identity() {
        // x^(5^3) - x vanishes on all 125 elements
        let f = make_finite_field(5, 3).unwrap();
        for a in f.elements() {
            assert_eq!(f.pow(&a, 125), a);
        }
    }

    #[test]
    fn field_axioms_exhaustive_f9() {
        let f = make_finite_field(3, 2).unwrap();
        let elems: Vec<_> = f.elements().collect();
        for a in &elems {
            for b in &elems {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                if !f.is_zero(b) {
                    let binv = f.inv(b).unwrap();
                    assert_eq!(f.mul(&f.mul(a, b), &binv), *a);
                }
            }
        }
    }

    #[test]
    fn frobenius_is_additive_and_multiplicative() {
        let f = make_finite_field(3, 2).unwrap();
        let elems: Vec<_> = f.elements().collect();
        for a in &elems {
            for b in &elems {
                assert_eq!(f.frobenius(&f.add(a, b)), f.add(&f.frobenius(a), &f.frobenius(b)));
                assert_eq!(f.frobenius(&f.mul(a, b)), f.mul(&f.frobenius(a), &f.frobenius(b)));
            }
        }
    }

    /// F_3[w]/(w^2): basis (1, w), w^2 = 0.
    fn dual_numbers_f3() -> ChainRing {
        let z = vec![0, 0];
        let one = vec![1, 0];
        let w = vec![0, 1];
        let table = vec![vec![one, w.clone()], vec![w.clone(), z]];
        ChainRing::new(3, 2, 1, table, w).unwrap()
    }

    #[test]
    fn dual_numbers_units_and_valuations() {
        let s = dual_numbers_f3();
        assert_eq!(s.size(), 9);
        let w = vec![0, 1];
        assert!(!s.is_unit(&w));
        // w*x is never 1, exhaustively
        for x in s.elements() {
            assert_ne!(s.mul(&w, &x), s.one());
        }
        let one_plus_w = vec![1, 1];
        let inv = s.inverse(&one_plus_w).unwrap();
        assert_eq!(inv, vec![1, 2]); // 1 - w
        assert_eq!(s.valuation(&s.zero()), 2);
        assert_eq!(s.valuation(&w), 1);
        assert_eq!(s.valuation(&one_plus_w), 0);
    }

    #[test]
    fn chain_ring_units_plus_nilpotents_partition() {
        let s = dual_numbers_f3();
        let mut units = 0u32;
        let mut nilpotent = 0u32;
        for x in s.elements() {
            if s.is_unit(&x) {
                units += 1;
            }
            // nilpotency: x^e = 0
            let mut pw = s.one();
            for _ in 0..s.nilpotency() {
                pw = s.mul(&pw, &x);
            }
            if s.is_zero(&pw) {
                nilpotent += 1;
            }
        }
        assert_eq!(units + nilpotent, 9);
        assert_eq!(nilpotent, 3); // the maximal ideal (w)
    }

    #[test]
    fn fp_solve_roundtrip() {
        let m = vec![vec![1, 2], vec![0, 1]];
        let x = fp_solve(3, &m, &[2, 1]).unwrap();
        // check m*x = rhs
        let r0 = fp_add(3, fp_mul(3, m[0][0], x[0]), fp_mul(3, m[0][1], x[1]));
        let r1 = fp_add(3, fp_mul(3, m[1][0], x[0]), fp_mul(3, m[1][1], x[1]));
        assert_eq!((r0, r1), (2, 1));
    }

    #[test]
    fn smallest_irreducible_over_f9() {
        let f = make_finite_field(3, 2).unwrap();
        let poly = f.smallest_irreducible_over(2);
        assert_eq!(poly.len(), 3);
        // no roots in F_9
        for a in f.elements() {
            assert!(!f.is_zero(&f.eval_poly(&poly, &a)));
        }
    }
}
