//! Laurent polynomial rings `Z[M]` over a character lattice `M = Z^rank`.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vector, so equality and
//! term order are canonical (lexicographic). Coefficients are `i128` and all
//! arithmetic is exact; overflow panics rather than wrapping.

use crate::lattice::{self, content, IntMat, LatticeVector};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub type Coeff = i128;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LaurentError {
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("character must be nonzero")]
    ZeroCharacter,
    #[error("not divisible by 1 - e^{character}: residue {residue}")]
    NotDivisible {
        character: String,
        residue: Box<LaurentPoly>,
    },
    #[error("linear system is singular")]
    Singular,
    #[error("solution denominator does not divide numerator")]
    NotPolynomial,
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LaurentPoly {
    rank: usize,
    terms: BTreeMap<LatticeVector, Coeff>,
}

impl LaurentPoly {
    pub fn zero(rank: usize) -> Self {
        LaurentPoly {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(rank: usize) -> Self {
        Self::constant(rank, 1)
    }

    pub fn constant(rank: usize, c: Coeff) -> Self {
        Self::monomial(vec![0; rank], c)
    }

    pub fn monomial(exp: LatticeVector, c: Coeff) -> Self {
        let rank = exp.len();
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(exp, c);
        }
        LaurentPoly { rank, terms }
    }

    /// The monomial `e^chi`.
    pub fn exp(chi: &[i64]) -> Self {
        Self::monomial(chi.to_vec(), 1)
    }

    /// `1 - e^chi`.
    pub fn one_minus_exp(chi: &[i64]) -> Self {
        let mut f = Self::one(chi.len());
        f.add_term(chi.to_vec(), -1);
        f
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LatticeVector, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &[i64]) -> Coeff {
        self.terms.get(exp).copied().unwrap_or(0)
    }

    /// Lexicographically largest term.
    pub fn leading_term(&self) -> Option<(&LatticeVector, &Coeff)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, exp: LatticeVector, c: Coeff) {
        assert_eq!(exp.len(), self.rank, "term rank mismatch");
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(exp);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().checked_add(c).expect("coefficient overflow");
                if s == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank, "rank mismatch in add");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank, "rank mismatch in sub");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -*c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -*c;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank, "rank mismatch in mul");
        let mut out = LaurentPoly::zero(self.rank);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = lattice::vec_add(ea, eb);
                out.add_term(e, ca.checked_mul(*cb).expect("coefficient overflow"));
            }
        }
        out
    }

    pub fn mul_scalar(&self, k: Coeff) -> Self {
        if k == 0 {
            return LaurentPoly::zero(self.rank);
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.checked_mul(k).expect("coefficient overflow");
        }
        out
    }

    /// Multiply by the monomial `e^shift`.
    pub fn mul_monomial(&self, shift: &[i64], k: Coeff) -> Self {
        let mut out = LaurentPoly::zero(self.rank);
        for (e, c) in &self.terms {
            out.add_term(lattice::vec_add(e, shift), c.checked_mul(k).expect("overflow"));
        }
        out
    }

    /// Ring map `e^chi -> 1`: the sum of coefficients.
    pub fn augmentation(&self) -> Coeff {
        self.terms
            .values()
            .fold(0i128, |a, c| a.checked_add(*c).expect("overflow"))
    }

    /// Apply a unimodular exponent transformation (a ring automorphism).
    pub fn map_exponents(&self, m: &IntMat) -> Self {
        assert_eq!(m.rows, self.rank, "matrix size mismatch");
        assert_eq!(m.cols, self.rank, "matrix size mismatch");
        debug_assert_eq!(m.det().abs(), 1, "exponent map must be unimodular");
        let mut out = LaurentPoly::zero(self.rank);
        for (e, c) in &self.terms {
            out.add_term(m.apply(e), *c);
        }
        out
    }

    /// Push into a larger lattice along an injective affine exponent map.
    pub fn embed_exponents<F>(&self, new_rank: usize, f: F) -> Self
    where
        F: Fn(&[i64]) -> LatticeVector,
    {
        let mut out = LaurentPoly::zero(new_rank);
        for (e, c) in &self.terms {
            let img = f(e);
            assert_eq!(img.len(), new_rank);
            assert_eq!(out.coeff(&img), 0, "exponent embedding must be injective");
            out.add_term(img, *c);
        }
        out
    }

    /// Sum of the coefficient magnitudes; handy as a size measure in tests.
    pub fn coeff_norm(&self) -> i128 {
        self.terms.values().map(|c| c.abs()).sum()
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Weyl-type action: transform every exponent by the given matrix.
pub fn weyl_act(m: &IntMat, f: &LaurentPoly) -> LaurentPoly {
    f.map_exponents(m)
}

struct FirstCoordForm {
    to_new: IntMat,
    to_old: IntMat,
    d: i64,
}

/// Unimodular change of exponent coordinates sending `chi` to `d * e_1`,
/// where `d` is the content of `chi`.
fn first_coord_form(chi: &[i64]) -> Result<FirstCoordForm, LaurentError> {
    let d = content(chi);
    if d == 0 {
        return Err(LaurentError::ZeroCharacter);
    }
    let chi0: LatticeVector = chi.iter().map(|&x| x / d).collect();
    let col = IntMat::from_cols(&[chi0.clone()], chi.len());
    let s = lattice::snf(&col);
    // U * chi0 * V = e_1 with V = [±1], so U * chi0 = ±e_1
    let mut u = s.u;
    let img = u.apply(&chi0);
    if img[0] == -1 {
        for j in 0..u.cols {
            u[(0, j)] = -u[(0, j)];
        }
    } else {
        debug_assert_eq!(img[0], 1);
    }
    debug_assert_eq!(u.apply(&chi0), {
        let mut e1 = vec![0; chi.len()];
        e1[0] = 1;
        e1
    });
    let to_old = u.unimodular_inverse().expect("snf U unimodular");
    Ok(FirstCoordForm { to_new: u, to_old, d })
}

/// Residue of `f` modulo the ideal `(1 - e^chi)`: zero exactly when divisible.
///
/// Computed by moving `chi` to `d*e_1` by a unimodular change of coordinates,
/// folding the first exponent into its residue class mod `d` (the image under
/// `e_1^d -> 1`), and mapping back.
pub fn one_minus_exp_residue(f: &LaurentPoly, chi: &[i64]) -> Result<LaurentPoly, LaurentError> {
    if chi.len() != f.rank() {
        return Err(LaurentError::RankMismatch {
            expected: f.rank(),
            got: chi.len(),
        });
    }
    let form = first_coord_form(chi)?;
    let g = f.map_exponents(&form.to_new);
    let mut folded = LaurentPoly::zero(f.rank());
    for (e, c) in &g.terms {
        let mut e2 = e.clone();
        e2[0] = e2[0].rem_euclid(form.d);
        folded.add_term(e2, *c);
    }
    Ok(folded.map_exponents(&form.to_old))
}

pub fn divisible_by_one_minus_exp(f: &LaurentPoly, chi: &[i64]) -> Result<bool, LaurentError> {
    Ok(one_minus_exp_residue(f, chi)?.is_zero())
}

/// Exact quotient `f / (1 - e^chi)`; errors with the nonzero residue witness
/// when the division is not exact.
pub fn divide_by_one_minus_exp(f: &LaurentPoly, chi: &[i64]) -> Result<LaurentPoly, LaurentError> {
    let residue = one_minus_exp_residue(f, chi)?;
    if !residue.is_zero() {
        return Err(LaurentError::NotDivisible {
            character: format!("{chi:?}"),
            residue: Box::new(residue),
        });
    }
    let form = first_coord_form(chi)?;
    let mut rem = f.map_exponents(&form.to_new);
    let mut q = LaurentPoly::zero(f.rank());
    // top-down elimination in the first coordinate: if the remainder has top
    // term c*e with first exponent a, the quotient has term -c*e shifted by d
    while !rem.is_zero() {
        let (e, c) = rem
            .terms
            .iter()
            .max_by_key(|(e, _)| e[0])
            .map(|(e, c)| (e.clone(), *c))
            .expect("nonempty");
        let mut shifted = e.clone();
        shifted[0] -= form.d;
        q.add_term(shifted.clone(), -c);
        rem.add_term(shifted, c);
        rem.add_term(e, -c);
    }
    Ok(q.map_exponents(&form.to_old))
}

/// Exact division in `Z[M]`; `None` when `g` does not divide `f`.
///
/// Both arguments are shifted so every variable has minimum exponent zero;
/// an exact Laurent quotient of such polynomials is again exponent-nonnegative,
/// which makes the lex-descending division loop well founded.
pub fn exact_div(f: &LaurentPoly, g: &LaurentPoly) -> Option<LaurentPoly> {
    assert_eq!(f.rank(), g.rank(), "rank mismatch in exact_div");
    if g.is_zero() {
        return None;
    }
    if f.is_zero() {
        return Some(LaurentPoly::zero(f.rank()));
    }
    let sf = min_exponents(f);
    let sg = min_exponents(g);
    let fs = f.mul_monomial(&lattice::vec_neg(&sf), 1);
    let gs = g.mul_monomial(&lattice::vec_neg(&sg), 1);
    let (lg, lgc) = gs.leading_term().map(|(e, c)| (e.clone(), *c))?;
    let mut rem = fs;
    let mut q = LaurentPoly::zero(f.rank());
    while !rem.is_zero() {
        let (lr, lrc) = rem.leading_term().map(|(e, c)| (e.clone(), *c))?;
        if lrc % lgc != 0 {
            return None;
        }
        let qe = lattice::vec_sub(&lr, &lg);
        if qe.iter().any(|&x| x < 0) {
            return None;
        }
        let qc = lrc / lgc;
        q.add_term(qe.clone(), qc);
        let t = LaurentPoly::monomial(qe, qc);
        rem = rem.sub(&t.mul(&gs));
    }
    // undo the normalization shifts
    Some(q.mul_monomial(&lattice::vec_sub(&sf, &sg), 1))
}

fn min_exponents(f: &LaurentPoly) -> LatticeVector {
    let rank = f.rank();
    let mut mins = vec![0i64; rank];
    let mut first = true;
    for (e, _) in &f.terms {
        if first {
            mins.copy_from_slice(e);
            first = false;
        } else {
            for i in 0..rank {
                mins[i] = mins[i].min(e[i]);
            }
        }
    }
    mins
}

fn last_degree_bounds(f: &LaurentPoly) -> (i64, i64) {
    let n = f.rank() - 1;
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for (e, _) in &f.terms {
        lo = lo.min(e[n]);
        hi = hi.max(e[n]);
    }
    (lo, hi)
}

fn shift_nonneg(f: &LaurentPoly) -> LaurentPoly {
    if f.is_zero() {
        return f.clone();
    }
    f.mul_monomial(&lattice::vec_neg(&min_exponents(f)), 1)
}

/// Coefficient of `x_last^k`, as a polynomial of one lower rank.
fn last_coeff(f: &LaurentPoly, k: i64) -> LaurentPoly {
    let n = f.rank() - 1;
    let mut out = LaurentPoly::zero(n);
    for (e, c) in &f.terms {
        if e[n] == k {
            out.add_term(e[..n].to_vec(), *c);
        }
    }
    out
}

fn raise_rank(f: &LaurentPoly, last: i64) -> LaurentPoly {
    let mut out = LaurentPoly::zero(f.rank() + 1);
    for (e, c) in &f.terms {
        let mut e2 = e.clone();
        e2.push(last);
        out.add_term(e2, *c);
    }
    out
}

/// Content of `f` viewed as a polynomial in the last variable: the gcd of its
/// coefficients in one lower rank.
fn last_content(f: &LaurentPoly) -> LaurentPoly {
    let (lo, hi) = last_degree_bounds(f);
    let mut acc = LaurentPoly::zero(f.rank() - 1);
    for k in lo..=hi {
        let c = last_coeff(f, k);
        if !c.is_zero() {
            acc = gcd(&acc, &c);
        }
    }
    acc
}

/// Canonical unit normalization: shift each variable's minimum exponent to
/// zero and make the lexicographic leading coefficient positive.
pub fn unit_normalize(f: &LaurentPoly) -> LaurentPoly {
    if f.is_zero() {
        return f.clone();
    }
    let g = shift_nonneg(f);
    let (_, c) = g.leading_term().expect("nonzero");
    if *c < 0 {
        g.neg()
    } else {
        g
    }
}

/// Gcd in the unique factorization domain `Z[M]`, well defined up to units
/// (signs and monomials); the result is unit-normalized. Computed by
/// content/primitive-part recursion on the last variable with a primitive
/// pseudo-remainder sequence.
pub fn gcd(f: &LaurentPoly, g: &LaurentPoly) -> LaurentPoly {
    if f.is_zero() {
        return unit_normalize(g);
    }
    if g.is_zero() {
        return unit_normalize(f);
    }
    let rank = f.rank();
    assert_eq!(rank, g.rank(), "rank mismatch in gcd");
    if rank == 0 {
        let a = f.coeff(&[]).abs();
        let b = g.coeff(&[]).abs();
        return LaurentPoly::constant(0, num_integer::gcd(a, b));
    }
    let f = shift_nonneg(f);
    let g = shift_nonneg(g);
    let cf = last_content(&f);
    let cg = last_content(&g);
    let c = gcd(&cf, &cg);
    let pf = divide_by_lower(&f, &cf);
    let pg = divide_by_lower(&g, &cg);
    let (mut a, mut b) = if last_degree_bounds(&pf).1 >= last_degree_bounds(&pg).1 {
        (pf, pg)
    } else {
        (pg, pf)
    };
    while !b.is_zero() {
        let r = pseudo_rem(&a, &b);
        a = b;
        b = if r.is_zero() {
            r
        } else {
            let cr = last_content(&r);
            divide_by_lower(&r, &cr)
        };
    }
    let pa = {
        let ca = last_content(&a);
        divide_by_lower(&a, &ca)
    };
    unit_normalize(&mul_by_lower(&pa, &c))
}

fn mul_by_lower(f: &LaurentPoly, c: &LaurentPoly) -> LaurentPoly {
    f.mul(&raise_rank(c, 0))
}

fn divide_by_lower(f: &LaurentPoly, c: &LaurentPoly) -> LaurentPoly {
    exact_div(f, &raise_rank(c, 0)).expect("content division is exact")
}

/// Pseudo-remainder of `a` by `b` in the last variable (up to leading
/// coefficient factors, which the primitive sequence strips anyway).
fn pseudo_rem(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    let (_, db) = last_degree_bounds(b);
    let lb = last_coeff(b, db);
    let mut r = a.clone();
    loop {
        if r.is_zero() {
            return r;
        }
        let (_, dr) = last_degree_bounds(&r);
        if dr < db {
            return r;
        }
        let lr = last_coeff(&r, dr);
        // r <- lb*r - lr * x^(dr-db) * b; the top coefficient cancels
        let t1 = mul_by_lower(&r, &lb);
        let shift = raise_rank(&lr, dr - db);
        let t2 = shift.mul(b);
        r = t1.sub(&t2);
    }
}

/// Solution of a square linear system as reduced fractions `(num, den)`.
pub fn solve_linear(
    a: &[Vec<LaurentPoly>],
    b: &[LaurentPoly],
) -> Result<Vec<(LaurentPoly, LaurentPoly)>, LaurentError> {
    let (nums, den) = bareiss_solve(a, b)?;
    let mut out = Vec::with_capacity(nums.len());
    for num in nums {
        let g = gcd(&num, &den);
        let (mut n, mut d) = if g.is_zero() {
            (num.clone(), den.clone())
        } else {
            (
                exact_div(&num, &g).expect("gcd divides"),
                exact_div(&den, &g).expect("gcd divides"),
            )
        };
        // absorb the monomial unit so the denominator has minimum exponent
        // zero in every variable, then fix its leading sign
        let shift = lattice::vec_neg(&min_exponents(&d));
        n = n.mul_monomial(&shift, 1);
        d = d.mul_monomial(&shift, 1);
        if let Some((_, c)) = d.leading_term() {
            if *c < 0 {
                n = n.neg();
                d = d.neg();
            }
        }
        out.push((n, d));
    }
    Ok(out)
}

/// Fraction-free Gaussian elimination (Bareiss). Returns Cramer-style
/// numerators and the common denominator `±det(a)`.
pub fn bareiss_solve(
    a: &[Vec<LaurentPoly>],
    b: &[LaurentPoly],
) -> Result<(Vec<LaurentPoly>, LaurentPoly), LaurentError> {
    let n = a.len();
    assert_eq!(b.len(), n, "rhs length mismatch");
    if n == 0 {
        return Ok((Vec::new(), LaurentPoly::one(0)));
    }
    let rank = b[0].rank();
    let w = n + 1;
    let mut m: Vec<Vec<LaurentPoly>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), n, "matrix must be square");
            let mut r: Vec<LaurentPoly> = row.to_vec();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut prev = LaurentPoly::one(rank);
    for k in 0..n {
        let pivot_row = (k..n)
            .filter(|&i| !m[i][k].is_zero())
            .min_by_key(|&i| (m[i][k].num_terms(), i))
            .ok_or(LaurentError::Singular)?;
        m.swap(k, pivot_row);
        for i in k + 1..n {
            for j in k + 1..w {
                let t = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = exact_div(&t, &prev).expect("bareiss division is exact");
            }
            m[i][k] = LaurentPoly::zero(rank);
        }
        prev = m[k][k].clone();
    }
    let den = m[n - 1][n - 1].clone();
    if den.is_zero() {
        return Err(LaurentError::Singular);
    }
    // back substitution with the common denominator den: x_i = y_i / den
    let mut y = vec![LaurentPoly::zero(rank); n];
    for i in (0..n).rev() {
        let mut acc = m[i][w - 1].mul(&den);
        for j in i + 1..n {
            acc = acc.sub(&m[i][j].mul(&y[j]));
        }
        y[i] = exact_div(&acc, &m[i][i]).expect("cramer back substitution is exact");
    }
    Ok((y, den))
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if *c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.unsigned_abs();
            write!(f, "{mag}*e[(")?;
            for (i, x) in e.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")]")?;
        }
        Ok(())
    }
}

impl FromStr for LaurentPoly {
    type Err = LaurentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_laurent(s)
    }
}

fn parse_laurent(s: &str) -> Result<LaurentPoly, LaurentError> {
    let err = |msg: &str| LaurentError::Parse(format!("{msg} in {s:?}"));
    let t = s.trim();
    if t == "0" {
        // rank is unknown for a bare zero; default to rank 0
        return Ok(LaurentPoly::zero(0));
    }
    let mut terms: Vec<(LatticeVector, Coeff)> = Vec::new();
    let mut rest = t;
    let mut sign: i128 = 1;
    // leading sign
    if let Some(r) = rest.strip_prefix('-') {
        sign = -1;
        rest = r.trim_start();
    } else if let Some(r) = rest.strip_prefix('+') {
        rest = r.trim_start();
    }
    loop {
        let star = rest.find('*').ok_or_else(|| err("expected '*'"))?;
        let coeff: i128 = rest[..star]
            .trim()
            .parse()
            .map_err(|_| err("bad coefficient"))?;
        rest = &rest[star + 1..];
        let rest2 = rest
            .trim_start()
            .strip_prefix("e[(")
            .ok_or_else(|| err("expected 'e[('"))?;
        let close = rest2.find(")]").ok_or_else(|| err("expected ')]'"))?;
        let inner = &rest2[..close];
        let exp: LatticeVector = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|p| p.trim().parse().map_err(|_| err("bad exponent")))
                .collect::<Result<_, _>>()?
        };
        terms.push((exp, sign * coeff));
        rest = rest2[close + 2..].trim_start();
        if rest.is_empty() {
            break;
        }
        if let Some(r) = rest.strip_prefix('+') {
            sign = 1;
            rest = r.trim_start();
        } else if let Some(r) = rest.strip_prefix('-') {
            sign = -1;
            rest = r.trim_start();
        } else {
            return Err(err("expected '+' or '-'"));
        }
    }
    let rank = terms[0].0.len();
    let mut out = LaurentPoly::zero(rank);
    for (e, c) in terms {
        if e.len() != rank {
            return Err(err("inconsistent exponent lengths"));
        }
        out.add_term(e, c);
    }
    Ok(out)
}
