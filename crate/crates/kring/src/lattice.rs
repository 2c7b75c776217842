//! Integer lattice arithmetic: matrices, Smith normal form, quotients.
//!
//! Vectors are dense `Vec<i64>` coordinates. Character lattice vectors and
//! cocharacter lattice vectors share the representation; the pairing between
//! them is the coordinate dot product.

use num_rational::Ratio;
use thiserror::Error;

pub type Coord = i64;
pub type LatticeVector = Vec<Coord>;
pub type Rat = Ratio<i128>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not unimodular (determinant {det})")]
    NotUnimodular { det: i64 },
    #[error("zero vector has no primitive form")]
    ZeroVector,
    #[error("vector is not in the span")]
    NotInSpan,
}

/// Dot-product pairing of a character vector with a cocharacter vector.
pub fn pairing(chi: &[Coord], lambda: &[Coord]) -> Result<i64, LatticeError> {
    if chi.len() != lambda.len() {
        return Err(LatticeError::RankMismatch {
            expected: chi.len(),
            got: lambda.len(),
        });
    }
    let mut acc: i64 = 0;
    for (a, b) in chi.iter().zip(lambda) {
        acc = acc
            .checked_add(a.checked_mul(*b).expect("pairing overflow"))
            .expect("pairing overflow");
    }
    Ok(acc)
}

pub fn rational_pairing(chi: &[Rat], lambda: &[Coord]) -> Rat {
    let mut acc = Rat::from_integer(0);
    for (a, b) in chi.iter().zip(lambda) {
        acc += *a * Rat::from_integer(*b as i128);
    }
    acc
}

/// Divide a nonzero vector by the gcd of its entries, keeping direction.
pub fn primitivize(v: &[Coord]) -> Result<LatticeVector, LatticeError> {
    let mut g: i64 = 0;
    for &x in v {
        g = num_integer::gcd(g, x);
    }
    if g == 0 {
        return Err(LatticeError::ZeroVector);
    }
    Ok(v.iter().map(|&x| x / g).collect())
}

pub fn content(v: &[Coord]) -> i64 {
    let mut g: i64 = 0;
    for &x in v {
        g = num_integer::gcd(g, x);
    }
    g
}

pub fn vec_add(a: &[Coord], b: &[Coord]) -> LatticeVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Coord], b: &[Coord]) -> LatticeVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_neg(a: &[Coord]) -> LatticeVector {
    a.iter().map(|x| -x).collect()
}

pub fn vec_scale(a: &[Coord], k: Coord) -> LatticeVector {
    a.iter().map(|x| x * k).collect()
}

pub fn is_zero_vec(a: &[Coord]) -> bool {
    a.iter().all(|&x| x == 0)
}

/// Row-major dense integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i64>,
}

impl IntMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        IntMat { rows: r, cols: c, data }
    }

    /// Columns are the given vectors.
    pub fn from_cols(cols: &[Vec<i64>], ambient: usize) -> Self {
        let c = cols.len();
        let mut m = IntMat::zero(ambient, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), ambient, "column length mismatch");
            for i in 0..ambient {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn row(&self, i: usize) -> Vec<i64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = IntMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = IntMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)]
                        .checked_add(a.checked_mul(other[(k, j)]).expect("matrix product overflow"))
                        .expect("matrix product overflow");
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Coord]) -> LatticeVector {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix apply");
        (0..self.rows)
            .map(|i| {
                let mut acc: i64 = 0;
                for j in 0..self.cols {
                    acc = acc
                        .checked_add(self[(i, j)].checked_mul(v[j]).expect("apply overflow"))
                        .expect("apply overflow");
                }
                acc
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == IntMat::identity(self.rows)
    }

    /// Exact determinant by fraction-free elimination.
    pub fn det(&self) -> i64 {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut a: Vec<Vec<i128>> = (0..n)
            .map(|i| (0..n).map(|j| self[(i, j)] as i128).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                    return 0;
                };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[k][k]
                        .checked_mul(a[i][j])
                        .and_then(|x| a[i][k].checked_mul(a[k][j]).map(|y| x - y))
                        .expect("determinant overflow");
                    a[i][j] = num / prev;
                }
                a[i][k] = 0;
            }
            prev = a[k][k];
        }
        let d = sign * a[n - 1][n - 1];
        i64::try_from(d).expect("determinant exceeds i64")
    }

    pub fn rank(&self) -> usize {
        rational_rank(self)
    }

    /// Inverse of a unimodular matrix, still integral.
    pub fn unimodular_inverse(&self) -> Result<IntMat, LatticeError> {
        let d = self.det();
        if d != 1 && d != -1 {
            return Err(LatticeError::NotUnimodular { det: d });
        }
        let n = self.rows;
        let mut adj = IntMat::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                let minor = self.minor(j, i).det();
                let s = if (i + j) % 2 == 0 { 1 } else { -1 };
                adj[(i, j)] = s * minor * d; // divide by det = multiply by det when det = ±1
            }
        }
        Ok(adj)
    }

    pub fn inverse_transpose(&self) -> Result<IntMat, LatticeError> {
        Ok(self.unimodular_inverse()?.transpose())
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> IntMat {
        let n = self.rows;
        let mut m = IntMat::zero(n - 1, n - 1);
        let mut ii = 0;
        for i in 0..n {
            if i == skip_row {
                continue;
            }
            let mut jj = 0;
            for j in 0..n {
                if j == skip_col {
                    continue;
                }
                m[(ii, jj)] = self[(i, j)];
                jj += 1;
            }
            ii += 1;
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for IntMat {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn rational_rank(m: &IntMat) -> usize {
    let mut a: Vec<Vec<Rat>> = (0..m.rows)
        .map(|i| (0..m.cols).map(|j| Rat::from_integer(m[(i, j)] as i128)).collect())
        .collect();
    let mut rank = 0;
    for col in 0..m.cols {
        let Some(p) = (rank..m.rows).find(|&i| a[i][col] != Rat::from_integer(0)) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank][col];
        for i in 0..m.rows {
            if i != rank && a[i][col] != Rat::from_integer(0) {
                let f = a[i][col] / pivot;
                for j in col..m.cols {
                    let s = a[rank][j];
                    a[i][j] = a[i][j] - f * s;
                }
            }
        }
        rank += 1;
        if rank == m.rows {
            break;
        }
    }
    rank
}

/// Solve `A x = b` over the rationals. Returns `None` when inconsistent;
/// free variables are set to zero.
pub fn rational_solve(a: &IntMat, b: &[Coord]) -> Option<Vec<Rat>> {
    assert_eq!(a.rows, b.len());
    let rows = a.rows;
    let cols = a.cols;
    let zero = Rat::from_integer(0);
    let mut m: Vec<Vec<Rat>> = (0..rows)
        .map(|i| {
            let mut row: Vec<Rat> = (0..cols)
                .map(|j| Rat::from_integer(a[(i, j)] as i128))
                .collect();
            row.push(Rat::from_integer(b[i] as i128));
            row
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| m[i][c] != zero) else {
            continue;
        };
        m.swap(r, p);
        let pv = m[r][c];
        for j in c..=cols {
            m[r][j] /= pv;
        }
        for i in 0..rows {
            if i != r && m[i][c] != zero {
                let f = m[i][c];
                for j in c..=cols {
                    let s = m[r][j];
                    m[i][j] = m[i][j] - f * s;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    for i in r..rows {
        if m[i][cols] != zero {
            return None;
        }
    }
    let mut x = vec![zero; cols];
    for (row, &c) in pivot_cols.iter().enumerate() {
        x[c] = m[row][cols];
    }
    Some(x)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    pub u: IntMat,
    pub d: IntMat,
    pub v: IntMat,
}

impl SnfResult {
    /// Nonzero diagonal entries, in divisibility order.
    pub fn invariant_factors(&self) -> Vec<i64> {
        let n = self.d.rows.min(self.d.cols);
        (0..n).map(|i| self.d[(i, i)]).filter(|&x| x != 0).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

/// Smith normal form: returns unimodular `U`, `V` and diagonal `D` with
/// `U * A * V = D` and each diagonal entry dividing the next.
///
/// Elementary row/column reduction with smallest-nonzero-entry pivoting.
pub fn snf(a: &IntMat) -> SnfResult {
    let rows = a.rows;
    let cols = a.cols;
    let mut d: Vec<Vec<i128>> = (0..rows)
        .map(|i| (0..cols).map(|j| a[(i, j)] as i128).collect())
        .collect();
    let mut u: Vec<Vec<i128>> = (0..rows)
        .map(|i| (0..rows).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut v: Vec<Vec<i128>> = (0..cols)
        .map(|i| (0..cols).map(|j| i128::from(i == j)).collect())
        .collect();

    let n = rows.min(cols);
    for t in 0..n {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if d[i][j] != 0
                        && best.map_or(true, |(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish_snf(d, u, v, rows, cols);
            };
            if pi != t {
                d.swap(t, pi);
                u.swap(t, pi);
            }
            if pj != t {
                for row in d.iter_mut() {
                    row.swap(t, pj);
                }
                v.swap(t, pj); // v stored row-wise as V^T action; see note below
            }
            let mut dirty = false;
            for i in t + 1..rows {
                let q = d[i][t].div_euclid(d[t][t]);
                if q != 0 {
                    for j in 0..cols {
                        d[i][j] -= q * d[t][j];
                    }
                    for j in 0..rows {
                        u[i][j] -= q * u[t][j];
                    }
                }
                if d[i][t] != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                let q = d[t][j].div_euclid(d[t][t]);
                if q != 0 {
                    for row in d.iter_mut() {
                        let s = row[t];
                        row[j] -= q * s;
                    }
                    for k in 0..cols {
                        v[j][k] -= q * v[t][k];
                    }
                }
                if d[t][j] != 0 {
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
    }
    finish_snf(d, u, v, rows, cols)
}

fn finish_snf(
    mut d: Vec<Vec<i128>>,
    mut u: Vec<Vec<i128>>,
    mut v: Vec<Vec<i128>>,
    rows: usize,
    cols: usize,
) -> SnfResult {
    let n = rows.min(cols);
    // sign normalization
    for t in 0..n {
        if d[t][t] < 0 {
            for j in 0..cols {
                d[t][j] = -d[t][j];
            }
            for j in 0..rows {
                u[t][j] = -u[t][j];
            }
        }
    }
    // enforce the divisibility chain pairwise
    loop {
        let mut fixed = true;
        for t in 0..n.saturating_sub(1) {
            let (a, b) = (d[t][t], d[t + 1][t + 1]);
            if a != 0 && b != 0 && b % a != 0 {
                fixed = false;
                // column t += column t+1, then a Euclidean row/column dance on the 2x2 block
                for row in d.iter_mut() {
                    let s = row[t + 1];
                    row[t] += s;
                }
                for k in 0..cols {
                    let s = v[t + 1][k];
                    v[t][k] += s;
                }
                // now d has [[a,0],[b,b]] in the block; reduce to diag(gcd, lcm)
                loop {
                    if d[t + 1][t] != 0 {
                        let q = d[t][t].div_euclid(d[t + 1][t]);
                        if q != 0 {
                            for j in 0..cols {
                                d[t][j] -= q * d[t + 1][j];
                            }
                            for j in 0..rows {
                                u[t][j] -= q * u[t + 1][j];
                            }
                        }
                        if d[t][t] == 0 {
                            d.swap(t, t + 1);
                            u.swap(t, t + 1);
                        }
                    }
                    if d[t + 1][t] == 0 {
                        break;
                    }
                    let q = d[t + 1][t].div_euclid(d[t][t]);
                    for j in 0..cols {
                        d[t + 1][j] -= q * d[t][j];
                    }
                    for j in 0..rows {
                        u[t + 1][j] -= q * u[t][j];
                    }
                    if d[t + 1][t] == 0 {
                        break;
                    }
                }
                // clear the off-diagonal entry in row t
                if d[t][t + 1] != 0 {
                    let q = d[t][t + 1].div_euclid(d[t][t]);
                    for row in d.iter_mut() {
                        let s = row[t];
                        row[t + 1] -= q * s;
                    }
                    for k in 0..cols {
                        let s = v[t][k];
                        v[t + 1][k] -= q * s;
                    }
                    debug_assert_eq!(d[t][t + 1], 0);
                }
                if d[t + 1][t + 1] != 0 {
                    debug_assert_eq!(d[t + 1][t + 1].abs() % d[t][t].abs(), 0);
                }
                for tt in [t, t + 1] {
                    if d[tt][tt] < 0 {
                        for j in 0..cols {
                            d[tt][j] = -d[tt][j];
                        }
                        for j in 0..rows {
                            u[tt][j] = -u[tt][j];
                        }
                    }
                }
            }
        }
        if fixed {
            break;
        }
    }
    // move zero diagonal entries to the end
    loop {
        let mut moved = false;
        for t in 0..n.saturating_sub(1) {
            if d[t][t] == 0 && d[t + 1][t + 1] != 0 {
                d.swap(t, t + 1);
                u.swap(t, t + 1);
                for row in d.iter_mut() {
                    row.swap(t, t + 1);
                }
                v.swap(t, t + 1);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    let to_mat = |m: Vec<Vec<i128>>, r: usize, c: usize| {
        let mut out = IntMat::zero(r, c);
        for i in 0..r {
            for j in 0..c {
                out[(i, j)] = i64::try_from(m[i][j]).expect("snf entry exceeds i64");
            }
        }
        out
    };
    // v rows accumulated column operations transposed; V = v^T
    let v_mat = to_mat(v, cols, cols).transpose();
    SnfResult {
        u: to_mat(u, rows, rows),
        d: to_mat(d, rows, cols),
        v: v_mat,
    }
}

/// Basis of the integer kernel `{x : A x = 0}`; always a saturated sublattice.
pub fn integer_kernel(a: &IntMat) -> Vec<LatticeVector> {
    let s = snf(a);
    let r = s.rank();
    (r..a.cols).map(|j| s.v.col(j)).collect()
}

/// Basis of the saturation `span_Q(columns) ∩ Z^n`.
pub fn saturation_basis(generators: &[LatticeVector], ambient: usize) -> Vec<LatticeVector> {
    if generators.is_empty() {
        return Vec::new();
    }
    let b = IntMat::from_cols(generators, ambient);
    let s = snf(&b);
    let r = s.rank();
    let u_inv = s.u.unimodular_inverse().expect("snf U is unimodular");
    (0..r).map(|j| u_inv.col(j)).collect()
}

/// Coordinates of `x` in the given basis, required integral.
pub fn integral_coords_in_basis(
    basis: &[LatticeVector],
    x: &[Coord],
) -> Result<LatticeVector, LatticeError> {
    let a = IntMat::from_cols(basis, x.len());
    let sol = rational_solve(&a, x).ok_or(LatticeError::NotInSpan)?;
    let mut out = Vec::with_capacity(sol.len());
    for c in sol {
        if !c.is_integer() {
            return Err(LatticeError::NotInSpan);
        }
        out.push(i64::try_from(c.to_integer()).expect("coordinate exceeds i64"));
    }
    Ok(out)
}

/// The quotient of `Z^n` by the sublattice spanned by the given generators.
#[derive(Clone, Debug)]
pub struct QuotientLattice {
    pub ambient_rank: usize,
    /// Invariant factors > 1 of the torsion part.
    pub torsion: Vec<i64>,
    pub free_rank: usize,
    u: IntMat,
    /// Row indices of `u` giving torsion coordinates (paired with `torsion`).
    torsion_rows: Vec<usize>,
    free_rows: Vec<usize>,
}

/// Image of a lattice point in a quotient lattice: torsion coordinates are
/// reduced representatives, free coordinates are plain integers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuotientPoint {
    pub torsion: Vec<i64>,
    pub free: Vec<i64>,
}

pub fn quotient_lattice(ambient_rank: usize, generators: &[LatticeVector]) -> QuotientLattice {
    for g in generators {
        assert_eq!(g.len(), ambient_rank, "generator rank mismatch");
    }
    if generators.is_empty() {
        return QuotientLattice {
            ambient_rank,
            torsion: Vec::new(),
            free_rank: ambient_rank,
            u: IntMat::identity(ambient_rank),
            torsion_rows: Vec::new(),
            free_rows: (0..ambient_rank).collect(),
        };
    }
    let b = IntMat::from_cols(generators, ambient_rank);
    let s = snf(&b);
    let factors: Vec<i64> = (0..ambient_rank.min(b.cols))
        .map(|i| s.d[(i, i)])
        .collect();
    let mut torsion = Vec::new();
    let mut torsion_rows = Vec::new();
    let mut free_rows = Vec::new();
    for i in 0..ambient_rank {
        let f = factors.get(i).copied().unwrap_or(0);
        if f == 0 {
            free_rows.push(i);
        } else if f > 1 {
            torsion.push(f);
            torsion_rows.push(i);
        }
    }
    QuotientLattice {
        ambient_rank,
        torsion,
        free_rank: free_rows.len(),
        u: s.u,
        torsion_rows,
        free_rows,
    }
}

impl QuotientLattice {
    pub fn project(&self, x: &[Coord]) -> QuotientPoint {
        assert_eq!(x.len(), self.ambient_rank, "rank mismatch in projection");
        let y = self.u.apply(x);
        let torsion = self
            .torsion_rows
            .iter()
            .zip(&self.torsion)
            .map(|(&i, &d)| y[i].rem_euclid(d))
            .collect();
        let free = self.free_rows.iter().map(|&i| y[i]).collect();
        QuotientPoint { torsion, free }
    }

    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 0
    }
}
