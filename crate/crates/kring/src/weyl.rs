//! Root data and Weyl groups in fundamental-weight coordinates.
//!
//! The cocharacter lattice has the simple coroots followed by a central block
//! as its basis; dually the character lattice is spanned by the fundamental
//! weights and the central duals, so the pairing is the plain dot product.
//! Group elements are stored as exponent matrices on both lattices together
//! with a shortest word, generated breadth-first in (length, word) order.

use crate::fan::{Cone, Fan, FanError};
use crate::lattice::{self, IntMat, LatticeVector, Rat};
use crate::laurent::{self, LaurentError, LaurentPoly};
use num_traits::Signed;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeylError {
    #[error("cartan matrix must be square")]
    NotSquare,
    #[error("cartan diagonal entry at {0} is not 2")]
    BadDiagonal(usize),
    #[error("cartan off-diagonal entry ({0},{1}) is positive")]
    PositiveOffDiagonal(usize, usize),
    #[error("cartan entries ({0},{1}) and ({1},{0}) disagree about vanishing")]
    AsymmetricZero(usize, usize),
    #[error("cartan matrix is not symmetrizable")]
    NotSymmetrizable,
    #[error("cartan matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("unknown root system type {0:?}")]
    UnknownType(String),
    #[error("weyl group exceeds the element bound")]
    GroupTooLarge,
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("steinberg basis matrix is singular in every convention")]
    SteinbergSingular,
    #[error("steinberg coefficient is not a polynomial class")]
    NonPolynomialCoefficient,
    #[error("steinberg coefficient is not invariant")]
    NonInvariantCoefficient,
    #[error("steinberg decomposition does not reconstruct its input")]
    ReconstructionFailure,
    #[error("product support violates the coset stratification")]
    SupportViolation,
    #[error("fan is not contained in the dominant chamber")]
    NotInChamber,
    #[error("operation requires trivial central rank")]
    NontrivialCenter,
    #[error("chamber translates collide; fan is not interior to the chamber")]
    OrbitCollision,
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

/// A root datum: Cartan matrix of the semisimple part plus a central block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootDatum {
    pub cartan: IntMat,
    pub central_rank: usize,
    /// Positive integers `d_i` with `d_i c_ij` symmetric.
    pub symmetrizer: Vec<i64>,
}

impl RootDatum {
    pub fn new(cartan: IntMat, central_rank: usize) -> Result<Self, WeylError> {
        if cartan.rows != cartan.cols {
            return Err(WeylError::NotSquare);
        }
        let l = cartan.rows;
        for i in 0..l {
            if cartan[(i, i)] != 2 {
                return Err(WeylError::BadDiagonal(i));
            }
            for j in 0..l {
                if i != j {
                    if cartan[(i, j)] > 0 {
                        return Err(WeylError::PositiveOffDiagonal(i, j));
                    }
                    if (cartan[(i, j)] == 0) != (cartan[(j, i)] == 0) {
                        return Err(WeylError::AsymmetricZero(i, j));
                    }
                }
            }
        }
        let symmetrizer = symmetrize_cartan(&cartan)?;
        // Sylvester: all leading principal minors of the symmetrized matrix
        // must be positive
        let mut b = IntMat::zero(l, l);
        for i in 0..l {
            for j in 0..l {
                b[(i, j)] = symmetrizer[i] * cartan[(i, j)];
            }
        }
        for k in 1..=l {
            let mut minor = IntMat::zero(k, k);
            for i in 0..k {
                for j in 0..k {
                    minor[(i, j)] = b[(i, j)];
                }
            }
            if minor.det() <= 0 {
                return Err(WeylError::NotPositiveDefinite);
            }
        }
        Ok(RootDatum {
            cartan,
            central_rank,
            symmetrizer,
        })
    }

    /// Standard small types by name; accepts `A1xA1` with either `x` or a
    /// multiplication sign.
    pub fn named(name: &str, central_rank: usize) -> Result<Self, WeylError> {
        let norm = name.trim().replace('\u{00d7}', "x").to_uppercase();
        let rows: Vec<Vec<i64>> = match norm.as_str() {
            "A1" => vec![vec![2]],
            "A1XA1" => vec![vec![2, 0], vec![0, 2]],
            "A2" => vec![vec![2, -1], vec![-1, 2]],
            "B2" | "C2" => vec![vec![2, -1], vec![-2, 2]],
            "G2" => vec![vec![2, -1], vec![-3, 2]],
            _ => return Err(WeylError::UnknownType(name.to_string())),
        };
        RootDatum::new(IntMat::from_rows(&rows), central_rank)
    }

    pub fn semisimple_rank(&self) -> usize {
        self.cartan.rows
    }

    pub fn rank(&self) -> usize {
        self.cartan.rows + self.central_rank
    }

    /// Simple root `alpha_i` in character coordinates: the `i`-th Cartan row
    /// padded with central zeros.
    pub fn simple_root(&self, i: usize) -> LatticeVector {
        let l = self.semisimple_rank();
        let mut v = vec![0; self.rank()];
        for j in 0..l {
            v[j] = self.cartan[(i, j)];
        }
        v
    }

    /// Simple coroot `alpha_i^vee` in cocharacter coordinates: `e_i`.
    pub fn simple_coroot(&self, i: usize) -> LatticeVector {
        let mut v = vec![0; self.rank()];
        v[i] = 1;
        v
    }

    pub fn fundamental_weight(&self, i: usize) -> LatticeVector {
        let mut v = vec![0; self.rank()];
        v[i] = 1;
        v
    }

    /// Reflection `s_i` on the character lattice; only column `i` differs
    /// from the identity.
    pub fn simple_reflection_m(&self, i: usize) -> IntMat {
        let n = self.rank();
        let l = self.semisimple_rank();
        let mut m = IntMat::identity(n);
        for j in 0..l {
            m[(j, i)] = i64::from(j == i) - self.cartan[(i, j)];
        }
        m
    }

    /// Reflection `s_i` on the cocharacter lattice (inverse transpose).
    pub fn simple_reflection_n(&self, i: usize) -> IntMat {
        self.simple_reflection_m(i)
            .inverse_transpose()
            .expect("reflections are unimodular")
    }

    pub fn is_dominant_coweight(&self, nu: &[i64]) -> bool {
        (0..self.semisimple_rank())
            .all(|i| lattice::pairing(&self.simple_root(i), nu).expect("rank") >= 0)
    }

    pub fn is_antidominant_coweight(&self, nu: &[i64]) -> bool {
        (0..self.semisimple_rank())
            .all(|i| lattice::pairing(&self.simple_root(i), nu).expect("rank") <= 0)
    }
}

fn symmetrize_cartan(cartan: &IntMat) -> Result<Vec<i64>, WeylError> {
    let l = cartan.rows;
    let mut d: Vec<Option<Rat>> = vec![None; l];
    for start in 0..l {
        if d[start].is_some() {
            continue;
        }
        // propagate along nonzero off-diagonal entries within the component
        let mut component = vec![start];
        d[start] = Some(Rat::from_integer(1));
        let mut head = 0;
        while head < component.len() {
            let i = component[head];
            head += 1;
            for j in 0..l {
                if i == j || cartan[(i, j)] == 0 {
                    continue;
                }
                let dj = d[i].expect("visited") * Rat::new(cartan[(i, j)] as i128, cartan[(j, i)] as i128);
                if dj <= Rat::from_integer(0) {
                    return Err(WeylError::NotSymmetrizable);
                }
                match d[j] {
                    None => {
                        d[j] = Some(dj);
                        component.push(j);
                    }
                    Some(existing) => {
                        if existing != dj {
                            return Err(WeylError::NotSymmetrizable);
                        }
                    }
                }
            }
        }
        // clear denominators within the component
        let mut lcm: i128 = 1;
        for &i in &component {
            lcm = num_integer::lcm(lcm, *d[i].expect("visited").denom());
        }
        for &i in &component {
            let v = d[i].expect("visited") * Rat::from_integer(lcm);
            d[i] = Some(v);
        }
    }
    let mut out = Vec::with_capacity(l);
    for v in d {
        let v = v.expect("all visited");
        debug_assert!(v.is_integer() && v.is_positive());
        out.push(i64::try_from(v.to_integer()).expect("symmetrizer fits i64"));
    }
    // final consistency check
    for i in 0..l {
        for j in 0..l {
            if out[i] * cartan[(i, j)] != out[j] * cartan[(j, i)] {
                return Err(WeylError::NotSymmetrizable);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct WeylElement {
    /// A shortest word in the simple reflections; its length is the Coxeter
    /// length.
    pub word: Vec<usize>,
    /// Action on characters.
    pub mat_m: IntMat,
    /// Action on cocharacters.
    pub mat_n: IntMat,
}

/// A root together with its coroot and sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Root {
    pub root: LatticeVector,
    pub coroot: LatticeVector,
    pub positive: bool,
}

pub struct WeylGroup {
    pub datum: RootDatum,
    pub elements: Vec<WeylElement>,
    /// All roots, positive first, each sign class sorted by root vector.
    pub roots: Vec<Root>,
    index: HashMap<Vec<i64>, usize>,
    right_by_gen: Vec<Vec<usize>>,
    left_by_gen: Vec<Vec<usize>>,
    inverses: Vec<usize>,
    /// Element index of the reflection attached to each positive root.
    reflection_elements: Vec<usize>,
    /// Inverse map: element index to positive-root index.
    reflection_roots: HashMap<usize, usize>,
}

const GROUP_BOUND: usize = 10_000;

pub fn weyl_group(datum: RootDatum) -> Result<WeylGroup, WeylError> {
    let l = datum.semisimple_rank();
    let n = datum.rank();
    let gens_m: Vec<IntMat> = (0..l).map(|i| datum.simple_reflection_m(i)).collect();
    let gens_n: Vec<IntMat> = (0..l).map(|i| datum.simple_reflection_n(i)).collect();
    let mut elements = vec![WeylElement {
        word: Vec::new(),
        mat_m: IntMat::identity(n),
        mat_n: IntMat::identity(n),
    }];
    let mut index = HashMap::new();
    index.insert(elements[0].mat_m.data.clone(), 0usize);
    let mut head = 0;
    while head < elements.len() {
        for i in 0..l {
            let mat_m = elements[head].mat_m.mul(&gens_m[i]);
            if index.contains_key(&mat_m.data) {
                continue;
            }
            let mat_n = elements[head].mat_n.mul(&gens_n[i]);
            let mut word = elements[head].word.clone();
            word.push(i);
            index.insert(mat_m.data.clone(), elements.len());
            elements.push(WeylElement { word, mat_m, mat_n });
            if elements.len() > GROUP_BOUND {
                return Err(WeylError::GroupTooLarge);
            }
        }
        head += 1;
    }
    let right_by_gen: Vec<Vec<usize>> = elements
        .iter()
        .map(|w| {
            (0..l)
                .map(|i| index[&w.mat_m.mul(&gens_m[i]).data])
                .collect()
        })
        .collect();
    let left_by_gen: Vec<Vec<usize>> = elements
        .iter()
        .map(|w| {
            (0..l)
                .map(|i| index[&gens_m[i].mul(&w.mat_m).data])
                .collect()
        })
        .collect();
    let inverses: Vec<usize> = elements
        .iter()
        .map(|w| {
            index[&w
                .mat_m
                .unimodular_inverse()
                .expect("group elements are unimodular")
                .data]
        })
        .collect();

    // roots: the orbit of the simple (root, coroot) pairs
    let mut roots: Vec<Root> = Vec::new();
    let mut seen: BTreeSet<LatticeVector> = BTreeSet::new();
    let mut queue: Vec<(LatticeVector, LatticeVector)> = (0..l)
        .map(|i| (datum.simple_root(i), datum.simple_coroot(i)))
        .collect();
    let mut qhead = 0;
    while qhead < queue.len() {
        let (r, c) = queue[qhead].clone();
        qhead += 1;
        if !seen.insert(r.clone()) {
            continue;
        }
        assert_eq!(
            lattice::pairing(&r, &c).expect("rank"),
            2,
            "root pairs with its coroot to 2"
        );
        let positive = root_is_positive(&datum, &r);
        roots.push(Root {
            root: r.clone(),
            coroot: c.clone(),
            positive,
        });
        for i in 0..l {
            queue.push((gens_m[i].apply(&r), gens_n[i].apply(&c)));
        }
    }
    roots.sort_by_key(|r| (!r.positive, r.root.clone()));

    let mut reflection_elements = Vec::new();
    let mut reflection_roots = HashMap::new();
    for (ri, root) in roots.iter().enumerate().filter(|(_, r)| r.positive) {
        // s_alpha on characters: chi -> chi - <chi, alpha^vee> alpha
        let mut m = IntMat::identity(n);
        for j in 0..n {
            for k in 0..n {
                m[(j, k)] -= root.root[j] * root.coroot[k];
            }
        }
        let ei = *index
            .get(&m.data)
            .expect("reflection along a root lies in the group");
        reflection_elements.push(ei);
        reflection_roots.insert(ei, ri);
    }

    Ok(WeylGroup {
        datum,
        elements,
        roots,
        index,
        right_by_gen,
        left_by_gen,
        inverses,
        reflection_elements,
        reflection_roots,
    })
}

fn root_is_positive(datum: &RootDatum, root: &[i64]) -> bool {
    let l = datum.semisimple_rank();
    for j in l..datum.rank() {
        assert_eq!(root[j], 0, "roots have no central component");
    }
    // coefficients k with C^T k = root: all nonnegative means positive
    let ct = datum.cartan.transpose();
    let rhs: Vec<i64> = root[..l].to_vec();
    let k = lattice::rational_solve(&ct, &rhs).expect("roots lie in the root lattice span");
    let zero = Rat::from_integer(0);
    let nonneg = k.iter().all(|&x| x >= zero);
    let nonpos = k.iter().all(|&x| x <= zero);
    assert!(
        nonneg || nonpos,
        "root coefficients must have a uniform sign"
    );
    nonneg
}

impl WeylGroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn simple(&self, i: usize) -> usize {
        self.right_by_gen[0][i]
    }

    pub fn length(&self, w: usize) -> usize {
        self.elements[w].word.len()
    }

    pub fn mult(&self, a: usize, b: usize) -> usize {
        self.index[&self.elements[a].mat_m.mul(&self.elements[b].mat_m).data]
    }

    pub fn inverse(&self, w: usize) -> usize {
        self.inverses[w]
    }

    pub fn mult_simple_right(&self, w: usize, i: usize) -> usize {
        self.right_by_gen[w][i]
    }

    pub fn mult_simple_left(&self, w: usize, i: usize) -> usize {
        self.left_by_gen[w][i]
    }

    pub fn act_m(&self, w: usize, chi: &[i64]) -> LatticeVector {
        self.elements[w].mat_m.apply(chi)
    }

    pub fn act_n(&self, w: usize, nu: &[i64]) -> LatticeVector {
        self.elements[w].mat_n.apply(nu)
    }

    pub fn act_poly(&self, w: usize, f: &LaurentPoly) -> LaurentPoly {
        laurent::weyl_act(&self.elements[w].mat_m, f)
    }

    pub fn find_by_matrix_m(&self, m: &IntMat) -> Option<usize> {
        self.index.get(&m.data).copied()
    }

    pub fn longest_element(&self) -> usize {
        let max_len = (0..self.len()).map(|w| self.length(w)).max().expect("nonempty");
        let longest: Vec<usize> = (0..self.len())
            .filter(|&w| self.length(w) == max_len)
            .collect();
        assert_eq!(longest.len(), 1, "longest element is unique");
        longest[0]
    }

    pub fn positive_roots(&self) -> Vec<&Root> {
        self.roots.iter().filter(|r| r.positive).collect()
    }

    pub fn find_root(&self, root_vec: &[i64]) -> Option<usize> {
        self.roots.iter().position(|r| r.root == root_vec)
    }

    /// Element acting as the reflection along the `ri`-th positive root.
    pub fn reflection_element(&self, positive_root_index: usize) -> usize {
        self.reflection_elements[positive_root_index]
    }

    /// Positive-root index when `w` is a reflection.
    pub fn root_of_reflection(&self, w: usize) -> Option<usize> {
        self.reflection_roots.get(&w).copied()
    }

    /// Does `w` send the `i`-th simple root to a positive root?
    pub fn sends_simple_to_positive(&self, w: usize, i: usize) -> bool {
        let img = self.act_m(w, &self.datum.simple_root(i));
        let ri = self.find_root(&img).expect("root images are roots");
        self.roots[ri].positive
    }

    /// Right descent set: simple `i` with `l(w s_i) < l(w)`.
    pub fn right_descents(&self, w: usize) -> BTreeSet<usize> {
        (0..self.datum.semisimple_rank())
            .filter(|&i| self.length(self.right_by_gen[w][i]) < self.length(w))
            .collect()
    }

    pub fn left_descents(&self, w: usize) -> BTreeSet<usize> {
        (0..self.datum.semisimple_rank())
            .filter(|&i| self.length(self.left_by_gen[w][i]) < self.length(w))
            .collect()
    }

    /// Coxeter length as an inversion count, for cross-checking `length`.
    pub fn inversion_count(&self, w: usize) -> usize {
        self.positive_roots()
            .iter()
            .filter(|r| {
                let img = self.act_m(w, &r.root);
                let ri = self.find_root(&img).expect("root image");
                !self.roots[ri].positive
            })
            .count()
    }

    /// Isobaric Demazure operator for the `i`-th simple reflection:
    /// `(f - e^{-a_i} s_i f) / (1 - e^{-a_i})`. The result is
    /// `s_i`-invariant, the operator fixes invariants, and the numerator is
    /// always exactly divisible.
    pub fn demazure(&self, i: usize, f: &LaurentPoly) -> LaurentPoly {
        let neg_alpha = lattice::vec_neg(&self.datum.simple_root(i));
        let num = f.sub(&self.act_poly(self.simple(i), f).mul_monomial(&neg_alpha, 1));
        laurent::divide_by_one_minus_exp(&num, &neg_alpha).expect("divisible by construction")
    }

    /// A reduced word for the longest element of the standard parabolic
    /// subgroup generated by `subset`. Relies on reduced words of parabolic
    /// elements using only letters from the subset.
    pub fn parabolic_longest_word(&self, subset: &BTreeSet<usize>) -> Vec<usize> {
        let mut best = 0;
        for w in 0..self.len() {
            if self.elements[w].word.iter().all(|j| subset.contains(j))
                && self.length(w) > self.length(best)
            {
                best = w;
            }
        }
        self.elements[best].word.clone()
    }
}

/// All subsets of the simple roots, in binary counting order.
pub fn simple_subsets(l: usize) -> Vec<BTreeSet<usize>> {
    (0..(1u32 << l))
        .map(|mask| {
            (0..l)
                .filter(|&i| mask & (1 << i) != 0)
                .collect::<BTreeSet<usize>>()
        })
        .collect()
}

/// Minimal length representatives of the cosets `w W_I`: elements sending
/// every simple root of `I` to a positive root. Sorted by element index.
pub fn minimal_coset_reps(g: &WeylGroup, subset: &BTreeSet<usize>) -> Vec<usize> {
    (0..g.len())
        .filter(|&w| subset.iter().all(|&i| g.sends_simple_to_positive(w, i)))
        .collect()
}

/// The stratification piece `C^I`: minimal representatives for the
/// complement of `I` that do not occur for any smaller complement.
pub fn c_set(g: &WeylGroup, subset: &BTreeSet<usize>) -> Vec<usize> {
    let l = g.datum.semisimple_rank();
    let delta: BTreeSet<usize> = (0..l).collect();
    let complement: BTreeSet<usize> = delta.difference(subset).copied().collect();
    let base = minimal_coset_reps(g, &complement);
    let mut excluded: BTreeSet<usize> = BTreeSet::new();
    for sub in simple_subsets(l) {
        if sub.is_subset(subset) && sub != *subset {
            let comp: BTreeSet<usize> = delta.difference(&sub).copied().collect();
            excluded.extend(minimal_coset_reps(g, &comp));
        }
    }
    base.into_iter().filter(|w| !excluded.contains(w)).collect()
}

/// Equivalent description of `C^I` by right descent sets; used as an
/// independent cross-check of `c_set`.
pub fn c_set_by_descents(g: &WeylGroup, subset: &BTreeSet<usize>) -> Vec<usize> {
    (0..g.len())
        .filter(|&w| g.right_descents(w) == *subset)
        .collect()
}

/// A basis of the character ring over its invariants, one class per group
/// element, verified nonsingular against the full translate matrix.
///
/// The class at `w` is adapted to the stratification: starting from a
/// monomial seed it is symmetrized by the Demazure operator of the longest
/// element of the parabolic complementary to the descent set of `w`, so it
/// is invariant under that parabolic. This is what makes product
/// decompositions respect the support bound in `structure_constants`.
pub struct SteinbergBasis {
    /// Which seed convention produced a nonsingular matrix (0 is the
    /// primary one).
    pub convention: usize,
    /// Basis classes indexed by element.
    pub polys: Vec<LaurentPoly>,
}

pub fn steinberg_basis(g: &WeylGroup) -> Result<SteinbergBasis, WeylError> {
    for convention in 0..4 {
        let polys = adapted_steinberg_polys(g, convention);
        if steinberg_matrix_invertible(g, &polys) {
            return Ok(SteinbergBasis { convention, polys });
        }
    }
    Err(WeylError::SteinbergSingular)
}

/// Monomial seeds: a fundamental-weight sum indexed by a descent set,
/// translated across the group. Four sign and inverse placements, tried in
/// a fixed order until one yields a basis.
fn steinberg_seeds(g: &WeylGroup, convention: usize) -> Vec<LaurentPoly> {
    let n = g.datum.rank();
    (0..g.len())
        .map(|v| {
            let descents = match convention {
                3 => g.right_descents(v),
                _ => g.left_descents(v),
            };
            let mut lambda = vec![0i64; n];
            for &i in &descents {
                lambda = lattice::vec_add(&lambda, &g.datum.fundamental_weight(i));
            }
            if convention == 2 {
                lambda = lattice::vec_neg(&lambda);
            }
            let outside = if convention == 1 { g.inverse(v) } else { v };
            LaurentPoly::exp(&g.act_m(outside, &lambda))
        })
        .collect()
}

/// Seeds symmetrized over the parabolic complementary to each element's
/// right descent set; the invariance is asserted, not assumed.
fn adapted_steinberg_polys(g: &WeylGroup, convention: usize) -> Vec<LaurentPoly> {
    let l = g.datum.semisimple_rank();
    let full: BTreeSet<usize> = (0..l).collect();
    steinberg_seeds(g, convention)
        .into_iter()
        .enumerate()
        .map(|(w, seed)| {
            let gamma: BTreeSet<usize> = full.difference(&g.right_descents(w)).copied().collect();
            let mut out = seed;
            for &i in g.parabolic_longest_word(&gamma).iter() {
                out = g.demazure(i, &out);
            }
            for &i in gamma.iter() {
                assert_eq!(g.act_poly(g.simple(i), &out), out, "parabolic invariance");
            }
            out
        })
        .collect()
}

fn translate_matrix(g: &WeylGroup, polys: &[LaurentPoly]) -> Vec<Vec<LaurentPoly>> {
    (0..g.len())
        .map(|u| polys.iter().map(|f| g.act_poly(u, f)).collect())
        .collect()
}

fn steinberg_matrix_invertible(g: &WeylGroup, polys: &[LaurentPoly]) -> bool {
    let a = translate_matrix(g, polys);
    let mut rhs = vec![LaurentPoly::zero(g.datum.rank()); g.len()];
    rhs[0] = LaurentPoly::one(g.datum.rank());
    laurent::bareiss_solve(&a, &rhs).is_ok()
}

/// Write `f` as a combination of the basis classes with invariant polynomial
/// coefficients: solves the translated system over all group elements, then
/// certifies polynomiality, invariance and exact reconstruction.
pub fn steinberg_decompose(
    g: &WeylGroup,
    basis: &SteinbergBasis,
    f: &LaurentPoly,
) -> Result<Vec<LaurentPoly>, WeylError> {
    if f.rank() != g.datum.rank() {
        return Err(WeylError::RankMismatch {
            expected: g.datum.rank(),
            got: f.rank(),
        });
    }
    let a = translate_matrix(g, &basis.polys);
    let b: Vec<LaurentPoly> = (0..g.len()).map(|u| g.act_poly(u, f)).collect();
    let (nums, den) = laurent::bareiss_solve(&a, &b)?;
    let mut coeffs = Vec::with_capacity(nums.len());
    for num in &nums {
        let c = laurent::exact_div(num, &den).ok_or(WeylError::NonPolynomialCoefficient)?;
        for i in 0..g.datum.semisimple_rank() {
            if g.act_poly(g.simple(i), &c) != c {
                return Err(WeylError::NonInvariantCoefficient);
            }
        }
        coeffs.push(c);
    }
    let mut rebuilt = LaurentPoly::zero(g.datum.rank());
    for (c, fv) in coeffs.iter().zip(&basis.polys) {
        rebuilt = rebuilt.add(&c.mul(fv));
    }
    if rebuilt != *f {
        return Err(WeylError::ReconstructionFailure);
    }
    Ok(coeffs)
}

/// Structure constants of the basis: the decomposition of `f_v * f_v'`,
/// checked against the stratification support bound: a nonzero coefficient
/// at `w` forces the descent set of `w` inside the union of those of `v`
/// and `v'`.
pub fn structure_constants(
    g: &WeylGroup,
    basis: &SteinbergBasis,
    v: usize,
    v2: usize,
) -> Result<Vec<LaurentPoly>, WeylError> {
    let prod = basis.polys[v].mul(&basis.polys[v2]);
    let coeffs = steinberg_decompose(g, basis, &prod)?;
    let allowed: BTreeSet<usize> = g
        .right_descents(v)
        .union(&g.right_descents(v2))
        .copied()
        .collect();
    for (w, c) in coeffs.iter().enumerate() {
        if !c.is_zero() && !g.right_descents(w).is_subset(&allowed) {
            return Err(WeylError::SupportViolation);
        }
    }
    Ok(coeffs)
}

/// The dominant chamber of a semisimple datum as a one-cone fan; its rays
/// are the primitive fundamental coweights.
pub fn wonderful_chamber(datum: &RootDatum) -> Result<Fan, WeylError> {
    if datum.central_rank != 0 {
        return Err(WeylError::NontrivialCenter);
    }
    let l = datum.semisimple_rank();
    let mut rays = Vec::with_capacity(l);
    for j in 0..l {
        let mut e = vec![0i64; l];
        e[j] = 1;
        let sol = lattice::rational_solve(&datum.cartan, &e).expect("cartan invertible");
        rays.push(rational_to_primitive(&sol));
    }
    let cone = Cone::new(l, rays)?;
    Ok(Fan::new(l, vec![cone])?)
}

fn rational_to_primitive(v: &[Rat]) -> LatticeVector {
    let mut lcm: i128 = 1;
    for x in v {
        lcm = num_integer::lcm(lcm, *x.denom());
    }
    let ints: Vec<i64> = v
        .iter()
        .map(|x| i64::try_from((*x * Rat::from_integer(lcm)).to_integer()).expect("fits"))
        .collect();
    lattice::primitivize(&ints).expect("nonzero")
}

/// Translate a chamber fan around the group: every maximal cone `sigma` and
/// element `w` contribute the labelled cone `w(sigma)`. The result is
/// validated as a fan; the labels index `(element, chamber cone)`.
pub fn orbit_fan(g: &WeylGroup, fan_plus: &Fan) -> Result<(Fan, Vec<(usize, usize)>), WeylError> {
    let n = g.datum.rank();
    if fan_plus.ambient_rank != n {
        return Err(WeylError::RankMismatch {
            expected: n,
            got: fan_plus.ambient_rank,
        });
    }
    if fan_plus.dim != n {
        return Err(WeylError::Fan(FanError::NotFullDimensional));
    }
    for c in fan_plus.maximal_cones() {
        for r in &c.rays {
            if !g.datum.is_dominant_coweight(r) {
                return Err(WeylError::NotInChamber);
            }
        }
    }
    let mut cones: Vec<Cone> = Vec::new();
    let mut labels = Vec::new();
    for w in 0..g.len() {
        for (si, sigma) in fan_plus.maximal_cones().iter().enumerate() {
            let rays: Vec<LatticeVector> = sigma.rays.iter().map(|r| g.act_n(w, r)).collect();
            let c = Cone::new(n, rays)?;
            if cones.contains(&c) {
                return Err(WeylError::OrbitCollision);
            }
            cones.push(c);
            labels.push((w, si));
        }
    }
    let fan = Fan::new(n, cones)?;
    Ok((fan, labels))
}

/// Move `nu` into the dominant chamber by simple reflections; returns
/// `(w, w(nu))` with the image dominant.
pub fn dominant_representative(g: &WeylGroup, nu: &[i64]) -> (usize, LatticeVector) {
    chamber_representative(g, nu, false)
}

/// Move `nu` into the antidominant chamber; returns `(w, w(nu))`.
pub fn antidominant_representative(g: &WeylGroup, nu: &[i64]) -> (usize, LatticeVector) {
    chamber_representative(g, nu, true)
}

fn chamber_representative(g: &WeylGroup, nu: &[i64], anti: bool) -> (usize, LatticeVector) {
    let l = g.datum.semisimple_rank();
    let mut current = nu.to_vec();
    let mut w = g.identity();
    let mut steps = 0usize;
    loop {
        let bad = (0..l).find(|&i| {
            let p = lattice::pairing(&g.datum.simple_root(i), &current).expect("rank");
            if anti {
                p > 0
            } else {
                p < 0
            }
        });
        let Some(i) = bad else {
            return (w, current);
        };
        current = g.act_n(g.simple(i), &current);
        w = g.mult(g.simple(i), w);
        steps += 1;
        assert!(steps <= 4 * g.len(), "chamber walk must terminate");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(name: &str) -> WeylGroup {
        weyl_group(RootDatum::named(name, 0).unwrap()).unwrap()
    }

    #[test]
    fn cartan_validation() {
        assert!(RootDatum::named("A2", 0).is_ok());
        assert!(RootDatum::named("G2", 1).is_ok());
        assert_eq!(
            RootDatum::new(IntMat::from_rows(&[vec![1]]), 0),
            Err(WeylError::BadDiagonal(0))
        );
        assert_eq!(
            RootDatum::new(IntMat::from_rows(&[vec![2, 1], vec![1, 2]]), 0),
            Err(WeylError::PositiveOffDiagonal(0, 1))
        );
        assert_eq!(
            RootDatum::new(IntMat::from_rows(&[vec![2, -1], vec![0, 2]]), 0),
            Err(WeylError::AsymmetricZero(0, 1))
        );
        assert_eq!(
            RootDatum::new(IntMat::from_rows(&[vec![2, -2], vec![-2, 2]]), 0),
            Err(WeylError::NotPositiveDefinite)
        );
        assert_eq!(
            RootDatum::new(IntMat::from_rows(&[vec![2, 0], vec![0, 2], vec![0, 0]]), 0),
            Err(WeylError::NotSquare)
        );
        assert_eq!(
            RootDatum::named("E9", 0),
            Err(WeylError::UnknownType("E9".into()))
        );
        let b2 = RootDatum::named("B2", 0).unwrap();
        assert_eq!(b2.symmetrizer, vec![2, 1]);
    }

    #[test]
    fn group_sizes() {
        assert_eq!(group("A1").len(), 2);
        assert_eq!(group("A1xA1").len(), 4);
        assert_eq!(group("A2").len(), 6);
        assert_eq!(group("B2").len(), 8);
        assert_eq!(group("G2").len(), 12);
        let with_center = weyl_group(RootDatum::named("A1", 2).unwrap()).unwrap();
        assert_eq!(with_center.len(), 2);
        assert_eq!(with_center.elements[1].mat_m.rows, 3);
    }

    #[test]
    fn lengths_and_longest() {
        let g = group("A2");
        let counts: Vec<usize> = (0..=3)
            .map(|k| (0..g.len()).filter(|&w| g.length(w) == k).count())
            .collect();
        assert_eq!(counts, vec![1, 2, 2, 1]);
        let w0 = g.longest_element();
        assert_eq!(g.length(w0), 3);
        assert_eq!(g.elements[w0].word, vec![0, 1, 0]);
        assert_eq!(group("B2").length(group("B2").longest_element()), 4);
        assert_eq!(group("G2").length(group("G2").longest_element()), 6);
    }

    #[test]
    fn length_equals_inversion_count() {
        for name in ["A2", "B2"] {
            let g = group(name);
            for w in 0..g.len() {
                assert_eq!(g.length(w), g.inversion_count(w), "{name} element {w}");
            }
        }
    }

    #[test]
    fn roots_data() {
        let a2 = group("A2");
        assert_eq!(a2.roots.len(), 6);
        assert_eq!(a2.positive_roots().len(), 3);
        let pos: BTreeSet<LatticeVector> =
            a2.positive_roots().iter().map(|r| r.root.clone()).collect();
        let expected: BTreeSet<LatticeVector> =
            [vec![2, -1], vec![-1, 2], vec![1, 1]].into_iter().collect();
        assert_eq!(pos, expected);
        assert_eq!(group("B2").positive_roots().len(), 4);
        assert_eq!(group("G2").positive_roots().len(), 6);
        for r in &a2.roots {
            assert_eq!(lattice::pairing(&r.root, &r.coroot).unwrap(), 2);
        }
    }

    #[test]
    fn reflections_are_odd_and_conjugate() {
        let g = group("B2");
        for (ri, root) in g.roots.iter().enumerate().filter(|(_, r)| r.positive) {
            let pos_index = g
                .positive_roots()
                .iter()
                .position(|r| r.root == root.root)
                .unwrap();
            let _ = ri;
            let s = g.reflection_element(pos_index);
            assert_eq!(g.length(s) % 2, 1, "reflections have odd length");
            assert_eq!(g.mult(s, s), g.identity());
        }
        // s_{w(alpha)} = w s_alpha w^{-1}
        for w in 0..g.len() {
            for (pi, r) in g.positive_roots().iter().enumerate() {
                let img = g.act_m(w, &r.root);
                let img_ri = g.find_root(&img).unwrap();
                let img_root = g.roots[img_ri].clone();
                let canon = if img_root.positive {
                    img_root.root.clone()
                } else {
                    lattice::vec_neg(&img_root.root)
                };
                let target_pi = g
                    .positive_roots()
                    .iter()
                    .position(|x| x.root == canon)
                    .unwrap();
                let lhs = g.reflection_element(target_pi);
                let rhs = g.mult(g.mult(w, g.reflection_element(pi)), g.inverse(w));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn action_preserves_pairing() {
        let g = group("B2");
        let chis = [vec![1, 0], vec![0, 1], vec![3, -2]];
        let nus = [vec![1, 0], vec![0, 1], vec![-1, 4]];
        for w in 0..g.len() {
            for chi in &chis {
                for nu in &nus {
                    assert_eq!(
                        lattice::pairing(&g.act_m(w, chi), &g.act_n(w, nu)).unwrap(),
                        lattice::pairing(chi, nu).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn coset_reps_and_c_sets() {
        let a2 = group("A2");
        let i0: BTreeSet<usize> = [0].into_iter().collect();
        assert_eq!(minimal_coset_reps(&a2, &i0).len(), 3);
        let sizes: Vec<usize> = simple_subsets(2)
            .iter()
            .map(|s| c_set(&a2, s).len())
            .collect();
        assert_eq!(sizes, vec![1, 2, 2, 1]);
        for name in ["A1", "A1xA1", "A2", "B2", "G2"] {
            let g = group(name);
            let l = g.datum.semisimple_rank();
            let mut union: Vec<usize> = Vec::new();
            for s in simple_subsets(l) {
                let a = c_set(&g, &s);
                let b = c_set_by_descents(&g, &s);
                assert_eq!(a, b, "{name} subset {s:?}");
                union.extend(&a);
            }
            union.sort();
            assert_eq!(union, (0..g.len()).collect::<Vec<_>>(), "{name} partition");
        }
        let b2_sizes: Vec<usize> = simple_subsets(2)
            .iter()
            .map(|s| c_set(&group("B2"), s).len())
            .collect();
        assert_eq!(b2_sizes, vec![1, 3, 3, 1]);
    }

    #[test]
    fn steinberg_a1_classes() {
        let g = group("A1");
        let basis = steinberg_basis(&g).unwrap();
        assert_eq!(basis.convention, 0);
        assert_eq!(basis.polys[g.identity()], LaurentPoly::one(1));
        assert_eq!(basis.polys[g.simple(0)], LaurentPoly::exp(&[-1]));
    }

    #[test]
    fn steinberg_a1_structure_constants() {
        let g = group("A1");
        let basis = steinberg_basis(&g).unwrap();
        let s = g.simple(0);
        let c = structure_constants(&g, &basis, s, s).unwrap();
        assert_eq!(c[g.identity()], LaurentPoly::constant(1, -1));
        assert_eq!(c[s], LaurentPoly::exp(&[1]).add(&LaurentPoly::exp(&[-1])));
        let ce = structure_constants(&g, &basis, g.identity(), s).unwrap();
        assert_eq!(ce[g.identity()], LaurentPoly::zero(1));
        assert_eq!(ce[s], LaurentPoly::one(1));
    }

    #[test]
    fn steinberg_decompose_roundtrip() {
        for name in ["A2", "B2"] {
            let g = group(name);
            let basis = steinberg_basis(&g).unwrap();
            // the primary seed is singular in rank two and the inverse
            // placement is the first that verifies; pinned as a regression
            assert_eq!(basis.convention, 1, "{name} selected convention");
            // deterministic sample classes
            let mut state: u64 = 0xabcdef12345;
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state
            };
            for _ in 0..3 {
                let mut f = LaurentPoly::zero(2);
                for _ in 0..4 {
                    let e = vec![(next() % 5) as i64 - 2, (next() % 5) as i64 - 2];
                    f.add_term(e, (next() % 9) as i128 - 4);
                }
                let coeffs = steinberg_decompose(&g, &basis, &f).unwrap();
                let mut back = LaurentPoly::zero(2);
                for (c, fv) in coeffs.iter().zip(&basis.polys) {
                    back = back.add(&c.mul(fv));
                }
                assert_eq!(back, f);
            }
        }
    }

    #[test]
    fn structure_constants_support_a2() {
        let g = group("A2");
        let basis = steinberg_basis(&g).unwrap();
        for v in 0..g.len() {
            for v2 in 0..g.len() {
                // support bound is checked inside; any violation errors
                structure_constants(&g, &basis, v, v2).unwrap();
            }
        }
    }

    #[test]
    fn steinberg_classes_are_parabolic_invariant() {
        for name in ["A2", "B2"] {
            let g = group(name);
            let basis = steinberg_basis(&g).unwrap();
            for w in 0..g.len() {
                for i in 0..g.datum.semisimple_rank() {
                    if !g.right_descents(w).contains(&i) {
                        let f = &basis.polys[w];
                        assert_eq!(g.act_poly(g.simple(i), f), *f, "{name} w={w} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn demazure_projects_onto_invariants() {
        let g = group("B2");
        let f = LaurentPoly::exp(&[1, 1]).add(&LaurentPoly::exp(&[-2, 1]));
        for i in 0..2 {
            let d = g.demazure(i, &f);
            assert_eq!(g.act_poly(g.simple(i), &d), d);
            // fixes what is already invariant
            assert_eq!(g.demazure(i, &d), d);
        }
    }

    #[test]
    fn wonderful_chamber_rays() {
        let a1 = RootDatum::named("A1", 0).unwrap();
        assert_eq!(
            wonderful_chamber(&a1).unwrap().maximal_cones()[0].rays,
            vec![vec![1]]
        );
        let a2 = RootDatum::named("A2", 0).unwrap();
        assert_eq!(
            wonderful_chamber(&a2).unwrap().maximal_cones()[0].rays,
            vec![vec![1, 2], vec![2, 1]]
        );
        let b2 = RootDatum::named("B2", 0).unwrap();
        assert_eq!(
            wonderful_chamber(&b2).unwrap().maximal_cones()[0].rays,
            vec![vec![1, 1], vec![1, 2]]
        );
        let central = RootDatum::named("A1", 1).unwrap();
        assert_eq!(wonderful_chamber(&central), Err(WeylError::NontrivialCenter));
    }

    #[test]
    fn orbit_fan_a1_is_p1() {
        let g = group("A1");
        let chamber = wonderful_chamber(&g.datum).unwrap();
        let (fan, labels) = orbit_fan(&g, &chamber).unwrap();
        assert_eq!(fan.maximal.len(), 2);
        assert_eq!(labels, vec![(0, 0), (1, 0)]);
        let rays: Vec<LatticeVector> = fan
            .maximal_cones()
            .iter()
            .map(|c| c.rays[0].clone())
            .collect();
        assert_eq!(rays, vec![vec![1], vec![-1]]);
    }

    #[test]
    fn orbit_fan_a2_chamber() {
        let g = group("A2");
        let chamber = wonderful_chamber(&g.datum).unwrap();
        let (fan, labels) = orbit_fan(&g, &chamber).unwrap();
        assert_eq!(fan.maximal.len(), 6);
        assert_eq!(labels.len(), 6);
        // group invariance: the translate of every maximal cone is maximal
        for w in 0..g.len() {
            for sigma in fan.maximal_cones() {
                let rays: Vec<LatticeVector> =
                    sigma.rays.iter().map(|r| g.act_n(w, r)).collect();
                let c = Cone::new(2, rays).unwrap();
                assert!(fan.maximal_cones().iter().any(|m| **m == c));
            }
        }
    }

    #[test]
    fn orbit_fan_subdivided_a1xa1() {
        let g = group("A1xA1");
        let c1 = Cone::new(2, vec![vec![1, 0], vec![1, 1]]).unwrap();
        let c2 = Cone::new(2, vec![vec![1, 1], vec![0, 1]]).unwrap();
        let fan_plus = Fan::new(2, vec![c1, c2]).unwrap();
        let (fan, labels) = orbit_fan(&g, &fan_plus).unwrap();
        assert_eq!(fan.maximal.len(), 8);
        assert_eq!(labels.len(), 8);
    }

    #[test]
    fn orbit_fan_rejects_non_chamber() {
        let g = group("A2");
        let c = Cone::new(2, vec![vec![1, 0], vec![0, 1]]).unwrap();
        // (1,0) pairs negatively with alpha_2 = (-1,2)
        let fan_plus = Fan::new(2, vec![c]).unwrap();
        assert_eq!(orbit_fan(&g, &fan_plus), Err(WeylError::NotInChamber));
    }

    #[test]
    fn chamber_representatives() {
        let g = group("B2");
        for nu in [vec![1, 1], vec![-3, 2], vec![0, -1], vec![-2, -2], vec![5, -7]] {
            let (w, dom) = dominant_representative(&g, &nu);
            assert!(g.datum.is_dominant_coweight(&dom));
            assert_eq!(g.act_n(w, &nu), dom);
            let (w2, anti) = antidominant_representative(&g, &nu);
            assert!(g.datum.is_antidominant_coweight(&anti));
            assert_eq!(g.act_n(w2, &nu), anti);
        }
    }
}
