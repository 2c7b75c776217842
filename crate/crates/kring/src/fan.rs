//! Rational polyhedral cones and fans, with the combinatorial cellularity
//! criterion for the associated toric varieties.
//!
//! Cones store primitive extremal rays in a canonical (sorted) order. All
//! geometric predicates run in exact integer or rational arithmetic: faces
//! come from supporting hyperplanes, relative interiors from facet-normal
//! strictness, smoothness from Smith normal form.

use crate::lattice::{
    self, integer_kernel, quotient_lattice, rational_rank, rational_solve, IntMat, LatticeVector,
    Rat,
};
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FanError {
    #[error("ray has wrong rank: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("zero vector listed as a ray")]
    ZeroRay,
    #[error("duplicate ray {0:?}")]
    DuplicateRay(LatticeVector),
    #[error("cone is not strongly convex")]
    NotStronglyConvex,
    #[error("listed ray {0:?} is not extremal")]
    NonExtremalRay(LatticeVector),
    #[error("maximal cones have unequal dimensions")]
    NonPure,
    #[error("duplicate maximal cone")]
    DuplicateMaximalCone,
    #[error("cones {i} and {j} do not intersect in a common face")]
    NotAFan { i: usize, j: usize },
    #[error("cone is not in the fan")]
    NotInFan,
    #[error("operation requires a simplicial cone")]
    NotSimplicial,
    #[error("operation requires full-dimensional maximal cones")]
    NotFullDimensional,
    #[error("no face of the cone qualifies (vector outside the span)")]
    NoQualifyingFace,
    #[error("vector is not generic for the fan")]
    NonGenericVector,
}

/// A strongly convex rational polyhedral cone, stored by its primitive
/// extremal rays sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cone {
    pub ambient_rank: usize,
    pub rays: Vec<LatticeVector>,
}

/// Span-reduced view of a cone: ray coordinates in a saturated basis of the
/// linear span, plus the facet normals there.
struct ConeGeom {
    /// Basis of `span(rays) ∩ Z^n`, as ambient vectors.
    span_basis: Vec<LatticeVector>,
    /// Facet normals in span coordinates, each nonnegative on the cone.
    facet_normals: Vec<LatticeVector>,
    /// For each facet, the set of ray indices it annihilates.
    facet_rays: Vec<BTreeSet<usize>>,
}

impl Cone {
    /// The zero cone.
    pub fn zero(ambient_rank: usize) -> Self {
        Cone {
            ambient_rank,
            rays: Vec::new(),
        }
    }

    /// Build a cone whose listed rays are required to be extremal.
    pub fn new(ambient_rank: usize, rays: Vec<LatticeVector>) -> Result<Self, FanError> {
        let cone = Self::build(ambient_rank, rays, false)?;
        Ok(cone)
    }

    /// Build the cone generated by the given vectors, dropping redundant ones.
    pub fn from_generators(ambient_rank: usize, gens: Vec<LatticeVector>) -> Result<Self, FanError> {
        Self::build(ambient_rank, gens, true)
    }

    fn build(ambient_rank: usize, rays: Vec<LatticeVector>, reduce: bool) -> Result<Self, FanError> {
        let mut prim: Vec<LatticeVector> = Vec::new();
        for r in &rays {
            if r.len() != ambient_rank {
                return Err(FanError::RankMismatch {
                    expected: ambient_rank,
                    got: r.len(),
                });
            }
            if lattice::is_zero_vec(r) {
                if reduce {
                    continue;
                }
                return Err(FanError::ZeroRay);
            }
            let p = lattice::primitivize(r).expect("nonzero");
            if prim.contains(&p) {
                if reduce {
                    continue;
                }
                return Err(FanError::DuplicateRay(p));
            }
            prim.push(p);
        }
        prim.sort();
        let cone = Cone {
            ambient_rank,
            rays: prim,
        };
        let geom = cone.geometry();
        let dim = geom.span_basis.len();
        if lattice::rational_rank(&IntMat::from_rows(&geom.facet_normals)) != dim {
            return Err(FanError::NotStronglyConvex);
        }
        let mut extremal: Vec<bool> = Vec::with_capacity(cone.rays.len());
        for i in 0..cone.rays.len() {
            // minimal face containing ray i: intersect the facets through it;
            // an empty intersection family leaves the whole cone
            let mut common: Option<BTreeSet<usize>> = None;
            for rays_of_f in &geom.facet_rays {
                if rays_of_f.contains(&i) {
                    common = Some(match common {
                        None => rays_of_f.clone(),
                        Some(c) => c.intersection(rays_of_f).copied().collect(),
                    });
                }
            }
            let members: Vec<LatticeVector> = match common {
                None => cone.rays.clone(),
                Some(c) => c.iter().map(|&k| cone.rays[k].clone()).collect(),
            };
            let rk = lattice::rational_rank(&IntMat::from_rows(&members));
            extremal.push(rk == 1);
        }
        if extremal.iter().any(|&e| !e) {
            if !reduce {
                let bad = cone
                    .rays
                    .iter()
                    .zip(&extremal)
                    .find(|(_, &e)| !e)
                    .map(|(r, _)| r.clone())
                    .expect("some ray non-extremal");
                return Err(FanError::NonExtremalRay(bad));
            }
            let kept: Vec<LatticeVector> = cone
                .rays
                .iter()
                .zip(&extremal)
                .filter(|(_, &e)| e)
                .map(|(r, _)| r.clone())
                .collect();
            // rebuild from the extremal subset, this time strictly
            return Self::build(ambient_rank, kept, false);
        }
        Ok(cone)
    }

    pub fn dim(&self) -> usize {
        if self.rays.is_empty() {
            0
        } else {
            lattice::rational_rank(&IntMat::from_rows(&self.rays))
        }
    }

    fn geometry(&self) -> ConeGeom {
        let span_basis = lattice::saturation_basis(&self.rays, self.ambient_rank);
        let dim = span_basis.len();
        let rays_span: Vec<LatticeVector> = self
            .rays
            .iter()
            .map(|r| {
                lattice::integral_coords_in_basis(&span_basis, r)
                    .expect("ray lies in the saturated span")
            })
            .collect();
        let mut facet_normals: Vec<LatticeVector> = Vec::new();
        let mut facet_rays: Vec<BTreeSet<usize>> = Vec::new();
        if dim > 0 {
            for subset in subsets_of_size(self.rays.len(), dim - 1) {
                let rows: Vec<LatticeVector> =
                    subset.iter().map(|&i| rays_span[i].clone()).collect();
                let mat = IntMat::from_rows(&rows);
                let a = if rows.is_empty() {
                    IntMat::zero(0, dim)
                } else {
                    mat
                };
                if !rows.is_empty() && rational_rank(&a) != dim - 1 {
                    continue;
                }
                let kernel = if rows.is_empty() {
                    if dim == 1 {
                        vec![vec![1]]
                    } else {
                        continue;
                    }
                } else {
                    integer_kernel(&a)
                };
                if kernel.len() != 1 {
                    continue;
                }
                let mut u = kernel[0].clone();
                let vals: Vec<i64> = rays_span
                    .iter()
                    .map(|r| lattice::pairing(&u, r).expect("span rank"))
                    .collect();
                let has_pos = vals.iter().any(|&v| v > 0);
                let has_neg = vals.iter().any(|&v| v < 0);
                if has_pos && has_neg {
                    continue;
                }
                if has_neg {
                    u = lattice::vec_neg(&u);
                }
                let zero_set: BTreeSet<usize> = vals
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v == 0)
                    .map(|(i, _)| i)
                    .collect();
                if !facet_rays.contains(&zero_set) {
                    let u = lattice::primitivize(&u).expect("kernel vector nonzero");
                    facet_normals.push(u);
                    facet_rays.push(zero_set);
                }
            }
        }
        ConeGeom {
            span_basis,
            facet_normals,
            facet_rays,
        }
    }

    /// Exact membership test.
    pub fn contains(&self, x: &[i64]) -> bool {
        assert_eq!(x.len(), self.ambient_rank, "rank mismatch");
        if lattice::is_zero_vec(x) {
            return true;
        }
        if self.rays.is_empty() {
            return false;
        }
        let geom = self.geometry();
        // the span basis is saturated, so integer points of the span always
        // have integral coordinates; failure means x is outside the span
        let Ok(xs) = lattice::integral_coords_in_basis(&geom.span_basis, x) else {
            return false;
        };
        geom.facet_normals
            .iter()
            .all(|u| lattice::pairing(u, &xs).expect("span rank") >= 0)
    }

    /// All faces, ordered by dimension then ray set. Includes the zero cone
    /// and the cone itself.
    pub fn faces(&self) -> Vec<Cone> {
        let geom = self.geometry();
        let all: BTreeSet<usize> = (0..self.rays.len()).collect();
        let mut sets: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        sets.insert(all);
        // faces are exactly the intersections of facets
        loop {
            let mut added = false;
            let snapshot: Vec<BTreeSet<usize>> = sets.iter().cloned().collect();
            for s in &snapshot {
                for f in &geom.facet_rays {
                    let inter: BTreeSet<usize> = s.intersection(f).copied().collect();
                    if sets.insert(inter) {
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        if self.rays.is_empty() {
            sets.insert(BTreeSet::new());
        }
        let mut out: Vec<Cone> = sets
            .into_iter()
            .map(|s| Cone {
                ambient_rank: self.ambient_rank,
                rays: s.iter().map(|&i| self.rays[i].clone()).collect(),
            })
            .collect();
        out.sort_by_key(|c| (c.dim(), c.rays.clone()));
        out.dedup();
        out
    }

    /// Is this a face of `other`? Both must already be known cones of a
    /// common fan for the ray-subset criterion to apply.
    pub fn is_face_of(&self, other: &Cone) -> bool {
        other
            .faces()
            .iter()
            .any(|f| f.rays == self.rays)
    }

    /// Smooth means the rays extend to a basis of the ambient lattice:
    /// simplicial with all Smith invariant factors equal to one.
    pub fn is_smooth(&self) -> bool {
        let d = self.dim();
        if self.rays.len() != d {
            return false;
        }
        if d == 0 {
            return true;
        }
        let m = IntMat::from_cols(&self.rays, self.ambient_rank);
        lattice::snf(&m).invariant_factors().iter().all(|&f| f == 1)
    }

    pub fn is_simplicial(&self) -> bool {
        self.rays.len() == self.dim()
    }

    /// An interior lattice point: the sum of the rays.
    pub fn interior_point(&self) -> LatticeVector {
        let mut p = vec![0i64; self.ambient_rank];
        for r in &self.rays {
            p = lattice::vec_add(&p, r);
        }
        p
    }
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// A fan: cones closed under taking faces, listed maximal cones of equal
/// dimension, pairwise intersections in common faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    pub ambient_rank: usize,
    /// All cones, sorted by (dimension, rays).
    pub cones: Vec<Cone>,
    /// Indices into `cones` of the maximal cones, in input order.
    pub maximal: Vec<usize>,
    pub dim: usize,
}

impl Fan {
    pub fn new(ambient_rank: usize, maximal_cones: Vec<Cone>) -> Result<Self, FanError> {
        if maximal_cones.is_empty() {
            return Ok(Fan {
                ambient_rank,
                cones: vec![Cone::zero(ambient_rank)],
                maximal: vec![0],
                dim: 0,
            });
        }
        let dim = maximal_cones[0].dim();
        for c in &maximal_cones {
            if c.ambient_rank != ambient_rank {
                return Err(FanError::RankMismatch {
                    expected: ambient_rank,
                    got: c.ambient_rank,
                });
            }
            if c.dim() != dim {
                return Err(FanError::NonPure);
            }
        }
        for i in 0..maximal_cones.len() {
            for j in i + 1..maximal_cones.len() {
                if maximal_cones[i] == maximal_cones[j] {
                    return Err(FanError::DuplicateMaximalCone);
                }
            }
        }
        let face_lists: Vec<Vec<Cone>> = maximal_cones.iter().map(|c| c.faces()).collect();
        // pairwise: the intersection must be the cone on the shared rays and a
        // face of both
        for i in 0..maximal_cones.len() {
            for j in i + 1..maximal_cones.len() {
                let (a, b) = (&maximal_cones[i], &maximal_cones[j]);
                let in_b: Vec<LatticeVector> = a
                    .rays
                    .iter()
                    .filter(|r| b.contains(r))
                    .cloned()
                    .collect();
                let in_a: Vec<LatticeVector> = b
                    .rays
                    .iter()
                    .filter(|r| a.contains(r))
                    .cloned()
                    .collect();
                let mut sa = in_b.clone();
                sa.sort();
                let mut sb = in_a.clone();
                sb.sort();
                if sa != sb {
                    return Err(FanError::NotAFan { i, j });
                }
                let is_face_a = face_lists[i].iter().any(|f| f.rays == sa);
                let is_face_b = face_lists[j].iter().any(|f| f.rays == sa);
                if !is_face_a || !is_face_b {
                    return Err(FanError::NotAFan { i, j });
                }
            }
        }
        let mut cones: Vec<Cone> = Vec::new();
        for fl in &face_lists {
            for f in fl {
                if !cones.contains(f) {
                    cones.push(f.clone());
                }
            }
        }
        cones.sort_by_key(|c| (c.dim(), c.rays.clone()));
        let maximal = maximal_cones
            .iter()
            .map(|c| cones.iter().position(|x| x == c).expect("present"))
            .collect();
        Ok(Fan {
            ambient_rank,
            cones,
            maximal,
            dim,
        })
    }

    pub fn maximal_cones(&self) -> Vec<&Cone> {
        self.maximal.iter().map(|&i| &self.cones[i]).collect()
    }

    pub fn find_cone(&self, cone: &Cone) -> Option<usize> {
        self.cones.iter().position(|c| c == cone)
    }

    pub fn cones_of_dim(&self, d: usize) -> Vec<&Cone> {
        self.cones.iter().filter(|c| c.dim() == d).collect()
    }
}

/// A wall: a codimension-one intersection of two maximal cones, with its
/// primitive normal character (sign fixed by lexicographic positivity).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub i: usize,
    pub j: usize,
    pub face_rays: Vec<LatticeVector>,
    pub normal: LatticeVector,
}

/// All walls of a full-dimensional fan, ordered by (i, j).
pub fn walls(fan: &Fan) -> Result<Vec<Wall>, FanError> {
    if fan.dim != fan.ambient_rank {
        return Err(FanError::NotFullDimensional);
    }
    let maxes = fan.maximal_cones();
    let mut out = Vec::new();
    for i in 0..maxes.len() {
        for j in i + 1..maxes.len() {
            let shared: Vec<LatticeVector> = maxes[i]
                .rays
                .iter()
                .filter(|r| maxes[j].contains(r))
                .cloned()
                .collect();
            if shared.is_empty() && fan.dim != 1 {
                continue;
            }
            let rank = if shared.is_empty() {
                0
            } else {
                lattice::rational_rank(&IntMat::from_rows(&shared))
            };
            if rank != fan.dim - 1 {
                continue;
            }
            let kernel = if shared.is_empty() {
                vec![vec![1i64; 1]]
            } else {
                integer_kernel(&IntMat::from_rows(&shared))
            };
            assert_eq!(kernel.len(), 1, "wall normal space must be a line");
            let mut normal = lattice::primitivize(&kernel[0]).expect("nonzero");
            let first_nonzero = normal.iter().find(|&&x| x != 0).copied().unwrap_or(0);
            if first_nonzero < 0 {
                normal = lattice::vec_neg(&normal);
            }
            let mut face_rays = shared;
            face_rays.sort();
            out.push(Wall {
                i,
                j,
                face_rays,
                normal,
            });
        }
    }
    Ok(out)
}

/// Normal of the wall between maximal cones `i` and `j`, oriented to be
/// strictly negative on the interior of cone `i` (pointing away from it).
pub fn wall_normal_away_from(fan: &Fan, wall: &Wall, cone_index: usize) -> LatticeVector {
    let sigma = &fan.cones[fan.maximal[cone_index]];
    let p = sigma.interior_point();
    let v = lattice::pairing(&wall.normal, &p).expect("rank");
    assert_ne!(v, 0, "interior point cannot lie on the wall");
    if v > 0 {
        lattice::vec_neg(&wall.normal)
    } else {
        wall.normal.clone()
    }
}

/// The star of `tau`, viewed in the quotient lattice `N / N_tau`: projects
/// every maximal cone containing `tau` and reassembles a fan.
pub fn star_quotient(fan: &Fan, tau: &Cone) -> Result<Fan, FanError> {
    if fan.find_cone(tau).is_none() {
        return Err(FanError::NotInFan);
    }
    let q = quotient_lattice(fan.ambient_rank, &lattice::saturation_basis(&tau.rays, fan.ambient_rank));
    let new_rank = q.free_rank;
    let mut image_cones = Vec::new();
    for &mi in &fan.maximal {
        let sigma = &fan.cones[mi];
        if !tau.rays.iter().all(|r| sigma.contains(r)) {
            continue;
        }
        let gens: Vec<LatticeVector> = sigma
            .rays
            .iter()
            .map(|r| q.project(r).free)
            .filter(|v| !lattice::is_zero_vec(v))
            .collect();
        image_cones.push(Cone::from_generators(new_rank, gens)?);
    }
    let mut dedup: Vec<Cone> = Vec::new();
    for c in image_cones {
        if !dedup.contains(&c) {
            dedup.push(c);
        }
    }
    Fan::new(new_rank, dedup)
}

/// Projection of a single cone to the star quotient at `tau`.
pub fn project_to_star(fan: &Fan, tau: &Cone, sigma: &Cone) -> Result<Cone, FanError> {
    if fan.find_cone(tau).is_none() {
        return Err(FanError::NotInFan);
    }
    let q = quotient_lattice(fan.ambient_rank, &lattice::saturation_basis(&tau.rays, fan.ambient_rank));
    let gens: Vec<LatticeVector> = sigma
        .rays
        .iter()
        .map(|r| q.project(r).free)
        .filter(|v| !lattice::is_zero_vec(v))
        .collect();
    Cone::from_generators(q.free_rank, gens)
}

/// Generating set of the dual semigroup `sigma^vee ∩ M` for a simplicial
/// full-dimensional cone: the primitive dual-basis rays together with the
/// lattice points of their fundamental parallelepiped.
pub fn dual_generators(sigma: &Cone) -> Result<Vec<LatticeVector>, FanError> {
    let n = sigma.ambient_rank;
    if sigma.dim() != n {
        return Err(FanError::NotFullDimensional);
    }
    if !sigma.is_simplicial() {
        return Err(FanError::NotSimplicial);
    }
    let v = IntMat::from_cols(&sigma.rays, n);
    let mut duals: Vec<LatticeVector> = Vec::new();
    for i in 0..n {
        // solve <u, v_j> = delta_ij up to scale: integer kernel of the other rays,
        // oriented positively on ray i
        let others: Vec<LatticeVector> = (0..n).filter(|&j| j != i).map(|j| v.col(j)).collect();
        let kernel = if others.is_empty() {
            vec![vec![1i64]]
        } else {
            integer_kernel(&IntMat::from_rows(&others))
        };
        assert_eq!(kernel.len(), 1);
        let mut u = lattice::primitivize(&kernel[0]).expect("nonzero");
        let val = lattice::pairing(&u, &v.col(i)).expect("rank");
        assert_ne!(val, 0, "dual ray must pair nonzero with its own ray");
        if val < 0 {
            u = lattice::vec_neg(&u);
        }
        duals.push(u);
    }
    let mut gens: BTreeSet<LatticeVector> = duals.iter().cloned().collect();
    // bounding box of the parallelepiped spanned by the dual rays
    let mut lo = vec![0i64; n];
    let mut hi = vec![0i64; n];
    for mask in 0..(1u32 << n) {
        let mut corner = vec![0i64; n];
        for (i, d) in duals.iter().enumerate() {
            if mask & (1 << i) != 0 {
                corner = lattice::vec_add(&corner, d);
            }
        }
        for k in 0..n {
            lo[k] = lo[k].min(corner[k]);
            hi[k] = hi[k].max(corner[k]);
        }
    }
    let dual_mat = IntMat::from_cols(&duals, n);
    let mut cursor = lo.clone();
    loop {
        let x = cursor.clone();
        if !lattice::is_zero_vec(&x) {
            if let Some(t) = rational_solve(&dual_mat, &x) {
                let zero = Rat::from_integer(0);
                let one = Rat::from_integer(1);
                if t.iter().all(|&c| c >= zero && c < one) {
                    gens.insert(x);
                }
            }
        }
        // advance the box cursor
        let mut k = 0;
        loop {
            if k == n {
                let out: Vec<LatticeVector> = gens.into_iter().collect();
                return Ok(out);
            }
            cursor[k] += 1;
            if cursor[k] <= hi[k] {
                break;
            }
            cursor[k] = lo[k];
            k += 1;
        }
    }
}

/// Strict inequality test from the cell-invariance bound: `lambda_alt` cuts
/// the same cells as the generic `lambda` when
/// `|<mu, lambda - lambda_alt>| < |<mu, lambda>|` for every dual generator
/// `mu` of every maximal cone.
pub fn psg_perturbation(fan: &Fan, lambda: &[i64], lambda_alt: &[i64]) -> Result<bool, FanError> {
    let diff = lattice::vec_sub(lambda, lambda_alt);
    for &mi in &fan.maximal {
        let sigma = &fan.cones[mi];
        for mu in dual_generators(sigma)? {
            let base = lattice::pairing(&mu, lambda).expect("rank");
            let delta = lattice::pairing(&mu, &diff).expect("rank");
            if delta.abs() >= base.abs() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The minimal face `tau` of `sigma` such that the image of `v` lies in the
/// relative interior of `sigma / span(tau)`.
///
/// Faces are scanned in increasing dimension; relative-interior membership is
/// strict positivity against the projected cone's facet normals, in exact
/// rational arithmetic. The cone itself qualifies whenever `v` lies in its
/// span, so for full-dimensional `sigma` the result always exists.
pub fn minimal_face(sigma: &Cone, v: &[i64]) -> Result<Cone, FanError> {
    if v.len() != sigma.ambient_rank {
        return Err(FanError::RankMismatch {
            expected: sigma.ambient_rank,
            got: v.len(),
        });
    }
    let faces = sigma.faces();
    let mut qualifying: Vec<&Cone> = Vec::new();
    for gamma in &faces {
        if image_in_relint(sigma, gamma, v) {
            qualifying.push(gamma);
        }
    }
    if qualifying.is_empty() {
        return Err(FanError::NoQualifyingFace);
    }
    // qualifying faces are closed under intersection; the minimal one is the
    // intersection of all of them
    let mut rays: BTreeSet<LatticeVector> = qualifying[0].rays.iter().cloned().collect();
    for q in &qualifying[1..] {
        let s: BTreeSet<LatticeVector> = q.rays.iter().cloned().collect();
        rays = rays.intersection(&s).cloned().collect();
    }
    let min_cone = Cone {
        ambient_rank: sigma.ambient_rank,
        rays: rays.into_iter().collect(),
    };
    let found = qualifying.iter().find(|q| q.rays == min_cone.rays);
    match found {
        Some(c) => Ok((*c).clone()),
        None => {
            // the intersection must itself qualify
            debug_assert!(image_in_relint(sigma, &min_cone, v));
            Ok(min_cone)
        }
    }
}

fn image_in_relint(sigma: &Cone, gamma: &Cone, v: &[i64]) -> bool {
    let n = sigma.ambient_rank;
    let q = quotient_lattice(n, &lattice::saturation_basis(&gamma.rays, n));
    let vbar = q.project(v).free;
    let images: Vec<LatticeVector> = sigma
        .rays
        .iter()
        .map(|r| q.project(r).free)
        .filter(|x| !lattice::is_zero_vec(x))
        .collect();
    if images.is_empty() {
        return lattice::is_zero_vec(&vbar);
    }
    if lattice::is_zero_vec(&vbar) {
        // relint of a positive-dimensional cone never contains the origin
        return false;
    }
    let Ok(image_cone) = Cone::from_generators(q.free_rank, images) else {
        return false;
    };
    let geom = image_cone.geometry();
    // span membership, rationally
    let m = IntMat::from_cols(&geom.span_basis, q.free_rank);
    let Some(coords) = rational_solve(&m, &vbar) else {
        return false;
    };
    geom.facet_normals
        .iter()
        .all(|u| lattice::rational_pairing(&coords, u) > Rat::from_integer(0))
}

/// Hyperplane genericity: `v` avoids the span of every cone of dimension
/// `dim(fan) - 1`.
pub fn is_generic(fan: &Fan, v: &[i64]) -> bool {
    if fan.dim == 0 {
        return true;
    }
    for c in fan.cones_of_dim(fan.dim - 1) {
        if c.rays.is_empty() {
            if lattice::is_zero_vec(v) {
                return false;
            }
            continue;
        }
        let mut rows = c.rays.clone();
        let base = lattice::rational_rank(&IntMat::from_rows(&rows));
        rows.push(v.to_vec());
        if lattice::rational_rank(&IntMat::from_rows(&rows)) == base {
            return false;
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellData {
    pub cone_index: usize,
    pub minimal_face_rays: Vec<LatticeVector>,
    pub cell_dim: usize,
    pub quotient_smooth: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellularityReport {
    pub verdict: bool,
    /// A valid ordering of the maximal cones when one exists (indices into
    /// the input maximal order), ties broken by input order.
    pub order: Option<Vec<usize>>,
    pub cells: Vec<CellData>,
}

/// Combinatorial cellularity: an admissible ordering of the maximal cones
/// must exist (the face-containment digraph is acyclic) and every quotient
/// cone `sigma_i / N_{tau_i}` must be smooth in the star of `tau_i`.
pub fn cellularity_report(fan: &Fan, v: &[i64]) -> Result<CellularityReport, FanError> {
    if !is_generic(fan, v) {
        return Err(FanError::NonGenericVector);
    }
    let all_simplicial = fan
        .maximal_cones()
        .iter()
        .all(|c| c.is_simplicial() && c.dim() == fan.ambient_rank);
    if all_simplicial {
        // second genericity notion: v pairs nonzero with every dual generator
        for &mi in &fan.maximal {
            for mu in dual_generators(&fan.cones[mi])? {
                if lattice::pairing(&mu, v).expect("rank") == 0 {
                    return Err(FanError::NonGenericVector);
                }
            }
        }
    }
    let maxes = fan.maximal_cones();
    let m = maxes.len();
    let mut taus = Vec::with_capacity(m);
    for sigma in &maxes {
        taus.push(minimal_face(sigma, v)?);
    }
    // digraph: i -> j when tau_i is contained in sigma_j
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut indeg = vec![0usize; m];
    for i in 0..m {
        for j in 0..m {
            if i != j && taus[i].rays.iter().all(|r| maxes[j].contains(r)) {
                succ[i].push(j);
                indeg[j] += 1;
            }
        }
    }
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..m)
        .filter(|&i| indeg[i] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(m);
    while let Some(std::cmp::Reverse(i)) = heap.pop() {
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                heap.push(std::cmp::Reverse(j));
            }
        }
    }
    let order = if order.len() == m { Some(order) } else { None };
    let mut cells = Vec::with_capacity(m);
    let mut all_smooth = true;
    for i in 0..m {
        let image = project_to_star(fan, &taus[i], maxes[i])?;
        let smooth = image.is_smooth();
        all_smooth &= smooth;
        cells.push(CellData {
            cone_index: i,
            minimal_face_rays: taus[i].rays.clone(),
            cell_dim: fan.dim - taus[i].dim(),
            quotient_smooth: smooth,
        });
    }
    Ok(CellularityReport {
        verdict: order.is_some() && all_smooth,
        order,
        cells,
    })
}
