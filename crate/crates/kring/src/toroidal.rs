//! The equivariant K-ring of a group embedding built from a chamber fan:
//! fixed points and invariant curves for the doubled torus, congruence-ring
//! membership in full and reduced presentations, the rank-|W| module
//! decomposition with its multiplication rule, one-parameter subgroup
//! transfer between the toric and embedding pictures, and the ordinary
//! K-ring.
//!
//! Exponent conventions: full and reduced class values live in 2n variables,
//! the first n for the left character block, the last n for the right block.
//! The (u, v) presentation reindexes exponents by (p, q) -> (p, p + q); a
//! u-block character chi is the exponent (chi, 0) there, which is (chi,
//! -chi) in the plain blocks.

use crate::fan::{self, Cone, Fan, FanError};
use crate::gkm::{self, GkmEdge, GkmError, GkmGraph};
use crate::lattice::{self, Coord, IntMat, LatticeVector};
use crate::laurent::{self, LaurentError, LaurentPoly};
use crate::weyl::{self, SteinbergBasis, WeylError, WeylGroup};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ToroidalError {
    #[error("expected {expected} values, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("value rank {got}, expected {expected}")]
    RankMismatch { expected: usize, got: usize },
    #[error("fan is not a full-dimensional subdivision inside the dominant chamber")]
    NotChamberFan,
    #[error("value at vertex {vertex} is not the translate of the base value")]
    NotInvariant { vertex: usize },
    #[error("reflection condition fails on cone {sigma}, simple root {simple}")]
    SimpleCondition {
        sigma: usize,
        simple: usize,
        residue: Box<LaurentPoly>,
    },
    #[error("wall condition fails between cones {i} and {j}")]
    WallCondition {
        i: usize,
        j: usize,
        residue: Box<LaurentPoly>,
    },
    #[error("plain and (u,v) condition forms disagree on cone {sigma}, simple root {simple}")]
    FormMismatch { sigma: usize, simple: usize },
    #[error("coefficient at element {v}, cone {sigma} not divisible by its descent factor")]
    NotDivisible {
        v: usize,
        sigma: usize,
        residue: Box<LaurentPoly>,
    },
    #[error("coefficient family at element {v} violates the chamber congruences: {source}")]
    CoefficientFamily {
        v: usize,
        source: Box<ToroidalError>,
    },
    #[error("solved coefficient at element {v} is not a Laurent polynomial")]
    NonPolynomialCoefficient { v: usize },
    #[error("solved coefficient at element {v} is not invariant in the second block")]
    NonInvariantCoefficient { v: usize },
    #[error("decomposition does not rebuild the class at cone {sigma}")]
    ReconstructionFailure { sigma: usize },
    #[error("product rule mismatch for pair ({v}, {v2}) at element {w}")]
    MultiplicationMismatch { v: usize, v2: usize, w: usize },
    #[error("pulled-back product at element {v} is not a valid class")]
    PullbackInvalid { v: usize },
    #[error("pulled-back product at element {v} decomposes with wrong coefficients")]
    ProductCoefficientMismatch { v: usize },
    #[error("indicator coefficient family at element {v} does not round-trip")]
    IndicatorMismatch { v: usize },
    #[error("vector is not dominant")]
    NotDominant,
    #[error("vector is not regular anti-dominant")]
    NotAntidominantRegular,
    #[error("one-parameter subgroup pairs to zero against a dual generator of cone {cone}")]
    NonGenericPsg { cone: usize },
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Gkm(#[from] GkmError),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeType {
    ClosedOrbitLeft,
    ClosedOrbitRight,
    SimpleWall,
    InteriorWall,
}

impl EdgeType {
    pub fn tag(self) -> &'static str {
        match self {
            EdgeType::ClosedOrbitLeft => "closed_orbit_left",
            EdgeType::ClosedOrbitRight => "closed_orbit_right",
            EdgeType::SimpleWall => "simple_wall",
            EdgeType::InteriorWall => "interior_wall",
        }
    }
}

/// Fixed-point graph of the embedding: vertices are `(w1, w2, sigma)` in
/// sigma-major order, edge characters live in the doubled character lattice
/// and are stored at the lower endpoint.
pub struct ToroidalGraph {
    pub graph: GkmGraph,
    pub vertices: Vec<(usize, usize, usize)>,
    pub edge_types: Vec<EdgeType>,
    pub m: usize,
    pub group_size: usize,
}

impl ToroidalGraph {
    pub fn vertex_index(&self, w1: usize, w2: usize, si: usize) -> usize {
        si * self.group_size * self.group_size + w1 * self.group_size + w2
    }
}

fn cat(a: &[Coord], b: &[Coord]) -> LatticeVector {
    a.iter().chain(b.iter()).copied().collect()
}

fn validate_chamber_fan(g: &WeylGroup, fan_plus: &Fan) -> Result<(), ToroidalError> {
    let n = g.datum.rank();
    if fan_plus.ambient_rank != n || fan_plus.dim != n {
        return Err(ToroidalError::NotChamberFan);
    }
    for c in fan_plus.maximal_cones() {
        for r in &c.rays {
            if !g.datum.is_dominant_coweight(r) {
                return Err(ToroidalError::NotChamberFan);
            }
        }
    }
    Ok(())
}

/// All `m * |W|^2` fixed points `(w1, w2, sigma)`, ordered by cone index
/// first, then both group indices.
pub fn fixed_points(
    g: &WeylGroup,
    fan_plus: &Fan,
) -> Result<Vec<(usize, usize, usize)>, ToroidalError> {
    validate_chamber_fan(g, fan_plus)?;
    let m = fan_plus.maximal_cones().len();
    let k = g.len();
    let mut out = Vec::with_capacity(m * k * k);
    for si in 0..m {
        for w1 in 0..k {
            for w2 in 0..k {
                out.push((w1, w2, si));
            }
        }
    }
    Ok(out)
}

/// Simple roots whose orthogonal hyperplane meets the cone in a facet.
pub fn simple_wall_indices(g: &WeylGroup, sigma: &Cone) -> Vec<usize> {
    let n = g.datum.rank();
    (0..g.datum.semisimple_rank())
        .filter(|&i| {
            let alpha = g.datum.simple_root(i);
            let on: Vec<LatticeVector> = sigma
                .rays
                .iter()
                .filter(|r| lattice::pairing(&alpha, r).expect("rank") == 0)
                .cloned()
                .collect();
            let rk = if on.is_empty() {
                0
            } else {
                lattice::rational_rank(&IntMat::from_rows(&on))
            };
            rk == n - 1
        })
        .collect()
}

/// The three curve families over a chamber fan, spread over all group
/// translates: closed-orbit curves for every positive root on each side,
/// diagonal curves along simple roots orthogonal to cone facets, and curves
/// across interior walls.
pub fn toroidal_gkm_graph(g: &WeylGroup, fan_plus: &Fan) -> Result<ToroidalGraph, ToroidalError> {
    let vertices = fixed_points(g, fan_plus)?;
    let n = g.datum.rank();
    let k = g.len();
    let maxes: Vec<Cone> = fan_plus.maximal_cones().into_iter().cloned().collect();
    let m = maxes.len();
    let zeros = vec![0i64; n];
    let idx = |si: usize, w1: usize, w2: usize| si * k * k + w1 * k + w2;

    let mut edges = Vec::new();
    let mut types: BTreeMap<(usize, usize), EdgeType> = BTreeMap::new();
    let push = |edges: &mut Vec<GkmEdge>,
                    types: &mut BTreeMap<(usize, usize), EdgeType>,
                    a: usize,
                    b: usize,
                    character: LatticeVector,
                    t: EdgeType| {
        types.insert((a, b), t);
        edges.push(GkmEdge { a, b, character });
    };

    for (pri, root) in g.positive_roots().iter().enumerate() {
        let s = g.reflection_element(pri);
        let alpha = root.root.clone();
        for w1 in 0..k {
            let w1p = g.mult(w1, s);
            if w1 < w1p {
                let chi = cat(&lattice::vec_neg(&g.act_m(w1, &alpha)), &zeros);
                for si in 0..m {
                    for w2 in 0..k {
                        push(
                            &mut edges,
                            &mut types,
                            idx(si, w1, w2),
                            idx(si, w1p, w2),
                            chi.clone(),
                            EdgeType::ClosedOrbitLeft,
                        );
                    }
                }
            }
        }
        for w2 in 0..k {
            let w2p = g.mult(w2, s);
            if w2 < w2p {
                let chi = cat(&zeros, &g.act_m(w2, &alpha));
                for si in 0..m {
                    for w1 in 0..k {
                        push(
                            &mut edges,
                            &mut types,
                            idx(si, w1, w2),
                            idx(si, w1, w2p),
                            chi.clone(),
                            EdgeType::ClosedOrbitRight,
                        );
                    }
                }
            }
        }
    }

    for (si, sigma) in maxes.iter().enumerate() {
        for i in simple_wall_indices(g, sigma) {
            let alpha = g.datum.simple_root(i);
            let s = g.simple(i);
            for w1 in 0..k {
                let w1p = g.mult(w1, s);
                if w1 < w1p {
                    for w2 in 0..k {
                        let w2p = g.mult(w2, s);
                        let chi = cat(
                            &lattice::vec_neg(&g.act_m(w1, &alpha)),
                            &g.act_m(w2, &alpha),
                        );
                        push(
                            &mut edges,
                            &mut types,
                            idx(si, w1, w2),
                            idx(si, w1p, w2p),
                            chi,
                            EdgeType::SimpleWall,
                        );
                    }
                }
            }
        }
    }

    for wall in fan::walls(fan_plus)? {
        let away = fan::wall_normal_away_from(fan_plus, &wall, wall.i);
        for w1 in 0..k {
            for w2 in 0..k {
                let chi = cat(&g.act_m(w1, &away), &lattice::vec_neg(&g.act_m(w2, &away)));
                push(
                    &mut edges,
                    &mut types,
                    idx(wall.i, w1, w2),
                    idx(wall.j, w1, w2),
                    chi,
                    EdgeType::InteriorWall,
                );
            }
        }
    }

    let labels = vertices
        .iter()
        .map(|&(w1, w2, si)| format!("({w1},{w2},{si})"))
        .collect();
    let graph = GkmGraph::new(2 * n, labels, edges)?;
    let edge_types = graph.edges.iter().map(|e| types[&(e.a, e.b)]).collect();
    Ok(ToroidalGraph {
        graph,
        vertices,
        edge_types,
        m,
        group_size: k,
    })
}

/// Apply a pair of elements blockwise to a doubled-lattice polynomial.
pub fn pair_act(g: &WeylGroup, w1: usize, w2: usize, f: &LaurentPoly) -> LaurentPoly {
    let n = g.datum.rank();
    let m1 = &g.elements[w1].mat_m;
    let m2 = &g.elements[w2].mat_m;
    f.embed_exponents(2 * n, |e| {
        cat(&m1.apply(&e[..n]), &m2.apply(&e[n..]))
    })
}

/// Act on the first block only.
pub fn block_act_u(g: &WeylGroup, w: usize, f: &LaurentPoly) -> LaurentPoly {
    let n = g.datum.rank();
    let m = &g.elements[w].mat_m;
    f.embed_exponents(2 * n, |e| cat(&m.apply(&e[..n]), &e[n..]))
}

/// Act on the second block only.
pub fn block_act_v(g: &WeylGroup, w: usize, f: &LaurentPoly) -> LaurentPoly {
    let n = g.datum.rank();
    let m = &g.elements[w].mat_m;
    f.embed_exponents(2 * n, |e| cat(&e[..n], &m.apply(&e[n..])))
}

/// Reindex plain block exponents `(p, q)` to `(p, p + q)`.
pub fn uv_from_chi(f: &LaurentPoly) -> LaurentPoly {
    let n = f.rank() / 2;
    f.embed_exponents(2 * n, |e| cat(&e[..n], &lattice::vec_add(&e[..n], &e[n..])))
}

/// Inverse reindexing `(p, q) -> (p, q - p)`.
pub fn chi_from_uv(f: &LaurentPoly) -> LaurentPoly {
    let n = f.rank() / 2;
    f.embed_exponents(2 * n, |e| cat(&e[..n], &lattice::vec_sub(&e[n..], &e[..n])))
}

/// Embed a second-block polynomial into the doubled lattice.
pub fn embed_v(n: usize, f: &LaurentPoly) -> LaurentPoly {
    let zeros = vec![0i64; n];
    f.embed_exponents(2 * n, |e| cat(&zeros, e))
}

/// Embed a first-block polynomial into the doubled lattice.
pub fn embed_u(n: usize, f: &LaurentPoly) -> LaurentPoly {
    let zeros = vec![0i64; n];
    f.embed_exponents(2 * n, |e| cat(e, &zeros))
}

/// Congruence membership of a full vertex tuple.
pub fn tt_membership(tg: &ToroidalGraph, values: &[LaurentPoly]) -> Result<(), ToroidalError> {
    gkm::gkm_membership(&tg.graph, values)?;
    Ok(())
}

pub fn is_tt_class(tg: &ToroidalGraph, values: &[LaurentPoly]) -> bool {
    tt_membership(tg, values).is_ok()
}

/// Extract the base family `f_sigma = a_(sigma,1,1)` after checking that
/// every vertex value is the blockwise translate of its base value.
pub fn reduce_invariant(
    g: &WeylGroup,
    tg: &ToroidalGraph,
    values: &[LaurentPoly],
) -> Result<Vec<LaurentPoly>, ToroidalError> {
    let total = tg.vertices.len();
    if values.len() != total {
        return Err(ToroidalError::CountMismatch {
            expected: total,
            got: values.len(),
        });
    }
    let e = g.identity();
    let reduced: Vec<LaurentPoly> = (0..tg.m)
        .map(|si| values[tg.vertex_index(e, e, si)].clone())
        .collect();
    for (v, &(w1, w2, si)) in tg.vertices.iter().enumerate() {
        if values[v] != pair_act(g, w1, w2, &reduced[si]) {
            return Err(ToroidalError::NotInvariant { vertex: v });
        }
    }
    Ok(reduced)
}

/// Spread a base family over all vertices by the blockwise action; the
/// reflection and wall conditions are the precondition, and the full tuple
/// is certified against the graph congruences afterwards.
pub fn expand_invariant(
    g: &WeylGroup,
    fan_plus: &Fan,
    reduced: &[LaurentPoly],
) -> Result<Vec<LaurentPoly>, ToroidalError> {
    gg_membership(g, fan_plus, reduced)?;
    let tg = toroidal_gkm_graph(g, fan_plus)?;
    let values: Vec<LaurentPoly> = tg
        .vertices
        .iter()
        .map(|&(w1, w2, si)| pair_act(g, w1, w2, &reduced[si]))
        .collect();
    tt_membership(&tg, &values)?;
    Ok(values)
}

fn check_reduced_shape(
    g: &WeylGroup,
    fan_plus: &Fan,
    reduced: &[LaurentPoly],
) -> Result<(), ToroidalError> {
    let m = fan_plus.maximal_cones().len();
    if reduced.len() != m {
        return Err(ToroidalError::CountMismatch {
            expected: m,
            got: reduced.len(),
        });
    }
    let n2 = 2 * g.datum.rank();
    for f in reduced {
        if f.rank() != n2 {
            return Err(ToroidalError::RankMismatch {
                expected: n2,
                got: f.rank(),
            });
        }
    }
    Ok(())
}

/// Membership conditions for a reduced family: for each cone, the diagonal
/// reflection congruence along every facet-orthogonal simple root; across
/// each interior wall, congruence modulo the doubled wall character. Both
/// the plain-block form and the (u, v) form with the one-sided action are
/// evaluated and must agree.
pub fn gg_membership(
    g: &WeylGroup,
    fan_plus: &Fan,
    reduced: &[LaurentPoly],
) -> Result<(), ToroidalError> {
    validate_chamber_fan(g, fan_plus)?;
    check_reduced_shape(g, fan_plus, reduced)?;
    let maxes = fan_plus.maximal_cones();
    for (si, sigma) in maxes.iter().enumerate() {
        for i in simple_wall_indices(g, sigma) {
            let alpha = g.datum.simple_root(i);
            let s = g.simple(i);
            let diff = reduced[si].sub(&pair_act(g, s, s, &reduced[si]));
            let chi_mod = cat(&lattice::vec_neg(&alpha), &alpha);
            let ok_chi = laurent::divisible_by_one_minus_exp(&diff, &chi_mod)?;
            let fuv = uv_from_chi(&reduced[si]);
            let diff_uv = fuv.sub(&block_act_v(g, s, &fuv));
            let uv_mod = cat(&lattice::vec_neg(&alpha), &vec![0i64; alpha.len()]);
            let ok_uv = laurent::divisible_by_one_minus_exp(&diff_uv, &uv_mod)?;
            if ok_chi != ok_uv {
                return Err(ToroidalError::FormMismatch {
                    sigma: si,
                    simple: i,
                });
            }
            if !ok_chi {
                let residue = laurent::one_minus_exp_residue(&diff, &chi_mod)?;
                return Err(ToroidalError::SimpleCondition {
                    sigma: si,
                    simple: i,
                    residue: Box::new(residue),
                });
            }
        }
    }
    for wall in fan::walls(fan_plus)? {
        let chi = &wall.normal;
        let diff = reduced[wall.i].sub(&reduced[wall.j]);
        let chi_mod = cat(&lattice::vec_neg(chi), chi);
        let ok_chi = laurent::divisible_by_one_minus_exp(&diff, &chi_mod)?;
        let uv_mod = cat(&lattice::vec_neg(chi), &vec![0i64; chi.len()]);
        let ok_uv = laurent::divisible_by_one_minus_exp(&uv_from_chi(&diff), &uv_mod)?;
        assert_eq!(ok_chi, ok_uv, "unimodular reindexing preserves divisibility");
        if !ok_chi {
            let residue = laurent::one_minus_exp_residue(&diff, &chi_mod)?;
            return Err(ToroidalError::WallCondition {
                i: wall.i,
                j: wall.j,
                residue: Box::new(residue),
            });
        }
    }
    Ok(())
}

pub fn is_gg_class(g: &WeylGroup, fan_plus: &Fan, reduced: &[LaurentPoly]) -> bool {
    gg_membership(g, fan_plus, reduced).is_ok()
}

/// Solve for second-block basis coefficients of a doubled-lattice
/// polynomial in (u, v) exponents: coefficients are Laurent in the first
/// block and invariant in the second.
pub fn steinberg_decompose_vblock(
    g: &WeylGroup,
    basis: &SteinbergBasis,
    f: &LaurentPoly,
) -> Result<Vec<LaurentPoly>, ToroidalError> {
    let n = g.datum.rank();
    let k = g.len();
    if f.rank() != 2 * n {
        return Err(ToroidalError::RankMismatch {
            expected: 2 * n,
            got: f.rank(),
        });
    }
    let a: Vec<Vec<LaurentPoly>> = (0..k)
        .map(|u| {
            (0..k)
                .map(|v| embed_v(n, &g.act_poly(u, &basis.polys[v])))
                .collect()
        })
        .collect();
    let b: Vec<LaurentPoly> = (0..k).map(|u| block_act_v(g, u, f)).collect();
    let (nums, den) = laurent::bareiss_solve(&a, &b)?;
    let mut coeffs = Vec::with_capacity(k);
    for (v, num) in nums.iter().enumerate() {
        let c = laurent::exact_div(num, &den)
            .ok_or(ToroidalError::NonPolynomialCoefficient { v })?;
        for i in 0..g.datum.semisimple_rank() {
            if block_act_v(g, g.simple(i), &c) != c {
                return Err(ToroidalError::NonInvariantCoefficient { v });
            }
        }
        coeffs.push(c);
    }
    let mut rebuilt = LaurentPoly::zero(2 * n);
    for (c, fv) in coeffs.iter().zip(&a[0]) {
        rebuilt = rebuilt.add(&c.mul(fv));
    }
    if rebuilt != *f {
        return Err(ToroidalError::ReconstructionFailure { sigma: usize::MAX });
    }
    Ok(coeffs)
}

/// `prod (1 - e^{alpha(u)})` over the descent set of `v`, in (u, v)
/// exponents on the doubled lattice.
pub fn descent_factor(g: &WeylGroup, v: usize) -> LaurentPoly {
    let n = g.datum.rank();
    let zeros = vec![0i64; n];
    let mut out = LaurentPoly::one(2 * n);
    for &i in g.right_descents(v).iter() {
        out = out.mul(&LaurentPoly::one_minus_exp(&cat(
            &g.datum.simple_root(i),
            &zeros,
        )));
    }
    out
}

/// Coefficients of a reduced class over the basis: entry `[v][sigma]` is
/// the (u, v)-coordinate coefficient after exact division by the descent
/// factor of `v`.
pub struct Decomposition {
    pub coefficients: Vec<Vec<LaurentPoly>>,
}

/// Chamber congruences of a first-block coefficient family: reflection
/// congruence along facet-orthogonal simple roots and wall congruences,
/// with all moduli `1 - e^{chi(u)}`.
pub fn aplus_membership_ublock(
    g: &WeylGroup,
    fan_plus: &Fan,
    family: &[LaurentPoly],
) -> Result<(), ToroidalError> {
    check_reduced_shape(g, fan_plus, family)?;
    let n = g.datum.rank();
    let zeros = vec![0i64; n];
    let maxes = fan_plus.maximal_cones();
    for (si, sigma) in maxes.iter().enumerate() {
        for i in simple_wall_indices(g, sigma) {
            let alpha = g.datum.simple_root(i);
            let diff = family[si].sub(&block_act_u(g, g.simple(i), &family[si]));
            let m = cat(&alpha, &zeros);
            if !laurent::divisible_by_one_minus_exp(&diff, &m)? {
                let residue = laurent::one_minus_exp_residue(&diff, &m)?;
                return Err(ToroidalError::SimpleCondition {
                    sigma: si,
                    simple: i,
                    residue: Box::new(residue),
                });
            }
        }
    }
    for wall in fan::walls(fan_plus)? {
        let m = cat(&wall.normal, &zeros);
        let diff = family[wall.i].sub(&family[wall.j]);
        if !laurent::divisible_by_one_minus_exp(&diff, &m)? {
            let residue = laurent::one_minus_exp_residue(&diff, &m)?;
            return Err(ToroidalError::WallCondition {
                i: wall.i,
                j: wall.j,
                residue: Box::new(residue),
            });
        }
    }
    Ok(())
}

/// Decompose a valid reduced class over the basis: per cone, solve for
/// second-block coefficients, divide each by the descent factor of its
/// index, certify the chamber congruences of every coefficient family, and
/// re-check the reconstruction after division.
pub fn decompose(
    g: &WeylGroup,
    basis: &SteinbergBasis,
    fan_plus: &Fan,
    reduced: &[LaurentPoly],
) -> Result<Decomposition, ToroidalError> {
    gg_membership(g, fan_plus, reduced)?;
    let n = g.datum.rank();
    let k = g.len();
    let m = reduced.len();
    let zeros = vec![0i64; n];
    let mut coefficients: Vec<Vec<LaurentPoly>> = vec![Vec::with_capacity(m); k];
    for (si, f) in reduced.iter().enumerate() {
        let fuv = uv_from_chi(f);
        let raw = steinberg_decompose_vblock(g, basis, &fuv)?;
        for (v, mut c) in raw.into_iter().enumerate() {
            for &i in g.right_descents(v).iter() {
                let chi = cat(&g.datum.simple_root(i), &zeros);
                c = laurent::divide_by_one_minus_exp(&c, &chi).map_err(|err| match err {
                    LaurentError::NotDivisible { residue, .. } => ToroidalError::NotDivisible {
                        v,
                        sigma: si,
                        residue,
                    },
                    other => ToroidalError::Laurent(other),
                })?;
            }
            coefficients[v].push(c);
        }
    }
    for (v, family) in coefficients.iter().enumerate() {
        aplus_membership_ublock(g, fan_plus, family).map_err(|e| {
            ToroidalError::CoefficientFamily {
                v,
                source: Box::new(e),
            }
        })?;
    }
    for si in 0..m {
        let mut rebuilt = LaurentPoly::zero(2 * n);
        for v in 0..k {
            rebuilt = rebuilt.add(
                &descent_factor(g, v)
                    .mul(&coefficients[v][si])
                    .mul(&embed_v(n, &basis.polys[v])),
            );
        }
        if rebuilt != uv_from_chi(&reduced[si]) {
            return Err(ToroidalError::ReconstructionFailure { sigma: si });
        }
    }
    Ok(Decomposition { coefficients })
}

/// Assemble the reduced class with the given (u, v)-coordinate coefficient
/// families; inverse to `decompose` on valid data.
pub fn build_class(
    g: &WeylGroup,
    basis: &SteinbergBasis,
    fan_plus: &Fan,
    coefficients: &[Vec<LaurentPoly>],
) -> Result<Vec<LaurentPoly>, ToroidalError> {
    let n = g.datum.rank();
    let k = g.len();
    let m = fan_plus.maximal_cones().len();
    if coefficients.len() != k {
        return Err(ToroidalError::CountMismatch {
            expected: k,
            got: coefficients.len(),
        });
    }
    let mut reduced = Vec::with_capacity(m);
    for si in 0..m {
        let mut f = LaurentPoly::zero(2 * n);
        for v in 0..k {
            let family = &coefficients[v];
            if family.len() != m {
                return Err(ToroidalError::CountMismatch {
                    expected: m,
                    got: family.len(),
                });
            }
            f = f.add(
                &descent_factor(g, v)
                    .mul(&family[si])
                    .mul(&embed_v(n, &basis.polys[v])),
            );
        }
        reduced.push(chi_from_uv(&f));
    }
    Ok(reduced)
}

/// Pointwise product of reduced classes.
pub fn multiply(f: &[LaurentPoly], h: &[LaurentPoly]) -> Vec<LaurentPoly> {
    f.iter().zip(h).map(|(a, b)| a.mul(b)).collect()
}

/// The basis class of `v`: every cone carries the descent factor times the
/// embedded basis polynomial, in plain block coordinates.
pub fn basis_class(
    g: &WeylGroup,
    basis: &SteinbergBasis,
    fan_plus: &Fan,
    v: usize,
) -> Vec<LaurentPoly> {
    let n = g.datum.rank();
    let m = fan_plus.maximal_cones().len();
    let f = chi_from_uv(&descent_factor(g, v).mul(&embed_v(n, &basis.polys[v])));
    vec![f; m]
}

/// Verify the product rule: the decomposition of a product of two basis
/// classes has, at each element `w`, the structure-constant coefficient
/// scaled by the two descent-overlap factors.
pub fn multstr_check(
    g: &WeylGroup,
    basis: &SteinbergBasis,
    fan_plus: &Fan,
    v: usize,
    v2: usize,
) -> Result<(), ToroidalError> {
    let n = g.datum.rank();
    let k = g.len();
    let m = fan_plus.maximal_cones().len();
    let zeros = vec![0i64; n];
    let product = multiply(
        &basis_class(g, basis, fan_plus, v),
        &basis_class(g, basis, fan_plus, v2),
    );
    let dec = decompose(g, basis, fan_plus, &product)?;
    let a = weyl::structure_constants(g, basis, v, v2)?;
    let i1 = g.right_descents(v);
    let i2 = g.right_descents(v2);
    let union: BTreeSet<usize> = i1.union(&i2).copied().collect();
    for w in 0..k {
        let jw = g.right_descents(w);
        let mut expected = LaurentPoly::zero(2 * n);
        if jw.is_subset(&union) && !a[w].is_zero() {
            let mut factor = LaurentPoly::one(2 * n);
            for &i in i1.intersection(&i2) {
                factor = factor.mul(&LaurentPoly::one_minus_exp(&cat(
                    &g.datum.simple_root(i),
                    &zeros,
                )));
            }
            for &i in union.difference(&jw) {
                factor = factor.mul(&LaurentPoly::one_minus_exp(&cat(
                    &g.datum.simple_root(i),
                    &zeros,
                )));
            }
            expected = factor.mul(&embed_v(n, &a[w]));
        }
        for si in 0..m {
            if dec.coefficients[w][si] != expected {
                return Err(ToroidalError::MultiplicationMismatch { v, v2, w });
            }
        }
    }
    Ok(())
}

/// The one-cone instance over the full dominant chamber.
pub fn wonderful_ring(g: &WeylGroup) -> Result<Fan, ToroidalError> {
    Ok(weyl::wonderful_chamber(&g.datum)?)
}

/// Candidate piecewise exponentials on the chamber fan used as a generating
/// family: global characters plus one bent function per interior wall,
/// filtered through the compatibility check.
fn plp_generators(fan_plus: &Fan) -> Result<Vec<Vec<LaurentPoly>>, ToroidalError> {
    let n = fan_plus.ambient_rank;
    let maxes = fan_plus.maximal_cones();
    let m = maxes.len();
    let mut out = vec![vec![LaurentPoly::one(n); m]];
    for j in 0..n {
        let mut e = vec![0i64; n];
        e[j] = 1;
        out.push(vec![LaurentPoly::exp(&e); m]);
    }
    for wall in fan::walls(fan_plus)? {
        let h: Vec<LatticeVector> = maxes
            .iter()
            .map(|sigma| {
                let p = sigma.interior_point();
                if lattice::pairing(&wall.normal, &p).expect("rank") > 0 {
                    wall.normal.clone()
                } else {
                    vec![0i64; n]
                }
            })
            .collect();
        if let Ok(values) = gkm::line_bundle_class(fan_plus, &h) {
            out.push(values);
        }
    }
    Ok(out)
}

/// Structural consistency of the relative description: pulled-back basis
/// classes times first-block piecewise functions are valid classes whose
/// decompositions are the expected indicators, and indicator coefficient
/// families rebuild and re-decompose to themselves.
pub fn relwond_check(
    g: &WeylGroup,
    basis: &SteinbergBasis,
    fan_plus: &Fan,
) -> Result<(), ToroidalError> {
    let n = g.datum.rank();
    let k = g.len();
    let m = fan_plus.maximal_cones().len();
    let gens = plp_generators(fan_plus)?;
    for v in 0..k {
        let base = basis_class(g, basis, fan_plus, v);
        for p in &gens {
            let embedded: Vec<LaurentPoly> = p
                .iter()
                .map(|ps| chi_from_uv(&embed_u(n, ps)))
                .collect();
            let product = multiply(&base, &embedded);
            if !is_gg_class(g, fan_plus, &product) {
                return Err(ToroidalError::PullbackInvalid { v });
            }
            let dec = decompose(g, basis, fan_plus, &product)?;
            for w in 0..k {
                for si in 0..m {
                    let expected = if w == v {
                        embed_u(n, &p[si])
                    } else {
                        LaurentPoly::zero(2 * n)
                    };
                    if dec.coefficients[w][si] != expected {
                        return Err(ToroidalError::ProductCoefficientMismatch { v });
                    }
                }
            }
        }
    }
    for v in 0..k {
        let mut coefficients = vec![vec![LaurentPoly::zero(2 * n); m]; k];
        coefficients[v] = vec![LaurentPoly::one(2 * n); m];
        let class = build_class(g, basis, fan_plus, &coefficients)?;
        if !is_gg_class(g, fan_plus, &class) {
            return Err(ToroidalError::IndicatorMismatch { v });
        }
        let dec = decompose(g, basis, fan_plus, &class)?;
        if dec.coefficients != coefficients {
            return Err(ToroidalError::IndicatorMismatch { v });
        }
    }
    Ok(())
}

/// Rank and basis labels of the ordinary K-ring: free abelian of rank
/// `m * |W|^2`, cross-checked against the fixed-point count.
pub struct OrdinaryK {
    pub rank: usize,
    /// `(basis element, cone, residue element)` labels.
    pub basis: Vec<(usize, usize, usize)>,
}

pub fn ordinary_k(g: &WeylGroup, fan_plus: &Fan) -> Result<OrdinaryK, ToroidalError> {
    let points = fixed_points(g, fan_plus)?;
    let k = g.len();
    let m = fan_plus.maximal_cones().len();
    let mut basis = Vec::with_capacity(m * k * k);
    for v in 0..k {
        for si in 0..m {
            for u in 0..k {
                basis.push((v, si, u));
            }
        }
    }
    assert_eq!(basis.len(), points.len(), "rank equals fixed point count");
    Ok(OrdinaryK {
        rank: basis.len(),
        basis,
    })
}

/// A dominant one-parameter subgroup for the toric picture induces one for
/// the embedding: scale it past the bound computed from the dual generators
/// of the full fan against the anti-dominant side. The second component
/// defaults to minus the sum of positive coroots; any regular anti-dominant
/// vector may be supplied instead.
pub fn transfer_psg_to_toroidal(
    g: &WeylGroup,
    full_fan: &Fan,
    nu0: &[Coord],
    nu2_choice: Option<&[Coord]>,
) -> Result<(LatticeVector, LatticeVector), ToroidalError> {
    if !g.datum.is_dominant_coweight(nu0) {
        return Err(ToroidalError::NotDominant);
    }
    let nu2 = match nu2_choice {
        Some(v) => {
            let regular = (0..g.datum.semisimple_rank())
                .all(|i| lattice::pairing(&g.datum.simple_root(i), v).expect("rank") < 0);
            if !regular {
                return Err(ToroidalError::NotAntidominantRegular);
            }
            v.to_vec()
        }
        None => {
            let mut acc = vec![0i64; g.datum.rank()];
            for r in g.positive_roots() {
                acc = lattice::vec_sub(&acc, &r.coroot);
            }
            acc
        }
    };
    let mut bound: i64 = 0;
    for (ci, sigma) in full_fan.maximal_cones().iter().enumerate() {
        for mu in fan::dual_generators(sigma)? {
            let d = lattice::pairing(&mu, nu0).expect("rank");
            if d == 0 {
                return Err(ToroidalError::NonGenericPsg { cone: ci });
            }
            for w in 0..g.len() {
                let num = lattice::pairing(&mu, &g.act_n(w, &nu2)).expect("rank");
                bound = bound.max(num.abs() / d.abs());
            }
        }
    }
    let nu1 = lattice::vec_scale(nu0, bound + 1);
    Ok((nu1, nu2))
}

/// The difference of chamber representatives recovers a generic toric
/// subgroup from an embedding one.
pub fn transfer_psg_to_toric(g: &WeylGroup, nu1: &[Coord], nu2: &[Coord]) -> LatticeVector {
    let (_, dom) = weyl::dominant_representative(g, nu1);
    let (_, anti) = weyl::antidominant_representative(g, nu2);
    lattice::vec_sub(&dom, &anti)
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct OrientationReport {
    pub acyclic: bool,
    pub sinks: Vec<usize>,
    pub max_out_degree: usize,
    pub max_vertices: Vec<usize>,
    pub expected_max: usize,
    pub degree_sum_matches: bool,
    pub ok: bool,
}

/// Orient the embedding graph by a pair of subgroups and check the cell
/// structure signals: acyclicity, a unique sink, a unique vertex of maximal
/// out-degree equal to the space dimension, and the degree sum.
pub fn orientation_check(
    g: &WeylGroup,
    tg: &ToroidalGraph,
    nu1: &[Coord],
    nu2: &[Coord],
) -> Result<OrientationReport, ToroidalError> {
    let nu = cat(nu1, nu2);
    let sources = gkm::orient(&tg.graph, &nu)?;
    let degs = gkm::out_degrees(&tg.graph, &sources);
    let acyclic = gkm::toposort(&tg.graph, &sources).is_some();
    let sinks: Vec<usize> = (0..tg.graph.len()).filter(|&x| degs[x] == 0).collect();
    let max_out_degree = degs.iter().copied().max().unwrap_or(0);
    let max_vertices: Vec<usize> = (0..tg.graph.len())
        .filter(|&x| degs[x] == max_out_degree)
        .collect();
    let expected_max = g.datum.semisimple_rank() + 2 * g.positive_roots().len();
    let degree_sum_matches = degs.iter().sum::<usize>() == tg.graph.edges.len();
    let ok = acyclic
        && sinks.len() == 1
        && max_vertices.len() == 1
        && max_out_degree == expected_max
        && degree_sum_matches;
    Ok(OrientationReport {
        acyclic,
        sinks,
        max_out_degree,
        max_vertices,
        expected_max,
        degree_sum_matches,
        ok,
    })
}
