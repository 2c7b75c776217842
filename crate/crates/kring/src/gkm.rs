//! GKM graphs and their congruence rings.
//!
//! A graph records torus-fixed points and invariant curves with their
//! characters; a class is a tuple of Laurent polynomials, one per vertex,
//! and membership in the ring means every edge congruence
//! `a_i = a_j mod (1 - e^chi)` holds. Piecewise Laurent functions on a fan
//! are the same ring in a different presentation, compared here through
//! quotient-lattice projections.

use crate::fan::{self, Fan, FanError};
use crate::lattice::{self, Coord, IntMat, LatticeVector};
use crate::laurent::{self, Coeff, LaurentPoly};
use crate::weyl::{orbit_fan, WeylError, WeylGroup};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GkmError {
    #[error("expected {expected} vertex values, got {got}")]
    VertexCountMismatch { expected: usize, got: usize },
    #[error("value rank {got} does not match torus rank {expected}")]
    RankMismatch { expected: usize, got: usize },
    #[error("edge endpoint out of range")]
    BadEndpoint,
    #[error("zero character on edge ({0}, {1})")]
    ZeroEdgeCharacter(usize, usize),
    #[error("more than one edge between {0} and {1}")]
    ParallelEdge(usize, usize),
    #[error("proportional edge characters at vertex {0}")]
    ProportionalCharacters(usize),
    #[error("congruence fails on edge ({a}, {b})")]
    Congruence {
        a: usize,
        b: usize,
        residue: Box<LaurentPoly>,
    },
    #[error("piecewise values disagree between cones {i} and {j}")]
    FaceMismatch { i: usize, j: usize },
    #[error("linear data disagrees on the wall between cones {i} and {j}")]
    IncompatibleLinear { i: usize, j: usize },
    #[error("vertex action is not a permutation")]
    NotAPermutation,
    #[error("orientation vector vanishes on edge ({a}, {b})")]
    NonGenericOrientation { a: usize, b: usize },
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

/// An edge between vertices `a < b`; `character` is the tangent character
/// at `a`, its negative is the tangent character at `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GkmEdge {
    pub a: usize,
    pub b: usize,
    pub character: LatticeVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GkmGraph {
    pub torus_rank: usize,
    pub labels: Vec<String>,
    pub edges: Vec<GkmEdge>,
}

impl GkmGraph {
    /// Validates the structural invariants: nonzero characters, at most one
    /// edge per vertex pair, pairwise non-proportional characters at every
    /// vertex. Edges with `a > b` are flipped (negating the character).
    pub fn new(
        torus_rank: usize,
        labels: Vec<String>,
        edges: Vec<GkmEdge>,
    ) -> Result<Self, GkmError> {
        let n = labels.len();
        let mut canon = Vec::with_capacity(edges.len());
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        for e in edges {
            if e.a >= n || e.b >= n || e.a == e.b {
                return Err(GkmError::BadEndpoint);
            }
            if e.character.len() != torus_rank {
                return Err(GkmError::RankMismatch {
                    expected: torus_rank,
                    got: e.character.len(),
                });
            }
            let (a, b, character) = if e.a < e.b {
                (e.a, e.b, e.character)
            } else {
                (e.b, e.a, lattice::vec_neg(&e.character))
            };
            if lattice::is_zero_vec(&character) {
                return Err(GkmError::ZeroEdgeCharacter(a, b));
            }
            if !seen.insert((a, b)) {
                return Err(GkmError::ParallelEdge(a, b));
            }
            canon.push(GkmEdge { a, b, character });
        }
        canon.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
        let graph = GkmGraph {
            torus_rank,
            labels,
            edges: canon,
        };
        for v in 0..n {
            let chars: Vec<LatticeVector> = graph
                .edges_at(v)
                .map(|(_, e)| lattice::primitivize(&e.character).expect("nonzero"))
                .collect();
            for i in 0..chars.len() {
                for j in (i + 1)..chars.len() {
                    if chars[i] == chars[j] || chars[i] == lattice::vec_neg(&chars[j]) {
                        return Err(GkmError::ProportionalCharacters(v));
                    }
                }
            }
        }
        Ok(graph)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn edges_at(&self, v: usize) -> impl Iterator<Item = (usize, &GkmEdge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.a == v || e.b == v)
    }

    /// Tangent character of edge `ei` at one of its endpoints.
    pub fn tangent_character(&self, ei: usize, vertex: usize) -> LatticeVector {
        let e = &self.edges[ei];
        assert!(vertex == e.a || vertex == e.b, "vertex not on edge");
        if vertex == e.a {
            e.character.clone()
        } else {
            lattice::vec_neg(&e.character)
        }
    }

    pub fn other_end(&self, ei: usize, vertex: usize) -> usize {
        let e = &self.edges[ei];
        if vertex == e.a {
            e.b
        } else {
            e.a
        }
    }
}

/// The GKM graph of a complete-enough toric picture: one vertex per maximal
/// cone, one edge per wall, labeled by the wall normal oriented away from
/// the lower-indexed cone.
pub fn toric_gkm_graph(fan: &Fan) -> Result<GkmGraph, GkmError> {
    let maxes = fan.maximal_cones().len();
    let labels = (0..maxes).map(|i| i.to_string()).collect();
    let mut edges = Vec::new();
    for w in fan::walls(fan)? {
        edges.push(GkmEdge {
            a: w.i,
            b: w.j,
            character: fan::wall_normal_away_from(fan, &w, w.i),
        });
    }
    GkmGraph::new(fan.ambient_rank, labels, edges)
}

fn check_values(graph: &GkmGraph, values: &[LaurentPoly]) -> Result<(), GkmError> {
    if values.len() != graph.len() {
        return Err(GkmError::VertexCountMismatch {
            expected: graph.len(),
            got: values.len(),
        });
    }
    for v in values {
        if v.rank() != graph.torus_rank {
            return Err(GkmError::RankMismatch {
                expected: graph.torus_rank,
                got: v.rank(),
            });
        }
    }
    Ok(())
}

/// Edge congruences for a tuple of vertex values; the first failing edge (in
/// edge order) is reported with the canonical residue.
pub fn gkm_membership(graph: &GkmGraph, values: &[LaurentPoly]) -> Result<(), GkmError> {
    check_values(graph, values)?;
    for e in &graph.edges {
        let diff = values[e.a].sub(&values[e.b]);
        if !laurent::divisible_by_one_minus_exp(&diff, &e.character).expect("nonzero character") {
            let residue =
                laurent::one_minus_exp_residue(&diff, &e.character).expect("nonzero character");
            return Err(GkmError::Congruence {
                a: e.a,
                b: e.b,
                residue: Box::new(residue),
            });
        }
    }
    Ok(())
}

pub fn is_gkm_class(graph: &GkmGraph, values: &[LaurentPoly]) -> bool {
    gkm_membership(graph, values).is_ok()
}

/// Per-edge source endpoints under the flow of `nu`: an edge is outgoing at
/// the endpoint whose tangent character pairs strictly negatively.
pub fn orient(graph: &GkmGraph, nu: &[Coord]) -> Result<Vec<usize>, GkmError> {
    let mut sources = Vec::with_capacity(graph.edges.len());
    for e in &graph.edges {
        let p = lattice::pairing(&e.character, nu).expect("rank");
        if p == 0 {
            return Err(GkmError::NonGenericOrientation { a: e.a, b: e.b });
        }
        sources.push(if p < 0 { e.a } else { e.b });
    }
    Ok(sources)
}

pub fn out_degrees(graph: &GkmGraph, sources: &[usize]) -> Vec<usize> {
    let mut d = vec![0usize; graph.len()];
    for &s in sources {
        d[s] += 1;
    }
    d
}

/// Product of `1 - e^chi` over the edges outgoing at the vertex.
pub fn euler_class(graph: &GkmGraph, sources: &[usize], vertex: usize) -> LaurentPoly {
    let mut prod = LaurentPoly::one(graph.torus_rank);
    for (ei, _) in graph.edges_at(vertex) {
        if sources[ei] == vertex {
            prod = prod.mul(&LaurentPoly::one_minus_exp(
                &graph.tangent_character(ei, vertex),
            ));
        }
    }
    prod
}

/// Topological order of the oriented graph, lowest vertex index first among
/// ready vertices; `None` when the orientation has a cycle.
pub fn toposort(graph: &GkmGraph, sources: &[usize]) -> Option<Vec<usize>> {
    let n = graph.len();
    let mut indeg = vec![0usize; n];
    let mut outs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ei, &s) in sources.iter().enumerate() {
        let t = graph.other_end(ei, s);
        outs[s].push(t);
        indeg[t] += 1;
    }
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&v| indeg[v] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(v)) = heap.pop() {
        order.push(v);
        for &t in &outs[v] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                heap.push(std::cmp::Reverse(t));
            }
        }
    }
    if order.len() == n {
        Some(order)
    } else {
        None
    }
}

/// Canonical image of a polynomial in the group ring of `M / (M cap tau^perp)`
/// for the face spanned by the given rays. The quotient is free because the
/// orthogonal sublattice is saturated.
pub fn face_image(
    ambient_rank: usize,
    face_rays: &[LatticeVector],
    f: &LaurentPoly,
) -> BTreeMap<LatticeVector, Coeff> {
    let perp = if face_rays.is_empty() {
        (0..ambient_rank)
            .map(|i| {
                let mut e = vec![0; ambient_rank];
                e[i] = 1;
                e
            })
            .collect::<Vec<LatticeVector>>()
    } else {
        lattice::integer_kernel(&IntMat::from_rows(face_rays))
    };
    let q = lattice::quotient_lattice(ambient_rank, &perp);
    let mut image: BTreeMap<LatticeVector, Coeff> = BTreeMap::new();
    for (e, &c) in f.terms() {
        let p = q.project(e);
        assert!(p.torsion.is_empty(), "saturated sublattice");
        let entry = image.entry(p.free).or_insert(0);
        *entry = entry.checked_add(c).expect("coefficient overflow");
    }
    image.retain(|_, c| *c != 0);
    image
}

/// Face-compatibility of per-maximal-cone values: for every pair of maximal
/// cones, the two images in the quotient ring of the common face agree.
pub fn is_plp(fan: &Fan, values: &[LaurentPoly]) -> Result<(), GkmError> {
    let maxes = fan.maximal_cones();
    if values.len() != maxes.len() {
        return Err(GkmError::VertexCountMismatch {
            expected: maxes.len(),
            got: values.len(),
        });
    }
    for v in values {
        if v.rank() != fan.ambient_rank {
            return Err(GkmError::RankMismatch {
                expected: fan.ambient_rank,
                got: v.rank(),
            });
        }
    }
    for i in 0..maxes.len() {
        for j in (i + 1)..maxes.len() {
            let shared: Vec<LatticeVector> = maxes[i]
                .rays
                .iter()
                .filter(|r| maxes[j].rays.contains(r))
                .cloned()
                .collect();
            let li = face_image(fan.ambient_rank, &shared, &values[i]);
            let lj = face_image(fan.ambient_rank, &shared, &values[j]);
            if li != lj {
                return Err(GkmError::FaceMismatch { i, j });
            }
        }
    }
    Ok(())
}

/// Piecewise values to a class on the toric GKM graph; on full-dimensional
/// maximal cones this is the identity on values, after the compatibility
/// check.
pub fn gkm_from_plp(fan: &Fan, values: &[LaurentPoly]) -> Result<Vec<LaurentPoly>, GkmError> {
    is_plp(fan, values)?;
    Ok(values.to_vec())
}

/// Class on the toric GKM graph to piecewise values; the wall congruences
/// are required, and the deeper face compatibilities are verified rather
/// than assumed.
pub fn plp_from_gkm(fan: &Fan, values: &[LaurentPoly]) -> Result<Vec<LaurentPoly>, GkmError> {
    let graph = toric_gkm_graph(fan)?;
    gkm_membership(&graph, values)?;
    is_plp(fan, values)?;
    Ok(values.to_vec())
}

/// Exponentiate a wall-compatible piecewise linear function into a
/// piecewise Laurent one.
pub fn line_bundle_class(
    fan: &Fan,
    h: &[LatticeVector],
) -> Result<Vec<LaurentPoly>, GkmError> {
    let maxes = fan.maximal_cones();
    if h.len() != maxes.len() {
        return Err(GkmError::VertexCountMismatch {
            expected: maxes.len(),
            got: h.len(),
        });
    }
    for w in fan::walls(fan)? {
        let diff = lattice::vec_sub(&h[w.i], &h[w.j]);
        for r in &w.face_rays {
            if lattice::pairing(&diff, r).expect("rank") != 0 {
                return Err(GkmError::IncompatibleLinear { i: w.i, j: w.j });
            }
        }
    }
    let values: Vec<LaurentPoly> = h.iter().map(|hi| LaurentPoly::exp(hi)).collect();
    is_plp(fan, &values)?;
    Ok(values)
}

/// A chamber-fan class extended over the whole group orbit.
pub struct Symmetrized {
    pub fan: Fan,
    /// `(element, chamber cone index)` per maximal cone of `fan`.
    pub labels: Vec<(usize, usize)>,
    pub values: Vec<LaurentPoly>,
}

/// Spread a class on the chamber piece over the full orbit fan by acting on
/// values: the cone `w(sigma)` receives `w(a_sigma)`. Membership of the
/// input is a precondition; membership of the output is asserted and its
/// failure reported as a consistency violation.
pub fn symmetrize(
    g: &WeylGroup,
    fan_plus: &Fan,
    a_plus: &[LaurentPoly],
) -> Result<Symmetrized, GkmError> {
    let graph_plus = toric_gkm_graph(fan_plus)?;
    gkm_membership(&graph_plus, a_plus)?;
    let (full_fan, labels) = orbit_fan(g, fan_plus)?;
    let values: Vec<LaurentPoly> = labels
        .iter()
        .map(|&(w, si)| g.act_poly(w, &a_plus[si]))
        .collect();
    let graph = toric_gkm_graph(&full_fan)?;
    gkm_membership(&graph, &values)?;
    Ok(Symmetrized {
        fan: full_fan,
        labels,
        values,
    })
}

/// The permutation of orbit-fan vertices induced by left multiplication.
pub fn orbit_vertex_action(
    g: &WeylGroup,
    labels: &[(usize, usize)],
    w: usize,
) -> Vec<usize> {
    let index: BTreeMap<(usize, usize), usize> = labels
        .iter()
        .enumerate()
        .map(|(k, &l)| (l, k))
        .collect();
    labels
        .iter()
        .map(|&(x, si)| index[&(g.mult(w, x), si)])
        .collect()
}

/// The dot action on classes: the value at `w(x)` is `w` applied to the
/// value at `x`.
pub fn dot_act(
    g: &WeylGroup,
    w: usize,
    values: &[LaurentPoly],
    vertex_action: &[usize],
) -> Result<Vec<LaurentPoly>, GkmError> {
    if vertex_action.len() != values.len() {
        return Err(GkmError::NotAPermutation);
    }
    let mut seen = vec![false; values.len()];
    for &t in vertex_action {
        if t >= values.len() || seen[t] {
            return Err(GkmError::NotAPermutation);
        }
        seen[t] = true;
    }
    let mut out = vec![LaurentPoly::zero(0); values.len()];
    for (x, &t) in vertex_action.iter().enumerate() {
        out[t] = g.act_poly(w, &values[x]);
    }
    Ok(out)
}
