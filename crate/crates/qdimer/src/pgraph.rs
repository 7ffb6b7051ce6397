//! Planar bipartite ciliated graphs given by rotation systems.
//!
//! Rotations are listed counterclockwise at black vertices and clockwise at
//! white vertices. A cilium is a corner index `c`: it sits between rotation
//! positions `c` and `c + 1`, and the half-edge at position `c + 1` comes
//! first in the vertex's linear order. Faces are traversed with the face on
//! the left, so bounded faces come out counterclockwise.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("graph is not planar: V - E + F = {0}, expected 2")]
    NotPlanar(i64),
    #[error("graph is not 2-connected: vertex {0} is a cut point")]
    NotTwoConnected(usize),
    #[error("harmonic ciliation degenerate after {0} attempts")]
    Degenerate(usize),
    #[error("unbalanced colour classes: {black} black, {white} white")]
    Unbalanced { black: usize, white: usize },
    #[error("json: {0}")]
    Json(String),
}

pub type GraphResult<T> = Result<T, GraphError>;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub black: usize,
    pub white: usize,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.black {
            self.white
        } else {
            self.black
        }
    }
}

/// A face: corners `(vertex, corner index)` in traversal order, and the edge
/// leaving each corner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub corners: Vec<(usize, usize)>,
    pub edges: Vec<usize>,
    pub is_outer: bool,
}

impl Face {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.corners.iter().map(|c| c.0)
    }
}

#[derive(Clone, Debug)]
pub struct CiliatedPlanarGraph {
    colors: Vec<Color>,
    edges: Vec<Edge>,
    rotation: Vec<Vec<usize>>,
    cilium: Vec<usize>,
    outer_corner: Option<(usize, usize)>,
    positions: Option<Vec<[f64; 2]>>,
    pos_black: Vec<usize>,
    pos_white: Vec<usize>,
    faces: Vec<Face>,
    outer_face: usize,
    corner_face: Vec<Vec<usize>>,
    black_order: Vec<usize>,
    white_order: Vec<usize>,
    order_index: Vec<usize>,
}

impl PartialEq for CiliatedPlanarGraph {
    fn eq(&self, o: &Self) -> bool {
        self.colors == o.colors
            && self.edges == o.edges
            && self.rotation == o.rotation
            && self.cilium == o.cilium
            && self.outer_face == o.outer_face
    }
}

impl CiliatedPlanarGraph {
    /// Builds and validates a graph. `edges[i] = (black, white)`.
    pub fn new(
        colors: Vec<Color>,
        edges: Vec<(usize, usize)>,
        rotation: Vec<Vec<usize>>,
        cilium: Vec<usize>,
        outer_corner: Option<(usize, usize)>,
    ) -> GraphResult<Self> {
        let nv = colors.len();
        let inv = |m: String| GraphError::Invalid(m);
        if nv == 0 {
            return Err(inv("no vertices".into()));
        }
        let nb = colors.iter().filter(|c| **c == Color::Black).count();
        if nb * 2 != nv {
            return Err(GraphError::Unbalanced {
                black: nb,
                white: nv - nb,
            });
        }
        if rotation.len() != nv || cilium.len() != nv {
            return Err(inv("rotation and cilium must list every vertex".into()));
        }
        let mut es = Vec::with_capacity(edges.len());
        for (i, &(b, w)) in edges.iter().enumerate() {
            if b >= nv || w >= nv {
                return Err(inv(format!("edge {i} has an unknown endpoint")));
            }
            if colors[b] != Color::Black || colors[w] != Color::White {
                return Err(inv(format!(
                    "edge {i} must join a black vertex to a white vertex"
                )));
            }
            es.push(Edge { black: b, white: w });
        }
        let ne = es.len();
        let mut pos_black = vec![usize::MAX; ne];
        let mut pos_white = vec![usize::MAX; ne];
        for (v, rot) in rotation.iter().enumerate() {
            if rot.is_empty() {
                return Err(inv(format!("vertex {v} is isolated")));
            }
            for (p, &e) in rot.iter().enumerate() {
                if e >= ne {
                    return Err(inv(format!(
                        "rotation at vertex {v} names unknown edge {e}"
                    )));
                }
                let slot = if colors[v] == Color::Black {
                    if es[e].black != v {
                        return Err(inv(format!(
                            "rotation at vertex {v} lists non-incident edge {e}"
                        )));
                    }
                    &mut pos_black[e]
                } else {
                    if es[e].white != v {
                        return Err(inv(format!(
                            "rotation at vertex {v} lists non-incident edge {e}"
                        )));
                    }
                    &mut pos_white[e]
                };
                if *slot != usize::MAX {
                    return Err(inv(format!("rotation at vertex {v} repeats edge {e}")));
                }
                *slot = p;
            }
        }
        for e in 0..ne {
            if pos_black[e] == usize::MAX || pos_white[e] == usize::MAX {
                return Err(inv(format!("edge {e} missing from a rotation")));
            }
        }
        for (v, &c) in cilium.iter().enumerate() {
            if c >= rotation[v].len() {
                return Err(inv(format!("cilium corner {c} out of range at vertex {v}")));
            }
        }
        // Connectivity.
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &rotation[v] {
                let u = es[e].other(v);
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(inv(format!("graph is disconnected at vertex {v}")));
        }
        let mut black_order = Vec::new();
        let mut white_order = Vec::new();
        let mut order_index = vec![0; nv];
        for (v, c) in colors.iter().enumerate() {
            match c {
                Color::Black => {
                    order_index[v] = black_order.len();
                    black_order.push(v);
                }
                Color::White => {
                    order_index[v] = white_order.len();
                    white_order.push(v);
                }
            }
        }
        let mut g = CiliatedPlanarGraph {
            colors,
            edges: es,
            rotation,
            cilium,
            outer_corner,
            positions: None,
            pos_black,
            pos_white,
            faces: Vec::new(),
            outer_face: 0,
            corner_face: Vec::new(),
            black_order,
            white_order,
            order_index,
        };
        g.compute_faces()?;
        Ok(g)
    }

    fn compute_faces(&mut self) -> GraphResult<()> {
        let nv = self.colors.len();
        let mut corner_face: Vec<Vec<usize>> = (0..nv)
            .map(|v| vec![usize::MAX; self.rotation[v].len()])
            .collect();
        let mut faces = Vec::new();
        for v0 in 0..nv {
            for c0 in 0..self.rotation[v0].len() {
                if corner_face[v0][c0] != usize::MAX {
                    continue;
                }
                let fid = faces.len();
                let mut corners = Vec::new();
                let mut fedges = Vec::new();
                let (mut v, mut c) = (v0, c0);
                loop {
                    if corner_face[v][c] != usize::MAX {
                        return Err(GraphError::Invalid(format!(
                            "face traversal revisits corner ({v},{c})"
                        )));
                    }
                    corner_face[v][c] = fid;
                    corners.push((v, c));
                    let e = self.out_edge(v, c);
                    fedges.push(e);
                    let u = self.edges[e].other(v);
                    c = self.arrival_corner(u, e);
                    v = u;
                    if (v, c) == (v0, c0) {
                        break;
                    }
                }
                faces.push(Face {
                    corners,
                    edges: fedges,
                    is_outer: false,
                });
            }
        }
        let chi = nv as i64 - self.edges.len() as i64 + faces.len() as i64;
        if chi != 2 {
            return Err(GraphError::NotPlanar(chi));
        }
        let outer = match self.outer_corner {
            Some((v, c)) => {
                if v >= nv || c >= self.rotation[v].len() {
                    return Err(GraphError::Invalid(format!(
                        "outer corner ({v},{c}) out of range"
                    )));
                }
                corner_face[v][c]
            }
            None => {
                let mut best = 0;
                for (i, f) in faces.iter().enumerate() {
                    if f.len() > faces[best].len() {
                        best = i;
                    }
                }
                best
            }
        };
        faces[outer].is_outer = true;
        for f in &faces {
            if f.len() % 2 != 0 {
                return Err(GraphError::Invalid("odd face length".into()));
            }
        }
        self.faces = faces;
        self.outer_face = outer;
        self.corner_face = corner_face;
        Ok(())
    }

    /// The half-edge leaving corner `c` of `v` in face order.
    fn out_edge(&self, v: usize, c: usize) -> usize {
        let rot = &self.rotation[v];
        match self.colors[v] {
            Color::Black => rot[c],
            Color::White => rot[(c + 1) % rot.len()],
        }
    }

    /// The corner of `u` entered when arriving along `e`.
    fn arrival_corner(&self, u: usize, e: usize) -> usize {
        let d = self.rotation[u].len();
        match self.colors[u] {
            Color::Black => (self.pos_black[e] + d - 1) % d,
            Color::White => self.pos_white[e],
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.colors.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// `N`, the number of black (equivalently white) vertices.
    pub fn n_half(&self) -> usize {
        self.black_order.len()
    }

    pub fn color(&self, v: usize) -> Color {
        self.colors[v]
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotation[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotation[v].len()
    }

    pub fn cilium(&self, v: usize) -> usize {
        self.cilium[v]
    }

    pub fn cilia(&self) -> &[usize] {
        &self.cilium
    }

    pub fn outer_corner(&self) -> Option<(usize, usize)> {
        self.outer_corner
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    pub fn with_positions(mut self, p: Vec<[f64; 2]>) -> Self {
        assert_eq!(p.len(), self.colors.len());
        self.positions = Some(p);
        self
    }

    /// Black vertices in index order `b_1..b_N`.
    pub fn blacks(&self) -> &[usize] {
        &self.black_order
    }

    /// White vertices in index order `w_1..w_N`.
    pub fn whites(&self) -> &[usize] {
        &self.white_order
    }

    /// Position of `v` within its colour class.
    pub fn class_index(&self, v: usize) -> usize {
        self.order_index[v]
    }

    /// Rotation position of edge `e` at endpoint `v`.
    pub fn position_of(&self, v: usize, e: usize) -> usize {
        match self.colors[v] {
            Color::Black => self.pos_black[e],
            Color::White => self.pos_white[e],
        }
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn outer_face_index(&self) -> usize {
        self.outer_face
    }

    pub fn internal_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(|(_, f)| !f.is_outer)
    }

    /// Face containing corner `c` of `v`.
    pub fn face_of_corner(&self, v: usize, c: usize) -> usize {
        self.corner_face[v][c]
    }

    /// Number of cilia pointing into face `f`.
    pub fn inward_cilia(&self, f: usize) -> usize {
        self.faces[f]
            .corners
            .iter()
            .filter(|(v, c)| self.cilium[*v] == *c)
            .count()
    }

    /// Incident edges of `v` in linear order, starting after the cilium.
    pub fn linear_order(&self, v: usize) -> Vec<usize> {
        let rot = &self.rotation[v];
        let d = rot.len();
        let c = self.cilium[v];
        (1..=d).map(|i| rot[(c + i) % d]).collect()
    }

    /// Rank of edge `e` in the linear order at its endpoint `v`.
    pub fn linear_rank(&self, v: usize, e: usize) -> usize {
        let d = self.rotation[v].len();
        let p = self.position_of(v, e);
        (p + d - self.cilium[v] - 1) % d
    }

    /// Same graph with the cilia replaced.
    pub fn with_cilia(&self, cilium: Vec<usize>) -> GraphResult<Self> {
        for (v, &c) in cilium.iter().enumerate() {
            if c >= self.rotation[v].len() {
                return Err(GraphError::Invalid(format!(
                    "cilium corner {c} out of range at vertex {v}"
                )));
            }
        }
        if cilium.len() != self.colors.len() {
            return Err(GraphError::Invalid("cilium must list every vertex".into()));
        }
        let mut g = self.clone();
        g.cilium = cilium;
        Ok(g)
    }

    pub fn is_positive_ciliation(&self) -> bool {
        self.internal_faces()
            .all(|(i, _)| self.inward_cilia(i).is_multiple_of(2))
    }

    pub fn is_trivial_ciliation(&self) -> bool {
        self.internal_faces()
            .all(|(i, f)| self.inward_cilia(i) + 1 == f.len() / 2)
    }

    /// Places both cilia of every dimer edge into the face on the left of
    /// the edge oriented black to white. `dimer` lists the edges of the cover.
    pub fn positive_ciliation_from_dimer(&self, dimer: &[usize]) -> GraphResult<Self> {
        let mut cil = vec![usize::MAX; self.num_vertices()];
        for &e in dimer {
            let Edge { black, white } = self.edges[e];
            if cil[black] != usize::MAX || cil[white] != usize::MAX {
                return Err(GraphError::Invalid(
                    "dimer cover uses a vertex twice".into(),
                ));
            }
            cil[black] = self.pos_black[e];
            cil[white] = self.pos_white[e];
        }
        if cil.contains(&usize::MAX) {
            return Err(GraphError::Invalid("dimer cover misses a vertex".into()));
        }
        self.with_cilia(cil)
    }

    /// Moves the cilium of `v` past one half-edge, forward (`+1`) or back.
    pub fn rotate_cilium(&self, v: usize, forward: bool) -> Self {
        let d = self.rotation[v].len();
        let mut g = self.clone();
        g.cilium[v] = if forward {
            (g.cilium[v] + 1) % d
        } else {
            (g.cilium[v] + d - 1) % d
        };
        g
    }

    /// Mirror image: every cyclic order is reversed and corners follow.
    pub fn reflect(&self) -> Self {
        let flip = |d: usize, c: usize| (2 * d - 2 - c) % d;
        let rotation: Vec<Vec<usize>> = self
            .rotation
            .iter()
            .map(|r| r.iter().rev().copied().collect())
            .collect();
        let cilium = self
            .cilium
            .iter()
            .enumerate()
            .map(|(v, &c)| flip(self.rotation[v].len(), c))
            .collect();
        let outer = (
            self.faces[self.outer_face].corners[0].0,
            self.faces[self.outer_face].corners[0].1,
        );
        let outer_corner = Some((outer.0, flip(self.rotation[outer.0].len(), outer.1)));
        let edges = self.edges.iter().map(|e| (e.black, e.white)).collect();
        let mut g =
            CiliatedPlanarGraph::new(self.colors.clone(), edges, rotation, cilium, outer_corner)
                .expect("reflection of a valid graph is valid");
        if let Some(p) = &self.positions {
            g.positions = Some(p.iter().map(|[x, y]| [-x, *y]).collect());
        }
        g
    }

    /// Whether removing any single vertex leaves the graph connected.
    pub fn check_two_connected(&self) -> GraphResult<()> {
        let nv = self.num_vertices();
        if nv <= 2 {
            return Ok(());
        }
        for cut in 0..nv {
            let start = if cut == 0 { 1 } else { 0 };
            let mut seen = vec![false; nv];
            seen[cut] = true;
            seen[start] = true;
            let mut stack = vec![start];
            let mut count = 1;
            while let Some(v) = stack.pop() {
                for &e in &self.rotation[v] {
                    let u = self.edges[e].other(v);
                    if !seen[u] {
                        seen[u] = true;
                        count += 1;
                        stack.push(u);
                    }
                }
            }
            if count != nv - 1 {
                return Err(GraphError::NotTwoConnected(cut));
            }
        }
        Ok(())
    }

    /// A trivial ciliation built from a harmonic function with random
    /// rational conductances. Retries up to `MAX_HARMONIC_TRIES` times.
    pub fn trivial_ciliation<R: Rng>(&self, rng: &mut R) -> GraphResult<Self> {
        self.check_two_connected()?;
        for _ in 0..MAX_HARMONIC_TRIES {
            if let Some(cil) = self.harmonic_cilia(rng) {
                let g = self.with_cilia(cil)?;
                if g.is_trivial_ciliation() {
                    return Ok(g);
                }
            }
        }
        Err(GraphError::Degenerate(MAX_HARMONIC_TRIES))
    }

    fn harmonic_cilia<R: Rng>(&self, rng: &mut R) -> Option<Vec<usize>> {
        let nv = self.num_vertices();
        let outer = &self.faces[self.outer_face];
        let (p0, c0) = outer.corners[0];
        let (p1, c1) = outer.corners[1 % outer.corners.len()];
        if p0 == p1 {
            return None;
        }
        // Sub-faces as cyclic vertex lists tagged with the original corner of
        // each vertex. Faces longer than four are fanned into quads.
        let mut subfaces: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut links: Vec<(usize, usize)> =
            self.edges.iter().map(|e| (e.black, e.white)).collect();
        for f in &self.faces {
            let cs = &f.corners;
            let l = cs.len();
            if f.is_outer || l <= 4 {
                subfaces.push(cs.clone());
                continue;
            }
            for j in 0..l / 2 - 1 {
                let a = 2 * j + 1;
                subfaces.push(vec![cs[0], cs[a], cs[a + 1], cs[a + 2]]);
                if a + 2 < l - 1 {
                    links.push((cs[0].0, cs[a + 2].0));
                }
            }
        }
        let mut rand_cond = || {
            let p: u32 = rng.gen_range(1..=1_000_000);
            let q: u32 = rng.gen_range(1..=1_000_000);
            BigRational::new(BigInt::from(p), BigInt::from(q))
        };
        let conds: Vec<BigRational> = links.iter().map(|_| rand_cond()).collect();
        let f = dirichlet_solve(nv, &links, &conds, p0, p1)?;
        for &(a, b) in &links {
            if f[a] == f[b] {
                return None;
            }
        }
        let mut cil = vec![usize::MAX; nv];
        cil[p0] = c0;
        cil[p1] = c1;
        for sf in &subfaces {
            let l = sf.len();
            if l < 3 {
                continue;
            }
            let imin = (0..l).min_by(|&i, &j| f[sf[i].0].cmp(&f[sf[j].0]))?;
            let imax = (0..l).max_by(|&i, &j| f[sf[i].0].cmp(&f[sf[j].0]))?;
            let mut i = (imin + 1) % l;
            let mut right = true;
            while i != imin {
                if i == imax {
                    right = false;
                } else {
                    let (v, c) = sf[i];
                    let hit = matches!(
                        (self.colors[v], right),
                        (Color::White, false) | (Color::Black, true)
                    );
                    if hit {
                        if v == p0 || v == p1 || cil[v] != usize::MAX {
                            return None;
                        }
                        cil[v] = c;
                    }
                }
                i = (i + 1) % l;
            }
        }
        if cil.contains(&usize::MAX) {
            return None;
        }
        Some(cil)
    }

    /// Cilia pointing in a fixed direction at each colour, using vertex
    /// positions. Angles are in radians.
    pub fn ciliate_by_direction(&self, white_angle: f64, black_angle: f64) -> GraphResult<Self> {
        let pos = self
            .positions
            .as_ref()
            .ok_or_else(|| GraphError::Invalid("graph has no positions".into()))?;
        let mut cil = Vec::with_capacity(self.num_vertices());
        for v in 0..self.num_vertices() {
            let target = match self.colors[v] {
                Color::White => white_angle,
                Color::Black => black_angle,
            };
            cil.push(self.corner_containing(pos, v, target));
        }
        self.with_cilia(cil)
    }

    fn corner_containing(&self, pos: &[[f64; 2]], v: usize, target: f64) -> usize {
        let rot = &self.rotation[v];
        let d = rot.len();
        if d == 1 {
            return 0;
        }
        let ang = |e: usize| {
            let u = self.edges[e].other(v);
            (pos[u][1] - pos[v][1]).atan2(pos[u][0] - pos[v][0])
        };
        let tau = std::f64::consts::TAU;
        let ccw = |from: f64, to: f64| (to - from).rem_euclid(tau);
        for c in 0..d {
            let (a, b) = match self.colors[v] {
                Color::Black => (ang(rot[c]), ang(rot[(c + 1) % d])),
                Color::White => (ang(rot[(c + 1) % d]), ang(rot[c])),
            };
            if ccw(a, target) < ccw(a, b) {
                return c;
            }
        }
        0
    }

    /// Builds rotations from vertex positions; requires a straight-line
    /// planar drawing without parallel edges.
    pub fn from_positions(
        colors: Vec<Color>,
        edges: Vec<(usize, usize)>,
        positions: Vec<[f64; 2]>,
    ) -> GraphResult<Self> {
        let nv = colors.len();
        let mut inc: Vec<Vec<(f64, usize)>> = vec![Vec::new(); nv];
        for (i, &(b, w)) in edges.iter().enumerate() {
            if b >= nv || w >= nv {
                return Err(GraphError::Invalid(format!(
                    "edge {i} has an unknown endpoint"
                )));
            }
            let a_b = (positions[w][1] - positions[b][1]).atan2(positions[w][0] - positions[b][0]);
            let a_w = (positions[b][1] - positions[w][1]).atan2(positions[b][0] - positions[w][0]);
            inc[b].push((a_b, i));
            inc[w].push((a_w, i));
        }
        let rotation: Vec<Vec<usize>> = inc
            .into_iter()
            .enumerate()
            .map(|(v, mut l)| {
                l.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
                if colors[v] == Color::White {
                    l.reverse();
                }
                l.into_iter().map(|(_, e)| e).collect()
            })
            .collect();
        let cil = vec![0; nv];
        let mut g = CiliatedPlanarGraph::new(
            colors.clone(),
            edges.clone(),
            rotation.clone(),
            cil.clone(),
            None,
        )?;
        g.positions = Some(positions.clone());
        // Outer corner: the west-facing corner of the leftmost vertex.
        let mut left = 0;
        for v in 1..nv {
            let (p, q) = (positions[v], positions[left]);
            if p[0] < q[0] - 1e-12 || ((p[0] - q[0]).abs() <= 1e-12 && p[1] < q[1]) {
                left = v;
            }
        }
        let oc = g.corner_containing(&positions, left, std::f64::consts::PI);
        let mut g = CiliatedPlanarGraph::new(colors, edges, rotation, cil, Some((left, oc)))?;
        g.positions = Some(positions);
        Ok(g)
    }

    /// Cilia all pointing into the outer face, where each vertex touches it.
    pub fn outward_cilia(&self) -> Option<Self> {
        let mut cil = vec![usize::MAX; self.num_vertices()];
        for &(v, c) in &self.faces[self.outer_face].corners {
            if cil[v] == usize::MAX {
                cil[v] = c;
            }
        }
        if cil.contains(&usize::MAX) {
            return None;
        }
        self.with_cilia(cil).ok()
    }

    pub fn to_json(&self) -> GraphJson {
        let vertices = self
            .colors
            .iter()
            .enumerate()
            .map(|(id, &color)| VertexJson { id, color })
            .collect();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(id, e)| EdgeJson {
                id,
                black: e.black,
                white: e.white,
            })
            .collect();
        let rotation = self
            .rotation
            .iter()
            .enumerate()
            .map(|(v, r)| (v.to_string(), r.clone()))
            .collect();
        let cilium = self
            .cilium
            .iter()
            .enumerate()
            .map(|(v, &c)| (v.to_string(), c))
            .collect();
        let oc = self.faces[self.outer_face].corners[0];
        GraphJson {
            vertices,
            edges,
            rotation,
            cilium,
            outer_corner: Some([oc.0, oc.1]),
            positions: self.positions.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("graph serializes")
    }

    pub fn from_json(j: &GraphJson) -> GraphResult<Self> {
        let mut ids: Vec<usize> = j.vertices.iter().map(|v| v.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != j.vertices.len() {
            return Err(GraphError::Json("duplicate vertex id".into()));
        }
        let vix: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut colors = vec![Color::Black; ids.len()];
        for v in &j.vertices {
            colors[vix[&v.id]] = v.color;
        }
        let mut eids: Vec<usize> = j.edges.iter().map(|e| e.id).collect();
        eids.sort_unstable();
        eids.dedup();
        if eids.len() != j.edges.len() {
            return Err(GraphError::Json("duplicate edge id".into()));
        }
        let eix: BTreeMap<usize, usize> = eids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut edges = vec![(0, 0); eids.len()];
        for e in &j.edges {
            let b = *vix.get(&e.black).ok_or_else(|| {
                GraphError::Json(format!("edge {}: unknown black vertex {}", e.id, e.black))
            })?;
            let w = *vix.get(&e.white).ok_or_else(|| {
                GraphError::Json(format!("edge {}: unknown white vertex {}", e.id, e.white))
            })?;
            edges[eix[&e.id]] = (b, w);
        }
        let parse_vid = |k: &str| -> GraphResult<usize> {
            let id: usize = k
                .parse()
                .map_err(|_| GraphError::Json(format!("bad vertex key `{k}`")))?;
            vix.get(&id)
                .copied()
                .ok_or_else(|| GraphError::Json(format!("unknown vertex `{k}`")))
        };
        let mut rotation = vec![Vec::new(); ids.len()];
        for (k, r) in &j.rotation {
            let v = parse_vid(k)?;
            rotation[v] = r
                .iter()
                .map(|e| {
                    eix.get(e).copied().ok_or_else(|| {
                        GraphError::Json(format!("rotation of {k}: unknown edge {e}"))
                    })
                })
                .collect::<GraphResult<_>>()?;
        }
        let mut cilium = vec![usize::MAX; ids.len()];
        for (k, &c) in &j.cilium {
            cilium[parse_vid(k)?] = c;
        }
        if let Some(v) = cilium.iter().position(|&c| c == usize::MAX) {
            return Err(GraphError::Json(format!("vertex {} has no cilium", ids[v])));
        }
        let outer = match j.outer_corner {
            Some([v, c]) => Some((
                *vix.get(&v)
                    .ok_or_else(|| GraphError::Json(format!("outer corner: unknown vertex {v}")))?,
                c,
            )),
            None => None,
        };
        let mut g = CiliatedPlanarGraph::new(colors, edges, rotation, cilium, outer)?;
        if let Some(p) = &j.positions {
            if p.len() != ids.len() {
                return Err(GraphError::Json("positions must list every vertex".into()));
            }
            g.positions = Some(p.clone());
        }
        Ok(g)
    }

    pub fn from_json_str(s: &str) -> GraphResult<Self> {
        let j: GraphJson = serde_json::from_str(s).map_err(|e| GraphError::Json(e.to_string()))?;
        Self::from_json(&j)
    }
}

impl fmt::Display for CiliatedPlanarGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "graph: {} vertices, {} edges, {} faces",
            self.num_vertices(),
            self.num_edges(),
            self.faces.len()
        )
    }
}

pub const MAX_HARMONIC_TRIES: usize = 20;

/// Solves for `f` harmonic off `{p0, p1}` with `f(p0) = 0`, `f(p1) = 1`.
#[allow(clippy::needless_range_loop)]
fn dirichlet_solve(
    nv: usize,
    links: &[(usize, usize)],
    conds: &[BigRational],
    p0: usize,
    p1: usize,
) -> Option<Vec<BigRational>> {
    let interior: Vec<usize> = (0..nv).filter(|&v| v != p0 && v != p1).collect();
    let mut idx = vec![usize::MAX; nv];
    for (i, &v) in interior.iter().enumerate() {
        idx[v] = i;
    }
    let m = interior.len();
    let mut a = vec![vec![BigRational::zero(); m + 1]; m];
    for (&(x, y), c) in links.iter().zip(conds) {
        for (s, t) in [(x, y), (y, x)] {
            if idx[s] == usize::MAX {
                continue;
            }
            let r = idx[s];
            a[r][r] += c;
            if idx[t] != usize::MAX {
                a[r][idx[t]] -= c;
            } else if t == p1 {
                a[r][m] += c;
            }
        }
    }
    for col in 0..m {
        let piv = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = BigRational::one() / &a[col][col];
        for k in col..=m {
            a[col][k] = &a[col][k] * &inv;
        }
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for k in col..=m {
                    let t = &factor * &a[col][k];
                    a[r][k] -= t;
                }
            }
        }
    }
    let mut f = vec![BigRational::zero(); nv];
    f[p1] = BigRational::one();
    for (i, &v) in interior.iter().enumerate() {
        f[v] = a[i][m].clone();
        if f[v].is_negative() {
            return None;
        }
    }
    Some(f)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    pub color: Color,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: usize,
    pub black: usize,
    pub white: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    pub rotation: BTreeMap<String, Vec<usize>>,
    pub cilium: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_corner: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Black 0 on the left, white 1 on the right; edge 0 on top, edge 1 below.
    fn bigon(cb: usize, cw: usize) -> CiliatedPlanarGraph {
        CiliatedPlanarGraph::new(
            vec![Color::Black, Color::White],
            vec![(0, 1), (0, 1)],
            vec![vec![0, 1], vec![0, 1]],
            vec![cb, cw],
            Some((0, 0)),
        )
        .unwrap()
    }

    #[test]
    fn bigon_faces_and_cilia() {
        let g = bigon(0, 0);
        assert_eq!(g.faces().len(), 2);
        let (inner, f) = g.internal_faces().next().unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(g.inward_cilia(inner), 0);
        // Counterclockwise traversal from the black vertex runs along the
        // bottom edge first.
        assert_eq!(f.corners[0], (0, 1));
        assert_eq!(f.edges, vec![1, 0]);
        assert_eq!(g.linear_order(0), vec![1, 0]);
        assert_eq!(g.linear_order(1), vec![1, 0]);
        assert!(g.is_positive_ciliation());
        assert!(g.is_trivial_ciliation());
        let mixed = bigon(0, 1);
        assert_eq!(mixed.inward_cilia(inner), 1);
        assert!(!mixed.is_positive_ciliation());
    }

    #[test]
    fn positive_from_dimer_on_bigon() {
        let g = bigon(0, 0);
        for e in 0..2 {
            let p = g.positive_ciliation_from_dimer(&[e]).unwrap();
            assert!(p.is_positive_ciliation());
        }
    }

    #[test]
    fn rotate_and_reflect_roundtrip() {
        let g = bigon(0, 1);
        assert_eq!(g.rotate_cilium(0, true).rotate_cilium(0, true), g);
        assert_eq!(g.rotate_cilium(1, true).rotate_cilium(1, false), g);
        assert_eq!(g.reflect().reflect(), g);
    }

    fn square() -> CiliatedPlanarGraph {
        // b0 (0,0), w1 (1,0), b2 (1,1), w3 (0,1)
        CiliatedPlanarGraph::from_positions(
            vec![Color::Black, Color::White, Color::Black, Color::White],
            vec![(0, 1), (2, 1), (2, 3), (0, 3)],
            vec![[0.0, 0.0], [1.0, 0.1], [0.9, 1.1], [-0.1, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn four_cycle_faces() {
        let g = square();
        assert_eq!(g.faces().len(), 2);
        let (_, f) = g.internal_faces().next().unwrap();
        assert_eq!(f.len(), 4);
        let total: usize = (0..g.faces().len()).map(|i| g.inward_cilia(i)).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn harmonic_trivial_ciliation_on_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = square().trivial_ciliation(&mut rng).unwrap();
        let (i, _) = g.internal_faces().next().unwrap();
        assert_eq!(g.inward_cilia(i), 1);
    }

    #[test]
    fn json_roundtrip() {
        let g = square();
        let s = g.to_json_string();
        let h = CiliatedPlanarGraph::from_json_str(&s).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn rejects_bad_graphs() {
        let r = CiliatedPlanarGraph::new(
            vec![Color::Black, Color::Black],
            vec![],
            vec![vec![], vec![]],
            vec![0, 0],
            None,
        );
        assert!(matches!(r, Err(GraphError::Unbalanced { .. })));
        let r = CiliatedPlanarGraph::new(
            vec![Color::Black, Color::White],
            vec![(0, 1)],
            vec![vec![0], vec![0]],
            vec![1, 0],
            None,
        );
        assert!(matches!(r, Err(GraphError::Invalid(_))));
    }
}
