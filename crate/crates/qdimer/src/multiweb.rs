//! n-multiwebs, edge and half-edge colourings, vertex permutations, and
//! split webs.
//!
//! Colour subsets of `{1..n}` are bitmasks (bit `i-1` is colour `i`), which
//! caps `n` at [`MAX_N`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::par;
use crate::pgraph::{CiliatedPlanarGraph, Color, GraphResult};

pub const MAX_N: u32 = 16;

/// Edge multiplicities summing to `n` at every vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Multiweb {
    pub n: u32,
    pub mult: Vec<u32>,
}

impl Multiweb {
    pub fn is_valid(&self, g: &CiliatedPlanarGraph) -> bool {
        if self.mult.len() != g.num_edges() {
            return false;
        }
        (0..g.num_vertices())
            .all(|v| g.rotation(v).iter().map(|&e| self.mult[e]).sum::<u32>() == self.n)
    }

    /// Whether every multiplicity is at most one.
    pub fn is_proper(&self) -> bool {
        self.mult.iter().all(|&m| m <= 1)
    }

    pub fn active_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.mult
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(e, _)| e)
    }
}

fn last_edge_at(g: &CiliatedPlanarGraph) -> Vec<usize> {
    (0..g.num_vertices())
        .map(|v| *g.rotation(v).iter().max().unwrap())
        .collect()
}

struct WebSearch<'a> {
    g: &'a CiliatedPlanarGraph,
    n: u32,
    last: Vec<usize>,
}

impl WebSearch<'_> {
    fn range(&self, e: usize, res: &[u32]) -> Option<(u32, u32)> {
        let ed = self.g.edge(e);
        let mut lo = 0;
        let mut hi = res[ed.black].min(res[ed.white]);
        for v in [ed.black, ed.white] {
            if self.last[v] == e {
                lo = lo.max(res[v]);
                hi = hi.min(res[v]);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    fn recurse(&self, e: usize, res: &mut [u32], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if e == self.g.num_edges() {
            out.push(cur.clone());
            return;
        }
        let Some((lo, hi)) = self.range(e, res) else {
            return;
        };
        let ed = self.g.edge(e);
        for m in lo..=hi {
            res[ed.black] -= m;
            res[ed.white] -= m;
            cur.push(m);
            self.recurse(e + 1, res, cur, out);
            cur.pop();
            res[ed.black] += m;
            res[ed.white] += m;
        }
    }

    fn count(&self, e: usize, res: &mut [u32]) -> u64 {
        if e == self.g.num_edges() {
            return 1;
        }
        let Some((lo, hi)) = self.range(e, res) else {
            return 0;
        };
        let ed = self.g.edge(e);
        let mut total = 0;
        for m in lo..=hi {
            res[ed.black] -= m;
            res[ed.white] -= m;
            total += self.count(e + 1, res);
            res[ed.black] += m;
            res[ed.white] += m;
        }
        total
    }

    /// Prefixes of the first `depth` edges in lexicographic order.
    fn prefixes(&self, depth: usize) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for e in 0..depth.min(self.g.num_edges()) {
            let mut next = Vec::new();
            for p in out {
                let res = self.residual(&p);
                if let Some((lo, hi)) = self.range(e, &res) {
                    for m in lo..=hi {
                        let mut q = p.clone();
                        q.push(m);
                        next.push(q);
                    }
                }
            }
            out = next;
        }
        out
    }

    fn residual(&self, prefix: &[u32]) -> Vec<u32> {
        let mut res = vec![self.n; self.g.num_vertices()];
        for (e, &m) in prefix.iter().enumerate() {
            let ed = self.g.edge(e);
            res[ed.black] -= m;
            res[ed.white] -= m;
        }
        res
    }
}

/// All n-multiwebs in lexicographic order of their multiplicity vectors.
pub fn enumerate_multiwebs(g: &CiliatedPlanarGraph, n: u32) -> Vec<Multiweb> {
    assert!((1..=MAX_N).contains(&n), "n must lie in 1..={MAX_N}");
    let s = WebSearch {
        g,
        n,
        last: last_edge_at(g),
    };
    let depth = g.num_edges().min(4);
    let prefixes = s.prefixes(depth);
    let chunks = par::map_vec(&prefixes, |p| {
        let mut res = s.residual(p);
        let mut cur = p.clone();
        let mut out = Vec::new();
        s.recurse(p.len(), &mut res, &mut cur, &mut out);
        out
    });
    chunks
        .into_iter()
        .flatten()
        .map(|mult| Multiweb { n, mult })
        .collect()
}

/// `|Ω_n|` without materializing the multiwebs.
pub fn count_multiwebs(g: &CiliatedPlanarGraph, n: u32) -> u64 {
    let s = WebSearch {
        g,
        n,
        last: last_edge_at(g),
    };
    let prefixes = s.prefixes(g.num_edges().min(4));
    par::map_vec(&prefixes, |p| {
        let mut res = s.residual(p);
        s.count(p.len(), &mut res)
    })
    .into_iter()
    .sum()
}

/// Dimer covers as sorted edge lists.
pub fn dimer_covers(g: &CiliatedPlanarGraph) -> Vec<Vec<usize>> {
    enumerate_multiwebs(g, 1)
        .into_iter()
        .map(|m| m.active_edges().collect())
        .collect()
}

pub fn full_mask(n: u32) -> u32 {
    if n == 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Calls `f` on each submask of `avail` with exactly `k` bits, ascending.
pub fn for_each_subset(avail: u32, k: u32, mut f: impl FnMut(u32)) {
    if k == 0 {
        f(0);
        return;
    }
    let mut s = avail;
    let mut subs = Vec::new();
    loop {
        if s.count_ones() == k {
            subs.push(s);
        }
        if s == 0 {
            break;
        }
        s = (s - 1) & avail;
    }
    for s in subs.into_iter().rev() {
        f(s);
    }
}

/// Per-edge colour subsets `S_e` (zero on inactive edges).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeColoring {
    pub subsets: Vec<u32>,
}

/// Per-edge pair `(S_e, T_e)`: `S_e` at the white end, `T_e` at the black end.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HalfEdgeColoring {
    pub white: Vec<u32>,
    pub black: Vec<u32>,
}

struct ColoringSearch<'a> {
    g: &'a CiliatedPlanarGraph,
    m: &'a Multiweb,
    active: Vec<usize>,
    last: Vec<usize>,
    full: u32,
}

impl<'a> ColoringSearch<'a> {
    fn new(g: &'a CiliatedPlanarGraph, m: &'a Multiweb) -> Self {
        let active: Vec<usize> = m.active_edges().collect();
        let mut last = vec![usize::MAX; g.num_vertices()];
        for &e in &active {
            let ed = g.edge(e);
            last[ed.black] = e;
            last[ed.white] = e;
        }
        ColoringSearch {
            g,
            m,
            active,
            last,
            full: full_mask(m.n),
        }
    }

    fn run(&self, i: usize, used: &mut [u32], cur: &mut [u32], f: &mut dyn FnMut(&[u32])) {
        if i == self.active.len() {
            f(cur);
            return;
        }
        let e = self.active[i];
        let ed = self.g.edge(e);
        let k = self.m.mult[e];
        let avail = self.full & !used[ed.black] & !used[ed.white];
        let forced = [ed.black, ed.white]
            .into_iter()
            .filter(|&v| self.last[v] == e)
            .map(|v| self.full & !used[v])
            .next();
        let mut visit = |s: u32| {
            if s & avail != s || s.count_ones() != k {
                return;
            }
            for v in [ed.black, ed.white] {
                if self.last[v] == e && (used[v] | s) != self.full {
                    return;
                }
            }
            used[ed.black] |= s;
            used[ed.white] |= s;
            cur[e] = s;
            self.run(i + 1, used, cur, f);
            cur[e] = 0;
            used[ed.black] &= !s;
            used[ed.white] &= !s;
        };
        match forced {
            Some(s) => visit(s),
            None => for_each_subset(avail, k, visit),
        }
    }
}

/// Calls `f` with the subset vector of every edge colouring of `m`.
pub fn for_each_edge_coloring(g: &CiliatedPlanarGraph, m: &Multiweb, mut f: impl FnMut(&[u32])) {
    let s = ColoringSearch::new(g, m);
    let mut used = vec![0u32; g.num_vertices()];
    let mut cur = vec![0u32; g.num_edges()];
    s.run(0, &mut used, &mut cur, &mut f);
}

pub fn enumerate_edge_colorings(g: &CiliatedPlanarGraph, m: &Multiweb) -> Vec<EdgeColoring> {
    let mut out = Vec::new();
    for_each_edge_coloring(g, m, |s| {
        out.push(EdgeColoring {
            subsets: s.to_vec(),
        })
    });
    out
}

pub fn count_edge_colorings(g: &CiliatedPlanarGraph, m: &Multiweb) -> u64 {
    let mut c = 0;
    for_each_edge_coloring(g, m, |_| c += 1);
    c
}

/// Ordered partitions of the colours at `v` among its active edges, in
/// rotation order; each entry maps edge to subset.
fn vertex_partitions(g: &CiliatedPlanarGraph, m: &Multiweb, v: usize) -> Vec<Vec<(usize, u32)>> {
    let edges: Vec<usize> = g
        .rotation(v)
        .iter()
        .copied()
        .filter(|&e| m.mult[e] > 0)
        .collect();
    let mut out = Vec::new();
    fn rec(
        edges: &[usize],
        m: &Multiweb,
        avail: u32,
        cur: &mut Vec<(usize, u32)>,
        out: &mut Vec<Vec<(usize, u32)>>,
    ) {
        let Some((&e, rest)) = edges.split_first() else {
            if avail == 0 {
                out.push(cur.clone());
            }
            return;
        };
        for_each_subset(avail, m.mult[e], |s| {
            cur.push((e, s));
            rec(rest, m, avail & !s, cur, out);
            cur.pop();
        });
    }
    rec(&edges, m, full_mask(m.n), &mut Vec::new(), &mut out);
    out
}

/// Calls `f` on every half-edge colouring of `m`.
pub fn for_each_half_edge_coloring(
    g: &CiliatedPlanarGraph,
    m: &Multiweb,
    mut f: impl FnMut(&HalfEdgeColoring),
) {
    let parts: Vec<Vec<Vec<(usize, u32)>>> = (0..g.num_vertices())
        .map(|v| vertex_partitions(g, m, v))
        .collect();
    let mut c = HalfEdgeColoring {
        white: vec![0; g.num_edges()],
        black: vec![0; g.num_edges()],
    };
    fn rec(
        v: usize,
        g: &CiliatedPlanarGraph,
        parts: &[Vec<Vec<(usize, u32)>>],
        c: &mut HalfEdgeColoring,
        f: &mut dyn FnMut(&HalfEdgeColoring),
    ) {
        if v == parts.len() {
            f(c);
            return;
        }
        for p in &parts[v] {
            for &(e, s) in p {
                match g.color(v) {
                    Color::White => c.white[e] = s,
                    Color::Black => c.black[e] = s,
                }
            }
            rec(v + 1, g, parts, c, f);
        }
    }
    rec(0, g, &parts, &mut c, &mut f);
}

pub fn enumerate_half_edge_colorings(
    g: &CiliatedPlanarGraph,
    m: &Multiweb,
) -> Vec<HalfEdgeColoring> {
    let mut out = Vec::new();
    for_each_half_edge_coloring(g, m, |c| out.push(c.clone()));
    out
}

/// Colours of `mask` in ascending order, 1-based.
pub fn mask_colors(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask >> i & 1 == 1).map(|i| i + 1)
}

/// The permutation read off at `v`: subsets listed in the cilium linear
/// order, each ascending. Returns `(σ_v as 1-based colours, ℓ(σ_v))`.
pub fn vertex_permutation(
    g: &CiliatedPlanarGraph,
    v: usize,
    subset_of: impl Fn(usize) -> u32,
) -> (Vec<usize>, u32) {
    let mut seq = Vec::new();
    for e in g.linear_order(v) {
        seq.extend(mask_colors(subset_of(e)));
    }
    let l = crate::laurent::inversions(&seq);
    (seq, l)
}

/// `ℓ(σ_v)` from masks alone: pairs of colours out of order across subsets.
pub fn vertex_inversions(
    g: &CiliatedPlanarGraph,
    v: usize,
    subset_of: impl Fn(usize) -> u32,
) -> u32 {
    let mut seen: u32 = 0;
    let mut inv = 0;
    for e in g.linear_order(v) {
        let s = subset_of(e);
        for c in mask_colors(s) {
            inv += (seen >> c).count_ones();
        }
        seen |= s;
    }
    inv
}

/// One connected component of a split web with maps back to the ambient graph.
#[derive(Clone, Debug)]
pub struct SplitComponent {
    pub graph: CiliatedPlanarGraph,
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<usize>,
}

/// Splits every edge of multiplicity `m_e` into `m_e` adjacent parallel
/// copies, drops unused edges, and returns the connected components. Cilia
/// keep their corners and never fall between copies.
#[allow(clippy::needless_range_loop)]
pub fn split_graph(g: &CiliatedPlanarGraph, m: &Multiweb) -> GraphResult<Vec<SplitComponent>> {
    let nv = g.num_vertices();
    // Components of the support.
    let mut comp = vec![usize::MAX; nv];
    let mut ncomp = 0;
    for s in 0..nv {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = ncomp;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &e in g.rotation(v) {
                if m.mult[e] == 0 {
                    continue;
                }
                let u = g.edge(e).other(v);
                if comp[u] == usize::MAX {
                    comp[u] = ncomp;
                    stack.push(u);
                }
            }
        }
        ncomp += 1;
    }
    // Faces of the ambient graph merged across unused edges: the region of
    // each subgraph face is a union of such classes.
    let nf = g.faces().len();
    let mut parent: Vec<usize> = (0..nf).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    let mut edge_faces: Vec<Vec<usize>> = vec![Vec::new(); g.num_edges()];
    for (fi, f) in g.faces().iter().enumerate() {
        for &e in &f.edges {
            edge_faces[e].push(fi);
        }
    }
    for (e, fs) in edge_faces.iter().enumerate() {
        if m.mult[e] == 0 && fs.len() == 2 {
            let (a, b) = (find(&mut parent, fs[0]), find(&mut parent, fs[1]));
            parent[a] = b;
        }
    }
    let outer_class = find(&mut parent, g.outer_face_index());

    let mut out = Vec::with_capacity(ncomp);
    for c in 0..ncomp {
        let verts: Vec<usize> = (0..nv).filter(|&v| comp[v] == c).collect();
        let mut vix = BTreeMap::new();
        for (i, &v) in verts.iter().enumerate() {
            vix.insert(v, i);
        }
        let mut edges = Vec::new();
        let mut edge_map = Vec::new();
        let mut copies: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in 0..g.num_edges() {
            let ed = g.edge(e);
            if m.mult[e] == 0 || comp[ed.black] != c {
                continue;
            }
            let mut ids = Vec::new();
            for _ in 0..m.mult[e] {
                ids.push(edges.len());
                edges.push((vix[&ed.black], vix[&ed.white]));
                edge_map.push(e);
            }
            copies.insert(e, ids);
        }
        let mut rotation = Vec::with_capacity(verts.len());
        let mut cilium = Vec::with_capacity(verts.len());
        let mut corner_map: Vec<Vec<usize>> = Vec::with_capacity(verts.len());
        for &v in &verts {
            let rot = g.rotation(v);
            let d = rot.len();
            let mut r = Vec::new();
            let mut last_pos = vec![usize::MAX; d];
            for (p, e) in rot.iter().enumerate() {
                if let Some(ids) = copies.get(e) {
                    r.extend(ids.iter().copied());
                    last_pos[p] = r.len() - 1;
                }
            }
            // Corner c of the ambient vertex lies after the last used
            // half-edge at or before position c.
            let cm: Vec<usize> = (0..d)
                .map(|cc| {
                    (0..d)
                        .map(|back| (cc + d - back) % d)
                        .find(|&p| last_pos[p] != usize::MAX)
                        .map(|p| last_pos[p])
                        .unwrap()
                })
                .collect();
            cilium.push(cm[g.cilium(v)]);
            rotation.push(r);
            corner_map.push(cm);
        }
        let colors: Vec<Color> = verts.iter().map(|&v| g.color(v)).collect();
        let probe = CiliatedPlanarGraph::new(
            colors.clone(),
            edges.clone(),
            rotation.clone(),
            cilium.clone(),
            None,
        )?;
        // The outer face of the component is the one whose corners touch the
        // ambient outer region.
        let mut outer_corner = None;
        'search: for (i, &v) in verts.iter().enumerate() {
            for cc in 0..g.degree(v) {
                let fi = g.face_of_corner(v, cc);
                if find(&mut parent, fi) == outer_class {
                    outer_corner = Some((i, corner_map[i][cc]));
                    break 'search;
                }
            }
        }
        let outer_corner = match outer_corner {
            Some(oc) => Some(oc),
            None => {
                let f = &probe.faces()[probe.outer_face_index()];
                Some(f.corners[0])
            }
        };
        let graph = CiliatedPlanarGraph::new(colors, edges, rotation, cilium, outer_corner)?;
        out.push(SplitComponent {
            graph,
            vertex_map: verts,
            edge_map,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn four_cycle_two_multiwebs() {
        let g = generators::cycle(2);
        let ws = enumerate_multiwebs(&g, 2);
        // Oracle: brute force over all 3^4 multiplicity vectors.
        let mut brute = Vec::new();
        for code in 0..81u32 {
            let mult: Vec<u32> = (0..4).map(|i| code / 3u32.pow(i) % 3).collect();
            let w = Multiweb { n: 2, mult };
            if w.is_valid(&g) {
                brute.push(w);
            }
        }
        brute.sort();
        assert_eq!(ws, brute);
        assert_eq!(ws.len(), 3);
        assert_eq!(count_multiwebs(&g, 2), 3);
    }

    #[test]
    fn cycle_has_n_plus_one_multiwebs() {
        for nn in 1..=4 {
            for n in 1..=4 {
                let g = generators::cycle(nn);
                let ws = enumerate_multiwebs(&g, n);
                assert_eq!(ws.len() as u32, n + 1);
                for w in &ws {
                    let k = w.mult[0];
                    for (e, &m) in w.mult.iter().enumerate() {
                        assert_eq!(m, if e % 2 == 0 { k } else { n - k });
                    }
                }
            }
        }
    }

    #[test]
    fn coloring_counts_on_cycle() {
        let g = generators::cycle(3);
        for n in 1..=4u32 {
            for w in enumerate_multiwebs(&g, n) {
                let k = w.mult[0] as u64;
                let binom = (0..k).fold(1u64, |a, i| a * (n as u64 - i) / (i + 1));
                assert_eq!(count_edge_colorings(&g, &w), binom);
            }
        }
    }

    #[test]
    fn single_edge_full_multiplicity() {
        let g = generators::grid2xm(1);
        for n in 1..=3u32 {
            let w = Multiweb { n, mult: vec![n] };
            assert_eq!(count_edge_colorings(&g, &w), 1);
            // Each end partitions the colours into one block: a single
            // half-edge colouring.
            assert_eq!(enumerate_half_edge_colorings(&g, &w).len(), 1);
            let (sigma, l) = vertex_permutation(&g, 0, |_| full_mask(n));
            assert_eq!(sigma, (1..=n as usize).collect::<Vec<_>>());
            assert_eq!(l, 0);
        }
    }

    #[test]
    fn reversal_coloring_has_maximal_length() {
        // A vertex of degree n where each edge carries one colour, listed in
        // descending order along the linear order.
        let g = generators::cycle(1);
        let lin = g.linear_order(0);
        let (sigma, l) = vertex_permutation(&g, 0, |e| if e == lin[0] { 0b10 } else { 0b01 });
        assert_eq!(sigma, vec![2, 1]);
        assert_eq!(l, 1);
        assert_eq!(
            vertex_inversions(&g, 0, |e| if e == lin[0] { 0b10 } else { 0b01 }),
            l
        );
    }

    #[test]
    fn half_edge_colorings_contain_edge_colorings() {
        let g = generators::cycle(2);
        for w in enumerate_multiwebs(&g, 3) {
            let he = enumerate_half_edge_colorings(&g, &w);
            let diag: Vec<_> = he.iter().filter(|c| c.white == c.black).collect();
            assert_eq!(diag.len() as u64, count_edge_colorings(&g, &w));
        }
    }

    #[test]
    fn split_of_double_edge_is_bigon() {
        let g = generators::grid2xm(1);
        let w = Multiweb {
            n: 2,
            mult: vec![2],
        };
        let comps = split_graph(&g, &w).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].graph.num_edges(), 2);
        assert_eq!(comps[0].graph.faces().len(), 2);
    }
}
