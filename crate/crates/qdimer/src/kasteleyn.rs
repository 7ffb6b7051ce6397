//! Kasteleyn signs, blow-up graph bookkeeping, the q-Kasteleyn determinant,
//! and its comparison with the partition function.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::connection::DiagonalConnection;
use crate::laurent::{binom2, inversions, MonomialSum, QLaurent};
use crate::multiweb::{
    enumerate_multiwebs, for_each_edge_coloring, for_each_half_edge_coloring, mask_colors,
    vertex_inversions, HalfEdgeColoring, Multiweb,
};
use crate::par;
use crate::pgraph::{CiliatedPlanarGraph, Color};
use crate::qtrace::{normalization_shift, trace_full, TraceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KasteleynError {
    #[error("no Kasteleyn signs satisfy face {face}")]
    Inconsistent { face: usize },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

pub type KasteleynResult<T> = Result<T, KasteleynError>;

/// Per-edge signs `ε(e) ∈ {+1, -1}` for a rank parity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KasteleynSigns {
    pub signs: Vec<i8>,
    pub n_even: bool,
}

/// Parity (0 or 1) that the face sign product must have.
fn required_parity(g: &CiliatedPlanarGraph, f: usize, n: u32) -> u32 {
    let l = g.faces()[f].len() as u32;
    let k = if n.is_multiple_of(2) {
        g.inward_cilia(f) as u32
    } else {
        0
    };
    (l / 2 + 1 + k) % 2
}

/// Edges occurring an odd number of times on the boundary of `f`.
fn odd_edges(g: &CiliatedPlanarGraph, f: usize) -> Vec<usize> {
    let mut c: BTreeMap<usize, u32> = BTreeMap::new();
    for &e in &g.faces()[f].edges {
        *c.entry(e).or_default() += 1;
    }
    c.into_iter()
        .filter(|&(_, k)| k % 2 == 1)
        .map(|(e, _)| e)
        .collect()
}

/// `+1` on a BFS spanning tree from vertex 0; cotree edges solved face by
/// face as each face becomes a leaf of the dual tree.
pub fn build_signs(g: &CiliatedPlanarGraph, n: u32) -> KasteleynResult<KasteleynSigns> {
    let ne = g.num_edges();
    let mut val: Vec<Option<u32>> = vec![None; ne];
    let mut seen = vec![false; g.num_vertices()];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let mut inc = g.rotation(v).to_vec();
        inc.sort_unstable();
        for e in inc {
            let u = g.edge(e).other(v);
            if !seen[u] {
                seen[u] = true;
                val[e] = Some(0);
                queue.push_back(u);
            }
        }
    }
    let internal: Vec<usize> = g.internal_faces().map(|(f, _)| f).collect();
    let odd: Vec<Vec<usize>> = (0..g.faces().len()).map(|f| odd_edges(g, f)).collect();
    let mut done = vec![false; g.faces().len()];
    loop {
        let next = internal
            .iter()
            .copied()
            .find(|&f| !done[f] && odd[f].iter().filter(|&&e| val[e].is_none()).count() <= 1);
        let Some(f) = next else { break };
        let fixed: u32 = odd[f].iter().filter_map(|&e| val[e]).sum();
        let need = (required_parity(g, f, n) + fixed) % 2;
        match odd[f].iter().copied().find(|&e| val[e].is_none()) {
            Some(e) => val[e] = Some(need),
            None if need != 0 => return Err(KasteleynError::Inconsistent { face: f }),
            None => {}
        }
        done[f] = true;
    }
    if let Some(&f) = internal.iter().find(|&&f| !done[f]) {
        return Err(KasteleynError::Inconsistent { face: f });
    }
    let signs = val
        .into_iter()
        .map(|v| if v.unwrap_or(0) == 1 { -1 } else { 1 })
        .collect();
    let s = KasteleynSigns {
        signs,
        n_even: n.is_multiple_of(2),
    };
    if let Some(f) = first_bad_face(g, n, &s) {
        return Err(KasteleynError::Inconsistent { face: f });
    }
    Ok(s)
}

fn first_bad_face(g: &CiliatedPlanarGraph, n: u32, s: &KasteleynSigns) -> Option<usize> {
    g.internal_faces().map(|(f, _)| f).find(|&f| {
        let prod: i32 = g.faces()[f]
            .edges
            .iter()
            .map(|&e| s.signs[e] as i32)
            .product();
        let want = if required_parity(g, f, n) == 0 { 1 } else { -1 };
        prod != want
    })
}

/// Whether `s` satisfies the Kasteleyn condition for rank `n`.
pub fn check_signs(g: &CiliatedPlanarGraph, n: u32, s: &KasteleynSigns) -> bool {
    s.signs.len() == g.num_edges() && first_bad_face(g, n, s).is_none()
}

/// Sign of a permutation given as images of `0..len`.
pub fn permutation_sign(p: &[usize]) -> i8 {
    let mut seen = vec![false; p.len()];
    let mut parity = 0;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut j = i;
        let mut len = 0;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        parity += len - 1;
    }
    if parity % 2 == 0 {
        1
    } else {
        -1
    }
}

/// One dimer cover of the blow-up graph, grouped as multiweb, half-edge
/// colouring, and per-edge bijections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlowupTerm {
    pub multiweb: Multiweb,
    pub coloring: HalfEdgeColoring,
    /// Per edge, pairs `(white colour, black colour)` joined over that edge.
    pub matching: Vec<Vec<(usize, usize)>>,
    /// `σ̃` as images of white blow-up indices `0..Nn` in black indices.
    pub sigma: Vec<usize>,
    /// `Σ_v ℓ(σ_v)`.
    pub vertex_length: u32,
    /// Per edge, `σ_e` as a permutation of `1..m_e`.
    pub edge_perms: Vec<Vec<usize>>,
}

impl BlowupTerm {
    pub fn sign(&self) -> i8 {
        permutation_sign(&self.sigma)
    }

    pub fn edge_length(&self) -> u32 {
        self.edge_perms.iter().map(|p| inversions(p)).sum()
    }

    /// `σ̃_{0,c}`: the same colouring with every edge permutation trivial.
    pub fn base_sigma(&self, g: &CiliatedPlanarGraph) -> Vec<usize> {
        let n = self.multiweb.n as usize;
        let mut sigma = vec![usize::MAX; g.n_half() * n];
        for e in 0..g.num_edges() {
            let ed = g.edge(e);
            let s: Vec<usize> = mask_colors(self.coloring.white[e]).collect();
            let t: Vec<usize> = mask_colors(self.coloring.black[e]).collect();
            for (a, b) in s.iter().zip(&t) {
                sigma[g.class_index(ed.white) * n + a - 1] = g.class_index(ed.black) * n + b - 1;
            }
        }
        sigma
    }
}

/// `σ_e = g ∘ h ∘ f^{-1}` from the white and black subsets and the pairs.
pub fn edge_permutation(white: u32, black: u32, pairs: &[(usize, usize)]) -> Vec<usize> {
    let s: Vec<usize> = mask_colors(white).collect();
    let t: Vec<usize> = mask_colors(black).collect();
    s.iter()
        .map(|a| {
            let b = pairs.iter().find(|(x, _)| x == a).unwrap().1;
            t.iter().position(|&y| y == b).unwrap() + 1
        })
        .collect()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Calls `f` on every blow-up term projecting to `m`.
pub fn for_each_blowup_term(g: &CiliatedPlanarGraph, m: &Multiweb, mut f: impl FnMut(&BlowupTerm)) {
    let n = m.n as usize;
    let active: Vec<usize> = m.active_edges().collect();
    let perms: Vec<Vec<Vec<usize>>> = (0..=n).map(permutations).collect();
    for_each_half_edge_coloring(g, m, |c| {
        let vl: u32 = (0..g.num_vertices())
            .map(|v| match g.color(v) {
                Color::White => vertex_inversions(g, v, |e| c.white[e]),
                Color::Black => vertex_inversions(g, v, |e| c.black[e]),
            })
            .sum();
        let mut choice = vec![0usize; active.len()];
        loop {
            let mut matching = vec![Vec::new(); g.num_edges()];
            let mut edge_perms = vec![Vec::new(); g.num_edges()];
            let mut sigma = vec![usize::MAX; g.n_half() * n];
            for (ai, &e) in active.iter().enumerate() {
                let ed = g.edge(e);
                let s: Vec<usize> = mask_colors(c.white[e]).collect();
                let t: Vec<usize> = mask_colors(c.black[e]).collect();
                let p = &perms[s.len()][choice[ai]];
                let pairs: Vec<(usize, usize)> =
                    s.iter().enumerate().map(|(i, &a)| (a, t[p[i]])).collect();
                for &(a, b) in &pairs {
                    sigma[g.class_index(ed.white) * n + a - 1] =
                        g.class_index(ed.black) * n + b - 1;
                }
                edge_perms[e] = edge_permutation(c.white[e], c.black[e], &pairs);
                matching[e] = pairs;
            }
            f(&BlowupTerm {
                multiweb: m.clone(),
                coloring: c.clone(),
                matching,
                sigma,
                vertex_length: vl,
                edge_perms,
            });
            // Odometer over the per-edge bijections.
            let mut i = 0;
            loop {
                if i == active.len() {
                    return;
                }
                choice[i] += 1;
                if choice[i] < perms[m.mult[active[i]] as usize].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    });
}

/// The Kdet contribution of `m` with commuting entries `entry(e, i, j)`
/// (row `i` at the white end, column `j` at the black end), before the
/// global `q^{-N binom(n,2)}`.
pub fn kdet_multiweb_general(
    g: &CiliatedPlanarGraph,
    m: &Multiweb,
    eps: &KasteleynSigns,
    entry: &dyn Fn(usize, usize, usize) -> QLaurent,
) -> QLaurent {
    let pre: i64 = m.mult.iter().map(|&k| binom2(k) as i64).sum();
    let mut acc = QLaurent::zero();
    for_each_blowup_term(g, m, |t| {
        let mut val = QLaurent::one();
        for e in m.active_edges() {
            for &(a, b) in &t.matching[e] {
                let x = entry(e, a - 1, b - 1);
                if x.is_zero() {
                    return;
                }
                val = &val * &x;
            }
        }
        let eps_prod: i64 = m
            .active_edges()
            .map(|e| (eps.signs[e] as i64).pow(m.mult[e]))
            .product();
        let sign = t.sign() as i64 * eps_prod;
        let k = t.vertex_length as i64 + pre + t.edge_length() as i64;
        acc += &val.scale_by_power(k, 1).scale(&sign.into());
    });
    acc
}

/// Diagonal fast path: only edge colourings with trivial bijections survive.
pub fn kdet_multiweb(
    phi: &DiagonalConnection,
    g: &CiliatedPlanarGraph,
    m: &Multiweb,
    eps: &KasteleynSigns,
) -> QLaurent {
    let n = m.n as usize;
    let pre: i64 = m.mult.iter().map(|&k| binom2(k) as i64).sum();
    let eps_prod: i64 = m
        .active_edges()
        .map(|e| (eps.signs[e] as i64).pow(m.mult[e]))
        .product();
    let lin: Vec<Vec<usize>> = (0..g.num_vertices()).map(|v| g.linear_order(v)).collect();
    let monomial = phi.is_monomial() && phi.entries.iter().flatten().all(|x| x.denom() == 1);
    let mut fast = MonomialSum::new();
    let mut slow = QLaurent::zero();
    for_each_edge_coloring(g, m, |s| {
        let mut sigma = vec![usize::MAX; g.n_half() * n];
        for e in m.active_edges() {
            let ed = g.edge(e);
            for a in mask_colors(s[e]) {
                sigma[g.class_index(ed.white) * n + a - 1] = g.class_index(ed.black) * n + a - 1;
            }
        }
        let mut vl = 0;
        for l in &lin {
            let mut seen = 0u32;
            for &e in l {
                for c in mask_colors(s[e]) {
                    vl += (seen >> c).count_ones();
                }
                seen |= s[e];
            }
        }
        let sign = permutation_sign(&sigma) as i64 * eps_prod;
        let k = vl as i64 + pre;
        if monomial {
            let mut sg = sign;
            let mut kk = k;
            for e in m.active_edges() {
                for a in mask_colors(s[e]) {
                    let (c, ke, _) = phi.entries[e][a - 1].as_monomial().unwrap();
                    if c.sign() == num_bigint::Sign::Minus {
                        sg = -sg;
                    }
                    kk += ke;
                }
            }
            fast.add(kk, sg as i128);
        } else {
            let mut val = QLaurent::monomial(sign, k, 1);
            for e in m.active_edges() {
                for a in mask_colors(s[e]) {
                    val = &val * &phi.entries[e][a - 1];
                }
            }
            slow += &val;
        }
    });
    if monomial {
        fast.to_laurent()
    } else {
        slow
    }
}

/// `Kdet_q(Φ)` for a diagonal connection.
pub fn kdet(
    phi: &DiagonalConnection,
    g: &CiliatedPlanarGraph,
    n: u32,
    eps: &KasteleynSigns,
) -> QLaurent {
    let webs = enumerate_multiwebs(g, n);
    let parts = par::map_vec(&webs, |m| kdet_multiweb(phi, g, m, eps));
    let total: QLaurent = parts.into_iter().sum();
    total.scale_by_power(-normalization_shift(g, n), 1)
}

/// The determinant-like formula for simple graphs: a signed expansion over
/// permutations of the blow-up matrix rows, with commuting entries.
pub fn kdet_matrix_form(
    g: &CiliatedPlanarGraph,
    n: u32,
    eps: &KasteleynSigns,
    entry: &dyn Fn(usize, usize, usize) -> QLaurent,
) -> QLaurent {
    let nn = n as usize;
    let nh = g.n_half();
    let size = nh * nn;
    // Edge between the l-th white and k-th black vertex, if any.
    let mut adj: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (e, ed) in g.edges().iter().enumerate() {
        adj.insert((g.class_index(ed.white), g.class_index(ed.black)), e);
    }
    let mut total = QLaurent::zero();
    let mut sigma = vec![usize::MAX; size];
    let mut used = vec![false; size];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        row: usize,
        nn: usize,
        g: &CiliatedPlanarGraph,
        adj: &BTreeMap<(usize, usize), usize>,
        eps: &KasteleynSigns,
        entry: &dyn Fn(usize, usize, usize) -> QLaurent,
        sigma: &mut Vec<usize>,
        used: &mut Vec<bool>,
        total: &mut QLaurent,
    ) {
        let size = sigma.len();
        if row == size {
            *total += &matrix_term(g, nn, adj, eps, entry, sigma);
            return;
        }
        let (l, i) = (row / nn, row % nn);
        for col in 0..size {
            if used[col] {
                continue;
            }
            let (k, j) = (col / nn, col % nn);
            let Some(&e) = adj.get(&(l, k)) else { continue };
            if entry(e, i, j).is_zero() {
                continue;
            }
            used[col] = true;
            sigma[row] = col;
            rec(row + 1, nn, g, adj, eps, entry, sigma, used, total);
            used[col] = false;
        }
    }
    rec(
        0, nn, g, &adj, eps, entry, &mut sigma, &mut used, &mut total,
    );
    total.scale_by_power(-normalization_shift(g, n), 1)
}

fn matrix_term(
    g: &CiliatedPlanarGraph,
    nn: usize,
    adj: &BTreeMap<(usize, usize), usize>,
    eps: &KasteleynSigns,
    entry: &dyn Fn(usize, usize, usize) -> QLaurent,
    sigma: &[usize],
) -> QLaurent {
    let mut white = vec![0u32; g.num_edges()];
    let mut black = vec![0u32; g.num_edges()];
    let mut pairs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.num_edges()];
    let mut val = QLaurent::one();
    let mut eps_prod = 1i64;
    for (row, &col) in sigma.iter().enumerate() {
        let (l, i, k, j) = (row / nn, row % nn, col / nn, col % nn);
        let e = adj[&(l, k)];
        white[e] |= 1 << i;
        black[e] |= 1 << j;
        pairs[e].push((i + 1, j + 1));
        eps_prod *= eps.signs[e] as i64;
        val = &val * &entry(e, i, j);
    }
    let mut k = 0i64;
    for v in 0..g.num_vertices() {
        let sub = if g.color(v) == Color::White {
            &white
        } else {
            &black
        };
        k += vertex_inversions(g, v, |e| sub[e]) as i64;
    }
    for e in 0..g.num_edges() {
        let m = white[e].count_ones();
        k += binom2(m) as i64;
        if m > 0 {
            k += inversions(&edge_permutation(white[e], black[e], &pairs[e])) as i64;
        }
    }
    let sign = permutation_sign(sigma) as i64 * eps_prod;
    val.scale_by_power(k, 1).scale(&sign.into())
}

/// Outcome of comparing `Kdet_q` with `Z_q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verification {
    /// `s` with `s·Kdet = Z`, when one exists.
    pub sign: Option<i8>,
    pub matches: bool,
    pub kdet: QLaurent,
    pub z: QLaurent,
    /// The first multiweb whose contribution disagrees with its trace.
    pub first_mismatch: Option<(Multiweb, QLaurent, QLaurent)>,
}

/// Builds Kasteleyn signs and compares `Kdet_q(Φ)` with `Z(Φ)`, multiweb by
/// multiweb.
pub fn verify_kasteleyn(
    phi: &DiagonalConnection,
    g: &CiliatedPlanarGraph,
    n: u32,
) -> KasteleynResult<Verification> {
    let eps = build_signs(g, n)?;
    let webs = enumerate_multiwebs(g, n);
    let shift = normalization_shift(g, n);
    let rows = par::map_vec(&webs, |m| -> KasteleynResult<(QLaurent, QLaurent)> {
        let k = kdet_multiweb(phi, g, m, &eps).scale_by_power(-shift, 1);
        let t = trace_full(phi, g, m)?.normalized;
        Ok((k, t))
    });
    let mut kd = QLaurent::zero();
    let mut z = QLaurent::zero();
    let mut sign: Option<i8> = None;
    let mut consistent = true;
    let mut first_mismatch = None;
    for (m, r) in webs.iter().zip(rows) {
        let (k, t) = r?;
        let s = if k == t {
            Some(1)
        } else if k == -t.clone() {
            Some(-1)
        } else {
            None
        };
        match (s, sign) {
            (Some(s), None) => sign = Some(s),
            (Some(s), Some(prev)) if s == prev || t.is_zero() => {}
            _ => {
                consistent = false;
                if first_mismatch.is_none() {
                    first_mismatch = Some((m.clone(), k.clone(), t.clone()));
                }
            }
        }
        kd += &k;
        z += &t;
    }
    let total_sign = if kd == z {
        Some(1)
    } else if kd == -z.clone() {
        Some(-1)
    } else {
        None
    };
    Ok(Verification {
        sign: total_sign,
        matches: consistent && total_sign.is_some(),
        kdet: kd,
        z,
        first_mismatch,
    })
}
