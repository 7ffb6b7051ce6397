//! Diagonal connections, the quantum identity matrix, face monodromies, and
//! the spanning-tree construction of the quantum identity connection.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::QLaurent;
use crate::pgraph::{CiliatedPlanarGraph, Color};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConnectionError {
    #[error("connection has {got} edges, graph has {want}")]
    EdgeCount { got: usize, want: usize },
    #[error("entry on edge {edge} has length {got}, expected {want}")]
    Rank {
        edge: usize,
        got: usize,
        want: usize,
    },
    #[error("entry {index} on edge {edge} is not invertible")]
    NotInvertible { edge: usize, index: usize },
    #[error("no quantum identity connection satisfies face {face}")]
    Inconsistent { face: usize },
    #[error("json: {0}")]
    Json(String),
}

pub type ConnectionResult<T> = Result<T, ConnectionError>;

/// Per-edge diagonal `n×n` matrices, stored as their diagonals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalConnection {
    pub n: u32,
    pub entries: Vec<Vec<QLaurent>>,
}

/// The diagonal of `Q^alpha`: exponents `alpha(n+1-2i)` for `i = 1..n`.
pub fn q_power_exponents(n: u32, alpha: i64) -> Vec<i64> {
    (1..=n as i64)
        .map(|i| alpha * (n as i64 + 1 - 2 * i))
        .collect()
}

/// `Q = diag(q^{n-1}, q^{n-3}, ..., q^{1-n})`.
pub fn q_identity_matrix(n: u32) -> Vec<QLaurent> {
    q_power_exponents(n, 1)
        .into_iter()
        .map(QLaurent::qpow)
        .collect()
}

impl DiagonalConnection {
    pub fn identity(n: u32, num_edges: usize) -> Self {
        DiagonalConnection {
            n,
            entries: vec![vec![QLaurent::one(); n as usize]; num_edges],
        }
    }

    /// `Φ(e) = Q^{alpha_e}`.
    pub fn from_q_powers(n: u32, alpha: &[i64]) -> Self {
        let entries = alpha
            .iter()
            .map(|&a| {
                q_power_exponents(n, a)
                    .into_iter()
                    .map(QLaurent::qpow)
                    .collect()
            })
            .collect();
        DiagonalConnection { n, entries }
    }

    /// Diagonal entries `±q^k` with `|k| <= max_power`, drawn from `rng`.
    pub fn random_monomial<R: Rng>(n: u32, num_edges: usize, max_power: i64, rng: &mut R) -> Self {
        let entries = (0..num_edges)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let c = if rng.gen_bool(0.5) { 1 } else { -1 };
                        QLaurent::monomial(c, rng.gen_range(-max_power..=max_power), 1)
                    })
                    .collect()
            })
            .collect();
        DiagonalConnection { n, entries }
    }

    pub fn num_edges(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, e: usize, i: usize) -> &QLaurent {
        &self.entries[e][i]
    }

    pub fn validate(&self, g: &CiliatedPlanarGraph) -> ConnectionResult<()> {
        if self.entries.len() != g.num_edges() {
            return Err(ConnectionError::EdgeCount {
                got: self.entries.len(),
                want: g.num_edges(),
            });
        }
        for (e, d) in self.entries.iter().enumerate() {
            if d.len() != self.n as usize {
                return Err(ConnectionError::Rank {
                    edge: e,
                    got: d.len(),
                    want: self.n as usize,
                });
            }
        }
        Ok(())
    }

    /// Product of all diagonal entries of `Φ(e)`.
    pub fn det(&self, e: usize) -> QLaurent {
        self.entries[e].iter().fold(QLaurent::one(), |a, x| &a * x)
    }

    /// Whether every entry is a signed monomial.
    pub fn is_monomial(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .all(|x| x.as_monomial().is_some())
    }

    /// The entry-wise specialization at `q = 1`, as integers.
    pub fn at_one(&self) -> Vec<Vec<num_bigint::BigInt>> {
        self.entries
            .iter()
            .map(|d| d.iter().map(|x| x.eval_at_one()).collect())
            .collect()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("connection serializes")
    }

    pub fn from_json_str(s: &str) -> ConnectionResult<Self> {
        let j: ConnectionJson =
            serde_json::from_str(s).map_err(|e| ConnectionError::Json(e.to_string()))?;
        Ok(j.into_connection())
    }
}

/// Accepted JSON layouts: full Laurent entries, per-edge exponent vectors,
/// or per-edge powers of `Q`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConnectionJson {
    Entries { n: u32, entries: Vec<Vec<QLaurent>> },
    Exponents { n: u32, exponents: Vec<Vec<i64>> },
    QPowers { n: u32, q_powers: Vec<i64> },
}

impl ConnectionJson {
    pub fn into_connection(self) -> DiagonalConnection {
        match self {
            ConnectionJson::Entries { n, entries } => DiagonalConnection { n, entries },
            ConnectionJson::Exponents { n, exponents } => DiagonalConnection {
                n,
                entries: exponents
                    .into_iter()
                    .map(|v| v.into_iter().map(QLaurent::qpow).collect())
                    .collect(),
            },
            ConnectionJson::QPowers { n, q_powers } => {
                DiagonalConnection::from_q_powers(n, &q_powers)
            }
        }
    }
}

/// `+1` when the step leaving `corners[i]` starts at a black vertex.
fn step_signs(g: &CiliatedPlanarGraph, f: usize) -> Vec<(usize, i64)> {
    let face = &g.faces()[f];
    (0..face.len())
        .map(|i| {
            let s = if g.color(face.corners[i].0) == Color::Black {
                1
            } else {
                -1
            };
            (face.edges[i], s)
        })
        .collect()
}

/// The counterclockwise monodromy of face `f`: `Φ(e)` on steps leaving a
/// black vertex and `Φ(e)^{-1}` on steps leaving a white one. Diagonal
/// monodromies do not depend on the basepoint.
pub fn face_monodromy(
    phi: &DiagonalConnection,
    g: &CiliatedPlanarGraph,
    f: usize,
) -> ConnectionResult<Vec<QLaurent>> {
    let mut out = vec![QLaurent::one(); phi.n as usize];
    for (e, s) in step_signs(g, f) {
        for (i, o) in out.iter_mut().enumerate() {
            let x = &phi.entries[e][i];
            let y = if s > 0 {
                x.clone()
            } else {
                x.inverse()
                    .ok_or(ConnectionError::NotInvertible { edge: e, index: i })?
            };
            *o = &*o * &y;
        }
    }
    Ok(out)
}

/// The power of `Q` required around an internal face: `l/2 - 1 - k`.
pub fn required_power(g: &CiliatedPlanarGraph, f: usize) -> i64 {
    g.faces()[f].len() as i64 / 2 - 1 - g.inward_cilia(f) as i64
}

/// Whether every internal face has monodromy `Q^{l/2-1-k}`.
pub fn is_quantum_identity(phi: &DiagonalConnection, g: &CiliatedPlanarGraph) -> bool {
    if phi.validate(g).is_err() {
        return false;
    }
    g.internal_faces().all(|(f, _)| {
        let want: Vec<QLaurent> = q_power_exponents(phi.n, required_power(g, f))
            .into_iter()
            .map(QLaurent::qpow)
            .collect();
        face_monodromy(phi, g, f)
            .map(|m| m == want)
            .unwrap_or(false)
    })
}

/// A quantum identity connection by powers of `Q`: identity on the BFS tree
/// from vertex 0, then each cotree edge solved as its face becomes a leaf of
/// the dual tree.
pub fn build_quantum_identity_powers(g: &CiliatedPlanarGraph) -> ConnectionResult<Vec<i64>> {
    build_quantum_identity_powers_from(g, 0)
}

/// As [`build_quantum_identity_powers`] with the BFS rooted at `root`.
pub fn build_quantum_identity_powers_from(
    g: &CiliatedPlanarGraph,
    root: usize,
) -> ConnectionResult<Vec<i64>> {
    let ne = g.num_edges();
    let mut in_tree = vec![false; ne];
    let mut seen = vec![false; g.num_vertices()];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let mut inc: Vec<usize> = g.rotation(v).to_vec();
        inc.sort_unstable();
        for e in inc {
            let u = g.edge(e).other(v);
            if !seen[u] {
                seen[u] = true;
                in_tree[e] = true;
                queue.push_back(u);
            }
        }
    }
    let mut alpha: Vec<Option<i64>> = in_tree.iter().map(|&t| t.then_some(0)).collect();
    let coeffs: Vec<Vec<(usize, i64)>> = (0..g.faces().len())
        .map(|f| {
            let mut acc: std::collections::BTreeMap<usize, i64> = Default::default();
            for (e, s) in step_signs(g, f) {
                *acc.entry(e).or_default() += s;
            }
            acc.into_iter().collect()
        })
        .collect();
    // Edges seen from the same face on both sides carry no constraint.
    for c in &coeffs {
        for &(e, s) in c {
            if s == 0 {
                alpha[e].get_or_insert(0);
            }
        }
    }
    let internal: Vec<usize> = g.internal_faces().map(|(f, _)| f).collect();
    let mut done = vec![false; g.faces().len()];
    loop {
        let mut progressed = false;
        for &f in &internal {
            if done[f] {
                continue;
            }
            let open: Vec<(usize, i64)> = coeffs[f]
                .iter()
                .copied()
                .filter(|&(e, s)| s != 0 && alpha[e].is_none())
                .collect();
            if open.len() > 1 {
                continue;
            }
            let fixed: i64 = coeffs[f]
                .iter()
                .filter_map(|&(e, s)| alpha[e].map(|a| a * s))
                .sum();
            let need = required_power(g, f) - fixed;
            match open.first() {
                Some(&(e, s)) => {
                    if need % s != 0 {
                        return Err(ConnectionError::Inconsistent { face: f });
                    }
                    alpha[e] = Some(need / s);
                }
                None if need != 0 => return Err(ConnectionError::Inconsistent { face: f }),
                None => {}
            }
            done[f] = true;
            progressed = true;
            break;
        }
        if !progressed {
            break;
        }
    }
    if let Some(&f) = internal.iter().find(|&&f| !done[f]) {
        return Err(ConnectionError::Inconsistent { face: f });
    }
    Ok(alpha.into_iter().map(|a| a.unwrap_or(0)).collect())
}

/// The quantum identity connection `I_q` of rank `n`.
pub fn build_quantum_identity(
    g: &CiliatedPlanarGraph,
    n: u32,
) -> ConnectionResult<DiagonalConnection> {
    let alpha = build_quantum_identity_powers(g)?;
    let phi = DiagonalConnection::from_q_powers(n, &alpha);
    if !is_quantum_identity(&phi, g) {
        let f = g
            .internal_faces()
            .map(|(f, _)| f)
            .find(|&f| {
                let want: Vec<QLaurent> = q_power_exponents(n, required_power(g, f))
                    .into_iter()
                    .map(QLaurent::qpow)
                    .collect();
                face_monodromy(&phi, g, f)
                    .map(|m| m != want)
                    .unwrap_or(true)
            })
            .unwrap_or(0);
        return Err(ConnectionError::Inconsistent { face: f });
    }
    Ok(phi)
}

/// `Φ'(e) = A_w Φ(e) A_b` for per-vertex diagonal matrices `A`.
pub fn gauge_transform(
    phi: &DiagonalConnection,
    g: &CiliatedPlanarGraph,
    a: &[Vec<QLaurent>],
) -> DiagonalConnection {
    let entries = phi
        .entries
        .iter()
        .enumerate()
        .map(|(e, d)| {
            let ed = g.edge(e);
            d.iter()
                .enumerate()
                .map(|(i, x)| &(&a[ed.white][i] * x) * &a[ed.black][i])
                .collect()
        })
        .collect();
    DiagonalConnection { n: phi.n, entries }
}

/// Whether two connections have equal monodromy around every internal face.
pub fn same_face_monodromies(
    phi: &DiagonalConnection,
    psi: &DiagonalConnection,
    g: &CiliatedPlanarGraph,
) -> bool {
    g.internal_faces().all(
        |(f, _)| match (face_monodromy(phi, g, f), face_monodromy(psi, g, f)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn q_matrix() {
        let q2 = q_identity_matrix(2);
        assert_eq!(q2, vec![QLaurent::q(), QLaurent::qpow(-1)]);
        for n in 1..=5 {
            let tr: QLaurent = q_identity_matrix(n).into_iter().sum();
            assert_eq!(tr, QLaurent::qint(n));
        }
        assert_eq!(q_identity_matrix(1), vec![QLaurent::one()]);
    }

    #[test]
    fn bigon_monodromy_by_hand() {
        let g = generators::cycle(1);
        let (f, _) = g.internal_faces().next().unwrap();
        let e = generators::cycle_distinguished_edge(&g);
        let mut alpha = vec![0, 0];
        alpha[e] = 1;
        let phi = DiagonalConnection::from_q_powers(2, &alpha);
        // Walking the inner face leaves the black vertex along `e`.
        assert_eq!(face_monodromy(&phi, &g, f).unwrap(), q_identity_matrix(2));
        alpha[e] = 0;
        alpha[1 - e] = 1;
        let phi = DiagonalConnection::from_q_powers(2, &alpha);
        assert_eq!(
            face_monodromy(&phi, &g, f).unwrap(),
            vec![QLaurent::qpow(-1), QLaurent::q()]
        );
        let id = DiagonalConnection::identity(2, 2);
        assert_eq!(
            face_monodromy(&id, &g, f).unwrap(),
            vec![QLaurent::one(); 2]
        );
    }

    #[test]
    fn cycle_distinguished_edge_connection() {
        for nn in 1..=5 {
            let g = generators::cycle(nn);
            let mut alpha = vec![0; g.num_edges()];
            alpha[generators::cycle_distinguished_edge(&g)] = nn as i64 - 1;
            for n in 1..=4 {
                assert!(is_quantum_identity(
                    &DiagonalConnection::from_q_powers(n, &alpha),
                    &g
                ));
                let built = build_quantum_identity(&g, n).unwrap();
                assert!(same_face_monodromies(
                    &built,
                    &DiagonalConnection::from_q_powers(n, &alpha),
                    &g
                ));
            }
        }
    }

    #[test]
    fn trivial_ciliation_gives_identity() {
        for g in [
            generators::grid2xm(4),
            generators::zigzag(5),
            generators::honeycomb_patch(2, 2).unwrap(),
        ] {
            assert!(is_quantum_identity(
                &DiagonalConnection::identity(3, g.num_edges()),
                &g
            ));
            assert!(build_quantum_identity_powers(&g)
                .unwrap()
                .iter()
                .all(|&a| a == 0));
        }
    }

    #[test]
    fn different_roots_same_monodromies() {
        let g = generators::square_grid(4, 3).unwrap();
        let g = g.rotate_cilium(5, true).rotate_cilium(2, false);
        let a = DiagonalConnection::from_q_powers(
            3,
            &build_quantum_identity_powers_from(&g, 0).unwrap(),
        );
        let b = DiagonalConnection::from_q_powers(
            3,
            &build_quantum_identity_powers_from(&g, 7).unwrap(),
        );
        assert!(is_quantum_identity(&a, &g) && is_quantum_identity(&b, &g));
        assert!(same_face_monodromies(&a, &b, &g));
    }

    #[test]
    fn gauge_by_identity_is_noop() {
        let g = generators::cycle(3);
        let phi = build_quantum_identity(&g, 2).unwrap();
        let a = vec![vec![QLaurent::one(); 2]; g.num_vertices()];
        assert_eq!(gauge_transform(&phi, &g, &a), phi);
        let mut b = a.clone();
        b[0] = vec![QLaurent::q(), QLaurent::qpow(-1)];
        assert!(same_face_monodromies(
            &gauge_transform(&phi, &g, &b),
            &phi,
            &g
        ));
    }

    #[test]
    fn json_forms() {
        let phi = DiagonalConnection::from_q_powers(2, &[1, 0, -1]);
        let back = DiagonalConnection::from_json_str(&phi.to_json_string()).unwrap();
        assert_eq!(back, phi);
        let e = DiagonalConnection::from_json_str(r#"{"n":2,"exponents":[[1,-1],[0,0],[-1,1]]}"#)
            .unwrap();
        assert_eq!(e, phi);
        let p = DiagonalConnection::from_json_str(r#"{"n":2,"q_powers":[1,0,-1]}"#).unwrap();
        assert_eq!(p, phi);
    }
}
