//! Quantum traces of multiwebs for diagonal connections, normalized traces,
//! and partition functions.

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::connection::{build_quantum_identity, ConnectionError, DiagonalConnection};
use crate::laurent::{binom2, MonomialSum, QLaurent};
use crate::multiweb::{
    count_edge_colorings, enumerate_multiwebs, for_each_edge_coloring, mask_colors, Multiweb,
};
use crate::par;
use crate::pgraph::CiliatedPlanarGraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("multiweb is not valid for this graph")]
    InvalidMultiweb,
    #[error("multiweb has no edge colouring")]
    NoColorings,
    #[error(transparent)]
    Connection(#[from] ConnectionError),
}

pub type TraceResult<T> = Result<T, TraceError>;

/// Raw and normalized trace of one multiweb.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub raw: QLaurent,
    pub normalized: QLaurent,
    pub colorings: u64,
}

/// Per-vertex linear orders, computed once per trace.
struct Orders(Vec<Vec<usize>>);

impl Orders {
    fn new(g: &CiliatedPlanarGraph) -> Self {
        Orders((0..g.num_vertices()).map(|v| g.linear_order(v)).collect())
    }

    /// `Σ_v ℓ(σ_v)` for the colouring `subsets`.
    fn total_inversions(&self, subsets: &[u32]) -> u32 {
        let mut total = 0;
        for lin in &self.0 {
            let mut seen: u32 = 0;
            for &e in lin {
                let s = subsets[e];
                if s == 0 {
                    continue;
                }
                for c in mask_colors(s) {
                    total += (seen >> c).count_ones();
                }
                seen |= s;
            }
        }
        total
    }
}

/// Signed integer-exponent monomial diagonals, when every entry is one.
fn monomial_table(phi: &DiagonalConnection) -> Option<Vec<Vec<(i64, i64)>>> {
    phi.entries
        .iter()
        .map(|d| {
            d.iter()
                .map(|x| {
                    let (c, k, den) = x.as_monomial()?;
                    let c: i64 = c.try_into().ok()?;
                    (den == 1 && c.abs() == 1).then_some((c, k))
                })
                .collect()
        })
        .collect()
}

/// `Σ_c Π_v (-q)^{ℓ(σ_v)} Π_e Π_{i∈S_e} Φ(e)_ii` without the edge prefactor.
fn coloring_sum(
    g: &CiliatedPlanarGraph,
    phi: &DiagonalConnection,
    m: &Multiweb,
) -> (QLaurent, u64) {
    let ord = Orders::new(g);
    let mut count = 0u64;
    if let Some(tab) = monomial_table(phi) {
        let mut acc = MonomialSum::new();
        for_each_edge_coloring(g, m, |s| {
            count += 1;
            let l = ord.total_inversions(s);
            let mut sign: i64 = if l.is_multiple_of(2) { 1 } else { -1 };
            let mut k = l as i64;
            for (e, &mask) in s.iter().enumerate() {
                for c in mask_colors(mask) {
                    let (cs, ck) = tab[e][c - 1];
                    sign *= cs;
                    k += ck;
                }
            }
            acc.add(k, sign as i128);
        });
        (acc.to_laurent(), count)
    } else {
        let mut acc = QLaurent::zero();
        for_each_edge_coloring(g, m, |s| {
            count += 1;
            let l = ord.total_inversions(s);
            let mut term = crate::laurent::neg_q_pow(l);
            for (e, &mask) in s.iter().enumerate() {
                for c in mask_colors(mask) {
                    term = &term * &phi.entries[e][c - 1];
                }
            }
            acc += &term;
        });
        (acc, count)
    }
}

fn edge_prefactor(m: &Multiweb) -> i64 {
    m.mult.iter().map(|&k| binom2(k) as i64).sum()
}

/// `(Π_e q^{binom(m_e,2)}) Σ_c Π_v (-q)^{ℓ(σ_v)} Π_e Π_{i∈S_e} Φ(e)_ii`.
pub fn trace_diagonal(
    phi: &DiagonalConnection,
    g: &CiliatedPlanarGraph,
    m: &Multiweb,
) -> TraceResult<QLaurent> {
    Ok(trace_full(phi, g, m)?.raw)
}

/// Raw trace, normalized trace `q^{-N binom(n,2)} tr`, and colouring count.
pub fn trace_full(
    phi: &DiagonalConnection,
    g: &CiliatedPlanarGraph,
    m: &Multiweb,
) -> TraceResult<Trace> {
    phi.validate(g)?;
    if !m.is_valid(g) || phi.n != m.n {
        return Err(TraceError::InvalidMultiweb);
    }
    let (sum, colorings) = coloring_sum(g, phi, m);
    if colorings == 0 {
        return Err(TraceError::NoColorings);
    }
    let raw = sum.scale_by_power(edge_prefactor(m), 1);
    let normalized = raw.scale_by_power(-normalization_shift(g, m.n), 1);
    Ok(Trace {
        raw,
        normalized,
        colorings,
    })
}

/// `N binom(n,2)`.
pub fn normalization_shift(g: &CiliatedPlanarGraph, n: u32) -> i64 {
    g.n_half() as i64 * binom2(n) as i64
}

/// Normalized traces of every multiweb, in canonical order.
pub fn traces(
    phi: &DiagonalConnection,
    g: &CiliatedPlanarGraph,
    n: u32,
) -> TraceResult<Vec<(Multiweb, Trace)>> {
    let webs = enumerate_multiwebs(g, n);
    let ts = par::map_vec(&webs, |m| trace_full(phi, g, m));
    webs.into_iter()
        .zip(ts)
        .map(|(m, t)| t.map(|t| (m, t)))
        .collect()
}

/// `Z(Φ) = q^{-N binom(n,2)} Σ_m tr_q(Φ, m)`.
pub fn partition_function(
    phi: &DiagonalConnection,
    g: &CiliatedPlanarGraph,
    n: u32,
) -> TraceResult<QLaurent> {
    Ok(traces(phi, g, n)?
        .into_iter()
        .map(|(_, t)| t.normalized)
        .sum())
}

/// `Z_q` with the quantum identity connection built for `g`.
pub fn zq(g: &CiliatedPlanarGraph, n: u32) -> TraceResult<QLaurent> {
    let phi = build_quantum_identity(g, n)?;
    partition_function(&phi, g, n)
}

/// `tr_1(m)`: the trace with the identity connection at `q = 1`.
pub fn classical_trace(g: &CiliatedPlanarGraph, m: &Multiweb) -> BigInt {
    let ord = Orders::new(g);
    let mut t: i64 = 0;
    for_each_edge_coloring(g, m, |s| {
        t += if ord.total_inversions(s).is_multiple_of(2) {
            1
        } else {
            -1
        };
    });
    BigInt::from(t)
}

/// Sign uniformity of classical traces and their comparison with colouring
/// counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PositivityReport {
    pub n: u32,
    pub multiwebs: usize,
    /// The common sign of all classical traces, or `None` when mixed.
    pub sign: Option<i32>,
    /// Whether `|tr_1(m)|` equals the colouring count for every `m`.
    pub magnitudes_match: bool,
    /// `Σ_m tr_1(m)`.
    pub z1: BigInt,
}

pub fn positivity_report(g: &CiliatedPlanarGraph, n: u32) -> PositivityReport {
    let webs = enumerate_multiwebs(g, n);
    let rows = par::map_vec(&webs, |m| {
        (classical_trace(g, m), count_edge_colorings(g, m))
    });
    let mut signs = rows.iter().map(|(t, _)| t.sign());
    let first = signs.next();
    let uniform = signs.all(|s| Some(s) == first);
    let sign = match (uniform, first) {
        (true, Some(num_bigint::Sign::Plus)) => Some(1),
        (true, Some(num_bigint::Sign::Minus)) => Some(-1),
        _ => None,
    };
    let magnitudes_match = rows
        .iter()
        .all(|(t, c)| t.magnitude() == &num_bigint::BigUint::from(*c));
    let z1 = rows.iter().map(|(t, _)| t.clone()).sum();
    PositivityReport {
        n,
        multiwebs: webs.len(),
        sign,
        magnitudes_match,
        z1,
    }
}
