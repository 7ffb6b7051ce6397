//! Reshetikhin–Turaev state sums for blackboard-framed web diagrams.
//!
//! A diagram is a stack of slices read bottom to top. Each slice is one
//! building block at a horizontal position, tensored with vertical strands.
//! A downward strand carries `V = C^n` and an upward strand carries `V*`.
//!
//! Blocks (inputs below, outputs above):
//! - `cross+`, `cross-`: `R` and `R^{-1}` on two downward strands.
//! - `cup`: creates `(v ^)`, `1 ↦ Σ x_i ⊗ x_i*`.
//! - `cup*`: creates `(^ v)`, `1 ↦ Σ q^{n+1-2i} x_i* ⊗ x_i`.
//! - `cap`: consumes `(^ v)`, `x_i* ⊗ x_j ↦ δ_ij`.
//! - `cap*`: consumes `(v ^)`, `x_i ⊗ x_j* ↦ q^{2i-n-1} δ_ij`.
//! - `black`: consumes `n` downward legs, `T_-`; the cilium points up and
//!   the legs are read left to right.
//! - `white`: creates `n` downward legs, `T_+`; the cilium points down.
//!
//! Text form: one slice per line, `<block> @<pos> | strands: <sig>`, where
//! `pos` is the 0-based index of the leftmost strand the block touches (or
//! the insertion point for `cup`, `cup*`, `white`) and `sig` lists the
//! strands below the slice as `v`/`^`. The `| strands:` part is optional on
//! input and checked when present. A line `n = <rank>` sets the rank; `#`
//! starts a comment.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::laurent::{inversions, LaurentError, QLaurent};
use crate::multiweb::{split_graph, Multiweb};
use crate::pgraph::{CiliatedPlanarGraph, Color, GraphError};

/// Cap on `n^width` for any slice interface.
pub const MAX_STATES: u64 = 1 << 16;
/// Cap on the number of search steps when sweeping a web.
pub const MAX_SWEEP_STEPS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RtError {
    #[error("slice {slice}: {msg}")]
    Signature { slice: usize, msg: String },
    #[error("diagram is not closed")]
    NotClosed,
    #[error("slice {slice}: {width} strands at rank {n} exceed the state cap")]
    TooManyStrands { slice: usize, width: usize, n: u32 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no sweep order found for a component with {vertices} vertices")]
    NoSweep { vertices: usize },
    #[error("multiweb vertex {vertex} has degree {degree} in the split web, expected {n}")]
    Degree {
        vertex: usize,
        degree: usize,
        n: u32,
    },
    #[error("division by the edge factorials is not exact: remainder {0}")]
    NotDivisible(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type RtResult<T> = Result<T, RtError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Orient {
    Down,
    Up,
}

impl Orient {
    fn token(self) -> &'static str {
        match self {
            Orient::Down => "v",
            Orient::Up => "^",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Block {
    CrossPos,
    CrossNeg,
    Cup,
    CupRev,
    Cap,
    CapRev,
    Black,
    White,
}

impl Block {
    pub fn token(self) -> &'static str {
        match self {
            Block::CrossPos => "cross+",
            Block::CrossNeg => "cross-",
            Block::Cup => "cup",
            Block::CupRev => "cup*",
            Block::Cap => "cap",
            Block::CapRev => "cap*",
            Block::Black => "black",
            Block::White => "white",
        }
    }

    fn parse(s: &str) -> Option<Block> {
        Some(match s {
            "cross+" => Block::CrossPos,
            "cross-" => Block::CrossNeg,
            "cup" => Block::Cup,
            "cup*" => Block::CupRev,
            "cap" => Block::Cap,
            "cap*" => Block::CapRev,
            "black" => Block::Black,
            "white" => Block::White,
            _ => return None,
        })
    }

    /// Strands consumed from below and produced above.
    fn io(self, n: usize) -> (Vec<Orient>, Vec<Orient>) {
        use Orient::*;
        match self {
            Block::CrossPos | Block::CrossNeg => (vec![Down, Down], vec![Down, Down]),
            Block::Cup => (vec![], vec![Down, Up]),
            Block::CupRev => (vec![], vec![Up, Down]),
            Block::Cap => (vec![Up, Down], vec![]),
            Block::CapRev => (vec![Down, Up], vec![]),
            Block::Black => (vec![Down; n], vec![]),
            Block::White => (vec![], vec![Down; n]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Slice {
    pub block: Block,
    pub pos: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WebDiagram {
    pub n: u32,
    pub slices: Vec<Slice>,
}

impl WebDiagram {
    pub fn new(n: u32) -> Self {
        WebDiagram {
            n,
            slices: Vec::new(),
        }
    }

    pub fn push(&mut self, block: Block, pos: usize) {
        self.slices.push(Slice { block, pos });
    }

    /// Signatures below each slice, followed by the top signature.
    pub fn signatures(&self) -> RtResult<Vec<Vec<Orient>>> {
        let n = self.n as usize;
        let mut sig: Vec<Orient> = Vec::new();
        let mut out = Vec::with_capacity(self.slices.len() + 1);
        for (i, s) in self.slices.iter().enumerate() {
            out.push(sig.clone());
            let (inp, outp) = s.block.io(n);
            if s.pos + inp.len() > sig.len() {
                return Err(RtError::Signature {
                    slice: i,
                    msg: format!("{} at {} overruns", s.block.token(), s.pos),
                });
            }
            if sig[s.pos..s.pos + inp.len()] != inp[..] {
                return Err(RtError::Signature {
                    slice: i,
                    msg: format!(
                        "{} expects {} at {}",
                        s.block.token(),
                        sig_text(&inp),
                        s.pos
                    ),
                });
            }
            sig.splice(s.pos..s.pos + inp.len(), outp);
        }
        out.push(sig);
        Ok(out)
    }

    pub fn is_closed(&self) -> bool {
        self.signatures()
            .map(|s| s.last().unwrap().is_empty())
            .unwrap_or(false)
    }

    /// Stacks `other` above `self`; for closed diagrams this is the disjoint
    /// union.
    pub fn stack(&self, other: &WebDiagram) -> WebDiagram {
        let mut d = self.clone();
        d.slices.extend(other.slices.iter().copied());
        d
    }

    pub fn max_width(&self) -> usize {
        self.signatures()
            .map(|s| s.iter().map(|x| x.len()).max().unwrap_or(0))
            .unwrap_or(0)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("n = {}\n", self.n);
        let sigs = self.signatures();
        for (i, sl) in self.slices.iter().enumerate() {
            match &sigs {
                Ok(sg) => s.push_str(&format!(
                    "{} @{} | strands: {}\n",
                    sl.block.token(),
                    sl.pos,
                    sig_text(&sg[i])
                )),
                Err(_) => s.push_str(&format!("{} @{}\n", sl.block.token(), sl.pos)),
            }
        }
        s
    }

    /// Parses the text form; `n` is used when the text has no rank line.
    pub fn parse(text: &str, n: Option<u32>) -> RtResult<WebDiagram> {
        let mut rank = n;
        let mut slices = Vec::new();
        let mut declared: Vec<(usize, usize, Vec<Orient>)> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| RtError::Parse { line: ln + 1, msg };
            if let Some(rest) = line.strip_prefix("n") {
                if let Some(v) = rest.trim().strip_prefix('=') {
                    rank = Some(
                        v.trim()
                            .parse()
                            .map_err(|_| perr(format!("bad rank `{}`", v.trim())))?,
                    );
                    continue;
                }
            }
            let (head, tail) = match line.split_once('|') {
                Some((h, t)) => (h.trim(), Some(t.trim())),
                None => (line, None),
            };
            let mut parts = head.split_whitespace();
            let bt = parts.next().ok_or_else(|| perr("missing block".into()))?;
            let block = Block::parse(bt).ok_or_else(|| perr(format!("unknown block `{bt}`")))?;
            let pt = parts
                .next()
                .ok_or_else(|| perr("missing position".into()))?;
            let pos: usize = pt
                .strip_prefix('@')
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| perr(format!("bad position `{pt}`")))?;
            if parts.next().is_some() {
                return Err(perr("trailing tokens".into()));
            }
            if let Some(t) = tail {
                let t = t
                    .strip_prefix("strands:")
                    .ok_or_else(|| perr("expected `strands:`".into()))?;
                let sig = t
                    .split_whitespace()
                    .map(|x| match x {
                        "v" => Ok(Orient::Down),
                        "^" => Ok(Orient::Up),
                        _ => Err(perr(format!("bad strand `{x}`"))),
                    })
                    .collect::<RtResult<Vec<_>>>()?;
                declared.push((slices.len(), ln + 1, sig));
            }
            slices.push(Slice { block, pos });
        }
        let n = rank.ok_or(RtError::Parse {
            line: 0,
            msg: "rank not given".into(),
        })?;
        let d = WebDiagram { n, slices };
        let sigs = d.signatures()?;
        for (i, line, sig) in declared {
            if sigs[i] != sig {
                return Err(RtError::Parse {
                    line,
                    msg: format!(
                        "declared strands `{}` but found `{}`",
                        sig_text(&sig),
                        sig_text(&sigs[i])
                    ),
                });
            }
        }
        Ok(d)
    }
}

impl fmt::Display for WebDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn sig_text(s: &[Orient]) -> String {
    s.iter().map(|o| o.token()).collect::<Vec<_>>().join(" ")
}

fn permutations_of(n: usize) -> Vec<(Vec<u8>, u32)> {
    fn rec(cur: &mut Vec<u8>, used: &mut Vec<bool>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i as u8 + 1);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out.into_iter()
        .map(|p| {
            let l = inversions(&p.iter().map(|&x| x as usize).collect::<Vec<_>>());
            (p, l)
        })
        .collect()
}

type State = HashMap<Vec<u8>, QLaurent>;

fn add_to(st: &mut State, k: Vec<u8>, v: QLaurent) {
    if v.is_zero() {
        return;
    }
    match st.get_mut(&k) {
        Some(x) => {
            *x += &v;
            if x.is_zero() {
                st.remove(&k);
            }
        }
        None => {
            st.insert(k, v);
        }
    }
}

/// Composes all slices bottom to top and returns the closed value.
pub fn evaluate(d: &WebDiagram) -> RtResult<QLaurent> {
    let n = d.n as usize;
    let sigs = d.signatures()?;
    if !sigs.last().unwrap().is_empty() {
        return Err(RtError::NotClosed);
    }
    for (i, s) in sigs.iter().enumerate() {
        if (d.n as u64)
            .checked_pow(s.len() as u32)
            .is_none_or(|x| x > MAX_STATES)
        {
            return Err(RtError::TooManyStrands {
                slice: i,
                width: s.len(),
                n: d.n,
            });
        }
    }
    let perms = permutations_of(n);
    let c = QLaurent::monomial(1, -1, d.n);
    let cinv = QLaurent::monomial(1, 1, d.n);
    let q = QLaurent::q();
    let qinv = QLaurent::qpow(-1);
    let qdiff = &q - &qinv;
    let neg_q = |l: u32| crate::laurent::neg_q_pow(l);
    let mut st: State = HashMap::from([(Vec::new(), QLaurent::one())]);
    for s in &d.slices {
        let p = s.pos;
        let mut next: State = HashMap::new();
        for (key, val) in st {
            let splice = |ins: &[u8], remove: usize| {
                let mut k = key[..p].to_vec();
                k.extend_from_slice(ins);
                k.extend_from_slice(&key[p + remove..]);
                k
            };
            match s.block {
                Block::Cup | Block::CupRev => {
                    for i in 1..=n as u8 {
                        let w = if s.block == Block::Cup {
                            val.clone()
                        } else {
                            val.scale_by_power(n as i64 + 1 - 2 * i as i64, 1)
                        };
                        add_to(&mut next, splice(&[i, i], 0), w);
                    }
                }
                Block::Cap | Block::CapRev => {
                    let (a, b) = (key[p], key[p + 1]);
                    if a == b {
                        let w = if s.block == Block::Cap {
                            val.clone()
                        } else {
                            val.scale_by_power(2 * a as i64 - n as i64 - 1, 1)
                        };
                        add_to(&mut next, splice(&[], 2), w);
                    }
                }
                Block::CrossPos => {
                    let (i, j) = (key[p], key[p + 1]);
                    let base = &val * &c;
                    if i > j {
                        add_to(&mut next, splice(&[j, i], 2), base);
                    } else if i == j {
                        add_to(&mut next, splice(&[i, i], 2), &base * &q);
                    } else {
                        add_to(&mut next, splice(&[i, j], 2), &base * &qdiff);
                        add_to(&mut next, splice(&[j, i], 2), base);
                    }
                }
                Block::CrossNeg => {
                    let (i, j) = (key[p], key[p + 1]);
                    let base = &val * &cinv;
                    if i < j {
                        add_to(&mut next, splice(&[j, i], 2), base);
                    } else if i == j {
                        add_to(&mut next, splice(&[i, i], 2), &base * &qinv);
                    } else {
                        add_to(&mut next, splice(&[i, j], 2), -(&base * &qdiff));
                        add_to(&mut next, splice(&[j, i], 2), base);
                    }
                }
                Block::Black => {
                    let legs = &key[p..p + n];
                    let mut seen = 0u32;
                    for &x in legs {
                        seen |= 1 << x;
                    }
                    if seen.count_ones() as usize == n {
                        let idx: Vec<usize> = legs.iter().map(|&x| x as usize).collect();
                        add_to(&mut next, splice(&[], n), &val * &neg_q(inversions(&idx)));
                    }
                }
                Block::White => {
                    for (perm, l) in &perms {
                        add_to(&mut next, splice(perm, 0), &val * &neg_q(*l));
                    }
                }
            }
        }
        st = next;
    }
    Ok(st.remove(&Vec::new()).unwrap_or_else(QLaurent::zero))
}

/// The trivially framed unknot.
pub fn unknot(n: u32) -> WebDiagram {
    let mut d = WebDiagram::new(n);
    d.push(Block::Cup, 0);
    d.push(Block::CapRev, 0);
    d
}

/// Closure of a braid on `k` downward strands; `word` lists generators
/// `±i` (1-based) for `cross±` on strands `i, i+1`.
pub fn braid_closure(n: u32, k: usize, word: &[i32]) -> WebDiagram {
    let mut d = WebDiagram::new(n);
    for i in 0..k {
        d.push(Block::Cup, i);
    }
    for &g in word {
        let b = if g > 0 {
            Block::CrossPos
        } else {
            Block::CrossNeg
        };
        d.push(b, g.unsigned_abs() as usize - 1);
    }
    for t in 0..k {
        d.push(Block::CapRev, k - 1 - t);
    }
    d
}

/// An unknot carrying one curl of the given sign.
pub fn kinked_unknot(n: u32, positive: bool) -> WebDiagram {
    let mut d = WebDiagram::new(n);
    d.push(Block::Cup, 0);
    d.push(Block::Cup, 1);
    d.push(
        if positive {
            Block::CrossPos
        } else {
            Block::CrossNeg
        },
        0,
    );
    d.push(Block::CapRev, 1);
    d.push(Block::CapRev, 0);
    d
}

/// A white and a black vertex joined by `n` parallel legs, with `word`
/// braided between them.
pub fn vertex_pair(n: u32, word: &[i32]) -> WebDiagram {
    let mut d = WebDiagram::new(n);
    d.push(Block::White, 0);
    for &g in word {
        let b = if g > 0 {
            Block::CrossPos
        } else {
            Block::CrossNeg
        };
        d.push(b, g.unsigned_abs() as usize - 1);
    }
    d.push(Block::Black, 0);
    d
}

/// Inserts `cross+` followed by `cross-` on strands `pos, pos+1` below slice
/// `at`, when both are downward.
pub fn insert_r2(d: &WebDiagram, at: usize, pos: usize) -> Option<WebDiagram> {
    let sigs = d.signatures().ok()?;
    let s = &sigs[at];
    if pos + 1 >= s.len() || s[pos] != Orient::Down || s[pos + 1] != Orient::Down {
        return None;
    }
    let mut out = d.clone();
    out.slices.insert(
        at,
        Slice {
            block: Block::CrossNeg,
            pos,
        },
    );
    out.slices.insert(
        at,
        Slice {
            block: Block::CrossPos,
            pos,
        },
    );
    Some(out)
}

/// Rewrites the first `i, i+1, i` crossing triple of equal sign starting at
/// slice `at` into `i+1, i, i+1`.
pub fn apply_r3(d: &WebDiagram, at: usize) -> Option<WebDiagram> {
    let sl = d.slices.get(at..at + 3)?;
    let b = sl[0].block;
    if !matches!(b, Block::CrossPos | Block::CrossNeg) || sl[1].block != b || sl[2].block != b {
        return None;
    }
    let (x, y, z) = (sl[0].pos, sl[1].pos, sl[2].pos);
    let (nx, ny) = if x == z && y == x + 1 {
        (x + 1, x)
    } else if x == z && x == y + 1 {
        (y, x)
    } else {
        return None;
    };
    let mut out = d.clone();
    out.slices[at].pos = nx;
    out.slices[at + 1].pos = ny;
    out.slices[at + 2].pos = nx;
    Some(out)
}

/// Swaps slices `i` and `i+1` when they touch disjoint strands.
pub fn commute_slices(d: &WebDiagram, i: usize) -> Option<WebDiagram> {
    let n = d.n as usize;
    let (a, b) = (*d.slices.get(i)?, *d.slices.get(i + 1)?);
    let (ain, aout) = a.block.io(n);
    let (bin, bout) = b.block.io(n);
    let (na, nb) = if b.pos >= a.pos + aout.len() {
        let nb = Slice {
            block: b.block,
            pos: b.pos + ain.len() - aout.len(),
        };
        (
            Slice {
                block: a.block,
                pos: a.pos,
            },
            nb,
        )
    } else if b.pos + bin.len() <= a.pos {
        let na = Slice {
            block: a.block,
            pos: a.pos + bout.len() - bin.len(),
        };
        (
            na,
            Slice {
                block: b.block,
                pos: b.pos,
            },
        )
    } else {
        return None;
    };
    let mut out = d.clone();
    out.slices[i] = nb;
    out.slices[i + 1] = na;
    out.signatures().ok()?;
    Some(out)
}

/// Results of the isotopy checks on one diagram.
#[derive(Clone, Debug, Serialize)]
pub struct IsotopyReport {
    pub value: QLaurent,
    pub r2_checked: usize,
    pub r3_checked: usize,
    pub commutations_checked: usize,
    pub failures: Vec<String>,
    pub positive_kink: QLaurent,
    pub negative_kink: QLaurent,
    pub kink_product_is_one: bool,
}

/// Kink factors `θ±` with `kinked_unknot(±) = θ± [n]`.
pub fn kink_factors(n: u32) -> RtResult<(QLaurent, QLaurent)> {
    let un = QLaurent::qint(n);
    let div = |d: WebDiagram| -> RtResult<QLaurent> {
        evaluate(&d)?
            .exact_div(&un)
            .map_err(|e| RtError::NotDivisible(e.to_string()))
    };
    Ok((div(kinked_unknot(n, true))?, div(kinked_unknot(n, false))?))
}

/// Factor picked up by a vertex pair when two adjacent legs cross.
pub fn vertex_kink_factor(n: u32, positive: bool) -> RtResult<QLaurent> {
    let plain = evaluate(&vertex_pair(n, &[]))?;
    let twisted = evaluate(&vertex_pair(n, &[if positive { 1 } else { -1 }]))?;
    twisted
        .exact_div(&plain)
        .map_err(|e| RtError::NotDivisible(e.to_string()))
}

/// Applies every available R2 insertion, R3 move and slice commutation to
/// `d` and checks that the value never changes; also measures kinks.
pub fn isotopy_suite(d: &WebDiagram) -> RtResult<IsotopyReport> {
    let value = evaluate(d)?;
    let sigs = d.signatures()?;
    let mut failures = Vec::new();
    let (mut r2, mut r3, mut cm) = (0, 0, 0);
    for (at, s) in sigs.iter().enumerate().take(d.slices.len() + 1) {
        for pos in 0..s.len().saturating_sub(1) {
            if let Some(e) = insert_r2(d, at, pos) {
                if (d.n as u64).pow(e.max_width() as u32) > MAX_STATES {
                    continue;
                }
                r2 += 1;
                if evaluate(&e)? != value {
                    failures.push(format!("R2 at slice {at}, strand {pos}"));
                }
            }
        }
    }
    for at in 0..d.slices.len() {
        if let Some(e) = apply_r3(d, at) {
            r3 += 1;
            if evaluate(&e)? != value {
                failures.push(format!("R3 at slice {at}"));
            }
        }
        if let Some(e) = commute_slices(d, at) {
            cm += 1;
            if evaluate(&e)? != value {
                failures.push(format!("commutation at slice {at}"));
            }
        }
    }
    let (pk, nk) = kink_factors(d.n)?;
    let kink_product_is_one = (&pk * &nk).is_one();
    Ok(IsotopyReport {
        value,
        r2_checked: r2,
        r3_checked: r3,
        commutations_checked: cm,
        failures,
        positive_kink: pk,
        negative_kink: nk,
        kink_product_is_one,
    })
}

/// Sweep-line layout of one connected split web.
struct Sweep<'a> {
    h: &'a CiliatedPlanarGraph,
    /// Half-edges at each vertex in counterclockwise order.
    ccw: Vec<Vec<usize>>,
}

/// One placed vertex: the frontier offset of its incoming block, the number
/// of incoming edges, and the start of `C` in `ccw[v]`.
#[derive(Clone, Copy, Debug)]
struct Placement {
    v: usize,
    a: usize,
    k: usize,
    start: usize,
}

impl<'a> Sweep<'a> {
    fn new(h: &'a CiliatedPlanarGraph) -> Self {
        let ccw = (0..h.num_vertices())
            .map(|v| {
                let mut r = h.rotation(v).to_vec();
                if h.color(v) == Color::White {
                    r.reverse();
                }
                r
            })
            .collect();
        Sweep { h, ccw }
    }

    /// Gap index in `ccw[v]` of corner `c`: the sector from `ccw[g]` to
    /// `ccw[g+1]` counterclockwise.
    fn gap(&self, v: usize, c: usize) -> usize {
        let d = self.h.degree(v);
        match self.h.color(v) {
            Color::Black => c,
            Color::White => (2 * d - 2 - c) % d,
        }
    }

    fn place(&self, v: usize, frontier: &[usize], done: &[bool]) -> Option<Placement> {
        let a_list = &self.ccw[v];
        let d = a_list.len();
        let is_in = |e: usize| done[self.h.edge(e).other(v)];
        let k = a_list.iter().filter(|&&e| is_in(e)).count();
        if k == 0 {
            return None;
        }
        let mut pos: Vec<usize> = a_list
            .iter()
            .filter(|&&e| is_in(e))
            .map(|&e| frontier.iter().position(|&f| f == e))
            .collect::<Option<_>>()?;
        pos.sort_unstable();
        let a = pos[0];
        if pos[k - 1] != a + k - 1 {
            return None;
        }
        let block = &frontier[a..a + k];
        let start = if k < d {
            (0..d).find(|&i| is_in(a_list[i]) && !is_in(a_list[(i + d - 1) % d]))?
        } else {
            a_list.iter().position(|&e| e == block[0])?
        };
        (0..k)
            .all(|t| a_list[(start + t) % d] == block[t])
            .then_some(Placement { v, a, k, start })
    }

    /// New frontier after placing `p`: outgoing edges left to right.
    fn advance(&self, frontier: &[usize], p: &Placement) -> Vec<usize> {
        let a_list = &self.ccw[p.v];
        let d = a_list.len();
        let mut f = frontier[..p.a].to_vec();
        f.extend((p.k..d).rev().map(|t| a_list[(p.start + t) % d]));
        f.extend_from_slice(&frontier[p.a + p.k..]);
        f
    }

    fn search(&self) -> RtResult<Vec<Placement>> {
        let nv = self.h.num_vertices();
        let outer = &self.h.faces()[self.h.outer_face_index()];
        let mut budget = MAX_SWEEP_STEPS;
        for &(s, c) in &outer.corners {
            let g0 = self.gap(s, c);
            let d = self.h.degree(s);
            let first = Placement {
                v: s,
                a: 0,
                k: 0,
                start: (g0 + 1) % d,
            };
            let mut done = vec![false; nv];
            done[s] = true;
            let frontier = self.advance(&[], &first);
            let mut order = vec![first];
            if self.dfs(&frontier, &mut done, &mut order, &mut budget) {
                return Ok(order);
            }
            if budget == 0 {
                break;
            }
        }
        Err(RtError::NoSweep { vertices: nv })
    }

    fn dfs(
        &self,
        frontier: &[usize],
        done: &mut [bool],
        order: &mut Vec<Placement>,
        budget: &mut usize,
    ) -> bool {
        if order.len() == done.len() {
            return frontier.is_empty();
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let mut cands: Vec<(usize, Placement, Vec<usize>)> = (0..done.len())
            .filter(|&v| !done[v])
            .filter_map(|v| self.place(v, frontier, done))
            .map(|p| {
                let f = self.advance(frontier, &p);
                (f.len(), p, f)
            })
            .collect();
        cands.sort_by_key(|c| (c.0, c.1.v));
        for (_, p, f) in cands {
            done[p.v] = true;
            order.push(p);
            if self.dfs(&f, done, order, budget) {
                return true;
            }
            order.pop();
            done[p.v] = false;
        }
        false
    }

    /// Emits the slices of every placed vertex.
    fn emit(&self, order: &[Placement], d: &mut WebDiagram) {
        for p in order {
            let v = p.v;
            let deg = self.h.degree(v);
            let cil = (self.gap(v, self.h.cilium(v)) + deg - p.start) % deg;
            let (a, k, j) = (p.a, p.k, deg - p.k);
            match self.h.color(v) {
                Color::Black => {
                    if k == 0 || cil + 1 >= k {
                        let pre = deg - 1 - cil;
                        let suf = cil + 1 - k;
                        for t in 0..pre {
                            d.push(Block::CupRev, a + t);
                        }
                        for t in 0..suf {
                            d.push(Block::Cup, a + 2 * pre + k + t);
                        }
                        d.push(Block::Black, a + pre);
                    } else {
                        let x = k - cil - 1;
                        for t in 0..j {
                            d.push(Block::CupRev, a + t);
                        }
                        for t in 0..x {
                            d.push(Block::CupRev, a + j + t);
                        }
                        d.push(Block::Black, a + j + x);
                        for t in 0..x {
                            d.push(Block::Cap, a + j + x - 1 - t);
                        }
                    }
                }
                Color::White => {
                    let r = if k > 0 && cil < k {
                        Some(cil + 1)
                    } else if cil == deg - 1 {
                        Some(0)
                    } else {
                        None
                    };
                    match r {
                        Some(r) => {
                            d.push(Block::White, a + r);
                            for t in 0..r {
                                d.push(Block::Cap, a + r - 1 - t);
                            }
                            for t in 0..k - r {
                                d.push(Block::CapRev, a + j + k - r - 1 - t);
                            }
                        }
                        None => {
                            let x = cil + 1 - k;
                            for t in 0..x {
                                d.push(Block::CupRev, a + k + t);
                            }
                            d.push(Block::White, a + k + x);
                            for t in 0..x {
                                d.push(Block::Cap, a + k + x - 1 - t);
                            }
                            for t in 0..k {
                                d.push(Block::Cap, a + k - 1 - t);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Sweep-line diagram of the split web of `m`, one component after another.
pub fn from_multiweb(g: &CiliatedPlanarGraph, m: &Multiweb) -> RtResult<WebDiagram> {
    let mut d = WebDiagram::new(m.n);
    for comp in split_graph(g, m)? {
        let h = &comp.graph;
        for v in 0..h.num_vertices() {
            if h.degree(v) != m.n as usize {
                return Err(RtError::Degree {
                    vertex: comp.vertex_map[v],
                    degree: h.degree(v),
                    n: m.n,
                });
            }
        }
        let sw = Sweep::new(h);
        let order = sw.search()?;
        sw.emit(&order, &mut d);
    }
    Ok(d)
}

/// `evaluate(from_multiweb) / Π_e [m_e]!`, which must divide exactly.
pub fn rt_trace(g: &CiliatedPlanarGraph, m: &Multiweb) -> RtResult<QLaurent> {
    let v = evaluate(&from_multiweb(g, m)?)?;
    let den: QLaurent = m.mult.iter().map(|&k| QLaurent::qfact(k)).product();
    v.exact_div(&den).map_err(|e| match e {
        LaurentError::NotDivisible { remainder } => RtError::NotDivisible(remainder.to_string()),
        other => RtError::NotDivisible(other.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::build_quantum_identity;
    use crate::generators;
    use crate::multiweb::enumerate_multiwebs;
    use crate::qtrace::trace_diagonal;

    #[test]
    fn unknot_and_empty() {
        for n in 1..=4 {
            assert_eq!(evaluate(&unknot(n)).unwrap(), QLaurent::qint(n));
            assert_eq!(evaluate(&WebDiagram::new(n)).unwrap(), QLaurent::one());
            let two = unknot(n).stack(&unknot(n));
            assert_eq!(evaluate(&two).unwrap(), QLaurent::qint(n).pow(2));
            let mut rev = WebDiagram::new(n);
            rev.push(Block::CupRev, 0);
            rev.push(Block::Cap, 0);
            assert_eq!(evaluate(&rev).unwrap(), QLaurent::qint(n));
        }
    }

    #[test]
    fn vertex_pair_value() {
        for n in 1..=4u32 {
            let v = evaluate(&vertex_pair(n, &[])).unwrap();
            let want = QLaurent::qfact(n).scale_by_power(crate::laurent::binom2(n) as i64, 1);
            assert_eq!(v, want);
        }
    }

    #[test]
    fn kink_factors_match_ribbon_twist() {
        for n in 1..=4u32 {
            let (p, m) = kink_factors(n).unwrap();
            assert_eq!(p, QLaurent::monomial(1, (n * n - 1) as i64, n));
            assert_eq!(m, QLaurent::monomial(1, -((n * n - 1) as i64), n));
        }
        for n in 2..=4u32 {
            let k = (n + 1) as i64;
            assert_eq!(
                vertex_kink_factor(n, true).unwrap(),
                QLaurent::monomial(-1, -k, n)
            );
            assert_eq!(
                vertex_kink_factor(n, false).unwrap(),
                QLaurent::monomial(-1, k, n)
            );
        }
    }

    #[test]
    fn text_round_trip() {
        let d = braid_closure(2, 2, &[1, 1, -1]);
        let t = d.to_text();
        assert!(t.contains("cross+ @0 | strands: v v ^ ^"));
        assert_eq!(WebDiagram::parse(&t, None).unwrap(), d);
        assert!(WebDiagram::parse("cap @0", Some(2)).is_err());
        assert!(WebDiagram::parse("cup @0 | strands: v", Some(2)).is_err());
    }

    #[test]
    fn reidemeister_invariance() {
        for n in 2..=3 {
            let d = braid_closure(n, 3, &[1, 2, 1, -2]);
            let r = isotopy_suite(&d).unwrap();
            assert!(r.failures.is_empty(), "{:?}", r.failures);
            assert!(r.r3_checked > 0 && r.r2_checked > 0 && r.commutations_checked > 0);
            assert!(r.kink_product_is_one);
        }
    }

    #[test]
    fn matches_traces_for_rotated_cilia() {
        let base = [
            generators::cycle(2),
            generators::zigzag(3),
            generators::grid2xm(2),
        ];
        for g in base {
            for shift in 0..3usize {
                let cil: Vec<usize> = (0..g.num_vertices())
                    .map(|v| (v * 7 + shift) % g.degree(v))
                    .collect();
                let g = g.with_cilia(cil).unwrap();
                for n in 2..=3u32 {
                    let phi = build_quantum_identity(&g, n).unwrap();
                    for m in enumerate_multiwebs(&g, n) {
                        assert_eq!(
                            rt_trace(&g, &m).unwrap(),
                            trace_diagonal(&phi, &g, &m).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn matches_planar_traces() {
        let graphs = [
            generators::cycle(1),
            generators::cycle(2),
            generators::grid2xm(3),
            generators::square_grid(2, 2).unwrap(),
            generators::honeycomb_patch(1, 1).unwrap(),
        ];
        for g in graphs {
            for n in 1..=3u32 {
                let phi = build_quantum_identity(&g, n).unwrap();
                for m in enumerate_multiwebs(&g, n) {
                    let want = trace_diagonal(&phi, &g, &m).unwrap();
                    let got = rt_trace(&g, &m).unwrap();
                    assert_eq!(got, want, "n={n} m={:?}", m.mult);
                }
            }
        }
    }
}
