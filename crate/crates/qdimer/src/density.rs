//! Double-dimer loop density on the honeycomb: lattice Green coefficients,
//! the quartic correlation series, and the finite-patch cross-check.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::kasteleyn::{build_signs, KasteleynError};
use crate::multiweb::enumerate_multiwebs;
use crate::par;
use crate::pgraph::CiliatedPlanarGraph;
use crate::stats::{expected_loops, StatsError};

/// Absolute tolerance for each Green coefficient.
pub const GREEN_TOL: f64 = 1e-10;
const MAX_BISECTIONS: u32 = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("quadrature did not converge for B({x},{y})")]
    Quadrature { x: i64, y: i64 },
    #[error("cutoff must be at least 10, got {0}")]
    Cutoff(usize),
    #[error("graph is not an embedded honeycomb patch: {0}")]
    NotHoneycomb(String),
    #[error("Kasteleyn matrix is singular")]
    Singular,
    #[error(transparent)]
    Kasteleyn(#[from] KasteleynError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

pub type DensityResult<T> = Result<T, DensityError>;

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, o: CompensatedSum) {
        self.add(o.sum);
        self.add(o.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Kronrod estimate and `|K − G|` on `[a, b]`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let (f1, f2) = (f(c - h * XGK[i]), f(c + h * XGK[i]));
        k += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod 7/15 by bisection. Returns the integral and the
/// summed error estimate, or `None` when the bisection depth is exhausted.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Option<(f64, f64)> {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Option<(f64, f64)> {
        let (v, e) = gk15(f, a, b);
        if e <= tol {
            return Some((v, e));
        }
        if depth == 0 {
            return None;
        }
        let m = 0.5 * (a + b);
        let (v1, e1) = rec(f, a, m, 0.5 * tol, depth - 1)?;
        let (v2, e2) = rec(f, m, b, 0.5 * tol, depth - 1)?;
        Some((v1 + v2, e1 + e2))
    }
    rec(f, a, b, tol, MAX_BISECTIONS)
}

/// `B_{x,y}` with its quadrature error estimate.
///
/// The `z`-integral is a residue: for `x ≥ 0` it equals `(−1)^x (1+w)^{−x−1}`
/// where `|1+w| > 1` and vanishes elsewhere; for `x < 0` it equals
/// `(−1−w)^{−x−1}` where `|1+w| < 1`. With `w = e^{iθ}` and
/// `1+w = 2cos(θ/2) e^{iθ/2}`, conjugation symmetry leaves a real integral
/// over half the arc.
pub fn green_coefficient(x: i64, y: i64) -> DensityResult<(f64, f64)> {
    let p = -(x + 1);
    let phase = 0.5 * (x + 1) as f64 + y as f64;
    let sign = if x.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let f = move |t: f64| sign * (2.0 * (0.5 * t).cos()).powi(p as i32) * (phase * t).cos();
    let (a, b, s) = if x >= 0 {
        (0.0, 2.0 * PI / 3.0, 1.0)
    } else {
        (2.0 * PI / 3.0, PI, -1.0)
    };
    let (v, e) =
        integrate(&f, a, b, GREEN_TOL * PI * 0.01).ok_or(DensityError::Quadrature { x, y })?;
    Ok((s * v / PI, e / PI))
}

/// `B_{x,y}` for `|x|, |y| ≤ half`.
#[derive(Clone, Debug, Serialize)]
pub struct GreenTable {
    pub cutoff: usize,
    pub half: i64,
    values: Vec<f64>,
    pub max_error: f64,
}

impl GreenTable {
    /// Table for the series with cutoff `R`, covering `|x|, |y| ≤ R + 2`.
    pub fn for_cutoff(cutoff: usize) -> DensityResult<Self> {
        Self::with_half(cutoff, cutoff as i64 + 2)
    }

    pub fn with_half(cutoff: usize, half: i64) -> DensityResult<Self> {
        let side = (2 * half + 1) as usize;
        let rows = par::map_range(side, |i| {
            let x = i as i64 - half;
            (0..side)
                .map(|j| green_coefficient(x, j as i64 - half))
                .collect::<DensityResult<Vec<(f64, f64)>>>()
        });
        let mut values = Vec::with_capacity(side * side);
        let mut max_error: f64 = 0.0;
        for r in rows {
            for (v, e) in r? {
                values.push(v);
                max_error = max_error.max(e);
            }
        }
        Ok(GreenTable {
            cutoff,
            half,
            values,
            max_error,
        })
    }

    /// Row-major values over `-half..=half` in both coordinates.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn side(&self) -> usize {
        (2 * self.half + 1) as usize
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x.abs() <= self.half && y.abs() <= self.half
    }

    pub fn get(&self, x: i64, y: i64) -> f64 {
        assert!(self.contains(x, y), "B({x},{y}) outside the table");
        let s = self.side() as i64;
        self.values[((x + self.half) * s + (y + self.half)) as usize]
    }

    /// Largest `|B_{x,y} + B_{x−1,y} + B_{x,y−1} − δ|` over the table.
    pub fn recurrence_residual(&self) -> f64 {
        let h = self.half;
        let rows = par::map_range((2 * h) as usize, |i| {
            let x = i as i64 - h + 1;
            let mut worst: f64 = 0.0;
            for y in -h + 1..=h {
                let d = if x == 0 && y == 0 { 1.0 } else { 0.0 };
                worst =
                    worst.max((self.get(x, y) + self.get(x - 1, y) + self.get(x, y - 1) - d).abs());
            }
            worst
        });
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Largest deviation from `B_{x,y} = B_{y,x} = B_{−1−x−y,y}`.
    pub fn symmetry_residual(&self) -> f64 {
        let h = self.half;
        let mut worst: f64 = 0.0;
        for x in -h..=h {
            for y in -h..=h {
                let b = self.get(x, y);
                worst = worst.max((b - self.get(y, x)).abs());
                if self.contains(-1 - x - y, y) {
                    worst = worst.max((b - self.get(-1 - x - y, y)).abs());
                }
            }
        }
        worst
    }

    /// CSV with a versioned header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# qdimer green-table v1\nx,y,B\n");
        for x in -self.half..=self.half {
            for y in -self.half..=self.half {
                s.push_str(&format!("{x},{y},{:.17e}\n", self.get(x, y)));
            }
        }
        s
    }
}

/// `−1/54 + 1/(6√3π)`.
pub fn rho_constant_term() -> f64 {
    -1.0 / 54.0 + 1.0 / (6.0 * 3f64.sqrt() * PI)
}

/// The loop density series and its diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct RhoReport {
    pub cutoff: usize,
    pub rho: f64,
    pub constant_term: f64,
    pub series: f64,
    /// `ρ(r)` for every `r ≤ cutoff`.
    pub partial: Vec<f64>,
    pub target: f64,
    pub relative_deviation: f64,
    /// `ρ(R) − ρ(⌊R/2⌋)`.
    pub tail_estimate: f64,
    pub b00: f64,
    pub b_m1_0: f64,
    pub b_1_0: f64,
    pub b_m2_0: f64,
    /// `E(X_u²) = 2 B_{0,0}²`.
    pub x_squared: f64,
    pub recurrence_residual: f64,
    pub quadrature_error: f64,
}

/// `ρ(R)` from a table covering `|x|, |y| ≤ R + 2`.
pub fn rho_from_table(t: &GreenTable) -> DensityResult<RhoReport> {
    let r = t.cutoff as i64;
    if r < 10 {
        return Err(DensityError::Cutoff(t.cutoff));
    }
    assert!(t.half >= r + 2, "table too small for the cutoff");
    let rows = par::map_range((2 * r + 1) as usize, |i| {
        let x = i as i64 - r;
        let mut shells = vec![CompensatedSum::default(); r as usize + 1];
        for y in -r..=r {
            let b = t.get(x, y);
            let c = t.get(-1 - x, -y);
            let term = b * b * (c * c - t.get(-2 - x, -y) * t.get(-x, -y));
            shells[x.abs().max(y.abs()) as usize].add(term);
        }
        shells
    });
    let mut shells = vec![CompensatedSum::default(); r as usize + 1];
    for row in rows {
        for (s, v) in shells.iter_mut().zip(row) {
            s.merge(v);
        }
    }
    let constant_term = rho_constant_term();
    let mut acc = CompensatedSum::default();
    let mut partial = Vec::with_capacity(shells.len());
    for s in &shells {
        acc.merge(*s);
        partial.push(constant_term + 0.5 * acc.value());
    }
    let series = 0.5 * acc.value();
    let rho = constant_term + series;
    let target = 1.0 / 27.0;
    Ok(RhoReport {
        cutoff: t.cutoff,
        rho,
        constant_term,
        series,
        tail_estimate: rho - partial[t.cutoff / 2],
        partial,
        target,
        relative_deviation: rho / target - 1.0,
        b00: t.get(0, 0),
        b_m1_0: t.get(-1, 0),
        b_1_0: t.get(1, 0),
        b_m2_0: t.get(-2, 0),
        x_squared: 2.0 * t.get(0, 0).powi(2),
        recurrence_residual: t.recurrence_residual(),
        quadrature_error: t.max_error,
    })
}

pub fn rho_honeycomb(cutoff: usize) -> DensityResult<RhoReport> {
    if cutoff < 10 {
        return Err(DensityError::Cutoff(cutoff));
    }
    rho_from_table(&GreenTable::for_cutoff(cutoff)?)
}

/// Non-vertical edges at each vertex of an embedded honeycomb patch, split
/// by the side on which the other endpoint lies.
#[derive(Clone, Debug)]
struct Sides {
    left: Vec<Option<usize>>,
    right: Vec<Option<usize>>,
}

fn patch_sides(g: &CiliatedPlanarGraph) -> DensityResult<Sides> {
    let pos = g
        .positions()
        .ok_or_else(|| DensityError::NotHoneycomb("no positions".into()))?;
    let nv = g.num_vertices();
    let mut left = vec![None; nv];
    let mut right = vec![None; nv];
    for (e, ed) in g.edges().iter().enumerate() {
        let (pb, pw) = (pos[ed.black], pos[ed.white]);
        if (pb[0] - pw[0]).abs() < 1e-9 {
            if pb[1] >= pw[1] {
                return Err(DensityError::NotHoneycomb(format!(
                    "vertical edge {e} has black on top"
                )));
            }
            continue;
        }
        if pb[1] <= pw[1] {
            return Err(DensityError::NotHoneycomb(format!(
                "slanted edge {e} has black below"
            )));
        }
        for (v, here, there) in [(ed.black, pb, pw), (ed.white, pw, pb)] {
            let slot = if there[0] < here[0] {
                &mut left[v]
            } else {
                &mut right[v]
            };
            if slot.replace(e).is_some() {
                return Err(DensityError::NotHoneycomb(format!(
                    "vertex {v} has two edges on one side"
                )));
            }
        }
    }
    Ok(Sides { left, right })
}

fn exact_inverse(mut a: Vec<Vec<BigRational>>) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    let (x, y) = (&a[col][j] * &f, &inv[col][j] * &f);
                    a[r][j] -= x;
                    inv[r][j] -= y;
                }
            }
        }
    }
    Some(inv)
}

/// Exact single-dimer edge probabilities of a finite graph from its
/// Kasteleyn matrix.
pub struct EdgeProbabilities {
    ends: Vec<(usize, usize)>,
    k: Vec<BigRational>,
    kinv: Vec<Vec<BigRational>>,
}

impl EdgeProbabilities {
    pub fn new(g: &CiliatedPlanarGraph) -> DensityResult<Self> {
        let eps = build_signs(g, 1)?;
        let nb = g.n_half();
        let mut m = vec![vec![BigRational::zero(); nb]; nb];
        let mut ends = Vec::with_capacity(g.num_edges());
        let mut k = Vec::with_capacity(g.num_edges());
        for (e, ed) in g.edges().iter().enumerate() {
            let (w, b) = (g.class_index(ed.white), g.class_index(ed.black));
            if !m[w][b].is_zero() {
                return Err(DensityError::NotHoneycomb("parallel edges".into()));
            }
            let s = BigRational::from_integer(BigInt::from(eps.signs[e]));
            m[w][b] = s.clone();
            ends.push((w, b));
            k.push(s);
        }
        let kinv = exact_inverse(m).ok_or(DensityError::Singular)?;
        Ok(EdgeProbabilities { ends, k, kinv })
    }

    /// `P(e)`.
    pub fn single(&self, e: usize) -> BigRational {
        let (w, b) = self.ends[e];
        &self.k[e] * &self.kinv[b][w]
    }

    /// `P(e, f)`: both edges in a uniformly random dimer cover.
    pub fn pair(&self, e: usize, f: usize) -> BigRational {
        if e == f {
            return self.single(e);
        }
        let ((w, b), (w2, b2)) = (self.ends[e], self.ends[f]);
        let det = &self.kinv[b][w] * &self.kinv[b2][w2] - &self.kinv[b][w2] * &self.kinv[b2][w];
        &self.k[e] * &self.k[f] * det
    }
}

/// Both computations of `E(L)` on a finite honeycomb patch.
#[derive(Clone, Debug, Serialize)]
pub struct FinitePatchReport {
    pub vertices: usize,
    #[serde(with = "crate::stats::as_text")]
    pub enumeration: BigRational,
    #[serde(with = "crate::stats::as_text")]
    pub pair_correlation: BigRational,
    pub difference: f64,
    pub edge_probabilities_ok: bool,
    pub morse: MorseReport,
}

impl FinitePatchReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.difference <= tol && self.edge_probabilities_ok && self.morse.failures == 0
    }
}

/// `¼ Σ_{u,v} E(X_u X_v)` with `X_v = ±1` by the side of the colour-1 edge at
/// a local extremum and `0` otherwise.
pub fn pair_correlation_loops(g: &CiliatedPlanarGraph) -> DensityResult<BigRational> {
    let sides = patch_sides(g)?;
    let probs = EdgeProbabilities::new(g)?;
    let ext: Vec<(usize, usize)> = (0..g.num_vertices())
        .filter_map(|v| Some((sides.left[v]?, sides.right[v]?)))
        .collect();
    let rows = par::map_vec(&ext, |&(lu, ru)| {
        let mut acc = BigRational::zero();
        for &(lv, rv) in &ext {
            for (e, fe, se) in [(lu, ru, 1i64), (ru, lu, -1)] {
                for (e2, f2, s2) in [(lv, rv, 1i64), (rv, lv, -1)] {
                    let t = probs.pair(e, e2) * probs.pair(fe, f2);
                    if se * s2 > 0 {
                        acc += t;
                    } else {
                        acc -= t;
                    }
                }
            }
        }
        acc
    });
    let total = rows.into_iter().fold(BigRational::zero(), |a, b| a + b);
    Ok(total / BigRational::from_integer(4.into()))
}

pub fn finite_patch_expected_loops(g: &CiliatedPlanarGraph) -> DensityResult<FinitePatchReport> {
    let pair_correlation = pair_correlation_loops(g)?;
    let enumeration = expected_loops(g)?;
    let probs = EdgeProbabilities::new(g)?;
    let edge_probabilities_ok = (0..g.num_vertices()).all(|v| {
        let s = g
            .rotation(v)
            .iter()
            .fold(BigRational::zero(), |a, &e| a + probs.single(e));
        s.is_one()
    });
    let difference = (&enumeration - &pair_correlation)
        .abs()
        .to_f64()
        .unwrap_or(f64::INFINITY);
    Ok(FinitePatchReport {
        vertices: g.num_vertices(),
        enumeration,
        pair_correlation,
        difference,
        edge_probabilities_ok,
        morse: morse_check(g)?,
    })
}

/// Signed extremum counts on every loop of every 2-multiweb.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorseReport {
    pub multiwebs: usize,
    pub loops: usize,
    pub failures: usize,
}

/// Right-to-left maxima − left-to-right maxima + left-to-right minima −
/// right-to-left minima along a closed polygon in traversal order.
pub fn signed_extrema(pts: &[[f64; 2]]) -> i32 {
    let n = pts.len();
    let mut total = 0;
    for i in 0..n {
        let (p, c, q) = (pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
        let leftward = q[0] < p[0];
        if p[1] < c[1] && q[1] < c[1] {
            total += if leftward { 1 } else { -1 };
        } else if p[1] > c[1] && q[1] > c[1] {
            total += if leftward { -1 } else { 1 };
        }
    }
    total
}

fn signed_area(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1])
        .sum::<f64>()
        / 2.0
}

pub fn morse_check(g: &CiliatedPlanarGraph) -> DensityResult<MorseReport> {
    let pos = g
        .positions()
        .ok_or_else(|| DensityError::NotHoneycomb("no positions".into()))?;
    let webs = enumerate_multiwebs(g, 2);
    let mut report = MorseReport {
        multiwebs: webs.len(),
        loops: 0,
        failures: 0,
    };
    for m in &webs {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.num_vertices()];
        for (e, &k) in m.mult.iter().enumerate() {
            if k == 1 {
                let ed = g.edge(e);
                adj[ed.black].push(ed.white);
                adj[ed.white].push(ed.black);
            }
        }
        let mut seen = vec![false; g.num_vertices()];
        for start in 0..g.num_vertices() {
            if seen[start] || adj[start].is_empty() {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let (mut prev, mut cur) = (start, adj[start][0]);
            while cur != start {
                seen[cur] = true;
                cyc.push(cur);
                let next = if adj[cur][0] == prev {
                    adj[cur][1]
                } else {
                    adj[cur][0]
                };
                (prev, cur) = (cur, next);
            }
            let pts: Vec<[f64; 2]> = cyc.iter().map(|&v| pos[v]).collect();
            let want = if signed_area(&pts) > 0.0 { 2 } else { -2 };
            report.loops += 1;
            if signed_extrema(&pts) != want {
                report.failures += 1;
            }
        }
    }
    Ok(report)
}

/// Sum of `X_v` over vertices for one coloured double-dimer configuration,
/// given the colour-1 and colour-2 edge at each vertex.
pub fn extremum_sum(
    g: &CiliatedPlanarGraph,
    first: &[usize],
    second: &[usize],
) -> DensityResult<i64> {
    let sides = patch_sides(g)?;
    let mut total = 0;
    for v in 0..g.num_vertices() {
        if let (Some(l), Some(r)) = (sides.left[v], sides.right[v]) {
            if first[v] == l && second[v] == r {
                total += 1;
            } else if first[v] == r && second[v] == l {
                total -= 1;
            }
        }
    }
    Ok(total)
}

/// The dimer edge at each vertex for a cover given as an edge list.
pub fn cover_at_vertices(g: &CiliatedPlanarGraph, cover: &[usize]) -> Vec<usize> {
    let mut at = vec![usize::MAX; g.num_vertices()];
    for &e in cover {
        let ed = g.edge(e);
        at[ed.black] = e;
        at[ed.white] = e;
    }
    at
}
