//! The twist random variable, natural and uniform measures, loop counts for
//! `n = 2`, the local variable `Y^L`, and snake-graph generating functions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::connection::{build_quantum_identity, ConnectionError};
use crate::laurent::{binom2, QLaurent};
use crate::multiweb::{
    dimer_covers, enumerate_multiwebs, for_each_edge_coloring, mask_colors, Multiweb,
};
use crate::par;
use crate::pgraph::{CiliatedPlanarGraph, GraphError};
use crate::qtrace::{trace_full, TraceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("graph has no dimer cover")]
    NoDimerCover,
    #[error("expected a 2-multiweb")]
    NotTwoMultiweb,
    #[error("a trivial ciliation is required")]
    NotTrivial,
    #[error("internal consistency violation: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type StatsResult<T> = Result<T, StatsError>;

/// Serializers that render exact numbers as decimal strings such as `17/18`.
pub mod as_text {
    use serde::Serializer;

    pub fn serialize<T: std::fmt::Display, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }
}

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// The same graph with a positive ciliation, reusing the current one when it
/// is already positive.
pub fn positive_version(g: &CiliatedPlanarGraph) -> StatsResult<CiliatedPlanarGraph> {
    if g.is_positive_ciliation() {
        return Ok(g.clone());
    }
    let d = dimer_covers(g);
    let first = d.first().ok_or(StatsError::NoDimerCover)?;
    Ok(g.positive_ciliation_from_dimer(first)?)
}

/// `X_n(m) = f''(1) / f(1)` with `f` the normalized `I_q` trace.
pub fn twist(g: &CiliatedPlanarGraph, m: &Multiweb) -> StatsResult<BigRational> {
    let phi = build_quantum_identity(g, m.n)?;
    let t = trace_full(&phi, g, m)?;
    let (v, _, d2) = t.normalized.derivs_at_one();
    Ok(d2 / v)
}

/// Number of loop components of a 2-multiweb.
pub fn loops(g: &CiliatedPlanarGraph, m: &Multiweb) -> StatsResult<u32> {
    if m.n != 2 || !m.is_valid(g) {
        return Err(StatsError::NotTwoMultiweb);
    }
    let nv = g.num_vertices();
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut on_loop = vec![false; nv];
    for (e, &k) in m.mult.iter().enumerate() {
        if k == 1 {
            let ed = g.edge(e);
            on_loop[ed.black] = true;
            on_loop[ed.white] = true;
            let (a, b) = (find(&mut parent, ed.black), find(&mut parent, ed.white));
            parent[a] = b;
        }
    }
    Ok((0..nv)
        .filter(|&v| on_loop[v] && find(&mut parent, v) == v)
        .count() as u32)
}

/// One row of a measure report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureRow {
    pub multiweb: Multiweb,
    /// Classical trace `tr_1(m)` for the graph's own ciliation.
    #[serde(with = "as_text")]
    pub tr1: BigInt,
    #[serde(with = "as_text")]
    pub twist: BigRational,
    /// Natural probability `|tr_1(m)| / Z_1^+`.
    #[serde(with = "as_text")]
    pub p: BigRational,
    /// Uniform probability `1 / |Ω_n|`.
    #[serde(with = "as_text")]
    pub p_uniform: BigRational,
}

/// Natural and uniform measures on `Ω_n` with the twist expectations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeasureReport {
    pub n: u32,
    pub rows: Vec<MeasureRow>,
    /// `Z_1^+ = Σ_m |tr_1(m)|`.
    #[serde(with = "as_text")]
    pub z1: BigInt,
    #[serde(with = "as_text")]
    pub expected_twist: BigRational,
    #[serde(with = "as_text")]
    pub expected_twist_uniform: BigRational,
}

impl MeasureReport {
    pub fn total_probability(&self) -> (BigRational, BigRational) {
        let p = self.rows.iter().fold(BigRational::zero(), |a, r| a + &r.p);
        let pu = self
            .rows
            .iter()
            .fold(BigRational::zero(), |a, r| a + &r.p_uniform);
        (p, pu)
    }
}

pub fn measure_report(g: &CiliatedPlanarGraph, n: u32) -> StatsResult<MeasureReport> {
    let phi = build_quantum_identity(g, n)?;
    let webs = enumerate_multiwebs(g, n);
    if webs.is_empty() {
        return Err(StatsError::NoDimerCover);
    }
    let traces = par::map_vec(&webs, |m| trace_full(&phi, g, m));
    let mut pre = Vec::with_capacity(webs.len());
    for (m, t) in webs.into_iter().zip(traces) {
        let t = t?;
        let (v, _, d2) = t.normalized.derivs_at_one();
        let tr1 = t.normalized.eval_at_one();
        pre.push((m, tr1, d2 / v));
    }
    let z1: BigInt = pre.iter().map(|(_, t, _)| t.abs()).sum();
    let count = BigInt::from(pre.len());
    let pu = BigRational::new(BigInt::one(), count);
    let rows: Vec<MeasureRow> = pre
        .into_iter()
        .map(|(multiweb, tr1, twist)| MeasureRow {
            p: BigRational::new(tr1.abs(), z1.clone()),
            p_uniform: pu.clone(),
            multiweb,
            tr1,
            twist,
        })
        .collect();
    let expected_twist = rows
        .iter()
        .fold(BigRational::zero(), |a, r| a + &r.twist * &r.p);
    let expected_twist_uniform = rows
        .iter()
        .fold(BigRational::zero(), |a, r| a + &r.twist * &r.p_uniform);
    Ok(MeasureReport {
        n,
        rows,
        z1,
        expected_twist,
        expected_twist_uniform,
    })
}

/// `E(X_n)` computed from the definition and from the second logarithmic
/// derivative of `Z_q^+`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwistExpectation {
    #[serde(with = "as_text")]
    pub by_definition: BigRational,
    #[serde(with = "as_text")]
    pub by_log_derivative: BigRational,
    #[serde(with = "as_text")]
    pub uniform: BigRational,
}

/// `(log f)''(1) = f''/f − (f'/f)²`.
pub fn log_second_derivative(f: &QLaurent) -> BigRational {
    let (v, d1, d2) = f.derivs_at_one();
    let r = &d1 / &v;
    d2 / v - &r * &r
}

pub fn expected_twist(g: &CiliatedPlanarGraph, n: u32) -> StatsResult<TwistExpectation> {
    let report = measure_report(g, n)?;
    let gp = positive_version(g)?;
    let z = crate::qtrace::zq(&gp, n)?;
    let by_log_derivative = log_second_derivative(&z);
    if by_log_derivative != report.expected_twist {
        return Err(StatsError::Inconsistent(format!(
            "E(X_{n}) by definition {} differs from log-derivative {}",
            report.expected_twist, by_log_derivative
        )));
    }
    Ok(TwistExpectation {
        by_definition: report.expected_twist,
        by_log_derivative,
        uniform: report.expected_twist_uniform,
    })
}

/// `E(L)` under the natural measure for `n = 2`, by enumeration.
pub fn expected_loops(g: &CiliatedPlanarGraph) -> StatsResult<BigRational> {
    let webs = enumerate_multiwebs(g, 2);
    if webs.is_empty() {
        return Err(StatsError::NoDimerCover);
    }
    let mut num = BigInt::zero();
    let mut den = BigInt::zero();
    for m in &webs {
        let l = loops(g, m)?;
        let w = BigInt::one() << l;
        num += &w * l;
        den += w;
    }
    Ok(BigRational::new(num, den))
}

/// `Σ_m L(m) / |Ω_2|`.
pub fn expected_loops_uniform_enumerated(g: &CiliatedPlanarGraph) -> StatsResult<BigRational> {
    let webs = enumerate_multiwebs(g, 2);
    if webs.is_empty() {
        return Err(StatsError::NoDimerCover);
    }
    let mut total = 0u64;
    for m in &webs {
        total += loops(g, m)? as u64;
    }
    Ok(BigRational::new(total.into(), webs.len().into()))
}

/// Element `a + bω` of `Q(ω)` with `ω = e^{iπ/3}`, `ω² = ω − 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eisenstein {
    pub a: BigRational,
    pub b: BigRational,
}

impl Eisenstein {
    pub fn zero() -> Self {
        Eisenstein {
            a: BigRational::zero(),
            b: BigRational::zero(),
        }
    }

    /// `ω^k`, periodic with period 6.
    pub fn omega_pow(k: i64) -> Self {
        let (a, b) = match k.rem_euclid(6) {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 1),
            3 => (-1, 0),
            4 => (0, -1),
            _ => (1, -1),
        };
        Eisenstein {
            a: rat(a),
            b: rat(b),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Eisenstein {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Eisenstein {
            a: &self.a * c,
            b: &self.b * c,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let bb = &self.b * &o.b;
        Eisenstein {
            a: &self.a * &o.a - &bb,
            b: &self.a * &o.b + &self.b * &o.a + bb,
        }
    }

    /// `a² + ab + b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a + &self.a * &self.b + &self.b * &self.b
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        let conj = Eisenstein {
            a: &self.a + &self.b,
            b: -self.b.clone(),
        };
        Some(Eisenstein {
            a: conj.a / &n,
            b: conj.b / n,
        })
    }

    pub fn real(&self) -> f64 {
        to_f64(&self.a) + to_f64(&self.b) / 2.0
    }

    pub fn imag(&self) -> f64 {
        to_f64(&self.b) * 3f64.sqrt() / 2.0
    }
}

/// Value and first derivative of an integer-exponent Laurent polynomial at `ω`.
fn eval_at_omega(f: &QLaurent) -> (Eisenstein, Eisenstein) {
    let mut v = Eisenstein::zero();
    let mut d = Eisenstein::zero();
    for (k, c) in f.terms() {
        let c = BigRational::from_integer(c.clone());
        v = v.add(&Eisenstein::omega_pow(k).scale(&c));
        d = d.add(&Eisenstein::omega_pow(k - 1).scale(&(c * rat(k))));
    }
    (v, d)
}

/// Result of the uniform-measure shortcut.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformLoops {
    #[serde(with = "as_text")]
    /// Real part, exact.
    pub value: BigRational,
    /// Imaginary residue (exactly zero when the formula applies).
    pub imaginary: f64,
}

/// `E^u(L) = Z'(ω) / ((1 + ω) Z(ω))`, since `√3 e^{iπ/6} = 1 + ω`.
pub fn expected_loops_uniform(g: &CiliatedPlanarGraph) -> StatsResult<UniformLoops> {
    let gp = positive_version(g)?;
    let z = crate::qtrace::zq(&gp, 2)?;
    uniform_from_partition(&z)
}

pub fn uniform_from_partition(z: &QLaurent) -> StatsResult<UniformLoops> {
    if z.denom() != 1 {
        return Err(StatsError::Inconsistent(
            "Z_q has fractional exponents".into(),
        ));
    }
    let (v, d) = eval_at_omega(z);
    let one_plus = Eisenstein {
        a: rat(1),
        b: rat(1),
    };
    let den = v
        .mul(&one_plus)
        .inverse()
        .ok_or_else(|| StatsError::Inconsistent("Z vanishes at ω".into()))?;
    let e = d.mul(&den);
    let imaginary = e.imag();
    if imaginary.abs() > 1e-12 {
        return Err(StatsError::Inconsistent(format!(
            "imaginary residue {imaginary}"
        )));
    }
    Ok(UniformLoops {
        value: &e.a + &e.b / rat(2),
        imaginary,
    })
}

/// Mean and variance of `Y^L` over colored multiwebs, with the per-multiweb
/// identity `X(m) = Σ_c Y_c² / |tr_1(m)|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalVariableReport {
    pub n: u32,
    pub colored_multiwebs: u64,
    #[serde(with = "as_text")]
    pub mean: BigRational,
    #[serde(with = "as_text")]
    pub variance: BigRational,
    #[serde(with = "as_text")]
    pub expected_twist: BigRational,
    pub per_multiweb_match: bool,
}

impl LocalVariableReport {
    pub fn passed(&self) -> bool {
        self.mean.is_zero() && self.variance == self.expected_twist && self.per_multiweb_match
    }
}

/// `2 Y^L` for every colouring of `m`.
fn doubled_local_values(g: &CiliatedPlanarGraph, m: &Multiweb) -> Vec<i64> {
    let orders: Vec<Vec<usize>> = (0..g.num_vertices()).map(|v| g.linear_order(v)).collect();
    let nv = g.num_vertices() as i64;
    let base = -nv * binom2(m.n) as i64 + 2 * m.mult.iter().map(|&k| binom2(k) as i64).sum::<i64>();
    let mut out = Vec::new();
    for_each_edge_coloring(g, m, |s| {
        let mut l = 0i64;
        for lin in &orders {
            let mut seen = 0u32;
            for &e in lin {
                for c in mask_colors(s[e]) {
                    l += (seen >> c).count_ones() as i64;
                }
                seen |= s[e];
            }
        }
        out.push(2 * l + base);
    });
    out
}

pub fn local_variable_suite(g: &CiliatedPlanarGraph, n: u32) -> StatsResult<LocalVariableReport> {
    if !g.is_trivial_ciliation() {
        return Err(StatsError::NotTrivial);
    }
    let report = measure_report(g, n)?;
    let per = par::map_vec(&report.rows, |r| doubled_local_values(g, &r.multiweb));
    let mut count = 0u64;
    let mut sum = BigInt::zero();
    let mut sq = BigInt::zero();
    let mut per_multiweb_match = true;
    for (r, ys) in report.rows.iter().zip(&per) {
        let s2: i64 = ys.iter().map(|y| y * y).sum();
        count += ys.len() as u64;
        sum += ys.iter().sum::<i64>();
        sq += s2;
        let x = BigRational::new(s2.into(), BigInt::from(4 * ys.len() as i64));
        per_multiweb_match &= x == r.twist;
    }
    let c = BigInt::from(count);
    let mean = BigRational::new(sum, BigInt::from(2) * &c);
    let second = BigRational::new(sq, BigInt::from(4) * &c);
    let variance = &second - &mean * &mean;
    Ok(LocalVariableReport {
        n,
        colored_multiwebs: count,
        mean,
        variance,
        expected_twist: report.expected_twist,
        per_multiweb_match,
    })
}

/// `z_0, …, z_{m_max}` for the 2×m ladders from
/// `z_m = 2 z_{m−1} + [2] z_{m−2} − z_{m−3}`.
pub fn snake_partition_functions(m_max: usize) -> Vec<QLaurent> {
    let two = QLaurent::qint(2);
    let mut z = vec![
        QLaurent::one(),
        QLaurent::one(),
        &QLaurent::constant(2) + &two,
    ];
    for m in 3..=m_max {
        let next = &(&z[m - 1].scale(&BigInt::from(2)) + &(&two * &z[m - 2])) - &z[m - 3];
        z.push(next);
    }
    z.truncate(m_max + 1);
    z
}

/// `Z_q = m + binom(m,2) [2]` for the zigzag with `m − 1` boxes.
pub fn zigzag_partition_function(m: u64) -> QLaurent {
    let b = BigInt::from(m * m.saturating_sub(1) / 2);
    &QLaurent::constant(m) + &QLaurent::qint(2).scale(&b)
}

/// Values `z_m(t)` and `z_m'(t)` of the ladder recurrence as polynomials in
/// `t = [2]`, evaluated at an integer point.
fn snake_values(t: i64, m_max: usize) -> Vec<(BigInt, BigInt)> {
    let t = BigInt::from(t);
    let mut z: Vec<BigInt> = vec![1.into(), 1.into(), BigInt::from(2) + &t];
    let mut d: Vec<BigInt> = vec![0.into(), 0.into(), 1.into()];
    for m in 3..=m_max {
        z.push(BigInt::from(2) * &z[m - 1] + &t * &z[m - 2] - &z[m - 3]);
        d.push(BigInt::from(2) * &d[m - 1] + &z[m - 2] + &t * &d[m - 2] - &d[m - 3]);
    }
    z.into_iter().zip(d).take(m_max + 1).collect()
}

/// Expected loop counts on the 2×m ladder: natural `2 z'(2)/z(2)` and
/// uniform `z'(1)/z(1)`.
pub fn snake_expected_loops(m: usize) -> (BigRational, BigRational) {
    let m_max = m.max(2);
    let (zn, dn) = snake_values(2, m_max)[m].clone();
    let (zu, du) = snake_values(1, m_max)[m].clone();
    (
        BigRational::new(BigInt::from(2) * dn, zn),
        BigRational::new(du, zu),
    )
}

/// Per-box loop growth on the ladder, estimated by `E_m − E_{m−1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SnakeSlopes {
    pub m: usize,
    pub natural: f64,
    pub uniform: f64,
    pub natural_target: f64,
    pub uniform_target: f64,
}

impl SnakeSlopes {
    pub fn relative_errors(&self) -> (f64, f64) {
        (
            (self.natural / self.natural_target - 1.0).abs(),
            (self.uniform / self.uniform_target - 1.0).abs(),
        )
    }
}

pub fn snake_slopes(m: usize) -> SnakeSlopes {
    assert!(m >= 3, "slope needs m >= 3");
    let nat = snake_values(2, m);
    let uni = snake_values(1, m);
    let e = |v: &[(BigInt, BigInt)], k: usize, scale: i64| {
        to_f64(&BigRational::new(
            BigInt::from(scale) * &v[k].1,
            v[k].0.clone(),
        ))
    };
    let rho = 2.0 * (std::f64::consts::PI / 7.0).cos();
    SnakeSlopes {
        m,
        natural: e(&nat, m, 2) - e(&nat, m - 1, 2),
        uniform: e(&uni, m, 1) - e(&uni, m - 1, 1),
        natural_target: (5f64.sqrt() - 1.0) / 5.0,
        uniform_target: (1.0 + 2.0 * rho - rho * rho) / 7.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{self, Family};
    use crate::qtrace::zq;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn small_families() -> Vec<CiliatedPlanarGraph> {
        let mut v = vec![
            generators::cycle(1),
            generators::cycle(2),
            generators::cycle(3),
            generators::cycle(4),
        ];
        for m in 2..=5 {
            v.push(generators::grid2xm(m));
            v.push(generators::zigzag(m));
        }
        v.push(generators::square_grid(2, 2).unwrap());
        v.push(generators::square_grid(3, 2).unwrap());
        v.push(generators::honeycomb_patch(1, 1).unwrap());
        v
    }

    #[test]
    fn cycle_twist_values() {
        let g = generators::cycle(3);
        let webs = enumerate_multiwebs(&g, 3);
        let m1 = webs.iter().find(|m| m.mult[0] == 1).unwrap();
        assert_eq!(twist(&g, m1).unwrap(), r(8, 3));
        for nn in 1..=3 {
            let g = generators::cycle(nn);
            for n in 1..=5u32 {
                let e = expected_twist(&g, n).unwrap();
                let want = (n as i64).pow(3) - n as i64;
                assert_eq!(e.by_definition, r(want, 12), "cycle({nn}), n={n}");
            }
        }
    }

    #[test]
    fn twist_on_doubled_and_loop() {
        let g = generators::cycle(2);
        for m in enumerate_multiwebs(&g, 2) {
            let x = twist(&g, &m).unwrap();
            let want = if m.mult.iter().all(|&k| k == 1) { 2 } else { 0 };
            assert_eq!(x, r(want, 2));
        }
    }

    #[test]
    fn twist_equals_loops_and_is_cilia_independent() {
        for g in small_families() {
            let other = g.rotate_cilium(0, true).reflect();
            for m in enumerate_multiwebs(&g, 2) {
                let x = twist(&g, &m).unwrap();
                assert_eq!(x, BigRational::from_integer(loops(&g, &m).unwrap().into()));
                assert_eq!(twist(&other, &m).unwrap(), x);
            }
            for m in enumerate_multiwebs(&g, 3) {
                assert!(!twist(&g, &m).unwrap().is_negative());
            }
        }
    }

    #[test]
    fn partition_function_is_loop_sum() {
        for g in small_families() {
            let gp = positive_version(&g).unwrap();
            let want: QLaurent = enumerate_multiwebs(&g, 2)
                .iter()
                .map(|m| QLaurent::qint(2).pow(loops(&g, m).unwrap()))
                .sum();
            assert_eq!(zq(&gp, 2).unwrap(), want);
        }
    }

    #[test]
    fn four_cycle_loops_by_hand() {
        let g = generators::cycle(2);
        assert_eq!(enumerate_multiwebs(&g, 2).len(), 3);
        assert_eq!(expected_loops(&g).unwrap(), r(1, 2));
        assert_eq!(expected_twist(&g, 2).unwrap().by_log_derivative, r(1, 2));
    }

    #[test]
    fn measures_sum_to_one() {
        for g in small_families() {
            for n in 1..=3 {
                let rep = measure_report(&g, n).unwrap();
                assert_eq!(
                    rep.total_probability(),
                    (BigRational::one(), BigRational::one())
                );
                let e = expected_twist(&g, n).unwrap();
                assert_eq!(e.by_definition, e.by_log_derivative);
            }
        }
    }

    #[test]
    fn uniform_loops() {
        let bigon = generators::cycle(1);
        let u = expected_loops_uniform(&bigon).unwrap();
        assert_eq!(u.value, r(1, 3));
        assert_eq!(u.imaginary, 0.0);
        for g in small_families() {
            assert_eq!(
                expected_loops_uniform(&g).unwrap().value,
                expected_loops_uniform_enumerated(&g).unwrap()
            );
        }
        for m in 1..=8u64 {
            let g = generators::zigzag(m as usize);
            let b = (m * (m - 1) / 2) as i64;
            assert_eq!(
                expected_loops_uniform(&g).unwrap().value,
                r(b, m as i64 + b)
            );
            assert_eq!(expected_loops(&g).unwrap(), r(2 * b, m as i64 + 2 * b));
        }
    }

    #[test]
    fn local_variable() {
        for n in 1..=3 {
            for g in [
                generators::grid2xm(3),
                generators::zigzag(4),
                generators::square_grid(2, 2).unwrap(),
            ] {
                let rep = local_variable_suite(&g, n).unwrap();
                assert!(rep.passed(), "{rep:?}");
                if n == 1 {
                    assert!(rep.variance.is_zero());
                }
            }
        }
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let g =
            generators::FamilySpec::new(Family::Cycle { n: 2 }, generators::CiliationMode::Trivial)
                .build(&mut rng)
                .unwrap();
        for n in 2..=3 {
            assert!(local_variable_suite(&g, n).unwrap().passed());
        }
        assert_eq!(
            local_variable_suite(&generators::cycle(2), 2),
            Err(StatsError::NotTrivial)
        );
    }

    #[test]
    fn snake_recurrence_matches_enumeration() {
        let z = snake_partition_functions(8);
        for (m, zm) in z.iter().enumerate().skip(1) {
            let g = positive_version(&generators::grid2xm(m)).unwrap();
            assert_eq!(&zq(&g, 2).unwrap(), zm, "m={m}");
            let (nat, uni) = snake_expected_loops(m);
            assert_eq!(nat, expected_loops(&g).unwrap());
            assert_eq!(uni, expected_loops_uniform_enumerated(&g).unwrap());
        }
        for m in 1..=8 {
            let g = positive_version(&generators::zigzag(m)).unwrap();
            assert_eq!(zq(&g, 2).unwrap(), zigzag_partition_function(m as u64));
        }
    }

    #[test]
    fn snake_slopes_at_300() {
        let s = snake_slopes(300);
        let (a, b) = s.relative_errors();
        assert!(a < 5e-3 && b < 5e-3, "{s:?}");
    }

    #[test]
    fn loops_edge_cases() {
        let g = generators::cycle(1);
        let webs = enumerate_multiwebs(&g, 2);
        let counts: Vec<u32> = webs.iter().map(|m| loops(&g, m).unwrap()).collect();
        assert_eq!(counts.iter().filter(|&&c| c == 1).count(), 1);
        assert_eq!(counts.iter().filter(|&&c| c == 0).count(), 2);
        let m3 = &enumerate_multiwebs(&g, 3)[0];
        assert_eq!(loops(&g, m3), Err(StatsError::NotTwoMultiweb));
    }
}
