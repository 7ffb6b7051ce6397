//! Canonical graph families with reference ciliations.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::multiweb::{dimer_covers, Multiweb};
use crate::pgraph::{CiliatedPlanarGraph, Color, GraphError, GraphResult};

/// Tilt applied to square-lattice drawings so that no edge is horizontal.
const TILT: f64 = 0.1;

/// The cycle with `2n` vertices, all cilia pointing into the outer face.
pub fn cycle(n: usize) -> CiliatedPlanarGraph {
    assert!(n >= 1, "cycle needs n >= 1");
    let nv = 2 * n;
    let colors: Vec<Color> = (0..nv)
        .map(|v| {
            if v % 2 == 0 {
                Color::Black
            } else {
                Color::White
            }
        })
        .collect();
    let edges: Vec<(usize, usize)> = (0..nv)
        .map(|i| {
            let j = (i + 1) % nv;
            if i % 2 == 0 {
                (i, j)
            } else {
                (j, i)
            }
        })
        .collect();
    let rotation: Vec<Vec<usize>> = (0..nv)
        .map(|v| {
            let prev = (v + nv - 1) % nv;
            if v % 2 == 0 {
                vec![v, prev]
            } else {
                vec![prev, v]
            }
        })
        .collect();
    let positions: Vec<[f64; 2]> = (0..nv)
        .map(|v| {
            let t = std::f64::consts::TAU * v as f64 / nv as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    let g = CiliatedPlanarGraph::new(colors, edges, rotation, vec![1; nv], Some((0, 1)))
        .expect("cycle is a valid plane graph");
    if n >= 2 {
        g.with_positions(positions)
    } else {
        g
    }
}

/// One black and one white vertex joined by a single edge.
pub fn single_edge() -> CiliatedPlanarGraph {
    CiliatedPlanarGraph::new(
        vec![Color::Black, Color::White],
        vec![(0, 1)],
        vec![vec![0], vec![0]],
        vec![0, 0],
        Some((0, 0)),
    )
    .expect("a single edge is a valid plane graph")
}

/// The bigon carrying a 3-multiweb with edge 0 simple and edge 1 doubled,
/// ciliated so that both linear orders list the doubled edge first.
pub fn small_three_web() -> (CiliatedPlanarGraph, Multiweb) {
    let g = cycle(1)
        .with_cilia(vec![0, 0])
        .expect("bigon cilia are valid");
    (
        g,
        Multiweb {
            n: 3,
            mult: vec![1, 2],
        },
    )
}

/// The edge of a cycle traversed from its black end when walking the inner
/// face counterclockwise.
pub fn cycle_distinguished_edge(g: &CiliatedPlanarGraph) -> usize {
    let (_, f) = g.internal_faces().next().expect("cycle has an inner face");
    (0..f.len())
        .find(|&i| g.color(f.corners[i].0) == Color::Black)
        .map(|i| f.edges[i])
        .expect("face has a black vertex")
}

fn tilt(p: [f64; 2]) -> [f64; 2] {
    let (s, c) = TILT.sin_cos();
    [p[0] * c - p[1] * s, p[0] * s + p[1] * c]
}

type Segment = ((i64, i64), (i64, i64));

/// Plane graph on unit-square lattice points; edges are the sides of the
/// listed boxes. Vertices are ordered row-major from the bottom.
fn box_union(boxes: &[(i64, i64)], extra: &[Segment]) -> GraphResult<CiliatedPlanarGraph> {
    let mut pts = BTreeSet::new();
    let mut segs = BTreeSet::new();
    for &(x, y) in boxes {
        let c = [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)];
        for i in 0..4 {
            let (a, b) = (c[i], c[(i + 1) % 4]);
            pts.insert(a);
            segs.insert(if (a.1, a.0) < (b.1, b.0) {
                (a, b)
            } else {
                (b, a)
            });
        }
    }
    for &(a, b) in extra {
        pts.insert(a);
        pts.insert(b);
        segs.insert((a, b));
    }
    let mut order: Vec<(i64, i64)> = pts.into_iter().collect();
    order.sort_by_key(|&(x, y)| (y, x));
    let index = |p: (i64, i64)| order.iter().position(|&q| q == p).unwrap();
    let colors: Vec<Color> = order
        .iter()
        .map(|&(x, y)| {
            if (x + y).rem_euclid(2) == 0 {
                Color::Black
            } else {
                Color::White
            }
        })
        .collect();
    let black = colors.iter().filter(|&&c| c == Color::Black).count();
    if 2 * black != colors.len() {
        return Err(GraphError::Unbalanced {
            black,
            white: colors.len() - black,
        });
    }
    let mut edges: Vec<(usize, usize)> = segs
        .into_iter()
        .map(|(a, b)| {
            let (i, j) = (index(a), index(b));
            if colors[i] == Color::Black {
                (i, j)
            } else {
                (j, i)
            }
        })
        .collect();
    edges.sort_by_key(|&(b, w)| (b.min(w), b.max(w)));
    let positions = order
        .iter()
        .map(|&(x, y)| tilt([x as f64, y as f64]))
        .collect();
    CiliatedPlanarGraph::from_positions(colors, edges, positions)
}

fn left_right(g: CiliatedPlanarGraph) -> CiliatedPlanarGraph {
    let h = g
        .ciliate_by_direction(std::f64::consts::PI, 0.0)
        .expect("graph has positions");
    assert!(
        h.is_trivial_ciliation(),
        "left/right rule must give a trivial ciliation"
    );
    h
}

/// The 2×m ladder with the left/right trivial ciliation.
pub fn grid2xm(m: usize) -> CiliatedPlanarGraph {
    assert!(m >= 1, "grid2xm needs m >= 1");
    let g = if m == 1 {
        box_union(&[], &[((0, 0), (0, 1))])
    } else {
        let boxes: Vec<(i64, i64)> = (0..m as i64 - 1).map(|i| (i, 0)).collect();
        box_union(&boxes, &[])
    };
    left_right(g.expect("ladder is valid"))
}

/// The staircase of `m-1` boxes alternately stepping up and right, with
/// the left/right trivial ciliation.
pub fn zigzag(m: usize) -> CiliatedPlanarGraph {
    assert!(m >= 1, "zigzag needs m >= 1");
    let g = if m == 1 {
        box_union(&[], &[((0, 0), (0, 1))])
    } else {
        let boxes: Vec<(i64, i64)> = (0..m as i64 - 1).map(|k| (k / 2, (k + 1) / 2)).collect();
        box_union(&boxes, &[])
    };
    left_right(g.expect("staircase is valid"))
}

/// The `w×h` square grid (vertex counts) with the left/right trivial
/// ciliation. Odd `w·h` is rejected.
pub fn square_grid(w: usize, h: usize) -> GraphResult<CiliatedPlanarGraph> {
    if w == 0 || h == 0 {
        return Err(GraphError::Invalid(
            "grid dimensions must be positive".into(),
        ));
    }
    let g = if w == 1 || h == 1 {
        let segs: Vec<_> = if w == 1 {
            (0..h as i64 - 1).map(|y| ((0, y), (0, y + 1))).collect()
        } else {
            (0..w as i64 - 1).map(|x| ((x, 0), (x + 1, 0))).collect()
        };
        if segs.is_empty() {
            return Err(GraphError::Unbalanced { black: 1, white: 0 });
        }
        box_union(&[], &segs)?
    } else {
        let boxes: Vec<(i64, i64)> = (0..h as i64 - 1)
            .flat_map(|y| (0..w as i64 - 1).map(move |x| (x, y)))
            .collect();
        box_union(&boxes, &[])?
    };
    Ok(left_right(g))
}

/// Honeycomb vertex labels: white `w(x,y)` sits at `x(√3,0)+y(√3/2,3/2)`,
/// black `b(x,y)` half a bond up and to the right of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HexVertex {
    pub color: Color,
    pub x: i64,
    pub y: i64,
}

impl HexVertex {
    pub fn position(&self) -> [f64; 2] {
        let s = 3f64.sqrt();
        let (px, py) = (
            self.x as f64 * s + self.y as f64 * s / 2.0,
            1.5 * self.y as f64,
        );
        match self.color {
            Color::White => [px, py],
            Color::Black => [px + s / 2.0, py + 0.5],
        }
    }
}

/// The six vertices of the hexagon `H(x,y)`, counterclockwise from the bottom.
pub fn hexagon(x: i64, y: i64) -> [HexVertex; 6] {
    let w = |x, y| HexVertex {
        color: Color::White,
        x,
        y,
    };
    let b = |x, y| HexVertex {
        color: Color::Black,
        x,
        y,
    };
    [
        w(x, y),
        b(x, y),
        w(x, y + 1),
        b(x - 1, y + 1),
        w(x - 1, y + 1),
        b(x - 1, y),
    ]
}

/// The union of hexagons `H(x,y)` for `0 <= x < a`, `0 <= y < b`, with
/// vertex labels. Vertices are ordered by height, then left to right.
pub fn honeycomb_patch_labeled(
    a: usize,
    b: usize,
) -> GraphResult<(CiliatedPlanarGraph, Vec<HexVertex>)> {
    if a == 0 || b == 0 {
        return Err(GraphError::Invalid(
            "patch dimensions must be positive".into(),
        ));
    }
    let mut verts = BTreeSet::new();
    let mut segs = BTreeSet::new();
    for x in 0..a as i64 {
        for y in 0..b as i64 {
            let h = hexagon(x, y);
            for i in 0..6 {
                verts.insert(h[i]);
                let (p, q) = (h[i], h[(i + 1) % 6]);
                segs.insert(if p.color == Color::Black {
                    (p, q)
                } else {
                    (q, p)
                });
            }
        }
    }
    let mut order: Vec<HexVertex> = verts.into_iter().collect();
    order.sort_by(|p, q| {
        let (pp, qp) = (p.position(), q.position());
        (pp[1], pp[0]).partial_cmp(&(qp[1], qp[0])).unwrap()
    });
    let index = |h: HexVertex| order.iter().position(|&o| o == h).unwrap();
    let colors: Vec<Color> = order.iter().map(|h| h.color).collect();
    let black = colors.iter().filter(|&&c| c == Color::Black).count();
    if 2 * black != colors.len() {
        return Err(GraphError::Unbalanced {
            black,
            white: colors.len() - black,
        });
    }
    let mut edges: Vec<(usize, usize)> = segs
        .into_iter()
        .map(|(p, q)| (index(p), index(q)))
        .collect();
    edges.sort_by_key(|&(b, w)| (b.min(w), b.max(w)));
    let positions = order.iter().map(|h| h.position()).collect();
    let g = CiliatedPlanarGraph::from_positions(colors, edges, positions)?;
    Ok((left_right(g), order))
}

pub fn honeycomb_patch(a: usize, b: usize) -> GraphResult<CiliatedPlanarGraph> {
    honeycomb_patch_labeled(a, b).map(|(g, _)| g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum Family {
    Cycle { n: usize },
    Grid2xm { m: usize },
    Zigzag { m: usize },
    SquareGrid { w: usize, h: usize },
    HoneycombPatch { a: usize, b: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiliationMode {
    Positive,
    Trivial,
    Custom(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub ciliation: CiliationMode,
}

impl Family {
    /// The family with its reference ciliation.
    pub fn build(&self) -> GraphResult<CiliatedPlanarGraph> {
        match *self {
            Family::Cycle { n } if n >= 1 => Ok(cycle(n)),
            Family::Grid2xm { m } if m >= 1 => Ok(grid2xm(m)),
            Family::Zigzag { m } if m >= 1 => Ok(zigzag(m)),
            Family::SquareGrid { w, h } => square_grid(w, h),
            Family::HoneycombPatch { a, b } => honeycomb_patch(a, b),
            _ => Err(GraphError::Invalid("family size must be positive".into())),
        }
    }
}

impl FamilySpec {
    pub fn new(family: Family, ciliation: CiliationMode) -> Self {
        FamilySpec { family, ciliation }
    }

    /// Builds the graph and applies the requested ciliation. Only the
    /// harmonic construction consumes randomness.
    pub fn build<R: Rng>(&self, rng: &mut R) -> GraphResult<CiliatedPlanarGraph> {
        let g = self.family.build()?;
        match &self.ciliation {
            CiliationMode::Custom(c) => g.with_cilia(c.clone()),
            CiliationMode::Positive => {
                if g.is_positive_ciliation() && matches!(self.family, Family::Cycle { .. }) {
                    return Ok(g);
                }
                let d = dimer_covers(&g);
                let first = d
                    .first()
                    .ok_or_else(|| GraphError::Invalid("graph has no dimer cover".into()))?;
                g.positive_ciliation_from_dimer(first)
            }
            CiliationMode::Trivial => {
                if g.is_trivial_ciliation() {
                    Ok(g)
                } else {
                    g.trivial_ciliation(rng)
                }
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Cycle { n } => write!(f, "cycle:{n}"),
            Family::Grid2xm { m } => write!(f, "grid2xm:{m}"),
            Family::Zigzag { m } => write!(f, "zigzag:{m}"),
            Family::SquareGrid { w, h } => write!(f, "square:{w}x{h}"),
            Family::HoneycombPatch { a, b } => write!(f, "honeycomb:{a}x{b}"),
        }
    }
}

impl FromStr for Family {
    type Err = GraphError;

    /// Parses `cycle:N`, `grid2xm:M`, `zigzag:M`, `square:WxH`, `honeycomb:AxB`.
    fn from_str(s: &str) -> GraphResult<Self> {
        let bad = || GraphError::Invalid(format!("unrecognised family `{s}`"));
        let (name, arg) = s.split_once(':').ok_or_else(bad)?;
        let one = || arg.trim().parse::<usize>().map_err(|_| bad());
        let two = || -> GraphResult<(usize, usize)> {
            let (a, b) = arg.split_once('x').ok_or_else(bad)?;
            Ok((
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ))
        };
        Ok(match name.trim() {
            "cycle" => Family::Cycle { n: one()? },
            "grid2xm" => Family::Grid2xm { m: one()? },
            "zigzag" => Family::Zigzag { m: one()? },
            "square" | "square_grid" => {
                let (w, h) = two()?;
                Family::SquareGrid { w, h }
            }
            "honeycomb" | "honeycomb_patch" => {
                let (a, b) = two()?;
                Family::HoneycombPatch { a, b }
            }
            _ => return Err(bad()),
        })
    }
}

impl FromStr for CiliationMode {
    type Err = GraphError;

    fn from_str(s: &str) -> GraphResult<Self> {
        match s {
            "positive" => Ok(CiliationMode::Positive),
            "trivial" => Ok(CiliationMode::Trivial),
            _ => {
                let c: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse()).collect();
                c.map(CiliationMode::Custom)
                    .map_err(|_| GraphError::Invalid(format!("bad ciliation `{s}`")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fib(m: usize) -> usize {
        let (mut a, mut b) = (1, 1);
        for _ in 1..m {
            (a, b) = (b, a + b);
        }
        a
    }

    #[test]
    fn cycle_shapes() {
        let b = cycle(1);
        assert_eq!((b.num_vertices(), b.num_edges()), (2, 2));
        let c = cycle(2);
        let inner: Vec<_> = c.internal_faces().collect();
        assert_eq!(inner.len(), 1);
        assert_eq!(inner[0].1.len(), 4);
        for n in 1..=5 {
            let g = cycle(n);
            assert_eq!(g.outward_cilia().unwrap().cilia(), g.cilia());
            let (fi, _) = g.internal_faces().next().unwrap();
            assert_eq!(g.inward_cilia(fi), 0);
            assert!(g.is_positive_ciliation());
            let e = cycle_distinguished_edge(&g);
            assert!(e < g.num_edges());
        }
    }

    #[test]
    fn dimer_counts() {
        for m in 1..=8 {
            assert_eq!(dimer_covers(&grid2xm(m)).len(), fib(m + 1), "grid2xm({m})");
            assert_eq!(dimer_covers(&zigzag(m)).len(), m, "zigzag({m})");
        }
        assert_eq!(dimer_covers(&square_grid(2, 2).unwrap()).len(), 2);
        assert_eq!(dimer_covers(&honeycomb_patch(1, 1).unwrap()).len(), 2);
    }

    #[test]
    fn sizes() {
        assert_eq!(grid2xm(1).num_edges(), 1);
        assert_eq!(grid2xm(1).num_vertices(), 2);
        assert_eq!(square_grid(2, 2).unwrap().num_edges(), 4);
        assert!(matches!(
            square_grid(3, 3),
            Err(GraphError::Unbalanced { .. })
        ));
        for (a, b, v) in [(1, 1, 6), (2, 2, 16), (3, 3, 30), (4, 3, 38)] {
            let g = honeycomb_patch(a, b).unwrap();
            assert_eq!(g.num_vertices(), v);
            assert_eq!(g.num_vertices(), 2 * (a + 1) * (b + 1) - 2);
            for (_, f) in g.internal_faces() {
                assert_eq!(f.len(), 6);
            }
            assert_eq!(g.internal_faces().count(), a * b);
        }
    }

    #[test]
    fn honeycomb_vertical_edges_have_black_below() {
        let (g, labels) = honeycomb_patch_labeled(2, 2).unwrap();
        for e in g.edges() {
            let (pb, pw) = (labels[e.black].position(), labels[e.white].position());
            if (pb[0] - pw[0]).abs() < 1e-9 {
                assert!(pb[1] < pw[1]);
            }
        }
    }

    #[test]
    fn reference_ciliations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fams = [
            Family::Cycle { n: 1 },
            Family::Cycle { n: 3 },
            Family::Grid2xm { m: 4 },
            Family::Zigzag { m: 5 },
            Family::SquareGrid { w: 2, h: 3 },
            Family::SquareGrid { w: 4, h: 3 },
            Family::HoneycombPatch { a: 2, b: 1 },
        ];
        for f in fams {
            let t = FamilySpec::new(f.clone(), CiliationMode::Trivial)
                .build(&mut rng)
                .unwrap();
            assert!(t.is_trivial_ciliation(), "{f}");
            let p = FamilySpec::new(f.clone(), CiliationMode::Positive)
                .build(&mut rng)
                .unwrap();
            assert!(p.is_positive_ciliation(), "{f}");
        }
    }

    #[test]
    fn family_parse_round_trip() {
        for s in [
            "cycle:3",
            "grid2xm:4",
            "zigzag:2",
            "square:2x4",
            "honeycomb:2x3",
        ] {
            let f: Family = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("hex:2".parse::<Family>().is_err());
    }
}
